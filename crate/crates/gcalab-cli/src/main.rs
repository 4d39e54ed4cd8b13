//! `gcalab`: load group cellular automata, decide their properties, and cross-check them.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gcalab::corpus::{corpus_check, write_bundled_corpus, CorpusOptions};
use gcalab::decompose::{explicit_decomposition, DecomposeOptions};
use gcalab::gca::PeriodicConfiguration;
use gcalab::group::{Budgets, Elem};
use gcalab::io::{load_gca_file, load_group_file, tree_to_json, LoadError};
use gcalab::oracle::{
    debruijn_injective, debruijn_surjective, entropy_estimates, local_map_balance, radius_growth_profile, simulate,
};
use gcalab::properties::{full_report, EngineOptions, PropertyReport, PROPERTY_NAMES};
use gcalab::verdict::{Method, Truth, Verdict};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "gcalab", version, about = "Decide dynamical properties of group cellular automata")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    json: bool,
    /// Largest group order for which End(G) is enumerated.
    #[arg(long, env = "GCALAB_ENDO_BUDGET", global = true)]
    endo_budget: Option<usize>,
    /// Largest de Bruijn graph (q^span nodes) handed to the oracle.
    #[arg(long, env = "GCALAB_ORACLE_BUDGET", global = true)]
    oracle_budget: Option<usize>,
    /// Largest number of power rules computed by the sensitivity decider.
    #[arg(long, env = "GCALAB_POWER_BUDGET", global = true)]
    power_budget: Option<usize>,
    /// Keep non-elementary abelian pieces as leaves instead of refining them.
    #[arg(long, global = true)]
    no_refine: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a rule or group file.
    Validate {
        #[arg(long, conflicts_with = "group", required_unless_present = "group")]
        gca: Option<PathBuf>,
        #[arg(long)]
        group: Option<PathBuf>,
    },
    /// Print the decomposition tree.
    Decompose {
        #[arg(long)]
        gca: PathBuf,
    },
    /// Decide one property; the exit code is 0, 1 or 2 for true, false, unknown.
    Decide {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PROPERTY_NAMES))]
        property: String,
        #[arg(long)]
        gca: PathBuf,
        /// Skip the de Bruijn cross-check.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Exact topological entropy, optionally with rectangle-count estimates.
    Entropy {
        #[arg(long)]
        gca: PathBuf,
        /// Largest window width for estimates; 0 disables them.
        #[arg(long, default_value_t = 0)]
        estimate_w: usize,
        /// Height of the estimation window.
        #[arg(long, default_value_t = 8)]
        estimate_t: usize,
    },
    /// Evolve a periodic configuration.
    Simulate {
        #[arg(long)]
        gca: PathBuf,
        /// Initial cells as comma- or space-separated element indices; default is an impulse.
        #[arg(long)]
        config: Option<String>,
        /// Ring width for the default impulse.
        #[arg(long, default_value_t = 31)]
        width: usize,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Also write the space-time diagram as a PGM image.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Run the brute-force oracles and compare them with the deciders.
    OracleCheck {
        #[arg(long)]
        gca: PathBuf,
        #[arg(long, default_value_t = 64)]
        n_max: usize,
    },
    /// Every verdict and the entropy.
    Report {
        #[arg(long)]
        gca: PathBuf,
        #[arg(long)]
        no_oracle: bool,
    },
    /// Cross-check every rule file in a directory; exits 1 on any disagreement.
    CorpusCheck {
        dir: PathBuf,
        /// Write the JSON summary here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write the seeded corpus of rule files.
    GenCorpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        per_group: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = if matches!(e, LoadError::Io { .. }) { EXIT_NO_INPUT } else { EXIT_DATA };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

impl Global {
    fn json(&self) -> bool {
        self.json || self.format == Format::Json
    }

    fn budgets(&self) -> Budgets {
        let d = Budgets::default();
        Budgets {
            endo: self.endo_budget.unwrap_or(d.endo),
            oracle: self.oracle_budget.unwrap_or(d.oracle),
            power: self.power_budget.unwrap_or(d.power),
            ..d
        }
    }

    fn engine(&self, cross_check: bool) -> EngineOptions {
        EngineOptions { budgets: self.budgets(), refine_abelian: !self.no_refine, cross_check }
    }
}

fn truth_code(t: Truth) -> u8 {
    match t {
        Truth::True => 0,
        Truth::False => 1,
        Truth::Unknown => 2,
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// `oracle+decomposition agree`, or the method when the oracle did not run.
fn provenance(v: &Verdict) -> String {
    match v.certificate.get("oracle") {
        Some(o) if o.get("agrees") == Some(&json!(true)) => "oracle+decomposition agree".into(),
        Some(o) if o.get("agrees") == Some(&json!(false)) => "ORACLE DISAGREES".into(),
        _ => match v.method {
            Method::Decomposition => "decomposition",
            Method::Oracle => "oracle",
            Method::LeafFormula => "leaf formula",
            Method::Extension => "extension",
        }
        .into(),
    }
}

fn report_text(r: &PropertyReport) -> String {
    let mut out = String::new();
    for name in PROPERTY_NAMES {
        let v = r.get(name).unwrap();
        out.push_str(&format!("{name}: {} ({})\n", v.value, provenance(v)));
    }
    out.push_str(&format!("entropy: {}\n", r.entropy));
    out
}

fn tree_text(node: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    if let Some(sub) = node.get("subgroup") {
        out.push_str(&format!("{pad}split |G| = {} via {}\n", node["order"], node["via"]["source"].as_str().unwrap_or("?")));
        out.push_str(&format!("{pad}  subgroup:\n"));
        tree_text(sub, depth + 2, out);
        out.push_str(&format!("{pad}  quotient:\n"));
        tree_text(&node["quotient"], depth + 2, out);
    } else {
        out.push_str(&format!("{pad}leaf |G| = {} {}\n", node["order"], node["kind"]));
    }
}

fn parse_cells(text: &str, order: usize) -> Result<Vec<Elem>, Failure> {
    let cells: Result<Vec<Elem>, _> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Elem>())
        .collect();
    let cells = cells.map_err(|e| Failure { code: EXIT_USAGE, message: format!("--config: {e}") })?;
    if cells.is_empty() {
        return Err(Failure { code: EXIT_USAGE, message: "--config: no cells".into() });
    }
    if let Some(x) = cells.iter().find(|&&x| x as usize >= order) {
        return Err(Failure { code: EXIT_USAGE, message: format!("--config: {x} is not an element of a group of order {order}") });
    }
    Ok(cells)
}

/// Writes to stdout, ignoring a closed pipe.
fn out(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn emit(global: &Global, json_value: Value, text: impl FnOnce() -> String) {
    if global.json() {
        out(&(pretty(&json_value) + "\n"));
    } else {
        out(&text());
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Validate { gca, group } => {
            if let Some(path) = gca {
                let rule = load_gca_file(&path)?;
                let v = json!({
                    "valid": true,
                    "order": rule.group().order(),
                    "radius": rule.radius(),
                    "offsets": rule.nontrivial_offsets(),
                });
                emit(g, v, || {
                    format!("valid: group of order {}, radius {}\n", rule.group().order(), rule.radius())
                });
            } else if let Some(path) = group {
                let grp = load_group_file(&path)?;
                let v = json!({ "valid": true, "order": grp.order(), "abelian": grp.is_abelian() });
                emit(g, v, || format!("valid: group of order {}\n", grp.order()));
            }
            Ok(0)
        }
        Command::Decompose { gca } => {
            let rule = load_gca_file(&gca)?;
            let opts = DecomposeOptions { budgets: g.budgets(), refine_abelian: !g.no_refine };
            match explicit_decomposition(&rule, &opts) {
                Ok(tree) => {
                    let v = tree_to_json(&tree);
                    emit(g, v.clone(), || {
                        let mut s = format!("leaf orders: {:?}\n", tree.leaf_orders());
                        tree_text(&v["root"], 0, &mut s);
                        s
                    });
                    Ok(0)
                }
                Err(e) => {
                    emit(g, json!({ "error": e.to_string() }), || format!("decomposition stuck: {e}\n"));
                    Ok(2)
                }
            }
        }
        Command::Decide { property, gca, no_oracle } => {
            let rule = load_gca_file(&gca)?;
            let report = full_report(&rule, &g.engine(!no_oracle));
            let v = report.get(&property).expect("validated by clap").clone();
            let code = truth_code(v.value);
            emit(g, json!({ "property": property, "verdict": v }), || {
                format!("{property}: {} ({})\n", v.value, provenance(&v))
            });
            Ok(code)
        }
        Command::Entropy { gca, estimate_w, estimate_t } => {
            let rule = load_gca_file(&gca)?;
            let e = gcalab::properties::entropy(&rule, &g.engine(false));
            let estimates = if estimate_w > 0 { entropy_estimates(&rule, estimate_w, estimate_t.max(1)) } else { Vec::new() };
            let approx = e.to_f64();
            emit(g, json!({ "entropy": e, "approx": approx, "estimates": estimates }), || {
                let mut s = match approx {
                    Some(x) => format!("entropy: {e} = {x:.6}\n"),
                    None => format!("entropy: {e}\n"),
                };
                for est in &estimates {
                    let tag = if est.exact { "exact" } else { "sampled" };
                    s.push_str(&format!("  w={} t={}: {:.6} ({} rectangles, {tag})\n", est.w, est.t, est.value, est.rectangles));
                }
                s
            });
            Ok(if e.is_exact() { 0 } else { 2 })
        }
        Command::Simulate { gca, config, width, steps, pgm } => {
            let rule = load_gca_file(&gca)?;
            let q = rule.group().order();
            let cells = match config {
                Some(text) => parse_cells(&text, q)?,
                None => {
                    let width = width.max(1);
                    let mut c = vec![0 as Elem; width];
                    c[width / 2] = rule.group().generators().first().copied().unwrap_or(0);
                    c
                }
            };
            let block = simulate(&rule, &PeriodicConfiguration::new(cells), steps);
            if let Some(path) = &pgm {
                std::fs::write(path, block.to_pgm(q)).map_err(|e| io_failure(path, e))?;
            }
            let names = rule.group().names().map(<[String]>::to_vec);
            emit(g, serde_json::to_value(&block).expect("serializable"), || block.to_text(names.as_deref()));
            Ok(0)
        }
        Command::OracleCheck { gca, n_max } => {
            let rule = load_gca_file(&gca)?;
            let budgets = g.budgets();
            let report = full_report(&rule, &g.engine(false));
            let as_json = |r: Result<bool, gcalab::oracle::OracleError>| match r {
                Ok(b) => json!(b),
                Err(e) => json!({ "skipped": e.to_string() }),
            };
            let surj = debruijn_surjective(&rule, budgets.oracle);
            let inj = debruijn_injective(&rule, budgets.oracle);
            let mut disagree = false;
            let mut undecided = false;
            for (engine, oracle) in [(&report.surjective, &surj), (&report.injective, &inj)] {
                match (engine.value.as_bool(), oracle) {
                    (Some(e), Ok(o)) => disagree |= e != *o,
                    _ => undecided = true,
                }
            }
            let balance = local_map_balance(&rule, 1 << 22);
            let profile = radius_growth_profile(&rule, n_max);
            let v = json!({
                "surjective": { "oracle": as_json(surj.clone()), "engine": report.surjective.value },
                "injective": { "oracle": as_json(inj.clone()), "engine": report.injective.value },
                "local_balance": balance,
                "radius_profile": profile,
                "agree": !disagree,
            });
            emit(g, v, || {
                let show = |r: &Result<bool, _>| match r {
                    Ok(b) => b.to_string(),
                    Err(e) => format!("skipped ({e})"),
                };
                format!(
                    "surjective: oracle {}, engine {}\ninjective: oracle {}, engine {}\nlocal map: surjective {}, balanced {}, image order {}\nradius profile: max {} over {} powers, repeat {:?}\n",
                    show(&surj),
                    report.surjective.value,
                    show(&inj),
                    report.injective.value,
                    balance.surjective,
                    balance.balanced,
                    balance.image_order,
                    profile.max_radius(),
                    profile.radii.len(),
                    profile.repeat,
                )
            });
            Ok(if disagree { 1 } else if undecided { 2 } else { 0 })
        }
        Command::Report { gca, no_oracle } => {
            let rule = load_gca_file(&gca)?;
            let report = full_report(&rule, &g.engine(!no_oracle));
            emit(g, serde_json::to_value(&report).expect("serializable"), || report_text(&report));
            Ok(0)
        }
        Command::CorpusCheck { dir, output, threads } => {
            let mut opts = CorpusOptions { engine: g.engine(false), ..CorpusOptions::default() };
            if let Some(t) = threads {
                opts.threads = t;
            }
            let summary = corpus_check(&dir, &opts).map_err(|e| Failure { code: EXIT_NO_INPUT, message: format!("{}: {e}", dir.display()) })?;
            let text = pretty(&summary) + "\n";
            match &output {
                Some(path) => std::fs::write(path, &text).map_err(|e| io_failure(path, e))?,
                None if g.json() => out(&text),
                None => {}
            }
            if !g.json() || output.is_some() {
                let s = &summary["summary"];
                eprintln!(
                    "{} files, {} load failures, {} disagreements, {} oracle skipped",
                    s["files"], s["load_failures"], s["disagreements"], s["oracle_skipped"]
                );
                for d in summary["disagreements"].as_array().into_iter().flatten() {
                    eprintln!("  disagreement: {} {}", d["file"].as_str().unwrap_or(""), d["check"].as_str().unwrap_or(""));
                }
            }
            Ok(if summary["summary"]["disagreements"] == json!(0) { 0 } else { 1 })
        }
        Command::GenCorpus { dir, seed, per_group } => {
            write_bundled_corpus(&dir, seed, per_group).map_err(|e| io_failure(&dir, e))?;
            let n = std::fs::read_dir(&dir).map_err(|e| io_failure(&dir, e))?.count();
            emit(g, json!({ "files": n }), || format!("wrote {n} files to {}\n", dir.display()));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
