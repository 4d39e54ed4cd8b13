//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use gcalab::corpus::{check_rule, corpus_check, generate_corpus, CorpusOptions};
use gcalab::gca::{validate_rule, LocalRule, PeriodicConfiguration};
use gcalab::group::library::{alternating, cyclic};
use gcalab::group::{Elem, FiniteGroup};
use gcalab::io::load_gca_file;
use gcalab::oracle::{debruijn_surjective, entropy_estimate, local_map_balance, simulate, BalanceMethod};
use gcalab::properties::{entropy, full_report, simple_product_full_report, EngineOptions, EntropyValue};
use gcalab::simple_product::{
    build_factor_graph, inner_automorphism, minimal_split, shift_power_identity, SimpleProductRule, Wire,
};

/// Relative tolerance for rectangle-count estimates.
const ESTIMATE_TOLERANCE: f64 = 0.10;
const CORPUS_SEED: u64 = 2024;
const PER_GROUP: usize = 25;
const MIN_CORPUS: usize = 200;
const MIN_MINIMAL_RULES: usize = 10;
const CONFIGS_PER_RULE: usize = 100;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn xor(g: FiniteGroup) -> LocalRule {
    let id: Vec<Elem> = g.elements().collect();
    validate_rule(Arc::new(g), 1, &BTreeMap::from([(-1, id.clone()), (1, id)])).unwrap()
}

type Outcome = Result<String, String>;

fn oracle_agreement() -> Outcome {
    let rules = generate_corpus(CORPUS_SEED, PER_GROUP);
    if rules.len() < MIN_CORPUS {
        return Err(format!("only {} rules", rules.len()));
    }
    let opts = CorpusOptions::default();
    let mut bad = Vec::new();
    for (name, rule) in &rules {
        let entry = check_rule(rule, &opts);
        for key in ["oracle_surjective", "oracle_injective"] {
            let c = &entry["checks"][key];
            if c["agree"] != Value::Bool(true) {
                bad.push(format!("{name}:{key}={c}"));
            }
        }
    }
    if bad.is_empty() {
        Ok(format!("{} rules, surjectivity and injectivity match the oracle on all", rules.len()))
    } else {
        Err(format!("{} mismatches or undecided: {}", bad.len(), bad.join(", ")))
    }
}

fn dead_factor_in(cert: &Value) -> Option<u64> {
    cert["leaves"].as_array()?.iter().find_map(|l| {
        l["verdict"]["certificate"]["blocks"].as_array()?.iter().find_map(|b| b["dead_factor"].as_u64())
    })
}

fn surjective_local_map_non_surjective_gca() -> Outcome {
    let opts = EngineOptions::default();
    let a5 = load_gca_file(&corpus_dir().join("fsur_counterexample.json")).map_err(|e| e.to_string())?;
    let bal = local_map_balance(&a5, 1 << 22);
    let rep = full_report(&a5, &opts);
    let dead = dead_factor_in(&rep.surjective.certificate);
    let z3 = load_gca_file(&corpus_dir().join("fsur_z3.json")).map_err(|e| e.to_string())?;
    let bal3 = local_map_balance(&z3, 1 << 22);
    let rep3 = full_report(&z3, &opts);
    let oracle3 = debruijn_surjective(&z3, opts.budgets.oracle).map_err(|e| e.to_string())?;
    let ok = a5.group().order() == 3600
        && bal.surjective
        && bal.balanced
        && rep.surjective.is_false()
        && dead.is_some()
        && bal3.surjective
        && bal3.balanced
        && bal3.method == BalanceMethod::Count
        && rep3.surjective.is_false()
        && !oracle3;
    let detail = format!(
        "A5xA5: local map onto={} balanced={}, surjective={}, dead factor {:?}; Z3xZ3: local map onto={} balanced={}, surjective={}, oracle {}",
        bal.surjective, bal.balanced, rep.surjective.value, dead, bal3.surjective, bal3.balanced, rep3.surjective.value, oracle3
    );
    if ok { Ok(detail) } else { Err(detail) }
}

/// The four-factor wiring on `S^4` whose factor permutation is one 4-cycle.
fn four_factor(s: Arc<FiniteGroup>) -> SimpleProductRule {
    let id: Vec<Elem> = s.elements().collect();
    let w = |source, offset| Some(Wire { source, offset, auto: id.clone() });
    SimpleProductRule::new(s.clone(), vec![w(2, 1), w(0, -1), w(3, 0), w(1, -1)]).unwrap()
}

/// Random single-cycle wirings with random inner automorphisms.
fn minimal_rules(s: &Arc<FiniteGroup>, count: usize, rng: &mut ChaCha8Rng) -> Vec<SimpleProductRule> {
    let mut out = Vec::new();
    while out.len() < count {
        let m = rng.gen_range(1..=3usize);
        let mut order: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut wires = vec![None; m];
        for i in 0..m {
            let g = rng.gen_range(0..s.order() as Elem);
            wires[order[(i + 1) % m]] =
                Some(Wire { source: order[i], offset: rng.gen_range(-2..=2), auto: inner_automorphism(s, g) });
        }
        let rule = SimpleProductRule::new(s.clone(), wires).unwrap();
        if minimal_split(&rule).len() == 1 {
            out.push(rule);
        }
    }
    out
}

fn power_is_a_shift() -> Outcome {
    let s = Arc::new(alternating(5));
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let mut rules = minimal_rules(&s, MIN_MINIMAL_RULES, &mut rng);
    let four = four_factor(s.clone());
    rules.push(four.clone());
    let mut checked = 0;
    for rule in &rules {
        let (n, shift) = shift_power_identity(rule).map_err(|e| e.to_string())?;
        let p = rule.power(n);
        for _ in 0..CONFIGS_PER_RULE {
            let period = rng.gen_range(1..=12usize);
            let c: Vec<Vec<Elem>> =
                (0..period).map(|_| (0..rule.m()).map(|_| rng.gen_range(0..60)).collect()).collect();
            let rotated: Vec<Vec<Elem>> =
                (0..period as i64).map(|i| c[(i - shift).rem_euclid(period as i64) as usize].clone()).collect();
            if p.apply(&c) != rotated {
                return Err(format!("F^{n} is not the shift by {shift} on some configuration"));
            }
            checked += 1;
        }
    }
    let g = build_factor_graph(&four);
    let (n4, s4) = shift_power_identity(&four).map_err(|e| e.to_string())?;
    let ok = g.label_sum() == -1 && g.o == Some(4) && g.cycles.as_deref() == Some("(1,2,4,3)");
    let detail = format!(
        "{} rules, {checked} configurations; four-factor: sum i*r_i = {}, o = {:?}, cycle {:?}, F^{n4} = shift by {s4}",
        rules.len(),
        g.label_sum(),
        g.o,
        g.cycles
    );
    if ok { Ok(detail) } else { Err(detail) }
}

fn entropy_values() -> Outcome {
    let opts = EngineOptions::default();
    let mut lines = Vec::new();
    let mut ok = true;
    let log60 = EntropyValue::log(60);
    let sa5 = entropy(&LocalRule::shift(Arc::new(alternating(5)), 1), &opts);
    ok &= sa5.same_value(&log60);
    lines.push(format!("shift on A5 = {sa5}"));
    let four = simple_product_full_report(&four_factor(Arc::new(alternating(5)))).entropy;
    ok &= four.same_value(&log60);
    lines.push(format!("four-factor = {four}"));
    let cases: [(&str, LocalRule, usize, usize, f64); 4] = [
        ("shift Z2", LocalRule::shift(Arc::new(cyclic(2)), 1), 2, 12, 2f64.ln()),
        ("shift Z3", LocalRule::shift(Arc::new(cyclic(3)), 1), 2, 12, 3f64.ln()),
        ("XOR Z2", xor(cyclic(2)), 2, 10, 2.0 * 2f64.ln()),
        ("XOR Z3", xor(cyclic(3)), 2, 6, 2.0 * 3f64.ln()),
    ];
    for (name, rule, w, t, closed) in cases {
        let e = entropy_estimate(&rule, w, t);
        let exact = entropy(&rule, &opts).to_f64().unwrap_or(f64::NAN);
        let rel = (e.value - closed).abs() / closed;
        ok &= e.exact && rel <= ESTIMATE_TOLERANCE && (exact - closed).abs() < 1e-12;
        lines.push(format!("{name} w={w} t={t}: {:.4} vs {:.4} ({:.1}%)", e.value, closed, rel * 100.0));
    }
    if ok { Ok(lines.join("; ")) } else { Err(lines.join("; ")) }
}

fn files(summary: &Value) -> &[Value] {
    summary["files"].as_array().map(Vec::as_slice).unwrap_or(&[])
}

fn sensitivity_agreement(summary: &Value) -> Outcome {
    let mut bad = Vec::new();
    for f in files(summary) {
        if f["checks"]["sensitivity"]["agree"] == Value::Bool(false) {
            bad.push(f["file"].to_string());
        }
    }
    let unknown = summary["summary"]["unknown"]["sensitive"].as_u64().unwrap_or(u64::MAX);
    let n = files(summary).len();
    let detail = format!("{n} files, {} disagreements, unknown rate {unknown}/{n}", bad.len());
    if bad.is_empty() && unknown == 0 && n > 0 { Ok(detail) } else { Err(format!("{detail}: {}", bad.join(", "))) }
}

fn strong_transitivity(summary: &Value) -> Outcome {
    let non_abelian: Vec<&Value> = files(summary).iter().filter(|f| f["group"]["abelian"] == Value::Bool(false)).collect();
    let failing = non_abelian.iter().filter(|f| f["checks"]["non_abelian_st_pe_false"] != Value::Bool(true)).count();
    let r = full_report(&xor(cyclic(2)), &EngineOptions::default());
    let width = 41;
    let center = width / 2;
    let mut cells = vec![0; width];
    cells[center] = 1;
    let block = simulate(&xor(cyclic(2)), &PeriodicConfiguration::new(cells), 11);
    let cone = (1..11).all(|t| {
        let row = &block.cells[t];
        let lo = row.iter().position(|&x| x != 0);
        let hi = row.iter().rposition(|&x| x != 0);
        lo == Some(center - t) && hi == Some(center + t)
    });
    let ok = failing == 0 && !non_abelian.is_empty() && r.positively_expansive.is_true() && cone;
    let detail = format!(
        "{} non-abelian rules, {failing} with a non-false verdict; XOR on Z2 positively expansive = {}, two-sided cone = {cone}",
        non_abelian.len(),
        r.positively_expansive.value
    );
    if ok { Ok(detail) } else { Err(detail) }
}

fn solvable_leaves(summary: &Value) -> Outcome {
    let solvable: Vec<&Value> = files(summary).iter().filter(|f| f["group"]["solvable"] == Value::Bool(true)).collect();
    let non_abelian_leaf = solvable.iter().filter(|f| f["checks"]["solvable_abelian_leaves"] != Value::Bool(true)).count();
    let bad_product = files(summary).iter().filter(|f| f["checks"]["order_product"] != Value::Bool(true)).count();
    let detail = format!(
        "{} solvable rules, {non_abelian_leaf} with a non-abelian leaf; {bad_product} runs with leaf order product != |G|",
        solvable.len()
    );
    if non_abelian_leaf == 0 && bad_product == 0 && !solvable.is_empty() { Ok(detail) } else { Err(detail) }
}

fn determinism() -> Outcome {
    let dir = corpus_dir();
    let a = serde_json::to_string_pretty(&corpus_check(&dir, &CorpusOptions::default()).map_err(|e| e.to_string())?).unwrap();
    let b = serde_json::to_string_pretty(&corpus_check(&dir, &CorpusOptions::default()).map_err(|e| e.to_string())?).unwrap();
    let single = CorpusOptions { threads: 1, ..CorpusOptions::default() };
    let c = serde_json::to_string_pretty(&corpus_check(&dir, &single).map_err(|e| e.to_string())?).unwrap();
    if a == b && b == c {
        Ok(format!("three runs ({} bytes each) identical", a.len()))
    } else {
        Err("reports differ between runs".into())
    }
}

fn main() {
    let summary = corpus_check(&corpus_dir(), &CorpusOptions::default()).expect("bundled corpus is readable");
    let results: Vec<(&str, Outcome)> = vec![
        ("decomposition vs de Bruijn oracle on the generated corpus", oracle_agreement()),
        ("surjective local map, non-surjective rule", surjective_local_map_non_surjective_gca()),
        ("minimal surjective rules on A5^m are powers of shifts", power_is_a_shift()),
        ("exact entropy and rectangle-count estimates", entropy_values()),
        ("sensitivity vs radius profile on the bundled corpus", sensitivity_agreement(&summary)),
        ("strong transitivity and positive expansivity", strong_transitivity(&summary)),
        ("solvable groups decompose into abelian leaves", solvable_leaves(&summary)),
        ("corpus check is deterministic", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(d) => println!("criterion {}: PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
