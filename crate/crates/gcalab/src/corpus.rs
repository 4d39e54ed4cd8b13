//! Seeded rule corpora and the end-to-end cross-check driver.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::decompose::{explicit_decomposition, DecomposeOptions};
use crate::gca::{validate_rule, LocalRule};
use crate::group::library::*;
use crate::group::{enumerate_endomorphisms, is_solvable, Elem, FiniteGroup};
use crate::io::{gca_to_json, load_gca_file};
use crate::oracle::{debruijn_injective, debruijn_surjective, radius_growth_profile};
use crate::properties::{full_report, EngineOptions, PROPERTY_NAMES};
use crate::verdict::Truth;

/// Groups of the generated corpus with the largest span of nontrivial
/// offsets used for each, chosen so every rule stays within the oracle.
pub fn corpus_groups() -> Vec<(&'static str, FiniteGroup, usize)> {
    vec![
        ("z2", cyclic(2).with_name("Z2"), 4),
        ("z3", cyclic(3).with_name("Z3"), 4),
        ("z4", cyclic(4).with_name("Z4"), 4),
        ("z6", cyclic(6).with_name("Z6"), 4),
        ("v4", klein_four().with_name("V4"), 4),
        ("s3", symmetric(3).with_name("S3"), 4),
        ("d4", dihedral(4).with_name("D4"), 3),
        ("q8", quaternion().with_name("Q8"), 3),
        ("s4", symmetric(4).with_name("S4"), 2),
    ]
}

fn images_commute(g: &FiniteGroup, a: &[Elem], b: &[Elem]) -> bool {
    a.iter().all(|&x| b.iter().all(|&y| g.mul(x, y) == g.mul(y, x)))
}

fn image_set(h: &[Elem]) -> Vec<Elem> {
    let mut v = h.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// One random rule: offsets in a window of at most `max_span + 1` cells
/// inside `[-ρ, ρ]`, each nontrivial with probability 2/3, images kept
/// pairwise commuting by rejection.
fn random_rule(g: &Arc<FiniteGroup>, endos: &[Vec<Elem>], max_span: usize, rng: &mut ChaCha8Rng) -> LocalRule {
    let rho: i64 = rng.gen_range(0..=if max_span >= 3 { 2 } else { 1 });
    let width = (2 * rho as usize).min(max_span) as i64;
    let start = rng.gen_range(-rho..=rho - width);
    let mut maps: BTreeMap<i64, Vec<Elem>> = BTreeMap::new();
    let mut images: Vec<Vec<Elem>> = Vec::new();
    for k in start..=start + width {
        if !rng.gen_bool(2.0 / 3.0) {
            continue;
        }
        for _ in 0..8 {
            let h = endos.choose(rng).expect("End(G) is nonempty");
            let im = image_set(h);
            if images.iter().all(|other| images_commute(g, &im, other)) {
                images.push(im);
                maps.insert(k, h.clone());
                break;
            }
        }
    }
    validate_rule(g.clone(), rho as usize, &maps).expect("commuting images by construction")
}

/// `per_group` rules for each corpus group, in a fixed order for a given seed.
pub fn generate_corpus(seed: u64, per_group: usize) -> Vec<(String, LocalRule)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (tag, g, max_span) in corpus_groups() {
        let endos = enumerate_endomorphisms(&g, usize::MAX).expect("small group");
        let g = Arc::new(g);
        for i in 0..per_group {
            out.push((format!("{tag}_{i:03}.json"), random_rule(&g, &endos, max_span, &mut rng)));
        }
    }
    out
}

/// Elements of the group generated by `gens`, sorted as `from_permutations` indexes them.
fn permutation_elements(gens: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let degree = gens[0].len();
    let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
    let mut queue = vec![(0..degree).collect::<Vec<_>>()];
    seen.insert(queue[0].clone());
    let mut i = 0;
    while i < queue.len() {
        for g in gens {
            let y: Vec<usize> = g.iter().map(|&x| queue[i][x]).collect();
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
        i += 1;
    }
    queue.sort();
    queue
}

/// `h_{-1}(x, y) = (y, e)` and `h_1(x, y) = (e, y)` on `S × S`: the local map
/// is onto but the first factor of the centre cell is never read.
fn fsur_a5_document() -> Value {
    let a = [vec![1, 2, 0, 3, 4], vec![1, 2, 3, 4, 0]];
    let lift = |p: &Vec<usize>, off: usize| -> Vec<usize> {
        (0..10).map(|i| if (off..off + 5).contains(&i) { p[i - off] + off } else { i }).collect()
    };
    let gens: Vec<Vec<usize>> = a.iter().map(|p| lift(p, 0)).chain(a.iter().map(|p| lift(p, 5))).collect();
    let elems = permutation_elements(&gens);
    let index: std::collections::HashMap<&[usize], usize> = elems.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let left: Vec<usize> = elems
        .iter()
        .map(|p| {
            let q: Vec<usize> = (0..10).map(|i| if i < 5 { p[i + 5] - 5 } else { i }).collect();
            index[q.as_slice()]
        })
        .collect();
    let right: Vec<usize> = elems
        .iter()
        .map(|p| {
            let q: Vec<usize> = (0..10).map(|i| if i < 5 { i } else { p[i] }).collect();
            index[q.as_slice()]
        })
        .collect();
    json!({
        "group": { "name": "A5xA5", "permutation_generators": gens, "degree": 10 },
        "radius": 1,
        "endomorphisms": { "-1": left, "1": right },
    })
}

/// Hand-picked rules bundled next to the generated ones.
pub fn named_documents() -> Vec<(String, Value)> {
    let z3 = Arc::new(direct_product(&cyclic(3), &cyclic(3)).with_name("Z3xZ3"));
    let left: Vec<Elem> = z3.elements().map(|z| (z % 3) * 3).collect();
    let right: Vec<Elem> = z3.elements().map(|z| z % 3).collect();
    let fsur_z3 = validate_rule(z3, 1, &BTreeMap::from([(-1, left), (1, right)])).unwrap();
    let z2 = Arc::new(cyclic(2).with_name("Z2"));
    let id: Vec<Elem> = z2.elements().collect();
    let xor = validate_rule(z2, 1, &BTreeMap::from([(-1, id.clone()), (1, id)])).unwrap();
    vec![
        ("any_s3.json".into(), gca_to_json(&LocalRule::shift(Arc::new(symmetric(3).with_name("S3")), 1))),
        ("fsur_counterexample.json".into(), fsur_a5_document()),
        ("fsur_z3.json".into(), gca_to_json(&fsur_z3)),
        ("shift_a5.json".into(), gca_to_json(&LocalRule::shift(Arc::new(alternating(5)), 1))),
        ("xor_z2.json".into(), gca_to_json(&xor)),
    ]
}

/// The bundled corpus: `per_group` generated rules per group plus [`named_documents`].
pub fn write_bundled_corpus(dir: &Path, seed: u64, per_group: usize) -> std::io::Result<()> {
    write_corpus(dir, &generate_corpus(seed, per_group))?;
    for (name, doc) in named_documents() {
        write_json(&dir.join(name), &doc)?;
    }
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    std::fs::write(path, text)
}

/// Writes each rule as a self-contained file.
pub fn write_corpus(dir: &Path, rules: &[(String, LocalRule)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, rule) in rules {
        write_json(&dir.join(name), &gca_to_json(rule))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusOptions {
    pub engine: EngineOptions,
    /// Powers inspected by the empirical sensitivity check.
    pub n_max: usize,
    /// Radius above which the profile counts as unbounded.
    pub radius_threshold: usize,
    pub threads: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            engine: EngineOptions { cross_check: false, ..EngineOptions::default() },
            n_max: 64,
            radius_threshold: 16,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

fn agreement(engine: Truth, oracle: Option<bool>) -> Value {
    match (engine.as_bool(), oracle) {
        (Some(e), Some(o)) => json!(e == o),
        _ => Value::Null,
    }
}

/// Full report plus every cross-check for one rule.
pub fn check_rule(rule: &LocalRule, opts: &CorpusOptions) -> Value {
    let g = rule.group();
    let report = full_report(rule, &opts.engine);
    let verdicts: BTreeMap<&str, Truth> = PROPERTY_NAMES.iter().map(|&n| (n, report.get(n).unwrap().value)).collect();

    let mut checks = serde_json::Map::new();
    for (name, engine, oracle) in [
        ("surjective", report.surjective.value, debruijn_surjective(rule, opts.engine.budgets.oracle)),
        ("injective", report.injective.value, debruijn_injective(rule, opts.engine.budgets.oracle)),
    ] {
        let entry = match oracle {
            Ok(o) => json!({ "engine": engine, "oracle": o, "agree": agreement(engine, Some(o)) }),
            Err(e) => json!({ "engine": engine, "oracle": Value::Null, "agree": Value::Null, "skipped": e.to_string() }),
        };
        checks.insert(format!("oracle_{name}"), entry);
    }

    let profile = radius_growth_profile(rule, opts.n_max);
    let exceeds = profile.exceeds(opts.radius_threshold);
    let bounded_repeat = profile.repeat.is_some() && exceeds.is_none();
    let empirical = match (exceeds.is_some(), bounded_repeat) {
        (true, _) => Some(true),
        (false, true) => Some(false),
        _ => None,
    };
    checks.insert(
        "sensitivity".into(),
        json!({
            "engine": report.sensitive.value,
            "exceeds_at": exceeds,
            "repeat": profile.repeat,
            "max_radius": profile.max_radius(),
            "empirical": empirical,
            "agree": match (report.sensitive.value.as_bool(), empirical) {
                (Some(e), Some(m)) => json!(e == m),
                (Some(_), None) => json!(false),
                _ => Value::Null,
            },
        }),
    );

    if !g.is_abelian() {
        checks.insert(
            "non_abelian_st_pe_false".into(),
            json!(report.strongly_transitive.is_false() && report.positively_expansive.is_false()),
        );
    }
    let dopts = DecomposeOptions { budgets: opts.engine.budgets, refine_abelian: opts.engine.refine_abelian };
    let solvable = is_solvable(g);
    match explicit_decomposition(rule, &dopts) {
        Ok(tree) => {
            let orders = tree.leaf_orders();
            checks.insert("order_product".into(), json!(orders.iter().product::<usize>() == g.order()));
            if solvable {
                checks.insert("solvable_abelian_leaves".into(), json!(tree.leaves.iter().all(|c| c.kind.is_abelian())));
            }
        }
        Err(e) => {
            checks.insert("order_product".into(), json!({ "error": e.to_string() }));
        }
    }
    let violations = report.consistency_violations(g.order() == 1);
    checks.insert("consistency".into(), json!(violations.is_empty()));

    json!({
        "group": { "name": g.name(), "order": g.order(), "abelian": g.is_abelian(), "solvable": solvable },
        "radius": rule.radius(),
        "verdicts": verdicts,
        "entropy": report.entropy,
        "leaf_orders": report.decomposition.get("leaf_orders").cloned().unwrap_or(Value::Null),
        "checks": checks,
        "violations": violations,
    })
}

/// A check entry failed if it is `false` or carries `"agree": false`.
fn failed_checks(entry: &Value) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(Value::Object(checks)) = entry.get("checks") {
        for (k, v) in checks {
            let bad = v == &json!(false) || v.get("agree") == Some(&json!(false)) || v.get("error").is_some();
            if bad {
                out.push(k.clone());
            }
        }
    }
    out
}

/// Runs [`check_rule`] on every `*.json` file of `dir`, sorted by file name.
///
/// The result has no paths or timings, so reruns are byte-identical.
pub fn corpus_check(dir: &Path, opts: &CorpusOptions) -> std::io::Result<Value> {
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();

    let threads = opts.threads.max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut results: Vec<Option<Result<Value, String>>> = vec![None; names.len()];
    let slots: Vec<std::sync::Mutex<&mut Option<Result<Value, String>>>> =
        results.iter_mut().map(std::sync::Mutex::new).collect();
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= names.len() {
                    break;
                }
                let r = load_gca_file(&dir.join(&names[i])).map(|rule| check_rule(&rule, opts)).map_err(|e| {
                    // Strip the directory so the summary does not depend on where the corpus lives.
                    e.to_string().replace(&format!("{}/", dir.display()), "")
                });
                **slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    drop(slots);

    let mut files = Vec::new();
    let mut load_failures = Vec::new();
    let mut disagreements = Vec::new();
    let mut unknown: BTreeMap<&str, usize> = PROPERTY_NAMES.iter().map(|&n| (n, 0)).collect();
    let mut oracle_skipped = 0usize;
    for (name, r) in names.iter().zip(results) {
        match r.expect("every file processed") {
            Err(e) => load_failures.push(json!({ "file": name, "error": e })),
            Ok(mut entry) => {
                for (prop, n) in unknown.iter_mut() {
                    if entry["verdicts"][*prop] == json!("unknown") {
                        *n += 1;
                    }
                }
                if entry["checks"]["oracle_surjective"].get("skipped").is_some() {
                    oracle_skipped += 1;
                }
                for c in failed_checks(&entry) {
                    disagreements.push(json!({ "file": name, "check": c }));
                }
                entry["file"] = json!(name);
                files.push(entry);
            }
        }
    }
    Ok(json!({
        "summary": {
            "files": files.len(),
            "load_failures": load_failures.len(),
            "disagreements": disagreements.len(),
            "oracle_skipped": oracle_skipped,
            "unknown": unknown,
        },
        "disagreements": disagreements,
        "load_failures": load_failures,
        "files": files,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_valid() {
        let a = generate_corpus(7, 3);
        let b = generate_corpus(7, 3);
        assert_eq!(a.len(), 27);
        assert_eq!(a, b);
        for (_, r) in &a {
            assert!(r.radius() <= 2);
            let offs = r.nontrivial_offsets();
            if let (Some(lo), Some(hi)) = (offs.first(), offs.last()) {
                assert!(r.group().order().pow((hi - lo) as u32) <= 4096);
            }
        }
    }

    #[test]
    fn empty_and_corrupt_directories() {
        let dir = std::env::temp_dir().join(format!("gcalab-corpus-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let s = corpus_check(&dir, &CorpusOptions::default()).unwrap();
        assert_eq!(s["summary"]["files"], json!(0));
        write_corpus(&dir, &generate_corpus(1, 1)[..2]).unwrap();
        std::fs::write(dir.join("broken.json"), "{ not json").unwrap();
        let s = corpus_check(&dir, &CorpusOptions::default()).unwrap();
        assert_eq!(s["summary"]["files"], json!(2));
        assert_eq!(s["load_failures"][0]["file"], json!("broken.json"));
        assert_eq!(s["summary"]["disagreements"], json!(0));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
