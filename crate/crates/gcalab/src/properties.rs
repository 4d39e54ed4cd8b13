//! Top-level deciders: decompose, decide each leaf, and combine.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::abelian::{
    decide_sensitivity_linear, decide_surj_inj_linear, decide_transitive_linear, entropy_linear,
    to_matrix_rule,
};
use crate::decompose::{explicit_decomposition, Component, DecomposeError, DecomposeOptions, DecompositionTree};
use crate::gca::LocalRule;
use crate::group::{invariantly_simple_factorization, Budgets, GroupKind};
use crate::io::tree_to_json;
use crate::oracle::{debruijn_injective, debruijn_surjective, OracleError};
use crate::simple_product::{decide_simple_product, SimpleProductReport, SimpleProductRule};
use crate::verdict::{Method, Truth, Verdict};

/// `Σ c·log(base)` plus a count of leaves whose entropy is not known.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntropyValue {
    /// Coefficient per base, bases ≥ 2, zero coefficients dropped.
    pub terms: BTreeMap<u64, Ratio<i64>>,
    pub unknown_terms: usize,
}

impl EntropyValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn log(base: u64) -> Self {
        let mut e = Self::zero();
        e.add_term(Ratio::from_integer(1), base);
        e
    }

    pub fn add_term(&mut self, c: Ratio<i64>, base: u64) {
        if base <= 1 || c == Ratio::from_integer(0) {
            return;
        }
        let slot = self.terms.entry(base).or_insert_with(|| Ratio::from_integer(0));
        *slot += c;
        if *slot == Ratio::from_integer(0) {
            self.terms.remove(&base);
        }
    }

    pub fn add(&mut self, other: &EntropyValue) {
        for (&b, &c) in &other.terms {
            self.add_term(c, b);
        }
        self.unknown_terms += other.unknown_terms;
    }

    pub fn is_exact(&self) -> bool {
        self.unknown_terms == 0
    }

    pub fn is_zero(&self) -> bool {
        self.is_exact() && self.terms.is_empty()
    }

    /// Coefficients over prime bases, so that e.g. `log 60 = 2·log 2 + log 3 + log 5`.
    pub fn canonical(&self) -> BTreeMap<u64, Ratio<i64>> {
        let mut out: BTreeMap<u64, Ratio<i64>> = BTreeMap::new();
        for (&b, &c) in &self.terms {
            for (p, e) in factorize(b) {
                *out.entry(p).or_insert_with(|| Ratio::from_integer(0)) += c * e as i64;
            }
        }
        out.retain(|_, c| *c != Ratio::from_integer(0));
        out
    }

    /// Exact equality of values, independent of how the bases are written.
    pub fn same_value(&self, other: &EntropyValue) -> bool {
        self.is_exact() && other.is_exact() && self.canonical() == other.canonical()
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.is_exact().then(|| {
            self.terms
                .iter()
                .map(|(&b, c)| *c.numer() as f64 / *c.denom() as f64 * (b as f64).ln())
                .sum()
        })
    }
}

impl std::fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, c)| if *c == Ratio::from_integer(1) { format!("log {b}") } else { format!("{c}·log {b}") })
            .collect();
        if parts.is_empty() {
            parts.push("0".into());
        }
        if self.unknown_terms > 0 {
            parts.push(format!("{} unknown term(s)", self.unknown_terms));
        }
        f.write_str(&parts.join(" + "))
    }
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct EntropyWire {
    terms: Vec<[i64; 3]>,
    unknown_terms: usize,
}

impl Serialize for EntropyValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        EntropyWire {
            terms: self.terms.iter().map(|(&b, c)| [*c.numer(), *c.denom(), b as i64]).collect(),
            unknown_terms: self.unknown_terms,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EntropyValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = EntropyWire::deserialize(d)?;
        let mut e = EntropyValue { terms: BTreeMap::new(), unknown_terms: w.unknown_terms };
        for [n, den, b] in w.terms {
            if den == 0 || b < 0 {
                return Err(D::Error::custom("invalid entropy term"));
            }
            e.add_term(Ratio::new(n, den), b as u64);
        }
        Ok(e)
    }
}

/// Property names accepted by [`PropertyReport::get`].
pub const PROPERTY_NAMES: [&str; 15] = [
    "surjective",
    "injective",
    "open",
    "dpo",
    "equicontinuous",
    "sensitive",
    "transitive",
    "totally_transitive",
    "topologically_weakly_mixing",
    "topologically_strongly_mixing",
    "ergodically_weakly_mixing",
    "ergodically_strongly_mixing",
    "ergodic",
    "strongly_transitive",
    "positively_expansive",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub surjective: Verdict,
    pub injective: Verdict,
    pub open: Verdict,
    pub dpo: Verdict,
    pub equicontinuous: Verdict,
    pub sensitive: Verdict,
    pub transitive: Verdict,
    pub totally_transitive: Verdict,
    pub topologically_weakly_mixing: Verdict,
    pub topologically_strongly_mixing: Verdict,
    pub ergodically_weakly_mixing: Verdict,
    pub ergodically_strongly_mixing: Verdict,
    pub ergodic: Verdict,
    pub strongly_transitive: Verdict,
    pub positively_expansive: Verdict,
    pub entropy: EntropyValue,
    /// Whether zero entropy coincides with equicontinuity here; informational only.
    pub observations: Value,
    pub decomposition: Value,
}

impl PropertyReport {
    pub fn get(&self, name: &str) -> Option<&Verdict> {
        Some(match name {
            "surjective" => &self.surjective,
            "injective" => &self.injective,
            "open" => &self.open,
            "dpo" => &self.dpo,
            "equicontinuous" => &self.equicontinuous,
            "sensitive" => &self.sensitive,
            "transitive" => &self.transitive,
            "totally_transitive" => &self.totally_transitive,
            "topologically_weakly_mixing" => &self.topologically_weakly_mixing,
            "topologically_strongly_mixing" => &self.topologically_strongly_mixing,
            "ergodically_weakly_mixing" => &self.ergodically_weakly_mixing,
            "ergodically_strongly_mixing" => &self.ergodically_strongly_mixing,
            "ergodic" => &self.ergodic,
            "strongly_transitive" => &self.strongly_transitive,
            "positively_expansive" => &self.positively_expansive,
            _ => return None,
        })
    }

    /// Violations of the implications every report must satisfy.
    pub fn consistency_violations(&self, trivial_group: bool) -> Vec<String> {
        let mut v = Vec::new();
        let mut need = |cond: bool, msg: &str| {
            if !cond {
                v.push(msg.to_owned());
            }
        };
        need(!self.injective.is_true() || self.surjective.is_true(), "injective without surjective");
        need(!self.transitive.is_true() || self.surjective.is_true(), "transitive without surjective");
        need(
            trivial_group || !self.transitive.is_true() || self.sensitive.is_true(),
            "transitive without sensitive",
        );
        need(self.sensitive.value == self.equicontinuous.value.not(), "sensitive is not the negation of equicontinuous");
        need(self.dpo.value == self.surjective.value && self.open.value == self.surjective.value, "dpo/open differ from surjective");
        if self.positively_expansive.is_true() {
            need(self.strongly_transitive.is_true(), "positively expansive without strongly transitive");
            need(self.sensitive.is_true(), "positively expansive without sensitive");
            need(self.transitive.is_true(), "positively expansive without transitive");
            need(self.surjective.is_true(), "positively expansive without surjective");
            need(self.injective.is_false(), "positively expansive and injective");
        }
        for name in &PROPERTY_NAMES[7..13] {
            need(self.get(name).unwrap() == &self.transitive, "alias differs from transitive");
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub budgets: Budgets,
    pub refine_abelian: bool,
    /// Run the de Bruijn oracle alongside the decomposition when within budget.
    pub cross_check: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { budgets: Budgets::default(), refine_abelian: true, cross_check: true }
    }
}

/// Verdicts for one leaf of the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafVerdicts {
    pub surjective: Verdict,
    pub injective: Verdict,
    pub sensitive: Verdict,
    pub transitive: Verdict,
    pub entropy: EntropyValue,
}

fn simple_product_verdicts(report: &SimpleProductReport) -> LeafVerdicts {
    let cert = serde_json::to_value(report).expect("serializable");
    let surjective = Verdict::from_bool(report.surjective(), Method::LeafFormula, cert.clone());
    let sensitive = match report.sensitive() {
        Some(s) => {
            let ext = report.blocks.iter().any(|b| b.sensitive_by_extension);
            Verdict::from_bool(s, if ext { Method::Extension } else { Method::LeafFormula }, cert.clone())
        }
        None => Verdict::unknown(Method::Extension, cert.clone()),
    };
    let mut entropy = EntropyValue::zero();
    for b in &report.blocks {
        match b.entropy_log_s {
            Some((n, d)) => entropy.add_term(Ratio::new(n, d), report.simple_order as u64),
            None => entropy.unknown_terms += 1,
        }
    }
    LeafVerdicts {
        injective: surjective.clone(),
        surjective,
        sensitive,
        transitive: Verdict::from_bool(report.transitive(), Method::LeafFormula, cert),
        entropy,
    }
}

/// Decides one leaf by the closed forms for its group type.
pub fn decide_leaf(c: &Component, budgets: &Budgets) -> LeafVerdicts {
    match c.kind {
        GroupKind::Trivial => {
            let t = |b| Verdict::from_bool(b, Method::LeafFormula, json!({ "trivial_group": true }));
            LeafVerdicts {
                surjective: t(true),
                injective: t(true),
                sensitive: t(false),
                transitive: t(true),
                entropy: EntropyValue::zero(),
            }
        }
        GroupKind::ElementaryAbelian { .. } => {
            let m = to_matrix_rule(&c.gca).expect("elementary abelian leaf");
            let (surjective, injective) = decide_surj_inj_linear(&m);
            let mut entropy = EntropyValue::zero();
            match entropy_linear(&m) {
                Some(terms) => {
                    for (coef, p) in terms {
                        entropy.add_term(Ratio::from_integer(coef), p as u64);
                    }
                }
                None => entropy.unknown_terms += 1,
            }
            LeafVerdicts {
                surjective,
                injective,
                sensitive: decide_sensitivity_linear(&m, budgets.power),
                transitive: decide_transitive_linear(&m, budgets.power),
                entropy,
            }
        }
        GroupKind::NonAbelianSimpleProduct { .. } => {
            let fact = invariantly_simple_factorization(c.gca.group()).expect("simple product leaf");
            let wiring = SimpleProductRule::from_table_rule(&c.gca, &fact).expect("rule on a simple product");
            simple_product_verdicts(&decide_simple_product(&wiring))
        }
        GroupKind::Abelian { order } => {
            let u = Verdict::unknown(Method::LeafFormula, json!({ "unrefined_abelian_order": order }));
            LeafVerdicts {
                surjective: u.clone(),
                injective: u.clone(),
                sensitive: u.clone(),
                transitive: u,
                entropy: EntropyValue { terms: BTreeMap::new(), unknown_terms: 1 },
            }
        }
    }
}

fn leaf_cert(tree: &DecompositionTree, leaves: &[LeafVerdicts], pick: impl Fn(&LeafVerdicts) -> &Verdict) -> Value {
    let items: Vec<Value> = tree
        .leaves
        .iter()
        .zip(leaves)
        .enumerate()
        .map(|(i, (c, l))| {
            json!({
                "leaf": i,
                "order": c.gca.group().order(),
                "kind": c.kind,
                "ancestry": c.ancestry,
                "verdict": pick(l),
            })
        })
        .collect();
    json!({ "leaves": items })
}

fn combine_and(tree: &DecompositionTree, leaves: &[LeafVerdicts], pick: impl Fn(&LeafVerdicts) -> &Verdict) -> Verdict {
    let value = leaves.iter().fold(Truth::True, |acc, l| acc.and(pick(l).value));
    Verdict::new(value, Method::Decomposition, leaf_cert(tree, leaves, pick))
}

fn with_oracle(mut v: Verdict, oracle: Option<Result<bool, OracleError>>) -> Verdict {
    let Some(res) = oracle else { return v };
    let o = match res {
        Ok(b) => json!({ "value": b, "agrees": v.value.as_bool().map(|x| x == b) }),
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    if let Value::Object(map) = &mut v.certificate {
        map.insert("oracle".into(), o);
    }
    v
}

/// Surjectivity and injectivity from the oracle alone, for rules that could not be decomposed.
fn oracle_fallback(rule: &LocalRule, budgets: &Budgets, err: &DecomposeError) -> (Verdict, Verdict) {
    let cert = json!({ "decomposition_error": err.to_string() });
    let run = |f: fn(&LocalRule, usize) -> Result<bool, OracleError>| match f(rule, budgets.oracle) {
        Ok(b) => Verdict::from_bool(b, Method::Oracle, cert.clone()),
        Err(e) => Verdict::unknown(Method::Oracle, json!({ "decomposition_error": err.to_string(), "oracle": e.to_string() })),
    };
    (run(debruijn_surjective), run(debruijn_injective))
}

struct Core {
    surjective: Verdict,
    injective: Verdict,
    sensitive: Verdict,
    transitive: Verdict,
    entropy: EntropyValue,
    decomposition: Value,
}

fn decide_core(rule: &LocalRule, opts: &EngineOptions) -> Core {
    let dopts = DecomposeOptions { budgets: opts.budgets, refine_abelian: opts.refine_abelian };
    let tree = match explicit_decomposition(rule, &dopts) {
        Ok(t) => t,
        Err(e) => {
            let (surjective, injective) = oracle_fallback(rule, &opts.budgets, &e);
            let u = Verdict::unknown(Method::Decomposition, json!({ "decomposition_error": e.to_string() }));
            let transitive = if surjective.is_false() { surjective.negated().negated() } else { u.clone() };
            return Core {
                surjective,
                injective,
                sensitive: u,
                transitive: Verdict { value: if transitive.is_false() { Truth::False } else { Truth::Unknown }, ..transitive },
                entropy: EntropyValue { terms: BTreeMap::new(), unknown_terms: 1 },
                decomposition: json!({ "error": e.to_string() }),
            };
        }
    };
    let leaves: Vec<LeafVerdicts> = tree.leaves.iter().map(|c| decide_leaf(c, &opts.budgets)).collect();

    let mut surjective = combine_and(&tree, &leaves, |l| &l.surjective);
    let mut injective = combine_and(&tree, &leaves, |l| &l.injective);
    if opts.cross_check {
        surjective = with_oracle(surjective, Some(debruijn_surjective(rule, opts.budgets.oracle)));
        injective = with_oracle(injective, Some(debruijn_injective(rule, opts.budgets.oracle)));
    }

    let sens_value = leaves.iter().fold(Truth::False, |acc, l| acc.or(l.sensitive.value));
    let sensitive = Verdict::new(sens_value, Method::Decomposition, leaf_cert(&tree, &leaves, |l| &l.sensitive));

    let transitive = decide_transitive_from(&tree, &leaves, &surjective, &sensitive);

    let mut entropy = EntropyValue::zero();
    for l in &leaves {
        entropy.add(&l.entropy);
    }
    Core { surjective, injective, sensitive, transitive, entropy, decomposition: tree_to_json(&tree) }
}

fn decide_transitive_from(
    tree: &DecompositionTree,
    leaves: &[LeafVerdicts],
    surjective: &Verdict,
    sensitive: &Verdict,
) -> Verdict {
    if tree.root.group().order() == 1 {
        return Verdict::from_bool(true, Method::LeafFormula, json!({ "trivial_group": true }));
    }
    if surjective.is_false() {
        return Verdict::new(Truth::False, Method::Decomposition, json!({ "not_surjective": true }));
    }
    if sensitive.is_false() {
        return Verdict::new(Truth::False, Method::Decomposition, json!({ "equicontinuous": true }));
    }
    let cert = leaf_cert(tree, leaves, |l| &l.transitive);
    if let Some(i) = tree
        .leaves
        .iter()
        .zip(leaves)
        .position(|(c, l)| c.quotient_only() && l.transitive.is_false())
    {
        let mut cert = cert;
        cert["non_transitive_quotient_leaf"] = json!(i);
        return Verdict::new(Truth::False, Method::Decomposition, cert);
    }
    if leaves.iter().all(|l| l.transitive.is_true()) {
        return Verdict::new(Truth::True, Method::Decomposition, cert);
    }
    let mut cert = cert;
    cert["open"] = json!("a non-transitive leaf below a restriction step does not decide transitivity");
    Verdict::unknown(Method::Decomposition, cert)
}

/// Strong transitivity and positive expansivity.
fn decide_st_pe(rule: &LocalRule, core: &Core) -> (Verdict, Verdict) {
    let g = rule.group();
    if !g.is_abelian() {
        let v = Verdict::from_bool(false, Method::LeafFormula, json!({ "non_abelian_group": true }));
        return (v.clone(), v);
    }
    let mut pe = Verdict::unknown(Method::LeafFormula, json!({ "reason": "only rank-1 elementary abelian groups are decided" }));
    if let Some(f) = invariantly_simple_factorization(g) {
        if let GroupKind::ElementaryAbelian { rank: 1, .. } = f.kind {
            let m = to_matrix_rule(rule).expect("elementary abelian");
            let nz: Vec<i64> = m.coeffs.iter().filter(|(_, h)| h[0][0] != 0).map(|(&i, _)| i).collect();
            let both = nz.iter().any(|&i| i < 0) && nz.iter().any(|&i| i > 0);
            pe = Verdict::from_bool(both, Method::LeafFormula, json!({ "nonzero_offsets": nz }));
        }
    }
    if pe.is_unknown() {
        let forced = [
            (core.injective.is_true(), "injective"),
            (core.surjective.is_false(), "not_surjective"),
            (core.sensitive.is_false(), "equicontinuous"),
            (core.transitive.is_false(), "not_transitive"),
        ];
        if let Some((_, why)) = forced.iter().find(|(c, _)| *c) {
            pe = Verdict::from_bool(false, Method::Extension, json!({ "forced_by": why }));
        }
    }
    let st = if pe.is_true() {
        Verdict::from_bool(true, Method::LeafFormula, json!({ "positively_expansive": true }))
    } else if g.order() > 1 && core.injective.is_true() {
        // The identity configuration is fixed with trivial preimages, so it misses ∪ F^n(U) for U avoiding it.
        Verdict::from_bool(false, Method::Extension, json!({ "forced_by": "injective" }))
    } else if core.transitive.is_false() {
        Verdict::from_bool(false, Method::Extension, json!({ "forced_by": "not_transitive" }))
    } else {
        Verdict::unknown(Method::Extension, json!({ "reason": "no criterion applies" }))
    };
    (st, pe)
}

/// All verdicts and the entropy of a rule.
pub fn full_report(rule: &LocalRule, opts: &EngineOptions) -> PropertyReport {
    let core = decide_core(rule, opts);
    let (strongly_transitive, positively_expansive) = decide_st_pe(rule, &core);
    assemble(core, strongly_transitive, positively_expansive)
}

fn assemble(core: Core, strongly_transitive: Verdict, positively_expansive: Verdict) -> PropertyReport {
    let equicontinuous = core.sensitive.negated();
    let observations = json!({
        "entropy_zero": core.entropy.is_exact().then(|| core.entropy.is_zero()),
        "equicontinuous": equicontinuous.value,
        "zero_entropy_matches_equicontinuity": match (core.entropy.is_exact(), equicontinuous.value.as_bool()) {
            (true, Some(e)) => Some(core.entropy.is_zero() == e),
            _ => None,
        },
    });
    let t = &core.transitive;
    PropertyReport {
        open: core.surjective.clone(),
        dpo: core.surjective.clone(),
        surjective: core.surjective,
        injective: core.injective,
        equicontinuous,
        sensitive: core.sensitive,
        totally_transitive: t.clone(),
        topologically_weakly_mixing: t.clone(),
        topologically_strongly_mixing: t.clone(),
        ergodically_weakly_mixing: t.clone(),
        ergodically_strongly_mixing: t.clone(),
        ergodic: t.clone(),
        transitive: core.transitive,
        strongly_transitive,
        positively_expansive,
        entropy: core.entropy,
        observations,
        decomposition: core.decomposition,
    }
}

/// Report for a rule held as a factor wiring on `S^m`, `S` non-abelian simple.
pub fn simple_product_full_report(rule: &SimpleProductRule) -> PropertyReport {
    let report = decide_simple_product(rule);
    let l = simple_product_verdicts(&report);
    let transitive = if l.surjective.is_false() || l.sensitive.is_false() {
        Verdict { value: Truth::False, ..l.transitive.clone() }
    } else {
        l.transitive
    };
    let no = Verdict::from_bool(false, Method::LeafFormula, json!({ "non_abelian_group": true }));
    let core = Core {
        surjective: l.surjective,
        injective: l.injective,
        sensitive: l.sensitive,
        transitive,
        entropy: l.entropy,
        decomposition: json!({ "factor_graph": report.graph }),
    };
    assemble(core, no.clone(), no)
}

pub fn decide_surjective(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    decide_core(rule, opts).surjective
}

pub fn decide_injective(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    decide_core(rule, opts).injective
}

pub fn decide_sensitive(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    decide_core(rule, opts).sensitive
}

pub fn decide_equicontinuous(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    decide_sensitive(rule, opts).negated()
}

pub fn decide_transitive(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    decide_core(rule, opts).transitive
}

pub fn decide_open(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    decide_surjective(rule, opts)
}

pub fn decide_dpo(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    decide_surjective(rule, opts)
}

pub fn decide_strongly_transitive(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    full_report(rule, opts).strongly_transitive
}

pub fn decide_positively_expansive(rule: &LocalRule, opts: &EngineOptions) -> Verdict {
    full_report(rule, opts).positively_expansive
}

pub fn entropy(rule: &LocalRule, opts: &EngineOptions) -> EntropyValue {
    decide_core(rule, &EngineOptions { cross_check: false, ..*opts }).entropy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::validate_rule;
    use crate::group::library::*;
    use crate::group::Elem;
    use std::sync::Arc;

    fn xor(g: crate::group::FiniteGroup) -> LocalRule {
        let id: Vec<Elem> = g.elements().collect();
        validate_rule(Arc::new(g), 1, &BTreeMap::from([(-1, id.clone()), (1, id)])).unwrap()
    }

    #[test]
    fn entropy_values() {
        let mut e = EntropyValue::log(2);
        e.add(&EntropyValue::log(3));
        assert!(e.same_value(&EntropyValue::log(6)));
        let mut s = EntropyValue::zero();
        s.add_term(Ratio::from_integer(2), 2);
        s.add_term(Ratio::from_integer(1), 15);
        assert!(s.same_value(&EntropyValue::log(60)));
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json, json!({ "terms": [[2, 1, 2], [1, 1, 15]], "unknown_terms": 0 }));
        assert_eq!(serde_json::from_value::<EntropyValue>(json).unwrap(), s);
        assert_eq!(EntropyValue::zero().to_string(), "0");
    }

    #[test]
    fn shift_on_z2() {
        let r = full_report(&LocalRule::shift(Arc::new(cyclic(2)), 1), &EngineOptions::default());
        for name in &PROPERTY_NAMES[..13] {
            let v = r.get(name).unwrap();
            let expect = !matches!(*name, "equicontinuous");
            assert_eq!(v.is_true(), expect, "{name}");
        }
        assert!(r.strongly_transitive.is_false());
        assert!(r.positively_expansive.is_false());
        assert!(r.entropy.same_value(&EntropyValue::log(2)));
        assert!(r.consistency_violations(false).is_empty());
    }

    #[test]
    fn xor_on_z2() {
        let r = full_report(&xor(cyclic(2)), &EngineOptions::default());
        assert!(r.surjective.is_true() && r.injective.is_false());
        assert_eq!(r.surjective.certificate["oracle"]["agrees"], json!(true));
        assert!(r.positively_expansive.is_true() && r.strongly_transitive.is_true());
        assert!(r.sensitive.is_true() && r.transitive.is_true());
        let mut two_log2 = EntropyValue::zero();
        two_log2.add_term(Ratio::from_integer(2), 2);
        assert_eq!(r.entropy, two_log2);
        assert!(r.consistency_violations(false).is_empty());
    }

    #[test]
    fn identity_like_reports() {
        let r = full_report(&LocalRule::identity(Arc::new(symmetric(4))), &EngineOptions::default());
        assert!(r.equicontinuous.is_true());
        assert!(r.transitive.is_false());
        assert!(r.entropy.is_zero());
        assert!(r.strongly_transitive.is_false() && r.positively_expansive.is_false());
        assert_eq!(r.observations["zero_entropy_matches_equicontinuity"], json!(true));
    }

    #[test]
    fn shift_on_s3() {
        let r = full_report(&LocalRule::shift(Arc::new(symmetric(3)), 1), &EngineOptions::default());
        assert!(r.sensitive.is_true() && r.transitive.is_true());
        assert!(r.entropy.same_value(&EntropyValue::log(6)));
        assert!(r.strongly_transitive.is_false());
        assert_eq!(r.decomposition["leaf_orders"], json!([3, 2]));
    }

    #[test]
    fn xor_on_z6_is_sensitive_on_both_leaves() {
        let r = full_report(&xor(cyclic(6)), &EngineOptions::default());
        assert!(r.sensitive.is_true());
        let leaves = r.sensitive.certificate["leaves"].as_array().unwrap();
        assert_eq!(leaves.len(), 2);
        assert!(leaves.iter().all(|l| l["verdict"]["value"] == json!("true")));
    }

    #[test]
    fn shift_on_a5() {
        let r = full_report(&LocalRule::shift(Arc::new(alternating(5)), 1), &EngineOptions::default());
        assert!(r.surjective.is_true() && r.transitive.is_true());
        assert!(r.entropy.same_value(&EntropyValue::log(60)));
        let json = serde_json::to_string(&r).unwrap();
        let back: PropertyReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
