//! JSON files for groups, rules and decomposition trees.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::decompose::{DecompositionTree, Node};
use crate::gca::{validate_rule, GcaError, LocalRule};
use crate::group::library::from_permutations;
use crate::group::{validate_group, Elem, FiniteGroup, GroupError};

/// Leaves of larger groups are written without their rule.
pub const TREE_LEAF_GCA_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("invalid group: {0}")]
    Group(#[from] GroupError),
    #[error("invalid rule: {0}")]
    Rule(#[from] GcaError),
}

fn schema(pointer: &str, message: impl Into<String>) -> LoadError {
    LoadError::Schema { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, message: message.into() }
}

fn read_json(path: &Path) -> Result<Value, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io { path: path.display().to_string(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| LoadError::Json(e.to_string()))
}

fn uint(v: &Value, pointer: &str) -> Result<usize, LoadError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| schema(pointer, "expected a non-negative integer"))
}

fn uint_array(v: &Value, pointer: &str) -> Result<Vec<usize>, LoadError> {
    let arr = v.as_array().ok_or_else(|| schema(pointer, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| uint(x, &format!("{pointer}/{i}"))).collect()
}

fn object<'a>(v: &'a Value, pointer: &str) -> Result<&'a Map<String, Value>, LoadError> {
    v.as_object().ok_or_else(|| schema(pointer, "expected an object"))
}

/// Parses an inline group object.
pub fn parse_group(v: &Value, pointer: &str) -> Result<FiniteGroup, LoadError> {
    let obj = object(v, pointer)?;
    let name = match obj.get("name") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema(&format!("{pointer}/name"), "expected a string")),
    };
    let g = if let Some(table) = obj.get("table") {
        let p = format!("{pointer}/table");
        let rows = table.as_array().ok_or_else(|| schema(&p, "expected an array of rows"))?;
        let rows: Vec<Vec<usize>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| uint_array(r, &format!("{p}/{i}")))
            .collect::<Result<_, _>>()?;
        if let Some(order) = obj.get("order") {
            let n = uint(order, &format!("{pointer}/order"))?;
            if n != rows.len() {
                return Err(schema(&format!("{pointer}/order"), format!("order {n} but the table has {} rows", rows.len())));
            }
        }
        let names = match obj.get("names") {
            None => None,
            Some(Value::Array(a)) => Some(
                a.iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.as_str().map(str::to_owned).ok_or_else(|| schema(&format!("{pointer}/names/{i}"), "expected a string"))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Some(_) => return Err(schema(&format!("{pointer}/names"), "expected an array of strings")),
        };
        validate_group(&rows, names)?
    } else if let Some(gens) = obj.get("permutation_generators") {
        let p = format!("{pointer}/permutation_generators");
        let gens = gens.as_array().ok_or_else(|| schema(&p, "expected an array of permutations"))?;
        let gens: Vec<Vec<usize>> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| uint_array(g, &format!("{p}/{i}")))
            .collect::<Result<_, _>>()?;
        let degree = match obj.get("degree") {
            Some(d) => uint(d, &format!("{pointer}/degree"))?,
            None => gens.first().map_or(0, Vec::len),
        };
        from_permutations(&gens, degree)?
    } else {
        return Err(schema(pointer, "expected \"table\" or \"permutation_generators\""));
    };
    Ok(match name {
        Some(n) => g.with_name(n),
        None => g,
    })
}

pub fn load_group_file(path: &Path) -> Result<FiniteGroup, LoadError> {
    parse_group(&read_json(path)?, "")
}

/// Parses a rule object; a string `group` is a path relative to `base`.
pub fn parse_gca(v: &Value, base: Option<&Path>) -> Result<LocalRule, LoadError> {
    let obj = object(v, "")?;
    let group = match obj.get("group") {
        Some(Value::String(p)) => {
            let path: PathBuf = base.map_or_else(|| PathBuf::from(p), |b| b.join(p));
            load_group_file(&path)?
        }
        Some(g @ Value::Object(_)) => parse_group(g, "/group")?,
        Some(_) => return Err(schema("/group", "expected a path or an inline group object")),
        None => return Err(schema("", "missing \"group\"")),
    };
    let radius = uint(obj.get("radius").ok_or_else(|| schema("", "missing \"radius\""))?, "/radius")?;
    let empty = json!({});
    let endos = object(obj.get("endomorphisms").unwrap_or(&empty), "/endomorphisms")?;
    let mut maps = BTreeMap::new();
    for (key, val) in endos {
        let p = format!("/endomorphisms/{key}");
        let k: i64 = key.parse().map_err(|_| schema(&p, "offset keys must be integers"))?;
        let arr = uint_array(val, &p)?;
        if arr.len() != group.order() {
            return Err(schema(&p, format!("map has {} entries for a group of order {}", arr.len(), group.order())));
        }
        if let Some(i) = arr.iter().position(|&x| x >= group.order()) {
            return Err(schema(&format!("{p}/{i}"), format!("{} is not an element", arr[i])));
        }
        maps.insert(k, arr.into_iter().map(|x| x as Elem).collect());
    }
    Ok(validate_rule(Arc::new(group), radius, &maps)?)
}

pub fn load_gca_file(path: &Path) -> Result<LocalRule, LoadError> {
    parse_gca(&read_json(path)?, path.parent())
}

pub fn group_to_json(g: &FiniteGroup) -> Value {
    let mut obj = Map::new();
    if let Some(n) = g.name() {
        obj.insert("name".into(), json!(n));
    }
    obj.insert("order".into(), json!(g.order()));
    obj.insert("table".into(), json!(g.table_rows()));
    if let Some(n) = g.names() {
        obj.insert("names".into(), json!(n));
    }
    Value::Object(obj)
}

/// A rule file with the given group entry (inline object or path).
pub fn gca_to_json_with_group(rule: &LocalRule, group: Value) -> Value {
    let endos: Map<String, Value> = rule.maps().into_iter().map(|(k, m)| (k.to_string(), json!(m))).collect();
    json!({ "group": group, "radius": rule.radius(), "endomorphisms": endos })
}

pub fn gca_to_json(rule: &LocalRule) -> Value {
    gca_to_json_with_group(rule, group_to_json(rule.group()))
}

/// Nested tree: splits carry the subgroup and both branches; leaves carry their kind and rule.
pub fn tree_to_json(tree: &DecompositionTree) -> Value {
    fn node(tree: &DecompositionTree, n: &Node) -> Value {
        match n {
            Node::Leaf { order, kind, index } => {
                let c = &tree.leaves[*index];
                let mut obj = json!({ "order": order, "kind": kind, "leaf": index, "ancestry": c.ancestry });
                if *order <= TREE_LEAF_GCA_LIMIT {
                    obj["gca"] = gca_to_json(&c.gca);
                }
                obj
            }
            Node::Split { order, members, via, refinement, subgroup, quotient } => json!({
                "order": order,
                "members": members,
                "via": via,
                "refinement": refinement,
                "subgroup": node(tree, subgroup),
                "quotient": node(tree, quotient),
            }),
        }
    }
    json!({ "leaf_orders": tree.leaf_orders(), "root": node(tree, &tree.node) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::library::*;

    #[test]
    fn group_round_trip() {
        let g = symmetric(3).with_name("S3");
        let back = parse_group(&group_to_json(&g), "").unwrap();
        assert_eq!(back, g);
        assert_eq!(back.name(), Some("S3"));
        let t = parse_group(&json!({ "name": "trivial", "order": 1, "table": [[0]] }), "").unwrap();
        assert_eq!(t.order(), 1);
    }

    #[test]
    fn permutation_groups() {
        let g = parse_group(&json!({ "permutation_generators": [[1, 2, 0], [1, 0, 2]], "degree": 3 }), "").unwrap();
        assert_eq!(g.order(), 6);
        assert!(matches!(
            parse_group(&json!({ "permutation_generators": [[0, 0, 1]] }), ""),
            Err(LoadError::Group(GroupError::BadPermutation(_)))
        ));
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let err = parse_group(&json!({ "table": [[0, 1], [1, "x"]] }), "").unwrap_err();
        assert_eq!(err, schema("/table/1/1", "expected a non-negative integer"));
        let z2 = group_to_json(&cyclic(2));
        let err = parse_gca(&json!({ "group": z2, "radius": 1, "endomorphisms": { "1": [0] } }), None).unwrap_err();
        assert!(matches!(err, LoadError::Schema { ref pointer, .. } if pointer == "/endomorphisms/1"));
        let err = parse_gca(&json!({ "group": z2, "radius": 1, "endomorphisms": { "one": [0, 1] } }), None).unwrap_err();
        assert!(err.to_string().contains("/endomorphisms/one"));
    }

    #[test]
    fn rule_errors_are_surfaced() {
        let s3 = symmetric(3);
        let id: Vec<Elem> = s3.elements().collect();
        let v = json!({ "group": group_to_json(&s3), "radius": 1, "endomorphisms": { "-1": id, "1": id } });
        let err = parse_gca(&v, None).unwrap_err();
        assert!(matches!(err, LoadError::Rule(GcaError::ImagesDoNotCommute { i: -1, j: 1, .. })));
    }

    #[test]
    fn rule_round_trip() {
        let r = LocalRule::shift(Arc::new(cyclic(5)), -2);
        assert_eq!(parse_gca(&gca_to_json(&r), None).unwrap(), r);
    }
}
