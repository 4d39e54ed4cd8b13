//! Three-valued verdicts with certificates.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }

    pub fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    /// Kleene conjunction.
    pub fn and(self, other: Truth) -> Self {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    /// Kleene disjunction.
    pub fn or(self, other: Truth) -> Self {
        self.not().and(other.not()).not()
    }
}

impl std::fmt::Display for Truth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Decomposition,
    Oracle,
    LeafFormula,
    Extension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: Truth,
    pub method: Method,
    pub certificate: Value,
}

impl Verdict {
    pub fn new(value: Truth, method: Method, certificate: Value) -> Self {
        Verdict { value, method, certificate }
    }

    pub fn from_bool(b: bool, method: Method, certificate: Value) -> Self {
        Verdict::new(Truth::from_bool(b), method, certificate)
    }

    pub fn unknown(method: Method, certificate: Value) -> Self {
        Verdict::new(Truth::Unknown, method, certificate)
    }

    pub fn is_true(&self) -> bool {
        self.value == Truth::True
    }

    pub fn is_false(&self) -> bool {
        self.value == Truth::False
    }

    pub fn is_unknown(&self) -> bool {
        self.value == Truth::Unknown
    }

    /// The complementary verdict with the same evidence.
    pub fn negated(&self) -> Self {
        Verdict { value: self.value.not(), ..self.clone() }
    }
}
