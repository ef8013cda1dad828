use serde::{Deserialize, Serialize};

/// Identifier as it appears in a graph document. Numbers and strings are both
/// accepted and normalized to their textual form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawId {
    Text(String),
    Int(i64),
}

impl RawId {
    pub fn into_string(self) -> String {
        match self {
            RawId::Text(s) => s,
            RawId::Int(i) => i.to_string(),
        }
    }
}

impl From<&str> for RawId {
    fn from(s: &str) -> Self {
        RawId::Text(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub id: RawId,
    pub from: RawId,
    pub to: RawId,
    pub length: f64,
}

/// On-disk graph description:
///
/// ```json
/// {"vertices": ["a", "b"], "edges": [{"id": "e0", "from": "a", "to": "b", "length": 1.0}], "root": "a"}
/// ```
///
/// `root` is optional; when absent the first listed vertex is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<RawId>,
    pub edges: Vec<EdgeDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<RawId>,
}
