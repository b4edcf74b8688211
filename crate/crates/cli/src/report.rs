//! Hierarchical key/value reports rendered as indented text or JSON.

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    List(Vec<Node>),
    Map(Vec<(String, Node)>),
}

impl Node {
    pub fn map() -> Self {
        Node::Map(Vec::new())
    }

    /// Appends a child to a map node (no-op on other variants).
    pub fn with(mut self, key: impl Into<String>, value: impl Into<Node>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Node>) {
        if let Node::Map(entries) = self {
            entries.push((key.into(), value.into()));
        }
    }

    pub fn get(&self, key: &str) -> Option<&Node> {
        match self {
            Node::Map(entries) => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    /// Resolves a dotted path such as `snr.snr_single`.
    pub fn lookup(&self, path: &str) -> Option<&Node> {
        path.split('.').try_fold(self, |node, key| node.get(key))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Node::Num(x) => Some(*x),
            Node::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn scalar_text(&self) -> Option<String> {
        Some(match self {
            Node::Num(x) => format!("{x:e}"),
            Node::Int(i) => i.to_string(),
            Node::Bool(b) => b.to_string(),
            Node::Str(s) => s.clone(),
            _ => return None,
        })
    }

    fn write_text(&self, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match self {
            Node::Map(entries) => {
                for (k, v) in entries {
                    match v.scalar_text() {
                        Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                        None => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            v.write_text(indent + 1, out);
                        }
                    }
                }
            }
            Node::List(items) => {
                for v in items {
                    match v.scalar_text() {
                        Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                        None => {
                            out.push_str(&format!("{pad}-\n"));
                            v.write_text(indent + 1, out);
                        }
                    }
                }
            }
            scalar => {
                out.push_str(&pad);
                out.push_str(&scalar.scalar_text().unwrap_or_default());
                out.push('\n');
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(0, &mut out);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report nodes always serialise")
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            // JSON has no NaN or infinity
            Node::Num(x) if !x.is_finite() => s.serialize_none(),
            Node::Num(x) => s.serialize_f64(*x),
            Node::Int(i) => s.serialize_i64(*i),
            Node::Bool(b) => s.serialize_bool(*b),
            Node::Str(v) => s.serialize_str(v),
            Node::List(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for v in items {
                    seq.serialize_element(v)?;
                }
                seq.end()
            }
            Node::Map(entries) => {
                let mut map = s.serialize_map(Some(entries.len()))?;
                for (k, v) in entries {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

impl From<f64> for Node {
    fn from(x: f64) -> Self {
        Node::Num(x)
    }
}

impl From<usize> for Node {
    fn from(x: usize) -> Self {
        Node::Int(x as i64)
    }
}

impl From<u64> for Node {
    fn from(x: u64) -> Self {
        Node::Int(x as i64)
    }
}

impl From<bool> for Node {
    fn from(x: bool) -> Self {
        Node::Bool(x)
    }
}

impl From<&str> for Node {
    fn from(x: &str) -> Self {
        Node::Str(x.to_string())
    }
}

impl From<String> for Node {
    fn from(x: String) -> Self {
        Node::Str(x)
    }
}

impl<T: Into<Node>> From<Vec<T>> for Node {
    fn from(xs: Vec<T>) -> Self {
        Node::List(xs.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl Format {
    pub fn render(self, node: &Node) -> String {
        match self {
            Format::Text => node.to_text(),
            Format::Json => node.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_in_insertion_order() {
        let n = Node::map().with("b", 2.0).with(
            "a",
            Node::map().with("x", true).with("list", vec![1usize, 2]),
        );
        assert_eq!(
            n.to_text(),
            "b: 2e0\na:\n  x: true\n  list:\n    - 1\n    - 2\n"
        );
        let json = n.to_json();
        assert!(json.find("\"b\"").unwrap() < json.find("\"a\"").unwrap());
        assert_eq!(n.lookup("a.x"), Some(&Node::Bool(true)));
    }
}
