//! Key-value text reports.
//!
//! ```text
//! # <title>
//! key = value
//! ```
//!
//! Keys are unique and kept in insertion order. Floats are written with
//! Rust's shortest round-trip formatting, so `parse(write(x)) == x`.

use std::fmt::Display;
use std::path::Path;

use crate::error::{Error, Result};

/// Shortest round-trip float text, switching to exponent form outside
/// [1e-4, 1e15) so that values like 4.5e-28 stay readable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct KvReport {
    pub title: String,
    /// (key, value, byte offset of the line it was parsed from)
    entries: Vec<(String, String, usize)>,
}

impl PartialEq for KvReport {
    fn eq(&self, other: &Self) -> bool {
        self.title == other.title && self.entries().eq(other.entries())
    }
}

impl KvReport {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_owned(), value, 0)),
        }
        self
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v, _)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }

    fn offset_of(&self, key: &str) -> usize {
        self.entries.iter().find(|(k, _, _)| k == key).map_or(0, |e| e.2)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::format(self.title.clone(), 0, format!("missing key `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        v.parse().map_err(|e| {
            Error::format(self.title.clone(), self.offset_of(key), format!("`{key}`: bad number `{v}`: {e}"))
        })
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.require(key)?;
        v.parse().map_err(|e| {
            Error::format(self.title.clone(), self.offset_of(key), format!("`{key}`: bad integer `{v}`: {e}"))
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# {}\n", self.title);
        for (k, v, _) in &self.entries {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str, what: &str) -> Result<Self> {
        let mut report = KvReport::new("");
        let mut offset = 0;
        let mut title_seen = false;
        for raw in text.split_inclusive('\n') {
            let at = offset;
            offset += raw.len();
            if !raw.ends_with('\n') {
                return Err(Error::format(what, at, "truncated line (no newline)"));
            }
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(t) = line.strip_prefix('#') {
                if !title_seen {
                    report.title = t.trim().to_owned();
                    title_seen = true;
                }
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::format(what, at, format!("expected `key = value`, got `{line}`")));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::format(what, at, "empty key"));
            }
            if report.get(k).is_some() {
                return Err(Error::format(what, at, format!("duplicate key `{k}`")));
            }
            report.entries.push((k.to_owned(), v.trim().to_owned(), at));
        }
        if !title_seen {
            return Err(Error::format(what, 0, "missing `# <title>` line"));
        }
        Ok(report)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
