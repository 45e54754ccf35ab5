//! Tiny CSV emission helpers (RFC-4180-style quoting).
//!
//! Lattice vertex labels are comma-joined coordinates ("1,-2"), so every
//! report writer funnels fields through [`field`] to get quoting right.
//! Numbers are formatted with `Display`, which for f64 is the shortest
//! representation that round-trips exactly.

use std::borrow::Cow;

/// Quotes one field if it contains a comma, quote, or newline; doubles any
/// embedded quotes.
pub fn field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        let mut out = String::with_capacity(s.len() + 2);
        out.push('"');
        for ch in s.chars() {
            if ch == '"' {
                out.push('"');
            }
            out.push(ch);
        }
        out.push('"');
        Cow::Owned(out)
    } else {
        Cow::Borrowed(s)
    }
}

/// Joins fields into one CSV line (no trailing newline).
pub fn row<S: AsRef<str>>(fields: &[S]) -> String {
    fields
        .iter()
        .map(|f| field(f.as_ref()).into_owned())
        .collect::<Vec<_>>()
        .join(",")
}
