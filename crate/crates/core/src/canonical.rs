//! Canonical JSON: object keys sorted, no insignificant whitespace.
//!
//! Every persisted artifact (knowledge base, decision log, language
//! description) and every state hash goes through this module so that
//! byte-level comparisons are meaningful.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serializes `value` into canonical JSON.
///
/// `serde_json::Value` keeps object keys in a `BTreeMap`, so routing through
/// it sorts keys at every depth.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let tree = serde_json::to_value(value).expect("domain types always serialize");
    serde_json::to_string(&tree).expect("a JSON value always serializes")
}

/// Canonical JSON followed by a single newline, the on-disk form.
pub fn to_canonical_file<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = to_canonical_string(value);
    out.push('\n');
    out
}

/// Lowercase hex SHA-256 of the canonical serialization.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> String {
    sha256_hex(to_canonical_string(value).as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn keys_are_sorted_at_every_depth() {
        let mut inner = HashMap::new();
        inner.insert("zeta", 1);
        inner.insert("alpha", 2);
        let mut outer = HashMap::new();
        outer.insert("b", inner.clone());
        outer.insert("a", inner);
        assert_eq!(
            to_canonical_string(&outer),
            r#"{"a":{"alpha":2,"zeta":1},"b":{"alpha":2,"zeta":1}}"#
        );
    }

    #[test]
    fn hash_is_64_hex_digits() {
        let h = content_hash(&vec![1, 2, 3]);
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
