//! Content digests for artifacts and stable identifiers.

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

/// Digest of the canonical (sorted-key, compact) JSON form of `value`.
pub fn json_digest<T: serde::Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value).expect("artifact serializes to JSON");
    sha256_hex(canonical.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_vector() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn json_digest_ignores_field_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"x":1,"y":[2,3]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"y":[2,3],"x":1}"#).unwrap();
        assert_eq!(json_digest(&a), json_digest(&b));
    }
}
