//! Content ids and the machine-readable anchor payload printed on the static layer.

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::spec::{to_canonical_string, Rect};

/// 16 lowercase hex chars: the first 64 bits of SHA-256 over `canonical`.
pub fn spec_id(canonical: &[u8]) -> String {
    let digest = Sha256::digest(canonical);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPayload {
    pub id: String,
    pub version: u64,
    pub hub: String,
    pub rect: Rect,
}

impl AnchorPayload {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "papar": 1,
            "id": self.id,
            "ver": self.version,
            "hub": self.hub,
            "box": [self.rect.x, self.rect.y, self.rect.width, self.rect.height],
        })
    }

    /// Sorted keys, integral numbers without a fraction.
    pub fn to_canonical(&self) -> String {
        to_canonical_string(&self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_keys_are_sorted() {
        let p = AnchorPayload {
            id: "00112233aabbccdd".into(),
            version: 2,
            hub: "http://127.0.0.1:7070".into(),
            rect: Rect::new(244.0, 144.0, 48.0, 48.0),
        };
        assert_eq!(
            p.to_canonical(),
            r#"{"box":[244,144,48,48],"hub":"http://127.0.0.1:7070","id":"00112233aabbccdd","papar":1,"ver":2}"#
        );
    }

    #[test]
    fn id_is_sha256_prefix() {
        // sha256("abc") = ba7816bf8f01cfea...
        assert_eq!(spec_id(b"abc"), "ba7816bf8f01cfea");
    }
}
