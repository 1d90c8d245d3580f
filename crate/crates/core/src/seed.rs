//! Deterministic seeding.
//!
//! Every random draw in the crate flows from a single 64-bit [`RngSeed`]. Components
//! never share a generator; instead they derive a child seed from a label and an index:
//!
//! ```text
//! child(seed, label, index) = first 8 bytes (LE) of
//!     SHA-256("labelrank/seed/v1" || seed.to_le_bytes() || label || 0x00 || index.to_le_bytes())
//! ```
//!
//! Generators are ChaCha8 streams seeded through `SeedableRng::seed_from_u64`, which is
//! specified independently of platform and word size.
//!
//! Seeds serialize as integers when they fit in an `i64` and as decimal strings
//! otherwise, since TOML integers are signed 64-bit. Both forms deserialize.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use std::fmt;

const DOMAIN: &[u8] = b"labelrank/seed/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn child(self, label: &str, index: u64) -> RngSeed {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN);
        hasher.update(self.0.to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update([0u8]);
        hasher.update(index.to_le_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        RngSeed(u64::from_le_bytes(bytes))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// `count` trial seeds derived from this one, used by multi-seed experiment runners.
    pub fn trials(self, count: usize) -> Vec<RngSeed> {
        (0..count as u64).map(|i| self.child("trial", i)).collect()
    }
}

impl From<u64> for RngSeed {
    fn from(value: u64) -> Self {
        RngSeed(value)
    }
}

impl Serialize for RngSeed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match i64::try_from(self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for RngSeed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(RngSeed(v)),
            Raw::Text(t) => t
                .parse()
                .map(RngSeed)
                .map_err(|_| serde::de::Error::custom(format!("invalid seed {t:?}"))),
        }
    }
}

impl fmt::Display for RngSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_forms() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W {
            s: Vec<RngSeed>,
        }
        let w = W { s: vec![RngSeed(5), RngSeed(u64::MAX)] };
        let text = toml::to_string(&w).unwrap();
        assert_eq!(text, "s = [5, \"18446744073709551615\"]\n");
        assert_eq!(toml::from_str::<W>(&text).unwrap(), w);
        assert!(toml::from_str::<W>("s = [-1]").is_err());
    }
    use rand::Rng;

    #[test]
    fn children_are_stable_and_distinct() {
        let s = RngSeed(7);
        assert_eq!(s.child("cells", 0), s.child("cells", 0));
        assert_ne!(s.child("cells", 0), s.child("cells", 1));
        assert_ne!(s.child("cells", 0), s.child("assign", 0));
        assert_ne!(s.child("cells", 0), RngSeed(8).child("cells", 0));
    }

    #[test]
    fn rng_streams_repeat() {
        let a: Vec<u64> = RngSeed(11).rng().random_iter().take(4).collect();
        let b: Vec<u64> = RngSeed(11).rng().random_iter().take(4).collect();
        assert_eq!(a, b);
    }
}
