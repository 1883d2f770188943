//! Identifiers and stable hashing.
//!
//! Images are addressed by the SHA-256 of their bytes. Everything else gets a
//! 128-bit token, either random or derived from content when the caller needs
//! replayable output.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex SHA-256 over the given parts, each length-prefixed so that
/// `("ab", "c")` and `("a", "bc")` hash differently.
pub fn stable_hash<I, P>(parts: I) -> String
where
    I: IntoIterator<Item = P>,
    P: AsRef<[u8]>,
{
    let mut hasher = Sha256::new();
    for part in parts {
        let bytes = part.as_ref();
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }
    hex::encode(hasher.finalize())
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Folds the first eight bytes of a stable hash into a `u64` seed.
pub fn seed_from<I, P>(parts: I) -> u64
where
    I: IntoIterator<Item = P>,
    P: AsRef<[u8]>,
{
    let h = stable_hash(parts);
    u64::from_str_radix(&h[..16], 16).expect("hex digest")
}

/// Content address of stored image bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImageId(pub String);

impl ImageId {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        ImageId(content_hash(bytes))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True when the id looks like a SHA-256 hex digest.
    pub fn is_well_formed(s: &str) -> bool {
        s.len() == 64 && s.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
    }
}

impl fmt::Display for ImageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// 128-bit token rendered as 32 hex characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(pub String);

impl Token {
    pub fn random() -> Self {
        let mut buf = [0u8; 16];
        rand::rng().fill_bytes(&mut buf);
        Token(hex::encode(buf))
    }

    pub fn from_rng(rng: &mut impl RngCore) -> Self {
        let mut buf = [0u8; 16];
        rng.fill_bytes(&mut buf);
        Token(hex::encode(buf))
    }

    /// Token derived from content, for items that must be identical across
    /// replays of the same mock run.
    pub fn derived<I, P>(parts: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[u8]>,
    {
        Token(stable_hash(parts)[..32].to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn seed(&self) -> u64 {
        seed_from([self.0.as_bytes()])
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
