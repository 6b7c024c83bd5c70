//! Deterministic seed derivation.
//!
//! Every random decision in an experiment draws from its own RNG, seeded by
//! hashing the master seed together with a path of (role, index) components.
//! Tasks can therefore run in any order, on any number of workers, and still
//! produce bit-identical output: no task ever consumes another task's stream.
//!
//! The scheme is `seed = trunc64(SHA-256(master || c_0 || c_1 || ...))` with
//! every component encoded little-endian. Scenario identity is deliberately
//! *not* a component: the upper-bound scenario must coincide bit-for-bit with
//! the black-box scenario on non-member instances.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Role tags, the fixed vocabulary of the derivation path.
///
/// `Target` and `Instance` are structural: they scope everything after them
/// to one target record or one test instance. The rest name the random
/// decision being seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Split = 1,
    Queries = 2,
    TestLabels = 3,
    TestWorld = 4,
    TestFit = 5,
    TestSample = 6,
    AdjoinWorld = 7,
    AdjoinFit = 8,
    PoolFit = 9,
    PoolSample = 10,
    ShadowLabels = 11,
    ShadowWorld = 12,
    ShadowFit = 13,
    ShadowSample = 14,
    MetaClassifier = 15,
    ControlShuffle = 16,
    Fixture = 17,
    Target = 18,
    Instance = 19,
}

/// A point in the seed-derivation tree.
///
/// Cheap to copy; extending with [`SeedCtx::with`] appends one component.
#[derive(Debug, Clone)]
pub struct SeedCtx {
    master: u64,
    path: Vec<u64>,
}

impl SeedCtx {
    pub fn new(master: u64) -> Self {
        SeedCtx {
            master,
            path: Vec::new(),
        }
    }

    /// Append a (role, index) component.
    pub fn with(&self, role: Role, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(role as u64);
        path.push(index);
        SeedCtx {
            master: self.master,
            path,
        }
    }

    /// Collapse the path to a 64-bit seed.
    pub fn seed(&self) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(self.master.to_le_bytes());
        for c in &self.path {
            hasher.update(c.to_le_bytes());
        }
        let digest = hasher.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
    }

    /// RNG seeded at this point of the tree.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }
}

/// RNG from a raw 64-bit seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hash a base seed with raw components, for substreams internal to one
/// module (per-tree bootstraps, per-node samplers). Attack-level seeds go
/// through [`SeedCtx`] instead so their paths stay structured.
pub fn derive(base: u64, components: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for c in components {
        hasher.update(c.to_le_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Deterministic perturbation used by the single retry a failed fit gets.
pub fn perturb(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}
