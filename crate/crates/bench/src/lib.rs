//! Shared fixtures for the kernel benchmarks.

use qpa_core::hashing::{HashFamily, HashKind};
use qpa_core::pa::PaInstance;
use qpa_core::random::{random_density, random_hermitian, rng_from_seed};
use qpa_core::states::{ClassicalDistribution, CqEnsemble};
use qpa_core::{DensityOperator, HermitianOperator};

pub fn hermitian(dim: usize) -> HermitianOperator {
    random_hermitian(&mut rng_from_seed(dim as u64), dim)
}

pub fn density(dim: usize) -> DensityOperator {
    random_density(&mut rng_from_seed(dim as u64 + 100), dim)
}

/// Uniform source with a quantum adversary of the given dimension.
pub fn instance(n: u32, adv_dim: usize, s: u32, kind: HashKind) -> PaInstance {
    let mut rng = rng_from_seed(7);
    let m = 1usize << n;
    let conds = (0..m).map(|_| random_density(&mut rng, adv_dim)).collect();
    let source = CqEnsemble::new(
        ClassicalDistribution::uniform(m).probs().to_vec(),
        conds,
    )
    .unwrap();
    PaInstance::new(source, HashFamily::new(kind, n, s).unwrap(), 0.1).unwrap()
}
