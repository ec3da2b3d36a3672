//! Seedable generators for randomized checks and sweeps.
//!
//! Everything is driven by ChaCha8, which is portable and has a stable
//! stream for a given seed; outputs that persist results record the
//! generator identifier together with the seed.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hashing::{HashFamily, HashKind};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use crate::pa::PaInstance;
use crate::states::{ClassicalDistribution, CqEnsemble, DensityOperator};

/// Identifier of the generator algorithm, recorded in persisted outputs.
pub const RNG_ALGORITHM: &str = "chacha8";

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a named sub-task and trial index, so
/// single trials can be replayed without re-running predecessors.
pub fn derived_rng(seed: u64, label: &str, trial: u64) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(seed ^ h).wrapping_add(trial)))
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Random density operator `G G^dagger / tr`, full rank almost surely.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, dim);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityOperator::from_matrix(m.scale(Complex64::new(1.0 / tr, 0.0)))
        .expect("Gram matrix is a valid density operator")
}

/// Random diagonal density operator with strictly positive entries.
pub fn random_diagonal_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityOperator {
    DensityOperator::from_diagonal(random_distribution(rng, dim).probs())
        .expect("normalized diagonal")
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    let m = g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0));
    HermitianOperator::new(m).expect("symmetrized matrix is Hermitian")
}

/// Haar-ish random unitary via Gram-Schmidt on a Ginibre matrix. Exact Haar
/// distribution is not needed anywhere; orthonormality is.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| (0..dim).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let proj: Complex64 = cols[k]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            let anchor = cols[k].clone();
            for (target, a) in cols[j].iter_mut().zip(&anchor) {
                *target -= proj * a;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            u[(i, j)] = cols[j][i];
        }
    }
    u
}

/// Strictly positive distribution from normalized exponentials.
pub fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> ClassicalDistribution {
    let raw: Vec<f64> = (0..len).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let sum: f64 = raw.iter().sum();
    ClassicalDistribution::new(raw.iter().map(|x| x / sum).collect()).expect("normalized")
}

/// Distribution with probabilities `k_i / 2^denom_log2`; the values are
/// exactly representable, so downstream sums stay exact.
pub fn random_dyadic_distribution(
    rng: &mut ChaCha8Rng,
    len: usize,
    denom_log2: u32,
) -> ClassicalDistribution {
    let total = 1u64 << denom_log2;
    // len positive integer masses summing to `total`
    let mut masses = vec![1u64; len];
    let mut rest = total - len as u64;
    for m in masses.iter_mut().take(len - 1) {
        let take = rng.random_range(0..=rest);
        *m += take;
        rest -= take;
    }
    masses[len - 1] += rest;
    let denom = total as f64;
    ClassicalDistribution::new(masses.iter().map(|&k| k as f64 / denom).collect())
        .expect("dyadic masses sum to one")
}

/// Random ensemble with full-rank quantum conditionals.
pub fn random_ensemble(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> CqEnsemble {
    let dist = random_distribution(rng, len);
    let conds = (0..len).map(|_| random_density(rng, dim)).collect();
    CqEnsemble::new(dist.probs().to_vec(), conds).expect("generated ensemble is valid")
}

/// Hermitian operator of exactly the requested rank, built as
/// `V diag(l_1 .. l_r, 0 ..) V^dagger` with the nonzero eigenvalues
/// returned alongside.
pub fn random_rank_r_hermitian(
    rng: &mut ChaCha8Rng,
    dim: usize,
    rank: usize,
) -> (HermitianOperator, Vec<f64>) {
    assert!(rank >= 1 && rank <= dim);
    let mut eigs = vec![0.0; dim];
    for e in eigs.iter_mut().take(rank) {
        // bounded away from zero so the forced rank is unambiguous
        let mag = 0.2 + rng.random::<f64>();
        *e = if rng.random::<bool>() { mag } else { -mag };
    }
    let v = random_unitary(rng, dim);
    let m = v
        .matmul(&ComplexMatrix::diagonal(&eigs))
        .matmul(&v.adjoint());
    let nonzero = eigs[..rank].to_vec();
    // symmetrize away the last bit of rounding
    let sym = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
    (
        HermitianOperator::new(sym).expect("conjugated diagonal is Hermitian"),
        nonzero,
    )
}

/// Random square matrix with known eigenvalues: `U T U^dagger` for upper
/// triangular `T`. Returns the matrix and the diagonal of `T`.
pub fn random_known_spectrum_matrix(
    rng: &mut ChaCha8Rng,
    dim: usize,
) -> (ComplexMatrix, Vec<Complex64>) {
    let mut t = ComplexMatrix::zeros(dim, dim);
    let mut eigs = Vec::with_capacity(dim);
    for i in 0..dim {
        for j in i..dim {
            t[(i, j)] = complex_gaussian(rng);
        }
        eigs.push(t[(i, i)]);
    }
    let u = random_unitary(rng, dim);
    (u.matmul(&t).matmul(&u.adjoint()), eigs)
}

/// Random experiment from the desk-scale instance space: 2..4 input bits,
/// adversary dimension 1, 2 or 4, 1..3 output bits, Toeplitz or complete
/// family, dyadic probabilities with denominator 256.
pub fn random_pa_instance(rng: &mut ChaCha8Rng, epsilon: f64) -> PaInstance {
    let n = *[2u32, 3, 4].get(rng.random_range(0..3usize)).unwrap();
    let adv_dim = *[1usize, 2, 4].get(rng.random_range(0..3usize)).unwrap();
    let s = rng.random_range(1..=3.min(n));
    let kind = if rng.random::<bool>() {
        HashKind::Toeplitz
    } else {
        HashKind::AllFunctions
    };
    let m = 1usize << n;
    let dist = random_dyadic_distribution(rng, m, 8);
    let conds: Vec<DensityOperator> = (0..m).map(|_| random_density(rng, adv_dim)).collect();
    let source = CqEnsemble::new(dist.probs().to_vec(), conds).expect("valid ensemble");
    let family = HashFamily::new(kind, n, s).expect("valid family");
    PaInstance::new(source, family, epsilon).expect("valid instance")
}
