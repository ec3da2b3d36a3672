//! Distance measures: variational distance between distributions, trace
//! distance and squared Hilbert-Schmidt distance between density operators,
//! and the non-uniformity of a classical value given an adversary state.
//!
//! Non-uniformity is the security figure of merit for a key: the trace
//! distance between the joint key-adversary state and an ideal state where
//! the key is uniform and independent of the adversary.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, trace_norm, ComplexMatrix, HermitianOperator};
use crate::states::{
    average_density, cq_state, embed_classical, ClassicalDistribution, CqEnsemble, DensityOperator,
};

/// Half the L1 distance between two distributions on the same range.
pub fn variational_distance(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::RangeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let sum: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * sum)
}

/// Joint distribution over X x X whose marginals are two given
/// distributions and whose off-diagonal mass realizes their variational
/// distance.
#[derive(Debug, Clone)]
pub struct Coupling {
    joint: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    /// `Pr[X != X']` under the joint distribution.
    pub fn mismatch_probability(&self) -> f64 {
        let mut off = 0.0;
        for (i, row) in self.joint.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    off += v;
                }
            }
        }
        off
    }

    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.joint.len();
        let mut left = vec![0.0; n];
        let mut right = vec![0.0; n];
        for (i, row) in self.joint.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                left[i] += v;
                right[j] += v;
            }
        }
        (left, right)
    }
}

/// Builds a maximal coupling: `min(P(x), Q(x))` sits on the diagonal and the
/// residual masses are paired off in index order, so the mismatch
/// probability equals the variational distance.
pub fn maximal_coupling(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
) -> Result<Coupling> {
    if p.len() != q.len() {
        return Err(Error::RangeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let n = p.len();
    let mut joint = vec![vec![0.0; n]; n];
    let mut p_residual = Vec::new();
    let mut q_residual = Vec::new();
    for (x, row) in joint.iter_mut().enumerate() {
        let shared = p.probs()[x].min(q.probs()[x]);
        row[x] = shared;
        if p.probs()[x] > shared {
            p_residual.push((x, p.probs()[x] - shared));
        }
        if q.probs()[x] > shared {
            q_residual.push((x, q.probs()[x] - shared));
        }
    }
    let (mut i, mut j) = (0, 0);
    while i < p_residual.len() && j < q_residual.len() {
        let (x, pm) = p_residual[i];
        let (y, qm) = q_residual[j];
        let moved = pm.min(qm);
        joint[x][y] += moved;
        p_residual[i].1 -= moved;
        q_residual[j].1 -= moved;
        if p_residual[i].1 <= 1e-18 {
            i += 1;
        }
        if q_residual[j].1 <= 1e-18 {
            j += 1;
        }
    }
    Ok(Coupling { joint })
}

/// Trace distance `1/2 tr |rho - sigma|`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let diff = rho.operator().sub(sigma.operator())?;
    Ok(0.5 * trace_norm(&diff)?)
}

/// Squared Hilbert-Schmidt distance `tr((rho - sigma)^2)`, the squared
/// Frobenius norm of the difference; no eigendecomposition needed.
pub fn hs_square_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let diff = rho.matrix().sub(sigma.matrix());
    let f = diff.frobenius_norm();
    Ok(f * f)
}

/// Ideal key state paired with an adversary: uniform distribution on the
/// classical register tensored with the average adversary state.
fn ideal_state(e: &CqEnsemble) -> Result<DensityOperator> {
    let uniform = embed_classical(&ClassicalDistribution::uniform(e.len()));
    let avg = average_density(e)?;
    DensityOperator::from_matrix(kron(uniform.matrix(), avg.matrix())?)
}

/// Trace distance from the joint classical-quantum state to the ideal
/// uniform-and-independent state. Zero exactly when the classical value is
/// uniform and independent of the adversary system.
pub fn nonuniformity(e: &CqEnsemble) -> Result<f64> {
    trace_distance(&cq_state(e)?, &ideal_state(e)?)
}

/// Squared Hilbert-Schmidt analogue of [`nonuniformity`].
pub fn hs_nonuniformity(e: &CqEnsemble) -> Result<f64> {
    hs_square_distance(&cq_state(e)?, &ideal_state(e)?)
}

/// Closed form for [`hs_nonuniformity`]:
/// `tr(sum_x P(x)^2 rho_x^2) - tr(avg^2) / |X|`.
pub fn hs_nonuniformity_closed_form(e: &CqEnsemble) -> Result<f64> {
    let mut acc = 0.0;
    for x in 0..e.len() {
        let p = e.probs()[x];
        let f = e.conditional(x).matrix().frobenius_norm();
        acc += p * p * f * f;
    }
    let avg = average_density(e)?;
    let f = avg.matrix().frobenius_norm();
    Ok(acc - f * f / e.len() as f64)
}

/// Conjugation `U rho U^dagger`; a reversible quantum operation.
pub fn conjugate_by_unitary(rho: &DensityOperator, u: &ComplexMatrix) -> Result<DensityOperator> {
    let m = u.matmul(rho.matrix()).matmul(&u.adjoint());
    DensityOperator::from_matrix(m)
}

/// Pinching in the computational basis: zeroes all matrix elements between
/// different blocks of the given index partition.
pub fn pinch(rho: &DensityOperator, blocks: &[Vec<usize>]) -> Result<DensityOperator> {
    let dim = rho.dim();
    let mut block_of = vec![usize::MAX; dim];
    for (b, idx) in blocks.iter().enumerate() {
        for &i in idx {
            block_of[i] = b;
        }
    }
    if block_of.contains(&usize::MAX) {
        return Err(Error::invalid("pinching", "blocks do not cover the space"));
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if block_of[i] == block_of[j] {
                out[(i, j)] = rho.matrix()[(i, j)];
            }
        }
    }
    DensityOperator::from_matrix(out)
}

/// Outcome distribution of the projective measurement along the columns of
/// a unitary: `P(i) = <u_i| rho |u_i>`.
pub fn measure_in_basis(
    rho: &DensityOperator,
    basis: &ComplexMatrix,
) -> Result<ClassicalDistribution> {
    let dim = rho.dim();
    if basis.rows() != dim || basis.cols() != dim {
        return Err(Error::DimensionMismatch {
            left: basis.rows(),
            right: dim,
        });
    }
    let mut probs = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            for s in 0..dim {
                acc += basis[(r, i)].conj() * rho.matrix()[(r, s)] * basis[(s, i)];
            }
        }
        probs.push(acc.re.max(0.0));
    }
    // normalize away rounding dust so the result is a valid distribution
    let sum: f64 = probs.iter().sum();
    ClassicalDistribution::new(probs.iter().map(|p| p / sum).collect())
}

/// Partial trace of a density operator on a bipartite space.
pub fn partial_trace_density(
    rho: &DensityOperator,
    dim_a: usize,
    dim_b: usize,
    keep_first: bool,
) -> Result<DensityOperator> {
    let m = crate::linalg::partial_trace(rho.matrix(), dim_a, dim_b, keep_first)?;
    DensityOperator::from_matrix(m)
}

/// Trace distance between two Hermitian matrices given in raw form; used
/// where intermediate blocks are not themselves density operators.
pub fn trace_distance_raw(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let diff = HermitianOperator::new(a.sub(b))?;
    Ok(0.5 * trace_norm(&diff)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::CqEnsemble;

    fn dist(p: &[f64]) -> ClassicalDistribution {
        ClassicalDistribution::new(p.to_vec()).unwrap()
    }

    fn diag_density(d: &[f64]) -> DensityOperator {
        DensityOperator::from_diagonal(d).unwrap()
    }

    #[test]
    fn variational_distance_examples() {
        let p = dist(&[0.5, 0.5]);
        assert_eq!(variational_distance(&p, &p).unwrap(), 0.0);

        let a = dist(&[1.0, 0.0]);
        let b = dist(&[0.0, 1.0]);
        assert_eq!(variational_distance(&a, &b).unwrap(), 1.0);

        assert!((variational_distance(&p, &a).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variational_distance_range_mismatch() {
        let p = dist(&[0.5, 0.5]);
        let q = dist(&[1.0]);
        assert!(matches!(
            variational_distance(&p, &q),
            Err(Error::RangeMismatch { .. })
        ));
    }

    #[test]
    fn coupling_identical_distributions_is_diagonal() {
        let p = dist(&[0.3, 0.7]);
        let c = maximal_coupling(&p, &p).unwrap();
        assert!(c.mismatch_probability() < 1e-15);
    }

    #[test]
    fn coupling_mismatch_equals_variational_distance() {
        let p = dist(&[0.5, 0.5]);
        let q = dist(&[1.0, 0.0]);
        let c = maximal_coupling(&p, &q).unwrap();
        assert!((c.mismatch_probability() - 0.5).abs() < 1e-12);

        // five-symbol pair; oracle is the direct half-L1 sum
        let p = dist(&[0.1, 0.2, 0.3, 0.15, 0.25]);
        let q = dist(&[0.3, 0.05, 0.25, 0.25, 0.15]);
        let c = maximal_coupling(&p, &q).unwrap();
        let d = variational_distance(&p, &q).unwrap();
        assert!((c.mismatch_probability() - d).abs() < 1e-12);
        let (left, right) = c.marginals();
        for x in 0..5 {
            assert!((left[x] - p.probs()[x]).abs() < 1e-12);
            assert!((right[x] - q.probs()[x]).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let rho = diag_density(&[1.0, 0.0]);
        let sigma = diag_density(&[0.0, 1.0]);
        assert!((trace_distance(&rho, &rho).unwrap()).abs() < 1e-12);
        assert!((trace_distance(&rho, &sigma).unwrap() - 1.0).abs() < 1e-12);

        let a = diag_density(&[0.75, 0.25]);
        let b = diag_density(&[0.5, 0.5]);
        assert!((trace_distance(&a, &b).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn hs_square_distance_examples() {
        let rho = diag_density(&[1.0, 0.0]);
        let sigma = diag_density(&[0.5, 0.5]);
        assert!(hs_square_distance(&rho, &rho).unwrap() < 1e-15);
        assert!((hs_square_distance(&rho, &sigma).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hs_square_matches_eigenvalue_sum() {
        // oracle: sum of squared eigenvalues of the difference
        let rho = diag_density(&[0.6, 0.3, 0.1]);
        let sigma = diag_density(&[0.2, 0.5, 0.3]);
        let diff = rho.operator().sub(sigma.operator()).unwrap();
        let eig = crate::linalg::eig_hermitian(&diff).unwrap();
        let oracle: f64 = eig.eigenvalues.iter().map(|l| l * l).sum();
        let hs = hs_square_distance(&rho, &sigma).unwrap();
        assert!((hs - oracle).abs() < 1e-12);
    }

    #[test]
    fn nonuniformity_of_uniform_independent_is_zero() {
        let rho = diag_density(&[0.7, 0.3]);
        let e = CqEnsemble::new(vec![0.5, 0.5], vec![rho.clone(), rho]).unwrap();
        assert!(nonuniformity(&e).unwrap() < 1e-10);
        assert!(hs_nonuniformity(&e).unwrap() < 1e-12);
    }

    #[test]
    fn nonuniformity_of_constant_value() {
        let e = CqEnsemble::new(
            vec![1.0, 0.0],
            vec![DensityOperator::trivial(), DensityOperator::trivial()],
        )
        .unwrap();
        assert!((nonuniformity(&e).unwrap() - 0.5).abs() < 1e-10);
        assert!((hs_nonuniformity(&e).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nonuniformity_of_perfect_copy() {
        // adversary holds an exact copy: the 4x4 joint state is
        // diag(1/2, 0, 0, 1/2) against the ideal diag(1/4, ...), distance 1/2
        let e = CqEnsemble::new(
            vec![0.5, 0.5],
            vec![diag_density(&[1.0, 0.0]), diag_density(&[0.0, 1.0])],
        )
        .unwrap();
        assert!((nonuniformity(&e).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn hs_nonuniformity_matches_closed_form() {
        let e = CqEnsemble::new(
            vec![0.6, 0.4],
            vec![diag_density(&[0.9, 0.1]), diag_density(&[0.3, 0.7])],
        )
        .unwrap();
        let direct = hs_nonuniformity(&e).unwrap();
        let closed = hs_nonuniformity_closed_form(&e).unwrap();
        assert!((direct - closed).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_metric_axioms_on_random_triples() {
        let mut rng = crate::random::rng_from_seed(9);
        for _ in 0..50 {
            let dim = 3;
            let a = crate::random::random_density(&mut rng, dim);
            let b = crate::random::random_density(&mut rng, dim);
            let c = crate::random::random_density(&mut rng, dim);
            let dab = trace_distance(&a, &b).unwrap();
            let dba = trace_distance(&b, &a).unwrap();
            let dac = trace_distance(&a, &c).unwrap();
            let dcb = trace_distance(&c, &b).unwrap();
            assert!((dab - dba).abs() < 1e-10);
            assert!(dab <= dac + dcb + 1e-9);
            assert!((0.0..=1.0 + 1e-9).contains(&dab));
            assert!(trace_distance(&a, &a).unwrap() < 1e-10);
        }
    }

    #[test]
    fn classical_embedding_preserves_distance() {
        let p = dist(&[0.15, 0.35, 0.5]);
        let q = dist(&[0.4, 0.1, 0.5]);
        let dv = variational_distance(&p, &q).unwrap();
        let dt = trace_distance(&embed_classical(&p), &embed_classical(&q)).unwrap();
        assert!((dv - dt).abs() < 1e-10);
    }
}
