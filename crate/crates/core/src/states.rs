//! Density operators, classical distributions, and classical-quantum
//! ensembles over finite sample spaces.
//!
//! A [`CqEnsemble`] is the finite, explicit form of a pair (X, rho): a
//! classical value `x` drawn from a distribution together with the
//! conditional state `rho_x` an observer holds when `X = x`. Classical
//! symbols are identified with their index in the ingested value list, which
//! fixes the basis `|x>` once and for all.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, HermitianOperator, DIM_CAP};

/// Tolerance for `tr(rho) = 1`.
pub const TRACE_TOL: f64 = 1e-9;
/// Allowed negative dust on eigenvalues of a density operator.
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance for probability normalization.
pub const PROB_TOL: f64 = 1e-12;
/// Events with probability at or below this floor cannot be conditioned on.
pub const PROB_FLOOR: f64 = 1e-15;

/// Positive unit-trace Hermitian operator with its spectrum cached.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    op: HermitianOperator,
    eigenvalues: Vec<f64>,
}

impl DensityOperator {
    /// Validates unit trace and positivity (up to tolerance) and caches the
    /// eigenvalues, sorted descending.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(
                "density operator",
                format!("trace {trace} is not 1"),
            ));
        }
        let eig = eig_hermitian(&op)?;
        if let Some(min) = eig.eigenvalues.last() {
            if *min < -PSD_TOL {
                return Err(Error::invalid(
                    "density operator",
                    format!("negative eigenvalue {min}"),
                ));
            }
        }
        Ok(DensityOperator {
            op,
            eigenvalues: eig.eigenvalues,
        })
    }

    pub fn from_matrix(mat: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(mat)?)
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diagonal(probs))
    }

    /// Basis-state projector `|index><index|` on a `dim`-dimensional space.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut d = vec![0.0; dim];
        d[index] = 1.0;
        DensityOperator {
            op: HermitianOperator::diagonal(&d),
            eigenvalues: {
                let mut e = vec![0.0; dim];
                e[0] = 1.0;
                e
            },
        }
    }

    /// The trivial state on a one-dimensional space.
    pub fn trivial() -> Self {
        DensityOperator {
            op: HermitianOperator::diagonal(&[1.0]),
            eigenvalues: vec![1.0],
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = vec![1.0 / dim as f64; dim];
        DensityOperator {
            op: HermitianOperator::diagonal(&p),
            eigenvalues: p,
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    /// Eigenvalues sorted descending, computed once at construction.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// Probability distribution over a finite range, indexed 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("probs", "empty distribution"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("probs", "negative or non-finite entry"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::invalid(
                "probs",
                format!("probabilities sum to {sum}, not 1"),
            ));
        }
        Ok(ClassicalDistribution { probs })
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0);
        ClassicalDistribution {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        assert!(at < len);
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        ClassicalDistribution { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Classical random variable with a conditional density operator per value.
///
/// Zero-probability values are allowed; their conditional state never enters
/// any average but must still be a valid density operator.
#[derive(Debug, Clone)]
pub struct CqEnsemble {
    probs: Vec<f64>,
    conditionals: Vec<DensityOperator>,
}

impl CqEnsemble {
    pub fn new(probs: Vec<f64>, conditionals: Vec<DensityOperator>) -> Result<Self> {
        let dist = ClassicalDistribution::new(probs)?;
        if dist.len() != conditionals.len() {
            return Err(Error::invalid(
                "ensemble",
                format!(
                    "{} probabilities vs {} conditional states",
                    dist.len(),
                    conditionals.len()
                ),
            ));
        }
        let dim = conditionals[0].dim();
        if conditionals.iter().any(|c| c.dim() != dim) {
            return Err(Error::invalid(
                "ensemble",
                "conditional states have mixed dimensions",
            ));
        }
        Ok(CqEnsemble {
            probs: dist.probs,
            conditionals,
        })
    }

    /// Ensemble whose adversary system is trivial (one-dimensional).
    pub fn with_trivial_adversary(dist: &ClassicalDistribution) -> Self {
        CqEnsemble {
            probs: dist.probs().to_vec(),
            conditionals: vec![DensityOperator::trivial(); dist.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn conditional(&self, x: usize) -> &DensityOperator {
        &self.conditionals[x]
    }

    pub fn conditional_dim(&self) -> usize {
        self.conditionals[0].dim()
    }

    pub fn distribution(&self) -> ClassicalDistribution {
        ClassicalDistribution {
            probs: self.probs.clone(),
        }
    }
}

/// Density operator seen by an observer ignorant of the classical value:
/// the convex combination `sum_x P(x) rho_x`.
pub fn average_density(e: &CqEnsemble) -> Result<DensityOperator> {
    let dim = e.conditional_dim();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (p, cond) in e.probs().iter().zip(0..e.len()) {
        acc.add_scaled(e.conditional(cond).matrix(), *p);
    }
    DensityOperator::from_matrix(acc)
}

/// Renormalized average over the values in `event`.
pub fn conditioned_density(e: &CqEnsemble, event: &[usize]) -> Result<DensityOperator> {
    let prob: f64 = event.iter().map(|&x| e.probs()[x]).sum();
    if prob <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityEvent {
            prob,
            floor: PROB_FLOOR,
        });
    }
    let dim = e.conditional_dim();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for &x in event {
        acc.add_scaled(e.conditional(x).matrix(), e.probs()[x] / prob);
    }
    DensityOperator::from_matrix(acc)
}

/// The joint classical-quantum state: block-diagonal with the x-th block
/// equal to `P(x) rho_x`. The classical register is the first tensor factor.
pub fn cq_state(e: &CqEnsemble) -> Result<DensityOperator> {
    let d = e.conditional_dim();
    let total = e.len() * d;
    if total > DIM_CAP {
        return Err(Error::DimensionOverflow {
            dim: total,
            cap: DIM_CAP,
        });
    }
    let mut acc = ComplexMatrix::zeros(total, total);
    for x in 0..e.len() {
        let block = e.conditional(x).matrix().scale(Complex64::new(e.probs()[x], 0.0));
        acc.set_block(x * d, &block);
    }
    DensityOperator::from_matrix(acc)
}

/// Diagonal embedding of a classical distribution as a quantum state.
pub fn embed_classical(dist: &ClassicalDistribution) -> DensityOperator {
    let mut eigenvalues = dist.probs().to_vec();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
    DensityOperator {
        op: HermitianOperator::diagonal(dist.probs()),
        eigenvalues,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_density(d: &[f64]) -> DensityOperator {
        DensityOperator::from_diagonal(d).unwrap()
    }

    #[test]
    fn average_of_orthogonal_pair_is_mixture() {
        let e = CqEnsemble::new(
            vec![0.5, 0.5],
            vec![diag_density(&[1.0, 0.0]), diag_density(&[0.0, 1.0])],
        )
        .unwrap();
        let avg = average_density(&e).unwrap();
        assert!(avg.matrix().sub(&ComplexMatrix::diagonal(&[0.5, 0.5])).frobenius_norm() < 1e-12);
    }

    #[test]
    fn average_of_singleton_is_the_state() {
        let rho = diag_density(&[0.25, 0.75]);
        let e = CqEnsemble::new(vec![1.0], vec![rho.clone()]).unwrap();
        let avg = average_density(&e).unwrap();
        assert!(avg.matrix().sub(rho.matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn average_convex_combination() {
        let e = CqEnsemble::new(
            vec![0.75, 0.25],
            vec![diag_density(&[1.0, 0.0]), diag_density(&[0.0, 1.0])],
        )
        .unwrap();
        let avg = average_density(&e).unwrap();
        assert!(avg.matrix().sub(&ComplexMatrix::diagonal(&[0.75, 0.25])).frobenius_norm() < 1e-12);
    }

    #[test]
    fn conditioning_on_everything_is_averaging() {
        let e = CqEnsemble::new(
            vec![0.25, 0.25, 0.5],
            vec![
                diag_density(&[1.0, 0.0]),
                diag_density(&[0.0, 1.0]),
                diag_density(&[0.5, 0.5]),
            ],
        )
        .unwrap();
        let all = conditioned_density(&e, &[0, 1, 2]).unwrap();
        let avg = average_density(&e).unwrap();
        assert!(all.matrix().sub(avg.matrix()).frobenius_norm() < 1e-12);

        let single = conditioned_density(&e, &[1]).unwrap();
        assert!(single.matrix().sub(e.conditional(1).matrix()).frobenius_norm() < 1e-12);

        // {a, b} with probabilities (1/4, 1/4) renormalizes to (1/2, 1/2)
        let pair = conditioned_density(&e, &[0, 1]).unwrap();
        assert!(pair.matrix().sub(&ComplexMatrix::diagonal(&[0.5, 0.5])).frobenius_norm() < 1e-12);
    }

    #[test]
    fn conditioning_on_null_event_fails() {
        let e = CqEnsemble::new(
            vec![1.0, 0.0],
            vec![diag_density(&[1.0]), diag_density(&[1.0])],
        )
        .unwrap();
        assert!(matches!(
            conditioned_density(&e, &[1]),
            Err(Error::ZeroProbabilityEvent { .. })
        ));
    }

    #[test]
    fn cq_state_trivial_adversary_is_the_distribution() {
        let e = CqEnsemble::with_trivial_adversary(&ClassicalDistribution::uniform(2));
        let cq = cq_state(&e).unwrap();
        assert!(cq.matrix().sub(&ComplexMatrix::diagonal(&[0.5, 0.5])).frobenius_norm() < 1e-12);
    }

    #[test]
    fn cq_state_constant_value() {
        let e = CqEnsemble::new(
            vec![1.0, 0.0],
            vec![diag_density(&[0.5, 0.5]), diag_density(&[0.5, 0.5])],
        )
        .unwrap();
        let cq = cq_state(&e).unwrap();
        assert!(
            cq.matrix()
                .sub(&ComplexMatrix::diagonal(&[0.5, 0.5, 0.0, 0.0]))
                .frobenius_norm()
                < 1e-12
        );
    }

    #[test]
    fn cq_state_of_independent_value_factorizes() {
        // all conditionals equal: the joint state is the Kronecker product
        // of the embedded distribution with the average state
        let rho = diag_density(&[0.7, 0.3]);
        let probs = vec![0.2, 0.5, 0.3];
        let e = CqEnsemble::new(probs.clone(), vec![rho.clone(); 3]).unwrap();
        let cq = cq_state(&e).unwrap();
        let dist = ClassicalDistribution::new(probs).unwrap();
        let product = crate::linalg::kron(embed_classical(&dist).matrix(), rho.matrix()).unwrap();
        assert!(cq.matrix().sub(&product).frobenius_norm() < 1e-12);
    }

    #[test]
    fn cq_state_cross_blocks_are_exactly_zero() {
        let e = CqEnsemble::new(
            vec![0.5, 0.5],
            vec![diag_density(&[0.9, 0.1]), diag_density(&[0.2, 0.8])],
        )
        .unwrap();
        let cq = cq_state(&e).unwrap();
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(cq.matrix()[(i, j)], Complex64::new(0.0, 0.0));
                assert_eq!(cq.matrix()[(j, i)], Complex64::new(0.0, 0.0));
            }
        }
        assert!((cq.matrix().trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partition_averages_recompose() {
        let e = CqEnsemble::new(
            vec![0.1, 0.2, 0.3, 0.4],
            vec![
                diag_density(&[1.0, 0.0]),
                diag_density(&[0.0, 1.0]),
                diag_density(&[0.5, 0.5]),
                diag_density(&[0.25, 0.75]),
            ],
        )
        .unwrap();
        let parts: [&[usize]; 2] = [&[0, 2], &[1, 3]];
        let dim = e.conditional_dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for part in parts {
            let p: f64 = part.iter().map(|&x| e.probs()[x]).sum();
            acc.add_scaled(conditioned_density(&e, part).unwrap().matrix(), p);
        }
        let avg = average_density(&e).unwrap();
        assert!(acc.sub(avg.matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn embed_classical_examples() {
        let u4 = embed_classical(&ClassicalDistribution::uniform(4));
        assert!(u4.matrix().sub(&ComplexMatrix::diagonal(&[0.25; 4])).frobenius_norm() < 1e-15);

        let point = embed_classical(&ClassicalDistribution::point_mass(3, 1));
        assert_eq!(crate::linalg::rank_from_eigenvalues(point.eigenvalues()), 1);
    }

    #[test]
    fn invalid_distribution_rejected() {
        assert!(ClassicalDistribution::new(vec![0.4, 0.4]).is_err());
        assert!(ClassicalDistribution::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn invalid_density_rejected() {
        // trace != 1
        assert!(DensityOperator::from_diagonal(&[0.5, 0.6]).is_err());
        // negative eigenvalue
        assert!(DensityOperator::from_diagonal(&[1.5, -0.5]).is_err());
    }
}
