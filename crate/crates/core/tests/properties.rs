//! Property tests over the crate's structural invariants.

use proptest::prelude::*;

use qpa_core::entropy::{renyi_entropy, smooth_renyi_0, smooth_renyi_inf};
use qpa_core::hashing::{evaluate, BitString, HashFamily, HashKind};
use qpa_core::linalg::kron;
use qpa_core::metrics::{
    maximal_coupling, trace_distance, variational_distance,
};
use qpa_core::states::embed_classical;
use qpa_core::{ClassicalDistribution, ComplexMatrix, Complex64, DensityOperator};

fn prob_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..1.0f64, len).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|x| x / sum).collect()
    })
}

fn small_complex_matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim).prop_map(move |entries| {
        ComplexMatrix::from_rows(
            dim,
            dim,
            entries.iter().map(|(re, im)| Complex64::new(*re, *im)).collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn kron_trace_multiplicativity(a in small_complex_matrix(3), b in small_complex_matrix(2)) {
        let prod = kron(&a, &b).unwrap();
        let expected = a.trace() * b.trace();
        prop_assert!((prod.trace() - expected).norm() < 1e-10);
    }

    #[test]
    fn variational_distance_is_a_metric(
        p in prob_vector(5),
        q in prob_vector(5),
        r in prob_vector(5),
    ) {
        let (p, q, r) = (
            ClassicalDistribution::new(p).unwrap(),
            ClassicalDistribution::new(q).unwrap(),
            ClassicalDistribution::new(r).unwrap(),
        );
        let dpq = variational_distance(&p, &q).unwrap();
        let dqp = variational_distance(&q, &p).unwrap();
        prop_assert!((dpq - dqp).abs() < 1e-15);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dpq));
        let dpr = variational_distance(&p, &r).unwrap();
        let drq = variational_distance(&r, &q).unwrap();
        prop_assert!(dpq <= dpr + drq + 1e-12);
    }

    #[test]
    fn classical_embedding_preserves_distance(p in prob_vector(4), q in prob_vector(4)) {
        let p = ClassicalDistribution::new(p).unwrap();
        let q = ClassicalDistribution::new(q).unwrap();
        let dv = variational_distance(&p, &q).unwrap();
        let dt = trace_distance(&embed_classical(&p), &embed_classical(&q)).unwrap();
        prop_assert!((dv - dt).abs() < 1e-9);
    }

    #[test]
    fn coupling_achieves_the_distance(p in prob_vector(6), q in prob_vector(6)) {
        let p = ClassicalDistribution::new(p).unwrap();
        let q = ClassicalDistribution::new(q).unwrap();
        let c = maximal_coupling(&p, &q).unwrap();
        let d = variational_distance(&p, &q).unwrap();
        prop_assert!((c.mismatch_probability() - d).abs() < 1e-12);
        let (left, right) = c.marginals();
        for x in 0..6 {
            prop_assert!((left[x] - p.probs()[x]).abs() < 1e-12);
            prop_assert!((right[x] - q.probs()[x]).abs() < 1e-12);
        }
    }

    #[test]
    fn renyi_order_monotonicity(p in prob_vector(4), alpha in 0.0..4.0f64, beta in 0.0..4.0f64) {
        let rho = DensityOperator::from_diagonal(&p).unwrap();
        let (lo, hi) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        let s_lo = renyi_entropy(&rho, lo).unwrap();
        let s_hi = renyi_entropy(&rho, hi).unwrap();
        prop_assert!(s_lo >= s_hi - 1e-9, "S_{lo} = {s_lo} < S_{hi} = {s_hi}");
    }

    #[test]
    fn smoothing_stays_inside_the_ball(p in prob_vector(5), eps in 0.0..0.5f64) {
        let rho = DensityOperator::from_diagonal(&p).unwrap();
        let s0 = smooth_renyi_0(&rho, eps).unwrap();
        let sinf = smooth_renyi_inf(&rho, eps).unwrap();
        prop_assert!(s0.achieved_distance <= eps + 1e-12);
        prop_assert!(sinf.achieved_distance <= eps + 1e-12);
        prop_assert!((s0.witness.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!((sinf.witness.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!(s0.value <= renyi_entropy(&rho, 0.0).unwrap() + 1e-12);
        prop_assert!(sinf.value >= renyi_entropy(&rho, f64::INFINITY).unwrap() - 1e-12);
    }

    #[test]
    fn toeplitz_linearity(seed in 0u64..(1 << 6), z1 in 0u64..16, z2 in 0u64..16) {
        let fam = HashFamily::new(HashKind::Toeplitz, 4, 3).unwrap();
        let seed = BitString::from_word(seed, fam.seed_bits() as usize);
        let a = evaluate(&fam, &seed, &BitString::from_word(z1, 4)).unwrap();
        let b = evaluate(&fam, &seed, &BitString::from_word(z2, 4)).unwrap();
        let c = evaluate(&fam, &seed, &BitString::from_word(z1 ^ z2, 4)).unwrap();
        prop_assert_eq!(a.xor(&b), c);
    }

    #[test]
    fn bit_string_hex_round_trip(bits in prop::collection::vec(any::<bool>(), 1..40)) {
        let b = BitString::new(bits);
        let back = BitString::from_hex(&b.to_hex(), b.len()).unwrap();
        prop_assert_eq!(b, back);
    }
}
