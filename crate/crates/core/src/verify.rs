//! Randomized numerical verification of the identities and inequalities the
//! security analysis is built on.
//!
//! Every check draws its instances from a stream derived from a base seed,
//! the check name, and the trial index, so a single failing trial can be
//! replayed in isolation. Checks report the worst violation margin they saw;
//! a margin above zero is a failure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entropy::{renyi_entropy, renyi_from_spectrum, smooth_renyi_0, smooth_renyi_inf};
use crate::error::{Error, Result};
use crate::hashing::{HashFamily, HashKind};
use crate::linalg::{eig_hermitian, kron, rank_from_eigenvalues, trace_norm, ComplexMatrix};
use crate::metrics::{
    conjugate_by_unitary, hs_nonuniformity, hs_nonuniformity_closed_form, maximal_coupling,
    measure_in_basis, nonuniformity, partial_trace_density, pinch, trace_distance,
    trace_distance_raw, variational_distance,
};
use crate::pa::{
    asymptotic_rate, cq_collision_entropy, cq_spectrum, exact_key_distance, pushforward_ensemble,
    collision_entropy_bound, PaInstance,
};
use crate::random::{
    derived_rng, random_density, random_diagonal_density, random_distribution, random_ensemble,
    random_hermitian, random_known_spectrum_matrix, random_pa_instance, random_rank_r_hermitian,
    random_unitary,
};
use crate::states::{average_density, CqEnsemble, DensityOperator};

/// Outcome of one randomized check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: u32,
    pub failures: u32,
    /// Worst violation margin seen; negative values mean the check held
    /// with room to spare.
    pub max_violation: f64,
    pub first_failure: Option<FailureRecord>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Details of the first failing trial, if any.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub trial: u32,
    pub detail: String,
    /// Full instance dump for experiment-level checks; replayable as an
    /// explicit scenario.
    pub instance: Option<InstanceDump>,
}

/// Explicit serialization of a privacy amplification instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDump {
    pub family: HashKind,
    pub input_bits: u32,
    pub output_bits: u32,
    pub epsilon: f64,
    pub probs: Vec<f64>,
    /// Conditional states as dense matrices of `[re, im]` pairs.
    pub conditionals: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn dump_instance(inst: &PaInstance) -> InstanceDump {
    let src = inst.source();
    let conditionals = (0..src.len())
        .map(|z| {
            let m = src.conditional(z).matrix();
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect()
        })
        .collect();
    InstanceDump {
        family: inst.family().kind,
        input_bits: inst.input_bits(),
        output_bits: inst.output_bits(),
        epsilon: inst.epsilon(),
        probs: src.probs().to_vec(),
        conditionals,
    }
}

pub fn instance_from_dump(dump: &InstanceDump) -> Result<PaInstance> {
    let conds: Result<Vec<DensityOperator>> = dump
        .conditionals
        .iter()
        .map(|rows| {
            let dim = rows.len();
            let mut m = ComplexMatrix::zeros(dim, dim);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(Error::invalid("conditionals", "non-square matrix"));
                }
                for (j, entry) in row.iter().enumerate() {
                    m[(i, j)] = Complex64::new(entry[0], entry[1]);
                }
            }
            DensityOperator::from_matrix(m)
        })
        .collect();
    let source = CqEnsemble::new(dump.probs.clone(), conds?)?;
    let family = HashFamily::new(dump.family, dump.input_bits, dump.output_bits)?;
    PaInstance::new(source, family, dump.epsilon)
}

/// Names of all checks, in reporting order.
pub const CHECK_NAMES: [&str; 17] = [
    "schur-inequality",
    "rank-trace-bound",
    "renyi-monotonicity",
    "distance-subadditivity",
    "distance-append-equality",
    "channel-monotonicity",
    "measurement-bound",
    "coupling",
    "distance-expectation",
    "rank-distance-bound",
    "nonuniformity-hs-bound",
    "hs-closed-form",
    "collision-bound",
    "seed-decomposition",
    "rate-data-processing",
    "smoothing-oracle",
    "hash-bound",
];

/// Runs one named check. `inject_failure` deliberately corrupts the bound in
/// the `hash-bound` check so the harness itself can be tested end to end.
pub fn run_check(name: &str, seed: u64, trials: u32, inject_failure: bool) -> Result<CheckOutcome> {
    run_check_at(name, seed, 0, trials, inject_failure)
}

/// Re-runs exactly one trial of a check; trials are independently seeded,
/// so a dumped failure replays in isolation.
pub fn replay_trial(name: &str, seed: u64, trial: u32) -> Result<CheckOutcome> {
    run_check_at(name, seed, trial, 1, false)
}

fn run_check_at(
    name: &str,
    seed: u64,
    first_trial: u32,
    trials: u32,
    inject_failure: bool,
) -> Result<CheckOutcome> {
    let runner: fn(u64, u32, u32, bool) -> Result<CheckOutcome> = match name {
        "schur-inequality" => check_schur,
        "rank-trace-bound" => check_rank_trace_bound,
        "renyi-monotonicity" => check_renyi_monotonicity,
        "distance-subadditivity" => check_subadditivity,
        "distance-append-equality" => check_append_equality,
        "channel-monotonicity" => check_channel_monotonicity,
        "measurement-bound" => check_measurement_bound,
        "coupling" => check_coupling,
        "distance-expectation" => check_distance_expectation,
        "rank-distance-bound" => check_rank_distance_bound,
        "nonuniformity-hs-bound" => check_nonuniformity_hs_bound,
        "hs-closed-form" => check_hs_closed_form,
        "collision-bound" => check_collision_bound,
        "seed-decomposition" => check_seed_decomposition,
        "rate-data-processing" => check_rate_data_processing,
        "smoothing-oracle" => check_smoothing_oracle,
        "hash-bound" => check_hash_bound,
        _ => {
            return Err(Error::invalid("check", format!("unknown check `{name}`")));
        }
    };
    runner(seed, first_trial, trials, inject_failure)
}

/// Runs every check with the same base seed.
pub fn run_all_checks(seed: u64, trials: u32, inject_failure: bool) -> Result<Vec<CheckOutcome>> {
    CHECK_NAMES
        .iter()
        .map(|name| run_check(name, seed, trials, inject_failure))
        .collect()
}

struct Trial {
    violation: f64,
    detail: String,
    instance: Option<InstanceDump>,
}

fn drive(
    name: &'static str,
    seed: u64,
    first: u32,
    trials: u32,
    mut body: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> Result<Trial>,
) -> Result<CheckOutcome> {
    let mut failures = 0;
    let mut max_violation = f64::NEG_INFINITY;
    let mut first_failure = None;
    for trial in first..first.saturating_add(trials) {
        let mut rng = derived_rng(seed, name, trial as u64);
        let t = body(&mut rng)?;
        max_violation = max_violation.max(t.violation);
        if t.violation > 0.0 {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(FailureRecord {
                    trial,
                    detail: t.detail,
                    instance: t.instance,
                });
            }
        }
    }
    Ok(CheckOutcome {
        name,
        trials,
        failures,
        max_violation,
        first_failure,
    })
}

fn plain(violation: f64, detail: String) -> Trial {
    Trial {
        violation,
        detail,
        instance: None,
    }
}

const TOL: f64 = 1e-9;

use rand::RngExt;

/// Eigenvalue magnitudes never beat the Frobenius norm, with equality for
/// Hermitian (normal) operators.
fn check_schur(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("schur-inequality", seed, first, trials, |rng| {
        let dim = rng.random_range(3..=6);
        let (a, eigs) = random_known_spectrum_matrix(rng, dim);
        let lhs: f64 = eigs.iter().map(|l| l.norm_sqr()).sum();
        let rhs = a.frobenius_norm().powi(2);
        let v1 = lhs - rhs - TOL;

        let h = random_hermitian(rng, dim);
        let heig = eig_hermitian(&h)?;
        let hl: f64 = heig.eigenvalues.iter().map(|l| l * l).sum();
        let hr = h.matrix().frobenius_norm().powi(2);
        let v2 = (hl - hr).abs() - TOL;

        Ok(plain(
            v1.max(v2),
            format!("general {lhs:.3e} vs {rhs:.3e}; hermitian gap {:.3e}", hl - hr),
        ))
    })
}

/// `tr |A| <= sqrt(rank) * sqrt(tr(A A^dagger))` for normal operators.
fn check_rank_trace_bound(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("rank-trace-bound", seed, first, trials, |rng| {
        let dim = rng.random_range(3..=6);
        let rank = rng.random_range(1..=dim);
        let (op, nonzero) = random_rank_r_hermitian(rng, dim, rank);
        let tn = trace_norm(&op)?;
        let constructed: f64 = nonzero.iter().map(|l| l.abs()).sum();
        let bound = (rank as f64).sqrt() * op.matrix().frobenius_norm();
        let v = (tn - bound - TOL).max((tn - constructed).abs() - TOL);
        Ok(plain(v, format!("tr|A| {tn:.6} bound {bound:.6}")))
    })
}

/// Renyi entropy is nonincreasing in the order.
fn check_renyi_monotonicity(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("renyi-monotonicity", seed, first, trials, |rng| {
        let dim = rng.random_range(2..=5);
        let rho = random_density(rng, dim);
        let menu = [0.0, 0.3, 0.5, 1.0, 1.7, 2.0, 4.0, f64::INFINITY];
        let mut a = menu[rng.random_range(0..menu.len())];
        let mut b = menu[rng.random_range(0..menu.len())];
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let sa = renyi_entropy(&rho, a)?;
        let sb = renyi_entropy(&rho, b)?;
        Ok(plain(
            sb - sa - TOL,
            format!("S_{a}={sa:.6} S_{b}={sb:.6}"),
        ))
    })
}

fn product_density(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    DensityOperator::from_matrix(kron(a.matrix(), b.matrix())?)
}

/// Trace distance is subadditive under tensor products.
fn check_subadditivity(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("distance-subadditivity", seed, first, trials, |rng| {
        let (da, db) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let (rho, sigma) = (random_density(rng, da), random_density(rng, da));
        let (rho2, sigma2) = (random_density(rng, db), random_density(rng, db));
        let lhs = trace_distance(&product_density(&rho, &rho2)?, &product_density(&sigma, &sigma2)?)?;
        let rhs = trace_distance(&rho, &sigma)? + trace_distance(&rho2, &sigma2)?;
        Ok(plain(lhs - rhs - TOL, format!("{lhs:.6} vs {rhs:.6}")))
    })
}

/// Appending the same state on a fresh system changes nothing.
fn check_append_equality(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("distance-append-equality", seed, first, trials, |rng| {
        let (da, db) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let (rho, sigma) = (random_density(rng, da), random_density(rng, da));
        let tau = random_density(rng, db);
        let lhs = trace_distance(&product_density(&rho, &tau)?, &product_density(&sigma, &tau)?)?;
        let rhs = trace_distance(&rho, &sigma)?;
        Ok(plain((lhs - rhs).abs() - TOL, format!("{lhs:.9} vs {rhs:.9}")))
    })
}

/// Quantum operations cannot increase the trace distance; checked for
/// unitaries (equality), partial traces, and pinchings.
fn check_channel_monotonicity(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("channel-monotonicity", seed, first, trials, |rng| {
        let rho = random_density(rng, 4);
        let sigma = random_density(rng, 4);
        let d = trace_distance(&rho, &sigma)?;

        let u = random_unitary(rng, 4);
        let du = trace_distance(&conjugate_by_unitary(&rho, &u)?, &conjugate_by_unitary(&sigma, &u)?)?;
        let v_unitary = (du - d).abs() - TOL;

        let keep_first = rng.random::<bool>();
        let dpt = trace_distance(
            &partial_trace_density(&rho, 2, 2, keep_first)?,
            &partial_trace_density(&sigma, 2, 2, keep_first)?,
        )?;
        let v_pt = dpt - d - TOL;

        let mut blocks = vec![vec![0usize], vec![1usize]];
        for i in 2..4 {
            blocks[rng.random_range(0..2usize)].push(i);
        }
        let dp = trace_distance(&pinch(&rho, &blocks)?, &pinch(&sigma, &blocks)?)?;
        let v_pinch = dp - d - TOL;

        Ok(plain(
            v_unitary.max(v_pt).max(v_pinch),
            format!("d={d:.6} unitary={du:.6} ptrace={dpt:.6} pinch={dp:.6}"),
        ))
    })
}

/// Measurement outcome distributions are no farther apart than the states.
fn check_measurement_bound(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("measurement-bound", seed, first, trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let sigma = random_density(rng, dim);
        let u = random_unitary(rng, dim);
        let p = measure_in_basis(&rho, &u)?;
        let q = measure_in_basis(&sigma, &u)?;
        let lhs = variational_distance(&p, &q)?;
        let rhs = trace_distance(&rho, &sigma)?;
        Ok(plain(lhs - rhs - TOL, format!("{lhs:.6} vs {rhs:.6}")))
    })
}

/// A maximal coupling exists: correct marginals, mismatch probability equal
/// to the variational distance.
fn check_coupling(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("coupling", seed, first, trials, |rng| {
        let len = rng.random_range(2..=8);
        let p = random_distribution(rng, len);
        let q = if rng.random_range(0..4u8) == 0 {
            p.clone()
        } else {
            random_distribution(rng, len)
        };
        let c = maximal_coupling(&p, &q)?;
        let d = variational_distance(&p, &q)?;
        let (left, right) = c.marginals();
        let marg_err = left
            .iter()
            .zip(p.probs())
            .chain(right.iter().zip(q.probs()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let v = ((c.mismatch_probability() - d).abs() - 1e-12).max(marg_err - 1e-12);
        Ok(plain(v, format!("mismatch {:.9} vs d {d:.9}", c.mismatch_probability())))
    })
}

/// Distance between states carrying the same classical register decomposes
/// into the expected conditional distance.
fn check_distance_expectation(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("distance-expectation", seed, first, trials, |rng| {
        let len = rng.random_range(2..=4);
        let dim = rng.random_range(2..=3);
        let px = random_distribution(rng, len);
        let rhos: Vec<DensityOperator> = (0..len).map(|_| random_density(rng, dim)).collect();
        let sigmas: Vec<DensityOperator> = (0..len).map(|_| random_density(rng, dim)).collect();

        let assemble = |conds: &[DensityOperator]| {
            let mut m = ComplexMatrix::zeros(len * dim, len * dim);
            for (x, c) in conds.iter().enumerate() {
                m.set_block(x * dim, &c.matrix().scale(Complex64::new(px.probs()[x], 0.0)));
            }
            m
        };
        let lhs = trace_distance_raw(&assemble(&rhos), &assemble(&sigmas))?;
        let rhs: f64 = (0..len)
            .map(|x| Ok(px.probs()[x] * trace_distance(&rhos[x], &sigmas[x])?))
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum();
        Ok(plain((lhs - rhs).abs() - TOL, format!("{lhs:.9} vs {rhs:.9}")))
    })
}

/// Trace distance against the rank-weighted Hilbert-Schmidt bound.
fn check_rank_distance_bound(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("rank-distance-bound", seed, first, trials, |rng| {
        let dim = rng.random_range(2..=5);
        let rho = random_density(rng, dim);
        let sigma = random_density(rng, dim);
        let delta = trace_distance(&rho, &sigma)?;
        let diff = rho.operator().sub(sigma.operator())?;
        let rank = rank_from_eigenvalues(&eig_hermitian(&diff)?.eigenvalues);
        let hs = crate::metrics::hs_square_distance(&rho, &sigma)?;
        let bound = 0.5 * ((rank as f64) * hs).sqrt();
        Ok(plain(delta - bound - TOL, format!("{delta:.6} vs {bound:.6}")))
    })
}

/// Non-uniformity against its Hilbert-Schmidt relaxation.
fn check_nonuniformity_hs_bound(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("nonuniformity-hs-bound", seed, first, trials, |rng| {
        let len = 1usize << rng.random_range(1..=2u32);
        let dim = rng.random_range(1..=3);
        let e = random_ensemble(rng, len, dim);
        let d = nonuniformity(&e)?;
        let big_d = hs_nonuniformity(&e)?;
        let avg = average_density(&e)?;
        let s0 = renyi_entropy(&avg, 0.0)?;
        let bound = 0.5 * (s0 / 2.0).exp2() * ((len as f64) * big_d).sqrt();
        Ok(plain(d - bound - TOL, format!("{d:.6} vs {bound:.6}")))
    })
}

/// The closed form of the Hilbert-Schmidt non-uniformity.
fn check_hs_closed_form(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("hs-closed-form", seed, first, trials, |rng| {
        let len = rng.random_range(2..=4);
        let dim = rng.random_range(1..=3);
        let e = random_ensemble(rng, len, dim);
        let direct = hs_nonuniformity(&e)?;
        let closed = hs_nonuniformity_closed_form(&e)?;
        Ok(plain(
            (direct - closed).abs() - TOL,
            format!("{direct:.12} vs {closed:.12}"),
        ))
    })
}

/// Expected Hilbert-Schmidt non-uniformity of the hashed key against the
/// collision-entropy bound, by exact seed enumeration. The per-seed value is
/// computed both from the block closed form and from the assembled
/// pushforward state, which must agree.
fn check_collision_bound(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("collision-bound", seed, first, trials, |rng| {
        let n = rng.random_range(2..=3u32);
        let s = rng.random_range(1..=2u32.min(n));
        let kind = match rng.random_range(0..3u8) {
            0 => HashKind::Toeplitz,
            1 => HashKind::Gf2nMult,
            _ => HashKind::AllFunctions,
        };
        let fam = if kind == HashKind::AllFunctions && n == 3 {
            HashFamily::new(kind, n, 1)?
        } else {
            HashFamily::new(kind, n, s)?
        };
        let dim = rng.random_range(1..=2);
        let e = random_ensemble(rng, 1 << n, dim);
        let inst = PaInstance::new(e, fam, 0.1)?;
        let seeds = inst.family().seed_count(24)?;

        let mut acc = 0.0;
        let mut cross_check_violation: f64 = -1.0;
        for sd in 0..seeds {
            let push = pushforward_ensemble(&inst, sd)?;
            let closed = hs_nonuniformity_closed_form(&push)?;
            if sd < 4 {
                let direct = hs_nonuniformity(&push)?;
                cross_check_violation =
                    cross_check_violation.max((direct - closed).abs() - TOL);
            }
            acc += closed;
        }
        let lhs = acc / seeds as f64;
        let rhs = (-cq_collision_entropy(inst.source())).exp2();
        Ok(plain(
            (lhs - rhs - TOL).max(cross_check_violation),
            format!("E[D] {lhs:.3e} vs 2^-S2 {rhs:.3e}"),
        ))
    })
}

/// The per-seed decomposition: averaging the key distance over seeds equals
/// the trace distance computed on the monolithic key-adversary-seed state.
fn check_seed_decomposition(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("seed-decomposition", seed, first, trials, |rng| {
        let n = 2u32;
        let s = rng.random_range(1..=2u32);
        let kind = if rng.random::<bool>() {
            HashKind::Toeplitz
        } else {
            HashKind::Gf2nMult
        };
        let dim = rng.random_range(1..=2);
        let e = random_ensemble(rng, 1 << n, dim);
        let inst = PaInstance::new(e, HashFamily::new(kind, n, s)?, 0.1)?;

        let per_seed = exact_key_distance(&inst)?.value;
        let monolithic = tripartite_distance(&inst)?;
        Ok(plain(
            (per_seed - monolithic).abs() - 1e-8,
            format!("per-seed {per_seed:.10} vs monolithic {monolithic:.10}"),
        ))
    })
}

/// Builds the full key (x) adversary (x) seed state and its ideal
/// counterpart and returns their trace distance.
fn tripartite_distance(inst: &PaInstance) -> Result<f64> {
    let seeds = inst.family().seed_count(16)? as usize;
    let blocks = 1usize << inst.output_bits();
    let d = inst.source().conditional_dim();
    let total = blocks * d * seeds;
    let mut real = ComplexMatrix::zeros(total, total);
    let mut ideal = ComplexMatrix::zeros(total, total);
    let avg = average_density(inst.source())?;
    let seed_weight = 1.0 / seeds as f64;
    for f in 0..seeds {
        let push = pushforward_ensemble(inst, f as u64)?;
        for t in 0..blocks {
            let w = push.probs()[t] * seed_weight;
            let block = push.conditional(t).matrix();
            let ideal_w = seed_weight / blocks as f64;
            for a in 0..d {
                for b in 0..d {
                    let row = (t * d + a) * seeds + f;
                    let col = (t * d + b) * seeds + f;
                    real[(row, col)] = block[(a, b)] * w;
                    ideal[(row, col)] = avg.matrix()[(a, b)] * ideal_w;
                }
            }
        }
    }
    trace_distance_raw(&real, &ideal)
}

/// Hashing cannot increase the conditional entropy of the source.
fn check_rate_data_processing(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("rate-data-processing", seed, first, trials, |rng| {
        let n = rng.random_range(2..=3u32);
        let s = rng.random_range(1..=2u32);
        let kind = if rng.random::<bool>() {
            HashKind::Toeplitz
        } else {
            HashKind::Gf2nMult
        };
        let dim = rng.random_range(1..=2);
        let e = random_ensemble(rng, 1 << n, dim);
        let inst = PaInstance::new(e, HashFamily::new(kind, n, s)?, 0.1)?;
        let seeds = inst.family().seed_count(24)?;

        // H(F(Z) | adversary, seed) = E_f[S(cq_f)] - S(avg)
        let mut joint = 0.0;
        for f in 0..seeds {
            let push = pushforward_ensemble(&inst, f)?;
            joint += renyi_from_spectrum(&cq_spectrum(&push), 1.0)?;
        }
        let avg = average_density(inst.source())?;
        let lhs = joint / seeds as f64 - renyi_entropy(&avg, 1.0)?;
        let rhs = asymptotic_rate(inst.source())?;
        Ok(plain(lhs - rhs - TOL, format!("{lhs:.9} vs {rhs:.9}")))
    })
}

/// Exhaustive grid oracle for the smoothed log-rank of a diagonal state:
/// scan every support subset and take the smallest one reachable with a
/// grid-valued diagonal state inside the trace-distance ball.
pub fn oracle_smooth_rank_grid(probs: &[f64], epsilon: f64, grid: f64) -> f64 {
    let dim = probs.len();
    let units = (1.0 / grid).round() as i64;
    let mut best = dim;
    for mask in 0..(1u32 << dim) {
        let size = mask.count_ones() as usize;
        if size == 0 || size >= best {
            continue;
        }
        let mut out = 0.0;
        let mut inside: Vec<f64> = Vec::new();
        for (i, p) in probs.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                inside.push(*p);
            } else {
                out += p;
            }
        }
        // exact minimum grid L1 distance on the support: floor everything,
        // then raise one unit at a time where it is cheapest
        let mut base_units: i64 = 0;
        let mut fractions: Vec<f64> = Vec::with_capacity(inside.len());
        for p in &inside {
            let b = (p / grid).floor();
            base_units += b as i64;
            fractions.push(p - b * grid);
        }
        let mut l1: f64 = fractions.iter().sum();
        let mut deficit = units - base_units;
        fractions.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for r in &fractions {
            if deficit == 0 {
                break;
            }
            l1 += grid - 2.0 * r;
            deficit -= 1;
        }
        if deficit > 0 {
            l1 += grid * deficit as f64;
        }
        let delta = 0.5 * (out + l1.max(0.0));
        if delta <= epsilon + 1e-12 {
            best = size;
        }
    }
    (best as f64).log2()
}

/// Exhaustive grid oracle for the smoothed min-entropy of a diagonal state:
/// scan grid-valued caps from below and return the first that is feasible.
pub fn oracle_smooth_cap_grid(probs: &[f64], epsilon: f64, grid: f64) -> f64 {
    let dim = probs.len() as f64;
    let units = (1.0 / grid).round() as i64;
    for k in 1..=units {
        let c = k as f64 * grid;
        let clipped: f64 = probs.iter().map(|p| (p - c).max(0.0)).sum();
        if c * dim >= 1.0 - 1e-12 && clipped <= epsilon + 1e-12 {
            return -c.log2();
        }
    }
    0.0
}

/// The diagonal smoothing heuristics against the exhaustive grid oracles,
/// within one grid step of budget.
fn check_smoothing_oracle(seed: u64, first: u32, trials: u32, _inject: bool) -> Result<CheckOutcome> {
    drive("smoothing-oracle", seed, first, trials, |rng| {
        let dim = rng.random_range(2..=6);
        let rho = random_diagonal_density(rng, dim);
        let eps = 0.05;
        let grid = 1e-3;

        let s0 = smooth_renyi_0(&rho, eps)?.value;
        let lo = oracle_smooth_rank_grid(rho.eigenvalues(), eps + grid, grid);
        let hi = oracle_smooth_rank_grid(rho.eigenvalues(), eps - grid, grid);
        let v0 = (lo - s0 - 1e-9).max(s0 - hi - 1e-9);

        let sinf = smooth_renyi_inf(&rho, eps)?.value;
        let c_heur = (-sinf).exp2();
        let c_oracle = (-oracle_smooth_cap_grid(rho.eigenvalues(), eps, grid)).exp2();
        let vinf = (c_heur - c_oracle).abs() - grid - 1e-9;

        Ok(plain(
            v0.max(vinf),
            format!("S0 {s0:.4} in [{lo:.4},{hi:.4}]; cap {c_heur:.6} vs {c_oracle:.6}"),
        ))
    })
}

/// The hashed key's exact non-uniformity never exceeds the
/// collision-entropy bound. With `inject_failure` the bound is corrupted to
/// prove the harness notices and dumps the instance.
fn check_hash_bound(seed: u64, first: u32, trials: u32, inject: bool) -> Result<CheckOutcome> {
    drive("hash-bound", seed, first, trials, |rng| {
        let inst = random_pa_instance(rng, 0.1);
        let exact = exact_key_distance(&inst)?.value;
        let mut bound = collision_entropy_bound(&inst)?;
        if inject {
            bound = -1.0; // impossible bound; every trial must now fail
        }
        let violation = exact - bound - TOL;
        Ok(Trial {
            violation,
            detail: format!("exact {exact:.9} vs bound {bound:.9}"),
            instance: if violation > 0.0 {
                Some(dump_instance(&inst))
            } else {
                None
            },
        })
    })
}
