//! Renyi and smooth Renyi entropies of density operators, plus compressed
//! spectra of i.i.d. product states for convergence studies.
//!
//! Spectra are stored in log2 space. Product states of a qubit at n = 1024
//! have eigenvalues far below the smallest positive f64 and multiplicities
//! far above the largest, while every derived quantity of interest (masses,
//! entropies in bits) stays in a sane range; keeping `log2(value)` and
//! `log2(count)` per level makes all of the arithmetic exact enough at any
//! scale.

use crate::error::{Error, Result};
use crate::linalg::RANK_TOL;
use crate::states::DensityOperator;

/// Cap on the number of distinct spectral levels of a product state.
pub const PRODUCT_LEVEL_CAP: u64 = 10_000_000;
/// Largest supported tensor power.
pub const PRODUCT_N_CAP: u32 = 4096;
/// Largest single-copy dimension for product spectra.
pub const PRODUCT_DIM_CAP: usize = 4;

/// One spectral level: an eigenvalue with a multiplicity, both in log2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumLevel {
    pub log2_value: f64,
    pub log2_count: f64,
}

impl SpectrumLevel {
    pub fn value(&self) -> f64 {
        self.log2_value.exp2()
    }

    pub fn count(&self) -> f64 {
        self.log2_count.exp2()
    }

    /// Total probability mass carried by this level.
    pub fn mass(&self) -> f64 {
        (self.log2_value + self.log2_count).exp2()
    }
}

/// Spectrum of a positive unit-trace operator, levels sorted by descending
/// eigenvalue. `log2_dim` is the ambient dimension including zero
/// eigenvalues, which carry no level.
#[derive(Debug, Clone)]
pub struct Spectrum {
    levels: Vec<SpectrumLevel>,
    log2_dim: f64,
    /// log2 threshold under which levels are treated as numerical rank dust;
    /// `None` for exactly constructed spectra.
    rank_cut: Option<f64>,
}

impl Spectrum {
    /// Spectrum of a numerically diagonalized operator. Non-positive
    /// eigenvalues (PSD dust) carry no level; values below the relative rank
    /// threshold are kept but excluded from rank counting.
    pub fn from_eigenvalues(eigenvalues: &[f64]) -> Spectrum {
        let vmax = eigenvalues.iter().cloned().fold(0.0, f64::max);
        let mut levels: Vec<SpectrumLevel> = eigenvalues
            .iter()
            .filter(|v| **v > 0.0)
            .map(|v| SpectrumLevel {
                log2_value: v.log2(),
                log2_count: 0.0,
            })
            .collect();
        levels.sort_by(|a, b| b.log2_value.partial_cmp(&a.log2_value).unwrap());
        let rank_cut = if vmax > 0.0 {
            Some((RANK_TOL * vmax).log2())
        } else {
            None
        };
        Spectrum {
            levels,
            log2_dim: (eigenvalues.len() as f64).log2(),
            rank_cut,
        }
    }

    pub fn of(rho: &DensityOperator) -> Spectrum {
        Self::from_eigenvalues(rho.eigenvalues())
    }

    pub fn levels(&self) -> &[SpectrumLevel] {
        &self.levels
    }

    pub fn log2_dim(&self) -> f64 {
        self.log2_dim
    }

    pub fn total_mass(&self) -> f64 {
        self.levels.iter().map(|l| l.mass()).sum()
    }

    /// Largest eigenvalue in log2.
    pub fn log2_max_value(&self) -> f64 {
        self.levels
            .first()
            .map(|l| l.log2_value)
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn counted(&self, level: &SpectrumLevel) -> bool {
        match self.rank_cut {
            Some(cut) => level.log2_value > cut,
            None => true,
        }
    }

    /// log2 of the number of counted eigenvalue copies.
    pub fn log2_rank(&self) -> f64 {
        log2_sum(
            self.levels
                .iter()
                .filter(|l| self.counted(l))
                .map(|l| l.log2_count),
        )
    }
}

/// log2(2^a + 2^b), robust at any scale.
pub(crate) fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

/// log2(2^a - 2^b) for a >= b.
pub(crate) fn log2_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    debug_assert!(a >= b);
    let d = (b - a).exp2();
    if d >= 1.0 {
        return f64::NEG_INFINITY;
    }
    a + (-d).ln_1p() / std::f64::consts::LN_2
}

pub(crate) fn log2_sum(items: impl Iterator<Item = f64>) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    for x in items {
        acc = log2_add(acc, x);
    }
    acc
}

/// Renyi entropy of order `alpha` in bits, computed from a spectrum.
///
/// Order 0 is log-rank, order 1 the von Neumann entropy, `f64::INFINITY` the
/// min-entropy `-log2(lambda_max)`.
pub fn renyi_from_spectrum(spec: &Spectrum, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidAlpha { alpha });
    }
    let value = if alpha == 0.0 {
        spec.log2_rank()
    } else if alpha == 1.0 {
        -spec
            .levels
            .iter()
            .map(|l| l.mass() * l.log2_value)
            .sum::<f64>()
    } else if alpha.is_infinite() {
        -spec.log2_max_value()
    } else {
        // (1/(1-alpha)) log2 sum_i count_i value_i^alpha
        let log2_tr = log2_sum(
            spec.levels
                .iter()
                .map(|l| l.log2_count + alpha * l.log2_value),
        );
        log2_tr / (1.0 - alpha)
    };
    Ok(value.clamp(0.0, spec.log2_dim.max(0.0)))
}

/// Renyi entropy of order `alpha` of a density operator, in bits.
pub fn renyi_entropy(rho: &DensityOperator, alpha: f64) -> Result<f64> {
    renyi_from_spectrum(&Spectrum::of(rho), alpha)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    renyi_entropy(rho, 1.0).expect("alpha = 1 is valid")
}

/// Checks the order-monotonicity `alpha <= beta  =>  S_alpha >= S_beta`
/// within a 1e-9 slack.
pub fn monotonicity_check(rho: &DensityOperator, alpha: f64, beta: f64) -> Result<bool> {
    if !(0.0..).contains(&alpha) || beta < alpha {
        return Err(Error::InvalidAlpha { alpha: beta });
    }
    Ok(renyi_entropy(rho, alpha)? >= renyi_entropy(rho, beta)? - 1e-9)
}

/// Result of an entropy smoothing: the optimized value, the spectrum of the
/// smoothed operator, and the trace distance actually spent.
#[derive(Debug, Clone)]
pub struct SmoothingResult {
    pub value: f64,
    pub witness: Spectrum,
    pub achieved_distance: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidEpsilon { epsilon });
    }
    Ok(())
}

/// Smooth Renyi entropy of order 0: the smallest log-rank within trace
/// distance `epsilon`.
///
/// Minimizer over operators diagonal in the eigenbasis: drop the
/// smallest-eigenvalue copies whose total mass fits in `epsilon` and park
/// the removed mass on one copy of the largest eigenvalue, which keeps the
/// trace at 1 and the trace distance equal to the removed mass.
pub fn smooth_renyi_0_spectrum(spec: &Spectrum, epsilon: f64) -> Result<SmoothingResult> {
    check_epsilon(epsilon)?;
    let levels = spec.levels();
    let mut budget = epsilon;
    let mut removed_mass = 0.0;
    // Walk levels from the smallest eigenvalue upward; `kept` collects the
    // surviving levels in descending order.
    let mut kept: Vec<SpectrumLevel> = Vec::with_capacity(levels.len());
    let mut boundary: Option<SpectrumLevel> = None;
    let mut stop = levels.len();
    for i in (0..levels.len()).rev() {
        let level = levels[i];
        let mass = level.mass();
        if mass <= budget {
            budget -= mass;
            removed_mass += mass;
            continue;
        }
        if budget > 0.0 {
            let lv = level.log2_value;
            let lr = budget.log2() - lv; // log2 of removable copy count
            if lr >= 52.0 {
                // astronomically many copies go; spend the whole budget and
                // derive the surviving count from the surviving mass
                boundary = Some(SpectrumLevel {
                    log2_value: lv,
                    log2_count: (mass - budget).log2() - lv,
                });
                removed_mass += budget;
            } else {
                let copies = lr.exp2().floor();
                if copies >= 1.0 {
                    boundary = Some(SpectrumLevel {
                        log2_value: lv,
                        log2_count: log2_sub(level.log2_count, copies.log2()),
                    });
                    removed_mass += copies * lv.exp2();
                } else {
                    boundary = Some(level);
                }
            }
        } else {
            boundary = Some(level);
        }
        stop = i;
        break;
    }
    kept.extend_from_slice(&levels[..stop]);
    if let Some(b) = boundary {
        if b.log2_count > f64::NEG_INFINITY {
            kept.push(b);
        }
    }

    // Rank of the smoothed operator (dust below the numeric rank threshold
    // stays excluded, exactly as in the unsmoothed order-0 entropy).
    let value = log2_sum(
        kept.iter()
            .filter(|l| spec.counted(l))
            .map(|l| l.log2_count),
    )
    .max(0.0);

    // Witness: add the removed mass onto a single copy of the largest kept
    // eigenvalue.
    let mut witness_levels: Vec<SpectrumLevel> = Vec::with_capacity(kept.len() + 1);
    if removed_mass > 0.0 && !kept.is_empty() {
        let top = kept[0];
        witness_levels.push(SpectrumLevel {
            log2_value: log2_add(top.log2_value, removed_mass.log2()),
            log2_count: 0.0,
        });
        let rest = log2_sub(top.log2_count, 0.0);
        if rest > f64::NEG_INFINITY {
            witness_levels.push(SpectrumLevel {
                log2_value: top.log2_value,
                log2_count: rest,
            });
        }
        witness_levels.extend_from_slice(&kept[1..]);
    } else {
        witness_levels = kept;
    }

    Ok(SmoothingResult {
        value,
        witness: Spectrum {
            levels: witness_levels,
            log2_dim: spec.log2_dim,
            rank_cut: spec.rank_cut,
        },
        achieved_distance: removed_mass,
    })
}

/// Smooth Renyi entropy of order infinity: the largest min-entropy within
/// trace distance `epsilon`.
///
/// Maximizer over operators diagonal in the eigenbasis: cap the spectrum at
/// the smallest level `c` such that the clipped mass fits in `epsilon` and
/// the head room below the cap can absorb it (`c >= 1/dim`). The cap is
/// located by a 60-iteration binary search on `log2(c)`.
pub fn smooth_renyi_inf_spectrum(spec: &Spectrum, epsilon: f64) -> Result<SmoothingResult> {
    check_epsilon(epsilon)?;
    let levels = spec.levels();
    if levels.is_empty() {
        return Err(Error::invalid("spectrum", "no positive eigenvalues"));
    }
    let lvmax = spec.log2_max_value();
    let floor = -spec.log2_dim; // uniform value; caps below this cannot hold the mass

    let clipped = |log2_c: f64| -> f64 {
        levels
            .iter()
            .take_while(|l| l.log2_value > log2_c)
            .map(|l| l.mass() * (1.0 - (log2_c - l.log2_value).exp2()))
            .sum()
    };

    let log2_c = if epsilon == 0.0 || floor >= lvmax {
        lvmax
    } else if clipped(floor) <= epsilon {
        floor
    } else {
        let (mut lo, mut hi) = (floor, lvmax); // lo infeasible, hi feasible
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if clipped(mid) <= epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let spent = clipped(log2_c);
    let witness = redistribute_below_cap(spec, log2_c, spent);
    Ok(SmoothingResult {
        value: (-log2_c).max(0.0),
        witness,
        achieved_distance: spent,
    })
}

/// Builds the capped spectrum: everything above the cap is clipped to it and
/// the clipped mass is poured back under the cap, onto the largest levels
/// first and onto (implicit) zero eigenvalues last.
fn redistribute_below_cap(spec: &Spectrum, log2_c: f64, clipped_mass: f64) -> Spectrum {
    let mut capped_count = f64::NEG_INFINITY;
    let mut below: Vec<SpectrumLevel> = Vec::new();
    for l in spec.levels() {
        if l.log2_value > log2_c {
            capped_count = log2_add(capped_count, l.log2_count);
        } else {
            below.push(*l);
        }
    }
    let mut out: Vec<SpectrumLevel> = Vec::new();
    if capped_count > f64::NEG_INFINITY {
        out.push(SpectrumLevel {
            log2_value: log2_c,
            log2_count: capped_count,
        });
    }
    let mut remaining = clipped_mass;
    for l in below {
        if remaining <= 0.0 {
            out.push(l);
            continue;
        }
        if l.log2_value >= log2_c {
            // levels exactly at the cap take nothing
            out.push(l);
            continue;
        }
        // head room of this level: count * (c - v), in log2
        let gap = log2_c + (-((l.log2_value - log2_c).exp2())).ln_1p() / std::f64::consts::LN_2;
        let headroom_log2 = l.log2_count + gap;
        if headroom_log2 <= remaining.log2() {
            // raise the whole level to the cap
            out.push(SpectrumLevel {
                log2_value: log2_c,
                log2_count: l.log2_count,
            });
            remaining -= headroom_log2.exp2();
        } else {
            // raise every copy by remaining / count
            out.push(SpectrumLevel {
                log2_value: log2_add(l.log2_value, remaining.log2() - l.log2_count),
                log2_count: l.log2_count,
            });
            remaining = 0.0;
        }
    }
    if remaining > 0.0 {
        // pour the rest onto zero eigenvalues at exactly the cap; the count
        // may be fractional, standing for a partially raised last copy
        out.push(SpectrumLevel {
            log2_value: log2_c,
            log2_count: remaining.log2() - log2_c,
        });
    }
    out.sort_by(|a, b| b.log2_value.partial_cmp(&a.log2_value).unwrap());
    // merge exactly equal values (the cap level typically repeats)
    let mut merged: Vec<SpectrumLevel> = Vec::with_capacity(out.len());
    for l in out {
        match merged.last_mut() {
            Some(last) if last.log2_value == l.log2_value => {
                last.log2_count = log2_add(last.log2_count, l.log2_count);
            }
            _ => merged.push(l),
        }
    }
    Spectrum {
        levels: merged,
        log2_dim: spec.log2_dim,
        rank_cut: spec.rank_cut,
    }
}

pub fn smooth_renyi_0(rho: &DensityOperator, epsilon: f64) -> Result<SmoothingResult> {
    smooth_renyi_0_spectrum(&Spectrum::of(rho), epsilon)
}

pub fn smooth_renyi_inf(rho: &DensityOperator, epsilon: f64) -> Result<SmoothingResult> {
    smooth_renyi_inf_spectrum(&Spectrum::of(rho), epsilon)
}

/// Spectrum of the n-fold tensor power of a small state, compressed to one
/// level per multiset of single-copy eigenvalues with its multinomial
/// multiplicity.
pub fn product_spectrum(rho: &DensityOperator, n: u32) -> Result<Spectrum> {
    if rho.dim() > PRODUCT_DIM_CAP {
        return Err(Error::TooLarge {
            what: "single-copy dimension",
            size: rho.dim() as u64,
            cap: PRODUCT_DIM_CAP as u64,
        });
    }
    if n == 0 || n > PRODUCT_N_CAP {
        return Err(Error::TooLarge {
            what: "tensor power",
            size: n as u64,
            cap: PRODUCT_N_CAP as u64,
        });
    }
    let vals: Vec<f64> = rho.eigenvalues().iter().cloned().filter(|v| *v > 0.0).collect();
    let k = vals.len();
    if k == 0 {
        return Err(Error::invalid("spectrum", "no positive eigenvalues"));
    }
    // number of compositions of n into k parts: C(n + k - 1, k - 1)
    let mut terms = 1.0_f64;
    for i in 1..k {
        terms *= (n as f64 + i as f64) / i as f64;
    }
    if terms > PRODUCT_LEVEL_CAP as f64 {
        return Err(Error::TooLarge {
            what: "product spectrum levels",
            size: terms as u64,
            cap: PRODUCT_LEVEL_CAP,
        });
    }

    // prefix sums of log2(i!) for multinomial coefficients
    let mut log2_fact = vec![0.0_f64; n as usize + 1];
    for i in 1..=n as usize {
        log2_fact[i] = log2_fact[i - 1] + (i as f64).log2();
    }
    let log2_vals: Vec<f64> = vals.iter().map(|v| v.log2()).collect();

    let mut levels = Vec::with_capacity(terms as usize);
    let mut counts = vec![0u32; k];
    compose(n, 0, &mut counts, &mut |counts: &[u32]| {
        let mut lv = 0.0;
        let mut lc = log2_fact[n as usize];
        for (i, &c) in counts.iter().enumerate() {
            lv += c as f64 * log2_vals[i];
            lc -= log2_fact[c as usize];
        }
        levels.push(SpectrumLevel {
            log2_value: lv,
            log2_count: lc,
        });
    });

    levels.sort_by(|a, b| b.log2_value.partial_cmp(&a.log2_value).unwrap());
    // merge bitwise-equal values (degenerate spectra collapse hard)
    let mut merged: Vec<SpectrumLevel> = Vec::with_capacity(levels.len());
    for l in levels {
        match merged.last_mut() {
            Some(last) if last.log2_value == l.log2_value => {
                last.log2_count = log2_add(last.log2_count, l.log2_count);
            }
            _ => merged.push(l),
        }
    }
    Ok(Spectrum {
        levels: merged,
        log2_dim: n as f64 * (rho.dim() as f64).log2(),
        rank_cut: None,
    })
}

fn compose(remaining: u32, slot: usize, counts: &mut Vec<u32>, emit: &mut impl FnMut(&[u32])) {
    if slot == counts.len() - 1 {
        counts[slot] = remaining;
        emit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[slot] = c;
        compose(remaining - c, slot + 1, counts, emit);
    }
}

/// Which smooth entropy the AEP study tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothOrder {
    Zero,
    Inf,
}

/// Convergence gap `|S_alpha^eps(rho^(x)n) / n - S(rho)|` of the smooth
/// entropy rate toward the von Neumann entropy.
pub fn aep_gap(rho: &DensityOperator, epsilon: f64, n: u32, order: SmoothOrder) -> Result<f64> {
    let spec = product_spectrum(rho, n)?;
    let smoothed = match order {
        SmoothOrder::Zero => smooth_renyi_0_spectrum(&spec, epsilon)?,
        SmoothOrder::Inf => smooth_renyi_inf_spectrum(&spec, epsilon)?,
    };
    let h = von_neumann_entropy(rho);
    Ok((smoothed.value / n as f64 - h).abs())
}
