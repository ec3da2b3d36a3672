//! Scenario files: the JSON description of an experiment, its validation,
//! and the source generators.

use std::path::Path;

use serde::{Deserialize, Serialize};

use qpa_core::hashing::{HashFamily, HashKind};
use qpa_core::pa::PaInstance;
use qpa_core::states::{ClassicalDistribution, CqEnsemble, DensityOperator};
use qpa_core::{Complex64, ComplexMatrix};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level scenario file. The `pa` section drives `bound`, `exact`,
/// `sweep` and `rate`; the `aep` section drives `aep`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pa: Option<PaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aep: Option<AepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaSection {
    pub n: u32,
    pub s: u32,
    pub epsilon: f64,
    pub family: HashKind,
    pub source: SourceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// Either a named generator or explicit matrices; exactly one must be set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitSource>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Number of leading source bits the classical adversary observes
    /// (bsc-correlated-classical only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_bits: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Uniform source, trivial (one-dimensional) adversary.
    Uniform,
    /// Adversary observes the leading bits of Z through binary symmetric
    /// channels with flip probability `p`.
    BscCorrelatedClassical,
    /// Adversary holds an exact quantum copy of Z.
    PerfectCopy,
    /// Adversary holds a copy mixed with the maximally mixed state:
    /// `(1-p) |z><z| + p I/|Z|`.
    DepolarizedCopy,
}

/// Dense source description: probabilities and per-value conditional
/// matrices of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSource {
    pub probs: Vec<f64>,
    pub conditionals: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AepSection {
    /// Diagonal of the single-copy state; mutually exclusive with `rho`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_diag: Option<Vec<f64>>,
    /// Dense single-copy state as `[re, im]` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<[f64; 2]>>>,
    pub epsilon: f64,
    pub ladder: Vec<u32>,
}

pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!(
            "parse error in {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::usage(format!(
            "invalid field `schema_version`: expected {SCHEMA_VERSION}, got {}",
            file.schema_version
        )));
    }
    if !file
        .id
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        || file.id.is_empty()
    {
        return Err(CliError::usage(format!(
            "invalid field `id`: `{}` (use [A-Za-z0-9_-])",
            file.id
        )));
    }
    Ok(file)
}

pub fn require_pa(file: &ScenarioFile) -> Result<&PaSection, CliError> {
    file.pa
        .as_ref()
        .ok_or_else(|| CliError::usage("scenario has no `pa` section".to_string()))
}

pub fn require_aep(file: &ScenarioFile) -> Result<&AepSection, CliError> {
    file.aep
        .as_ref()
        .ok_or_else(|| CliError::usage("scenario has no `aep` section".to_string()))
}

fn validation(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("invalid field `{field}`: {message}"))
}

/// Builds the source ensemble of a pa section at the given parameter point.
pub fn build_source(pa: &PaSection, n: u32, p_point: Option<f64>) -> Result<CqEnsemble, CliError> {
    let m = 1usize
        .checked_shl(n)
        .filter(|m| *m <= 4096)
        .ok_or_else(|| validation("n", format!("{n} is too large")))?;
    match (&pa.source.generator, &pa.source.explicit) {
        (Some(g), None) => build_generated(g, n, m, p_point),
        (None, Some(e)) => build_explicit(e, m),
        _ => Err(validation(
            "source",
            "exactly one of `generator` and `explicit` must be set",
        )),
    }
}

fn build_generated(
    g: &GeneratorSpec,
    n: u32,
    m: usize,
    p_point: Option<f64>,
) -> Result<CqEnsemble, CliError> {
    let uniform = ClassicalDistribution::uniform(m);
    let p = p_point.or(g.p);
    let need_p = |kind: &str| {
        p.filter(|p| (0.0..=1.0).contains(p))
            .ok_or_else(|| validation("p", format!("generator `{kind}` needs p in [0, 1]")))
    };
    match g.kind {
        GeneratorKind::Uniform => Ok(CqEnsemble::with_trivial_adversary(&uniform)),
        GeneratorKind::PerfectCopy => {
            let conds = (0..m).map(|z| DensityOperator::basis_projector(m, z)).collect();
            CqEnsemble::new(uniform.probs().to_vec(), conds).map_err(CliError::from)
        }
        GeneratorKind::DepolarizedCopy => {
            let p = need_p("depolarized-copy")?;
            let conds: Result<Vec<DensityOperator>, _> = (0..m)
                .map(|z| {
                    let mut diag = vec![p / m as f64; m];
                    diag[z] += 1.0 - p;
                    DensityOperator::from_diagonal(&diag)
                })
                .collect();
            CqEnsemble::new(uniform.probs().to_vec(), conds?).map_err(CliError::from)
        }
        GeneratorKind::BscCorrelatedClassical => {
            let p = need_p("bsc-correlated-classical")?;
            let k = g.observed_bits.unwrap_or_else(|| n.min(2));
            if k == 0 || k > n || k > 10 {
                return Err(validation(
                    "observed_bits",
                    format!("{k} outside 1..={}", n.min(10)),
                ));
            }
            let wdim = 1usize << k;
            let conds: Result<Vec<DensityOperator>, _> = (0..m)
                .map(|z| {
                    let diag: Vec<f64> = (0..wdim)
                        .map(|w| {
                            let flips = ((z & (wdim - 1)) ^ w).count_ones();
                            p.powi(flips as i32) * (1.0 - p).powi((k - flips) as i32)
                        })
                        .collect();
                    DensityOperator::from_diagonal(&diag)
                })
                .collect();
            CqEnsemble::new(uniform.probs().to_vec(), conds?).map_err(CliError::from)
        }
    }
}

fn build_explicit(e: &ExplicitSource, m: usize) -> Result<CqEnsemble, CliError> {
    if e.probs.len() != m {
        return Err(validation(
            "probs",
            format!("{} entries for a {m}-value source", e.probs.len()),
        ));
    }
    if e.conditionals.len() != m {
        return Err(validation(
            "conditionals",
            format!("{} matrices for a {m}-value source", e.conditionals.len()),
        ));
    }
    let conds: Result<Vec<DensityOperator>, CliError> = e
        .conditionals
        .iter()
        .map(|rows| {
            let dim = rows.len();
            let mut mat = ComplexMatrix::zeros(dim.max(1), dim.max(1));
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(validation("conditionals", "matrix is not square"));
                }
                for (j, entry) in row.iter().enumerate() {
                    mat[(i, j)] = Complex64::new(entry[0], entry[1]);
                }
            }
            DensityOperator::from_matrix(mat).map_err(CliError::from)
        })
        .collect();
    CqEnsemble::new(e.probs.clone(), conds?).map_err(CliError::from)
}

/// Builds the instance at one sweep point.
pub fn build_instance(
    pa: &PaSection,
    s: u32,
    epsilon: f64,
    p_point: Option<f64>,
) -> Result<PaInstance, CliError> {
    let source = build_source(pa, pa.n, p_point)?;
    let family = HashFamily::new(pa.family, pa.n, s)?;
    Ok(PaInstance::new(source, family, epsilon)?)
}

/// The sweep grid in deterministic order; `None` entries mean "the base
/// point only".
pub fn sweep_points(pa: &PaSection) -> Vec<(u32, f64, Option<f64>)> {
    let sweep = pa.sweep.clone().unwrap_or_default();
    let ss = sweep.s.unwrap_or_else(|| vec![pa.s]);
    let es = sweep.epsilon.unwrap_or_else(|| vec![pa.epsilon]);
    let ps: Vec<Option<f64>> = match sweep.p {
        Some(list) => list.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut out = Vec::new();
    for &s in &ss {
        for &e in &es {
            for &p in &ps {
                out.push((s, e, p));
            }
        }
    }
    out
}

/// A runnable scenario wrapping an explicit instance dump; used when the
/// verification harness needs to persist a failing experiment.
pub fn scenario_from_dump(
    id: &str,
    rng_seed: u64,
    dump: &qpa_core::verify::InstanceDump,
) -> ScenarioFile {
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        id: id.to_string(),
        rng_seed: Some(rng_seed),
        pa: Some(PaSection {
            n: dump.input_bits,
            s: dump.output_bits,
            epsilon: dump.epsilon,
            family: dump.family,
            source: SourceSpec {
                generator: None,
                explicit: Some(ExplicitSource {
                    probs: dump.probs.clone(),
                    conditionals: dump.conditionals.clone(),
                }),
            },
            sweep: None,
        }),
        aep: None,
    }
}

/// Single-copy state of the aep section.
pub fn build_aep_state(aep: &AepSection) -> Result<DensityOperator, CliError> {
    match (&aep.rho_diag, &aep.rho) {
        (Some(d), None) => DensityOperator::from_diagonal(d).map_err(CliError::from),
        (None, Some(rows)) => {
            let dim = rows.len();
            let mut mat = ComplexMatrix::zeros(dim, dim);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(validation("rho", "matrix is not square"));
                }
                for (j, entry) in row.iter().enumerate() {
                    mat[(i, j)] = Complex64::new(entry[0], entry[1]);
                }
            }
            DensityOperator::from_matrix(mat).map_err(CliError::from)
        }
        _ => Err(validation(
            "aep",
            "exactly one of `rho_diag` and `rho` must be set",
        )),
    }
}
