//! Result rows and their CSV / JSON rendering.
//!
//! CSV files start with a `# rng: ...` comment naming the generator
//! algorithm and seed, then a fixed header. All numeric fields print with 12
//! significant digits so identical runs produce identical bytes.

use serde::Serialize;

use qpa_core::pa::SecurityReport;
use qpa_core::random::RNG_ALGORITHM;
use qpa_core::verify::CheckOutcome;

/// One sweep point of a pa scenario with its full report.
#[derive(Debug, Clone, Serialize)]
pub struct PaRow {
    pub id: String,
    pub s: u32,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(flatten)]
    pub report: SecurityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AepRow {
    pub id: String,
    pub n: u32,
    pub epsilon: f64,
    pub s0_rate: f64,
    pub sinf_rate: f64,
    pub von_neumann: f64,
    pub gap0: f64,
    pub gap_inf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub trials: u32,
    pub failures: u32,
    pub max_violation: f64,
    pub passed: bool,
}

impl From<&CheckOutcome> for VerifyRow {
    fn from(o: &CheckOutcome) -> Self {
        VerifyRow {
            check: o.name.to_string(),
            trials: o.trials,
            failures: o.failures,
            max_violation: o.max_violation,
            passed: o.passed(),
        }
    }
}

/// 12 significant digits, locale-free.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_default()
}

fn opt_bool(b: Option<bool>) -> String {
    b.map(|v| v.to_string()).unwrap_or_default()
}

fn rng_comment(seed: u64) -> String {
    format!("# rng: {RNG_ALGORITHM} seed: {seed}\n")
}

pub const PA_HEADER: &str = "id,s,epsilon,p,exact_d,exact_method,worst_seed,mc_mean,mc_std_error,collision_bound,smoothed_bound,key_len,key_len_real,rate,collision_pass,smoothed_pass,key_len_pass,pass";

pub fn pa_rows_csv(rows: &[PaRow], seed: u64) -> String {
    let mut out = rng_comment(seed);
    out.push_str(PA_HEADER);
    out.push('\n');
    for r in rows {
        let rep = &r.report;
        let method = rep
            .exact_method
            .map(|m| {
                serde_json::to_value(m)
                    .expect("method serializes")
                    .as_str()
                    .expect("method is a string")
                    .to_string()
            })
            .unwrap_or_default();
        let line = [
            r.id.clone(),
            r.s.to_string(),
            sig12(r.epsilon),
            opt(r.p),
            opt(rep.exact_d),
            method,
            rep.worst_seed.clone().unwrap_or_default(),
            opt(rep.mc.map(|m| m.mean)),
            opt(rep.mc.map(|m| m.std_error)),
            sig12(rep.collision_bound),
            sig12(rep.smoothed_bound),
            rep.key_length.map(|k| k.bits.to_string()).unwrap_or_default(),
            opt(rep.key_length.map(|k| k.real_value)),
            sig12(rep.rate),
            opt_bool(rep.flags.collision_bound_ok),
            opt_bool(rep.flags.smoothed_bound_ok),
            opt_bool(rep.flags.key_len_ok),
            rep.flags.pass.to_string(),
        ]
        .join(",");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub const RATE_HEADER: &str = "id,p,rate";

pub fn rate_rows_csv(rows: &[RateRow], seed: u64) -> String {
    let mut out = rng_comment(seed);
    out.push_str(RATE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&[r.id.clone(), opt(r.p), sig12(r.rate)].join(","));
        out.push('\n');
    }
    out
}

pub const AEP_HEADER: &str = "id,n,epsilon,s0_rate,sinf_rate,von_neumann,gap0,gap_inf";

pub fn aep_rows_csv(rows: &[AepRow], seed: u64) -> String {
    let mut out = rng_comment(seed);
    out.push_str(AEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(
            &[
                r.id.clone(),
                r.n.to_string(),
                sig12(r.epsilon),
                sig12(r.s0_rate),
                sig12(r.sinf_rate),
                sig12(r.von_neumann),
                sig12(r.gap0),
                sig12(r.gap_inf),
            ]
            .join(","),
        );
        out.push('\n');
    }
    out
}

pub const VERIFY_HEADER: &str = "check,trials,failures,max_violation,passed";

pub fn verify_rows_csv(rows: &[VerifyRow], seed: u64) -> String {
    let mut out = rng_comment(seed);
    out.push_str(VERIFY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(
            &[
                r.check.clone(),
                r.trials.to_string(),
                r.failures.to_string(),
                sig12(r.max_violation),
                r.passed.to_string(),
            ]
            .join(","),
        );
        out.push('\n');
    }
    out
}

/// JSON document wrapping rows of any serializable type together with the
/// generator stamp.
pub fn rows_json<T: Serialize>(rows: &[T], seed: u64) -> String {
    #[derive(Serialize)]
    struct Doc<'a, T: Serialize> {
        schema_version: u32,
        rng: Rng,
        rows: &'a [T],
    }
    #[derive(Serialize)]
    struct Rng {
        algorithm: &'static str,
        seed: u64,
    }
    let doc = Doc {
        schema_version: crate::scenario::SCHEMA_VERSION,
        rng: Rng {
            algorithm: RNG_ALGORITHM,
            seed,
        },
        rows,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("rows serialize");
    text.push('\n');
    text
}
