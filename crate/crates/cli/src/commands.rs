//! Command implementations. Each returns the process exit code.

use std::path::Path;

use qpa_core::entropy::{
    product_spectrum, smooth_renyi_0_spectrum, smooth_renyi_inf_spectrum, von_neumann_entropy,
};
use qpa_core::pa::{asymptotic_rate, build_report, ReportOptions};
use qpa_core::verify;

use crate::output::{
    aep_rows_csv, pa_rows_csv, rate_rows_csv, rows_json, verify_rows_csv, AepRow, PaRow, RateRow,
    VerifyRow,
};
use crate::scenario::{self, scenario_from_dump};
use crate::{Cli, CliError, Format};

fn report_options(cli: &Cli, seed: u64, compute_exact: bool) -> ReportOptions {
    ReportOptions {
        cap_seed_bits: if compute_exact { cli.cap_bits() } else { 0 },
        mc_samples: 10_000,
        rng_seed: seed,
        compute_exact,
    }
}

fn emit_pa_rows(cli: &Cli, rows: &[PaRow], seed: u64) -> Result<u8, CliError> {
    let text = match cli.format() {
        Format::Csv => pa_rows_csv(rows, seed),
        Format::Json => rows_json(rows, seed),
    };
    cli.emit(&text)?;
    Ok(if rows.iter().all(|r| r.report.flags.pass) {
        0
    } else {
        1
    })
}

fn single_point_rows(
    cli: &Cli,
    path: &Path,
    compute_exact: bool,
) -> Result<(Vec<PaRow>, u64), CliError> {
    let file = scenario::load(path)?;
    let pa = scenario::require_pa(&file)?;
    let seed = cli.seed_for(Some(&file));
    let inst = scenario::build_instance(pa, pa.s, pa.epsilon, None)?;
    let report = build_report(&inst, &report_options(cli, seed, compute_exact))?;
    let rows = vec![PaRow {
        id: file.id.clone(),
        s: pa.s,
        epsilon: pa.epsilon,
        p: pa.source.generator.as_ref().and_then(|g| g.p),
        report,
    }];
    Ok((rows, seed))
}

pub fn bound(cli: &Cli, path: &Path) -> Result<u8, CliError> {
    let (rows, seed) = single_point_rows(cli, path, false)?;
    emit_pa_rows(cli, &rows, seed)
}

pub fn exact(cli: &Cli, path: &Path) -> Result<u8, CliError> {
    let (rows, seed) = single_point_rows(cli, path, true)?;
    emit_pa_rows(cli, &rows, seed)
}

pub fn sweep(cli: &Cli, path: &Path) -> Result<u8, CliError> {
    let file = scenario::load(path)?;
    let pa = scenario::require_pa(&file)?;
    let seed = cli.seed_for(Some(&file));
    let mut rows = Vec::new();
    for (s, eps, p) in scenario::sweep_points(pa) {
        let inst = scenario::build_instance(pa, s, eps, p)?;
        let report = build_report(&inst, &report_options(cli, seed, true))?;
        rows.push(PaRow {
            id: file.id.clone(),
            s,
            epsilon: eps,
            p: p.or_else(|| pa.source.generator.as_ref().and_then(|g| g.p)),
            report,
        });
    }
    emit_pa_rows(cli, &rows, seed)
}

pub fn rate(cli: &Cli, path: &Path) -> Result<u8, CliError> {
    let file = scenario::load(path)?;
    let pa = scenario::require_pa(&file)?;
    let seed = cli.seed_for(Some(&file));
    let p_points: Vec<Option<f64>> = match pa.sweep.as_ref().and_then(|s| s.p.clone()) {
        Some(list) => list.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut rows = Vec::new();
    for p in p_points {
        let source = scenario::build_source(pa, pa.n, p)?;
        rows.push(RateRow {
            id: file.id.clone(),
            p: p.or_else(|| pa.source.generator.as_ref().and_then(|g| g.p)),
            rate: asymptotic_rate(&source)?,
        });
    }
    let text = match cli.format() {
        Format::Csv => rate_rows_csv(&rows, seed),
        Format::Json => rows_json(&rows, seed),
    };
    cli.emit(&text)?;
    Ok(0)
}

pub fn aep(cli: &Cli, path: &Path) -> Result<u8, CliError> {
    let file = scenario::load(path)?;
    let aep = scenario::require_aep(&file)?;
    let seed = cli.seed_for(Some(&file));
    let rho = scenario::build_aep_state(aep)?;
    let h = von_neumann_entropy(&rho);
    let mut rows = Vec::new();
    for &n in &aep.ladder {
        let spec = product_spectrum(&rho, n)?;
        let s0 = smooth_renyi_0_spectrum(&spec, aep.epsilon)?.value / n as f64;
        let sinf = smooth_renyi_inf_spectrum(&spec, aep.epsilon)?.value / n as f64;
        rows.push(AepRow {
            id: file.id.clone(),
            n,
            epsilon: aep.epsilon,
            s0_rate: s0,
            sinf_rate: sinf,
            von_neumann: h,
            gap0: (s0 - h).abs(),
            gap_inf: (sinf - h).abs(),
        });
    }
    let text = match cli.format() {
        Format::Csv => aep_rows_csv(&rows, seed),
        Format::Json => rows_json(&rows, seed),
    };
    cli.emit(&text)?;
    Ok(0)
}

pub fn verify_lemmas(
    cli: &Cli,
    trials: u32,
    check: Option<&str>,
    replay: Option<&Path>,
    inject_failure: bool,
) -> Result<u8, CliError> {
    let seed = cli.seed_for(None);

    if let Some(replay_path) = replay {
        return replay_one(cli, replay_path);
    }
    if trials < 1 {
        return Err(CliError::usage("--trials must be at least 1".to_string()));
    }

    let names: Vec<&str> = match check {
        Some(name) => {
            if !verify::CHECK_NAMES.contains(&name) {
                return Err(CliError::usage(format!(
                    "unknown check `{name}`; available: {}",
                    verify::CHECK_NAMES.join(", ")
                )));
            }
            vec![verify::CHECK_NAMES
                .iter()
                .find(|n| **n == name)
                .copied()
                .expect("checked above")]
        }
        None => verify::CHECK_NAMES.to_vec(),
    };

    let mut rows = Vec::new();
    let mut all_passed = true;
    for name in names {
        let outcome = verify::run_check(name, seed, trials, inject_failure)?;
        if !outcome.passed() {
            all_passed = false;
            dump_failure(cli, seed, &outcome)?;
        }
        rows.push(VerifyRow::from(&outcome));
    }
    let text = match cli.format() {
        Format::Csv => verify_rows_csv(&rows, seed),
        Format::Json => rows_json(&rows, seed),
    };
    cli.emit(&text)?;
    Ok(if all_passed { 0 } else { 1 })
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ReplayFile {
    check: String,
    rng_seed: u64,
    trial: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

fn replay_one(cli: &Cli, path: &Path) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let replay: ReplayFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("malformed replay file: {e}")))?;
    let outcome = verify::replay_trial(&replay.check, replay.rng_seed, replay.trial)?;
    let rows = [VerifyRow::from(&outcome)];
    let text = match cli.format() {
        Format::Csv => verify_rows_csv(&rows, replay.rng_seed),
        Format::Json => rows_json(&rows, replay.rng_seed),
    };
    cli.emit(&text)?;
    Ok(if outcome.passed() { 0 } else { 1 })
}

/// Writes a replay file for the first failing trial and, when the check
/// carries a full instance, a runnable scenario file next to it.
fn dump_failure(cli: &Cli, seed: u64, outcome: &verify::CheckOutcome) -> Result<(), CliError> {
    let Some(failure) = &outcome.first_failure else {
        return Ok(());
    };
    let dir = cli.dump_dir();
    let stem = format!("failure-{}-trial{}", outcome.name, failure.trial);

    let replay = ReplayFile {
        check: outcome.name.to_string(),
        rng_seed: seed,
        trial: failure.trial,
        detail: Some(failure.detail.clone()),
    };
    let replay_path = dir.join(format!("{stem}.replay.json"));
    std::fs::write(
        &replay_path,
        serde_json::to_string_pretty(&replay).expect("replay serializes") + "\n",
    )?;
    eprintln!(
        "check {} failed at trial {}: {} (replay: {})",
        outcome.name,
        failure.trial,
        failure.detail,
        replay_path.display()
    );

    if let Some(dump) = &failure.instance {
        let scenario = scenario_from_dump(&stem, seed, dump);
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&scenario).expect("scenario serializes") + "\n",
        )?;
        eprintln!("failing instance dumped to {}", path.display());
    }
    Ok(())
}
