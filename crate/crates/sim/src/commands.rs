//! Subcommand bodies, kept out of `main` so tests can call them directly.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis;
use crate::config::Config;
use crate::error::{SimError, SimResult};
use crate::output;
use crate::run::{self, RunSummary};

#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub out: Option<PathBuf>,
    pub t_end: Option<f64>,
    pub seed: Option<u64>,
}

pub fn apply_overrides(config: &mut Config, o: &RunOverrides) -> SimResult<()> {
    if let Some(dir) = &o.out {
        config.output.dir = dir.clone();
    }
    if let Some(t) = o.t_end {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(SimError::invalid("--t-end", format!("must be non-negative, got {t}")));
        }
        config.scheme.t_end = t;
    }
    if let Some(seed) = o.seed {
        config.scheme.seed = seed;
    }
    Ok(())
}

pub fn run_command(config_path: &Path, o: &RunOverrides, log: &mut dyn Write) -> SimResult<RunSummary> {
    let mut config = Config::load(config_path)?;
    apply_overrides(&mut config, o)?;
    run::run(&config, log)
}

fn run_info_next_to(series: &Path) -> Option<std::collections::BTreeMap<String, String>> {
    let path = series.parent().unwrap_or(Path::new(".")).join(output::RUN_INFO_FILE);
    output::read_run_info(&path).ok()
}

fn say(log: &mut dyn Write, line: String) -> SimResult<()> {
    writeln!(log, "{line}").map_err(|e| SimError::io("<log>", e))
}

/// Recomputes the blow-up accumulator from a series file.
pub fn diag_command(series: &Path, r: f64, log: &mut dyn Write) -> SimResult<analysis::SerrinReport> {
    let records = output::read_series(series)?;
    if let Some(stored) = run_info_next_to(series).and_then(|m| m.get("serrin_r").and_then(|v| v.parse::<f64>().ok())) {
        if stored != r {
            return Err(SimError::invalid(
                "--r",
                format!("the series holds L^r norms for r = {stored}, not {r}"),
            ));
        }
    }
    let rep = analysis::serrin_from_series(&records, r)?;
    say(
        log,
        format!(
            "serrin: r={} exponent={} rows={} recomputed={:.16e} stored={:.16e} verdict={}",
            r,
            rep.exponent,
            records.len(),
            rep.recomputed,
            rep.stored,
            if rep.ok() { "pass" } else { "fail" }
        ),
    )?;
    if !rep.ok() {
        return Err(SimError::Violation(format!(
            "accumulator not finite and non-decreasing (rows {:?})",
            rep.decreasing_rows
        )));
    }
    Ok(rep)
}

/// Checks the energy against the decay envelope. `nu_star` falls back to
/// the `run_info.ini` written next to the series.
pub fn check_decay_command(
    series: &Path,
    eps0: f64,
    c0: f64,
    nu_star: Option<f64>,
    log: &mut dyn Write,
) -> SimResult<analysis::DecayReport> {
    let records = output::read_series(series)?;
    let nu_star = match nu_star {
        Some(v) => v,
        None => run_info_next_to(series)
            .and_then(|m| m.get("nu_star").and_then(|v| v.parse().ok()))
            .ok_or_else(|| {
                SimError::invalid("--nu-star", "not given and no run_info.ini next to the series")
            })?,
    };
    let rep = analysis::check_decay(&records, nu_star, eps0, c0)?;
    say(
        log,
        format!(
            "decay: a0={:.6e} c={:.6e} eps0={:.6e} floor={:.6e} rows={} violations={} verdict={}",
            rep.a0,
            rep.c,
            rep.eps0,
            rep.floor,
            rep.rows,
            rep.violations.len(),
            if rep.envelope_holds() { "pass" } else { "fail" }
        ),
    )?;
    say(
        log,
        format!(
            "half-energy: E0={:.6e} E_end={:.6e} T={} verdict={}",
            rep.e0,
            rep.e_end,
            rep.t_end,
            if rep.halved() { "pass" } else { "fail" }
        ),
    )?;
    if let Some(&(t, e, env)) = rep.violations.first() {
        return Err(SimError::Violation(format!(
            "energy {e:.6e} above envelope {env:.6e} at t = {t}"
        )));
    }
    Ok(rep)
}
