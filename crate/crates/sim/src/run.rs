//! The time loop and its outputs.

use std::io::Write;
use std::path::{Path, PathBuf};

use nsch_core::cahn_hilliard::ChParams;
use nsch_core::coupled::{self, StepParams};
use nsch_core::diagnostics::DiagRecord;
use nsch_core::momentum::SolverSettings;
use nsch_core::State;

use crate::analysis::{self, DecayReport};
use crate::config::{Config, DtMode};
use crate::error::{SimError, SimResult};
use crate::output::{self, Checkpoint, SeriesWriter};
use crate::profiles::{self, Verdict};

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub energy: f64,
    pub serrin_acc: f64,
    pub smallness: f64,
    pub smallness_verdict: Verdict,
    pub decay: DecayReport,
    pub out_dir: PathBuf,
}

pub fn step_params(config: &Config) -> SimResult<StepParams> {
    let s = &config.scheme;
    Ok(StepParams {
        law: profiles::law_of(config)?,
        ch: ChParams {
            stabilization: s.stabilization,
            tol: s.ch_tol,
            max_iter: s.max_iter,
        },
        projection: SolverSettings {
            tol: s.projection_tol,
            max_iter: s.max_iter,
        },
        serrin_r: s.serrin_r,
        div_tol: s.div_tol,
    })
}

/// Next step size, shortened (or stretched by rounding) to land on `t_end`.
/// `None` once `t_end` is reached.
pub fn next_dt(config: &Config, state: &State, params: &StepParams) -> Option<f64> {
    let t_end = config.scheme.t_end;
    let remaining = t_end - state.t;
    if remaining <= 1e-12 * t_end.max(1.0) {
        return None;
    }
    let dt = match config.scheme.dt {
        DtMode::Fixed(dt) => dt,
        DtMode::Auto => coupled::auto_dt(state, &params.law),
    };
    Some(if dt >= remaining * (1.0 - 1e-9) { remaining } else { dt })
}

fn run_info(config: &Config, params: &StepParams, initial: &profiles::Initial) -> Vec<(&'static str, String)> {
    let dt = match config.scheme.dt {
        DtMode::Fixed(dt) => format!("{dt:e}"),
        DtMode::Auto => "auto".into(),
    };
    vec![
        ("nx", config.grid.nx.to_string()),
        ("ny", config.grid.ny.to_string()),
        ("lx", format!("{:e}", config.grid.lx)),
        ("ly", format!("{:e}", config.grid.ly)),
        ("nu1", format!("{:e}", config.fluids.nu1)),
        ("nu2", format!("{:e}", config.fluids.nu2)),
        ("nu_star", format!("{:.16e}", params.law.nu_star())),
        ("c0", format!("{:e}", config.fluids.c0)),
        ("eps0_target", format!("{:e}", config.fluids.eps0)),
        ("smallness", format!("{:.16e}", initial.smallness)),
        ("smallness_verdict", initial.verdict.to_string()),
        ("mass0", format!("{:.16e}", initial.record.mass)),
        ("serrin_r", format!("{:e}", config.scheme.serrin_r)),
        ("dt", dt),
        ("t_end", format!("{:e}", config.scheme.t_end)),
        ("seed", config.scheme.seed.to_string()),
    ]
}

fn prepare_dir(dir: &Path) -> SimResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let meta = std::fs::metadata(dir).map_err(|e| SimError::io(dir, e))?;
    if !meta.is_dir() {
        return Err(SimError::io(dir, std::io::Error::other("not a directory")));
    }
    Ok(())
}

/// Runs `config` to `t_end`, writing into `config.output.dir`; progress and
/// the summary go to `log`.
pub fn run(config: &Config, log: &mut dyn Write) -> SimResult<RunSummary> {
    let dir = config.output.dir.clone();
    prepare_dir(&dir)?;
    // opening the series first surfaces an unwritable directory before any compute
    let mut series = SeriesWriter::create(&dir.join(output::SERIES_FILE))?;
    let params = step_params(config)?;

    let initial = profiles::build_initial(config)?;
    output::write_run_info(&dir.join(output::RUN_INFO_FILE), &run_info(config, &params, &initial))?;
    let mut say = |line: String| writeln!(log, "{line}").map_err(|e| SimError::io("<log>", e));
    say(format!(
        "initial: E={:.6e} mass={:.6e} smallness={:.6e} eps0={:e} verdict={}",
        initial.record.energy, initial.record.mass, initial.smallness, config.fluids.eps0, initial.verdict
    ))?;

    let mut state = initial.state.clone();
    let mut last = initial.record;
    let mut written: Vec<DiagRecord> = vec![last];
    series.write(&last)?;
    output::write_snapshot(&dir.join(output::snapshot_name(0)), &state)?;
    let checkpoint_path = dir.join(output::CHECKPOINT_FILE);
    Checkpoint::capture(0, 0.0, &state).save(&checkpoint_path)?;

    let mut steps = 0;
    let mut snapshot_written = true;
    while let Some(dt) = next_dt(config, &state, &params) {
        let out = coupled::step(&state, last.serrin_acc, dt, &params).map_err(|source| SimError::Numerical {
            step: steps + 1,
            source,
        })?;
        steps += 1;
        state = out.state;
        last = out.record;
        let finished = next_dt(config, &state, &params).is_none();
        if steps % config.output.series_every == 0 || finished {
            series.write(&last)?;
            written.push(last);
        }
        snapshot_written = false;
        if config.output.snapshot_every > 0 && steps % config.output.snapshot_every == 0 {
            output::write_snapshot(&dir.join(output::snapshot_name(steps)), &state)?;
            Checkpoint::capture(steps, last.serrin_acc, &state).save(&checkpoint_path)?;
            snapshot_written = true;
        }
    }
    if !snapshot_written {
        output::write_snapshot(&dir.join(output::snapshot_name(steps)), &state)?;
        Checkpoint::capture(steps, last.serrin_acc, &state).save(&checkpoint_path)?;
    }

    let decay = analysis::check_decay(&written, params.law.nu_star(), initial.smallness, config.fluids.c0)?;
    say(format!(
        "envelope: a0={:.6e} c={:.6e} floor={:.6e} rows={} violations={} verdict={}",
        decay.a0,
        decay.c,
        decay.floor,
        decay.rows,
        decay.violations.len(),
        if decay.envelope_holds() { "pass" } else { "fail" }
    ))?;
    say(format!(
        "summary: steps={} T={} E={:.16e} serrin_acc={:.16e} smallness={:.6e} envelope={}",
        steps,
        state.t,
        last.energy,
        last.serrin_acc,
        initial.smallness,
        if decay.envelope_holds() { "pass" } else { "fail" }
    ))?;
    Ok(RunSummary {
        steps,
        t: state.t,
        energy: last.energy,
        serrin_acc: last.serrin_acc,
        smallness: initial.smallness,
        smallness_verdict: initial.verdict,
        decay,
        out_dir: dir,
    })
}
