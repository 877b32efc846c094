//! File formats: time series, snapshots, run metadata and checkpoints.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), lines end in LF.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nsch_core::diagnostics::DiagRecord;
use nsch_core::{BoundaryKind, Grid, ScalarField, State, VectorField};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

pub const SERIES_FILE: &str = "series.csv";
pub const RUN_INFO_FILE: &str = "run_info.ini";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const SNAPSHOT_HEADER: &str = "i,j,x,y,rho,u,v,p,phi,mu";

pub fn series_header() -> String {
    DiagRecord::COLUMNS.join(",")
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct SeriesWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl SeriesWriter {
    pub fn create(path: &Path) -> SimResult<Self> {
        let file = File::create(path).map_err(|e| SimError::io(path, e))?;
        let mut w = SeriesWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.line(&series_header())?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> SimResult<()> {
        writeln!(self.out, "{s}")
            .and_then(|_| self.out.flush())
            .map_err(|e| SimError::io(&self.path, e))
    }

    pub fn write(&mut self, r: &DiagRecord) -> SimResult<()> {
        let row: Vec<String> = r.to_array().iter().map(|&x| real(x)).collect();
        self.line(&row.join(","))
    }
}

pub fn read_series(path: &Path) -> SimResult<Vec<DiagRecord>> {
    let file = File::open(path).map_err(|e| SimError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let bad = |line: usize, msg: String| SimError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let header = match lines.next() {
        Some(h) => h.map_err(|e| SimError::io(path, e))?,
        None => return Err(bad(1, "empty series file".into())),
    };
    if header.trim_end() != series_header() {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| SimError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut values = [0.0; 12];
        let mut count = 0;
        for (k, field) in line.split(',').enumerate() {
            if k >= 12 {
                return Err(bad(n + 2, "too many columns".into()));
            }
            values[k] = field
                .trim()
                .parse()
                .map_err(|_| bad(n + 2, format!("bad number {field:?}")))?;
            count += 1;
        }
        if count != 12 {
            return Err(bad(n + 2, format!("expected 12 columns, found {count}")));
        }
        out.push(DiagRecord::from_array(values));
    }
    Ok(out)
}

/// Cell-centered snapshot with face velocities averaged to centers.
pub fn write_snapshot(path: &Path, state: &State) -> SimResult<()> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let g = *state.grid();
    let (uc, vc) = state.u.center_components();
    let mut body = String::with_capacity(g.cells() * 200);
    body.push_str(SNAPSHOT_HEADER);
    body.push('\n');
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let k = g.idx(i, j);
            let fields = [
                g.x_center(i),
                g.y_center(j),
                state.rho.values()[k],
                uc[k],
                vc[k],
                state.p.values()[k],
                state.phi.values()[k],
                state.mu.values()[k],
            ];
            body.push_str(&format!("{i},{j}"));
            for x in fields {
                body.push(',');
                body.push_str(&real(x));
            }
            body.push('\n');
        }
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| SimError::io(path, e))
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step}.csv")
}

/// Flat `key = value` metadata in a single `[run]` section.
pub fn write_run_info(path: &Path, entries: &[(&str, String)]) -> SimResult<()> {
    let mut text = String::from("[run]\n");
    for (k, v) in entries {
        text.push_str(&format!("{k} = {v}\n"));
    }
    std::fs::write(path, text).map_err(|e| SimError::io(path, e))
}

pub fn read_run_info(path: &Path) -> SimResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('[') || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| SimError::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg: "expected `key = value`".into(),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: usize,
    pub serrin_acc: f64,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Checkpoint {
    pub fn capture(step: usize, serrin_acc: f64, state: &State) -> Self {
        let g = state.grid();
        Checkpoint {
            step,
            serrin_acc,
            nx: g.nx(),
            ny: g.ny(),
            lx: g.lx(),
            ly: g.ly(),
            t: state.t,
            rho: state.rho.values().to_vec(),
            u: state.u.u().to_vec(),
            v: state.u.v().to_vec(),
            p: state.p.values().to_vec(),
            phi: state.phi.values().to_vec(),
            mu: state.mu.values().to_vec(),
        }
    }

    pub fn restore(&self) -> SimResult<State> {
        let bad = |e: nsch_core::Error| SimError::Format(format!("checkpoint: {e}"));
        let g = Grid::new(self.nx, self.ny, self.lx, self.ly).map_err(bad)?;
        let bc = BoundaryKind::NeumannZero;
        Ok(State {
            t: self.t,
            rho: ScalarField::from_values(g, self.rho.clone(), bc).map_err(bad)?,
            u: VectorField::from_components(g, self.u.clone(), self.v.clone()).map_err(bad)?,
            p: ScalarField::from_values(g, self.p.clone(), bc).map_err(bad)?,
            phi: ScalarField::from_values(g, self.phi.clone(), bc).map_err(bad)?,
            mu: ScalarField::from_values(g, self.mu.clone(), bc).map_err(bad)?,
        })
    }

    /// Writes through a temporary file so an interrupted save leaves the
    /// previous checkpoint intact.
    pub fn save(&self, path: &Path) -> SimResult<()> {
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string(self).map_err(|e| SimError::Format(e.to_string()))?;
        std::fs::write(&tmp, text).map_err(|e| SimError::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| SimError::io(path, e))
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| SimError::Format(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64) -> DiagRecord {
        let mut a = [0.0; 12];
        for (k, x) in a.iter_mut().enumerate() {
            *x = (t + 1.0) * (k as f64 + 0.1) / 3.0;
        }
        a[0] = t;
        DiagRecord::from_array(a)
    }

    #[test]
    fn series_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(SERIES_FILE);
        let rows: Vec<DiagRecord> = (0..5).map(|k| record(k as f64 * 0.1)).collect();
        let mut w = SeriesWriter::create(&path).unwrap();
        rows.iter().for_each(|r| w.write(r).unwrap());
        drop(w);
        assert_eq!(read_series(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "t,E,D,mass,rho_min,rho_max,grad_u_l2,grad_mu_l2,lr_norm_u,serrin_acc,divu_max,rho_phi_total\n"
        ));
        assert!(!text.contains('\r'));
        // 17 significant digits
        let second = text.lines().nth(2).unwrap();
        let first_field = second.split(',').next().unwrap();
        assert_eq!(first_field, "1.0000000000000001e-1");
    }

    #[test]
    fn series_reader_rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_series(&path).is_err());
        std::fs::write(&path, format!("{}\n1,2\n", series_header())).unwrap();
        assert!(read_series(&path).unwrap_err().to_string().contains(":2"));
    }

    #[test]
    fn checkpoint_round_trip_is_bitwise() {
        let g = Grid::new(5, 4, 1.0, 0.7).unwrap();
        let bc = BoundaryKind::NeumannZero;
        let state = State {
            t: 0.123456789,
            rho: ScalarField::from_fn(g, bc, |x, y| 1.0 + x / 3.0 + y / 7.0),
            u: VectorField::from_fn(g, |x, y| (x * y).sin() / 3.0, |x, y| (x - y).exp() * 1e-7),
            p: ScalarField::from_fn(g, bc, |x, _| x.ln_1p()),
            phi: ScalarField::from_fn(g, bc, |x, y| (x - y).tanh()),
            mu: ScalarField::from_fn(g, bc, |x, y| 1e-300 * x + y / 11.0),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(CHECKPOINT_FILE);
        Checkpoint::capture(17, 0.1 + 0.2, &state).save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back.step, 17);
        assert_eq!(back.serrin_acc, 0.1 + 0.2);
        let s = back.restore().unwrap();
        assert_eq!(s.t, state.t);
        assert_eq!(s.rho.values(), state.rho.values());
        assert_eq!(s.u.u(), state.u.u());
        assert_eq!(s.u.v(), state.u.v());
        assert_eq!(s.p.values(), state.p.values());
        assert_eq!(s.phi.values(), state.phi.values());
        assert_eq!(s.mu.values(), state.mu.values());
    }

    #[test]
    fn run_info_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(RUN_INFO_FILE);
        write_run_info(&path, &[("nu_star", "0.5".into()), ("seed", "3".into())]).unwrap();
        let m = read_run_info(&path).unwrap();
        assert_eq!(m["nu_star"], "0.5");
        assert_eq!(m["seed"], "3");
    }
}
