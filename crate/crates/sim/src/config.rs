//! Run configuration read from an INI-style file.
//!
//! ```text
//! [grid]       nx, ny, lx, ly
//! [fluids]     nu1, nu2, eps0, c0
//! [rho]        profile = constant | tanh | random | blob, plus profile keys
//! [phi]        same profiles as [rho]
//! [velocity]   profile = zero | taylor-green, amplitude, grad_norm
//! [scheme]     dt (number or "auto"), stabilization, ch_tol, projection_tol,
//!              max_iter, div_tol, serrin_r, t_end, seed
//! [output]     dir, series_every, snapshot_every
//! ```
//!
//! Every key is optional; unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidsConfig {
    pub nu1: f64,
    pub nu2: f64,
    /// Target for the smallness quantity of the initial data.
    pub eps0: f64,
    /// Constant `c0` of the decay rate.
    pub c0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarProfile {
    Constant {
        value: f64,
    },
    /// `low + (high - low) (1 + tanh((s - center) / width)) / 2` along `axis`.
    Tanh {
        low: f64,
        high: f64,
        center: f64,
        width: f64,
        axis: Axis,
    },
    /// `mean` plus seeded cosine modes up to `modes`, scaled to peak `amplitude`.
    Random {
        mean: f64,
        amplitude: f64,
        modes: usize,
    },
    /// Smoothed disc of value `inside` over `outside`.
    Blob {
        inside: f64,
        outside: f64,
        cx: f64,
        cy: f64,
        radius: f64,
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum VelocityProfile {
    Zero,
    /// Cellular flow from the streamfunction `sin(pi x/lx) sin(pi y/ly)`,
    /// projected, then rescaled to `||grad u|| = grad_norm` when given.
    TaylorGreen {
        amplitude: f64,
        grad_norm: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtMode {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub dt: DtMode,
    pub stabilization: f64,
    pub ch_tol: f64,
    pub projection_tol: f64,
    pub max_iter: usize,
    pub div_tol: f64,
    pub serrin_r: f64,
    pub t_end: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub series_every: usize,
    /// 0 writes only the initial and final snapshots.
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridConfig,
    pub fluids: FluidsConfig,
    pub rho: ScalarProfile,
    pub phi: ScalarProfile,
    pub velocity: VelocityProfile,
    pub scheme: SchemeConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            grid: GridConfig {
                nx: 32,
                ny: 32,
                lx: 1.0,
                ly: 1.0,
            },
            fluids: FluidsConfig {
                nu1: 1e-2,
                nu2: 1e-2,
                eps0: 0.1,
                c0: 1.0,
            },
            rho: ScalarProfile::Constant { value: 1.0 },
            phi: ScalarProfile::Constant { value: 1.0 },
            velocity: VelocityProfile::Zero,
            scheme: SchemeConfig {
                dt: DtMode::Auto,
                stabilization: 2.0,
                ch_tol: 1e-9,
                projection_tol: 1e-10,
                max_iter: 20_000,
                div_tol: 1e-8,
                serrin_r: 12.0,
                t_end: 1.0,
                seed: 0,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                series_every: 1,
                snapshot_every: 0,
            },
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Section {
    entries: BTreeMap<String, Entry>,
    name: String,
}

impl Section {
    fn key(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|e| e.value)
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str) -> SimResult<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                SimError::invalid(
                    &self.key(key),
                    format!("cannot parse {:?} (line {})", e.value, e.line),
                )
            }),
        }
    }

    fn finish(self, path: &Path) -> SimResult<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((k, e)) => Err(SimError::Parse {
                path: path.to_path_buf(),
                line: e.line,
                msg: format!("unknown key {}.{}", self.name, k),
            }),
        }
    }
}

fn parse_ini(path: &Path, text: &str) -> SimResult<BTreeMap<String, (Section, usize)>> {
    const SECTIONS: [&str; 7] = ["grid", "fluids", "rho", "phi", "velocity", "scheme", "output"];
    let mut sections: BTreeMap<String, (Section, usize)> = BTreeMap::new();
    let mut current: Option<String> = None;
    let err = |line: usize, msg: String| SimError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = match raw.find(['#', ';']) {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "unterminated section header".into()))?
                .trim()
                .to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(err(line_no, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(err(line_no, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.clone(),
                (
                    Section {
                        entries: BTreeMap::new(),
                        name: name.clone(),
                    },
                    line_no,
                ),
            );
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, found {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(err(line_no, "empty key".into()));
        }
        let name = current
            .as_ref()
            .ok_or_else(|| err(line_no, format!("key {key} outside any section")))?;
        let section = &mut sections.get_mut(name).expect("section registered").0;
        if section.entries.contains_key(key) {
            return Err(err(line_no, format!("duplicate key {name}.{key}")));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: line_no,
            },
        );
    }
    Ok(sections)
}

fn positive(key: &str, v: f64) -> SimResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(SimError::invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> SimResult<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(SimError::invalid(key, format!("must be non-negative and finite, got {v}")))
    }
}

fn tolerance(key: &str, v: f64) -> SimResult<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(SimError::invalid(key, format!("must lie in (0, 1), got {v}")))
    }
}

fn scalar_profile(
    s: &mut Section,
    grid: &GridConfig,
    default: &ScalarProfile,
    need_positive: bool,
) -> SimResult<ScalarProfile> {
    let kind = s.take_str("profile");
    let check = |s: &Section, key: &str, v: f64| -> SimResult<f64> {
        if need_positive {
            positive(&s.key(key), v)
        } else if v.is_finite() {
            Ok(v)
        } else {
            Err(SimError::invalid(&s.key(key), "must be finite"))
        }
    };
    let profile = match kind.as_deref() {
        None => default.clone(),
        Some("constant") => {
            let value = s.take("value")?.unwrap_or(1.0);
            ScalarProfile::Constant {
                value: check(s, "value", value)?,
            }
        }
        Some("tanh") => {
            let axis = match s.take_str("axis").as_deref() {
                None | Some("x") => Axis::X,
                Some("y") => Axis::Y,
                Some(other) => {
                    return Err(SimError::invalid(&s.key("axis"), format!("expected x or y, got {other:?}")))
                }
            };
            let half = match axis {
                Axis::X => grid.lx / 2.0,
                Axis::Y => grid.ly / 2.0,
            };
            let low = s.take("low")?.unwrap_or(-1.0);
            let high = s.take("high")?.unwrap_or(1.0);
            let center: f64 = s.take("center")?.unwrap_or(half);
            let width = s.take("width")?.unwrap_or(0.05);
            if !center.is_finite() {
                return Err(SimError::invalid(&s.key("center"), "must be finite"));
            }
            ScalarProfile::Tanh {
                low: check(s, "low", low)?,
                high: check(s, "high", high)?,
                center,
                width: positive(&s.key("width"), width)?,
                axis,
            }
        }
        Some("random") => {
            let mean = s.take("mean")?.unwrap_or(1.0);
            let amplitude = non_negative(&s.key("amplitude"), s.take("amplitude")?.unwrap_or(0.1))?;
            let modes: usize = s.take("modes")?.unwrap_or(2);
            if modes == 0 {
                return Err(SimError::invalid(&s.key("modes"), "must be at least 1"));
            }
            let mean = check(s, "mean", mean)?;
            if need_positive && mean - amplitude <= 0.0 {
                return Err(SimError::invalid(&s.key("amplitude"), "mean - amplitude must stay positive"));
            }
            ScalarProfile::Random {
                mean,
                amplitude,
                modes,
            }
        }
        Some("blob") => {
            let inside = s.take("inside")?.unwrap_or(-1.0);
            let outside = s.take("outside")?.unwrap_or(1.0);
            let cx: f64 = s.take("cx")?.unwrap_or(grid.lx / 2.0);
            let cy: f64 = s.take("cy")?.unwrap_or(grid.ly / 2.0);
            let radius = s.take("radius")?.unwrap_or(0.25 * grid.lx.min(grid.ly));
            let width = s.take("width")?.unwrap_or(0.05);
            if !(cx.is_finite() && cy.is_finite()) {
                return Err(SimError::invalid(&s.key("cx"), "centre must be finite"));
            }
            ScalarProfile::Blob {
                inside: check(s, "inside", inside)?,
                outside: check(s, "outside", outside)?,
                cx,
                cy,
                radius: positive(&s.key("radius"), radius)?,
                width: positive(&s.key("width"), width)?,
            }
        }
        Some(other) => {
            return Err(SimError::invalid(
                &s.key("profile"),
                format!("unknown profile {other:?} (constant, tanh, random, blob)"),
            ))
        }
    };
    Ok(profile)
}

impl Config {
    pub fn load(path: &Path) -> SimResult<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Config::parse(path, &text)
    }

    /// `path` is only used in messages.
    pub fn parse(path: &Path, text: &str) -> SimResult<Config> {
        let mut sections = parse_ini(path, text)?;
        let mut take_section = |name: &str| {
            sections.remove(name).map(|(s, _)| s).unwrap_or(Section {
                entries: BTreeMap::new(),
                name: name.to_string(),
            })
        };
        let d = Config::default();

        let mut s = take_section("grid");
        let grid = GridConfig {
            nx: s.take("nx")?.unwrap_or(d.grid.nx),
            ny: s.take("ny")?.unwrap_or(d.grid.ny),
            lx: positive("grid.lx", s.take("lx")?.unwrap_or(d.grid.lx))?,
            ly: positive("grid.ly", s.take("ly")?.unwrap_or(d.grid.ly))?,
        };
        for (key, n) in [("grid.nx", grid.nx), ("grid.ny", grid.ny)] {
            if n < 4 {
                return Err(SimError::invalid(key, format!("must be at least 4, got {n}")));
            }
        }
        s.finish(path)?;

        let mut s = take_section("fluids");
        let fluids = FluidsConfig {
            nu1: positive("fluids.nu1", s.take("nu1")?.unwrap_or(d.fluids.nu1))?,
            nu2: positive("fluids.nu2", s.take("nu2")?.unwrap_or(d.fluids.nu2))?,
            eps0: positive("fluids.eps0", s.take("eps0")?.unwrap_or(d.fluids.eps0))?,
            c0: positive("fluids.c0", s.take("c0")?.unwrap_or(d.fluids.c0))?,
        };
        s.finish(path)?;

        let mut s = take_section("rho");
        let rho = scalar_profile(&mut s, &grid, &d.rho, true)?;
        s.finish(path)?;

        let mut s = take_section("phi");
        let phi = scalar_profile(&mut s, &grid, &d.phi, false)?;
        s.finish(path)?;

        let mut s = take_section("velocity");
        let velocity = match s.take_str("profile").as_deref() {
            None | Some("zero") => VelocityProfile::Zero,
            Some("taylor-green") => {
                let amplitude = positive("velocity.amplitude", s.take("amplitude")?.unwrap_or(1.0))?;
                let grad_norm = match s.take::<f64>("grad_norm")? {
                    None => None,
                    Some(g) => Some(non_negative("velocity.grad_norm", g)?),
                };
                VelocityProfile::TaylorGreen { amplitude, grad_norm }
            }
            Some(other) => {
                return Err(SimError::invalid(
                    "velocity.profile",
                    format!("unknown profile {other:?} (zero, taylor-green)"),
                ))
            }
        };
        s.finish(path)?;

        let mut s = take_section("scheme");
        let dt = match s.take_str("dt").as_deref() {
            None | Some("auto") => DtMode::Auto,
            Some(v) => {
                let dt: f64 = v
                    .parse()
                    .map_err(|_| SimError::invalid("scheme.dt", format!("expected a number or \"auto\", got {v:?}")))?;
                DtMode::Fixed(positive("scheme.dt", dt)?)
            }
        };
        let serrin_r: f64 = s.take("serrin_r")?.unwrap_or(d.scheme.serrin_r);
        if !(serrin_r > 6.0 && serrin_r.is_finite()) {
            return Err(SimError::invalid(
                "scheme.serrin_r",
                format!("the blow-up functional needs r > 6, got {serrin_r}"),
            ));
        }
        let max_iter: usize = s.take("max_iter")?.unwrap_or(d.scheme.max_iter);
        if max_iter == 0 {
            return Err(SimError::invalid("scheme.max_iter", "must be at least 1"));
        }
        let scheme = SchemeConfig {
            dt,
            stabilization: non_negative(
                "scheme.stabilization",
                s.take("stabilization")?.unwrap_or(d.scheme.stabilization),
            )?,
            ch_tol: tolerance("scheme.ch_tol", s.take("ch_tol")?.unwrap_or(d.scheme.ch_tol))?,
            projection_tol: tolerance(
                "scheme.projection_tol",
                s.take("projection_tol")?.unwrap_or(d.scheme.projection_tol),
            )?,
            max_iter,
            div_tol: positive("scheme.div_tol", s.take("div_tol")?.unwrap_or(d.scheme.div_tol))?,
            serrin_r,
            t_end: non_negative("scheme.t_end", s.take("t_end")?.unwrap_or(d.scheme.t_end))?,
            seed: s.take("seed")?.unwrap_or(d.scheme.seed),
        };
        s.finish(path)?;

        let mut s = take_section("output");
        let series_every: usize = s.take("series_every")?.unwrap_or(d.output.series_every);
        if series_every == 0 {
            return Err(SimError::invalid("output.series_every", "must be at least 1"));
        }
        let output = OutputConfig {
            dir: s.take_str("dir").map(PathBuf::from).unwrap_or(d.output.dir),
            series_every,
            snapshot_every: s.take("snapshot_every")?.unwrap_or(d.output.snapshot_every),
        };
        s.finish(path)?;

        Ok(Config {
            grid,
            fluids,
            rho,
            phi,
            velocity,
            scheme,
            output,
        })
    }
}
