//! Run configuration: a flat, sectioned `key = value` text format.
//!
//! ```text
//! preset = paper-1d          # optional, must precede every section
//!
//! [grid]
//! dim = 1
//! cells = 100                # or: spacing = 0.01
//! length = 1
//!
//! [mixture]
//! species = 3
//! b.1.2 = 1/0.833            # literal division is allowed anywhere a real is
//! ```
//!
//! Comments start with `#`. Unknown sections or keys, repeated keys and
//! invalid values are errors carrying the line number and field name.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::initial::InitialCondition;
use crate::mixture::FrictionMatrix;
use crate::stepper::StepConfig;

pub const DEFAULT_SEED: u64 = 2024;

/// Built-in starting points for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    ThreeSpecies1d,
    ThreeSpecies2d,
    TwoSpecies,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::ThreeSpecies1d => "paper-1d",
            Preset::ThreeSpecies2d => "paper-2d",
            Preset::TwoSpecies => "two-species",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Preset::ThreeSpecies1d, Preset::ThreeSpecies2d, Preset::TwoSpecies]
            .into_iter()
            .find(|p| p.name() == s)
    }
}

/// Reference for the convergence studies.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceKind {
    DomainAverage,
    /// The exact heat mode; two-species cosine data only.
    Exact,
    Constant(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub final_time: f64,
    pub reference: ReferenceKind,
    pub space_h_min: f64,
    pub space_h_max: f64,
    pub space_count: usize,
    pub space_dt: f64,
    pub time_dt_min: f64,
    pub time_dt_max: f64,
    pub time_count: usize,
    pub time_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationConfig {
    pub amplitude: f64,
    pub b12: f64,
    pub t0: f64,
    pub h_values: Vec<f64>,
    pub dt_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub dim: usize,
    pub cells: usize,
    pub length: f64,
    pub species: usize,
    pub friction: FrictionMatrix,
    pub initial: InitialCondition,
    pub dt: f64,
    pub steps: usize,
    pub solver: StepConfig,
    pub out_dir: PathBuf,
    /// Snapshot interval in steps; 0 writes only the initial and final fields.
    pub emit_fields_every: usize,
    pub seed: u64,
    pub convergence: ConvergenceConfig,
    pub truncation: TruncationConfig,
}

fn mixture_friction() -> FrictionMatrix {
    FrictionMatrix::from_upper(3, &[1.0 / 0.833, 1.0 / 0.833, 1.0 / 0.168]).expect("positive coefficients")
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let solver = StepConfig::new(1e-3).expect("valid default step");
        let convergence = ConvergenceConfig {
            final_time: 0.5,
            reference: ReferenceKind::DomainAverage,
            space_h_min: 0.01,
            space_h_max: 0.2,
            space_count: 8,
            space_dt: 0.01,
            time_dt_min: 0.001,
            time_dt_max: 0.1,
            time_count: 8,
            time_h: 0.01,
        };
        let truncation = TruncationConfig {
            amplitude: 0.1,
            b12: 2.0,
            t0: 0.0,
            h_values: vec![0.1, 0.05, 0.025, 0.0125],
            dt_values: vec![0.01, 0.005, 0.0025, 0.00125],
        };
        let base = RunConfig {
            preset,
            dim: 1,
            cells: 100,
            length: 1.0,
            species: 3,
            friction: mixture_friction(),
            initial: InitialCondition::ThreeSpecies1d,
            dt: 1e-3,
            steps: 500,
            solver,
            out_dir: PathBuf::from("out"),
            emit_fields_every: 50,
            seed: DEFAULT_SEED,
            convergence,
            truncation,
        };
        match preset {
            Preset::ThreeSpecies1d => base,
            Preset::ThreeSpecies2d => RunConfig {
                dim: 2,
                cells: 20,
                initial: InitialCondition::ThreeSpecies2d,
                ..base
            },
            Preset::TwoSpecies => RunConfig {
                species: 2,
                cells: 40,
                friction: FrictionMatrix::from_upper(2, &[2.0]).expect("positive coefficient"),
                initial: InitialCondition::TwoSpeciesCosine { amplitude: 0.1 },
                dt: 1e-3,
                steps: 100,
                emit_fields_every: 10,
                convergence: ConvergenceConfig {
                    final_time: 0.1,
                    reference: ReferenceKind::Exact,
                    space_h_min: 0.0125,
                    space_h_max: 0.1,
                    space_count: 4,
                    space_dt: 1e-5,
                    time_dt_min: 0.00125,
                    time_dt_max: 0.01,
                    time_count: 4,
                    time_h: 0.002,
                },
                ..base
            },
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.cells, self.length)
    }

    /// Solver settings with the run's step size.
    pub fn step_config(&self) -> Result<StepConfig> {
        let mut cfg = self.solver;
        cfg.dt = self.dt;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = tokenize(text)?;
        let mut cfg = match entries.iter().find(|e| e.section.is_empty() && e.key == "preset") {
            Some(e) => Self::preset(
                Preset::parse(&e.value)
                    .ok_or_else(|| e.error(format!("unknown preset {:?}", e.value)))?,
            ),
            None => Self::preset(Preset::ThreeSpecies1d),
        };
        let mut spacing: Option<(&Entry, f64)> = None;
        let mut friction: BTreeMap<(usize, usize), (f64, &Entry)> = BTreeMap::new();
        let mut kind: Option<&Entry> = None;
        let mut amplitude: Option<f64> = None;
        let mut path: Option<PathBuf> = None;
        let mut solver = cfg.solver;

        for e in &entries {
            match (e.section.as_str(), e.key.as_str()) {
                ("", "preset") => {}
                ("grid", "dim") => cfg.dim = e.usize()?,
                ("grid", "cells") => cfg.cells = e.usize()?,
                ("grid", "spacing") => spacing = Some((e, e.positive()?)),
                ("grid", "length") => cfg.length = e.positive()?,
                ("mixture", "species") => cfg.species = e.usize()?,
                ("mixture", key) if key.starts_with("b.") => {
                    let (i, j) = friction_key(e)?;
                    let v = e.positive()?;
                    let (lo, hi) = (i.min(j), i.max(j));
                    if let Some((w, first)) = friction.get(&(lo, hi)) {
                        if w != &v {
                            return Err(e.error(format!(
                                "asymmetric friction: {v} here, {w} on line {}",
                                first.line
                            )));
                        }
                    }
                    friction.insert((lo, hi), (v, e));
                }
                ("initial", "kind") => kind = Some(e),
                ("initial", "amplitude") => amplitude = Some(e.real()?),
                ("initial", "path") => path = Some(PathBuf::from(&e.value)),
                ("time", "dt") => cfg.dt = e.positive()?,
                ("time", "steps") => cfg.steps = e.usize()?,
                ("solver", "newton_tol") => solver.newton_tol = e.positive()?,
                ("solver", "max_newton_iters") => solver.max_newton_iters = e.usize()?,
                ("solver", "interior_margin") => solver.interior_margin = e.real()?,
                ("solver", "linear_tol") => solver.linear_tol = e.positive()?,
                ("output", "dir") => cfg.out_dir = PathBuf::from(&e.value),
                ("output", "emit_fields_every") => cfg.emit_fields_every = e.usize()?,
                ("verify", "seed") => cfg.seed = e.value.parse().map_err(|_| e.error("expected an unsigned integer"))?,
                ("convergence", "final_time") => cfg.convergence.final_time = e.positive()?,
                ("convergence", "reference") => cfg.convergence.reference = reference_kind(e)?,
                ("convergence", "space.h_min") => cfg.convergence.space_h_min = e.positive()?,
                ("convergence", "space.h_max") => cfg.convergence.space_h_max = e.positive()?,
                ("convergence", "space.count") => cfg.convergence.space_count = e.usize()?,
                ("convergence", "space.dt") => cfg.convergence.space_dt = e.positive()?,
                ("convergence", "time.dt_min") => cfg.convergence.time_dt_min = e.positive()?,
                ("convergence", "time.dt_max") => cfg.convergence.time_dt_max = e.positive()?,
                ("convergence", "time.count") => cfg.convergence.time_count = e.usize()?,
                ("convergence", "time.h") => cfg.convergence.time_h = e.positive()?,
                ("truncation", "amplitude") => cfg.truncation.amplitude = e.real()?,
                ("truncation", "b12") => cfg.truncation.b12 = e.positive()?,
                ("truncation", "t0") => cfg.truncation.t0 = e.real()?,
                ("truncation", "h_values") => cfg.truncation.h_values = e.reals()?,
                ("truncation", "dt_values") => cfg.truncation.dt_values = e.reals()?,
                _ => return Err(e.error("unknown key")),
            }
        }

        if let Some((e, h)) = spacing {
            let g = GridSpec::with_spacing(cfg.dim, h, cfg.length).map_err(|err| e.error(err.to_string()))?;
            cfg.cells = g.cells_per_axis();
        }
        cfg.grid().map_err(|err| Error::config(None, Some("grid"), err.to_string()))?;
        if cfg.species < 2 {
            return Err(Error::config(None, Some("mixture.species"), "at least 2 species are required"));
        }

        if !friction.is_empty() || cfg.species != cfg.friction.species() {
            let n = cfg.species;
            let mut upper = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    let v = match friction.get(&(i, j)) {
                        Some((v, _)) => *v,
                        None if cfg.friction.species() == n => cfg.friction.get(i, j),
                        None => {
                            return Err(Error::config(
                                None,
                                Some(&format!("mixture.b.{}.{}", i + 1, j + 1)),
                                "missing friction coefficient",
                            ))
                        }
                    };
                    upper.push(v);
                }
            }
            if let Some((_, e)) = friction.iter().find(|((_, j), _)| *j >= n).map(|(_, v)| v) {
                return Err(e.error(format!("species index beyond {n}")));
            }
            cfg.friction = FrictionMatrix::from_upper(n, &upper)?;
        }

        if let Some(e) = kind {
            cfg.initial = match e.value.as_str() {
                "paper-1d" => InitialCondition::ThreeSpecies1d,
                "paper-2d" => InitialCondition::ThreeSpecies2d,
                "two-species-cosine" => InitialCondition::TwoSpeciesCosine {
                    amplitude: amplitude.unwrap_or(0.1),
                },
                "file" => InitialCondition::Tabulated(
                    path.clone().ok_or_else(|| e.error("kind = file needs initial.path"))?,
                ),
                other => return Err(e.error(format!("unknown initial condition {other:?}"))),
            };
        } else if let (Some(a), InitialCondition::TwoSpeciesCosine { .. }) = (amplitude, &cfg.initial) {
            cfg.initial = InitialCondition::TwoSpeciesCosine { amplitude: a };
        }
        cfg.initial
            .check_species(cfg.species)
            .and_then(|_| cfg.initial.check_dim(cfg.dim))
            .map_err(|err| Error::config(None, Some("initial.kind"), err.to_string()))?;

        solver.dt = cfg.dt;
        solver
            .validate()
            .map_err(|err| Error::config(None, Some("solver"), err.to_string()))?;
        cfg.solver = solver;
        cfg.validate_studies()?;
        Ok(cfg)
    }

    fn validate_studies(&self) -> Result<()> {
        let c = &self.convergence;
        if c.space_h_min > c.space_h_max || c.time_dt_min > c.time_dt_max {
            return Err(Error::config(None, Some("convergence"), "sweep bounds are reversed"));
        }
        if c.space_count == 0 || c.time_count == 0 {
            return Err(Error::config(None, Some("convergence"), "sweeps need at least one value"));
        }
        if let ReferenceKind::Constant(v) = &c.reference {
            if v.len() != self.species {
                return Err(Error::config(
                    None,
                    Some("convergence.reference"),
                    format!("{} values for {} species", v.len(), self.species),
                ));
            }
        }
        if c.reference == ReferenceKind::Exact && !matches!(self.initial, InitialCondition::TwoSpeciesCosine { .. }) {
            return Err(Error::config(
                None,
                Some("convergence.reference"),
                "the exact reference needs two-species-cosine initial data",
            ));
        }
        let t = &self.truncation;
        if t.h_values.is_empty() || t.dt_values.is_empty() || t.dt_values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::config(None, Some("truncation"), "h_values and dt_values must be nonempty and positive"));
        }
        Ok(())
    }

    /// Full text of the effective configuration; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "preset = {}", self.preset.name());
        let _ = writeln!(w, "\n[grid]\ndim = {}\ncells = {}\nlength = {:?}", self.dim, self.cells, self.length);
        let _ = writeln!(w, "\n[mixture]\nspecies = {}", self.species);
        for i in 0..self.species {
            for j in i + 1..self.species {
                let _ = writeln!(w, "b.{}.{} = {:?}", i + 1, j + 1, self.friction.get(i, j));
            }
        }
        let _ = writeln!(w, "\n[initial]");
        match &self.initial {
            InitialCondition::TwoSpeciesCosine { amplitude } => {
                let _ = writeln!(w, "kind = two-species-cosine\namplitude = {amplitude:?}");
            }
            InitialCondition::Tabulated(p) => {
                let _ = writeln!(w, "kind = file\npath = {}", p.display());
            }
            other => {
                let _ = writeln!(w, "kind = {}", other.name());
            }
        }
        let _ = writeln!(w, "\n[time]\ndt = {:?}\nsteps = {}", self.dt, self.steps);
        let _ = writeln!(
            w,
            "\n[solver]\nnewton_tol = {:?}\nmax_newton_iters = {}\ninterior_margin = {:?}\nlinear_tol = {:?}",
            self.solver.newton_tol, self.solver.max_newton_iters, self.solver.interior_margin, self.solver.linear_tol
        );
        let _ = writeln!(
            w,
            "\n[output]\ndir = {}\nemit_fields_every = {}",
            self.out_dir.display(),
            self.emit_fields_every
        );
        let _ = writeln!(w, "\n[verify]\nseed = {}", self.seed);
        let c = &self.convergence;
        let reference = match &c.reference {
            ReferenceKind::DomainAverage => "domain-average".to_string(),
            ReferenceKind::Exact => "exact".to_string(),
            ReferenceKind::Constant(v) => join(v),
        };
        let _ = writeln!(
            w,
            "\n[convergence]\nfinal_time = {:?}\nreference = {reference}\nspace.h_min = {:?}\nspace.h_max = {:?}\n\
             space.count = {}\nspace.dt = {:?}\ntime.dt_min = {:?}\ntime.dt_max = {:?}\ntime.count = {}\ntime.h = {:?}",
            c.final_time, c.space_h_min, c.space_h_max, c.space_count, c.space_dt, c.time_dt_min, c.time_dt_max,
            c.time_count, c.time_h
        );
        let t = &self.truncation;
        let _ = writeln!(
            w,
            "\n[truncation]\namplitude = {:?}\nb12 = {:?}\nt0 = {:?}\nh_values = {}\ndt_values = {}",
            t.amplitude,
            t.b12,
            t.t0,
            join(&t.h_values),
            join(&t.dt_values)
        );
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

impl Entry {
    fn field(&self) -> String {
        if self.section.is_empty() {
            self.key.clone()
        } else {
            format!("{}.{}", self.section, self.key)
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::config(Some(self.line), Some(&self.field()), message)
    }

    fn real(&self) -> Result<f64> {
        parse_real(&self.value).ok_or_else(|| self.error(format!("expected a real number, got {:?}", self.value)))
    }

    fn positive(&self) -> Result<f64> {
        let v = self.real()?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.error(format!("must be positive, got {v}")))
        }
    }

    fn usize(&self) -> Result<usize> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("expected a nonnegative integer, got {:?}", self.value)))
    }

    fn reals(&self) -> Result<Vec<f64>> {
        self.value
            .split(',')
            .map(|s| parse_real(s).ok_or_else(|| self.error(format!("bad list element {:?}", s.trim()))))
            .collect()
    }
}

/// A finite real, optionally written as `a/b`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

const SECTIONS: [&str; 9] = [
    "grid",
    "mixture",
    "initial",
    "time",
    "solver",
    "output",
    "verify",
    "convergence",
    "truncation",
];

fn tokenize(text: &str) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut out: Vec<Entry> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(Some(line), None, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(Error::config(Some(line), Some(name), "unknown section"));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::config(Some(line), None, "expected `key = value`"))?;
        let entry = Entry {
            line,
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        };
        if entry.key == "preset" && !entry.section.is_empty() {
            return Err(entry.error("preset must come before the first section"));
        }
        if let Some(prev) = out.iter().find(|e| e.section == entry.section && e.key == entry.key) {
            return Err(entry.error(format!("repeated key, first set on line {}", prev.line)));
        }
        out.push(entry);
    }
    Ok(out)
}

fn friction_key(e: &Entry) -> Result<(usize, usize)> {
    let mut parts = e.key.split('.').skip(1);
    let idx = |p: Option<&str>| p.and_then(|s| s.parse::<usize>().ok()).filter(|&v| v >= 1);
    match (idx(parts.next()), idx(parts.next()), parts.next()) {
        (Some(i), Some(j), None) if i != j => Ok((i - 1, j - 1)),
        _ => Err(e.error("friction keys look like b.i.j with distinct 1-based i, j")),
    }
}

fn reference_kind(e: &Entry) -> Result<ReferenceKind> {
    match e.value.as_str() {
        "domain-average" => Ok(ReferenceKind::DomainAverage),
        "exact" => Ok(ReferenceKind::Exact),
        _ => e.reals().map(ReferenceKind::Constant),
    }
}
