//! Run configuration: sectioned `key = value` text.
//!
//! ```text
//! [grid]       d, L, n
//! [kernel]     kernel = newtonian | zero | log:c=<c> | power:s=<s> | table:<path>; mollify = <eps>
//! [diffusion]  law = linear | pme:m=<m> | custom:<path>; regularize = <eps>
//! [chemo]      model = convolution | elliptic; a, gamma = <coefficient>; boundary = dirichlet | decay
//! [init]       gaussian = <mass> <eps> <x> <y> [<z>]   (repeatable)
//! [stepper]    cfl_advect, diff_theta, dt_max, dt_min, blowup_linf_factor,
//!              blowup_lp (auto | <p>), picard_sweeps, solver_tol, ring_width, ring_tol
//! [run]        t_end, observe_every, output, seed
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::chemo::{Boundary, ChemoModel, Coefficient, EllipticModel};
use crate::diffusion::{DiffusionModel, DiffusionSpec};
use crate::grid::{GridSpec, ScalarField};
use crate::integrator::StepperConfig;
use crate::kernels::{Kernel, KernelSpec};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitBump {
    pub mass: f64,
    pub eps: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChemoSpec {
    Convolution,
    Elliptic { a: Coefficient, gamma: Coefficient, boundary: Option<Boundary> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub half_width: f64,
    pub cells: usize,
    pub kernel: KernelSpec,
    pub mollify: Option<f64>,
    pub diffusion: DiffusionSpec,
    pub regularize: Option<f64>,
    pub chemo: ChemoSpec,
    pub init: Vec<InitBump>,
    pub stepper: StepperConfig,
    pub t_end: f64,
    pub observe_every: usize,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            half_width: 8.0,
            cells: 256,
            kernel: KernelSpec::Newtonian,
            mollify: None,
            diffusion: DiffusionSpec::Linear,
            regularize: None,
            chemo: ChemoSpec::Convolution,
            init: Vec::new(),
            stepper: StepperConfig::default(),
            t_end: 10.0,
            observe_every: 10,
            output: None,
            seed: 0,
        }
    }
}

/// Concrete objects built from a configuration.
#[derive(Debug, Clone)]
pub struct Model<T: Real> {
    pub grid: GridSpec<T>,
    pub kernel: Kernel<T>,
    pub chemo: ChemoModel<T>,
    pub diffusion: DiffusionModel<T>,
}

const SECTIONS: [&str; 7] = ["grid", "kernel", "diffusion", "chemo", "init", "stepper", "run"];

fn keys(section: &str) -> &'static [&'static str] {
    match section {
        "grid" => &["d", "L", "n"],
        "kernel" => &["kernel", "mollify"],
        "diffusion" => &["law", "regularize"],
        "chemo" => &["model", "a", "gamma", "boundary"],
        "init" => &["gaussian"],
        "stepper" => &[
            "cfl_advect",
            "diff_theta",
            "dt_max",
            "dt_min",
            "blowup_linf_factor",
            "blowup_lp",
            "picard_sweeps",
            "solver_tol",
            "ring_width",
            "ring_tol",
        ],
        "run" => &["t_end", "observe_every", "output", "seed"],
        _ => &[],
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section: Option<&str> = None;
        let mut seen = std::collections::HashSet::new();
        let mut model = "convolution".to_string();
        let (mut a, mut gamma, mut boundary) = (None, None, None);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| ConfigError::Parse { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                let name = name.trim();
                section = Some(SECTIONS.iter().find(|s| **s == name).ok_or_else(|| err(format!("unknown section [{name}]")))?);
                continue;
            }
            let sec = section.ok_or_else(|| err("key outside of any section".into()))?;
            let (key, value) = body.split_once('=').ok_or_else(|| err(format!("expected key = value, got {body:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !keys(sec).contains(&key) {
                return Err(err(format!("unknown key {key:?} in [{sec}]")));
            }
            if key != "gaussian" && !seen.insert((sec, key)) {
                return Err(err(format!("duplicate key {key:?} in [{sec}]")));
            }
            let float = |v: &str| v.parse::<f64>().map_err(|_| err(format!("malformed number {v:?} for {key}")));
            let int = |v: &str| v.parse::<usize>().map_err(|_| err(format!("malformed integer {v:?} for {key}")));
            match (sec, key) {
                ("grid", "d") => cfg.dim = int(value)?,
                ("grid", "L") => cfg.half_width = float(value)?,
                ("grid", "n") => cfg.cells = int(value)?,
                ("kernel", "kernel") => cfg.kernel = value.parse().map_err(|e| err(format!("{e}")))?,
                ("kernel", "mollify") => cfg.mollify = Some(float(value)?),
                ("diffusion", "law") => cfg.diffusion = value.parse().map_err(|e| err(format!("{e}")))?,
                ("diffusion", "regularize") => cfg.regularize = Some(float(value)?),
                ("chemo", "model") => {
                    if value != "convolution" && value != "elliptic" {
                        return Err(err(format!("model must be convolution or elliptic, got {value:?}")));
                    }
                    model = value.to_string();
                }
                ("chemo", "a") => a = Some(value.parse::<Coefficient>().map_err(|e| err(format!("{e}")))?),
                ("chemo", "gamma") => gamma = Some(value.parse::<Coefficient>().map_err(|e| err(format!("{e}")))?),
                ("chemo", "boundary") => {
                    boundary = Some(match value {
                        "dirichlet" => Boundary::Dirichlet,
                        "decay" => Boundary::Decay,
                        _ => return Err(err(format!("boundary must be dirichlet or decay, got {value:?}"))),
                    })
                }
                ("init", "gaussian") => {
                    let nums = value.split_whitespace().map(float).collect::<Result<Vec<_>, _>>()?;
                    if !(4..=5).contains(&nums.len()) {
                        return Err(err("gaussian = <mass> <eps> <x> <y> [<z>]".into()));
                    }
                    cfg.init.push(InitBump { mass: nums[0], eps: nums[1], center: [nums[2], nums[3], *nums.get(4).unwrap_or(&0.0)] });
                }
                ("stepper", k) => {
                    let s = &mut cfg.stepper;
                    match k {
                        "cfl_advect" => s.cfl_advect = float(value)?,
                        "diff_theta" => s.diff_theta = float(value)?,
                        "dt_max" => s.dt_max = float(value)?,
                        "dt_min" => s.dt_min = float(value)?,
                        "blowup_linf_factor" => s.blowup_linf_factor = float(value)?,
                        "blowup_lp" => s.blowup_lp = if value == "auto" { None } else { Some(float(value)?) },
                        "picard_sweeps" => s.picard_sweeps = int(value)?,
                        "solver_tol" => s.solver_tol = float(value)?,
                        "ring_width" => s.ring_width = float(value)?,
                        _ => s.ring_tol = float(value)?,
                    }
                }
                ("run", "t_end") => cfg.t_end = float(value)?,
                ("run", "observe_every") => cfg.observe_every = int(value)?,
                ("run", "output") => cfg.output = Some(PathBuf::from(value)),
                ("run", "seed") => cfg.seed = value.parse().map_err(|_| err(format!("malformed seed {value:?}")))?,
                _ => unreachable!("key table covers every section"),
            }
        }
        if model == "elliptic" {
            cfg.chemo = ChemoSpec::Elliptic {
                a: a.unwrap_or(Coefficient::Const(1.0)),
                gamma: gamma.unwrap_or(Coefficient::Const(0.0)),
                boundary,
            };
        } else if a.is_some() || gamma.is_some() || boundary.is_some() {
            return Err(ConfigError::Invalid("a, gamma and boundary need model = elliptic".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn total_mass(&self) -> f64 {
        self.init.iter().map(|b| b.mass).sum()
    }

    /// Checks every invariant by building the model once in double precision.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.init.is_empty() || !(self.total_mass() > 0.0) {
            return Err(ConfigError::Invalid("total initial mass must be positive".into()));
        }
        if self.init.iter().any(|b| !(b.mass >= 0.0) || !(b.eps > 0.0)) {
            return Err(ConfigError::Invalid("gaussian masses must be >= 0 and widths > 0".into()));
        }
        if !(self.t_end >= 0.0) {
            return Err(ConfigError::Invalid("t_end must be non-negative".into()));
        }
        if self.observe_every == 0 {
            return Err(ConfigError::Invalid("observe_every must be positive".into()));
        }
        self.stepper.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.build::<f64>().map(|_| ())
    }

    pub fn build<T: Real>(&self) -> Result<Model<T>, ConfigError> {
        let inv = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        let grid = GridSpec::new(self.dim, T::lit(self.half_width), self.cells).map_err(|e| inv(&e))?;
        let mut kernel = self.kernel.build::<T>(self.dim).map_err(|e| inv(&e))?;
        if let Some(eps) = self.mollify {
            kernel = kernel.mollify(T::lit(eps)).map_err(|e| inv(&e))?;
        }
        let mut diffusion = self.diffusion.build::<T>().map_err(|e| inv(&e))?;
        if let Some(eps) = self.regularize {
            diffusion = diffusion.regularize(T::lit(eps)).map_err(|e| inv(&e))?;
        }
        let chemo = match &self.chemo {
            ChemoSpec::Convolution => ChemoModel::Convolution(kernel.clone()),
            ChemoSpec::Elliptic { a, gamma, boundary } => {
                let mut m = EllipticModel::new(self.dim, *a, *gamma).map_err(|e| inv(&e))?;
                if let Some(b) = boundary {
                    m = m.with_boundary(*b).map_err(|e| inv(&e))?;
                }
                ChemoModel::Elliptic(m)
            }
        };
        Ok(Model { grid, kernel, chemo, diffusion })
    }

    /// Sum of the configured Gaussians, each rescaled by `mass_scale`.
    pub fn initial_field<T: Real>(&self, grid: &GridSpec<T>, mass_scale: f64) -> ScalarField<T> {
        let mut u = ScalarField::zeros(*grid);
        for b in &self.init {
            let c = [T::lit(b.center[0]), T::lit(b.center[1]), T::lit(b.center[2])];
            let g = ScalarField::gaussian(*grid, T::lit(b.mass * mass_scale), T::lit(b.eps), c);
            u.add_scaled(&g, T::one()).expect("same grid");
        }
        u
    }

    /// Canonical text form; `parse(dump())` reproduces the configuration.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[grid]\nd = {}\nL = {:?}\nn = {}\n", self.dim, self.half_width, self.cells);
        let _ = writeln!(s, "[kernel]\nkernel = {}", self.kernel);
        if let Some(e) = self.mollify {
            let _ = writeln!(s, "mollify = {e:?}");
        }
        let _ = writeln!(s, "\n[diffusion]\nlaw = {}", self.diffusion);
        if let Some(e) = self.regularize {
            let _ = writeln!(s, "regularize = {e:?}");
        }
        match &self.chemo {
            ChemoSpec::Convolution => {
                let _ = writeln!(s, "\n[chemo]\nmodel = convolution");
            }
            ChemoSpec::Elliptic { a, gamma, boundary } => {
                let _ = writeln!(s, "\n[chemo]\nmodel = elliptic\na = {a}\ngamma = {gamma}");
                if let Some(b) = boundary {
                    let name = if *b == Boundary::Decay { "decay" } else { "dirichlet" };
                    let _ = writeln!(s, "boundary = {name}");
                }
            }
        }
        let _ = writeln!(s, "\n[init]");
        for b in &self.init {
            let _ = write!(s, "gaussian = {:?} {:?} {:?} {:?}", b.mass, b.eps, b.center[0], b.center[1]);
            if self.dim == 3 {
                let _ = write!(s, " {:?}", b.center[2]);
            }
            s.push('\n');
        }
        let st = &self.stepper;
        let lp = st.blowup_lp.map_or("auto".to_string(), |p| format!("{p:?}"));
        let _ = writeln!(
            s,
            "\n[stepper]\ncfl_advect = {:?}\ndiff_theta = {:?}\ndt_max = {:?}\ndt_min = {:?}\nblowup_linf_factor = {:?}\nblowup_lp = {lp}\npicard_sweeps = {}\nsolver_tol = {:?}\nring_width = {:?}\nring_tol = {:?}",
            st.cfl_advect, st.diff_theta, st.dt_max, st.dt_min, st.blowup_linf_factor, st.picard_sweeps, st.solver_tol, st.ring_width, st.ring_tol
        );
        let _ = writeln!(s, "\n[run]\nt_end = {:?}\nobserve_every = {}\nseed = {}", self.t_end, self.observe_every, self.seed);
        if let Some(o) = &self.output {
            let _ = writeln!(s, "output = {}", o.display());
        }
        s
    }
}
