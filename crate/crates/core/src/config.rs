//! Run configuration: flat `key = value` files with command-line overrides.
//!
//! ```text
//! # circle benchmark, contrast 10
//! beta_minus = 10
//! beta_plus = 1
//! mesh = 16, 32, 64
//! formats = csv, md
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::assembly::{AssemblyParams, Theta};
use crate::error::{Error, Result};
use crate::solver::{AuxParams, CgVariant, PcgParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    PrecondBench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Convergence => "convergence",
            Command::PrecondBench => "precond-bench",
        }
    }

    fn default_mesh(self) -> Vec<usize> {
        match self {
            Command::Solve => vec![64],
            Command::Convergence => vec![16, 32, 64, 128, 256],
            Command::PrecondBench => vec![32, 64, 128, 256, 512],
        }
    }

    /// Convergence studies solve tightly so local conservation reflects the
    /// discretization rather than the solver; benchmarks use `1e-7`.
    fn default_rtol(self) -> f64 {
        match self {
            Command::Solve | Command::Convergence => 1e-12,
            Command::PrecondBench => 1e-7,
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solve" => Ok(Command::Solve),
            "convergence" => Ok(Command::Convergence),
            "precond-bench" => Ok(Command::PrecondBench),
            _ => Err(Error::Config(format!("unknown command '{s}'"))),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Markdown,
    Vtk,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            "vtk" => Ok(OutputFormat::Vtk),
            _ => Err(Error::Config(format!("unknown output format '{s}' (expected csv, md or vtk)"))),
        }
    }
}

/// A coefficient pair `(β⁻, β⁺)`; `β⁻` is the value inside the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaCase {
    pub minus: f64,
    pub plus: f64,
}

impl BetaCase {
    pub fn label(&self) -> String {
        format!("({},{})", self.minus, self.plus)
    }
}

impl FromStr for BetaCase {
    type Err = Error;

    /// Parses `minus:plus`.
    fn from_str(s: &str) -> Result<Self> {
        let (m, p) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("coefficient case '{s}' must look like minus:plus")))?;
        Ok(BetaCase {
            minus: parse_value("cases", m)?,
            plus: parse_value("cases", p)?,
        })
    }
}

/// Settings shared by all commands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: String,
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// Coefficient cases of `precond-bench`.
    pub cases: Vec<BetaCase>,
    /// Squares per side, `h = 2/N`.
    pub mesh: Vec<usize>,
    pub theta: Theta,
    pub kappa: f64,
    /// Gauss–Seidel sweeps before and after the block corrections.
    pub ngs: usize,
    /// V-cycles per diagonal block.
    pub cycles: usize,
    pub rtol: f64,
    pub maxit: usize,
    pub variant: CgVariant,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Seed for the randomized preconditioner symmetry probe.
    pub seed: u64,
    /// Also write the assembled system in Matrix Market format.
    pub dump_system: bool,
}

pub const CONFIG_KEYS: [&str; 16] = [
    "problem",
    "beta_minus",
    "beta_plus",
    "cases",
    "mesh",
    "theta",
    "kappa",
    "ngs",
    "cycles",
    "rtol",
    "maxit",
    "variant",
    "out",
    "formats",
    "seed",
    "dump_system",
];

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            problem: "circle".into(),
            beta_minus: 1.0,
            beta_plus: 1.0,
            cases: vec![
                BetaCase { minus: 1.0, plus: 1.0 },
                BetaCase { minus: 1.0, plus: 10.0 },
                BetaCase { minus: 1.0, plus: 100.0 },
                BetaCase { minus: 1.0, plus: 1000.0 },
            ],
            mesh: command.default_mesh(),
            theta: Theta::NegOne,
            kappa: 10.0,
            ngs: 1,
            cycles: 5,
            rtol: command.default_rtol(),
            maxit: 1000,
            variant: CgVariant::Standard,
            out_dir: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Markdown],
            seed: 0,
            dump_system: false,
        }
    }

    /// Defaults for `command`, overridden by the file's entries.
    pub fn from_file(command: Command, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::new(command);
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(e))))?;
        }
        Ok(())
    }

    /// Sets one entry; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.to_string(),
            "beta_minus" => self.beta_minus = parse_value(key, value)?,
            "beta_plus" => self.beta_plus = parse_value(key, value)?,
            "cases" => self.cases = parse_list(value)?,
            "mesh" => self.mesh = parse_list(value).map_err(|_| Error::Config(format!("mesh: cannot parse '{value}'")))?,
            "theta" => self.theta = Theta::from_value(parse_value(key, value)?)?,
            "kappa" => self.kappa = parse_value(key, value)?,
            "ngs" => self.ngs = parse_value(key, value)?,
            "cycles" => self.cycles = parse_value(key, value)?,
            "rtol" => self.rtol = parse_value(key, value)?,
            "maxit" => self.maxit = parse_value(key, value)?,
            "variant" => {
                self.variant = match value {
                    "standard" => CgVariant::Standard,
                    "flexible" => CgVariant::Flexible,
                    _ => return Err(Error::Config(format!("variant: expected standard or flexible, got '{value}'"))),
                }
            }
            "out" => self.out_dir = PathBuf::from(value),
            "formats" => self.formats = parse_list(value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "dump_system" => self.dump_system = parse_value(key, value)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key '{key}' (known keys: {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Checks documented ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.problem != "circle" {
            return bad(format!("unknown problem '{}' (available: circle)", self.problem));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.beta_minus) || !positive(self.beta_plus) {
            return bad("beta_minus and beta_plus must be positive".into());
        }
        if self.cases.is_empty() || self.cases.iter().any(|c| !positive(c.minus) || !positive(c.plus)) {
            return bad("cases must be a nonempty list of positive minus:plus pairs".into());
        }
        if self.mesh.is_empty() {
            return bad("mesh list is empty".into());
        }
        if let Some(n) = self.mesh.iter().find(|&&n| n < 4) {
            return bad(format!("mesh size {n} is too small (at least 4)"));
        }
        if self.theta != Theta::NegOne {
            return bad("theta must be -1: conjugate gradients needs the symmetric form".into());
        }
        if !positive(self.kappa) {
            return bad("kappa must be positive".into());
        }
        if self.cycles == 0 {
            return bad("cycles must be at least 1".into());
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return bad("rtol must lie in (0, 1)".into());
        }
        if self.maxit == 0 {
            return bad("maxit must be at least 1".into());
        }
        if self.formats.is_empty() {
            return bad("formats is empty".into());
        }
        Ok(())
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }

    pub fn assembly_params(&self) -> AssemblyParams {
        AssemblyParams {
            theta: self.theta,
            kappa: self.kappa,
            ..AssemblyParams::default()
        }
    }

    pub fn aux_params(&self) -> AuxParams {
        AuxParams {
            smoothing_steps: self.ngs,
            amg_cycles: self.cycles,
            ..AuxParams::default()
        }
    }

    pub fn pcg_params(&self) -> PcgParams {
        PcgParams {
            rtol: self.rtol,
            maxit: self.maxit,
            variant: self.variant,
        }
    }

    /// The file form of this configuration (command excluded).
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let formats = self
            .formats
            .iter()
            .map(|f| match f {
                OutputFormat::Csv => "csv",
                OutputFormat::Markdown => "md",
                OutputFormat::Vtk => "vtk",
            })
            .map(String::from)
            .collect();
        format!(
            "problem = {}\nbeta_minus = {}\nbeta_plus = {}\ncases = {}\nmesh = {}\ntheta = {}\nkappa = {}\nngs = {}\ncycles = {}\nrtol = {:e}\nmaxit = {}\nvariant = {}\nout = {}\nformats = {}\nseed = {}\ndump_system = {}\n",
            self.problem,
            self.beta_minus,
            self.beta_plus,
            join(self.cases.iter().map(|c| format!("{}:{}", c.minus, c.plus)).collect()),
            join(self.mesh.iter().map(|n| n.to_string()).collect()),
            self.theta.value(),
            self.kappa,
            self.ngs,
            self.cycles,
            self.rtol,
            self.maxit,
            match self.variant {
                CgVariant::Standard => "standard",
                CgVariant::Flexible => "flexible",
            },
            self.out_dir.display(),
            join(formats),
            self.seed,
            self.dump_system,
        )
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>>
where
    Error: From<<T as FromStr>::Err>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(Error::from))
        .collect()
}

impl From<std::num::ParseIntError> for Error {
    fn from(e: std::num::ParseIntError) -> Self {
        Error::Parse(e.to_string())
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}
