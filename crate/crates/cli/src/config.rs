//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment. Keys carry a section prefix
//! (`scenario.q`, `kernel.alpha`, `signal.type`, ...). Unknown keys and
//! repeated keys are errors. Relative file paths resolve against the
//! directory of the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use volterra_exec::linalg::Matrix;
use volterra_exec::{Grid, InitialDistortion, Kernel, Scenario, Signal, SignalModel};

use crate::error::ConfigError;
use crate::table;

/// Keys the parser accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "mode",
    "seed",
    "output_dir",
    "grid.n",
    "scenario.q",
    "scenario.T",
    "scenario.lambda",
    "scenario.varrho",
    "scenario.phi",
    "scenario.h0",
    "scenario.h0_file",
    "kernel.type",
    "kernel.c",
    "kernel.rho",
    "kernel.alpha",
    "kernel.beta",
    "kernel.ell0",
    "kernel.file",
    "signal.type",
    "signal.I0",
    "signal.gamma",
    "signal.sigma",
    "signal.file",
    "signal.nu_file",
    "sweep.param",
    "sweep.values",
    "compare.kernels",
    "mc.n_paths",
];

/// Keys without a default.
pub const REQUIRED_KEYS: &[&str] = &["mode", "kernel.type", "output_dir"];

/// Numeric keys a sweep may vary.
pub const SWEEPABLE: &[&str] = &[
    "scenario.q",
    "scenario.T",
    "scenario.lambda",
    "scenario.varrho",
    "scenario.phi",
    "scenario.h0",
    "kernel.c",
    "kernel.rho",
    "kernel.alpha",
    "kernel.beta",
    "kernel.ell0",
    "signal.I0",
    "signal.gamma",
    "signal.sigma",
];

pub const DEFAULT_GRID_N: usize = 500;
pub const DEFAULT_MC_PATHS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Sweep,
    Compare,
    Mc,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solve" => Ok(Self::Solve),
            "sweep" => Ok(Self::Sweep),
            "compare" => Ok(Self::Compare),
            "mc" => Ok(Self::Mc),
            other => Err(format!("unknown mode `{other}` (expected solve, sweep, compare or mc)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Solve => "solve",
            Self::Sweep => "sweep",
            Self::Compare => "compare",
            Self::Mc => "mc",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// 1-based line, or 0 for values set from the command line.
    line: usize,
}

/// Raw entries in key order, kept so sweeps can rebuild the config with a
/// single value replaced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Entries {
    map: BTreeMap<String, Entry>,
    base_dir: PathBuf,
}

impl Entries {
    /// Splits `text` into entries, rejecting malformed lines and unknown or
    /// repeated keys.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.trim().to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if let Some(prev) = map.get(key) {
                let Entry { line: first, .. } = prev;
                return Err(ConfigError::DuplicateKey {
                    line,
                    first: *first,
                    key: key.to_string(),
                });
            }
            map.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self {
            map,
            base_dir: base_dir.to_path_buf(),
        })
    }

    /// Sets `key`, replacing any value from the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.map.insert(
            key.to_string(),
            Entry {
                value: value.into(),
                line: 0,
            },
        );
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.line)
    }

    fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            line: self.line(key),
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>, ConfigError>
    where
        V::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<V>().map_err(|e| self.invalid(key, format!("`{v}`: {e}"))))
            .transpose()
    }

    fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V, ConfigError>
    where
        V::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|p| self.base_dir.join(p))
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Kernel family and its coefficients, resolved against a horizon when
/// the run is built.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: String,
    pub c: f64,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub ell0: Option<f64>,
    pub table: Option<Vec<f64>>,
}

impl KernelSpec {
    fn from_entries(kind: &str, e: &Entries) -> Result<Self, ConfigError> {
        let table = match e.path("kernel.file") {
            Some(p) => Some(table::read_column(&p).map_err(|r| e.invalid("kernel.file", r))?),
            None => None,
        };
        let spec = Self {
            kind: kind.to_string(),
            c: e.get_or("kernel.c", 1.0)?,
            rho: e.get("kernel.rho")?,
            alpha: e.get("kernel.alpha")?,
            beta: e.get("kernel.beta")?,
            ell0: e.get("kernel.ell0")?,
            table,
        };
        spec.build(1.0).map_err(|reason| match reason {
            KernelProblem::Missing(key) => e.invalid(key, format!("required for kernel.type = {kind}")),
            KernelProblem::Invalid(key, why) => e.invalid(key, why),
        })?;
        Ok(spec)
    }

    fn build(&self, horizon: f64) -> Result<Kernel, KernelProblem> {
        let need = |v: Option<f64>, key: &'static str| v.ok_or(KernelProblem::Missing(key));
        let checked = |r: volterra_exec::Result<Kernel>, key: &'static str| {
            r.map_err(|err| KernelProblem::Invalid(key, err.to_string()))
        };
        match self.kind.as_str() {
            "zero" => Ok(Kernel::Zero),
            "exponential" => checked(Kernel::exponential(self.c, need(self.rho, "kernel.rho")?), "kernel.rho"),
            "fractional" => checked(Kernel::fractional(self.c, need(self.alpha, "kernel.alpha")?), "kernel.alpha"),
            "power_law" => checked(
                Kernel::bounded_power_law(need(self.ell0, "kernel.ell0")?, need(self.beta, "kernel.beta")?),
                "kernel.beta",
            ),
            "tabulated" => {
                let values = self.table.clone().ok_or(KernelProblem::Missing("kernel.file"))?;
                checked(Kernel::tabulated(horizon, values), "kernel.file")
            }
            other => Err(KernelProblem::Invalid(
                "kernel.type",
                format!("unknown kernel `{other}` (expected zero, exponential, fractional, power_law or tabulated)"),
            )),
        }
    }

    /// The kernel over `[0, horizon]`.
    pub fn kernel(&self, horizon: f64) -> Kernel {
        self.build(horizon).expect("validated when the config was built")
    }
}

#[derive(Debug)]
enum KernelProblem {
    Missing(&'static str),
    Invalid(&'static str, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    Zero,
    Ou { i0: f64, gamma: f64, sigma: f64 },
    Tabulated { values: Vec<f64>, nu: Option<Matrix<f64>> },
}

impl SignalSpec {
    fn from_entries(e: &Entries) -> Result<Self, ConfigError> {
        let kind: String = e.get_or("signal.type", "zero".to_string())?;
        match kind.as_str() {
            "zero" => Ok(Self::Zero),
            "ou" => {
                let spec = Self::Ou {
                    i0: e.get_or("signal.I0", 0.0)?,
                    gamma: e.get_or("signal.gamma", 0.0)?,
                    sigma: e.get_or("signal.sigma", 0.0)?,
                };
                spec.model().map_err(|err| e.invalid("signal.type", err.to_string()))?;
                Ok(spec)
            }
            "tabulated" => {
                let file = e
                    .path("signal.file")
                    .ok_or_else(|| e.invalid("signal.file", "required for signal.type = tabulated"))?;
                let values = table::read_column(&file).map_err(|r| e.invalid("signal.file", r))?;
                let nu = match e.path("signal.nu_file") {
                    Some(p) => Some(table::read_matrix(&p).map_err(|r| e.invalid("signal.nu_file", r))?),
                    None => None,
                };
                Ok(Self::Tabulated { values, nu })
            }
            other => Err(e.invalid(
                "signal.type",
                format!("unknown signal `{other}` (expected zero, ou or tabulated)"),
            )),
        }
    }

    pub fn model(&self) -> volterra_exec::Result<Signal> {
        match self {
            Self::Zero => Ok(SignalModel::Zero),
            Self::Ou { i0, gamma, sigma } => SignalModel::ou(*i0, *gamma, *sigma),
            Self::Tabulated { values, nu } => Ok(SignalModel::TabulatedPath {
                values: values.clone(),
                nu: nu.clone(),
            }),
        }
    }
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub scenario: Scenario,
    pub kernel: KernelSpec,
    pub signal: SignalSpec,
    pub n: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Parameter key and its values, for [`Mode::Sweep`].
    pub sweep: Option<(String, Vec<f64>)>,
    /// Kernel families for [`Mode::Compare`]; each reads its coefficients
    /// from the `kernel.*` keys.
    pub compare: Vec<String>,
    pub mc_paths: usize,
    pub entries: Entries,
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::uniform(self.scenario.horizon, self.n).expect("validated when the config was built")
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel.kernel(self.scenario.horizon)
    }

    pub fn signal(&self) -> Signal {
        self.signal.model().expect("validated when the config was built")
    }

    /// The same run with `key` set to `value`.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self, ConfigError> {
        let mut entries = self.entries.clone();
        entries.set(key, value.to_string());
        Self::from_entries(entries)
    }

    pub fn from_entries(e: Entries) -> Result<Self, ConfigError> {
        let compare = e.list("compare.kernels");
        let mut missing: Vec<&str> = REQUIRED_KEYS
            .iter()
            .copied()
            .filter(|k| e.raw(k).is_none())
            .collect();
        // compare mode names its kernels itself
        if !compare.is_empty() && e.raw("mode") == Some("compare") {
            missing.retain(|k| *k != "kernel.type");
        }
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys(missing.join(", ")));
        }

        let mode: Mode = e.get("mode")?.expect("checked above");
        let n: usize = e.get_or("grid.n", DEFAULT_GRID_N)?;
        if n < 2 {
            return Err(e.invalid("grid.n", "need at least 2 steps"));
        }
        let scenario = scenario_from(&e)?;
        Grid::uniform(scenario.horizon, n).map_err(|err| e.invalid("scenario.T", err.to_string()))?;

        let first_kind = match e.raw("kernel.type") {
            Some(k) => k.to_string(),
            None => compare[0].clone(),
        };
        let kernel = KernelSpec::from_entries(&first_kind, &e)?;
        for kind in &compare {
            KernelSpec::from_entries(kind, &e)?;
        }
        let signal = SignalSpec::from_entries(&e)?;

        let sweep = match mode {
            Mode::Sweep => {
                let param: String = e
                    .get("sweep.param")?
                    .ok_or_else(|| ConfigError::MissingKeys("sweep.param, sweep.values".into()))?;
                if !SWEEPABLE.contains(&param.as_str()) {
                    return Err(e.invalid(
                        "sweep.param",
                        format!("`{param}` cannot be swept (choose one of {})", SWEEPABLE.join(", ")),
                    ));
                }
                let values = e
                    .list("sweep.values")
                    .iter()
                    .map(|v| v.parse::<f64>().map_err(|err| e.invalid("sweep.values", format!("`{v}`: {err}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.is_empty() {
                    return Err(ConfigError::MissingKeys("sweep.values".into()));
                }
                Some((param, values))
            }
            _ => None,
        };
        if mode == Mode::Compare && compare.is_empty() {
            return Err(ConfigError::MissingKeys("compare.kernels".into()));
        }
        if scenario.phi > 0.0 && matches!(mode, Mode::Solve | Mode::Sweep | Mode::Compare) {
            return Err(e.invalid(
                "scenario.phi",
                format!(
                    "phi > 0 is not supported by the Nystrom solver used in {mode} mode; \
                     use mode = mc, which evaluates TWAP and, for a deterministic signal, the LQ oracle"
                ),
            ));
        }

        Ok(Self {
            mode,
            scenario,
            kernel,
            signal,
            n,
            seed: e.get_or("seed", 0)?,
            output_dir: e.path("output_dir").expect("checked above"),
            sweep,
            compare,
            mc_paths: e.get_or("mc.n_paths", DEFAULT_MC_PATHS)?,
            entries: e,
        })
    }
}

fn scenario_from(e: &Entries) -> Result<Scenario, ConfigError> {
    let base = Scenario::new(
        e.get_or("scenario.q", 10.0)?,
        e.get_or("scenario.T", 10.0)?,
        e.get_or("scenario.lambda", 0.5)?,
        e.get_or("scenario.varrho", 4.0)?,
        e.get_or("scenario.phi", 0.0)?,
    )
    .map_err(|err| e.invalid(scenario_key(&err), err.to_string()))?;
    let h0 = match (e.get::<f64>("scenario.h0")?, e.path("scenario.h0_file")) {
        (Some(_), Some(_)) => {
            return Err(e.invalid("scenario.h0_file", "give either scenario.h0 or scenario.h0_file"));
        }
        (Some(c), None) => InitialDistortion::Constant(c),
        (None, Some(p)) => InitialDistortion::Tabulated(
            table::read_column(&p).map_err(|r| e.invalid("scenario.h0_file", r))?,
        ),
        (None, None) => InitialDistortion::Zero,
    };
    Ok(base.with_h0(h0))
}

fn scenario_key(err: &volterra_exec::Error) -> &'static str {
    match err {
        volterra_exec::Error::InvalidParameter { name, .. } => match *name {
            "q" => "scenario.q",
            "T" | "horizon" => "scenario.T",
            "lambda" => "scenario.lambda",
            "varrho" => "scenario.varrho",
            "phi" => "scenario.phi",
            _ => "scenario",
        },
        _ => "scenario",
    }
}

/// Parses config text; relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    RunConfig::from_entries(Entries::parse(text, base_dir)?)
}
