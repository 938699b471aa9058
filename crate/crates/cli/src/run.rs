//! Executes a [`RunConfig`] and writes its CSV files.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use volterra_exec::oracle::{mc_objective, oracle_strategy, FixedSpeed, NystromRule, StrategyRule, Twap};
use volterra_exec::{Breakdown, NystromSolver, Solution};

use crate::config::{Mode, RunConfig};
use crate::error::{RunError, Stage};
use crate::table::{Csv, Field};

pub const PATH_HEADER: [&str; 8] = ["i", "t", "I", "nu_tt", "a", "u", "Q", "Z"];
pub const BREAKDOWN_HEADER: [&str; 6] = [
    "revenue",
    "temporary_cost",
    "transient_cost",
    "running_penalty",
    "terminal_penalty",
    "total",
];

/// Runs the configured mode and returns the files written, in order.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(&config.output_dir).map_err(|source| RunError::Output {
        path: config.output_dir.display().to_string(),
        source,
    })?;
    info!(
        "mode {} with n = {} into {}",
        config.mode,
        config.n,
        config.output_dir.display()
    );
    let mut out = Output::new(&config.output_dir);
    match config.mode {
        Mode::Solve => solve(config, &mut out)?,
        Mode::Sweep => sweep(config, &mut out)?,
        Mode::Compare => compare(config, &mut out)?,
        Mode::Mc => monte_carlo(config, &mut out)?,
    }
    Ok(out.written)
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn put(&mut self, name: &str, csv: &Csv) -> Result<(), RunError> {
        let path = self.dir.join(name);
        csv.write(&path).map_err(|source| RunError::Output {
            path: path.display().to_string(),
            source,
        })?;
        info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }
}

fn solve_one(config: &RunConfig) -> Result<Solution, RunError> {
    let grid = config.grid();
    let solver = NystromSolver::new(&config.scenario, &config.kernel(), &grid).stage("nystrom-solver")?;
    solver.solve(&config.signal(), config.seed).stage("nystrom-solver")
}

/// One row per grid point.
pub fn path_csv(config: &RunConfig, sol: &Solution) -> Csv {
    let grid = config.grid();
    let p = &sol.path;
    let mut csv = Csv::new(&PATH_HEADER);
    for i in 0..grid.len() {
        csv.row(&[
            i.into(),
            grid.time(i).into(),
            p.signal[i].into(),
            sol.nu_diagonal[i].into(),
            sol.a[i].into(),
            p.speed[i].into(),
            p.inventory[i].into(),
            p.distortion[i].into(),
        ]);
    }
    csv
}

pub fn breakdown_csv(b: &Breakdown) -> Csv {
    let mut csv = Csv::new(&BREAKDOWN_HEADER);
    csv.row(&[
        b.revenue.into(),
        b.temporary_cost.into(),
        b.transient_cost.into(),
        b.running_penalty.into(),
        b.terminal_penalty.into(),
        b.total.into(),
    ]);
    csv
}

fn total(sol: &Solution) -> f64 {
    sol.path.objective.map_or(f64::NAN, |b| b.total)
}

fn solve(config: &RunConfig, out: &mut Output) -> Result<(), RunError> {
    let sol = solve_one(config)?;
    out.put("path.csv", &path_csv(config, &sol))?;
    let b = sol.path.objective.expect("solver evaluates the objective");
    out.put("breakdown.csv", &breakdown_csv(&b))
}

fn sweep(config: &RunConfig, out: &mut Output) -> Result<(), RunError> {
    let (param, values) = config.sweep.clone().expect("sweep mode has sweep settings");
    let runs = values
        .iter()
        .map(|&v| config.with_value(&param, v).map_err(RunError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let solutions = runs.par_iter().map(solve_one).collect::<Result<Vec<_>, _>>()?;
    let short = param.rsplit('.').next().unwrap_or(&param);
    let mut summary = Csv::new(&["param", "u0", "Q_T", "total"]);
    for ((v, run), sol) in values.iter().zip(&runs).zip(&solutions) {
        out.put(&format!("path_{short}_{v}.csv"), &path_csv(run, sol))?;
        summary.row(&[(*v).into(), sol.path.speed[0].into(), sol.path.terminal_inventory().into(), total(sol).into()]);
    }
    out.put("summary.csv", &summary)
}

fn compare(config: &RunConfig, out: &mut Output) -> Result<(), RunError> {
    let runs: Vec<RunConfig> = config
        .compare
        .iter()
        .map(|kind| {
            let mut run = config.clone();
            run.kernel.kind = kind.clone();
            run
        })
        .collect();
    let solutions = runs.par_iter().map(solve_one).collect::<Result<Vec<_>, _>>()?;
    let mut summary = Csv::new(&["kernel", "u0", "Q_T", "Z_T", "total"]);
    for (run, sol) in runs.iter().zip(&solutions) {
        let kind = run.kernel.kind.as_str();
        out.put(&format!("path_{kind}.csv"), &path_csv(run, sol))?;
        let z_t = *sol.path.distortion.last().expect("non-empty path");
        summary.row(&[
            kind.into(),
            sol.path.speed[0].into(),
            sol.path.terminal_inventory().into(),
            z_t.into(),
            total(sol).into(),
        ]);
    }
    out.put("summary.csv", &summary)
}

fn monte_carlo(config: &RunConfig, out: &mut Output) -> Result<(), RunError> {
    let grid = config.grid();
    let kernel = config.kernel();
    let signal = config.signal();
    let p = &config.scenario;
    let mut rules: Vec<Box<dyn StrategyRule<f64>>> = Vec::new();
    if p.phi == 0.0 {
        let solver = NystromSolver::new(p, &kernel, &grid).stage("nystrom-solver")?;
        rules.push(Box::new(NystromRule::new(solver, signal.clone())));
    } else {
        warn!("phi = {} > 0: skipping the Nystrom strategy", p.phi);
    }
    rules.push(Box::new(Twap::new(p, &grid)));
    if signal.is_deterministic() {
        let speed = oracle_strategy(p, &kernel, &signal, &grid).stage("lq-oracle")?;
        rules.push(Box::new(FixedSpeed {
            label: "oracle".into(),
            speed,
        }));
    } else {
        info!("stochastic signal: the pathwise oracle is not adapted, skipping it");
    }
    let mut csv = Csv::new(&["strategy", "mean", "stderr", "n_paths", "seed"]);
    for rule in &rules {
        let est = mc_objective(p, &kernel, &signal, &grid, rule.as_ref(), config.mc_paths, config.seed)
            .stage("lq-oracle")?;
        info!("{}: {} ± {}", rule.name(), est.mean, est.stderr);
        csv.row(&[
            Field::from(rule.name()),
            est.mean.into(),
            est.stderr.into(),
            est.n_paths.into(),
            est.seed.into(),
        ]);
    }
    out.put("mc_summary.csv", &csv)
}
