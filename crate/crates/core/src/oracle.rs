//! Independent verification path.
//!
//! For deterministic signals the discrete objective is a concave quadratic
//! in `u[0..n]` and is maximized directly. For stochastic signals,
//! strategies are compared by Monte Carlo with common random numbers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{IntegratedIncrements, Propagator};
use crate::linalg::{dot, max_abs, Cholesky, Matrix};
use crate::model::{evaluate_objective, price_from_signal, rollout_with, ScenarioParams, TimeGrid};
use crate::nystrom::NystromSolver;
use crate::scalar::{pairwise_sum, Scalar};
use crate::signals::{nu_matrix, SignalModel};

/// `J(u) = uᵀ H u / 2 + bᵀ u + c0` over the `n` speeds that enter the
/// left-endpoint objective.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteQuadraticProgram<T> {
    pub h: Matrix<T>,
    pub b: Vec<T>,
    pub c0: T,
}

impl<T: Scalar> DiscreteQuadraticProgram<T> {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Objective value; extra trailing entries of `u` (the speed at the
    /// horizon) are ignored.
    pub fn value(&self, u: &[T]) -> T {
        let u = &u[..self.dim()];
        let hu = self.h.mul_vec(u);
        T::lit(0.5) * dot(u, &hu) + dot(&self.b, u) + self.c0
    }

    /// `H u + b`.
    pub fn gradient(&self, u: &[T]) -> Vec<T> {
        let u = &u[..self.dim()];
        self.h
            .mul_vec(u)
            .into_iter()
            .zip(&self.b)
            .map(|(x, &y)| x + y)
            .collect()
    }
}

/// Exact quadratic form of the discrete objective for a fixed price path.
pub fn assemble_qp<T: Scalar>(
    params: &ScenarioParams<T>,
    inc: &IntegratedIncrements<T>,
    grid: &TimeGrid<T>,
    price: &[T],
) -> Result<DiscreteQuadraticProgram<T>> {
    let n = grid.steps();
    if price.len() != n + 1 {
        return Err(Error::LengthMismatch {
            what: "price",
            expected: n + 1,
            actual: price.len(),
        });
    }
    let dt = grid.dt();
    let two = T::lit(2.0);
    let q = params.q;
    let (lambda, varrho, phi) = (params.lambda, params.varrho, params.phi);
    let lg = inc.lg();
    let h0 = params.h0.values(grid)?;
    let p_n = price[n];

    let h = Matrix::from_fn(n, n, |i, j| {
        let mut v = -two * varrho * dt * dt - dt * (lg[(i, j)] + lg[(j, i)]);
        if i == j {
            v -= two * lambda * dt;
        }
        if phi != T::zero() {
            let shared = T::from_usize_lossy(n - 1 - i.max(j));
            v -= two * phi * dt * dt * dt * shared;
        }
        v
    });
    let b = (0..n)
        .map(|j| {
            let later = T::from_usize_lossy(n - 1 - j);
            dt * (price[j] - p_n) - dt * h0[j] + two * varrho * q * dt + two * phi * q * dt * dt * later
        })
        .collect();
    let c0 = q * p_n - varrho * q * q - phi * dt * T::from_usize_lossy(n) * q * q;
    Ok(DiscreteQuadraticProgram { h, b, c0 })
}

/// Maximizer `u = -H⁻¹ b` through a Cholesky factorization of `-H`.
pub fn solve_qp<T: Scalar>(qp: &DiscreteQuadraticProgram<T>) -> Result<Vec<T>> {
    let neg = qp.h.scale(-T::one());
    let chol = Cholesky::new(&neg).map_err(|e| Error::NotConcave(e.to_string()))?;
    let u = chol.solve(&qp.b);
    let residual = max_abs(&qp.gradient(&u));
    let bnorm = max_abs(&qp.b);
    if residual > T::lit(1e-8) * bnorm.max(T::min_positive_value()) {
        return Err(Error::Factorization(format!(
            "QP residual {} exceeds tolerance",
            residual.to_f64_lossy()
        )));
    }
    Ok(u)
}

/// Oracle strategy on the `n + 1` grid points for a deterministic signal.
/// The horizon speed `u[n]` does not enter the objective; it repeats
/// `u[n-1]`.
pub fn oracle_strategy<T: Scalar>(
    params: &ScenarioParams<T>,
    kernel: &Propagator<T>,
    signal: &SignalModel<T>,
    grid: &TimeGrid<T>,
) -> Result<Vec<T>> {
    if !signal.is_deterministic() {
        return Err(Error::StochasticSignal);
    }
    params.validate()?;
    let inc = IntegratedIncrements::new(kernel, params, grid)?;
    let path = signal.realize(grid, 0, 0)?;
    let price = price_from_signal(&path, grid)?;
    let qp = assemble_qp(params, &inc, grid, &price)?;
    let mut u = solve_qp(&qp)?;
    let last = *u.last().expect("n >= 2");
    u.push(last);
    Ok(u)
}

/// Maps a realized signal path to a speed vector on the grid. Rules must be
/// non-anticipative for Monte Carlo comparisons to be meaningful.
pub trait StrategyRule<T>: Sync {
    fn name(&self) -> &str;
    fn speed(&self, signal_path: &[T]) -> Result<Vec<T>>;
}

/// Constant-rate liquidation `u = q / T`.
#[derive(Debug, Clone)]
pub struct Twap<T> {
    rate: T,
    len: usize,
}

impl<T: Scalar> Twap<T> {
    pub fn new(params: &ScenarioParams<T>, grid: &TimeGrid<T>) -> Self {
        Self {
            rate: params.q / params.horizon,
            len: grid.len(),
        }
    }
}

impl<T: Scalar> StrategyRule<T> for Twap<T> {
    fn name(&self) -> &str {
        "twap"
    }
    fn speed(&self, _: &[T]) -> Result<Vec<T>> {
        Ok(vec![self.rate; self.len])
    }
}

/// A fixed speed vector, whatever the signal.
#[derive(Debug, Clone)]
pub struct FixedSpeed<T> {
    pub label: String,
    pub speed: Vec<T>,
}

impl<T: Scalar> StrategyRule<T> for FixedSpeed<T> {
    fn name(&self) -> &str {
        &self.label
    }
    fn speed(&self, _: &[T]) -> Result<Vec<T>> {
        Ok(self.speed.clone())
    }
}

/// The Nyström strategy; adapted because `a[i]` only reads `I[i]`.
#[derive(Debug, Clone)]
pub struct NystromRule<T> {
    solver: NystromSolver<T>,
    signal: SignalModel<T>,
}

impl<T: Scalar> NystromRule<T> {
    pub fn new(solver: NystromSolver<T>, signal: SignalModel<T>) -> Self {
        Self { solver, signal }
    }
}

impl<T: Scalar> StrategyRule<T> for NystromRule<T> {
    fn name(&self) -> &str {
        "nystrom"
    }
    fn speed(&self, signal_path: &[T]) -> Result<Vec<T>> {
        let nu = nu_matrix(&self.signal, signal_path, self.solver.grid())?;
        Ok(self.solver.speed_for(&nu)?.1)
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub n_paths: usize,
    pub seed: u64,
}

fn mean_and_stderr<T: Scalar>(values: &[T]) -> (T, T) {
    let count = T::from_usize_lossy(values.len().max(1));
    let mean = pairwise_sum(values) / count;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let sq: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / T::from_usize_lossy(values.len() - 1);
    (mean, (var / count).sqrt())
}

/// Shared per-scenario state for pathwise evaluation.
struct PathEvaluator<'a, T> {
    params: &'a ScenarioParams<T>,
    grid: &'a TimeGrid<T>,
    inc: IntegratedIncrements<T>,
}

impl<'a, T: Scalar> PathEvaluator<'a, T> {
    fn new(params: &'a ScenarioParams<T>, kernel: &Propagator<T>, grid: &'a TimeGrid<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            grid,
            inc: IntegratedIncrements::new(kernel, params, grid)?,
        })
    }

    fn objective(&self, speed: &[T], price: &[T]) -> Result<T> {
        let path = rollout_with(speed, self.params, self.grid, &self.inc)?;
        Ok(evaluate_objective(&path, self.params, self.grid, price)?.total)
    }
}

/// Expected objective of `rule` over `n_paths` seeded signal paths.
/// Path `k` always uses the signal keyed by `(seed, k)`, so calls with the
/// same seed share random numbers across strategies.
pub fn mc_objective<T: Scalar>(
    params: &ScenarioParams<T>,
    kernel: &Propagator<T>,
    signal: &SignalModel<T>,
    grid: &TimeGrid<T>,
    rule: &dyn StrategyRule<T>,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate<T>> {
    let eval = PathEvaluator::new(params, kernel, grid)?;
    let totals = (0..n_paths as u64)
        .into_par_iter()
        .map(|k| {
            let path = signal.realize(grid, seed, k)?;
            let price = price_from_signal(&path, grid)?;
            let speed = rule.speed(&path)?;
            eval.objective(&speed, &price)
        })
        .collect::<Result<Vec<T>>>()?;
    let (mean, stderr) = mean_and_stderr(&totals);
    Ok(McEstimate {
        mean,
        stderr,
        n_paths,
        seed,
    })
}

/// Hat function on the grid peaking at `center` with half-width `width`.
pub fn hat_direction<T: Scalar>(grid: &TimeGrid<T>, center: T, width: T) -> Vec<T> {
    grid.times()
        .into_iter()
        .map(|t| (T::one() - (t - center).abs() / width).max(T::zero()))
        .collect()
}

/// Relative step sizes of the perturbation test.
pub const PERTURBATION_STEPS: [f64; 4] = [-0.2, -0.05, 0.05, 0.2];

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationEntry<T> {
    pub direction: usize,
    pub center: T,
    pub epsilon: T,
    /// Estimate of `E[J(u* + eps v)] - E[J(u*)]`.
    pub mean_diff: T,
    pub stderr: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport<T> {
    /// `‖u*‖∞` of the strategy on the noise-free signal; steps scale with it.
    pub scale: T,
    /// Mean of `J(u*)`.
    pub base: McEstimate<T>,
    pub entries: Vec<PerturbationEntry<T>>,
    pub pass: bool,
}

impl<T: Scalar> PerturbationReport<T> {
    pub fn worst(&self) -> Option<&PerturbationEntry<T>> {
        self.entries.iter().max_by(|a, b| {
            let ka = a.mean_diff - T::lit(2.0) * a.stderr;
            let kb = b.mean_diff - T::lit(2.0) * b.stderr;
            ka.partial_cmp(&kb).expect("finite")
        })
    }
}

/// Behavioral optimality check of the Nyström strategy: no deterministic
/// hat perturbation may raise the expected objective by more than two
/// standard errors, or by more than `abs_tol` when the estimate has no
/// sampling noise.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_test<T: Scalar>(
    params: &ScenarioParams<T>,
    kernel: &Propagator<T>,
    signal: &SignalModel<T>,
    grid: &TimeGrid<T>,
    n_paths: usize,
    n_perturbations: usize,
    seed: u64,
    steps: &[f64],
    abs_tol: T,
) -> Result<PerturbationReport<T>> {
    let solver = NystromSolver::new(params, kernel, grid)?;
    let eval = PathEvaluator::new(params, kernel, grid)?;

    let calm = match signal {
        SignalModel::Ou(ou) => SignalModel::Ou(crate::signals::OuSignal { sigma: T::zero(), ..*ou }),
        other => other.clone(),
    };
    let calm_path = calm.realize(grid, seed, 0)?;
    let calm_nu = nu_matrix(&calm, &calm_path, grid)?;
    let scale = max_abs(&solver.speed_for(&calm_nu)?.1);

    let spacing = grid.horizon() / T::from_usize_lossy(n_perturbations + 1);
    let directions: Vec<(T, Vec<T>)> = (0..n_perturbations)
        .map(|p| {
            let center = spacing * T::from_usize_lossy(p + 1);
            (center, hat_direction(grid, center, spacing))
        })
        .collect();
    let combos: Vec<(usize, T)> = (0..n_perturbations)
        .flat_map(|p| steps.iter().map(move |&s| (p, T::lit(s))))
        .collect();

    // per path: J(u*) and the differences for every (direction, step)
    let per_path = (0..n_paths as u64)
        .into_par_iter()
        .map(|k| -> Result<(T, Vec<T>)> {
            let path = signal.realize(grid, seed, k)?;
            let price = price_from_signal(&path, grid)?;
            let nu = nu_matrix(signal, &path, grid)?;
            let u = solver.speed_for(&nu)?.1;
            let base = eval.objective(&u, &price)?;
            let diffs = combos
                .iter()
                .map(|&(p, rel)| {
                    let eps = rel * scale;
                    let bumped: Vec<T> = u
                        .iter()
                        .zip(&directions[p].1)
                        .map(|(&x, &v)| x + eps * v)
                        .collect();
                    Ok(eval.objective(&bumped, &price)? - base)
                })
                .collect::<Result<Vec<T>>>()?;
            Ok((base, diffs))
        })
        .collect::<Result<Vec<_>>>()?;

    let bases: Vec<T> = per_path.iter().map(|(b, _)| *b).collect();
    let (base_mean, base_se) = mean_and_stderr(&bases);
    let entries: Vec<PerturbationEntry<T>> = combos
        .iter()
        .enumerate()
        .map(|(c, &(p, rel))| {
            let column: Vec<T> = per_path.iter().map(|(_, d)| d[c]).collect();
            let (mean_diff, stderr) = mean_and_stderr(&column);
            PerturbationEntry {
                direction: p,
                center: directions[p].0,
                epsilon: rel * scale,
                mean_diff,
                stderr,
                pass: mean_diff <= T::lit(2.0) * stderr + abs_tol,
            }
        })
        .collect();
    Ok(PerturbationReport {
        scale,
        base: McEstimate {
            mean: base_mean,
            stderr: base_se,
            n_paths,
            seed,
        },
        pass: entries.iter().all(|e| e.pass),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn baseline() -> ScenarioParams<f64> {
        ScenarioParams::new(10.0, 10.0, 0.5, 4.0, 0.0).unwrap()
    }

    #[test]
    fn no_transient_qp_entries() {
        let p = baseline();
        let g = TimeGrid::uniform(10.0, 5).unwrap();
        let inc = IntegratedIncrements::new(&Propagator::Zero, &p, &g).unwrap();
        let qp = assemble_qp(&p, &inc, &g, &[0.0; 6]).unwrap();
        let dt = 2.0;
        for i in 0..5 {
            assert_relative_eq!(qp.b[i], 2.0 * 4.0 * 10.0 * dt);
            for j in 0..5 {
                let want = -2.0 * 4.0 * dt * dt - if i == j { 2.0 * 0.5 * dt } else { 0.0 };
                assert_relative_eq!(qp.h[(i, j)], want);
            }
        }
        assert_relative_eq!(qp.c0, -400.0);
        assert_eq!(qp.value(&[0.0; 5]), qp.c0);
        let u: Vec<f64> = (0..5).map(|k| k as f64 - 1.7).collect();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let quad = 0.5 * dot(&u, &qp.h.mul_vec(&u));
        assert_relative_eq!(qp.value(&u) - quad - qp.c0, -(qp.value(&neg) - quad - qp.c0), epsilon = 1e-10);
    }

    #[test]
    fn zero_rhs_gives_zero_speed() {
        let qp = DiscreteQuadraticProgram {
            h: Matrix::from_fn(3, 3, |i, j| if i == j { -2.0 } else { -0.5 }),
            b: vec![0.0; 3],
            c0: 1.0,
        };
        assert_eq!(solve_qp(&qp).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn rejects_convex_program() {
        let qp = DiscreteQuadraticProgram {
            h: Matrix::identity(3),
            b: vec![1.0; 3],
            c0: 0.0,
        };
        assert!(matches!(solve_qp(&qp), Err(Error::NotConcave(_))));
    }

    #[test]
    fn oracle_refuses_stochastic_signal() {
        let g = TimeGrid::uniform(10.0, 8).unwrap();
        let s = SignalModel::ou(2.0, 0.3, 0.5).unwrap();
        assert!(matches!(
            oracle_strategy(&baseline(), &Propagator::Zero, &s, &g),
            Err(Error::StochasticSignal)
        ));
    }

    #[test]
    fn mc_trivial_cases() {
        let g = TimeGrid::uniform(10.0, 20).unwrap();
        let p = ScenarioParams::new(10.0, 10.0, 0.5, 4.0, 0.3).unwrap();
        let k = Propagator::exponential(1.0, 0.5).unwrap();
        let idle = FixedSpeed { label: "idle".into(), speed: vec![0.0; 21] };
        let est = mc_objective(&p, &k, &SignalModel::Zero, &g, &idle, 8, 3).unwrap();
        assert_relative_eq!(est.mean, -4.0 * 100.0 - 0.3 * 100.0 * 10.0, max_relative = 1e-14);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn hat_is_unit_peak() {
        let g = TimeGrid::uniform(4.0, 8).unwrap();
        let v = hat_direction(&g, 2.0, 1.0);
        assert_eq!(v, vec![0.0, 0.0, 0.0, 0.5, 1.0, 0.5, 0.0, 0.0, 0.0]);
    }
}
