//! Nyström discretization of the optimal-speed Volterra equation
//! `u = a + B ★ u` for the problem without running inventory penalty.
//!
//! With `d_{t_i}[k][j] = L[k][j] 1{i <= j < n} + U[k][j] 1{i <= k < n}` the
//! matrix `D_{t_i} = 2 lambda I_n + d_{t_i}` equals `2 lambda I` outside the
//! trailing block `[i, n)²` and coincides with `D_{t_0}` on it. Since the
//! truncated row `U_i` also vanishes before `i`, every product
//! `U_iᵀ D_{t_i}⁻¹ f` only needs the trailing block of `D_{t_0}`. One
//! reversed-order LU of `D_{t_0}` therefore serves all `n + 1` steps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{IntegratedIncrements, Propagator};
use crate::linalg::{dot, Matrix, TrailingLu};
use crate::model::{evaluate_objective, price_from_signal, rollout_with, ScenarioParams, StrategyPath, TimeGrid};
use crate::scalar::Scalar;
use crate::signals::{nu_matrix, NuMatrix, SignalModel};

/// Factored `D_{t_i}` for all steps plus the adjoint vectors
/// `w_i = D_{t_i}⁻ᵀ U_i` restricted to `[i, n)`.
#[derive(Debug, Clone)]
pub struct DFactors<T> {
    lambda: T,
    d0: Matrix<T>,
    lu: TrailingLu<T>,
    adjoints: Vec<Vec<T>>,
}

impl<T: Scalar> DFactors<T> {
    /// Number of rows of each `D_{t_i}`, i.e. `n`.
    pub fn dim(&self) -> usize {
        self.d0.rows()
    }

    /// Explicit `D_{t_i}` as an `n × n` matrix.
    pub fn matrix(&self, i: usize) -> Matrix<T> {
        let two_lambda = T::lit(2.0) * self.lambda;
        let n = self.dim();
        Matrix::from_fn(n, n, |k, j| {
            if k >= i && j >= i {
                self.d0[(k, j)]
            } else if k == j {
                two_lambda
            } else {
                T::zero()
            }
        })
    }

    /// `w_i` on `[i, n)`; empty for `i = n`.
    pub fn adjoint(&self, i: usize) -> &[T] {
        &self.adjoints[i]
    }
}

fn require_no_running_penalty<T: Scalar>(params: &ScenarioParams<T>) -> Result<()> {
    if params.phi != T::zero() {
        return Err(Error::RunningPenaltyUnsupported {
            phi: params.phi.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Truncated row `U_i = (U[i][0], …, U[i][n-1])`, returned on `[i, n)`
/// where it is supported.
fn truncated_u_row<T: Scalar>(inc: &IntegratedIncrements<T>, i: usize, n: usize) -> &[T] {
    &inc.u().row(i)[i.min(n)..n]
}

/// Assembles and factors `D_{t_i}`, `i = 0..=n`.
pub fn build_d<T: Scalar>(
    inc: &IntegratedIncrements<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
) -> Result<DFactors<T>> {
    require_no_running_penalty(params)?;
    let n = grid.steps();
    let two_lambda = T::lit(2.0) * params.lambda;
    // on [0, n)² the L and U supports are disjoint
    let d0 = Matrix::from_fn(n, n, |k, j| {
        let base = inc.l()[(k, j)] + inc.u()[(k, j)];
        if k == j {
            base + two_lambda
        } else {
            base
        }
    });
    let lu = TrailingLu::new(&d0)?;
    let adjoints: Vec<Vec<T>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            if i == n {
                Vec::new()
            } else {
                lu.solve_trailing_transpose(i, truncated_u_row(inc, i, n))
            }
        })
        .collect();
    Ok(DFactors {
        lambda: params.lambda,
        d0,
        lu,
        adjoints,
    })
}

/// `U_iᵀ D_{t_i}⁻¹ f` for an `n`-vector `f`.
pub fn gamma_inner<T: Scalar>(
    i: usize,
    f: &[T],
    inc: &IntegratedIncrements<T>,
    factors: &DFactors<T>,
) -> Result<T> {
    let n = factors.dim();
    if f.len() != n {
        return Err(Error::LengthMismatch {
            what: "gamma_inner rhs",
            expected: n,
            actual: f.len(),
        });
    }
    if i >= n {
        return Ok(T::zero());
    }
    let x = factors.lu.solve_trailing(i, &f[i..]);
    Ok(dot(truncated_u_row(inc, i, n), &x))
}

/// Strictly lower triangular `B[i][j] = (U_iᵀ D⁻¹ L^(j) - L[i][j]) / 2 lambda`.
pub fn build_b<T: Scalar>(
    inc: &IntegratedIncrements<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    factors: &DFactors<T>,
) -> Result<Matrix<T>> {
    require_no_running_penalty(params)?;
    let n = grid.steps();
    let size = n + 1;
    let inv_two_lambda = T::one() / (T::lit(2.0) * params.lambda);
    let l = inc.l();
    let rows: Vec<Vec<T>> = (0..size)
        .into_par_iter()
        .map(|i| {
            let w = factors.adjoint(i);
            let mut row = vec![T::zero(); size];
            for (j, b) in row.iter_mut().enumerate().take(i) {
                // L^(j) restricted to rows [i, n)
                let mut s = T::zero();
                for (offset, &wk) in w.iter().enumerate() {
                    s += wk * l[(i + offset, j)];
                }
                *b = inv_two_lambda * (s - l[(i, j)]);
            }
            row
        })
        .collect();
    Matrix::from_rows(size, size, rows.concat())
}

/// `a_i = (N[i][i] - h̃0(t_i) - U_iᵀ D⁻¹ N^i + U_iᵀ D⁻¹ h̃0) / 2 lambda`.
pub fn build_a<T: Scalar>(
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    nu: &NuMatrix<T>,
    h_tilde: &[T],
    factors: &DFactors<T>,
) -> Result<Vec<T>> {
    require_no_running_penalty(params)?;
    let n = grid.steps();
    if h_tilde.len() != n + 1 {
        return Err(Error::LengthMismatch {
            what: "h_tilde",
            expected: n + 1,
            actual: h_tilde.len(),
        });
    }
    if nu.matrix().rows() != n + 1 {
        return Err(Error::LengthMismatch {
            what: "nu matrix",
            expected: n + 1,
            actual: nu.matrix().rows(),
        });
    }
    let inv_two_lambda = T::one() / (T::lit(2.0) * params.lambda);
    Ok((0..=n)
        .map(|i| {
            let w = factors.adjoint(i);
            let mut coupled = T::zero();
            for (offset, &wk) in w.iter().enumerate() {
                let k = i + offset;
                coupled += wk * (h_tilde[k] - nu.get(k, i));
            }
            inv_two_lambda * (nu.get(i, i) - h_tilde[i] + coupled)
        })
        .collect())
}

/// Solves `(I - B) u = a` by forward substitution; `B` must be strictly
/// lower triangular (entries on or above the diagonal are ignored).
pub fn solve_u<T: Scalar>(a: &[T], b: &Matrix<T>) -> Result<Vec<T>> {
    if b.rows() != a.len() || b.cols() != a.len() {
        return Err(Error::LengthMismatch {
            what: "B",
            expected: a.len(),
            actual: b.rows(),
        });
    }
    let mut u = Vec::with_capacity(a.len());
    for (i, &ai) in a.iter().enumerate() {
        let s = dot(&b.row(i)[..i], &u[..i]);
        u.push(ai + s);
    }
    Ok(u)
}

/// Signal-independent part of the scheme for one scenario, kernel and grid.
#[derive(Debug, Clone)]
pub struct NystromSolver<T> {
    params: ScenarioParams<T>,
    grid: TimeGrid<T>,
    increments: IntegratedIncrements<T>,
    factors: DFactors<T>,
    b: Matrix<T>,
    h_tilde: Vec<T>,
}

/// Output of [`NystromSolver::solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSolution<T> {
    pub path: StrategyPath<T>,
    pub a: Vec<T>,
    /// `N[i][i]`, the expected price change from `t_i` to the horizon.
    pub nu_diagonal: Vec<T>,
    pub price: Vec<T>,
}

impl<T: Scalar> NystromSolver<T> {
    pub fn new(params: &ScenarioParams<T>, kernel: &Propagator<T>, grid: &TimeGrid<T>) -> Result<Self> {
        params.validate()?;
        require_no_running_penalty(params)?;
        let increments = IntegratedIncrements::new(kernel, params, grid)?;
        let factors = build_d(&increments, params, grid)?;
        let b = build_b(&increments, params, grid, &factors)?;
        let h_tilde = params.transformed(kernel).h_tilde0(grid)?;
        Ok(Self {
            params: params.clone(),
            grid: *grid,
            increments,
            factors,
            b,
            h_tilde,
        })
    }

    pub fn params(&self) -> &ScenarioParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn increments(&self) -> &IntegratedIncrements<T> {
        &self.increments
    }

    pub fn factors(&self) -> &DFactors<T> {
        &self.factors
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    /// `a` and `u` for a given conditional-expectation matrix.
    pub fn speed_for(&self, nu: &NuMatrix<T>) -> Result<(Vec<T>, Vec<T>)> {
        let a = build_a(&self.params, &self.grid, nu, &self.h_tilde, &self.factors)?;
        let u = solve_u(&a, &self.b)?;
        Ok((a, u))
    }

    /// Full pipeline on one realized signal path.
    pub fn solve_path(&self, signal: &SignalModel<T>, path: &[T]) -> Result<ScenarioSolution<T>> {
        let nu = nu_matrix(signal, path, &self.grid)?;
        let (a, u) = self.speed_for(&nu)?;
        let mut strategy = rollout_with(&u, &self.params, &self.grid, &self.increments)?;
        strategy.signal = path.to_vec();
        let price = price_from_signal(path, &self.grid)?;
        strategy.objective = Some(evaluate_objective(&strategy, &self.params, &self.grid, &price)?);
        Ok(ScenarioSolution {
            path: strategy,
            a,
            nu_diagonal: nu.diagonal(),
            price,
        })
    }

    /// Simulates (or reads) the signal for `seed` and solves.
    pub fn solve(&self, signal: &SignalModel<T>, seed: u64) -> Result<ScenarioSolution<T>> {
        let path = signal.realize(&self.grid, seed, 0)?;
        self.solve_path(signal, &path)
    }
}

/// One-shot convenience: build the solver and run it.
pub fn solve_scenario<T: Scalar>(
    params: &ScenarioParams<T>,
    kernel: &Propagator<T>,
    signal: &SignalModel<T>,
    grid: &TimeGrid<T>,
    seed: u64,
) -> Result<ScenarioSolution<T>> {
    NystromSolver::new(params, kernel, grid)?.solve(signal, seed)
}
