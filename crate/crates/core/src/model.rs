//! Economic inputs, the time grid, and strategy rollout.
//!
//! Time integrals use the left-endpoint rule on the uniform grid: a speed
//! vector `u` has `n + 1` entries but only `u[0..n]` enter the dynamics and
//! the objective. `u[n]` is the speed at the horizon and is reported for
//! completeness.

use crate::error::{Error, Result};
use crate::kernels::{IntegratedIncrements, Propagator};
use crate::linalg::dot;
use crate::scalar::Scalar;

/// Initial transient distortion `h0` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDistortion<T> {
    Zero,
    Constant(T),
    /// Values at the `n + 1` grid points.
    Tabulated(Vec<T>),
}

impl<T: Scalar> InitialDistortion<T> {
    pub fn values(&self, grid: &TimeGrid<T>) -> Result<Vec<T>> {
        let len = grid.len();
        match self {
            Self::Zero => Ok(vec![T::zero(); len]),
            Self::Constant(c) => Ok(vec![*c; len]),
            Self::Tabulated(v) if v.len() == len => Ok(v.clone()),
            Self::Tabulated(v) => Err(Error::LengthMismatch {
                what: "h0 table",
                expected: len,
                actual: v.len(),
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Constant(c) => *c == T::zero(),
            Self::Tabulated(v) => v.iter().all(|x| *x == T::zero()),
        }
    }
}

/// Scenario inputs: inventory, horizon, impact and penalty coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams<T> {
    pub q: T,
    pub horizon: T,
    pub lambda: T,
    pub varrho: T,
    pub phi: T,
    pub h0: InitialDistortion<T>,
}

impl<T: Scalar> ScenarioParams<T> {
    pub fn new(q: T, horizon: T, lambda: T, varrho: T, phi: T) -> Result<Self> {
        let p = Self {
            q,
            horizon,
            lambda,
            varrho,
            phi,
            h0: InitialDistortion::Zero,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_h0(mut self, h0: InitialDistortion<T>) -> Self {
        self.h0 = h0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(name: &'static str, reason: &str) -> Error {
            Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            }
        }
        if !self.q.is_finite() {
            return Err(bad("q", "must be finite"));
        }
        if !(self.horizon > T::zero() && self.horizon.is_finite()) {
            return Err(bad("T", "must be positive and finite"));
        }
        if !(self.lambda > T::zero() && self.lambda.is_finite()) {
            return Err(bad("lambda", "must be positive"));
        }
        if !(self.varrho >= T::zero() && self.varrho.is_finite()) {
            return Err(bad("varrho", "must be nonnegative"));
        }
        if !(self.phi >= T::zero() && self.phi.is_finite()) {
            return Err(bad("phi", "must be nonnegative"));
        }
        Ok(())
    }

    /// `h0(t) - 2 varrho q` and the augmented kernel, see [`TransformedInputs`].
    pub fn transformed<'a>(&'a self, kernel: &'a Propagator<T>) -> TransformedInputs<'a, T> {
        TransformedInputs { params: self, kernel }
    }
}

/// Uniform partition `t_i = i T / n` of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    n: usize,
    horizon: T,
    dt: T,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn uniform(horizon: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("need at least 2 steps, got {n}"),
            });
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(Self {
            n,
            horizon,
            dt: horizon / T::from_usize_lossy(n),
        })
    }

    /// Number of steps.
    #[inline]
    pub fn steps(&self) -> usize {
        self.n
    }

    /// Number of grid points, `n + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    #[inline]
    pub fn horizon(&self) -> T {
        self.horizon
    }

    #[inline]
    pub fn time(&self, i: usize) -> T {
        if i == self.n {
            self.horizon
        } else {
            T::from_usize_lossy(i) * self.dt
        }
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.n).map(|i| self.time(i)).collect()
    }

    fn check_len(&self, what: &'static str, v: &[T]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch {
                what,
                expected: self.len(),
                actual: v.len(),
            });
        }
        Ok(())
    }
}

/// The five signed terms of the pathwise objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveBreakdown<T> {
    pub revenue: T,
    pub temporary_cost: T,
    pub transient_cost: T,
    pub running_penalty: T,
    pub terminal_penalty: T,
    pub total: T,
}

impl<T: Scalar> ObjectiveBreakdown<T> {
    pub fn from_parts(
        revenue: T,
        temporary_cost: T,
        transient_cost: T,
        running_penalty: T,
        terminal_penalty: T,
    ) -> Self {
        Self {
            revenue,
            temporary_cost,
            transient_cost,
            running_penalty,
            terminal_penalty,
            total: revenue - temporary_cost - transient_cost - running_penalty - terminal_penalty,
        }
    }
}

/// A strategy on the grid together with its state paths.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyPath<T> {
    /// Trading speed `u` (selling rate) at each grid point.
    pub speed: Vec<T>,
    /// Inventory `Q`.
    pub inventory: Vec<T>,
    /// Transient distortion `Z`.
    pub distortion: Vec<T>,
    /// Signal `I`; zeros when no signal is present.
    pub signal: Vec<T>,
    pub objective: Option<ObjectiveBreakdown<T>>,
}

impl<T: Scalar> StrategyPath<T> {
    pub fn terminal_inventory(&self) -> T {
        *self.inventory.last().expect("non-empty path")
    }
}

/// `h̃0(t) = h0(t) - 2 varrho q` and `G̃(t, s) = 2 varrho 1{s < t} + G(t, s)`.
#[derive(Debug, Clone, Copy)]
pub struct TransformedInputs<'a, T> {
    params: &'a ScenarioParams<T>,
    kernel: &'a Propagator<T>,
}

impl<T: Scalar> TransformedInputs<'_, T> {
    pub fn h_tilde0(&self, grid: &TimeGrid<T>) -> Result<Vec<T>> {
        let shift = T::lit(2.0) * self.params.varrho * self.params.q;
        Ok(self
            .params
            .h0
            .values(grid)?
            .into_iter()
            .map(|h| h - shift)
            .collect())
    }

    pub fn g_tilde(&self, t: T, s: T) -> Result<T> {
        if s >= t {
            return Ok(T::zero());
        }
        Ok(T::lit(2.0) * self.params.varrho + self.kernel.eval(t, s)?)
    }
}

/// Inventory and distortion paths for a speed vector, computing the
/// kernel increments on the fly.
pub fn rollout<T: Scalar>(
    speed: &[T],
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    kernel: &Propagator<T>,
) -> Result<StrategyPath<T>> {
    let inc = IntegratedIncrements::new(kernel, params, grid)?;
    rollout_with(speed, params, grid, &inc)
}

/// Rollout against precomputed increments.
///
/// `Q[0] = q`, `Q[i+1] = Q[i] - u[i] dt`, and
/// `Z[k] = h0(t_k) + sum_{j<k} LG[k][j] u[j]`.
pub fn rollout_with<T: Scalar>(
    speed: &[T],
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    inc: &IntegratedIncrements<T>,
) -> Result<StrategyPath<T>> {
    grid.check_len("speed", speed)?;
    if inc.len() != grid.len() {
        return Err(Error::LengthMismatch {
            what: "increments",
            expected: grid.len(),
            actual: inc.len(),
        });
    }
    let dt = grid.dt();
    let mut inventory = Vec::with_capacity(grid.len());
    let mut q = params.q;
    inventory.push(q);
    for &u in &speed[..grid.steps()] {
        q -= u * dt;
        inventory.push(q);
    }
    let h0 = params.h0.values(grid)?;
    let distortion = (0..grid.len())
        .map(|k| h0[k] + dot(&inc.lg().row(k)[..k], &speed[..k]))
        .collect();
    Ok(StrategyPath {
        speed: speed.to_vec(),
        inventory,
        distortion,
        signal: vec![T::zero(); grid.len()],
        objective: None,
    })
}

/// Unaffected price with no martingale part: `P[k] = dt * sum_{j<k} I[j]`.
pub fn price_from_signal<T: Scalar>(signal: &[T], grid: &TimeGrid<T>) -> Result<Vec<T>> {
    grid.check_len("signal", signal)?;
    let dt = grid.dt();
    let mut p = Vec::with_capacity(signal.len());
    let mut acc = T::zero();
    for &i in signal {
        p.push(acc * dt);
        acc += i;
    }
    Ok(p)
}

/// Pathwise objective of a rolled-out strategy against a realized price.
pub fn evaluate_objective<T: Scalar>(
    path: &StrategyPath<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    price: &[T],
) -> Result<ObjectiveBreakdown<T>> {
    grid.check_len("speed", &path.speed)?;
    grid.check_len("inventory", &path.inventory)?;
    grid.check_len("distortion", &path.distortion)?;
    grid.check_len("price", price)?;
    let n = grid.steps();
    let dt = grid.dt();
    let u = &path.speed[..n];
    let q_n = path.inventory[n];
    let p_n = price[n];

    let revenue = dt * dot(&price[..n], u) + q_n * p_n;
    let temporary_cost = params.lambda * dt * dot(u, u);
    let transient_cost = dt * dot(&path.distortion[..n], u);
    let inv = &path.inventory[..n];
    let running_penalty = params.phi * dt * dot(inv, inv);
    let terminal_penalty = params.varrho * q_n * q_n;
    Ok(ObjectiveBreakdown::from_parts(
        revenue,
        temporary_cost,
        transient_cost,
        running_penalty,
        terminal_penalty,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn baseline() -> ScenarioParams<f64> {
        ScenarioParams::new(10.0, 10.0, 0.5, 4.0, 0.0).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_params() {
        assert!(ScenarioParams::new(10.0, 10.0, 0.0, 4.0, 0.0).is_err());
        assert!(ScenarioParams::new(10.0, 10.0, 0.5, -1.0, 0.0).is_err());
        assert!(ScenarioParams::new(10.0, 10.0, 0.5, 1.0, -0.1).is_err());
        assert!(ScenarioParams::new(10.0, 0.0, 0.5, 1.0, 0.0).is_err());
        assert!(ScenarioParams::new(-3.0, 1.0, 0.5, 1.0, 0.0).is_ok());
        assert!(TimeGrid::uniform(1.0, 1).is_err());
    }

    #[test]
    fn grid_is_uniform_and_hits_horizon() {
        let g = TimeGrid::uniform(10.0, 7).unwrap();
        let t = g.times();
        assert_eq!(t[0], 0.0);
        assert_eq!(t[7], 10.0);
        for w in t.windows(2) {
            assert_relative_eq!(w[1] - w[0], 10.0 / 7.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn no_trading_keeps_inventory() {
        let g = TimeGrid::uniform(10.0, 8).unwrap();
        let k = Propagator::exponential(1.0, 0.5).unwrap();
        let path = rollout(&vec![0.0; 9], &baseline(), &g, &k).unwrap();
        assert!(path.inventory.iter().all(|&q| q == 10.0));
        assert!(path.distortion.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn twap_liquidates_with_zero_kernel() {
        let g = TimeGrid::uniform(10.0, 16).unwrap();
        let path = rollout(&vec![1.0; 17], &baseline(), &g, &Propagator::Zero).unwrap();
        assert_relative_eq!(path.terminal_inventory(), 0.0, epsilon = 1e-12);
        assert!(path.distortion.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn exponential_distortion_two_steps() {
        // unit speed, dt = 1: Z_2 = sum over two cells of (e^{rho}-1)/rho e^{-rho m}
        let p = ScenarioParams::new(10.0, 4.0, 0.5, 0.0, 0.0).unwrap();
        let g = TimeGrid::uniform(4.0, 4).unwrap();
        let k = Propagator::exponential(1.0, 0.5).unwrap();
        let path = rollout(&[1.0; 5], &p, &g, &k).unwrap();
        // oracle: integral of e^{-0.5 (2 - s)} over [0, 2] = (1 - e^{-1}) / 0.5
        assert_relative_eq!(path.distortion[2], 1.264_241_117_657_115_4, epsilon = 1e-13);
    }

    #[test]
    fn rollout_rejects_bad_length() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert!(matches!(
            rollout(&[0.0; 3], &baseline(), &g, &Propagator::Zero),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn objective_examples() {
        let g = TimeGrid::uniform(10.0, 20).unwrap();
        let price = vec![0.0; 21];

        let p = ScenarioParams::new(10.0, 10.0, 0.5, 4.0, 0.0).unwrap();
        let path = rollout(&vec![0.0; 21], &p, &g, &Propagator::Zero).unwrap();
        let j = evaluate_objective(&path, &p, &g, &price).unwrap();
        assert_relative_eq!(j.total, -400.0, epsilon = 1e-12);

        let path = rollout(&vec![1.0; 21], &p, &g, &Propagator::Zero).unwrap();
        let j = evaluate_objective(&path, &p, &g, &price).unwrap();
        assert_relative_eq!(j.total, -5.0, epsilon = 1e-12);

        let p = ScenarioParams::new(10.0, 10.0, 0.5, 0.0, 1.0).unwrap();
        let path = rollout(&vec![0.0; 21], &p, &g, &Propagator::Zero).unwrap();
        let j = evaluate_objective(&path, &p, &g, &price).unwrap();
        assert_relative_eq!(j.total, -1000.0, epsilon = 1e-12);
    }

    #[test]
    fn transformed_inputs() {
        let p = baseline().with_h0(InitialDistortion::Constant(1.5));
        let k = Propagator::exponential(1.0, 0.5).unwrap();
        let g = TimeGrid::uniform(10.0, 4).unwrap();
        let tr = p.transformed(&k);
        assert!(tr.h_tilde0(&g).unwrap().iter().all(|&h| h == 1.5 - 80.0));
        assert_eq!(tr.g_tilde(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(tr.g_tilde(1.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(tr.g_tilde(2.0, 1.0).unwrap(), 8.0 + (-0.5f64).exp());
    }

    #[test]
    fn price_is_left_riemann_integral_of_signal() {
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        let p = price_from_signal(&[1.0, 2.0, 3.0, 4.0, 5.0], &g).unwrap();
        assert_eq!(p, vec![0.0, 0.5, 1.5, 3.0, 5.0]);
    }
}
