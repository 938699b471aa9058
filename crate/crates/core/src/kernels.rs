//! Propagator kernels `G(t, s) = 1{s < t} H(t - s)`, their cell-integrated
//! increments, and a finite-resolution definiteness diagnostic.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::model::{ScenarioParams, TimeGrid};
use crate::quadrature::{gauss_composite, gauss_panel};
use crate::scalar::Scalar;

/// Relative change tolerated between one and two quadrature panels.
pub const QUADRATURE_RTOL: f64 = 1e-10;

/// Relative eigenvalue tolerance of [`check_nonnegative_definite`].
pub const DEFINITENESS_TOL: f64 = 1e-8;

/// Convolution kernel tabulated on a uniform grid over `[0, T]` and
/// interpolated linearly; constant past the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel<T> {
    spacing: T,
    values: Vec<T>,
}

impl<T: Scalar> TabulatedKernel<T> {
    /// `values[m]` is `H(m * horizon / (len - 1))`.
    pub fn new(horizon: T, values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "kernel table",
                reason: "need at least two values".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kernel table",
                reason: "values must be finite".into(),
            });
        }
        if !(horizon > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: "must be positive".into(),
            });
        }
        let spacing = horizon / T::from_usize_lossy(values.len() - 1);
        Ok(Self { spacing, values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn eval(&self, x: T) -> T {
        let last = self.values.len() - 1;
        let pos = x / self.spacing;
        if pos >= T::from_usize_lossy(last) {
            return self.values[last];
        }
        let m = pos.floor().to_usize().unwrap_or(0).min(last - 1);
        let frac = pos - T::from_usize_lossy(m);
        self.values[m] + (self.values[m + 1] - self.values[m]) * frac
    }

    /// Knots strictly inside `(a, b)`.
    fn knots_between(&self, a: T, b: T) -> Vec<T> {
        let last = self.values.len() - 1;
        let first = (a / self.spacing).floor().to_usize().unwrap_or(0) + 1;
        (first..=last)
            .map(|m| T::from_usize_lossy(m) * self.spacing)
            .take_while(|&x| x < b)
            .filter(|&x| x > a)
            .collect()
    }
}

/// Transient impact kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Propagator<T> {
    /// No transient impact.
    Zero,
    /// `H(x) = c e^{-rho x}`.
    Exponential { c: T, rho: T },
    /// `H(x) = c x^{alpha - 1}`, `alpha ∈ (1/2, 1)`.
    Fractional { c: T, alpha: T },
    /// `H(x) = ell0 / (ell0 + x)^beta`.
    BoundedPowerLaw { ell0: T, beta: T },
    Tabulated(TabulatedKernel<T>),
}

impl<T: Scalar> Propagator<T> {
    pub fn exponential(c: T, rho: T) -> Result<Self> {
        positive("c", c)?;
        positive("rho", rho)?;
        Ok(Self::Exponential { c, rho })
    }

    pub fn fractional(c: T, alpha: T) -> Result<Self> {
        positive("c", c)?;
        if !(alpha > T::lit(0.5) && alpha < T::one()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in (1/2, 1), got {alpha}"),
            });
        }
        Ok(Self::Fractional { c, alpha })
    }

    /// Power-law kernel `c x^{-beta}` with `beta ∈ (0, 1/2)`, stored as
    /// `alpha = 1 - beta`.
    pub fn fractional_from_beta(c: T, beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta < T::lit(0.5)) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("must lie in (0, 1/2), got {beta}"),
            });
        }
        Self::fractional(c, T::one() - beta)
    }

    pub fn bounded_power_law(ell0: T, beta: T) -> Result<Self> {
        positive("ell0", ell0)?;
        positive("beta", beta)?;
        Ok(Self::BoundedPowerLaw { ell0, beta })
    }

    pub fn tabulated(horizon: T, values: Vec<T>) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedKernel::new(horizon, values)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Exponential { .. } => "exponential",
            Self::Fractional { .. } => "fractional",
            Self::BoundedPowerLaw { .. } => "power_law",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// Whether the increments have closed forms.
    pub fn has_closed_form(&self) -> bool {
        matches!(
            self,
            Self::Zero | Self::Exponential { .. } | Self::Fractional { .. }
        )
    }

    fn singular_at_origin(&self) -> Option<T> {
        match self {
            Self::Fractional { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// `H(x)` for `x > 0`.
    pub fn decay(&self, x: T) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::Exponential { c, rho } => *c * (-*rho * x).exp(),
            Self::Fractional { c, alpha } => *c * x.powf(*alpha - T::one()),
            Self::BoundedPowerLaw { ell0, beta } => *ell0 / (*ell0 + x).powf(*beta),
            Self::Tabulated(tab) => tab.eval(x),
        }
    }

    /// `G(t, s)`; zero for `s >= t`, except that the fractional kernel
    /// refuses to be sampled on its diagonal.
    pub fn eval(&self, t: T, s: T) -> Result<T> {
        if s == t && self.singular_at_origin().is_some() {
            return Err(Error::Singularity { at: t.to_f64_lossy() });
        }
        if s >= t {
            return Ok(T::zero());
        }
        Ok(self.decay(t - s))
    }

    /// `∫_0^x H` in closed form, where available.
    fn antiderivative(&self, x: T) -> Option<T> {
        match self {
            Self::Zero => Some(T::zero()),
            Self::Exponential { c, rho } => Some(*c * (T::one() - (-*rho * x).exp()) / *rho),
            Self::Fractional { c, alpha } => Some(*c * x.powf(*alpha) / *alpha),
            _ => None,
        }
    }

    /// `∫_0^x ∫_0^y H(z) dz dy` in closed form, where available.
    fn second_antiderivative(&self, x: T) -> Option<T> {
        match self {
            Self::Zero => Some(T::zero()),
            Self::Exponential { c, rho } => {
                let r = *rho;
                Some(*c * (x / r - (T::one() - (-r * x).exp()) / (r * r)))
            }
            Self::Fractional { c, alpha } => {
                let a = *alpha;
                Some(*c * x.powf(a + T::one()) / (a * (a + T::one())))
            }
            _ => None,
        }
    }

    /// `∫_a^b H(x) dx` by composite Gauss-Legendre, `0 <= a < b`.
    ///
    /// One panel is compared against two; disagreement beyond
    /// [`QUADRATURE_RTOL`] is an error. A singular left endpoint at the
    /// origin is removed by the substitution `x = (b - a) w^{1/alpha}`.
    pub fn integrate_decay(&self, a: T, b: T) -> Result<T> {
        if b <= a {
            return Ok(T::zero());
        }
        if let Self::Zero = self {
            return Ok(T::zero());
        }
        if let Self::Tabulated(tab) = self {
            // linear between knots: the rule is exact on each piece
            let mut cuts = vec![a];
            cuts.extend(tab.knots_between(a, b));
            cuts.push(b);
            return Ok(cuts
                .windows(2)
                .map(|w| gauss_panel(w[0], w[1], |x| tab.eval(x)))
                .sum());
        }
        match self.singular_at_origin() {
            Some(alpha) if a == T::zero() => {
                let width = b;
                let p = T::one() / alpha;
                let f = |w: T| {
                    if w <= T::zero() {
                        return T::zero();
                    }
                    let x = width * w.powf(p);
                    self.decay(x) * width * p * w.powf(p - T::one())
                };
                refined(a, b, T::zero(), T::one(), f)
            }
            _ => refined(a, b, a, b, |x| self.decay(x)),
        }
    }

    /// `∫∫` of `H(|t - s|)` over the cell pair at lag `m` (cells of width `dt`).
    /// For `m = 0` this is the full diagonal cell, counting both triangles.
    pub fn cell_pair_integral(&self, m: usize, dt: T) -> Result<T> {
        let two = T::lit(2.0);
        if let Some(h2) = self.second_antiderivative(dt) {
            if m == 0 {
                return Ok(two * h2);
            }
            let mf = T::from_usize_lossy(m);
            let up = self.second_antiderivative((mf + T::one()) * dt).unwrap_or(T::zero());
            let mid = self.second_antiderivative(mf * dt).unwrap_or(T::zero());
            let lo = self.second_antiderivative((mf - T::one()) * dt).unwrap_or(T::zero());
            return Ok(up - two * mid + lo);
        }
        self.cell_pair_by_quadrature(m, dt)
    }

    /// Same as [`cell_pair_integral`](Self::cell_pair_integral) through the
    /// one-dimensional tent form `∫ H(x) (dt - |x - m dt|) dx`.
    pub fn cell_pair_by_quadrature(&self, m: usize, dt: T) -> Result<T> {
        if self.singular_at_origin().is_some() && m <= 1 {
            return Err(Error::Singularity { at: 0.0 });
        }
        let center = T::from_usize_lossy(m) * dt;
        let tent = |x: T| self.decay(x) * (dt - (x - center).abs());
        let right = self.piecewise_quadrature(center, center + dt, tent)?;
        if m == 0 {
            return Ok(T::lit(2.0) * right);
        }
        let left = self.piecewise_quadrature(center - dt, center, tent)?;
        Ok(left + right)
    }

    fn piecewise_quadrature(&self, a: T, b: T, f: impl Fn(T) -> T) -> Result<T> {
        if let Self::Tabulated(tab) = self {
            let mut cuts = vec![a];
            cuts.extend(tab.knots_between(a, b));
            cuts.push(b);
            return Ok(cuts.windows(2).map(|w| gauss_panel(w[0], w[1], &f)).sum());
        }
        refined(a, b, a, b, f)
    }

    /// `∫_0^T H(x)^2 dx`; finite for every admissible kernel.
    pub fn l2_norm_sq(&self, horizon: T) -> Result<T> {
        let two = T::lit(2.0);
        Ok(match self {
            Self::Zero => T::zero(),
            Self::Exponential { c, rho } => {
                *c * *c * (T::one() - (-two * *rho * horizon).exp()) / (two * *rho)
            }
            Self::Fractional { c, alpha } => {
                let e = two * *alpha - T::one();
                *c * *c * horizon.powf(e) / e
            }
            Self::BoundedPowerLaw { .. } => {
                gauss_composite(T::zero(), horizon, 64, |x| self.decay(x).powi(2))
            }
            Self::Tabulated(_) => {
                self.piecewise_quadrature(T::zero(), horizon, |x| self.decay(x).powi(2))?
            }
        })
    }
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive, got {v}"),
        })
    }
}

/// Deepest bisection level of [`refined`].
const MAX_BISECTIONS: u32 = 40;

/// Integrates `f` over `[lo, hi]`, comparing one panel against two and
/// bisecting where they disagree beyond [`QUADRATURE_RTOL`]; `[a, b]` is
/// the original interval, kept for error reporting.
fn refined<T: Scalar>(a: T, b: T, lo: T, hi: T, f: impl Fn(T) -> T) -> Result<T> {
    bisect(a, b, lo, hi, &f, MAX_BISECTIONS)
}

fn bisect<T: Scalar>(a: T, b: T, lo: T, hi: T, f: &impl Fn(T) -> T, depth: u32) -> Result<T> {
    let coarse = gauss_composite(lo, hi, 1, f);
    let fine = gauss_composite(lo, hi, 2, f);
    let change = (fine - coarse).abs();
    let scale = fine.abs().max(T::min_positive_value());
    if fine.is_finite() && change <= T::lit(QUADRATURE_RTOL) * scale {
        return Ok(fine);
    }
    if depth == 0 || !fine.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
            change: (change / scale).to_f64_lossy(),
        });
    }
    let mid = T::lit(0.5) * (lo + hi);
    Ok(bisect(a, b, lo, mid, f, depth - 1)? + bisect(a, b, mid, hi, f, depth - 1)?)
}

/// Cell integrals of `G̃` on the grid.
///
/// `L[k][j] = ∫_{t_j}^{t_{j+1}} G̃(t_k, s) ds` for `j < k`,
/// `U[k][j] = ∫_{t_j}^{t_{j+1}} G̃(s, t_k) ds` for `k <= j <= n - 1`,
/// and `LG = L - 2 varrho dt` on the support of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedIncrements<T> {
    l: Matrix<T>,
    u: Matrix<T>,
    lg: Matrix<T>,
}

impl<T: Scalar> IntegratedIncrements<T> {
    /// Closed forms for zero, exponential and fractional kernels;
    /// quadrature for the rest.
    pub fn new(
        kernel: &Propagator<T>,
        params: &ScenarioParams<T>,
        grid: &TimeGrid<T>,
    ) -> Result<Self> {
        if kernel.has_closed_form() {
            let (lower, upper) = closed_form_lags(kernel, grid);
            Ok(Self::assemble(&lower, &upper, params, grid))
        } else {
            Self::by_quadrature(kernel, params, grid)
        }
    }

    /// Forces the quadrature route for any kernel.
    pub fn by_quadrature(
        kernel: &Propagator<T>,
        params: &ScenarioParams<T>,
        grid: &TimeGrid<T>,
    ) -> Result<Self> {
        let n = grid.steps();
        let dt = grid.dt();
        // G is a convolution kernel, so the pure-G increments depend on the
        // lag only: lower lag m >= 1 covers [(m-1)dt, m dt], upper lag m >= 0
        // covers [m dt, (m+1) dt].
        let mut cells = Vec::with_capacity(n + 1);
        for m in 0..=n {
            let a = T::from_usize_lossy(m) * dt;
            cells.push(kernel.integrate_decay(a, a + dt)?);
        }
        let lower: Vec<T> = std::iter::once(T::zero())
            .chain(cells[..n].iter().copied())
            .collect();
        let upper = cells[..n].to_vec();
        Ok(Self::assemble(&lower, &upper, params, grid))
    }

    /// `lower[m]` is the pure-G value for `k - j = m >= 1`, `upper[m]` for
    /// `j - k = m >= 0`.
    fn assemble(lower: &[T], upper: &[T], params: &ScenarioParams<T>, grid: &TimeGrid<T>) -> Self {
        let n = grid.steps();
        let size = n + 1;
        let penalty = T::lit(2.0) * params.varrho * grid.dt();
        let lg = Matrix::from_fn(size, size, |k, j| if j < k { lower[k - j] } else { T::zero() });
        let l = Matrix::from_fn(size, size, |k, j| {
            if j < k {
                penalty + lower[k - j]
            } else {
                T::zero()
            }
        });
        let u = Matrix::from_fn(size, size, |k, j| {
            if k <= j && j < n {
                penalty + upper[j - k]
            } else {
                T::zero()
            }
        });
        Self { l, u, lg }
    }

    pub fn l(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn u(&self) -> &Matrix<T> {
        &self.u
    }

    pub fn lg(&self) -> &Matrix<T> {
        &self.lg
    }

    /// Grid points, `n + 1`.
    pub fn len(&self) -> usize {
        self.l.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn closed_form_lags<T: Scalar>(kernel: &Propagator<T>, grid: &TimeGrid<T>) -> (Vec<T>, Vec<T>) {
    let n = grid.steps();
    let dt = grid.dt();
    let mut lower = vec![T::zero(); n + 1];
    let mut upper = vec![T::zero(); n];
    match kernel {
        Propagator::Exponential { c, rho } => {
            let (c, rho) = (*c, *rho);
            let lead_l = c * ((rho * dt).exp() - T::one()) / rho;
            let lead_u = c * (T::one() - (-rho * dt).exp()) / rho;
            for (m, v) in lower.iter_mut().enumerate().skip(1) {
                *v = lead_l * (-rho * T::from_usize_lossy(m) * dt).exp();
            }
            for (m, v) in upper.iter_mut().enumerate() {
                *v = lead_u * (-rho * T::from_usize_lossy(m) * dt).exp();
            }
        }
        Propagator::Fractional { c, alpha } => {
            let (c, a) = (*c, *alpha);
            let lead = c * dt.powf(a) / a;
            for (m, v) in lower.iter_mut().enumerate().skip(1) {
                let mf = T::from_usize_lossy(m);
                *v = lead * (mf.powf(a) - (mf - T::one()).powf(a));
            }
            for (m, v) in upper.iter_mut().enumerate() {
                let mf = T::from_usize_lossy(m);
                *v = lead * ((mf + T::one()).powf(a) - mf.powf(a));
            }
        }
        Propagator::Zero => {}
        _ => {
            // only reached for kernels with an antiderivative
            for (m, v) in lower.iter_mut().enumerate().skip(1) {
                let mf = T::from_usize_lossy(m);
                let hi = kernel.antiderivative(mf * dt).unwrap_or(T::zero());
                let lo = kernel.antiderivative((mf - T::one()) * dt).unwrap_or(T::zero());
                *v = hi - lo;
            }
            for (m, v) in upper.iter_mut().enumerate() {
                *v = lower.get(m + 1).copied().unwrap_or(T::zero());
            }
        }
    }
    (lower, upper)
}

/// Outcome of [`check_nonnegative_definite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitenessReport<T> {
    pub nonnegative: bool,
    pub min_eigenvalue: T,
    /// Spectral norm of the Gram matrix.
    pub norm: T,
    /// `∫_0^T H^2`, the square-integrability part of admissibility.
    pub l2_norm_sq: T,
}

/// Gram matrix `M[k][j] = ∫_{cell k} ∫_{cell j} (G(t,s) + G(s,t)) ds dt`
/// of the indicator functions of the grid cells.
pub fn gram_matrix<T: Scalar>(kernel: &Propagator<T>, grid: &TimeGrid<T>) -> Result<Matrix<T>> {
    let n = grid.steps();
    let dt = grid.dt();
    let lags = (0..n)
        .map(|m| kernel.cell_pair_integral(m, dt))
        .collect::<Result<Vec<T>>>()?;
    Ok(Matrix::from_fn(n, n, |k, j| lags[k.abs_diff(j)]))
}

/// Finite-resolution test of nonnegative definiteness: the kernel's
/// quadratic form restricted to piecewise-constant functions on `grid`.
/// A `true` result is necessary at this resolution, not a proof.
pub fn check_nonnegative_definite<T: Scalar>(
    kernel: &Propagator<T>,
    grid: &TimeGrid<T>,
) -> Result<DefinitenessReport<T>> {
    let gram = gram_matrix(kernel, grid)?;
    let ev = symmetric_eigenvalues(&gram)?;
    let min_eigenvalue = ev.first().copied().unwrap_or_else(T::zero);
    let norm = ev.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    let l2_norm_sq = kernel.l2_norm_sq(grid.horizon())?;
    Ok(DefinitenessReport {
        nonnegative: min_eigenvalue >= -T::lit(DEFINITENESS_TOL) * norm && l2_norm_sq.is_finite(),
        min_eigenvalue,
        norm,
        l2_norm_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(varrho: f64) -> ScenarioParams<f64> {
        ScenarioParams::new(10.0, 10.0, 0.5, varrho, 0.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let k = Propagator::exponential(1.0, 0.5).unwrap();
        assert_relative_eq!(k.eval(2.0, 1.0).unwrap(), 0.606_530_659_712_633_4, epsilon = 1e-15);
        assert_eq!(k.eval(1.0, 2.0).unwrap(), 0.0);
        assert_eq!(Propagator::<f64>::Zero.eval(3.0, 1.0).unwrap(), 0.0);
        let f = Propagator::fractional(1.0, 0.55).unwrap();
        assert!(matches!(f.eval(1.0, 1.0), Err(Error::Singularity { .. })));
        assert_eq!(f.eval(1.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(f.eval(5.0, 1.0).unwrap(), 4f64.powf(-0.45));
    }

    #[test]
    fn constructors_enforce_ranges() {
        assert!(Propagator::fractional(1.0, 0.5).is_err());
        assert!(Propagator::fractional(1.0, 1.0).is_err());
        assert!(Propagator::exponential(1.0, 0.0).is_err());
        assert!(Propagator::bounded_power_law(0.0, 1.0).is_err());
        assert!(Propagator::<f64>::tabulated(1.0, vec![1.0]).is_err());
        let f = Propagator::fractional_from_beta(1.0, 0.3).unwrap();
        assert_eq!(f, Propagator::Fractional { c: 1.0, alpha: 0.7 });
        assert!(Propagator::fractional_from_beta(1.0, 0.5).is_err());
    }

    #[test]
    fn zero_kernel_increments_are_penalty_only() {
        let g = TimeGrid::uniform(5.0, 5).unwrap();
        let inc = IntegratedIncrements::new(&Propagator::Zero, &params(4.0), &g).unwrap();
        for k in 0..=5 {
            for j in 0..=5 {
                let l = inc.l()[(k, j)];
                let u = inc.u()[(k, j)];
                assert_eq!(l, if j < k { 8.0 } else { 0.0 });
                assert_eq!(u, if k <= j && j < 5 { 8.0 } else { 0.0 });
                assert_eq!(inc.lg()[(k, j)], 0.0);
            }
        }
    }

    #[test]
    fn tabulated_matches_linear_interpolation() {
        let tab = TabulatedKernel::new(2.0, vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(tab.eval(0.5), 2.0);
        assert_eq!(tab.eval(1.5), 2.5);
        assert_eq!(tab.eval(7.0), 2.0);
        let k = Propagator::Tabulated(tab);
        // trapezoids: 2 + 2.5
        assert_relative_eq!(k.integrate_decay(0.0, 2.0).unwrap(), 4.5, epsilon = 1e-14);
        assert_relative_eq!(k.integrate_decay(0.5, 1.5).unwrap(), 1.25 + 1.375, epsilon = 1e-14);
    }

    #[test]
    fn power_law_quadrature_against_antiderivative() {
        // ∫ ell0 (ell0 + x)^{-beta} = ell0 ((ell0+b)^{1-beta} - (ell0+a)^{1-beta}) / (1-beta)
        let (ell0, beta) = (0.3, 0.7);
        let k = Propagator::bounded_power_law(ell0, beta).unwrap();
        let f = |x: f64| ell0 * (ell0 + x).powf(1.0 - beta) / (1.0 - beta);
        for (a, b) in [(0.0, 0.1), (0.1, 0.2), (3.0, 3.1)] {
            assert_relative_eq!(k.integrate_decay(a, b).unwrap(), f(b) - f(a), max_relative = 1e-13);
        }
    }

    #[test]
    fn quadrature_flags_nonconvergence() {
        // overflows near the origin
        let k = Propagator::bounded_power_law(1e-3, 200.0).unwrap();
        assert!(matches!(
            k.integrate_decay(0.0, 10.0),
            Err(Error::QuadratureNonConvergence { .. })
        ));
    }

    #[test]
    fn sharp_power_law_is_resolved_by_bisection() {
        let (ell0, beta) = (1e-4, 3.0);
        let k = Propagator::bounded_power_law(ell0, beta).unwrap();
        let f = |x: f64| ell0 * (ell0 + x).powf(1.0 - beta) / (1.0 - beta);
        assert_relative_eq!(k.integrate_decay(0.0, 5.0).unwrap(), f(5.0) - f(0.0), max_relative = 1e-10);
    }

    #[test]
    fn gram_closed_form_matches_tent_quadrature() {
        let k = Propagator::exponential(1.3, 0.7).unwrap();
        for m in 0..6 {
            let a = k.cell_pair_integral(m, 0.25).unwrap();
            let b = k.cell_pair_by_quadrature(m, 0.25).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-11);
        }
    }

    #[test]
    fn l2_norms() {
        let f = Propagator::fractional(1.0, 0.75).unwrap();
        assert_relative_eq!(f.l2_norm_sq(4.0).unwrap(), 4.0f64.powf(0.5) / 0.5);
        let t = Propagator::tabulated(2.0, vec![1.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(t.l2_norm_sq(2.0).unwrap(), 2.0, epsilon = 1e-14);
    }
}
