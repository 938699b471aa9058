//! Drift signals of the unaffected price and the conditional-expectation
//! matrix `N[k][j] = E[P_{t_k} - P_T | F_{t_j}]` (zero for `k < j`).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::TimeGrid;
use crate::scalar::Scalar;

/// Below this mean-reversion rate the OU formulas switch to their `gamma -> 0` limits.
pub const GAMMA_LIMIT: f64 = 1e-12;

/// Ornstein-Uhlenbeck signal `dI = -gamma I dt + sigma dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuSignal<T> {
    pub i0: T,
    pub gamma: T,
    pub sigma: T,
}

impl<T: Scalar> OuSignal<T> {
    pub fn new(i0: T, gamma: T, sigma: T) -> Result<Self> {
        if !i0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "I0",
                reason: "must be finite".into(),
            });
        }
        if !(gamma >= T::zero() && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be nonnegative, got {gamma}"),
            });
        }
        if !(sigma >= T::zero() && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be nonnegative, got {sigma}"),
            });
        }
        Ok(Self { i0, gamma, sigma })
    }

    fn near_limit(&self) -> bool {
        self.gamma < T::lit(GAMMA_LIMIT)
    }

    /// Exact one-step transition: decay factor and noise scale.
    fn transition(&self, dt: T) -> (T, T) {
        if self.near_limit() {
            return (T::one(), self.sigma * dt.sqrt());
        }
        let two_g = T::lit(2.0) * self.gamma;
        let var = -(-two_g * dt).exp_m1() / two_g;
        ((-self.gamma * dt).exp(), self.sigma * var.sqrt())
    }

    /// Path with the standard normals supplied by `normal(step)`.
    pub fn path_with(&self, grid: &TimeGrid<T>, mut normal: impl FnMut(usize) -> f64) -> Vec<T> {
        let (decay, scale) = self.transition(grid.dt());
        let mut out = Vec::with_capacity(grid.len());
        let mut x = self.i0;
        out.push(x);
        for step in 0..grid.steps() {
            x = x * decay;
            if self.sigma > T::zero() {
                x += scale * T::lit(normal(step));
            }
            out.push(x);
        }
        out
    }
}

/// Signal driving the unaffected price `P_t = ∫_0^t I_s ds`.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalModel<T> {
    Zero,
    Ou(OuSignal<T>),
    /// A fixed path on the grid, optionally with a user-supplied `N`.
    TabulatedPath { values: Vec<T>, nu: Option<Matrix<T>> },
}

impl<T: Scalar> SignalModel<T> {
    pub fn ou(i0: T, gamma: T, sigma: T) -> Result<Self> {
        Ok(Self::Ou(OuSignal::new(i0, gamma, sigma)?))
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Self::Zero | Self::TabulatedPath { .. } => true,
            Self::Ou(ou) => ou.sigma == T::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Ou(ou) => ou.i0 == T::zero() && ou.sigma == T::zero(),
            Self::TabulatedPath { values, nu } => {
                values.iter().all(|v| *v == T::zero())
                    && nu.as_ref().map_or(true, |m| m.max_abs() == T::zero())
            }
        }
    }

    /// Realized signal path number `path` for `seed`.
    pub fn realize(&self, grid: &TimeGrid<T>, seed: u64, path: u64) -> Result<Vec<T>> {
        match self {
            Self::Zero => Ok(vec![T::zero(); grid.len()]),
            Self::Ou(ou) => Ok(simulate_ou_path(ou, grid, seed, path)),
            Self::TabulatedPath { values, .. } if values.len() == grid.len() => Ok(values.clone()),
            Self::TabulatedPath { values, .. } => Err(Error::LengthMismatch {
                what: "signal path",
                expected: grid.len(),
                actual: values.len(),
            }),
        }
    }
}

/// Standard normal keyed by `(seed, path, step)`.
///
/// Each key addresses its own block of the ChaCha8 keystream (stream =
/// path, word offset = 4 * step), so draws are independent of evaluation
/// order and of how paths are spread over threads.
pub fn keyed_normal(seed: u64, path: u64, step: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng.set_word_pos(4 * step as u128);
    let a = rng.next_u64();
    let b = rng.next_u64();
    // uniforms in (0, 1]
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Exact OU transition on the grid; path index 0.
pub fn simulate_ou<T: Scalar>(model: &OuSignal<T>, grid: &TimeGrid<T>, seed: u64) -> Vec<T> {
    simulate_ou_path(model, grid, seed, 0)
}

pub fn simulate_ou_path<T: Scalar>(
    model: &OuSignal<T>,
    grid: &TimeGrid<T>,
    seed: u64,
    path: u64,
) -> Vec<T> {
    model.path_with(grid, |step| keyed_normal(seed, path, step))
}

/// `(n+1) × (n+1)` matrix `N[k][j] = nu_{t_j}(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuMatrix<T> {
    inner: Matrix<T>,
}

impl<T: Scalar> NuMatrix<T> {
    pub fn zeros(size: usize) -> Self {
        Self {
            inner: Matrix::zeros(size, size),
        }
    }

    /// Wraps a user-supplied matrix; entries above the diagonal must vanish.
    pub fn from_matrix(m: Matrix<T>, grid: &TimeGrid<T>) -> Result<Self> {
        if m.rows() != grid.len() || m.cols() != grid.len() {
            return Err(Error::LengthMismatch {
                what: "nu matrix",
                expected: grid.len(),
                actual: m.rows(),
            });
        }
        for k in 0..m.rows() {
            for j in k + 1..m.cols() {
                if m[(k, j)] != T::zero() {
                    return Err(Error::InvalidParameter {
                        name: "nu",
                        reason: format!("entry ({k}, {j}) above the diagonal must be zero"),
                    });
                }
            }
        }
        Ok(Self { inner: m })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.inner
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> T {
        self.inner[(k, j)]
    }

    /// `nu_{t_i}(t_i)`, the expected price change to the horizon.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.inner.rows()).map(|i| self.inner[(i, i)]).collect()
    }
}

/// Builds `N` for the realized `path`.
///
/// OU: `N[k][j] = I_j (e^{-gamma (n-j) dt} - e^{-gamma (k-j) dt}) / gamma`,
/// evaluated as `I_j e^{-gamma (k-j) dt} expm1(-gamma (n-k) dt) / gamma`
/// and replaced by `I_j (k - n) dt` when `gamma` is below [`GAMMA_LIMIT`].
pub fn nu_matrix<T: Scalar>(
    model: &SignalModel<T>,
    path: &[T],
    grid: &TimeGrid<T>,
) -> Result<NuMatrix<T>> {
    let size = grid.len();
    if path.len() != size {
        return Err(Error::LengthMismatch {
            what: "signal path",
            expected: size,
            actual: path.len(),
        });
    }
    match model {
        SignalModel::Zero => Ok(NuMatrix::zeros(size)),
        SignalModel::TabulatedPath { nu: Some(m), .. } => NuMatrix::from_matrix(m.clone(), grid),
        SignalModel::TabulatedPath { nu: None, .. } => Err(Error::UnsupportedSignal(
            "a tabulated signal path needs a user-supplied nu matrix".into(),
        )),
        SignalModel::Ou(ou) => {
            let n = grid.steps();
            let dt = grid.dt();
            let factor = |lag_from: usize, lag_to_end: usize| -> T {
                let a = T::from_usize_lossy(lag_from) * dt;
                let b = T::from_usize_lossy(lag_to_end) * dt;
                if ou.near_limit() {
                    -b
                } else {
                    (-ou.gamma * a).exp() * (-ou.gamma * b).exp_m1() / ou.gamma
                }
            };
            // factor depends on (k - j, n - k) only
            let table = Matrix::from_fn(size, size, |lag, rest| {
                if lag + rest <= n {
                    factor(lag, rest)
                } else {
                    T::zero()
                }
            });
            let inner = Matrix::from_fn(size, size, |k, j| {
                if k >= j {
                    path[j] * table[(k - j, n - k)]
                } else {
                    T::zero()
                }
            });
            Ok(NuMatrix { inner })
        }
    }
}
