//! Gauss-Legendre rules used by the kernel quadrature fallback.

use std::sync::OnceLock;

use crate::scalar::Scalar;

pub const GAUSS_POINTS: usize = 16;

/// Nodes and weights of the 16-point rule on `[-1, 1]`.
pub fn gauss_legendre_16() -> &'static [(f64, f64); GAUSS_POINTS] {
    static RULE: OnceLock<[(f64, f64); GAUSS_POINTS]> = OnceLock::new();
    RULE.get_or_init(legendre_rule::<GAUSS_POINTS>)
}

fn legendre_rule<const N: usize>() -> [(f64, f64); N] {
    let mut out = [(0.0, 0.0); N];
    let nf = N as f64;
    for i in 0..N {
        // Tricomi initial guess, then Newton on P_N.
        let mut x = ((i as f64 + 0.75) / (nf + 0.5) * std::f64::consts::PI).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(N, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(N, x);
        if d != 0.0 {
            dp = d;
        }
        out[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// 16-point Gauss-Legendre on one panel `[a, b]`.
pub fn gauss_panel<T: Scalar>(a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
    let half = T::lit(0.5) * (b - a);
    let mid = T::lit(0.5) * (a + b);
    let mut acc = T::zero();
    for &(x, w) in gauss_legendre_16() {
        acc += T::lit(w) * f(mid + half * T::lit(x));
    }
    acc * half
}

/// Composite rule with `panels` equal panels on `[a, b]`.
pub fn gauss_composite<T: Scalar>(a: T, b: T, panels: usize, mut f: impl FnMut(T) -> T) -> T {
    let width = (b - a) / T::from_usize_lossy(panels);
    (0..panels)
        .map(|p| {
            let lo = a + width * T::from_usize_lossy(p);
            let hi = if p + 1 == panels { b } else { lo + width };
            gauss_panel(lo, hi, &mut f)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two_and_nodes_symmetric() {
        let r = gauss_legendre_16();
        let s: f64 = r.iter().map(|p| p.1).sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-14);
        let mut xs: Vec<f64> = r.iter().map(|p| p.0).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 0..8 {
            assert_relative_eq!(xs[k], -xs[15 - k], epsilon = 1e-15);
        }
    }

    #[test]
    fn exact_for_degree_31() {
        let got = gauss_panel(0.0f64, 1.0, |x| x.powi(31));
        assert_relative_eq!(got, 1.0 / 32.0, epsilon = 1e-14);
        let got = gauss_composite(0.0f64, 3.0, 5, |x| x.exp());
        assert_relative_eq!(got, 3.0f64.exp() - 1.0, epsilon = 1e-14);
    }
}
