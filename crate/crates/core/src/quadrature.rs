//! Fixed and adaptive one-dimensional quadrature rules.
//!
//! Gauss–Legendre nodes back the graded sample-space grids; the adaptive
//! Gauss–Kronrod driver is an independent reference integrator used to
//! cross-check grid sums against closed forms.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss–Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            derivative = dp;
            let step = p / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        if dp.is_finite() {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - z * z) * derivative * derivative);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of [`adaptive_integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error_estimate: T,
    pub intervals: usize,
}

fn kronrod_15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::of(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::of(KRONROD_WEIGHTS[7]);
    let mut gauss = fc * T::of(GAUSS7_WEIGHTS[3]);
    for (j, (&x, &w)) in KRONROD_NODES.iter().zip(KRONROD_WEIGHTS.iter()).take(7).enumerate() {
        let dx = radius * T::of(x);
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * T::of(w);
        if j % 2 == 1 {
            gauss += pair * T::of(GAUSS7_WEIGHTS[j / 2]);
        }
    }
    let value = kronrod * radius;
    let error = ((kronrod - gauss) * radius).abs();
    (value, error)
}

/// Globally adaptive G7–K15 integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|value|)` or `max_intervals`
/// is reached.
pub fn adaptive_integrate<T: Scalar, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Result<Integral<T>> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must be finite with a < b, got [{a}, {b}]"
        )));
    }
    let mut pieces: Vec<(T, T, T, T)> = Vec::new();
    let (v, e) = kronrod_15(&f, a, b);
    pieces.push((a, b, v, e));
    loop {
        let value: T = pieces.iter().map(|p| p.2).sum();
        let error: T = pieces.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target || pieces.len() >= max_intervals {
            return Ok(Integral {
                value,
                error_estimate: error,
                intervals: pieces.len(),
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = T::of(0.5) * (lo + hi);
        let (v1, e1) = kronrod_15(&f, lo, mid);
        let (v2, e2) = kronrod_15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Integral of `f` over `[a, ∞)` through the map `u = a + s/(1-s)`.
pub fn adaptive_integrate_to_infinity<T: Scalar, F: Fn(T) -> T>(
    f: F,
    a: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Result<Integral<T>> {
    let one = T::one();
    let mapped = |s: T| {
        if s >= one {
            return T::zero();
        }
        let gap = one - s;
        let u = a + s / gap;
        let jac = one / (gap * gap);
        let v = f(u) * jac;
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    adaptive_integrate(mapped, T::zero(), one, abs_tol, rel_tol, max_intervals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for order in 1..=12 {
            let (x, w) = gauss_legendre(order);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
            for degree in 0..(2 * order) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(degree as i32)).sum();
                let exact = if degree % 2 == 1 {
                    0.0
                } else {
                    2.0 / (degree as f64 + 1.0)
                };
                assert!((approx - exact).abs() < 1e-13, "order {order} degree {degree}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn adaptive_handles_smooth_and_peaked() {
        let r = adaptive_integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14, 200).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = adaptive_integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13, 500).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = adaptive_integrate_to_infinity(|u: f64| (-u).exp(), 1.0, 1e-14, 1e-13, 500).unwrap();
        assert!((r.value - (-1.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn rejects_reversed_bounds() {
        assert!(adaptive_integrate(|x: f64| x, 1.0, 0.0, 1e-9, 1e-9, 10).is_err());
    }
}
