//! Globally adaptive Gauss-Kronrod (7/15) quadrature of complex integrands.
//!
//! The panel with the largest error estimate is bisected until the summed
//! estimate meets the tolerance. Panels are summed in left-to-right order at
//! the end, so results do not depend on refinement history.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Maximum number of panels before giving up.
pub const MAX_PANELS: usize = 1 << 16;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    /// Largest error first; ties broken by position so refinement order is
    /// deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).norm();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, with the initial partition refined at the
/// given interior breakpoints. Stops once the error estimate is below
/// `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("bad integration interval [{a}, {b}]")));
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap: BinaryHeap<Panel> = cuts.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    // Running sums are refreshed from scratch periodically to limit drift.
    let mut total: Complex64 = heap.iter().map(|p| p.value).sum();
    let mut err: f64 = heap.iter().map(|p| p.error).sum();
    let mut since_refresh = 0usize;
    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Convergence("integrand produced a non-finite value".into()));
        }
        let tol = abs_tol.max(rel_tol * total.norm());
        if err <= tol {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
            if err <= abs_tol.max(rel_tol * total.norm()) {
                break;
            }
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Convergence(format!(
                "{MAX_PANELS} panels exceeded; error estimate {err:e} against tolerance {tol:e}"
            )));
        }
        let p = heap.pop().expect("at least one panel");
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Convergence(format!("panel [{}, {}] cannot be split further", p.a, p.b)));
        }
        let left = gk15(&f, p.a, mid);
        let right = gk15(&f, mid, p.b);
        total += left.value + right.value - p.value;
        err += left.error + right.error - p.error;
        heap.push(left);
        heap.push(right);
        since_refresh += 1;
        if since_refresh == 256 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
            since_refresh = 0;
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(Complex64::zero(), |acc, p| acc + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, panels: panels.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Complex64::new(x.powi(6), x), -1.0, 2.0, &[], 1e-14, 0.0).unwrap();
        assert!((r.value.re - (128.0 + 1.0) / 7.0).abs() < 1e-13);
        assert!((r.value.im - 1.5).abs() < 1e-14);
    }

    #[test]
    fn narrow_gaussian() {
        let s = 1e-3;
        let f = |x: f64| Complex64::new((-(x / s).powi(2)).exp(), 0.0);
        let bps: Vec<f64> = (0..8).flat_map(|j| [-s * 2f64.powi(j), s * 2f64.powi(j)]).collect();
        let r = integrate(f, -PI, PI, &bps, 1e-15, 1e-13).unwrap();
        assert!((r.value.re - s * PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_exponential() {
        // (1/2pi) int exp(-2(1 + i t - e^{it})) dt = 2/e^2
        let f = |t: f64| {
            let e = Complex64::from_polar(1.0, t);
            (-(Complex64::new(1.0, t) - e) * 2.0).exp()
        };
        let r = integrate(f, -PI, PI, &[0.0], 1e-14, 1e-14).unwrap();
        assert!((r.value.re / (2.0 * PI) - 2.0 * (-2f64).exp()).abs() < 1e-14);
        assert!(r.value.im.abs() < 1e-14);
    }

    #[test]
    fn panel_cap() {
        let f = |x: f64| Complex64::new((x * 1e9).sin(), 0.0);
        let r = integrate(f, 0.0, 1.0, &[], 1e-300, 0.0);
        assert!(matches!(r, Err(Error::Convergence(_))), "{r:?}");
    }
}
