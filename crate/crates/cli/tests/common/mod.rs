//! Independent numerical oracles for the acceptance suite. Everything here
//! deliberately avoids the closed forms under test: divergences come from
//! adaptive quadrature of their defining integrals, inverses from bisection,
//! optima from dense grid scans.

use dplab_core::dp_metrics::GaussianModel;

const LN_2PI: f64 = 1.8378770664093454836;

pub fn log_pdf(m: GaussianModel, x: f64) -> f64 {
    let z = (x - m.mu()) / m.sigma();
    -0.5 * LN_2PI - m.sigma().ln() - 0.5 * z * z
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    rec(f, a, m, b, fa, fm, fb, whole, tol, 48)
}

fn support(f0: GaussianModel, f1: GaussianModel) -> (f64, f64) {
    let lo = (f0.mu() - 60.0 * f0.sigma()).min(f1.mu() - 60.0 * f1.sigma());
    let hi = (f0.mu() + 60.0 * f0.sigma()).max(f1.mu() + 60.0 * f1.sigma());
    (lo, hi)
}

/// KL(f0 || f1) by quadrature of the defining integral f0 ln(f0/f1).
pub fn kl_quadrature(f0: GaussianModel, f1: GaussianModel) -> f64 {
    let (lo, hi) = support(f0, f1);
    let integrand = |x: f64| {
        let l0 = log_pdf(f0, x);
        let l1 = log_pdf(f1, x);
        // exp(l0) underflows to 0 long before (l0 - l1) can overflow
        l0.exp() * (l0 - l1)
    };
    adaptive_simpson(&integrand, lo, hi, 1e-12)
}

/// Order-a Renyi divergence by quadrature: ln(int f0^a f1^(1-a)) / (a-1).
pub fn renyi_quadrature(f0: GaussianModel, f1: GaussianModel, a: f64) -> f64 {
    let (lo, hi) = support(f0, f1);
    let integrand = |x: f64| (a * log_pdf(f0, x) + (1.0 - a) * log_pdf(f1, x)).exp();
    adaptive_simpson(&integrand, lo, hi, 1e-13).ln() / (a - 1.0)
}

/// Dense scan of the prior-weighted error exponent over the open unit
/// interval; returns (max value, argmax).
pub fn chernoff_grid_scan<F: Fn(f64) -> f64>(objective: &F, points: u32) -> (f64, f64) {
    let mut best = f64::NEG_INFINITY;
    let mut best_a = 0.5;
    for i in 1..=points {
        let a = i as f64 / (points as f64 + 1.0);
        let v = objective(a);
        if v > best {
            best = v;
            best_a = a;
        }
    }
    (best, best_a)
}

/// Invert a strictly decreasing function by bisection to ~1e-15.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: &F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) > target && f(hi) < target, "target not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}
