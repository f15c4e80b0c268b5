//! Bounded scalar maximization: coarse grid scan, then golden-section refinement.
//!
//! Likelihoods here can be flat, maximized on a boundary, or `-inf` at an
//! endpoint, so the grid locates the basin and golden section only polishes it.

use crate::scalar::Scalar;

/// Default number of grid points over the search interval (inclusive of both ends).
pub const DEFAULT_GRID_POINTS: usize = 101;
/// Default absolute tolerance on the argument.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

const MAX_GOLDEN_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<F> {
    pub argmax: F,
    pub value: F,
    pub evaluations: usize,
}

/// Maximizes `f` over `[lo, hi]`.
///
/// The returned value is never below the best grid point, and ties keep the
/// leftmost point.
pub fn maximize_bounded<F, Obj>(mut f: Obj, lo: F, hi: F, grid_points: usize, tolerance: F) -> Maximum<F>
where
    F: Scalar,
    Obj: FnMut(F) -> F,
{
    assert!(grid_points >= 2, "grid needs both endpoints");
    assert!(lo <= hi);
    let last = grid_points - 1;
    let step = (hi - lo) / F::from_count(last);
    let at = |k: usize| if k == last { hi } else { lo + step * F::from_count(k) };

    let mut best_k = 0;
    let mut best = f(lo);
    for k in 1..grid_points {
        let v = f(at(k));
        if v > best || best.is_nan() {
            best = v;
            best_k = k;
        }
    }
    let mut evaluations = grid_points;

    let mut a = at(best_k.saturating_sub(1));
    let mut b = at((best_k + 1).min(last));
    let inv_phi = F::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    evaluations += 2;
    let mut iters = 0;
    while (b - a) > tolerance && iters < MAX_GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        evaluations += 1;
        iters += 1;
    }
    let mid = (a + b) / F::lit(2.0);
    let fmid = f(mid);
    evaluations += 1;

    let mut out = Maximum {
        argmax: at(best_k),
        value: best,
        evaluations,
    };
    for (x, v) in [(c, fc), (d, fd), (mid, fmid)] {
        if v > out.value {
            out.argmax = x;
            out.value = v;
        }
    }
    out
}
