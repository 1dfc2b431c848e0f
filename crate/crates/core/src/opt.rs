//! Quasi-Newton minimizer used by the trainer and the coefficient finder.
//!
//! Plain BFGS with a strong-Wolfe line search. The objective callback fills
//! in the gradient and returns the value; everything is deterministic.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stop when the gradient infinity norm falls below this.
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iters: 600,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

pub fn minimize<F>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut grad_buf = vec![0.0f64; n];
    let mut fx = f(x.as_slice(), &mut grad_buf);
    let mut g = DVector::from_column_slice(&grad_buf);
    if n == 0 {
        return BfgsOutcome {
            x: vec![],
            value: fx,
            grad_inf_norm: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut first_update = true;

    for iter in 0..opts.max_iters {
        let gnorm = g.amax();
        if gnorm < opts.grad_tol {
            return BfgsOutcome {
                x: x.as_slice().to_vec(),
                value: fx,
                grad_inf_norm: gnorm,
                iterations: iter,
                converged: true,
            };
        }
        let mut p = -(&h * &g);
        let mut slope = p.dot(&g);
        if slope >= 0.0 {
            // Curvature information went bad; restart from steepest descent.
            h = DMatrix::identity(n, n);
            first_update = true;
            p = -g.clone();
            slope = p.dot(&g);
        }
        let alpha0 = if iter == 0 {
            (1.0 / g.norm().max(1.0)).min(1.0)
        } else {
            1.0
        };
        let ls = line_search(&mut f, &x, fx, &g, &p, slope, alpha0, &mut grad_buf);
        let (alpha, fx_new, g_new) = match ls {
            Some(v) => v,
            None => {
                // No acceptable step: stop at the current point.
                return BfgsOutcome {
                    x: x.as_slice().to_vec(),
                    value: fx,
                    grad_inf_norm: gnorm,
                    iterations: iter,
                    converged: false,
                };
            }
        };
        let s = alpha * &p;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if first_update {
                let scale = sy / y.dot(&y);
                h = DMatrix::identity(n, n) * scale;
                first_update = false;
            }
            let rho = 1.0 / sy;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            let hy_s = &hy * s.transpose();
            h = h.clone() - rho * (&s * hy.transpose() + hy_s)
                + rho * rho * yhy * (&s * s.transpose())
                + rho * (&s * s.transpose());
        }
        x += s;
        fx = fx_new;
        g = g_new;
    }
    BfgsOutcome {
        x: x.as_slice().to_vec(),
        value: fx,
        grad_inf_norm: g.amax(),
        iterations: opts.max_iters,
        converged: g.amax() < opts.grad_tol,
    }
}

/// Strong-Wolfe line search (bracket then zoom). Returns
/// `(alpha, f(x + alpha p), grad(x + alpha p))`.
#[allow(clippy::too_many_arguments)]
fn line_search<F>(
    f: &mut F,
    x: &DVector<f64>,
    f0: f64,
    _g0: &DVector<f64>,
    p: &DVector<f64>,
    slope0: f64,
    alpha0: f64,
    grad_buf: &mut [f64],
) -> Option<(f64, f64, DVector<f64>)>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let mut eval = |alpha: f64, grad_buf: &mut [f64]| -> (f64, DVector<f64>, f64) {
        let xa = x + alpha * p;
        let fa = f(xa.as_slice(), grad_buf);
        let ga = DVector::from_column_slice(grad_buf);
        let da = ga.dot(p);
        (fa, ga, da)
    };

    let alpha_max = 1e4;
    let mut alpha_prev = 0.0f64;
    let mut f_prev = f0;
    let mut alpha = alpha0;
    let mut bracket: Option<(f64, f64, f64, f64)> = None; // (lo, f_lo, hi, f_hi)
    let mut lo_slope = slope0;

    for i in 0..25 {
        let (fa, ga, da) = eval(alpha, grad_buf);
        if fa > f0 + C1 * alpha * slope0 || (i > 0 && fa >= f_prev) {
            bracket = Some((alpha_prev, f_prev, alpha, fa));
            break;
        }
        if da.abs() <= -C2 * slope0 {
            return Some((alpha, fa, ga));
        }
        if da >= 0.0 {
            bracket = Some((alpha, fa, alpha_prev, f_prev));
            lo_slope = da;
            break;
        }
        alpha_prev = alpha;
        f_prev = fa;
        lo_slope = da;
        alpha = (2.0 * alpha).min(alpha_max);
        if alpha >= alpha_max {
            return Some((alpha_max, fa, ga));
        }
    }

    let (mut lo, mut f_lo, mut hi, mut f_hi) = bracket?;
    let mut lo_d = lo_slope;
    for _ in 0..40 {
        // Quadratic interpolation on (lo, f_lo, lo_d) and (hi, f_hi), with a
        // bisection fallback when it lands outside or degenerates.
        let mut a = {
            let denom = 2.0 * (f_hi - f_lo - lo_d * (hi - lo));
            if denom.abs() > 1e-300 {
                lo - lo_d * (hi - lo) * (hi - lo) / denom
            } else {
                0.5 * (lo + hi)
            }
        };
        let lo_hi_min = lo.min(hi);
        let lo_hi_max = lo.max(hi);
        let span = lo_hi_max - lo_hi_min;
        if !(a.is_finite()) || a <= lo_hi_min + 0.1 * span || a >= lo_hi_max - 0.1 * span {
            a = 0.5 * (lo + hi);
        }
        let (fa, ga, da) = eval(a, grad_buf);
        if fa > f0 + C1 * a * slope0 || fa >= f_lo {
            hi = a;
            f_hi = fa;
        } else {
            if da.abs() <= -C2 * slope0 {
                return Some((a, fa, ga));
            }
            if da * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = a;
            f_lo = fa;
            lo_d = da;
        }
        if (hi - lo).abs() < 1e-16 * lo.abs().max(1.0) {
            // Interval collapsed; accept lo if it at least decreases f.
            if f_lo < f0 {
                let (fa, ga, _) = eval(lo, grad_buf);
                return Some((lo, fa, ga));
            }
            return None;
        }
    }
    if f_lo < f0 {
        let (fa, ga, _) = eval(lo, grad_buf);
        return Some((lo, fa, ga));
    }
    None
}
