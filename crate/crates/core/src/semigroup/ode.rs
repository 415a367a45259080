//! Dormand–Prince 5(4) with embedded error control, on complex vectors.

use crate::error::{Error, Result};
use crate::CVector;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 5_000_000;

fn lin(y: &CVector, terms: &[(f64, &CVector)], h: f64) -> CVector {
    let mut out = y.clone();
    for &(w, k) in terms {
        if w != 0.0 {
            out.axpy(Complex64::new(h * w, 0.0), k, Complex64::new(1.0, 0.0));
        }
    }
    out
}

fn scaled_rms(v: &CVector, y0: &CVector, y1: &CVector, tol: OdeTolerances) -> f64 {
    let n = v.len().max(1) as f64;
    let sum: f64 = v
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = tol.atol + tol.rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step(
    f: &dyn Fn(&CVector) -> CVector,
    y0: &CVector,
    f0: &CVector,
    tol: OdeTolerances,
    span: f64,
) -> f64 {
    let d0 = scaled_rms(y0, y0, y0, tol);
    let d1 = scaled_rms(f0, y0, y0, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = lin(y0, &[(1.0, f0)], h0);
    let f1 = f(&y1);
    let diff = &f1 - f0;
    let d2 = scaled_rms(&diff, y0, y0, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = f(y)` from `y(t0) = y0` and returns `y` at every entry of
/// `times` (which must start at or after `t0` and increase). Steps are
/// clipped so that each output time is hit exactly.
pub fn integrate(
    f: &dyn Fn(&CVector) -> CVector,
    t0: f64,
    y0: &CVector,
    times: &[f64],
    tol: OdeTolerances,
) -> Result<Vec<CVector>> {
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(&y);
    let span = times.last().map_or(0.0, |&tl| tl - t0);
    let mut h = if span > 0.0 {
        initial_step(f, &y, &k1, tol, span)
    } else {
        0.0
    };
    let mut steps = 0usize;
    for &target in times {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::StiffIntegration { t, step: h });
            }
            let remaining = target - t;
            let hit = h >= remaining;
            let step = if hit { remaining } else { h };
            if step <= 1e-13 * t.abs().max(1.0) && !hit {
                return Err(Error::StiffIntegration { t, step });
            }
            let k2 = f(&lin(&y, &[(A21, &k1)], step));
            let k3 = f(&lin(&y, &[(A31, &k1), (A32, &k2)], step));
            let k4 = f(&lin(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step));
            let k5 = f(&lin(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step));
            let k6 = f(&lin(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                step,
            ));
            let y_new = lin(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                step,
            );
            let k7 = f(&y_new);
            let zero = CVector::zeros(y.len());
            let err = lin(
                &zero,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                step,
            );
            let en = scaled_rms(&err, &y, &y_new, tol);
            let factor = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if en <= 1.0 {
                t = if hit { target } else { t + step };
                y = y_new;
                k1 = k7;
                // keep the proposal based on the full step, not the clipped one
                h = if hit { h.max(step * factor) } else { step * factor };
            } else {
                h = step * factor.min(1.0);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
