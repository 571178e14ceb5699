//! Dormand–Prince 5(4) with step control, landing exactly on requested output times.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest admissible |h| relative to the span.
    pub h_min_rel: f64,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, max_steps: 2_000_000, h_min_rel: 1e-14 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub tolerance: f64,
}

pub struct OdeOutput {
    /// States at the output times actually reached.
    pub states: Vec<Vec<f64>>,
    pub stats: OdeStats,
    /// Why integration stopped early, if it did.
    pub failure: Option<String>,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(t, y) from (t0, y0) through the monotone list `times`
/// (all on one side of t0). The first returned state is y0 when times[0] == t0.
pub fn integrate(
    mut f: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    y0: &[f64],
    times: &[f64],
    opts: &OdeOptions,
) -> OdeOutput {
    let n = y0.len();
    let mut stats = OdeStats { tolerance: opts.rtol, ..Default::default() };
    let mut states = Vec::with_capacity(times.len());
    let Some(&t_end) = times.last() else {
        return OdeOutput { states, stats, failure: None };
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs().max(1e-300);
    let h_min = opts.h_min_rel * span.max(1.0);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    f(t, &y, &mut k[0]);
    // initial step from the derivative scale
    let d0 = rms(&y, &y, opts);
    let d1 = rms(&k[0], &y, opts);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span) * dir;
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut next = 0;
    while next < times.len() && (times[next] - t) * dir <= 0.0 {
        states.push(y.clone());
        next += 1;
    }
    let mut fsal = true;
    while next < times.len() {
        if stats.steps + stats.rejected >= opts.max_steps {
            return OdeOutput { states, stats, failure: Some(format!("step budget exhausted at t = {t}")) };
        }
        let target = times[next];
        let mut hs = h;
        let mut lands = false;
        if (t + hs - target) * dir >= 0.0 {
            hs = target - t;
            lands = true;
        }
        if !fsal {
            f(t, &y, &mut k[0]);
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += hs * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            f(t + C[s] * hs, &ytmp, &mut k[s]);
        }
        // row 6 of A equals B, so ytmp is the fifth-order solution
        ynew.copy_from_slice(&ytmp);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((hs * e / sc).abs());
        }
        if !err.is_finite() {
            stats.rejected += 1;
            h = hs * 0.2;
            fsal = false;
            if h.abs() < h_min {
                return OdeOutput { states, stats, failure: Some(format!("non-finite derivative near t = {t}")) };
            }
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            stats.steps += 1;
            t = if lands { target } else { t + hs };
            std::mem::swap(&mut y, &mut ynew);
            // FSAL: the last stage is f at the new point
            let last = k[6].clone();
            k[0] = last;
            fsal = true;
            if lands {
                while next < times.len() && (times[next] - t) * dir <= 0.0 {
                    states.push(y.clone());
                    next += 1;
                }
                // a clipped step says nothing about the achievable size
                h = (hs * factor).abs().max(h.abs()) * dir;
            } else {
                h = hs * factor;
            }
        } else {
            stats.rejected += 1;
            h = hs * factor.min(1.0);
            fsal = true;
            if h.abs() < h_min {
                return OdeOutput { states, stats, failure: Some(format!("step size underflow at t = {t}")) };
            }
        }
    }
    OdeOutput { states, stats, failure: None }
}

fn rms(v: &[f64], y: &[f64], opts: &OdeOptions) -> f64 {
    let s: f64 = v.iter().zip(y).map(|(a, b)| (a / (opts.atol + opts.rtol * b.abs())).powi(2)).sum();
    (s / v.len().max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_hits_sample_times() {
        let times: Vec<f64> = (0..=6).map(|i| i as f64 * 0.5).collect();
        let out = integrate(|_, y, d| d[0] = 0.4 * y[0], 0.0, &[1.0], &times, &OdeOptions::with_tol(1e-10));
        assert!(out.failure.is_none());
        assert_eq!(out.states.len(), times.len());
        for (t, s) in times.iter().zip(&out.states) {
            assert!((s[0] - (0.4 * t).exp()).abs() < 1e-9 * (0.4 * t).exp());
        }
    }

    #[test]
    fn backward_in_time() {
        let times = [0.0, -1.0, -2.0];
        let out = integrate(|_, y, d| d[0] = y[0], 0.0, &[1.0], &times, &OdeOptions::with_tol(1e-11));
        assert!((out.states[2][0] - (-2f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn rotation_keeps_radius() {
        let times = [0.0, 10.0];
        let out = integrate(|_, y, d| { d[0] = -y[1]; d[1] = y[0]; }, 0.0, &[1.0, 0.0], &times, &OdeOptions::with_tol(1e-10));
        let s = &out.states[1];
        assert!((s[0] - 10f64.cos()).abs() < 1e-8 && (s[1] - 10f64.sin()).abs() < 1e-8);
    }
}
