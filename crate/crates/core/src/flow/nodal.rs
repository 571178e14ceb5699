//! Zeros of the transport velocity and local diagnostics around them.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::fields::{decay_envelope, r_flat, Profile};
use crate::numerics::{fibonacci_sphere, fit_line, Mat3, Vec3};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodalPoint {
    pub location: Vec3,
    /// |V(y*)|
    pub residual: f64,
    /// Eigenvalues of the strain at y*, ascending.
    pub eigenvalues: [f64; 3],
    pub omega: Vec3,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodalSet {
    pub points: Vec<NodalPoint>,
    pub r_flat: f64,
    /// Seeds whose Newton iteration failed.
    pub dropped: Vec<Vec3>,
    pub warnings: Vec<String>,
}

/// Above this many distinct zeros the set is reported as possibly non-isolated.
pub const MAX_ISOLATED: usize = 64;
pub const DEDUP_RADIUS: f64 = 1e-6;

fn strain_eigenvalues(j: &Mat3) -> [f64; 3] {
    let s = 0.5 * (j + j.transpose());
    let mut e: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    [e[0], e[1], e[2]]
}

pub fn describe_point(profile: &Profile, y: Vec3) -> NodalPoint {
    let (u, j) = profile.u.value_jac(&y);
    NodalPoint {
        location: y,
        residual: (y * profile.gamma + u).norm(),
        eigenvalues: strain_eigenvalues(&j),
        omega: profile.omega_at(&y),
        certificate: None,
    }
}

/// Damped Newton on V with a central-difference Jacobian.
fn newton(profile: &Profile, mut y: Vec3, scale: f64) -> Option<Vec3> {
    let v = |p: &Vec3| profile.transport_velocity(p);
    let h = 1e-6 * scale;
    let mut f = v(&y);
    for _ in 0..100 {
        let fn_ = f.norm();
        if fn_ <= 1e-14 * scale {
            return Some(y);
        }
        let mut j = Mat3::zeros();
        for c in 0..3 {
            let mut e = Vec3::zeros();
            e[c] = h;
            let d = (v(&(y + e)) - v(&(y - e))) / (2.0 * h);
            j.set_column(c, &d);
        }
        let step = j.lu().solve(&(-f))?;
        let mut lambda = 1.0;
        loop {
            let yn = y + step * lambda;
            let fnew = v(&yn);
            if fnew.norm() < fn_ || lambda < 1e-6 {
                let done = (yn - y).norm() <= 1e-15 * scale.max(y.norm());
                y = yn;
                f = fnew;
                if done {
                    return (f.norm() <= 1e-10 * scale).then_some(y);
                }
                break;
            }
            lambda *= 0.5;
        }
    }
    (f.norm() <= 1e-10 * scale).then_some(y)
}

/// Coarse scan of |V| on a cube of half-width R_flat, Newton from local
/// minima, deduplication, and the origin always included.
pub fn nodal_set(profile: &Profile) -> Result<NodalSet> {
    let gamma = profile.gamma;
    let mut warnings = Vec::new();
    let c = match profile.c_flat {
        Some(c) => Some(c),
        None => match decay_envelope(profile) {
            Ok(e) => Some(e.c_flat),
            Err(e) => {
                warnings.push(format!("no decay envelope ({e}); scanning the evaluation grid"));
                None
            }
        },
    };
    let rb = match c {
        Some(c) => r_flat(c, gamma),
        None => profile.eval_grid().inscribed_radius().max(1.0),
    };
    let n = 33usize;
    let h = 2.0 * rb / (n - 1) as f64;
    let pt = |i: usize, j: usize, k: usize| Vec3::new(-rb + i as f64 * h, -rb + j as f64 * h, -rb + k as f64 * h);
    let mags = crate::par::map_range(n * n * n, |q| {
        let (i, j, k) = (q / (n * n), (q / n) % n, q % n);
        profile.transport_velocity(&pt(i, j, k)).norm()
    });
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    // Lipschitz scale: a zero lies within a cell of any minimum below h * lip
    let lip = mags.iter().fold(0.0f64, |m, v| m.max(*v)) / rb.max(1e-300) + gamma;
    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let m = mags[idx(i, j, k)];
                if m > 2.0 * h * lip {
                    continue;
                }
                let mut is_min = true;
                'nb: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        for dk in -1i64..=1 {
                            let (a, b, c) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                            if (di, dj, dk) == (0, 0, 0) || a < 0 || b < 0 || c < 0 || a >= n as i64 || b >= n as i64 || c >= n as i64 {
                                continue;
                            }
                            if mags[idx(a as usize, b as usize, c as usize)] < m {
                                is_min = false;
                                break 'nb;
                            }
                        }
                    }
                }
                if is_min {
                    seeds.push(pt(i, j, k));
                }
            }
        }
    }
    let scale = rb.max(1.0);
    let results = crate::par::map_slice(&seeds, |s| (*s, newton(profile, *s, scale)));
    let mut found: Vec<Vec3> = vec![Vec3::zeros()];
    if let Some(z) = newton(profile, Vec3::zeros(), scale) {
        found[0] = z;
    }
    let mut dropped = Vec::new();
    for (s, r) in results {
        match r {
            Some(y) => {
                if y.norm() > rb * (1.0 + 1e-9) + DEDUP_RADIUS {
                    warnings.push(format!("zero at {:?} lies outside R_flat = {rb}", y.as_slice()));
                }
                if found.iter().all(|f| (f - y).norm() > DEDUP_RADIUS) {
                    found.push(y);
                }
            }
            None => dropped.push(s),
        }
    }
    if found.len() > MAX_ISOLATED {
        warnings.push(format!("{} distinct zeros: possibly non-isolated", found.len()));
    }
    let points = found.into_iter().map(|y| describe_point(profile, y)).collect();
    Ok(NodalSet { points, r_flat: rb, dropped, warnings })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub eps: f64,
    /// Minimum of V(y).(y - y*)/|y - y*|^2 over the samples (may be negative).
    pub c_raw: f64,
    /// max(c_raw, 0)
    pub c_star: f64,
    pub holds: bool,
    pub samples: usize,
    pub omega_nonzero: bool,
    /// |S Xi - Xi| when Omega(y*) != 0.
    pub eigenpair_residual: Option<f64>,
    pub eigenpair_tolerance: f64,
    /// 1/2 + c_* when the property holds.
    pub gamma_bound: Option<f64>,
    /// Strain eigenvalues inside [c_* - gamma, 2(gamma - c_*)].
    pub eigen_interval_ok: bool,
}

pub const CERTIFICATE_RADII: [f64; 4] = [0.125, 0.25, 0.5, 1.0];
pub const CERTIFICATE_DIRECTIONS: usize = 512;

/// Empirical outgoing-property certificate on the ball of radius `eps` around y*.
pub fn outgoing_certificate(profile: &Profile, point: &NodalPoint, eps: f64, others: &[Vec3]) -> Result<Certificate> {
    if !(eps > 0.0) {
        return Err(param("eps_star", "must be positive"));
    }
    let y0 = point.location;
    for o in others {
        let d = (o - y0).norm();
        if d > DEDUP_RADIUS && d <= eps {
            return Err(Error::ShrinkRequested(d));
        }
    }
    let dirs = fibonacci_sphere(CERTIFICATE_DIRECTIONS);
    let vals = crate::par::map_range(CERTIFICATE_RADII.len() * dirs.len(), |q| {
        let r = CERTIFICATE_RADII[q / dirs.len()] * eps;
        let d = dirs[q % dirs.len()];
        let y = y0 + d * r;
        profile.transport_velocity(&y).dot(&(d * r)) / (r * r)
    });
    let c_raw = vals.into_iter().fold(f64::INFINITY, f64::min);
    let gamma = profile.gamma;
    let holds = c_raw > 0.0;
    let c_star = c_raw.max(0.0);
    let (w, jw) = profile.omega_jac(&y0);
    let (u, ju) = profile.u.value_jac(&y0);
    let wn = w.norm();
    let omega_nonzero = wn > crate::stretching::DIRECTION_THRESHOLD;
    let local_res = (w + jw * (y0 * gamma + u) - ju * w).norm();
    let tol = 1e-3 + 10.0 * local_res;
    let eigenpair_residual = omega_nonzero.then(|| {
        let xi = w / wn;
        let s = 0.5 * (ju + ju.transpose());
        (s * xi - xi).norm()
    });
    let [l1, _, l3] = point.eigenvalues;
    let eigen_interval_ok = l1 >= c_star - gamma - 1e-9 && l3 <= 2.0 * (gamma - c_star) + 1e-9;
    Ok(Certificate {
        eps,
        c_raw,
        c_star,
        holds,
        samples: CERTIFICATE_RADII.len() * CERTIFICATE_DIRECTIONS,
        omega_nonzero,
        eigenpair_residual,
        eigenpair_tolerance: tol,
        gamma_bound: holds.then_some(0.5 + c_star),
        eigen_interval_ok,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VanishingOrder {
    /// Fitted slope of log max|Omega| against log radius (infinite when flat).
    pub order: f64,
    pub fit_residual: f64,
    pub infinite: bool,
    /// (radius, max |Omega| on the shell)
    pub shells: Vec<(f64, f64)>,
}

pub const DEFAULT_ORDER_CAP: f64 = 8.0;

pub fn vanishing_order(profile: &Profile, y0: &Vec3, scale: f64, cap: f64) -> Result<VanishingOrder> {
    let dirs = fibonacci_sphere(64);
    let shells: Vec<(f64, f64)> = (0..16)
        .map(|i| {
            let r = scale * 10f64.powf(-3.0 + 2.0 * i as f64 / 15.0);
            let m = dirs.iter().map(|d| profile.omega_at(&(y0 + d * r)).norm()).fold(0.0, f64::max);
            (r, m)
        })
        .collect();
    let at = profile.omega_at(y0).norm();
    let outer = shells.last().map(|s| s.1).unwrap_or(0.0);
    if at > 1e-8 * outer.max(1e-300) && at > 0.0 {
        return Err(Error::NotVanishing(at));
    }
    let nz: Vec<(f64, f64)> = shells.iter().filter(|s| s.1 > 0.0).copied().collect();
    if nz.len() < 3 {
        return Ok(VanishingOrder { order: f64::INFINITY, fit_residual: 0.0, infinite: true, shells });
    }
    let x: Vec<f64> = nz.iter().map(|s| s.0.ln()).collect();
    let y: Vec<f64> = nz.iter().map(|s| s.1.ln()).collect();
    let fit = fit_line(&x, &y);
    // underflowed inner shells are themselves evidence of flatness
    let infinite = fit.slope > cap || nz.len() < shells.len();
    Ok(VanishingOrder { order: fit.slope, fit_residual: fit.rms_residual, infinite, shells })
}
