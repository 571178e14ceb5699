//! Vortex-stretching factor: direct strain contraction, the singular-integral
//! form split at a cutoff radius, and the lower bound on the profile size.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::fields::{field_norm, Envelope, FieldSource, NormKind, NormRequest, Profile};
use crate::numerics::{cutoff, gauss_legendre, Mat3, Vec3};
use crate::report::Entry;

/// |Omega(y)| must exceed this fraction of sup |Omega| for the direction to be defined.
pub const DIRECTION_THRESHOLD: f64 = 1e-12;

/// Inner-piece majorant constant: |alpha_in| <= 6 L sup|grad Omega|.
pub const C_IN: f64 = 6.0;

/// Xi . S Xi with S the symmetric part of `grad_u`; also returns Xi . grad_u Xi
/// (the antisymmetric part contracts to zero, so the two agree).
pub fn strain_contraction(grad_u: &Mat3, omega: &Vec3) -> (f64, f64) {
    let xi = omega / omega.norm();
    let s = (grad_u + grad_u.transpose()) * 0.5;
    ((xi.transpose() * s * xi)[0], (xi.transpose() * grad_u * xi)[0])
}

fn direct_at(profile: &Profile, y: &Vec3, omega_sup: f64) -> Result<f64> {
    let w = profile.omega_at(y);
    let threshold = DIRECTION_THRESHOLD * omega_sup;
    if !(w.norm() > threshold) {
        return Err(Error::DirectionUndefined { point: [y[0], y[1], y[2]], magnitude: w.norm(), threshold });
    }
    let (_, j) = profile.u.value_jac(y);
    let (sym, full) = strain_contraction(&j, &w);
    debug_assert!((sym - full).abs() <= 1e-10 * (1.0 + j.norm()));
    Ok(sym)
}

fn omega_sup(profile: &Profile) -> Result<f64> {
    let w = profile.omega_field()?;
    Ok(field_norm(&w, &NormRequest::new(NormKind::Sup))?.value)
}

/// A(y) = Xi . (grad U) Xi with Xi = Omega / |Omega|.
pub fn stretching_direct(profile: &Profile, y: &Vec3) -> Result<f64> {
    direct_at(profile, y, omega_sup(profile)?)
}

/// C_p = 2 6^{3/(p+3)} (3/(4 pi))^{1/(p+3)} (p-1)^{(p-1)/(p+3)}, via one logarithm sum.
pub fn cp_constant(p: f64) -> Result<f64> {
    if !(p > 1.0) || p.is_nan() {
        return Err(param("p", format!("must exceed 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let q = p + 3.0;
    let ln = 2f64.ln() + (3.0 * 6f64.ln() + (3.0 / (4.0 * PI)).ln() + (p - 1.0) * (p - 1.0).ln()) / q;
    Ok(ln.exp())
}

/// Lower bound on ||Omega||_p for profiles normalized to sup|grad Omega| = 1:
/// (1/2)(pi/1296)^{1/p} (p-1)^{-1+1/p}.
pub fn normalized_threshold(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(param("p", format!("must exceed 1, got {p}")));
    }
    Ok(0.5 * ((PI / 1296.0).ln() / p + (1.0 / p - 1.0) * (p - 1.0).ln()).exp())
}

/// Outer-piece majorant (3/(4 pi))^{1/p} (p-1)^{(p-1)/p} ||Omega||_p L^{-3/p}.
/// Infinite for p = inf: the kernel |z|^-3 is not integrable at infinity.
pub fn outer_bound(p: f64, lp: f64, l: f64) -> f64 {
    if p.is_infinite() {
        return f64::INFINITY;
    }
    (3.0 / (4.0 * PI)).powf(1.0 / p) * (p - 1.0).powf((p - 1.0) / p) * lp * l.powf(-3.0 / p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Gauss–Legendre nodes per radial panel.
    pub radial: usize,
    /// Gauss–Legendre nodes in cos(theta).
    pub polar: usize,
    /// Uniform nodes in phi.
    pub azimuthal: usize,
    /// Target for the truncated far tail.
    pub target: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { radial: 10, polar: 48, azimuthal: 96, target: 1e-8 }
    }
}

impl QuadratureOptions {
    /// The coarser companion rule used for the error estimate.
    fn coarse(&self) -> QuadratureOptions {
        QuadratureOptions {
            radial: (self.radial * 3 / 5).max(3),
            polar: (self.polar * 2 / 3).max(4),
            azimuthal: (self.azimuthal * 2 / 3).max(8),
            target: self.target,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchingResult {
    pub point: [f64; 3],
    pub cutoff: f64,
    pub p: f64,
    /// Strain contraction at the point, when U is available.
    pub a_direct: Option<f64>,
    pub a_integral: f64,
    pub alpha_in: f64,
    pub alpha_out: f64,
    pub bound_in: f64,
    pub bound_out: f64,
    /// Rule-difference estimates for each piece; `quad_error` adds the far tail.
    pub err_in: f64,
    pub err_out: f64,
    pub tail: f64,
    pub quad_error: f64,
}

impl StretchingResult {
    pub fn within_bounds(&self) -> bool {
        self.alpha_in.abs() <= self.bound_in + self.err_in && self.alpha_out.abs() <= self.bound_out + self.err_out + self.tail
    }
}

/// Norms and quadrature rules shared by many evaluations on one profile.
pub struct StretchingContext<'a> {
    profile: &'a Profile,
    omega: FieldSource,
    pub omega_sup: f64,
    pub grad_sup: f64,
    pub p: f64,
    /// ||Omega||_p (infinite for columnar fields).
    pub lp: f64,
    envelope: Envelope,
    extent: f64,
    feature: f64,
    opts: QuadratureOptions,
}

struct SphereRule {
    dirs: Vec<Vec3>,
    weights: Vec<f64>,
}

fn sphere_rule(polar: usize, azimuthal: usize) -> SphereRule {
    let (x, w) = gauss_legendre(polar);
    let mut dirs = Vec::with_capacity(polar * azimuthal);
    let mut weights = Vec::with_capacity(polar * azimuthal);
    let dphi = 2.0 * PI / azimuthal as f64;
    for (ct, wt) in x.iter().zip(&w) {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for k in 0..azimuthal {
            // half-step offset keeps nodes off the coordinate planes
            let phi = (k as f64 + 0.5) * dphi;
            dirs.push(Vec3::new(st * phi.cos(), st * phi.sin(), *ct));
            weights.push(wt * dphi);
        }
    }
    SphereRule { dirs, weights }
}

fn radial_rule(panels: &[(f64, f64)], order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::with_capacity(panels.len() * order);
    for &(a, b) in panels {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (xi, wi) in x.iter().zip(&w) {
            out.push((m + h * xi, h * wi));
        }
    }
    out
}

/// Splits [a, b] into panels no wider than max(feature, s/4).
fn subdivide(a: f64, b: f64, feature: f64, out: &mut Vec<(f64, f64)>) {
    let mut s = a;
    while s < b * (1.0 - 1e-14) {
        let w = feature.max(0.25 * s).min(b - s);
        out.push((s, s + w));
        s += w;
    }
}

/// (3/(4 pi)) bound on the contribution of |z| > radius, from the field envelope.
fn tail_bound(env: &Envelope, rho: f64, radius: f64) -> Result<f64> {
    Ok(match *env {
        Envelope::Zero => 0.0,
        Envelope::Compact { radius: rc } => {
            if radius >= rho + rc {
                0.0
            } else {
                f64::INFINITY
            }
        }
        Envelope::Gaussian { amp, center, width } => {
            let c = rho + center;
            if radius <= c {
                f64::INFINITY
            } else {
                3.0 * amp / radius * (width * PI.sqrt() / 2.0) * (-((radius - c) / width).powi(2)).exp()
            }
        }
        Envelope::PowerLaw { c, k } => {
            if k <= 0.0 {
                return Err(Error::DivergentOuter(format!("field envelope |y|^-{k} does not decay")));
            }
            if radius - rho < 1.0 {
                f64::INFINITY
            } else {
                3.0 * c * (radius - rho).powf(-k) / k
            }
        }
        Envelope::Column { line_density } => {
            if radius <= 2.0 * rho {
                f64::INFINITY
            } else {
                // a line at distance >= radius - rho, integrated against |z|^-3 from both ends
                3.0 / (4.0 * PI) * 2.0 * line_density / (radius - rho).powi(2)
            }
        }
        Envelope::Unknown => return Err(Error::DivergentOuter("no decay envelope for the vorticity".into())),
    })
}

impl<'a> StretchingContext<'a> {
    pub fn new(profile: &'a Profile, p: f64, opts: QuadratureOptions) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(param("p", format!("must be >= 1, got {p}")));
        }
        let omega = profile.omega.clone().ok_or(Error::MissingField("Omega"))?;
        let sup = field_norm(&omega, &NormRequest::new(NormKind::Sup))?.value;
        if !(sup > 0.0) {
            return Err(Error::ZeroVorticity);
        }
        let grad_sup = field_norm(&omega, &NormRequest::new(NormKind::GradSup))?.value;
        let lp = if omega.is_columnar() {
            f64::INFINITY
        } else {
            field_norm(&omega, &NormRequest::new(NormKind::Lp(p)))?.value
        };
        let (extent, feature) = omega.extent_and_feature();
        Ok(StretchingContext { profile, envelope: omega.envelope(), omega, omega_sup: sup, grad_sup, p, lp, extent, feature, opts })
    }

    pub fn direct(&self, y: &Vec3) -> Result<f64> {
        direct_at(self.profile, y, self.omega_sup)
    }

    fn far_radius(&self, rho: f64, start: f64) -> Result<(f64, f64)> {
        let mut r = start.max(rho + self.extent).max(2.0 * rho + 1.0);
        let cap = 1e6 * (self.extent + rho).max(start);
        loop {
            let t = tail_bound(&self.envelope, rho, r)?;
            if t <= 0.1 * self.opts.target || r >= cap {
                return Ok((r, t));
            }
            r *= 1.5;
        }
    }

    fn pieces(&self, y: &Vec3, xi: &Vec3, w0: &Vec3, l: f64, r_max: f64, opts: &QuadratureOptions) -> (f64, f64) {
        let sph = sphere_rule(opts.polar, opts.azimuthal);
        let kernel = |zh: &Vec3, w: &Vec3| zh.dot(xi) * zh.dot(&w.cross(xi));
        let feat = self.feature;
        let mut inner_panels = vec![(0.0, l / 8.0), (l / 8.0, l / 4.0), (l / 4.0, l / 2.0)];
        subdivide(l / 2.0, l, feat, &mut inner_panels);
        subdivide(l, 2.0 * l, feat, &mut inner_panels);
        let mut outer_panels = Vec::new();
        subdivide(l, 2.0 * l, feat, &mut outer_panels);
        subdivide(2.0 * l, r_max, feat, &mut outer_panels);
        let inner = radial_rule(&inner_panels, opts.radial);
        let outer = radial_rule(&outer_panels, opts.radial);
        let shell = |s: f64, subtract: bool| -> f64 {
            let mut acc = 0.0;
            for (d, wd) in sph.dirs.iter().zip(&sph.weights) {
                let mut w = self.omega.value(&(y + d * s));
                if subtract {
                    w -= w0;
                }
                acc += wd * kernel(d, &w);
            }
            acc
        };
        let c = 3.0 / (4.0 * PI);
        // dz/|z|^3 = s^2 ds dS / s^3
        let a_in = crate::par::sum_range(inner.len(), |i| {
            let (s, ws) = inner[i];
            ws * cutoff(s / l) * shell(s, true) / s
        });
        let a_out = crate::par::sum_range(outer.len(), |i| {
            let (s, ws) = outer[i];
            ws * (1.0 - cutoff(s / l)) * shell(s, false) / s
        });
        (c * a_in, c * a_out)
    }

    /// Both pieces at cutoff L with their majorants and error estimates.
    pub fn eval(&self, y: &Vec3, l: f64) -> Result<StretchingResult> {
        if !(l > 0.0) {
            return Err(param("L", "must be positive"));
        }
        if let Some(g) = self.omega.grid() {
            if g.boundary != crate::fields::Boundary::Periodic && 2.0 * l > g.inscribed_radius() {
                return Err(Error::CutoffTooLarge(l));
            }
        }
        let w0 = self.omega.value(y);
        let threshold = DIRECTION_THRESHOLD * self.omega_sup;
        if !(w0.norm() > threshold) {
            return Err(Error::DirectionUndefined { point: [y[0], y[1], y[2]], magnitude: w0.norm(), threshold });
        }
        let xi = w0 / w0.norm();
        let rho = y.norm();
        let (r_max, tail) = self.far_radius(rho, 2.0 * l)?;
        let (fi, fo) = self.pieces(y, &xi, &w0, l, r_max, &self.opts);
        let (ci, co) = self.pieces(y, &xi, &w0, l, r_max, &self.opts.coarse());
        let (err_in, err_out) = ((fi - ci).abs(), (fo - co).abs());
        let a_direct = if self.profile.u.is_zero() && self.profile.omega.is_some() {
            None
        } else {
            self.direct(y).ok()
        };
        Ok(StretchingResult {
            point: [y[0], y[1], y[2]],
            cutoff: l,
            p: self.p,
            a_direct,
            a_integral: fi + fo,
            alpha_in: fi,
            alpha_out: fo,
            bound_in: C_IN * l * self.grad_sup,
            bound_out: outer_bound(self.p, self.lp, l),
            err_in,
            err_out,
            tail,
            quad_error: err_in + err_out + tail,
        })
    }
}

/// One-shot form of [`StretchingContext::eval`].
pub fn stretching_integral(profile: &Profile, y: &Vec3, l: f64, p: f64) -> Result<StretchingResult> {
    StretchingContext::new(profile, p, QuadratureOptions::default())?.eval(y, l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Smallness {
    Satisfied,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub p: f64,
    pub grad_sup: f64,
    pub lp: f64,
    /// sup|grad Omega|^{3/(p+3)} ||Omega||_p^{p/(p+3)}, invariant under rescaling.
    pub size: f64,
    pub threshold: f64,
    pub normalized_threshold: f64,
    /// ||Omega||_p when the profile is already normalized.
    pub normalized_lp: Option<f64>,
    pub verdict: Smallness,
}

pub fn smallness_check(profile: &Profile, p: f64) -> Result<SmallnessReport> {
    if !(p > 3.0 * profile.gamma) {
        return Err(param("p", format!("must exceed 3 gamma = {}", 3.0 * profile.gamma)));
    }
    let cp = cp_constant(p)?;
    let omega = profile.omega.as_ref().ok_or(Error::MissingField("Omega"))?;
    let grad_sup = field_norm(omega, &NormRequest::new(NormKind::GradSup))?.value;
    let lp = field_norm(omega, &NormRequest::new(NormKind::Lp(p)))?.value;
    let size = grad_sup.powf(3.0 / (p + 3.0)) * lp.powf(p / (p + 3.0));
    let threshold = 1.0 / cp;
    let normalized = (grad_sup - 1.0).abs() <= crate::fields::profile::NORMALIZATION_TOL;
    Ok(SmallnessReport {
        p,
        grad_sup,
        lp,
        size,
        threshold,
        normalized_threshold: normalized_threshold(p)?,
        normalized_lp: normalized.then_some(lp),
        verdict: if size >= threshold { Smallness::Satisfied } else { Smallness::Violated },
    })
}

/// Grid argmax of |Omega| (ties broken toward the grid centre) refined by one
/// separable parabolic step. Errors when the maximum sits on the boundary.
pub fn argmax_vorticity(profile: &Profile) -> Result<Vec3> {
    let omega = profile.omega_field()?;
    let grid = crate::fields::norms::default_grid(&omega);
    let mags = crate::par::map_range(grid.len(), |n| omega.value(&grid.point_at(n)).norm());
    let m = mags.iter().cloned().fold(0.0, f64::max);
    if !(m > 0.0) {
        return Err(Error::ZeroVorticity);
    }
    let centre = (grid.lower() + grid.upper()) * 0.5;
    let best = (0..grid.len())
        .filter(|&n| mags[n] >= m * (1.0 - 1e-12))
        .min_by(|&a, &b| {
            let da = (grid.point_at(a) - centre).norm();
            let db = (grid.point_at(b) - centre).norm();
            da.total_cmp(&db)
        })
        .expect("nonempty");
    let idx = grid.unindex(best);
    if grid.boundary != crate::fields::Boundary::Periodic && grid.cells_from_boundary(idx) == 0 {
        return Err(Error::MaxOnBoundary);
    }
    let mut y = grid.point_at(best);
    let f0 = mags[best];
    for a in 0..3 {
        let h = grid.spacing[a];
        let mut e = Vec3::zeros();
        e[a] = h;
        let fp = omega.value(&(y + e)).norm();
        let fm = omega.value(&(y - e)).norm();
        let curv = fp - 2.0 * f0 + fm;
        if curv < 0.0 {
            let step = (0.5 * (fm - fp) / curv).clamp(-0.5, 0.5);
            y[a] += step * h;
        }
    }
    if omega.value(&y).norm() < f0 {
        y = grid.point_at(best);
    }
    Ok(y)
}

/// |A(y*) - 1| at the maximum of |Omega|; vanishes for exact profiles.
pub fn argmax_stretching_check(profile: &Profile, tol: f64) -> Result<Entry> {
    let start = std::time::Instant::now();
    let y = argmax_vorticity(profile)?;
    let a = stretching_direct(profile, &y)?;
    Ok(Entry::check("stretching.argmax", "stretching factor equals 1 where |Omega| is maximal", (a - 1.0).abs(), tol)
        .with_note(format!("y* = ({:.6}, {:.6}, {:.6}), A(y*) = {a:.9}", y[0], y[1], y[2]))
        .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Analytic, Rank};

    fn profile(u: Analytic, w: Analytic) -> Profile {
        Profile::new(0.4, FieldSource::vector(u)).unwrap().with_omega(FieldSource::vector(w)).unwrap()
    }

    #[test]
    fn rigid_rotation_and_shear_do_not_stretch() {
        let rot = Analytic::Linear { m: [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]] };
        let p = Profile::new(0.4, FieldSource::vector(rot)).unwrap();
        assert_eq!(stretching_direct(&p, &Vec3::new(0.3, 0.2, -0.1)).unwrap(), 0.0);
        let shear = Analytic::Linear { m: [[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]] };
        let p = Profile::new(0.4, FieldSource::vector(shear)).unwrap();
        assert_eq!(p.omega_at(&Vec3::zeros()), Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(stretching_direct(&p, &Vec3::new(1.0, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn burgers_stretching_equals_strain_rate() {
        let p = profile(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 }, Analytic::BurgersVorticity { swirl: 1.0 });
        for y in [Vec3::new(0.1, 0.2, 0.3), Vec3::new(-0.5, 0.4, 2.0), Vec3::zeros()] {
            assert!((stretching_direct(&p, &y).unwrap() - 0.3).abs() < 1e-14);
        }
        // Omega vanishes on the circle r = 1
        let err = stretching_direct(&p, &Vec3::new(1.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DirectionUndefined { .. }));
    }

    #[test]
    fn cp_and_thresholds() {
        // frozen from a 50-digit evaluation
        assert!((cp_constant(2.0).unwrap() / 4.400_510_119_422_613_714 - 1.0).abs() < 1e-12);
        assert!((normalized_threshold(2.0).unwrap() - 0.5 * (PI / 1296.0).sqrt()).abs() < 1e-15);
        assert!(cp_constant(1.0).is_err());
        for p in [2.0, 3.0, 5.5, 10.0] {
            // the normalized bound is C_p^{-(p+3)/p}
            let cp = cp_constant(p).unwrap();
            assert!((normalized_threshold(p).unwrap() / cp.powf(-(p + 3.0) / p) - 1.0).abs() < 1e-13);
        }
        let mut prev = cp_constant(4.0).unwrap();
        for k in 1..200 {
            let c = cp_constant(4.0 + 0.5 * k as f64).unwrap();
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn outer_bound_at_p2() {
        // (3/(4 pi))^{1/2} ||Omega||_2 L^{-3/2}
        let b = outer_bound(2.0, 1.0, 0.25);
        assert!((b - (3.0 / (4.0 * PI)).sqrt() * 8.0).abs() < 1e-14);
    }

    #[test]
    fn tiny_profile_violates_smallness_and_verdict_scales() {
        let w = Analytic::Gaussian { amp: 1e-6, width: 1.0, dir: Some([0.0, 0.0, 1.0]) };
        let p = Profile::new(0.45, FieldSource::zero(Rank::Vector)).unwrap().with_omega(FieldSource::vector(w)).unwrap();
        let r = smallness_check(&p, 2.0).unwrap();
        assert_eq!(r.verdict, Smallness::Violated);
        assert!((r.threshold * cp_constant(2.0).unwrap() - 1.0).abs() < 1e-15);
        for lambda in [0.5, 2.0] {
            let s = smallness_check(&p.rescaled(lambda), 2.0).unwrap();
            assert_eq!(s.verdict, r.verdict);
            assert!((s.size / r.size - 1.0).abs() < 1e-6);
        }
        assert!(smallness_check(&p, 1.35).is_err());
    }

    #[test]
    fn argmax_on_burgers_gives_strain_rate() {
        let p = profile(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 }, Analytic::BurgersVorticity { swirl: 1.0 });
        let e = argmax_stretching_check(&p, 1e-3).unwrap();
        assert!((e.residual() - 0.7).abs() < 1e-12);
        assert_eq!(e.verdict, crate::report::Verdict::Fail);
    }

    #[test]
    fn argmax_location_scales() {
        let w = Analytic::Bump { amp: [0.0, 0.0, 1.0], center: [0.3, -0.2, 0.5], radius: 1.0 };
        let p = profile(Analytic::Zero, w);
        let y = argmax_vorticity(&p).unwrap();
        let y2 = argmax_vorticity(&p.rescaled(2.0)).unwrap();
        assert!((y2 - 2.0 * y).norm() < 1e-9, "{y} {y2}");
    }

    #[test]
    fn subtracted_inner_piece_of_linear_vorticity_vanishes() {
        // Omega(y+z) - Omega(y) linear in z: the odd angular integrand cancels exactly
        let w = Analytic::Linear { m: [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.3, 0.2, 0.0]] };
        let w = Analytic::Sum { terms: vec![w, Analytic::Bump { amp: [0.0, 0.0, 1.0], center: [0.0; 3], radius: 50.0 }] };
        let p = profile(Analytic::Zero, w.clone());
        let ctx = StretchingContext {
            profile: &p,
            omega: FieldSource::vector(w),
            omega_sup: 1.0,
            grad_sup: 1.0,
            p: 2.0,
            lp: 1.0,
            envelope: Envelope::Unknown,
            extent: 1.0,
            feature: 1.0,
            opts: QuadratureOptions::default(),
        };
        let y = Vec3::new(0.1, 0.0, 0.0);
        let w0 = ctx.omega.value(&y);
        let xi = w0 / w0.norm();
        let (a_in, _) = ctx.pieces(&y, &xi, &w0, 0.1, 0.3, &ctx.opts);
        assert!(a_in.abs() < 1e-8, "{a_in}");
    }
}
