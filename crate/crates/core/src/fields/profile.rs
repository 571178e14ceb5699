use serde::{Deserialize, Serialize};

use super::grid::Grid3;
use super::norms::{field_norm, grid_for, NormKind, NormRequest};
use super::ops::{curl_of, DiffMethod, Nodal};
use super::sampled::Rank;
use super::source::FieldSource;
use crate::error::{param, Error, Result};
use crate::numerics::{fibonacci_sphere, Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Cartesian,
    Axisym,
}

/// Candidate self-similar profile (gamma, U, Omega, P).
#[derive(Clone, Debug)]
pub struct Profile {
    pub gamma: f64,
    pub u: FieldSource,
    pub omega: Option<FieldSource>,
    pub p: Option<FieldSource>,
    pub c_flat: Option<f64>,
    pub symmetry: Symmetry,
}

/// Far-field power laws used to extend sampled fields beyond their grid.
pub fn far_exponents(gamma: f64) -> (f64, f64, f64) {
    (1.0 - 1.0 / gamma, -1.0 / gamma, 2.0 - 2.0 / gamma)
}

impl Profile {
    pub fn new(gamma: f64, u: FieldSource) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidProfile(format!("gamma must be positive, got {gamma}")));
        }
        if u.rank() != Rank::Vector {
            return Err(Error::RankMismatch("U must be a vector field".into()));
        }
        Ok(Profile { gamma, u, omega: None, p: None, c_flat: None, symmetry: Symmetry::Cartesian })
    }

    pub fn trivial(gamma: f64) -> Result<Self> {
        Ok(Profile::new(gamma, FieldSource::zero(Rank::Vector))?
            .with_omega(FieldSource::zero(Rank::Vector))?
            .with_pressure(FieldSource::zero(Rank::Scalar))?)
    }

    pub fn with_omega(mut self, omega: FieldSource) -> Result<Self> {
        if omega.rank() != Rank::Vector {
            return Err(Error::RankMismatch("Omega must be a vector field".into()));
        }
        self.omega = Some(omega);
        Ok(self)
    }

    pub fn with_pressure(mut self, p: FieldSource) -> Result<Self> {
        if p.rank() != Rank::Scalar {
            return Err(Error::RankMismatch("P must be a scalar field".into()));
        }
        self.p = Some(p);
        Ok(self)
    }

    pub fn with_c_flat(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(param("c_flat", "must be >= 0"));
        }
        self.c_flat = Some(c);
        Ok(self)
    }

    pub fn velocity(&self, y: &Vec3) -> Vec3 {
        self.u.value(y)
    }

    /// V = gamma y + U.
    pub fn transport_velocity(&self, y: &Vec3) -> Vec3 {
        y * self.gamma + self.u.value(y)
    }

    /// Vorticity and its Jacobian; from Omega if supplied, otherwise from
    /// curl U with the Jacobian by central differences.
    pub fn omega_jac(&self, y: &Vec3) -> (Vec3, Mat3) {
        match &self.omega {
            Some(w) => w.value_jac(y),
            None => {
                let (_, feat) = self.u.extent_and_feature();
                let h = 1e-4 * feat;
                let curl = |p: &Vec3| curl_of(&self.u.value_jac(p).1);
                let mut j = Mat3::zeros();
                for c in 0..3 {
                    let mut e = Vec3::zeros();
                    e[c] = h;
                    let d = (curl(&(y + e)) - curl(&(y - e))) / (2.0 * h);
                    for i in 0..3 {
                        j[(i, c)] = d[i];
                    }
                }
                (curl(y), j)
            }
        }
    }

    pub fn omega_at(&self, y: &Vec3) -> Vec3 {
        match &self.omega {
            Some(w) => w.value(y),
            None => curl_of(&self.u.value_jac(y).1),
        }
    }

    /// Vorticity as a field source (curl of U sampled on the evaluation grid if absent).
    pub fn omega_field(&self) -> Result<FieldSource> {
        match &self.omega {
            Some(w) => Ok(w.clone()),
            None => super::ops::differential(&self.u, super::ops::DiffOp::Curl, DiffMethod::Centered4, Some(&self.eval_grid())),
        }
    }

    /// Grid on which residuals and scans are evaluated: the first sampled
    /// field's grid, otherwise a cube sized from the analytic extents.
    pub fn eval_grid(&self) -> Grid3 {
        for f in [Some(&self.u), self.omega.as_ref(), self.p.as_ref()].into_iter().flatten() {
            if let FieldSource::Sampled(s) = f {
                return s.grid.clone();
            }
        }
        for f in [Some(&self.u), self.omega.as_ref()].into_iter().flatten() {
            if let FieldSource::CurlOfPotential(s) = f {
                return s.grid.clone();
            }
        }
        let mut extent: f64 = 2.0;
        let mut feat = f64::INFINITY;
        for f in [Some(&self.u), self.omega.as_ref(), self.p.as_ref()].into_iter().flatten() {
            if f.is_zero() {
                continue;
            }
            let (e, l) = f.extent_and_feature();
            extent = extent.max(e);
            feat = feat.min(l);
        }
        if !feat.is_finite() {
            feat = 0.5;
        }
        // residual grids stay modest: at most 97 nodes per axis
        let mut g = grid_for(extent, feat);
        if g.dims[0] > 97 {
            g = Grid3::cube(extent, 97).expect("valid cube");
        }
        g
    }

    /// lambda-rescaled profile: U_l = l U(y/l), Omega_l = Omega(y/l), P_l = l^2 P(y/l).
    pub fn rescaled(&self, lambda: f64) -> Profile {
        Profile {
            gamma: self.gamma,
            u: self.u.rescaled(lambda, 1.0),
            omega: self.omega.as_ref().map(|w| w.rescaled(lambda, 0.0)),
            p: self.p.as_ref().map(|p| p.rescaled(lambda, 2.0)),
            c_flat: None,
            symmetry: self.symmetry,
        }
    }

    /// Diagnostics for the soft invariants: |U(0)| and the interior relative
    /// deviation of Omega from curl U when both are sampled on one grid.
    pub fn invariant_diagnostics(&self) -> Result<ProfileDiagnostics> {
        let u0 = self.u.value(&Vec3::zeros()).norm();
        let mut omega_consistency = None;
        if let (Some(FieldSource::Sampled(w)), FieldSource::Sampled(u)) = (&self.omega, &self.u) {
            if w.grid.same_nodes(&u.grid) {
                let g = &u.grid;
                let nu = Nodal::from_samples(g, &u.data, DiffMethod::Centered4)?;
                let (mut num, mut den): (f64, f64) = (0.0, 0.0);
                for n in 0..g.len() {
                    if g.cells_from_boundary(g.unindex(n)) < 3 {
                        continue;
                    }
                    let c = curl_of(&nu.jac[n]);
                    num = num.max((c - w.node(n)).norm());
                    den = den.max(w.node(n).norm());
                }
                omega_consistency = Some(if den > 0.0 { num / den } else { num });
            }
        }
        Ok(ProfileDiagnostics { u_at_origin: u0, omega_consistency })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileDiagnostics {
    pub u_at_origin: f64,
    pub omega_consistency: Option<f64>,
}

pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Rescales so that sup |grad Omega| = 1. Returns the profile and lambda.
pub fn normalize_profile(profile: &Profile) -> Result<(Profile, f64)> {
    let omega = profile.omega.as_ref().ok_or(Error::MissingField("Omega"))?;
    if omega.is_zero() {
        return Err(Error::ZeroVorticity);
    }
    let g = field_norm(omega, &NormRequest::new(NormKind::GradSup))?.value;
    if !(g > 0.0) {
        return Err(Error::ZeroVorticity);
    }
    if (g - 1.0).abs() <= NORMALIZATION_TOL {
        return Ok((profile.clone(), 1.0));
    }
    Ok((profile.rescaled(g), g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayEnvelope {
    pub c_flat: f64,
    /// Radius of the shell where the constant is attained.
    pub attained_at: f64,
    /// Per-shell maxima of the two ratios (radius, velocity ratio, vorticity ratio).
    pub shells: Vec<(f64, f64, f64)>,
}

/// Smallest C with |U| <= C|y|<y>^{-1/gamma} and |Omega| + |grad U| <= C<y>^{-1/gamma}
/// over sampled shells.
pub fn decay_envelope(profile: &Profile) -> Result<DecayEnvelope> {
    let gamma = profile.gamma;
    let mut extent: f64 = 1.0;
    for f in [Some(&profile.u), profile.omega.as_ref()].into_iter().flatten() {
        if !f.is_zero() {
            extent = extent.max(f.extent_and_feature().0);
        }
    }
    if let Some(g) = profile.u.grid() {
        extent = extent.max(g.inscribed_radius());
    }
    let dirs = fibonacci_sphere(256);
    let nshell = 32;
    let mut shells = Vec::with_capacity(nshell);
    for s in 0..nshell {
        let r = extent * (s as f64 + 1.0) / nshell as f64;
        let bracket = (1.0 + r * r).sqrt().powf(1.0 / gamma);
        let (mut ru, mut rw): (f64, f64) = (0.0, 0.0);
        for d in &dirs {
            let y = d * r;
            let (u, j) = profile.u.value_jac(&y);
            let w = profile.omega_at(&y);
            ru = ru.max(u.norm() * bracket / r);
            rw = rw.max((w.norm() + j.norm()) * bracket);
        }
        shells.push((r, ru, rw));
    }
    let (mut c, mut at) = (0.0, 0.0);
    for &(r, a, b) in &shells {
        if a.max(b) > c {
            c = a.max(b);
            at = r;
        }
    }
    let last: Vec<f64> = shells[nshell - 3..].iter().map(|s| s.1.max(s.2)).collect();
    let growing = last[0] > 0.0 && last[1] > last[0] * 1.01 && last[2] > last[1] * 1.01;
    if growing && at == shells[nshell - 1].0 {
        return Err(Error::EnvelopeViolated(format!(
            "ratio still growing at the outermost shell r = {at:.3} (C >= {c:.4e})"
        )));
    }
    Ok(DecayEnvelope { c_flat: c, attained_at: at, shells })
}

/// Radius beyond which every trajectory escapes: max{1, (2C/gamma)^gamma}.
pub fn r_flat(c_flat: f64, gamma: f64) -> f64 {
    (2.0 * c_flat / gamma).powf(gamma).max(1.0)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::analytic::Analytic;

    fn gaussian_profile(amp: f64) -> Profile {
        Profile::new(0.45, FieldSource::zero(Rank::Vector))
            .unwrap()
            .with_omega(FieldSource::vector(Analytic::Gaussian { amp, width: 1.0, dir: Some([0.0, 0.0, 1.0]) }))
            .unwrap()
    }

    #[test]
    fn rejects_nonpositive_gamma() {
        assert!(Profile::new(0.0, FieldSource::zero(Rank::Vector)).is_err());
        assert!(Profile::new(-0.1, FieldSource::zero(Rank::Vector)).is_err());
    }

    #[test]
    fn normalization_reaches_unit_gradient() {
        let p = gaussian_profile(2.0);
        let (q, lambda) = normalize_profile(&p).unwrap();
        // sup |grad 2 e^{-|y|^2}| = 2 * 2 r e^{-r^2} at r = 1/sqrt2 -> 4/sqrt(2e)
        let expect = 4.0 / (2.0 * std::f64::consts::E).sqrt();
        assert!((lambda - expect).abs() < 1e-6, "{lambda} vs {expect}");
        let g = field_norm(q.omega.as_ref().unwrap(), &NormRequest::new(NormKind::GradSup)).unwrap().value;
        assert!((g - 1.0).abs() < 1e-12);
        let (_, again) = normalize_profile(&q).unwrap();
        assert_eq!(again, 1.0);
    }

    #[test]
    fn r_flat_examples() {
        assert_eq!(r_flat(0.2, 0.4), 1.0);
        assert!((r_flat(1.0, 0.5) - 2.0).abs() < 1e-15);
        assert_eq!(r_flat(0.0, 0.3), 1.0);
    }

    #[test]
    fn trivial_envelope_is_zero() {
        let e = decay_envelope(&Profile::trivial(0.4).unwrap()).unwrap();
        assert_eq!(e.c_flat, 0.0);
    }

    #[test]
    fn bracket_vorticity_envelope() {
        let p = Profile::new(0.5, FieldSource::zero(Rank::Vector))
            .unwrap()
            .with_omega(FieldSource::vector(Analytic::Bracket { amp: 1.0, exponent: 2.0 }))
            .unwrap();
        let e = decay_envelope(&p).unwrap();
        // |Omega| <y>^2 = 1 on every shell
        assert!((e.c_flat - 1.0).abs() < 1e-12, "{}", e.c_flat);
    }

    #[test]
    fn growing_velocity_violates_envelope() {
        let u = FieldSource::vector(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 });
        let p = Profile::new(0.4, u).unwrap();
        assert!(matches!(decay_envelope(&p), Err(Error::EnvelopeViolated(_))));
    }
}
