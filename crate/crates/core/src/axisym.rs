//! Axisymmetric reduction on the meridional half-plane (r, z), r >= 0.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{param, Error, Result};
use crate::fields::{Analytic, FieldSource, Grid2, Meridional, Profile, Quantity, Rank, Sampled2, Symmetry};
use crate::flow::ode::{self, OdeOptions, OdeStats};
use crate::report::Entry;

/// One scalar component on the half-plane.
#[derive(Clone, Debug)]
pub enum MeridionalSource {
    Analytic { field: Meridional, quantity: Quantity, comp: usize },
    Sampled(Arc<Sampled2>),
    Zero,
}

impl MeridionalSource {
    /// (value, d/dr, d/dz)
    pub fn eval(&self, r: f64, z: f64) -> (f64, f64, f64) {
        match self {
            MeridionalSource::Analytic { field, quantity, comp } => field.component_with_gradient(r, z, *quantity, *comp),
            MeridionalSource::Sampled(s) => s.eval(r, z),
            MeridionalSource::Zero => (0.0, 0.0, 0.0),
        }
    }

    pub fn value(&self, r: f64, z: f64) -> f64 {
        self.eval(r, z).0
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, MeridionalSource::Zero | MeridionalSource::Analytic { field: Meridional::Zero, .. })
    }

    fn grid(&self) -> Option<&Grid2> {
        match self {
            MeridionalSource::Sampled(s) => Some(&s.grid),
            _ => None,
        }
    }

    /// f / r, by the r-derivative on (or within two cells of) the axis.
    pub fn over_r(&self, r: f64, z: f64) -> f64 {
        let near = match self.grid() {
            Some(g) => r < 2.0 * g.spacing[0],
            None => r == 0.0,
        };
        let (v, dr, _) = self.eval(r, z);
        if near { dr } else { v / r }
    }
}

#[derive(Clone, Debug)]
pub struct AxisymProfile {
    pub gamma: f64,
    pub u_r: MeridionalSource,
    pub u_theta: MeridionalSource,
    pub u_z: MeridionalSource,
    pub omega_r: Option<MeridionalSource>,
    pub omega_theta: Option<MeridionalSource>,
    pub omega_z: Option<MeridionalSource>,
    pub p: Option<MeridionalSource>,
    /// Evaluation window ((r0, r1), (z0, z1)).
    pub domain: ((f64, f64), (f64, f64)),
    /// Closed form the components came from, when there is one.
    pub analytic: Option<Meridional>,
}

impl AxisymProfile {
    /// All components of a closed-form family; P is zero unless the family defines one.
    pub fn from_meridional(gamma: f64, field: Meridional) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidProfile(format!("gamma must be positive, got {gamma}")));
        }
        let src = |q: Quantity, comp: usize| MeridionalSource::Analytic { field: field.clone(), quantity: q, comp };
        let vort = field.has_vorticity() || matches!(field, Meridional::Zero | Meridional::LinearStrain { .. });
        Ok(AxisymProfile {
            gamma,
            u_r: src(Quantity::Velocity, 0),
            u_theta: src(Quantity::Velocity, 1),
            u_z: src(Quantity::Velocity, 2),
            omega_r: vort.then(|| src(Quantity::Vorticity, 0)),
            omega_theta: vort.then(|| src(Quantity::Vorticity, 1)),
            omega_z: vort.then(|| src(Quantity::Vorticity, 2)),
            p: Some(src(Quantity::Pressure, 0)),
            domain: field.domain(),
            analytic: Some(field),
        })
    }

    /// Sampled components on one meridional grid.
    pub fn from_sampled(gamma: f64, grid: Grid2, u: [Vec<f64>; 3], omega: Option<[Vec<f64>; 3]>, p: Option<Vec<f64>>) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidProfile(format!("gamma must be positive, got {gamma}")));
        }
        let mk = |d: Vec<f64>| -> Result<MeridionalSource> {
            Ok(MeridionalSource::Sampled(Arc::new(Sampled2::new(grid.clone(), d, crate::fields::Interp::Cubic)?)))
        };
        let [ur, ut, uz] = u;
        let (or, ot, oz) = match omega {
            Some([a, b, c]) => (Some(mk(a)?), Some(mk(b)?), Some(mk(c)?)),
            None => (None, None, None),
        };
        let (r1, z1) = grid.upper();
        Ok(AxisymProfile {
            gamma,
            u_r: mk(ur)?,
            u_theta: mk(ut)?,
            u_z: mk(uz)?,
            omega_r: or,
            omega_theta: ot,
            omega_z: oz,
            p: p.map(mk).transpose()?,
            domain: ((grid.origin[0], r1), (grid.origin[1], z1)),
            analytic: None,
        })
    }

    pub fn grid(&self) -> Option<&Grid2> {
        self.u_r.grid()
    }

    /// Meridional transport velocity (gamma r + U_r, gamma z + U_z), with U_r
    /// forced to vanish on the axis.
    pub fn meridional_velocity(&self, r: f64, z: f64) -> (f64, f64) {
        let ur = if r <= 0.0 { 0.0 } else { self.u_r.value(r, z) };
        (self.gamma * r + ur, self.gamma * z + self.u_z.value(r, z))
    }

    /// Cartesian profile with the same velocity (closed forms only).
    pub fn to_cartesian(&self) -> Result<Profile> {
        let field = self.analytic.clone().ok_or_else(|| param("profile", "lifting needs a closed-form meridional field"))?;
        let lift = |q| FieldSource::analytic(Analytic::Lifted { field: field.clone(), quantity: q }, if q == Quantity::Pressure { Rank::Scalar } else { Rank::Vector });
        let mut p = Profile::new(self.gamma, lift(Quantity::Velocity))?.with_pressure(lift(Quantity::Pressure))?;
        if self.omega_r.is_some() {
            p = p.with_omega(lift(Quantity::Vorticity))?;
        }
        p.symmetry = Symmetry::Axisym;
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    Radial,
    Swirl,
    Axial,
    Continuity,
    VorticityRadial,
    VorticityAzimuthal,
    VorticityAxial,
}

impl Equation {
    pub const ALL: [Equation; 7] = [
        Equation::Radial,
        Equation::Swirl,
        Equation::Axial,
        Equation::Continuity,
        Equation::VorticityRadial,
        Equation::VorticityAzimuthal,
        Equation::VorticityAxial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Equation::Radial => "axisym.res.radial",
            Equation::Swirl => "axisym.res.swirl",
            Equation::Axial => "axisym.res.axial",
            Equation::Continuity => "axisym.res.continuity",
            Equation::VorticityRadial => "axisym.res.vort.r",
            Equation::VorticityAzimuthal => "axisym.res.vort.theta",
            Equation::VorticityAxial => "axisym.res.vort.z",
        }
    }

    pub fn reference(self) -> &'static str {
        match self {
            Equation::Radial => "(1-g)U_r + V.grad U_r - U_th^2/r + d_r P = 0",
            Equation::Swirl => "(1-g)U_th + V.grad U_th + U_r U_th/r = 0",
            Equation::Axial => "(1-g)U_z + V.grad U_z + d_z P = 0",
            Equation::Continuity => "d_r U_r + U_r/r + d_z U_z = 0",
            Equation::VorticityRadial => "Om_r + V.grad Om_r = Om_r d_r U_r + Om_z d_z U_r",
            Equation::VorticityAzimuthal => "Om_th + V.grad Om_th = (U_r Om_th - 2 U_th Om_r)/r",
            Equation::VorticityAxial => "Om_z + V.grad Om_z = Om_r d_r U_z + Om_z d_z U_z",
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct AxisymResidual {
    pub equation: Equation,
    pub grid: Grid2,
    pub values: Vec<f64>,
    pub sup: f64,
    pub l2: f64,
}

/// Node grid for residuals: the sampled grid or 65 x 65 over the domain.
fn residual_grid(profile: &AxisymProfile) -> Result<Grid2> {
    match profile.grid() {
        Some(g) => Ok(g.clone()),
        None => {
            let ((r0, r1), (z0, z1)) = profile.domain;
            Grid2::span((r0, r1), (z0, z1), 65, 65)
        }
    }
}

fn pointwise(profile: &AxisymProfile, eq: Equation, r: f64, z: f64) -> Result<f64> {
    let g = profile.gamma;
    let (ur, urr, urz) = profile.u_r.eval(r, z);
    let (ut, utr, utz) = profile.u_theta.eval(r, z);
    let (uz, uzr, uzz) = profile.u_z.eval(r, z);
    let (vr, vz) = (g * r + ur, g * z + uz);
    let need = |o: &Option<MeridionalSource>, name: &'static str| o.clone().ok_or(Error::MissingField(name));
    Ok(match eq {
        Equation::Radial | Equation::Axial => {
            let p = need(&profile.p, "P")?;
            let (_, pr, pz) = p.eval(r, z);
            if eq == Equation::Radial {
                (1.0 - g) * ur + vr * urr + vz * urz - ut * profile.u_theta.over_r(r, z) + pr
            } else {
                (1.0 - g) * uz + vr * uzr + vz * uzz + pz
            }
        }
        Equation::Swirl => (1.0 - g) * ut + vr * utr + vz * utz + ur * profile.u_theta.over_r(r, z),
        Equation::Continuity => urr + profile.u_r.over_r(r, z) + uzz,
        Equation::VorticityRadial | Equation::VorticityAzimuthal | Equation::VorticityAxial => {
            let orr = need(&profile.omega_r, "Omega_r")?;
            let oth = need(&profile.omega_theta, "Omega_theta")?;
            let ozz = need(&profile.omega_z, "Omega_z")?;
            let (wr, wrr, wrz) = orr.eval(r, z);
            let (wt, wtr, wtz) = oth.eval(r, z);
            let (wz, wzr, wzz) = ozz.eval(r, z);
            match eq {
                Equation::VorticityRadial => wr + vr * wrr + vz * wrz - wr * urr - wz * urz,
                Equation::VorticityAzimuthal => {
                    wt + vr * wtr + vz * wtz - (ur * oth.over_r(r, z) - 2.0 * ut * orr.over_r(r, z))
                }
                _ => wz + vr * wzr + vz * wzz - wr * uzr - wz * uzz,
            }
        }
    })
}

pub fn axisym_residual(profile: &AxisymProfile, eq: Equation) -> Result<AxisymResidual> {
    let grid = residual_grid(profile)?;
    let sampled = profile.grid().is_some();
    let vals = crate::par::map_range(grid.len(), |n| {
        let (i, j) = (n / grid.dims[1], n % grid.dims[1]);
        let (r, z) = grid.point(i, j);
        pointwise(profile, eq, r, z)
    });
    let values = vals.into_iter().collect::<Result<Vec<f64>>>()?;
    let (mut sup, mut l2): (f64, f64) = (0.0, 0.0);
    for (n, v) in values.iter().enumerate() {
        let (i, j) = (n / grid.dims[1], n % grid.dims[1]);
        // sampled data: skip three cells at the outer faces (the axis is not a face)
        if sampled && (i + 3 >= grid.dims[0] || j < 3 || j + 3 >= grid.dims[1] || (grid.origin[0] > 0.0 && i < 3)) {
            continue;
        }
        sup = sup.max(v.abs());
        let (r, _) = grid.point(i, j);
        l2 += v * v * r;
    }
    let l2 = (l2 * grid.spacing[0] * grid.spacing[1] * 2.0 * std::f64::consts::PI).sqrt();
    Ok(AxisymResidual { equation: eq, grid, values, sup, l2 })
}

/// Axis values and vorticity compatibility, as (name, reference, value).
pub fn profile_invariants(profile: &AxisymProfile) -> Vec<(&'static str, &'static str, f64)> {
    let ((r0, r1), (z0, z1)) = profile.domain;
    let mut out = Vec::new();
    if r0 <= 0.0 {
        let mut vel: f64 = 0.0;
        let mut vort: f64 = 0.0;
        for k in 0..=64 {
            let z = z0 + (z1 - z0) * k as f64 / 64.0;
            vel = vel.max(profile.u_r.value(0.0, z).abs()).max(profile.u_theta.value(0.0, z).abs());
            if let (Some(a), Some(b)) = (&profile.omega_r, &profile.omega_theta) {
                vort = vort.max(a.value(0.0, z).abs()).max(b.value(0.0, z).abs());
            }
        }
        out.push(("axisym.axis.velocity", "U_r = U_th = 0 on the axis", vel));
        if profile.omega_r.is_some() {
            out.push(("axisym.axis.vorticity", "Om_r = Om_th = 0 on the axis", vort));
        }
    }
    if let (Some(a), Some(b), Some(c)) = (&profile.omega_r, &profile.omega_theta, &profile.omega_z) {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..=32 {
            for k in 0..=32 {
                let r = r0 + (r1 - r0) * i as f64 / 32.0;
                let z = z0 + (z1 - z0) * k as f64 / 32.0;
                let (_, utr, utz) = profile.u_theta.eval(r, z);
                let (_, _, urz) = profile.u_r.eval(r, z);
                let (_, uzr, _) = profile.u_z.eval(r, z);
                let dr = a.value(r, z) + utz;
                let dt = b.value(r, z) - (urz - uzr);
                let dz = c.value(r, z) - (utr + profile.u_theta.over_r(r, z));
                worst = worst.max(dr.abs()).max(dt.abs()).max(dz.abs());
                scale = scale.max(a.value(r, z).abs()).max(b.value(r, z).abs()).max(c.value(r, z).abs());
            }
        }
        out.push(("axisym.consistency", "Om_r = -d_z U_th, Om_z = d_r U_th + U_th/r, Om_th = d_z U_r - d_r U_z", if scale > 0.0 { worst / scale } else { worst }));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeridionalTrajectory {
    pub label: (f64, f64),
    pub taus: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    pub stats: OdeStats,
    pub truncated: Option<String>,
    /// U_th/R became unbounded; Theta is frozen from then on.
    pub theta_divergent: bool,
}

pub fn meridional_flow(profile: &AxisymProfile, seeds: &[(f64, f64)], taus: &[f64], tol: f64) -> Result<Vec<MeridionalTrajectory>> {
    if seeds.iter().any(|s| s.0 < 0.0) {
        return Err(param("seeds", "need r >= 0"));
    }
    if taus.first() != Some(&0.0) {
        return Err(param("tau", "samples must start at 0"));
    }
    let opts = OdeOptions::with_tol(tol);
    Ok(crate::par::map_slice(seeds, |&(r0, z0)| {
        let mut divergent = false;
        let on_axis = r0 == 0.0;
        let out = ode::integrate(
            |_, s, d| {
                let (r, z) = (if on_axis { 0.0 } else { s[0] }, s[1]);
                let (vr, vz) = profile.meridional_velocity(r, z);
                d[0] = if on_axis { 0.0 } else { vr };
                d[1] = vz;
                let w = if r <= 0.0 { profile.u_theta.eval(0.0, z).1 } else { profile.u_theta.value(r, z) / r };
                if w.is_finite() && w.abs() < 1e12 {
                    d[2] = w;
                } else {
                    divergent = true;
                    d[2] = 0.0;
                }
            },
            0.0,
            &[r0, z0, 0.0],
            taus,
            &opts,
        );
        let m = out.states.len();
        MeridionalTrajectory {
            label: (r0, z0),
            taus: taus[..m].to_vec(),
            r: out.states.iter().map(|s| if on_axis { 0.0 } else { s[0] }).collect(),
            z: out.states.iter().map(|s| s[1]).collect(),
            theta: out.states.iter().map(|s| s[2]).collect(),
            stats: out.stats,
            truncated: out.failure,
            theta_divergent: divergent,
        }
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPoint {
    pub r: f64,
    pub z: f64,
    pub on_axis: bool,
    pub u_theta: f64,
    /// 2 pi r U_th(r, z): circulation of the invariant circle.
    pub circulation: f64,
    /// Eigenvalues (re, im) of the meridional Jacobian.
    pub eigenvalues: [(f64, f64); 2],
    pub verdict: Option<String>,
}

/// Off-axis swirl above this magnitude triggers the gamma = 1/2 test.
pub const SWIRL_TOL: f64 = 1e-8;
pub const FIXED_DEDUP: f64 = 1e-6;

fn meridional_jacobian(profile: &AxisymProfile, r: f64, z: f64) -> [[f64; 2]; 2] {
    let g = profile.gamma;
    let (_, urr, urz) = profile.u_r.eval(r, z);
    let (_, uzr, uzz) = profile.u_z.eval(r, z);
    [[g + urr, urz], [uzr, g + uzz]]
}

fn newton2(profile: &AxisymProfile, mut r: f64, mut z: f64, scale: f64) -> Option<(f64, f64)> {
    for _ in 0..100 {
        let (fr, fz) = profile.meridional_velocity(r, z);
        let f = fr.hypot(fz);
        if f <= 1e-15 * scale {
            return Some((r, z));
        }
        let j = meridional_jacobian(profile, r, z);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dr = -(j[1][1] * fr - j[0][1] * fz) / det;
        let dz = -(-j[1][0] * fr + j[0][0] * fz) / det;
        let mut lam = 1.0;
        loop {
            let (rn, zn) = ((r + lam * dr).max(0.0), z + lam * dz);
            let (a, b) = profile.meridional_velocity(rn, zn);
            if a.hypot(b) < f || lam < 1e-8 {
                let small = ((rn - r).hypot(zn - z)) <= 1e-15 * scale;
                r = rn;
                z = zn;
                if small {
                    let (a, b) = profile.meridional_velocity(r, z);
                    return (a.hypot(b) <= 1e-11 * scale).then_some((r, z));
                }
                break;
            }
            lam *= 0.5;
        }
    }
    let (a, b) = profile.meridional_velocity(r, z);
    (a.hypot(b) <= 1e-11 * scale).then_some((r, z))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPoints {
    pub points: Vec<FixedPoint>,
    /// Seeds whose Newton iteration diverged.
    pub dropped: usize,
    pub note: String,
}

pub fn meridional_fixed_points(profile: &AxisymProfile) -> Result<FixedPoints> {
    let ((r0, r1), (z0, z1)) = profile.domain;
    let n = 25;
    let scale = r1.max(z1.abs()).max(z0.abs()).max(1.0);
    let mut seeds = vec![(0.0, 0.0)];
    for i in 0..n {
        for k in 0..n {
            seeds.push((r0 + (r1 - r0) * i as f64 / (n - 1) as f64, z0 + (z1 - z0) * k as f64 / (n - 1) as f64));
        }
    }
    let res = crate::par::map_slice(&seeds, |s| newton2(profile, s.0, s.1, scale));
    let mut found: Vec<(f64, f64)> = Vec::new();
    let mut dropped = 0;
    for r in res {
        match r {
            Some(p) if p.0 >= r0 - 1e-12 && p.0 <= r1 && p.1 >= z0 && p.1 <= z1 => {
                if found.iter().all(|q| (q.0 - p.0).hypot(q.1 - p.1) > FIXED_DEDUP) {
                    found.push(p);
                }
            }
            Some(_) => {}
            None => dropped += 1,
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let g = profile.gamma;
    let points = found
        .into_iter()
        .map(|(r, z)| {
            let on_axis = r < 1e-9;
            let ut = if on_axis { 0.0 } else { profile.u_theta.value(r, z) };
            let j = meridional_jacobian(profile, r, z);
            let tr = j[0][0] + j[1][1];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let disc = tr * tr / 4.0 - det;
            let eigenvalues = if disc >= 0.0 {
                [(tr / 2.0 - disc.sqrt(), 0.0), (tr / 2.0 + disc.sqrt(), 0.0)]
            } else {
                [(tr / 2.0, -(-disc).sqrt()), (tr / 2.0, (-disc).sqrt())]
            };
            let verdict = (!on_axis && ut.abs() > SWIRL_TOL).then(|| {
                if (g - 0.5).abs() <= 1e-12 {
                    "off-axis fixed point with swirl: consistent with gamma = 1/2".to_string()
                } else {
                    format!("a swirling off-axis zero forces gamma = 1/2; profile with gamma = {g} is inconsistent")
                }
            });
            FixedPoint { r, z, on_axis, u_theta: ut, circulation: 2.0 * std::f64::consts::PI * r * ut, eigenvalues, verdict }
        })
        .collect();
    Ok(FixedPoints {
        points,
        dropped,
        note: format!("isolation is heuristic: Newton from a {n}x{n} seed grid, deduplicated within {FIXED_DEDUP:e}"),
    })
}

/// Weighted area integral of r dr dz over a polygon, by the boundary form
/// of r^2/2 dz (exact for straight edges).
pub fn weighted_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let (ra, za) = poly[i];
        let (rb, zb) = poly[(i + 1) % n];
        s += (zb - za) * (ra * ra + ra * rb + rb * rb) / 6.0;
    }
    s.abs()
}

#[derive(Clone, Debug)]
pub struct AreaGrowth {
    pub taus: Vec<f64>,
    pub areas: Vec<f64>,
    /// max |log(area/area0) - 3 gamma tau|
    pub deviation: f64,
    pub vertices: usize,
}

const MAX_VERTICES: usize = 20_000;

/// Advects an open list of polygon vertices (closing edge implied), inserting
/// label midpoints where an advected edge exceeds twice the initial longest edge.
pub fn area_growth(profile: &AxisymProfile, polygon: &[(f64, f64)], taus: &[f64], tol: f64) -> Result<AreaGrowth> {
    if polygon.len() < 3 {
        return Err(param("polygon", "needs at least 3 vertices"));
    }
    if polygon.iter().any(|p| p.0 <= 0.0) {
        return Err(Error::PolygonTouchesAxis);
    }
    let edge = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    let n0 = polygon.len();
    let cap = 2.0 * (0..n0).map(|i| edge(polygon[i], polygon[(i + 1) % n0])).fold(0.0, f64::max);
    let advect = |labels: &[(f64, f64)]| -> Result<Vec<MeridionalTrajectory>> {
        let tr = meridional_flow(profile, labels, taus, tol)?;
        if let Some(t) = tr.iter().find(|t| t.truncated.is_some()) {
            return Err(Error::Integration(t.truncated.clone().unwrap()));
        }
        Ok(tr)
    };
    let mut labels: Vec<(f64, f64)> = polygon.to_vec();
    let mut trajs = advect(&labels)?;
    loop {
        let m = labels.len();
        let mut insert = Vec::new();
        for i in 0..m {
            let (a, b) = (&trajs[i], &trajs[(i + 1) % m]);
            if (0..taus.len()).any(|s| edge((a.r[s], a.z[s]), (b.r[s], b.z[s])) > cap) {
                insert.push(i);
            }
        }
        if insert.is_empty() {
            break;
        }
        if m + insert.len() > MAX_VERTICES {
            return Err(Error::Integration(format!("polygon refinement exceeded {MAX_VERTICES} vertices")));
        }
        let mids: Vec<(f64, f64)> = insert
            .iter()
            .map(|&i| {
                let (a, b) = (labels[i], labels[(i + 1) % m]);
                (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
            })
            .collect();
        let new = advect(&mids)?;
        let mut nl = Vec::with_capacity(m + mids.len());
        let mut nt = Vec::with_capacity(m + mids.len());
        let mut q = 0;
        for i in 0..m {
            nl.push(labels[i]);
            nt.push(trajs[i].clone());
            if q < insert.len() && insert[q] == i {
                nl.push(mids[q]);
                nt.push(new[q].clone());
                q += 1;
            }
        }
        labels = nl;
        trajs = nt;
    }
    let mut areas = Vec::with_capacity(taus.len());
    for s in 0..taus.len() {
        let poly: Vec<(f64, f64)> = trajs.iter().map(|t| (t.r[s], t.z[s])).collect();
        if poly.iter().any(|p| p.0 <= 0.0) {
            return Err(Error::PolygonTouchesAxis);
        }
        areas.push(weighted_area(&poly));
    }
    let g = profile.gamma;
    let deviation = areas.iter().zip(taus).map(|(a, t)| ((a / areas[0]).ln() - 3.0 * g * t).abs()).fold(0.0, f64::max);
    Ok(AreaGrowth { taus: taus.to_vec(), areas, deviation, vertices: labels.len() })
}

pub fn area_growth_check(profile: &AxisymProfile, polygon: &[(f64, f64)], taus: &[f64], tol: &Tolerances) -> Entry {
    let t = std::time::Instant::now();
    let name = "axisym.area";
    let reference = "d/dtau of the weighted area r dr dz equals 3 gamma times it";
    match area_growth(profile, polygon, taus, tol.integrator) {
        Ok(a) => Entry::check(name, reference, a.deviation, tol.area_growth)
            .with_note(format!("{} vertices after refinement", a.vertices))
            .timed(t),
        Err(e) => Entry::inconclusive(name, reference, f64::NAN, e.to_string()).timed(t),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    /// e^{(1-2 gamma) tau} R U_th(R, Z)
    Swirl,
    /// e^{(1+gamma) tau} Om_th(R, Z) / R
    AzimuthalVorticity,
}

pub const INVARIANT_FLOOR: f64 = 1e-14;

/// max over trajectories and samples of the relative drift of the transported quantity.
pub fn invariant_drift(profile: &AxisymProfile, trajs: &[MeridionalTrajectory], which: Invariant) -> Result<f64> {
    let g = profile.gamma;
    let src = match which {
        Invariant::Swirl => &profile.u_theta,
        Invariant::AzimuthalVorticity => profile.omega_theta.as_ref().ok_or(Error::MissingField("Omega_theta"))?,
    };
    let q = |t: f64, r: f64, z: f64| match which {
        Invariant::Swirl => ((1.0 - 2.0 * g) * t).exp() * r * src.value(r, z),
        Invariant::AzimuthalVorticity => ((1.0 + g) * t).exp() * src.value(r, z) / r,
    };
    let mut worst: f64 = 0.0;
    for tr in trajs {
        if tr.r.iter().any(|&r| r <= 0.0) {
            return Err(Error::HitsAxis);
        }
        let q0 = q(0.0, tr.r[0], tr.z[0]);
        for s in 0..tr.taus.len() {
            let d = (q(tr.taus[s], tr.r[s], tr.z[s]) - q0).abs() / q0.abs().max(INVARIANT_FLOOR);
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

pub fn axisym_invariant_check(profile: &AxisymProfile, trajs: &[MeridionalTrajectory], which: Invariant, tol: &Tolerances) -> Entry {
    let t = std::time::Instant::now();
    let (name, reference, eq) = match which {
        Invariant::Swirl => ("axisym.invariant.swirl", "exp((1-2 gamma) tau) R U_th(R,Z) = r0 U_th(r0,z0)", Equation::Swirl),
        Invariant::AzimuthalVorticity => (
            "axisym.invariant.azimuthal-vorticity",
            "exp((1+gamma) tau) Om_th(R,Z)/R is transported",
            Equation::VorticityAzimuthal,
        ),
    };
    let level = axisym_residual(profile, eq).map(|r| r.sup).unwrap_or(f64::NAN);
    match invariant_drift(profile, trajs, which) {
        Ok(d) => Entry::check(name, reference, d, tol.invariant_drift)
            .with_note(format!("equation residual level {level:.3e}"))
            .timed(t),
        Err(e) => Entry::inconclusive(name, reference, f64::NAN, e.to_string()).timed(t),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum AlphaClass {
    AxisFixedPoint { z: f64 },
    OffAxisFixedPoint { r: f64, z: f64 },
    Cycling,
    Escaped,
    Undecided,
}

impl fmt::Display for AlphaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaClass::AxisFixedPoint { z } => write!(f, "converged to axis fixed point (0, {z:.6})"),
            AlphaClass::OffAxisFixedPoint { r, z } => write!(
                f,
                "converged to off-axis fixed point ({r:.6}, {z:.6}); contradicts the all-axis alpha-limit configuration"
            ),
            AlphaClass::Cycling => f.write_str("cycling (recurrent section crossings)"),
            AlphaClass::Escaped => f.write_str("escaped"),
            AlphaClass::Undecided => f.write_str("undecided"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaLimit {
    pub class: AlphaClass,
    pub min_axis_distance: f64,
    pub endpoint: (f64, f64),
    /// H(end) - H(start) along the backward path, when P is available.
    pub bernoulli_change: Option<f64>,
    pub notes: Vec<String>,
}

pub const RECURRENCE_TOL: f64 = 1e-4;

fn meridional_bernoulli(profile: &AxisymProfile, r: f64, z: f64) -> Option<f64> {
    let p = profile.p.as_ref()?;
    let g = profile.gamma;
    let (vr, vz) = profile.meridional_velocity(r, z);
    let ut = profile.u_theta.value(r, z);
    Some(0.5 * (vr * vr + ut * ut + vz * vz) + p.value(r, z) + 0.5 * g * (g - 1.0) * (r * r + z * z))
}

pub fn backward_alpha_limit(profile: &AxisymProfile, seed: (f64, f64), tau_min: f64, tol: f64) -> Result<AlphaLimit> {
    if !(seed.0 > 0.0) {
        return Err(param("seed", "needs r0 > 0"));
    }
    if !(tau_min < 0.0) {
        return Err(param("tau_min", "must be negative"));
    }
    let mut notes = Vec::new();
    if profile.gamma >= 0.5 {
        notes.push("gamma >= 1/2: no boundedness guarantee".to_string());
    }
    let n = 800;
    let taus: Vec<f64> = (0..=n).map(|i| tau_min * i as f64 / n as f64).collect();
    let tr = meridional_flow(profile, &[seed], &taus, tol)?.remove(0);
    if let Some(t) = &tr.truncated {
        notes.push(format!("integration stopped: {t}"));
    }
    let m = tr.r.len();
    let end = (tr.r[m - 1], tr.z[m - 1]);
    let min_axis_distance = tr.r.iter().cloned().fold(f64::INFINITY, f64::min);
    let bernoulli_change = match (meridional_bernoulli(profile, seed.0, seed.1), meridional_bernoulli(profile, end.0, end.1)) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    let size = end.0.hypot(end.1);
    let fixed = meridional_fixed_points(profile)?;
    let class = 'c: {
        if !size.is_finite() || size > 1e6 * seed.0.hypot(seed.1).max(1.0) {
            break 'c AlphaClass::Escaped;
        }
        for fp in &fixed.points {
            let d = |s: usize| (tr.r[s] - fp.r).hypot(tr.z[s] - fp.z);
            let d0 = d(0).max(1e-300);
            let dend = d(m - 1);
            let settling = (3 * m / 4..m).all(|s| s == 3 * m / 4 || d(s) <= d(s - 1) * (1.0 + 1e-9) + 1e-14);
            if (dend <= 1e-3 * d0 || dend <= 1e-8) && settling {
                break 'c if fp.on_axis { AlphaClass::AxisFixedPoint { z: fp.z } } else { AlphaClass::OffAxisFixedPoint { r: fp.r, z: fp.z } };
            }
        }
        // Poincare section Z = mean Z, upward crossings
        let zc = tr.z.iter().sum::<f64>() / m as f64;
        let mut crossings = Vec::new();
        for s in 1..m {
            if tr.z[s - 1] < zc && tr.z[s] >= zc {
                let w = (zc - tr.z[s - 1]) / (tr.z[s] - tr.z[s - 1]);
                crossings.push(tr.r[s - 1] + w * (tr.r[s] - tr.r[s - 1]));
            }
        }
        if crossings.len() >= 3 {
            let k = crossings.len();
            if (crossings[k - 1] - crossings[k - 2]).abs() < RECURRENCE_TOL && (crossings[k - 2] - crossings[k - 3]).abs() < RECURRENCE_TOL {
                break 'c AlphaClass::Cycling;
            }
        }
        AlphaClass::Undecided
    };
    Ok(AlphaLimit { class, min_axis_distance, endpoint: end, bernoulli_change, notes })
}

/// Report entries for the meridional residuals and the profile invariants.
pub fn residual_entries(profile: &AxisymProfile, tol: &Tolerances) -> Vec<Entry> {
    let mut out = Vec::new();
    for eq in Equation::ALL {
        let t = std::time::Instant::now();
        let tolv = if eq == Equation::Continuity { tol.divergence } else { tol.residual };
        out.push(match axisym_residual(profile, eq) {
            Ok(r) => Entry::check(eq.name(), eq.reference(), r.sup, tolv).with_note(format!("L2 {:.3e}", r.l2)).timed(t),
            Err(e) => Entry::inconclusive(eq.name(), eq.reference(), f64::NAN, e.to_string()).timed(t),
        });
    }
    for (name, reference, v) in profile_invariants(profile) {
        let tolv = if name == "axisym.consistency" { tol.consistency } else { tol.origin_velocity };
        out.push(Entry::check(name, reference, v, tolv));
    }
    out
}
