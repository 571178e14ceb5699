//! Self-similar Lagrangian flow dY/dtau = gamma Y + U(Y) with its variational
//! equation, and the Cauchy, Weber and circulation identities along it.

pub mod nodal;
pub mod ode;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::fields::{FieldSource, Profile};
use crate::numerics::{Mat3, Vec3};
use crate::report::Entry;
pub use nodal::{nodal_set, outgoing_certificate, vanishing_order, Certificate, NodalPoint, NodalSet, VanishingOrder};
pub use ode::{OdeOptions, OdeStats};

pub fn transport_velocity(profile: &Profile, y: &Vec3) -> Vec3 {
    profile.transport_velocity(y)
}

/// grad V = gamma I + grad U
pub fn transport_jacobian(profile: &Profile, y: &Vec3) -> (Vec3, Mat3) {
    let (u, j) = profile.u.value_jac(y);
    (y * profile.gamma + u, j + Mat3::identity() * profile.gamma)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub label: Vec3,
    pub taus: Vec<f64>,
    pub positions: Vec<Vec3>,
    /// grad_a Y at each sample.
    pub jacobians: Vec<Mat3>,
    pub stats: OdeStats,
    /// Set when integration stopped before the last requested sample.
    pub truncated: Option<String>,
}

impl Trajectory {
    pub fn final_position(&self) -> Vec3 {
        *self.positions.last().expect("at least the label")
    }
}

/// Sample times 0, tau/n, ..., tau (tau may be negative for backward flow).
pub fn tau_samples(tau: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| tau * i as f64 / n as f64).collect()
}

/// Position and Jacobian along the flow from each label through `taus`
/// (which must start at 0 and be monotone).
pub fn integrate_flow(profile: &Profile, labels: &[Vec3], taus: &[f64], tol: f64) -> Result<Vec<Trajectory>> {
    if !(tol > 0.0) {
        return Err(param("tolerance", "must be positive"));
    }
    if taus.first() != Some(&0.0) || taus.iter().any(|t| !t.is_finite()) {
        return Err(param("tau", "samples must be finite and start at 0"));
    }
    let dir = taus.last().copied().unwrap_or(0.0).signum();
    if taus.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) {
        return Err(param("tau", "samples must be monotone"));
    }
    let opts = OdeOptions::with_tol(tol);
    Ok(crate::par::map_slice(labels, |a| trajectory(profile, a, taus, &opts)))
}

fn trajectory(profile: &Profile, a: &Vec3, taus: &[f64], opts: &OdeOptions) -> Trajectory {
    let mut y0 = vec![0.0; 12];
    y0[..3].copy_from_slice(a.as_slice());
    for i in 0..3 {
        y0[3 + 4 * i] = 1.0;
    }
    let rhs = |_: f64, s: &[f64], d: &mut [f64]| {
        let y = Vec3::new(s[0], s[1], s[2]);
        let (v, jv) = transport_jacobian(profile, &y);
        d[..3].copy_from_slice(v.as_slice());
        // row-major 3x3 Jacobian in s[3..12]
        for i in 0..3 {
            for j in 0..3 {
                d[3 + 3 * i + j] = (0..3).map(|k| jv[(i, k)] * s[3 + 3 * k + j]).sum();
            }
        }
    };
    let out = ode::integrate(rhs, 0.0, &y0, taus, opts);
    let m = out.states.len();
    Trajectory {
        label: *a,
        taus: taus[..m].to_vec(),
        positions: out.states.iter().map(|s| Vec3::new(s[0], s[1], s[2])).collect(),
        jacobians: out.states.iter().map(|s| Mat3::from_row_slice(&s[3..12])).collect(),
        stats: out.stats,
        truncated: out.failure,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowIdentity {
    JacobianDet,
    Cauchy,
    Weber,
}

/// max over samples of |det grad_a Y e^{-3 gamma tau} - 1|
pub fn det_deviation(gamma: f64, trajs: &[Trajectory]) -> f64 {
    let mut worst: f64 = 0.0;
    for tr in trajs {
        for (t, j) in tr.taus.iter().zip(&tr.jacobians) {
            worst = worst.max((j.determinant() * (-3.0 * gamma * t).exp() - 1.0).abs());
        }
    }
    worst
}

/// max |Omega(Y) - e^{-(1+gamma) tau} grad_a Y Omega(a)| relative to max |Omega(a)|.
pub fn cauchy_deviation(profile: &Profile, trajs: &[Trajectory]) -> f64 {
    let g = profile.gamma;
    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for tr in trajs {
        let w0 = profile.omega_at(&tr.label);
        scale = scale.max(w0.norm());
        for ((t, y), j) in tr.taus.iter().zip(&tr.positions).zip(&tr.jacobians) {
            let pred = j * w0 * (-(1.0 + g) * t).exp();
            worst = worst.max((profile.omega_at(y) - pred).norm());
        }
    }
    if scale > 0.0 { worst / scale } else { worst }
}

/// Seven labels: the centre then centre +- h e_k (k = x, y, z).
pub fn weber_patch(center: Vec3, h: f64) -> Vec<Vec3> {
    let mut out = vec![center];
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h;
        out.push(center + e);
        out.push(center - e);
    }
    out
}

/// W = e^{(1-2 gamma) tau} (grad_a Y)^T U(Y) - U(a) at every sample.
fn weber_field(profile: &Profile, tr: &Trajectory) -> Vec<Vec3> {
    let u0 = profile.velocity(&tr.label);
    let k = 1.0 - 2.0 * profile.gamma;
    tr.taus
        .iter()
        .zip(&tr.positions)
        .zip(&tr.jacobians)
        .map(|((t, y), j)| j.transpose() * profile.velocity(y) * (k * t).exp() - u0)
        .collect()
}

/// max over tau of |curl_a W| on patches built by [`weber_patch`]; `trajs`
/// holds whole patches in order. Also returns |U| scale for normalisation.
pub fn weber_curl(profile: &Profile, trajs: &[Trajectory], h: f64) -> Result<f64> {
    if trajs.len() % 7 != 0 || trajs.is_empty() {
        return Err(param("labels", "weber check needs patches of 7 labels"));
    }
    let mut worst: f64 = 0.0;
    for patch in trajs.chunks(7) {
        let m = patch.iter().map(|t| t.taus.len()).min().unwrap_or(0);
        let w: Vec<Vec<Vec3>> = patch.iter().map(|t| weber_field(profile, t)).collect();
        for s in 0..m {
            // d W_c / d a_k by central differences
            let d = |c: usize, k: usize| (w[1 + 2 * k][s][c] - w[2 + 2 * k][s][c]) / (2.0 * h);
            let curl = Vec3::new(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
            worst = worst.max(curl.norm());
        }
    }
    Ok(worst)
}

/// Entry for one flow identity.
pub fn flow_identity_check(
    profile: &Profile,
    trajs: &[Trajectory],
    which: FlowIdentity,
    tol: &crate::config::Tolerances,
    weber_h: f64,
) -> Result<Entry> {
    let t = std::time::Instant::now();
    let e = match which {
        FlowIdentity::JacobianDet => Entry::check(
            "flow.det",
            "det grad_a Y = exp(3 gamma tau)",
            det_deviation(profile.gamma, trajs),
            tol.flow_identity.max(10.0 * tol.integrator),
        ),
        FlowIdentity::Cauchy => {
            if profile.omega.is_none() && profile.u.is_zero() {
                return Err(Error::MissingField("Omega"));
            }
            Entry::check(
                "flow.cauchy",
                "Omega(Y) = exp(-(1+gamma) tau) grad_a Y Omega(a)",
                cauchy_deviation(profile, trajs),
                tol.flow_identity,
            )
            .with_note("meaningful at the vorticity-form residual level")
        }
        FlowIdentity::Weber => Entry::check(
            "flow.weber",
            "exp((1-2 gamma) tau) U^j(Y) d_i Y^j - U^i(a) is a gradient",
            weber_curl(profile, trajs, weber_h)?,
            tol.flow_identity,
        )
        .with_note(format!("curl by central differences over labels, h = {weber_h:e}")),
    };
    let mut e = e;
    if let Some(tr) = trajs.iter().find(|t| t.truncated.is_some()) {
        e = e.with_note(format!("trajectory from {:?} truncated: {}", tr.label.as_slice(), tr.truncated.as_ref().unwrap()));
    }
    Ok(e.timed(t))
}

/// Closed polyline; the last vertex repeats the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub vertices: Vec<Vec3>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Counter-clockwise seen from +z.
    Positive,
    Negative,
}

impl Loop {
    pub fn new(mut vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() >= 2 && (vertices[0] - vertices[vertices.len() - 1]).norm() > 0.0 {
            vertices.push(vertices[0]);
        }
        if vertices.len() < 17 {
            return Err(param("loop", format!("needs at least 16 distinct points, got {}", vertices.len().saturating_sub(1))));
        }
        let l = Loop { vertices };
        if let Some((i, j)) = l.self_intersection() {
            return Err(param("loop", format!("segments {i} and {j} intersect")));
        }
        Ok(l)
    }

    /// Horizontal circle of radius r at height z around the e3 axis.
    pub fn circle(r: f64, z: f64, n: usize) -> Result<Self> {
        let v = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Vec3::new(r * t.cos(), r * t.sin(), z)
            })
            .collect();
        Loop::new(v)
    }

    /// One point per line, whitespace separated; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut v = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let xs: Vec<f64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| param("loop", format!("line {}: {e}", no + 1)))?;
            if xs.len() != 3 {
                return Err(param("loop", format!("line {}: expected 3 coordinates", no + 1)));
            }
            v.push(Vec3::new(xs[0], xs[1], xs[2]));
        }
        Loop::new(v)
    }

    pub fn orientation(&self) -> Orientation {
        let a: f64 = self.vertices.windows(2).map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1]).sum();
        if a >= 0.0 { Orientation::Positive } else { Orientation::Negative }
    }

    /// First pair of non-adjacent segments closer than 1e-12 times the loop size.
    pub fn self_intersection(&self) -> Option<(usize, usize)> {
        let v = &self.vertices;
        let m = v.len() - 1;
        let size = v.iter().map(|p| (p - v[0]).norm()).fold(0.0, f64::max);
        for i in 0..m {
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                if segment_distance(v[i], v[i + 1], v[j], v[j + 1]) <= 1e-12 * size {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Trapezoid rule for the line integral of `u` along the polyline.
    pub fn circulation(&self, u: impl Fn(&Vec3) -> Vec3) -> f64 {
        let vals: Vec<Vec3> = self.vertices.iter().map(&u).collect();
        self.vertices
            .windows(2)
            .zip(vals.windows(2))
            .map(|(p, f)| 0.5 * (f[0] + f[1]).dot(&(p[1] - p[0])))
            .sum()
    }
}

fn segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    // closest points of two segments (clamped parametric solve)
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let (a, e, f) = (d1.dot(&d1), d2.dot(&d2), d2.dot(&r));
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = if e > 0.0 { (b * s + f) / e } else { 0.0 };
    if t < 0.0 {
        t = 0.0;
        s = if a > 0.0 { (-c / a).clamp(0.0, 1.0) } else { 0.0 };
    } else if t > 1.0 {
        t = 1.0;
        s = if a > 0.0 { ((b - c) / a).clamp(0.0, 1.0) } else { 0.0 };
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

#[derive(Clone, Debug)]
pub struct CirculationResult {
    pub taus: Vec<f64>,
    /// Gamma_ss(tau) on the advected loop.
    pub circulation: Vec<f64>,
    /// max |e^{(1-2 gamma) tau} Gamma_ss(tau) - Gamma_ss(0)| / max(|Gamma_ss(0)|, floor)
    pub drift: f64,
    pub self_intersecting_at: Option<f64>,
    pub truncated: bool,
}

/// Absolute floor for the relative circulation drift.
pub const CIRCULATION_FLOOR: f64 = 1e-12;

pub fn circulation_drift(profile: &Profile, lp: &Loop, taus: &[f64], tol: f64) -> Result<CirculationResult> {
    let m = lp.vertices.len() - 1;
    let trajs = integrate_flow(profile, &lp.vertices[..m], taus, tol)?;
    let reached = trajs.iter().map(|t| t.taus.len()).min().unwrap_or(0);
    let k = 1.0 - 2.0 * profile.gamma;
    let mut circ = Vec::with_capacity(reached);
    let mut self_intersecting_at = None;
    for s in 0..reached {
        let mut v: Vec<Vec3> = trajs.iter().map(|t| t.positions[s]).collect();
        v.push(v[0]);
        let l = Loop { vertices: v };
        if self_intersecting_at.is_none() && s > 0 && l.self_intersection().is_some() {
            self_intersecting_at = Some(taus[s]);
        }
        circ.push(l.circulation(|y| profile.velocity(y)));
    }
    let g0 = circ.first().copied().unwrap_or(0.0);
    let drift = circ
        .iter()
        .zip(taus)
        .map(|(c, t)| ((k * t).exp() * c - g0).abs())
        .fold(0.0, f64::max)
        / g0.abs().max(CIRCULATION_FLOOR);
    Ok(CirculationResult {
        taus: taus[..reached].to_vec(),
        circulation: circ,
        drift,
        self_intersecting_at,
        truncated: reached < taus.len(),
    })
}

pub fn circulation_check(profile: &Profile, lp: &Loop, taus: &[f64], tol: &crate::config::Tolerances) -> Result<Entry> {
    let t = std::time::Instant::now();
    let r = circulation_drift(profile, lp, taus, tol.integrator)?;
    let mut e = Entry::check(
        "flow.circulation",
        "exp((1-2 gamma) tau) circulation on C(tau) = circulation on C(0)",
        r.drift,
        tol.circulation,
    )
    .with_note(format!("Gamma_ss(0) = {:.6e}", r.circulation.first().copied().unwrap_or(0.0)));
    if let Some(at) = r.self_intersecting_at {
        e = e.with_note(format!("warning: advected loop self-intersects at tau = {at}"));
    }
    if r.truncated {
        e = e.with_note("integration truncated");
    }
    Ok(e.timed(t))
}

/// Bernoulli function along trajectories.
#[derive(Clone, Debug)]
pub struct BernoulliAlong {
    /// H(Y(tau)) per trajectory.
    pub values: Vec<Vec<f64>>,
    /// max |dH/dtau - (2 gamma - 1)|V|^2| / max |V|^2, with dH/dtau = V.grad H exactly.
    pub identity_residual: f64,
    /// Largest increase (for gamma < 1/2) or decrease (gamma > 1/2) between samples, relative to max |H|.
    pub wrong_way: f64,
}

pub fn bernoulli_along(profile: &Profile, pressure: &FieldSource, trajs: &[Trajectory]) -> BernoulliAlong {
    let g = profile.gamma;
    let sign = if g < 0.5 { 1.0 } else if g > 0.5 { -1.0 } else { 0.0 };
    let (mut res, mut vmax, mut hmax, mut wrong): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut values = Vec::with_capacity(trajs.len());
    for tr in trajs {
        let mut hs = Vec::with_capacity(tr.positions.len());
        for y in &tr.positions {
            let (v, jv) = transport_jacobian(profile, y);
            let gp = pressure.value_jac(y).1;
            let grad_p = Vec3::new(gp[(0, 0)], gp[(0, 1)], gp[(0, 2)]);
            let grad_h = jv.transpose() * v + grad_p + y * (g * (g - 1.0));
            let v2 = v.norm_squared();
            res = res.max((v.dot(&grad_h) - (2.0 * g - 1.0) * v2).abs());
            vmax = vmax.max(v2);
            let h = crate::selfsim::bernoulli_value(g, &profile.u, pressure, y);
            hmax = hmax.max(h.abs());
            hs.push(h);
        }
        for w in hs.windows(2) {
            wrong = wrong.max(sign * (w[1] - w[0]));
        }
        values.push(hs);
    }
    BernoulliAlong {
        values,
        identity_residual: if vmax > 0.0 { res / vmax } else { res },
        wrong_way: if hmax > 0.0 { wrong / hmax } else { wrong },
    }
}

pub fn bernoulli_monotonicity_check(
    profile: &Profile,
    trajs: &[Trajectory],
    tol: &crate::config::Tolerances,
) -> Result<Vec<Entry>> {
    let t = std::time::Instant::now();
    let p = match &profile.p {
        Some(p) => p.clone(),
        None => crate::selfsim::recover_pressure(profile)?,
    };
    let b = bernoulli_along(profile, &p, trajs);
    let g = profile.gamma;
    let identity = Entry::check("flow.bernoulli.identity", "dH/dtau = (2 gamma - 1)|V|^2", b.identity_residual, tol.residual)
        .informational()
        .with_note("identity holds for exact solutions")
        .timed(t);
    let mono = if g < 0.5 {
        Entry::check("flow.bernoulli.monotone", "gamma < 1/2 implies dH/dtau <= 0", b.wrong_way, 10.0 * tol.integrator)
    } else if g > 0.5 {
        Entry::info("flow.bernoulli.monotone", "gamma > 1/2: H non-decreasing along trajectories", b.wrong_way)
    } else {
        Entry::info("flow.bernoulli.monotone", "gamma = 1/2: no sign prediction", b.wrong_way)
    };
    Ok(vec![identity, mono.timed(t)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;
    use crate::fields::Analytic;

    #[test]
    fn trivial_flow_is_exponential() {
        for gamma in [0.3, 0.4, 0.5, 0.6] {
            let p = Profile::trivial(gamma).unwrap();
            let labels = [Vec3::new(1.0, -0.5, 0.25), Vec3::new(0.0, 0.0, 2.0)];
            let tr = integrate_flow(&p, &labels, &tau_samples(3.0, 6), 1e-10).unwrap();
            for t in &tr {
                let e = (gamma * 3.0).exp();
                assert!((t.final_position() - t.label * e).norm() <= 1e-8 * t.label.norm() * e);
            }
            assert!(det_deviation(gamma, &tr) < 1e-8);
        }
    }

    #[test]
    fn burgers_axis_velocity() {
        let p = Profile::new(0.4, FieldSource::vector(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 })).unwrap();
        let v = transport_velocity(&p, &Vec3::new(0.0, 0.0, 1.0));
        assert!((v - Vec3::new(0.0, 0.0, 0.7)).norm() < 1e-15);
    }

    #[test]
    fn backward_then_forward_returns() {
        let p = Profile::new(0.4, FieldSource::vector(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 })).unwrap();
        let a = Vec3::new(0.3, -0.2, 0.5);
        let back = integrate_flow(&p, &[a], &[0.0, -1.5], 1e-11).unwrap();
        let y = back[0].final_position();
        let fwd = integrate_flow(&p, &[y], &[0.0, 1.5], 1e-11).unwrap();
        assert!((fwd[0].final_position() - a).norm() < 1e-9);
    }

    #[test]
    fn weber_grows_for_burgers() {
        let p = Profile::new(0.4, FieldSource::vector(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 })).unwrap();
        let labels = weber_patch(Vec3::new(0.4, 0.1, 0.2), 1e-3);
        let tr = integrate_flow(&p, &labels, &tau_samples(1.0, 4), 1e-11).unwrap();
        let w = weber_curl(&p, &tr, 1e-3).unwrap();
        let d = det_deviation(0.4, &tr);
        assert!(w > 10.0 * d.max(1e-12), "{w} {d}");
        let tol = Tolerances::default();
        let e = flow_identity_check(&p, &tr, FlowIdentity::Weber, &tol, 1e-3).unwrap();
        assert_eq!(e.verdict, crate::report::Verdict::Fail);
    }

    #[test]
    fn loop_validation() {
        assert!(Loop::circle(1.0, 0.0, 8).is_err());
        let c = Loop::circle(1.0, 0.0, 32).unwrap();
        assert_eq!(c.orientation(), Orientation::Positive);
        // rigid rotation (-y, x, 0): circulation 2 pi r^2 up to the polygon factor
        let g = c.circulation(|y| Vec3::new(-y[1], y[0], 0.0));
        let n = 32.0;
        assert!((g - n * (2.0 * std::f64::consts::PI / n).sin()).abs() < 1e-12);
        let mut bow: Vec<Vec3> = (0..16).map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 16.0;
            Vec3::new(t.sin(), (2.0 * t).sin(), 0.0)
        }).collect();
        bow.push(bow[0]);
        assert!(Loop::new(bow).is_err());
    }

    #[test]
    fn rigid_rotation_circulation_drifts() {
        let p = Profile::new(0.4, FieldSource::vector(Analytic::RigidBump { rate: 2.0, width: 1.0 })).unwrap();
        let c = Loop::circle(0.5, 0.0, 32).unwrap();
        let r = circulation_drift(&p, &c, &tau_samples(1.0, 4), 1e-10).unwrap();
        assert!(r.drift > 1e-3);
    }

    #[test]
    fn trivial_bernoulli_along_trajectories() {
        for (gamma, decreasing) in [(0.4, true), (0.6, false)] {
            let p = Profile::trivial(gamma).unwrap();
            let tr = integrate_flow(&p, &[Vec3::new(1.0, 0.0, 0.0)], &tau_samples(2.0, 8), 1e-11).unwrap();
            let b = bernoulli_along(&p, p.p.as_ref().unwrap(), &tr);
            assert!(b.identity_residual < 1e-14);
            assert_eq!(b.wrong_way, 0.0);
            let h = &b.values[0];
            assert!((h[0] - gamma * (2.0 * gamma - 1.0) / 2.0).abs() < 1e-15);
            assert_eq!(h.windows(2).all(|w| w[1] < w[0]), decreasing);
        }
    }
}
