//! The full check battery run by `check`, for Cartesian and meridional profiles.

use std::time::Instant;

use crate::axisym::{self, AlphaClass, AxisymProfile, Invariant};
use crate::config::Tolerances;
use crate::error::Error;
use crate::fields::{decay_envelope, field_norm, NormKind, NormRequest, Profile};
use crate::flow::{self, FlowIdentity};
use crate::io::LoadedProfile;
use crate::numerics::Vec3;
use crate::report::{DiagnosticReport, Entry, Num, ProfileMeta};
use crate::selfsim;
use crate::stretching;

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub tol: Tolerances,
    /// Exponents for the L^p stretching identity.
    pub lp: Vec<f64>,
    pub flow_tau: f64,
    pub flow_samples: usize,
    /// Label spacing for the discrete curl in the Weber check.
    pub weber_h: f64,
    /// Certification radius; default is half the distance to the nearest other nodal point, at most 0.5.
    pub eps_star: Option<f64>,
    pub smallness_p: f64,
    pub axisym_tau: f64,
    pub alpha_tau: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: Tolerances::default(),
            lp: vec![2.0],
            flow_tau: 1.0,
            flow_samples: 4,
            weber_h: 1e-3,
            eps_star: None,
            smallness_p: 2.0,
            axisym_tau: 1.0,
            alpha_tau: -20.0,
        }
    }
}

pub fn profile_meta(profile: &Profile) -> ProfileMeta {
    let mut m = ProfileMeta {
        gamma: Some(profile.gamma),
        symmetry: Some("cartesian".into()),
        grid: profile.u.grid().map(|g| format!("{}x{}x{} {}", g.dims[0], g.dims[1], g.dims[2], g.boundary.as_str())),
        ..Default::default()
    };
    if let Some(w) = &profile.omega {
        for (name, kind) in [("omega.sup", NormKind::Sup), ("omega.grad_sup", NormKind::GradSup)] {
            if let Ok(n) = field_norm(w, &NormRequest::new(kind)) {
                m.norms.insert(name.into(), Num(n.value));
            }
        }
    }
    m
}

pub fn axisym_meta(profile: &AxisymProfile) -> ProfileMeta {
    let ((r0, r1), (z0, z1)) = profile.domain;
    ProfileMeta {
        gamma: Some(profile.gamma),
        symmetry: Some("axisym".into()),
        grid: Some(match profile.grid() {
            Some(g) => format!("{}x{} (r,z) from ({}, {})", g.dims[0], g.dims[1], g.origin[0], g.origin[1]),
            None => format!("closed form on r in [{r0}, {r1}], z in [{z0}, {z1}]"),
        }),
        ..Default::default()
    }
}

pub fn check_loaded(p: &LoadedProfile, opts: &CheckOptions) -> DiagnosticReport {
    match p {
        LoadedProfile::Cartesian(p) => check_cartesian(p, opts),
        LoadedProfile::Axisym(p) => check_axisym(p, opts),
    }
}

fn has_vorticity(profile: &Profile) -> bool {
    match &profile.omega {
        Some(w) => !w.is_zero(),
        None => !profile.u.is_zero(),
    }
}

pub fn check_cartesian(profile: &Profile, opts: &CheckOptions) -> DiagnosticReport {
    let tol = &opts.tol;
    let mut rep = DiagnosticReport::new(profile_meta(profile));
    let lp: Vec<f64> = if profile.omega.is_some() { opts.lp.clone() } else { Vec::new() };
    rep.extend(selfsim::residual_entries(profile, tol, &lp));

    let t = Instant::now();
    rep.push(match decay_envelope(profile) {
        Ok(e) => Entry::info("fields.c_flat", "|U| <= C |y| <y>^(-1/g), |Omega| + |grad U| <= C <y>^(-1/g)", e.c_flat)
            .with_note(format!("attained at |y| = {:.4}", e.attained_at))
            .timed(t),
        Err(e) => Entry::inconclusive("fields.c_flat", "decay envelope", f64::NAN, e.to_string()).timed(t),
    });

    stretching_entries(profile, opts, &mut rep);
    let labels = default_flow_labels(profile, opts.weber_h);
    let taus = flow::tau_samples(opts.flow_tau, opts.flow_samples);
    flow_entries(profile, &labels, &taus, opts, &mut rep);
    nodal_entries(profile, opts, &mut rep);
    rep
}

fn stretching_entries(profile: &Profile, opts: &CheckOptions, rep: &mut DiagnosticReport) {
    let reference = "sup|grad Omega|^(3/(p+3)) |Omega|_p^(p/(p+3)) >= 1/C_p";
    if !has_vorticity(profile) {
        rep.push(Entry::info("stretching.smallness", reference, 0.0).with_note("zero vorticity: not applicable"));
        return;
    }
    let t = Instant::now();
    let p = opts.smallness_p;
    rep.push(match stretching::smallness_check(profile, p) {
        Ok(s) => {
            let short = (s.threshold / s.size - 1.0).max(0.0);
            let mut e = Entry::check("stretching.smallness", reference, short, 0.0)
                .with_note(format!("p = {p}, size {:.6e}, threshold {:.6e}: {:?}", s.size, s.threshold, s.verdict));
            if let Some(l) = s.normalized_lp {
                e = e.with_note(format!("normalized |Omega|_p = {l:.6e} vs {:.6e}", s.normalized_threshold));
            }
            e.timed(t)
        }
        Err(Error::ZeroVorticity) => Entry::info("stretching.smallness", reference, 0.0).with_note("zero vorticity: not applicable"),
        Err(e) => Entry::inconclusive("stretching.smallness", reference, f64::NAN, e.to_string()).timed(t),
    });
    let t = Instant::now();
    rep.push(match stretching::argmax_stretching_check(profile, opts.tol.argmax_stretching) {
        Ok(e) => e,
        Err(e) => Entry::inconclusive("stretching.argmax", "stretching factor equals 1 where |Omega| is maximal", f64::NAN, e.to_string())
            .timed(t),
    });
}

/// Two label patches at a distance set by the vorticity feature length.
pub fn default_flow_labels(profile: &Profile, h: f64) -> Vec<Vec3> {
    let scale = profile.omega.as_ref().map(|w| w.extent_and_feature().1).unwrap_or(1.0).clamp(0.25, 4.0);
    let mut labels = flow::weber_patch(Vec3::new(0.5, 0.3, 0.2) * scale, h);
    labels.extend(flow::weber_patch(Vec3::new(-0.4, 0.2, 0.6) * scale, h));
    labels
}

/// Flow-map identities on the given labels; Weber needs the labels in patches of seven.
pub fn flow_entries(profile: &Profile, labels: &[Vec3], taus: &[f64], opts: &CheckOptions, rep: &mut DiagnosticReport) {
    let tol = &opts.tol;
    let trajs = match flow::integrate_flow(profile, labels, taus, tol.integrator) {
        Ok(t) => t,
        Err(e) => {
            rep.push(Entry::inconclusive("flow.det", "det grad_a Y = exp(3 gamma tau)", f64::NAN, e.to_string()));
            return;
        }
    };
    let patches = labels.len() % 7 == 0;
    for which in [FlowIdentity::JacobianDet, FlowIdentity::Cauchy, FlowIdentity::Weber] {
        if which == FlowIdentity::Weber && !patches {
            continue;
        }
        let name = match which {
            FlowIdentity::JacobianDet => "flow.det",
            FlowIdentity::Cauchy => "flow.cauchy",
            FlowIdentity::Weber => "flow.weber",
        };
        match flow::flow_identity_check(profile, &trajs, which, tol, opts.weber_h) {
            Ok(e) => rep.push(e),
            Err(Error::MissingField(_)) => {}
            Err(e) => rep.push(Entry::inconclusive(name, "flow identity", f64::NAN, e.to_string())),
        }
    }
    match flow::bernoulli_monotonicity_check(profile, &trajs, tol) {
        Ok(es) => rep.extend(es),
        Err(e) => rep.push(Entry::inconclusive("flow.bernoulli.monotone", "dH/dtau = (2 gamma - 1)|V|^2", f64::NAN, e.to_string())),
    }
}

pub fn nodal_entries(profile: &Profile, opts: &CheckOptions, rep: &mut DiagnosticReport) {
    let t = Instant::now();
    let set = match flow::nodal_set(profile) {
        Ok(s) => s,
        Err(e) => {
            rep.push(Entry::inconclusive("nodal.count", "zeros of V = gamma y + U", f64::NAN, e.to_string()));
            return;
        }
    };
    let locs: Vec<Vec3> = set.points.iter().map(|p| p.location).collect();
    let mut e = Entry::info("nodal.count", "zeros of V = gamma y + U", set.points.len() as f64)
        .with_note(format!("scan radius R_flat = {:.4}; isolation is heuristic (dedup radius {:e})", set.r_flat, flow::nodal::DEDUP_RADIUS));
    for w in &set.warnings {
        e = e.with_note(w.clone());
    }
    if !set.dropped.is_empty() {
        e = e.with_note(format!("{} seeds dropped (Newton did not converge)", set.dropped.len()));
    }
    rep.push(e.timed(t));
    let nontrivial = has_vorticity(profile);
    for (i, pt) in set.points.iter().enumerate().take(8) {
        let t = Instant::now();
        let y = pt.location;
        let trace: f64 = pt.eigenvalues.iter().sum();
        rep.push(Entry::check(format!("nodal[{i}].trace"), "strain at a nodal point is traceless", trace.abs(), opts.tol.divergence)
            .with_note(format!("y* = ({:.6}, {:.6}, {:.6}), |V| = {:.2e}", y[0], y[1], y[2], pt.residual)));
        let others: Vec<Vec3> = locs.iter().filter(|q| (*q - y).norm() > flow::nodal::DEDUP_RADIUS).copied().collect();
        let nearest = others.iter().map(|q| (q - y).norm()).fold(f64::INFINITY, f64::min);
        let eps = opts.eps_star.unwrap_or_else(|| (0.5 * nearest).min(0.5));
        let reference = "V(y).(y - y*) >= c_* |y - y*|^2 on |y - y*| <= eps_*";
        match flow::outgoing_certificate(profile, pt, eps, &others) {
            Ok(c) => {
                let mut e = Entry::info(format!("nodal[{i}].outgoing"), reference, c.c_raw).with_note(format!(
                    "empirical certificate ({} samples, eps_* = {eps:.4}): property {}",
                    c.samples,
                    if c.holds { "holds" } else { "FAILS" }
                ));
                if let Some(r) = c.eigenpair_residual {
                    e = e.with_note(format!("|S Xi - Xi| = {r:.3e} (tolerance {:.3e})", c.eigenpair_tolerance));
                }
                rep.push(e.timed(t));
                if let (true, Some(bound)) = (c.holds && nontrivial, c.gamma_bound) {
                    rep.push(
                        Entry::check(format!("nodal[{i}].gamma_bound"), "outgoing nodal point forces gamma >= 1/2 + c_*", (bound - profile.gamma).max(0.0), 0.0)
                            .with_note(format!("gamma = {}, implied bound {bound:.6}", profile.gamma)),
                    );
                }
            }
            Err(e) => rep.push(Entry::inconclusive(format!("nodal[{i}].outgoing"), reference, f64::NAN, e.to_string()).timed(t)),
        }
    }
}

/// Default test polygon: a small square in the interior of the meridional window.
pub fn default_polygon(profile: &AxisymProfile) -> Vec<(f64, f64)> {
    let ((r0, r1), (z0, z1)) = profile.domain;
    let (ra, rb) = (r0 + 0.3 * (r1 - r0), r0 + 0.45 * (r1 - r0));
    let (za, zb) = (z0 + 0.55 * (z1 - z0), z0 + 0.7 * (z1 - z0));
    vec![(ra.max(1e-3), za), (rb, za), (rb, zb), (ra.max(1e-3), zb)]
}

pub fn default_meridional_seeds(profile: &AxisymProfile) -> Vec<(f64, f64)> {
    let ((r0, r1), (z0, z1)) = profile.domain;
    let zc = z0 + 0.6 * (z1 - z0);
    (0..4).map(|k| ((r0 + (r1 - r0) * (0.2 + 0.2 * k as f64)).max(1e-3), zc)).collect()
}

pub fn check_axisym(profile: &AxisymProfile, opts: &CheckOptions) -> DiagnosticReport {
    let tol = &opts.tol;
    let mut rep = DiagnosticReport::new(axisym_meta(profile));
    rep.extend(axisym::residual_entries(profile, tol));
    fixed_point_entries(profile, &mut rep);
    let taus = flow::tau_samples(opts.axisym_tau, 4);
    rep.push(axisym::area_growth_check(profile, &default_polygon(profile), &taus, tol));
    let seeds = default_meridional_seeds(profile);
    invariant_entries(profile, &seeds, &taus, tol, &mut rep);
    rep.push(alpha_limit_entry(profile, seeds[1], opts.alpha_tau, tol));
    rep.push(swirl_sup_entry(profile));
    rep
}

pub fn fixed_point_entries(profile: &AxisymProfile, rep: &mut DiagnosticReport) {
    let t = Instant::now();
    match axisym::meridional_fixed_points(profile) {
        Ok(f) => {
            let mut e = Entry::info("axisym.fixed_points", "gamma r + U_r = gamma z + U_z = 0", f.points.len() as f64).with_note(f.note.clone());
            for p in &f.points {
                e = e.with_note(format!(
                    "({:.10}, {:.10}) {}; U_th = {:.3e}, circulation {:.3e}",
                    p.r,
                    p.z,
                    if p.on_axis { "on-axis" } else { "off-axis" },
                    p.u_theta,
                    p.circulation
                ));
            }
            rep.push(e.timed(t));
            for p in f.points.iter().filter(|p| p.verdict.is_some()) {
                rep.push(
                    Entry::check("axisym.swirl_gamma", "off-axis fixed point with swirl forces gamma = 1/2", (profile.gamma - 0.5).abs(), 1e-12)
                        .with_note(format!("at ({:.10}, {:.10}): {}", p.r, p.z, p.verdict.clone().unwrap())),
                );
            }
        }
        Err(e) => rep.push(Entry::inconclusive("axisym.fixed_points", "meridional fixed points", f64::NAN, e.to_string()).timed(t)),
    }
}

/// Swirl (and, when present, azimuthal vorticity) invariants along meridional trajectories.
pub fn invariant_entries(profile: &AxisymProfile, seeds: &[(f64, f64)], taus: &[f64], tol: &Tolerances, rep: &mut DiagnosticReport) {
    match axisym::meridional_flow(profile, seeds, taus, tol.integrator) {
        Ok(trajs) => {
            rep.push(axisym::axisym_invariant_check(profile, &trajs, Invariant::Swirl, tol));
            if profile.omega_theta.is_some() {
                rep.push(axisym::axisym_invariant_check(profile, &trajs, Invariant::AzimuthalVorticity, tol));
            }
        }
        Err(e) => rep.push(Entry::inconclusive("axisym.invariant.swirl", "swirl transport", f64::NAN, e.to_string())),
    }
}

pub fn alpha_limit_entry(profile: &AxisymProfile, seed: (f64, f64), tau_min: f64, tol: &Tolerances) -> Entry {
    let t = Instant::now();
    let reference = "backward alpha-limit of a meridional trajectory is a single axis fixed point";
    match axisym::backward_alpha_limit(profile, seed, tau_min, tol.integrator) {
        Ok(a) => {
            let mut e = Entry::info("axisym.alpha_limit", reference, a.min_axis_distance).with_note(format!("seed {seed:?}: {}", a.class));
            if matches!(a.class, AlphaClass::OffAxisFixedPoint { .. }) {
                e = e.with_note("contradicts the all-axis configuration");
            }
            if let Some(b) = a.bernoulli_change {
                e = e.with_note(format!("Bernoulli change along the backward path {b:.6e}"));
            }
            for n in &a.notes {
                e = e.with_note(n.clone());
            }
            e.timed(t)
        }
        Err(e) => Entry::inconclusive("axisym.alpha_limit", reference, f64::NAN, e.to_string()).timed(t),
    }
}

fn swirl_sup_entry(profile: &AxisymProfile) -> Entry {
    let ((r0, r1), (z0, z1)) = profile.domain;
    let ut = (0..=32)
        .flat_map(|i| (0..=32).map(move |k| (i, k)))
        .map(|(i, k)| profile.u_theta.value(r0 + (r1 - r0) * i as f64 / 32.0, z0 + (z1 - z0) * k as f64 / 32.0).abs())
        .fold(0.0, f64::max);
    Entry::info("axisym.swirl_sup", "sup |U_th|; swirl is assumed not to vanish identically", ut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Meridional;
    use crate::report::Verdict;

    #[test]
    fn trivial_passes_everything() {
        for g in [0.3, 0.6] {
            let rep = check_cartesian(&Profile::trivial(g).unwrap(), &CheckOptions::default());
            for e in &rep.entries {
                assert!(matches!(e.verdict, Verdict::Pass | Verdict::Info), "{}: {:?} {:?}", e.name, e.verdict, e.note);
            }
            assert!(rep.entries.iter().any(|e| e.name == "res.velocity" && e.residual() == 0.0));
        }
    }

    #[test]
    fn linear_strain_axisym_battery() {
        let p = AxisymProfile::from_meridional(0.4, Meridional::LinearStrain { a: 0.1 }).unwrap();
        let rep = check_axisym(&p, &CheckOptions::default());
        let get = |n: &str| rep.entries.iter().find(|e| e.name == n).unwrap_or_else(|| panic!("{n}"));
        assert_eq!(get("axisym.area").verdict, Verdict::Pass);
        assert_eq!(get("axisym.res.continuity").verdict, Verdict::Pass);
        assert_eq!(get("axisym.fixed_points").residual(), 1.0);
    }
}
