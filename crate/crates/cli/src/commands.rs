use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ssguard_core::axisym::{self, AxisymProfile};
use ssguard_core::battery::{self, CheckOptions};
use ssguard_core::config::Tolerances;
use ssguard_core::criteria::{self, SplitConstants, TimeSeries, ViscousOutcome, ViscousSplitSpec};
use ssguard_core::fields::Profile;
use ssguard_core::fixtures::{Family, FixtureSpec};
use ssguard_core::flow::{self, Loop};
use ssguard_core::io::{self, LoadedProfile, ProfileDoc};
use ssguard_core::report::{DiagnosticReport, Entry, ProfileMeta};
use ssguard_core::selfsim;
use ssguard_core::stretching::{self, QuadratureOptions, StretchingContext};
use ssguard_core::Vec3;

use crate::input;
use crate::{AxisymAction, Cli, Command, CriteriaArgs, Format, Tol};

pub struct Output {
    pub text: String,
    pub failed: bool,
}

impl Output {
    fn report(rep: &DiagnosticReport, format: Format) -> Output {
        let text = match format {
            Format::Jsonl => rep.to_jsonl(),
            Format::Table => rep.to_table(),
        };
        Output { text, failed: rep.any_fail() }
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let rep = match &cli.command {
        Command::Check { file, gamma_override, tol, lp, eps_star } => {
            let p = load(file, *gamma_override)?;
            let opts = CheckOptions { tol: tolerances(tol)?, lp: lp.clone(), eps_star: *eps_star, ..Default::default() };
            battery::check_loaded(&p, &opts)
        }
        Command::Residual { file, tol, lp } => {
            let tol = tolerances(tol)?;
            match load(file, None)? {
                LoadedProfile::Cartesian(p) => {
                    let mut rep = DiagnosticReport::new(battery::profile_meta(&p));
                    let lp = if p.omega.is_some() { lp.clone() } else { Vec::new() };
                    rep.extend(selfsim::residual_entries(&p, &tol, &lp));
                    rep
                }
                LoadedProfile::Axisym(p) => {
                    let mut rep = DiagnosticReport::new(battery::axisym_meta(&p));
                    rep.extend(axisym::residual_entries(&p, &tol));
                    rep
                }
            }
        }
        Command::Stretching { file, points, cutoff, p, rel_tol, radial, polar, azimuthal } => {
            let profile = cartesian(load(file, None)?)?;
            let quad = QuadratureOptions { radial: *radial, polar: *polar, azimuthal: *azimuthal, ..Default::default() };
            stretching_report(&profile, points, *cutoff, *p, *rel_tol, quad)?
        }
        Command::Flow { file, seeds, tau, backward, samples, tol } => {
            let profile = cartesian(load(file, None)?)?;
            let opts = CheckOptions { tol: tolerances(tol)?, ..Default::default() };
            let labels = match seeds.as_str() {
                "auto" => battery::default_flow_labels(&profile, opts.weber_h),
                f => input::read_points(Path::new(f))?,
            };
            let taus = window(tau, *backward, *samples)?;
            flow_report(&profile, &labels, &taus, &opts)?
        }
        Command::Nodal { file, eps_star, tol } => {
            let profile = cartesian(load(file, None)?)?;
            if let Some(e) = eps_star {
                if !(*e > 0.0) {
                    bail!("--eps-star must be positive");
                }
            }
            let opts = CheckOptions { tol: tolerances(tol)?, eps_star: *eps_star, ..Default::default() };
            let mut rep = DiagnosticReport::new(battery::profile_meta(&profile));
            battery::nodal_entries(&profile, &opts, &mut rep);
            vanishing_entries(&profile, &mut rep);
            rep
        }
        Command::Circulation { file, loop_file, circle, tau, samples, tol } => {
            let profile = cartesian(load(file, None)?)?;
            let lp = match (loop_file, circle) {
                (Some(f), _) => Loop::new(input::read_points(f)?)?,
                (None, Some(c)) => {
                    let n = c[2];
                    if n.fract() != 0.0 || n < 16.0 {
                        bail!("--circle: N must be an integer >= 16, got {n}");
                    }
                    Loop::circle(c[0], c[1], n as usize)?
                }
                (None, None) => bail!("circulation needs --loop <file> or --circle R Z N"),
            };
            let taus = window(tau, false, *samples)?;
            let mut rep = DiagnosticReport::new(battery::profile_meta(&profile));
            rep.push(flow::circulation_check(&profile, &lp, &taus, &tolerances(tol)?)?);
            rep
        }
        Command::Axisym { file, action, seeds, tau, polygon, seed, tau_min, tol } => {
            let profile = match load(file, None)? {
                LoadedProfile::Axisym(p) => p,
                LoadedProfile::Cartesian(_) => bail!("{}: `axisym` needs a profile with symmetry = \"axisym\"", file.display()),
            };
            let tol = tolerances(tol)?;
            let seeds = match seeds.as_str() {
                "auto" => battery::default_meridional_seeds(&profile),
                f => input::read_pairs(Path::new(f))?,
            };
            let taus = window(tau, false, 8)?;
            axisym_report(&profile, *action, &seeds, &taus, polygon.as_deref(), seed.as_deref(), *tau_min, &tol)?
        }
        Command::Criteria(args) => return criteria(args, cli.format),
        Command::Fixture { family, params, out } => {
            let mut spec = FixtureSpec::new(Family::parse(family)?);
            for p in params {
                let (k, v) = input::parse_param(p)?;
                spec = spec.with(&k, v);
            }
            let doc = spec.to_doc()?;
            io::write_profile(out, &doc).with_context(|| format!("writing {}", out.display()))?;
            return Ok(Output { text: format!("wrote {} ({})\n", out.display(), spec.family.name()), failed: false });
        }
    };
    Ok(Output::report(&rep, cli.format))
}

fn tolerances(t: &Tol) -> Result<Tolerances> {
    if !(t.tol_scale > 0.0) || !t.tol_scale.is_finite() {
        bail!("--tol-scale must be positive and finite, got {}", t.tol_scale);
    }
    Ok(Tolerances::default().scaled(t.tol_scale))
}

fn load(path: &Path, gamma_override: Option<f64>) -> Result<LoadedProfile> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut doc = ProfileDoc::from_bytes(&bytes).with_context(|| path.display().to_string())?;
    if let Some(g) = gamma_override {
        if !(g > 0.0) || !g.is_finite() {
            bail!("--gamma-override must be positive, got {g}");
        }
        doc.gamma = g;
    }
    doc.build().with_context(|| path.display().to_string())
}

fn cartesian(p: LoadedProfile) -> Result<Profile> {
    Ok(match p {
        LoadedProfile::Cartesian(p) => p,
        LoadedProfile::Axisym(a) => a.to_cartesian()?,
    })
}

/// Samples 0..(b - a) (negated with `backward`), as integrate_flow expects.
fn window(tau: &str, backward: bool, samples: usize) -> Result<Vec<f64>> {
    let (a, b) = input::parse_tau(tau)?;
    if samples == 0 {
        bail!("--samples must be at least 1");
    }
    let len = if backward { -(b - a).abs() } else { b - a };
    Ok(flow::tau_samples(len, samples))
}

fn fmt_point(y: &Vec3) -> String {
    format!("({:.6}, {:.6}, {:.6})", y[0], y[1], y[2])
}

/// The vorticity maximum plus seven points on the sphere through it (or at
/// the feature length when the maximum sits at the origin).
fn auto_points(profile: &Profile) -> Vec<Vec3> {
    let mut pts = Vec::new();
    let mut r = profile.omega.as_ref().map(|w| w.extent_and_feature().1).unwrap_or(1.0).clamp(0.25, 4.0);
    if let Ok(y) = stretching::argmax_vorticity(profile) {
        if y.norm() > 1e-6 {
            r = y.norm();
        }
        pts.push(y);
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for k in 0..7 {
        let z = 1.0 - (2 * k + 1) as f64 / 7.0;
        let s = (1.0 - z * z).sqrt();
        let phi = golden * k as f64;
        pts.push(Vec3::new(s * phi.cos(), s * phi.sin(), z) * r);
    }
    pts
}

fn stretching_report(profile: &Profile, points: &str, cutoff: f64, p: f64, rel_tol: f64, quad: QuadratureOptions) -> Result<DiagnosticReport> {
    if !(cutoff > 0.0) {
        bail!("--L must be positive");
    }
    let pts = match points {
        "auto" => auto_points(profile),
        f => input::read_points(Path::new(f))?,
    };
    let mut rep = DiagnosticReport::new(battery::profile_meta(profile));
    let ctx = StretchingContext::new(profile, p, quad)?;
    for (i, y) in pts.iter().enumerate() {
        let t = Instant::now();
        let r = match ctx.eval(y, cutoff) {
            Ok(r) => r,
            Err(e) => {
                rep.push(Entry::inconclusive(format!("stretching[{i}]"), "principal-value stretching integral", f64::NAN, e.to_string()).timed(t));
                continue;
            }
        };
        let at = format!("y = {}, L = {cutoff}, p = {p}", fmt_point(y));
        rep.push(
            Entry::info(format!("stretching[{i}].integral"), "stretching factor as a principal-value integral over Omega", r.a_integral)
                .with_note(format!("{at}; quadrature error {:.3e}", r.quad_error))
                .timed(t),
        );
        if let Some(d) = r.a_direct {
            let gap = (r.a_integral - d).abs();
            rep.push(
                Entry::check(
                    format!("stretching[{i}].agreement"),
                    "integral form equals the strain contraction Xi.S.Xi",
                    gap,
                    rel_tol * d.abs().max(ctx.omega_sup) + r.quad_error,
                )
                .with_note(format!("direct {d:.10e}; gap relative to max(|direct|, sup|Omega|)")),
            );
        }
        let excess = (r.alpha_in.abs() - r.bound_in - r.err_in).max(r.alpha_out.abs() - r.bound_out - r.err_out - r.tail).max(0.0);
        rep.push(
            Entry::check(
                format!("stretching[{i}].bounds"),
                "|alpha_in| <= C_in L sup|grad Omega| and |alpha_out| <= C_out L^(-1-3/p) |Omega|_p",
                excess,
                0.0,
            )
            .with_note(format!(
                "alpha_in {:.4e} (bound {:.4e}), alpha_out {:.4e} (bound {:.4e})",
                r.alpha_in, r.bound_in, r.alpha_out, r.bound_out
            )),
        );
    }
    Ok(rep)
}

fn flow_report(profile: &Profile, labels: &[Vec3], taus: &[f64], opts: &CheckOptions) -> Result<DiagnosticReport> {
    let mut rep = DiagnosticReport::new(battery::profile_meta(profile));
    let t = Instant::now();
    let trajs = flow::integrate_flow(profile, labels, taus, opts.tol.integrator)?;
    let ms = t.elapsed().as_secs_f64() * 1e3 / trajs.len().max(1) as f64;
    for (i, tr) in trajs.iter().enumerate() {
        let end = tr.final_position();
        let mut e = Entry::info(format!("flow.traj[{i}]"), "dY/dtau = gamma Y + U(Y)", end.norm()).with_note(format!(
            "{} -> {} at tau = {}; {} steps",
            fmt_point(&tr.label),
            fmt_point(&end),
            tr.taus.last().copied().unwrap_or(0.0),
            tr.stats.steps
        ));
        if let Some(why) = &tr.truncated {
            e = e.with_note(format!("truncated: {why}"));
        }
        e.wall_ms = ms;
        rep.push(e);
    }
    battery::flow_entries(profile, labels, taus, opts, &mut rep);
    Ok(rep)
}

/// Vanishing order of Omega at nodal points where it vanishes.
fn vanishing_entries(profile: &Profile, rep: &mut DiagnosticReport) {
    let Ok(set) = flow::nodal_set(profile) else { return };
    let scale = profile.omega.as_ref().map(|w| w.extent_and_feature().1).unwrap_or(1.0);
    for (i, pt) in set.points.iter().enumerate().take(8) {
        let t = Instant::now();
        let reference = "Omega vanishes to infinite order at an outgoing nodal point";
        match flow::vanishing_order(profile, &pt.location, scale, flow::nodal::DEFAULT_ORDER_CAP) {
            Ok(v) => rep.push(
                Entry::info(format!("nodal[{i}].vanishing_order"), reference, v.order)
                    .with_note(if v.infinite {
                        "consistent with infinite-order vanishing".to_string()
                    } else {
                        format!("fit residual {:.3e}", v.fit_residual)
                    })
                    .timed(t),
            ),
            Err(ssguard_core::Error::NotVanishing(_)) => {}
            Err(e) => rep.push(Entry::inconclusive(format!("nodal[{i}].vanishing_order"), reference, f64::NAN, e.to_string()).timed(t)),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn axisym_report(
    profile: &AxisymProfile,
    action: AxisymAction,
    seeds: &[(f64, f64)],
    taus: &[f64],
    polygon: Option<&Path>,
    seed: Option<&str>,
    tau_min: f64,
    tol: &Tolerances,
) -> Result<DiagnosticReport> {
    let mut rep = DiagnosticReport::new(battery::axisym_meta(profile));
    match action {
        AxisymAction::Residual => {
            rep.extend(axisym::residual_entries(profile, tol));
        }
        AxisymAction::Flow => {
            let t = Instant::now();
            let trajs = axisym::meridional_flow(profile, seeds, taus, tol.integrator)?;
            for (i, tr) in trajs.iter().enumerate() {
                let k = tr.r.len() - 1;
                let mut e = Entry::info(format!("axisym.traj[{i}]"), "dR = gamma R + U_r, dZ = gamma Z + U_z, dTheta = U_th/R", tr.r[k])
                    .with_note(format!(
                        "({:.6}, {:.6}) -> (r {:.6}, z {:.6}, theta {:.6}) at tau = {}",
                        tr.label.0, tr.label.1, tr.r[k], tr.z[k], tr.theta[k], tr.taus[k]
                    ));
                if let Some(why) = &tr.truncated {
                    e = e.with_note(format!("truncated: {why}"));
                }
                if tr.theta_divergent {
                    e = e.with_note("U_th/R unbounded; theta frozen");
                }
                rep.push(e.timed(t));
            }
        }
        AxisymAction::FixedPoints => battery::fixed_point_entries(profile, &mut rep),
        AxisymAction::Area => {
            let poly = match polygon {
                Some(f) => input::read_pairs(f)?,
                None => battery::default_polygon(profile),
            };
            rep.push(axisym::area_growth_check(profile, &poly, taus, tol));
        }
        AxisymAction::Invariants => battery::invariant_entries(profile, seeds, taus, tol, &mut rep),
        AxisymAction::AlphaLimit => {
            if !(tau_min < 0.0) {
                bail!("--tau-min must be negative");
            }
            let s = match seed {
                Some(s) => input::parse_pair(s)?,
                None => seeds[seeds.len() / 2],
            };
            rep.push(battery::alpha_limit_entry(profile, s, tau_min, tol));
        }
    }
    Ok(rep)
}

fn series(path: &Path, t_star: f64) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TimeSeries::parse(&text, t_star).with_context(|| path.display().to_string())
}

fn criteria(a: &CriteriaArgs, format: Format) -> Result<Output> {
    let others = a.ell_mu || a.alpha_bound || a.viscous;
    if !others {
        let Some(p) = a.gamma_bound else { bail!("criteria needs one of --gamma-bound, --ell-mu, --alpha-bound, --viscous") };
        return Ok(Output { text: format!("{}\n", criteria::gamma_lower_bound(p)?), failed: false });
    }
    let mut rep = DiagnosticReport::new(ProfileMeta::default());
    if let Some(p) = a.gamma_bound {
        rep.push(Entry::info("criteria.gamma_bound", "u in L^p forces gamma >= p/(p+3)", criteria::gamma_lower_bound(p)?).with_note(format!("p = {p}")));
    }
    if a.ell_mu {
        let t = Instant::now();
        let h = series(a.holder.as_deref().unwrap(), a.t_star)?;
        let e = series(a.energy.as_deref().unwrap(), a.t_star)?;
        let r = criteria::ell_mu_criterion(&h, &e, a.mu.unwrap(), a.l0)?;
        rep.push(
            Entry::info("criteria.ell_mu", "integral of ell_mu^(-5/2) finite rules out blowup", r.integral)
                .with_note(format!("{}; tail exponent {:.6} +- {:.2e} ({} samples)", r.verdict, r.fit.exponent, r.fit.stderr, r.fit.samples))
                .timed(t),
        );
    }
    if a.alpha_bound {
        let t = Instant::now();
        let g = series(a.gradw.as_deref().unwrap(), a.t_star)?;
        let u = series(a.lp_series.as_deref().unwrap(), a.t_star)?;
        let c = SplitConstants { c_in: a.c_in, c_out: a.c_out };
        let r = criteria::alpha_pointwise_bound(&g, &u, a.p.unwrap(), c)?;
        rep.push(
            Entry::info("criteria.alpha_bound", "time integral of the optimized split bound", r.integral)
                .with_note(format!("{}; tail exponent {:.6} +- {:.2e}", r.verdict, r.fit.exponent, r.fit.stderr))
                .timed(t),
        );
        rep.push(Entry::check(
            "criteria.alpha_bound.closed_form",
            "searched split minimum equals the closed-form optimum",
            r.closed_form_mismatch,
            1e-8,
        ));
    }
    if a.viscous {
        let spec = ViscousSplitSpec { budget: a.budget, amplitude: a.amplitude, gamma: a.gamma.unwrap() };
        let reference = "16(budget + amplitude^4/(6 gamma - 3)) bounds the integral of |omega|_2^4";
        rep.push(match criteria::viscous_criterion(spec)? {
            ViscousOutcome::Bound { value } => Entry::info("criteria.viscous", reference, value).with_note("finite: regularity criterion met"),
            ViscousOutcome::InnerDivergent => {
                Entry::info("criteria.viscous", reference, f64::INFINITY).with_note("inner contribution divergent (gamma <= 1/2)")
            }
        });
    }
    Ok(Output::report(&rep, format))
}
