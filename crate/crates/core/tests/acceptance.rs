//! Desk-scale acceptance run: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use ssguard_core::axisym::{self, AxisymProfile, Equation, Invariant};
use ssguard_core::criteria::{self, Convergence, TimeSeries, ViscousOutcome, ViscousSplitSpec};
use ssguard_core::fields::{Analytic, FieldSource, Profile, Rank};
use ssguard_core::fixtures::{self, Family, FixtureSpec};
use ssguard_core::flow::{self, Loop};
use ssguard_core::io::LoadedProfile;
use ssguard_core::selfsim::{self, Which};
use ssguard_core::stretching::{self, QuadratureOptions, Smallness, StretchingContext};
use ssguard_core::Vec3;

type Outcome = Result<String, String>;

/// Collects failed sub-checks so one criterion reports all of them.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
}

impl Checks {
    fn that(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failed.push(what());
        }
    }

    fn done(self, summary: String) -> Outcome {
        if self.failed.is_empty() {
            Ok(summary)
        } else {
            Err(self.failed.join("; "))
        }
    }
}

fn cartesian(spec: &FixtureSpec) -> Profile {
    match spec.build().expect("fixture builds") {
        LoadedProfile::Cartesian(p) => p,
        LoadedProfile::Axisym(_) => panic!("expected a Cartesian fixture"),
    }
}

fn meridional(spec: &FixtureSpec) -> AxisymProfile {
    match spec.build().expect("fixture builds") {
        LoadedProfile::Axisym(p) => p,
        LoadedProfile::Cartesian(_) => panic!("expected an axisymmetric fixture"),
    }
}

fn constants() -> Outcome {
    // 50-digit evaluations of 2 6^(3/5) (3/(4 pi))^(1/5) and (1/2)(pi/1296)^(1/2)
    const CP2: f64 = 4.400_510_119_422_613_714_140_619_945_125;
    const THRESHOLD2: f64 = 0.024_617_414_595_909_944_823_585_659_490_849;
    let mut c = Checks::default();
    let cp = stretching::cp_constant(2.0).map_err(|e| e.to_string())?;
    c.that((cp - CP2).abs() <= 1e-12, || format!("cp_constant(2) = {cp:.17}"));
    let t = stretching::normalized_threshold(2.0).map_err(|e| e.to_string())?;
    c.that((t - THRESHOLD2).abs() <= 1e-12, || format!("normalized_threshold(2) = {t:.17}"));
    let g2 = criteria::gamma_lower_bound(2.0).map_err(|e| e.to_string())?;
    let g3 = criteria::gamma_lower_bound(3.0).map_err(|e| e.to_string())?;
    c.that(g2 == 2.0 / 5.0, || format!("gamma bound at p = 2 is {g2}"));
    c.that(g3 == 0.5, || format!("gamma bound at p = 3 is {g3}"));
    c.done(format!("C_2 = {cp:.15}, gamma bounds {g2}, {g3}"))
}

fn trivial_suite() -> Outcome {
    let mut c = Checks::default();
    let labels = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(-0.3, 0.7, 1.1), Vec3::new(0.2, -2.0, 0.5)];
    for gamma in [0.3, 0.4, 0.5, 0.6] {
        let p = Profile::trivial(gamma).unwrap();
        for which in [Which::VelocityForm, Which::VorticityForm, Which::LpIdentity(2.0), Which::Divergence] {
            let r = selfsim::selfsim_residual(&p, which).map_err(|e| e.to_string())?;
            c.that(r.sup == 0.0 && r.l2 == 0.0, || format!("gamma {gamma}: {which} residual {:e}", r.sup));
        }
        let trajs = flow::integrate_flow(&p, &labels, &[0.0, 1.5, 3.0], 1e-12).map_err(|e| e.to_string())?;
        for tr in &trajs {
            let exact = tr.label * (3.0 * gamma).exp();
            let err = (tr.final_position() - exact).norm() / exact.norm();
            c.that(err <= 1e-8, || format!("gamma {gamma}: Y(a, 3) off by {err:e}"));
            let det = tr.jacobians.last().unwrap().determinant();
            let want = (9.0 * gamma).exp();
            c.that(((det - want) / want).abs() <= 1e-8, || format!("gamma {gamma}: det {det} vs {want}"));
        }
        let b = selfsim::bernoulli(&p).map_err(|e| e.to_string())?;
        let coef = b.farfield.coefficient();
        let want = gamma * (2.0 * gamma - 1.0) / 2.0;
        c.that((coef - want).abs() <= 1e-10, || format!("gamma {gamma}: far-field coefficient {coef} vs {want}"));
        let set = flow::nodal_set(&p).map_err(|e| e.to_string())?;
        let cert = flow::outgoing_certificate(&p, &set.points[0], 0.5, &[]).map_err(|e| e.to_string())?;
        c.that((cert.c_star - gamma).abs() <= 1e-10, || format!("gamma {gamma}: c_* = {}", cert.c_star));
    }
    c.done("gamma in {0.3, 0.4, 0.5, 0.6}: residuals 0, Y, det, far field and c_* exact".into())
}

/// Points around the ring core: major radius 0.6..1.4, height -0.4..0.4.
fn ring_points(rng: &mut StdRng, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            let r = rng.gen_range(0.6..1.4);
            let phi = rng.gen_range(0.0..2.0 * PI);
            Vec3::new(r * phi.cos(), r * phi.sin(), rng.gen_range(-0.4..0.4))
        })
        .collect()
}

fn column() -> Profile {
    cartesian(&FixtureSpec::new(Family::GaussianColumn))
}

fn stretching_agreement() -> Outcome {
    let mut c = Checks::default();
    let ring = fixtures::gaussian_ring_spectral(0.45, 1.0, 0.1, 128, 4.0).map_err(|e| e.to_string())?;
    let ctx = StretchingContext::new(&ring, 2.0, QuadratureOptions::default()).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut worst_cut: f64 = 0.0;
    for y in ring_points(&mut rng, 20) {
        let res: Vec<_> = [0.25, 0.5, 1.0].iter().map(|&l| ctx.eval(&y, l)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let direct = res[1].a_direct.expect("ring velocity is available");
        let rel = (res[1].a_integral - direct).abs() / direct.abs().max(ctx.omega_sup);
        worst = worst.max(rel);
        c.that(rel <= 1e-3, || format!("ring at {y:?}: integral {} vs direct {direct}", res[1].a_integral));
        for i in 0..3 {
            for j in i + 1..3 {
                let gap = (res[i].a_integral - res[j].a_integral).abs();
                let allowed = res[i].quad_error + res[j].quad_error;
                worst_cut = worst_cut.max(gap / allowed.max(f64::MIN_POSITIVE));
                c.that(gap <= allowed, || format!("ring at {y:?}: cutoffs {} / {} differ by {gap:e} > {allowed:e}", res[i].cutoff, res[j].cutoff));
            }
        }
    }
    let col = column();
    let cctx = StretchingContext::new(&col, 2.0, QuadratureOptions::default()).map_err(|e| e.to_string())?;
    for y in [Vec3::new(0.3, -0.2, 0.0), Vec3::new(1.0, 0.5, 2.0), Vec3::new(-0.7, 0.1, -1.0)] {
        let r = cctx.eval(&y, 0.5).map_err(|e| e.to_string())?;
        c.that(r.a_integral.abs() <= 10.0 * r.quad_error, || format!("column at {y:?}: |A| = {:e}, error {:e}", r.a_integral, r.quad_error));
    }
    c.done(format!("worst relative gap {worst:.2e}; worst cutoff gap {worst_cut:.1e} of summed errors"))
}

fn majorants() -> Outcome {
    let mut c = Checks::default();
    let ring = cartesian(&FixtureSpec::new(Family::GaussianRing).with("n", 128.0));
    let col = column();
    let mut rng = StdRng::seed_from_u64(4);
    let mut evals = 0;
    for (name, p) in [("ring", &ring), ("column", &col)] {
        let ctx = StretchingContext::new(p, 2.0, QuadratureOptions::default()).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let y = Vec3::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0));
            let l = rng.gen_range(0.1..1.0);
            let r = ctx.eval(&y, l).map_err(|e| e.to_string())?;
            evals += 1;
            c.that(r.within_bounds(), || {
                format!("{name} at {y:?}, L {l}: |alpha_in| {:e} vs {:e}, |alpha_out| {:e} vs {:e}", r.alpha_in, r.bound_in, r.alpha_out, r.bound_out)
            });
        }
    }
    c.done(format!("{evals} evaluations, no violations"))
}

fn jacobian_and_area() -> Outcome {
    let mut c = Checks::default();
    let ring = cartesian(&FixtureSpec::new(Family::GaussianRing));
    let labels = [Vec3::new(1.0, 0.0, 0.05), Vec3::new(0.0, 0.8, -0.2), Vec3::new(0.5, 0.5, 0.5), Vec3::new(-1.3, 0.2, 0.0)];
    let trajs = flow::integrate_flow(&ring, &labels, &flow::tau_samples(2.0, 8), 1e-10).map_err(|e| e.to_string())?;
    let det = flow::det_deviation(ring.gamma, &trajs);
    c.that(det <= 1e-6, || format!("ring det deviation {det:e}"));
    c.that(trajs.iter().all(|t| t.truncated.is_none()), || "ring trajectory truncated".into());
    let lin = meridional(&FixtureSpec::new(Family::LinearStrain));
    let poly = [(0.5, -0.2), (0.9, -0.2), (0.9, 0.3), (0.5, 0.3)];
    let g = axisym::area_growth(&lin, &poly, &flow::tau_samples(1.0, 4), 1e-10).map_err(|e| e.to_string())?;
    c.that(g.deviation <= 1e-6, || format!("area log deviation {:e}", g.deviation));
    c.done(format!("det deviation {det:.2e} at tau = 2, area deviation {:.2e} at tau = 1", g.deviation))
}

fn swirl_conservation() -> Outcome {
    let mut c = Checks::default();
    let spec = FixtureSpec::new(Family::ManufacturedSwirl).with("gamma", 0.4).with("a", 0.1).with("kappa", 1.0);
    let p = meridional(&spec);
    let res = axisym::axisym_residual(&p, Equation::Swirl).map_err(|e| e.to_string())?;
    c.that(res.sup <= 1e-8, || format!("swirl residual {:e}", res.sup));
    let seeds = [(0.5, 0.0), (1.0, 0.3), (1.5, -0.5), (2.0, 1.0)];
    let trajs = axisym::meridional_flow(&p, &seeds, &flow::tau_samples(3.0, 12), 1e-12).map_err(|e| e.to_string())?;
    let drift = axisym::invariant_drift(&p, &trajs, Invariant::Swirl).map_err(|e| e.to_string())?;
    c.that(drift <= 1e-8, || format!("swirl invariant drift {drift:e}"));
    let cart = p.to_cartesian().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r0 in [0.5, 1.0, 2.0] {
        let lp = Loop::circle(r0, 0.0, 64).map_err(|e| e.to_string())?;
        let d = flow::circulation_drift(&cart, &lp, &flow::tau_samples(3.0, 6), 1e-11).map_err(|e| e.to_string())?;
        worst = worst.max(d.drift);
        c.that(d.drift <= 1e-6 && !d.truncated, || format!("circle r0 = {r0}: circulation drift {:e}", d.drift));
    }
    c.done(format!("residual {:.1e}, invariant drift {drift:.1e}, circulation drift {worst:.1e}", res.sup))
}

fn criteria_dichotomies() -> Outcome {
    let mut c = Checks::default();
    let times = criteria::geometric_times(8, 10);
    let mu = 0.5;
    for (gamma, want) in [(0.35, Convergence::Finite), (0.4, Convergence::Divergent), (0.45, Convergence::Divergent)] {
        // a length scale collapsing like (T* - t)^gamma
        let q = gamma * (2.0 * mu + 5.0) / 2.0;
        let holder = TimeSeries::new(times.clone(), times.iter().map(|t| (1.0 - t).powf(-q)).collect(), 1.0).map_err(|e| e.to_string())?;
        let energy = TimeSeries::new(times.clone(), vec![1.0; times.len()], 1.0).map_err(|e| e.to_string())?;
        let r = criteria::ell_mu_criterion(&holder, &energy, mu, 1.0).map_err(|e| e.to_string())?;
        c.that(r.verdict == want, || format!("gamma {gamma}: {:?}, expected {want:?}", r.verdict));
    }
    let v = criteria::viscous_criterion(ViscousSplitSpec { budget: 1.0, amplitude: 1.0, gamma: 0.6 }).map_err(|e| e.to_string())?;
    match v {
        ViscousOutcome::Bound { value } => c.that((value - 128.0 / 3.0).abs() <= 1e-9, || format!("viscous bound {value}")),
        other => c.that(false, || format!("viscous at gamma 0.6: {other}")),
    }
    let d = criteria::viscous_criterion(ViscousSplitSpec { budget: 1.0, amplitude: 1.0, gamma: 0.5 }).map_err(|e| e.to_string())?;
    c.that(d == ViscousOutcome::InnerDivergent, || format!("viscous at gamma 0.5: {d}"));
    c.done("flip at 2/5; viscous bound 42.667, divergent at 1/2".into())
}

fn fixed_points() -> Outcome {
    let mut c = Checks::default();
    let p = meridional(&FixtureSpec::new(Family::OffAxisZero).with("gamma", 0.45));
    let f = axisym::meridional_fixed_points(&p).map_err(|e| e.to_string())?;
    match f.points.iter().find(|q| (q.r - 1.0).abs() < 1e-6 && q.z.abs() < 1e-6) {
        Some(q) => {
            c.that((q.r - 1.0).abs() <= 1e-10 && q.z.abs() <= 1e-10, || format!("fixed point at ({}, {})", q.r, q.z));
            let v = q.verdict.clone().unwrap_or_default();
            c.that(v.contains("gamma = 1/2") && v.contains("inconsistent"), || format!("verdict {v:?}"));
        }
        None => c.that(false, || format!("(1, 0) not found among {} fixed points", f.points.len())),
    }
    let trivial = Profile::trivial(0.4).unwrap();
    let set = flow::nodal_set(&trivial).map_err(|e| e.to_string())?;
    c.that(set.points.len() == 1 && set.points[0].location == Vec3::zeros(), || format!("trivial nodal set has {} points", set.points.len()));
    let quad = fixtures::quadratic_vanishing(0.4).map_err(|e| e.to_string())?;
    let o = flow::vanishing_order(&quad, &Vec3::zeros(), 1.0, flow::nodal::DEFAULT_ORDER_CAP).map_err(|e| e.to_string())?;
    c.that((o.order - 2.0).abs() <= 0.1 && !o.infinite, || format!("|y|^2 order {}", o.order));
    let flat = fixtures::flat_vanishing(0.4).map_err(|e| e.to_string())?;
    let of = flow::vanishing_order(&flat, &Vec3::zeros(), 1.0, flow::nodal::DEFAULT_ORDER_CAP).map_err(|e| e.to_string())?;
    c.that(of.infinite, || format!("flat fixture order {}", of.order));
    c.done(format!("(1, 0) found with gamma = 1/2 verdict; N_V = {{0}}; order {:.3}; flat is infinite order", o.order))
}

fn smallness() -> Outcome {
    let mut c = Checks::default();
    let p = fixtures::gaussian_blob(0.45, 1e-6).map_err(|e| e.to_string())?;
    let r = stretching::smallness_check(&p, 2.0).map_err(|e| e.to_string())?;
    c.that(r.verdict == Smallness::Violated, || format!("tiny profile {:?}", r.verdict));
    let mut drift: f64 = 0.0;
    for lambda in [0.5, 2.0] {
        let s = stretching::smallness_check(&p.rescaled(lambda), 2.0).map_err(|e| e.to_string())?;
        drift = drift.max((s.size / r.size - 1.0).abs());
        c.that(s.verdict == r.verdict, || format!("lambda {lambda}: verdict {:?}", s.verdict));
    }
    c.that(drift <= 1e-6, || format!("size drift {drift:e}"));
    let unit = Profile::new(0.45, FieldSource::zero(Rank::Vector))
        .unwrap()
        .with_omega(FieldSource::vector(Analytic::Gaussian { amp: 1.0, width: 1.0, dir: Some([0.0, 0.0, 1.0]) }))
        .unwrap();
    let u = stretching::smallness_check(&unit, 2.0).map_err(|e| e.to_string())?;
    c.that(u.verdict == Smallness::Satisfied, || "unit-amplitude blob should satisfy the bound".into());
    c.done(format!("VIOLATED, size drift {drift:.1e} under rescaling"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("constants", constants),
        ("trivial-profile suite", trivial_suite),
        ("stretching integral vs direct", stretching_agreement),
        ("inner/outer majorants", majorants),
        ("Jacobian and area identities", jacobian_and_area),
        ("manufactured swirl conservation", swirl_conservation),
        ("criteria dichotomies", criteria_dichotomies),
        ("fixed-point diagnostics", fixed_points),
        ("smallness bound", smallness),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("criterion {} {name}: PASS ({secs:.2} s) {msg}", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({secs:.2} s) {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
