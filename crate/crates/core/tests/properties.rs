use proptest::prelude::*;
use ssguard_core::axisym::{self, AxisymProfile};
use ssguard_core::criteria::{self, Convergence, SplitConstants, TimeSeries, ViscousOutcome, ViscousSplitSpec};
use ssguard_core::fields::{field_norm, Analytic, FieldSource, Meridional, NormKind, NormRequest, Profile, Rank};
use ssguard_core::fixtures::{Family, FixtureSpec, FAMILIES};
use ssguard_core::flow;
use ssguard_core::io::ProfileDoc;
use ssguard_core::report::{DiagnosticReport, Entry, Num, ProfileMeta};
use ssguard_core::stretching;
use ssguard_core::Vec3;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Traceless linear velocity U = M y.
fn linear(gamma: f64, m: [[f64; 3]; 3]) -> Profile {
    let mut m = m;
    let tr = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= tr;
    }
    Profile::new(gamma, FieldSource::vector(Analytic::Linear { m })).unwrap()
}

fn matrix() -> impl Strategy<Value = [[f64; 3]; 3]> {
    prop::array::uniform3(prop::array::uniform3(-0.5f64..0.5))
}

fn power_law(gamma: f64) -> Convergence {
    let t = criteria::geometric_times(8, 10);
    let q = gamma * 3.0;
    let h = TimeSeries::new(t.clone(), t.iter().map(|t| (1.0 - t).powf(-q)).collect(), 1.0).unwrap();
    let e = TimeSeries::new(t.clone(), vec![1.0; t.len()], 1.0).unwrap();
    criteria::ell_mu_criterion(&h, &e, 0.5, 1.0).unwrap().verdict
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn gamma_bound_increases_below_one(p in 1.0f64..1e6, dp in 1e-3f64..10.0) {
        let a = criteria::gamma_lower_bound(p).unwrap();
        let b = criteria::gamma_lower_bound(p + dp).unwrap();
        prop_assert!(a < b && b < 1.0);
    }

    #[test]
    fn split_search_matches_closed_form(g in 1e-3f64..1e3, e in 1e-3f64..1e3, p in 2.0f64..50.0, cin in 0.1f64..10.0, cout in 0.1f64..10.0) {
        let c = SplitConstants { c_in: cin, c_out: cout };
        let (_, b) = criteria::minimize_split(c, p, g, e);
        let exact = criteria::split_bound(c, p, g, e, criteria::split_radius(c, p, g, e));
        prop_assert!(((b - exact) / exact).abs() <= 1e-8, "{b} vs {exact}");
    }

    #[test]
    fn viscous_bound_is_monotone(budget in 0.0f64..10.0, amp in 0.01f64..5.0, gamma in 0.51f64..5.0, d in 0.01f64..1.0) {
        let v = |b: f64, a: f64, g: f64| match criteria::viscous_criterion(ViscousSplitSpec { budget: b, amplitude: a, gamma: g }).unwrap() {
            ViscousOutcome::Bound { value } => value,
            ViscousOutcome::InnerDivergent => f64::INFINITY,
        };
        let base = v(budget, amp, gamma);
        prop_assert!(v(budget + d, amp, gamma) > base);
        prop_assert!(v(budget, amp + d, gamma) > base);
        prop_assert!(v(budget, amp, gamma + d) < base);
    }

    #[test]
    fn report_roundtrip(names in prop::collection::vec("[a-z.\\[\\]0-9]{1,20}", 1..8), vals in prop::collection::vec(prop::num::f64::ANY, 8), gamma in 0.1f64..2.0) {
        let mut rep = DiagnosticReport::new(ProfileMeta { gamma: Some(gamma), ..Default::default() });
        for (i, n) in names.iter().enumerate() {
            let e = match i % 3 {
                0 => Entry::check(n.clone(), "claim", vals[i], 1e-8),
                1 => Entry::info(n.clone(), "value", vals[i]),
                _ => Entry::inconclusive(n.clone(), "claim", vals[i], "why"),
            };
            rep.push(e.with_note(format!("note {i}")));
        }
        rep.profile.norms.insert("omega.sup".into(), Num(vals[0]));
        let back = DiagnosticReport::from_jsonl(&rep.to_jsonl()).unwrap();
        // NaN != NaN, so compare the serialized forms
        prop_assert_eq!(back.to_jsonl(), rep.to_jsonl());
        prop_assert_eq!(back.entries.len(), rep.entries.len());
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn ell_mu_flips_at_two_fifths(below in 0.05f64..0.39, above in 0.4f64..0.9) {
        prop_assert_eq!(power_law(below), Convergence::Finite);
        prop_assert_eq!(power_law(above), Convergence::Divergent);
    }

    #[test]
    fn det_identity_for_divergence_free_fields(gamma in 0.2f64..1.0, m in matrix(), a in prop::array::uniform3(-2.0f64..2.0), tau in 0.1f64..2.0) {
        let p = linear(gamma, m);
        let tr = flow::integrate_flow(&p, &[Vec3::from(a)], &[0.0, tau], 1e-10).unwrap();
        prop_assert!(flow::det_deviation(gamma, &tr) <= 1e-9);
    }

    #[test]
    fn backward_then_forward_returns(gamma in 0.2f64..1.0, m in matrix(), a in prop::array::uniform3(-2.0f64..2.0), tau in 0.1f64..1.5) {
        let p = linear(gamma, m);
        let a = Vec3::from(a);
        let back = flow::integrate_flow(&p, &[a], &[0.0, -tau], 1e-11).unwrap()[0].final_position();
        let fwd = flow::integrate_flow(&p, &[back], &[0.0, tau], 1e-11).unwrap()[0].final_position();
        prop_assert!((fwd - a).norm() <= 1e-9 * (1.0 + a.norm()), "{} vs {}", fwd, a);
    }

    #[test]
    fn trivial_certificate_is_gamma(gamma in 0.05f64..3.0, eps in 0.05f64..2.0) {
        let p = Profile::trivial(gamma).unwrap();
        let set = flow::nodal_set(&p).unwrap();
        prop_assert_eq!(set.points.len(), 1);
        let c = flow::outgoing_certificate(&p, &set.points[0], eps, &[]).unwrap();
        prop_assert!((c.c_star - gamma).abs() <= 1e-10);
    }

    #[test]
    fn axis_seeds_stay_on_axis(gamma in 0.2f64..1.0, a in -0.15f64..0.5, z in -1.0f64..1.0) {
        let p = AxisymProfile::from_meridional(gamma, Meridional::LinearStrain { a }).unwrap();
        let tr = axisym::meridional_flow(&p, &[(0.0, z)], &flow::tau_samples(1.0, 4), 1e-10).unwrap();
        prop_assert!(tr[0].r.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn weighted_area_grows_at_three_gamma(gamma in 0.2f64..0.8, a in -0.15f64..0.4, r0 in 0.1f64..1.0, z0 in -1.0f64..1.0, w in 0.05f64..0.5) {
        let p = AxisymProfile::from_meridional(gamma, Meridional::LinearStrain { a }).unwrap();
        let poly = [(r0, z0), (r0 + w, z0), (r0 + w, z0 + w), (r0, z0 + w)];
        let g = axisym::area_growth(&p, &poly, &flow::tau_samples(1.0, 4), 1e-10).unwrap();
        prop_assert!(g.deviation <= 1e-6, "{}", g.deviation);
    }

    #[test]
    fn origin_is_a_meridional_fixed_point(gamma in 0.2f64..0.8, a in -0.15f64..0.4) {
        let p = AxisymProfile::from_meridional(gamma, Meridional::LinearStrain { a }).unwrap();
        let f = axisym::meridional_fixed_points(&p).unwrap();
        prop_assert!(f.points.iter().any(|q| q.r == 0.0 && q.z.abs() < 1e-12));
    }

    #[test]
    fn fixtures_roundtrip_through_ssp(k in 0usize..FAMILIES.len(), g in 0.3f64..0.7) {
        let mut spec = FixtureSpec::new(Family::parse(FAMILIES[k]).unwrap()).with("gamma", g);
        if spec.family == Family::GaussianRing {
            spec = spec.with("n", 16.0).with("half", 3.0);
        }
        let doc = spec.to_doc().unwrap();
        let bytes = doc.to_bytes().unwrap();
        let back = ProfileDoc::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
    }
}

proptest! {
    #![proptest_config(cfg(6))]

    #[test]
    fn lp_norm_scales_with_rescaling(amp in 0.1f64..3.0, p in 2.0f64..6.0) {
        let w = FieldSource::vector(Analytic::Gaussian { amp, width: 1.0, dir: Some([0.0, 0.0, 1.0]) });
        let base = field_norm(&w, &NormRequest::new(NormKind::Lp(p))).unwrap().value;
        for lambda in [0.5, 2.0] {
            let s = field_norm(&w.rescaled(lambda, 0.0), &NormRequest::new(NormKind::Lp(p))).unwrap().value;
            let want = lambda.powf(3.0 / p) * base;
            prop_assert!((s / want - 1.0).abs() <= 1e-6, "lambda {}: {} vs {}", lambda, s, want);
        }
    }

    #[test]
    fn smallness_size_is_scale_invariant(amp in 1e-6f64..10.0, lambda in 0.4f64..2.5) {
        let p = Profile::new(0.45, FieldSource::zero(Rank::Vector))
            .unwrap()
            .with_omega(FieldSource::vector(Analytic::Gaussian { amp, width: 1.0, dir: Some([0.0, 0.0, 1.0]) }))
            .unwrap();
        let a = stretching::smallness_check(&p, 2.0).unwrap();
        let b = stretching::smallness_check(&p.rescaled(lambda), 2.0).unwrap();
        prop_assert!((b.size / a.size - 1.0).abs() <= 1e-6, "{} vs {}", a.size, b.size);
        prop_assert_eq!(a.verdict, b.verdict);
    }
}
