//! Built-in manufactured profiles.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{param, Result};
use crate::fields::{
    Analytic, Boundary, FieldSource, Grid3, Interp, Meridional, Profile, Rank, SampledField, SpectralField, SpectralVelocity,
    Symmetry,
};
use crate::io::{GridRecord, LoadedProfile, ProfileDoc, VelocityFrom};

/// Gaussian vortex ring: azimuthal vorticity amp exp(-((r - 1)^2 + z^2)/delta).
pub fn ring_vorticity(amp: f64, delta: f64) -> Analytic {
    Analytic::RingVorticity { amp, radius: 1.0, delta, axis_soft: 0.25 }
}

pub struct RingVelocity {
    pub spectral: SpectralField,
    /// Vector potential on the same nodes, as a non-periodic sampled field.
    pub potential: SampledField,
}

/// Periodic Biot–Savart reconstruction of the ring velocity on an n^3 box of half-width `half`.
pub fn ring_velocity(amp: f64, delta: f64, n: usize, half: f64) -> Result<RingVelocity> {
    let grid = Grid3::periodic_cube(half, n)?;
    let w = FieldSource::vector(ring_vorticity(amp, delta));
    let s = w.sample(&grid);
    let (sv, psi) = SpectralVelocity::from_vorticity(&grid, [&s.data[0], &s.data[1], &s.data[2]])?;
    let pgrid = Grid3 { boundary: Boundary::DecayToZero, ..grid };
    let potential = SampledField::new(pgrid, Rank::Vector, psi.to_vec(), Interp::Cubic)?;
    Ok(RingVelocity { spectral: SpectralField::new(sv), potential })
}

/// Ring profile with U from the exact trigonometric series.
pub fn gaussian_ring_spectral(gamma: f64, amp: f64, delta: f64, n: usize, half: f64) -> Result<Profile> {
    let v = ring_velocity(amp, delta, n, half)?;
    Profile::new(gamma, FieldSource::Spectral(v.spectral))?.with_omega(FieldSource::vector(ring_vorticity(amp, delta)))
}

/// Ring profile with U = curl of an interpolated potential (divergence-free at every point).
pub fn gaussian_ring_potential(gamma: f64, amp: f64, delta: f64, n: usize, half: f64) -> Result<Profile> {
    let v = ring_velocity(amp, delta, n, half)?;
    let k = 1.0 - 1.0 / gamma;
    let u = FieldSource::CurlOfPotential(Arc::new(v.potential.with_far_exponent(k)));
    Profile::new(gamma, u)?.with_omega(FieldSource::vector(ring_vorticity(amp, delta)))
}

/// Family names accepted by [`FixtureSpec`].
pub const FAMILIES: [&str; 7] =
    ["trivial", "gaussian-column", "gaussian-ring", "burgers", "linear-strain", "manufactured-swirl", "off-axis-zero"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Trivial,
    GaussianColumn,
    GaussianRing,
    Burgers,
    LinearStrain,
    ManufacturedSwirl,
    OffAxisZero,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        Ok(match s {
            "trivial" => Family::Trivial,
            "gaussian-column" => Family::GaussianColumn,
            "gaussian-ring" => Family::GaussianRing,
            "burgers" => Family::Burgers,
            "linear-strain" => Family::LinearStrain,
            "manufactured-swirl" => Family::ManufacturedSwirl,
            "off-axis-zero" => Family::OffAxisZero,
            _ => return Err(param("family", format!("unknown family \"{s}\"; expected one of {FAMILIES:?}"))),
        })
    }

    pub fn name(self) -> &'static str {
        FAMILIES[self as usize]
    }

    /// (parameter, default, admissible range)
    pub fn parameters(self) -> &'static [(&'static str, f64, (f64, f64))] {
        const G: (&str, f64, (f64, f64)) = ("gamma", 0.4, (1e-3, 10.0));
        match self {
            Family::Trivial => &[G],
            Family::GaussianColumn => &[G, ("amp", 1.0, (-1e6, 1e6)), ("width", 1.0, (1e-2, 1e2))],
            Family::GaussianRing => &[
                ("gamma", 0.45, (1e-3, 10.0)),
                ("amp", 1.0, (-1e6, 1e6)),
                ("delta", 0.1, (0.02, 0.5)),
                ("n", 64.0, (16.0, 256.0)),
                ("half", 4.0, (2.5, 20.0)),
            ],
            Family::Burgers => &[G, ("sigma", 0.3, (0.0, 10.0)), ("swirl", 1.0, (-1e3, 1e3))],
            Family::LinearStrain => &[G, ("a", 0.1, (-10.0, 10.0))],
            Family::ManufacturedSwirl => {
                &[G, ("a", 0.1, (-10.0, 10.0)), ("kappa", 1.0, (-1e3, 1e3)), ("kappa_theta", 0.0, (-1e3, 1e3))]
            }
            Family::OffAxisZero => &[("gamma", 0.45, (1e-3, 10.0)), ("swirl", 0.2, (-1e3, 1e3)), ("rho", 0.5, (0.05, 0.9))],
        }
    }
}

/// One fixture request: a family plus parameter overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureSpec {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
}

/// What `check` is expected to say about a fixture entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Pass,
    Fail,
}

impl FixtureSpec {
    pub fn new(family: Family) -> Self {
        FixtureSpec { family, params: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.params.insert(name.to_string(), v);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let known = self.family.parameters();
        for (k, v) in &self.params {
            let Some((_, _, (lo, hi))) = known.iter().find(|(n, _, _)| n == k) else {
                return Err(param("fixture", format!("{} has no parameter `{k}`", self.family.name())));
            };
            if !(*v >= *lo && *v <= *hi) {
                return Err(param("fixture", format!("`{k}` = {v} outside [{lo}, {hi}]")));
            }
        }
        if self.family == Family::ManufacturedSwirl && (self.get("gamma") + self.get("a")).abs() < 1e-6 {
            return Err(param("fixture", "gamma + a must not vanish"));
        }
        if self.family == Family::LinearStrain && (self.get("gamma") + self.get("a")).abs() < 1e-9 {
            return Err(param("fixture", "gamma + a must not vanish"));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> f64 {
        if let Some(v) = self.params.get(name) {
            return *v;
        }
        self.family.parameters().iter().find(|(n, _, _)| *n == name).map(|p| p.1).unwrap_or(f64::NAN)
    }

    /// Resolved parameter record, defaults filled in.
    pub fn resolved(&self) -> BTreeMap<String, f64> {
        self.family.parameters().iter().map(|(n, _, _)| (n.to_string(), self.get(n))).collect()
    }

    fn meridional(&self) -> Option<Meridional> {
        let (g, a) = (self.get("gamma"), self.get("a"));
        match self.family {
            Family::LinearStrain => Some(Meridional::LinearStrain { a }),
            Family::ManufacturedSwirl => Some(Meridional::ManufacturedSwirl {
                a,
                kappa: self.get("kappa"),
                m: -(1.0 - g + a) / (g + a),
                kappa_theta: self.get("kappa_theta"),
                m_theta: -(1.0 + g) / (g + a),
            }),
            Family::OffAxisZero => Some(Meridional::OffAxisZero { gamma: g, swirl: self.get("swirl"), rho: self.get("rho") }),
            _ => None,
        }
    }

    /// Entries of the `check` battery this fixture is an oracle for.
    pub fn expected(&self) -> Vec<(&'static str, Expect)> {
        use Expect::*;
        match self.family {
            Family::Trivial => vec![
                ("res.velocity", Pass),
                ("res.vorticity", Pass),
                ("res.div", Pass),
                ("bernoulli.farfield", Pass),
                ("flow.det", Pass),
                ("flow.cauchy", Pass),
                ("flow.weber", Pass),
            ],
            Family::GaussianColumn => vec![("res.div", Pass), ("res.vorticity", Fail), ("flow.det", Pass)],
            Family::GaussianRing => vec![("res.vorticity", Fail), ("flow.det", Pass)],
            Family::Burgers => vec![
                ("res.velocity", Fail),
                ("res.vorticity", Fail),
                ("res.div", Pass),
                ("flow.det", Pass),
                ("flow.weber", Fail),
            ],
            Family::LinearStrain => vec![("axisym.res.continuity", Pass), ("axisym.res.swirl", Pass), ("axisym.area", Pass)],
            Family::ManufacturedSwirl => vec![
                ("axisym.res.swirl", Pass),
                ("axisym.res.continuity", Pass),
                ("axisym.invariant.swirl", Pass),
                ("axisym.res.radial", Fail),
                ("axisym.area", Pass),
            ],
            Family::OffAxisZero => vec![("axisym.swirl_gamma", Fail)],
        }
    }

    /// Short prose of the expected outcomes, stored in the file's `[meta]`.
    pub fn expectation_note(&self) -> &'static str {
        match self.family {
            Family::Trivial => "U = Omega = P = 0: every residual is exactly 0 and every identity holds",
            Family::GaussianColumn => "planar columnar vortex: divergence-free, but not a self-similar solution",
            Family::GaussianRing => "vortex ring with Biot-Savart velocity: oracle for the stretching integral vs the strain contraction",
            Family::Burgers => "Burgers-type strain plus swirl: divergence-free, not a solution; residuals and Weber fail",
            Family::LinearStrain => "U_r = a r, U_z = -2 a z: divergence-free; weighted area grows at exactly 3 gamma",
            Family::ManufacturedSwirl => {
                "exact swirl characteristic solution with P = 0: swirl equation and invariant pass, meridional equations unforced and fail"
            }
            Family::OffAxisZero => "off-axis fixed point (1, 0) with swirl: inconsistent unless gamma = 1/2",
        }
    }

    pub fn to_doc(&self) -> Result<ProfileDoc> {
        self.validate()?;
        let g = self.get("gamma");
        let mut doc = match self.family {
            Family::LinearStrain | Family::ManufacturedSwirl | Family::OffAxisZero => {
                let mut d = ProfileDoc::new(g, Symmetry::Axisym);
                d.meridional = self.meridional();
                d
            }
            _ => {
                let mut d = ProfileDoc::new(g, Symmetry::Cartesian);
                let (a, w) = (self.get("amp"), self.get("width"));
                let (s, sw) = (self.get("sigma"), self.get("swirl"));
                let fields: Vec<(&str, Analytic)> = match self.family {
                    Family::Trivial => vec![("U", Analytic::Zero), ("Omega", Analytic::Zero), ("P", Analytic::Zero)],
                    Family::GaussianColumn => vec![
                        ("U", Analytic::ColumnVelocity { amp: a, width: w }),
                        ("Omega", Analytic::ColumnVorticity { amp: a, width: w }),
                    ],
                    Family::Burgers => vec![
                        ("U", Analytic::BurgersVelocity { sigma: s, swirl: sw }),
                        ("Omega", Analytic::BurgersVorticity { swirl: sw }),
                        ("P", Analytic::BurgersPressure { sigma: s, swirl: sw }),
                    ],
                    Family::GaussianRing => {
                        let n = self.get("n").round() as usize;
                        let grid = Grid3::periodic_cube(self.get("half"), n)?;
                        d.grid = Some(GridRecord::from_grid3(&grid));
                        d.velocity = Some(VelocityFrom::BiotSavartPotential);
                        vec![("Omega", ring_vorticity(a, self.get("delta")))]
                    }
                    _ => unreachable!("axisymmetric families handled above"),
                };
                d.analytic = fields.into_iter().map(|(n, f)| (n.to_string(), f)).collect();
                d
            }
        };
        let mut params = toml::Table::new();
        for (k, v) in self.resolved() {
            params.insert(k, v.into());
        }
        let mut expected = toml::Table::new();
        for (k, e) in self.expected() {
            expected.insert(k.into(), if e == Expect::Pass { "PASS" } else { "FAIL" }.into());
        }
        doc.meta.insert("family".into(), self.family.name().into());
        doc.meta.insert("params".into(), params.into());
        doc.meta.insert("expected".into(), expected.into());
        doc.meta.insert("note".into(), self.expectation_note().into());
        Ok(doc)
    }

    pub fn build(&self) -> Result<LoadedProfile> {
        self.to_doc()?.build()
    }
}

/// Cartesian profile with Omega = amp exp(-|y|^2) e3 (and U = 0), used for the smallness test.
pub fn gaussian_blob(gamma: f64, amp: f64) -> Result<Profile> {
    Profile::new(gamma, FieldSource::zero(Rank::Vector))?
        .with_omega(FieldSource::vector(Analytic::Gaussian { amp, width: 1.0, dir: Some([0.0, 0.0, 1.0]) }))
}

/// Omega = |y|^2 exp(-|y|^2) e3, vanishing to order 2 at the origin.
pub fn quadratic_vanishing(gamma: f64) -> Result<Profile> {
    Profile::trivial(gamma)?.with_omega(FieldSource::vector(Analytic::QuadraticGaussian { amp: 1.0 }))
}

/// Omega = exp(-1/|y|^2) e3, flat at the origin.
pub fn flat_vanishing(gamma: f64) -> Result<Profile> {
    Profile::trivial(gamma)?.with_omega(FieldSource::vector(Analytic::Flat { amp: 1.0 }))
}
