//! Residuals of the stationary self-similar Euler system, pressure recovery,
//! the L^p transport identity and the Bernoulli function.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fields::ops::stencil_derivative;
use crate::fields::spectral::solve_poisson_periodic;
use crate::fields::{
    far_exponents, Boundary, DiffMethod, FieldSource, Grid3, Interp, Nodal, Profile, Rank, SampledField,
};
use crate::numerics::{fibonacci_sphere, gauss_legendre, Mat3, Vec3};
use crate::report::Entry;

/// Nodes this many cells from a face (or closer) are excluded from residual norms.
pub const INTERIOR_CELLS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    VelocityForm,
    VorticityForm,
    LpIdentity(f64),
    Divergence,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Which::VelocityForm => f.write_str("velocity-form"),
            Which::VorticityForm => f.write_str("vorticity-form"),
            Which::LpIdentity(p) => write!(f, "lp-identity({p})"),
            Which::Divergence => f.write_str("divergence"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PressureUsed {
    Supplied,
    Recovered,
    /// The equation does not involve P.
    None,
}

#[derive(Clone, Debug)]
pub struct ResidualField {
    pub which: Which,
    pub field: FieldSource,
    pub sup: f64,
    pub l2: f64,
    pub pressure: PressureUsed,
    /// Nodes skipped because |Omega| was too small for the identity (p < 2 only).
    pub masked: usize,
}

/// Everything needed at the nodes of the evaluation grid.
struct NodalProfile {
    grid: Grid3,
    gamma: f64,
    u: Nodal,
    omega: Option<Nodal>,
    grad_p: Option<Vec<Vec3>>,
}

impl NodalProfile {
    fn new(profile: &Profile, need_omega: bool, pressure: Option<&FieldSource>) -> Result<Self> {
        let grid = profile.eval_grid();
        let u = Nodal::of(&profile.u, &grid, DiffMethod::Centered4)?;
        let omega = if need_omega {
            let w = profile.omega_field()?;
            Some(Nodal::of(&w, &grid, DiffMethod::Centered4)?)
        } else {
            None
        };
        let grad_p = match pressure {
            Some(p) => {
                let n = Nodal::of(p, &grid, DiffMethod::Centered4)?;
                Some(n.jac.iter().map(|j| Vec3::new(j[(0, 0)], j[(0, 1)], j[(0, 2)])).collect())
            }
            None => None,
        };
        Ok(NodalProfile { grid, gamma: profile.gamma, u, omega, grad_p })
    }

    fn v(&self, n: usize) -> Vec3 {
        self.grid.point_at(n) * self.gamma + self.u.val[n]
    }

    fn interior(&self, n: usize) -> bool {
        self.grid.cells_from_boundary(self.grid.unindex(n)) >= INTERIOR_CELLS
    }
}

fn finish(np: &NodalProfile, which: Which, rank: Rank, vals: Vec<Vec3>, pressure: PressureUsed, masked: usize) -> Result<ResidualField> {
    let g = &np.grid;
    let mut sup: f64 = 0.0;
    let mut l2 = 0.0;
    for (n, v) in vals.iter().enumerate() {
        if np.interior(n) {
            let m = v.norm();
            sup = sup.max(m);
            l2 += m * m;
        }
    }
    let l2 = (l2 * g.cell_volume()).sqrt();
    let data: Vec<Vec<f64>> = (0..rank.ncomp()).map(|c| vals.iter().map(|v| v[c]).collect()).collect();
    let field = FieldSource::sampled(SampledField::new(g.clone(), rank, data, Interp::Cubic)?);
    Ok(ResidualField { which, field, sup, l2, pressure, masked })
}

fn pressure_for(profile: &Profile) -> Result<(FieldSource, PressureUsed)> {
    match &profile.p {
        Some(p) => Ok((p.clone(), PressureUsed::Supplied)),
        None => Ok((recover_pressure(profile)?, PressureUsed::Recovered)),
    }
}

/// Residual of the self-similar system on the profile's evaluation grid.
pub fn selfsim_residual(profile: &Profile, which: Which) -> Result<ResidualField> {
    match which {
        Which::VelocityForm => {
            let (p, used) = pressure_for(profile)?;
            let np = NodalProfile::new(profile, false, Some(&p))?;
            let gp = np.grad_p.as_ref().expect("pressure requested");
            let vals = crate::par::map_range(np.grid.len(), |n| {
                (1.0 - np.gamma) * np.u.val[n] + np.u.jac[n] * np.v(n) + gp[n]
            });
            finish(&np, which, Rank::Vector, vals, used, 0)
        }
        Which::VorticityForm => {
            let np = NodalProfile::new(profile, true, None)?;
            let w = np.omega.as_ref().expect("omega requested");
            let vals = crate::par::map_range(np.grid.len(), |n| {
                w.val[n] + w.jac[n] * np.v(n) - np.u.jac[n] * w.val[n]
            });
            finish(&np, which, Rank::Vector, vals, PressureUsed::None, 0)
        }
        Which::LpIdentity(p) => {
            if !(p >= 1.0) {
                return Err(crate::error::param("p", format!("must be >= 1, got {p}")));
            }
            let np = NodalProfile::new(profile, true, None)?;
            let w = np.omega.as_ref().expect("omega requested");
            let g = &np.grid;
            // |Omega|^p at the nodes, differentiated by the same stencils as sampled data
            let wp: Vec<f64> = w.val.iter().map(|v| v.norm().powf(p)).collect();
            let grads: Vec<Vec<f64>> = (0..3).map(|a| stencil_derivative(g, &wp, a)).collect();
            let thresh = crate::stretching::DIRECTION_THRESHOLD;
            let mut masked = 0;
            let vals: Vec<Vec3> = (0..g.len())
                .map(|n| {
                    let om = w.val[n];
                    let m = om.norm();
                    if p < 2.0 && m < thresh {
                        if np.interior(n) {
                            masked += 1;
                        }
                        return Vec3::zeros();
                    }
                    let s = 0.5 * (np.u.jac[n] + np.u.jac[n].transpose());
                    // A |Omega|^p written as |Omega|^{p-2} Omega.S Omega, defined even where Omega = 0
                    let stretch = if m > 0.0 { m.powf(p - 2.0) * om.dot(&(s * om)) } else { 0.0 };
                    let grad = Vec3::new(grads[0][n], grads[1][n], grads[2][n]);
                    Vec3::new(wp[n] + np.v(n).dot(&grad) / p - stretch, 0.0, 0.0)
                })
                .collect();
            finish(&np, which, Rank::Scalar, vals, PressureUsed::None, masked)
        }
        Which::Divergence => {
            let np = NodalProfile::new(profile, false, None)?;
            let vals = np.u.jac.iter().map(|j| Vec3::new(j.trace(), 0.0, 0.0)).collect();
            finish(&np, which, Rank::Scalar, vals, PressureUsed::None, 0)
        }
    }
}

/// Contraction |Omega|^{p-2} Omega . (vorticity-form residual) at the nodes;
/// algebraically equal to the L^p identity residual.
pub fn contracted_vorticity_residual(profile: &Profile, p: f64) -> Result<Vec<f64>> {
    let np = NodalProfile::new(profile, true, None)?;
    let w = np.omega.as_ref().expect("omega requested");
    Ok((0..np.grid.len())
        .map(|n| {
            let om = w.val[n];
            let r = om + w.jac[n] * np.v(n) - np.u.jac[n] * om;
            let m = om.norm();
            if m > 0.0 { m.powf(p - 2.0) * om.dot(&r) } else { 0.0 }
        })
        .collect())
}

/// Ratio of boundary to interior velocity magnitude beyond which U is
/// treated as non-decaying.
const DECAY_RATIO: f64 = 0.5;

/// Pressure with zero harmonic part: lap P = -tr(grad U grad U) solved by FFT.
/// Non-periodic data is embedded in a periodic box of twice the size; the
/// gauge is fixed by the mean over the outermost shell of that box.
pub fn recover_pressure(profile: &Profile) -> Result<FieldSource> {
    if profile.u.is_zero() {
        return Ok(FieldSource::zero(Rank::Scalar));
    }
    let g = profile.eval_grid();
    let periodic_u = matches!(&profile.u, FieldSource::Spectral(_))
        || profile.u.grid().is_some_and(|ug| ug.boundary == Boundary::Periodic);
    if periodic_u {
        let pg = match &profile.u {
            FieldSource::Spectral(s) => s.base.grid.clone(),
            f => f.grid().expect("gridded").clone(),
        };
        let u = Nodal::of(&profile.u, &pg, DiffMethod::Centered4)?;
        let rhs: Vec<f64> = u.jac.iter().map(|j| -(j * j).trace()).collect();
        let p = solve_poisson_periodic(&pg, &rhs)?;
        return Ok(FieldSource::sampled(SampledField::new(pg, Rank::Scalar, vec![p], Interp::Cubic)?));
    }
    let padded = padded_grid(&g)?;
    let u = Nodal::of(&profile.u, &padded, DiffMethod::Centered4)?;
    let (mut bmax, mut imax): (f64, f64) = (0.0, 0.0);
    for n in 0..padded.len() {
        let m = u.val[n].norm();
        imax = imax.max(m);
        if shell_index(&padded, n) == 0 {
            bmax = bmax.max(m);
        }
    }
    if imax > 0.0 && bmax / imax > DECAY_RATIO {
        return Err(Error::NonDecaying(format!(
            "|U| on the padded boundary is {:.3} of its interior maximum",
            bmax / imax
        )));
    }
    let rhs: Vec<f64> = u.jac.iter().map(|j| -(j * j).trace()).collect();
    solve_padded(&g, &padded, &rhs, far_exponents(profile.gamma).2)
}

/// Solve lap P = rhs (rhs given on `padded`) and restrict P to `g`.
fn solve_padded(g: &Grid3, padded: &Grid3, rhs: &[f64], far: f64) -> Result<FieldSource> {
    let pp = solve_poisson_periodic(padded, rhs)?;
    let (mut s, mut c) = (0.0, 0usize);
    for n in 0..padded.len() {
        if shell_index(padded, n) == 0 {
            s += pp[n];
            c += 1;
        }
    }
    let gauge = s / c as f64;
    let off = [(padded.dims[0] - g.dims[0]) / 2, (padded.dims[1] - g.dims[1]) / 2, (padded.dims[2] - g.dims[2]) / 2];
    let data: Vec<f64> = (0..g.len())
        .map(|n| {
            let [i, j, k] = g.unindex(n);
            pp[padded.index(i + off[0], j + off[1], k + off[2])] - gauge
        })
        .collect();
    let out = SampledField::new(g.clone(), Rank::Scalar, vec![data], Interp::Cubic)?.with_far_exponent(far);
    Ok(FieldSource::Sampled(Arc::new(out)))
}

/// Periodic box with the same spacing, twice the node count, centred on `g`.
fn padded_grid(g: &Grid3) -> Result<Grid3> {
    let mut dims = [0; 3];
    let mut origin = [0.0; 3];
    for a in 0..3 {
        let n = g.dims[a];
        let extra = n + (n % 2);
        dims[a] = n + extra;
        origin[a] = g.origin[a] - (extra / 2) as f64 * g.spacing[a];
    }
    Grid3::new(dims, g.spacing, origin, Boundary::Periodic)
}

/// Distance in cells from the outer faces of a box, ignoring periodicity.
fn shell_index(g: &Grid3, n: usize) -> usize {
    let idx = g.unindex(n);
    (0..3).map(|a| idx[a].min(g.dims[a] - 1 - idx[a])).min().unwrap()
}

/// Poisson solve for a prescribed right-hand side (used by manufactured tests
/// and by callers holding their own forcing).
pub fn solve_poisson_free(g: &Grid3, rhs: impl Fn(Vec3) -> f64 + Sync) -> Result<FieldSource> {
    let padded = padded_grid(g)?;
    let r = crate::par::map_range(padded.len(), |n| rhs(padded.point_at(n)));
    solve_padded(g, &padded, &r, 0.0)
}

/// Independent pressure evaluation by the free-space Green's function:
/// P(x) = (1/4 pi) int tr(grad U grad U)(z) / |x - z| dz, integrated in
/// spherical coordinates about x (the 1/|x-z| singularity cancels against
/// the Jacobian s^2).
pub fn pressure_green(profile: &Profile, x: &Vec3, radius: f64, shells: usize) -> f64 {
    let (rn, rw) = gauss_legendre(12);
    let dirs = fibonacci_sphere(1202);
    let dw = 4.0 * std::f64::consts::PI / dirs.len() as f64;
    let h = radius / shells as f64;
    let total: f64 = crate::par::sum_range(shells * rn.len(), |q| {
        let (panel, node) = (q / rn.len(), q % rn.len());
        let s = h * (panel as f64 + 0.5 * (rn[node] + 1.0));
        let w = 0.5 * h * rw[node];
        let mut acc = 0.0;
        for d in &dirs {
            let j = profile.u.value_jac(&(x + d * s)).1;
            acc += (j * j).trace();
        }
        acc * dw * s * w
    });
    total / (4.0 * std::f64::consts::PI)
}

#[derive(Clone, Debug)]
pub struct FarField {
    pub expected: f64,
    /// (shell radius, fitted coefficient of |y|^2), innermost first.
    pub shells: Vec<(f64, f64)>,
}

impl FarField {
    pub fn coefficient(&self) -> f64 {
        self.shells.last().map(|s| s.1).unwrap_or(f64::NAN)
    }

    pub fn deviation(&self) -> f64 {
        let d = (self.coefficient() - self.expected).abs();
        if self.expected != 0.0 { d / self.expected.abs() } else { d }
    }
}

#[derive(Clone, Debug)]
pub struct BernoulliData {
    pub h: FieldSource,
    /// V . grad H - (2 gamma - 1)|V|^2
    pub transport: ResidualField,
    pub farfield: FarField,
    pub pressure: PressureUsed,
}

/// H = |V|^2/2 + P + gamma(gamma - 1)|y|^2/2 evaluated pointwise.
pub fn bernoulli_value(gamma: f64, u: &FieldSource, p: &FieldSource, y: &Vec3) -> f64 {
    let v = y * gamma + u.value(y);
    0.5 * v.norm_squared() + p.scalar_at(y) + 0.5 * gamma * (gamma - 1.0) * y.norm_squared()
}

pub fn bernoulli(profile: &Profile) -> Result<BernoulliData> {
    let (p, used) = pressure_for(profile)?;
    let np = NodalProfile::new(profile, false, Some(&p))?;
    let g = &np.grid;
    let gamma = np.gamma;
    let gp = np.grad_p.as_ref().expect("pressure requested");
    let pn = Nodal::of(&p, g, DiffMethod::Centered4)?;
    let mut hv = vec![0.0; g.len()];
    let vals: Vec<Vec3> = (0..g.len())
        .map(|n| {
            let y = g.point_at(n);
            let v = np.v(n);
            hv[n] = 0.5 * v.norm_squared() + pn.val[n][0] + 0.5 * gamma * (gamma - 1.0) * y.norm_squared();
            let jv = Mat3::identity() * gamma + np.u.jac[n];
            let grad_h = jv.transpose() * v + gp[n] + y * (gamma * (gamma - 1.0));
            Vec3::new(v.dot(&grad_h) - (2.0 * gamma - 1.0) * v.norm_squared(), 0.0, 0.0)
        })
        .collect();
    let transport = finish(&np, Which::VelocityForm, Rank::Scalar, vals, used, 0)?;
    let h = FieldSource::sampled(SampledField::new(g.clone(), Rank::Scalar, vec![hv], Interp::Cubic)?);
    let farfield = farfield_fit(profile, &p, g);
    Ok(BernoulliData { h, transport, farfield, pressure: used })
}

/// Least-squares coefficient c of H ~ c|y|^2 on shells of radius R, 2R, 4R, 8R
/// (R the inscribed radius of the grid).
fn farfield_fit(profile: &Profile, p: &FieldSource, g: &Grid3) -> FarField {
    let gamma = profile.gamma;
    let r0 = g.inscribed_radius().max(1.0);
    let dirs = fibonacci_sphere(256);
    let shells = (0..4)
        .map(|k| {
            let r = r0 * 2f64.powi(k);
            let (mut num, mut den) = (0.0, 0.0);
            for d in &dirs {
                let y = d * r;
                let h = bernoulli_value(gamma, &profile.u, p, &y);
                num += h * r * r;
                den += r.powi(4);
            }
            (r, num / den)
        })
        .collect();
    FarField { expected: gamma * (2.0 * gamma - 1.0) / 2.0, shells }
}

/// Report entries for the residual battery.
pub fn residual_entries(profile: &Profile, tol: &Tolerances, lp: &[f64]) -> Vec<Entry> {
    let mut out = Vec::new();
    let run = |which: Which, name: String, reference: &str, tol: f64| -> Entry {
        let t = std::time::Instant::now();
        match selfsim_residual(profile, which) {
            Ok(r) => {
                let mut e = Entry::check(name, reference, r.sup, tol);
                e = e.with_note(format!("interior L2 {:.3e}", r.l2));
                if r.pressure == PressureUsed::Recovered {
                    e = e.with_note("pressure recovered");
                }
                if r.masked > 0 {
                    e = e.with_note(format!("{} nodes with |Omega| below threshold skipped", r.masked));
                }
                if e.verdict == crate::report::Verdict::Fail && which != Which::Divergence {
                    e = e.with_note("not a self-similar solution");
                }
                e.timed(t)
            }
            Err(err) => Entry::inconclusive(name, reference, f64::NAN, err.to_string()).timed(t),
        }
    };
    out.push(run(
        Which::VelocityForm,
        "res.velocity".into(),
        "(1-g)U + g(y.grad)U + (U.grad)U + grad P = 0",
        tol.residual,
    ));
    if profile.omega.is_some() || !profile.u.is_zero() {
        out.push(run(Which::VorticityForm, "res.vorticity".into(), "Omega + g(y.grad)Omega + (U.grad)Omega = (Omega.grad)U", tol.residual));
    }
    for &p in lp {
        out.push(run(
            Which::LpIdentity(p),
            format!("res.lp.{p}"),
            "|Omega|^p + (1/p) V.grad |Omega|^p = A |Omega|^p",
            tol.residual,
        ));
    }
    out.push(run(Which::Divergence, "res.div".into(), "div U = 0", tol.divergence));
    let t = std::time::Instant::now();
    match bernoulli(profile) {
        Ok(b) => {
            out.push(
                Entry::check("bernoulli.transport", "V.grad H = (2g-1)|V|^2", b.transport.sup, tol.residual)
                    .informational()
                    .with_note("identity holds for exact solutions")
                    .timed(t),
            );
            let trend: Vec<String> = b.farfield.shells.iter().map(|(r, c)| format!("{r:.3}:{c:.6e}")).collect();
            out.push(
                Entry::check(
                    "bernoulli.farfield",
                    "H = g(2g-1)|y|^2/2 + o(|y|^2)",
                    b.farfield.deviation(),
                    tol.bernoulli_farfield,
                )
                .with_note(format!("coefficient {:.10e}, expected {:.10e}; shells {}", b.farfield.coefficient(), b.farfield.expected, trend.join(" ")))
                .timed(t),
            );
        }
        Err(err) => {
            out.push(Entry::inconclusive("bernoulli.transport", "V.grad H = (2g-1)|V|^2", f64::NAN, err.to_string()));
        }
    }
    if let Ok(d) = profile.invariant_diagnostics() {
        out.push(Entry::check("profile.origin", "U(0) = 0", d.u_at_origin, tol.origin_velocity));
        if let Some(c) = d.omega_consistency {
            out.push(Entry::check("profile.consistency", "Omega = curl U", c, tol.consistency));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Analytic;

    #[test]
    fn trivial_profile_has_zero_residuals() {
        for gamma in [0.3, 0.4, 0.5, 0.6] {
            let p = Profile::trivial(gamma).unwrap();
            for w in [Which::VelocityForm, Which::VorticityForm, Which::LpIdentity(2.0), Which::LpIdentity(4.0), Which::Divergence] {
                let r = selfsim_residual(&p, w).unwrap();
                assert_eq!(r.sup, 0.0, "{w}");
                assert_eq!(r.l2, 0.0);
            }
        }
    }

    #[test]
    fn trivial_bernoulli_is_exact() {
        let p = Profile::trivial(0.4).unwrap();
        let b = bernoulli(&p).unwrap();
        assert!(b.transport.sup < 1e-13);
        assert!((b.farfield.coefficient() + 0.04).abs() < 1e-15);
        let y = Vec3::new(1.0, 2.0, -0.5);
        assert!((b.h.scalar_at(&y) + 0.04 * y.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn burgers_is_flagged() {
        let p = Profile::new(0.4, FieldSource::vector(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 }))
            .unwrap()
            .with_pressure(FieldSource::scalar(Analytic::BurgersPressure { sigma: 0.3, swirl: 1.0 }))
            .unwrap();
        let r = selfsim_residual(&p, Which::VelocityForm).unwrap();
        assert!(r.sup > 1e-2);
        let e = residual_entries(&p, &Tolerances::default(), &[]);
        let v = e.iter().find(|e| e.name == "res.velocity").unwrap();
        assert!(v.note.as_deref().unwrap().contains("not a self-similar solution"));
    }

    #[test]
    fn lp_identity_is_the_contracted_vorticity_residual() {
        let p = Profile::new(0.4, FieldSource::vector(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 }))
            .unwrap()
            .with_omega(FieldSource::vector(Analytic::BurgersVorticity { swirl: 1.0 }))
            .unwrap();
        for q in [2.0, 4.0] {
            let r = selfsim_residual(&p, Which::LpIdentity(q)).unwrap();
            let c = contracted_vorticity_residual(&p, q).unwrap();
            let s = r.field.as_sampled().unwrap();
            let g = &s.grid;
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for n in 0..g.len() {
                if g.cells_from_boundary(g.unindex(n)) >= INTERIOR_CELLS && g.point_at(n).norm() < 2.5 {
                    worst = worst.max((s.data[0][n] - c[n]).abs());
                    scale = scale.max(c[n].abs());
                }
            }
            assert!(worst < 1e-3 * scale, "p={q}: {worst} vs {scale}");
        }
    }

    #[test]
    fn bernoulli_transport_is_bounded_by_velocity_residual() {
        let p = Profile::new(0.4, FieldSource::vector(Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 }))
            .unwrap()
            .with_pressure(FieldSource::scalar(Analytic::BurgersPressure { sigma: 0.3, swirl: 1.0 }))
            .unwrap();
        let b = bernoulli(&p).unwrap();
        let r = selfsim_residual(&p, Which::VelocityForm).unwrap();
        let (bs, rs) = (b.transport.field.as_sampled().unwrap(), r.field.as_sampled().unwrap());
        let g = &bs.grid;
        for n in (0..g.len()).step_by(97) {
            let v = g.point_at(n) * 0.4 + p.u.value(&g.point_at(n));
            assert!(bs.data[0][n].abs() <= v.norm() * rs.node(n).norm() * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn manufactured_poisson_recovers_gaussian() {
        let g = Grid3::cube(5.0, 65).unwrap();
        // lap e^{-r^2} = (4 r^2 - 6) e^{-r^2}
        let f = solve_poisson_free(&g, |y| {
            let r2 = y.norm_squared();
            (4.0 * r2 - 6.0) * (-r2).exp()
        })
        .unwrap();
        let mut worst: f64 = 0.0;
        for y in [Vec3::zeros(), Vec3::new(0.5, -0.3, 0.2), Vec3::new(1.25, 0.0, 0.0)] {
            let exact = (-y.norm_squared()).exp();
            worst = worst.max((f.scalar_at(&y) - exact).abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn rigid_bump_pressure_matches_green_quadrature() {
        let prof = Profile::new(0.4, FieldSource::vector(Analytic::RigidBump { rate: 2.0, width: 1.0 })).unwrap();
        let p = recover_pressure(&prof).unwrap();
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(0.5, 0.0, 0.0);
        let fft = p.scalar_at(&b) - p.scalar_at(&a);
        let green = pressure_green(&prof, &b, 6.0, 24) - pressure_green(&prof, &a, 6.0, 24);
        assert!((fft - green).abs() < 1e-3 * green.abs(), "{fft} vs {green}");
        // centripetal: pressure rises away from the axis in the core
        assert!(fft > 0.0);
    }

    #[test]
    fn linear_field_is_non_decaying() {
        let prof = Profile::new(0.4, FieldSource::vector(Analytic::Linear { m: [[0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, -0.2]] })).unwrap();
        assert!(matches!(recover_pressure(&prof), Err(Error::NonDecaying(_))));
    }
}
