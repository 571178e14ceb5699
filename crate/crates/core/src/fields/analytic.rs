//! Closed-form field families. Every family is written once, generically over
//! [`Real`], so gradients come from forward-mode duals rather than stencils.

use serde::{Deserialize, Serialize};

use crate::numerics::bump;
use crate::real::{Dual, Real};

/// Scalar/vector field on R^3 in closed form. Scalars live in component 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Analytic {
    Zero,
    /// F(y) = M y
    Linear { m: [[f64; 3]; 3] },
    /// (-s y1/2, -s y2/2, s y3) + swirl * exp(-r^2) (-y2, y1, 0)
    BurgersVelocity { sigma: f64, swirl: f64 },
    BurgersVorticity { swirl: f64 },
    BurgersPressure { sigma: f64, swirl: f64 },
    /// Columnar vortex with vorticity amp * exp(-r^2/w^2) e3.
    ColumnVelocity { amp: f64, width: f64 },
    ColumnVorticity { amp: f64, width: f64 },
    /// Azimuthal vorticity amp * exp(-((r-R)^2 + z^2)/delta), softened on the axis.
    RingVorticity { amp: f64, radius: f64, delta: f64, axis_soft: f64 },
    /// amp * exp(-|y|^2/w^2), scalar or along `dir`.
    Gaussian { amp: f64, width: f64, dir: Option<[f64; 3]> },
    /// amp * |y|^2 exp(-|y|^2) e3
    QuadraticGaussian { amp: f64 },
    /// amp * exp(-1/|y|^2) e3, flat at the origin.
    Flat { amp: f64 },
    /// amp * <y>^{-k} e3
    Bracket { amp: f64, exponent: f64 },
    /// amp * bump(|y-c|^2/rho^2), compactly supported.
    Bump { amp: [f64; 3], center: [f64; 3], radius: f64 },
    /// amp * y * exp(-|y|^2/w^2)
    RadialGaussian { amp: f64, width: f64 },
    /// (rate/2) (-y2, y1, 0) exp(-|y|^2/w^2): solid rotation localized to a bump.
    RigidBump { rate: f64, width: f64 },
    /// Axisymmetric family lifted to Cartesian components.
    Lifted { field: Meridional, quantity: Quantity },
    /// lambda^power F(y/lambda)
    Rescaled { inner: Box<Analytic>, lambda: f64, power: f64 },
    Sum { terms: Vec<Analytic> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Velocity,
    Vorticity,
    Pressure,
}

/// Axisymmetric families on the meridional half-plane, returning
/// (r, theta, z) components (pressure in slot 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Meridional {
    Zero,
    /// U_r = a r, U_z = -2 a z
    LinearStrain { a: f64 },
    /// Linear strain plus swirl kappa r^m; optional transported azimuthal
    /// vorticity kappa_theta r^(m_theta + 1).
    ManufacturedSwirl { a: f64, kappa: f64, m: f64, kappa_theta: f64, m_theta: f64 },
    /// U_r = -gamma phi, U_theta = swirl phi, U_z = 0 with phi a bump of radius
    /// rho centred at (1, 0); V vanishes at (0,0) and at (1,0).
    OffAxisZero { gamma: f64, swirl: f64, rho: f64 },
}

/// Pointwise magnitude majorant used to bound far-field integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    Zero,
    /// |F(x)| <= amp exp(-((|x| - center)_+ / width)^2)
    Gaussian { amp: f64, center: f64, width: f64 },
    /// |F(x)| <= c |x|^{-k} for |x| >= 1
    PowerLaw { c: f64, k: f64 },
    /// Field vanishes outside the ball of this radius.
    Compact { radius: f64 },
    /// Straight vortex column along e3 with the given line density of |F|.
    Column { line_density: f64 },
    Unknown,
}

fn series_one_minus_exp_over<T: Real>(s: T) -> T {
    // (1 - e^{-s})/s, stable near s = 0
    if s.val().abs() < 1e-4 {
        let one = T::cst(1.0);
        one - s.scale(0.5) + s * s.scale(1.0 / 6.0) - s * s * s.scale(1.0 / 24.0)
    } else {
        (T::cst(1.0) - (-s).exp()) / s
    }
}

impl Analytic {
    pub fn eval<T: Real>(&self, y: [T; 3]) -> [T; 3] {
        let z0 = T::cst(0.0);
        let r2 = |y: &[T; 3]| y[0] * y[0] + y[1] * y[1];
        let n2 = |y: &[T; 3]| y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        match self {
            Analytic::Zero => [z0; 3],
            Analytic::Linear { m } => {
                let mut out = [z0; 3];
                for (i, o) in out.iter_mut().enumerate() {
                    *o = y[0].scale(m[i][0]) + y[1].scale(m[i][1]) + y[2].scale(m[i][2]);
                }
                out
            }
            Analytic::BurgersVelocity { sigma, swirl } => {
                let g = (-r2(&y)).exp().scale(*swirl);
                [
                    y[0].scale(-sigma / 2.0) - g * y[1],
                    y[1].scale(-sigma / 2.0) + g * y[0],
                    y[2].scale(*sigma),
                ]
            }
            Analytic::BurgersVorticity { swirl } => {
                let s = r2(&y);
                [z0, z0, (-s).exp() * (T::cst(1.0) - s).scale(2.0 * swirl)]
            }
            Analytic::BurgersPressure { sigma, swirl } => {
                let s = r2(&y);
                let p = -(s.scale(sigma * sigma / 8.0) + y[2] * y[2].scale(sigma * sigma / 2.0))
                    - (-s.scale(2.0)).exp().scale(swirl * swirl / 4.0);
                [p, z0, z0]
            }
            Analytic::ColumnVelocity { amp, width } => {
                let s = r2(&y).scale(1.0 / (width * width));
                let f = series_one_minus_exp_over(s).scale(amp / 2.0);
                [-f * y[1], f * y[0], z0]
            }
            Analytic::ColumnVorticity { amp, width } => {
                let s = r2(&y).scale(1.0 / (width * width));
                [z0, z0, (-s).exp().scale(*amp)]
            }
            Analytic::RingVorticity { amp, radius, delta, axis_soft } => {
                let rr = r2(&y);
                let r = rr.sqrt();
                let d2 = (r - T::cst(*radius)).sq() + y[2] * y[2];
                let core = (-d2.scale(1.0 / delta)).exp().scale(*amp);
                // omega_theta * e_theta = omega_theta / r * (-y2, y1, 0), softened by (1 - e^{-r^2/eps^2})
                let q = rr.scale(1.0 / (axis_soft * axis_soft));
                let f = core * series_one_minus_exp_over(q).scale(1.0 / (axis_soft * axis_soft));
                [-f * y[1], f * y[0], z0]
            }
            Analytic::Gaussian { amp, width, dir } => {
                let g = (-n2(&y).scale(1.0 / (width * width))).exp().scale(*amp);
                match dir {
                    None => [g, z0, z0],
                    Some(d) => [g.scale(d[0]), g.scale(d[1]), g.scale(d[2])],
                }
            }
            Analytic::QuadraticGaussian { amp } => {
                let s = n2(&y);
                [z0, z0, (s * (-s).exp()).scale(*amp)]
            }
            Analytic::Flat { amp } => {
                let s = n2(&y);
                if s.val() < 1e-3 {
                    // e^{-1000} underflows; the function and all derivatives are 0 here
                    [z0; 3]
                } else {
                    [z0, z0, (-(T::cst(1.0) / s)).exp().scale(*amp)]
                }
            }
            Analytic::Bracket { amp, exponent } => {
                let s = n2(&y) + T::cst(1.0);
                [z0, z0, s.powf(-exponent / 2.0).scale(*amp)]
            }
            Analytic::Bump { amp, center, radius } => {
                let d = [y[0] - T::cst(center[0]), y[1] - T::cst(center[1]), y[2] - T::cst(center[2])];
                let s = n2(&d).scale(1.0 / (radius * radius));
                let b = bump_real(s);
                [b.scale(amp[0]), b.scale(amp[1]), b.scale(amp[2])]
            }
            Analytic::RadialGaussian { amp, width } => {
                let g = (-n2(&y).scale(1.0 / (width * width))).exp().scale(*amp);
                [g * y[0], g * y[1], g * y[2]]
            }
            Analytic::RigidBump { rate, width } => {
                let g = (-n2(&y).scale(1.0 / (width * width))).exp().scale(rate / 2.0);
                [-g * y[1], g * y[0], z0]
            }
            Analytic::Lifted { field, quantity } => lift(field, *quantity, y),
            Analytic::Rescaled { inner, lambda, power } => {
                let inv = 1.0 / lambda;
                let f = inner.eval([y[0].scale(inv), y[1].scale(inv), y[2].scale(inv)]);
                let k = lambda.powf(*power);
                [f[0].scale(k), f[1].scale(k), f[2].scale(k)]
            }
            Analytic::Sum { terms } => {
                let mut out = [z0; 3];
                for t in terms {
                    let f = t.eval(y);
                    for c in 0..3 {
                        out[c] = out[c] + f[c];
                    }
                }
                out
            }
        }
    }

    pub fn value(&self, y: [f64; 3]) -> [f64; 3] {
        self.eval(y)
    }

    /// Values and Jacobian rows: jac[i][j] = dF_i/dy_j.
    pub fn value_and_jacobian(&self, y: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let d = [Dual::var(y[0], 0), Dual::var(y[1], 1), Dual::var(y[2], 2)];
        let f = self.eval(d);
        ([f[0].v, f[1].v, f[2].v], [f[0].d, f[1].d, f[2].d])
    }

    /// Half-width of a box that captures the essential content of the field.
    pub fn extent(&self) -> f64 {
        match self {
            Analytic::Zero => 1.0,
            Analytic::Linear { .. } => 2.0,
            Analytic::BurgersVelocity { .. } | Analytic::BurgersVorticity { .. } | Analytic::BurgersPressure { .. } => 4.0,
            Analytic::ColumnVelocity { width, .. } | Analytic::ColumnVorticity { width, .. } => 6.0 * width,
            Analytic::RingVorticity { radius, delta, .. } => radius + 6.0 * delta.sqrt(),
            Analytic::Gaussian { width, .. } | Analytic::RadialGaussian { width, .. } | Analytic::RigidBump { width, .. } => {
                6.0 * width
            }
            Analytic::QuadraticGaussian { .. } => 6.0,
            Analytic::Flat { .. } => 3.0,
            Analytic::Bracket { .. } => 10.0,
            Analytic::Bump { center, radius, .. } => {
                (center[0].powi(2) + center[1].powi(2) + center[2].powi(2)).sqrt() + radius
            }
            Analytic::Lifted { field, .. } => field.extent(),
            Analytic::Rescaled { inner, lambda, .. } => lambda * inner.extent(),
            Analytic::Sum { terms } => terms.iter().map(|t| t.extent()).fold(1.0, f64::max),
        }
    }

    /// Smallest length over which the field changes appreciably.
    pub fn feature_length(&self) -> f64 {
        match self {
            Analytic::Zero | Analytic::Linear { .. } => 1.0,
            Analytic::BurgersVelocity { .. } | Analytic::BurgersVorticity { .. } | Analytic::BurgersPressure { .. } => 0.5,
            Analytic::ColumnVelocity { width, .. } | Analytic::ColumnVorticity { width, .. } => *width,
            Analytic::RingVorticity { delta, axis_soft, .. } => delta.sqrt().min(*axis_soft),
            Analytic::Gaussian { width, .. } | Analytic::RadialGaussian { width, .. } | Analytic::RigidBump { width, .. } => {
                *width
            }
            Analytic::QuadraticGaussian { .. } | Analytic::Bracket { .. } => 1.0,
            Analytic::Flat { .. } => 0.5,
            Analytic::Bump { radius, .. } => 0.5 * radius,
            Analytic::Lifted { field, .. } => field.feature_length(),
            Analytic::Rescaled { inner, lambda, .. } => lambda * inner.feature_length(),
            Analytic::Sum { terms } => terms.iter().map(|t| t.feature_length()).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Analytic::Zero => true,
            Analytic::Lifted { field: Meridional::Zero, .. } => true,
            Analytic::Rescaled { inner, .. } => inner.is_zero(),
            Analytic::Sum { terms } => terms.iter().all(|t| t.is_zero()),
            _ => false,
        }
    }

    /// Invariant along e3 (infinite extent in that direction).
    pub fn is_columnar(&self) -> bool {
        match self {
            Analytic::ColumnVelocity { .. } | Analytic::ColumnVorticity { .. } => true,
            Analytic::Rescaled { inner, .. } => inner.is_columnar(),
            Analytic::Sum { terms } => terms.iter().any(|t| t.is_columnar()),
            _ => false,
        }
    }

    /// Majorant of |F| for tail estimates.
    pub fn envelope(&self) -> Envelope {
        match self {
            Analytic::Zero => Envelope::Zero,
            Analytic::ColumnVorticity { amp, width } => {
                Envelope::Column { line_density: amp.abs() * std::f64::consts::PI * width * width }
            }
            Analytic::RingVorticity { amp, radius, delta, axis_soft } => {
                // the axis softening factor (1 - e^{-q})/q * r/eps^2 <= 1/r, and
                // amp e^{-d^2/delta} is bounded by the Gaussian in the distance to the core circle
                let _ = axis_soft;
                Envelope::Gaussian { amp: amp.abs(), center: *radius, width: delta.sqrt() }
            }
            Analytic::Gaussian { amp, width, dir } => {
                let n = dir.map(|d| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()).unwrap_or(1.0);
                Envelope::Gaussian { amp: amp.abs() * n, center: 0.0, width: *width }
            }
            Analytic::QuadraticGaussian { amp } => {
                // s e^{-s} <= e^{-s/2} * sup(s e^{-s/2}) = (2/e) e^{-s/2}
                Envelope::Gaussian { amp: amp.abs() * 2.0 / std::f64::consts::E, center: 0.0, width: 2f64.sqrt() }
            }
            Analytic::BurgersVorticity { swirl } => {
                // |2(1-s)e^{-s}| <= 2 e^{-s/2}
                Envelope::Gaussian { amp: 2.0 * swirl.abs(), center: 0.0, width: 2f64.sqrt() }
            }
            Analytic::Flat { amp } => Envelope::PowerLaw { c: amp.abs(), k: 0.0 },
            Analytic::Bracket { amp, exponent } => Envelope::PowerLaw { c: amp.abs(), k: *exponent },
            Analytic::Bump { center, radius, .. } => Envelope::Compact {
                radius: (center[0].powi(2) + center[1].powi(2) + center[2].powi(2)).sqrt() + radius,
            },
            Analytic::Rescaled { inner, lambda, power } => match inner.envelope() {
                Envelope::Gaussian { amp, center, width } => Envelope::Gaussian {
                    amp: amp * lambda.powf(*power),
                    center: center * lambda,
                    width: width * lambda,
                },
                Envelope::PowerLaw { c, k } => Envelope::PowerLaw { c: c * lambda.powf(*power + k.max(0.0)), k },
                Envelope::Compact { radius } => Envelope::Compact { radius: radius * lambda },
                Envelope::Column { line_density } => Envelope::Column { line_density: line_density * lambda.powf(power + 2.0) },
                e => e,
            },
            _ => Envelope::Unknown,
        }
    }
}

fn bump_real<T: Real>(s: T) -> T {
    if s.val() >= 1.0 {
        T::cst(0.0)
    } else {
        (T::cst(1.0) - T::cst(1.0) / (T::cst(1.0) - s)).exp()
    }
}

/// d/ds of the bump profile
fn bump_prime<T: Real>(s: T) -> T {
    if s.val() >= 1.0 {
        T::cst(0.0)
    } else {
        let om = T::cst(1.0) - s;
        -bump_real(s) / (om * om)
    }
}

fn lift<T: Real>(field: &Meridional, quantity: Quantity, y: [T; 3]) -> [T; 3] {
    let mut y0 = y[0];
    let rr = y[0] * y[0] + y[1] * y[1];
    if rr.val() == 0.0 {
        // on the axis itself: step off by a negligible amount so the polar frame exists
        y0 = y0 + T::cst(1e-12);
    }
    let r = (y0 * y0 + y[1] * y[1]).sqrt();
    let c = field.eval(r, y[2], quantity);
    if quantity == Quantity::Pressure {
        return [c[0], T::cst(0.0), T::cst(0.0)];
    }
    let (cos, sin) = (y0 / r, y[1] / r);
    [c[0] * cos - c[1] * sin, c[0] * sin + c[1] * cos, c[2]]
}

impl Meridional {
    pub fn eval<T: Real>(&self, r: T, z: T, quantity: Quantity) -> [T; 3] {
        let z0 = T::cst(0.0);
        match self {
            Meridional::Zero => [z0; 3],
            Meridional::LinearStrain { a } => match quantity {
                Quantity::Velocity => [r.scale(*a), z0, z.scale(-2.0 * a)],
                _ => [z0; 3],
            },
            Meridional::ManufacturedSwirl { a, kappa, m, kappa_theta, m_theta } => match quantity {
                Quantity::Velocity => [r.scale(*a), r.powf(*m).scale(*kappa), z.scale(-2.0 * a)],
                Quantity::Vorticity => {
                    let omz = r.powf(m - 1.0).scale(kappa * (m + 1.0));
                    let omt = if *kappa_theta != 0.0 { r.powf(m_theta + 1.0).scale(*kappa_theta) } else { z0 };
                    [z0, omt, omz]
                }
                Quantity::Pressure => [z0; 3],
            },
            Meridional::OffAxisZero { gamma, swirl, rho } => {
                let inv = 1.0 / (rho * rho);
                let dr = r - T::cst(1.0);
                let s = (dr * dr + z * z).scale(inv);
                let phi = bump_real(s);
                match quantity {
                    Quantity::Velocity => [phi.scale(-gamma), phi.scale(*swirl), z0],
                    Quantity::Vorticity => {
                        let dp = bump_prime(s);
                        let phi_r = dp * dr.scale(2.0 * inv);
                        let phi_z = dp * z.scale(2.0 * inv);
                        // Omega_r = -dz U_th, Omega_th = dz U_r - dr U_z, Omega_z = dr U_th + U_th / r
                        let omz = if r.val() > 0.0 { (phi_r + phi / r).scale(*swirl) } else { z0 };
                        [phi_z.scale(-swirl), phi_z.scale(-gamma), omz]
                    }
                    Quantity::Pressure => [z0; 3],
                }
            }
        }
    }

    /// Value and (d/dr, d/dz) of one component.
    pub fn component_with_gradient(&self, r: f64, z: f64, quantity: Quantity, comp: usize) -> (f64, f64, f64) {
        let f = self.eval(Dual::var(r, 0), Dual::var(z, 1), quantity);
        (f[comp].v, f[comp].d[0], f[comp].d[1])
    }

    pub fn extent(&self) -> f64 {
        match self {
            Meridional::Zero | Meridional::LinearStrain { .. } => 2.0,
            Meridional::ManufacturedSwirl { .. } => 3.0,
            Meridional::OffAxisZero { rho, .. } => 1.0 + rho,
        }
    }

    pub fn feature_length(&self) -> f64 {
        match self {
            Meridional::OffAxisZero { rho, .. } => 0.5 * rho,
            _ => 1.0,
        }
    }

    /// ((r0, r1), (z0, z1)) on which the family is meant to be evaluated; the
    /// manufactured swirl is singular on the axis and stays away from it.
    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            Meridional::Zero | Meridional::LinearStrain { .. } => ((0.0, 2.0), (-2.0, 2.0)),
            Meridional::ManufacturedSwirl { .. } => ((0.5, 2.0), (-1.0, 1.0)),
            Meridional::OffAxisZero { rho, .. } => ((0.0, 1.0 + 2.0 * rho), (-0.5 - rho, 0.5 + rho)),
        }
    }

    pub fn has_vorticity(&self) -> bool {
        !matches!(self, Meridional::Zero | Meridional::LinearStrain { .. })
    }
}

/// Convenience: scalar bump used by fixtures outside generic code.
pub fn bump_at(s: f64) -> f64 {
    bump(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian(f: &Analytic, y: [f64; 3]) -> [[f64; 3]; 3] {
        let h = 1e-6;
        let mut j = [[0.0; 3]; 3];
        for c in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[c] += h;
            ym[c] -= h;
            let fp = f.value(yp);
            let fm = f.value(ym);
            for i in 0..3 {
                j[i][c] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn dual_jacobians_match_finite_differences() {
        let fields = vec![
            Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 },
            Analytic::ColumnVelocity { amp: 1.0, width: 1.0 },
            Analytic::RingVorticity { amp: 1.0, radius: 1.0, delta: 0.1, axis_soft: 0.25 },
            Analytic::Bracket { amp: 1.0, exponent: 2.0 },
            Analytic::Bump { amp: [0.0, 0.0, -0.4], center: [0.0, 0.0, 1.0], radius: 0.5 },
            Analytic::Lifted { field: Meridional::OffAxisZero { gamma: 0.45, swirl: 0.2, rho: 0.5 }, quantity: Quantity::Velocity },
            Analytic::Rescaled { inner: Box::new(Analytic::QuadraticGaussian { amp: 1.0 }), lambda: 2.0, power: 0.0 },
        ];
        let y = [0.31, -0.72, 0.18];
        for f in &fields {
            let (_, j) = f.value_and_jacobian(y);
            let fd = fd_jacobian(f, y);
            for i in 0..3 {
                for c in 0..3 {
                    assert!((j[i][c] - fd[i][c]).abs() < 1e-7 * (1.0 + fd[i][c].abs()), "{f:?} {i}{c}");
                }
            }
        }
    }

    #[test]
    fn column_velocity_curl_is_column_vorticity() {
        let u = Analytic::ColumnVelocity { amp: 1.3, width: 0.8 };
        let w = Analytic::ColumnVorticity { amp: 1.3, width: 0.8 };
        for y in [[0.0, 0.0, 0.0], [1e-4, 0.0, 0.2], [0.5, 0.7, -1.0], [2.0, -1.0, 0.0]] {
            let (_, j) = u.value_and_jacobian(y);
            let curl = [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]];
            let om = w.value(y);
            for c in 0..3 {
                assert!((curl[c] - om[c]).abs() < 1e-12, "{y:?}");
            }
        }
    }

    #[test]
    fn burgers_vorticity_matches_curl() {
        let u = Analytic::BurgersVelocity { sigma: 0.3, swirl: 1.0 };
        let w = Analytic::BurgersVorticity { swirl: 1.0 };
        let y = [0.4, -0.3, 0.9];
        let (_, j) = u.value_and_jacobian(y);
        let curl = [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]];
        let om = w.value(y);
        for c in 0..3 {
            assert!((curl[c] - om[c]).abs() < 1e-13);
        }
    }

    #[test]
    fn off_axis_vorticity_is_curl_of_lifted_velocity() {
        let m = Meridional::OffAxisZero { gamma: 0.45, swirl: 0.2, rho: 0.5 };
        let u = Analytic::Lifted { field: m.clone(), quantity: Quantity::Velocity };
        let w = Analytic::Lifted { field: m, quantity: Quantity::Vorticity };
        let y = [0.7, 0.5, 0.1];
        let (_, j) = u.value_and_jacobian(y);
        let curl = [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]];
        let om = w.value(y);
        for c in 0..3 {
            assert!((curl[c] - om[c]).abs() < 1e-12, "{c}: {} vs {}", curl[c], om[c]);
        }
    }
}
