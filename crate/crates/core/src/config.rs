//! Default tolerances, in one place. Every report entry echoes the value used.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Interior sup of the self-similar residuals.
    pub residual: f64,
    /// Interior sup of div U.
    pub divergence: f64,
    /// Relative interior deviation of Omega from curl U.
    pub consistency: f64,
    /// |U(0)|.
    pub origin_velocity: f64,
    /// Relative error control of the trajectory integrator.
    pub integrator: f64,
    /// det/Cauchy/Weber residuals; a multiple of `integrator`.
    pub flow_identity: f64,
    /// Relative drift of the self-similar circulation.
    pub circulation: f64,
    /// Relative drift of transported axisymmetric invariants.
    pub invariant_drift: f64,
    /// Weighted-area log deviation from 3 gamma tau.
    pub area_growth: f64,
    /// |A(y*) - 1| at the vorticity maximum.
    pub argmax_stretching: f64,
    /// Far-field Bernoulli coefficient vs gamma(2gamma - 1)/2, relative.
    pub bernoulli_farfield: f64,
    /// Quadrature target of the stretching integral.
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-8,
            divergence: 1e-8,
            consistency: 1e-6,
            origin_velocity: 1e-8,
            integrator: 1e-10,
            flow_identity: 1e-9,
            circulation: 1e-6,
            invariant_drift: 1e-8,
            area_growth: 1e-6,
            argmax_stretching: 1e-3,
            bernoulli_farfield: 1e-6,
            quadrature: 1e-8,
        }
    }
}

impl Tolerances {
    /// All check tolerances multiplied by `k` (the integrator setting is kept).
    pub fn scaled(&self, k: f64) -> Tolerances {
        Tolerances {
            residual: self.residual * k,
            divergence: self.divergence * k,
            consistency: self.consistency * k,
            origin_velocity: self.origin_velocity * k,
            integrator: self.integrator,
            flow_identity: self.flow_identity * k,
            circulation: self.circulation * k,
            invariant_drift: self.invariant_drift * k,
            area_growth: self.area_growth * k,
            argmax_stretching: self.argmax_stretching * k,
            bernoulli_farfield: self.bernoulli_farfield * k,
            quadrature: self.quadrature * k,
        }
    }
}
