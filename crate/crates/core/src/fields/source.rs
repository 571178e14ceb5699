use std::sync::Arc;

use super::analytic::{Analytic, Envelope};
use super::grid::{Boundary, Grid3};
use super::sampled::{extrapolated_jac, far_factor, Interp, Rank, SampledField};
use super::spectral::SpectralField;
use crate::numerics::{Mat3, Vec3};

/// A scalar or vector field over R^3.
#[derive(Clone, Debug)]
pub enum FieldSource {
    Analytic { field: Analytic, rank: Rank },
    Sampled(Arc<SampledField>),
    /// Vector field given as the curl of a sampled vector potential; exactly
    /// divergence-free at every point, including between nodes.
    CurlOfPotential(Arc<SampledField>),
    /// Trigonometric series on a periodic box, evaluated exactly pointwise.
    Spectral(SpectralField),
}

impl FieldSource {
    pub fn analytic(field: Analytic, rank: Rank) -> Self {
        FieldSource::Analytic { field, rank }
    }

    pub fn vector(field: Analytic) -> Self {
        FieldSource::Analytic { field, rank: Rank::Vector }
    }

    pub fn scalar(field: Analytic) -> Self {
        FieldSource::Analytic { field, rank: Rank::Scalar }
    }

    pub fn zero(rank: Rank) -> Self {
        FieldSource::Analytic { field: Analytic::Zero, rank }
    }

    pub fn sampled(f: SampledField) -> Self {
        FieldSource::Sampled(Arc::new(f))
    }

    pub fn rank(&self) -> Rank {
        match self {
            FieldSource::Analytic { rank, .. } => *rank,
            FieldSource::Sampled(s) => s.rank,
            FieldSource::CurlOfPotential(_) | FieldSource::Spectral(_) => Rank::Vector,
        }
    }

    pub fn grid(&self) -> Option<&Grid3> {
        match self {
            FieldSource::Analytic { .. } => None,
            FieldSource::Sampled(s) | FieldSource::CurlOfPotential(s) => Some(&s.grid),
            // node positions move under rescaling, so a spectral field exposes no grid
            FieldSource::Spectral(_) => None,
        }
    }

    pub fn as_sampled(&self) -> Option<&SampledField> {
        match self {
            FieldSource::Sampled(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FieldSource::Analytic { field, .. } if field.is_zero())
    }

    pub fn is_columnar(&self) -> bool {
        matches!(self, FieldSource::Analytic { field, .. } if field.is_columnar())
    }

    pub fn value(&self, y: &Vec3) -> Vec3 {
        match self {
            FieldSource::Analytic { field, .. } => Vec3::from(field.value([y[0], y[1], y[2]])),
            FieldSource::Sampled(s) => s.value(y),
            FieldSource::CurlOfPotential(_) | FieldSource::Spectral(_) => self.value_jac(y).0,
        }
    }

    pub fn scalar_at(&self, y: &Vec3) -> f64 {
        self.value(y)[0]
    }

    /// Value and Jacobian J[(i, j)] = dF_i/dy_j (for scalars row 0 is the gradient).
    pub fn value_jac(&self, y: &Vec3) -> (Vec3, Mat3) {
        match self {
            FieldSource::Analytic { field, .. } => {
                let (v, j) = field.value_and_jacobian([y[0], y[1], y[2]]);
                (Vec3::from(v), Mat3::from_fn(|a, b| j[a][b]))
            }
            FieldSource::Sampled(s) => s.value_jac(y),
            FieldSource::CurlOfPotential(s) => {
                let inside = s.grid.boundary == Boundary::Periodic || s.grid.contains(y);
                if inside {
                    curl_of_potential(s, y)
                } else {
                    let k = s.far_exponent;
                    extrapolated_jac(
                        |p| {
                            let pb = s.grid.clamp(p);
                            curl_of_potential(s, &pb).0 * far_factor(p, &pb, k)
                        },
                        y,
                    )
                }
            }
            FieldSource::Spectral(s) => s.eval(y),
        }
    }

    /// Half-width of a box capturing the field content, and the smallest feature length.
    pub fn extent_and_feature(&self) -> (f64, f64) {
        match self {
            FieldSource::Analytic { field, .. } => (field.extent(), field.feature_length()),
            FieldSource::Spectral(s) => {
                let g = &s.base.grid;
                let e = (0..3).map(|a| g.spacing[a] * g.dims[a] as f64 / 2.0).fold(0.0, f64::max);
                (e * s.lambda, 2.0 * g.min_spacing() * s.lambda)
            }
            _ => {
                let g = self.grid().expect("gridded");
                let lo = g.lower();
                let hi = g.upper();
                let e = (0..3).map(|a| lo[a].abs().max(hi[a].abs())).fold(0.0, f64::max);
                (e, 2.0 * g.min_spacing())
            }
        }
    }

    /// Magnitude majorant for far-field integrals.
    pub fn envelope(&self) -> Envelope {
        match self {
            FieldSource::Analytic { field, .. } => field.envelope(),
            FieldSource::Sampled(s) => {
                let g = &s.grid;
                if g.boundary == Boundary::Periodic {
                    return Envelope::Unknown;
                }
                // largest boundary magnitude, extended by the far-field power law
                let mut bmax: f64 = 0.0;
                for n in 0..g.len() {
                    if g.cells_from_boundary(g.unindex(n)) == 0 {
                        bmax = bmax.max(s.node(n).norm());
                    }
                }
                let lo = g.lower();
                let hi = g.upper();
                let rmax = (0..3).map(|a| lo[a].abs().max(hi[a].abs()).powi(2)).sum::<f64>().sqrt();
                if bmax == 0.0 {
                    Envelope::Compact { radius: rmax }
                } else if s.far_exponent < 0.0 {
                    let k = -s.far_exponent;
                    let interior = (0..g.len()).map(|n| s.node(n).norm()).fold(0.0, f64::max);
                    // inside the box |F| <= sup; outside, F(y) = F(y_b)(|y|/|y_b|)^{-k} with |y_b| <= rmax
                    Envelope::PowerLaw { c: interior.max(bmax) * rmax.powf(k), k }
                } else {
                    Envelope::Unknown
                }
            }
            _ => Envelope::Unknown,
        }
    }

    /// lambda^power F(y/lambda).
    pub fn rescaled(&self, lambda: f64, power: f64) -> FieldSource {
        match self {
            FieldSource::Analytic { field, rank } => {
                let field = match field {
                    Analytic::Zero => Analytic::Zero,
                    f => Analytic::Rescaled { inner: Box::new(f.clone()), lambda, power },
                };
                FieldSource::Analytic { field, rank: *rank }
            }
            FieldSource::Sampled(s) => FieldSource::Sampled(Arc::new(rescale_sampled(s, lambda, power))),
            FieldSource::CurlOfPotential(s) => {
                FieldSource::CurlOfPotential(Arc::new(rescale_sampled(s, lambda, power + 1.0)))
            }
            FieldSource::Spectral(s) => FieldSource::Spectral(SpectralField {
                base: s.base.clone(),
                lambda: s.lambda * lambda,
                amp: s.amp * lambda.powf(power),
            }),
        }
    }

    /// Node values on a grid.
    pub fn sample(&self, grid: &Grid3) -> SampledField {
        if let FieldSource::Sampled(s) = self {
            if s.grid.same_nodes(grid) {
                return (**s).clone();
            }
        }
        let far = match self {
            FieldSource::Sampled(s) | FieldSource::CurlOfPotential(s) => s.far_exponent,
            _ => 0.0,
        };
        SampledField::from_fn(grid.clone(), self.rank(), Interp::Cubic, |p| self.value(&p)).with_far_exponent(far)
    }
}

fn curl_of_potential(s: &SampledField, y: &Vec3) -> (Vec3, Mat3) {
    let o = s.interp_inside(y, true);
    let g = &o.grad;
    let h = &o.hess;
    let u = Vec3::new(g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]);
    // dU_i/dy_j from second derivatives of psi
    let mut j = Mat3::zeros();
    for d in 0..3 {
        j[(0, d)] = h[2][1][d] - h[1][2][d];
        j[(1, d)] = h[0][2][d] - h[2][0][d];
        j[(2, d)] = h[1][0][d] - h[0][1][d];
    }
    (u, j)
}

fn rescale_sampled(s: &SampledField, lambda: f64, power: f64) -> SampledField {
    let g = &s.grid;
    let grid = Grid3 {
        dims: g.dims,
        spacing: [g.spacing[0] * lambda, g.spacing[1] * lambda, g.spacing[2] * lambda],
        origin: [g.origin[0] * lambda, g.origin[1] * lambda, g.origin[2] * lambda],
        boundary: g.boundary,
    };
    let k = lambda.powf(power);
    SampledField {
        grid,
        rank: s.rank,
        data: s.data.iter().map(|d| d.iter().map(|v| v * k).collect()).collect(),
        interp: s.interp,
        far_exponent: s.far_exponent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_curl_is_divergence_free_between_nodes() {
        let g = Grid3::cube(2.0, 17).unwrap();
        let psi = SampledField::from_fn(g, Rank::Vector, Interp::Cubic, |p| {
            let e = (-p.norm_squared()).exp();
            Vec3::new(e * p[1], -e * p[0] * p[2], e)
        });
        let u = FieldSource::CurlOfPotential(Arc::new(psi));
        for y in [Vec3::new(0.123, -0.456, 0.789), Vec3::new(-1.3, 0.2, 0.05)] {
            let (_, j) = u.value_jac(&y);
            assert!(j.trace().abs() < 1e-12, "{}", j.trace());
        }
    }

    #[test]
    fn rescaled_sampled_matches_definition() {
        let g = Grid3::cube(2.0, 9).unwrap();
        let s = SampledField::from_fn(g, Rank::Scalar, Interp::Cubic, |p| Vec3::new(p[0] * p[1], 0.0, 0.0));
        let f = FieldSource::sampled(s);
        let r = f.rescaled(2.0, 1.0);
        let y = Vec3::new(0.6, 1.4, -0.2);
        let expect = 2.0 * f.value(&(y / 2.0))[0];
        assert!((r.value(&y)[0] - expect).abs() < 1e-13);
    }
}
