use serde::{Deserialize, Serialize};

use super::grid::{Boundary, Grid3};
use super::sampled::{Interp, Rank, SampledField};
use super::source::FieldSource;
use super::spectral::spectral_derivative;
use crate::error::{Error, Result};
use crate::numerics::{Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffOp {
    Curl,
    Divergence,
    Gradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMethod {
    Spectral,
    Centered4,
}

/// Fourth-order centred first derivative along `axis`; third-order one-sided
/// four-point stencils on the two outermost layers of a non-periodic grid.
pub fn stencil_derivative(grid: &Grid3, data: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.dims[axis];
    let h = grid.spacing[axis];
    let stride = match axis {
        0 => grid.dims[1] * grid.dims[2],
        1 => grid.dims[2],
        _ => 1,
    };
    let periodic = grid.boundary == Boundary::Periodic;
    let mut out = vec![0.0; data.len()];
    let lines = data.len() / n;
    for l in 0..lines {
        let base = match axis {
            0 => l,
            1 => (l / grid.dims[2]) * grid.dims[1] * grid.dims[2] + l % grid.dims[2],
            _ => l * grid.dims[2],
        };
        let f = |i: usize| data[base + i * stride];
        for i in 0..n {
            let d = if periodic {
                let w = |o: i64| f((i as i64 + o).rem_euclid(n as i64) as usize);
                (w(-2) - 8.0 * w(-1) + 8.0 * w(1) - w(2)) / (12.0 * h)
            } else if i >= 2 && i + 2 < n {
                (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12.0 * h)
            } else if i == 0 {
                (-11.0 * f(0) + 18.0 * f(1) - 9.0 * f(2) + 2.0 * f(3)) / (6.0 * h)
            } else if i == 1 {
                (-2.0 * f(0) - 3.0 * f(1) + 6.0 * f(2) - f(3)) / (6.0 * h)
            } else if i == n - 1 {
                (11.0 * f(n - 1) - 18.0 * f(n - 2) + 9.0 * f(n - 3) - 2.0 * f(n - 4)) / (6.0 * h)
            } else {
                (2.0 * f(n - 1) + 3.0 * f(n - 2) - 6.0 * f(n - 3) + f(n - 4)) / (6.0 * h)
            };
            out[base + i * stride] = d;
        }
    }
    out
}

pub fn derivative(grid: &Grid3, data: &[f64], axis: usize, method: DiffMethod) -> Result<Vec<f64>> {
    match method {
        DiffMethod::Centered4 => Ok(stencil_derivative(grid, data, axis)),
        DiffMethod::Spectral => spectral_derivative(grid, data, axis),
    }
}

/// Values and Jacobians of a field at every node of a grid.
#[derive(Clone, Debug)]
pub struct Nodal {
    pub grid: Grid3,
    pub val: Vec<Vec3>,
    pub jac: Vec<Mat3>,
}

impl Nodal {
    /// Gridded data on its own grid is differentiated by stencils (or FFT);
    /// everything else is evaluated pointwise with exact Jacobians.
    pub fn of(field: &FieldSource, grid: &Grid3, method: DiffMethod) -> Result<Nodal> {
        if let Some(s) = field.as_sampled() {
            if s.grid.same_nodes(grid) {
                return Nodal::from_samples(grid, &s.data, method);
            }
        }
        let pairs = crate::par::map_range(grid.len(), |n| field.value_jac(&grid.point_at(n)));
        let (val, jac) = pairs.into_iter().unzip();
        Ok(Nodal { grid: grid.clone(), val, jac })
    }

    pub fn from_samples(grid: &Grid3, comps: &[Vec<f64>], method: DiffMethod) -> Result<Nodal> {
        let mut val = vec![Vec3::zeros(); grid.len()];
        let mut jac = vec![Mat3::zeros(); grid.len()];
        for (c, data) in comps.iter().enumerate() {
            for (n, v) in data.iter().enumerate() {
                val[n][c] = *v;
            }
            for axis in 0..3 {
                let d = derivative(grid, data, axis, method)?;
                for (n, v) in d.iter().enumerate() {
                    jac[n][(c, axis)] = *v;
                }
            }
        }
        Ok(Nodal { grid: grid.clone(), val, jac })
    }
}

pub fn curl_of(j: &Mat3) -> Vec3 {
    Vec3::new(j[(2, 1)] - j[(1, 2)], j[(0, 2)] - j[(2, 0)], j[(1, 0)] - j[(0, 1)])
}

/// Discrete curl, divergence or gradient on the field's grid (or `grid` for
/// analytic fields, whose derivatives are exact).
pub fn differential(field: &FieldSource, op: DiffOp, method: DiffMethod, grid: Option<&Grid3>) -> Result<FieldSource> {
    match (op, field.rank()) {
        (DiffOp::Curl | DiffOp::Divergence, Rank::Scalar) => {
            return Err(Error::RankMismatch(format!("{op:?} needs a vector field")))
        }
        (DiffOp::Gradient, Rank::Vector) => return Err(Error::RankMismatch("gradient needs a scalar field".into())),
        _ => {}
    }
    let g = match (grid, field.grid()) {
        (Some(g), _) => g.clone(),
        (None, Some(g)) => g.clone(),
        (None, None) => super::norms::default_grid(field),
    };
    if method == DiffMethod::Spectral && g.boundary != Boundary::Periodic {
        return Err(Error::SpectralNeedsPeriodic);
    }
    let nodal = Nodal::of(field, &g, method)?;
    let (rank, data): (Rank, Vec<Vec<f64>>) = match op {
        DiffOp::Curl => {
            let c: Vec<Vec3> = nodal.jac.iter().map(curl_of).collect();
            (Rank::Vector, (0..3).map(|k| c.iter().map(|v| v[k]).collect()).collect())
        }
        DiffOp::Divergence => (Rank::Scalar, vec![nodal.jac.iter().map(|j| j.trace()).collect()]),
        DiffOp::Gradient => (Rank::Vector, (0..3).map(|k| nodal.jac.iter().map(|j| j[(0, k)]).collect()).collect()),
    };
    Ok(FieldSource::sampled(SampledField::new(g, rank, data, Interp::Cubic)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::analytic::Analytic;

    #[test]
    fn stencil_exact_on_cubics_everywhere() {
        let g = Grid3::new([7, 6, 5], [0.3, 0.2, 0.25], [-1.0, 0.0, 0.5], Boundary::DecayToZero).unwrap();
        let f: Vec<f64> = (0..g.len()).map(|n| { let p = g.point_at(n); p[1].powi(3) - p[0] * p[1] }).collect();
        let d = stencil_derivative(&g, &f, 1);
        for n in 0..g.len() {
            let p = g.point_at(n);
            assert!((d[n] - (3.0 * p[1] * p[1] - p[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn curl_of_rigid_rotation_is_constant() {
        let u = FieldSource::vector(Analytic::Linear { m: [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]] });
        let g = Grid3::cube(1.0, 6).unwrap();
        let sampled = FieldSource::sampled(u.sample(&g));
        let c = differential(&sampled, DiffOp::Curl, DiffMethod::Centered4, None).unwrap();
        for n in 0..g.len() {
            let v = c.as_sampled().unwrap().node(n);
            assert!((v - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_traceless_linear_field_vanishes() {
        let (a, b) = (0.7, -0.2);
        let u = FieldSource::vector(Analytic::Linear { m: [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, -(a + b)]] });
        let g = Grid3::cube(2.0, 8).unwrap();
        let sampled = FieldSource::sampled(u.sample(&g));
        let d = differential(&sampled, DiffOp::Divergence, DiffMethod::Centered4, None).unwrap();
        assert!(d.as_sampled().unwrap().data[0].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rank_and_method_errors() {
        let s = FieldSource::scalar(Analytic::Gaussian { amp: 1.0, width: 1.0, dir: None });
        assert!(matches!(differential(&s, DiffOp::Curl, DiffMethod::Centered4, None), Err(Error::RankMismatch(_))));
        let v = FieldSource::vector(Analytic::Zero);
        let g = Grid3::cube(1.0, 5).unwrap();
        assert!(matches!(
            differential(&v, DiffOp::Curl, DiffMethod::Spectral, Some(&g)),
            Err(Error::SpectralNeedsPeriodic)
        ));
    }
}
