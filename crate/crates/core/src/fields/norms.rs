use serde::{Deserialize, Serialize};

use super::grid::{Boundary, Grid3};
use super::ops::{DiffMethod, Nodal};
use super::source::FieldSource;
use crate::error::{param, Error, Result};
use crate::numerics::{fibonacci_sphere, fit_line, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Lp(f64),
    Sup,
    /// sup of the Frobenius norm of the Jacobian
    GradSup,
    Holder { mu: f64, l0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Trapezoid,
    Midpoint,
}

#[derive(Clone, Debug)]
pub struct NormRequest {
    pub kind: NormKind,
    pub rule: Rule,
    /// Evaluation grid; defaults to the field's own grid or one sized from its extent.
    pub domain: Option<Grid3>,
}

impl NormRequest {
    pub fn new(kind: NormKind) -> Self {
        NormRequest { kind, rule: Rule::Trapezoid, domain: None }
    }

    pub fn on(mut self, grid: Grid3) -> Self {
        self.domain = Some(grid);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            NormKind::Lp(p) if !(p >= 1.0) => Err(param("p", format!("must be >= 1, got {p}"))),
            NormKind::Holder { mu, .. } if !(mu > 0.0 && mu < 1.0) => {
                Err(param("mu", format!("must lie in (0,1), got {mu}")))
            }
            NormKind::Holder { l0, .. } if !(l0 > 0.0) => Err(param("L0", format!("must be positive, got {l0}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Estimated contribution of the region outside the evaluation domain.
    pub tail: f64,
    /// Fitted power-law decay exponent on the outermost shells (Lp only).
    pub tail_exponent: Option<f64>,
    /// Where a sup was attained.
    pub location: Option<Vec3>,
}

/// Evaluation grid for a field: its own grid if it has one, otherwise a cube
/// sized from the declared extent with ~6 nodes per feature length.
pub fn default_grid(field: &FieldSource) -> Grid3 {
    if let Some(g) = field.grid() {
        return g.clone();
    }
    let (e, feat) = field.extent_and_feature();
    grid_for(e, feat)
}

pub fn grid_for(extent: f64, feature: f64) -> Grid3 {
    let h = feature / 6.0;
    let mut n = ((2.0 * extent / h).ceil() as usize + 1).clamp(17, 129);
    if n % 2 == 0 {
        n += 1;
    }
    Grid3::cube(extent, n).expect("valid cube")
}

pub fn field_norm(field: &FieldSource, req: &NormRequest) -> Result<NormEstimate> {
    req.validate()?;
    let grid = req.domain.clone().unwrap_or_else(|| default_grid(field));
    match req.kind {
        NormKind::Lp(p) => lp_norm(field, &grid, p, req.rule),
        NormKind::Sup => Ok(sup_norm(field, &grid, false)),
        NormKind::GradSup => grad_sup(field, &grid),
        NormKind::Holder { mu, l0 } => Ok(holder(field, &grid, mu, l0)),
    }
}

fn trapezoid_weight(grid: &Grid3, idx: [usize; 3]) -> f64 {
    if grid.boundary == Boundary::Periodic {
        return 1.0;
    }
    (0..3).map(|a| if idx[a] == 0 || idx[a] == grid.dims[a] - 1 { 0.5 } else { 1.0 }).product()
}

fn lp_norm(field: &FieldSource, grid: &Grid3, p: f64, rule: Rule) -> Result<NormEstimate> {
    let vol = grid.cell_volume();
    let sum = match rule {
        Rule::Trapezoid => {
            let nodal_vals = nodal_values(field, grid);
            crate::par::sum_range(grid.len(), |n| trapezoid_weight(grid, grid.unindex(n)) * nodal_vals[n].powf(p))
        }
        Rule::Midpoint => {
            let cells = [grid.dims[0] - 1, grid.dims[1] - 1, grid.dims[2] - 1];
            let total = cells[0] * cells[1] * cells[2];
            let half = Vec3::new(grid.spacing[0], grid.spacing[1], grid.spacing[2]) * 0.5;
            crate::par::sum_range(total, |n| {
                let k = n % cells[2];
                let j = (n / cells[2]) % cells[1];
                let i = n / (cells[1] * cells[2]);
                field.value(&(grid.point(i, j, k) + half)).norm().powf(p)
            })
        }
    } * vol;
    let (tail, exponent) = lp_tail(field, grid, p)?;
    Ok(NormEstimate { value: sum.powf(1.0 / p), tail: (sum + tail).powf(1.0 / p) - sum.powf(1.0 / p), tail_exponent: exponent, location: None })
}

fn nodal_values(field: &FieldSource, grid: &Grid3) -> Vec<f64> {
    if let Some(s) = field.as_sampled() {
        if s.grid.same_nodes(grid) {
            return (0..grid.len()).map(|n| s.node(n).norm()).collect();
        }
    }
    crate::par::map_range(grid.len(), |n| field.value(&grid.point_at(n)).norm())
}

/// Power-law fit of shell maxima on the three outermost shells of the
/// inscribed ball; returns the integral of the fitted law^p beyond it.
fn lp_tail(field: &FieldSource, grid: &Grid3, p: f64) -> Result<(f64, Option<f64>)> {
    if grid.boundary == Boundary::Periodic || !grid.contains(&Vec3::zeros()) {
        return Ok((0.0, None));
    }
    let r_out = grid.inscribed_radius();
    if r_out <= 0.0 {
        return Ok((0.0, None));
    }
    let dirs = fibonacci_sphere(256);
    let radii = [0.8 * r_out, 0.9 * r_out, r_out];
    let maxima: Vec<f64> = radii
        .iter()
        .map(|&r| dirs.iter().map(|d| field.value(&(d * r)).norm()).fold(0.0, f64::max))
        .collect();
    if maxima.iter().all(|&m| m == 0.0) {
        return Ok((0.0, None));
    }
    if maxima.iter().any(|&m| m < 1e-300) {
        // underflow on the outer shells: faster than any power law
        return Ok((0.0, None));
    }
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = maxima.iter().map(|m| m.ln()).collect();
    let k = -fit_line(&x, &y).slope;
    if k * p <= 3.0 {
        return Err(Error::DivergentTail { p, exponent: k });
    }
    let c = maxima[2] * r_out.powf(k);
    let tail = 4.0 * std::f64::consts::PI * c.powf(p) * r_out.powf(3.0 - k * p) / (k * p - 3.0);
    Ok((tail, Some(k)))
}

/// Grid maximum of |F| (or of the Jacobian Frobenius norm) followed by two
/// rounds of local refinement around the best node.
fn sup_norm(field: &FieldSource, grid: &Grid3, gradient: bool) -> NormEstimate {
    let mag = |y: &Vec3| if gradient { field.value_jac(y).1.norm() } else { field.value(y).norm() };
    let vals: Vec<f64> = if gradient {
        crate::par::map_range(grid.len(), |n| field.value_jac(&grid.point_at(n)).1.norm())
    } else {
        nodal_values(field, grid)
    };
    let (best_n, best) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (n, &v)| if v > a.1 { (n, v) } else { a });
    let mut best = best;
    let mut at = grid.point_at(best_n);
    if !matches!(field, FieldSource::Sampled(_)) {
        let mut h = Vec3::new(grid.spacing[0], grid.spacing[1], grid.spacing[2]);
        for _ in 0..2 {
            let centre = at;
            for i in -2i32..=2 {
                for j in -2i32..=2 {
                    for k in -2i32..=2 {
                        let y = centre + Vec3::new(h[0] * i as f64, h[1] * j as f64, h[2] * k as f64) * 0.5;
                        if !grid.contains(&y) {
                            continue;
                        }
                        let v = mag(&y);
                        if v > best {
                            best = v;
                            at = y;
                        }
                    }
                }
            }
            h *= 0.5;
        }
    }
    NormEstimate { value: best.max(0.0), tail: 0.0, tail_exponent: None, location: Some(at) }
}

fn grad_sup(field: &FieldSource, grid: &Grid3) -> Result<NormEstimate> {
    if let Some(s) = field.as_sampled() {
        if s.grid.same_nodes(grid) {
            let method = if grid.boundary == Boundary::Periodic { DiffMethod::Spectral } else { DiffMethod::Centered4 };
            let nodal = Nodal::of(field, grid, method)?;
            let (n, v) = nodal
                .jac
                .iter()
                .enumerate()
                .map(|(n, j)| (n, j.norm()))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            return Ok(NormEstimate { value: v, tail: 0.0, tail_exponent: None, location: Some(grid.point_at(n)) });
        }
    }
    Ok(sup_norm(field, grid, true))
}

/// Max of |f(x) - f(y)| / |x - y|^mu over node pairs within distance l0.
fn holder(field: &FieldSource, grid: &Grid3, mu: f64, l0: f64) -> NormEstimate {
    let vals: Vec<Vec3> = if let Some(s) = field.as_sampled().filter(|s| s.grid.same_nodes(grid)) {
        (0..grid.len()).map(|n| s.node(n)).collect()
    } else {
        crate::par::map_range(grid.len(), |n| field.value(&grid.point_at(n)))
    };
    let h = grid.spacing;
    let reach: Vec<i64> = (0..3).map(|a| (l0 / h[a] + 1e-9).floor() as i64).collect();
    let mut offsets = Vec::new();
    for di in 0..=reach[0] {
        for dj in -reach[1]..=reach[1] {
            for dk in -reach[2]..=reach[2] {
                // half-space of offsets so each unordered pair is visited once
                if di == 0 && (dj < 0 || (dj == 0 && dk <= 0)) {
                    continue;
                }
                let d = ((di as f64 * h[0]).powi(2) + (dj as f64 * h[1]).powi(2) + (dk as f64 * h[2]).powi(2)).sqrt();
                if d <= l0 * (1.0 + 1e-12) {
                    offsets.push(([di, dj, dk], d.powf(mu)));
                }
            }
        }
    }
    let dims = grid.dims;
    let best = crate::par::max_range(grid.len(), |n| {
        let [i, j, k] = grid.unindex(n);
        let mut m: f64 = 0.0;
        for (o, dmu) in &offsets {
            let (a, b, c) = (i as i64 + o[0], j as i64 + o[1], k as i64 + o[2]);
            if a >= dims[0] as i64 || b < 0 || b >= dims[1] as i64 || c < 0 || c >= dims[2] as i64 {
                continue;
            }
            let q = grid.index(a as usize, b as usize, c as usize);
            m = m.max((vals[n] - vals[q]).norm() / dmu);
        }
        m
    });
    NormEstimate { value: best, tail: 0.0, tail_exponent: None, location: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::analytic::Analytic;
    use crate::fields::grid::Boundary;

    #[test]
    fn sup_of_gaussian_peak() {
        let f = FieldSource::vector(Analytic::Gaussian { amp: 1.0, width: 1.0, dir: Some([0.0, 0.0, 1.0]) });
        let n = field_norm(&f, &NormRequest::new(NormKind::Sup)).unwrap();
        assert!((n.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn l2_of_gaussian() {
        let f = FieldSource::scalar(Analytic::Gaussian { amp: 1.0, width: 1.0, dir: None });
        let n = field_norm(&f, &NormRequest::new(NormKind::Lp(2.0))).unwrap();
        // (pi/2)^{3/4}
        let exact = (std::f64::consts::PI / 2.0).powf(0.75);
        assert!((n.value - exact).abs() < 1e-8, "{}", n.value);
        assert!(n.tail < 1e-10);
    }

    #[test]
    fn holder_of_linear_function_on_unit_box() {
        let f = FieldSource::scalar(Analytic::Linear { m: [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]] });
        let g = Grid3::new([11; 3], [0.1; 3], [0.0; 3], Boundary::DecayToZero).unwrap();
        let n = field_norm(&f, &NormRequest::new(NormKind::Holder { mu: 0.5, l0: 1.0 }).on(g)).unwrap();
        assert!((n.value - 1.0).abs() < 1e-12, "{}", n.value);
    }

    #[test]
    fn slowly_decaying_field_has_divergent_l2() {
        let f = FieldSource::vector(Analytic::Bracket { amp: 1.0, exponent: 1.0 });
        let r = field_norm(&f, &NormRequest::new(NormKind::Lp(2.0)));
        assert!(matches!(r, Err(Error::DivergentTail { .. })));
    }

    #[test]
    fn request_validation() {
        assert!(NormRequest::new(NormKind::Lp(0.5)).validate().is_err());
        assert!(NormRequest::new(NormKind::Holder { mu: 1.5, l0: 1.0 }).validate().is_err());
        assert!(NormRequest::new(NormKind::Holder { mu: 0.5, l0: 0.0 }).validate().is_err());
    }
}
