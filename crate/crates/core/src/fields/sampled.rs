use serde::{Deserialize, Serialize};

use super::grid::{Boundary, Grid3, Grid2};
use crate::error::{Error, Result};
use crate::numerics::{Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rank {
    Scalar,
    Vector,
}

impl Rank {
    pub fn ncomp(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interp {
    Linear,
    Cubic,
}

impl Interp {
    pub fn order(self) -> u32 {
        match self {
            Interp::Linear => 1,
            Interp::Cubic => 3,
        }
    }

    pub fn from_order(o: u32) -> Option<Self> {
        match o {
            1 => Some(Interp::Linear),
            3 => Some(Interp::Cubic),
            _ => None,
        }
    }
}

/// 1D interpolation stencil along one axis.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil1 {
    pub idx: [usize; 4],
    pub w: [f64; 4],
    pub dw: [f64; 4],
    pub d2w: [f64; 4],
    pub len: usize,
}

/// Lagrange basis on integer nodes `xs` evaluated at `t`, with first and second derivatives.
fn lagrange(xs: &[f64], t: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let n = xs.len();
    let mut w = [0.0; 4];
    let mut dw = [0.0; 4];
    let mut d2w = [0.0; 4];
    for m in 0..n {
        let mut denom = 1.0;
        for k in 0..n {
            if k != m {
                denom *= xs[m] - xs[k];
            }
        }
        let others: Vec<f64> = (0..n).filter(|&k| k != m).map(|k| t - xs[k]).collect();
        let mut p = 1.0;
        for o in &others {
            p *= o;
        }
        let mut dp = 0.0;
        for a in 0..others.len() {
            let mut q = 1.0;
            for (b, o) in others.iter().enumerate() {
                if b != a {
                    q *= o;
                }
            }
            dp += q;
        }
        let mut d2p = 0.0;
        for a in 0..others.len() {
            for b in 0..others.len() {
                if a == b {
                    continue;
                }
                let mut q = 1.0;
                for (c, o) in others.iter().enumerate() {
                    if c != a && c != b {
                        q *= o;
                    }
                }
                d2p += q;
            }
        }
        w[m] = p / denom;
        dw[m] = dp / denom;
        d2w[m] = d2p / denom;
    }
    (w, dw, d2w)
}

pub(crate) fn stencil_1d(x: f64, origin: f64, h: f64, n: usize, periodic: bool, interp: Interp) -> Stencil1 {
    let u = (x - origin) / h;
    let mut i0 = u.floor() as i64;
    let len = match interp {
        Interp::Linear => 2,
        Interp::Cubic => 4,
    };
    let first_off: i64 = if len == 4 { -1 } else { 0 };
    if !periodic {
        let lo = -first_off;
        let hi = n as i64 - len as i64 - first_off;
        i0 = i0.clamp(lo, hi);
    }
    let t = u - i0 as f64;
    let xs: Vec<f64> = (0..len).map(|m| (first_off + m as i64) as f64).collect();
    let (mut w, mut dw, mut d2w) = lagrange(&xs, t);
    let mut idx = [0usize; 4];
    for m in 0..len {
        let j = i0 + first_off + m as i64;
        idx[m] = if periodic { j.rem_euclid(n as i64) as usize } else { j as usize };
        dw[m] /= h;
        d2w[m] /= h * h;
    }
    for m in len..4 {
        w[m] = 0.0;
        dw[m] = 0.0;
        d2w[m] = 0.0;
    }
    Stencil1 { idx, w, dw, d2w, len }
}

/// Gridded scalar or vector field with tricubic (or trilinear) interpolation.
/// Outside a non-periodic box the field is extended by the power law
/// F(y) = F(y_b) (|y|/|y_b|)^k from the nearest box point y_b.
#[derive(Clone, Debug)]
pub struct SampledField {
    pub grid: Grid3,
    pub rank: Rank,
    /// One flat row-major array (last index fastest) per component.
    pub data: Vec<Vec<f64>>,
    pub interp: Interp,
    pub far_exponent: f64,
}

pub struct InterpOut {
    pub val: [f64; 3],
    pub grad: [[f64; 3]; 3],
    pub hess: [[[f64; 3]; 3]; 3],
}

impl SampledField {
    pub fn new(grid: Grid3, rank: Rank, data: Vec<Vec<f64>>, interp: Interp) -> Result<Self> {
        if data.len() != rank.ncomp() {
            return Err(Error::InvalidField(format!(
                "expected {} components, got {}",
                rank.ncomp(),
                data.len()
            )));
        }
        for (c, d) in data.iter().enumerate() {
            if d.len() != grid.len() {
                return Err(Error::InvalidField(format!(
                    "component {c} has {} entries, grid has {}",
                    d.len(),
                    grid.len()
                )));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidField(format!("component {c} has non-finite entries")));
            }
        }
        Ok(SampledField { grid, rank, data, interp, far_exponent: 0.0 })
    }

    pub fn from_fn(grid: Grid3, rank: Rank, interp: Interp, f: impl Fn(Vec3) -> Vec3 + Sync) -> Self {
        let pts: Vec<Vec3> = crate::par::map_range(grid.len(), |n| f(grid.point_at(n)));
        let data = (0..rank.ncomp()).map(|c| pts.iter().map(|v| v[c]).collect()).collect();
        SampledField { grid, rank, data, interp, far_exponent: 0.0 }
    }

    pub fn with_far_exponent(mut self, k: f64) -> Self {
        self.far_exponent = k;
        self
    }

    pub fn node(&self, n: usize) -> Vec3 {
        let mut v = Vec3::zeros();
        for c in 0..self.rank.ncomp() {
            v[c] = self.data[c][n];
        }
        v
    }

    pub(crate) fn interp_inside(&self, y: &Vec3, need_hess: bool) -> InterpOut {
        let g = &self.grid;
        let periodic = g.boundary == Boundary::Periodic;
        let s: Vec<Stencil1> =
            (0..3).map(|a| stencil_1d(y[a], g.origin[a], g.spacing[a], g.dims[a], periodic, self.interp)).collect();
        let mut out = InterpOut { val: [0.0; 3], grad: [[0.0; 3]; 3], hess: [[[0.0; 3]; 3]; 3] };
        let nc = self.rank.ncomp();
        for a in 0..s[0].len {
            for b in 0..s[1].len {
                let base = (s[0].idx[a] * g.dims[1] + s[1].idx[b]) * g.dims[2];
                for c in 0..s[2].len {
                    let n = base + s[2].idx[c];
                    let (wa, wb, wc) = (s[0].w[a], s[1].w[b], s[2].w[c]);
                    let (da, db, dc) = (s[0].dw[a], s[1].dw[b], s[2].dw[c]);
                    let w = wa * wb * wc;
                    let gw = [da * wb * wc, wa * db * wc, wa * wb * dc];
                    let hw = if need_hess {
                        let (d2a, d2b, d2c) = (s[0].d2w[a], s[1].d2w[b], s[2].d2w[c]);
                        [
                            [d2a * wb * wc, da * db * wc, da * wb * dc],
                            [da * db * wc, wa * d2b * wc, wa * db * dc],
                            [da * wb * dc, wa * db * dc, wa * wb * d2c],
                        ]
                    } else {
                        [[0.0; 3]; 3]
                    };
                    for comp in 0..nc {
                        let f = self.data[comp][n];
                        out.val[comp] += w * f;
                        for j in 0..3 {
                            out.grad[comp][j] += gw[j] * f;
                        }
                        if need_hess {
                            for j in 0..3 {
                                for k in 0..3 {
                                    out.hess[comp][j][k] += hw[j][k] * f;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn outside(&self, y: &Vec3) -> Option<Vec3> {
        if self.grid.boundary == Boundary::Periodic || self.grid.contains(y) {
            None
        } else {
            Some(self.grid.clamp(y))
        }
    }

    pub fn value(&self, y: &Vec3) -> Vec3 {
        match self.outside(y) {
            None => Vec3::from(self.interp_inside(y, false).val),
            Some(yb) => {
                let vb = Vec3::from(self.interp_inside(&yb, false).val);
                vb * far_factor(y, &yb, self.far_exponent)
            }
        }
    }

    pub fn value_jac(&self, y: &Vec3) -> (Vec3, Mat3) {
        match self.outside(y) {
            None => {
                let o = self.interp_inside(y, false);
                (Vec3::from(o.val), Mat3::from_fn(|i, j| o.grad[i][j]))
            }
            Some(_) => extrapolated_jac(|p| self.value(p), y),
        }
    }
}

pub(crate) fn far_factor(y: &Vec3, yb: &Vec3, k: f64) -> f64 {
    let nb = yb.norm();
    if k == 0.0 || nb == 0.0 {
        1.0
    } else {
        (y.norm() / nb).powf(k)
    }
}

/// Jacobian of an extrapolated field by central differences.
pub(crate) fn extrapolated_jac(f: impl Fn(&Vec3) -> Vec3, y: &Vec3) -> (Vec3, Mat3) {
    let v = f(y);
    let h = 1e-6 * y.norm().max(1.0);
    let mut j = Mat3::zeros();
    for c in 0..3 {
        let mut yp = *y;
        let mut ym = *y;
        yp[c] += h;
        ym[c] -= h;
        let d = (f(&yp) - f(&ym)) / (2.0 * h);
        for i in 0..3 {
            j[(i, c)] = d[i];
        }
    }
    (v, j)
}

/// Gridded scalar on the meridional half-plane with bicubic interpolation.
#[derive(Clone, Debug)]
pub struct Sampled2 {
    pub grid: Grid2,
    pub data: Vec<f64>,
    pub interp: Interp,
}

impl Sampled2 {
    pub fn new(grid: Grid2, data: Vec<f64>, interp: Interp) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidField(format!("{} entries for a grid of {}", data.len(), grid.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite entries".into()));
        }
        Ok(Sampled2 { grid, data, interp })
    }

    /// Value, d/dr, d/dz. Outside the grid the nearest grid value is used (constant extension).
    pub fn eval(&self, r: f64, z: f64) -> (f64, f64, f64) {
        let g = &self.grid;
        let (r1, z1) = g.upper();
        let rc = r.clamp(g.origin[0], r1);
        let zc = z.clamp(g.origin[1], z1);
        let sr = stencil_1d(rc, g.origin[0], g.spacing[0], g.dims[0], false, self.interp);
        let sz = stencil_1d(zc, g.origin[1], g.spacing[1], g.dims[1], false, self.interp);
        let (mut v, mut dr, mut dz) = (0.0, 0.0, 0.0);
        for a in 0..sr.len {
            for b in 0..sz.len {
                let f = self.data[g.index(sr.idx[a], sz.idx[b])];
                v += sr.w[a] * sz.w[b] * f;
                dr += sr.dw[a] * sz.w[b] * f;
                dz += sr.w[a] * sz.dw[b] * f;
            }
        }
        if rc != r || zc != z {
            (v, 0.0, 0.0)
        } else {
            (v, dr, dz)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let g = Grid3::cube(1.0, 9).unwrap();
        let f = |p: Vec3| Vec3::new(p[0].powi(3) - 2.0 * p[1] * p[2] + p[2] * p[2] * p[0], 0.0, 0.0);
        let s = SampledField::from_fn(g, Rank::Scalar, Interp::Cubic, f);
        for y in [Vec3::new(0.13, -0.41, 0.77), Vec3::new(-0.99, 0.5, 0.05)] {
            let o = s.interp_inside(&y, true);
            assert!((o.val[0] - f(y)[0]).abs() < 1e-12);
            let gx = 3.0 * y[0] * y[0] + y[2] * y[2];
            let gy = -2.0 * y[2];
            let gz = -2.0 * y[1] + 2.0 * y[2] * y[0];
            assert!((o.grad[0][0] - gx).abs() < 1e-11);
            assert!((o.grad[0][1] - gy).abs() < 1e-11);
            assert!((o.grad[0][2] - gz).abs() < 1e-11);
            assert!((o.hess[0][0][0] - 6.0 * y[0]).abs() < 1e-9);
            assert!((o.hess[0][1][2] + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn far_extension_follows_power_law() {
        let g = Grid3::cube(1.0, 5).unwrap();
        let s = SampledField::from_fn(g, Rank::Scalar, Interp::Cubic, |_| Vec3::new(2.0, 0.0, 0.0)).with_far_exponent(-2.0);
        let v = s.value(&Vec3::new(2.0, 0.0, 0.0));
        assert!((v[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn periodic_interpolation_wraps() {
        let g = Grid3::periodic_cube(std::f64::consts::PI, 32).unwrap();
        let s = SampledField::from_fn(g, Rank::Scalar, Interp::Cubic, |p| Vec3::new(p[0].sin(), 0.0, 0.0));
        let y = Vec3::new(3.1, 0.0, 0.0);
        assert!((s.value(&y)[0] - 3.1f64.sin()).abs() < 1e-4);
    }
}
