//! FFT utilities on periodic grids: spectral derivatives, Poisson solves and
//! Biot–Savart velocity reconstruction.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{Boundary, Grid3};
use crate::error::{Error, Result};
use crate::numerics::{Mat3, Vec3};

/// In-place 3D FFT (unnormalized forward, normalized inverse).
pub fn fft3(data: &mut [Complex64], dims: [usize; 3], inverse: bool) {
    let mut planner = FftPlanner::new();
    for axis in 0..3 {
        let n = dims[axis];
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let stride = match axis {
            0 => dims[1] * dims[2],
            1 => dims[2],
            _ => 1,
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let lines = data.len() / n;
        for l in 0..lines {
            // decompose l into the two indices orthogonal to `axis`
            let base = match axis {
                0 => l,
                1 => (l / dims[2]) * dims[1] * dims[2] + l % dims[2],
                _ => l * dims[2],
            };
            for m in 0..n {
                line[m] = data[base + m * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for m in 0..n {
                data[base + m * stride] = line[m];
            }
        }
    }
    if inverse {
        let s = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Angular wavenumbers in FFT order; the Nyquist entry (even n) is reported
/// separately so odd derivatives can zero it.
pub fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let l = n as f64 * h;
    (0..n)
        .map(|m| {
            let mm = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
            2.0 * std::f64::consts::PI * mm as f64 / l
        })
        .collect()
}

fn is_nyquist(m: usize, n: usize) -> bool {
    n % 2 == 0 && m == n / 2
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn require_periodic(grid: &Grid3) -> Result<()> {
    if grid.boundary != Boundary::Periodic {
        return Err(Error::SpectralNeedsPeriodic);
    }
    Ok(())
}

/// d/dy_axis of a periodic sample array.
pub fn spectral_derivative(grid: &Grid3, data: &[f64], axis: usize) -> Result<Vec<f64>> {
    require_periodic(grid)?;
    let mut c = to_complex(data);
    fft3(&mut c, grid.dims, false);
    let k = wavenumbers(grid.dims[axis], grid.spacing[axis]);
    for (n, v) in c.iter_mut().enumerate() {
        let idx = grid.unindex(n)[axis];
        if is_nyquist(idx, grid.dims[axis]) {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= Complex64::new(0.0, k[idx]);
        }
    }
    fft3(&mut c, grid.dims, true);
    Ok(c.iter().map(|v| v.re).collect())
}

/// Solves lap(u) = rhs on a periodic box; the mean of u is zero.
pub fn solve_poisson_periodic(grid: &Grid3, rhs: &[f64]) -> Result<Vec<f64>> {
    require_periodic(grid)?;
    let mut c = to_complex(rhs);
    fft3(&mut c, grid.dims, false);
    let ks: Vec<Vec<f64>> = (0..3).map(|a| wavenumbers(grid.dims[a], grid.spacing[a])).collect();
    for (n, v) in c.iter_mut().enumerate() {
        let [i, j, l] = grid.unindex(n);
        let k2 = ks[0][i].powi(2) + ks[1][j].powi(2) + ks[2][l].powi(2);
        *v = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { -*v / k2 };
    }
    fft3(&mut c, grid.dims, true);
    Ok(c.iter().map(|v| v.re).collect())
}

/// Velocity of a periodic vorticity field as a trigonometric series,
/// evaluable exactly at arbitrary points.
#[derive(Debug)]
pub struct SpectralVelocity {
    pub grid: Grid3,
    /// Fourier coefficients of u, scaled by 1/N so that u(x) = sum uhat e^{ik.(x-x0)}.
    uhat: [Vec<Complex64>; 3],
    ks: [Vec<f64>; 3],
}

/// Shared handle with an optional similarity rescaling lambda: u_l(y) = amp * u(y / lambda).
#[derive(Clone, Debug)]
pub struct SpectralField {
    pub base: Arc<SpectralVelocity>,
    pub lambda: f64,
    pub amp: f64,
}

impl SpectralVelocity {
    /// Biot–Savart: u = curl psi with -lap(psi) = omega; also returns psi on the grid.
    pub fn from_vorticity(grid: &Grid3, omega: [&[f64]; 3]) -> Result<(Self, [Vec<f64>; 3])> {
        require_periodic(grid)?;
        let ks: [Vec<f64>; 3] = [
            wavenumbers(grid.dims[0], grid.spacing[0]),
            wavenumbers(grid.dims[1], grid.spacing[1]),
            wavenumbers(grid.dims[2], grid.spacing[2]),
        ];
        let mut what: Vec<Vec<Complex64>> = omega
            .iter()
            .map(|w| {
                let mut c = to_complex(w);
                fft3(&mut c, grid.dims, false);
                c
            })
            .collect();
        let ntot = grid.len() as f64;
        let mut uhat = [
            vec![Complex64::new(0.0, 0.0); grid.len()],
            vec![Complex64::new(0.0, 0.0); grid.len()],
            vec![Complex64::new(0.0, 0.0); grid.len()],
        ];
        for n in 0..grid.len() {
            let [i, j, l] = grid.unindex(n);
            let nyq = is_nyquist(i, grid.dims[0]) || is_nyquist(j, grid.dims[1]) || is_nyquist(l, grid.dims[2]);
            let k = [ks[0][i], ks[1][j], ks[2][l]];
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 || nyq {
                for w in what.iter_mut() {
                    w[n] = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            for w in what.iter_mut() {
                w[n] /= k2; // psi hat
            }
            let p = [what[0][n], what[1][n], what[2][n]];
            let ik = |a: usize| Complex64::new(0.0, k[a]);
            // u = i k x psi
            uhat[0][n] = (ik(1) * p[2] - ik(2) * p[1]) / ntot;
            uhat[1][n] = (ik(2) * p[0] - ik(0) * p[2]) / ntot;
            uhat[2][n] = (ik(0) * p[1] - ik(1) * p[0]) / ntot;
        }
        let psi: Vec<Vec<f64>> = what
            .into_iter()
            .map(|mut c| {
                fft3(&mut c, grid.dims, true);
                c.iter().map(|v| v.re).collect()
            })
            .collect();
        let psi: [Vec<f64>; 3] = psi.try_into().expect("three components");
        Ok((SpectralVelocity { grid: grid.clone(), uhat, ks }, psi))
    }

    /// Value and Jacobian by direct summation of the series at y.
    pub fn eval(&self, y: &Vec3) -> (Vec3, Mat3) {
        let g = &self.grid;
        let phase = |a: usize| -> Vec<Complex64> {
            let x = y[a] - g.origin[a];
            self.ks[a].iter().map(|&k| Complex64::from_polar(1.0, k * x)).collect()
        };
        let (ex, ey, ez) = (phase(0), phase(1), phase(2));
        let (n1, n2) = (g.dims[1], g.dims[2]);
        let mut val = [Complex64::new(0.0, 0.0); 3];
        let mut jac = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..g.dims[0] {
            for j in 0..n1 {
                let exy = ex[i] * ey[j];
                let base = (i * n1 + j) * n2;
                let mut a = [Complex64::new(0.0, 0.0); 3];
                let mut b = [Complex64::new(0.0, 0.0); 3];
                for l in 0..n2 {
                    let e = ez[l];
                    let kz = self.ks[2][l];
                    for c in 0..3 {
                        let t = self.uhat[c][base + l] * e;
                        a[c] += t;
                        b[c] += t * kz;
                    }
                }
                let (kx, ky) = (self.ks[0][i], self.ks[1][j]);
                for c in 0..3 {
                    let av = a[c] * exy;
                    val[c] += av;
                    jac[c][0] += av * kx;
                    jac[c][1] += av * ky;
                    jac[c][2] += b[c] * exy;
                }
            }
        }
        let v = Vec3::new(val[0].re, val[1].re, val[2].re);
        // d/dx e^{ikx} = ik e^{ikx}: real part of i*z is -Im z
        let m = Mat3::from_fn(|c, d| -jac[c][d].im);
        (v, m)
    }
}

impl SpectralField {
    pub fn new(base: SpectralVelocity) -> Self {
        SpectralField { base: Arc::new(base), lambda: 1.0, amp: 1.0 }
    }

    pub fn eval(&self, y: &Vec3) -> (Vec3, Mat3) {
        let (v, j) = self.base.eval(&(y / self.lambda));
        (v * self.amp, j * (self.amp / self.lambda))
    }
}
