//! Small numerical kernels shared across modules.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pnm1) = (p1, p0);
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Deterministic quasi-uniform directions on the unit sphere (Fibonacci spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..500 {
        if (b - a).abs() <= rel_tol * (c.abs() + d.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Ordinary least squares fit y = intercept + slope x.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub rms_residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = (n - 2.0).max(1.0);
    LineFit {
        slope,
        intercept,
        slope_stderr: (ss / dof / sxx).sqrt(),
        rms_residual: (ss / n).sqrt(),
    }
}

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), quintic bridge with vanishing
/// first and second derivatives at both ends.
pub fn cutoff(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let t = s - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Compact C-infinity bump exp(1 - 1/(1 - s)) of s = |x|^2/rho^2, equal to 1 at s = 0.
pub fn bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 8, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let sw: f64 = w.iter().sum();
            assert!((sw - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg as i32)).sum();
            assert!((q - exact).abs() < 1e-13, "n={n}");
            let even = 2 * n - 2;
            let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(even as i32)).sum();
            assert!((q - 2.0 / (even as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn fibonacci_points_are_unit_and_balanced() {
        let p = fibonacci_sphere(512);
        let c: Vec3 = p.iter().sum();
        assert!(p.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
        assert!(c.norm() / 512.0 < 1e-2);
    }

    #[test]
    fn cutoff_is_monotone_and_c2() {
        let h = 1e-4;
        let mut prev = 1.0;
        for i in 0..=3000 {
            let s = i as f64 * 1e-3;
            let c = cutoff(s);
            assert!(c <= prev + 1e-15);
            prev = c;
        }
        for s in [1.0, 2.0] {
            let d2 = (cutoff(s + h) - 2.0 * cutoff(s) + cutoff(s - h)) / (h * h);
            assert!(d2.abs() < 1e-2);
        }
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section(|x| (x - 1.3).powi(2), 0.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-8);
    }
}
