//! Closed-form exponent bounds and regularity criteria on time series.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::numerics::{fit_line, golden_section, LineFit};

/// Samples of a nonnegative quantity on [0, T*).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub t_star: f64,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, t_star: f64) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::TimeSeries(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.len() < 2 {
            return Err(Error::TimeSeries("need at least two samples".into()));
        }
        if !t_star.is_finite() {
            return Err(Error::TimeSeries("blowup time must be finite".into()));
        }
        if let Some(w) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::TimeSeries(format!("times not strictly increasing at sample {}", w + 1)));
        }
        if times.iter().any(|t| !t.is_finite() || *t >= t_star) {
            return Err(Error::TimeSeries(format!("all times must lie below T* = {t_star}")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::TimeSeries(format!("value {} at sample {i} is not a finite nonnegative number", values[i])));
        }
        Ok(TimeSeries { times, values, t_star })
    }

    /// Two whitespace- or comma-separated columns (time, value); `#` starts a comment.
    pub fn parse(text: &str, t_star: f64) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::TimeSeries(format!("line {}: expected two columns", ln + 1)));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::TimeSeries(format!("line {}: {e}", ln + 1)));
            times.push(num(cols[0])?);
            values.push(num(cols[1])?);
        }
        TimeSeries::new(times, values, t_star)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn same_base(&self, other: &TimeSeries) -> bool {
        self.t_star == other.t_star && self.times == other.times
    }
}

/// Lower bound p/(p+3) on the similarity exponent when u is bounded in L^p.
pub fn gamma_lower_bound(p: f64) -> Result<f64> {
    if p.is_nan() || p < 2.0 {
        return Err(param("p", format!("the bound holds for p >= 2, got {p}")));
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    Ok(p / (p + 3.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Finite,
    Divergent,
    /// The 3-sigma band of the fitted exponent contains the critical one.
    Inconclusive,
}

impl fmt::Display for Convergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convergence::Finite => "finite integral: no blowup possible",
            Convergence::Divergent => "divergent integral: consistent with blowup",
            Convergence::Inconclusive => "inconclusive: fit band straddles the critical exponent",
        })
    }
}

/// Exponents within this of the critical value count as critical.
pub const CRITICAL_SLACK: f64 = 1e-9;
/// Width of the confidence band in standard errors.
pub const BAND_SIGMAS: f64 = 3.0;

/// Power law v ~ c (T* - t)^exponent fitted on the last quartile.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn tail_fit(s: &TimeSeries, values: &[f64]) -> Result<TailFit> {
    let n = s.len();
    let start = (3 * n / 4).min(n.saturating_sub(3));
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in start..n {
        if values[i] > 0.0 {
            x.push((s.t_star - s.times[i]).ln());
            y.push(values[i].ln());
        }
    }
    if x.len() < 3 {
        return Err(Error::TimeSeries("need at least three positive samples in the last quartile".into()));
    }
    let LineFit { slope, slope_stderr, .. } = fit_line(&x, &y);
    Ok(TailFit { exponent: slope, stderr: if slope_stderr.is_finite() { slope_stderr } else { 0.0 }, samples: x.len() })
}

/// Classifies integrability of (T* - t)^(-rate) against the critical rate 1.
fn classify(rate: f64, band: f64) -> Convergence {
    if rate - band >= 1.0 - CRITICAL_SLACK {
        Convergence::Divergent
    } else if rate + band < 1.0 - CRITICAL_SLACK {
        Convergence::Finite
    } else {
        Convergence::Inconclusive
    }
}

fn trapezoid(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2).zip(v.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllMu {
    pub times: Vec<f64>,
    pub ell: Vec<f64>,
    /// Trapezoid estimate of the integral of ell^(-5/2) up to the last sample.
    pub integral: f64,
    /// ell ~ (T* - t)^exponent near T*.
    pub fit: TailFit,
    pub verdict: Convergence,
}

/// Critical length-scale exponent: ell^(-5/2) is integrable iff ell decays slower than (T*-t)^(2/5).
pub const CRITICAL_ELL_EXPONENT: f64 = 0.4;

/// Hoelder length scale min(L0, ([w]_mu / |u|_2)^(-2/(2mu+5))) and its -5/2 integral.
pub fn ell_mu_criterion(holder: &TimeSeries, energy: &TimeSeries, mu: f64, l0: f64) -> Result<EllMu> {
    if !holder.same_base(energy) {
        return Err(Error::TimeSeries("seminorm and energy series must share times and T*".into()));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(param("mu", format!("need 0 < mu < 1, got {mu}")));
    }
    if !(l0 > 0.0) {
        return Err(param("L0", format!("must be positive, got {l0}")));
    }
    if let Some(i) = energy.values.iter().position(|&v| v == 0.0) {
        return Err(Error::TimeSeries(format!("energy series vanishes at sample {i}")));
    }
    let q = -2.0 / (2.0 * mu + 5.0);
    let ell: Vec<f64> = holder.values.iter().zip(&energy.values).map(|(h, e)| l0.min((h / e).powf(q))).collect();
    let integrand: Vec<f64> = ell.iter().map(|l| l.powf(-2.5)).collect();
    let integral = trapezoid(&holder.times, &integrand);
    let fit = tail_fit(holder, &ell)?;
    // ell^(-5/2) ~ (T*-t)^(-5 s/2): compare 5s/2 with 1, i.e. s with 2/5
    let k = 1.0 / CRITICAL_ELL_EXPONENT;
    let verdict = classify(k * fit.exponent, k * BAND_SIGMAS * fit.stderr);
    Ok(EllMu { times: holder.times.clone(), ell, integral, fit, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConstants {
    pub c_in: f64,
    pub c_out: f64,
}

impl Default for SplitConstants {
    fn default() -> Self {
        SplitConstants { c_in: 1.0, c_out: 1.0 }
    }
}

/// B(R) = c_in R G + c_out R^(-1-3/p) E.
pub fn split_bound(c: SplitConstants, p: f64, g: f64, e: f64, r: f64) -> f64 {
    c.c_in * r * g + c.c_out * r.powf(-1.0 - 3.0 / p) * e
}

/// Minimizer of the split bound in closed form.
pub fn split_radius(c: SplitConstants, p: f64, g: f64, e: f64) -> f64 {
    ((1.0 + 3.0 / p) * c.c_out * e / (c.c_in * g)).powf(p / (2.0 * p + 3.0))
}

/// Optimal radius and bound by golden-section search in log R.
pub fn minimize_split(c: SplitConstants, p: f64, g: f64, e: f64) -> (f64, f64) {
    let f = |s: f64| split_bound(c, p, g, e, s.exp());
    // bracket the minimum by doubling outwards from R = 1
    let (mut lo, mut hi) = (-1.0, 1.0);
    while f(lo) < f(lo + 0.5) && lo > -700.0 {
        lo *= 2.0;
    }
    while f(hi) < f(hi - 0.5) && hi < 700.0 {
        hi *= 2.0;
    }
    let s = golden_section(f, lo, hi, 1e-15);
    (s.exp(), f(s))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaBound {
    pub times: Vec<f64>,
    pub radius: Vec<f64>,
    pub bound: Vec<f64>,
    /// max relative difference between searched and closed-form minimum values
    pub closed_form_mismatch: f64,
    /// Trapezoid integral of the bound (the BKM-type quantity).
    pub integral: f64,
    /// bound ~ (T* - t)^exponent near T*.
    pub fit: TailFit,
    pub verdict: Convergence,
}

/// Pointwise stretching bound optimized over the split radius at each time.
/// `gradw` samples sup|grad omega|, `up` samples |u|_{L^p}.
pub fn alpha_pointwise_bound(gradw: &TimeSeries, up: &TimeSeries, p: f64, c: SplitConstants) -> Result<AlphaBound> {
    if !gradw.same_base(up) {
        return Err(Error::TimeSeries("gradient and L^p series must share times and T*".into()));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(param("p", format!("need finite p >= 2, got {p}")));
    }
    if !(c.c_in > 0.0 && c.c_out > 0.0) {
        return Err(param("constants", "C_in and C_out must be positive"));
    }
    if gradw.values.iter().chain(&up.values).any(|&v| v <= 0.0) {
        return Err(Error::TimeSeries("bound needs strictly positive series".into()));
    }
    let mut radius = Vec::with_capacity(gradw.len());
    let mut bound = Vec::with_capacity(gradw.len());
    let mut mismatch: f64 = 0.0;
    for (&g, &e) in gradw.values.iter().zip(&up.values) {
        let (r, b) = minimize_split(c, p, g, e);
        let exact = split_bound(c, p, g, e, split_radius(c, p, g, e));
        mismatch = mismatch.max((b - exact).abs() / exact);
        radius.push(r);
        bound.push(b);
    }
    let integral = trapezoid(&gradw.times, &bound);
    let fit = tail_fit(gradw, &bound)?;
    let verdict = classify(-fit.exponent, BAND_SIGMAS * fit.stderr);
    Ok(AlphaBound { times: gradw.times.clone(), radius, bound, closed_form_mismatch: mismatch, integral, fit, verdict })
}

/// Outer budget and inner amplitude for the viscous split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViscousSplitSpec {
    /// L^4 L^2 budget of the outer vorticity.
    pub budget: f64,
    /// Inner amplitude constant.
    pub amplitude: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ViscousOutcome {
    /// Finite bound on the time integral of |omega|_2^4 over [0, 1].
    Bound { value: f64 },
    InnerDivergent,
}

impl fmt::Display for ViscousOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViscousOutcome::Bound { value } => write!(
                f,
                "bound {value}: regularity criterion met, no blowup; a viscous blowup of this shape needs gamma <= 1/2"
            ),
            ViscousOutcome::InnerDivergent => f.write_str("inner contribution divergent"),
        }
    }
}

pub fn viscous_criterion(spec: ViscousSplitSpec) -> Result<ViscousOutcome> {
    let ViscousSplitSpec { budget, amplitude, gamma } = spec;
    if !(budget >= 0.0) || !(amplitude >= 0.0) || !(gamma > 0.0) {
        return Err(param("viscous", "need budget >= 0, amplitude >= 0, gamma > 0"));
    }
    if amplitude == 0.0 {
        return Ok(ViscousOutcome::Bound { value: 16.0 * budget });
    }
    if gamma <= 0.5 {
        return Ok(ViscousOutcome::InnerDivergent);
    }
    Ok(ViscousOutcome::Bound { value: 16.0 * (budget + amplitude.powi(4) / (6.0 * gamma - 3.0)) })
}

/// Time base accumulating towards T* = 1: 1 - 10^(-k/per_decade) for k in 0..decades*per_decade.
pub fn geometric_times(decades: usize, per_decade: usize) -> Vec<f64> {
    (0..=decades * per_decade).map(|k| 1.0 - 10f64.powf(-(k as f64) / per_decade as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> TimeSeries {
        let t = geometric_times(8, 10);
        let v = t.iter().map(|&t| f(t)).collect();
        TimeSeries::new(t, v, 1.0).unwrap()
    }

    #[test]
    fn gamma_bounds() {
        assert_eq!(gamma_lower_bound(2.0).unwrap(), 0.4);
        assert_eq!(gamma_lower_bound(3.0).unwrap(), 0.5);
        assert_eq!(gamma_lower_bound(f64::INFINITY).unwrap(), 1.0);
        assert!(gamma_lower_bound(1.5).is_err());
    }

    #[test]
    fn constant_length_scale() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.0099).collect();
        let one = TimeSeries::new(t.clone(), vec![1.0; t.len()], 1.0).unwrap();
        let r = ell_mu_criterion(&one, &one, 0.5, 1.0).unwrap();
        assert!(r.ell.iter().all(|&l| l == 1.0));
        assert!((r.integral - t.last().unwrap()).abs() < 1e-14);
        assert_eq!(r.verdict, Convergence::Finite);
    }

    fn power_law_ell(gamma: f64, mu: f64) -> EllMu {
        let q = gamma * (2.0 * mu + 5.0) / 2.0;
        let holder = series(|t| (1.0 - t).powf(-q));
        let energy = series(|_| 1.0);
        ell_mu_criterion(&holder, &energy, mu, 1.0).unwrap()
    }

    #[test]
    fn ell_mu_dichotomy() {
        assert_eq!(power_law_ell(0.3, 0.5).verdict, Convergence::Finite);
        assert_eq!(power_law_ell(0.35, 0.5).verdict, Convergence::Finite);
        assert_eq!(power_law_ell(0.4, 0.5).verdict, Convergence::Divergent);
        assert_eq!(power_law_ell(0.45, 0.25).verdict, Convergence::Divergent);
        assert!((power_law_ell(0.3, 0.5).fit.exponent - 0.3).abs() < 1e-10);
    }

    #[test]
    fn noisy_fit_near_critical_is_inconclusive() {
        let t = geometric_times(2, 4);
        let h: Vec<f64> = t.iter().enumerate().map(|(i, &t)| (1.0 - t).powf(-1.2) * (1.0 + 0.05 * (-1f64).powi(i as i32))).collect();
        let holder = TimeSeries::new(t.clone(), h, 1.0).unwrap();
        let energy = TimeSeries::new(t.clone(), vec![1.0; t.len()], 1.0).unwrap();
        assert_eq!(ell_mu_criterion(&holder, &energy, 0.5, 1.0).unwrap().verdict, Convergence::Inconclusive);
    }

    #[test]
    fn ell_mu_rejects_zero_energy() {
        let a = series(|_| 1.0);
        let mut b = a.clone();
        b.values[3] = 0.0;
        assert!(ell_mu_criterion(&a, &b, 0.5, 1.0).is_err());
    }

    #[test]
    fn split_minimum_matches_closed_form() {
        let c = SplitConstants::default();
        let (r, b) = minimize_split(c, 2.0, 1.0, 1.0);
        let rs = 2.5f64.powf(2.0 / 7.0);
        assert!((split_radius(c, 2.0, 1.0, 1.0) - rs).abs() < 1e-15);
        let exact = split_bound(c, 2.0, 1.0, 1.0, rs);
        assert!((b - exact).abs() <= 1e-8 * exact);
        assert!((r - rs).abs() <= 1e-6 * rs);
    }

    #[test]
    fn alpha_bound_scaling() {
        let run = |gamma: f64| {
            let g = series(|t| (1.0 - t).powf(-(1.0 + gamma)));
            let e = series(|_| 1.0);
            alpha_pointwise_bound(&g, &e, 2.0, SplitConstants::default()).unwrap()
        };
        let crit = run(0.4);
        assert!((crit.fit.exponent + 1.0).abs() < 1e-9);
        assert!(crit.closed_form_mismatch <= 1e-8);
        assert_eq!(crit.verdict, Convergence::Divergent);
        let sub = run(0.35);
        assert!((sub.fit.exponent + 5.0 * 1.35 / 7.0).abs() < 1e-9);
        assert_eq!(sub.verdict, Convergence::Finite);
    }

    #[test]
    fn viscous() {
        let v = |b, a, g| viscous_criterion(ViscousSplitSpec { budget: b, amplitude: a, gamma: g }).unwrap();
        match v(1.0, 1.0, 0.6) {
            ViscousOutcome::Bound { value } => assert!((value - 128.0 / 3.0).abs() < 1e-9),
            o => panic!("{o:?}"),
        }
        assert_eq!(v(1.0, 1.0, 0.5), ViscousOutcome::InnerDivergent);
        assert_eq!(v(2.0, 0.0, 0.3), ViscousOutcome::Bound { value: 32.0 });
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(TimeSeries::new(vec![0.0, 0.5], vec![1.0, -1.0], 1.0).is_err());
        let s = TimeSeries::parse("# t v\n0 1\n0.5, 2\n", 1.0).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0]);
    }
}
