//! Empirical verification of the interpolation and trace inequalities.
//!
//! Test functions are closed-form products of decaying `x`-profiles and
//! lateral eigenmodes, so every derivative is evaluated analytically and
//! the only discretization entering the checks is quadrature. Each check
//! computes the ratio of the two sides of an inequality over a seeded
//! random ensemble and reports the empirical constant (the largest ratio
//! observed); validity means the ratios stay finite and stable under
//! quadrature refinement.

use crate::eigenbasis::EigenBasis;
use crate::weights::WeightSpec;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exponent `s(m, q) = (2m+3)/8 - 3/(4q)` of the mixed-norm interpolation
/// inequality; `q = infinity` is the limit value.
pub fn interpolation_exponent(m: usize, q: f64) -> Result<f64> {
    let ok = match m {
        0 => q >= 2.0,
        1 => (2.0..=6.0).contains(&q),
        _ => false,
    };
    if !ok || q.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "interpolation exponent needs m=0, q in [2, inf] or m=1, q in [2, 6], got m={m}, q={q}"
        )));
    }
    let tail = if q.is_infinite() { 0.0 } else { 3.0 / (4.0 * q) };
    Ok((2.0 * m as f64 + 3.0) / 8.0 - tail)
}

/// Decaying profile along `x`.
#[derive(Clone, Copy, Debug)]
pub enum ProfileKind {
    Gaussian { center: f64, width: f64 },
    Exponential { rate: f64 },
}

impl ProfileKind {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            ProfileKind::Gaussian { center, width } => (-((x - center) / width).powi(2)).exp(),
            ProfileKind::Exponential { rate } => (-rate * x).exp(),
        }
    }

    fn d1(&self, x: f64) -> f64 {
        match *self {
            ProfileKind::Gaussian { center, width } => {
                -2.0 * (x - center) / (width * width) * self.eval(x)
            }
            ProfileKind::Exponential { rate } => -rate * self.eval(x),
        }
    }

    fn d2(&self, x: f64) -> f64 {
        match *self {
            ProfileKind::Gaussian { center, width } => {
                let w2 = width * width;
                (4.0 * (x - center).powi(2) / (w2 * w2) - 2.0 / w2) * self.eval(x)
            }
            ProfileKind::Exponential { rate } => rate * rate * self.eval(x),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Term {
    pub amp: f64,
    pub mode: usize,
    pub profile: ProfileKind,
}

/// Closed-form test function: a sum of profile-times-mode terms, with an
/// optional factor `1 - e^{-(x/delta)^2}` forcing a zero trace at `x = 0`.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub terms: Vec<Term>,
    pub vanish_delta: Option<f64>,
}

impl TestFunction {
    fn vanish(&self, x: f64) -> (f64, f64, f64) {
        match self.vanish_delta {
            None => (1.0, 0.0, 0.0),
            Some(d) => {
                let z = x / d;
                let e = (-z * z).exp();
                (1.0 - e, 2.0 * x / (d * d) * e, (2.0 / (d * d) - 4.0 * x * x / d.powi(4)) * e)
            }
        }
    }

    pub fn eval(&self, basis: &EigenBasis, x: f64, y: f64) -> f64 {
        let (v, _, _) = self.vanish(x);
        self.terms.iter().map(|t| t.amp * v * t.profile.eval(x) * basis.mode(t.mode).eval(y)).sum()
    }

    pub fn dx(&self, basis: &EigenBasis, x: f64, y: f64) -> f64 {
        let (v, dv, _) = self.vanish(x);
        self.terms
            .iter()
            .map(|t| {
                let p = t.profile.eval(x);
                let p1 = t.profile.d1(x);
                t.amp * (dv * p + v * p1) * basis.mode(t.mode).eval(y)
            })
            .sum()
    }

    pub fn dxx(&self, basis: &EigenBasis, x: f64, y: f64) -> f64 {
        let (v, dv, ddv) = self.vanish(x);
        self.terms
            .iter()
            .map(|t| {
                let p = t.profile.eval(x);
                let p1 = t.profile.d1(x);
                let p2 = t.profile.d2(x);
                t.amp * (ddv * p + 2.0 * dv * p1 + v * p2) * basis.mode(t.mode).eval(y)
            })
            .sum()
    }

    pub fn dy(&self, basis: &EigenBasis, x: f64, y: f64) -> f64 {
        let (v, _, _) = self.vanish(x);
        self.terms
            .iter()
            .map(|t| t.amp * v * t.profile.eval(x) * basis.mode(t.mode).eval_deriv(y))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let terms =
            self.terms.iter().map(|t| Term { amp: t.amp * factor, ..*t }).collect();
        Self { terms, vanish_delta: self.vanish_delta }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec {
    pub size: usize,
    pub seed: u64,
    pub max_terms: usize,
    /// Force a zero trace at `x = 0` (vanish factor on every sample).
    pub vanish_at_zero: bool,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { size: 200, seed: 42, max_terms: 4, vanish_at_zero: false }
    }
}

pub fn generate_ensemble(basis: &EigenBasis, spec: &EnsembleSpec) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.size)
        .map(|_| {
            let n = rng.gen_range(1..=spec.max_terms);
            let terms = (0..n)
                .map(|_| {
                    let mode = rng.gen_range(0..basis.count());
                    let amp = rng.gen_range(-1.0..1.0);
                    let profile = if rng.gen_bool(0.5) {
                        ProfileKind::Gaussian {
                            center: rng.gen_range(1.0..10.0),
                            width: rng.gen_range(0.6..2.5),
                        }
                    } else {
                        ProfileKind::Exponential { rate: rng.gen_range(0.4..1.2) }
                    };
                    Term { amp, mode, profile }
                })
                .collect();
            let vanish_delta = spec.vanish_at_zero.then(|| rng.gen_range(0.5..2.0));
            TestFunction { terms, vanish_delta }
        })
        .collect()
}

/// Quadrature resolution for the checks (trapezoid in both directions).
#[derive(Clone, Copy, Debug)]
pub struct LabGrid {
    pub x_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl LabGrid {
    pub fn new(x_max: f64, nx: usize, ny: usize) -> Self {
        Self { x_max, nx, ny }
    }

    /// Same domain at doubled resolution, for stability studies.
    pub fn refined(&self) -> Self {
        Self { x_max: self.x_max, nx: 2 * self.nx - 1, ny: 2 * self.ny - 1 }
    }

    fn xs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.x_max / (self.nx - 1) as f64;
        (0..self.nx).map(move |i| {
            let w = if i == 0 || i == self.nx - 1 { 0.5 * h } else { h };
            (h * i as f64, w)
        })
    }

    fn ys(&self, l: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = l / (self.ny - 1) as f64;
        (0..self.ny).map(move |j| {
            let w = if j == 0 || j == self.ny - 1 { 0.5 * h } else { h };
            (h * j as f64, w)
        })
    }
}

/// Ratio of the two sides of the mixed-norm interpolation inequality for
/// one function given by closed-form derivatives.
#[allow(clippy::too_many_arguments)]
pub fn interpolation_ratio(
    m: usize,
    q: f64,
    psi1: &WeightSpec,
    psi2: &WeightSpec,
    l: f64,
    lab: &LabGrid,
    f: impl Fn(f64, f64) -> f64,
    fx: impl Fn(f64, f64) -> f64,
    fxx: impl Fn(f64, f64) -> f64,
    fy: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let s = interpolation_exponent(m, q)?;
    let mut lhs_pow = 0.0f64;
    let mut lhs_sup = 0.0f64;
    let mut rhs_a = 0.0;
    let mut rhs_b = 0.0;
    for (x, wx) in lab.xs() {
        let p1 = psi1.eval(x, 0);
        let p2 = psi2.eval(x, 0);
        let wmix = p1.powf(s) * p2.powf(0.5 - s);
        for (y, wy) in lab.ys(l) {
            let v = f(x, y);
            let d = if m == 0 { v } else { fx(x, y) };
            let weighted = d.abs() * wmix;
            if q.is_infinite() {
                lhs_sup = lhs_sup.max(weighted);
            } else {
                lhs_pow += wx * wy * weighted.powf(q);
            }
            let grad = fxx(x, y).abs() + fy(x, y).abs() + v.abs();
            rhs_a += wx * wy * grad * grad * p1;
            rhs_b += wx * wy * v * v * p2;
        }
    }
    let lhs = if q.is_infinite() { lhs_sup } else { lhs_pow.powf(1.0 / q) };
    let rhs = rhs_a.sqrt().powf(2.0 * s) * rhs_b.sqrt().powf(1.0 - 2.0 * s);
    if rhs == 0.0 {
        if lhs == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InvalidParameter(
            "degenerate test function: zero right side with nonzero left side".into(),
        ));
    }
    let ratio = lhs / rhs;
    if !ratio.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite interpolation ratio {ratio}")));
    }
    Ok(ratio)
}

/// Ratios for the first-derivative bound and the boundary-slope trace
/// bound: each left side over its geometric-mean-plus-mass right side.
pub fn gradient_trace_ratios(
    psi: &WeightSpec,
    l: f64,
    lab: &LabGrid,
    f: impl Fn(f64, f64) -> f64,
    fx: impl Fn(f64, f64) -> f64,
    fxx: impl Fn(f64, f64) -> f64,
) -> Result<[f64; 2]> {
    let mut ix = 0.0;
    let mut ixx = 0.0;
    let mut i0 = 0.0;
    let mut trace = 0.0;
    for (x, wx) in lab.xs() {
        let p = psi.eval(x, 0);
        for (y, wy) in lab.ys(l) {
            ix += wx * wy * fx(x, y).powi(2) * p;
            ixx += wx * wy * fxx(x, y).powi(2) * p;
            i0 += wx * wy * f(x, y).powi(2) * p;
        }
    }
    for (y, wy) in lab.ys(l) {
        trace += wy * fx(0.0, y).powi(2);
    }
    if i0 == 0.0 {
        if ix == 0.0 && trace == 0.0 {
            return Ok([0.0, 0.0]);
        }
        return Err(Error::InvalidParameter(
            "degenerate test function: zero mass with nonzero derivatives".into(),
        ));
    }
    let grad = ix / ((ixx * i0).sqrt() + i0);
    let slope = trace / (ixx.powf(0.75) * i0.powf(0.25) + i0);
    if !grad.is_finite() || !slope.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite gradient/trace ratios {grad}, {slope}"
        )));
    }
    Ok([grad, slope])
}

/// Sup-norm ratio on the unit box `(0,1) x (0,L)`.
pub fn box_sup_ratio(
    l: f64,
    ny: usize,
    f: impl Fn(f64, f64) -> f64,
    fxx: impl Fn(f64, f64) -> f64,
    fy: impl Fn(f64, f64) -> f64,
) -> f64 {
    let box_lab = LabGrid::new(1.0, ny, ny);
    let mut sup = 0.0f64;
    let mut a = 0.0;
    let mut b = 0.0;
    for (x, wx) in box_lab.xs() {
        for (y, wy) in box_lab.ys(l) {
            let v = f(x, y);
            sup = sup.max(v.abs());
            a += wx * wy * (fxx(x, y).powi(2) + fy(x, y).powi(2) + v * v);
            b += wx * wy * v * v;
        }
    }
    if b == 0.0 {
        return 0.0;
    }
    sup / (a.powf(0.375) * b.powf(0.125))
}

/// Sixth-norm ratio of the slope over the half-strip.
pub fn slope_l6_ratio(
    l: f64,
    lab: &LabGrid,
    f: impl Fn(f64, f64) -> f64,
    fx: impl Fn(f64, f64) -> f64,
    fxx: impl Fn(f64, f64) -> f64,
    fy: impl Fn(f64, f64) -> f64,
) -> f64 {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (x, wx) in lab.xs() {
        for (y, wy) in lab.ys(l) {
            let v = f(x, y);
            lhs += wx * wy * fx(x, y).powi(6);
            rhs += wx * wy * (fxx(x, y).powi(2) + fy(x, y).powi(2) + v * v);
        }
    }
    if rhs == 0.0 {
        return 0.0;
    }
    lhs.powf(1.0 / 6.0) / rhs.sqrt()
}

/// Empirical-constant report: per-sample ratios and their maximum.
#[derive(Clone, Debug)]
pub struct RatioReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

impl RatioReport {
    fn collect(ratios: Vec<f64>) -> Self {
        let max_ratio = ratios.iter().fold(0.0f64, |a, &b| a.max(b));
        Self { ratios, max_ratio }
    }
}

/// Mixed-norm interpolation check over an ensemble.
#[allow(clippy::too_many_arguments)]
pub fn interpolation_check(
    m: usize,
    q: f64,
    psi1: &WeightSpec,
    psi2: &WeightSpec,
    basis: &EigenBasis,
    fns: &[TestFunction],
    lab: &LabGrid,
) -> Result<RatioReport> {
    let l = basis.length;
    let mut ratios = Vec::with_capacity(fns.len());
    for tf in fns {
        ratios.push(interpolation_ratio(
            m,
            q,
            psi1,
            psi2,
            l,
            lab,
            |x, y| tf.eval(basis, x, y),
            |x, y| tf.dx(basis, x, y),
            |x, y| tf.dxx(basis, x, y),
            |x, y| tf.dy(basis, x, y),
        )?);
    }
    Ok(RatioReport::collect(ratios))
}

/// First-derivative and boundary-slope checks over an ensemble (no zero
/// trace required of the samples).
pub fn gradient_and_trace_check(
    psi: &WeightSpec,
    basis: &EigenBasis,
    fns: &[TestFunction],
    lab: &LabGrid,
) -> Result<(RatioReport, RatioReport)> {
    let l = basis.length;
    let mut grad = Vec::with_capacity(fns.len());
    let mut slope = Vec::with_capacity(fns.len());
    for tf in fns {
        let [g, s] = gradient_trace_ratios(
            psi,
            l,
            lab,
            |x, y| tf.eval(basis, x, y),
            |x, y| tf.dx(basis, x, y),
            |x, y| tf.dxx(basis, x, y),
        )?;
        grad.push(g);
        slope.push(s);
    }
    Ok((RatioReport::collect(grad), RatioReport::collect(slope)))
}

/// Box sup-norm and half-strip slope checks over an ensemble.
pub fn box_embedding_check(
    basis: &EigenBasis,
    fns: &[TestFunction],
    lab: &LabGrid,
) -> Result<(RatioReport, RatioReport)> {
    let l = basis.length;
    let mut sup = Vec::with_capacity(fns.len());
    let mut slope = Vec::with_capacity(fns.len());
    for tf in fns {
        sup.push(box_sup_ratio(
            l,
            lab.ny,
            |x, y| tf.eval(basis, x, y),
            |x, y| tf.dxx(basis, x, y),
            |x, y| tf.dy(basis, x, y),
        ));
        slope.push(slope_l6_ratio(
            l,
            lab,
            |x, y| tf.eval(basis, x, y),
            |x, y| tf.dx(basis, x, y),
            |x, y| tf.dxx(basis, x, y),
            |x, y| tf.dy(basis, x, y),
        ));
    }
    let sup = RatioReport::collect(sup);
    let slope = RatioReport::collect(slope);
    if !sup.max_ratio.is_finite() || !slope.max_ratio.is_finite() {
        return Err(Error::InvalidParameter("non-finite box-embedding ratio".into()));
    }
    Ok((sup, slope))
}
