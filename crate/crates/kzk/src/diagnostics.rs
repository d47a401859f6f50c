//! Observables recorded along a run.
//!
//! Everything here consumes the modal state directly, and every integral
//! that is quadratic in the solution is taken in mode space, where the
//! lateral quadrature is exact for the truncated dynamics; only genuinely
//! nonlinear integrands fall back to nodal sampling. The central object
//! is the weighted identity ledger: multiplying the equation by `2 u psi`
//! and integrating by parts over the half-strip gives
//!
//! ```text
//! d/dt iint u^2 psi
//!   + iint (5 u_xx^2 + 3 u_x^2 + u_y^2 - b u^2) psi'
//!   - iint (5 u_x^2 + u^2) psi'''
//!   + iint u^2 psi^(5)
//!   + psi(0) int u_xx(0,y)^2 dy
//!   = 2 iint f u psi + 2 iint G(u) psi'
//! ```
//!
//! with `G(u) = int_0^u theta g'(theta) dtheta`. The ledger samples every
//! term over a run and reports how well the two sides balance; with the
//! flat weight the identity collapses to the mass dissipation law.

use crate::grid::{Field, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::solver::{mu2_norm_sq, ForcingFn, SpectralState};
use crate::weights::WeightSpec;
use crate::{Error, Result};

/// Per-mode first difference in `x`, matching the field-level stencils.
fn dx1(col: &[f64], h: f64, i: usize) -> f64 {
    let n = col.len();
    if i == 0 {
        (-3.0 * col[0] + 4.0 * col[1] - col[2]) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * col[n - 1] - 4.0 * col[n - 2] + col[n - 3]) / (2.0 * h)
    } else {
        (col[i + 1] - col[i - 1]) / (2.0 * h)
    }
}

/// Per-mode second difference in `x`.
fn dx2(col: &[f64], h: f64, i: usize) -> f64 {
    let n = col.len();
    let h2 = h * h;
    if i == 0 {
        (2.0 * col[0] - 5.0 * col[1] + 4.0 * col[2] - col[3]) / h2
    } else if i == n - 1 {
        (2.0 * col[n - 1] - 5.0 * col[n - 2] + 4.0 * col[n - 3] - col[n - 4]) / h2
    } else {
        (col[i - 1] - 2.0 * col[i] + col[i + 1]) / h2
    }
}

/// Per-mode fourth difference in `x`, window shifted to stay in range.
fn dx4(col: &[f64], h: f64, i: usize) -> f64 {
    let n = col.len();
    let base = i.clamp(2, n - 3) - 2;
    let s = [1.0, -4.0, 6.0, -4.0, 1.0];
    let mut acc = 0.0;
    for (k, c) in s.iter().enumerate() {
        acc += c * col[base + k];
    }
    acc / h.powi(4)
}

fn mode_column(state: &SpectralState, l: usize) -> Vec<f64> {
    (0..state.nx()).map(|i| state.mode_row(i)[l]).collect()
}

/// `iint u^2 psi(x)`, with a flag that clears when the weight's dynamic
/// range over the grid is too large for the sum to carry full precision.
#[derive(Clone, Copy, Debug)]
pub struct WeightedMass {
    pub value: f64,
    pub reliable: bool,
}

pub fn weighted_mass(grid: &Grid, state: &SpectralState, w: &WeightSpec) -> WeightedMass {
    let mut acc = 0.0;
    let mut wmin = f64::INFINITY;
    let mut wmax = 0.0f64;
    for i in 0..grid.nx() {
        let psi = w.eval(grid.x(i), 0);
        wmin = wmin.min(psi);
        wmax = wmax.max(psi);
        let row = state.mode_row(i);
        let s: f64 = row.iter().map(|c| c * c).sum();
        acc += grid.wx(i) * psi * s;
    }
    WeightedMass { value: acc, reliable: wmax / wmin < 1e12 }
}

/// `iint (u_xx^2 + u_x^2 + u_y^2 - 2 g*(u))`, the conserved energy of the
/// unforced flow.
pub fn h1_energy(grid: &Grid, state: &SpectralState, nl: &Nonlinearity) -> f64 {
    let h = grid.dx();
    let mut acc = 0.0;
    for l in 0..grid.basis().count() {
        let col = mode_column(state, l);
        let lambda = grid.basis().lambda(l);
        for i in 0..grid.nx() {
            let q = dx2(&col, h, i).powi(2) + dx1(&col, h, i).powi(2) + lambda * col[i] * col[i];
            acc += grid.wx(i) * q;
        }
    }
    if !nl.is_linear() {
        let u = state.to_field(grid);
        acc -= 2.0 * u.integrate_with(grid, |v, _| nl.g_star(v));
    }
    acc
}

/// `iint (u_x^2 + u_y^2 + u^2) psi(x)`, the first-order weighted norm
/// whose decay the strong small-data estimate controls.
pub fn strong_weighted_norm(grid: &Grid, state: &SpectralState, w: &WeightSpec) -> f64 {
    let h = grid.dx();
    let mut acc = 0.0;
    for l in 0..grid.basis().count() {
        let col = mode_column(state, l);
        let lambda = grid.basis().lambda(l);
        for i in 0..grid.nx() {
            let q = dx1(&col, h, i).powi(2) + (1.0 + lambda) * col[i] * col[i];
            acc += grid.wx(i) * w.eval(grid.x(i), 0) * q;
        }
    }
    acc
}

/// Time integrals of interior-smoothness quantities against the derivative
/// weight: `int dt iint q^2 psi'` for `q` among `u_xx`, `u_y`, `u_xxxx`,
/// `u_yy`. Their boundedness is what the gained half and full derivatives
/// assert.
#[derive(Clone, Debug)]
pub struct WindowAccumulator {
    weight: WeightSpec,
    pub uxx: f64,
    pub uy: f64,
    pub uxxxx: f64,
    pub uyy: f64,
    last: Option<(f64, [f64; 4])>,
}

impl WindowAccumulator {
    pub fn new(weight: WeightSpec) -> Result<Self> {
        let dpsi = weight.derivative_weight()?;
        Ok(Self { weight: dpsi, uxx: 0.0, uy: 0.0, uxxxx: 0.0, uyy: 0.0, last: None })
    }

    fn instantaneous(&self, grid: &Grid, state: &SpectralState) -> [f64; 4] {
        let h = grid.dx();
        let mut out = [0.0; 4];
        for l in 0..grid.basis().count() {
            let col = mode_column(state, l);
            let lambda = grid.basis().lambda(l);
            for i in 0..grid.nx() {
                let wp = grid.wx(i) * self.weight.eval(grid.x(i), 0);
                let cc = col[i] * col[i];
                out[0] += wp * dx2(&col, h, i).powi(2);
                out[1] += wp * lambda * cc;
                out[2] += wp * dx4(&col, h, i).powi(2);
                out[3] += wp * lambda * lambda * cc;
            }
        }
        out
    }

    /// Fold in a sample at the state's current time (trapezoid in time).
    pub fn push(&mut self, grid: &Grid, state: &SpectralState) {
        let now = self.instantaneous(grid, state);
        if let Some((t0, prev)) = self.last {
            let half = 0.5 * (state.t - t0);
            self.uxx += half * (prev[0] + now[0]);
            self.uy += half * (prev[1] + now[1]);
            self.uxxxx += half * (prev[2] + now[2]);
            self.uyy += half * (prev[3] + now[3]);
        }
        self.last = Some((state.t, now));
    }
}

/// One sampled row of the weighted identity.
#[derive(Clone, Copy, Debug)]
struct IdentitySample {
    t: f64,
    weighted_mass: f64,
    /// Signed sum of every term moved to the left of the identity.
    flux: f64,
    /// Sum of the absolute term sizes, for normalization.
    gauge: f64,
}

/// Balance report for the weighted identity over a sampled window.
#[derive(Clone, Copy, Debug)]
pub struct IdentityResidual {
    /// Change of `iint u^2 psi` over the window.
    pub mass_change: f64,
    /// Time integral of every other left-hand term minus the right side.
    pub flux_integral: f64,
    /// `|mass_change + flux_integral|` over the total activity scale.
    pub relative: f64,
}

/// Samples both sides of the weighted identity along a run.
pub struct IdentityLedger {
    weight: WeightSpec,
    b: f64,
    nl: Nonlinearity,
    samples: Vec<IdentitySample>,
}

impl IdentityLedger {
    pub fn new(weight: WeightSpec, b: f64, nl: Nonlinearity) -> Self {
        Self { weight, b, nl, samples: Vec::new() }
    }

    /// Record a sample; `forcing` must be the same function the solver
    /// integrates, if any.
    pub fn push(&mut self, grid: &Grid, state: &SpectralState, forcing: Option<&ForcingFn>) {
        let h = grid.dx();
        let mut wm = 0.0;
        let mut flux = 0.0;
        let mut gauge = 0.0;
        for l in 0..grid.basis().count() {
            let col = mode_column(state, l);
            let lambda = grid.basis().lambda(l);
            for i in 0..grid.nx() {
                let x = grid.x(i);
                let c = grid.wx(i);
                let psi = self.weight.eval(x, 0);
                let dpsi = self.weight.eval(x, 1);
                let d3psi = self.weight.eval(x, 3);
                let d5psi = self.weight.eval(x, 5);
                let cc = col[i] * col[i];
                let sx2 = dx1(&col, h, i).powi(2);
                let sxx2 = dx2(&col, h, i).powi(2);
                wm += c * cc * psi;
                flux += c
                    * ((5.0 * sxx2 + 3.0 * sx2 + lambda * cc - self.b * cc) * dpsi
                        - (5.0 * sx2 + cc) * d3psi
                        + cc * d5psi);
                gauge += c
                    * ((5.0 * sxx2 + 3.0 * sx2 + lambda * cc + self.b.abs() * cc) * dpsi.abs()
                        + (5.0 * sx2 + cc) * d3psi.abs()
                        + cc * d5psi.abs());
            }
        }
        if forcing.is_some() || !self.nl.is_linear() {
            let u = state.to_field(grid);
            for i in 0..grid.nx() {
                let x = grid.x(i);
                let c = grid.wx(i);
                let psi = self.weight.eval(x, 0);
                let dpsi = self.weight.eval(x, 1);
                for (j, &qw) in grid.basis().quad_weights().iter().enumerate() {
                    let uu = u.get(i, j);
                    let g = 2.0 * self.nl.gp_u_star(uu) * dpsi;
                    flux -= c * qw * g;
                    gauge += c * qw * g.abs();
                    if let Some(f) = forcing {
                        let y = grid.basis().nodes()[j];
                        let fw = 2.0 * f(state.t, x, y) * uu * psi;
                        flux -= c * qw * fw;
                        gauge += c * qw * fw.abs();
                    }
                }
            }
        }
        let boundary = self.weight.eval(0.0, 0) * mu2_norm_sq(grid, state);
        flux += boundary;
        gauge += boundary;
        self.samples.push(IdentitySample { t: state.t, weighted_mass: wm, flux, gauge });
    }

    /// Balance over the full sampled window, trapezoid in time for the
    /// flux terms.
    pub fn residual(&self) -> Result<IdentityResidual> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "identity residual needs at least two samples".into(),
            ));
        }
        let first = self.samples.first().unwrap();
        let last = self.samples.last().unwrap();
        let mass_change = last.weighted_mass - first.weighted_mass;
        let mut flux_integral = 0.0;
        let mut gauge_integral = 0.0;
        for w in self.samples.windows(2) {
            let half = 0.5 * (w[1].t - w[0].t);
            flux_integral += half * (w[0].flux + w[1].flux);
            gauge_integral += half * (w[0].gauge + w[1].gauge);
        }
        let scale = mass_change.abs().max(gauge_integral).max(1e-300);
        Ok(IdentityResidual {
            mass_change,
            flux_integral,
            relative: (mass_change + flux_integral).abs() / scale,
        })
    }

    /// Keep every other sample, emulating a coarser sampling cadence.
    pub fn thinned(&self) -> Self {
        Self {
            weight: self.weight,
            b: self.b,
            nl: self.nl,
            samples: self.samples.iter().copied().step_by(2).collect(),
        }
    }
}

/// Constants of the small-data decay regime for a lateral family with
/// sharp-inequality constant `kappa` on width `l`.
#[derive(Clone, Copy, Debug)]
pub struct DecayConstants {
    /// Dissipation margin `pi^2 / (10 kappa l^2)`.
    pub beta: f64,
    /// Width threshold `pi / sqrt(20 kappa b)`; `None` when `b <= 0` poses
    /// no restriction.
    pub l0: Option<f64>,
    /// Largest admissible exponential weight rate.
    pub alpha0: f64,
}

pub fn decay_constants(kappa: f64, l: f64, b: f64) -> Result<DecayConstants> {
    if !(kappa > 0.0) || !(l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay constants need kappa > 0 and l > 0, got kappa={kappa}, l={l}"
        )));
    }
    let pi = std::f64::consts::PI;
    let beta = pi * pi / (10.0 * kappa * l * l);
    let l0 = if b > 0.0 { Some(pi / (20.0 * kappa * b).sqrt()) } else { None };

    // Largest alpha <= sqrt(1/10) with 8 alpha^2 + 32 alpha^4 <= beta.
    let cap = (0.1f64).sqrt();
    let admissible = |a: f64| 8.0 * a * a + 32.0 * a.powi(4) <= beta;
    let alpha0 = if admissible(cap) {
        cap
    } else {
        let mut lo = 0.0;
        let mut hi = cap;
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if admissible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(DecayConstants { beta, l0, alpha0 })
}

/// Exponential fit of a positive time series.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    /// Decay rate (positive when the series shrinks).
    pub rate: f64,
    pub rate_stderr: f64,
    /// Samples that survived the floor truncation.
    pub used: usize,
}

/// Least-squares slope of `ln v` against `t`, ignoring samples at or
/// below `floor` (where the series has hit noise).
pub fn decay_fit(times: &[f64], values: &[f64], floor: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::ShapeMismatch(format!(
            "decay fit needs equally long series, got {} and {}",
            times.len(),
            values.len()
        )));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > floor)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs at least 3 samples above the floor, got {n}"
        )));
    }
    let nf = n as f64;
    let tbar = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let vbar = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tbar).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tbar) * (p.1 - vbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("decay fit needs spread-out sample times".into()));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - vbar - slope * (p.0 - tbar)).powi(2)).sum();
    let stderr = if n > 2 { (ss_res / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(DecayFit { rate: -slope, rate_stderr: stderr, used: n })
}

/// Flat table of per-sample diagnostics, written as CSV.
pub struct Recorder {
    weights: Vec<WeightSpec>,
    nl: Nonlinearity,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Recorder {
    pub fn new(weights: Vec<WeightSpec>, nl: Nonlinearity) -> Self {
        let mut header = vec!["t".to_string(), "mass".to_string()];
        for w in &weights {
            header.push(format!("weighted_mass:{}", w.label()));
        }
        header.push("h1_energy".to_string());
        header.push("mu2_norm_sq".to_string());
        Self { weights, nl, header, rows: Vec::new() }
    }

    pub fn record(&mut self, grid: &Grid, state: &SpectralState) {
        let mut row = vec![state.t, state.mass(grid)];
        for w in &self.weights {
            row.push(weighted_mass(grid, state, w).value);
        }
        row.push(h1_energy(grid, state, &self.nl));
        row.push(mu2_norm_sq(grid, state));
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Convenience bundle: lifted field plus the common derived fields.
pub fn field_with_derivatives(grid: &Grid, state: &SpectralState) -> (Field, Field, Field, Field) {
    let u = state.to_field(grid);
    let ux = u.deriv_x(grid);
    let uxx = u.second_x(grid);
    let uy = u.deriv_y(grid);
    (u, ux, uxx, uy)
}
