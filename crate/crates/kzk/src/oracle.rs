//! Periodic-box reference solutions.
//!
//! On a periodic interval the linear flow diagonalizes: the coefficient of
//! `e^{i xi x} psi_l(y)` is multiplied by `e^{i omega t}` with
//! `omega = xi^5 + xi^3 + (lambda_l - b) xi`. That gives a spectrally exact
//! solution to compare the half-strip scheme against while the data stay
//! away from the strip's edges, plus an equally exact Duhamel term for
//! forced runs. A companion stepper integrates the nonlinear equation on
//! the same box with exact symbols, for conservation checks free of any
//! boundary or stencil error.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::eigenbasis::EigenBasis;
use crate::grid::{Field, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::{Error, Result};

/// Phase speed multiplier of `e^{i xi x}` under the linearized flow.
pub fn dispersion(xi: f64, lambda: f64, b: f64) -> f64 {
    xi.powi(5) + xi.powi(3) + xi * lambda - b * xi
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence up to degree n.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Shared periodic geometry: box `[x0, x0 + width)` resolved by `nxb`
/// points, lateral modes from `basis`. Spectra are stored mode-major, one
/// complex FFT line per lateral mode.
struct BoxTransform {
    x0: f64,
    width: f64,
    nxb: usize,
    basis: EigenBasis,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl BoxTransform {
    fn new(x0: f64, width: f64, nxb: usize, basis: EigenBasis) -> Result<Self> {
        if !(width > 0.0) || nxb < 16 || !nxb.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "periodic box needs positive width and an even nxb >= 16, got width={width}, nxb={nxb}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            x0,
            width,
            nxb,
            basis,
            fwd: planner.plan_fft_forward(nxb),
            inv: planner.plan_fft_inverse(nxb),
        })
    }

    fn dxb(&self) -> f64 {
        self.width / self.nxb as f64
    }

    fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dxb()
    }

    /// Signed wavenumber of FFT bin `k`.
    fn xi(&self, k: usize) -> f64 {
        let kk = if k <= self.nxb / 2 { k as f64 } else { k as f64 - self.nxb as f64 };
        2.0 * std::f64::consts::PI * kk / self.width
    }

    /// Sample a function on the box and transform to spectral lines.
    fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<Complex64> {
        let count = self.basis.count();
        let ny = self.basis.node_count();
        let mut lines = vec![Complex64::new(0.0, 0.0); count * self.nxb];
        let mut row = vec![0.0; ny];
        let mut modal = vec![0.0; count];
        for i in 0..self.nxb {
            let x = self.x(i);
            for (j, &y) in self.basis.nodes().iter().enumerate() {
                row[j] = f(x, y);
            }
            self.basis.forward_into(&row, &mut modal);
            for l in 0..count {
                lines[l * self.nxb + i] = Complex64::new(modal[l], 0.0);
            }
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()];
        for l in 0..count {
            self.fwd
                .process_with_scratch(&mut lines[l * self.nxb..(l + 1) * self.nxb], &mut scratch);
            // Band-limit: drop the unpaired highest bin.
            lines[l * self.nxb + self.nxb / 2] = Complex64::new(0.0, 0.0);
        }
        lines
    }

    /// Inverse transform to modal coefficients over the box nodes,
    /// mode-major real lines.
    fn lines_to_modal(&self, lines: &[Complex64]) -> Vec<f64> {
        let count = self.basis.count();
        let mut buf = lines.to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inv.get_inplace_scratch_len()];
        let mut out = vec![0.0; count * self.nxb];
        let norm = 1.0 / self.nxb as f64;
        for l in 0..count {
            let line = &mut buf[l * self.nxb..(l + 1) * self.nxb];
            self.inv.process_with_scratch(line, &mut scratch);
            for (i, v) in line.iter().enumerate() {
                out[l * self.nxb + i] = v.re * norm;
            }
        }
        out
    }

    /// Physical samples from modal lines, x-major over box and lateral
    /// quadrature nodes.
    fn modal_to_phys(&self, modal: &[f64]) -> Vec<f64> {
        let count = self.basis.count();
        let ny = self.basis.node_count();
        let mut out = vec![0.0; self.nxb * ny];
        let mut coef = vec![0.0; count];
        let mut row = vec![0.0; ny];
        for i in 0..self.nxb {
            for l in 0..count {
                coef[l] = modal[l * self.nxb + i];
            }
            self.basis.inverse_into(&coef, &mut row);
            out[i * ny..(i + 1) * ny].copy_from_slice(&row);
        }
        out
    }

    /// Evaluate modal lines on a strip grid whose nodes must lie on box
    /// nodes.
    fn modal_to_grid(&self, modal: &[f64], grid: &Grid) -> Result<Field> {
        let count = self.basis.count();
        let offset = (grid.x(0) - self.x0) / self.dxb();
        let stride = grid.dx() / self.dxb();
        let near = |v: f64| (v - v.round()).abs() < 1e-9 * (1.0 + v.abs());
        if !near(offset) || !near(stride) {
            return Err(Error::ShapeMismatch(format!(
                "strip grid is not aligned with the box nodes (offset {offset}, stride {stride})"
            )));
        }
        let (offset, stride) = (offset.round() as i64, stride.round() as i64);
        let mut out = Field::zeros(grid);
        let mut coef = vec![0.0; count];
        let mut row = vec![0.0; grid.ny()];
        for i in 0..grid.nx() {
            let bi = (offset + i as i64 * stride).rem_euclid(self.nxb as i64) as usize;
            for l in 0..count {
                coef[l] = modal[l * self.nxb + bi];
            }
            self.basis.inverse_into(&coef, &mut row);
            for (j, &v) in row.iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// `iint u^2` of a stored spectrum, by Parseval in both directions.
    fn spectral_mass(&self, lines: &[Complex64]) -> f64 {
        let s: f64 = lines.iter().map(|c| c.norm_sqr()).sum();
        s * self.width / (self.nxb * self.nxb) as f64
    }
}

/// Spectrally exact solution of the linearized equation on a periodic box.
pub struct PeriodicOracle {
    bx: BoxTransform,
    b: f64,
    init: Vec<Complex64>,
}

impl PeriodicOracle {
    pub fn new(x0: f64, width: f64, nxb: usize, basis: EigenBasis, b: f64) -> Result<Self> {
        let bx = BoxTransform::new(x0, width, nxb, basis)?;
        let count = bx.basis.count();
        Ok(Self { bx, b, init: vec![Complex64::new(0.0, 0.0); count * nxb] })
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.bx.basis
    }

    pub fn box_dx(&self) -> f64 {
        self.bx.dxb()
    }

    pub fn set_initial(&mut self, f: impl Fn(f64, f64) -> f64) {
        self.init = self.bx.sample(f);
    }

    fn advanced(&self, t: f64) -> Vec<Complex64> {
        let count = self.bx.basis.count();
        let mut out = self.init.clone();
        for l in 0..count {
            let lambda = self.bx.basis.lambda(l);
            for k in 0..self.bx.nxb {
                let omega = dispersion(self.bx.xi(k), lambda, self.b);
                out[l * self.bx.nxb + k] *= Complex64::new(0.0, omega * t).exp();
            }
        }
        out
    }

    /// The free solution at time `t`, sampled on an aligned strip grid.
    pub fn field_on_grid(&self, grid: &Grid, t: f64) -> Result<Field> {
        let modal = self.bx.lines_to_modal(&self.advanced(t));
        self.bx.modal_to_grid(&modal, grid)
    }

    /// The free solution at time `t` on the box nodes themselves, x-major
    /// over box and lateral quadrature nodes.
    pub fn physical_at(&self, t: f64) -> Vec<f64> {
        let modal = self.bx.lines_to_modal(&self.advanced(t));
        self.bx.modal_to_phys(&modal)
    }

    /// The forced solution at time `t`: free evolution plus the Duhamel
    /// integral, the latter by `nq`-point Gauss-Legendre quadrature in time.
    pub fn forced_field_on_grid(
        &self,
        grid: &Grid,
        t: f64,
        f: impl Fn(f64, f64, f64) -> f64,
        nq: usize,
    ) -> Result<Field> {
        let count = self.bx.basis.count();
        let mut acc = self.advanced(t);
        let (nodes, weights) = gauss_legendre(nq);
        for (&zq, &wq) in nodes.iter().zip(&weights) {
            let s = 0.5 * t * (zq + 1.0);
            let fh = self.bx.sample(|x, y| f(s, x, y));
            let w = 0.5 * t * wq;
            for l in 0..count {
                let lambda = self.bx.basis.lambda(l);
                for k in 0..self.bx.nxb {
                    let omega = dispersion(self.bx.xi(k), lambda, self.b);
                    let phase = Complex64::new(0.0, omega * (t - s)).exp();
                    acc[l * self.bx.nxb + k] += w * phase * fh[l * self.bx.nxb + k];
                }
            }
        }
        let modal = self.bx.lines_to_modal(&acc);
        self.bx.modal_to_grid(&modal, grid)
    }

    pub fn mass(&self, t: f64) -> f64 {
        self.bx.spectral_mass(&self.advanced(t))
    }

    /// Fraction of `iint u^2` living within `frac * width` of either box
    /// edge at time `t`; large values flag periodic wrap-around reaching
    /// the region of interest.
    pub fn edge_mass_fraction(&self, t: f64, frac: f64) -> f64 {
        let modal = self.bx.lines_to_modal(&self.advanced(t));
        let count = self.bx.basis.count();
        let cut = (frac * self.bx.nxb as f64) as usize;
        let mut edge = 0.0;
        let mut total = 0.0;
        for i in 0..self.bx.nxb {
            let m: f64 = (0..count).map(|l| modal[l * self.bx.nxb + i].powi(2)).sum();
            total += m;
            if i < cut || i >= self.bx.nxb - cut {
                edge += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// Centroid of the `x`-profile of `u^2` at time `t`, in box coordinates.
    pub fn mass_centroid(&self, t: f64) -> f64 {
        let modal = self.bx.lines_to_modal(&self.advanced(t));
        let count = self.bx.basis.count();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.bx.nxb {
            let m: f64 = (0..count).map(|l| modal[l * self.bx.nxb + i].powi(2)).sum();
            num += self.bx.x(i) * m;
            den += m;
        }
        num / den
    }
}

/// Nonlinear integrator on the periodic box: exact spectral symbols for
/// the linear part under Crank-Nicolson, Adams-Bashforth for the
/// convective term, two-thirds dealiasing.
pub struct PeriodicStepper {
    bx: BoxTransform,
    b: f64,
    nl: Nonlinearity,
    dt: f64,
    t: f64,
    steps: u64,
    spec: Vec<Complex64>,
    prev_nl: Option<Vec<Complex64>>,
}

impl PeriodicStepper {
    pub fn new(
        x0: f64,
        width: f64,
        nxb: usize,
        basis: EigenBasis,
        b: f64,
        nl: Nonlinearity,
        dt: f64,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let bx = BoxTransform::new(x0, width, nxb, basis)?;
        let count = bx.basis.count();
        Ok(Self {
            bx,
            b,
            nl,
            dt,
            t: 0.0,
            steps: 0,
            spec: vec![Complex64::new(0.0, 0.0); count * nxb],
            prev_nl: None,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_initial(&mut self, f: impl Fn(f64, f64) -> f64) {
        let mut s = self.bx.sample(f);
        self.dealias(&mut s);
        self.spec = s;
        self.t = 0.0;
        self.steps = 0;
        self.prev_nl = None;
    }

    fn dealias(&self, lines: &mut [Complex64]) {
        let nxb = self.bx.nxb;
        let cut = nxb / 3;
        for l in 0..self.bx.basis.count() {
            for k in 0..nxb {
                let kk = k.min(nxb - k);
                if kk > cut {
                    lines[l * nxb + k] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Physical samples of the current state, x-major over box nodes and
    /// lateral quadrature nodes.
    pub fn physical(&self) -> Vec<f64> {
        self.bx.modal_to_phys(&self.bx.lines_to_modal(&self.spec))
    }

    /// Spectrum of `-g'(u) u_x`, dealiased.
    fn convective(&self) -> Vec<Complex64> {
        let count = self.bx.basis.count();
        let nxb = self.bx.nxb;
        let ny = self.bx.basis.node_count();

        // u_x by exact spectral differentiation.
        let mut dx_lines = self.spec.clone();
        for l in 0..count {
            for k in 0..nxb {
                dx_lines[l * nxb + k] *= Complex64::new(0.0, self.bx.xi(k));
            }
        }
        let u = self.physical();
        let ux = self.bx.modal_to_phys(&self.bx.lines_to_modal(&dx_lines));

        let mut lines = vec![Complex64::new(0.0, 0.0); count * nxb];
        let mut row = vec![0.0; ny];
        let mut modal = vec![0.0; count];
        for i in 0..nxb {
            for j in 0..ny {
                row[j] = -self.nl.g_prime(u[i * ny + j]) * ux[i * ny + j];
            }
            self.bx.basis.forward_into(&row, &mut modal);
            for l in 0..count {
                lines[l * nxb + i] = Complex64::new(modal[l], 0.0);
            }
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.bx.fwd.get_inplace_scratch_len()];
        for l in 0..count {
            self.bx.fwd.process_with_scratch(&mut lines[l * nxb..(l + 1) * nxb], &mut scratch);
        }
        self.dealias(&mut lines);
        lines
    }

    pub fn step(&mut self) -> Result<()> {
        let count = self.bx.basis.count();
        let nxb = self.bx.nxb;
        let dt = self.dt;

        let explicit = if self.nl.is_linear() {
            None
        } else {
            let n_now = self.convective();
            let eff: Vec<Complex64> = match &self.prev_nl {
                Some(prev) => {
                    n_now.iter().zip(prev).map(|(&a, &p)| 1.5 * a - 0.5 * p).collect()
                }
                None => n_now.clone(),
            };
            self.prev_nl = Some(n_now);
            Some(eff)
        };

        for l in 0..count {
            let lambda = self.bx.basis.lambda(l);
            for k in 0..nxb {
                let omega = dispersion(self.bx.xi(k), lambda, self.b);
                let z = Complex64::new(0.0, 0.5 * dt * omega);
                let idx = l * nxb + k;
                let mut rhs = (1.0 + z) * self.spec[idx];
                if let Some(e) = &explicit {
                    rhs += dt * e[idx];
                }
                self.spec[idx] = rhs / (1.0 - z);
            }
        }

        self.steps += 1;
        self.t = self.steps as f64 * dt;
        if self.steps.is_multiple_of(16) && !self.spec.iter().all(|c| c.re.is_finite() && c.im.is_finite())
        {
            return Err(Error::Blowup { t: self.t, detail: "non-finite box spectrum".into() });
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.bx.spectral_mass(&self.spec)
    }

    /// `iint (u_xx^2 + u_x^2 + u_y^2 - 2 g*(u))`.
    pub fn energy(&self) -> f64 {
        let count = self.bx.basis.count();
        let nxb = self.bx.nxb;
        let norm = self.bx.width / (nxb * nxb) as f64;
        let mut quad = 0.0;
        for l in 0..count {
            let lambda = self.bx.basis.lambda(l);
            for k in 0..nxb {
                let xi = self.bx.xi(k);
                quad += (xi.powi(4) + xi.powi(2) + lambda)
                    * self.spec[l * nxb + k].norm_sqr()
                    * norm;
            }
        }
        let u = self.physical();
        let ny = self.bx.basis.node_count();
        let qw = self.bx.basis.quad_weights();
        let dxb = self.bx.dxb();
        let mut gstar = 0.0;
        for i in 0..nxb {
            for j in 0..ny {
                gstar += dxb * qw[j] * self.nl.g_star(u[i * ny + j]);
            }
        }
        quad - 2.0 * gstar
    }
}
