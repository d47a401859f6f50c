//! The computational domain `[0, x_max] x (0, L)` and fields living on it.
//!
//! `x` is a uniform finite-difference grid including both endpoints; `y` is
//! the quadrature node set of an [`EigenBasis`]. A [`Field`] holds physical
//! samples `u(x_i, y_j)` in x-major order; modal coefficient arrays (one
//! coefficient row per `x` node) are plain `Vec<f64>` produced by
//! [`Field::to_modes`].

use crate::eigenbasis::EigenBasis;
use crate::{Error, Result};
use std::io::{BufRead, Write};

#[derive(Clone, Debug)]
pub struct Grid {
    nx: usize,
    dx: f64,
    basis: EigenBasis,
}

impl Grid {
    pub fn new(x_max: f64, nx: usize, basis: EigenBasis) -> Result<Self> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!("x_max must be positive, got {x_max}")));
        }
        if nx < 8 {
            return Err(Error::InvalidParameter(format!("nx must be at least 8, got {nx}")));
        }
        Ok(Self { nx, dx: x_max / (nx - 1) as f64, basis })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.basis.node_count()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.dx * (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    /// Trapezoid weight of node `i`.
    pub fn wx(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx - 1 {
            0.5 * self.dx
        } else {
            self.dx
        }
    }
}

/// Physical samples `u(x_i, y_j)`, x-major.
#[derive(Clone, Debug)]
pub struct Field {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Self { nx: grid.nx(), ny: grid.ny(), data: vec![0.0; grid.nx() * grid.ny()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let ny = grid.ny();
        let mut data = Vec::with_capacity(grid.nx() * ny);
        for i in 0..grid.nx() {
            let x = grid.x(i);
            for &y in grid.basis().nodes() {
                data.push(f(x, y));
            }
        }
        Self { nx: grid.nx(), ny, data }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ny + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.ny + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ny..(i + 1) * self.ny]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ny..(i + 1) * self.ny]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Field) {
        assert_eq!(self.data.len(), other.data.len());
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.data.iter_mut() {
            *v *= a;
        }
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `sqrt( iint u^2 )` with trapezoid-in-x and the basis quadrature in y.
    pub fn l2(&self, grid: &Grid) -> f64 {
        let qw = grid.basis().quad_weights();
        let mut acc = 0.0;
        for i in 0..self.nx {
            let row = self.row(i);
            let mut s = 0.0;
            for j in 0..self.ny {
                s += qw[j] * row[j] * row[j];
            }
            acc += grid.wx(i) * s;
        }
        acc.sqrt()
    }

    /// `iint f(u, x)` over the domain.
    pub fn integrate_with(&self, grid: &Grid, f: impl Fn(f64, f64) -> f64) -> f64 {
        let qw = grid.basis().quad_weights();
        let mut acc = 0.0;
        for i in 0..self.nx {
            let x = grid.x(i);
            let row = self.row(i);
            let mut s = 0.0;
            for j in 0..self.ny {
                s += qw[j] * f(row[j], x);
            }
            acc += grid.wx(i) * s;
        }
        acc
    }

    /// First `x`-derivative: central inside, second-order one-sided at ends.
    pub fn deriv_x(&self, grid: &Grid) -> Field {
        let h = grid.dx();
        let mut out = Field { nx: self.nx, ny: self.ny, data: vec![0.0; self.data.len()] };
        for j in 0..self.ny {
            out.data[j] =
                (-3.0 * self.get(0, j) + 4.0 * self.get(1, j) - self.get(2, j)) / (2.0 * h);
            let n = self.nx - 1;
            out.data[n * self.ny + j] =
                (3.0 * self.get(n, j) - 4.0 * self.get(n - 1, j) + self.get(n - 2, j)) / (2.0 * h);
        }
        for i in 1..self.nx - 1 {
            for j in 0..self.ny {
                out.data[i * self.ny + j] = (self.get(i + 1, j) - self.get(i - 1, j)) / (2.0 * h);
            }
        }
        out
    }

    /// Second `x`-derivative: central inside, one-sided four-point at ends.
    pub fn second_x(&self, grid: &Grid) -> Field {
        let h2 = grid.dx() * grid.dx();
        let mut out = Field { nx: self.nx, ny: self.ny, data: vec![0.0; self.data.len()] };
        for j in 0..self.ny {
            out.data[j] = (2.0 * self.get(0, j) - 5.0 * self.get(1, j) + 4.0 * self.get(2, j)
                - self.get(3, j))
                / h2;
            let n = self.nx - 1;
            out.data[n * self.ny + j] = (2.0 * self.get(n, j) - 5.0 * self.get(n - 1, j)
                + 4.0 * self.get(n - 2, j)
                - self.get(n - 3, j))
                / h2;
        }
        for i in 1..self.nx - 1 {
            for j in 0..self.ny {
                out.data[i * self.ny + j] =
                    (self.get(i - 1, j) - 2.0 * self.get(i, j) + self.get(i + 1, j)) / h2;
            }
        }
        out
    }

    /// Fourth `x`-derivative: central five-point inside, shifted stencils on
    /// the two rows nearest each end.
    pub fn fourth_x(&self, grid: &Grid) -> Field {
        let h4 = grid.dx().powi(4);
        let mut out = Field { nx: self.nx, ny: self.ny, data: vec![0.0; self.data.len()] };
        let stencil = [1.0, -4.0, 6.0, -4.0, 1.0];
        for i in 0..self.nx {
            // Shift the five-point window to stay inside the grid.
            let base = i.clamp(2, self.nx - 3) - 2;
            for j in 0..self.ny {
                let mut acc = 0.0;
                for (k, c) in stencil.iter().enumerate() {
                    acc += c * self.get(base + k, j);
                }
                out.data[i * self.ny + j] = acc / h4;
            }
        }
        out
    }

    /// Project every `x`-row onto the lateral modes: returns `nx * count`
    /// coefficients, x-major.
    pub fn to_modes(&self, grid: &Grid) -> Vec<f64> {
        let basis = grid.basis();
        let count = basis.count();
        let mut modes = vec![0.0; self.nx * count];
        for i in 0..self.nx {
            basis.forward_into(self.row(i), &mut modes[i * count..(i + 1) * count]);
        }
        modes
    }

    /// Rebuild physical samples from x-major modal coefficients.
    pub fn from_modes(grid: &Grid, modes: &[f64]) -> Field {
        let basis = grid.basis();
        let count = basis.count();
        assert_eq!(modes.len() % count, 0);
        let nx = modes.len() / count;
        let ny = basis.node_count();
        let mut out = Field { nx, ny, data: vec![0.0; nx * ny] };
        for i in 0..nx {
            basis.inverse_into(&modes[i * count..(i + 1) * count], out.row_mut(i));
        }
        out
    }

    /// `u_y` evaluated through the modal expansion.
    pub fn deriv_y(&self, grid: &Grid) -> Field {
        let basis = grid.basis();
        let count = basis.count();
        let mut out = Field { nx: self.nx, ny: self.ny, data: vec![0.0; self.data.len()] };
        let mut coeffs = vec![0.0; count];
        for i in 0..self.nx {
            basis.forward_into(self.row(i), &mut coeffs);
            basis.inverse_deriv_into(&coeffs, out.row_mut(i));
        }
        out
    }

    /// `u_yy = -lambda` on each mode, evaluated back on the nodes.
    pub fn second_y(&self, grid: &Grid) -> Field {
        let basis = grid.basis();
        let count = basis.count();
        let mut out = Field { nx: self.nx, ny: self.ny, data: vec![0.0; self.data.len()] };
        let mut coeffs = vec![0.0; count];
        for i in 0..self.nx {
            basis.forward_into(self.row(i), &mut coeffs);
            for (l, c) in coeffs.iter_mut().enumerate() {
                *c *= -basis.lambda(l);
            }
            basis.inverse_into(&coeffs, out.row_mut(i));
        }
        out
    }

    /// Write the grid-file format: two header lines (names, values) declaring
    /// the domain, then `nx` rows of `ny` samples.
    pub fn write_csv(&self, grid: &Grid, mut w: impl Write) -> Result<()> {
        writeln!(w, "nx,ny,x_max,L,family")?;
        writeln!(
            w,
            "{},{},{},{},{}",
            self.nx,
            self.ny,
            grid.x_max(),
            grid.basis().length,
            grid.basis().family
        )?;
        for i in 0..self.nx {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Read the grid-file format back; the caller checks domain compatibility.
    pub fn read_csv(r: impl BufRead) -> Result<RawFieldFile> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty field file".into()))??;
        if header.trim() != "nx,ny,x_max,L,family" {
            return Err(Error::Config(format!("unexpected field file header {header:?}")));
        }
        let meta = lines
            .next()
            .ok_or_else(|| Error::Config("field file missing metadata row".into()))??;
        let parts: Vec<&str> = meta.trim().split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Config(format!("bad metadata row {meta:?}")));
        }
        let nx: usize = parts[0].parse().map_err(|_| Error::Config("bad nx".into()))?;
        let ny: usize = parts[1].parse().map_err(|_| Error::Config("bad ny".into()))?;
        let x_max: f64 = parts[2].parse().map_err(|_| Error::Config("bad x_max".into()))?;
        let length: f64 = parts[3].parse().map_err(|_| Error::Config("bad L".into()))?;
        let family = parts[4].to_string();

        let mut data = Vec::with_capacity(nx * ny);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.trim().split(',') {
                let v: f64 =
                    tok.parse().map_err(|_| Error::Config(format!("bad sample {tok:?}")))?;
                data.push(v);
            }
        }
        if data.len() != nx * ny {
            return Err(Error::Config(format!(
                "field file declares {} samples but contains {}",
                nx * ny,
                data.len()
            )));
        }
        Ok(RawFieldFile { nx, ny, x_max, length, family, data })
    }

    /// Build a `Field` from a raw file, verifying it matches `grid`.
    pub fn from_raw(grid: &Grid, raw: &RawFieldFile) -> Result<Field> {
        if raw.nx != grid.nx()
            || raw.ny != grid.ny()
            || (raw.x_max - grid.x_max()).abs() > 1e-9 * grid.x_max()
            || (raw.length - grid.basis().length).abs() > 1e-9 * grid.basis().length
            || raw.family != grid.basis().family.letter()
        {
            return Err(Error::ShapeMismatch(format!(
                "field file ({}x{}, x_max {}, L {}, family {}) does not match the run domain \
                 ({}x{}, x_max {}, L {}, family {})",
                raw.nx,
                raw.ny,
                raw.x_max,
                raw.length,
                raw.family,
                grid.nx(),
                grid.ny(),
                grid.x_max(),
                grid.basis().length,
                grid.basis().family
            )));
        }
        Ok(Field { nx: raw.nx, ny: raw.ny, data: raw.data.clone() })
    }
}

/// Contents of a field CSV before domain validation.
#[derive(Clone, Debug)]
pub struct RawFieldFile {
    pub nx: usize,
    pub ny: usize,
    pub x_max: f64,
    pub length: f64,
    pub family: String,
    pub data: Vec<f64>,
}
