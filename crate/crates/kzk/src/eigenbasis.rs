//! Eigenfunction bases of `-d^2/dy^2` on `(0, L)` for the four lateral
//! boundary condition families, with matched quadrature grids.
//!
//! | family | conditions                  | spectrum                         |
//! |--------|-----------------------------|----------------------------------|
//! | a      | `u(0) = u(L) = 0`           | `(pi l / L)^2`, `l >= 1`         |
//! | b      | `u_y(0) = u_y(L) = 0`       | `0, (pi l / L)^2`                |
//! | c      | `u(0) = 0, u_y(L) = 0`      | `((l - 1/2) pi / L)^2`, `l >= 1` |
//! | d      | `L`-periodic                | `0`, then `(2 pi l / L)^2` twice |
//!
//! Each basis carries a node set on which the retained modes are *exactly*
//! discretely orthonormal (interior points for sines, trapezoid endpoints for
//! cosines, midpoints for the mixed quarter waves, periodic points for family
//! d). Nodes are oversampled at twice the mode count so that quadratic
//! products of retained modes project back without aliasing.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Lateral boundary condition family on `(0, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BcFamily {
    /// `u = 0` at both edges.
    Dirichlet,
    /// `u_y = 0` at both edges.
    Neumann,
    /// `u(0) = 0` and `u_y(L) = 0`.
    Mixed,
    /// `L`-periodic in `y`.
    Periodic,
}

impl BcFamily {
    /// Parse the single-letter config name.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "dirichlet" => Ok(Self::Dirichlet),
            "b" | "neumann" => Ok(Self::Neumann),
            "c" | "mixed" => Ok(Self::Mixed),
            "d" | "periodic" => Ok(Self::Periodic),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary family {other:?} (expected a, b, c, or d)"
            ))),
        }
    }

    pub fn letter(&self) -> &'static str {
        match self {
            Self::Dirichlet => "a",
            Self::Neumann => "b",
            Self::Mixed => "c",
            Self::Periodic => "d",
        }
    }

    /// Constant `kappa` in the Poincare inequality
    /// `int f^2 <= kappa L^2 / pi^2 int (f')^2`, when one holds.
    ///
    /// Families with a constant mode (b, d) admit no such bound.
    pub fn steklov_kappa(&self) -> Option<f64> {
        match self {
            Self::Dirichlet => Some(1.0),
            Self::Mixed => Some(4.0),
            Self::Neumann | Self::Periodic => None,
        }
    }
}

impl std::fmt::Display for BcFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.letter())
    }
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Const,
    Sin(f64),
    Cos(f64),
}

/// One eigenpair: closed-form shape plus its eigenvalue.
#[derive(Clone, Copy, Debug)]
pub struct Mode {
    pub lambda: f64,
    shape: Shape,
    amp: f64,
}

impl Mode {
    pub fn eval(&self, y: f64) -> f64 {
        self.amp
            * match self.shape {
                Shape::Const => 1.0,
                Shape::Sin(k) => (k * y).sin(),
                Shape::Cos(k) => (k * y).cos(),
            }
    }

    pub fn eval_deriv(&self, y: f64) -> f64 {
        self.amp
            * match self.shape {
                Shape::Const => 0.0,
                Shape::Sin(k) => k * (k * y).cos(),
                Shape::Cos(k) => -k * (k * y).sin(),
            }
    }
}

/// Result of the Poincare ratio measurement for a single profile.
#[derive(Clone, Copy, Debug)]
pub struct SteklovReport {
    /// `int f^2 / int (f')^2` computed spectrally.
    pub ratio: f64,
    /// The sharp constant `kappa L^2 / pi^2` for this family.
    pub bound: f64,
    pub kappa: f64,
}

/// A truncated eigenbasis with its quadrature grid and sampled mode shapes.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub family: BcFamily,
    /// Strip width `L`.
    pub length: f64,
    modes: Vec<Mode>,
    nodes: Vec<f64>,
    qweights: Vec<f64>,
    /// `phi[l * n_nodes + j] = mode_l(y_j)`
    phi: Vec<f64>,
    /// `dphi[l * n_nodes + j] = mode_l'(y_j)`
    dphi: Vec<f64>,
}

impl EigenBasis {
    /// Build `count` modes on `(0, length)`.
    ///
    /// For the periodic family the count is rounded down to `1 + 2k` (the
    /// constant plus whole sine/cosine pairs) so truncation commutes with
    /// `y`-translation.
    pub fn new(family: BcFamily, length: f64, count: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("strip width must be positive, got {length}")));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("mode count must be at least 1".into()));
        }
        let l = length;
        let amp = (2.0 / l).sqrt();
        let camp = 1.0 / l.sqrt();

        let mut modes = Vec::new();
        match family {
            BcFamily::Dirichlet => {
                for i in 1..=count {
                    let k = PI * i as f64 / l;
                    modes.push(Mode { lambda: k * k, shape: Shape::Sin(k), amp });
                }
            }
            BcFamily::Neumann => {
                modes.push(Mode { lambda: 0.0, shape: Shape::Const, amp: camp });
                for i in 1..count {
                    let k = PI * i as f64 / l;
                    modes.push(Mode { lambda: k * k, shape: Shape::Cos(k), amp });
                }
            }
            BcFamily::Mixed => {
                for i in 1..=count {
                    let k = (i as f64 - 0.5) * PI / l;
                    modes.push(Mode { lambda: k * k, shape: Shape::Sin(k), amp });
                }
            }
            BcFamily::Periodic => {
                modes.push(Mode { lambda: 0.0, shape: Shape::Const, amp: camp });
                let pairs = (count - 1) / 2;
                for i in 1..=pairs {
                    let k = 2.0 * PI * i as f64 / l;
                    modes.push(Mode { lambda: k * k, shape: Shape::Sin(k), amp });
                    modes.push(Mode { lambda: k * k, shape: Shape::Cos(k), amp });
                }
            }
        }
        let count = modes.len();

        // Twice-oversampled grids keep quadratic mode products alias-free.
        let nsub = 2 * count;
        let h = l / nsub as f64;
        let (nodes, qweights): (Vec<f64>, Vec<f64>) = match family {
            BcFamily::Dirichlet => {
                ((1..nsub).map(|j| j as f64 * h).collect(), vec![h; nsub - 1])
            }
            BcFamily::Neumann => {
                let nodes: Vec<f64> = (0..=nsub).map(|j| j as f64 * h).collect();
                let mut w = vec![h; nsub + 1];
                w[0] = 0.5 * h;
                w[nsub] = 0.5 * h;
                (nodes, w)
            }
            BcFamily::Mixed => {
                ((0..nsub).map(|j| (j as f64 + 0.5) * h).collect(), vec![h; nsub])
            }
            BcFamily::Periodic => {
                ((0..nsub).map(|j| j as f64 * h).collect(), vec![h; nsub])
            }
        };

        let n = nodes.len();
        let mut phi = vec![0.0; count * n];
        let mut dphi = vec![0.0; count * n];
        for (li, m) in modes.iter().enumerate() {
            for (j, &y) in nodes.iter().enumerate() {
                phi[li * n + j] = m.eval(y);
                dphi[li * n + j] = m.eval_deriv(y);
            }
        }

        Ok(Self { family, length, modes, nodes, qweights, phi, dphi })
    }

    pub fn count(&self) -> usize {
        self.modes.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.qweights
    }

    pub fn mode(&self, l: usize) -> &Mode {
        &self.modes[l]
    }

    pub fn lambda(&self, l: usize) -> f64 {
        self.modes[l].lambda
    }

    pub fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.lambda)
    }

    /// Sampled values of mode `l` on the quadrature nodes.
    pub fn mode_samples(&self, l: usize) -> &[f64] {
        let n = self.nodes.len();
        &self.phi[l * n..(l + 1) * n]
    }

    /// Sampled `d/dy` of mode `l` on the quadrature nodes.
    pub fn mode_deriv_samples(&self, l: usize) -> &[f64] {
        let n = self.nodes.len();
        &self.dphi[l * n..(l + 1) * n]
    }

    /// Project node samples onto the retained modes.
    pub fn forward(&self, values: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.count()];
        self.forward_into(values, &mut c);
        c
    }

    pub fn forward_into(&self, values: &[f64], coeffs: &mut [f64]) {
        let n = self.nodes.len();
        assert_eq!(values.len(), n, "sample count != node count");
        assert_eq!(coeffs.len(), self.count());
        for (li, cl) in coeffs.iter_mut().enumerate() {
            let row = &self.phi[li * n..(li + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.qweights[j] * values[j] * row[j];
            }
            *cl = acc;
        }
    }

    /// Evaluate a coefficient vector back on the quadrature nodes.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.nodes.len()];
        self.inverse_into(coeffs, &mut v);
        v
    }

    pub fn inverse_into(&self, coeffs: &[f64], values: &mut [f64]) {
        let n = self.nodes.len();
        assert_eq!(coeffs.len(), self.count());
        assert_eq!(values.len(), n);
        values.fill(0.0);
        for (li, &cl) in coeffs.iter().enumerate() {
            if cl == 0.0 {
                continue;
            }
            let row = &self.phi[li * n..(li + 1) * n];
            for j in 0..n {
                values[j] += cl * row[j];
            }
        }
    }

    /// Evaluate the `y`-derivative of a coefficient vector on the nodes.
    pub fn inverse_deriv_into(&self, coeffs: &[f64], values: &mut [f64]) {
        let n = self.nodes.len();
        assert_eq!(coeffs.len(), self.count());
        assert_eq!(values.len(), n);
        values.fill(0.0);
        for (li, &cl) in coeffs.iter().enumerate() {
            if cl == 0.0 {
                continue;
            }
            let row = &self.dphi[li * n..(li + 1) * n];
            for j in 0..n {
                values[j] += cl * row[j];
            }
        }
    }

    /// Quadrature of `f` over `(0, L)` from node samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.qweights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Measure `int f^2 / int (f')^2` against the sharp Poincare constant.
    ///
    /// Only defined for families a and c. The essential (Dirichlet-type)
    /// boundary values of `f` are checked; natural conditions are not
    /// required of the input.
    pub fn steklov_check(&self, f: impl Fn(f64) -> f64) -> Result<SteklovReport> {
        let kappa = self.family.steklov_kappa().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "family {} has a constant mode, no Poincare constant",
                self.family
            ))
        })?;

        let samples: Vec<f64> = self.nodes.iter().map(|&y| f(y)).collect();
        let scale = samples.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let tol = 1e-6 * scale;
        if f(0.0).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "profile violates f(0) = 0 (got {})",
                f(0.0)
            )));
        }
        if self.family == BcFamily::Dirichlet && f(self.length).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "profile violates f(L) = 0 (got {})",
                f(self.length)
            )));
        }

        let c = self.forward(&samples);
        let num: f64 = c.iter().map(|v| v * v).sum();
        let den: f64 = c.iter().zip(self.lambdas()).map(|(v, lam)| lam * v * v).sum();
        if den == 0.0 {
            return Err(Error::InvalidParameter("profile is identically zero".into()));
        }
        let bound = kappa * self.length * self.length / (PI * PI);
        Ok(SteklovReport { ratio: num / den, bound, kappa })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const FAMILIES: [BcFamily; 4] =
        [BcFamily::Dirichlet, BcFamily::Neumann, BcFamily::Mixed, BcFamily::Periodic];

    #[test]
    fn spectra_match_closed_forms() {
        let b = EigenBasis::new(BcFamily::Dirichlet, PI, 16).unwrap();
        for i in 0..16 {
            assert_relative_eq!(b.lambda(i), ((i + 1) as f64).powi(2), max_relative = 1e-13);
        }

        let b = EigenBasis::new(BcFamily::Mixed, 1.0, 8).unwrap();
        for i in 0..8 {
            let expect = ((2 * (i + 1) - 1) as f64 * PI / 2.0).powi(2);
            assert_relative_eq!(b.lambda(i), expect, max_relative = 1e-13);
        }

        let b = EigenBasis::new(BcFamily::Neumann, 2.0, 5).unwrap();
        assert_abs_diff_eq!(b.lambda(0), 0.0);
        assert_relative_eq!(b.lambda(1), (PI / 2.0).powi(2), max_relative = 1e-13);
        assert_relative_eq!(b.mode(0).eval(1.3), 1.0 / 2.0f64.sqrt(), max_relative = 1e-13);

        // Periodic: constant mode, then doubly degenerate pairs.
        let b = EigenBasis::new(BcFamily::Periodic, 1.0, 7).unwrap();
        assert_eq!(b.count(), 7);
        assert_abs_diff_eq!(b.lambda(0), 0.0);
        for j in 1..=3 {
            let lam = (2.0 * PI * j as f64).powi(2);
            assert_relative_eq!(b.lambda(2 * j - 1), lam, max_relative = 1e-13);
            assert_relative_eq!(b.lambda(2 * j), lam, max_relative = 1e-13);
        }
        // Even counts round down to whole pairs.
        assert_eq!(EigenBasis::new(BcFamily::Periodic, 1.0, 8).unwrap().count(), 7);
    }

    #[test]
    fn discrete_orthonormality_is_exact() {
        for family in FAMILIES {
            for &l in &[0.5, 1.0, PI] {
                let b = EigenBasis::new(family, l, 33).unwrap();
                let mut worst = 0.0f64;
                for i in 0..b.count() {
                    for j in i..b.count() {
                        let prod: Vec<f64> = b
                            .mode_samples(i)
                            .iter()
                            .zip(b.mode_samples(j))
                            .map(|(a, c)| a * c)
                            .collect();
                        let g = b.integrate(&prod);
                        let target = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((g - target).abs());
                    }
                }
                assert!(worst < 1e-10, "family {family} L={l}: gram defect {worst:.3e}");
            }
        }
    }

    #[test]
    fn modes_satisfy_the_eigenvalue_equation() {
        // Second derivative by five-point differences vs -lambda * mode.
        for family in FAMILIES {
            let b = EigenBasis::new(family, 1.7, 12).unwrap();
            for l in 0..b.count() {
                let m = b.mode(l);
                let h = 1.7 / (12.0 * 100.0);
                for &y in &[0.31, 0.77, 1.13] {
                    let d2 = (-m.eval(y - 2.0 * h) + 16.0 * m.eval(y - h) - 30.0 * m.eval(y)
                        + 16.0 * m.eval(y + h)
                        - m.eval(y + 2.0 * h))
                        / (12.0 * h * h);
                    assert_abs_diff_eq!(d2, -m.lambda * m.eval(y), epsilon = 1e-6 * (1.0 + m.lambda));
                }
            }
        }
    }

    #[test]
    fn transform_round_trip() {
        for family in FAMILIES {
            let b = EigenBasis::new(family, 2.3, 17).unwrap();
            let coeffs: Vec<f64> =
                (0..b.count()).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.4).collect();
            let values = b.inverse(&coeffs);
            let back = b.forward(&values);
            for (a, c) in coeffs.iter().zip(&back) {
                assert_abs_diff_eq!(a, c, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn parabola_first_sine_coefficient() {
        // int_0^1 y(1-y) sqrt(2) sin(pi y) dy = 4 sqrt(2) / pi^3
        let b = EigenBasis::new(BcFamily::Dirichlet, 1.0, 64).unwrap();
        let samples: Vec<f64> = b.nodes().iter().map(|&y| y * (1.0 - y)).collect();
        let c = b.forward(&samples);
        let expect = 4.0 * 2.0f64.sqrt() / PI.powi(3);
        assert_relative_eq!(c[0], expect, max_relative = 1e-6);
        // Even modes vanish by symmetry.
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn deriv_samples_match_differences() {
        let b = EigenBasis::new(BcFamily::Mixed, 1.0, 6).unwrap();
        let l = 3;
        let m = b.mode(l);
        let h = 1e-6;
        for (j, &y) in b.nodes().iter().enumerate() {
            let fd = (m.eval(y + h) - m.eval(y - h)) / (2.0 * h);
            assert_abs_diff_eq!(b.mode_deriv_samples(l)[j], fd, epsilon = 1e-4);
        }
    }

    #[test]
    fn steklov_sharpness_on_first_modes() {
        for &l in &[0.5, 1.0, PI] {
            let b = EigenBasis::new(BcFamily::Dirichlet, l, 32).unwrap();
            let r = b.steklov_check(|y| (PI * y / l).sin()).unwrap();
            assert_relative_eq!(r.ratio, r.bound, max_relative = 1e-11);
            assert_relative_eq!(r.bound, l * l / (PI * PI), max_relative = 1e-13);

            let b = EigenBasis::new(BcFamily::Mixed, l, 32).unwrap();
            let r = b.steklov_check(|y| (0.5 * PI * y / l).sin()).unwrap();
            assert_relative_eq!(r.ratio, r.bound, max_relative = 1e-11);
            assert_relative_eq!(r.bound, 4.0 * l * l / (PI * PI), max_relative = 1e-13);
        }
    }

    #[test]
    fn steklov_parabola_ratio() {
        // f = y(1-y): int f^2 = 1/30, int (f')^2 = 1/3, ratio 1/10.
        let b = EigenBasis::new(BcFamily::Dirichlet, 1.0, 64).unwrap();
        let r = b.steklov_check(|y| y * (1.0 - y)).unwrap();
        assert_relative_eq!(r.ratio, 0.1, max_relative = 1e-4);
        assert!(r.ratio <= r.bound * (1.0 + 1e-9));
    }

    #[test]
    fn steklov_rejects_bad_inputs() {
        let b = EigenBasis::new(BcFamily::Dirichlet, 1.0, 16).unwrap();
        assert!(b.steklov_check(|y| (PI * y).cos()).is_err()); // f(0) = 1
        assert!(b.steklov_check(|_| 0.0).is_err());
        let b = EigenBasis::new(BcFamily::Neumann, 1.0, 16).unwrap();
        assert!(b.steklov_check(|y| y).is_err()); // no constant for this family
    }

    #[test]
    fn random_profiles_respect_the_poincare_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for family in [BcFamily::Dirichlet, BcFamily::Mixed] {
            let b = EigenBasis::new(family, 1.3, 24).unwrap();
            for _ in 0..50 {
                let coeffs: Vec<f64> = (0..b.count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let num: f64 = coeffs.iter().map(|c| c * c).sum();
                let den: f64 = coeffs.iter().zip(b.lambdas()).map(|(c, lam)| lam * c * c).sum();
                let bound = b.family.steklov_kappa().unwrap() * 1.3 * 1.3 / (PI * PI);
                assert!(num / den <= bound * (1.0 + 1e-12));
            }
        }
    }
}
