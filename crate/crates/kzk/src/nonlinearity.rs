//! The convective nonlinearity `g'(u) u_x` and its regularization.
//!
//! Supported shapes of `g'`:
//!
//! * `Quadratic`: `g'(u) = u` (the classical quadratic flux `g = u^2/2`),
//! * `Cubic { a }`: `g'(u) = a u^2`,
//! * `PowerLaw { p, sign }`: `g'(u) = sign * |u|^p` with `0 <= p < 8/3`,
//!   the growth cap under which the a priori estimates close.
//!
//! An optional strength-`h` cutoff multiplies `g'` by `eta(2 - h|u|)`, which
//! leaves `g'` untouched for `|u| <= 1/h` and kills it for `|u| >= 2/h`; the
//! antiderivatives `g` and `g*` are then recovered by adaptive quadrature
//! instead of closed forms.

use crate::{Error, Result};

/// Growth exponents above this cap are rejected.
pub const MAX_POWER: f64 = 8.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NonlinearityKind {
    Quadratic,
    Cubic { a: f64 },
    PowerLaw { p: f64, sign: f64 },
}

/// `g'` together with its cutoff strength and integral forms.
#[derive(Clone, Copy, Debug)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    /// Cutoff strength; `0` disables the cutoff.
    pub h: f64,
}

impl Nonlinearity {
    pub fn quadratic() -> Self {
        Self { kind: NonlinearityKind::Quadratic, h: 0.0 }
    }

    pub fn cubic(a: f64) -> Result<Self> {
        if !a.is_finite() || a == 0.0 {
            return Err(Error::InvalidParameter(format!("cubic coefficient must be finite nonzero, got {a}")));
        }
        Ok(Self { kind: NonlinearityKind::Cubic { a }, h: 0.0 })
    }

    pub fn power_law(p: f64, sign: f64) -> Result<Self> {
        if !(0.0..MAX_POWER).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "power-law exponent must lie in [0, 8/3), got {p}"
            )));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
        }
        Ok(Self { kind: NonlinearityKind::PowerLaw { p, sign }, h: 0.0 })
    }

    /// No nonlinearity at all (`g' = 0`): the linear equation.
    pub fn none() -> Self {
        Self { kind: NonlinearityKind::PowerLaw { p: 0.0, sign: 1.0 }, h: f64::INFINITY }
    }

    pub fn with_cutoff(mut self, h: f64) -> Result<Self> {
        if !(h >= 0.0) {
            return Err(Error::InvalidParameter(format!("cutoff strength must be >= 0, got {h}")));
        }
        self.h = h;
        Ok(self)
    }

    pub fn is_linear(&self) -> bool {
        self.h == f64::INFINITY
    }

    /// Growth exponent `p` with `|g'(u)| <= c |u|^p`.
    pub fn p_exponent(&self) -> f64 {
        match self.kind {
            NonlinearityKind::Quadratic => 1.0,
            NonlinearityKind::Cubic { .. } => 2.0,
            NonlinearityKind::PowerLaw { p, .. } => p,
        }
    }

    /// Growth exponent `q` with `|g''(u)| <= c |u|^q`, when `g''` is bounded
    /// near zero at all.
    pub fn q_exponent(&self) -> Option<f64> {
        match self.kind {
            NonlinearityKind::Quadratic => Some(0.0),
            NonlinearityKind::Cubic { .. } => Some(1.0),
            NonlinearityKind::PowerLaw { p, .. } if p >= 1.0 => Some(p - 1.0),
            NonlinearityKind::PowerLaw { .. } => None,
        }
    }

    fn g_prime_raw(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Quadratic => u,
            NonlinearityKind::Cubic { a } => a * u * u,
            NonlinearityKind::PowerLaw { p, sign } => {
                if p == 0.0 {
                    sign
                } else {
                    sign * u.abs().powf(p)
                }
            }
        }
    }

    /// `g'(u)`, cut off at strength `h`.
    pub fn g_prime(&self, u: f64) -> f64 {
        if self.h == f64::INFINITY {
            return 0.0;
        }
        if self.h == 0.0 {
            return self.g_prime_raw(u);
        }
        let window = eta(2.0 - self.h * u.abs());
        if window == 0.0 {
            0.0
        } else {
            self.g_prime_raw(u) * window
        }
    }

    /// `g(u) = int_0^u g'`.
    pub fn g(&self, u: f64) -> f64 {
        if self.h == 0.0 {
            match self.kind {
                NonlinearityKind::Quadratic => 0.5 * u * u,
                NonlinearityKind::Cubic { a } => a * u * u * u / 3.0,
                NonlinearityKind::PowerLaw { p, sign } => {
                    sign * u.signum() * u.abs().powf(p + 1.0) / (p + 1.0)
                }
            }
        } else {
            adaptive_simpson(&|t| self.g_prime(t), 0.0, u, 1e-11)
        }
    }

    /// `g*(u) = int_0^u g(theta) dtheta`, the potential in the gradient
    /// energy. With a cutoff it is computed as `int_0^u (u - t) g'(t) dt`.
    pub fn g_star(&self, u: f64) -> f64 {
        if self.h == 0.0 {
            match self.kind {
                NonlinearityKind::Quadratic => u * u * u / 6.0,
                NonlinearityKind::Cubic { a } => a * u.powi(4) / 12.0,
                NonlinearityKind::PowerLaw { p, sign } => {
                    sign * u.abs().powf(p + 2.0) / ((p + 1.0) * (p + 2.0))
                }
            }
        } else {
            adaptive_simpson(&|t| (u - t) * self.g_prime(t), 0.0, u, 1e-11)
        }
    }

    /// `int_0^u theta g'(theta) dtheta`, the flux potential appearing in
    /// weighted mass balances.
    pub fn gp_u_star(&self, u: f64) -> f64 {
        if self.h == 0.0 {
            match self.kind {
                NonlinearityKind::Quadratic => u * u * u / 3.0,
                NonlinearityKind::Cubic { a } => a * u.powi(4) / 4.0,
                NonlinearityKind::PowerLaw { p, sign } => sign * u.abs().powf(p + 2.0) / (p + 2.0),
            }
        } else {
            adaptive_simpson(&|t| t * self.g_prime(t), 0.0, u, 1e-11)
        }
    }
}

/// Smooth step: `0` for `x <= 0`, `1` for `x >= 1`, with `eta(x) + eta(1-x) = 1`.
pub fn eta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Spatial truncation profile `eta(1/h - x)`: identically one on
/// `[0, 1/h - 1]`, zero beyond `1/h`. `h = 0` disables the truncation.
pub fn space_truncation(h: f64, x: f64) -> f64 {
    if h == 0.0 {
        1.0
    } else {
        eta(1.0 / h - x)
    }
}

/// Adaptive Simpson quadrature on `[a, b]` (works with `b < a` too).
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(f, a, b, fa, fb, fc, whole, tol, 24)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + c), 0.5 * (c + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (c - a) / 6.0 * (fa + 4.0 * flm + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, c, fa, fc, flm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, c, b, fc, fb, frm, right, 0.5 * tol, depth - 1)
    }
}
