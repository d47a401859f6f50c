//! Admissible weight functions on the half-line `x >= 0`.
//!
//! A weight `psi` is *admissible* when it is positive, smooth, and
//!
//! * each derivative is dominated by the weight itself:
//!   `|psi^(j)(x)| <= c(j) psi(x)`,
//! * it is comparable across unit windows: `sup psi / inf psi <= c` on every
//!   interval `[x, x+1]`.
//!
//! The catalog of closed forms:
//!
//! | constructor          | `psi(x)`                  | role                          |
//! |----------------------|---------------------------|-------------------------------|
//! | [`WeightSpec::exponential`] | `e^{2 alpha x}`    | exponential decay estimates   |
//! | [`WeightSpec::power`]       | `(1+x)^{2 alpha}`  | polynomial gain of regularity |
//! | [`WeightSpec::rho0`]        | `1 + (2/pi) atan x`| bounded, strictly increasing  |
//! | [`WeightSpec::unit`]        | `1`                | unweighted norms              |
//!
//! All derivatives up to order five are evaluated from closed forms, not
//! finite differences; the unit tests cross-check them against a central
//! difference oracle.

use crate::{Error, Result};

/// Largest constant tolerated by the empirical admissibility check.
const ADMISSIBILITY_CAP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    /// `e^{2 alpha x}`
    Exponential { alpha: f64 },
    /// `(1+x)^{2 alpha}`
    Power { alpha: f64 },
    /// `1 + (2/pi) atan(x - shift)`
    Rho0 { shift: f64 },
    /// `(2/pi) / (1 + (x - shift)^2)`, the derivative of [`Kind::Rho0`]
    Rho0Prime { shift: f64 },
    /// constant `1`
    Unit,
}

/// A positive weight `scale * kind(x)` with closed-form derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec {
    kind: Kind,
    scale: f64,
}

/// Empirical admissibility constants measured on a sample grid.
#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    /// `c(j) = max |psi^(j)| / psi` for `j = 1..=5`.
    pub c: [f64; 5],
    /// Largest `sup psi / inf psi` over unit windows `[x, x+1]`.
    pub c_shift: f64,
    pub pass: bool,
}

/// Empirical infima/suprema for the uniqueness and decay hypotheses.
#[derive(Clone, Debug)]
pub struct HypothesesReport {
    /// `inf (psi')^{2+3p} psi^{p-2}`; positivity is the weak-uniqueness gate.
    pub weak_inf: f64,
    pub weak_ok: bool,
    /// `inf psi' psi^{4q+3}`; positivity is the strong-uniqueness gate.
    pub strong_inf: f64,
    pub strong_ok: bool,
    /// `sup psi / ((1+x)^3 psi')`, finite when the weight grows at most
    /// polynomially slower than its derivative.
    pub growth_sup: f64,
    pub growth_ok: bool,
}

impl WeightSpec {
    /// `e^{2 alpha x}` with `alpha > 0`.
    pub fn exponential(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "exponential weight needs alpha > 0, got {alpha}"
            )));
        }
        Ok(Self { kind: Kind::Exponential { alpha }, scale: 1.0 })
    }

    /// `(1+x)^{2 alpha}` with `alpha > 0`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power weight needs alpha > 0, got {alpha}"
            )));
        }
        Ok(Self { kind: Kind::Power { alpha }, scale: 1.0 })
    }

    /// `1 + (2/pi) atan x`: bounded between 1 and 2, strictly increasing.
    pub fn rho0() -> Self {
        Self { kind: Kind::Rho0 { shift: 0.0 }, scale: 1.0 }
    }

    /// `1 + (2/pi) atan(x - x0)`: the same profile centered at `x0`.
    pub fn rho0_shifted(x0: f64) -> Self {
        Self { kind: Kind::Rho0 { shift: x0 }, scale: 1.0 }
    }

    /// The constant weight `1`.
    pub fn unit() -> Self {
        Self { kind: Kind::Unit, scale: 1.0 }
    }

    /// Rate parameter of the kind, if it has one.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            Kind::Exponential { alpha } | Kind::Power { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Compact name used in CSV column headers and config files.
    pub fn label(&self) -> String {
        let base = match self.kind {
            Kind::Exponential { alpha } => format!("exp:{alpha}"),
            Kind::Power { alpha } => format!("pow:{alpha}"),
            Kind::Rho0 { shift } if shift != 0.0 => format!("rho0@{shift}"),
            Kind::Rho0 { .. } => "rho0".to_string(),
            Kind::Rho0Prime { shift } if shift != 0.0 => format!("rho0p@{shift}"),
            Kind::Rho0Prime { .. } => "rho0p".to_string(),
            Kind::Unit => "unit".to_string(),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{}", self.scale, base)
        }
    }

    /// Evaluate `psi^(order)(x)` for `order <= 5`.
    pub fn eval(&self, x: f64, order: usize) -> f64 {
        assert!(order <= 5, "derivatives are tabulated up to order 5");
        let v = match self.kind {
            Kind::Exponential { alpha } => {
                (2.0 * alpha).powi(order as i32) * (2.0 * alpha * x).exp()
            }
            Kind::Power { alpha } => {
                let mut coeff = 1.0;
                for k in 0..order {
                    coeff *= 2.0 * alpha - k as f64;
                }
                coeff * (1.0 + x).powf(2.0 * alpha - order as f64)
            }
            Kind::Rho0 { shift } => {
                let z = x - shift;
                if order == 0 {
                    1.0 + std::f64::consts::FRAC_2_PI * z.atan()
                } else {
                    std::f64::consts::FRAC_2_PI * atan_derivative(z, order as u32)
                }
            }
            Kind::Rho0Prime { shift } => {
                std::f64::consts::FRAC_2_PI * atan_derivative(x - shift, order as u32 + 1)
            }
            Kind::Unit => {
                if order == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        self.scale * v
    }

    /// The derivative `psi'` repackaged as a weight of its own.
    ///
    /// Only kinds whose derivative is again positive and admissible qualify:
    /// exponentials, powers with `2 alpha > 1`, and `rho0`. Everything else
    /// (the unit weight, flat powers, `rho0'` itself) is refused.
    pub fn derivative_weight(&self) -> Result<Self> {
        match self.kind {
            Kind::Exponential { alpha } => Ok(Self {
                kind: Kind::Exponential { alpha },
                scale: self.scale * 2.0 * alpha,
            }),
            Kind::Power { alpha } if 2.0 * alpha > 1.0 => Ok(Self {
                kind: Kind::Power { alpha: alpha - 0.5 },
                scale: self.scale * 2.0 * alpha,
            }),
            Kind::Power { .. } => Err(Error::NoDerivativeWeight(format!(
                "{}: derivative is flat or decaying to zero too slowly to dominate",
                self.label()
            ))),
            Kind::Rho0 { shift } => Ok(Self {
                kind: Kind::Rho0Prime { shift },
                scale: self.scale,
            }),
            Kind::Rho0Prime { .. } => Err(Error::NoDerivativeWeight(format!(
                "{}: derivative changes sign",
                self.label()
            ))),
            Kind::Unit => Err(Error::NoDerivativeWeight(
                "unit: derivative vanishes identically".to_string(),
            )),
        }
    }

    /// Measure the admissibility constants on `[0, x_max]`.
    pub fn check_admissibility(&self, x_max: f64, n_samples: usize) -> AdmissibilityReport {
        assert!(n_samples >= 16 && x_max > 1.0);
        let h = x_max / (n_samples - 1) as f64;
        let xs: Vec<f64> = (0..n_samples).map(|i| i as f64 * h).collect();
        let psi: Vec<f64> = xs.iter().map(|&x| self.eval(x, 0)).collect();

        let mut c = [0.0f64; 5];
        let mut positive = true;
        for (i, &x) in xs.iter().enumerate() {
            if !(psi[i] > 0.0) || !psi[i].is_finite() {
                positive = false;
                continue;
            }
            for (j, cj) in c.iter_mut().enumerate() {
                *cj = cj.max(self.eval(x, j + 1).abs() / psi[i]);
            }
        }

        // Ratio of extremes over the sliding unit window [x_i, x_i + 1].
        let win = (1.0 / h).round() as usize;
        let mut c_shift: f64 = 0.0;
        for i in 0..n_samples {
            let end = (i + win).min(n_samples - 1);
            let slice = &psi[i..=end];
            let hi = slice.iter().cloned().fold(f64::MIN, f64::max);
            let lo = slice.iter().cloned().fold(f64::MAX, f64::min);
            if lo > 0.0 {
                c_shift = c_shift.max(hi / lo);
            }
        }

        let pass = positive
            && c.iter().all(|v| v.is_finite() && *v <= ADMISSIBILITY_CAP)
            && c_shift.is_finite()
            && c_shift <= ADMISSIBILITY_CAP;
        AdmissibilityReport { c, c_shift, pass }
    }

    /// Measure the uniqueness-theory hypotheses for nonlinearity exponents
    /// `p` (first derivative growth) and `q` (second derivative growth).
    ///
    /// Each quantity is sampled on `[0, x_max]`; a hypothesis passes when the
    /// sampled infimum is positive and the tail shows no residual decay
    /// (value at `x_max` within 10% of the value at `x_max / 2`).
    pub fn check_theorem_hypotheses(
        &self,
        p: f64,
        q: f64,
        x_max: f64,
        n_samples: usize,
    ) -> HypothesesReport {
        assert!(n_samples >= 16 && x_max > 1.0);
        let h = x_max / (n_samples - 1) as f64;

        let weak = |x: f64| self.eval(x, 1).powf(2.0 + 3.0 * p) * self.eval(x, 0).powf(p - 2.0);
        let strong = |x: f64| self.eval(x, 1) * self.eval(x, 0).powf(4.0 * q + 3.0);
        let growth = |x: f64| {
            let dpsi = self.eval(x, 1);
            if dpsi <= 0.0 {
                f64::INFINITY
            } else {
                self.eval(x, 0) / ((1.0 + x).powi(3) * dpsi)
            }
        };

        let mut weak_inf = f64::INFINITY;
        let mut strong_inf = f64::INFINITY;
        let mut growth_sup: f64 = 0.0;
        for i in 0..n_samples {
            let x = i as f64 * h;
            weak_inf = weak_inf.min(weak(x));
            strong_inf = strong_inf.min(strong(x));
            growth_sup = growth_sup.max(growth(x));
        }

        let settled = |f: &dyn Fn(f64) -> f64| {
            let tail = f(x_max);
            let mid = f(x_max / 2.0);
            tail.is_finite() && mid.is_finite() && tail >= 0.9 * mid
        };

        HypothesesReport {
            weak_inf,
            weak_ok: weak_inf > 0.0 && settled(&weak),
            strong_inf,
            strong_ok: strong_inf > 0.0 && settled(&strong),
            growth_sup,
            growth_ok: growth_sup.is_finite() && growth_sup <= ADMISSIBILITY_CAP,
        }
    }
}

impl std::fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

/// `d^n/dz^n atan(z)` via `(n-1)! cos^n(t) sin(n (t + pi/2))` with `t = atan z`.
fn atan_derivative(z: f64, n: u32) -> f64 {
    debug_assert!(n >= 1);
    let t = z.atan();
    let mut fact = 1.0;
    for k in 2..n {
        fact *= k as f64;
    }
    fact * t.cos().powi(n as i32) * (n as f64 * (t + std::f64::consts::FRAC_PI_2)).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn catalog() -> Vec<WeightSpec> {
        vec![
            WeightSpec::exponential(0.25).unwrap(),
            WeightSpec::exponential(0.5).unwrap(),
            WeightSpec::power(0.5).unwrap(),
            WeightSpec::power(1.0).unwrap(),
            WeightSpec::power(1.75).unwrap(),
            WeightSpec::rho0(),
            WeightSpec::rho0_shifted(3.0),
            WeightSpec::rho0().derivative_weight().unwrap(),
            WeightSpec::unit(),
        ]
    }

    #[test]
    fn closed_form_values() {
        let e = WeightSpec::exponential(0.5).unwrap();
        assert_abs_diff_eq!(e.eval(0.0, 0), 1.0);
        assert_relative_eq!(e.eval(1.0, 0), std::f64::consts::E, max_relative = 1e-14);
        assert_abs_diff_eq!(e.eval(0.0, 1), 1.0);

        let p = WeightSpec::power(1.0).unwrap();
        assert_abs_diff_eq!(p.eval(1.0, 0), 4.0);
        assert_abs_diff_eq!(p.eval(1.0, 1), 4.0); // 2(1+x) at x = 1
        assert_abs_diff_eq!(p.eval(0.0, 2), 2.0);

        let r = WeightSpec::rho0();
        assert_abs_diff_eq!(r.eval(0.0, 0), 1.0);
        assert_relative_eq!(r.eval(0.0, 1), std::f64::consts::FRAC_2_PI, max_relative = 1e-14);
        assert_relative_eq!(r.eval(1.0, 0), 1.5, max_relative = 1e-14);

        let u = WeightSpec::unit();
        assert_abs_diff_eq!(u.eval(7.0, 0), 1.0);
        assert_abs_diff_eq!(u.eval(7.0, 3), 0.0);
    }

    #[test]
    fn derivatives_match_central_differences() {
        // Independent oracle for the whole derivative table.
        let h = 1e-4;
        for w in catalog() {
            for &x in &[0.1, 0.7, 1.9, 5.3, 14.2] {
                for order in 0..=4 {
                    let fd = (w.eval(x + h, order) - w.eval(x - h, order)) / (2.0 * h);
                    let exact = w.eval(x, order + 1);
                    let scale = w.eval(x, 0).max(exact.abs());
                    assert_abs_diff_eq!(fd, exact, epsilon = 1e-5 * scale.max(1e-6));
                }
            }
        }
    }

    #[test]
    fn derivative_weight_closed_forms() {
        let d = WeightSpec::exponential(0.5).unwrap().derivative_weight().unwrap();
        for &x in &[0.0, 1.0, 2.5] {
            assert_relative_eq!(d.eval(x, 0), x.exp(), max_relative = 1e-14);
        }

        let d = WeightSpec::power(1.0).unwrap().derivative_weight().unwrap();
        assert_abs_diff_eq!(d.eval(1.0, 0), 4.0); // 2(1+x)

        let d = WeightSpec::rho0().derivative_weight().unwrap();
        assert_relative_eq!(d.eval(0.0, 0), std::f64::consts::FRAC_2_PI, max_relative = 1e-14);
        assert_relative_eq!(d.eval(1.0, 0), 1.0 / std::f64::consts::PI, max_relative = 1e-14);

        assert!(WeightSpec::unit().derivative_weight().is_err());
        assert!(WeightSpec::power(0.3).unwrap().derivative_weight().is_err());
        assert!(WeightSpec::power(0.5).unwrap().derivative_weight().is_err());
        assert!(d.derivative_weight().is_err()); // rho0' changes sign at the next order
    }

    #[test]
    fn admissibility_of_the_catalog() {
        for w in catalog() {
            let rep = w.check_admissibility(20.0, 20_001);
            assert!(rep.pass, "{} failed admissibility: {:?}", w.label(), rep);
        }
    }

    #[test]
    fn admissibility_constants_frozen_cases() {
        let rep = WeightSpec::exponential(0.5).unwrap().check_admissibility(20.0, 20_001);
        assert_relative_eq!(rep.c[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(rep.c_shift, std::f64::consts::E, max_relative = 1e-2);

        let rep = WeightSpec::unit().check_admissibility(20.0, 2_001);
        assert_abs_diff_eq!(rep.c_shift, 1.0);
        assert_abs_diff_eq!(rep.c[4], 0.0);

        // psi' / psi for rho0 peaks at the origin.
        let rep = WeightSpec::rho0().check_admissibility(20.0, 2_001);
        assert_relative_eq!(rep.c[0], std::f64::consts::FRAC_2_PI, max_relative = 1e-12);
    }

    #[test]
    fn uniqueness_hypotheses_examples() {
        // Exponential weights satisfy the weak gate with a flat infimum of
        // 2^5 at the origin (p = 1).
        let rep = WeightSpec::exponential(1.0).unwrap().check_theorem_hypotheses(1.0, 0.0, 40.0, 4_001);
        assert!(rep.weak_ok);
        assert_relative_eq!(rep.weak_inf, 32.0, max_relative = 1e-9);
        assert!(rep.strong_ok);
        assert!(rep.growth_ok);

        // (1+x)^{5/4} sits exactly on the p = 1 threshold: the weak quantity
        // is the constant (5/4)^5.
        let rep = WeightSpec::power(0.625).unwrap().check_theorem_hypotheses(1.0, 0.0, 40.0, 4_001);
        assert!(rep.weak_ok);
        assert_relative_eq!(rep.weak_inf, 1.25f64.powi(5), max_relative = 1e-9);

        // (1+x)^{1/2} is below the p = 2 threshold and decays to zero.
        let rep = WeightSpec::power(0.25).unwrap().check_theorem_hypotheses(2.0, 1.0, 40.0, 4_001);
        assert!(!rep.weak_ok);

        // The unit weight never passes and has no growth bound.
        let rep = WeightSpec::unit().check_theorem_hypotheses(1.0, 0.0, 40.0, 1_001);
        assert!(!rep.weak_ok && !rep.strong_ok && !rep.growth_ok);
    }

    proptest! {
        #[test]
        fn positivity_everywhere(x in 0.0..50.0f64) {
            for w in catalog() {
                prop_assert!(w.eval(x, 0) > 0.0);
            }
        }

        #[test]
        fn fd_consistency_random_points(x in 0.0..18.0f64, order in 0usize..4) {
            let h = 1e-4;
            for w in catalog() {
                let fd = (w.eval(x + h, order) - w.eval(x - h, order)) / (2.0 * h);
                let exact = w.eval(x, order + 1);
                let scale = w.eval(x, 0).max(exact.abs()).max(1e-6);
                prop_assert!((fd - exact).abs() <= 1e-5 * scale,
                    "{} order {} at x = {}: fd {} vs {}", w.label(), order, x, fd, exact);
            }
        }
    }
}
