//! Closed-form results for the two worked model potentials, used as
//! independent checks of the general machinery.
//!
//! * [`Example1`]: a two-level periodic tail (`0` on `(0, a)`, `C` on
//!   `(a, L)`) with a square well of depth `h` replacing the `0` level on the
//!   cell `(0, a)`.
//! * [`Example2`]: a Kronig-Penney Schrödinger tail with a barrier of height
//!   `h` added on `(0, a)`, shifted so the lowest band starts at `k = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{PeriodicPotential, PotentialProfile};

/// Square well in a two-level periodic Fokker-Planck potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1 {
    pub c: f64,
    pub l: f64,
    pub a: f64,
    pub h: f64,
}

impl Example1 {
    pub fn new(c: f64, l: f64, a: f64, h: f64) -> Result<Self> {
        if !(0.0 < a && a < l) {
            return Err(Error::Domain(format!("need 0 < a < L (got a = {a}, L = {l})")));
        }
        Ok(Self { c, l, a, h })
    }

    pub fn b(&self) -> f64 {
        self.l - self.a
    }

    pub fn tail(&self) -> PeriodicPotential {
        PeriodicPotential::new(self.l, vec![(self.a, 0.0), (self.b(), self.c)], 0.0).expect("valid tail")
    }

    pub fn profile(&self) -> PotentialProfile {
        PotentialProfile::symmetric(self.tail(), vec![(0.0, -self.h)], 0.0, self.a).expect("valid profile")
    }

    /// `(L₀, V₀)`.
    pub fn l0_v0(&self) -> (f64, f64) {
        let (a, b, c) = (self.a, self.b(), self.c);
        let (p, m) = (a + b * c.exp(), a + b * (-c).exp());
        ((p * m).sqrt(), 0.5 * (p / m).ln())
    }

    pub fn q(&self) -> f64 {
        let (a, b, c) = (self.a, self.b(), self.c);
        (a.powi(4) + 6.0 * a * a * b * b + b.powi(4)) / 12.0 + a * b / 3.0 * (a * a + b * b) * c.cosh()
    }

    fn with_c(&self, c: f64) -> Self {
        Self { c, ..*self }
    }

    /// `ₚ[+−]` over `[x − L, x]`, `0 < x < a`.
    pub fn pm(&self, x: f64) -> f64 {
        let (a, b, c) = (self.a, self.b(), self.c);
        0.5 * (a * a + b * b) + (-c).exp() * b * (a - x) + c.exp() * b * x
    }

    /// `ₚ[−+]`, `0 < x < a`.
    pub fn mp(&self, x: f64) -> f64 {
        self.with_c(-self.c).pm(x)
    }

    /// `ₚ[+−+]`, `0 < x < a`.
    pub fn pmp(&self, x: f64) -> f64 {
        let (a, b, c) = (self.a, self.b(), self.c);
        a / 6.0 * (a * a + 3.0 * b * b) + 2.0 * b * x * (x - a) * c.sinh() + b / 6.0 * (3.0 * a * a + b * b) * c.exp()
    }

    /// `ₚ[−+−]`, `0 < x < a`.
    pub fn mpm(&self, x: f64) -> f64 {
        self.with_c(-self.c).pmp(x)
    }

    /// `sinh(V₀ + h) − sinh V₀`.
    fn bump(&self) -> f64 {
        let (_, v0) = self.l0_v0();
        (v0 + self.h).sinh() - v0.sinh()
    }

    /// `s₀ … s₃` at `0 < x < a`.
    pub fn s(&self, x: f64) -> [f64; 4] {
        let (a, b, c, h) = (self.a, self.b(), self.c, self.h);
        let (l0, v0) = self.l0_v0();
        let quartic = l0.powi(4) + 4.0 * self.q();
        let bump = self.bump();
        let lead = (-(v0 + h)).exp();
        let pre = (-(2.0 * v0 + h)).exp();
        let s0 = -lead;
        let s1 = lead * a * bump;
        let s2 = pre / l0
            * (a / 6.0 * (a * a + 3.0 * b * b)
                + b / 6.0 * (3.0 * a * a + b * b) * c.exp()
                + 2.0 * b * x * (x - a) * (-h).exp() * c.sinh()
                - v0.exp() / (8.0 * l0) * quartic)
            + (-2.0 * (v0 + h)).exp() * (x * x + (a - x) * (a - x)) * bump;
        let s3 = pre / (2.0 * l0)
            * a
            * ((-h).exp() - 1.0)
            * ((3.0 * (-v0).exp() + v0.exp()) * a / 6.0 * (a * a + 3.0 * b * b)
                + (3.0 * (c - v0).exp() + (v0 - c).exp()) * b / 6.0 * (3.0 * a * a + b * b)
                - b * a * a * ((-h).exp() + 1.0) * (-v0).exp() * c.sinh()
                - quartic / (2.0 * l0))
            + pre / 3.0 * (x.powi(3) - (x - a).powi(3)) * (3.0 * (-v0 - 2.0 * h).exp() - v0.exp()) * bump;
        [s0, s1, s2, s3]
    }

    /// `(g₋₁, g₀)` at `0 < y ≤ x < a`.
    pub fn g(&self, x: f64, y: f64) -> (f64, f64) {
        let (_, v0) = self.l0_v0();
        let e = (v0 + self.h).exp();
        (0.5 * e, 0.5 * (x - y) + 0.5 * self.a * e * self.bump())
    }

    /// `r̄₀(W)`, `r̄₁(x; W)`, `r̄₂(x; W)` at `0 < x < a`.
    pub fn rbar(&self, x: f64, w: f64) -> [f64; 3] {
        let (a, b, c, h) = (self.a, self.b(), self.c, self.h);
        let (l0, v0) = self.l0_v0();
        let ch = (0.5 * (w - v0)).cosh();
        let r0 = (0.5 * (v0 - w)).tanh();
        let r1 = (x * (v0 + h).sinh() - 0.5 * a * v0.sinh()) / (ch * ch);
        let r2 = ((x * x * (v0 + h).sinh() - a * x * v0.sinh()) * (0.5 * (w + v0 + 2.0 * h)).cosh()
            - a / (12.0 * l0) * (a * a + 3.0 * b * b) * (0.5 * (w + v0)).sinh()
            - b / (12.0 * l0) * (3.0 * a * a + b * b) * (0.5 * (w + v0 - 2.0 * c)).sinh()
            + (l0.powi(4) + 4.0 * self.q()) / (16.0 * l0 * l0) * (0.5 * (w - v0)).sinh())
            / ch.powi(3);
        [r0, r1, r2]
    }

    /// `r₀ = tanh((V₀ + h)/2)`.
    pub fn r0(&self) -> f64 {
        let (_, v0) = self.l0_v0();
        (0.5 * (v0 + self.h)).tanh()
    }

    /// Edge shift `δ` of the effective square well.
    pub fn delta(&self) -> f64 {
        let (_, v0) = self.l0_v0();
        self.a * v0.sinh() / (2.0 * (v0 + self.h).sinh())
    }

    /// Effective square-well approximation to `G_S(x, y; k)`, `0 < y ≤ x < a`.
    pub fn effective_well_green(&self, x: f64, y: f64, k: Complex64) -> Complex64 {
        let (r0, d, a) = (self.r0(), self.delta(), self.a);
        let i = Complex64::i();
        let ph = |len: f64| (2.0 * i * k * len).exp();
        (1.0 + r0 * ph(a - x - d)) * (1.0 + r0 * ph(y - d)) * (i * k * (x - y)).exp()
            / (2.0 * i * k * (1.0 - r0 * r0 * ph(a - 2.0 * d)))
    }

    /// Infinite-wall limit `cos[k(x − a)] cos(ky) / (k sin ka)`.
    pub fn hard_wall_green(&self, x: f64, y: f64, k: Complex64) -> Complex64 {
        (k * (x - self.a)).cos() * (k * y).cos() / (k * (k * self.a).sin())
    }

    /// Single-period transfer entry `α(k)` of the tail starting at the cell origin.
    pub fn period_alpha(&self, k: Complex64) -> Complex64 {
        let t = (-0.5 * self.c).tanh();
        let i = Complex64::i();
        (-i * k * self.l).exp() * (1.0 - t * t * (2.0 * i * k * self.b()).exp()) / (1.0 - t * t)
    }
}

/// Kronig-Penney Schrödinger tail with a core barrier (generic zero-energy case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2 {
    pub c: f64,
    pub l: f64,
    pub a: f64,
    pub h: f64,
    /// Band-bottom energy.
    pub e0: f64,
}

/// `√(C − E) tanh(b√(C − E)/2) − √E tan(a√E/2)`; its smallest root is `E₀`.
pub fn example2_band_equation(c: f64, a: f64, b: f64, e: f64) -> f64 {
    let q = (c - e).sqrt();
    let p = e.sqrt();
    q * (0.5 * b * q).tanh() - p * (0.5 * a * p).tan()
}

impl Example2 {
    /// Solves for `E₀` by bisection of the band equation on `(0, min(C, (π/a)²))`.
    pub fn new(c: f64, l: f64, a: f64, h: f64) -> Result<Self> {
        if !(0.0 < a && a < l) || !(c > 0.0) {
            return Err(Error::Domain("need 0 < a < L and C > 0".into()));
        }
        let b = l - a;
        let hi_cap = c.min((std::f64::consts::PI / a).powi(2));
        let f = |e: f64| example2_band_equation(c, a, b, e);
        let (mut lo, mut hi) = (0.0, hi_cap * (1.0 - 1e-12));
        if f(lo) * f(hi) > 0.0 {
            return Err(Error::NoBandBottom("band equation has no sign change".into()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let e0 = 0.5 * (lo + hi);
        if !(h > e0) {
            return Err(Error::Domain(format!("closed forms need h > E0 (h = {h}, E0 = {e0})")));
        }
        Ok(Self { c, l, a, h, e0 })
    }

    pub fn b(&self) -> f64 {
        self.l - self.a
    }

    /// Unshifted `V_S`: wells of depth 0 and width `a`, barriers `C`, and `h` on `(0, a)`.
    pub fn profile(&self) -> PotentialProfile {
        let tail = PeriodicPotential::new(self.l, vec![(self.a, 0.0), (self.b(), self.c)], 0.0).expect("valid tail");
        PotentialProfile::symmetric(tail, vec![(0.0, self.h)], 0.0, self.a).expect("valid profile")
    }

    /// `(p, q, s, ξ)`.
    pub fn pqs_xi(&self) -> (f64, f64, f64, f64) {
        let p = self.e0.sqrt();
        let q = (self.c - self.e0).sqrt();
        let s = (self.h - self.e0).sqrt();
        (p, q, s, q / s * (0.5 * self.b() * q).tanh())
    }

    /// `ψ₀⁺` on `0 < x < a` (unnormalised).
    pub fn psi_plus(&self, x: f64) -> f64 {
        let (_, _, s, xi) = self.pqs_xi();
        (s * (x - self.a)).cosh() - xi * (s * (x - self.a)).sinh()
    }

    /// `ψ₀⁻(y) = ψ₀⁺(a − y)` on `0 < y < a`.
    pub fn psi_minus(&self, y: f64) -> f64 {
        let (_, _, s, xi) = self.pqs_xi();
        (s * y).cosh() + xi * (s * y).sinh()
    }

    pub fn wronskian(&self) -> f64 {
        let (_, _, s, xi) = self.pqs_xi();
        2.0 * xi * s * (s * self.a).cosh() + (1.0 + xi * xi) * s * (s * self.a).sinh()
    }

    /// `(P, M)` of the tail of `V⁺ = −2 log ψ₀⁺`.
    pub fn p_m(&self) -> (f64, f64) {
        let (p, q, _, _) = self.pqs_xi();
        let (a, b) = (self.a, self.b());
        let big_p = (b * q).sinh() / q + (a * p).sin() / p;
        let sech = 1.0 / (0.5 * b * q).cosh();
        let sec = 1.0 / (0.5 * a * p).cos();
        let big_m = 0.5 * b * sech * sech + 0.5 * a * sec * sec + (0.5 * b * q).tanh() / q + (0.5 * a * p).tan() / p;
        (big_p, big_m)
    }

    /// `(g₀, g₁)` at `0 < y ≤ x < a`.
    pub fn g(&self, x: f64, y: f64) -> (f64, f64) {
        let (_, _, s, _) = self.pqs_xi();
        let a = self.a;
        let w = self.wronskian();
        let (px, py) = (self.psi_plus(x), self.psi_plus(y));
        let (mx, my) = (self.psi_minus(x), self.psi_minus(y));
        let g0 = -px * my / w;
        let (big_p, big_m) = self.p_m();
        let ints = (s * (x - a)).sinh() / (s * px) - (s * (y - a)).sinh() / (s * py) + (s * x).sinh() / (s * mx)
            - (s * y).sinh() / (s * my);
        let ratios = (px / mx + mx / px + py / my + my / py) / w;
        let g1 = -0.5 * (big_m / big_p).sqrt() * (ints + ratios) * px * my / w;
        (g0, g1)
    }

    /// Exact `G_S(x, y; k)` at `0 < y ≤ x < a`, `Im k ≥ 0`.
    ///
    /// Square roots are principal, which selects the decaying solution for
    /// `k` in the open upper half plane.
    pub fn exact_green(&self, x: f64, y: f64, k: Complex64) -> Result<Complex64> {
        if !(0.0 < y && y <= x && x < self.a) {
            return Err(Error::Domain(format!("closed form needs 0 < y <= x < a (got x = {x}, y = {y})")));
        }
        let (a, b) = (self.a, self.b());
        let k2 = k * k;
        let pk = (k2 + self.e0).sqrt();
        let qk = (self.c - k2 - self.e0).sqrt();
        let sk = (self.h - k2 - self.e0).sqrt();
        let ratio = (qk * qk - pk * pk) / (2.0 * pk * qk);
        let alpha = (qk * b).exp() * ((pk * a).cos() + ratio * (pk * a).sin());
        let alpha_p = (-qk * b).exp() * ((pk * a).cos() - ratio * (pk * a).sin());
        let c1 = -self.c / (2.0 * pk * qk) * (-qk * b).exp() * (pk * a).sin();
        let tr = alpha + alpha_p;
        let c2 = (-alpha + alpha_p + Complex64::i() * (4.0 - tr * tr).sqrt()) / 2.0;
        let (sum, diff) = (c1 + c2, c1 - c2);
        let r = qk / sk;
        let psi_p = sum * (sk * (x - a)).cosh() + r * diff * (sk * (x - a)).sinh();
        let psi_m = sum * (sk * y).cosh() - r * diff * (sk * y).sinh();
        let w =
            (sum * sum + r * r * diff * diff) * sk * (sk * a).sinh() - 2.0 * qk * (c1 * c1 - c2 * c2) * (sk * a).cosh();
        Ok(-psi_p * psi_m / w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn example_one_constants_match_figures() {
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let (l0, v0) = e.l0_v0();
        assert_relative_eq!(l0, 1.122_80, epsilon = 1e-5);
        assert_relative_eq!(v0, 0.407_31, epsilon = 1e-5);
        assert_relative_eq!(e.g(0.4, 0.1).0, 2.0425, epsilon = 1e-4);
    }

    #[test]
    fn example_two_band_bottom() {
        let e = Example2::new(1.0, 1.0, 0.6, 0.5).unwrap();
        assert_relative_eq!(e.e0, 0.3952, epsilon = 5e-4);
        let (p, q, s, xi) = e.pqs_xi();
        assert_relative_eq!(xi, p / s * (0.5 * e.a * p).tan(), max_relative = 1e-10);
        assert!(q > 0.0 && s > 0.0);
    }

    #[test]
    fn example_two_coefficients_match_figure_values() {
        let e = Example2::new(1.0, 1.0, 0.6, 0.5).unwrap();
        let (g0, g1) = e.g(0.4, 0.1);
        assert_relative_eq!(g0, -3.28, epsilon = 0.01);
        assert_relative_eq!(g1, -21.85, epsilon = 0.05);
        let k = Complex64::new(1e-6, 1e-6);
        let exact = e.exact_green(0.4, 0.1, k).unwrap();
        assert_relative_eq!(exact.re, g0, max_relative = 1e-3);
    }
}
