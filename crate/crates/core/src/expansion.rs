//! Small-k coefficients of the reflection coefficient, of `S(x, k)` and of the
//! Green function for Fokker-Planck potentials with periodic tails.
//!
//! Every coefficient is a step function `e^{V(x)}` times a piecewise
//! polynomial in `x`, so all integrals are carried out exactly on a finite
//! evaluation domain that covers the perturbation window plus one period on
//! each side. Integrals over `Δ±` are clipped to that domain, which is exact
//! because `Δ±` vanish outside the window.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::brackets::{backward_weighted, forward_weighted, periodic_bracket_fn, word};
use crate::error::{Error, Result};
use crate::periodic::PeriodConstants;
use crate::piecewise::{PiecewisePoly, Steps};
use crate::potential::{PotentialProfile, Side};

/// Which formula family produced a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Reduced symmetric-tail formulas for `s_n`.
    SymmetricSeries,
    /// Sum of left-tail `a_n^R` and right-tail `a_n^L`.
    TwoSidedSeries,
    /// Zero-energy Wronskian form (generic case).
    Wronskian,
    /// Closed-form integrals of the zero-energy solutions (generic case).
    ZeroEnergyClosedForm,
    /// Zero-energy closed forms plus one Gauss-Legendre integral (generic case).
    ZeroEnergyQuadrature,
}

/// Reflection side for [`a_coeffs`]: `R` is the expansion of `S_r`, `L` of `S_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    R,
    L,
}

/// Highest `r̄_n` / `a_n` order with explicit formulas.
pub const MAX_RBAR_ORDER: u32 = 2;
/// Highest Green coefficient order for the symmetric case.
pub const MAX_GREEN_ORDER: i32 = 2;

/// Tail-dependent pieces shared by all formulas, on a fixed domain.
struct Ingredients {
    c: PeriodConstants,
    /// `e^{V}` of the full profile.
    ev: Steps,
    /// `e^{V} − e^{V_p}` and `e^{−V} − e^{−V_p}`.
    dp: Steps,
    dm: Steps,
    /// `e^{V₀}Δ⁻ − e^{−V₀}Δ⁺`.
    d: PiecewisePoly,
    /// `ₚ[+−] − ₚ[−+]`, `ₚ[+−+]`, `ₚ[−+−]` as functions of the window end.
    k: PiecewisePoly,
    a3: PiecewisePoly,
    b3: PiecewisePoly,
    v: Steps,
}

impl Ingredients {
    fn new(profile: &PotentialProfile, side: Side, lo: f64, hi: f64) -> Self {
        let tail = profile.tail(side);
        let c = PeriodConstants::of(tail);
        let v = profile.steps(lo, hi);
        let vp = profile.tail_steps(lo, hi, side);
        let dp = v.zip_with(&vp, |a, b| if a == b { 0.0 } else { a.exp() - b.exp() });
        let dm = v.zip_with(&vp, |a, b| if a == b { 0.0 } else { (-a).exp() - (-b).exp() });
        let (e_p, e_m) = (c.v0.exp(), (-c.v0).exp());
        let d = dm.zip_with(&dp, |m, p| e_p * m - e_m * p).to_poly();
        let k = periodic_bracket_fn(&word("+-"), tail, lo, hi).sub(&periodic_bracket_fn(&word("-+"), tail, lo, hi));
        let a3 = periodic_bracket_fn(&word("+-+"), tail, lo, hi);
        let b3 = periodic_bracket_fn(&word("-+-"), tail, lo, hi);
        Self { c, ev: v.map(f64::exp), dp, dm, d, k, a3, b3, v }
    }

    fn span(&self) -> (f64, f64) {
        self.v.span()
    }

    fn constant(&self, value: f64) -> PiecewisePoly {
        let (lo, hi) = self.span();
        PiecewisePoly::constant(lo, hi, value)
    }

    /// `(L₀⁴ + 4Q) / (8L₀)`.
    fn quartic(&self) -> f64 {
        (self.c.l0.powi(4) + 4.0 * self.c.q) / (8.0 * self.c.l0)
    }

    /// Brace of `a_n^R` / `a_n^L` (the factor multiplying `e^{V(x)}`).
    fn a_brace(&self, branch: Branch, n: u32) -> PiecewisePoly {
        let PeriodConstants { l0, v0, .. } = self.c;
        let (em1, em2) = ((-v0).exp(), (-2.0 * v0).exp());
        let sign = if branch == Branch::R { 1.0 } else { -1.0 };
        match n {
            0 => self.constant(-0.5 * em1),
            1 => {
                let integral = match branch {
                    Branch::R => self.d.antiderivative(),
                    Branch::L => self.d.antiderivative_from_right(),
                };
                self.k.scale(sign * em1 / (4.0 * l0)).add(&integral.scale(0.5 * em1))
            }
            _ => {
                let kdp = self.k.mul_steps(&self.dp);
                let (kdp_int, weighted) = match branch {
                    Branch::R => (kdp.antiderivative(), forward_weighted(&self.d, &word("+"), &self.v)),
                    Branch::L => (kdp.antiderivative_from_right(), backward_weighted(&self.d, &word("+"), &self.v)),
                };
                self.a3
                    .scale(em1 * em1)
                    .add_constant(-em1 * self.quartic())
                    .scale(1.0 / (2.0 * l0))
                    .add(&kdp_int.scale(sign * em2 / (2.0 * l0)))
                    .add(&weighted.scale(em2))
            }
        }
    }

    /// Braces of `s₀ … s₃` from the reduced symmetric formulas.
    fn s_braces(&self) -> Vec<PiecewisePoly> {
        let PeriodConstants { l0, v0, q, .. } = self.c;
        let (ep, em) = (v0.exp(), (-v0).exp());
        let pre = (-2.0 * v0).exp() / (2.0 * l0);
        let d_total = self.d.integral();
        let s0 = self.constant(-em);
        let s1 = self.constant(0.5 * em * d_total);

        let kdp = self.k.mul_steps(&self.dp);
        let plus = word("+");
        let s2 = self
            .a3
            .scale(2.0)
            .add_constant(-ep * (l0.powi(3) / 4.0 + q / l0))
            .add(&kdp.antiderivative())
            .sub(&kdp.antiderivative_from_right())
            .add(&forward_weighted(&self.d, &plus, &self.v).scale(2.0 * l0))
            .add(&backward_weighted(&self.d, &plus, &self.v).scale(2.0 * l0))
            .scale(pre);

        let full = self
            .a3
            .scale(3.0 * em)
            .add(&self.b3.scale(ep))
            .add_constant(-l0.powi(3) / 2.0 - 2.0 * q / l0)
            .mul_steps(&self.dp)
            .integral();
        let e = self.dp.zip_with(&self.dm, |p, m| 3.0 * em * p - ep * m);
        let ke = self.k.mul_steps(&e);
        let s3 = self
            .constant(full)
            .add(&forward_weighted(&ke, &plus, &self.v))
            .sub(&backward_weighted(&ke, &plus, &self.v))
            .add(
                &forward_weighted(&self.d, &word("++"), &self.v)
                    .scale(3.0 * em)
                    .sub(&forward_weighted(&self.d, &word("-+"), &self.v).scale(ep))
                    .scale(2.0 * l0),
            )
            .add(
                &backward_weighted(&self.d, &word("++"), &self.v)
                    .scale(3.0 * em)
                    .sub(&backward_weighted(&self.d, &word("+-"), &self.v).scale(ep))
                    .scale(2.0 * l0),
            )
            .scale(pre);
        vec![s0, s1, s2, s3]
    }

    /// `r̄₀ … r̄_n` at `x` for reference level `W`, against this tail.
    fn rbar(&self, x: f64, w: f64, n: u32) -> Vec<f64> {
        let PeriodConstants { l0, v0, .. } = self.c;
        let half = 0.5 * (w - v0);
        let ch = half.cosh();
        let mut out = vec![-half.tanh()];
        if n >= 1 {
            let r1 = self.k.eval(x) / (4.0 * l0 * ch * ch) + self.d.antiderivative().eval(x) / (2.0 * ch * ch);
            out.push(r1);
        }
        if n >= 2 {
            let (up, dn) = ((0.5 * (w + v0)).exp(), (-0.5 * (w + v0)).exp());
            let periodic =
                dn * self.a3.eval(x) - up * self.b3.eval(x) + (l0.powi(4) + 4.0 * self.c.q) / (4.0 * l0) * half.sinh();
            let mix = self.dm.zip_with(&self.dp, |m, p| up * m + dn * p);
            let local = self.k.mul_steps(&mix).antiderivative().eval(x)
                + 2.0
                    * l0
                    * (up * forward_weighted(&self.d, &word("-"), &self.v).eval(x)
                        + dn * forward_weighted(&self.d, &word("+"), &self.v).eval(x));
            out.push((periodic + local) / (4.0 * l0 * ch.powi(3)));
        }
        out
    }
}

fn check_order(n: u32) -> Result<()> {
    if n > MAX_RBAR_ORDER {
        return Err(Error::UnsupportedOrder { order: n as i32, max: MAX_RBAR_ORDER as i32 });
    }
    Ok(())
}

/// Evaluation domain covering `points`, the window and one period on each side.
fn domain(profile: &PotentialProfile, points: &[f64]) -> (f64, f64) {
    let (x_min, x_max) = profile.window();
    let lo = points.iter().copied().fold(x_min, f64::min) - profile.left_tail().period();
    let hi = points.iter().copied().fold(x_max, f64::max) + profile.right_tail().period();
    (lo, hi)
}

/// `r̄_n(x; W)` for the semi-infinite problem to the left of `x` (`n ≤ 2`).
pub fn rbar(n: u32, x: f64, w: f64, profile: &PotentialProfile) -> Result<f64> {
    check_order(n)?;
    let (lo, hi) = domain(profile, &[x]);
    Ok(Ingredients::new(profile, Side::Left, lo, hi).rbar(x, w, n)[n as usize])
}

/// `r_n(x)`, the coefficients of `R_r(x, −∞; k) = Σ (ik)^n r_n`, for `n ≤ max_order`.
pub fn reflection_series(x: f64, profile: &PotentialProfile, max_order: u32) -> Result<Vec<f64>> {
    check_order(max_order)?;
    let (lo, hi) = domain(profile, &[x]);
    Ok(Ingredients::new(profile, Side::Left, lo, hi).rbar(x, profile.eval(x), max_order))
}

/// `a_n^R(x)` (left tail) or `a_n^L(x)` (right tail).
pub fn a_coeffs(x: f64, profile: &PotentialProfile, branch: Branch, n: u32) -> Result<f64> {
    check_order(n)?;
    let (lo, hi) = domain(profile, &[x]);
    let side = match branch {
        Branch::R => Side::Left,
        Branch::L => Side::Right,
    };
    let ing = Ingredients::new(profile, side, lo, hi);
    Ok(ing.ev.eval(x) * ing.a_brace(branch, n).eval(x))
}

/// `s₀ … s_N` on a finite domain, each stored as `e^{V(x)} · brace(x)`.
#[derive(Debug, Clone)]
pub struct SCoefficients {
    ev: Steps,
    braces: Vec<PiecewisePoly>,
    provenance: Provenance,
    t1_parts: Option<(PiecewisePoly, f64)>,
}

impl SCoefficients {
    pub fn max_order(&self) -> i32 {
        self.braces.len() as i32 - 1
    }

    pub fn span(&self) -> (f64, f64) {
        self.ev.span()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    fn check(&self, n: i32, x: f64) -> Result<usize> {
        if n < 0 || n > self.max_order() {
            return Err(Error::UnsupportedOrder { order: n, max: self.max_order() });
        }
        let (lo, hi) = self.span();
        if x < lo || x > hi {
            return Err(Error::Domain(format!("x = {x} is outside the evaluation domain [{lo}, {hi}]")));
        }
        Ok(n as usize)
    }

    /// `s_n(x)`.
    pub fn eval(&self, n: i32, x: f64) -> Result<f64> {
        let i = self.check(n, x)?;
        Ok(self.ev.eval(x) * self.braces[i].eval(x))
    }

    /// `t_n(x) = s_n(x) / s₀(x)`.
    pub fn t(&self, n: i32, x: f64) -> Result<f64> {
        let i = self.check(n, x)?;
        Ok(self.braces[i].eval(x) / self.braces[0].eval(x))
    }

    /// `q_n(x, y) = −∫_y^x s_{n−1}`.
    pub fn q(&self, n: i32, x: f64, y: f64) -> Result<f64> {
        let i = self.check(n - 1, x)?;
        self.check(n - 1, y)?;
        Ok(-self.braces[i].mul_steps(&self.ev).integrate(y, x))
    }

    /// `s_n` as a piecewise polynomial (exact on the domain).
    pub fn poly(&self, n: i32) -> Result<PiecewisePoly> {
        let (lo, _) = self.span();
        let i = self.check(n, lo)?;
        Ok(self.braces[i].mul_steps(&self.ev))
    }

    /// `t₁(x)` assembled directly from tail brackets and `Δ`-integrals
    /// (two-sided profiles only); equals [`SCoefficients::t`] with `n = 1`.
    pub fn t1_direct(&self, x: f64) -> Option<f64> {
        self.t1_parts.as_ref().map(|(p, c)| p.eval(x) / c)
    }
}

/// `s₀ … s_{up_to}` (`up_to ≤ 3`) for a profile with identical tails, on the
/// window extended by one period on each side.
pub fn s_coeffs(profile: &PotentialProfile, up_to: u32) -> Result<SCoefficients> {
    let (lo, hi) = domain(profile, &[]);
    s_coeffs_on(profile, up_to, lo, hi)
}

/// As [`s_coeffs`], on an explicit domain `[lo, hi]`.
pub fn s_coeffs_on(profile: &PotentialProfile, up_to: u32, lo: f64, hi: f64) -> Result<SCoefficients> {
    if up_to > 3 {
        return Err(Error::UnsupportedOrder { order: up_to as i32, max: 3 });
    }
    if !profile.is_symmetric() {
        return Err(Error::Domain("tails differ; use s_coeffs_two_sided".into()));
    }
    let ing = Ingredients::new(profile, Side::Left, lo, hi);
    let mut braces = ing.s_braces();
    braces.truncate(up_to as usize + 1);
    Ok(SCoefficients { ev: ing.ev, braces, provenance: Provenance::SymmetricSeries, t1_parts: None })
}

/// `s_n = a_n^R + a_n^L` (`n ≤ 2`) with the left tail feeding `a^R` and the
/// right tail feeding `a^L`; works for identical tails too.
pub fn s_coeffs_two_sided(profile: &PotentialProfile) -> Result<SCoefficients> {
    let (lo, hi) = domain(profile, &[]);
    s_coeffs_two_sided_on(profile, lo, hi)
}

/// As [`s_coeffs_two_sided`], on an explicit domain `[lo, hi]`.
pub fn s_coeffs_two_sided_on(profile: &PotentialProfile, lo: f64, hi: f64) -> Result<SCoefficients> {
    let left = Ingredients::new(profile, Side::Left, lo, hi);
    let right = Ingredients::new(profile, Side::Right, lo, hi);
    let braces: Vec<PiecewisePoly> =
        (0..=MAX_RBAR_ORDER).map(|n| left.a_brace(Branch::R, n).add(&right.a_brace(Branch::L, n))).collect();

    let (e1, e2) = ((-left.c.v0).exp(), (-right.c.v0).exp());
    let t1 = left
        .k
        .scale(e1 / (2.0 * left.c.l0))
        .sub(&right.k.scale(e2 / (2.0 * right.c.l0)))
        .add(&left.d.antiderivative().scale(e1))
        .add(&right.d.antiderivative_from_right().scale(e2))
        .scale(-1.0);
    Ok(SCoefficients { ev: left.ev, braces, provenance: Provenance::TwoSidedSeries, t1_parts: Some((t1, e1 + e2)) })
}

/// Green coefficients `g₋₁ … g_N` at `(x, y)` with supporting `q_n`, `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult {
    pub x: f64,
    pub y: f64,
    pub g: BTreeMap<i32, f64>,
    pub q: BTreeMap<i32, f64>,
    pub t_x: BTreeMap<i32, f64>,
    pub t_y: BTreeMap<i32, f64>,
    pub provenance: BTreeMap<i32, Provenance>,
}

impl ExpansionResult {
    pub fn g(&self, n: i32) -> Option<f64> {
        self.g.get(&n).copied()
    }

    /// Highest order present.
    pub fn order(&self) -> i32 {
        self.g.keys().copied().max().unwrap_or(-1)
    }

    /// `Σ_n (ik)^n g_n`.
    pub fn partial_sum(&self, k: Complex64) -> Complex64 {
        let ik = Complex64::i() * k;
        self.g.iter().map(|(n, g)| ik.powi(*n) * g).sum()
    }
}

/// Assembles `g₋₁ … g_N` from `q_n` and `t_n` (exceptional case).
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_exceptional(
    x: f64,
    y: f64,
    s0x: f64,
    s0y: f64,
    q: &BTreeMap<i32, f64>,
    tx: &BTreeMap<i32, f64>,
    ty: &BTreeMap<i32, f64>,
    order: i32,
) -> BTreeMap<i32, f64> {
    let gm1 = 1.0 / (2.0 * (s0x * s0y).sqrt());
    let mut g = BTreeMap::new();
    g.insert(-1, gm1);
    let get = |m: &BTreeMap<i32, f64>, n| m.get(&n).copied().unwrap_or(0.0);
    let (q1, q2, q3) = (get(q, 1), get(q, 2), get(q, 3));
    let (a1, a2, a3) = (get(tx, 1), get(tx, 2), get(tx, 3));
    let (b1, b2, b3) = (get(ty, 1), get(ty, 2), get(ty, 3));
    if order >= 0 {
        g.insert(0, (q1 - 0.5 * (a1 + b1)) * gm1);
    }
    let quad = 3.0 / 8.0 * (a1 * a1 + b1 * b1) + a1 * b1 / 4.0;
    if order >= 1 {
        let brace = q2 + 0.5 * q1 * q1 - 0.5 * q1 * (a1 + b1) - 0.5 * (a2 + b2) + quad;
        g.insert(1, brace * gm1);
    }
    if order >= 2 {
        let brace = q3 + q1 * q2 + q1.powi(3) / 6.0 - (0.25 * q1 * q1 + 0.5 * q2) * (a1 + b1)
            + q1 * (quad - 0.5 * (a2 + b2))
            - 0.5 * (a3 + b3)
            + 0.75 * (a1 * a2 + b1 * b2)
            - 5.0 / 16.0 * (a1.powi(3) + b1.powi(3))
            + 0.25 * (a2 * b1 + b2 * a1)
            - 3.0 / 16.0 * a1 * b1 * (a1 + b1);
        g.insert(2, brace * gm1);
    }
    let _ = (x, y);
    g
}

/// Green coefficients `g₋₁ … g_N` at `x ≥ y`.
///
/// Identical tails support `N ≤ 2`; differing tails support `N ≤ 1`.
pub fn green_coeffs(profile: &PotentialProfile, x: f64, y: f64, order: i32) -> Result<ExpansionResult> {
    if x < y {
        return Err(Error::Domain(format!("green_coeffs needs x >= y (got x = {x}, y = {y})")));
    }
    let max = if profile.is_symmetric() { MAX_GREEN_ORDER } else { 1 };
    if !(-1..=max).contains(&order) {
        return Err(Error::UnsupportedOrder { order, max });
    }
    let (lo, hi) = domain(profile, &[x, y]);
    let s = if profile.is_symmetric() {
        s_coeffs_on(profile, (order + 1) as u32, lo, hi)?
    } else {
        s_coeffs_two_sided_on(profile, lo, hi)?
    };
    let mut q = BTreeMap::new();
    let (mut t_x, mut t_y) = (BTreeMap::new(), BTreeMap::new());
    q.insert(0, 0.0);
    for n in 1..=order + 1 {
        q.insert(n, s.q(n, x, y)?);
        t_x.insert(n, s.t(n, x)?);
        t_y.insert(n, s.t(n, y)?);
    }
    let g = assemble_exceptional(x, y, s.eval(0, x)?, s.eval(0, y)?, &q, &t_x, &t_y, order);
    let provenance = g.keys().map(|n| (*n, s.provenance())).collect();
    Ok(ExpansionResult { x, y, g, q, t_x, t_y, provenance })
}
