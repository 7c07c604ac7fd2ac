//! Generic zero-energy case for Schrödinger potentials.
//!
//! A piecewise-constant `V_S` is shifted by `E₀` so that `k = 0` sits at the
//! bottom of the lowest band of its periodic tail. The positive zero-energy
//! solutions `ψ₀±` (bounded towards `±∞`) are built by exact per-segment
//! propagation and define Fokker-Planck potentials `V± = −2 log ψ₀±`. When
//! `ψ₀±` are independent, `G_S` is regular at `k = 0` and its coefficients
//! follow from `ψ₀±` alone.

use std::collections::BTreeMap;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expansion::{ExpansionResult, Provenance};
use crate::piecewise::normalize_breaks;
use crate::potential::{PeriodicPotential, PotentialProfile};

type C = Complex64;
type Mat = [[f64; 2]; 2];
type State = (f64, f64);

pub const MAX_GENERIC_ORDER: i32 = 2;
/// `|W| L / (‖ψ₀⁺‖ ‖ψ₀⁻‖)` below this marks the exceptional case.
pub const EXCEPTIONAL_THRESHOLD: f64 = 1e-8;
const GL_NODES: usize = 16;

/// Which infinity a zero-energy solution stays bounded towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// `(cosh(√z w), sinh(√z w)/√z, √z sinh(√z w))`, continued to all real `z`.
fn cs(z: f64, w: f64) -> (f64, f64, f64) {
    if z > 0.0 {
        let r = z.sqrt();
        let sh = (r * w).sinh();
        ((r * w).cosh(), sh / r, r * sh)
    } else if z < 0.0 {
        let r = (-z).sqrt();
        let sn = (r * w).sin();
        ((r * w).cos(), sn / r, -r * sn)
    } else {
        (1.0, w, 0.0)
    }
}

/// Solution of `ψ'' = zψ` carried a signed distance `w`.
fn step(z: f64, w: f64, (p, dp): State) -> State {
    let (c, s, zs) = cs(z, w);
    (c * p + s * dp, zs * p + c * dp)
}

/// `∫₀^w S(t)² dt` with `S = sinh(√z t)/√z`.
fn int_s2(z: f64, w: f64) -> f64 {
    let u = z * w * w;
    if u.abs() < 0.5 {
        let mut term = w.powi(3) / 3.0;
        let mut sum = term;
        for n in 2..40 {
            term *= 4.0 * u / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let (c, s, _) = cs(z, w);
        (c * s - w) / (2.0 * z)
    }
}

/// `∫₀^w ψ²` for the segment solution starting at `st`.
fn seg_int_sq(z: f64, w: f64, (p, dp): State) -> f64 {
    let (_, s, _) = cs(z, w);
    let f = int_s2(z, w);
    p * p * (w + z * f) + p * dp * s * s + dp * dp * f
}

/// `∫₀^w 1/ψ²` for the segment solution starting at `st`.
fn seg_int_inv_sq(z: f64, w: f64, st: State) -> f64 {
    let (_, s, _) = cs(z, w);
    s / (st.0 * step(z, w, st).0)
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn apply(m: &Mat, (p, dp): State) -> State {
    (m[0][0] * p + m[0][1] * dp, m[1][0] * p + m[1][1] * dp)
}

/// One-period matrix of `ψ'' = (V − e)ψ` acting on `(ψ, ψ')`, from the phase origin.
fn period_matrix(tail: &PeriodicPotential, e: f64) -> Mat {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for &(w, v) in tail.segments() {
        let (c, s, zs) = cs(v - e, w);
        m = mat_mul(&[[c, s], [zs, c]], &m);
    }
    m
}

/// `Y(E) = ½ tr M(E)` for the Schrödinger period matrix.
pub fn half_trace(tail: &PeriodicPotential, e: f64) -> f64 {
    let m = period_matrix(tail, e);
    0.5 * (m[0][0] + m[1][1])
}

/// Energy `E₀` of the bottom of the lowest band: the first root of `Y(E) = 1`
/// above `min V`, bracketed by a scan up to `mean V` and refined by bisection.
pub fn band_bottom_offset(tail: &PeriodicPotential) -> Result<f64> {
    if tail.is_constant() {
        return Ok(tail.segments()[0].1);
    }
    let f = |e: f64| half_trace(tail, e) - 1.0;
    let (lo, hi) = (tail.min_value(), tail.mean_value());
    if !(f(lo) > 0.0) {
        return Err(Error::NoBandBottom(format!("Y(min V) - 1 = {} is not positive", f(lo))));
    }
    let n = 4000;
    let mut a = lo;
    for i in 1..=n {
        let b = lo + (hi - lo) * i as f64 / n as f64;
        if f(b) <= 0.0 {
            let (mut l, mut r) = (a, b);
            // bisect to the last representable midpoint
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if mid <= l || mid >= r {
                    break;
                }
                if f(mid) > 0.0 {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            return Ok(0.5 * (l + r));
        }
        a = b;
    }
    Err(Error::NoBandBottom("Y(E) - 1 has no sign change below mean V".into()))
}

/// Band edges `k > 0` of the shifted tail, where `|Y(E₀ + k²)| = 1`, up to `k_max`.
pub fn schrodinger_band_edges(tail: &PeriodicPotential, e0: f64, k_max: f64) -> Result<Vec<f64>> {
    if !(k_max > 0.0) {
        return Err(Error::Domain("k_max must be positive".into()));
    }
    let f = |k: f64| half_trace(tail, e0 + k * k).abs() - 1.0;
    let samples = ((k_max * tail.period()).ceil() as usize * 2000).max(2000);
    let dk = k_max / samples as f64;
    let mut edges = Vec::new();
    let (mut prev_k, mut prev) = (0.5 * dk, f(0.5 * dk));
    for i in 1..=samples {
        let k = i as f64 * dk;
        let cur = f(k);
        if prev.signum() != cur.signum() {
            let (mut l, mut r) = (prev_k, k);
            for _ in 0..80 {
                let mid = 0.5 * (l + r);
                if f(l).signum() == f(mid).signum() {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            edges.push(0.5 * (l + r));
        }
        prev_k = k;
        prev = cur;
    }
    Ok(edges)
}

/// Schrödinger potential `V_S` together with its band-bottom shift `E₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerProfile {
    potential: PotentialProfile,
    energy_offset: f64,
    shifted: PotentialProfile,
}

impl SchrodingerProfile {
    /// Computes `E₀` from both tails; they must share their band bottom.
    pub fn new(potential: PotentialProfile) -> Result<Self> {
        let e_left = band_bottom_offset(potential.left_tail())?;
        let e_right = band_bottom_offset(potential.right_tail())?;
        if (e_left - e_right).abs() > 1e-9 * (1.0 + e_left.abs()) {
            return Err(Error::InvalidPotential(format!(
                "left and right tails have different band bottoms ({e_left} vs {e_right})"
            )));
        }
        Ok(Self::with_offset(potential, e_left))
    }

    pub fn with_offset(potential: PotentialProfile, energy_offset: f64) -> Self {
        let shifted = potential.shifted(-energy_offset);
        Self { potential, energy_offset, shifted }
    }

    pub fn potential(&self) -> &PotentialProfile {
        &self.potential
    }

    pub fn energy_offset(&self) -> f64 {
        self.energy_offset
    }

    /// `V_S − E₀`.
    pub fn shifted(&self) -> &PotentialProfile {
        &self.shifted
    }

    /// `Y` of each tail at `k = 0`; both are `1` at a band bottom.
    pub fn band_bottom_y(&self) -> (f64, f64) {
        (half_trace(self.shifted.left_tail(), 0.0), half_trace(self.shifted.right_tail(), 0.0))
    }
}

/// One-period integrals of `V_p = −2 log ψ₀` on the bounded tail:
/// `P = ∫ e^{V_p}`, `M = ∫ e^{−V_p}`, `L₀ = √(PM)`, `V₀ = ½ log(P/M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConstants {
    pub p: f64,
    pub m: f64,
    pub l0: f64,
    pub v0: f64,
}

impl TailConstants {
    fn new(p: f64, m: f64) -> Self {
        Self { p, m, l0: (p * m).sqrt(), v0: 0.5 * (p / m).ln() }
    }

    /// `e^{−V₀} = √(M/P)`.
    pub fn exp_minus_v0(&self) -> f64 {
        (self.m / self.p).sqrt()
    }
}

fn cell_floor(tail: &PeriodicPotential, x: f64) -> f64 {
    let (o, l) = (tail.phase_origin(), tail.period());
    o + ((x - o) / l).floor() * l
}

fn cell_ceil(tail: &PeriodicPotential, x: f64) -> f64 {
    let (o, l) = (tail.phase_origin(), tail.period());
    o + ((x - o) / l).ceil() * l
}

fn minus_identity(m: &Mat) -> Mat {
    [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]]
}

/// Positive kernel vector of a rank-≤1 matrix `N = M − I`.
fn kernel(n: &Mat, x: f64) -> Result<State> {
    let a = (n[0][1], -n[0][0]);
    let b = (n[1][1], -n[1][0]);
    let norm = |v: State| v.0.hypot(v.1);
    let mut v = if norm(a) >= norm(b) { a } else { b };
    if norm(v) < 1e-14 {
        v = (1.0, 0.0);
    }
    if v.0 == 0.0 {
        return Err(Error::PositivityViolation { x, value: 0.0 });
    }
    if v.0 < 0.0 {
        v = (-v.0, -v.1);
    }
    let s = norm(v);
    Ok((v.0 / s, v.1 / s))
}

/// Positive solution of `ψ'' = (V_S − E₀)ψ` bounded towards `+∞` (`Plus`) or `−∞` (`Minus`).
#[derive(Debug, Clone)]
pub struct ZeroEnergySolution {
    side: Sign,
    shifted: PotentialProfile,
    knots: Vec<f64>,
    states: Vec<State>,
    /// `M − I` for the left-tail cell ending at the first knot.
    left_n: Mat,
    /// `M − I` for the right-tail cell starting at the last knot.
    right_n: Mat,
    tail: TailConstants,
}

impl ZeroEnergySolution {
    pub fn side(&self) -> Sign {
        self.side
    }

    pub fn tail_constants(&self) -> TailConstants {
        self.tail
    }

    fn lo(&self) -> f64 {
        self.knots[0]
    }

    fn hi(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    fn value_at(&self, x: f64) -> f64 {
        self.shifted.eval(x)
    }

    /// Carries `s` from `a` to `b` through the segments in between.
    fn propagate(&self, a: f64, b: f64, mut s: State) -> State {
        if a == b {
            return s;
        }
        let (l, r) = if a < b { (a, b) } else { (b, a) };
        let pts = normalize_breaks(self.shifted.boundaries(l, r), l, r);
        if a < b {
            for w in pts.windows(2) {
                s = step(self.value_at(0.5 * (w[0] + w[1])), w[1] - w[0], s);
            }
        } else {
            for w in pts.windows(2).rev() {
                s = step(self.value_at(0.5 * (w[0] + w[1])), w[0] - w[1], s);
            }
        }
        s
    }

    /// `(ψ₀(x), ψ₀'(x))`.
    pub fn state(&self, x: f64) -> State {
        let (lo, hi) = (self.lo(), self.hi());
        if x < lo {
            let l = self.shifted.left_tail().period();
            let n = ((lo - x) / l).ceil();
            let secular = [
                [1.0 - n * self.left_n[0][0], -n * self.left_n[0][1]],
                [-n * self.left_n[1][0], 1.0 - n * self.left_n[1][1]],
            ];
            let base = lo - n * l;
            self.propagate(base, x, apply(&secular, self.states[0]))
        } else if x > hi {
            let l = self.shifted.right_tail().period();
            let n = ((x - hi) / l).floor();
            let secular = [
                [1.0 + n * self.right_n[0][0], n * self.right_n[0][1]],
                [n * self.right_n[1][0], 1.0 + n * self.right_n[1][1]],
            ];
            let base = hi + n * l;
            self.propagate(base, x, apply(&secular, self.states[self.states.len() - 1]))
        } else {
            let i = self.knots.partition_point(|k| *k <= x).saturating_sub(1).min(self.knots.len() - 2);
            self.propagate(self.knots[i], x, self.states[i])
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.state(x).0
    }

    /// `V(x) = −2 log ψ₀(x)`.
    pub fn potential(&self, x: f64) -> Result<f64> {
        let p = self.psi(x);
        if !(p > 0.0) {
            return Err(Error::PositivityViolation { x, value: p });
        }
        Ok(-2.0 * p.ln())
    }

    /// `f(x) = −½ V'(x) = ψ₀'/ψ₀`.
    pub fn force(&self, x: f64) -> Result<f64> {
        let (p, dp) = self.state(x);
        if !(p > 0.0) {
            return Err(Error::PositivityViolation { x, value: p });
        }
        Ok(dp / p)
    }

    /// Same solution multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive (got {c})")));
        }
        let mut out = self.clone();
        for s in &mut out.states {
            *s = (s.0 * c, s.1 * c);
        }
        out.tail = TailConstants::new(self.tail.p / (c * c), self.tail.m * c * c);
        Ok(out)
    }

    /// Segments of `[a, b]` (`a ≤ b`), each with its constant `V_S − E₀`.
    fn pieces(&self, a: f64, b: f64, max_len: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        if b <= a {
            return out;
        }
        let pts = normalize_breaks(self.shifted.boundaries(a, b), a, b);
        for w in pts.windows(2) {
            let z = self.value_at(0.5 * (w[0] + w[1]));
            let len = w[1] - w[0];
            // keep |z| h² and h small so fixed-order quadrature is exact to rounding
            let mut m = (len / max_len).ceil().max(1.0);
            m = m.max((len * z.abs().sqrt() / 0.5).ceil());
            let m = m as usize;
            for j in 0..m {
                let s = w[0] + len * j as f64 / m as f64;
                let e = if j + 1 == m { w[1] } else { w[0] + len * (j + 1) as f64 / m as f64 };
                out.push((s, e, z));
            }
        }
        out
    }

    /// `∫_a^b ψ₀²` (signed for `b < a`).
    pub fn int_sq(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.int_sq(b, a);
        }
        self.pieces(a, b, f64::INFINITY).iter().map(|&(s, e, z)| seg_int_sq(z, e - s, self.state(s))).sum()
    }

    /// `∫_a^b 1/ψ₀²` (signed for `b < a`).
    pub fn int_inv_sq(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.int_inv_sq(b, a);
        }
        self.pieces(a, b, f64::INFINITY).iter().map(|&(s, e, z)| seg_int_inv_sq(z, e - s, self.state(s))).sum()
    }

    /// Shift `n·L` (in periods of the bounded tail) that moves `[a, b]` into that tail.
    fn periodic_shift(&self, a: f64, b: f64) -> f64 {
        match self.side {
            Sign::Plus => {
                let l = self.shifted.right_tail().period();
                ((self.hi() - a) / l).ceil().max(0.0) * l
            }
            Sign::Minus => {
                let l = self.shifted.left_tail().period();
                -((b - self.lo()) / l).ceil().max(0.0) * l
            }
        }
    }

    fn period(&self) -> f64 {
        match self.side {
            Sign::Plus => self.shifted.right_tail().period(),
            Sign::Minus => self.shifted.left_tail().period(),
        }
    }

    /// `ₚ[+−]_{x−L}^x − ₚ[−+]_{x−L}^x` for `V_p = −2 log ψ_p`, with `ψ_p` the
    /// periodic continuation of the bounded tail.
    pub fn periodic_bracket_difference(&self, x: f64, gl: &GaussLegendre) -> f64 {
        let l = self.period();
        let shift = self.periodic_shift(x - l, x);
        let (a, b) = (x - l + shift, x + shift);
        // ₚ[+−] = ∫ ψ²(t) ∫_a^t ψ⁻²; ₚ[+−] + ₚ[−+] = PM
        let mut inner = 0.0;
        let mut pm = 0.0;
        for (s, e, z) in self.pieces(a, b, 0.25 * l) {
            let st = self.state(s);
            let half = 0.5 * (e - s);
            for (node, weight) in gl.iter() {
                let t = half * (node + 1.0);
                let psi = step(z, t, st).0;
                pm += weight * half * psi * psi * (inner + seg_int_inv_sq(z, t, st));
            }
            inner += seg_int_inv_sq(z, e - s, st);
        }
        2.0 * pm - self.tail.p * self.tail.m
    }

    /// `∫ (e^{V₀}Δ⁻ − e^{−V₀}Δ⁺)` over the unbounded-side remainder: `∫_x^∞` for
    /// `Plus`, `∫_{−∞}^x` for `Minus`, with `Δ^± = e^{±V} − e^{±V_p}`.
    pub fn delta_integral(&self, x: f64) -> f64 {
        let (a, b, sign) = match self.side {
            Sign::Plus => (x, self.hi(), 1.0),
            Sign::Minus => (self.lo(), x, 1.0),
        };
        if b <= a {
            return 0.0;
        }
        let shift = self.periodic_shift(a, b);
        let ev0 = 1.0 / self.tail.exp_minus_v0();
        let d_minus = self.int_sq(a, b) - self.int_sq(a + shift, b + shift);
        let d_plus = self.int_inv_sq(a, b) - self.int_inv_sq(a + shift, b + shift);
        sign * (ev0 * d_minus - d_plus / ev0)
    }

    /// `e^{V(x) − V₀} = e^{−V₀}/ψ₀(x)²`.
    pub fn exp_v_minus_v0(&self, x: f64) -> f64 {
        let p = self.psi(x);
        self.tail.exp_minus_v0() / (p * p)
    }
}

/// Builds `ψ₀±` from the band-bottom Bloch vector of the bounded tail,
/// normalised to `ψ₀(x_ref) = 1` with `x_ref = x_max` (`Plus`) or `x_min` (`Minus`).
pub fn zero_energy_solution(profile: &SchrodingerProfile, side: Sign) -> Result<ZeroEnergySolution> {
    let shifted = profile.shifted().clone();
    let (x_min, x_max) = shifted.window();
    let (lt, rt) = (shifted.left_tail().clone(), shifted.right_tail().clone());
    let lo = cell_floor(&lt, x_min);
    let hi = cell_ceil(&rt, x_max).max(lo + rt.period());
    let knots = normalize_breaks(shifted.boundaries(lo, hi), lo, hi);
    let ml = period_matrix(&lt, 0.0);
    let mr = period_matrix(&rt, 0.0);
    for m in [&ml, &mr] {
        let y = 0.5 * (m[0][0] + m[1][1]);
        if (y - 1.0).abs() > 1e-8 * (1.0 + m[0][1].abs().max(m[1][0].abs())) {
            return Err(Error::NumericalDegeneracy(format!("tail is not at a band bottom (Y = {y})")));
        }
    }
    let (left_n, right_n) = (minus_identity(&ml), minus_identity(&mr));
    let mut sol = ZeroEnergySolution {
        side,
        shifted,
        knots: knots.clone(),
        states: vec![(0.0, 0.0); knots.len()],
        left_n,
        right_n,
        tail: TailConstants::new(1.0, 1.0),
    };
    let last = knots.len() - 1;
    let zs: Vec<f64> = knots.windows(2).map(|w| sol.value_at(0.5 * (w[0] + w[1]))).collect();
    let z_of = |i: usize| zs[i];
    match side {
        Sign::Plus => {
            sol.states[last] = kernel(&right_n, hi)?;
            for i in (0..last).rev() {
                sol.states[i] = step(z_of(i), knots[i] - knots[i + 1], sol.states[i + 1]);
            }
        }
        Sign::Minus => {
            sol.states[0] = kernel(&left_n, lo)?;
            for i in 0..last {
                sol.states[i + 1] = step(z_of(i), knots[i + 1] - knots[i], sol.states[i]);
            }
        }
    }
    let x_ref = if side == Sign::Plus { x_max } else { x_min };
    let norm = sol.psi(x_ref);
    if !(norm > 0.0) {
        return Err(Error::PositivityViolation { x: x_ref, value: norm });
    }
    for s in &mut sol.states {
        *s = (s.0 / norm, s.1 / norm);
    }
    check_positive(&sol, lo - lt.period(), hi + rt.period())?;
    // growth on the unbounded side must keep ψ₀ positive
    let secular = match side {
        Sign::Plus => -apply(&left_n, sol.states[0]).0,
        Sign::Minus => apply(&right_n, sol.states[last]).0,
    };
    if secular < -1e-12 {
        let x = if side == Sign::Plus { lo } else { hi };
        return Err(Error::PositivityViolation { x, value: secular });
    }
    let (a, b) = match side {
        Sign::Plus => (hi, hi + rt.period()),
        Sign::Minus => (lo - lt.period(), lo),
    };
    sol.tail = TailConstants::new(sol.int_inv_sq(a, b), sol.int_sq(a, b));
    Ok(sol)
}

fn check_positive(sol: &ZeroEnergySolution, a: f64, b: f64) -> Result<()> {
    for (s, e, z) in sol.pieces(a, b, f64::INFINITY) {
        let st = sol.state(s);
        let samples = if z < 0.0 { 64 } else { 1 };
        for j in 0..=samples {
            let t = (e - s) * j as f64 / samples as f64;
            let p = step(z, t, st).0;
            if !(p > 0.0) {
                return Err(Error::PositivityViolation { x: s + t, value: p });
            }
        }
    }
    Ok(())
}

/// `(V⁺(x), V⁻(x), f⁺(x), f⁻(x))`.
pub fn fp_potentials(plus: &ZeroEnergySolution, minus: &ZeroEnergySolution, x: f64) -> Result<(f64, f64, f64, f64)> {
    Ok((plus.potential(x)?, minus.potential(x)?, plus.force(x)?, minus.force(x)?))
}

/// `W[ψ₀⁺, ψ₀⁻](x) = ψ₀⁺ψ₀⁻' − ψ₀⁺'ψ₀⁻`.
pub fn wronskian(plus: &ZeroEnergySolution, minus: &ZeroEnergySolution, x: f64) -> f64 {
    let (p, dp) = plus.state(x);
    let (m, dm) = minus.state(x);
    p * dm - dp * m
}

/// `|W| L / (‖ψ₀⁺‖ ‖ψ₀⁻‖)` with RMS norms over the first left-tail period below `x_min`.
pub fn relative_wronskian(plus: &ZeroEnergySolution, minus: &ZeroEnergySolution) -> f64 {
    let (x_min, _) = plus.shifted.window();
    let l = plus.shifted.left_tail().period();
    let (a, b) = (x_min - l, x_min);
    let rms = |s: &ZeroEnergySolution| (s.int_sq(a, b) / l).sqrt();
    wronskian(plus, minus, x_min).abs() / (rms(plus) * rms(minus))
}

/// `(s₋₁, s₀, s₁)(x)` of `S − 1` in the generic case.
fn s_terms(
    plus: &ZeroEnergySolution,
    minus: &ZeroEnergySolution,
    x: f64,
    with_s1: bool,
    gl: &GaussLegendre,
) -> (f64, f64, f64) {
    let (fp, fm) = (plus.force(x).unwrap_or(f64::NAN), minus.force(x).unwrap_or(f64::NAN));
    let (ep, em) = (plus.exp_v_minus_v0(x), minus.exp_v_minus_v0(x));
    let s_m1 = 0.5 * (fm - fp);
    let s0 = -0.5 * (em + ep);
    if !with_s1 {
        return (s_m1, s0, f64::NAN);
    }
    let (tp, tm) = (plus.tail_constants(), minus.tail_constants());
    let a1_right = em * (minus.periodic_bracket_difference(x, gl) / (4.0 * tm.l0) + 0.5 * minus.delta_integral(x));
    let a1_left = ep * (-plus.periodic_bracket_difference(x, gl) / (4.0 * tp.l0) + 0.5 * plus.delta_integral(x));
    (s_m1, s0, a1_right + a1_left)
}

/// `−∫_y^x s₁` by Gauss-Legendre on pieces free of potential jumps.
fn q2(plus: &ZeroEnergySolution, minus: &ZeroEnergySolution, x: f64, y: f64, gl: &GaussLegendre) -> f64 {
    if x == y {
        return 0.0;
    }
    let sh = &plus.shifted;
    let mut pts = sh.boundaries(y, x);
    pts.extend(sh.left_tail().boundaries(y, x));
    pts.extend(sh.right_tail().boundaries(y, x));
    let pts = normalize_breaks(pts, y, x);
    let max_len = 0.25 * sh.left_tail().period().min(sh.right_tail().period());
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let m = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
        for j in 0..m {
            let s = w[0] + (w[1] - w[0]) * j as f64 / m as f64;
            let e = w[0] + (w[1] - w[0]) * (j + 1) as f64 / m as f64;
            let (mid, half) = (0.5 * (s + e), 0.5 * (e - s));
            for (node, weight) in gl.iter() {
                acc += weight * half * s_terms(plus, minus, mid + half * node, true, gl).2;
            }
        }
    }
    -acc
}

/// `g₀ … g_N` (`N ≤ 2`) from given zero-energy solutions.
pub fn generic_green_coeffs_from(
    plus: &ZeroEnergySolution,
    minus: &ZeroEnergySolution,
    x: f64,
    y: f64,
    order: i32,
) -> Result<ExpansionResult> {
    if !(0..=MAX_GENERIC_ORDER).contains(&order) {
        return Err(Error::UnsupportedOrder { order, max: MAX_GENERIC_ORDER });
    }
    if x < y {
        return Err(Error::Domain(format!("needs x >= y (got x = {x}, y = {y})")));
    }
    let rel = relative_wronskian(plus, minus);
    if !(rel >= EXCEPTIONAL_THRESHOLD) {
        return Err(Error::ExceptionalCase { relative_wronskian: rel });
    }
    let gl = GaussLegendre::new(GL_NODES).map_err(|e| Error::NumericalDegeneracy(e.to_string()))?;
    let w = wronskian(plus, minus, x);
    let (px, mx, py, my) = (plus.psi(x), minus.psi(x), plus.psi(y), minus.psi(y));
    for (pt, v) in [(x, px), (x, mx), (y, py), (y, my)] {
        if !(v > 0.0) {
            return Err(Error::PositivityViolation { x: pt, value: v });
        }
    }
    let g0 = -px * my / w;
    let mut g = BTreeMap::from([(0, g0)]);
    let mut q = BTreeMap::from([(0, -0.5 * ((mx / my).ln() - (px / py).ln()))]);
    let mut provenance = BTreeMap::from([(0, Provenance::Wronskian)]);
    let (mut t_x, mut t_y) = (BTreeMap::new(), BTreeMap::new());
    if order >= 1 {
        let with_s1 = order >= 2;
        let (sx_m1, sx0, sx1) = s_terms(plus, minus, x, with_s1, &gl);
        let (sy_m1, sy0, sy1) = s_terms(plus, minus, y, with_s1, &gl);
        // ∫1/ψ₊² = [ψ₋/ψ₊]/W, ∫1/ψ₋² = −[ψ₊/ψ₋]/W
        let (ep, em) = (plus.tail_constants().exp_minus_v0(), minus.tail_constants().exp_minus_v0());
        let q1 = 0.5 * (ep * (mx / px - my / py) / w - em * (px / mx - py / my) / w);
        let (rx0, ry0) = (sx0 / sx_m1, sy0 / sy_m1);
        g.insert(1, (q1 - 0.5 * rx0 - 0.5 * ry0) * g0);
        q.insert(1, q1);
        provenance.insert(1, Provenance::ZeroEnergyClosedForm);
        t_x.insert(0, rx0);
        t_y.insert(0, ry0);
        if order >= 2 {
            let q2 = q2(plus, minus, x, y, &gl);
            let (rx1, ry1) = (sx1 / sx_m1, sy1 / sy_m1);
            let bracket = q2 + 0.5 * q1 * q1 - 0.5 * q1 * (rx0 + ry0) - 0.5 * (rx1 + ry1)
                + 0.375 * rx0 * rx0
                + 0.375 * ry0 * ry0
                + 0.25 * rx0 * ry0;
            g.insert(2, bracket * g0);
            q.insert(2, q2);
            provenance.insert(2, Provenance::ZeroEnergyQuadrature);
            t_x.insert(1, rx1);
            t_y.insert(1, ry1);
        }
    }
    Ok(ExpansionResult { x, y, g, q, t_x, t_y, provenance })
}

/// `g₀ … g_N` (`N ≤ 2`) of `G_S(x, y; k)` for `x ≥ y` in the generic case.
pub fn generic_green_coeffs(profile: &SchrodingerProfile, x: f64, y: f64, order: i32) -> Result<ExpansionResult> {
    let plus = zero_energy_solution(profile, Sign::Plus)?;
    let minus = zero_energy_solution(profile, Sign::Minus)?;
    generic_green_coeffs_from(&plus, &minus, x, y, order)
}

type CMat = [[C; 2]; 2];
type CState = (C, C);

fn cstep(z: C, w: f64, (p, dp): CState) -> CState {
    let r = z.sqrt();
    let (c, s, zs) = if r == C::new(0.0, 0.0) {
        (C::new(1.0, 0.0), C::new(w, 0.0), C::new(0.0, 0.0))
    } else {
        let sh = (r * w).sinh();
        ((r * w).cosh(), sh / r, r * sh)
    };
    (c * p + s * dp, zs * p + c * dp)
}

fn cperiod_matrix(tail: &PeriodicPotential, k2: C) -> CMat {
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let mut cols = [(one, zero), (zero, one)];
    for &(w, v) in tail.segments() {
        for c in &mut cols {
            *c = cstep(v - k2, w, *c);
        }
    }
    [[cols[0].0, cols[1].0], [cols[0].1, cols[1].1]]
}

/// Bloch multiplier and eigenvector of `M`; `decaying` picks `|μ| ≤ 1`.
fn bloch_vector(tail: &PeriodicPotential, k: C, decaying: bool) -> Result<(C, CState)> {
    let pick = |k: C| {
        let m = cperiod_matrix(tail, k * k);
        let y = 0.5 * (m[0][0] + m[1][1]);
        let root = (y * y - 1.0).sqrt();
        let (a, b) = (y + root, y - root);
        let want_a = if decaying { a.norm() <= b.norm() } else { a.norm() >= b.norm() };
        (m, a, b, if want_a { a } else { b })
    };
    let (m, a, b, mut mu) = pick(k);
    if (a.norm() - b.norm()).abs() < 1e-8 {
        let eps = 1e-9 * k.norm().max(1.0);
        let (_, _, _, probe) = pick(k + C::new(0.0, eps));
        mu = if (a - probe).norm() <= (b - probe).norm() { a } else { b };
    }
    let v1 = (m[0][1], mu - m[0][0]);
    let v2 = (mu - m[1][1], m[1][0]);
    let n = |v: CState| v.0.norm().hypot(v.1.norm());
    let v = if n(v1) >= n(v2) { v1 } else { v2 };
    if n(v) == 0.0 {
        return Err(Error::NumericalDegeneracy(format!("Bloch vector undetermined at k = {k}")));
    }
    Ok((mu, v))
}

fn cpropagate(profile: &PotentialProfile, a: f64, b: f64, k2: C, mut s: CState) -> CState {
    if a == b {
        return s;
    }
    let (l, r) = if a < b { (a, b) } else { (b, a) };
    let pts = normalize_breaks(profile.boundaries(l, r), l, r);
    let segs: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[1] - w[0], profile.eval(0.5 * (w[0] + w[1])))).collect();
    if a < b {
        for (w, v) in segs {
            s = cstep(v - k2, w, s);
        }
    } else {
        for (w, v) in segs.into_iter().rev() {
            s = cstep(v - k2, -w, s);
        }
    }
    s
}

/// Exact `G_S(x, y; k) = −ψ⁺(x)ψ⁻(y)/W[ψ⁺, ψ⁻]` at energy `E₀ + k²`, `x ≥ y`,
/// with `ψ±` the Bloch solutions decaying towards `±∞`.
pub fn schrodinger_green(profile: &SchrodingerProfile, x: f64, y: f64, k: C) -> Result<C> {
    if x < y {
        return Err(Error::Domain(format!("needs x >= y (got x = {x}, y = {y})")));
    }
    if k.im < 0.0 || k == C::new(0.0, 0.0) {
        return Err(Error::Domain(format!("needs Im k >= 0 and k != 0 (got {k})")));
    }
    let sh = profile.shifted();
    let (x_min, x_max) = sh.window();
    let (lt, rt) = (sh.left_tail(), sh.right_tail());
    let lo = cell_floor(lt, x_min);
    let hi = cell_ceil(rt, x_max);
    let k2 = k * k;
    let (_, vr) = bloch_vector(rt, k, true)?;
    let (_, vl) = bloch_vector(lt, k, false)?;
    let plus_x = cpropagate(sh, hi, x, k2, vr);
    let minus_y = cpropagate(sh, lo, y, k2, vl);
    let minus_x = cpropagate(sh, y, x, k2, minus_y);
    let w = plus_x.0 * minus_x.1 - plus_x.1 * minus_x.0;
    if w.norm() == 0.0 {
        return Err(Error::Pole { re: k.re, im: k.im, what: "vanishing Wronskian".into() });
    }
    Ok(-plus_x.0 * minus_y.0 / w)
}
