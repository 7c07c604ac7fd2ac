//! Exact finite-k scattering for piecewise-constant Fokker-Planck potentials.
//!
//! The first-order system `U' = [[−ik, f], [f, ik]] U` with `f = −V'/2` is
//! solved exactly: free propagation `diag(e^{−ikw}, e^{ikw})` inside a
//! constant segment and a hyperbolic rotation at every jump of `V`. To keep
//! full relative accuracy as `k → 0` each segment is written in the frame
//! where it is a small perturbation of the identity, so `U − (k = 0 limit)`
//! is accumulated without cancellation.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::piecewise::normalize_breaks;
use crate::potential::{PeriodicPotential, PotentialProfile};
use crate::reference::{Example1, Example2};

type C = Complex64;
type Mat = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Anything with a right-continuous piecewise-constant `V`.
pub trait Layered {
    fn value(&self, x: f64) -> f64;
    /// Candidate jump locations inside `[a, b]`.
    fn jumps(&self, a: f64, b: f64) -> Vec<f64>;
}

impl Layered for PeriodicPotential {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn jumps(&self, a: f64, b: f64) -> Vec<f64> {
        self.boundaries(a, b)
    }
}

impl Layered for PotentialProfile {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn jumps(&self, a: f64, b: f64) -> Vec<f64> {
        self.boundaries(a, b)
    }
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Hyperbolic rotation `[[cosh(v/2), −sinh(v/2)], [−sinh(v/2), cosh(v/2)]]`.
fn hyp(v: f64) -> Mat {
    let (c, s) = ((0.5 * v).cosh(), (0.5 * v).sinh());
    [[C::from(c), C::from(-s)], [C::from(-s), C::from(c)]]
}

/// `e^z − 1` without cancellation for small `|z|`.
fn expm1(z: C) -> C {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    C::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
}

/// Transfer matrix `U(x, x'; k) = [[α, β⁻], [β, α⁻]]`, where `⁻` denotes `k → −k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub alpha: C,
    pub beta_minus: C,
    pub beta: C,
    pub alpha_minus: C,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self::from_mat(&[[ONE, ZERO], [ZERO, ONE]])
    }

    fn from_mat(m: &Mat) -> Self {
        Self { alpha: m[0][0], beta_minus: m[0][1], beta: m[1][0], alpha_minus: m[1][1] }
    }

    pub fn to_mat(&self) -> [[C; 2]; 2] {
        [[self.alpha, self.beta_minus], [self.beta, self.alpha_minus]]
    }

    pub fn det(&self) -> C {
        self.alpha * self.alpha_minus - self.beta * self.beta_minus
    }

    /// Matrix product `self · rhs`, i.e. `U(x, z) = U(x, x₀) · U(x₀, z)`.
    pub fn compose(&self, rhs: &TransferMatrix) -> Self {
        Self::from_mat(&mat_mul(&self.to_mat(), &rhs.to_mat()))
    }

    /// Inverse, using `det U = 1`.
    pub fn inverse(&self) -> Self {
        Self { alpha: self.alpha_minus, beta_minus: -self.beta_minus, beta: -self.beta, alpha_minus: self.alpha }
    }

    /// Möbius action on a reflection coefficient: `(β + α⁻R)/(α + β⁻R)`.
    pub fn transport(&self, r: C) -> C {
        (self.beta + self.alpha_minus * r) / (self.alpha + self.beta_minus * r)
    }
}

/// Propagation split as `U = H(v_end − v_start) + H(v_end − v_last) Δ`, where the
/// first term is the exact `k = 0` limit and `Δ = O(k)` carries the rest.
#[derive(Debug, Clone, Copy)]
struct Propagation {
    delta: Mat,
    v_start: f64,
    v_last: f64,
    v_end: f64,
}

impl Propagation {
    fn matrix(&self) -> TransferMatrix {
        let mut m = mat_mul(&hyp(self.v_end - self.v_last), &self.delta);
        let h0 = hyp(self.v_end - self.v_start);
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] += h0[r][c];
            }
        }
        TransferMatrix::from_mat(&m)
    }

    /// `U − H(v_end − v_start)`.
    fn excess(&self) -> Mat {
        mat_mul(&hyp(self.v_end - self.v_last), &self.delta)
    }
}

fn check_k(k: C) -> Result<()> {
    if k.im < 0.0 || !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::Domain(format!("k must satisfy Im k >= 0 (got {k})")));
    }
    Ok(())
}

/// Runs `(width, value)` segments starting at level `v_start`; returns `(Δ, v_last)`.
fn propagate_segments(segments: impl Iterator<Item = (f64, f64)>, v_start: f64, k: C) -> (Mat, f64) {
    let i = C::i();
    let mut delta = [[ZERO; 2]; 2];
    let mut v_prev = v_start;
    for (w, v) in segments {
        let jumped = if v == v_prev { delta } else { mat_mul(&hyp(v - v_prev), &delta) };
        let (d1, d2) = (expm1(-i * k * w), expm1(i * k * w));
        let h0 = hyp(v - v_start);
        let d = [d1, d2];
        for r in 0..2 {
            for c in 0..2 {
                // (D − I) H₀ + D Δ
                delta[r][c] = d[r] * h0[r][c] + (1.0 + d[r]) * jumped[r][c];
            }
        }
        v_prev = v;
    }
    (delta, v_prev)
}

fn propagate<M: Layered + ?Sized>(medium: &M, x: f64, xp: f64, k: C) -> Propagation {
    let pts = normalize_breaks(medium.jumps(xp, x), xp, x);
    let segs: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[1] - w[0], medium.value(0.5 * (w[0] + w[1])))).collect();
    let v_start = segs.first().map(|s| s.1).unwrap_or_else(|| medium.value(xp));
    let (delta, v_last) = propagate_segments(segs.into_iter(), v_start, k);
    Propagation { delta, v_start, v_last, v_end: medium.value(x) }
}

/// `U(x, x'; k)`; for `x < x'` the inverse of `U(x', x; k)`.
pub fn transfer_matrix<M: Layered + ?Sized>(medium: &M, x: f64, xp: f64, k: C) -> Result<TransferMatrix> {
    check_k(k)?;
    if x == xp {
        return Ok(TransferMatrix::identity());
    }
    if x < xp {
        return Ok(transfer_matrix(medium, xp, x, k)?.inverse());
    }
    Ok(propagate(medium, x, xp, k).matrix())
}

/// `(τ, R_r, R_l) = (1/α, β/α, −β⁻/α)`.
pub fn scattering_coeffs(u: &TransferMatrix) -> Result<(C, C, C)> {
    if u.alpha == ZERO {
        return Err(Error::ResonancePole { re: f64::NAN, im: f64::NAN });
    }
    Ok((1.0 / u.alpha, u.beta / u.alpha, -u.beta_minus / u.alpha))
}

/// Generalized coefficients for reference level `W` at `V(x) = vx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generalized {
    pub tau: C,
    pub r_r: C,
    pub r_l: C,
    /// `τ̄² / (1 − R̄_l²)`.
    pub q_bar: C,
    /// `ᾱ(k)` and `β̄(−k)` of the rotated matrix.
    pub alpha_bar: C,
    pub beta_bar_minus: C,
}

/// `τ̄, R̄_r, R̄_l` from `U` rotated by `ξ = tanh((W − V(x))/2)`.
pub fn generalized_coeffs(u: &TransferMatrix, w: f64, vx: f64) -> Result<Generalized> {
    let rot = hyp(w - vx);
    let m = mat_mul(&rot, &u.to_mat());
    let (alpha_bar, beta_bar_minus, beta_bar) = (m[0][0], m[0][1], m[1][0]);
    if alpha_bar.norm() <= f64::MIN_POSITIVE {
        return Err(Error::SingularCombination);
    }
    let tau = 1.0 / alpha_bar;
    let r_l = -beta_bar_minus / alpha_bar;
    let q_bar = 1.0 / ((alpha_bar + beta_bar_minus) * (alpha_bar - beta_bar_minus));
    Ok(Generalized { tau, r_r: beta_bar / alpha_bar, r_l, q_bar, alpha_bar, beta_bar_minus })
}

/// Bloch data of one period: `Y = ½ tr M`, `λ = Y − i√(1 − Y²)` with `|λ| ≥ 1`, `γ = λ⁻²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochData {
    pub y: C,
    pub lambda: C,
    pub gamma: C,
    /// `√(1 − Y²)` on the selected branch.
    pub root: C,
    /// `M − I` for the period matrix starting at the phase origin.
    delta: Mat,
}

impl BlochData {
    /// `1 − Y²` is tiny: a band edge, where real-k values are unreliable.
    pub fn near_band_edge(&self) -> bool {
        (1.0 - self.y * self.y).norm() < 1e-10
    }

    /// Period matrix starting at the phase origin.
    pub fn period_matrix(&self) -> TransferMatrix {
        let mut m = self.delta;
        m[0][0] += ONE;
        m[1][1] += ONE;
        TransferMatrix::from_mat(&m)
    }

    /// `v₂/v₁` of the right eigenvector for `λ`.
    fn right_ratio(&self) -> Result<C> {
        let d = &self.delta;
        let i = C::i();
        let lam_a = 0.5 * (d[1][1] - d[0][0]) - i * self.root;
        let lam_am = 0.5 * (d[0][0] - d[1][1]) - i * self.root;
        ratio(lam_a, d[0][1], d[1][0], lam_am)
    }

    /// `w₂/w₁` of the left eigenvector for `λ`.
    fn left_ratio(&self) -> Result<C> {
        let d = &self.delta;
        let i = C::i();
        let lam_a = 0.5 * (d[1][1] - d[0][0]) - i * self.root;
        let lam_am = 0.5 * (d[0][0] - d[1][1]) - i * self.root;
        ratio(lam_a, d[1][0], d[0][1], lam_am)
    }
}

/// `n₁/d₁` or `n₂/d₂`, whichever denominator is larger (`n₁/d₁ = n₂/d₂` in exact arithmetic).
fn ratio(n1: C, d1: C, n2: C, d2: C) -> Result<C> {
    if d1.norm() == 0.0 && d2.norm() == 0.0 {
        return Err(Error::NumericalDegeneracy("Bloch eigenvector is undetermined (k = 0?)".into()));
    }
    Ok(if d1.norm() >= d2.norm() { n1 / d1 } else { n2 / d2 })
}

fn bloch_raw(tail: &PeriodicPotential, k: C) -> (C, C, Mat) {
    let v1 = tail.segments()[0].1;
    let (delta, v_last) = propagate_segments(tail.segments().iter().copied(), v1, k);
    let d = Propagation { delta, v_start: v1, v_last, v_end: v1 }.excess();
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    // det M = 1 gives Y − 1 = −½ det(M − I) exactly
    let y_minus_1 = -0.5 * det;
    let one_minus_y2 = -y_minus_1 * (2.0 + y_minus_1);
    (ONE + y_minus_1, one_minus_y2.sqrt(), d)
}

fn pick_root(y: C, root: C) -> (C, C) {
    let i = C::i();
    let lam = y - i * root;
    if lam.norm() >= 1.0 {
        (lam, root)
    } else {
        (y + i * root, -root)
    }
}

/// Bloch data for `Im k ≥ 0`; on the real axis the branch is the limit from above.
pub fn bloch(tail: &PeriodicPotential, k: C) -> Result<BlochData> {
    check_k(k)?;
    let (y, root0, delta) = bloch_raw(tail, k);
    let (mut lambda, mut root) = pick_root(y, root0);
    if (lambda.norm() - 1.0).abs() < 1e-8 {
        let eps = 1e-9 * k.norm().max(1.0);
        let (yp, rp, _) = bloch_raw(tail, k + C::new(0.0, eps));
        let (_, probe) = pick_root(yp, rp);
        root = if (root0 - probe).norm() <= (root0 + probe).norm() { root0 } else { -root0 };
        lambda = y - C::i() * root;
    }
    Ok(BlochData { y, lambda, gamma: 1.0 / (lambda * lambda), root, delta })
}

/// Tail cell start at or below `x`, shifted `extra` whole periods further left.
fn cell_below(tail: &PeriodicPotential, x: f64, extra: i64) -> f64 {
    let (o, l) = (tail.phase_origin(), tail.period());
    o + (((x - o) / l).floor() as i64 - extra) as f64 * l
}

fn cell_above(tail: &PeriodicPotential, x: f64, extra: i64) -> f64 {
    let (o, l) = (tail.phase_origin(), tail.period());
    o + (((x - o) / l).ceil() as i64 + extra) as f64 * l
}

/// `R_r(x, −∞; k)` for the pure periodic potential `tail`.
pub fn semi_infinite_reflection(tail: &PeriodicPotential, x: f64, k: C) -> Result<C> {
    check_k(k)?;
    let b = bloch(tail, k)?;
    let r0 = b.right_ratio()?;
    let x0 = cell_below(tail, x, 0);
    Ok(transfer_matrix(tail, x, x0, k)?.transport(r0))
}

/// `R_r(x, −∞; k)` for a profile: left-tail Bloch state carried through the core.
pub fn left_reflection(profile: &PotentialProfile, x: f64, k: C) -> Result<C> {
    check_k(k)?;
    let tail = profile.left_tail();
    let b = bloch(tail, k)?;
    let r0 = b.right_ratio()?;
    let x0 = cell_below(tail, profile.window().0.min(x), 1);
    Ok(transfer_matrix(profile, x, x0, k)?.transport(r0))
}

/// `R_l(∞, x; k)` for a profile: right-tail Bloch state carried back to `x`.
pub fn right_reflection(profile: &PotentialProfile, x: f64, k: C) -> Result<C> {
    check_k(k)?;
    let tail = profile.right_tail();
    let b = bloch(tail, k)?;
    let w2 = b.left_ratio()?;
    let x1 = cell_above(tail, profile.window().1.max(x), 1);
    let u = transfer_matrix(profile, x1, x, k)?;
    let first = u.alpha + w2 * u.beta;
    if first == ZERO {
        return Err(Error::Pole { re: k.re, im: k.im, what: "right reflection".into() });
    }
    Ok(-(u.beta_minus + w2 * u.alpha_minus) / first)
}

/// `(S_r, S_l, S)` with `S_r = R_r/(1 + R_r)` and `S_l = R_l/(1 + R_l)`.
pub fn s_functions(profile: &PotentialProfile, x: f64, k: C) -> Result<(C, C, C)> {
    let rr = left_reflection(profile, x, k)?;
    let rl = right_reflection(profile, x, k)?;
    let pole = |what: &str| Error::Pole { re: k.re, im: k.im, what: what.into() };
    if (1.0 + rr).norm() == 0.0 {
        return Err(pole("1 + R_r"));
    }
    if (1.0 + rl).norm() == 0.0 {
        return Err(pole("1 + R_l"));
    }
    let sr = rr / (1.0 + rr);
    let sl = rl / (1.0 + rl);
    Ok((sr, sl, sr + sl))
}

/// Exact `G_S(x, y; k)` for `x ≥ y` from the two semi-infinite reflections
/// and the transfer matrix between `y` and `x`.
pub fn exact_green(profile: &PotentialProfile, x: f64, y: f64, k: C) -> Result<C> {
    if x < y {
        return Err(Error::Domain(format!("exact_green needs x >= y (got x = {x}, y = {y})")));
    }
    check_k(k)?;
    if k == ZERO {
        return Err(Error::Pole { re: 0.0, im: 0.0, what: "k = 0".into() });
    }
    let rl_x = right_reflection(profile, x, k)?;
    let rr_x = left_reflection(profile, x, k)?;
    let rr_y = left_reflection(profile, y, k)?;
    let u = transfer_matrix(profile, x, y, k)?;
    let (tau, _, rl_xy) = scattering_coeffs(&u)?;
    let den = 2.0 * C::i() * k * (1.0 - rl_x * rr_x) * (1.0 - rl_xy * rr_y);
    if den.norm() == 0.0 {
        return Err(Error::Pole { re: k.re, im: k.im, what: "Green function denominator".into() });
    }
    Ok((1.0 + rl_x) * (1.0 + rr_y) * tau / den)
}

/// `G_S` from `S(z, k)`: `exp[ik(x − y) − ik∫_y^x S] / (2ik √((1 − S(x))(1 − S(y))))`.
pub fn exact_green_via_s(profile: &PotentialProfile, x: f64, y: f64, k: C) -> Result<C> {
    if x < y {
        return Err(Error::Domain(format!("exact_green_via_s needs x >= y (got x = {x}, y = {y})")));
    }
    check_k(k)?;
    let quad = GaussLegendre::new(24).map_err(|e| Error::NumericalDegeneracy(e.to_string()))?;
    let pts = normalize_breaks(profile.boundaries(y, x), y, x);
    let mut integral = ZERO;
    if x > y {
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut acc = ZERO;
            for (node, weight) in quad.iter() {
                acc += *weight * s_functions(profile, mid + half * node, k)?.2;
            }
            integral += half * acc;
        }
    }
    let sx = s_functions(profile, x, k)?.2;
    let sy = s_functions(profile, y, k)?.2;
    let ik = C::i() * k;
    let den = 2.0 * ik * (1.0 - sx).sqrt() * (1.0 - sy).sqrt();
    Ok((ik * (x - y) - ik * integral).exp() / den)
}

/// Band edges of `tail` in `(0, k_max]`: real `k` where `|Y(k)| = 1`.
pub fn band_edges(tail: &PeriodicPotential, k_max: f64) -> Result<Vec<f64>> {
    if !(k_max > 0.0) {
        return Err(Error::Domain("k_max must be positive".into()));
    }
    let f = |k: f64| {
        let (y, _, _) = bloch_raw(tail, C::from(k));
        y.re.abs() - 1.0
    };
    let samples = ((k_max * tail.period()).ceil() as usize * 2000).max(2000);
    let dk = k_max / samples as f64;
    let mut edges = Vec::new();
    let mut prev_k = 0.5 * dk;
    let mut prev = f(prev_k);
    for i in 1..=samples {
        let k = i as f64 * dk;
        let cur = f(k);
        if prev == 0.0 || prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (prev_k, k);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(lo).signum() == f(mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            edges.push(0.5 * (lo + hi));
        }
        prev_k = k;
        prev = cur;
    }
    Ok(edges)
}

/// Numerical warnings for a real-axis evaluation at `k`.
pub fn real_k_warnings(profile: &PotentialProfile, k: C) -> Vec<String> {
    let mut out = Vec::new();
    for (name, tail) in [("left", profile.left_tail()), ("right", profile.right_tail())] {
        if let Ok(b) = bloch(tail, k) {
            if b.near_band_edge() {
                out.push(format!("{name} tail near band edge"));
            }
        }
    }
    out.dedup();
    out
}

/// Closed-form exact Green function of the Kronig-Penney barrier model.
pub fn example2_exact(params: &Example2, x: f64, y: f64, k: C) -> Result<C> {
    params.exact_green(x, y, k)
}

/// Effective square-well approximation for the two-level well model.
pub fn effective_well_green(params: &Example1, x: f64, y: f64, k: C) -> Result<C> {
    if !(0.0 < y && y <= x && x < params.a) {
        return Err(Error::Domain(format!("needs 0 < y <= x < a (got x = {x}, y = {y})")));
    }
    Ok(params.effective_well_green(x, y, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    fn random_k(rng: &mut impl Rng) -> C {
        C::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.0..1.0))
    }

    fn random_profile(rng: &mut impl Rng) -> PotentialProfile {
        let mut tail = || {
            let n = rng.gen_range(1..4);
            let segs: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.2..0.8), rng.gen_range(-1.5..1.5))).collect();
            let period = segs.iter().map(|s| s.0).sum();
            PeriodicPotential::new(period, segs, rng.gen_range(-0.5..0.5)).unwrap()
        };
        let (left, right) = (tail(), tail());
        let core = vec![(0.0, rng.gen_range(-1.5..1.5)), (0.4, rng.gen_range(-1.5..1.5))];
        PotentialProfile::new(left, right, core, 0.0, 0.9).unwrap()
    }

    #[test]
    fn free_propagation() {
        let p = PotentialProfile::zero();
        let k = C::new(1.3, 0.2);
        let u = transfer_matrix(&p, 2.0, 0.5, k).unwrap();
        assert!(close(u.alpha, (-C::i() * k * 1.5).exp(), 1e-14));
        assert_eq!(u.beta, ZERO);
        let (tau, rr, rl) = scattering_coeffs(&u).unwrap();
        assert!(close(tau, (C::i() * k * 1.5).exp(), 1e-14));
        assert_eq!((rr, rl), (ZERO, ZERO));
        assert_eq!(transfer_matrix(&p, 0.3, 0.3, k).unwrap(), TransferMatrix::identity());
        assert!(transfer_matrix(&p, 1.0, 0.0, C::new(1.0, -0.1)).is_err());
    }

    #[test]
    fn example_one_period_alpha() {
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let tail = e.tail();
        for k in [C::new(0.7, 0.0), C::new(2.5, 0.3), C::new(1e-3, 1e-3)] {
            let u = transfer_matrix(&tail, 1.0, 0.0, k).unwrap();
            assert!(close(u.alpha, e.period_alpha(k), 1e-13), "k = {k}");
            assert!(close(bloch(&tail, k).unwrap().period_matrix().alpha, u.alpha, 1e-13));
        }
    }

    #[test]
    fn determinant_composition_and_inverse() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(61);
        for _ in 0..500 {
            let p = random_profile(&mut rng);
            let k = random_k(&mut rng);
            let xp = rng.gen_range(-3.0..2.0);
            let x = xp + rng.gen_range(0.0..3.0);
            let mid = rng.gen_range(xp..=x);
            let u = transfer_matrix(&p, x, xp, k).unwrap();
            assert!((u.det() - 1.0).norm() < 1e-11 * u.alpha.norm_sqr().max(1.0));
            let split = transfer_matrix(&p, x, mid, k).unwrap().compose(&transfer_matrix(&p, mid, xp, k).unwrap());
            for (a, b) in u.to_mat().iter().flatten().zip(split.to_mat().iter().flatten()) {
                assert!((a - b).norm() < 1e-11 * u.alpha.norm().max(1.0));
            }
            let back = transfer_matrix(&p, xp, x, k).unwrap();
            assert!((back.alpha - u.alpha_minus).norm() < 1e-12 * u.alpha.norm().max(1.0));
            assert!((back.beta + u.beta).norm() < 1e-12 * u.alpha.norm().max(1.0));
        }
    }

    #[test]
    fn flux_and_qbar_bounds() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(67);
        for _ in 0..200 {
            let p = random_profile(&mut rng);
            let k = random_k(&mut rng);
            let z = rng.gen_range(-2.0..1.0);
            let x = z + rng.gen_range(0.0..2.0);
            let w = rng.gen_range(-2.0..2.0);
            let u = transfer_matrix(&p, x, z, k).unwrap();
            let g = generalized_coeffs(&u, w, p.eval(x)).unwrap();
            assert!(g.alpha_bar.norm_sqr() - g.beta_bar_minus.norm_sqr() >= 1.0 - 1e-10);
            assert!(g.q_bar.norm() <= 1.0 + 1e-10);
            let direct = g.tau * g.tau / (1.0 - g.r_l * g.r_l);
            assert!(close(direct, g.q_bar, 1e-9));
        }
    }

    #[test]
    fn generalized_reduces_and_has_k0_limit() {
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let p = e.profile();
        let k = C::new(0.8, 0.1);
        let u = transfer_matrix(&p, 0.3, -1.7, k).unwrap();
        let (tau, rr, rl) = scattering_coeffs(&u).unwrap();
        let g = generalized_coeffs(&u, p.eval(0.3), p.eval(0.3)).unwrap();
        assert!(close(g.tau, tau, 1e-14) && close(g.r_r, rr, 1e-14) && close(g.r_l, rl, 1e-14));
        let w = 0.45;
        let tiny = transfer_matrix(&p, 0.3, -1.7, C::new(1e-9, 0.0)).unwrap();
        let g0 = generalized_coeffs(&tiny, w, p.eval(0.3)).unwrap();
        let vz = p.eval(-1.7);
        assert_relative_eq!(g0.tau.re, 1.0 / (0.5 * (w - vz)).cosh(), max_relative = 1e-7);
        assert_relative_eq!(g0.r_l.re, (0.5 * (w - vz)).tanh(), max_relative = 1e-7);
    }

    #[test]
    fn bloch_relations() {
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let tail = e.tail();
        let (l0, _) = e.l0_v0();
        for k in [C::new(0.5, 0.0), C::new(3.0, 0.0), C::new(1.0, 0.5), C::new(1e-4, 1e-4)] {
            let b = bloch(&tail, k).unwrap();
            assert!(b.lambda.norm() >= 1.0 - 1e-12);
            assert!(close(b.lambda + 1.0 / b.lambda, 2.0 * b.y, 1e-12));
            assert!(close(b.gamma * b.lambda * b.lambda, ONE, 1e-14));
        }
        let k = C::new(1e-5, 0.0);
        let b = bloch(&tail, k).unwrap();
        assert_relative_eq!(((b.gamma - 1.0) / (2.0 * C::i() * k)).re, l0, max_relative = 1e-4);
    }

    #[test]
    fn example_one_band_edges() {
        let edges = band_edges(&Example1::new(1.0, 1.0, 0.6, 1.0).unwrap().tail(), 7.5).unwrap();
        let want = [2.21, 4.02, 5.77, 6.88];
        assert_eq!(edges.len(), want.len(), "{edges:?}");
        for (e, w) in edges.iter().zip(want) {
            assert!((e - w).abs() < 0.01, "{e} vs {w}");
        }
    }

    #[test]
    fn semi_infinite_reflection_cases() {
        let free = PeriodicPotential::constant(1.0, 0.0);
        assert_eq!(semi_infinite_reflection(&free, 0.3, C::new(1.1, 0.2)).unwrap().norm(), 0.0);
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let r = semi_infinite_reflection(&e.tail(), 0.2, C::new(3.0, 0.0)).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn example_one_reflection_closed_form() {
        // R_r(x, −∞) inside the well from the cell-origin reflection R₀
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let p = e.profile();
        let t = (0.5 * e.h).tanh();
        for k in [C::new(0.9, 0.0), C::new(1.7, 0.4), C::new(0.01, 0.01)] {
            let m = transfer_matrix(&e.tail(), 0.0, -1.0, k).unwrap();
            let (a, am) = (m.alpha, m.alpha_minus);
            let tr = a + am;
            let mut r0 = (-a + am - C::i() * (4.0 - tr * tr).sqrt()) / (2.0 * m.beta_minus);
            let alt = (-a + am + C::i() * (4.0 - tr * tr).sqrt()) / (2.0 * m.beta_minus);
            // the closed form leaves the root's branch implicit; take the one the Bloch analysis selects
            let sel = semi_infinite_reflection(&e.tail(), 0.0, k).unwrap();
            if (alt - sel).norm() < (r0 - sel).norm() {
                r0 = alt;
            }
            assert!(close(r0, sel, 1e-9));
            for x in [0.1, 0.45] {
                let want = (2.0 * C::i() * k * x).exp() * (t + r0) / (1.0 + r0 * t);
                assert!(close(left_reflection(&p, x, k).unwrap(), want, 1e-10), "k = {k}");
            }
        }
    }

    #[test]
    fn free_green_function() {
        let p = PotentialProfile::zero();
        let k = C::new(0.7, 0.05);
        let g = exact_green(&p, 1.2, 0.3, k).unwrap();
        assert!(close(g, (C::i() * k * 0.9).exp() / (2.0 * C::i() * k), 1e-13));
        let (_, _, s) = s_functions(&p, 0.5, k).unwrap();
        assert_eq!(s, ZERO);
    }

    #[test]
    fn two_routes_agree() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(71);
        for _ in 0..20 {
            let p = random_profile(&mut rng);
            let k = C::new(rng.gen_range(0.05..2.0), rng.gen_range(0.01..0.5));
            let y = rng.gen_range(-1.0..1.0);
            let x = y + rng.gen_range(0.0..1.5);
            let a = exact_green(&p, x, y, k).unwrap();
            let b = exact_green_via_s(&p, x, y, k).unwrap();
            assert!(close(a, b, 1e-10), "{a} vs {b}");
        }
    }

    #[test]
    fn green_is_real_in_gaps() {
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let p = e.profile();
        let edges = band_edges(&e.tail(), 7.5).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(73);
        for _ in 0..20 {
            let (lo, hi) = if rng.gen_bool(0.5) { (edges[0], edges[1]) } else { (edges[2], edges[3]) };
            let k = rng.gen_range(lo + 0.01..hi - 0.01);
            let g = exact_green(&p, 0.4, 0.1, C::from(k)).unwrap();
            assert!(g.im.abs() < 1e-9, "k = {k}: {g}");
        }
    }

    #[test]
    fn deep_well_approaches_hard_wall() {
        let e = Example1::new(1.0, 1.0, 0.6, 40.0).unwrap();
        let p = e.profile();
        for k in [1.0, 2.0, 3.3] {
            let k = C::from(k);
            let g = exact_green(&p, 0.4, 0.1, k).unwrap();
            let want = e.hard_wall_green(0.4, 0.1, k);
            assert!((g - want).norm() < 1e-3 * want.norm(), "{g} vs {want}");
        }
    }

    #[test]
    fn example_two_closed_form_matches_general_schrodinger_oracle() {
        // checked in the generic module; here only sanity of the wrapper
        let e = Example2::new(1.0, 1.0, 0.6, 0.5).unwrap();
        assert!(example2_exact(&e, 0.4, 0.1, C::new(0.5, 0.1)).is_ok());
        assert!(example2_exact(&e, 0.1, 0.4, C::new(0.5, 0.1)).is_err());
    }
}
