//! Piecewise-constant and piecewise-polynomial functions on a finite interval.
//!
//! Polynomials are stored per piece in the local coordinate `t - left_endpoint`,
//! ascending degree. All operations are exact up to floating-point rounding.

use crate::error::{Error, Result};

/// Relative tolerance used when merging breakpoint lists.
const MERGE_RTOL: f64 = 1e-13;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Sorts, deduplicates (within rounding) and clips breakpoints to `[lo, hi]`.
/// The result always starts at `lo` and ends at `hi`.
pub(crate) fn normalize_breaks(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|p| p.is_finite() && *p > lo && *p < hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(lo);
    for p in pts {
        if !close(*out.last().unwrap(), p) {
            out.push(p);
        }
    }
    if out.len() > 1 && close(*out.last().unwrap(), hi) {
        out.pop();
    }
    out.push(hi);
    out
}

fn locate(breaks: &[f64], x: f64) -> usize {
    let n = breaks.len() - 1;
    // partition_point gives the first index with breaks[i] > x
    let i = breaks.partition_point(|b| *b <= x);
    i.saturating_sub(1).min(n - 1)
}

/// A step function: `values[i]` holds on `[breaks[i], breaks[i + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Steps {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl Steps {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || values.len() + 1 != breaks.len() {
            return Err(Error::Domain(format!(
                "step function needs n + 1 breakpoints for n values (got {} and {})",
                breaks.len(),
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("step breakpoints must be strictly increasing".into()));
        }
        Ok(Self { breaks, values })
    }

    /// Samples `f` at the midpoint of every interval defined by `breaks`.
    pub(crate) fn sample(breaks: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let values = breaks.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        Self { breaks, values }
    }

    pub fn constant(a: f64, b: f64, value: f64) -> Self {
        Self { breaks: vec![a, b], values: vec![value] }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn span(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    /// Right-continuous evaluation; the right endpoint takes the last value.
    pub fn eval(&self, x: f64) -> f64 {
        self.values[locate(&self.breaks, x)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { breaks: self.breaks.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// Pointwise combination of two step functions on the same span.
    pub fn zip_with(&self, other: &Steps, f: impl Fn(f64, f64) -> f64) -> Self {
        let (lo, hi) = self.span();
        let mut pts = self.breaks.clone();
        pts.extend_from_slice(&other.breaks);
        let breaks = normalize_breaks(pts, lo, hi);
        Self::sample(breaks, |t| f(self.eval(t), other.eval(t)))
    }

    pub fn to_poly(&self) -> PiecewisePoly {
        PiecewisePoly { breaks: self.breaks.clone(), pieces: self.values.iter().map(|v| vec![*v]).collect() }
    }

    pub fn integral(&self) -> f64 {
        self.breaks.windows(2).zip(&self.values).map(|(w, v)| (w[1] - w[0]) * v).sum()
    }
}

/// Re-expands `p(s)` as `q(s) = p(s + d)`.
fn taylor_shift(coeffs: &[f64], d: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    if d == 0.0 {
        return c;
    }
    let n = c.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            c[j] += d * c[j + 1];
        }
    }
    c
}

fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Integral of the local polynomial from 0 to `w`.
fn poly_integral(coeffs: &[f64], w: f64) -> f64 {
    coeffs.iter().enumerate().rev().fold(0.0, |acc, (j, c)| acc * w + c / (j + 1) as f64) * w
}

/// Piecewise polynomial on `[breaks[0], breaks[n]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() < 2 || pieces.len() + 1 != breaks.len() {
            return Err(Error::Domain("pieces count must equal breakpoints count - 1".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        if pieces.iter().any(|p| p.is_empty()) {
            return Err(Error::Domain("empty coefficient list".into()));
        }
        Ok(Self { breaks, pieces })
    }

    pub fn constant(a: f64, b: f64, value: f64) -> Self {
        Self { breaks: vec![a, b], pieces: vec![vec![value]] }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    pub fn span(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.len() - 1).max().unwrap_or(0)
    }

    /// Right-continuous evaluation. Points outside the span are evaluated on
    /// the nearest end piece.
    pub fn eval(&self, x: f64) -> f64 {
        let i = locate(&self.breaks, x);
        horner(&self.pieces[i], x - self.breaks[i])
    }

    /// Left limit at `x` (differs from `eval` only at breakpoints).
    pub fn eval_left(&self, x: f64) -> f64 {
        let i = self.breaks.partition_point(|b| *b < x).saturating_sub(1).min(self.pieces.len() - 1);
        horner(&self.pieces[i], x - self.breaks[i])
    }

    /// Re-expresses the function on a finer breakpoint list covering the same span.
    pub fn refine(&self, breaks: &[f64]) -> Self {
        let pieces = breaks
            .windows(2)
            .map(|w| {
                let i = locate(&self.breaks, 0.5 * (w[0] + w[1]));
                taylor_shift(&self.pieces[i], w[0] - self.breaks[i])
            })
            .collect();
        Self { breaks: breaks.to_vec(), pieces }
    }

    fn union_breaks(&self, other: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.span();
        let mut pts = self.breaks.clone();
        pts.extend_from_slice(other);
        normalize_breaks(pts, lo, hi)
    }

    fn combine(&self, other: &PiecewisePoly, f: impl Fn(&[f64], &[f64]) -> Vec<f64>) -> Self {
        let breaks = self.union_breaks(&other.breaks);
        let a = self.refine(&breaks);
        let b = other.refine(&breaks);
        let pieces = a.pieces.iter().zip(&b.pieces).map(|(p, q)| f(p, q)).collect();
        Self { breaks, pieces }
    }

    pub fn add(&self, other: &PiecewisePoly) -> Self {
        self.combine(other, |p, q| {
            let n = p.len().max(q.len());
            (0..n).map(|j| p.get(j).unwrap_or(&0.0) + q.get(j).unwrap_or(&0.0)).collect()
        })
    }

    pub fn sub(&self, other: &PiecewisePoly) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &PiecewisePoly) -> Self {
        self.combine(other, poly_mul)
    }

    pub fn mul_steps(&self, steps: &Steps) -> Self {
        let breaks = self.union_breaks(steps.breaks());
        let mut out = self.refine(&breaks);
        for (w, p) in out.breaks.windows(2).zip(out.pieces.iter_mut()) {
            let v = steps.eval(0.5 * (w[0] + w[1]));
            p.iter_mut().for_each(|c| *c *= v);
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(|p| p.iter().map(|c| c * factor).collect()).collect(),
        }
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.pieces.iter_mut().for_each(|p| p[0] += c);
        out
    }

    /// `x -> ∫_{left}^{x} self`.
    pub fn antiderivative(&self) -> Self {
        let mut acc = 0.0;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (w, p) in self.breaks.windows(2).zip(&self.pieces) {
            let mut q = Vec::with_capacity(p.len() + 1);
            q.push(acc);
            q.extend(p.iter().enumerate().map(|(j, c)| c / (j + 1) as f64));
            acc += poly_integral(p, w[1] - w[0]);
            pieces.push(q);
        }
        Self { breaks: self.breaks.clone(), pieces }
    }

    /// `x -> ∫_{x}^{right} self`.
    pub fn antiderivative_from_right(&self) -> Self {
        let total = self.integral();
        self.antiderivative().scale(-1.0).add_constant(total)
    }

    pub fn integral(&self) -> f64 {
        self.breaks.windows(2).zip(&self.pieces).map(|(w, p)| poly_integral(p, w[1] - w[0])).sum()
    }

    /// `∫_a^b self`, with `a`, `b` inside the span (either order).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// Restriction to `[a, b]`, which must lie inside the span.
    pub fn restrict(&self, a: f64, b: f64) -> Self {
        let breaks = normalize_breaks(self.breaks.clone(), a, b);
        self.refine(&breaks)
    }

    /// The function `x -> self(x - dx)`.
    pub fn translate(&self, dx: f64) -> Self {
        Self { breaks: self.breaks.iter().map(|b| b + dx).collect(), pieces: self.pieces.clone() }
    }

    /// Concatenates functions on adjacent spans (`left` ends where `right` starts).
    pub(crate) fn concat(parts: &[PiecewisePoly]) -> Self {
        let mut breaks = vec![parts[0].breaks[0]];
        let mut pieces = Vec::new();
        for part in parts {
            for (w, p) in part.breaks.windows(2).zip(&part.pieces) {
                if w[1] - w[0] <= MERGE_RTOL * w[1].abs().max(1.0) {
                    continue;
                }
                let last = *breaks.last().unwrap();
                // snap tiny drift between adjacent spans
                let shift = last - w[0];
                pieces.push(if shift == 0.0 { p.clone() } else { taylor_shift(p, shift) });
                breaks.push(w[1]);
            }
        }
        Self { breaks, pieces }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp() -> PiecewisePoly {
        // t on [0, 1), 1 + 2 (t - 1) on [1, 3]
        PiecewisePoly::new(vec![0.0, 1.0, 3.0], vec![vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap()
    }

    #[test]
    fn eval_is_right_continuous() {
        let s = Steps::new(vec![0.0, 1.0, 2.0], vec![3.0, 5.0]).unwrap();
        assert_eq!(s.eval(1.0), 5.0);
        assert_eq!(s.eval(0.999), 3.0);
        assert_eq!(s.eval(2.0), 5.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Steps::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(Steps::new(vec![1.0, 0.0], vec![1.0]).is_err());
        assert!(PiecewisePoly::new(vec![0.0, 1.0], vec![]).is_err());
    }

    #[test]
    fn taylor_shift_matches_direct_evaluation() {
        let p = [1.0, -2.0, 0.5, 3.0];
        let q = taylor_shift(&p, 0.7);
        for s in [-1.0, 0.0, 0.3, 2.0] {
            assert_relative_eq!(horner(&q, s), horner(&p, s + 0.7), epsilon = 1e-12);
        }
    }

    #[test]
    fn antiderivative_is_continuous_and_exact() {
        let f = ramp();
        let a = f.antiderivative();
        assert_relative_eq!(a.eval(1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.eval_left(1.0), 0.5, epsilon = 1e-15);
        // ∫_1^3 1 + 2(t-1) dt = 2 + 4 = 6
        assert_relative_eq!(a.eval(3.0), 6.5, epsilon = 1e-14);
        assert_relative_eq!(f.integral(), 6.5, epsilon = 1e-14);
        assert_relative_eq!(f.antiderivative_from_right().eval(0.0), 6.5, epsilon = 1e-14);
        assert_relative_eq!(f.integrate(0.5, 2.0), 2.375, epsilon = 1e-14);
    }

    #[test]
    fn product_refines_breakpoints() {
        let f = ramp();
        let g = Steps::new(vec![0.0, 2.0, 3.0], vec![2.0, -1.0]).unwrap();
        let h = f.mul_steps(&g);
        assert_eq!(h.breaks(), &[0.0, 1.0, 2.0, 3.0]);
        for x in [0.2, 1.5, 2.5] {
            assert_relative_eq!(h.eval(x), f.eval(x) * g.eval(x), epsilon = 1e-14);
        }
        let sq = f.mul(&f);
        assert_eq!(sq.degree(), 2);
        assert_relative_eq!(sq.eval(2.5), 16.0, epsilon = 1e-13);
    }

    #[test]
    fn restrict_and_translate() {
        let f = ramp();
        let r = f.restrict(0.5, 2.0);
        assert_eq!(r.span(), (0.5, 2.0));
        assert_relative_eq!(r.eval(1.7), f.eval(1.7), epsilon = 1e-14);
        let t = f.translate(10.0);
        assert_relative_eq!(t.eval(11.5), f.eval(1.5), epsilon = 1e-14);
    }

    #[test]
    fn normalize_drops_near_duplicates() {
        let b = normalize_breaks(vec![1.0, 1.0 + 1e-16, 0.5, 2.0 - 1e-17, 5.0], 0.0, 2.0);
        assert_eq!(b, vec![0.0, 0.5, 1.0, 2.0]);
    }
}
