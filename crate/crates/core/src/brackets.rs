//! Ordered exponential integrals
//! `[σ₁…σₙ]_a^b = ∫_{a ≤ z₁ ≤ … ≤ zₙ ≤ b} exp(Σ σⱼ V(zⱼ)) dz`
//! over piecewise-constant `V`, carried exactly as piecewise polynomials.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::piecewise::{PiecewisePoly, Steps};
use crate::potential::PeriodicPotential;

/// Longest word accepted by the public API.
pub const MAX_WORD_LEN: usize = 4;

/// A nonempty word over `{+1, -1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignWord(Vec<i8>);

impl SignWord {
    pub fn new(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Domain("sign word must be nonempty".into()));
        }
        if signs.len() > MAX_WORD_LEN {
            return Err(Error::WordTooLong(signs.len()));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Domain("signs must be +1 or -1".into()));
        }
        Ok(Self(signs.to_vec()))
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every sign reversed.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl FromStr for SignWord {
    type Err = Error;

    /// Parses words like `"+-+"`.
    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<i8> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Domain(format!("invalid sign '{other}'"))),
            })
            .collect::<Result<_>>()?;
        Self::new(&signs)
    }
}

impl fmt::Display for SignWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Shorthand for words known to be valid at compile time.
pub(crate) fn word(s: &str) -> SignWord {
    s.parse().expect("valid literal sign word")
}

fn exp_steps(v: &Steps, sigma: i8) -> Steps {
    v.map(|x| (f64::from(sigma) * x).exp())
}

fn forward_from(mut acc: PiecewisePoly, signs: &[i8], v: &Steps) -> PiecewisePoly {
    for &s in signs {
        acc = acc.mul_steps(&exp_steps(v, s)).antiderivative();
    }
    acc
}

fn backward_from(mut acc: PiecewisePoly, signs: &[i8], v: &Steps) -> PiecewisePoly {
    for &s in signs.iter().rev() {
        acc = acc.mul_steps(&exp_steps(v, s)).antiderivative_from_right();
    }
    acc
}

fn one(v: &Steps) -> PiecewisePoly {
    let (lo, hi) = v.span();
    PiecewisePoly::constant(lo, hi, 1.0)
}

/// `x ↦ [w]_lo^x` on the span `[lo, hi]` of `v`.
pub fn forward(w: &SignWord, v: &Steps) -> PiecewisePoly {
    forward_from(one(v), w.signs(), v)
}

/// `x ↦ [w]_x^hi` on the span `[lo, hi]` of `v`.
pub fn backward(w: &SignWord, v: &Steps) -> PiecewisePoly {
    backward_from(one(v), w.signs(), v)
}

/// `x ↦ ∫_lo^x g(z) [w]_z^x dz`.
pub fn forward_weighted(g: &PiecewisePoly, w: &SignWord, v: &Steps) -> PiecewisePoly {
    forward_from(g.antiderivative(), w.signs(), v)
}

/// `x ↦ ∫_x^hi g(z) [w]_x^z dz`.
pub fn backward_weighted(g: &PiecewisePoly, w: &SignWord, v: &Steps) -> PiecewisePoly {
    backward_from(g.antiderivative_from_right(), w.signs(), v)
}

/// `[w]_a^b` for a step function `v` whose span contains `[a, b]`.
pub fn bracket(w: &SignWord, a: f64, b: f64, v: &Steps) -> Result<f64> {
    if a > b {
        return Err(Error::Domain(format!("bracket needs a <= b (got {a} > {b})")));
    }
    let (lo, hi) = v.span();
    if a < lo || b > hi {
        return Err(Error::Domain(format!("[{a}, {b}] is outside the potential span [{lo}, {hi}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let restricted = Steps::sample(crate::piecewise::normalize_breaks(v.breaks().to_vec(), a, b), |t| v.eval(t));
    Ok(forward(w, &restricted).eval(b))
}

/// `ₚ[w]_{x-L}^x` over the periodic extension of `tail`.
pub fn periodic_bracket(w: &SignWord, x: f64, tail: &PeriodicPotential) -> f64 {
    let l = tail.period();
    let v = tail.steps(x - l, x);
    forward(w, &v).eval(x)
}

/// `z ↦ ₚ[w]_{z-L}^z` as a piecewise polynomial on `[lo, hi]`.
///
/// Built on one cell `[o, o + L]` by splitting the word at the cell origin,
/// then tiled periodically.
pub fn periodic_bracket_fn(w: &SignWord, tail: &PeriodicPotential, lo: f64, hi: f64) -> PiecewisePoly {
    let l = tail.period();
    let o = tail.phase_origin();
    let v = tail.steps(o, o + l);
    let signs = w.signs();
    let n = signs.len();
    let mut cell = PiecewisePoly::constant(o, o + l, 0.0);
    for j in 0..=n {
        let head = backward_from(one(&v), &signs[..j], &v);
        let tail_part = forward_from(one(&v), &signs[j..], &v);
        cell = cell.add(&head.mul(&tail_part));
    }
    tile(&cell, l, lo, hi)
}

/// Periodic extension of a function given on one period cell, restricted to `[lo, hi]`.
pub(crate) fn tile(cell: &PiecewisePoly, period: f64, lo: f64, hi: f64) -> PiecewisePoly {
    let (o, _) = cell.span();
    let n0 = ((lo - o) / period).floor() as i64 - 1;
    let n1 = ((hi - o) / period).ceil() as i64 + 1;
    let parts: Vec<PiecewisePoly> = (n0..n1).map(|n| cell.translate(n as f64 * period)).collect();
    PiecewisePoly::concat(&parts).restrict(lo, hi)
}
