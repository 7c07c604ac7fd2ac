//! One-period invariants of a periodic tail.

use crate::brackets::{periodic_bracket, word};
use crate::potential::PeriodicPotential;

/// `P = ₚ[+]`, `M = ₚ[−]`, `L₀ = √(PM)`, `V₀ = ½ log(P/M)` and
/// `Q = ₚ[−+−+] + ₚ[+−+−]`, all over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodConstants {
    pub p: f64,
    pub m: f64,
    pub l0: f64,
    pub v0: f64,
    pub q: f64,
}

impl PeriodConstants {
    /// Evaluated at the tail's phase origin; the values do not depend on it.
    pub fn of(tail: &PeriodicPotential) -> Self {
        Self::at(tail, tail.phase_origin())
    }

    /// Evaluated with the period window ending at `x`.
    pub fn at(tail: &PeriodicPotential, x: f64) -> Self {
        let p: f64 = tail.segments().iter().map(|(w, v)| w * v.exp()).sum();
        let m: f64 = tail.segments().iter().map(|(w, v)| w * (-v).exp()).sum();
        let q = periodic_bracket(&word("-+-+"), x, tail) + periodic_bracket(&word("+-+-"), x, tail);
        Self { p, m, l0: (p * m).sqrt(), v0: 0.5 * (p / m).ln(), q }
    }
}

/// `(ₚ[+−], ₚ[−+], ₚ[+−+], ₚ[−+−])` over `[x − L, x]`.
pub fn one_period_brackets(tail: &PeriodicPotential, x: f64) -> (f64, f64, f64, f64) {
    (
        periodic_bracket(&word("+-"), x, tail),
        periodic_bracket(&word("-+"), x, tail),
        periodic_bracket(&word("+-+"), x, tail),
        periodic_bracket(&word("-+-"), x, tail),
    )
}
