//! Brute-force small-k coefficients of a Green function by a Laurent fit.
//!
//! `G(k)·(ik)` is sampled on `k = k_scale·2^{−j} e^{iπ/4}`, `j = 0..11`, and
//! fitted by ordinary least squares to a polynomial in `ik`, giving
//! `G = Σ (ik)^n g_n`.

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

pub const GRID_POINTS: usize = 12;
/// Fits whose scaled Vandermonde is worse than this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentFit {
    pub orders: Vec<i32>,
    pub coefficients: Vec<C>,
    /// RMS misfit of `G·(ik)` over the grid.
    pub residual: f64,
    /// 2-norm condition number of the column-scaled design matrix.
    pub condition: f64,
    pub k_grid: Vec<C>,
    /// Largest relative change of the reported coefficients when one more order is fitted.
    pub stability: Option<f64>,
}

impl LaurentFit {
    pub fn coeff(&self, n: i32) -> Option<C> {
        self.orders.iter().position(|&o| o == n).map(|i| self.coefficients[i])
    }

    /// `Σ (ik)^n g_n` over the fitted orders.
    pub fn eval(&self, k: C) -> C {
        let ik = C::i() * k;
        self.orders.iter().zip(&self.coefficients).map(|(&n, g)| g * ik.powi(n)).sum()
    }

    pub fn accepted(&self) -> bool {
        let scale = self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.residual < 1e-6 * scale
    }
}

/// The sampling grid for a given scale.
pub fn k_grid(k_scale: f64) -> Vec<C> {
    let ray = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    (0..GRID_POINTS).map(|j| ray * (k_scale * 0.5f64.powi(j as i32))).collect()
}

/// Fit `G = Σ_{n ∈ orders} (ik)^n g_n`; `orders` must start at `−1` or above.
pub fn extract_coeffs<F>(mut green: F, orders: RangeInclusive<i32>, k_scale: f64) -> Result<LaurentFit>
where
    F: FnMut(C) -> Result<C>,
{
    let (lo, hi) = (*orders.start(), *orders.end());
    if lo < -1 || hi < lo {
        return Err(Error::Domain(format!("orders must satisfy -1 <= lo <= hi (got {lo}..={hi})")));
    }
    let cols = (hi - lo + 1) as usize;
    if cols > GRID_POINTS {
        return Err(Error::Domain(format!("at most {GRID_POINTS} orders can be fitted")));
    }
    if !(k_scale > 0.0 && k_scale.is_finite()) {
        return Err(Error::Domain(format!("k_scale must be positive (got {k_scale})")));
    }
    let grid = k_grid(k_scale);
    let mut rhs = DVector::<C>::zeros(GRID_POINTS);
    let mut design = DMatrix::<C>::zeros(GRID_POINTS, cols);
    for (j, k) in grid.iter().enumerate() {
        let ik = C::i() * k;
        rhs[j] = green(*k)? * ik;
        // columns scaled by k_scale^p so entries stay O(1)
        let t = ik / k_scale;
        for (c, n) in (lo..=hi).enumerate() {
            design[(j, c)] = t.powi(n + 1);
        }
    }
    let sv = design.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition, suggested_k_scale: 0.25 * k_scale });
    }
    let qr = design.clone().qr();
    let qtb = qr.q().adjoint() * &rhs;
    let sol = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or(Error::IllConditioned { condition, suggested_k_scale: 0.25 * k_scale })?;
    let misfit = &design * &sol - &rhs;
    let residual = (misfit.norm_squared() / GRID_POINTS as f64).sqrt();
    let coefficients = (lo..=hi).zip(sol.iter()).map(|(n, c)| c / k_scale.powi(n + 1)).collect();
    Ok(LaurentFit { orders: (lo..=hi).collect(), coefficients, residual, condition, k_grid: grid, stability: None })
}

/// Fit and require the residual acceptance test.
pub fn extract_accepted<F>(green: F, orders: RangeInclusive<i32>, k_scale: f64) -> Result<LaurentFit>
where
    F: FnMut(C) -> Result<C>,
{
    let fit = extract_coeffs(green, orders, k_scale)?;
    if !fit.accepted() {
        return Err(Error::IllConditioned { condition: fit.condition, suggested_k_scale: 0.25 * k_scale });
    }
    Ok(fit)
}

/// Extra orders fitted beyond the reported ones to absorb the remainder.
pub const GUARD_ORDERS: i32 = 4;

/// Fit with `k_scale = k_max·2^{−m/2}`, `m = 0..=12`, each with `GUARD_ORDERS` and
/// one more extra orders, and keep the scale whose reported coefficients move
/// least between the two. The result is truncated to `orders`.
pub fn extract_auto<F>(mut green: F, orders: RangeInclusive<i32>, k_max: f64) -> Result<LaurentFit>
where
    F: FnMut(C) -> Result<C>,
{
    let (lo, hi) = (*orders.start(), *orders.end());
    let mut best: Option<LaurentFit> = None;
    let mut last_err = None;
    for m in 0..=12 {
        let ks = k_max * 0.5f64.powf(0.5 * m as f64);
        let pair = extract_coeffs(&mut green, lo..=hi + GUARD_ORDERS, ks)
            .and_then(|a| extract_coeffs(&mut green, lo..=hi + GUARD_ORDERS + 1, ks).map(|b| (a, b)));
        let (a, b) = match pair {
            Ok(p) => p,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let stability = (lo..=hi)
            .map(|n| {
                let (x, y) = (a.coeff(n).unwrap(), b.coeff(n).unwrap());
                (x - y).norm() / x.norm().max(1e-300)
            })
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|f| stability < f.stability.unwrap()) {
            let keep = (hi - lo + 1) as usize;
            best = Some(LaurentFit {
                orders: a.orders[..keep].to_vec(),
                coefficients: a.coefficients[..keep].to_vec(),
                stability: Some(stability),
                ..a
            });
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::IllConditioned { condition: f64::INFINITY, suggested_k_scale: k_max }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::green_coeffs;
    use crate::potential::PotentialProfile;
    use crate::reference::Example1;
    use crate::scattering::exact_green;

    fn rel(a: C, b: f64) -> f64 {
        (a - b).norm() / b.abs().max(1e-300)
    }

    #[test]
    fn free_green_function() {
        let d = 0.7;
        let f = |k: C| Ok((C::i() * k * d).exp() / (2.0 * C::i() * k));
        let fit = extract_auto(f, -1..=2, 0.5).unwrap();
        let want = [0.5, d / 2.0, d * d / 4.0, d.powi(3) / 12.0];
        for (n, w) in (-1..=2).zip(want) {
            assert!(rel(fit.coeff(n).unwrap(), w) < 1e-8, "g{n}: {}", fit.coeff(n).unwrap());
        }
    }

    #[test]
    fn free_profile_through_exact_green() {
        let p = PotentialProfile::zero();
        let fit = extract_accepted(|k| exact_green(&p, 0.9, 0.2, k), -1..=6, 0.5).unwrap();
        assert!(rel(fit.coeff(0).unwrap(), 0.35) < 1e-10);
    }

    #[test]
    fn example_one_matches_formulas_and_is_stable() {
        let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
        let p = e.profile();
        let (x, y) = (0.4, 0.1);
        let g = green_coeffs(&p, x, y, 2).unwrap();
        let fit = extract_auto(|k| exact_green(&p, x, y, k), -1..=2, 0.4).unwrap();
        assert!(fit.stability.unwrap() < 1e-6, "{:?}", fit.stability);
        for n in -1..=2 {
            let want = g.g(n).unwrap();
            assert!(rel(fit.coeff(n).unwrap(), want) < 1e-6, "g{n}: {} vs {want}", fit.coeff(n).unwrap());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = |k: C| Ok(1.0 / k);
        assert!(extract_coeffs(f, -2..=1, 0.1).is_err());
        assert!(extract_coeffs(f, -1..=12, 0.1).is_err());
        assert!(extract_coeffs(f, -1..=1, 0.0).is_err());
    }
}
