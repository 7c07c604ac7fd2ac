//! Acceptance checks: one PASS/FAIL line per criterion, with runtime.

use std::io::Write;
use std::time::{Duration, Instant};

use lowk_core::brackets::{periodic_bracket, SignWord};
use lowk_core::expansion::{green_coeffs, s_coeffs};
use lowk_core::generic::{
    generic_green_coeffs, generic_green_coeffs_from, schrodinger_green, zero_energy_solution, SchrodingerProfile, Sign,
};
use lowk_core::oracle_extraction::extract_auto;
use lowk_core::periodic::{one_period_brackets, PeriodConstants};
use lowk_core::potential::{PeriodicPotential, PotentialProfile};
use lowk_core::reference::{Example1, Example2};
use lowk_core::scattering::{band_edges, exact_green, generalized_coeffs, transfer_matrix};
use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn crel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Writes straight to stdout so the lines show up even when test output is captured.
fn report(line: String) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").and_then(|_| out.flush()).expect("stdout is writable");
}

/// Runs a criterion, prints its line and returns whether it passed.
fn criterion(id: u32, name: &str, budget: Duration, check: impl FnOnce() -> Result<String, String>) -> bool {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let (ok, detail) = match outcome {
        Ok(d) => (in_time, d),
        Err(d) => (false, d),
    };
    let time_note = if in_time { "" } else { " (over budget)" };
    report(format!(
        "{} criterion {id}: {name} — {detail}; {:.3} s / {:.0} s{time_note}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    ));
    ok
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn example1_family(rng: &mut StdRng) -> Example1 {
    let a = rng.gen_range(0.3..0.7);
    Example1::new(rng.gen_range(0.5..2.0), 1.0, a, rng.gen_range(0.1..2.0)).unwrap()
}

fn example2_family(rng: &mut StdRng) -> SchrodingerProfile {
    let a = rng.gen_range(0.3..0.7);
    let c = rng.gen_range(0.5..2.0);
    let tail = PeriodicPotential::new(1.0, vec![(a, 0.0), (1.0 - a, c)], 0.0).unwrap();
    let core = vec![(0.0, rng.gen_range(0.3..2.0)), (0.5 * a, rng.gen_range(0.3..2.0))];
    SchrodingerProfile::new(PotentialProfile::symmetric(tail, core, 0.0, a).unwrap()).unwrap()
}

fn c1_period_constants_and_brackets() -> Result<String, String> {
    let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
    let tail = e.tail();
    let pc = PeriodConstants::of(&tail);
    let (l0, v0) = e.l0_v0();
    let mut worst = rel(pc.l0, l0).max((pc.v0 - v0).abs() / v0.abs().max(1.0)).max(rel(pc.q, e.q()));
    for i in 1..50 {
        let x = e.a * i as f64 / 50.0;
        let (pm, mp, pmp, mpm) = one_period_brackets(&tail, x);
        worst = worst.max(rel(pm, e.pm(x))).max(rel(mp, e.mp(x))).max(rel(pmp, e.pmp(x))).max(rel(mpm, e.mpm(x)));
    }
    ensure(worst < 1e-12, format!("worst relative error {worst:.2e}"))?;
    Ok(format!("worst relative error {worst:.2e} (tol 1e-12)"))
}

fn c2_example1_expansion() -> Result<String, String> {
    let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
    let p = e.profile();
    let s = s_coeffs(&p, 3).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = (1..30).map(|i| e.a * i as f64 / 30.0).collect();
    // s₃ changes sign inside (0, a), so each sₙ is measured against its sup norm
    let sup: Vec<f64> = (0..4).map(|n| xs.iter().map(|&x| e.s(x)[n].abs()).fold(0.0, f64::max)).collect();
    let (mut worst, mut pointwise): (f64, f64) = (0.0, 0.0);
    for &x in &xs {
        let want = e.s(x);
        for n in 0..4 {
            let got = s.eval(n as i32, x).map_err(|e| e.to_string())?;
            worst = worst.max((got - want[n]).abs() / sup[n]);
            pointwise = pointwise.max(rel(got, want[n]));
        }
        let y = 0.5 * x;
        let g = green_coeffs(&p, x, y, 0).map_err(|e| e.to_string())?;
        let (gm1, g0) = e.g(x, y);
        worst = worst.max(rel(g.g(-1).unwrap(), gm1)).max(rel(g.g(0).unwrap(), g0));
    }
    let detail = format!(
        "s0..s3 (relative to sup norm), g-1, g0 worst relative error {worst:.2e} (tol 1e-12); \
         pointwise worst {pointwise:.1e} at a sign change of s3"
    );
    ensure(worst < 1e-12, detail.clone())?;
    Ok(detail)
}

fn c3_band_edges() -> Result<String, String> {
    let e = Example1::new(1.0, 1.0, 0.6, 1.0).unwrap();
    let edges = band_edges(&e.tail(), 7.5).map_err(|e| e.to_string())?;
    let want = [2.21, 4.02, 5.77, 6.88];
    ensure(edges.len() >= 4, format!("only {} edges: {edges:?}", edges.len()))?;
    let worst = edges.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let shown: Vec<String> = edges[..4].iter().map(|k| format!("{k:.4}")).collect();
    ensure(worst <= 0.01, format!("edges {shown:?}, worst deviation {worst:.4}"))?;
    Ok(format!("edges [{}], worst deviation {worst:.4} (tol 0.01)", shown.join(", ")))
}

fn c4_remainder_slope() -> Result<String, String> {
    let mut slopes = Vec::new();
    for h in [0.2, 0.5, 1.0] {
        let e = Example1::new(1.0, 1.0, 0.6, h).unwrap();
        let p = e.profile();
        let (x, y) = (0.4, 0.1);
        let g = green_coeffs(&p, x, y, 2).map_err(|e| e.to_string())?;
        let ray = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|j| {
                let k = 10f64.powf(-3.0 + 2.0 * j as f64 / 20.0);
                let r = (exact_green(&p, x, y, ray * k).unwrap() - g.partial_sum(ray * k)).norm();
                (k.ln(), r.ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        slopes.push(slope);
    }
    let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = slopes.iter().map(|s| format!("{s:.3}")).collect();
    ensure(min >= 2.9, format!("slopes {shown:?} for h = 0.2, 0.5, 1"))?;
    Ok(format!("log-log slopes [{}] for h = 0.2, 0.5, 1 (need >= 2.9)", shown.join(", ")))
}

fn c5_generic_case() -> Result<String, String> {
    let e = Example2::new(1.0, 1.0, 0.6, 0.5).unwrap();
    let p = SchrodingerProfile::new(e.profile()).map_err(|e| e.to_string())?;
    let (x, y) = (0.4, 0.1);
    let e0 = p.energy_offset();
    ensure((e0 - 0.3952).abs() <= 5e-4 && (e.e0 - 0.3952).abs() <= 5e-4, format!("E0 = {e0}, closed form {}", e.e0))?;
    let formula = generic_green_coeffs(&p, x, y, 1).map_err(|e| e.to_string())?;
    let closed = e.g(x, y);
    let fit = extract_auto(|k| schrodinger_green(&p, x, y, k), 0..=1, 0.4).map_err(|e| e.to_string())?;
    let routes = [
        ("formula", formula.g(0).unwrap(), formula.g(1).unwrap()),
        ("closed form", closed.0, closed.1),
        ("oracle fit", fit.coeff(0).unwrap().re, fit.coeff(1).unwrap().re),
    ];
    for (name, g0, g1) in routes {
        ensure((g0 + 3.28).abs() <= 0.01 && (g1 + 21.85).abs() <= 0.05, format!("{name}: g0 = {g0}, g1 = {g1}"))?;
    }
    for i in 0..3 {
        for j in i + 1..3 {
            ensure(
                (routes[i].1 - routes[j].1).abs() <= 0.01 && (routes[i].2 - routes[j].2).abs() <= 0.05,
                format!("{} vs {} disagree", routes[i].0, routes[j].0),
            )?;
        }
    }
    let spread0 = routes.iter().map(|r| (r.1 - routes[0].1).abs()).fold(0.0, f64::max);
    let spread1 = routes.iter().map(|r| (r.2 - routes[0].2).abs()).fold(0.0, f64::max);
    Ok(format!(
        "E0 = {e0:.6}, g0 = {:.6}, g1 = {:.6}; spread across three routes {spread0:.1e} / {spread1:.1e}",
        routes[0].1, routes[0].2
    ))
}

fn c6_oracle_equivalence() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let e = example1_family(&mut rng);
        let p = e.profile();
        let x = rng.gen_range(0.05..0.95) * e.a;
        let y = rng.gen_range(0.05..0.95) * x;
        let g = green_coeffs(&p, x, y, 2).map_err(|e| e.to_string())?;
        let fit = extract_auto(|k| exact_green(&p, x, y, k), -1..=2, 0.4).map_err(|e| e.to_string())?;
        for n in -1..=2 {
            worst = worst.max(crel(fit.coeff(n).unwrap(), C::from(g.g(n).unwrap())));
        }
    }
    ensure(worst < 1e-5, format!("worst relative error {worst:.2e}"))?;
    Ok(format!("20 parameter sets, orders -1..2, worst relative error {worst:.2e} (tol 1e-5)"))
}

fn c7_property_suites() -> Result<String, String> {
    const N: usize = 200;
    let mut rng = StdRng::seed_from_u64(7);
    let random_k = |rng: &mut StdRng| C::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.0..1.0));
    let (mut det, mut comp, mut qbar, mut flux, mut gap, mut scale, mut xind) =
        (0.0f64, 0.0f64, 0.0f64, f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..N {
        let e = example1_family(&mut rng);
        let p = e.profile();
        let k = random_k(&mut rng);
        let xp = rng.gen_range(-3.0..1.0);
        let x = xp + rng.gen_range(0.0..3.0);
        let mid = rng.gen_range(xp..=x);
        let u = transfer_matrix(&p, x, xp, k).map_err(|e| e.to_string())?;
        let size = u.alpha.norm_sqr().max(1.0);
        det = det.max((u.det() - 1.0).norm() / size);
        let split = transfer_matrix(&p, x, mid, k).unwrap().compose(&transfer_matrix(&p, mid, xp, k).unwrap());
        for (a, b) in u.to_mat().iter().flatten().zip(split.to_mat().iter().flatten()) {
            comp = comp.max((a - b).norm() / size.sqrt());
        }
        let w = rng.gen_range(-2.0..2.0);
        let g = generalized_coeffs(&u, w, p.eval(x)).map_err(|e| e.to_string())?;
        qbar = qbar.max(g.q_bar.norm());
        flux = flux.min(g.alpha_bar.norm_sqr() - g.beta_bar_minus.norm_sqr());
    }
    for _ in 0..N {
        let e = example1_family(&mut rng);
        let p = e.profile();
        let edges = band_edges(&e.tail(), 8.0).map_err(|e| e.to_string())?;
        if edges.len() < 2 || edges[1] - edges[0] < 0.02 {
            continue;
        }
        let k = rng.gen_range(edges[0] + 0.01..edges[1] - 0.01);
        let y = rng.gen_range(-1.0..1.0);
        let x = y + rng.gen_range(0.0..1.5);
        let gs = exact_green(&p, x, y, C::from(k)).map_err(|e| e.to_string())?;
        gap = gap.max(gs.im.abs() / gs.norm());
    }
    for _ in 0..N {
        let p = example2_family(&mut rng);
        let plus = zero_energy_solution(&p, Sign::Plus).map_err(|e| e.to_string())?;
        let minus = zero_energy_solution(&p, Sign::Minus).map_err(|e| e.to_string())?;
        let y = rng.gen_range(-1.0..1.0);
        let x = y + rng.gen_range(0.0..1.5);
        let base = generic_green_coeffs_from(&plus, &minus, x, y, 2).map_err(|e| e.to_string())?;
        let (cp, cm) = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let scaled = generic_green_coeffs_from(&plus.scaled(cp).unwrap(), &minus.scaled(cm).unwrap(), x, y, 2)
            .map_err(|e| e.to_string())?;
        for n in 0..=2 {
            scale = scale.max(rel(scaled.g(n).unwrap(), base.g(n).unwrap()));
        }
    }
    for _ in 0..N {
        let e = example1_family(&mut rng);
        let tail = e.tail();
        let base = PeriodConstants::of(&tail);
        let x = rng.gen_range(-5.0..5.0);
        let at = PeriodConstants::at(&tail, x);
        let q = periodic_bracket(&"-+-+".parse::<SignWord>().unwrap(), x, &tail)
            + periodic_bracket(&"+-+-".parse::<SignWord>().unwrap(), x, &tail);
        xind = xind.max(rel(at.p, base.p)).max(rel(at.m, base.m)).max(rel(at.q, base.q)).max(rel(q, base.q));
    }
    let summary = format!(
        "det {det:.1e} (tol 1e-11), composition {comp:.1e} (tol 1e-11), max|Q̄| {qbar:.6} (<= 1), \
         min(|ᾱ|²-|β̄⁻|²) {flux:.6} (>= 1), gap Im/|G| {gap:.1e} (tol 1e-9), scale {scale:.1e} (tol 1e-12), \
         x-independence {xind:.1e} (tol 1e-12)"
    );
    ensure(
        det < 1e-11
            && comp < 1e-11
            && qbar <= 1.0 + 1e-10
            && flux >= 1.0 - 1e-10
            && gap < 1e-9
            && scale < 1e-12
            && xind < 1e-12,
        summary.clone(),
    )?;
    Ok(format!("{N} instances each: {summary}"))
}

fn c8_effective_well() -> Result<String, String> {
    let e = Example1::new(1.0, 1.0, 0.6, 4.0).unwrap();
    let p = e.profile();
    let edges = band_edges(&e.tail(), 3.0).map_err(|e| e.to_string())?;
    let top = edges[0];
    let (x, y) = (0.4, 0.1);
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for i in 0..=400 {
        let k = top * (0.05 + 0.9 * i as f64 / 400.0);
        let kc = C::new(k, 1e-9);
        let exact = exact_green(&p, x, y, kc).map_err(|e| e.to_string())?;
        let approx = e.effective_well_green(x, y, kc);
        let r = crel(approx, exact);
        if r > worst {
            worst = r;
            at = k;
        }
    }
    ensure(worst < 0.02, format!("worst relative deviation {worst:.3e} at k = {at:.4} in first band (0, {top:.4})"))?;
    Ok(format!("worst relative deviation {worst:.3e} at k = {at:.4} (tol 2e-2)"))
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "Example-1 period constants and one-period brackets", s(1), c1_period_constants_and_brackets),
        criterion(2, "Example-1 s0..s3 and g-1, g0", s(1), c2_example1_expansion),
        criterion(3, "band edges of the Example-1 tail", s(5), c3_band_edges),
        criterion(4, "exact-vs-expansion remainder slope", s(10), c4_remainder_slope),
        criterion(5, "generic case, three routes", s(10), c5_generic_case),
        criterion(6, "oracle equivalence on 20 random parameter sets", s(60), c6_oracle_equivalence),
        criterion(7, "property suites", s(60), c7_property_suites),
        criterion(8, "effective-well approximation at h = 4", s(10), c8_effective_well),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    report(format!("{} of {} criteria pass", results.len() - failed.len(), results.len()));
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
