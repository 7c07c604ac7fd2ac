//! Asymptotically periodic piecewise-constant potentials.
//!
//! A [`PotentialProfile`] is a finite core window `[x_min, x_max)` glued to a
//! periodic tail on each side. Every function is right-continuous at jumps.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::piecewise::{normalize_breaks, Steps};

/// Which tail a quantity is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// One period of a piecewise-constant periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPotential {
    period: f64,
    segments: Vec<(f64, f64)>,
    phase_origin: f64,
    // cumulative segment offsets, starting at 0 and ending at `period`
    offsets: Vec<f64>,
}

impl PeriodicPotential {
    /// `segments` are `(width, value)` pairs listed from `phase_origin` onwards.
    pub fn new(period: f64, segments: Vec<(f64, f64)>, phase_origin: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidPotential(format!("period must be positive, got {period}")));
        }
        if segments.is_empty() {
            return Err(Error::InvalidPotential("a period needs at least one segment".into()));
        }
        if let Some((w, _)) = segments.iter().find(|(w, _)| !(*w > 0.0)) {
            return Err(Error::InvalidPotential(format!("segment width must be positive, got {w}")));
        }
        if segments.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidPotential("segment values must be finite".into()));
        }
        let total: f64 = segments.iter().map(|(w, _)| w).sum();
        if (total - period).abs() > 1e-12 * period {
            return Err(Error::InvalidPotential(format!("segment widths sum to {total}, expected period {period}")));
        }
        let mut offsets = Vec::with_capacity(segments.len() + 1);
        let mut acc = 0.0;
        offsets.push(0.0);
        for (w, _) in &segments[..segments.len() - 1] {
            acc += w;
            offsets.push(acc);
        }
        offsets.push(period);
        Ok(Self { period, segments, phase_origin, offsets })
    }

    pub fn constant(period: f64, value: f64) -> Self {
        Self::new(period, vec![(period, value)], 0.0).expect("valid constant tail")
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn phase_origin(&self) -> f64 {
        self.phase_origin
    }

    pub fn is_constant(&self) -> bool {
        self.segments.iter().all(|(_, v)| *v == self.segments[0].1)
    }

    pub fn min_value(&self) -> f64 {
        self.segments.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.segments.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_value(&self) -> f64 {
        self.segments.iter().map(|(w, v)| w * v).sum::<f64>() / self.period
    }

    /// Position of `x` inside the period, in `[0, period)`.
    fn phase(&self, x: f64) -> f64 {
        let t = (x - self.phase_origin).rem_euclid(self.period);
        if t >= self.period {
            0.0
        } else {
            t
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = self.phase(x);
        let i = self.offsets.partition_point(|o| *o <= t).saturating_sub(1);
        self.segments[i.min(self.segments.len() - 1)].1
    }

    /// Segment boundaries of the periodic extension lying in `[a, b]`.
    pub fn boundaries(&self, a: f64, b: f64) -> Vec<f64> {
        let n0 = ((a - self.phase_origin) / self.period).floor() as i64 - 1;
        let n1 = ((b - self.phase_origin) / self.period).ceil() as i64 + 1;
        let mut out = Vec::new();
        for n in n0..=n1 {
            let base = self.phase_origin + n as f64 * self.period;
            for off in &self.offsets[..self.offsets.len() - 1] {
                let p = base + off;
                if p >= a && p <= b {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn steps(&self, a: f64, b: f64) -> Steps {
        Steps::sample(normalize_breaks(self.boundaries(a, b), a, b), |t| self.eval(t))
    }
}

/// Full potential: left tail, core window, right tail.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    left_tail: PeriodicPotential,
    right_tail: PeriodicPotential,
    core: Vec<(f64, f64)>,
    x_min: f64,
    x_max: f64,
}

impl PotentialProfile {
    /// `core` lists `(breakpoint, value)` pairs; each value holds until the
    /// next breakpoint (or `x_max`). The first breakpoint must equal `x_min`.
    pub fn new(
        left_tail: PeriodicPotential,
        right_tail: PeriodicPotential,
        core: Vec<(f64, f64)>,
        x_min: f64,
        x_max: f64,
    ) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::InvalidPotential(format!("window [{x_min}, {x_max}] is empty")));
        }
        let Some(first) = core.first() else {
            return Err(Error::InvalidPotential("core window is not covered".into()));
        };
        if first.0 != x_min {
            return Err(Error::InvalidPotential(format!(
                "core starts at {} but the window starts at {x_min}",
                first.0
            )));
        }
        if core.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidPotential("core breakpoints overlap".into()));
        }
        if core.last().unwrap().0 >= x_max {
            return Err(Error::InvalidPotential("core breakpoint outside the window".into()));
        }
        Ok(Self { left_tail, right_tail, core, x_min, x_max })
    }

    /// Same tail on both sides.
    pub fn symmetric(tail: PeriodicPotential, core: Vec<(f64, f64)>, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(tail.clone(), tail, core, x_min, x_max)
    }

    /// A purely periodic profile (`V_Δ ≡ 0`).
    pub fn periodic(tail: PeriodicPotential) -> Self {
        let o = tail.phase_origin();
        let mut acc = o;
        let core = tail
            .segments()
            .iter()
            .map(|(w, v)| {
                let bp = acc;
                acc += w;
                (bp, *v)
            })
            .collect();
        Self::symmetric(tail.clone(), core, o, o + tail.period()).expect("valid periodic profile")
    }

    pub fn zero() -> Self {
        Self::periodic(PeriodicPotential::constant(1.0, 0.0))
    }

    pub fn left_tail(&self) -> &PeriodicPotential {
        &self.left_tail
    }

    pub fn right_tail(&self) -> &PeriodicPotential {
        &self.right_tail
    }

    pub fn tail(&self, side: Side) -> &PeriodicPotential {
        match side {
            Side::Left => &self.left_tail,
            Side::Right => &self.right_tail,
        }
    }

    pub fn core(&self) -> &[(f64, f64)] {
        &self.core
    }

    pub fn window(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.left_tail == self.right_tail
    }

    /// `V(x)`, right-continuous at every jump.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.x_min {
            self.left_tail.eval(x)
        } else if x >= self.x_max {
            self.right_tail.eval(x)
        } else {
            let i = self.core.partition_point(|(b, _)| *b <= x).saturating_sub(1);
            self.core[i].1
        }
    }

    /// `V_Δ(x) = V(x) - V_tail(x)` against the selected tail.
    pub fn delta(&self, x: f64, side: Side) -> f64 {
        self.eval(x) - self.tail(side).eval(x)
    }

    /// `(Δ⁺(x), Δ⁻(x)) = (e^{V} - e^{V_p}, e^{-V} - e^{-V_p})` against the selected tail.
    pub fn delta_parts(&self, x: f64, side: Side) -> (f64, f64) {
        let v = self.eval(x);
        let vp = self.tail(side).eval(x);
        if v == vp {
            return (0.0, 0.0);
        }
        (v.exp() - vp.exp(), (-v).exp() - (-vp).exp())
    }

    /// Every jump location of `V` inside `[a, b]`, plus candidate locations
    /// where nothing actually jumps.
    pub fn boundaries(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        if a < self.x_min {
            pts.extend(self.left_tail.boundaries(a, b.min(self.x_min)));
        }
        if b > self.x_max {
            pts.extend(self.right_tail.boundaries(a.max(self.x_max), b));
        }
        pts.extend(self.core.iter().map(|(bp, _)| *bp));
        pts.push(self.x_min);
        pts.push(self.x_max);
        pts
    }

    /// `V` on `[a, b]` as a step function.
    pub fn steps(&self, a: f64, b: f64) -> Steps {
        Steps::sample(normalize_breaks(self.boundaries(a, b), a, b), |t| self.eval(t))
    }

    /// `V_tail` on `[a, b]` with breakpoints aligned to the profile's.
    pub fn tail_steps(&self, a: f64, b: f64, side: Side) -> Steps {
        let mut pts = self.boundaries(a, b);
        pts.extend(self.tail(side).boundaries(a, b));
        let tail = self.tail(side);
        Steps::sample(normalize_breaks(pts, a, b), |t| tail.eval(t))
    }

    /// True iff `V_Δ` has finite `n`-th moment. Compact support makes this
    /// unconditional; the expansion order is then limited only by the
    /// implemented formulas.
    pub fn validate_decay(&self, _n: u32) -> bool {
        true
    }

    /// Every value shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        let shift_tail = |t: &PeriodicPotential| {
            PeriodicPotential::new(
                t.period(),
                t.segments().iter().map(|(w, v)| (*w, v + c)).collect(),
                t.phase_origin(),
            )
            .expect("shift keeps the tail valid")
        };
        Self {
            left_tail: shift_tail(&self.left_tail),
            right_tail: shift_tail(&self.right_tail),
            core: self.core.iter().map(|(b, v)| (*b, v + c)).collect(),
            x_min: self.x_min,
            x_max: self.x_max,
        }
    }

    /// The profile reflected through `x -> -x`, re-expressed right-continuously.
    pub fn mirrored(&self) -> Self {
        let mirror_tail = |t: &PeriodicPotential| {
            let segs: Vec<(f64, f64)> = t.segments().iter().rev().copied().collect();
            PeriodicPotential::new(t.period(), segs, -(t.phase_origin() + t.period()))
                .expect("mirror keeps the tail valid")
        };
        let mut core = Vec::with_capacity(self.core.len());
        let ends: Vec<f64> = self.core.iter().skip(1).map(|c| c.0).chain([self.x_max]).collect();
        for ((_, v), end) in self.core.iter().zip(ends).rev() {
            core.push((-end, *v));
        }
        Self::new(mirror_tail(&self.right_tail), mirror_tail(&self.left_tail), core, -self.x_max, -self.x_min)
            .expect("mirror keeps the profile valid")
    }
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse { line, message: format!("missing {what}") })?;
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse { line, message: format!("invalid {what} '{tok}'") })
}

struct TailBuilder {
    line: usize,
    period: f64,
    origin: f64,
    segments: Vec<(f64, f64)>,
}

impl TailBuilder {
    fn build(self) -> Result<PeriodicPotential> {
        let total: f64 = self.segments.iter().map(|s| s.0).sum();
        if self.segments.is_empty() || total < self.period * (1.0 - 1e-12) {
            return Err(Error::Parse {
                line: self.line,
                message: format!("segments cover {total} of period {} (uncovered interval)", self.period),
            });
        }
        if total > self.period * (1.0 + 1e-12) {
            return Err(Error::Parse {
                line: self.line,
                message: format!("segments cover {total} of period {} (overlapping intervals)", self.period),
            });
        }
        PeriodicPotential::new(self.period, self.segments, self.origin)
            .map_err(|e| Error::Parse { line: self.line, message: e.to_string() })
    }
}

/// Parses the line-oriented potential description:
///
/// ```text
/// period_left 1.0 [origin]    # or `period` for both tails
/// seg 0.6 0.0
/// seg 0.4 1.0
/// period_right 1.0 [origin]   # optional; defaults to the left tail
/// seg 1.0 0.0
/// window 0.0 0.6
/// core 0.0 -1.0
/// ```
impl FromStr for PotentialProfile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Which {
            Left,
            Right,
            Both,
        }
        let mut left: Option<TailBuilder> = None;
        let mut right: Option<TailBuilder> = None;
        let mut both = false;
        let mut current: Option<Which> = None;
        let mut window: Option<(usize, f64, f64)> = None;
        let mut core: Vec<(usize, f64, f64)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let mut toks = content.split_whitespace();
            let key = toks.next().unwrap();
            match key {
                "period" | "period_left" | "period_right" => {
                    let period = parse_num(toks.next(), line, "period")?;
                    if !(period > 0.0) {
                        return Err(Error::Parse { line, message: "period must be positive".into() });
                    }
                    let origin = match toks.next() {
                        Some(t) => parse_num(Some(t), line, "phase origin")?,
                        None => 0.0,
                    };
                    let slot = match key {
                        "period_right" => &mut right,
                        _ => &mut left,
                    };
                    if slot.is_some() || (both && key != "period_right") {
                        return Err(Error::Parse { line, message: format!("duplicate '{key}'") });
                    }
                    *slot = Some(TailBuilder { line, period, origin, segments: Vec::new() });
                    current = Some(match key {
                        "period" => {
                            both = true;
                            Which::Both
                        }
                        "period_left" => Which::Left,
                        _ => Which::Right,
                    });
                }
                "seg" => {
                    let width = parse_num(toks.next(), line, "segment width")?;
                    let value = parse_num(toks.next(), line, "segment value")?;
                    if !(width > 0.0) {
                        return Err(Error::Parse { line, message: "segment width must be positive".into() });
                    }
                    let builder = match current {
                        Some(Which::Left) | Some(Which::Both) => left.as_mut(),
                        Some(Which::Right) => right.as_mut(),
                        None => None,
                    }
                    .ok_or_else(|| Error::Parse { line, message: "'seg' before any period header".into() })?;
                    let covered: f64 = builder.segments.iter().map(|s| s.0).sum();
                    if covered + width > builder.period * (1.0 + 1e-12) {
                        return Err(Error::Parse {
                            line,
                            message: format!(
                                "segment overlaps the next period (covers {} of {})",
                                covered + width,
                                builder.period
                            ),
                        });
                    }
                    builder.segments.push((width, value));
                }
                "window" => {
                    let a = parse_num(toks.next(), line, "x_min")?;
                    let b = parse_num(toks.next(), line, "x_max")?;
                    if !(a < b) {
                        return Err(Error::Parse { line, message: "window needs x_min < x_max".into() });
                    }
                    if window.is_some() {
                        return Err(Error::Parse { line, message: "duplicate 'window'".into() });
                    }
                    window = Some((line, a, b));
                }
                "core" => {
                    let bp = parse_num(toks.next(), line, "core breakpoint")?;
                    let v = parse_num(toks.next(), line, "core value")?;
                    core.push((line, bp, v));
                }
                other => {
                    return Err(Error::Parse { line, message: format!("unknown directive '{other}'") });
                }
            }
            if toks.next().is_some() && key != "period" && key != "period_left" && key != "period_right" {
                return Err(Error::Parse { line, message: "trailing tokens".into() });
            }
        }

        let eof = text.lines().count() + 1;
        let left = left
            .ok_or_else(|| Error::Parse { line: eof, message: "missing 'period_left' (or 'period')".into() })?
            .build()?;
        let right = match right {
            Some(r) => {
                if both {
                    return Err(Error::Parse { line: r.line, message: "'period' already sets both tails".into() });
                }
                r.build()?
            }
            None => left.clone(),
        };
        let (wline, x_min, x_max) =
            window.ok_or_else(|| Error::Parse { line: eof, message: "missing 'window'".into() })?;
        if core.is_empty() {
            return Err(Error::Parse { line: wline, message: "window is not covered by any 'core' line".into() });
        }
        let (first_line, first_bp, _) = core[0];
        if first_bp != x_min {
            return Err(Error::Parse {
                line: first_line,
                message: format!("core starts at {first_bp}; [{x_min}, {first_bp}) is uncovered"),
            });
        }
        for w in core.windows(2) {
            if !(w[0].1 < w[1].1) {
                return Err(Error::Parse {
                    line: w[1].0,
                    message: format!("core breakpoint {} overlaps the previous interval", w[1].1),
                });
            }
        }
        if let Some((l, bp, _)) = core.iter().find(|(_, bp, _)| *bp >= x_max || *bp < x_min) {
            return Err(Error::Parse { line: *l, message: format!("core breakpoint {bp} lies outside the window") });
        }
        PotentialProfile::new(left, right, core.into_iter().map(|(_, b, v)| (b, v)).collect(), x_min, x_max)
            .map_err(|e| Error::Parse { line: wline, message: e.to_string() })
    }
}
