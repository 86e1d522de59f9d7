//! Excursions of the actual spread away from zero, zero classification, and
//! the dormant wealth transform.
//!
//! A grid value counts as zero when it is at most `eps`. A positive run
//! starts with a jump when its first value exceeds the previous one by more
//! than `jump_threshold`; otherwise the excursion starts continuously at the
//! preceding zero. Inside a positive run, a value at most `jump_threshold`
//! followed by an upward jump larger than `jump_threshold` marks a zero of
//! the left limit, which ends one excursion and starts the next.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExcursionOptions {
    pub eps: f64,
    pub jump_threshold: f64,
    /// Excursions shorter than this many grid steps are not resolved.
    pub min_steps: usize,
}

impl Default for ExcursionOptions {
    fn default() -> Self {
        ExcursionOptions { eps: 0.0, jump_threshold: 1e-2, min_steps: 2 }
    }
}

impl ExcursionOptions {
    pub fn with_eps(eps: f64) -> Self {
        ExcursionOptions { eps, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    /// The excursion leaves a zero of the spread continuously.
    Continuous,
    /// The spread is already positive at the start.
    Jump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    /// The spread is zero at the end point.
    Zero,
    /// The left limit vanishes but the spread jumps back up.
    LeftLimitZero,
    /// The excursion runs to the horizon.
    Horizon,
}

/// Grid indices `[start, end)`; `end` is the index of the terminating zero
/// (or `len` when the excursion reaches the horizon).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Excursion {
    pub start: usize,
    pub end: usize,
    pub start_time: f64,
    pub end_time: f64,
    pub start_kind: StartKind,
    pub end_kind: EndKind,
    /// True when the left limit of the spread vanishes at the end point.
    pub continuous_end: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcursionDecomposition {
    pub excursions: Vec<Excursion>,
    /// Grid times where the spread is zero.
    pub zero_count: usize,
}

impl ExcursionDecomposition {
    /// Excursion containing grid index `i` at a positive spread value.
    pub fn containing(&self, i: usize) -> Option<&Excursion> {
        self.excursions.iter().find(|e| e.first_positive() <= i && i < e.end)
    }
}

impl Excursion {
    /// First grid index with positive spread.
    pub fn first_positive(&self) -> usize {
        match self.start_kind {
            StartKind::Continuous => self.start + 1,
            StartKind::Jump => self.start,
        }
    }
}

pub fn detect_excursions(times: &[f64], spread: &[f64], opts: &ExcursionOptions) -> ExcursionDecomposition {
    let n = spread.len();
    let zero = |i: usize| spread[i] <= opts.eps;
    let horizon = times.last().copied().unwrap_or(0.0);
    let time_at = |i: usize| if i < n { times[i] } else { horizon };
    let mut excursions = Vec::new();
    let mut i = 0;
    while i < n {
        if zero(i) {
            i += 1;
            continue;
        }
        // Positive run from i; split at left-limit zeros.
        let mut start = i;
        let mut start_kind = if i > 0 && spread[i] - spread[i - 1] <= opts.jump_threshold {
            StartKind::Continuous
        } else {
            StartKind::Jump
        };
        let mut j = i + 1;
        loop {
            let at_end = j >= n || zero(j);
            let left_limit_zero = !at_end && spread[j - 1] <= opts.jump_threshold && spread[j] - spread[j - 1] > opts.jump_threshold;
            if !(at_end || left_limit_zero) {
                j += 1;
                continue;
            }
            let (end_kind, continuous_end) = if j >= n {
                (EndKind::Horizon, false)
            } else if left_limit_zero {
                (EndKind::LeftLimitZero, true)
            } else {
                (EndKind::Zero, spread[j - 1] <= opts.jump_threshold)
            };
            let s = if start_kind == StartKind::Continuous { start - 1 } else { start };
            excursions.push(Excursion {
                start: s,
                end: j,
                start_time: time_at(s),
                end_time: time_at(j),
                start_kind,
                end_kind,
                continuous_end,
            });
            if left_limit_zero {
                start = j;
                start_kind = StartKind::Jump;
                j += 1;
                continue;
            }
            break;
        }
        i = j;
    }
    ExcursionDecomposition { excursions, zero_count: (0..n).filter(|&k| zero(k)).count() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    /// The spread stays zero on the next grid step.
    RightInterior,
    /// A resolved excursion starts here.
    ExcursionStart,
    /// Neither alternative can be confirmed at grid scale.
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroClassification {
    /// `(grid index, kind)` for every zero before the horizon.
    pub zeros: Vec<(usize, ZeroKind)>,
    pub right_interior: usize,
    pub excursion_starts: usize,
    pub ambiguous: Vec<usize>,
}

impl ZeroClassification {
    /// True when every zero is right-interior or an excursion start.
    pub fn holds(&self) -> bool {
        self.ambiguous.is_empty()
    }
}

/// Classifies each zero of the spread before the horizon. A zero followed by
/// a positive run is ambiguous when the next excursion is shorter than
/// `min_steps` grid steps or ends at a left-limit zero without touching zero,
/// the grid signature of left-limit zeros accumulating from the right.
pub fn check_zero_classification(times: &[f64], spread: &[f64], opts: &ExcursionOptions) -> ZeroClassification {
    let n = spread.len();
    let dec = detect_excursions(times, spread, opts);
    let mut zeros = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if spread[i] > opts.eps {
            continue;
        }
        let kind = if spread[i + 1] <= opts.eps {
            ZeroKind::RightInterior
        } else {
            let next = dec.excursions.iter().find(|e| e.first_positive() == i + 1);
            match next {
                Some(e) if e.end - e.first_positive() >= opts.min_steps && e.end_kind != EndKind::LeftLimitZero => {
                    ZeroKind::ExcursionStart
                }
                _ => ZeroKind::Ambiguous,
            }
        };
        zeros.push((i, kind));
    }
    let count = |k: ZeroKind| zeros.iter().filter(|(_, z)| *z == k).count();
    ZeroClassification {
        right_interior: count(ZeroKind::RightInterior),
        excursion_starts: count(ZeroKind::ExcursionStart),
        ambiguous: zeros.iter().filter(|(_, z)| *z == ZeroKind::Ambiguous).map(|(i, _)| *i).collect(),
        zeros,
    }
}

/// Dormant version of a wealth process. Inside an excursion, at points with
/// positive spread, the value is frozen at `V(Γ−)` (grid: `V(Γ − h)`) when the
/// excursion ends before the horizon with a vanishing left limit, and at
/// `V(Γ ∧ T)` otherwise. Elsewhere the value is unchanged.
pub fn dormant_transform(times: &[f64], spread: &[f64], wealth: &[f64], opts: &ExcursionOptions) -> Vec<f64> {
    let dec = detect_excursions(times, spread, opts);
    let n = wealth.len();
    let mut out = wealth.to_vec();
    for e in &dec.excursions {
        let dormant_end = e.end < n && e.continuous_end;
        let frozen = if dormant_end { wealth[e.end - 1] } else { wealth[e.end.min(n - 1)] };
        for v in &mut out[e.first_positive()..e.end] {
            *v = frozen;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathlab::uniform_grid;

    fn sampled(n: usize, f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let t = uniform_grid(1.0, n);
        let s = t.iter().map(|x| f(*x)).collect();
        (t, s)
    }

    fn step(t: f64) -> f64 {
        if (0.3..0.6).contains(&t) {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn frictionless_has_no_excursions() {
        let (t, s) = sampled(100, |_| 0.0);
        let d = detect_excursions(&t, &s, &ExcursionOptions::default());
        assert!(d.excursions.is_empty());
        assert_eq!(d.zero_count, 101);
        let w: Vec<f64> = t.iter().map(|x| x * x).collect();
        assert_eq!(dormant_transform(&t, &s, &w, &ExcursionOptions::default()), w);
    }

    #[test]
    fn step_spread_is_one_jump_excursion() {
        let (t, s) = sampled(1000, |x| step(x + 1e-12));
        let d = detect_excursions(&t, &s, &ExcursionOptions::default());
        assert_eq!(d.excursions.len(), 1);
        let e = &d.excursions[0];
        assert_eq!(e.start_kind, StartKind::Jump);
        assert!((e.start_time - 0.3).abs() < 1e-9 && (e.end_time - 0.6).abs() < 1e-9);
        assert_eq!(e.end_kind, EndKind::Zero);
        assert!(!e.continuous_end);
    }

    #[test]
    fn sine_spread_starts_continuously() {
        let (t, s) = sampled(1000, |x| (2.0 * std::f64::consts::PI * x).sin().max(0.0));
        let opts = ExcursionOptions::with_eps(1e-12);
        let d = detect_excursions(&t, &s, &opts);
        assert_eq!(d.excursions.len(), 1);
        let e = &d.excursions[0];
        assert_eq!(e.start_kind, StartKind::Continuous);
        assert_eq!(e.start, 0);
        assert!((e.end_time - 0.5).abs() < 2e-3);
        assert!(e.continuous_end);
        assert!(check_zero_classification(&t, &s, &opts).holds());
    }

    #[test]
    fn dormant_jump_end_uses_value_at_end() {
        let (t, s) = sampled(1000, |x| step(x + 1e-12));
        let w: Vec<f64> = t.clone();
        let d = dormant_transform(&t, &s, &w, &ExcursionOptions::default());
        for (i, x) in t.iter().enumerate() {
            if (0.3..0.6).contains(&(x + 1e-12)) {
                assert!((d[i] - 0.6).abs() < 1e-9);
            } else {
                assert_eq!(d[i], w[i]);
            }
        }
    }

    #[test]
    fn dormant_continuous_end_uses_left_value() {
        // Tent on (0.3, 0.6) falling continuously to zero.
        let tent = |x: f64| if x > 0.3 && x < 0.6 { 0.15 - (x - 0.45).abs() } else { 0.0 };
        let (t, s) = sampled(1000, tent);
        let opts = ExcursionOptions { eps: 1e-12, jump_threshold: 0.01, min_steps: 2 };
        let w = t.clone();
        let d = dormant_transform(&t, &s, &w, &opts);
        let e = &detect_excursions(&t, &s, &opts).excursions[0];
        assert!(e.continuous_end);
        let frozen = t[e.end - 1];
        assert!((frozen - (0.6 - 1e-3)).abs() < 2e-3);
        for i in e.first_positive()..e.end {
            assert_eq!(d[i], frozen);
        }
    }

    #[test]
    fn excursion_to_horizon_uses_terminal_value() {
        let (t, s) = sampled(100, |x| if x >= 0.5 { 1.0 } else { 0.0 });
        let w: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
        let d = dormant_transform(&t, &s, &w, &ExcursionOptions::default());
        assert!(d[50..].iter().all(|v| *v == 2.0));
        assert_eq!(&d[..50], &w[..50]);
    }

    #[test]
    fn dormant_is_idempotent() {
        let (t, s) = sampled(500, |x| ((7.0 * x).sin() * 3.0).max(0.0).floor());
        let w: Vec<f64> = t.iter().map(|x| x.cos()).collect();
        let opts = ExcursionOptions::default();
        let once = dormant_transform(&t, &s, &w, &opts);
        assert_eq!(dormant_transform(&t, &s, &once, &opts), once);
    }

    #[test]
    fn sawtooth_zero_is_ambiguous() {
        let saw = |x: f64| {
            let mut n = 1;
            while n < 60 {
                let hi = 0.5f64.powi(n);
                if x >= hi / 2.0 && x < hi {
                    return hi - x;
                }
                n += 1;
            }
            0.0
        };
        let (t, s) = sampled(1024, saw);
        let opts = ExcursionOptions { eps: 0.0, jump_threshold: 2.0 / 1024.0, min_steps: 2 };
        let c = check_zero_classification(&t, &s, &opts);
        assert!(c.ambiguous.contains(&0));
        assert!(!c.holds());
        // The teeth are separate excursions ending at left-limit zeros.
        let d = detect_excursions(&t, &s, &opts);
        assert!(d.excursions.iter().filter(|e| e.end_kind == EndKind::LeftLimitZero).count() >= 5);
    }

    #[test]
    fn step_zeros_are_classified() {
        let (t, s) = sampled(1000, |x| step(x + 1e-12));
        let c = check_zero_classification(&t, &s, &ExcursionOptions::default());
        assert!(c.holds());
        assert_eq!(c.excursion_starts, 1);
        assert!(c.right_interior > 0);
    }

    #[test]
    fn refinement_keeps_resolved_excursions_apart() {
        let two = |x: f64| if (0.2..0.4).contains(&x) || (0.5..0.7).contains(&x) { 1.0 } else { 0.0 };
        for n in [100, 200, 400, 800] {
            let (t, s) = sampled(n, |x| two(x + 1e-12));
            assert_eq!(detect_excursions(&t, &s, &ExcursionOptions::default()).excursions.len(), 2);
        }
    }
}
