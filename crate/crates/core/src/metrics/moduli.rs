//! Moduli of continuity and the endpoint/sup functionals.
//!
//! All pair constraints use the closed form `|t - s| <= δ`. For step paths the
//! supremum over pairs straddling several breakpoints is then a strict
//! condition on breakpoint gaps, since `t` can only approach the right end of
//! its interval.

use std::collections::VecDeque;

use crate::error::{domain, Result};
use crate::paths::{Path, PlPath, StepPath};

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return domain(format!("δ must be positive and finite, got {delta}"));
    }
    Ok(())
}

/// Sliding-window extremum over `values[lo..=hi]` with nondecreasing bounds.
struct Window {
    max: VecDeque<usize>,
    min: VecDeque<usize>,
}

impl Window {
    fn new() -> Self {
        Self {
            max: VecDeque::new(),
            min: VecDeque::new(),
        }
    }

    fn push(&mut self, values: &[f64], i: usize) {
        while self.max.back().is_some_and(|&b| values[b] <= values[i]) {
            self.max.pop_back();
        }
        self.max.push_back(i);
        while self.min.back().is_some_and(|&b| values[b] >= values[i]) {
            self.min.pop_back();
        }
        self.min.push_back(i);
    }

    fn evict_before(&mut self, lo: usize) {
        while self.max.front().is_some_and(|&f| f < lo) {
            self.max.pop_front();
        }
        while self.min.front().is_some_and(|&f| f < lo) {
            self.min.pop_front();
        }
    }

    fn spread_against(&self, values: &[f64], v: f64) -> f64 {
        match (self.max.front(), self.min.front()) {
            (Some(&hi), Some(&lo)) => (values[hi] - v).max(v - values[lo]),
            _ => 0.0,
        }
    }
}

/// `sup_{|t-s| <= δ} |x(t) - x(s)|`.
pub fn modulus(x: &Path, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    match x {
        Path::Step(p) => Ok(step_modulus(p, delta)),
        Path::Linear(p) => Ok(pl_modulus(p, delta)),
        Path::Tapered(_) => domain("modulus is not implemented for tapered paths"),
    }
}

fn step_modulus(p: &StepPath, delta: f64) -> f64 {
    let (k, v) = (p.knots(), p.values());
    // Interval j pairs with interval i < j when j == i + 1, or when the gap
    // k[j] - k[i+1] between them is strictly below δ.
    let mut window = Window::new();
    let mut lo = 0;
    let mut best: f64 = 0.0;
    for j in 1..k.len() {
        window.push(v, j - 1);
        while lo + 1 < j && !(k[j] - k[lo + 1] < delta) {
            lo += 1;
        }
        window.evict_before(lo);
        best = best.max(window.spread_against(v, v[j]));
    }
    best
}

fn pl_modulus(p: &PlPath, delta: f64) -> f64 {
    let (k, v) = (p.knots(), p.values());
    let horizon = p.horizon();
    // Extremes of |x(t) - x(s)| over the constraint polygon sit at vertices:
    // knot pairs within δ, or a knot paired with the point δ away.
    let mut best: f64 = 0.0;
    let mut window = Window::new();
    let mut hi = 0;
    for a in 0..k.len() {
        while hi < k.len() && k[hi] - k[a] <= delta {
            window.push(v, hi);
            hi += 1;
        }
        window.evict_before(a);
        best = best.max(window.spread_against(v, v[a]));
        if k[a] + delta <= horizon {
            best = best.max((p.eval_unchecked(k[a] + delta) - v[a]).abs());
        }
        if k[a] - delta >= 0.0 {
            best = best.max((p.eval_unchecked(k[a] - delta) - v[a]).abs());
        }
    }
    best
}

/// `sup |x(t2) - x(t)| ∧ |x(t) - x(t1)|` over `t1 <= t <= t2`, `t2 - t1 <= δ`,
/// with `t1, t2` in `[0, window_end]`. Requires `0 < δ < T`.
pub fn two_sided_modulus(x: &Path, delta: f64, window_end: f64) -> Result<f64> {
    check_delta(delta)?;
    if delta >= x.horizon() {
        return domain(format!("δ = {delta} must lie below the horizon {}", x.horizon()));
    }
    two_sided_modulus_on(x, delta, window_end)
}

/// Same as [`two_sided_modulus`] without the `δ < T` precondition, for
/// windowed probes where `δ` may exceed the window.
pub fn two_sided_modulus_on(x: &Path, delta: f64, window_end: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(window_end >= 0.0 && window_end <= x.horizon()) || !window_end.is_finite() {
        return domain(format!("window end {window_end} outside [0, {}]", x.horizon()));
    }
    match x {
        Path::Step(p) => Ok(step_two_sided(p, delta, window_end)),
        _ => domain("two-sided modulus is implemented for step paths"),
    }
}

fn step_two_sided(p: &StepPath, delta: f64, window_end: f64) -> f64 {
    let k = p.knots();
    let v = p.values();
    // Intervals whose left end lies in the window.
    let n = k.partition_point(|&t| t <= window_end);
    let mut best: f64 = 0.0;
    let mut prefix = Vec::with_capacity(n);
    // Triplets of intervals i < mid < j are admissible iff k[j] - k[i+1] < δ.
    for mid in 1..n.saturating_sub(1) {
        prefix.clear();
        let mut running: f64 = 0.0;
        let mut j = mid + 1;
        while j < n && k[j] - k[mid] < delta {
            running = running.max((v[j] - v[mid]).abs());
            prefix.push(running);
            j += 1;
        }
        if prefix.is_empty() {
            continue;
        }
        // Walking i downwards shrinks the admissible j range.
        let mut reach = prefix.len();
        for i in (0..mid).rev() {
            while reach > 0 && !(k[mid + reach] - k[i + 1] < delta) {
                reach -= 1;
            }
            if reach == 0 {
                break;
            }
            let left = (v[mid] - v[i]).abs();
            best = best.max(left.min(prefix[reach - 1]));
        }
    }
    best
}

/// `(|x(δ) - x(0)|, |x(pen) - x(T - δ)|, sup_t |x(t)|)` where `pen` is the
/// penultimate knot of the representation (the penultimate grid point for
/// interpolants).
pub fn endpoint_statistics(x: &Path, delta: f64) -> Result<(f64, f64, f64)> {
    check_delta(delta)?;
    let horizon = x.horizon();
    if !horizon.is_finite() {
        return domain("endpoint statistics need a finite horizon; restrict first");
    }
    if delta >= horizon {
        return domain(format!("δ = {delta} must lie below the horizon {horizon}"));
    }
    let knots = x.knots();
    let penultimate = if knots.len() >= 2 {
        let last = knots.len() - 1;
        if knots[last] == horizon {
            knots[last - 1]
        } else {
            knots[last]
        }
    } else {
        knots[0]
    };
    let start = (x.eval(delta)? - x.eval(0.0)?).abs();
    let end = (x.eval(penultimate)? - x.eval(horizon - delta)?).abs();
    Ok((start, end, sup_abs(x)?))
}

pub fn sup_abs(x: &Path) -> Result<f64> {
    match x {
        Path::Step(p) => Ok(p.sup_abs()),
        Path::Linear(p) => Ok(p.sup_abs()),
        Path::Tapered(_) => domain("sup statistic is not implemented for tapered paths"),
    }
}

/// `sup_{t in [0, window_end]} |x(t)|`.
pub fn sup_abs_on(x: &Path, window_end: f64) -> Result<f64> {
    if !(window_end >= 0.0 && window_end <= x.horizon()) {
        return domain(format!("window end {window_end} outside [0, {}]", x.horizon()));
    }
    match x {
        Path::Step(p) => {
            let n = p.knots().partition_point(|&t| t <= window_end);
            Ok(p.values()[..n].iter().fold(0.0, |m, v| m.max(v.abs())))
        }
        Path::Linear(p) => {
            let n = p.knots().partition_point(|&t| t < window_end);
            let inner = p.values()[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(inner.max(p.eval_unchecked(window_end).abs()))
        }
        Path::Tapered(_) => domain("sup statistic is not implemented for tapered paths"),
    }
}

/// Modified modulus `w'(x, δ)`: the infimum over partitions with all cells
/// longer than `δ` of the largest oscillation on a half-open cell.
///
/// Exact for step paths. For piecewise-linear paths the partition points are
/// restricted to a lattice of pitch `resolution`.
pub fn sparse_modulus_w_prime(x: &Path, delta: f64, resolution: f64) -> Result<f64> {
    check_delta(delta)?;
    let horizon = x.horizon();
    if !horizon.is_finite() {
        return domain("w' needs a finite horizon");
    }
    if delta >= horizon {
        return domain(format!("δ = {delta} must lie in (0, {horizon})"));
    }
    match x {
        Path::Step(p) => Ok(step_w_prime(p, delta)),
        Path::Linear(p) => {
            if !(resolution > 0.0) {
                return domain(format!("resolution must be positive, got {resolution}"));
            }
            Ok(pl_w_prime(p, delta, resolution))
        }
        Path::Tapered(_) => domain("w' is not implemented for tapered paths"),
    }
}

fn step_w_prime(p: &StepPath, delta: f64) -> f64 {
    let horizon = p.horizon();
    let mut k = p.knots().to_vec();
    let mut v = p.values().to_vec();
    // Cells are right-open, so a jump exactly at the horizon is never seen.
    if k.len() > 1 && *k.last().unwrap() == horizon {
        k.pop();
        v.pop();
    }
    let n = k.len();
    let mut candidates = vec![0.0];
    for a in 0..n {
        let (mut lo, mut hi) = (v[a], v[a]);
        for &vb in &v[a + 1..] {
            lo = lo.min(vb);
            hi = hi.max(vb);
            candidates.push(hi - lo);
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let right_end = |b: usize| if b + 1 < n { k[b + 1] } else { horizon };
    let feasible = |theta: f64| -> bool {
        // reach[a]: smallest reachable cell start inside interval a.
        let mut reach = vec![f64::INFINITY; n];
        reach[0] = 0.0;
        for a in 0..n {
            let p0 = reach[a];
            if !p0.is_finite() {
                continue;
            }
            let (mut lo, mut hi) = (v[a], v[a]);
            let mut last = a;
            while last + 1 < n {
                let nv = v[last + 1];
                if nv.max(hi) - nv.min(lo) > theta {
                    break;
                }
                lo = lo.min(nv);
                hi = hi.max(nv);
                last += 1;
            }
            let cell_end_cap = right_end(last);
            if last + 1 == n && horizon - p0 > delta {
                return true;
            }
            let upto = (last + 1).min(n - 1);
            for b in a + 1..=upto {
                if k[b] > p0 + delta {
                    reach[b] = reach[b].min(k[b]);
                } else if p0 + delta < right_end(b) && p0 + delta < cell_end_cap {
                    reach[b] = reach[b].min(p0 + delta);
                }
            }
        }
        false
    };

    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

fn pl_w_prime(p: &PlPath, delta: f64, resolution: f64) -> f64 {
    let horizon = p.horizon();
    let cells = (horizon / resolution).ceil().max(1.0) as usize;
    let at = |i: usize| i as f64 * horizon / cells as f64;
    let lattice: Vec<f64> = (0..=cells).map(|i| p.eval_unchecked(at(i).min(horizon))).collect();
    // Extremes of knots strictly inside each lattice cell.
    let mut inner = vec![(f64::INFINITY, f64::NEG_INFINITY); cells];
    for (&t, &val) in p.knots().iter().zip(p.values()) {
        let c = ((t / horizon) * cells as f64).floor() as usize;
        if c < cells && t > at(c) {
            inner[c].0 = inner[c].0.min(val);
            inner[c].1 = inner[c].1.max(val);
        }
    }
    let mut best = vec![f64::INFINITY; cells + 1];
    best[0] = 0.0;
    for j in 1..=cells {
        let (mut lo, mut hi) = (lattice[j], lattice[j]);
        for i in (0..j).rev() {
            lo = lo.min(lattice[i]).min(inner[i].0);
            hi = hi.max(lattice[i]).max(inner[i].1);
            if (j - i) as f64 * horizon / cells as f64 > delta && best[i].is_finite() {
                best[j] = best[j].min(best[i].max(hi - lo));
            }
        }
    }
    best[cells]
}
