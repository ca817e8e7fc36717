//! Skorokhod J1 distance between step paths.
//!
//! A reparametrization only moves the jump times of `y`. Walking forward in
//! time, the pair (current interval of `x`, current interval of `y∘λ`) traces
//! a monotone lattice path from `(0, 0)` to `(p, q)`: a diagonal step is a
//! `y` jump sent exactly onto an `x` jump, a vertical step is a `y` jump
//! placed strictly inside an `x` interval, a horizontal step is an `x` jump
//! with `y∘λ` flat. For a fixed lattice path the infimum over λ is
//!
//! ```text
//! max( max |x_i - y_j| over visited (i, j),
//!      max |a_i - b_j| over diagonal steps,
//!      max dist(b_j, [L_i, R_i]) over vertical steps )
//! ```
//!
//! so `d_T` is a bottleneck shortest path on the `(p+1) × (q+1)` lattice.

use crate::error::{domain, Result};
use crate::metrics::MetricReport;
use crate::paths::{Reparametrization, StepPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Start,
    Diagonal,
    Vertical,
    Horizontal,
}

struct Lattice {
    horizon: f64,
    xv: Vec<f64>,
    yv: Vec<f64>,
    /// Jump times of x and y.
    xa: Vec<f64>,
    yb: Vec<f64>,
}

impl Lattice {
    fn new(x: &StepPath, y: &StepPath, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return domain(format!("tolerance must be positive, got {tol}"));
        }
        if x.horizon() != y.horizon() || !x.horizon().is_finite() {
            return domain(format!(
                "Skorokhod distance needs equal finite horizons, got {} and {}",
                x.horizon(),
                y.horizon()
            ));
        }
        let (x, y) = (x.normalize(), y.normalize());
        Ok(Self {
            horizon: x.horizon(),
            xa: x.jump_times().to_vec(),
            yb: y.jump_times().to_vec(),
            xv: x.values().to_vec(),
            yv: y.values().to_vec(),
        })
    }

    fn p(&self) -> usize {
        self.xa.len()
    }

    fn q(&self) -> usize {
        self.yb.len()
    }

    fn interval(&self, i: usize) -> (f64, f64) {
        let left = if i == 0 { 0.0 } else { self.xa[i - 1] };
        let right = if i < self.p() { self.xa[i] } else { self.horizon };
        (left, right)
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        (self.xv[i] - self.yv[j]).abs()
    }

    /// Cost of sending y-jump `j - 1` onto x-jump `i - 1`.
    fn diagonal(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = (self.xa[i - 1], self.yb[j - 1]);
        // λ(T) = T pins jumps at the horizon to each other.
        if (a == self.horizon) != (b == self.horizon) {
            return None;
        }
        Some((a - b).abs())
    }

    /// Cost of placing y-jump `j - 1` strictly inside x-interval `i`.
    fn vertical(&self, i: usize, j: usize) -> Option<f64> {
        let b = self.yb[j - 1];
        let (left, right) = self.interval(i);
        if left >= right {
            return None;
        }
        if b == self.horizon {
            return (right == self.horizon).then_some(0.0);
        }
        Some(if b < left {
            left - b
        } else if b > right {
            b - right
        } else {
            0.0
        })
    }

    /// Bottleneck DP over nodes whose value cost is at most `node_cap`.
    /// Returns the optimal bottleneck table (∞ where unreachable).
    fn bottleneck(&self, node_cap: f64, include_nodes: bool) -> Vec<Vec<f64>> {
        let (p, q) = (self.p(), self.q());
        let mut best = vec![vec![f64::INFINITY; q + 1]; p + 1];
        for i in 0..=p {
            for j in 0..=q {
                let nc = self.node(i, j);
                if nc > node_cap {
                    continue;
                }
                let own = if include_nodes { nc } else { 0.0 };
                let mut incoming = if i == 0 && j == 0 { 0.0 } else { f64::INFINITY };
                if i > 0 && j > 0 {
                    if let Some(c) = self.diagonal(i, j) {
                        incoming = incoming.min(best[i - 1][j - 1].max(c));
                    }
                }
                if j > 0 {
                    if let Some(c) = self.vertical(i, j) {
                        incoming = incoming.min(best[i][j - 1].max(c));
                    }
                }
                if i > 0 {
                    incoming = incoming.min(best[i - 1][j]);
                }
                best[i][j] = incoming.max(own);
            }
        }
        best
    }

    /// Among lattice paths with every node within `node_cap` and every edge
    /// within `edge_cap`, one with the fewest diagonal moves. Ties after the
    /// match count are broken by a fixed predecessor order
    /// (horizontal, vertical, diagonal) while tracing back from `(p, q)`.
    fn fewest_matches(&self, node_cap: f64, edge_cap: f64) -> Option<Vec<(usize, usize, Move)>> {
        let (p, q) = (self.p(), self.q());
        let mut count = vec![vec![usize::MAX; q + 1]; p + 1];
        let ok_edge = |c: Option<f64>| c.is_some_and(|c| c <= edge_cap);
        for i in 0..=p {
            for j in 0..=q {
                if self.node(i, j) > node_cap {
                    continue;
                }
                let mut c = if i == 0 && j == 0 { 0 } else { usize::MAX };
                if i > 0 && j > 0 && ok_edge(self.diagonal(i, j)) && count[i - 1][j - 1] != usize::MAX {
                    c = c.min(count[i - 1][j - 1] + 1);
                }
                if j > 0 && ok_edge(self.vertical(i, j)) {
                    c = c.min(count[i][j - 1]);
                }
                if i > 0 {
                    c = c.min(count[i - 1][j]);
                }
                count[i][j] = c;
            }
        }
        if count[p][q] == usize::MAX {
            return None;
        }
        let mut steps = Vec::new();
        let (mut i, mut j) = (p, q);
        while i > 0 || j > 0 {
            let here = count[i][j];
            let mv = if i > 0 && count[i - 1][j] == here {
                Move::Horizontal
            } else if j > 0 && ok_edge(self.vertical(i, j)) && count[i][j - 1] == here {
                Move::Vertical
            } else {
                Move::Diagonal
            };
            steps.push((i, j, mv));
            match mv {
                Move::Horizontal => i -= 1,
                Move::Vertical => j -= 1,
                Move::Diagonal => {
                    i -= 1;
                    j -= 1;
                }
                Move::Start => unreachable!(),
            }
        }
        steps.push((0, 0, Move::Start));
        steps.reverse();
        Some(steps)
    }

    fn path_value_cost(&self, steps: &[(usize, usize, Move)]) -> f64 {
        steps.iter().fold(0.0, |m, &(i, j, _)| m.max(self.node(i, j)))
    }

    /// Place every y jump according to the lattice path. Matched jumps are
    /// pinned; placed jumps go to `place(j, interval, pins)`.
    fn reparam_from(
        &self,
        steps: &[(usize, usize, Move)],
        linear_between_pins: bool,
    ) -> Option<Reparametrization> {
        let q = self.q();
        let mut pinned: Vec<Option<f64>> = vec![None; q];
        let mut placed_in: Vec<usize> = vec![0; q];
        for &(i, j, mv) in steps {
            match mv {
                Move::Diagonal => pinned[j - 1] = Some(self.xa[i - 1]),
                Move::Vertical => placed_in[j - 1] = i,
                _ => {}
            }
        }
        let mut c = vec![0.0; q];
        for j in 0..q {
            if let Some(a) = pinned[j] {
                c[j] = a;
                continue;
            }
            let b = self.yb[j];
            if b == self.horizon {
                c[j] = b;
                continue;
            }
            let (left, right) = self.interval(placed_in[j]);
            let target = if linear_between_pins {
                // Interpolate between the surrounding pins (or the endpoints).
                let (mut s0, mut u0) = (0.0, 0.0);
                let (mut s1, mut u1) = (self.horizon, self.horizon);
                for k in (0..j).rev() {
                    if let Some(a) = pinned[k] {
                        (s0, u0) = (a, self.yb[k]);
                        break;
                    }
                }
                for k in j + 1..q {
                    if let Some(a) = pinned[k] {
                        (s1, u1) = (a, self.yb[k]);
                        break;
                    }
                }
                s0 + (b - u0) * (s1 - s0) / (u1 - u0)
            } else {
                b
            };
            let margin = (right - left) * 1e-9;
            c[j] = target.clamp(left + margin, right - margin);
        }
        // Restore strict monotonicity lost to clamping ties.
        for j in 1..q {
            if c[j] <= c[j - 1] {
                let bump = (self.horizon * 1e-12).max(f64::EPSILON * c[j - 1].abs() * 4.0);
                c[j] = c[j - 1] + bump;
            }
        }
        let pairs: Vec<(f64, f64)> = c
            .iter()
            .zip(&self.yb)
            .filter(|(&s, _)| s < self.horizon)
            .map(|(&s, &u)| (s, u))
            .collect();
        Reparametrization::through(self.horizon, &pairs).ok()
    }
}

/// Skorokhod J1 distance `d_T` between two step paths, computed exactly by a
/// bottleneck DP over jump alignments. The witness realises the optimum up to
/// an infinitesimal separation of tied jump times.
pub fn skorokhod_distance(x: &StepPath, y: &StepPath, tol: f64) -> Result<MetricReport> {
    let lattice = Lattice::new(x, y, tol)?;
    let (p, q) = (lattice.p(), lattice.q());
    let value = lattice.bottleneck(f64::INFINITY, true)[p][q];
    let witness = lattice
        .fewest_matches(value, value)
        .and_then(|steps| lattice.reparam_from(&steps, false));
    Ok(MetricReport {
        value,
        witness,
        lower_bound: value,
        upper_bound: value,
    })
}

/// Bounds on the complete Skorokhod metric `d°_T`.
///
/// The upper bound is the best `‖λ‖° ∨ sup |x - y∘λ|` over one candidate λ per
/// value threshold (the time-optimal alignment under that threshold, with
/// unmatched jumps placed linearly between matched ones). The lower bound
/// follows from `d_T <= max(d°, T(e^{d°} - 1))`.
pub fn skorokhod_circ_distance(x: &StepPath, y: &StepPath, tol: f64) -> Result<MetricReport> {
    let lattice = Lattice::new(x, y, tol)?;
    let (p, q) = (lattice.p(), lattice.q());
    let d = lattice.bottleneck(f64::INFINITY, true)[p][q];
    let horizon = lattice.horizon;
    let lower = d.min((d / horizon).ln_1p());

    let mut thresholds: Vec<f64> = (0..=p)
        .flat_map(|i| (0..=q).map(move |j| (i, j)))
        .map(|(i, j)| lattice.node(i, j))
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut upper = f64::INFINITY;
    let mut witness = None;
    for &theta in &thresholds {
        if theta >= upper {
            break;
        }
        let time_cost = lattice.bottleneck(theta, false)[p][q];
        if !time_cost.is_finite() {
            continue;
        }
        let Some(steps) = lattice.fewest_matches(theta, time_cost) else {
            continue;
        };
        for linear in [true, false] {
            if let Some(lambda) = lattice.reparam_from(&steps, linear) {
                let candidate = lambda.log_slope_norm().max(lattice.path_value_cost(&steps));
                if candidate < upper {
                    upper = candidate;
                    witness = Some(lambda);
                }
            }
        }
    }
    Ok(MetricReport {
        value: upper,
        witness,
        lower_bound: lower.min(upper),
        upper_bound: upper,
    })
}
