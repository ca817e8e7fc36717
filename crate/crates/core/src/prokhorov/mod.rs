//! Prokhorov distance between finitely supported measures.
//!
//! By Strassen's theorem `ρ(μ, ν) ≤ ε` iff some coupling puts mass at most ε
//! on pairs further apart than ε, i.e. iff the maximum flow through the
//! bipartite graph of atom pairs within distance ε is at least `1 - ε`.
//! That flow `F(ε)` is a step function jumping only at pairwise distances, so
//! on each plateau `[d_k, d_{k+1})` the smallest feasible ε is
//! `max(d_k, 1 - F(d_k))`, and the distance is the smallest such value
//! (capped at 1, where every pair of measures is feasible).

mod maxflow;
mod measure;

pub use measure::{DiscreteMeasure, Norm};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use maxflow::Dinic;

/// Above this many atom pairs the critical set is not materialised and the
/// threshold is found by bisection on ε instead.
const EXPLICIT_PAIRS: usize = 200_000;
const FLOAT_SLACK: f64 = 1e-12;
const CERT_TOL: f64 = 1e-10;

/// A coupling witnessing `ρ(μ, ν) ≤ epsilon`: sparse `(i, j, mass)` entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingCertificate {
    pub flow: Vec<(usize, usize, f64)>,
    pub epsilon: f64,
}

impl CouplingCertificate {
    /// Dense `|μ| x |ν|` matrix of transported masses.
    pub fn dense(&self, rows: usize, cols: usize) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; cols]; rows];
        for &(i, j, w) in &self.flow {
            m[i][j] += w;
        }
        m
    }

    /// Re-check the certificate against the measures, independently of the
    /// solver: marginals match and mass on far pairs is at most ε.
    pub fn verify(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, norm: Norm) -> Result<()> {
        let mut rows = vec![0.0; mu.len()];
        let mut cols = vec![0.0; nu.len()];
        let mut far = 0.0;
        for &(i, j, w) in &self.flow {
            if i >= mu.len() || j >= nu.len() || w < 0.0 {
                return domain(format!("invalid certificate entry ({i}, {j}, {w})"));
            }
            rows[i] += w;
            cols[j] += w;
            if norm.distance(mu.atom(i), nu.atom(j)) > self.epsilon {
                far += w;
            }
        }
        for (got, want) in rows.iter().zip(mu.weights()).chain(cols.iter().zip(nu.weights())) {
            if (got - want).abs() > CERT_TOL {
                return domain(format!("certificate marginal {got} differs from weight {want}"));
            }
        }
        if far > self.epsilon + CERT_TOL {
            return domain(format!("certificate moves {far} beyond epsilon {}", self.epsilon));
        }
        Ok(())
    }
}

/// Weights scaled to integers when every weight is dyadic, so flows are exact.
fn dyadic_scale(weights: &[&[f64]]) -> Option<f64> {
    let mut k = 0;
    for &w in weights.iter().flat_map(|ws| ws.iter()) {
        let mut kw = 0;
        let mut x = w;
        while x.fract() != 0.0 {
            x *= 2.0;
            kw += 1;
            if kw > 52 {
                return None;
            }
        }
        k = k.max(kw);
    }
    Some((2.0f64).powi(k))
}

/// A transport problem between two weighted atom sets. Weights may be zero,
/// which lets bootstrap resamples reuse the same atoms.
pub(crate) struct Transport<'a> {
    mu: &'a DiscreteMeasure,
    nu: &'a DiscreteMeasure,
    wmu: &'a [f64],
    wnu: &'a [f64],
    norm: Norm,
    scale: Option<f64>,
    /// ν atoms sorted by the key coordinate, for windowed neighbour search.
    key: usize,
    order: Vec<usize>,
}

struct Flow {
    mass: f64,
    plan: Vec<(usize, usize, f64)>,
    /// Largest distance among the edges present.
    reach: f64,
}

impl<'a> Transport<'a> {
    pub fn new(
        mu: &'a DiscreteMeasure,
        wmu: &'a [f64],
        nu: &'a DiscreteMeasure,
        wnu: &'a [f64],
        norm: Norm,
    ) -> Self {
        let dim = mu.dim();
        let spread = |c: usize| {
            let (lo, hi) = nu
                .atoms()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a[c]), hi.max(a[c])));
            hi - lo
        };
        let key = (0..dim).max_by(|&a, &b| spread(a).total_cmp(&spread(b))).unwrap_or(0);
        let mut order: Vec<usize> = (0..nu.len()).collect();
        order.sort_by(|&a, &b| nu.atom(a)[key].total_cmp(&nu.atom(b)[key]));
        Self {
            mu,
            nu,
            wmu,
            wnu,
            norm,
            scale: dyadic_scale(&[wmu, wnu]),
            key,
            order,
        }
    }

    /// Unmatched mass; float rounding below the slack counts as none.
    fn deficit(&self, mass: f64) -> f64 {
        let d = 1.0 - mass;
        match self.scale {
            None if d <= FLOAT_SLACK => 0.0,
            _ => d.max(0.0),
        }
    }

    fn feasible(&self, eps: f64, mass: f64) -> bool {
        match self.scale {
            Some(_) => mass >= 1.0 - eps,
            None => mass >= 1.0 - eps - FLOAT_SLACK,
        }
    }

    fn edges(&self, eps: f64) -> (Vec<(usize, usize)>, f64) {
        let mut edges = Vec::new();
        let mut reach: f64 = 0.0;
        for i in 0..self.mu.len() {
            if self.wmu[i] == 0.0 {
                continue;
            }
            let a = self.mu.atom(i);
            // Compare differences, not shifted bounds: `a - eps` can round
            // past an atom at distance exactly `eps`.
            let k = a[self.key];
            let start = self.order.partition_point(|&j| {
                let b = self.nu.atom(j)[self.key];
                b < k && k - b > eps
            });
            for &j in &self.order[start..] {
                let b = self.nu.atom(j);
                if b[self.key] > k && b[self.key] - k > eps {
                    break;
                }
                if self.wnu[j] != 0.0 && self.norm.within(a, b, eps) {
                    reach = reach.max(self.norm.distance(a, b));
                    edges.push((i, j));
                }
            }
        }
        (edges, reach)
    }

    /// Greedy matching on the line: with both sides sorted, each μ atom's
    /// neighbourhood is an interval whose endpoints move monotonically, and
    /// serving the leftmost available ν mass first is optimal.
    fn greedy_line(&self, eps: f64, want_plan: bool) -> Flow {
        let mut rem: Vec<f64> = self.wnu.to_vec();
        let mut plan = Vec::new();
        let mut mass = 0.0;
        let mut reach: f64 = 0.0;
        let mut start = 0;
        let n = self.nu.len();
        for i in 0..self.mu.len() {
            let x = self.mu.atom(i)[0];
            let mut supply = self.wmu[i];
            while start < n && ((self.nu.atom(start)[0] < x && x - self.nu.atom(start)[0] > eps) || rem[start] == 0.0) {
                start += 1;
            }
            let mut j = start;
            while supply > 0.0 && j < n && (self.nu.atom(j)[0] <= x || self.nu.atom(j)[0] - x <= eps) {
                let take = supply.min(rem[j]);
                if take > 0.0 {
                    supply -= take;
                    rem[j] -= take;
                    mass += take;
                    reach = reach.max((self.nu.atom(j)[0] - x).abs());
                    if want_plan {
                        plan.push((i, j, take));
                    }
                }
                j += 1;
            }
        }
        Flow { mass, plan, reach }
    }

    /// Maximum flow at `eps`; with `enough` set, the returned mass is only
    /// exact when it falls short of `enough`.
    fn flow(&self, eps: f64, want_plan: bool, enough: Option<f64>) -> Flow {
        if self.mu.dim() == 1 {
            return self.greedy_line(eps, want_plan);
        }
        let (edges, reach) = self.edges(eps);
        let (mass, plan) = match self.scale {
            Some(sc) => {
                let to_int = |w: &[f64]| w.iter().map(|&x| (x * sc) as i64).collect::<Vec<_>>();
                let (mass, plan) = route(&to_int(self.wmu), &to_int(self.wnu), &edges, i64::MAX, None, want_plan);
                let plan = plan.into_iter().map(|(i, j, f)| (i, j, f as f64 / sc)).collect();
                (mass as f64 / sc, plan)
            }
            None => route(self.wmu, self.wnu, &edges, f64::INFINITY, enough, want_plan),
        };
        Flow { mass, plan, reach }
    }

    /// Complete a partial plan to a full coupling by pairing leftover masses
    /// in order (north-west corner rule).
    fn complete(&self, mut plan: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
        let mut left: Vec<f64> = self.wmu.to_vec();
        let mut right: Vec<f64> = self.wnu.to_vec();
        for &(i, j, f) in &plan {
            left[i] -= f;
            right[j] -= f;
        }
        let (mut i, mut j) = (0, 0);
        while i < left.len() && j < right.len() {
            if left[i] <= CERT_TOL * 1e-3 {
                i += 1;
                continue;
            }
            if right[j] <= CERT_TOL * 1e-3 {
                j += 1;
                continue;
            }
            let f = left[i].min(right[j]);
            plan.push((i, j, f));
            left[i] -= f;
            right[j] -= f;
        }
        plan
    }

    fn pair_count(&self) -> usize {
        self.mu.len().saturating_mul(self.nu.len())
    }

    /// Returns `(ρ, ε-plateau flow)`; the plan is only built when asked.
    fn solve(&self, want_plan: bool) -> (f64, Vec<(usize, usize, f64)>) {
        if self.mu.dim() == 1 || self.pair_count() > EXPLICIT_PAIRS {
            self.solve_bisection(want_plan, 1e-13)
        } else {
            self.solve_critical(want_plan)
        }
    }

    fn solve_critical(&self, want_plan: bool) -> (f64, Vec<(usize, usize, f64)>) {
        let mut d: Vec<f64> = Vec::with_capacity(self.pair_count());
        for i in 0..self.mu.len() {
            for j in 0..self.nu.len() {
                let v = self.norm.distance(self.mu.atom(i), self.nu.atom(j));
                if v <= 1.0 {
                    d.push(v);
                }
            }
        }
        d.sort_by(f64::total_cmp);
        d.dedup();

        // The first plateau whose left end already covers the deficit.
        let mut masses = vec![None; d.len()];
        let mut mass_at = |k: usize, this: &Self| -> f64 {
            *masses[k].get_or_insert_with(|| this.flow(d[k], false, None).mass)
        };
        let (mut lo, mut hi) = (0, d.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if d[mid] >= self.deficit(mass_at(mid, self)) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut best = (1.0, 1.0);
        if lo < d.len() && d[lo] < best.0 {
            best = (d[lo], d[lo]);
        }
        if lo > 0 {
            let deficit = self.deficit(mass_at(lo - 1, self));
            if deficit < best.0 {
                best = (deficit, d[lo - 1]);
            }
        }
        let plan = if want_plan {
            self.flow(best.1, true, None).plan
        } else {
            Vec::new()
        };
        (best.0, plan)
    }

    fn solve_bisection(&self, want_plan: bool, tol: f64) -> (f64, Vec<(usize, usize, f64)>) {
        if want_plan {
            let zero = self.flow(0.0, true, None);
            if self.feasible(0.0, zero.mass) {
                return (0.0, zero.plan);
            }
        }
        let hi = smallest_feasible(tol, |eps| self.feasible(eps, self.flow(eps, false, Some(1.0 - eps)).mass));
        if hi == 0.0 {
            return (0.0, Vec::new());
        }
        // Snap to the plateau: the flow at `hi` is already available from its
        // furthest edge, and no smaller ε on that plateau covers the deficit.
        let at = self.flow(hi, want_plan, None);
        let rho = at.reach.max(self.deficit(at.mass)).min(hi);
        (rho.max(0.0), at.plan)
    }
}

/// Smallest `ε ∈ [0, 1]` with `ok(ε)`, to within `tol`, for monotone `ok`
/// with `ok(1)`. Gallops up from small ε first: neighbour graphs grow with ε,
/// so probes far above the answer are the expensive ones.
pub(crate) fn smallest_feasible(tol: f64, mut ok: impl FnMut(f64) -> bool) -> f64 {
    if ok(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, (1.0f64 / 1024.0).max(tol));
    while hi < 1.0 && !ok(hi) {
        lo = hi;
        hi = (2.0 * hi).min(1.0);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return domain(format!("dimension mismatch: {} vs {}", mu.dim(), nu.dim()));
    }
    Ok(())
}

/// Exact Prokhorov distance with a coupling certificate.
pub fn prokhorov_distance(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    norm: Norm,
) -> Result<(f64, CouplingCertificate)> {
    check_pair(mu, nu)?;
    let tr = Transport::new(mu, mu.weights(), nu, nu.weights(), norm);
    let (rho, plan) = tr.solve(true);
    let cert = CouplingCertificate {
        flow: tr.complete(plan),
        epsilon: rho,
    };
    Ok((rho, cert))
}

/// Distance only, skipping certificate construction.
pub fn prokhorov_rho(mu: &DiscreteMeasure, nu: &DiscreteMeasure, norm: Norm) -> Result<f64> {
    check_pair(mu, nu)?;
    Ok(Transport::new(mu, mu.weights(), nu, nu.weights(), norm).solve(false).0)
}

/// Distance between reweightings of two atom sets (weights may be zero and
/// must each sum to 1). `tol` is the bisection resolution for large inputs.
pub(crate) fn rho_reweighted(
    mu: &DiscreteMeasure,
    wmu: &[f64],
    nu: &DiscreteMeasure,
    wnu: &[f64],
    norm: Norm,
    tol: f64,
) -> f64 {
    let tr = Transport::new(mu, wmu, nu, wnu, norm);
    if mu.dim() == 1 || tr.pair_count() > EXPLICIT_PAIRS {
        tr.solve_bisection(false, tol).0
    } else {
        tr.solve_critical(false).0
    }
}

/// The ε-neighbour graph of two atom sets, built once and reused for any
/// reweighting of them.
pub(crate) struct NeighbourGraph<'a> {
    mu: &'a DiscreteMeasure,
    nu: &'a DiscreteMeasure,
    norm: Norm,
    eps: f64,
    edges: Option<Vec<(usize, usize)>>,
}

impl<'a> NeighbourGraph<'a> {
    pub fn new(mu: &'a DiscreteMeasure, nu: &'a DiscreteMeasure, norm: Norm, eps: f64) -> Self {
        let dense_mu = vec![1.0; mu.len()];
        let dense_nu = vec![1.0; nu.len()];
        let all = Transport::new(mu, &dense_mu, nu, &dense_nu, norm);
        let edges = (mu.dim() != 1).then(|| all.edges(eps).0);
        Self { mu, nu, norm, eps, edges }
    }

    /// Whether `ρ ≤ eps` under weights `wm`, `wn`.
    pub fn feasible(&self, wm: &[f64], wn: &[f64]) -> bool {
        let tr = Transport::new(self.mu, wm, self.nu, wn, self.norm);
        let mass = match &self.edges {
            None => tr.greedy_line(self.eps, false).mass,
            Some(edges) => flow_on_edges(&tr, edges, 1.0 - self.eps),
        };
        tr.feasible(self.eps, mass)
    }
}

/// Whether `ρ ≤ eps` for each of several reweightings of the same atom sets.
pub(crate) fn feasible_reweighted(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    norm: Norm,
    eps: f64,
    weights: &[(Vec<f64>, Vec<f64>)],
) -> Vec<bool> {
    let g = NeighbourGraph::new(mu, nu, norm, eps);
    weights.iter().map(|(wm, wn)| g.feasible(wm, wn)).collect()
}

fn flow_on_edges(tr: &Transport<'_>, edges: &[(usize, usize)], enough: f64) -> f64 {
    route(tr.wmu, tr.wnu, edges, f64::INFINITY, Some(enough), false).0
}

/// Max flow through the bipartite network `source → μ atoms → ν atoms →
/// sink`, seeded with a greedy pass over `edges` so that augmenting paths
/// only repair what the greedy left over.
fn route<C: maxflow::Capacity>(
    cmu: &[C],
    cnu: &[C],
    edges: &[(usize, usize)],
    infinite: C,
    enough: Option<C>,
    want_plan: bool,
) -> (C, Vec<(usize, usize, C)>) {
    let (n, m) = (cmu.len(), cnu.len());
    let (s, t) = (n + m, n + m + 1);
    let mut g = Dinic::<C>::new(n + m + 2);
    let src: Vec<usize> = cmu.iter().enumerate().map(|(i, &c)| g.add_edge(s, i, c)).collect();
    let snk: Vec<usize> = cnu.iter().enumerate().map(|(j, &c)| g.add_edge(n + j, t, c)).collect();
    let arcs: Vec<(usize, usize, usize)> = edges
        .iter()
        .filter(|&&(i, j)| cmu[i].usable() && cnu[j].usable())
        .map(|&(i, j)| (i, j, g.add_edge(i, n + j, cmu[i])))
        .collect();
    let mut total = C::ZERO;
    for &(i, j, id) in &arcs {
        let (a, b) = (g.residual(src[i]), g.residual(snk[j]));
        let f = if a < b { a } else { b };
        if f.usable() {
            g.push(src[i], f);
            g.push(id, f);
            g.push(snk[j], f);
            total = total + f;
        }
    }
    if enough.is_none_or(|e| total < e) {
        total = total + g.max_flow_until(s, t, infinite, enough.map(|e| e - total));
    }
    let plan = if want_plan {
        arcs.iter()
            .filter_map(|&(i, j, id)| {
                let f = g.flow_on(id);
                f.usable().then_some((i, j, f))
            })
            .collect()
    } else {
        Vec::new()
    };
    (total, plan)
}

/// Pushforward under a coordinate projection (0-based coordinates).
pub fn project_marginal(mu: &DiscreteMeasure, coords: &[usize]) -> Result<DiscreteMeasure> {
    mu.project(coords)
}

/// Largest union support the exhaustive oracle accepts.
pub const ORACLE_MAX_SUPPORT: usize = 14;

/// Ground truth by brute force: the defining two-sided inequality checked on
/// every subset of the union support, at every candidate ε.
pub fn prokhorov_oracle(mu: &DiscreteMeasure, nu: &DiscreteMeasure, norm: Norm) -> Result<f64> {
    check_pair(mu, nu)?;
    let mut union: Vec<Vec<f64>> = Vec::new();
    let mut wm = Vec::new();
    let mut wn = Vec::new();
    for (m, is_mu) in [(mu, true), (nu, false)] {
        for (i, a) in m.atoms().enumerate() {
            let k = match union.iter().position(|u| u.as_slice() == a) {
                Some(k) => k,
                None => {
                    union.push(a.to_vec());
                    wm.push(0.0);
                    wn.push(0.0);
                    union.len() - 1
                }
            };
            if is_mu {
                wm[k] += m.weights()[i];
            } else {
                wn[k] += m.weights()[i];
            }
        }
    }
    let u = union.len();
    if mu.len() + nu.len() > ORACLE_MAX_SUPPORT {
        return Err(Error::TooLarge(format!(
            "{} + {} atoms exceeds {ORACLE_MAX_SUPPORT}",
            mu.len(),
            nu.len()
        )));
    }
    let full = 1usize << u;
    let subset_sums = |w: &[f64]| {
        let mut s = vec![0.0; full];
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            s[mask] = s[mask & (mask - 1)] + w[low];
        }
        s
    };
    let mass_mu = subset_sums(&wm);
    let mass_nu = subset_sums(&wn);

    let mut candidates = vec![0.0];
    for a in 0..u {
        for b in a + 1..u {
            candidates.push(norm.distance(&union[a], &union[b]));
        }
    }
    candidates.retain(|&e| e <= 1.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best: f64 = 1.0;
    let mut enlarged = vec![0usize; full];
    for &eps in &candidates {
        let ball: Vec<usize> = (0..u)
            .map(|a| (0..u).filter(|&b| norm.distance(&union[a], &union[b]) <= eps).fold(0, |m, b| m | 1 << b))
            .collect();
        let mut deficit: f64 = 0.0;
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            enlarged[mask] = enlarged[mask & (mask - 1)] | ball[low];
            let e = enlarged[mask];
            deficit = deficit.max(mass_mu[mask] - mass_nu[e]).max(mass_nu[mask] - mass_mu[e]);
        }
        // The inequality holds for every ε on this plateau at or above the
        // deficit, so the plateau contributes max(eps, deficit).
        best = best.min(eps.max(deficit));
    }
    Ok(best)
}
