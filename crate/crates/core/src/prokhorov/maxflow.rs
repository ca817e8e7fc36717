//! Dinic's algorithm, generic over exact integer or floating capacities.

use std::collections::VecDeque;
use std::ops::{Add, Sub};

pub(crate) trait Capacity: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;
    fn usable(self) -> bool;
}

impl Capacity for i64 {
    const ZERO: Self = 0;
    fn usable(self) -> bool {
        self > 0
    }
}

impl Capacity for f64 {
    const ZERO: Self = 0.0;
    // Residuals below this are rounding debris, not capacity.
    fn usable(self) -> bool {
        self > 1e-15
    }
}

fn min<C: Capacity>(a: C, b: C) -> C {
    if a < b { a } else { b }
}

struct Edge<C> {
    to: usize,
    cap: C,
}

pub(crate) struct Dinic<C> {
    edges: Vec<Edge<C>>,
    adj: Vec<Vec<usize>>,
    original: Vec<C>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl<C: Capacity> Dinic<C> {
    pub fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            original: Vec::new(),
            level: vec![0; nodes],
            iter: vec![0; nodes],
        }
    }

    /// Returns the edge id (for reading its flow later).
    pub fn add_edge(&mut self, u: usize, v: usize, cap: C) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap });
        self.edges.push(Edge { to: u, cap: C::ZERO });
        self.original.push(cap);
        self.original.push(C::ZERO);
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    /// Sends `f` along edge `id` (a preflow seed; the caller keeps
    /// conservation).
    pub fn push(&mut self, id: usize, f: C) {
        self.edges[id].cap = self.edges[id].cap - f;
        self.edges[id ^ 1].cap = self.edges[id ^ 1].cap + f;
    }

    pub fn residual(&self, id: usize) -> C {
        self.edges[id].cap
    }

    pub fn flow_on(&self, id: usize) -> C {
        self.original[id] - self.edges[id].cap
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if self.level[v] < 0 && self.edges[e].cap.usable() {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: C) -> C {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.edges[e].to;
            if self.edges[e].cap.usable() && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, t, min(pushed, self.edges[e].cap));
                if got.usable() {
                    self.edges[e].cap = self.edges[e].cap - got;
                    self.edges[e ^ 1].cap = self.edges[e ^ 1].cap + got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        C::ZERO
    }

    /// Maximum flow from `s` to `t`; `limit` bounds each augmenting push.
    #[allow(dead_code)]
    pub fn max_flow(&mut self, s: usize, t: usize, limit: C) -> C {
        self.max_flow_until(s, t, limit, None)
    }

    /// As [`Self::max_flow`], stopping early once `enough` has been sent.
    pub fn max_flow_until(&mut self, s: usize, t: usize, limit: C, enough: Option<C>) -> C {
        let mut total = C::ZERO;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, limit);
                if !f.usable() {
                    break;
                }
                total = total + f;
                if enough.is_some_and(|e| total >= e) {
                    return total;
                }
            }
        }
        total
    }
}
