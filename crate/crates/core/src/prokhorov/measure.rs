use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const WEIGHT_TOL: f64 = 1e-12;

/// Distance on `R^k` used for ε-neighbourhoods.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Max-coordinate distance. Cylinder sets keep their product form under
    /// ε-enlargement, which makes marginal projection non-expansive.
    #[default]
    Sup,
    Euclidean,
}

impl Norm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::Sup => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            Norm::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }

    /// `distance(a, b) <= eps`, bailing out early.
    pub(crate) fn within(self, a: &[f64], b: &[f64], eps: f64) -> bool {
        match self {
            Norm::Sup => a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps),
            Norm::Euclidean => {
                let cap = eps * eps;
                let mut acc = 0.0;
                for (x, y) in a.iter().zip(b) {
                    acc += (x - y) * (x - y);
                    if acc > cap {
                        return self.distance(a, b) <= eps;
                    }
                }
                self.distance(a, b) <= eps
            }
        }
    }
}

/// Finitely supported probability measure on `R^k` with distinct atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Row-major atom coordinates.
    coords: Vec<f64>,
    weights: Vec<f64>,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

impl DiscreteMeasure {
    /// Validates and merges coincident atoms. Weights must be positive and
    /// sum to 1 within `1e-12`.
    pub fn new(dim: usize, atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return domain(format!("{} atoms but {} weights", atoms.len(), weights.len()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return domain(format!("weights must be positive and finite, got {w}"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return domain(format!("weights sum to {total}, not 1"));
        }
        let mut coords = Vec::with_capacity(atoms.len() * dim);
        for a in &atoms {
            if a.len() != dim {
                return domain(format!("atom of dimension {} in a {dim}-dimensional measure", a.len()));
            }
            if a.iter().any(|c| !c.is_finite()) {
                return domain("non-finite atom coordinate");
            }
            coords.extend_from_slice(a);
        }
        Ok(Self::merged(dim, coords, weights))
    }

    /// Empirical measure of equally weighted rows.
    pub fn empirical(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return domain("empirical measure of zero samples");
        }
        let w = 1.0 / rows.len() as f64;
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return domain(format!("sample of dimension {} in a {dim}-dimensional measure", r.len()));
            }
            coords.extend_from_slice(r);
        }
        Ok(Self::merged(dim, coords, vec![w; rows.len()]))
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        Self {
            dim: point.len(),
            coords: point,
            weights: vec![1.0],
        }
    }

    /// Build from trusted parts, merging coincident atoms.
    pub(crate) fn merged(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Self {
        let n = weights.len();
        let row = |i: usize| &coords[i * dim..(i + 1) * dim];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lex(row(a), row(b)));
        let mut out_coords = Vec::with_capacity(coords.len());
        let mut out_weights: Vec<f64> = Vec::with_capacity(n);
        let mut prev: Option<usize> = None;
        for &i in &order {
            match prev {
                Some(p) if lex(row(p), row(i)) == Ordering::Equal => {
                    *out_weights.last_mut().unwrap() += weights[i];
                }
                _ => {
                    out_coords.extend_from_slice(row(i));
                    out_weights.push(weights[i]);
                    prev = Some(i);
                }
            }
        }
        Self {
            dim,
            coords: out_coords,
            weights: out_weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Pushforward under the coordinate projection onto `coords` (0-based).
    pub fn project(&self, coords: &[usize]) -> Result<DiscreteMeasure> {
        if coords.is_empty() {
            return domain("projection onto an empty coordinate set");
        }
        if let Some(c) = coords.iter().find(|&&c| c >= self.dim) {
            return domain(format!("coordinate {c} out of range for dimension {}", self.dim));
        }
        let mut out = Vec::with_capacity(self.len() * coords.len());
        for i in 0..self.len() {
            let a = self.atom(i);
            out.extend(coords.iter().map(|&c| a[c]));
        }
        Ok(Self::merged(coords.len(), out, self.weights.clone()))
    }

    /// One-dimensional pushforward under `f`.
    pub fn pushforward(&self, mut f: impl FnMut(&[f64]) -> f64) -> DiscreteMeasure {
        let coords = (0..self.len()).map(|i| f(self.atom(i))).collect();
        Self::merged(1, coords, self.weights.clone())
    }

    /// Pushforward into `R^k` under `f`.
    pub fn pushforward_vec(&self, k: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> DiscreteMeasure {
        let mut coords = Vec::with_capacity(self.len() * k);
        for i in 0..self.len() {
            let v = f(self.atom(i));
            debug_assert_eq!(v.len(), k);
            coords.extend(v);
        }
        Self::merged(k, coords, self.weights.clone())
    }
}
