//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use pathspace::metrics::uniform_distance;
use pathspace::{DiscreteMeasure, Path, Reparametrization, StepPath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Step path on `[0, 1]` with up to `max_jumps` jumps on a 0.01 lattice
/// strictly inside `(0, 1)`, values on a lattice so ties happen.
pub fn random_step(rng: &mut ChaCha8Rng, max_jumps: usize) -> StepPath {
    let jumps = rng.random_range(0..=max_jumps);
    let mut times: Vec<u32> = Vec::new();
    while times.len() < jumps {
        let k = rng.random_range(1..100);
        if !times.contains(&k) {
            times.push(k);
        }
    }
    times.sort();
    let mut knots = vec![0.0];
    knots.extend(times.iter().map(|&k| k as f64 / 100.0));
    // Small dyadic values so time displacement and value mismatch compete.
    let values = (0..knots.len()).map(|_| rng.random_range(-8..=8) as f64 / 32.0).collect();
    StepPath::new(knots, values, 1.0).unwrap()
}

/// `x` with each jump moved by up to 0.05 (staying on the 0.01 lattice,
/// ordered and inside `(0, 1)`) and values nudged by at most 1/32, the
/// regime where the time change matters.
pub fn perturbed_step(rng: &mut ChaCha8Rng, x: &StepPath) -> StepPath {
    let old: Vec<i64> = x.knots()[1..].iter().map(|&t| (t * 100.0).round() as i64).collect();
    let mut times: Vec<i64> = Vec::new();
    for &k in &old {
        let moved = (k + rng.random_range(-5..=5)).clamp(1, 99);
        if times.last().is_none_or(|&p| moved > p) {
            times.push(moved);
        }
    }
    let mut knots = vec![0.0];
    knots.extend(times.iter().map(|&k| k as f64 / 100.0));
    let values = (0..knots.len())
        .map(|i| x.values()[i.min(x.values().len() - 1)] + rng.random_range(-1..=1) as f64 / 32.0)
        .collect();
    StepPath::new(knots, values, 1.0).unwrap()
}

/// Brute force over jump alignments: each jump of `y` is either matched to a
/// jump of `x` or placed inside one of `x`'s constancy intervals, at the
/// lattice point of pitch `pitch` nearest its original time. Every monotone
/// alignment is tried and its cost evaluated by composing with the
/// piecewise-linear λ through the placements.
pub fn skorokhod_oracle(x: &StepPath, y: &StepPath, pitch: f64) -> f64 {
    let x = x.normalize();
    let y = y.normalize();
    let horizon = x.horizon();
    let a = x.knots()[1..].to_vec();
    let b = y.knots()[1..].to_vec();
    // Slot 2i is the interval before x-jump i (2p the last one), slot 2i+1
    // is x-jump i itself.
    let slots = 2 * a.len() + 1;
    let mut best = f64::INFINITY;
    let mut choice = vec![0usize; b.len()];
    let xp: Path = x.clone().into();
    let yp: Path = y.clone().into();

    fn place(b: &[f64], a: &[f64], choice: &[usize], horizon: f64, pitch: f64) -> Option<Vec<f64>> {
        let mut c = vec![0.0; b.len()];
        let mut k = 0;
        while k < b.len() {
            let s = choice[k];
            if s % 2 == 1 {
                c[k] = a[s / 2];
                k += 1;
                continue;
            }
            let lo = if s == 0 { 0.0 } else { a[s / 2 - 1] };
            let hi = if s / 2 == a.len() { horizon } else { a[s / 2] };
            let mut group = vec![k];
            while k + group.len() < b.len() && choice[k + group.len()] == s {
                group.push(k + group.len());
            }
            let lo_lat = ((lo / pitch + 1e-6).floor() + 1.0) as i64;
            let hi_lat = ((hi / pitch - 1e-6).ceil() - 1.0) as i64;
            if hi_lat - lo_lat + 1 < group.len() as i64 {
                return None;
            }
            let mut prev = lo_lat - 1;
            for (r, &g) in group.iter().enumerate() {
                let want = (b[g] / pitch).round() as i64;
                let room_after = (group.len() - r - 1) as i64;
                let lat = want.max(prev + 1).min(hi_lat - room_after);
                c[g] = lat as f64 * pitch;
                prev = lat;
            }
            k += group.len();
        }
        Some(c)
    }

    loop {
        if choice.windows(2).all(|w| w[0] < w[1] || (w[0] == w[1] && w[0] % 2 == 0)) {
            if let Some(c) = place(&b, &a, &choice, horizon, pitch) {
                let pairs: Vec<(f64, f64)> = c.iter().copied().zip(b.iter().copied()).collect();
                if let Ok(lambda) = Reparametrization::through(horizon, &pairs) {
                    let moved = lambda.compose(&yp).unwrap();
                    let cost = lambda.sup_displacement().max(uniform_distance(&xp, &moved).unwrap());
                    best = best.min(cost);
                }
            }
        }
        // Next assignment in lexicographic order.
        let mut i = b.len();
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < slots {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// Measure with up to `max_atoms` atoms on a small lattice in `[0, 2]^dim`,
/// dyadic or arbitrary weights.
pub fn random_measure(rng: &mut ChaCha8Rng, dim: usize, max_atoms: usize) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let atoms: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0..=20) as f64 * 0.1).collect())
        .collect();
    let raw: Vec<f64> = if rng.random_bool(0.4) {
        // Dyadic weights: integer shares of 16 exercise the exact solver.
        let mut shares = vec![1u32; n.min(16)];
        for _ in shares.len()..16 {
            let i = rng.random_range(0..shares.len());
            shares[i] += 1;
        }
        shares.resize(n, 0);
        if shares.iter().any(|&s| s == 0) {
            return random_measure(rng, dim, max_atoms);
        }
        shares.iter().map(|&s| s as f64).collect()
    } else if rng.random_bool(0.5) {
        (0..n).map(|_| rng.random_range(1..=8) as f64).collect()
    } else {
        (0..n).map(|_| rng.random_range(0.05..1.0)).collect()
    };
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // Absorb rounding so the weights sum to one within the validation tolerance.
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    DiscreteMeasure::new(dim, atoms, w).unwrap()
}
