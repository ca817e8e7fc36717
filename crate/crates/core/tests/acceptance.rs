//! Acceptance criteria 1–10, one PASS/FAIL line each.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pathspace::approximators::{
    grid_snap_sup_identity_check, halfline_step_interpolant, linear_interpolant, restrict, step_interpolant, taper,
};
use pathspace::harness::{run_experiment, ConvergenceReport, ExperimentConfig};
use pathspace::metrics::{
    modulus, skorokhod_distance, sparse_modulus_w_prime, sup_abs, two_sided_modulus, two_sided_modulus_on,
    uniform_distance,
};
use pathspace::processes::{JumpLaw, ProcessKind, Space, DEFAULT_RESTRICTION};
use pathspace::prokhorov::{prokhorov_distance, prokhorov_oracle, project_marginal};
use pathspace::{Norm, Path, StepPath};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const OFFSET: f64 = 1.0 / 1048576.0;

// Top-level ρ̂ thresholds: the largest value over ten seeds of the
// independent reference computation in tests/oracles/harness_thresholds.py
// (N = 2000 fitted draws, 10⁴ reference draws), frozen in thresholds.json.
const BROWNIAN_C01_THRESHOLD: f64 = 0.07124614715576172;
const POISSON_D01_THRESHOLD: f64 = 0.04880046844482422;
const COMPOUND_POISSON_DINF_THRESHOLD: f64 = 0.1194000244140625;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn prokhorov_matches_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = common::rng(1);
    let mut worst: f64 = 0.0;
    for k in 0..500 {
        let dim = 1 + k % 3;
        let norm = if k % 2 == 0 { Norm::Sup } else { Norm::Euclidean };
        let mu = common::random_measure(&mut r, dim, 6);
        let nu = common::random_measure(&mut r, dim, 6);
        let (rho, cert) = prokhorov_distance(&mu, &nu, norm).unwrap();
        if cert.verify(&mu, &nu, norm).is_err() {
            return outcome(false, format!("certificate rejected on instance {k}"));
        }
        worst = worst.max((rho - prokhorov_oracle(&mu, &nu, norm).unwrap()).abs());
    }
    let t = start.elapsed();
    outcome(worst <= 1e-9 && t < Duration::from_secs(30), format!("max |flow - oracle| = {worst:.1e}, {t:.1?}"))
}

fn projection_monotone() -> Outcome {
    let mut r = common::rng(2);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let dim = 2 + k % 3;
        let mu = common::random_measure(&mut r, dim, 8);
        let nu = common::random_measure(&mut r, dim, 8);
        let full = prokhorov_distance(&mu, &nu, Norm::Sup).unwrap().0;
        let coords: Vec<usize> = loop {
            let c: Vec<usize> = (0..dim).filter(|_| r.random_bool(0.5)).collect();
            if !c.is_empty() && c.len() < dim {
                break c;
            }
        };
        let (pm, pn) = (project_marginal(&mu, &coords).unwrap(), project_marginal(&nu, &coords).unwrap());
        let part = prokhorov_distance(&pm, &pn, Norm::Sup).unwrap().0;
        worst = worst.max(part - full);
        if part > full + 1e-12 {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations, max excess {worst:.1e}"))
}

fn skorokhod_matches_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = common::rng(3);
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    let mut nontrivial = 0;
    for k in 0..200 {
        let x = common::random_step(&mut r, 4);
        let y = if k % 2 == 0 { common::random_step(&mut r, 4) } else { common::perturbed_step(&mut r, &x) };
        let d = skorokhod_distance(&x, &y, tol).unwrap().value;
        let o = common::skorokhod_oracle(&x, &y, 1e-3);
        let u = uniform_distance(&x.clone().into(), &y.clone().into()).unwrap();
        // Off the 1/32 value lattice, the time change is what binds.
        if d < u && (d * 32.0).fract() > 1e-9 {
            nontrivial += 1;
        }
        worst = worst.max((d - o).abs());
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-3_f64.max(tol) && t < Duration::from_secs(120),
        format!("max |dp - oracle| = {worst:.1e}, {nontrivial} pairs bound by the time change, {t:.1?}"),
    )
}

/// Step path on `[0, 1]` with jumps at arbitrary times.
fn free_step(r: &mut ChaCha8Rng) -> StepPath {
    let jumps = r.random_range(0..=6);
    let mut knots: Vec<f64> = (0..jumps).map(|_| r.random_range(0.0..1.0)).collect();
    knots.push(0.0);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let values = knots.iter().map(|_| r.random_range(-2.0..2.0)).collect();
    StepPath::new(knots, values, 1.0).unwrap()
}

fn billingsley_bound() -> Outcome {
    let mut r = common::rng(4);
    let mut violations = 0;
    let mut checks = 0;
    for _ in 0..100 {
        let x = free_step(&mut r);
        let xp: Path = x.clone().into();
        for n in 2..=8u32 {
            let d = 1usize << n;
            let z: Vec<f64> = (0..=d).map(|k| x.eval(k as f64 / d as f64).unwrap()).collect();
            let approx = step_interpolant(&z).unwrap();
            let delta = 1.0 / d as f64;
            let bound = delta.max(sparse_modulus_w_prime(&xp, delta, 1e-3).unwrap());
            let dist = skorokhod_distance(&approx, &x, 1e-12).unwrap().value;
            checks += 1;
            if dist > bound + 1e-9 {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations in {checks} checks"))
}

fn grid_sup_and_lipschitz() -> Outcome {
    let mut r = common::rng(5);
    let mut mismatches = 0;
    let mut lipschitz = 0;
    let mut snap = 0;
    for k in 0..1000 {
        let level = 1 + k % 6;
        let d = 1usize << level;
        let a: Vec<f64> = (0..=d).map(|_| r.random_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..=d).map(|_| r.random_range(-3.0..3.0)).collect();
        let (x, y): (Path, Path) = (linear_interpolant(&a).unwrap().into(), linear_interpolant(&b).unwrap().into());
        let grid = a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        let u = uniform_distance(&x, &y).unwrap();
        if u != grid {
            mismatches += 1;
        }
        let delta = r.random_range(0.01..0.99);
        let (xs, ys): (Path, Path) = (step_interpolant(&a).unwrap().into(), step_interpolant(&b).unwrap().into());
        let us = uniform_distance(&xs, &ys).unwrap();
        let pairs = [
            (modulus(&x, delta).unwrap(), modulus(&y, delta).unwrap(), u),
            (sup_abs(&x).unwrap(), sup_abs(&y).unwrap(), u),
            (two_sided_modulus(&xs, delta, 1.0).unwrap(), two_sided_modulus(&ys, delta, 1.0).unwrap(), us),
            (sup_abs(&xs).unwrap(), sup_abs(&ys).unwrap(), us),
        ];
        lipschitz += pairs.iter().filter(|(g, h, dist)| (g - h).abs() > 2.0 * dist + 1e-12).count();

        let hl = level.min(3) as u32;
        let z: Vec<f64> = (0..hl as usize * (1 << hl) + 1).map(|_| r.random_range(-3.0..3.0)).collect();
        let horizon = r.random_range(0.05..hl as f64);
        let probe = grid_snap_sup_identity_check(&z, hl, horizon, delta * horizon).unwrap();
        if !probe.holds() {
            snap += 1;
        }
    }
    outcome(
        mismatches + lipschitz + snap == 0,
        format!("{mismatches} grid-sup mismatches, {lipschitz} Lipschitz violations, {snap} snapping failures"),
    )
}

fn single_jump_two_sided() -> Outcome {
    let mut r = common::rng(6);
    let mut bad = 0;
    for _ in 0..500 {
        let horizon = r.random_range(0.5..4.0);
        let at = r.random_range(0.0..horizon);
        let path: Path = if at == 0.0 {
            StepPath::constant(1.0, horizon).unwrap().into()
        } else {
            StepPath::new(vec![0.0, at], vec![r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)], horizon)
                .unwrap()
                .into()
        };
        for k in 1..100 {
            let delta = horizon * k as f64 / 100.0;
            if two_sided_modulus(&path, delta, horizon).unwrap() != 0.0 {
                bad += 1;
            }
        }
        if two_sided_modulus_on(&path, 2.0 * horizon, horizon).unwrap() != 0.0 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} nonzero values"))
}

/// ρ̂ never rises above an earlier level by more than twice the larger of
/// the two bootstrap margins, and the top level sits below `threshold`.
fn decay(report: &ConvergenceReport, threshold: f64, elapsed: Duration) -> Outcome {
    let series = report.rho_series(0);
    let mut worst_rise = f64::NEG_INFINITY;
    for (i, &(_, ri, bi)) in series.iter().enumerate() {
        for &(_, rj, bj) in &series[i + 1..] {
            let margin = (bi - ri).max(bj - rj);
            worst_rise = worst_rise.max(rj - ri - 2.0 * margin);
        }
    }
    let &(top, rho_top, _) = series.last().unwrap();
    let shown: Vec<String> = series.iter().map(|(l, r, _)| format!("{l}:{r:.4}")).collect();
    outcome(
        worst_rise <= 0.0 && rho_top < threshold && elapsed < Duration::from_secs(300),
        format!(
            "rho [{}], level {top} {rho_top:.4} vs threshold {threshold:.4}, {elapsed:.1?}",
            shown.join(" ")
        ),
    )
}

fn experiment(
    target: ProcessKind,
    space: Space,
    levels: Vec<u32>,
    probes: Vec<f64>,
    restriction: Option<f64>,
) -> ExperimentConfig {
    ExperimentConfig {
        target,
        space,
        levels,
        fdd_times: vec![probes],
        replicas: 2000,
        seed: 7,
        eps_schedule: None,
        bootstrap: 200,
        reference_size: Some(10_000),
        restriction,
        timing: true,
    }
}

fn timed(cfg: &ExperimentConfig) -> (ConvergenceReport, Duration) {
    let start = Instant::now();
    let report = run_experiment(cfg).unwrap();
    (report, start.elapsed())
}

fn brownian_c01() -> Outcome {
    let cfg = experiment(ProcessKind::Brownian, Space::C01, (3..=8).collect(), vec![0.3, 0.7], None);
    let (report, t) = timed(&cfg);
    decay(&report, BROWNIAN_C01_THRESHOLD, t)
}

fn jump_targets() -> Outcome {
    let poisson = experiment(
        ProcessKind::Poisson { rate: 2.0 },
        Space::D01,
        (3..=8).collect(),
        vec![0.3 + OFFSET, 0.7 + OFFSET],
        None,
    );
    let compound = experiment(
        ProcessKind::CompoundPoisson {
            rate: 2.0,
            jump: JumpLaw::Normal { mean: 0.0, std: 1.0 },
        },
        Space::Dinf,
        (2..=6).collect(),
        vec![0.3 + OFFSET, 1.2 + OFFSET],
        Some(DEFAULT_RESTRICTION),
    );
    let (rp, tp) = timed(&poisson);
    let a = decay(&rp, POISSON_D01_THRESHOLD, tp);
    let (rc, tc) = timed(&compound);
    let b = decay(&rc, COMPOUND_POISSON_DINF_THRESHOLD, tc);
    outcome(a.pass && b.pass, format!("poisson D01 {}; compound poisson Dinf {}", a.detail, b.detail))
}

fn taper_restrict_algebra() -> Outcome {
    let mut r = common::rng(9);
    let mut bad = 0;
    for _ in 0..100 {
        let level = r.random_range(1..=3u32);
        let z: Vec<f64> = (0..level as usize * (1 << level) + 1).map(|_| r.random_range(-3.0..3.0)).collect();
        let x: Path = halfline_step_interpolant(&z, level).unwrap().into();
        let m = r.random_range(1..=4u32);
        let psi = taper(&x, m).unwrap();
        let mf = m as f64;
        let mut times: Vec<f64> = x.knots().into_iter().filter(|&t| t <= mf - 1.0).collect();
        times.extend((0..20).map(|_| r.random_range(0.0..=(mf - 1.0))));
        bad += times.iter().filter(|&&t| psi.eval(t).unwrap() != x.eval(t).unwrap()).count();
        if psi.eval(mf).unwrap() != 0.0 {
            bad += 1;
        }
        let s = r.random_range(0.1..3.0);
        let t = s + r.random_range(0.0..2.0);
        if restrict(&restrict(&x, t).unwrap(), s).unwrap() != restrict(&x, s).unwrap() {
            bad += 1;
        }
        if restrict(&restrict(&x, s).unwrap(), s).unwrap() != restrict(&x, s).unwrap() {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} mismatches"))
}

fn deterministic() -> Outcome {
    let configs = [
        experiment(ProcessKind::Brownian, Space::C01, vec![2, 3, 4], vec![0.3, 0.7], None),
        experiment(
            ProcessKind::CompoundPoisson {
                rate: 2.0,
                jump: JumpLaw::Exponential { rate: 1.0 },
            },
            Space::Dinf,
            vec![1, 2, 3],
            vec![0.3 + OFFSET, 1.2 + OFFSET],
            Some(DEFAULT_RESTRICTION),
        ),
    ];
    let mut same = true;
    for mut cfg in configs {
        cfg.replicas = 300;
        cfg.bootstrap = 50;
        cfg.reference_size = Some(3000);
        cfg.timing = false;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        same &= a.to_csv() == b.to_csv() && a.to_json() == b.to_json();
    }
    outcome(same, if same { "csv and json byte-identical" } else { "reports differ" })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("prokhorov flow vs subset oracle", prokhorov_matches_oracle),
        ("projection monotonicity", projection_monotone),
        ("skorokhod dp vs alignment oracle", skorokhod_matches_oracle),
        ("billingsley bound", billingsley_bound),
        ("grid-sup identity and lipschitz bounds", grid_sup_and_lipschitz),
        ("single-jump two-sided modulus", single_jump_two_sided),
        ("brownian C01 convergence", brownian_c01),
        ("poisson D01 and compound poisson Dinf convergence", jump_targets),
        ("taper and restriction algebra", taper_restrict_algebra),
        ("determinism", deterministic),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let o = check();
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

