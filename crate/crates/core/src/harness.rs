//! Convergence experiments: per level, fit a finitely supported law to the
//! target's grid fdd, push it through the level's approximant, and measure
//! how far the approximant's fdd and tightness statistics are from the
//! target's.

use std::fs;
use std::path::Path as FsPath;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::paths::Path;
use crate::processes::{
    fit_phi_detailed, sample_fdd, statistic_closeness_on, FitOptions, ProcessKind, ProcessSampler, Space,
    DEFAULT_RESTRICTION,
};
use crate::prokhorov::{rho_reweighted, smallest_feasible, DiscreteMeasure, NeighbourGraph, Norm};

fn default_bootstrap() -> usize {
    200
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: ProcessKind,
    pub space: Space,
    pub levels: Vec<u32>,
    /// Probe sets; each is a strictly increasing list of times.
    pub fdd_times: Vec<Vec<f64>>,
    /// Largest support the fitter may use per level.
    pub replicas: usize,
    pub seed: u64,
    /// Fit tolerance per level; `1/n` when absent.
    #[serde(default)]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Reference sample size; `max(10·replicas, 10⁴)` when absent.
    #[serde(default)]
    pub reference_size: Option<usize>,
    /// Window `[0, z]` for half-line statistics.
    #[serde(default)]
    pub restriction: Option<f64>,
    /// Record wall time per level. Off makes reports byte-reproducible.
    #[serde(default = "yes")]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels[0] == 0 {
            return domain("levels must be non-empty and at least 1");
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return domain("levels must be strictly increasing");
        }
        if self.fdd_times.is_empty() {
            return domain("at least one probe set is required");
        }
        if self.replicas == 0 {
            return domain("replicas must be positive");
        }
        if let Some(s) = &self.eps_schedule {
            if s.len() != self.levels.len() || s.iter().any(|e| !(*e > 0.0)) {
                return domain("eps_schedule needs one positive tolerance per level");
            }
        }
        let top = *self.levels.last().unwrap();
        let scale = (top as f64).exp2();
        for set in &self.fdd_times {
            if set.is_empty() || set.windows(2).any(|w| w[0] >= w[1]) {
                return domain("probe times must be non-empty and strictly increasing");
            }
            for &t in set {
                let upper = match self.space {
                    Space::Dinf => f64::INFINITY,
                    _ => 1.0,
                };
                if !(t >= 0.0 && t <= upper) {
                    return domain(format!("probe time {t} outside the path domain"));
                }
                // Càdlàg limits are only promised at continuity points; grid
                // points of the approximants are where they jump.
                if self.space != Space::C01 && (t * scale).fract() == 0.0 {
                    return domain(format!("probe time {t} lies on the level-{top} dyadic grid"));
                }
            }
        }
        if let Some(z) = self.restriction {
            if !(z > 0.0 && z.is_finite()) {
                return domain("restriction must be positive");
            }
        }
        Ok(())
    }

    fn reference_size(&self) -> usize {
        self.reference_size.unwrap_or((10 * self.replicas).max(10_000))
    }
}

/// One CSV line: a level, a probe set and one `δ_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub level: u32,
    pub probe_set: usize,
    pub rho_hat: f64,
    pub rho_boot_hi: f64,
    pub delta_m: f64,
    pub modulus_rho: f64,
    pub two_sided_rho: Option<f64>,
    pub sup_rho: f64,
    pub fit_support: usize,
    pub millis: u64,
    /// The fitter certified the level's tolerance.
    pub fit_certified: bool,
    pub fit_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn flagged(&self) -> bool {
        self.rows.iter().any(|r| !r.fit_certified)
    }

    /// `(level, rho_hat, rho_boot_hi)` for one probe set, one entry per level.
    pub fn rho_series(&self, probe_set: usize) -> Vec<(u32, f64, f64)> {
        let mut out: Vec<(u32, f64, f64)> = Vec::new();
        for r in self.rows.iter().filter(|r| r.probe_set == probe_set) {
            if out.last().map(|l| l.0) != Some(r.level) {
                out.push((r.level, r.rho_hat, r.rho_boot_hi));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let two = r.two_sided_rho.map(|v| v.to_string()).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.level, r.probe_set, r.rho_hat, r.rho_boot_hi, r.delta_m, r.modulus_rho, two, r.sup_rho,
                r.fit_support, r.millis
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub const CSV_HEADER: &str =
    "level,probe_set,rho_hat,rho_boot_hi,delta_m,modulus_rho,two_sided_rho,sup_rho,fit_support,millis";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub fn emit_report(report: &ConvergenceReport, fmt: ReportFormat, file: &FsPath) -> Result<()> {
    if report.rows.is_empty() {
        return domain("refusing to write an empty report");
    }
    let text = match fmt {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json(),
    };
    fs::write(file, text).map_err(|e| Error::io(file, e))
}

// Stream ids keep every random input of a run independent and reproducible.
const TARGET_STREAM: u64 = 1 << 20;
const REFERENCE_STREAM: u64 = 2 << 20;
const BOOTSTRAP_STREAM: u64 = 3 << 20;

fn resample(rng: &mut ChaCha8Rng, weights: &[f64], draws: usize) -> Vec<f64> {
    let mut cum = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cum.push(acc);
    }
    let mut counts = vec![0u32; weights.len()];
    for _ in 0..draws {
        let u = rng.random::<f64>() * acc;
        counts[cum.partition_point(|&c| c <= u).min(cum.len() - 1)] += 1;
    }
    counts.iter().map(|&c| c as f64 / draws as f64).collect()
}

/// Upper 95% bootstrap bound on ρ between `a` (a law supported on `a_draws`
/// draws) and the empirical `b`: the smallest ε at which 95% of resampled
/// pairs are within ε, by bisection.
fn bootstrap_hi(
    a: &DiscreteMeasure,
    a_draws: usize,
    b: &DiscreteMeasure,
    b_draws: usize,
    resamples: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    if resamples == 0 {
        return rho_reweighted(a, a.weights(), b, b.weights(), Norm::Sup, 1e-6);
    }
    let weights: Vec<(Vec<f64>, Vec<f64>)> = (0..resamples)
        .map(|_| (resample(rng, a.weights(), a_draws), resample(rng, b.weights(), b_draws)))
        .collect();
    let need = (resamples * 95).div_ceil(100);
    // Feasibility is monotone in ε, so each resample keeps a bracket: known
    // feasible at `hi[r]`, known infeasible at `lo[r]`. Only resamples whose
    // bracket straddles the probed ε need a flow.
    let mut lo = vec![-1.0; resamples];
    let mut hi = vec![1.0; resamples];
    let enough = |eps: f64| {
        let mut yes = hi.iter().filter(|&&h| h <= eps).count();
        let mut no = lo.iter().filter(|&&l| l >= eps).count();
        let graph = NeighbourGraph::new(a, b, Norm::Sup, eps);
        for r in 0..resamples {
            if yes >= need || no > resamples - need {
                break;
            }
            if hi[r] <= eps || lo[r] >= eps {
                continue;
            }
            if graph.feasible(&weights[r].0, &weights[r].1) {
                hi[r] = eps;
                yes += 1;
            } else {
                lo[r] = eps;
                no += 1;
            }
        }
        yes >= need
    };
    smallest_feasible(1e-4, enough)
}

fn fdd_of(paths: &[Path], weights: &[f64], times: &[f64]) -> Result<DiscreteMeasure> {
    let mut coords = Vec::with_capacity(paths.len() * times.len());
    for p in paths {
        for &t in times {
            coords.push(p.eval(t)?);
        }
    }
    Ok(DiscreteMeasure::merged(times.len(), coords, weights.to_vec()))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let ref_n = cfg.reference_size();
    let references = cfg
        .fdd_times
        .iter()
        .enumerate()
        .map(|(p, times)| {
            let mut s = ProcessSampler::with_stream(cfg.target.clone(), cfg.seed, REFERENCE_STREAM + p as u64)?;
            Ok(sample_fdd(&mut s, times, ref_n)?.measure())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (li, &level) in cfg.levels.iter().enumerate() {
        let clock = Instant::now();
        let grid = cfg.space.grid(level)?;
        let mut sampler = ProcessSampler::with_stream(cfg.target.clone(), cfg.seed, TARGET_STREAM + level as u64)?;
        let target = sample_fdd(&mut sampler, &grid, 5 * cfg.replicas)?;
        let eps = match &cfg.eps_schedule {
            Some(s) => s[li],
            None => 1.0 / level as f64,
        };
        let fit = fit_phi_detailed(
            &target,
            eps,
            FitOptions {
                budget: cfg.replicas,
                bootstrap: cfg.bootstrap,
                seed: cfg.seed ^ (level as u64) << 32,
                norm: Norm::Sup,
            },
        )?;
        let y = &fit.member;
        let paths = y
            .measure
            .atoms()
            .map(|z| cfg.space.interpolate(z, level))
            .collect::<Result<Vec<_>>>()?;

        // Statistics under the target use draws the fit did not consume.
        let used = fit.draws;
        let stats_target = if used < target.len() { target.slice(used..target.len())? } else { target.clone() };
        let window = match cfg.space {
            Space::Dinf => cfg.restriction.unwrap_or(DEFAULT_RESTRICTION).min(level as f64),
            _ => 1.0,
        };
        let stats = statistic_closeness_on(y, &stats_target, level, cfg.space, window)?;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(BOOTSTRAP_STREAM + level as u64);
        let mut level_rows = Vec::new();
        for (p, times) in cfg.fdd_times.iter().enumerate() {
            let approx = fdd_of(&paths, y.measure.weights(), times)?;
            let reference = &references[p];
            let rho_hat = rho_reweighted(&approx, approx.weights(), reference, reference.weights(), Norm::Sup, 1e-6);
            let boot = bootstrap_hi(&approx, used, reference, ref_n, cfg.bootstrap, &mut rng).max(rho_hat);
            for s in &stats {
                level_rows.push(ReportRow {
                    level,
                    probe_set: p,
                    rho_hat,
                    rho_boot_hi: boot,
                    delta_m: s.delta,
                    modulus_rho: s.modulus,
                    two_sided_rho: s.two_sided,
                    sup_rho: s.sup,
                    fit_support: y.support(),
                    millis: 0,
                    fit_certified: fit.certified,
                    fit_estimate: fit.estimate,
                });
            }
        }
        if cfg.timing {
            let ms = clock.elapsed().as_millis() as u64;
            level_rows.iter_mut().for_each(|r| r.millis = ms);
        }
        rows.extend(level_rows);
    }
    Ok(ConvergenceReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_cfg() -> ExperimentConfig {
        ExperimentConfig {
            target: ProcessKind::Deterministic {
                knots: vec![0.0],
                values: vec![2.0],
            },
            space: Space::D01,
            levels: vec![1, 2, 3],
            fdd_times: vec![vec![0.3 + 2f64.powi(-20)]],
            replicas: 64,
            seed: 1,
            eps_schedule: None,
            bootstrap: 20,
            reference_size: Some(500),
            restriction: None,
            timing: false,
        }
    }

    #[test]
    fn constant_target_is_exact() {
        let r = run_experiment(&constant_cfg()).unwrap();
        assert_eq!(r.rows.len(), 1 + 2 + 3);
        for row in &r.rows {
            assert_eq!((row.rho_hat, row.modulus_rho, row.sup_rho), (0.0, 0.0, 0.0));
            assert_eq!(row.two_sided_rho.unwrap_or(0.0), 0.0);
            assert!(row.fit_certified);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = constant_cfg();
        c.levels = vec![2, 2];
        assert!(run_experiment(&c).is_err());
        let mut c = constant_cfg();
        c.fdd_times = vec![vec![0.5]];
        assert!(c.validate().is_err());
        c.space = Space::C01;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn csv_and_json() {
        let r = run_experiment(&constant_cfg()).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().count(), r.rows.len() + 1);
        assert_eq!(ConvergenceReport::from_json(&r.to_json()).unwrap(), r);

        let one = ConvergenceReport { rows: vec![r.rows[0].clone()] };
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("r.csv");
        emit_report(&one, ReportFormat::Csv, &f).unwrap();
        assert_eq!(fs::read_to_string(&f).unwrap().lines().count(), 2);
        let empty = ConvergenceReport { rows: vec![] };
        assert!(emit_report(&empty, ReportFormat::Json, &f).is_err());
    }

    #[test]
    fn deterministic_without_timing() {
        let mut c = constant_cfg();
        c.target = ProcessKind::Poisson { rate: 2.0 };
        c.levels = vec![1, 2];
        let a = run_experiment(&c).unwrap().to_csv();
        let b = run_experiment(&c).unwrap().to_csv();
        assert_eq!(a, b);
    }
}
