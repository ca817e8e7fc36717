//! Reference process samplers, empirical finite-dimensional laws and the
//! finitely-supported fitter.

use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::approximators::{halfline_step_interpolant, linear_interpolant, step_interpolant};
use crate::error::{domain, Error, Result};
use crate::metrics::{endpoint_statistics, modulus, sup_abs, two_sided_modulus_on};
use crate::paths::{DyadicGrid, Path, StepPath};
use crate::prokhorov::{feasible_reweighted, rho_reweighted, DiscreteMeasure, Norm};

/// Law of a single jump of a compound Poisson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpLaw {
    Normal { mean: f64, std: f64 },
    Exponential { rate: f64 },
    Constant { size: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Brownian,
    Poisson { rate: f64 },
    CompoundPoisson { rate: f64, jump: JumpLaw },
    /// A fixed step path on `[0, ∞)`.
    Deterministic { knots: Vec<f64>, values: Vec<f64> },
}

impl ProcessKind {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            ProcessKind::Brownian => true,
            ProcessKind::Poisson { rate } => rate.is_finite() && *rate >= 0.0,
            ProcessKind::CompoundPoisson { rate, jump } => {
                rate.is_finite()
                    && *rate >= 0.0
                    && match jump {
                        JumpLaw::Normal { mean, std } => mean.is_finite() && std.is_finite() && *std >= 0.0,
                        JumpLaw::Exponential { rate } => rate.is_finite() && *rate > 0.0,
                        JumpLaw::Constant { size } => size.is_finite(),
                    }
            }
            ProcessKind::Deterministic { knots, values } => {
                StepPath::new(knots.clone(), values.clone(), f64::INFINITY)?;
                true
            }
        };
        if ok {
            Ok(())
        } else {
            domain(format!("invalid process parameters: {self:?}"))
        }
    }

    /// Short identifier recorded with samples.
    pub fn id(&self) -> String {
        match self {
            ProcessKind::Brownian => "brownian".into(),
            ProcessKind::Poisson { rate } => format!("poisson({rate})"),
            ProcessKind::CompoundPoisson { rate, .. } => format!("compound_poisson({rate})"),
            ProcessKind::Deterministic { .. } => "deterministic".into(),
        }
    }
}

/// A process law together with its own random stream. Parallel replicas
/// should use distinct `stream` values under the same seed.
#[derive(Debug, Clone)]
pub struct ProcessSampler {
    kind: ProcessKind,
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl ProcessSampler {
    pub fn new(kind: ProcessKind, seed: u64) -> Result<Self> {
        Self::with_stream(kind, seed, 0)
    }

    pub fn with_stream(kind: ProcessKind, seed: u64, stream: u64) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            seed,
            stream,
            rng: rng_for(seed, stream),
        })
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Exact joint draw at increasing times, built from independent increments.
    fn draw(&mut self, times: &[f64], out: &mut Vec<f64>) {
        let mut prev_t = 0.0;
        let mut level = 0.0;
        for &t in times {
            let dt = t - prev_t;
            prev_t = t;
            level += match &self.kind {
                ProcessKind::Brownian => {
                    let z: f64 = self.rng.sample(rand_distr::StandardNormal);
                    dt.sqrt() * z
                }
                ProcessKind::Poisson { rate } => poisson_count(&mut self.rng, rate * dt) as f64,
                ProcessKind::CompoundPoisson { rate, jump } => {
                    let n = poisson_count(&mut self.rng, rate * dt);
                    (0..n).map(|_| jump_size(&mut self.rng, jump)).sum()
                }
                ProcessKind::Deterministic { .. } => 0.0,
            };
            out.push(level);
        }
        if let ProcessKind::Deterministic { knots, values } = &self.kind {
            let path = StepPath::new(knots.clone(), values.clone(), f64::INFINITY).expect("validated");
            let start = out.len() - times.len();
            for (slot, &t) in out[start..].iter_mut().zip(times) {
                *slot = path.eval(t).expect("time checked");
            }
        }
    }
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

fn jump_size(rng: &mut ChaCha8Rng, law: &JumpLaw) -> f64 {
    match *law {
        JumpLaw::Normal { mean, std } => Normal::new(mean, std).expect("validated").sample(rng),
        JumpLaw::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
        JumpLaw::Constant { size } => size,
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return domain("no sampling times");
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return domain("sampling times must be finite and non-negative");
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return domain("sampling times must be strictly increasing");
    }
    Ok(())
}

/// `N` independent draws of `(X_{t_1}, …, X_{t_k})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalFdd {
    times: Vec<f64>,
    samples: Vec<Vec<f64>>,
    source: String,
}

impl EmpiricalFdd {
    pub fn new(times: Vec<f64>, samples: Vec<Vec<f64>>, source: impl Into<String>) -> Result<Self> {
        check_times(&times)?;
        if samples.is_empty() {
            return domain("an empirical law needs at least one draw");
        }
        if let Some(r) = samples.iter().find(|r| r.len() != times.len()) {
            return domain(format!("draw of length {} for {} times", r.len(), times.len()));
        }
        Ok(Self {
            times,
            samples,
            source: source.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::empirical(self.times.len(), &self.samples).expect("validated on construction")
    }

    /// Rows `range` as their own empirical law.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<EmpiricalFdd> {
        EmpiricalFdd::new(self.times.clone(), self.samples[range].to_vec(), self.source.clone())
    }

    /// CSV with header `t_1,…,t_k` and one draw per row.
    pub fn write_csv(&self, path: &FsPath) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let header: Vec<String> = (1..=self.times.len()).map(|i| format!("t_{i}")).collect();
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for row in &self.samples {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads draws written by [`EmpiricalFdd::write_csv`]; the file does not
    /// record the times, so they are supplied.
    pub fn read_csv(path: &FsPath, times: Vec<f64>) -> Result<EmpiricalFdd> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{}: bad number {f:?}", path.display()))))
                .collect::<Result<Vec<_>>>()?;
            samples.push(row);
        }
        EmpiricalFdd::new(times, samples, path.display().to_string())
    }
}

pub(crate) fn csv_error(path: &FsPath, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse(format!("{}: {e}", path.display()))
    }
}

pub fn sample_fdd(sampler: &mut ProcessSampler, times: &[f64], n: usize) -> Result<EmpiricalFdd> {
    check_times(times)?;
    if n == 0 {
        return domain("need at least one draw");
    }
    let mut samples = Vec::with_capacity(n);
    let mut row = Vec::with_capacity(times.len());
    for _ in 0..n {
        row.clear();
        sampler.draw(times, &mut row);
        samples.push(row.clone());
    }
    EmpiricalFdd::new(times.to_vec(), samples, sampler.kind.id())
}

/// A member of the dense family: a finitely supported law.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMember {
    pub measure: DiscreteMeasure,
}

impl PhiMember {
    pub fn new(measure: DiscreteMeasure) -> Self {
        Self { measure }
    }

    pub fn support(&self) -> usize {
        self.measure.len()
    }

    /// `n` i.i.d. atoms drawn by weight.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<Vec<f64>> {
        let mut cum = Vec::with_capacity(self.measure.len());
        let mut acc = 0.0;
        for w in self.measure.weights() {
            acc += w;
            cum.push(acc);
        }
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
                self.measure.atom(i).to_vec()
            })
            .collect()
    }
}

/// Result of a fit, certified or not.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub member: PhiMember,
    /// Estimated distance to the target law (0 when the target is itself
    /// finitely supported within budget).
    pub estimate: f64,
    pub certified: bool,
    /// Target draws the member was built from.
    pub draws: usize,
}

/// Fitting protocol parameters.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub budget: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub norm: Norm,
}

const FIRST_CANDIDATE: usize = 64;
const REFERENCE_FACTOR: usize = 4;

/// Counts of a multinomial resample of `n` draws over atoms with `weights`,
/// as weights.
fn resample_weights(rng: &mut ChaCha8Rng, weights: &[f64], draws: usize) -> Vec<f64> {
    let mut cum = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cum.push(acc);
    }
    let mut counts = vec![0usize; weights.len()];
    for _ in 0..draws {
        let u = rng.random::<f64>() * acc;
        counts[cum.partition_point(|&c| c <= u).min(cum.len() - 1)] += 1;
    }
    counts.iter().map(|&c| c as f64 / draws as f64).collect()
}

/// Fit with explicit outcome: candidates are the first `M` target draws for
/// `M` doubling from 64 up to the budget, each checked against the next
/// `4M` draws. A candidate is accepted when the estimate is below `eps` in at
/// least 95% of bootstrap resamples of both empirical laws. When none is
/// accepted the largest candidate is returned uncertified.
pub fn fit_phi_detailed(target: &EmpiricalFdd, eps: f64, opts: FitOptions) -> Result<FitOutcome> {
    if !(eps > 0.0) {
        return domain(format!("fit tolerance must be positive, got {eps}"));
    }
    if opts.budget == 0 {
        return domain("fit budget must be positive");
    }
    let whole = target.measure();
    if eps > 1.0 {
        let first = DiscreteMeasure::dirac(whole.atom(0).to_vec());
        return Ok(FitOutcome {
            member: PhiMember::new(first),
            estimate: 1.0,
            certified: true,
            draws: 1,
        });
    }
    // A target whose draws repeat (a discrete law) and fit within budget is
    // its own best fit.
    if whole.len() <= opts.budget && whole.len() * 2 <= target.len() {
        return Ok(FitOutcome {
            member: PhiMember::new(whole),
            estimate: 0.0,
            certified: true,
            draws: target.len(),
        });
    }

    let mut rng = rng_for(opts.seed, 0x0f17);
    let max_m = opts.budget.min(target.len() / (1 + REFERENCE_FACTOR));
    if max_m == 0 {
        return domain(format!("{} target draws are too few to fit", target.len()));
    }
    let mut sizes = Vec::new();
    let mut m = FIRST_CANDIDATE.min(max_m);
    loop {
        sizes.push(m);
        if m == max_m {
            break;
        }
        m = (2 * m).min(max_m);
    }

    let mut last = None;
    for &m in &sizes {
        let cand = target.slice(0..m)?.measure();
        let reference = target.slice(m..m * (1 + REFERENCE_FACTOR))?.measure();
        let point = feasible_reweighted(
            &cand,
            &reference,
            opts.norm,
            eps,
            &[(cand.weights().to_vec(), reference.weights().to_vec())],
        );
        if point[0] {
            let resamples: Vec<(Vec<f64>, Vec<f64>)> = (0..opts.bootstrap)
                .map(|_| {
                    (
                        resample_weights(&mut rng, cand.weights(), m),
                        resample_weights(&mut rng, reference.weights(), m * REFERENCE_FACTOR),
                    )
                })
                .collect();
            let ok = feasible_reweighted(&cand, &reference, opts.norm, eps, &resamples);
            let passed = ok.iter().filter(|&&b| b).count();
            if passed * 20 >= opts.bootstrap * 19 {
                let estimate =
                    rho_reweighted(&cand, cand.weights(), &reference, reference.weights(), opts.norm, 1e-6);
                return Ok(FitOutcome {
                    member: PhiMember::new(cand),
                    estimate,
                    certified: true,
                    draws: m,
                });
            }
        }
        last = Some((cand, reference));
    }
    let (cand, reference) = last.expect("at least one candidate");
    let draws = *sizes.last().expect("at least one candidate");
    let estimate = rho_reweighted(&cand, cand.weights(), &reference, reference.weights(), opts.norm, 1e-3);
    Ok(FitOutcome {
        member: PhiMember::new(cand),
        estimate,
        certified: false,
        draws,
    })
}

/// Finitely supported law within estimated Prokhorov distance `eps` of the
/// target law, or [`Error::FitBudgetExhausted`] with the best estimate.
pub fn fit_phi(target: &EmpiricalFdd, eps: f64, budget: usize) -> Result<PhiMember> {
    let opts = FitOptions {
        budget,
        bootstrap: 200,
        seed: 0,
        norm: Norm::Sup,
    };
    let out = fit_phi_detailed(target, eps, opts)?;
    if out.certified {
        Ok(out.member)
    } else {
        Err(Error::FitBudgetExhausted {
            best_estimate: out.estimate,
            support: out.member.support(),
            target: eps,
        })
    }
}

/// Path space the approximants live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    C01,
    D01,
    Dinf,
}

impl Space {
    /// Grid times carrying the level-`n` approximant's values.
    pub fn grid(self, level: u32) -> Result<Vec<f64>> {
        match self {
            Space::C01 | Space::D01 => Ok(DyadicGrid::new(level, 1.0)?.points()),
            Space::Dinf => {
                if level == 0 {
                    return domain("the half-line construction needs level ≥ 1");
                }
                Ok(DyadicGrid::new(level, level as f64)?.points())
            }
        }
    }

    /// The level-`n` approximant through grid values `z`.
    pub fn interpolate(self, z: &[f64], level: u32) -> Result<Path> {
        Ok(match self {
            Space::C01 => linear_interpolant(z)?.into(),
            Space::D01 => step_interpolant(z)?.into(),
            Space::Dinf => halfline_step_interpolant(z, level)?.into(),
        })
    }
}

/// Window `[0, z]` on which half-line statistics are read.
pub const DEFAULT_RESTRICTION: f64 = 1.5 + 1.0 / 1048576.0;

/// Tightness statistics of one path at one `δ`. Statistics that are not
/// defined for the space (or for `δ` at the window length) are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathStatistics {
    pub modulus: f64,
    pub two_sided: Option<f64>,
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub sup: f64,
}

pub fn path_statistics(space: Space, path: &Path, delta: f64, window: f64) -> Result<PathStatistics> {
    let x = match space {
        Space::Dinf => path.restrict(window)?,
        _ => path.clone(),
    };
    let t = x.horizon();
    let (two_sided, start, end) = match space {
        Space::C01 => (None, None, None),
        Space::D01 | Space::Dinf => {
            let w = two_sided_modulus_on(&x, delta, t)?;
            if delta < t {
                let (s, e, _) = endpoint_statistics(&x, delta)?;
                (Some(w), Some(s), Some(e))
            } else {
                (Some(w), None, None)
            }
        }
    };
    Ok(PathStatistics {
        modulus: modulus(&x, delta)?,
        two_sided,
        start,
        end,
        sup: sup_abs(&x)?,
    })
}

/// Distances between the laws of each tightness statistic under `y` and
/// under the target, at one `δ_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticDistances {
    pub delta: f64,
    pub modulus: f64,
    /// Two-sided modulus and, where defined, both endpoint statistics.
    pub two_sided: Option<f64>,
    pub sup: f64,
}

impl StatisticDistances {
    pub fn max(&self) -> f64 {
        self.modulus.max(self.two_sided.unwrap_or(0.0)).max(self.sup)
    }
}

fn line_rho(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    rho_reweighted(a, a.weights(), b, b.weights(), Norm::Sup, 1e-12)
}

/// For each `δ_m = 2^-m`, `m < n`, the one-dimensional Prokhorov distance
/// between each statistic's law under `y` (every atom pushed through the
/// level-`n` approximant) and its empirical law under the target.
pub fn derived_statistic_closeness(
    y: &PhiMember,
    target: &EmpiricalFdd,
    level: u32,
    space: Space,
) -> Result<Vec<StatisticDistances>> {
    let window = match space {
        Space::Dinf => DEFAULT_RESTRICTION.min(level as f64),
        _ => 1.0,
    };
    statistic_closeness_on(y, target, level, space, window)
}

/// [`derived_statistic_closeness`] with an explicit window for half-line
/// statistics.
pub(crate) fn statistic_closeness_on(
    y: &PhiMember,
    target: &EmpiricalFdd,
    level: u32,
    space: Space,
    window: f64,
) -> Result<Vec<StatisticDistances>> {
    let grid = space.grid(level)?;
    if target.times() != grid.as_slice() || y.measure.dim() != grid.len() {
        return domain(format!("y and target must both live on the level-{level} grid"));
    }
    let paths = |rows: &mut dyn Iterator<Item = &[f64]>| -> Result<Vec<Path>> {
        rows.map(|z| space.interpolate(z, level)).collect()
    };
    let y_paths = paths(&mut y.measure.atoms())?;
    let x_paths = paths(&mut target.samples().iter().map(|r| r.as_slice()))?;
    let x_weights = vec![1.0 / x_paths.len() as f64; x_paths.len()];

    let mut out = Vec::new();
    for m in 0..level {
        let delta = (-(m as f64)).exp2();
        let ys = y_paths
            .iter()
            .map(|p| path_statistics(space, p, delta, window))
            .collect::<Result<Vec<_>>>()?;
        let xs = x_paths
            .iter()
            .map(|p| path_statistics(space, p, delta, window))
            .collect::<Result<Vec<_>>>()?;
        let law = |stats: &[PathStatistics], weights: &[f64], f: &dyn Fn(&PathStatistics) -> Option<f64>| {
            let vals: Option<Vec<f64>> = stats.iter().map(f).collect();
            vals.map(|v| DiscreteMeasure::merged(1, v, weights.to_vec()))
        };
        let dist = |f: &dyn Fn(&PathStatistics) -> Option<f64>| -> Option<f64> {
            let a = law(&ys, y.measure.weights(), f)?;
            let b = law(&xs, &x_weights, f)?;
            Some(line_rho(&a, &b))
        };
        let modulus = dist(&|s| Some(s.modulus)).unwrap_or(0.0);
        let two_sided = dist(&|s| s.two_sided).map(|w| {
            [dist(&|s| s.start), dist(&|s| s.end)]
                .into_iter()
                .flatten()
                .fold(w, f64::max)
        });
        let sup = dist(&|s| Some(s.sup)).unwrap_or(0.0);
        out.push(StatisticDistances {
            delta,
            modulus,
            two_sided,
            sup,
        });
    }
    Ok(out)
}
