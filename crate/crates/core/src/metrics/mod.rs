//! Distances on path space and the path functionals used as tightness
//! statistics.

mod moduli;
mod skorokhod;

pub use moduli::{
    endpoint_statistics, modulus, sparse_modulus_w_prime, sup_abs, sup_abs_on, two_sided_modulus,
    two_sided_modulus_on,
};
pub use skorokhod::{skorokhod_circ_distance, skorokhod_distance};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::paths::{Path, Reparametrization};

/// Result of a metric computation with optional bounds and witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub value: f64,
    #[serde(skip)]
    pub witness: Option<Reparametrization>,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl MetricReport {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            witness: None,
            lower_bound: value,
            upper_bound: value,
        }
    }
}

/// `sup_t |x(t) - y(t)|`.
///
/// Between consecutive knots of the union both representations are affine (a
/// step path is constant), so the supremum is the largest difference at a knot
/// or at the left limit into the next knot.
pub fn uniform_distance(x: &Path, y: &Path) -> Result<f64> {
    if x.horizon() != y.horizon() {
        return domain(format!(
            "horizon mismatch: {} vs {}",
            x.horizon(),
            y.horizon()
        ));
    }
    if matches!(x, Path::Tapered(_)) || matches!(y, Path::Tapered(_)) {
        return domain("uniform distance is not defined for tapered paths");
    }
    let horizon = x.horizon();
    let mut union = x.knots();
    union.extend(y.knots());
    if horizon.is_finite() {
        union.push(horizon);
    }
    union.sort_by(f64::total_cmp);
    union.dedup();

    let mut best: f64 = 0.0;
    for (i, &t) in union.iter().enumerate() {
        best = best.max((x.eval(t)? - y.eval(t)?).abs());
        if i > 0 {
            best = best.max((x.left_value(t)? - y.left_value(t)?).abs());
        }
    }
    Ok(best)
}
