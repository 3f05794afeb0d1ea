//! The statistical apparatus for intra- and inter-set comparison: Pearson
//! correlation with significance, per-dimension dispersion and the model
//! cultural disparity ratio, and the pairwise cluster measures (DBI,
//! silhouette, and silhouette with human reference).
//!
//! All point distances are Euclidean on raw 6-d score vectors with no
//! per-dimension normalization.

mod special;

pub use special::{inc_beta, ln_gamma, student_t_two_sided_p};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::protocol::Nation;
use crate::scoring::{Dimension, VsmScore};

/// Pearson correlation with its two-sided significance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Per-dimension dispersion across nations and its mean (the distance D),
/// optionally with the disparity ratio against the human reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityReport {
    pub sigma: BTreeMap<Dimension, f64>,
    pub distance: f64,
    pub mcd: Option<f64>,
}

/// A labeled cloud of 6-d score points (54 identity points for DBI/SS, or
/// the 9 national aggregates for the human-referenced silhouette).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub label: String,
    pub points: Vec<[f64; 6]>,
}

impl PointSet {
    pub fn new(label: impl Into<String>, points: Vec<[f64; 6]>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }

    fn centroid(&self) -> [f64; 6] {
        let mut c = [0.0; 6];
        for p in &self.points {
            for (acc, x) in c.iter_mut().zip(p) {
                *acc += x;
            }
        }
        for acc in &mut c {
            *acc /= self.points.len() as f64;
        }
        c
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("input vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined: {0}")]
    DegenerateInput(String),
    #[error("need at least two nations, got {0}")]
    InsufficientNations(usize),
    #[error("national score maps cover different nations")]
    NationMismatch,
    #[error("human reference has zero dispersion")]
    ZeroHumanDispersion,
    #[error("set centroids coincide; DBI undefined")]
    CoincidentCentroids,
    #[error("too few points per set (got {0} and {1})")]
    TooFewPoints(usize, usize),
    #[error("human reference distance is zero for nation {0}")]
    ZeroHumanReference(Nation),
}

fn euclidean(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sample Pearson correlation with a two-sided p-value from the t-statistic
/// t = rho * sqrt((n-2) / (1-rho^2)) on n-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(MetricError::DegenerateInput(format!(
            "need at least 3 samples, got {n}"
        )));
    }
    let n_f = n as f64;
    let mean_x = x.iter().sum::<f64>() / n_f;
    let mean_y = y.iter().sum::<f64>() / n_f;
    let mut ss_x = 0.0;
    let mut ss_y = 0.0;
    let mut ss_xy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        ss_x += dx * dx;
        ss_y += dy * dy;
        ss_xy += dx * dy;
    }
    if ss_x == 0.0 || ss_y == 0.0 {
        return Err(MetricError::DegenerateInput(
            "constant input vector".into(),
        ));
    }
    let rho = (ss_xy / (ss_x.sqrt() * ss_y.sqrt())).clamp(-1.0, 1.0);
    let df = n_f - 2.0;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        student_t_two_sided_p(t, df)
    };
    Ok(CorrelationResult { rho, p_value, n })
}

/// Per-dimension sample standard deviation (divisor n-1) across nations,
/// and their mean as the overall distance.
pub fn dimension_dispersion(
    nationals: &BTreeMap<Nation, VsmScore>,
) -> Result<DisparityReport, MetricError> {
    if nationals.len() < 2 {
        return Err(MetricError::InsufficientNations(nationals.len()));
    }
    let n = nationals.len() as f64;
    let mut sigma = BTreeMap::new();
    for dimension in Dimension::ALL {
        let values: Vec<f64> = nationals.values().map(|s| s.get(dimension)).collect();
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        sigma.insert(dimension, variance.sqrt());
    }
    let distance = sigma.values().sum::<f64>() / sigma.len() as f64;
    Ok(DisparityReport {
        sigma,
        distance,
        mcd: None,
    })
}

fn require_same_nations<A, B>(
    a: &BTreeMap<Nation, A>,
    b: &BTreeMap<Nation, B>,
) -> Result<(), MetricError> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(MetricError::NationMismatch);
    }
    Ok(())
}

/// Model cultural disparity: the model's mean per-dimension national
/// standard deviation over the same quantity for the human reference.
pub fn mcd(
    model_nationals: &BTreeMap<Nation, VsmScore>,
    human_nationals: &BTreeMap<Nation, VsmScore>,
) -> Result<f64, MetricError> {
    require_same_nations(model_nationals, human_nationals)?;
    let d_m = dimension_dispersion(model_nationals)?.distance;
    let d_h = dimension_dispersion(human_nationals)?.distance;
    if d_h == 0.0 {
        return Err(MetricError::ZeroHumanDispersion);
    }
    Ok(d_m / d_h)
}

/// Pairwise Davies-Bouldin index: within-set spread over centroid
/// separation. Lower means better separated.
pub fn dbi(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(MetricError::TooFewPoints(a.points.len(), b.points.len()));
    }
    let centroid_a = a.centroid();
    let centroid_b = b.centroid();
    let m = euclidean(&centroid_a, &centroid_b);
    if m == 0.0 {
        return Err(MetricError::CoincidentCentroids);
    }
    let spread = |set: &PointSet, centroid: &[f64; 6]| {
        set.points.iter().map(|p| euclidean(p, centroid)).sum::<f64>() / set.points.len() as f64
    };
    Ok((spread(a, &centroid_a) + spread(b, &centroid_b)) / m)
}

/// Pairwise silhouette score: mean over all points of both sets of
/// (b - a) / max(a, b), where a is the mean distance to the point's own set
/// and b the mean distance to the opposite set. A point with a == b == 0
/// contributes 0. Result is within [-1, 1].
pub fn silhouette(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    if a.points.len() < 2 || b.points.len() < 2 {
        return Err(MetricError::TooFewPoints(a.points.len(), b.points.len()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (own, other) in [(a, b), (b, a)] {
        for (i, p) in own.points.iter().enumerate() {
            let a_p = own
                .points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| euclidean(p, q))
                .sum::<f64>()
                / (own.points.len() - 1) as f64;
            let b_p = other.points.iter().map(|q| euclidean(p, q)).sum::<f64>()
                / other.points.len() as f64;
            let denominator = a_p.max(b_p);
            total += if denominator == 0.0 {
                0.0
            } else {
                (b_p - a_p) / denominator
            };
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Silhouette score with human reference, over nationally aggregated scores.
///
/// For each nation in each of the two compared sets: a is the mean distance
/// to the other nations of the same set, b the mean distance to all nations
/// of the opposite set, and the term (b - a) is normalized by that nation's
/// mean distance to the other nations in the *human* results. The mean over
/// all 2N terms exceeds 1 when the separation between the sets is larger
/// than the disparity observed among humans.
pub fn ss_h(
    a_nationals: &BTreeMap<Nation, VsmScore>,
    b_nationals: &BTreeMap<Nation, VsmScore>,
    human_nationals: &BTreeMap<Nation, VsmScore>,
) -> Result<f64, MetricError> {
    require_same_nations(a_nationals, b_nationals)?;
    require_same_nations(a_nationals, human_nationals)?;
    let nations: Vec<Nation> = human_nationals.keys().copied().collect();
    let n = nations.len();
    if n < 2 {
        return Err(MetricError::InsufficientNations(n));
    }

    let points = |map: &BTreeMap<Nation, VsmScore>| -> Vec<[f64; 6]> {
        nations.iter().map(|nation| map[nation].to_array()).collect()
    };
    let human = points(human_nationals);
    let mut a_h = vec![0.0; n];
    for i in 0..n {
        a_h[i] = (0..n)
            .filter(|&j| j != i)
            .map(|j| euclidean(&human[i], &human[j]))
            .sum::<f64>()
            / (n - 1) as f64;
        if a_h[i] == 0.0 {
            return Err(MetricError::ZeroHumanReference(nations[i]));
        }
    }

    let set_a = points(a_nationals);
    let set_b = points(b_nationals);
    let mut total = 0.0;
    for (own, other) in [(&set_a, &set_b), (&set_b, &set_a)] {
        for i in 0..n {
            let a_i = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(&own[i], &own[j]))
                .sum::<f64>()
                / (n - 1) as f64;
            let b_i = other.iter().map(|q| euclidean(&own[i], q)).sum::<f64>() / n as f64;
            total += (b_i - a_i) / a_h[i];
        }
    }
    Ok(total / (2 * n) as f64)
}
