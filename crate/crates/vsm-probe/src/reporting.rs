//! Comparison artifacts: per-set disparity reports, pairwise metric
//! matrices, and deterministic CSV/JSON exports.
//!
//! Heatmap rendering and t-SNE stay outside the tool; this module emits the
//! matrix and score files those plots are drawn from.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collection::ExperimentSet;
use crate::metrics::{
    dbi, dimension_dispersion, mcd, pearson, silhouette, ss_h, DisparityReport, MetricError,
    PointSet,
};
use crate::protocol::Nation;
use crate::reference::{HumanReference, MmluTable};
use crate::scoring::{
    identity_scores, national_aggregate, set_centroid, Dimension, ScoringConstants, ScoringError,
    VsmScore,
};

/// Pairwise measures a comparison matrix can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMetric {
    Dbi,
    Ss,
    SsH,
    PearsonRho,
    MmluDelta,
}

impl MatrixMetric {
    pub fn label(&self) -> &'static str {
        match self {
            MatrixMetric::Dbi => "dbi",
            MatrixMetric::Ss => "ss",
            MatrixMetric::SsH => "ss_h",
            MatrixMetric::PearsonRho => "pearson_rho",
            MatrixMetric::MmluDelta => "mmlu_delta",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "dbi" => Some(MatrixMetric::Dbi),
            "ss" => Some(MatrixMetric::Ss),
            "ss_h" => Some(MatrixMetric::SsH),
            "pearson" | "pearson_rho" => Some(MatrixMetric::PearsonRho),
            "mmlu_delta" => Some(MatrixMetric::MmluDelta),
            _ => None,
        }
    }

    /// How the (undefined or degenerate) diagonal is filled.
    fn diagonal_policy(&self) -> DiagonalPolicy {
        match self {
            // A set against itself has coincident centroids / no separation.
            MatrixMetric::Dbi | MatrixMetric::Ss => DiagonalPolicy::Blank,
            MatrixMetric::SsH | MatrixMetric::MmluDelta => DiagonalPolicy::Zero,
            MatrixMetric::PearsonRho => DiagonalPolicy::One,
        }
    }
}

/// Diagonal fill rule for a [`ComparisonMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagonalPolicy {
    Blank,
    Zero,
    One,
}

impl DiagonalPolicy {
    fn cell(&self) -> Option<f64> {
        match self {
            DiagonalPolicy::Blank => None,
            DiagonalPolicy::Zero => Some(0.0),
            DiagonalPolicy::One => Some(1.0),
        }
    }
}

/// Square, symmetric matrix of a pairwise metric over labeled sets. `None`
/// cells render blank in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub metric: MatrixMetric,
    pub diagonal_policy: DiagonalPolicy,
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl ComparisonMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for cell in row {
                out.push(',');
                if let Some(v) = cell {
                    out.push_str(&format!("{v:.3}"));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        let mut body = serde_json::to_string_pretty(self).expect("matrix serializes");
        body.push('\n');
        body
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ReportError> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }

    pub fn write_json(&self, path: &Path) -> Result<(), ReportError> {
        write_atomic(path, self.to_json_string().as_bytes())
    }
}

/// All Table-style figures for one experiment set: national scores, the
/// dispersion report with MCD against the human reference, the raw-score
/// centroid, and the run's recognizability rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub label: String,
    pub config_digest: String,
    pub template_sha256: String,
    pub recognizability_rate: f64,
    pub nationals: BTreeMap<Nation, VsmScore>,
    pub disparity: DisparityReport,
    pub centroid: Vec<f64>,
}

impl SetReport {
    pub fn to_json_string(&self) -> String {
        let mut body = serde_json::to_string_pretty(self).expect("report serializes");
        body.push('\n');
        body
    }

    /// Multi-block CSV: national scores, per-dimension sigma, scalar
    /// summary, and the 24-d centroid, separated by blank lines.
    pub fn to_csv_string(&self) -> String {
        let mut out = nationals_csv(&self.nationals);
        out.push('\n');

        out.push_str("statistic");
        for dimension in Dimension::ALL {
            out.push(',');
            out.push_str(dimension.label());
        }
        out.push_str("\nsigma");
        for dimension in Dimension::ALL {
            out.push_str(&format!(",{:.3}", self.disparity.sigma[&dimension]));
        }
        out.push_str("\n\nsummary,value\n");
        out.push_str(&format!("distance,{:.3}\n", self.disparity.distance));
        if let Some(mcd) = self.disparity.mcd {
            out.push_str(&format!("mcd,{mcd:.3}\n"));
        }
        out.push_str(&format!(
            "recognizability_rate,{:.3}\n",
            self.recognizability_rate
        ));

        out.push_str("\nquestion,mean_raw\n");
        for (i, value) in self.centroid.iter().enumerate() {
            out.push_str(&format!("{},{value:.3}\n", i + 1));
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<(), ReportError> {
        write_atomic(path, self.to_json_string().as_bytes())
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ReportError> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("metric {metric} failed for pair ({a}, {b}): {source}")]
    MetricFailed {
        metric: &'static str,
        a: String,
        b: String,
        source: MetricError,
    },
    #[error("need at least two sets, got {0}")]
    TooFewSets(usize),
    #[error("metric requires the human reference")]
    MissingHumanReference,
    #[error("model {0:?} not present in the MMLU table")]
    UnknownModel(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// National aggregates, dispersion, MCD against the human reference, and
/// centroid for one set.
pub fn intra_set_report(
    set: &ExperimentSet,
    human: &HumanReference,
    constants: &ScoringConstants,
) -> Result<SetReport, ReportError> {
    let nationals = national_aggregate(set, constants)?;
    let mut disparity = dimension_dispersion(&nationals).map_err(|source| {
        ReportError::MetricFailed {
            metric: "dimension_dispersion",
            a: set.label.clone(),
            b: set.label.clone(),
            source,
        }
    })?;
    disparity.mcd = Some(mcd(&nationals, &human.nationals).map_err(|source| {
        ReportError::MetricFailed {
            metric: "mcd",
            a: set.label.clone(),
            b: "human".into(),
            source,
        }
    })?);
    let centroid = set_centroid(set)?;
    Ok(SetReport {
        label: set.label.clone(),
        config_digest: set.manifest.config_digest.clone(),
        template_sha256: set.manifest.template_sha256.clone(),
        recognizability_rate: set.recognizability_rate,
        nationals,
        disparity,
        centroid: centroid.as_slice().to_vec(),
    })
}

/// Pairwise metric matrix over the given sets: DBI and SS on the 54-point
/// identity clouds, SS_h on national aggregates against the human
/// reference, and Pearson's rho on the 24-d raw-score centroids.
pub fn comparison_matrix(
    sets: &[&ExperimentSet],
    metric: MatrixMetric,
    human: Option<&HumanReference>,
    constants: &ScoringConstants,
) -> Result<ComparisonMatrix, ReportError> {
    if sets.len() < 2 {
        return Err(ReportError::TooFewSets(sets.len()));
    }
    let labels: Vec<String> = sets.iter().map(|s| s.label.clone()).collect();

    enum Prepared {
        Clouds(Vec<PointSet>),
        Nationals(Vec<BTreeMap<Nation, VsmScore>>),
        Centroids(Vec<Vec<f64>>),
    }

    let prepared = match metric {
        MatrixMetric::Dbi | MatrixMetric::Ss => Prepared::Clouds(
            sets.iter()
                .map(|set| {
                    let points = identity_scores(set, constants)?
                        .into_iter()
                        .map(|(_, score)| score.to_array())
                        .collect();
                    Ok(PointSet::new(set.label.clone(), points))
                })
                .collect::<Result<_, ScoringError>>()?,
        ),
        MatrixMetric::SsH => Prepared::Nationals(
            sets.iter()
                .map(|set| national_aggregate(set, constants))
                .collect::<Result<_, _>>()?,
        ),
        MatrixMetric::PearsonRho => Prepared::Centroids(
            sets.iter()
                .map(|set| set_centroid(set).map(|c| c.as_slice().to_vec()))
                .collect::<Result<_, _>>()?,
        ),
        MatrixMetric::MmluDelta => {
            return Err(ReportError::MetricFailed {
                metric: "mmlu_delta",
                a: labels[0].clone(),
                b: labels[0].clone(),
                source: MetricError::DegenerateInput(
                    "mmlu deltas come from mmlu_delta_matrix, not experiment sets".into(),
                ),
            })
        }
    };

    let human_nationals = match (metric, human) {
        (MatrixMetric::SsH, None) => return Err(ReportError::MissingHumanReference),
        (MatrixMetric::SsH, Some(h)) => Some(&h.nationals),
        _ => None,
    };

    let n = sets.len();
    let policy = metric.diagonal_policy();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        values[i][i] = policy.cell();
        for j in (i + 1)..n {
            let cell = match &prepared {
                Prepared::Clouds(clouds) => match metric {
                    MatrixMetric::Dbi => dbi(&clouds[i], &clouds[j]),
                    _ => silhouette(&clouds[i], &clouds[j]),
                },
                Prepared::Nationals(nationals) => ss_h(
                    &nationals[i],
                    &nationals[j],
                    human_nationals.expect("checked above"),
                ),
                Prepared::Centroids(centroids) => {
                    pearson(&centroids[i], &centroids[j]).map(|r| r.rho)
                }
            }
            .map_err(|source| ReportError::MetricFailed {
                metric: metric.label(),
                a: labels[i].clone(),
                b: labels[j].clone(),
                source,
            })?;
            values[i][j] = Some(cell);
            values[j][i] = Some(cell);
        }
    }

    Ok(ComparisonMatrix {
        metric,
        diagonal_policy: policy,
        labels,
        values,
    })
}

/// Matrix of absolute MMLU score differences for the listed models.
pub fn mmlu_delta_matrix(
    mmlu: &MmluTable,
    models: &[String],
) -> Result<ComparisonMatrix, ReportError> {
    if models.len() < 2 {
        return Err(ReportError::TooFewSets(models.len()));
    }
    let scores: Vec<f64> = models
        .iter()
        .map(|m| {
            mmlu.get(m)
                .ok_or_else(|| ReportError::UnknownModel(m.clone()))
        })
        .collect::<Result<_, _>>()?;
    let n = models.len();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            values[i][j] = Some((scores[i] - scores[j]).abs());
        }
    }
    Ok(ComparisonMatrix {
        metric: MatrixMetric::MmluDelta,
        diagonal_policy: MatrixMetric::MmluDelta.diagonal_policy(),
        labels: models.to_vec(),
        values,
    })
}

/// National scores CSV block: `nation,PDI,IDV,MAS,UAI,LTO,IVR`, one row per
/// nation in canonical order, 3-decimal fixed point.
pub fn nationals_csv(nationals: &BTreeMap<Nation, VsmScore>) -> String {
    let mut out = String::from("nation");
    for dimension in Dimension::ALL {
        out.push(',');
        out.push_str(dimension.label());
    }
    out.push('\n');
    for (nation, score) in nationals {
        out.push_str(nation.label());
        for dimension in Dimension::ALL {
            out.push_str(&format!(",{:.3}", score.get(dimension)));
        }
        out.push('\n');
    }
    out
}

/// Per-identity 6-d score CSV (54 rows): the plot-ready export for external
/// t-SNE or scatter tooling.
pub fn identity_scores_csv(
    set: &ExperimentSet,
    constants: &ScoringConstants,
) -> Result<String, ReportError> {
    let mut out = String::from("set,nation,gender,age");
    for dimension in Dimension::ALL {
        out.push(',');
        out.push_str(dimension.label());
    }
    out.push('\n');
    for (identity, score) in identity_scores(set, constants)? {
        out.push_str(&format!(
            "{},{},{},{}",
            set.label,
            identity.nation.label(),
            identity.gender.label(),
            identity.age
        ));
        for dimension in Dimension::ALL {
            out.push_str(&format!(",{:.3}", score.get(dimension)));
        }
        out.push('\n');
    }
    Ok(out)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
