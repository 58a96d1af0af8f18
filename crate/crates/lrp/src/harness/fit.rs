//! Scaling-law fits over sweep output and the regime classifier built on
//! them. Fits are ordinary least squares on transformed per-n medians;
//! medians keep the skewed small-n distributions from dragging the lines.

use super::SweepRow;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} distinct n values with data, got {got}")]
    TooFewSupportPoints { needed: usize, got: usize },
    #[error("column {column} has a non-positive median at n = {n}; log transforms undefined")]
    NonPositiveMedian { column: String, n: u32 },
    #[error("poly-log fits need n >= 3 at every support point")]
    PolyLogNeedsLargerN,
    #[error("unknown fit column `{0}`")]
    UnknownColumn(String),
}

/// Transform applied before the least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitModel {
    /// `log y` against `log n`.
    PowerLaw,
    /// `log y` against `log log n`.
    PolyLog,
    /// Intercept-only fit of the raw medians.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeLabel {
    Linear,
    PolyLogarithmic,
    Bounded,
    Inconclusive,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RegimeLabel::Linear => "linear",
            RegimeLabel::PolyLogarithmic => "poly-logarithmic",
            RegimeLabel::Bounded => "bounded",
            RegimeLabel::Inconclusive => "inconclusive",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Stamped by [`classify_regime`]; raw fits carry `Inconclusive`.
    pub regime_label: RegimeLabel,
}

/// Numeric column of a [`SweepRow`] a fit can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum YColumn {
    Diameter,
    Edges,
    MeanDegree,
    MaxDegree,
    NumCuts,
    HalfBoundary,
    CheegerArc,
    CheegerExact,
    ResP50,
    ResP90,
    ResMax,
    TauTv,
}

impl YColumn {
    pub fn extract(&self, row: &SweepRow) -> Option<f64> {
        match self {
            YColumn::Diameter => row.diameter.map(f64::from),
            YColumn::Edges => Some(row.edges as f64),
            YColumn::MeanDegree => Some(row.mean_degree),
            YColumn::MaxDegree => Some(f64::from(row.max_degree)),
            YColumn::NumCuts => row.num_cuts.map(f64::from),
            YColumn::HalfBoundary => row.half_boundary.map(|v| v as f64),
            YColumn::CheegerArc => row.cheeger_arc,
            YColumn::CheegerExact => row.cheeger_exact,
            YColumn::ResP50 => row.res_p50,
            YColumn::ResP90 => row.res_p90,
            YColumn::ResMax => row.res_max,
            YColumn::TauTv => row.tau_tv.map(|v| v as f64),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            YColumn::Diameter => "diameter",
            YColumn::Edges => "edges",
            YColumn::MeanDegree => "mean_degree",
            YColumn::MaxDegree => "max_degree",
            YColumn::NumCuts => "num_cuts",
            YColumn::HalfBoundary => "half_boundary",
            YColumn::CheegerArc => "cheeger_arc",
            YColumn::CheegerExact => "cheeger_exact",
            YColumn::ResP50 => "res_p50",
            YColumn::ResP90 => "res_p90",
            YColumn::ResMax => "res_max",
            YColumn::TauTv => "tau_tv",
        }
    }
}

impl FromStr for YColumn {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let all = [
            YColumn::Diameter,
            YColumn::Edges,
            YColumn::MeanDegree,
            YColumn::MaxDegree,
            YColumn::NumCuts,
            YColumn::HalfBoundary,
            YColumn::CheegerArc,
            YColumn::CheegerExact,
            YColumn::ResP50,
            YColumn::ResP90,
            YColumn::ResMax,
            YColumn::TauTv,
        ];
        all.into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| FitError::UnknownColumn(s.to_string()))
    }
}

/// Interpolated median (mean of the two central order statistics when the
/// count is even).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Per-n medians of the chosen column, ascending in n. Rows lacking the
/// column value are skipped.
pub fn medians_by_n(rows: &[SweepRow], column: YColumn) -> Vec<(u32, f64)> {
    let mut grouped: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for row in rows {
        if let Some(value) = column.extract(row) {
            grouped.entry(row.n).or_default().push(value);
        }
    }
    grouped
        .into_iter()
        .map(|(n, mut vs)| (n, median(&mut vs)))
        .collect()
}

fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r_squared)
}

fn transform(
    medians: &[(u32, f64)],
    model: FitModel,
    column: YColumn,
) -> Result<Vec<(f64, f64)>, FitError> {
    medians
        .iter()
        .map(|&(n, m)| {
            let y = match model {
                FitModel::Constant => return Ok((n as f64, m)),
                _ => {
                    if m <= 0.0 {
                        return Err(FitError::NonPositiveMedian {
                            column: column.name().into(),
                            n,
                        });
                    }
                    m.ln()
                }
            };
            let x = match model {
                FitModel::PowerLaw => (n as f64).ln(),
                FitModel::PolyLog => {
                    if n < 3 {
                        return Err(FitError::PolyLogNeedsLargerN);
                    }
                    (n as f64).ln().ln()
                }
                FitModel::Constant => unreachable!(),
            };
            Ok((x, y))
        })
        .collect()
}

/// OLS on transformed per-n medians. Requires at least three distinct n
/// values with data.
pub fn fit_scaling(
    rows: &[SweepRow],
    column: YColumn,
    model: FitModel,
) -> Result<FitResult, FitError> {
    let medians = medians_by_n(rows, column);
    fit_from_medians(&medians, column, model)
}

fn fit_from_medians(
    medians: &[(u32, f64)],
    column: YColumn,
    model: FitModel,
) -> Result<FitResult, FitError> {
    if medians.len() < 3 {
        return Err(FitError::TooFewSupportPoints {
            needed: 3,
            got: medians.len(),
        });
    }
    let points = transform(medians, model, column)?;
    let (slope, intercept, r_squared) = match model {
        FitModel::Constant => {
            let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
            let ss_tot: f64 = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
            (0.0, mean, if ss_tot <= f64::EPSILON { 1.0 } else { 0.0 })
        }
        _ => ols(&points),
    };
    Ok(FitResult {
        model,
        slope,
        intercept,
        r_squared,
        n_points: medians.len(),
        regime_label: RegimeLabel::Inconclusive,
    })
}

/// Calibration thresholds for [`classify_regime`]. The library never bakes
/// these in; callers pin them (config file, CLI flags, or the acceptance
/// suite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    pub linear_slope_min: f64,
    pub linear_r2_min: f64,
    pub polylog_r2_min: f64,
}

/// Everything the classifier looks at, computed once from the rows: the
/// three global fits, power-law slopes over the lower- and upper-half
/// windows of n, and the raw per-n medians.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeEvidence {
    pub power: FitResult,
    pub polylog: FitResult,
    pub constant: FitResult,
    pub lower_window_slope: f64,
    pub upper_window_slope: f64,
    pub medians: Vec<(u32, f64)>,
}

pub fn regime_evidence(rows: &[SweepRow], column: YColumn) -> Result<RegimeEvidence, FitError> {
    let medians = medians_by_n(rows, column);
    if medians.len() < 3 {
        return Err(FitError::TooFewSupportPoints {
            needed: 3,
            got: medians.len(),
        });
    }
    let power = fit_from_medians(&medians, column, FitModel::PowerLaw)?;
    let polylog = fit_from_medians(&medians, column, FitModel::PolyLog)?;
    let constant = fit_from_medians(&medians, column, FitModel::Constant)?;
    let window = medians.len().div_ceil(2).max(2);
    let lower = transform(&medians[..window], FitModel::PowerLaw, column)?;
    let upper = transform(
        &medians[medians.len() - window..],
        FitModel::PowerLaw,
        column,
    )?;
    Ok(RegimeEvidence {
        power,
        polylog,
        constant,
        lower_window_slope: ols(&lower).0,
        upper_window_slope: ols(&upper).0,
        medians,
    })
}

/// Applies the regime trichotomy to the evidence:
/// linear growth, then boundedness, then shrinking log-log slope with a good
/// poly-log fit, otherwise inconclusive.
pub fn classify_regime(evidence: &RegimeEvidence, thresholds: &RegimeThresholds) -> RegimeLabel {
    if evidence.power.slope >= thresholds.linear_slope_min
        && evidence.power.r_squared >= thresholds.linear_r2_min
    {
        return RegimeLabel::Linear;
    }
    let k = evidence.medians.len();
    let top_half = &evidence.medians[k - k.div_ceil(2)..];
    if top_half.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9) {
        return RegimeLabel::Bounded;
    }
    if evidence.upper_window_slope < evidence.lower_window_slope
        && evidence.polylog.r_squared >= thresholds.polylog_r2_min
    {
        return RegimeLabel::PolyLogarithmic;
    }
    RegimeLabel::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Topology;

    fn synthetic_rows(values: &[(u32, f64)]) -> Vec<SweepRow> {
        values
            .iter()
            .map(|&(n, y)| SweepRow {
                topology: Topology::Cycle,
                n,
                s: 1.0,
                beta: 1.0,
                trial: 0,
                seed: 0,
                edges: 0,
                mean_degree: 0.0,
                max_degree: 0,
                diameter: Some(y.round() as u32),
                diam_exact: Some(true),
                num_cuts: None,
                half_boundary: None,
                cheeger_arc: Some(y),
                cheeger_exact: None,
                res_p50: None,
                res_p90: None,
                res_max: None,
                tau_tv: None,
                runtime_ms: 0,
            })
            .collect()
    }

    #[test]
    fn power_law_recovers_planted_exponent() {
        let rows = synthetic_rows(&[
            (8, 56.0),
            (16, 112.0),
            (32, 224.0),
            (64, 448.0),
            (128, 896.0),
        ]);
        // cheeger_arc carries the exact values 7n
        let fit = fit_scaling(&rows, YColumn::CheegerArc, FitModel::PowerLaw).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!((fit.intercept - 7.0f64.ln()).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 5);
    }

    #[test]
    fn polylog_recovers_planted_exponent() {
        let values: Vec<(u32, f64)> = [16u32, 64, 256, 1024, 4096]
            .iter()
            .map(|&n| (n, (n as f64).ln().powi(2)))
            .collect();
        let rows = synthetic_rows(&values);
        let fit = fit_scaling(&rows, YColumn::CheegerArc, FitModel::PolyLog).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_support_points_is_an_error() {
        let rows = synthetic_rows(&[(8, 1.0), (16, 2.0)]);
        assert_eq!(
            fit_scaling(&rows, YColumn::CheegerArc, FitModel::PowerLaw),
            Err(FitError::TooFewSupportPoints { needed: 3, got: 2 })
        );
    }

    #[test]
    fn medians_are_per_n_and_interpolated() {
        let mut rows = synthetic_rows(&[(8, 1.0), (8, 3.0), (16, 5.0)]);
        rows.push(synthetic_rows(&[(32, 7.0)]).pop().unwrap());
        let med = medians_by_n(&rows, YColumn::CheegerArc);
        assert_eq!(med, vec![(8, 2.0), (16, 5.0), (32, 7.0)]);
    }

    #[test]
    fn classifier_labels_synthetic_regimes() {
        let thresholds = RegimeThresholds {
            linear_slope_min: 0.9,
            linear_r2_min: 0.98,
            polylog_r2_min: 0.9,
        };

        let linear: Vec<(u32, f64)> = [64u32, 128, 256, 512, 1024, 2048]
            .iter()
            .map(|&n| (n, 0.4 * n as f64))
            .collect();
        let ev = regime_evidence(&synthetic_rows(&linear), YColumn::CheegerArc).unwrap();
        assert_eq!(classify_regime(&ev, &thresholds), RegimeLabel::Linear);

        let bounded: Vec<(u32, f64)> = [64u32, 128, 256, 512, 1024, 2048]
            .iter()
            .map(|&n| (n, 3.0 - 1e-4 * n as f64))
            .collect();
        let ev = regime_evidence(&synthetic_rows(&bounded), YColumn::CheegerArc).unwrap();
        assert_eq!(classify_regime(&ev, &thresholds), RegimeLabel::Bounded);

        let polylog: Vec<(u32, f64)> = [64u32, 128, 256, 512, 1024, 2048]
            .iter()
            .map(|&n| (n, (n as f64).ln().powf(1.8)))
            .collect();
        let ev = regime_evidence(&synthetic_rows(&polylog), YColumn::CheegerArc).unwrap();
        assert_eq!(
            classify_regime(&ev, &thresholds),
            RegimeLabel::PolyLogarithmic
        );
    }

    #[test]
    fn column_names_round_trip() {
        for col in [
            YColumn::Diameter,
            YColumn::CheegerArc,
            YColumn::TauTv,
            YColumn::ResP90,
        ] {
            assert_eq!(col.name().parse::<YColumn>().unwrap(), col);
        }
        assert!("volume".parse::<YColumn>().is_err());
    }
}
