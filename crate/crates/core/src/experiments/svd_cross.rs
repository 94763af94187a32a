//! Radar density: spectrum and the rank-by-rank anatomy of SVD and cross
//! approximations.

use std::path::PathBuf;

use super::setup::{radar_grid, radar_tensor, DEFAULT_STEP};
use super::{num, Artifacts, ExperimentConfig, ExperimentError, ExperimentResult};
use crate::densities::RadarSpec;
use crate::linalg::singular_values;
use crate::matdecomp::{update_anatomy, AnatomyStep, Method, SignStats};

pub fn run_svd_cross(cfg: &ExperimentConfig) -> ExperimentResult<Vec<PathBuf>> {
    let max_rank: usize = cfg.override_parsed("max_rank", 4)?;
    let grid = radar_grid(cfg.step_or(DEFAULT_STEP))
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let limit = grid.shape().into_iter().min().unwrap_or(0);
    if max_rank == 0 || max_rank > limit {
        return Err(ExperimentError::Config(format!(
            "max_rank must be in 1..={limit}"
        )));
    }

    let matrix = radar_tensor(&RadarSpec::default(), &grid)?.to_matrix()?;
    let mut out = Artifacts::create(cfg)?;

    let sigma = singular_values(&matrix)?;
    let rows: Vec<Vec<String>> = sigma
        .iter()
        .enumerate()
        .map(|(i, s)| vec![(i + 1).to_string(), num(*s)])
        .collect();
    out.csv("singular_values.csv", &["index", "sigma"], &rows)?;
    out.csv(
        "grid.csv",
        &["axis", "index", "value"],
        &grid
            .axes()
            .iter()
            .enumerate()
            .flat_map(|(a, axis)| {
                axis.iter()
                    .enumerate()
                    .map(move |(i, v)| vec![(a + 1).to_string(), i.to_string(), num(*v)])
            })
            .collect::<Vec<_>>(),
    )?;

    let methods = [
        ("svd", Method::Svd),
        (
            "cross",
            Method::Cross {
                seed: cfg.seed,
                mode: cfg.pivot.unwrap_or_default(),
            },
        ),
    ];
    let mut summary = Vec::new();
    for (label, method) in methods {
        let steps = update_anatomy(&matrix, method, max_rank)?;
        for step in &steps {
            let r = step.rank;
            out.matrix(
                &format!("{label}_r{r}_approximation.csv"),
                &step.approximation,
            )?;
            out.matrix(&format!("{label}_r{r}_update.csv"), &step.update)?;
            out.matrix(&format!("{label}_r{r}_error.csv"), &step.error)?;
            summary.push(summary_row(label, step));
        }
        if label == "cross" {
            let pivots: Vec<Vec<String>> = steps
                .iter()
                .filter_map(|s| s.pivot.map(|p| (s.rank, p)))
                .map(|(r, (i, j))| {
                    vec![
                        r.to_string(),
                        i.to_string(),
                        j.to_string(),
                        num(grid.axis(0)[i]),
                        num(grid.axis(1)[j]),
                    ]
                })
                .collect();
            out.csv(
                "cross_pivots.csv",
                &["rank", "row", "column", "x1", "x2"],
                &pivots,
            )?;
        }
    }
    out.csv(
        "summary.csv",
        &[
            "method",
            "rank",
            "approximation_negative",
            "approximation_min",
            "update_negative",
            "update_min",
            "error_negative",
            "error_min",
            "error_frobenius",
        ],
        &summary,
    )?;
    log::info!("svd-cross artifacts in {}", out.dir().display());
    Ok(out.finish())
}

fn summary_row(label: &str, step: &AnatomyStep) -> Vec<String> {
    let stats = |s: &SignStats| [s.negative_count.to_string(), num(s.min_value)];
    let mut row = vec![label.to_string(), step.rank.to_string()];
    row.extend(stats(&step.approximation_stats));
    row.extend(stats(&step.update_stats));
    row.extend(stats(&step.error_stats));
    row.push(num(step.error.norm()));
    row
}
