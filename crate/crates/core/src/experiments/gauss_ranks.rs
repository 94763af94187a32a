//! TT-SVD ranks and negative values for 4-D Gaussians with coupled pairs,
//! plus rank growth of a Hadamard product and its rounding.

use std::path::PathBuf;

use super::setup::{
    gauss_cases, gauss_grid, gaussian_tensor, pair_factor_tensor, DEFAULT_STEP, GAUSS_CORRELATION,
};
use super::{num, ranks_text, Artifacts, ExperimentConfig, ExperimentError, ExperimentResult};
use crate::error::Error;
use crate::grids::DenseTensor;
use crate::tt::{
    dense_size_ok, negativity_stats, tt_dense, tt_hadamard, tt_round, tt_svd, TensorTrain,
    MAX_DENSE_ELEMENTS,
};

/// Ranks, negativity and error of one TT-SVD case.
#[derive(Debug, Clone)]
pub struct GaussCase {
    pub label: &'static str,
    pub ranks: Vec<usize>,
    pub negative_count: usize,
    pub negative_percent: f64,
    pub min_value: f64,
    pub relative_error: f64,
    pub storage: usize,
}

/// Samples one Gaussian case and decomposes it at `eps`.
pub fn gauss_case(
    grid: &crate::grids::Grid,
    label: &'static str,
    pairs: &[(usize, usize)],
    rho: f64,
    eps: f64,
) -> crate::Result<GaussCase> {
    let t = gaussian_tensor(grid, pairs, rho)?;
    let tt = tt_svd(&t, eps)?;
    let dense = tt_dense(&tt)?;
    let neg = negativity_stats(&dense);
    let diff: f64 = dense
        .values()
        .iter()
        .zip(t.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(GaussCase {
        label,
        ranks: tt.ranks(),
        negative_count: neg.count,
        negative_percent: neg.percent(),
        min_value: neg.min_value,
        relative_error: diff.sqrt() / t.norm(),
        storage: tt.storage(),
    })
}

fn relative_error(tt: &TensorTrain, reference: &DenseTensor) -> crate::Result<f64> {
    let dense = tt_dense(tt)?;
    let diff: f64 = dense
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(diff.sqrt() / reference.norm())
}

pub fn run_gauss_ranks(cfg: &ExperimentConfig) -> ExperimentResult<Vec<PathBuf>> {
    let rho: f64 = cfg.override_parsed("correlation", GAUSS_CORRELATION)?;
    if !(rho.abs() < 1.0) {
        return Err(ExperimentError::Config(format!(
            "correlation {rho} outside (-1, 1)"
        )));
    }
    let grid = gauss_grid(cfg.step_or(DEFAULT_STEP))
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let shape = grid.shape();
    if !dense_size_ok(&shape) {
        let elements = shape.iter().map(|&n| n as u128).product();
        return Err(Error::TooLarge {
            elements,
            limit: MAX_DENSE_ELEMENTS,
        }
        .into());
    }
    let mut out = Artifacts::create(cfg)?;

    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (label, pairs) in gauss_cases() {
        let case = gauss_case(&grid, label, pairs, rho, cfg.eps)?;
        log::info!("{label}: ranks {:?}", case.ranks);
        let mut row = vec![label.to_string()];
        row.extend(case.ranks.iter().map(|r| r.to_string()));
        row.push(format!("{:.2}%", case.negative_percent));
        rows.push(row);
        details.push(vec![
            label.to_string(),
            case.negative_count.to_string(),
            num(case.negative_percent),
            num(case.min_value),
            num(case.relative_error),
            case.storage.to_string(),
        ]);
    }
    out.csv(
        "ranks.csv",
        &["case", "r0", "r1", "r2", "r3", "r4", "negative"],
        &rows,
    )?;
    out.csv(
        "details.csv",
        &[
            "case",
            "negative_count",
            "negative_percent",
            "min_value",
            "relative_error",
            "storage",
        ],
        &details,
    )?;

    let demo = hadamard_demo(&grid, rho, cfg.eps)?;
    let stage_row = |name: &str, r: &[usize]| {
        let mut row = vec![name.to_string()];
        row.extend(r.iter().map(|v| v.to_string()));
        row
    };
    out.csv(
        "hadamard.csv",
        &["stage", "r0", "r1", "r2", "r3", "r4"],
        &[
            stage_row("(1,3)", &demo.left),
            stage_row("(2,4)", &demo.right),
            stage_row("product", &demo.product),
            stage_row("rounded", &demo.rounded),
        ],
    )?;
    out.text(
        "hadamard.txt",
        &format!(
            "{} -> {}\nrounding relative error {}\n",
            ranks_text(&demo.product),
            ranks_text(&demo.rounded),
            num(demo.rounding_error)
        ),
    )?;
    Ok(out.finish())
}

/// Rank vectors of the Hadamard demonstration.
#[derive(Debug, Clone)]
pub struct HadamardDemo {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub product: Vec<usize>,
    pub rounded: Vec<usize>,
    pub rounding_error: f64,
}

/// Product of the (1,3) and (2,4) coupled factors, each constant along the
/// other two axes, followed by rounding at `eps`.
pub fn hadamard_demo(grid: &crate::grids::Grid, rho: f64, eps: f64) -> crate::Result<HadamardDemo> {
    let a = tt_svd(&pair_factor_tensor(grid, (1, 3), rho)?, eps)?;
    let b = tt_svd(&pair_factor_tensor(grid, (2, 4), rho)?, eps)?;
    let product = tt_hadamard(&a, &b)?;
    let rounded = tt_round(&product, eps)?;
    let rounding_error = relative_error(&rounded, &tt_dense(&product)?)?;
    Ok(HadamardDemo {
        left: a.ranks(),
        right: b.ranks(),
        product: product.ranks(),
        rounded: rounded.ranks(),
        rounding_error,
    })
}
