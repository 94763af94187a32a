//! Squeezed ranks of functional trains for 4-D quadratic forms, with
//! evaluation residuals at random points.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::setup::QUADRATIC_CASES;
use super::{num, Artifacts, ExperimentConfig, ExperimentError, ExperimentResult};
use crate::quadratic::{build_quadratic_cores, eval_quadratic_cores, squeeze_cores, SymmetricQ};

/// Random points are drawn uniformly from `[-RANGE, RANGE]^4`.
const RANGE: f64 = 3.0;

pub fn run_quadratic(cfg: &ExperimentConfig) -> ExperimentResult<Vec<PathBuf>> {
    let points: usize = cfg.override_parsed("points", 1000)?;
    if points == 0 {
        return Err(ExperimentError::Config("points must be positive".into()));
    }
    let mut out = Artifacts::create(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ranks = Vec::new();
    let mut residuals = Vec::new();
    for (label, pairs) in QUADRATIC_CASES {
        let q = SymmetricQ::with_pairs(4, 1.0, 0.5, pairs)?;
        let full = build_quadratic_cores(&q)?;
        let squeezed = squeeze_cores(&full);
        let mut row = vec![label.to_string()];
        row.extend(squeezed.ranks().iter().map(|r| r.to_string()));
        ranks.push(row);

        let (mut worst_full, mut worst_squeezed) = (0.0f64, 0.0f64);
        for _ in 0..points {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-RANGE..=RANGE)).collect();
            let exact = q.form(&x);
            let scale = 1.0 + exact.abs();
            worst_full = worst_full.max((eval_quadratic_cores(&full, &x)? - exact).abs() / scale);
            worst_squeezed =
                worst_squeezed.max((eval_quadratic_cores(&squeezed, &x)? - exact).abs() / scale);
        }
        residuals.push(vec![
            label.to_string(),
            points.to_string(),
            num(worst_full),
            num(worst_squeezed),
        ]);
    }
    out.csv("ranks.csv", &["case", "r0", "r1", "r2", "r3", "r4"], &ranks)?;
    out.csv(
        "residuals.csv",
        &[
            "case",
            "points",
            "max_residual_full",
            "max_residual_squeezed",
        ],
        &residuals,
    )?;
    Ok(out.finish())
}
