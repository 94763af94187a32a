//! Radar density moved to decorrelated coordinates with each square root
//! of its estimated covariance.

use std::path::PathBuf;

use super::setup::{
    radar_grid, radar_tensor, target_grid, DEFAULT_STEP, TARGET_HALF_WIDTH, TARGET_STEP,
};
use super::{num, Artifacts, ExperimentConfig, ExperimentError, ExperimentResult};
use crate::densities::RadarSpec;
use crate::grids::{for_each_index, Grid};
use crate::gridtransform::{
    spectrum_comparison, spectrum_comparison_with_map, GridMap, SpectrumComparison, SquareRootKind,
};

/// Leading singular values that interpolation must leave almost unchanged.
pub const PLATEAU_LEN: usize = 8;
/// Allowed band for `sigma_interp / sigma_exact` over the plateau.
pub const PLATEAU_BAND: (f64, f64) = (0.5, 2.0);
/// 1-based index where interpolation noise must dominate.
pub const NOISE_INDEX: usize = 20;
/// Minimum `sigma_interp / sigma_exact` at [`NOISE_INDEX`].
pub const NOISE_MIN_RATIO: f64 = 10.0;

/// Ratios of interpolated to exact spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub noise_ratio: f64,
}

impl PlateauReport {
    pub fn of(exact: &[f64], interpolated: &[f64]) -> Option<Self> {
        if exact.len() < NOISE_INDEX || interpolated.len() < NOISE_INDEX {
            return None;
        }
        let ratios: Vec<f64> = (0..PLATEAU_LEN)
            .map(|i| interpolated[i] / exact[i])
            .collect();
        Some(PlateauReport {
            min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            noise_ratio: interpolated[NOISE_INDEX - 1] / exact[NOISE_INDEX - 1],
        })
    }

    pub fn holds(&self) -> bool {
        self.min_ratio >= PLATEAU_BAND.0
            && self.max_ratio <= PLATEAU_BAND.1
            && self.noise_ratio >= NOISE_MIN_RATIO
    }
}

/// Spectra of the default radar density for one square root.
pub fn radar_spectra(
    step: f64,
    kind: SquareRootKind,
    target: &Grid,
) -> crate::Result<SpectrumComparison> {
    let spec = RadarSpec::default();
    let grid = radar_grid(step)?;
    let density = radar_tensor(&spec, &grid)?;
    let exact = |x: &[f64]| spec.density(x[0], x[1]);
    spectrum_comparison(&density, &grid, kind, target, Some(&exact))
}

pub fn run_grid_transform(cfg: &ExperimentConfig) -> ExperimentResult<Vec<PathBuf>> {
    let identity = match cfg.overrides.get("map").map(String::as_str) {
        None | Some("estimated") => false,
        Some("identity") => true,
        Some(other) => {
            return Err(ExperimentError::Config(format!(
                "map must be estimated or identity, got '{other}'"
            )))
        }
    };
    let step: f64 = cfg.override_parsed("target_step", TARGET_STEP)?;
    let half: f64 = cfg.override_parsed("target_half_width", TARGET_HALF_WIDTH)?;
    let config = |e: crate::Error| ExperimentError::Config(e.to_string());
    let source_grid = radar_grid(cfg.step_or(DEFAULT_STEP)).map_err(config)?;
    // With the identity map the nodes coincide with the source grid.
    let target = if identity {
        source_grid.clone()
    } else {
        target_grid(step, half).map_err(config)?
    };

    let spec = RadarSpec::default();
    let density = radar_tensor(&spec, &source_grid)?;
    let exact = |x: &[f64]| spec.density(x[0], x[1]);

    let runs: Vec<(String, SpectrumComparison)> = if identity {
        let map = GridMap::identity(2);
        vec![(
            "identity".into(),
            spectrum_comparison_with_map(&density, &source_grid, map, &target, Some(&exact))?,
        )]
    } else {
        let kinds: Vec<SquareRootKind> = cfg.root.map_or(SquareRootKind::ALL.to_vec(), |k| vec![k]);
        kinds
            .into_iter()
            .map(|k| {
                Ok((
                    k.name().to_string(),
                    spectrum_comparison(&density, &source_grid, k, &target, Some(&exact))?,
                ))
            })
            .collect::<crate::Result<_>>()?
    };

    let mut out = Artifacts::create(cfg)?;
    let mut summary = Vec::new();
    for (name, cmp) in &runs {
        let exact_s = cmp.exact_resample.as_deref().unwrap_or(&[]);
        let n = cmp
            .original
            .len()
            .max(exact_s.len())
            .max(cmp.interpolated.len());
        let cell = |v: &[f64], i: usize| v.get(i).map_or(String::new(), |x| num(*x));
        let spectra: Vec<Vec<String>> = (0..n)
            .map(|i| {
                vec![
                    (i + 1).to_string(),
                    cell(&cmp.original, i),
                    cell(exact_s, i),
                    cell(&cmp.interpolated, i),
                ]
            })
            .collect();
        out.csv(
            &format!("{name}_spectra.csv"),
            &[
                "index",
                "sigma_original",
                "sigma_exact_resample",
                "sigma_interpolated",
            ],
            &spectra,
        )?;

        let mut points = Vec::with_capacity(target.len());
        for_each_index(&target.shape(), |_, idx| {
            let y = target.point(idx);
            let x = cmp.map.to_source(&y);
            points.push(vec![
                idx[0].to_string(),
                idx[1].to_string(),
                num(y[0]),
                num(y[1]),
                num(x[0]),
                num(x[1]),
            ]);
        });
        out.csv(
            &format!("{name}_grid.csv"),
            &["i", "j", "y1", "y2", "x1", "x2"],
            &points,
        )?;

        let mut moments = Vec::new();
        for (i, m) in cmp.moments.mean.iter().enumerate() {
            moments.push(vec![
                "mean".into(),
                (i + 1).to_string(),
                String::new(),
                num(*m),
            ]);
        }
        for (label, mat) in [
            ("covariance", &cmp.moments.covariance),
            ("root", cmp.map.root()),
        ] {
            for i in 0..mat.nrows() {
                for j in 0..mat.ncols() {
                    moments.push(vec![
                        label.into(),
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        num(mat[(i, j)]),
                    ]);
                }
            }
        }
        moments.push(vec![
            "mass".into(),
            String::new(),
            String::new(),
            num(cmp.moments.mass),
        ]);
        out.csv(
            &format!("{name}_moments.csv"),
            &["quantity", "i", "j", "value"],
            &moments,
        )?;
        out.matrix(
            &format!("{name}_interpolated.csv"),
            &cmp.interpolated_tensor.to_matrix()?,
        )?;

        let report = PlateauReport::of(exact_s, &cmp.interpolated);
        let sigma20 = |v: &[f64]| v.get(NOISE_INDEX - 1).map_or(String::new(), |x| num(*x));
        summary.push(vec![
            name.clone(),
            sigma20(exact_s),
            sigma20(&cmp.interpolated),
            report.map_or(String::new(), |r| num(r.min_ratio)),
            report.map_or(String::new(), |r| num(r.max_ratio)),
            report.map_or(String::new(), |r| num(r.noise_ratio)),
        ]);
    }
    out.csv(
        "summary.csv",
        &[
            "root",
            "sigma20_exact",
            "sigma20_interpolated",
            "plateau_min_ratio",
            "plateau_max_ratio",
            "sigma20_ratio",
        ],
        &summary,
    )?;
    Ok(out.finish())
}
