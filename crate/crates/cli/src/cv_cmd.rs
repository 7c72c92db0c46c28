use cv::{
    gaussian_modes, homodyne_pom, nonclassicality_depth, port_efficiencies, reference_state, sh_pom, square_grid,
    tmd_pom, wigner_points, DepthConfig, FockSpace, Fresnel, QuadratureSetting, ReferenceState, ShGeometry,
};
use operators::{c64, StateOp};
use pom::{gram_matrix, Pom};
use serde::Deserialize;

use crate::io::{csv_bytes, emit, header, load_config, summary};
use crate::{CliError, Common};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GridSpec {
    extent: f64,
    points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { extent: 5.0, points: 101 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DetectorSpec {
    Homodyne {
        settings: Vec<QuadratureSetting>,
    },
    /// Time-multiplexed detector with optional displacements [re, im].
    Tmd {
        transmissions: Vec<f64>,
        efficiencies: Vec<f64>,
        #[serde(default)]
        displacements: Vec<[f64; 2]>,
    },
    /// Shack-Hartmann sensor on `dim` Gaussian modes.
    Sh {
        extent: f64,
        grid_points: usize,
        apertures: usize,
        pixels_per_aperture: usize,
        fresnel: Fresnel,
        waist: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CvRun {
    /// Fock truncation, or the number of modes for the SH sensor.
    dim: usize,
    state: ReferenceState,
    #[serde(default)]
    grid: GridSpec,
    #[serde(default)]
    depth: DepthConfig,
    detector: Option<DetectorSpec>,
}

fn setup(common: &Common) -> Result<(CvRun, FockSpace, StateOp), CliError> {
    let cfg: CvRun = load_config(common.config.as_deref())?;
    let space = FockSpace::new(cfg.dim)?;
    let rho = reference_state(cfg.state, space)?;
    Ok((cfg, space, rho))
}

/// CSV x, p, w over the square grid, x fastest.
pub(crate) fn wigner(common: &Common) -> Result<(), CliError> {
    let (cfg, _, rho) = setup(common)?;
    if cfg.grid.points < 2 || !(cfg.grid.extent > 0.0) {
        return Err(CliError::Config("grid needs points ≥ 2 and a positive extent".into()));
    }
    let grid = square_grid(cfg.grid.extent, cfg.grid.points);
    let w = wigner_points(&rho, &grid);
    let rows = grid.iter().zip(&w).map(|(pt, v)| vec![pt.x.to_string(), pt.p.to_string(), v.to_string()]);
    emit(common.out.as_deref(), &csv_bytes(&header(&["x", "p", "w"]), rows)?)?;
    let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    summary(&format!("points={} min_w={min}", w.len()));
    Ok(())
}

/// CSV tau, min_r of the scan; the depth goes to the summary line.
pub(crate) fn depth(common: &Common) -> Result<(), CliError> {
    let (cfg, _, rho) = setup(common)?;
    let result = nonclassicality_depth(&rho, &cfg.depth)?;
    let rows = result.scan.iter().map(|(t, r)| vec![t.to_string(), r.to_string()]);
    emit(common.out.as_deref(), &csv_bytes(&header(&["tau", "min_r"]), rows)?)?;
    summary(&format!("depth={} half_width={}", result.tau, result.half_width));
    Ok(())
}

/// CSV outcome, probability for the configured state; Gram rank in the summary.
pub(crate) fn pom(common: &Common) -> Result<(), CliError> {
    let (cfg, space, rho) = setup(common)?;
    let pom: Pom = match cfg.detector {
        None => return Err(CliError::Config("cv pom needs a [detector] section".into())),
        Some(DetectorSpec::Homodyne { settings }) => homodyne_pom(space, &settings)?,
        Some(DetectorSpec::Tmd { transmissions, efficiencies, displacements }) => {
            let eff = port_efficiencies(&transmissions, &efficiencies)?;
            let alphas: Vec<_> = displacements.iter().map(|[re, im]| c64(*re, *im)).collect();
            tmd_pom(space, &eff, &alphas)?
        }
        Some(DetectorSpec::Sh { extent, grid_points, apertures, pixels_per_aperture, fresnel, waist }) => {
            let geom = ShGeometry::tiled(extent, grid_points, apertures, pixels_per_aperture, fresnel)?;
            sh_pom(&gaussian_modes(cfg.dim, &geom.grid, waist)?, &geom)?
        }
    };
    let probs = pom.probabilities(&rho);
    let rows = probs.iter().enumerate().map(|(i, p)| vec![i.to_string(), p.to_string()]);
    emit(common.out.as_deref(), &csv_bytes(&header(&["outcome", "probability"]), rows)?)?;
    let rank = gram_matrix(&pom).1;
    summary(&format!(
        "outcomes={} dim={} gram_rank={rank} informationally_complete={}",
        pom.len(),
        pom.dim(),
        rank == pom.dim() * pom.dim()
    ));
    Ok(())
}
