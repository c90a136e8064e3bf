//! End-to-end orchestration shared by the CLI and the C bindings.

use log::info;
use thiserror::Error;

use crate::domain::{build_domain, BuildOptions, BuildResult, DomainError};
use crate::formats::GeneratorFile;
use crate::minkowski::{MinkowskiPoint, ModelError};
use crate::optimizer::{minimize_spine_radius, OptimizerError, OptimizerParams};
use crate::spectrum::{big_to_small, SmallList, SpectrumError};
use crate::tiling::{
    enumerate_words, theorem1_diagnostics, tile_ball, tiling_radius, verify_covering,
    CoverageReport, TileSet, TilingError, VerificationReport, WordBall,
};
use crate::tolerance::Tolerance;
use crate::volume::VolumeOptions;

/// Seed for the coverage sampler; fixed so identical runs produce identical
/// outputs.
pub const COVERAGE_SEED: u64 = 0x00d1_81c4;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("basepoint is invalid: {0}")]
    Basepoint(#[from] ModelError),
    #[error("domain has no spine radius; the tiling radius is undefined")]
    NoSpine,
}

/// Run configuration; defaults follow the documented CLI defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Basepoint in Klein coordinates (overridden by the input file's
    /// `basepoint` line when absent here).
    pub basepoint: Option<[f64; 3]>,
    pub lambda_cutoff: f64,
    pub max_word_length: usize,
    pub tolerance: Tolerance,
    pub optimize_basepoint: bool,
    pub optimizer: OptimizerParams,
    pub tile_cap: usize,
    pub oracle_max_length: usize,
    pub oracle_cap: usize,
    /// Stop the oracle after this many word lengths without a new in-ball
    /// element (0 = run to `oracle_max_length`).
    pub oracle_quiet_stop: usize,
    pub coverage_samples: usize,
    pub oriented: bool,
    pub volume: VolumeOptions,
    pub compute_volume: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            basepoint: None,
            lambda_cutoff: 1.0,
            max_word_length: 20,
            tolerance: Tolerance::default(),
            optimize_basepoint: false,
            optimizer: OptimizerParams::default(),
            tile_cap: 1_000_000,
            oracle_max_length: 14,
            oracle_cap: 2_000_000,
            oracle_quiet_stop: 3,
            coverage_samples: 10_000,
            oriented: false,
            volume: VolumeOptions::default(),
            compute_volume: true,
        }
    }
}

impl RunConfig {
    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            max_word_length: self.max_word_length,
            tolerance: self.tolerance,
            compute_volume: self.compute_volume,
            volume: self.volume,
        }
    }

    /// Resolve the basepoint: explicit config, then file, then origin.
    pub fn resolve_basepoint(&self, file: &GeneratorFile) -> Result<MinkowskiPoint, ModelError> {
        let coords = self.basepoint.or(file.basepoint);
        match coords {
            Some([x, y, z]) => {
                MinkowskiPoint::from_klein(&nalgebra::Vector3::new(x, y, z))
            }
            None => Ok(MinkowskiPoint::origin()),
        }
    }
}

/// Result of the build stage (optionally basepoint-optimized).
pub struct BuildRun {
    pub basepoint: MinkowskiPoint,
    pub build: BuildResult,
    /// Accepted-spine trace when the optimizer ran.
    pub optimizer_trace: Vec<(MinkowskiPoint, f64)>,
}

pub fn run_build(file: &GeneratorFile, config: &RunConfig) -> Result<BuildRun, PipelineError> {
    let x0 = config.resolve_basepoint(file)?;
    if config.optimize_basepoint {
        let r = minimize_spine_radius(
            &file.generators,
            &x0,
            &config.optimizer,
            &config.build_options(),
        )?;
        info!(
            "optimizer: spine radius {:.9} -> {:.9} in {} accepted steps",
            r.trace.first().map(|t| t.spine_radius).unwrap_or(f64::NAN),
            r.trace.last().map(|t| t.spine_radius).unwrap_or(f64::NAN),
            r.trace.len() - 1
        );
        Ok(BuildRun {
            basepoint: r.x_star,
            optimizer_trace: r.trace.iter().map(|t| (t.point, t.spine_radius)).collect(),
            build: r.build,
        })
    } else {
        let build = build_domain(&file.generators, &x0, &config.build_options())?;
        Ok(BuildRun {
            basepoint: x0,
            build,
            optimizer_trace: Vec::new(),
        })
    }
}

/// Result of the full spectrum pipeline.
pub struct SpectrumRun {
    pub build: BuildRun,
    pub radius: f64,
    pub tiles: TileSet,
    pub word_ball: WordBall,
    pub coverage: CoverageReport,
    pub report: VerificationReport,
    pub small: SmallList,
}

pub fn run_spectrum(file: &GeneratorFile, config: &RunConfig) -> Result<SpectrumRun, PipelineError> {
    let build_run = run_build(file, config)?;
    let poly = &build_run.build.poly;
    let stats = &build_run.build.stats;
    let spine = stats.spine_radius.ok_or(PipelineError::NoSpine)?;
    let radius = tiling_radius(spine, config.lambda_cutoff);
    info!(
        "tiling radius {radius:.6} from spine {spine:.6} and cutoff {}",
        config.lambda_cutoff
    );
    let tiles = tile_ball(poly, radius, config.tile_cap, &config.tolerance)?;
    // The oracle is compared against the tiling inside B(x, R); enumerating
    // to the retention radius would chase word-metric stragglers far outside
    // the ball being verified.
    let word_ball = enumerate_words(
        &file.generators,
        config.oracle_max_length,
        radius,
        &build_run.basepoint,
        config.oracle_cap,
        config.oracle_quiet_stop,
        &config.tolerance,
    )?;
    let coverage = verify_covering(
        &tiles,
        poly,
        config.coverage_samples,
        COVERAGE_SEED,
        &config.tolerance,
    );
    let report = theorem1_diagnostics(
        poly,
        &tiles,
        &word_ball,
        file.reference_volume,
        stats.volume,
        &config.tolerance,
    );
    let small = big_to_small(
        &tiles,
        config.lambda_cutoff,
        &build_run.basepoint,
        stats.injectivity_radius,
        spine,
        config.oriented,
        &config.tolerance,
    )?;
    Ok(SpectrumRun {
        build: build_run,
        radius,
        tiles,
        word_ball,
        coverage,
        report,
        small,
    })
}
