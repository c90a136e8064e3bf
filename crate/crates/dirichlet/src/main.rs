//! Command-line front end.
//!
//! Exit codes: 0 success; 1 I/O or internal error; 2 input parse error;
//! 3 domain not converged (without --allow-approximate); 4 a generator
//! supports no face; 5 tile explosion cap hit; 6 tiling radius insufficient
//! for the cutoff; 7 covering oracle failed; 8 invalid configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use dirichlet::domain::DomainError;
use dirichlet::formats::{self, GeneratorFile};
use dirichlet::moebius::Word;
use dirichlet::pipeline::{self, PipelineError, RunConfig};
use dirichlet::spectrum::SpectrumError;
use dirichlet::tiling::TilingError;
use dirichlet::tolerance::Tolerance;
use dirichlet::volume::VolumeOptions;
use dirichlet::wordprob;

#[derive(Parser)]
#[command(
    name = "dirichlet",
    about = "Approximate Dirichlet domains and length spectra for Kleinian groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Generator file.
    file: PathBuf,
    /// Output file prefix; exports go to <prefix>.<kind>.txt. Without it,
    /// the primary export is printed to stdout.
    #[arg(long)]
    out: Option<String>,
    /// Basepoint in Klein coordinates, e.g. "0.1,0,0.05".
    #[arg(long, value_parser = parse_triple)]
    basepoint: Option<[f64; 3]>,
    /// Move the basepoint to minimize the spine radius first.
    #[arg(long)]
    optimize: bool,
    /// Maximum word length for the domain construction.
    #[arg(long, default_value_t = 20)]
    max_word_length: usize,
    /// Dimensionless comparison slack.
    #[arg(long, default_value_t = Tolerance::DEFAULT_EPS_EQUAL)]
    eps_equal: f64,
    /// Hyperbolic-distance comparison slack.
    #[arg(long, default_value_t = Tolerance::DEFAULT_EPS_GEOM)]
    eps_geom: f64,
    /// Quantization cell for dedup hash keys.
    #[arg(long, default_value_t = Tolerance::DEFAULT_QUANTUM)]
    quantum: f64,
    /// Absolute tolerance requested of the volume quadrature.
    #[arg(long, default_value_t = 1e-9)]
    volume_tol: f64,
    /// Worker threads for optimizer probes.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Exit 0 even when the construction stopped at max word length.
    #[arg(long)]
    allow_approximate: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Dirichlet domain and export it with its statistics.
    Build(BuildCmd),
    /// Full pipeline: build, tile, verify, and export the length spectrum.
    Spectrum(SpectrumCmd),
    /// Decide whether two words represent the same group element.
    CheckWords(CheckWordsCmd),
    /// Parse a generator file or export and re-emit it canonically.
    Roundtrip(RoundtripCmd),
}

#[derive(Args)]
struct BuildCmd {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct SpectrumCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Real length cutoff for the spectrum.
    #[arg(long, default_value_t = 1.0)]
    cutoff: f64,
    /// Count oriented geodesics (do not merge inverse classes).
    #[arg(long)]
    oriented: bool,
    /// Tile explosion cap.
    #[arg(long, default_value_t = 1_000_000)]
    tile_cap: usize,
    /// Word length for the enumeration oracle.
    #[arg(long, default_value_t = 14)]
    oracle_max_length: usize,
    /// Element cap for the enumeration oracle.
    #[arg(long, default_value_t = 2_000_000)]
    oracle_cap: usize,
    /// Samples for the covering check.
    #[arg(long, default_value_t = 10_000)]
    coverage_samples: usize,
}

#[derive(Args)]
struct CheckWordsCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// First word, signed generator indices ("1 2 -1" or "1,2,-1").
    word1: String,
    /// Second word.
    word2: String,
}

#[derive(Args)]
struct RoundtripCmd {
    /// File to check (generator file or any export).
    file: PathBuf,
    /// Write the canonical form here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(format!("expected 3 coordinates, got {}", parts.len()));
    }
    Ok([parts[0], parts[1], parts[2]])
}

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_GENERATOR_NOT_FACE: u8 = 4;
const EXIT_EXPLOSION: u8 = 5;
const EXIT_INSUFFICIENT_RADIUS: u8 = 6;
const EXIT_ORACLE_FAILED: u8 = 7;
const EXIT_BAD_CONFIG: u8 = 8;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Build(cmd) => cmd_build(&cmd),
        Command::Spectrum(cmd) => cmd_spectrum(&cmd),
        Command::CheckWords(cmd) => cmd_check_words(&cmd),
        Command::Roundtrip(cmd) => cmd_roundtrip(&cmd),
    };
    ExitCode::from(code)
}

fn read_generator_file(path: &Path, tol: &Tolerance) -> Result<GeneratorFile, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        error!("cannot read {}: {e}", path.display());
        EXIT_IO
    })?;
    GeneratorFile::parse(&text, tol).map_err(|e| {
        error!("{}: {e}", path.display());
        EXIT_PARSE
    })
}

fn make_config(common: &CommonOpts) -> Result<RunConfig, u8> {
    let tolerance =
        Tolerance::new(common.eps_equal, common.eps_geom, common.quantum).map_err(|e| {
            error!("invalid tolerances: {e}");
            EXIT_BAD_CONFIG
        })?;
    let mut config = RunConfig {
        basepoint: common.basepoint,
        max_word_length: common.max_word_length,
        tolerance,
        optimize_basepoint: common.optimize,
        volume: VolumeOptions {
            abs_tol: common.volume_tol,
            ..VolumeOptions::default()
        },
        ..RunConfig::default()
    };
    config.optimizer.threads = common.threads.max(1);
    Ok(config)
}

fn write_or_print(out: &Option<String>, kind: &str, body: &str, primary: bool) -> Result<(), u8> {
    match out {
        Some(prefix) => {
            let path = format!("{prefix}.{kind}.txt");
            std::fs::write(&path, body).map_err(|e| {
                error!("cannot write {path}: {e}");
                EXIT_IO
            })?;
            eprintln!("wrote {path}");
            Ok(())
        }
        None => {
            if primary {
                print!("{body}");
            }
            Ok(())
        }
    }
}

fn pipeline_exit(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Domain(DomainError::GeneratorNotFace { .. }) => EXIT_GENERATOR_NOT_FACE,
        PipelineError::Domain(_) => EXIT_IO,
        PipelineError::Tiling(TilingError::ExplosionGuard { .. }) => EXIT_EXPLOSION,
        PipelineError::Tiling(_) => EXIT_IO,
        PipelineError::Spectrum(SpectrumError::InsufficientRadius { .. }) => {
            EXIT_INSUFFICIENT_RADIUS
        }
        PipelineError::Spectrum(_) => EXIT_IO,
        PipelineError::Optimizer(_) => EXIT_IO,
        PipelineError::Basepoint(_) => EXIT_BAD_CONFIG,
        PipelineError::NoSpine => EXIT_IO,
    }
}

fn cmd_build(cmd: &BuildCmd) -> u8 {
    let config = match make_config(&cmd.common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let file = match read_generator_file(&cmd.common.file, &config.tolerance) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let run = match pipeline::run_build(&file, &config) {
        Ok(r) => r,
        Err(e) => {
            error!("{e}");
            return pipeline_exit(&e);
        }
    };
    if !run.optimizer_trace.is_empty() {
        eprintln!("optimizer trace (accepted steps):");
        for (p, r) in &run.optimizer_trace {
            let k = p.to_klein();
            eprintln!("  ({:+.6}, {:+.6}, {:+.6})  spine {r:.9}", k[0], k[1], k[2]);
        }
    }
    let body = formats::emit_domain(&file.name, &run.build.poly, &run.build.stats, &config.tolerance);
    if write_or_print(&cmd.common.out, "domain", &body, true).is_err() {
        return EXIT_IO;
    }
    summarize_build(&run.build.stats);
    if !run.build.stats.converged && !cmd.common.allow_approximate {
        error!(
            "domain did not converge within word length {}",
            cmd.common.max_word_length
        );
        return EXIT_NOT_CONVERGED;
    }
    0
}

fn summarize_build(stats: &dirichlet::DomainStats) {
    eprintln!(
        "domain: {} vertices, {} edges, {} faces; injectivity {:.9}, spine {}, converged {}",
        stats.vertex_count,
        stats.edge_count,
        stats.face_count,
        stats.injectivity_radius,
        stats
            .spine_radius
            .map(|s| format!("{s:.9}"))
            .unwrap_or_else(|| "undefined".into()),
        stats.converged
    );
    if let Some(v) = stats.volume {
        eprintln!(
            "volume {:.12} (quadrature error {:.3e})",
            v.value, v.error_estimate
        );
    }
}

fn cmd_spectrum(cmd: &SpectrumCmd) -> u8 {
    let mut config = match make_config(&cmd.common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    config.lambda_cutoff = cmd.cutoff;
    config.oriented = cmd.oriented;
    config.tile_cap = cmd.tile_cap;
    config.oracle_max_length = cmd.oracle_max_length;
    config.oracle_cap = cmd.oracle_cap;
    config.coverage_samples = cmd.coverage_samples;
    let file = match read_generator_file(&cmd.common.file, &config.tolerance) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let run = match pipeline::run_spectrum(&file, &config) {
        Ok(r) => r,
        Err(e) => {
            error!("{e}");
            return pipeline_exit(&e);
        }
    };
    summarize_build(&run.build.build.stats);
    eprintln!(
        "tiling: radius {:.6}, {} tiles, oracle ball {} elements, coverage {:.4} (mean multiplicity {:.3})",
        run.radius,
        run.tiles.len(),
        run.word_ball.in_ball.len(),
        run.coverage.fraction,
        run.coverage.mean_multiplicity
    );
    eprintln!(
        "injectivity radius {:.9} with delta_v {}",
        run.report.injectivity_radius,
        run.report
            .delta_v
            .map(|d| format!("{d:+.3e}"))
            .unwrap_or_else(|| "undefined (no reference volume)".into())
    );

    let domain_body = formats::emit_domain(
        &file.name,
        &run.build.build.poly,
        &run.build.build.stats,
        &config.tolerance,
    );
    let biglist_body = formats::emit_biglist(&file.name, &run.tiles);
    let report_body = formats::emit_report(&file.name, &run.report, Some(&run.coverage));
    let spectrum_body = formats::emit_spectrum(&file.name, &run.small);
    if write_or_print(&cmd.common.out, "domain", &domain_body, false).is_err()
        || write_or_print(&cmd.common.out, "biglist", &biglist_body, false).is_err()
        || write_or_print(&cmd.common.out, "report", &report_body, false).is_err()
        || write_or_print(&cmd.common.out, "spectrum", &spectrum_body, true).is_err()
    {
        return EXIT_IO;
    }

    if !run.build.build.stats.converged && !cmd.common.allow_approximate {
        error!("domain did not converge; rerun with --allow-approximate to accept");
        return EXIT_NOT_CONVERGED;
    }
    if !run.report.oracle_passed() {
        error!(
            "covering oracle failed: {} missing, frontier closed: {}",
            run.report.oracle_missing.len(),
            run.report.oracle_frontier_closed
        );
        return EXIT_ORACLE_FAILED;
    }
    0
}

fn cmd_check_words(cmd: &CheckWordsCmd) -> u8 {
    let config = match make_config(&cmd.common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let file = match read_generator_file(&cmd.common.file, &config.tolerance) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let (w1, w2) = match (Word::parse(&cmd.word1), Word::parse(&cmd.word2)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            error!("bad word: {e}");
            return EXIT_PARSE;
        }
    };
    let tol = config.tolerance;
    let (g1, g2) = match (
        dirichlet::domain::element_of_word(&file.generators, &w1, &tol),
        dirichlet::domain::element_of_word(&file.generators, &w2, &tol),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            error!("bad word: {e}");
            return EXIT_PARSE;
        }
    };
    let run = match pipeline::run_build(&file, &config) {
        Ok(r) => r,
        Err(e) => {
            error!("{e}");
            return pipeline_exit(&e);
        }
    };
    let rho = run.build.stats.injectivity_radius;
    let ev = match wordprob::same_element_evidence(&g1, &g2, &run.basepoint, rho, &tol) {
        Ok(ev) => ev,
        Err(e) => {
            error!("{e}");
            return EXIT_BAD_CONFIG;
        }
    };
    println!(
        "words: {w1}  vs  {w2}\n\
         injectivity radius: {rho:.9} (2 rho = {:.9})\n\
         stage 1 |Re tr| gap: {:.3e}\n\
         stage 2 basepoint-distance gap: {}\n\
         stage 3 image distance: {}\n\
         verdict: {}",
        ev.two_rho,
        ev.re_trace_gap,
        if ev.base_dist_gap.is_nan() {
            "not reached".to_string()
        } else {
            format!("{:.9}", ev.base_dist_gap)
        },
        ev.image_dist
            .map(|d| format!("{d:.9}"))
            .unwrap_or_else(|| "not reached".into()),
        if ev.equal { "EQUAL" } else { "DISTINCT" }
    );
    0
}

fn cmd_roundtrip(cmd: &RoundtripCmd) -> u8 {
    let text = match std::fs::read_to_string(&cmd.file) {
        Ok(t) => t,
        Err(e) => {
            error!("cannot read {}: {e}", cmd.file.display());
            return EXIT_IO;
        }
    };
    let tol = Tolerance::default();
    match formats::roundtrip(&text, &tol) {
        Ok((kind, canonical)) => {
            if let Some(out) = &cmd.out {
                if let Err(e) = std::fs::write(out, &canonical) {
                    error!("cannot write {}: {e}", out.display());
                    return EXIT_IO;
                }
            }
            eprintln!("{:?}: round-trip OK ({} bytes canonical)", kind, canonical.len());
            0
        }
        Err(e) => {
            error!("round-trip failed: {e}");
            EXIT_PARSE
        }
    }
}
