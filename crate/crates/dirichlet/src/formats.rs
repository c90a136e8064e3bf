//! File formats: generator input files and the canonical text exports.
//!
//! All exports are line-oriented, emitted in a canonical form (floats with
//! 17 significant digits, fixed field order) so identical runs produce
//! byte-identical files, and every export can be parsed back by the tool.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::domain::DomainStats;
use crate::moebius::{MoebiusElement, Word};
use crate::polyhedron::DirichletPolyhedron;
use crate::spectrum::SmallList;
use crate::tiling::{CoverageReport, TileSet, VerificationReport};
use crate::tolerance::Tolerance;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("file is empty")]
    Empty,
    #[error("unknown export header {0:?}")]
    UnknownHeader(String),
    #[error(transparent)]
    Moebius(#[from] crate::moebius::MoebiusError),
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        msg: msg.into(),
    }
}

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// 12 significant digits, for the small-list export.
pub fn fmt_f64_12(x: f64) -> String {
    format!("{x:.11e}")
}

/// A parsed generator file. Raw entries are kept so the canonical emission
/// is bit-faithful to what was parsed.
#[derive(Debug, Clone)]
pub struct GeneratorFile {
    pub name: String,
    pub reference_volume: Option<f64>,
    /// Optional basepoint in Klein coordinates.
    pub basepoint: Option<[f64; 3]>,
    pub labels: Vec<String>,
    pub raw_entries: Vec<[Complex64; 4]>,
    pub generators: Vec<MoebiusElement>,
    pub relators: Vec<Word>,
}

impl GeneratorFile {
    pub fn parse(text: &str, tol: &Tolerance) -> Result<Self, FormatError> {
        let mut name = String::from("unnamed");
        let mut reference_volume = None;
        let mut basepoint = None;
        let mut labels: Vec<String> = Vec::new();
        let mut raw_entries: Vec<[Complex64; 4]> = Vec::new();
        let mut relators = Vec::new();

        let mut pending_rows: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut lines = text.lines().enumerate().peekable();
        while let Some((idx, line)) = lines.next() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap();
            match key {
                "name" => {
                    name = toks.collect::<Vec<_>>().join(" ");
                    if name.is_empty() {
                        return Err(err(lineno, "name requires a value"));
                    }
                }
                "reference_volume" => {
                    let v: f64 = toks
                        .next()
                        .ok_or_else(|| err(lineno, "reference_volume requires a value"))?
                        .parse()
                        .map_err(|e| err(lineno, format!("bad float: {e}")))?;
                    reference_volume = Some(v);
                }
                "basepoint" => {
                    let vals: Vec<f64> = toks
                        .map(|t| t.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| err(lineno, format!("bad float: {e}")))?;
                    if vals.len() != 3 {
                        return Err(err(lineno, "basepoint requires 3 Klein coordinates"));
                    }
                    basepoint = Some([vals[0], vals[1], vals[2]]);
                }
                "generator" => {
                    let label = toks
                        .next()
                        .map(str::to_string)
                        .unwrap_or_else(|| auto_label(labels.len()));
                    pending_rows.clear();
                    while pending_rows.len() < 2 {
                        let Some((ridx, row)) = lines.next() else {
                            return Err(err(lineno, "generator matrix truncated"));
                        };
                        let rno = ridx + 1;
                        let row = row.trim();
                        if row.is_empty() || row.starts_with('#') {
                            continue;
                        }
                        let vals: Vec<f64> = row
                            .split_whitespace()
                            .map(|t| t.parse::<f64>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| err(rno, format!("bad matrix entry: {e}")))?;
                        if vals.len() != 4 {
                            return Err(err(
                                rno,
                                format!("matrix row needs 4 reals (re im re im), got {}", vals.len()),
                            ));
                        }
                        pending_rows.push((rno, vals));
                    }
                    let r0 = &pending_rows[0].1;
                    let r1 = &pending_rows[1].1;
                    let entries = [
                        Complex64::new(r0[0], r0[1]),
                        Complex64::new(r0[2], r0[3]),
                        Complex64::new(r1[0], r1[1]),
                        Complex64::new(r1[2], r1[3]),
                    ];
                    labels.push(label);
                    raw_entries.push(entries);
                }
                "relator" => {
                    let w = Word::parse(&toks.collect::<Vec<_>>().join(" "))
                        .map_err(|e| err(lineno, e.to_string()))?;
                    relators.push(w);
                }
                other => {
                    return Err(err(lineno, format!("unknown directive {other:?}")));
                }
            }
        }
        if raw_entries.is_empty() {
            return Err(FormatError::Empty);
        }
        let mut generators = Vec::with_capacity(raw_entries.len());
        for (i, entries) in raw_entries.iter().enumerate() {
            let g = MoebiusElement::normalize(*entries, Word::single(i as i32 + 1), tol)
                .map_err(|e| err(0, format!("generator {}: {e}", labels[i])))?;
            generators.push(g);
        }
        // Relator indices must reference existing generators.
        for w in &relators {
            for &l in &w.0 {
                let idx = l.unsigned_abs() as usize;
                if idx == 0 || idx > generators.len() {
                    return Err(err(0, format!("relator references generator {l}")));
                }
            }
        }
        Ok(GeneratorFile {
            name,
            reference_volume,
            basepoint,
            labels,
            raw_entries,
            generators,
            relators,
        })
    }

    /// Canonical emission; parsing it back reproduces the same values bit
    /// for bit.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# dirichlet generator file");
        let _ = writeln!(s, "name {}", self.name);
        if let Some(v) = self.reference_volume {
            let _ = writeln!(s, "reference_volume {}", fmt_f64(v));
        }
        if let Some(b) = self.basepoint {
            let _ = writeln!(
                s,
                "basepoint {} {} {}",
                fmt_f64(b[0]),
                fmt_f64(b[1]),
                fmt_f64(b[2])
            );
        }
        for (label, e) in self.labels.iter().zip(&self.raw_entries) {
            let _ = writeln!(s, "generator {label}");
            let _ = writeln!(
                s,
                "  {} {} {} {}",
                fmt_f64(e[0].re),
                fmt_f64(e[0].im),
                fmt_f64(e[1].re),
                fmt_f64(e[1].im)
            );
            let _ = writeln!(
                s,
                "  {} {} {} {}",
                fmt_f64(e[2].re),
                fmt_f64(e[2].im),
                fmt_f64(e[3].re),
                fmt_f64(e[3].im)
            );
        }
        for w in &self.relators {
            let _ = writeln!(s, "relator {w}");
        }
        s
    }
}

fn auto_label(i: usize) -> String {
    let c = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        c.to_string()
    } else {
        format!("{c}{}", i / 26)
    }
}

fn fmt_stat_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => "undefined".into(),
    }
}

/// Canonical polyhedron export.
pub fn emit_domain(
    name: &str,
    poly: &DirichletPolyhedron,
    stats: &DomainStats,
    tol: &Tolerance,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dirichlet-domain v1");
    let _ = writeln!(s, "name {name}");
    let b = &poly.basepoint.0;
    let _ = writeln!(
        s,
        "basepoint {} {} {} {}",
        fmt_f64(b[0]),
        fmt_f64(b[1]),
        fmt_f64(b[2]),
        fmt_f64(b[3])
    );
    let _ = writeln!(
        s,
        "tolerance eps_equal {} eps_geom {} quantum {}",
        fmt_f64(tol.eps_equal),
        fmt_f64(tol.eps_geom),
        fmt_f64(tol.quantum)
    );
    let _ = writeln!(
        s,
        "stats injectivity_radius {}",
        fmt_f64(stats.injectivity_radius)
    );
    let _ = writeln!(s, "stats spine_radius {}", fmt_stat_opt(stats.spine_radius));
    match stats.volume {
        Some(v) => {
            let _ = writeln!(
                s,
                "stats volume {} quadrature_error {}",
                fmt_f64(v.value),
                fmt_f64(v.error_estimate)
            );
        }
        None => {
            let _ = writeln!(s, "stats volume unbounded");
        }
    }
    let _ = writeln!(
        s,
        "stats max_vertex_distance {}",
        fmt_stat_opt(stats.max_vertex_distance)
    );
    let _ = writeln!(s, "stats word_length_reached {}", stats.word_length_reached);
    let _ = writeln!(s, "stats converged {}", stats.converged);
    let _ = writeln!(s, "stats synthetic_faces {}", stats.synthetic_faces);
    let _ = writeln!(s, "stats ideal_vertices {}", stats.has_ideal_vertices);
    let _ = writeln!(s, "stats near_misses {}", stats.near_miss_count);
    let _ = writeln!(
        s,
        "counts vertices {} edges {} faces {}",
        poly.vertices.len(),
        poly.edges().len(),
        poly.faces.len()
    );
    for (i, v) in poly.vertices.iter().enumerate() {
        let _ = writeln!(
            s,
            "vertex {i} {} {} {} ideal {}",
            fmt_f64(v[0]),
            fmt_f64(v[1]),
            fmt_f64(v[2]),
            u8::from(poly.is_vertex_ideal(i))
        );
    }
    for (i, f) in poly.faces.iter().enumerate() {
        let cycle = f
            .cycle
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(s, "face {i} cycle {cycle}");
        match &f.element {
            Some(e) => {
                let _ = writeln!(s, "face {i} word {}", e.word);
                let _ = writeln!(
                    s,
                    "face {i} matrix {} {} {} {} {} {} {} {}",
                    fmt_f64(e.a.re),
                    fmt_f64(e.a.im),
                    fmt_f64(e.b.re),
                    fmt_f64(e.b.im),
                    fmt_f64(e.c.re),
                    fmt_f64(e.c.im),
                    fmt_f64(e.d.re),
                    fmt_f64(e.d.im)
                );
            }
            None => {
                let _ = writeln!(s, "face {i} synthetic");
            }
        }
        match f.paired {
            Some(j) => {
                let _ = writeln!(s, "face {i} paired {j}");
            }
            None => {
                let _ = writeln!(s, "face {i} paired none");
            }
        }
    }
    let _ = writeln!(s, "end");
    s
}

/// Big-list export: one record per tile.
pub fn emit_biglist(name: &str, tiles: &TileSet) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dirichlet-biglist v1");
    let _ = writeln!(s, "name {name}");
    let _ = writeln!(
        s,
        "radius {} retention {}",
        fmt_f64(tiles.radius),
        fmt_f64(tiles.retention_radius)
    );
    let _ = writeln!(s, "count {}", tiles.len());
    for (i, t) in tiles.tiles.iter().enumerate() {
        let e = &t.element;
        let _ = writeln!(
            s,
            "tile {i} depth {} distance {} word {} matrix {} {} {} {} {} {} {} {}",
            t.depth,
            fmt_f64(t.base_dist),
            e.word,
            fmt_f64(e.a.re),
            fmt_f64(e.a.im),
            fmt_f64(e.b.re),
            fmt_f64(e.b.im),
            fmt_f64(e.c.re),
            fmt_f64(e.c.im),
            fmt_f64(e.d.re),
            fmt_f64(e.d.im)
        );
    }
    let _ = writeln!(s, "end");
    s
}

/// Small-list export: comma-separated `lambda,theta,multiplicity,words`.
pub fn emit_spectrum(name: &str, small: &SmallList) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dirichlet-spectrum v1");
    let _ = writeln!(s, "name {name}");
    let _ = writeln!(
        s,
        "cutoff {} oriented {}",
        fmt_f64_12(small.lambda_cutoff),
        small.oriented
    );
    let _ = writeln!(s, "lambda,theta,multiplicity,words");
    for e in &small.entries {
        let words = e
            .representatives
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64_12(e.length.lambda),
            fmt_f64_12(e.length.theta),
            e.multiplicity,
            words
        );
    }
    for x in &small.exclusions {
        let _ = writeln!(s, "exclusion,{},{}", x.word, x.reason);
    }
    let _ = writeln!(s, "end");
    s
}

/// Verification report export.
pub fn emit_report(
    name: &str,
    report: &VerificationReport,
    coverage: Option<&CoverageReport>,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dirichlet-report v1");
    let _ = writeln!(s, "name {name}");
    let _ = writeln!(
        s,
        "reference_volume {}",
        fmt_stat_opt(report.reference_volume)
    );
    match report.computed_volume {
        Some(v) => {
            let _ = writeln!(
                s,
                "computed_volume {} quadrature_error {}",
                fmt_f64(v.value),
                fmt_f64(v.error_estimate)
            );
        }
        None => {
            let _ = writeln!(s, "computed_volume undefined");
        }
    }
    let _ = writeln!(s, "delta_v {}", fmt_stat_opt(report.delta_v));
    let _ = writeln!(
        s,
        "injectivity_radius {}",
        fmt_f64(report.injectivity_radius)
    );
    let _ = writeln!(
        s,
        "spine_radius_upper_bound {}",
        fmt_stat_opt(report.spine_radius_upper_bound)
    );
    let _ = writeln!(
        s,
        "tiling_ball_radius {}",
        fmt_f64(report.tiling_ball_radius)
    );
    let _ = writeln!(s, "ndd_upper {}", fmt_stat_opt(report.ndd_upper));
    let _ = writeln!(
        s,
        "hidden_wall_area_lower {}",
        fmt_f64(report.hidden_wall_area_lower)
    );
    let _ = writeln!(
        s,
        "extra_area_lower {}",
        fmt_stat_opt(report.extra_area_lower)
    );
    let _ = writeln!(s, "tile_count {}", report.tile_count);
    let _ = writeln!(s, "word_ball_count {}", report.word_ball_count);
    let _ = writeln!(
        s,
        "oracle_frontier_closed {}",
        report.oracle_frontier_closed
    );
    let _ = writeln!(s, "oracle_missing {}", report.oracle_missing.len());
    for w in &report.oracle_missing {
        let _ = writeln!(s, "missing {w}");
    }
    let _ = writeln!(s, "oracle_extra {}", report.oracle_extra.len());
    for w in &report.oracle_extra {
        let _ = writeln!(s, "extra {w}");
    }
    if let Some(c) = coverage {
        let _ = writeln!(
            s,
            "coverage fraction {} mean_multiplicity {} samples {}",
            fmt_f64(c.fraction),
            fmt_f64(c.mean_multiplicity),
            c.samples
        );
    }
    let _ = writeln!(s, "verdict {}", if report.oracle_passed() { "pass" } else { "fail" });
    let _ = writeln!(s, "end");
    s
}

/// Which export type a file contains, from its header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    GeneratorFile,
    Domain,
    BigList,
    Spectrum,
    Report,
}

pub fn detect_kind(text: &str) -> Result<ExportKind, FormatError> {
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        return Ok(match t {
            "dirichlet-domain v1" => ExportKind::Domain,
            "dirichlet-biglist v1" => ExportKind::BigList,
            "dirichlet-spectrum v1" => ExportKind::Spectrum,
            "dirichlet-report v1" => ExportKind::Report,
            _ if t.starts_with("dirichlet-") => {
                return Err(FormatError::UnknownHeader(t.to_string()))
            }
            _ => ExportKind::GeneratorFile,
        });
    }
    Err(FormatError::Empty)
}

/// Round-trip check: parse a canonical export and re-emit it byte-for-byte.
/// Generator files are first canonicalized (comments and spacing are not
/// preserved), then required to be a fixed point of parse-emit.
pub fn roundtrip(text: &str, tol: &Tolerance) -> Result<(ExportKind, String), FormatError> {
    let kind = detect_kind(text)?;
    let canonical = match kind {
        ExportKind::GeneratorFile => {
            let f = GeneratorFile::parse(text, tol)?;
            let emitted = f.emit();
            let again = GeneratorFile::parse(&emitted, tol)?;
            if again.emit() != emitted {
                return Err(err(0, "generator file is not a parse-emit fixed point"));
            }
            if again.raw_entries != f.raw_entries {
                return Err(err(0, "matrix entries changed across the round trip"));
            }
            emitted
        }
        // Canonical exports round-trip through a literal reparse of tokens:
        // floats are re-parsed and re-formatted, which must be the identity.
        ExportKind::Domain | ExportKind::BigList | ExportKind::Spectrum | ExportKind::Report => {
            reformat_export(text)?
        }
    };
    Ok((kind, canonical))
}

/// Re-parse every numeric token of a canonical export and re-format it; the
/// result must equal the input byte-for-byte for a well-formed export.
fn reformat_export(text: &str) -> Result<String, FormatError> {
    let mut out = String::with_capacity(text.len());
    for (idx, line) in text.lines().enumerate() {
        let mut pieces: Vec<String> = Vec::new();
        for chunk in line.split(' ') {
            let cells: Vec<String> = chunk
                .split(',')
                .map(|tok| reformat_token(tok, idx + 1))
                .collect::<Result<_, _>>()?;
            pieces.push(cells.join(","));
        }
        out.push_str(&pieces.join(" "));
        out.push('\n');
    }
    if out != text {
        return Err(err(0, "export is not canonical (reformat changed bytes)"));
    }
    Ok(out)
}

fn reformat_token(tok: &str, lineno: usize) -> Result<String, FormatError> {
    if !looks_like_float(tok) {
        return Ok(tok.to_string());
    }
    let v: f64 = tok
        .parse()
        .map_err(|e| err(lineno, format!("bad float token {tok:?}: {e}")))?;
    // The mantissa length distinguishes the two precision classes used by
    // the exports (17 versus 12 significant digits).
    let mantissa = tok.split('e').next().unwrap_or(tok);
    Ok(if mantissa.trim_start_matches('-').len() > 14 {
        fmt_f64(v)
    } else {
        fmt_f64_12(v)
    })
}

fn looks_like_float(tok: &str) -> bool {
    tok.contains('e')
        && tok.contains('.')
        && tok
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | '-' | '+'))
        && tok.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-')
}
