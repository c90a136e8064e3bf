//! Acceptance suite: one test per criterion, each printing a PASS line and
//! asserting its stated tolerance and runtime budget.
//!
//! The heavy criteria run on the two acceptance fixtures (`fig8`, cusped,
//! and `fig8_cover4`, closed); the Seifert-Weber example joins the cheap
//! domain-validity criteria as extra coverage.

use std::time::Instant;

use dirichlet::domain::{build_domain, BuildOptions};
use dirichlet::formats::GeneratorFile;
use dirichlet::minkowski::{self, dist, tangent_frame, MinkowskiPoint};
use dirichlet::moebius::{ComplexLength, MoebiusElement, Word};
use dirichlet::optimizer::{minimize_spine_radius, OptimizerParams};
use dirichlet::pipeline::{run_spectrum, RunConfig};
#[allow(unused_imports)]
use dirichlet::spectrum::spectrum_compare;
use dirichlet::tiling::tiling_radius;
use dirichlet::tolerance::Tolerance;
use dirichlet::wordprob;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn load(name: &str) -> GeneratorFile {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    GeneratorFile::parse(&text, &Tolerance::default()).expect("fixture parses")
}

/// The acceptance fixtures: one cusped, one closed.
const ACCEPTANCE_FIXTURES: [&str; 2] = ["fig8.gen", "fig8_cover4.gen"];
/// Supplementary fixture with exactly known geometry, used where cheap.
const ALL_FIXTURES: [&str; 3] = ["fig8.gen", "fig8_cover4.gen", "seifert_weber.gen"];

fn tol() -> Tolerance {
    Tolerance::default()
}

fn random_point(rng: &mut impl Rng) -> MinkowskiPoint {
    let u = Vector3::new(
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
    );
    MinkowskiPoint::from_klein(&u).unwrap()
}

fn random_element(rng: &mut impl Rng) -> MoebiusElement {
    loop {
        let e: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)))
            .collect();
        if let Ok(m) = MoebiusElement::normalize(
            [e[0], e[1], e[2], e[3]],
            Word::empty(),
            &tol(),
        ) {
            // Skip near-singular draws: enormous entries push intermediate
            // products toward catastrophic cancellation, which is a float
            // artifact rather than a kernel property.
            if m.entries().iter().all(|z| z.norm() < 3.0) {
                return m;
            }
        }
    }
}

#[test]
fn criterion_01_kernel_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        // Isometry preservation of dist.
        let g = random_element(&mut rng);
        let p = random_point(&mut rng);
        let q = random_point(&mut rng);
        let d0 = dist(&p, &q);
        let d1 = dist(&minkowski::apply(&g, &p), &minkowski::apply(&g, &q));
        assert!((d0 - d1).abs() < 1e-9, "isometry violated: {d0} vs {d1}");
    }
    for _ in 0..1000 {
        // Action-composition compatibility.
        let g = random_element(&mut rng);
        let h = random_element(&mut rng);
        let p = random_point(&mut rng);
        let lhs = minkowski::apply(&g.compose(&h, &tol()), &p);
        let rhs = minkowski::apply(&g, &minkowski::apply(&h, &p));
        assert!((lhs.0 - rhs.0).norm() < 1e-9, "composition violated");
    }
    for _ in 0..1000 {
        // Conjugation-invariance of the complex length.
        let g = random_element(&mut rng);
        if g.is_identity(1e-6) {
            continue;
        }
        let q = random_element(&mut rng);
        let conj = q.compose(&g, &tol()).compose(&q.inverse(&tol()), &tol());
        let (Ok(a), Ok(b)) = (g.complex_length(&tol()), conj.complex_length(&tol())) else {
            continue;
        };
        assert!((a.lambda - b.lambda).abs() < 1e-9, "lambda not invariant");
        assert!(
            ComplexLength::theta_dist(a.theta, b.theta) < 1e-9,
            "theta not invariant"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "kernel checks took {elapsed:?}");
    println!("ACCEPTANCE 1 kernel correctness (3x1000 randomized, 1e-9): PASS in {elapsed:?}");
}

#[test]
fn criterion_02_cyclic_closed_forms() {
    let start = Instant::now();
    let lambdas = [0.2, 0.6, 1.0, 1.4, 1.8];
    let thetas = [-2.4, -1.2, 0.0, 1.2, 2.4];
    for &l in &lambdas {
        for &t in &thetas {
            let half = Complex64::new(l / 2.0, t / 2.0).exp();
            let g = MoebiusElement::normalize(
                [
                    half,
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    half.inv(),
                ],
                Word(vec![1]),
                &tol(),
            )
            .unwrap();
            let cl = g.complex_length(&tol()).unwrap();
            assert!((cl.lambda - l).abs() < 1e-9, "lambda {l}: got {}", cl.lambda);
            assert!(
                ComplexLength::theta_dist(cl.theta, t) < 1e-9,
                "theta {t}: got {}",
                cl.theta
            );
            // Basepoint on the axis: d(x, g^k x) = k lambda.
            let mut p = MinkowskiPoint::origin();
            for k in 1..=4 {
                p = minkowski::apply(&g, &p);
                let d = dist(&MinkowskiPoint::origin(), &p);
                assert!(
                    (d - k as f64 * l).abs() < 1e-9,
                    "power {k} of lambda {l}: {d}"
                );
            }
        }
    }
    println!(
        "ACCEPTANCE 2 cyclic closed forms (5x5 grid, powers to 4, 1e-9): PASS in {:?}",
        start.elapsed()
    );
}

#[test]
fn criterion_03_domain_validity_on_fixtures() {
    for name in ALL_FIXTURES {
        let start = Instant::now();
        let file = load(name);
        let result = build_domain(
            &file.generators,
            &MinkowskiPoint::origin(),
            &BuildOptions::default(),
        )
        .unwrap();
        let poly = &result.poly;
        assert!(result.stats.converged, "{name}: stopping rule did not fire");
        assert_eq!(poly.euler_characteristic(), 2, "{name}: Euler check");
        poly.validate().unwrap();

        // Face pairings: involutive, with pairing products +-identity.
        for (i, f) in poly.faces.iter().enumerate() {
            let Some(e) = &f.element else { continue };
            let j = f.paired.unwrap_or_else(|| panic!("{name}: face {i} unpaired"));
            assert_eq!(
                poly.faces[j].paired,
                Some(i),
                "{name}: pairing not involutive"
            );
            let partner = poly.faces[j].element.as_ref().unwrap();
            let prod = e.compose(partner, &tol());
            assert!(
                prod.is_identity(1e-9),
                "{name}: pairing product off identity"
            );
        }

        // Dirichlet membership sampling: 1000 interior points.
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let face_images: Vec<MinkowskiPoint> = poly
            .faces
            .iter()
            .filter_map(|f| f.element.as_ref())
            .map(|g| minkowski::apply(g, &poly.basepoint))
            .collect();
        let mut accepted = 0;
        while accepted < 1000 {
            let u = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if u.norm() >= 0.999 || !poly.contains_klein(&u, -1e-12) {
                continue;
            }
            accepted += 1;
            let y = MinkowskiPoint::from_klein(&u).unwrap();
            let dx = dist(&poly.basepoint, &y);
            for img in &face_images {
                assert!(
                    dx <= dist(img, &y) + tol().eps_geom,
                    "{name}: Dirichlet membership violated"
                );
            }
        }
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 60.0, "{name}: took {elapsed:?}");
        println!("ACCEPTANCE 3 domain validity ({name}): PASS in {elapsed:?}");
    }
}

#[test]
fn criterion_04_injectivity_radius_rigor() {
    for name in ALL_FIXTURES {
        let file = load(name);
        let result = build_domain(
            &file.generators,
            &MinkowskiPoint::origin(),
            &BuildOptions::default(),
        )
        .unwrap();
        // Non-increasing across build iterations.
        for w in result.injectivity_trace.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12,
                "{name}: injectivity radius increased during build"
            );
        }
        // Final value: half the minimal face translation distance.
        let min_half = result
            .poly
            .faces
            .iter()
            .filter_map(|f| f.element.as_ref())
            .map(|g| dist(&result.poly.basepoint, &minkowski::apply(g, &result.poly.basepoint)) / 2.0)
            .fold(f64::INFINITY, f64::min);
        assert!(
            (result.stats.injectivity_radius - min_half).abs() < 1e-9,
            "{name}: injectivity radius mismatch"
        );
        // Cross-check: distance from basepoint to the nearest face plane.
        let min_plane = result
            .poly
            .faces
            .iter()
            .filter(|f| f.is_group_face())
            .map(|f| f.plane.hyperbolic_dist(&result.poly.basepoint))
            .fold(f64::INFINITY, f64::min);
        assert!(
            (result.stats.injectivity_radius - min_plane).abs() < tol().eps_geom * 10.0,
            "{name}: plane-distance cross-check"
        );
        println!("ACCEPTANCE 4 injectivity-radius rigor ({name}): PASS");
    }
}

#[test]
fn criterion_05_volume_against_reference() {
    for name in ALL_FIXTURES {
        let file = load(name);
        let reference = file.reference_volume.expect("fixture has reference volume");
        let result = build_domain(
            &file.generators,
            &MinkowskiPoint::origin(),
            &BuildOptions::default(),
        )
        .unwrap();
        let vol = result.stats.volume.expect("volume computed");
        let rel = (vol.value - reference).abs() / reference;
        assert!(rel < 1e-3, "{name}: relative volume error {rel}");
        assert!(
            vol.error_estimate < 1e-3 * reference,
            "{name}: quadrature error too large"
        );
        let delta_v = vol.value - reference;
        assert!(delta_v >= -1e-9, "{name}: delta V = {delta_v}");
        println!(
            "ACCEPTANCE 5 volume ({name}): {} vs {} (delta {:+.3e}): PASS",
            vol.value, reference, delta_v
        );
    }
}

#[test]
fn criterion_06_covering_oracle() {
    for name in ACCEPTANCE_FIXTURES {
        let start = Instant::now();
        let file = load(name);
        let config = RunConfig::default();
        let run = run_spectrum(&file, &config).unwrap();
        assert!(
            (run.radius
                - tiling_radius(run.build.build.stats.spine_radius.unwrap(), 1.0))
            .abs()
                < 1e-12
        );
        assert!(
            run.report.oracle_frontier_closed,
            "{name}: oracle frontier not closed"
        );
        assert!(
            run.report.oracle_missing.is_empty(),
            "{name}: {} elements missing from the tiling",
            run.report.oracle_missing.len()
        );
        assert!(
            run.report.oracle_extra.is_empty(),
            "{name}: {} tiles unknown to the oracle",
            run.report.oracle_extra.len()
        );
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 120.0, "{name}: took {elapsed:?}");
        println!(
            "ACCEPTANCE 6 covering oracle ({name}, {} tiles vs {} oracle elements): PASS in {elapsed:?}",
            run.report.tile_count, run.report.word_ball_count
        );
    }
}

#[test]
fn criterion_07_covering_fraction() {
    for name in ACCEPTANCE_FIXTURES {
        let file = load(name);
        let config = RunConfig {
            coverage_samples: 10_000,
            ..RunConfig::default()
        };
        let run = run_spectrum(&file, &config).unwrap();
        assert_eq!(run.coverage.samples, 10_000);
        assert_eq!(
            run.coverage.fraction, 1.0,
            "{name}: coverage fraction {} < 1",
            run.coverage.fraction
        );
        println!(
            "ACCEPTANCE 7 covering fraction ({name}): 1.0 with mean multiplicity {:.6}: PASS",
            run.coverage.mean_multiplicity
        );
    }
}

#[test]
fn criterion_08_word_equality_vs_brute_force() {
    for name in ACCEPTANCE_FIXTURES {
        let file = load(name);
        let config = RunConfig::default();
        let run = run_spectrum(&file, &config).unwrap();
        let tiles = &run.tiles.tiles;
        assert!(
            tiles.len() >= 1000,
            "{name}: big list has only {} elements",
            tiles.len()
        );
        let rho = run.build.build.stats.injectivity_radius;
        let x = &run.build.basepoint;
        let start = Instant::now();
        let mut pairs = 0u64;
        for i in 0..tiles.len() {
            for j in (i + 1)..tiles.len() {
                let lemma = wordprob::same_element(
                    &tiles[i].element,
                    &tiles[j].element,
                    x,
                    rho,
                    &tol(),
                )
                .unwrap();
                let direct = tiles[i].element.projectively_eq(&tiles[j].element, 1e-9);
                assert_eq!(
                    lemma, direct,
                    "{name}: disagreement between cascade and matrix comparison"
                );
                pairs += 1;
            }
            // Reflexivity on the diagonal.
            let selfsame =
                wordprob::same_element(&tiles[i].element, &tiles[i].element, x, rho, &tol())
                    .unwrap();
            assert!(selfsame);
        }
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 60.0, "{name}: scan took {elapsed:?}");
        println!(
            "ACCEPTANCE 8 word equality ({name}, {} elements, {pairs} pairs): PASS in {elapsed:?}",
            tiles.len()
        );
    }
}

#[test]
fn criterion_09_spectrum_basepoint_invariance() {
    use dirichlet::spectrum::big_to_small;
    use dirichlet::tiling::tile_ball;

    // Small list of the basepoint-optimized domain started at `start`.
    fn small_list_from(file: &GeneratorFile, start: &MinkowskiPoint) -> dirichlet::spectrum::SmallList {
        let params = OptimizerParams {
            initial_step: 0.05,
            min_step: 3e-4,
            max_iterations: 50,
            ..OptimizerParams::default()
        };
        let opts = BuildOptions {
            compute_volume: false,
            ..BuildOptions::default()
        };
        let opt = minimize_spine_radius(&file.generators, start, &params, &opts).unwrap();
        let spine = opt.build.stats.spine_radius.unwrap();
        let rho = opt.build.stats.injectivity_radius;
        let radius = tiling_radius(spine, 1.0);
        let tiles = tile_ball(&opt.build.poly, radius, 1_000_000, &tol()).unwrap();
        big_to_small(&tiles, 1.0, &opt.x_star, rho, spine, false, &tol()).unwrap()
    }

    for name in ACCEPTANCE_FIXTURES {
        let file = load(name);
        let small_a = small_list_from(&file, &MinkowskiPoint::origin());
        let displaced = {
            let frame = tangent_frame(&MinkowskiPoint::origin(), &tol());
            MinkowskiPoint::origin().geodesic_step(&frame[0], 0.05)
        };
        let small_b = small_list_from(&file, &displaced);
        let cmp = spectrum_compare(&small_a, &small_b, 1e-6);
        assert!(cmp.equal, "{name}: spectra differ: {}", cmp.detail);
        println!(
            "ACCEPTANCE 9 spectrum basepoint invariance ({name}, {} entries): PASS",
            small_a.entries.len()
        );
    }
}

#[test]
fn criterion_10_optimizer_descends() {
    let file = load("fig8_cover4.gen");
    let frame = tangent_frame(&MinkowskiPoint::origin(), &tol());
    let start_point = MinkowskiPoint::origin().geodesic_step(&frame[1], 0.05);
    let params = OptimizerParams {
        initial_step: 0.04,
        min_step: 1e-4,
        max_iterations: 60,
        ..OptimizerParams::default()
    };
    let result = minimize_spine_radius(
        &file.generators,
        &start_point,
        &params,
        &BuildOptions {
            compute_volume: false,
            ..BuildOptions::default()
        },
    )
    .unwrap();
    let first = result.trace.first().unwrap().spine_radius;
    let last = result.trace.last().unwrap().spine_radius;
    assert!(last <= first, "spine radius went up: {first} -> {last}");
    for w in result.trace.windows(2) {
        assert!(
            w[1].spine_radius < w[0].spine_radius - tol().eps_equal,
            "accepted trace not strictly decreasing"
        );
    }
    println!(
        "ACCEPTANCE 10 optimizer ({} accepted steps, spine {first:.9} -> {last:.9}): PASS",
        result.trace.len() - 1
    );
}

#[test]
fn criterion_11_byte_identical_runs() {
    let exe = env!("CARGO_BIN_EXE_dirichlet");
    let fixture = fixture_path("fig8.gen");
    let dir = std::env::temp_dir().join(format!("dirichlet-det-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for run in 0..2 {
        let prefix = dir.join(format!("run{run}")).to_string_lossy().to_string();
        let status = std::process::Command::new(exe)
            .args(["spectrum", &fixture, "--out", &prefix])
            .status()
            .expect("spectrum run");
        assert!(status.success(), "spectrum exited with {status:?}");
        let mut files = Vec::new();
        for kind in ["domain", "biglist", "report", "spectrum"] {
            let path = format!("{prefix}.{kind}.txt");
            files.push((kind.to_string(), std::fs::read(&path).unwrap()));
        }
        outputs.push(files);
    }
    for ((kind, a), (_, b)) in outputs[0].iter().zip(&outputs[1]) {
        assert_eq!(a, b, "{kind} export differs between runs");
    }
    std::fs::remove_dir_all(&dir).ok();
    println!("ACCEPTANCE 11 byte-identical consecutive runs: PASS");
}
