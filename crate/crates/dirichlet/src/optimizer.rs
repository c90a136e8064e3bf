//! Basepoint optimization: derivative-free pattern search minimizing the
//! spine radius.
//!
//! The spine radius is piecewise-smooth with combinatorial breaks where the
//! edge set changes, so the search probes the six axis directions of the
//! tangent frame at the current point and moves to the first strictly
//! improving probe, halving the step when none improves. Each probe is a
//! full domain rebuild.

use log::{debug, warn};
use thiserror::Error;

use crate::domain::{build_domain, BuildOptions, BuildResult, DomainError};
use crate::minkowski::{tangent_frame, MinkowskiPoint};
use crate::moebius::MoebiusElement;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("initial domain build failed: {0}")]
    InitialBuild(#[from] DomainError),
    #[error("domain has no spine (no edge joins two group faces)")]
    NoSpine,
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerParams {
    /// Hyperbolic length of the first probe step.
    pub initial_step: f64,
    pub step_shrink: f64,
    pub min_step: f64,
    pub max_iterations: usize,
    /// Worker threads for the six probe builds (1 = sequential).
    pub threads: usize,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        OptimizerParams {
            initial_step: 0.1,
            step_shrink: 0.5,
            min_step: 1e-6,
            max_iterations: 200,
            threads: 1,
        }
    }
}

impl OptimizerParams {
    fn validate(&self) -> Result<(), OptimizerError> {
        if self.min_step >= self.initial_step {
            return Err(OptimizerError::BadParams(
                "min_step must be below initial_step".into(),
            ));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(OptimizerError::BadParams(
                "step_shrink must lie in (0,1)".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted step of the search.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub point: MinkowskiPoint,
    pub spine_radius: f64,
    pub step: f64,
}

#[derive(Debug)]
pub struct MinimizeResult {
    pub x_star: MinkowskiPoint,
    pub build: BuildResult,
    /// Accepted points in order, starting with the initial one; spine radii
    /// are strictly decreasing after the first entry.
    pub trace: Vec<TracePoint>,
    /// Largest spine decrease still available on the final stencil (the
    /// reported gap at termination).
    pub final_stencil_gap: f64,
}

/// Minimize the spine radius over basepoint position.
pub fn minimize_spine_radius(
    generators: &[MoebiusElement],
    x0: &MinkowskiPoint,
    params: &OptimizerParams,
    build_opts: &BuildOptions,
) -> Result<MinimizeResult, OptimizerError> {
    params.validate()?;
    let tol = build_opts.tolerance;
    // Probe builds skip the volume quadrature.
    let probe_opts = BuildOptions {
        compute_volume: false,
        ..build_opts.clone()
    };

    let initial = build_domain(generators, x0, &probe_opts)?;
    let mut current_spine = initial.stats.spine_radius.ok_or(OptimizerError::NoSpine)?;
    let mut current_point = *x0;
    let mut trace = vec![TracePoint {
        point: current_point,
        spine_radius: current_spine,
        step: params.initial_step,
    }];

    let mut step = params.initial_step;
    let mut final_gap = 0.0f64;
    let mut iterations = 0usize;
    while step >= params.min_step && iterations < params.max_iterations {
        iterations += 1;
        let frame = tangent_frame(&current_point, &tol);
        let probes: Vec<MinkowskiPoint> = (0..6)
            .map(|k| {
                let axis = k / 2;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                current_point.geodesic_step(&frame[axis], sign * step)
            })
            .collect();

        let spines: Vec<Option<f64>> = if params.threads > 1 {
            std::thread::scope(|scope| {
                let handles: Vec<_> = probes
                    .iter()
                    .map(|p| {
                        let opts = &probe_opts;
                        scope.spawn(move || probe_spine(generators, p, opts))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            })
        } else {
            let mut out = Vec::with_capacity(6);
            for p in &probes {
                let s = probe_spine(generators, p, &probe_opts);
                // Sequential mode can stop at the first improvement; the
                // accept rule below picks the first improving axis either way.
                let improving =
                    s.is_some_and(|v| v < current_spine - tol.eps_equal);
                out.push(s);
                if improving {
                    break;
                }
            }
            out
        };

        // First strictly improving direction in fixed axis order wins.
        let accept = spines
            .iter()
            .enumerate()
            .find(|(_, s)| s.is_some_and(|v| v < current_spine - tol.eps_equal));
        if let Some((k, s)) = accept {
            let s = s.unwrap();
            debug!(
                "step {step:.3e}: direction {k} improves spine {current_spine:.9} -> {s:.9}"
            );
            current_point = probes[k];
            current_spine = s;
            trace.push(TracePoint {
                point: current_point,
                spine_radius: current_spine,
                step,
            });
        } else {
            final_gap = spines
                .iter()
                .flatten()
                .map(|s| current_spine - s)
                .fold(0.0, f64::max);
            step *= params.step_shrink;
        }
    }

    // Final rebuild at the optimum with the caller's full options.
    let build = build_domain(generators, &current_point, build_opts)?;
    Ok(MinimizeResult {
        x_star: current_point,
        build,
        trace,
        final_stencil_gap: final_gap,
    })
}

fn probe_spine(
    generators: &[MoebiusElement],
    p: &MinkowskiPoint,
    opts: &BuildOptions,
) -> Option<f64> {
    match build_domain(generators, p, opts) {
        Ok(result) => result.stats.spine_radius,
        Err(e) => {
            warn!("probe build failed at {:?}: {e}", p.to_klein());
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::Tolerance;
    use num_complex::Complex64;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn params_quick() -> OptimizerParams {
        OptimizerParams {
            initial_step: 0.05,
            step_shrink: 0.5,
            min_step: 1e-3,
            max_iterations: 40,
            threads: 1,
        }
    }

    #[test]
    fn rejects_bad_params() {
        let g = crate::moebius::MoebiusElement::normalize(
            [
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            crate::moebius::Word(vec![1]),
            &tol(),
        )
        .unwrap();
        let bad = OptimizerParams {
            min_step: 1.0,
            ..OptimizerParams::default()
        };
        let r = minimize_spine_radius(
            &[g],
            &MinkowskiPoint::origin(),
            &bad,
            &BuildOptions::default(),
        );
        assert!(matches!(r, Err(OptimizerError::BadParams(_))));
    }

    #[test]
    fn slab_domain_has_no_spine() {
        let g = crate::moebius::MoebiusElement::normalize(
            [
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            crate::moebius::Word(vec![1]),
            &tol(),
        )
        .unwrap();
        let r = minimize_spine_radius(
            &[g],
            &MinkowskiPoint::origin(),
            &params_quick(),
            &BuildOptions::default(),
        );
        assert!(matches!(r, Err(OptimizerError::NoSpine)));
    }

    #[test]
    fn zero_iterations_returns_start() {
        let g = crate::moebius::MoebiusElement::normalize(
            [
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            crate::moebius::Word(vec![1]),
            &tol(),
        )
        .unwrap();
        // Slab has no spine, so use max_iterations = 0 path on a group where
        // it exists is covered in integration tests; here the no-spine error
        // fires before any iteration regardless.
        let r = minimize_spine_radius(
            &[g],
            &MinkowskiPoint::origin(),
            &OptimizerParams {
                max_iterations: 0,
                ..params_quick()
            },
            &BuildOptions::default(),
        );
        assert!(matches!(r, Err(OptimizerError::NoSpine)));
    }
}
