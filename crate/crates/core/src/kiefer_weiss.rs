//! Worst-case expected sample size and DBC approximations to the
//! multi-hypothesis Kiefer–Weiss problem.
//!
//! The modified problem places the ESS evaluation points ϑ at the
//! parameters where the ESS of the test peaks between the extreme
//! hypotheses. [`kw_fixed_point`] alternates between locating those peaks
//! and refitting the multipliers until the points stop moving.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{calibrate, CalibrationTarget, Evaluator, FitOptions};
use crate::lattice::{dbc_lattice, evaluate_param, LatticePolicy};
use crate::spec::TestSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgmaxOptions {
    pub grid_step: f64,
    /// Golden-section refinement stops once the bracket is this narrow.
    pub refine_tol: f64,
    /// Local maxima within this relative distance of the global maximum are
    /// all reported.
    pub within: f64,
}

impl Default for ArgmaxOptions {
    fn default() -> Self {
        ArgmaxOptions {
            grid_step: 0.002,
            refine_tol: 1e-5,
            within: 1e-6,
        }
    }
}

fn ess(policy: &LatticePolicy, k: usize, theta: f64) -> Result<f64> {
    Ok(evaluate_param(policy, k, theta)?.ess)
}

/// Local maxima (θ*, E_θ*τ) of the ESS of `policy` over the open interval
/// `(lo, hi)`, sorted by θ, keeping those within `opts.within` of the
/// largest.
pub fn ess_argmax(
    policy: &LatticePolicy,
    k: usize,
    lo: f64,
    hi: f64,
    opts: &ArgmaxOptions,
) -> Result<Vec<(f64, f64)>> {
    if lo.is_nan() || hi.is_nan() || lo >= hi || lo <= 0.0 || hi >= 1.0 {
        return Err(Error::Spec(format!("empty or invalid interval ({lo}, {hi})")));
    }
    if opts.grid_step.is_nan() || opts.grid_step <= 0.0 {
        return Err(Error::Spec("grid step must be positive".into()));
    }
    let steps = ((hi - lo) / opts.grid_step).ceil() as usize;
    let mut grid: Vec<f64> = (1..steps).map(|i| lo + i as f64 * (hi - lo) / steps as f64).collect();
    if grid.is_empty() {
        grid.push(0.5 * (lo + hi));
    }
    let values = grid
        .par_iter()
        .map(|&t| ess(policy, k, t))
        .collect::<Result<Vec<f64>>>()?;
    let m = grid.len();
    let mut peaks = Vec::new();
    for i in 0..m {
        let left = if i > 0 { values[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < m { values[i + 1] } else { f64::NEG_INFINITY };
        if values[i] >= left && values[i] >= right {
            let a = if i > 0 { grid[i - 1] } else { lo + 0.5 * (grid[0] - lo) };
            let b = if i + 1 < m { grid[i + 1] } else { hi - 0.5 * (hi - grid[m - 1]) };
            peaks.push((a, grid[i], b, values[i]));
        }
    }
    let mut refined = peaks
        .par_iter()
        .map(|&(a, x, b, v)| golden_max(policy, k, a, b, x, v, opts.refine_tol))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let top = refined.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    refined.retain(|p| p.1 >= top - opts.within * top.abs());
    refined.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(refined)
}

/// Golden-section search for a maximum on [a, b]; never returns less than
/// the starting grid value.
fn golden_max(
    policy: &LatticePolicy,
    k: usize,
    mut a: f64,
    mut b: f64,
    x0: f64,
    v0: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = ess(policy, k, c)?;
    let mut fd = ess(policy, k, d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = ess(policy, k, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = ess(policy, k, d)?;
        }
    }
    let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(if v >= v0 { (x, v) } else { (x0, v0) })
}

/// A DBC design whose evaluation points sit at its own ESS maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KWDesign {
    pub spec: TestSpec,
    pub worst_points: Vec<f64>,
    /// sup of E_θτ over (θ₁, θ_k), in observations.
    pub max_ess: f64,
    /// max |ϑ_i − θ*_i| between the spec's evaluation points and the maxima.
    pub fixed_point_gap: f64,
    pub alpha_i: Vec<f64>,
    pub distance: f64,
    /// Rounds run before stopping.
    pub rounds: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KwOptions {
    pub max_rounds: usize,
    pub gap_tol: f64,
    pub argmax: ArgmaxOptions,
    pub fit: FitOptions,
}

impl Default for KwOptions {
    fn default() -> Self {
        KwOptions {
            max_rounds: 20,
            gap_tol: 1e-4,
            argmax: ArgmaxOptions::default(),
            fit: FitOptions::default(),
        }
    }
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Gap between current points and new maxima; infinite when their counts
/// differ.
fn gap(evals: &[f64], points: &[f64]) -> f64 {
    if evals.len() != points.len() {
        return f64::INFINITY;
    }
    evals
        .iter()
        .zip(points)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Fixed-point search on a Bernoulli template whose hypotheses are sorted
/// increasingly. The template's evaluation points are the starting ϑ and
/// its multipliers the starting λ; every round refits λ with ϑ fixed, then
/// moves ϑ to the ESS maxima of the refitted test with uniform weights.
///
/// Discreteness of the error probabilities can trap the iteration in a
/// cycle; it then stops once a (λ, ϑ) pair repeats, and the design with the
/// smallest gap seen is returned with `converged` false.
pub fn kw_fixed_point(template: &TestSpec, target: &CalibrationTarget, opts: &KwOptions) -> Result<KWDesign> {
    let th = template.thetas();
    if th.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Spec("hypotheses must be sorted increasingly".into()));
    }
    let (lo, hi) = (th[0], th[th.len() - 1]);
    let mut spec = template.clone();
    let mut best: Option<KWDesign> = None;
    let mut seen: Vec<(Vec<Vec<f64>>, Vec<f64>)> = Vec::new();
    let mut rounds_run = 0;
    for round in 1..=opts.max_rounds {
        rounds_run = round;
        let fit = calibrate(&spec, target, Evaluator::ExactDbc, &opts.fit)?;
        spec = fit.params;
        let state = (spec.lambdas().to_vec(), spec.evals().to_vec());
        let cycled = seen.contains(&state);
        seen.push(state);
        let policy = dbc_lattice(&spec)?;
        let peaks = ess_argmax(&policy, spec.k(), lo, hi, &opts.argmax)?;
        let points: Vec<f64> = peaks.iter().map(|p| p.0).collect();
        let max_ess = peaks.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let g = gap(spec.evals(), &points);
        let converged = g < opts.gap_tol && fit.distance <= target.tolerance;
        let design = KWDesign {
            spec: spec.clone(),
            worst_points: points.clone(),
            max_ess,
            fixed_point_gap: g,
            alpha_i: fit.report.alpha_i.clone(),
            distance: fit.distance,
            rounds: round,
            converged,
        };
        if g < opts.gap_tol {
            return Ok(design);
        }
        let better = match &best {
            None => true,
            Some(b) => (design.fixed_point_gap, design.distance) < (b.fixed_point_gap, b.distance),
        };
        if better {
            best = Some(design);
        }
        if cycled {
            break;
        }
        spec = spec.with_evals(points.clone(), uniform(points.len()))?;
    }
    let mut best = best.expect("at least one round");
    best.rounds = rounds_run;
    Ok(best)
}
