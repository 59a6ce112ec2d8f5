//! Calibration of Lagrange multipliers to nominal error probabilities.
//!
//! The search runs Nelder–Mead on log λ of the free multipliers and
//! minimizes the relative distance max |achieved − target| / target. A
//! one-dimensional pre-search over a common scale factor puts the starting
//! simplex near the right order of magnitude before the simplex refines the
//! individual multipliers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{backward_optimal, dbc_lattice, evaluate};
use crate::montecarlo;
use crate::report::TestReport;
use crate::spec::TestSpec;

pub const DEFAULT_TOLERANCE: f64 = 0.002;

/// max_i |achieved_i − target_i| / target_i.
pub fn relative_distance(achieved: &[f64], target: &[f64]) -> f64 {
    assert_eq!(achieved.len(), target.len(), "shapes differ");
    achieved
        .iter()
        .zip(target)
        .map(|(a, t)| (a - t).abs() / t)
        .fold(0.0, f64::max)
}

/// Nominal error probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorTargets {
    /// α_i = P_{θ_i}(reject H_i) for every hypothesis.
    PerHypothesis(Vec<f64>),
    /// Individual α_ij; `None` entries (and the diagonal) are unconstrained.
    Matrix(Vec<Vec<Option<f64>>>),
}

impl ErrorTargets {
    fn validate(&self, k: usize) -> Result<()> {
        let check = |a: f64| {
            if a > 0.0 && a < 1.0 {
                Ok(())
            } else {
                Err(Error::Spec(format!("target error {a} outside (0, 1)")))
            }
        };
        match self {
            ErrorTargets::PerHypothesis(a) => {
                if a.len() != k {
                    return Err(Error::Dimension {
                        what: "error targets",
                        expected: k,
                        got: a.len(),
                    });
                }
                a.iter().try_for_each(|&x| check(x))
            }
            ErrorTargets::Matrix(m) => {
                if m.len() != k || m.iter().any(|r| r.len() != k) {
                    return Err(Error::Spec(format!("target matrix must be {k}x{k}")));
                }
                let mut any = false;
                for (i, row) in m.iter().enumerate() {
                    for (j, t) in row.iter().enumerate() {
                        if let (true, Some(a)) = (i != j, t) {
                            check(*a)?;
                            any = true;
                        }
                    }
                }
                if any {
                    Ok(())
                } else {
                    Err(Error::Spec("no constrained error entries".into()))
                }
            }
        }
    }

    /// (achieved, target) pairs of the constrained entries.
    fn pairs(&self, report: &TestReport) -> (Vec<f64>, Vec<f64>) {
        match self {
            ErrorTargets::PerHypothesis(a) => (report.alpha_i.clone(), a.clone()),
            ErrorTargets::Matrix(m) => {
                let mut got = Vec::new();
                let mut want = Vec::new();
                for (i, row) in m.iter().enumerate() {
                    for (j, t) in row.iter().enumerate() {
                        if let (true, Some(a)) = (i != j, t) {
                            got.push(report.alpha[i][j]);
                            want.push(*a);
                        }
                    }
                }
                (got, want)
            }
        }
    }

    pub fn distance(&self, report: &TestReport) -> f64 {
        let (got, want) = self.pairs(report);
        relative_distance(&got, &want)
    }

    /// Mean of log(achieved/target); decreasing in a common multiplier scale.
    fn log_excess(&self, report: &TestReport) -> f64 {
        let (got, want) = self.pairs(report);
        let n = got.len() as f64;
        got.iter()
            .zip(&want)
            .map(|(g, w)| (g.max(1e-300) / w).ln())
            .sum::<f64>()
            / n
    }

    /// Target governing row i of the multiplier matrix.
    fn row_target(&self, i: usize) -> f64 {
        match self {
            ErrorTargets::PerHypothesis(a) => a[i],
            ErrorTargets::Matrix(m) => {
                let vals: Vec<f64> = m[i]
                    .iter()
                    .enumerate()
                    .filter_map(|(j, t)| if j != i { *t } else { None })
                    .collect();
                if vals.is_empty() {
                    0.05
                } else {
                    vals.iter().sum::<f64>()
                }
            }
        }
    }
}

/// Which off-diagonal multipliers vary, and which of them share one value.
/// `slots[i][j] = Some(p)` ties λ_ij to free parameter p; `None` keeps the
/// template value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamMap {
    slots: Vec<Vec<Option<usize>>>,
    dim: usize,
}

impl ParamMap {
    pub fn new(slots: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let k = slots.len();
        if slots.iter().any(|r| r.len() != k) {
            return Err(Error::Spec("parameter map must be square".into()));
        }
        let mut used: Vec<usize> = slots
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().filter(move |(j, _)| *j != i).filter_map(|(_, p)| *p))
            .collect();
        used.sort_unstable();
        used.dedup();
        if used.is_empty() {
            return Err(Error::Spec("no free parameters".into()));
        }
        if used.iter().enumerate().any(|(a, &b)| a != b) {
            return Err(Error::Spec("free parameter indices must be 0..d without gaps".into()));
        }
        Ok(ParamMap {
            dim: used.len(),
            slots,
        })
    }

    /// Row-constant multipliers: all λ_ij of row i equal free parameter
    /// `groups[i]`. `[0, 1, 0]` ties λ₁ = λ₃.
    pub fn rows(groups: &[usize]) -> Result<Self> {
        let k = groups.len();
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| (i != j).then_some(groups[i])).collect())
                .collect(),
        )
    }

    /// One free row multiplier per hypothesis.
    pub fn untied_rows(k: usize) -> Self {
        Self::rows(&(0..k).collect::<Vec<_>>()).expect("valid map")
    }

    /// Rows tied symmetrically about the middle: λ_i = λ_{k+1−i}.
    pub fn symmetric_rows(k: usize) -> Self {
        let groups: Vec<usize> = (0..k).map(|i| i.min(k - 1 - i)).collect();
        Self::rows(&groups).expect("valid map")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.slots.len()
    }

    /// Multiplier matrix with the free entries set to exp(`log_x`).
    pub fn apply(&self, template: &[Vec<f64>], log_x: &[f64]) -> Vec<Vec<f64>> {
        let mut out = template.to_vec();
        for (i, row) in self.slots.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if let (true, Some(p)) = (i != j, p) {
                    out[i][j] = log_x[*p].exp();
                }
            }
        }
        out
    }

    /// Free parameters read back from a multiplier matrix (first occurrence).
    pub fn extract(&self, lambdas: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.dim];
        for (i, row) in self.slots.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if let (true, Some(p)) = (i != j, p) {
                    if out[*p].is_nan() {
                        out[*p] = lambdas[i][j].ln();
                    }
                }
            }
        }
        out
    }

    /// Heuristic start λ ≈ 1/α on the rows each parameter governs.
    fn initial(&self, targets: &ErrorTargets) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        let mut count = vec![0usize; self.dim];
        for (i, row) in self.slots.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if let (true, Some(p)) = (i != j, p) {
                    sum[*p] += (1.0 / targets.row_target(i)).ln();
                    count[*p] += 1;
                }
            }
        }
        sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub targets: ErrorTargets,
    /// Relative-distance goal; the search stops once it is reached.
    pub tolerance: f64,
    pub free_params: ParamMap,
}

impl CalibrationTarget {
    pub fn new(targets: ErrorTargets, free_params: ParamMap) -> Self {
        CalibrationTarget {
            targets,
            tolerance: DEFAULT_TOLERANCE,
            free_params,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

/// How a probe spec is turned into error probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluator {
    /// Exact lattice evaluation of the DBC rule (Bernoulli).
    ExactDbc,
    /// Exact lattice evaluation of the optimal test (Bernoulli).
    ExactOptimal,
    /// Simulation of the DBC rule; one seed for every probe.
    MonteCarlo { reps: u64, seed: u64 },
}

impl Evaluator {
    pub fn evaluate(&self, spec: &TestSpec) -> Result<TestReport> {
        match *self {
            Evaluator::ExactDbc => evaluate(&dbc_lattice(spec)?, spec, &[]),
            Evaluator::ExactOptimal => {
                let opt = backward_optimal(spec, spec.horizon().cap())?;
                evaluate(&opt.policy, spec, &[])
            }
            Evaluator::MonteCarlo { reps, seed } => montecarlo::simulate(spec, &[], reps, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the simplex diameter (max-norm) falls below this.
    pub xtol: f64,
    /// Stop once the spread of vertex values falls below this.
    pub ftol: f64,
    /// Offset of the initial vertices from `x0` along each axis.
    pub step: f64,
    /// Stop as soon as a value at or below this is found.
    pub stop_below: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 1000,
            xtol: 1e-8,
            ftol: 1e-16,
            step: 0.1,
            stop_below: f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Diameter,
    Spread,
    MaxEvals,
    Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Best value after each iteration; non-increasing.
    pub history: Vec<f64>,
    pub reason: StopReason,
}

/// Nelder–Mead simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    if d == 0 {
        return Err(Error::Optimizer("at least one dimension is required".into()));
    }
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(Error::Optimizer("objective is not finite at the starting point".into()));
    }
    let mut evals = 1;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    let mut history = Vec::new();
    if f0 <= opts.stop_below {
        return Ok(Minimum {
            x: x0.to_vec(),
            value: f0,
            evals,
            history: vec![f0],
            reason: StopReason::Target,
        });
    }
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += opts.step;
        let v = f(&x);
        evals += 1;
        simplex.push((x, v));
    }
    let mut reason = StopReason::MaxEvals;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        history.push(best);
        if best <= opts.stop_below {
            reason = StopReason::Target;
            break;
        }
        let worst = simplex[d].1;
        if (worst - best).abs() < opts.ftol {
            reason = StopReason::Spread;
            break;
        }
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.xtol {
            reason = StopReason::Diameter;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = along(-1.0, &simplex[d].0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0, &simplex[d].0);
            let fe = f(&xe);
            evals += 1;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[d].1 {
            let xc = along(-0.5, &simplex[d].0);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5, &simplex[d].0);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < simplex[d].1.min(fr) {
            simplex[d] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = x_best.iter().zip(&v.0).map(|(b, xi)| b + 0.5 * (xi - b)).collect();
            let fx = f(&x);
            *v = (x, fx);
        }
        evals += d;
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(Minimum {
        x,
        value,
        evals,
        history,
        reason,
    })
}

/// Outcome of a calibration.
#[derive(Debug, Clone)]
pub struct Fit<T> {
    pub params: T,
    pub report: TestReport,
    pub distance: f64,
    /// Whether the distance reached the requested tolerance.
    pub converged: bool,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_evals: usize,
    /// Initial simplex offset in log space.
    pub step: f64,
    /// Run the common-scale pre-search before the simplex.
    pub scale_search: bool,
    /// Start from the template's multipliers instead of λ ≈ 1/α.
    pub from_template: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_evals: 400,
            step: 1.2f64.ln(),
            scale_search: true,
            from_template: false,
        }
    }
}

struct Search<'t, F> {
    targets: &'t ErrorTargets,
    eval: F,
    best: Option<(Vec<f64>, TestReport, f64)>,
    failure: Option<Error>,
    evals: usize,
}

impl<F> Search<'_, F>
where
    F: FnMut(&[f64]) -> Result<Option<TestReport>>,
{
    fn probe(&mut self, x: &[f64]) -> Option<TestReport> {
        self.evals += 1;
        match (self.eval)(x) {
            Ok(Some(r)) => {
                let d = self.targets.distance(&r);
                if self.best.as_ref().is_none_or(|b| d < b.2) {
                    self.best = Some((x.to_vec(), r.clone(), d));
                }
                Some(r)
            }
            Ok(None) => None,
            Err(e) => {
                self.failure.get_or_insert(e);
                None
            }
        }
    }

    fn check(&mut self) -> Result<()> {
        match self.failure.take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Mean log excess after shifting every coordinate of `x0` by `c`.
    fn shifted(&mut self, x0: &[f64], c: f64) -> Option<f64> {
        let x: Vec<f64> = x0.iter().map(|v| v + c).collect();
        let targets = self.targets;
        self.probe(&x).map(|r| targets.log_excess(&r))
    }

    /// Bisection on a common shift of all log multipliers, driving the mean
    /// log(achieved/target) to zero.
    fn scale_search(&mut self, x0: &[f64]) {
        let mut lo = 0.0f64;
        let mut step = 0.5;
        let mut g_lo = self.shifted(x0, lo);
        let mut guard = 0;
        while g_lo.is_none() && guard < 40 && self.failure.is_none() {
            lo += step;
            g_lo = self.shifted(x0, lo);
            guard += 1;
        }
        let Some(v0) = g_lo else { return };
        let mut hi = lo;
        let mut found = false;
        for _ in 0..40 {
            if v0 > 0.0 {
                hi += step;
                match self.shifted(x0, hi) {
                    Some(v) if v <= 0.0 => found = true,
                    Some(_) => lo = hi,
                    None => {}
                }
            } else {
                lo -= step;
                match self.shifted(x0, lo) {
                    Some(v) if v > 0.0 => found = true,
                    Some(_) => hi = lo,
                    None => break,
                }
            }
            step *= 1.5;
            if found || self.failure.is_some() {
                break;
            }
        }
        if !found {
            return;
        }
        while hi - lo > 1e-4 && self.failure.is_none() {
            let mid = 0.5 * (lo + hi);
            match self.shifted(x0, mid) {
                Some(v) if v <= 0.0 => hi = mid,
                _ => lo = mid,
            }
        }
    }

    fn best_distance(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.2)
    }
}

/// Generic fit of a log-parameter vector: `eval` maps a probe to a report,
/// or to `Ok(None)` when the probe is inadmissible (scored +∞).
pub fn fit_log_params<F>(
    x0: &[f64],
    targets: &ErrorTargets,
    tolerance: f64,
    opts: &FitOptions,
    eval: F,
) -> Result<Fit<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<Option<TestReport>>,
{
    let mut search = Search {
        targets,
        eval,
        best: None,
        failure: None,
        evals: 0,
    };
    if opts.scale_search {
        search.scale_search(x0);
        search.check()?;
    }
    let mut start = match &search.best {
        Some(b) => b.0.clone(),
        None => x0.to_vec(),
    };
    let mut step = opts.step;
    let mut rounds = 0;
    while search.best_distance().is_none_or(|d| d > tolerance) && search.evals < opts.max_evals && rounds < 8 {
        let nm = NelderMeadOptions {
            max_evals: opts.max_evals - search.evals,
            xtol: 1e-7,
            ftol: 0.0,
            step,
            stop_below: tolerance,
        };
        let before = search.best_distance();
        let result = nelder_mead(
            |x| match search.probe(x) {
                Some(r) => targets.distance(&r),
                None => f64::INFINITY,
            },
            &start,
            &nm,
        );
        search.check()?;
        match result {
            Ok(_) => {}
            Err(Error::Optimizer(_)) => break,
            Err(e) => return Err(e),
        }
        if let Some(b) = &search.best {
            start = b.0.clone();
        }
        // Restart from the best point, with a smaller simplex after progress
        // and a larger one when stuck.
        step = if search.best_distance() < before { step * 0.5 } else { step * 2.0 };
        rounds += 1;
    }
    let evals = search.evals;
    let (x, report, distance) = search
        .best
        .ok_or_else(|| Error::Optimizer("no admissible probe point".into()))?;
    Ok(Fit {
        params: x,
        report,
        distance,
        converged: distance <= tolerance,
        evals,
    })
}

/// Calibrates the free multipliers of `template` to `target`. Returns the
/// best spec found; `converged` is false when the tolerance was not met.
pub fn calibrate(
    template: &TestSpec,
    target: &CalibrationTarget,
    evaluator: Evaluator,
    opts: &FitOptions,
) -> Result<Fit<TestSpec>> {
    let k = template.k();
    target.targets.validate(k)?;
    if target.free_params.k() != k {
        return Err(Error::Dimension {
            what: "parameter map",
            expected: k,
            got: target.free_params.k(),
        });
    }
    let map = &target.free_params;
    let x0 = if opts.from_template {
        map.extract(template.lambdas())
    } else {
        map.initial(&target.targets)
    };
    let fit = fit_log_params(&x0, &target.targets, target.tolerance, opts, |x| {
        let spec = match template.with_lambdas(map.apply(template.lambdas(), x)) {
            Ok(s) => s,
            Err(Error::Spec(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        evaluator.evaluate(&spec).map(Some)
    })?;
    let spec = template.with_lambdas(map.apply(template.lambdas(), &fit.params))?;
    Ok(Fit {
        params: spec,
        report: fit.report,
        distance: fit.distance,
        converged: fit.converged,
        evals: fit.evals,
    })
}
