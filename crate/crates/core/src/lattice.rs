//! Exact evaluation of stopping policies for Bernoulli observations.
//!
//! For i.i.d. Bernoulli data every rule in this crate depends on the prefix
//! only through (n, s), the step count and the number of successes, so a
//! truncated test is a table of actions on the triangle 1 ≤ n ≤ N, 0 ≤ s ≤ n.
//! Rows are stored over the window of states that can be reached through
//! continuation; states outside the window are unreachable and carry no
//! action.
//!
//! The forward pass propagates probability mass row by row. Masses are
//! probabilities, so they are kept in linear space. The backward induction
//! that builds the optimal truncated test works on per-sequence densities,
//! which underflow long before n = 3000, and is therefore done in log space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dbc::{DbcRule, SequentialRule, Verdict};
use crate::error::{Error, Result};
use crate::models::{bernoulli_log_density, Model};
use crate::numeric::log_add_exp;
use crate::report::{ParamSummary, TestReport};
use crate::spec::TestSpec;
use crate::state::LogLikState;

/// Largest horizon accepted by the path-enumeration oracles.
pub const BRUTE_FORCE_MAX_HORIZON: usize = 12;

/// Action at one lattice state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Continue,
    /// Stop and accept hypothesis j (0-based).
    Stop(usize),
}

impl Action {
    pub fn is_stop(&self) -> bool {
        matches!(self, Action::Stop(_))
    }

    fn code(&self) -> usize {
        match self {
            Action::Continue => 0,
            Action::Stop(j) => j + 1,
        }
    }

    fn from_code(c: usize) -> Self {
        if c == 0 {
            Action::Continue
        } else {
            Action::Stop(c - 1)
        }
    }
}

impl From<Verdict> for Action {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Continue => Action::Continue,
            Verdict::Accept(j) => Action::Stop(j),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PolicyRow {
    start: usize,
    actions: Vec<Action>,
}

/// Deterministic truncated stopping and decision rule on the (n, s) lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePolicy {
    /// `rows[n - 1]` holds step n.
    rows: Vec<PolicyRow>,
}

impl LatticePolicy {
    /// Tabulates `rule(n, s, at_horizon)` over the states reachable through
    /// continuation, for n = 1..=`horizon`. The rule must stop on the last row.
    pub fn from_rule<F>(horizon: usize, mut rule: F) -> Result<Self>
    where
        F: FnMut(usize, usize, bool) -> Action,
    {
        if horizon == 0 {
            return Err(Error::InvalidPolicy("horizon must be at least 1".into()));
        }
        let mut rows = Vec::with_capacity(horizon);
        let (mut start, mut len) = (0usize, 2usize);
        for n in 1..=horizon {
            let last = n == horizon;
            let mut actions = Vec::with_capacity(len);
            let mut lo = usize::MAX;
            let mut hi = 0usize;
            for s in start..start + len {
                let a = rule(n, s, last);
                if a == Action::Continue {
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
                actions.push(a);
            }
            rows.push(PolicyRow { start, actions });
            if lo == usize::MAX {
                start = 0;
                len = 0;
            } else {
                start = lo;
                len = hi - lo + 2;
            }
        }
        let policy = LatticePolicy { rows };
        policy.validate()?;
        Ok(policy)
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    /// Action at (n, s), or `None` outside the stored window.
    pub fn action(&self, n: usize, s: usize) -> Option<Action> {
        let row = self.rows.get(n.checked_sub(1)?)?;
        let idx = s.checked_sub(row.start)?;
        row.actions.get(idx).copied()
    }

    /// Overwrites the action at a stored state.
    pub fn set_action(&mut self, n: usize, s: usize, action: Action) -> Result<()> {
        let row = n
            .checked_sub(1)
            .and_then(|r| self.rows.get_mut(r))
            .ok_or_else(|| Error::InvalidPolicy(format!("no row {n}")))?;
        let idx = s
            .checked_sub(row.start)
            .filter(|&i| i < row.actions.len())
            .ok_or_else(|| Error::InvalidPolicy(format!("state ({n}, {s}) outside the window")))?;
        row.actions[idx] = action;
        Ok(())
    }

    /// Stored window of row n as (first s, number of states).
    pub fn window(&self, n: usize) -> (usize, usize) {
        let row = &self.rows[n - 1];
        (row.start, row.actions.len())
    }

    /// Every stored (n, s, action).
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Action)> + '_ {
        self.rows.iter().enumerate().flat_map(|(r, row)| {
            row.actions
                .iter()
                .enumerate()
                .map(move |(i, &a)| (r + 1, row.start + i, a))
        })
    }

    /// Checks truncation (last row all stop), that row 1 covers both first
    /// outcomes, and that every continuation leads to stored states.
    pub fn validate(&self) -> Result<()> {
        let n_rows = self.rows.len();
        if n_rows == 0 {
            return Err(Error::InvalidPolicy("empty policy".into()));
        }
        let first = &self.rows[0];
        if first.start != 0 || first.actions.len() != 2 {
            return Err(Error::InvalidPolicy("row 1 must cover s = 0 and s = 1".into()));
        }
        for (r, row) in self.rows.iter().enumerate() {
            let n = r + 1;
            if !row.actions.is_empty() && row.start + row.actions.len() > n + 1 {
                return Err(Error::InvalidPolicy(format!("row {n} extends past s = {n}")));
            }
            for (i, a) in row.actions.iter().enumerate() {
                let s = row.start + i;
                match a {
                    Action::Continue if n == n_rows => {
                        return Err(Error::InvalidPolicy(format!(
                            "state ({n}, {s}) continues past the horizon"
                        )));
                    }
                    Action::Continue => {
                        let next = &self.rows[n];
                        if s < next.start || s + 1 >= next.start + next.actions.len() {
                            return Err(Error::InvalidPolicy(format!(
                                "state ({n}, {s}) continues into unstored states"
                            )));
                        }
                    }
                    Action::Stop(_) => {}
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&RawPolicy::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawPolicy = serde_json::from_str(text)?;
        LatticePolicy::try_from(raw)
    }
}

/// Run-length-encoded policy: per row, segment `t` covers
/// `[ends[t-1], ends[t])` (starting at `start`) with action code
/// `actions[t]`: 0 continues, j ≥ 1 stops accepting H_j.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    schema: u32,
    horizon: usize,
    rows: Vec<RawRow>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    start: usize,
    ends: Vec<usize>,
    actions: Vec<usize>,
}

impl From<&LatticePolicy> for RawPolicy {
    fn from(p: &LatticePolicy) -> Self {
        let rows = p
            .rows
            .iter()
            .map(|row| {
                let mut ends = Vec::new();
                let mut actions = Vec::new();
                for (i, a) in row.actions.iter().enumerate() {
                    if actions.last() == Some(&a.code()) {
                        *ends.last_mut().unwrap() = row.start + i + 1;
                    } else {
                        actions.push(a.code());
                        ends.push(row.start + i + 1);
                    }
                }
                RawRow {
                    start: row.start,
                    ends,
                    actions,
                }
            })
            .collect();
        RawPolicy {
            schema: 1,
            horizon: p.horizon(),
            rows,
        }
    }
}

impl TryFrom<RawPolicy> for LatticePolicy {
    type Error = Error;

    fn try_from(raw: RawPolicy) -> Result<Self> {
        if raw.rows.len() != raw.horizon {
            return Err(Error::InvalidPolicy("row count differs from horizon".into()));
        }
        let mut rows = Vec::with_capacity(raw.horizon);
        for r in raw.rows {
            if r.ends.len() != r.actions.len() {
                return Err(Error::InvalidPolicy("ends and actions differ in length".into()));
            }
            let mut actions = Vec::new();
            let mut pos = r.start;
            for (&end, &code) in r.ends.iter().zip(&r.actions) {
                if end <= pos {
                    return Err(Error::InvalidPolicy("segment ends must increase".into()));
                }
                actions.extend(std::iter::repeat_n(Action::from_code(code), end - pos));
                pos = end;
            }
            rows.push(PolicyRow {
                start: r.start,
                actions,
            });
        }
        let p = LatticePolicy { rows };
        p.validate()?;
        Ok(p)
    }
}

fn require_bernoulli(spec: &TestSpec) -> Result<()> {
    match spec.model() {
        Model::Bernoulli => Ok(()),
        other => Err(Error::UnsupportedModel(format!(
            "exact lattice evaluation needs the bernoulli model, got {}",
            other.name()
        ))),
    }
}

/// Log-density tables of one lattice state for every hypothesis and
/// evaluation point.
struct LogDensities {
    ln_theta: Vec<(f64, f64)>,
    ln_eval: Vec<(f64, f64)>,
    theta_buf: Vec<f64>,
    eval_buf: Vec<f64>,
}

impl LogDensities {
    fn new(spec: &TestSpec) -> Self {
        let pair = |t: &f64| (t.ln(), (1.0 - t).ln());
        LogDensities {
            ln_theta: spec.thetas().iter().map(pair).collect(),
            ln_eval: spec.evals().iter().map(pair).collect(),
            theta_buf: vec![0.0; spec.k()],
            eval_buf: vec![0.0; spec.num_evals()],
        }
    }

    fn fill(&mut self, n: usize, s: usize) {
        let sf = s as f64;
        let ff = (n - s) as f64;
        for (o, (a, b)) in self.theta_buf.iter_mut().zip(&self.ln_theta) {
            *o = sf * a + ff * b;
        }
        for (o, (a, b)) in self.eval_buf.iter_mut().zip(&self.ln_eval) {
            *o = sf * a + ff * b;
        }
    }
}

/// DBC rule on lattice cells. Densities are rescaled by their common
/// maximum and compared in linear space; cells where the comparison or the
/// argmin is within 1e-9 of a tie are re-decided by the log-space rule, so
/// decisions agree with [`DbcRule`] exactly.
struct DbcCells {
    rule: DbcRule,
    lambdas: Vec<Vec<f64>>,
    /// `log_lambdas[j][i]` = ln λ_ij.
    log_lambdas: Vec<Vec<f64>>,
    gammas: Vec<f64>,
    log_gammas: Vec<f64>,
    /// ln(k − 1) and ln K: gaps between a max term and the full sum.
    slack_theta: f64,
    slack_eval: f64,
    dens: LogDensities,
    e_theta: Vec<f64>,
    lower: Vec<f64>,
}

/// (argmin, stops, log v, log f) of one cell.
type CellEval = (usize, bool, f64, f64);

const TIE_MARGIN: f64 = 1e-9;

impl DbcCells {
    fn new(spec: &TestSpec) -> Self {
        let k = spec.k();
        DbcCells {
            rule: DbcRule::new(spec),
            lambdas: spec.lambdas().to_vec(),
            log_lambdas: crate::dbc::log_lambda_columns(spec.lambdas()),
            gammas: spec.gammas().to_vec(),
            log_gammas: spec.gammas().iter().map(|g| g.ln()).collect(),
            slack_theta: ((k - 1) as f64).ln(),
            slack_eval: (spec.num_evals() as f64).ln(),
            dens: LogDensities::new(spec),
            e_theta: vec![0.0; k],
            lower: vec![0.0; k],
        }
    }

    /// Action of a cell when max-term bounds on the log sums settle it
    /// beyond rounding; `None` when the exact computation is needed.
    fn quick(&mut self, n: usize, s: usize) -> Option<(usize, bool)> {
        const MARGIN: f64 = 1e-6;
        self.dens.fill(n, s);
        let d = &self.dens;
        for (lo, col) in self.lower.iter_mut().zip(&self.log_lambdas) {
            *lo = col
                .iter()
                .zip(&d.theta_buf)
                .map(|(a, b)| a + b)
                .fold(f64::NEG_INFINITY, f64::max);
        }
        let f_lo = self
            .log_gammas
            .iter()
            .zip(&d.eval_buf)
            .map(|(a, b)| a + b)
            .fold(f64::NEG_INFINITY, f64::max);
        if !f_lo.is_finite() || self.lower.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let f_hi = f_lo + self.slack_eval;
        let (mut j, mut first, mut second) = (0usize, f64::INFINITY, f64::INFINITY);
        for (i, &v) in self.lower.iter().enumerate() {
            if v < first {
                second = first;
                first = v;
                j = i;
            } else if v < second {
                second = v;
            }
        }
        if first > f_hi + MARGIN {
            return Some((j, false));
        }
        let upper = first + self.slack_theta;
        if upper + MARGIN < second && upper + MARGIN < f_lo {
            return Some((j, true));
        }
        None
    }

    fn eval(&mut self, n: usize, s: usize) -> CellEval {
        self.dens.fill(n, s);
        let d = &self.dens;
        let m = d
            .theta_buf
            .iter()
            .chain(&d.eval_buf)
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        for (e, l) in self.e_theta.iter_mut().zip(&d.theta_buf) {
            *e = (l - m).exp();
        }
        let f: f64 = self
            .gammas
            .iter()
            .zip(&d.eval_buf)
            .map(|(g, l)| g * (l - m).exp())
            .sum();
        let k = self.e_theta.len();
        let (mut best, mut best_v, mut second) = (0usize, f64::INFINITY, f64::INFINITY);
        for j in 0..k {
            let mut r = 0.0;
            for (i, e) in self.e_theta.iter().enumerate() {
                if i != j {
                    r += self.lambdas[i][j] * e;
                }
            }
            if r < best_v {
                second = best_v;
                best_v = r;
                best = j;
            } else if r < second {
                second = r;
            }
        }
        let near = |a: f64, b: f64| (a - b).abs() <= TIE_MARGIN * a.max(b);
        if near(best_v, second) || near(best_v, f) {
            let (j, log_v) = self.rule.min_candidate(&d.theta_buf);
            let log_f = self.rule.log_mixture(&d.eval_buf);
            return (j, log_v <= log_f, log_v, log_f);
        }
        (best, best_v <= f, best_v.ln() + m, f.ln() + m)
    }
}

/// DBC policy of a Bernoulli spec truncated at the spec's horizon (or its
/// safety cap). The last row stops with the DBC decision rule.
pub fn dbc_lattice(spec: &TestSpec) -> Result<LatticePolicy> {
    dbc_lattice_with_horizon(spec, spec.horizon().cap())
}

pub fn dbc_lattice_with_horizon(spec: &TestSpec, horizon: usize) -> Result<LatticePolicy> {
    require_bernoulli(spec)?;
    let mut cells = DbcCells::new(spec);
    LatticePolicy::from_rule(horizon, |n, s, last| {
        // A quick "continue" carries no reliable decision, and the last row
        // needs one.
        let quick = if last { None } else { cells.quick(n, s) };
        let (j, stop) = match quick {
            Some(q) => q,
            None => {
                let (j, stop, _, _) = cells.eval(n, s);
                (j, stop)
            }
        };
        if last || stop {
            Action::Stop(j)
        } else {
            Action::Continue
        }
    })
}

/// Tabulates an arbitrary [`SequentialRule`] on the lattice of a Bernoulli
/// spec, forcing its terminal decision on the last row.
pub fn rule_lattice(
    rule: &dyn SequentialRule,
    spec: &TestSpec,
    horizon: usize,
) -> Result<LatticePolicy> {
    require_bernoulli(spec)?;
    LatticePolicy::from_rule(horizon, |n, s, last| {
        let st = LogLikState::bernoulli(n, s, spec.thetas(), spec.evals());
        if last {
            Action::Stop(rule.terminal_decision(&st))
        } else {
            rule.verdict(&st).into()
        }
    })
}

/// Parameter values a report must cover: hypotheses, evaluation points, then
/// extras, without exact duplicates.
pub fn report_params(spec: &TestSpec, extra: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &t in spec.thetas().iter().chain(spec.evals()).chain(extra) {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Exact forward evaluation of `policy` under the single parameter `theta`.
pub fn evaluate_param(policy: &LatticePolicy, k: usize, theta: f64) -> Result<ParamSummary> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Spec(format!("success probability {theta} outside (0, 1)")));
    }
    let horizon = policy.horizon();
    let (p, q) = (theta, 1.0 - theta);
    let mut accept = vec![0.0; k];
    let mut stop_dist = vec![0.0; horizon];
    let mut cur = vec![q, p];
    let mut next: Vec<f64> = Vec::new();
    for n in 1..=horizon {
        let row = &policy.rows[n - 1];
        debug_assert_eq!(cur.len(), row.actions.len());
        let next_start = if n < horizon {
            let nr = &policy.rows[n];
            next.clear();
            next.resize(nr.actions.len(), 0.0);
            nr.start
        } else {
            0
        };
        let mut stopped = 0.0;
        for (i, (&m, a)) in cur.iter().zip(&row.actions).enumerate() {
            if m == 0.0 {
                continue;
            }
            match *a {
                Action::Stop(j) => {
                    if j >= k {
                        return Err(Error::InvalidPolicy(format!(
                            "accepts hypothesis {} of {k}",
                            j + 1
                        )));
                    }
                    accept[j] += m;
                    stopped += m;
                }
                Action::Continue => {
                    let idx = row.start + i - next_start;
                    next[idx] += m * q;
                    next[idx + 1] += m * p;
                }
            }
        }
        stop_dist[n - 1] = stopped;
        std::mem::swap(&mut cur, &mut next);
    }
    let ess = stop_dist
        .iter()
        .enumerate()
        .map(|(i, m)| (i + 1) as f64 * m)
        .sum();
    let horizon_mass = stop_dist[horizon - 1];
    Ok(ParamSummary {
        theta,
        accept,
        ess,
        stop_dist,
        horizon_mass,
    })
}

/// Exact report of `policy` for `spec`, covering the hypotheses, the
/// evaluation points and `extra` parameter values.
pub fn evaluate(policy: &LatticePolicy, spec: &TestSpec, extra: &[f64]) -> Result<TestReport> {
    require_bernoulli(spec)?;
    if policy.horizon() > spec.horizon().cap() {
        return Err(Error::InvalidPolicy(format!(
            "policy horizon {} exceeds the spec horizon {}",
            policy.horizon(),
            spec.horizon().cap()
        )));
    }
    policy.validate()?;
    let params = report_params(spec, extra);
    let summaries = params
        .par_iter()
        .map(|&t| evaluate_param(policy, spec.k(), t))
        .collect::<Result<Vec<_>>>()?;
    TestReport::assemble(spec, summaries, None, None)
}

/// A row-by-row DBC tabulation keeping the log quantities the backward
/// induction needs.
struct DbcTable {
    rows: Vec<DbcRow>,
}

struct DbcRow {
    start: usize,
    /// DBC stopping (forced on the last row); `log_v`/`log_f` are NaN on
    /// cells no continuing state leads to.
    stops: Vec<bool>,
    log_v: Vec<f64>,
    argmin: Vec<usize>,
    log_f: Vec<f64>,
}

impl DbcTable {
    fn build(spec: &TestSpec, horizon: usize) -> Self {
        let mut cells = DbcCells::new(spec);
        let mut rows: Vec<DbcRow> = Vec::with_capacity(horizon);
        let (mut start, mut len) = (0usize, 2usize);
        for n in 1..=horizon {
            let mut row = DbcRow {
                start,
                stops: Vec::with_capacity(len),
                log_v: Vec::with_capacity(len),
                argmin: Vec::with_capacity(len),
                log_f: Vec::with_capacity(len),
            };
            let prev = rows.last();
            let (mut lo, mut hi) = (usize::MAX, 0usize);
            for s in start..start + len {
                // Values are only needed where a continuing parent can lead.
                let reachable = prev.is_none_or(|p| {
                    let cont = |t: usize| {
                        t >= p.start && t - p.start < p.stops.len() && !p.stops[t - p.start]
                    };
                    cont(s) || (s > 0 && cont(s - 1))
                });
                let quick = if reachable { None } else { cells.quick(n, s) };
                let (j, stop, v, f) = match quick {
                    Some((j, true)) => (j, true, f64::NAN, f64::NAN),
                    _ => cells.eval(n, s),
                };
                let stop = stop || n == horizon;
                if !stop {
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
                row.stops.push(stop);
                row.log_v.push(v);
                row.argmin.push(j);
                row.log_f.push(f);
            }
            rows.push(row);
            if lo == usize::MAX {
                start = 0;
                len = 0;
            } else {
                start = lo;
                len = hi - lo + 2;
            }
        }
        DbcTable { rows }
    }
}

/// The optimal truncated test and its minimal Lagrangian.
#[derive(Debug, Clone)]
pub struct OptimalTest {
    pub policy: LatticePolicy,
    /// 1 + 𝓘₁V₁ᴺ, the smallest Lagrangian over all tests truncated at N.
    pub minimal_lagrangian: f64,
}

/// Optimal test truncated at `horizon` by backward induction:
/// V_N = v_N and V_{n−1} = min{v_{n−1}, f_{γϑ}^{n−1} + V_n(·, s) + V_n(·, s+1)}.
/// The rule stops where v_n ≤ f_{γϑ}ⁿ + 𝓘V_{n+1} (equality stops) and
/// decides like the DBC rule.
///
/// Only states reachable under the DBC rule are tabulated: the optimal rule
/// stops wherever the DBC rule does, so it never reaches anything else.
pub fn backward_optimal(spec: &TestSpec, horizon: usize) -> Result<OptimalTest> {
    require_bernoulli(spec)?;
    if horizon == 0 {
        return Err(Error::InvalidPolicy("horizon must be at least 1".into()));
    }
    let table = DbcTable::build(spec, horizon);
    let mut policy_rows: Vec<PolicyRow> = Vec::with_capacity(horizon);
    // log V over the window of the row below the current one.
    let mut below: Vec<f64> = Vec::new();
    let mut below_start = 0usize;
    for n in (1..=horizon).rev() {
        let row = &table.rows[n - 1];
        let len = row.log_v.len();
        let mut values = Vec::with_capacity(len);
        let mut actions = Vec::with_capacity(len);
        for i in 0..len {
            let v = row.log_v[i];
            let f = row.log_f[i];
            let stop = Action::Stop(row.argmin[i]);
            if row.stops[i] {
                values.push(v);
                actions.push(stop);
                continue;
            }
            let s = row.start + i;
            let idx = s - below_start;
            let future = log_add_exp(below[idx], below[idx + 1]);
            let cont = log_add_exp(f, future);
            if v <= cont {
                values.push(v);
                actions.push(stop);
            } else {
                values.push(cont);
                actions.push(Action::Continue);
            }
        }
        policy_rows.push(PolicyRow {
            start: row.start,
            actions,
        });
        below = values;
        below_start = row.start;
    }
    policy_rows.reverse();
    let minimal_lagrangian = 1.0 + log_add_exp(below[0], below[1]).exp();
    let policy = LatticePolicy { rows: policy_rows };
    policy.validate()?;
    Ok(OptimalTest {
        policy,
        minimal_lagrangian,
    })
}

/// One point of an operating-characteristic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcPoint {
    pub theta: f64,
    /// Probability of accepting one of the `accept_set` hypotheses.
    pub oc: f64,
    pub ess: f64,
}

/// OC and ESS of `policy` along `theta_grid`. The OC counts acceptance of
/// any hypothesis in `accept_set`.
pub fn oc_ess_curve(
    policy: &LatticePolicy,
    k: usize,
    theta_grid: &[f64],
    accept_set: &[usize],
) -> Result<Vec<OcPoint>> {
    if let Some(&j) = accept_set.iter().find(|&&j| j >= k) {
        return Err(Error::Spec(format!("hypothesis index {} out of range", j + 1)));
    }
    policy.validate()?;
    theta_grid
        .par_iter()
        .map(|&theta| {
            let p = evaluate_param(policy, k, theta)?;
            Ok(OcPoint {
                theta,
                oc: accept_set.iter().map(|&j| p.accept[j]).sum(),
                ess: p.ess,
            })
        })
        .collect()
}

/// Path-enumeration oracle for a rule acting on raw log-likelihood states.
/// Every 0/1 sequence up to `horizon` is walked with the model's per-step
/// increments, independently of the lattice machinery.
pub fn brute_force_rule(
    rule: &dyn SequentialRule,
    spec: &TestSpec,
    horizon: usize,
    extra: &[f64],
) -> Result<TestReport> {
    require_bernoulli(spec)?;
    check_brute_horizon(horizon)?;
    let params = report_params(spec, extra);
    let summaries = params
        .iter()
        .map(|&theta| {
            let mut acc = PathAccumulator::new(spec.k(), horizon);
            let st = LogLikState::initial(spec.k(), spec.num_evals());
            walk_rule(rule, spec, horizon, theta, st, 1.0, &mut acc)?;
            Ok(acc.finish(theta))
        })
        .collect::<Result<Vec<_>>>()?;
    TestReport::assemble(spec, summaries, None, None)
}

/// Path-enumeration oracle for a tabulated policy.
pub fn brute_force_policy(
    policy: &LatticePolicy,
    spec: &TestSpec,
    extra: &[f64],
) -> Result<TestReport> {
    require_bernoulli(spec)?;
    let horizon = policy.horizon();
    check_brute_horizon(horizon)?;
    let params = report_params(spec, extra);
    let summaries = params
        .iter()
        .map(|&theta| {
            let mut acc = PathAccumulator::new(spec.k(), horizon);
            walk_policy(policy, theta, 0, 0, 1.0, &mut acc)?;
            Ok(acc.finish(theta))
        })
        .collect::<Result<Vec<_>>>()?;
    TestReport::assemble(spec, summaries, None, None)
}

fn check_brute_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 || horizon > BRUTE_FORCE_MAX_HORIZON {
        return Err(Error::Spec(format!(
            "path enumeration supports horizons 1..={BRUTE_FORCE_MAX_HORIZON}, got {horizon}"
        )));
    }
    Ok(())
}

struct PathAccumulator {
    accept: Vec<f64>,
    stop_dist: Vec<f64>,
}

impl PathAccumulator {
    fn new(k: usize, horizon: usize) -> Self {
        PathAccumulator {
            accept: vec![0.0; k],
            stop_dist: vec![0.0; horizon],
        }
    }

    fn record(&mut self, n: usize, j: usize, prob: f64) {
        self.accept[j] += prob;
        self.stop_dist[n - 1] += prob;
    }

    fn finish(self, theta: f64) -> ParamSummary {
        let ess = self
            .stop_dist
            .iter()
            .enumerate()
            .map(|(i, m)| (i + 1) as f64 * m)
            .sum();
        let horizon_mass = *self.stop_dist.last().unwrap();
        ParamSummary {
            theta,
            accept: self.accept,
            ess,
            stop_dist: self.stop_dist,
            horizon_mass,
        }
    }
}

fn walk_rule(
    rule: &dyn SequentialRule,
    spec: &TestSpec,
    horizon: usize,
    theta: f64,
    state: LogLikState,
    prob: f64,
    acc: &mut PathAccumulator,
) -> Result<()> {
    for x in [0.0, 1.0] {
        let mut st = state.clone();
        st.observe(&spec.model(), spec.thetas(), spec.evals(), x)?;
        let p = prob * if x == 1.0 { theta } else { 1.0 - theta };
        let n = st.n;
        if n == horizon {
            let v = rule.verdict(&st);
            let j = v.accepted().unwrap_or_else(|| rule.terminal_decision(&st));
            acc.record(n, j, p);
        } else {
            match rule.verdict(&st) {
                Verdict::Accept(j) => acc.record(n, j, p),
                Verdict::Continue => walk_rule(rule, spec, horizon, theta, st, p, acc)?,
            }
        }
    }
    Ok(())
}

fn walk_policy(
    policy: &LatticePolicy,
    theta: f64,
    n: usize,
    s: usize,
    prob: f64,
    acc: &mut PathAccumulator,
) -> Result<()> {
    for x in [0usize, 1] {
        let (n1, s1) = (n + 1, s + x);
        let p = prob * if x == 1 { theta } else { 1.0 - theta };
        match policy.action(n1, s1) {
            Some(Action::Stop(j)) => acc.record(n1, j, p),
            Some(Action::Continue) => walk_policy(policy, theta, n1, s1, p, acc)?,
            None => {
                return Err(Error::InvalidPolicy(format!(
                    "path reaches unstored state ({n1}, {s1})"
                )))
            }
        }
    }
    Ok(())
}

/// Per-sequence log density of the γ-weighted evaluation mixture at (n, s).
pub fn log_mixture_density(spec: &TestSpec, n: usize, s: usize) -> f64 {
    let terms: Vec<f64> = spec
        .evals()
        .iter()
        .zip(spec.gammas())
        .map(|(&t, &g)| g.ln() + bernoulli_log_density(n, s, t))
        .collect();
    crate::numeric::log_sum_exp(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Horizon;

    fn spec2(n: usize) -> TestSpec {
        TestSpec::bayes(
            Model::Bernoulli,
            vec![0.3, 0.7],
            vec![0.5, 0.5],
            &[2.0, 2.0],
            Horizon::Finite(n),
        )
        .unwrap()
    }

    #[test]
    fn one_step_policy() {
        let spec = spec2(1);
        let p = dbc_lattice(&spec).unwrap();
        assert_eq!(p.horizon(), 1);
        // Forced stop on the only row; s = 0 favours θ = 0.3.
        assert_eq!(p.action(1, 0), Some(Action::Stop(0)));
        assert_eq!(p.action(1, 1), Some(Action::Stop(1)));
        let r = evaluate(&p, &spec, &[]).unwrap();
        assert!((r.alpha[0][0] - 0.7).abs() < 1e-15);
        assert_eq!(r.weighted_ess, 1.0);
    }

    #[test]
    fn rows_do_not_depend_on_horizon() {
        let a = dbc_lattice(&spec2(30).with_horizon(Horizon::Finite(30)).unwrap()).unwrap();
        let b = dbc_lattice(&spec2(60).with_horizon(Horizon::Finite(60)).unwrap()).unwrap();
        for n in 1..30 {
            assert_eq!(a.window(n), b.window(n));
            let (start, len) = a.window(n);
            for s in start..start + len {
                assert_eq!(a.action(n, s), b.action(n, s));
            }
        }
    }

    #[test]
    fn truncation_is_validated() {
        let mut p = dbc_lattice(&spec2(5)).unwrap();
        let (start, _) = p.window(5);
        p.set_action(5, start, Action::Continue).unwrap();
        assert!(p.validate().is_err());
        assert!(evaluate(&p, &spec2(5), &[]).is_err());
    }

    #[test]
    fn policy_json_round_trip() {
        let spec = spec2(40);
        let p = dbc_lattice(&spec).unwrap();
        let text = p.to_json().unwrap();
        assert_eq!(LatticePolicy::from_json(&text).unwrap(), p);
    }

    #[test]
    fn brute_force_rejects_long_horizons() {
        let spec = spec2(13);
        let p = dbc_lattice(&spec).unwrap();
        assert!(brute_force_policy(&p, &spec, &[]).is_err());
        assert!(brute_force_rule(&DbcRule::new(&spec), &spec, 13, &[]).is_err());
    }

    #[test]
    fn always_stop_at_one() {
        let spec = spec2(8);
        let p = LatticePolicy::from_rule(8, |_, _, _| Action::Stop(0)).unwrap();
        let r = evaluate(&p, &spec, &[0.5]).unwrap();
        assert_eq!(r.ess_at(0.5), Some(1.0));
        let b = brute_force_policy(&p, &spec, &[0.5]).unwrap();
        assert_eq!(b.ess_at(0.5), Some(1.0));
    }

    #[test]
    fn single_step_backward() {
        let spec = spec2(1);
        let opt = backward_optimal(&spec, 1).unwrap();
        // 1 + v_1(0) + v_1(1) with v = min_j Σ_{i≠j} λ_i f_i.
        let v = |s: usize| {
            let f1 = bernoulli_log_density(1, s, 0.3).exp();
            let f2 = bernoulli_log_density(1, s, 0.7).exp();
            (2.0 * f1).min(2.0 * f2)
        };
        assert!((opt.minimal_lagrangian - (1.0 + v(0) + v(1))).abs() < 1e-14);
    }
}
