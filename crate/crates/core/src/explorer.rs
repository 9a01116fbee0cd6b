//! Counterexample search, optimal-p estimation, conjecture probing and
//! high-precision adjudication.
//!
//! Searches minimize the relative gap in double precision. The point they
//! settle on is then classified, escalating to [`BigFloat`](crate::BigFloat)
//! arithmetic when the policy allows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    lookup, DecimalPoint, GapReport, InequalityCase, Point, Precision, Verdict, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::means::{weighted_arithmetic, weighted_geometric, weighted_log_mean_naive, ScalarPair, WeightSplit};
use crate::scalar::fmt17;

/// Smallest digit count accepted for adjudication.
pub const MIN_DIGITS: u32 = 30;
/// Digits used by the optimal-p probe at minimum.
pub const OPTIMAL_P_DIGITS: u32 = 50;
/// Number of smallest samples refined by the conjecture probe.
pub const PROBE_KEEP: usize = 100;
const PROBE_CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecisionPolicy {
    DoubleOnly,
    Escalate { digits: u32 },
}

/// Placement of the grid values on the `v` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    /// Uniform in `ln(v/(1−v))`, crowding both ends.
    Logit,
}

/// Search box, resolution, budget and precision policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub ln_a: (f64, f64),
    pub ln_b: (f64, f64),
    /// `v` ranges over `[δ, 1 − δ]` unless `v_range` narrows it.
    pub delta: f64,
    pub v_range: Option<(f64, f64)>,
    pub v_spacing: Spacing,
    pub r_range: (f64, f64),
    /// Fixed mix coefficient for cases that take `p`.
    pub p: Option<f64>,
    pub resolution: usize,
    /// Simplex iterations per refinement.
    pub budget: usize,
    /// Grid minima used as refinement starts.
    pub refine_starts: usize,
    pub seed: u64,
    pub policy: PrecisionPolicy,
    /// Relative tolerance of the double-precision verdict.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            ln_a: (-13.8, 13.8),
            ln_b: (-13.8, 13.8),
            delta: 1e-9,
            v_range: None,
            v_spacing: Spacing::Linear,
            r_range: (-2.0, 2.0),
            p: None,
            resolution: 16,
            budget: 400,
            refine_starts: 4,
            seed: 0,
            policy: PrecisionPolicy::Escalate { digits: 50 },
            tol: DEFAULT_TOLERANCE,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.resolution < 2 {
            return bad(format!("resolution must be at least 2, got {}", self.resolution));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad(format!("delta must lie in (0, 1/2), got {}", self.delta));
        }
        if let PrecisionPolicy::Escalate { digits } = self.policy {
            if digits < MIN_DIGITS {
                return bad(format!("escalation needs at least {MIN_DIGITS} digits, got {digits}"));
            }
        }
        let (v_lo, v_hi) = self.v_bounds();
        for (name, (lo, hi)) in [
            ("ln_a", self.ln_a),
            ("ln_b", self.ln_b),
            ("v", (v_lo, v_hi)),
            ("r", self.r_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("range {name} = [{lo}, {hi}] is not a finite interval"));
            }
        }
        if !(0.0..=1.0).contains(&v_lo) || !(0.0..=1.0).contains(&v_hi) {
            return bad(format!("v range [{v_lo}, {v_hi}] leaves [0, 1]"));
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("p must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }

    pub fn v_bounds(&self) -> (f64, f64) {
        self.v_range.unwrap_or((self.delta, 1.0 - self.delta))
    }
}

/// Outcome class of a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessStatus {
    Violated,
    NoViolationFound,
    Indeterminate,
}

impl WitnessStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            WitnessStatus::Violated => "violated",
            WitnessStatus::NoViolationFound => "no-violation-found",
            WitnessStatus::Indeterminate => "indeterminate",
        }
    }
}

/// Best point of a search and its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub case: &'static str,
    /// Evaluation at the reported precision.
    pub report: GapReport,
    /// Double-precision evaluation at the same point.
    pub double: GapReport,
    pub status: WitnessStatus,
    pub evaluations: u64,
}

impl SearchResult {
    pub fn point(&self) -> &DecimalPoint {
        &self.report.point
    }
}

/// Evaluates case `key` at `digits` significant digits.
///
/// A `violated` verdict is re-evaluated at twice the digits and demoted to
/// `indeterminate` unless it repeats.
pub fn adjudicate(key: &str, pt: &DecimalPoint, digits: u32) -> Result<GapReport> {
    adjudicate_case(lookup(key)?, pt, digits)
}

fn adjudicate_case(case: &InequalityCase, pt: &DecimalPoint, digits: u32) -> Result<GapReport> {
    if digits < MIN_DIGITS {
        return Err(Error::InvalidConfig(format!(
            "adjudication needs at least {MIN_DIGITS} digits, got {digits}"
        )));
    }
    let mut report = case.report(pt, Precision::BigFloat { digits }, 0.0)?;
    if report.verdict == Verdict::Violated {
        let confirm = case.report(pt, Precision::BigFloat { digits: 2 * digits }, 0.0)?;
        if confirm.verdict != Verdict::Violated {
            report.verdict = Verdict::Indeterminate;
        }
    }
    Ok(report)
}

/// Search coordinates: `(ln a, ln b, v, r)` restricted to what the case uses.
struct Space<'a> {
    case: &'a InequalityCase,
    lo: Vec<f64>,
    hi: Vec<f64>,
    p: Option<f64>,
}

impl<'a> Space<'a> {
    fn new(case: &'a InequalityCase, config: &SearchConfig) -> Result<Self> {
        config.validate()?;
        let mut lo = vec![config.ln_a.0, config.ln_b.0];
        let mut hi = vec![config.ln_a.1, config.ln_b.1];
        if case.params.v {
            let (a, b) = config.v_bounds();
            lo.push(a);
            hi.push(b);
        }
        if case.params.r {
            lo.push(config.r_range.0);
            hi.push(config.r_range.1);
        }
        let p = if case.params.p {
            Some(config.p.ok_or_else(|| Error::MissingParameter {
                case: case.key.to_string(),
                param: "p",
            })?)
        } else {
            None
        };
        Ok(Self { case, lo, hi, p })
    }

    fn dims(&self) -> usize {
        self.lo.len()
    }

    fn point(&self, z: &[f64]) -> Point<f64> {
        let mut pt = Point::new(z[0].exp(), z[1].exp());
        let mut k = 2;
        if self.case.params.v {
            pt.v = Some(z[k]);
            k += 1;
        }
        if self.case.params.r {
            pt.r = Some(z[k]);
        }
        pt.p = self.p;
        pt
    }

    fn coords(&self, pt: &Point<f64>) -> Vec<f64> {
        let mut z = vec![pt.a.ln(), pt.b.ln()];
        if self.case.params.v {
            z.push(pt.v.unwrap_or(0.5));
        }
        if self.case.params.r {
            z.push(pt.r.unwrap_or(1.0));
        }
        z
    }

    /// Relative gap, `+∞` outside the domain.
    fn objective(&self, z: &[f64]) -> f64 {
        match self.case.evaluate(&self.point(z)) {
            Ok(e) if e.relative_gap.is_finite() => e.relative_gap,
            _ => f64::INFINITY,
        }
    }

    fn clamp(&self, z: &mut [f64]) {
        for (x, (lo, hi)) in z.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *x = x.clamp(*lo, *hi);
        }
    }
}

fn axis_values(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Vec<f64> {
    match spacing {
        Spacing::Linear => crate::catalog::linspace(lo, hi, n),
        Spacing::Logit => {
            let logit = |v: f64| (v / (1.0 - v)).ln();
            let (s_lo, s_hi) = (logit(lo.max(f64::MIN_POSITIVE)), logit(hi.min(1.0 - f64::EPSILON)));
            let mut out: Vec<f64> = crate::catalog::linspace(s_lo, s_hi, n)
                .into_iter()
                .map(|s| 1.0 / (1.0 + (-s).exp()))
                .collect();
            out[0] = lo;
            out[n - 1] = hi;
            out
        }
    }
}

/// Grid minima, smallest first, ties by grid index.
struct Scan {
    best: Vec<(f64, usize, Vec<f64>)>,
    evaluations: u64,
}

fn scan(space: &Space<'_>, config: &SearchConfig, keep: usize) -> Result<Scan> {
    let n = config.resolution;
    let mut axes = vec![
        crate::catalog::linspace(space.lo[0], space.hi[0], n),
        crate::catalog::linspace(space.lo[1], space.hi[1], n),
    ];
    let mut k = 2;
    if space.case.params.v {
        axes.push(axis_values(space.lo[k], space.hi[k], n, config.v_spacing));
        k += 1;
    }
    if space.case.params.r {
        axes.push(crate::catalog::linspace(space.lo[k], space.hi[k], n));
    }
    let total = axes.iter().map(Vec::len).product::<usize>();
    let coords = |mut idx: usize| -> Vec<f64> {
        let mut z = vec![0.0; axes.len()];
        for d in (0..axes.len()).rev() {
            z[d] = axes[d][idx % axes[d].len()];
            idx /= axes[d].len();
        }
        z
    };
    let mut values: Vec<(f64, usize)> = (0..total)
        .into_par_iter()
        .map(|i| (space.objective(&coords(i)), i))
        .collect();
    values.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    if values.first().is_none_or(|v| v.0 == f64::INFINITY) {
        return Err(Error::DomainViolation {
            case: space.case.key.to_string(),
            reason: "no grid point lies in the domain".into(),
        });
    }
    let best = values
        .into_iter()
        .take(keep.max(1))
        .filter(|v| v.0.is_finite())
        .map(|(g, i)| (g, i, coords(i)))
        .collect();
    Ok(Scan {
        best,
        evaluations: total as u64,
    })
}

/// Classifies the settled point under the policy.
fn finalize(
    case: &'static InequalityCase,
    pt: &Point<f64>,
    config: &SearchConfig,
    evaluations: u64,
) -> Result<SearchResult> {
    let decimal = pt.to_decimal();
    let double = case.report(&decimal, Precision::Double, config.tol)?;
    let (report, status) = match config.policy {
        PrecisionPolicy::DoubleOnly => {
            let status = match double.verdict {
                Verdict::Holds => WitnessStatus::NoViolationFound,
                Verdict::Violated => WitnessStatus::Violated,
                Verdict::Indeterminate => WitnessStatus::Indeterminate,
            };
            (double.clone(), status)
        }
        PrecisionPolicy::Escalate { .. } if double.verdict == Verdict::Holds => {
            (double.clone(), WitnessStatus::NoViolationFound)
        }
        PrecisionPolicy::Escalate { digits } => {
            let high = adjudicate_case(case, &decimal, digits)?;
            let status = match high.verdict {
                Verdict::Violated => WitnessStatus::Violated,
                // zero to the adjudication precision: an equality point
                Verdict::Indeterminate if high.gap.abs() < high.bound => {
                    WitnessStatus::NoViolationFound
                }
                Verdict::Indeterminate => WitnessStatus::Indeterminate,
                Verdict::Holds => WitnessStatus::NoViolationFound,
            };
            (high, status)
        }
    };
    Ok(SearchResult {
        case: case.key,
        report,
        double,
        status,
        evaluations,
    })
}

/// Full-grid evaluation; returns the grid point of smallest relative gap.
///
/// Grid points outside the case domain are skipped; a grid with no point in
/// the domain is an error.
pub fn grid_scan(key: &str, config: &SearchConfig) -> Result<SearchResult> {
    let case = lookup(key)?;
    let space = Space::new(case, config)?;
    let s = scan(&space, config, 1)?;
    let pt = space.point(&s.best[0].2);
    finalize(case, &pt, config, s.evaluations)
}

/// Nelder–Mead descent on the relative gap from `start`, clamped to the search box.
pub fn refine(key: &str, start: &Point<f64>, config: &SearchConfig) -> Result<SearchResult> {
    let case = lookup(key)?;
    let mut start = start.clone().restricted(case.params);
    if case.params.p && start.p.is_none() {
        start.p = config.p;
    }
    case.check_domain(&start)?;
    let mut space = Space::new(case, &SearchConfig { p: start.p.or(config.p), ..config.clone() })?;
    let z0 = space.coords(&start);
    for (d, &x) in z0.iter().enumerate() {
        space.lo[d] = space.lo[d].min(x);
        space.hi[d] = space.hi[d].max(x);
    }
    let (z, evaluations) = nelder_mead(&space, &z0, config.budget);
    let pt = if z == z0 { start } else { space.point(&z) };
    finalize(case, &pt, config, evaluations)
}

/// Grid scan followed by refinement from the best `refine_starts` grid points.
pub fn search(key: &str, config: &SearchConfig) -> Result<SearchResult> {
    let case = lookup(key)?;
    let space = Space::new(case, config)?;
    let s = scan(&space, config, config.refine_starts)?;
    let refined: Vec<(f64, Vec<f64>, u64)> = s
        .best
        .par_iter()
        .map(|(_, _, z)| {
            let (z, n) = nelder_mead(&space, z, config.budget);
            (space.objective(&z), z, n)
        })
        .collect();
    let evaluations = s.evaluations + refined.iter().map(|r| r.2).sum::<u64>();
    let mut best = (s.best[0].0, s.best[0].2.clone());
    for (g, z, _) in refined {
        if g < best.0 {
            best = (g, z);
        }
    }
    finalize(case, &space.point(&best.1), config, evaluations)
}

/// Minimizes the space objective from `z0`; returns the best vertex and the evaluation count.
fn nelder_mead(space: &Space<'_>, z0: &[f64], budget: usize) -> (Vec<f64>, u64) {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    if budget == 0 {
        return (z0.to_vec(), 0);
    }
    let n = space.dims();
    let mut evals = 0u64;
    let mut f = |z: &[f64]| {
        evals += 1;
        space.objective(z)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = f(z0);
    simplex.push((z0.to_vec(), f0));
    for d in 0..n {
        let width = space.hi[d] - space.lo[d];
        let step = if width > 0.0 { 0.05 * width } else { 0.0 };
        let mut z = z0.to_vec();
        z[d] = if z[d] + step <= space.hi[d] { z[d] + step } else { z[d] - step };
        space.clamp(&mut z);
        let fz = f(&z);
        simplex.push((z, fz));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        // stable: the earlier vertex wins ties, so the start stays best until beaten
        s.sort_by(|x, y| x.1.total_cmp(&y.1));
    };
    order(&mut simplex);
    for _ in 0..budget {
        let diameter = simplex[1..]
            .iter()
            .map(|(z, _)| {
                z.iter()
                    .zip(&simplex[0].0)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(z, _)| z[d]).sum::<f64>() / n as f64)
            .collect();
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            let mut z: Vec<f64> = centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            space.clamp(&mut z);
            z
        };
        let worst = simplex[n].clone();
        let zr = toward(REFLECT, &worst.0);
        let fr = f(&zr);
        if fr < simplex[0].1 {
            let ze = toward(EXPAND, &worst.0);
            let fe = f(&ze);
            simplex[n] = if fe < fr { (ze, fe) } else { (zr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (zr, fr);
        } else {
            let (zc, fc) = if fr < worst.1 {
                let z = toward(CONTRACT, &worst.0);
                let fz = f(&z);
                (z, fz)
            } else {
                let z = toward(-CONTRACT, &worst.0);
                let fz = f(&z);
                (z, fz)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (zc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let mut z: Vec<f64> = best
                        .iter()
                        .zip(&vertex.0)
                        .map(|(b, x)| b + SHRINK * (x - b))
                        .collect();
                    space.clamp(&mut z);
                    let fz = f(&z);
                    *vertex = (z, fz);
                }
            }
        }
        order(&mut simplex);
    }
    let best = simplex.swap_remove(0);
    if best.1 < f0 {
        (best.0, evals)
    } else {
        (z0.to_vec(), evals)
    }
}

/// One bisection step of the optimal-p probe.
#[derive(Debug, Clone, PartialEq)]
pub struct PStep {
    pub p: f64,
    pub result: SearchResult,
}

/// The literature's optimal-p figure re-evaluated three ways.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperWitnessCheck {
    pub point: DecimalPoint,
    /// Literal formula in double precision.
    pub naive_double: f64,
    /// Cancellation-safe kernel in double precision.
    pub safe_double: f64,
    pub adjudicated: GapReport,
    pub printed: &'static str,
    /// Signs or magnitudes of the naive and high-precision gaps disagree.
    pub disagreement: bool,
}

/// Empirical supremum bracket of `p` for which `optimal_p_mix` holds on the search box.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPResult {
    pub bracket: (f64, f64),
    pub lower: SearchResult,
    pub upper: SearchResult,
    pub steps: Vec<PStep>,
    pub paper_witness: PaperWitnessCheck,
    pub evaluations: u64,
}

/// Bisects `p ∈ [1/2, 2/3]` down to `width`, each step searching for a violated point at fixed `p`.
pub fn find_optimal_p(config: &SearchConfig, width: f64) -> Result<OptimalPResult> {
    let digits = match config.policy {
        PrecisionPolicy::DoubleOnly => return Err(Error::EscalationDisabled),
        PrecisionPolicy::Escalate { digits } => digits.max(OPTIMAL_P_DIGITS),
    };
    if width.is_nan() || width <= 0.0 {
        return Err(Error::InvalidConfig(format!("bracket width must be positive, got {width}")));
    }
    let config = SearchConfig {
        policy: PrecisionPolicy::Escalate { digits },
        v_spacing: Spacing::Logit,
        ..config.clone()
    };
    let at = |p: f64| search("optimal_p_mix", &SearchConfig { p: Some(p), ..config.clone() });
    let (mut lo, mut hi) = (0.5, 2.0 / 3.0);
    let lower = at(lo)?;
    let upper = at(hi)?;
    let mut evaluations = lower.evaluations + upper.evaluations;
    let mut steps = Vec::new();
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let result = at(mid)?;
        evaluations += result.evaluations;
        if result.status == WitnessStatus::Violated {
            hi = mid;
        } else {
            lo = mid;
        }
        steps.push(PStep { p: mid, result });
    }
    Ok(OptimalPResult {
        bracket: (lo, hi),
        lower,
        upper,
        steps,
        paper_witness: paper_witness_check(digits)?,
        evaluations,
    })
}

/// Re-evaluates the stored optimal-p figure with the naive formula, the safe kernel and the oracle.
pub fn paper_witness_check(digits: u32) -> Result<PaperWitnessCheck> {
    let case = lookup("optimal_p_mix")?;
    let witness = case
        .witnesses
        .iter()
        .find(|w| w.printed_gap.is_some())
        .expect("optimal_p_mix stores its published witness");
    let point = witness.point();
    let x: Point<f64> = point.parse()?;
    let pair = ScalarPair::new(x.a, x.b)?;
    let w = WeightSplit::new(x.v.unwrap_or(0.5))?;
    let p = x.p.unwrap_or(0.5);
    let naive_double = (1.0 - p) * weighted_arithmetic(&pair, &w) + p * weighted_geometric(&pair, &w)
        - weighted_log_mean_naive(&pair, &w);
    let safe_double = case.evaluate(&x)?.gap;
    let adjudicated = adjudicate_case(case, &point, digits)?;
    let rel = (naive_double - adjudicated.gap).abs() / adjudicated.gap.abs().max(f64::MIN_POSITIVE);
    let disagreement = naive_double.signum() != adjudicated.gap.signum() || rel > 1e-3;
    Ok(PaperWitnessCheck {
        point,
        naive_double,
        safe_double,
        adjudicated,
        printed: witness.printed_gap.unwrap_or_default(),
        disagreement,
    })
}

/// Evidence gathered on the open nested-L inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureEvidence {
    pub samples: u64,
    pub result: SearchResult,
    /// Smallest relative gap seen among the raw samples.
    pub min_sampled_gap: f64,
}

/// Random sampling of `conjecture_nested_L` plus refinement of the smallest gaps.
pub fn probe_conjecture(samples: u64, config: &SearchConfig) -> Result<ConjectureEvidence> {
    let case = lookup("conjecture_nested_L")?;
    let space = Space::new(case, config)?;
    let chunks = samples.div_ceil(PROBE_CHUNK as u64);
    let mut kept: Vec<(f64, u64, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(chunk);
            let start = chunk * PROBE_CHUNK as u64;
            let end = (start + PROBE_CHUNK as u64).min(samples);
            let mut local: Vec<(f64, u64, Vec<f64>)> = (start..end)
                .map(|i| {
                    let z: Vec<f64> = space
                        .lo
                        .iter()
                        .zip(&space.hi)
                        .map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                        .collect();
                    (space.objective(&z), i, z)
                })
                .collect();
            local.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            local.truncate(PROBE_KEEP);
            local
        })
        .collect();
    kept.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    kept.truncate(PROBE_KEEP);
    let min_sampled_gap = kept.first().map_or(f64::INFINITY, |k| k.0);
    let refined: Vec<(f64, Vec<f64>, u64)> = kept
        .par_iter()
        .map(|(_, _, z)| {
            let (z, n) = nelder_mead(&space, z, config.budget);
            (space.objective(&z), z, n)
        })
        .collect();
    let mut evaluations = samples;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (g, z, n) in refined {
        evaluations += n;
        if best.as_ref().is_none_or(|b| g < b.0) {
            best = Some((g, z));
        }
    }
    let z = best
        .map(|b| b.1)
        .ok_or_else(|| Error::InvalidConfig("conjecture probe needs at least one sample".into()))?;
    let result = finalize(case, &space.point(&z), config, evaluations)?;
    Ok(ConjectureEvidence {
        samples,
        result,
        min_sampled_gap,
    })
}

/// Text form of a search point for logs.
pub fn describe(pt: &DecimalPoint) -> String {
    pt.entries()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Double-precision relative gap of `key` at `pt`, for callers that only need the number.
pub fn relative_gap(key: &str, pt: &Point<f64>) -> Result<f64> {
    Ok(lookup(key)?.evaluate(pt)?.relative_gap)
}

/// `fmt17` of a float, re-exported for report assembly.
pub fn decimal(x: f64) -> String {
    fmt17(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SearchConfig {
        SearchConfig {
            ln_a: (-3.0, 3.0),
            ln_b: (-3.0, 3.0),
            resolution: 8,
            budget: 200,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(small().validate().is_ok());
        assert!(SearchConfig { resolution: 1, ..small() }.validate().is_err());
        assert!(SearchConfig { delta: 0.0, ..small() }.validate().is_err());
        assert!(SearchConfig { delta: 0.5, ..small() }.validate().is_err());
        let low = SearchConfig { policy: PrecisionPolicy::Escalate { digits: 20 }, ..small() };
        assert!(low.validate().is_err());
        assert!(matches!(grid_scan("nope", &small()), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn four_means_order_finds_nothing() {
        let r = grid_scan("four_means_order", &small()).unwrap();
        assert_eq!(r.status, WitnessStatus::NoViolationFound);
        assert!(r.report.gap >= -1e-15);
    }

    #[test]
    fn degenerate_grid_at_equal_arguments() {
        let cfg = SearchConfig { ln_a: (0.5, 0.5), ln_b: (0.5, 0.5), resolution: 2, ..small() };
        let r = grid_scan("wlog_half_mix", &cfg).unwrap();
        assert_eq!(r.report.gap, 0.0);
    }

    #[test]
    fn half_mix_violation_on_small_grid() {
        let cfg = SearchConfig {
            ln_a: (2f64.ln(), 2f64.ln()),
            ln_b: (0.0, 0.0),
            v_range: Some((0.0, 0.75)),
            resolution: 4,
            ..small()
        };
        let r = grid_scan("half_mix_unweighted_L", &cfg).unwrap();
        assert_eq!(r.status, WitnessStatus::Violated);
        assert_eq!(r.point().v.as_deref(), Some("0.75"));
        assert!((r.report.gap + 0.223091).abs() < 1e-5);
    }

    #[test]
    fn refine_respects_budget_and_never_worsens() {
        let start = Point::new(0.5, 1.0).with_v(0.85);
        let r0 = refine("wlog_two_thirds", &start, &SearchConfig { budget: 0, ..small() }).unwrap();
        assert_eq!(r0.point(), &start.to_decimal());
        assert_eq!(r0.evaluations, 0);
        let r = refine("wlog_two_thirds", &start, &small()).unwrap();
        let g0 = relative_gap("wlog_two_thirds", &start).unwrap();
        assert!(r.double.relative_gap <= g0);
        assert_eq!(r.status, WitnessStatus::Violated);
    }

    #[test]
    fn refine_rejects_out_of_domain_start() {
        let start = Point::new(2.0, 1.0).with_v(0.3).with_r(1.0);
        assert!(matches!(
            refine("r_young", &start, &small()),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn adjudicate_requires_digits() {
        let pt = Point::new(0.5, 1.0).with_v(0.25).to_decimal();
        assert!(adjudicate("half_mix_unweighted_L", &pt, 20).is_err());
        let r = adjudicate("half_mix_unweighted_L", &pt, 50).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.gap_text.starts_with("-0.1115457416"));
    }

    #[test]
    fn optimal_p_requires_escalation() {
        let cfg = SearchConfig { policy: PrecisionPolicy::DoubleOnly, ..small() };
        assert_eq!(find_optimal_p(&cfg, 1e-4).unwrap_err(), Error::EscalationDisabled);
    }

    #[test]
    fn probe_is_deterministic() {
        let cfg = SearchConfig { seed: 5, budget: 50, ..small() };
        let a = probe_conjecture(3000, &cfg).unwrap();
        let b = probe_conjecture(3000, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.result.status, WitnessStatus::Violated);
    }
}
