//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines come out in order.
//! The process fails if any criterion fails.

use std::time::{Duration, Instant};

use meanlab::catalog::{
    list_cases, lookup, nested_mean, random_points, Expected, Point, Precision, Verdict,
};
use meanlab::explorer::{
    adjudicate, find_optimal_p, probe_conjecture, search, SearchConfig, WitnessStatus,
};
use meanlab::means::{
    log_mean, refined_young_factor, representing_l, weighted_arithmetic, weighted_geometric,
    weighted_log_mean, MeanKind, ScalarPair, WeightSplit,
};
use meanlab::operator::{
    check_operator_case, ensemble_pair, random_spd, EnsembleSpec, OperatorCase, OperatorPair,
    PairOrder, SpdMatrix,
};
use meanlab::quadrature::{split_integral_log_mean, QuadratureRule};
use meanlab::report::{
    conjecture_findings, optimal_p_findings, search_findings, CaseRecord, ReportEnvelope,
    RunConfig,
};
use meanlab::scalar::with_digits;
use meanlab::{BigFloat, Real};
use nalgebra::{DMatrix, DVector};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn pair(a: f64, b: f64) -> ScalarPair<f64> {
    ScalarPair::new(a, b).unwrap()
}

fn w(v: f64) -> WeightSplit<f64> {
    WeightSplit::new(v).unwrap()
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

fn nested_l_gap() -> f64 {
    let p = pair(10.0, 1.0);
    nested_mean(MeanKind::Logarithmic, MeanKind::Logarithmic, &p, &w(0.25)).unwrap()
        - log_mean(&p)
}

fn c1_nested_value() -> Outcome {
    nested_l_gap();
    let start = Instant::now();
    let gap = std::hint::black_box(nested_l_gap());
    let took = start.elapsed();
    let pass = (gap - 0.0173327).abs() <= 5e-6 && took < Duration::from_millis(1);
    outcome(pass, format!("gap {gap:.10} vs 0.0173327 ± 5e-6 in {took:?}"))
}

/// Brute force: A and G straight from their definitions, L by 96-node
/// Gauss–Legendre on `∫₀¹ a^t b^{1−t} dt`.
fn brute_half_mix(a: f64, b: f64, v: f64) -> f64 {
    let arith = (1.0 - v) * a + v * b;
    let geo = ((1.0 - v) * a.ln() + v * b.ln()).exp();
    let rule = QuadratureRule::gauss_legendre(96).unwrap();
    let l = rule.integrate(0.0, 1.0, |t| (t * a.ln() + (1.0 - t) * b.ln()).exp());
    0.5 * arith + 0.5 * geo - l
}

fn c2_half_mix_witnesses() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for ((a, b, v), printed) in [((0.5, 1.0, 0.25), -0.223091), ((2.0, 1.0, 0.75), -0.446183)] {
        let pt = Point::new(a, b).with_v(v).to_decimal();
        let big = adjudicate("half_mix_unweighted_L", &pt, 50).unwrap();
        let brute = brute_half_mix(a, b, v);
        let ok = big.verdict == Verdict::Violated && big.gap < 0.0 && rel(big.gap, brute) < 1e-10;
        pass &= ok;
        notes.push(format!(
            "({a},{b},{v}) gap {} brute {brute:.12} printed {printed} ratio {:.6}",
            &big.gap_text[..16],
            printed / big.gap
        ));
    }
    outcome(pass, notes.join("; "))
}

fn c3_young_half() -> Outcome {
    let half = WeightSplit::<f64>::half();
    let big_half = with_digits(60, || {
        let h = WeightSplit::<BigFloat>::half();
        let coefficient = h.mu().clone() * h.mu().clone() / BigFloat::from_f64(2.0);
        coefficient == BigFloat::from_f64(0.125)
    });
    let exact_mu = *half.mu() == 0.5 && *half.lambda() == 0.5 && half.mu() * half.mu() / 2.0 == 0.125;
    let mut worst = 0.0f64;
    for (a, b) in [(2.0, 1.0), (1e-3, 7.0), (123.0, 0.5), (1.0, 1.0)] {
        let q = f64::ln(a) - f64::ln(b);
        let expected = 1.0 + q * q / 8.0;
        worst = worst.max(rel(refined_young_factor(&pair(a, b), &half, None), expected));
    }
    outcome(
        exact_mu && big_half && worst < 1e-15,
        format!("mu = 1/2 exactly, mu²/2 = 1/8 exactly (f64 and 60 digits); factor rel err {worst:.1e}"),
    )
}

fn c4_property_suite() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut worst_case, mut cases, mut failures) = (f64::INFINITY, "", 0, 0);
    single_threaded(|| {
        for (i, case) in list_cases().iter().enumerate() {
            if !matches!(case.expected, Expected::HoldsEverywhere | Expected::Conditional) {
                continue;
            }
            cases += 1;
            for pt in random_points(case, 100_000, SEED + i as u64, None).into_iter().flatten() {
                let g = case.evaluate(&pt).unwrap().relative_gap;
                if g < worst {
                    worst = g;
                    worst_case = case.key;
                }
                if g < -1e-12 {
                    failures += 1;
                }
            }
        }
    });
    let took = start.elapsed();
    outcome(
        failures == 0 && took < Duration::from_secs(60),
        format!("{cases} cases × 1e5 samples, min relative gap {worst:.3e} ({worst_case}), {failures} below -1e-12, {took:.1?}"),
    )
}

fn c5_expected_fails() -> Outcome {
    let start = Instant::now();
    let config = SearchConfig { resolution: 64, ..SearchConfig::default() };
    let mut pass = true;
    let mut notes = Vec::new();
    for key in ["wlog_two_thirds", "refined_young_reverse", "half_mix_unweighted_L"] {
        let r = search(key, &config).unwrap();
        let ok = r.status == WitnessStatus::Violated && matches!(r.report.precision, Precision::BigFloat { .. });
        pass &= ok;
        notes.push(format!("{key} {} gap {:.4e}", r.status.as_str(), r.report.gap));
    }
    let took = start.elapsed();
    outcome(pass && took < Duration::from_secs(30), format!("{}; {took:.1?}", notes.join(", ")))
}

fn c6_monotonicity() -> Outcome {
    let ts = meanlab::catalog::logspace(0.01, 100.0, 200);
    let vs = meanlab::catalog::linspace(0.0, 1.0, 200);
    let mut breaks = 0;
    for &t in &ts {
        let values: Vec<f64> = vs.iter().map(|&v| representing_l(t, &w(v)).unwrap()).collect();
        for pair in values.windows(2) {
            let slack = 1e-12 * pair[0].abs().max(pair[1].abs());
            let ok = if t <= 1.0 {
                pair[1] >= pair[0] - slack
            } else {
                pair[1] <= pair[0] + slack
            };
            if !ok {
                breaks += 1;
            }
        }
    }
    outcome(breaks == 0, format!("200×200 (t, v) grid, {breaks} monotonicity breaks"))
}

fn c7_nested_identities() -> Outcome {
    let case = lookup("four_means_order").unwrap();
    let points = random_points(case, 10_000, SEED, None);
    let mut worst = 0.0f64;
    for pt in points.into_iter().flatten() {
        let p = pair(pt.a, pt.b);
        let v = w((pt.a * 7.0).fract());
        for kind in [MeanKind::Arithmetic, MeanKind::Geometric, MeanKind::Harmonic] {
            let nested = nested_mean(kind, kind, &p, &v).unwrap();
            worst = worst.max(rel(nested, kind.eval(&p, &WeightSplit::half())));
        }
    }
    let gap = nested_l_gap();
    outcome(
        worst < 1e-12 && (gap - 0.0173327).abs() <= 5e-6,
        format!("A∘A, G∘G, H∘H worst rel {worst:.1e} on 1e4 samples; L∘L − L = {gap:.10}"),
    )
}

fn c8_integral_form() -> Outcome {
    let start = Instant::now();
    let rule = QuadratureRule::gauss_legendre(128).unwrap();
    let axis = meanlab::catalog::logspace(1e-3, 1e3, 50);
    let mut worst = 0.0f64;
    for &a in &axis {
        for &b in &axis {
            for k in 0..20 {
                let v = (k as f64 + 0.5) / 20.0;
                let direct = weighted_log_mean(&pair(a, b), &w(v));
                let quad = b * split_integral_log_mean(a / b, v, &rule);
                worst = worst.max(rel(direct, quad));
            }
        }
    }
    let took = start.elapsed();
    outcome(
        worst < 1e-10 && took < Duration::from_secs(20),
        format!("50×50×20 grid, worst rel {worst:.2e}, {took:.1?}"),
    )
}

fn c9_operator_ensemble() -> Outcome {
    let start = Instant::now();
    let rule = QuadratureRule::default();
    let mut jobs: Vec<(OperatorCase, Option<f64>, PairOrder)> = OperatorCase::ALL
        .iter()
        .filter(|c| !c.needs_r())
        .map(|&c| (c, None, PairOrder::Unordered))
        .collect();
    for r in [-1.0, -0.5, 0.5, 1.0] {
        let order = if r > 0.0 { PairOrder::BelowA } else { PairOrder::AboveA };
        jobs.push((OperatorCase::OpZjTsallis, Some(r), order));
    }
    let (mut checked, mut failed, mut worst) = (0u64, 0u64, f64::INFINITY);
    for (case, r, order) in &jobs {
        for dim in [2, 3, 5, 8] {
            let spec = EnsembleSpec { dim, seed: SEED, max_condition: 1e4, order: *order };
            for i in 0..500u64 {
                let (a, b) = ensemble_pair(&spec, i);
                let v = (i as f64 + 0.5) / 500.0;
                let report = check_operator_case(*case, &a, &b, v, *r, &rule, 1e-8).unwrap();
                checked += 1;
                worst = worst.min(report.min_relative_eig());
                if !report.holds() {
                    failed += 1;
                }
            }
        }
    }
    let took = start.elapsed();
    outcome(
        failed == 0 && took < Duration::from_secs(300),
        format!("{checked} pair checks, {failed} failed, min relative eig {worst:.2e}, {took:.1?}"),
    )
}

fn frob_rel(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (x - y).norm() / y.norm()
}

fn c10_commuting_reduction() -> Outcome {
    let rule = QuadratureRule::default();
    let mut worst = 0.0f64;
    for dim in [2, 3, 5, 8] {
        for i in 0..100u64 {
            let q = random_spd(dim, SEED ^ (i << 8) ^ dim as u64, 50.0).eigenvectors().clone();
            let seed = SEED.wrapping_mul(31).wrapping_add(i * 16 + dim as u64);
            let alpha = random_spd(dim, seed, 1e3).eigenvalues().clone();
            let beta = random_spd(dim, seed + 1, 1e3).eigenvalues().map(|x| x * 0.37);
            let from = |d: &DVector<f64>| &q * DMatrix::from_diagonal(d) * q.transpose();
            let a = SpdMatrix::new(from(&alpha)).unwrap();
            let b = SpdMatrix::new(from(&beta)).unwrap();
            let op = OperatorPair::new(&a, &b).unwrap();
            let v = (i as f64 + 0.5) / 100.0;
            let eigenwise = |f: &dyn Fn(f64, f64) -> f64| {
                from(&DVector::from_iterator(dim, alpha.iter().zip(beta.iter()).map(|(&x, &y)| f(x, y))))
            };
            let ln_r = |x: f64, r: f64| (r * x.ln()).exp_m1() / r;
            let checks = [
                (op.geometric(v), eigenwise(&|x, y| weighted_geometric(&pair(x, y), &w(v)))),
                (op.arithmetic(v), eigenwise(&|x, y| weighted_arithmetic(&pair(x, y), &w(v)))),
                // A♯ₓB reduces to a^{1−x}b^x, so Aℓ_vB reduces to L_{1−v}
                (op.log_mean_w(v, &rule), eigenwise(&|x, y| weighted_log_mean(&pair(x, y), &w(1.0 - v)))),
                (op.log_mean(&rule), eigenwise(&|x, y| log_mean(&pair(x, y)))),
                (op.relative_entropy(), eigenwise(&|x, y| x * (y / x).ln())),
                (op.tsallis_relative_entropy(0.5), eigenwise(&|x, y| x * ln_r(y / x, 0.5))),
                (op.tsallis_relative_entropy(-1.0), eigenwise(&|x, y| x * ln_r(y / x, -1.0))),
            ];
            for (got, want) in &checks {
                worst = worst.max(frob_rel(got, want));
            }
        }
    }
    outcome(worst < 1e-10, format!("100 commuting pairs per dim, worst Frobenius rel {worst:.2e}"))
}

fn c11_optimal_p() -> Outcome {
    let result = find_optimal_p(&SearchConfig::default(), 1e-4).unwrap();
    let width = result.bracket.1 - result.bracket.0;
    let w = &result.paper_witness;
    let lower_ok = result.lower.status == WitnessStatus::NoViolationFound && result.lower.report.gap >= 0.0;
    let upper_ok = result.upper.status == WitnessStatus::Violated && result.upper.report.gap < 0.0;
    let adjudicated = matches!(w.adjudicated.precision, Precision::BigFloat { digits } if digits >= 50);
    let disagree = w.naive_double.signum() != w.adjudicated.gap.signum()
        || rel(w.naive_double, w.adjudicated.gap) > 1e-3;
    let pass = lower_ok && upper_ok && width <= 1e-4 && adjudicated && w.disagreement == disagree;
    outcome(
        pass,
        format!(
            "bracket [{:.6}, {:.6}] width {width:.2e}; p=2/3 gap {:.3e}; witness naive {:.5e} vs 50-digit {:.5e} (printed {}), disagreement {}",
            result.bracket.0, result.bracket.1, result.upper.report.gap, w.naive_double, w.adjudicated.gap, w.printed, w.disagreement
        ),
    )
}

fn c12_conjecture() -> Outcome {
    let start = Instant::now();
    let config = SearchConfig { seed: SEED, ..SearchConfig::default() };
    let evidence = probe_conjecture(1_000_000, &config).unwrap();
    let took = start.elapsed();
    outcome(
        evidence.result.status != WitnessStatus::Violated && took < Duration::from_secs(120),
        format!(
            "1e6 samples, status {}, min sampled relative gap {:.3e}, refined gap {}, {took:.1?}",
            evidence.result.status.as_str(),
            evidence.min_sampled_gap,
            evidence.result.report.gap_text
        ),
    )
}

fn suite_reports() -> Vec<String> {
    let config = RunConfig { seed: SEED, ..RunConfig::default() };
    let mut out = Vec::new();
    for case in list_cases() {
        let records = random_points(case, 200, config.seed, None)
            .into_iter()
            .flatten()
            .map(|pt| CaseRecord::from_gap(&case.report(&pt.to_decimal(), Precision::Double, config.tol).unwrap()))
            .collect();
        out.push(ReportEnvelope::new("ineq check", &config, records, 0).to_json());
    }
    let rule = QuadratureRule::default();
    let spec = EnsembleSpec { dim: 3, seed: SEED, max_condition: 1e4, order: PairOrder::Unordered };
    let records = (0..20u64)
        .flat_map(|i| {
            let (a, b) = ensemble_pair(&spec, i);
            let report = check_operator_case(OperatorCase::OpZj, &a, &b, 0.3, None, &rule, 1e-8).unwrap();
            CaseRecord::from_operator(&report, i)
        })
        .collect();
    out.push(ReportEnvelope::new("operator verify", &config, records, 0).to_json());
    let sc = SearchConfig { seed: SEED, ..config.search_config() };
    let found = search("wlog_two_thirds", &sc).unwrap();
    let mut env = ReportEnvelope::new("search counterexample", &config, vec![CaseRecord::from_gap(&found.report)], 0);
    env.findings = search_findings(&found);
    out.push(env.to_json());
    let p = find_optimal_p(&sc, 1e-3).unwrap();
    let mut env = ReportEnvelope::new("search optimal-p", &config, vec![CaseRecord::from_gap(&p.upper.report)], 0);
    env.findings = optimal_p_findings(&p);
    out.push(env.to_json());
    let probe = probe_conjecture(20_000, &sc).unwrap();
    let mut env = ReportEnvelope::new("conjecture probe", &config, vec![CaseRecord::from_gap(&probe.result.report)], 0);
    env.findings = conjecture_findings(&probe);
    out.push(env.to_json());
    out
}

fn c13_determinism() -> Outcome {
    let first = single_threaded(suite_reports);
    let second = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .expect("thread pool")
        .install(suite_reports);
    let bytes: usize = first.iter().map(String::len).sum();
    outcome(
        first == second,
        format!("{} reports, {bytes} bytes, identical across 1-thread and 4-thread runs", first.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("nested logarithmic mean value", c1_nested_value),
        ("half-mix counterexamples", c2_half_mix_witnesses),
        ("refined Young coefficient at v = 1/2", c3_young_half),
        ("property suite, expected-holds cases", c4_property_suite),
        ("property suite, expected-fails cases", c5_expected_fails),
        ("monotonicity of the representing function", c6_monotonicity),
        ("nested identities", c7_nested_identities),
        ("integral-form equivalence", c8_integral_form),
        ("operator ensemble", c9_operator_ensemble),
        ("commuting reduction", c10_commuting_reduction),
        ("optimal-p probe", c11_optimal_p),
        ("conjecture probe", c12_conjecture),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!("[{tag}] {:>2}. {name}: {}", i + 1, result.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
