use std::io::Write;

use anyhow::{bail, Context, Result};
use meanlab::catalog::{list_cases, lookup, random_points, DecimalPoint, InequalityCase, Point, Precision, Verdict};
use meanlab::explorer::{adjudicate, find_optimal_p, probe_conjecture, search, PrecisionPolicy, SearchResult, WitnessStatus};
use meanlab::means::{refined_young_factor, Deformation, MeanKind, ScalarPair, WeightSplit};
use meanlab::operator::{
    check_operator_case, ensemble_pair, EnsembleSpec, MatrixJson, OperatorCase, PairOrder, SpdMatrix,
};
use meanlab::quadrature::QuadratureRule;
use meanlab::report::{
    append_witness, conjecture_findings, optimal_p_findings, parse_count, search_findings, CaseRecord,
    ExitStatus, ReportEnvelope, RunConfig,
};
use meanlab::scalar::fmt17;
use meanlab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Cli, Command, ConjectureCmd, GlobalOpts, IneqCmd, MeansCmd, OperatorCmd, SearchBox, SearchCmd};

const TSALLIS_R: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

pub fn run(cli: Cli) -> Result<i32> {
    let mut config = base_config(&cli.global)?;
    match cli.command {
        Command::Means(MeansCmd::Eval(m)) => {
            install_threads(&config)?;
            let value = eval_mean(&m.kind, &m.a, &m.b, &m.v, m.r.as_deref())?;
            println!("{}", fmt17(value));
            Ok(0)
        }
        Command::Ineq(IneqCmd::List) => {
            for case in list_cases() {
                println!("{:<28} {:<18} {}", case.key, case.expected.as_str(), case.description);
            }
            Ok(0)
        }
        Command::Ineq(IneqCmd::Check(c)) => {
            install_threads(&config)?;
            let case = lookup(&c.case)?;
            let (points, skipped) = if c.a.is_some() || c.b.is_some() {
                let (Some(a), Some(b)) = (c.a, c.b) else {
                    bail!("--a and --b must be given together");
                };
                let pt = Point { a, b, v: c.v, r: c.r, p: c.p };
                pt.parse::<f64>()?;
                (vec![pt], 0)
            } else if let Some(n) = c.random {
                let n = parse_count(&n)?;
                config.samples = n;
                let p = c.p.as_deref().map(str::parse::<f64>).transpose().context("--p")?;
                let sampled = random_points(case, n, config.seed, p);
                let skipped = sampled.iter().filter(|x| x.is_none()).count() as u64;
                (sampled.into_iter().flatten().map(|x| x.to_decimal()).collect(), skipped)
            } else if !case.witnesses.is_empty() {
                (case.witnesses.iter().map(|w| w.point()).collect(), 0)
            } else {
                bail!("case `{}` stores no witnesses; give --a/--b or --random", case.key);
            };
            let records = points
                .par_iter()
                .map(|pt| check_point(case, pt, &config).map(|r| CaseRecord::from_gap(&r)))
                .collect::<meanlab::Result<Vec<_>>>()?;
            let mut env = ReportEnvelope::new("ineq check", &config, records, skipped);
            env.exit = ExitStatus::for_check(&env.summary, config.strict).code();
            emit(&env, &config)
        }
        Command::Operator(OperatorCmd::Verify(o)) => {
            for (key, value) in [
                ("dims", &o.dims),
                ("pairs", &o.pairs),
                ("nodes", &o.nodes),
                ("loewner_tol", &o.loewner_tol),
                ("max_condition", &o.max_condition),
            ] {
                if let Some(value) = value {
                    config.set(key, value)?;
                }
            }
            install_threads(&config)?;
            let env = operator_verify(&o, &config)?;
            emit(&env, &config)
        }
        Command::Search(SearchCmd::Counterexample(s)) => {
            apply_box(&mut config, &s.search)?;
            install_threads(&config)?;
            let case = lookup(&s.case)?;
            let mut sc = config.search_config();
            sc.p = s.p;
            let result = search(case.key, &sc)?;
            record_witness(&cli.global, &result)?;
            let mut env = ReportEnvelope::new(
                "search counterexample",
                &config,
                vec![CaseRecord::from_gap(&result.report)],
                0,
            );
            env.findings = search_findings(&result);
            emit(&env, &config)
        }
        Command::Search(SearchCmd::OptimalP(s)) => {
            apply_box(&mut config, &s.search)?;
            install_threads(&config)?;
            let result = find_optimal_p(&config.search_config(), s.width)?;
            record_witness(&cli.global, &result.upper)?;
            let records = [&result.lower.report, &result.upper.report, &result.paper_witness.adjudicated]
                .into_iter()
                .map(CaseRecord::from_gap)
                .collect();
            let mut env = ReportEnvelope::new("search optimal-p", &config, records, 0);
            env.findings = optimal_p_findings(&result);
            emit(&env, &config)
        }
        Command::Conjecture(ConjectureCmd::Probe(p)) => {
            if let Some(samples) = &p.samples {
                config.set("samples", samples)?;
            }
            apply_box(&mut config, &p.search)?;
            install_threads(&config)?;
            let evidence = probe_conjecture(config.samples, &config.search_config())?;
            record_witness(&cli.global, &evidence.result)?;
            let mut env = ReportEnvelope::new(
                "conjecture probe",
                &config,
                vec![CaseRecord::from_gap(&evidence.result.report)],
                0,
            );
            env.findings = conjecture_findings(&evidence);
            if evidence.result.status == WitnessStatus::Violated {
                env.exit = ExitStatus::ConjectureViolation.code();
            }
            emit(&env, &config)
        }
    }
}

fn base_config(g: &GlobalOpts) -> Result<RunConfig> {
    let mut config = match &g.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if config.threads.is_none() {
        if let Ok(t) = std::env::var("MEANLAB_THREADS") {
            config.set("threads", &t).context("MEANLAB_THREADS")?;
        }
    }
    for (key, value) in [
        ("seed", &g.seed),
        ("precision", &g.precision),
        ("digits", &g.digits),
        ("tol", &g.tol),
        ("format", &g.format),
    ] {
        if let Some(value) = value {
            config.set(key, value)?;
        }
    }
    if let Some(out) = &g.out {
        config.out = Some(out.clone());
    }
    if let Some(t) = g.threads {
        config.threads = Some(t);
    }
    if g.strict {
        config.strict = true;
    }
    Ok(config)
}

fn apply_box(config: &mut RunConfig, b: &SearchBox) -> Result<()> {
    for (key, value) in [
        ("grid", &b.grid),
        ("budget", &b.budget),
        ("starts", &b.starts),
        ("ln_range", &b.ln_range),
        ("delta", &b.delta),
    ] {
        if let Some(value) = value {
            config.set(key, value)?;
        }
    }
    Ok(())
}

fn install_threads(config: &RunConfig) -> Result<()> {
    if let Some(n) = config.threads {
        if n == 0 {
            bail!("threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool")?;
    }
    Ok(())
}

fn emit(env: &ReportEnvelope, config: &RunConfig) -> Result<i32> {
    let text = env.render(config.format);
    match &config.out {
        Some(path) => std::fs::write(path, text).with_context(|| path.display().to_string())?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(env.exit)
}

fn record_witness(g: &GlobalOpts, result: &SearchResult) -> Result<()> {
    if let (Some(path), WitnessStatus::Violated) = (&g.witness_file, result.status) {
        append_witness(path, result)?;
    }
    Ok(())
}

fn eval_mean(kind: &str, a: &str, b: &str, v: &str, r: Option<&str>) -> Result<f64> {
    let num = |name: &str, s: &str| s.parse::<f64>().with_context(|| format!("--{name}: `{s}`"));
    let pair = ScalarPair::new(num("a", a)?, num("b", b)?)?;
    let w = WeightSplit::new(num("v", v)?)?;
    if kind.eq_ignore_ascii_case("young") {
        let d = r.map(|r| num("r", r).and_then(|r| Ok(Deformation::new(r)?))).transpose()?;
        return Ok(refined_young_factor(&pair, &w, d.as_ref()));
    }
    if r.is_some() {
        bail!("--r only applies to --kind young");
    }
    Ok(kind.parse::<MeanKind>()?.eval(&pair, &w))
}

/// Double-precision verdict, adjudicated when escalation is on and the verdict is not `holds`.
fn check_point(case: &InequalityCase, pt: &DecimalPoint, config: &RunConfig) -> meanlab::Result<meanlab::catalog::GapReport> {
    let double = case.report(pt, Precision::Double, config.tol)?;
    match config.policy {
        Some(PrecisionPolicy::Escalate { digits }) if double.verdict != Verdict::Holds => {
            adjudicate(case.key, pt, digits)
        }
        _ => Ok(double),
    }
}

struct Job {
    case: OperatorCase,
    r: Option<f64>,
    order: PairOrder,
}

fn operator_jobs(o: &crate::OperatorVerify) -> Result<Vec<Job>> {
    let cases: Vec<OperatorCase> = if o.case == "all" {
        OperatorCase::ALL.to_vec()
    } else {
        vec![o.case.parse()?]
    };
    let matched = match o.order.as_str() {
        "unordered" => false,
        "matched" => true,
        other => bail!("--order: `{other}` (unordered or matched)"),
    };
    let mut jobs = Vec::new();
    for case in cases {
        if case.needs_r() {
            let rs = o.r.map_or(TSALLIS_R.to_vec(), |r| vec![r]);
            for r in rs {
                let order = match (matched, r > 0.0) {
                    (false, _) => PairOrder::Unordered,
                    (true, true) => PairOrder::BelowA,
                    (true, false) => PairOrder::AboveA,
                };
                jobs.push(Job { case, r: Some(r), order });
            }
        } else {
            jobs.push(Job { case, r: None, order: PairOrder::Unordered });
        }
    }
    Ok(jobs)
}

/// Per-pair weight on its own stream, shared by every case.
fn pair_weight(seed: u64, dim: usize, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_F42D_4C95_7F2D ^ dim as u64);
    rng.set_stream(index);
    rng.gen_range(0.0..1.0)
}

type Outcome = meanlab::Result<Option<Vec<CaseRecord>>>;

fn run_check(job: &Job, a: &SpdMatrix<f64>, b: &SpdMatrix<f64>, v: f64, rule: &QuadratureRule, tol: f64, index: u64) -> Outcome {
    match check_operator_case(job.case, a, b, v, job.r, rule, tol) {
        Ok(report) => Ok(Some(CaseRecord::from_operator(&report, index))),
        Err(Error::PreconditionViolated { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn operator_verify(o: &crate::OperatorVerify, config: &RunConfig) -> Result<ReportEnvelope> {
    if let Some(v) = o.v {
        if !(0.0..=1.0).contains(&v) {
            bail!("--v must lie in [0, 1]");
        }
    }
    let jobs = operator_jobs(o)?;
    let rule = QuadratureRule::gauss_legendre(config.nodes)?;
    let mut outcomes: Vec<Option<Vec<CaseRecord>>> = Vec::new();
    if let Some(path) = &o.manifest {
        let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let entry: serde_json::Value =
                serde_json::from_str(line).with_context(|| format!("manifest line {}", n + 1))?;
            let matrix = |k: &str| -> Result<SpdMatrix<f64>> {
                let m: MatrixJson = serde_json::from_value(entry[k].clone())
                    .with_context(|| format!("manifest line {}: `{k}`", n + 1))?;
                Ok(m.to_spd()?)
            };
            let (a, b) = (matrix("a")?, matrix("b")?);
            let v = entry["v"].as_f64().or(o.v).unwrap_or(0.5);
            for job in &jobs {
                outcomes.push(run_check(job, &a, &b, v, &rule, config.loewner_tol, n as u64)?);
            }
        }
    } else {
        if config.pairs == 0 {
            bail!("--pairs must be positive");
        }
        for job in &jobs {
            for &dim in &config.dims {
                let spec = EnsembleSpec {
                    dim,
                    seed: config.seed,
                    max_condition: config.max_condition,
                    order: job.order,
                };
                let batch = (0..config.pairs as u64)
                    .into_par_iter()
                    .map(|i| {
                        let (a, b) = ensemble_pair(&spec, i);
                        let v = o.v.unwrap_or_else(|| pair_weight(config.seed, dim, i));
                        run_check(job, &a, &b, v, &rule, config.loewner_tol, i)
                    })
                    .collect::<meanlab::Result<Vec<_>>>()?;
                outcomes.extend(batch);
            }
        }
    }
    let skipped = outcomes.iter().filter(|x| x.is_none()).count() as u64;
    let records = outcomes.into_iter().flatten().flatten().collect();
    let mut env = ReportEnvelope::new("operator verify", config, records, skipped);
    env.exit = ExitStatus::for_check(&env.summary, config.strict).code();
    Ok(env)
}
