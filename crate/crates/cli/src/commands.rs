use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use rotcov::certify::{certify, CertificationStatus, ConfidenceMode, ConfidenceSettings, Statistics};
use rotcov::compton::{
    contrast_from_kn, perpendicular_parallel_ratio, write_coincidence_curve, write_kn_curve, ComptonKinematics,
};
use rotcov::fit::{fit_contrast, synthetic_series, AngularPowerSeries};
use rotcov::format::to_json_string;
use rotcov::povm::{build_binned_povm, AnglePartition, RoCDevice};
use rotcov::qubit::{eigenvalues_hermitian, ComplexMatrix};
use rotcov::record::{MeasurementRecord, RecordMetadata};
use rotcov::sdp::{positive_part_trace, solve, DMatrix, SdpProblem, SdpSettings, SdpStatus};
use rotcov::semidi::{
    curve_crossing, exact_statistics, refine_threshold, scan, symmetric_samples, threshold_curve, write_curve_csv,
    HypothesisGrid, DEFAULT_GRID_STEP,
};
use rotcov::states::{make_state, sample_record, NamedState};
use rotcov::steering::{chsh_random_search, correlation_table, SteeringReport};

use crate::args::{
    BinsSpec, CertifyArgs, ComptonArgs, FitArgs, GlobalArgs, SelftestArgs, SemidiArgs, SimulateArgs, SteeringArgs,
};
use crate::error::{usage, CliError, CliResult, EXIT_INFEASIBLE, EXIT_OK, EXIT_SOLVER};

const DEFAULT_BINS: usize = 8;
const DEFAULT_SHOTS: u64 = 1_000_000;
const DEFAULT_CONFIDENCE: f64 = 0.99;
const SELFTEST_TOL: f64 = 1e-6;

/// Output directory and solver settings shared by every command.
pub struct Context {
    out_dir: PathBuf,
    sdp: SdpSettings,
}

impl Context {
    pub fn new(global: &GlobalArgs) -> CliResult<Self> {
        let mut sdp = SdpSettings::default();
        if let Some(t) = global.tol_feas {
            sdp.tol_feas = positive("tol-feas", t)?;
        }
        if let Some(t) = global.tol_gap {
            sdp.tol_gap = positive("tol-gap", t)?;
        }
        if let Some(m) = global.max_iter {
            if m == 0 {
                return Err(usage("--max-iter must be positive"));
            }
            sdp.max_iter = m;
        }
        Ok(Self {
            out_dir: global.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
            sdp,
        })
    }

    fn prepare_dir(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|source| CliError::Output {
            path: self.out_dir.display().to_string(),
            source,
        })
    }

    /// Writes `bytes` to `name` inside the output directory, refusing to
    /// overwrite any of `inputs`.
    fn write(&self, name: &str, bytes: &[u8], inputs: &[&Path]) -> CliResult<PathBuf> {
        let path = self.out_dir.join(name);
        for input in inputs {
            if same_file(&path, input) {
                return Err(usage(format!(
                    "output {} would overwrite input {}",
                    path.display(),
                    input.display()
                )));
            }
        }
        std::fs::write(&path, bytes).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    fn write_json(&self, name: &str, json: &str, inputs: &[&Path]) -> CliResult<PathBuf> {
        self.write(name, format!("{json}\n").as_bytes(), inputs)
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn device(name: &str, r: f64) -> CliResult<RoCDevice> {
    RoCDevice::new(r).map_err(|_| usage(format!("--{name} must lie in [0, 1], got {r}")))
}

fn state(spec: Option<&str>) -> CliResult<NamedState> {
    spec.unwrap_or("singlet")
        .parse()
        .map_err(|e: rotcov::Error| usage(e.to_string()))
}

fn partition(name: &str, spec: Option<&BinsSpec>) -> CliResult<AnglePartition> {
    let result = match spec {
        None => AnglePartition::uniform(DEFAULT_BINS),
        Some(BinsSpec::Count(n)) => AnglePartition::uniform(*n),
        Some(BinsSpec::EdgesDeg(e)) => {
            AnglePartition::from_edges(&e.iter().map(|d| d.to_radians()).collect::<Vec<_>>())
        }
    };
    result.map_err(|e| usage(format!("--{name}: {e}")))
}

fn confidence(
    mode: Option<&str>,
    default: ConfidenceMode,
    c: Option<f64>,
    bonferroni: bool,
) -> CliResult<ConfidenceSettings> {
    let mode = match mode {
        Some(m) => m.parse().map_err(|e: rotcov::Error| usage(e.to_string()))?,
        None => default,
    };
    let mut settings = match mode {
        ConfidenceMode::Exact => ConfidenceSettings::exact(),
        ConfidenceMode::Hoeffding => ConfidenceSettings::hoeffding(c.unwrap_or(DEFAULT_CONFIDENCE))
            .map_err(|e| usage(format!("--confidence: {e}")))?,
    };
    settings.bonferroni = bonferroni;
    Ok(settings)
}

fn load_record(path: &Path) -> CliResult<MeasurementRecord> {
    MeasurementRecord::load_csv(path).map_err(|source| CliError::Input {
        path: path.display().to_string(),
        source,
    })
}

fn sidecar(record: &Path) -> Option<RecordMetadata> {
    let path = record.with_extension("json");
    if !path.exists() {
        return None;
    }
    match RecordMetadata::load(&path) {
        Ok(meta) => Some(meta),
        Err(e) => {
            log::warn!("ignoring unreadable sidecar {}: {e}", path.display());
            None
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    to_json_string(value).map_err(|e| CliError::Library(e.into()))
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> CliResult<i32> {
    let named = state(args.state.as_deref())?;
    let ra = args.ra.unwrap_or(1.0);
    let rb = args.rb.unwrap_or(1.0);
    let (da, db) = (device("ra", ra)?, device("rb", rb)?);
    let pa = partition("bins-a", args.bins_a.as_ref())?;
    let pb = partition("bins-b", args.bins_b.as_ref())?;
    let n = args.shots.unwrap_or(DEFAULT_SHOTS);
    if n == 0 {
        return Err(usage("--shots must be positive"));
    }
    let seed = args.seed.unwrap_or(0);
    let name = args.name.as_deref().unwrap_or("record");
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(usage(format!("--name `{name}` must be a plain file name")));
    }
    ctx.prepare_dir()?;

    let rho = make_state(&named)?;
    let record = sample_record(
        &rho,
        &build_binned_povm(da, &pa)?,
        &build_binned_povm(db, &pb)?,
        n,
        seed,
    )?;
    let mut csv = Vec::new();
    record.write_csv(&mut csv)?;
    let meta = RecordMetadata {
        n,
        seed: Some(seed),
        r_a: ra,
        r_b: rb,
        state: named.description(),
    };
    let json = to_json(&meta)?;
    ctx.write(&format!("{name}.csv"), &csv, &[])?;
    ctx.write_json(&format!("{name}.json"), &json, &[])?;
    println!("{json}");
    Ok(EXIT_OK)
}

pub fn certify_cmd(ctx: &Context, args: &CertifyArgs) -> CliResult<i32> {
    let path = args.record.as_deref().ok_or_else(|| usage("certify needs --record"))?;
    let record = load_record(path)?;
    let meta = sidecar(path);
    let ra = args
        .ra
        .or(meta.as_ref().map(|m| m.r_a))
        .ok_or_else(|| usage("--ra not given and no sidecar"))?;
    let rb = args
        .rb
        .or(meta.as_ref().map(|m| m.r_b))
        .ok_or_else(|| usage("--rb not given and no sidecar"))?;
    let (da, db) = (device("ra", ra)?, device("rb", rb)?);
    let settings = confidence(
        args.mode.as_deref(),
        ConfidenceMode::Hoeffding,
        args.confidence,
        args.bonferroni.unwrap_or(false),
    )?;
    ctx.prepare_dir()?;

    let result = certify(&record, da, db, &settings, &ctx.sdp)?;
    let json = result.to_json()?;
    ctx.write_json("certification.json", &json, &[path])?;
    println!("{json}");
    Ok(match result.status {
        CertificationStatus::Entangled | CertificationStatus::Inconclusive => EXIT_OK,
        CertificationStatus::InfeasibleData => EXIT_INFEASIBLE,
        CertificationStatus::SolverFailure => EXIT_SOLVER,
    })
}

pub fn semidi(ctx: &Context, args: &SemidiArgs) -> CliResult<i32> {
    let named = state(args.state.as_deref())?;
    let pa = partition("bins-a", args.bins_a.as_ref())?;
    let pb = partition("bins-b", args.bins_b.as_ref())?;
    let grid = HypothesisGrid::with_step(args.grid_step.unwrap_or(DEFAULT_GRID_STEP))
        .map_err(|e| usage(format!("--grid-step: {e}")))?;
    let curve_points = args.curve_points.unwrap_or(20);
    if args.curve == Some(true) && curve_points < 2 {
        return Err(usage("--curve-points must be at least 2"));
    }
    let (stats, default_mode) = match &args.record {
        Some(path) => {
            let record = load_record(path)?;
            (Statistics::from_record(&record)?, ConfidenceMode::Hoeffding)
        }
        None => {
            let ra = args.ra.unwrap_or(1.0);
            let rb = args.rb.unwrap_or(1.0);
            device("ra", ra)?;
            device("rb", rb)?;
            (exact_statistics(&named, ra, rb, &pa, &pb)?, ConfidenceMode::Exact)
        }
    };
    let settings = confidence(args.mode.as_deref(), default_mode, args.confidence, false)?;
    if settings.mode == ConfidenceMode::Hoeffding && stats.shots().is_none() {
        return Err(usage("hoeffding mode needs a record with a shot count"));
    }
    ctx.prepare_dir()?;
    let inputs: Vec<&Path> = args.record.as_deref().into_iter().collect();

    let verdict = scan(&stats, &grid, &settings, &ctx.sdp)?;
    let json = verdict.to_json()?;
    ctx.write_json("semidi.json", &json, &inputs)?;
    println!("{json}");

    if args.curve == Some(true) {
        let products: Vec<f64> = (1..=curve_points).map(|k| k as f64 / curve_points as f64).collect();
        let curve = threshold_curve(&symmetric_samples(&products), &named, &pa, &pb, &ctx.sdp)?;
        let mut csv = Vec::new();
        write_curve_csv(&curve, &mut csv)?;
        ctx.write("semidi_curve.csv", &csv, &inputs)?;
        let threshold = match curve_crossing(&curve) {
            Some(c) => Some(refine_threshold(&named, &pa, &pb, c.below, c.above, 1e-4, &ctx.sdp)?),
            None => None,
        };
        let json = to_json(&json!({ "state": named.description(), "threshold": threshold }))?;
        ctx.write_json("semidi_threshold.json", &json, &inputs)?;
        println!("{json}");
    }
    Ok(if verdict.complete { EXIT_OK } else { EXIT_SOLVER })
}

pub fn steering(ctx: &Context, args: &SteeringArgs) -> CliResult<i32> {
    let named = state(args.state.as_deref())?;
    let rb = args.rb.unwrap_or(1.0);
    device("rb", rb)?;
    if rb == 0.0 {
        return Err(usage("--rb must be positive to reconstruct Bob's Paulis"));
    }
    let r_known = args.r_known.unwrap_or(true);
    let configs = args.chsh_configs.unwrap_or(0);
    let states = args.chsh_states.unwrap_or(50);
    ctx.prepare_dir()?;

    let rho = make_state(&named)?;
    let report = SteeringReport::new(correlation_table(&rho, rb, r_known)?, r_known);
    let json = report.to_json()?;
    ctx.write_json("steering.json", &json, &[])?;
    println!("{json}");
    if configs > 0 {
        let search = chsh_random_search(configs, states, args.seed.unwrap_or(0))?;
        let json = to_json(&search)?;
        ctx.write_json("chsh_search.json", &json, &[])?;
        println!("{json}");
    }
    Ok(EXIT_OK)
}

pub fn compton(ctx: &Context, args: &ComptonArgs) -> CliResult<i32> {
    let beta = args.beta.ok_or_else(|| usage("compton needs --beta"))?;
    let theta = args.theta.ok_or_else(|| usage("compton needs --theta"))?;
    let kin = ComptonKinematics::new(beta, theta).map_err(|e| usage(e.to_string()))?;
    let points = args.points.unwrap_or(180);
    if points == 0 {
        return Err(usage("--points must be positive"));
    }
    let pair = match (args.ra, args.rb) {
        (Some(a), Some(b)) => {
            device("ra", a)?;
            device("rb", b)?;
            Some((a, b))
        }
        (None, None) => None,
        _ => return Err(usage("give both --ra and --rb or neither")),
    };
    let ratio = match pair {
        Some((a, b)) => Some(perpendicular_parallel_ratio(a, b).map_err(|e| usage(e.to_string()))?),
        None => None,
    };
    ctx.prepare_dir()?;

    let r = contrast_from_kn(&kin);
    let mut csv = Vec::new();
    write_kn_curve(&kin, points, 1.0, &mut csv)?;
    ctx.write("kn_curve.csv", &csv, &[])?;
    if let Some((a, b)) = pair {
        let mut csv = Vec::new();
        write_coincidence_curve(a, b, points, 1.0, &mut csv)?;
        ctx.write("coincidence_curve.csv", &csv, &[])?;
    }
    let json = to_json(&json!({
        "beta": beta,
        "theta": theta,
        "x": kin.x(),
        "r": r,
        "r_A": pair.map(|p| p.0),
        "r_B": pair.map(|p| p.1),
        "perpendicular_parallel_ratio": ratio,
    }))?;
    ctx.write_json("compton.json", &json, &[])?;
    println!("{json}");
    Ok(EXIT_OK)
}

pub fn fit(ctx: &Context, args: &FitArgs) -> CliResult<i32> {
    let points = args.points.unwrap_or(360);
    let (series, input) = match (&args.input, args.synthetic) {
        (Some(path), None) => {
            let series = AngularPowerSeries::load(path).map_err(|source| CliError::Input {
                path: path.display().to_string(),
                source,
            })?;
            (series, Some(path.as_path()))
        }
        (None, Some(r)) => {
            let series = synthetic_series(
                args.baseline.unwrap_or(1.0),
                r,
                args.phase.unwrap_or(0.0).to_radians(),
                args.samples.unwrap_or(36),
                args.noise.unwrap_or(0.0),
                args.seed.unwrap_or(0),
            )
            .map_err(|e| usage(e.to_string()))?;
            (series, None)
        }
        _ => return Err(usage("fit needs exactly one of --input or --synthetic")),
    };
    ctx.prepare_dir()?;
    let inputs: Vec<&Path> = input.into_iter().collect();
    if input.is_none() {
        let mut csv = Vec::new();
        series.write_csv(&mut csv)?;
        ctx.write("fit_input.csv", &csv, &inputs)?;
    }

    let result = fit_contrast(&series)?;
    let mut csv = Vec::new();
    result.write_curve(points, &mut csv)?;
    ctx.write("fit_curve.csv", &csv, &inputs)?;
    let json = result.to_json()?;
    ctx.write_json("fit.json", &json, &inputs)?;
    println!("{json}");
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StatusCheck {
    name: &'static str,
    expected: SdpStatus,
    status: SdpStatus,
    passed: bool,
}

fn random_hermitian(rng: &mut ChaCha8Rng) -> CliResult<ComplexMatrix> {
    let mut raw = Vec::with_capacity(16);
    for _ in 0..16 {
        raw.push(rotcov::qubit::C64::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ));
    }
    Ok(ComplexMatrix::from_rows(4, raw)?.hermitian_part())
}

fn status_checks(sdp: &SdpSettings) -> CliResult<Vec<StatusCheck>> {
    let eye = DMatrix::<f64>::identity(2, 2);
    let mut checks = Vec::new();
    let mut run = |name, expected, problem: SdpProblem| {
        let status = solve(&problem, sdp).status;
        checks.push(StatusCheck {
            name,
            expected,
            status,
            passed: status == expected,
        });
    };
    let mut p = SdpProblem::new(&[2])?;
    p.set_objective(0, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]))?;
    p.add_equality(vec![(0, eye.clone())], 1.0)?;
    run("unit trace", SdpStatus::Optimal, p);

    let mut p = SdpProblem::new(&[2])?;
    p.add_equality(vec![(0, eye.clone())], -1.0)?;
    run("negative trace", SdpStatus::PrimalInfeasible, p);

    let mut p = SdpProblem::new(&[2])?;
    p.set_objective(0, -eye)?;
    p.add_equality(vec![(0, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))], 0.0)?;
    run("unbounded trace", SdpStatus::Unbounded, p);
    Ok(checks)
}

pub fn sdp_selftest(ctx: &Context, args: &SelftestArgs) -> CliResult<i32> {
    let cases = args.cases.unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(0));
    let mut max_error: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..cases {
        let x = random_hermitian(&mut rng)?;
        let expected: f64 = eigenvalues_hermitian(&x)?.into_iter().filter(|&l| l > 0.0).sum();
        match positive_part_trace(&x, &ctx.sdp) {
            Ok(v) => {
                let err = (v - expected).abs();
                max_error = max_error.max(err);
                if err > SELFTEST_TOL {
                    failures += 1;
                }
            }
            Err(e) => {
                log::warn!("positive part failed: {e}");
                failures += 1;
            }
        }
    }
    let checks = status_checks(&ctx.sdp)?;
    let passed = failures == 0 && checks.iter().all(|c| c.passed);
    let json = to_json(&json!({
        "cases": cases,
        "failures": failures,
        "max_error": max_error,
        "tolerance": SELFTEST_TOL,
        "status_checks": checks,
        "passed": passed,
    }))?;
    println!("{json}");
    Ok(if passed { EXIT_OK } else { EXIT_SOLVER })
}
