use serde::Serialize;

use crate::basis::{GreenBasis, ZETA_MIN_RADIUS};
use crate::finite_p::{solve_1layer, solve_klayer, KLayerSolution, MonotoneSolution};
use crate::lab::{self, ValidationOptions};
use crate::limit::{self, LimitOptions};
use crate::ode::Monotonicity;
use crate::Error;

use super::config::{resolve, Purpose, RunConfig};
use super::output::{csv_document, json_document, num, to_json, Meta, OutDir};
use super::{Command, Format, EXIT_INVARIANT, EXIT_OK, EXIT_SOLVER, EXIT_USAGE};

/// Audit tolerance for the Wronskian and boundary normalizations.
const BASIS_TOL: f64 = 1e-9;
/// Junction tolerances for glued solutions.
const JUNCTION_JUMP_TOL: f64 = 1e-7;
const JUNCTION_SLOPE_TOL: f64 = 1e-8;

enum Failure {
    Usage(String),
    Solver(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

pub fn dispatch(cmd: &Command) -> i32 {
    let (name, args, purpose) = match cmd {
        Command::Basis(a) => ("basis", a, Purpose::Basis),
        Command::Limit(a) => ("limit", a, Purpose::Limit),
        Command::Solve(a) => ("solve", a, Purpose::Solve),
        Command::Validate(a) => ("validate", a, Purpose::Validate),
    };
    let cfg = match resolve(args, purpose) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let meta = Meta::new(name, &cfg);
    let stdout = (!args.quiet).then_some(cfg.format);
    let result = OutDir::create(&cfg.output_dir)
        .map_err(Failure::from)
        .and_then(|out| match purpose {
            Purpose::Basis => cmd_basis(&cfg, &meta, &out, stdout),
            Purpose::Limit => cmd_limit(&cfg, &meta, &out, stdout),
            Purpose::Solve => cmd_solve(&cfg, &meta, &out, stdout),
            Purpose::Validate => cmd_validate(&cfg, &meta, &out, stdout),
        });
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: cannot write output: {e}");
            EXIT_SOLVER
        }
        Err(Failure::Solver(e)) => {
            let diag = Diagnostic::from(&e);
            let doc = json_document(&meta, "error", &diag);
            if let Ok(out) = OutDir::create(&cfg.output_dir) {
                let _ = out.write(&format!("{name}_error.json"), &doc);
            }
            eprint!("{doc}");
            EXIT_SOLVER
        }
    }
}

#[derive(Serialize)]
struct Diagnostic {
    kind: String,
    message: String,
    detail: String,
}

impl From<&Error> for Diagnostic {
    fn from(e: &Error) -> Self {
        let detail = format!("{e:?}");
        let kind = detail
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or_default()
            .to_string();
        Self {
            kind,
            message: e.to_string(),
            detail,
        }
    }
}

/// Prints `summary` as JSON or as `key,value` lines (nothing when quiet).
fn print_summary<T: Serialize>(format: Option<Format>, summary: &T) {
    let Some(format) = format else {
        return;
    };
    match format {
        Format::Json => print!("{}", to_json(summary)),
        Format::Csv => {
            let v = serde_json::to_value(summary).expect("summary serializes");
            println!("key,value");
            if let serde_json::Value::Object(map) = v {
                for (k, v) in map {
                    let text = match v {
                        serde_json::Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
                        other => other.to_string().replace(',', ";"),
                    };
                    println!("{k},{text}");
                }
            }
        }
    }
}

fn interval(cfg: &RunConfig) -> (f64, f64) {
    let [a, b] = cfg.interval.unwrap_or([0.0, 1.0]);
    (a, b)
}

#[derive(Serialize)]
struct BasisSummary {
    n: u32,
    representation: &'static str,
    wronskian_max_dev: f64,
    xi_increasing: bool,
    zeta_decreasing: bool,
    xi_origin_dev: f64,
    dzeta_at_one: f64,
    zeta_origin_dev: f64,
    dzeta_origin_dev: f64,
    tolerance: f64,
    passed: bool,
}

fn cmd_basis(cfg: &RunConfig, meta: &Meta<'_>, out: &OutDir, stdout: Option<Format>) -> Result<i32, Failure> {
    let params = cfg.tolerances.params();
    let basis = GreenBasis::build(cfg.n, &params)?;
    let audit = basis.audit(400);
    let rows = basis
        .table(ZETA_MIN_RADIUS, 1001)
        .into_iter()
        .map(|v| vec![num(v.r), num(v.xi), num(v.dxi), num(v.zeta), num(v.dzeta)]);
    out.write(
        "basis_table.csv",
        &csv_document(meta, &["r", "xi", "dxi", "zeta", "dzeta"], rows),
    )?;
    let passed = audit.passes(BASIS_TOL);
    let summary = BasisSummary {
        n: audit.n,
        representation: if basis.is_closed_form() {
            "closed-form"
        } else {
            "tabulated"
        },
        wronskian_max_dev: audit.wronskian_max_dev,
        xi_increasing: audit.xi_increasing,
        zeta_decreasing: audit.zeta_decreasing,
        xi_origin_dev: audit.xi_origin_dev,
        dzeta_at_one: audit.dzeta_at_one,
        zeta_origin_dev: audit.zeta_origin_dev,
        dzeta_origin_dev: audit.dzeta_origin_dev,
        tolerance: BASIS_TOL,
        passed,
    };
    out.write("basis_report.json", &json_document(meta, "report", &summary))?;
    print_summary(stdout, &summary);
    Ok(if passed { EXIT_OK } else { EXIT_INVARIANT })
}

#[derive(Serialize)]
struct LimitSummary {
    n: u32,
    k: usize,
    a: f64,
    b: f64,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    amplitude: Vec<f64>,
    residual_m: f64,
    residual_phi: f64,
    residual_junction: f64,
    residual_amplitude: f64,
    representation_gap: f64,
}

fn cmd_limit(cfg: &RunConfig, meta: &Meta<'_>, out: &OutDir, stdout: Option<Format>) -> Result<i32, Failure> {
    let params = cfg.tolerances.params();
    let basis = GreenBasis::build(cfg.n, &params)?;
    let (a, b) = interval(cfg);
    let (summary, points) = if (a, b) != (0.0, 1.0) {
        let ab = basis.annulus(a, b)?;
        let grid = limit::uniform_grid(a, b, 401);
        let (alpha, points) = limit::limit_1layer(&ab, &grid)?;
        let summary = LimitSummary {
            n: cfg.n,
            k: 1,
            a,
            b,
            beta: vec![a, b],
            alpha: vec![alpha],
            amplitude: Vec::new(),
            residual_m: 0.0,
            residual_phi: ab.phi(alpha)?.1.abs(),
            residual_junction: 0.0,
            residual_amplitude: 0.0,
            representation_gap: 0.0,
        };
        (summary, points)
    } else {
        let config = limit::solve_limit_config(&basis, cfg.k, &LimitOptions::default())?;
        let grid = limit::uniform_grid(0.0, 1.0, 401);
        let profile = limit::assemble_limit_profile(&basis, &config, &grid)?;
        let summary = LimitSummary {
            n: cfg.n,
            k: config.k,
            a,
            b,
            beta: config.beta.clone(),
            alpha: config.alpha.clone(),
            amplitude: config.amplitude.clone(),
            residual_m: config.residual_m,
            residual_phi: config.residual_phi,
            residual_junction: config.residual_junction,
            residual_amplitude: config.residual_amplitude,
            representation_gap: profile.representation_gap,
        };
        (summary, profile.points)
    };
    out.write("limit_config.json", &json_document(meta, "limit", &summary))?;
    let rows = points
        .iter()
        .map(|pt| vec![num(pt.r), num(pt.u), num(pt.du), pt.piece.to_string()]);
    out.write(
        "limit_profile.csv",
        &csv_document(meta, &["r", "u", "du", "piece_index"], rows),
    )?;
    print_summary(stdout, &summary);
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PieceSummary {
    a: f64,
    b: f64,
    direction: &'static str,
    c: f64,
    end_value: f64,
    umax: f64,
    max_abs_slope: f64,
    boundary_residual: f64,
    rayleigh: f64,
    roots_found: usize,
    lambda2: f64,
}

impl From<&MonotoneSolution> for PieceSummary {
    fn from(s: &MonotoneSolution) -> Self {
        Self {
            a: s.a,
            b: s.b,
            direction: match s.direction {
                Monotonicity::Increasing => "increasing",
                Monotonicity::Decreasing => "decreasing",
            },
            c: s.c,
            end_value: s.end_value(),
            umax: s.umax,
            max_abs_slope: s.max_abs_slope(),
            boundary_residual: s.boundary_residual,
            rayleigh: s.rayleigh,
            roots_found: s.roots_found,
            lambda2: s.lambda2,
        }
    }
}

#[derive(Serialize)]
struct SolveSummary {
    n: u32,
    p: f64,
    k: usize,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    interior_maxima: usize,
    umax: f64,
    junction_jump: f64,
    peak_jump: f64,
    junction_slope: f64,
    pohozaev_residual: f64,
    invariants_hold: bool,
    pieces: Vec<PieceSummary>,
}

fn solve_summary(sol: &KLayerSolution) -> SolveSummary {
    let maxima = sol.count_interior_maxima(400);
    let invariants_hold = maxima == sol.k
        && sol.junction_jump < JUNCTION_JUMP_TOL
        && sol.peak_jump < JUNCTION_JUMP_TOL
        && sol.junction_slope < JUNCTION_SLOPE_TOL;
    SolveSummary {
        n: sol.n,
        p: sol.p,
        k: sol.k,
        beta: sol.beta.clone(),
        alpha: sol.alpha.clone(),
        interior_maxima: maxima,
        umax: sol.umax(),
        junction_jump: sol.junction_jump,
        peak_jump: sol.peak_jump,
        junction_slope: sol.junction_slope,
        pohozaev_residual: lab::pohozaev_klayer(sol).residual,
        invariants_hold,
        pieces: sol.pieces.iter().map(PieceSummary::from).collect(),
    }
}

fn cmd_solve(cfg: &RunConfig, meta: &Meta<'_>, out: &OutDir, stdout: Option<Format>) -> Result<i32, Failure> {
    let params = cfg.tolerances.params();
    let p = cfg
        .p
        .as_ref()
        .map(|s| s.values()[0])
        .ok_or_else(|| Failure::Usage("solve needs --p".into()))?;
    let (a, b) = interval(cfg);
    let sol = if cfg.k == 1 {
        solve_1layer(cfg.n, p, a, b, &params)?
    } else {
        solve_klayer(cfg.n, p, cfg.k, &params)?
    };
    let summary = solve_summary(&sol);
    out.write("solution.json", &json_document(meta, "solution", &summary))?;
    let rows = sol
        .profile(201)
        .into_iter()
        .map(|pt| vec![num(pt.r), num(pt.u), num(pt.du), pt.piece.to_string()]);
    out.write(
        "profile.csv",
        &csv_document(meta, &["r", "u", "du", "piece_index"], rows),
    )?;
    print_summary(stdout, &summary);
    Ok(if summary.invariants_hold {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    })
}

fn cmd_validate(cfg: &RunConfig, meta: &Meta<'_>, out: &OutDir, stdout: Option<Format>) -> Result<i32, Failure> {
    let (a, b) = interval(cfg);
    let mut opts = ValidationOptions {
        n: cfg.n,
        a,
        b,
        checks: cfg.check.clone(),
        params: cfg.tolerances.params(),
        ..ValidationOptions::default()
    };
    if let Some(p) = &cfg.p {
        opts.sweep = p.values();
    }
    let report = lab::run_validation(&opts)?;
    out.write("validation_report.json", &json_document(meta, "report", &report))?;
    out.write("validation_report.txt", &report.to_table())?;
    let rows = report.trend.iter().map(|r| {
        vec![
            num(r.p),
            num(r.umax),
            num(r.ratio),
            num(r.energy.c_p),
            num(r.energy.reference),
            r.blowup_sup_error.map_or_else(|| "nan".into(), num),
            num(r.scaling),
            num(r.pohozaev),
            r.spectrum.map_or_else(|| "nan".into(), |s| num(s.1.min_abs_eig)),
        ]
    });
    out.write(
        "validation_trend.csv",
        &csv_document(
            meta,
            &[
                "p",
                "umax",
                "ratio",
                "c_p",
                "c_ref",
                "z_sup_error",
                "scaling",
                "pohozaev",
                "min_abs_eig",
            ],
            rows,
        ),
    )?;
    match stdout {
        Some(Format::Json) => print!("{}", to_json(&report.checks)),
        Some(Format::Csv) => print!("{}", report.to_table()),
        None => {}
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_INVARIANT })
}
