//! Subcommand bodies. Each writes its artifacts into the output directory and
//! returns a one-line summary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use srl_core::barriers::{self, BarrierRecipe, ComparisonReport, Direction, Operator, SignScan};
use srl_core::degenerate_solver::{
    self, BoundaryConditions, Grading, GridSpec, ModelCoefficients, ReflectionGrid, ScalarField2D, SideCondition,
    SolveReport, SolverOptions,
};
use srl_core::diagnostics::{self, JUMP_STATIONS};
use srl_core::euler_states::GasParameters;
use srl_core::rankine_hugoniot::{check_g_unique, BhatReport, ShockBoundaryFns, TraceSample};
use srl_core::reflection_config::{self, ReflectionConfiguration};

use crate::error::{CliError, Result};
use crate::io::{self, FieldLayout};
use crate::run_config::*;

pub const SIDECAR: &str = "psi.json";
pub const GRID_FILE: &str = "psi.srlgrid";
pub const FIELD_CSV: &str = "psi.csv";

fn rad(d: f64) -> f64 {
    d * PI / 180.0
}

fn deg(r: f64) -> f64 {
    r * 180.0 / PI
}

fn gas_of(g: &GasArgs) -> Result<GasParameters> {
    Ok(GasParameters::new(g.gamma, g.rho0, g.rho1)?)
}

fn configuration(g: &GasArgs, w: &WedgeArgs) -> Result<ReflectionConfiguration> {
    Ok(reflection_config::solve_branch(&gas_of(g)?, rad(w.theta_w), w.branch.into())?)
}

fn grading_of(q: f64) -> Grading {
    if q >= 1.0 {
        Grading::Uniform
    } else {
        Grading::Geometric { q }
    }
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<String> {
    prepare(cfg.out_dir())?;
    match &cfg.command {
        Command::Config(a) => cmd_config(cfg, a),
        Command::Sweep(a) => cmd_sweep(cfg, a),
        Command::Solve(a) => cmd_solve(cfg, a),
        Command::Verify(a) => cmd_verify(cfg, a),
    }
}

fn config_json(c: &ReflectionConfiguration) -> Value {
    let inv = c.check_invariants();
    json!({
        "branch": c.branch,
        "theta_w_deg": deg(c.theta_w),
        "u2": c.state2.u,
        "v2": c.state2.v,
        "rho2": c.state2.rho,
        "c2": c.c2,
        "xi0": c.xi0,
        "u1": c.u1,
        "p0": [c.p0.0, c.p0.1],
        "p1": [c.p1.0, c.p1.1],
        "p4": [c.p4.0, c.p4.1],
        "y1": c.y1(),
        "entropy": inv.entropy,
        "supersonic_at_p0": c.supersonic_at_p0,
        "continuity_residual": c.continuity_residual,
        "rh_residual": c.rh_residual,
        "p1_circle_error": inv.p1_circle_error,
        "p1_sonic_error": inv.p1_sonic_error,
        "s1_continuity_error": inv.s1_continuity_error,
        "configuration": c,
    })
}

fn config_row(c: &ReflectionConfiguration, theta_deg: f64) -> Vec<String> {
    [theta_deg, c.state2.u, c.state2.v, c.state2.rho, c.c2, c.p1.0, c.p1.1, c.y1(), c.continuity_residual, c.rh_residual]
        .iter()
        .map(|v| format!("{v:?}"))
        .chain([format!("{:?}", c.branch).to_lowercase(), c.supersonic_at_p0.to_string()])
        .collect()
}

const CONFIG_COLUMNS: [&str; 12] =
    ["theta_w_deg", "u2", "v2", "rho2", "c2", "p1_xi", "p1_eta", "y1", "continuity_residual", "rh_residual", "branch", "supersonic_at_p0"];

fn cmd_config(cfg: &RunConfig, a: &ConfigArgs) -> Result<String> {
    let gas = gas_of(&a.gas)?;
    let roots = reflection_config::solve_state2(&gas, rad(a.wedge.theta_w))?;
    let digest = cfg.digest();
    match a.format {
        Format::Json | Format::Bin => {
            let doc = json!({
                "run_digest": digest,
                "run_config": cfg,
                "weak": config_json(&roots.weak),
                "strong": roots.strong.as_ref().map(config_json),
            });
            io::write_json(&a.out.join("config.json"), &doc)?;
        }
        Format::Csv => {
            let mut rows = vec![config_row(&roots.weak, a.wedge.theta_w)];
            if let Some(s) = &roots.strong {
                rows.push(config_row(s, a.wedge.theta_w));
            }
            fs::write(a.out.join("config.csv"), io::table_csv(&CONFIG_COLUMNS, &rows, &digest))?;
        }
    }
    Ok(format!("config theta_w={} rho2={:?}", a.wedge.theta_w, roots.weak.state2.rho))
}

fn cmd_sweep(cfg: &RunConfig, a: &SweepArgs) -> Result<String> {
    let gas = gas_of(&a.gas)?;
    if !(a.step > 0.0 && a.theta_hi < 90.0) {
        return Err(CliError::Config("need step > 0 and theta-hi < 90".into()));
    }
    let (lo, hi) = reflection_config::detect_theta_c(&gas, rad(1.0), rad(a.theta_hi), 60)?;
    let sonic = reflection_config::detect_sonic_angle(&gas, hi, rad(a.theta_hi), 60).ok();
    let mut rows = Vec::new();
    let mut rho2 = Vec::new();
    let start = deg(hi).ceil();
    let mut angles = Vec::new();
    for k in 0.. {
        let t = start + k as f64 * a.step;
        if t > a.theta_hi + 1e-9 {
            break;
        }
        let c = reflection_config::solve_branch(&gas, rad(t), a.branch.into())?;
        rho2.push(c.state2.rho);
        angles.push(t);
        rows.push(config_row(&c, t));
    }
    let min_at = rho2.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).map(|(k, _)| angles[k]);
    let increasing = rho2.windows(2).all(|w| w[1] > w[0]);
    let decreasing = rho2.windows(2).all(|w| w[1] < w[0]);
    let trend = if increasing {
        "increasing"
    } else if decreasing {
        "decreasing"
    } else {
        "non-monotone"
    };
    let digest = cfg.digest();
    fs::write(a.out.join("sweep.csv"), io::table_csv(&CONFIG_COLUMNS, &rows, &digest))?;
    io::write_json(
        &a.out.join("sweep.json"),
        &json!({
            "run_digest": digest,
            "run_config": cfg,
            "theta_c_bracket_deg": [deg(lo), deg(hi)],
            "sonic_angle_bracket_deg": sonic.map(|(l, h)| [deg(l), deg(h)]),
            "angles": rows.len(),
            "rho2_trend": trend,
            "rho2_min_at_deg": min_at,
        }),
    )?;
    Ok(format!("sweep theta_c in [{:.6}, {:.6}] deg, {} angles, rho2 {trend}", deg(lo), deg(hi), rows.len()))
}

/// Coefficients recorded with a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientInfo {
    pub name: String,
    pub a: f64,
    pub b: f64,
}

/// Metadata written next to every solved field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub run_digest: String,
    pub run_config: RunConfig,
    pub mode: Mode,
    pub coefficients: CoefficientInfo,
    pub layout: FieldLayout,
    pub nx: usize,
    pub ny: usize,
    pub boundary: Value,
    pub options: SolverOptions,
    pub eps: Option<f64>,
    pub configuration: Option<ReflectionConfiguration>,
    pub report: SolveReport,
    pub field: Option<ScalarField2D>,
}

struct Solved {
    field: ScalarField2D,
    report: SolveReport,
    coefficients: CoefficientInfo,
    boundary: Value,
    eps: Option<f64>,
    configuration: Option<ReflectionConfiguration>,
    options: SolverOptions,
}

fn solver_options(a: &SolveArgs) -> SolverOptions {
    SolverOptions { tolerance: a.tol, max_iterations: a.max_iter, ..SolverOptions::default() }
}

fn solve_fields(a: &SolveArgs) -> Result<Solved> {
    let opts = solver_options(a);
    let grading = grading_of(a.grade);
    let config = configuration(&a.gas, &a.wedge);
    match a.mode {
        Mode::Reflection => {
            let c = config?;
            let eps = a.eps.unwrap_or(c.c2 / 20.0);
            let grid = ReflectionGrid { nx: a.grid.nx, ny: a.grid.ny, grading };
            let s = degenerate_solver::solve_reflection_near_sonic(&c, eps, &grid, &opts)?;
            let gamma = c.gas.gamma;
            Ok(Solved {
                field: s.field,
                report: s.report,
                coefficients: CoefficientInfo { name: "reflection".into(), a: gamma + 1.0, b: 1.0 / c.c2 },
                boundary: json!({
                    "sonic": "psi = 0",
                    "wedge": "psi_y = 0",
                    "shock": "Psi(psi_x, psi_y, psi, x, y) = 0",
                    "outer": "synthetic psi = x^2/(2(gamma+1)) (surrogate)",
                }),
                eps: Some(eps),
                configuration: Some(c),
                options: opts,
            })
        }
        Mode::Model | Mode::Linear => {
            let b = match a.b {
                Some(b) => b,
                None => 1.0 / config?.c2,
            };
            let coef_a = match a.mode {
                Mode::Linear => {
                    if a.a.is_some_and(|v| v != 0.0) {
                        return Err(CliError::Config("linear mode has a = 0".into()));
                    }
                    0.0
                }
                _ => a.a.unwrap_or(a.gas.gamma + 1.0),
            };
            let grid = GridSpec { nx: a.grid.nx, ny: a.grid.ny, x_max: a.rhat, y_min: -1.0, y_max: 1.0, grading };
            let (amp, c) = (a.amplitude, a.linear_c);
            let g = move |x: f64, y: f64| {
                if coef_a > 0.0 {
                    x * x / (2.0 * coef_a) * (1.0 + amp * (PI * y).cos())
                } else {
                    c * x.powf(1.5)
                }
            };
            let bc = match a.sides {
                Sides::Neumann => BoundaryConditions::outer_from(&grid, g, SideCondition::Neumann, SideCondition::Neumann)?,
                Sides::Dirichlet => BoundaryConditions::dirichlet_from(&grid, g)?,
            };
            let model = ModelCoefficients { a: coef_a, b };
            let s = degenerate_solver::solve(&model, &bc, &grid, &opts)?;
            let outer = if coef_a > 0.0 {
                format!("psi = (x^2/(2a))(1 + {amp:?} cos(pi y))")
            } else {
                format!("psi = {c:?} x^(3/2)")
            };
            Ok(Solved {
                field: s.field,
                report: s.report,
                coefficients: CoefficientInfo { name: model_name(coef_a).into(), a: coef_a, b },
                boundary: json!({
                    "x=0": "psi = 0",
                    "outer": outer,
                    "y sides": match a.sides { Sides::Neumann => "psi_y = 0", Sides::Dirichlet => "outer profile" },
                }),
                eps: None,
                configuration: None,
                options: opts,
            })
        }
    }
}

fn model_name(a: f64) -> &'static str {
    if a == 0.0 {
        "linear"
    } else {
        "model"
    }
}

fn cmd_solve(cfg: &RunConfig, a: &SolveArgs) -> Result<String> {
    let s = solve_fields(a)?;
    let digest = cfg.digest();
    let out = &a.out;
    match a.format {
        Format::Bin => io::write_grid(&out.join(GRID_FILE), &s.field, &digest)?,
        Format::Csv => fs::write(out.join(FIELD_CSV), io::field_csv(&s.field, &digest))?,
        Format::Json => {}
    }
    let summary = format!(
        "solve {:?} {}x{} iterations={} residual={:e}",
        a.mode, a.grid.nx, a.grid.ny, s.report.iterations, s.report.residual
    );
    let sidecar = Sidecar {
        format: "SRLGRID1".into(),
        run_digest: digest,
        run_config: cfg.clone(),
        mode: a.mode,
        coefficients: s.coefficients,
        layout: FieldLayout { grading: s.field.grading, mapping: s.field.mapping.clone() },
        nx: s.field.nx(),
        ny: s.field.ny(),
        boundary: s.boundary,
        options: s.options,
        eps: s.eps,
        configuration: s.configuration,
        report: s.report,
        field: matches!(a.format, Format::Json).then_some(s.field),
    };
    io::write_json(&out.join(SIDECAR), &sidecar)?;
    Ok(summary)
}

/// A solved field read back from a solve directory.
pub struct Loaded {
    pub sidecar: Sidecar,
    pub field: ScalarField2D,
    pub digest: String,
}

pub fn load_solve(dir: &Path) -> Result<Loaded> {
    let raw = fs::read(dir.join(SIDECAR))?;
    let mut sidecar: Sidecar = serde_json::from_slice(&raw)?;
    let grid_path = dir.join(GRID_FILE);
    let field = if grid_path.exists() {
        io::field_from(io::read_grid(&grid_path)?, sidecar.layout.clone())?
    } else {
        sidecar.field.take().ok_or_else(|| CliError::Config(format!("{} holds no field", dir.display())))?
    };
    Ok(Loaded { digest: crate::run_config::hex_digest(&raw), sidecar, field })
}

/// One named pass/fail entry of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub mandatory: bool,
    pub value: f64,
    pub limit: f64,
    pub note: String,
}

impl CheckRecord {
    fn new(name: &str, passed: bool, value: f64, limit: f64, note: &str) -> Self {
        CheckRecord { name: name.into(), passed, mandatory: true, value, limit, note: note.into() }
    }

    fn informational(mut self) -> Self {
        self.mandatory = false;
        self
    }
}

fn finish_verify(cfg: &RunConfig, a: &VerifyArgs, name: &str, checks: Vec<CheckRecord>, details: Value) -> Result<String> {
    let failed: Vec<&str> = checks.iter().filter(|c| c.mandatory && !c.passed).map(|c| c.name.as_str()).collect();
    let warnings: Vec<&str> = checks.iter().filter(|c| !c.mandatory && !c.passed).map(|c| c.name.as_str()).collect();
    let doc = json!({
        "run_digest": cfg.digest(),
        "run_config": cfg,
        "what": name,
        "passed": failed.is_empty(),
        "checks": checks,
        "warnings": warnings,
        "details": details,
    });
    io::write_json(&a.out.join(format!("{name}.json")), &doc)?;
    if failed.is_empty() {
        Ok(format!("verify {name}: {} checks passed, {} warnings", checks.len(), warnings.len()))
    } else {
        Err(CliError::Verification(format!("{name}: {}", failed.join("; "))))
    }
}

fn cmd_verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<String> {
    match a.what {
        Check::Rh => verify_rh(cfg, a),
        Check::Barriers => verify_barriers(cfg, a),
        Check::Regularity => verify_regularity(cfg, a),
    }
}

/// Checks of the state algebra and the shock-boundary functions.
pub fn rh_checks(c: &ReflectionConfiguration) -> Vec<CheckRecord> {
    let fns = ShockBoundaryFns::new(c);
    let inv = c.check_invariants();
    let mut f_max: f64 = 0.0;
    for i in 0..20 {
        let xi = c.p1.0 - 1.0 + 2.0 * i as f64 / 19.0;
        f_max = f_max.max(fns.f(0.0, 0.0, 0.0, xi).map(f64::abs).unwrap_or(f64::INFINITY));
    }
    let p1 = fns.psi_p1_at_p1();
    let p1t = fns.psi_p1_at_p1_tangential();
    let g_ok = [1.1, 1.4, 2.0, 3.0].iter().all(|&g| check_g_unique(g));
    vec![
        CheckRecord::new("continuity residual at P0", c.continuity_residual <= 1e-12, c.continuity_residual, 1e-12, "potential continuity across the reflected shock"),
        CheckRecord::new("Rankine-Hugoniot residual at P0", c.rh_residual <= 1e-12, c.rh_residual, 1e-12, "mass flux balance"),
        CheckRecord::new("rho2 > rho1", c.state2.rho > c.gas.rho1, c.state2.rho, c.gas.rho1, "entropy condition"),
        CheckRecord::new("|D phi2(P0)| > c2", c.supersonic_at_p0, c.supersonic_at_p0 as u8 as f64, 1.0, "state (2) supersonic at the reflection point"),
        CheckRecord::new("|P1 - center| = c2", inv.p1_circle_error <= 1e-10, inv.p1_circle_error, 1e-10, "P1 on the sonic circle"),
        CheckRecord::new("F(0,0,0,xi) = 0", f_max <= 1e-12, f_max, 1e-12, "20 samples of xi"),
        CheckRecord::new("Psi_p1(0,0,0,0,y1) > 0", p1 > 0.0, p1, 0.0, "closed form at P1"),
        CheckRecord::new("Psi_p1 closed forms agree", (p1 - p1t).abs() <= 1e-10, (p1 - p1t).abs(), 1e-10, "normal and tangential forms"),
        CheckRecord::new("g has a unique zero", g_ok, g_ok as u8 as f64, 1.0, "gamma in {1.1, 1.4, 2, 3}"),
    ]
}

fn verify_rh(cfg: &RunConfig, a: &VerifyArgs) -> Result<String> {
    let c = configuration(&a.gas, &a.wedge)?;
    let checks = rh_checks(&c);
    finish_verify(cfg, a, "rh", checks, config_json(&c))
}

/// Perturbed model fixture: `a = γ+1`, `b = 1/c₂`, `(0, 1/2) × (−1, 1)`, Neumann sides.
pub fn model_fixture(gas: &GasArgs, wedge: &WedgeArgs, grid: GridArg) -> Result<(ScalarField2D, f64, f64)> {
    let args = SolveArgs {
        mode: Mode::Model,
        gas: *gas,
        wedge: *wedge,
        grid,
        grade: 0.95,
        tol: 1e-10,
        max_iter: 100,
        eps: None,
        a: None,
        b: None,
        rhat: 0.5,
        amplitude: 0.2,
        linear_c: 1.0,
        sides: Sides::Neumann,
        format: Format::Bin,
        out: PathBuf::new(),
    };
    let s = solve_fields(&args)?;
    Ok((s.field, s.coefficients.a, s.coefficients.b))
}

/// Barrier suite outcome.
#[derive(Debug, Clone, Serialize)]
pub struct BarrierSuite {
    pub recipe: BarrierRecipe,
    pub lower: barriers::LowerRecipe,
    pub scans: Vec<SignScan>,
    pub comparisons: Vec<ComparisonReport>,
}

pub fn barrier_suite(field: &ScalarField2D, a: f64, b: f64, n: f64, samples: usize) -> Result<BarrierSuite> {
    let rhat = field.xs[field.nx() - 1];
    let c0 = barriers::c0_bound(b, n, rhat);
    let recipe = barriers::choose_subsolution_params(a, b, n, c0, rhat, &|r| barriers::sigma_from_field(field, r))?;
    let lower = barriers::choose_lower_params(&recipe, 0.2)?;
    let model = ModelCoefficients { a, b };
    let scans = vec![
        barriers::sign_scan(&recipe.subsolution(), Operator::L1, &model, recipe.r0, 1.0, samples, true),
        barriers::sign_scan(&recipe.supersolution(), Operator::L2, &model, recipe.r1, 1.0, samples, false),
        barriers::sign_scan(&lower.barrier(), Operator::L2, &model, lower.r2, 1.0, samples, true),
    ];
    let w = field.map_values(|x, _, v| x * x / (2.0 * a) - v);
    let tol = 1e-12;
    let comparisons = vec![
        barriers::verify_comparison(field, &recipe.subsolution(), Direction::Below, recipe.r0, tol),
        barriers::verify_comparison(&w, &recipe.supersolution(), Direction::Above, recipe.r1, tol),
        barriers::verify_comparison(&w, &lower.barrier(), Direction::Below, lower.r2, tol),
    ];
    Ok(BarrierSuite { recipe, lower, scans, comparisons })
}

pub fn barrier_checks(s: &BarrierSuite) -> Vec<CheckRecord> {
    let mut v = Vec::new();
    let failed: Vec<&str> = s.recipe.checks().into_iter().filter(|c| !c.1).map(|c| c.0).collect();
    v.push(CheckRecord::new("recipe inequalities", failed.is_empty(), failed.len() as f64, 0.0, &failed.join("; ")));
    let names = ["L1 w > 0 (grid scan)", "L2 v - rhs < 0 (grid scan)", "L2 u_minus - rhs > 0 (grid scan)"];
    for (sc, name) in s.scans.iter().zip(names) {
        v.push(CheckRecord::new(name, sc.violations == 0, sc.extreme, 0.0, "dense sampling, not a proof"));
    }
    let names = ["w <= psi", "W <= v", "W >= u_minus"];
    for (c, name) in s.comparisons.iter().zip(names) {
        let note = if c.applicable { "nodes of Q+_{r,1}" } else { "boundary ordering fails; comparison inapplicable" };
        v.push(CheckRecord::new(name, c.applicable && c.violations == 0, c.worst_margin, 0.0, note));
    }
    v
}

fn verify_barriers(cfg: &RunConfig, a: &VerifyArgs) -> Result<String> {
    let (field, ca, cb) = match a.input.first() {
        Some(dir) => {
            let l = load_solve(dir)?;
            if l.sidecar.mode != Mode::Model {
                return Err(CliError::Config("barrier checks need a model-mode solve".into()));
            }
            (l.field, l.sidecar.coefficients.a, l.sidecar.coefficients.b)
        }
        None => model_fixture(&a.gas, &a.wedge, a.grid)?,
    };
    let suite = barrier_suite(&field, ca, cb, a.bound_n, a.samples)?;
    let checks = barrier_checks(&suite);
    finish_verify(cfg, a, "barriers", checks, serde_json::to_value(&suite)?)
}

fn rectangle_stations(field: &ScalarField2D) -> Vec<f64> {
    diagnostics::interior_stations(field, 1)
}

/// Regularity checks on one field or a refinement triplet.
/// Coefficients of the linearized shock condition along the computed shock row.
pub fn shock_bhat(field: &ScalarField2D, c: &ReflectionConfiguration) -> Result<BhatReport> {
    let j = field.ny() - 1;
    let trace: Vec<TraceSample> = (1..field.nx() - 1)
        .map(|i| {
            let jt = field.jet(i, j);
            TraceSample { x: field.xs[i], y: field.y(i, j), psi: jt.v, psi_x: jt.x, psi_y: jt.y }
        })
        .collect();
    Ok(ShockBoundaryFns::new(c).bhat_coefficients(&trace)?)
}

pub fn regularity_checks(fields: &[&ScalarField2D], a: f64, config: Option<&ReflectionConfiguration>) -> Result<(Vec<CheckRecord>, Value)> {
    let expected = 1.0 / a;
    let stations = match config {
        Some(_) => JUMP_STATIONS.to_vec(),
        None => rectangle_stations(fields[0]),
    };
    let finest = fields[fields.len() - 1];
    let limits: Vec<(f64, f64, f64, f64)> = if fields.len() == 3 {
        diagnostics::sonic_limit_triplet([fields[0], fields[1], fields[2]], &stations)?
            .iter()
            .map(|e| (e.s, e.psi_xx.value, e.psi_xy.value, e.psi_yy.value))
            .collect()
    } else {
        diagnostics::sonic_limit_estimate(finest, &stations)?.iter().map(|l| (l.s, l.psi_xx, l.psi_xy, l.psi_yy)).collect()
    };
    let rel = limits.iter().map(|l| (l.1 - expected).abs() / expected).fold(0.0, f64::max);
    let cross = limits.iter().map(|l| l.2.abs().max(l.3.abs())).fold(0.0, f64::max);
    let mut checks = vec![
        CheckRecord::new("psi_xx(0,y) = 1/a", rel <= 0.02, rel, 0.02, "relative deviation, worst interior station"),
        {
            let c = CheckRecord::new("psi_xy(0,y), psi_yy(0,y) vanish", cross <= 0.02 / a, cross, 0.02 / a, "worst interior station");
            if config.is_some() {
                c.informational()
            } else {
                c
            }
        },
    ];
    let norms: Vec<f64> = fields.iter().map(|f| diagnostics::parabolic_norm(f, None).value).collect();
    let finite = norms.iter().all(|v| v.is_finite());
    checks.push(CheckRecord::new("parabolic norm finite", finite, norms[norms.len() - 1], f64::INFINITY, "sum over k+l <= 2"));
    if norms.len() >= 2 {
        let (p, q) = (norms[norms.len() - 2], norms[norms.len() - 1]);
        let d = (q - p).abs() / q.abs();
        checks.push(CheckRecord::new("parabolic norm stable under refinement", d <= 0.05, d, 0.05, "two finest grids").informational());
    }
    let mut details = json!({
        "expected_psi_xx": expected,
        "stations": limits.iter().map(|l| json!({"s": l.0, "psi_xx": l.1, "psi_xy": l.2, "psi_yy": l.3})).collect::<Vec<_>>(),
        "parabolic_norms": norms,
        "grids": fields.iter().map(|f| [f.nx(), f.ny()]).collect::<Vec<_>>(),
    });
    if let Some(c) = config {
        let jump = diagnostics::jump_from_limits(limits.iter().map(|l| (l.0, l.1)).collect(), expected)?;
        let jrel = (jump.value - expected).abs() / expected;
        checks.push(CheckRecord::new("jump of D_rr phi across the sonic arc = 1/(gamma+1)", jrel <= 0.02, jump.value, expected, "relative tolerance 2%"));
        let mut probes = Vec::new();
        for f in fields {
            probes.push(diagnostics::two_sequence_probe(f, c, None)?);
        }
        let last = &probes[probes.len() - 1];
        let srel = (last.sonic_adjacent_limit - expected).abs() / expected;
        checks.push(
            CheckRecord::new("sonic-adjacent psi_xx limit", srel <= 0.05, last.sonic_adjacent_limit, expected, "surrogate-boundary")
                .informational(),
        );
        checks.push(
            CheckRecord::new(
                "shock-adjacent limit below sonic-adjacent",
                last.shock_adjacent_limit < last.sonic_adjacent_limit,
                last.shock_adjacent_limit,
                last.sonic_adjacent_limit,
                "surrogate-boundary",
            )
            .informational(),
        );
        let bhat = shock_bhat(fields[fields.len() - 1], c)?;
        checks.push(
            CheckRecord::new(
                "bhat_1 >= lambda along the shock trace",
                bhat.largest_eps > 0.0,
                bhat.min_b1,
                bhat.lambda,
                &format!("holds for x <= {:?}", bhat.largest_eps),
            )
            .informational(),
        );
        details["jump"] = serde_json::to_value(&jump)?;
        details["two_sequence"] = serde_json::to_value(&probes)?;
        details["bhat"] = json!({
            "lambda": bhat.lambda,
            "min_b1": bhat.min_b1,
            "max_abs_b2": bhat.max_abs_b2,
            "max_abs_b3": bhat.max_abs_b3,
            "largest_eps": bhat.largest_eps,
        });
    }
    Ok((checks, details))
}

fn verify_regularity(cfg: &RunConfig, a: &VerifyArgs) -> Result<String> {
    if !(a.input.len() == 1 || a.input.len() == 3) {
        return Err(CliError::Config("regularity needs one or three --input directories".into()));
    }
    let loaded: Vec<Loaded> = a.input.iter().map(|d| load_solve(d)).collect::<Result<_>>()?;
    let mut cfg = cfg.clone();
    if let Command::Verify(v) = &mut cfg.command {
        v.input_digests = loaded.iter().map(|l| l.digest.clone()).collect();
    }
    let s0 = &loaded[0].sidecar;
    let fields: Vec<&ScalarField2D> = loaded.iter().map(|l| &l.field).collect();
    let (checks, details) = regularity_checks(&fields, s0.coefficients.a, s0.configuration.as_ref())?;
    let finest = fields[fields.len() - 1];
    let j = match s0.configuration {
        Some(_) => finest.nearest_s(0.5),
        None => finest.ny() / 2,
    };
    fs::write(a.out.join("traces.csv"), io::slice_csv(finest, j, &cfg.digest()))?;
    finish_verify(&cfg, a, "regularity", checks, details)
}
