//! Batch front door: run solvers and checks, emit CSV/JSON/SVG artifacts
//! with a manifest. Exit codes: 0 on pass, 1 when a criterion fails, 2 on
//! usage or configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use euvac::admissibility::{self, default_test_family};
use euvac::besov::{self, dyadic_shifts};
use euvac::commutator::{measure_rate, Nonlinearity};
use euvac::config::Config;
use euvac::eos::EosParams;
use euvac::error::Error;
use euvac::exponents::{sample_interior, solve_window, verify_full_system};
use euvac::grid::{
    field_from_csv, field_sidecar, field_to_csv, FieldSidecar, FlowField, Geometry, Grid,
    SpatialExtension,
};
use euvac::mollify::{Lattice, MollifierKernel};
use euvac::relative_energy::relative_energy;
use euvac::report::{
    fmt_float, fmt_slope, rate_report_csv, series_csv, svg_linear, svg_loglog, write_atomic,
    RunManifest, Series,
};
use euvac::solver::{run_initial_value, FluxKind, Limiter, RiemannSetup, SchemeConfig};
use euvac::testfields::weierstrass_lattice;
use euvac::vacuum_example::{
    build_example, check_uniform_integrability, gronwall_monitor, run_example, track_boundary,
    Example4Config, IntegrabilityResolution,
};

#[derive(Parser)]
#[command(name = "euvac", version, about = "Vacuum-aware isentropic Euler verification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-volume run from a config file; emits frame CSV + manifest.
    Simulate(SimulateArgs),
    /// Sample the exact two-rarefaction solution at a time.
    Riemann(RiemannArgs),
    /// Certify a stored field against an admissibility criterion.
    Check(CheckArgs),
    /// Seminorm estimate and mollification rates for a stored field.
    Besov(BesovArgs),
    /// Commutator decay-rate measurement on rough test fields.
    CommutatorRate(CommutatorArgs),
    /// Relative energy between two stored fields, per frame.
    Relenergy(RelenergyArgs),
    /// Exponent-window feasibility and the slack table.
    Exponents(ExponentsArgs),
    /// Expanding-vacuum example: run, monitor, or integrability sweep.
    Example4(Example4Args),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RiemannArgs {
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long)]
    rho_l: f64,
    #[arg(long)]
    u_l: f64,
    #[arg(long)]
    rho_r: f64,
    #[arg(long)]
    u_r: f64,
    /// Evaluation time (fan origin at t = 0).
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = -4.0)]
    x_min: f64,
    #[arg(long, default_value_t = 4.0)]
    x_max: f64,
    #[arg(long, default_value_t = 512)]
    n_cells: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CheckArgs {
    /// Frame CSV produced by `simulate`.
    #[arg(long)]
    input: PathBuf,
    /// Grid sidecar JSON next to the CSV.
    #[arg(long)]
    sidecar: PathBuf,
    /// energy | weak | lambda | vacuum-integrability
    #[arg(long)]
    criterion: String,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 4.0)]
    rho_max: f64,
    /// Exponent for the vacuum-integrability criterion.
    #[arg(long, default_value_t = 0.25)]
    theta: f64,
    /// Dyadic epsilon list for the vacuum-integrability criterion.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Energy-check discretization allowance.
    #[arg(long, default_value_t = 0.0)]
    allowance: f64,
    /// Weak-form defect tolerance for `--criterion all` (default: 2 * dx).
    #[arg(long)]
    weak_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct BesovArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sidecar: PathBuf,
    /// rho | mom | velocity
    #[arg(long, default_value = "rho")]
    component: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    q: f64,
    /// Dyadic epsilons for the mollification-rate fit (optional).
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CommutatorArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RelenergyArgs {
    #[arg(long)]
    weak: PathBuf,
    #[arg(long)]
    weak_sidecar: PathBuf,
    #[arg(long)]
    strong: PathBuf,
    #[arg(long)]
    strong_sidecar: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 4.0)]
    rho_max: f64,
    /// Also sweep the mollified-system residual norms of the strong field
    /// over these dyadic epsilons (emits residuals.csv + residuals.json).
    #[arg(long, value_delimiter = ',')]
    sweep_eps: Vec<f64>,
    /// Scaling exponents for the sweep: delta = eps^kappa_exp.
    #[arg(long, default_value_t = 0.25)]
    kappa_exp: f64,
    /// sigma = eps^nu.
    #[arg(long, default_value_t = 0.3)]
    nu: f64,
    /// Vacuum-integrability exponent feeding (p, q~).
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ExponentsArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Example4Args {
    /// run | monitor | integrability
    mode: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TOOLKIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Riemann(a) => riemann(a),
        Command::Check(a) => check(a),
        Command::Besov(a) => besov_cmd(a),
        Command::CommutatorRate(a) => commutator_rate(a),
        Command::Relenergy(a) => relenergy(a),
        Command::Exponents(a) => exponents_cmd(a),
        Command::Example4(a) => example4(a),
    }
}

fn load_field(csv: &Path, sidecar: &Path) -> Result<FlowField, Error> {
    let sidecar_text = std::fs::read_to_string(sidecar)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", sidecar.display())))?;
    let sc: FieldSidecar = serde_json::from_str(&sidecar_text)
        .map_err(|e| Error::Config(format!("bad sidecar {}: {e}", sidecar.display())))?;
    let csv_text = std::fs::read_to_string(csv)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", csv.display())))?;
    field_from_csv(&csv_text, &sc)
}

fn emit_field(
    dir: &Path,
    stem: &str,
    field: &FlowField,
    manifest: &mut RunManifest,
) -> Result<(), Error> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let sidecar_path = dir.join(format!("{stem}.json"));
    write_atomic(&csv_path, field_to_csv(field).as_bytes())?;
    write_atomic(
        &sidecar_path,
        serde_json::to_string_pretty(&field_sidecar(field))
            .expect("sidecar serialization")
            .as_bytes(),
    )?;
    manifest.outputs.push(csv_path.display().to_string());
    manifest.outputs.push(sidecar_path.display().to_string());
    Ok(())
}

fn emit_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), Error> {
    write_atomic(&dir.join("manifest.json"), manifest.to_json().as_bytes())
}

fn simulate(a: SimulateArgs) -> Result<bool, Error> {
    let cfg_text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = Config::parse(&cfg_text)?;
    let sect = "simulate";
    if !cfg.has_section(sect) {
        return Err(Error::Config("missing [simulate] section".into()));
    }
    let gamma = cfg.get_f64(sect, "gamma")?;
    let kappa = cfg.get_f64_or(sect, "kappa", 1.0)?;
    let rho_max = cfg.get_f64_or(sect, "rho_max", 4.0)?;
    let params = EosParams::new(kappa, gamma, rho_max)?;
    let grid = Grid::new(
        Geometry::Planar1d,
        cfg.get_f64(sect, "x_min")?,
        cfg.get_f64(sect, "x_max")?,
        cfg.get_usize(sect, "n_cells")?,
        0.0,
        cfg.get_f64(sect, "t_end")?,
        cfg.get_usize(sect, "n_frames")?,
    )?;
    let flux = match cfg.get_str_or(sect, "flux", "rusanov").as_str() {
        "rusanov" => FluxKind::Rusanov,
        "hll" => FluxKind::Hll,
        other => {
            return Err(Error::Config(format!(
                "field [simulate] flux: unknown {other}"
            )))
        }
    };
    let limiter = match cfg.get_str_or(sect, "limiter", "none").as_str() {
        "none" => Limiter::None,
        "minmod" => Limiter::Minmod,
        other => {
            return Err(Error::Config(format!(
                "field [simulate] limiter: unknown {other}"
            )))
        }
    };
    let scheme = SchemeConfig::new(
        flux,
        cfg.get_f64_or(sect, "cfl", 0.45)?,
        grid.dx() * grid.dx(),
        limiter,
        Geometry::Planar1d,
    )?;
    let ic = cfg.get_str_or(sect, "ic", "riemann");
    let field = match ic.as_str() {
        "riemann" => {
            let rho_l = cfg.get_f64(sect, "rho_l")?;
            let u_l = cfg.get_f64(sect, "u_l")?;
            let rho_r = cfg.get_f64(sect, "rho_r")?;
            let u_r = cfg.get_f64(sect, "u_r")?;
            run_initial_value(
                grid,
                move |x| if x < 0.0 { rho_l } else { rho_r },
                move |x| if x < 0.0 { u_l } else { u_r },
                &scheme,
                &params,
                SpatialExtension::Constant,
            )?
        }
        "bump" => {
            let base = cfg.get_f64_or(sect, "bump_base", 1.0)?;
            let amp = cfg.get_f64_or(sect, "bump_amp", 0.5)?;
            let width = cfg.get_f64_or(sect, "bump_width", 1.0)?;
            let slope = cfg.get_f64_or(sect, "u_slope", 0.0)?;
            let ext = if base == 0.0 {
                SpatialExtension::Zero
            } else {
                SpatialExtension::Constant
            };
            run_initial_value(
                grid,
                move |x| base + amp * (1.0 - (x / width) * (x / width)).max(0.0).powi(2),
                move |x| slope * x,
                &scheme,
                &params,
                ext,
            )?
        }
        other => {
            return Err(Error::Config(format!(
                "field [simulate] ic: unknown {other}"
            )))
        }
    };
    let mut manifest = RunManifest::new("simulate", &cfg_text);
    manifest.inputs.push(a.config.display().to_string());
    emit_field(&a.out, "run", &field, &mut manifest)?;
    emit_manifest(&a.out, &manifest)?;
    println!(
        "simulate: wrote {} frames to {}",
        field.grid.n_frames,
        a.out.display()
    );
    Ok(true)
}

fn riemann(a: RiemannArgs) -> Result<bool, Error> {
    if !(a.t > 0.0) {
        return Err(Error::Config(format!(
            "field --t: fan evaluation needs t > 0, got {}",
            a.t
        )));
    }
    let params = EosParams::new(a.kappa, a.gamma, 16.0)?;
    let setup = RiemannSetup {
        rho_l: a.rho_l,
        u_l: a.u_l,
        rho_r: a.rho_r,
        u_r: a.u_r,
        params,
    };
    // two frames, at half time and at the requested time (the fan is a
    // point at t = 0)
    let grid = Grid::new(
        Geometry::Planar1d,
        a.x_min,
        a.x_max,
        a.n_cells,
        0.5 * a.t,
        a.t,
        2,
    )?;
    let field = euvac::solver::sample_rarefaction(&setup, grid, 0.0)?;
    let args_text = format!(
        "riemann {} {} {} {} t={} n={}",
        a.rho_l, a.u_l, a.rho_r, a.u_r, a.t, a.n_cells
    );
    let mut manifest = RunManifest::new("riemann", &args_text);
    emit_field(&a.out, "rarefaction", &field, &mut manifest)?;
    emit_manifest(&a.out, &manifest)?;
    println!("riemann: exact fan written to {}", a.out.display());
    Ok(true)
}

fn check(a: CheckArgs) -> Result<bool, Error> {
    let field = load_field(&a.input, &a.sidecar)?;
    let params = EosParams::new(a.kappa, a.gamma, a.rho_max)?;
    let mut pass = true;
    let mut report_json = serde_json::Map::new();
    match a.criterion.as_str() {
        "energy" => {
            let rep = admissibility::check_energy_admissibility(&field, &params, a.allowance)?;
            println!(
                "energy: margin {} tolerance {} -> {}",
                fmt_float(rep.margin),
                fmt_float(rep.tolerance),
                verdict(rep.pass)
            );
            pass = rep.pass;
            report_json.insert("energy".into(), serde_json::to_value(&rep).unwrap());
        }
        "weak" => {
            let g = &field.grid;
            let defects = admissibility::weak_form_residual(
                &field,
                &params,
                &default_test_family(&field),
                &[(g.t_start, g.t_end)],
            )?;
            let worst = defects
                .iter()
                .map(|d| d.mass.abs().max(d.momentum.abs()))
                .fold(0.0f64, f64::max);
            for d in &defects {
                println!(
                    "weak[{}] ({}, {}): mass {} momentum {}",
                    d.test_name,
                    d.t1,
                    d.t2,
                    fmt_float(d.mass),
                    fmt_float(d.momentum)
                );
            }
            println!("weak: max defect {}", fmt_float(worst));
            report_json.insert("weak".into(), serde_json::to_value(&defects).unwrap());
        }
        "lambda" => {
            let g = field.grid.clone();
            let mut rows = Vec::new();
            for i in 0..g.n_frames {
                let t = g.frame_time(i);
                let l = admissibility::estimate_lambda(&field, t)?;
                println!("lambda({}) = {}", fmt_float(t), fmt_float(l));
                rows.push(vec![t, l]);
            }
            report_json.insert("lambda".into(), serde_json::to_value(&rows).unwrap());
        }
        "vacuum-integrability" => {
            if a.eps.is_empty() {
                return Err(Error::Config(
                    "field --eps: the vacuum-integrability criterion needs an epsilon list".into(),
                ));
            }
            let kernel = MollifierKernel::bump_space_time();
            let g = field.grid.clone();
            let rep = admissibility::vacuum_integrability(
                &field, &kernel, a.theta, &a.eps, g.t_start, g.t_end, 4.0,
            )?;
            for (eps, v) in &rep.entries {
                println!("integral(eps = {}) = {}", fmt_float(*eps), fmt_float(*v));
            }
            println!("vacuum-integrability: {}", verdict(rep.pass));
            pass = rep.pass;
            report_json.insert("vacuum".into(), serde_json::to_value(&rep).unwrap());
        }
        "all" => {
            let weak_tol = a.weak_tol.unwrap_or(2.0 * field.grid.dx());
            let rep = admissibility::full_report(&field, &params, weak_tol, a.allowance)?;
            println!(
                "energy: margin {} -> {}",
                fmt_float(rep.energy.margin),
                verdict(rep.energy_pass)
            );
            println!(
                "weak form: max defect {} (tolerance {}) -> {}",
                fmt_float(rep.weak_max_defect),
                fmt_float(rep.weak_tolerance),
                verdict(rep.weak_pass)
            );
            for (t, l) in &rep.lambda {
                println!("lambda({}) = {}", fmt_float(*t), fmt_float(*l));
            }
            pass = rep.energy_pass && rep.weak_pass;
            report_json.insert("report".into(), serde_json::to_value(&rep).unwrap());
        }
        other => {
            return Err(Error::Config(format!(
                "field --criterion: unknown value {other} (energy | weak | lambda | vacuum-integrability | all)"
            )))
        }
    }
    if let Some(out) = &a.out {
        let mut manifest =
            RunManifest::new("check", &format!("{} {}", a.criterion, a.input.display()));
        manifest.inputs.push(a.input.display().to_string());
        let path = out.join("check.json");
        write_atomic(
            &path,
            serde_json::to_string_pretty(&report_json).unwrap().as_bytes(),
        )?;
        manifest.outputs.push(path.display().to_string());
        emit_manifest(out, &manifest)?;
    }
    Ok(pass)
}

fn besov_cmd(a: BesovArgs) -> Result<bool, Error> {
    let field = load_field(&a.input, &a.sidecar)?;
    let g = &field.grid;
    let data: Vec<f64> = match a.component.as_str() {
        "rho" => field.rho.clone(),
        "mom" => field.mom.clone(),
        "velocity" => (0..g.n_frames * g.n_cells)
            .map(|k| field.velocity_at(k / g.n_cells, k % g.n_cells))
            .collect(),
        other => {
            return Err(Error::Config(format!(
                "field --component: unknown value {other} (rho | mom | velocity)"
            )))
        }
    };
    let lat = Lattice {
        n_t: g.n_frames,
        n_x: g.n_cells,
        dt: g.dt(),
        dx: g.dx(),
        data,
        extension: field.extension,
    };
    let shifts = dyadic_shifts(&lat);
    let est = besov::estimate_seminorm(&lat, a.alpha, a.q, &shifts)?;
    println!(
        "seminorm({}, alpha = {}, q = {}) = {}",
        a.component,
        a.alpha,
        a.q,
        fmt_float(est.seminorm)
    );
    let mut manifest = RunManifest::new("besov", &format!("{} {}", a.input.display(), a.alpha));
    manifest.inputs.push(a.input.display().to_string());
    let mut pass = true;
    let mut rows: Vec<(f64, &str, f64, Option<f64>)> = est
        .samples
        .iter()
        .map(|(h, n)| (*h, "shift_diff_norm", *n, None))
        .collect();
    if a.eps.len() >= 3 {
        let kernel = if g.n_frames > 1 {
            MollifierKernel::bump_space_time()
        } else {
            MollifierKernel::bump_space()
        };
        let rep = besov::verify_mollification_rates(&lat, &kernel, a.alpha, a.q, &a.eps)?;
        println!(
            "rates: s1 = {:?} s2 = {:?} -> {}",
            rep.s1.map(fmt_slope),
            rep.s2.map(fmt_slope),
            verdict(rep.pass)
        );
        pass = rep.pass;
        for (i, &eps) in rep.eps.iter().enumerate() {
            rows.push((eps, "diff_norm", rep.diff_norms[i], rep.s1));
            rows.push((eps, "grad_norm", rep.grad_norms[i], rep.s2));
        }
        let svg = svg_loglog(
            &[
                Series {
                    name: "diff",
                    points: rep.eps.iter().cloned().zip(rep.diff_norms.clone()).collect(),
                },
                Series {
                    name: "grad",
                    points: rep.eps.iter().cloned().zip(rep.grad_norms.clone()).collect(),
                },
            ],
            "mollification rates",
        );
        let svg_path = a.out.join("rates.svg");
        write_atomic(&svg_path, svg.as_bytes())?;
        manifest.outputs.push(svg_path.display().to_string());
    }
    let csv_path = a.out.join("besov.csv");
    write_atomic(&csv_path, rate_report_csv(&rows).as_bytes())?;
    manifest.outputs.push(csv_path.display().to_string());
    emit_manifest(&a.out, &manifest)?;
    Ok(pass)
}

fn commutator_rate(a: CommutatorArgs) -> Result<bool, Error> {
    let cfg_text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = Config::parse(&cfg_text)?;
    let sect = "commutator";
    if !cfg.has_section(sect) {
        return Err(Error::Config("missing [commutator] section".into()));
    }
    let alpha1 = cfg.get_f64(sect, "alpha1")?;
    let alpha2 = cfg.get_f64(sect, "alpha2")?;
    let q = cfg.get_f64(sect, "q")?;
    let n = cfg.get_usize_or(sect, "n_cells", 4096)?;
    let eps = cfg.get_list_f64(sect, "eps")?;
    let nl = match cfg.get_str_or(sect, "nonlinearity", "product").as_str() {
        "product" => Nonlinearity::product(),
        "affine" => Nonlinearity::affine(2.0, -1.0, 0.5),
        "pressure" => {
            let params = EosParams::new(
                cfg.get_f64_or(sect, "kappa", 1.0)?,
                cfg.get_f64(sect, "gamma")?,
                cfg.get_f64_or(sect, "rho_max", 4.0)?,
            )?;
            Nonlinearity::pressure(&params)
        }
        other => {
            return Err(Error::Config(format!(
                "field [commutator] nonlinearity: unknown {other}"
            )))
        }
    };
    let f = weierstrass_lattice(alpha1, 2.0, n, 2.0, 0.3, 3.0);
    let g = weierstrass_lattice(alpha2, 3.0, n, 0.5, 0.2, 5.0);
    let kernel = MollifierKernel::bump_space();
    let rep = measure_rate(&f, &g, &nl, &kernel, alpha1, alpha2, q, &eps)?;
    println!(
        "commutator[{}]: predicted {} fitted {:?} vacuous {} -> {}",
        nl.name,
        fmt_slope(rep.predicted_slope),
        rep.fitted_slope.map(fmt_slope),
        rep.vacuous,
        verdict(rep.pass)
    );
    let rows: Vec<(f64, &str, f64, Option<f64>)> = rep
        .eps_sequence
        .iter()
        .zip(&rep.measured_norms)
        .map(|(e, v)| (*e, "commutator_norm", *v, rep.fitted_slope))
        .collect();
    let mut manifest = RunManifest::new("commutator-rate", &cfg_text);
    manifest.inputs.push(a.config.display().to_string());
    let csv_path = a.out.join("commutator.csv");
    write_atomic(&csv_path, rate_report_csv(&rows).as_bytes())?;
    let svg_path = a.out.join("commutator.svg");
    write_atomic(
        &svg_path,
        svg_loglog(
            &[Series {
                name: "commutator",
                points: rep
                    .eps_sequence
                    .iter()
                    .cloned()
                    .zip(rep.measured_norms.clone())
                    .collect(),
            }],
            "commutator decay",
        )
        .as_bytes(),
    )?;
    manifest.outputs.push(csv_path.display().to_string());
    manifest.outputs.push(svg_path.display().to_string());
    emit_manifest(&a.out, &manifest)?;
    Ok(rep.pass)
}

fn relenergy(a: RelenergyArgs) -> Result<bool, Error> {
    let weak = load_field(&a.weak, &a.weak_sidecar)?;
    let strong = load_field(&a.strong, &a.strong_sidecar)?;
    let params = EosParams::new(a.kappa, a.gamma, a.rho_max)?;
    let g = weak.grid.clone();
    let mut rows = Vec::new();
    for i in 0..g.n_frames {
        let t = g.frame_time(i);
        let e = relative_energy(&weak, &strong, &params, t)?;
        println!("E({}) = {}", fmt_float(t), fmt_float(e));
        rows.push(vec![t, e]);
    }
    let mut manifest = RunManifest::new(
        "relenergy",
        &format!("{} vs {}", a.weak.display(), a.strong.display()),
    );
    manifest.inputs.push(a.weak.display().to_string());
    manifest.inputs.push(a.strong.display().to_string());
    let csv_path = a.out.join("relenergy.csv");
    write_atomic(
        &csv_path,
        series_csv(&["t", "relative_energy"], &rows).as_bytes(),
    )?;
    manifest.outputs.push(csv_path.display().to_string());
    if a.sweep_eps.len() >= 2 {
        let p_exp = euvac::exponents::p_exponent(a.gamma, a.theta);
        let q_tilde = euvac::exponents::q_tilde(a.gamma, a.theta).ok_or_else(|| {
            Error::Config(format!(
                "field --theta: {} is at or beyond the q~ pole for gamma = {}",
                a.theta, a.gamma
            ))
        })?;
        let kernel = MollifierKernel::bump_space_time();
        let sweep = euvac::relative_energy::residual_sweep(
            &strong,
            &kernel,
            &params,
            &a.sweep_eps,
            a.kappa_exp,
            a.nu,
            p_exp,
            q_tilde,
        )?;
        let mut sweep_rows: Vec<(f64, &str, f64, Option<f64>)> = Vec::new();
        for row in &sweep.rows {
            for (eps, value) in row.eps.iter().zip(&row.values) {
                sweep_rows.push((*eps, row.name.as_str(), *value, row.slope));
            }
            println!(
                "residual {}: slope {:?}",
                row.name,
                row.slope.map(fmt_slope)
            );
        }
        let sweep_csv = a.out.join("residuals.csv");
        write_atomic(&sweep_csv, rate_report_csv(&sweep_rows).as_bytes())?;
        let sweep_json = a.out.join("residuals.json");
        write_atomic(
            &sweep_json,
            serde_json::to_string_pretty(&sweep).unwrap().as_bytes(),
        )?;
        manifest.outputs.push(sweep_csv.display().to_string());
        manifest.outputs.push(sweep_json.display().to_string());
    }
    emit_manifest(&a.out, &manifest)?;
    Ok(true)
}

fn exponents_cmd(a: ExponentsArgs) -> Result<bool, Error> {
    let window = solve_window(a.gamma, a.alpha, a.beta, a.theta, a.q)?;
    println!("{}", serde_json::to_string_pretty(&window).unwrap());
    // slack table at the window midpoint (unbounded edges capped)
    let cap = |lo: f64, hi: f64| if hi.is_finite() { hi } else { lo + 1.0 };
    let mid = (
        0.5 * (window.kappa_lo + cap(window.kappa_lo, window.kappa_hi)),
        0.5 * (window.nu_lo + cap(window.nu_lo, window.nu_hi)),
    );
    let report = verify_full_system(&window, mid.0, mid.1);
    println!("slacks at kappa_exp = {}, nu = {}:", mid.0, mid.1);
    for e in &report.entries {
        println!("  {:<36} {} {}", e.label, fmt_slope(e.slack), verdict(e.pass));
    }
    let mut pass = window.feasible && report.pass;
    // spot-check the interior
    for (ka, nu) in sample_interior(&window, 5) {
        if !verify_full_system(&window, ka, nu).pass {
            pass = false;
        }
    }
    if let Some(out) = &a.out {
        let mut manifest = RunManifest::new(
            "exponents",
            &format!("{} {} {} {} {}", a.gamma, a.alpha, a.beta, a.theta, a.q),
        );
        let path = out.join("window.json");
        write_atomic(
            &path,
            serde_json::to_string_pretty(&window).unwrap().as_bytes(),
        )?;
        manifest.outputs.push(path.display().to_string());
        emit_manifest(out, &manifest)?;
    }
    Ok(pass)
}

fn example4(a: Example4Args) -> Result<bool, Error> {
    let cfg_text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = Config::parse(&cfg_text)?;
    let sect = "example4";
    if !cfg.has_section(sect) {
        return Err(Error::Config("missing [example4] section".into()));
    }
    let defaults = Example4Config::default_run();
    let e4 = Example4Config {
        radius: cfg.get_f64_or(sect, "radius", defaults.radius)?,
        n_profile: cfg.get_usize_or(sect, "n_profile", defaults.n_profile as usize)? as u32,
        theta: cfg.get_f64_or(sect, "theta", defaults.theta)?,
        s_reg: cfg.get_f64_or(sect, "s_reg", defaults.s_reg)?,
        t_end: cfg.get_f64_or(sect, "t_end", defaults.t_end)?,
        n_cells: cfg.get_usize_or(sect, "n_cells", defaults.n_cells)?,
        n_frames: cfg.get_usize_or(sect, "n_frames", defaults.n_frames)?,
        r_max: cfg.get_f64_or(sect, "r_max", defaults.r_max)?,
        delta_seq: cfg
            .get_list_f64(sect, "delta_seq")
            .unwrap_or(defaults.delta_seq),
        eps_seq: cfg.get_list_f64(sect, "eps_seq").unwrap_or(defaults.eps_seq),
    };
    let params = EosParams::new(
        cfg.get_f64_or(sect, "kappa", 1.0)?,
        cfg.get_f64_or(sect, "gamma", 3.0)?,
        cfg.get_f64_or(sect, "rho_max", 4.0)?,
    )?;
    let mut manifest = RunManifest::new(format!("example4 {}", a.mode), &cfg_text);
    manifest.inputs.push(a.config.display().to_string());
    match a.mode.as_str() {
        "run" => {
            let data = build_example(&e4, &params)?;
            println!(
                "initial inverse-power integral: {}",
                fmt_float(data.inverse_power_integral)
            );
            let run = run_example(&e4, &params)?;
            emit_field(&a.out, "example4", &run, &mut manifest)?;
            let radii = track_boundary(&run, &e4);
            let rows: Vec<Vec<f64>> = radii
                .iter()
                .map(|(t, r)| vec![*t, *r, (1.0 + t) * e4.radius])
                .collect();
            let csv_path = a.out.join("radius.csv");
            write_atomic(
                &csv_path,
                series_csv(&["t", "radius", "transport_law"], &rows).as_bytes(),
            )?;
            let svg_path = a.out.join("radius.svg");
            write_atomic(
                &svg_path,
                svg_linear(
                    &[
                        Series {
                            name: "tracked",
                            points: radii.clone(),
                        },
                        Series {
                            name: "(1+t)R",
                            points: radii
                                .iter()
                                .map(|(t, _)| (*t, (1.0 + t) * e4.radius))
                                .collect(),
                        },
                    ],
                    "vacuum boundary radius",
                )
                .as_bytes(),
            )?;
            manifest.outputs.push(csv_path.display().to_string());
            manifest.outputs.push(svg_path.display().to_string());
            emit_manifest(&a.out, &manifest)?;
            let dr = run.grid.dx();
            let worst = radii
                .iter()
                .map(|(t, r)| (r - (1.0 + t) * e4.radius).abs())
                .fold(0.0f64, f64::max);
            println!(
                "boundary tracking: worst error {} ({:.2} cells)",
                fmt_float(worst),
                worst / dr
            );
            Ok(worst <= 2.0 * dr)
        }
        "monitor" => {
            let run = run_example(&e4, &params)?;
            let rep = gronwall_monitor(&run, &e4, e4.theta, 0.05)?;
            let rows: Vec<Vec<f64>> = rep.series.iter().map(|(t, j)| vec![*t, *j]).collect();
            let csv_path = a.out.join("gronwall.csv");
            write_atomic(&csv_path, series_csv(&["t", "j_eps"], &rows).as_bytes())?;
            manifest.outputs.push(csv_path.display().to_string());
            emit_manifest(&a.out, &manifest)?;
            println!(
                "gronwall: c_hat = {} envelope {}",
                fmt_slope(rep.c_hat),
                verdict(rep.envelope_pass)
            );
            Ok(rep.envelope_pass)
        }
        "integrability" => {
            let run = run_example(&e4, &params)?;
            let m = cfg.get_f64_or(sect, "kernel_m", 2.0)?;
            let kernel = MollifierKernel::one_sided(m, 2)?;
            let rep = check_uniform_integrability(
                &run,
                &e4,
                &kernel,
                e4.theta,
                &e4.delta_seq,
                &e4.eps_seq,
                4.0,
                &IntegrabilityResolution::default(),
            )?;
            let rows: Vec<Vec<f64>> = rep
                .entries
                .iter()
                .map(|(e, d, v)| vec![*e, *d, *v])
                .collect();
            let csv_path = a.out.join("integrability.csv");
            write_atomic(
                &csv_path,
                series_csv(&["eps", "delta", "integral"], &rows).as_bytes(),
            )?;
            manifest.outputs.push(csv_path.display().to_string());
            emit_manifest(&a.out, &manifest)?;
            println!(
                "integrability: uniform {} delta-trend {} jensen {}",
                verdict(rep.uniform_pass),
                verdict(rep.delta_trend_pass),
                verdict(rep.jensen_pass)
            );
            Ok(rep.pass)
        }
        other => Err(Error::Config(format!(
            "unknown example4 mode {other} (run | monitor | integrability)"
        ))),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
