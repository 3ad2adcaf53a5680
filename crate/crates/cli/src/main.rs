mod config;
mod output;
mod table;

use clap::{Args, Parser, Subcommand};
use config::{parse_transition, RunConfig};
use qgalerkin::averaging;
use qgalerkin::controls::{parse_shape_spec, ControlLaw, ShapeSpec};
use qgalerkin::propagator::{
    propagate_control, Method, PropagationOptions, QuantumState, RecordGrid,
};
use qgalerkin::spectral::{
    self, dimension_for_target, energy_growth_bound, galerkin_error_bound, truncation_tail_bound,
    GalerkinSystem, SpectralModel,
};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qgalerkin", version, about = "Galerkin simulations of bilinear Schrödinger systems")]
struct Cli {
    /// TOML config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonOpts {
    /// Registry model id (planar-odd, planar-even)
    #[arg(long)]
    model: Option<String>,
    /// Galerkin dimension N
    #[arg(long)]
    n: Option<usize>,
    /// Shape spec, e.g. "cospow(l=1, omega=3, n=30)"
    #[arg(long)]
    shape: Option<String>,
    /// Amplitude divisor; overrides the shape spec's n field
    #[arg(long)]
    divisor: Option<u32>,
    /// Transition levels "j,k"
    #[arg(long)]
    transition: Option<String>,
    /// Time horizon (absolute simulated time)
    #[arg(long)]
    horizon: Option<f64>,
    /// Time horizon in drive periods
    #[arg(long)]
    horizon_periods: Option<f64>,
    /// Integrator step
    #[arg(long)]
    dt: Option<f64>,
    /// Number of recorded output times
    #[arg(long)]
    record_points: Option<usize>,
    /// Initial basis level (default: 1, or j of the transition)
    #[arg(long)]
    initial: Option<usize>,
    /// Output file or directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

impl CommonOpts {
    fn into_config(self) -> RunConfig {
        RunConfig {
            model: self.model,
            n: self.n,
            shape: self.shape,
            divisor: self.divisor,
            transition: self.transition,
            horizon: self.horizon,
            horizon_periods: self.horizon_periods,
            dt: self.dt,
            record_points: self.record_points,
            initial: self.initial,
            out: self.out,
            workers: self.workers,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dump a registry model's drift vector and coupling triplets
    Model(CommonOpts),
    /// Propagate a trajectory and write it as CSV (plus metadata sidecar)
    Simulate(CommonOpts),
    /// Run one population-transfer experiment and report the efficiencies
    Transfer(CommonOpts),
    /// Reproduce the 9-cell efficiency table (3 shapes × 3 divisors, N=22)
    Table1(table::Table1Opts),
    /// Evaluate the efficiency functional for a shape and transition
    Efficiency(CommonOpts),
    /// Evaluate the energy/tail/Galerkin-error bounds
    Bounds(BoundsOpts),
}

#[derive(Args)]
struct BoundsOpts {
    #[arg(long)]
    model: Option<String>,
    /// Galerkin dimension N (for the tail and error bounds)
    #[arg(long)]
    n: Option<usize>,
    /// Coupling constant c of the model's energy estimate
    #[arg(long)]
    c: Option<f64>,
    /// Control budget K = ‖u‖_{L¹}
    #[arg(long)]
    k_budget: Option<f64>,
    /// Initial half-norm h0
    #[arg(long, default_value_t = 1.0)]
    h0: f64,
    /// Target Galerkin error; reports the dimension needed to reach it
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    let result = match cli.command {
        Command::Model(opts) => cmd_model(file_cfg.merged_with(opts.into_config())),
        Command::Simulate(opts) => cmd_simulate(file_cfg.merged_with(opts.into_config())),
        Command::Transfer(opts) => cmd_transfer(file_cfg.merged_with(opts.into_config())),
        Command::Table1(opts) => return table::cmd_table1(opts),
        Command::Efficiency(opts) => cmd_efficiency(file_cfg.merged_with(opts.into_config())),
        Command::Bounds(opts) => cmd_bounds(opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn lookup_model(cfg: &RunConfig) -> Result<(String, SpectralModel), String> {
    let id = cfg
        .model
        .clone()
        .ok_or_else(|| "missing --model".to_string())?;
    let model = spectral::registry(&id).ok_or_else(|| {
        format!("unknown model `{id}` (available: planar-odd, planar-even)")
    })?;
    Ok((id, model))
}

fn build_system(cfg: &RunConfig) -> Result<(String, GalerkinSystem), String> {
    let (id, model) = lookup_model(cfg)?;
    let n = cfg.n.ok_or_else(|| "missing --n".to_string())?;
    let sys = model.galerkin(n).map_err(|e| e.to_string())?;
    Ok((id, sys))
}

fn build_control(cfg: &RunConfig) -> Result<ControlLaw, String> {
    let raw = cfg
        .shape
        .clone()
        .ok_or_else(|| "missing --shape".to_string())?;
    let spec = parse_shape_spec(&raw).map_err(|e| e.to_string())?;
    let mut law = match spec {
        ShapeSpec::Analytic(law) => law,
        ShapeSpec::SampledFile {
            file,
            period,
            divisor,
        } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| format!("cannot read samples {file}: {e}"))?;
            let values: Result<Vec<f64>, _> = text
                .split_whitespace()
                .map(|tok| tok.parse::<f64>())
                .collect();
            let values = values.map_err(|e| format!("bad sample in {file}: {e}"))?;
            ControlLaw::sampled(values, period, divisor).map_err(|e| e.to_string())?
        }
    };
    if let Some(n) = cfg.divisor {
        law = law.with_divisor(n).map_err(|e| e.to_string())?;
    }
    Ok(law)
}

fn cmd_model(cfg: RunConfig) -> Result<(), String> {
    let (id, sys) = build_system(&cfg)?;
    let text = sys.describe(&id);
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_simulate(cfg: RunConfig) -> Result<(), String> {
    let (id, sys) = build_system(&cfg)?;
    let control = build_control(&cfg)?;
    let horizon = match (cfg.horizon, cfg.horizon_periods) {
        (Some(h), None) => h,
        (None, Some(p)) => p * control.period(),
        (Some(_), Some(_)) => {
            return Err("give either --horizon or --horizon-periods, not both".into())
        }
        (None, None) => return Err("missing --horizon (or --horizon-periods)".into()),
    };
    let initial = cfg.initial.unwrap_or(1);
    let psi0 = QuantumState::basis(sys.dim(), initial).map_err(|e| e.to_string())?;
    let record_points = cfg.record_points.unwrap_or(2000);
    let opts = PropagationOptions {
        method: Method::MidpointExponential,
        step: cfg.dt.unwrap_or(control.period() / 200.0),
        unitarity_tol: 1e-9,
        record: RecordGrid::Uniform(record_points),
    };
    let traj =
        propagate_control(&sys, &control, &psi0, horizon, &opts).map_err(|e| e.to_string())?;
    for w in traj.warnings() {
        eprintln!("warning: {w}");
    }
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    output::write_trajectory_csv(&out, &traj).map_err(|e| e.to_string())?;
    let meta = json!({
        "model": id,
        "dimension": sys.dim(),
        "shape": control.spec_string(),
        "divisor": control.divisor(),
        "initial": initial,
        "horizon": horizon,
        "dt": opts.step,
        "record_points": record_points,
        "method": "midpoint-exponential",
        "warnings": traj.warnings(),
    });
    let meta_path = out.with_extension("meta.json");
    output::write_json(&meta_path, &meta).map_err(|e| e.to_string())?;
    eprintln!("wrote {} and {}", out.display(), meta_path.display());
    Ok(())
}

fn cmd_transfer(cfg: RunConfig) -> Result<(), String> {
    let (id, sys) = build_system(&cfg)?;
    let control = build_control(&cfg)?;
    let (j, k) = parse_transition(
        cfg.transition
            .as_deref()
            .ok_or_else(|| "missing --transition".to_string())?,
    )?;
    let horizon_periods = match (cfg.horizon, cfg.horizon_periods) {
        (None, Some(p)) => p,
        (Some(h), None) => h / control.period(),
        (Some(_), Some(_)) => {
            return Err("give either --horizon or --horizon-periods, not both".into())
        }
        (None, None) => return Err("missing --horizon-periods (or --horizon)".into()),
    };
    let rep = averaging::run_transfer(&sys, j, k, &control, horizon_periods, cfg.dt)
        .map_err(|e| e.to_string())?;
    let record = output::transfer_record(&id, sys.dim(), &rep);
    println!("{}", serde_json::to_string_pretty(&record).unwrap());
    if let Some(path) = &cfg.out {
        output::write_json(path, &record).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cmd_efficiency(cfg: RunConfig) -> Result<(), String> {
    let (id, sys) = build_system(&cfg)?;
    let control = build_control(&cfg)?;
    let (j, k) = parse_transition(
        cfg.transition
            .as_deref()
            .ok_or_else(|| "missing --transition".to_string())?,
    )?;
    let eff = averaging::efficiency(&control, &sys, j, k).map_err(|e| e.to_string())?;
    let gap = sys.eigenvalue(k) - sys.eigenvalue(j);
    let quad = control
        .fourier_coefficient_quadrature(gap)
        .map_err(|e| e.to_string())?
        .norm()
        / control.l1_over_period_quadrature().map_err(|e| e.to_string())?;
    let record: Value = json!({
        "model": id,
        "dimension": sys.dim(),
        "shape": control.spec_string(),
        "transition_j": j,
        "transition_k": k,
        "drive_gap": gap,
        "efficiency": eff,
        "efficiency_quadrature": quad,
        "l1_over_period": control.l1_over_period().map_err(|e| e.to_string())?,
    });
    println!("{}", serde_json::to_string_pretty(&record).unwrap());
    if let Some(path) = &cfg.out {
        output::write_json(path, &record).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cmd_bounds(opts: BoundsOpts) -> Result<(), String> {
    let id = opts.model.clone().unwrap_or_else(|| "planar-odd".into());
    let model = spectral::registry(&id)
        .ok_or_else(|| format!("unknown model `{id}`"))?;
    let c = opts
        .c
        .or(model.coupling_constant())
        .ok_or_else(|| "missing --c".to_string())?;
    let k = opts.k_budget.ok_or_else(|| "missing --k-budget".to_string())?;
    let h0 = opts.h0;
    let mut record = serde_json::Map::new();
    record.insert("model".into(), Value::String(id));
    record.insert("c".into(), json!(c));
    record.insert("k_budget".into(), json!(k));
    record.insert("h0".into(), json!(h0));
    record.insert(
        "energy_bound".into(),
        json!(energy_growth_bound(c, k, h0).map_err(|e| e.to_string())?),
    );
    if let Some(n) = opts.n {
        let lambda_next = model.eigenvalue(n + 1);
        record.insert("dimension".into(), json!(n));
        record.insert("lambda_next".into(), json!(lambda_next));
        record.insert(
            "tail_bound".into(),
            json!(truncation_tail_bound(c, k, lambda_next, h0).map_err(|e| e.to_string())?),
        );
        record.insert(
            "galerkin_error_bound".into(),
            json!(galerkin_error_bound(c, k, lambda_next, model.coupling_norm_bound(), h0)
                .map_err(|e| e.to_string())?),
        );
    }
    if let Some(target) = opts.target {
        record.insert(
            "dimension_for_target".into(),
            json!(dimension_for_target(&model, c, k, model.coupling_norm_bound(), h0, target)
                .map_err(|e| e.to_string())?),
        );
        record.insert("target".into(), json!(target));
    }
    let record = Value::Object(record);
    println!("{}", serde_json::to_string_pretty(&record).unwrap());
    if let Some(path) = &opts.out {
        output::write_json(path, &record).map_err(|e| e.to_string())?;
    }
    Ok(())
}
