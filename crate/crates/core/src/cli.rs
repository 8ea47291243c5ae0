//! Command-line frontend: `simulate`, `identify`, `validate`, `linearize`.
//!
//! Every command writes its fully resolved configuration into its outputs.
//! Exit codes: 0 success, 2 usage or input files, 3 simulation divergence,
//! 4 solver failure (the model file is still written), 5 validation output.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    compare_models, linearize_msd, step_response, write_bode_csv, write_nyquist_csv,
    write_step_csv, write_timeseries_csv, zoh_discretize, CompareConfig, GridSpec,
};
use crate::dynamics::{simulate, InputKind, InputSignal, MsdParams, TrajectoryData};
use crate::error::Error;
use crate::identify::{identify_ni, identify_unconstrained, AdmmSettings, NiConfig, DEFAULT_ALPHA};
use crate::lifting::{dictionary_for, LiftingDictionary};
use crate::model_io::ModelFile;
use crate::nicore::{positive_feedback, ppf_realize, to_continuous, PpfController};
use crate::tol::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "nikoopman", version, about = "Identify negative-imaginary Koopman models from trajectory data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the plant and write a trajectory CSV.
    Simulate(SimulateArgs),
    /// Fit a lifted linear model to a trajectory CSV.
    Identify(IdentifyArgs),
    /// Compare models on a trajectory and write the report and plot data.
    Validate(ValidateArgs),
    /// Linearize the plant at a state and write the model JSON.
    Linearize(LinearizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum System {
    Msd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum InputArg {
    Random,
    Prbs,
    Sine,
    Zero,
}

impl From<InputArg> for InputKind {
    fn from(k: InputArg) -> Self {
        match k {
            InputArg::Random => InputKind::RandomSteps,
            InputArg::Prbs => InputKind::Prbs,
            InputArg::Sine => InputKind::Sine,
            InputArg::Zero => InputKind::Zero,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct PlantArgs {
    #[arg(long, value_enum, default_value = "msd")]
    system: System,
    /// Mass.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Linear spring coefficient.
    #[arg(long, default_value_t = 1.0)]
    k1: f64,
    /// Cubic spring coefficient.
    #[arg(long, default_value_t = 1.0)]
    k3: f64,
    /// Constant damping.
    #[arg(long, default_value_t = 0.0)]
    b0: f64,
    /// Position-dependent damping.
    #[arg(long, default_value_t = 1.0)]
    b1: f64,
    /// Velocity-dependent damping.
    #[arg(long, default_value_t = 1.0)]
    b2: f64,
}

impl PlantArgs {
    fn params(&self) -> MsdParams {
        MsdParams {
            m: self.m,
            k1: self.k1,
            k3: self.k3,
            b0: self.b0,
            b1: self.b1,
            b2: self.b2,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    plant: PlantArgs,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0", allow_hyphen_values = true)]
    x0: Vec<f64>,
    #[arg(long, value_enum, default_value = "random")]
    input: InputArg,
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_AMPLITUDE)]
    amplitude: f64,
    /// Samples per input level (period in samples for `sine`).
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_HOLD)]
    hold: usize,
    /// Sampling time in seconds.
    #[arg(long = "T", default_value_t = crate::dynamics::DEFAULT_SAMPLE_TIME)]
    #[serde(rename = "T")]
    dt: f64,
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Ni,
    Unconstrained,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
struct IdentifyArgs {
    /// Trajectory CSV from `simulate`.
    #[arg(long)]
    traj: PathBuf,
    /// Number of thin-plate RBFs.
    #[arg(long, default_value_t = 6)]
    nrbf: usize,
    #[arg(long, default_value_t = 0)]
    center_seed: u64,
    /// Lyapunov margin of the NI program.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "ni")]
    mode: Mode,
    /// Refit P so that B_d satisfies the input equality of the certificate.
    #[arg(long)]
    strict_b: bool,
    /// z-score the state before the RBFs.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = crate::tol::ADMM_MAX_ITERS)]
    max_iters: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
struct ValidateArgs {
    /// Model JSON files, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<PathBuf>,
    /// Reference trajectory CSV.
    #[arg(long)]
    traj: PathBuf,
    /// PPF controller `K,zeta,omega`; the closed-loop section is skipped without it.
    #[arg(long, value_delimiter = ',')]
    ppf: Option<Vec<f64>>,
    /// Frequency grid `wmin,wmax,npts` in rad/s.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Samples in the step responses; defaults to the trajectory length.
    #[arg(long)]
    step_steps: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
struct LinearizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    plant: PlantArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,0", allow_hyphen_values = true)]
    x0: Vec<f64>,
    #[arg(long = "T", default_value_t = crate::dynamics::DEFAULT_SAMPLE_TIME)]
    #[serde(rename = "T")]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn usage(e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_USAGE, e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let tol = Tolerances::from_env();
    let res = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Identify(a) => cmd_identify(a, &tol),
        Command::Validate(a) => cmd_validate(a, &tol),
        Command::Linearize(a) => cmd_linearize(a),
    };
    match res {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn config_json(command: &str, args: &impl Serialize, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn check_plant(p: &PlantArgs) -> std::result::Result<MsdParams, Failure> {
    let params = p.params();
    params.validate().map_err(Failure::usage)?;
    Ok(params)
}

fn x0_pair(x0: &[f64]) -> std::result::Result<[f64; 2], Failure> {
    match x0 {
        [a, b] if a.is_finite() && b.is_finite() => Ok([*a, *b]),
        _ => Err(Failure::usage(format!("--x0 needs two finite numbers, got {x0:?}"))),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let params = check_plant(&a.plant)?;
    let x0 = x0_pair(&a.x0)?;
    if !(a.dt > 0.0 && a.dt.is_finite()) || a.steps == 0 || a.hold == 0 || !(a.amplitude >= 0.0) {
        return Err(Failure::usage("need T > 0, steps > 0, hold > 0 and amplitude >= 0"));
    }
    let signal = InputSignal {
        kind: a.input.into(),
        amplitude: a.amplitude,
        hold: a.hold,
        seed: a.seed,
    };
    let traj = match simulate(&params, &x0, &signal, a.dt, a.steps) {
        Ok(t) => t,
        Err(e @ Error::NonFinite { .. }) => return Err(Failure::new(EXIT_SIMULATION, e.to_string())),
        Err(e) => return Err(Failure::usage(e)),
    };
    let config = config_json("simulate", a, json!({}));
    let traj = traj.with_provenance(config.to_string());
    traj.save(&a.out).map_err(|e| Failure::usage(format!("{}: {e}", a.out.display())))?;
    Ok(EXIT_OK)
}

fn load_traj(path: &Path) -> std::result::Result<TrajectoryData, Failure> {
    TrajectoryData::load(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_identify(a: &IdentifyArgs, tol: &Tolerances) -> Outcome {
    if !(a.alpha > 0.0 && a.alpha.is_finite()) {
        return Err(Failure::usage("--alpha must be positive"));
    }
    if a.max_iters == 0 {
        return Err(Failure::usage("--max-iters must be positive"));
    }
    let traj = load_traj(&a.traj)?;
    let dict: LiftingDictionary = if a.nrbf == 0 {
        LiftingDictionary::identity(traj.state_dim())
    } else {
        dictionary_for(&traj, a.nrbf, a.center_seed, a.normalize).map_err(Failure::usage)?
    };
    let admm = AdmmSettings {
        tol: tol.admm,
        max_iters: a.max_iters,
        ..AdmmSettings::default()
    };
    let traj_config = traj_provenance(&traj);
    match a.mode {
        Mode::Unconstrained => {
            let (model, _) =
                identify_unconstrained(&traj, &dict).map_err(|e| Failure::new(EXIT_SOLVER, e.to_string()))?;
            let config = config_json("identify", a, json!({ "trajectory": traj_config }));
            let file = ModelFile::unconstrained(model).with_config(config);
            file.save(&a.out).map_err(|e| Failure::usage(format!("{}: {e}", a.out.display())))?;
            Ok(EXIT_OK)
        }
        Mode::Ni => {
            let cfg = NiConfig {
                alpha: a.alpha,
                w: None,
                strict_b: a.strict_b,
                admm,
            };
            let id = identify_ni(&traj, &dict, &cfg).map_err(|e| Failure::new(EXIT_SOLVER, e.to_string()))?;
            let config = config_json(
                "identify",
                a,
                json!({ "trajectory": traj_config, "admm": admm, "tolerances": tol }),
            );
            let file = ModelFile::ni(&id, a.alpha, a.strict_b).with_config(config);
            file.save(&a.out).map_err(|e| Failure::usage(format!("{}: {e}", a.out.display())))?;
            let d = &id.program.diagnostics;
            if d.converged {
                Ok(EXIT_OK)
            } else {
                Err(Failure::new(
                    EXIT_SOLVER,
                    format!(
                        "{} (model written to {} with \"converged\": false)",
                        Error::SolverNotConverged {
                            iterations: d.iterations,
                            primal_res: d.primal_res,
                            dual_res: d.dual_res,
                        },
                        a.out.display()
                    ),
                ))
            }
        }
    }
}

fn traj_provenance(traj: &TrajectoryData) -> serde_json::Value {
    match &traj.provenance {
        Some(p) => serde_json::from_str(p).unwrap_or_else(|_| serde_json::Value::String(p.clone())),
        None => serde_json::Value::Null,
    }
}

fn grid_spec(grid: &Option<Vec<f64>>) -> std::result::Result<GridSpec, Failure> {
    let Some(g) = grid else {
        return Ok(GridSpec::default());
    };
    if g.len() != 3 {
        return Err(Failure::usage(format!("--grid needs wmin,wmax,npts, got {g:?}")));
    }
    let (lo, hi, n) = (g[0], g[1], g[2]);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2.0 || n.fract() != 0.0 {
        return Err(Failure::usage(format!("--grid needs 0 < wmin < wmax and an integer npts >= 2, got {g:?}")));
    }
    Ok(GridSpec {
        min: lo,
        max: hi,
        points: n as usize,
    })
}

fn model_name(path: &Path, used: &mut Vec<String>) -> String {
    let stem = path
        .file_stem()
        .map_or_else(|| "model".to_string(), |s| s.to_string_lossy().into_owned());
    let mut name = stem.clone();
    let mut k = 2;
    while used.contains(&name) {
        name = format!("{stem}_{k}");
        k += 1;
    }
    used.push(name.clone());
    name
}

fn cmd_validate(a: &ValidateArgs, tol: &Tolerances) -> Outcome {
    let grid = grid_spec(&a.grid)?;
    let controller = match &a.ppf {
        Some(v) if v.len() != 3 => return Err(Failure::usage(format!("--ppf needs K,zeta,omega, got {v:?}"))),
        Some(v) => {
            let c = PpfController {
                k: v[0],
                zeta: v[1],
                omega: v[2],
            };
            c.validate().map_err(Failure::usage)?;
            Some(c)
        }
        None => None,
    };
    let traj = load_traj(&a.traj)?;
    let mut used = Vec::new();
    let mut files = Vec::new();
    for path in &a.models {
        let f = ModelFile::load(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        files.push((model_name(path, &mut used), path, f));
    }
    let cands: Vec<_> = files.iter().map(|(name, _, f)| f.candidate(name.clone())).collect();
    let cfg = CompareConfig {
        grid,
        tol: *tol,
        controller,
    };
    let mut report = compare_models(&traj, &cands, &cfg);
    let config = config_json(
        "validate",
        a,
        json!({
            "trajectory": traj_provenance(&traj),
            "models": files.iter().map(|(name, path, f)| json!({
                "name": name,
                "file": path,
                "kind": f.kind,
                "config": f.config,
            })).collect::<Vec<_>>(),
        }),
    );
    report.provenance = config.clone();
    let config_line = serde_json::json!({ "command": "validate", "args": a }).to_string();

    std::fs::create_dir_all(&a.out_dir).map_err(|e| Failure::usage(format!("{}: {e}", a.out_dir.display())))?;
    let write = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> crate::Result<()>| -> std::result::Result<(), Failure> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| Failure::new(EXIT_VALIDATION, format!("{name}: {e}")))?;
        std::fs::write(a.out_dir.join(name), buf)
            .map_err(|e| Failure::new(EXIT_VALIDATION, format!("{name}: {e}")))
    };

    // models whose continuous image or frequency response is unavailable are
    // left out of the plot data; the report records why
    let omegas = grid.omegas();
    let mut continuous = Vec::new();
    let mut steps = Vec::new();
    let n_steps = a.step_steps.unwrap_or(traj.steps());
    for (cand, rep) in cands.iter().zip(report.models.iter_mut()) {
        let Ok(c) = to_continuous(&cand.model) else { continue };
        if crate::nicore::freq_response(&c, &omegas).is_ok() {
            continuous.push((cand.name.clone(), c.clone()));
        }
        let target = match &controller {
            Some(ctrl) => match positive_feedback(&c, &ppf_realize(ctrl)) {
                Ok(cl) => cl.model,
                Err(_) => continue,
            },
            None => c,
        };
        match step_response(&target, cand.model.dt, n_steps) {
            Ok(r) => {
                if let Some(k) = r.diverged_at {
                    rep.errors.push(format!("step response diverged at sample {k}"));
                }
                steps.push((cand.name.clone(), r));
            }
            Err(e) => rep.errors.push(format!("step response: {e}")),
        }
    }

    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    text.push('\n');
    write("report.json", &|buf| {
        buf.extend_from_slice(text.as_bytes());
        Ok(())
    })?;
    write("timeseries.csv", &|buf| {
        write_timeseries_csv(buf, &traj, &report.models, Some(&config_line))
    })?;
    write("bode.csv", &|buf| write_bode_csv(buf, &continuous, &omegas, Some(&config_line)))?;
    write("nyquist.csv", &|buf| write_nyquist_csv(buf, &continuous, &omegas, Some(&config_line)))?;
    write("step.csv", &|buf| write_step_csv(buf, &steps, Some(&config_line)))?;
    Ok(EXIT_OK)
}

fn cmd_linearize(a: &LinearizeArgs) -> Outcome {
    let params = check_plant(&a.plant)?;
    let x0 = x0_pair(&a.x0)?;
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return Err(Failure::usage("--T must be positive"));
    }
    let c = linearize_msd(&params, x0);
    let d = zoh_discretize(&c, a.dt)
        .map_err(Failure::usage)?
        .with_dict(LiftingDictionary::identity(2));
    let file = ModelFile::linearized(c, d).with_config(config_json("linearize", a, json!({})));
    file.save(&a.out).map_err(|e| Failure::usage(format!("{}: {e}", a.out.display())))?;
    Ok(EXIT_OK)
}
