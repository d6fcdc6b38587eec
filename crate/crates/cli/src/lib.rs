//! Command-line front end: simulate the fundamental scenarios, calibrate on
//! trajectory data, evaluate models and draw plots.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use sgsfm::calibration::{
    fitness, ga_calibrate, group_calibrate, synthetic_dataset, CalibrationMode, CalibrationReport, GaConfig,
    SyntheticConfig, ThetaVector,
};
use sgsfm::data::{self, AgentKind, DataSample, TrajectoryRecord};
use sgsfm::evaluation::{evaluate_model, render_table, threshold_curve, Evaluation, Model, SfmParams};
use sgsfm::plot;
use sgsfm::simulator::{
    build_fundamental_scenarios, fundamental_scenario, run_process, ScenarioConfig, SimulationResult,
};
use sgsfm::ParameterSet;

/// Environment variable naming the parameter file used when `--params` is absent.
pub const PARAMS_ENV: &str = "SGSFM_PARAMS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub outputs: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "sgsfm",
    version,
    about = "Sub-goal social force pedestrian simulation and calibration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a fundamental scenario or a scenario file.
    Simulate(SimulateArgs),
    /// List or export the fundamental scenarios.
    Scenarios(ScenariosArgs),
    /// Calibrate the model on trajectory data.
    Calibrate(CalibrateArgs),
    /// Score a model on trajectory data.
    Evaluate(EvaluateArgs),
    /// Draw a trajectory file as SVG.
    Plot(PlotArgs),
    /// Generate model-made samples for calibration checks.
    Synthesize(SynthesizeArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// fund-01 .. fund-12, or a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Pedestrians per flow for fundamental scenarios.
    #[arg(long, default_value_t = 5)]
    n_ped: usize,
    /// Vehicle cruise speed for fundamental scenarios, m/s.
    #[arg(long, default_value_t = 2.0)]
    cruise: f64,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScenariosArgs {
    #[arg(long)]
    list: bool,
    /// Write every scenario as JSON into this directory.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    n_ped: usize,
    #[arg(long, default_value_t = 2.0)]
    cruise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Universal,
    Group,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Directory of canonical CSV files, one CSV file, or a samples JSON file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Universal)]
    mode: Mode,
    #[arg(long, default_value_t = 3)]
    groups: usize,
    #[arg(long, default_value_t = 0)]
    ga_seed: u64,
    #[arg(long, default_value_t = 50)]
    population: usize,
    #[arg(long, default_value_t = 50)]
    generations: usize,
    /// Generations of the per-sample runs that produce group features.
    #[arg(long, default_value_t = 8)]
    feature_generations: usize,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Cv,
    Sfm,
    Sgsfm,
    Groups,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Group-mode calibration report, for `--model groups`.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k0: usize,
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Canonical trajectory CSV.
    #[arg(long)]
    traj: PathBuf,
    /// Scenario to draw; the first one by default.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthesizeArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parameters the samples are generated with.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (program name first) and runs the command.
pub fn dispatch<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let exit_code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return CommandOutcome {
                exit_code,
                outputs: vec![],
                summary: e.render().to_string(),
            };
        }
    };
    match run(cli.command) {
        Ok((outputs, summary)) => CommandOutcome {
            exit_code: EXIT_OK,
            outputs,
            summary,
        },
        Err(e) => CommandOutcome {
            exit_code: e.exit_code(),
            outputs: vec![],
            summary: format!("error: {e}"),
        },
    }
}

fn run(cmd: Command) -> Result<(Vec<PathBuf>, String)> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Scenarios(a) => scenarios(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Plot(a) => plot_cmd(a),
        Command::Synthesize(a) => synthesize(a),
    }
}

fn load_params(path: Option<&Path>) -> Result<ParameterSet> {
    let from_env = std::env::var_os(PARAMS_ENV).map(PathBuf::from);
    match path.map(Path::to_path_buf).or(from_env) {
        Some(p) => {
            if !p.exists() {
                return Err(CliError::Data(format!("parameter file not found: {}", p.display())));
            }
            ParameterSet::load(&p).map_err(|e| CliError::Data(e.to_string()))
        }
        None => Ok(ParameterSet::default()),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Data(format!("input not found: {}", path.display())))
    }
}

fn scenario_by_name(name: &str, n_ped: usize, cruise: f64, seed: u64) -> Result<ScenarioConfig> {
    if let Some(idx) = name.strip_prefix("fund-").and_then(|s| s.parse::<usize>().ok()) {
        if (1..=12).contains(&idx) {
            if n_ped == 0 {
                return Err(CliError::Usage("--n-ped must be at least 1".into()));
            }
            return Ok(fundamental_scenario(idx - 1, n_ped, cruise, seed));
        }
        return Err(CliError::Usage(format!(
            "unknown fundamental scenario {name}; use fund-01 to fund-12"
        )));
    }
    let path = Path::new(name);
    require(path)?;
    ScenarioConfig::load(path).map_err(|e| CliError::Data(e.to_string()))
}

/// Canonical records of every agent at every recorded step.
pub fn simulation_records(config: &ScenarioConfig, result: &SimulationResult) -> Vec<TrajectoryRecord> {
    let mut out = Vec::new();
    for (k, t) in result.times.iter().enumerate() {
        for (spec, traj) in config.pedestrians.iter().zip(&result.pedestrians) {
            let p = traj[k].position;
            out.push(TrajectoryRecord {
                scenario_id: config.name.clone(),
                time_s: *t,
                agent_id: spec.id.clone(),
                kind: AgentKind::Pedestrian,
                x_m: p.x,
                y_m: p.y,
                heading_rad: None,
                length_m: None,
                width_m: None,
            });
        }
        for (spec, traj) in config.vehicles.iter().zip(&result.vehicles) {
            let v = traj[k];
            out.push(TrajectoryRecord {
                scenario_id: config.name.clone(),
                time_s: *t,
                agent_id: spec.id.clone(),
                kind: AgentKind::Vehicle,
                x_m: v.position.x,
                y_m: v.position.y,
                heading_rad: Some(v.heading),
                length_m: Some(v.center_to_front + v.center_to_rear),
                width_m: Some(2.0 * v.half_width),
            });
        }
    }
    out
}

fn simulate(a: SimulateArgs) -> Result<(Vec<PathBuf>, String)> {
    let params = load_params(a.params.as_deref())?;
    let mut config = scenario_by_name(&a.scenario, a.n_ped, a.cruise, a.seed)?;
    if !a.scenario.starts_with("fund-") {
        config.seed = a.seed;
    }
    let result = run_process(&config, &params).map_err(|e| match e {
        sgsfm::simulator::SimulationError::NonFinite { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Data(other.to_string()),
    })?;
    let csv_path = a.out.join(format!("{}.csv", config.name));
    let svg_path = a.out.join(format!("{}.svg", config.name));
    let mut buf = Vec::new();
    data::write_records(&mut buf, &simulation_records(&config, &result)).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&csv_path, &buf)?;
    write_file(
        &svg_path,
        plot::render(&plot::simulation_figure(&config, &result, 4)).as_bytes(),
    )?;
    let collided = result.collisions.iter().filter(|c| **c).count();
    let arrived = result.arrivals.iter().filter(|a| a.is_some()).count();
    let summary = format!(
        "{}: {} pedestrians, {} arrived, {} collided, {} steps",
        config.name,
        config.pedestrians.len(),
        arrived,
        collided,
        result.times.len() - 1
    );
    Ok((vec![csv_path, svg_path], summary))
}

fn scenarios(a: ScenariosArgs) -> Result<(Vec<PathBuf>, String)> {
    if !a.list && a.export.is_none() {
        return Err(CliError::Usage("scenarios needs --list or --export <dir>".into()));
    }
    if a.n_ped == 0 {
        return Err(CliError::Usage("--n-ped must be at least 1".into()));
    }
    let all = build_fundamental_scenarios(a.n_ped, a.cruise);
    let mut outputs = Vec::new();
    if let Some(dir) = &a.export {
        for s in &all {
            let p = dir.join(format!("{}.json", s.name));
            write_file(&p, s.to_json_string().as_bytes())?;
            outputs.push(p);
        }
    }
    let summary = if a.list {
        all.iter()
            .map(|s| format!("{}  {}", s.name, s.description))
            .collect::<Vec<_>>()
            .join("\n")
    } else {
        format!("exported {} scenarios", all.len())
    };
    Ok((outputs, summary))
}

/// SHA-256 over the named files, each prefixed by its file name.
pub fn dataset_digest(files: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for f in files {
        let bytes = fs::read(f).map_err(|e| CliError::Data(format!("{}: {e}", f.display())))?;
        h.update(
            f.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
                .as_bytes(),
        );
        h.update([0u8]);
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

fn is_json(path: &Path) -> bool {
    path.is_file() && path.extension().is_some_and(|e| e == "json")
}

/// Samples and the files they came from.
fn load_data(path: &Path, dt: f64) -> Result<(Vec<DataSample>, Vec<PathBuf>)> {
    require(path)?;
    if is_json(path) {
        let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let samples: Vec<DataSample> =
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for s in &samples {
            s.validate().map_err(CliError::Data)?;
        }
        return Ok((samples, vec![path.to_path_buf()]));
    }
    let files = data::dataset_files(path).map_err(|e| CliError::Data(e.to_string()))?;
    let samples = data::load_samples(path, dt).map_err(|e| CliError::Data(e.to_string()))?;
    Ok((samples, files))
}

fn stem_with(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}{suffix}"))
}

fn params_with(base: &ParameterSet, theta: &ThetaVector) -> ParameterSet {
    ParameterSet {
        model: theta.apply(&base.model),
        body: base.body,
    }
}

fn calibrate(a: CalibrateArgs) -> Result<(Vec<PathBuf>, String)> {
    let base = load_params(a.params.as_deref())?;
    let (samples, files) = load_data(&a.data, a.dt)?;
    if samples.is_empty() {
        return Err(CliError::Data(format!("no usable samples in {}", a.data.display())));
    }
    log::info!("calibrating on {} samples from {} files", samples.len(), files.len());
    let ga = GaConfig {
        population: a.population,
        generations: a.generations,
        seed: a.ga_seed,
        elites: GaConfig::default().elites.min(a.population),
        ..GaConfig::default()
    };
    let feature_ga = GaConfig {
        population: 16.min(a.population),
        elites: 2.min(a.population),
        generations: a.feature_generations,
        ..ga.clone()
    };
    let seed_theta = ThetaVector::from_params(&base.model);
    let calib_err = |e: sgsfm::calibration::CalibrationError| CliError::Usage(e.to_string());
    let digest = dataset_digest(&files)?;
    let mut outputs = vec![a.out.clone()];
    let (report, summary) = match a.mode {
        Mode::Universal => {
            let r = ga_calibrate(&samples, &base, &ga, &seed_theta).map_err(calib_err)?;
            if !r.best_fitness.is_finite() {
                return Err(CliError::Numerical("calibration produced a non-finite fitness".into()));
            }
            let params_path = stem_with(&a.out, ".params.json");
            write_file(&params_path, params_with(&base, &r.best).to_json_string().as_bytes())?;
            outputs.push(params_path);
            let summary = format!(
                "universal calibration on {} samples: fitness {:.4} m",
                samples.len(),
                r.best_fitness
            );
            let report = CalibrationReport {
                mode: CalibrationMode::Universal,
                dataset: a.data.display().to_string(),
                dataset_digest: digest,
                sample_count: samples.len(),
                dt: a.dt,
                ga: ga.clone(),
                feature_ga: None,
                seed_theta,
                fitness: r.best_fitness,
                universal: Some(r),
                groups: None,
            };
            (report, summary)
        }
        Mode::Group => {
            let g = group_calibrate(&samples, &base, &ga, &feature_ga, &seed_theta, a.groups).map_err(calib_err)?;
            let f = g.fitness(&samples, &base);
            if !f.is_finite() {
                return Err(CliError::Numerical("calibration produced a non-finite fitness".into()));
            }
            for (i, grp) in g.groups.iter().enumerate() {
                let p = stem_with(&a.out, &format!(".group-{i}.params.json"));
                write_file(&p, params_with(&base, &grp.theta).to_json_string().as_bytes())?;
                outputs.push(p);
            }
            let sizes: Vec<String> = g.groups.iter().map(|x| x.members.len().to_string()).collect();
            let summary = format!(
                "group calibration on {} samples, group sizes {}: fitness {:.4} m",
                samples.len(),
                sizes.join("/"),
                f
            );
            let report = CalibrationReport {
                mode: CalibrationMode::Group,
                dataset: a.data.display().to_string(),
                dataset_digest: digest,
                sample_count: samples.len(),
                dt: a.dt,
                ga: ga.clone(),
                feature_ga: Some(feature_ga),
                seed_theta,
                universal: None,
                groups: Some(g),
                fitness: f,
            };
            (report, summary)
        }
    };
    write_file(&a.out, report.to_json_string().as_bytes())?;
    Ok((outputs, summary))
}

#[derive(serde::Serialize)]
struct EvaluationReport<'a> {
    dataset: String,
    dataset_digest: String,
    evaluation: &'a Evaluation,
    thresholds: Vec<f64>,
    correctly_simulated: Vec<f64>,
}

fn evaluate(a: EvaluateArgs) -> Result<(Vec<PathBuf>, String)> {
    let base = load_params(a.params.as_deref())?;
    let (samples, files) = load_data(&a.data, a.dt)?;
    if samples.is_empty() {
        return Err(CliError::Data(format!("no usable samples in {}", a.data.display())));
    }
    let model = match a.model {
        ModelKind::Cv => Model::ConstantVelocity,
        ModelKind::Sfm => Model::SocialForce {
            params: SfmParams::default(),
        },
        ModelKind::Sgsfm => Model::SubGoal {
            theta: ThetaVector::from_params(&base.model),
        },
        ModelKind::Groups => {
            let path = a
                .report
                .as_deref()
                .ok_or_else(|| CliError::Usage("--model groups needs --report <calibration report>".into()))?;
            require(path)?;
            let report = CalibrationReport::load(path).map_err(CliError::Data)?;
            let groups = report
                .groups
                .ok_or_else(|| CliError::Data(format!("{} is not a group calibration report", path.display())))?;
            if groups.assignments.len() != samples.len() {
                return Err(CliError::Data(format!(
                    "report assigns {} samples but the data has {}",
                    groups.assignments.len(),
                    samples.len()
                )));
            }
            Model::Groups { model: groups }
        }
    };
    let eval = evaluate_model(&model, &samples, &base, a.k0).map_err(|e| CliError::Data(e.to_string()))?;
    let s = eval.scores;
    if !(s.aade.is_finite() && s.afde.is_finite()) {
        return Err(CliError::Numerical("non-finite scores".into()));
    }
    let thresholds: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
    let curve = threshold_curve(&eval.aade_values(), &thresholds);
    let report = EvaluationReport {
        dataset: a.data.display().to_string(),
        dataset_digest: dataset_digest(&files)?,
        evaluation: &eval,
        thresholds: thresholds.clone(),
        correctly_simulated: curve.clone(),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&a.out, json.as_bytes())?;
    let svg = stem_with(&a.out, ".threshold.svg");
    write_file(
        &svg,
        plot::threshold_chart(&eval.model, &thresholds, &[(eval.model.clone(), curve)]).as_bytes(),
    )?;
    let name = a
        .data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let table = render_table(&[name], &[(eval.model.clone(), vec![s])]);
    Ok((
        vec![a.out, svg],
        format!("{} samples\n{}", samples.len(), table.trim_end()),
    ))
}

fn plot_cmd(a: PlotArgs) -> Result<(Vec<PathBuf>, String)> {
    require(&a.traj)?;
    let scenarios = data::load_dataset(&a.traj, a.dt).map_err(|e| CliError::Data(e.to_string()))?;
    let sc = match &a.scenario {
        Some(id) => scenarios
            .iter()
            .find(|s| &s.id == id)
            .ok_or_else(|| CliError::Data(format!("scenario {id} not in {}", a.traj.display())))?,
        None => scenarios
            .first()
            .ok_or_else(|| CliError::Data(format!("{} holds no trajectories", a.traj.display())))?,
    };
    let mut fig = plot::Figure {
        title: sc.id.clone(),
        ..Default::default()
    };
    let mut peds = 0;
    for (i, agent) in sc.agents.iter().enumerate() {
        match agent.kind {
            AgentKind::Pedestrian => {
                peds += 1;
                fig.tracks.push(plot::Track {
                    label: agent.id.clone(),
                    group: i,
                    points: agent.positions.clone(),
                });
            }
            AgentKind::Vehicle => {
                let dims = agent.dims.expect("vehicle tracks carry dimensions");
                for (p, h) in agent.positions.iter().zip(&agent.headings).step_by(4) {
                    let v = sgsfm::VehicleState {
                        position: *p,
                        heading: *h,
                        speed: 0.0,
                        center_to_front: dims.length / 2.0,
                        center_to_rear: dims.length / 2.0,
                        half_width: dims.width / 2.0,
                    };
                    fig.polygons.push(v.body_corners().to_vec());
                }
            }
        }
    }
    write_file(&a.out, plot::render(&fig).as_bytes())?;
    Ok((vec![a.out], format!("{}: {} pedestrian tracks drawn", sc.id, peds)))
}

fn synthesize(a: SynthesizeArgs) -> Result<(Vec<PathBuf>, String)> {
    let params = load_params(a.params.as_deref())?;
    let truth = ThetaVector::from_params(&params.model);
    let cfg = SyntheticConfig {
        count: a.count,
        seed: a.seed,
        ..SyntheticConfig::default()
    };
    let samples = synthetic_dataset(&truth, &params, &cfg);
    if samples.is_empty() {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let json = serde_json::to_string(&samples).expect("samples serialize");
    write_file(&a.out, json.as_bytes())?;
    let f = fitness(&truth, &samples, &params);
    Ok((
        vec![a.out],
        format!("{} samples written; self-fitness {:.2e} m", samples.len(), f),
    ))
}
