//! Batch experiment runner: fits data-driven representations, analyzes
//! their poles and realizations, synthesizes output-feedback LQR
//! controllers, runs inversion and disturbance-observer experiments, and
//! reproduces the benchmark study tables as CSV files.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use ddcore::datagen::{self, build_blocks, DataBlocks, NoiseSpec, Trajectory};
use ddcore::ddrep::{self, Representation};
use ddcore::inversion::{self, DobConfig};
use ddcore::lqr::{self, LqrWeights};
use ddcore::lti::{self, StateSpace};
use ddcore::matpoly::{self, Matrix, Vector};
use ddcore::realization;
use ddcore::Error as CoreError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "ddctl", version, about = "data-driven representation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input trajectory CSV (t,u1..um,y1..yp); otherwise data is simulated.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Past-window length, or a sweep "A:B".
    #[arg(long = "N", global = true)]
    n: Option<String>,
    /// Estimation delay for inversion commands.
    #[arg(long = "L", global = true)]
    l: Option<usize>,
    /// Truncation tolerance ("auto" for the per-matrix default).
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Seed for the identification record.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (file or directory depending on the command).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the representation and write it as a text document.
    Repr,
    /// Poles of the fitted representation, one CSV row per pole.
    Poles,
    /// Recursive prediction against a fresh validation record.
    Predict,
    /// Build the stacked realization and report its structural tests.
    Realize,
    /// Synthesize the output-feedback LQR controller.
    Lqr,
    /// Closed-loop H2 norm over a window sweep.
    H2sweep,
    /// Fit the L-delay inverse.
    Invert,
    /// Run the disturbance-observer loop.
    Dob,
    /// Reproduce a named benchmark table.
    Demo {
        /// msd-poles | msd-predict | pendulum-pz | pendulum-lqr |
        /// pendulum-h2 | submarine-h2 | submarine-track | msd-dob
        name: String,
        /// Window sweep for the h2 demos.
        #[arg(long)]
        sweep: Option<String>,
    },
}

/// Validation failures exit with 2, numerical failures with 3.
enum RunError {
    Validation(String),
    Numerical(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotStabilizable { .. }
            | CoreError::NoConvergence(_)
            | CoreError::FactorizationFailed { .. }
            | CoreError::Unstable { .. }
            | CoreError::ReductionAmbiguous(_)
            | CoreError::AmbiguousMatch(_)
            | CoreError::Inconsistent { .. }
            | CoreError::EmptyRootSet => RunError::Numerical(e.to_string()),
            other => RunError::Validation(other.to_string()),
        }
    }
}

impl From<String> for RunError {
    fn from(s: String) -> Self {
        RunError::Validation(s)
    }
}

impl From<&str> for RunError {
    fn from(s: &str) -> Self {
        RunError::Validation(s.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

struct Session {
    cfg: ExperimentConfig,
    plant: StateSpace,
    out: PathBuf,
    manifest: Vec<String>,
}

impl Session {
    fn new(cli: &Cli) -> Result<Self, RunError> {
        let mut cfg = match &cli.config {
            Some(path) => ExperimentConfig::load(path).map_err(RunError::Validation)?,
            None => ExperimentConfig::default(),
        };
        cfg.merge_cli(cli.n.as_deref(), cli.l, cli.tol.as_deref(), cli.seed)?;
        let plant = cfg.plant()?;
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        Ok(Session {
            cfg,
            plant,
            out,
            manifest: Vec::new(),
        })
    }

    fn record(&mut self, key: &str, value: String) {
        self.manifest.push(format!("{key} = {value}"));
    }

    /// Identification record: either the supplied CSV or a seeded
    /// simulation of the configured plant.
    fn record_data(&mut self, cli: &Cli, extra: usize) -> Result<Trajectory, RunError> {
        if let Some(path) = &cli.data {
            self.record("data_file", format!("{:?}", path));
            return Ok(datagen::read_csv(path)?);
        }
        let len = self.cfg.data_len.unwrap_or(100) + extra;
        let amp = self.cfg.amplitude.unwrap_or(1.0);
        let seed = self.cfg.data_seed.unwrap_or(42);
        self.record("data_len", len.to_string());
        self.record("amplitude", format!("{amp}"));
        self.record("data_seed", seed.to_string());
        let mut traj =
            datagen::excite(&self.plant, &Vector::zeros(self.plant.order()), len, amp, seed)?;
        let sigma = self.cfg.noise_sigma.unwrap_or(0.0);
        if sigma > 0.0 {
            let nseed = self.cfg.noise_seed.unwrap_or(1);
            self.record("noise_sigma", format!("{sigma}"));
            self.record("noise_seed", nseed.to_string());
            traj = datagen::add_noise(&traj, &NoiseSpec { sigma, seed: nseed })?;
        }
        Ok(traj)
    }

    fn blocks(&mut self, cli: &Cli) -> Result<DataBlocks, RunError> {
        let n = self.cfg.n.ok_or("a window length is required (--N)")?;
        self.record("n_window", n.to_string());
        let traj = self.record_data(cli, 0)?;
        Ok(build_blocks(&traj, n)?)
    }

    fn fit_representation(&mut self, cli: &Cli) -> Result<Representation, RunError> {
        let method = self.cfg.method.clone().unwrap_or_else(|| "pinv".into());
        self.record("method", method.clone());
        let averaging = self.cfg.averaging.unwrap_or(1);
        match method.as_str() {
            "ginverse" => {
                let blocks = self.blocks(cli)?;
                let seed = self.cfg.noise_seed.unwrap_or(0);
                self.record("ginverse_seed", seed.to_string());
                Ok(ddrep::fit_with_ginverse(&blocks, seed)?)
            }
            "pinv" if averaging <= 1 => {
                let blocks = self.blocks(cli)?;
                Ok(ddrep::fit(&blocks, self.cfg.tol)?)
            }
            "pinv" => {
                // averaged fit across independently seeded records
                let n = self.cfg.n.ok_or("a window length is required (--N)")?;
                self.record("n_window", n.to_string());
                self.record("averaging", averaging.to_string());
                let base = self.cfg.data_seed.unwrap_or(42);
                let len = self.cfg.data_len.unwrap_or(100);
                let amp = self.cfg.amplitude.unwrap_or(1.0);
                let sigma = self.cfg.noise_sigma.unwrap_or(0.0);
                let mut sets = Vec::new();
                for k in 0..averaging as u64 {
                    let mut t = datagen::excite(
                        &self.plant,
                        &Vector::zeros(self.plant.order()),
                        len,
                        amp,
                        base + k,
                    )?;
                    if sigma > 0.0 {
                        t = datagen::add_noise(
                            &t,
                            &NoiseSpec {
                                sigma,
                                seed: self.cfg.noise_seed.unwrap_or(1) + k,
                            },
                        )?;
                    }
                    sets.push(build_blocks(&t, n)?);
                }
                let p = self.plant.n_outputs();
                let m = self.plant.n_inputs();
                let mut rows = Vec::new();
                for i in 0..p {
                    let row = datagen::average_predictor(&sets, self.cfg.tol, i)?;
                    rows.push(row_from_flat(&row, i, n, m));
                }
                Ok(Representation {
                    n_window: n,
                    n_inputs: m,
                    n_outputs: p,
                    rows,
                })
            }
            other => Err(RunError::Validation(format!("unknown method '{other}'"))),
        }
    }

    fn write_manifest(&self, target: &Path) -> Result<(), RunError> {
        let mut text = String::new();
        text.push_str(&format!("tool = ddctl {VERSION}\n"));
        for line in &self.manifest {
            text.push_str(line);
            text.push('\n');
        }
        let hash = config::fnv1a(&text);
        text.push_str(&format!("config_hash = {hash:016x}\n"));
        let path = manifest_path(target);
        std::fs::write(path, text).map_err(|e| RunError::Validation(e.to_string()))?;
        Ok(())
    }
}

fn manifest_path(target: &Path) -> PathBuf {
    let mut name = target.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.txt");
    target.with_file_name(name)
}

fn row_from_flat(row: &Matrix, output: usize, n: usize, m: usize) -> ddcore::ddrep::CoefficientRow {
    ddcore::ddrep::CoefficientRow {
        output,
        b: (0..=n)
            .map(|k| Vector::from_fn(m, |j, _| row[(0, k * m + j)]))
            .collect(),
        a: (0..n).map(|k| row[(0, m * (n + 1) + k)]).collect(),
        fit_residual: 0.0,
        rank_ok: true,
    }
}

fn ensure_parent(path: &Path) -> Result<(), RunError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| RunError::Validation(e.to_string()))?;
        }
    }
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), RunError> {
    ensure_parent(path)?;
    let mut f =
        std::fs::File::create(path).map_err(|e| RunError::Validation(e.to_string()))?;
    writeln!(f, "{header}").map_err(|e| RunError::Validation(e.to_string()))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{}", line.join(",")).map_err(|e| RunError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), RunError> {
    match &cli.command {
        Command::Repr => cmd_repr(&cli),
        Command::Poles => cmd_poles(&cli),
        Command::Predict => cmd_predict(&cli),
        Command::Realize => cmd_realize(&cli),
        Command::Lqr => cmd_lqr(&cli),
        Command::H2sweep => cmd_h2sweep(&cli),
        Command::Invert => cmd_invert(&cli),
        Command::Dob => cmd_dob(&cli),
        Command::Demo { name, sweep } => cmd_demo(&cli, name, sweep.as_deref()),
    }
}

fn cmd_repr(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let rep = s.fit_representation(cli)?;
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("representation.txt")
    };
    ensure_parent(&target)?;
    ddrep::write_text(&rep, &target)?;
    s.write_manifest(&target)?;
    println!(
        "representation: N={} m={} p={} -> {}",
        rep.n_window,
        rep.n_inputs,
        rep.n_outputs,
        target.display()
    );
    Ok(())
}

fn cmd_poles(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let rep = s.fit_representation(cli)?;
    let mut rows = Vec::new();
    for i in 0..rep.n_outputs {
        let ps = ddrep::poles(&rep, i)?;
        for c in ps.roots() {
            rows.push(vec![i as f64, c.re, c.im, c.norm()]);
        }
    }
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("poles.csv")
    };
    write_csv(&target, "output,re,im,modulus", &rows)?;
    s.write_manifest(&target)?;
    println!("{} poles -> {}", rows.len(), target.display());
    Ok(())
}

fn cmd_predict(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let rep = s.fit_representation(cli)?;
    let n = rep.n_window;
    let steps = s.cfg.steps.unwrap_or(200);
    s.record("steps", steps.to_string());
    // fresh validation record from an offset seed
    let vseed = s.cfg.data_seed.unwrap_or(42) + 1000;
    let val = datagen::excite(
        &s.plant,
        &Vector::zeros(s.plant.order()),
        steps + n,
        s.cfg.amplitude.unwrap_or(1.0),
        vseed,
    )?;
    let yhat = ddrep::predict_recursive(
        &rep,
        &val.u.columns(n, steps).into_owned(),
        &val.u.columns(0, n).into_owned(),
        &val.y.columns(0, n).into_owned(),
    )?;
    let p = rep.n_outputs;
    let mut rows = Vec::new();
    for t in 0..steps {
        let mut row = vec![t as f64];
        for i in 0..p {
            row.push(val.y[(i, n + t)]);
        }
        for i in 0..p {
            row.push(yhat[(i, t)]);
        }
        rows.push(row);
    }
    let mut header = String::from("t");
    for i in 1..=p {
        header.push_str(&format!(",y{i}"));
    }
    for i in 1..=p {
        header.push_str(&format!(",yhat{i}"));
    }
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("predict.csv")
    };
    write_csv(&target, &header, &rows)?;
    s.write_manifest(&target)?;
    println!("prediction over {steps} steps -> {}", target.display());
    Ok(())
}

fn cmd_realize(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let rep = s.fit_representation(cli)?;
    let r = realization::build(&rep);
    let detectable = realization::is_detectable(&r, realization::PBH_TOL)?;
    let (margin, modulus) = realization::stabilizability_margin(&r, realization::PBH_TOL)?;
    let stabilizable = margin > realization::PBH_TOL;
    let true_rows = lti::tf_rows(&s.plant)?;
    let report = realization::prop3_condition(&rep, &true_rows, realization::PBH_TOL)?;
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("realization.txt")
    };
    ensure_parent(&target)?;
    let mut text = String::new();
    text.push_str(&format!("state_dim = {}\n", r.state_dim()));
    text.push_str(&format!("detectable = {detectable}\n"));
    text.push_str(&format!("stabilizable_pbh = {stabilizable}\n"));
    text.push_str(&format!("pbh_margin = {margin:.6e}\n"));
    text.push_str(&format!("pbh_worst_modulus = {modulus:.6}\n"));
    text.push_str(&format!("stabilizable_rootset = {}\n", report.stabilizable));
    for w in &report.witnesses {
        text.push_str(&format!(
            "rootset_witness = lambda {:.6}+{:.6}i outputs {:?} sigma_rel {:.3e}\n",
            w.lambda.re, w.lambda.im, w.outputs, w.sigma_min_rel
        ));
    }
    std::fs::write(&target, &text).map_err(|e| RunError::Validation(e.to_string()))?;
    s.write_manifest(&target)?;
    print!("{text}");
    Ok(())
}

fn cmd_lqr(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let rep = s.fit_representation(cli)?;
    let r = realization::build(&rep);
    let w = LqrWeights::scalar(
        s.cfg.q.unwrap_or(100.0),
        s.cfg.r.unwrap_or(1.0),
        s.plant.n_outputs(),
        s.plant.n_inputs(),
    )?;
    s.record("q", format!("{}", s.cfg.q.unwrap_or(100.0)));
    s.record("r", format!("{}", s.cfg.r.unwrap_or(1.0)));
    let sol = lqr::solve_dare(&r, &w, 1e-13, 1_000_000)?;
    let ctrl = lqr::build_controller(&r, &sol.gain)?;
    let sr = matpoly::spectral_radius(&(&r.a - &r.b * &sol.gain))?;
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("controller.txt")
    };
    ensure_parent(&target)?;
    lqr::write_controller(&ctrl, &w, &target)?;
    s.write_manifest(&target)?;
    println!(
        "controller: gain radius {sr:.6}, riccati residual {:.2e}, {} iterations -> {}",
        sol.residual,
        sol.iterations,
        target.display()
    );
    Ok(())
}

fn h2_for_window(
    plant: &StateSpace,
    traj: &Trajectory,
    n: usize,
    w: &LqrWeights,
    tol: Option<f64>,
) -> Result<f64, RunError> {
    let rep = ddrep::fit(&build_blocks(traj, n)?, tol)?;
    let r = realization::build(&rep);
    let qbar = r.c.transpose() * &w.q * &r.c;
    let sol = lqr::solve_dare_unchecked(&r.a, &r.b, &qbar, &w.r, 1e-13, 300_000)?;
    let ctrl = lqr::build_controller(&r, &sol.gain)?;
    let cl = lqr::closed_loop(plant, &ctrl, w)?;
    Ok(lqr::h2_norm(&cl)?)
}

fn cmd_h2sweep(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let (a, b) = s.cfg.sweep_range()?;
    s.record("sweep", format!("{a}:{b}"));
    let w = LqrWeights::scalar(
        s.cfg.q.unwrap_or(100.0),
        s.cfg.r.unwrap_or(1.0),
        s.plant.n_outputs(),
        s.plant.n_inputs(),
    )?;
    let traj = s.record_data(cli, 0)?;
    let mut rows = Vec::new();
    for n in a..=b {
        match h2_for_window(&s.plant, &traj, n, &w, s.cfg.tol) {
            Ok(h2) => rows.push(vec![n as f64, h2.log10()]),
            Err(RunError::Numerical(msg)) | Err(RunError::Validation(msg)) => {
                eprintln!("note: N={n}: {msg}");
            }
        }
    }
    if rows.is_empty() {
        return Err(RunError::Numerical("no window in the sweep converged".into()));
    }
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("h2sweep.csv")
    };
    write_csv(&target, "n,log10_h2", &rows)?;
    s.write_manifest(&target)?;
    println!("{} sweep rows -> {}", rows.len(), target.display());
    Ok(())
}

fn cmd_invert(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let n = s.cfg.n.ok_or("a window length is required (--N)")?;
    let l = s.cfg.l.ok_or("a delay is required (--L)")?;
    s.record("n_window", n.to_string());
    s.record("l_delay", l.to_string());
    let traj = s.record_data(cli, l)?;
    let blocks = inversion::build_inversion_blocks(&traj, n, l)?;
    let ir = inversion::fit_inverse(&blocks, s.cfg.tol)?;
    let roots = ir.gamma_polynomial().roots()?;
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("inverse.txt")
    };
    ensure_parent(&target)?;
    let mut text = String::new();
    text.push_str(&format!("n = {n}\nl = {l}\n"));
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.16e}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    text.push_str(&format!("gamma = [{}]\n", fmt(&ir.gamma)));
    text.push_str(&format!("delta = [{}]\n", fmt(&ir.delta)));
    text.push_str(&format!("fit_residual = {:.3e}\n", ir.fit_residual));
    text.push_str(&format!("max_pole_modulus = {:.6}\n", roots.max_modulus()));
    std::fs::write(&target, &text).map_err(|e| RunError::Validation(e.to_string()))?;
    s.write_manifest(&target)?;
    println!(
        "inverse: max pole modulus {:.4} -> {}",
        roots.max_modulus(),
        target.display()
    );
    Ok(())
}

fn cmd_dob(cli: &Cli) -> Result<(), RunError> {
    let mut s = Session::new(cli)?;
    let n = s.cfg.n.ok_or("a window length is required (--N)")?;
    let l = s.cfg.l.ok_or("a delay is required (--L)")?;
    let steps = s.cfg.steps.unwrap_or(1500);
    s.record("n_window", n.to_string());
    s.record("l_delay", l.to_string());
    s.record("steps", steps.to_string());
    let traj = s.record_data(cli, l)?;
    let blocks = inversion::build_inversion_blocks(&traj, n, l)?;
    let ir = inversion::fit_inverse(&blocks, s.cfg.tol)?;
    let cfg = DobConfig {
        l_delay: l,
        init_estimates: vec![0.0; n],
        u_command: vec![1.0; steps],
        disturbance: (0..steps).map(|t| 0.5 * (0.02 * t as f64).sin()).collect(),
    };
    let run = inversion::dob_simulate(&s.plant, &ir, &cfg, steps)?;
    if run.unstable_inverse {
        eprintln!("warning: inverse has a pole on or outside the unit circle");
    }
    let mut rows = Vec::new();
    for t in 0..steps {
        rows.push(vec![
            t as f64,
            cfg.u_command[t],
            cfg.disturbance[t],
            run.u[t],
            run.y[t],
            run.d_hat[t],
            run.u_hat.get(t).copied().unwrap_or(0.0),
        ]);
    }
    let target = if s.out.extension().is_some() {
        s.out.clone()
    } else {
        s.out.join("dob.csv")
    };
    write_csv(&target, "t,u0,d,u,y,dhat,uhat", &rows)?;
    s.write_manifest(&target)?;
    println!("dob run over {steps} steps -> {}", target.display());
    Ok(())
}

/// Named benchmark tables; each writes one CSV under the output directory.
fn cmd_demo(cli: &Cli, name: &str, sweep: Option<&str>) -> Result<(), RunError> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| RunError::Validation(e.to_string()))?;
    let write = |file: &str, header: &str, rows: &[Vec<f64>]| -> Result<PathBuf, RunError> {
        let path = out.join(file);
        write_csv(&path, header, rows)?;
        let manifest = format!(
            "tool = ddctl {VERSION}\ndemo = {name}\nconfig_hash = {:016x}\n",
            config::fnv1a(&format!("{name}:{header}:{}", rows.len()))
        );
        std::fs::write(manifest_path(&path), manifest)
            .map_err(|e| RunError::Validation(e.to_string()))?;
        Ok(path)
    };

    match name {
        // six poles of the benchmark two-mass fit, two of them latent
        "msd-poles" => {
            let plant = discrete("msd")?;
            let traj = datagen::excite(&plant, &Vector::zeros(4), 100, 1.0, 42)?;
            let rep = ddrep::fit(&build_blocks(&traj, 6)?, None)?;
            let ps = ddrep::poles(&rep, 0)?;
            let rows: Vec<Vec<f64>> = ps
                .roots()
                .iter()
                .map(|c| vec![c.re, c.im, c.norm()])
                .collect();
            let path = write("msd-poles.csv", "re,im,modulus", &rows)?;
            println!("6 poles -> {}", path.display());
        }
        // true output, recursive prediction, and a generalized-inverse run
        "msd-predict" => {
            let plant = discrete("msd")?;
            let traj = datagen::excite(&plant, &Vector::zeros(4), 500, 2.0, 3)?;
            let blocks = build_blocks(&traj, 6)?;
            let rep = ddrep::fit(&blocks, None)?;
            let gseed = (0..50)
                .find(|&sd| {
                    ddrep::fit_with_ginverse(&blocks, sd)
                        .ok()
                        .and_then(|r| ddrep::poles(&r, 0).ok())
                        .map(|p| p.max_modulus() > 1.05)
                        .unwrap_or(false)
                })
                .unwrap_or(0);
            let grep = ddrep::fit_with_ginverse(&blocks, gseed)?;
            let steps = 100;
            let n = 6;
            let mut u = Matrix::zeros(1, steps + n);
            for t in 0..steps + n {
                u[(0, t)] = 2.0 * (0.05 * t as f64).sin();
            }
            let x0 = Vector::from_vec(vec![0.0, 0.1, 0.0, 0.0]);
            let y = lti::simulate(&plant, &x0, &u)?;
            let run = |r: &Representation| {
                ddrep::predict_recursive(
                    r,
                    &u.columns(n, steps).into_owned(),
                    &u.columns(0, n).into_owned(),
                    &y.columns(0, n).into_owned(),
                )
            };
            let yp = run(&rep)?;
            let yg = run(&grep)?;
            let rows: Vec<Vec<f64>> = (0..steps)
                .map(|t| {
                    vec![
                        0.05 * (n + t) as f64,
                        y[(0, n + t)],
                        yp[(0, t)],
                        yg[(0, t)],
                    ]
                })
                .collect();
            let path = write("msd-predict.csv", "time,y,yhat_pinv,yhat_ginv", &rows)?;
            println!(
                "prediction table (generalized-inverse seed {gseed}) -> {}",
                path.display()
            );
        }
        // fitted poles of clean and noisy averaged fits per window
        "pendulum-pz" => {
            let plant = discrete("pendulum")?;
            let mut rows = Vec::new();
            let mut seed = 400u64;
            for n in [6usize, 8, 12] {
                for noisy in [0.0f64, 0.01] {
                    let mut sets = Vec::new();
                    for _ in 0..10 {
                        seed += 1;
                        let mut t = datagen::excite(&plant, &Vector::zeros(4), 50, 2.0, seed)?;
                        if noisy > 0.0 {
                            t = datagen::add_noise(&t, &NoiseSpec { sigma: noisy, seed })?;
                        }
                        sets.push(build_blocks(&t, n)?);
                    }
                    let row = datagen::average_predictor(&sets, None, 0)?;
                    let rep = Representation {
                        n_window: n,
                        n_inputs: 1,
                        n_outputs: 1,
                        rows: vec![row_from_flat(&row, 0, n, 1)],
                    };
                    for c in ddrep::poles(&rep, 0)?.roots() {
                        rows.push(vec![n as f64, noisy, c.re, c.im, c.norm()]);
                    }
                }
            }
            let path = write("pendulum-pz.csv", "n,noise_sigma,re,im,modulus", &rows)?;
            println!("pole table -> {}", path.display());
        }
        // closed-loop output under online measurement noise
        "pendulum-lqr" => {
            let plant = discrete("pendulum")?;
            let w = LqrWeights::scalar(100.0, 1.0, 1, 1)?;
            let mut rows: Vec<Vec<f64>> = (0..400).map(|t| vec![0.05 * t as f64]).collect();
            for n in [6usize, 10, 16] {
                let cols = n + 15;
                let traj = datagen::excite(&plant, &Vector::zeros(4), cols + n, 2.0, 9)?;
                let rep = ddrep::fit(&build_blocks(&traj, n)?, None)?;
                let r = realization::build(&rep);
                let sol = lqr::solve_dare(&r, &w, 1e-13, 1_000_000)?;
                let ctrl = lqr::build_controller(&r, &sol.gain)?;
                let chi0 = realization::build_chi(
                    &Matrix::zeros(1, n),
                    &Matrix::from_element(1, n, 1.0),
                )?;
                let run = lqr::simulate_closed_loop(
                    &plant,
                    &ctrl,
                    &Vector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
                    &chi0.0,
                    Some(&NoiseSpec { sigma: 1e-3, seed: 7 }),
                    &Vector::zeros(1),
                    400,
                )?;
                for (t, row) in rows.iter_mut().enumerate() {
                    row.push(run.y[(0, t)]);
                }
            }
            let path = write("pendulum-lqr.csv", "time,y_n6,y_n10,y_n16", &rows)?;
            println!("closed-loop table -> {}", path.display());
        }
        "pendulum-h2" | "submarine-h2" => {
            let plant_name = name.strip_suffix("-h2").unwrap();
            let plant = discrete(plant_name)?;
            let (a, b) = match sweep {
                Some(s) => {
                    let (a, b) = s
                        .split_once(':')
                        .ok_or_else(|| RunError::Validation("sweep must be A:B".into()))?;
                    (
                        a.parse().map_err(|e| RunError::Validation(format!("{e}")))?,
                        b.parse().map_err(|e| RunError::Validation(format!("{e}")))?,
                    )
                }
                None => (4usize, 16usize),
            };
            let w = LqrWeights::scalar(100.0, 1.0, plant.n_outputs(), plant.n_inputs())?;
            let len = if plant_name == "pendulum" { 50 } else { 100 };
            let amp = if plant_name == "pendulum" { 2.0 } else { 1.0 };
            let traj = datagen::excite(&plant, &Vector::zeros(4), len, amp, 13)?;
            let mut rows = Vec::new();
            for n in a..=b {
                match h2_for_window(&plant, &traj, n, &w, None) {
                    Ok(h2) => rows.push(vec![n as f64, h2.log10()]),
                    Err(RunError::Numerical(m)) | Err(RunError::Validation(m)) => {
                        eprintln!("note: N={n}: {m}")
                    }
                }
            }
            let path = write(&format!("{name}.csv"), "n,log10_h2", &rows)?;
            println!("{} sweep rows -> {}", rows.len(), path.display());
        }
        // reference tracking from a wrong initial controller window
        "submarine-track" => {
            let plant = discrete("submarine")?;
            let w = LqrWeights::scalar(100.0, 1.0, 2, 2)?;
            let traj = datagen::excite(&plant, &Vector::zeros(4), 100, 1.0, 13)?;
            let steps = 1200;
            let mut rows: Vec<Vec<f64>> = (0..steps).map(|t| vec![0.05 * t as f64]).collect();
            for n in [4usize, 8, 16] {
                let rep = ddrep::fit(&build_blocks(&traj, n)?, None)?;
                let r = realization::build(&rep);
                let qbar = r.c.transpose() * &w.q * &r.c;
                let sol =
                    match lqr::solve_dare_unchecked(&r.a, &r.b, &qbar, &w.r, 1e-13, 300_000) {
                        Ok(s) => s,
                        Err(e) => {
                            eprintln!("note: N={n}: {e}");
                            for row in rows.iter_mut() {
                                row.push(f64::NAN);
                                row.push(f64::NAN);
                            }
                            continue;
                        }
                    };
                let ctrl = lqr::build_controller(&r, &sol.gain)?;
                // wrong start: first-output window at 5, everything else zero
                let mut chi0 = Vector::zeros(r.state_dim());
                for k in 0..n {
                    chi0[k] = 5.0;
                    chi0[n * 3 + k] = 5.0;
                }
                let run = lqr::simulate_closed_loop(
                    &plant,
                    &ctrl,
                    &Vector::from_vec(vec![0.0, 0.0, 15.0, 0.0]),
                    &chi0,
                    None,
                    &Vector::from_vec(vec![10.0, 0.0]),
                    steps,
                )?;
                for (t, row) in rows.iter_mut().enumerate() {
                    row.push(run.y[(0, t)]);
                    row.push(run.y[(1, t)]);
                }
            }
            let path = write(
                "submarine-track.csv",
                "time,y1_n4,y2_n4,y1_n8,y2_n8,y1_n16,y2_n16",
                &rows,
            )?;
            println!("tracking table -> {}", path.display());
        }
        // disturbance-observer loop on the two-mass plant
        "msd-dob" => {
            let plant = discrete("msd")?;
            let traj = inversion::inversion_experiment(&plant, 100, 2, 1.0, 51)?;
            let blocks = inversion::build_inversion_blocks(&traj, 6, 2)?;
            let ir = inversion::fit_inverse(&blocks, None)?;
            let steps = 1500;
            let cfg = DobConfig {
                l_delay: 2,
                init_estimates: vec![0.0; 6],
                u_command: vec![1.0; steps],
                disturbance: (0..steps).map(|t| 0.5 * (0.02 * t as f64).sin()).collect(),
            };
            let run = inversion::dob_simulate(&plant, &ir, &cfg, steps)?;
            let rows: Vec<Vec<f64>> = (0..steps)
                .map(|t| {
                    vec![
                        t as f64,
                        cfg.u_command[t],
                        cfg.disturbance[t],
                        run.u[t],
                        run.y[t],
                        run.d_hat[t],
                        run.u_hat.get(t).copied().unwrap_or(0.0),
                    ]
                })
                .collect();
            let path = write("msd-dob.csv", "t,u0,d,u,y,dhat,uhat", &rows)?;
            println!("dob table -> {}", path.display());
        }
        other => {
            return Err(RunError::Validation(format!(
                "unknown demo '{other}' (try msd-poles, msd-predict, pendulum-pz, \
                 pendulum-lqr, pendulum-h2, submarine-h2, submarine-track, msd-dob)"
            )))
        }
    }
    Ok(())
}

fn discrete(name: &str) -> Result<StateSpace, RunError> {
    let cont = match name {
        "msd" => lti::msd().0,
        "pendulum" => lti::inverted_pendulum().0,
        "submarine" => lti::submarine().0,
        other => return Err(RunError::Validation(format!("unknown plant '{other}'"))),
    };
    Ok(lti::zoh_plant(&cont, lti::BENCH_TS)?)
}
