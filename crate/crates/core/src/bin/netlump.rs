use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use netlump::config::{CouplingSpec, ScenarioConfig, ScenarioKind};
use netlump::grid::{norm_l1, project_average};
use netlump::report::{components_csv, emit_grid, emit_report, emit_text, fmt_f64};
use netlump::scenario::{
    run_check, run_diffusion, run_expand, run_mckendrick, run_sweep_scenario, run_transport, TransportSolver,
};
use netlump::tolerance::apply_env_override;
use netlump::NetlumpError;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_BAND: u8 = 4;

#[derive(Parser)]
#[command(name = "netlump", version, about = "Network diffusion/transport with fast boundary exchange and its lumped limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the diffusion system and print the edge averages.
    Diffuse(Common),
    /// Solve the transport system at the final time.
    Transport {
        #[command(flatten)]
        common: Common,
        /// Use the first-order upwind scheme instead of the exact characteristics.
        #[arg(long)]
        upwind: bool,
    },
    /// Solve the patch-structured population model.
    Mckendrick(Common),
    /// Sweep ε, fit the convergence order and check it against the band.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Structural checks of a coupling: positivity, Markov, Kolmogorov, stochasticity.
    Check {
        /// File with the coupling (a `[coupling]`-style table or a full scenario).
        #[arg(long)]
        coupling: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Emit the components v̄, w̄1 and w̃0 of the asymptotic expansion at time --t.
    Expand(Common),
}

#[derive(Copy, Clone, ValueEnum)]
enum Kind {
    Diffusion,
    Transport,
    Mckendrick,
}

impl From<Kind> for ScenarioKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Diffusion => ScenarioKind::Diffusion,
            Kind::Transport => ScenarioKind::Transport,
            Kind::Mckendrick => ScenarioKind::Mckendrick,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Built-in demos are used when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// ε, or a comma-separated ladder for sweeps.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eps: Vec<f64>,
    /// Final time.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Number of Fourier terms in the diffusion layer.
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file (CSV; sweeps also write a JSON sidecar).
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Acceptance band for the fitted order, `lo,hi`.
    #[arg(long, value_parser = parse_band)]
    band: Option<(f64, f64)>,
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("band lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("band upper bound: {e}"))?;
    Ok((lo, hi))
}

enum Failure {
    Error(NetlumpError),
    Band,
}

impl From<NetlumpError> for Failure {
    fn from(e: NetlumpError) -> Self {
        Failure::Error(e)
    }
}

type CliResult = Result<(), Failure>;

fn load(path: &Option<PathBuf>, kind: ScenarioKind) -> Result<ScenarioConfig, NetlumpError> {
    match path {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::builtin(kind)),
    }
}

impl Common {
    fn config(&self, kind: ScenarioKind) -> Result<ScenarioConfig, NetlumpError> {
        let mut cfg = load(&self.scenario, kind)?;
        if cfg.kind != kind {
            return Err(NetlumpError::invalid(
                "kind",
                format!("scenario is {:?}, command needs {kind:?}", cfg.kind),
            ));
        }
        match self.eps.len() {
            0 => {}
            1 => {
                cfg.eps = Some(self.eps[0]);
                cfg.eps_list = None;
            }
            _ => {
                cfg.eps = Some(self.eps[0]);
                cfg.eps_list = Some(self.eps.clone());
            }
        }
        if let Some(t) = self.t {
            cfg.t_final = Some(t);
            cfg.output_times.retain(|&s| s <= t);
        }
        let d = &mut cfg.discretization;
        d.cells = self.cells.or(d.cells);
        d.dt = self.dt.or(d.dt);
        d.terms = self.terms.or(d.terms);
        d.jobs = self.jobs.or(d.jobs);
        if self.band.is_some() {
            cfg.sweep.band = self.band;
        }
        Ok(cfg)
    }
}

fn announce(path: &Path) {
    eprintln!("wrote {}", path.display());
}

fn diffuse(c: &Common) -> CliResult {
    let cfg = c.config(ScenarioKind::Diffusion)?;
    let traj = run_diffusion(&cfg)?;
    println!("t,{}", (0..traj.states[0].m()).map(|j| format!("mean_{j}")).collect::<Vec<_>>().join(","));
    for (t, u) in traj.times.iter().zip(&traj.states) {
        let v = project_average(u)?;
        let cols: Vec<String> = v.as_slice().iter().map(|x| fmt_f64(*x)).collect();
        println!("{},{}", fmt_f64(*t), cols.join(","));
    }
    if let (Some(path), Some(u)) = (&c.emit, traj.last()) {
        emit_grid(u, path)?;
        announce(path);
    }
    Ok(())
}

fn transport(c: &Common, upwind: bool) -> CliResult {
    let cfg = c.config(ScenarioKind::Transport)?;
    let solver = if upwind { TransportSolver::Upwind } else { TransportSolver::Exact };
    let u = run_transport(&cfg, solver)?;
    let v = project_average(&u)?;
    println!("t = {}, eps = {}", cfg.t_final(), cfg.eps());
    println!("edge averages: {:?}", v.as_slice());
    println!("total mass: {}", v.total());
    if let Some(path) = &c.emit {
        emit_grid(&u, path)?;
        announce(path);
    }
    Ok(())
}

fn mckendrick(c: &Common) -> CliResult {
    let cfg = c.config(ScenarioKind::Mckendrick)?;
    let traj = run_mckendrick(&cfg)?;
    println!("t,total_population");
    for k in 0..traj.times.len() {
        println!("{},{}", fmt_f64(traj.times[k]), fmt_f64(traj.total_population(k)));
    }
    println!("# mass carried past a_max: {}", traj.truncated_mass);
    if let (Some(path), Some(last)) = (&c.emit, traj.densities.last()) {
        let mut text = String::from("patch,age,value\n");
        for (j, row) in last.rows().enumerate() {
            for (i, v) in row.iter().enumerate() {
                text.push_str(&format!("{j},{},{}\n", fmt_f64(last.x(i) * traj.a_max), fmt_f64(*v)));
            }
        }
        emit_text(&text, path)?;
        announce(path);
    }
    Ok(())
}

fn sweep(c: &Common, kind: Option<Kind>) -> CliResult {
    let kind = match (kind, &c.scenario) {
        (Some(k), _) => ScenarioKind::from(k),
        (None, Some(p)) => ScenarioConfig::load(p)?.kind,
        (None, None) => {
            return Err(NetlumpError::invalid("kind", "give --kind or --scenario").into());
        }
    };
    let cfg = c.config(kind)?;
    let report = run_sweep_scenario(&cfg)?;
    println!("eps,error_l1,error_sup");
    for k in 0..report.eps_list.len() {
        println!(
            "{},{},{}",
            fmt_f64(report.eps_list[k]),
            fmt_f64(report.errors[k]),
            fmt_f64(report.errors_sup[k])
        );
    }
    match report.fitted_order {
        Some(p) => println!("fitted order: {p:.4} (band [{}, {}])", report.band.0, report.band.1),
        None => println!("fitted order: none ({})", report.degenerate.as_deref().unwrap_or("degenerate")),
    }
    println!("pass: {}", report.pass);
    if let Some(path) = &c.emit {
        let side = emit_report(&report, &cfg.digest(), path)?;
        announce(path);
        announce(&side);
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Band)
    }
}

fn check(coupling: &Option<PathBuf>, scenario: &Option<PathBuf>) -> CliResult {
    let cfg = match (coupling, scenario) {
        (Some(_), Some(_)) => {
            return Err(NetlumpError::invalid("check", "give --coupling or --scenario, not both").into());
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|source| NetlumpError::Io {
                path: path.clone(),
                source,
            })?;
            let table: toml::Table = toml::from_str(&text)
                .map_err(|e| NetlumpError::Config(format!("{}: {e}", path.display())))?;
            if table.contains_key("kind") {
                ScenarioConfig::from_toml_str(&text)?
            } else {
                let mut cfg = ScenarioConfig::builtin(ScenarioKind::Check);
                cfg.coupling = CouplingSpec::from_toml_str(&text)?;
                cfg
            }
        }
        (None, Some(path)) => ScenarioConfig::load(path)?,
        (None, None) => ScenarioConfig::builtin(ScenarioKind::Check),
    };
    print!("{}", run_check(&cfg)?.render());
    Ok(())
}

fn expand(c: &Common) -> CliResult {
    let kind = match &c.scenario {
        Some(p) => ScenarioConfig::load(p)?.kind,
        None => ScenarioKind::Diffusion,
    };
    let cfg = c.config(kind)?;
    let t = cfg.t_final();
    let (parts, n_cells) = run_expand(&cfg, t)?;
    let vbar = parts.vbar.to_grid(n_cells);
    println!("t = {t}, eps = {}", cfg.eps());
    println!("vbar: {:?}", parts.vbar.as_slice());
    println!("|w1|_L1 = {}", norm_l1(&parts.w1));
    println!("|layer|_L1 = {}", norm_l1(&parts.layer));
    if let Some(path) = &c.emit {
        emit_text(&components_csv(&[("vbar", &vbar), ("w1", &parts.w1), ("layer", &parts.layer)]), path)?;
        announce(path);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = apply_env_override() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let result = match &cli.command {
        Command::Diffuse(c) => diffuse(c),
        Command::Transport { common, upwind } => transport(common, *upwind),
        Command::Mckendrick(c) => mckendrick(c),
        Command::Sweep { common, kind } => sweep(common, *kind),
        Command::Check { coupling, scenario } => check(coupling, scenario),
        Command::Expand(c) => expand(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Band) => {
            eprintln!("fitted order outside the acceptance band");
            ExitCode::from(EXIT_BAND)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            let validation = e.is_validation() || matches!(e, NetlumpError::Io { .. });
            ExitCode::from(if validation { EXIT_VALIDATION } else { EXIT_NUMERICAL })
        }
    }
}
