//! `cvqe` command-line runner: record, replay, sweep and exact reference curves.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cvqe_core::cvqe::{scan_theta, JastrowParams};
use cvqe_core::experiment::{exact_curve, optimize_gutzwiller, sweep, Mode, Model, SweepConfig};
use cvqe_core::hubbard::{default_mu, HubbardParams, Lattice};
use cvqe_core::MeasurementRecordSet;

use config::{parse_list, Config};

/// Golden-section tolerance for `θ*`.
pub const THETA_TOL: f64 = 1e-7;
const DEFAULT_D_VALUES: &str = "0,0.5,1,1.5,2,2.5,3,3.5,4";

#[derive(Debug, Parser)]
#[command(name = "cvqe", version, about = "Cascaded VQE with a Gutzwiller dressing on four-site Hubbard clusters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prepare the Fermi sea, measure every readout basis and write a record file.
    Run(RunArgs),
    /// Replay a record file over a θ grid (no new sampling).
    Evaluate(EvaluateArgs),
    /// Optimal Gutzwiller energy and exact energy over a range of d.
    Sweep(SweepArgs),
    /// Exact ground-state energies over a range of d.
    Exact(ExactArgs),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// `key = value` file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// square4 or triangular4.
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Chemical potential; defaults to the half-filling value of the lattice.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// full, spin-factorized or infinite-shot.
    #[arg(long)]
    pub mode: Option<String>,
    /// Occupied one-body orbitals per spin (ascending-energy indices), e.g. `0,2`.
    #[arg(long)]
    pub occupy: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThetaGrid {
    #[arg(long, allow_hyphen_values = true)]
    pub theta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_max: Option<f64>,
    /// Number of grid points, end points included.
    #[arg(long)]
    pub theta_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Record file written by `run`.
    pub records: Option<PathBuf>,
    #[command(flatten)]
    pub grid: ThetaGrid,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Comma-separated interaction strengths.
    #[arg(long)]
    pub d_values: Option<String>,
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub grid: ThetaGrid,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub d_values: Option<String>,
}

/// Command-line value, else config value, else nothing.
struct Resolver {
    config: Config,
    echo: Vec<(String, String)>,
}

impl Resolver {
    fn new(common: &Common) -> Result<Self> {
        let config = match &common.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        Ok(Self { config, echo: Vec::new() })
    }

    fn opt<T>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>>
    where
        T: std::str::FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        let v = match cli {
            Some(v) => Some(v),
            None => self.config.get(key)?,
        };
        if let Some(v) = &v {
            self.echo.push((key.to_string(), v.to_string()));
        }
        Ok(v)
    }

    fn or<T>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T>
    where
        T: std::str::FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        Ok(match self.opt(key, cli)? {
            Some(v) => v,
            None => {
                self.echo.push((key.to_string(), default.to_string()));
                default
            }
        })
    }

    fn required<T>(&mut self, key: &str, cli: Option<T>) -> Result<T>
    where
        T: std::str::FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        self.opt(key, cli)?.with_context(|| format!("missing --{key} (or `{key} = ...` in the config)"))
    }

    fn out(&mut self, common: &Common) -> Result<Option<PathBuf>> {
        let out = match &common.out {
            Some(p) => Some(p.clone()),
            None => self.config.get::<String>("out")?.map(PathBuf::from),
        };
        if let Some(p) = &out {
            self.echo.push(("out".into(), p.display().to_string()));
        }
        Ok(out)
    }

    fn lattice(&mut self, cli: Option<String>) -> Result<Lattice> {
        let name = self.or("lattice", cli, "square4".to_string())?;
        Ok(name.parse()?)
    }

    fn mode(&mut self, cli: Option<String>, default: Mode) -> Result<Mode> {
        let name = self.or("mode", cli, default.to_string())?;
        Ok(name.parse()?)
    }

    fn grid(&mut self, g: &ThetaGrid) -> Result<(f64, f64, usize)> {
        let lo = self.or("theta-min", g.theta_min, 0.0)?;
        let hi = self.or("theta-max", g.theta_max, 3.0)?;
        let steps = self.or("theta-steps", g.theta_steps, 301)?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || steps < 2 {
            bail!("θ grid needs finite theta-min < theta-max and theta-steps ≥ 2");
        }
        Ok((lo, hi, steps))
    }

    fn d_values(&mut self, cli: Option<String>) -> Result<Vec<f64>> {
        let text = self.or("d-values", cli, DEFAULT_D_VALUES.to_string())?;
        let v: Vec<f64> = parse_list(&text)?;
        if v.is_empty() {
            bail!("d-values is empty");
        }
        Ok(v)
    }

    fn manifest(&self, command: &str, extra: &[(&str, String)]) -> String {
        let mut s = format!("command = {command}\nversion = {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.echo {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (k, v) in extra {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// 17 significant digits; `inf` for an infinite value.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn check_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!("{} exists (use --force to overwrite)", path.display());
    }
    Ok(())
}

/// Writes `content` to `out` (and the manifest next to it), or prints it.
fn emit(out: Option<&Path>, force: bool, content: &str, manifest: &str) -> Result<()> {
    match out {
        Some(path) => {
            check_writable(path, force)?;
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
            std::fs::write(manifest_path(path), manifest)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut r = Resolver::new(&args.common)?;
    let lattice = r.lattice(args.lattice)?;
    let d = r.required("d", args.d)?;
    let k = r.or("k", args.k, 1.0)?;
    let mu = match r.opt("mu", args.mu)? {
        Some(mu) => mu,
        None => {
            let mu = default_mu(&lattice, d, k)?;
            r.echo.push(("mu".into(), fmt_float(mu)));
            mu
        }
    };
    let mode = r.mode(args.mode, Mode::Full)?;
    let shots = r.or("shots", args.shots, 100_000)?;
    let seed = r.or("seed", args.seed, 0)?;
    let occupy = match r.opt("occupy", args.occupy)? {
        Some(s) => Some(parse_list::<usize>(&s)?),
        None => None,
    };
    let out = r.out(&args.common)?.context("missing --out for the record file")?;
    check_writable(&out, args.common.force)?;

    let model = Model::new(lattice, HubbardParams { mu, k, d }, occupy.as_deref())?;
    let circuit = model.circuit(mode)?;
    let records = model.records(mode, shots, seed)?;
    let manifest = r.manifest(
        "run",
        &[
            ("occupied-orbitals", format!("{:?}", model.sea.occupied)),
            ("content-hash", records.content_hash().to_string()),
        ],
    );
    emit(Some(&out), args.common.force, &records.to_json()?, &manifest)?;
    println!(
        "wrote {}: {} groups on {} qubits, circuit depth {}, {} two-qubit gates, occupied orbitals {:?}",
        out.display(),
        records.groups().len(),
        records.header().qubits,
        circuit.depth(),
        circuit.two_qubit_count(),
        model.sea.occupied,
    );
    println!("content hash {}", records.content_hash());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut r = Resolver::new(&args.common)?;
    let path = match args.records {
        Some(p) => p,
        None => PathBuf::from(r.required::<String>("records", None)?),
    };
    r.echo.push(("records".into(), path.display().to_string()));
    let (lo, hi, steps) = r.grid(&args.grid)?;
    let out = r.out(&args.common)?;

    let records = MeasurementRecordSet::read(&path).with_context(|| format!("loading {}", path.display()))?;
    let descriptor = records.header().model.clone().context("record file carries no model descriptor")?;
    let model = Model::from_descriptor(&descriptor)?;
    let thetas: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let grid: Vec<JastrowParams> = thetas.iter().map(|&t| model.gutzwiller(t)).collect();
    let scan = scan_theta(&records, &model.dressed, &grid)?;

    let mut csv = String::from("theta,numerator,denominator,energy,stderr\n");
    for (t, e) in thetas.iter().zip(&scan.estimates) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_float(*t),
            fmt_float(e.numerator),
            fmt_float(e.denominator),
            fmt_float(e.energy),
            fmt_float(e.stderr)
        );
    }
    let best = scan.best();
    let opt = optimize_gutzwiller(&records, &model, (lo, hi), THETA_TOL)?;
    let manifest = r.manifest("evaluate", &[("content-hash", records.content_hash().to_string())]);
    emit(out.as_deref(), args.common.force, &csv, &manifest)?;
    let summary = format!(
        "argmin theta={} energy={} stderr={}\nminimum theta={} energy={} stderr={}{}",
        fmt_float(thetas[scan.argmin]),
        fmt_float(best.energy),
        fmt_float(best.stderr),
        fmt_float(opt.theta),
        fmt_float(opt.estimate.energy),
        fmt_float(opt.estimate.stderr),
        if opt.at_upper_edge { " (upper edge of the θ range)" } else { "" },
    );
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut r = Resolver::new(&args.common)?;
    let lattice = r.lattice(args.lattice)?;
    let k = r.or("k", args.k, 1.0)?;
    let d_values = r.d_values(args.d_values)?;
    let mode = r.mode(args.mode, Mode::InfiniteShot)?;
    let shots = r.or("shots", args.shots, 100_000)?;
    let seed = r.or("seed", args.seed, 0)?;
    let (lo, hi, _) = r.grid(&args.grid)?;
    let out = r.out(&args.common)?;
    if let Some(p) = &out {
        check_writable(p, args.common.force)?;
    }

    let cfg = SweepConfig { lattice, k, d_values, mode, shots, seed, bracket: (lo, hi), tol: THETA_TOL };
    let rows = sweep(&cfg)?;
    let mut csv = String::from("d,E_opt,theta_opt,E_exact\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_float(row.d),
            fmt_float(row.e_opt),
            fmt_float(row.theta_opt),
            fmt_float(row.e_exact)
        );
    }
    emit(out.as_deref(), args.common.force, &csv, &r.manifest("sweep", &[]))
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let mut r = Resolver::new(&args.common)?;
    let lattice = r.lattice(args.lattice)?;
    let k = r.or("k", args.k, 1.0)?;
    let d_values = r.d_values(args.d_values)?;
    let out = r.out(&args.common)?;
    if let Some(p) = &out {
        check_writable(p, args.common.force)?;
    }
    let mut csv = String::from("d,exact_energy\n");
    for (d, e) in exact_curve(&lattice, k, &d_values)? {
        let _ = writeln!(csv, "{},{}", fmt_float(d), fmt_float(e));
    }
    emit(out.as_deref(), args.common.force, &csv, &r.manifest("exact", &[]))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Exact(a) => cmd_exact(a),
    }
}
