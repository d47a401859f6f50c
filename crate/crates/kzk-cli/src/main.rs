//! Command-line front end for the half-strip simulator: parse a TOML run
//! config, check its hypotheses, dispatch to the solver, oracle ladder,
//! inequality lab, or a named experiment preset, and write CSV/JSON
//! artifacts.
//!
//! Exit codes: `0` success (and verdict pass), `1` validation or verdict
//! failure, `2` runtime failure, `64` usage error. All artifacts land under
//! the configured output directory, itself placed under `$KZK_OUT` when that
//! variable is set. Data files (CSV/JSON) are byte-stable for identical
//! configs; the wall-clock timestamp lives in a separate `*_meta.txt` header
//! file next to them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use kzk::config::RunConfig;
use kzk::diagnostics::Recorder;
use kzk::eigenbasis::{BcFamily, EigenBasis};
use kzk::experiments::{
    conservation_drift_preset, continuous_dependence_preset, oracle_convergence_preset,
    run_conservation_drift, run_continuous_dependence, run_decay, run_oracle_convergence,
    EpsilonCache, Preset,
};
use kzk::grid::{Field, Grid};
use kzk::inequality::{
    box_embedding_check, generate_ensemble, gradient_and_trace_check, interpolation_check,
    EnsembleSpec, LabGrid,
};
use kzk::solver::{Solver, SpectralState};
use kzk::weights::WeightSpec;
use kzk::Error;

#[derive(Parser)]
#[command(
    name = "kzk",
    version,
    about = "Half-strip simulator and estimate-verification harness \
             for a fifth-order dispersive equation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the configured run and write a diagnostics CSV
    Run(ConfigArg),
    /// Resolution ladder of the linear solver against the dispersive oracle
    Oracle(ConfigArg),
    /// Empirical-constant suite for the interpolation and trace inequalities
    Inequalities(ConfigArg),
    /// Run the experiment preset named by the config and write its verdict
    Experiment(ConfigArg),
    /// Print the lateral eigenvalue table as CSV
    EigenTable(EigenTableArgs),
    /// Check a config against every hypothesis without writing anything
    Validate(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    /// Path to a TOML run configuration
    config: PathBuf,
}

#[derive(Args)]
struct EigenTableArgs {
    /// Lateral condition family: a | b | c | d
    #[arg(long)]
    family: String,
    /// Strip width
    #[arg(long, alias = "L")]
    length: f64,
    /// Number of modes to print
    #[arg(long)]
    count: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: &Cmd) -> kzk::Result<ExitCode> {
    match cmd {
        Cmd::Run(a) => {
            let Some(cfg) = load_checked(&a.config)? else { return Ok(ExitCode::from(1)) };
            cmd_run(&cfg)
        }
        Cmd::Oracle(a) => {
            let Some(cfg) = load_checked(&a.config)? else { return Ok(ExitCode::from(1)) };
            cmd_oracle(&cfg)
        }
        Cmd::Inequalities(a) => {
            let Some(cfg) = load_checked(&a.config)? else { return Ok(ExitCode::from(1)) };
            cmd_inequalities(&cfg)
        }
        Cmd::Experiment(a) => {
            let Some(cfg) = load_checked(&a.config)? else { return Ok(ExitCode::from(1)) };
            cmd_experiment(&cfg)
        }
        Cmd::EigenTable(a) => cmd_eigen_table(a),
        Cmd::Validate(a) => cmd_validate(&a.config),
    }
}

/// Load a config and print its violations; `None` means invalid.
fn load_checked(path: &Path) -> kzk::Result<Option<RunConfig>> {
    let cfg = RunConfig::from_path(path)?;
    let violations = cfg.validate();
    if violations.is_empty() {
        return Ok(Some(cfg));
    }
    for v in &violations {
        eprintln!("invalid config: {v}");
    }
    Ok(None)
}

fn cmd_validate(path: &Path) -> kzk::Result<ExitCode> {
    let cfg = match RunConfig::from_path(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            println!("{e}");
            return Ok(ExitCode::from(1));
        }
    };
    let violations = cfg.validate();
    if violations.is_empty() {
        println!("ok");
        return Ok(ExitCode::SUCCESS);
    }
    for v in &violations {
        println!("{v}");
    }
    Ok(ExitCode::from(1))
}

fn cmd_run(cfg: &RunConfig) -> kzk::Result<ExitCode> {
    let nl = cfg.nonlinearity()?;
    let basis = EigenBasis::new(cfg.family()?, cfg.domain.length, cfg.discretization.ny_modes)?;
    let grid = Grid::new(cfg.domain.x_max, cfg.discretization.nx, basis)?;
    let field = match cfg.initial_bump()? {
        Some(bump) => bump.field(&grid),
        None => Field::zeros(&grid),
    };
    let mut state = SpectralState::from_field(&grid, &field);

    let mut solver = Solver::new(grid, cfg.equation.b, nl, cfg.discretization.dt)?;
    if let Some(f) = cfg.forcing_fn()? {
        solver = solver.with_forcing(f);
    }
    if cfg.discretization.sponge > 0.0 {
        solver = solver.with_sponge(cfg.discretization.sponge);
    }

    let mut recorder = Recorder::new(cfg.tracked_weights()?, nl);
    let cadence = cfg.output.cadence as u64;
    let mut steps = 0u64;
    solver.run(&mut state, cfg.discretization.t_final, |g, s| {
        if steps.is_multiple_of(cadence) {
            recorder.record(g, s);
        }
        steps += 1;
    })?;

    let dir = ensure_outdir(cfg)?;
    recorder.write_csv(&dir.join("diagnostics.csv"))?;
    write_meta(&dir, cfg, "run")?;
    println!("run finished at t = {}; diagnostics in {}", state.t, dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(cfg: &RunConfig) -> kzk::Result<ExitCode> {
    let preset = oracle_convergence_preset();
    let verdict = run_oracle_convergence(&preset)?;

    let dir = ensure_outdir(cfg)?;
    let mut ladder = String::from("level,nx,error\n");
    for (i, (nx, err)) in preset.nx_levels.iter().zip(&verdict.errors).enumerate() {
        ladder.push_str(&format!("{i},{nx},{err}\n"));
    }
    fs::write(dir.join("oracle_ladder.csv"), ladder)?;
    write_json(&dir.join("oracle_verdict.json"), &verdict)?;
    write_meta(&dir, cfg, "oracle")?;

    println!(
        "oracle ladder: errors {:?}, orders {:?}: {}",
        verdict.errors,
        verdict.orders,
        pass_str(verdict.pass)
    );
    Ok(exit_for(verdict.pass))
}

fn cmd_inequalities(cfg: &RunConfig) -> kzk::Result<ExitCode> {
    let basis = EigenBasis::new(cfg.family()?, cfg.domain.length, 8)?;
    let lab = LabGrid::new(20.0, 321, 41);
    let spec = EnsembleSpec { seed: cfg.output.seed.into(), ..Default::default() };
    let traced = generate_ensemble(&basis, &EnsembleSpec { vanish_at_zero: true, ..spec });
    let free = generate_ensemble(&basis, &spec);

    let unit = WeightSpec::unit();
    let exp02 = WeightSpec::exponential(0.2)?;
    let weight_pairs = [(&unit, &unit), (&exp02, &exp02), (&exp02, &unit)];
    let mq_pairs = [(0usize, 2.0), (0, 4.0), (0, f64::INFINITY), (1, 2.0), (1, 6.0)];

    let mut rows = String::from("check,m,q,psi1,psi2,samples,max_ratio,pass\n");
    let mut all_pass = true;
    let mut push = |check: &str, m: String, q: String, p1: &str, p2: &str, n: usize, r: f64| {
        let pass = r.is_finite();
        all_pass &= pass;
        rows.push_str(&format!("{check},{m},{q},{p1},{p2},{n},{r},{}\n", pass_str(pass)));
    };

    for (m, q) in mq_pairs {
        for (p1, p2) in weight_pairs {
            let report = interpolation_check(m, q, p1, p2, &basis, &traced, &lab)?;
            push(
                "interpolation",
                m.to_string(),
                if q.is_infinite() { "inf".into() } else { q.to_string() },
                &p1.label(),
                &p2.label(),
                traced.len(),
                report.max_ratio,
            );
        }
    }
    for psi in [&unit, &exp02] {
        let (grad, trace) = gradient_and_trace_check(psi, &basis, &free, &lab)?;
        let label = psi.label();
        push("gradient", String::new(), String::new(), &label, "", free.len(), grad.max_ratio);
        push("trace", String::new(), String::new(), &label, "", free.len(), trace.max_ratio);
    }
    let (sup, slope) = box_embedding_check(&basis, &free, &lab)?;
    push("box_sup", String::new(), String::new(), "", "", free.len(), sup.max_ratio);
    push("slope_l6", String::new(), String::new(), "", "", free.len(), slope.max_ratio);

    let dir = ensure_outdir(cfg)?;
    fs::write(dir.join("inequalities.csv"), rows)?;
    write_meta(&dir, cfg, "inequalities")?;
    println!("inequality suite: {}", pass_str(all_pass));
    Ok(exit_for(all_pass))
}

fn cmd_experiment(cfg: &RunConfig) -> kzk::Result<ExitCode> {
    let Some(preset) = cfg.preset()? else {
        eprintln!("invalid config: experiment subcommand needs experiment.preset");
        return Ok(ExitCode::from(1));
    };
    let dir = ensure_outdir(cfg)?;
    let name = preset.name();

    let pass = match preset {
        Preset::DecayWeak | Preset::DecayStrong => {
            let p = cfg.to_decay_preset()?;
            let mut cache = EpsilonCache::new();
            match run_decay(&p, &mut cache) {
                Err(Error::GateRefused(msg)) => {
                    eprintln!("gate refused: {msg}");
                    return Ok(ExitCode::from(1));
                }
                Err(e) => return Err(e),
                Ok((verdict, recorder)) => {
                    recorder.write_csv(&dir.join(format!("{name}_diagnostics.csv")))?;
                    write_json(&dir.join(format!("{name}_verdict.json")), &verdict)?;
                    println!(
                        "{name}: fitted rate {:?} vs threshold {:.4}: {}",
                        verdict.fitted_rate,
                        verdict.threshold,
                        pass_str(verdict.pass)
                    );
                    verdict.pass
                }
            }
        }
        Preset::ContinuousDependence => {
            let verdict = run_continuous_dependence(&continuous_dependence_preset())?;
            write_json(&dir.join(format!("{name}_verdict.json")), &verdict)?;
            println!("{name}: ratio spread {:.3}: {}", verdict.spread, pass_str(verdict.pass));
            verdict.pass
        }
        Preset::OracleConvergence => {
            let verdict = run_oracle_convergence(&oracle_convergence_preset())?;
            write_json(&dir.join(format!("{name}_verdict.json")), &verdict)?;
            println!("{name}: errors {:?}: {}", verdict.errors, pass_str(verdict.pass));
            verdict.pass
        }
        Preset::ConservationDrift => {
            let verdict = run_conservation_drift(&conservation_drift_preset())?;
            write_json(&dir.join(format!("{name}_verdict.json")), &verdict)?;
            println!(
                "{name}: mass drift {:.3e}, energy drift {:.3e}: {}",
                verdict.mass_drift,
                verdict.energy_drift,
                pass_str(verdict.pass)
            );
            verdict.pass
        }
    };
    write_meta(&dir, cfg, name)?;
    Ok(exit_for(pass))
}

fn cmd_eigen_table(args: &EigenTableArgs) -> kzk::Result<ExitCode> {
    let family = match BcFamily::parse(&args.family) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("invalid arguments: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let basis = match EigenBasis::new(family, args.length, args.count.max(1)) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("invalid arguments: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    println!("l,lambda");
    for l in 0..args.count {
        println!("{},{}", l + 1, basis.lambda(l));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// Artifact plumbing
// ---------------------------------------------------------------------------

/// Output directory: `$KZK_OUT` (default `.`) joined with the configured
/// directory, created on demand.
fn ensure_outdir(cfg: &RunConfig) -> kzk::Result<PathBuf> {
    let root = std::env::var_os("KZK_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let dir = root.join(&cfg.output.directory);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Timestamped header next to the data files, so the data files themselves
/// stay byte-identical across reruns of the same config.
fn write_meta(dir: &Path, cfg: &RunConfig, label: &str) -> kzk::Result<()> {
    let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let text = format!("created_unix = {unix}\ncommand = {label}\n\n{}", cfg.to_toml());
    fs::write(dir.join(format!("{label}_meta.txt")), text)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> kzk::Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("verdict serialization failed: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn exit_for(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
