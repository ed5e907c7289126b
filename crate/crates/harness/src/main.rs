use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sphere_rk::eikonal::{trace_wavefront, write_wavefronts_csv, RayScheme, TraceParams, VelocityModel};
use sphere_rk::pharmonic::{default_dt, initial_discontinuous_curve, pflow_evolve, write_curves_csv, PFlowParams};
use sphere_rk::{SchemeId, UnitVector3};
use sphere_rk_harness::convergence::{parse_h_list, run_convergence_many, ConvergenceReport, Problem};
use sphere_rk_harness::stability::{default_q0, run_stability, DEFAULT_STEPS};
use sphere_rk_harness::verify::{
    appendix_a_h_list, verify_appendix_a, verify_appendix_b, verify_slerp_parity, verify_table2, Report, PARITY_PAIRS,
    PARITY_SEED,
};
use sphere_rk_harness::Method;

const EXIT_VERIFY_FAILED: u8 = 2;
const EXIT_USAGE: u8 = 1;

#[derive(Parser)]
#[command(name = "sphere-rk", version, about = "Sphere-intrinsic Runge-Kutta experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Endpoint errors and fitted orders over a list of step sizes.
    Converge {
        #[arg(long, default_value = "vortex4")]
        problem: Problem,
        /// Method name, `all`, or `table2`.
        #[arg(long, default_value = "all")]
        scheme: String,
        #[arg(long, default_value_t = 2.0)]
        t_final: f64,
        /// `h0/2^a..b` or a comma-separated list.
        #[arg(long, default_value = "0.1/2^0..5")]
        h: String,
        /// `.csv` (with a `.json` order sidecar) or `.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance to the attractor on the projected linear model.
    Stability {
        #[arg(long)]
        scheme: SchemeId,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wavefronts of rays from a point source at (1, 0, 0).
    Eikonal {
        #[arg(long, value_enum, default_value = "const")]
        velocity: Velocity,
        #[arg(long, default_value_t = 3)]
        order: u32,
        #[arg(long, default_value_t = 512)]
        rays: usize,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        t_final: f64,
        /// Comma-separated times; defaults to `t_final` alone.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// p-harmonic flow of the two-branch discontinuous curve.
    Pharmonic {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Defaults to `0.1 ds² / max(1, max w)` on the initial curve.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_final: f64,
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        /// Time-stepping order, 2 or 3.
        #[arg(long, default_value_t = 3)]
        order: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form and table checks; exits with 2 if any fails.
    Verify {
        #[arg(long, value_enum)]
        target: Target,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Velocity {
    Const,
    Expz2,
    Y31,
}

impl From<Velocity> for VelocityModel {
    fn from(v: Velocity) -> Self {
        match v {
            Velocity::Const => VelocityModel::Constant(1.0),
            Velocity::Expz2 => VelocityModel::ExpZ2,
            Velocity::Y31 => VelocityModel::OnePlusY31,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    AppendixA,
    AppendixB,
    SlerpParity,
    Table2,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Returns `false` when a verification failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Converge {
            problem,
            scheme,
            t_final,
            h,
            out,
        } => {
            let methods = match scheme.as_str() {
                "all" => Method::all(),
                "table2" => sphere_rk_harness::verify::table2_methods(),
                name => vec![name.parse()?],
            };
            let h_list = parse_h_list(&h)?;
            if h_list.len() < 4 {
                bail!("need at least 4 step sizes, got {}", h_list.len());
            }
            let reports = run_convergence_many(&methods, problem, &h_list, t_final)?;
            match out {
                Some(path) => write_convergence(&path, &reports)?,
                None => print_convergence(&reports),
            }
        }
        Command::Stability { scheme, h, steps, out } => {
            let run = run_stability(scheme, h, steps, default_q0())?;
            println!(
                "{} h={} steps={}: {:?} (final distance {:.3e})",
                run.scheme,
                run.h,
                run.n_steps,
                run.verdict,
                run.distances.last().copied().unwrap_or(f64::NAN)
            );
            if let Some(path) = out {
                let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
                w.write_record(["step", "t", "distance"])?;
                for (n, d) in run.distances.iter().enumerate() {
                    w.write_record(&[n.to_string(), (n as f64 * h).to_string(), d.to_string()])?;
                }
                w.flush()?;
            }
        }
        Command::Eikonal {
            velocity,
            order,
            rays,
            dt,
            t_final,
            snapshots,
            out,
        } => {
            let params = TraceParams {
                scheme: RayScheme::of_order(order)?,
                n_rays: rays,
                h: dt,
                snapshots: snapshot_times(snapshots, t_final)?,
            };
            let fronts = trace_wavefront(&velocity.into(), &UnitVector3::E1, &params)?;
            let defect = fronts
                .iter()
                .flat_map(|f| &f.rays)
                .map(|r| r.sphere_defect())
                .fold(0.0, f64::max);
            eprintln!("{} wavefronts, max |‖x‖-1| = {defect:.2e}", fronts.len());
            write_output(out.as_deref(), |w| write_wavefronts_csv(w, &fronts))?;
        }
        Command::Pharmonic {
            p,
            nodes,
            dt,
            t_final,
            snapshots,
            order,
            out,
        } => {
            let curve = initial_discontinuous_curve(nodes)?;
            let mut params = PFlowParams::new(p, 0.0, t_final);
            params.dt = dt.unwrap_or_else(|| default_dt(&curve, p, params.eps_reg));
            let mut times = snapshot_times(snapshots, t_final)?;
            if times.first() != Some(&0.0) {
                times.insert(0, 0.0);
            }
            let snaps = pflow_evolve(&curve, &params, order, &times)?;
            for (t, c) in &snaps {
                eprintln!(
                    "t={t:.6e} E_p={:.6e} max jump={:.4} mean spacing={:.4}",
                    c.energy(p),
                    c.max_jump(),
                    c.mean_spacing()
                );
            }
            write_output(out.as_deref(), |w| write_curves_csv(w, &snaps))?;
        }
        Command::Verify { target } => {
            let report = match target {
                Target::AppendixA => {
                    let mut r = verify_appendix_a(1.0, 1.1, &appendix_a_h_list())?;
                    r.checks.extend(verify_appendix_a(1.0, 1.0, &appendix_a_h_list())?.checks);
                    r
                }
                Target::AppendixB => verify_appendix_b(),
                Target::SlerpParity => verify_slerp_parity(PARITY_PAIRS, PARITY_SEED)?,
                Target::Table2 => {
                    let (reports, r) = verify_table2()?;
                    print_convergence(&reports);
                    r
                }
            };
            print_report(&report);
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn snapshot_times(mut snapshots: Vec<f64>, t_final: f64) -> anyhow::Result<Vec<f64>> {
    if snapshots.is_empty() {
        snapshots.push(t_final);
    }
    if snapshots.iter().any(|&t| t > t_final) {
        bail!("snapshot times must not exceed --t-final {t_final}");
    }
    Ok(snapshots)
}

fn write_output<F>(path: Option<&Path>, write: F) -> anyhow::Result<()>
where
    F: FnOnce(Box<dyn Write>) -> Result<(), csv::Error>,
{
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    };
    write(sink)?;
    Ok(())
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scheme: &'a str,
    h: f64,
    e2: f64,
    enorm: f64,
}

#[derive(Serialize)]
struct Orders {
    order_e2: Option<f64>,
    order_enorm: Option<f64>,
}

fn write_convergence(path: &Path, reports: &[ConvergenceReport]) -> anyhow::Result<()> {
    let create = |p: &Path| File::create(p).with_context(|| format!("creating {}", p.display()));
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_writer_pretty(create(path)?, reports)?;
        return Ok(());
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in reports {
        for row in &r.rows {
            w.serialize(CsvRow {
                scheme: &r.method,
                h: row.h,
                e2: row.e2,
                enorm: row.enorm,
            })?;
        }
    }
    w.flush()?;
    let orders: serde_json::Map<String, serde_json::Value> = reports
        .iter()
        .map(|r| {
            let o = Orders {
                order_e2: r.order_e2,
                order_enorm: r.order_enorm,
            };
            Ok((r.method.clone(), serde_json::to_value(o)?))
        })
        .collect::<serde_json::Result<_>>()?;
    serde_json::to_writer_pretty(create(&path.with_extension("json"))?, &orders)?;
    Ok(())
}

fn print_convergence(reports: &[ConvergenceReport]) {
    let fmt = |o: Option<f64>| o.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    for r in reports {
        println!("{}  order E2 {}  order Enorm {}", r.method, fmt(r.order_e2), fmt(r.order_enorm));
        for row in &r.rows {
            println!("  h={:<10.6} E2={:.3e}  Enorm={:.3e}", row.h, row.e2, row.enorm);
        }
    }
}

fn print_report(report: &Report) {
    println!("[{}]", report.target);
    for c in &report.checks {
        println!("{c}");
    }
    println!("{}", if report.passed() { "PASS" } else { "FAIL" });
}
