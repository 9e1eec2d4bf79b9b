//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 scenario/config parse, 3 runtime.
//! `LORA_ESL_SEED` overrides the seed of any loaded scenario file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use lora_esl_core::cluster::kmeans_cluster;
use lora_esl_core::config::{parse_scenario, ScenarioFile};
use lora_esl_core::deployment::{arithmetic_allocation, fibonacci_allocation, generate_deployment, RingPlan};
use lora_esl_core::link_budget::{margin, noise_floor, path_loss, received_power_dbw, rssi, snr_measured, PathLossParams, SnrFloorTable};
use lora_esl_core::report::{comparison_csv, report_csv, report_json};
use lora_esl_core::simulator::{run_scenario, sweep_gateways, MetricsReport};
use lora_esl_core::Error as CoreError;

const SEED_ENV: &str = "LORA_ESL_SEED";

#[derive(Parser)]
#[command(name = "lora-esl", version, about = "LoRa shelf-label network simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the per-ring device counts for one gateway of a deployment
    Allocate {
        /// Number of gateways sharing the device population
        #[arg(long, default_value_t = 1)]
        gws: u32,
        /// First term of the arithmetic progression
        #[arg(long, default_value_t = 200)]
        first: u32,
        /// Common difference of the arithmetic progression
        #[arg(long, default_value_t = 100)]
        diff: u32,
        #[arg(long, default_value_t = 6)]
        rings: usize,
        /// Use the Fibonacci baseline split of --total instead
        #[arg(long)]
        fib: bool,
        /// Network-wide device total for the Fibonacci split
        #[arg(long, default_value_t = 2200)]
        total: u32,
    },
    /// Evaluate the link chain: path loss, RSSI, SNR, margin, received power
    Linkbudget {
        /// Transmit power, dBm
        #[arg(long)]
        tp: f64,
        /// Transmit antenna gain, dBi
        #[arg(long, default_value_t = 2.15)]
        gtx: f64,
        /// Path loss, dB (alternative to --distance)
        #[arg(long)]
        lpl: Option<f64>,
        /// Distance in km; the path loss is computed from the log-distance model
        #[arg(long)]
        distance: Option<f64>,
        #[arg(long, default_value_t = 73.7378)]
        ref_loss: f64,
        #[arg(long, default_value_t = 0.05)]
        ref_distance: f64,
        #[arg(long, default_value_t = 4.31)]
        exponent: f64,
        /// Receive antenna gain, dBi; enables the received-power line
        #[arg(long)]
        grx: Option<f64>,
        /// Spreading factor; enables the SNR and margin lines
        #[arg(long)]
        sf: Option<u8>,
        #[arg(long, default_value_t = 125.0)]
        bw_khz: f64,
        #[arg(long, default_value_t = 6.0)]
        nf: f64,
    },
    /// Cluster a scenario's devices to gateway centroids and print them
    Cluster {
        scenario: PathBuf,
        /// Number of clusters; the scenario's gateway count when omitted
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run one scenario and write its report
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Run a scenario template across gateway counts
    Sweep {
        template: PathBuf,
        /// Comma-separated gateway counts
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,10,20")]
        gws: Vec<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

enum CmdError {
    Usage(String),
    Config(String),
    Runtime(String),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config { .. } => CmdError::Config(e.to_string()),
            CoreError::Domain { .. } => CmdError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes, anything else is a
            // usage error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.cmd {
        Cmd::Allocate { gws, first, diff, rings, fib, total } => cmd_allocate(gws, first, diff, rings, fib, total),
        Cmd::Linkbudget { tp, gtx, lpl, distance, ref_loss, ref_distance, exponent, grx, sf, bw_khz, nf } => {
            cmd_linkbudget(tp, gtx, lpl, distance, ref_loss, ref_distance, exponent, grx, sf, bw_khz, nf)
        }
        Cmd::Cluster { scenario, k, max_iters, tol } => cmd_cluster(&scenario, k, max_iters, tol),
        Cmd::Simulate { scenario, out, format } => cmd_simulate(&scenario, &out, format),
        Cmd::Sweep { template, gws, out } => cmd_sweep(&template, &gws, &out),
    }
}

fn cmd_allocate(gws: u32, first: u32, diff: u32, rings: usize, fib: bool, total: u32) -> Result<(), CmdError> {
    // Out-of-range values here are argument mistakes, not runtime failures.
    let counts = if fib {
        let g = u64::from(gws.max(1));
        let per_gw = ((2 * u64::from(total) + g) / (2 * g)) as u32;
        fibonacci_allocation(per_gw, rings).map_err(|e| CmdError::Usage(e.to_string()))?
    } else {
        arithmetic_allocation(first, diff, rings, gws).map_err(|e| CmdError::Usage(e.to_string()))?
    };
    println!("ring,count_per_gw");
    for (ring, c) in counts.iter().enumerate() {
        println!("{ring},{c}");
    }
    let per_gw: u32 = counts.iter().sum();
    println!("# per gateway: {per_gw}, network total: {}", u64::from(per_gw) * u64::from(gws));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_linkbudget(
    tp: f64,
    gtx: f64,
    lpl: Option<f64>,
    distance: Option<f64>,
    ref_loss: f64,
    ref_distance: f64,
    exponent: f64,
    grx: Option<f64>,
    sf: Option<u8>,
    bw_khz: f64,
    nf: f64,
) -> Result<(), CmdError> {
    let l_pl = match (lpl, distance) {
        (Some(l), None) => l,
        (None, Some(d)) => {
            let params = PathLossParams {
                ref_loss_db: ref_loss,
                ref_distance_km: ref_distance,
                exponent,
                shadow_sigma_db: 0.0,
                obstacle_losses_db: vec![],
            };
            let l = path_loss(d, &params, 0.0)?;
            println!("path_loss_db = {l:.2}");
            l
        }
        _ => {
            return Err(CmdError::Config("give exactly one of --lpl or --distance".into()));
        }
    };
    let r = rssi(tp, gtx, l_pl);
    println!("rssi_dbm = {r:.2}");
    if let Some(sf) = sf {
        let floor = noise_floor(bw_khz * 1e3, nf)?;
        let snr = snr_measured(r, floor);
        println!("noise_floor_dbm = {floor:.2}");
        println!("snr_db = {snr:.2}");
        let m = margin(snr, sf, &SnrFloorTable::default())?;
        println!("margin_db = {m:.2}");
    }
    if let Some(grx) = grx {
        let rp = received_power_dbw(r, grx);
        println!("rp_dbw = {rp:.2}");
    }
    Ok(())
}

fn load_scenario(path: &Path) -> Result<ScenarioFile, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::Runtime(format!("{}: {e}", path.display())))?;
    let mut file = parse_scenario(&text)?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        let seed: u64 = seed
            .parse()
            .map_err(|_| CmdError::Config(format!("{SEED_ENV} must be an unsigned integer")))?;
        file.seed = seed;
    }
    Ok(file)
}

fn cmd_cluster(path: &Path, k: Option<usize>, max_iters: usize, tol: f64) -> Result<(), CmdError> {
    let file = load_scenario(path)?;
    let sc = file.to_scenario()?;
    let counts = match sc.allocation {
        lora_esl_core::simulator::Allocation::Arithmetic { first_term, common_diff } => {
            arithmetic_allocation(first_term, common_diff, sc.ring_radii_km.len(), sc.gw_count)?
        }
        lora_esl_core::simulator::Allocation::Fibonacci { total } => {
            let g = u64::from(sc.gw_count);
            fibonacci_allocation(((2 * u64::from(total) + g) / (2 * g)) as u32, sc.ring_radii_km.len())?
        }
    };
    let plan = RingPlan { radii_km: sc.ring_radii_km.clone(), counts_per_gw: counts };
    let deployment = generate_deployment(&plan, &sc.gw_layout, sc.gw_count, sc.area_km, sc.seed)?;
    let k = k.unwrap_or(sc.gw_count as usize);
    let positions = deployment.device_positions();
    let clustering = kmeans_cluster(&positions, k, max_iters, tol, sc.seed)?;

    println!("cluster,centroid_x_km,centroid_y_km,members,radius_km");
    for (i, c) in clustering.centroids.iter().enumerate() {
        let members = clustering.assignment.iter().filter(|&&a| a == i).count();
        println!("{i},{:.4},{:.4},{members},{:.4}", c.x, c.y, clustering.radii_km[i]);
    }
    println!("# objective (mean squared distance): {:.6}", clustering.objective);
    Ok(())
}

fn write_report_files(out: &Path, stem: &str, report: &MetricsReport, format: Format) -> Result<(), CmdError> {
    fs::create_dir_all(out)?;
    if format != Format::Csv {
        fs::write(out.join(format!("{stem}.json")), report_json(report))?;
    }
    if format != Format::Json {
        fs::write(out.join(format!("{stem}.csv")), report_csv(report))?;
    }
    Ok(())
}

fn summary_line(report: &MetricsReport) -> String {
    let mut s = String::new();
    let plr = report.total_plr.map_or("nan".into(), |v: f64| format!("{v:.4}"));
    let above = report
        .received_above_threshold_fraction
        .map_or("nan".into(), |v: f64| format!("{v:.4}"));
    let of_received = report
        .rp_above_threshold_of_received
        .map_or("nan".into(), |v: f64| format!("{v:.4}"));
    let _ = write!(
        s,
        "gw_count={} total_plr={} above_threshold_fraction={} rp_above_of_received={} delivered={}/{}",
        report.gw_count, plr, above, of_received, report.totals.delivered, report.totals.scheduled
    );
    s
}

fn cmd_simulate(path: &Path, out: &Path, format: Format) -> Result<(), CmdError> {
    let file = load_scenario(path)?;
    let sc = file.to_scenario()?;
    let report = run_scenario(&sc)?;
    write_report_files(out, "report", &report, format)?;
    println!("{}", summary_line(&report));
    Ok(())
}

fn cmd_sweep(path: &Path, gws: &[u32], out: &Path) -> Result<(), CmdError> {
    let file = load_scenario(path)?;
    let template = file.to_scenario()?;
    let reports = sweep_gateways(&template, gws)?;
    fs::create_dir_all(out)?;
    for report in &reports {
        write_report_files(out, &format!("report_gw{}", report.gw_count), report, Format::Both)?;
        println!("{}", summary_line(report));
    }
    fs::write(out.join("comparison.csv"), comparison_csv(&reports))?;
    Ok(())
}
