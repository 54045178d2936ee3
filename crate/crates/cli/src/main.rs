//! Command-line driver: construct the function families, enumerate pole
//! atlases, fit growth curves, estimate the escaping-set dimension, and run
//! the acceptance suite. All outputs are deterministic: identical
//! configuration yields byte-identical artifacts.

use clap::{Args, Parser, Subcommand};
use escapedim::comb::CombSpec;
use escapedim::conformal::{BuildOptions, ConformalMap};
use escapedim::dimension::{theoretical_bound, ExponentOptions};
use escapedim::elliptic::EllipticConfig;
use escapedim::error::Error;
use escapedim::growth::{growth_curve, GrowthTarget};
use escapedim::io;
use escapedim::speiser::{compose_f_poles, exp_poles, poles_of_f, ComposeOptions, FunctionHandle};
use escapedim::PoleAtlas;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_POLES: u8 = 3;
const EXIT_DIMENSION: u8 = 4;
const EXIT_GROWTH: u8 = 5;

#[derive(Parser)]
#[command(name = "escapedim", about = "Escaping-set dimension toolkit", version)]
struct Cli {
    /// key = value configuration file; command-line flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// pole multiplicity M
    #[arg(long = "M", default_value_t = 1)]
    m: u32,
    /// target order rho of the composed function
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// atlas completeness radius
    #[arg(long, default_value_t = 1e4)]
    radius: f64,
    /// comb order override (defaults to rho/2)
    #[arg(long)]
    alpha: Option<f64>,
    /// rescaling of the argument, f(lambda z)
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// modified-exponential power (0 = plain sector comb)
    #[arg(long, default_value_t = 0)]
    q: u32,
    /// modified-exponential constant
    #[arg(long, default_value_t = 5.0)]
    c: f64,
    /// teeth solved exactly; the tail follows the asymptotic law
    #[arg(long = "truncation-N", default_value_t = 16384)]
    truncation_n: u32,
    /// evaluation tolerance for the elliptic core
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    /// power-trick exponent override (defaults to floor(rho) when rho >= 2)
    #[arg(long = "N-power")]
    n_power: Option<u32>,
    /// function family: auto (arcsin composition per rho) or exp (H(e^z))
    #[arg(long, default_value = "auto")]
    kind: String,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build the comb and conformal map, write the construction descriptor
    Construct(CommonArgs),
    /// Enumerate the pole atlas and write JSON/CSV artifacts
    Poles(CommonArgs),
    /// Estimate the critical exponent and compare with 2 M rho / (2 + M rho)
    Dimension {
        #[command(flatten)]
        common: CommonArgs,
        /// existing atlas file (defaults to the poles artifact in --out)
        #[arg(long)]
        atlas: Option<PathBuf>,
        /// fail (exit 4) when the bracket excludes the theoretical value by more than this
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
        /// enable the verification exit code
        #[arg(long, default_value_t = false)]
        verify: bool,
    },
    /// Sample growth data and fit the order exponents
    Growth(CommonArgs),
    /// Run the acceptance suite
    VerifyAll {
        /// reduced subset that finishes in a few minutes
        #[arg(long, default_value_t = false)]
        quick: bool,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let mut argv: Vec<String> = std::env::args().collect();
    // config file: values become defaults, flags win; implemented by
    // injecting file entries before the user flags
    if let Some(pos) = argv.iter().position(|a| a == "--config") {
        if let Some(path) = argv.get(pos + 1).cloned() {
            match load_config_args(Path::new(&path)) {
                Ok(extra) => {
                    // flags win: drop config entries the user passed explicitly
                    let filtered: Vec<String> = extra
                        .chunks(2)
                        .filter(|pair| !argv.contains(&pair[0]))
                        .flat_map(|pair| pair.to_vec())
                        .collect();
                    // insert after the subcommand token
                    let insert_at = argv
                        .iter()
                        .position(|a| {
                            matches!(
                                a.as_str(),
                                "construct" | "poles" | "dimension" | "growth" | "verify-all"
                            )
                        })
                        .map(|i| i + 1)
                        .unwrap_or(argv.len());
                    for (i, a) in filtered.into_iter().enumerate() {
                        argv.insert(insert_at + i, a);
                    }
                }
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(EXIT_INVALID_CONFIG);
                }
            }
        }
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID_CONFIG);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}

fn init_thread_pool() {
    if let Ok(w) = std::env::var("ESCAPEDIM_WORKERS") {
        if let Ok(n) = w.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Flatten a TOML table of key = value pairs into --key value tokens.
/// Keys match the long flag names (M, rho, radius, ...).
fn load_config_args(path: &Path) -> Result<Vec<String>, Error> {
    let text = std::fs::read_to_string(path)?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::InvalidConfig(format!("{e}")))?;
    let mut out = Vec::new();
    for (k, v) in table {
        let val = match v {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => format!("{f}"),
            toml::Value::Boolean(b) => b.to_string(),
            other => {
                return Err(Error::InvalidConfig(format!("unsupported config value {other}")))
            }
        };
        out.push(format!("--{k}"));
        out.push(val);
    }
    Ok(out)
}

type CmdResult = Result<ExitCode, (u8, Error)>;

fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Construct(c) => cmd_construct(&c),
        Command::Poles(c) => cmd_poles(&c),
        Command::Dimension { common, atlas, slack, verify } => {
            cmd_dimension(&common, atlas.as_deref(), slack, verify)
        }
        Command::Growth(c) => cmd_growth(&c),
        Command::VerifyAll { quick } => {
            let results = escapedim::verify::run_all(&escapedim::verify::SuiteOptions { quick });
            let fails = results.iter().filter(|r| !r.pass).count();
            println!(
                "{} criteria, {} passed, {} failed",
                results.len(),
                results.len() - fails,
                fails
            );
            Ok(if fails == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

struct Construction {
    cfg: EllipticConfig,
    kind: String,
    alpha: Option<f64>,
    n_power: u32,
    rho0: f64,
    spec: Option<CombSpec>,
}

fn plan(common: &CommonArgs) -> Result<Construction, Error> {
    if common.rho < 0.0 {
        return Err(Error::InvalidConfig("rho must be nonnegative".into()));
    }
    if common.tolerance <= 0.0 {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    if !(common.lambda > 0.0 && common.lambda <= 1.0) {
        return Err(Error::InvalidConfig("lambda must lie in (0, 1]".into()));
    }
    let mut cfg = EllipticConfig::new(common.m)?;
    cfg.tolerance = common.tolerance;
    if common.kind == "exp" {
        return Ok(Construction {
            cfg,
            kind: "elliptic_exp".into(),
            alpha: None,
            n_power: 1,
            rho0: f64::INFINITY,
            spec: None,
        });
    }
    // rho >= 2 routes through the power trick: N = floor(rho), rho0 = rho/N
    let (n_power, rho0) = if common.rho >= 2.0 {
        let n = common.n_power.unwrap_or(common.rho.floor() as u32).max(1);
        (n, common.rho / n as f64)
    } else {
        (common.n_power.unwrap_or(1).max(1), common.rho)
    };
    if common.rho == 0.0 {
        return Ok(Construction {
            cfg,
            kind: "F_arcsin".into(),
            alpha: None,
            n_power: 1,
            rho0: 0.0,
            spec: None,
        });
    }
    let alpha = common.alpha.unwrap_or(rho0 / 2.0);
    let spec = if common.q > 0 {
        CombSpec::modified_exp(alpha, common.c, common.q, common.truncation_n)?
    } else {
        CombSpec::sector(alpha, common.truncation_n)?
    };
    Ok(Construction {
        cfg,
        kind: if n_power > 1 { "power_trick".into() } else { "composed_f".into() },
        alpha: Some(alpha),
        n_power,
        rho0,
        spec: Some(spec),
    })
}

fn ensure_out(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn handle_json(common: &CommonArgs, plan: &Construction) -> String {
    format!(
        "{{\"kind\":\"{}\",\"M\":{},\"rho\":{},\"rho0\":{},\"N_power\":{},\"alpha\":{},\"lambda\":{},\"q\":{},\"c\":{},\"radius\":{}}}",
        plan.kind,
        common.m,
        io::fmt_f64(common.rho),
        io::fmt_f64(plan.rho0),
        plan.n_power,
        plan
            .alpha
            .map(io::fmt_f64)
            .unwrap_or_else(|| "null".into()),
        io::fmt_f64(common.lambda),
        common.q,
        io::fmt_f64(common.c),
        io::fmt_f64(common.radius)
    )
}

fn cmd_construct(common: &CommonArgs) -> CmdResult {
    let plan = plan(common).map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    ensure_out(&common.out).map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    if let Some(spec) = &plan.spec {
        let comb = spec.to_json().map_err(|e| (EXIT_INVALID_CONFIG, e))?;
        io::atomic_write(&common.out.join("comb.json"), &comb)
            .map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    }
    io::atomic_write(&common.out.join("handle.json"), &handle_json(common, &plan))
        .map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    println!(
        "construct: kind {} (M = {}, rho = {}, alpha = {:?})",
        plan.kind, common.m, common.rho, plan.alpha
    );
    Ok(ExitCode::SUCCESS)
}

fn build_atlas(common: &CommonArgs) -> Result<PoleAtlas, Error> {
    let plan = plan(common)?;
    let atlas = match plan.kind.as_str() {
        "elliptic_exp" => exp_poles(common.radius, &plan.cfg, 2_000_000)?.0,
        "F_arcsin" => poles_of_f(common.radius, &plan.cfg)?.0,
        _ => {
            let spec = plan.spec.as_ref().expect("composed construction has a comb");
            // the base construction is enumerated at the radius of f0
            let base_radius = common.radius.powi(plan.n_power as i32);
            let map = ConformalMap::build(
                &spec.clone(),
                &BuildOptions {
                    eval_radius: base_radius,
                    target_accuracy: 1e-5,
                    max_solved: 4000,
                },
            )?;
            let base = compose_f_poles(&map, &plan.cfg, base_radius, &ComposeOptions::default())?;
            let base = if plan.n_power > 1 {
                escapedim::speiser::power_trick(&base, plan.n_power)?
            } else {
                base
            };
            if common.lambda < 1.0 {
                escapedim::speiser::scaled_family(&base, common.lambda)?
            } else {
                base
            }
        }
    };
    atlas.check_invariants()?;
    Ok(atlas)
}

fn cmd_poles(common: &CommonArgs) -> CmdResult {
    ensure_out(&common.out).map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    let atlas = build_atlas(common).map_err(|e| (EXIT_POLES, e))?;
    io::atomic_write(&common.out.join("atlas.json"), &io::atlas_to_json(&atlas))
        .map_err(|e| (EXIT_POLES, e))?;
    io::atomic_write(&common.out.join("atlas.csv"), &io::atlas_to_csv(&atlas))
        .map_err(|e| (EXIT_POLES, e))?;
    println!(
        "poles: {} records within radius {} (provenance {})",
        atlas.len(),
        atlas.radius,
        atlas.provenance
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_dimension(
    common: &CommonArgs,
    atlas_path: Option<&Path>,
    slack: f64,
    verify: bool,
) -> CmdResult {
    ensure_out(&common.out).map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    let atlas = match atlas_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| (EXIT_DIMENSION, e.into()))?;
            io::atlas_from_json(&text).map_err(|e| (EXIT_DIMENSION, e))?
        }
        None => {
            let p = common.out.join("atlas.json");
            if p.exists() {
                let text = std::fs::read_to_string(&p).map_err(|e| (EXIT_DIMENSION, e.into()))?;
                io::atlas_from_json(&text).map_err(|e| (EXIT_DIMENSION, e))?
            } else {
                build_atlas(common).map_err(|e| (EXIT_DIMENSION, e))?
            }
        }
    };
    let est = escapedim::dimension::critical_exponent(
        &atlas,
        &ExponentOptions { rho: Some(common.rho), ..Default::default() },
    )
    .map_err(|e| (EXIT_DIMENSION, e))?;
    io::atomic_write(&common.out.join("dimension.json"), &io::estimate_to_json(&est))
        .map_err(|e| (EXIT_DIMENSION, e))?;
    let mut csv = String::from("t_star,theoretical,abs_gap\n");
    csv.push_str(&io::estimate_csv_row(&est));
    io::atomic_write(&common.out.join("dimension.csv"), &csv)
        .map_err(|e| (EXIT_DIMENSION, e))?;
    io::atomic_write(&common.out.join("blocks.csv"), &io::estimate_blocks_csv(&est))
        .map_err(|e| (EXIT_DIMENSION, e))?;
    let theo = theoretical_bound(common.m, common.rho);
    println!(
        "dimension: t* = {:.4} in [{:.4}, {:.4}], theoretical {:.4}, gap {:+.4}",
        est.t_star,
        est.t_low,
        est.t_high,
        theo,
        est.t_star - theo
    );
    if verify {
        let ok = est.t_low <= theo + slack && est.t_high >= theo - slack;
        if !ok {
            eprintln!("verification failed: bracket excludes the theoretical value");
            return Ok(ExitCode::from(EXIT_DIMENSION));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_growth(common: &CommonArgs) -> CmdResult {
    ensure_out(&common.out).map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    let plan = plan(common).map_err(|e| (EXIT_INVALID_CONFIG, e))?;
    let radii: Vec<f64> = (0..13)
        .map(|i| 30.0f64 * (common.radius / 30.0).powf(i as f64 / 12.0))
        .collect();
    let curve = match plan.kind.as_str() {
        "F_arcsin" => {
            let (atlas, _) = poles_of_f(common.radius, &plan.cfg).map_err(|e| (EXIT_GROWTH, e))?;
            let f = FunctionHandle::Arcsin { cfg: plan.cfg };
            growth_curve(&GrowthTarget::Meromorphic { f: &f, atlas: &atlas }, &radii)
                .map_err(|e| (EXIT_GROWTH, e))?
        }
        "elliptic_exp" => {
            let (atlas, _) =
                exp_poles(common.radius.min(12.0), &plan.cfg, 2_000_000).map_err(|e| (EXIT_GROWTH, e))?;
            let f = FunctionHandle::EllipticExp { cfg: plan.cfg };
            let radii: Vec<f64> = (0..13)
                .map(|i| 1.0 + (common.radius.min(12.0) - 1.0) * i as f64 / 12.0)
                .collect();
            growth_curve(&GrowthTarget::Meromorphic { f: &f, atlas: &atlas }, &radii)
                .map_err(|e| (EXIT_GROWTH, e))?
        }
        _ => {
            let spec = plan.spec.as_ref().expect("comb");
            let map = ConformalMap::build(
                &spec.clone(),
                &BuildOptions { eval_radius: common.radius, target_accuracy: 1e-5, max_solved: 4000 },
            )
            .map_err(|e| (EXIT_GROWTH, e))?;
            let atlas = compose_f_poles(&map, &plan.cfg, common.radius, &ComposeOptions::default())
                .map_err(|e| (EXIT_GROWTH, e))?;
            let f = FunctionHandle::ComposedArcsin { cfg: plan.cfg, map: Arc::new(map) };
            growth_curve(&GrowthTarget::Meromorphic { f: &f, atlas: &atlas }, &radii)
                .map_err(|e| (EXIT_GROWTH, e))?
        }
    };
    let mut json = String::from("{\"samples\":[");
    let mut csv = String::from("r,n_r,N_r,T_r,logM_r\n");
    for (i, s) in curve.samples.iter().enumerate() {
        if i > 0 {
            json.push(',');
        }
        json.push_str(&format!(
            "{{\"r\":{},\"n_r\":{},\"N_r\":{},\"T_r\":{},\"logM_r\":{}}}",
            io::fmt_f64(s.r),
            s.n_r,
            io::fmt_f64(s.nn_r),
            io::fmt_f64(s.t_r),
            s.log_m_r.map(io::fmt_f64).unwrap_or_else(|| "null".into())
        ));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            io::fmt_f64(s.r),
            s.n_r,
            io::fmt_f64(s.nn_r),
            io::fmt_f64(s.t_r),
            s.log_m_r.map(io::fmt_f64).unwrap_or_default()
        ));
    }
    json.push_str(&format!(
        "],\"order_fit\":{},\"loglog_density\":{},\"p_fit\":{}}}",
        io::fmt_f64(curve.order_fit),
        io::fmt_f64(curve.loglog_density),
        curve.p_fit.map(io::fmt_f64).unwrap_or_else(|| "null".into())
    ));
    io::atomic_write(&common.out.join("growth.json"), &json).map_err(|e| (EXIT_GROWTH, e))?;
    io::atomic_write(&common.out.join("growth.csv"), &csv).map_err(|e| (EXIT_GROWTH, e))?;
    println!(
        "growth: order_fit {:.4}, loglog_density {:.4}",
        curve.order_fit, curve.loglog_density
    );
    Ok(ExitCode::SUCCESS)
}
