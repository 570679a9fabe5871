use clap::{Args, Parser, Subcommand};
use majorana_qec::analysis::{pseudo_threshold, summarize, sweep, to_csv, ErrRateCurve};
use majorana_qec::bacon_shor::{build_code, LayoutDump};
use majorana_qec::config::{parse_device_params, ExperimentConfig};
use majorana_qec::engine::{all_events_params, ft_check};
use majorana_qec::noise::derive_event_probs;
use majorana_qec::physical::model_params_from_rates;
use majorana_qec::Error;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const OUT_DIR_ENV: &str = "MAJORANA_QEC_OUT_DIR";

#[derive(Parser)]
#[command(name = "majorana-qec", version, about = "Majorana noise models on a Bacon-Shor code of tetrons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the per-event probabilities of a noise model as JSON.
    DeriveProbs(Common),
    /// Convert device parameters into noise-model parameters.
    Rates {
        /// Device parameter file (key = value); defaults apply otherwise.
        #[arg(long)]
        device: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate logical error rates over a grid and write the result files.
    Sweep(Common),
    /// Like sweep, but fail with exit code 3 if any curve has no crossing.
    Threshold(Common),
    /// Exhaustive fault-injection check of the protocol.
    FtCheck(Common),
    /// Print the gauge, stabilizer and logical matrices and the schedule.
    DumpLayout(Common),
}

/// Configuration sources, applied in order: file, `--set`, then named flags.
#[derive(Args, Clone, Default)]
struct Common {
    /// Configuration file with one `key = value` per line.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set p0_grid=0.01,0.02`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    layout: Option<String>,
    #[arg(long)]
    p0: Option<String>,
    #[arg(long)]
    p1: Option<String>,
    #[arg(long)]
    p2: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long = "p-mst1")]
    p_mst1: Option<String>,
    #[arg(long = "p-mst2")]
    p_mst2: Option<String>,
    #[arg(long = "p0-grid")]
    p0_grid: Option<String>,
    #[arg(long)]
    series: Option<String>,
    #[arg(long = "series-values")]
    series_values: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long = "fail-target")]
    fail_target: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Output path prefix; `.csv`, `.json` and `.cfg` are appended.
    #[arg(long)]
    out: Option<String>,
    /// Use importance sampling.
    #[arg(long)]
    importance: bool,
    #[arg(long = "v-trunc")]
    v_trunc: Option<String>,
}

enum Failure {
    Config(Error),
    Unbracketed(serde_json::Value),
    FtViolation(serde_json::Value),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unbracketed { .. } => Failure::Unbracketed(json!({ "message": e.to_string() })),
            e => Failure::Config(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, body) = match self {
            Failure::Config(e) => {
                let key = match &e {
                    Error::InvalidParameter { name, .. } => Some(name.clone()),
                    _ => None,
                };
                (2, json!({ "error": "invalid_config", "key": key, "message": e.to_string() }))
            }
            Failure::Unbracketed(v) => (3, json!({ "error": "unbracketed", "detail": v })),
            Failure::FtViolation(v) => (4, json!({ "error": "ft_violation", "detail": v })),
            Failure::Other(m) => (1, json!({ "error": "other", "message": m })),
        };
        eprintln!("{body}");
        ExitCode::from(code)
    }
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Failure::Config(Error::InvalidParameter {
                    name: kv.clone(),
                    value: String::new(),
                    reason: "expected KEY=VALUE".into(),
                })
            })?;
            cfg.set(k.trim(), v)?;
        }
        let named = [
            ("model", &self.model),
            ("d", &self.d),
            ("layout", &self.layout),
            ("p0", &self.p0),
            ("p1", &self.p1),
            ("p2", &self.p2),
            ("r", &self.r),
            ("q", &self.q),
            ("p_mst1", &self.p_mst1),
            ("p_mst2", &self.p_mst2),
            ("p0_grid", &self.p0_grid),
            ("series", &self.series),
            ("series_values", &self.series_values),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("fail_target", &self.fail_target),
            ("workers", &self.workers),
            ("out", &self.out),
            ("v_trunc", &self.v_trunc),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        if self.importance {
            cfg.set("importance", "true")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn out_prefix(out: &str) -> PathBuf {
    let p = Path::new(out);
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Other(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<(Vec<ErrRateCurve>, PathBuf), Failure> {
    let plan = cfg.sweep_plan()?;
    if plan.p0_grid.is_empty() {
        return Err(Failure::Config(Error::InvalidParameter {
            name: "p0_grid".into(),
            value: String::new(),
            reason: "sweep needs at least one grid point".into(),
        }));
    }
    let curves = sweep(&plan)?;
    let prefix = out_prefix(&cfg.out);
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let config_text = cfg.to_config_string();
    let summary = json!({
        "config": config_text,
        "seed": cfg.seed,
        "thresholds": summarize(&curves)?,
        "curves": curves,
    });
    std::fs::write(with_ext(&prefix, "csv"), to_csv(&curves))?;
    std::fs::write(
        with_ext(&prefix, "json"),
        serde_json::to_string_pretty(&summary).map_err(|e| Failure::Other(e.to_string()))? + "\n",
    )?;
    std::fs::write(with_ext(&prefix, "cfg"), config_text)?;
    Ok((curves, prefix))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::DeriveProbs(c) => {
            let cfg = c.resolve()?;
            print_json(&derive_event_probs(&cfg.model_params())?)
        }
        Command::Rates { device, common } => {
            let cfg = common.resolve()?;
            let dev = match device {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
                    parse_device_params(&text)?
                }
                None => Default::default(),
            };
            let conv = model_params_from_rates(&dev, cfg.model)?;
            for w in &conv.warnings {
                eprintln!("{}", json!({ "warning": w }));
            }
            print_json(&conv)
        }
        Command::Sweep(c) => {
            let cfg = c.resolve()?;
            let (_, prefix) = run_sweep(&cfg)?;
            println!("{}", with_ext(&prefix, "csv").display());
            Ok(())
        }
        Command::Threshold(c) => {
            let cfg = c.resolve()?;
            let (curves, _) = run_sweep(&cfg)?;
            let mut missing = Vec::new();
            for curve in &curves {
                let series = curve.series.map(|(p, v)| format!("{p}={v}"));
                match pseudo_threshold(curve) {
                    Ok(t) => println!(
                        "{}",
                        json!({ "series": series, "p_th": t.p_th, "low": t.low, "high": t.high, "uncertainty": t.uncertainty })
                    ),
                    Err(e @ Error::Unbracketed { .. }) => {
                        missing.push(json!({ "series": series, "message": e.to_string() }))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if missing.is_empty() {
                Ok(())
            } else {
                Err(Failure::Unbracketed(json!(missing)))
            }
        }
        Command::FtCheck(c) => {
            let cfg = c.resolve()?;
            let code = build_code(cfg.d, cfg.layout())?;
            let report = ft_check(&code, &all_events_params(cfg.model))?;
            if report.passed() {
                print_json(&report)
            } else {
                Err(Failure::FtViolation(json!(report)))
            }
        }
        Command::DumpLayout(c) => {
            let cfg = c.resolve()?;
            let code = build_code(cfg.d, cfg.layout())?;
            print_json(&LayoutDump::from(&code))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
