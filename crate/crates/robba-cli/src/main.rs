use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use robba::characters::parse_rational;
use robba::distributions::{amice_to_moments, colmez_eval, moments_to_amice};
use robba::harness::{run_suite, Config, Suite, VerificationReport, SCHEMA_VERSION};
use robba::{PadicCharacter, PadicCtx, PadicScalar, SeriesElement};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "robba-cli", version, about = "p-adic (phi,Gamma)-module calculator and identity checker")]
struct Cli {
    /// Flat key=value config file; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Coefficient digits M.
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// π-window N.
    #[arg(long, global = true)]
    pi_window: Option<i64>,
    /// t-window D.
    #[arg(long, global = true)]
    t_window: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// ε(δ, ζ^a) for a character spec "p=..;dp=..;fin=..;m=..;k=..".
    Eps {
        spec: String,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        a: i64,
    },
    /// Convert between Amice series, moments and Colmez samples (JSON files).
    Transform {
        mode: Mode,
        input: PathBuf,
        output: PathBuf,
        /// Smallest y for colmez-sample.
        #[arg(long, default_value_t = 0)]
        y_min: i64,
        /// Largest y for colmez-sample; p³-1 when omitted.
        #[arg(long)]
        y_max: Option<i64>,
    },
    /// Run a verification suite, or `all`.
    Verify { suite: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    AmiceToMoments,
    MomentsToAmice,
    ColmezSample,
}

fn config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(p) = cli.p {
        cfg.p = p;
    }
    if let Some(m) = cli.prec {
        cfg.prec = m;
    }
    if cli.pi_window.is_some() {
        cfg.pi_window = cli.pi_window;
    }
    if let Some(d) = cli.t_window {
        cfg.t_window = d;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cli: &Cli, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &cli.json_out {
        Some(path) => write(path, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A scalar given either in the serialized form or as an integer or "a/b".
fn scalar(ctx: &PadicCtx, v: &Value) -> Result<PadicScalar> {
    Ok(match v {
        Value::Number(n) => ctx.int(n.as_i64().context("integer moment out of range")?),
        Value::String(s) => parse_rational(ctx, s)?,
        other => {
            let x: PadicScalar = serde_json::from_value(other.clone())?;
            if x.prime() != ctx.p {
                bail!("moment over Q_{} in a Q_{} file", x.prime(), ctx.p);
            }
            x
        }
    })
}

fn cmd_eps(cli: &Cli, spec: &str, a: i64) -> Result<bool> {
    let prec = cli.prec.unwrap_or(Config::default().prec);
    let delta = PadicCharacter::parse(spec, prec)?;
    if cli.p.is_some_and(|p| p != delta.ctx().p) {
        bail!("--p disagrees with the prime in the character spec");
    }
    let eps = delta.epsilon(a)?;
    eprintln!("eps = {}", delta.gauss_sum_form(a));
    eprintln!("    = {eps}");
    emit(
        cli,
        &json!({
            "character": delta.to_string(),
            "a": a,
            "conductor": delta.conductor(),
            "epsilon": eps,
            "gauss_sum": delta.gauss_sum_form(a),
            "value": eps.to_string(),
        }),
    )?;
    Ok(true)
}

fn cmd_transform(cli: &Cli, mode: Mode, input: &Path, output: &Path, y_min: i64, y_max: Option<i64>) -> Result<bool> {
    let v = read_json(input)?;
    let out = match mode {
        Mode::AmiceToMoments => {
            let f: SeriesElement = serde_json::from_value(v)?;
            let count = f.valid_end().min(f.stored_end()).max(0) as usize;
            let m = amice_to_moments(&f, count)?;
            json!({ "p": f.ctx().p, "moments": m })
        }
        Mode::MomentsToAmice => {
            let p = v["p"].as_u64().context("moments file needs \"p\"")? as u32;
            let prec = v["prec"].as_u64().map(|m| m as u32).or(cli.prec).unwrap_or(Config::default().prec);
            let ctx = PadicCtx::new(p, prec)?;
            let list = v["moments"].as_array().context("moments file needs a \"moments\" array")?;
            let m = list.iter().map(|x| scalar(&ctx, x)).collect::<Result<Vec<_>>>()?;
            serde_json::to_value(moments_to_amice(&ctx, &m)?)?
        }
        Mode::ColmezSample => {
            let f: SeriesElement = serde_json::from_value(v)?;
            let p = f.ctx().p as i64;
            let hi = y_max.unwrap_or(p.pow(3) - 1);
            let samples = (y_min..=hi)
                .map(|y| {
                    let c = colmez_eval(&f, y)?;
                    Ok(json!({ "y": y, "value": c, "display": c.to_string() }))
                })
                .collect::<Result<Vec<_>>>()?;
            json!({ "p": p, "samples": samples })
        }
    };
    write(output, &serde_json::to_string_pretty(&out)?)?;
    Ok(true)
}

fn cmd_verify(cli: &Cli, name: &str) -> Result<bool> {
    let cfg = config(cli)?;
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![name.parse()?]
    };
    let reports = suites
        .into_iter()
        .map(|s| run_suite(s, &cfg))
        .collect::<robba::Result<Vec<VerificationReport>>>()?;
    let mut ok = true;
    for (i, r) in reports.iter().enumerate() {
        let tsv = r.to_tsv();
        // one header for the whole table
        let body = if i == 0 { &tsv[..] } else { tsv.split_once('\n').map_or("", |x| x.1) };
        print!("{body}");
        let fails = r.failures().count();
        eprintln!("{}: {} records, {} failed", r.suite, r.records.len(), fails);
        ok &= fails == 0;
    }
    if let Some(path) = &cli.json_out {
        let value = if reports.len() == 1 {
            serde_json::to_value(&reports[0])?
        } else {
            json!({ "schema_version": SCHEMA_VERSION, "reports": reports })
        };
        write(path, &serde_json::to_string_pretty(&value)?)?;
    }
    Ok(ok)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Eps { spec, a } => cmd_eps(cli, spec, *a),
        Cmd::Transform {
            mode,
            input,
            output,
            y_min,
            y_max,
        } => cmd_transform(cli, *mode, input, output, *y_min, *y_max),
        Cmd::Verify { suite } => cmd_verify(cli, suite),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
