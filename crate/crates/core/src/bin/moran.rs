//! Command-line front end.
//!
//! Exit codes: 0 pass / Spectral, 1 fail / NotSpectral, 2 Unknown or
//! inconclusive, 3 input error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use moran_core::analyzer::{q_function_scan, verify_orthogonality, QScanOptions};
use moran_core::decider::{admissibility_scan, decide, AdmissibilityOptions, Outcome};
use moran_core::render::{render, support_points, Format};
use moran_core::report::VerificationReport;
use moran_core::spec_file::load_system;
use moran_core::spectrum::{construct, DEFAULT_CAP};
use moran_core::system::MoranSystem;
use moran_core::Error;

#[derive(Parser)]
#[command(name = "moran", version, about = "Spectrality checks for Sierpinski-type Moran measures")]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timings in the JSON report.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// System description (JSON).
    system: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural conditions of a system.
    Validate(Input),
    /// List the zero directions of every stored level.
    Zeros(Input),
    /// Decide spectrality with the sharpest applicable criterion.
    Decide(Input),
    /// Build block pairs and spectrum levels Λ₀..Λ_L.
    Spectrum {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Check exact orthogonality of Λ_L.
    VerifyOrth {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Sample the Q-function of Λ₀..Λ_L on a grid.
    VerifyComplete {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long)]
        block_size: Option<usize>,
        /// Flag points whose final gap 1 − Q exceeds this.
        #[arg(long)]
        gap_tolerance: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Certify admissibility of the tail products.
    Admissible {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 1)]
        start: usize,
    },
    /// Write the level-N support approximation as CSV, SVG or PPM.
    Render {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 512)]
        size: usize,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

/// Result of one command before printing.
struct CommandOutput {
    code: u8,
    body: Value,
    witnesses: Value,
    lines: Vec<String>,
}

fn exit_for_error(e: &Error) -> u8 {
    match e {
        Error::Inconclusive { .. } => 2,
        Error::Parse(_)
        | Error::InvalidSystem(_)
        | Error::Io(_)
        | Error::InvalidParameter(_)
        | Error::CapExceeded { .. }
        | Error::DimensionMismatch { .. } => 3,
        _ => 1,
    }
}

fn report_outcome(report: &VerificationReport, lines: Vec<String>) -> CommandOutput {
    let mut lines = lines;
    lines.push(format!("result: {}", if report.pass { "pass" } else { "fail" }));
    for (k, v) in &report.margins {
        lines.push(format!("{k}: {v}"));
    }
    for n in &report.notes {
        lines.push(format!("note: {n}"));
    }
    for w in report.witnesses.iter().take(10) {
        lines.push(format!("witness: {}", serde_json::to_string(w).unwrap_or_default()));
    }
    CommandOutput {
        code: if report.pass { 0 } else { 1 },
        body: json!({ "report": report }),
        witnesses: serde_json::to_value(&report.witnesses).unwrap_or(Value::Null),
        lines,
    }
}

fn run(command: &Command, system: &MoranSystem) -> Result<CommandOutput, Error> {
    match command {
        Command::Validate(_) => Ok(CommandOutput {
            code: 0,
            body: json!({ "report": { "valid": true, "levels": system.preamble_len() + system.period() } }),
            witnesses: json!([]),
            lines: vec!["valid: yes".into()],
        }),
        Command::Zeros(_) => {
            let mut lines = Vec::new();
            let mut levels = Vec::new();
            for (i, l) in system.stored_levels().enumerate() {
                let dirs: Vec<String> = l.zeros.nus().map(|v| v.to_string()).collect();
                lines.push(format!("level {}: {}", i + 1, dirs.join(" ")));
                levels.push(json!({ "level": i + 1, "zeros": l.zeros }));
            }
            Ok(CommandOutput {
                code: 0,
                body: json!({ "report": { "levels": levels } }),
                witnesses: json!([]),
                lines,
            })
        }
        Command::Decide(_) => {
            let v = decide(system)?;
            let mut lines = vec![format!("verdict: {}", v.outcome), format!("criterion: {}", v.criterion)];
            if let Some(w) = &v.witness {
                lines.push(format!("witness: level {} index {} value {}", w.level, w.index, w.value));
            }
            let levels: Vec<String> = v.checked_levels.iter().map(|k| k.to_string()).collect();
            lines.push(format!("checked levels: {}", levels.join(",")));
            if let Some(a) = &v.admissibility {
                lines.push(format!(
                    "admissibility: {} ({})",
                    if a.admissible { "certified" } else { "violated" },
                    if a.unconditional { "all lengths" } else { "finite horizon" }
                ));
            }
            for c in &v.caveats {
                lines.push(format!("caveat: {c}"));
            }
            let code = match v.outcome {
                Outcome::Spectral => 0,
                Outcome::NotSpectral => 1,
                Outcome::Unknown => 2,
            };
            let witnesses = serde_json::to_value(v.witness.iter().collect::<Vec<_>>()).unwrap_or(Value::Null);
            Ok(CommandOutput {
                code,
                body: json!({ "verdict": v }),
                witnesses,
                lines,
            })
        }
        Command::Spectrum {
            levels,
            block_size,
            cap,
            ..
        } => {
            let c = construct(system, *block_size, *levels, *cap)?;
            let mut lines = vec![
                format!("block size: {}", c.decomposition.block_size),
                format!("normalized first level: {}", if c.normalization.identity { "no" } else { "yes" }),
            ];
            if c.decomposition.literal_fallback {
                lines.push("note: labels built from the short block reading".into());
            }
            let mut out_levels = Vec::new();
            for l in &c.levels {
                lines.push(format!("level {}: {} elements", l.k, l.len()));
                let shown: Vec<String> = l.elements.iter().take(12).map(|e| e.to_string()).collect();
                lines.push(format!("  {}{}", shown.join(" "), if l.len() > 12 { " ..." } else { "" }));
                let original: Vec<Value> = if c.normalization.identity {
                    Vec::new()
                } else {
                    l.elements
                        .iter()
                        .map(|e| serde_json::to_value(c.normalization.pull_back(e)).unwrap_or(Value::Null))
                        .collect()
                };
                out_levels.push(json!({
                    "level": l.k,
                    "size": l.len(),
                    "elements": l.elements,
                    "original_coordinates": original,
                }));
            }
            Ok(CommandOutput {
                code: 0,
                body: json!({ "report": {
                    "block_size": c.decomposition.block_size,
                    "directions": c.decomposition.directions,
                    "literal_fallback": c.decomposition.literal_fallback,
                    "normalized": !c.normalization.identity,
                    "levels": out_levels,
                }}),
                witnesses: json!([]),
                lines,
            })
        }
        Command::VerifyOrth {
            level,
            block_size,
            cap,
            ..
        } => {
            let c = construct(system, *block_size, *level, *cap)?;
            let lambda = &c.levels[*level].elements;
            let report = verify_orthogonality(&c.system, lambda)?;
            Ok(report_outcome(
                &report,
                vec![format!("level {level}: {} elements", lambda.len())],
            ))
        }
        Command::VerifyComplete {
            levels,
            grid,
            depth,
            block_size,
            gap_tolerance,
            cap,
            ..
        } => {
            let c = construct(system, *block_size, *levels, *cap)?;
            let opts = QScanOptions {
                grid: *grid,
                depth: *depth,
                gap_tolerance: *gap_tolerance,
                ..Default::default()
            };
            let report = q_function_scan(&c.system, &c.levels, &opts)?;
            Ok(report_outcome(
                &report,
                vec![format!("levels 0..={levels}, grid {grid}, depth {depth}")],
            ))
        }
        Command::Admissible { horizon, start, .. } => {
            let mut opts = AdmissibilityOptions::for_system(system);
            if let Some(h) = horizon {
                opts.horizon = *h;
            }
            opts.start = *start;
            let cert = admissibility_scan(system, &opts)?;
            let mut out = report_outcome(
                &cert.report,
                vec![format!(
                    "products checked: {} ({})",
                    cert.products_checked,
                    if cert.unconditional { "certificate covers all lengths" } else { "finite horizon" }
                )],
            );
            out.body = json!({ "report": cert });
            Ok(out)
        }
        Command::Render {
            level,
            format,
            out,
            size,
            cap,
            ..
        } => {
            let cloud = support_points(system, *level, *cap)?;
            render(&cloud, *format, system.prime(), *size, out)?;
            Ok(CommandOutput {
                code: 0,
                body: json!({ "report": {
                    "points": cloud.len(),
                    "strings": cloud.strings,
                    "min": cloud.min,
                    "max": cloud.max,
                    "out": out.display().to_string(),
                }}),
                witnesses: json!([]),
                lines: vec![
                    format!("points: {}", cloud.len()),
                    format!("bounding box: {:?} .. {:?}", cloud.min, cloud.max),
                    format!("written: {}", out.display()),
                ],
            })
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate(_) => "validate",
        Command::Zeros(_) => "zeros",
        Command::Decide(_) => "decide",
        Command::Spectrum { .. } => "spectrum",
        Command::VerifyOrth { .. } => "verify-orth",
        Command::VerifyComplete { .. } => "verify-complete",
        Command::Admissible { .. } => "admissible",
        Command::Render { .. } => "render",
    }
}

fn input_path(c: &Command) -> &PathBuf {
    match c {
        Command::Validate(i) | Command::Zeros(i) | Command::Decide(i) => &i.system,
        Command::Spectrum { input, .. }
        | Command::VerifyOrth { input, .. }
        | Command::VerifyComplete { input, .. }
        | Command::Admissible { input, .. }
        | Command::Render { input, .. } => &input.system,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let start = Instant::now();
    let loaded = load_system(input_path(&cli.command));
    let load_ms = start.elapsed().as_secs_f64() * 1e3;
    let result = loaded.and_then(|s| run(&cli.command, &s).map(|o| (o, s)));
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let timings = if cli.timings {
        json!({ "load_ms": load_ms, "total_ms": total_ms })
    } else {
        Value::Null
    };

    match result {
        Ok((out, system)) => {
            if cli.json {
                let mut doc = json!({
                    "schema": 1,
                    "command": name,
                    "witnesses": out.witnesses,
                    "params": system.params(),
                    "timings": timings,
                });
                if let (Some(d), Some(b)) = (doc.as_object_mut(), out.body.as_object()) {
                    for (k, v) in b {
                        d.insert(k.clone(), v.clone());
                    }
                }
                println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            } else {
                for l in &out.lines {
                    println!("{l}");
                }
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = exit_for_error(&e);
            match &e {
                Error::InvalidSystem(diags) => {
                    for d in diags {
                        eprintln!("error: {d}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            if cli.json {
                let diags = match &e {
                    Error::InvalidSystem(d) => serde_json::to_value(d).unwrap_or(Value::Null),
                    _ => json!([]),
                };
                let doc = json!({
                    "schema": 1,
                    "command": name,
                    "error": e.to_string(),
                    "diagnostics": diags,
                    "witnesses": [],
                    "params": Value::Null,
                    "timings": timings,
                });
                println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            }
            ExitCode::from(code)
        }
    }
}
