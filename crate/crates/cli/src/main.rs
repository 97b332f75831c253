//! `polyflex`: build, check, measure, flex and export triangulated surfaces.
//!
//! Exit status of `check` and `flex-frame` is the verdict: 0 Embedded,
//! 1 NotEmbedded, 2 Inconclusive. Any error exits with 3.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use polyflex::checker::{check_embedded, CheckOptions, CheckReport, Verdict};
use polyflex::flex::{
    max_edge_residual, max_embedded_t, realize_flex, scan_embeddedness, v9_displacement,
    verdict_changes, ScanSample,
};
use polyflex::model::{
    exact_model, float_model_exact, merge_split_inputs, realize_model, to_json, to_obj,
    AnimationFrame, AnyRealization, ModeTag, ModelFile, SplitInputs, DEFAULT_EPSILON,
};
use polyflex::numfield::Expr;
use polyflex::steffen::{build_steffen, volume};
use polyflex::Realization;
use serde::Serialize;

const ERROR_EXIT: u8 = 3;

#[derive(Parser)]
#[command(name = "polyflex", version, about = "Exact embeddedness checks and the Steffen flexible polyhedron")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FrameFormat {
    Json,
    Obj,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Steffen polyhedron exactly and write it as a JSON model.
    BuildSteffen {
        #[arg(long)]
        out: PathBuf,
        /// Also write a float model rounded to this many decimals.
        #[arg(long)]
        precision: Option<u32>,
        /// Path of the float model (default: `<out>` with a `.float.json` suffix).
        #[arg(long, requires = "precision")]
        float_out: Option<PathBuf>,
    },
    /// Test every edge against every face.
    Check {
        /// JSON model; omit when using --split-inputs.
        model: Option<PathBuf>,
        /// Arithmetic to use; defaults to the model's own mode.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Zero threshold in float mode.
        #[arg(long)]
        eps: Option<f64>,
        /// Settle degenerate pairs exactly instead of reporting them.
        #[arg(long)]
        resolve_degenerate: bool,
        #[arg(long)]
        out1: Option<PathBuf>,
        #[arg(long)]
        out2: Option<PathBuf>,
        /// JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Legacy CSV lists: edges, edges with coordinates, faces, faces with coordinates.
        #[arg(long, num_args = 4, value_names = ["S", "SS", "T", "TT"], conflicts_with = "model")]
        split_inputs: Option<Vec<PathBuf>>,
        /// Worker threads; 1 runs single-threaded.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Enclosed volume of a closed model.
    Volume {
        model: PathBuf,
        #[arg(long, default_value_t = 15)]
        digits: u32,
    },
    /// Realize the flexed polyhedron at one parameter value.
    FlexFrame {
        #[arg(allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FrameFormat::Json)]
        format: FrameFormat,
        /// Decimals in OBJ output.
        #[arg(long, default_value_t = 9)]
        digits: usize,
    },
    /// Check evenly spaced frames of the flex and bracket verdict changes.
    FlexScan {
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        eps: f64,
        /// Bisection tolerance for verdict changes.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Directory for one OBJ file per frame.
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long, default_value_t = 9)]
        digits: usize,
    },
    /// Write a model as Wavefront OBJ with rounded coordinates.
    ExportObj {
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 9)]
        digits: usize,
    },
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_model_file(path: &Path) -> Result<ModelFile> {
    serde_json::from_str(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load(path: &Path, eps: Option<f64>) -> Result<AnyRealization> {
    realize_model(&load_model_file(path)?, eps).with_context(|| format!("loading {}", path.display()))
}

fn lines_text(lines: &[String]) -> String {
    lines.iter().map(|l| format!("{l}\n")).collect()
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    mode: &'static str,
    epsilon: Option<f64>,
    exit_code: i32,
    #[serde(flatten)]
    report: &'a CheckReport,
    out1_lines: Vec<String>,
    out2_lines: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    model: Option<PathBuf>,
    mode: Option<Mode>,
    eps: Option<f64>,
    resolve_degenerate: bool,
    out1: Option<PathBuf>,
    out2: Option<PathBuf>,
    report: Option<PathBuf>,
    split_inputs: Option<Vec<PathBuf>>,
    threads: Option<usize>,
) -> Result<Verdict> {
    let mut file = match (model, split_inputs) {
        (Some(p), None) => load_model_file(&p)?,
        (None, Some(paths)) => {
            let [s, ss, t, tt] = [0, 1, 2, 3].map(|i| read_file(&paths[i]));
            let (s, ss, t, tt) = (s?, ss?, t?, tt?);
            let tag = match mode {
                Some(Mode::Float) => ModeTag::Float,
                _ => ModeTag::Exact,
            };
            merge_split_inputs(&SplitInputs { s: &s, ss: &ss, t: &t, tt: &tt }, tag)?
        }
        _ => bail!("give a model path or --split-inputs"),
    };
    // float files may be read exactly: decimal strings are exact rationals
    if let Some(Mode::Exact) = mode {
        file.mode = ModeTag::Exact;
    }
    let eps_used = eps.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
    let opts = CheckOptions { resolve_degenerate, threads };
    let (rep, mode_name, epsilon) = match (realize_model(&file, eps)?, mode) {
        (AnyRealization::Exact(r), Some(Mode::Float)) => {
            (check_embedded(&r.to_float(eps_used)?, opts)?, "float", Some(eps_used))
        }
        (AnyRealization::Exact(r), _) => (check_embedded(&r, opts)?, "exact", None),
        (AnyRealization::Float(r), _) => (check_embedded(&r, opts)?, "float", Some(eps_used)),
    };
    let (l1, l2) = (rep.out1_lines(), rep.out2_lines());
    if let Some(p) = out1 {
        write_file(&p, &lines_text(&l1))?;
    }
    if let Some(p) = out2 {
        write_file(&p, &lines_text(&l2))?;
    }
    if let Some(p) = report {
        let out = CheckOutput {
            mode: mode_name,
            epsilon,
            exit_code: rep.verdict.exit_code(),
            report: &rep,
            out1_lines: l1.clone(),
            out2_lines: l2.clone(),
        };
        write_file(&p, &serde_json::to_string_pretty(&out)?)?;
    }
    for l in l1.iter().chain(&l2) {
        println!("{l}");
    }
    println!(
        "verdict: {:?} ({} pairs, {} mode)",
        rep.verdict, rep.pairs_scanned, mode_name
    );
    Ok(rep.verdict)
}

fn cmd_build_steffen(out: PathBuf, precision: Option<u32>, float_out: Option<PathBuf>) -> Result<()> {
    let m = build_steffen()?;
    let file = exact_model(&m.realization);
    write_file(&out, &to_json(&file))?;
    println!(
        "wrote {} ({} vertices, {} edges, {} faces, tower depth {})",
        out.display(),
        file.vertices.len(),
        file.edges.len(),
        file.faces.len(),
        m.tower.depth()
    );
    if let Some(digits) = precision {
        let path = float_out.unwrap_or_else(|| out.with_extension("float.json"));
        write_file(&path, &to_json(&float_model_exact(&m.realization, digits, DEFAULT_EPSILON)))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_volume(model: PathBuf, digits: u32) -> Result<()> {
    match load(&model, None)? {
        AnyRealization::Exact(r) => {
            let v = volume(&r)?;
            println!("exact: {v}");
            println!("expr: {}", serde_json::to_string(&Expr::from_elem(&v))?);
            println!("decimal: {}", v.approx(digits + 5).to_decimal_string(digits));
        }
        AnyRealization::Float(r) => {
            let v = volume(&r)?;
            println!("decimal: {v:.*}", digits as usize);
        }
    }
    Ok(())
}

fn frame_text(t: f64, r: &Realization<f64>, format: FrameFormat, digits: usize) -> Result<String> {
    Ok(match format {
        FrameFormat::Json => serde_json::to_string_pretty(&AnimationFrame::from_realization(t, r))?,
        FrameFormat::Obj => to_obj(r, digits),
    })
}

fn cmd_flex_frame(
    t: f64,
    eps: f64,
    out: Option<PathBuf>,
    format: FrameFormat,
    digits: usize,
) -> Result<Verdict> {
    let frame = realize_flex(t, eps)?;
    let rep = check_embedded(&frame.realization, CheckOptions::default())?;
    if let Some(p) = out {
        write_file(&p, &frame_text(t, &frame.realization, format, digits)?)?;
    }
    for l in rep.out1_lines().iter().chain(&rep.out2_lines()) {
        println!("{l}");
    }
    println!("t: {t}");
    println!("max edge residual: {:e}", max_edge_residual(&frame));
    println!("verdict: {:?}", rep.verdict);
    Ok(rep.verdict)
}

#[derive(Serialize)]
struct Bracket {
    from: f64,
    to: f64,
    lo: f64,
    hi: f64,
    chord_at_lo: f64,
    arc_at_lo: f64,
}

#[derive(Serialize)]
struct ScanReport {
    from: f64,
    to: f64,
    steps: usize,
    epsilon: f64,
    samples: Vec<ScanSample>,
    brackets: Vec<Bracket>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_flex_scan(
    from: f64,
    to: f64,
    steps: usize,
    eps: f64,
    tolerance: f64,
    report: Option<PathBuf>,
    frames: Option<PathBuf>,
    digits: usize,
) -> Result<()> {
    if !(from.is_finite() && to.is_finite() && from < to) {
        bail!("need a finite range with --from < --to");
    }
    let samples = scan_embeddedness(from, to, steps, eps);
    for s in &samples {
        let v = match (&s.verdict, &s.error) {
            (Some(v), _) => format!("{v:?}"),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "unknown".into(),
        };
        println!("t = {:+.6}  {v}", s.t);
    }
    let mut brackets = Vec::new();
    for (a, b) in verdict_changes(&samples) {
        let sa = samples.iter().find(|s| s.t == a).expect("sample exists");
        let sb = samples.iter().find(|s| s.t == b).expect("sample exists");
        let embedded = |s: &ScanSample| s.verdict == Some(Verdict::Embedded);
        // orient the bracket from the Embedded side
        let (lo, hi) = match (embedded(sa), embedded(sb)) {
            (true, false) => max_embedded_t(a, b, tolerance, eps)?,
            (false, true) => max_embedded_t(b, a, tolerance, eps)?,
            _ => (a, b),
        };
        let (chord, arc) = v9_displacement(lo);
        println!("verdict changes between {a:.6} and {b:.6}; bisection bracket ({lo:.7}, {hi:.7})");
        println!("  v9 displacement from -t to t at {lo:.7}: chord {chord:.6}, arc {arc:.6}");
        brackets.push(Bracket {
            from: a,
            to: b,
            lo,
            hi,
            chord_at_lo: chord,
            arc_at_lo: arc,
        });
    }
    if let Some(dir) = frames {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, s) in samples.iter().enumerate() {
            if s.error.is_some() {
                continue;
            }
            let f = realize_flex(s.t, eps)?;
            write_file(&dir.join(format!("frame_{i:05}.obj")), &to_obj(&f.realization, digits))?;
        }
    }
    if let Some(p) = report {
        let rep = ScanReport {
            from,
            to,
            steps,
            epsilon: eps,
            samples,
            brackets,
        };
        write_file(&p, &serde_json::to_string_pretty(&rep)?)?;
    }
    Ok(())
}

fn cmd_export_obj(model: PathBuf, out: PathBuf, digits: usize) -> Result<()> {
    let text = match load(&model, None)? {
        AnyRealization::Exact(r) => to_obj(&r, digits),
        AnyRealization::Float(r) => to_obj(&r, digits),
    };
    write_file(&out, &text)
}

fn run(cli: Cli) -> Result<Option<Verdict>> {
    Ok(match cli.command {
        Command::BuildSteffen {
            out,
            precision,
            float_out,
        } => cmd_build_steffen(out, precision, float_out).map(|_| None)?,
        Command::Check {
            model,
            mode,
            eps,
            resolve_degenerate,
            out1,
            out2,
            report,
            split_inputs,
            threads,
        } => Some(cmd_check(
            model,
            mode,
            eps,
            resolve_degenerate,
            out1,
            out2,
            report,
            split_inputs,
            threads,
        )?),
        Command::Volume { model, digits } => cmd_volume(model, digits).map(|_| None)?,
        Command::FlexFrame {
            t,
            eps,
            out,
            format,
            digits,
        } => Some(cmd_flex_frame(t, eps, out, format, digits)?),
        Command::FlexScan {
            from,
            to,
            steps,
            eps,
            tolerance,
            report,
            frames,
            digits,
        } => cmd_flex_scan(from, to, steps, eps, tolerance, report, frames, digits).map(|_| None)?,
        Command::ExportObj { model, out, digits } => cmd_export_obj(model, out, digits).map(|_| None)?,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ERROR_EXIT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Some(v)) => ExitCode::from(v.exit_code() as u8),
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", error_chain(&e));
            ExitCode::from(ERROR_EXIT)
        }
    }
}

/// Context messages joined by ": ", skipping causes already spelled out by
/// the message above them.
fn error_chain(e: &anyhow::Error) -> String {
    let mut out: Vec<String> = Vec::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.last().is_some_and(|prev| prev.contains(&msg)) {
            out.push(msg);
        }
    }
    out.join(": ")
}
