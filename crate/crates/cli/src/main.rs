use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cssep::document::{Format, StateDocument};
use cssep::engine::{self, EngineOptions, Verdict};
use cssep::{gme, named, random, states, structured, DensityMatrix, Error, Tolerances};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cssep", version, about = "Separability tools for completely symmetric states")]
struct Cli {
    /// Input document (default: stdin).
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_rank: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_psd: f64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DocFormat {
    Dense,
    CsCompressed,
}

impl From<DocFormat> for Format {
    fn from(f: DocFormat) -> Self {
        match f {
            DocFormat::Dense => Format::Dense,
            DocFormat::CsCompressed => Format::CsCompressed,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Report whether the state is completely symmetric.
    CheckCs,
    /// Partial trace over the listed parties (zero-based).
    Ptrace {
        #[arg(long, value_delimiter = ',', required = true)]
        trace: Vec<usize>,
    },
    /// Smallest partial-transpose eigenvalue of every cut.
    Ppt,
    /// Run the decision procedure.
    Classify,
    /// Classify and report the S-separable decomposition.
    Decompose,
    /// Geometric measure of entanglement of a nonnegative symmetric state.
    Gme {
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
    },
    /// Hankel moments to a CS state and its Vandermonde decomposition, or
    /// the Dicke matrix of the input state.
    Hankel {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        moments: Option<Vec<f64>>,
    },
    /// Classify random Toeplitz states, one JSON line per sample.
    ToeplitzScan {
        #[arg(long)]
        parties: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Emit a named state document.
    Example {
        #[arg(long)]
        name: String,
        #[arg(long, value_enum, default_value = "dense")]
        format: DocFormat,
        /// Party count for `random-separable` and `dicke`.
        #[arg(long)]
        parties: Option<usize>,
        /// Local dimension for `random-separable`, excitation index for `dicke`.
        #[arg(long)]
        dim: Option<usize>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Numeric(_)) { 4 } else { 3 };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 3, message: message.into() }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    let mut s = String::new();
    match path {
        Some(p) => s = std::fs::read_to_string(p).map_err(|e| input_error(format!("{}: {e}", p.display())))?,
        None => {
            std::io::stdin().read_to_string(&mut s).map_err(|e| input_error(e.to_string()))?;
        }
    }
    Ok(s)
}

fn read_state(cli: &Cli) -> Result<(StateDocument, DensityMatrix), Failure> {
    let doc = StateDocument::parse(&read_input(&cli.input)?)?;
    let tol = tolerances(cli);
    let st = doc.to_state(&tol)?;
    Ok((doc, st))
}

fn tolerances(cli: &Cli) -> Tolerances {
    Tolerances { rank: cli.tol_rank, psd: cli.tol_psd, ..Tolerances::default() }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Separable => 0,
        Verdict::Entangled => 1,
        Verdict::Undetermined => 2,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn named_state(name: &str, parties: Option<usize>, dim: Option<usize>, seed: u64) -> Result<DensityMatrix, Failure> {
    let blokovi = || named::build_blokovi(1.0, 1.0, 1.0, 1.0, 1e-2);
    Ok(match name {
        "sigma" => named::build_sigma(&named::DEFAULT_SIGMA_WEIGHTS)?.state.normalized(),
        "entangled-rank6" => named::build_entangled_rank6(&named::DEFAULT_SIGMA_WEIGHTS)?.state.normalized(),
        "nonnegative" => gme::conditioned_state()?.1,
        "blokovi-alpha" => blokovi()?.alpha.normalized(),
        "blokovi-beta" => named::embed_in_four_by_four(&blokovi()?.beta)?.normalized(),
        "blokovi-rho" => named::embed_in_four_by_four(&blokovi()?.rho)?.normalized(),
        "complex-product" => named::complex_product_example()?.normalized(),
        "dicke" => {
            let d = parties.ok_or_else(|| input_error("dicke needs --parties"))?;
            let k = dim.unwrap_or(d / 2);
            let v = cssep::tensors::dicke(d, k)?;
            DensityMatrix::from_real(&(&v * v.transpose()), vec![2; d])?
        }
        "random-separable" => {
            let d = parties.ok_or_else(|| input_error("random-separable needs --parties"))?;
            let n = dim.ok_or_else(|| input_error("random-separable needs --dim"))?;
            cssep::tensors::checked_pow(n, d)?;
            let mut rng = random::rng(seed);
            random::s_separable(n, d, n + 1, &mut rng).state
        }
        other => {
            return Err(input_error(format!(
                "unknown example `{other}` (sigma, entangled-rank6, nonnegative, blokovi-alpha, blokovi-beta, blokovi-rho, complex-product, dicke, random-separable)"
            )))
        }
    })
}

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    let engine_opts = EngineOptions {
        tol: tolerances(cli),
        search: cssep::product::SearchOptions { seed: cli.seed, ..Default::default() },
        ..Default::default()
    };
    let line = |v: Value| format!("{v}\n");
    match &cli.cmd {
        Cmd::CheckCs => {
            let (_, st) = read_state(cli)?;
            let dev = states::cs_deviation(&st);
            Ok((line(json!({ "cs": dev <= cli.tol_rank.max(1e-10), "deviation": dev })), 0))
        }
        Cmd::Ptrace { trace } => {
            let (doc, st) = read_state(cli)?;
            let red = states::partial_trace(&st, trace)?;
            let fmt = if doc.format == Format::CsCompressed && states::is_cs(&red, 1e-10) { Format::CsCompressed } else { Format::Dense };
            Ok((line(to_value(&StateDocument::from_state(&red, fmt)?)), 0))
        }
        Cmd::Ppt => {
            let (_, st) = read_state(cli)?;
            let r = states::ppt_report(&st, cli.tol_psd);
            let cuts: Vec<Value> = r.cuts.iter().map(|(p, v)| json!({ "parties": p, "minEigenvalue": v })).collect();
            Ok((line(json!({ "ppt": r.ppt, "cuts": cuts, "lambdaMax": r.lambda_max })), 0))
        }
        Cmd::Classify | Cmd::Decompose => {
            let (_, st) = read_state(cli)?;
            let cert = engine::classify_with(&st, &engine_opts)?;
            let mut v = to_value(&cert);
            if matches!(cli.cmd, Cmd::Decompose) {
                v["bisep"] = to_value(&engine::bisep_equals_fullsep_check(&cert));
            } else if let Some(obj) = v.as_object_mut() {
                obj.remove("decomposition");
                obj.insert("terms".into(), json!(cert.decomposition.as_ref().map(|t| t.len())));
            }
            Ok((line(v), verdict_code(cert.verdict)))
        }
        Cmd::Gme { max_iter } => {
            let (_, st) = read_state(cli)?;
            let r = gme::gme_power_iteration(&st, &gme::GmeOptions { seed: cli.seed, max_iter: *max_iter, ..Default::default() })?;
            let code = if r.converged { 0 } else { 4 };
            Ok((line(to_value(&r)), code))
        }
        Cmd::Hankel { moments: Some(a) } => {
            let st = structured::hankel_to_state(a)?;
            let h = structured::hankel_matrix(a)?;
            let terms = structured::hankel_psd_decompose(&h)?;
            let doc = StateDocument::from_state(&st, Format::CsCompressed)?;
            Ok((line(json!({ "moments": a, "terms": to_value(&terms), "state": to_value(&doc) })), 0))
        }
        Cmd::Hankel { moments: None } => {
            let (_, st) = read_state(cli)?;
            let dm = structured::state_to_dicke_matrix(&st)?;
            let rows = |m: &cssep::linalg::RMat| -> Vec<Vec<f64>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
            let coeff = dm.coefficients();
            let terms = if dm.flags.hankel { Some(to_value(&structured::hankel_psd_decompose(&coeff)?)) } else { None };
            Ok((line(json!({ "dickeMatrix": rows(&dm.m), "coefficients": rows(&coeff), "flags": to_value(&dm.flags), "structure": dm.structure(), "terms": terms })), 0))
        }
        Cmd::ToeplitzScan { parties, samples } => {
            let report = structured::toeplitz_scan(*samples, *parties, cli.seed)?;
            eprintln!("{}", report.summary_json());
            let code = if report.counts.entangled > 0 { 1 } else { 0 };
            Ok((report.to_json_lines(), code))
        }
        Cmd::Example { name, format, parties, dim } => {
            let st = named_state(name, *parties, *dim, cli.seed)?;
            let doc = StateDocument::from_state(&st, (*format).into())?.named(name);
            Ok((line(to_value(&doc)), 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
