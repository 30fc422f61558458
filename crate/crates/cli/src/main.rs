use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dfskit::construct::{paper_example, sign_twisted_example};
use dfskit::io::{matrix_to_json, parse, to_json, ChannelFile, MatrixJson, TensorFile, TensorListFile};
use dfskit::mps::{basis_dedup, expand, is_irreducible_tensor, is_repeated, mps_sum, MpsTensor};
use dfskit::report::{pi_label, round9, DecompositionReport, DfsListing};
use dfskit::structure::{decomposition, Mode};
use dfskit::{KrausChannel, StructureDecomposition, Tolerance};
use serde::Serialize;

mod verify;

macro_rules! emitln {
    ($($arg:tt)*) => {
        emit(&format!("{}\n", format_args!($($arg)*)))
    };
}

const LABEL_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "dfskit", version, about = "Block structure and decoherence-free subsystems of quantum channels")]
struct Cli {
    /// Relative tolerance for every rank and magnitude-one decision.
    #[arg(long, global = true, env = "DFSKIT_TOL", default_value_t = Tolerance::DEFAULT, value_parser = parse_tol)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a channel file is trace preserving.
    Validate(Input),
    /// Decompose a channel into blocks and a decaying remainder.
    Decompose(Analysis),
    /// List the maximal decoherence-free subsystems and their capacities.
    Dfs(Analysis),
    /// Repeated-tensor analyses of MPS tensors.
    #[command(subcommand)]
    Mps(MpsCommand),
}

#[derive(Args)]
struct Input {
    /// Channel file: {"dim": D, "kraus": [matrix, ...]}.
    #[arg(required_unless_present_any = ["paper_example", "twisted_example"])]
    file: Option<PathBuf>,
    /// Use the built-in worked example on C^4 ⊗ C^3 instead of a file.
    #[arg(long, conflicts_with_all = ["file", "twisted_example"])]
    paper_example: bool,
    /// Use the built-in example with an aperiodic base channel.
    #[arg(long, conflicts_with = "file")]
    twisted_example: bool,
}

#[derive(Args)]
struct Analysis {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    /// Emit JSON (the default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit a human-readable report.
    #[arg(long)]
    text: bool,
    /// Run independent checks and exit 1 if any fails.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Noiseless,
}

#[derive(Subcommand)]
enum MpsCommand {
    /// Decide whether A_k = e^{iθ} U B_k U† for a phase θ and unitary U.
    Repeated {
        a: PathBuf,
        b: PathBuf,
        /// Where to write {"theta", "unitary"} when the tensors are repeated.
        #[arg(long, default_value = "unitary.json")]
        out: PathBuf,
    },
    /// Decide whether a tensor's transfer channel is irreducible.
    Irreducible { a: PathBuf },
    /// Reduce a weighted tensor list to non-repeated representatives.
    Basis {
        list: PathBuf,
        /// Cross-check the reduced sum against the original for n = 1..=check.
        #[arg(long, default_value_t = 5)]
        check: usize,
    },
    /// Print the coefficients tr(A_{k1} ⋯ A_{kn}) as JSON.
    Expand {
        a: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Tolerance::new(v).map(Tolerance::value).map_err(|e| e.to_string())
}

/// Exit 2 for unusable input, 1 for a failed check or analysis.
enum Failure {
    Input(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Check(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

fn analysis_error(e: dfskit::Error) -> Failure {
    Failure::Check(e.to_string())
}

/// Writes to stdout; a closed pipe ends the process quietly.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|()| out.flush()).is_err() {
        std::process::exit(0);
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_channel(input: &Input) -> Result<KrausChannel, Failure> {
    if input.paper_example {
        return Ok(paper_example());
    }
    if input.twisted_example {
        return Ok(sign_twisted_example());
    }
    let path = input.file.as_deref().expect("clap enforces a file or an example flag");
    let file: ChannelFile = parse(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    file.to_channel().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_tensor(path: &Path) -> Result<MpsTensor, Failure> {
    let file: TensorFile = parse(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    file.to_tensor().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Fixed notation for moderate values, scientific for tiny ones.
fn num(x: f64) -> String {
    if x == 0.0 || x.abs() >= 1e-4 {
        format!("{}", round9(x))
    } else {
        format!("{x:.3e}")
    }
}

fn theta_text(theta: f64) -> String {
    match pi_label(theta, LABEL_TOL) {
        Some(l) => format!("{:.9} (={l})", round9(theta)),
        None => format!("{:.9}", round9(theta)),
    }
}

fn validate(input: &Input, tol: Tolerance) -> Result<(), Failure> {
    let ch = load_channel(input)?;
    let r = ch.cptp_report(tol);
    emitln!(
        "dim {}, {} Kraus operators, trace-preserving: {}, defect {} (tol {:e})",
        ch.dim(),
        ch.kraus().len(),
        if r.trace_preserving { "yes" } else { "no" },
        num(r.defect),
        tol.value()
    );
    if r.trace_preserving {
        Ok(())
    } else {
        Err(Failure::Check(format!("not trace preserving: defect {} exceeds {:e}", num(r.defect), tol.value())))
    }
}

fn analyse(args: &Analysis, tol: Tolerance) -> Result<(KrausChannel, StructureDecomposition), Failure> {
    let ch = load_channel(&args.input)?;
    let r = ch.cptp_report(tol);
    if !r.trace_preserving {
        return Err(Failure::Check(format!(
            "not trace preserving: defect {} exceeds {:e}",
            num(r.defect),
            tol.value()
        )));
    }
    let mode = match args.mode {
        ModeArg::Full => Mode::Full,
        ModeArg::Noiseless => Mode::Noiseless,
    };
    let dec = decomposition(&ch, tol, args.seed, mode).map_err(analysis_error)?;
    Ok((ch, dec))
}

fn run_verify(args: &Analysis, ch: &KrausChannel, dec: &StructureDecomposition, tol: Tolerance) -> Result<(), Failure> {
    if !args.verify {
        return Ok(());
    }
    let checks = verify::run(ch, dec, tol, args.seed);
    for c in &checks {
        eprintln!("{}", c.line());
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passes()).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("verification failed: {}", failed.join(", "))))
    }
}

fn decompose(args: &Analysis, tol: Tolerance) -> Result<(), Failure> {
    let (ch, dec) = analyse(args, tol)?;
    let report = DecompositionReport::new(&ch, &dec, tol.value(), args.seed);
    if args.text {
        emit(&report.to_text());
    } else {
        emitln!("{}", report.to_json());
    }
    run_verify(args, &ch, &dec, tol)
}

fn dfs(args: &Analysis, tol: Tolerance) -> Result<(), Failure> {
    let (ch, dec) = analyse(args, tol)?;
    let listing = DfsListing::new(&dec, tol.value(), args.seed);
    if args.text {
        emit(&listing.to_text());
    } else {
        emitln!("{}", listing.to_json());
    }
    run_verify(args, &ch, &dec, tol)
}

#[derive(Serialize)]
struct UnitaryFile {
    theta: f64,
    unitary: MatrixJson,
}

#[derive(Serialize)]
struct Expansion {
    n: usize,
    phys_dim: usize,
    coefficients: Vec<[f64; 2]>,
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn mps(cmd: &MpsCommand, tol: Tolerance) -> Result<(), Failure> {
    match cmd {
        MpsCommand::Repeated { a, b, out } => {
            let (ta, tb) = (load_tensor(a)?, load_tensor(b)?);
            let v = is_repeated(&ta, &tb, tol).map_err(analysis_error)?;
            match (v.theta, v.intertwiner) {
                (Some(theta), Some(u)) if v.repeated => {
                    write(out, &to_json(&UnitaryFile { theta, unitary: matrix_to_json(&u) }))?;
                    emitln!("repeated, theta={}, U written to {}", theta_text(theta), out.display());
                }
                _ => emitln!("not repeated"),
            }
        }
        MpsCommand::Irreducible { a } => {
            let t = load_tensor(a)?;
            let irreducible = is_irreducible_tensor(&t, tol).map_err(analysis_error)?;
            emitln!("{}", if irreducible { "irreducible" } else { "reducible" });
        }
        MpsCommand::Basis { list, check } => {
            let file: TensorListFile =
                parse(&read(list)?).map_err(|e| Failure::Input(format!("{}: {e}", list.display())))?;
            let input = file.to_weighted().map_err(|e| Failure::Input(format!("{}: {e}", list.display())))?;
            let reps = basis_dedup(&input, tol).map_err(analysis_error)?;
            emitln!("{} of {} tensors are representatives", reps.len(), input.len());
            for (i, r) in reps.iter().enumerate() {
                let w: Vec<String> = r.weights.iter().map(|w| format!("{}{:+}i", num(w.re), num(w.im))).collect();
                emitln!("representative {i}: bond {}, weights [{}]", r.tensor.bond_dim(), w.join(", "));
            }
            let mut worst = 0.0f64;
            for n in 1..=*check {
                let x = mps_sum(&input, n).map_err(analysis_error)?;
                let y = mps_sum(&reps, n).map_err(analysis_error)?;
                worst = worst.max((&x - y).norm() / x.norm().max(1.0));
            }
            let bound = 10.0 * tol.value();
            let ok = worst <= bound;
            emitln!("sum cross-check n<={check}: {} (error {worst:.3e})", if ok { "passes" } else { "FAILS" });
            if !ok {
                return Err(Failure::Check(format!("reduced sum deviates by {worst:e} > {bound:e}")));
            }
        }
        MpsCommand::Expand { a, n } => {
            let t = load_tensor(a)?;
            let v = expand(&t, *n).map_err(analysis_error)?;
            let e = Expansion { n: *n, phys_dim: t.phys_dim(), coefficients: v.iter().map(|z| [z.re, z.im]).collect() };
            emitln!("{}", to_json(&e));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let tol = Tolerance(cli.tol);
    match &cli.command {
        Command::Validate(input) => validate(input, tol),
        Command::Decompose(args) => decompose(args, tol),
        Command::Dfs(args) => dfs(args, tol),
        Command::Mps(cmd) => mps(cmd, tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dfskit: {f}");
            ExitCode::from(f.code())
        }
    }
}
