//! `tracepart`: trace-partition tables, Kloosterman spectra and the
//! trace-based generator from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tracepart::Error;

const AFTER_HELP: &str = "\
FIELD SPECIFICATION
    A field is given on one line as
        p=<prime> m=<degree> modulus=<c0,c1,...,cm>
    with the monic modulus listed constant term first, either inline with
    --field or in a file named by --field-file. Elements such as --u use the
    same coefficient order: --u 0,1,0,2 is x + 2x^3.

OUTPUT FORMATS
    btable --format csv     header h,k,count, one line per entry, row-major
    btable --format json    {\"schema\":1,\"p\":..,\"m\":..,\"s\":..,\"u\":..,\"method\":..,\"table\":[[..]]}
    kloosterman             header t,c_0,...,c_{p-1},real_value
    verify, audit, field    one JSON document with \"schema\":1
    prng                    one decimal value per line

ENTROPY
    --entropy os            operating-system randomness (default)
    --entropy file:<path>   bytes of a file; running out is an error
    --entropy seed:<hex>    deterministic ChaCha20 stream, 1 to 32 seed bytes

EXIT STATUS
    0   success
    1   a verification or audit verdict failed
    2   invalid arguments, malformed input or failed validation
    3   math-level failure, such as a non-integer table entry
    4   entropy source exhausted or failed
    5   I/O error while reading input or writing output

    Errors are written to standard error as one JSON line,
    {\"error\":\"<kind>\",\"message\":\"<text>\"}.

EXAMPLES
    tracepart btable --field 'p=3 m=5 modulus=1,1,2,2,0,1' --u 0,1,0,2 --method all
    tracepart verify --field 'p=5 m=5 modulus=3,2,1,3,4,1' --u 0,3,2,1
    tracepart prng --field 'p=5 m=5 modulus=3,2,1,3,4,1' --u 0,3,2,1 \\
        --count 100000 --entropy seed:01 | tracepart audit --bins 4 --min 1";

#[derive(Debug, Parser)]
#[command(
    name = "tracepart",
    version,
    about = "Trace partitions of finite fields under z -> u/z",
    long_about = "Builds the cardinality tables B_hk of the trace partition of GF(p^m) under \
the involution f(z) = u/z, checks their symmetries, computes Kloosterman spectra exactly, and \
runs the trace-based uniform generator R = Tr(u/gamma).",
    after_long_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Describe a field: order, primitivity of the modulus, subfields.
    Field(FieldCmd),
    /// Compute the table B_hk by one or all methods.
    Btable(BtableCmd),
    /// Kloosterman spectrum K(t*u), t = 1..p-1, as CSV.
    Kloosterman(KloostermanCmd),
    /// Check symmetry, row permutation, column-0 constancy, row sums and
    /// the Weil envelope.
    Verify(VerifyCmd),
    /// Emit generator outputs, one per line.
    Prng(PrngCmd),
    /// Chi-square uniformity audit of integers read one per line.
    Audit(AuditCmd),
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// Field specification text, e.g. 'p=3 m=5 modulus=1,1,2,2,0,1'.
    #[arg(long, value_name = "SPEC", conflicts_with = "field_file")]
    field: Option<String>,
    /// File holding the one-line field specification.
    #[arg(long, value_name = "PATH")]
    field_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FieldCmd {
    #[command(flatten)]
    field: FieldArgs,
    /// Also list GF(p^s) in table order.
    #[arg(long)]
    s: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Bruteforce,
    NormIndicator,
    Kloosterman,
    ClosedForm,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct BtableCmd {
    #[command(flatten)]
    field: FieldArgs,
    /// Parameter u as coefficients, constant term first.
    #[arg(long, value_name = "COEFFS")]
    u: String,
    /// Degree of the base field GF(p^s); must divide m.
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Bruteforce)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KloostermanCmd {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_name = "COEFFS")]
    u: String,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyCmd {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_name = "COEFFS")]
    u: String,
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Testing hook: add one to entry (h,k) before checking.
    #[arg(long, value_name = "H,K")]
    inject_fault: Option<String>,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Strict,
    Relaxed,
}

#[derive(Debug, Args)]
struct PrngCmd {
    /// Field of the generator; not used with --width.
    #[command(flatten)]
    field: FieldArgs,
    /// Secret u; not used with --width, where it is drawn from the entropy.
    #[arg(long, value_name = "COEFFS")]
    u: Option<String>,
    /// Degree of the base field [default: 1].
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 10)]
    count: u64,
    /// Reduce to [0, w-1] through a prime Q = 2*mu*w + 1 and GF(Q^2).
    #[arg(long, value_name = "W")]
    width: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    mode: ModeArg,
    /// os, file:<path> or seed:<hex>.
    #[arg(long, default_value = "os")]
    entropy: String,
}

#[derive(Debug, Args)]
struct AuditCmd {
    #[arg(long)]
    bins: usize,
    /// Value of the first bin.
    #[arg(long, default_value_t = 0)]
    min: u64,
    #[arg(long, default_value_t = tracepart::prng::DEFAULT_SIGNIFICANCE)]
    significance: f64,
    /// Read samples from this file instead of standard input.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
}

/// Failure of a subcommand, mapped onto an exit status.
#[derive(Debug)]
pub(crate) enum Failure {
    Lib(Error),
    Usage(String),
    Io(String),
    /// Table methods produced different tables; output was still written.
    Disagreement(String),
    /// A verdict came out negative; the report has already been written.
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verdict => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 5,
            Failure::Disagreement(_) => 3,
            Failure::Lib(e) => match e {
                Error::NonIntegerCollapse(_)
                | Error::NonRealResult(_)
                | Error::ZeroInverse
                | Error::NoPrimitiveFound
                | Error::SearchLimitExceeded { .. } => 3,
                Error::EntropyExhausted | Error::EntropyFailure(_) | Error::RejectionLimit(_) => 4,
                _ => 2,
            },
        }
    }

    fn report(&self) -> Option<String> {
        let (kind, message) = match self {
            Failure::Verdict => return None,
            Failure::Usage(m) => ("Usage", m.clone()),
            Failure::Io(m) => ("Io", m.clone()),
            Failure::Disagreement(m) => ("MethodDisagreement", m.clone()),
            Failure::Lib(e) => (e.kind(), e.to_string()),
        };
        Some(serde_json::json!({ "error": kind, "message": message }).to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                "missing subcommand or argument; see --help".to_string()
            } else {
                let rendered = e.render().to_string();
                let first = rendered
                    .lines()
                    .find(|l| !l.trim().is_empty())
                    .unwrap_or("");
                first.trim_start_matches("error: ").trim().to_string()
            };
            let failure = Failure::Usage(message);
            eprintln!("{}", failure.report().unwrap());
            return ExitCode::from(failure.exit_code());
        }
    };
    let result = match cli.command {
        Command::Field(c) => commands::field(c),
        Command::Btable(c) => commands::btable(c),
        Command::Kloosterman(c) => commands::kloosterman(c),
        Command::Verify(c) => commands::verify(c),
        Command::Prng(c) => commands::prng(c),
        Command::Audit(c) => commands::audit(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if let Some(line) = failure.report() {
                eprintln!("{line}");
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
