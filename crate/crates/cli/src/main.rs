use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use iwasawa_core::growth::{sha_table, validate_scenario, GrowthScenario, ShaRow};
use iwasawa_core::kobayashi::{
    nabla_closed_form, nabla_resultant_oracle, nabla_snf_oracle, nabla_snf_oracle_adaptive,
    NablaMethod, NablaResult, TowerOfQuotients,
};
use iwasawa_core::logmat::{
    h_matrix, m_convergence_gap, m_matrix, signature_from_matrix, valuation_matrix,
    valuation_matrix_closed_form, LocalCurveData, Sign, ValuationMatrix,
};
use iwasawa_core::selfcheck::{run_selfcheck, SelfcheckConfig};
use iwasawa_core::{Error, ExtendedRational, IwaPoly, Prime};

#[derive(Parser)]
#[command(name = "iwasawa", version, about = "Exact local Iwasawa theory at supersingular primes")]
struct Cli {
    /// Indented JSON and aligned tables instead of compact output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print H_n or M_n as a matrix of polynomials.
    Logmat {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        av: i64,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "h")]
        which: Which,
    },
    /// Valuations of H_n(eps_n), computed and closed form, with the signature.
    Valmat {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        av: i64,
        #[arg(long)]
        n: u32,
    },
    /// Kobayashi rank of Lambda/(f, omega_n).
    Kobrank {
        #[arg(long)]
        p: u64,
        /// Coefficients of f, constant term first, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        n: u32,
        /// closed_form, resultant_oracle, snf_oracle or all.
        #[arg(long, value_delimiter = ',', default_value = "closed_form")]
        methods: Vec<MethodArg>,
        /// Working precision p^N of the lattice computation; adaptive when absent.
        #[arg(long)]
        prec: Option<u32>,
        /// Rank of the coefficient ring over Z_p.
        #[arg(long, default_value_t = 1)]
        coeff_degree: u32,
    },
    /// Predicted growth of e(Sha_p) from a scenario file.
    Growth {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        n_max: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// min ord_p(M_(n+1) - M_n) over low-degree coefficients.
    Gap {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        av: i64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 10)]
        deg_cap: usize,
    },
    /// Run every consistency check; exit 0 iff all pass.
    Selfcheck {
        #[arg(long, value_delimiter = ',', default_value = "3,5")]
        p: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        n_max: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    H,
    M,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MethodArg {
    ClosedForm,
    ResultantOracle,
    SnfOracle,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::PrecisionExhausted(_) | Error::IndeterminateValuation => 3,
            Error::NotFinite(_)
            | Error::PhiDividesF(_)
            | Error::NonUnitLeadingCoefficient
            | Error::DivisionByZero => 4,
            Error::InfiniteTerm { .. } => 5,
            Error::NonIntegerResult(_) | Error::Overflow(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn validation(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn emit<T: Serialize>(value: &T, pretty: bool) -> CmdResult {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| validation(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn local_data(p: u64, av: i64) -> Result<LocalCurveData, Failure> {
    Ok(LocalCurveData::new(Prime::new(p)?, av, vec![1])?)
}

fn require_level(n: u32) -> CmdResult {
    if n == 0 {
        return Err(validation("--n must be at least 1"));
    }
    Ok(())
}

fn parse_coeffs(prime: Prime, text: &str) -> Result<IwaPoly, Failure> {
    let coeffs = text
        .split(',')
        .map(|s| s.trim().parse::<BigInt>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| validation(format!("--f: {e}")))?;
    Ok(IwaPoly::new(prime, coeffs))
}

fn cmd_logmat(p: u64, av: i64, n: u32, which: Which, pretty: bool) -> CmdResult {
    let data = local_data(p, av)?;
    let m = match which {
        Which::H => h_matrix(&data, n),
        Which::M => {
            require_level(n)?;
            m_matrix(&data, n)
        }
    };
    emit(&m, pretty)
}

#[derive(Serialize)]
struct ValmatOutput {
    computed: ValuationMatrix,
    closed_form: ValuationMatrix,
    agree: bool,
    signature: Sign,
}

fn cmd_valmat(p: u64, av: i64, n: u32, pretty: bool) -> CmdResult {
    require_level(n)?;
    let data = local_data(p, av)?;
    let computed = valuation_matrix(&data, n)?;
    let closed_form = valuation_matrix_closed_form(&data, n);
    let signature = signature_from_matrix(&computed)?;
    emit(
        &ValmatOutput {
            agree: computed == closed_form,
            computed,
            closed_form,
            signature,
        },
        pretty,
    )
}

#[derive(Serialize)]
struct KobrankOutput {
    results: Vec<NablaResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    all_agree: Option<bool>,
}

fn cmd_kobrank(
    p: u64,
    f: &str,
    n: u32,
    methods: &[MethodArg],
    prec: Option<u32>,
    k: u32,
    pretty: bool,
) -> CmdResult {
    require_level(n)?;
    let prime = Prime::new(p)?;
    let tower = TowerOfQuotients::with_coeff_degree(parse_coeffs(prime, f)?, k)?;
    let mut wanted = Vec::new();
    for m in methods {
        let list: &[NablaMethod] = match m {
            MethodArg::ClosedForm => &[NablaMethod::ClosedForm],
            MethodArg::ResultantOracle => &[NablaMethod::ResultantOracle],
            MethodArg::SnfOracle => &[NablaMethod::SnfOracle],
            MethodArg::All => &[
                NablaMethod::ClosedForm,
                NablaMethod::ResultantOracle,
                NablaMethod::SnfOracle,
            ],
        };
        for &m in list {
            if !wanted.contains(&m) {
                wanted.push(m);
            }
        }
    }
    let mut results = Vec::new();
    for m in wanted {
        let r = match m {
            NablaMethod::ClosedForm => nabla_closed_form(&tower, n)?,
            NablaMethod::ResultantOracle => nabla_resultant_oracle(&tower, n)?,
            NablaMethod::SnfOracle => match prec {
                Some(prec) => nabla_snf_oracle(&tower, n, prec)?,
                None => nabla_snf_oracle_adaptive(&tower, n, 16, 4096)?,
            },
            NablaMethod::FiniteTower => unreachable!("not offered on the command line"),
        };
        results.push(r);
    }
    let all_agree = (results.len() > 1).then(|| results.windows(2).all(|w| w[0].value == w[1].value));
    emit(&KobrankOutput { results, all_agree }, pretty)
}

fn cmd_growth(path: &PathBuf, n_max: u32, format: Format, pretty: bool) -> CmdResult {
    let text = fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    let sc: GrowthScenario =
        serde_json::from_str(&text).map_err(|e| validation(format!("scenario: {e}")))?;
    let report = validate_scenario(&sc);
    if !report.valid {
        let infinite = report.violations.iter().all(|v| v.contains("infinite term"));
        return Err(Failure {
            code: if infinite { 5 } else { 2 },
            message: report.violations.join("; "),
        });
    }
    let table = sha_table(&sc, n_max)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |e: io::Error| validation(e.to_string());
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in &table.rows {
                w.serialize(row).map_err(|e| validation(e.to_string()))?;
            }
            w.flush().map_err(io_err)?;
        }
        Format::Json if pretty => {
            writeln!(
                out,
                "{:>4} {:>6} {:>10} {:>10} {:>8} {:>6} {:>10} {:>12}",
                "n", "parity", "S_or_T", "phi_mu", "lambda", "r_inf", "delta", "cumulative"
            )
            .map_err(io_err)?;
            for ShaRow {
                n,
                parity,
                s_or_t,
                phi_mu,
                lambda,
                r_inf,
                delta,
                cumulative,
            } in &table.rows
            {
                writeln!(
                    out,
                    "{n:>4} {parity:>6} {s_or_t:>10} {phi_mu:>10} {lambda:>8} {r_inf:>6} {delta:>10} {cumulative:>12}"
                )
                .map_err(io_err)?;
            }
        }
        Format::Json => {
            for row in &table.rows {
                let line = serde_json::to_string(row).map_err(|e| validation(e.to_string()))?;
                writeln!(out, "{line}").map_err(io_err)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct GapOutput {
    n: u32,
    deg_cap: usize,
    gap: ExtendedRational,
}

fn cmd_gap(p: u64, av: i64, n: u32, deg_cap: usize, pretty: bool) -> CmdResult {
    require_level(n)?;
    let data = local_data(p, av)?;
    let gap = m_convergence_gap(&data, n, deg_cap);
    emit(&GapOutput { n, deg_cap, gap }, pretty)
}

fn cmd_selfcheck(p: &[u64], n_max: u32, seed: u64, pretty: bool) -> CmdResult {
    let primes = p
        .iter()
        .map(|&q| Prime::new(q))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SelfcheckConfig::new(primes, n_max, seed)?;
    let results = run_selfcheck(&cfg);
    for r in &results {
        if pretty {
            let status = if r.passed { "PASS" } else { "FAIL" };
            println!("{status} [{}] {} ({} ms): {}", r.id, r.name, r.elapsed_ms, r.detail);
        } else {
            emit(r, false)?;
        }
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure {
            code: 1,
            message: format!("{failed} criteria failed"),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.pretty;
    let result = match &cli.command {
        Command::Logmat { p, av, n, which } => cmd_logmat(*p, *av, *n, *which, pretty),
        Command::Valmat { p, av, n } => cmd_valmat(*p, *av, *n, pretty),
        Command::Kobrank {
            p,
            f,
            n,
            methods,
            prec,
            coeff_degree,
        } => cmd_kobrank(*p, f, *n, methods, *prec, *coeff_degree, pretty),
        Command::Growth {
            scenario,
            n_max,
            format,
        } => cmd_growth(scenario, *n_max, *format, pretty),
        Command::Gap { p, av, n, deg_cap } => cmd_gap(*p, *av, *n, *deg_cap, pretty),
        Command::Selfcheck { p, n_max, seed } => cmd_selfcheck(p, *n_max, *seed, pretty),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
