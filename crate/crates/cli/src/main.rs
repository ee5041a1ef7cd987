use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qoa_core::oarray::{full_factorial, oa_to_qoa, vandermonde_oa, zero_sum_oa};
use qoa_core::qoa::plan;
use qoa_core::verify::{
    appendix_suite, is_k_uniform, m2_counterexample, qoa_check_at, DEFAULT_TOLERANCE,
};
use qoa_core::{Field, OrthogonalArray, Qoa, RowBudget, State};

#[derive(Parser)]
#[command(
    name = "qoa",
    version,
    about = "Build and certify quantum orthogonal arrays and k-uniform states"
)]
struct Cli {
    /// Worker threads for verification (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Full,
    Zerosum,
    Vandermonde,
}

#[derive(Subcommand)]
enum Command {
    /// Build a QOA(r, N, d, k) by the construction covering (N, d, k).
    Build {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: usize,
        /// Expected tail multiplicity; an error if the chosen construction differs.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Certify a state (k-uniformity) or a QOA (the row-pair identity).
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// Strength; defaults to the declared strength of a QOA input.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Generate a classical orthogonal array.
    Oa {
        #[arg(long, value_enum)]
        construction: Construction,
        #[arg(long)]
        d: u32,
        /// Number of columns; fixed by the field for vandermonde.
        #[arg(long = "N")]
        n: Option<usize>,
        /// Target residue for zerosum.
        #[arg(long, default_value_t = 0)]
        l: u32,
        /// Add the extra column available when d = 2^t, t ≥ 2 (vandermonde).
        #[arg(long)]
        extended: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run the basis-identity suite and the m = 2 negative control.
    Suite,
    /// Write the assembled state of a QOA, or of an OA read as a QOA of strength k.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn qoa_text(q: &Qoa) -> String {
    let mut out = format!(
        "QOA {} {} {} {} {}\n",
        q.r(),
        q.n(),
        q.d(),
        q.k(),
        q.provenance().construction
    );
    for row in q.rows() {
        let terms: Vec<String> = row
            .terms()
            .map(|(ket, c)| {
                let digits: Vec<String> = ket.iter().map(u16::to_string).collect();
                format!("({:?},{:?})|{}>", c.re, c.im, digits.join(","))
            })
            .collect();
        let _ = writeln!(out, "{}", terms.join(" "));
    }
    out
}

enum Input {
    Qoa(Box<Qoa>),
    State(State),
    Oa(OrthogonalArray),
}

fn read_input(path: &Path) -> anyhow::Result<Input> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let Ok(value) = serde_json::from_str::<Value>(&text) else {
        let oa = OrthogonalArray::from_text(&text)
            .context("input is neither JSON nor an OA text file")?;
        return Ok(Input::Oa(oa));
    };
    if value.get("provenance").is_some() {
        Ok(Input::Qoa(Box::new(
            serde_json::from_value(value).context("invalid QOA JSON")?,
        )))
    } else if value.get("amps").is_some() {
        Ok(Input::State(
            serde_json::from_value(value).context("invalid state JSON")?,
        ))
    } else if value.get("rows").is_some() {
        Ok(Input::Oa(
            serde_json::from_value(value).context("invalid OA JSON")?,
        ))
    } else {
        bail!("unrecognized JSON input: expected a QOA, a state, or an orthogonal array")
    }
}

fn build(
    n: usize,
    d: u32,
    k: usize,
    m: Option<usize>,
    output: Option<&Path>,
    format: Format,
) -> anyhow::Result<()> {
    let chosen = plan(n, d, k)?;
    if let Some(m) = m {
        if chosen.m() != m {
            bail!(
                "(N={n}, d={d}, k={k}) is built by {} with m = {}, not m = {m}",
                chosen.builder_name(),
                chosen.m()
            );
        }
    }
    let q: Qoa = chosen.build()?;
    let text = match format {
        Format::Json => to_json(&q)?,
        Format::Text => qoa_text(&q),
    };
    emit(output, &text)
}

fn verify(input: &Path, k: Option<usize>, tol: f64) -> anyhow::Result<bool> {
    let report = match read_input(input)? {
        Input::Qoa(q) => qoa_check_at(&q, k.unwrap_or(q.k()), tol)?,
        Input::State(s) => {
            let k = k.context("--k is required when verifying a state")?;
            is_k_uniform(&s, k, tol)?
        }
        Input::Oa(_) => bail!("verify takes a state or a QOA; use export to convert an OA first"),
    };
    eprintln!("wall time: {:.3} s", report.wall_time);
    emit(None, &to_json(&report)?)?;
    Ok(report.passed)
}

fn oa(
    construction: Construction,
    d: u32,
    n: Option<usize>,
    l: u32,
    extended: bool,
    output: Option<&Path>,
    format: Format,
) -> anyhow::Result<()> {
    let budget = RowBudget::from_env();
    let array = match construction {
        Construction::Full => full_factorial(d, n.context("--N is required")?, budget)?,
        Construction::Zerosum => zero_sum_oa(d, n.context("--N is required")?, l, budget)?,
        Construction::Vandermonde => {
            let f = Field::with_order(d as u64)?;
            let array = vandermonde_oa(&f, extended)?;
            if let Some(n) = n.filter(|&n| n != array.n_cols()) {
                bail!(
                    "the vandermonde array over GF({d}) has {} columns, not {n}",
                    array.n_cols()
                );
            }
            array
        }
    };
    let text = match format {
        Format::Json => to_json(&array)?,
        Format::Text => array.to_text(),
    };
    emit(output, &text)
}

fn suite() -> anyhow::Result<bool> {
    let report = appendix_suite();
    let cx = m2_counterexample();
    let control_ok = cx.deviation > 0.1;
    let out = json!({
        "suite": report,
        "m2_counterexample": {
            "subset": cx.subset,
            "deviation": cx.deviation,
            "excluded": control_ok,
            "rho": cx.rho,
        },
    });
    emit(None, &to_json(&out)?)?;
    Ok(report.passed && control_ok)
}

fn export(input: &Path, k: Option<usize>, output: Option<&Path>) -> anyhow::Result<()> {
    let q: Qoa = match read_input(input)? {
        Input::Qoa(q) => *q,
        Input::Oa(array) => oa_to_qoa(&array, k.unwrap_or(array.strength()))?,
        Input::State(_) => bail!("input is already a state"),
    };
    emit(output, &to_json(&q.assemble_state())?)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let start = Instant::now();
    let ok = match cli.command {
        Command::Build {
            n,
            d,
            k,
            m,
            output,
            format,
        } => build(n, d, k, m, output.as_deref(), format).map(|_| true)?,
        Command::Verify { input, k, tol } => verify(&input, k, tol)?,
        Command::Oa {
            construction,
            d,
            n,
            l,
            extended,
            output,
            format,
        } => oa(construction, d, n, l, extended, output.as_deref(), format).map(|_| true)?,
        Command::Suite => suite()?,
        Command::Export { input, k, output } => {
            export(&input, k, output.as_deref()).map(|_| true)?
        }
    };
    eprintln!("done in {:.3} s", start.elapsed().as_secs_f64());
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
