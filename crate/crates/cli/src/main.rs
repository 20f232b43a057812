use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use psdrank::certificates::search::{strategies, strategy};
use psdrank::certificates::{
    assemble_instance_witness, completion_from_root, extract_root, psd_rank_search, sqrt_condition_check,
    verify_factorization, ExtractOptions, PsdFactorization, Scalar, SearchConfig, Verdict, VerificationReport,
    VerifyMode, Witness,
};
use psdrank::cube::{build_phi, DEFAULT_TOWER_HEIGHT};
use psdrank::formula::{parse_formula, reduce_formula};
use psdrank::gadgets::{build_a, build_b, build_c, reduce, GadgetContext, InstanceMatrix, ZeroTest};
use psdrank::io;
use psdrank::number::{parse_rational, Number};
use psdrank::poly::{Assignment, Polynomial};

#[derive(Parser)]
#[command(
    name = "psdrank",
    version,
    about = "Reductions from real polynomial equations to PSD rank, and certificate tools"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZeroTestArg {
    Linear,
    Square,
}

impl From<ZeroTestArg> for ZeroTest {
    fn from(z: ZeroTestArg) -> Self {
        match z {
            ZeroTestArg::Linear => ZeroTest::Linear,
            ZeroTestArg::Square => ZeroTest::Square,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Sampled,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduce a formula file to a single polynomial equation f = 0.
    Normalize {
        formula: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the bounded-root polynomial phi for f.
    Bound {
        poly: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOWER_HEIGHT)]
        m: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the sigma set of f and the size of the label set H.
    Sigma { poly: PathBuf },
    /// Write the matrices A, B and C of f.
    Matrices {
        poly: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "linear")]
        zero_test: ZeroTestArg,
    },
    /// Write the PSD-rank instance M(B, K) with its target rank.
    Reduce {
        poly: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "linear")]
        zero_test: ZeroTestArg,
    },
    /// Write the completion and instance factorizations built from a root.
    Witness {
        poly: PathBuf,
        /// Comma-separated values of x1, x2, ...
        #[arg(long, allow_hyphen_values = true)]
        root: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "linear")]
        zero_test: ZeroTestArg,
    },
    /// Check a factorization against a matrix.
    Verify {
        matrix: PathBuf,
        factorization: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Read a root of f off a size-3 factorization of a completion.
    ExtractRoot { poly: PathBuf, factorization: PathBuf },
    /// Look for a PSD factorization of the given size.
    Search {
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "auto")]
        strategy: String,
        /// Warm start for the first restart.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Where to write the best factorization found.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the sqrt condition on an incomplete matrix.
    SqrtCheck { matrix: PathBuf },
}

struct Failure {
    exit: u8,
    code: &'static str,
    message: String,
}

fn usage(code: &'static str, message: impl ToString) -> Failure {
    Failure { exit: 2, code, message: message.to_string() }
}

fn failed(code: &'static str, message: impl ToString) -> Failure {
    Failure { exit: 1, code, message: message.to_string() }
}

/// Key=value trace of one run, printed to stderr.
struct Trace {
    stage: &'static str,
    start: Instant,
    input: Sha256,
    output: Sha256,
    fields: Vec<(String, String)>,
}

impl Trace {
    fn new(stage: &'static str) -> Self {
        Trace { stage, start: Instant::now(), input: Sha256::new(), output: Sha256::new(), fields: Vec::new() }
    }

    fn field(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let text = fs::read_to_string(path).map_err(|e| usage("io", format!("{}: {e}", path.display())))?;
        self.input.update(text.as_bytes());
        Ok(text)
    }

    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<(), Failure> {
        self.output.update(text.as_bytes());
        match path {
            Some(p) => fs::write(p, text).map_err(|e| usage("io", format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn finish(self) {
        let mut line = format!("trace stage={}", self.stage);
        write!(line, " input_sha256={}", hex(&self.input.finalize())).unwrap();
        write!(line, " output_sha256={}", hex(&self.output.finalize())).unwrap();
        for (k, v) in &self.fields {
            write!(line, " {k}={v}").unwrap();
        }
        write!(line, " wall_ms={}", self.start.elapsed().as_millis()).unwrap();
        eprintln!("{line}");
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn read_poly(trace: &mut Trace, path: &Path) -> Result<Polynomial, Failure> {
    let text = trace.read(path)?;
    let f: Polynomial = text.trim().parse().map_err(|e| usage("parse", format!("{}: {e}", path.display())))?;
    Ok(f.canonicalize())
}

fn read_instance(trace: &mut Trace, path: &Path) -> Result<InstanceMatrix, Failure> {
    let text = trace.read(path)?;
    io::parse_instance(&text).map(|(m, _)| m).map_err(|e| usage("parse", format!("{}: {e}", path.display())))
}

fn read_factorization(trace: &mut Trace, path: &Path) -> Result<Witness, Failure> {
    let text = trace.read(path)?;
    io::parse_factorization(&text).map_err(|e| usage("parse", format!("{}: {e}", path.display())))
}

fn context(f: &Polynomial) -> Result<GadgetContext, Failure> {
    GadgetContext::new(f).map_err(|e| usage("invalid-input", e))
}

fn parse_root(text: &str) -> Result<Assignment, Failure> {
    let values = text
        .split(',')
        .map(|s| parse_rational(s).ok_or_else(|| usage("parse", format!("bad root coordinate '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Assignment::from_original(&values))
}

fn report_lines(rep: &VerificationReport) -> String {
    let mode = match rep.mode {
        VerifyMode::Full => "full".to_string(),
        VerifyMode::Sampled { seed, count } => format!("sampled seed={seed} count={count}"),
    };
    let worst = rep.worst.map_or("none".to_string(), |(i, j)| format!("{i},{j}"));
    let residual = match &rep.max_residual {
        Number::Exact(r) if r.is_integer() => r.to_integer().to_string(),
        other => other.to_string(),
    };
    format!(
        "mode={mode}\nchecked={}\nmax_residual={residual}\nworst={worst}\ntol={:e}\npass={}\n",
        rep.checked, rep.tol, rep.pass
    )
}

fn verify_any<T: Scalar>(
    a: &InstanceMatrix,
    f: &PsdFactorization<T>,
    mode: VerifyMode,
    tol: f64,
) -> Result<VerificationReport, Failure> {
    verify_factorization(a, f, mode, tol).map_err(|e| failed("verify-failed", e))
}

fn extract_any<T: Scalar>(ctx: &GadgetContext, f: &PsdFactorization<T>) -> Result<Assignment, Failure> {
    extract_root(ctx, f, ExtractOptions::default()).map_err(|e| failed("extract-failed", e))
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Normalize { formula, output } => {
            let mut t = Trace::new("normalize");
            let text = t.read(&formula)?;
            let phi = parse_formula(text.trim()).map_err(|e| usage("parse", format!("{}: {e}", formula.display())))?;
            let (system, f) = reduce_formula(&phi).map_err(|e| usage("invalid-input", e))?;
            t.field("atoms", phi.atom_count());
            t.field("equations", system.equations.len());
            t.field("terms", f.terms().len());
            t.emit(output.as_deref(), &format!("{f}\n"))?;
            t.finish();
        }
        Cmd::Bound { poly, m, output } => {
            let mut t = Trace::new("bound");
            let f = read_poly(&mut t, &poly)?;
            let inst = build_phi(&f, m).map_err(|e| usage("invalid-input", e))?;
            t.field("m", m);
            t.field("d", inst.d);
            t.field("terms", inst.phi.terms().len());
            t.emit(output.as_deref(), &format!("{}\n", inst.phi))?;
            t.finish();
            eprintln!(
                "warning code=cube-completeness message=roots with a coordinate of magnitude at least 2^(2^{m}) are not preserved"
            );
        }
        Cmd::Sigma { poly } => {
            let mut t = Trace::new("sigma");
            let f = read_poly(&mut t, &poly)?;
            let ctx = context(&f)?;
            let mut out = format!("sigma {}\n", ctx.sigma.len());
            for s in ctx.sigma.elements() {
                writeln!(out, "{s}").unwrap();
            }
            writeln!(out, "H {}", ctx.labels.len()).unwrap();
            t.emit(None, &out)?;
            t.finish();
        }
        Cmd::Matrices { poly, out_dir, zero_test } => {
            let mut t = Trace::new("matrices");
            let f = read_poly(&mut t, &poly)?;
            let ctx = context(&f)?;
            fs::create_dir_all(&out_dir).map_err(|e| usage("io", e))?;
            let b = build_b(&ctx, zero_test.into());
            t.emit(Some(&out_dir.join("A.sym")), &io::write_symbolic(&build_a(&ctx)))?;
            t.emit(Some(&out_dir.join("B.mtx")), &io::write_incomplete(&b))?;
            t.emit(Some(&out_dir.join("C.mtx")), &io::write_incomplete(&build_c(&b)))?;
            t.field("H", ctx.labels.len());
            t.field("unknowns", b.unknown_count());
            t.finish();
        }
        Cmd::Reduce { poly, output, zero_test } => {
            let mut t = Trace::new("reduce");
            let f = read_poly(&mut t, &poly)?;
            let red = reduce(&f, zero_test.into()).map_err(|e| usage("invalid-input", e))?;
            t.emit(output.as_deref(), &io::write_instance(&red.m, Some(red.r)))?;
            for line in &red.trace {
                if let Some((k, v)) = line.split_once('=') {
                    if k != "f" {
                        t.field(k, v);
                    }
                }
            }
            t.finish();
        }
        Cmd::Witness { poly, root, out_dir, zero_test } => {
            let mut t = Trace::new("witness");
            let f = read_poly(&mut t, &poly)?;
            let xi = parse_root(&root)?;
            let red = reduce(&f, zero_test.into()).map_err(|e| usage("invalid-input", e))?;
            let c = completion_from_root(&red.ctx, &xi).map_err(|e| failed("not-a-root", e))?;
            let w = assemble_instance_witness(&red, &c).map_err(|e| failed("witness-failed", e))?;
            fs::create_dir_all(&out_dir).map_err(|e| usage("io", e))?;
            t.emit(Some(&out_dir.join("completion.mtx")), &io::write_instance(&c.b_prime, Some(3)))?;
            t.emit(Some(&out_dir.join("completion.fac")), &io::write_factorization_exact(&c.factorization))?;
            t.emit(Some(&out_dir.join("instance.fac")), &io::write_factorization_exact(&w))?;
            t.field("root", root);
            t.field("r", red.r);
            t.finish();
        }
        Cmd::Verify { matrix, factorization, mode, seed, count, tol } => {
            let mut t = Trace::new("verify");
            let a = read_instance(&mut t, &matrix)?;
            let w = read_factorization(&mut t, &factorization)?;
            let mode = match mode {
                ModeArg::Full => VerifyMode::Full,
                ModeArg::Sampled => {
                    t.field("seed", seed);
                    VerifyMode::Sampled { seed, count }
                }
            };
            let rep = match &w {
                Witness::Exact(f) => verify_any(&a, f, mode, tol)?,
                Witness::Float(f) => verify_any(&a, f, mode, tol)?,
            };
            t.emit(None, &report_lines(&rep))?;
            t.finish();
            if !rep.pass {
                return Err(failed("verify-failed", format!("residual {} exceeds {tol:e}", rep.max_residual)));
            }
        }
        Cmd::ExtractRoot { poly, factorization } => {
            let mut t = Trace::new("extract-root");
            let f = read_poly(&mut t, &poly)?;
            let w = read_factorization(&mut t, &factorization)?;
            let ctx = context(&f)?;
            let y = match &w {
                Witness::Exact(fac) => extract_any(&ctx, fac)?,
                Witness::Float(fac) => extract_any(&ctx, fac)?,
            };
            let mut out = String::new();
            for (v, value) in y.iter() {
                writeln!(out, "{v}={:e}", value.to_f64()).unwrap();
            }
            t.emit(None, &out)?;
            t.finish();
        }
        Cmd::Search { matrix, k, restarts, seed, strategy: strategy_name, init, output } => {
            let mut t = Trace::new("search");
            let a = read_instance(&mut t, &matrix)?;
            let init = match init {
                Some(p) => Some(match read_factorization(&mut t, &p)? {
                    Witness::Exact(f) => f.to_float(),
                    Witness::Float(f) => f,
                }),
                None => None,
            };
            if strategy(&strategy_name).is_none() {
                let names: Vec<&str> = strategies().iter().map(|s| s.name()).collect();
                return Err(usage(
                    "usage",
                    format!("unknown strategy '{strategy_name}', expected one of {}", names.join(", ")),
                ));
            }
            let cfg = SearchConfig { restarts, seed, init, ..SearchConfig::default() };
            let rep = psd_rank_search(&a, k, &strategy_name, &cfg).map_err(|e| usage("invalid-input", e))?;
            let mut out = format!(
                "verdict={}\nk={}\nstrategy={}\nbest_residual={:e}\n",
                rep.verdict.name(),
                rep.k,
                rep.strategy,
                rep.best_residual
            );
            if let Some(r) = rep.restart {
                writeln!(out, "restart={r}").unwrap();
            }
            t.emit(None, &out)?;
            if let (Some(path), Some(w)) = (output.as_deref(), &rep.witness) {
                t.emit(Some(path), &io::write_witness(w))?;
            }
            t.field("seed", seed);
            t.field("restarts", restarts);
            t.finish();
            if rep.verdict == Verdict::Failed {
                return Err(failed(
                    "no-witness",
                    format!("no factorization of size {k} found; this is not a proof that none exists"),
                ));
            }
        }
        Cmd::SqrtCheck { matrix } => {
            let mut t = Trace::new("sqrt-check");
            let text = t.read(&matrix)?;
            let s = io::parse_incomplete(&text).map_err(|e| usage("parse", format!("{}: {e}", matrix.display())))?;
            let w = sqrt_condition_check(&s);
            let mut out = format!("holds={}\n", w.holds());
            for (side, list) in [("col", &w.columns), ("row", &w.rows)] {
                for (k, q) in list.iter().enumerate() {
                    match q {
                        Some((i1, i2, j1, j2)) => writeln!(out, "{side} {k} {i1} {i2} {j1} {j2}").unwrap(),
                        None => writeln!(out, "{side} {k} none").unwrap(),
                    }
                }
            }
            t.emit(None, &out)?;
            t.finish();
            if !w.holds() {
                return Err(failed("sqrt-failed", "the sqrt condition does not hold"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ")
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("error code=usage message={first}");
            return ExitCode::from(2);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error code={} message={}", f.code, f.message);
            ExitCode::from(f.exit)
        }
    }
}
