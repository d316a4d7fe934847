use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lm_spectra::adjacency::{build_adjacency, MatrixKind};
use lm_spectra::cells::{sample_complex, SampleMode};
use lm_spectra::format::{complex_to_json, esd_to_csv, esd_to_json, matrix_to_coo};
use lm_spectra::limits::ball::DEFAULT_VERTEX_CAP;
use lm_spectra::limits::gw::{dgw_root_moment, BlockLaw};
use lm_spectra::limits::lwc::top_signatures;
use lm_spectra::limits::{
    empirical_ball_distribution, mass_transport_check, sample_dgw, survival_fraction, tv_distance, BallOptions,
    BallSource, GwConfig, TransportFn,
};
use lm_spectra::spectra::{
    eigenvalues_dense, esd_moment, histogram, moment_root_sampled, HistMode, DEFAULT_DENSE_CAP,
};
use lm_spectra::words::{
    beta_value, check_enum, enumerate_tilde_w, enumerate_w, format_table, MomentPolynomial, WordCounts,
};
use lm_spectra::LmError;

const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Parser)]
#[command(name = "lm-spectra", version, about = "Spectra and local limits of Linial-Meshulam complexes")]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true, env = "LM_SPECTRA_THREADS")]
    threads: Option<usize>,
    /// Omit the timestamp from JSON artifacts.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Model {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "lambda")]
    p: Option<f64>,
    /// Sets p = lambda / n.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl Model {
    fn p(&self) -> Result<f64, LmError> {
        match (self.p, self.lambda) {
            (Some(p), None) => Ok(p),
            (None, Some(l)) => Ok(l / self.n as f64),
            _ => Err(LmError::InvalidParameter("give exactly one of --p and --lambda".into())),
        }
    }
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Dot,
    Table,
    Coo,
}

#[derive(ValueEnum, Clone, Copy)]
enum Kind {
    Unsigned,
    Signed,
    CentredUnsigned,
    CentredSigned,
    CompleteUnsigned,
    CompleteSigned,
}

impl From<Kind> for MatrixKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Unsigned => MatrixKind::Unsigned,
            Kind::Signed => MatrixKind::Signed,
            Kind::CentredUnsigned => MatrixKind::CentredUnsigned,
            Kind::CentredSigned => MatrixKind::CentredSigned,
            Kind::CompleteUnsigned => MatrixKind::CompleteUnsigned,
            Kind::CompleteSigned => MatrixKind::CompleteSigned,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample Y_d(n, p) and write its present d-cells.
    SampleComplex {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        output: Output,
    },
    /// Eigenvalues of an adjacency matrix, or the matrix itself with --format coo.
    Spectrum {
        #[command(flatten)]
        model: Model,
        #[arg(long, value_enum, default_value = "unsigned")]
        kind: Kind,
        #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
        dense_cap: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Spectral moments, dense-exact or by root sampling (--samples > 0).
    Moments {
        #[command(flatten)]
        model: Model,
        #[arg(long, value_enum, default_value = "centred-unsigned")]
        kind: Kind,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Number of sampled roots; 0 selects the dense path.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
        dense_cap: usize,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        vertex_cap: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Count closed-word classes, one column per k up to --k.
    EnumerateWords {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        /// Also count classes without the support restriction.
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        output: Output,
    },
    /// beta_k(lambda).
    Beta {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        lambda: f64,
    },
    /// Closed-form spectra of the complete complex.
    CompleteEigs {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Total variation between line-graph and block-tree ball laws.
    LwcCompare {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        vertex_cap: usize,
        #[command(flatten)]
        output: Output,
    },
    /// One block Galton-Watson sample.
    DgwSample {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        vertex_cap: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Mass-transport balance of f_k on block trees.
    MassTransport {
        #[arg(long)]
        d: usize,
        #[arg(long, required_unless_present = "fixed_blocks")]
        lambda: Option<f64>,
        /// Test function id: f1, f2, ...
        #[arg(long, default_value = "f1")]
        f: String,
        /// Replace the Poisson block law by a constant number of blocks.
        #[arg(long, conflicts_with = "lambda")]
        fixed_blocks: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Extinction fraction of block trees under depth and vertex caps.
    Survival {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 60)]
        depth: u32,
        #[arg(long, default_value_t = 100_000)]
        vertex_cap: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also report the mean of (A^2)_oo over this many block trees.
        #[arg(long, default_value_t = 0)]
        moment_samples: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Histogram data for the four spectrum panels at n = 100, d = 2.
    Figure1 {
        #[arg(long, default_value_t = 60)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
        dense_cap: usize,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Lm(LmError),
    Io(std::io::Error),
}

impl From<LmError> for CliError {
    fn from(e: LmError) -> Self {
        CliError::Lm(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

struct Ctx {
    deterministic: bool,
}

impl Ctx {
    fn stamp(&self, mut v: Value) -> Value {
        if !self.deterministic {
            if let Value::Object(m) = &mut v {
                let t = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                m.insert("generated_unix".into(), json!(t));
            }
        }
        v
    }

    fn json_text(&self, v: Value) -> String {
        let mut s = serde_json::to_string_pretty(&self.stamp(v)).unwrap();
        s.push('\n');
        s
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<String, CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, text)?;
            Ok(p.display().to_string())
        }
        None => {
            print!("{text}");
            Ok("-".into())
        }
    }
}

fn summary(line: String) {
    eprintln!("{line}");
}

fn table_rows(d: usize, k_max: usize, full: bool) -> Result<(Vec<WordCounts>, std::collections::BTreeMap<usize, MomentPolynomial>), LmError> {
    check_enum(d, k_max)?;
    let mut rows = Vec::new();
    let mut polys = std::collections::BTreeMap::new();
    for k in 1..=k_max {
        let p = enumerate_tilde_w(d, k)?;
        let f = if full { Some(enumerate_w(d, k)?) } else { None };
        rows.push(WordCounts { d, k, tilde: p.coefficients.clone(), full: f });
        polys.insert(k, p);
    }
    Ok((rows, polys))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx { deterministic: cli.deterministic };
    match cli.command {
        Command::SampleComplex { model, output } => {
            let p = model.p()?;
            let s = sample_complex(model.n, model.d, p, model.seed, SampleMode::Materialized)?;
            let v: Value = serde_json::from_str(&complex_to_json(&s)?).unwrap();
            let count = s.present_ranks().map_or(0, |r| r.len());
            let path = emit(&output.out, &ctx.json_text(v))?;
            summary(format!(
                "sample-complex n={} d={} p={p} seed={:#x} present={count} out={path}",
                model.n, model.d, model.seed
            ));
        }
        Command::Spectrum { model, kind, dense_cap, output } => {
            let p = model.p()?;
            let s = sample_complex(model.n, model.d, p, model.seed, SampleMode::Lazy)?;
            let m = build_adjacency(&s, kind.into())?;
            let format = output.format.unwrap_or(Format::Json);
            let text = match format {
                Format::Coo => matrix_to_coo(&m),
                Format::Csv => esd_to_csv(&eigenvalues_dense(&m, dense_cap)?),
                Format::Json => {
                    let e = eigenvalues_dense(&m, dense_cap)?;
                    ctx.json_text(serde_json::from_str(&esd_to_json(&e)).unwrap())
                }
                _ => return Err(LmError::InvalidParameter("spectrum writes json, csv or coo".into()).into()),
            };
            let path = emit(&output.out, &text)?;
            summary(format!(
                "spectrum n={} d={} p={p} seed={:#x} kind={} dim={} out={path}",
                model.n,
                model.d,
                model.seed,
                MatrixKind::from(kind),
                m.dim()
            ));
        }
        Command::Moments { model, kind, k, samples, dense_cap, vertex_cap, output } => {
            let p = model.p()?;
            let s = sample_complex(model.n, model.d, p, model.seed, SampleMode::Lazy)?;
            let est = if samples == 0 {
                let m = build_adjacency(&s, kind.into())?;
                esd_moment(&eigenvalues_dense(&m, dense_cap)?, k)
            } else {
                moment_root_sampled(&s, kind.into(), k, samples, model.seed, vertex_cap)?
            };
            let v = json!({
                "n": model.n, "d": model.d, "p": p, "seed": model.seed,
                "kind": MatrixKind::from(kind).name(), "estimate": est,
            });
            let path = emit(&output.out, &ctx.json_text(v))?;
            summary(format!(
                "moments n={} d={} p={p} seed={:#x} k={k} value={} stderr={} out={path}",
                model.n, model.d, model.seed, est.value, est.stderr
            ));
        }
        Command::EnumerateWords { d, k, full, output } => {
            let (rows, polys) = table_rows(d, k, full)?;
            let last = rows.last().unwrap().clone();
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Table => format_table(d, k, &polys),
                Format::Json => {
                    let mut v = serde_json::to_value(&last).unwrap();
                    v["columns"] = serde_json::to_value(&rows).unwrap();
                    v["table"] = json!(format_table(d, k, &polys));
                    ctx.json_text(v)
                }
                _ => return Err(LmError::InvalidParameter("enumerate-words writes json or table".into()).into()),
            };
            let path = emit(&output.out, &text)?;
            summary(format!("enumerate-words d={d} k={k} full={full} out={path}"));
        }
        Command::Beta { d, k, lambda } => {
            let b = beta_value(d, k, lambda)?;
            println!("{b}");
            summary(format!("beta d={d} k={k} lambda={lambda} value={b}"));
        }
        Command::CompleteEigs { d, n, output } => {
            let v = json!({
                "n": n, "d": d,
                "unsigned": lm_spectra::spectra::complete_unsigned_eigs(n, d)?,
                "signed": lm_spectra::spectra::complete_signed_eigs(n, d)?,
            });
            let path = emit(&output.out, &ctx.json_text(v))?;
            summary(format!("complete-eigs n={n} d={d} out={path}"));
        }
        Command::LwcCompare { d, n, lambda, depth, samples, seed, vertex_cap, output } => {
            let s = sample_complex(n, d, lambda / n as f64, seed, SampleMode::Lazy)?;
            let opts = BallOptions { vertex_cap, ..Default::default() };
            let line = empirical_ball_distribution(&BallSource::LineGraph(&s), depth, samples, seed, &opts)?;
            let law = BlockLaw::poisson(lambda)?;
            let tree = empirical_ball_distribution(&BallSource::Dgw { d, law }, depth, samples, seed, &opts)?;
            let tv = tv_distance(&line, &tree);
            let v = json!({
                "t": depth, "samples": samples, "tv": tv,
                "top_signatures": top_signatures(&line, &tree, 20),
            });
            let path = emit(&output.out, &ctx.json_text(v))?;
            summary(format!("lwc-compare n={n} d={d} lambda={lambda} t={depth} seed={seed:#x} tv={tv} out={path}"));
        }
        Command::DgwSample { d, lambda, depth, seed, vertex_cap, output } => {
            let cfg = GwConfig { d, law: BlockLaw::poisson(lambda)?, depth, vertex_cap };
            let g = sample_dgw(&cfg, seed, 0)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Dot => g.to_dot(),
                Format::Json => ctx.json_text(serde_json::from_str(&g.to_json()).unwrap()),
                _ => return Err(LmError::InvalidParameter("dgw-sample writes json or dot".into()).into()),
            };
            let path = emit(&output.out, &text)?;
            summary(format!(
                "dgw-sample d={d} lambda={lambda} depth={depth} seed={seed:#x} vertices={} out={path}",
                g.n_vertices()
            ));
        }
        Command::MassTransport { d, lambda, f, fixed_blocks, samples, seed, output } => {
            let tf: TransportFn = f.parse()?;
            let law = match (lambda, fixed_blocks) {
                (_, Some(b)) => BlockLaw::Fixed(b),
                (Some(l), None) => BlockLaw::poisson(l)?,
                (None, None) => unreachable!("clap requires one"),
            };
            let r = mass_transport_check(d, law, tf, samples, seed)?;
            let v = json!({
                "d": d, "law": law, "f": f, "samples": samples, "seed": seed,
                "lhs": r.lhs, "rhs": r.rhs, "stderr": r.stderr, "holds_3se": r.holds(3.0),
            });
            let path = emit(&output.out, &ctx.json_text(v))?;
            summary(format!(
                "mass-transport d={d} f={f} seed={seed:#x} lhs={} rhs={} stderr={} out={path}",
                r.lhs, r.rhs, r.stderr
            ));
        }
        Command::Survival { d, lambda, depth, vertex_cap, samples, seed, moment_samples, output } => {
            let law = BlockLaw::poisson(lambda)?;
            let r = survival_fraction(d, law, depth, vertex_cap, samples, seed)?;
            let mut v = json!({
                "d": d, "lambda": lambda, "depth_cap": depth, "vertex_cap": vertex_cap,
                "samples": samples, "seed": seed, "died_out": r.died_out, "fraction_died": r.fraction_died,
            });
            if moment_samples > 0 {
                let (m, se) = dgw_root_moment(d, law, 2, moment_samples, seed, DEFAULT_VERTEX_CAP)?;
                v["root_moment_2"] = json!({ "mean": m, "stderr": se, "samples": moment_samples });
            }
            let path = emit(&output.out, &ctx.json_text(v))?;
            summary(format!(
                "survival d={d} lambda={lambda} seed={seed:#x} fraction_died={} out={path}",
                r.fraction_died
            ));
        }
        Command::Figure1 { bins, seed, dense_cap, out } => {
            std::fs::create_dir_all(&out)?;
            for lambda in [1.0, 0.5] {
                let s = sample_complex(100, 2, lambda / 100.0, seed, SampleMode::Lazy)?;
                for kind in [MatrixKind::Unsigned, MatrixKind::Signed] {
                    let e = eigenvalues_dense(&build_adjacency(&s, kind)?, dense_cap)?;
                    let h = histogram(&e, bins, HistMode::Density)?;
                    let name = format!("figure1_{}_lambda{lambda}.json", kind.name());
                    let path: PathBuf = Path::new(&out).join(name);
                    std::fs::write(&path, ctx.json_text(serde_json::to_value(&h).unwrap()))?;
                    summary(format!(
                        "figure1 n=100 d=2 lambda={lambda} kind={kind} seed={seed:#x} out={}",
                        path.display()
                    ));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Lm(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_cap() { 3 } else { 2 })
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
