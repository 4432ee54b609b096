//! Subcommands of the `aps` binary. Each writes plain CSV into `--out-dir`;
//! every float is written with 17 significant digits.
//!
//! | file | columns |
//! |------|---------|
//! | `estimates.csv` | `edge_a,edge_b,n_hat,w,var,cov,lambda,eta` |
//! | `exact.csv` | `edge_a,edge_b,n` |
//! | `eval.csv` | `method,f,seed_base,runs,mse,rel_spectral` |
//! | `topk.csv` | `rank,true,estimate` |
//! | `sweep.csv` | `method,f,mse,rel_spectral` |
//! | `mc_check.csv` | `edge_a,edge_b,true_n,mc_mean,mc_se,mean_var_acc,empirical_var` |
//!
//! Columns that only the adaptive sampler produces are left empty for the
//! baselines.

pub mod args;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use aps_core::eval::{EvalReport, TopkPoint};
use aps_core::graph_stream::{load_path, permute, ParseOptions};
use aps_core::method::RunSpec;
use aps_core::oracle::{exact_local_counts, monte_carlo, monte_carlo_baseline, ExactCounts};
use aps_core::{EdgeStream, Method, MotifEstimateTable, VertexId};

use args::{BudgetArgs, Cli, Command, OutArgs, SamplerArgs, StreamArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] aps_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Unreadable input data.
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    /// 2 for configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(aps_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::McCheck(a) => cmd_mc_check(a),
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn load(path: &Path) -> CliResult<EdgeStream> {
    load_path(path, &ParseOptions::default()).map_err(|e| match e {
        aps_core::Error::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        aps_core::Error::Parse { line, message } => {
            CliError::Input(format!("{}: line {line}: {message}", path.display()))
        }
        other => other.into(),
    })
}

fn load_stream(a: &StreamArgs) -> CliResult<EdgeStream> {
    let s = load(&a.input)?;
    Ok(if a.no_permute {
        s
    } else {
        permute(&s, a.permute_seed)
    })
}

/// Sample size and the fraction it corresponds to.
fn resolve_budget(b: &BudgetArgs, stream: &EdgeStream) -> CliResult<(usize, f64)> {
    let edges = stream.len();
    match (b.sample_fraction, b.sample_size) {
        (Some(f), None) => {
            check_fraction(f)?;
            Ok((capacity_for(f, edges), f))
        }
        (None, Some(m)) => Ok((
            m,
            if edges == 0 {
                1.0
            } else {
                m as f64 / edges as f64
            },
        )),
        _ => Err(CliError::Config(
            "exactly one of --sample-fraction and --sample-size is required".into(),
        )),
    }
}

fn check_fraction(f: f64) -> CliResult<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "sample fraction {f} outside (0, 1]"
        )))
    }
}

/// `max(3, ceil(f * edges))`.
pub fn capacity_for(f: f64, edges: usize) -> usize {
    ((f * edges as f64).ceil() as usize).max(3)
}

fn run_spec(method: Method, capacity: usize, s: &SamplerArgs) -> RunSpec {
    RunSpec {
        method,
        capacity,
        phi: s.phi,
        mode: s.mode.into(),
    }
}

fn pool(out: &OutArgs) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = out.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn out_file(dir: &Path, name: &str) -> CliResult<(csv::Writer<BufWriter<File>>, PathBuf)> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok((csv::Writer::from_writer(BufWriter::new(file)), path))
}

fn write_rows<I, R>(dir: &Path, name: &str, header: &[&str], rows: I) -> CliResult<PathBuf>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let (mut w, path) = out_file(dir, name)?;
    let wrap = |source| CliError::Csv {
        path: path.clone(),
        source,
    };
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn cmd_run(a: args::RunArgs) -> CliResult<()> {
    let stream = load_stream(&a.stream)?;
    let (m, _) = resolve_budget(&a.budget, &stream)?;
    let table = run_spec(a.method.into(), m, &a.sampler).run(&stream, a.sampler.seed)?;
    write_estimates(&a.out_dir, &table)?;
    Ok(())
}

pub fn write_estimates(dir: &Path, table: &MotifEstimateTable) -> CliResult<PathBuf> {
    write_rows(
        dir,
        "estimates.csv",
        &[
            "edge_a", "edge_b", "n_hat", "w", "var", "cov", "lambda", "eta",
        ],
        table.rows.iter().map(|r| {
            [
                r.edge.a.to_string(),
                r.edge.b.to_string(),
                float(r.n_hat),
                optional(r.w),
                optional(r.var),
                optional(r.cov),
                optional(r.lambda),
                float(r.eta),
            ]
        }),
    )
}

fn cmd_exact(a: args::ExactArgs) -> CliResult<()> {
    let stream = load(&a.input)?;
    let exact = exact_local_counts(&stream);
    write_rows(
        &a.out_dir,
        "exact.csv",
        &["edge_a", "edge_b", "n"],
        exact
            .counts
            .iter()
            .map(|(&(x, y), &n)| [x.to_string(), y.to_string(), n.to_string()]),
    )?;
    println!("T={} T_max={}", exact.triangles, exact.max_count);
    Ok(())
}

/// Reads an `exact.csv` written by the `exact` subcommand.
pub fn read_exact(path: &Path) -> CliResult<ExactCounts> {
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let mut counts = BTreeMap::new();
    for rec in r.deserialize::<(u64, u64, u64)>() {
        let (x, y, n) = rec.map_err(wrap)?;
        let key = if x < y {
            (VertexId(x), VertexId(y))
        } else {
            (VertexId(y), VertexId(x))
        };
        counts.insert(key, n);
    }
    let sum: u64 = counts.values().sum();
    if !sum.is_multiple_of(3) {
        return Err(CliError::Config(format!(
            "{}: counts sum to {sum}, not a multiple of 3",
            path.display()
        )));
    }
    Ok(ExactCounts {
        triangles: sum / 3,
        max_count: counts.values().copied().max().unwrap_or(0),
        counts,
    })
}

fn exact_for(path: Option<&Path>, stream: &EdgeStream) -> CliResult<ExactCounts> {
    match path {
        Some(p) => read_exact(p),
        None => Ok(exact_local_counts(stream)),
    }
}

fn repeated(
    spec: &RunSpec,
    stream: &EdgeStream,
    seed: u64,
    runs: u64,
) -> CliResult<Vec<MotifEstimateTable>> {
    if runs == 0 {
        return Err(CliError::Config("--runs must be at least 1".into()));
    }
    Ok((0..runs)
        .into_par_iter()
        .map(|i| spec.run(stream, seed.wrapping_add(i)))
        .collect::<aps_core::Result<Vec<_>>>()?)
}

fn cmd_eval(a: args::EvalArgs) -> CliResult<()> {
    let stream = load_stream(&a.stream)?;
    let (m, f) = resolve_budget(&a.budget, &stream)?;
    if a.topk == 0 {
        return Err(CliError::Config("--topk must be at least 1".into()));
    }
    let exact = exact_for(a.exact.as_deref(), &stream)?;
    let method: Method = a.method.into();
    let spec = run_spec(method, m, &a.sampler);
    let report = pool(&a.out)?.install(|| -> CliResult<EvalReport> {
        let runs = repeated(&spec, &stream, a.sampler.seed, a.runs)?;
        Ok(EvalReport::from_runs(
            method,
            Some(f),
            m,
            a.sampler.seed,
            &runs,
            &exact,
            a.topk,
        )?)
    })?;
    write_rows(
        &a.out.out_dir,
        "eval.csv",
        &["method", "f", "seed_base", "runs", "mse", "rel_spectral"],
        [[
            method.to_string(),
            float(f),
            report.seed_base.to_string(),
            report.runs.to_string(),
            float(report.mse),
            float(report.rel_spectral),
        ]],
    )?;
    write_topk(&a.out.out_dir, &report.topk)?;
    Ok(())
}

fn write_topk(dir: &Path, points: &[TopkPoint]) -> CliResult<PathBuf> {
    write_rows(
        dir,
        "topk.csv",
        &["rank", "true", "estimate"],
        points
            .iter()
            .map(|p| [p.rank.to_string(), float(p.truth), float(p.estimate)]),
    )
}

fn cmd_sweep(a: args::SweepArgs) -> CliResult<()> {
    let stream = load_stream(&a.stream)?;
    for &f in &a.fractions {
        check_fraction(f)?;
    }
    if a.fractions.is_empty() || a.methods.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one fraction and one method".into(),
        ));
    }
    let exact = exact_for(a.exact.as_deref(), &stream)?;
    let pool = pool(&a.out)?;
    let mut rows = Vec::new();
    for &method_arg in &a.methods {
        let method: Method = method_arg.into();
        for &f in &a.fractions {
            let m = capacity_for(f, stream.len());
            let spec = run_spec(method, m, &a.sampler);
            let report = pool.install(|| -> CliResult<EvalReport> {
                let runs = repeated(&spec, &stream, a.sampler.seed, a.runs)?;
                Ok(EvalReport::from_runs(
                    method,
                    Some(f),
                    m,
                    a.sampler.seed,
                    &runs,
                    &exact,
                    1,
                )?)
            })?;
            rows.push([
                method.to_string(),
                float(f),
                float(report.mse),
                float(report.rel_spectral),
            ]);
        }
    }
    write_rows(
        &a.out.out_dir,
        "sweep.csv",
        &["method", "f", "mse", "rel_spectral"],
        rows,
    )?;
    Ok(())
}

fn cmd_mc_check(a: args::McCheckArgs) -> CliResult<()> {
    let stream = load_stream(&a.stream)?;
    let (m, _) = resolve_budget(&a.budget, &stream)?;
    let method: Method = a.method.into();
    let spec = run_spec(method, m, &a.sampler);
    let summary = pool(&a.out)?.install(|| match method {
        Method::Aps | Method::ApsJs => monte_carlo(
            &spec.sampler_config(a.sampler.seed),
            &stream,
            a.runs,
            a.sampler.seed,
        ),
        Method::Uniform | Method::Triest => {
            monte_carlo_baseline(method, m, &stream, a.runs, a.sampler.seed)
        }
    })?;
    let aps = matches!(method, Method::Aps | Method::ApsJs);
    write_rows(
        &a.out.out_dir,
        "mc_check.csv",
        &[
            "edge_a",
            "edge_b",
            "true_n",
            "mc_mean",
            "mc_se",
            "mean_var_acc",
            "empirical_var",
        ],
        summary.edges.iter().map(|e| {
            [
                e.key.0.to_string(),
                e.key.1.to_string(),
                e.true_n.to_string(),
                float(e.mc_mean()),
                float(e.mc_se()),
                optional(aps.then(|| e.mean_var_acc())),
                float(e.empirical_var()),
            ]
        }),
    )?;
    Ok(())
}

/// Writes a message for `err` to stderr and returns the process exit code.
pub fn report(err: &CliError) -> u8 {
    let mut stderr = std::io::stderr().lock();
    let _ = writeln!(stderr, "error: {err}");
    err.exit_code()
}
