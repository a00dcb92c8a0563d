//! Command-line front end: parses declarative job files, drives the tower
//! computations, and writes deterministic text/CSV reports.
//!
//! Exit codes: 0 on success, 1 on domain errors (disconnected layers,
//! unstabilized fits, failed cross-checks), 2 on job-file parse errors,
//! 3 when a checked identity is violated by stabilized fits.

mod jobspec;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kidagraph_core::graph::Graph;
use kidagraph_core::iwasawa::{
    canonical_case_grid, kida_check, tower_report, TowerKind, Verdict,
};

use jobspec::{parse_jobspec, Diagnostic, JobSpec};

#[derive(Parser)]
#[command(
    name = "kidagraph",
    version,
    about = "Exact Jacobians, covering towers and their growth invariants for finite graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tower {
    Full,
    Base,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct one derived layer and write its labeled vertex/edge lists
    Derive {
        #[arg(long)]
        job: PathBuf,
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value = "full")]
        tower: Tower,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Walk both towers, computing kappa exactly at every layer, and fit
    /// the growth invariants
    Tower {
        #[arg(long)]
        job: PathBuf,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Fit (lambda, mu, nu) for both towers of a job
    Invariants {
        #[arg(long)]
        job: PathBuf,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Check the ramification-corrected lambda identity and the
    /// mu-equivalence between the two towers
    Kida {
        #[arg(long)]
        job: PathBuf,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Cross-check the spanning-tree count of a graph through independent
    /// routes: determinant, invariant factors, and (small graphs)
    /// exhaustive enumeration
    Oracle {
        /// Job file; the check runs on its base graph
        #[arg(long, conflicts_with = "edges")]
        job: Option<PathBuf>,
        /// Re-ingest a derived-graph edges.csv instead
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Run the canonical cycle-graph family for (p, m) and compare every
    /// layer and fit against the closed forms
    Cases {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        n_max: u32,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

enum CliError {
    Parse(Vec<Diagnostic>),
    Domain(String),
    Theorem(String),
    Io(String),
}

impl From<kidagraph_core::Error> for CliError {
    fn from(e: kidagraph_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 1 = domain error, 2 = parse error, 3 = identity violated.
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
            CliError::Theorem(_) => 3,
        }
    }

    fn emit(&self) -> ExitCode {
        match self {
            CliError::Parse(diags) => {
                for d in diags {
                    eprintln!("error: {d}");
                    eprintln!(
                        "record: kind=parse code={} field={} message={}",
                        d.code,
                        quote(&d.field),
                        quote(&d.message)
                    );
                }
            }
            CliError::Domain(msg) => {
                eprintln!("error: {msg}");
                eprintln!("record: kind=domain message={}", quote(msg));
            }
            CliError::Io(msg) => {
                eprintln!("error: {msg}");
                eprintln!("record: kind=io message={}", quote(msg));
            }
            CliError::Theorem(msg) => {
                eprintln!("error: {msg}");
                eprintln!("record: kind=theorem-violation message={}", quote(msg));
            }
        }
        ExitCode::from(self.code())
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.emit(),
    }
}

fn load_job(path: &Path) -> Result<JobSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_jobspec(&text).map_err(CliError::Parse)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Derive { job, level, tower, output_dir } => {
            let job = load_job(&job)?;
            let layer = match tower {
                Tower::Full => job.voltage_graph.derive(level)?,
                Tower::Base => job.voltage_graph.derive_base(level)?,
            };
            println!(
                "derived layer {level} ({} tower): {} vertices, {} unoriented edges, {} component(s)",
                match tower {
                    Tower::Full => "full",
                    Tower::Base => "base",
                },
                layer.graph.num_vertices(),
                layer.graph.num_unoriented_edges(),
                layer.component_count(),
            );
            if let Some(dir) = output_dir {
                ensure_dir(&dir)?;
                fs::write(dir.join("vertices.csv"), report::derived_vertices_csv(&layer, &job))?;
                fs::write(dir.join("edges.csv"), report::derived_edges_csv(&layer, &job))?;
                println!("wrote {}", dir.join("vertices.csv").display());
                println!("wrote {}", dir.join("edges.csv").display());
            }
            Ok(())
        }

        Cmd::Tower { job, n_max, output_dir, format } => {
            let job = load_job(&job)?;
            let n_max = n_max.unwrap_or(job.n_max);
            let base = tower_report(&job.voltage_graph, TowerKind::Base, n_max)?;
            let full = tower_report(&job.voltage_graph, TowerKind::Full, n_max)?;
            let base_fit = base.fit()?;
            let full_fit = full.fit()?;
            match format {
                Format::Table => {
                    print!("{}", report::tower_table(&base, Some(&base_fit)));
                    println!();
                    print!("{}", report::tower_table(&full, Some(&full_fit)));
                }
                Format::Csv => {
                    print!("{}", report::tower_csv(&base));
                    print!("{}", report::tower_csv(&full));
                    print!(
                        "{}",
                        report::fits_csv(&[(TowerKind::Base, &base_fit), (TowerKind::Full, &full_fit)])
                    );
                }
            }
            if let Some(dir) = output_dir {
                ensure_dir(&dir)?;
                fs::write(dir.join("tower_base.csv"), report::tower_csv(&base))?;
                fs::write(dir.join("tower_full.csv"), report::tower_csv(&full))?;
                fs::write(
                    dir.join("fits.csv"),
                    report::fits_csv(&[(TowerKind::Base, &base_fit), (TowerKind::Full, &full_fit)]),
                )?;
            }
            Ok(())
        }

        Cmd::Invariants { job, n_max, format } => {
            let job = load_job(&job)?;
            let n_max = n_max.unwrap_or(job.n_max);
            let base_fit = tower_report(&job.voltage_graph, TowerKind::Base, n_max)?.fit()?;
            let full_fit = tower_report(&job.voltage_graph, TowerKind::Full, n_max)?.fit()?;
            match format {
                Format::Table => {
                    print!("base  {}", report::fit_line(&base_fit));
                    print!("full  {}", report::fit_line(&full_fit));
                }
                Format::Csv => print!(
                    "{}",
                    report::fits_csv(&[(TowerKind::Base, &base_fit), (TowerKind::Full, &full_fit)])
                ),
            }
            Ok(())
        }

        Cmd::Kida { job, n_max, output_dir, format } => {
            let job = load_job(&job)?;
            let n_max = n_max.unwrap_or(job.n_max);
            let result = kida_check(&job.voltage_graph, n_max)?;
            match format {
                Format::Table => print!("{}", report::kida_table(&result, &job)),
                Format::Csv => {
                    print!("{}", report::kida_summary_csv(&result));
                    print!("{}", report::kida_corrections_csv(&result, &job));
                }
            }
            if let Some(dir) = output_dir {
                ensure_dir(&dir)?;
                fs::write(dir.join("kida_summary.csv"), report::kida_summary_csv(&result))?;
                fs::write(
                    dir.join("kida_corrections.csv"),
                    report::kida_corrections_csv(&result, &job),
                )?;
            }
            match result.verdict {
                Verdict::Pass => Ok(()),
                Verdict::Inconclusive(why) => Err(CliError::Domain(format!("inconclusive: {why}"))),
                Verdict::TheoremViolation(why) => Err(CliError::Theorem(why)),
            }
        }

        Cmd::Oracle { job, edges } => {
            let graph = match (job, edges) {
                (Some(path), None) => load_job(&path)?.voltage_graph.base().clone(),
                (None, Some(path)) => read_edges_csv(&path)?,
                _ => {
                    return Err(CliError::Domain(
                        "oracle needs exactly one of --job or --edges".into(),
                    ))
                }
            };
            let det = graph.spanning_tree_count()?;
            let jac = graph.jacobian()?;
            let product = jac.torsion_order();
            println!("kappa (determinant):        {det}");
            println!("kappa (invariant factors):  {product}");
            let brute = match graph.spanning_tree_count_bruteforce() {
                Ok(b) => {
                    println!("kappa (enumeration):        {b}");
                    Some(b)
                }
                Err(kidagraph_core::Error::SizeGuard { edges, max }) => {
                    println!("kappa (enumeration):        skipped ({edges} edges > limit {max})");
                    None
                }
                Err(e) => return Err(e.into()),
            };
            println!("jacobian: {jac}");
            let ok = det == product && brute.is_none_or(|b| b == det);
            if ok {
                println!("oracle: agree");
                Ok(())
            } else {
                Err(CliError::Domain("oracle routes disagree".into()))
            }
        }

        Cmd::Cases { p, m, n_max, output_dir } => {
            let grid = canonical_case_grid(p, m, n_max)?;
            print!("{}", report::cases_table(&grid));
            if let Some(dir) = output_dir {
                ensure_dir(&dir)?;
                fs::write(dir.join("cases.csv"), report::cases_csv(&grid))?;
            }
            if grid.all_pass() {
                Ok(())
            } else {
                Err(CliError::Domain(format!(
                    "case grid failed: {}",
                    grid.first_failure().unwrap_or_default()
                )))
            }
        }
    }
}

/// Reads a derived-graph `edges.csv` back as a plain graph: columns
/// `id,src,dst,bar` are used, label columns are ignored. Vertices are the
/// endpoints that occur.
fn read_edges_csv(path: &Path) -> Result<Graph, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Domain("edge list is empty".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| {
        columns
            .iter()
            .position(|&c| c == name)
            .ok_or_else(|| CliError::Domain(format!("edge list is missing column '{name}'")))
    };
    let (id_col, src_col, dst_col, bar_col) = (col("id")?, col("src")?, col("dst")?, col("bar")?);
    let mut rows: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |c: usize| -> Result<usize, CliError> {
            fields
                .get(c)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    CliError::Domain(format!("edge list line {}: bad field", lineno + 2))
                })
        };
        rows.push((get(id_col)?, get(src_col)?, get(dst_col)?, get(bar_col)?));
    }
    rows.sort_by_key(|r| r.0);
    let ne = rows.len();
    let mut src = vec![0usize; ne];
    let mut tgt = vec![0usize; ne];
    let mut bar = vec![0usize; ne];
    let mut max_vertex = 0usize;
    for (i, (id, s, t, b)) in rows.into_iter().enumerate() {
        if id != i {
            return Err(CliError::Domain(format!(
                "edge list ids are not contiguous (expected {i}, got {id})"
            )));
        }
        src[i] = s;
        tgt[i] = t;
        bar[i] = b;
        max_vertex = max_vertex.max(s).max(t);
    }
    let graph = Graph::from_raw(if ne == 0 { 0 } else { max_vertex + 1 }, src, tgt, bar);
    graph
        .validate()
        .map_err(|v| CliError::Domain(format!("edge list is not a valid graph: {v}")))?;
    Ok(graph)
}
