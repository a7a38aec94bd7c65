//! The `gvd` command line: `compute` writes a diagram, `verify` checks one
//! against the brute-force oracle on a grid.

pub mod io;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use io::{from_json, parse_input, parse_input_str, to_json, DiagramDoc, Job};
pub use svg::{render_svg, render_svg_string};

use crate::affine_md::{choose_md_box, minimization_diagram_with, order_k_diagram, MdOptions, MinimizationDiagram};
use crate::error::{GvdError, Result};
use crate::hull::{EPS_FEAS, DEFAULT_JOGGLE};
use crate::lie_geometry::EPS_PRED;
use crate::oracle::{k_smallest, label, label_margin, md_margin, GridSpec};
use crate::quadric::{compute_diagram, DiagramOptions, GeneralizedDiagram};

#[derive(Debug, Parser)]
#[command(name = "gvd", version, about = "Generalized Voronoi and minimization diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Tuning {
    /// Bounding box margin factor
    #[arg(long, default_value_t = 4.0)]
    pub margin: f64,
    /// Seed for the insertion order and joggle
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance for tight-site checks
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    /// Order of the diagram (affine mode); overrides the input file
    #[arg(long)]
    pub order_k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a diagram and write it as JSON (and optionally SVG)
    Compute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Compare cell labels against the oracle on a grid and print the mismatch count
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[command(flatten)]
        tuning: Tuning,
    },
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub svg: Option<PathBuf>,
    pub tuning: Tuning,
}

impl Default for Tuning {
    fn default() -> Self {
        Self {
            margin: 4.0,
            seed: 0,
            eps: EPS_PRED,
            order_k: None,
        }
    }
}

/// Engine output before serialization.
#[derive(Debug, Clone)]
pub enum Computed {
    Extremal(GeneralizedDiagram),
    Affine(MinimizationDiagram),
}

fn with_order(job: Job, t: &Tuning) -> Result<Job> {
    match (job, t.order_k) {
        (Job::Affine { functions, .. }, Some(k)) => {
            if k == 0 || k > functions.len() {
                return Err(GvdError::InvalidInput(format!(
                    "--order-k {k} outside 1..={}",
                    functions.len()
                )));
            }
            Ok(Job::Affine { functions, order_k: k })
        }
        (job, _) => Ok(job),
    }
}

pub fn compute(job: &Job, t: &Tuning) -> Result<(Computed, DiagramDoc)> {
    let meta = |mode: &str, bbox: f64, order_k: usize| io::MetaDoc {
        mode: mode.into(),
        dimension: job.dimension(),
        seed: t.seed,
        epsilons: io::EpsilonsDoc {
            pred: t.eps,
            feas: EPS_FEAS,
            joggle: DEFAULT_JOGGLE,
        },
        bbox,
        order_k,
    };
    match job {
        Job::Extremal(ds) => {
            let opts = DiagramOptions {
                margin: t.margin,
                seed: t.seed,
                joggle: DEFAULT_JOGGLE,
                eps: t.eps,
            };
            let g = compute_diagram(ds, &opts)?;
            let doc = DiagramDoc::from_extremal(&g, meta("extremal", g.bbox.half_width, 1));
            Ok((Computed::Extremal(g), doc))
        }
        Job::Affine { functions, order_k } => {
            let bbox = choose_md_box(functions, t.margin);
            let opts = MdOptions {
                margin: t.margin,
                seed: t.seed,
                joggle: DEFAULT_JOGGLE,
            };
            let md = if *order_k == 1 {
                minimization_diagram_with(functions, &bbox, &opts)?
            } else {
                order_k_diagram(functions, *order_k, &bbox, &opts)?
            };
            let doc = DiagramDoc::from_affine(&md, meta("affine", bbox.half_width, *order_k));
            Ok((Computed::Affine(md), doc))
        }
    }
}

/// Parses, computes and writes the outputs of one job.
pub fn run(cfg: &JobConfig) -> Result<DiagramDoc> {
    let job = with_order(parse_input(&cfg.input)?, &cfg.tuning)?;
    if cfg.svg.is_some() && job.dimension() != 2 {
        return Err(GvdError::Unsupported("--svg needs a planar input".into()));
    }
    let (_, doc) = compute(&job, &cfg.tuning)?;
    std::fs::write(&cfg.output, to_json(&doc))?;
    if let Some(path) = &cfg.svg {
        render_svg(&doc, &job, path)?;
    }
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReport {
    pub samples: usize,
    /// Samples whose oracle label is stable under small perturbations.
    pub robust: usize,
    pub mismatches: usize,
}

/// Grid comparison of engine labels against the oracle at margin-robust points.
pub fn verify(job: &Job, t: &Tuning, grid: usize) -> Result<VerifyReport> {
    if grid < 2 {
        return Err(GvdError::InvalidInput("--grid must be at least 2".into()));
    }
    let (computed, _) = compute(job, t)?;
    let half_width = match &computed {
        Computed::Extremal(g) => g.bbox.half_width,
        Computed::Affine(md) => md.bbox.half_width,
    };
    let pts = GridSpec {
        n: grid,
        half_width,
        dim: job.dimension(),
    }
    .points();
    let robust_margin = 10.0 * EPS_PRED;
    let check = |x: &[f64]| -> (bool, bool) {
        match (&computed, job) {
            (Computed::Extremal(g), Job::Extremal(ds)) => {
                if label_margin(ds, x) <= robust_margin {
                    return (false, false);
                }
                (true, g.cell_at(x) != label(ds, x))
            }
            (Computed::Affine(md), Job::Affine { functions, order_k }) => {
                if md_margin(functions, x, *order_k) <= robust_margin {
                    return (false, false);
                }
                (true, md.cell_at(x) != k_smallest(functions, x, *order_k))
            }
            _ => unreachable!("engine output matches the job mode"),
        }
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(16);
    let chunk = pts.len().div_ceil(workers).max(1);
    let (robust, mismatches) = std::thread::scope(|s| {
        let handles: Vec<_> = pts
            .chunks(chunk)
            .map(|part| {
                s.spawn(|| {
                    part.iter().fold((0, 0), |(r, m), x| {
                        let (is_robust, bad) = check(x);
                        (r + is_robust as usize, m + bad as usize)
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verify worker panicked"))
            .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    });
    Ok(VerifyReport {
        samples: pts.len(),
        robust,
        mismatches,
    })
}

/// 2 for an empty sphere family, 1 for every other failure.
pub fn exit_code(e: &GvdError) -> i32 {
    match e {
        GvdError::Infeasible(_) => 2,
        _ => 1,
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Compute {
            input,
            output,
            svg,
            tuning,
        } => run(&JobConfig {
            input,
            output,
            svg,
            tuning,
        })
        .map(|doc| {
            println!(
                "{} vertices, {} edges, {} cells",
                doc.vertices.len(),
                doc.edges.len(),
                doc.cells.len()
            );
        }),
        Command::Verify { input, grid, tuning } => parse_input(&input)
            .and_then(|job| with_order(job, &tuning))
            .and_then(|job| verify(&job, &tuning, grid))
            .map(|r| {
                println!(
                    "mismatches: {} (robust samples {}, total {})",
                    r.mismatches, r.robust, r.samples
                );
            }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
