//! Subcommand implementations, independent of argument parsing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use elastic_geodesics::bspline::{resample_curve, SplineSpace};
use elastic_geodesics::matching::{solve, MatchProblem, MatchResult};
use elastic_geodesics::metric::energy_breakdown;
use elastic_geodesics::varifold::{varifold_dist_sq, VarifoldEvalGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ModeName, RunConfig};
use crate::error::CliError;
use crate::files::{load_curve, read_json, write_file, CurveList, NamedCurve, PathFile};
use crate::render::{frame_times, render_svg, RenderStyle};

pub const PATH_FILE: &str = "path.json";
pub const SVG_FILE: &str = "geodesic.svg";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_FRAMES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub scale: f64,
    pub angle: f64,
    pub translation: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub objective: f64,
    pub grad_norm: f64,
    pub energy: f64,
    pub dist_sq: f64,
    pub lambda: f64,
    pub mu: f64,
    pub tau: f64,
    pub inner_iterations: usize,
    pub inner_termination: String,
}

/// Result manifest of `geodesic`. Deterministic: no timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub source: String,
    pub target: String,
    pub mode: ModeName,
    pub energy: f64,
    pub dist_sq: f64,
    pub distance: f64,
    pub transform: TransformRecord,
    pub termination: String,
    pub converged: bool,
    pub multipliers: Vec<f64>,
    pub log: Vec<IterationRecord>,
    pub path_file: String,
    pub svg_file: String,
    pub config: RunConfig,
}

fn build_problem(source: &NamedCurve, target: &NamedCurve, cfg: &RunConfig) -> Result<MatchProblem<f64>, CliError> {
    if source.curve.config.closed != target.curve.config.closed {
        return Err(CliError::Input(format!(
            "curves `{}` and `{}` differ in the closed flag",
            source.name, target.name
        )));
    }
    let spline = cfg.spline.to_config(source.curve.config.closed)?;
    let problem = MatchProblem::new(spline, &source.curve, &target.curve, cfg.metric.to_params()?, cfg.kernel.to_kernel()?)?
        .with_transform(cfg.options.transform())
        .with_mode(cfg.options.mode()?)
        .with_sampling(cfg.kernel.sampling()?);
    Ok(problem)
}

fn run_solver(problem: &MatchProblem<f64>, cfg: &RunConfig) -> Result<MatchResult<f64>, CliError> {
    Ok(solve(problem, &cfg.optim.to_settings()?)?)
}

/// Solves the boundary value problem and writes the manifest, the path
/// control points and the SVG strip into `out_dir`. A solver that stops
/// without converging still writes its files; the caller maps
/// `manifest.converged == false` to the non-convergence exit code.
pub fn geodesic(source: &Path, target: &Path, cfg: &RunConfig, out_dir: &Path) -> Result<Manifest, CliError> {
    cfg.validate()?;
    let src = load_curve(source, &cfg.spline)?;
    let tgt = load_curve(target, &cfg.spline)?;
    let problem = build_problem(&src, &tgt, cfg)?;
    let result = run_solver(&problem, cfg)?;

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::input(&out_dir.display().to_string(), e))?;
    let path_json = serde_json::to_string_pretty(&PathFile::from_path(&result.path)).expect("path serializes");
    write_file(&out_dir.join(PATH_FILE), &path_json)?;
    let moved_target = problem.transformed_target(&result.transform);
    let svg = render_svg(&result.path, &frame_times(DEFAULT_FRAMES), Some(&moved_target), &RenderStyle::default())?;
    write_file(&out_dir.join(SVG_FILE), &svg)?;

    let t = result.transform;
    let manifest = Manifest {
        config_hash: cfg.hash(),
        source: src.name,
        target: tgt.name,
        mode: cfg.options.mode,
        energy: result.energy,
        dist_sq: result.dist_sq,
        distance: result.distance(),
        transform: TransformRecord {
            scale: t.scale,
            angle: t.angle,
            translation: t.translation,
        },
        termination: result.termination.to_string(),
        converged: result.termination.converged(),
        multipliers: result.multipliers.clone(),
        log: result
            .log
            .iter()
            .map(|l| IterationRecord {
                objective: l.objective,
                grad_norm: l.grad_norm,
                energy: l.energy,
                dist_sq: l.dist_sq,
                lambda: l.lambda,
                mu: l.mu,
                tau: l.tau,
                inner_iterations: l.inner_iterations,
                inner_termination: l.inner_termination.to_string(),
            })
            .collect(),
        path_file: PATH_FILE.into(),
        svg_file: SVG_FILE.into(),
        config: cfg.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out_dir.join(MANIFEST_FILE), &text)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub first: usize,
    pub second: usize,
    pub distance: f64,
    pub dist_sq: f64,
    pub seconds: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub names: Vec<String>,
    /// Symmetric, zero diagonal, NaN where a pair failed.
    pub values: Vec<Vec<f64>>,
    pub pairs: Vec<PairRecord>,
    pub config_hash: String,
}

impl DistanceMatrix {
    /// Matrix block with a header row of names, then a blank line and one
    /// row per computed pair with its wall-clock time.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let mut header = vec!["name".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).unwrap();
        for (name, row) in self.names.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| format!("{v:.10e}")));
            w.write_record(&rec).unwrap();
        }
        w.write_record([""]).unwrap();
        w.write_record(["first", "second", "distance", "dist_sq", "seconds", "status", "config_hash"]).unwrap();
        for p in &self.pairs {
            w.write_record([
                self.names[p.first].clone(),
                self.names[p.second].clone(),
                format!("{:.10e}", p.distance),
                format!("{:.10e}", p.dist_sq),
                format!("{:.3}", p.seconds),
                p.status.clone(),
                self.config_hash.clone(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Pairwise shape distances, one solve per unordered pair, run on a pool of
/// `jobs` threads. Failed pairs are NaN and the run continues.
pub fn distance_matrix(list: &Path, cfg: &RunConfig, jobs: usize) -> Result<DistanceMatrix, CliError> {
    cfg.validate()?;
    let list_file: CurveList = read_json(list)?;
    let paths: Vec<PathBuf> = list_file.resolve(list);
    if paths.len() < 2 {
        return Err(CliError::Input(format!("curves: need at least 2 curves, got {}", paths.len())));
    }
    let curves: Vec<NamedCurve> = paths.iter().map(|p| load_curve(p, &cfg.spline)).collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..curves.len()).flat_map(|i| (i + 1..curves.len()).map(move |j| (i, j))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::input("jobs", e))?;
    let records: Vec<PairRecord> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let start = Instant::now();
                let outcome = build_problem(&curves[i], &curves[j], cfg).and_then(|p| run_solver(&p, cfg));
                let seconds = start.elapsed().as_secs_f64();
                match outcome {
                    Ok(r) => {
                        log::info!("{} / {}: distance {:.6e} in {seconds:.2}s", curves[i].name, curves[j].name, r.distance());
                        PairRecord {
                            first: i,
                            second: j,
                            distance: r.distance(),
                            dist_sq: r.dist_sq,
                            seconds,
                            status: r.termination.to_string(),
                        }
                    }
                    Err(e) => {
                        log::error!("{} / {}: {e}", curves[i].name, curves[j].name);
                        PairRecord {
                            first: i,
                            second: j,
                            distance: f64::NAN,
                            dist_sq: f64::NAN,
                            seconds,
                            status: format!("error: {e}"),
                        }
                    }
                }
            })
            .collect()
    });
    let total: f64 = records.iter().map(|r| r.seconds).sum();
    log::info!("{} pairs, {total:.2}s of solver time", records.len());

    let n = curves.len();
    let mut values = vec![vec![0.0; n]; n];
    for r in &records {
        values[r.first][r.second] = r.distance;
        values[r.second][r.first] = r.distance;
    }
    Ok(DistanceMatrix {
        names: curves.into_iter().map(|c| c.name).collect(),
        values,
        pairs: records,
        config_hash: cfg.hash(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub config_hash: String,
    pub energy: f64,
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub duration: f64,
}

/// Energy of a stored path under the configured metric, split by term.
pub fn energy(path_file: &Path, cfg: &RunConfig) -> Result<EnergyReport, CliError> {
    let file: PathFile = read_json(path_file)?;
    let path = file.to_path()?;
    let space = SplineSpace::new(path.config)?;
    let b = energy_breakdown(&space, &path, &cfg.metric.to_params()?)?;
    // Traversing the same curves in time T scales velocities by 1/T.
    let s = 1.0 / file.duration;
    Ok(EnergyReport {
        config_hash: cfg.hash(),
        energy: s * b.total(),
        a0: s * b.a0,
        a1: s * b.a1,
        b1: s * b.b1,
        a2: s * b.a2,
        duration: file.duration,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarifoldReport {
    pub config_hash: String,
    pub dist_sq: f64,
}

/// Squared varifold distance between two curve files, both brought into the
/// configured spatial layout.
pub fn varifold_dist(a: &Path, b: &Path, cfg: &RunConfig) -> Result<VarifoldReport, CliError> {
    let ca = load_curve(a, &cfg.spline)?;
    let cb = load_curve(b, &cfg.spline)?;
    if ca.curve.config.closed != cb.curve.config.closed {
        return Err(CliError::Input("curves differ in the closed flag".into()));
    }
    let spline = cfg.spline.to_config(ca.curve.config.closed)?;
    let space = SplineSpace::new(spline)?;
    let kernel = cfg.kernel.to_kernel()?;
    let sampling = cfg.kernel.sampling()?;
    let ga = VarifoldEvalGrid::sampled(&space, &resample_curve(&ca.curve, &spline)?, sampling)?;
    let gb = VarifoldEvalGrid::sampled(&space, &resample_curve(&cb.curve, &spline)?, sampling)?;
    Ok(VarifoldReport {
        config_hash: cfg.hash(),
        dist_sq: varifold_dist_sq(&ga, &gb, &kernel),
    })
}

/// SVG strip of `frames` snapshots of a stored path.
pub fn render(path_file: &Path, target: Option<&Path>, frames: usize, cfg: &RunConfig) -> Result<String, CliError> {
    if frames == 0 {
        return Err(CliError::Input("frames: need at least 1".into()));
    }
    let file: PathFile = read_json(path_file)?;
    let path = file.to_path()?;
    let target = target.map(|t| load_curve(t, &cfg.spline)).transpose()?;
    render_svg(&path, &frame_times(frames), target.as_ref().map(|t| &t.curve), &RenderStyle::default())
}
