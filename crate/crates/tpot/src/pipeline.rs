//! The commands behind the CLI, usable in-process.
//!
//! Each `cmd_*` function reads its inputs from disk, writes its outputs into
//! the configured output directory and returns the primary output path. The
//! in-memory steps they are built from are exposed separately.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use tpot_core::analysis::{extract_matching, matching_correlation, permutation_accuracy};
use tpot_core::geodesic::{geodesic_frames, kernel_sq_distance};
use tpot_core::geometry::{pairwise_sq_dists, PointCloud};
use tpot_core::network::{assemble_network, augment_pair, compute_persistence, Kernel, MeasureTopologicalNetwork};
use tpot_core::ot::Coupling;
use tpot_core::persistence::PersistenceResult;
use tpot_core::tpot::{pd_wasserstein_baseline, solve, CouplingPair, TpotSolution};

use crate::config::RunConfig;
use crate::error::{AppError, Result};
use crate::formats::{
    matrix_from_rows, mean, BaselineFile, FrameLine, LineageFile, NetworkFile, PersistenceFile, ReportFile, SolveFile,
    TrackStep, TrackSummary,
};
use crate::io::{read_json, read_points_csv, write_json, write_jsonl, write_text};

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub network: MeasureTopologicalNetwork,
    pub persistence: PersistenceResult,
}

pub fn build_from_cloud(pc: &PointCloud, cfg: &RunConfig) -> Result<BuildOutput> {
    let opts = cfg.network_options();
    let persistence = compute_persistence(pc, &opts)?;
    let network = assemble_network(pc, &persistence, &opts)?;
    Ok(BuildOutput { network, persistence })
}

/// Human-readable digest of a built network.
pub fn summary_text(name: &str, out: &BuildOutput) -> String {
    let net = &out.network;
    let mut s = String::new();
    let _ = writeln!(s, "network: {name}");
    let _ = writeln!(s, "points (N): {}", net.n_points());
    let _ = writeln!(s, "features (M): {}", net.n_features());
    let _ = writeln!(s, "homology degree: {}", out.persistence.degree);
    let mut pers: Vec<(usize, f64)> = net.diagram().iter().map(|d| d.persistence()).enumerate().collect();
    pers.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let _ = writeln!(s, "top persistences:");
    for (i, p) in pers.iter().take(10) {
        let d = net.diagram()[*i];
        let _ = writeln!(
            s,
            "  #{i}: birth {:.6} death {:.6} persistence {p:.6}",
            d.birth, d.death
        );
    }
    s
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

/// Builds a network from a point CSV and writes `<stem>.network.json`,
/// `<stem>.persistence.json` and `<stem>.summary.txt`.
pub fn cmd_build(points: &Path, cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let pc = read_points_csv(points)?;
    let out = build_from_cloud(&pc, cfg)?;
    let name = stem(points);
    let dir = &cfg.output_dir;
    let net_path = dir.join(format!("{name}.network.json"));
    write_json(&net_path, &NetworkFile::from(&out.network))?;
    write_json(
        &dir.join(format!("{name}.persistence.json")),
        &PersistenceFile::from(&out.persistence),
    )?;
    write_text(&dir.join(format!("{name}.summary.txt")), &summary_text(&name, &out))?;
    log::info!(
        "built {name}: N = {}, M = {}",
        out.network.n_points(),
        out.network.n_features()
    );
    Ok(net_path)
}

pub fn load_network(path: &Path) -> Result<MeasureTopologicalNetwork> {
    read_json::<NetworkFile>(path)?.try_into()
}

/// Generator matching of a solution with correlations through its point plan.
pub fn solution_report(
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
    sol: &TpotSolution,
    truth: Option<&[usize]>,
) -> Result<ReportFile> {
    let matching = extract_matching(&sol.pair.pi_e.plan);
    let corr = matching_correlation(&sol.pair.pi_v, p.incidence(), q.incidence(), &matching)?;
    Ok(ReportFile::new(
        &matching,
        corr,
        truth.map(|t| permutation_accuracy(&matching, t)),
    ))
}

/// Solves two stored networks and writes `result.json` and `report.json`.
pub fn cmd_solve(a: &Path, b: &Path, cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let p = load_network(a)?;
    let q = load_network(b)?;
    let params = cfg.tpot_params();
    let sol = solve(&p, &q, &params)?;
    log::info!(
        "solved in {} iterations (converged: {}), objective {:.6e}",
        sol.iterations,
        sol.converged,
        sol.objective
    );
    let path = cfg.output_dir.join("result.json");
    write_json(&path, &SolveFile::new(&sol, &params))?;
    write_json(
        &cfg.output_dir.join("report.json"),
        &solution_report(&p, &q, &sol, None)?,
    )?;
    Ok(path)
}

pub fn baseline_file(p: &MeasureTopologicalNetwork, q: &MeasureTopologicalNetwork) -> Result<BaselineFile> {
    let base = pd_wasserstein_baseline(p.diagram(), q.diagram())?;
    Ok(BaselineFile {
        distance: base.distance,
        report: ReportFile::new(&base.matching, Vec::new(), None),
    })
}

/// Matches the two diagrams alone and writes `baseline.json`.
pub fn cmd_baseline(a: &Path, b: &Path, cfg: &RunConfig) -> Result<PathBuf> {
    let p = load_network(a)?;
    let q = load_network(b)?;
    let path = cfg.output_dir.join("baseline.json");
    write_json(&path, &baseline_file(&p, &q)?)?;
    Ok(path)
}

/// Rebuilds the rounded coupling pair of a stored result, taking marginals
/// from the networks.
pub fn coupling_pair(
    sol: &SolveFile,
    p: &MeasureTopologicalNetwork,
    q: &MeasureTopologicalNetwork,
) -> Result<CouplingPair> {
    let (n, n2) = (p.n_points(), q.n_points());
    let (side, side2) = augment_pair(p, q);
    let pi_v = matrix_from_rows(&sol.couplings.pi_v, n2, "pi_v")?;
    let pi_e = matrix_from_rows(&sol.couplings.pi_e, side2.mass.len(), "pi_e")?;
    if pi_v.shape() != (n, n2) || pi_e.shape() != (side.mass.len(), side2.mass.len()) {
        return Err(AppError::Input(format!(
            "result couplings have shapes {:?} and {:?}, networks need ({n}, {n2}) and ({}, {})",
            pi_v.shape(),
            pi_e.shape(),
            side.mass.len(),
            side2.mass.len()
        )));
    }
    Ok(CouplingPair::new(
        Coupling::new(pi_v, p.point_mass().clone(), q.point_mass().clone()),
        Coupling::new(pi_e, side.mass, side2.mass),
    ))
}

/// Squared dissimilarities used to draw a network: squared Euclidean
/// distances when the cloud is available, otherwise the affinity itself for
/// the squared-distance kernel and the kernel-induced distance for Gaussian
/// kernels.
pub fn display_gauge(net: &MeasureTopologicalNetwork, points: Option<&PointCloud>) -> Result<DMatrix<f64>> {
    if let Some(pc) = points {
        if pc.len() != net.n_points() {
            return Err(AppError::Input(format!(
                "cloud has {} points, network has {}",
                pc.len(),
                net.n_points()
            )));
        }
        return Ok(pairwise_sq_dists(pc).into_inner());
    }
    Ok(match net.meta().kernel {
        Kernel::SqDist => net.affinity().as_matrix().clone(),
        Kernel::Gaussian(_) => kernel_sq_distance(net.affinity().as_matrix()),
    })
}

pub fn frames(
    pair: &CouplingPair,
    gauge: &DMatrix<f64>,
    gauge2: &DMatrix<f64>,
    cfg: &RunConfig,
) -> Result<Vec<FrameLine>> {
    Ok(geodesic_frames(pair, gauge, gauge2, cfg.n_frames, cfg.d_embed)?
        .into_iter()
        .map(|f| FrameLine {
            t: f.t,
            support: f.support,
            coords: (0..f.coords.nrows())
                .map(|i| f.coords.row(i).iter().copied().collect())
                .collect(),
        })
        .collect())
}

/// Writes `frames.jsonl` and a flat `frames.csv` (`frame,t,i,j,coords...`).
pub fn cmd_geodesic(
    result: &Path,
    a: &Path,
    b: &Path,
    clouds: Option<(&Path, &Path)>,
    cfg: &RunConfig,
) -> Result<PathBuf> {
    cfg.validate()?;
    let p = load_network(a)?;
    let q = load_network(b)?;
    let sol: SolveFile = read_json(result)?;
    let pair = coupling_pair(&sol, &p, &q)?;
    let (pc, pc2) = match clouds {
        Some((x, y)) => (Some(read_points_csv(x)?), Some(read_points_csv(y)?)),
        None => (None, None),
    };
    let g = display_gauge(&p, pc.as_ref())?;
    let g2 = display_gauge(&q, pc2.as_ref())?;
    let lines = frames(&pair, &g, &g2, cfg)?;
    let path = cfg.output_dir.join("frames.jsonl");
    write_jsonl(&path, &lines)?;
    let mut csv = String::from("frame,t,i,j");
    for d in 0..cfg.d_embed {
        let _ = write!(csv, ",x{d}");
    }
    csv.push('\n');
    for (k, f) in lines.iter().enumerate() {
        for ((i, j), c) in f.support.iter().zip(&f.coords) {
            let _ = write!(csv, "{k},{},{i},{j}", f.t);
            for v in c {
                let _ = write!(csv, ",{v}");
            }
            csv.push('\n');
        }
    }
    write_text(&cfg.output_dir.join("frames.csv"), &csv)?;
    Ok(path)
}

/// Follows matched features through consecutive snapshots.
///
/// A feature that no earlier lineage reaches starts a new one.
pub fn chain_lineages(n_features: &[usize], steps: &[ReportFile]) -> Vec<Vec<Option<usize>>> {
    let n_snap = n_features.len();
    let mut lineages: Vec<Vec<Option<usize>>> = Vec::new();
    let mut owner: Vec<Option<usize>> = Vec::new();
    for (s, &m) in n_features.iter().enumerate() {
        let mut next = vec![None; m];
        if s > 0 {
            for &(src, tgt) in &steps[s - 1].pairs {
                if let (Some(l), Some(t)) = (owner.get(src).copied().flatten(), tgt) {
                    if t < m && next[t].is_none() {
                        next[t] = Some(l);
                        lineages[l][s] = Some(t);
                    }
                }
            }
        }
        for (f, slot) in next.iter_mut().enumerate() {
            if slot.is_none() {
                let mut row = vec![None; n_snap];
                row[s] = Some(f);
                *slot = Some(lineages.len());
                lineages.push(row);
            }
        }
        owner = next;
    }
    lineages
}

/// Networks, TpOT and baseline matchings, and lineages for a sequence.
///
/// `truth[k]` is the correct feature permutation from snapshot `k` to `k+1`.
pub fn track(
    clouds: &[PointCloud],
    names: Vec<String>,
    cfg: &RunConfig,
    truth: Option<&[Vec<usize>]>,
) -> Result<LineageFile> {
    if clouds.len() < 2 {
        return Err(AppError::Input(format!(
            "tracking needs at least 2 snapshots, found {}",
            clouds.len()
        )));
    }
    if let Some(t) = truth {
        if t.len() != clouds.len() - 1 {
            return Err(AppError::Input(format!(
                "truth lists {} steps, expected {}",
                t.len(),
                clouds.len() - 1
            )));
        }
    }
    let known = cfg.known_correspondence;
    if known && clouds.iter().any(|c| c.len() != clouds[0].len()) {
        return Err(AppError::Input(
            "known correspondence needs snapshots of equal size".into(),
        ));
    }
    let networks = clouds
        .iter()
        .map(|pc| build_from_cloud(pc, cfg).map(|o| o.network))
        .collect::<Result<Vec<_>>>()?;
    let params = cfg.tpot_params();
    let mut steps = Vec::with_capacity(networks.len() - 1);
    for (k, w) in networks.windows(2).enumerate() {
        let (p, q) = (&w[0], &w[1]);
        let sol = solve(p, q, &params)?;
        log::info!(
            "step {k} -> {}: objective {:.6e} after {} iterations",
            k + 1,
            sol.objective,
            sol.iterations
        );
        let transfer = if known {
            Coupling::identity(p.point_mass())
        } else {
            sol.pair.pi_v.clone()
        };
        let step_truth = truth.map(|t| t[k].as_slice());
        let tpot_matching = extract_matching(&sol.pair.pi_e.plan);
        let tpot = ReportFile::new(
            &tpot_matching,
            matching_correlation(&transfer, p.incidence(), q.incidence(), &tpot_matching)?,
            step_truth.map(|t| permutation_accuracy(&tpot_matching, t)),
        );
        let base = pd_wasserstein_baseline(p.diagram(), q.diagram())?;
        let baseline = BaselineFile {
            distance: base.distance,
            report: ReportFile::new(
                &base.matching,
                matching_correlation(&transfer, p.incidence(), q.incidence(), &base.matching)?,
                step_truth.map(|t| permutation_accuracy(&base.matching, t)),
            ),
        };
        steps.push(TrackStep {
            from: k,
            to: k + 1,
            objective: sol.objective,
            tpot,
            baseline,
        });
    }
    let n_features: Vec<usize> = networks.iter().map(|n| n.n_features()).collect();
    let tpot_reports: Vec<ReportFile> = steps.iter().map(|s| s.tpot.clone()).collect();
    let all = |f: &dyn Fn(&TrackStep) -> &ReportFile| -> Vec<f64> {
        steps.iter().flat_map(|s| f(s).correlations.iter().copied()).collect()
    };
    let accuracies =
        |f: &dyn Fn(&TrackStep) -> &ReportFile| -> Vec<f64> { steps.iter().filter_map(|s| f(s).accuracy).collect() };
    let summary = TrackSummary {
        tpot_mean_correlation: mean(&all(&|s| &s.tpot)),
        baseline_mean_correlation: mean(&all(&|s| &s.baseline.report)),
        tpot_mean_accuracy: mean(&accuracies(&|s| &s.tpot)),
        baseline_mean_accuracy: mean(&accuracies(&|s| &s.baseline.report)),
    };
    let correlation = if known {
        "pearson correlation between each matched source incidence column, carried to the target \
         by the known identity point correspondence, and the matched target incidence column"
    } else {
        "pearson correlation between each matched source incidence column, carried to the target \
         by the row-normalized TpOT point plan, and the matched target incidence column"
    };
    Ok(LineageFile {
        snapshots: names,
        correlation: correlation.into(),
        lineages: chain_lineages(&n_features, &tpot_reports),
        steps,
        summary,
    })
}

/// The `.csv` files of a directory in name order.
pub fn snapshot_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| AppError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| AppError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Tracks the snapshot CSVs of a directory and writes `lineage.json`.
pub fn cmd_track(dir: &Path, cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let paths = snapshot_paths(dir)?;
    let clouds = paths.iter().map(|p| read_points_csv(p)).collect::<Result<Vec<_>>>()?;
    let names = paths.iter().map(|p| stem(p)).collect();
    let truth: Option<Vec<Vec<usize>>> = cfg.truth.as_deref().map(read_json).transpose()?;
    let lineage = track(&clouds, names, cfg, truth.as_deref())?;
    let path = cfg.output_dir.join("lineage.json");
    write_json(&path, &lineage)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(pairs: Vec<(usize, Option<usize>)>) -> ReportFile {
        ReportFile {
            masses: vec![1.0; pairs.len()],
            pairs,
            correlations: Vec::new(),
            accuracy: None,
        }
    }

    #[test]
    fn lineages_follow_matches() {
        let steps = vec![
            report(vec![(0, Some(1)), (1, Some(0))]),
            report(vec![(0, None), (1, Some(0)), (2, Some(1))]),
        ];
        let l = chain_lineages(&[2, 3, 2], &steps);
        assert_eq!(
            l,
            vec![
                vec![Some(0), Some(1), Some(0)],
                vec![Some(1), Some(0), None],
                vec![None, Some(2), Some(1)],
            ]
        );
    }

    #[test]
    fn duplicate_targets_keep_first_lineage() {
        let steps = vec![report(vec![(0, Some(0)), (1, Some(0))])];
        let l = chain_lineages(&[2, 1], &steps);
        assert_eq!(l, vec![vec![Some(0), Some(0)], vec![Some(1), None]]);
    }
}
