//! Run orchestration for the `fskyrme` subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{make_initializer, make_initializer_on, RunConfig};
use crate::coset::FieldMap;
use crate::energy::{self, EnergyTerms};
use crate::error::{Error, Result};
use crate::forms::{Grid3, ScalarField};
use crate::identities;
use crate::minimizer::{self, FlowTrace};
use crate::snapshot::FieldSnapshot;
use crate::topology::{self, InvariantReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Minimize,
    Invariants,
    Identities,
    Convergence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Minimize => "minimize",
            Command::Invariants => "invariants",
            Command::Identities => "identities",
            Command::Convergence => "convergence",
        }
    }
}

/// Result of a subcommand: whether its declared checks passed, a short
/// human-readable summary, and the files written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    match cmd {
        Command::Minimize => run_minimize(cfg, out),
        Command::Invariants => run_invariants(cfg, out),
        Command::Identities => run_identities(cfg, out),
        Command::Convergence => run_convergence(cfg, out),
    }
}

fn write_file(path: PathBuf, contents: impl AsRef<[u8]>, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// `energy.csv`: every `log_every`-th trace row and the last one. The last
/// column is the most recent Hopf number or degree reading (NaN when
/// undefined).
pub fn energy_csv(trace: &FlowTrace, log_every: usize) -> String {
    let mut s = String::from("iter,E_dirichlet,E_skyrme,E_total,grad_norm,hopf_or_degree\n");
    let last = trace.rows.len().saturating_sub(1);
    for (i, r) in trace.rows.iter().enumerate() {
        if r.iter % log_every != 0 && i != last {
            continue;
        }
        let sec = r.sector.secondary.unwrap_or(f64::NAN);
        writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.iter, r.energy.dirichlet, r.energy.skyrme, r.energy.total, r.grad_sup, sec
        )
        .expect("writing to a String");
    }
    s
}

/// Legacy ASCII VTK of a scalar density on the site lattice.
pub fn vtk_structured_points(f: &ScalarField, name: &str) -> String {
    let g = f.grid();
    let n = g.n();
    let h = g.spacing();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "fskyrme {name}").unwrap();
    s.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    writeln!(s, "DIMENSIONS {n} {n} {n}").unwrap();
    s.push_str("ORIGIN 0 0 0\n");
    writeln!(s, "SPACING {h:?} {h:?} {h:?}").unwrap();
    writeln!(s, "POINT_DATA {}", g.sites()).unwrap();
    writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
    for v in f.values() {
        writeln!(s, "{v:.16e}").unwrap();
    }
    s
}

#[derive(Debug, Serialize)]
struct MinimizeReport<'a> {
    termination: &'static str,
    iterations: usize,
    monotone: bool,
    initial_energy: f64,
    final_energy: EnergyTerms,
    grad_tol: f64,
    invariants: Option<InvariantReport>,
    invariant_error: Option<String>,
    config: &'a RunConfig,
}

fn snapshot_path(out: &Path, iter: usize) -> PathBuf {
    out.join(format!("snapshot_{iter:06}.bin"))
}

fn run_minimize(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let psi0 = make_initializer(cfg)?;
    let every = cfg.output.snapshot_every;
    let mut files = Vec::new();
    let result = minimizer::minimize_observed(&psi0, &cfg.flow, &mut |iter, psi, e| {
        if every > 0 && iter % every == 0 {
            let snap = FieldSnapshot {
                field: psi.clone(),
                iteration: iter,
                energy: e.total,
            };
            let path = snapshot_path(out, iter);
            snap.write(&path)?;
            files.push(path);
        }
        Ok(())
    })?;
    let trace = &result.trace;
    let last = trace.rows.last().expect("trace has a row");

    write_file(out.join("energy.csv"), energy_csv(trace, cfg.output.log_every), &mut files)?;
    let snap = FieldSnapshot {
        field: result.field.clone(),
        iteration: last.iter,
        energy: last.energy.total,
    };
    let path = out.join("final.bin");
    snap.write(&path)?;
    files.push(path);

    let (invariants, invariant_error) = match topology::invariant_report(&result.field, cfg.hopf_method) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = MinimizeReport {
        termination: trace.termination.name(),
        iterations: last.iter,
        monotone: trace.is_monotone(),
        initial_energy: trace.initial_energy(),
        final_energy: last.energy,
        grad_tol: trace.grad_tol,
        invariants: invariants.clone(),
        invariant_error,
        config: cfg,
    };
    write_file(out.join("invariants.json"), to_json(&report), &mut files)?;

    if cfg.output.emit_vtk {
        let dens = energy::energy_map_weighted(&result.field, cfg.flow.skyrme_weight).density;
        write_file(out.join("energy_density.vtk"), vtk_structured_points(&dens, "energy_density"), &mut files)?;
    }

    let kept = !matches!(trace.termination, minimizer::Termination::SectorJump { .. });
    let trusted = invariants.as_ref().is_some_and(|r| r.trusted);
    let mut summary = format!(
        "{} after {} iterations: E {:.6} -> {:.6}, monotone {}",
        trace.termination.name(),
        last.iter,
        trace.initial_energy(),
        last.energy.total,
        report.monotone
    );
    if let Some(q) = invariants.as_ref().and_then(|r| r.secondary_raw()) {
        write!(summary, ", invariant {q:.4}").unwrap();
    }
    Ok(Outcome {
        passed: report.monotone && kept && trusted,
        summary,
        files,
    })
}

fn run_invariants(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let psi = make_initializer(cfg)?;
    let report = topology::invariant_report(&psi, cfg.hopf_method)?;
    let e = energy::energy_map_weighted(&psi, cfg.flow.skyrme_weight).terms();
    #[derive(Serialize)]
    struct Doc<'a> {
        invariants: &'a InvariantReport,
        energy: EnergyTerms,
    }
    let mut files = Vec::new();
    write_file(
        out.join("invariants.json"),
        to_json(&Doc {
            invariants: &report,
            energy: e,
        }),
        &mut files,
    )?;
    let sector = report.sector();
    Ok(Outcome {
        passed: report.trusted,
        summary: format!(
            "fluxes {:?}, secondary {:?} (raw {:?}), drift {:.3e}",
            sector.fluxes,
            sector.secondary,
            report.secondary_raw(),
            report.drift
        ),
        files,
    })
}

fn run_identities(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let table = identities::identity_table(cfg.grid.n, cfg.identities_samples, cfg.identities_seed)?;
    let mut files = Vec::new();
    write_file(out.join("identities.txt"), table.render(), &mut files)?;
    write_file(out.join("identities.json"), to_json(&table), &mut files)?;
    let failed = table.rows.iter().filter(|r| !r.pass).count();
    Ok(Outcome {
        passed: failed == 0,
        summary: format!(
            "{} identities at n={} and n={}, {} failed",
            table.rows.len(),
            table.n_coarse,
            table.n_fine,
            failed
        ),
        files,
    })
}

/// Relative slack allowed when checking that drift does not grow.
pub const DRIFT_SLACK: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub spacing: f64,
    pub energy: f64,
    pub invariant: Option<f64>,
    pub drift: f64,
}

/// Initial field, energy and invariant drift at each size in
/// `cfg.convergence_sizes`, keeping the box fixed.
pub fn convergence_rows(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    let mut sizes = cfg.convergence_sizes.clone();
    sizes.sort_unstable();
    sizes
        .into_iter()
        .map(|n| {
            let g = Grid3::new(n, cfg.grid.box_length, cfg.grid.boundary)?;
            let psi: FieldMap = make_initializer_on(cfg, g)?;
            let report = topology::invariant_report(&psi, cfg.hopf_method)?;
            Ok(ConvergenceRow {
                n,
                spacing: g.spacing(),
                energy: energy::energy_map_weighted(&psi, cfg.flow.skyrme_weight).total,
                invariant: report.secondary_raw(),
                drift: report.drift,
            })
        })
        .collect()
}

/// Drift never grows by more than [`DRIFT_SLACK`] between refinements.
pub fn drift_monotone(rows: &[ConvergenceRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].drift <= w[0].drift * (1.0 + DRIFT_SLACK) + 1e-12)
}

fn run_convergence(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let rows = convergence_rows(cfg)?;
    let mut csv = String::from("n,h,E_total,invariant,drift\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.n,
            r.spacing,
            r.energy,
            r.invariant.unwrap_or(f64::NAN),
            r.drift
        )
        .unwrap();
    }
    let mut files = Vec::new();
    write_file(out.join("convergence.csv"), csv, &mut files)?;
    let ok = drift_monotone(&rows);
    let last = rows.last().expect("at least two sizes");
    Ok(Outcome {
        passed: ok,
        summary: format!(
            "{} sizes, drift {:.3e} at n={}, drift monotone {}",
            rows.len(),
            last.drift,
            last.n,
            ok
        ),
        files,
    })
}
