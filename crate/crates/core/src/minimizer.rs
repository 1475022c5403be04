//! Projected gradient descent with Armijo backtracking on the target
//! manifold, with periodic checks that the topological sector is kept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coset::{FieldMap, TargetSpace};
use crate::energy::{self, EnergyTerms};
use crate::error::{Error, Result};
use crate::topology::{self, HopfMethod};

/// Smallest admissible trial step.
pub const MIN_STEP: f64 = 1e-14;

/// Largest change of a monitored invariant tolerated between two checks,
/// and over the whole flow.
pub const SECTOR_JUMP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowConfig {
    /// Initial trial step; `None` means `0.1·h²`.
    pub step_init: Option<f64>,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    /// Stop when `sup_x |g(x)|/h³ ≤ grad_tol`; `None` means `1e-6·(1 + E₀)`.
    pub grad_tol: Option<f64>,
    pub max_iters: usize,
    pub invariant_check_every: usize,
    pub skyrme_weight: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step_init: None,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            grad_tol: None,
            max_iters: 1000,
            invariant_check_every: 50,
            skyrme_weight: 1.0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidFlowConfig(m.to_string()));
        if let Some(s) = self.step_init {
            if !(s > 0.0 && s.is_finite()) {
                return bad("step_init must be positive");
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if let Some(t) = self.grad_tol {
            if !(t > 0.0) {
                return bad("grad_tol must be positive");
            }
        }
        if self.invariant_check_every == 0 {
            return bad("invariant_check_every must be positive");
        }
        if !(self.skyrme_weight > 0.0 && self.skyrme_weight.is_finite()) {
            return bad("skyrme_weight must be positive");
        }
        Ok(())
    }
}

/// Invariants monitored during a flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorReading {
    /// Primary fluxes (S² targets only).
    pub fluxes: Option<[f64; 3]>,
    /// Hopf number (S², zero flux) or degree (SU(2)).
    pub secondary: Option<f64>,
}

impl SectorReading {
    fn max_change(&self, other: &SectorReading) -> f64 {
        let mut m: f64 = 0.0;
        if let (Some(a), Some(b)) = (self.fluxes, other.fluxes) {
            for p in 0..3 {
                m = m.max((a[p] - b[p]).abs());
            }
        }
        match (self.secondary, other.secondary) {
            (Some(a), Some(b)) => m.max((a - b).abs()),
            (None, None) => m,
            _ => f64::INFINITY,
        }
    }
}

pub fn read_sector(m: &FieldMap) -> Result<SectorReading> {
    match m.target() {
        TargetSpace::GroupSU2 => Ok(SectorReading {
            fluxes: None,
            secondary: Some(topology::degree_su2(m)?),
        }),
        TargetSpace::SphereS2 => {
            let fluxes = topology::primary_fluxes(m)?;
            let secondary = if fluxes.iter().all(|f| f.abs() < topology::FLUX_ZERO_TOL) {
                // A defect can carry slice flux that the averaged fluxes miss;
                // the Hopf number is then undefined and reads as a jump.
                match topology::hopf_invariant_with(m, HopfMethod::PoissonGauge) {
                    Ok(q) => Some(q),
                    Err(Error::SpectralSolveFailure(_)) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            Ok(SectorReading {
                fluxes: Some(fluxes),
                secondary,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: EnergyTerms,
    /// `sup_x |g(x)|/h³` at the start of the iteration.
    pub grad_sup: f64,
    /// Most recent invariant reading.
    pub sector: SectorReading,
    /// Step accepted to leave this state (0 for the last row).
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    GradTol,
    MaxIters,
    SectorJump { before: f64, after: f64 },
    StepUnderflow,
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::GradTol => "grad_tol",
            Termination::MaxIters => "max_iters",
            Termination::SectorJump { .. } => "sector_jump",
            Termination::StepUnderflow => "step_underflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
    pub grad_tol: f64,
}

impl FlowTrace {
    /// True when the logged total energy never increases.
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].energy.total <= w[0].energy.total)
    }

    pub fn initial_energy(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.energy.total)
    }

    pub fn final_energy(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.energy.total)
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub field: FieldMap,
    pub trace: FlowTrace,
}

/// Called after every accepted step with the new iteration count, field
/// and energy.
pub type Observer<'a> = dyn FnMut(usize, &FieldMap, &EnergyTerms) -> Result<()> + 'a;

fn sup_norm(grad: &[crate::lie::Quat], vol: f64) -> f64 {
    grad.iter().map(|q| q.norm()).fold(0.0, f64::max) / vol
}

fn retract_step(psi: &FieldMap, grad: &[crate::lie::Quat], tau: f64) -> Result<FieldMap> {
    let g = *psi.grid();
    let t = psi.target();
    let s = tau / g.cell_volume();
    let values: Vec<_> = psi
        .values()
        .par_iter()
        .zip(grad.par_iter())
        .map(|(&p, &d)| t.retract(p - d.scale(s)))
        .collect();
    FieldMap::new(g, t, values)
}

pub fn minimize(psi0: &FieldMap, cfg: &FlowConfig) -> Result<FlowResult> {
    minimize_observed(psi0, cfg, &mut |_, _, _| Ok(()))
}

pub fn minimize_observed(
    psi0: &FieldMap,
    cfg: &FlowConfig,
    observer: &mut Observer<'_>,
) -> Result<FlowResult> {
    cfg.validate()?;
    let g = *psi0.grid();
    let vol = g.cell_volume();
    let w = cfg.skyrme_weight;
    let mut psi = psi0.clone();
    let mut e = energy::energy_map_weighted(&psi, w).terms();
    let grad_tol = cfg.grad_tol.unwrap_or(1e-6 * (1.0 + e.total));
    let mut tau = cfg.step_init.unwrap_or(0.1 * g.spacing() * g.spacing());

    let mut sector = read_sector(&psi)?;
    let start = sector;
    let jump = |now: &SectorReading, last: &SectorReading| {
        let moved = now.max_change(last) > SECTOR_JUMP || now.max_change(&start) > SECTOR_JUMP;
        moved.then(|| Termination::SectorJump {
            before: last.secondary.unwrap_or(f64::NAN),
            after: now.secondary.unwrap_or(f64::NAN),
        })
    };
    let mut safe = (psi.clone(), 0usize);
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut iter = 0;

    let termination = loop {
        let grad = energy::gradient(&psi, w);
        let gsup = sup_norm(&grad, vol);
        rows.push(TraceRow {
            iter,
            energy: e,
            grad_sup: gsup,
            sector,
            step: 0.0,
        });
        if gsup <= grad_tol {
            break Termination::GradTol;
        }
        if iter >= cfg.max_iters {
            break Termination::MaxIters;
        }
        let gsq: f64 = grad.iter().map(|q| q.norm_sq()).sum::<f64>() / vol;
        let mut trial = tau / cfg.backtrack_factor;
        let accepted = loop {
            if trial < MIN_STEP {
                break None;
            }
            let cand = retract_step(&psi, &grad, trial)?;
            let ce = energy::energy_map_weighted(&cand, w).terms();
            if ce.total <= e.total - cfg.armijo_c * trial * gsq {
                break Some((cand, ce));
            }
            trial *= cfg.backtrack_factor;
        };
        let Some((cand, ce)) = accepted else {
            break Termination::StepUnderflow;
        };
        rows.last_mut().expect("row pushed above").step = trial;
        tau = trial;
        psi = cand;
        e = ce;
        iter += 1;
        observer(iter, &psi, &e)?;

        if iter % cfg.invariant_check_every == 0 {
            let now = read_sector(&psi)?;
            if let Some(t) = jump(&now, &sector) {
                break t;
            }
            sector = now;
            safe = (psi.clone(), iter);
        }
    };

    let mut termination = termination;
    if !matches!(termination, Termination::SectorJump { .. })
        && iter % cfg.invariant_check_every != 0
    {
        let now = read_sector(&psi)?;
        match jump(&now, &sector) {
            Some(t) => termination = t,
            None => {
                if let Some(last) = rows.last_mut() {
                    last.sector = now;
                }
            }
        }
    }
    if matches!(termination, Termination::SectorJump { .. }) {
        let (field, at) = safe;
        rows.retain(|r| r.iter <= at);
        if let Some(last) = rows.last_mut() {
            last.step = 0.0;
        }
        psi = field;
    }
    Ok(FlowResult {
        field: psi,
        trace: FlowTrace {
            rows,
            termination,
            grad_tol,
        },
    })
}

/// Largest `|dE/dε|/V` over `directions` random tangent directions of unit
/// sup norm, by central differences with step `eps`.
pub fn stationarity_probe(
    psi: &FieldMap,
    skyrme_weight: f64,
    directions: usize,
    eps: f64,
    seed: u64,
) -> Result<f64> {
    let g = *psi.grid();
    let t = psi.target();
    let fixed = g.boundary() == crate::forms::BoundaryMode::FixedBoundary;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let dir: Vec<_> = psi
            .values()
            .iter()
            .enumerate()
            .map(|(s, &p)| {
                if fixed && g.is_boundary(s) {
                    return crate::lie::Quat::ZERO;
                }
                let r = crate::lie::Quat::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                t.tangent_project(p, r)
            })
            .collect();
        let sup = dir.iter().map(|q| q.norm()).fold(0.0, f64::max);
        let eval = |e: f64| -> Result<f64> {
            let m = FieldMap::from_fn(g, t, |s| psi.at(s) + dir[s].scale(e / sup))?;
            Ok(energy::energy_map_weighted(&m, skyrme_weight).total)
        };
        let dd = (eval(eps)? - eval(-eps)?) / (2.0 * eps);
        worst = worst.max(dd.abs() / g.volume());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VkRow {
    pub charge: f64,
    pub energy: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VkTable {
    pub rows: Vec<VkRow>,
    /// max/min of `E/|Q|^{3/4}` over the rows.
    pub spread: f64,
}

/// `E_min/|Q|^{3/4}` per entry and the spread of these ratios.
pub fn vk_scaling_probe(results: &[(f64, f64)]) -> VkTable {
    let rows: Vec<VkRow> = results
        .iter()
        .map(|&(q, e)| VkRow {
            charge: q,
            energy: e,
            ratio: e / q.abs().powf(0.75),
        })
        .collect();
    let hi = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    VkTable {
        spread: if rows.is_empty() { 1.0 } else { hi / lo },
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields;
    use crate::forms::{BoundaryMode, Grid3};
    use crate::lie::Quat;

    #[test]
    fn config_validation() {
        assert!(FlowConfig::default().validate().is_ok());
        let bad = FlowConfig {
            backtrack_factor: 1.0,
            ..FlowConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidFlowConfig(_))));
    }

    #[test]
    fn constant_field_stops_immediately() {
        let g = Grid3::periodic(8, 2.0).unwrap();
        let psi = FieldMap::constant(g, TargetSpace::SphereS2, Quat::J).unwrap();
        let r = minimize(&psi, &FlowConfig::default()).unwrap();
        assert_eq!(r.trace.termination, Termination::GradTol);
        assert_eq!(r.trace.rows.len(), 1);
        assert_eq!(r.trace.final_energy(), 0.0);
    }

    #[test]
    fn trivial_sector_relaxes() {
        let g = Grid3::periodic(12, 3.0).unwrap();
        let psi = fields::random_smooth(g, TargetSpace::SphereS2, 11, 1.5, 0.3).unwrap();
        let cfg = FlowConfig {
            max_iters: 400,
            ..FlowConfig::default()
        };
        let r = minimize(&psi, &cfg).unwrap();
        assert!(r.trace.is_monotone());
        assert!(r.trace.final_energy() < 1e-3 * r.trace.initial_energy());
    }

    #[test]
    fn flow_is_deterministic() {
        let g = Grid3::new(10, 3.0, BoundaryMode::FixedBoundary).unwrap();
        let u = fields::random_smooth(g, TargetSpace::GroupSU2, 4, 1.0, 1.0).unwrap();
        let cfg = FlowConfig {
            max_iters: 20,
            invariant_check_every: 5,
            ..FlowConfig::default()
        };
        let a = minimize(&u, &cfg).unwrap();
        let b = minimize(&u, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.field, b.field);
        for s in 0..g.sites() {
            if g.is_boundary(s) {
                assert_eq!(a.field.at(s), u.at(s));
            }
        }
    }

    #[test]
    fn final_reading_is_checked() {
        // unwinds within 30 steps, before the first periodic check
        let g = Grid3::new(10, 3.0, BoundaryMode::FixedBoundary).unwrap();
        let u = fields::hedgehog(g, 1.0, None).unwrap();
        let cfg = FlowConfig {
            max_iters: 30,
            ..FlowConfig::default()
        };
        let r = minimize(&u, &cfg).unwrap();
        assert_eq!(r.trace.termination.name(), "sector_jump");
        assert_eq!(r.trace.rows.len(), 1);
        assert_eq!(r.field, u);
    }

    #[test]
    fn vk_table() {
        let t = vk_scaling_probe(&[(1.0, 5.0)]);
        assert_eq!(t.spread, 1.0);
        let t = vk_scaling_probe(&[(1.0, 5.0), (-2.0, 10.0 * 2f64.powf(-0.25))]);
        assert!((t.rows[1].ratio - 5.0).abs() < 1e-12);
        assert!((t.spread - 1.0).abs() < 1e-12);
    }
}
