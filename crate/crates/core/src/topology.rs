//! Topological invariants: degree of SU(2) maps, primary fluxes and the
//! Hopf number of S² maps, the decomposed secondary Chern-Simons integral
//! and the additivity check for pointwise products.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::constants::{DEGREE_NORMALIZATION, FLUX_NORMALIZATION, HOPF_NORMALIZATION};
use crate::coset::{self, FieldMap, ReferenceMap, TargetSpace};
use crate::error::{Error, Result};
use crate::forms::{self, deterministic_sum, BoundaryMode, GForm, Grid3, ScalarField};
use crate::lie::{AlgebraVec, Quat};

/// Fluxes below this are treated as zero when a Hopf number is requested.
pub const FLUX_ZERO_TOL: f64 = 0.1;

/// Angle from `−i` inside which the explicit Hopf lift is refused.
pub const ANTIPODE_ANGLE: f64 = 1e-3;

fn expect(m: &FieldMap, t: TargetSpace) -> Result<()> {
    if m.target() == t {
        Ok(())
    } else {
        Err(Error::TargetMismatch {
            expected: t.name(),
            found: m.target().name(),
        })
    }
}

/// `tr(α∧β∧γ)` of three 1-forms as a scalar field.
fn trace3(a: &GForm, b: &GForm, c: &GForm) -> Result<ScalarField> {
    let w = forms::wedge(&forms::wedge(a, b)?, c)?;
    let g = *a.grid();
    Ok(ScalarField::from_fn(g, |s| 2.0 * w.at(s, 0).w))
}

/// Degree density `c_G tr(a∧a∧a)` of an SU(2) map.
pub fn degree_density(u: &FieldMap) -> Result<ScalarField> {
    expect(u, TargetSpace::GroupSU2)?;
    let a = coset::pure_gauge_potential(u)?.potential;
    let t = trace3(&a, &a, &a)?;
    Ok(ScalarField::from_fn(*u.grid(), |s| DEGREE_NORMALIZATION * t.values()[s]))
}

pub fn degree_su2(u: &FieldMap) -> Result<f64> {
    Ok(degree_density(u)?.integrate())
}

/// `|deg(u·v) − deg(u) − deg(v)|`.
pub fn additivity_check(u: &FieldMap, v: &FieldMap) -> Result<f64> {
    let uv = u.mul(v)?;
    Ok((degree_su2(&uv)? - degree_su2(u)? - degree_su2(v)?).abs())
}

/// Signed solid angle of the spherical triangle `(a, b, c)`.
#[inline]
pub fn solid_angle(a: AlgebraVec, b: AlgebraVec, c: AlgebraVec) -> f64 {
    2.0 * a.dot(b.cross(c)).atan2(1.0 + a.dot(b) + b.dot(c) + c.dot(a))
}

/// Pulled-back area form, one array per dual axis: the solid angle swept by
/// ψ over the plaquette at x spanned by `e_{p+1}, e_{p+2}`, divided by h².
/// To leading order this is `ψ·(T_{p+1}×T_{p+2})`; summed over a coordinate
/// slice it is 4π times an integer.
pub fn area_form(psi: &FieldMap) -> Result<[Vec<f64>; 3]> {
    expect(psi, TargetSpace::SphereS2)?;
    let g = *psi.grid();
    let inv_area = 1.0 / (g.spacing() * g.spacing());
    let v = |s: usize| psi.at(s).imag();
    Ok(std::array::from_fn(|p| {
        let (a, b) = ((p + 1) % 3, (p + 2) % 3);
        (0..g.sites())
            .into_par_iter()
            .map(|s| {
                let s1 = g.forward(s, a);
                let s2 = g.forward(s1, b);
                let s3 = g.forward(s, b);
                let (p0, p1, p2, p3) = (v(s), v(s1), v(s2), v(s3));
                (solid_angle(p0, p1, p2) + solid_angle(p0, p2, p3)) * inv_area
            })
            .collect()
    }))
}

/// Fluxes of the area form through the coordinate 2-tori.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxReport {
    /// Slice-averaged flux per dual axis.
    pub fluxes: [f64; 3],
    /// Flux through each slice `x_p = const`, per dual axis.
    pub per_slice: [Vec<f64>; 3],
}

impl FluxReport {
    /// `max − min` over parallel slices, worst axis.
    pub fn slice_spread(&self) -> f64 {
        self.per_slice
            .iter()
            .map(|v| {
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

pub fn primary_flux_report(psi: &FieldMap) -> Result<FluxReport> {
    expect(psi, TargetSpace::SphereS2)?;
    let g = *psi.grid();
    let n = g.n();
    if g.boundary() == BoundaryMode::FixedBoundary {
        return Ok(FluxReport {
            fluxes: [0.0; 3],
            per_slice: std::array::from_fn(|_| vec![0.0; n]),
        });
    }
    let f = area_form(psi)?;
    let area = g.spacing() * g.spacing();
    let per_slice: [Vec<f64>; 3] = std::array::from_fn(|p| {
        let mut slices = vec![0.0; n];
        for (s, &v) in f[p].iter().enumerate() {
            slices[g.coords(s)[p]] += v;
        }
        slices.iter().map(|v| v * area * FLUX_NORMALIZATION).collect()
    });
    let fluxes = std::array::from_fn(|p| per_slice[p].iter().sum::<f64>() / n as f64);
    Ok(FluxReport { fluxes, per_slice })
}

pub fn primary_fluxes(psi: &FieldMap) -> Result<[f64; 3]> {
    Ok(primary_flux_report(psi)?.fluxes)
}

struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let fft = if inverse { &self.inverse } else { &self.forward };
        for axis in 0..3 {
            let stride = n.pow(axis as u32);
            let lines: Vec<Vec<Complex64>> = (0..n * n)
                .into_par_iter()
                .map(|line| {
                    let (lo, hi) = (line % stride, line / stride);
                    let base = lo + hi * stride * n;
                    let mut buf: Vec<Complex64> = (0..n).map(|t| data[base + t * stride]).collect();
                    fft.process(&mut buf);
                    buf
                })
                .collect();
            for (line, buf) in lines.into_iter().enumerate() {
                let (lo, hi) = (line % stride, line / stride);
                let base = lo + hi * stride * n;
                for (t, v) in buf.into_iter().enumerate() {
                    data[base + t * stride] = v;
                }
            }
        }
        if inverse {
            let scale = 1.0 / (n * n * n) as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// Coulomb-gauge solution of `dA = F` on the periodic grid, with `d` the
/// forward-difference exterior derivative. Fails if F has a mean
/// component large enough to carry flux.
pub fn coulomb_potential(grid: &Grid3, f: &[Vec<f64>; 3]) -> Result<[Vec<f64>; 3]> {
    let n = grid.n();
    let sites = grid.sites();
    if f.iter().any(|c| c.len() != sites) {
        return Err(Error::GridMismatch);
    }
    if f.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::SpectralSolveFailure("non-finite source".into()));
    }
    let l = grid.box_length();
    for (p, c) in f.iter().enumerate() {
        let mean = c.iter().sum::<f64>() / sites as f64;
        let flux = mean * l * l * FLUX_NORMALIZATION;
        if flux.abs() >= FLUX_ZERO_TOL {
            return Err(Error::SpectralSolveFailure(format!(
                "source component {p} has nonzero mean (flux {flux:.4})"
            )));
        }
    }
    let fft = Fft3::new(n);
    let hat: Vec<Vec<Complex64>> = f
        .iter()
        .map(|c| {
            let mut d: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.run(&mut d, false);
            d
        })
        .collect();
    let h = grid.spacing();
    let symbol: Vec<Complex64> = (0..n)
        .map(|m| (Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / n as f64) - 1.0) / h)
        .collect();
    let mut a_hat: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); sites]);
    for s in 0..sites {
        let m = grid.coords(s);
        let d = [symbol[m[0]], symbol[m[1]], symbol[m[2]]];
        let d2: f64 = d.iter().map(|z| z.norm_sqr()).sum();
        if d2 == 0.0 {
            continue;
        }
        let db = [d[0].conj(), d[1].conj(), d[2].conj()];
        let fh = [hat[0][s], hat[1][s], hat[2][s]];
        for p in 0..3 {
            let (a, b) = ((p + 1) % 3, (p + 2) % 3);
            a_hat[p][s] = -(db[a] * fh[b] - db[b] * fh[a]) / d2;
        }
    }
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::new());
    for p in 0..3 {
        let mut d = std::mem::take(&mut a_hat[p]);
        fft.run(&mut d, true);
        out[p] = d.iter().map(|z| z.re).collect();
        if out[p].iter().any(|v| !v.is_finite()) {
            return Err(Error::SpectralSolveFailure("non-finite potential".into()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HopfMethod {
    PoissonGauge,
    LiftCS,
}

fn check_zero_flux(psi: &FieldMap) -> Result<()> {
    let fluxes = primary_fluxes(psi)?;
    if fluxes.iter().any(|f| f.abs() >= FLUX_ZERO_TOL) {
        return Err(Error::NonzeroPrimaryFlux { fluxes });
    }
    Ok(())
}

/// Hopf number by the Coulomb-gauge route, `c_H ∫ A∧F`.
pub fn hopf_invariant(psi: &FieldMap) -> Result<f64> {
    expect(psi, TargetSpace::SphereS2)?;
    check_zero_flux(psi)?;
    let g = *psi.grid();
    let f = area_form(psi)?;
    let a = coulomb_potential(&g, &f)?;
    let dens: Vec<f64> = (0..g.sites())
        .into_par_iter()
        .map(|s| (0..3).map(|p| a[p][s] * f[p][s]).sum())
        .collect();
    Ok(HOPF_NORMALIZATION * deterministic_sum(&dens, g.n() * g.n()) * g.cell_volume())
}

/// `u = (1 − ψi)/|1 − ψi|`, so that `Ad(u)i = ψ`.
pub fn lift_through_hopf(psi: &FieldMap) -> Result<FieldMap> {
    expect(psi, TargetSpace::SphereS2)?;
    let cap = ANTIPODE_ANGLE.cos();
    for (site, q) in psi.values().iter().enumerate() {
        if -q.x >= cap {
            return Err(Error::AntipodeHit { site });
        }
    }
    FieldMap::from_fn(*psi.grid(), TargetSpace::GroupSU2, |s| {
        (Quat::ONE - psi.at(s) * Quat::I).normalize()
    })
}

/// The four trace terms of `tr(a∧a∧a)` split along `a = a∥ + a⊥`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CsDecomposition {
    /// `∫ c_G [tr(a∥³) + 3tr(a∥²a⊥) + 3tr(a∥a⊥²) + tr(a⊥³)]`.
    pub total: f64,
    /// `∫ c_G tr(a∧a∧a)` evaluated without splitting.
    pub direct: f64,
    /// `∫ |c_G·term|` for the four terms in the order above.
    pub term_l1: [f64; 4],
}

pub fn secondary_cs_decomposed(a: &GForm, phi: &ReferenceMap) -> Result<CsDecomposition> {
    let (par, perp) = coset::isotropy_decompose(a, phi)?;
    let terms = [
        trace3(&par, &par, &par)?,
        trace3(&par, &par, &perp)?,
        trace3(&par, &perp, &perp)?,
        trace3(&perp, &perp, &perp)?,
    ];
    let mult = [1.0, 3.0, 3.0, 1.0];
    let g = *a.grid();
    let sum = ScalarField::from_fn(g, |s| {
        DEGREE_NORMALIZATION * (0..4).map(|t| mult[t] * terms[t].values()[s]).sum::<f64>()
    });
    let term_l1 = std::array::from_fn(|t| {
        ScalarField::from_fn(g, |s| (DEGREE_NORMALIZATION * mult[t] * terms[t].values()[s]).abs())
            .integrate()
    });
    let direct = trace3(a, a, a)?;
    let direct = ScalarField::from_fn(g, |s| DEGREE_NORMALIZATION * direct.values()[s]).integrate();
    Ok(CsDecomposition {
        total: sum.integrate(),
        direct,
        term_l1,
    })
}

/// A continuous lift `u = s(ψ)·exp(χ i)` of ψ through the Hopf map, where
/// `s` is the explicit lift. The phase χ is chosen so that every lattice
/// link of u carries a small U(1) fibre angle: the fibre angles of `s` are
/// replaced by a Coulomb-gauge connection with the same plaquette
/// holonomies, which removes the vortex `s` has along ψ⁻¹(−i).
pub fn continuous_lift(psi: &FieldMap) -> Result<FieldMap> {
    check_zero_flux(psi)?;
    let s = lift_through_hopf(psi)?;
    let g = *psi.grid();
    let n = g.n();
    let h = g.spacing();
    let sv = s.values();

    // fibre angle of each link
    let alpha: [Vec<f64>; 3] = std::array::from_fn(|p| {
        (0..g.sites())
            .into_par_iter()
            .map(|x| {
                let q = sv[x].conj() * sv[g.forward(x, p)];
                q.x.atan2(q.w)
            })
            .collect()
    });
    let wrap = |t: f64| t - 2.0 * PI * (t / (2.0 * PI)).round();
    let curv: [Vec<f64>; 3] = std::array::from_fn(|p| {
        let (a, b) = ((p + 1) % 3, (p + 2) % 3);
        (0..g.sites())
            .map(|x| {
                let c = alpha[a][x] + alpha[b][g.forward(x, a)]
                    - alpha[a][g.forward(x, b)]
                    - alpha[b][x];
                wrap(c) / (h * h)
            })
            .collect()
    });
    let pot = coulomb_potential(&g, &curv)?;
    let mut theta: [Vec<f64>; 3] = std::array::from_fn(|p| pot[p].iter().map(|v| v * h).collect());
    // harmonic part: match the holonomy of each non-contractible cycle
    for p in 0..3 {
        let mut x = 0;
        let mut hol = 0.0;
        for _ in 0..n {
            hol += alpha[p][x] - theta[p][x];
            x = g.forward(x, p);
        }
        let shift = wrap(hol) / n as f64;
        for t in theta[p].iter_mut() {
            *t += shift;
        }
    }
    let mut chi = vec![0.0; g.sites()];
    for x in 1..g.sites() {
        let c = g.coords(x);
        let axis = if c[0] > 0 { 0 } else if c[1] > 0 { 1 } else { 2 };
        let mut pc = c;
        pc[axis] -= 1;
        let parent = g.index(pc);
        chi[x] = chi[parent] + theta[axis][parent] - alpha[axis][parent];
    }
    FieldMap::from_fn(g, TargetSpace::GroupSU2, |x| {
        sv[x] * Quat::new(chi[x].cos(), chi[x].sin(), 0.0, 0.0)
    })
}

/// Largest fibre angle `|atan2(q_x, q_w)|` over all links, `q = ū(x)u(x+e_p)`.
pub fn max_link_fibre_angle(u: &FieldMap) -> f64 {
    let g = *u.grid();
    (0..3)
        .flat_map(|p| (0..g.sites()).map(move |x| (p, x)))
        .map(|(p, x)| {
            let q = u.at(x).conj() * u.at(g.forward(x, p));
            q.x.atan2(q.w).abs()
        })
        .fold(0.0, f64::max)
}

/// Hopf number through a lift: the decomposed secondary integral of
/// `u⁻¹du` relative to the constant reference `i`, for the continuous lift u.
pub fn hopf_via_lift(psi: &FieldMap) -> Result<f64> {
    let u = continuous_lift(psi)?;
    let a = coset::pure_gauge_potential(&u)?.potential;
    let phi = ReferenceMap::new(FieldMap::constant(*psi.grid(), TargetSpace::SphereS2, Quat::I)?)?;
    Ok(secondary_cs_decomposed(&a, &phi)?.total)
}

pub fn hopf_invariant_with(psi: &FieldMap, method: HopfMethod) -> Result<f64> {
    match method {
        HopfMethod::PoissonGauge => hopf_invariant(psi),
        HopfMethod::LiftCS => hopf_via_lift(psi),
    }
}

/// A raw invariant with its nearest integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rounded {
    pub raw: f64,
    pub nearest: i64,
}

impl Rounded {
    pub fn new(raw: f64) -> Self {
        Rounded {
            raw,
            nearest: raw.round() as i64,
        }
    }

    pub fn drift(&self) -> f64 {
        (self.raw - self.nearest as f64).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub target: &'static str,
    pub degree: Option<Rounded>,
    pub fluxes: Option<[Rounded; 3]>,
    pub hopf: Option<Rounded>,
    pub method: Option<HopfMethod>,
    /// Max `|raw − nearest|` over the reported numbers.
    pub drift: f64,
    /// Rounding is trusted when `drift < 0.5`.
    pub trusted: bool,
}

/// Sector datum: fluxes, and the secondary invariant when they vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SectorLabel {
    pub fluxes: [i64; 3],
    pub secondary: Option<i64>,
}

impl InvariantReport {
    pub fn sector(&self) -> SectorLabel {
        let fluxes = self
            .fluxes
            .map(|f| f.map(|r| r.nearest))
            .unwrap_or([0; 3]);
        let secondary = if fluxes == [0; 3] {
            self.hopf.or(self.degree).map(|r| r.nearest)
        } else {
            None
        };
        SectorLabel { fluxes, secondary }
    }

    /// Hopf number (S²) or degree (SU(2)) raw value, if computed.
    pub fn secondary_raw(&self) -> Option<f64> {
        self.hopf.or(self.degree).map(|r| r.raw)
    }
}

pub fn invariant_report(m: &FieldMap, method: HopfMethod) -> Result<InvariantReport> {
    let mut report = InvariantReport {
        target: m.target().name(),
        degree: None,
        fluxes: None,
        hopf: None,
        method: None,
        drift: 0.0,
        trusted: true,
    };
    let mut drifts = Vec::new();
    match m.target() {
        TargetSpace::GroupSU2 => {
            let d = Rounded::new(degree_su2(m)?);
            drifts.push(d.drift());
            report.degree = Some(d);
        }
        TargetSpace::SphereS2 => {
            let f = primary_fluxes(m)?.map(Rounded::new);
            drifts.extend(f.iter().map(|r| r.drift()));
            report.fluxes = Some(f);
            if f.iter().all(|r| r.raw.abs() < FLUX_ZERO_TOL) {
                let h = Rounded::new(hopf_invariant_with(m, method)?);
                drifts.push(h.drift());
                report.hopf = Some(h);
                report.method = Some(method);
            }
        }
    }
    report.drift = drifts.into_iter().fold(0.0, f64::max);
    report.trusted = report.drift < 0.5;
    Ok(report)
}

/// Per-site check `max |Ad(u)i − ψ|` for a lift.
pub fn lift_residual(u: &FieldMap, psi: &FieldMap) -> f64 {
    u.values()
        .iter()
        .zip(psi.values())
        .map(|(q, p)| (q.ad(AlgebraVec::I).to_quat() - *p).norm())
        .fold(0.0, f64::max)
}
