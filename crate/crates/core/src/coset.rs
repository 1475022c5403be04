//! Coset-bundle calculus on the lattice: maps into SU(2) and S², their
//! coisotropy pullbacks, pure-gauge potentials, the isotropy split of a
//! potential relative to a reference map, stabilizer gauge actions and the
//! curvature formulas.
//!
//! Differences of target-valued maps are taken in the tangent space of the
//! target at the base site through the Riemannian logarithm: on S²
//! `T_i = log_{ψ(x)} ψ(x+e_i)/h`, on SU(2) `log(u(x+e_i)·ū(x))/h` (right
//! trivialization) or `log(ū(x)·u(x+e_i))/h` (left). The length of a
//! difference is the geodesic distance over h, so it grows monotonically
//! with the jump between neighbours.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{self, GForm, Grid3, ProjectorField, ScalarField};
use crate::lie::{AlgebraVec, Quat};

/// Membership tolerance for target-valued maps.
pub const TARGET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetSpace {
    /// SU(2) as unit quaternions; isotropy trivial.
    GroupSU2,
    /// S² = SU(2)/U(1) as unit imaginary quaternions, base point `i`,
    /// `h = iℝ` and `h⊥ = span{j, k}` at the base point.
    SphereS2,
}

impl TargetSpace {
    pub fn name(self) -> &'static str {
        match self {
            TargetSpace::GroupSU2 => "su2",
            TargetSpace::SphereS2 => "s2",
        }
    }

    pub fn base_point(self) -> Quat {
        match self {
            TargetSpace::GroupSU2 => Quat::ONE,
            TargetSpace::SphereS2 => Quat::I,
        }
    }

    /// Distance of `q` from the target manifold.
    pub fn deviation(self, q: Quat) -> f64 {
        match self {
            TargetSpace::GroupSU2 => (q.norm() - 1.0).abs(),
            TargetSpace::SphereS2 => q.w.abs().max((q.imag().norm() - 1.0).abs()),
        }
    }

    /// Nearest point of the target (normalization).
    pub fn retract(self, q: Quat) -> Quat {
        match self {
            TargetSpace::GroupSU2 => q.normalize(),
            TargetSpace::SphereS2 => q.im().normalize(),
        }
    }

    /// Orthogonal projection of an ambient vector onto the tangent space
    /// at `p`.
    pub fn tangent_project(self, p: Quat, v: Quat) -> Quat {
        match self {
            TargetSpace::GroupSU2 => v - p.scale(v.dot(p)),
            TargetSpace::SphereS2 => {
                let v = v.im();
                v - p.scale(v.dot(p))
            }
        }
    }

    fn expect(self, expected: TargetSpace) -> Result<()> {
        if self == expected {
            Ok(())
        } else {
            Err(Error::TargetMismatch {
                expected: expected.name(),
                found: self.name(),
            })
        }
    }
}

/// `θ/sin θ` and its derivative in θ, for `θ = atan2(s, c)` with `s ≥ 0`.
/// At the antipode (`s = 0`, `c < 0`) the direction is undefined and the
/// gain is reported as `(1, 0)`, i.e. the difference collapses to zero.
#[inline]
pub(crate) fn log_gain(s: f64, c: f64) -> (f64, f64) {
    let theta = s.atan2(c);
    if theta < 1e-4 {
        let t2 = theta * theta;
        return (1.0 + t2 / 6.0, theta / 3.0);
    }
    if s == 0.0 {
        return (1.0, 0.0);
    }
    (theta / s, (s - theta * c) / (s * s))
}

/// `log_{ψ_x}(ψ_y)/h` on S², as an ℝ³ vector tangent at `ψ_x`.
#[inline]
pub(crate) fn s2_tangent_diff(px: AlgebraVec, py: AlgebraVec, inv_h: f64) -> AlgebraVec {
    let c = px.dot(py);
    let v = py - px.scale(c);
    let (f, _) = log_gain(v.norm(), c);
    v.scale(f * inv_h)
}

/// Pullback of a covector `G` on [`s2_tangent_diff`] to ambient covectors
/// at `ψ_x` and `ψ_y`, exact for tangent variations.
#[inline]
pub(crate) fn s2_tangent_diff_adjoint(
    px: AlgebraVec,
    py: AlgebraVec,
    gv: AlgebraVec,
    inv_h: f64,
) -> (AlgebraVec, AlgebraVec) {
    let c = px.dot(py);
    let v = py - px.scale(c);
    let s = v.norm();
    let (f, df) = log_gain(s, c);
    let k = f * inv_h;
    let gx = gv.dot(px);
    let mut dx = (py.scale(gx) + gv.scale(c)).scale(-k);
    let mut dy = (gv - px.scale(gx)).scale(k);
    if s > 0.0 && df != 0.0 {
        let m = gv.dot(v) * df * inv_h;
        let u = v.scale(1.0 / s);
        dx = dx - (u.scale(c * c) + py.scale(s)).scale(m);
        dy += (u.scale(c) - px.scale(s)).scale(m);
    }
    (dx, dy)
}

/// `log(u_y·ū_x)/h`, the right-trivialized difference.
#[inline]
pub(crate) fn su2_right_diff(ux: Quat, uy: Quat, inv_h: f64) -> AlgebraVec {
    let q = uy * ux.conj();
    let v = q.imag();
    let (f, _) = log_gain(v.norm(), q.w);
    v.scale(f * inv_h)
}

/// Pullback of a covector `G` on [`su2_right_diff`] to ambient covectors
/// at `u_x` and `u_y`, exact for tangent variations.
#[inline]
pub(crate) fn su2_right_diff_adjoint(ux: Quat, uy: Quat, gv: AlgebraVec, inv_h: f64) -> (Quat, Quat) {
    let q = uy * ux.conj();
    let v = q.imag();
    let s = v.norm();
    let (f, df) = log_gain(s, q.w);
    let mut lam = Quat::from_parts(0.0, gv.scale(f * inv_h));
    if s > 0.0 && df != 0.0 {
        let m = gv.dot(v) * df * inv_h;
        lam += Quat::from_parts(-m * s, v.scale(m * q.w / s));
    }
    (lam.conj() * uy, lam * ux)
}

/// `log(ū_x·u_y)/h`, together with the real part `(Re(ū_x·u_y) − 1)/h` of
/// the raw difference quotient `ū·Δu/h`.
#[inline]
pub(crate) fn su2_left_diff(ux: Quat, uy: Quat, inv_h: f64) -> (AlgebraVec, f64) {
    let q = ux.conj() * uy;
    let v = q.imag();
    let (f, _) = log_gain(v.norm(), q.w);
    (v.scale(f * inv_h), (q.w - 1.0) * inv_h)
}

/// A lattice map into a target space.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    grid: Grid3,
    target: TargetSpace,
    values: Vec<Quat>,
}

impl FieldMap {
    /// Checks membership of every site within [`TARGET_TOL`].
    pub fn new(grid: Grid3, target: TargetSpace, values: Vec<Quat>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(Error::GridMismatch);
        }
        for (site, &q) in values.iter().enumerate() {
            let deviation = target.deviation(q);
            if !(deviation <= TARGET_TOL) {
                return Err(Error::OffTarget { site, deviation });
            }
        }
        Ok(FieldMap {
            grid,
            target,
            values,
        })
    }

    /// Builds a map by retracting `f(site)` onto the target.
    pub fn from_fn(
        grid: Grid3,
        target: TargetSpace,
        f: impl Fn(usize) -> Quat + Sync + Send,
    ) -> Result<Self> {
        let values = (0..grid.sites())
            .into_par_iter()
            .map(|s| target.retract(f(s)))
            .collect();
        FieldMap::new(grid, target, values)
    }

    pub fn constant(grid: Grid3, target: TargetSpace, q: Quat) -> Result<Self> {
        FieldMap::new(grid, target, vec![q; grid.sites()])
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn target(&self) -> TargetSpace {
        self.target
    }

    pub fn values(&self) -> &[Quat] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Quat> {
        self.values
    }

    #[inline]
    pub fn at(&self, site: usize) -> Quat {
        self.values[site]
    }

    /// Largest distance of any site from the target.
    pub fn max_deviation(&self) -> f64 {
        self.values
            .iter()
            .map(|&q| self.target.deviation(q))
            .fold(0.0, f64::max)
    }

    /// Left action of a fixed group element: `Ad(g)ψ` on S², `g·u` on SU(2).
    pub fn left_act(&self, g: Quat) -> FieldMap {
        let target = self.target;
        let values = self
            .values
            .par_iter()
            .map(|&q| match target {
                TargetSpace::GroupSU2 => (g * q).normalize(),
                TargetSpace::SphereS2 => g.ad_quat(q).im().normalize(),
            })
            .collect();
        FieldMap {
            grid: self.grid,
            target,
            values,
        }
    }

    /// `u·φ`: `Ad(u)φ` for an S² reference, the group product for SU(2).
    pub fn act_on(&self, phi: &FieldMap) -> Result<FieldMap> {
        self.target.expect(TargetSpace::GroupSU2)?;
        self.grid.same_as(&phi.grid)?;
        let target = phi.target;
        let values = self
            .values
            .par_iter()
            .zip(phi.values.par_iter())
            .map(|(&u, &p)| match target {
                TargetSpace::GroupSU2 => (u * p).normalize(),
                TargetSpace::SphereS2 => u.ad_quat(p).im().normalize(),
            })
            .collect();
        Ok(FieldMap {
            grid: self.grid,
            target,
            values,
        })
    }

    /// Pointwise inverse of an SU(2) map.
    pub fn inverse(&self) -> Result<FieldMap> {
        self.target.expect(TargetSpace::GroupSU2)?;
        Ok(FieldMap {
            grid: self.grid,
            target: self.target,
            values: self.values.iter().map(|q| q.conj()).collect(),
        })
    }

    /// Pointwise product `u·v` of SU(2) maps.
    pub fn mul(&self, other: &FieldMap) -> Result<FieldMap> {
        other.target.expect(TargetSpace::GroupSU2)?;
        self.act_on(other)
    }

    /// Hopf projection `ψ = Ad(u) i`.
    pub fn hopf_projection(&self) -> Result<FieldMap> {
        self.target.expect(TargetSpace::GroupSU2)?;
        let values = self
            .values
            .par_iter()
            .map(|&u| u.ad_quat(Quat::I).im().normalize())
            .collect();
        Ok(FieldMap {
            grid: self.grid,
            target: TargetSpace::SphereS2,
            values,
        })
    }

    /// Cyclic shift by `offset` sites.
    pub fn translated(&self, offset: [usize; 3]) -> FieldMap {
        let mut values = vec![Quat::ZERO; self.grid.sites()];
        for (s, &v) in self.values.iter().enumerate() {
            values[self.grid.shifted(s, offset)] = v;
        }
        FieldMap {
            grid: self.grid,
            target: self.target,
            values,
        }
    }

    /// Isotropy projector `Φ = pr_{h_φ}` of an S² map.
    pub fn projector(&self) -> Result<ProjectorField> {
        self.target.expect(TargetSpace::SphereS2)?;
        ProjectorField::new(self.grid, self.values.iter().map(|q| q.imag()).collect())
    }

    /// Logarithmic differential: `T_i` on S², `du = R_i·u` on SU(2),
    /// as a quaternion-valued 1-form.
    pub fn differential(&self) -> GForm {
        let g = self.grid;
        let inv_h = 1.0 / g.spacing();
        let v = &self.values;
        match self.target {
            TargetSpace::SphereS2 => GForm::from_fn(g, 1, |s, i| {
                s2_tangent_diff(v[s].imag(), v[g.forward(s, i)].imag(), inv_h).to_quat()
            }),
            TargetSpace::GroupSU2 => GForm::from_fn(g, 1, |s, i| {
                su2_right_diff(v[s], v[g.forward(s, i)], inv_h).to_quat() * v[s]
            }),
        }
    }

}

/// A reference map φ together with its isotropy data. For an SU(2)
/// reference the isotropy is trivial: `a∥ = 0`, `a⊥ = a`.
#[derive(Debug, Clone)]
pub struct ReferenceMap {
    map: FieldMap,
    projector: Option<ProjectorField>,
    coisotropy: GForm,
}

impl ReferenceMap {
    pub fn new(map: FieldMap) -> Result<Self> {
        let projector = match map.target {
            TargetSpace::SphereS2 => Some(map.projector()?),
            TargetSpace::GroupSU2 => None,
        };
        let coisotropy = pullback_coisotropy(&map);
        Ok(ReferenceMap {
            map,
            projector,
            coisotropy,
        })
    }

    pub fn map(&self) -> &FieldMap {
        &self.map
    }

    pub fn grid(&self) -> &Grid3 {
        &self.map.grid
    }

    pub fn projector(&self) -> Option<&ProjectorField> {
        self.projector.as_ref()
    }

    /// `φ*ω⊥`.
    pub fn coisotropy(&self) -> &GForm {
        &self.coisotropy
    }

    /// `Φα`; zero for a trivial isotropy.
    pub fn par(&self, alpha: &GForm) -> Result<GForm> {
        self.grid().same_as(alpha.grid())?;
        match &self.projector {
            Some(p) => p.apply(alpha),
            None => Ok(GForm::zeros(*alpha.grid(), alpha.degree())),
        }
    }

    /// `(I − Φ)α`.
    pub fn perp(&self, alpha: &GForm) -> Result<GForm> {
        self.grid().same_as(alpha.grid())?;
        match &self.projector {
            Some(p) => p.apply_perp(alpha),
            None => Ok(alpha.clone()),
        }
    }

    /// `dΦ∧α`; zero for a trivial isotropy.
    pub fn d_wedge(&self, alpha: &GForm) -> Result<GForm> {
        match &self.projector {
            Some(p) => p.d_wedge(alpha),
            None => Ok(GForm::zeros(*alpha.grid(), alpha.degree() + 1)),
        }
    }
}

/// `ψ*ω⊥`: `½ψ·T_i` on S², `Im(Δu·ū)/h` on SU(2).
pub fn pullback_coisotropy(psi: &FieldMap) -> GForm {
    let g = psi.grid;
    let inv_h = 1.0 / g.spacing();
    let v = &psi.values;
    match psi.target {
        TargetSpace::SphereS2 => GForm::from_fn(g, 1, |s, i| {
            let t = s2_tangent_diff(v[s].imag(), v[g.forward(s, i)].imag(), inv_h);
            (v[s] * t.to_quat()).scale(0.5).im()
        }),
        TargetSpace::GroupSU2 => GForm::from_fn(g, 1, |s, i| {
            su2_right_diff(v[s], v[g.forward(s, i)], inv_h).to_quat()
        }),
    }
}

/// Pure-gauge potential `a = u⁻¹du` together with the norm `(∫|Re|²)^{1/2}`
/// of the real residue dropped by the projection to Im H.
#[derive(Debug, Clone)]
pub struct PureGauge {
    pub potential: GForm,
    pub real_residue: f64,
}

pub fn pure_gauge_potential(u: &FieldMap) -> Result<PureGauge> {
    u.target.expect(TargetSpace::GroupSU2)?;
    let g = u.grid;
    let inv_h = 1.0 / g.spacing();
    let v = &u.values;
    let full = GForm::from_fn(g, 1, |s, i| {
        let (im, re) = su2_left_diff(v[s], v[g.forward(s, i)], inv_h);
        Quat::from_parts(re, im)
    });
    Ok(PureGauge {
        real_residue: full.real_part().l2_norm(),
        potential: full.imag(),
    })
}

/// `(a∥, a⊥)` relative to the reference; `a = a∥ + a⊥` exactly.
pub fn isotropy_decompose(a: &GForm, phi: &ReferenceMap) -> Result<(GForm, GForm)> {
    let par = phi.par(a)?;
    let perp = a.sub(&par)?;
    Ok((par, perp))
}

/// `D_φa = φ*ω⊥ + a⊥`.
pub fn d_phi(a: &GForm, phi: &ReferenceMap) -> Result<GForm> {
    phi.coisotropy.add(&phi.perp(a)?)
}

/// `a^w = Ad(w⁻¹)a + w⁻¹dw`.
pub fn gauge_transform(a: &GForm, w: &FieldMap) -> Result<GForm> {
    let wg = pure_gauge_potential(w)?.potential;
    let inv: Vec<Quat> = w.values.iter().map(|q| q.conj()).collect();
    a.ad(&inv).add(&wg)
}

/// Stabilizer section `w = cos θ + sin θ·φ` of an S² reference.
pub fn stabilizer_section(phi: &ReferenceMap, theta: &ScalarField) -> Result<FieldMap> {
    phi.map.target.expect(TargetSpace::SphereS2)?;
    phi.grid().same_as(theta.grid())?;
    let p = &phi.map.values;
    let t = theta.values();
    FieldMap::from_fn(*phi.grid(), TargetSpace::GroupSU2, |s| {
        let (sn, cs) = t[s].sin_cos();
        Quat::real(cs) + p[s].scale(sn)
    })
}

fn check_stabilizer(w: &FieldMap, phi: &ReferenceMap) -> Result<()> {
    w.target.expect(TargetSpace::GroupSU2)?;
    w.grid.same_as(phi.grid())?;
    for (site, (&q, &p)) in w.values.iter().zip(&phi.map.values).enumerate() {
        let deviation = match phi.map.target {
            TargetSpace::SphereS2 => (q.ad_quat(p) - p).norm(),
            TargetSpace::GroupSU2 => (q - Quat::ONE).norm(),
        };
        if !(deviation <= TARGET_TOL) {
            return Err(Error::NotInStabilizer { site, deviation });
        }
    }
    Ok(())
}

/// `b^w = Ad(w⁻¹)b + w⁻¹dw − (Ad(w⁻¹) − I)φ*ω⊥` for `w ∈ Stab_φ`.
pub fn gauge_action_isotropic(b: &GForm, w: &FieldMap, phi: &ReferenceMap) -> Result<GForm> {
    check_stabilizer(w, phi)?;
    let inv: Vec<Quat> = w.values.iter().map(|q| q.conj()).collect();
    let omega = &phi.coisotropy;
    let twist = omega.ad(&inv).sub(omega)?;
    gauge_transform(b, w)?.sub(&twist)
}

/// Curvature projected to `h_φ`, with the norm of the discarded part.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub form: GForm,
    pub off_projection: f64,
}

/// `F(b) = db + b∧b − [b, φ*ω⊥] − (φ*ω⊥∧φ*ω⊥)∥`, projected to `h_φ`.
/// For an SU(2) reference nothing is projected.
pub fn curvature(b: &GForm, phi: &ReferenceMap) -> Result<Curvature> {
    let raw = curvature_unprojected(b, phi)?;
    match &phi.projector {
        Some(p) => {
            let form = p.apply(&raw)?;
            let off_projection = raw.sub(&form)?.l2_norm();
            Ok(Curvature {
                form,
                off_projection,
            })
        }
        None => Ok(Curvature {
            form: raw,
            off_projection: 0.0,
        }),
    }
}

fn curvature_unprojected(b: &GForm, phi: &ReferenceMap) -> Result<GForm> {
    let omega = &phi.coisotropy;
    let oo = forms::wedge(omega, omega)?;
    forms::d(b)?
        .add(&forms::wedge(b, b)?)?
        .sub(&forms::commutator(b, omega)?)?
        .sub(&phi.par(&oo)?)
}

/// L² norms of left-minus-right for the flat-potential identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatCurvatureReport {
    /// `F(a∥) − [dΦ∧a⊥ − Φ(a⊥∧a⊥) − Φ(φ*ω⊥∧φ*ω⊥)]`
    pub dcurv_i: f64,
    /// `da⊥ + dΦ∧a∥ + dΦ∧a⊥ + [a∥,a⊥] + (I−Φ)(a⊥∧a⊥)`
    pub dcurv_ii: f64,
    /// `d(a⊥∧a⊥) + [dΦ∧a∥, a⊥] − dΦ∧(a⊥∧a⊥)`
    pub sdcurv_iii: f64,
    /// `max |(I−Φ)(a⊥∧a⊥)|`, purely algebraic on S².
    pub symmetric_cancellation: f64,
}

pub fn flat_curvature_identity(a: &GForm, phi: &ReferenceMap) -> Result<FlatCurvatureReport> {
    let (a_par, a_perp) = isotropy_decompose(a, phi)?;
    let omega = &phi.coisotropy;
    let pp = forms::wedge(&a_perp, &a_perp)?;
    let pp_perp = phi.perp(&pp)?;

    let f = curvature(&a_par, phi)?.form;
    let rhs_i = phi
        .d_wedge(&a_perp)?
        .sub(&phi.par(&pp)?)?
        .sub(&phi.par(&forms::wedge(omega, omega)?)?)?;
    let dcurv_i = f.sub(&rhs_i)?.l2_norm();

    let dcurv_ii = forms::d(&a_perp)?
        .add(&phi.d_wedge(&a_par)?)?
        .add(&phi.d_wedge(&a_perp)?)?
        .add(&forms::commutator(&a_par, &a_perp)?)?
        .add(&pp_perp)?
        .l2_norm();

    let sdcurv_iii = forms::d(&pp)?
        .add(&forms::commutator(&phi.d_wedge(&a_par)?, &a_perp)?)?
        .sub(&phi.d_wedge(&pp)?)?
        .l2_norm();

    Ok(FlatCurvatureReport {
        dcurv_i,
        dcurv_ii,
        sdcurv_iii,
        symmetric_cancellation: pp_perp.max_norm(),
    })
}

/// Residual `‖(db)⊥ − [φ*ω⊥, b]‖` for an `h_φ`-valued b.
pub fn projected_derivative_residual(b: &GForm, phi: &ReferenceMap) -> Result<f64> {
    let lhs = phi.perp(&forms::d(b)?)?;
    let rhs = forms::commutator(&phi.coisotropy, b)?;
    Ok(lhs.sub(&rhs)?.l2_norm())
}
