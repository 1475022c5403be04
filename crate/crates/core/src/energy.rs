//! Faddeev-Skyrme functionals on the lattice and the exact gradient of the
//! map energy.

use rayon::prelude::*;
use serde::Serialize;

use crate::coset::{
    self, s2_tangent_diff, s2_tangent_diff_adjoint, su2_right_diff, su2_right_diff_adjoint, FieldMap,
    ReferenceMap, TargetSpace,
};
use crate::error::{Error, Result};
use crate::forms::{self, integrate, BoundaryMode, GForm, ScalarField};
use crate::lie::{AlgebraVec, Quat};

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub dirichlet: f64,
    pub skyrme: f64,
    pub yang_mills: Option<f64>,
    pub total: f64,
    pub density: ScalarField,
}

/// Scalar part of an [`EnergyReport`], for logs and JSON output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTerms {
    pub dirichlet: f64,
    pub skyrme: f64,
    pub yang_mills: Option<f64>,
    pub total: f64,
}

impl EnergyReport {
    fn assemble(dir: ScalarField, sky: ScalarField, ym: Option<ScalarField>) -> EnergyReport {
        let grid = *dir.grid();
        let density = ScalarField::from_fn(grid, |s| {
            dir.values()[s] + sky.values()[s] + ym.as_ref().map_or(0.0, |y| y.values()[s])
        });
        EnergyReport {
            dirichlet: integrate(&dir),
            skyrme: integrate(&sky),
            yang_mills: ym.as_ref().map(integrate),
            total: integrate(&density),
            density,
        }
    }

    pub fn terms(&self) -> EnergyTerms {
        EnergyTerms {
            dirichlet: self.dirichlet,
            skyrme: self.skyrme,
            yang_mills: self.yang_mills,
            total: self.total,
        }
    }
}

fn half_sq(alpha: &GForm, c: f64) -> ScalarField {
    let n = alpha.norm_sq_pointwise();
    let g = *n.grid();
    ScalarField::from_fn(g, |s| c * n.values()[s])
}

/// `½|θ|² + (w/4)|θ∧θ|²` densities for a 1-form θ.
fn quadratic_quartic(theta: &GForm, skyrme_weight: f64) -> Result<(ScalarField, ScalarField)> {
    let tt = forms::wedge(theta, theta)?;
    Ok((half_sq(theta, 0.5), half_sq(&tt, 0.25 * skyrme_weight)))
}

/// `E(ψ) = ∫ ½|ψ*ω⊥|² + ¼|ψ*ω⊥∧ψ*ω⊥|²`.
pub fn energy_map(psi: &FieldMap) -> EnergyReport {
    energy_map_weighted(psi, 1.0)
}

/// [`energy_map`] with the quartic term multiplied by `skyrme_weight`.
pub fn energy_map_weighted(psi: &FieldMap, skyrme_weight: f64) -> EnergyReport {
    let omega = coset::pullback_coisotropy(psi);
    let (dir, sky) = quadratic_quartic(&omega, skyrme_weight).expect("1-form wedge");
    EnergyReport::assemble(dir, sky, None)
}

/// `E_φ(a) = ∫ ½|D_φa|² + ¼|D_φa∧D_φa|²`, optionally with `½∫|F(a∥)|²`.
pub fn energy_potential(
    a: &GForm,
    phi: &ReferenceMap,
    include_yang_mills: bool,
) -> Result<EnergyReport> {
    let dphi = coset::d_phi(a, phi)?;
    let (dir, sky) = quadratic_quartic(&dphi, 1.0)?;
    let ym = if include_yang_mills {
        let (a_par, _) = coset::isotropy_decompose(a, phi)?;
        let f = coset::curvature(&a_par, phi)?.form;
        Some(half_sq(&f, 0.5))
    } else {
        None
    };
    Ok(EnergyReport::assemble(dir, sky, ym))
}

/// `∫ ½|du|² + ¼|u⁻¹du∧u⁻¹du|²`.
pub fn skyrme_group(u: &FieldMap) -> Result<EnergyReport> {
    if u.target() != TargetSpace::GroupSU2 {
        return Err(Error::TargetMismatch {
            expected: "su2",
            found: u.target().name(),
        });
    }
    let du = u.differential();
    let a = coset::pure_gauge_potential(u)?.potential;
    let aa = forms::wedge(&a, &a)?;
    Ok(EnergyReport::assemble(half_sq(&du, 0.5), half_sq(&aa, 0.25), None))
}

fn expect_s2(psi: &FieldMap) -> Result<()> {
    if psi.target() != TargetSpace::SphereS2 {
        return Err(Error::TargetMismatch {
            expected: "s2",
            found: psi.target().name(),
        });
    }
    Ok(())
}

/// `dψ×dψ` with `(dψ×dψ)_{ab} = [T_a, T_b] = 2 T_a×T_b`.
pub fn s2_cross_form(psi: &FieldMap) -> Result<GForm> {
    expect_s2(psi)?;
    let t = psi.differential();
    forms::commutator(&t, &t).map(|c| c.scale(0.5))
}

/// `ψ*Ω` with `(ψ*Ω)_{ab} = ψ·(T_a×T_b)`, stored as a real 2-form.
pub fn s2_symplectic_form(psi: &FieldMap) -> Result<GForm> {
    expect_s2(psi)?;
    let t = psi.differential();
    Ok(GForm::from_fn(*psi.grid(), 2, |s, p| {
        let a = t.at(s, (p + 1) % 3).imag();
        let b = t.at(s, (p + 2) % 3).imag();
        Quat::real(psi.at(s).imag().dot(a.cross(b)))
    }))
}

/// `∫ ½|dψ|² + ¼|dψ×dψ|²`.
pub fn faddeev_s2(psi: &FieldMap) -> Result<EnergyReport> {
    let t = psi.differential();
    let c = s2_cross_form(psi)?;
    Ok(EnergyReport::assemble(half_sq(&t, 0.5), half_sq(&c, 0.25), None))
}

/// `∫ ½|dψ|² + ¼|ψ*Ω|²`.
pub fn faddeev_symplectic(psi: &FieldMap) -> Result<f64> {
    let t = psi.differential();
    let w = s2_symplectic_form(psi)?;
    let dens = ScalarField::from_fn(*psi.grid(), |s| {
        let t2: f64 = (0..3).map(|i| t.at(s, i).norm_sq()).sum();
        let w2: f64 = (0..3).map(|p| w.at(s, p).norm_sq()).sum();
        0.5 * t2 + 0.25 * w2
    });
    Ok(integrate(&dens))
}

/// `∂e/∂θ` for the per-site density `α Σ|θ_i|² + β Σ_p |θ_{p+1}×θ_{p+2}|²`.
#[inline]
fn density_derivative(theta: &[AlgebraVec; 3], alpha: f64, beta: f64) -> [AlgebraVec; 3] {
    let mut g = [
        theta[0].scale(2.0 * alpha),
        theta[1].scale(2.0 * alpha),
        theta[2].scale(2.0 * alpha),
    ];
    for p in 0..3 {
        let (a, b) = ((p + 1) % 3, (p + 2) % 3);
        let c = theta[a].cross(theta[b]);
        g[a] += theta[b].cross(c).scale(2.0 * beta);
        g[b] += c.cross(theta[a]).scale(2.0 * beta);
    }
    g
}

/// Exact derivative of `energy_map_weighted(ψ, w).total` with respect to
/// every site value, projected to the tangent space of the target.
/// Boundary-layer sites of a fixed-boundary grid are not variables and get
/// zero.
pub fn gradient(psi: &FieldMap, skyrme_weight: f64) -> Vec<Quat> {
    let g = *psi.grid();
    let h = g.spacing();
    let inv_h = 1.0 / h;
    let vol = g.cell_volume();
    let v = psi.values();
    let target = psi.target();

    // S²: ω = ½ψT gives e = ⅛Σ|T|² + (w/16)Σ|T×T|²; SU(2): e = ½Σ|R|² + wΣ|R×R|².
    let (alpha, beta) = match target {
        TargetSpace::SphereS2 => (0.125, skyrme_weight / 16.0),
        TargetSpace::GroupSU2 => (0.5, skyrme_weight),
    };
    let dens_grad: Vec<[AlgebraVec; 3]> = (0..g.sites())
        .into_par_iter()
        .map(|s| {
            let theta = std::array::from_fn(|i| {
                let y = v[g.forward(s, i)];
                match target {
                    TargetSpace::SphereS2 => s2_tangent_diff(v[s].imag(), y.imag(), inv_h),
                    TargetSpace::GroupSU2 => su2_right_diff(v[s], y, inv_h),
                }
            });
            let d = density_derivative(&theta, alpha, beta);
            [d[0].scale(vol), d[1].scale(vol), d[2].scale(vol)]
        })
        .collect();

    // ∂θ_i(x)/∂ψ(x) and ∂θ_i(x)/∂ψ(x+e_i), contracted with G = ∂e/∂θ_i.
    let adjoint = |x: usize, i: usize| -> (Quat, Quat) {
        let y = g.forward(x, i);
        let gv = dens_grad[x][i];
        match target {
            TargetSpace::SphereS2 => {
                let (dx, dy) = s2_tangent_diff_adjoint(v[x].imag(), v[y].imag(), gv, inv_h);
                (dx.to_quat(), dy.to_quat())
            }
            TargetSpace::GroupSU2 => su2_right_diff_adjoint(v[x], v[y], gv, inv_h),
        }
    };

    let fixed = g.boundary() == BoundaryMode::FixedBoundary;
    (0..g.sites())
        .into_par_iter()
        .map(|s| {
            if fixed && g.is_boundary(s) {
                return Quat::ZERO;
            }
            let mut acc = Quat::ZERO;
            for i in 0..3 {
                acc += adjoint(s, i).0;
                if let Some(x) = g.backward(s, i) {
                    acc += adjoint(x, i).1;
                }
            }
            target.tangent_project(v[s], acc)
        })
        .collect()
}

/// `(Σ_x |g(x)|²/h³)^{1/2}`: the L² norm of the gradient density.
pub fn gradient_l2(grad: &[Quat], cell_volume: f64) -> f64 {
    let sq: f64 = grad.iter().map(|q| q.norm_sq()).sum();
    (sq / cell_volume).sqrt()
}
