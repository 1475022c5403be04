//! Residual suites for the gauge calculus. Purely algebraic identities are
//! checked pointwise at a fixed tolerance on random smooth fields; identities
//! that mix `d` with collocated products are checked by grid refinement on
//! analytic fields.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::coset::{self, FieldMap, ReferenceMap, TargetSpace};
use crate::energy;
use crate::error::Result;
use crate::fields::{self, SmoothNoise};
use crate::forms::{self, GForm, Grid3, ScalarField};
use crate::lie::Quat;

/// Pointwise tolerance for algebraic identities (relative to the size of
/// the terms, floored at 1).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Minimal residual reduction per grid doubling for refinement identities.
pub const MIN_REFINEMENT_RATIO: f64 = 1.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    Algebraic,
    Refinement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub name: &'static str,
    pub kind: CheckKind,
    pub coarse: f64,
    pub fine: f64,
    /// `log2(coarse/fine)` for refinement rows.
    pub order: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityTable {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub samples: usize,
    pub rows: Vec<IdentityRow>,
}

impl IdentityTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Fixed-width text table, one row per identity.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# identities at n={} and n={} ({} random samples per size)",
            self.n_coarse, self.n_fine, self.samples
        );
        let _ = writeln!(
            out,
            "{:<44} {:<10} {:>12} {:>12} {:>7}  result",
            "identity", "kind", "coarse", "fine", "order"
        );
        for r in &self.rows {
            let kind = match r.kind {
                CheckKind::Algebraic => "algebraic",
                CheckKind::Refinement => "refinement",
            };
            let order = r.order.map_or("-".to_string(), |o| format!("{o:.2}"));
            let _ = writeln!(
                out,
                "{:<44} {:<10} {:>12.3e} {:>12.3e} {:>7}  {}",
                r.name,
                kind,
                r.coarse,
                r.fine,
                order,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        out
    }
}

/// `max_x |α − β|(x)`, relative to `max(1, max|α|, max|β|)`.
fn rel(lhs: &GForm, rhs: &GForm) -> Result<f64> {
    let scale = 1f64.max(lhs.max_norm()).max(rhs.max_norm());
    Ok(lhs.sub(rhs)?.max_norm() / scale)
}

/// Pointwise relative mismatch of two nonnegative scalar fields.
fn rel_scalar(a: &ScalarField, b: &ScalarField) -> f64 {
    let scale = 1f64.max(a.max()).max(b.max());
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

fn pointwise_norm(alpha: &GForm) -> ScalarField {
    let n = alpha.norm_sq_pointwise();
    ScalarField::from_fn(*alpha.grid(), |s| n.values()[s].sqrt())
}

/// Band-limited random Lie-algebra valued form.
pub fn random_form(g: Grid3, degree: usize, seed: u64) -> GForm {
    let corr = 0.5 * g.box_length();
    let noise: Vec<SmoothNoise> = (0..forms::component_count(degree))
        .map(|c| SmoothNoise::new(&g, seed.wrapping_mul(7).wrapping_add(c as u64), corr, 2.0))
        .collect();
    GForm::from_fn(g, degree, |s, c| noise[c].eval(g.position(s)).to_quat())
}

fn sign(k: usize, l: usize) -> f64 {
    if (k * l) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Worst pointwise residual of every algebraic identity on one random
/// sample (forms, maps and reference) on grid `g`.
pub fn algebraic_residuals(g: Grid3, seed: u64) -> Result<Vec<(&'static str, f64)>> {
    let corr = 0.5 * g.box_length();
    let s4 = seed.wrapping_mul(4);
    let s2 = seed.wrapping_mul(2);
    let f0 = random_form(g, 0, s4);
    let a1 = random_form(g, 1, s4.wrapping_add(1));
    let b1 = random_form(g, 1, s4.wrapping_add(2));
    let c2 = random_form(g, 2, s4.wrapping_add(3));
    let u = fields::random_smooth(g, TargetSpace::GroupSU2, s2, corr, 1.5)?;
    let psi = fields::random_smooth(g, TargetSpace::SphereS2, s2.wrapping_add(1), corr, 1.5)?;
    let phi = ReferenceMap::new(psi.clone())?;
    let uinv: Vec<Quat> = u.values().iter().map(|q| q.conj()).collect();

    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    let mut anti: f64 = 0.0;
    for (x, y) in [(&f0, &a1), (&a1, &b1), (&a1, &c2), (&f0, &c2)] {
        let (k, l) = (x.degree(), y.degree());
        let br = forms::commutator(x, y)?;
        let rhs = forms::wedge(x, y)?.sub(&forms::wedge(y, x)?.scale(sign(k, l)))?;
        worst = worst.max(rel(&br, &rhs)?);
        let swapped = forms::commutator(y, x)?.scale(-sign(k, l));
        anti = anti.max(rel(&br, &swapped)?);
    }
    out.push(("bracket = graded wedge difference (ii)", worst));
    out.push(("graded antisymmetry (iii)", anti));

    let aa = forms::wedge(&a1, &a1)?;
    out.push((
        "wedge square = half bracket (iv)",
        rel(&aa, &forms::commutator(&a1, &a1)?.scale(0.5))?,
    ));
    let zero3 = GForm::zeros(g, 3);
    out.push((
        "[a^a, a] = [a, a^a] = 0 (v)",
        rel(&forms::commutator(&aa, &a1)?, &zero3)?
            .max(rel(&forms::commutator(&a1, &aa)?, &zero3)?),
    ));

    let bb = forms::wedge(&b1, &b1)?;
    let mut canc: f64 = 0.0;
    for x in [&f0, &a1] {
        let lhs = forms::commutator(&forms::commutator(x, &b1)?, &b1)?;
        canc = canc.max(rel(&lhs, &forms::commutator(x, &bb)?)?);
    }
    out.push(("cancellation [[a,b],b] = [a, b^b] (vi)", canc));

    let ad_wedge = forms::wedge(&a1, &b1)?.ad(&uinv);
    out.push((
        "Ad distributes over wedge (vii)",
        rel(&ad_wedge, &forms::wedge(&a1.ad(&uinv), &b1.ad(&uinv))?)?,
    ));
    out.push((
        "Ad is a pointwise isometry",
        rel_scalar(&a1.ad(&uinv).norm_sq_pointwise(), &a1.norm_sq_pointwise()),
    ));

    let (par, perp) = coset::isotropy_decompose(&a1, &phi)?;
    let pvals = phi.map().values();
    let explicit_par = a1.map(|s, v| pvals[s].scale(v.dot(pvals[s])));
    let explicit_perp = a1.map(|s, v| (pvals[s] * (v * pvals[s] - pvals[s] * v)).scale(0.5));
    let ortho = GForm::from_fn(g, 1, |s, c| Quat::real(par.at(s, c).dot(perp.at(s, c))));
    let split = rel(&par.add(&perp)?, &a1)?
        .max(rel(&par, &explicit_par)?)
        .max(rel(&perp, &explicit_perp)?)
        .max(rel(&ortho, &GForm::zeros(g, 1))?);
    out.push(("isotropy split a = (a,phi)phi + phi[a,phi]/2", split));

    let bperp = phi.perp(&b1)?;
    let hh = phi.perp(&forms::commutator(&perp, &bperp)?)?;
    out.push(("[h_perp, h_perp] in h", rel(&hh, &GForm::zeros(g, 2))?));

    let a = coset::pure_gauge_potential(&u)?.potential;
    let a_perp = phi.perp(&a)?;
    let cancel = phi.perp(&forms::wedge(&a_perp, &a_perp)?)?;
    out.push(("(I - Phi)(a_perp ^ a_perp) = 0", rel(&cancel, &GForm::zeros(g, 2))?));

    let om = coset::pullback_coisotropy(&psi);
    let dpsi = psi.differential();
    out.push((
        "|psi*w_perp| = |dpsi|/2",
        rel_scalar(&pointwise_norm(&om), &pointwise_norm(&dpsi.scale(0.5))),
    ));
    let oo = forms::wedge(&om, &om)?;
    let cross = energy::s2_cross_form(&psi)?;
    out.push((
        "|psi*w ^ psi*w| = |dpsi x dpsi|/4",
        rel_scalar(&pointwise_norm(&oo), &pointwise_norm(&cross.scale(0.25))),
    ));
    let sym = energy::s2_symplectic_form(&psi)?;
    out.push((
        "|dpsi x dpsi| = 2|psi*Omega|",
        rel_scalar(&pointwise_norm(&cross), &pointwise_norm(&sym.scale(2.0))),
    ));

    let em = energy::energy_map(&u);
    let sg = energy::skyrme_group(&u)?;
    out.push((
        "group Skyrme density = map energy density",
        rel_scalar(&em.density, &sg.density),
    ));
    Ok(out)
}

/// Worst residual of each algebraic identity over `samples` random seeds.
pub fn algebraic_suite(g: Grid3, samples: usize, seed: u64) -> Result<Vec<(&'static str, f64)>> {
    let mut worst: Vec<(&'static str, f64)> = Vec::new();
    for k in 0..samples as u64 {
        let r = algebraic_residuals(g, seed.wrapping_add(k))?;
        if worst.is_empty() {
            worst = r;
        } else {
            for (w, (_, v)) in worst.iter_mut().zip(r) {
                w.1 = w.1.max(v);
            }
        }
    }
    Ok(worst)
}

/// Analytic fields for refinement studies on a periodic box of side 2π.
pub struct AnalyticFields {
    pub u: FieldMap,
    pub phi: ReferenceMap,
    pub w: FieldMap,
}

impl AnalyticFields {
    pub fn new(n: usize) -> Result<Self> {
        let g = Grid3::periodic(n, 2.0 * PI)?;
        let u = fields::periodic_su2(g)?;
        let phi = ReferenceMap::new(fields::periodic_s2(g)?)?;
        let w = coset::stabilizer_section(&phi, &fields::periodic_phase(g))?;
        Ok(AnalyticFields { u, phi, w })
    }
}

/// Residual norms of the discretization identities on the analytic fields
/// at one grid size.
pub fn refinement_residuals(n: usize) -> Result<Vec<(&'static str, f64)>> {
    let AnalyticFields { u, phi, w } = AnalyticFields::new(n)?;
    let winv: Vec<Quat> = w.values().iter().map(|q| q.conj()).collect();
    let pg = coset::pure_gauge_potential(&u)?;
    let a = pg.potential;
    let (a_par, _) = coset::isotropy_decompose(&a, &phi)?;
    let mut out = Vec::new();

    let flat = forms::d(&a)?.add(&forms::wedge(&a, &a)?)?;
    out.push(("flatness da + a^a = 0", flat.l2_norm()));
    out.push(("real residue of u^-1 du", pg.real_residue));

    let bw = coset::gauge_action_isotropic(&a_par, &w, &phi)?;
    let f_bw = coset::curvature(&bw, &phi)?.form;
    let f_b = coset::curvature(&a_par, &phi)?.form.ad(&winv);
    out.push(("curvature covariance F(b^w) = Ad(w^-1)F(b)", f_bw.sub(&f_b)?.l2_norm()));

    let aw = coset::gauge_transform(&a, &w)?;
    let d_aw = coset::d_phi(&aw, &phi)?;
    let d_a = coset::d_phi(&a, &phi)?.ad(&winv);
    out.push(("D_phi covariance D(a^w) = Ad(w^-1)D(a)", d_aw.sub(&d_a)?.l2_norm()));

    let back = coset::gauge_transform(&aw, &w.inverse()?)?;
    out.push(("inverse gauge (a^w)^(w^-1) = a", back.sub(&a)?.l2_norm()));

    let flat_report = coset::flat_curvature_identity(&a, &phi)?;
    out.push(("flat curvature F(a_par) (dcurv i)", flat_report.dcurv_i));
    out.push(("flat perp part (dcurv ii)", flat_report.dcurv_ii));
    out.push(("d(a_perp ^ a_perp) (sdcurv iii)", flat_report.sdcurv_iii));

    out.push((
        "projected derivative (db)_perp = [w_perp, b]",
        coset::projected_derivative_residual(&a_par, &phi)?,
    ));
    let dphi_par = phi.d_wedge(&a_par)?;
    let da_par_perp = phi.perp(&forms::d(&a_par)?)?;
    out.push(("dPhi ^ a_par = (d a_par)_perp", dphi_par.sub(&da_par_perp)?.l2_norm()));

    let psi = u.act_on(phi.map())?;
    let e_map = energy::energy_map(&psi).total;
    let e_pot = energy::energy_potential(&a, &phi, false)?.total;
    out.push(("map/potential energy E(u phi) = E_phi(a)", (e_map - e_pot).abs() / e_map));
    let e_aw = energy::energy_potential(&aw, &phi, false)?.total;
    out.push(("gauge invariance E_phi(a^w) = E_phi(a)", (e_aw - e_pot).abs() / e_pot));

    let norm_d = coset::d_phi(&a, &phi)?.norm_sq_pointwise();
    let norm_psi = coset::pullback_coisotropy(&psi).norm_sq_pointwise();
    let diff = ScalarField::from_fn(*u.grid(), |s| {
        norm_d.values()[s].sqrt() - norm_psi.values()[s].sqrt()
    });
    let diff_l2 = forms::integrate(&ScalarField::from_fn(*u.grid(), |s| diff.values()[s].powi(2))).sqrt();
    out.push(("|D_phi(u^-1 du)| = |psi*w_perp|", diff_l2));

    let om = phi.coisotropy();
    let prod = forms::d(&forms::wedge(&a, om)?)?
        .sub(&forms::wedge(&forms::d(&a)?, om)?)?
        .add(&forms::wedge(&a, &forms::d(om)?)?)?;
    out.push(("product rule d(a^b) (ix)", prod.l2_norm()));
    let prod_br = forms::d(&forms::commutator(&a, om)?)?
        .sub(&forms::commutator(&forms::d(&a)?, om)?)?
        .add(&forms::commutator(&a, &forms::d(om)?)?)?;
    out.push(("product rule d[a,b] (x)", prod_br.l2_norm()));

    let wg = coset::pure_gauge_potential(&w)?.potential;
    let ad_d = forms::d(&a.ad(w.values()))?;
    let rhs = forms::d(&a)?.add(&forms::commutator(&wg, &a)?)?.ad(w.values());
    out.push(("adjoint derivative (viii)", ad_d.sub(&rhs)?.l2_norm()));
    Ok(out)
}

/// Full table: algebraic rows at `n` and `2n` with `samples` random fields
/// each, refinement rows from `n` to `2n`.
pub fn identity_table(n: usize, samples: usize, seed: u64) -> Result<IdentityTable> {
    let mut rows = Vec::new();
    let coarse = algebraic_suite(Grid3::periodic(n, 2.0 * PI)?, samples, seed)?;
    let fine = algebraic_suite(Grid3::periodic(2 * n, 2.0 * PI)?, samples, seed)?;
    for ((name, c), (_, f)) in coarse.into_iter().zip(fine) {
        rows.push(IdentityRow {
            name,
            kind: CheckKind::Algebraic,
            coarse: c,
            fine: f,
            order: None,
            pass: c <= ALGEBRAIC_TOL && f <= ALGEBRAIC_TOL,
        });
    }
    let coarse = refinement_residuals(n)?;
    let fine = refinement_residuals(2 * n)?;
    for ((name, c), (_, f)) in coarse.into_iter().zip(fine) {
        let ratio = c / f;
        rows.push(IdentityRow {
            name,
            kind: CheckKind::Refinement,
            coarse: c,
            fine: f,
            order: Some(ratio.log2()),
            pass: ratio >= MIN_REFINEMENT_RATIO || (c <= ALGEBRAIC_TOL && f <= ALGEBRAIC_TOL),
        });
    }
    Ok(IdentityTable {
        n_coarse: n,
        n_fine: 2 * n,
        samples,
        rows,
    })
}
