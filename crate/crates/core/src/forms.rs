//! Lie-algebra-valued discrete differential forms on a periodic (or
//! boundary-clamped) N³ grid.
//!
//! Component layout: a 1-form has one component per axis; a 2-form has one
//! component per dual axis, component `p` holding the value on the oriented
//! plane `(p+1, p+2)` (indices mod 3); 0- and 3-forms have one component.
//! Values are stored as full quaternions because collocated wedge products
//! of su(2)-valued forms may leave the algebra.
//!
//! `d` uses forward differences. Wedge products and graded commutators are
//! collocated: both factors are read at the same site and combined by the
//! usual shuffle sum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, AlgebraVec, Quat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryMode {
    Periodic,
    /// Boundary-layer sites are clamped to a constant. Differences leaving
    /// the box see a ghost layer equal to the boundary value, so they vanish.
    FixedBoundary,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::FixedBoundary => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    n: usize,
    box_length: f64,
    boundary: BoundaryMode,
}

impl Grid3 {
    pub fn new(n: usize, box_length: f64, boundary: BoundaryMode) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need n >= 4, got {n}")));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        Ok(Grid3 {
            n,
            box_length,
            boundary,
        })
    }

    pub fn periodic(n: usize, box_length: f64) -> Result<Self> {
        Grid3::new(n, box_length, BoundaryMode::Periodic)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    pub fn sites(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Row-major index with x₁ fastest and x₃ slowest.
    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.n * (c[1] + self.n * c[2])
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// Physical position `i·h` of a site.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let c = self.coords(idx);
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Forward neighbour along `axis`. In fixed mode the last layer is its
    /// own neighbour.
    #[inline]
    pub fn forward(&self, idx: usize, axis: usize) -> usize {
        let mut c = self.coords(idx);
        if c[axis] + 1 == self.n {
            match self.boundary {
                BoundaryMode::Periodic => c[axis] = 0,
                BoundaryMode::FixedBoundary => return idx,
            }
        } else {
            c[axis] += 1;
        }
        self.index(c)
    }

    /// The site whose forward neighbour along `axis` is `idx`, excluding
    /// `idx` itself (fixed mode has none on the first layer).
    #[inline]
    pub fn backward(&self, idx: usize, axis: usize) -> Option<usize> {
        let mut c = self.coords(idx);
        if c[axis] == 0 {
            match self.boundary {
                BoundaryMode::Periodic => c[axis] = self.n - 1,
                BoundaryMode::FixedBoundary => return None,
            }
        } else {
            c[axis] -= 1;
        }
        Some(self.index(c))
    }

    /// Periodic shift of a site by `offset` along each axis (used for
    /// translations regardless of the boundary mode).
    pub fn shifted(&self, idx: usize, offset: [usize; 3]) -> usize {
        let c = self.coords(idx);
        let n = self.n;
        self.index([(c[0] + offset[0]) % n, (c[1] + offset[1]) % n, (c[2] + offset[2]) % n])
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        c.iter().any(|&v| v == 0 || v + 1 == self.n)
    }

    pub fn same_as(&self, other: &Grid3) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Number of components of a k-form in three dimensions.
pub fn component_count(k: usize) -> usize {
    match k {
        0 | 3 => 1,
        1 | 2 => 3,
        _ => 0,
    }
}

/// Component and sign representing the sorted index set `s` of a k-form.
fn component_of(s: &[usize]) -> (usize, f64) {
    match s {
        [] => (0, 1.0),
        [i] => (*i, 1.0),
        [1, 2] => (0, 1.0),
        [0, 2] => (1, -1.0),
        [0, 1] => (2, 1.0),
        [0, 1, 2] => (0, 1.0),
        _ => unreachable!("index set {s:?} is not sorted"),
    }
}

#[derive(Debug, Clone, Copy)]
struct ShuffleTerm {
    out: usize,
    sign: f64,
    a: usize,
    b: usize,
}

fn subsets(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << len) {
        if mask.count_ones() as usize == k {
            out.push((0..len).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Terms of `(α∧β)_S = Σ_{I⊔J=S} sgn(I,J) α_I β_J` expressed on stored
/// components.
fn shuffle_plan(k: usize, l: usize) -> Vec<ShuffleTerm> {
    let mut plan = Vec::new();
    for s in subsets(3, k + l) {
        let (out, out_sign) = component_of(&s);
        for pos in subsets(s.len(), k) {
            let i: Vec<usize> = pos.iter().map(|&p| s[p]).collect();
            let j: Vec<usize> = s.iter().copied().filter(|v| !i.contains(v)).collect();
            let concat: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
            let (a, a_sign) = component_of(&i);
            let (b, b_sign) = component_of(&j);
            plan.push(ShuffleTerm {
                out,
                sign: out_sign * permutation_sign(&concat) * a_sign * b_sign,
                a,
                b,
            });
        }
    }
    plan
}

/// Real scalar field on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Grid3, f: impl Fn(usize) -> f64 + Sync + Send) -> Self {
        let values = (0..grid.sites()).into_par_iter().map(f).collect();
        ScalarField { grid, values }
    }

    pub fn constant(grid: Grid3, v: f64) -> Self {
        ScalarField {
            grid,
            values: vec![v; grid.sites()],
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `Σ_sites f(x)·h³`, reduced slab by slab (fixed x₃) in a fixed order so
/// the result does not depend on the thread count.
pub fn integrate(f: &ScalarField) -> f64 {
    let g = f.grid();
    deterministic_sum(&f.values, g.n() * g.n()) * g.cell_volume()
}

pub(crate) fn deterministic_sum(values: &[f64], slab: usize) -> f64 {
    let partial: Vec<f64> = values
        .par_chunks(slab.max(1))
        .map(|c| c.iter().sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// A discrete k-form with quaternion values.
#[derive(Debug, Clone, PartialEq)]
pub struct GForm {
    degree: usize,
    grid: Grid3,
    comps: Vec<Vec<Quat>>,
}

impl GForm {
    pub fn zeros(grid: Grid3, degree: usize) -> Self {
        assert!(degree <= 3, "form degree {degree} out of range");
        GForm {
            degree,
            grid,
            comps: vec![vec![Quat::ZERO; grid.sites()]; component_count(degree)],
        }
    }

    pub fn from_components(grid: Grid3, degree: usize, comps: Vec<Vec<Quat>>) -> Result<Self> {
        if degree > 3 {
            return Err(Error::DegreeOverflow { left: degree, right: 0 });
        }
        if comps.len() != component_count(degree) || comps.iter().any(|c| c.len() != grid.sites())
        {
            return Err(Error::GridMismatch);
        }
        Ok(GForm {
            degree,
            grid,
            comps,
        })
    }

    /// Builds a form from `f(site, component)`.
    pub fn from_fn(grid: Grid3, degree: usize, f: impl Fn(usize, usize) -> Quat + Sync) -> Self {
        let comps = (0..component_count(degree))
            .map(|c| (0..grid.sites()).into_par_iter().map(|s| f(s, c)).collect())
            .collect();
        GForm {
            degree,
            grid,
            comps,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Quat] {
        &self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Quat>] {
        &self.comps
    }

    #[inline]
    pub fn at(&self, site: usize, c: usize) -> Quat {
        self.comps[c][site]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|q| q.is_finite()))
    }

    fn check_same(&self, other: &GForm) -> Result<()> {
        self.grid.same_as(&other.grid)?;
        if self.degree != other.degree {
            return Err(Error::DegreeOverflow {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    /// Pointwise map of every component value.
    pub fn map(&self, f: impl Fn(usize, Quat) -> Quat + Sync) -> GForm {
        let comps = self
            .comps
            .iter()
            .map(|c| c.par_iter().enumerate().map(|(s, &q)| f(s, q)).collect())
            .collect();
        GForm {
            degree: self.degree,
            grid: self.grid,
            comps,
        }
    }

    fn zip(&self, other: &GForm, f: impl Fn(Quat, Quat) -> Quat + Sync) -> Result<GForm> {
        self.check_same(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.par_iter().zip(b.par_iter()).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Ok(GForm {
            degree: self.degree,
            grid: self.grid,
            comps,
        })
    }

    pub fn add(&self, other: &GForm) -> Result<GForm> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GForm) -> Result<GForm> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> GForm {
        self.map(|_, q| q.scale(s))
    }

    /// Drops the real part of every value.
    pub fn imag(&self) -> GForm {
        self.map(|_, q| q.im())
    }

    /// Real part of every value, as a form (useful for diagnostics).
    pub fn real_part(&self) -> GForm {
        self.map(|_, q| Quat::real(q.w))
    }

    /// Pointwise `Ad(q(x))` applied to every component.
    pub fn ad(&self, q: &[Quat]) -> GForm {
        self.map(|s, v| q[s].ad_quat(v))
    }

    pub fn norm_sq_pointwise(&self) -> ScalarField {
        norm_sq_pointwise(self)
    }

    /// `(∫|α|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        integrate(&self.norm_sq_pointwise()).sqrt()
    }

    /// `max_x |α|(x)`.
    pub fn max_norm(&self) -> f64 {
        self.norm_sq_pointwise().max().max(0.0).sqrt()
    }

    /// Cyclic shift of the whole form by `offset` sites.
    pub fn translated(&self, offset: [usize; 3]) -> GForm {
        let g = self.grid;
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut out = vec![Quat::ZERO; g.sites()];
                for (s, &v) in c.iter().enumerate() {
                    out[g.shifted(s, offset)] = v;
                }
                out
            })
            .collect();
        GForm {
            degree: self.degree,
            grid: g,
            comps,
        }
    }

    pub fn d(&self) -> Result<GForm> {
        d(self)
    }

    pub fn wedge(&self, other: &GForm) -> Result<GForm> {
        wedge(self, other)
    }

    pub fn commutator(&self, other: &GForm) -> Result<GForm> {
        commutator(self, other)
    }
}

/// `|α|²(x) = Σ_components |c(x)|²` (Hilbert-Schmidt convention).
pub fn norm_sq_pointwise(alpha: &GForm) -> ScalarField {
    let g = alpha.grid;
    ScalarField::from_fn(g, |s| alpha.comps.iter().map(|c| c[s].norm_sq()).sum())
}

/// Evaluates a collocated shuffle product: `f(site, a, b)` returns the
/// product of component `a` of the left factor with component `b` of the
/// right factor at `site`.
fn shuffle_map(
    grid: Grid3,
    k: usize,
    l: usize,
    f: impl Fn(usize, usize, usize) -> Quat + Sync,
) -> Result<GForm> {
    if k + l > 3 {
        return Err(Error::DegreeOverflow { left: k, right: l });
    }
    let plan = shuffle_plan(k, l);
    let count = component_count(k + l);
    let comps = (0..count)
        .map(|c| {
            let terms: Vec<ShuffleTerm> = plan.iter().copied().filter(|t| t.out == c).collect();
            (0..grid.sites())
                .into_par_iter()
                .map(|s| {
                    let mut acc = Quat::ZERO;
                    for t in &terms {
                        acc += f(s, t.a, t.b).scale(t.sign);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(GForm {
        degree: k + l,
        grid,
        comps,
    })
}

/// Discrete exterior derivative by forward differences.
pub fn d(alpha: &GForm) -> Result<GForm> {
    if alpha.degree >= 3 {
        return Err(Error::DegreeOverflow {
            left: alpha.degree,
            right: 1,
        });
    }
    let g = alpha.grid;
    let inv_h = 1.0 / g.spacing();
    shuffle_map(g, 1, alpha.degree, |s, axis, b| {
        let c = &alpha.comps[b];
        (c[g.forward(s, axis)] - c[s]).scale(inv_h)
    })
}

/// Collocated wedge product with quaternion multiplication.
pub fn wedge(alpha: &GForm, beta: &GForm) -> Result<GForm> {
    alpha.grid.same_as(&beta.grid)?;
    shuffle_map(alpha.grid, alpha.degree, beta.degree, |s, a, b| {
        alpha.comps[a][s] * beta.comps[b][s]
    })
}

/// Graded commutator: the shuffle sum with `[ξ,η] = ξη − ηξ` in place of
/// the product.
pub fn commutator(alpha: &GForm, beta: &GForm) -> Result<GForm> {
    alpha.grid.same_as(&beta.grid)?;
    shuffle_map(alpha.grid, alpha.degree, beta.degree, |s, a, b| {
        lie::commutator(alpha.comps[a][s], beta.comps[b][s])
    })
}

/// Per-site unit vector φ(x) defining `Φ(x) = pr_{h_φ(x)}`, the orthogonal
/// projection onto the line through φ(x).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorField {
    grid: Grid3,
    phi: Vec<AlgebraVec>,
}

impl ProjectorField {
    pub fn new(grid: Grid3, phi: Vec<AlgebraVec>) -> Result<Self> {
        if phi.len() != grid.sites() {
            return Err(Error::GridMismatch);
        }
        for &p in &phi {
            lie::check_base_point(p)?;
        }
        Ok(ProjectorField { grid, phi })
    }

    pub fn constant(grid: Grid3, phi: AlgebraVec) -> Result<Self> {
        ProjectorField::new(grid, vec![phi; grid.sites()])
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn phi(&self) -> &[AlgebraVec] {
        &self.phi
    }

    /// `Φ(x) q`: the real part is discarded, the imaginary part projected
    /// onto φ(x).
    #[inline]
    pub fn par_at(&self, site: usize, q: Quat) -> Quat {
        lie::isotropy_par(q.imag(), self.phi[site]).to_quat()
    }

    /// `(I − Φ(x)) q = q − Φ(x) q`, with the imaginary part evaluated as
    /// `½ φ [ξ, φ]`.
    #[inline]
    pub fn perp_at(&self, site: usize, q: Quat) -> Quat {
        Quat::from_parts(q.w, lie::isotropy_perp(q.imag(), self.phi[site]))
    }

    pub fn apply(&self, alpha: &GForm) -> Result<GForm> {
        projector_apply(self, alpha)
    }

    pub fn apply_perp(&self, alpha: &GForm) -> Result<GForm> {
        self.grid.same_as(&alpha.grid)?;
        Ok(alpha.map(|s, q| self.perp_at(s, q)))
    }

    pub fn d_wedge(&self, alpha: &GForm) -> Result<GForm> {
        projector_d_wedge(self, alpha)
    }
}

/// Pointwise `Φα`.
pub fn projector_apply(proj: &ProjectorField, alpha: &GForm) -> Result<GForm> {
    proj.grid.same_as(&alpha.grid)?;
    Ok(alpha.map(|s, q| proj.par_at(s, q)))
}

/// `dΦ∧α`, where `dΦ` is the forward difference of the End(g)-valued
/// function Φ and the wedge "product" applies the operator to the value.
pub fn projector_d_wedge(proj: &ProjectorField, alpha: &GForm) -> Result<GForm> {
    proj.grid.same_as(&alpha.grid)?;
    let g = alpha.grid;
    let inv_h = 1.0 / g.spacing();
    shuffle_map(g, 1, alpha.degree, |s, axis, b| {
        let v = alpha.comps[b][s];
        (proj.par_at(g.forward(s, axis), v) - proj.par_at(s, v)).scale(inv_h)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid3 {
        Grid3::periodic(n, 2.0).unwrap()
    }

    fn random_form(g: Grid3, k: usize, seed: u64) -> GForm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<Vec<Quat>> = (0..component_count(k))
            .map(|_| {
                (0..g.sites())
                    .map(|_| {
                        Quat::new(
                            0.0,
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        )
                    })
                    .collect()
            })
            .collect();
        GForm::from_components(g, k, vals).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid3::periodic(3, 1.0).is_err());
        assert!(Grid3::periodic(4, 0.0).is_err());
        let g = Grid3::periodic(4, 1.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.forward(g.index([3, 1, 2]), 0), g.index([0, 1, 2]));
        let f = Grid3::new(4, 1.0, BoundaryMode::FixedBoundary).unwrap();
        assert_eq!(f.forward(f.index([3, 1, 2]), 0), f.index([3, 1, 2]));
        assert!(f.is_boundary(f.index([0, 1, 2])));
        assert!(!f.is_boundary(f.index([1, 2, 2])));
    }

    #[test]
    fn shuffle_plans_have_expected_shape() {
        // α∧β for two 1-forms on plane p: α_{p+1}β_{p+2} − α_{p+2}β_{p+1}
        let plan = shuffle_plan(1, 1);
        for p in 0..3 {
            let mut terms: Vec<_> = plan.iter().filter(|t| t.out == p).collect();
            terms.sort_by_key(|t| t.a);
            assert_eq!(terms.len(), 2);
            for t in terms {
                if t.a == (p + 1) % 3 {
                    assert_eq!((t.b, t.sign), ((p + 2) % 3, 1.0));
                } else {
                    assert_eq!((t.a, t.b, t.sign), ((p + 2) % 3, (p + 1) % 3, -1.0));
                }
            }
        }
        // 1∧2 and 2∧1 are Σ_p α_p β_p
        for (k, l) in [(1, 2), (2, 1)] {
            let plan = shuffle_plan(k, l);
            assert_eq!(plan.len(), 3);
            assert!(plan.iter().all(|t| t.a == t.b && t.sign == 1.0));
        }
    }

    #[test]
    fn d_of_constant_vanishes() {
        let g = grid(6);
        let f = GForm::from_fn(g, 0, |_, _| Quat::new(0.0, 0.3, -1.0, 2.0));
        assert_eq!(d(&f).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn dd_vanishes_periodic() {
        // dyadic data and spacing: every difference is exact
        let g = Grid3::periodic(8, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<Quat> = (0..g.sites())
            .map(|_| Quat::new(0.0, rng.gen_range(-8..8) as f64, 0.0, 0.0))
            .collect();
        let f = GForm::from_components(g, 0, vec![vals]).unwrap();
        assert_eq!(d(&d(&f).unwrap()).unwrap().max_norm(), 0.0);
        let a = random_form(g, 1, 5).map(|_, q| {
            Quat::new(0.0, (q.x * 64.0).round(), (q.y * 64.0).round(), (q.z * 64.0).round())
        });
        assert_eq!(d(&d(&a).unwrap()).unwrap().max_norm(), 0.0);
        // generic floats: rounding only
        let f = random_form(grid(8), 0, 9);
        assert!(d(&d(&f).unwrap()).unwrap().max_norm() < 1e-12);
        let a = random_form(grid(8), 1, 10);
        assert!(d(&d(&a).unwrap()).unwrap().max_norm() < 1e-12);
        assert!(matches!(d(&random_form(grid(4), 3, 1)), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn d_converges_to_analytic_derivative() {
        let l = 2.0;
        let err = |n: usize| {
            let g = Grid3::periodic(n, l).unwrap();
            let f = GForm::from_fn(g, 0, |s, _| {
                let x = g.position(s)[0];
                Quat::new(0.0, (2.0 * PI * x / l).sin(), 0.0, 0.0)
            });
            let df = d(&f).unwrap();
            let exact = GForm::from_fn(g, 1, |s, c| {
                let x = g.position(s)[0];
                if c == 0 {
                    Quat::new(0.0, 2.0 * PI / l * (2.0 * PI * x / l).cos(), 0.0, 0.0)
                } else {
                    Quat::ZERO
                }
            });
            df.sub(&exact).unwrap().max_norm()
        };
        let (e1, e2, e3) = (err(8), err(16), err(32));
        assert!(e1 / e2 >= 1.8 && e2 / e3 >= 1.8, "{e1} {e2} {e3}");
    }

    #[test]
    fn integrate_d_of_two_form_telescopes() {
        let b = random_form(grid(8), 2, 21);
        let db = d(&b).unwrap();
        let total: f64 = db.component(0).iter().map(|q| q.x).sum();
        assert!(total.abs() < 1e-11);
    }

    #[test]
    fn wedge_examples() {
        let g = grid(4);
        let a = GForm::from_fn(g, 1, |_, c| if c == 0 { Quat::I } else { Quat::ZERO });
        let b = GForm::from_fn(g, 1, |_, c| if c == 1 { Quat::J } else { Quat::ZERO });
        let w = wedge(&a, &b).unwrap();
        assert_eq!(w.at(0, 2), Quat::K);
        assert_eq!(w.at(0, 0), Quat::ZERO);
        let ba = wedge(&b, &a).unwrap();
        assert_eq!(ba.at(0, 2), -(Quat::J * Quat::I));
        let c = commutator(&a, &b).unwrap();
        assert_eq!(c.at(0, 2), Quat::K.scale(2.0));
        let zero = GForm::zeros(g, 1);
        assert_eq!(wedge(&zero, &b).unwrap().max_norm(), 0.0);
        assert!(matches!(
            wedge(&w, &w),
            Err(Error::DegreeOverflow { left: 2, right: 2 })
        ));
    }

    #[test]
    fn scalar_valued_forms_commute() {
        let g = grid(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vals: Vec<f64> = (0..3 * g.sites()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = GForm::from_fn(g, 1, |s, c| Quat::real(vals[c * g.sites() + s]));
        let b = GForm::from_fn(g, 1, |s, c| Quat::real(vals[((c + 1) % 3) * g.sites() + s]));
        assert_eq!(commutator(&a, &b).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn wedge_square_is_half_commutator() {
        let a = random_form(grid(6), 1, 4);
        let lhs = wedge(&a, &a).unwrap();
        let rhs = commutator(&a, &a).unwrap().scale(0.5);
        assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn norms_and_integrals() {
        let g = Grid3::periodic(8, 3.0).unwrap();
        let a = GForm::from_fn(g, 1, |_, c| match c {
            0 => Quat::I,
            1 => Quat::J,
            _ => Quat::ZERO,
        });
        let ns = norm_sq_pointwise(&a);
        assert!(ns.values().iter().all(|&v| v == 2.0));
        let scaled = norm_sq_pointwise(&a.scale(3.0));
        assert!(scaled.values().iter().all(|&v| v == 18.0));
        assert_eq!(norm_sq_pointwise(&GForm::zeros(g, 2)).max(), 0.0);

        assert!((integrate(&ScalarField::constant(g, 1.0)) - 27.0).abs() < 1e-12);
        assert_eq!(integrate(&ScalarField::constant(g, 0.0)), 0.0);
        let s2 = ScalarField::from_fn(g, |s| (2.0 * PI * g.position(s)[0] / 3.0).sin().powi(2));
        assert!((integrate(&s2) - 13.5).abs() < 1e-12);
    }

    #[test]
    fn projector_basics() {
        let g = grid(8);
        let phi = ProjectorField::constant(g, AlgebraVec::I).unwrap();
        let a = random_form(g, 1, 8);
        assert_eq!(projector_d_wedge(&phi, &a).unwrap().max_norm(), 0.0);
        let once = projector_apply(&phi, &a).unwrap();
        let twice = projector_apply(&phi, &once).unwrap();
        assert_eq!(once, twice);
        assert!(ProjectorField::constant(g, AlgebraVec::new(2.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn projector_derivative_identity_converges() {
        // dΦ∧α∥ → (dα∥)⊥ under refinement
        let l = 2.0 * PI;
        let residual = |n: usize| {
            let g = Grid3::periodic(n, l).unwrap();
            let phi: Vec<AlgebraVec> = (0..g.sites())
                .map(|s| {
                    let [x, y, z] = g.position(s);
                    AlgebraVec::new(1.0, 0.6 * x.sin(), 0.4 * (y + z).cos()).normalize()
                })
                .collect();
            let proj = ProjectorField::new(g, phi).unwrap();
            let a = GForm::from_fn(g, 1, |s, c| {
                let [x, y, z] = g.position(s);
                let v = (x + 2.0 * y).sin() + 0.5 * (z + c as f64).cos();
                Quat::new(0.0, v, 0.3 * v, -v)
            });
            let a_par = projector_apply(&proj, &a).unwrap();
            let lhs = projector_d_wedge(&proj, &a_par).unwrap();
            let rhs = proj.apply_perp(&d(&a_par).unwrap()).unwrap();
            lhs.sub(&rhs).unwrap().l2_norm()
        };
        let (r1, r2) = (residual(16), residual(32));
        assert!(r1 / r2 >= 1.8, "{r1} {r2}");
    }

    #[test]
    fn translation_is_a_permutation() {
        let a = random_form(grid(4), 1, 12);
        let t = a.translated([1, 2, 3]);
        assert!((t.l2_norm() - a.l2_norm()).abs() < 1e-12);
        assert_eq!(t.translated([3, 2, 1]), a);
    }
}
