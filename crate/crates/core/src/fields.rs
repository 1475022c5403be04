//! Analytic and random field generators: the hedgehog ansatz and its Hopf
//! projection, torus wraps, band-limited random maps, and the smooth
//! periodic test fields used by refinement studies.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coset::{FieldMap, TargetSpace};
use crate::error::{Error, Result};
use crate::forms::{BoundaryMode, Grid3, ScalarField};
use crate::lie::{exp_su2, AlgebraVec, Quat};

fn centered(g: &Grid3, site: usize) -> [f64; 3] {
    let c = 0.5 * g.box_length();
    g.position(site).map(|x| x - c)
}

fn box_center(g: &Grid3) -> [f64; 3] {
    [0.5 * g.box_length(); 3]
}

/// Default hedgehog radius: the largest ball whose exterior contains every
/// boundary-layer site.
pub fn default_radius(g: &Grid3) -> f64 {
    0.5 * g.box_length() - g.spacing()
}

/// `cos f + sin f·x̂·(i,j,k)` for a radial profile `f` about `center`.
pub fn radial_su2(
    g: Grid3,
    center: [f64; 3],
    profile: impl Fn(f64) -> f64 + Sync + Send,
) -> Result<FieldMap> {
    FieldMap::from_fn(g, TargetSpace::GroupSU2, |s| {
        let p = g.position(s);
        let x = [p[0] - center[0], p[1] - center[1], p[2] - center[2]];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let (sn, cs) = profile(r).sin_cos();
        let dir = if r > 0.0 {
            AlgebraVec::from_array(x).scale(1.0 / r)
        } else {
            AlgebraVec::ZERO
        };
        Quat::from_parts(cs, dir.scale(sn))
    })
}

/// Hedgehog with profile `f(r) = kπ·max(0, 1 − r/R)` centred in the box.
pub fn hedgehog(g: Grid3, k: f64, radius: Option<f64>) -> Result<FieldMap> {
    let r0 = radius.unwrap_or_else(|| default_radius(&g));
    hedgehog_at(g, k, r0, box_center(&g))
}

/// Hedgehog with the linear profile about an arbitrary centre.
pub fn hedgehog_at(g: Grid3, k: f64, radius: f64, center: [f64; 3]) -> Result<FieldMap> {
    if !(radius > 0.0) {
        return Err(Error::InvalidGrid(format!("hedgehog radius must be positive, got {radius}")));
    }
    radial_su2(g, center, |r| k * PI * (1.0 - r / radius).max(0.0))
}

/// Hedgehog with the smooth profile `f(r) = kπ·exp(−r²/w²)`.
pub fn smooth_hedgehog(g: Grid3, k: f64, width: f64) -> Result<FieldMap> {
    radial_su2(g, box_center(&g), |r| k * PI * (-(r * r) / (width * width)).exp())
}

/// `ψ = Ad(u)i` for the hedgehog `u`.
pub fn hopf_projection(g: Grid3, k: f64, radius: Option<f64>) -> Result<FieldMap> {
    hedgehog(g, k, radius)?.hopf_projection()
}

/// Degree-`winding` wrap of the coordinate 2-torus normal to `normal_axis`
/// around S², constant along `normal_axis`. The wrap is oriented so that
/// its flux through that torus is `+winding`; `mirror` reflects it.
pub fn torus_wrap(g: Grid3, normal_axis: usize, winding: i32, mirror: bool) -> Result<FieldMap> {
    if normal_axis > 2 {
        return Err(Error::InvalidGrid(format!("axis {normal_axis} out of range")));
    }
    let (a, b) = ((normal_axis + 1) % 3, (normal_axis + 2) % 3);
    let l = g.box_length();
    let disc = 0.45 * l;
    let orient = if mirror { 1.0 } else { -1.0 };
    FieldMap::from_fn(g, TargetSpace::SphereS2, |s| {
        let x = centered(&g, s);
        let (xa, xb) = (x[a], orient * x[b]);
        let rho = (xa * xa + xb * xb).sqrt();
        let profile = PI * (1.0 - rho / disc).max(0.0).powi(2);
        let theta = winding as f64 * xb.atan2(xa);
        let (sn, cs) = profile.sin_cos();
        Quat::new(0.0, cs, sn * theta.cos(), sn * theta.sin())
    })
}

/// Smooth cutoff that vanishes on the boundary layers of a fixed grid and
/// is identically one on a periodic grid.
fn boundary_window(g: &Grid3, site: usize) -> f64 {
    if g.boundary() == BoundaryMode::Periodic {
        return 1.0;
    }
    if g.is_boundary(site) {
        return 0.0;
    }
    let h = g.spacing();
    let span = g.box_length() - 3.0 * h;
    g.position(site)
        .iter()
        .map(|&x| {
            let t = ((x - h) / span).clamp(0.0, 1.0);
            (PI * t).sin().powi(2)
        })
        .product()
}

/// Band-limited random Lie-algebra field: a sum of random Fourier modes
/// with wavelengths no shorter than `correlation_length`.
pub struct SmoothNoise {
    modes: Vec<([f64; 3], [f64; 3], [f64; 3])>,
}

impl SmoothNoise {
    pub fn new(g: &Grid3, seed: u64, correlation_length: f64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = g.box_length();
        let kmax = ((l / correlation_length).floor() as i64).max(1);
        let mut modes = Vec::new();
        for m0 in -kmax..=kmax {
            for m1 in -kmax..=kmax {
                for m2 in 0..=kmax {
                    let norm = ((m0 * m0 + m1 * m1 + m2 * m2) as f64).sqrt();
                    if norm == 0.0 || norm > kmax as f64 {
                        continue;
                    }
                    let k = [m0, m1, m2].map(|m| 2.0 * PI * m as f64 / l);
                    let coeff = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
                    let phase = [0; 3].map(|_| rng.gen_range(0.0..2.0 * PI));
                    modes.push((k, coeff, phase));
                }
            }
        }
        let scale = amplitude / (modes.len().max(1) as f64 / 3.0).sqrt();
        for m in &mut modes {
            m.1 = m.1.map(|c| c * scale);
        }
        SmoothNoise { modes }
    }

    pub fn eval(&self, x: [f64; 3]) -> AlgebraVec {
        let mut v = [0.0; 3];
        for (k, c, p) in &self.modes {
            let kx = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            for i in 0..3 {
                v[i] += c[i] * (kx + p[i]).cos();
            }
        }
        AlgebraVec::from_array(v)
    }
}

/// `exp(ξ)` (SU(2)) or `Ad(exp ξ)i` (S²) for band-limited random ξ. On a
/// fixed grid ξ is windowed so the boundary layers are the base point.
pub fn random_smooth(
    g: Grid3,
    target: TargetSpace,
    seed: u64,
    correlation_length: f64,
    amplitude: f64,
) -> Result<FieldMap> {
    if !(correlation_length > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "correlation length must be positive, got {correlation_length}"
        )));
    }
    let noise = SmoothNoise::new(&g, seed, correlation_length, amplitude);
    FieldMap::from_fn(g, target, |s| {
        let u = exp_su2(noise.eval(g.position(s)).scale(boundary_window(&g, s)));
        match target {
            TargetSpace::GroupSU2 => u,
            TargetSpace::SphereS2 => u.ad_quat(Quat::I),
        }
    })
}

/// Smooth periodic SU(2) map `exp(ξ)` with a fixed trigonometric ξ.
pub fn periodic_su2(g: Grid3) -> Result<FieldMap> {
    let w = 2.0 * PI / g.box_length();
    FieldMap::from_fn(g, TargetSpace::GroupSU2, |s| {
        let [x, y, z] = g.position(s).map(|t| w * t);
        exp_su2(AlgebraVec::new(
            0.9 * x.sin() + 0.3 * z.cos(),
            0.7 * (x + y).cos() - 0.2 * y.sin(),
            0.5 * (z - y).sin() + 0.4 * x.cos(),
        ))
    })
}

/// Smooth periodic S² map `Ad(v)i`, with v independent of [`periodic_su2`].
pub fn periodic_s2(g: Grid3) -> Result<FieldMap> {
    let w = 2.0 * PI / g.box_length();
    let v = FieldMap::from_fn(g, TargetSpace::GroupSU2, |s| {
        let [x, y, z] = g.position(s).map(|t| w * t);
        exp_su2(AlgebraVec::new(
            0.4 * z.sin() + 0.2 * x.cos(),
            0.8 * x.cos() - 0.3 * (y + z).sin(),
            0.6 * (y + z).sin(),
        ))
    })?;
    v.hopf_projection()
}

/// Smooth periodic phase `θ` for stabilizer sections.
pub fn periodic_phase(g: Grid3) -> ScalarField {
    let w = 2.0 * PI / g.box_length();
    ScalarField::from_fn(g, |s| {
        let [x, y, z] = g.position(s).map(|t| w * t);
        0.8 * (x + z).sin() + 0.5 * y.cos()
    })
}

/// Grid reflection `x₁ ↦ −x₁` (mod the box).
pub fn reflect_axis0(m: &FieldMap) -> Result<FieldMap> {
    let g = *m.grid();
    let n = g.n();
    let values = (0..g.sites())
        .map(|s| {
            let [i, j, k] = g.coords(s);
            m.at(g.index([(n - i) % n, j, k]))
        })
        .collect();
    FieldMap::new(g, m.target(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hedgehog_center_and_boundary() {
        let g = Grid3::new(16, 4.0, BoundaryMode::FixedBoundary).unwrap();
        let u = hedgehog(g, 1.0, None).unwrap();
        let c = g.index([8, 8, 8]);
        assert!((u.at(c) - Quat::new(-1.0, 0.0, 0.0, 0.0)).norm() < 1e-15);
        for s in 0..g.sites() {
            if g.is_boundary(s) {
                assert_eq!(u.at(s), Quat::ONE);
            }
        }
    }

    #[test]
    fn fixed_random_fields_are_clamped() {
        let g = Grid3::new(12, 4.0, BoundaryMode::FixedBoundary).unwrap();
        let psi = random_smooth(g, TargetSpace::SphereS2, 3, 1.5, 1.0).unwrap();
        for s in 0..g.sites() {
            if g.is_boundary(s) {
                assert_eq!(psi.at(s), Quat::I);
            }
        }
        let again = random_smooth(g, TargetSpace::SphereS2, 3, 1.5, 1.0).unwrap();
        assert_eq!(psi, again);
    }

    #[test]
    fn reflection_is_an_involution() {
        let g = Grid3::periodic(6, 2.0).unwrap();
        let u = periodic_su2(g).unwrap();
        assert_eq!(reflect_axis0(&reflect_axis0(&u).unwrap()).unwrap(), u);
    }
}
