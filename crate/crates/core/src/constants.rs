//! Frozen normalization constants for the topological integrals.
//!
//! Magnitudes follow from the volume of the unit 3-sphere (2π²) and the
//! area of the unit 2-sphere (4π); signs were fixed once against the
//! degree-1 hedgehog and its Hopf projection and must not change.

use std::f64::consts::PI;

/// `c_G` in `deg u = ∫ c_G tr(a∧a∧a)`, `a = u⁻¹du`, with the trace of the
/// 2×2 matrix model.
pub const DEGREE_NORMALIZATION: f64 = 1.0 / (24.0 * PI * PI);

/// `c_H` in `H = c_H ∫ A∧F`, `dA = F`, `F = ψ*Ω`.
pub const HOPF_NORMALIZATION: f64 = 1.0 / (16.0 * PI * PI);

/// Flux normalization: `∫_{S²} Ω = 4π`.
pub const FLUX_NORMALIZATION: f64 = 1.0 / (4.0 * PI);
