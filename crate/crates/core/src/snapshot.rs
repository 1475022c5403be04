//! Binary field snapshots: a short text header followed by little-endian
//! `f64` site values, row-major with x₃ slowest.
//!
//! ```text
//! FSKYRME1
//! target = s2
//! n = 32
//! box_length = 4
//! boundary_mode = fixed
//! iteration = 100
//! energy = 2.7985190000000000e1
//! end
//! <payload>
//! ```

use std::fs;
use std::path::Path;

use crate::coset::{FieldMap, TargetSpace};
use crate::error::{Error, Result};
use crate::forms::{BoundaryMode, Grid3};
use crate::lie::Quat;

pub const MAGIC: &str = "FSKYRME1";

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub field: FieldMap,
    pub iteration: usize,
    pub energy: f64,
}

pub fn components(target: TargetSpace) -> usize {
    match target {
        TargetSpace::GroupSU2 => 4,
        TargetSpace::SphereS2 => 3,
    }
}

impl FieldSnapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.field.grid();
        let t = self.field.target();
        // `{:?}` prints the shortest string that parses back to the same f64.
        let header = format!(
            "{MAGIC}\ntarget = {}\nn = {}\nbox_length = {:?}\nboundary_mode = {}\niteration = {}\nenergy = {:?}\nend\n",
            t.name(),
            g.n(),
            g.box_length(),
            g.boundary().as_str(),
            self.iteration,
            self.energy,
        );
        let c = components(t);
        let mut out = header.into_bytes();
        out.reserve(g.sites() * c * 8);
        for q in self.field.values() {
            let a = q.to_array();
            for v in &a[4 - c..] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::Snapshot(m);
        let mut pos = 0;
        let mut next_line = || -> Result<String> {
            let rest = &bytes[pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| bad("truncated header".into()))?;
            pos += end + 1;
            String::from_utf8(rest[..end].to_vec()).map_err(|_| bad("header is not UTF-8".into()))
        };
        if next_line()? != MAGIC {
            return Err(bad(format!("missing magic `{MAGIC}`")));
        }
        let mut fields = Vec::new();
        loop {
            let line = next_line()?;
            if line == "end" {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed header line `{line}`")))?;
            fields.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| -> Result<&str> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| bad(format!("header lacks `{key}`")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse::<f64>()
                .map_err(|_| bad(format!("`{key}` is not a number")))
        };
        let int = |key: &str| -> Result<usize> {
            get(key)?
                .parse::<usize>()
                .map_err(|_| bad(format!("`{key}` is not an unsigned integer")))
        };
        let target = match get("target")? {
            "su2" => TargetSpace::GroupSU2,
            "s2" => TargetSpace::SphereS2,
            other => return Err(bad(format!("unknown target `{other}`"))),
        };
        let boundary = match get("boundary_mode")? {
            "periodic" => BoundaryMode::Periodic,
            "fixed" => BoundaryMode::FixedBoundary,
            other => return Err(bad(format!("unknown boundary mode `{other}`"))),
        };
        let grid = Grid3::new(int("n")?, num("box_length")?, boundary)?;
        let c = components(target);
        let payload = &bytes[pos..];
        if payload.len() != grid.sites() * c * 8 {
            return Err(bad(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                grid.sites() * c * 8
            )));
        }
        let values = payload
            .chunks_exact(c * 8)
            .map(|site| {
                let mut a = [0.0; 4];
                for (i, chunk) in site.chunks_exact(8).enumerate() {
                    a[4 - c + i] = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
                }
                Quat::new(a[0], a[1], a[2], a[3])
            })
            .collect();
        Ok(FieldSnapshot {
            field: FieldMap::new(grid, target, values)?,
            iteration: int("iteration")?,
            energy: num("energy")?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        FieldSnapshot::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields;

    #[test]
    fn round_trip_is_bitwise() {
        let g = Grid3::new(6, 2.7, BoundaryMode::FixedBoundary).unwrap();
        for t in [TargetSpace::GroupSU2, TargetSpace::SphereS2] {
            let field = fields::random_smooth(g, t, 3, 0.9, 1.3).unwrap();
            let snap = FieldSnapshot {
                field,
                iteration: 17,
                energy: 0.1 + 0.2,
            };
            let bytes = snap.to_bytes();
            let back = FieldSnapshot::from_bytes(&bytes).unwrap();
            assert_eq!(back.energy.to_bits(), snap.energy.to_bits());
            for (a, b) in back.field.values().iter().zip(snap.field.values()) {
                assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
            }
            assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn payload_length_checked() {
        let g = Grid3::periodic(4, 1.0).unwrap();
        let snap = FieldSnapshot {
            field: FieldMap::constant(g, TargetSpace::SphereS2, Quat::I).unwrap(),
            iteration: 0,
            energy: 0.0,
        };
        let bytes = snap.to_bytes();
        let header_len = bytes.len() - 64 * 3 * 8;
        assert!(FieldSnapshot::from_bytes(&bytes[..bytes.len() - 8]).is_err());
        assert!(FieldSnapshot::from_bytes(&bytes[..header_len]).is_err());
        assert!(FieldSnapshot::from_bytes(b"FSKYRME2\nend\n").is_err());
    }
}
