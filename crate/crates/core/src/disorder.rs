//! The Gaussian random field `{h_v}` and sums over site sets.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coarsegrain::Decomposition;
use crate::lattice::{CoarseGrid, Region, SiteSet};
use crate::math::compensated_sum;

#[derive(Debug, thiserror::Error)]
pub enum DisorderError {
    #[error("field scale must be finite and non-negative, got {0}")]
    BadScale(f64),
    #[error("site set lives on a region of half side {found}, field on {expected}")]
    RegionMismatch { expected: i32, found: i32 },
    #[error("seed {0:#x} does not fit the 48-bit export header")]
    SeedTooWide(u64),
    #[error("half side {0} does not fit the 16-bit export header")]
    RegionTooWide(i32),
    #[error("malformed field file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `ε ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct FieldScale(f64);

impl FieldScale {
    pub const ZERO: FieldScale = FieldScale(0.0);

    pub fn new(eps: f64) -> Result<Self, DisorderError> {
        if eps.is_finite() && eps >= 0.0 {
            Ok(FieldScale(eps))
        } else {
            Err(DisorderError::BadScale(eps))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Standard normals `g_0, …, g_{len-1}` where `g_i` depends only on
/// `(seed, i)`.
pub fn gaussian_values(len: usize, seed: u64) -> Vec<f64> {
    (0..len).map(|i| gaussian_at(seed, i as u64)).collect()
}

#[inline]
pub fn gaussian_at(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    StandardNormal.sample(&mut rng)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisorderField {
    region: Region,
    seed: u64,
    values: Vec<f64>,
}

impl DisorderField {
    pub fn sample(region: Region, seed: u64) -> Self {
        DisorderField {
            region,
            seed,
            values: gaussian_values(region.len(), seed),
        }
    }

    /// The field `h ≡ 0`.
    pub fn zero(region: Region) -> Self {
        DisorderField {
            region,
            seed: 0,
            values: vec![0.0; region.len()],
        }
    }

    /// Wraps explicit values (length must match the region).
    pub fn from_values(region: Region, seed: u64, values: Vec<f64>) -> Result<Self, DisorderError> {
        if values.len() != region.len() {
            return Err(DisorderError::Malformed(format!(
                "{} values for a region of {} sites",
                values.len(),
                region.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(DisorderError::Malformed(format!("non-finite value {v}")));
        }
        Ok(DisorderField { region, seed, values })
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn negated(&self) -> DisorderField {
        DisorderField {
            region: self.region,
            seed: self.seed,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    fn check_region(&self, set: &SiteSet) -> Result<(), DisorderError> {
        if set.region() != self.region {
            return Err(DisorderError::RegionMismatch {
                expected: self.region.half_side(),
                found: set.region().half_side(),
            });
        }
        Ok(())
    }

    /// `h_C = Σ_{x∈C} h_x`, compensated.
    pub fn field_sum(&self, set: &SiteSet) -> Result<f64, DisorderError> {
        self.check_region(set)?;
        Ok(compensated_sum(set.indices().map(|i| self.values[i])))
    }

    pub fn abs_sum(&self, set: &SiteSet) -> Result<f64, DisorderError> {
        self.check_region(set)?;
        Ok(compensated_sum(set.indices().map(|i| self.values[i].abs())))
    }

    /// `H_{B,B'} = Σ |h_v|` over `v ∈ Q_{Ball(B∪B', 4k)} ∩ Λ_N`.
    pub fn shell_abs_sum(&self, grid: &CoarseGrid, decomposition: &Decomposition) -> Result<f64, DisorderError> {
        let shell = grid.fine_set(&decomposition.shell());
        let n = self.region.half_side();
        Ok(compensated_sum(
            shell
                .iter()
                .filter(|s| s.norm_inf() <= n)
                .map(|s| self.values[self.region.index_unchecked(s)].abs()),
        ))
    }

    /// Header: half side as little-endian `u16`, then the low 48 bits of the
    /// seed; body: one little-endian `f64` per site in index order.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), DisorderError> {
        if self.seed >> 48 != 0 {
            return Err(DisorderError::SeedTooWide(self.seed));
        }
        let n = u16::try_from(self.region.half_side())
            .map_err(|_| DisorderError::RegionTooWide(self.region.half_side()))?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes()[..6])?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, DisorderError> {
        let mut header = [0u8; 8];
        r.read_exact(&mut header)
            .map_err(|e| DisorderError::Malformed(format!("header: {e}")))?;
        let n = u16::from_le_bytes([header[0], header[1]]);
        let mut seed_bytes = [0u8; 8];
        seed_bytes[..6].copy_from_slice(&header[2..]);
        let region = Region::new(n as i64).map_err(|e| DisorderError::Malformed(e.to_string()))?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * region.len() {
            return Err(DisorderError::Malformed(format!(
                "expected {} bytes of values, found {}",
                8 * region.len(),
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        DisorderField::from_values(region, u64::from_le_bytes(seed_bytes), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    #[test]
    fn sampling_is_deterministic_per_site() {
        let r = Region::new(2).unwrap();
        let a = DisorderField::sample(r, 11);
        assert_eq!(a, DisorderField::sample(r, 11));
        assert_ne!(a.values(), DisorderField::sample(r, 12).values());
        // the value at a site does not depend on the region size
        let big = DisorderField::sample(Region::new(3).unwrap(), 11);
        assert_eq!(a.values()[7], big.values()[7]);
    }

    #[test]
    fn field_sum_basics() {
        let r = Region::new(1).unwrap();
        let h = DisorderField::sample(r, 3);
        assert_eq!(h.field_sum(&SiteSet::empty(r)).unwrap(), 0.0);
        let v = Site::new(1, 0, -1);
        let single = SiteSet::from_sites(r, [v]).unwrap();
        assert_eq!(h.field_sum(&single).unwrap(), h.values()[r.index(v).unwrap()]);
        assert_eq!(
            h.negated().field_sum(&SiteSet::full(r)).unwrap(),
            -h.field_sum(&SiteSet::full(r)).unwrap()
        );
        assert!(h.field_sum(&SiteSet::empty(Region::new(2).unwrap())).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let h = DisorderField::sample(Region::new(2).unwrap(), 0xdead_beef);
        let mut buf = Vec::new();
        h.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 8 * 125);
        assert_eq!(DisorderField::read_from(&buf[..]).unwrap(), h);
        assert!(DisorderField::read_from(&buf[..20]).is_err());
        let wide = DisorderField::sample(Region::new(0).unwrap(), u64::MAX);
        assert!(matches!(wide.write_to(Vec::new()), Err(DisorderError::SeedTooWide(_))));
    }

    #[test]
    fn scale_rejects_negative() {
        assert!(FieldScale::new(-0.1).is_err());
        assert!(FieldScale::new(f64::NAN).is_err());
        assert_eq!(FieldScale::new(0.0).unwrap(), FieldScale::ZERO);
    }
}
