//! Packed bond snapshots.
//!
//! Layout (little-endian): `N: u32`, `T: f64`, `ε: f64`, `seed: u64`,
//! `sweeps: u64`, `bond count: u64`, then one bit per bond in bond order,
//! least significant bit first.

use std::io::{Read, Write};

use super::BondConfig;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("malformed snapshot: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BondSnapshot {
    pub half_side: u32,
    pub temperature: f64,
    pub eps: f64,
    pub seed: u64,
    pub sweeps: u64,
    pub bonds: BondConfig,
}

const HEADER_LEN: usize = 4 + 8 * 5;

impl BondSnapshot {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), SnapshotError> {
        w.write_all(&self.half_side.to_le_bytes())?;
        w.write_all(&self.temperature.to_le_bytes())?;
        w.write_all(&self.eps.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.sweeps.to_le_bytes())?;
        w.write_all(&(self.bonds.len() as u64).to_le_bytes())?;
        let mut packed = vec![0u8; self.bonds.len().div_ceil(8)];
        for (b, &open) in self.bonds.bits().iter().enumerate() {
            if open {
                packed[b / 8] |= 1 << (b % 8);
            }
        }
        w.write_all(&packed)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, SnapshotError> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|e| SnapshotError::Malformed(format!("header: {e}")))?;
        let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let half_side = u32::from_le_bytes(header[..4].try_into().unwrap());
        let temperature = f64::from_bits(u64_at(4));
        let eps = f64::from_bits(u64_at(12));
        let seed = u64_at(20);
        let sweeps = u64_at(28);
        let count = u64_at(36) as usize;
        let mut packed = Vec::new();
        r.read_to_end(&mut packed)?;
        if packed.len() != count.div_ceil(8) {
            return Err(SnapshotError::Malformed(format!(
                "{count} bonds but {} payload bytes",
                packed.len()
            )));
        }
        let bits = (0..count).map(|b| packed[b / 8] >> (b % 8) & 1 == 1).collect();
        Ok(BondSnapshot {
            half_side,
            temperature,
            eps,
            seed,
            sweeps,
            bonds: BondConfig::from_bits(bits),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let bits: Vec<bool> = (0..37).map(|i| i % 3 == 0).collect();
        let snap = BondSnapshot {
            half_side: 1,
            temperature: 3.0,
            eps: 0.1,
            seed: 42,
            sweeps: 1000,
            bonds: BondConfig::from_bits(bits),
        };
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 5);
        assert_eq!(BondSnapshot::read_from(&buf[..]).unwrap(), snap);
        assert!(BondSnapshot::read_from(&buf[..buf.len() - 1]).is_err());
    }
}
