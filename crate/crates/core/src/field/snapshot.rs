//! Little-endian binary snapshot format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "WLNS"
//! 4       4     version (u32, currently 1)
//! 8       4     n (u32), points per axis
//! 12      8     length (f64), box period
//! 20      8     time (f64)
//! 28      4     field count (u32)
//! 32      ...   field_count × n³ f64 values, each field x-fastest
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::Real;

pub const MAGIC: &[u8; 4] = b"WLNS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub n: u32,
    pub length: f64,
    pub time: f64,
    pub fields: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_velocity<T: Real>(time: T, u: &VectorField<T>) -> Self {
        let g = u.grid();
        Self {
            n: g.n() as u32,
            length: g.length().as_f64(),
            time: time.as_f64(),
            fields: u
                .components()
                .iter()
                .map(|c| c.values().iter().map(|v| v.as_f64()).collect())
                .collect(),
        }
    }

    pub fn grid<T: Real>(&self) -> Result<Grid<T>> {
        Grid::new(self.n as usize, T::lit(self.length))
    }

    /// First three payloads as a velocity field.
    pub fn velocity<T: Real>(&self) -> Result<VectorField<T>> {
        if self.fields.len() < 3 {
            return Err(Error::Format(format!(
                "velocity snapshot needs 3 fields, found {}",
                self.fields.len()
            )));
        }
        let g = self.grid()?;
        let comp = |c: usize| ScalarField::new(g, self.fields[c].iter().map(|&v| T::lit(v)).collect());
        VectorField::new([comp(0)?, comp(1)?, comp(2)?])
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let cells = (self.n as usize).pow(3);
        if let Some(bad) = self.fields.iter().position(|f| f.len() != cells) {
            return Err(Error::InvalidInput(format!("field {bad} does not have n³ = {cells} values")));
        }
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.length.to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        w.write_all(&(self.fields.len() as u32).to_le_bytes())?;
        for f in &self.fields {
            for v in f {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format("bad magic, not a WLNS snapshot".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let n = u32_at(8);
        let length = f64_at(12);
        let time = f64_at(20);
        let count = u32_at(28) as usize;
        let cells = (n as usize).pow(3);
        let mut fields = Vec::with_capacity(count);
        let mut buf = vec![0u8; cells * 8];
        for c in 0..count {
            r.read_exact(&mut buf)
                .map_err(|e| Error::Format(format!("truncated payload in field {c}: {e}")))?;
            fields.push(
                buf.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect(),
            );
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after last field".into()));
        }
        Ok(Self { n, length, time, fields })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_fixed() {
        let s = Snapshot { n: 8, length: 2.0, time: 0.5, fields: vec![vec![1.0; 512]] };
        let mut bytes = Vec::new();
        s.write(&mut bytes).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 512 * 8);
        assert_eq!(&bytes[0..4], b"WLNS");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &8u32.to_le_bytes());
        assert_eq!(&bytes[12..20], &2.0f64.to_le_bytes());
        assert_eq!(&bytes[20..28], &0.5f64.to_le_bytes());
        assert_eq!(&bytes[28..32], &1u32.to_le_bytes());
        assert_eq!(&bytes[32..40], &1.0f64.to_le_bytes());
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let s = Snapshot { n: 8, length: 1.0, time: 0.0, fields: vec![vec![0.0; 512]] };
        let mut bytes = Vec::new();
        s.write(&mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Snapshot::read(&bad[..]), Err(Error::Format(_))));
        assert!(matches!(Snapshot::read(&bytes[..100]), Err(Error::Format(_))));
        let mut long = bytes;
        long.push(0);
        assert!(matches!(Snapshot::read(&long[..]), Err(Error::Format(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn write_then_read_is_identity(
            time in -1e6f64..1e6,
            length in 1e-3f64..1e3,
            count in 0usize..4,
            seed in prop::collection::vec(-1e9f64..1e9, 512)
        ) {
            let fields = (0..count).map(|c| seed.iter().map(|v| v * (c as f64 + 1.0)).collect()).collect();
            let s = Snapshot { n: 8, length, time, fields };
            let mut bytes = Vec::new();
            s.write(&mut bytes).unwrap();
            prop_assert_eq!(Snapshot::read(&bytes[..]).unwrap(), s);
        }
    }
}
