//! Binary snapshots of field collections.
//!
//! Layout, all little-endian: `dim` (u64), `n_per_dim` (u64), `box_len`
//! (f64), `time` (f64), then each field's values in row-major order as f64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read as _, Write as _};
use std::path::Path;

use crate::lpbesov::{Field, Grid};
use crate::scalar::{lit, Real};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DumpRecord {
    pub grid: Grid,
    pub time: f64,
    pub fields: Vec<Vec<f64>>,
}

impl DumpRecord {
    /// Reconstitutes the stored arrays as typed fields.
    pub fn to_fields<T: Real>(&self) -> Result<Vec<Field<T>>> {
        self.fields
            .iter()
            .map(|vals| Field::from_values(self.grid, vals.iter().map(|&v| lit::<T>(v)).collect()))
            .collect()
    }
}

/// Writes a snapshot of the given fields, which must share one grid.
pub fn dump_fields<T: Real>(path: &Path, time: f64, fields: &[&Field<T>]) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::Config("cannot dump an empty field list".into()));
    }
    let grid = fields[0].grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::Config("dumped fields must share one grid".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(grid.dim as u64).to_le_bytes())?;
    w.write_all(&(grid.n_per_dim as u64).to_le_bytes())?;
    w.write_all(&grid.box_len.to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for f in fields {
        for &v in f.values() {
            w.write_all(&v.to_f64().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64(r: &mut impl std::io::Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl std::io::Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a snapshot back; the number of fields is inferred from the file
/// size, which must be an exact multiple of the per-field payload.
pub fn read_dump(path: &Path) -> Result<DumpRecord> {
    let mut r = BufReader::new(File::open(path)?);
    let dim = read_u64(&mut r)? as usize;
    let n_per_dim = read_u64(&mut r)? as usize;
    let box_len = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let grid = Grid::new(dim, n_per_dim, box_len)?;
    let len = grid.len();
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let field_bytes = len * 8;
    if payload.is_empty() || payload.len() % field_bytes != 0 {
        return Err(Error::Config(format!(
            "dump {} payload of {} bytes is not a positive multiple of the {} bytes per field",
            path.display(),
            payload.len(),
            field_bytes
        )));
    }
    let fields = payload
        .chunks_exact(field_bytes)
        .map(|chunk| {
            chunk
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect()
        })
        .collect();
    Ok(DumpRecord { grid, time, fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpbesov::Field;

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        let grid = Grid::new(2, 16, 7.5).unwrap();
        let a = Field::<f64>::from_fn(grid, |x| (x[0] * 1.3).sin() + x[1]);
        let b = Field::<f64>::from_fn(grid, |x| x[0] * x[1]);
        dump_fields(&path, 2.25, &[&a, &b]).unwrap();
        let rec = read_dump(&path).unwrap();
        assert_eq!(rec.grid, grid);
        assert_eq!(rec.time, 2.25);
        assert_eq!(rec.fields.len(), 2);
        assert_eq!(rec.fields[0], a.values());
        assert_eq!(rec.fields[1], b.values());
        let typed = rec.to_fields::<f64>().unwrap();
        assert_eq!(typed[1].values(), b.values());
    }

    #[test]
    fn header_layout_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        let grid = Grid::new(1, 8, 3.0).unwrap();
        let f = Field::<f64>::zeros(grid);
        dump_fields(&path, 1.5, &[&f]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 32 + 8 * 8);
        assert_eq!(u64::from_le_bytes(bytes[0..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3.0);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 1.5);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        let a = Field::<f64>::zeros(Grid::new(1, 8, 3.0).unwrap());
        let b = Field::<f64>::zeros(Grid::new(1, 16, 3.0).unwrap());
        assert!(dump_fields(&path, 0.0, &[&a, &b]).is_err());
    }
}
