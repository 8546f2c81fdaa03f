//! FWF1: `"FWF1"`, `u32` version, `u32 d`, `u64 N` per axis, `f64 L` per
//! axis, `f64 t`, then `N^d` values in row-major order. All little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub const MAGIC: &[u8; 4] = b"FWF1";
pub const VERSION: u32 = 1;

pub fn write_snapshot_to<W: Write>(mut w: W, field: &Field, t: f64) -> std::io::Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    for _ in 0..g.dim() {
        w.write_all(&(g.n() as u64).to_le_bytes())?;
    }
    for _ in 0..g.dim() {
        w.write_all(&g.half_width().to_le_bytes())?;
    }
    w.write_all(&t.to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn write_snapshot(path: &Path, field: &Field, t: f64) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot_to(BufWriter::new(file), field, t).map_err(|e| Error::io(path, e))
}

fn take<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(buf)
}

/// Reads a snapshot and rebuilds its grid. Axes must agree in `N` and `L`.
pub fn read_snapshot_from<R: Read>(mut r: R) -> Result<(Field, f64)> {
    if &take::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Format("missing FWF1 magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = u32::from_le_bytes(take(&mut r)?) as usize;
    if !(1..=3).contains(&d) {
        return Err(Error::Format(format!("dimension {d} outside 1..=3")));
    }
    let ns: Vec<u64> = (0..d)
        .map(|_| take(&mut r).map(u64::from_le_bytes))
        .collect::<Result<_>>()?;
    let ls: Vec<f64> = (0..d)
        .map(|_| take(&mut r).map(f64::from_le_bytes))
        .collect::<Result<_>>()?;
    if ns.iter().any(|&n| n != ns[0]) || ls.iter().any(|&l| l != ls[0]) {
        return Err(Error::Format("anisotropic grids are not supported".into()));
    }
    let t = f64::from_le_bytes(take(&mut r)?);
    let n = usize::try_from(ns[0]).map_err(|_| Error::Format("N too large".into()))?;
    let grid = Grid::new(d, n, ls[0]).map_err(|e| Error::Format(e.to_string()))?;
    let mut bytes = Vec::with_capacity(grid.len() * 8);
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Format(format!("reading values: {e}")))?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Format(format!(
            "expected {} values, found {} bytes",
            grid.len(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((Field::new(&grid, values)?, t))
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot_from(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_in_memory() {
        let g = Grid::new(2, 8, 1.5).unwrap();
        let f = Field::from_fn(&g, |x| x[0] - 2.0 * x[1] + 1e-300).unwrap();
        let mut buf = Vec::new();
        write_snapshot_to(&mut buf, &f, 0.75).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 2 * 8 + 2 * 8 + 8 + 64 * 8);
        assert_eq!(&buf[..4], b"FWF1");
        let (back, t) = read_snapshot_from(&buf[..]).unwrap();
        assert_eq!(back, f);
        assert_eq!(t, 0.75);
    }

    #[test]
    fn rejects_damage() {
        let g = Grid::new(1, 4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot_to(&mut buf, &Field::constant(&g, 2.0), 0.0).unwrap();
        assert!(read_snapshot_from(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_snapshot_from(&bad[..]),
            Err(Error::Format(_))
        ));
        let mut bad = buf.clone();
        bad[4] = 2;
        assert!(matches!(
            read_snapshot_from(&bad[..]),
            Err(Error::Format(_))
        ));
    }
}
