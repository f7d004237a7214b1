//! "VLL1" vorticity snapshots: magic, then little-endian u32 n, f64 ν, f64 t,
//! n² f64 samples row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::TorusGrid;

pub const MAGIC: &[u8; 4] = b"VLL1";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub nu: f64,
    pub t: f64,
    pub omega: ScalarField,
}

pub fn write_snapshot<W: Write>(mut w: W, omega: &ScalarField, nu: f64, t: f64) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(omega.grid().n() as u32).to_le_bytes())?;
    w.write_all(&nu.to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * omega.values().len());
    for v in omega.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4).map_err(|_| Error::Format("truncated header".into()))?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8).map_err(|_| Error::Format("truncated header".into()))?;
    let nu = f64::from_le_bytes(b8);
    r.read_exact(&mut b8).map_err(|_| Error::Format("truncated header".into()))?;
    let t = f64::from_le_bytes(b8);
    let grid = TorusGrid::new(n)?;
    let mut raw = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut raw).map_err(|_| Error::Format(format!("expected {} samples", grid.len())))?;
    let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok(Snapshot { nu, t, omega: ScalarField::new(&grid, values)? })
}

pub fn save_snapshot(path: impl AsRef<Path>, omega: &ScalarField, nu: f64, t: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, omega, nu, t)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    read_snapshot(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn round_trip_bytes() {
        let g = make_grid(8).unwrap();
        let w = ScalarField::from_fn(&g, |x1, x2| x1.sin() - x2.cos());
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &w, 1e-3, 0.25).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 8 * 64);
        assert_eq!(&buf[..4], b"VLL1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 8);
        let s = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(s.nu, 1e-3);
        assert_eq!(s.t, 0.25);
        assert_eq!(s.omega, w);
    }

    #[test]
    fn rejects_corruption() {
        let g = make_grid(4).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &ScalarField::zeros(&g), 1.0, 0.0).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshot(bad.as_slice()).is_err());
        assert!(read_snapshot(&buf[..buf.len() - 1]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_snapshot(long.as_slice()).is_err());
    }
}
