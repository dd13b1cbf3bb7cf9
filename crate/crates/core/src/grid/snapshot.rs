//! Wavefunction snapshots.
//!
//! Binary `.wf` layout, all little-endian:
//!
//! ```text
//! u64 dim
//! u64 n[axis]        (dim entries)
//! f64 length[axis]   (dim entries)
//! f64 time
//! f64 hbar
//! f64 mass
//! f64 re, f64 im     (one pair per grid point, row-major)
//! ```
//!
//! Grids with at most [`JSON_MAX_POINTS`] points can also be written as JSON.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{GridSpec, WaveFunction};
use crate::error::{Error, Result};

pub const JSON_MAX_POINTS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub psi: WaveFunction,
    pub hbar: f64,
    pub mass: f64,
}

pub fn write_wf<W: Write>(mut w: W, psi: &WaveFunction, hbar: f64, mass: f64) -> Result<()> {
    let g = psi.grid();
    w.write_all(&(g.dim() as u64).to_le_bytes())?;
    for &n in g.shape() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &l in g.lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    for v in [psi.time(), hbar, mass] {
        w.write_all(&v.to_le_bytes())?;
    }
    for z in psi.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_wf<R: Read>(mut r: R) -> Result<Snapshot> {
    let dim = read_u64(&mut r)? as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let shape = (0..dim).map(|_| read_u64(&mut r).map(|n| n as usize)).collect::<Result<Vec<_>>>()?;
    let lengths = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let grid = GridSpec::new(shape, lengths)?;
    let time = read_f64(&mut r)?;
    let hbar = read_f64(&mut r)?;
    let mass = read_f64(&mut r)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut buf = [0u8; 16];
    for _ in 0..grid.len() {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated sample data: {e}")))?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        values.push(C64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after sample data".into()));
    }
    Ok(Snapshot { psi: WaveFunction::new(grid, values, time)?, hbar, mass })
}

#[derive(Serialize, Deserialize)]
struct JsonSnapshot {
    dim: usize,
    n: Vec<usize>,
    length: Vec<f64>,
    time: f64,
    hbar: f64,
    mass: f64,
    values: Vec<[f64; 2]>,
}

pub fn to_json(psi: &WaveFunction, hbar: f64, mass: f64) -> Result<String> {
    let g = psi.grid();
    if g.len() > JSON_MAX_POINTS {
        return Err(Error::Format(format!(
            "JSON snapshots are limited to {JSON_MAX_POINTS} points, grid has {}",
            g.len()
        )));
    }
    let js = JsonSnapshot {
        dim: g.dim(),
        n: g.shape().to_vec(),
        length: g.lengths().to_vec(),
        time: psi.time(),
        hbar,
        mass,
        values: psi.values().iter().map(|z| [z.re, z.im]).collect(),
    };
    Ok(serde_json::to_string_pretty(&js)?)
}

pub fn from_json(text: &str) -> Result<Snapshot> {
    let js: JsonSnapshot = serde_json::from_str(text)?;
    if js.n.len() != js.dim {
        return Err(Error::Format("dim does not match the number of axes".into()));
    }
    let grid = GridSpec::new(js.n, js.length)?;
    let values = js.values.into_iter().map(|[re, im]| C64::new(re, im)).collect();
    Ok(Snapshot { psi: WaveFunction::new(grid, values, js.time)?, hbar: js.hbar, mass: js.mass })
}

/// Write `.json` paths as JSON, everything else in the binary format.
pub fn save(path: &Path, psi: &WaveFunction, hbar: f64, mass: f64) -> Result<()> {
    if path.extension().is_some_and(|e| e == "json") {
        std::fs::write(path, to_json(psi, hbar, mass)?)?;
    } else {
        write_wf(BufWriter::new(File::create(path)?), psi, hbar, mass)?;
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<Snapshot> {
    if path.extension().is_some_and(|e| e == "json") {
        from_json(&std::fs::read_to_string(path)?)
    } else {
        read_wf(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, InitialState};
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_fixed() {
        let g = make_grid(1, 8, 2.0).unwrap();
        let psi = sample(&g, &InitialState::PlaneWave { k: vec![std::f64::consts::PI] }).unwrap();
        let mut buf = Vec::new();
        write_wf(&mut buf, &psi, 1.5, 2.0).unwrap();
        assert_eq!(buf.len(), 8 * (1 + 1 + 1 + 3) + 16 * 8);
        assert_eq!(u64::from_le_bytes(buf[0..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 2.0);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(buf[48..56].try_into().unwrap()), psi.values()[0].re);
    }

    #[test]
    fn truncated_file_rejected() {
        let g = make_grid(1, 8, 2.0).unwrap();
        let psi = sample(&g, &InitialState::PlaneWave { k: vec![0.0] }).unwrap();
        let mut buf = Vec::new();
        write_wf(&mut buf, &psi, 1.0, 1.0).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_wf(&buf[..]), Err(Error::Format(_))));
    }

    #[test]
    fn json_limited_to_small_grids() {
        let g = make_grid(2, 128, 1.0).unwrap();
        let psi = sample(&g, &InitialState::PlaneWave { k: vec![0.0, 0.0] }).unwrap();
        assert!(to_json(&psi, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn binary_and_json_round_trip(
            re in prop::collection::vec(-10.0f64..10.0, 16),
            im in prop::collection::vec(-10.0f64..10.0, 16),
            t in -5.0f64..5.0,
            hbar in 0.1f64..3.0,
        ) {
            let g = make_grid(1, 16, 3.0).unwrap();
            let vals = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
            let psi = WaveFunction::new(g, vals, t).unwrap();
            let mut buf = Vec::new();
            write_wf(&mut buf, &psi, hbar, 2.0).unwrap();
            let back = read_wf(&buf[..]).unwrap();
            prop_assert_eq!(&back.psi, &psi);
            prop_assert_eq!(back.hbar, hbar);
            let js = from_json(&to_json(&psi, hbar, 2.0).unwrap()).unwrap();
            prop_assert_eq!(js.psi, psi);
        }
    }
}
