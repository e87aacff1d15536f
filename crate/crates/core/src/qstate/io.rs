//! Wave-function persistence.
//!
//! Binary layout (little endian):
//!
//! ```text
//! magic   b"HSWF"
//! version u32 (= 1)
//! x_min   f64
//! x_max   f64
//! n       u64
//! units   u8   (0 = SI, 1 = natural)
//! x       n × f64
//! re ψ    n × f64
//! im ψ    n × f64
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::grid::GridSpec;
use super::params::UnitSystem;
use super::wavefunction::WaveFunction;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"HSWF";
const VERSION: u32 = 1;

pub fn write_binary<W: Write>(psi: &WaveFunction, units: UnitSystem, mut w: W) -> Result<()> {
    let g = psi.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&g.x_min.to_le_bytes())?;
    w.write_all(&g.x_max.to_le_bytes())?;
    w.write_all(&(g.n_points as u64).to_le_bytes())?;
    w.write_all(&[match units {
        UnitSystem::Si => 0u8,
        UnitSystem::Natural => 1u8,
    }])?;
    for x in g.positions() {
        w.write_all(&x.to_le_bytes())?;
    }
    for a in psi.amplitudes() {
        w.write_all(&a.re.to_le_bytes())?;
    }
    for a in psi.amplitudes() {
        w.write_all(&a.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(WaveFunction, UnitSystem)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a wave-function file".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    if u32::from_le_bytes(v) != VERSION {
        return Err(Error::Format(format!(
            "unsupported wave-function version {}",
            u32::from_le_bytes(v)
        )));
    }
    let x_min = read_f64(&mut r)?;
    let x_max = read_f64(&mut r)?;
    let mut nb = [0u8; 8];
    r.read_exact(&mut nb)?;
    let n = u64::from_le_bytes(nb) as usize;
    let mut ub = [0u8; 1];
    r.read_exact(&mut ub)?;
    let units = match ub[0] {
        0 => UnitSystem::Si,
        1 => UnitSystem::Natural,
        other => return Err(Error::Format(format!("unknown unit flag {other}"))),
    };
    let grid = GridSpec::new(x_min, x_max, n)?;
    for _ in 0..n {
        read_f64(&mut r)?;
    }
    let re = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let im = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let amps = re
        .into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect();
    Ok((WaveFunction::new(grid, amps)?, units))
}

pub fn save_binary(psi: &WaveFunction, units: UnitSystem, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(33 + 24 * psi.amplitudes().len());
    write_binary(psi, units, &mut buf)?;
    crate::harness::persist::write_atomic(path, &buf)
}

pub fn load_binary(path: &Path) -> Result<(WaveFunction, UnitSystem)> {
    let f = std::fs::File::open(path)?;
    read_binary(std::io::BufReader::new(f))
}

/// Columns `x,re,im` at full double precision.
pub fn write_csv<W: Write>(psi: &WaveFunction, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "re", "im"])?;
    for (j, a) in psi.amplitudes().iter().enumerate() {
        out.write_record([
            crate::harness::persist::fmt_f64(psi.grid().x(j)),
            crate::harness::persist::fmt_f64(a.re),
            crate::harness::persist::fmt_f64(a.im),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{render_gaussian, GaussianState};

    #[test]
    fn binary_round_trip_is_exact() {
        let g = GaussianState::normalized(Complex64::new(0.5, -0.3), 0.4, 1.1);
        let psi = render_gaussian(&g, &GridSpec::symmetric(10.0, 64).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_binary(&psi, UnitSystem::Natural, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 8 + 1 + 3 * 8 * 64);
        let (back, units) = read_binary(&buf[..]).unwrap();
        assert_eq!(units, UnitSystem::Natural);
        assert_eq!(back, psi);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_binary(&b"NOPE0000"[..]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_has_three_columns() {
        let psi = WaveFunction::from_fn(GridSpec::symmetric(1.0, 16).unwrap(), |x| {
            Complex64::new(x, -x)
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&psi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,re,im");
        assert_eq!(lines.len(), 17);
        let first: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first, vec![-1.0, -1.0, 1.0]);
    }
}
