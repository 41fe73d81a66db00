//! Trajectory export: CSV rows and a compact binary snapshot.
//!
//! Snapshot layout (all integers and floats little-endian):
//!
//! | field            | type        |
//! |------------------|-------------|
//! | magic            | `b"FRACHEAT"` |
//! | version          | u32 (= 1)   |
//! | d                | u32         |
//! | alpha            | f64         |
//! | horizon T        | f64         |
//! | half-width L     | f64         |
//! | nt               | u64         |
//! | nx               | u64         |
//! | seed             | u64         |
//! | preset name len  | u32         |
//! | preset name      | UTF-8 bytes |
//! | values           | f64 × (nt+1)·nx·d, order `[k][j][c]` |

use std::io::{Read, Write};

use super::grid::SolverGrid;
use super::solver::FieldSample;
use crate::error::{Error, Result};
use crate::kernel::Alpha;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"FRACHEAT";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Write `seed,t,x,component,value` rows for every `t_stride`-th time and
/// `x_stride`-th node (the final time row is always included).
pub fn write_csv<W: Write>(sample: &FieldSample, out: W, t_stride: usize, x_stride: usize) -> Result<()> {
    if t_stride == 0 || x_stride == 0 {
        return Err(Error::domain("csv strides must be positive"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "t", "x", "component", "value"])?;
    let g = &sample.grid;
    let mut steps: Vec<usize> = (0..=g.nt).step_by(t_stride).collect();
    if steps.last() != Some(&g.nt) {
        steps.push(g.nt);
    }
    let seed = sample.seed.to_string();
    for k in steps {
        let t = format!("{:.12e}", g.time(k));
        for j in (0..g.nx).step_by(x_stride) {
            let x = format!("{:.12e}", g.position(j));
            for c in 0..sample.d {
                w.write_record([
                    seed.as_str(),
                    t.as_str(),
                    x.as_str(),
                    &c.to_string(),
                    &format!("{:.17e}", sample.value(k, j, c)),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_snapshot<W: Write>(sample: &FieldSample, mut out: W) -> std::io::Result<()> {
    let g = &sample.grid;
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    out.write_all(&(sample.d as u32).to_le_bytes())?;
    out.write_all(&g.alpha.value().to_le_bytes())?;
    out.write_all(&g.horizon.to_le_bytes())?;
    out.write_all(&g.half_width.to_le_bytes())?;
    out.write_all(&(g.nt as u64).to_le_bytes())?;
    out.write_all(&(g.nx as u64).to_le_bytes())?;
    out.write_all(&sample.seed.to_le_bytes())?;
    let name = sample.preset.as_bytes();
    out.write_all(&(name.len() as u32).to_le_bytes())?;
    out.write_all(name)?;
    let mut buf = Vec::with_capacity(sample.values.len() * 8);
    for v in &sample.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(b)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<FieldSample> {
    let magic: [u8; 8] = take(&mut r)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = u32::from_le_bytes(take(&mut r)?) as usize;
    let alpha = f64::from_le_bytes(take(&mut r)?);
    let horizon = f64::from_le_bytes(take(&mut r)?);
    let half_width = f64::from_le_bytes(take(&mut r)?);
    let nt = u64::from_le_bytes(take(&mut r)?) as usize;
    let nx = u64::from_le_bytes(take(&mut r)?) as usize;
    let seed = u64::from_le_bytes(take(&mut r)?);
    let name_len = u32::from_le_bytes(take(&mut r)?) as usize;
    if name_len > 4096 || d == 0 {
        return Err(Error::Format("implausible header".into()));
    }
    let mut name = vec![0u8; name_len];
    r.read_exact(&mut name)
        .map_err(|e| Error::Format(format!("truncated preset name: {e}")))?;
    let preset = String::from_utf8(name).map_err(|_| Error::Format("preset name is not UTF-8".into()))?;
    let alpha = Alpha::new(alpha).map_err(|e| Error::Format(e.to_string()))?;
    let grid = SolverGrid::new(alpha, horizon, half_width, nt, nx).map_err(|e| Error::Format(e.to_string()))?;
    let count = (nt + 1)
        .checked_mul(nx)
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(|| Error::Format("grid too large".into()))?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)
        .map_err(|e| Error::Format(format!("reading values: {e}")))?;
    if raw.len() != count * 8 {
        return Err(Error::Format(format!(
            "expected {} value bytes, found {}",
            count * 8,
            raw.len()
        )));
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(FieldSample {
        grid,
        d,
        preset,
        seed,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spde::{solve, ModelSpec, Preset};

    fn sample() -> FieldSample {
        let g = SolverGrid::new(Alpha::new(1.5).unwrap(), 0.5, 4.0, 8, 16).unwrap();
        solve(&ModelSpec::new(2, Preset::BoundedSmooth), &g, 77).unwrap()
    }

    #[test]
    fn snapshot_roundtrip() {
        let s = sample();
        let mut buf = Vec::new();
        write_snapshot(&s, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"FRACHEAT");
        let back = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn snapshot_rejects_corruption() {
        let s = sample();
        let mut buf = Vec::new();
        write_snapshot(&s, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_snapshot(&bad[..]), Err(Error::Format(_))));
        assert!(matches!(read_snapshot(&buf[..buf.len() - 3]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_layout() {
        let s = sample();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf, 4, 8).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "seed,t,x,component,value");
        // steps 0, 4, 8; nodes 0, 8; two components
        assert_eq!(lines.len(), 1 + 3 * 2 * 2);
        assert!(lines[1].starts_with("77,"));
    }
}
