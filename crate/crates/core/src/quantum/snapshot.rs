//! Binary wave-function snapshots: `n_points` (u64), `x_min`, `x_max`, `t`
//! (f64), then `n_points` interleaved `(re, im)` f64 pairs, all little-endian.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid, WaveState};
use crate::error::{Error, Result};

pub fn write_snapshot<W: Write>(writer: &mut W, state: &WaveState) -> Result<()> {
    let grid = &state.grid;
    writer.write_all(&(grid.n_points() as u64).to_le_bytes())?;
    for v in [grid.x_min(), grid.x_max(), state.t] {
        writer.write_all(&v.to_le_bytes())?;
    }
    for z in &state.psi {
        writer.write_all(&z.re.to_le_bytes())?;
        writer.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64<R: Read>(reader: &mut R) -> Result<f64> {
    let mut bytes = [0u8; 8];
    reader.read_exact(&mut bytes)?;
    Ok(f64::from_le_bytes(bytes))
}

pub fn read_snapshot<R: Read>(reader: &mut R) -> Result<WaveState> {
    let mut bytes = [0u8; 8];
    reader.read_exact(&mut bytes)?;
    let n_points = usize::try_from(u64::from_le_bytes(bytes))
        .map_err(|_| Error::Io("snapshot point count does not fit in memory".into()))?;
    let x_min = read_f64(reader)?;
    let x_max = read_f64(reader)?;
    let t = read_f64(reader)?;
    let grid = Grid::new(x_min, x_max, n_points)?;
    let psi = (0..n_points)
        .map(|_| Ok(Complex64::new(read_f64(reader)?, read_f64(reader)?)))
        .collect::<Result<Vec<_>>>()?;
    WaveState::new(grid, psi, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let grid = Grid::new(0.0, 12.5, 256).unwrap();
        let mut state = WaveState::gaussian(grid, 4.0, 1.0, 0.3, 1.0).unwrap();
        state.t = 17.25;
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &state).unwrap();
        assert_eq!(bytes.len(), 32 + 16 * 256);
        assert_eq!(&bytes[..8], &256u64.to_le_bytes());
        let back = read_snapshot(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn truncated_input_is_an_io_error() {
        let grid = Grid::new(0.0, 1.0, 256).unwrap();
        let state = WaveState::gaussian(grid, 0.5, 0.1, 0.0, 1.0).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &state).unwrap();
        bytes.truncate(100);
        assert!(matches!(read_snapshot(&mut bytes.as_slice()), Err(Error::Io(_))));
    }
}
