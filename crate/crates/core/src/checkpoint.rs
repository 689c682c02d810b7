//! Binary checkpoint format shared by both solvers.
//!
//! Little-endian layout:
//!
//! | bytes | content                                  |
//! |-------|------------------------------------------|
//! | 4     | magic `HNLS`                             |
//! | 4     | version, u32 (currently 1)               |
//! | 1     | grid type: 0 = torus, 1 = line           |
//! | 8     | n, u64                                   |
//! | 8     | half-length L (line) or period 2π (torus)|
//! | 8     | t, f64                                   |
//! | 8     | p, f64                                   |
//! | 16·n  | samples as (re, im) f64 pairs            |
//!
//! Round trips are bit-exact: floats are moved via their IEEE bit
//! patterns, never reformatted.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::{Grid, LineGrid, TorusGrid, TORUS_PERIOD};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"HNLS";
pub const VERSION: u32 = 1;

const GRID_TORUS: u8 = 0;
const GRID_LINE: u8 = 1;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub t: f64,
    pub p: f64,
    pub field: ComplexField,
}

pub fn write_checkpoint_to(out: &mut impl Write, t: f64, p: f64, field: &ComplexField) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    let (grid_type, l_or_period) = match field.grid() {
        Grid::Torus(_) => (GRID_TORUS, TORUS_PERIOD),
        Grid::Line(g) => (GRID_LINE, g.half_length()),
    };
    out.write_all(&[grid_type])?;
    out.write_all(&(field.n() as u64).to_le_bytes())?;
    out.write_all(&l_or_period.to_le_bytes())?;
    out.write_all(&t.to_le_bytes())?;
    out.write_all(&p.to_le_bytes())?;
    for z in field.values() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint_from(input: &mut impl Read) -> Result<Checkpoint> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = read_u32(input)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let mut grid_type = [0u8; 1];
    input.read_exact(&mut grid_type)?;
    let n = read_u64(input)? as usize;
    let l_or_period = read_f64(input)?;
    let t = read_f64(input)?;
    let p = read_f64(input)?;
    let grid = match grid_type[0] {
        GRID_TORUS => {
            if (l_or_period - TORUS_PERIOD).abs() > 1e-12 {
                return Err(Error::Format(format!(
                    "torus checkpoint carries period {l_or_period}, expected 2π"
                )));
            }
            Grid::Torus(TorusGrid::new(n)?)
        }
        GRID_LINE => {
            let k = (l_or_period / PI).round();
            if k < 2.0 || (k * PI - l_or_period).abs() > 1e-9 {
                return Err(Error::Format(format!(
                    "line checkpoint half-length {l_or_period} is not an integer multiple of π"
                )));
            }
            Grid::Line(LineGrid::new(n, k as u32)?)
        }
        other => {
            return Err(Error::Format(format!("unknown grid type byte {other}")));
        }
    };
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(input)?;
        let im = read_f64(input)?;
        values.push(Complex64::new(re, im));
    }
    let field = ComplexField::from_values(grid, values)?;
    Ok(Checkpoint { t, p, field })
}

pub fn write_checkpoint(path: &Path, t: f64, p: f64, field: &ComplexField) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint_to(&mut file, t, p, field)?;
    file.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_checkpoint_from(&mut file)
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(input: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(input: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact_on_both_grids() {
        let torus = Grid::Torus(TorusGrid::new(32).unwrap());
        let line = Grid::Line(LineGrid::new(64, 4).unwrap());
        for grid in [torus, line] {
            let f = ComplexField::from_fn(grid, |x| {
                Complex64::new((x * 1.37).sin() * 0.25, (x + 0.1).cos() * 1e-7)
            })
            .unwrap();
            let mut buf = Vec::new();
            write_checkpoint_to(&mut buf, 0.625, 3.0, &f).unwrap();
            let ck = read_checkpoint_from(&mut buf.as_slice()).unwrap();
            assert_eq!(ck.t.to_bits(), 0.625f64.to_bits());
            assert_eq!(ck.p.to_bits(), 3.0f64.to_bits());
            assert_eq!(ck.field.grid(), f.grid());
            for (a, b) in ck.field.values().iter().zip(f.values()) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
            // Write again: byte-identical files.
            let mut buf2 = Vec::new();
            write_checkpoint_to(&mut buf2, ck.t, ck.p, &ck.field).unwrap();
            assert_eq!(buf, buf2);
        }
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let f = ComplexField::zeros(Grid::Torus(TorusGrid::new(16).unwrap()));
        let mut buf = Vec::new();
        write_checkpoint_to(&mut buf, 0.0, 3.0, &f).unwrap();
        buf[0] = b'X';
        assert!(matches!(
            read_checkpoint_from(&mut buf.as_slice()),
            Err(Error::Format(_))
        ));
        let mut buf2 = Vec::new();
        write_checkpoint_to(&mut buf2, 0.0, 3.0, &f).unwrap();
        buf2[4] = 99;
        assert!(read_checkpoint_from(&mut buf2.as_slice()).is_err());
    }

    #[test]
    fn grid_type_byte_distinguishes_torus_and_line() {
        let f = ComplexField::zeros(Grid::Line(LineGrid::new(32, 2).unwrap()));
        let mut buf = Vec::new();
        write_checkpoint_to(&mut buf, 0.0, 4.0, &f).unwrap();
        assert_eq!(buf[8], 1);
        let ck = read_checkpoint_from(&mut buf.as_slice()).unwrap();
        assert!(matches!(ck.field.grid(), Grid::Line(_)));
    }
}
