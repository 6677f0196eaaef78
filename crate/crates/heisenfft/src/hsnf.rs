//! HSNF binary field dumps.
//!
//! Layout, all little-endian: the magic `HSNF1\n`, `u32 n`, `u32 N`,
//! `f64 L`, `u32 M`, `f64 T`, then `len` complex values as interleaved
//! `f64` pairs. A bare λ-slice has `M = 0` and `T = 0`. Sample order is the
//! in-memory order of the core types: `values[k·M + j]` for a Heisenberg
//! sample with spatial index `k` and central index `j`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use heisenfft_core::{CentralAxis, GridFunction, HeisenbergSample, Slice2N, SpatialGrid, C64};

pub const MAGIC: &[u8; 6] = b"HSNF1\n";

#[derive(Debug, thiserror::Error)]
pub enum HsnfError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic: not an HSNF1 file")]
    Magic,
    #[error("invalid header: {0}")]
    Header(#[from] heisenfft_core::Error),
    #[error("header {0} does not fit in memory")]
    TooLarge(&'static str),
    #[error("{0} trailing bytes after the payload")]
    Trailing(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dump {
    Slice(Slice2N),
    Sample(HeisenbergSample),
}

impl Dump {
    fn grid(&self) -> &SpatialGrid {
        match self {
            Dump::Slice(s) => s.grid(),
            Dump::Sample(s) => s.grid(),
        }
    }

    fn values(&self) -> &[C64] {
        match self {
            Dump::Slice(s) => s.values(),
            Dump::Sample(s) => s.values(),
        }
    }
}

pub fn write<W: Write>(out: &mut W, dump: &Dump) -> io::Result<()> {
    let grid = dump.grid();
    let (m, t) = match dump {
        Dump::Slice(_) => (0u32, 0.0),
        Dump::Sample(s) => (s.axis().points() as u32, s.axis().extent()),
    };
    out.write_all(MAGIC)?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&(grid.points() as u32).to_le_bytes())?;
    out.write_all(&grid.extent().to_le_bytes())?;
    out.write_all(&m.to_le_bytes())?;
    out.write_all(&f64::to_le_bytes(t))?;
    for v in dump.values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read<R: Read>(input: &mut R) -> Result<Dump, HsnfError> {
    let mut magic = [0u8; 6];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(HsnfError::Magic);
    }
    let n = read_u32(input)? as usize;
    let points = read_u32(input)? as usize;
    let extent = read_f64(input)?;
    let m = read_u32(input)? as usize;
    let period = read_f64(input)?;
    let grid = SpatialGrid::new(n, extent, points)?;
    let len = grid.len().checked_mul(m.max(1)).ok_or(HsnfError::TooLarge("size"))?;
    let mut bytes = vec![0u8; len.checked_mul(16).ok_or(HsnfError::TooLarge("size"))?];
    input.read_exact(&mut bytes)?;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(HsnfError::Trailing(rest.len()));
    }
    let values: Vec<C64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    if m == 0 {
        Ok(Dump::Slice(Slice2N::new(grid, values)?))
    } else {
        Ok(Dump::Sample(HeisenbergSample::new(grid, CentralAxis::new(period, m)?, values)?))
    }
}

pub fn save(path: &Path, dump: &Dump) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write(&mut out, dump)?;
    out.flush()
}

pub fn load(path: &Path) -> Result<Dump, HsnfError> {
    read(&mut BufReader::new(File::open(path)?))
}

fn read_u32<R: Read>(input: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(input: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
