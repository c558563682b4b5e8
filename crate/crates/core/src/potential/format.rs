//! Little-endian grid files.
//!
//! ```text
//! magic    b"GELFGRID"
//! version  u32 = 1
//! kind     u32 (0 real, 1 complex)
//! n        u32
//! margin   u32   (zero layers next to the faces)
//! width    f64   (half width of the cube)
//! values   n³ samples, row-major, last axis fastest; complex as (re, im)
//! ```

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::Potential;
use crate::geometry::Domain;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"GELFGRID";
const VERSION: u32 = 1;

struct Header {
    kind: u32,
    n: usize,
    half_width: f64,
}

fn write_header(w: &mut impl Write, kind: u32, domain: &Domain, margin: usize) -> Result<()> {
    w.write_all(MAGIC)?;
    for x in [VERSION, kind, domain.n() as u32, margin as u32] {
        w.write_all(&x.to_le_bytes())?;
    }
    w.write_all(&domain.half_width().to_le_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_header(r: &mut impl Read) -> Result<Header> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a grid file".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported grid version {version}")));
    }
    let kind = read_u32(r)?;
    let n = read_u32(r)? as usize;
    let _margin = read_u32(r)?;
    let half_width = read_f64(r)?;
    Ok(Header { kind, n, half_width })
}

pub fn write_potential(w: &Potential, out: &mut impl Write) -> Result<()> {
    write_header(out, 0, w.domain(), w.margin_cells())?;
    for v in w.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_potential(input: &mut impl Read) -> Result<Potential> {
    let h = read_header(input)?;
    if h.kind != 0 {
        return Err(Error::Format("expected a real grid".into()));
    }
    let domain = Arc::new(Domain::new(h.half_width, h.n)?);
    let values = (0..domain.interior_len()).map(|_| read_f64(input)).collect::<Result<Vec<_>>>()?;
    Potential::new(domain, values)
}

pub fn write_complex_grid(domain: &Domain, values: &[Complex64], out: &mut impl Write) -> Result<()> {
    if values.len() != domain.interior_len() {
        return Err(Error::Format("grid length does not match the domain".into()));
    }
    write_header(out, 1, domain, 0)?;
    for v in values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_complex_grid(input: &mut impl Read) -> Result<(Domain, Vec<Complex64>)> {
    let h = read_header(input)?;
    if h.kind != 1 {
        return Err(Error::Format("expected a complex grid".into()));
    }
    let domain = Domain::new(h.half_width, h.n)?;
    let mut values = Vec::with_capacity(domain.interior_len());
    for _ in 0..domain.interior_len() {
        let re = read_f64(input)?;
        values.push(Complex64::new(re, read_f64(input)?));
    }
    Ok((domain, values))
}
