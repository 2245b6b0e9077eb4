//! Little-endian binary dumps.
//!
//! Field (version 1): `"WNLW"`, `u32` version, `u32 N`, `u32 M`, then one
//! `(re, im)` pair of `f64` per mode in lexicographic order.
//!
//! Series (version 2): the same header followed by `u32` record count and
//! `u32` fields per record; each record is `u32` time index, `f64` time and
//! that many coefficient blocks.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::SpectralField;
use super::lattice::FrequencyBox;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"WNLW";
pub const FIELD_VERSION: u32 = 1;
pub const SERIES_VERSION: u32 = 2;

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn put_header(w: &mut impl Write, version: u32, bx: FrequencyBox) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, version)?;
    put_u32(w, bx.cutoff())?;
    put_u32(w, bx.grid() as u32)
}

fn get_header(r: &mut impl Read, version: u32) -> Result<FrequencyBox> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let v = get_u32(r)?;
    if v != version {
        return Err(Error::Format(format!("expected version {version}, found {v}")));
    }
    let n = get_u32(r)?;
    let m = get_u32(r)? as usize;
    FrequencyBox::with_grid(n, m).map_err(|e| Error::Format(e.to_string()))
}

fn put_coeffs(w: &mut impl Write, f: &SpectralField) -> Result<()> {
    let mut buf = Vec::with_capacity(16 * f.coefficients().len());
    for c in f.coefficients() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_coeffs(r: &mut impl Read, bx: FrequencyBox) -> Result<SpectralField> {
    let len = bx.len();
    let mut coeffs = Vec::with_capacity(len);
    for _ in 0..len {
        let re = get_f64(r)?;
        let im = get_f64(r)?;
        coeffs.push(Complex64::new(re, im));
    }
    SpectralField::from_coefficients(bx, coeffs)
}

pub fn write_field(w: &mut impl Write, f: &SpectralField) -> Result<()> {
    put_header(w, FIELD_VERSION, f.frequency_box())?;
    put_coeffs(w, f)
}

pub fn read_field(r: &mut impl Read) -> Result<SpectralField> {
    let bx = get_header(r, FIELD_VERSION)?;
    get_coeffs(r, bx)
}

/// One time slice of a series dump.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRecord {
    pub index: u32,
    pub time: f64,
    pub fields: Vec<SpectralField>,
}

/// Write records whose fields all live on `bx`.
pub fn write_series(w: &mut impl Write, bx: FrequencyBox, records: &[SeriesRecord]) -> Result<()> {
    let per = records.first().map_or(0, |r| r.fields.len());
    put_header(w, SERIES_VERSION, bx)?;
    put_u32(w, records.len() as u32)?;
    put_u32(w, per as u32)?;
    for rec in records {
        if rec.fields.len() != per {
            return Err(Error::Format("records differ in field count".into()));
        }
        put_u32(w, rec.index)?;
        w.write_all(&rec.time.to_le_bytes())?;
        for f in &rec.fields {
            if f.frequency_box() != bx {
                return Err(Error::BoxMismatch {
                    left: bx.cutoff(),
                    right: f.cutoff(),
                });
            }
            put_coeffs(w, f)?;
        }
    }
    Ok(())
}

pub fn read_series(r: &mut impl Read) -> Result<(FrequencyBox, Vec<SeriesRecord>)> {
    let bx = get_header(r, SERIES_VERSION)?;
    let count = get_u32(r)?;
    let per = get_u32(r)?;
    let mut records = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let index = get_u32(r)?;
        let time = get_f64(r)?;
        let fields = (0..per).map(|_| get_coeffs(r, bx)).collect::<Result<Vec<_>>>()?;
        records.push(SeriesRecord { index, time, fields });
    }
    Ok((bx, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip() {
        let bx = FrequencyBox::new(3);
        let f = SpectralField::from_fn(bx, |n| Complex64::new(n[0] as f64 + 0.5, n[1] as f64));
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[..4], b"WNLW");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 3);
        assert_eq!(buf.len(), 16 + 16 * bx.len());
        let g = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn series_round_trip_and_bad_magic() {
        let bx = FrequencyBox::new(1);
        let a = SpectralField::cosine(bx, [1, 0, 0], 2.0).unwrap();
        let recs = vec![
            SeriesRecord { index: 0, time: 0.0, fields: vec![a.clone(), a.scaled(0.5)] },
            SeriesRecord { index: 4, time: 0.25, fields: vec![a.scaled(-1.0), a.clone()] },
        ];
        let mut buf = Vec::new();
        write_series(&mut buf, bx, &recs).unwrap();
        let (b, back) = read_series(&mut buf.as_slice()).unwrap();
        assert_eq!(b, bx);
        assert_eq!(back, recs);
        buf[0] = b'X';
        assert!(matches!(read_series(&mut buf.as_slice()), Err(Error::Format(_))));
    }
}
