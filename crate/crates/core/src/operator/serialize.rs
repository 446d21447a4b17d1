//! Dense matrix interchange: a column-major binary blob and a JSON form.
//!
//! Binary layout (little endian): `b"MULB"`, version `u32`, rows `u32`,
//! cols `u32`, then `rows·cols` pairs of `f64` (re, im) in column-major order.

use std::io::{Read, Write};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;

pub const MAGIC: &[u8; 4] = b"MULB";
pub const VERSION: u32 = 1;

pub fn write_binary(m: &CMat, mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m.nrows() as u32).to_le_bytes())?;
    w.write_all(&(m.ncols() as u32).to_le_bytes())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<CMat> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes(head[k..k + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    let mut buf = vec![0u8; rows * cols * 16];
    r.read_exact(&mut buf)?;
    let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().unwrap());
    Ok(Mat::from_fn(rows, cols, |i, j| {
        let k = 2 * (j * rows + i);
        c64::new(f(k), f(k + 1))
    }))
}

/// JSON form: column-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMat> for DenseJson {
    fn from(m: &CMat) -> Self {
        let mut re = Vec::with_capacity(m.nrows() * m.ncols());
        let mut im = Vec::with_capacity(m.nrows() * m.ncols());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), re, im }
    }
}

impl DenseJson {
    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.rows * self.cols;
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::Dimension { expected: n, found: self.re.len().min(self.im.len()) });
        }
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| {
            let k = j * self.rows + i;
            c64::new(self.re[k], self.im[k])
        }))
    }
}

pub fn to_json(m: &CMat) -> Result<String> {
    serde_json::to_string(&DenseJson::from(m)).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json(s: &str) -> Result<CMat> {
    let d: DenseJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    d.to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMat {
        Mat::from_fn(3, 2, |i, j| c64::new(i as f64 + 0.5, j as f64 - 1.25))
    }

    #[test]
    fn binary_round_trip() {
        let m = sample();
        let mut buf = Vec::new();
        write_binary(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 6 * 16);
        assert_eq!(&buf[..4], b"MULB");
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        assert_eq!(from_json(&to_json(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn corrupt_magic() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        buf[0] = b'X';
        assert!(matches!(read_binary(&buf[..]), Err(Error::Format(_))));
    }
}
