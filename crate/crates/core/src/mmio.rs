//! Matrix Market I/O for dense matrices.
//!
//! Writing always uses the `array` layout (column-major). Reading accepts
//! `array` and `coordinate` layouts with `real`, `integer` or `complex`
//! fields and `general` symmetry.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{decimal_digits, Real};

pub fn write_matrix_market<T: Real, W: Write>(m: &Matrix<T>, mut w: W) -> Result<()> {
    let complex = !m.is_real();
    let field = if complex { "complex" } else { "real" };
    let digits = decimal_digits(m.precision());
    writeln!(w, "%%MatrixMarket matrix array {field} general")?;
    writeln!(w, "% precision {}", m.precision())?;
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let z = &m[(i, j)];
            if complex {
                writeln!(w, "{} {}", z.re.to_decimal(digits), z.im.to_decimal(digits))?;
            } else {
                writeln!(w, "{}", z.re.to_decimal(digits))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix_market<T: Real>(m: &Matrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market(m, BufWriter::new(File::create(path)?))
}

/// Parse at `bits` precision.
pub fn read_matrix_market<T: Real, R: BufRead>(r: R, bits: u32) -> Result<Matrix<T>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("bad Matrix Market header {header:?}")));
    }
    let coordinate = match fields[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(Error::Parse(format!("unsupported layout {other:?}"))),
    };
    let complex = match fields[3].as_str() {
        "real" | "integer" => false,
        "complex" => true,
        other => return Err(Error::Parse(format!("unsupported field {other:?}"))),
    };
    if fields[4] != "general" {
        return Err(Error::Parse(format!("unsupported symmetry {:?}", fields[4])));
    }

    let mut body = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        body.push(line);
    }
    let mut it = body.iter();
    let size = it.next().ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad size line {size:?}"))))
        .collect::<Result<_>>()?;
    let (rows, cols) = match (coordinate, dims.as_slice()) {
        (false, [r, c]) | (true, [r, c, _]) => (*r, *c),
        _ => return Err(Error::Parse(format!("bad size line {size:?}"))),
    };
    let num = |s: &str| T::parse_decimal(s, bits).map_err(|e| Error::Parse(e.to_string()));
    let entry = |toks: &[&str]| -> Result<Complex<T>> {
        Ok(if complex {
            Complex::new(num(toks[0])?, num(toks[1])?)
        } else {
            Complex::from_real(num(toks[0])?)
        })
    };
    let width = if complex { 2 } else { 1 };

    let mut m = Matrix::zeros(rows, cols, bits);
    if coordinate {
        for line in it {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 + width {
                return Err(Error::Parse(format!("bad entry line {line:?}")));
            }
            let idx = |s: &str, n: usize| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(k) if (1..=n).contains(&k) => Ok(k - 1),
                    _ => Err(Error::Parse(format!("index out of range in {line:?}"))),
                }
            };
            let (i, j) = (idx(toks[0], rows)?, idx(toks[1], cols)?);
            m[(i, j)] = entry(&toks[2..])?;
        }
    } else {
        let mut count = 0;
        for line in it {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != width {
                return Err(Error::Parse(format!("bad entry line {line:?}")));
            }
            if count >= rows * cols {
                return Err(Error::Parse("too many entries".into()));
            }
            m[(count % rows, count / rows)] = entry(&toks)?;
            count += 1;
        }
        if count != rows * cols {
            return Err(Error::Parse(format!("expected {} entries, found {count}", rows * cols)));
        }
    }
    Ok(m)
}

pub fn load_matrix_market<T: Real>(path: impl AsRef<Path>, bits: u32) -> Result<Matrix<T>> {
    read_matrix_market(BufReader::new(File::open(path)?), bits)
}
