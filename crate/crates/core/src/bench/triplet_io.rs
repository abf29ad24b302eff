//! A triplet on disk: `U.mtx`, `V.mtx`, `Sigma.txt` (one value per line)
//! and `manifest.json`. A `Sigma` with off-diagonal block entries is also
//! written in full to `Sigma.mtx`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mmio::{load_matrix_market, save_matrix_market};
use crate::scalar::{decimal_digits, Real};
use crate::triplet::{Mode, SvdTriplet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub q: usize,
    pub precision: u32,
    /// `regular` or `cluster:q1,q2,...`.
    pub mode: String,
    #[serde(default)]
    pub dense_sigma: bool,
}

fn is_diagonal<T: Real>(s: &Matrix<T>) -> bool {
    (0..s.rows()).all(|i| (0..s.cols()).all(|j| i == j || s[(i, j)].is_zero()))
        && (0..s.rows().min(s.cols())).all(|i| s[(i, i)].im.is_zero())
}

pub fn save_triplet<T: Real>(t: &SvdTriplet<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (m, l, n, q) = t.dims();
    let dense = !is_diagonal(&t.sigma);
    let manifest = Manifest {
        m,
        l,
        n,
        q,
        precision: t.precision(),
        mode: t.mode.to_spec(),
        dense_sigma: dense,
    };
    save_matrix_market(&t.u, dir.join("U.mtx"))?;
    save_matrix_market(&t.v, dir.join("V.mtx"))?;
    let digits = decimal_digits(t.precision());
    let mut text = String::new();
    for s in t.spectrum() {
        text.push_str(&s.to_decimal(digits));
        text.push('\n');
    }
    fs::write(dir.join("Sigma.txt"), text)?;
    if dense {
        save_matrix_market(&t.sigma, dir.join("Sigma.mtx"))?;
    }
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(())
}

/// Load at the manifest's precision, or at `bits` when given.
pub fn load_triplet<T: Real>(dir: impl AsRef<Path>, bits: Option<u32>) -> Result<SvdTriplet<T>> {
    let dir = dir.as_ref();
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)
        .map_err(|e| Error::Parse(format!("manifest.json: {e}")))?;
    let bits = bits.unwrap_or(manifest.precision);
    let u: Matrix<T> = load_matrix_market(dir.join("U.mtx"), bits)?;
    let v: Matrix<T> = load_matrix_market(dir.join("V.mtx"), bits)?;
    if u.shape() != (manifest.m, manifest.l) || v.shape() != (manifest.n, manifest.q) {
        return Err(Error::Parse("factor shapes disagree with manifest.json".into()));
    }
    let mode = Mode::parse(&manifest.mode)?;
    let sigma = if manifest.dense_sigma {
        load_matrix_market(dir.join("Sigma.mtx"), bits)?
    } else {
        let text = fs::read_to_string(dir.join("Sigma.txt"))?;
        let vals = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| T::parse_decimal(l, bits).map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<T>>>()?;
        if vals.len() != manifest.q {
            return Err(Error::Parse(format!(
                "Sigma.txt has {} values, manifest says q = {}",
                vals.len(),
                manifest.q
            )));
        }
        Matrix::from_real_diag(&vals, manifest.l, manifest.q).with_precision(bits)
    };
    SvdTriplet::from_parts(u, v, sigma, mode)
}
