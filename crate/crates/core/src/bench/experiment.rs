//! Generate, initialize, deflate, refine: one run per order `p`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::generators::{gen_cauchy, gen_prescribed, gen_random};
use crate::bench::svd_init::init_svd;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::refiner::{refine, CertKappa, PrecisionSchedule, RefineOptions, RefinementTrace};
use crate::scalar::{MpFloat, Real};
use crate::spectra::{deflate, DeflationResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Random,
    Cauchy,
    /// Size `4n` with `n` triple values and `n` simple ones.
    Prescribed,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Family::Random),
            "cauchy" => Ok(Family::Cauchy),
            "prescribed" => Ok(Family::Prescribed),
            _ => Err(Error::InvalidArgument(format!(
                "family must be random, cauchy or prescribed, got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Matrix size for `random` and `cauchy`; the parameter `n` of the
    /// prescribed family, whose matrices have size `4n`.
    pub n: usize,
    pub orders: Vec<usize>,
    pub base_bits: u32,
    pub iterations: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("size must be at least 1".into()));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::InvalidArgument("orders must be at least 1".into()));
        }
        if self.base_bits < 2 {
            return Err(Error::InvalidArgument("base precision too small".into()));
        }
        Ok(())
    }

    pub fn matrix_size(&self) -> usize {
        match self.family {
            Family::Prescribed => 4 * self.n,
            _ => self.n,
        }
    }

    /// Highest precision any run of this configuration uses.
    pub fn max_bits(&self) -> u32 {
        let p = *self.orders.iter().max().unwrap_or(&1);
        PrecisionSchedule::Geometric { base_bits: self.base_bits }.bits(self.iterations, p, 1 << 24)
    }
}

/// The test matrix at `bits`, and for the prescribed family its spectrum.
pub fn generate(cfg: &ExperimentConfig, bits: u32) -> (Matrix<MpFloat>, Option<Vec<MpFloat>>) {
    match cfg.family {
        Family::Random => (gen_random(cfg.n, cfg.n, bits, cfg.seed), None),
        Family::Cauchy => (gen_cauchy(cfg.n, bits), None),
        Family::Prescribed => {
            let (m, s) = gen_prescribed(cfg.n, bits, cfg.seed);
            (m, Some(s))
        }
    }
}

/// Precision at which the residual of an initial triplet is measured.
pub fn measurement_bits(base_bits: u32) -> u32 {
    (4 * base_bits).max(256)
}

/// Initialize at `base_bits` and deflate for order `p`, measuring residuals
/// against `m` rounded to [`measurement_bits`].
pub fn init_and_deflate(m: &Matrix<MpFloat>, base_bits: u32, p: usize) -> Result<DeflationResult<MpFloat>> {
    let mb = m.with_precision(measurement_bits(base_bits));
    let t0 = init_svd(&mb, base_bits)?;
    deflate(&t0.with_precision(mb.precision()), &mb, p)
}

#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub p: usize,
    /// Deflation index and the kept zero-based indices.
    pub q: usize,
    pub indices: Vec<usize>,
    /// Number of kept values above one.
    pub q_plus: usize,
    pub trace: Option<RefinementTrace<MpFloat>>,
    /// Stage-tagged error, if the run stopped early.
    pub error: Option<String>,
    pub failure: Option<Error>,
}

#[derive(Clone, Debug)]
pub struct ExperimentTable {
    pub config: ExperimentConfig,
    pub runs: Vec<ExperimentRun>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    let (m, _) = generate(cfg, cfg.max_bits().max(measurement_bits(cfg.base_bits)));
    let mut runs = Vec::with_capacity(cfg.orders.len());
    for &p in &cfg.orders {
        let d = match init_and_deflate(&m, cfg.base_bits, p) {
            Ok(d) => d,
            Err(e) => {
                runs.push(ExperimentRun {
                    p,
                    q: 0,
                    indices: Vec::new(),
                    q_plus: 0,
                    trace: None,
                    error: Some(format!("deflate: {e}")),
                    failure: Some(e),
                });
                continue;
            }
        };
        let one = MpFloat::from_i64_at(1, 64);
        let q_plus = d.triplet.spectrum().iter().filter(|s| **s > one).count();
        let mut opts = RefineOptions::new(p, cfg.base_bits, cfg.iterations);
        opts.kappa = CertKappa::PairTerms;
        let t0 = d.triplet.with_precision(cfg.base_bits);
        let (trace, error, failure) = match refine(&m, &t0, &opts) {
            Ok(out) => (Some(out.trace), None, None),
            Err(e) => (Some(e.trace), Some(format!("refine: {}", e.error)), Some(e.error)),
        };
        runs.push(ExperimentRun {
            p,
            q: d.q(),
            indices: d.indices,
            q_plus,
            trace,
            error,
            failure,
        });
    }
    Ok(ExperimentTable { config: cfg.clone(), runs })
}

impl ExperimentTable {
    /// `e_i` by iteration (rows) and order (columns).
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            writeln!(s, "p = {}: deflation index q = {} (q+ = {})", r.p, r.q, r.q_plus).unwrap();
            if let Some(e) = &r.error {
                writeln!(s, "p = {}: {e}", r.p).unwrap();
            }
        }
        write!(s, "{:>18}", "Iterations/Order").unwrap();
        for r in &self.runs {
            write!(s, " {:>8}", r.p + 1).unwrap();
        }
        s.push('\n');
        for i in 0..=self.config.iterations {
            write!(s, "{i:>18}").unwrap();
            for r in &self.runs {
                let cell = r
                    .trace
                    .as_ref()
                    .and_then(|t| t.records.get(i))
                    .map_or_else(|| "-".to_string(), |rec| rec.e.map_or("inf".into(), |e| e.to_string()));
                write!(s, " {cell:>8}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(crate::refiner::CSV_HEADER);
        s.push('\n');
        for r in &self.runs {
            if let Some(t) = &r.trace {
                for line in t.to_csv().lines().skip(1) {
                    s.push_str(line);
                    s.push('\n');
                }
            }
        }
        s
    }
}
