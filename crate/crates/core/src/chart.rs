//! Coordinate charts and reproducible interior sampling.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::expr::RESERVED;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("chart dimension must be odd and at least 3, got {0}")]
    BadDimension(usize),
    #[error("{coords} coordinates but {intervals} domain intervals")]
    LengthMismatch { coords: usize, intervals: usize },
    #[error("empty domain interval for `{0}`")]
    EmptyInterval(String),
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("coordinate name `{0}` is reserved or not an identifier")]
    InvalidName(String),
    #[error("sample count must be positive")]
    EmptyPlan,
    #[error("margin must lie in [0, 0.5), got {0}")]
    BadMargin(f64),
}

/// A single chart `(coords, box domain)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    /// Chart of a `2n+1`-dimensional manifold.
    pub fn new(coords: Vec<String>, domain: Vec<(f64, f64)>) -> Result<Chart, ChartError> {
        let n = coords.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(ChartError::BadDimension(n));
        }
        Chart::base(coords, domain)
    }

    /// Chart of any positive dimension (product factors).
    pub fn base(coords: Vec<String>, domain: Vec<(f64, f64)>) -> Result<Chart, ChartError> {
        if coords.is_empty() {
            return Err(ChartError::BadDimension(0));
        }
        if coords.len() != domain.len() {
            return Err(ChartError::LengthMismatch {
                coords: coords.len(),
                intervals: domain.len(),
            });
        }
        for (i, c) in coords.iter().enumerate() {
            let ident = c.chars().next().is_some_and(|h| h.is_ascii_alphabetic() || h == '_')
                && c.chars().all(|h| h.is_ascii_alphanumeric() || h == '_');
            if !ident || RESERVED.contains(&c.as_str()) {
                return Err(ChartError::InvalidName(c.clone()));
            }
            if coords[..i].contains(c) {
                return Err(ChartError::DuplicateCoordinate(c.clone()));
            }
            let (lo, hi) = domain[i];
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ChartError::EmptyInterval(c.clone()));
            }
        }
        Ok(Chart { coords, domain })
    }

    /// Convenience constructor with a common interval for every coordinate.
    pub fn cube(names: &[&str], lo: f64, hi: f64) -> Result<Chart, ChartError> {
        Chart::new(
            names.iter().map(|s| s.to_string()).collect(),
            alloc::vec![(lo, hi); names.len()],
        )
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// `n` in `dim = 2n + 1`.
    pub fn half_rank(&self) -> usize {
        self.dim() / 2
    }

    /// Appends a coordinate (used by product constructions).
    pub fn extended(&self, name: &str, interval: (f64, f64)) -> Result<Chart, ChartError> {
        let mut coords = self.coords.clone();
        let mut domain = self.domain.clone();
        coords.push(name.to_string());
        domain.push(interval);
        Chart::new(coords, domain)
    }
}

/// Number of random vector tuples drawn per sample point.
pub const TUPLES_PER_POINT: usize = 5;
const MAX_SLOTS: u64 = 4;

const POINT_STREAM: u64 = 0;
const VECTOR_STREAM: u64 = 1;

/// How residual checks sample the chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
    pub margin: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            count: 100,
            seed: 42,
            margin: 0.05,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based draw in `[0, 1)`: element `index` of stream `stream`.
fn unit(seed: u64, stream: u64, index: u64) -> f64 {
    let key = splitmix(seed ^ splitmix(stream.wrapping_add(0xD1B5_4A32_D192_ED03)));
    let bits = splitmix(key.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl SamplePlan {
    pub fn new(count: usize, seed: u64, margin: f64) -> Result<SamplePlan, ChartError> {
        let plan = SamplePlan { count, seed, margin };
        plan.check()?;
        Ok(plan)
    }

    fn check(&self) -> Result<(), ChartError> {
        if self.count == 0 {
            return Err(ChartError::EmptyPlan);
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(ChartError::BadMargin(self.margin));
        }
        Ok(())
    }

    /// Point `index` of the plan. Points are independent of one another, so
    /// any subset can be generated in any order.
    pub fn point(&self, chart: &Chart, index: usize) -> Vec<f64> {
        let dim = chart.dim();
        chart
            .domain()
            .iter()
            .enumerate()
            .map(|(j, &(lo, hi))| {
                let width = hi - lo;
                let a = lo + self.margin * width;
                let b = hi - self.margin * width;
                let u = unit(self.seed, POINT_STREAM, (index * dim + j) as u64);
                a + u * (b - a)
            })
            .collect()
    }

    /// Random test vector with components in `[-1, 1]` for
    /// (`point`, `tuple`, `slot`).
    pub fn test_vector(&self, dim: usize, point: usize, tuple: usize, slot: usize) -> Vec<f64> {
        let base = ((point * TUPLES_PER_POINT + tuple) as u64 * MAX_SLOTS + slot as u64) * dim as u64;
        (0..dim)
            .map(|j| 2.0 * unit(self.seed, VECTOR_STREAM, base + j as u64) - 1.0)
            .collect()
    }
}

/// Runs an indexed map over sample indices. Results come back in index
/// order whatever the execution strategy, so reductions stay deterministic.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// In-thread execution.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// All points of `plan` on `chart`.
pub fn sample(chart: &Chart, plan: &SamplePlan) -> Result<Vec<Vec<f64>>, ChartError> {
    plan.check()?;
    Ok((0..plan.count).map(|i| plan.point(chart, i)).collect())
}
