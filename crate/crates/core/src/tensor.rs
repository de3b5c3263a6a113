//! Dense tensor values and expression-valued tensor fields.
//!
//! Components are stored row-major over the slots, contravariant slots
//! first. A `(1,1)` tensor is therefore the matrix `t[i][j] = t^i_j` with
//! the upper index selecting the row.

use alloc::vec::Vec;

use crate::chart::Chart;
use crate::dual::{Dual, Scalar};
use crate::expr::{EvalError, ParseError, ScalarExpr};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Valence {
    pub contra: usize,
    pub co: usize,
}

impl Valence {
    pub const SCALAR: Valence = Valence { contra: 0, co: 0 };
    pub const VECTOR: Valence = Valence { contra: 1, co: 0 };
    pub const COVECTOR: Valence = Valence { contra: 0, co: 1 };
    pub const ENDOMORPHISM: Valence = Valence { contra: 1, co: 1 };
    pub const BILINEAR: Valence = Valence { contra: 0, co: 2 };

    pub fn new(contra: usize, co: usize) -> Valence {
        Valence { contra, co }
    }

    pub fn rank(&self) -> usize {
        self.contra + self.co
    }

    pub fn len(&self, dim: usize) -> usize {
        dim.pow(self.rank() as u32)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("slots cannot be contracted: one must be contravariant and the other covariant")]
    SlotMismatch,
    #[error("slot {slot} out of range for valence ({contra},{co})")]
    SlotOutOfRange { slot: usize, contra: usize, co: usize },
    #[error("metric is singular or not positive definite")]
    SingularMetric,
    #[error("operator is singular")]
    SingularOperator,
    #[error("expected {expected} components, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("unsupported valence ({0},{1})")]
    UnsupportedValence(usize, usize),
    #[error("2-form is not antisymmetric")]
    NotAntisymmetric,
    #[error("non-finite component")]
    NonFinite,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Pointwise tensor of valence `(contra, co)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue {
    valence: Valence,
    dim: usize,
    data: Vec<f64>,
}

fn index_of(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, i| acc * dim + i)
}

fn multi_index(mut flat: usize, rank: usize, dim: usize) -> Vec<usize> {
    let mut idx = alloc::vec![0; rank];
    for s in (0..rank).rev() {
        idx[s] = flat % dim;
        flat /= dim;
    }
    idx
}

impl TensorValue {
    pub fn new(valence: Valence, dim: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        let expected = valence.len(dim);
        if data.len() != expected {
            return Err(TensorError::ShapeMismatch {
                expected,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        Ok(TensorValue { valence, dim, data })
    }

    pub fn vector(v: Vec<f64>) -> Self {
        let dim = v.len();
        TensorValue {
            valence: Valence::VECTOR,
            dim,
            data: v,
        }
    }

    pub fn covector(v: Vec<f64>) -> Self {
        let dim = v.len();
        TensorValue {
            valence: Valence::COVECTOR,
            dim,
            data: v,
        }
    }

    pub fn kronecker(dim: usize) -> Self {
        TensorValue {
            valence: Valence::ENDOMORPHISM,
            dim,
            data: linalg::identity(dim),
        }
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[index_of(idx, self.dim)]
    }

    pub fn sup_norm(&self) -> f64 {
        linalg::sup(&self.data)
    }

    fn is_contra(&self, slot: usize) -> Result<bool, TensorError> {
        if slot >= self.valence.rank() {
            return Err(TensorError::SlotOutOfRange {
                slot,
                contra: self.valence.contra,
                co: self.valence.co,
            });
        }
        Ok(slot < self.valence.contra)
    }
}

/// Contracts slot `slot_a` of `a` with slot `slot_b` of `b`. Result slots:
/// remaining contravariant slots of `a` then `b`, then remaining covariant
/// slots of `a` then `b`.
pub fn contract(a: &TensorValue, slot_a: usize, b: &TensorValue, slot_b: usize) -> Result<TensorValue, TensorError> {
    if a.is_contra(slot_a)? == b.is_contra(slot_b)? || a.dim != b.dim {
        return Err(TensorError::SlotMismatch);
    }
    let dim = a.dim;
    let keep_a: Vec<usize> = (0..a.valence.rank()).filter(|&s| s != slot_a).collect();
    let keep_b: Vec<usize> = (0..b.valence.rank()).filter(|&s| s != slot_b).collect();
    let contra_a: Vec<usize> = keep_a.iter().copied().filter(|&s| s < a.valence.contra).collect();
    let co_a: Vec<usize> = keep_a.iter().copied().filter(|&s| s >= a.valence.contra).collect();
    let contra_b: Vec<usize> = keep_b.iter().copied().filter(|&s| s < b.valence.contra).collect();
    let co_b: Vec<usize> = keep_b.iter().copied().filter(|&s| s >= b.valence.contra).collect();
    let valence = Valence::new(contra_a.len() + contra_b.len(), co_a.len() + co_b.len());
    let rank = valence.rank();
    let mut data = alloc::vec![0.0; valence.len(dim)];
    let mut ia = alloc::vec![0; a.valence.rank()];
    let mut ib = alloc::vec![0; b.valence.rank()];
    for (flat, out) in data.iter_mut().enumerate() {
        let idx = multi_index(flat, rank, dim);
        let mut it = idx.iter();
        for &s in &contra_a {
            ia[s] = *it.next().unwrap();
        }
        for &s in &contra_b {
            ib[s] = *it.next().unwrap();
        }
        for &s in &co_a {
            ia[s] = *it.next().unwrap();
        }
        for &s in &co_b {
            ib[s] = *it.next().unwrap();
        }
        let mut acc = 0.0;
        for k in 0..dim {
            ia[slot_a] = k;
            ib[slot_b] = k;
            acc += a.get(&ia) * b.get(&ib);
        }
        *out = acc;
    }
    TensorValue::new(valence, dim, data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Music {
    /// Contravariant slot becomes the first covariant slot (`g` applied).
    Lower,
    /// Covariant slot becomes the last contravariant slot (`g^{-1}` applied).
    Raise,
}

/// Raises or lowers one slot of `t` with the metric value `g_at_p`.
pub fn music(g_at_p: &TensorValue, t: &TensorValue, slot: usize, direction: Music) -> Result<TensorValue, TensorError> {
    let dim = t.dim;
    if g_at_p.valence != Valence::BILINEAR || g_at_p.dim != dim {
        return Err(TensorError::SingularMetric);
    }
    if !linalg::is_positive_definite(&g_at_p.data, dim) {
        return Err(TensorError::SingularMetric);
    }
    let contra = t.is_contra(slot)?;
    let (r, s) = (t.valence.contra, t.valence.co);
    let (factor, valence) = match direction {
        Music::Lower if contra => (g_at_p.data.clone(), Valence::new(r - 1, s + 1)),
        Music::Raise if !contra => (
            linalg::inverse(&g_at_p.data, dim).ok_or(TensorError::SingularMetric)?,
            Valence::new(r + 1, s - 1),
        ),
        _ => return Err(TensorError::SlotMismatch),
    };
    // position of the moved slot in the output ordering
    let target = match direction {
        Music::Lower => r - 1,
        Music::Raise => r,
    };
    let rank = valence.rank();
    let mut data = alloc::vec![0.0; valence.len(dim)];
    for (flat, out) in data.iter_mut().enumerate() {
        let idx = multi_index(flat, rank, dim);
        let moved = idx[target];
        let mut rest: Vec<usize> = idx.clone();
        rest.remove(target);
        let mut acc = 0.0;
        for k in 0..dim {
            let mut src = rest.clone();
            src.insert(slot, k);
            acc += factor[moved * dim + k] * t.get(&src);
        }
        *out = acc;
    }
    TensorValue::new(valence, dim, data)
}

/// `X - eta(X) xi`, the projection onto `ker eta` along `xi`.
pub fn project_d(v: &[f64], xi: &[f64], eta: &[f64]) -> Vec<f64> {
    let e = linalg::dot(eta, v);
    v.iter().zip(xi).map(|(a, b)| a - e * b).collect()
}

/// Expression-valued tensor field on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    valence: Valence,
    chart: Chart,
    components: Vec<ScalarExpr>,
}

impl TensorField {
    pub fn new(chart: &Chart, valence: Valence, components: Vec<ScalarExpr>) -> Result<Self, TensorError> {
        let expected = valence.len(chart.dim());
        if components.len() != expected {
            return Err(TensorError::ShapeMismatch {
                expected,
                got: components.len(),
            });
        }
        if let Some(c) = components.iter().find(|c| c.arity() != chart.dim()) {
            return Err(TensorError::ShapeMismatch {
                expected: chart.dim(),
                got: c.arity(),
            });
        }
        Ok(TensorField {
            valence,
            chart: chart.clone(),
            components,
        })
    }

    /// Parses row-major component sources.
    pub fn parse(chart: &Chart, valence: Valence, sources: &[impl AsRef<str>]) -> Result<Self, TensorError> {
        let components = sources
            .iter()
            .map(|s| ScalarExpr::parse(s.as_ref(), chart.coords()))
            .collect::<Result<Vec<_>, _>>()?;
        TensorField::new(chart, valence, components)
    }

    pub fn constant(chart: &Chart, valence: Valence, values: &[f64]) -> Result<Self, TensorError> {
        let n = chart.dim();
        TensorField::new(
            chart,
            valence,
            values.iter().map(|v| ScalarExpr::constant(*v, n)).collect(),
        )
    }

    pub fn identity(chart: &Chart) -> Self {
        TensorField::constant(chart, Valence::ENDOMORPHISM, &linalg::identity(chart.dim()))
            .expect("shape is consistent")
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn evaluate(&self, p: &[f64]) -> Result<TensorValue, TensorError> {
        let data = self.eval_generic(p)?;
        TensorValue::new(self.valence, self.dim(), data)
    }

    /// Components with exact first partials at `p`.
    pub fn evaluate_jet(&self, p: &[f64]) -> Result<Vec<Dual<f64>>, TensorError> {
        let seeded = Dual::seed(p);
        self.eval_generic(&seeded)
    }

    pub fn eval_generic<S: Scalar>(&self, p: &[S]) -> Result<Vec<S>, TensorError> {
        Ok(self
            .components
            .iter()
            .map(|c| c.eval_generic(p))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// Row-major component sources.
    pub fn sources(&self) -> Vec<alloc::string::String> {
        self.components
            .iter()
            .map(|c| c.to_source(self.chart.coords()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn chart() -> Chart {
        Chart::cube(&["x", "y", "z"], -1.0, 1.0).unwrap()
    }

    #[test]
    fn identity_field_is_kronecker() {
        let id = TensorField::identity(&chart());
        assert_eq!(id.evaluate(&[0.3, 0.1, -0.2]).unwrap(), TensorValue::kronecker(3));
    }

    #[test]
    fn eta_of_sasakian_chart() {
        let eta = TensorField::parse(&chart(), Valence::COVECTOR, &["-y/2", "0", "1/2"]).unwrap();
        assert_eq!(eta.evaluate(&[0.0, 2.0, 0.0]).unwrap().data(), &[-1.0, 0.0, 0.5]);
    }

    #[test]
    fn delta_contracted_with_vector() {
        let v = TensorValue::vector(vec![1.0, -2.0, 3.0]);
        let r = contract(&TensorValue::kronecker(3), 1, &v, 0).unwrap();
        assert_eq!(r, v);
        assert_eq!(contract(&v, 0, &v, 0), Err(TensorError::SlotMismatch));
    }

    #[test]
    fn raise_lower_round_trip() {
        let g = TensorValue::new(Valence::BILINEAR, 3, linalg::identity(3)).unwrap();
        let w = TensorValue::covector(vec![0.5, 1.0, -1.0]);
        let up = music(&g, &w, 0, Music::Raise).unwrap();
        let down = music(&g, &up, 0, Music::Lower).unwrap();
        assert_eq!(down, w);
    }

    #[test]
    fn raise_second_slot_with_nondiagonal_metric() {
        let gm = [2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0];
        let g = TensorValue::new(Valence::BILINEAR, 3, gm.to_vec()).unwrap();
        let w = [0.0, 0.25, -0.5, -0.25, 0.0, 0.1, 0.5, -0.1, 0.0];
        let t = TensorValue::new(Valence::BILINEAR, 3, w.to_vec()).unwrap();
        let r = music(&g, &t, 1, Music::Raise).unwrap();
        // oracle: explicit cofactor inverse
        let det = gm[0] * (gm[4] * gm[8] - gm[5] * gm[7]) - gm[1] * (gm[3] * gm[8] - gm[5] * gm[6])
            + gm[2] * (gm[3] * gm[7] - gm[4] * gm[6]);
        let cof = |r: usize, c: usize| {
            let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
            let cols: Vec<usize> = (0..3).filter(|&i| i != c).collect();
            let m = |i: usize, j: usize| gm[rows[i] * 3 + cols[j]];
            let s = if (r + c).is_multiple_of(2) { 1.0 } else { -1.0 };
            s * (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0))
        };
        let inv = |i: usize, j: usize| cof(j, i) / det;
        for k in 0..3 {
            for i in 0..3 {
                let expect: f64 = (0..3).map(|j| inv(k, j) * w[i * 3 + j]).sum();
                assert!((r.get(&[k, i]) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projection() {
        let xi = [0.0, 0.0, 1.0];
        let eta = [0.0, 0.0, 1.0];
        assert_eq!(project_d(&[1.0, 1.0, 1.0], &xi, &eta), vec![1.0, 1.0, 0.0]);
        assert_eq!(project_d(&xi, &xi, &eta), vec![0.0, 0.0, 0.0]);
        assert_eq!(project_d(&[1.0, 2.0, 0.0], &xi, &eta), vec![1.0, 2.0, 0.0]);
    }

    #[test]
    fn music_rejects_bad_metric() {
        let g = TensorValue::new(Valence::BILINEAR, 2, vec![1.0, 0.0, 0.0, -1.0]).unwrap();
        let w = TensorValue::covector(vec![1.0, 1.0]);
        assert_eq!(music(&g, &w, 0, Music::Raise), Err(TensorError::SingularMetric));
    }
}
