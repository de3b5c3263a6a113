//! Connection, brackets and Lie/exterior derivatives at a point.
//!
//! First partials come from evaluating component expressions over
//! [`Dual`] numbers. Where a second derivative is required (the derivative
//! of `d eta`, `d(d omega)`) the same routines run one level up, over
//! `Dual<Dual<f64>>`.
//!
//! Pointwise vector arguments are extended to constant-coefficient fields
//! unless a jet (value plus first partials) is supplied explicitly.

use alloc::vec::Vec;

use crate::dual::{Dual, Scalar};
use crate::linalg;
use crate::tensor::{TensorError, TensorField, TensorValue, Valence};

/// Component values with first partials: `jet[c].partial(l) = d_l c`.
pub type Jet = Dual<f64>;

/// Antisymmetry tolerance (relative to the largest entry) for 2-forms.
const ANTISYMMETRY_TOL: f64 = 1e-10;

/// Levi-Civita connection symbols at a point, `gamma[k*n*n + i*n + j] =
/// Gamma^k_{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    dim: usize,
    gamma: Vec<f64>,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbol(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.dim + i) * self.dim + j]
    }

    pub fn symbols(&self) -> &[f64] {
        &self.gamma
    }

    /// `nabla_X Y` for a vector-field jet `y` and direction `x`.
    pub fn covariant(&self, x: &[f64], y: &[Jet]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += x[i] * y[k].partial(i);
                    for j in 0..n {
                        acc += self.symbol(k, i, j) * x[i] * y[j].value;
                    }
                }
                acc
            })
            .collect()
    }
}

/// Christoffel symbols from the metric value, its inverse and its jets.
pub fn connection_from_jets(g: &[Jet], ginv: &[f64], dim: usize) -> Connection {
    let n = dim;
    let dg = |i: usize, j: usize, l: usize| g[i * n + j].partial(l);
    let mut gamma = alloc::vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[k * n + l] * (dg(j, l, i) + dg(i, l, j) - dg(i, j, l));
                }
                gamma[(k * n + i) * n + j] = 0.5 * acc;
                gamma[(k * n + j) * n + i] = 0.5 * acc;
            }
        }
    }
    Connection { dim: n, gamma }
}

fn metric_inverse(g: &[f64], n: usize) -> Result<Vec<f64>, TensorError> {
    if !linalg::is_positive_definite(g, n) {
        return Err(TensorError::SingularMetric);
    }
    linalg::inverse(g, n).ok_or(TensorError::SingularMetric)
}

pub fn christoffel(g: &TensorField, p: &[f64]) -> Result<Connection, TensorError> {
    expect_valence(g, Valence::BILINEAR)?;
    let jets = g.evaluate_jet(p)?;
    let values: Vec<f64> = jets.iter().map(|j| j.value).collect();
    let ginv = metric_inverse(&values, g.dim())?;
    Ok(connection_from_jets(&jets, &ginv, g.dim()))
}

fn expect_valence(t: &TensorField, v: Valence) -> Result<(), TensorError> {
    if t.valence() != v {
        return Err(TensorError::UnsupportedValence(t.valence().contra, t.valence().co));
    }
    Ok(())
}

/// `nabla t` with the direction as the last covariant slot.
pub fn covariant_derivative(t: &TensorField, g: &TensorField, p: &[f64]) -> Result<TensorValue, TensorError> {
    let conn = christoffel(g, p)?;
    let jets = t.evaluate_jet(p)?;
    Ok(covariant_from_jets(&jets, t.valence(), &conn))
}

/// Covariant derivative of a tensor given by component jets.
pub fn covariant_from_jets(jets: &[Jet], valence: Valence, conn: &Connection) -> TensorValue {
    let n = conn.dim();
    let rank = valence.rank();
    let out_valence = Valence::new(valence.contra, valence.co + 1);
    let stride = |s: usize| n.pow((rank - 1 - s) as u32);
    let mut data = alloc::vec![0.0; out_valence.len(n)];
    for (flat, out) in data.iter_mut().enumerate() {
        let l = flat % n;
        let base = flat / n;
        let mut acc = jets[base].partial(l);
        for s in 0..rank {
            let st = stride(s);
            let idx = (base / st) % n;
            let without = base - idx * st;
            for m in 0..n {
                let t = jets[without + m * st].value;
                if s < valence.contra {
                    acc += conn.symbol(idx, l, m) * t;
                } else {
                    acc -= conn.symbol(m, l, idx) * t;
                }
            }
        }
        *out = acc;
    }
    TensorValue::new(out_valence, n, data).expect("finite inputs give finite output")
}

/// `[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i` from jets.
pub fn bracket_jets<S: Scalar>(x: &[Dual<S>], y: &[Dual<S>]) -> Vec<S> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut acc = S::zero();
            for j in 0..n {
                acc = acc + x[j].value.clone() * y[i].partial(j) - y[j].value.clone() * x[i].partial(j);
            }
            acc
        })
        .collect()
}

pub fn lie_bracket(x: &TensorField, y: &TensorField, p: &[f64]) -> Result<TensorValue, TensorError> {
    expect_valence(x, Valence::VECTOR)?;
    expect_valence(y, Valence::VECTOR)?;
    let xj = x.evaluate_jet(p)?;
    let yj = y.evaluate_jet(p)?;
    Ok(TensorValue::vector(bracket_jets(&xj, &yj)))
}

/// Lie derivative along `xi` of a tensor of valence (1,0), (1,1), (0,1) or
/// (0,2), from jets, over any scalar level.
pub fn lie_from_jets<S: Scalar>(xi: &[Dual<S>], t: &[Dual<S>], valence: Valence) -> Result<Vec<S>, TensorError> {
    let n = xi.len();
    let dxi = |k: usize, j: usize| xi[k].partial(j);
    let transport = |c: usize| {
        let mut acc = S::zero();
        for k in 0..n {
            acc = acc + xi[k].value.clone() * t[c].partial(k);
        }
        acc
    };
    let out = match (valence.contra, valence.co) {
        (1, 0) => bracket_jets(xi, t),
        (0, 1) => (0..n)
            .map(|j| {
                let mut acc = transport(j);
                for k in 0..n {
                    acc = acc + t[k].value.clone() * dxi(k, j);
                }
                acc
            })
            .collect(),
        (1, 1) | (0, 2) => {
            let upper = valence.contra == 1;
            (0..n * n)
                .map(|c| {
                    let (i, j) = (c / n, c % n);
                    let mut acc = transport(c);
                    for k in 0..n {
                        if upper {
                            acc = acc - t[k * n + j].value.clone() * dxi(i, k);
                        } else {
                            acc = acc + t[k * n + j].value.clone() * dxi(k, i);
                        }
                        acc = acc + t[i * n + k].value.clone() * dxi(k, j);
                    }
                    acc
                })
                .collect()
        }
        (r, s) => return Err(TensorError::UnsupportedValence(r, s)),
    };
    Ok(out)
}

pub fn lie_derivative(xi: &TensorField, t: &TensorField, p: &[f64]) -> Result<TensorValue, TensorError> {
    expect_valence(xi, Valence::VECTOR)?;
    let xj = xi.evaluate_jet(p)?;
    let tj = t.evaluate_jet(p)?;
    let data = lie_from_jets(&xj, &tj, t.valence())?;
    TensorValue::new(t.valence(), t.dim(), data)
}

/// `d omega` for a 1-form: `(d omega)_{ij} = (d_i omega_j - d_j omega_i) / 2`.
pub fn d_one_form<S: Scalar>(omega: &[Dual<S>]) -> Vec<S> {
    let n = omega.len();
    (0..n * n)
        .map(|c| {
            let (i, j) = (c / n, c % n);
            (omega[j].partial(i) - omega[i].partial(j)).scale(0.5)
        })
        .collect()
}

/// `d omega` for a 2-form: the cyclic sum of partials divided by 3.
pub fn d_two_form<S: Scalar>(omega: &[Dual<S>], n: usize) -> Vec<S> {
    let w = |a: usize, b: usize, l: usize| omega[a * n + b].partial(l);
    (0..n * n * n)
        .map(|c| {
            let (i, j, k) = (c / (n * n), (c / n) % n, c % n);
            (w(j, k, i) + w(k, i, j) + w(i, j, k)).scale(1.0 / 3.0)
        })
        .collect()
}

fn check_antisymmetric(values: &[f64], n: usize) -> Result<(), TensorError> {
    let scale = linalg::sup(values).max(1.0);
    for i in 0..n {
        for j in 0..=i {
            if (values[i * n + j] + values[j * n + i]).abs() > ANTISYMMETRY_TOL * scale {
                return Err(TensorError::NotAntisymmetric);
            }
        }
    }
    Ok(())
}

pub fn exterior_derivative(omega: &TensorField, p: &[f64]) -> Result<TensorValue, TensorError> {
    let n = omega.dim();
    let jets = omega.evaluate_jet(p)?;
    match (omega.valence().contra, omega.valence().co) {
        (0, 1) => TensorValue::new(Valence::BILINEAR, n, d_one_form(&jets)),
        (0, 2) => {
            let values: Vec<f64> = jets.iter().map(|j| j.value).collect();
            check_antisymmetric(&values, n)?;
            TensorValue::new(Valence::new(0, 3), n, d_two_form(&jets, n))
        }
        (r, s) => Err(TensorError::UnsupportedValence(r, s)),
    }
}

/// Exterior derivative of a 1-form with first partials of `d omega`,
/// obtained by running `d_one_form` over nested duals.
pub fn d_one_form_jet(omega: &TensorField, p: &[f64]) -> Result<Vec<Jet>, TensorError> {
    let inner = Dual::seed(p);
    let outer = Dual::seed(&inner);
    let jets = omega.eval_generic(&outer)?;
    Ok(d_one_form(&jets))
}

/// `(T X)^i = T^i_j X^j` on jets.
pub fn apply<S: Scalar>(t: &[S], x: &[S]) -> Vec<S> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).fold(S::zero(), |acc, j| acc + t[i * n + j].clone() * x[j].clone()))
        .collect()
}

/// Constant-coefficient extension of a point vector.
pub fn constant_field(x: &[f64]) -> Vec<Jet> {
    x.iter().map(|v| Dual::constant(*v)).collect()
}

/// The extension `X (1 + a . (q - p))`, which agrees with `X` at `p` but
/// has Jacobian `X a^T`.
pub fn linear_field(x: &[f64], a: &[f64]) -> Vec<Jet> {
    x.iter()
        .map(|v| Dual {
            value: *v,
            derivatives: a.iter().map(|c| v * c).collect(),
        })
        .collect()
}

/// `[phi, phi](X, Y)` from the jets of `phi` and of the two fields.
pub fn nijenhuis_jets(phi: &[Jet], x: &[Jet], y: &[Jet]) -> Vec<f64> {
    let phi_v: Vec<f64> = phi.iter().map(|j| j.value).collect();
    let n = x.len();
    let px = apply(phi, x);
    let py = apply(phi, y);
    let xy = bracket_jets(x, y);
    let a = linalg::mat_vec(&linalg::mat_mul(&phi_v, &phi_v, n), &xy);
    let b = bracket_jets(&px, &py);
    let c = linalg::mat_vec(&phi_v, &bracket_jets(&px, y));
    let d = linalg::mat_vec(&phi_v, &bracket_jets(x, &py));
    (0..n).map(|i| a[i] + b[i] - c[i] - d[i]).collect()
}

pub fn nijenhuis(phi: &TensorField, x: &[f64], y: &[f64], p: &[f64]) -> Result<TensorValue, TensorError> {
    expect_valence(phi, Valence::ENDOMORPHISM)?;
    let jets = phi.evaluate_jet(p)?;
    Ok(TensorValue::vector(nijenhuis_jets(
        &jets,
        &constant_field(x),
        &constant_field(y),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::ScalarExpr;
    use alloc::vec;

    fn chart() -> Chart {
        Chart::cube(&["x", "y", "z"], 0.5, 2.0).unwrap()
    }

    fn field(v: Valence, src: &[&str]) -> TensorField {
        TensorField::parse(&chart(), v, src).unwrap()
    }

    #[test]
    fn euclidean_connection_vanishes() {
        let g = TensorField::identity(&chart());
        let g = TensorField::new(&chart(), Valence::BILINEAR, g.components().to_vec()).unwrap();
        let c = christoffel(&g, &[1.0, 1.0, 1.0]).unwrap();
        assert!(c.symbols().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn polar_like_metric_symbol() {
        let g = field(Valence::BILINEAR, &["1", "0", "0", "0", "x^2", "0", "0", "0", "1"]);
        let x = 1.7;
        let c = christoffel(&g, &[x, 0.9, 1.1]).unwrap();
        assert!((c.symbol(1, 0, 1) - 1.0 / x).abs() < 1e-15);
        assert!((c.symbol(0, 1, 1) + x).abs() < 1e-15);
    }

    #[test]
    fn textbook_bracket() {
        let dx = field(Valence::VECTOR, &["1", "0", "0"]);
        let xdy = field(Valence::VECTOR, &["0", "x", "0"]);
        let b = lie_bracket(&dx, &xdy, &[1.2, 0.7, 0.6]).unwrap();
        assert_eq!(b.data(), &[0.0, 1.0, 0.0]);
        let s = lie_bracket(&xdy, &xdy, &[1.2, 0.7, 0.6]).unwrap();
        assert_eq!(s.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn contact_form_differential() {
        let eta = field(Valence::COVECTOR, &["-y/2", "0", "1/2"]);
        for p in [[0.6, 1.3, 1.9], [1.5, 0.8, 0.7]] {
            let d = exterior_derivative(&eta, &p).unwrap();
            assert_eq!(d.get(&[0, 1]), 0.25);
            assert_eq!(d.get(&[1, 0]), -0.25);
        }
    }

    #[test]
    fn exterior_derivative_rejects_symmetric() {
        let w = field(Valence::BILINEAR, &["0", "x", "0", "x", "0", "0", "0", "0", "0"]);
        assert_eq!(
            exterior_derivative(&w, &[1.0, 1.0, 1.0]),
            Err(TensorError::NotAntisymmetric)
        );
        let v = field(Valence::VECTOR, &["x", "0", "0"]);
        assert!(matches!(
            exterior_derivative(&v, &[1.0, 1.0, 1.0]),
            Err(TensorError::UnsupportedValence(1, 0))
        ));
    }

    #[test]
    fn identity_has_no_torsion() {
        let id = TensorField::identity(&chart());
        let n = nijenhuis(&id, &[1.0, 2.0, 3.0], &[0.5, -1.0, 0.2], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(n.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn lie_derivative_along_translation() {
        let dz = field(Valence::VECTOR, &["0", "0", "1"]);
        let t = field(Valence::BILINEAR, &["x*y", "0", "1", "0", "y", "0", "1", "0", "x"]);
        let r = lie_derivative(&dz, &t, &[1.0, 1.3, 0.7]).unwrap();
        assert!(r.data().iter().all(|v| *v == 0.0));
        let cubic = TensorField::new(&chart(), Valence::new(0, 3), vec![ScalarExpr::constant(0.0, 3); 27]).unwrap();
        assert_eq!(
            lie_derivative(&dz, &cubic, &[1.0; 3]),
            Err(TensorError::UnsupportedValence(0, 3))
        );
    }
}
