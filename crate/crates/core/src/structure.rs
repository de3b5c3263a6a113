//! The structure bundle `(phi, Q, xi, eta, g, nu)`: axiom validation and
//! pointwise derived tensors.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::calculus::{self, Connection, Jet};
use crate::chart::{Chart, Executor, SamplePlan};
use crate::dual::Dual;
use crate::expr::ScalarExpr;
use crate::linalg;
use crate::tensor::{TensorError, TensorField, Valence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    MetricSpd,
    EtaXi,
    QNonsingular,
    QXiNuXi,
    PhiSquared,
    PhiPreservesD,
    Compatibility,
    PhiXi,
    EtaPhi,
    QPhiCommute,
    PhiSkew,
    QSelfAdjoint,
    PhiRank,
    EtaIsGXi,
}

impl Axiom {
    /// Canonical order: defining axioms first, then derived properties.
    pub const ALL: [Axiom; 14] = [
        Axiom::MetricSpd,
        Axiom::EtaXi,
        Axiom::QNonsingular,
        Axiom::QXiNuXi,
        Axiom::PhiSquared,
        Axiom::PhiPreservesD,
        Axiom::Compatibility,
        Axiom::PhiXi,
        Axiom::EtaPhi,
        Axiom::QPhiCommute,
        Axiom::PhiSkew,
        Axiom::QSelfAdjoint,
        Axiom::PhiRank,
        Axiom::EtaIsGXi,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Axiom::MetricSpd => "metric_spd",
            Axiom::EtaXi => "eta(xi)=1",
            Axiom::QNonsingular => "Q_nonsingular",
            Axiom::QXiNuXi => "Q xi=nu xi",
            Axiom::PhiSquared => "phi^2=-Q+eta*Q xi",
            Axiom::PhiPreservesD => "phi(D) in D",
            Axiom::Compatibility => "compatibility",
            Axiom::PhiXi => "phi xi=0",
            Axiom::EtaPhi => "eta o phi=0",
            Axiom::QPhiCommute => "[Q,phi]=0",
            Axiom::PhiSkew => "phi skew",
            Axiom::QSelfAdjoint => "Q self-adjoint",
            Axiom::PhiRank => "rank phi=2n",
            Axiom::EtaIsGXi => "eta=g(.,xi)",
        }
    }

    pub fn from_id(id: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.id() == id)
    }

    /// Consequences of the defining axioms rather than axioms themselves.
    pub fn is_derived(self) -> bool {
        self as usize >= Axiom::PhiXi as usize
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("field `{field}` has valence ({contra},{co})")]
    WrongValence {
        field: &'static str,
        contra: usize,
        co: usize,
    },
    #[error("field `{0}` is defined over a different chart")]
    ChartMismatch(&'static str),
    #[error("Q omitted and nu missing: cannot synthesize Q")]
    MissingNu,
    #[error("evaluation failed at {point:?}: {source}")]
    Evaluation {
        point: Vec<f64>,
        #[source]
        source: TensorError,
    },
    #[error("axiom `{}` violated at {point:?} (residual {residual:e})", axiom.id())]
    AxiomViolation {
        axiom: Axiom,
        point: Vec<f64>,
        residual: f64,
        report: Box<ValidationReport>,
    },
}

/// Unvalidated bundle as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawStructure {
    pub chart: Chart,
    pub phi: TensorField,
    pub q: TensorField,
    pub xi: TensorField,
    pub eta: TensorField,
    pub g: TensorField,
    pub nu: Option<f64>,
}

fn expect(field: &'static str, t: &TensorField, v: Valence, chart: &Chart) -> Result<(), StructureError> {
    if t.valence() != v {
        return Err(StructureError::WrongValence {
            field,
            contra: t.valence().contra,
            co: t.valence().co,
        });
    }
    if t.chart() != chart {
        return Err(StructureError::ChartMismatch(field));
    }
    Ok(())
}

/// `Q = -phi^2 + nu xi (x) eta`, the rearrangement of the defining
/// relation under `Q xi = nu xi`.
pub fn synthesize_q(phi: &TensorField, xi: &TensorField, eta: &TensorField, nu: f64) -> TensorField {
    let n = phi.dim();
    let c = phi.components();
    let comps = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let square = ScalarExpr::sum((0..n).map(|m| c[i * n + m].mul(&c[m * n + j])), n);
            square
                .neg()
                .add(&xi.components()[i].mul(&eta.components()[j]).scale(nu))
        })
        .collect();
    TensorField::new(phi.chart(), Valence::ENDOMORPHISM, comps).expect("shape is consistent")
}

impl RawStructure {
    /// Checks valences and charts. A missing `q` is synthesized from `nu`.
    pub fn new(
        phi: TensorField,
        q: Option<TensorField>,
        xi: TensorField,
        eta: TensorField,
        g: TensorField,
        nu: Option<f64>,
    ) -> Result<RawStructure, StructureError> {
        let chart = g.chart().clone();
        expect("phi", &phi, Valence::ENDOMORPHISM, &chart)?;
        expect("xi", &xi, Valence::VECTOR, &chart)?;
        expect("eta", &eta, Valence::COVECTOR, &chart)?;
        expect("metric", &g, Valence::BILINEAR, &chart)?;
        let q = match q {
            Some(q) => q,
            None => synthesize_q(&phi, &xi, &eta, nu.ok_or(StructureError::MissingNu)?),
        };
        expect("Q", &q, Valence::ENDOMORPHISM, &chart)?;
        Ok(RawStructure {
            chart,
            phi,
            q,
            xi,
            eta,
            g,
            nu,
        })
    }
}

/// Pointwise values of the five fields.
#[derive(Clone, Debug)]
struct Values {
    phi: Vec<f64>,
    q: Vec<f64>,
    xi: Vec<f64>,
    eta: Vec<f64>,
    g: Vec<f64>,
}

impl Values {
    fn at(raw: &RawStructure, p: &[f64]) -> Result<Values, TensorError> {
        Ok(Values {
            phi: raw.phi.evaluate(p)?.into_data(),
            q: raw.q.evaluate(p)?.into_data(),
            xi: raw.xi.evaluate(p)?.into_data(),
            eta: raw.eta.evaluate(p)?.into_data(),
            g: raw.g.evaluate(p)?.into_data(),
        })
    }

    fn nu(&self) -> f64 {
        let qxi = linalg::mat_vec(&self.q, &self.xi);
        let gxi = linalg::mat_vec(&self.g, &self.xi);
        linalg::dot(&qxi, &gxi) / linalg::dot(&self.xi, &gxi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct AxiomSample {
    residual: f64,
    broken: bool,
}

fn sample(residual: f64) -> AxiomSample {
    AxiomSample {
        residual,
        broken: !residual.is_finite(),
    }
}

fn point_axioms(v: &Values, nu: f64) -> [AxiomSample; 14] {
    let n = v.xi.len();
    let phi2 = linalg::mat_mul(&v.phi, &v.phi, n);
    let qxi = linalg::mat_vec(&v.q, &v.xi);
    let gphi = linalg::mat_mul(&v.g, &v.phi, n);
    let gq = linalg::mat_mul(&v.g, &v.q, n);
    let eta_phi = linalg::vec_mat(&v.eta, &v.phi);
    let eta_q = linalg::vec_mat(&v.eta, &v.q);
    let asym = |m: &[f64]| linalg::sup(&linalg::sub(m, &linalg::transpose(m, n)));
    let sym = |m: &[f64]| linalg::sup(&linalg::add(m, &linalg::transpose(m, n)));
    let projector = linalg::sub(&linalg::identity(n), &linalg::outer(&v.xi, &v.eta));

    let mut out = [sample(0.0); 14];
    let spd = linalg::is_positive_definite(&v.g, n);
    let neg = (-linalg::min_symmetric_eigenvalue(&v.g, n)).max(0.0);
    out[0] = AxiomSample {
        residual: asym(&v.g).max(neg),
        broken: !spd,
    };
    out[1] = sample((linalg::dot(&v.eta, &v.xi) - 1.0).abs());
    let q_deficit = (n - linalg::numeric_rank(&v.q, n)) as f64;
    out[2] = AxiomSample {
        residual: q_deficit,
        broken: q_deficit > 0.0,
    };
    out[3] = AxiomSample {
        residual: linalg::sup(&linalg::sub(&qxi, &linalg::scaled(&v.xi, nu))),
        broken: !(nu > 0.0 && nu.is_finite()),
    };
    let rhs = linalg::sub(&linalg::outer(&qxi, &v.eta), &v.q);
    out[4] = sample(linalg::sup(&linalg::sub(&phi2, &rhs)));
    out[5] = sample(linalg::sup(&linalg::vec_mat(&eta_phi, &projector)));
    let lhs = linalg::mat_mul(&linalg::transpose(&v.phi, n), &gphi, n);
    let rhs = linalg::sub(&gq, &linalg::outer(&v.eta, &eta_q));
    out[6] = sample(linalg::sup(&linalg::sub(&lhs, &rhs)));
    out[7] = sample(linalg::sup(&linalg::mat_vec(&v.phi, &v.xi)));
    out[8] = sample(linalg::sup(&eta_phi));
    let qphi = linalg::mat_mul(&v.q, &v.phi, n);
    let phiq = linalg::mat_mul(&v.phi, &v.q, n);
    out[9] = sample(linalg::sup(&linalg::sub(&qphi, &phiq)));
    out[10] = sample(sym(&gphi));
    out[11] = sample(asym(&gq));
    let phi_deficit = (linalg::numeric_rank(&v.phi, n) as f64 - (n - 1) as f64).abs();
    out[12] = AxiomSample {
        residual: phi_deficit,
        broken: phi_deficit > 0.0,
    };
    out[13] = sample(linalg::sup(&linalg::sub(&v.eta, &linalg::mat_vec(&v.g, &v.xi))));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomResult {
    pub axiom: Axiom,
    /// Sup over sample points (sup-norm of the matrix/vector residual, or a
    /// rank deficit for the rank conditions).
    pub residual: f64,
    pub worst_point: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub nu: f64,
    /// True when `nu` was not supplied and was read off the first sample.
    pub nu_extracted: bool,
    pub tol: f64,
    pub axioms: Vec<AxiomResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    /// First failed axiom in canonical order.
    pub fn first_violation(&self) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| !a.passed)
    }

    pub fn get(&self, axiom: Axiom) -> &AxiomResult {
        &self.axioms[axiom as usize]
    }

    /// Largest residual among the tolerance-based axioms.
    pub fn max_residual(&self) -> f64 {
        self.axioms
            .iter()
            .filter(|a| !matches!(a.axiom, Axiom::QNonsingular | Axiom::PhiRank))
            .fold(0.0, |m, a| m.max(a.residual))
    }
}

/// Evaluates every axiom at every plan point.
pub fn check<E: Executor>(
    raw: &RawStructure,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<ValidationReport, StructureError> {
    let chart = &raw.chart;
    let first = plan.point(chart, 0);
    let (nu, nu_extracted) = match raw.nu {
        Some(nu) => (nu, false),
        None => {
            let v = Values::at(raw, &first).map_err(|source| StructureError::Evaluation {
                point: first.clone(),
                source,
            })?;
            (v.nu(), true)
        }
    };
    let samples = exec.map_indexed(plan.count, |i| {
        let p = plan.point(chart, i);
        Values::at(raw, &p)
            .map(|v| point_axioms(&v, nu))
            .map_err(|source| StructureError::Evaluation { point: p, source })
    });
    let mut worst = [(0.0f64, 0usize, false); 14];
    for (i, s) in samples.into_iter().enumerate() {
        let s = s?;
        for (k, a) in s.iter().enumerate() {
            let w = &mut worst[k];
            if a.residual > w.0 || (a.broken && !w.2) {
                *w = (a.residual.max(w.0), i, w.2);
            }
            w.2 |= a.broken;
        }
    }
    let axioms = Axiom::ALL
        .iter()
        .zip(worst)
        .map(|(&axiom, (residual, index, broken))| AxiomResult {
            axiom,
            residual,
            worst_point: plan.point(chart, index),
            passed: !broken && residual <= tol,
        })
        .collect();
    Ok(ValidationReport {
        nu,
        nu_extracted,
        tol,
        axioms,
    })
}

/// A validated structure. Immutable; obtained only through [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    raw: RawStructure,
    nu: f64,
}

/// Runs [`check`] and returns the structure if every axiom holds.
pub fn validate<E: Executor>(
    raw: RawStructure,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<(Structure, ValidationReport), StructureError> {
    let report = check(&raw, plan, tol, exec)?;
    if let Some(v) = report.first_violation() {
        return Err(StructureError::AxiomViolation {
            axiom: v.axiom,
            point: v.worst_point.clone(),
            residual: v.residual,
            report: Box::new(report.clone()),
        });
    }
    let nu = report.nu;
    Ok((Structure { raw, nu }, report))
}

impl Structure {
    pub fn chart(&self) -> &Chart {
        &self.raw.chart
    }
    pub fn phi(&self) -> &TensorField {
        &self.raw.phi
    }
    pub fn q(&self) -> &TensorField {
        &self.raw.q
    }
    pub fn xi(&self) -> &TensorField {
        &self.raw.xi
    }
    pub fn eta(&self) -> &TensorField {
        &self.raw.eta
    }
    pub fn g(&self) -> &TensorField {
        &self.raw.g
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn dim(&self) -> usize {
        self.raw.chart.dim()
    }
    pub fn raw(&self) -> &RawStructure {
        &self.raw
    }
    /// The bundle with `nu` recorded explicitly.
    pub fn to_raw(&self) -> RawStructure {
        RawStructure {
            nu: Some(self.nu),
            ..self.raw.clone()
        }
    }
    pub fn frame(&self, p: &[f64]) -> Result<Frame<'_>, TensorError> {
        Frame::new(self, p)
    }
}

fn values(jets: &[Jet]) -> Vec<f64> {
    jets.iter().map(|j| j.value).collect()
}

fn dot_jets(a: &[Jet], b: &[Jet]) -> Jet {
    a.iter()
        .zip(b)
        .fold(Dual::constant(0.0), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Everything needed to evaluate derived tensors at one point.
///
/// Vector arguments are jets (value plus first partials). Plain point
/// vectors enter through [`Frame::constant`], the constant-coefficient
/// extension; natural fields such as `xi`, `phi X` or `X^T` are built from
/// the structure's own jets. Brackets return values only.
#[derive(Clone, Debug)]
pub struct Frame<'a> {
    s: &'a Structure,
    p: Vec<f64>,
    n: usize,
    phi: Vec<Jet>,
    q: Vec<Jet>,
    xi: Vec<Jet>,
    eta: Vec<Jet>,
    g: Vec<Jet>,
    phi_v: Vec<f64>,
    q_v: Vec<f64>,
    xi_v: Vec<f64>,
    eta_v: Vec<f64>,
    g_v: Vec<f64>,
    ginv: Vec<f64>,
    conn: Connection,
    deta: Vec<f64>,
    dphi: Vec<f64>,
}

impl<'a> Frame<'a> {
    pub fn new(s: &'a Structure, p: &[f64]) -> Result<Frame<'a>, TensorError> {
        let n = s.dim();
        let phi = s.phi().evaluate_jet(p)?;
        let q = s.q().evaluate_jet(p)?;
        let xi = s.xi().evaluate_jet(p)?;
        let eta = s.eta().evaluate_jet(p)?;
        let g = s.g().evaluate_jet(p)?;
        let g_v = values(&g);
        let ginv = linalg::inverse(&g_v, n).ok_or(TensorError::SingularMetric)?;
        let conn = calculus::connection_from_jets(&g, &ginv, n);
        let deta = calculus::d_one_form(&eta);
        let big_phi: Vec<Jet> = (0..n * n)
            .map(|c| {
                let (i, j) = (c / n, c % n);
                (0..n).fold(Dual::constant(0.0), |acc, l| {
                    acc + g[i * n + l].clone() * phi[l * n + j].clone()
                })
            })
            .collect();
        let dphi = calculus::d_two_form(&big_phi, n);
        Ok(Frame {
            s,
            p: p.to_vec(),
            n,
            phi_v: values(&phi),
            q_v: values(&q),
            xi_v: values(&xi),
            eta_v: values(&eta),
            g_v,
            phi,
            q,
            xi,
            eta,
            g,
            ginv,
            conn,
            deta,
            dphi,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn point(&self) -> &[f64] {
        &self.p
    }
    pub fn nu(&self) -> f64 {
        self.s.nu()
    }
    pub fn structure(&self) -> &Structure {
        self.s
    }
    pub fn phi_matrix(&self) -> &[f64] {
        &self.phi_v
    }
    pub fn q_matrix(&self) -> &[f64] {
        &self.q_v
    }
    pub fn xi_value(&self) -> &[f64] {
        &self.xi_v
    }
    pub fn eta_value(&self) -> &[f64] {
        &self.eta_v
    }
    pub fn metric(&self) -> &[f64] {
        &self.g_v
    }
    pub fn metric_inverse(&self) -> &[f64] {
        &self.ginv
    }
    pub fn connection(&self) -> &Connection {
        &self.conn
    }
    /// `d eta` components (`1/2` convention).
    pub fn deta_matrix(&self) -> &[f64] {
        &self.deta
    }
    /// `d Phi` components (`1/3` convention).
    pub fn dphi_tensor(&self) -> &[f64] {
        &self.dphi
    }

    // -- fields ------------------------------------------------------------

    pub fn constant(&self, x: &[f64]) -> Vec<Jet> {
        calculus::constant_field(x)
    }

    pub fn xi_field(&self) -> Vec<Jet> {
        self.xi.clone()
    }

    pub fn phi_field(&self, x: &[Jet]) -> Vec<Jet> {
        calculus::apply(&self.phi, x)
    }

    pub fn q_field(&self, x: &[Jet]) -> Vec<Jet> {
        calculus::apply(&self.q, x)
    }

    /// `Q~ X = Q X - X`.
    pub fn qt_field(&self, x: &[Jet]) -> Vec<Jet> {
        self.q_field(x).into_iter().zip(x).map(|(a, b)| a - b.clone()).collect()
    }

    pub fn eta_jet(&self, x: &[Jet]) -> Jet {
        dot_jets(&self.eta, x)
    }

    pub fn g_jet(&self, u: &[Jet], v: &[Jet]) -> Jet {
        let n = self.n;
        let gv: Vec<Jet> = (0..n).map(|i| dot_jets(&self.g[i * n..(i + 1) * n], v)).collect();
        dot_jets(u, &gv)
    }

    /// `X^T = X - eta(X) xi` as a field.
    pub fn top_field(&self, x: &[Jet]) -> Vec<Jet> {
        let e = self.eta_jet(x);
        x.iter()
            .zip(&self.xi)
            .map(|(a, b)| a.clone() - e.clone() * b.clone())
            .collect()
    }

    /// `W(f)` for a point vector `w` and a function jet `f`.
    pub fn along(&self, w: &[f64], f: &Jet) -> f64 {
        w.iter().enumerate().map(|(l, c)| c * f.partial(l)).sum()
    }

    pub fn bracket(&self, x: &[Jet], y: &[Jet]) -> Vec<f64> {
        calculus::bracket_jets(x, y)
    }

    // -- pointwise algebra -------------------------------------------------

    pub fn g(&self, u: &[f64], v: &[f64]) -> f64 {
        linalg::dot(u, &linalg::mat_vec(&self.g_v, v))
    }

    pub fn eta(&self, u: &[f64]) -> f64 {
        linalg::dot(&self.eta_v, u)
    }

    pub fn phi(&self, u: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.phi_v, u)
    }

    pub fn q(&self, u: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.q_v, u)
    }

    pub fn qt(&self, u: &[f64]) -> Vec<f64> {
        linalg::sub(&self.q(u), u)
    }

    pub fn top(&self, u: &[f64]) -> Vec<f64> {
        let e = self.eta(u);
        u.iter().zip(&self.xi_v).map(|(a, b)| a - e * b).collect()
    }

    /// Fundamental 2-form `Phi(X, Y) = g(X, phi Y)`.
    pub fn big_phi(&self, u: &[f64], v: &[f64]) -> f64 {
        self.g(u, &self.phi(v))
    }

    pub fn big_phi_matrix(&self) -> Vec<f64> {
        linalg::mat_mul(&self.g_v, &self.phi_v, self.n)
    }

    pub fn deta(&self, u: &[f64], v: &[f64]) -> f64 {
        linalg::dot(u, &linalg::mat_vec(&self.deta, v))
    }

    pub fn dphi(&self, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc += self.dphi[(i * n + j) * n + k] * u[i] * v[j] * w[k];
                }
            }
        }
        acc
    }

    /// `Q~ = Q - id` as a matrix.
    pub fn qt_matrix(&self) -> Vec<f64> {
        linalg::sub(&self.q_v, &linalg::identity(self.n))
    }

    // -- connection --------------------------------------------------------

    /// `nabla phi` with layout `[i][j][l]`, direction last.
    pub fn nabla_phi_tensor(&self) -> Vec<f64> {
        calculus::covariant_from_jets(&self.phi, Valence::ENDOMORPHISM, &self.conn).into_data()
    }

    /// `(nabla_X phi) Y`.
    pub fn nabla_phi(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t = self.nabla_phi_tensor();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    for l in 0..n {
                        acc += t[(i * n + j) * n + l] * y[j] * x[l];
                    }
                }
                acc
            })
            .collect()
    }

    /// `nabla_X xi`.
    pub fn nabla_xi(&self, x: &[f64]) -> Vec<f64> {
        self.conn.covariant(x, &self.xi)
    }

    /// `(L_xi g)` as a matrix.
    pub fn lie_xi_g(&self) -> Vec<f64> {
        calculus::lie_from_jets(&self.xi, &self.g, Valence::BILINEAR).expect("supported valence")
    }

    /// `(L_xi d eta)` as a matrix; needs second derivatives of `eta`.
    pub fn lie_xi_deta(&self) -> Result<Vec<f64>, TensorError> {
        let deta = calculus::d_one_form_jet(self.s.eta(), &self.p)?;
        Ok(calculus::lie_from_jets(&self.xi, &deta, Valence::BILINEAR).expect("supported valence"))
    }

    // -- torsion tensors ---------------------------------------------------

    pub fn nijenhuis(&self, x: &[Jet], y: &[Jet]) -> Vec<f64> {
        calculus::nijenhuis_jets(&self.phi, x, y)
    }

    /// `N1(X,Y) = [phi,phi](X,Y) + 2 d eta(X,Y) Q xi`.
    pub fn n1(&self, x: &[Jet], y: &[Jet]) -> Vec<f64> {
        let c = 2.0 * self.deta(&values(x), &values(y));
        let qxi = self.q(&self.xi_v);
        self.nijenhuis(x, y).iter().zip(qxi).map(|(a, b)| a + c * b).collect()
    }

    /// `N2(X,Y) = 2 d eta(phi X, Y) - 2 d eta(phi Y, X)`.
    pub fn n2(&self, x: &[f64], y: &[f64]) -> f64 {
        2.0 * self.deta(&self.phi(x), y) - 2.0 * self.deta(&self.phi(y), x)
    }

    /// `N2` from Lie derivatives: `(L_{phi X} eta)(Y) - (L_{phi Y} eta)(X)`.
    pub fn n2_lie(&self, x: &[Jet], y: &[Jet]) -> f64 {
        let lie = |v: &[Jet], w: &[Jet]| {
            let vv = values(v);
            self.along(&vv, &self.eta_jet(w)) - self.eta(&self.bracket(v, w))
        };
        lie(&self.phi_field(x), y) - lie(&self.phi_field(y), x)
    }

    /// `N3(X) = [xi, phi X] - phi [xi, X]`.
    pub fn n3(&self, x: &[Jet]) -> Vec<f64> {
        let a = self.bracket(&self.xi, &self.phi_field(x));
        let b = self.phi(&self.bracket(&self.xi, x));
        linalg::sub(&a, &b)
    }

    /// `N4(X) = 2 d eta(xi, X)`.
    pub fn n4(&self, x: &[f64]) -> f64 {
        2.0 * self.deta(&self.xi_v, x)
    }

    /// `N4(X) = xi(eta(X)) - eta([xi, X])`.
    pub fn n4_lie(&self, x: &[Jet]) -> f64 {
        self.along(&self.xi_v, &self.eta_jet(x)) - self.eta(&self.bracket(&self.xi, x))
    }

    /// The trilinear tensor built from `Q~`-pairings of brackets and
    /// projections, skew in its last two arguments.
    pub fn n5(&self, x: &[Jet], y: &[Jet], z: &[Jet]) -> f64 {
        let xt = self.top_field(x);
        let (py, pz) = (self.phi_field(y), self.phi_field(z));
        let (qy, qz) = (self.qt_field(y), self.qt_field(z));
        let qx = self.qt(&values(x));
        let qy_v = values(&qy);
        let qz_v = values(&qz);
        let line1 = self.along(&values(&pz), &self.g_jet(&xt, &qy)) - self.along(&values(&py), &self.g_jet(&xt, &qz));
        let line2 = self.g(&self.top(&self.bracket(x, &pz)), &qy_v) - self.g(&self.top(&self.bracket(x, &py)), &qz_v);
        let w = linalg::sub(
            &linalg::sub(&self.top(&self.bracket(y, &pz)), &self.top(&self.bracket(z, &py))),
            &self.phi(&self.bracket(y, z)),
        );
        line1 + line2 + self.g(&w, &qx)
    }

    // -- h and friends -----------------------------------------------------

    /// `h = (1/2) L_xi phi` as a matrix.
    pub fn h(&self) -> Vec<f64> {
        let lie = calculus::lie_from_jets(&self.xi, &self.phi, Valence::ENDOMORPHISM).expect("supported valence");
        linalg::scaled(&lie, 0.5)
    }

    /// Metric adjoint `g^{-1} A^T g`.
    pub fn adjoint(&self, a: &[f64]) -> Vec<f64> {
        let n = self.n;
        linalg::mat_mul(&self.ginv, &linalg::mat_mul(&linalg::transpose(a, n), &self.g_v, n), n)
    }

    pub fn h_star(&self) -> Vec<f64> {
        self.adjoint(&self.h())
    }

    /// `A = h phi + phi h`.
    pub fn a(&self) -> Vec<f64> {
        let n = self.n;
        let h = self.h();
        linalg::add(
            &linalg::mat_mul(&h, &self.phi_v, n),
            &linalg::mat_mul(&self.phi_v, &h, n),
        )
    }

    /// `B = h* - h`.
    pub fn b(&self) -> Vec<f64> {
        linalg::sub(&self.h_star(), &self.h())
    }
}
