//! Constructions: homothetic deformation, Sasakian extraction, the product
//! with a line, and the contact vector field test.

use alloc::vec::Vec;

use crate::calculus::{self, Jet};
use crate::chart::{ChartError, Executor, SamplePlan};
use crate::classify::{self, ClassifyError, Flag, Quantity};
use crate::dual::Dual;
use crate::expr::ScalarExpr;
use crate::linalg;
use crate::structure::{self, RawStructure, Structure, StructureError};
use crate::tensor::{TensorError, TensorField, Valence};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DeformError {
    #[error("deformation parameters must be positive and finite (lambda {lambda}, lambda' {lambda_prime})")]
    BadParameters { lambda: f64, lambda_prime: f64 },
    #[error("not weak Sasakian: {condition} fails (residual {residual:e})")]
    NotWeakSasakian { condition: &'static str, residual: f64 },
    #[error("weak Sasakian input but Q|D differs from nu id by {residual:e}")]
    RigidityInconsistency { residual: f64 },
    #[error("phitilde has rank {rank} at {point:?}, expected {expected}")]
    RankDeficient {
        rank: usize,
        expected: usize,
        point: Vec<f64>,
    },
    #[error("phitilde is not parallel (sup |nabla phitilde| = {residual:e})")]
    NotParallel { residual: f64 },
    #[error("-phitilde^2 is not a g-self-adjoint positive operator (residual {residual:e})")]
    NotCompatible { residual: f64 },
    #[error("constructed structure failed validation: {0}")]
    ValidationFailed(StructureError),
    #[error("structure is not weak contact metric (sup |Phi - d eta| = {residual:e})")]
    NotContactMetric { residual: f64 },
    #[error("product chart: {0}")]
    Chart(#[from] ChartError),
    #[error("field `{field}` is on a different chart")]
    ChartMismatch { field: &'static str },
    #[error("evaluation failed at {point:?}: {source}")]
    Evaluation {
        point: Vec<f64>,
        #[source]
        source: TensorError,
    },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

fn eval_err(point: &[f64]) -> impl FnOnce(TensorError) -> DeformError {
    let point = point.to_vec();
    move |source| DeformError::Evaluation { point, source }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformParams {
    lambda: f64,
    lambda_prime: f64,
}

impl DeformParams {
    pub fn new(lambda: f64, lambda_prime: f64) -> Result<DeformParams, DeformError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(lambda) || !ok(lambda_prime) {
            return Err(DeformError::BadParameters { lambda, lambda_prime });
        }
        Ok(DeformParams { lambda, lambda_prime })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_prime(&self) -> f64 {
        self.lambda_prime
    }

    pub fn reciprocal(&self) -> DeformParams {
        DeformParams {
            lambda: 1.0 / self.lambda,
            lambda_prime: 1.0 / self.lambda_prime,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.lambda == 1.0 && self.lambda_prime == 1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `(phi, Q, g) -> (phi', Q', g')`.
    Forward,
    Inverse,
}

/// The deformed bundle, before validation.
///
/// Forward: `phi' = phi / sqrt(lambda)`,
/// `Q' X = Q(X^T) / lambda + (nu / lambda') eta(X) xi`,
/// `g' = sqrt(lambda) g + (1 - sqrt(lambda)) eta (x) eta`, `nu' = nu / lambda'`.
pub fn deform_raw(s: &Structure, params: DeformParams, direction: Direction) -> RawStructure {
    let p = match direction {
        Direction::Forward => params,
        Direction::Inverse => params.reciprocal(),
    };
    if p.is_identity() {
        return s.to_raw();
    }
    let n = s.dim();
    let chart = s.chart();
    let (xi, eta) = (s.xi().components(), s.eta().components());
    let nu = s.nu();
    let root = libm::sqrt(p.lambda);

    let phi = s.phi().components().iter().map(|c| c.scale(1.0 / root)).collect();
    let q = s.q().components();
    let q_new = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let q_xi = ScalarExpr::sum((0..n).map(|m| q[i * n + m].mul(&xi[m])), n);
            let on_d = q[k].sub(&q_xi.mul(&eta[j]));
            on_d.scale(1.0 / p.lambda)
                .add(&xi[i].mul(&eta[j]).scale(nu / p.lambda_prime))
        })
        .collect();
    let g = s.g().components();
    let g_new = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            g[k].scale(root).add(&eta[i].mul(&eta[j]).scale(1.0 - root))
        })
        .collect();
    let field = |v, comps| TensorField::new(chart, v, comps).expect("shape is consistent");
    RawStructure {
        chart: chart.clone(),
        phi: field(Valence::ENDOMORPHISM, phi),
        q: field(Valence::ENDOMORPHISM, q_new),
        xi: s.xi().clone(),
        eta: s.eta().clone(),
        g: field(Valence::BILINEAR, g_new),
        nu: Some(nu / p.lambda_prime),
    }
}

/// Deforms and re-validates.
pub fn deform<E: Executor>(
    s: &Structure,
    params: DeformParams,
    direction: Direction,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<Structure, StructureError> {
    structure::validate(deform_raw(s, params, direction), plan, tol, exec).map(|(s, _)| s)
}

/// Classical Sasakian structure homothetic to a weak Sasakian one.
pub fn extract_sasakian<E: Executor>(
    s: &Structure,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<Structure, DeformError> {
    let survey = classify::survey(s, plan, tol, exec)?;
    for (flag, condition) in [
        (Flag::WeakContactMetric, "weak_contact_metric"),
        (Flag::Normal, "normal"),
    ] {
        let residual = flag.residual(&survey);
        if residual > tol {
            return Err(DeformError::NotWeakSasakian { condition, residual });
        }
    }
    let residual = survey.get(Quantity::QNu);
    if residual > tol {
        return Err(DeformError::RigidityInconsistency { residual });
    }
    let params = DeformParams::new(s.nu(), s.nu())?;
    deform(s, params, Direction::Forward, plan, tol, exec).map_err(DeformError::ValidationFailed)
}

fn lifted(e: &ScalarExpr, arity: usize) -> ScalarExpr {
    e.with_arity(arity).expect("base coordinates precede t")
}

/// Weak almost contact metric structure on `M x R` from a parallel
/// `phitilde` on `(M, g_M)`: `phi = phitilde (+) 0`,
/// `Q = -phitilde^2 (+) nu`, `xi = d/dt`, `eta = dt`, `g = g_M (+) dt^2`.
pub fn product_construction<E: Executor>(
    phitilde: &TensorField,
    g_m: &TensorField,
    nu: f64,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<Structure, DeformError> {
    let base = g_m.chart();
    if phitilde.chart() != base {
        return Err(DeformError::ChartMismatch { field: "phitilde" });
    }
    let m = base.dim();
    let rows = exec.map_indexed(plan.count, |i| -> Result<(usize, f64, f64, Vec<f64>), DeformError> {
        let p = plan.point(base, i);
        let ph = phitilde.evaluate(&p).map_err(eval_err(&p))?.into_data();
        let g = g_m.evaluate(&p).map_err(eval_err(&p))?.into_data();
        let rank = linalg::numeric_rank(&ph, m);
        let nabla = calculus::covariant_derivative(phitilde, g_m, &p).map_err(eval_err(&p))?;
        // g(-phitilde^2 .,.) must be symmetric positive definite
        let minus_sq = linalg::scaled(&linalg::mat_mul(&ph, &ph, m), -1.0);
        let form = linalg::mat_mul(&g, &minus_sq, m);
        let asym = linalg::sup(&linalg::sub(&form, &linalg::transpose(&form, m)));
        let bad = if linalg::is_positive_definite(&form, m) {
            asym
        } else {
            asym.max(-linalg::min_symmetric_eigenvalue(&form, m))
                .max(f64::MIN_POSITIVE)
        };
        Ok((rank, nabla.sup_norm(), bad, p))
    });
    let (mut parallel, mut compat) = (0.0f64, 0.0f64);
    for row in rows {
        let (rank, nabla, bad, p) = row?;
        if rank != m {
            return Err(DeformError::RankDeficient {
                rank,
                expected: m,
                point: p,
            });
        }
        parallel = parallel.max(nabla);
        compat = compat.max(bad);
    }
    if parallel > tol {
        return Err(DeformError::NotParallel { residual: parallel });
    }
    if compat > tol {
        return Err(DeformError::NotCompatible { residual: compat });
    }

    let chart = base.extended("t", (-1.0, 1.0))?;
    let n = m + 1;
    let zero = ScalarExpr::constant(0.0, n);
    let one = ScalarExpr::constant(1.0, n);
    let block = |inner: &dyn Fn(usize, usize) -> ScalarExpr, corner: ScalarExpr| -> Vec<ScalarExpr> {
        (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                match (i < m, j < m) {
                    (true, true) => inner(i, j),
                    (false, false) => corner.clone(),
                    _ => zero.clone(),
                }
            })
            .collect()
    };
    let ph = phitilde.components();
    let phi = block(&|i, j| lifted(&ph[i * m + j], n), zero.clone());
    let q = block(
        &|i, j| {
            ScalarExpr::sum((0..m).map(|l| ph[i * m + l].mul(&ph[l * m + j])), m)
                .neg()
                .with_arity(n)
                .expect("base coordinates precede t")
        },
        ScalarExpr::constant(nu, n),
    );
    let gc = g_m.components();
    let g = block(&|i, j| lifted(&gc[i * m + j], n), one.clone());
    let unit: Vec<ScalarExpr> = (0..n)
        .map(|i| if i == m { one.clone() } else { zero.clone() })
        .collect();
    let field = |v, comps| TensorField::new(&chart, v, comps).expect("shape is consistent");
    let raw = RawStructure::new(
        field(Valence::ENDOMORPHISM, phi),
        Some(field(Valence::ENDOMORPHISM, q)),
        field(Valence::VECTOR, unit.clone()),
        field(Valence::COVECTOR, unit),
        field(Valence::BILINEAR, g),
        Some(nu),
    )
    .map_err(DeformError::ValidationFailed)?;
    structure::validate(raw, plan, tol, exec)
        .map(|(s, _)| s)
        .map_err(DeformError::ValidationFailed)
}

/// A vector field given through its first-order jets.
pub trait VectorSource: Sync {
    fn jets(&self, p: &[f64]) -> Result<Vec<Jet>, TensorError>;
}

impl VectorSource for TensorField {
    fn jets(&self, p: &[f64]) -> Result<Vec<Jet>, TensorError> {
        self.evaluate_jet(p)
    }
}

/// `X = Q^{-1}(-1/2 phi grad f + nu f xi)`: the field whose contact
/// potential is `f`.
#[derive(Clone, Debug)]
pub struct PotentialField<'a> {
    pub structure: &'a Structure,
    pub potential: ScalarExpr,
}

impl VectorSource for PotentialField<'_> {
    fn jets(&self, p: &[f64]) -> Result<Vec<Jet>, TensorError> {
        let s = self.structure;
        let inner = Dual::seed(p);
        let outer = Dual::seed(&inner);
        let f2 = self.potential.eval_generic(&outer)?;
        let n = p.len();
        let df: Vec<Jet> = (0..n).map(|i| f2.partial(i)).collect();
        let f = f2.value;
        let g = s.g().eval_generic(&inner)?;
        let grad = linalg::solve_generic(&g, &df).ok_or(TensorError::SingularMetric)?;
        let phi = s.phi().eval_generic(&inner)?;
        let xi = s.xi().eval_generic(&inner)?;
        let q = s.q().eval_generic(&inner)?;
        let nu = Dual::constant(s.nu());
        let half = Dual::constant(-0.5);
        let rhs: Vec<Jet> = calculus::apply(&phi, &grad)
            .into_iter()
            .zip(xi)
            .map(|(a, b)| half.clone() * a + nu.clone() * f.clone() * b)
            .collect();
        linalg::solve_generic(&q, &rhs).ok_or(TensorError::SingularOperator)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvfSample {
    pub point: Vec<f64>,
    /// `f = eta(X)`.
    pub f: f64,
    /// `sigma = xi(f)`.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvfResult {
    pub is_weak_contact: bool,
    /// `sup |Q X + 1/2 phi grad f - nu f xi|`.
    pub residual: f64,
    pub sigma_sup: f64,
    pub strict: bool,
    /// `sup |L_X eta - sigma eta|`.
    pub lie_residual: f64,
    pub lie_consistent: bool,
    pub worst_point: Vec<f64>,
    pub samples: Vec<CvfSample>,
}

struct CvfRow {
    residual: f64,
    lie: f64,
    contact: f64,
    sample: CvfSample,
}

/// Tests whether `x` is a weak contact vector field: `L_X eta = sigma eta`.
pub fn contact_vector_field<V: VectorSource, E: Executor>(
    s: &Structure,
    x: &V,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<CvfResult, DeformError> {
    let chart = s.chart();
    let n = s.dim();
    let rows = exec.map_indexed(plan.count, |i| -> Result<CvfRow, DeformError> {
        let p = plan.point(chart, i);
        let frame = s.frame(&p).map_err(eval_err(&p))?;
        let contact = linalg::sup(&linalg::sub(&frame.big_phi_matrix(), frame.deta_matrix()));
        let xj = x.jets(&p).map_err(eval_err(&p))?;
        let f = frame.eta_jet(&xj);
        let df: Vec<f64> = (0..n).map(|l| f.partial(l)).collect();
        let grad = linalg::mat_vec(frame.metric_inverse(), &df);
        let xv: Vec<f64> = xj.iter().map(|c| c.value).collect();
        let lhs = frame.q(&xv);
        let half_phi = linalg::scaled(&frame.phi(&grad), 0.5);
        let nu_f_xi = linalg::scaled(frame.xi_value(), frame.nu() * f.value);
        let residual = linalg::sup(&linalg::sub(&linalg::add(&lhs, &half_phi), &nu_f_xi));
        let sigma = frame.along(frame.xi_value(), &f);
        let eta = s.eta().evaluate_jet(&p).map_err(eval_err(&p))?;
        let lie = calculus::lie_from_jets(&xj, &eta, Valence::COVECTOR).map_err(eval_err(&p))?;
        let lie = linalg::sup(&linalg::sub(&lie, &linalg::scaled(frame.eta_value(), sigma)));
        Ok(CvfRow {
            residual,
            lie,
            contact,
            sample: CvfSample {
                point: p,
                f: f.value,
                sigma,
            },
        })
    });
    let mut contact = 0.0f64;
    let mut residual = 0.0f64;
    let mut worst = 0;
    let mut lie_residual = 0.0f64;
    let mut sigma_sup = 0.0f64;
    let mut samples = Vec::with_capacity(plan.count);
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        contact = contact.max(row.contact);
        if row.residual > residual || row.residual.is_nan() {
            residual = row.residual;
            worst = i;
        }
        lie_residual = lie_residual.max(row.lie);
        sigma_sup = sigma_sup.max(row.sample.sigma.abs());
        samples.push(row.sample);
    }
    if !(contact <= tol) {
        return Err(DeformError::NotContactMetric { residual: contact });
    }
    let is_weak_contact = residual <= tol;
    Ok(CvfResult {
        is_weak_contact,
        residual,
        sigma_sup,
        strict: sigma_sup <= tol,
        lie_residual,
        lie_consistent: !is_weak_contact || lie_residual <= 10.0 * tol,
        worst_point: samples[worst].point.clone(),
        samples,
    })
}
