//! Classification along the weak hierarchy and the identity check registry.
//!
//! Everything is driven by one [`Survey`]: a fixed list of residual
//! quantities, each reduced to its sup over the plan's points and the
//! random vector tuples drawn at each point.

use alloc::string::String;
use alloc::vec::Vec;

use crate::calculus::Jet;
use crate::chart::{Executor, SamplePlan, TUPLES_PER_POINT};
use crate::linalg;
use crate::structure::{self, Frame, Structure, StructureError};
use crate::tensor::TensorError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("unknown check id `{0}`")]
    UnknownCheckId(String),
    #[error("evaluation failed at {point:?}: {source}")]
    Evaluation {
        point: Vec<f64>,
        #[source]
        source: TensorError,
    },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Residual quantities measured by the survey.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    ContactMetric,
    Killing,
    DPhi,
    DEta,
    NablaPhi,
    QScalar,
    QNu,
    IotaXiDeta,
    NablaXiXi,
    LieXiDeta,
    LieXiDetaSplit,
    HXi,
    H,
    Normal,
    Nijenhuis,
    N1MinusNijenhuis,
    N2,
    N2Lie,
    N2Printed,
    N3,
    N3Lie,
    N4,
    N4Lie,
    Master,
    Corollary,
    NablaXiPhi,
    N5XiSlot,
    N5XiFirst,
    N5XiXi,
    N5Skew,
    N5,
    ExampleGeneral,
    ExampleXiFirst,
    ExampleXiSlot,
    HAntisym,
    HAnticommute,
    QNablaXi,
    HPhiIdentity,
    SasakianNablaPhi,
    Cosym61,
    Cosym61b,
    Cosym61c,
}

impl Quantity {
    pub const COUNT: usize = 42;

    pub const ALL: [Quantity; Quantity::COUNT] = [
        Quantity::ContactMetric,
        Quantity::Killing,
        Quantity::DPhi,
        Quantity::DEta,
        Quantity::NablaPhi,
        Quantity::QScalar,
        Quantity::QNu,
        Quantity::IotaXiDeta,
        Quantity::NablaXiXi,
        Quantity::LieXiDeta,
        Quantity::LieXiDetaSplit,
        Quantity::HXi,
        Quantity::H,
        Quantity::Normal,
        Quantity::Nijenhuis,
        Quantity::N1MinusNijenhuis,
        Quantity::N2,
        Quantity::N2Lie,
        Quantity::N2Printed,
        Quantity::N3,
        Quantity::N3Lie,
        Quantity::N4,
        Quantity::N4Lie,
        Quantity::Master,
        Quantity::Corollary,
        Quantity::NablaXiPhi,
        Quantity::N5XiSlot,
        Quantity::N5XiFirst,
        Quantity::N5XiXi,
        Quantity::N5Skew,
        Quantity::N5,
        Quantity::ExampleGeneral,
        Quantity::ExampleXiFirst,
        Quantity::ExampleXiSlot,
        Quantity::HAntisym,
        Quantity::HAnticommute,
        Quantity::QNablaXi,
        Quantity::HPhiIdentity,
        Quantity::SasakianNablaPhi,
        Quantity::Cosym61,
        Quantity::Cosym61b,
        Quantity::Cosym61c,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::ContactMetric => "Phi - d eta",
            Quantity::Killing => "L_xi g",
            Quantity::DPhi => "d Phi",
            Quantity::DEta => "d eta",
            Quantity::NablaPhi => "nabla phi",
            Quantity::QScalar => "Q|D - lambda id",
            Quantity::QNu => "Q|D - nu id",
            Quantity::IotaXiDeta => "i_xi d eta",
            Quantity::NablaXiXi => "nabla_xi xi",
            Quantity::LieXiDeta => "L_xi d eta",
            Quantity::LieXiDetaSplit => "L_xi d eta = (L_xi g)(., phi .) + g(., N3 .)",
            Quantity::HXi => "h xi",
            Quantity::H => "h",
            Quantity::Normal => "N1",
            Quantity::Nijenhuis => "[phi,phi]",
            Quantity::N1MinusNijenhuis => "N1 - [phi,phi]",
            Quantity::N2 => "N2",
            Quantity::N2Lie => "N2 forms agree",
            Quantity::N2Printed => "N2 closed form under N1 = 0",
            Quantity::N3 => "N3",
            Quantity::N3Lie => "N3 = L_xi phi",
            Quantity::N4 => "N4",
            Quantity::N4Lie => "N4 forms agree",
            Quantity::Master => "nabla phi master identity",
            Quantity::Corollary => "nabla phi contact identity",
            Quantity::NablaXiPhi => "2 g((nabla_xi phi)Y, Z) = N5(xi,Y,Z)",
            Quantity::N5XiSlot => "N5(X,xi,Z) reduced form",
            Quantity::N5XiFirst => "N5(xi,Y,Z) reduced form",
            Quantity::N5XiXi => "N5(xi,xi,.) = N5(xi,.,xi) = 0",
            Quantity::N5Skew => "N5 skew in Y,Z",
            Quantity::N5 => "N5",
            Quantity::ExampleGeneral => "N5 scalar-Q form (relative)",
            Quantity::ExampleXiFirst => "N5(xi,Y,Z) scalar-Q form (relative)",
            Quantity::ExampleXiSlot => "N5(X,xi,Z) scalar-Q form (relative)",
            Quantity::HAntisym => "h - h* identity",
            Quantity::HAnticommute => "h phi + phi h identity",
            Quantity::QNablaXi => "Q nabla xi identity",
            Quantity::HPhiIdentity => "N5 / h phi identity",
            Quantity::SasakianNablaPhi => "weak Sasakian nabla phi",
            Quantity::Cosym61 => "2 g((nabla_X phi)Y, Z) = N5",
            Quantity::Cosym61b => "6 d Phi = cyclic N5",
            Quantity::Cosym61c => "2 g([phi,phi](X,Y), Z) = cyclic N5(phi .)",
        }
    }

    /// Compared by `|a - b| / max(|a|, |b|, 1)` instead of `|a - b|`.
    pub fn is_relative(self) -> bool {
        matches!(
            self,
            Quantity::ExampleGeneral | Quantity::ExampleXiFirst | Quantity::ExampleXiSlot
        )
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Sup of every [`Quantity`] with the sample index where it was attained.
#[derive(Clone, Debug, PartialEq)]
pub struct Survey {
    pub plan: SamplePlan,
    /// Axiom residual from re-validation.
    pub axioms: f64,
    /// `tr(Q|D) / 2n` at the first sample point.
    pub lambda: f64,
    sup: Vec<f64>,
    worst: Vec<usize>,
}

impl Survey {
    pub fn get(&self, q: Quantity) -> f64 {
        self.sup[q as usize]
    }

    pub fn worst_index(&self, q: Quantity) -> usize {
        self.worst[q as usize]
    }
}

fn d_projector(f: &Frame) -> Vec<f64> {
    let n = f.dim();
    linalg::sub(&linalg::identity(n), &linalg::outer(f.xi_value(), f.eta_value()))
}

/// `Q P - c P` with `P = id - xi (x) eta`.
fn q_scalar_residual(f: &Frame, c: f64) -> f64 {
    let p = d_projector(f);
    let qp = linalg::mat_mul(f.q_matrix(), &p, f.dim());
    linalg::sup(&linalg::sub(&qp, &linalg::scaled(&p, c)))
}

/// `tr(Q P) / 2n`.
pub fn lambda_at(f: &Frame) -> f64 {
    let n = f.dim();
    let qp = linalg::mat_mul(f.q_matrix(), &d_projector(f), n);
    (0..n).map(|i| qp[i * n + i]).sum::<f64>() / (n - 1) as f64
}

fn point_quantities(f: &Frame, plan: &SamplePlan, index: usize, lambda: f64) -> Result<Vec<f64>, TensorError> {
    let n = f.dim();
    let mut out = alloc::vec![0.0f64; Quantity::COUNT];
    let mut put = |q: Quantity, v: f64| {
        let slot = &mut out[q as usize];
        // a NaN must survive the max
        if !slot.is_nan() && (v.is_nan() || v > *slot) {
            *slot = v;
        }
    };

    let big_phi = f.big_phi_matrix();
    let deta = f.deta_matrix().to_vec();
    let xi = f.xi_value().to_vec();
    let h = f.h();
    let h_star = f.h_star();
    let lie_g = f.lie_xi_g();
    let lie_deta = f.lie_xi_deta()?;
    let nabla_phi = f.nabla_phi_tensor();
    let xi_field = f.xi_field();
    let qt = f.qt_matrix();
    let qt_xi_xi = f.g(&linalg::mat_vec(&qt, &xi), &xi);

    put(Quantity::ContactMetric, linalg::sup(&linalg::sub(&big_phi, &deta)));
    put(Quantity::Killing, linalg::sup(&lie_g));
    put(Quantity::DPhi, linalg::sup(f.dphi_tensor()));
    put(Quantity::DEta, linalg::sup(&deta));
    put(Quantity::NablaPhi, linalg::sup(&nabla_phi));
    put(Quantity::QScalar, q_scalar_residual(f, lambda));
    put(Quantity::QNu, q_scalar_residual(f, f.nu()));
    put(Quantity::IotaXiDeta, linalg::sup(&linalg::vec_mat(&xi, &deta)));
    put(Quantity::NablaXiXi, linalg::sup(&f.nabla_xi(&xi)));
    put(Quantity::LieXiDeta, linalg::sup(&lie_deta));
    put(Quantity::HXi, linalg::sup(&linalg::mat_vec(&h, &xi)));
    put(Quantity::H, linalg::sup(&h));

    let a_op = f.a();
    let hphi = linalg::mat_mul(&h, f.phi_matrix(), n);
    let e51_op = linalg::add(
        &linalg::mat_mul(&linalg::sub(&h_star, &h), f.phi_matrix(), n),
        &linalg::scaled(&linalg::mat_mul(f.phi_matrix(), &h, n), 2.0),
    );
    let bilinear = |m: &[f64], u: &[f64], v: &[f64]| linalg::dot(u, &linalg::mat_vec(m, v));

    for t in 0..TUPLES_PER_POINT {
        let x = plan.test_vector(n, index, t, 0);
        let y = plan.test_vector(n, index, t, 1);
        let z = plan.test_vector(n, index, t, 2);
        // point vectors extend as constant-coefficient fields; xi enters as
        // the structure's own field
        let cst = |v: &[f64]| -> Vec<Jet> { f.constant(v) };
        let (xj, yj, zj) = (&cst(&x), &cst(&y), &cst(&z));
        let (x, y, z) = (&x, &y, &z);
        let (px, py, pz) = (f.phi(x), f.phi(y), f.phi(z));

        // torsion tensors
        let n1 = f.n1(xj, yj);
        let nij = f.nijenhuis(xj, yj);
        put(Quantity::Normal, linalg::sup(&n1));
        put(Quantity::Nijenhuis, linalg::sup(&nij));
        put(Quantity::N1MinusNijenhuis, linalg::sup(&linalg::sub(&n1, &nij)));
        let n2 = f.n2(x, y);
        put(Quantity::N2, n2.abs());
        put(Quantity::N2Lie, (n2 - f.n2_lie(xj, yj)).abs());
        let printed = f.eta(&f.bracket(&f.qt_field(&f.top_field(xj)), &f.phi_field(yj)))
            + qt_xi_xi * f.eta(&f.bracket(&f.phi_field(xj), yj));
        put(Quantity::N2Printed, (n2 - printed).abs());
        let n3 = f.n3(xj);
        put(Quantity::N3, linalg::sup(&n3));
        let two_h_x = linalg::scaled(&linalg::mat_vec(&h, x), 2.0);
        put(Quantity::N3Lie, linalg::sup(&linalg::sub(&n3, &two_h_x)));
        let n4 = f.n4(x);
        put(Quantity::N4, n4.abs());
        put(Quantity::N4Lie, (n4 - f.n4_lie(xj)).abs());
        let split = bilinear(&lie_deta, x, y)
            - bilinear(&lie_g, x, &py)
            - f.g(x, &linalg::scaled(&linalg::mat_vec(&h, y), 2.0));
        put(Quantity::LieXiDetaSplit, split.abs());

        // nabla phi identities
        let n5 = f.n5(xj, yj, zj);
        let lhs = 2.0 * f.g(&f.nabla_phi(x, y), z);
        let n1_yz = f.n1(yj, zj);
        let shared = f.g(&n1_yz, &px) + 2.0 * f.deta(&py, x) * f.eta(z) - 2.0 * f.deta(&pz, x) * f.eta(y) + n5;
        let master = 3.0 * f.dphi(x, &py, &pz) - 3.0 * f.dphi(x, y, z) + f.n2(y, z) * f.eta(x) + shared;
        put(Quantity::Master, (lhs - master).abs());
        put(Quantity::Corollary, (lhs - shared).abs());
        let lhs_xi = 2.0 * f.g(&f.nabla_phi(&xi, y), z);
        let n5_xi_first = f.n5(&xi_field, yj, zj);
        put(Quantity::NablaXiPhi, (lhs_xi - n5_xi_first).abs());
        put(Quantity::N5, n5.abs());
        put(Quantity::N5Skew, (n5 + f.n5(xj, zj, yj)).abs());

        // reduced forms with xi in a slot
        let br_xi_pz = f.top(&f.bracket(&xi_field, &f.phi_field(zj)));
        let br_xi_py = f.top(&f.bracket(&xi_field, &f.phi_field(yj)));
        let phi_br_xi_z = f.phi(&f.bracket(&xi_field, zj));
        let n5_xi_slot = f.n5(xj, &xi_field, zj);
        let slot_form = linalg::sub(&br_xi_pz, &phi_br_xi_z);
        put(Quantity::N5XiSlot, (n5_xi_slot - f.g(&slot_form, &f.qt(x))).abs());
        put(
            Quantity::N5XiFirst,
            (n5_xi_first - (f.g(&br_xi_pz, &f.qt(y)) - f.g(&br_xi_py, &f.qt(z)))).abs(),
        );
        put(Quantity::N5XiXi, f.n5(&xi_field, &xi_field, zj).abs());
        put(Quantity::N5XiXi, f.n5(&xi_field, yj, &xi_field).abs());

        // scalar-Q closed forms
        let c = lambda - 1.0;
        let (pyj, pzj) = (f.phi_field(yj), f.phi_field(zj));
        let general = c
            * (f.along(&pz, &f.g_jet(&f.top_field(xj), yj)) - f.along(&py, &f.g_jet(&f.top_field(xj), zj))
                + f.g(&f.top(&f.bracket(xj, &pzj)), y)
                - f.g(&f.top(&f.bracket(xj, &pyj)), z)
                + f.g(
                    &linalg::sub(
                        &linalg::sub(&f.top(&f.bracket(yj, &pzj)), &f.top(&f.bracket(zj, &pyj))),
                        &f.phi(&f.bracket(yj, zj)),
                    ),
                    x,
                ));
        put(Quantity::ExampleGeneral, relative(n5, general));
        let xi_first = c * (f.g(&br_xi_pz, y) - f.g(&br_xi_py, z));
        put(Quantity::ExampleXiFirst, relative(n5_xi_first, xi_first));
        let xi_slot = c * f.g(&slot_form, x);
        put(Quantity::ExampleXiSlot, relative(n5_xi_slot, xi_slot));

        // h identities
        let br_xi_px = f.top(&f.bracket(&xi_field, &f.phi_field(xj)));
        let e31 = bilinear(f.metric(), &linalg::mat_vec(&linalg::sub(&h, &h_star), x), y)
            - (f.g(&br_xi_py, &f.qt(x)) - f.g(&br_xi_px, &f.qt(y)));
        put(Quantity::HAntisym, e31.abs());
        let qtx = f.qt_field(xj);
        let rhs = linalg::scaled(
            &linalg::sub(&f.bracket(&qtx, &xi_field), &f.qt(&f.bracket(xj, &xi_field))),
            0.5,
        );
        put(
            Quantity::HAnticommute,
            linalg::sup(&linalg::sub(&linalg::mat_vec(&a_op, x), &rhs)),
        );
        let e30_lhs = f.g(&f.q(&f.nabla_xi(x)), z);
        let phz = linalg::add(&pz, &linalg::mat_vec(&hphi, z));
        let e30_rhs = f.g(&phz, &f.q(x)) - 0.5 * f.n5(xj, &xi_field, &cst(&pz));
        put(Quantity::QNablaXi, (e30_lhs - e30_rhs).abs());
        let e51_lhs = f.n5(&cst(&f.phi(&py)), &xi_field, xj) - f.n5(&cst(&px), &xi_field, &cst(&py));
        let e51_rhs = 2.0 * f.g(&linalg::mat_vec(&e51_op, x), y);
        put(Quantity::HPhiIdentity, (e51_lhs - e51_rhs).abs());

        // weak Sasakian
        let qx = f.q(x);
        let sas = f.g(&f.nabla_phi(x, y), z) - (f.g(&qx, y) * f.eta(z) - f.g(&qx, z) * f.eta(y) + 0.5 * n5);
        put(Quantity::SasakianNablaPhi, sas.abs());

        // cosymplectic
        put(Quantity::Cosym61, (lhs - n5).abs());
        let cyclic = n5 + f.n5(yj, zj, xj) + f.n5(zj, xj, yj);
        put(Quantity::Cosym61b, (6.0 * f.dphi(x, y, z) - cyclic).abs());
        let cyclic_phi = f.n5(&cst(&px), yj, zj) + f.n5(&cst(&py), zj, xj) + f.n5(&cst(&pz), xj, yj);
        put(Quantity::Cosym61c, (2.0 * f.g(&nij, z) - cyclic_phi).abs());
    }
    Ok(out)
}

/// Sup of every quantity over the plan.
pub fn survey<E: Executor>(s: &Structure, plan: &SamplePlan, tol: f64, exec: &E) -> Result<Survey, ClassifyError> {
    let chart = s.chart();
    let axioms = structure::check(&s.to_raw(), plan, tol, exec)?.max_residual();
    let first = plan.point(chart, 0);
    let eval_err = |point: &[f64]| {
        let point = point.to_vec();
        move |source| ClassifyError::Evaluation { point, source }
    };
    let lambda = lambda_at(&s.frame(&first).map_err(eval_err(&first))?);
    let rows = exec.map_indexed(plan.count, |i| {
        let p = plan.point(chart, i);
        let f = s.frame(&p).map_err(eval_err(&p))?;
        point_quantities(&f, plan, i, lambda).map_err(eval_err(&p))
    });
    let mut sup = alloc::vec![0.0f64; Quantity::COUNT];
    let mut worst = alloc::vec![0usize; Quantity::COUNT];
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row?.into_iter().enumerate() {
            if (v.is_nan() && !sup[k].is_nan()) || v > sup[k] {
                sup[k] = v;
                worst[k] = i;
            }
        }
    }
    Ok(Survey {
        plan: *plan,
        axioms,
        lambda,
        sup,
        worst,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flag {
    WeakAlmostContactMetric,
    WeakContactMetric,
    WeakKContact,
    Normal,
    WeakSasakian,
    WeakAlmostCosymplectic,
    WeakCosymplectic,
    PhiParallel,
    QScalarOnD,
}

impl Flag {
    pub const ALL: [Flag; 9] = [
        Flag::WeakAlmostContactMetric,
        Flag::WeakContactMetric,
        Flag::WeakKContact,
        Flag::Normal,
        Flag::WeakSasakian,
        Flag::WeakAlmostCosymplectic,
        Flag::WeakCosymplectic,
        Flag::PhiParallel,
        Flag::QScalarOnD,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Flag::WeakAlmostContactMetric => "weak_almost_contact_metric",
            Flag::WeakContactMetric => "weak_contact_metric",
            Flag::WeakKContact => "weak_K_contact",
            Flag::Normal => "normal",
            Flag::WeakSasakian => "weak_Sasakian",
            Flag::WeakAlmostCosymplectic => "weak_almost_cosymplectic",
            Flag::WeakCosymplectic => "weak_cosymplectic",
            Flag::PhiParallel => "phi_parallel",
            Flag::QScalarOnD => "Q_scalar_on_D",
        }
    }

    pub fn residual(self, s: &Survey) -> f64 {
        use Quantity as Q;
        let max = |qs: &[Quantity]| qs.iter().fold(0.0f64, |m, &q| m.max(s.get(q)));
        match self {
            Flag::WeakAlmostContactMetric => s.axioms,
            Flag::WeakContactMetric => s.get(Q::ContactMetric),
            Flag::WeakKContact => s.get(Q::Killing),
            Flag::Normal => s.get(Q::Normal),
            Flag::WeakSasakian => max(&[Q::Normal, Q::ContactMetric]),
            Flag::WeakAlmostCosymplectic => max(&[Q::DPhi, Q::DEta]),
            Flag::WeakCosymplectic => max(&[Q::DPhi, Q::DEta, Q::Normal]),
            Flag::PhiParallel => s.get(Q::NablaPhi),
            Flag::QScalarOnD => s.get(Q::QScalar),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlagResult {
    pub flag: Flag,
    pub holds: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub tol: f64,
    pub lambda: f64,
    pub flags: Vec<FlagResult>,
}

impl Classification {
    pub fn from_survey(survey: &Survey, tol: f64) -> Classification {
        let flags = Flag::ALL
            .iter()
            .map(|&flag| {
                let residual = flag.residual(survey);
                FlagResult {
                    flag,
                    holds: residual <= tol,
                    residual,
                }
            })
            .collect();
        Classification {
            tol,
            lambda: survey.lambda,
            flags,
        }
    }

    pub fn get(&self, flag: Flag) -> &FlagResult {
        &self.flags[flag as usize]
    }

    pub fn holds(&self, flag: Flag) -> bool {
        self.get(flag).holds
    }
}

pub fn classify<E: Executor>(
    s: &Structure,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<Classification, ClassifyError> {
    Ok(Classification::from_survey(&survey(s, plan, tol, exec)?, tol))
}

// -- check registry -----------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    Always,
    Flags(&'static [Flag]),
    /// Any one of the flags suffices.
    AnyOf(&'static [Flag]),
}

impl Hypothesis {
    fn holds(self, c: &Classification) -> bool {
        match self {
            Hypothesis::Always => true,
            Hypothesis::Flags(fs) => fs.iter().all(|&f| c.holds(f)),
            Hypothesis::AnyOf(fs) => fs.iter().any(|&f| c.holds(f)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    pub quantity: Quantity,
    /// Bound is `factor * tol`.
    pub factor: f64,
    /// Implication premise: the component applies only when this quantity
    /// is within `tol`.
    pub premise: Option<Quantity>,
    /// Extra flag requirement on top of the check's own hypothesis.
    pub requires: Option<Flag>,
    /// Reported but never fails the check.
    pub advisory: bool,
}

const fn c(quantity: Quantity) -> Component {
    Component {
        quantity,
        factor: 1.0,
        premise: None,
        requires: None,
        advisory: false,
    }
}

const fn implied(premise: Quantity, quantity: Quantity) -> Component {
    Component {
        quantity,
        factor: 10.0,
        premise: Some(premise),
        requires: None,
        advisory: false,
    }
}

const fn ten(quantity: Quantity) -> Component {
    Component {
        factor: 10.0,
        ..c(quantity)
    }
}

const fn advisory(quantity: Quantity) -> Component {
    Component {
        advisory: true,
        ..c(quantity)
    }
}

const fn when(flag: Flag, quantity: Quantity) -> Component {
    Component {
        requires: Some(flag),
        ..c(quantity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckSpec {
    pub id: &'static str,
    pub anchor: &'static str,
    pub hypothesis: Hypothesis,
    pub components: &'static [Component],
}

use Flag as F;
use Quantity as Q;

pub const REGISTRY: [CheckSpec; 12] = [
    CheckSpec {
        id: "T1",
        anchor: "normality forces N3 = N4 = 0",
        hypothesis: Hypothesis::Flags(&[F::Normal]),
        components: &[ten(Q::N3), ten(Q::N4), advisory(Q::N2Printed)],
    },
    CheckSpec {
        id: "P1",
        anchor: "i_xi d eta = 0 and xi-curves are geodesics",
        hypothesis: Hypothesis::AnyOf(&[F::Normal, F::WeakContactMetric]),
        components: &[c(Q::IotaXiDeta), c(Q::NablaXiXi)],
    },
    CheckSpec {
        id: "T2",
        anchor: "contact metric: N2 = N4 = 0, xi Killing iff N3 = 0",
        hypothesis: Hypothesis::Flags(&[F::WeakContactMetric]),
        components: &[
            c(Q::N2),
            c(Q::N4),
            c(Q::N2Lie),
            c(Q::N4Lie),
            c(Q::N3Lie),
            c(Q::LieXiDeta),
            c(Q::LieXiDetaSplit),
            implied(Q::Killing, Q::N3),
            implied(Q::N3, Q::Killing),
        ],
    },
    CheckSpec {
        id: "L1",
        anchor: "nabla phi through dPhi, N1, N2, d eta and N5",
        hypothesis: Hypothesis::Always,
        components: &[
            c(Q::Master),
            c(Q::N5Skew),
            c(Q::N5XiSlot),
            c(Q::N5XiFirst),
            c(Q::N5XiXi),
            when(F::WeakContactMetric, Q::Corollary),
            when(F::WeakContactMetric, Q::NablaXiPhi),
            when(F::QScalarOnD, Q::ExampleGeneral),
            when(F::QScalarOnD, Q::ExampleXiFirst),
            when(F::QScalarOnD, Q::ExampleXiSlot),
        ],
    },
    CheckSpec {
        id: "L2",
        anchor: "h xi = 0 and the h-lemma identities",
        hypothesis: Hypothesis::Flags(&[F::WeakContactMetric]),
        components: &[c(Q::HXi), c(Q::HAntisym), c(Q::HAnticommute), c(Q::QNablaXi)],
    },
    CheckSpec {
        id: "P2",
        anchor: "N5 pairing with (h* - h) phi + 2 phi h",
        hypothesis: Hypothesis::Flags(&[F::WeakContactMetric]),
        components: &[c(Q::HPhiIdentity)],
    },
    CheckSpec {
        id: "S1",
        anchor: "weak Sasakian nabla phi formula; h = 0; xi Killing",
        hypothesis: Hypothesis::Flags(&[F::WeakSasakian]),
        components: &[c(Q::SasakianNablaPhi), c(Q::H), c(Q::Killing)],
    },
    CheckSpec {
        id: "S2",
        anchor: "weak Sasakian implies Q|D = nu id",
        hypothesis: Hypothesis::Flags(&[F::WeakSasakian]),
        components: &[c(Q::QNu)],
    },
    CheckSpec {
        id: "C1",
        anchor: "almost cosymplectic: N2 = N4 = 0, N1 = [phi,phi], Killing iff N3 = 0",
        hypothesis: Hypothesis::Flags(&[F::WeakAlmostCosymplectic]),
        components: &[
            c(Q::N2),
            c(Q::N4),
            c(Q::N1MinusNijenhuis),
            implied(Q::Killing, Q::N3),
            implied(Q::N3, Q::Killing),
        ],
    },
    CheckSpec {
        id: "C2",
        anchor: "almost cosymplectic: xi-curves are geodesics",
        hypothesis: Hypothesis::Flags(&[F::WeakAlmostCosymplectic]),
        components: &[c(Q::NablaXiXi)],
    },
    CheckSpec {
        id: "C3",
        anchor: "cosymplectic nabla phi, d Phi and [phi,phi] through N5",
        hypothesis: Hypothesis::Flags(&[F::WeakCosymplectic]),
        components: &[c(Q::Cosym61), c(Q::Cosym61b), c(Q::Cosym61c)],
    },
    CheckSpec {
        id: "C4",
        anchor: "nabla phi = 0 gives weak cosymplectic with N5 = 0",
        hypothesis: Hypothesis::Flags(&[F::PhiParallel]),
        components: &[ten(Q::DPhi), ten(Q::DEta), ten(Q::Normal), c(Q::N5)],
    },
];

pub fn check_spec(id: &str) -> Result<&'static CheckSpec, ClassifyError> {
    REGISTRY
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| ClassifyError::UnknownCheckId(id.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentResult {
    pub name: &'static str,
    pub residual: f64,
    pub bound: f64,
    pub applicable: bool,
    pub advisory: bool,
    pub relative: bool,
}

impl ComponentResult {
    pub fn passed(&self) -> bool {
        self.residual <= self.bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub id: &'static str,
    pub anchor: &'static str,
    /// Largest residual among applicable, non-advisory components.
    pub residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub components: Vec<ComponentResult>,
}

impl CheckResult {
    pub fn component(&self, q: Quantity) -> Option<&ComponentResult> {
        self.components.iter().find(|c| c.name == q.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub classification: Classification,
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }
}

pub fn run_check(spec: &CheckSpec, survey: &Survey, class: &Classification) -> CheckResult {
    let tol = class.tol;
    let applies = spec.hypothesis.holds(class);
    let components: Vec<ComponentResult> = spec
        .components
        .iter()
        .map(|comp| {
            let premise = comp.premise.is_none_or(|p| survey.get(p) <= tol);
            let flag = comp.requires.is_none_or(|f| class.holds(f));
            ComponentResult {
                name: comp.quantity.name(),
                residual: survey.get(comp.quantity),
                bound: comp.factor * tol,
                applicable: applies && premise && flag,
                advisory: comp.advisory,
                relative: comp.quantity.is_relative(),
            }
        })
        .collect();
    let counted = components.iter().filter(|c| c.applicable && !c.advisory);
    let residual = counted.clone().fold(0.0f64, |m, c| m.max(c.residual));
    let verdict = if !applies {
        Verdict::NotApplicable
    } else if counted.clone().all(ComponentResult::passed) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    CheckResult {
        id: spec.id,
        anchor: spec.anchor,
        residual,
        tol,
        verdict,
        components,
    }
}

/// Runs one registered check, or all of them for `None`.
pub fn verify<E: Executor>(
    s: &Structure,
    check: Option<&str>,
    plan: &SamplePlan,
    tol: f64,
    exec: &E,
) -> Result<CheckReport, ClassifyError> {
    let specs: Vec<&CheckSpec> = match check {
        Some(id) => alloc::vec![check_spec(id)?],
        None => REGISTRY.iter().collect(),
    };
    let survey = survey(s, plan, tol, exec)?;
    let classification = Classification::from_survey(&survey, tol);
    let checks = specs
        .into_iter()
        .map(|spec| run_check(spec, &survey, &classification))
        .collect();
    Ok(CheckReport { classification, checks })
}
