#![allow(dead_code)]

use wact_core::chart::Sequential;
use wact_core::deform::{self, DeformParams, Direction};
use wact_core::structure::{self, RawStructure, Structure};
use wact_core::{Chart, SamplePlan, TensorField, Valence};

pub const TOL: f64 = 1e-6;

pub fn plan() -> SamplePlan {
    SamplePlan::default()
}

pub fn small_plan() -> SamplePlan {
    SamplePlan::new(20, 42, 0.05).unwrap()
}

fn field(chart: &Chart, v: Valence, src: &[String]) -> TensorField {
    TensorField::parse(chart, v, src).unwrap()
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Classical Sasakian structure on R^{2n+1} with coordinates
/// `x1..xn, y1..yn, z`.
pub fn sasakian_raw(n: usize) -> RawStructure {
    let dim = 2 * n + 1;
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("y{i}")));
    names.push("z".into());
    let chart = Chart::new(names.clone(), vec![(-1.0, 1.0); dim]).unwrap();
    let z = dim - 1;
    let idx = |i: usize, j: usize| i * dim + j;
    let mut phi = vec!["0".to_string(); dim * dim];
    let mut eta = vec!["0".to_string(); dim];
    for i in 0..n {
        let (x, y) = (i, n + i);
        phi[idx(x, y)] = "1".into();
        phi[idx(y, x)] = "-1".into();
        phi[idx(z, y)] = names[y].clone();
        eta[x] = format!("-{}/2", names[y]);
    }
    eta[z] = "1/2".into();
    let mut xi = vec!["0".to_string(); dim];
    xi[z] = "2".into();
    // g = eta (x) eta + (1/4) sum (dx^2 + dy^2)
    let mut g = vec![String::new(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut t = format!("({})*({})", eta[i], eta[j]);
            if i == j && i != z {
                t = format!("1/4+{t}");
            }
            g[idx(i, j)] = t;
        }
    }
    RawStructure::new(
        field(&chart, Valence::ENDOMORPHISM, &phi),
        None,
        field(&chart, Valence::VECTOR, &xi),
        field(&chart, Valence::COVECTOR, &eta),
        field(&chart, Valence::BILINEAR, &g),
        Some(1.0),
    )
    .unwrap()
}

pub fn valid(raw: RawStructure) -> Structure {
    structure::validate(raw, &plan(), TOL, &Sequential).unwrap().0
}

pub fn sasakian(n: usize) -> Structure {
    valid(sasakian_raw(n))
}

/// Weak Sasakian structure with `Q|D = 2 id`, `nu = 2`.
pub fn weak_l2() -> Structure {
    let p = DeformParams::new(2.0, 2.0).unwrap();
    deform::deform(&sasakian(1), p, Direction::Inverse, &plan(), TOL, &Sequential).unwrap()
}

/// `phi = sqrt2 phi0`, `Q = 2 id`, metric left unscaled.
pub fn mismatch() -> Structure {
    let raw = sasakian_raw(1);
    let c = &raw.chart;
    let phi = field(
        c,
        Valence::ENDOMORPHISM,
        &strs(&["0", "sqrt(2)", "0", "-sqrt(2)", "0", "0", "0", "sqrt(2)*y1", "0"]),
    );
    let q = TensorField::constant(c, Valence::ENDOMORPHISM, &[2., 0., 0., 0., 2., 0., 0., 0., 2.]).unwrap();
    valid(RawStructure::new(phi, Some(q), raw.xi, raw.eta, raw.g, Some(2.0)).unwrap())
}

/// Weak almost contact metric structure with point-dependent `Q|D`.
pub fn variable_lambda() -> Structure {
    let raw = sasakian_raw(1);
    let c = &raw.chart;
    let l = "(1+x1^2/2+y1/3)";
    let phi: Vec<String> = raw.phi.sources().iter().map(|s| format!("sqrt{l}*({s})")).collect();
    let eta = raw.eta.sources();
    let xi = raw.xi.sources();
    let mut q = Vec::new();
    let mut g = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { "1" } else { "0" };
            let p = format!("({d}-({})*({}))", xi[i], eta[j]);
            q.push(format!("{l}*{p}+2*({})*({})", xi[i], eta[j]));
            let ee = format!("({})*({})", eta[i], eta[j]);
            g.push(format!("({})/sqrt{l}+(1-1/sqrt{l})*{ee}", raw.g.sources()[i * 3 + j]));
        }
    }
    valid(
        RawStructure::new(
            field(c, Valence::ENDOMORPHISM, &phi),
            Some(field(c, Valence::ENDOMORPHISM, &q)),
            raw.xi,
            raw.eta,
            field(c, Valence::BILINEAR, &g),
            Some(2.0),
        )
        .unwrap(),
    )
}

pub fn product(a: f64, nu: f64) -> Structure {
    let base = Chart::base(vec!["u".into(), "v".into()], vec![(-1.0, 1.0); 2]).unwrap();
    let ph = TensorField::constant(&base, Valence::ENDOMORPHISM, &[0.0, -a, a, 0.0]).unwrap();
    let g = TensorField::constant(&base, Valence::BILINEAR, &[1.0, 0.0, 0.0, 1.0]).unwrap();
    deform::product_construction(&ph, &g, nu, &plan(), TOL, &Sequential).unwrap()
}

/// Non-normal almost contact metric structure (`Q = id`) on R^3 with
/// `g = e^{2z} dx^2 + dy^2 + dz^2`.
pub fn twisted() -> Structure {
    let chart = Chart::cube(&["x", "y", "z"], -1.0, 1.0).unwrap();
    let f = |v, s: &[&str]| TensorField::parse(&chart, v, s).unwrap();
    valid(
        RawStructure::new(
            f(
                Valence::ENDOMORPHISM,
                &["0", "-exp(-z)", "0", "exp(z)", "0", "0", "0", "0", "0"],
            ),
            None,
            f(Valence::VECTOR, &["0", "0", "1"]),
            f(Valence::COVECTOR, &["0", "0", "1"]),
            f(Valence::BILINEAR, &["exp(2*z)", "0", "0", "0", "1", "0", "0", "0", "1"]),
            Some(1.0),
        )
        .unwrap(),
    )
}
