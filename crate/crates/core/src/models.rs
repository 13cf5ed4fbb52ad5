//! Four-band Dirac models H = Σ F_j Σ_j, the Hopf projector, symmetry checks,
//! and maps S⁴ → S⁴ of every even degree that intertwine τ with ϖ.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{antipodal, collapse_map, stereo4, tau, varpi, Grid, Vec4, Vec5};
use crate::linalg::{c, frob, C64, I, M2, M4};
use crate::numerics::par_argmax;

// ---------------------------------------------------------------------------
// Clifford representation

pub fn pauli() -> [M2; 3] {
    let z = c(0.0);
    let o = c(1.0);
    [
        M2::new(z, o, o, z),
        M2::new(z, -I, I, z),
        M2::new(o, z, z, -o),
    ]
}

fn kron(a: &M2, b: &M2) -> M4 {
    M4::from_fn(|r, s| a[(r / 2, s / 2)] * b[(r % 2, s % 2)])
}

/// Σ₀ = σ₁⊗σ₃, Σ₁ = σ₂⊗σ₃, Σ₂ = 1⊗σ₁, Σ₃ = 1⊗σ₂, Σ₄ = σ₃⊗σ₃.
pub fn clifford() -> &'static [M4; 5] {
    static SIGMA: OnceLock<[M4; 5]> = OnceLock::new();
    SIGMA.get_or_init(|| {
        let [s1, s2, s3] = pauli();
        let one = M2::identity();
        [kron(&s1, &s3), kron(&s2, &s3), kron(&one, &s1), kron(&one, &s2), kron(&s3, &s3)]
    })
}

/// Σ_j a_j Σ_j.
#[inline]
pub fn clifford_combination(a: &[f64; 5]) -> M4 {
    let s = clifford();
    let mut h = M4::zeros();
    for j in 0..5 {
        if a[j] != 0.0 {
            h += s[j] * c(a[j]);
        }
    }
    h
}

/// ½(1 + Σ k_j Σ_j) for k on S⁴.
#[inline]
pub fn hopf_projector(k: &Vec5) -> M4 {
    (M4::identity() + clifford_combination(k)) * c(0.5)
}

// ---------------------------------------------------------------------------
// rational coefficient functions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    fn from_sign(s: f64) -> Self {
        if s > 0.0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "+",
            Parity::Odd => "-",
        })
    }
}

pub fn parity_string(p: &[Parity; 5]) -> String {
    let s: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", s.join(","))
}

/// Real polynomial in κ₁..κ₄ as (exponents, coefficient) terms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<([u32; 4], f64)>,
}

impl Polynomial {
    pub fn new(terms: Vec<([u32; 4], f64)>) -> Self {
        Polynomial { terms }
    }

    pub fn constant(x: f64) -> Self {
        Polynomial { terms: vec![([0; 4], x)] }
    }

    /// Value and gradient.
    #[inline]
    pub fn eval_grad(&self, k: &Vec4) -> (f64, [f64; 4]) {
        let mut v = 0.0;
        let mut g = [0.0; 4];
        for (e, coef) in &self.terms {
            let p: [f64; 4] = std::array::from_fn(|a| powu(k[a], e[a]));
            v += coef * p[0] * p[1] * p[2] * p[3];
            for a in 0..4 {
                if e[a] == 0 {
                    continue;
                }
                let mut d = coef * e[a] as f64 * powu(k[a], e[a] - 1);
                for b in 0..4 {
                    if b != a {
                        d *= p[b];
                    }
                }
                g[a] += d;
            }
        }
        (v, g)
    }

    #[inline]
    pub fn eval(&self, k: &Vec4) -> f64 {
        self.terms
            .iter()
            .map(|(e, coef)| coef * powu(k[0], e[0]) * powu(k[1], e[1]) * powu(k[2], e[2]) * powu(k[3], e[3]))
            .sum()
    }

    /// Parity under κ ↦ −κ when every monomial agrees; `None` for mixed parity.
    pub fn parity(&self) -> Option<Parity> {
        let mut seen: Option<Parity> = None;
        for (e, coef) in &self.terms {
            if *coef == 0.0 {
                continue;
            }
            let p = if e.iter().sum::<u32>() % 2 == 0 { Parity::Even } else { Parity::Odd };
            match seen {
                None => seen = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }
}

#[inline]
fn powu(x: f64, e: u32) -> f64 {
    match e {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => x.powi(e as i32),
    }
}

/// P(κ)/(1+‖κ‖²)^p.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rational {
    pub numerator: Polynomial,
    pub power: u32,
}

impl Rational {
    #[inline]
    pub fn eval_grad(&self, k: &Vec4) -> (f64, [f64; 4]) {
        let s = 1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3];
        let (p, dp) = self.numerator.eval_grad(k);
        let sp = s.powi(-(self.power as i32));
        let f = p * sp;
        let t = 2.0 * self.power as f64 * p * sp / s;
        (f, std::array::from_fn(|a| dp[a] * sp - t * k[a]))
    }

    #[inline]
    pub fn eval(&self, k: &Vec4) -> f64 {
        let s = 1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3];
        self.numerator.eval(k) * s.powi(-(self.power as i32))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMap {
    components: [Rational; 5],
    parity: [Parity; 5],
}

/// JSON layout: five numerators as lists of [exponents, coefficient] plus five powers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialConfig {
    pub numerators: Vec<Vec<([u32; 4], f64)>>,
    pub powers: Vec<u32>,
}

impl CoefficientMap {
    /// Parities are read off the monomials; a component of mixed parity is rejected.
    pub fn new(components: [Rational; 5]) -> Result<Self> {
        let mut parity = [Parity::Even; 5];
        for (j, comp) in components.iter().enumerate() {
            parity[j] = comp.numerator.parity().ok_or_else(|| {
                Error::InvalidInput(format!("component F{j} mixes even and odd monomials; it has no parity"))
            })?;
        }
        Ok(CoefficientMap { components, parity })
    }

    pub fn with_declared_parity(components: [Rational; 5], declared: [Parity; 5]) -> Result<Self> {
        let map = Self::new(components)?;
        if map.parity != declared {
            return Err(Error::InvalidInput(format!(
                "declared parity {} does not hold; the components have parity {}",
                parity_string(&declared),
                parity_string(&map.parity)
            )));
        }
        Ok(map)
    }

    pub fn from_config(cfg: &PolynomialConfig) -> Result<Self> {
        if cfg.numerators.len() != 5 || cfg.powers.len() != 5 {
            return Err(Error::InvalidInput(format!(
                "a coefficient map needs 5 numerators and 5 powers (got {} and {})",
                cfg.numerators.len(),
                cfg.powers.len()
            )));
        }
        let components: [Rational; 5] = std::array::from_fn(|j| Rational {
            numerator: Polynomial::new(cfg.numerators[j].clone()),
            power: cfg.powers[j],
        });
        Self::new(components)
    }

    pub fn to_config(&self) -> PolynomialConfig {
        PolynomialConfig {
            numerators: self.components.iter().map(|r| r.numerator.terms.clone()).collect(),
            powers: self.components.iter().map(|r| r.power).collect(),
        }
    }

    pub fn parity(&self) -> [Parity; 5] {
        self.parity
    }

    pub fn components(&self) -> &[Rational; 5] {
        &self.components
    }

    #[inline]
    pub fn eval(&self, k: &Vec4) -> [f64; 5] {
        std::array::from_fn(|j| self.components[j].eval(k))
    }

    /// Values and exact first derivatives, `grad[j][a]` = ∂_a F_j.
    #[inline]
    pub fn jet(&self, k: &Vec4) -> ([f64; 5], [[f64; 4]; 5]) {
        let mut f = [0.0; 5];
        let mut g = [[0.0; 4]; 5];
        for j in 0..5 {
            let (v, d) = self.components[j].eval_grad(k);
            f[j] = v;
            g[j] = d;
        }
        (f, g)
    }

    #[inline]
    pub fn q(&self, k: &Vec4) -> f64 {
        self.eval(k).iter().map(|x| x * x).sum()
    }

    /// Replaces one component (used to build deliberately broken variants).
    pub fn with_component(&self, j: usize, r: Rational) -> Result<Self> {
        let mut comps = self.components.clone();
        comps[j] = r;
        Self::new(comps)
    }
}

fn mono(e: [u32; 4], coef: f64) -> ([u32; 4], f64) {
    (e, coef)
}

/// F₀ = (r²−1)/(r²+1), F₁ = 2(κ₁+κ₂)/(r²+1), F₂ = 4(κ₁κ₂−κ₃κ₄)/(r²+1)²,
/// F₃ = 2(κ₃+κ₄)/(r²+1), F₄ = 4(κ₁κ₄+κ₂κ₃)/(r²+1)².
pub fn standard_ansatz() -> CoefficientMap {
    let r = |terms: Vec<([u32; 4], f64)>, power| Rational { numerator: Polynomial::new(terms), power };
    let comps = [
        r(
            vec![
                mono([2, 0, 0, 0], 1.0),
                mono([0, 2, 0, 0], 1.0),
                mono([0, 0, 2, 0], 1.0),
                mono([0, 0, 0, 2], 1.0),
                mono([0, 0, 0, 0], -1.0),
            ],
            1,
        ),
        r(vec![mono([1, 0, 0, 0], 2.0), mono([0, 1, 0, 0], 2.0)], 1),
        r(vec![mono([1, 1, 0, 0], 4.0), mono([0, 0, 1, 1], -4.0)], 2),
        r(vec![mono([0, 0, 1, 0], 2.0), mono([0, 0, 0, 1], 2.0)], 1),
        r(vec![mono([1, 0, 0, 1], 4.0), mono([0, 1, 1, 0], 4.0)], 2),
    ];
    CoefficientMap::with_declared_parity(
        comps,
        [Parity::Even, Parity::Odd, Parity::Even, Parity::Odd, Parity::Even],
    )
    .expect("standard ansatz parities")
}

/// The same five functions on S⁴: (k₀, k₁+k₂, k₁k₂−k₃k₄, k₃+k₄, k₁k₄+k₂k₃).
#[inline]
pub fn ansatz_sphere(k: &Vec5) -> Vec5 {
    [k[0], k[1] + k[2], k[1] * k[2] - k[3] * k[4], k[3] + k[4], k[1] * k[4] + k[2] * k[3]]
}

#[inline]
pub fn normalize5(v: &Vec5) -> Vec5 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3] + v[4] * v[4]).sqrt();
    v.map(|x| x / n)
}

pub fn dirac_hamiltonian(f: &CoefficientMap, k: &Vec4) -> M4 {
    clifford_combination(&f.eval(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Plus,
    Minus,
}

impl Band {
    pub fn sign(self) -> f64 {
        match self {
            Band::Plus => 1.0,
            Band::Minus => -1.0,
        }
    }
}

/// P_± = ½(1 ± H/√Q).
#[inline]
pub fn band_projector(f: &[f64; 5], band: Band) -> M4 {
    let q = f.iter().map(|x| x * x).sum::<f64>();
    let s = band.sign() / q.sqrt();
    hopf_projector(&f.map(|x| x * s))
}

// ---------------------------------------------------------------------------
// symmetry choices

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JChoice {
    #[serde(rename = "1")]
    One,
    S0,
    S1,
    S2,
    S3,
    S4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    AI,
    AII,
}

impl JChoice {
    pub const ALL: [JChoice; 6] = [JChoice::One, JChoice::S0, JChoice::S2, JChoice::S4, JChoice::S1, JChoice::S3];

    pub fn matrix(self) -> M4 {
        let s = clifford();
        match self {
            JChoice::One => M4::identity(),
            JChoice::S0 => s[0],
            JChoice::S1 => s[1],
            JChoice::S2 => s[2],
            JChoice::S3 => s[3],
            JChoice::S4 => s[4],
        }
    }

    /// AI when J·conj(J) = +1, AII when it is −1.
    pub fn class(self) -> SymmetryClass {
        let j = self.matrix();
        let sq = j * j.map(|z| z.conj());
        if (sq - M4::identity()).norm() < 1e-12 {
            SymmetryClass::AI
        } else {
            SymmetryClass::AII
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "identity" => Ok(JChoice::One),
            "S0" => Ok(JChoice::S0),
            "S1" => Ok(JChoice::S1),
            "S2" => Ok(JChoice::S2),
            "S3" => Ok(JChoice::S3),
            "S4" => Ok(JChoice::S4),
            other => Err(Error::InvalidInput(format!("unknown J {other:?}; expected one of 1, S0..S4"))),
        }
    }
}

impl fmt::Display for JChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JChoice::One => "1",
            JChoice::S0 => "S0",
            JChoice::S1 => "S1",
            JChoice::S2 => "S2",
            JChoice::S3 => "S3",
            JChoice::S4 => "S4",
        })
    }
}

/// Parities of F₀..F₄ demanded by J H(κ) J* = conj(H(−κ)).
pub const PARITY_TABLE: [(JChoice, [Parity; 5]); 6] = {
    use Parity::{Even as P, Odd as M};
    [
        (JChoice::One, [P, M, P, M, P]),
        (JChoice::S0, [P, P, M, P, M]),
        (JChoice::S2, [M, P, P, P, M]),
        (JChoice::S4, [M, P, M, P, P]),
        (JChoice::S1, [M, M, M, P, M]),
        (JChoice::S3, [M, P, M, M, M]),
    ]
};

pub fn parity_row(j: JChoice) -> [Parity; 5] {
    PARITY_TABLE.iter().find(|(k, _)| *k == j).map(|(_, p)| *p).expect("every J has a row")
}

/// The same parities derived from the matrices: J Σ_j J* = ε_j Σ_j and conj(Σ_j) = c_j Σ_j
/// force F_j(−κ) = ε_j c_j F_j(κ).
pub fn required_parity(j: JChoice) -> [Parity; 5] {
    let jm = j.matrix();
    let s = clifford();
    std::array::from_fn(|i| {
        let conj = jm * s[i] * jm.adjoint();
        let eps = if (conj - s[i]).norm() < 1e-12 { 1.0 } else { -1.0 };
        let cj = if (s[i].map(|z| z.conj()) - s[i]).norm() < 1e-12 { 1.0 } else { -1.0 };
        Parity::from_sign(eps * cj)
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub j: JChoice,
    pub class: SymmetryClass,
    pub max_deviation: f64,
    pub worst_point: Vec<f64>,
    pub model_parity: String,
    pub table_parity: String,
    pub parity_match: bool,
}

/// max over the grid of ‖J H(κ) J* − conj(H(−κ))‖_F, plus the parity-table comparison.
pub fn check_symmetry(f: &CoefficientMap, j: JChoice, grid: &Grid) -> SymmetryReport {
    let jm = j.matrix();
    let jd = jm.adjoint();
    let (worst, dev) = par_argmax(grid.len(), |i| {
        let k = grid.point4(i);
        let h = dirac_hamiltonian(f, &k);
        let hm = dirac_hamiltonian(f, &k.map(|x| -x));
        frob(&(jm * h * jd - hm.map(|z| z.conj())))
    });
    let row = parity_row(j);
    SymmetryReport {
        j,
        class: j.class(),
        max_deviation: dev,
        worst_point: if grid.is_empty() { vec![] } else { grid.point(worst) },
        model_parity: parity_string(&f.parity()),
        table_parity: parity_string(&row),
        parity_match: f.parity() == row,
    }
}

// ---------------------------------------------------------------------------
// SU(2) and S³

/// The fixed identification S³ ≅ SU(2): x ↦ x₀ − i(x₁σ₁ + x₂σ₂ + x₃σ₃).
#[inline]
pub fn su2_from_s3(x: &Vec4) -> M2 {
    M2::new(
        C64::new(x[0], -x[3]),
        C64::new(-x[2], -x[1]),
        C64::new(x[2], -x[1]),
        C64::new(x[0], x[3]),
    )
}

#[inline]
pub fn s3_from_su2(u: &M2) -> Vec4 {
    [u[(0, 0)].re, -u[(0, 1)].im, -u[(0, 1)].re, -u[(0, 0)].im]
}

/// x ↦ xⁿ in SU(2), written on S³. With x = (cos α, sin α·n̂): xⁿ = (cos nα, sin nα·n̂),
/// evaluated through Chebyshev recurrences so nothing is divided by sin α.
#[inline]
pub fn s3_power(x: &Vec4, n: i32) -> Vec4 {
    let v = if n < 0 { [x[0], -x[1], -x[2], -x[3]] } else { *x };
    let m = n.unsigned_abs();
    let ct = v[0];
    // T_m(ct) and U_{m-1}(ct)
    let (mut t0, mut t1) = (1.0, ct);
    let (mut u0, mut u1) = (0.0, 1.0);
    if m == 0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    for _ in 1..m {
        let t2 = 2.0 * ct * t1 - t0;
        let u2 = 2.0 * ct * u1 - u0;
        t0 = t1;
        t1 = t2;
        u0 = u1;
        u1 = u2;
    }
    [t1, u1 * v[1], u1 * v[2], u1 * v[3]]
}

pub fn su2_power_map(n: i32) -> impl Fn(&Vec4) -> M2 + Send + Sync + Copy {
    move |x: &Vec4| su2_from_s3(&s3_power(x, n))
}

/// The ansatz restricted to the equator k₀ = 0, normalized: S³ → S³.
#[inline]
pub fn ansatz_equator(x: &Vec4) -> Vec4 {
    let f = ansatz_sphere(&[0.0, x[0], x[1], x[2], x[3]]);
    let n = (f[1] * f[1] + f[2] * f[2] + f[3] * f[3] + f[4] * f[4]).sqrt();
    [f[1] / n, f[2] / n, f[3] / n, f[4] / n]
}

// ---------------------------------------------------------------------------
// maps S⁴ → S⁴

pub trait SphereMap: Send + Sync {
    fn apply(&self, k: &Vec5) -> Vec5;
}

impl<F: Fn(&Vec5) -> Vec5 + Send + Sync> SphereMap for F {
    fn apply(&self, k: &Vec5) -> Vec5 {
        self(k)
    }
}

pub fn identity_map(k: &Vec5) -> Vec5 {
    *k
}

pub const E0: Vec5 = [1.0, 0.0, 0.0, 0.0, 0.0];

/// φ_{F,±}(k) = ±F(k)/|F(k)| for the ansatz in sphere form.
#[derive(Clone, Copy, Debug)]
pub struct AnsatzMap {
    pub band: Band,
}

impl SphereMap for AnsatzMap {
    #[inline]
    fn apply(&self, k: &Vec5) -> Vec5 {
        let f = normalize5(&ansatz_sphere(k));
        if self.band == Band::Plus {
            f
        } else {
            antipodal(&f)
        }
    }
}

/// ±F/√Q for a general coefficient map, read through the chart; the north pole takes the
/// limit value along a far-out ray.
#[derive(Clone, Debug)]
pub struct ChartCoefficientMap {
    pub map: CoefficientMap,
    pub band: Band,
}

const FAR: f64 = 1e7;

impl SphereMap for ChartCoefficientMap {
    fn apply(&self, k: &Vec5) -> Vec5 {
        let den = 1.0 - k[0];
        let kappa: Vec4 = if den > 1.0 / (FAR * FAR) {
            [k[1] / den, k[2] / den, k[3] / den, k[4] / den]
        } else {
            [FAR, 0.0, 0.0, 0.0]
        };
        let f = normalize5(&self.map.eval(&kappa));
        f.map(|x| x * self.band.sign())
    }
}

pub const DEFAULT_COLLAR: f64 = 0.2;

/// Degree-2n equivariant map by hemisphere doubling: on k₄ ≥ 0, writing
/// k = cos θ e₄ + sin θ (u, 0), send k to cos β e₀ + sin β (0, g(u)) with
/// β = π(1 − s(θ/(π/2 − collar))), s(t) = 6t⁵ − 15t⁴ + 10t³, and g the power map of degree −n
/// (the sign makes both hemispheres count positively); on k₄ < 0 set φ(k) = ϖ(φ(τ(k))).
/// s is C², so pulled-back densities stay C¹ and grid quadrature converges cleanly.
#[derive(Clone, Copy, Debug)]
pub struct DoublingMap {
    pub n: u32,
    pub collar: f64,
}

impl DoublingMap {
    pub fn new(n: u32, collar: f64) -> Result<Self> {
        if !(collar > 0.0 && collar < PI / 2.0) {
            return Err(Error::InvalidInput(format!("collar must lie in (0, pi/2), got {collar}")));
        }
        Ok(DoublingMap { n, collar })
    }

    #[inline]
    fn upper(&self, k: &Vec5) -> Vec5 {
        let st = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3]).sqrt();
        let theta = st.atan2(k[4]);
        let t = (theta / (PI / 2.0 - self.collar)).clamp(0.0, 1.0);
        let beta = PI * (1.0 - t * t * t * (10.0 + t * (6.0 * t - 15.0)));
        if beta == 0.0 {
            return E0;
        }
        let (sb, cb) = beta.sin_cos();
        if st == 0.0 {
            return [cb, 0.0, 0.0, 0.0, 0.0];
        }
        let u = [k[0] / st, k[1] / st, k[2] / st, k[3] / st];
        let v = s3_power(&u, -(self.n as i32));
        [cb, sb * v[0], sb * v[1], sb * v[2], sb * v[3]]
    }
}

impl SphereMap for DoublingMap {
    #[inline]
    fn apply(&self, k: &Vec5) -> Vec5 {
        if k[4] >= 0.0 {
            self.upper(k)
        } else {
            varpi(&self.upper(&tau(k)))
        }
    }
}

/// Equivariant map S̃⁴ → Š⁴ of degree 2n.
pub fn equivariant_even_map(n: u32, collar: f64) -> Result<Box<dyn SphereMap>> {
    Ok(match n {
        0 => Box::new(|_: &Vec5| E0),
        1 => Box::new(AnsatzMap { band: Band::Plus }),
        _ => Box::new(DoublingMap::new(n, collar)?),
    })
}

/// k ↦ hopf_projector(φ(k)).
pub fn pullback_projector<'a>(phi: &'a dyn SphereMap) -> impl Fn(&Vec5) -> M4 + Send + Sync + 'a {
    move |k| hopf_projector(&phi.apply(k))
}

// ---------------------------------------------------------------------------
// model configurations

#[derive(Clone, Debug)]
pub enum Model {
    StandardAnsatz { j: JChoice },
    Hopf,
    EvenMap { n: u32, collar: f64 },
    Polynomial { map: CoefficientMap, j: JChoice },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyConfig {
    family: String,
    #[serde(default)]
    n: Option<u32>,
    #[serde(default, rename = "J")]
    j: Option<String>,
    #[serde(default)]
    collar: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyModelConfig {
    numerators: Vec<Vec<([u32; 4], f64)>>,
    powers: Vec<u32>,
    #[serde(default, rename = "J")]
    j: Option<String>,
}

impl Model {
    /// Built-in names: `hopf`, `standard-ansatz`, `even-map:<n>`, `constant`.
    pub fn builtin(name: &str) -> Result<Model> {
        match name {
            "hopf" => Ok(Model::Hopf),
            "standard-ansatz" | "ansatz" => Ok(Model::StandardAnsatz { j: JChoice::One }),
            "constant" => Ok(Model::EvenMap { n: 0, collar: DEFAULT_COLLAR }),
            other => {
                if let Some(n) = other.strip_prefix("even-map:").or_else(|| other.strip_prefix("even:")) {
                    let n = n.parse().map_err(|_| Error::InvalidInput(format!("bad even-map degree in {other:?}")))?;
                    return Ok(Model::EvenMap { n, collar: DEFAULT_COLLAR });
                }
                Err(Error::InvalidInput(format!(
                    "unknown model {other:?}; use hopf, standard-ansatz, even-map:<n>, constant, or a JSON config file"
                )))
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("family").is_some() {
            let cfg: FamilyConfig = serde_json::from_value(value)?;
            let j = cfg.j.as_deref().map(JChoice::parse).transpose()?.unwrap_or(JChoice::One);
            return match cfg.family.as_str() {
                "standard-ansatz" => Ok(Model::StandardAnsatz { j }),
                "hopf" => Ok(Model::Hopf),
                "even-map" => {
                    let n = cfg.n.ok_or_else(|| Error::InvalidInput("even-map needs \"n\"".into()))?;
                    let collar = cfg.collar.unwrap_or(DEFAULT_COLLAR);
                    DoublingMap::new(n, collar)?;
                    Ok(Model::EvenMap { n, collar })
                }
                other => Err(Error::InvalidInput(format!(
                    "unknown family {other:?}; expected standard-ansatz, hopf or even-map"
                ))),
            };
        }
        if value.get("numerators").is_some() {
            let cfg: PolyModelConfig = serde_json::from_value(value)?;
            let map = CoefficientMap::from_config(&PolynomialConfig { numerators: cfg.numerators, powers: cfg.powers })?;
            let j = cfg.j.as_deref().map(JChoice::parse).transpose()?.unwrap_or(JChoice::One);
            return Ok(Model::Polynomial { map, j });
        }
        Err(Error::InvalidInput("model config needs either \"family\" or \"numerators\"".into()))
    }

    pub fn name(&self) -> String {
        match self {
            Model::StandardAnsatz { .. } => "standard-ansatz".into(),
            Model::Hopf => "hopf".into(),
            Model::EvenMap { n, .. } => format!("even-map:{n}"),
            Model::Polynomial { .. } => "polynomial".into(),
        }
    }

    pub fn coefficient_map(&self) -> Option<CoefficientMap> {
        match self {
            Model::StandardAnsatz { .. } => Some(standard_ansatz()),
            Model::Polynomial { map, .. } => Some(map.clone()),
            _ => None,
        }
    }

    pub fn symmetry(&self) -> Option<JChoice> {
        match self {
            Model::StandardAnsatz { j } | Model::Polynomial { j, .. } => Some(*j),
            _ => None,
        }
    }

    /// The domain involution under which the projector family is Real.
    pub fn real_involution(&self) -> crate::geometry::Involution {
        match self {
            Model::Hopf => crate::geometry::Involution::Varpi,
            _ => crate::geometry::Involution::Tau,
        }
    }

    /// The classifying map into S⁴ whose Hopf pullback is the selected band projector.
    pub fn sphere_map(&self, band: Band) -> Result<Box<dyn SphereMap>> {
        let base: Box<dyn SphereMap> = match self {
            Model::Hopf => Box::new(identity_map),
            Model::StandardAnsatz { .. } => return Ok(Box::new(AnsatzMap { band })),
            Model::Polynomial { map, .. } => return Ok(Box::new(ChartCoefficientMap { map: map.clone(), band })),
            Model::EvenMap { n, collar } => equivariant_even_map(*n, *collar)?,
        };
        Ok(match band {
            Band::Plus => base,
            Band::Minus => Box::new(move |k: &Vec5| antipodal(&base.apply(k))),
        })
    }

    /// Projector in stereographic coordinates. Coefficient models use ½(1 ± H/√Q) directly.
    pub fn chart_projector(&self, band: Band) -> Result<Box<dyn Fn(&Vec4) -> M4 + Send + Sync>> {
        if let Some(f) = self.coefficient_map() {
            return Ok(Box::new(move |k: &Vec4| band_projector(&f.eval(k), band)));
        }
        let phi = self.sphere_map(band)?;
        Ok(Box::new(move |k: &Vec4| hopf_projector(&phi.apply(&stereo4(k)))))
    }

    /// Projector pulled back to T⁴ along the collapse map.
    pub fn torus_projector(&self, band: Band) -> Result<Box<dyn Fn(&Vec4) -> M4 + Send + Sync>> {
        let phi = self.sphere_map(band)?;
        Ok(Box::new(move |k: &Vec4| hopf_projector(&phi.apply(&collapse_map(k)))))
    }
}
