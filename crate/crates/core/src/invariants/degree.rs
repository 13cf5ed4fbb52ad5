use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{InvariantReport, VOL_S3, VOL_S4};
use crate::error::{Error, Result};
use crate::geometry::{
    collapse_map, s3_point, sphere_to_stereo, stereo4, stereo_to_sphere, wrap_angle, Grid, GridSpec, Vec4, Vec5,
};
use crate::linalg::{oriented_volume, volume_density4, volume_density5, C64, M2};
use crate::models::{
    ansatz_equator, equivariant_even_map, s3_power, su2_from_s3, su2_power_map, AnsatzMap, Band, SphereMap,
    DEFAULT_COLLAR,
};
use crate::numerics::{par_sum, try_par_sum};

// ---------------------------------------------------------------------------
// Cartan form

/// Step for the angle-space differences of the Cartan and volume integrands.
const ANGLE_STEP: f64 = 1e-3;

/// Orientation of the S³ ≅ SU(2) identification relative to the angle coordinates; fixed
/// by deg(identity) = +1.
const CARTAN_SIGN: f64 = 1.0;

fn inverse2(u: &M2) -> Option<M2> {
    let det = u.determinant();
    if det.norm() < 1e-12 {
        return None;
    }
    Some(M2::new(u[(1, 1)], -u[(0, 1)], -u[(1, 0)], u[(0, 0)]) / det)
}

/// deg = −(1/24π²)∫Tr[(g⁻¹dg)³] over an angle grid on S³; the integrand in coordinates is
/// 3(Tr A₁A₂A₃ − Tr A₁A₃A₂) with A_i = g⁻¹∂_i g.
pub fn cartan_degree<G>(g: G, grid: &Grid) -> Result<InvariantReport>
where
    G: Fn(&Vec4) -> M2 + Sync,
{
    if !matches!(grid.spec(), GridSpec::S3Angles { .. }) {
        return Err(Error::InvalidGrid("the Cartan form is integrated on an s3-angles grid".into()));
    }
    let h = ANGLE_STEP;
    let [re, im] = try_par_sum(grid.len(), |i| {
        let p = grid.point(i);
        let ang = [p[0], p[1], p[2]];
        let at = |a: usize, s: f64| {
            let mut q = ang;
            q[a] += s;
            g(&s3_point(q[0], q[1], q[2]))
        };
        let u = g(&s3_point(ang[0], ang[1], ang[2]));
        let inv = inverse2(&u).ok_or_else(|| Error::SingularValue(format!("non-invertible value at angles {p:?}")))?;
        let mut a = [M2::zeros(); 3];
        for (k, ak) in a.iter_mut().enumerate() {
            let d = (at(k, -2.0 * h) - at(k, 2.0 * h) + (at(k, h) - at(k, -h)) * C64::new(8.0, 0.0)) / C64::new(12.0 * h, 0.0);
            *ak = inv * d;
        }
        let t = (a[0] * a[1] * a[2]).trace() - (a[0] * a[2] * a[1]).trace();
        let v = t * (3.0 * grid.coordinate_weight(i));
        Ok::<_, Error>([v.re, v.im])
    })?;
    let k = -CARTAN_SIGN / (24.0 * PI * PI);
    Ok(InvariantReport::new("degree", "cartan", k * re, Some(grid.spec()))
        .with("imaginary_part", k * im)
        .with("fd_step", h))
}

// ---------------------------------------------------------------------------
// volume pullback

/// Fourth-order central difference of a vector-valued function along coordinate `a`.
fn diff<const N: usize, const M: usize>(f: &dyn Fn(&[f64; N]) -> [f64; M], x: &[f64; N], a: usize, h: f64) -> [f64; M] {
    let at = |s: f64| {
        let mut y = *x;
        y[a] += s;
        f(&y)
    };
    let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
    std::array::from_fn(|j| (m2[j] - p2[j] + 8.0 * (p1[j] - m1[j])) / (12.0 * h))
}

/// deg φ = (1/Vol S⁴)∫φ*ω for φ: S⁴ → S⁴, integrated in the chart over a 4D chart grid.
pub fn volume_degree_s4(phi: &dyn SphereMap, grid: &Grid, step: f64) -> Result<InvariantReport> {
    if grid.dim() != 4 || !grid.is_chart() {
        return Err(Error::InvalidGrid("volume_degree_s4 integrates over a 4-dimensional chart grid".into()));
    }
    let psi = |k: &[f64; 4]| phi.apply(&stereo4(k));
    let [s] = par_sum(grid.len(), |i| {
        let k = grid.point4(i);
        let f = psi(&k);
        let mut d = [[0.0; 4]; 5];
        for a in 0..4 {
            let col = diff(&psi, &k, a, step);
            for j in 0..5 {
                d[j][a] = col[j];
            }
        }
        [grid.weight(i) * volume_density5(&f, &d)]
    });
    Ok(InvariantReport::new("degree", "volume", s / VOL_S4, Some(grid.spec())).with("fd_step", step))
}

/// +1 if (θ, φ, ψ) is positively oriented for the volume form of S³, −1 otherwise.
fn angle_chart_sign() -> f64 {
    let psi = |a: &[f64; 3]| s3_point(a[0], a[1], a[2]);
    let x = [1.1, 0.7, 0.3];
    let mut d = [[0.0; 3]; 4];
    for a in 0..3 {
        let col = diff(&psi, &x, a, ANGLE_STEP);
        for j in 0..4 {
            d[j][a] = col[j];
        }
    }
    volume_density4(&psi(&x), &d).signum()
}

/// Degree of g: S³ → S³ by the volume pullback over an angle grid.
pub fn volume_degree_s3<G>(g: G, grid: &Grid, step: f64) -> Result<InvariantReport>
where
    G: Fn(&Vec4) -> Vec4 + Sync,
{
    if !matches!(grid.spec(), GridSpec::S3Angles { .. }) {
        return Err(Error::InvalidGrid("volume_degree_s3 integrates over an s3-angles grid".into()));
    }
    let psi = |a: &[f64; 3]| g(&s3_point(a[0], a[1], a[2]));
    let [s] = par_sum(grid.len(), |i| {
        let p = grid.point(i);
        let x = [p[0], p[1], p[2]];
        let f = psi(&x);
        let mut d = [[0.0; 3]; 4];
        for a in 0..3 {
            let col = diff(&psi, &x, a, step);
            for j in 0..4 {
                d[j][a] = col[j];
            }
        }
        [grid.coordinate_weight(i) * volume_density4(&f, &d)]
    });
    Ok(InvariantReport::new("degree", "volume", angle_chart_sign() * s / VOL_S3, Some(grid.spec()))
        .with("fd_step", step))
}

/// Degree of a map T⁴ → S⁴ by the volume pullback over a torus grid.
pub fn volume_degree_torus<F>(f: F, grid: &Grid, step: f64) -> Result<InvariantReport>
where
    F: Fn(&Vec4) -> Vec5 + Sync,
{
    if grid.dim() != 4 || !grid.is_periodic() {
        return Err(Error::InvalidGrid("volume_degree_torus integrates over a 4-dimensional torus grid".into()));
    }
    let [s] = par_sum(grid.len(), |i| {
        let k = grid.point4(i);
        let v = f(&k);
        let mut d = [[0.0; 4]; 5];
        for a in 0..4 {
            let col = diff(&f, &k, a, step);
            for j in 0..5 {
                d[j][a] = col[j];
            }
        }
        [grid.weight(i) * volume_density5(&v, &d)]
    });
    Ok(InvariantReport::new("degree", "volume", s / VOL_S4, Some(grid.spec())).with("fd_step", step))
}

// ---------------------------------------------------------------------------
// regular values

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "dim", rename_all = "kebab-case")]
pub enum Manifold {
    /// S^n ⊂ R^{n+1}
    Sphere(usize),
    Euclidean(usize),
    /// angles in [−π, π)^n
    Torus(usize),
}

impl Manifold {
    pub fn dim(&self) -> usize {
        match *self {
            Manifold::Sphere(n) | Manifold::Euclidean(n) | Manifold::Torus(n) => n,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            Manifold::Sphere(n) => n + 1,
            Manifold::Euclidean(n) | Manifold::Torus(n) => n,
        }
    }
}

/// A smooth map between manifolds, given on ambient coordinates.
pub struct SmoothMap<'a> {
    pub domain: Manifold,
    pub target: Manifold,
    pub f: &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularValueOptions {
    pub seeds: usize,
    pub rng_seed: u64,
    /// roots closer than this (ambient distance) are the same root
    pub dedup_radius: f64,
    /// smallest admissible |det J| at a preimage
    pub regularity: f64,
    pub max_newton_steps: usize,
    /// half-width of the seed box for Euclidean domains
    pub seed_box: f64,
}

impl Default for RegularValueOptions {
    fn default() -> Self {
        RegularValueOptions {
            seeds: 400,
            rng_seed: 0x5eed,
            dedup_radius: 1e-6,
            regularity: 1e-8,
            max_newton_steps: 80,
            seed_box: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub point: Vec<f64>,
    pub jacobian: f64,
    pub sign: i32,
}

/// Chart of a domain: which stereographic pole, or the identity.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Chart {
    Flat,
    South,
    North,
}

impl Chart {
    fn to_ambient(self, u: &[f64]) -> Vec<f64> {
        match self {
            Chart::Flat => u.to_vec(),
            Chart::South => stereo_to_sphere(u),
            Chart::North => {
                let mut x = stereo_to_sphere(u);
                x[0] = -x[0];
                x
            }
        }
    }

    fn from_ambient(domain: Manifold, x: &[f64]) -> (Chart, Vec<f64>) {
        match domain {
            Manifold::Sphere(_) => {
                if x[0] <= 0.0 {
                    (Chart::South, sphere_to_stereo(x).expect("southern hemisphere"))
                } else {
                    let mut y = x.to_vec();
                    y[0] = -y[0];
                    (Chart::North, sphere_to_stereo(&y).expect("northern hemisphere"))
                }
            }
            Manifold::Torus(_) => (Chart::Flat, x.iter().map(|&a| wrap_angle(a)).collect()),
            Manifold::Euclidean(_) => (Chart::Flat, x.to_vec()),
        }
    }
}

/// Σ_j (−1)^{j+1} f_j det(∂f_others) for a map into S^m; `grad[a]` = ∂_a f.
fn sphere_density(f: &[f64], grad: &[Vec<f64>]) -> f64 {
    // columnwise layout for oriented_volume: grad_by_component[i][a] = ∂_a f_i
    let m1 = f.len();
    let by_comp: Vec<Vec<f64>> = (0..m1).map(|i| grad.iter().map(|g| g[i]).collect()).collect();
    -oriented_volume(f, &by_comp)
}

fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |r, c| rows[r][c]).determinant()
}

struct Problem<'a> {
    map: &'a SmoothMap<'a>,
    y: Vec<f64>,
    /// orthonormal basis of y^⊥ for sphere targets
    basis: Vec<Vec<f64>>,
}

impl<'a> Problem<'a> {
    fn new(map: &'a SmoothMap<'a>, y: &[f64]) -> Result<Self> {
        if map.domain.dim() != map.target.dim() {
            return Err(Error::InvalidInput(format!(
                "degree needs equal dimensions, got {} → {}",
                map.domain.dim(),
                map.target.dim()
            )));
        }
        if y.len() != map.target.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "target value has {} coordinates, expected {}",
                y.len(),
                map.target.ambient_dim()
            )));
        }
        let mut basis = Vec::new();
        let y = match map.target {
            Manifold::Sphere(_) => {
                let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (n - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!("target value must lie on the sphere (|y| = {n})")));
                }
                let y: Vec<f64> = y.iter().map(|v| v / n).collect();
                let mut vs: Vec<Vec<f64>> = vec![y.clone()];
                for e in 0..y.len() {
                    let mut v = vec![0.0; y.len()];
                    v[e] = 1.0;
                    for w in &vs {
                        let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                        v.iter_mut().zip(w).for_each(|(a, b)| *a -= d * b);
                    }
                    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if nv > 1e-6 {
                        vs.push(v.iter().map(|a| a / nv).collect());
                    }
                    if vs.len() == y.len() {
                        break;
                    }
                }
                basis = vs[1..].to_vec();
                y
            }
            Manifold::Euclidean(_) => y.to_vec(),
            Manifold::Torus(_) => return Err(Error::Unsupported("torus targets are not supported".into())),
        };
        Ok(Problem { map, y, basis })
    }

    fn eval(&self, chart: Chart, u: &[f64]) -> Vec<f64> {
        (self.map.f)(&chart.to_ambient(u))
    }

    fn residual_of(&self, v: &[f64]) -> Vec<f64> {
        match self.map.target {
            Manifold::Sphere(_) => self.basis.iter().map(|b| b.iter().zip(v).map(|(p, q)| p * q).sum()).collect(),
            _ => v.iter().zip(&self.y).map(|(a, b)| a - b).collect(),
        }
    }

    fn on_right_sheet(&self, v: &[f64]) -> bool {
        match self.map.target {
            Manifold::Sphere(_) => v.iter().zip(&self.y).map(|(a, b)| a * b).sum::<f64>() > 0.0,
            _ => true,
        }
    }

    /// Jacobian rows ∂_a of the ambient values, by 4th-order differences.
    fn grad(&self, chart: Chart, u: &[f64], h: f64) -> Vec<Vec<f64>> {
        (0..u.len())
            .map(|a| {
                let at = |s: f64| {
                    let mut w = u.to_vec();
                    w[a] += s;
                    self.eval(chart, &w)
                };
                let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
                (0..m1.len()).map(|j| (m2[j] - p2[j] + 8.0 * (p1[j] - m1[j])) / (12.0 * h)).collect()
            })
            .collect()
    }

    fn newton(&self, chart: Chart, mut u: Vec<f64>, steps: usize) -> Option<Vec<f64>> {
        let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut r = self.residual_of(&self.eval(chart, &u));
        let n = u.len();
        for _ in 0..steps {
            let rn = norm(&r);
            if !rn.is_finite() {
                return None;
            }
            if rn < 1e-13 {
                return Some(u);
            }
            let g = self.grad(chart, &u, 1e-6);
            let jac = DMatrix::from_fn(n, n, |i, a| self.residual_of(&g[a])[i] - self.residual_offset(i));
            let rhs = nalgebra::DVector::from_iterator(n, r.iter().map(|x| -x));
            let delta = jac.lu().solve(&rhs)?;
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = u.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
                let rt = self.residual_of(&self.eval(chart, &trial));
                if norm(&rt) < rn || t < 1e-6 {
                    u = trial;
                    r = rt;
                    break;
                }
                t *= 0.5;
            }
            if u.iter().any(|x| !x.is_finite() || x.abs() > 1e8) {
                return None;
            }
        }
        (norm(&r) < 1e-10).then_some(u)
    }

    /// The residual map is affine in the value, so the Jacobian of the residual is the residual
    /// of the value Jacobian minus the constant part.
    fn residual_offset(&self, i: usize) -> f64 {
        match self.map.target {
            Manifold::Sphere(_) => 0.0,
            _ => -self.y[i],
        }
    }

    fn seed(&self, rng: &mut ChaCha8Rng, opts: &RegularValueOptions) -> (Chart, Vec<f64>) {
        let n = self.map.domain.dim();
        match self.map.domain {
            Manifold::Sphere(_) => {
                let x: Vec<f64> = loop {
                    let v: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let r2: f64 = v.iter().map(|a| a * a).sum();
                    if r2 > 1e-4 && r2 <= 1.0 {
                        break v.iter().map(|a| a / r2.sqrt()).collect();
                    }
                };
                Chart::from_ambient(self.map.domain, &x)
            }
            Manifold::Euclidean(_) => (Chart::Flat, (0..n).map(|_| rng.gen_range(-opts.seed_box..opts.seed_box)).collect()),
            Manifold::Torus(_) => (Chart::Flat, (0..n).map(|_| rng.gen_range(-PI..PI)).collect()),
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.map.domain {
            Manifold::Torus(_) => a.iter().zip(b).map(|(x, y)| wrap_angle(x - y).powi(2)).sum::<f64>().sqrt(),
            _ => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// Orientation sign and Jacobian at a root, in the best chart around it.
    fn classify(&self, x: &[f64]) -> Result<Preimage> {
        let (chart, u) = Chart::from_ambient(self.map.domain, x);
        let u = self.newton(chart, u.clone(), 5).unwrap_or(u);
        let g = self.grad(chart, &u, 1e-5);
        let v = self.eval(chart, &u);
        let jacobian = match self.map.target {
            Manifold::Sphere(_) => sphere_density(&v, &g),
            _ => det(&transpose(&g)),
        };
        let chart_sign = match chart {
            Chart::Flat => 1.0,
            _ => {
                let cg: Vec<Vec<f64>> = (0..u.len())
                    .map(|a| {
                        let at = |s: f64| {
                            let mut w = u.clone();
                            w[a] += s;
                            chart.to_ambient(&w)
                        };
                        let (p, m) = (at(1e-6), at(-1e-6));
                        p.iter().zip(&m).map(|(a, b)| (a - b) / 2e-6).collect()
                    })
                    .collect();
                sphere_density(&chart.to_ambient(&u), &cg).signum()
            }
        };
        let point = chart.to_ambient(&u);
        Ok(Preimage { point, jacobian: jacobian * chart_sign, sign: 0 })
    }
}

fn transpose(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let m = rows.first().map(Vec::len).unwrap_or(0);
    (0..m).map(|j| (0..n).map(|i| rows[i][j]).collect()).collect()
}

/// Signed count of the preimages of y found by multi-start Newton. Roots closer than the
/// dedup radius are merged; every root must pass the regularity screen.
pub fn regular_value_degree(
    map: &SmoothMap,
    y: &[f64],
    opts: &RegularValueOptions,
) -> Result<(InvariantReport, Vec<Preimage>)> {
    let prob = Problem::new(map, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let seeds: Vec<(Chart, Vec<f64>)> = (0..opts.seeds).map(|_| prob.seed(&mut rng, opts)).collect();
    let found: Vec<Option<Vec<f64>>> = {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|(chart, u)| {
                let u = prob.newton(*chart, u.clone(), opts.max_newton_steps)?;
                let v = prob.eval(*chart, &u);
                prob.on_right_sheet(&v).then(|| chart.to_ambient(&u))
            })
            .collect()
    };
    let converged = found.iter().filter(|r| r.is_some()).count();
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for x in found.into_iter().flatten() {
        if roots.iter().all(|r| prob.distance(r, &x) >= opts.dedup_radius) {
            roots.push(x);
        }
    }
    let mut pre = Vec::new();
    for x in &roots {
        let mut p = prob.classify(x)?;
        if p.jacobian.abs() <= opts.regularity {
            return Err(Error::NotRegular { det: p.jacobian, point: p.point });
        }
        p.sign = p.jacobian.signum() as i32;
        pre.push(p);
    }
    // sort for a deterministic listing
    pre.sort_by(|a, b| a.point.iter().zip(&b.point).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let deg: i32 = pre.iter().map(|p| p.sign).sum();
    let report = InvariantReport::new("degree", "regular-value", deg as f64, None)
        .with("target_value", &prob.y)
        .with("preimages", &pre)
        .with("seeds", opts.seeds)
        .with("converged_seeds", converged)
        .with("dedup_radius", opts.dedup_radius)
        .with("regularity_threshold", opts.regularity);
    Ok((report, pre))
}

/// f(z, w) = (z + w, zw) with z = κ₁ + iκ₃, w = κ₂ + iκ₄, written in the ansatz order
/// (κ₁+κ₂, κ₁κ₂−κ₃κ₄, κ₃+κ₄, κ₁κ₄+κ₂κ₃).
pub fn ansatz_polynomial(k: &[f64]) -> Vec<f64> {
    vec![k[0] + k[1], k[0] * k[1] - k[2] * k[3], k[2] + k[3], k[0] * k[3] + k[1] * k[2]]
}

/// Both preimages of y = (Re α, Re β, Im α, Im β) under the ansatz polynomial: z, w are the
/// roots of t² − αt + β.
pub fn quadratic_preimages(y: &[f64]) -> Result<Vec<Vec4>> {
    let alpha = C64::new(y[0], y[2]);
    let beta = C64::new(y[1], y[3]);
    let disc = alpha * alpha - beta * 4.0;
    if disc.norm() < 1e-12 {
        return Err(Error::NotRegular { det: disc.norm_sqr(), point: y.to_vec() });
    }
    let s = disc.sqrt();
    let (z, w) = ((alpha + s) / 2.0, (alpha - s) / 2.0);
    let embed = |z: C64, w: C64| [z.re, w.re, z.im, w.im];
    Ok(vec![embed(z, w), embed(w, z)])
}

// ---------------------------------------------------------------------------
// dispatch

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "map", content = "n")]
pub enum MapDescriptor {
    /// identity of S³ (Cartan, regular value) or S⁴ (volume)
    Identity,
    /// x ↦ xⁿ on S³ ≅ SU(2)
    Power(i32),
    /// φ_{F,+} of the standard ansatz
    Ansatz,
    /// equivariant S⁴ map of degree 2n
    Even(u32),
    /// the collapse T⁴ → S⁴
    Collapse,
}

impl FromStr for MapDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown map {s:?}; use identity, power:<n>, ansatz, even:<n> or collapse"));
        match s {
            "identity" => Ok(MapDescriptor::Identity),
            "ansatz" => Ok(MapDescriptor::Ansatz),
            "collapse" => Ok(MapDescriptor::Collapse),
            _ => {
                if let Some(n) = s.strip_prefix("power:") {
                    return n.parse().map(MapDescriptor::Power).map_err(|_| bad());
                }
                if let Some(n) = s.strip_prefix("even:") {
                    return n.parse().map(MapDescriptor::Even).map_err(|_| bad());
                }
                Err(bad())
            }
        }
    }
}

impl fmt::Display for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapDescriptor::Identity => write!(f, "identity"),
            MapDescriptor::Power(n) => write!(f, "power:{n}"),
            MapDescriptor::Ansatz => write!(f, "ansatz"),
            MapDescriptor::Even(n) => write!(f, "even:{n}"),
            MapDescriptor::Collapse => write!(f, "collapse"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMethod {
    Cartan,
    RegularValue,
    Volume,
}

impl FromStr for DegreeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartan" => Ok(DegreeMethod::Cartan),
            "regular-value" => Ok(DegreeMethod::RegularValue),
            "volume" => Ok(DegreeMethod::Volume),
            _ => Err(Error::InvalidInput(format!("unknown degree method {s:?}; use cartan, regular-value or volume"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeQuery {
    pub map: MapDescriptor,
    pub method: DegreeMethod,
    /// regular value; a generic default per map when absent
    pub target: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    pub options: RegularValueOptions,
    pub collar: f64,
}

impl DegreeQuery {
    pub fn new(map: MapDescriptor, method: DegreeMethod) -> Self {
        DegreeQuery { map, method, target: None, grid: None, options: RegularValueOptions::default(), collar: DEFAULT_COLLAR }
    }

    pub fn default_grid(&self) -> GridSpec {
        match (self.method, self.map) {
            (DegreeMethod::Cartan, _) => GridSpec::s3(64, 64, 64),
            (DegreeMethod::Volume, MapDescriptor::Power(_)) => GridSpec::s3(64, 64, 64),
            (DegreeMethod::Volume, MapDescriptor::Collapse) => GridSpec::torus(4, 48),
            _ => GridSpec::chart(4, 12.0, 48),
        }
    }
}

const GENERIC_S3: [f64; 4] = [0.21, 0.52, -0.68, 0.4674];
const GENERIC_S4: [f64; 5] = [0.13, 0.47, -0.61, 0.38, -0.5];
const GENERIC_R4: [f64; 4] = [0.7, -0.3, 0.4, 0.9];

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn compute_degree(q: &DegreeQuery) -> Result<InvariantReport> {
    let grid = || Grid::new(q.grid.unwrap_or_else(|| q.default_grid()));
    let unsupported = || Error::Unsupported(format!("the {:?} method does not apply to map {}", q.method, q.map));
    let report = match q.method {
        DegreeMethod::Cartan => match q.map {
            MapDescriptor::Identity => cartan_degree(su2_from_s3, &grid()?)?,
            MapDescriptor::Power(n) => cartan_degree(su2_power_map(n), &grid()?)?,
            MapDescriptor::Ansatz => cartan_degree(|x: &Vec4| su2_from_s3(&ansatz_equator(x)), &grid()?)?
                .with("map_domain", "equator S^3 of the ansatz"),
            MapDescriptor::Even(_) | MapDescriptor::Collapse => return Err(unsupported()),
        },
        DegreeMethod::Volume => match q.map {
            MapDescriptor::Identity => volume_degree_s4(&|k: &Vec5| *k, &grid()?, 1e-3)?,
            MapDescriptor::Power(n) => volume_degree_s3(move |x: &Vec4| s3_power(x, n), &grid()?, ANGLE_STEP)?,
            MapDescriptor::Ansatz => volume_degree_s4(&AnsatzMap { band: Band::Plus }, &grid()?, 1e-3)?,
            MapDescriptor::Even(n) => volume_degree_s4(equivariant_even_map(n, q.collar)?.as_ref(), &grid()?, 1e-3)?,
            MapDescriptor::Collapse => volume_degree_torus(collapse_map, &grid()?, 1e-4)?,
        },
        DegreeMethod::RegularValue => {
            let (map, y): (SmoothMap, Vec<f64>) = match q.map {
                MapDescriptor::Identity => (
                    SmoothMap { domain: Manifold::Sphere(3), target: Manifold::Sphere(3), f: &|x| x.to_vec() },
                    unit(&GENERIC_S3),
                ),
                MapDescriptor::Power(n) => {
                    let f = Box::leak(Box::new(move |x: &[f64]| s3_power(&[x[0], x[1], x[2], x[3]], n).to_vec()));
                    (SmoothMap { domain: Manifold::Sphere(3), target: Manifold::Sphere(3), f }, unit(&GENERIC_S3))
                }
                MapDescriptor::Ansatz => (
                    SmoothMap { domain: Manifold::Euclidean(4), target: Manifold::Euclidean(4), f: &ansatz_polynomial },
                    GENERIC_R4.to_vec(),
                ),
                MapDescriptor::Even(n) => {
                    let phi = equivariant_even_map(n, q.collar)?;
                    let f = Box::leak(Box::new(move |x: &[f64]| phi.apply(&[x[0], x[1], x[2], x[3], x[4]]).to_vec()));
                    (SmoothMap { domain: Manifold::Sphere(4), target: Manifold::Sphere(4), f }, unit(&GENERIC_S4))
                }
                MapDescriptor::Collapse => (
                    SmoothMap {
                        domain: Manifold::Torus(4),
                        target: Manifold::Sphere(4),
                        f: &|x| collapse_map(&[x[0], x[1], x[2], x[3]]).to_vec(),
                    },
                    vec![0.0, 1.0, 0.0, 0.0, 0.0],
                ),
            };
            let y = q.target.clone().unwrap_or(y);
            let (mut report, pre) = regular_value_degree(&map, &y, &q.options)?;
            if q.map == MapDescriptor::Ansatz {
                let closed = quadratic_preimages(&y)?;
                let agree = closed.iter().all(|c| pre.iter().any(|p| p.point.iter().zip(c).all(|(a, b)| (a - b).abs() < 1e-8)))
                    && closed.len() == pre.len();
                report = report.with("closed_form_preimages", &closed).with("closed_form_agrees", agree);
            }
            report
        }
    };
    Ok(report.with("map", q.map.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3(n: usize) -> Grid {
        Grid::new(GridSpec::s3(n, n, n)).unwrap()
    }

    #[test]
    fn cartan_counts_powers() {
        let g = s3(24);
        for n in [-1, 0, 1, 2, 3] {
            let r = cartan_degree(su2_power_map(n), &g).unwrap();
            assert!((r.value - n as f64).abs() < 1e-6, "n = {n}: {}", r.value);
            assert!(r.diagnostics["imaginary_part"].as_f64().unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn cartan_rejects_other_grids() {
        let g = Grid::new(GridSpec::torus(3, 8)).unwrap();
        assert!(matches!(cartan_degree(su2_from_s3, &g), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn volume_on_s3_agrees_with_cartan() {
        let g = s3(24);
        for n in [-2, 1, 3] {
            let r = volume_degree_s3(move |x: &Vec4| s3_power(x, n), &g, ANGLE_STEP).unwrap();
            assert!((r.value - n as f64).abs() < 1e-6, "n = {n}: {}", r.value);
        }
    }

    #[test]
    fn volume_of_sphere_maps() {
        let g = Grid::new(GridSpec::chart(4, 12.0, 32)).unwrap();
        let id = volume_degree_s4(&|k: &Vec5| *k, &g, 1e-3).unwrap();
        assert!((id.value - 1.0).abs() < 0.05, "{}", id.value);
        let anti = volume_degree_s4(&|k: &Vec5| crate::geometry::antipodal(k), &g, 1e-3).unwrap();
        assert!((anti.value + id.value).abs() < 1e-9, "{}", anti.value);
    }

    #[test]
    fn collapse_has_degree_one() {
        let g = Grid::new(GridSpec::torus(4, 24)).unwrap();
        let r = volume_degree_torus(collapse_map, &g, 1e-4).unwrap();
        assert_eq!(r.nearest_integer, 1, "{}", r.value);
    }

    #[test]
    fn quadratic_roots_map_back() {
        let y = [0.7, -0.3, 0.4, 0.9];
        let pre = quadratic_preimages(&y).unwrap();
        assert_eq!(pre.len(), 2);
        for p in &pre {
            let v = ansatz_polynomial(p);
            for (a, b) in v.iter().zip(&y) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // double root: α² = 4β
        assert!(matches!(quadratic_preimages(&[2.0, 1.0, 0.0, 0.0]), Err(Error::NotRegular { .. })));
    }

    #[test]
    fn regular_values_of_powers() {
        for n in [1, 2, 3, -1] {
            let q = DegreeQuery { options: RegularValueOptions { seeds: 200, ..Default::default() }, ..DegreeQuery::new(MapDescriptor::Power(n), DegreeMethod::RegularValue) };
            let r = compute_degree(&q).unwrap();
            assert_eq!(r.nearest_integer, n as i64);
            assert_eq!(r.diagnostics["preimages"].as_array().unwrap().len(), n.unsigned_abs() as usize);
        }
    }

    #[test]
    fn ansatz_preimages_match_closed_form() {
        let r = compute_degree(&DegreeQuery::new(MapDescriptor::Ansatz, DegreeMethod::RegularValue)).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.diagnostics["closed_form_agrees"], serde_json::Value::Bool(true));
    }

    #[test]
    fn seeded_runs_repeat() {
        let q = DegreeQuery::new(MapDescriptor::Power(2), DegreeMethod::RegularValue);
        assert_eq!(compute_degree(&q).unwrap(), compute_degree(&q).unwrap());
    }

    #[test]
    fn critical_value_fails_the_screen() {
        // z ↦ z² on R²; 0 is the critical value
        let f = |x: &[f64]| vec![x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]];
        let map = SmoothMap { domain: Manifold::Euclidean(2), target: Manifold::Euclidean(2), f: &f };
        let opts = RegularValueOptions { seeds: 50, dedup_radius: 1e-3, ..Default::default() };
        let ok = regular_value_degree(&map, &[0.3, 0.2], &opts).unwrap().0;
        assert_eq!(ok.value, 2.0);
        // Newton still lands near the origin, where det J ≈ 4|z|² is below the screen
        let bad = regular_value_degree(&map, &[0.0, 0.0], &RegularValueOptions { regularity: 1e-3, ..opts });
        assert!(bad.is_err() || bad.unwrap().0.value == 0.0);
    }

    #[test]
    fn descriptors_parse() {
        for s in ["identity", "power:-3", "ansatz", "even:2", "collapse"] {
            assert_eq!(s.parse::<MapDescriptor>().unwrap().to_string(), s);
        }
        assert!("power:x".parse::<MapDescriptor>().is_err());
        assert!("winding".parse::<DegreeMethod>().is_err());
    }
}
