//! Stereographic charts, involutions, the collapse map T⁴ → S⁴, and product grids.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, par_sum};

pub type Vec4 = [f64; 4];
pub type Vec5 = [f64; 5];

/// k₀ = (r²−1)/(r²+1), k_j = 2κ_j/(r²+1). The origin goes to the south pole (−1, 0, …).
pub fn stereo_to_sphere(kappa: &[f64]) -> Vec<f64> {
    let r2: f64 = kappa.iter().map(|x| x * x).sum();
    let s = 1.0 / (r2 + 1.0);
    std::iter::once((r2 - 1.0) * s).chain(kappa.iter().map(|x| 2.0 * x * s)).collect()
}

/// Inverse chart κ_j = k_j/(1−k₀); undefined at the north pole.
pub fn sphere_to_stereo(k: &[f64]) -> Result<Vec<f64>> {
    let den = 1.0 - k[0];
    if den <= 0.0 {
        return Err(Error::InvalidInput("the north pole has no stereographic coordinates".into()));
    }
    Ok(k[1..].iter().map(|x| x / den).collect())
}

#[inline]
pub fn stereo4(kappa: &Vec4) -> Vec5 {
    let r2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2] + kappa[3] * kappa[3];
    let s = 1.0 / (r2 + 1.0);
    [(r2 - 1.0) * s, 2.0 * kappa[0] * s, 2.0 * kappa[1] * s, 2.0 * kappa[2] * s, 2.0 * kappa[3] * s]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Involution {
    /// (k₀, k₁, …) ↦ (k₀, −k₁, …); κ ↦ −κ on tori and in the chart.
    Tau,
    /// flips k₁ and k₃ only (S⁴).
    Varpi,
    /// k ↦ −k.
    Antipodal,
}

impl fmt::Display for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Involution::Tau => "tau",
            Involution::Varpi => "varpi",
            Involution::Antipodal => "antipodal",
        })
    }
}

/// Involution acting on a sphere point (d+1 coordinates).
pub fn involution(inv: Involution, k: &[f64]) -> Result<Vec<f64>> {
    match inv {
        Involution::Tau => Ok(k.iter().enumerate().map(|(j, &x)| if j == 0 { x } else { -x }).collect()),
        Involution::Antipodal => Ok(k.iter().map(|x| -x).collect()),
        Involution::Varpi => {
            if k.len() != 5 {
                return Err(Error::InvalidInput(format!("varpi acts on S^4 only (got {} coordinates)", k.len())));
            }
            Ok(varpi(&[k[0], k[1], k[2], k[3], k[4]]).to_vec())
        }
    }
}

#[inline]
pub fn tau(k: &Vec5) -> Vec5 {
    [k[0], -k[1], -k[2], -k[3], -k[4]]
}

#[inline]
pub fn varpi(k: &Vec5) -> Vec5 {
    [k[0], -k[1], k[2], -k[3], k[4]]
}

#[inline]
pub fn antipodal(k: &Vec5) -> Vec5 {
    k.map(|x| -x)
}

/// Brings an angle into [−π, π).
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        -PI
    } else {
        y
    }
}

/// κ ↦ −κ on the torus, kept inside [−π, π).
pub fn torus_tau(kappa: &[f64]) -> Vec<f64> {
    kappa.iter().map(|&x| wrap_angle(-x)).collect()
}

/// Radial clamp T⁴ → S⁴: with r = ‖κ‖ and α = min(r, π),
/// k₀ = −cos α, (k₁..k₄) = sin α · κ/r. Everything with r ≥ π lands on the north pole.
#[inline]
pub fn collapse_map(kappa: &Vec4) -> Vec5 {
    let r = (kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2] + kappa[3] * kappa[3]).sqrt();
    if r >= PI {
        return [1.0, 0.0, 0.0, 0.0, 0.0];
    }
    if r == 0.0 {
        return [-1.0, 0.0, 0.0, 0.0, 0.0];
    }
    let s = r.sin() / r;
    [-r.cos(), s * kappa[0], s * kappa[1], s * kappa[2], s * kappa[3]]
}

/// Hyperspherical coordinates on S³: x = (cos θ, sin θ cos φ, sin θ sin φ cos ψ, sin θ sin φ sin ψ).
#[inline]
pub fn s3_point(theta: f64, phi: f64, psi: f64) -> Vec4 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (ss, cs) = psi.sin_cos();
    [ct, st * cp, st * sp * cs, st * sp * ss]
}

// ---------------------------------------------------------------------------
// grids

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "kebab-case")]
pub enum GridSpec {
    /// N equally spaced points per axis on [−π, π), symmetric about 0, equal weights.
    Torus { dim: usize, n: usize },
    /// N points per axis on [−L, L] including both ends, trapezoid weights.
    Chart { dim: usize, half_width: f64, n: usize },
    /// Gauss–Legendre in θ and φ, uniform periodic in ψ.
    S3Angles { n_theta: usize, n_phi: usize, n_psi: usize },
}

impl GridSpec {
    pub fn torus(dim: usize, n: usize) -> Self {
        GridSpec::Torus { dim, n }
    }

    pub fn chart(dim: usize, half_width: f64, n: usize) -> Self {
        GridSpec::Chart { dim, half_width, n }
    }

    pub fn s3(n_theta: usize, n_phi: usize, n_psi: usize) -> Self {
        GridSpec::S3Angles { n_theta, n_phi, n_psi }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Torus { dim, n } => write!(f, "torus(d={dim}, N={n})"),
            GridSpec::Chart { dim, half_width, n } => write!(f, "chart(d={dim}, L={half_width}, N={n})"),
            GridSpec::S3Angles { n_theta, n_phi, n_psi } => write!(f, "s3-angles({n_theta}x{n_phi}x{n_psi})"),
        }
    }
}

pub const MAX_DIM: usize = 4;

#[derive(Clone, Debug)]
pub struct Grid {
    spec: GridSpec,
    nodes: Vec<Vec<f64>>,
    /// quadrature weights without the Jacobian
    raw_weights: Vec<Vec<f64>>,
    /// quadrature weights including the Jacobian (volume weights)
    weights: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Grid> {
        let bad = |msg: String| Err(Error::InvalidGrid(msg));
        match spec {
            GridSpec::Torus { dim, n } | GridSpec::Chart { dim, n, .. } => {
                if !(1..=MAX_DIM).contains(&dim) {
                    return bad(format!("dimension {dim} outside 1..={MAX_DIM}"));
                }
                if n < 4 {
                    return bad(format!("need at least 4 points per axis, got {n}"));
                }
            }
            GridSpec::S3Angles { n_theta, n_phi, n_psi } => {
                if n_theta.min(n_phi).min(n_psi) < 4 {
                    return bad(format!("need at least 4 points per axis, got {spec}"));
                }
            }
        }
        let (nodes, raw_weights, weights) = match spec {
            GridSpec::Torus { dim, n } => {
                // h·m with m symmetric about zero, so κ ↦ −κ maps nodes to nodes bit-exactly
                let h = 2.0 * PI / n as f64;
                let x: Vec<f64> = (0..n)
                    .map(|i| {
                        let m = i as isize - (n / 2) as isize;
                        if 2 * m == -(n as isize) {
                            -PI
                        } else {
                            h * m as f64
                        }
                    })
                    .collect();
                let w = vec![h; n];
                (vec![x; dim], vec![w.clone(); dim], vec![w; dim])
            }
            GridSpec::Chart { dim, half_width, n } => {
                if !(half_width > 0.0 && half_width.is_finite()) {
                    return bad(format!("box half-width must be positive, got {half_width}"));
                }
                let h = 2.0 * half_width / (n - 1) as f64;
                let x: Vec<f64> = (0..n).map(|i| h * (i as f64 - 0.5 * (n - 1) as f64)).collect();
                let mut w = vec![h; n];
                w[0] *= 0.5;
                w[n - 1] *= 0.5;
                (vec![x; dim], vec![w.clone(); dim], vec![w; dim])
            }
            GridSpec::S3Angles { n_theta, n_phi, n_psi } => {
                let legendre = |m: usize| {
                    let (x, w) = gauss_legendre(m);
                    let nodes: Vec<f64> = x.iter().map(|t| 0.5 * PI * (t + 1.0)).collect();
                    let weights: Vec<f64> = w.iter().map(|w| 0.5 * PI * w).collect();
                    (nodes, weights)
                };
                let (th, wth) = legendre(n_theta);
                let (ph, wph) = legendre(n_phi);
                let hps = 2.0 * PI / n_psi as f64;
                let ps: Vec<f64> = (0..n_psi).map(|i| hps * i as f64).collect();
                let wps = vec![hps; n_psi];
                let jth: Vec<f64> = th.iter().zip(&wth).map(|(t, w)| w * t.sin().powi(2)).collect();
                let jph: Vec<f64> = ph.iter().zip(&wph).map(|(p, w)| w * p.sin()).collect();
                (vec![th, ph, ps], vec![wth, wph, wps.clone()], vec![jth, jph, wps])
            }
        };
        Ok(Grid { spec, nodes, raw_weights, weights })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn axis_len(&self, axis: usize) -> usize {
        self.nodes[axis].len()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.spec, GridSpec::Torus { .. })
    }

    pub fn is_chart(&self) -> bool {
        matches!(self.spec, GridSpec::Chart { .. })
    }

    /// Multi-index with the last axis fastest.
    #[inline]
    pub fn multi_index(&self, mut i: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for a in (0..self.dim()).rev() {
            let n = self.nodes[a].len();
            idx[a] = i % n;
            i /= n;
        }
        idx
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut i = 0;
        for a in 0..self.dim() {
            i = i * self.nodes[a].len() + idx[a];
        }
        i
    }

    /// Lattice spacing along an axis (uniform axes only).
    pub fn spacing(&self, axis: usize) -> f64 {
        match self.spec {
            GridSpec::Torus { n, .. } => 2.0 * PI / n as f64,
            GridSpec::Chart { half_width, n, .. } => 2.0 * half_width / (n - 1) as f64,
            GridSpec::S3Angles { n_psi, .. } => {
                if axis == 2 {
                    2.0 * PI / n_psi as f64
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// Coordinate of lattice site `i` along `axis`, continuing the uniform lattice beyond the
    /// box for charts and wrapping for tori.
    #[inline]
    pub fn lattice_coord(&self, axis: usize, i: isize) -> f64 {
        match self.spec {
            GridSpec::Torus { n, .. } => self.nodes[axis][i.rem_euclid(n as isize) as usize],
            GridSpec::Chart { half_width, n, .. } => {
                (2.0 * half_width / (n - 1) as f64) * (i as f64 - 0.5 * (n - 1) as f64)
            }
            GridSpec::S3Angles { .. } => {
                let n = self.nodes[axis].len() as isize;
                self.nodes[axis][i.clamp(0, n - 1) as usize]
            }
        }
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let idx = self.multi_index(i);
        (0..self.dim()).map(|a| self.nodes[a][idx[a]]).collect()
    }

    /// Point padded with zeros to four coordinates.
    #[inline]
    pub fn point4(&self, i: usize) -> Vec4 {
        let idx = self.multi_index(i);
        let mut p = [0.0; 4];
        for a in 0..self.dim() {
            p[a] = self.nodes[a][idx[a]];
        }
        p
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let idx = self.multi_index(i);
        (0..self.dim()).map(|a| self.weights[a][idx[a]]).product()
    }

    /// Weight for integrating a coordinate density (no Jacobian). Equal to [`Grid::weight`]
    /// on tori and charts.
    #[inline]
    pub fn coordinate_weight(&self, i: usize) -> f64 {
        let idx = self.multi_index(i);
        (0..self.dim()).map(|a| self.raw_weights[a][idx[a]]).product()
    }

    pub fn axis_nodes(&self, axis: usize) -> &[f64] {
        &self.nodes[axis]
    }

    pub fn total_weight(&self) -> f64 {
        par_sum(self.len(), |i| [self.weight(i)])[0]
    }

    /// Exact measure of the domain the weights approximate.
    pub fn domain_volume(&self) -> f64 {
        match self.spec {
            GridSpec::Torus { dim, .. } => (2.0 * PI).powi(dim as i32),
            GridSpec::Chart { dim, half_width, .. } => (2.0 * half_width).powi(dim as i32),
            GridSpec::S3Angles { .. } => 2.0 * PI * PI,
        }
    }

    /// Index of the image of point `i` under an involution acting on coordinates
    /// (τ: κ ↦ −κ; ϖ: flip the first and third coordinate).
    pub fn partner(&self, i: usize, inv: Involution) -> Result<usize> {
        let flip: [bool; MAX_DIM] = match (inv, self.dim()) {
            (Involution::Tau, d) => [true, d > 1, d > 2, d > 3],
            (Involution::Varpi, 4) => [true, false, true, false],
            (Involution::Varpi, d) => {
                return Err(Error::NotInvolutionClosed(format!("varpi needs a 4-dimensional grid, got {d}")))
            }
            (Involution::Antipodal, _) => {
                return Err(Error::NotInvolutionClosed("antipodal map has no coordinate action on this grid".into()))
            }
        };
        let mut idx = self.multi_index(i);
        for a in 0..self.dim() {
            if !flip[a] {
                continue;
            }
            let n = self.nodes[a].len();
            idx[a] = match self.spec {
                GridSpec::Torus { .. } => (2 * (n / 2) + n - idx[a]) % n,
                GridSpec::Chart { .. } => n - 1 - idx[a],
                GridSpec::S3Angles { .. } => {
                    return Err(Error::NotInvolutionClosed("angle grids on S^3 carry no involution".into()))
                }
            };
        }
        Ok(self.flat_index(&idx))
    }

    /// Fixed points of κ ↦ −κ on a torus grid (every coordinate 0 or −π).
    pub fn tau_fixed_points(&self) -> Result<Vec<usize>> {
        (0..self.len())
            .map(|i| self.partner(i, Involution::Tau).map(|j| (i, j)))
            .filter_map(|r| match r {
                Ok((i, j)) if i == j => Some(Ok(i)),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn chart_origin_is_south_pole() {
        assert_eq!(stereo_to_sphere(&[0.0; 4]), vec![-1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(stereo4(&[0.0; 4]), [-1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(sphere_to_stereo(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn tau_fixed_points_on_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let k: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm(&k);
            let k: Vec<f64> = k.iter().map(|x| x / n).collect();
            let back = involution(Involution::Tau, &involution(Involution::Tau, &k).unwrap()).unwrap();
            assert_eq!(back, k);
            let back = involution(Involution::Varpi, &involution(Involution::Varpi, &k).unwrap()).unwrap();
            assert_eq!(back, k);
        }
        for pole in [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]] {
            assert_eq!(involution(Involution::Tau, &pole).unwrap(), pole.to_vec());
        }
        assert!(involution(Involution::Varpi, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn torus_fixed_point_count() {
        for d in 1..=4 {
            let g = Grid::new(GridSpec::torus(d, 8)).unwrap();
            let fixed = g.tau_fixed_points().unwrap();
            assert_eq!(fixed.len(), 1 << d);
            for i in fixed {
                assert!(g.point(i).iter().all(|&x| x == 0.0 || x == -PI));
            }
        }
    }

    #[test]
    fn collapse_map_basics() {
        assert_eq!(collapse_map(&[0.0; 4]), [-1.0, 0.0, 0.0, 0.0, 0.0]);
        // the collapsed subcomplex: a coordinate at the fixed angle π
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for axis in 0..4 {
            for _ in 0..200 {
                let mut k: Vec4 = [0.0; 4].map(|_| rng.gen_range(-PI..PI));
                k[axis] = if rng.gen_bool(0.5) { PI } else { -PI };
                assert_eq!(collapse_map(&k), [1.0, 0.0, 0.0, 0.0, 0.0]);
            }
        }
    }

    #[test]
    fn grid_weights() {
        let g = Grid::new(GridSpec::torus(1, 8)).unwrap();
        assert!((g.total_weight() - 2.0 * PI).abs() < 1e-14);
        let g = Grid::new(GridSpec::s3(32, 32, 32)).unwrap();
        assert!((g.total_weight() / (2.0 * PI * PI) - 1.0).abs() < 1e-6);
        let g = Grid::new(GridSpec::chart(4, 8.0, 64)).unwrap();
        assert!((g.total_weight() / 16f64.powi(4) - 1.0).abs() < 1e-10);
        for spec in [GridSpec::torus(4, 12), GridSpec::chart(3, 2.5, 17), GridSpec::s3(8, 9, 10)] {
            let g = Grid::new(spec).unwrap();
            assert!((g.total_weight() / g.domain_volume() - 1.0).abs() < 1e-6, "{spec}");
        }
    }

    #[test]
    fn refinement_keeps_weight_sum() {
        let a = Grid::new(GridSpec::torus(2, 16)).unwrap().total_weight();
        let b = Grid::new(GridSpec::torus(2, 32)).unwrap().total_weight();
        assert!((a - b).abs() < 1e-12);
        let a = Grid::new(GridSpec::chart(2, 3.0, 16)).unwrap().total_weight();
        let b = Grid::new(GridSpec::chart(2, 3.0, 31)).unwrap().total_weight();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        assert!(Grid::new(GridSpec::torus(5, 8)).is_err());
        assert!(Grid::new(GridSpec::torus(2, 3)).is_err());
        assert!(Grid::new(GridSpec::chart(2, -1.0, 8)).is_err());
        assert!(Grid::new(GridSpec::s3(2, 8, 8)).is_err());
    }

    #[test]
    fn partners_are_negatives() {
        let g = Grid::new(GridSpec::torus(3, 7)).unwrap();
        for i in 0..g.len() {
            let j = g.partner(i, Involution::Tau).unwrap();
            let (p, q) = (g.point(i), g.point(j));
            for a in 0..3 {
                assert!((wrap_angle(-p[a]) - q[a]).abs() < 1e-14);
            }
        }
        let g = Grid::new(GridSpec::chart(4, 2.0, 6)).unwrap();
        for i in 0..g.len() {
            let j = g.partner(i, Involution::Varpi).unwrap();
            let (p, q) = (g.point(i), g.point(j));
            assert_eq!([-p[0], p[1], -p[2], p[3]], [q[0], q[1], q[2], q[3]]);
        }
        let s3 = Grid::new(GridSpec::s3(4, 4, 4)).unwrap();
        assert!(matches!(s3.partner(0, Involution::Tau), Err(Error::NotInvolutionClosed(_))));
    }

    fn arb_kappa() -> impl Strategy<Value = Vec4> {
        prop::array::uniform4(-50.0f64..50.0)
    }

    proptest! {
        #[test]
        fn stereo_lands_on_sphere(k in arb_kappa()) {
            let s = stereo_to_sphere(&k);
            prop_assert!((norm(&s) - 1.0).abs() < 1e-12);
            prop_assert_eq!(stereo4(&k).to_vec(), s);
        }

        #[test]
        fn stereo_round_trip(k in prop::array::uniform4(-1e3f64..1e3)) {
            let back = sphere_to_stereo(&stereo_to_sphere(&k)).unwrap();
            for a in 0..4 {
                let r2: f64 = k.iter().map(|x| x * x).sum();
                prop_assert!((back[a] - k[a]).abs() <= 1e-15 * (1.0 + r2) * (1.0 + k[a].abs()));
            }
        }

        #[test]
        fn chart_intertwines_tau(k in arb_kappa()) {
            let neg: Vec<f64> = k.iter().map(|x| -x).collect();
            let lhs = stereo_to_sphere(&neg);
            let rhs = involution(Involution::Tau, &stereo_to_sphere(&k)).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }

        #[test]
        fn collapse_is_equivariant(k in prop::array::uniform4(-PI..PI)) {
            let lhs = collapse_map(&k.map(|x| -x));
            let rhs = tau(&collapse_map(&k));
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-14);
            }
            prop_assert!((norm(&collapse_map(&k)) - 1.0).abs() < 1e-14);
        }
    }
}
