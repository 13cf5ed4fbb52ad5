//! Band projector fields: eigenprojection and Riesz contour integral, plus health and
//! Real-structure checks.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Grid, GridSpec, Involution, Vec4, MAX_DIM};
use crate::linalg::{c, frob, hermitian_eigenvalues, sign_projector, C64, M4};
use crate::models::{Band, JChoice};
use crate::numerics::par_argmax;

/// Eigenvalues closer to zero than this count as a closed gap.
pub const GAP_TOL: f64 = 1e-10;

/// Anything that yields a projector at the sites of a grid.
pub trait FieldSource: Sync {
    fn grid(&self) -> &Grid;

    fn rank(&self) -> usize;

    /// Projector at a lattice site. Torus indices wrap; sites outside a chart box are only
    /// available from sources that can evaluate anywhere.
    fn at_site(&self, idx: [isize; MAX_DIM]) -> Result<M4>;

    /// Evaluation away from the lattice, for closure-backed sources.
    fn at_point(&self, _x: &Vec4) -> Option<Result<M4>> {
        None
    }

    /// Whether [`FieldSource::at_site`] works beyond the box edges.
    fn extends_beyond_box(&self) -> bool {
        false
    }

    fn at(&self, i: usize) -> Result<M4> {
        let m = self.grid().multi_index(i);
        self.at_site(m.map(|x| x as isize))
    }
}

/// A projector field sampled on demand from a closure.
pub struct LazyField<F> {
    grid: Grid,
    rank: usize,
    f: F,
}

impl<F> LazyField<F>
where
    F: Fn(&Vec4) -> Result<M4> + Sync,
{
    pub fn new(grid: Grid, rank: usize, f: F) -> Self {
        LazyField { grid, rank, f }
    }

    pub fn materialize(&self) -> Result<ProjectorField> {
        let samples = (0..self.grid.len())
            .into_par_iter()
            .map(|i| self.at(i))
            .collect::<Result<Vec<M4>>>()?;
        Ok(ProjectorField { grid: self.grid.clone(), samples, rank: self.rank })
    }
}

impl<F> FieldSource for LazyField<F>
where
    F: Fn(&Vec4) -> Result<M4> + Sync,
{
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    fn at_site(&self, idx: [isize; MAX_DIM]) -> Result<M4> {
        let mut x = [0.0; 4];
        for a in 0..self.grid.dim() {
            x[a] = self.grid.lattice_coord(a, idx[a]);
        }
        (self.f)(&x)
    }

    fn at_point(&self, x: &Vec4) -> Option<Result<M4>> {
        Some((self.f)(x))
    }

    fn extends_beyond_box(&self) -> bool {
        !matches!(self.grid.spec(), GridSpec::S3Angles { .. })
    }
}

/// Wraps an infallible closure.
pub fn lazy<G>(grid: Grid, rank: usize, g: G) -> LazyField<impl Fn(&Vec4) -> Result<M4> + Sync>
where
    G: Fn(&Vec4) -> M4 + Sync,
{
    LazyField::new(grid, rank, move |x: &Vec4| Ok(g(x)))
}

/// One projector per grid point, stored.
#[derive(Clone, Debug)]
pub struct ProjectorField {
    pub grid: Grid,
    pub samples: Vec<M4>,
    pub rank: usize,
}

impl ProjectorField {
    pub fn from_fn<G>(grid: Grid, rank: usize, g: G) -> Self
    where
        G: Fn(&Vec4) -> M4 + Sync,
    {
        let samples = (0..grid.len()).into_par_iter().map(|i| g(&grid.point4(i))).collect();
        ProjectorField { grid, samples, rank }
    }

    pub fn is_chart(&self) -> bool {
        self.grid.is_chart()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ProjectorFieldJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: ProjectorFieldJson = serde_json::from_str(text)?;
        j.try_into()
    }
}

impl FieldSource for ProjectorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    fn at_site(&self, idx: [isize; MAX_DIM]) -> Result<M4> {
        let mut m = [0usize; MAX_DIM];
        for a in 0..self.grid.dim() {
            let n = self.grid.axis_len(a) as isize;
            let i = if self.grid.is_periodic() { idx[a].rem_euclid(n) } else { idx[a] };
            if !(0..n).contains(&i) {
                return Err(Error::InvalidGrid(format!("site {idx:?} lies outside the stored field")));
            }
            m[a] = i as usize;
        }
        Ok(self.samples[self.grid.flat_index(&m)])
    }

    fn at(&self, i: usize) -> Result<M4> {
        Ok(self.samples[i])
    }
}

/// Export layout: row-major entries as [re, im] pairs.
#[derive(Serialize, Deserialize)]
struct ProjectorFieldJson {
    grid: GridSpec,
    rank: usize,
    chart: bool,
    samples: Vec<Vec<[f64; 2]>>,
}

impl From<&ProjectorField> for ProjectorFieldJson {
    fn from(p: &ProjectorField) -> Self {
        let samples = p
            .samples
            .iter()
            .map(|m| (0..16).map(|k| m[(k / 4, k % 4)]).map(|z| [z.re, z.im]).collect())
            .collect();
        ProjectorFieldJson { grid: p.grid.spec(), rank: p.rank, chart: p.is_chart(), samples }
    }
}

impl TryFrom<ProjectorFieldJson> for ProjectorField {
    type Error = Error;

    fn try_from(j: ProjectorFieldJson) -> Result<Self> {
        let grid = Grid::new(j.grid)?;
        if j.samples.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} samples but its grid has {} points",
                j.samples.len(),
                grid.len()
            )));
        }
        let samples = j
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.len() != 16 {
                    return Err(Error::InvalidInput(format!("sample {i} has {} entries, expected 16", s.len())));
                }
                Ok(M4::from_fn(|r, col| C64::new(s[4 * r + col][0], s[4 * r + col][1])))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectorField { grid, samples, rank: j.rank })
    }
}

// ---------------------------------------------------------------------------
// eigenprojection

/// Projector onto the eigenvectors whose eigenvalue sign matches the band, the rank, and
/// the smallest |λ| (the distance of the spectrum from the sign cut).
#[inline]
pub fn spectral_projector_at(h: &M4, band: Band) -> (M4, usize, f64) {
    let (p, rank, gap) = sign_projector(h, band.sign());
    (p, rank, gap)
}

/// Eigenprojection onto the selected sign of the spectrum at every grid point. Bands are
/// chosen by sign, never by index, so the twofold degeneracies need no special care.
pub fn spectral_projector<H>(h: H, grid: &Grid, band: Band) -> Result<ProjectorField>
where
    H: Fn(&Vec4) -> M4 + Sync,
{
    let out: Vec<(M4, usize, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| spectral_projector_at(&h(&grid.point4(i)), band))
        .collect();
    let mut samples = Vec::with_capacity(out.len());
    let expected = out.first().map(|o| o.1).unwrap_or(0);
    for (i, (p, rank, gap)) in out.into_iter().enumerate() {
        if gap < GAP_TOL {
            return Err(Error::GapViolation { index: i, point: grid.point(i), gap });
        }
        if rank != expected {
            return Err(Error::RankChange { index: i, expected, found: rank });
        }
        samples.push(p);
    }
    Ok(ProjectorField { grid: grid.clone(), samples, rank: expected })
}

/// Lazy eigenprojection, for grids too large to store.
pub fn lazy_spectral<H>(h: H, grid: Grid, band: Band, rank: usize) -> LazyField<impl Fn(&Vec4) -> Result<M4> + Sync>
where
    H: Fn(&Vec4) -> M4 + Sync,
{
    LazyField::new(grid, rank, move |x: &Vec4| {
        let (p, r, gap) = spectral_projector_at(&h(x), band);
        if gap < GAP_TOL {
            return Err(Error::GapViolation { index: usize::MAX, point: x.to_vec(), gap });
        }
        if r != rank {
            return Err(Error::RankChange { index: usize::MAX, expected: rank, found: r });
        }
        Ok(p)
    })
}

// ---------------------------------------------------------------------------
// Riesz projector

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: f64,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    pub fn new(center: f64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(Error::InvalidInput(format!("contour radius must be positive and finite, got {radius}")));
        }
        if nodes < 8 {
            return Err(Error::InvalidInput(format!("a contour needs at least 8 nodes, got {nodes}")));
        }
        Ok(Contour { center, radius, nodes })
    }

    /// Distance from the circle to a real eigenvalue.
    pub fn distance(&self, lambda: f64) -> f64 {
        ((lambda - self.center).abs() - self.radius).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ContourRule {
    /// The same circle at every point.
    Fixed(Contour),
    /// Per point: R = ‖H‖_F, circle of radius R centred at ±R, which encloses exactly the
    /// eigenvalues of the selected sign.
    Adaptive { band: Band, nodes: usize },
}

impl ContourRule {
    pub fn contour_for(&self, h: &M4) -> Result<Contour> {
        match *self {
            ContourRule::Fixed(c) => Ok(c),
            ContourRule::Adaptive { band, nodes } => {
                let r = frob(h);
                if r == 0.0 {
                    return Err(Error::GapViolation { index: usize::MAX, point: vec![], gap: 0.0 });
                }
                Contour::new(band.sign() * r, r, nodes)
            }
        }
    }

    pub fn nodes(&self) -> usize {
        match self {
            ContourRule::Fixed(c) => c.nodes,
            ContourRule::Adaptive { nodes, .. } => *nodes,
        }
    }
}

/// Trapezoid rule for (1/2πi)∮(z − H)⁻¹ dz: P ≈ (1/N) Σ_k R e^{iθ_k} (z_k − H)⁻¹.
/// Returns the matrix and the smallest distance of the circle from the spectrum.
pub fn riesz_projector_at(h: &M4, contour: &Contour) -> std::result::Result<(M4, f64), RieszFailure> {
    let dist = hermitian_eigenvalues(h).iter().map(|&l| contour.distance(l)).fold(f64::INFINITY, f64::min);
    let scale = contour.radius.max(contour.center.abs()).max(1.0);
    if dist <= 1e-12 * scale {
        return Err(RieszFailure::HitsSpectrum(dist));
    }
    let n = contour.nodes;
    let mut p = M4::zeros();
    for k in 0..n {
        let theta = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let e = C64::from_polar(1.0, theta);
        let z = c(contour.center) + e * contour.radius;
        let res = (M4::identity() * z - h).try_inverse().ok_or(RieszFailure::Singular(k))?;
        p += res * (e * contour.radius);
    }
    Ok((p / c(n as f64), dist))
}

#[derive(Clone, Copy, Debug)]
pub enum RieszFailure {
    HitsSpectrum(f64),
    Singular(usize),
}

impl RieszFailure {
    fn at(self, index: usize) -> Error {
        match self {
            RieszFailure::HitsSpectrum(distance) => Error::ContourHitsSpectrum { index, distance },
            RieszFailure::Singular(node) => Error::SingularResolvent { index, node },
        }
    }
}

/// Riesz–Dunford projector at every grid point. The rank is the rounded trace at the first
/// point; it is not enforced, so that [`projector_health`] can report defects honestly.
pub fn riesz_projector<H>(h: H, grid: &Grid, rule: &ContourRule) -> Result<ProjectorField>
where
    H: Fn(&Vec4) -> M4 + Sync,
{
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let hm = h(&grid.point4(i));
            let contour = rule.contour_for(&hm).map_err(|_| Error::GapViolation {
                index: i,
                point: grid.point(i),
                gap: 0.0,
            })?;
            riesz_projector_at(&hm, &contour).map(|r| r.0).map_err(|e| e.at(i))
        })
        .collect::<Result<Vec<M4>>>()?;
    let rank = samples.first().map(|p| p.trace().re.round().max(0.0) as usize).unwrap_or(0);
    Ok(ProjectorField { grid: grid.clone(), samples, rank })
}

// ---------------------------------------------------------------------------
// checks

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HealthReport {
    pub max_idempotency_defect: f64,
    pub worst_idempotency_index: usize,
    pub max_hermiticity_defect: f64,
    pub worst_hermiticity_index: usize,
    pub trace_min: f64,
    pub trace_max: f64,
    /// max |Tr P − m|
    pub max_rank_defect: f64,
}

impl HealthReport {
    pub fn max_defect(&self) -> f64 {
        self.max_idempotency_defect.max(self.max_hermiticity_defect).max(self.max_rank_defect)
    }
}

pub fn projector_health(p: &ProjectorField) -> HealthReport {
    let n = p.samples.len();
    let (wi, di) = par_argmax(n, |i| {
        let s = &p.samples[i];
        frob(&(s * s - s))
    });
    let (wh, dh) = par_argmax(n, |i| {
        let s = &p.samples[i];
        frob(&(s - s.adjoint()))
    });
    let (_, tmax) = par_argmax(n, |i| p.samples[i].trace().re);
    let (_, tmin) = par_argmax(n, |i| -p.samples[i].trace().re);
    let (_, rdef) = par_argmax(n, |i| (p.samples[i].trace() - c(p.rank as f64)).norm());
    HealthReport {
        max_idempotency_defect: di.max(0.0),
        worst_idempotency_index: wi,
        max_hermiticity_defect: dh.max(0.0),
        worst_hermiticity_index: wh,
        trace_min: -tmin,
        trace_max: tmax,
        max_rank_defect: rdef.max(0.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealityReport {
    pub involution: Involution,
    pub j: JChoice,
    pub max_deviation: f64,
    pub worst_index: usize,
    pub worst_point: Vec<f64>,
}

/// max over sites of ‖J conj(P(k)) J* − P(ι(k))‖_F. Deviations are reported, not errors;
/// only a grid that the involution does not map to itself is an error.
pub fn verify_real_structure(p: &dyn FieldSource, inv: Involution, j: JChoice) -> Result<RealityReport> {
    let grid = p.grid();
    let jm = j.matrix();
    let jd = jm.adjoint();
    // fail fast on grids without the symmetry
    grid.partner(0, inv)?;
    let devs: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let k = grid.partner(i, inv)?;
            let a = p.at(i)?;
            let b = p.at(k)?;
            Ok(frob(&(jm * a.map(|z| z.conj()) * jd - b)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (worst, dev) = par_argmax(devs.len(), |i| devs[i]);
    Ok(RealityReport {
        involution: inv,
        j,
        max_deviation: dev.max(0.0),
        worst_index: worst,
        worst_point: grid.point(worst),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::stereo4;
    use crate::models::{band_projector, clifford, dirac_hamiltonian, hopf_projector, standard_ansatz};

    fn ansatz_h(k: &Vec4) -> M4 {
        dirac_hamiltonian(&standard_ansatz(), k)
    }

    #[test]
    fn spectral_matches_closed_form() {
        let f = standard_ansatz();
        let g = Grid::new(GridSpec::chart(4, 3.0, 6)).unwrap();
        for band in [Band::Minus, Band::Plus] {
            let p = spectral_projector(ansatz_h, &g, band).unwrap();
            assert_eq!(p.rank, 2);
            for i in 0..g.len() {
                let want = band_projector(&f.eval(&g.point4(i)), band);
                assert!((p.samples[i] - want).norm() < 1e-12);
            }
            assert!(projector_health(&p).max_defect() < 1e-12);
        }
    }

    #[test]
    fn reflection_eigenprojection() {
        let g = Grid::new(GridSpec::torus(2, 4)).unwrap();
        let p = spectral_projector(|_| clifford()[0], &g, Band::Minus).unwrap();
        let want = (M4::identity() - clifford()[0]) * c(0.5);
        assert!(p.samples.iter().all(|s| (s - want).norm() < 1e-14));
    }

    #[test]
    fn gap_violation_located() {
        let g = Grid::new(GridSpec::chart(1, 1.0, 5)).unwrap();
        let err = spectral_projector(|k| clifford()[1] * c(k[0]), &g, Band::Minus).unwrap_err();
        match err {
            Error::GapViolation { index, point, gap } => {
                assert_eq!(index, 2);
                assert_eq!(point, vec![0.0]);
                assert!(gap < 1e-15);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn riesz_matches_spectral() {
        let g = Grid::new(GridSpec::chart(4, 3.0, 5)).unwrap();
        let rule = ContourRule::Adaptive { band: Band::Minus, nodes: 64 };
        let r = riesz_projector(ansatz_h, &g, &rule).unwrap();
        let s = spectral_projector(ansatz_h, &g, Band::Minus).unwrap();
        let (_, d) = par_argmax(g.len(), |i| frob(&(r.samples[i] - s.samples[i])));
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn riesz_all_or_nothing() {
        let g = Grid::new(GridSpec::chart(4, 2.0, 4)).unwrap();
        // spectrum ⊂ [−1.3, 1.3] on this box; Q ≤ 1 + small
        let all = Contour::new(0.0, 10.0, 64).unwrap();
        let p = riesz_projector(ansatz_h, &g, &ContourRule::Fixed(all)).unwrap();
        assert!(p.samples.iter().all(|s| (s - M4::identity()).norm() < 1e-12));
        let none = Contour::new(20.0, 1.0, 64).unwrap();
        let p = riesz_projector(ansatz_h, &g, &ContourRule::Fixed(none)).unwrap();
        assert!(p.samples.iter().all(|s| s.norm() < 1e-12));
        assert_eq!(p.rank, 0);
    }

    #[test]
    fn contour_through_spectrum_rejected() {
        let g = Grid::new(GridSpec::torus(1, 4)).unwrap();
        let bad = Contour::new(0.0, 1.0, 16).unwrap();
        let err = riesz_projector(|_| clifford()[2], &g, &ContourRule::Fixed(bad)).unwrap_err();
        assert!(matches!(err, Error::ContourHitsSpectrum { index: 0, .. }));
        assert!(Contour::new(0.0, 1.0, 4).is_err());
        assert!(Contour::new(0.0, -1.0, 16).is_err());
    }

    #[test]
    fn riesz_defect_shrinks_with_nodes() {
        let g = Grid::new(GridSpec::chart(4, 4.0, 5)).unwrap();
        let mut last = f64::INFINITY;
        for nodes in [8, 16, 32] {
            let p = riesz_projector(ansatz_h, &g, &ContourRule::Adaptive { band: Band::Minus, nodes }).unwrap();
            let d = projector_health(&p).max_idempotency_defect;
            assert!(d < last, "nodes={nodes}: {d} vs {last}");
            last = d;
        }
    }

    #[test]
    fn corrupted_sample_is_localized() {
        let g = Grid::new(GridSpec::torus(2, 8)).unwrap();
        let mut p = ProjectorField::from_fn(g, 2, |_| hopf_projector(&[1.0, 0.0, 0.0, 0.0, 0.0]));
        p.samples[37][(0, 1)] += C64::new(0.0, 0.1);
        let h = projector_health(&p);
        assert_eq!(h.worst_idempotency_index, 37);
        assert_eq!(h.worst_hermiticity_index, 37);
    }

    #[test]
    fn bands_complement() {
        let f = standard_ansatz();
        let g = Grid::new(GridSpec::chart(4, 5.0, 7)).unwrap();
        for i in 0..g.len() {
            let k = g.point4(i);
            let a = band_projector(&f.eval(&k), Band::Plus);
            let b = band_projector(&f.eval(&k), Band::Minus);
            assert!((a + b - M4::identity()).norm() < 1e-12);
            assert!((a * b).norm() < 1e-12);
        }
    }

    #[test]
    fn real_structures() {
        let f = standard_ansatz();
        let g = Grid::new(GridSpec::chart(4, 3.0, 7)).unwrap();
        let p = ProjectorField::from_fn(g.clone(), 2, |k| band_projector(&f.eval(k), Band::Plus));
        let r = verify_real_structure(&p, Involution::Tau, JChoice::One).unwrap();
        assert!(r.max_deviation < 1e-12);
        let hopf = ProjectorField::from_fn(g, 2, |k| hopf_projector(&stereo4(k)));
        assert!(verify_real_structure(&hopf, Involution::Varpi, JChoice::One).unwrap().max_deviation < 1e-12);
        assert!(verify_real_structure(&hopf, Involution::Tau, JChoice::One).unwrap().max_deviation > 0.5);
        assert!(matches!(
            verify_real_structure(&hopf, Involution::Antipodal, JChoice::One),
            Err(Error::NotInvolutionClosed(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let g = Grid::new(GridSpec::torus(2, 4)).unwrap();
        let p = ProjectorField::from_fn(g, 2, |k| hopf_projector(&stereo4(k)));
        let text = p.to_json().unwrap();
        let q = ProjectorField::from_json(&text).unwrap();
        assert_eq!(p.samples, q.samples);
        assert_eq!(q.grid.spec(), p.grid.spec());
        assert!(ProjectorField::from_json(r#"{"grid":{"domain":"torus","dim":2,"n":4},"rank":1,"chart":false,"samples":[]}"#).is_err());
    }

    #[test]
    fn lazy_sites_beyond_box() {
        let g = Grid::new(GridSpec::chart(2, 1.0, 5)).unwrap();
        let z = lazy(g.clone(), 2, |k| hopf_projector(&stereo4(k)));
        let far = z.at_site([-3, 7, 0, 0]).unwrap();
        let want = hopf_projector(&stereo4(&[-2.5, 2.5, 0.0, 0.0]));
        assert!((far - want).norm() < 1e-15);
        let stored = z.materialize().unwrap();
        assert!(stored.at_site([-1, 0, 0, 0]).is_err());
        assert_eq!(stored.at_site([4, 4, 0, 0]).unwrap(), z.at_site([4, 4, 0, 0]).unwrap());
    }
}
