use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{InvariantReport, VOL_S4};
use crate::error::{Error, Result};
use crate::geometry::{Grid, GridSpec, Vec4, MAX_DIM};
use crate::linalg::{trace_prod, volume_density5, C64, I, M4};
use crate::models::{Band, CoefficientMap};
use crate::numerics::try_par_sum;
use crate::projectors::FieldSource;

/// Step used on chart grids when the field can be evaluated off the lattice. The lattice
/// spacing of a practical chart grid (≈ 0.5) is far too coarse for dP.
pub const CHART_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    /// Lattice on tori and stored fields, [`CHART_STEP`] for closure-backed chart fields.
    Auto,
    /// Stencil on the grid's own lattice (torus: periodic wrap).
    Lattice,
    /// Fixed step in κ, for closure-backed fields.
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    /// 2 or 4
    pub order: u8,
    pub step: Step,
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme { order: 4, step: Step::Auto }
    }
}

impl FdScheme {
    pub fn new(order: u8, step: Step) -> Result<Self> {
        if order != 2 && order != 4 {
            return Err(Error::InvalidInput(format!("finite-difference order must be 2 or 4, got {order}")));
        }
        if let Step::Fixed(h) = step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")));
            }
        }
        Ok(FdScheme { order, step })
    }

    /// Settles `Auto` for a given field.
    pub fn resolve(&self, src: &dyn FieldSource) -> FdScheme {
        let step = match self.step {
            Step::Auto if src.grid().is_chart() && src.extends_beyond_box() => Step::Fixed(CHART_STEP),
            Step::Auto => Step::Lattice,
            s => s,
        };
        FdScheme { order: self.order, step }
    }

    /// Stencil half-width in lattice sites.
    fn reach(&self) -> usize {
        match self.step {
            Step::Lattice | Step::Auto => self.order as usize / 2,
            Step::Fixed(_) => 0,
        }
    }
}

fn coords(grid: &Grid, idx: &[isize; MAX_DIM]) -> Vec4 {
    let mut x = [0.0; 4];
    for a in 0..grid.dim() {
        x[a] = grid.lattice_coord(a, idx[a]);
    }
    x
}

/// ∂_a P at a lattice site.
fn partial(src: &dyn FieldSource, idx: &[isize; MAX_DIM], axis: usize, fd: &FdScheme) -> Result<M4> {
    let grid = src.grid();
    let sample = |k: isize| -> Result<M4> {
        match fd.step {
            Step::Lattice | Step::Auto => {
                let mut j = *idx;
                j[axis] += k;
                src.at_site(j)
            }
            Step::Fixed(h) => {
                let mut x = coords(grid, idx);
                x[axis] += k as f64 * h;
                src.at_point(&x).ok_or_else(|| {
                    Error::Unsupported("a fixed finite-difference step needs a field that can be evaluated off the grid".into())
                })?
            }
        }
    };
    let h = match fd.step {
        Step::Lattice | Step::Auto => grid.spacing(axis),
        Step::Fixed(h) => h,
    };
    Ok(match fd.order {
        2 => (sample(1)? - sample(-1)?) / C64::new(2.0 * h, 0.0),
        _ => {
            let d = (sample(-2)? - sample(2)?) + (sample(1)? - sample(-1)?) * C64::new(8.0, 0.0);
            d / C64::new(12.0 * h, 0.0)
        }
    })
}

/// The sites integrated over and their weights, per axis. Stored chart fields lose `margin`
/// layers on each side so that no stencil leaves the box; the trapezoid rule is re-applied on
/// the shrunken box.
struct Region {
    ranges: Vec<(isize, isize)>,
    weights: Vec<Vec<f64>>,
}

impl Region {
    fn new(src: &dyn FieldSource, margin: usize) -> Result<Region> {
        let grid = src.grid();
        let shrink = grid.is_chart() && !src.extends_beyond_box();
        let mut ranges = Vec::new();
        let mut weights = Vec::new();
        for a in 0..grid.dim() {
            let n = grid.axis_len(a);
            if shrink {
                let m = margin;
                if n < 2 * m + 2 {
                    return Err(Error::InvalidGrid(format!("axis {a} has {n} points, too few for the stencil")));
                }
                let (lo, hi) = (m as isize, (n - 1 - m) as isize);
                let h = grid.spacing(a);
                let len = (hi - lo + 1) as usize;
                let mut w = vec![h; len];
                w[0] *= 0.5;
                w[len - 1] *= 0.5;
                ranges.push((lo, hi));
                weights.push(w);
            } else {
                ranges.push((0, n as isize - 1));
                weights.push((0..n).map(|i| single_axis_weight(grid, a, i)).collect());
            }
        }
        Ok(Region { ranges, weights })
    }

    fn len(&self) -> usize {
        self.ranges.iter().map(|(lo, hi)| (hi - lo + 1) as usize).product()
    }

    #[inline]
    fn site(&self, mut i: usize) -> ([isize; MAX_DIM], f64) {
        let mut idx = [0isize; MAX_DIM];
        let mut w = 1.0;
        for a in (0..self.ranges.len()).rev() {
            let (lo, hi) = self.ranges[a];
            let n = (hi - lo + 1) as usize;
            let k = i % n;
            i /= n;
            idx[a] = lo + k as isize;
            w *= self.weights[a][k];
        }
        (idx, w)
    }

    fn spec_note(&self, grid: &Grid) -> String {
        let parts: Vec<String> = self
            .ranges
            .iter()
            .enumerate()
            .map(|(a, (lo, hi))| format!("[{:.4}, {:.4}]", grid.lattice_coord(a, *lo), grid.lattice_coord(a, *hi)))
            .collect();
        parts.join(" x ")
    }
}

fn single_axis_weight(grid: &Grid, axis: usize, i: usize) -> f64 {
    match grid.spec() {
        GridSpec::Torus { n, .. } => 2.0 * PI / n as f64,
        GridSpec::Chart { n, .. } => {
            let h = grid.spacing(axis);
            if i == 0 || i == n - 1 {
                0.5 * h
            } else {
                h
            }
        }
        GridSpec::S3Angles { .. } => f64::NAN,
    }
}

fn require_uniform(grid: &Grid, dim: usize, what: &str) -> Result<()> {
    if grid.dim() != dim {
        return Err(Error::InvalidGrid(format!("{what} needs a {dim}-dimensional grid, got dimension {}", grid.dim())));
    }
    if matches!(grid.spec(), GridSpec::S3Angles { .. }) {
        return Err(Error::InvalidGrid(format!("{what} needs a torus or chart grid")));
    }
    if (0..dim).any(|a| grid.axis_len(a) < 8) {
        return Err(Error::InvalidGrid(format!("{what} needs at least 8 points per axis")));
    }
    Ok(())
}

/// Σ_{σ∈S₄} sgn σ Tr[P ∂_{σ1}P ∂_{σ2}P ∂_{σ3}P ∂_{σ4}P], grouped into commutators:
/// Tr[P({C₀₁,C₂₃} − {C₀₂,C₁₃} + {C₀₃,C₁₂})] with C_ab = [∂_aP, ∂_bP].
#[inline]
pub fn c2_integrand(p: &M4, d: &[M4; 4]) -> C64 {
    let comm = |a: usize, b: usize| d[a] * d[b] - d[b] * d[a];
    let (c01, c23) = (comm(0, 1), comm(2, 3));
    let (c02, c13) = (comm(0, 2), comm(1, 3));
    let (c03, c12) = (comm(0, 3), comm(1, 2));
    let x = c01 * c23 + c23 * c01 - c02 * c13 - c13 * c02 + c03 * c12 + c12 * c03;
    trace_prod(p, &x)
}

/// C₂ = (1/8π²)∫Tr[P(dP)⁴] with central differences. Torus grids wrap; stored chart fields
/// are integrated over the interior where the lattice stencil fits; closure-backed chart
/// fields integrate the whole box with a small fixed step.
pub fn second_chern_trace(src: &dyn FieldSource, fd: &FdScheme) -> Result<InvariantReport> {
    let grid = src.grid();
    require_uniform(grid, 4, "the second Chern trace form")?;
    let fd = &fd.resolve(src);
    let region = Region::new(src, fd.reach())?;
    let [re, im] = try_par_sum(region.len(), |i| {
        let (idx, w) = region.site(i);
        let p = src.at_site(idx)?;
        let d = [
            partial(src, &idx, 0, fd)?,
            partial(src, &idx, 1, fd)?,
            partial(src, &idx, 2, fd)?,
            partial(src, &idx, 3, fd)?,
        ];
        let v = c2_integrand(&p, &d) * w;
        Ok::<_, Error>([v.re, v.im])
    })?;
    let k = 1.0 / (8.0 * PI * PI);
    Ok(InvariantReport::new("c2", "trace", k * re, Some(grid.spec()))
        .with("imaginary_part", k * im)
        .with("fd_order", fd.order)
        .with("fd_step", fd.step)
        .with("integration_region", region.spec_note(grid))
        .with("rank", src.rank()))
}

/// (i/2π)∫Tr[P[∂₁P, ∂₂P]] on a two-dimensional field.
pub fn first_chern(src: &dyn FieldSource, fd: &FdScheme) -> Result<InvariantReport> {
    let grid = src.grid();
    require_uniform(grid, 2, "the first Chern form")?;
    let fd = &fd.resolve(src);
    let region = Region::new(src, fd.reach())?;
    let [re, im] = try_par_sum(region.len(), |i| {
        let (idx, w) = region.site(i);
        let p = src.at_site(idx)?;
        let d0 = partial(src, &idx, 0, fd)?;
        let d1 = partial(src, &idx, 1, fd)?;
        let v = trace_prod(&p, &(d0 * d1 - d1 * d0)) * I * w;
        Ok::<_, Error>([v.re, v.im])
    })?;
    let k = 1.0 / (2.0 * PI);
    Ok(InvariantReport::new("c1", "trace", k * re, Some(grid.spec()))
        .with("imaginary_part", k * im)
        .with("fd_order", fd.order)
        .with("fd_step", fd.step)
        .with("rank", src.rank()))
}

/// A two-dimensional slice of a four-dimensional field: axes `axes` vary, the others stay at
/// the given lattice indices.
pub struct SliceField<'a> {
    base: &'a dyn FieldSource,
    axes: (usize, usize),
    fixed: [isize; MAX_DIM],
    grid: Grid,
}

impl<'a> SliceField<'a> {
    pub fn new(base: &'a dyn FieldSource, axes: (usize, usize), fixed: [isize; MAX_DIM]) -> Result<Self> {
        let g = base.grid();
        let (a, b) = axes;
        if g.dim() != 4 || a >= b || b >= 4 {
            return Err(Error::InvalidInput(format!("bad slice axes {axes:?} for a {}-dimensional field", g.dim())));
        }
        if g.axis_len(a) != g.axis_len(b) {
            return Err(Error::InvalidGrid("slice axes must have the same length".into()));
        }
        let spec = match g.spec() {
            GridSpec::Torus { n, .. } => GridSpec::torus(2, n),
            GridSpec::Chart { half_width, n, .. } => GridSpec::chart(2, half_width, n),
            GridSpec::S3Angles { .. } => return Err(Error::InvalidGrid("angle grids cannot be sliced".into())),
        };
        Ok(SliceField { base, axes, fixed, grid: Grid::new(spec)? })
    }

    fn lift(&self, idx: [isize; MAX_DIM]) -> [isize; MAX_DIM] {
        let mut j = self.fixed;
        j[self.axes.0] = idx[0];
        j[self.axes.1] = idx[1];
        j
    }
}

impl FieldSource for SliceField<'_> {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn rank(&self) -> usize {
        self.base.rank()
    }

    fn at_site(&self, idx: [isize; MAX_DIM]) -> Result<M4> {
        self.base.at_site(self.lift(idx))
    }

    fn at_point(&self, x: &Vec4) -> Option<Result<M4>> {
        let g = self.base.grid();
        let mut y = [0.0; 4];
        for a in 0..4 {
            y[a] = g.lattice_coord(a, self.fixed[a]);
        }
        y[self.axes.0] = x[0];
        y[self.axes.1] = x[1];
        self.base.at_point(&y)
    }

    fn extends_beyond_box(&self) -> bool {
        self.base.extends_beyond_box()
    }
}

/// c₂(E_±) = ±(1/Vol S⁴)∫Q^{−5/2} Σ_j(−1)^{j+1}F_j dF₀∧…∧d̂F_j∧…∧dF₄ with exact derivatives.
pub fn second_chern_closed_form(f: &CoefficientMap, band: Band, grid: &Grid) -> Result<InvariantReport> {
    if grid.dim() != 4 || !grid.is_chart() {
        return Err(Error::InvalidGrid("the closed-form density is evaluated on a 4-dimensional chart grid".into()));
    }
    let [s] = try_par_sum(grid.len(), |i| {
        let k = grid.point4(i);
        let (v, d) = f.jet(&k);
        let q: f64 = v.iter().map(|x| x * x).sum();
        if q <= 0.0 || !q.is_finite() {
            return Err(Error::NonPositiveQ { index: i, q });
        }
        Ok([grid.weight(i) * volume_density5(&v, &d) * q.powf(-2.5)])
    })?;
    Ok(InvariantReport::new("c2", "closed-form", band.sign() * s / VOL_S4, Some(grid.spec()))
        .with("band", band))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::collapse_map;
    use crate::models::{band_projector, hopf_projector, standard_ansatz, Polynomial, Rational, E0};
    use crate::projectors::{lazy, ProjectorField};

    fn qwz(k: &Vec4) -> M4 {
        let n = [k[0].sin(), k[1].sin(), 1.0 + k[0].cos() + k[1].cos()];
        let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let n = n.map(|x| x / r);
        // ½(1 + n·σ) in the upper-left block
        let mut p = M4::zeros();
        p[(0, 0)] = C64::new(0.5 * (1.0 + n[2]), 0.0);
        p[(1, 1)] = C64::new(0.5 * (1.0 - n[2]), 0.0);
        p[(0, 1)] = C64::new(0.5 * n[0], -0.5 * n[1]);
        p[(1, 0)] = C64::new(0.5 * n[0], 0.5 * n[1]);
        p
    }

    #[test]
    fn constant_field_has_no_charge() {
        let g = Grid::new(GridSpec::torus(4, 8)).unwrap();
        let p = lazy(g, 2, |_| hopf_projector(&E0));
        let r = second_chern_trace(&p, &FdScheme::default()).unwrap();
        assert!(r.value.abs() < 1e-14);
        let g2 = Grid::new(GridSpec::torus(2, 8)).unwrap();
        let p = ProjectorField::from_fn(g2, 2, |_| hopf_projector(&E0));
        assert_eq!(first_chern(&p, &FdScheme::default()).unwrap().value, 0.0);
    }

    #[test]
    fn winding_oracle() {
        let g = Grid::new(GridSpec::torus(2, 96)).unwrap();
        let p = lazy(g, 1, qwz);
        let r = first_chern(&p, &FdScheme::default()).unwrap();
        assert!((r.value.abs() - 1.0).abs() < 1e-3, "{}", r.value);
        assert!(r.diagnostics["imaginary_part"].as_f64().unwrap().abs() < 1e-10);
    }

    #[test]
    fn hopf_on_a_coarse_torus() {
        let g = Grid::new(GridSpec::torus(4, 16)).unwrap();
        let p = lazy(g, 2, |k| hopf_projector(&collapse_map(k)));
        let r = second_chern_trace(&p, &FdScheme::default()).unwrap();
        assert_eq!(r.nearest_integer, 1, "{}", r.value);
    }

    #[test]
    fn closed_form_signs_and_degenerate_map() {
        // the trapezoid error at h ≈ 0.5 is a few percent; L = 8 still holds the tail
        let g = Grid::new(GridSpec::chart(4, 8.0, 32)).unwrap();
        let f = standard_ansatz();
        let plus = second_chern_closed_form(&f, Band::Plus, &g).unwrap();
        let minus = second_chern_closed_form(&f, Band::Minus, &g).unwrap();
        assert!((plus.value - 2.0).abs() < 0.1, "{}", plus.value);
        assert_eq!(plus.value, -minus.value);
        let zero = Rational { numerator: Polynomial::default(), power: 0 };
        let flat = f
            .with_component(1, zero.clone())
            .and_then(|m| m.with_component(2, zero.clone()))
            .and_then(|m| m.with_component(3, zero.clone()))
            .and_then(|m| m.with_component(4, zero.clone()))
            .unwrap();
        // F₀ = (r²−1)/(r²+1) vanishes on the unit sphere, so restrict to a box inside it
        let inner = Grid::new(GridSpec::chart(4, 0.4, 9)).unwrap();
        assert_eq!(second_chern_closed_form(&flat, Band::Plus, &inner).unwrap().value, 0.0);
        // (1, 0, 0, 0) is a node of this grid
        let through = Grid::new(GridSpec::chart(4, 1.0, 5)).unwrap();
        assert!(matches!(second_chern_closed_form(&flat, Band::Plus, &through), Err(Error::NonPositiveQ { .. })));
    }

    #[test]
    fn stored_and_lazy_chart_fields() {
        let g = Grid::new(GridSpec::chart(4, 6.0, 12)).unwrap();
        let f = standard_ansatz();
        let lz = lazy(g.clone(), 2, |k| band_projector(&f.eval(k), Band::Plus));
        let st = lz.materialize().unwrap();
        let a = second_chern_trace(&lz, &FdScheme::default()).unwrap();
        let b = second_chern_trace(&st, &FdScheme::default()).unwrap();
        assert!(a.value.is_finite() && b.value.is_finite());
        assert_ne!(a.diagnostics["integration_region"], b.diagnostics["integration_region"]);
        assert_eq!(a.diagnostics["fd_step"], serde_json::json!({"fixed": CHART_STEP}));
        assert_eq!(b.diagnostics["fd_step"], serde_json::json!("lattice"));
        assert!(second_chern_trace(&st, &FdScheme::new(4, Step::Fixed(1e-3)).unwrap()).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        let g = Grid::new(GridSpec::torus(3, 8)).unwrap();
        let p = lazy(g, 2, |_| hopf_projector(&E0));
        assert!(matches!(second_chern_trace(&p, &FdScheme::default()), Err(Error::InvalidGrid(_))));
        let g = Grid::new(GridSpec::torus(4, 6)).unwrap();
        let p = lazy(g, 2, |_| hopf_projector(&E0));
        assert!(matches!(second_chern_trace(&p, &FdScheme::default()), Err(Error::InvalidGrid(_))));
        assert!(FdScheme::new(3, Step::Lattice).is_err());
    }
}
