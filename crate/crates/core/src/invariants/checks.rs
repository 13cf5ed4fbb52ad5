use serde::{Deserialize, Serialize};

use super::{first_chern, regular_value_degree, second_chern_trace, FdScheme, InvariantReport, Manifold,
    RegularValueOptions, SliceField, SmoothMap};
use crate::error::Result;
use crate::geometry::{tau, varpi, Grid, GridSpec, Involution, Vec5, MAX_DIM};
use crate::models::{Band, JChoice, Model, SphereMap};
use crate::projectors::{lazy, verify_real_structure, FieldSource, RealityReport};

/// Deviations below this count as an exact Real structure.
pub const REALITY_TOL: f64 = 1e-10;
/// |c₁| below this counts as vanishing.
pub const SLICE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AiGrids {
    /// torus grid for the Real-structure check
    pub reality: GridSpec,
    /// points per axis of each 2D torus slice
    pub slice_n: usize,
    /// grid for C₂ by the trace form: a chart, or a torus carrying the collapse pullback
    pub c2: GridSpec,
    pub fd: FdScheme,
}

impl Default for AiGrids {
    fn default() -> Self {
        // Even maps concentrate their density near the hemisphere poles; the collapse pullback
        // resolves that far better per point than a chart grid.
        AiGrids { reality: GridSpec::torus(4, 17), slice_n: 32, c2: GridSpec::torus(4, 48), fd: FdScheme::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceChern {
    pub axes: (usize, usize),
    /// the two frozen torus angles (0 or π), in axis order
    pub anchor: [f64; 2],
    pub c1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AiReport {
    pub model: String,
    pub band: Band,
    pub reality: RealityReport,
    pub slices: Vec<SliceChern>,
    pub max_slice_c1: Option<f64>,
    pub c2: Option<InvariantReport>,
    pub c2_even: Option<bool>,
    pub verdict: Verdict,
    pub reason: String,
}

/// The necessary conditions for class AI, checked on a model as a τ-Real candidate:
/// exact Real structure on a torus grid, vanishing c₁ on every coordinate 2-slice through
/// τ-fixed points, and even C₂.
pub fn ai_consistency(model: &Model, band: Band, grids: &AiGrids) -> Result<AiReport> {
    let j = model.symmetry().unwrap_or(JChoice::One);
    let torus = Grid::new(grids.reality)?;
    let field = lazy(torus, 2, model.torus_projector(band)?);
    let reality = verify_real_structure(&field, Involution::Tau, j)?;
    let mut report = AiReport {
        model: model.name(),
        band,
        reality,
        slices: Vec::new(),
        max_slice_c1: None,
        c2: None,
        c2_even: None,
        verdict: Verdict::NotApplicable,
        reason: String::new(),
    };
    if report.reality.max_deviation > REALITY_TOL {
        report.reason = format!(
            "not Real under tau with J = {j}: deviation {:.3e} at {:?}",
            report.reality.max_deviation, report.reality.worst_point
        );
        return Ok(report);
    }

    let n = grids.slice_n;
    let base = lazy(Grid::new(GridSpec::torus(4, n))?, 2, model.torus_projector(band)?);
    // torus index of angle 0 and of −π
    let anchors = [(n / 2) as isize, 0isize];
    let fd = FdScheme::default();
    for a in 0..4 {
        for b in a + 1..4 {
            let others: Vec<usize> = (0..4).filter(|&c| c != a && c != b).collect();
            for &i0 in &anchors {
                for &i1 in &anchors {
                    let mut fixed = [0isize; MAX_DIM];
                    fixed[others[0]] = i0;
                    fixed[others[1]] = i1;
                    let slice = SliceField::new(&base, (a, b), fixed)?;
                    let c1 = first_chern(&slice, &fd)?.value;
                    let g = FieldSource::grid(&base);
                    report.slices.push(SliceChern {
                        axes: (a, b),
                        anchor: [g.lattice_coord(others[0], i0), g.lattice_coord(others[1], i1)],
                        c1,
                    });
                }
            }
        }
    }
    let max_c1 = report.slices.iter().map(|s| s.c1.abs()).fold(0.0, f64::max);
    report.max_slice_c1 = Some(max_c1);

    let grid = Grid::new(grids.c2)?;
    let p = if grid.is_chart() { model.chart_projector(band)? } else { model.torus_projector(band)? };
    let c2 = second_chern_trace(&lazy(grid, 2, p), &grids.fd)?;
    let even = c2.nearest_integer % 2 == 0;
    report.c2_even = Some(even);
    report.c2 = Some(c2);
    report.verdict = if even && max_c1 < SLICE_TOL { Verdict::Consistent } else { Verdict::Inconsistent };
    report.reason = match (even, max_c1 < SLICE_TOL) {
        (true, true) => "Real, all fixed-point slices have c1 = 0, C2 even".into(),
        (false, _) => "C2 is odd".into(),
        (true, false) => format!("a fixed-point slice has |c1| = {max_c1:.3e}"),
    };
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub model: String,
    pub band: Band,
    pub sphere: InvariantReport,
    pub torus: InvariantReport,
    pub agree: bool,
}

/// C₂ on S⁴ (chart) against C₂ of the collapse pullback on T⁴.
pub fn collapse_pullback_check(model: &Model, band: Band, chart: GridSpec, torus: GridSpec) -> Result<CollapseReport> {
    let fd = FdScheme::default();
    let sphere = second_chern_trace(&lazy(Grid::new(chart)?, 2, model.chart_projector(band)?), &fd)?;
    let torus = second_chern_trace(&lazy(Grid::new(torus)?, 2, model.torus_projector(band)?), &fd)?;
    Ok(CollapseReport {
        model: model.name(),
        band,
        agree: sphere.nearest_integer == torus.nearest_integer,
        sphere,
        torus,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceEntry {
    pub composition: String,
    pub degree: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub base_degree: f64,
    pub entries: Vec<CoherenceEntry>,
    pub coherent: bool,
}

/// deg(ϑ∘φ∘ϑ') = deg φ for ϑ, ϑ' among the reflections τ and ϖ that glue the two hemispheres
/// in the doubling construction; both flip an even number of coordinates and so have degree +1.
pub fn orientation_coherence(phi: &dyn SphereMap, y: &Vec5, opts: &RegularValueOptions) -> Result<CoherenceReport> {
    let degree = |g: &(dyn Fn(&[f64]) -> Vec<f64> + Sync)| -> Result<f64> {
        let map = SmoothMap { domain: Manifold::Sphere(4), target: Manifold::Sphere(4), f: g };
        Ok(regular_value_degree(&map, y, opts)?.0.value)
    };
    let v5 = |x: &[f64]| -> Vec5 { [x[0], x[1], x[2], x[3], x[4]] };
    let base = degree(&|x| phi.apply(&v5(x)).to_vec())?;
    let mut entries = vec![
        CoherenceEntry { composition: "tau".into(), degree: degree(&|x| tau(&v5(x)).to_vec())? },
        CoherenceEntry { composition: "varpi".into(), degree: degree(&|x| varpi(&v5(x)).to_vec())? },
    ];
    let compositions: [(&str, &(dyn Fn(&[f64]) -> Vec<f64> + Sync)); 3] = [
        ("phi o tau", &|x| phi.apply(&tau(&v5(x))).to_vec()),
        ("varpi o phi", &|x| varpi(&phi.apply(&v5(x))).to_vec()),
        ("varpi o phi o tau", &|x| varpi(&phi.apply(&tau(&v5(x)))).to_vec()),
    ];
    let mut coherent = entries.iter().all(|e| e.degree == 1.0);
    for (name, g) in compositions {
        let d = degree(g)?;
        coherent &= d == base;
        entries.push(CoherenceEntry { composition: name.into(), degree: d });
    }
    Ok(CoherenceReport { base_degree: base, entries, coherent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{equivariant_even_map, AnsatzMap, DEFAULT_COLLAR};

    fn quick() -> AiGrids {
        AiGrids { reality: GridSpec::torus(4, 9), slice_n: 16, c2: GridSpec::chart(4, 10.0, 20), fd: FdScheme::default() }
    }

    #[test]
    fn hopf_is_not_a_tau_candidate() {
        let r = ai_consistency(&Model::Hopf, Band::Plus, &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::NotApplicable);
        assert!(r.reality.max_deviation > 0.1);
        assert!(r.c2.is_none());
    }

    #[test]
    fn constant_model_is_consistent() {
        let r = ai_consistency(&Model::builtin("constant").unwrap(), Band::Plus, &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent, "{}", r.reason);
        assert_eq!(r.slices.len(), 24);
        assert_eq!(r.c2.unwrap().value, 0.0);
    }

    #[test]
    fn ansatz_slices_vanish() {
        let r = ai_consistency(&Model::builtin("standard-ansatz").unwrap(), Band::Plus, &quick()).unwrap();
        assert!(r.reality.max_deviation < 1e-12);
        assert!(r.max_slice_c1.unwrap() < SLICE_TOL);
        // anchors at 0 and −π
        assert!(r.slices.iter().any(|s| s.anchor == [0.0, -std::f64::consts::PI]));
    }

    #[test]
    fn coherence_of_doubling_reflections() {
        let y = [0.13, 0.47, -0.61, 0.38, -0.5];
        let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y = y.map(|v| v / n);
        let opts = RegularValueOptions { seeds: 300, ..Default::default() };
        let r = orientation_coherence(&AnsatzMap { band: Band::Plus }, &y, &opts).unwrap();
        assert_eq!(r.base_degree, 2.0);
        assert!(r.coherent, "{r:?}");
        let phi = equivariant_even_map(2, DEFAULT_COLLAR).unwrap();
        let r = orientation_coherence(phi.as_ref(), &y, &opts).unwrap();
        assert_eq!(r.base_degree, 4.0);
        assert!(r.coherent, "{r:?}");
    }

    #[test]
    fn collapse_on_coarse_grids() {
        let r = collapse_pullback_check(&Model::Hopf, Band::Plus, GridSpec::chart(4, 10.0, 24), GridSpec::torus(4, 16))
            .unwrap();
        assert!(r.agree, "{} vs {}", r.sphere.value, r.torus.value);
        assert_eq!(r.sphere.nearest_integer, 1);
    }
}
