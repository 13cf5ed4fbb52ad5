//! Cross-method agreement of Chern numbers and degrees on moderate grids.

use realbloch::geometry::{Grid, GridSpec, Vec5};
use realbloch::invariants::{
    ai_consistency, compute_degree, orientation_coherence, second_chern_closed_form, second_chern_trace, AiGrids,
    DegreeMethod, DegreeQuery, FdScheme, InvariantReport, MapDescriptor, RegularValueOptions, Step, Verdict,
};
use realbloch::models::{equivariant_even_map, standard_ansatz, Band, Model, DEFAULT_COLLAR};
use realbloch::projectors::lazy;

fn trace(model: &Model, band: Band, spec: GridSpec, fd: FdScheme) -> InvariantReport {
    let grid = Grid::new(spec).unwrap();
    let p = if grid.is_chart() { model.chart_projector(band) } else { model.torus_projector(band) }.unwrap();
    second_chern_trace(&lazy(grid, 2, p), &fd).unwrap()
}

#[test]
fn residual_shrinks_under_refinement() {
    for name in ["hopf", "standard-ansatz"] {
        let m = Model::builtin(name).unwrap();
        let runs: Vec<_> =
            [16, 32].iter().map(|&n| trace(&m, Band::Plus, GridSpec::torus(4, n), FdScheme::default())).collect();
        let r = InvariantReport::refined(runs).unwrap();
        assert!(r.residual_decreasing(), "{name}: {:?}", r.refinement);
        assert_eq!(r.nearest_integer, if name == "hopf" { 1 } else { 2 });
    }
}

#[test]
fn trace_and_closed_form_agree() {
    let f = standard_ansatz();
    let spec = GridSpec::chart(4, 8.0, 32);
    let m = Model::builtin("standard-ansatz").unwrap();
    for band in [Band::Plus, Band::Minus] {
        let cf = second_chern_closed_form(&f, band, &Grid::new(spec).unwrap()).unwrap();
        let tr = trace(&m, band, spec, FdScheme::default());
        assert!((cf.value - tr.value).abs() < 5e-3, "{band:?}: {} vs {}", cf.value, tr.value);
        assert_eq!(cf.nearest_integer, 2 * band.sign() as i64);
    }
}

#[test]
fn degree_methods_agree_on_builtin_maps() {
    let small_s3 = GridSpec::s3(32, 32, 32);
    let cases = [
        (MapDescriptor::Identity, 1, Some(GridSpec::chart(4, 8.0, 32))),
        (MapDescriptor::Power(2), 2, Some(small_s3)),
        (MapDescriptor::Power(-3), -3, Some(small_s3)),
        (MapDescriptor::Ansatz, 2, Some(GridSpec::chart(4, 8.0, 32))),
    ];
    for (map, want, volume_grid) in cases {
        let mut q = DegreeQuery::new(map, DegreeMethod::RegularValue);
        assert_eq!(compute_degree(&q).unwrap().value, want as f64, "{map} regular value");
        q.method = DegreeMethod::Cartan;
        q.grid = Some(small_s3);
        assert_eq!(compute_degree(&q).unwrap().nearest_integer, want, "{map} cartan");
        q.method = DegreeMethod::Volume;
        q.grid = volume_grid;
        assert_eq!(compute_degree(&q).unwrap().nearest_integer, want, "{map} volume");
    }
}

#[test]
fn chern_number_of_a_pullback_is_the_degree() {
    // spectral torus quadrature with an off-lattice step
    let fd = FdScheme::new(4, Step::Fixed(1e-3)).unwrap();
    for n in 0..=2u32 {
        let m = Model::builtin(&format!("even-map:{n}")).unwrap();
        let c2 = trace(&m, Band::Plus, GridSpec::torus(4, 32), fd);
        let q = DegreeQuery { collar: DEFAULT_COLLAR, ..DegreeQuery::new(MapDescriptor::Even(n), DegreeMethod::RegularValue) };
        let deg = if n == 0 { 0.0 } else { compute_degree(&q).unwrap().value };
        assert_eq!(c2.nearest_integer as f64, deg, "n={n}: C2 {}", c2.value);
        assert!(c2.residual < 1e-2, "n={n}: {}", c2.value);
    }
}

#[test]
fn real_even_maps_have_even_c2() {
    let grids = AiGrids { reality: GridSpec::torus(4, 9), slice_n: 16, c2: GridSpec::torus(4, 32), ..AiGrids::default() };
    for n in [1u32, 2] {
        let r = ai_consistency(&Model::builtin(&format!("even-map:{n}")).unwrap(), Band::Plus, &grids).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent, "n={n}: {}", r.reason);
        assert_eq!(r.c2.unwrap().nearest_integer, 2 * n as i64);
        assert!(r.max_slice_c1.unwrap() < 1e-6);
    }
}

#[test]
fn doubling_reflections_preserve_degree() {
    let y: Vec5 = [0.3, -0.2, 0.5, 0.6, -0.51];
    let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let y = y.map(|v| v / n);
    let opts = RegularValueOptions { seeds: 300, ..Default::default() };
    for n in 1..=3u32 {
        let phi = equivariant_even_map(n, DEFAULT_COLLAR).unwrap();
        let r = orientation_coherence(phi.as_ref(), &y, &opts).unwrap();
        assert_eq!(r.base_degree, 2.0 * n as f64);
        assert!(r.coherent, "{r:?}");
    }
}
