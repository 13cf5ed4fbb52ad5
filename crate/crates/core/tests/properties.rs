//! Randomized properties of models, projectors and degrees.

use proptest::prelude::*;

use realbloch::geometry::{tau, varpi, Grid, GridSpec, Vec4, Vec5};
use realbloch::invariants::{regular_value_degree, Manifold, RegularValueOptions, SmoothMap};
use realbloch::linalg::M4;
use realbloch::models::{
    band_projector, check_symmetry, dirac_hamiltonian, equivariant_even_map, normalize5, parity_row, s3_power, Band,
    CoefficientMap, JChoice, Parity, Polynomial, Rational, DEFAULT_COLLAR,
};

/// A monomial whose total degree has the requested parity.
fn monomial(parity: Parity) -> impl Strategy<Value = ([u32; 4], f64)> {
    (prop::array::uniform4(0u32..3), -2.0f64..2.0).prop_map(move |(mut e, c)| {
        let odd = e.iter().sum::<u32>() % 2 == 1;
        if odd != (parity == Parity::Odd) {
            e[0] += 1;
        }
        (e, c)
    })
}

fn component(parity: Parity) -> impl Strategy<Value = Rational> {
    (prop::collection::vec(monomial(parity), 1..4), 0u32..3)
        .prop_map(|(terms, power)| Rational { numerator: Polynomial::new(terms), power })
}

/// A coefficient map with the parity row of `j`.
fn map_for(j: JChoice) -> impl Strategy<Value = CoefficientMap> {
    let row = parity_row(j);
    (component(row[0]), component(row[1]), component(row[2]), component(row[3]), component(row[4]))
        .prop_map(|(a, b, c, d, e)| CoefficientMap::new([a, b, c, d, e]).expect("parities are pure"))
}

fn any_j() -> impl Strategy<Value = JChoice> {
    prop::sample::select(JChoice::ALL.to_vec())
}

fn point() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-5.0f64..5.0)
}

fn sphere_point() -> impl Strategy<Value = Vec5> {
    prop::array::uniform5(-1.0f64..1.0)
        .prop_filter("away from 0", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| normalize5(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matching_parity_gives_the_symmetry((j, f) in any_j().prop_flat_map(|j| (Just(j), map_for(j)))) {
        let r = check_symmetry(&f, j, &Grid::new(GridSpec::chart(4, 2.0, 5)).unwrap());
        prop_assert!(r.parity_match);
        prop_assert!(r.max_deviation < 1e-12, "{}", r.max_deviation);
    }

    #[test]
    fn hamiltonian_squares_to_q(f in map_for(JChoice::One), k in point()) {
        let h = dirac_hamiltonian(&f, &k);
        let q = f.q(&k);
        let defect = (h * h - M4::identity() * realbloch::linalg::C64::new(q, 0.0)).norm();
        prop_assert!(defect <= 1e-13 * q.max(1e-300) + 1e-300, "{defect} vs {q}");
    }

    #[test]
    fn bands_are_complementary(f in map_for(JChoice::One), k in point()) {
        let v = f.eval(&k);
        prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let p = band_projector(&v, Band::Plus);
        let m = band_projector(&v, Band::Minus);
        prop_assert!((p + m - M4::identity()).norm() < 1e-12);
        prop_assert!((p * m).norm() < 1e-12);
        prop_assert!((p * p - p).norm() < 1e-12);
        prop_assert!((p.trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn even_maps_intertwine_tau_and_varpi(n in 0u32..4, k in sphere_point()) {
        let phi = equivariant_even_map(n, DEFAULT_COLLAR).unwrap();
        let lhs = phi.apply(&tau(&k));
        let rhs = varpi(&phi.apply(&k));
        for a in 0..5 {
            prop_assert!((lhs[a] - rhs[a]).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn power_maps_have_degree_n(n in -3i32..=3, seed in any::<u64>()) {
        let f = move |x: &[f64]| s3_power(&[x[0], x[1], x[2], x[3]], n).to_vec();
        let map = SmoothMap { domain: Manifold::Sphere(3), target: Manifold::Sphere(3), f: &f };
        let y = [0.21, 0.52, -0.68, 0.4674];
        let norm = y.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
        let y: Vec<f64> = y.iter().map(|v| v / norm).collect();
        let opts = RegularValueOptions { rng_seed: seed, ..Default::default() };
        let (r, pre) = regular_value_degree(&map, &y, &opts).unwrap();
        prop_assert_eq!(r.value, n as f64);
        prop_assert_eq!(pre.len(), n.unsigned_abs() as usize);
    }
}
