//! Borel equivariant cohomology H^k_{Z2}(X, Z(m)) of points, TR-spheres and TR-tori,
//! ordinary cohomology of spheres and tori, and the low-dimensional bundle classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelian::AbelianGroup;
use crate::error::{Error, Result};

pub const DEFAULT_KMAX: i64 = 10;

/// Local coefficient system Z(m); only the parity of `m` matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coefficients {
    twist: u8,
}

impl Coefficients {
    pub const Z: Coefficients = Coefficients { twist: 0 };
    pub const Z1: Coefficients = Coefficients { twist: 1 };

    pub fn new(m: i64) -> Self {
        Coefficients { twist: m.rem_euclid(2) as u8 }
    }

    pub fn twist(self) -> u8 {
        self.twist
    }

    pub fn shifted(self, by: i64) -> Self {
        Coefficients::new(self.twist as i64 + by)
    }
}

impl fmt::Display for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.twist == 0 { "Z" } else { "Z(1)" })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "d", rename_all = "kebab-case")]
pub enum Space {
    Point,
    TrSphere(u32),
    TrTorus(u32),
    AntipodalSphere(u32),
    Sphere(u32),
    Torus(u32),
}

impl Space {
    pub fn dim(self) -> u32 {
        match self {
            Space::Point => 0,
            Space::TrSphere(d)
            | Space::TrTorus(d)
            | Space::AntipodalSphere(d)
            | Space::Sphere(d)
            | Space::Torus(d) => d,
        }
    }

    pub fn is_tr(self) -> bool {
        matches!(self, Space::TrSphere(_) | Space::TrTorus(_))
    }

    /// Underlying space with the involution forgotten.
    pub fn underlying(self) -> Space {
        match self {
            Space::TrSphere(d) | Space::AntipodalSphere(d) => Space::Sphere(d),
            Space::TrTorus(d) => Space::Torus(d),
            other => other,
        }
    }

    fn validate(self) -> Result<Self> {
        if self != Space::Point && self.dim() == 0 {
            return Err(Error::InvalidInput(format!("{self} needs dimension d >= 1")));
        }
        Ok(self)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Point => write!(f, "point"),
            Space::TrSphere(d) => write!(f, "tr-sphere({d})"),
            Space::TrTorus(d) => write!(f, "tr-torus({d})"),
            Space::AntipodalSphere(d) => write!(f, "antipodal-sphere({d})"),
            Space::Sphere(d) => write!(f, "sphere({d})"),
            Space::Torus(d) => write!(f, "torus({d})"),
        }
    }
}

pub fn h_point(k: i64, c: Coefficients) -> AbelianGroup {
    if k < 0 {
        return AbelianGroup::zero();
    }
    match (c.twist(), k) {
        (0, 0) => AbelianGroup::z(),
        (0, k) if k % 2 == 0 => AbelianGroup::z2(),
        (1, k) if k % 2 == 1 => AbelianGroup::z2(),
        _ => AbelianGroup::zero(),
    }
}

/// Memoized table of H^k_{Z2}(T̃^j, Z(m)) for 0 ≤ j ≤ d, 0 ≤ k ≤ kmax, m ∈ {0,1},
/// filled by H^k(X×S̃¹, Z(m)) = H^k(X, Z(m)) ⊕ H^{k-1}(X, Z(m+1)) starting from T̃⁰ = point.
#[derive(Clone, Debug)]
pub struct TrTorusTable {
    d: u32,
    kmax: i64,
    // levels[j][k][twist]
    levels: Vec<Vec<[AbelianGroup; 2]>>,
}

impl TrTorusTable {
    pub fn new(d: u32, kmax: i64) -> Self {
        let kmax = kmax.max(0);
        let base: Vec<[AbelianGroup; 2]> =
            (0..=kmax).map(|k| [h_point(k, Coefficients::Z), h_point(k, Coefficients::Z1)]).collect();
        let mut levels = vec![base];
        for _ in 0..d {
            let prev = levels.last().unwrap();
            let next = (0..=kmax as usize)
                .map(|k| {
                    let mut entry: [AbelianGroup; 2] = Default::default();
                    for m in 0..2 {
                        let lower = if k == 0 { AbelianGroup::zero() } else { prev[k - 1][1 - m].clone() };
                        entry[m] = prev[k][m].direct_sum(&lower);
                    }
                    entry
                })
                .collect();
            levels.push(next);
        }
        TrTorusTable { d, kmax, levels }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn kmax(&self) -> i64 {
        self.kmax
    }

    /// H^k of T̃^j for any j ≤ d.
    pub fn get_level(&self, j: u32, k: i64, c: Coefficients) -> AbelianGroup {
        assert!(j <= self.d && k <= self.kmax, "query outside memo table");
        if k < 0 {
            return AbelianGroup::zero();
        }
        self.levels[j as usize][k as usize][c.twist() as usize].clone()
    }

    pub fn get(&self, k: i64, c: Coefficients) -> AbelianGroup {
        self.get_level(self.d, k, c)
    }
}

/// H^k_{Z2}(S̃^d, Z(m)) from the suspension lemma:
/// even d adds H^{k-d}(pt, Z(m)), odd d adds H^{k-d}(pt, Z(m+1)).
pub fn h_tr_sphere(d: u32, k: i64, c: Coefficients) -> AbelianGroup {
    let shift = if d % 2 == 0 { c } else { c.shifted(1) };
    h_point(k, c).direct_sum(&h_point(k - d as i64, shift))
}

/// Reduced H̃^k_{Z2}(S̃¹, Z(m)) read off the product recursion for pt × S̃¹.
pub fn reduced_tr_circle(k: i64, c: Coefficients) -> AbelianGroup {
    h_point(k - 1, c.shifted(1))
}

/// Same groups as [`h_tr_sphere`], reached by iterating the reduced suspension
/// shift H̃^k(S̃^d, Z(m)) = H̃^{k-1}(S̃^{d-1}, Z(m-1)) down to the circle.
pub fn h_tr_sphere_by_suspension(d: u32, k: i64, c: Coefficients) -> AbelianGroup {
    assert!(d >= 1);
    let (mut kk, mut cc) = (k, c);
    for _ in 1..d {
        kk -= 1;
        cc = cc.shifted(-1);
    }
    h_point(k, c).direct_sum(&reduced_tr_circle(kk, cc))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn h_space(x: Space, k: i64, c: Coefficients) -> Result<AbelianGroup> {
    let x = x.validate()?;
    match x {
        Space::Point => Ok(h_point(k, c)),
        Space::TrSphere(d) => Ok(h_tr_sphere(d, k, c)),
        Space::TrTorus(d) => {
            if k < 0 {
                return Ok(AbelianGroup::zero());
            }
            Ok(TrTorusTable::new(d, k).get(k, c))
        }
        Space::Sphere(_) | Space::Torus(_) if c.twist() != 0 => Err(Error::Unsupported(format!(
            "{x} has trivial involution; only integer coefficients Z are supported (got twist {})",
            c.twist()
        ))),
        Space::Sphere(d) => Ok(if k == 0 || k == d as i64 { AbelianGroup::z() } else { AbelianGroup::zero() }),
        Space::Torus(d) => Ok(if (0..=d as i64).contains(&k) {
            AbelianGroup::free(binomial(d as u64, k as u64) as u32)
        } else {
            AbelianGroup::zero()
        }),
        Space::AntipodalSphere(d) => Err(Error::Unsupported(format!(
            "equivariant cohomology of the antipodal sphere (d = {d}) is not implemented"
        ))),
    }
}

/// H^k for all 0 ≤ k ≤ kmax at once (TR-tori share one memo table).
pub fn h_space_range(x: Space, kmax: i64, c: Coefficients) -> Result<Vec<AbelianGroup>> {
    if let Space::TrTorus(d) = x.validate()? {
        let table = TrTorusTable::new(d, kmax);
        return Ok((0..=kmax).map(|k| table.get(k, c)).collect());
    }
    (0..=kmax).map(|k| h_space(x, k, c)).collect()
}

// ---------------------------------------------------------------------------
// vector bundle classification

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    ComplexVB,
    RealVB,
}

impl Category {
    pub fn azc_label(self) -> &'static str {
        match self {
            Category::ComplexVB => "A",
            Category::RealVB => "AI",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Exact(u32),
    /// Large rank; equivalent to any m ≥ 2 in dimensions ≤ 4.
    Stable,
}

impl Rank {
    fn at_least_two(self) -> bool {
        match self {
            Rank::Exact(m) => m >= 2,
            Rank::Stable => true,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Exact(m) => write!(f, "{m}"),
            Rank::Stable => write!(f, "stable"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationEntry {
    pub category: Category,
    pub space: Space,
    pub rank: Rank,
    pub group: AbelianGroup,
    pub generator_label: Option<String>,
}

pub const EVEN_C2_LABEL: &str = "2Z";

pub fn classify_bundles(category: Category, x: Space, rank: Rank) -> Result<ClassificationEntry> {
    let x = x.validate()?;
    if rank == Rank::Exact(0) {
        return Err(Error::InvalidInput("bundle rank must be at least 1".into()));
    }
    let d = x.dim();
    if !matches!(x, Space::TrSphere(_) | Space::TrTorus(_) | Space::Sphere(_) | Space::Torus(_)) {
        return Err(Error::Unsupported(format!("classification over {x}")));
    }
    if d > 4 {
        return Err(Error::Unsupported(format!(
            "classification is only established for d <= 4 (requested d = {d})"
        )));
    }
    let (group, generator_label) = match category {
        Category::ComplexVB => {
            let base = x.underlying();
            let h2 = h_space(base, 2, Coefficients::Z)?;
            if rank.at_least_two() {
                (h2.direct_sum(&h_space(base, 4, Coefficients::Z)?), None)
            } else {
                (h2, None)
            }
        }
        Category::RealVB => {
            if !x.is_tr() {
                return Err(Error::Unsupported(format!(
                    "Real bundles need a TR-involution; {x} carries none"
                )));
            }
            if d <= 3 || !rank.at_least_two() {
                // Real line bundles and low-dimensional stable classes are classified by H²_{Z2}(X, Z(1))
                (h_space(x, 2, Coefficients::Z1)?, None)
            } else {
                (AbelianGroup::z(), Some(EVEN_C2_LABEL.to_string()))
            }
        }
    };
    Ok(ClassificationEntry { category, space: x, rank, group, generator_label })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub vb: String,
    pub azc: String,
    pub d: u32,
    pub rank: String,
    pub group: AbelianGroup,
    pub label: Option<String>,
}

impl ClassificationRow {
    /// The table cell as printed: the group, or its label when one is attached.
    pub fn cell(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.group.render())
    }
}

/// All rows of the d ≤ 4 classification table, ranks m = 1 and m ≥ 2.
pub fn classification_table() -> Vec<ClassificationRow> {
    let mut rows = Vec::new();
    let blocks: [(&str, Category, fn(u32) -> Space); 4] = [
        ("Vec_C(S^d)", Category::ComplexVB, Space::Sphere),
        ("Vec_R(S~d)", Category::RealVB, Space::TrSphere),
        ("Vec_C(T^d)", Category::ComplexVB, Space::Torus),
        ("Vec_R(T~d)", Category::RealVB, Space::TrTorus),
    ];
    for (vb, cat, space) in blocks {
        for d in 1..=4 {
            for (rank, tag) in [(Rank::Exact(1), "1"), (Rank::Exact(2), ">=2")] {
                let e = classify_bundles(cat, space(d), rank).expect("table entries are in range");
                rows.push(ClassificationRow {
                    vb: vb.into(),
                    azc: cat.azc_label().into(),
                    d,
                    rank: tag.into(),
                    group: e.group,
                    label: e.generator_label,
                });
            }
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// Z2-CW structure

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCount {
    pub dim: u32,
    pub fixed: u64,
    pub free: u64,
}

pub fn z2_cw_cells(x: Space) -> Result<Vec<CellCount>> {
    let x = x.validate()?;
    match x {
        Space::TrSphere(d) => Ok((0..=d)
            .map(|n| if n == 0 { CellCount { dim: 0, fixed: 2, free: 0 } } else { CellCount { dim: n, fixed: 0, free: 1 } })
            .collect()),
        Space::TrTorus(d) => Ok((0..=d)
            .map(|n| {
                if n == 0 {
                    CellCount { dim: 0, fixed: 1 << d, free: 0 }
                } else {
                    CellCount { dim: n, fixed: 0, free: binomial(d as u64, n as u64) << (d - 1) }
                }
            })
            .collect()),
        other => Err(Error::Unsupported(format!("Z2-CW decomposition of {other}"))),
    }
}

// ---------------------------------------------------------------------------
// (R, Z2)-line bundles over the circle

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Z2Rep {
    /// trivial representation
    #[serde(rename = "1")]
    One,
    /// sign representation
    #[serde(rename = "sigma")]
    Sigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealLineBundle {
    Trivial,
    Mobius,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBundleClass {
    pub label: String,
    pub fixed_point_reps: (Z2Rep, Z2Rep),
    pub realification: RealLineBundle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBundleTable {
    pub group: AbelianGroup,
    pub elements: Vec<LineBundleClass>,
}

pub fn rz2_line_bundles_s1() -> LineBundleTable {
    use RealLineBundle::{Mobius, Trivial};
    use Z2Rep::{One, Sigma};
    let row = |label: &str, a, b, r| LineBundleClass { label: label.into(), fixed_point_reps: (a, b), realification: r };
    LineBundleTable {
        group: AbelianGroup::z2().power(2),
        elements: vec![
            row("C0", One, One, Trivial),
            row("C1", Sigma, Sigma, Trivial),
            row("L+", One, Sigma, Mobius),
            row("L-", Sigma, One, Mobius),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> AbelianGroup {
        s.parse().unwrap()
    }

    #[test]
    fn point_groups() {
        assert_eq!(h_point(2, Coefficients::Z), AbelianGroup::z2());
        assert_eq!(h_point(1, Coefficients::Z1), AbelianGroup::z2());
        assert!(h_point(-3, Coefficients::Z).is_zero());
        assert!(h_point(-3, Coefficients::Z1).is_zero());
        assert_eq!(h_point(0, Coefficients::Z), AbelianGroup::z());
        assert!(h_point(0, Coefficients::Z1).is_zero());
    }

    #[test]
    fn circle_tables() {
        for k in 0..=10 {
            let z = h_space(Space::TrSphere(1), k, Coefficients::Z).unwrap();
            let z1 = h_space(Space::TrSphere(1), k, Coefficients::Z1).unwrap();
            let want_z = match k {
                0 => g("Z"),
                k if k % 2 == 1 => g("0"),
                _ => g("Z2^2"),
            };
            let want_z1 = match k {
                1 => g("Z+Z2"),
                k if k % 2 == 1 => g("Z2^2"),
                _ => g("0"),
            };
            assert_eq!(z, want_z, "k={k}");
            assert_eq!(z1, want_z1, "k={k}");
            // T̃¹ and S̃¹ coincide
            assert_eq!(h_space(Space::TrTorus(1), k, Coefficients::Z).unwrap(), z);
            assert_eq!(h_space(Space::TrTorus(1), k, Coefficients::Z1).unwrap(), z1);
        }
    }

    #[test]
    fn two_routes_to_circle_degree_one() {
        let via_product = TrTorusTable::new(1, 1).get(1, Coefficients::Z1);
        let via_sphere = h_tr_sphere(1, 1, Coefficients::Z1);
        assert!(via_product.is_isomorphic(&via_sphere));
        assert_eq!(via_product, g("Z+Z2"));
    }

    #[test]
    fn degree_four() {
        assert_eq!(h_space(Space::TrSphere(4), 4, Coefficients::Z).unwrap(), g("Z+Z2"));
        assert_eq!(h_space(Space::TrTorus(4), 4, Coefficients::Z).unwrap(), g("Z+Z2^15"));
    }

    #[test]
    fn first_twisted_group_of_tori() {
        for d in 1..=8 {
            let h1 = h_space(Space::TrTorus(d), 1, Coefficients::Z1).unwrap();
            assert_eq!(h1, AbelianGroup::free(d).direct_sum(&AbelianGroup::z2()), "d={d}");
            assert!(h_space(Space::TrTorus(d), 2, Coefficients::Z1).unwrap().is_zero());
            assert!(h_space(Space::TrSphere(d), 2, Coefficients::Z1).unwrap().is_zero());
        }
    }

    #[test]
    fn even_odd_vanishing() {
        for d in 1..=8 {
            let t = TrTorusTable::new(d, 10);
            for k in 0..=10 {
                if k % 2 == 0 {
                    assert!(t.get(k, Coefficients::Z1).is_zero(), "d={d} k={k}");
                    assert!(h_tr_sphere(d, k, Coefficients::Z1).is_zero(), "d={d} k={k}");
                } else {
                    assert!(t.get(k, Coefficients::Z).is_zero(), "d={d} k={k}");
                }
            }
        }
    }

    #[test]
    fn suspension_matches_lemma() {
        for d in 1..=6 {
            for k in -1..=8 {
                for c in [Coefficients::Z, Coefficients::Z1] {
                    assert_eq!(h_tr_sphere(d, k, c), h_tr_sphere_by_suspension(d, k, c), "d={d} k={k} {c}");
                }
            }
        }
    }

    #[test]
    fn ordinary_spaces() {
        for d in 1..=6u32 {
            assert_eq!(
                h_space(Space::Torus(d), 2, Coefficients::Z).unwrap(),
                AbelianGroup::free(d * (d.max(1) - 1) / 2)
            );
            assert_eq!(h_space(Space::Sphere(d), d as i64, Coefficients::Z).unwrap(), g("Z"));
        }
        assert!(matches!(h_space(Space::Torus(3), 1, Coefficients::Z1), Err(Error::Unsupported(_))));
        assert!(matches!(h_space(Space::AntipodalSphere(2), 1, Coefficients::Z), Err(Error::Unsupported(_))));
        assert!(h_space(Space::TrTorus(0), 1, Coefficients::Z).is_err());
    }

    #[test]
    fn classification_examples() {
        let e = classify_bundles(Category::ComplexVB, Space::Torus(4), Rank::Exact(1)).unwrap();
        assert_eq!(e.group, g("Z^6"));
        for d in 1..=3 {
            for m in 1..=5 {
                let e = classify_bundles(Category::RealVB, Space::TrSphere(d), Rank::Exact(m)).unwrap();
                assert!(e.group.is_zero());
            }
        }
        let e = classify_bundles(Category::RealVB, Space::TrTorus(4), Rank::Exact(3)).unwrap();
        assert_eq!(e.group, g("Z"));
        assert_eq!(e.generator_label.as_deref(), Some("2Z"));
        let e = classify_bundles(Category::ComplexVB, Space::Sphere(4), Rank::Stable).unwrap();
        assert_eq!(e.group, g("Z"));
        assert!(matches!(
            classify_bundles(Category::ComplexVB, Space::Torus(5), Rank::Exact(1)),
            Err(Error::Unsupported(_))
        ));
        assert!(classify_bundles(Category::RealVB, Space::Torus(2), Rank::Exact(1)).is_err());
    }

    #[test]
    fn real_classification_rank_independent_below_four() {
        for space in [Space::TrSphere as fn(u32) -> Space, Space::TrTorus] {
            for d in 1..=3 {
                let first = classify_bundles(Category::RealVB, space(d), Rank::Exact(1)).unwrap().group;
                for m in 2..=6 {
                    assert_eq!(classify_bundles(Category::RealVB, space(d), Rank::Exact(m)).unwrap().group, first);
                }
                assert_eq!(classify_bundles(Category::RealVB, space(d), Rank::Stable).unwrap().group, first);
            }
        }
    }

    #[test]
    fn cells() {
        let s3 = z2_cw_cells(Space::TrSphere(3)).unwrap();
        assert_eq!(s3[0], CellCount { dim: 0, fixed: 2, free: 0 });
        assert!(s3[1..].iter().all(|c| c.free == 1 && c.fixed == 0));
        let t2 = z2_cw_cells(Space::TrTorus(2)).unwrap();
        assert_eq!((t2[0].fixed, t2[1].free, t2[2].free), (4, 4, 2));
        let t1 = z2_cw_cells(Space::TrTorus(1)).unwrap();
        assert_eq!(t1, z2_cw_cells(Space::TrSphere(1)).unwrap());
        for d in 1..=8u32 {
            let t = z2_cw_cells(Space::TrTorus(d)).unwrap();
            for c in &t[1..] {
                assert_eq!(c.free, binomial(d as u64, c.dim as u64) * (1u64 << (d - 1)));
            }
        }
        assert!(z2_cw_cells(Space::Torus(2)).is_err());
    }

    #[test]
    fn line_bundles_on_circle() {
        let t = rz2_line_bundles_s1();
        assert_eq!(t.group, g("Z2^2"));
        let c0 = &t.elements[0];
        assert_eq!(c0.label, "C0");
        assert_eq!((c0.fixed_point_reps, c0.realification), ((Z2Rep::One, Z2Rep::One), RealLineBundle::Trivial));
        let lp = t.elements.iter().find(|e| e.label == "L+").unwrap();
        assert_eq!(lp.fixed_point_reps, (Z2Rep::One, Z2Rep::Sigma));
        assert_eq!(lp.realification, RealLineBundle::Mobius);
    }
}
