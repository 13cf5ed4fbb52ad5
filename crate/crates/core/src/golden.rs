//! Reference checks: the published tables and numbers, evaluated end to end.
//!
//! Each check returns an [`Outcome`] instead of panicking, so a failing item is reported next
//! to the passing ones. Numerical criteria carry their runtime budgets.

use std::time::Instant;

use serde::Serialize;

use crate::abelian::AbelianGroup;
use crate::cohomology::{
    classification_table, classify_bundles, h_point, h_space, rz2_line_bundles_s1, z2_cw_cells, Category,
    Coefficients, Rank, Space, EVEN_C2_LABEL,
};
use crate::error::Result;
use crate::geometry::{Grid, GridSpec, Involution, Vec4};
use crate::invariants::{
    ai_consistency, cartan_degree, collapse_pullback_check, compute_degree, second_chern_closed_form,
    second_chern_trace, volume_degree_s4, AiGrids, DegreeMethod, DegreeQuery, FdScheme, MapDescriptor, Verdict,
};
use crate::ktables::{
    audit_table_b2, k_point, k_space, Flavor, KQuery, KSpace, PRINTED_KO_SPHERE, PRINTED_KO_TORUS, PRINTED_KR_SPHERE,
    PRINTED_KR_TORUS, PRINTED_K_SPHERE, PRINTED_K_TORUS, PRINTED_POINT,
};
use crate::models::{
    ansatz_equator, check_symmetry, dirac_hamiltonian, standard_ansatz, su2_from_s3, AnsatzMap, Band, JChoice, Model,
};
use crate::projectors::{lazy, riesz_projector, spectral_projector, verify_real_structure, ContourRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: String,
    pub title: String,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn run(id: &str, title: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let t = Instant::now();
    let (status, detail) = match f() {
        Ok((ok, d)) => (if ok { Status::Pass } else { Status::Fail }, d),
        Err(e) => (Status::Fail, format!("error: {e}")),
    };
    Outcome { id: id.into(), title: title.into(), status, detail, seconds: t.elapsed().as_secs_f64() }
}

fn g(s: &str) -> AbelianGroup {
    s.parse().expect("group literal")
}

/// Collects mismatches as "what: got X, want Y".
#[derive(Default)]
struct Diff(Vec<String>);

impl Diff {
    fn eq(&mut self, what: impl FnOnce() -> String, got: &AbelianGroup, want: &AbelianGroup) {
        if got != want {
            self.0.push(format!("{}: got {got}, want {want}", what()));
        }
    }

    fn finish(self, ok_note: &str) -> (bool, String) {
        if self.0.is_empty() {
            (true, ok_note.into())
        } else {
            let n = self.0.len();
            (false, format!("{n} mismatches; first: {}", self.0[0]))
        }
    }
}

// ---------------------------------------------------------------------------
// symbolic criteria

pub fn cohomology_tables() -> Outcome {
    run("C1", "equivariant cohomology tables", || {
        let t = Instant::now();
        let mut d = Diff::default();
        for k in 0..=10i64 {
            let a = if k == 0 { g("Z") } else if k % 2 == 1 { g("0") } else { g("Z2^2") };
            let b = if k == 1 { g("Z+Z2") } else if k % 2 == 1 { g("Z2^2") } else { g("0") };
            d.eq(|| format!("H^{k}(S~1, Z)"), &h_space(Space::TrSphere(1), k, Coefficients::Z)?, &a);
            d.eq(|| format!("H^{k}(S~1, Z(1))"), &h_space(Space::TrSphere(1), k, Coefficients::Z1)?, &b);
        }
        for n in 1..=8u32 {
            d.eq(|| format!("H^2(T~{n}, Z(1))"), &h_space(Space::TrTorus(n), 2, Coefficients::Z1)?, &g("0"));
            d.eq(|| format!("H^2(S~{n}, Z(1))"), &h_space(Space::TrSphere(n), 2, Coefficients::Z1)?, &g("0"));
            let h1 = AbelianGroup::free(n).direct_sum(&AbelianGroup::z2());
            d.eq(|| format!("H^1(T~{n}, Z(1))"), &h_space(Space::TrTorus(n), 1, Coefficients::Z1)?, &h1);
            for k in 0..=10i64 {
                if k % 2 == 0 {
                    d.eq(|| format!("H^{k}(T~{n}, Z(1))"), &h_space(Space::TrTorus(n), k, Coefficients::Z1)?, &g("0"));
                } else {
                    d.eq(|| format!("H^{k}(T~{n}, Z)"), &h_space(Space::TrTorus(n), k, Coefficients::Z)?, &g("0"));
                }
            }
        }
        d.eq(|| "H^4(S~4, Z)".into(), &h_space(Space::TrSphere(4), 4, Coefficients::Z)?, &g("Z+Z2"));
        d.eq(|| "H^4(T~4, Z)".into(), &h_space(Space::TrTorus(4), 4, Coefficients::Z)?, &g("Z+Z2^15"));
        let s = t.elapsed().as_secs_f64();
        let (ok, note) = d.finish("all groups equal");
        Ok((ok && s < 1.0, format!("{note}; {s:.3} s (budget 1 s)")))
    })
}

/// Rows as printed: VB, AZC, d = 1, 2, 3, then d = 4 for m = 1 and m ≥ 2.
pub const PRINTED_CLASSIFICATION: [[&str; 7]; 4] = [
    ["Vec_C(S^d)", "A", "0", "Z", "0", "0", "Z"],
    ["Vec_R(S~d)", "AI", "0", "0", "0", "0", "2Z"],
    ["Vec_C(T^d)", "A", "0", "Z", "Z^3", "Z^6", "Z^7"],
    ["Vec_R(T~d)", "AI", "0", "0", "0", "0", "2Z"],
];

/// The classification table folded into the printed layout; `None` if a d ≤ 3 entry depended
/// on the rank (it never should).
pub fn classification_layout() -> Option<Vec<[String; 7]>> {
    let rows = classification_table();
    let mut out = Vec::new();
    for vb in ["Vec_C(S^d)", "Vec_R(S~d)", "Vec_C(T^d)", "Vec_R(T~d)"] {
        let cell = |d: u32, rank: &str| {
            rows.iter().find(|r| r.vb == vb && r.d == d && r.rank == rank).map(|r| (r.azc.clone(), r.cell()))
        };
        let mut line: Vec<String> = vec![vb.into(), cell(1, "1")?.0];
        for d in 1..=3 {
            let (a, b) = (cell(d, "1")?.1, cell(d, ">=2")?.1);
            if a != b {
                return None;
            }
            line.push(a);
        }
        line.push(cell(4, "1")?.1);
        line.push(cell(4, ">=2")?.1);
        out.push(line.try_into().ok()?);
    }
    Some(out)
}

pub fn classification() -> Outcome {
    run("C2", "classification table", || {
        let Some(rows) = classification_layout() else {
            return Ok((false, "a d <= 3 entry depends on the rank".into()));
        };
        for (got, want) in rows.iter().zip(PRINTED_CLASSIFICATION.iter()) {
            for (c, (x, y)) in got.iter().zip(want.iter()).enumerate() {
                let same = if *y == EVEN_C2_LABEL || c < 2 { x == y } else { x.parse::<AbelianGroup>().ok() == Some(g(y)) };
                if !same {
                    return Ok((false, format!("row {}: column {c} is {x}, want {y}", want[0])));
                }
            }
        }
        Ok((true, "4 rows x 5 cells equal".into()))
    })
}

pub fn k_tables() -> Outcome {
    run("C3", "K-theory tables and KR audit", || {
        let mut d = Diff::default();
        for j in -16..=16i64 {
            let want = g(PRINTED_POINT[j.rem_euclid(8) as usize]);
            d.eq(|| format!("KR^-{j}(pt)"), &k_point(Flavor::KR, j), &want);
            d.eq(|| format!("KO^-{j}(pt)"), &k_point(Flavor::KO, j), &want);
            let kc = if j % 2 == 0 { g("Z") } else { g("0") };
            d.eq(|| format!("K^-{j}(pt)"), &k_point(Flavor::K, j), &kc);
        }
        for n in 1..=8u32 {
            let i = n as usize - 1;
            let q = |f, s| k_space(KQuery::new(f, s, 0, true));
            d.eq(|| format!("K~(S^{n})"), &q(Flavor::K, KSpace::Sphere(n))?, &g(PRINTED_K_SPHERE[i]));
            d.eq(|| format!("KR~(S~{n})"), &q(Flavor::KR, KSpace::TrSphere(n))?, &g(PRINTED_KR_SPHERE[i]));
            d.eq(|| format!("KO~(S^{n})"), &q(Flavor::KO, KSpace::Sphere(n))?, &g(PRINTED_KO_SPHERE[i]));
            d.eq(|| format!("K~(T^{n})"), &q(Flavor::K, KSpace::Torus(n))?, &g(PRINTED_K_TORUS[i]));
            d.eq(|| format!("KO~(T^{n})"), &q(Flavor::KO, KSpace::Torus(n))?, &g(PRINTED_KO_TORUS[i]));
            if n <= 4 {
                d.eq(|| format!("KR~(T~{n})"), &q(Flavor::KR, KSpace::TrTorus(n))?, &g(PRINTED_KR_TORUS[i]));
            }
        }
        let audit = audit_table_b2();
        let flags_ok = !audit.flagged.is_empty()
            && audit.flagged.iter().all(|&n| n >= 5)
            && audit.rows.iter().filter(|r| !r.matches).all(|r| r.summand_counts_equal);
        let (ok, note) = d.finish("point, sphere and torus groups equal (KR torus for d <= 4)");
        Ok((ok && flags_ok, format!("{note}; KR torus rows flagged at d = {:?} with equal summand counts", audit.flagged)))
    })
}

// ---------------------------------------------------------------------------
// numerical criteria

fn hopf_trace(n: usize) -> Result<crate::invariants::InvariantReport> {
    let grid = Grid::new(GridSpec::chart(4, 12.0, n))?;
    second_chern_trace(&lazy(grid, 2, Model::Hopf.chart_projector(Band::Plus)?), &FdScheme::default())
}

pub fn hopf_charge() -> Outcome {
    run("C4", "C2(Hopf) = 1 by the trace form", || {
        let t = Instant::now();
        let a = hopf_trace(48)?;
        let s = t.elapsed().as_secs_f64();
        let b = hopf_trace(64)?;
        let ok = (a.value - 1.0).abs() < 1e-2 && b.residual < a.residual && s < 120.0;
        Ok((ok, format!("N=48: {:.6} ({s:.0} s, budget 120 s); N=64: {:.6}", a.value, b.value)))
    })
}

/// Chart grid for volume pullbacks of the ansatz: L = 8 holds the tail below 1e-4 and leaves a
/// finer spacing than L = 12 at the same N.
pub const VOLUME_GRID: GridSpec = GridSpec::Chart { dim: 4, half_width: 8.0, n: 64 };

pub fn ansatz_degree() -> Outcome {
    run("C5", "deg = 2 for the ansatz by three methods", || {
        let t = Instant::now();
        let rv = compute_degree(&DegreeQuery::new(MapDescriptor::Ansatz, DegreeMethod::RegularValue))?;
        let t_rv = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let cartan = cartan_degree(|x: &Vec4| su2_from_s3(&ansatz_equator(x)), &Grid::new(GridSpec::s3(64, 64, 64))?)?;
        let t_c = t.elapsed().as_secs_f64();
        let vol = volume_degree_s4(&AnsatzMap { band: Band::Plus }, &Grid::new(VOLUME_GRID)?, 1e-3)?;
        let ok = rv.value == 2.0
            && t_rv < 1.0
            && (cartan.value - 2.0).abs() < 1e-2
            && t_c <= 30.0
            && (vol.value - 2.0).abs() < 1e-2;
        Ok((
            ok,
            format!(
                "regular value {} ({t_rv:.2} s); Cartan {:.6} ({t_c:.1} s); volume {:.6} on {}",
                rv.value, cartan.value, vol.value, VOLUME_GRID
            ),
        ))
    })
}

pub fn ansatz_closed_form() -> Outcome {
    run("C6", "C2(E+-) = +-2 in closed form, trace agreement", || {
        let f = standard_ansatz();
        let grid = Grid::new(GridSpec::chart(4, 12.0, 48))?;
        let mut notes = Vec::new();
        let mut ok = true;
        for band in [Band::Plus, Band::Minus] {
            let t = Instant::now();
            let cf = second_chern_closed_form(&f, band, &grid)?;
            let s = t.elapsed().as_secs_f64();
            let tr = second_chern_trace(&lazy(grid.clone(), 2, Model::builtin("standard-ansatz")?.chart_projector(band)?), &FdScheme::default())?;
            let want = 2.0 * band.sign();
            ok &= (cf.value - want).abs() < 1e-3 && s < 120.0 && (tr.value - cf.value).abs() < 5e-3;
            notes.push(format!("{band:?}: closed form {:.6} ({s:.1} s), trace {:.6}", cf.value, tr.value));
        }
        Ok((ok, notes.join("; ")))
    })
}

pub fn real_structures() -> Outcome {
    run("C7", "Real structures on a 17^4 torus", || {
        let grid = Grid::new(GridSpec::torus(4, 17))?;
        let ansatz = Model::builtin("standard-ansatz")?;
        let a = verify_real_structure(&lazy(grid.clone(), 2, ansatz.torus_projector(Band::Plus)?), Involution::Tau, JChoice::One)?;
        let h = verify_real_structure(&lazy(grid, 2, Model::Hopf.torus_projector(Band::Plus)?), Involution::Varpi, JChoice::One)?;
        let ok = a.max_deviation < 1e-12 && h.max_deviation < 1e-12;
        Ok((ok, format!("ansatz P+ under tau: {:.2e}; Hopf under varpi: {:.2e}", a.max_deviation, h.max_deviation)))
    })
}

pub fn even_maps() -> Outcome {
    run("C8", "even C2 and vanishing c1 for even maps", || {
        let mut ok = true;
        let mut notes = Vec::new();
        for n in 0..=2u32 {
            let t = Instant::now();
            let r = ai_consistency(&Model::builtin(&format!("even-map:{n}"))?, Band::Plus, &AiGrids::default())?;
            let s = t.elapsed().as_secs_f64();
            let c2 = r.c2.as_ref().map(|c| c.value).unwrap_or(f64::NAN);
            let nearest = r.c2.as_ref().map(|c| c.nearest_integer).unwrap_or(-1);
            let c1 = r.max_slice_c1.unwrap_or(f64::NAN);
            ok &= r.verdict == Verdict::Consistent && nearest == 2 * n as i64 && c1 < 1e-6 && (n < 2 || s <= 300.0);
            notes.push(format!("n={n}: C2 {c2:.4} -> {nearest}, max |c1| {c1:.1e}, {s:.0} s"));
        }
        Ok((ok, notes.join("; ")))
    })
}

pub fn collapse_commutes() -> Outcome {
    run("C9", "collapse-map commutativity", || {
        let mut ok = true;
        let mut notes = Vec::new();
        for name in ["hopf", "standard-ansatz"] {
            let r = collapse_pullback_check(
                &Model::builtin(name)?,
                Band::Plus,
                GridSpec::chart(4, 8.0, 32),
                GridSpec::torus(4, 32),
            )?;
            ok &= r.agree;
            notes.push(format!("{name}: sphere {:.4}, torus {:.4}", r.sphere.value, r.torus.value));
        }
        let deg = compute_degree(&DegreeQuery::new(MapDescriptor::Collapse, DegreeMethod::RegularValue))?;
        ok &= deg.value == 1.0;
        notes.push(format!("deg upsilon = {}", deg.value));
        Ok((ok, notes.join("; ")))
    })
}

pub fn oracle_equivalences() -> Outcome {
    run("C10", "Riesz vs spectral; quadratic preimages", || {
        let f = standard_ansatz();
        let h = |k: &Vec4| dirac_hamiltonian(&f, k);
        let grid = Grid::new(GridSpec::chart(4, 3.0, 9))?;
        let mut worst: f64 = 0.0;
        for band in [Band::Minus, Band::Plus] {
            let r = riesz_projector(h, &grid, &ContourRule::Adaptive { band, nodes: 64 })?;
            let s = spectral_projector(h, &grid, band)?;
            for (a, b) in r.samples.iter().zip(&s.samples) {
                worst = worst.max((a - b).norm());
            }
        }
        let q = compute_degree(&DegreeQuery::new(MapDescriptor::Ansatz, DegreeMethod::RegularValue))?;
        let pre = q.diagnostics["preimages"].as_array().map(|v| v.len()).unwrap_or(0);
        let agree = q.diagnostics["closed_form_agrees"] == serde_json::Value::Bool(true);
        let ok = worst < 1e-8 && q.value == 2.0 && pre == 2 && agree;
        Ok((ok, format!("max |P_riesz - P_spec| = {worst:.2e}; degree {} from {pre} preimages, closed form agrees: {agree}", q.value)))
    })
}

/// Criterion `n` (1..=10).
pub fn criterion(n: u8) -> Option<Outcome> {
    Some(match n {
        1 => cohomology_tables(),
        2 => classification(),
        3 => k_tables(),
        4 => hopf_charge(),
        5 => ansatz_degree(),
        6 => ansatz_closed_form(),
        7 => real_structures(),
        8 => even_maps(),
        9 => collapse_commutes(),
        10 => oracle_equivalences(),
        _ => return None,
    })
}

/// Criteria cheap enough for the default suite.
pub const QUICK_CRITERIA: [u8; 5] = [1, 2, 3, 7, 10];

// ---------------------------------------------------------------------------
// published examples

pub fn published_examples() -> Vec<Outcome> {
    let eq = |id: &str, title: &str, got: Result<AbelianGroup>, want: &str| {
        run(id, title, || {
            let got = got?;
            Ok((got == g(want), format!("{got}")))
        })
    };
    let mut out = vec![
        eq("E1", "H^2(pt, Z) = Z2", Ok(h_point(2, Coefficients::Z)), "Z2"),
        eq("E2", "H^1(pt, Z(1)) = Z2", Ok(h_point(1, Coefficients::Z1)), "Z2"),
        eq("E3", "H^1(S~1, Z(1)) = Z+Z2", h_space(Space::TrSphere(1), 1, Coefficients::Z1), "Z+Z2"),
        eq("E4", "H^4(S~4, Z) = Z+Z2", h_space(Space::TrSphere(4), 4, Coefficients::Z), "Z+Z2"),
        eq("E5", "H^4(T~4, Z) = Z+Z2^15", h_space(Space::TrTorus(4), 4, Coefficients::Z), "Z+Z2^15"),
        eq("E6", "H^2(T^4, Z) = Z^6", h_space(Space::Torus(4), 2, Coefficients::Z), "Z^6"),
        eq(
            "E7",
            "Vec_C^1(T^4) = Z^6",
            classify_bundles(Category::ComplexVB, Space::Torus(4), Rank::Exact(1)).map(|e| e.group),
            "Z^6",
        ),
        eq(
            "E8",
            "Vec_C^m(S^4) = Z for m >= 2",
            classify_bundles(Category::ComplexVB, Space::Sphere(4), Rank::Stable).map(|e| e.group),
            "Z",
        ),
        run("E9", "Vec_R^3(T~4) = 2Z", || {
            let e = classify_bundles(Category::RealVB, Space::TrTorus(4), Rank::Exact(3))?;
            Ok((e.generator_label.as_deref() == Some(EVEN_C2_LABEL), format!("{} ({:?})", e.group, e.generator_label)))
        }),
        run("E10", "Vec_R(S~d) = 0 for d <= 3", || {
            let all = (1..=3).all(|d| {
                [Rank::Exact(1), Rank::Exact(2), Rank::Stable].iter().all(|&m| {
                    classify_bundles(Category::RealVB, Space::TrSphere(d), m).map(|e| e.group.is_zero()).unwrap_or(false)
                })
            });
            Ok((all, String::new()))
        }),
        run("E11", "Z2-CW cells of S~3 and T~2", || {
            let s = z2_cw_cells(Space::TrSphere(3))?;
            let t = z2_cw_cells(Space::TrTorus(2))?;
            let counts = |c: &[crate::cohomology::CellCount]| c.iter().map(|x| (x.fixed, x.free)).collect::<Vec<_>>();
            let ok = counts(&s) == [(2, 0), (0, 1), (0, 1), (0, 1)] && counts(&t) == [(4, 0), (0, 4), (0, 2)];
            Ok((ok, format!("{:?} / {:?}", counts(&s), counts(&t))))
        }),
        run("E12", "(R,Z2) line bundles over S~1", || {
            let t = rz2_line_bundles_s1();
            let labels: Vec<&str> = t.elements.iter().map(|e| e.label.as_str()).collect();
            Ok((t.group == g("Z2^2") && labels == ["C0", "C1", "L+", "L-"], format!("{} {labels:?}", t.group)))
        }),
        eq("E13", "KR^-4(pt) = Z", Ok(k_point(Flavor::KR, 4)), "Z"),
        eq("E14", "KR^-12(pt) = Z", Ok(k_point(Flavor::KR, 12)), "Z"),
        eq("E15", "K^-1(pt) = 0", Ok(k_point(Flavor::K, 1)), "0"),
        eq("E16", "KR~(S~1) = 0", k_space(KQuery::new(Flavor::KR, KSpace::TrCircle, 0, true)), "0"),
        eq("E17", "KR~(T~4) = Z", k_space(KQuery::new(Flavor::KR, KSpace::TrTorus(4), 0, true)), "Z"),
        eq("E18", "KO~(T^5) = Z^5+Z2^15", k_space(KQuery::new(Flavor::KO, KSpace::Torus(5), 0, true)), "Z^5+Z2^15"),
        eq("E19", "K~(T^7) = Z^63", k_space(KQuery::new(Flavor::K, KSpace::Torus(7), 0, true)), "Z^63"),
        run("E20", "ansatz parity row (+,-,+,-,+) and AI symmetry", || {
            let grid = Grid::new(GridSpec::chart(4, 3.0, 7))?;
            let r = check_symmetry(&standard_ansatz(), JChoice::One, &grid);
            let bad = check_symmetry(&standard_ansatz(), JChoice::S1, &grid);
            let ok = r.model_parity == "(+,-,+,-,+)" && r.parity_match && r.max_deviation < 1e-12 && !bad.parity_match;
            Ok((ok, format!("{} deviation {:.1e}", r.model_parity, r.max_deviation)))
        }),
        run("E21", "deg f = 2 for f(z, w) = (z + w, zw)", || {
            let r = compute_degree(&DegreeQuery::new(MapDescriptor::Ansatz, DegreeMethod::RegularValue))?;
            Ok((r.value == 2.0, format!("{}", r.value)))
        }),
        run("E22", "ansatz is class-AI consistent on fixed-point slices", || {
            let grids = AiGrids { c2: GridSpec::torus(4, 32), ..AiGrids::default() };
            let r = ai_consistency(&Model::builtin("standard-ansatz")?, Band::Plus, &grids)?;
            Ok((r.verdict == Verdict::Consistent, r.reason))
        }),
    ];
    for o in out.iter_mut() {
        o.title = format!("example: {}", o.title);
    }
    out
}

/// Published examples plus the criteria; the expensive criteria only with `full`.
pub fn suite(full: bool) -> Vec<Outcome> {
    let mut out = published_examples();
    for n in 1..=10u8 {
        if full || QUICK_CRITERIA.contains(&n) {
            out.extend(criterion(n));
        } else {
            out.push(Outcome {
                id: format!("C{n}"),
                title: "numerical criterion".into(),
                status: Status::Skipped,
                detail: "run with --full".into(),
                seconds: 0.0,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_items_pass() {
        for o in [cohomology_tables(), classification(), k_tables()] {
            assert!(o.passed(), "{} {}: {}", o.id, o.title, o.detail);
        }
    }

    #[test]
    fn layout_has_four_rows() {
        let rows = classification_layout().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[2][5], "Z^6");
    }

    #[test]
    fn unknown_criterion() {
        assert!(criterion(11).is_none());
    }
}
