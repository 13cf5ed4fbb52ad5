//! Matrix aliases and the few dense-algebra helpers the numerics share.

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector};
pub use num_complex::Complex64 as C64;

pub type M4 = Matrix4<C64>;
pub type M2 = Matrix2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Frobenius norm.
#[inline]
pub fn frob(m: &M4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Tr(AB) without forming the product.
#[inline]
pub fn trace_prod(a: &M4, b: &M4) -> C64 {
    let mut t = C64::new(0.0, 0.0);
    for i in 0..4 {
        for k in 0..4 {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

#[inline]
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    SMatrix::<f64, 4, 4>::from_fn(|i, j| m[i][j]).determinant()
}

/// Σ_j (−1)^{j} f_j det(∂f_others) with the rows ∂_a f_i (i ≠ j) in index order, evaluated
/// for a map into S^n ⊂ R^{n+1}; `grad[i][a]` = ∂_a f_i. Equals det[f; ∂_1 f; …; ∂_n f].
pub fn oriented_volume(f: &[f64], grad: &[Vec<f64>]) -> f64 {
    let n = f.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |r, col| if r == 0 { f[col] } else { grad[col][r - 1] });
    m.determinant()
}

/// Pullback of the S⁴ volume form ω = Σ_j (−1)^{j+1} k_j dk_0∧…∧d̂k_j∧…∧dk_4, contracted with
/// the coordinate frame: Σ_j (−1)^{j+1} f_j det[∂_a f_i]_{i≠j}. `grad[i][a]` = ∂_a f_i.
#[inline]
pub fn volume_density5(f: &[f64; 5], grad: &[[f64; 4]; 5]) -> f64 {
    let mut acc = 0.0;
    for j in 0..5 {
        let mut m = [[0.0; 4]; 4];
        let mut r = 0;
        for i in 0..5 {
            if i == j {
                continue;
            }
            m[r] = grad[i];
            r += 1;
        }
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        acc += sign * f[j] * det4(&m);
    }
    acc
}

/// Three-dimensional analogue on S³: Σ_j (−1)^{j+1} f_j det[∂_a f_i]_{i≠j}.
#[inline]
pub fn volume_density4(f: &[f64; 4], grad: &[[f64; 3]; 4]) -> f64 {
    let mut acc = 0.0;
    for j in 0..4 {
        let mut m = [[0.0; 3]; 3];
        let mut r = 0;
        for i in 0..4 {
            if i == j {
                continue;
            }
            m[r] = grad[i];
            r += 1;
        }
        let d = SMatrix::<f64, 3, 3>::from_fn(|a, b| m[a][b]).determinant();
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        acc += sign * f[j] * d;
    }
    acc
}

/// Cyclic Jacobi eigensolver for real symmetric matrices: eigenvalues and orthonormal
/// eigenvectors (columns). nalgebra's implicit-QR solver returns wrong eigenvectors on some
/// of the highly degenerate Clifford Hamiltonians here, so we keep a solver whose accuracy
/// does not depend on deflation heuristics.
pub fn symmetric_eigen<const N: usize>(mut a: SMatrix<f64, N, N>) -> (SVector<f64, N>, SMatrix<f64, N, N>) {
    let mut v = SMatrix::<f64, N, N>::identity();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..N {
            for q in p + 1..N {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..N {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..N {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    (SVector::<f64, N>::from_fn(|i, _| a[(i, i)]), v)
}

/// Real form [[A, −B], [B, A]] of H = A + iB. Every eigenvalue of H appears twice.
#[inline]
pub(crate) fn realify(h: &M4) -> SMatrix<f64, 8, 8> {
    SMatrix::<f64, 8, 8>::from_fn(|r, col| {
        let z = h[(r % 4, col % 4)];
        match (r < 4, col < 4) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
pub fn hermitian_eigenvalues(h: &M4) -> [f64; 4] {
    let mut e: Vec<f64> = symmetric_eigen(realify(h)).0.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    [e[0], e[2], e[4], e[6]]
}

/// Orthogonal projector onto the eigenvectors of H with eigenvalues of the given sign,
/// its rank, and min |λ| over the whole spectrum.
pub fn sign_projector(h: &M4, sign: f64) -> (M4, usize, f64) {
    let (vals, vecs) = symmetric_eigen(realify(h));
    let mut pr = SMatrix::<f64, 8, 8>::zeros();
    let mut count = 0;
    let mut gap = f64::INFINITY;
    for k in 0..8 {
        let l = vals[k];
        gap = gap.min(l.abs());
        if l * sign > 0.0 {
            let v = vecs.column(k);
            pr += v * v.transpose();
            count += 1;
        }
    }
    let p = M4::from_fn(|r, col| C64::new(pr[(r, col)], pr[(r + 4, col)]));
    (p, count / 2, gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_density_is_minus_framed_determinant() {
        // at the south pole with the chart frame 2e_a
        let f = [-1.0, 0.0, 0.0, 0.0, 0.0];
        let mut g = [[0.0; 4]; 5];
        for a in 0..4 {
            g[a + 1][a] = 2.0;
        }
        assert_eq!(volume_density5(&f, &g), 16.0);
        let grad: Vec<Vec<f64>> = g.iter().map(|r| r.to_vec()).collect();
        assert!((oriented_volume(&f, &grad) + 16.0).abs() < 1e-12);
    }

    #[test]
    fn trace_prod_matches_product() {
        let a = M4::from_fn(|i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let b = M4::from_fn(|i, j| C64::new((i * j) as f64, 1.0 + i as f64));
        assert!((trace_prod(&a, &b) - (a * b).trace()).norm() < 1e-12);
    }

    #[test]
    fn degenerate_hermitian_spectrum() {
        // a 2+1+1 degenerate matrix on which the complex solver failed
        let d = M4::from_diagonal(&nalgebra::Vector4::new(c(-1.8), c(-1.8), c(1.8), c(-3.0)));
        let u = M4::from_fn(|i, j| C64::from_polar(0.5, (i * j) as f64 * std::f64::consts::FRAC_PI_2));
        let h = u * d * u.adjoint();
        assert_eq!(hermitian_eigenvalues(&h).map(|x| (x * 1e10).round() / 1e10), [-3.0, -1.8, -1.8, 1.8]);
        let (p, rank, gap) = sign_projector(&h, -1.0);
        assert_eq!(rank, 3);
        assert!((gap - 1.8).abs() < 1e-12);
        assert!((p * p - p).norm() < 1e-12);
        assert!((h * p - p * h).norm() < 1e-12);
        assert!((p.trace() - c(3.0)).norm() < 1e-12);
    }

    #[test]
    fn jacobi_on_clifford_hamiltonian() {
        // this matrix defeats nalgebra's SymmetricEigen at default tolerance
        let f = [0.9294781382228491, -0.4231311706629055, 0.05371199627596827, -0.1692524682651622, 0.03580799751731217];
        let s = crate::models::clifford_combination(&f);
        let r = realify(&s);
        let (vals, vecs) = symmetric_eigen(r);
        let recon = vecs * SMatrix::<f64, 8, 8>::from_diagonal(&vals) * vecs.transpose();
        assert!((recon - r).norm() < 1e-13);
        assert!((vecs.transpose() * vecs - SMatrix::<f64, 8, 8>::identity()).norm() < 1e-13);
    }
}
