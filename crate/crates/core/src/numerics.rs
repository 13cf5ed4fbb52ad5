//! Deterministic reductions and small quadrature helpers.

use rayon::prelude::*;

/// Points per reduction chunk. Fixed so the summation tree never depends on the thread count.
pub const CHUNK: usize = 2048;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Σ_{i<len} f(i) componentwise. Chunks are summed in parallel and combined in index order,
/// so the result is bit-identical for any number of worker threads.
pub fn par_sum<const K: usize, F>(len: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let partials: Vec<[f64; K]> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [Compensated::default(); K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                let v = f(i);
                for k in 0..K {
                    acc[k].add(v[k]);
                }
            }
            acc.map(|a| a.value())
        })
        .collect();
    let mut acc = [Compensated::default(); K];
    for p in &partials {
        for k in 0..K {
            acc[k].add(p[k]);
        }
    }
    acc.map(|a| a.value())
}

/// Fallible variant of [`par_sum`]; the error reported is the one at the lowest index.
pub fn try_par_sum<const K: usize, E, F>(len: usize, f: F) -> Result<[f64; K], E>
where
    F: Fn(usize) -> Result<[f64; K], E> + Sync,
    E: Send,
{
    let partials: Vec<Result<[f64; K], E>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [Compensated::default(); K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                let v = f(i)?;
                for k in 0..K {
                    acc[k].add(v[k]);
                }
            }
            Ok(acc.map(|a| a.value()))
        })
        .collect();
    let mut acc = [Compensated::default(); K];
    for p in partials {
        let p = p?;
        for k in 0..K {
            acc[k].add(p[k]);
        }
    }
    Ok(acc.map(|a| a.value()))
}

/// Maximum of f over 0..len together with its index (first index on ties).
pub fn par_argmax<F>(len: usize, f: F) -> (usize, f64)
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..len)
        .into_par_iter()
        .map(|i| (i, f(i)))
        .reduce(|| (usize::MAX, f64::NEG_INFINITY), |a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_recovers_cancelled_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        let mut c = Compensated::default();
        xs.iter().for_each(|&x| c.add(x));
        assert_eq!(c.value(), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn par_sum_is_thread_independent() {
        let f = |i: usize| [((i as f64) * 0.37).sin(), 1.0 / (1.0 + i as f64)];
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| par_sum(100_003, f));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| par_sum(100_003, f));
        assert_eq!(one[0].to_bits(), four[0].to_bits());
        assert_eq!(one[1].to_bits(), four[1].to_bits());
    }

    #[test]
    fn legendre_exactness() {
        for n in [1, 2, 5, 16, 33, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
            // exact for polynomials of degree 2n-1
            let deg = 2 * n - 2;
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((integral - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn argmax_first_index() {
        let (i, v) = par_argmax(10, |i| if i == 3 || i == 7 { 5.0 } else { 0.0 });
        assert_eq!((i, v), (3, 5.0));
    }
}
