//! Small numeric helpers shared by the estimator modules: compensated
//! summation, deterministic uniform sampling, quantiles, and a dense
//! symmetric solve for the Newton steps in the logistic fit.

use rand_chacha::rand_core::RngCore;

/// Kahan-Babuska compensated accumulator.
///
/// The estimator means sum hundreds of thousands of terms whose magnitudes
/// span several orders (inverse-propensity weights), and the acceptance
/// tolerances on estimator identities are 1e-12. Plain summation reorders
/// badly enough to eat that budget; compensation keeps the error near one
/// ulp of the true sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Mean of `n` accumulated terms.
pub(crate) fn kahan_mean(sum: &KahanSum, n: usize) -> f64 {
    sum.value() / n as f64
}

/// Uniform draw on [0, 1) built from the top 53 bits of one generator word.
pub(crate) fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE
}

/// Uniform index in [0, n) with rejection to remove modulo bias.
pub(crate) fn uniform_index<R: RngCore>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// Sorts in total order (NaN last); used before quantile extraction.
pub(crate) fn sort_floats(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
}

/// Linearly interpolated quantile of an already sorted slice, `q` in [0, 1].
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let h = q * (sorted.len() - 1) as f64;
    let lo = h as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Solves the symmetric positive definite system `a x = b` in place by
/// Cholesky factorization; `a` is dense row-major `dim x dim` and is
/// destroyed. Returns false when a pivot is not strictly positive.
pub(crate) fn cholesky_solve(a: &mut [f64], b: &mut [f64], dim: usize) -> bool {
    debug_assert_eq!(a.len(), dim * dim);
    debug_assert_eq!(b.len(), dim);
    // Factor A = L L^T, storing L in the lower triangle.
    for j in 0..dim {
        let mut diag = a[j * dim + j];
        for k in 0..j {
            diag -= a[j * dim + k] * a[j * dim + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return false;
        }
        let l_jj = libm::sqrt(diag);
        a[j * dim + j] = l_jj;
        for i in (j + 1)..dim {
            let mut v = a[i * dim + j];
            for k in 0..j {
                v -= a[i * dim + k] * a[j * dim + k];
            }
            a[i * dim + j] = v / l_jj;
        }
    }
    // Forward solve L y = b.
    for i in 0..dim {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * dim + k] * b[k];
        }
        b[i] = v / a[i * dim + i];
    }
    // Back solve L^T x = y.
    for i in (0..dim).rev() {
        let mut v = b[i];
        for k in (i + 1)..dim {
            v -= a[k * dim + i] * b[k];
        }
        b[i] = v / a[i * dim + i];
    }
    true
}

/// Numerically stable logistic function 1 / (1 + e^{-t}).
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

/// Numerically stable log(1 + e^t).
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn kahan_recovers_cancelled_small_terms() {
        // 1e16 + 1 repeated: plain f64 addition drops every +1.
        let mut s = KahanSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn unit_f64_stays_in_half_open_interval() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let u = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn uniform_index_covers_small_range() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[uniform_index(&mut rng, 5)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
        // softplus(t) - softplus(-t) = t.
        for &t in &[-30.0, -1.5, 0.0, 0.3, 40.0] {
            assert!((softplus(t) - softplus(-t) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_interpolates_between_order_statistics() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 0.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.0);
        assert_eq!(quantile_sorted(&v, 0.125), 0.5);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // A = [[4,2],[2,3]], b = [10, 8] -> x = [7/4, 3/2].
        let mut a = [4.0, 2.0, 2.0, 3.0];
        let mut b = [10.0, 8.0];
        assert!(cholesky_solve(&mut a, &mut b, 2));
        assert!((b[0] - 1.75).abs() < 1e-12);
        assert!((b[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite_matrix() {
        let mut a = [1.0, 2.0, 2.0, 1.0];
        let mut b = [1.0, 1.0];
        assert!(!cholesky_solve(&mut a, &mut b, 2));
    }
}
