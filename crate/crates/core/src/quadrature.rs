//! Quadrature rules, low-discrepancy sampling and compensated summation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Composite Simpson weights on `[0, 1]` with `n` (even) intervals.
pub fn simpson_weights(n: usize) -> Result<Vec<f64>> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::domain(format!(
            "Simpson's rule needs an even positive number of intervals, got {n}"
        )));
    }
    let h = 1.0 / n as f64;
    Ok((0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect())
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `count` points of a randomly shifted Halton sequence in `[0, 1)^dim`.
/// The shift is drawn from `seed`, so the set is reproducible.
pub fn halton_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            (0..dim)
                .map(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract())
                .collect()
        })
        .collect()
}

/// Halton points mapped affinely into the box `[lo_i, hi_i]`, kept a margin
/// `inset` away from the faces.
pub fn halton_in_box(bounds: &[(f64, f64)], count: usize, seed: u64, inset: f64) -> Vec<Vec<f64>> {
    halton_points(bounds.len(), count, seed)
        .into_iter()
        .map(|p| {
            p.iter()
                .zip(bounds)
                .map(|(u, (lo, hi))| {
                    let a = lo + inset;
                    let b = hi - inset;
                    a + u * (b - a)
                })
                .collect()
        })
        .collect()
}

/// Pairwise summation, which keeps rounding error at `O(log n)`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let w = simpson_weights(8).unwrap();
        let s: f64 = w
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let x = k as f64 / 8.0;
                w * (x * x * x - 2.0 * x + 1.0)
            })
            .sum();
        assert!((s - 0.25).abs() < 1e-15);
        assert!(simpson_weights(7).is_err());
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(11)).sum();
        assert!((s - 1.0 / 12.0).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn halton_is_deterministic_and_in_range() {
        let a = halton_points(3, 100, 9);
        assert_eq!(a, halton_points(3, 100, 9));
        assert_ne!(a, halton_points(3, 100, 10));
        assert!(a.iter().flatten().all(|u| (0.0..1.0).contains(u)));
    }
}
