//! Random workloads for timing the solver.
//!
//! Instances follow the classic experimental setup for this problem: atom
//! positions drawn uniformly on `[0, 1]` and sorted, masses drawn uniformly
//! and normalised to one, and the linear cost `|x - y|`.

use circot_core::CircularHistogram;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type BenchRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> BenchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A histogram with `n` atoms at uniform positions and uniform normalised masses.
pub fn random_histogram<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CircularHistogram {
    assert!(n > 0);
    let mut positions: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    positions.sort_by(f64::total_cmp);
    // Keep masses away from zero so that every atom is a genuine atom.
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-6).collect();
    let total: f64 = raw.iter().sum();
    let mut masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
    let residue = 1.0 - masses.iter().sum::<f64>();
    masses[n - 1] += residue;
    CircularHistogram::new(&positions, &masses, None).expect("normalised random histogram")
}

/// Splits a total atom count `n0 + n1 = n` as evenly as possible.
pub fn split_sizes(n: usize) -> (usize, usize) {
    let n0 = (n / 2).max(1);
    (n0, n.saturating_sub(n0).max(1))
}

/// A pair of random histograms with `n` atoms in total.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (CircularHistogram, CircularHistogram) {
    let (n0, n1) = split_sizes(n);
    (random_histogram(rng, n0), random_histogram(rng, n1))
}

/// A random histogram whose masses are multiples of `1/denominator`.
pub fn random_rational_histogram<R: Rng + ?Sized>(rng: &mut R, n: usize, denominator: u64) -> CircularHistogram {
    assert!(n as u64 <= denominator);
    let mut positions: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    positions.sort_by(f64::total_cmp);
    // Start from one unit per atom and scatter the rest.
    let mut numerators = vec![1u64; n];
    for _ in 0..denominator - n as u64 {
        let i = rng.random_range(0..n);
        numerators[i] += 1;
    }
    CircularHistogram::from_numerators(&positions, &numerators, denominator).expect("valid rational histogram")
}
