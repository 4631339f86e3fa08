//! Seeded generation of random trial inputs.
//!
//! Every generator draws from a caller-owned [`ChaCha8Rng`], so a trial is
//! reproduced exactly from its seed:
//!
//! - masses: independent `Exp(1)` draws `−ln(1 − U)`, normalized to sum one;
//! - surjective statistics: every source atom gets a uniform target, redrawn
//!   until each target atom is hit;
//! - congruent embeddings: every source atom is split into a uniform number
//!   of blocks between `min_blocks` and 3 with normalized-exponential weights
//!   (at least one atom is split), then the target atoms are relabelled by a
//!   uniform permutation;
//! - tangent directions: uniform entries in `[−1, 1)` with the mean removed,
//!   optionally scaled to unit norm.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::measure::{Measure, SampleSpace, TestFunction};
use crate::scalar::Scalar;
use crate::statistic::Statistic;
use crate::verify::CongruentEmbedding;

pub const MAX_SPLIT: usize = 3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `index` within a run seeded by `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r.gen()
}

fn exponential(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    (-(1.0 - u).ln()).max(f64::MIN_POSITIVE)
}

/// A random point of the open simplex on `n` atoms.
pub fn random_masses<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    let e: Vec<f64> = (0..n).map(|_| exponential(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| T::of(v / total)).collect()
}

/// Uniform entries in `[lo, hi)`.
pub fn random_vector<T: Scalar>(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<T> {
    (0..n).map(|_| T::of(rng.gen_range(lo..hi))).collect()
}

/// A random tangent vector of the simplex: uniform entries, mean removed.
pub fn random_tangent<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = u.iter().sum::<f64>() / n as f64;
    u.into_iter().map(|v| T::of(v - mean)).collect()
}

/// [`random_tangent`] scaled to unit Euclidean norm.
pub fn random_unit_tangent<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    loop {
        let u: Vec<f64> = random_tangent(rng, n);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return u.into_iter().map(|v| T::of(v / norm)).collect();
        }
    }
}

/// A finite measure with random positive node values scaled by `mass`.
pub fn random_measure<T: Scalar>(rng: &mut ChaCha8Rng, space: &SampleSpace<T>, mass: f64) -> Result<Measure<T>> {
    let values = random_masses::<f64>(rng, space.len())
        .into_iter()
        .enumerate()
        .map(|(i, v)| T::of(v * mass) / space.weight(i))
        .collect();
    Measure::new(space.clone(), values)
}

pub fn random_function<T: Scalar>(
    rng: &mut ChaCha8Rng,
    space: &SampleSpace<T>,
    amplitude: f64,
) -> Result<TestFunction<T>> {
    TestFunction::new(
        space.clone(),
        random_vector(rng, space.len(), -amplitude, amplitude),
        true,
    )
}

/// A surjective statistic from `source` onto `target_len` indexed atoms.
pub fn random_surjective_statistic<T: Scalar>(
    rng: &mut ChaCha8Rng,
    source: &SampleSpace<T>,
    target_len: usize,
) -> Result<Statistic<T>> {
    let n = source.len();
    let target_len = target_len.clamp(1, n);
    let table = loop {
        let table: Vec<usize> = (0..n).map(|_| rng.gen_range(0..target_len)).collect();
        let mut hit = vec![false; target_len];
        table.iter().for_each(|&j| hit[j] = true);
        if hit.iter().all(|h| *h) {
            break table;
        }
    };
    Statistic::from_table(source.clone(), SampleSpace::indexed(target_len)?, table)
}

/// A random permutation statistic on `space`.
pub fn random_permutation<T: Scalar>(rng: &mut ChaCha8Rng, space: &SampleSpace<T>) -> Result<Statistic<T>> {
    let mut table: Vec<usize> = (0..space.len()).collect();
    table.shuffle(rng);
    Statistic::from_table(space.clone(), SampleSpace::indexed(space.len())?, table)
}

/// A random congruent embedding of `n` atoms that splits at least one atom;
/// every block has at least `min_blocks` atoms.
pub fn random_embedding<T: Scalar>(rng: &mut ChaCha8Rng, n: usize, min_blocks: usize) -> Result<CongruentEmbedding<T>> {
    let min_blocks = min_blocks.clamp(1, MAX_SPLIT);
    let mut sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(min_blocks..=MAX_SPLIT)).collect();
    if sizes.iter().all(|s| *s == 1) {
        let i = rng.gen_range(0..n);
        sizes[i] = rng.gen_range(2..=MAX_SPLIT);
    }
    let m: usize = sizes.iter().sum();
    let mut labels: Vec<usize> = (0..m).collect();
    labels.shuffle(rng);
    let mut next = labels.into_iter();
    let splits = sizes
        .into_iter()
        .map(|s| {
            let weights = random_masses::<T>(rng, s);
            weights
                .into_iter()
                .map(|q| (next.next().expect("m labels"), q))
                .collect()
        })
        .collect();
    CongruentEmbedding::new(m, splits)
}
