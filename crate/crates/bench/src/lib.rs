//! Deterministic input builders shared by the kernel benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sweetspot_core::geostat::SpatialSamples;
use sweetspot_core::models::Dataset;

/// Smooth random curves: a few sinusoids with random weights plus noise.
pub fn random_block(n_wells: usize, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block = Vec::with_capacity(n_wells);
    let mut ids = Vec::with_capacity(n_wells);
    for w in 0..n_wells {
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let c: f64 = rng.gen_range(-0.5..0.5);
        let row: Vec<f64> = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                a * (std::f64::consts::PI * u).sin()
                    + b * (2.0 * std::f64::consts::PI * u).cos()
                    + c
                    + rng.gen_range(-0.05..0.05)
            })
            .collect();
        block.push(row);
        ids.push(format!("V{w:03}"));
    }
    (block, ids)
}

/// Wells scattered on a square with a smooth spatial value plus noise.
pub fn random_samples(n: usize, seed: u64) -> SpatialSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpatialSamples::new((0..n).map(|i| {
        let x: f64 = rng.gen_range(0.0..10_000.0);
        let y: f64 = rng.gen_range(0.0..10_000.0);
        let v = (x / 3_000.0).sin() + (y / 4_000.0).cos() + rng.gen_range(-0.1..0.1);
        (format!("W{i:03}"), (x, y), v)
    }))
}

/// Regression rows with a planted 3-column support.
pub fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let signal = 3.0 * row[0] - 2.0 * row[1 % p] + 0.5 * row[2 % p];
        y.push(signal + rng.gen_range(-0.2..0.2));
        x.push(row);
    }
    let names = (0..p).map(|j| format!("f{j}")).collect();
    let wells = (0..n).map(|i| format!("H{i:03}")).collect();
    Dataset::new(x, y, names, wells).expect("valid dataset")
}
