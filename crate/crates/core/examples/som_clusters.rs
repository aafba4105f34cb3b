//! Trains an 8x8 map on four Gaussian clusters and shows where each cluster
//! lands on the grid.

use arcimboldo::som::{Som, SomConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> arcimboldo::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let centers = [[0.0, 0.0], [8.0, 0.0], [0.0, 8.0], [8.0, 8.0]];
    let data: Vec<Vec<f64>> =
        (0..400).map(|i| centers[i % 4].iter().map(|c| c + noise.sample(&mut rng)).collect()).collect();

    let cfg = SomConfig::new(8, 8, 2, 11);
    let untrained = Som::initialize(&data, &cfg)?;
    let som = Som::train(&data, &cfg)?;
    println!("quantization error {:.4} -> {:.4}", untrained.quantization_error(&data)?, som.quantization_error(&data)?);

    let mut grid = vec!['.'; som.units()];
    for (i, x) in data.iter().enumerate() {
        let (u, _) = som.bmu(x)?;
        grid[u] = char::from(b'A' + (i % 4) as u8);
    }
    for row in grid.chunks(8) {
        println!("  {}", row.iter().collect::<String>());
    }
    Ok(())
}
