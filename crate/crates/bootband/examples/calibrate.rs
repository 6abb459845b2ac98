//! Desk-scale reproduction of the reference experiments, for eyeballing the
//! coverage and corrected-level numbers before freezing test tolerances.
//!
//! Run with `cargo run --release -p bootband --example calibrate [seed]`.

use bootband::{
    correction_experiment, coverage_experiment, DgpSpec, KernelSpec, ModelGrid, RngSpec,
    WeightScheme,
};
use std::time::Instant;

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let dgp = DgpSpec::bumps(400).unwrap();
    let rng = RngSpec::new(seed);

    // Effective coverage at desk scale: M = 500 datasets, B = 2000.
    for h in [0.3, 0.12] {
        let kernel = KernelSpec::epanechnikov(h).unwrap();
        let grid = ModelGrid::local_constant(ModelGrid::equidistant_centers(71), kernel).unwrap();
        let t = Instant::now();
        let report = coverage_experiment(
            &dgp,
            &grid,
            &[0.05, 0.1, 0.25, 0.5],
            500,
            2000,
            WeightScheme::Gaussian,
            &rng,
        )
        .unwrap();
        println!("coverage h={h} ({:.1?}):", t.elapsed());
        for row in &report.rows {
            println!(
                "  alpha={:.2} coverage={:.3} mean_boot_level={:.4} mc_level={:.4}",
                row.alpha,
                row.coverage_frequency,
                row.mean_corrected_level_bootstrap,
                row.corrected_level_mc.unwrap_or(f64::NAN)
            );
        }
    }

    // Corrected levels: M = B = 2000, 200 repetitions.
    let kernel = KernelSpec::epanechnikov(0.3).unwrap();
    for quadratic in [false, true] {
        let grid = if quadratic {
            ModelGrid::local_quadratic(ModelGrid::equidistant_centers(71), kernel).unwrap()
        } else {
            ModelGrid::local_constant(ModelGrid::equidistant_centers(71), kernel).unwrap()
        };
        let t = Instant::now();
        let report = correction_experiment(
            &dgp,
            &grid,
            &[0.1, 0.25, 0.5],
            2000,
            2000,
            200,
            WeightScheme::Gaussian,
            &rng,
        )
        .unwrap();
        let name = if quadratic { "lq" } else { "lc" };
        println!("corrections {name} h=0.3 ({:.1?}):", t.elapsed());
        for row in &report.rows {
            println!(
                "  alpha={:.2} mc={:.4} boot={:.4}",
                row.alpha, row.mc_corrected_level, row.bootstrap_corrected_level
            );
        }
    }
}
