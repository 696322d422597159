//! Fits polynomial surrogates for power, latency and area over the bundled
//! grid and reports the cross-validated error of each degree.
//!
//! cargo run --release --example fit_surrogate [preset [samples.csv]]

use accel_ppa::costmodel::default_cost_table;
use accel_ppa::dse::{default_grid, explore};
use accel_ppa::regression::{
    design_features, fit_poly, samples_csv_string, Sample, Target, DEFAULT_FOLDS, DEFAULT_MAX_DEGREE,
    DEFAULT_SEED,
};
use accel_ppa::workload::builtin_network;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let net = builtin_network(&args.next().unwrap_or_else(|| "resnet20".into()))?;
    let ex = explore(&net, &default_grid(), &default_cost_table()?)?;
    if let Some(path) = args.next() {
        std::fs::write(&path, samples_csv_string(&ex.points))?;
        println!("samples written to {path}");
    }

    for target in Target::ALL {
        let samples: Vec<Sample> = ex
            .feasible()
            .map(|p| Sample::new(design_features(&p.cfg), target.value(&p.ppa.unwrap())))
            .collect();
        let mean = samples.iter().map(|s| s.target).sum::<f64>() / samples.len() as f64;
        let model = fit_poly(&samples, DEFAULT_MAX_DEGREE, DEFAULT_FOLDS, DEFAULT_SEED)?;
        let by_degree: Vec<String> = model
            .cv_rmse_by_degree
            .iter()
            .map(|e| format!("{:.1}%", 100.0 * e / mean))
            .collect();
        println!(
            "{:<8} degree {} ({} terms)  cv rmse by degree: {}",
            target,
            model.degree,
            model.terms.len(),
            by_degree.join(" ")
        );
    }
    Ok(())
}
