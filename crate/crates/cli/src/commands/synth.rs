//! `spectral-bench synth`: write a synthetic labeled spectra CSV.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use spectral_core::dataset::{self, SynthConfig, WavelengthGrid};

#[derive(Args)]
pub struct SynthArgs {
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Number of classes
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    /// Samples generated per class
    #[arg(long, default_value_t = 54)]
    pub per_class: usize,
    /// Distance between adjacent class mean curves, in peak-shift units
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    /// Standard deviation of the additive reflectance noise
    #[arg(long, default_value_t = 0.0015)]
    pub noise: f64,
    /// Random seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// First wavelength in nm
    #[arg(long, default_value_t = 1100.0)]
    pub start: f64,
    /// Wavelength step in nm
    #[arg(long, default_value_t = 2.0)]
    pub step: f64,
    /// Number of wavelengths
    #[arg(long, default_value_t = 601)]
    pub count: usize,
}

pub fn run(args: SynthArgs) -> Result<()> {
    let grid = WavelengthGrid::new(args.start, args.step, args.count)
        .context("invalid wavelength grid")?;
    let config = SynthConfig {
        classes: args.classes,
        per_class: args.per_class,
        separation: args.separation,
        noise: args.noise,
        seed: args.seed,
        grid,
    };
    let data = dataset::synth_spectra(&config).context("failed to generate spectra")?;
    data.write_csv(&args.out)
        .with_context(|| format!("failed to write {}", args.out.display()))?;
    eprintln!(
        "wrote {} samples x {} wavelengths ({} classes) to {}",
        data.n_samples(),
        data.spectra().cols(),
        data.n_classes(),
        args.out.display()
    );
    Ok(())
}
