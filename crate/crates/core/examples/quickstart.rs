use spectral_core::dataset::{self, SynthConfig};
use spectral_core::metrics::EvaluationReport;
use spectral_core::pls;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = dataset::synth_spectra(&SynthConfig::default())?;
    let split = data.balanced_split(0.7, 7)?;
    let (train, test) = (data.subset(&split.train_indices)?, data.subset(&split.test_indices)?);
    let model = pls::fit_plsda(&train, 2, false)?;
    let predicted = model.predict(test.spectra())?;
    let report = EvaluationReport::compute(test.labels(), &predicted, 3)?;
    println!("mis {:.3}  ari {:.3}  chi2 {:.3}", report.mis, report.ari, report.chi2);
    Ok(())
}
