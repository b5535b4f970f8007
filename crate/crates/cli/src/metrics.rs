use std::path::Path;

use qfem_core::metrics::{haar_bin_probability, metric_report, FidelityHistogram, MetricReport};
use qfem_core::vqls::AnsatzSpec;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{write_csv, write_json};

#[derive(Debug, Clone)]
pub struct MetricsRequest {
    pub specs: Vec<AnsatzSpec>,
    pub pairs: usize,
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
}

/// Reports in request order; the specs are evaluated in parallel.
pub fn run_metrics(request: &MetricsRequest) -> Result<Vec<(MetricReport, FidelityHistogram)>, CliError> {
    request
        .specs
        .par_iter()
        .map(|spec| Ok(metric_report(spec, request.pairs, request.samples, request.bins, request.seed)?))
        .collect()
}

#[derive(Serialize)]
struct HistogramRow {
    lo: f64,
    hi: f64,
    count: u64,
    probability: f64,
    haar_probability: f64,
}

pub fn histogram_file_name(spec: &AnsatzSpec) -> String {
    format!("histogram_{}_L{}.csv", spec.family, spec.layers)
}

/// metrics.json holds every report; each histogram goes to its own CSV.
pub fn write_metrics_outputs(results: &[(MetricReport, FidelityHistogram)], dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let reports: Vec<&MetricReport> = results.iter().map(|(r, _)| r).collect();
    write_json(&dir.join("metrics.json"), &reports)?;
    for (report, hist) in results {
        let dim = 1usize << report.ansatz.n;
        let total = hist.sample_pairs.max(1) as f64;
        let rows = hist.counts.iter().zip(hist.edges.windows(2)).map(|(&count, w)| HistogramRow {
            lo: w[0],
            hi: w[1],
            count,
            probability: count as f64 / total,
            haar_probability: haar_bin_probability(w[0], w[1], dim),
        });
        write_csv(&dir.join(histogram_file_name(&report.ansatz)), rows)?;
    }
    Ok(())
}
