//! Ansatz diagnostics: expressibility as the KL divergence of sampled state
//! fidelities from the Haar fidelity law, and entanglement capability as the
//! mean Meyer-Wallach measure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QfemError, Result};
use crate::qsim::Statevector;
use crate::vqls::{Ansatz, AnsatzSpec};

pub const DEFAULT_BINS: usize = 75;
pub const MIN_SAMPLES: usize = 100;

/// Haar fidelity density (N − 1)(1 − F)^(N − 2).
pub fn haar_pdf(fidelity: f64, dim: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(QfemError::Domain(format!("fidelity {fidelity} outside [0, 1]")));
    }
    if dim < 2 {
        return Err(QfemError::Domain(format!("Hilbert-space dimension {dim} < 2")));
    }
    Ok((dim - 1) as f64 * (1.0 - fidelity).powi(dim as i32 - 2))
}

/// Haar probability of a fidelity in [lo, hi]: (1 − lo)^(N−1) − (1 − hi)^(N−1).
pub fn haar_bin_probability(lo: f64, hi: f64, dim: usize) -> f64 {
    let e = dim as i32 - 1;
    (1.0 - lo).powi(e) - (1.0 - hi).powi(e)
}

/// How empty sample bins enter the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum EmptyBins {
    /// 0 · log 0 = 0.
    #[default]
    Skip,
    /// Add `epsilon` to every sample bin before normalizing.
    Smooth { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub sample_pairs: usize,
}

impl FidelityHistogram {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(QfemError::Config("histogram needs at least one bin".into()));
        }
        let edges = (0..=bins).map(|k| k as f64 / bins as f64).collect();
        Ok(Self { edges, counts: vec![0; bins], sample_pairs: 0 })
    }

    pub fn add(&mut self, fidelity: f64) {
        let bins = self.counts.len();
        let k = ((fidelity.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        self.counts[k] += 1;
        self.sample_pairs += 1;
    }

    /// D_KL(sampled || Haar) with exactly integrated Haar bin masses.
    pub fn kl_to_haar(&self, dim: usize, empty: EmptyBins) -> f64 {
        let eps = match empty {
            EmptyBins::Skip => 0.0,
            EmptyBins::Smooth { epsilon } => epsilon,
        };
        let total = self.sample_pairs as f64 + eps * self.counts.len() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .filter(|(c, _)| **c > 0 || eps > 0.0)
            .map(|(c, w)| {
                let p = (*c as f64 + eps) / total;
                let q = haar_bin_probability(w[0], w[1], dim).max(f64::MIN_POSITIVE);
                p * (p / q).ln()
            })
            .sum()
    }
}

fn uniform_angles(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(QfemError::Config(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

/// Fidelity histogram of `pairs` independent parameter pairs of a sampler.
pub fn fidelity_histogram<F>(
    sampler: F,
    params: usize,
    pairs: usize,
    bins: usize,
    seed: u64,
) -> Result<FidelityHistogram>
where
    F: Fn(&[f64]) -> Result<Statevector>,
{
    check_samples(pairs)?;
    let mut hist = FidelityHistogram::new(bins)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let a = sampler(&uniform_angles(&mut rng, params))?;
        let b = sampler(&uniform_angles(&mut rng, params))?;
        hist.add(a.inner(&b)?.norm_sqr());
    }
    Ok(hist)
}

/// Expr of a generic sampler on `n` qubits.
pub fn expressibility_of<F>(sampler: F, n: usize, params: usize, pairs: usize, bins: usize, seed: u64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Statevector>,
{
    let hist = fidelity_histogram(sampler, params, pairs, bins, seed)?;
    Ok(hist.kl_to_haar(1 << n, EmptyBins::Skip))
}

pub fn expressibility(spec: &AnsatzSpec, pairs: usize, bins: usize, seed: u64) -> Result<f64> {
    Ok(expressibility_report(spec, pairs, bins, seed)?.0)
}

/// Expr together with the histogram it came from.
pub fn expressibility_report(
    spec: &AnsatzSpec,
    pairs: usize,
    bins: usize,
    seed: u64,
) -> Result<(f64, FidelityHistogram)> {
    let ansatz = Ansatz::new(*spec);
    let hist = fidelity_histogram(|t| ansatz.state(t), spec.parameter_count(), pairs, bins, seed)?;
    Ok((hist.kl_to_haar(1 << spec.n, EmptyBins::Skip), hist))
}

/// Purity Tr(ρ_k²) of the reduced state of qubit k.
pub fn qubit_purity(state: &Statevector, k: usize) -> f64 {
    let amps = state.amplitudes();
    let bit = 1 << k;
    let (mut p0, mut p1) = (0.0, 0.0);
    let mut coherence = num_complex::Complex64::new(0.0, 0.0);
    for i in (0..amps.len()).filter(|i| i & bit == 0) {
        let (a0, a1) = (amps[i], amps[i | bit]);
        p0 += a0.norm_sqr();
        p1 += a1.norm_sqr();
        coherence += a0 * a1.conj();
    }
    p0 * p0 + p1 * p1 + 2.0 * coherence.norm_sqr()
}

/// Sum of squared populations p0² + p1² of qubit k: the purity with the
/// coherences of ρ_k dropped.
pub fn qubit_population_purity(state: &Statevector, k: usize) -> f64 {
    let bit = 1 << k;
    let p1: f64 = state.amplitudes().iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum();
    let p0 = state.norm().powi(2) - p1;
    p0 * p0 + p1 * p1
}

/// Which single-qubit purity enters Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PurityMeasure {
    /// Tr(ρ_k²): the Meyer-Wallach measure.
    #[default]
    Full,
    /// Diagonal of ρ_k only. Not an entanglement measure (a |+⟩ product state
    /// scores 1); kept to compare against tables computed this way.
    Populations,
}

/// Q = 2 − (2/n) Σ_k Tr(ρ_k²).
pub fn meyer_wallach_q(state: &Statevector) -> Result<f64> {
    meyer_wallach_q_with(state, PurityMeasure::Full)
}

pub fn meyer_wallach_q_with(state: &Statevector, measure: PurityMeasure) -> Result<f64> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(QfemError::InvalidVector(format!("state norm {norm} is not 1")));
    }
    let n = state.num_qubits();
    let total: f64 = match measure {
        PurityMeasure::Full => (0..n).map(|k| qubit_purity(state, k)).sum(),
        PurityMeasure::Populations => (0..n).map(|k| qubit_population_purity(state, k)).sum(),
    };
    Ok((2.0 - 2.0 * total / n as f64).clamp(0.0, 1.0))
}

/// Mean Q of a generic sampler.
pub fn ent_capability_of<F>(sampler: F, params: usize, samples: usize, seed: u64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Statevector>,
{
    ent_capability_with(sampler, params, samples, seed, PurityMeasure::Full)
}

pub fn ent_capability_with<F>(
    sampler: F,
    params: usize,
    samples: usize,
    seed: u64,
    measure: PurityMeasure,
) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Statevector>,
{
    check_samples(samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..samples {
        sum += meyer_wallach_q_with(&sampler(&uniform_angles(&mut rng, params))?, measure)?;
    }
    Ok(sum / samples as f64)
}

pub fn ent_capability(spec: &AnsatzSpec, samples: usize, seed: u64) -> Result<f64> {
    ent_capability_measured(spec, samples, seed, PurityMeasure::Full)
}

pub fn ent_capability_measured(spec: &AnsatzSpec, samples: usize, seed: u64, measure: PurityMeasure) -> Result<f64> {
    let ansatz = Ansatz::new(*spec);
    ent_capability_with(|t| ansatz.state(t), spec.parameter_count(), samples, seed, measure)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ansatz: AnsatzSpec,
    pub parameters: usize,
    pub expr: f64,
    pub ent: f64,
    /// ENT with populations-only purity, for comparison with tables computed that way.
    pub ent_populations: f64,
    pub pairs: usize,
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
}

/// Expr and ENT of one ansatz; the two samplers use decorrelated seeds.
pub fn metric_report(
    spec: &AnsatzSpec,
    pairs: usize,
    samples: usize,
    bins: usize,
    seed: u64,
) -> Result<(MetricReport, FidelityHistogram)> {
    let (expr, hist) = expressibility_report(spec, pairs, bins, seed)?;
    let ent_seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let ent = ent_capability(spec, samples, ent_seed)?;
    let ent_populations = ent_capability_measured(spec, samples, ent_seed, PurityMeasure::Populations)?;
    let report = MetricReport {
        ansatz: *spec,
        parameters: spec.parameter_count(),
        expr,
        ent,
        ent_populations,
        pairs,
        samples,
        bins,
        seed,
    };
    Ok((report, hist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Circuit, Gate};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
        let amps: Vec<Complex64> =
            (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        Statevector::from_amplitudes(amps).unwrap().normalized().unwrap()
    }

    /// Purity from the singular values of the 2 × 2^(n−1) reshaping that
    /// separates qubit k from the rest.
    fn purity_by_svd(state: &Statevector, k: usize) -> f64 {
        let n = state.num_qubits();
        let rest = 1 << (n - 1);
        let mut m = DMatrix::<Complex64>::zeros(2, rest);
        for (i, a) in state.amplitudes().iter().enumerate() {
            let b = i >> k & 1;
            let r = (i & ((1 << k) - 1)) | ((i >> (k + 1)) << k);
            m[(b, r)] = *a;
        }
        m.svd(false, false).singular_values.iter().map(|s| s.powi(4)).sum()
    }

    #[test]
    fn haar_density_values() {
        assert_eq!(haar_pdf(0.3, 2).unwrap(), 1.0);
        assert_eq!(haar_pdf(0.0, 4).unwrap(), 3.0);
        assert!(haar_pdf(1.5, 4).is_err());
        assert!(haar_pdf(0.5, 1).is_err());
        // Composite Simpson on [0, 1].
        let m = 2000;
        let h = 1.0 / m as f64;
        let integral: f64 = (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * haar_pdf(k as f64 * h, 16).unwrap()
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((integral - 1.0).abs() < 1e-8);
        let masses: f64 = (0..75).map(|k| haar_bin_probability(k as f64 / 75.0, (k + 1) as f64 / 75.0, 16)).sum();
        assert!((masses - 1.0).abs() < 1e-14);
    }

    #[test]
    fn meyer_wallach_extremes() {
        let product = Statevector::zero(3)
            .unwrap()
            .apply_circuit(&Circuit::from_gates(3, vec![Gate::ry(0, 0.3), Gate::h(1), Gate::ry(2, 2.0)]).unwrap())
            .unwrap();
        assert!(meyer_wallach_q(&product).unwrap().abs() < 1e-12);
        let bell = Statevector::zero(2)
            .unwrap()
            .apply_circuit(&Circuit::from_gates(2, vec![Gate::h(0), Gate::cx(0, 1)]).unwrap())
            .unwrap();
        assert!((meyer_wallach_q(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert!(meyer_wallach_q(&Statevector::from_real(&[1.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn purity_matches_svd_and_local_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let s = random_state(3, &mut rng);
            for k in 0..3 {
                assert!((qubit_purity(&s, k) - purity_by_svd(&s, k)).abs() < 1e-10);
            }
            let q = meyer_wallach_q(&s).unwrap();
            assert!((0.0..=1.0).contains(&q));
            let local = Circuit::from_gates(3, vec![Gate::ry(0, 0.7), Gate::h(1), Gate::ry(2, -1.9)]).unwrap();
            let rotated = s.apply_circuit(&local).unwrap();
            assert!((meyer_wallach_q(&rotated).unwrap() - q).abs() < 1e-10);
        }
    }

    #[test]
    fn population_purity_ignores_coherence() {
        let plus = Statevector::zero(1).unwrap().apply_gate(&Gate::h(0)).unwrap();
        assert!(meyer_wallach_q(&plus).unwrap().abs() < 1e-12);
        assert!((meyer_wallach_q_with(&plus, PurityMeasure::Populations).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_sampler_is_maximally_inexpressive() {
        let identity = |_: &[f64]| Statevector::zero(4);
        let expr = expressibility_of(identity, 4, 3, 200, DEFAULT_BINS, 1).unwrap();
        let expected = -haar_bin_probability(74.0 / 75.0, 1.0, 16).ln();
        assert!((expr - expected).abs() < 1e-9);
        assert!(expr >= 3.0);
    }

    #[test]
    fn product_sampler_has_zero_entanglement() {
        let product = |t: &[f64]| {
            let gates = t.iter().enumerate().map(|(q, a)| Gate::ry(q % 4, *a)).collect();
            Statevector::zero(4)?.apply_circuit(&Circuit::from_gates(4, gates)?)
        };
        let ent = ent_capability_of(product, 12, 200, 9).unwrap();
        assert!(ent.abs() < 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = AnsatzSpec::new(crate::vqls::AnsatzFamily::A1, 3, 2).unwrap();
        assert_eq!(expressibility(&spec, 200, 75, 4).unwrap(), expressibility(&spec, 200, 75, 4).unwrap());
        assert!(expressibility(&spec, 50, 75, 4).is_err());
        assert!(ent_capability(&spec, 10, 4).is_err());
    }
}
