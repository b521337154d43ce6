//! Generalization experiment: compress i.i.d. samples and measure the true
//! error of the reconstruction.

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::approx::ProbabilityVector;
use crate::concept::ConceptClass;
use crate::error::{Error, Result};
use crate::harness::generators::{generate, GeneratorSpec};
use crate::rng;
use crate::scheme::{Scheme, SchemeConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub class: GeneratorSpec,
    #[serde(default)]
    pub target: usize,
    /// Point weights; uniform when absent.
    #[serde(default)]
    pub distribution: Option<Vec<f64>>,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Samples compressed up front to measure the scheme size.
    #[serde(default = "default_pilot_samples")]
    pub pilot_samples: usize,
    #[serde(default = "default_pilot_size")]
    pub pilot_size: usize,
}

fn default_pilot_samples() -> usize {
    20
}

fn default_pilot_size() -> usize {
    200
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !open(self.epsilon) || !open(self.delta) {
            return Err(Error::Config("epsilon and delta must lie in (0, 1)".into()));
        }
        if self.trials == 0 || self.pilot_samples == 0 || self.pilot_size == 0 {
            return Err(Error::Config(
                "trials, pilot_samples and pilot_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `ceil(8 (k log2(2/eps) + log2(1/delta)) / eps)`.
pub fn required_sample_size(k: usize, epsilon: f64, delta: f64) -> usize {
    let bits = k as f64 * (2.0 / epsilon).log2() + (1.0 / delta).log2();
    (8.0 * bits / epsilon - 1e-9).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub class: String,
    pub target: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest `kernel_size + info_bits` over the pilot runs.
    pub scheme_size: usize,
    /// Largest kernel size over the pilot runs.
    pub kernel_size: usize,
    /// Sample size used in every trial, from `scheme_size`.
    pub sample_size: usize,
    /// Sample size the kernel size alone would require.
    pub kernel_only_sample_size: usize,
    pub failures: usize,
    pub failure_fraction: f64,
    /// `delta` plus binomial slack.
    pub allowed_fraction: f64,
    pub mean_error: f64,
    pub max_error: f64,
    pub passed: bool,
}

pub const FAILURE_SLACK: f64 = 0.1;

/// Exact `mu({x : h(x) != c(x)})`.
pub fn true_error(
    class: &ConceptClass,
    target: usize,
    hypothesis: &crate::bits::BitRow,
    mu: &ProbabilityVector,
) -> f64 {
    let c = class.row(target);
    (0..class.domain_size())
        .filter(|&x| c.get(x) != hypothesis.get(x))
        .fold(0.0, |acc, x| acc + mu.weights()[x])
}

pub fn generalization_experiment(config: &ExperimentConfig, scheme_config: &SchemeConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let class = generate(&config.class)?;
    if config.target >= class.len() {
        return Err(Error::Config(format!(
            "target {} out of range for a class of {} concepts",
            config.target,
            class.len()
        )));
    }
    let mu = match &config.distribution {
        Some(w) if w.len() != class.domain_size() => {
            return Err(Error::Config(format!(
                "distribution has {} weights for a domain of {}",
                w.len(),
                class.domain_size()
            )))
        }
        Some(w) => ProbabilityVector::new(w.clone()).map_err(|e| Error::Config(e.to_string()))?,
        None => ProbabilityVector::uniform(class.domain_size()),
    };
    let sampler = WeightedIndex::new(mu.weights()).map_err(|e| Error::Config(e.to_string()))?;
    let scheme = Scheme::new(&class, scheme_config.clone());

    let mut pilot_rng = rng::stream(config.seed, 0);
    let mut scheme_size = 0;
    let mut kernel_size = 0;
    for i in 0..config.pilot_samples {
        let points: Vec<usize> = (0..config.pilot_size).map(|_| sampler.sample(&mut pilot_rng)).collect();
        let sample = class.label_points(config.target, &points)?;
        let (_, report) = scheme.compress(&sample, rng::derive(config.seed, i as u64))?;
        scheme_size = scheme_size.max(report.scheme_size);
        kernel_size = kernel_size.max(report.kernel_size);
    }
    let sample_size = required_sample_size(scheme_size, config.epsilon, config.delta);
    let kernel_only_sample_size = required_sample_size(kernel_size, config.epsilon, config.delta);

    let mut trial_rng = rng::stream(config.seed, 1);
    let mut failures = 0;
    let mut total_error = 0.0;
    let mut max_error: f64 = 0.0;
    for i in 0..config.trials {
        let points: Vec<usize> = (0..sample_size).map(|_| sampler.sample(&mut trial_rng)).collect();
        let sample = class.label_points(config.target, &points)?;
        let (compressed, _) = scheme.compress(&sample, rng::derive(config.seed, (1 << 32) + i as u64))?;
        let h = scheme.reconstruct(&compressed)?;
        let err = true_error(&class, config.target, h.as_row(), &mu);
        total_error += err;
        max_error = max_error.max(err);
        if err > config.epsilon {
            failures += 1;
        }
    }
    let failure_fraction = failures as f64 / config.trials as f64;
    let allowed_fraction = config.delta + FAILURE_SLACK;
    Ok(ExperimentReport {
        class: config.class.label(),
        target: config.target,
        epsilon: config.epsilon,
        delta: config.delta,
        trials: config.trials,
        seed: config.seed,
        scheme_size,
        kernel_size,
        sample_size,
        kernel_only_sample_size,
        failures,
        failure_fraction,
        allowed_fraction,
        mean_error: total_error / config.trials as f64,
        max_error,
        passed: failure_fraction <= allowed_fraction,
    })
}
