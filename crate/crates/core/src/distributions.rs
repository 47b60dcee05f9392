//! Incubation and generation period models.
//!
//! The incubation period (infection to symptom onset) is log-normal and the
//! generation period (source infection to recipient infection) is Weibull.
//! Two derived quantities matter downstream: the difference
//! `generation - incubation`, whose distribution the Gaussian
//! infectiousness factor approximates, and the sum
//! `generation + incubation`, whose CDF `G` governs how quickly an infected
//! recipient develops symptoms after the contact event.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Weibull};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Minimum Monte Carlo sample count for building the sum CDF.
pub const MIN_SUM_CDF_SAMPLES: usize = 10_000;

/// Empirical mass the sum-CDF grid must cover. Kept well above the 0.999
/// floor so that probabilities clamped at the grid end overstate the tail
/// by at most ~1e-4.
pub const SUM_CDF_COVERAGE: f64 = 0.9999;

/// Parameter set for the incubation (log-normal) and generation (Weibull)
/// period models. Units: log-days for the log-normal parameters, days for
/// the Weibull scale.
///
/// The defaults are the published estimates from the epidemiological
/// literature this model family is based on; verify them before any
/// production use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpiDistributions {
    pub incubation_meanlog: f64,
    pub incubation_sdlog: f64,
    pub generation_shape: f64,
    pub generation_scale: f64,
}

impl Default for EpiDistributions {
    fn default() -> Self {
        EpiDistributions {
            incubation_meanlog: 1.644,
            incubation_sdlog: 0.363,
            generation_shape: 2.826,
            generation_scale: 5.665,
        }
    }
}

impl EpiDistributions {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("incubation_sdlog", self.incubation_sdlog),
            ("generation_shape", self.generation_shape),
            ("generation_scale", self.generation_scale),
        ] {
            if v <= 0.0 || !v.is_finite() {
                problems.push(format!(
                    "epi.{name}: must be a positive finite number, got {v}"
                ));
            }
        }
        if !self.incubation_meanlog.is_finite() {
            problems.push(format!(
                "epi.incubation_meanlog: must be finite, got {}",
                self.incubation_meanlog
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation { problems })
        }
    }

    fn samplers(&self) -> Result<(Weibull<f64>, LogNormal<f64>)> {
        self.validate()?;
        let generation = Weibull::new(self.generation_scale, self.generation_shape)
            .map_err(|e| Error::param(format!("generation Weibull: {e}")))?;
        let incubation = LogNormal::new(self.incubation_meanlog, self.incubation_sdlog)
            .map_err(|e| Error::param(format!("incubation log-normal: {e}")))?;
        Ok((generation, incubation))
    }

    /// Draws `n` i.i.d. samples of `generation - incubation` in days, the
    /// signed interval between the source's symptom onset and the contact
    /// that infects the recipient. Deterministic for a fixed seed.
    pub fn sample_difference(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::param("sample count must be at least 1"));
        }
        let (generation, incubation) = self.samplers()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| generation.sample(&mut rng) - incubation.sample(&mut rng))
            .collect())
    }

    /// Draws `n` i.i.d. samples of `generation + incubation` in days, the
    /// interval from an infecting contact to the recipient's symptom onset.
    pub fn sample_sum(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::param("sample count must be at least 1"));
        }
        let (generation, incubation) = self.samplers()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| generation.sample(&mut rng) + incubation.sample(&mut rng))
            .collect())
    }

    /// Builds the empirical CDF `G` of `generation + incubation` on a
    /// uniform day grid starting at 0. The grid extends to the empirical
    /// [`SUM_CDF_COVERAGE`] quantile plus one step, so the last grid value
    /// is within ~1e-4 of 1.
    pub fn build_sum_cdf(&self, n: usize, grid_step: f64, seed: u64) -> Result<SumCdf> {
        if n < MIN_SUM_CDF_SAMPLES {
            return Err(Error::param(format!(
                "sum CDF needs at least {MIN_SUM_CDF_SAMPLES} samples, got {n}"
            )));
        }
        if grid_step <= 0.0 || !grid_step.is_finite() {
            return Err(Error::param(format!(
                "grid_step must be positive, got {grid_step}"
            )));
        }
        let mut samples = self.sample_sum(n, seed)?;
        samples.sort_by(f64::total_cmp);

        let q_index = ((SUM_CDF_COVERAGE * n as f64).ceil() as usize).clamp(1, n) - 1;
        let horizon = samples[q_index];
        let steps = (horizon / grid_step).ceil() as usize + 1;

        let mut grid_times = Vec::with_capacity(steps + 1);
        let mut grid_values = Vec::with_capacity(steps + 1);
        let mut idx = 0usize;
        for k in 0..=steps {
            let t = k as f64 * grid_step;
            while idx < n && samples[idx] <= t {
                idx += 1;
            }
            grid_times.push(t);
            grid_values.push(idx as f64 / n as f64);
        }
        SumCdf::from_grid(grid_times, grid_values, n, seed)
    }
}

/// Empirical CDF of `generation + incubation` on a uniform day grid, with
/// the sample count and seed that produced it recorded for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumCdf {
    grid_times: Vec<f64>,
    grid_values: Vec<f64>,
    sample_count: usize,
    rng_seed: u64,
}

impl SumCdf {
    /// Wraps a precomputed grid, checking the CDF invariants: times
    /// strictly increasing from a non-negative start, values
    /// non-decreasing within `[0, 1]`.
    pub fn from_grid(
        grid_times: Vec<f64>,
        grid_values: Vec<f64>,
        sample_count: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        if grid_times.len() != grid_values.len() || grid_times.len() < 2 {
            return Err(Error::param("CDF grid needs at least two aligned points"));
        }
        if grid_times
            .iter()
            .chain(&grid_values)
            .any(|v| !v.is_finite())
        {
            return Err(Error::param("CDF grid entries must be finite"));
        }
        if grid_times[0] < 0.0 {
            return Err(Error::param("CDF grid must start at a non-negative time"));
        }
        for w in grid_times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::param("CDF grid times must be strictly increasing"));
            }
        }
        for w in grid_values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::param("CDF grid values must be non-decreasing"));
            }
        }
        let first = grid_values[0];
        let last = *grid_values.last().unwrap();
        if !(0.0..=1.0).contains(&first) || !(0.0..=1.0).contains(&last) {
            return Err(Error::param("CDF grid values must lie in [0, 1]"));
        }
        Ok(SumCdf {
            grid_times,
            grid_values,
            sample_count,
            rng_seed,
        })
    }

    /// Evaluates `G(t)` by linear interpolation on the grid. Returns 0
    /// below the grid start and the last grid value (not 1) above the grid
    /// end, so the tail is never overstated.
    pub fn eval(&self, t_days: f64) -> f64 {
        let times = &self.grid_times;
        let values = &self.grid_values;
        if t_days < times[0] {
            return 0.0;
        }
        let last = times.len() - 1;
        if t_days >= times[last] {
            return values[last];
        }
        // First index with time > t; the segment [hi-1, hi] brackets t.
        let hi = times.partition_point(|&g| g <= t_days);
        let lo = hi - 1;
        let frac = (t_days - times[lo]) / (times[hi] - times[lo]);
        values[lo] + frac * (values[hi] - values[lo])
    }

    /// Last grid time in days: the effective horizon of the model.
    pub fn horizon_days(&self) -> f64 {
        *self.grid_times.last().unwrap()
    }

    pub fn grid_times(&self) -> &[f64] {
        &self.grid_times
    }

    pub fn grid_values(&self) -> &[f64] {
        &self.grid_values
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
}

/// How well a Gaussian fits a sample: the Kolmogorov-Smirnov sup-norm
/// distance plus the sample moments. `skewness` is reported because the
/// difference distribution has a heavier left tail than the Gaussian, so
/// its sign is the caveat to watch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub ks_statistic: f64,
    pub sample_mean: f64,
    pub sample_sd: f64,
    pub skewness: f64,
}

/// Compares the empirical CDF of `samples` with `Normal(mu0, sigma0^2)`.
pub fn gaussian_fit_report(samples: &[f64], mu0: f64, sigma0: f64) -> Result<FitReport> {
    if samples.is_empty() {
        return Err(Error::param("fit report needs at least one sample"));
    }
    if sigma0 <= 0.0 || !sigma0.is_finite() {
        return Err(Error::param(format!(
            "sigma0 must be positive, got {sigma0}"
        )));
    }
    let normal =
        Normal::new(mu0, sigma0).map_err(|e| Error::param(format!("reference normal: {e}")))?;

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut ks = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(x);
        let above = (i as f64 + 1.0) / n - cdf;
        let below = cdf - i as f64 / n;
        ks = ks.max(above).max(below);
    }

    let mean = sorted.iter().sum::<f64>() / n;
    let m2 = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = sorted.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let sample_sd = if sorted.len() > 1 {
        (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };

    Ok(FitReport {
        ks_statistic: ks,
        sample_mean: mean,
        sample_sd,
        skewness,
    })
}
