//! Bayesian estimation of the base survival parameter `nu`.
//!
//! Observed outcomes are pairs (total exposure `rho`, infected yes/no).
//! Under a flat Beta(1,1) prior the likelihood of a record is
//! `nu^(rho (1-o)) (1 - nu^rho)^o`. The posterior is computed two ways:
//! trapezoid-normalized grid integration (the reference) and a Metropolis
//! random walk on the logit scale (named for extensibility to richer
//! parameterizations).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed collection: total exposure exponent and whether the
/// recipient got infected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub rho_total: f64,
    pub infected: bool,
}

/// Validated outcome data. Construction rejects negative or non-finite
/// exposures and the impossible record `infected` with `rho_total = 0`,
/// which has zero likelihood for every `nu` and would silently poison the
/// posterior.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeDataset {
    records: Vec<OutcomeRecord>,
}

impl OutcomeDataset {
    pub fn new(records: Vec<OutcomeRecord>) -> Result<Self> {
        for (index, record) in records.iter().enumerate() {
            if record.rho_total < 0.0 || !record.rho_total.is_finite() {
                return Err(Error::data(format!(
                    "record {index}: rho_total must be non-negative and finite, got {}",
                    record.rho_total
                )));
            }
            if record.infected && record.rho_total == 0.0 {
                return Err(Error::ImpossibleRecord { index });
            }
        }
        Ok(OutcomeDataset { records })
    }

    pub fn records(&self) -> &[OutcomeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Bounds for the synthetic exposure spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoRange {
    pub low: f64,
    pub high: f64,
}

/// Chain health indicators for the Metropolis sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    pub acceptance_rate: f64,
    pub ess: f64,
    /// Set when the acceptance rate leaves [0.05, 0.95]; not fatal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuning_warning: Option<String>,
}

/// A posterior over `nu`: a normalized density grid, plus raw samples and
/// diagnostics when produced by MCMC.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub grid_nu: Vec<f64>,
    pub grid_density: Vec<f64>,
    pub samples: Option<Vec<f64>>,
    pub diagnostics: Option<McmcDiagnostics>,
}

impl Posterior {
    /// Posterior mean: from samples when present, else by grid quadrature.
    pub fn mean(&self) -> f64 {
        match &self.samples {
            Some(samples) => samples.iter().sum::<f64>() / samples.len() as f64,
            None => {
                let weighted: Vec<f64> = self
                    .grid_nu
                    .iter()
                    .zip(&self.grid_density)
                    .map(|(x, d)| x * d)
                    .collect();
                trapezoid(&self.grid_nu, &weighted)
            }
        }
    }

    /// Posterior standard deviation.
    pub fn sd(&self) -> f64 {
        let mean = self.mean();
        match &self.samples {
            Some(samples) => {
                let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                    / (samples.len() as f64 - 1.0).max(1.0);
                var.sqrt()
            }
            None => {
                let weighted: Vec<f64> = self
                    .grid_nu
                    .iter()
                    .zip(&self.grid_density)
                    .map(|(x, d)| (x - mean).powi(2) * d)
                    .collect();
                trapezoid(&self.grid_nu, &weighted).max(0.0).sqrt()
            }
        }
    }

    /// Posterior quantile in (0,1): order statistic of the samples, or
    /// inversion of the trapezoid CDF on the grid.
    pub fn quantile(&self, q: f64) -> f64 {
        match &self.samples {
            Some(samples) => {
                let mut sorted = samples.clone();
                sorted.sort_by(f64::total_cmp);
                let pos = q * (sorted.len() as f64 - 1.0);
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                let frac = pos - lo as f64;
                sorted[lo] + frac * (sorted[hi] - sorted[lo])
            }
            None => {
                let mut cumulative = 0.0;
                for i in 1..self.grid_nu.len() {
                    let dx = self.grid_nu[i] - self.grid_nu[i - 1];
                    let panel = 0.5 * (self.grid_density[i] + self.grid_density[i - 1]) * dx;
                    if cumulative + panel >= q {
                        let frac = if panel > 0.0 {
                            (q - cumulative) / panel
                        } else {
                            0.0
                        };
                        return self.grid_nu[i - 1] + frac * dx;
                    }
                    cumulative += panel;
                }
                *self.grid_nu.last().unwrap()
            }
        }
    }
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
        .sum()
}

/// `ln(1 - nu^rho)` computed without catastrophic cancellation.
fn ln_one_minus_pow(nu: f64, rho: f64) -> f64 {
    let x = rho * nu.ln(); // <= 0
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x > -std::f64::consts::LN_2 {
        // 1 - e^x is small: compute it via expm1.
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Log-likelihood of the dataset at `nu`:
/// `sum_m [rho_m (1-o_m) ln(nu) + o_m ln(1 - nu^rho_m)]`.
pub fn log_likelihood(nu: f64, data: &OutcomeDataset) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::param(format!("nu must be in (0, 1), got {nu}")));
    }
    let ln_nu = nu.ln();
    Ok(data
        .records()
        .iter()
        .map(|r| {
            if r.infected {
                ln_one_minus_pow(nu, r.rho_total)
            } else {
                r.rho_total * ln_nu
            }
        })
        .sum())
}

/// Reference posterior: log-likelihood on a uniform open grid over (0,1),
/// exponentiated stably and normalized so the trapezoid integral is 1.
pub fn posterior_grid(data: &OutcomeDataset, grid_size: usize) -> Result<Posterior> {
    if grid_size < 64 {
        return Err(Error::param(format!(
            "grid_size must be at least 64, got {grid_size}"
        )));
    }
    let grid_nu: Vec<f64> = (1..=grid_size)
        .map(|i| i as f64 / (grid_size as f64 + 1.0))
        .collect();
    let log_post: Vec<f64> = grid_nu
        .iter()
        .map(|&nu| log_likelihood(nu, data))
        .collect::<Result<_>>()?;
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::data("posterior is zero everywhere on the grid"));
    }
    let mut grid_density: Vec<f64> = log_post.iter().map(|lp| (lp - max).exp()).collect();
    let norm = trapezoid(&grid_nu, &grid_density);
    for d in &mut grid_density {
        *d /= norm;
    }
    Ok(Posterior {
        grid_nu,
        grid_density,
        samples: None,
        diagnostics: None,
    })
}

fn logistic(theta: f64) -> f64 {
    1.0 / (1.0 + (-theta).exp())
}

/// Metropolis random walk on `logit(nu)`. The flat prior on `nu` becomes
/// `nu (1 - nu)` on the logit scale (the Jacobian); proposals are
/// Gaussian steps. Deterministic for a fixed seed.
pub fn posterior_mcmc(
    data: &OutcomeDataset,
    n_samples: usize,
    burn_in: usize,
    step: f64,
    seed: u64,
) -> Result<Posterior> {
    if n_samples < 1_000 {
        return Err(Error::param(format!(
            "n_samples must be at least 1000, got {n_samples}"
        )));
    }
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::param(format!(
            "proposal step must be positive, got {step}"
        )));
    }
    let log_target = |theta: f64| -> Result<f64> {
        let nu = logistic(theta);
        // At the numeric edges the Jacobian term drives the target to 0.
        if nu <= 0.0 || nu >= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(log_likelihood(nu, data)? + nu.ln() + (-nu).ln_1p())
    };

    let normal = rand_distr::StandardNormal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = 0.0;
    let mut current = log_target(theta)?;
    let mut samples = Vec::with_capacity(n_samples);
    let mut accepted = 0usize;
    let total = n_samples + burn_in;
    for i in 0..total {
        let z: f64 = rng.sample(normal);
        let proposal = theta + step * z;
        let candidate = log_target(proposal)?;
        let u: f64 = rng.random();
        if u.ln() < candidate - current {
            theta = proposal;
            current = candidate;
            accepted += 1;
        }
        if i >= burn_in {
            samples.push(logistic(theta));
        }
    }
    let acceptance_rate = accepted as f64 / total as f64;
    let ess = effective_sample_size(&samples);
    let tuning_warning = if !(0.05..=0.95).contains(&acceptance_rate) {
        Some(format!(
            "acceptance rate {acceptance_rate:.3} outside [0.05, 0.95]; adjust the proposal step"
        ))
    } else {
        None
    };

    // Histogram density at bin midpoints, normalized like the grid route,
    // so downstream consumers see one shape regardless of method.
    let bins = 64usize;
    let width = 1.0 / bins as f64;
    let grid_nu: Vec<f64> = (0..bins).map(|k| (k as f64 + 0.5) * width).collect();
    let mut grid_density = vec![0.0; bins];
    for &s in &samples {
        let idx = ((s / width) as usize).min(bins - 1);
        grid_density[idx] += 1.0;
    }
    let norm = trapezoid(&grid_nu, &grid_density);
    if norm > 0.0 {
        for d in &mut grid_density {
            *d /= norm;
        }
    }

    Ok(Posterior {
        grid_nu,
        grid_density,
        samples: Some(samples),
        diagnostics: Some(McmcDiagnostics {
            acceptance_rate,
            ess,
            tuning_warning,
        }),
    })
}

/// Effective sample size via Geyer's initial positive sequence on the
/// autocorrelation function.
fn effective_sample_size(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 4 {
        return n as f64;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = samples.iter().map(|x| x - mean).collect();
    let var = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return 1.0;
    }
    let autocorr = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (n as f64 * var)
    };
    let mut tau = 1.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 1;
    while lag + 1 < n {
        let pair = autocorr(lag) + autocorr(lag + 1);
        if pair <= 0.0 {
            break;
        }
        // Enforce monotone decrease of the paired sums.
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        lag += 2;
    }
    (n as f64 / tau).min(n as f64)
}

/// Draws a synthetic dataset: `rho ~ Uniform(low, high)`,
/// `infected ~ Bernoulli(1 - true_nu^rho)`. Deterministic for a fixed seed.
pub fn simulate_outcomes(
    true_nu: f64,
    m: usize,
    rho_range: RhoRange,
    seed: u64,
) -> Result<OutcomeDataset> {
    if !(true_nu > 0.0 && true_nu < 1.0) {
        return Err(Error::param(format!(
            "true_nu must be in (0, 1), got {true_nu}"
        )));
    }
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    if !(rho_range.low >= 0.0 && rho_range.high >= rho_range.low) || !rho_range.high.is_finite() {
        return Err(Error::param(format!(
            "rho range must satisfy 0 <= low <= high, got [{}, {}]",
            rho_range.low, rho_range.high
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(m);
    for _ in 0..m {
        let rho_total = if rho_range.low == rho_range.high {
            rho_range.low
        } else {
            rng.random_range(rho_range.low..rho_range.high)
        };
        let p_infect = 1.0 - true_nu.powf(rho_total);
        let infected = rng.random::<f64>() < p_infect;
        records.push(OutcomeRecord {
            rho_total,
            infected,
        });
    }
    OutcomeDataset::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(records: &[(f64, bool)]) -> OutcomeDataset {
        OutcomeDataset::new(
            records
                .iter()
                .map(|&(rho_total, infected)| OutcomeRecord {
                    rho_total,
                    infected,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn impossible_record_rejected_distinctly() {
        let err = OutcomeDataset::new(vec![OutcomeRecord {
            rho_total: 0.0,
            infected: true,
        }])
        .unwrap_err();
        assert!(matches!(err, Error::ImpossibleRecord { index: 0 }));
        assert!(OutcomeDataset::new(vec![OutcomeRecord {
            rho_total: -1.0,
            infected: false
        }])
        .is_err());
    }

    #[test]
    fn log_likelihood_values() {
        // A zero-exposure survivor contributes nothing.
        let d = dataset(&[(0.0, false)]);
        assert_eq!(log_likelihood(0.3, &d).unwrap(), 0.0);
        // Single infected record with rho = 1 at nu = 0.5: ln(0.5).
        let d = dataset(&[(1.0, true)]);
        assert!((log_likelihood(0.5, &d).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        // Survival-only data favors nu -> 1.
        let d = dataset(&[(1.0, false), (2.0, false)]);
        assert!(log_likelihood(0.99, &d).unwrap() > log_likelihood(0.5, &d).unwrap());
        assert!(log_likelihood(1.5, &d).is_err());
        assert!(log_likelihood(0.0, &d).is_err());
    }

    #[test]
    fn stable_log_term_matches_naive_in_easy_range() {
        for nu in [0.1, 0.5, 0.9] {
            for rho in [0.3, 1.0, 4.0] {
                let naive = (1.0 - f64::powf(nu, rho)).ln();
                assert!((ln_one_minus_pow(nu, rho) - naive).abs() < 1e-12);
            }
        }
        assert_eq!(ln_one_minus_pow(0.5, 0.0), f64::NEG_INFINITY);
        // Tiny exponent where the naive form loses precision entirely.
        assert!(ln_one_minus_pow(0.999_999_999, 1e-6).is_finite());
    }

    #[test]
    fn empty_data_gives_flat_posterior() {
        let posterior = posterior_grid(&OutcomeDataset::default(), 256).unwrap();
        let min = posterior
            .grid_density
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let max = posterior
            .grid_density
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((min - max).abs() < 1e-12, "flat prior should stay flat");
        assert!((posterior.mean() - 0.5).abs() < 1e-9);
        // Density about 1 everywhere (open grid trims a sliver of mass).
        assert!((max - 1.0).abs() < 0.02, "density {max}");
    }

    #[test]
    fn grid_density_normalized() {
        let d = dataset(&[(1.0, true), (2.0, false), (0.5, true)]);
        let posterior = posterior_grid(&d, 1024).unwrap();
        let integral = trapezoid(&posterior.grid_nu, &posterior.grid_density);
        assert!((integral - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bernoulli_mode_recovered() {
        // k infections and k survivals at rho = 1 reduce to Bernoulli(1-nu)
        // with mode at nu = 0.5.
        let mut records = Vec::new();
        for _ in 0..20 {
            records.push((1.0, true));
            records.push((1.0, false));
        }
        let posterior = posterior_grid(&dataset(&records), 1024).unwrap();
        let argmax = posterior
            .grid_nu
            .iter()
            .zip(&posterior.grid_density)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(nu, _)| *nu)
            .unwrap();
        assert!((argmax - 0.5).abs() < 0.01, "mode {argmax}");
    }

    #[test]
    fn grid_size_floor_enforced() {
        assert!(posterior_grid(&OutcomeDataset::default(), 63).is_err());
    }

    #[test]
    fn posterior_update_consistency() {
        // Combining datasets multiplies likelihoods: the combined grid
        // equals the normalized pointwise product.
        let a = dataset(&[(1.0, true), (0.7, false), (2.0, false)]);
        let b = dataset(&[(1.5, true), (0.4, false)]);
        let mut combined_records: Vec<OutcomeRecord> = a.records().to_vec();
        combined_records.extend_from_slice(b.records());
        let combined = OutcomeDataset::new(combined_records).unwrap();

        let grid = 512;
        let pa = posterior_grid(&a, grid).unwrap();
        let pb = posterior_grid(&b, grid).unwrap();
        let pc = posterior_grid(&combined, grid).unwrap();

        let mut product: Vec<f64> = pa
            .grid_density
            .iter()
            .zip(&pb.grid_density)
            .map(|(x, y)| x * y)
            .collect();
        let norm = trapezoid(&pa.grid_nu, &product);
        for d in &mut product {
            *d /= norm;
        }
        for (p, c) in product.iter().zip(&pc.grid_density) {
            let scale = p.abs().max(c.abs()).max(1e-300);
            assert!((p - c).abs() / scale < 1e-9, "product {p} vs combined {c}");
        }
    }

    #[test]
    fn likelihood_invariant_under_rho_rescaling() {
        let d = dataset(&[(1.0, true), (2.0, false), (0.5, true)]);
        let k = 3.0;
        let scaled = dataset(&[(k * 1.0, true), (k * 2.0, false), (k * 0.5, true)]);
        for nu in [0.2, 0.5, 0.8] {
            let original = log_likelihood(nu, &d).unwrap();
            let rescaled = log_likelihood(nu.powf(1.0 / k), &scaled).unwrap();
            assert!(
                (original - rescaled).abs() < 1e-9,
                "{original} vs {rescaled}"
            );
        }
    }

    #[test]
    fn mcmc_is_deterministic_and_diagnosed() {
        let d = dataset(&[(1.0, true), (2.0, false)]);
        let a = posterior_mcmc(&d, 2_000, 400, 0.5, 9).unwrap();
        let b = posterior_mcmc(&d, 2_000, 400, 0.5, 9).unwrap();
        assert_eq!(a.samples, b.samples);
        let diag = a.diagnostics.as_ref().unwrap();
        assert!(diag.acceptance_rate > 0.0 && diag.acceptance_rate < 1.0);
        assert!(diag.ess > 1.0);
    }

    #[test]
    fn mcmc_matches_grid_mean() {
        let data = simulate_outcomes(
            0.3,
            400,
            RhoRange {
                low: 0.5,
                high: 2.0,
            },
            31,
        )
        .unwrap();
        let grid = posterior_grid(&data, 1024).unwrap();
        let mcmc = posterior_mcmc(&data, 10_000, 2_000, 0.5, 17).unwrap();
        assert!(
            (grid.mean() - mcmc.mean()).abs() < 0.02,
            "grid {} vs mcmc {}",
            grid.mean(),
            mcmc.mean()
        );
    }

    #[test]
    fn mcmc_sample_floor_enforced() {
        assert!(posterior_mcmc(&OutcomeDataset::default(), 999, 0, 0.5, 1).is_err());
    }

    #[test]
    fn extreme_step_triggers_tuning_warning() {
        let d = dataset(&[(1.0, true), (2.0, false)]);
        // A gigantic step is almost always rejected.
        let posterior = posterior_mcmc(&d, 2_000, 0, 500.0, 3).unwrap();
        let diag = posterior.diagnostics.unwrap();
        assert!(diag.acceptance_rate < 0.05);
        assert!(diag.tuning_warning.is_some());
    }

    #[test]
    fn simulate_outcomes_edge_cases() {
        let zero = simulate_outcomes(
            0.5,
            100,
            RhoRange {
                low: 0.0,
                high: 0.0,
            },
            1,
        )
        .unwrap();
        assert!(zero
            .records()
            .iter()
            .all(|r| !r.infected && r.rho_total == 0.0));

        // rho = 2, nu = 0.5: infection probability 0.75; binomial oracle.
        let d = simulate_outcomes(
            0.5,
            100_000,
            RhoRange {
                low: 2.0,
                high: 2.0,
            },
            2,
        )
        .unwrap();
        let freq = d.records().iter().filter(|r| r.infected).count() as f64 / d.len() as f64;
        assert!((freq - 0.75).abs() < 0.005, "frequency {freq}");

        // nu near 1 with rho = 1: infection frequency ~ 1 - nu.
        let m = 100_000;
        let d = simulate_outcomes(
            0.9,
            m,
            RhoRange {
                low: 1.0,
                high: 1.0,
            },
            3,
        )
        .unwrap();
        let freq = d.records().iter().filter(|r| r.infected).count() as f64 / m as f64;
        let tol = 3.0 * (0.9f64 * 0.1 / m as f64).sqrt();
        assert!((freq - 0.1).abs() < tol, "frequency {freq}");

        assert!(simulate_outcomes(
            0.5,
            0,
            RhoRange {
                low: 0.0,
                high: 1.0
            },
            1
        )
        .is_err());
        assert!(simulate_outcomes(
            0.5,
            10,
            RhoRange {
                low: 2.0,
                high: 1.0
            },
            1
        )
        .is_err());
        assert!(simulate_outcomes(
            1.5,
            10,
            RhoRange {
                low: 0.0,
                high: 1.0
            },
            1
        )
        .is_err());
    }

    #[test]
    fn quantiles_bracket_the_mean() {
        let data = simulate_outcomes(
            0.4,
            300,
            RhoRange {
                low: 0.5,
                high: 2.0,
            },
            5,
        )
        .unwrap();
        let posterior = posterior_grid(&data, 1024).unwrap();
        let lo = posterior.quantile(0.05);
        let hi = posterior.quantile(0.95);
        let mean = posterior.mean();
        assert!(lo < mean && mean < hi, "{lo} {mean} {hi}");
        assert!(posterior.sd() > 0.0);
    }
}
