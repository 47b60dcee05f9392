//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use riskscore::config::EngineConfig;
use riskscore::distributions::gaussian_fit_report;
use riskscore::inference::{
    posterior_grid, posterior_mcmc, OutcomeDataset, OutcomeRecord, RhoRange,
};
use riskscore::notifier::{NegativeTestEvent, Outcome};
use riskscore::risk::{ContactEvent, SourceReport};
use riskscore::store::EventStore;

use crate::ioutil::{companion, read_jsonl, write_atomic};
use crate::{CommandFailure, CommandOutcome, EXIT_CONFIG, EXIT_DATA, EXIT_MODEL};

/// Scores every recipient named in the inputs and writes the CSV plus a
/// per-source breakdown. Input problems are collected line by line; any
/// problem fails the run with all of them reported.
pub fn score(
    config: &EngineConfig,
    events_path: &Path,
    reports_path: &Path,
    out_path: &Path,
    store_path: Option<&Path>,
) -> Result<CommandOutcome, CommandFailure> {
    let params = &config.risk;
    let mut problems = Vec::new();

    let mut reports: Vec<SourceReport> = read_jsonl(reports_path, &mut problems)?;
    let events: Vec<ContactEvent> = read_jsonl(events_path, &mut problems)?;

    // Attach events to their reports; orphans are named individually.
    let mut by_source: BTreeMap<&str, usize> = BTreeMap::new();
    for (idx, report) in reports.iter().enumerate() {
        if by_source.insert(report.source_id.as_str(), idx).is_some() {
            problems.push(format!(
                "{}: duplicate report for source {}",
                reports_path.display(),
                report.source_id
            ));
        }
    }
    let mut grouped: BTreeMap<usize, Vec<ContactEvent>> = BTreeMap::new();
    for event in events {
        match by_source.get(event.source_id.as_str()) {
            Some(&idx) => grouped.entry(idx).or_default().push(event),
            None => problems.push(format!(
                "{}: event at {} has no report for source_id {}",
                events_path.display(),
                event.start_time,
                event.source_id
            )),
        }
    }
    for (idx, events) in grouped {
        reports[idx].events = events;
    }
    for report in &reports {
        if let Err(riskscore::Error::Validation { problems: more }) = report.validate() {
            problems.extend(more);
        }
    }
    if !problems.is_empty() {
        return Err(CommandFailure::data(problems));
    }

    let ledgers = riskscore::risk::score_all(&reports, params)?;

    let mut csv = String::from("recipient_id,total_risk,notify\n");
    let mut breakdown = String::new();
    let mut notified = 0usize;
    for (recipient, ledger) in &ledgers {
        let notify = riskscore::notifier::should_notify(ledger, params);
        notified += usize::from(notify);
        writeln!(csv, "{recipient},{},{notify}", ledger.total).expect("string write");
        let per_source: BTreeMap<&str, f64> = ledger
            .per_source
            .iter()
            .map(|(s, c)| (s.as_str(), c.risk))
            .collect();
        let line = serde_json::json!({
            "recipient_id": recipient,
            "total_risk": ledger.total,
            "notify": notify,
            "per_source": per_source,
        });
        breakdown.push_str(&line.to_string());
        breakdown.push('\n');
    }
    write_atomic(out_path, &csv)?;
    let breakdown_path = companion(out_path, "breakdown.jsonl");
    write_atomic(&breakdown_path, &breakdown)?;
    let mut artifacts = vec![out_path.to_path_buf(), breakdown_path];

    if let Some(store_path) = store_path {
        let mut store = EventStore::new();
        for report in reports {
            store.ingest_report(report, params)?;
        }
        write_atomic(store_path, &store.journal_to_jsonl()?)?;
        artifacts.push(store_path.to_path_buf());
    }

    Ok(CommandOutcome::success(
        format!("scored {} recipients ({notified} notified)", ledgers.len()),
        artifacts,
    ))
}

/// Applies a negative test to a stored journal. Re-running the exact same
/// operation is a replay: the outcome report is recomputed as of the
/// operation's first application, and the journal still gains its
/// (idempotent) entry.
pub fn decascade(
    config: &EngineConfig,
    store_path: &Path,
    source: &str,
    test_time: i64,
    out_path: &Path,
) -> Result<CommandOutcome, CommandFailure> {
    let params = &config.risk;
    let negative = NegativeTestEvent {
        source_id: source.to_string(),
        test_time,
    };

    let entries = riskscore::store::read_journal(store_path)?;
    let op = riskscore::store::JournalOp::Decascade(negative.clone());
    let without_op: Vec<_> = entries.iter().filter(|e| e.op != op).cloned().collect();
    let mut store = EventStore::replay(&without_op, params)?;
    let records = store.decascade(negative, params)?;

    let mut out = String::new();
    for record in &records {
        out.push_str(&serde_json::to_string(record).expect("record serialization"));
        out.push('\n');
    }
    write_atomic(out_path, &out)?;

    // Persist the original journal plus the new entry, preserving any
    // historical duplicates of this operation.
    let mut journal_text = String::new();
    for entry in entries.iter().chain(store.journal().last()) {
        journal_text.push_str(&serde_json::to_string(entry).expect("journal serialization"));
        journal_text.push('\n');
    }
    write_atomic(store_path, &journal_text)?;

    let released = records
        .iter()
        .filter(|r| r.outcome == Outcome::Released)
        .count();
    let still = records
        .iter()
        .filter(|r| r.outcome == Outcome::StillNotified)
        .count();
    Ok(CommandOutcome::success(
        format!(
            "decascade of {source} at {test_time}: {} affected, {released} released, {still} still notified",
            records.len()
        ),
        vec![out_path.to_path_buf(), store_path.to_path_buf()],
    ))
}

/// Samples the generation-minus-incubation difference, writes the
/// histogram against the Gaussian, and checks the fit.
pub fn validate_infectiousness(
    config: &EngineConfig,
    out_path: &Path,
    n: Option<usize>,
    seed: Option<u64>,
    bins: usize,
    ks_bound: f64,
) -> Result<CommandOutcome, CommandFailure> {
    let n = n.unwrap_or(config.prob.mc_samples);
    let seed = seed.unwrap_or(config.prob.seed);
    if bins == 0 {
        return Err(CommandFailure::new(EXIT_CONFIG, "bins must be positive"));
    }
    let mut warning = String::new();
    if n < 10_000 {
        warning = format!(" (warning: sample size {n} below the recommended 10000)");
        eprintln!("warning: sample size {n} is below the recommended 10000");
    }

    let samples = config.epi.sample_difference(n, seed)?;
    let (mu0, sigma0) = (config.risk.mu0, config.risk.sigma0);
    let report = gaussian_fit_report(&samples, mu0, sigma0)?;

    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &samples {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let gaussian_pdf = |x: f64| {
        let z = (x - mu0) / sigma0;
        (-0.5 * z * z).exp() / (sigma0 * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut csv = String::from("bin_left,bin_right,empirical_density,gaussian_density\n");
    for (k, count) in counts.iter().enumerate() {
        let left = lo + k as f64 * width;
        let right = left + width;
        let empirical = *count as f64 / (n as f64 * width);
        let gaussian = gaussian_pdf(0.5 * (left + right));
        writeln!(csv, "{left},{right},{empirical},{gaussian}").expect("string write");
    }
    write_atomic(out_path, &csv)?;

    let fit_path = companion(out_path, "fit.json");
    let fit = serde_json::json!({
        "n": n,
        "seed": seed,
        "mu0": mu0,
        "sigma0": sigma0,
        "ks_statistic": report.ks_statistic,
        "mean": report.sample_mean,
        "sd": report.sample_sd,
        "skewness": report.skewness,
    });
    write_atomic(&fit_path, &format!("{fit:#}\n"))?;

    let summary = format!(
        "n={n} ks={:.5} mean={:.4} sd={:.4} skewness={:.4}{warning}",
        report.ks_statistic, report.sample_mean, report.sample_sd, report.skewness
    );
    let artifacts = vec![out_path.to_path_buf(), fit_path];
    if report.ks_statistic >= ks_bound {
        eprintln!(
            "error: KS statistic {:.5} reaches the bound {ks_bound}; the Gaussian approximation failed",
            report.ks_statistic
        );
        return Ok(CommandOutcome {
            exit_code: EXIT_MODEL,
            summary,
            artifacts,
        });
    }
    Ok(CommandOutcome::success(summary, artifacts))
}

/// Emits `P(infected | no symptoms by t)` against time since the contact
/// event for each requested initial probability, in long CSV form.
pub fn decay_curve(
    config: &EngineConfig,
    out_path: &Path,
    probs: &str,
) -> Result<CommandOutcome, CommandFailure> {
    let mut initial = Vec::new();
    for part in probs.split(',') {
        let part = part.trim();
        let p: f64 = part
            .parse()
            .map_err(|_| CommandFailure::new(EXIT_CONFIG, format!("bad probability `{part}`")))?;
        if !(p > 0.0 && p < 1.0) {
            return Err(CommandFailure::new(
                EXIT_CONFIG,
                format!("initial probability must be in (0, 1), got {p}"),
            ));
        }
        initial.push(p);
    }

    let cdf = config.epi.build_sum_cdf(
        config.prob.mc_samples,
        config.prob.grid_step,
        config.prob.seed,
    )?;
    let mut csv =
        String::from("time_from_event_days,infection_prob_initial,conditional_probability\n");
    for (&t, &g) in cdf.grid_times().iter().zip(cdf.grid_values()) {
        for &p in &initial {
            writeln!(csv, "{t},{p},{}", riskscore::prob::single_event_decay(p, g))
                .expect("string write");
        }
    }
    write_atomic(out_path, &csv)?;
    Ok(CommandOutcome::success(
        format!(
            "decay curves for {} initial probabilities over {} days",
            initial.len(),
            cdf.horizon_days()
        ),
        vec![out_path.to_path_buf()],
    ))
}

/// Parses `start:stop:step` (or a single value) into a grid.
fn parse_grid(spec: &str, what: &str) -> Result<Vec<f64>, CommandFailure> {
    let bad = |msg: String| CommandFailure::new(EXIT_CONFIG, msg);
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| -> Result<f64, CommandFailure> {
        s.trim()
            .parse()
            .map_err(|_| bad(format!("{what}: `{s}` is not a number in spec `{spec}`")))
    };
    match parts.as_slice() {
        [single] => Ok(vec![parse(single)?]),
        [start, stop, step] => {
            let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
            if step.is_nan() || step <= 0.0 {
                return Err(bad(format!("{what}: step must be positive in `{spec}`")));
            }
            if stop < start {
                return Err(bad(format!("{what}: stop below start in `{spec}`")));
            }
            let mut values = Vec::new();
            let mut k = 0usize;
            loop {
                let v = start + k as f64 * step;
                if v > stop + 1e-9 {
                    break;
                }
                values.push(v);
                k += 1;
            }
            Ok(values)
        }
        _ => Err(bad(format!(
            "{what}: expected `value` or `start:stop:step`, got `{spec}`"
        ))),
    }
}

/// Emits the single-event risk score over the cross product of the three
/// grids, with the source weight and context factor at 1.
pub fn risk_surface(
    config: &EngineConfig,
    out_path: &Path,
    distance_spec: &str,
    onset_spec: &str,
    duration_spec: &str,
) -> Result<CommandOutcome, CommandFailure> {
    let params = &config.risk;
    let distances = parse_grid(distance_spec, "distance")?;
    let offsets = parse_grid(onset_spec, "time_from_onset")?;
    let durations = parse_grid(duration_spec, "duration")?;
    if distances.iter().any(|&d| d <= 0.0) {
        return Err(CommandFailure::new(
            EXIT_CONFIG,
            "distance grid must be positive",
        ));
    }
    if durations.iter().any(|&d| d <= 0.0) {
        return Err(CommandFailure::new(
            EXIT_CONFIG,
            "duration grid must be positive",
        ));
    }

    let mut csv = String::from("distance,time_from_onset_days,duration_min,risk_score\n");
    for &distance in &distances {
        let d_factor =
            riskscore::risk::distance_factor(distance, params).map_err(CommandFailure::from)?;
        for &offset in &offsets {
            let weight = riskscore::risk::infectiousness_weight(offset, params);
            for &duration in &durations {
                writeln!(
                    csv,
                    "{distance},{offset},{duration},{}",
                    d_factor * weight * duration
                )
                .expect("string write");
            }
        }
    }
    write_atomic(out_path, &csv)?;
    let points = distances.len() * offsets.len() * durations.len();
    Ok(CommandOutcome::success(
        format!("risk surface with {points} points"),
        vec![out_path.to_path_buf()],
    ))
}

fn read_outcomes(path: &Path) -> Result<OutcomeDataset, CommandFailure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CommandFailure::new(EXIT_DATA, format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CommandFailure::new(EXIT_DATA, format!("{}: {e}", path.display())))?
        .clone();
    let rho_idx = headers.iter().position(|h| h == "rho_total");
    let infected_idx = headers.iter().position(|h| h == "infected");
    let (Some(rho_idx), Some(infected_idx)) = (rho_idx, infected_idx) else {
        return Err(CommandFailure::new(
            EXIT_DATA,
            format!(
                "{}: header must contain rho_total and infected",
                path.display()
            ),
        ));
    };

    let mut problems = Vec::new();
    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let line = row + 2; // header occupies line 1
        let record = match result {
            Ok(record) => record,
            Err(e) => {
                problems.push(format!("{}:{line}: {e}", path.display()));
                continue;
            }
        };
        let rho_total = match record.get(rho_idx).unwrap_or("").parse::<f64>() {
            Ok(v) => v,
            Err(_) => {
                problems.push(format!(
                    "{}:{line}: rho_total `{}` is not a number",
                    path.display(),
                    record.get(rho_idx).unwrap_or("")
                ));
                continue;
            }
        };
        let infected = match record.get(infected_idx).unwrap_or("") {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                problems.push(format!(
                    "{}:{line}: infected `{other}` must be 0/1",
                    path.display()
                ));
                continue;
            }
        };
        records.push(OutcomeRecord {
            rho_total,
            infected,
        });
    }
    if !problems.is_empty() {
        return Err(CommandFailure::data(problems));
    }
    OutcomeDataset::new(records).map_err(|e| match e {
        riskscore::Error::ImpossibleRecord { index } => CommandFailure::new(
            EXIT_DATA,
            format!(
                "{}:{}: infected outcome with rho_total = 0 is impossible under the model",
                path.display(),
                index + 2
            ),
        ),
        other => CommandFailure::from(other),
    })
}

/// Fits the posterior of nu by grid integration or Metropolis MCMC and
/// writes the density grid, diagnostics, and (for MCMC) the raw samples.
#[allow(clippy::too_many_arguments)]
pub fn fit_nu(
    config: &EngineConfig,
    outcomes_path: &Path,
    method: &str,
    out_path: &Path,
    seed: Option<u64>,
    grid_size: usize,
    samples: usize,
    burn_in: Option<usize>,
    step: f64,
) -> Result<CommandOutcome, CommandFailure> {
    let data = read_outcomes(outcomes_path)?;
    let seed = seed.unwrap_or(config.prob.seed);
    let burn_in = burn_in.unwrap_or(samples / 5);

    let posterior = match method {
        "grid" => posterior_grid(&data, grid_size)?,
        "mcmc" => posterior_mcmc(&data, samples, burn_in, step, seed)?,
        other => {
            return Err(CommandFailure::new(
                EXIT_CONFIG,
                format!("unknown method `{other}`"),
            ))
        }
    };

    let mut csv = String::from("nu,density\n");
    for (nu, density) in posterior.grid_nu.iter().zip(&posterior.grid_density) {
        // Tail densities underflow far below 1e-100; scientific notation
        // keeps the column readable.
        writeln!(csv, "{nu},{density:e}").expect("string write");
    }
    write_atomic(out_path, &csv)?;
    let mut artifacts = vec![out_path.to_path_buf()];

    if let Some(chain) = &posterior.samples {
        let mut samples_csv = String::from("nu\n");
        for s in chain {
            writeln!(samples_csv, "{s}").expect("string write");
        }
        let samples_path = companion(out_path, "samples.csv");
        write_atomic(&samples_path, &samples_csv)?;
        artifacts.push(samples_path);
    }

    let (mean, sd) = (posterior.mean(), posterior.sd());
    let (lo, hi) = (posterior.quantile(0.05), posterior.quantile(0.95));
    let mut diagnostics = serde_json::json!({
        "method": method,
        "records": data.len(),
        "mean": mean,
        "sd": sd,
        "ci90": [lo, hi],
    });
    if method == "mcmc" {
        diagnostics["seed"] = seed.into();
        if let Some(diag) = &posterior.diagnostics {
            diagnostics["acceptance_rate"] = diag.acceptance_rate.into();
            diagnostics["ess"] = diag.ess.into();
            if let Some(warning) = &diag.tuning_warning {
                diagnostics["tuning_warning"] = warning.clone().into();
                eprintln!("warning: {warning}");
            }
        }
    }
    let diagnostics_path = companion(out_path, "diagnostics.json");
    write_atomic(&diagnostics_path, &format!("{diagnostics:#}\n"))?;
    artifacts.push(diagnostics_path);

    Ok(CommandOutcome::success(
        format!("posterior mean={mean:.4} sd={sd:.4} 90% CI [{lo:.4}, {hi:.4}] ({method})"),
        artifacts,
    ))
}

/// Writes a synthetic outcome dataset.
pub fn simulate_outcomes(
    config: &EngineConfig,
    true_nu: f64,
    m: usize,
    rho_low: f64,
    rho_high: f64,
    seed: Option<u64>,
    out_path: &Path,
) -> Result<CommandOutcome, CommandFailure> {
    let seed = seed.unwrap_or(config.prob.seed);
    let data = riskscore::inference::simulate_outcomes(
        true_nu,
        m,
        RhoRange {
            low: rho_low,
            high: rho_high,
        },
        seed,
    )?;
    let mut csv = String::from("rho_total,infected\n");
    let mut infected = 0usize;
    for record in data.records() {
        infected += usize::from(record.infected);
        writeln!(csv, "{},{}", record.rho_total, u8::from(record.infected)).expect("string write");
    }
    write_atomic(out_path, &csv)?;
    Ok(CommandOutcome::success(
        format!("simulated {m} outcomes at nu={true_nu} ({infected} infected)"),
        vec![out_path.to_path_buf()],
    ))
}
