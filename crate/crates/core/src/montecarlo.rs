//! Simulation oracles for the outage closed forms and the battery queue.
//!
//! Outage trials run in parallel. Trial `i` draws from its own ChaCha stream
//! (`seed`, stream `i`), so results depend only on the seed and the trial
//! count, never on scheduling, and adding trials leaves earlier ones intact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{QosConfig, RadioEnv, Scenario, SmallCellConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: usize,
    pub seed: u64,
    /// Simulated seconds for the queue oracle; `None` means 10^6 service
    /// times.
    pub horizon: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            horizon: None,
        }
    }
}

impl SimConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            horizon: None,
        }
    }
}

/// Result of an outage simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub trials: usize,
    /// Trials whose sampled rate fell short of the requirement.
    pub failures: usize,
    /// `failures / trials`.
    pub empirical: f64,
    /// Average over trials of the outage probability conditioned on the
    /// sampled user count and distance, with fading integrated out exactly.
    /// Same expectation as `empirical`, much lower variance.
    pub conditional: f64,
    /// Standard error of `conditional`.
    pub std_error: f64,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Shared trial loop. `threshold(k, d)` is the fading level below which the
/// tagged user misses the rate target, given `k` co-served users and
/// distance `d`; `distance` samples `d`.
fn run_outage<D, F>(
    cfg: &SimConfig,
    mean_users: f64,
    distance: D,
    threshold: F,
) -> Result<OutageEstimate>
where
    D: Fn(&mut ChaCha8Rng) -> f64 + Sync,
    F: Fn(u64, f64) -> f64 + Sync,
{
    if cfg.trials == 0 {
        return Err(domain("trials", 0.0, "must be at least 1"));
    }
    let poisson = if mean_users > 0.0 {
        Some(
            Poisson::new(mean_users)
                .map_err(|_| domain("mean_users", mean_users, "invalid Poisson mean"))?,
        )
    } else {
        None
    };
    let samples: Vec<(bool, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i);
            let k = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
            let d = distance(&mut rng);
            let h: f64 = Exp1.sample(&mut rng);
            let x = threshold(k, d);
            (h < x, -(-x).exp_m1())
        })
        .collect();

    let n = cfg.trials as f64;
    let failures = samples.iter().filter(|s| s.0).count();
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let var = if cfg.trials > 1 {
        samples.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(OutageEstimate {
        trials: cfg.trials,
        failures,
        empirical: failures as f64 / n,
        conditional: mean,
        std_error: (var / n).sqrt(),
    })
}

fn check_share(w: f64, phi: f64) -> Result<()> {
    if !(w > 0.0) {
        return Err(domain("bandwidth", w, "must be positive"));
    }
    if !(0.0..=1.0).contains(&phi) {
        return Err(domain("phi", phi, "must lie in [0, 1]"));
    }
    Ok(())
}

/// Fading level that makes `w/(k+1)·log2(1 + h·snr) = rate`.
fn fading_threshold(rate: f64, w: f64, k: u64, noise_over_signal: f64) -> f64 {
    let users = (k + 1) as f64;
    noise_over_signal * ((rate * users / w) * std::f64::consts::LN_2).exp_m1()
}

/// Outage of a small-cell user: the tagged user sits uniformly in the disc,
/// `K ~ Poisson(πD²φρ)` other users share `w_ss`, fading is unit-mean
/// exponential.
pub fn simulate_outage_ssu(
    cell: &SmallCellConfig<f64>,
    env: &RadioEnv<f64>,
    qos: &QosConfig<f64>,
    w_ss: f64,
    phi: f64,
    cfg: &SimConfig,
) -> Result<OutageEstimate> {
    check_share(w_ss, phi)?;
    let noise = (env.theta_s + 1.0) * env.noise_density * cell.power.bandwidth;
    let p_tx = cell.power.p_tx;
    let radius = cell.radius;
    let alpha = env.alpha_s;
    run_outage(
        cfg,
        phi * cell.mean_users(),
        |rng| radius * rng.random::<f64>().sqrt(),
        |k, d| fading_threshold(qos.rate_req, w_ss, k, noise * d.powf(alpha) / p_tx),
    )
}

/// Outage of a macro-served user of `cell`, placed at the small-cell station,
/// sharing `w_ms` with `K ~ Poisson((1−φ)πD²ρ)` others.
pub fn simulate_outage_msu(
    cell: &SmallCellConfig<f64>,
    scenario: &Scenario<f64>,
    w_ms: f64,
    phi: f64,
    cfg: &SimConfig,
) -> Result<OutageEstimate> {
    check_share(w_ms, phi)?;
    let env = &scenario.env;
    let mbs = &scenario.macro_cell.power;
    let noise = (env.theta_m + 1.0) * env.noise_density * mbs.bandwidth;
    let d = cell.dist_to_mbs;
    let ratio = noise * d.powf(env.alpha_m) / mbs.p_tx;
    let rate = scenario.qos.rate_req;
    run_outage(
        cfg,
        (1.0 - phi) * cell.mean_users(),
        |_| d,
        |k, _| fading_threshold(rate, w_ms, k, ratio),
    )
}

/// Time-averaged statistics of a simulated battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSimResult {
    /// Fraction of observed time spent at each battery level.
    pub q: Vec<f64>,
    pub empty_fraction: f64,
    /// Battery-runs-dry events per second.
    pub shutdown_rate: f64,
    /// Seconds observed after warm-up.
    pub observed: f64,
}

/// Event-driven M/D/1 battery: Poisson arrivals at `lambda_e`, one unit
/// drained every `1/mu_e` seconds while non-empty. The first 10% of the
/// horizon is discarded as warm-up.
pub fn simulate_energy_queue(lambda_e: f64, mu_e: f64, cfg: &SimConfig) -> Result<QueueSimResult> {
    if !(mu_e > 0.0 && mu_e.is_finite()) {
        return Err(domain("mu_e", mu_e, "must be positive"));
    }
    if !(lambda_e >= 0.0 && lambda_e.is_finite()) {
        return Err(domain("lambda_e", lambda_e, "must be non-negative"));
    }
    let horizon = cfg.horizon.unwrap_or(1e6 / mu_e);
    if !(horizon > 0.0) {
        return Err(domain("horizon", horizon, "must be positive"));
    }
    let warmup = 0.1 * horizon;
    let service = 1.0 / mu_e;
    let mut rng = trial_rng(cfg.seed, 0);
    let next_gap = |rng: &mut ChaCha8Rng| -> f64 {
        if lambda_e > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / lambda_e
        } else {
            f64::INFINITY
        }
    };

    let mut time_at = vec![0.0f64];
    let mut level = 0usize;
    let mut t = 0.0f64;
    let mut next_arrival = next_gap(&mut rng);
    let mut next_departure = f64::INFINITY;
    let mut shutdowns = 0u64;

    loop {
        let event = next_arrival.min(next_departure);
        let end = event.min(horizon);
        if end > warmup {
            time_at[level] += end - t.max(warmup);
        }
        if event > horizon {
            break;
        }
        t = event;
        if next_arrival <= next_departure {
            level += 1;
            if level == time_at.len() {
                time_at.push(0.0);
            }
            if level == 1 {
                next_departure = t + service;
            }
            next_arrival = t + next_gap(&mut rng);
        } else {
            level -= 1;
            if level == 0 {
                next_departure = f64::INFINITY;
                if t >= warmup {
                    shutdowns += 1;
                }
            } else {
                next_departure = t + service;
            }
        }
    }

    let observed = horizon - warmup;
    let q: Vec<f64> = time_at.iter().map(|x| x / observed).collect();
    Ok(QueueSimResult {
        empty_fraction: q[0],
        q,
        shutdown_rate: shutdowns as f64 / observed,
        observed,
    })
}
