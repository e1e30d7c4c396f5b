//! Battery analysis. Harvested energy arrives as a Poisson stream of units
//! and the station drains one unit every `1/μ_E` seconds while the battery is
//! non-empty, so the battery level is an M/D/1 queue.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_L_MAX: usize = 100_000;

/// Stationary battery-level distribution. For M/D/1 the distribution seen
/// at departures equals the time-average one, so `q[l]` is also the long-run
/// fraction of time with `l` units stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueStationary<T> {
    /// Utilization `λ_E/μ_E`.
    pub rho: T,
    pub q: Vec<T>,
    pub q0: T,
    pub q1: T,
}

impl<T: Real> QueueStationary<T> {
    /// Probability mass lost to truncation.
    pub fn tail_mass(&self) -> T {
        T::one() - self.q.iter().copied().sum::<T>()
    }

    pub fn mean_level(&self) -> T {
        self.q
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (l, p)| acc + T::lit(l as f64) * *p)
    }
}

/// Probability of `i` arrivals during one service time: Poisson pmf with
/// mean `rho`.
pub fn arrival_probability<T: Real>(i: usize, rho: T) -> Result<T> {
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(domain("rho", rho.as_f64(), "must be positive and finite"));
    }
    // Work in log space so large i does not overflow the factorial.
    let mut log_fact = T::zero();
    for k in 2..=i {
        log_fact = log_fact + T::lit(k as f64).ln();
    }
    Ok((T::lit(i as f64) * rho.ln() - rho - log_fact).exp())
}

/// Solves the embedded chain for the stationary distribution.
///
/// Uses the level-crossing form of the balance equations,
/// `q[j+1]·a_0 = q[0]·Ā_j + Σ_{i=1..j} q[i]·Ā_{j-i+1}` with `Ā_k = P(A > k)`,
/// which only adds positive terms and therefore stays accurate deep into the
/// tail. Levels are added until the remaining mass drops below `tol`.
pub fn stationary_distribution<T: Real>(
    lambda_e: T,
    mu_e: T,
    l_max: usize,
    tol: T,
) -> Result<QueueStationary<T>> {
    if !(mu_e > T::zero()) {
        return Err(domain("mu_e", mu_e.as_f64(), "must be positive"));
    }
    if !(lambda_e >= T::zero()) {
        return Err(domain(
            "lambda_e",
            lambda_e.as_f64(),
            "must be non-negative",
        ));
    }
    let rho = lambda_e / mu_e;
    if rho >= T::one() {
        return Err(Error::UnstableQueue { rho: rho.as_f64() });
    }
    if rho == T::zero() {
        return Ok(QueueStationary {
            rho,
            q: vec![T::one()],
            q0: T::one(),
            q1: T::zero(),
        });
    }

    let tails = arrival_tails(rho, l_max + 1);
    let a0 = (-rho).exp();
    let q0 = T::one() - rho;
    let mut q = vec![q0];
    let mut mass = q0;
    while T::one() - mass >= tol {
        let j = q.len() - 1;
        if j >= l_max {
            return Err(Error::Truncation {
                l_max,
                tol: tol.as_f64(),
            });
        }
        let mut acc = q0 * tails[j];
        for i in 1..=j {
            acc = acc + q[i] * tails[j - i + 1];
        }
        let next = acc / a0;
        mass = mass + next;
        q.push(next);
    }
    let q1 = q.get(1).copied().unwrap_or_else(T::zero);
    Ok(QueueStationary { rho, q, q0, q1 })
}

/// [`stationary_distribution`] with the default truncation settings.
pub fn stationary_default<T: Real>(lambda_e: T, mu_e: T) -> Result<QueueStationary<T>> {
    stationary_distribution(lambda_e, mu_e, DEFAULT_L_MAX, T::lit(DEFAULT_TOL))
}

/// `Ā_k = P(A > k)` for `k = 0..len`, summed from the far tail inwards.
fn arrival_tails<T: Real>(rho: T, len: usize) -> Vec<T> {
    // Beyond `len + 60` terms the pmf is far below f64 resolution for rho < 1.
    let n = len + 60;
    let mut pmf = Vec::with_capacity(n + 1);
    let mut p = (-rho).exp();
    pmf.push(p);
    for i in 1..=n {
        p = p * rho / T::lit(i as f64);
        pmf.push(p);
    }
    let mut tails = vec![T::zero(); len + 1];
    let mut acc = T::zero();
    for k in (0..=n).rev() {
        if k <= len {
            tails[k] = acc;
        }
        acc = acc + pmf[k];
    }
    tails
}

/// Long-run probability that the battery is empty, `max(0, 1 − λ/μ)`.
pub fn empty_probability<T: Real>(lambda_e: T, mu_e: T) -> T {
    if !(mu_e > T::zero()) {
        return T::one();
    }
    (T::one() - lambda_e / mu_e).max(T::zero())
}

/// Handover power of a renewable-only cell,
/// `2·(1 − ρ)(1 − e^{−ρ})·μ_E·C_HO` while the battery can run dry and zero
/// once harvesting keeps up with consumption.
pub fn handover_power<T: Real>(lambda_e: T, mu_e: T, c_ho: T, active: bool) -> T {
    if !active || !(mu_e > T::zero()) || lambda_e >= mu_e {
        return T::zero();
    }
    let x = lambda_e / mu_e;
    T::two() * (T::one() - x) * (-(-x).exp_m1()) * mu_e * c_ho
}
