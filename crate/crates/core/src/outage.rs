//! Closed-form outage probabilities and the bandwidth demands they induce.
//!
//! Users are scattered as a Poisson point process, fading is Rayleigh and a
//! station splits its utilized bandwidth evenly between the users it serves.
//! The closed forms hold in the high-SINR, large-bandwidth regime; outside it
//! they can leave `[0, 1]` and are clamped and flagged.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{QosConfig, RadioEnv, Scenario, SmallCellConfig};
use crate::scalar::Real;

/// Edge-user spectral efficiencies for one small cell (bit/s/Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEfficiencies<T> {
    /// Users served by the small cell.
    pub tau_ss: T,
    /// Users outside every small cell, served by the macro station.
    pub tau_mm: T,
    /// Users inside this small cell but served by the macro station.
    pub tau_ms: T,
}

/// A closed-form outage value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedOutage<T> {
    /// Probability clamped to `[0, 1]`.
    pub probability: T,
    /// The raw expression fell outside `[0, 1]`, so the asymptotic regime
    /// does not apply.
    pub regime_violation: bool,
}

impl<T: Real> ClosedOutage<T> {
    fn from_raw(raw: T) -> Self {
        let regime_violation = !(raw >= T::zero() && raw <= T::one());
        let probability = if raw.is_nan() {
            T::one()
        } else {
            raw.max(T::zero()).min(T::one())
        };
        Self {
            probability,
            regime_violation,
        }
    }
}

fn check_share<T: Real>(w: T, phi: T) -> Result<()> {
    if !(w > T::zero()) {
        return Err(domain("bandwidth", w.as_f64(), "must be positive"));
    }
    if !(phi >= T::zero() && phi <= T::one()) {
        return Err(domain("phi", phi.as_f64(), "must lie in [0, 1]"));
    }
    Ok(())
}

/// Outage scale of a small cell: `2·D^α(θ+1)σ²W_s / ((α+2)P_T)`.
pub fn ssu_outage_scale<T: Real>(cell: &SmallCellConfig<T>, env: &RadioEnv<T>) -> T {
    let a = env.alpha_s;
    T::two()
        * cell.radius.powf(a)
        * (env.theta_s + T::one())
        * env.noise_density
        * cell.power.bandwidth
        / ((a + T::two()) * cell.power.p_tx)
}

/// Outage scale of macro-served users at distance `d`:
/// `σ²W_m(θ_m+1)d^α_m / P_Tm`.
pub fn msu_outage_scale<T: Real>(scenario: &Scenario<T>, d: T) -> T {
    let p = &scenario.macro_cell.power;
    let env = &scenario.env;
    env.noise_density * p.bandwidth * (env.theta_m + T::one()) * d.powf(env.alpha_m) / p.p_tx
}

/// Outage probability of a user served by the small cell with `w_ss` Hz
/// shared among `1 + πD²φρ` users on average.
pub fn outage_ssu_closed<T: Real>(
    cell: &SmallCellConfig<T>,
    env: &RadioEnv<T>,
    qos: &QosConfig<T>,
    w_ss: T,
    phi: T,
) -> Result<ClosedOutage<T>> {
    check_share(w_ss, phi)?;
    let users = T::one() + phi * cell.mean_users();
    let exponent = qos.rate_req / w_ss * users;
    let raw = ssu_outage_scale(cell, env) * (exponent * T::LN_2()).exp_m1();
    Ok(ClosedOutage::from_raw(raw))
}

/// Outage probability of the macro-served users of `cell` sharing `w_ms` Hz,
/// all placed at the small-cell station.
pub fn outage_msu_closed<T: Real>(
    cell: &SmallCellConfig<T>,
    scenario: &Scenario<T>,
    w_ms: T,
    phi: T,
) -> Result<ClosedOutage<T>> {
    check_share(w_ms, phi)?;
    if !(cell.dist_to_mbs > T::zero()) {
        return Err(domain(
            "dist_to_mbs",
            cell.dist_to_mbs.as_f64(),
            "must be positive",
        ));
    }
    let users = T::one() + (T::one() - phi) * cell.mean_users();
    let exponent = scenario.qos.rate_req / w_ms * users;
    let raw = msu_outage_scale(scenario, cell.dist_to_mbs) * (exponent * T::LN_2()).exp_m1();
    Ok(ClosedOutage::from_raw(raw))
}

/// Spectral efficiency of the small cell's edge users.
pub fn tau_ss<T: Real>(cell: &SmallCellConfig<T>, env: &RadioEnv<T>, qos: &QosConfig<T>) -> T {
    (T::one() + qos.eta / ssu_outage_scale(cell, env)).log2()
}

/// Density of macro users once the small-cell areas are carved out:
/// `ρ_0(D_0² − ΣD_n²)/D_0²`.
pub fn mmu_effective_density<T: Real>(scenario: &Scenario<T>) -> T {
    let d0sq = scenario.macro_cell.radius * scenario.macro_cell.radius;
    let carved = scenario
        .cells
        .iter()
        .fold(T::zero(), |acc, c| acc + c.radius * c.radius);
    scenario.rho0 * (d0sq - carved) / d0sq
}

/// Spectral efficiency of macro users at the macro cell edge.
pub fn tau_mm<T: Real>(scenario: &Scenario<T>) -> T {
    let m = &scenario.macro_cell;
    let env = &scenario.env;
    let a = env.alpha_m;
    let snr = m.power.p_tx / (env.theta_m + T::one()) * (a + T::two())
        / (T::two() * env.noise_density * m.power.bandwidth)
        * scenario.qos.eta
        / m.radius.powf(a);
    (T::one() + snr).log2()
}

/// Spectral efficiency of the macro-served users of `cell`.
pub fn tau_ms<T: Real>(cell: &SmallCellConfig<T>, scenario: &Scenario<T>) -> Result<T> {
    if !(cell.dist_to_mbs > T::zero()) {
        return Err(domain(
            "dist_to_mbs",
            cell.dist_to_mbs.as_f64(),
            "must be positive (co-located stations are outside the model)",
        ));
    }
    Ok((T::one() + scenario.qos.eta / msu_outage_scale(scenario, cell.dist_to_mbs)).log2())
}

pub fn spectral_efficiencies<T: Real>(
    scenario: &Scenario<T>,
    index: usize,
) -> Result<SpectralEfficiencies<T>> {
    let cell = &scenario.cells[index];
    Ok(SpectralEfficiencies {
        tau_ss: tau_ss(cell, &scenario.env, &scenario.qos),
        tau_mm: tau_mm(scenario),
        tau_ms: tau_ms(cell, scenario)?,
    })
}

/// Macro bandwidth needed by users outside the small cells.
pub fn w_mm_required<T: Real>(scenario: &Scenario<T>) -> T {
    let d0 = scenario.macro_cell.radius;
    let users = T::one() + T::PI() * d0 * d0 * mmu_effective_density(scenario);
    scenario.qos.rate_req / tau_mm(scenario) * users
}

/// Bandwidth demands of one small cell at offload ratio `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellBandwidths<T> {
    /// Macro bandwidth for the cell's users while the cell is up.
    pub w_ms_active: T,
    /// Macro bandwidth for all of the cell's users while it is down.
    pub w_ms_off: T,
    /// Minimum utilized bandwidth at the small cell.
    pub w_ss_min: T,
}

impl<T: Real> CellBandwidths<T> {
    /// Macro bandwidth released by switching the cell on.
    pub fn relief(&self) -> T {
        self.w_ms_off - self.w_ms_active
    }
}

pub fn cell_bandwidths<T: Real>(
    cell: &SmallCellConfig<T>,
    qos: &QosConfig<T>,
    taus: &SpectralEfficiencies<T>,
    phi: T,
) -> CellBandwidths<T> {
    let n = cell.mean_users();
    let per_ms = qos.rate_req / taus.tau_ms;
    CellBandwidths {
        w_ms_active: per_ms * (T::one() + (T::one() - phi) * n),
        w_ms_off: per_ms * (T::one() + n),
        w_ss_min: qos.rate_req / taus.tau_ss * (T::one() + phi * n),
    }
}

/// All bandwidth demands of a scenario for the given offload ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequiredBandwidths<T> {
    pub w_mm: T,
    pub cells: Vec<CellBandwidths<T>>,
}

pub fn required_bandwidths<T: Real>(
    scenario: &Scenario<T>,
    phi: &[T],
) -> Result<RequiredBandwidths<T>> {
    if phi.len() != scenario.cells.len() {
        return Err(domain(
            "phi",
            phi.len() as f64,
            "needs one offload ratio per cell",
        ));
    }
    let mut cells = Vec::with_capacity(phi.len());
    for (i, &p) in phi.iter().enumerate() {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(domain("phi", p.as_f64(), "must lie in [0, 1]"));
        }
        let taus = spectral_efficiencies(scenario, i)?;
        cells.push(cell_bandwidths(&scenario.cells[i], &scenario.qos, &taus, p));
    }
    Ok(RequiredBandwidths {
        w_mm: w_mm_required(scenario),
        cells,
    })
}
