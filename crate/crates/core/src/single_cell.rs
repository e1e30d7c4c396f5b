//! Power-saving gain of switching one small cell on, the energy consumption
//! rate that maximizes it, and the resulting on/off decision.
//!
//! All gains are macro-side savings minus the extra on-grid cost of the
//! small cell, in watts. A cell can only be run at a rate between the one
//! that serves a single user and the one that offloads every user it covers
//! (or uses its whole bandwidth); outside that range no offload ratio in
//! `[0, 1]` exists and the gain functions return a domain error.

use serde::{Deserialize, Serialize};

use crate::energy_queue::{empty_probability, handover_power};
use crate::error::{domain, Result};
use crate::model::{
    sbs_bandwidth_from_rate, BsPowerParams, CellKind, QosConfig, Scenario, SmallCellConfig,
};
use crate::outage::{cell_bandwidths, spectral_efficiencies, SpectralEfficiencies};
use crate::scalar::Real;

const BISECTION_TOL: f64 = 1e-9;
const BOUND_SLACK: f64 = 1e-12;

/// Everything needed to optimize one cell in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellContext<T> {
    pub cell: SmallCellConfig<T>,
    pub taus: SpectralEfficiencies<T>,
    pub macro_power: BsPowerParams<T>,
    pub qos: QosConfig<T>,
}

/// Optimization outcome for one cell. `mu_e`, `phi`, `w_ss`, `gain` and
/// `delta_bw` describe the cell at its chosen rate whether or not it ends up
/// switched on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellDecision<T> {
    pub active: bool,
    /// False when the cell cannot carry even one user at full bandwidth.
    pub serviceable: bool,
    pub mu_e: T,
    pub phi: T,
    pub w_ss: T,
    /// Power saving gain at `mu_e` (W).
    pub gain: T,
    /// Macro bandwidth released by switching the cell on (Hz).
    pub delta_bw: T,
}

impl<T: Real> CellContext<T> {
    pub fn new(scenario: &Scenario<T>, index: usize) -> Result<Self> {
        let cell = scenario
            .cells
            .get(index)
            .ok_or_else(|| domain("index", index as f64, "no such cell"))?;
        Ok(Self {
            cell: cell.clone(),
            taus: spectral_efficiencies(scenario, index)?,
            macro_power: scenario.macro_cell.power,
            qos: scenario.qos,
        })
    }

    /// Harvesting rate used by the optimization; grid-only cells have none.
    pub fn lambda(&self) -> T {
        match self.cell.kind {
            CellKind::Csbs => T::zero(),
            _ => self.cell.energy_arrival,
        }
    }

    /// Fraction of the small-cell bandwidth a single user needs.
    fn single_user_share(&self) -> T {
        self.qos.rate_req / (self.taus.tau_ss * self.cell.power.bandwidth)
    }

    pub fn serviceable(&self) -> bool {
        self.single_user_share() <= T::one()
    }

    fn rate_at_share(&self, share: T) -> T {
        let p = &self.cell.power;
        (p.p_const + share.min(T::one()) * p.rf_span()) / self.cell.energy_unit
    }

    /// Feasible energy consumption rates `[μ_lo, μ_hi]`, or `None` when the
    /// cell is not serviceable.
    pub fn mu_bounds(&self) -> Option<(T, T)> {
        if !self.serviceable() {
            return None;
        }
        let one = self.single_user_share();
        let all = one * (T::one() + self.cell.mean_users());
        Some((self.rate_at_share(one), self.rate_at_share(all)))
    }

    /// Rate with the whole bandwidth in use.
    pub fn mu_full(&self) -> T {
        self.cell.power.full_power() / self.cell.energy_unit
    }

    /// Macro RF power per Hz, `β_m·P_Tm/W_m`.
    pub fn macro_rf_per_hz(&self) -> T {
        self.macro_power.rf_per_hz()
    }

    /// Macro RF power the cell's first user costs, `R_Q·β_m·P_Tm/(τ_ms·W_m)`.
    pub fn single_user_macro_power(&self) -> T {
        self.qos.rate_req / self.taus.tau_ms * self.macro_rf_per_hz()
    }

    /// `κ = ζ_EE·P_Cs + R_Q·β_m·P_Tm/(τ_ms·W_m)`.
    pub fn kappa(&self) -> T {
        zeta_ee(self) * self.cell.power.p_const + self.single_user_macro_power()
    }

    fn check_mu(&self, mu: T) -> Result<T> {
        let (lo, hi) = self
            .mu_bounds()
            .ok_or_else(|| domain("mu_e", mu.as_f64(), "cell cannot serve a single user"))?;
        let slack = T::lit(BOUND_SLACK);
        if !(mu >= lo * (T::one() - slack) && mu <= hi * (T::one() + slack)) {
            return Err(domain(
                "mu_e",
                mu.as_f64(),
                "outside the feasible consumption-rate range",
            ));
        }
        Ok(mu.max(lo).min(hi))
    }

    /// Utilized bandwidth, offload ratio and macro relief at rate `mu`.
    pub fn operating_point(&self, mu: T) -> Result<(T, T, T)> {
        let mu = self.check_mu(mu)?;
        let w_ss = sbs_bandwidth_from_rate(mu, &self.cell.power, self.cell.energy_unit)?;
        let n = self.cell.mean_users();
        let phi = if n > T::zero() {
            let extra = self.taus.tau_ss * w_ss / self.qos.rate_req - T::one();
            (extra / n).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        let bw = cell_bandwidths(&self.cell, &self.qos, &self.taus, phi);
        Ok((w_ss, phi, bw.relief()))
    }
}

/// Energy efficiency of serving a user at the small cell relative to the
/// macro station, `(W_s·τ_ss·β_m·P_Tm)/(W_m·τ_ms·β_s·P_Ts)`.
pub fn zeta_ee<T: Real>(ctx: &CellContext<T>) -> T {
    let s = &ctx.cell.power;
    let m = &ctx.macro_power;
    (s.bandwidth * ctx.taus.tau_ss * m.beta * m.p_tx)
        / (m.bandwidth * ctx.taus.tau_ms * s.beta * s.p_tx)
}

/// Gain of a cell with grid backup (also used for grid-only cells, whose
/// harvesting rate is zero). Piecewise linear in `mu_e` with its only break
/// at `λ_E`.
pub fn gain_hsbs<T: Real>(mu_e: T, ctx: &CellContext<T>) -> Result<T> {
    let mu = ctx.check_mu(mu_e)?;
    let z = zeta_ee(ctx);
    let e = ctx.cell.energy_unit;
    let pc = ctx.cell.power.p_const;
    let c = ctx.single_user_macro_power();
    let lambda = ctx.lambda();
    Ok(if mu <= lambda {
        z * mu * e - z * pc - c
    } else {
        (z - T::one()) * mu * e - z * pc - c + lambda * e
    })
}

/// Macro-side saving of a renewable-only cell before handover costs.
fn rsbs_macro_saving<T: Real>(mu: T, ctx: &CellContext<T>) -> T {
    let z = zeta_ee(ctx);
    let e = ctx.cell.energy_unit;
    let lambda = ctx.lambda();
    if mu <= lambda {
        z * mu * e - z * ctx.cell.power.p_const - ctx.single_user_macro_power()
    } else {
        z * lambda * e - lambda / mu * ctx.kappa()
    }
}

/// Gain of a renewable-only cell: macro saving while the battery lasts minus
/// the handover power spent each time it runs dry and recovers.
pub fn gain_rsbs<T: Real>(mu_e: T, ctx: &CellContext<T>) -> Result<T> {
    let mu = ctx.check_mu(mu_e)?;
    let ho = handover_power(ctx.lambda(), mu, ctx.cell.handover_cost, true);
    Ok(rsbs_macro_saving(mu, ctx) - ho)
}

/// Gain for the cell's own kind.
pub fn gain<T: Real>(mu_e: T, ctx: &CellContext<T>) -> Result<T> {
    match ctx.cell.kind {
        CellKind::Rsbs => gain_rsbs(mu_e, ctx),
        CellKind::Hsbs | CellKind::Csbs => gain_hsbs(mu_e, ctx),
    }
}

/// `f(x) = (1 − e^{−x}(1 + x − x²))/x²`, decreasing from 3/2 at 0 to
/// `1 − 1/e` at 1. With `x = λ/μ` the renewable-only gain has slope
/// `−κ + 2λ·C_HO·f(x)` in `x`.
pub fn handover_slope<T: Real>(x: T) -> T {
    if x < T::lit(1e-2) {
        let c = [
            1.5,
            -4.0 / 3.0,
            5.0 / 8.0,
            -1.0 / 5.0,
            7.0 / 144.0,
            -1.0 / 105.0,
        ];
        return c
            .iter()
            .rev()
            .fold(T::zero(), |acc, &k| acc * x + T::lit(k));
    }
    (T::one() - (-x).exp() * (T::one() + x - x * x)) / (x * x)
}

/// Picks the candidate with the highest gain; earlier entries win ties.
fn best_of<T: Real>(ctx: &CellContext<T>, candidates: &[T]) -> T {
    let mut best = candidates[0];
    let mut best_gain = gain(best, ctx).unwrap_or_else(|_| T::neg_infinity());
    for &mu in &candidates[1..] {
        let g = gain(mu, ctx).unwrap_or_else(|_| T::neg_infinity());
        if g > best_gain {
            best = mu;
            best_gain = g;
        }
    }
    best
}

/// Optimal rate of a cell with grid backup. When the small cell is the more
/// energy-efficient server (`ζ_EE > 1`) it should offload as much as it can;
/// otherwise the gain is piecewise linear and the best of its endpoints and
/// break is taken.
pub fn optimal_mu_hsbs<T: Real>(ctx: &CellContext<T>) -> T {
    let Some((lo, hi)) = ctx.mu_bounds() else {
        return ctx.mu_full();
    };
    if zeta_ee(ctx) > T::one() {
        return hi;
    }
    let knee = ctx.lambda().max(lo).min(hi);
    best_of(ctx, &[hi, knee, lo])
}

/// Optimal rate of a renewable-only cell.
///
/// Below `λ_E` the gain rises linearly. Above it the gain is concave in
/// `x = λ/μ` with slope `−κ + 2λC_HO·f(x)`; since `f` spans
/// `(1 − 1/e, 3/2)` the gain keeps rising in `μ` once `κ ≥ 3λC_HO`, keeps
/// falling once `κ ≤ 2(1 − 1/e)λC_HO`, and otherwise peaks where the slope
/// vanishes. The peak, the knee at `λ` and both bounds are compared
/// directly.
pub fn optimal_mu_rsbs<T: Real>(ctx: &CellContext<T>) -> T {
    let Some((lo, hi)) = ctx.mu_bounds() else {
        return ctx.mu_full();
    };
    let lambda = ctx.lambda();
    if lambda <= T::zero() {
        return hi;
    }
    let knee = lambda.max(lo).min(hi);
    let lc = lambda * ctx.cell.handover_cost;
    let kappa = ctx.kappa();
    let two = T::two();
    let floor = two * (T::one() - (-T::one()).exp()) * lc;
    let ceil = T::lit(3.0) * lc;
    if kappa > floor && kappa < ceil {
        let x = slope_root(kappa, lc);
        let peak = (lambda / x).max(lo).min(hi);
        best_of(ctx, &[hi, peak, knee, lo])
    } else {
        best_of(ctx, &[hi, knee, lo])
    }
}

/// Solves `2·lc·f(x) = κ` on `(0, 1)` by bisection; `f` is decreasing.
fn slope_root<T: Real>(kappa: T, lc: T) -> T {
    let tol = T::lit(BISECTION_TOL);
    let mut a = T::zero();
    let mut b = T::one();
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = (a + b) / T::two();
        if T::two() * lc * handover_slope(m) > kappa {
            a = m;
        } else {
            b = m;
        }
    }
    let x = (a + b) / T::two();
    x.max(T::min_positive_value())
}

/// Optimal rate for the cell's own kind.
pub fn optimal_mu<T: Real>(ctx: &CellContext<T>) -> T {
    match ctx.cell.kind {
        CellKind::Rsbs => optimal_mu_rsbs(ctx),
        CellKind::Hsbs | CellKind::Csbs => optimal_mu_hsbs(ctx),
    }
}

/// Describes the cell run at `mu_e` with the given on/off state. Cells that
/// cannot serve a single user are always reported off with zero gain.
pub fn decision_at<T: Real>(
    ctx: &CellContext<T>,
    mu_e: T,
    active: bool,
) -> Result<CellDecision<T>> {
    if !ctx.serviceable() {
        return Ok(CellDecision {
            active: false,
            serviceable: false,
            mu_e: ctx.mu_full(),
            phi: T::zero(),
            w_ss: T::zero(),
            gain: T::zero(),
            delta_bw: T::zero(),
        });
    }
    let g = gain(mu_e, ctx)?;
    let mu = ctx.check_mu(mu_e)?;
    let (w_ss, phi, delta_bw) = ctx.operating_point(mu)?;
    Ok(CellDecision {
        active,
        serviceable: true,
        mu_e: mu,
        phi,
        w_ss,
        gain: g,
        delta_bw,
    })
}

/// Activation decision for a cell with grid backup: on when the gain at the
/// optimal rate is positive, or when the macro station cannot serve the
/// cell's users on its own.
pub fn decide_hsbs<T: Real>(ctx: &CellContext<T>, mbs_overloaded: bool) -> CellDecision<T> {
    let mu = optimal_mu_hsbs(ctx);
    let mut d = decision_at(ctx, mu, false).expect("optimal rate is feasible");
    d.active = d.serviceable && (d.gain > T::zero() || mbs_overloaded);
    d
}

/// Activation decision for a renewable-only cell: on only when its best gain
/// is positive.
pub fn decide_rsbs<T: Real>(ctx: &CellContext<T>) -> CellDecision<T> {
    let mu = optimal_mu_rsbs(ctx);
    let mut d = decision_at(ctx, mu, false).expect("optimal rate is feasible");
    d.active = d.serviceable && d.gain > T::zero();
    d
}

/// Decision for the cell's own kind. The overload flag only affects cells
/// that can fall back on the grid.
pub fn decide<T: Real>(ctx: &CellContext<T>, mbs_overloaded: bool) -> CellDecision<T> {
    match ctx.cell.kind {
        CellKind::Rsbs => decide_rsbs(ctx),
        CellKind::Hsbs | CellKind::Csbs => decide_hsbs(ctx, mbs_overloaded),
    }
}

/// Gain of the greedy policy that always runs the cell at its highest
/// feasible rate. Zero for cells that cannot serve anyone.
pub fn greedy_gain<T: Real>(ctx: &CellContext<T>) -> T {
    match ctx.mu_bounds() {
        Some((_, hi)) => gain(hi, ctx).expect("upper bound is feasible"),
        None => T::zero(),
    }
}

/// Expected on-grid power drawn by the small cell itself at rate `mu_e`.
pub fn own_grid_power<T: Real>(ctx: &CellContext<T>, mu_e: T) -> T {
    let e = ctx.cell.energy_unit;
    match ctx.cell.kind {
        CellKind::Rsbs => T::zero(),
        CellKind::Hsbs => empty_probability(ctx.lambda(), mu_e) * mu_e * e,
        CellKind::Csbs => mu_e * e,
    }
}
