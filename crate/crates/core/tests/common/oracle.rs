#![allow(dead_code)]

use offload_core::model::{CellKind, Scenario};
use offload_core::multi_cell::KnapsackItem;
use offload_core::outage::spectral_efficiencies;

/// Gain of running cell `idx` at `mu` instead of leaving it off, built up
/// from bandwidths and power draws rather than the closed forms.
pub fn brute_gain(s: &Scenario<f64>, idx: usize, mu: f64) -> f64 {
    let c = &s.cells[idx];
    let t = spectral_efficiencies(s, idx).unwrap();
    let r = s.qos.rate_req;
    let n = c.user_density * std::f64::consts::PI * c.radius * c.radius;
    let m = &s.macro_cell.power;
    let per_hz = m.beta * m.p_tx / m.bandwidth;

    let w_ss =
        (mu * c.energy_unit - c.power.p_const) * c.power.bandwidth / (c.power.beta * c.power.p_tx);
    let phi = ((t.tau_ss * w_ss / r - 1.0) / n).clamp(0.0, 1.0);
    let w_off = r / t.tau_ms * (1.0 + n);
    let w_on = r / t.tau_ms * (1.0 + (1.0 - phi) * n);

    let lambda = if c.kind == CellKind::Csbs {
        0.0
    } else {
        c.energy_arrival
    };
    let up = if c.kind == CellKind::Rsbs {
        (lambda / mu).min(1.0)
    } else {
        1.0
    };
    let macro_saving = per_hz * up * (w_off - w_on);
    let grid = match c.kind {
        CellKind::Csbs => mu * c.energy_unit,
        CellKind::Hsbs => (mu - lambda).max(0.0) * c.energy_unit,
        CellKind::Rsbs => 0.0,
    };
    let handover = if c.kind == CellKind::Rsbs && lambda < mu {
        // Shutdown frequency λ·q0 = λ(1 − λ/μ), two handovers per outage.
        let x = lambda / mu;
        2.0 * c.handover_cost * mu * (1.0 - x) * (1.0 - (-x).exp())
    } else {
        0.0
    };
    macro_saving - grid - handover
}

/// Feasible range of the consumption rate, derived from "one user" and
/// "every user or the full band".
pub fn mu_range(s: &Scenario<f64>, idx: usize) -> Option<(f64, f64)> {
    let c = &s.cells[idx];
    let t = spectral_efficiencies(s, idx).unwrap();
    let one = s.qos.rate_req / (t.tau_ss * c.power.bandwidth);
    if one > 1.0 {
        return None;
    }
    let n = c.user_density * std::f64::consts::PI * c.radius * c.radius;
    let all = (one * (1.0 + n)).min(1.0);
    let rate = |share: f64| (c.power.p_const + share * c.power.beta * c.power.p_tx) / c.energy_unit;
    Some((rate(one), rate(all)))
}

/// Best gain on an evenly spaced grid of `points` rates spanning the range.
pub fn grid_max(s: &Scenario<f64>, idx: usize, points: usize) -> (f64, f64) {
    let (lo, hi) = mu_range(s, idx).expect("serviceable");
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..points {
        let mu = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let g = brute_gain(s, idx, mu);
        if g > best.1 {
            best = (mu, g);
        }
    }
    best
}

/// 0-1 min-cost cover by dynamic programming over relief measured in
/// `quantum` Hz steps. Exact when every relief and the deficit are
/// multiples of `quantum`. Returns `None` when nothing covers.
pub fn min_cover_dp(items: &[KnapsackItem<f64>], deficit: f64, quantum: f64) -> Option<f64> {
    let need = (deficit / quantum).ceil().max(0.0) as usize;
    let mut best = vec![f64::INFINITY; need + 1];
    best[0] = 0.0;
    for it in items {
        let w = (it.relief / quantum).floor() as usize;
        for cap in (0..=need).rev() {
            if best[cap].is_finite() {
                let to = (cap + w).min(need);
                let c = best[cap] + it.cost;
                if c < best[to] {
                    best[to] = c;
                }
            }
        }
    }
    best[need].is_finite().then_some(best[need])
}

/// Same cover problem, every subset tried.
pub fn min_cover_brute(items: &[KnapsackItem<f64>], deficit: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for mask in 0u32..1 << items.len() {
        let (mut r, mut c) = (0.0, 0.0);
        for (i, it) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                r += it.relief;
                c += it.cost;
            }
        }
        if r >= deficit && best.is_none_or(|b| c < b) {
            best = Some(c);
        }
    }
    best
}
