//! Network-wide planning: on-grid power accounting, macro bandwidth
//! feasibility, the two-stage TEATO planner and the baselines it is compared
//! against.
//!
//! Every planner builds its plan through the same assembly routine, so two
//! plans with the same per-cell decisions have bit-identical power figures.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy_queue::{empty_probability, handover_power};
use crate::error::{Error, Result};
use crate::model::{
    validate_scenario, CellKind, CellOffload, OffloadDecision, PowerBreakdown, Scenario,
};
use crate::outage::{cell_bandwidths, w_mm_required};
use crate::scalar::Real;
use crate::single_cell::{decide, decision_at, CellContext, CellDecision};

/// Largest cell count [`exhaustive_search`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Teato,
    GreedyNoSleep,
    GreedySleep,
    Exhaustive,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Teato,
        Method::GreedyNoSleep,
        Method::GreedySleep,
        Method::Exhaustive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Teato => "teato",
            Method::GreedyNoSleep => "greedy_no_sleep",
            Method::GreedySleep => "greedy_sleep",
            Method::Exhaustive => "exhaustive",
        }
    }

    pub fn plan<T: Real>(self, scenario: &Scenario<T>) -> Result<NetworkPlan<T>> {
        match self {
            Method::Teato => teato(scenario),
            Method::GreedyNoSleep => greedy_no_sleep(scenario),
            Method::GreedySleep => greedy_with_sleep(scenario),
            Method::Exhaustive => exhaustive_search(scenario),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "teato" => Ok(Method::Teato),
            "greedy_no_sleep" | "greedy" => Ok(Method::GreedyNoSleep),
            "greedy_sleep" | "greedy_with_sleep" => Ok(Method::GreedySleep),
            "exhaustive" | "optimal" => Ok(Method::Exhaustive),
            other => Err(format!(
                "unknown method `{other}` (expected teato, greedy_no_sleep, greedy_sleep or exhaustive)"
            )),
        }
    }
}

/// A complete network decision with its bandwidth and power accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkPlan<T> {
    pub method: Method,
    pub decisions: Vec<CellDecision<T>>,
    pub offload: OffloadDecision<T>,
    /// Macro bandwidth needed when every renewable-only cell is down.
    pub w_m_max: T,
    pub feasible: bool,
    /// `max(0, w_m_max − W_m)`.
    pub deficit: T,
    pub power: PowerBreakdown<T>,
    /// Cells switched on only to relieve an overloaded macro station.
    pub reactivated: Vec<usize>,
}

impl<T: Real> NetworkPlan<T> {
    pub fn active_count(&self) -> usize {
        self.offload.cells.iter().filter(|c| c.active).count()
    }
}

/// Average macro bandwidth spent on the users of cell `i`.
fn effective_w_ms<T: Real>(scenario: &Scenario<T>, d: &OffloadDecision<T>, i: usize) -> T {
    let c = &d.cells[i];
    if !c.active {
        return c.w_ms_off;
    }
    match scenario.cells[i].kind {
        CellKind::Rsbs => {
            let q0 = empty_probability(scenario.cells[i].energy_arrival, c.mu_e);
            (T::one() - q0) * c.w_ms_active + q0 * c.w_ms_off
        }
        CellKind::Hsbs | CellKind::Csbs => c.w_ms_active,
    }
}

/// Macro station power: constant part plus RF power for all bandwidth it
/// spends on average.
pub fn mbs_power<T: Real>(d: &OffloadDecision<T>, scenario: &Scenario<T>) -> T {
    let p = &scenario.macro_cell.power;
    let mut w = d.w_mm;
    for i in 0..d.cells.len() {
        w = w + effective_w_ms(scenario, d, i);
    }
    p.p_const + p.rf_per_hz() * w
}

/// Total on-grid power split by source.
pub fn network_power<T: Real>(d: &OffloadDecision<T>, scenario: &Scenario<T>) -> PowerBreakdown<T> {
    let mut per_cell = Vec::with_capacity(d.cells.len());
    let mut handover = T::zero();
    for (c, cfg) in d.cells.iter().zip(&scenario.cells) {
        if !c.active {
            per_cell.push(T::zero());
            continue;
        }
        let draw = c.mu_e * cfg.energy_unit;
        match cfg.kind {
            CellKind::Rsbs => {
                per_cell.push(T::zero());
                handover =
                    handover + handover_power(cfg.energy_arrival, c.mu_e, cfg.handover_cost, true);
            }
            CellKind::Hsbs => per_cell.push(empty_probability(cfg.energy_arrival, c.mu_e) * draw),
            CellKind::Csbs => per_cell.push(draw),
        }
    }
    PowerBreakdown::from_parts(mbs_power(d, scenario), per_cell, handover)
}

/// Worst-case macro bandwidth: every renewable-only cell down at once.
pub fn w_m_max<T: Real>(d: &OffloadDecision<T>, scenario: &Scenario<T>) -> T {
    let mut w = d.w_mm;
    for i in 0..d.cells.len() {
        w = w + match scenario.cells[i].kind {
            CellKind::Rsbs => d.cells[i].w_ms_off,
            _ => effective_w_ms(scenario, d, i),
        };
    }
    w
}

struct Prepared<T> {
    ctxs: Vec<CellContext<T>>,
    w_mm: T,
}

fn prepare<T: Real>(scenario: &Scenario<T>) -> Result<Prepared<T>> {
    let violations = validate_scenario(scenario);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let ctxs = (0..scenario.cells.len())
        .map(|i| CellContext::new(scenario, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        ctxs,
        w_mm: w_mm_required(scenario),
    })
}

fn offload_decision<T: Real>(
    prep: &Prepared<T>,
    decisions: &[CellDecision<T>],
) -> OffloadDecision<T> {
    let cells = prep
        .ctxs
        .iter()
        .zip(decisions)
        .map(|(ctx, d)| {
            let on = d.active && d.serviceable;
            let phi = if on { d.phi } else { T::zero() };
            let bw = cell_bandwidths(&ctx.cell, &ctx.qos, &ctx.taus, phi);
            CellOffload {
                active: on,
                mu_e: if on { d.mu_e } else { T::zero() },
                phi,
                w_ss: if on { d.w_ss } else { T::zero() },
                w_ms_active: bw.w_ms_active,
                w_ms_off: bw.w_ms_off,
            }
        })
        .collect();
    OffloadDecision {
        cells,
        w_mm: prep.w_mm,
    }
}

fn assemble<T: Real>(
    scenario: &Scenario<T>,
    prep: &Prepared<T>,
    mut decisions: Vec<CellDecision<T>>,
    method: Method,
    reactivated: Vec<usize>,
) -> NetworkPlan<T> {
    for d in &mut decisions {
        d.active &= d.serviceable;
    }
    let offload = offload_decision(prep, &decisions);
    let w_max = w_m_max(&offload, scenario);
    let cap = scenario.macro_cell.power.bandwidth;
    let power = network_power(&offload, scenario);
    NetworkPlan {
        method,
        decisions,
        w_m_max: w_max,
        feasible: w_max <= cap,
        deficit: (w_max - cap).max(T::zero()),
        power,
        offload,
        reactivated,
    }
}

/// A cell that could be switched on to relieve the macro station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnapsackItem<T> {
    /// Extra on-grid power of switching it on, `−Δ` (W).
    pub cost: T,
    /// Macro bandwidth released, `δ` (Hz).
    pub relief: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackOutcome {
    /// Chosen item indices in activation order.
    pub selected: Vec<usize>,
    /// Whether the selection releases at least the deficit.
    pub covered: bool,
}

/// Item indices sorted by cost per released hertz, ties by index.
pub fn ratio_order<T: Real>(items: &[KnapsackItem<T>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = items[a].cost / items[a].relief;
        let rb = items[b].cost / items[b].relief;
        ra.partial_cmp(&rb)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Covers `deficit` Hz of macro bandwidth by switching on items in order of
/// increasing cost per released hertz. This is the relaxed optimum with the
/// one fractional item rounded up, so the cost exceeds the 0-1 optimum by at
/// most one item. When even every item falls short, all are returned and
/// `covered` is false.
pub fn reactivate_knapsack<T: Real>(items: &[KnapsackItem<T>], deficit: T) -> KnapsackOutcome {
    let mut selected = Vec::new();
    let mut released = T::zero();
    for i in ratio_order(items) {
        if released >= deficit {
            break;
        }
        released = released + items[i].relief;
        selected.push(i);
    }
    KnapsackOutcome {
        covered: released >= deficit,
        selected,
    }
}

/// Tightens a ratio-ordered cover. Walking the same order, every item that
/// would complete the cover on top of the items skipped so far is tried as
/// the closing item; the cheapest such cover is kept. Selected items are
/// then swapped for cheaper unselected ones while the cover holds, and
/// finally dropped, most expensive first, while the rest still covers.
/// Never costs more than [`reactivate_knapsack`].
pub fn refine_cover<T: Real>(items: &[KnapsackItem<T>], deficit: T) -> KnapsackOutcome {
    let prefix = reactivate_knapsack(items, deficit);
    if !prefix.covered {
        return prefix;
    }
    let cost = |set: &[usize]| set.iter().fold(T::zero(), |acc, &i| acc + items[i].cost);
    let relief = |set: &[usize]| set.iter().fold(T::zero(), |acc, &i| acc + items[i].relief);

    let mut best = prefix.selected;
    let mut partial: Vec<usize> = Vec::new();
    for i in ratio_order(items) {
        let mut trial = partial.clone();
        trial.push(i);
        if relief(&trial) >= deficit {
            if cost(&trial) < cost(&best) {
                best = trial;
            }
        } else {
            partial = trial;
        }
    }

    let mut improved = true;
    while improved {
        improved = false;
        'scan: for k in 0..best.len() {
            for j in 0..items.len() {
                if best.contains(&j) || items[j].cost >= items[best[k]].cost {
                    continue;
                }
                let mut trial = best.clone();
                trial[k] = j;
                if relief(&trial) >= deficit {
                    best = trial;
                    improved = true;
                    break 'scan;
                }
            }
        }
    }

    let mut by_cost = best.clone();
    by_cost.sort_by(|&a, &b| {
        items[b]
            .cost
            .partial_cmp(&items[a].cost)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    for i in by_cost {
        let rest: Vec<usize> = best.iter().copied().filter(|&j| j != i).collect();
        if relief(&rest) >= deficit && cost(&rest) <= cost(&best) {
            best = rest;
        }
    }
    KnapsackOutcome {
        selected: best,
        covered: true,
    }
}

fn stage_one<T: Real>(prep: &Prepared<T>) -> Vec<CellDecision<T>> {
    prep.ctxs.iter().map(|c| decide(c, false)).collect()
}

/// Two-stage planner. Stage one optimizes every cell on its own and keeps
/// the cells with positive gain. If the macro station is then overloaded,
/// stage two switches on sleeping grid-connected cells, chosen by
/// [`refine_cover`] from the order of increasing `−Δ/δ`, until the
/// worst-case macro demand fits. Renewable-only cells are never switched on
/// in stage two: while their battery is empty they release nothing.
pub fn teato<T: Real>(scenario: &Scenario<T>) -> Result<NetworkPlan<T>> {
    let prep = prepare(scenario)?;
    let mut decisions = stage_one(&prep);
    let plan = assemble(
        scenario,
        &prep,
        decisions.clone(),
        Method::Teato,
        Vec::new(),
    );
    if plan.feasible {
        return Ok(plan);
    }

    let candidates: Vec<usize> = (0..decisions.len())
        .filter(|&i| {
            let d = &decisions[i];
            !d.active
                && d.serviceable
                && scenario.cells[i].kind != CellKind::Rsbs
                && d.delta_bw > T::zero()
        })
        .collect();
    let items: Vec<KnapsackItem<T>> = candidates
        .iter()
        .map(|&i| KnapsackItem {
            cost: -decisions[i].gain,
            relief: decisions[i].delta_bw,
        })
        .collect();
    let outcome = refine_cover(&items, plan.deficit);
    let mut reactivated: Vec<usize> = outcome.selected.iter().map(|&k| candidates[k]).collect();
    for &i in &reactivated {
        decisions[i].active = true;
    }
    let mut plan = assemble(
        scenario,
        &prep,
        decisions.clone(),
        Method::Teato,
        reactivated.clone(),
    );
    // Summation order can leave a hair of deficit; keep following the order.
    let mut rest = ratio_order(&items)
        .into_iter()
        .map(|k| candidates[k])
        .filter(|i| !reactivated.contains(i))
        .collect::<Vec<_>>()
        .into_iter();
    while !plan.feasible {
        let Some(i) = rest.next() else { break };
        decisions[i].active = true;
        reactivated.push(i);
        plan = assemble(
            scenario,
            &prep,
            decisions.clone(),
            Method::Teato,
            reactivated.clone(),
        );
    }
    Ok(plan)
}

fn greedy_decisions<T: Real>(prep: &Prepared<T>) -> Result<Vec<CellDecision<T>>> {
    prep.ctxs
        .iter()
        .map(|c| match c.mu_bounds() {
            Some((_, hi)) => decision_at(c, hi, true),
            None => decision_at(c, c.mu_full(), false),
        })
        .collect()
}

/// Every cell on, offloading as many users as it can.
pub fn greedy_no_sleep<T: Real>(scenario: &Scenario<T>) -> Result<NetworkPlan<T>> {
    let prep = prepare(scenario)?;
    let decisions = greedy_decisions(&prep)?;
    Ok(assemble(
        scenario,
        &prep,
        decisions,
        Method::GreedyNoSleep,
        Vec::new(),
    ))
}

/// Like [`greedy_no_sleep`], except that a grid-only cell whose best
/// achievable gain is not positive sleeps, provided the macro station still
/// copes. Cells are considered in index order.
pub fn greedy_with_sleep<T: Real>(scenario: &Scenario<T>) -> Result<NetworkPlan<T>> {
    let prep = prepare(scenario)?;
    let mut decisions = greedy_decisions(&prep)?;
    let mut plan = assemble(
        scenario,
        &prep,
        decisions.clone(),
        Method::GreedySleep,
        Vec::new(),
    );
    for i in 0..decisions.len() {
        let d = decisions[i];
        if scenario.cells[i].kind != CellKind::Csbs
            || !d.active
            || decide(&prep.ctxs[i], false).gain > T::zero()
        {
            continue;
        }
        decisions[i].active = false;
        let trial = assemble(
            scenario,
            &prep,
            decisions.clone(),
            Method::GreedySleep,
            Vec::new(),
        );
        if trial.feasible {
            plan = trial;
        } else {
            decisions[i].active = true;
        }
    }
    Ok(plan)
}

/// Tries every on/off pattern with each cell at its individually optimal
/// rate and returns the feasible plan with the least on-grid power (the
/// first such pattern on ties). When nothing is feasible the plan with the
/// smallest worst-case macro demand is returned.
pub fn exhaustive_search<T: Real>(scenario: &Scenario<T>) -> Result<NetworkPlan<T>> {
    if scenario.cells.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManyCells {
            cells: scenario.cells.len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let prep = prepare(scenario)?;
    let base = stage_one(&prep);
    let free: Vec<usize> = (0..base.len()).filter(|&i| base[i].serviceable).collect();
    let with_mask = |mask: u32| {
        let mut d = base.clone();
        for (bit, &i) in free.iter().enumerate() {
            d[i].active = mask >> bit & 1 == 1;
        }
        d
    };

    // Feasible plans rank by power, infeasible ones by deficit; mask breaks ties.
    let best = (0..1u32 << free.len())
        .into_par_iter()
        .map(|mask| {
            let p = assemble(
                scenario,
                &prep,
                with_mask(mask),
                Method::Exhaustive,
                Vec::new(),
            );
            let key = if p.feasible { p.power.total } else { p.w_m_max };
            (!p.feasible, key, mask)
        })
        .reduce_with(|a, b| {
            let ord =
                a.0.cmp(&b.0)
                    .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                    .then(a.2.cmp(&b.2));
            if ord.is_le() {
                a
            } else {
                b
            }
        })
        .map(|b| b.2)
        .unwrap_or(0);
    Ok(assemble(
        scenario,
        &prep,
        with_mask(best),
        Method::Exhaustive,
        Vec::new(),
    ))
}

/// Reference used for normalization: every small cell treated as grid-only,
/// always on at full bandwidth, with no sleeping and no power control.
pub fn reference_power<T: Real>(scenario: &Scenario<T>) -> Result<PowerBreakdown<T>> {
    let mut grid = scenario.clone();
    for c in &mut grid.cells {
        c.kind = CellKind::Csbs;
        c.energy_arrival = T::zero();
    }
    let prep = prepare(&grid)?;
    let decisions: Vec<CellDecision<T>> = prep
        .ctxs
        .iter()
        .map(|ctx| {
            let full = ctx.mu_full();
            let n = ctx.cell.mean_users();
            let w = ctx.cell.power.bandwidth;
            let phi = if ctx.serviceable() && n > T::zero() {
                ((ctx.taus.tau_ss * w / ctx.qos.rate_req - T::one()) / n).min(T::one())
            } else {
                T::zero()
            };
            let relief = cell_bandwidths(&ctx.cell, &ctx.qos, &ctx.taus, phi).relief();
            CellDecision {
                active: true,
                serviceable: true,
                mu_e: full,
                phi,
                w_ss: w,
                gain: T::zero(),
                delta_bw: relief,
            }
        })
        .collect();
    Ok(assemble(&grid, &prep, decisions, Method::GreedyNoSleep, Vec::new()).power)
}
