mod common;

use common::KM2;
use offload_core::model::{CellKind, PowerClass};
use offload_core::montecarlo::{simulate_outage_msu, simulate_outage_ssu, SimConfig};
use offload_core::outage::{outage_msu_closed, outage_ssu_closed};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b
}

#[test]
fn micro_cell_sweep_matches_simulation() {
    let mut s = common::scenario(vec![common::cell(CellKind::Csbs, 600.0, 0.0)], 0.0, 0.0);
    s.env.theta_s = 500.0;
    let mut c = s.cells[0].clone();
    c.user_density = 70.0 * KM2;
    let mut checked = 0;
    for k in 1..=12 {
        let mut qos = s.qos;
        qos.rate_req = 5e4 * k as f64;
        let closed = outage_ssu_closed(&c, &s.env, &qos, 5e6, 1.0).unwrap();
        let mc =
            simulate_outage_ssu(&c, &s.env, &qos, 5e6, 1.0, &SimConfig::new(10_000, 11)).unwrap();
        if closed.probability < 0.1 && !closed.regime_violation {
            checked += 1;
            assert!(
                rel(mc.conditional, closed.probability) < 0.1,
                "R = {}: closed {} vs simulated {}",
                qos.rate_req,
                closed.probability,
                mc.conditional
            );
        }
    }
    assert!(checked >= 3);
}

#[test]
fn pico_cell_sweep_matches_simulation() {
    let mut c = common::cell(CellKind::Csbs, 600.0, 0.0);
    c.radius = 100.0;
    c.power = PowerClass::Pico.params(5e6);
    c.user_density = 500.0 * KM2;
    let mut env = common::env(500.0);
    env.alpha_s = 4.0;
    let mut checked = 0;
    for k in 1..=8 {
        let qos = offload_core::QosConfig {
            rate_req: 1e5 * k as f64,
            eta: 0.05,
        };
        let closed = outage_ssu_closed(&c, &env, &qos, 5e6, 1.0).unwrap();
        let mc = simulate_outage_ssu(&c, &env, &qos, 5e6, 1.0, &SimConfig::new(10_000, 5)).unwrap();
        if closed.probability < 0.1 && !closed.regime_violation {
            checked += 1;
            assert!(rel(mc.conditional, closed.probability) < 0.1);
        }
    }
    assert!(checked >= 3);
}

#[test]
fn macro_served_users_match_simulation() {
    let mut checked = 0;
    for d_ms in [300.0, 600.0, 900.0] {
        let mut c = common::cell(CellKind::Csbs, d_ms, 0.0);
        c.user_density = 70.0 * KM2;
        let mut s = common::scenario(vec![], 0.0, 0.0);
        s.env.theta_s = 500.0;
        for k in 1..=20 {
            s.qos.rate_req = 1e4 * k as f64;
            let closed = outage_msu_closed(&c, &s, 3e6, 0.0).unwrap();
            let mc = simulate_outage_msu(&c, &s, 3e6, 0.0, &SimConfig::new(10_000, 3)).unwrap();
            if closed.probability < 0.1 && !closed.regime_violation {
                checked += 1;
                assert!(
                    rel(mc.conditional, closed.probability) < 0.1,
                    "D_ms = {d_ms}, R = {}: closed {} vs simulated {}",
                    s.qos.rate_req,
                    closed.probability,
                    mc.conditional
                );
            }
        }
    }
    assert!(checked >= 9);
}

#[test]
fn tiny_bandwidth_is_flagged() {
    let c = common::cell(CellKind::Csbs, 600.0, 0.0);
    let env = common::env(500.0);
    let qos = offload_core::QosConfig {
        rate_req: 3e5,
        eta: 0.05,
    };
    let closed = outage_ssu_closed(&c, &env, &qos, 1e4, 1.0).unwrap();
    assert!(closed.regime_violation);
    assert_eq!(closed.probability, 1.0);
}
