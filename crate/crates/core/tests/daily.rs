use std::path::PathBuf;

use offload_core::model::CellKind;
use offload_core::multi_cell::{reference_power, Method};
use offload_core::scenario::{
    daily_run, load_scenario, synthetic_profiles, write_daily_csv, DailyProfiles, ProfileKind,
    DAILY_CSV_HEADER,
};
use offload_core::Error;

fn default5() -> (offload_core::Scenario, DailyProfiles) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/default5.json");
    load_scenario(&path).unwrap()
}

#[test]
fn sunny_day_savings_and_ordering() {
    let (s, p) = default5();
    assert!(s
        .cells
        .iter()
        .filter(|c| c.kind == CellKind::Rsbs)
        .all(|c| c.handover_cost == 2.0));
    let r = daily_run(
        &s,
        &p,
        &[Method::Teato, Method::GreedySleep, Method::GreedyNoSleep],
    )
    .unwrap();
    let mean = |m| r.summary_for(m).unwrap().mean_total;
    let (t, gs, gn) = (
        mean(Method::Teato),
        mean(Method::GreedySleep),
        mean(Method::GreedyNoSleep),
    );
    assert!(t < gs && gs < gn, "{t} {gs} {gn}");
    let saving = r.saving(Method::Teato, Method::GreedyNoSleep).unwrap();
    assert!((35.0..=65.0).contains(&saving), "saving {saving}%");
    assert!((saving - 100.0 * (1.0 - t / gn)).abs() < 1e-9);
    let norm = |m| r.summary_for(m).unwrap().mean_normalized;
    assert!(norm(Method::Teato) < norm(Method::GreedySleep));
    assert!(r.summary.methods.iter().all(|m| m.infeasible_periods == 0));
}

#[test]
fn teato_matches_exhaustive_most_of_the_day() {
    let (s, p) = default5();
    let r = daily_run(&s, &p, &[Method::Exhaustive, Method::Teato]).unwrap();
    let same = (0..p.periods)
        .filter(|&t| {
            let rows: Vec<_> = r.rows.iter().filter(|x| x.period == t).collect();
            rows[0].power.total == rows[1].power.total
        })
        .count();
    assert!(same * 10 >= p.periods * 8, "{same}/{}", p.periods);
}

#[test]
fn no_sun_keeps_renewable_cells_dark() {
    let (s, mut p) = default5();
    p.energy_shape = vec![0.0; p.periods];
    let r = daily_run(&s, &p, &[Method::Teato]).unwrap();
    for row in &r.rows {
        for (on, c) in row.active.iter().zip(&s.cells) {
            if c.kind == CellKind::Rsbs {
                assert!(!on, "period {}", row.period);
            }
        }
    }
}

#[test]
fn constant_profile_repeats_the_same_plan() {
    let (s, _) = default5();
    let p = DailyProfiles::constant(6);
    let r = daily_run(&s, &p, &Method::ALL).unwrap();
    for m in Method::ALL {
        let rows: Vec<_> = r.rows_for(m).collect();
        for w in rows.windows(2) {
            assert_eq!(w[0].power, w[1].power);
            assert_eq!(w[0].active, w[1].active);
        }
    }
}

#[test]
fn periods_are_independent() {
    let (s, p) = default5();
    let methods = [Method::Teato, Method::GreedySleep];
    let a = daily_run(&s, &p, &methods).unwrap();
    assert_eq!(a, daily_run(&s, &p, &methods).unwrap());

    let order: Vec<usize> = (0..p.periods).rev().collect();
    let shuffled = DailyProfiles {
        periods: p.periods,
        traffic_shape: order.iter().map(|&t| p.traffic_shape[t]).collect(),
        energy_shape: order.iter().map(|&t| p.energy_shape[t]).collect(),
        ..p.clone()
    };
    let b = daily_run(&s, &shuffled, &methods).unwrap();
    for (k, &t) in order.iter().enumerate() {
        for m in methods {
            let x = a
                .rows
                .iter()
                .find(|r| r.period == t && r.method == m)
                .unwrap();
            let y = b
                .rows
                .iter()
                .find(|r| r.period == k && r.method == m)
                .unwrap();
            assert_eq!(x.power, y.power);
        }
    }
    assert!((a.summary.methods[0].mean_total - b.summary.methods[0].mean_total).abs() < 1e-9);
}

#[test]
fn reference_bounds_every_method_all_day() {
    let (s, p) = default5();
    let r = daily_run(&s, &p, &Method::ALL).unwrap();
    for row in &r.rows {
        assert!(
            row.normalized <= 1.0,
            "period {} {}",
            row.period,
            row.method
        );
        let reference = reference_power(&p.scenario_at(&s, row.period))
            .unwrap()
            .total;
        assert!((row.power.total / reference - row.normalized).abs() < 1e-12);
    }
}

#[test]
fn cloudy_day_saves_less_than_sunny() {
    let (s, _) = default5();
    let methods = [Method::Teato];
    let sunny = daily_run(
        &s,
        &synthetic_profiles(ProfileKind::Sunny, 24).unwrap(),
        &methods,
    )
    .unwrap();
    let cloudy = daily_run(
        &s,
        &synthetic_profiles(ProfileKind::Cloudy, 24).unwrap(),
        &methods,
    )
    .unwrap();
    assert!(sunny.summary.methods[0].mean_total < cloudy.summary.methods[0].mean_total);
}

#[test]
fn empty_method_set_is_rejected() {
    let (s, p) = default5();
    assert!(matches!(daily_run(&s, &p, &[]), Err(Error::NoMethods)));
}

#[test]
fn csv_has_one_row_per_period_and_method() {
    let (s, p) = default5();
    let r = daily_run(&s, &p, &[Method::Teato, Method::GreedyNoSleep]).unwrap();
    let mut buf = Vec::new();
    write_daily_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), DAILY_CSV_HEADER.join(","));
    assert_eq!(lines.count(), 2 * p.periods);
    assert!(text.lines().nth(1).unwrap().starts_with("0,teato,true,"));
}
