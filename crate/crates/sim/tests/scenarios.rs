use hagv_core::controllers::ActiveMode;
use hagv_core::dynamics::ContactMode;
use hagv_sim::replay::first_mismatch;
use hagv_sim::telemetry::to_csv_string;
use hagv_sim::*;

fn run(name: &str) -> RunLog {
    let log = run_scenario(&builtin(name).unwrap()).unwrap();
    assert!(log.is_complete(), "{name}: {:?}", log.error);
    log
}

#[test]
fn every_builtin_replays_bit_exactly() {
    for (name, _) in BUILTIN {
        let log = run(name);
        assert_eq!(
            first_mismatch(&log.records, &log.params, log.dt),
            None,
            "{name}"
        );
    }
}

#[test]
fn replay_catches_a_tampered_command() {
    let mut log = run("disturbance_recovery");
    log.records[500].cmd.wheel_torque[0] += 1e-12;
    assert_eq!(first_mismatch(&log.records, &log.params, log.dt), Some(500));
}

#[test]
fn csv_round_trip_is_lossless() {
    for name in ["mission", "aerial_attitude_steps"] {
        let log = run(name);
        let text = to_csv_string(&log.records, &log.params).unwrap();
        let back = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), log.records.len());
        for (a, b) in log.records.iter().zip(&back) {
            assert_eq!(a.state.body, b.state.body, "{name} at t = {}", a.t);
            assert_eq!(a.cmd, b.cmd);
            assert_eq!(a.mode, b.mode);
            assert_eq!(a.state.energy_used.to_bits(), b.state.energy_used.to_bits());
        }
        assert_eq!(to_csv_string(&back, &log.params).unwrap(), text);
        assert_eq!(first_mismatch(&back, &log.params, log.dt), None);
    }
}

#[test]
fn csv_written_to_disk_matches_memory() {
    let log = run("step_pitch");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("step.csv");
    write_csv(
        std::fs::File::create(&path).unwrap(),
        &log.records,
        &log.params,
    )
    .unwrap();
    let disk = std::fs::read_to_string(&path).unwrap();
    assert_eq!(disk, to_csv_string(&log.records, &log.params).unwrap());
    assert!(disk.starts_with(hagv_sim::telemetry::FORMAT_LINE));
}

#[test]
fn energy_is_monotone_and_segments_sum_to_total() {
    for (name, _) in BUILTIN {
        let log = run(name);
        assert!(
            log.records
                .windows(2)
                .all(|w| w[1].state.energy_used >= w[0].state.energy_used),
            "{name}"
        );
        let rep = energy_report(&log.records);
        assert!((rep.segment_sum() - rep.total).abs() <= 1e-9, "{name}");
        let dur: f64 = rep.segments.iter().map(|s| s.duration()).sum();
        assert!((dur - log.records.last().unwrap().t).abs() < 1e-9);
    }
}

#[test]
fn mission_visits_every_mode_and_lands() {
    let log = run("mission");
    let rep = energy_report(&log.records);
    for m in [
        ActiveMode::Aerial,
        ActiveMode::Decoupled,
        ActiveMode::Ground,
        ActiveMode::Idle,
    ] {
        assert!(rep.of_mode(m).count() > 0, "{}", m.as_str());
    }
    let peak = log
        .records
        .iter()
        .map(|r| r.state.position(&log.params).z)
        .fold(0.0, f64::max);
    assert!(peak > 0.5, "peak height {peak}");
    assert_eq!(
        log.records.last().unwrap().state.mode(),
        ContactMode::Ground
    );
}

#[test]
fn aerial_steps_track_attitude() {
    let log = run("aerial_attitude_steps");
    // Held roll of +10 deg over the second half of its window.
    let roll: Vec<f64> = log
        .records
        .iter()
        .filter(|r| r.t > 1.5 && r.t <= 2.0)
        .map(|r| r.state.euler().roll.to_degrees())
        .collect();
    assert!(roll.iter().all(|r| (r - 10.0).abs() < 1.5), "{roll:?}");
    assert!(log
        .records
        .iter()
        .all(|r| r.state.mode() == ContactMode::Aerial));
}

#[test]
fn printed_sign_rule_cannot_stand_up() {
    // With the literal case split, leaning back with a positive desired
    // rate pushes thrust the wrong way and the chassis never leaves the
    // ground it lies on.
    let base = builtin("step_pitch").unwrap();
    let text = "name = \"printed\"\nduration = 4.0\n[initial]\npitch_deg = -90.0\n\
                [setpoint]\narmed = true\nmode = \"decoupled\"\npitch_deg = 0.0\n\
                [config.gains.decoupled]\nsign_rule = \"printed\"\n";
    let sc = Scenario::from_toml_str(text).unwrap();
    assert_eq!(base.dt, sc.dt);
    let log = run_scenario(&sc).unwrap();
    let last = log.records.last().unwrap().state.euler().pitch.to_degrees();
    assert!(last < -80.0, "printed rule reached {last} deg");

    let physical = Scenario::from_toml_str(&text.replace("sign_rule = \"printed\"\n", "")).unwrap();
    let log = run_scenario(&physical).unwrap();
    let last = log.records.last().unwrap().state.euler().pitch.to_degrees();
    assert!(last.abs() < 3.0, "physical rule reached {last} deg");
}
