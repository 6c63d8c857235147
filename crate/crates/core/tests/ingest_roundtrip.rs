use aerogp::ingest::{derive_channels, load_flight_csv, LoadOptions, SmoothingConfig};
use aerogp::synth::{simulate, trajectory, ChannelNoise, ManeuverInput, ManeuverProfile};
use aerogp::{RawFlightSeries, TrueLinearModel};

fn rel_rms(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let err = (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt();
    let scale = (b.iter().map(|y| y * y).sum::<f64>() / n).sqrt();
    err / scale
}

fn every_other(s: &RawFlightSeries) -> RawFlightSeries {
    let pick = |v: &Vec<f64>| v.iter().step_by(2).copied().collect::<Vec<_>>();
    RawFlightSeries {
        time: pick(&s.time),
        mach: pick(&s.mach),
        pressure_altitude: pick(&s.pressure_altitude),
        oat: pick(&s.oat),
        p: pick(&s.p),
        q: pick(&s.q),
        r: pick(&s.r),
        alpha: pick(&s.alpha),
        de: pick(&s.de),
        nz: pick(&s.nz),
        tas: None,
        cg: None,
    }
}

/// Writing a simulated flight at 50 Hz, reading it back and resampling to
/// 100 Hz reproduces the simulator's 100 Hz states within interpolation error.
#[test]
fn load_derive_reproduces_simulated_states() {
    let truth = TrueLinearModel::reference().unwrap();
    let mut profile = ManeuverProfile::rollercoaster(60.0, ChannelNoise::default());
    profile.inputs.push(ManeuverInput::FrequencySweep {
        start: 5.0,
        length: 50.0,
        f0_hz: 0.1,
        f1_hz: 1.0,
        amplitude: 0.005,
    });
    profile.dt = 0.01;
    let reference = trajectory(&truth, &profile).unwrap();
    let fine = simulate(&truth, &profile, 3).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flight.csv");
    every_other(&fine)
        .write_csv(std::fs::File::create(&path).unwrap(), Some("roundtrip"))
        .unwrap();
    let loaded = load_flight_csv(&path, &LoadOptions::identity()).unwrap();
    assert_eq!(loaded.report.rows_dropped, 0);
    assert_eq!(loaded.report.rows_in, loaded.report.rows_used);

    let smoothing = SmoothingConfig {
        dt: 0.01,
        qdot_window: 1,
        channel_window: 1,
    };
    let derived = derive_channels(&loaded.series, &smoothing).unwrap();
    assert_eq!(derived.len(), reference.time.len());

    let col = |f: &dyn Fn(&aerogp::StateVector) -> f64| derived.states.iter().map(f).collect::<Vec<_>>();
    let n = derived.len();
    let cond = truth.condition;
    let checks = [
        ("alpha", col(&|s| s.alpha), reference.alpha.clone()),
        ("q", col(&|s| s.q), reference.q.clone()),
        ("de", col(&|s| s.de), reference.de.clone()),
        ("mach", col(&|s| s.mach), vec![cond.mach; n]),
        ("qbar", col(&|s| s.qbar), vec![cond.qbar; n]),
        ("rho", col(&|s| s.rho), vec![cond.rho; n]),
        ("nz", derived.nz.clone(), reference.nz.clone()),
    ];
    for (name, got, want) in checks {
        let e = rel_rms(&got, &want);
        assert!(e < 5e-3, "{name}: relative RMS error {e}");
    }
    // Q̇ from differences of the interpolated pitch rate.
    let e = rel_rms(&derived.qdot, &reference.qdot);
    assert!(e < 1e-2, "qdot: relative RMS error {e}");
}
