mod common;

use vortex_isac::comm::LinkOptions;
use vortex_isac::decode::coupling_diagonal;
use vortex_isac::echo::doppler_phasor;
use vortex_isac::harness::{
    estimate_rows, hmatrix_rows, link_rows, render_csv, run_fingerprint, run_link, run_mc, run_sense, run_sweep,
    run_sweep_trials, selftest, sense_profiles, spectrum_rows, trace_rows, write_csv, Fault, McSpec, PointingSource,
    SweepSpec, ESTIMATE_HEADER, HMATRIX_HEADER, LINK_HEADER, MC_HEADER, SPECTRUM_HEADER, SWEEP_HEADER,
};
use vortex_isac::waveform::PilotKind;
use vortex_isac::{Estimator, EstimatorKind, Scenario, SystemConfig, Target};

fn lines(csv: &str) -> Vec<&str> {
    csv.lines().collect()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn every_table_starts_with_metadata_and_header() {
    let cfg = SystemConfig::table1().with_sensing_symbols(64);
    let hash = run_fingerprint(&cfg, None, "test").unwrap();
    assert_eq!(hash.len(), 64);
    let rows = hmatrix_rows(&cfg, 4, 5.0, 1).unwrap();
    let text = render_csv(&hash, 7, &rows, &HMATRIX_HEADER).unwrap();
    let l = lines(&text);
    assert_eq!(l[0], format!("# config_hash={hash} seed=7"));
    assert_eq!(l[1], "row,col,re,im");
    assert_eq!(l.len(), 2 + 16);

    assert_eq!(
        ESTIMATE_HEADER.join(","),
        "iter,target,sigma_re,sigma_im,r,v,az_deg,el_deg,nmse_db"
    );
    assert_eq!(
        SWEEP_HEADER.join(","),
        "psen,snr_db,angle_err_deg,mean_sinr_db,c_paper,se_avg"
    );
    assert_eq!(
        MC_HEADER.join(","),
        "estimator,snr_db,velocity,trials,pos_err_m,vel_err_mps,az_err_deg,el_err_deg"
    );
    assert_eq!(SPECTRUM_HEADER.join(","), "spectrum,target,x,power_db");
    assert_eq!(LINK_HEADER.join(","), "p,subcarrier,mode,sinr_db");
}

#[test]
fn fingerprint_tracks_inputs() {
    let cfg = SystemConfig::table1();
    let a = run_fingerprint(&cfg, None, "x").unwrap();
    assert_eq!(a, run_fingerprint(&cfg, None, "x").unwrap());
    assert_ne!(a, run_fingerprint(&cfg, None, "y").unwrap());
    assert_ne!(a, run_fingerprint(&cfg.clone().with_snr_db(3.0), None, "x").unwrap());
    assert_ne!(
        a,
        run_fingerprint(&cfg, Some(&Scenario::three_targets(0)), "x").unwrap()
    );
}

#[test]
fn files_match_rendered_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/out/h.csv");
    let cfg = SystemConfig::table1();
    let rows = hmatrix_rows(&cfg, 8, 3.0, 2).unwrap();
    write_csv(&path, "abc", 1, &rows, &HMATRIX_HEADER).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        render_csv("abc", 1, &rows, &HMATRIX_HEADER).unwrap()
    );
}

#[test]
fn coupling_table_diagonal() {
    let cfg = SystemConfig::table1();
    let rows = hmatrix_rows(&cfg, 16, 5.0, 1).unwrap();
    let want = coupling_diagonal(16, doppler_phasor(&cfg, 5.0));
    for r in rows.iter().filter(|r| r.row == r.col) {
        assert!((r.re - want.re).abs() < 1e-13 && (r.im - want.im).abs() < 1e-13);
    }
    assert!(hmatrix_rows(&cfg, 12, 5.0, 1).is_err());
}

#[test]
fn sense_tables() {
    let cfg = SystemConfig::table1().with_sensing_symbols(128);
    let sc = Scenario::three_targets(0);
    let est = Estimator::new(&cfg, EstimatorKind::CdmmVcmEm, PilotKind::Unit, 0).unwrap();
    let run = run_sense(&est, &cfg, &sc.targets, 0).unwrap();
    let final_rows = estimate_rows(&run);
    assert_eq!(final_rows.len(), 3);
    for (q, row) in final_rows.iter().enumerate() {
        assert_eq!(row.target, q);
        assert!((row.r - sc.targets[q].range).abs() < 1.0, "{row:?}");
    }
    let trace = trace_rows(&run);
    assert_eq!(trace.len(), 3 * run.outcome.trace.len());
    assert_eq!(trace[0].iter, 0);

    let spectra = spectrum_rows(&sense_profiles(&est, &run).unwrap());
    for name in ["range", "velocity", "azimuth", "elevation"] {
        for q in 0..3 {
            let peak = spectra
                .iter()
                .filter(|r| r.spectrum == name && r.target == q)
                .map(|r| r.power_db)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(peak.abs() < 1e-9, "{name} {q}");
        }
    }
    // The range spectrum peaks at the estimated range.
    let best = spectra
        .iter()
        .filter(|r| r.spectrum == "range" && r.target == 0)
        .max_by(|a, b| a.power_db.total_cmp(&b.power_db))
        .unwrap();
    assert!((best.x - final_rows[0].r).abs() < 0.5);
}

#[test]
fn static_noiseless_sense_is_on_grid() {
    let mut cfg = SystemConfig::table1().with_sensing_symbols(64);
    cfg.snr_db = 300.0;
    let est = Estimator::new(&cfg, EstimatorKind::CdmmVcmEm, PilotKind::Unit, 0).unwrap();
    let t = Target::from_degrees(40.0, 30.0, 40.0, 0.0);
    let run = run_sense(&est, &cfg, &[t], 3).unwrap();
    let e = run.errors[0];
    assert!(e.position < 5e-3 && e.velocity < 1e-9 && e.elevation == 0.0, "{e:?}");
}

#[test]
fn link_tables() {
    let cfg = SystemConfig::table1().with_sensing_symbols(1000);
    let sc = Scenario::three_targets(0);
    let est = Estimator::new(&cfg, EstimatorKind::CdmmVcmEm, PilotKind::Unit, 0).unwrap();
    let opts = LinkOptions::new(15.0);
    let truth = run_link(&est, &cfg, &sc, 0, PointingSource::Truth, &opts).unwrap();
    assert!(truth.sense.is_none());
    assert_eq!(truth.angle_error, 0.0);
    let rows = link_rows(&truth.report);
    assert_eq!(rows.len(), 24 * 16);
    assert_eq!(rows[0].p, 1001);
    let bore = run_link(&est, &cfg, &sc, 0, PointingSource::Boresight, &opts).unwrap();
    assert!(bore.report.se_avg < truth.report.se_avg);
    assert!((bore.angle_error - sc.targets[0].elevation).abs() < 1e-12);
    for s in ["sensed", "truth", "boresight"] {
        assert_eq!(s.parse::<PointingSource>().unwrap().to_string(), s);
    }
    assert!("north".parse::<PointingSource>().is_err());
}

#[test]
fn mc_rows_and_thread_independence() {
    let cfg = SystemConfig::table1().with_sensing_symbols(32);
    let spec = McSpec {
        estimators: vec![EstimatorKind::CdmmVcmEm, EstimatorKind::TdmmBaseline],
        snrs_db: vec![10.0],
        velocities: vec![0.0, 4.0],
        trials: 3,
        seed: 5,
        pilots: PilotKind::Unit,
    };
    let one = in_pool(1, || run_mc(&cfg, &spec).unwrap());
    let three = in_pool(3, || run_mc(&cfg, &spec).unwrap());
    assert_eq!(one.len(), 4);
    assert_eq!(one[0].estimator, "cdmm-vcmem");
    assert_eq!(one[3].velocity, 4.0);
    let text = |rows| render_csv("h", 5, rows, &MC_HEADER).unwrap();
    assert_eq!(text(&one), text(&three));
    assert!(run_mc(&cfg, &McSpec { trials: 0, ..spec }).is_err());
}

#[test]
fn sweep_edges_and_thread_independence() {
    let cfg = SystemConfig::table1();
    let mut spec = SweepSpec::new(cfg.num_symbols_per_cpi);
    assert_eq!(*spec.psens.last().unwrap(), 1024);
    spec.psens = vec![8, 32, 1024];
    spec.trials = 2;
    let one = in_pool(1, || run_sweep(&cfg, &spec).unwrap());
    let two = in_pool(2, || run_sweep(&cfg, &spec).unwrap());
    assert_eq!(
        render_csv("h", 0, &one, &SWEEP_HEADER).unwrap(),
        render_csv("h", 0, &two, &SWEEP_HEADER).unwrap()
    );
    assert_eq!(one[2].se_avg, 0.0);
    assert_eq!(one[2].c_paper, 0.0);
    // Too few pilots to decode: boresight beams and a large angle error.
    assert!(one[0].angle_err_deg > 5.0);
    assert!(one[1].angle_err_deg < 1.0);
    assert!(one[1].se_avg > one[0].se_avg);

    let cells = run_sweep_trials(&cfg, &spec).unwrap();
    assert_eq!(cells.len(), 3);
    assert!(cells.iter().all(|c| c.trials.len() == 2));
    assert_eq!(cells.iter().map(|c| c.row()).collect::<Vec<_>>(), one);
}

#[test]
fn selftest_report() {
    let cfg = SystemConfig::table1();
    let checks = selftest(&cfg, None);
    assert!(checks.len() >= 5);
    assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    let broken = selftest(&cfg, Some(Fault::FlippedCompensation));
    let failed: Vec<&str> = broken.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("matched"), "{failed:?}");
}
