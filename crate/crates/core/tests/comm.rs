mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use vortex_isac::comm::{
    approx_distance, beam_weights, boresight, detect, dft_rx, dft_tx, diagonal_approx, diagonal_direct,
    diagonal_series, effective_channel, exact_distance, leakage_ratio, link_noise_variance, link_report, los_channel,
    mode_sinr, moving_range, tau, to_db, ChannelModel, LinkOptions, Pointing, SINR_FLOOR_DB,
};
use vortex_isac::waveform::ModeSet;
use vortex_isac::{Complex64, SystemConfig, Target};

/// `N² Σ_{q ≡ ℓ (mod N)} i^q J_q(a)` times the common factor, from the
/// Jacobi–Anger expansion of `e^{ia cos δ}`.
fn jacobi_anger_diagonal(cfg: &SystemConfig, mode: i32, r: f64, k: f64) -> Complex64 {
    let n = cfg.num_rx_antennas as i32;
    let a = k * cfg.tx_radius * cfg.comm_rx_radius / r;
    let sum: Complex64 = (-4..=4)
        .map(|j| {
            let q = mode + j * n;
            Complex64::i().powi(q) * common::bessel_series(q, a)
        })
        .sum();
    Complex64::from_polar(cfg.antenna_constant / (2.0 * k * r), -k * r) * sum * (n * n) as f64
}

#[test]
fn element_distances_match_geometry() {
    let cfg = SystemConfig::table1();
    for t in [
        Target::from_degrees(60.0, 20.0, 25.0, 3.0),
        Target::from_degrees(0.2, 250.0, 80.0, -10.0),
    ] {
        for p in [1, 77, 1024] {
            let r = moving_range(&cfg, t.range, t.radial_velocity, p);
            assert!((r - (t.range + (p - 1) as f64 * cfg.symbol_duration * t.radial_velocity)).abs() < 1e-12);
            for n in [0, 3, 15] {
                for m in [0, 8, 11] {
                    let d = exact_distance(&cfg, &t, p, n, m).unwrap();
                    assert!((d - common::element_distance(&cfg, &t, r, n, m)).abs() < 1e-12 * r.max(1.0));
                }
            }
        }
    }
}

#[test]
fn far_field_distance_converges() {
    let cfg = SystemConfig::table1();
    let mut last = f64::INFINITY;
    for r in [1.0, 10.0, 100.0, 1e3, 1e6] {
        let t = Target::from_degrees(r, 40.0, 30.0, 0.0);
        let err = (0..16)
            .flat_map(|n| (0..16).map(move |m| (n, m)))
            .map(|(n, m)| (exact_distance(&cfg, &t, 1, n, m).unwrap() - approx_distance(&cfg, &t, 1, n, m)).abs())
            .fold(0.0, f64::max);
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-9);
    let t = Target::from_degrees(60.0, 40.0, 30.0, 0.0);
    assert!((exact_distance(&cfg, &t, 1, 2, 5).unwrap() - approx_distance(&cfg, &t, 1, 2, 5)).abs() < 1e-4);
}

#[test]
fn channel_models() {
    let cfg = SystemConfig::table1();
    let t = Target::from_degrees(60.0, 20.0, 25.0, 3.0);
    let k = cfg.wavenumber(3);
    let exact = los_channel(&cfg, &t, 200, 3, ChannelModel::Exact).unwrap();
    let far = los_channel(&cfg, &t, 200, 3, ChannelModel::FarField).unwrap();
    let r = moving_range(&cfg, t.range, t.radial_velocity, 200);
    for n in 0..16 {
        for m in 0..16 {
            let d = common::element_distance(&cfg, &t, r, n, m);
            let want = Complex64::from_polar(1.0 / (2.0 * k * d), -k * d);
            assert!((exact[(n, m)] - want).norm() < 1e-6 * want.norm());
            assert!((far[(n, m)] - want).norm() < 1e-2 * want.norm());
        }
    }
}

#[test]
fn aligned_channel_is_mode_diagonal() {
    let cfg = SystemConfig::table1();
    let modes = ModeSet::centered(16);
    let t = Target {
        range: 60.0,
        azimuth: 0.0,
        elevation: 0.0,
        radial_velocity: 0.0,
        reflectivity: 1.0,
    };
    let h = los_channel(&cfg, &t, 1, 0, ChannelModel::FarField).unwrap();
    let heff = effective_channel(&h, &modes, None).unwrap();
    assert!(to_db(leakage_ratio(&heff)) < -200.0);
    let k = cfg.wavenumber(0);
    // Every entry carries a kr ≈ 1e5 rad phase, which puts a ~1e-11 floor
    // under the product; high modes sit far below it, so compare against the
    // zero-mode scale.
    let scale = heff[(8, 8)].norm();
    for u in 0..16 {
        let want = jacobi_anger_diagonal(&cfg, modes.get(u), 60.0, k);
        assert!(
            (heff[(u, u)] - want).norm() < 1e-10 * scale,
            "mode {} off by {:e}",
            modes.get(u),
            (heff[(u, u)] - want).norm() / scale
        );
    }
    assert!((heff[(8, 8)] - jacobi_anger_diagonal(&cfg, 0, 60.0, k)).norm() < 1e-10 * scale);
}

#[test]
fn diagonal_expansions_against_jacobi_anger() {
    let mut cfg = SystemConfig::table1();
    let k = cfg.wavenumber(0);
    for &r in &[60.0, 30.0] {
        for ell in -8..=7 {
            let want = jacobi_anger_diagonal(&cfg, ell, r, k);
            let series = diagonal_series(&cfg, ell, r, k, 40);
            assert!((series - want).norm() < 1e-10 * want.norm(), "series ℓ={ell}");
            if ell.abs() < 8 {
                // Leading-order term only; with |ℓ| = N/2 two aliases are equally large.
                let approx = diagonal_approx(&cfg, ell, r, k);
                assert!((approx - want).norm() < 0.05 * want.norm(), "approx ℓ={ell}");
            }
        }
    }
    // The direct sum is usable where the diagonal is not buried in rounding.
    cfg.tx_radius *= 30.0;
    cfg.comm_rx_radius *= 30.0;
    for ell in -8..=7 {
        let want = jacobi_anger_diagonal(&cfg, ell, 5.0, k);
        assert!((diagonal_direct(&cfg, ell, 5.0, k) - want).norm() < 1e-9 * want.norm().max(1e-12));
    }
}

#[test]
fn leading_order_index() {
    assert_eq!(tau(0, 16), 0);
    assert_eq!(tau(-3, 16), 3);
    assert_eq!(tau(7, 16), 7);
    assert_eq!(tau(-8, 16), 8);
    assert_eq!(tau(12, 16), 4);
}

#[test]
fn mode_generators() {
    let modes = ModeSet::centered(16);
    let prod = dft_rx(&modes, 16) * dft_tx(&modes, 16);
    assert!(common::max_abs_diff(&prod, &(DMatrix::identity(16, 16) * Complex64::new(16.0, 0.0))) < 1e-12);
}

#[test]
fn steering_suppresses_leakage() {
    let cfg = SystemConfig::table1();
    let modes = ModeSet::centered(16);
    let t = Target::from_degrees(51.0, 15.0, 25.0, 5.0);
    let p = 129;
    let h = los_channel(&cfg, &t, p, 0, ChannelModel::FarField).unwrap();
    let w = beam_weights(&cfg, &modes, &Pointing::from(&t), p, 0);
    let plain = to_db(leakage_ratio(&effective_channel(&h, &modes, None).unwrap()));
    let steered = to_db(leakage_ratio(&effective_channel(&h, &modes, Some(&w)).unwrap()));
    assert!(plain - steered >= 30.0, "plain {plain:.1} dB, steered {steered:.1} dB");
}

#[test]
fn steered_detection_recovers_low_modes() {
    let cfg = SystemConfig::table1();
    let modes = ModeSet::centered(16);
    let s = DVector::from_fn(16, |u, _| Complex64::from_polar(1.0, 0.3 + u as f64));
    for t in [
        Target::from_degrees(60.0, 20.0, 25.0, 3.0),
        Target::from_degrees(30.0, 60.0, 70.0, -3.0),
    ] {
        for p in [129, 700] {
            let h = los_channel(&cfg, &t, p, 0, ChannelModel::FarField).unwrap();
            let w = beam_weights(&cfg, &modes, &Pointing::from(&t), p, 0);
            let got = detect(&h, &modes, &w, &s, None).unwrap();
            for u in 0..16 {
                if modes.get(u).abs() <= 2 {
                    assert!(((got[u] - s[u]) / s[u]).norm() < 0.01, "mode {}", modes.get(u));
                }
            }
        }
    }
}

#[test]
fn sinr_of_a_clean_diagonal_is_the_noise_limit() {
    let cfg = SystemConfig::table1();
    let modes = ModeSet::centered(16);
    let t = Target {
        range: 40.0,
        azimuth: 0.0,
        elevation: 0.0,
        radial_velocity: 0.0,
        reflectivity: 1.0,
    };
    let h = los_channel(&cfg, &t, 1, 0, ChannelModel::FarField).unwrap();
    let w = beam_weights(&cfg, &modes, &boresight(&t), 1, 0);
    let sigma2 = link_noise_variance(&cfg, &t, 15.0);
    let sinr = mode_sinr(&h, &modes, &w, sigma2).unwrap();
    // Zero mode: the leakage is nil, leaving |λ|²/(Nσ²).
    let lam = w.lambda[8];
    let want = lam.norm_sqr() / (16.0 * sigma2);
    assert!((sinr[8] / want - 1.0).abs() < 1e-9);
    assert!((sigma2 - (1.0 / (2.0 * cfg.wavenumber(0) * 40.0)).powi(2) * 10f64.powf(-1.5)).abs() < 1e-20);
}

#[test]
fn sinr_falls_with_pointing_error() {
    let cfg = SystemConfig::table1();
    let t = Target::from_degrees(60.0, 20.0, 25.0, 3.0);
    let opts = LinkOptions::new(15.0);
    for axis in 0..2 {
        let mut last = f64::INFINITY;
        for d in [0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0f64] {
            let mut pt = Pointing::from(&t);
            if axis == 0 {
                pt.azimuth += d.to_radians();
            } else {
                pt.elevation += d.to_radians();
            }
            let r = link_report(&cfg, &t, Some(pt), 1000, &opts).unwrap();
            assert!(r.mean_sinr_db < last, "axis {axis}, δ = {d}°");
            last = r.mean_sinr_db;
        }
    }
}

#[test]
fn report_bookkeeping() {
    let cfg = SystemConfig::table1();
    let t = Target::from_degrees(60.0, 20.0, 25.0, 3.0);
    let opts = LinkOptions {
        subcarriers: vec![0, 64, 127],
        ..LinkOptions::new(15.0)
    };
    let r = link_report(&cfg, &t, Some(Pointing::from(&t)), 1000, &opts).unwrap();
    assert_eq!(r.entries.len(), 24 * 3 * 16);
    assert_eq!(r.entries[0].symbol, 1001);
    assert_eq!(r.entries.last().unwrap().subcarrier, 127);
    let bits: f64 = r.entries.iter().map(|e| (1.0 + e.sinr).log2()).sum();
    let disc = 1.0 - 1000.0 / 1024.0;
    assert!((r.c_paper - disc * bits / 3.0).abs() < 1e-9 * r.c_paper);
    assert!((r.se_avg - disc * bits / r.entries.len() as f64).abs() < 1e-12);
    assert!(r.sensing_available);

    let none = link_report(&cfg, &t, None, 8, &LinkOptions::new(15.0)).unwrap();
    assert!(!none.sensing_available);
    assert!(link_report(&cfg, &t, None, 1025, &LinkOptions::new(15.0)).is_err());
    let bad = LinkOptions {
        subcarriers: vec![128],
        ..LinkOptions::new(15.0)
    };
    assert!(link_report(&cfg, &t, None, 8, &bad).is_err());
    assert_eq!(to_db(0.0), SINR_FLOOR_DB);
    assert_eq!(to_db(1e-40), SINR_FLOOR_DB);
    assert!((to_db(100.0) - 20.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn exact_distance_is_euclidean(r in 1.0..200.0f64, az in 0.0..360.0f64, el in 1.0..89.0f64, n in 0usize..16, m in 0usize..16) {
        let cfg = SystemConfig::table1();
        let t = Target::from_degrees(r, az, el, 0.0);
        let d = exact_distance(&cfg, &t, 1, n, m).unwrap();
        prop_assert!((d - common::element_distance(&cfg, &t, r, n, m)).abs() < 1e-11 * r);
    }

    #[test]
    fn far_field_amplitude_is_common(r in 5.0..200.0f64, az in 0.0..360.0f64, el in 1.0..89.0f64, p in 1usize..1024) {
        let cfg = SystemConfig::table1();
        let t = Target::from_degrees(r, az, el, 2.0);
        let h = los_channel(&cfg, &t, p, 5, ChannelModel::FarField).unwrap();
        let want = 1.0 / (2.0 * cfg.wavenumber(5) * moving_range(&cfg, r, 2.0, p));
        prop_assert!(h.iter().all(|z| (z.norm() - want).abs() < 1e-12 * want));
    }
}
