use mfscale_core::mfdfa::{analyze, decompose, MfdfaConfig, ProfileOrder, ScalingResult};
use mfscale_core::preprocess::split_sign_magnitude;
use mfscale_core::suite::average_tau;
use mfscale_core::surrogate::shuffle;
use mfscale_core::synth::{fgn, gaussian_white, superstat_series, GammaVarianceSpec};

const N: usize = 1 << 16;

fn scaling(series: &mfscale_core::RealSeries) -> ScalingResult {
    analyze(series, &MfdfaConfig::for_length(series.len()).unwrap())
        .unwrap()
        .scaling
}

#[test]
fn fgn_is_monofractal() {
    for (hurst, seed) in [(0.3, 31), (0.5, 32), (0.8, 33)] {
        let s = scaling(&fgn(N, hurst, seed).unwrap());
        assert!(
            (s.h_at(2.0).unwrap() - hurst).abs() < 0.04,
            "H = {hurst}: {:?}",
            s.h
        );
        for (z, h) in s.z.iter().zip(&s.h) {
            assert!((h - hurst).abs() < 0.08, "H = {hurst}, z = {z}: h = {h}");
        }
    }
}

#[test]
fn shuffling_removes_memory() {
    let x = fgn(N, 0.8, 34).unwrap();
    let h2 = scaling(&shuffle(&x, 35).unwrap()).h_at(2.0).unwrap();
    assert!((0.45..=0.55).contains(&h2), "h(2) after shuffle = {h2}");
}

#[test]
fn profile_orders_agree() {
    let x = fgn(N, 0.8, 36).unwrap();
    let mut cfg = MfdfaConfig::for_length(N).unwrap();
    let double = analyze(&x, &cfg).unwrap().scaling.h_at(2.0).unwrap();
    cfg.profile_order = ProfileOrder::Single;
    let single = analyze(&x, &cfg).unwrap().scaling.h_at(2.0).unwrap();
    assert!((double - single).abs() < 0.05, "{double} vs {single}");
}

#[test]
fn tau_is_exactly_constructed_and_well_shaped() {
    let x = fgn(N, 0.6, 37).unwrap();
    let a = analyze(&x, &MfdfaConfig::for_length(N).unwrap()).unwrap();
    let s = &a.scaling;
    for ((z, h), t) in s.z.iter().zip(&s.h).zip(&s.tau) {
        assert_eq!(*t, z * h - 1.0);
    }
    // non-decreasing, concave up to estimation error
    for w in s.tau.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for (i, w) in s.tau.windows(3).enumerate() {
        let bend = w[2] - 2.0 * w[1] + w[0];
        assert!(bend < 3.0 * s.stderr[i + 1].max(1e-3), "bend {bend} at {i}");
    }
    assert_eq!(a.spectrum.diagnostics.tau_shape_violations, 0);
}

#[test]
fn spectrum_peaks_at_one_at_z_zero() {
    for seed in [38, 39] {
        let (y, _) = superstat_series(
            N,
            GammaVarianceSpec {
                gamma: 1.82,
                delta: 2.0,
                seed,
            },
        )
        .unwrap();
        let sp = analyze(&y, &MfdfaConfig::for_length(N).unwrap())
            .unwrap()
            .spectrum;
        let i0 = sp.z.iter().position(|&z| z == 0.0).unwrap();
        assert!((sp.f_alpha[i0] - 1.0).abs() < 1e-12);
        // f = z^2 dh/dz + 1 can only exceed 1 through noise in dh/dz
        let max = sp.f_alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= sp.support_dim + 0.02, "max f = {max}");
        assert!(sp.delta_alpha >= 0.0);
    }
}

#[test]
fn superstat_signs_are_gaussian_null_and_magnitudes_bend() {
    let series: Vec<_> = (40..70)
        .map(|seed| {
            superstat_series(
                N,
                GammaVarianceSpec {
                    gamma: 1.82,
                    delta: 2.0,
                    seed,
                },
            )
            .unwrap()
            .0
        })
        .collect();
    let signs: Vec<ScalingResult> = series
        .iter()
        .map(|y| scaling(&split_sign_magnitude(y).0))
        .collect();
    for s in &signs {
        assert!(s.h.iter().all(|h| (h - 0.5).abs() < 0.08), "{:?}", s.h);
    }
    let avg = average_tau(&signs.iter().collect::<Vec<_>>()).unwrap();
    assert!(avg.max_gaussian_deviation() < 0.05, "{:?}", avg.tau);
    let s = scaling(&series[0]);
    assert!(s.h[s.h.len() - 1] < s.h_at(0.0).unwrap(), "{:?}", s.h);
}

#[test]
fn decomposition_is_closed() {
    let x = fgn(N, 0.7, 41).unwrap();
    let h = scaling(&x);
    let h_shf = scaling(&shuffle(&x, 42).unwrap());
    let white = scaling(&gaussian_white(N, 43));
    let d = decompose(&h, &h_shf, &white).unwrap();
    assert_eq!(d.weight_pdf + d.weight_cor, 1.0);
    for i in 0..d.z.len() {
        assert_eq!(d.h_cor[i], h.h[i] - h_shf.h[i]);
    }
}
