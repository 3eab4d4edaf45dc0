mod common;

use common::{interference_spacing, measured_notch_spacing, record};
use echogeo_core::cochlea::*;
use echogeo_core::dsp;
use echogeo_core::echo::{Broadcast, Window};
use echogeo_core::TimeSeries;
use proptest::prelude::*;
use rustfft::FftPlanner;

fn pipeline() -> CochleagramPipeline {
    CochleagramPipeline::default()
}

#[test]
fn every_channel_is_stable() {
    let filters = FilterbankSpec::default().design().unwrap();
    assert_eq!(filters.len(), 161);
    for f in &filters {
        for s in &f.sections {
            assert!(s.poles().iter().all(|p| p.norm() < 1.0), "unstable at {} Hz", f.center_freq);
        }
    }
}

#[test]
fn peak_response_sits_at_the_centre_frequency() {
    let spec = FilterbankSpec::default();
    for cf in [20e3, 60e3, 100e3] {
        let f = design_dapgf(cf, &spec).unwrap();
        let grid = (0..=100_000).map(|k| 0.5 * cf + k as f64 * 10.0).take_while(|&x| x <= 1.5 * cf);
        let peak = grid.max_by(|a, b| f.magnitude(*a).total_cmp(&f.magnitude(*b))).unwrap();
        assert!((peak / cf - 1.0).abs() < 0.05, "cf {cf}: peak at {peak}");
        assert!(f.magnitude(0.0) < 1e-12);
    }
}

#[test]
fn cascade_narrows_the_band() {
    let cf = 60e3;
    let f = design_dapgf(cf, &FilterbankSpec::default()).unwrap();
    let grid: Vec<f64> = (0..=60_000).map(|k| 30e3 + k as f64).collect();
    let mags: Vec<f64> = grid.iter().map(|&x| f.magnitude(x)).collect();
    let top = mags.iter().copied().fold(0.0, f64::max);
    let half_power = top / 2f64.sqrt();
    let inside: Vec<f64> = grid.iter().zip(&mags).filter(|(_, &m)| m >= half_power).map(|(x, _)| *x).collect();
    let bw = inside.last().unwrap() - inside.first().unwrap();
    assert!(bw < cf / 15.0, "bandwidth {bw}");
    assert!(bw > 0.2 * cf / 15.0, "bandwidth {bw}");
}

#[test]
fn tone_lights_its_own_channel() {
    let spec = FilterbankSpec::default();
    let x: Vec<f64> = (0..4000).map(|n| (2.0 * std::f64::consts::PI * 60e3 * n as f64 / 1e6).sin()).collect();
    let bank = filterbank_apply(&TimeSeries::new(x, 1e6).unwrap(), &spec).unwrap();
    let rms: Vec<f64> = bank.channels.iter().map(|c| dsp::rms(&c[2000..])).collect();
    let best = dsp::argmax(&rms).unwrap();
    assert_eq!(bank.center_freqs[best], 60e3);
}

#[test]
fn chirp_reaches_lower_channels_later() {
    let b = Broadcast::new(3e-3, Window::Welch).unwrap();
    let mut x = b.samples.clone();
    x.resize(6000, 0.0);
    let bank = filterbank_apply(&TimeSeries::new(x, 1e6).unwrap(), &FilterbankSpec::default()).unwrap();
    let mut planner = FftPlanner::new();
    let peaks: Vec<usize> =
        bank.channels.iter().map(|c| dsp::argmax(&dsp::analytic_envelope(&mut planner, c)).unwrap()).collect();
    assert!(peaks.windows(2).all(|w| w[0] > w[1]), "{peaks:?}");
}

#[test]
fn sample_rate_mismatch_is_rejected() {
    let ts = TimeSeries::new(vec![0.0; 512], 5e5).unwrap();
    assert!(filterbank_apply(&ts, &FilterbankSpec::default()).is_err());
}

#[test]
fn silence_stays_silent() {
    let ts = TimeSeries::new(vec![0.0; 512], 1e6).unwrap();
    let bank = filterbank_apply(&ts, &FilterbankSpec::default()).unwrap();
    assert!(bank.channels.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn corrected_delays_agree_across_channels() {
    let ts = record(&[0.0], 3e-3, None, 1);
    let bank = filterbank_apply(&ts, &FilterbankSpec::default()).unwrap();
    let x = detect_crossings(&bank, &CrossingConfig::default()).unwrap();
    let d: Vec<i64> = x.delays().into_iter().flatten().collect();
    assert_eq!(d.len(), 161);
    let spread = d.iter().max().unwrap() - d.iter().min().unwrap();
    assert!(spread <= 16, "spread {spread}");
}

#[test]
fn broadcast_alone_has_no_echo() {
    let b = Broadcast::new(3e-3, Window::Welch).unwrap();
    let mut x = b.samples.clone();
    x.resize(9000, 0.0);
    let bank = filterbank_apply(&TimeSeries::new(x, 1e6).unwrap(), &FilterbankSpec::default()).unwrap();
    let t = detect_crossings(&bank, &CrossingConfig::default()).unwrap();
    assert!(t.echo_raw.iter().all(Option::is_none));
    assert!(t.echo.iter().all(Option::is_none));
    assert!(dechirp(&bank, &t, 100e3).is_err());
}

#[test]
fn threshold_above_the_peak_finds_nothing() {
    let ts = record(&[0.0], 1e-3, None, 1);
    let bank = filterbank_apply(&ts, &FilterbankSpec::default()).unwrap();
    let cfg = CrossingConfig { threshold: Threshold::Absolute { level: 1e6 }, ..CrossingConfig::default() };
    let t = detect_crossings(&bank, &cfg).unwrap();
    assert!(t.broadcast_raw.iter().chain(&t.echo_raw).all(Option::is_none));
}

#[test]
fn dechirped_onsets_line_up() {
    let ts = record(&[0.0], 3e-3, None, 1);
    let p = pipeline();
    let bank = filterbank_apply(&ts, &p.filterbank).unwrap();
    let x = detect_crossings(&bank, &p.crossings).unwrap();
    let aligned = dechirp(&bank, &x, 100e3).unwrap();
    let reference = aligned.aligned_onset.unwrap() as i64;
    let shifts = crossings::shifts(&x, reference as usize);
    let blank = (p.crossings.blanking_s * 1e6) as usize;
    let mut planner = FftPlanner::new();
    // Channels within one nominal bandwidth (cf/Q) of the sweep edges see
    // only part of their passband excited and are left out.
    let q = p.filterbank.q;
    let inner: Vec<usize> = (0..bank.n_channels())
        .filter(|&c| {
            let cf = bank.center_freqs[c];
            cf * (1.0 - 1.0 / q) >= 20e3 && cf * (1.0 + 1.0 / q) <= 100e3
        })
        .collect();
    assert!(inner.len() > 140);
    // Each channel's echo onset is its broadcast crossing moved by the lag
    // that best matches the echo envelope to the broadcast envelope, then
    // moved by the dechirp shift.
    let offsets: Vec<i64> = inner
        .iter()
        .map(|&c| {
            let env = dsp::analytic_envelope(&mut planner, &bank.channels[c]);
            let b = x.broadcast[c].unwrap();
            let mut call = env.clone();
            call[b + blank..].iter_mut().for_each(|v| *v = 0.0);
            let mut echo = env;
            echo[..b + blank].iter_mut().for_each(|v| *v = 0.0);
            let corr = dsp::cross_correlate(&mut planner, &echo, &call);
            let lag = dsp::argmax(&corr).unwrap() as i64;
            b as i64 + lag - shifts[c].unwrap() - reference
        })
        .collect();
    assert!(offsets.iter().all(|o| o.abs() <= 16), "onset offsets {offsets:?}");
}

#[test]
fn frame_arithmetic() {
    assert_eq!(frame_count(2128, 128, 8), 251);
    let ts = record(&[0.0], 1e-3, Some(20.0), 2);
    let cg = pipeline().run(&ts).unwrap();
    assert_eq!(cg.time_bin, 8e-6);
    assert_eq!((cg.n_channels, cg.n_bins), (161, 250));
    assert_eq!(cg.min_max(), (-1.0, 1.0));
}

#[test]
fn notch_spacing_follows_glint_spacing() {
    let p = pipeline();
    for d in [0.010, 0.020, 0.035, 0.050] {
        let cg = p.run(&record(&[0.0, d], 3e-3, Some(20.0), 5)).unwrap();
        let got = measured_notch_spacing(&cg).unwrap();
        let want = interference_spacing(d);
        assert!((got / want - 1.0).abs() < 0.10, "d {d}: {got} Hz vs {want} Hz");
    }
}

/// Interior minima of a column profile that sit at least `depth` below the
/// highest point on each side within `reach` channels.
fn notches(prof: &[f64], reach: usize, depth: f64) -> usize {
    (reach..prof.len() - reach)
        .filter(|&i| {
            let left = prof[i - reach..i].iter().copied().fold(f64::MIN, f64::max);
            let right = prof[i + 1..=i + reach].iter().copied().fold(f64::MIN, f64::max);
            let lowest = prof[i - reach..=i + reach].iter().all(|&v| v >= prof[i]);
            lowest && left - prof[i] > depth && right - prof[i] > depth
        })
        .count()
}

#[test]
fn single_glint_has_no_notch() {
    let p = pipeline();
    let count = |offsets: &[f64]| {
        let cg = p.run(&record(offsets, 3e-3, None, 5)).unwrap();
        notches(&ripple_profile(&cg, 50..150), 4, 0.05)
    };
    assert_eq!(count(&[0.0]), 0);
    // 4.9 kHz ripple over the 80 kHz band
    assert!(count(&[0.0, 0.035]) >= 12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dechirp_is_a_pure_shift(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 40), 3),
        echo in prop::collection::vec(0usize..40, 3),
    ) {
        let bank = ChannelBankOutput {
            center_freqs: vec![99e3, 99.5e3, 100e3],
            sample_rate: 1e6,
            channels: rows.clone(),
            crossings: None,
            aligned_onset: None,
        };
        let table = CrossingTable {
            broadcast_raw: vec![Some(0); 3],
            echo_raw: echo.iter().map(|&e| Some(e)).collect(),
            broadcast: vec![Some(0); 3],
            echo: echo.iter().map(|&e| Some(e)).collect(),
            broadcast_threshold: vec![1.0; 3],
            echo_threshold: vec![1.0; 3],
            median_delay: Some(0.0),
        };
        let out = dechirp(&bank, &table, 100e3).unwrap();
        let r = echo[2] as i64;
        for (c, row) in rows.iter().enumerate() {
            let shift = echo[c] as i64 - r;
            for i in 0..40i64 {
                let src = i + shift;
                let want = if (0..40).contains(&src) { row[src as usize] } else { 0.0 };
                prop_assert_eq!(out.channels[c][i as usize], want);
            }
        }
    }

    #[test]
    fn normalization_is_idempotent(values in prop::collection::vec(-50.0f64..50.0, 12)) {
        prop_assume!(values.iter().any(|&v| v != values[0]));
        let cg = Cochleagram::new(3, 4, values, 8e-6, vec![1.0, 2.0, 3.0]).unwrap();
        let once = cg.normalized();
        let twice = once.normalized();
        let (lo, hi) = once.min_max();
        prop_assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        for (a, b) in once.values.iter().zip(&twice.values) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn filterbank_is_linear(
        x in prop::collection::vec(-1.0f64..1.0, 64),
        y in prop::collection::vec(-1.0f64..1.0, 64),
        a in -3.0f64..3.0,
    ) {
        let spec = FilterbankSpec { f_low: 40e3, f_high: 41e3, ..FilterbankSpec::default() };
        let run = |s: Vec<f64>| filterbank_apply(&TimeSeries::new(s, 1e6).unwrap(), &spec).unwrap().channels;
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let (fx, fy, fm) = (run(x), run(y), run(mix));
        for c in 0..fm.len() {
            for i in 0..64 {
                prop_assert!((fm[c][i] - (a * fx[c][i] + fy[c][i])).abs() < 1e-9);
            }
        }
    }
}
