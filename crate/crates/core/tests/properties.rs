mod common;

use num_complex::Complex64;
use pmcw_core::codes::{
    circular_shift, generate_p3, periodic_autocorrelation, CodeFamily, CodeSequence,
};
use pmcw_core::compensation::{
    apply_compensation, effective_bandwidth, predicted_attenuation, PnVector,
};
use pmcw_core::dsp::{
    doppler_dft, doppler_idft, periodic_correlate, DopplerWindow, RangeSlowTimeMatrix,
};
use pmcw_core::phasenoise::{modulate, PnMode};
use pmcw_core::scene::delay_to_bin;
use proptest::prelude::*;

use common::{direct_correlation, frame_from_samples, single_line};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| {
        v.into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect()
    })
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn random_rst(len: usize, bursts: usize) -> impl Strategy<Value = RangeSlowTimeMatrix> {
    complex_vec(len * bursts).prop_map(move |samples| {
        let code = generate_p3(len);
        periodic_correlate(&frame_from_samples(samples, len), &code, 2).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_correlation_matches_direct_sum(samples in complex_vec(3 * 24), shift in 0usize..24) {
        let code = circular_shift(&generate_p3(24), shift as i64);
        let frame = frame_from_samples(samples.clone(), 24);
        let rst = periodic_correlate(&frame, &code, 2).unwrap();
        for n in 0..3 {
            let direct = direct_correlation(&samples[n * 24..(n + 1) * 24], code.chips());
            for p in 0..rst.range_bins() {
                prop_assert!(close(rst.values.get(p, n), direct[p], 1e-9));
            }
        }
    }

    #[test]
    fn autocorrelation_magnitude_is_shift_invariant(
        signs in prop::collection::vec(any::<bool>(), 4..24),
        shift in -30i64..30,
    ) {
        let seq = CodeSequence::from_signs(&signs, CodeFamily::Imported).unwrap();
        let a = periodic_autocorrelation(&seq);
        let b = periodic_autocorrelation(&circular_shift(&seq, shift));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn correlation_is_linear(
        a in complex_vec(2 * 16),
        b in complex_vec(2 * 16),
        s in -2.0f64..2.0,
    ) {
        let code = generate_p3(16);
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * s + y).collect();
        let ra = periodic_correlate(&frame_from_samples(a, 16), &code, 2).unwrap();
        let rb = periodic_correlate(&frame_from_samples(b, 16), &code, 2).unwrap();
        let rs = periodic_correlate(&frame_from_samples(sum, 16), &code, 2).unwrap();
        for (i, v) in rs.values.data().iter().enumerate() {
            let expect = ra.values.data()[i] * s + rb.values.data()[i];
            prop_assert!(close(*v, expect, 1e-9));
        }
    }

    #[test]
    fn periodic_delay_peaks_at_its_bin(delay in 0usize..16, bursts in 1usize..4) {
        let code = generate_p3(32);
        let chips = code.chips();
        let samples: Vec<Complex64> = (0..32 * bursts).map(|i| chips[(i + 32 - delay) % 32]).collect();
        let rst = periodic_correlate(&frame_from_samples(samples, 32), &code, 2).unwrap();
        for n in 0..bursts {
            let peak = (0..rst.range_bins())
                .max_by(|&x, &y| rst.values.get(x, n).norm().total_cmp(&rst.values.get(y, n).norm()))
                .unwrap();
            prop_assert_eq!(peak, delay);
            prop_assert!((rst.values.get(delay, n).norm() - 32.0).abs() < 1e-9);
        }
    }

    #[test]
    fn doppler_dft_keeps_row_energy(rst in random_rst(12, 16)) {
        let map = doppler_dft(&rst, DopplerWindow::None);
        let n = rst.bursts() as f64;
        for p in 0..rst.range_bins() {
            let slow: f64 = rst.values.row(p).iter().map(|v| v.norm_sqr()).sum();
            let fast: f64 = map.values.row(p).iter().map(|v| v.norm_sqr()).sum();
            prop_assert!((fast - n * slow).abs() <= 1e-9 * (1.0 + fast));
        }
    }

    #[test]
    fn doppler_idft_inverts_dft(rst in random_rst(12, 8)) {
        let back = doppler_idft(&doppler_dft(&rst, DopplerWindow::None)).unwrap();
        for (a, b) in back.values.data().iter().zip(rst.values.data()) {
            prop_assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn compensation_touches_only_the_given_rows(
        rst in random_rst(16, 6),
        xi in prop::collection::vec(-3.1f64..3.1, 6),
        start in 0usize..8,
        width in 0usize..8,
    ) {
        let end = (start + width).min(rst.range_bins());
        let pn = PnVector { xi: xi.clone(), source_bin: start, rx_id: 1, tx_id: 2 };
        let out = apply_compensation(&rst, &pn, start..end).unwrap();
        for p in 0..rst.range_bins() {
            for n in 0..rst.bursts() {
                let before = rst.values.get(p, n);
                let after = out.values.get(p, n);
                if (start..end).contains(&p) {
                    prop_assert!(close(after, before * Complex64::from_polar(1.0, -xi[n]), 1e-12));
                } else {
                    prop_assert_eq!(after, before);
                }
            }
        }
    }

    #[test]
    fn attenuation_is_bounded(f in 0.0f64..2e8, dt in 0.0f64..5e-7) {
        let a = predicted_attenuation(f, dt);
        prop_assert!(a.factor >= 0.0 && a.factor <= 2.0 + 1e-12);
        if a.effective {
            prop_assert!(a.factor <= 1.0 + 1e-9);
        }
        if f < effective_bandwidth(dt) * (1.0 - 1e-9) {
            prop_assert!(a.effective);
        }
    }

    #[test]
    fn delay_to_bin_is_floor(bins in 0usize..10_000, frac in 0.0f64..0.999) {
        let chip = 1e-9;
        prop_assert_eq!(delay_to_bin(bins as f64 * chip, chip), bins);
        prop_assert_eq!(delay_to_bin((bins as f64 + frac) * chip, chip), bins);
    }

    #[test]
    fn single_line_stays_within_its_amplitude(
        k in 1usize..50,
        alpha in 0.0f64..0.5,
        theta in -3.0f64..3.0,
        t in 0.0f64..1e-5,
    ) {
        let p = single_line(1e-5, k, alpha, theta);
        prop_assert!(p.evaluate_at(t).abs() <= alpha + 1e-12);
        prop_assert!((p.evaluate_at(t) - p.evaluate_at(t + 1e-5)).abs() < 1e-9);
    }

    #[test]
    fn modulation_modes_agree_to_first_order(phi in -1e-3f64..1e-3) {
        let exact = modulate(phi, PnMode::Exact);
        let lin = modulate(phi, PnMode::Linearized);
        prop_assert!((exact.norm() - 1.0).abs() < 1e-12);
        prop_assert!((exact - lin).norm() <= phi * phi);
    }
}
