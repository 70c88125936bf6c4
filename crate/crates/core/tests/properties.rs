//! Property tests for the simulator and dataset plumbing.

use proptest::prelude::*;

use srce_core::dataset::{complex_to_planes, planes_to_complex};
use srce_core::estimators::{interpolate_full, ls_pilot_estimate, PilotEstimate};
use srce_core::nalgebra::DMatrix;
use srce_core::num_complex::Complex64;
use srce_core::ofdm::ChannelMatrix;

fn finite_f64() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plane_roundtrip_is_bit_exact(
        rows in 1usize..12,
        cols in 1usize..12,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = srce_core::seeds::rng(seed);
        let h = ChannelMatrix::new(DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() * 10.0 - 5.0, rng.gen::<f64>() * 10.0 - 5.0)
        }));
        let back = planes_to_complex(&complex_to_planes(&h)).unwrap();
        prop_assert_eq!(back.data, h.data);
    }

    #[test]
    fn spline_passes_through_pilots(values in prop::collection::vec((finite_f64(), finite_f64()), 4..12)) {
        // Clamp to a sane range; pathological magnitudes are not channel data.
        let values: Vec<Complex64> = values
            .iter()
            .map(|(r, i)| Complex64::new(r.clamp(-1e3, 1e3), i.clamp(-1e3, 1e3)))
            .collect();
        let stride = 4;
        let est = PilotEstimate {
            positions: (0..values.len()).map(|i| i * stride).collect(),
            values,
        };
        let n = est.positions.last().unwrap() + stride;
        let full = interpolate_full(&est, n).unwrap();
        for (&p, v) in est.positions.iter().zip(&est.values) {
            prop_assert!((full[p] - v).norm() <= 1e-12 * (1.0 + v.norm()),
                "pilot {} drifted: {} vs {}", p, full[p], v);
        }
    }

    #[test]
    fn ls_division_inverts_known_products(
        h_parts in prop::collection::vec((finite_f64(), finite_f64()), 1..16),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = srce_core::seeds::rng(seed);
        let h: Vec<Complex64> = h_parts
            .iter()
            .map(|(r, i)| Complex64::new(r.clamp(-100.0, 100.0), i.clamp(-100.0, 100.0)))
            .collect();
        // Unit-modulus pilots with random phases.
        let tx: Vec<Complex64> = (0..h.len())
            .map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU))
            .collect();
        let rx: Vec<Complex64> = h.iter().zip(&tx).map(|(a, b)| a * b).collect();
        let positions: Vec<usize> = (0..h.len()).collect();
        let est = ls_pilot_estimate(&rx, &tx, &positions).unwrap();
        for (got, want) in est.values.iter().zip(&h) {
            prop_assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
        }
    }
}
