//! The scalar reweighting on `x e^-x` data, checked against the same
//! iteration carried out on the continuous density by quadrature.

use mrdesc_core::synth::{sample_gamma2, GAMMA2_MEDIAN};
use mrdesc_core::{iteration_count, robust_scalar_location, Sample};

/// Composite Simpson rule on `[0, upper]`.
fn simpson(f: impl Fn(f64) -> f64, upper: f64, intervals: usize) -> f64 {
    let h = upper / intervals as f64;
    let mut acc = f(0.0) + f(upper);
    for i in 1..intervals {
        let x = i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}

/// `m_1 ..= m_q` of the reweighting scheme applied to the exact density.
fn density_oracle(iterations: usize) -> Vec<f64> {
    let density = |x: f64| x * (-x).exp();
    let mut kernel: Option<(f64, f64)> = None;
    let mut out = Vec::new();
    for _ in 0..iterations {
        let weight = |x: f64| match kernel {
            None => 1.0,
            Some((m, var)) => (-(x - m).powi(2) / (2.0 * var)).exp(),
        };
        let z = simpson(|x| density(x) * weight(x), 60.0, 200_000);
        let m = simpson(|x| x * density(x) * weight(x), 60.0, 200_000) / z;
        let var = simpson(|x| (x - m).powi(2) * density(x) * weight(x), 60.0, 200_000) / z;
        out.push(m);
        kernel = Some((m, var));
    }
    out
}

#[test]
fn oracle_matches_frozen_values() {
    // Frozen from an independent adaptive-quadrature run.
    let frozen = [2.0, 1.772_453_850_905_516_3, 1.638_351_559_813_601, 1.547_920_358_526_872_6];
    let oracle = density_oracle(4);
    for (o, f) in oracle.iter().zip(frozen) {
        assert!((o - f).abs() < 1e-9, "{o} vs {f}");
    }
    // The second location is sqrt(pi) exactly.
    assert!((oracle[1] - std::f64::consts::PI.sqrt()).abs() < 1e-9);
}

#[test]
fn million_samples_follow_the_density_oracle() {
    let samples: Vec<Sample> = sample_gamma2(1_000_000, 2024).into_iter().map(Sample::new).collect();
    let trace = robust_scalar_location(&samples, 20).unwrap();
    let oracle = density_oracle(20);
    for (q, (m, o)) in trace.locations.iter().zip(&oracle).enumerate() {
        assert!((m - o).abs() < 0.01, "q={}: {m} vs {o}", q + 1);
    }
    // The mean starts at 2 and the third location sits just below the median.
    assert!((trace.locations[0] - 2.0).abs() < 0.01);
    assert!(trace.locations[2] < GAMMA2_MEDIAN);
}

#[test]
fn long_run_approaches_the_mode_from_above() {
    let samples: Vec<Sample> = sample_gamma2(1_000_000, 7).into_iter().map(Sample::new).collect();
    let q = iteration_count(samples.len());
    assert_eq!(q, 141);
    let trace = robust_scalar_location(&samples, q).unwrap();
    let last = trace.final_location();
    assert!(last > 1.0 && last < 1.35, "{last}");
    for w in trace.locations[9..].windows(2) {
        assert!(w[1] <= w[0] + 0.005);
    }
}
