use proptest::prelude::*;

use sgdlab_core::diagnostics::{
    gradient_convergence_stats, simulate_ensemble, stopping_times_of_values, AnalysisOptions, CaptureSpec,
    DichotomyVerdict, EnsembleSpec,
};
use sgdlab_core::engine::{ParameterVector, Schedule};
use sgdlab_core::objectives::{NoiseModel, Objective, StochasticOracle};

fn pv(v: &[f64]) -> ParameterVector {
    ParameterVector::new(v.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn stopping_times_invariants(f in prop::collection::vec(-5.0f64..20.0, 1..300)) {
        let st = stopping_times_of_values(&f).unwrap();
        prop_assert_eq!(st.taus[0], 0);
        for w in st.taus.windows(2) {
            prop_assert!(w[1] > w[0]);
            prop_assert!(f[w[1] as usize] > f[w[0] as usize] + 1.0);
        }
        prop_assert!(st.tau_geq_k);
    }

    #[test]
    fn verdicts_partition_and_respect_evidence(seed in any::<u64>(), eps in 0.01f64..1.0, r_div in 0.5f64..5.0) {
        let spec = EnsembleSpec {
            oracle: StochasticOracle::new(Objective::smooth_rectifier(1), NoiseModel::AdditiveGaussian { sigma: 0.5 }).unwrap(),
            schedule: Schedule::scalar_power(1.0, 0.75, 1.0, 1).unwrap(),
            theta0: pv(&[0.0]),
            horizon: 500,
            n_trajectories: 12,
            master_seed: seed,
            record_stride: 5,
            capture: None,
        };
        let ens = simulate_ensemble(&spec).unwrap();
        let opts = AnalysisOptions { window: 100, epsilon_conv: eps, r_div, gammas: vec![0.5] };
        let classes = ens.classify(&opts).unwrap();
        prop_assert_eq!(classes.len(), 12);
        for c in &classes {
            let e = c.evidence;
            match c.verdict {
                DichotomyVerdict::ConvergedLike => prop_assert!(e.range < eps && e.max_norm < r_div),
                DichotomyVerdict::DivergingLike => prop_assert!(e.min_norm > r_div),
                DichotomyVerdict::Undecided => prop_assert!(!(e.range < eps && e.max_norm < r_div) && e.min_norm <= r_div),
            }
        }
        let rep = gradient_convergence_stats(&ens, &[0.0, 0.5]).unwrap();
        for c in &rep.checkpoints {
            for s in [c.f_gap, c.grad_norm, c.grad_norm_sq] {
                prop_assert!(s.q25 <= s.median && s.median <= s.q75);
            }
        }
    }
}

#[test]
fn escape_frequencies_respect_the_markov_tail() {
    let spec = EnsembleSpec {
        oracle: StochasticOracle::new(Objective::quadratic(2), NoiseModel::AdditiveGaussian { sigma: 1.0 }).unwrap(),
        schedule: Schedule::scalar_power(1.0, 0.75, 1.0, 2).unwrap(),
        theta0: pv(&[0.3, 0.3]),
        horizon: 5_000,
        n_trajectories: 400,
        master_seed: 21,
        record_stride: 50,
        capture: Some(CaptureSpec::new(pv(&[0.0, 0.0]), 1.5, None).unwrap()),
    };
    let ens = simulate_ensemble(&spec).unwrap();
    let rep = ens.report(&AnalysisOptions::defaults_for(&spec)).unwrap();
    let cap = rep.capture.unwrap();
    assert!(cap.empirical_sum > 0.0);
    assert!(cap.within_bound(), "{:?}", cap.bound_violations);
    assert!(cap.empirical_sum <= cap.theoretical_sum);
}

#[test]
fn counterexample_escapes_a_moderate_ball() {
    let spec = EnsembleSpec {
        oracle: StochasticOracle::new(Objective::loglog1p_abs(1), NoiseModel::RademacherRadial { direction: None }).unwrap(),
        schedule: Schedule::scalar_power(0.5, 0.75, 1.0, 1).unwrap(),
        theta0: pv(&[5.0]),
        horizon: 10_000,
        n_trajectories: 200,
        master_seed: 4,
        record_stride: 100,
        capture: Some(CaptureSpec::new(pv(&[0.0]), 6.0, Some(0.5)).unwrap()),
    };
    let ens = simulate_ensemble(&spec).unwrap();
    let total: usize = ens.escapes.unwrap().per_trajectory.iter().map(Vec::len).sum();
    assert!(total > 0);
}
