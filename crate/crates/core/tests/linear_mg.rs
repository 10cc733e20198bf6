//! Model construction, generation and serialization behavior.

use approx::assert_abs_diff_eq;
use nqovi_core::linear_mg::{
    from_json, joint_index, make_tabular_features, random_linear_mg, random_tabular_mg, to_json,
    validate, FeatureMap, LinearMG, ModelError,
};

#[test]
fn one_hot_basics() {
    let fm = make_tabular_features(2, &[2, 2]).unwrap();
    assert_eq!(fm.dim(), 8);
    let phi = fm.eval(0, joint_index(&[2, 2], &[0, 0])).unwrap();
    assert_eq!(phi[0], 1.0);
    assert_eq!(phi.iter().filter(|&&v| v != 0.0).count(), 1);
    // Unit norm at every (x, a).
    for x in 0..2 {
        for a in 0..4 {
            let phi = fm.eval(x, a).unwrap();
            let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_eq!(norm, 1.0);
        }
    }
}

#[test]
fn one_hot_gram_is_identity() {
    let fm = make_tabular_features(3, &[2, 3]).unwrap();
    assert_eq!(fm.dim(), 18);
    let all: Vec<Vec<f64>> = (0..3)
        .flat_map(|x| (0..6).map(move |a| (x, a)))
        .map(|(x, a)| fm.eval(x, a).unwrap())
        .collect();
    for (i, u) in all.iter().enumerate() {
        for (j, v) in all.iter().enumerate() {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            assert_eq!(dot, if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn tabular_features_reject_scalar_dimension() {
    let err = make_tabular_features(1, &[1]).unwrap_err();
    assert!(matches!(err, ModelError::Config(_)));
}

#[test]
fn simplex_features_are_unit_bounded() {
    let (mg, _) = random_linear_mg(4, 5, 3, &[2, 2], 3, 2).unwrap();
    for x in 0..mg.num_states {
        for a in 0..mg.num_joint_actions() {
            let phi = mg.feature(x, a).unwrap();
            let sum: f64 = phi.iter().sum();
            assert!(phi.iter().all(|&v| v >= 0.0));
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(phi.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn generator_is_deterministic() {
    let (a, _) = random_linear_mg(1, 4, 3, &[2, 2], 3, 2).unwrap();
    let (b, _) = random_linear_mg(1, 4, 3, &[2, 2], 3, 2).unwrap();
    assert_eq!(a, b);
    let (c, _) = random_linear_mg(2, 4, 3, &[2, 2], 3, 2).unwrap();
    assert_ne!(a, c);
}

#[test]
fn generator_kernels_are_exactly_stochastic() {
    let (mg, report) = random_linear_mg(1, 4, 3, &[2, 2], 3, 2).unwrap();
    for h in 0..mg.horizon {
        for x in 0..mg.num_states {
            for a in 0..mg.num_joint_actions() {
                let sum: f64 = mg.kernel(h, x, a).iter().sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            }
        }
    }
    assert!(report.max_row_sum_deviation <= 1e-12);
    assert_eq!(report.reward_range_violations, 0);
    assert!(report.theta_norm_ok);
    assert!(report.feature_norm_ok);
}

#[test]
fn generator_rejects_bad_parameters() {
    assert!(random_linear_mg(0, 1, 2, &[2], 3, 1).is_err()); // d < 2
    assert!(random_linear_mg(0, 3, 2, &[2], 1, 1).is_err()); // H < 2
    assert!(random_linear_mg(0, 3, 0, &[2], 3, 1).is_err()); // |S| = 0
    assert!(random_linear_mg(0, 3, 2, &[2, 2], 3, 1).is_err()); // dims/agents mismatch
}

#[test]
fn validate_reports_row_sum_deviation_honestly() {
    // Hand-built model with a kernel row summing to 0.9.
    let dims = [2usize];
    let features = make_tabular_features(2, &dims).unwrap();
    let d = features.dim();
    let mut mu = vec![0.0; d * 2];
    for j in 0..d {
        mu[j * 2] = 1.0; // everything goes to state 0
    }
    mu[0] = 0.9; // except (x=0, a=0), which leaks mass
    let theta = vec![vec![0.5; d]; 1];
    let mg = LinearMG::from_parameters_unvalidated(
        features,
        vec![mu.clone(), mu],
        vec![theta.clone(), theta],
        2,
        0,
        None,
    )
    .unwrap();
    let report = validate(&mg);
    assert_abs_diff_eq!(report.max_row_sum_deviation, 0.1, epsilon = 1e-12);
    assert!(mg.check().is_err());
}

#[test]
fn realizability_round_trip() {
    let (mg, _) = random_linear_mg(6, 4, 3, &[2, 2], 3, 2).unwrap();
    for h in 0..mg.horizon {
        for x in 0..mg.num_states {
            for a in 0..mg.num_joint_actions() {
                let phi = mg.feature(x, a).unwrap();
                for xp in 0..mg.num_states {
                    let p: f64 = (0..mg.dim())
                        .map(|j| phi[j] * mg.mu[h][j * mg.num_states + xp])
                        .sum();
                    assert_abs_diff_eq!(p, mg.kernel(h, x, a)[xp], epsilon = 1e-12);
                }
                for i in 0..mg.num_agents {
                    let r: f64 = (0..mg.dim()).map(|j| phi[j] * mg.theta[h][i][j]).sum();
                    assert_abs_diff_eq!(r, mg.reward(h, i, x, a), epsilon = 1e-12);
                }
            }
        }
    }
}

#[test]
fn json_round_trip_is_exact() {
    for (mg, _) in [
        random_linear_mg(3, 4, 3, &[2, 2], 3, 2).unwrap(),
        random_tabular_mg(3, 2, &[2, 2], 2, 2).unwrap(),
    ] {
        let text = to_json(&mg).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(mg, back);
    }
}

#[test]
fn tabular_model_assumption_booleans() {
    let (mg, report) = random_tabular_mg(9, 2, &[2, 2], 2, 2).unwrap();
    assert!(report.feature_norm_ok);
    // One-hot realizable rewards and kernels by construction.
    assert_eq!(report.reward_range_violations, 0);
    assert!(report.max_row_sum_deviation <= 1e-12);
    assert!(matches!(mg.features, FeatureMap::OneHot { .. }));
    // The measure-norm surrogate is reported but may legitimately exceed
    // sqrt(d); only report it, never enforce.
    assert_eq!(report.measure_norm_surrogate.len(), mg.horizon);
}

#[test]
fn feature_lookup_out_of_range_errors() {
    let (mg, _) = random_tabular_mg(1, 2, &[2], 2, 1).unwrap();
    assert!(mg.feature(5, 0).is_err());
    assert!(mg.feature(0, 99).is_err());
}

#[test]
fn d_overflow_is_a_configuration_error() {
    let err = make_tabular_features(usize::MAX / 2, &[3]).unwrap_err();
    assert!(matches!(err, ModelError::Config(_)));
}
