use proptest::prelude::*;

use recirc::classifier::{fit, initial_parameters, predict, softmax, FeatureVector, NormStats, TrainConfig, FEATURE_NAMES};

fn unit_stats() -> NormStats {
    NormStats::new(vec![0.0; FEATURE_NAMES.len()], vec![1.0; FEATURE_NAMES.len()]).unwrap()
}

/// Points drawn around one centre per class.
fn arb_dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, usize)> {
    (2usize..=4).prop_flat_map(|k| {
        prop::collection::vec((0..k, prop::collection::vec(-1.0..1.0f64, FEATURE_NAMES.len())), 2 * k..40).prop_map(
            move |pts| {
                let mut ys: Vec<usize> = pts.iter().map(|(y, _)| *y).collect();
                ys[0] = 0;
                ys[1] = 1;
                let xs = pts
                    .iter()
                    .zip(&ys)
                    .map(|((_, x), &y)| x.iter().enumerate().map(|(j, v)| v + if j % k == y { 2.0 } else { 0.0 }).collect())
                    .collect();
                (xs, ys, k)
            },
        )
    })
}

fn cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 40,
        rng_seed: seed,
        ..TrainConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-700.0..700.0f64, 1..10)) {
        let p = softmax(&logits);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn predictions_lie_on_the_simplex((xs, ys, k) in arb_dataset(), seed in any::<u64>()) {
        let labels: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
        let init = initial_parameters(k, FEATURE_NAMES.len(), seed);
        let model = fit(&xs, &ys, labels, unit_stats(), init, &cfg(seed)).unwrap().model;
        for x in &xs {
            let p = predict(&model, &FeatureVector { values: x.clone() }).unwrap();
            prop_assert_eq!(p.probabilities.len(), k);
            prop_assert!(p.probabilities.iter().all(|v| *v >= 0.0));
            prop_assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert_eq!(&p.label, &model.class_labels[p.index]);
        }
    }

    #[test]
    fn relabeling_classes_permutes_the_model((xs, ys, k) in arb_dataset(), seed in any::<u64>(), rot in 1usize..4) {
        // perm[c] is the new index of class c.
        let perm: Vec<usize> = (0..k).map(|c| (c + rot) % k).collect();
        let labels: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
        let mut labels_p = labels.clone();
        for c in 0..k {
            labels_p[perm[c]] = labels[c].clone();
        }
        let (w, b) = initial_parameters(k, FEATURE_NAMES.len(), seed);
        let mut w_p = w.clone();
        let mut b_p = b.clone();
        for c in 0..k {
            w_p[perm[c]] = w[c].clone();
            b_p[perm[c]] = b[c];
        }
        let ys_p: Vec<usize> = ys.iter().map(|&y| perm[y]).collect();

        let m = fit(&xs, &ys, labels, unit_stats(), (w, b), &cfg(seed)).unwrap().model;
        let m_p = fit(&xs, &ys_p, labels_p, unit_stats(), (w_p, b_p), &cfg(seed)).unwrap().model;
        for c in 0..k {
            for (a, b) in m.weights[c].iter().zip(&m_p.weights[perm[c]]) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
        for x in &xs {
            let fv = FeatureVector { values: x.clone() };
            let p = predict(&m, &fv).unwrap();
            let q = predict(&m_p, &fv).unwrap();
            for c in 0..k {
                prop_assert!((p.probabilities[c] - q.probabilities[perm[c]]).abs() <= 1e-9);
            }
            prop_assert_eq!(p.label, q.label);
        }
    }
}
