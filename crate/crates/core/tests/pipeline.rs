use lifthash::eval::{self, LabeledDataset, Labels, Split};
use lifthash::learn::{self, LearnerConfig, PoolSelectLearner};
use lifthash::lift::{self, RandomOriginPlanes};
use lifthash::{encode_all, l2_search, preprocess, search, HashModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Clusters {
    vectors: Vec<Vec<f64>>,
    labels: Vec<i64>,
    splits: Vec<Split>,
}

fn clusters(n: usize, seed: u64) -> Clusters {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..4).map(|_| (0..8).map(|_| 3.0 * r.sample::<f64, _>(StandardNormal)).collect()).collect();
    let mut out = Clusters {
        vectors: vec![],
        labels: vec![],
        splits: vec![],
    };
    for i in 0..n {
        let c = r.random_range(0..4);
        out.vectors.push(centers[c].iter().map(|m| m + r.sample::<f64, _>(StandardNormal)).collect());
        out.labels.push(c as i64);
        out.splits.push(match i % 4 {
            0 => Split::Learn,
            1 => Split::Query,
            _ => Split::Database,
        });
    }
    out
}

fn train(c: &Clusters, lifted: bool, pool: bool) -> HashModel {
    let ds = LabeledDataset::new(c.vectors.clone(), None, c.splits.clone()).unwrap();
    let learn_idx = ds.indices(Split::Learn);
    let params = preprocess::fit(&ds.subset(Split::Learn)).unwrap();
    let projected = params.transform_all(&ds.subset(Split::Learn)).unwrap();
    let planes = if pool {
        let labels: Vec<i64> = learn_idx.iter().map(|&i| c.labels[i]).collect();
        let (same, diff) = learn::sample_pairs(&Labels(&labels), labels.len(), 5000, 1);
        let learner = PoolSelectLearner {
            config: LearnerConfig {
                pool_size: 500,
                iterations: 50,
                target_bits: 32,
                rng_seed: 1,
            },
            same_label_pairs: same,
            diff_label_pairs: diff,
        };
        if lifted {
            lift::lift_learner(&learner, &projected).unwrap().planes
        } else {
            learn::origin_planes(&learner, &projected).unwrap()
        }
    } else if lifted {
        lift::lift_learner(&RandomOriginPlanes::new(32, 1), &projected).unwrap().planes
    } else {
        learn::origin_planes(&RandomOriginPlanes::new(32, 1), &projected).unwrap()
    };
    HashModel::new(planes, params, 1).unwrap()
}

#[test]
fn all_methods_retrieve_better_than_chance() {
    let c = clusters(1200, 7);
    let ds = LabeledDataset::new(c.vectors.clone(), Some(c.labels.clone()), c.splits.clone()).unwrap();
    for (lifted, pool) in [(false, false), (true, false), (false, true), (true, true)] {
        let model = train(&c, lifted, pool);
        assert_eq!(model.bit_count(), 32);
        let offsets = learn::mean_abs_offset(model.hyperplanes()).unwrap();
        if lifted {
            assert!(offsets > 0.0);
        } else {
            assert_eq!(offsets, 0.0);
        }
        let report = eval::evaluate(&model, &ds, &Labels(&c.labels), 0.05).unwrap();
        assert!(report.precision > 0.5, "lifted={lifted} pool={pool}: {report:?}");
        assert!(report.error_rate.unwrap() < 0.2);
    }
}

#[test]
fn hamming_neighbours_track_euclidean_neighbours() {
    let c = clusters(800, 8);
    let model = train(&c, true, false);
    let projected = model.preprocess().transform_all(&c.vectors).unwrap();
    let codes = encode_all(&model, &c.vectors).unwrap();
    let mut overlap = 0;
    for q in 0..20 {
        let by_l2: Vec<usize> = l2_search(&projected[q], &projected, 50).unwrap().iter().map(|n| n.index).collect();
        let by_hamming = search(&codes[q], &codes, 50).unwrap();
        overlap += by_hamming.iter().filter(|n| by_l2.contains(&n.index)).count();
    }
    // Random overlap would be about 50 * 50 / 800 per query.
    assert!(overlap > 20 * 10, "overlap {overlap}");
}

#[test]
fn error_rate_never_rises_with_acquisition() {
    let c = clusters(600, 9);
    let ds = LabeledDataset::new(c.vectors.clone(), Some(c.labels.clone()), c.splits.clone()).unwrap();
    let model = train(&c, true, true);
    let mut last = f64::INFINITY;
    for a in [0.003, 0.01, 0.03, 0.1, 0.3, 1.0] {
        let e = eval::evaluate(&model, &ds, &Labels(&c.labels), a).unwrap().error_rate.unwrap();
        assert!(e <= last);
        last = e;
    }
    assert_eq!(last, 0.0);
}
