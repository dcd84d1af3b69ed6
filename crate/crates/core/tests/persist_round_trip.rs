use lifthash::lift::sample_lifted;
use lifthash::persist::{self, Dataset, DatasetFormat};
use lifthash::{encode_all, preprocess, Error, HashModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn data(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| (0..dim).map(|j| r.sample::<f64, _>(StandardNormal) * (1.0 + (j % 7) as f64) + (i % 3) as f64).collect())
        .collect()
}

#[test]
fn model_1024_bits_276_dims_encodes_identically_after_reload() {
    let learn = data(600, 276, 1);
    let params = preprocess::fit(&learn).unwrap();
    let planes = sample_lifted(params.output_dim(), 1024, 2)
        .unwrap()
        .planes
        .iter()
        .map(|p| p.unlift())
        .collect();
    let model = HashModel::new(planes, params, 2).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    persist::save_model(&model, &path).unwrap();
    let loaded = persist::load_model(&path).unwrap();
    assert_eq!(loaded, model);

    let probes = data(100, 276, 3);
    assert_eq!(encode_all(&loaded, &probes).unwrap(), encode_all(&model, &probes).unwrap());
}

#[test]
fn every_single_byte_corruption_is_caught() {
    let params = preprocess::fit(&data(50, 4, 4)).unwrap();
    let planes = sample_lifted(params.output_dim(), 8, 4).unwrap().planes.iter().map(|p| p.unlift()).collect();
    let bytes = persist::model_to_bytes(&HashModel::new(planes, params, 4).unwrap());
    for i in 0..bytes.len() {
        let mut bad = bytes.clone();
        bad[i] ^= 0x10;
        assert!(persist::model_from_bytes(&bad).is_err(), "byte {i}");
    }
    for cut in [0, 3, 8, bytes.len() - 1] {
        assert!(persist::model_from_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
    }
}

#[test]
fn future_version_is_rejected_cleanly() {
    let mut bytes = persist::wrap(persist::MODEL_MAGIC, &[]);
    bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
    assert!(matches!(
        persist::model_from_bytes(&bytes),
        Err(Error::UnsupportedVersion { found: 2, .. })
    ));
}

#[test]
fn codes_and_datasets_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let vectors = data(40, 5, 5);
    let labels: Vec<i64> = (0..40).map(|i| i % 4).collect();
    let ds = Dataset {
        vectors: vectors.clone(),
        labels: Some(labels.clone()),
    };
    let csv = dir.path().join("d.csv");
    persist::write_dataset(&ds, &csv, DatasetFormat::Csv).unwrap();
    let back = persist::read_dataset(&csv, DatasetFormat::Csv).unwrap();
    assert_eq!(back.labels, Some(labels));
    for (a, b) in back.vectors.iter().flatten().zip(vectors.iter().flatten()) {
        assert_eq!(*a as f32, *b as f32);
    }

    let raw = dir.path().join("d.f32");
    persist::write_dataset(&ds, &raw, DatasetFormat::RawF32).unwrap();
    let back = persist::read_dataset(&raw, DatasetFormat::RawF32).unwrap();
    for (a, b) in back.vectors.iter().flatten().zip(vectors.iter().flatten()) {
        assert_eq!(*a, *b as f32 as f64);
    }

    let params = preprocess::fit(&vectors).unwrap();
    let planes = sample_lifted(params.output_dim(), 70, 6).unwrap().planes.iter().map(|p| p.unlift()).collect();
    let model = HashModel::new(planes, params, 6).unwrap();
    let codes = encode_all(&model, &vectors).unwrap();
    let path = dir.path().join("c.bin");
    persist::save_codes(&codes, 70, &path).unwrap();
    assert_eq!(persist::load_codes(&path).unwrap(), (70, codes));
}
