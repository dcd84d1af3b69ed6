//! Encoding vectors to bit codes and exhaustive top-k search.
//!
//! Both searches rank by distance and break ties by ascending database
//! index, and always return exactly `k` items.

use rayon::prelude::*;

use crate::bitcode::BitCode;
use crate::error::{Error, Result};
use crate::types::{check_dim, check_finite, squared_l2, HashModel};

/// One search hit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<D> {
    pub index: usize,
    pub distance: D,
}

/// Bit `i` is the side of `transform(raw)` relative to hyperplane `i`.
pub fn encode(model: &HashModel, raw: &[f64]) -> Result<BitCode> {
    let projected = model.preprocess().transform(raw)?;
    Ok(encode_projected(model, &projected))
}

/// Encodes a vector that has already been through the model's preprocessing.
pub fn encode_projected(model: &HashModel, projected: &[f64]) -> BitCode {
    debug_assert_eq!(projected.len(), model.preprocess().output_dim());
    BitCode::from_bits(
        model
            .hyperplanes()
            .iter()
            .map(|h| h.eval_unchecked(projected) > 0.0),
    )
}

/// Order-preserving [`encode`] over a dataset. Errors carry the offending
/// row index.
pub fn encode_all(model: &HashModel, data: &[Vec<f64>]) -> Result<Vec<BitCode>> {
    data.par_iter()
        .enumerate()
        .map(|(i, x)| encode(model, x).map_err(|e| Error::at(i, e)))
        .collect()
}

fn check_k(k: usize, len: usize) -> Result<()> {
    if k == 0 || k > len {
        Err(Error::KOutOfRange { k, len })
    } else {
        Ok(())
    }
}

/// Exact top-`k` codes by Hamming distance.
///
/// Distances are bounded by the code width, so ranking is a counting sort:
/// one pass to compute distances and a histogram, one pass to emit indices
/// in order.
pub fn search(query: &BitCode, db: &[BitCode], k: usize) -> Result<Vec<Neighbor<u32>>> {
    check_k(k, db.len())?;
    let width = query.width();
    let mut distances = Vec::with_capacity(db.len());
    let mut histogram = vec![0usize; width + 1];
    for (i, code) in db.iter().enumerate() {
        if code.width() != width {
            return Err(Error::at(
                i,
                Error::WidthMismatch {
                    left: width,
                    right: code.width(),
                },
            ));
        }
        let d = query.distance_unchecked(code);
        histogram[d as usize] += 1;
        distances.push(d);
    }

    // Radius that already holds k items, and how many of the items at
    // exactly that radius make the cut.
    let mut cutoff = 0;
    let mut below = 0;
    while below + histogram[cutoff] < k {
        below += histogram[cutoff];
        cutoff += 1;
    }
    let mut at_cutoff = k - below;

    let mut offsets = vec![0usize; cutoff + 1];
    for d in 1..=cutoff {
        offsets[d] = offsets[d - 1] + histogram[d - 1];
    }
    let mut out = vec![Neighbor { index: 0, distance: 0 }; k];
    for (index, &d) in distances.iter().enumerate() {
        let d = d as usize;
        if d > cutoff || (d == cutoff && at_cutoff == 0) {
            continue;
        }
        if d == cutoff {
            at_cutoff -= 1;
        }
        out[offsets[d]] = Neighbor {
            index,
            distance: d as u32,
        };
        offsets[d] += 1;
    }
    Ok(out)
}

/// [`search`] for many queries, in parallel. Output order follows `queries`.
pub fn search_batch(queries: &[BitCode], db: &[BitCode], k: usize) -> Result<Vec<Vec<Neighbor<u32>>>> {
    queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| search(q, db, k).map_err(|e| Error::at(i, e)))
        .collect()
}

/// Exact top-`k` vectors by Euclidean distance.
pub fn l2_search(query: &[f64], db: &[Vec<f64>], k: usize) -> Result<Vec<Neighbor<f64>>> {
    check_k(k, db.len())?;
    check_finite(query, "query vector")?;
    let mut scored = Vec::with_capacity(db.len());
    for (i, x) in db.iter().enumerate() {
        check_dim(query.len(), x.len()).map_err(|e| Error::at(i, e))?;
        scored.push((squared_l2(query, x), i));
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    Ok(scored
        .into_iter()
        .map(|(d, index)| Neighbor {
            index,
            distance: d.sqrt(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::PreprocessParams;
    use crate::types::Hyperplane;
    use proptest::prelude::*;
    use rand::Rng;

    fn axis_model() -> HashModel {
        let planes = vec![
            Hyperplane::new(vec![1.0, 0.0], 0.0).unwrap(),
            Hyperplane::new(vec![0.0, 1.0], 0.0).unwrap(),
        ];
        HashModel::new(planes, PreprocessParams::identity(2), 0).unwrap()
    }

    fn code(s: &str) -> BitCode {
        BitCode::from_bits(s.chars().map(|c| c == '1'))
    }

    #[test]
    fn encode_reads_signs() {
        let c = encode(&axis_model(), &[3.0, -2.0]).unwrap();
        assert_eq!(c, code("10"));
    }

    #[test]
    fn encode_boundary_is_zero() {
        let c = encode(&axis_model(), &[0.0, 4.0]).unwrap();
        assert_eq!(c, code("01"));
    }

    #[test]
    fn encode_dimension_mismatch() {
        assert!(matches!(
            encode(&axis_model(), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let err = encode_all(&axis_model(), &[vec![1.0, 1.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::AtIndex { index: 1, .. }));
    }

    #[test]
    fn encode_all_empty_and_order() {
        let m = axis_model();
        assert!(encode_all(&m, &[]).unwrap().is_empty());
        let data = vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0]];
        let codes = encode_all(&m, &data).unwrap();
        let mut reversed = data.clone();
        reversed.reverse();
        let mut rc = encode_all(&m, &reversed).unwrap();
        rc.reverse();
        assert_eq!(codes, rc);
    }

    #[test]
    fn search_breaks_ties_by_index() {
        let q = code("0000");
        let db = vec![code("0000"), code("1110"), code("1000")];
        let hits = search(&q, &db, 2).unwrap();
        assert_eq!(hits.iter().map(|h| h.index).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(hits.iter().map(|h| h.distance).collect::<Vec<_>>(), vec![0, 1]);

        let db = vec![code("1000"), code("0100"), code("0000"), code("0010")];
        let hits = search(&q, &db, 3).unwrap();
        assert_eq!(hits.iter().map(|h| h.index).collect::<Vec<_>>(), vec![2, 0, 1]);
    }

    #[test]
    fn search_full_ordering_is_permutation() {
        let q = code("0101");
        let db: Vec<BitCode> = (0..16u64)
            .map(|w| BitCode::from_words(vec![w], 4).unwrap())
            .collect();
        let hits = search(&q, &db, 16).unwrap();
        let mut idx: Vec<usize> = hits.iter().map(|h| h.index).collect();
        idx.sort();
        assert_eq!(idx, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn search_errors() {
        let q = code("01");
        assert!(matches!(search(&q, &[code("01")], 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(search(&q, &[code("01")], 2), Err(Error::KOutOfRange { .. })));
        assert!(search(&q, &[code("011")], 1).is_err());
    }

    #[test]
    fn l2_search_examples() {
        let db = vec![vec![0.0], vec![1.0], vec![3.0]];
        let hits = l2_search(&[0.9], &db, 2).unwrap();
        assert_eq!(hits.iter().map(|h| h.index).collect::<Vec<_>>(), vec![1, 0]);

        let db = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let hits = l2_search(&[3.0, 4.0], &db, 1).unwrap();
        assert_eq!(hits[0].index, 1);
        assert_eq!(hits[0].distance, 0.0);
        assert!(l2_search(&[1.0], &db, 1).is_err());
    }

    fn naive_hamming(q: &BitCode, db: &[BitCode], k: usize) -> Vec<(usize, u32)> {
        let mut all: Vec<(usize, u32)> = db
            .iter()
            .enumerate()
            .map(|(i, c)| (i, q.iter().zip(c.iter()).filter(|(a, b)| a != b).count() as u32))
            .collect();
        all.sort_by_key(|&(i, d)| (d, i));
        all.truncate(k);
        all
    }

    #[test]
    fn search_matches_brute_force() {
        let mut rng = crate::rng::seeded(77);
        let width = 24;
        let random_code = |rng: &mut rand_chacha::ChaCha8Rng| {
            BitCode::from_bits((0..width).map(|_| rng.random_bool(0.5)))
        };
        let db: Vec<BitCode> = (0..1000).map(|_| random_code(&mut rng)).collect();
        for _ in 0..100 {
            let q = random_code(&mut rng);
            let k = rng.random_range(1..=db.len());
            let got: Vec<(usize, u32)> = search(&q, &db, k)
                .unwrap()
                .into_iter()
                .map(|n| (n.index, n.distance))
                .collect();
            assert_eq!(got, naive_hamming(&q, &db, k));
        }
    }

    #[test]
    fn l2_search_matches_brute_force() {
        let mut rng = crate::rng::seeded(78);
        let db: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        for _ in 0..50 {
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let k = rng.random_range(1..=db.len());
            let mut all: Vec<(f64, usize)> = db.iter().enumerate().map(|(i, x)| (crate::types::l2(&q, x), i)).collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let got = l2_search(&q, &db, k).unwrap();
            let expected: Vec<usize> = all[..k].iter().map(|p| p.1).collect();
            assert_eq!(got.iter().map(|n| n.index).collect::<Vec<_>>(), expected);
        }
    }

    #[test]
    fn batch_search_matches_single() {
        let db = vec![code("000"), code("111"), code("011")];
        let qs = vec![code("001"), code("110")];
        let batch = search_batch(&qs, &db, 2).unwrap();
        for (q, b) in qs.iter().zip(&batch) {
            assert_eq!(b, &search(q, &db, 2).unwrap());
        }
    }

    proptest! {
        #[test]
        fn search_distances_invariant_to_db_permutation(
            words in proptest::collection::vec(0u64..(1 << 12), 2..60),
            q in 0u64..(1 << 12),
            rot in 0usize..60,
        ) {
            let db: Vec<BitCode> = words.iter().map(|&w| BitCode::from_words(vec![w], 12).unwrap()).collect();
            let q = BitCode::from_words(vec![q], 12).unwrap();
            let k = db.len();
            let mut permuted = db.clone();
            permuted.rotate_left(rot % db.len());
            let a: Vec<u32> = search(&q, &db, k).unwrap().iter().map(|n| n.distance).collect();
            let b: Vec<u32> = search(&q, &permuted, k).unwrap().iter().map(|n| n.distance).collect();
            prop_assert_eq!(a, b);
        }
    }
}
