//! Hyperplane hashing with a lift map.
//!
//! Random-projection hashing assigns one bit per hyperplane according to
//! the side a point falls on. Most hyperplane learners only place planes
//! through the origin, which carves far fewer regions than planes with
//! offsets. Embedding the data at `z = 1` one dimension up turns any
//! origin-crossing learner into an offset-plane learner: see [`lift`].
//!
//! The crate covers the whole pipeline:
//!
//! - [`preprocess`]: standardization and PCA fitted on the learning split
//! - [`lift`]: the lift map, lifted plane sampling and the learner wrapper
//! - [`learn`]: the learner plug-in contract and a pool-selection learner
//! - [`hashing`]: encoding to [`BitCode`]s and exact Hamming / L2 search
//! - [`eval`]: pair labelling, precision, recall, error rate, correlation
//! - [`arrangement`]: exact and sampled region counts
//! - [`persist`]: model, code and dataset files
//!
//! ```
//! use lifthash::{encode, hamming_distance, lift, HashModel, PreprocessParams};
//!
//! let planes = lift::sample_lifted(2, 64, 7)
//!     .unwrap()
//!     .planes
//!     .iter()
//!     .map(|p| p.unlift())
//!     .collect();
//! let model = HashModel::new(planes, PreprocessParams::identity(2), 7).unwrap();
//! let a = encode(&model, &[0.1, 0.2]).unwrap();
//! let b = encode(&model, &[0.1, 0.25]).unwrap();
//! let c = encode(&model, &[3.0, -2.0]).unwrap();
//! assert!(hamming_distance(&a, &b).unwrap() < hamming_distance(&a, &c).unwrap());
//! ```

pub mod arrangement;
pub mod bitcode;
pub mod error;
pub mod eval;
pub mod hashing;
pub mod learn;
pub mod lift;
pub mod persist;
pub mod preprocess;
pub mod rng;
pub mod types;

pub use bitcode::{hamming_distance, BitCode};
pub use error::{Error, Result};
pub use hashing::{encode, encode_all, l2_search, search, Neighbor};
pub use preprocess::PreprocessParams;
pub use types::{side_of, HashModel, Hyperplane, LiftedHyperplane};
