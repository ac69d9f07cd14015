//! Frequency-domain mutual-information analysis for multivariate time
//! series.
//!
//! The pipeline quantifies how much information every pair of series in a
//! table shares, without assuming linear or even monotone dependence:
//!
//! 1. [`series`] loads and standardizes a table of named columns;
//! 2. [`spectral`] cuts each column into segments and keeps per-segment DFT
//!    coefficients, giving a sample of each frequency bin's behavior;
//! 3. [`mi`] estimates mutual information between sample clouds with a
//!    k-nearest-neighbor estimator;
//! 4. [`amif`] aggregates the most informative frequency pairings of two
//!    series into a single similarity score and assembles the pairwise
//!    similarity matrix;
//! 5. [`transform`] converts similarities into dissimilarities;
//! 6. [`mds`] embeds the dissimilarity matrix with classical
//!    multidimensional scaling;
//! 7. [`dbscan`] clusters the embedding and scores partition agreement.
//!
//! [`baselines`] provides linear reference metrics (lagged cross-correlation,
//! Pearson coefficient, Euclidean distance) on the same matrix path, and
//! [`synth`] generates the seeded nonlinear benchmark used to compare them.
//!
//! Everything is deterministic: fixed seeds yield bit-identical tables,
//! scores, embeddings, and labels, including under the parallel pair loop.

pub mod amif;
pub mod baselines;
pub mod dbscan;
pub mod error;
pub mod mds;
pub mod mi;
mod numfmt;
pub mod series;
pub mod spectral;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};
