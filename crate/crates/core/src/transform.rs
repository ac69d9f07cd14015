//! Similarity-to-dissimilarity conversion.
//!
//! Scores are first normalized by the maximum finite off-diagonal entry
//! (the diagonal is an infinity sentinel and is ignored), then mapped by
//! one of two strictly decreasing transforms:
//!
//! * membership: `g = 1 - s`, landing in [0, 1];
//! * logarithmic: `g = max(0, -ln(s + eps))`, which stretches the gap
//!   between highly similar items and can exceed 1 for weakly related ones.
//!   The epsilon guard keeps `ln` finite at s = 0 and the clamp keeps the
//!   s = 1 corner nonnegative.

use crate::amif::{matrix_from_csv, matrix_to_csv, SimilarityMatrix};
use crate::error::{Error, Result};

/// Which decreasing map converts normalized similarity to dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Membership,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformConfig {
    pub kind: TransformKind,
    /// Guard added inside the logarithm; must be positive.
    pub epsilon: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            kind: TransformKind::Membership,
            epsilon: 1e-9,
        }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// M x M symmetric nonnegative dissimilarities with an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    names: Vec<String>,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let m = names.len();
        if values.len() != m * m {
            return Err(Error::NotSquare {
                rows: if m == 0 { 0 } else { values.len() / m },
                cols: m,
            });
        }
        for i in 0..m {
            for j in 0..m {
                let v = values[i * m + j];
                if i == j && v != 0.0 {
                    return Err(Error::InvalidEntry {
                        i,
                        j,
                        what: format!("diagonal must be exactly 0, got {v}"),
                    });
                }
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidEntry {
                        i,
                        j,
                        what: format!("entries must be finite and >= 0, got {v}"),
                    });
                }
                if values[j * m + i].to_bits() != v.to_bits() {
                    return Err(Error::Asymmetric(i, j));
                }
            }
        }
        Ok(Self { names, values })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same CSV layout as the similarity matrix, with a zero diagonal.
    pub fn to_csv_string(&self) -> String {
        matrix_to_csv(&self.names, &self.values)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (names, values) = matrix_from_csv(text)?;
        Self::new(names, values)
    }
}

/// Divide every finite entry by the maximum finite off-diagonal entry,
/// mapping off-diagonal scores into [0, 1]. The infinite diagonal is kept.
pub fn normalize_similarity(s: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    let max = s.max_off_diagonal();
    if max <= 0.0 {
        return Err(Error::AllZeroSimilarities);
    }
    let m = s.size();
    let mut values = vec![f64::INFINITY; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                values[i * m + j] = s.get(i, j) / max;
            }
        }
    }
    SimilarityMatrix::new(s.names().to_vec(), values)
}

fn check_normalized(s: &SimilarityMatrix) -> Result<()> {
    let m = s.size();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let v = s.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::NotNormalized { i, j, value: v });
                }
            }
        }
    }
    Ok(())
}

/// Membership transform: `g_ij = 1 - s_ij` off-diagonal, zero diagonal.
pub fn membership(s_norm: &SimilarityMatrix) -> Result<DissimilarityMatrix> {
    check_normalized(s_norm)?;
    let m = s_norm.size();
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                values[i * m + j] = 1.0 - s_norm.get(i, j);
            }
        }
    }
    DissimilarityMatrix::new(s_norm.names().to_vec(), values)
}

/// Logarithmic transform: `g_ij = max(0, -ln(s_ij + epsilon))` off-diagonal.
pub fn logarithmic(s_norm: &SimilarityMatrix, epsilon: f64) -> Result<DissimilarityMatrix> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig("epsilon must be positive".into()));
    }
    check_normalized(s_norm)?;
    let m = s_norm.size();
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                values[i * m + j] = (-(s_norm.get(i, j) + epsilon).ln()).max(0.0);
            }
        }
    }
    DissimilarityMatrix::new(s_norm.names().to_vec(), values)
}

/// Normalize then apply the configured transform.
pub fn apply(s: &SimilarityMatrix, cfg: &TransformConfig) -> Result<DissimilarityMatrix> {
    cfg.validate()?;
    let normalized = normalize_similarity(s)?;
    match cfg.kind {
        TransformKind::Membership => membership(&normalized),
        TransformKind::Logarithmic => logarithmic(&normalized, cfg.epsilon),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sim(values: Vec<f64>) -> SimilarityMatrix {
        let m = (values.len() as f64).sqrt() as usize;
        let names = (0..m).map(|i| format!("s{i}")).collect();
        SimilarityMatrix::new(names, values).unwrap()
    }

    fn sim3(a: f64, b: f64, c: f64) -> SimilarityMatrix {
        let inf = f64::INFINITY;
        sim(vec![inf, a, b, a, inf, c, b, c, inf])
    }

    #[test]
    fn normalization_scales_by_max() {
        let n = normalize_similarity(&sim3(0.2, 0.4, 0.8)).unwrap();
        assert_eq!(n.get(0, 1), 0.25);
        assert_eq!(n.get(0, 2), 0.5);
        assert_eq!(n.get(1, 2), 1.0);
        assert_eq!(n.get(0, 0), f64::INFINITY);
    }

    #[test]
    fn normalization_fixed_point_when_max_is_one() {
        let s = sim3(0.3, 1.0, 0.6);
        let n = normalize_similarity(&s).unwrap();
        assert_eq!(n, s);
    }

    #[test]
    fn equal_positive_scores_normalize_to_one() {
        let n = normalize_similarity(&sim3(0.4, 0.4, 0.4)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(n.get(i, j), 1.0);
                }
            }
        }
    }

    #[test]
    fn all_zero_matrix_is_rejected() {
        assert!(matches!(
            normalize_similarity(&sim3(0.0, 0.0, 0.0)),
            Err(Error::AllZeroSimilarities)
        ));
    }

    #[test]
    fn membership_complements_similarity() {
        let n = normalize_similarity(&sim3(0.2, 0.4, 0.8)).unwrap();
        let g = membership(&n).unwrap();
        assert_eq!(g.get(0, 1), 0.75);
        assert_eq!(g.get(1, 2), 0.0);
        assert_eq!(g.get(0, 0), 0.0);
        // s = 0 maps to g = 1.
        let z = membership(&sim3(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(z.get(0, 1), 1.0);
    }

    #[test]
    fn logarithmic_clamps_at_full_similarity_and_explodes_at_zero() {
        let g = logarithmic(&sim3(1.0, 0.0, 0.5), 1e-9).unwrap();
        assert_eq!(g.get(0, 1), 0.0); // -ln(1 + eps) < 0 clamps to 0
        assert!((g.get(0, 2) - 20.723265836946414).abs() < 1e-9); // -ln(1e-9)
        assert!((g.get(1, 2) - (-(0.5f64 + 1e-9).ln())).abs() < 1e-15);
    }

    #[test]
    fn log_transform_bounds() {
        let eps = 1e-9;
        let g = logarithmic(&sim3(0.0, 0.25, 1.0), eps).unwrap();
        let cap = -(eps.ln());
        for i in 0..3 {
            for j in 0..3 {
                assert!(g.get(i, j) >= 0.0 && g.get(i, j) <= cap);
            }
        }
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        assert!(matches!(
            membership(&sim3(1.5, 0.2, 0.1)),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn dissimilarity_csv_round_trip() {
        let g = membership(&normalize_similarity(&sim3(0.2, 0.4, 0.8)).unwrap()).unwrap();
        let text = g.to_csv_string();
        let back = DissimilarityMatrix::from_csv_str(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn dissimilarity_invariants_enforced() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            DissimilarityMatrix::new(names.clone(), vec![0.5, 0.1, 0.1, 0.0]),
            Err(Error::InvalidEntry { .. })
        ));
        assert!(matches!(
            DissimilarityMatrix::new(names.clone(), vec![0.0, 0.1, 0.2, 0.0]),
            Err(Error::Asymmetric(..))
        ));
        assert!(matches!(
            DissimilarityMatrix::new(names, vec![0.0, -0.1, -0.1, 0.0]),
            Err(Error::InvalidEntry { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Both transforms strictly reverse the off-diagonal order of the
        /// similarity matrix and preserve its symmetry bit-for-bit.
        #[test]
        fn transforms_reverse_ordering(
            a in 0.01f64..1.0,
            b in 0.01f64..1.0,
            c in 0.01f64..1.0,
            logarithm in proptest::bool::ANY,
        ) {
            let s = sim3(a, b, c);
            let cfg = TransformConfig {
                kind: if logarithm { TransformKind::Logarithmic } else { TransformKind::Membership },
                epsilon: 1e-9,
            };
            let n = normalize_similarity(&s).unwrap();
            let g = apply(&s, &cfg).unwrap();

            let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
            for &(i1, j1) in &pairs {
                for &(i2, j2) in &pairs {
                    let ds = n.get(i1, j1) - n.get(i2, j2);
                    let dg = g.get(i1, j1) - g.get(i2, j2);
                    if ds > 0.0 {
                        // Strictly larger similarity gives dissimilarity that
                        // is no larger, and strictly smaller unless both land
                        // on the log transform's zero clamp.
                        prop_assert!(dg <= 0.0);
                    }
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(g.get(i, j).to_bits(), g.get(j, i).to_bits());
                }
            }
        }
    }
}
