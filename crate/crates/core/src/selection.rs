//! Chi-square feature selection.
//!
//! Each feature's presence/absence is cross-tabulated against the three
//! stance labels and features are ranked by Pearson's statistic. Ranking is
//! done in exact rational arithmetic so that equal statistics tie exactly
//! and fall back to descriptor order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::StanceLabel;
use crate::features::{FeatureSpace, FeatureVector};
use crate::scalar::Scalar;
use crate::Exact;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("contingency counts must be non-negative")]
    NegativeCount,
    #[error("contingency table is empty")]
    EmptyTable,
    #[error("{vectors} vectors but {labels} labels")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("vector dimension {got} does not match feature space size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown chi-square mode {0:?} (expected `multiclass` or `per-class-max`)")]
    UnknownMode(String),
}

/// 2×3 table: feature present/absent × FAVOR/AGAINST/NONE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContingencyTable {
    pub present: [u64; 3],
    pub absent: [u64; 3],
}

impl ContingencyTable {
    pub fn new(present: [u64; 3], absent: [u64; 3]) -> Self {
        ContingencyTable { present, absent }
    }

    pub fn from_signed(present: [i64; 3], absent: [i64; 3]) -> Result<Self, SelectionError> {
        let conv = |row: [i64; 3]| -> Result<[u64; 3], SelectionError> {
            let mut out = [0u64; 3];
            for (o, v) in out.iter_mut().zip(row) {
                *o = u64::try_from(v).map_err(|_| SelectionError::NegativeCount)?;
            }
            Ok(out)
        };
        Ok(ContingencyTable {
            present: conv(present)?,
            absent: conv(absent)?,
        })
    }

    pub fn n(&self) -> u64 {
        self.present.iter().chain(&self.absent).sum()
    }

    pub fn row_totals(&self) -> [u64; 2] {
        [self.present.iter().sum(), self.absent.iter().sum()]
    }

    pub fn col_totals(&self) -> [u64; 3] {
        [0, 1, 2].map(|c| self.present[c] + self.absent[c])
    }

    /// The 2×2 table of one class against the other two.
    fn one_vs_rest(&self, class: usize) -> ([u64; 2], [u64; 2]) {
        let rest = |row: &[u64; 3]| row.iter().sum::<u64>() - row[class];
        (
            [self.present[class], rest(&self.present)],
            [self.absent[class], rest(&self.absent)],
        )
    }
}

fn pearson<T: Scalar>(rows: &[&[u64]]) -> T {
    let cols = rows[0].len();
    let row_tot: Vec<u64> = rows.iter().map(|r| r.iter().sum()).collect();
    let col_tot: Vec<u64> = (0..cols).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let n: u64 = row_tot.iter().sum();
    let n_t = T::from_count(n);
    let mut stat = T::zero();
    for (r, row) in rows.iter().enumerate() {
        for (c, &obs) in row.iter().enumerate() {
            if row_tot[r] == 0 || col_tot[c] == 0 {
                continue;
            }
            let expected = T::from_count(row_tot[r]) * T::from_count(col_tot[c]) / n_t.clone();
            let diff = T::from_count(obs) - expected.clone();
            stat = stat + diff.clone() * diff / expected;
        }
    }
    stat
}

/// Pearson's χ² over all six cells. Cells with zero expected count
/// contribute nothing; no continuity correction is applied.
pub fn chi_square_statistic<T: Scalar>(table: &ContingencyTable) -> Result<T, SelectionError> {
    if table.n() == 0 {
        return Err(SelectionError::EmptyTable);
    }
    Ok(pearson(&[&table.present, &table.absent]))
}

/// How a feature's table is reduced to a single ranking score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChiSquareMode {
    /// One statistic over the 2×3 table.
    #[default]
    Multiclass,
    /// Maximum over the three one-vs-rest 2×2 statistics.
    PerClassMax,
}

impl fmt::Display for ChiSquareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChiSquareMode::Multiclass => "multiclass",
            ChiSquareMode::PerClassMax => "per-class-max",
        })
    }
}

impl FromStr for ChiSquareMode {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "multiclass" => Ok(ChiSquareMode::Multiclass),
            "per-class-max" => Ok(ChiSquareMode::PerClassMax),
            other => Err(SelectionError::UnknownMode(other.to_string())),
        }
    }
}

pub fn chi_square_with_mode<T: Scalar>(table: &ContingencyTable, mode: ChiSquareMode) -> Result<T, SelectionError> {
    match mode {
        ChiSquareMode::Multiclass => chi_square_statistic(table),
        ChiSquareMode::PerClassMax => {
            if table.n() == 0 {
                return Err(SelectionError::EmptyTable);
            }
            let mut best = T::zero();
            for class in 0..3 {
                let (p, a) = table.one_vs_rest(class);
                let s: T = pearson(&[&p, &a]);
                if s > best {
                    best = s;
                }
            }
            Ok(best)
        }
    }
}

/// Contingency tables for every feature of a `dim`-sized space.
pub fn contingency_tables(
    vectors: &[FeatureVector],
    labels: &[StanceLabel],
    dim: usize,
) -> Result<Vec<ContingencyTable>, SelectionError> {
    if vectors.len() != labels.len() {
        return Err(SelectionError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let mut class_totals = [0u64; 3];
    let mut present = vec![[0u64; 3]; dim];
    for (v, l) in vectors.iter().zip(labels) {
        if v.dim() != dim {
            return Err(SelectionError::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
        class_totals[l.index()] += 1;
        for &i in v.indices() {
            present[i as usize][l.index()] += 1;
        }
    }
    Ok(present
        .into_iter()
        .map(|p| ContingencyTable::new(p, [0, 1, 2].map(|c| class_totals[c] - p[c])))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedFeature {
    pub old_index: usize,
    pub statistic: f64,
}

/// Result of top-k selection.
#[derive(Debug, Clone)]
pub struct Selection {
    /// The reduced space; new index = rank.
    pub space: FeatureSpace,
    /// Old index → new index for kept features.
    pub remap: Vec<Option<u32>>,
    /// Every feature in rank order, kept or not.
    pub ranking: Vec<RankedFeature>,
}

impl Selection {
    /// Re-expresses a vector of the original space in the reduced space.
    pub fn apply(&self, v: &FeatureVector) -> FeatureVector {
        let idx = v
            .indices()
            .iter()
            .filter_map(|&i| self.remap.get(i as usize).copied().flatten())
            .collect();
        FeatureVector::new(self.space.len(), idx)
    }

    /// Tab-separated `rank  χ²  descriptor` lines for the kept features.
    pub fn report(&self) -> String {
        format_ranking(&self.space, &self.ranking)
    }
}

/// Report lines for the first `space.len()` ranked features, which must be
/// the descriptors of `space` in order.
pub fn format_ranking(space: &FeatureSpace, ranking: &[RankedFeature]) -> String {
    let mut out = String::from("rank\tchi2\tfeature\n");
    for (rank, f) in ranking.iter().take(space.len()).enumerate() {
        out.push_str(&format!(
            "{}\t{:.6}\t{}\n",
            rank + 1,
            f.statistic,
            space.descriptors()[rank]
        ));
    }
    out
}

/// Orders feature indices by descending score, then ascending descriptor text.
pub fn rank_by<T: Scalar>(scores: &[T], keys: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| keys[a].cmp(&keys[b]))
    });
    order
}

/// Keeps the `k` features with the largest chi-square statistic.
pub fn select_top_k(
    vectors: &[FeatureVector],
    labels: &[StanceLabel],
    space: &FeatureSpace,
    k: usize,
    mode: ChiSquareMode,
) -> Result<Selection, SelectionError> {
    let tables = contingency_tables(vectors, labels, space.len())?;
    let mut exact: Vec<Exact> = Vec::with_capacity(tables.len());
    for t in &tables {
        exact.push(if t.n() == 0 {
            Exact::from_count(0)
        } else {
            chi_square_with_mode(t, mode)?
        });
    }
    let keys: Vec<String> = space.descriptors().iter().map(|d| d.to_string()).collect();
    let order = rank_by(&exact, &keys);

    let kept = &order[..k.min(order.len())];
    let mut remap = vec![None; space.len()];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = Some(new as u32);
    }
    let ranking = order
        .iter()
        .map(|&i| RankedFeature {
            old_index: i,
            statistic: exact[i].to_f64_lossy(),
        })
        .collect();
    Ok(Selection {
        space: space.restrict(kept),
        remap,
        ranking,
    })
}
