//! Datasets: a sparse matrix plus targets, tagged with which axis the
//! columns run along.
//!
//! LIBSVM files are read with one column per datapoint (the hinge-loss SVM
//! layout). Lasso wants one column per feature, which [`Dataset::to_features_as_columns`]
//! produces by transposition.

mod libsvm;
mod synthetic;

pub use libsvm::{load_libsvm, parse_libsvm, write_libsvm, LoadOptions};
pub use synthetic::{synthetic_lasso, synthetic_svm, Synthetic};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::SparseColumnMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Columns are features, targets are per row (Lasso).
    FeaturesAsColumns,
    /// Columns are datapoints, targets are per column (SVM).
    DatapointsAsColumns,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::FeaturesAsColumns => "features-as-columns",
            Orientation::DatapointsAsColumns => "datapoints-as-columns",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    None,
    UnitL2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub matrix: SparseColumnMatrix,
    /// Length `d` for [`Orientation::FeaturesAsColumns`], `n` otherwise.
    pub targets: Vec<f64>,
    pub orientation: Orientation,
}

impl Dataset {
    pub fn new(
        matrix: SparseColumnMatrix,
        targets: Vec<f64>,
        orientation: Orientation,
    ) -> Result<Self> {
        let expected = match orientation {
            Orientation::FeaturesAsColumns => matrix.n_rows(),
            Orientation::DatapointsAsColumns => matrix.n_cols(),
        };
        if targets.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} targets for {} layout with {expected} entries",
                targets.len(),
                orientation.name()
            )));
        }
        if let Some(k) = targets.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("target {k} is not finite")));
        }
        Ok(Self {
            matrix,
            targets,
            orientation,
        })
    }

    /// Number of rows `d`.
    pub fn d(&self) -> usize {
        self.matrix.n_rows()
    }

    /// Number of columns `n` (coordinates of the solver).
    pub fn n(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn n_datapoints(&self) -> usize {
        match self.orientation {
            Orientation::FeaturesAsColumns => self.d(),
            Orientation::DatapointsAsColumns => self.n(),
        }
    }

    pub fn n_features(&self) -> usize {
        match self.orientation {
            Orientation::FeaturesAsColumns => self.n(),
            Orientation::DatapointsAsColumns => self.d(),
        }
    }

    /// Re-lays the data with one column per feature; targets follow the datapoints.
    pub fn to_features_as_columns(&self) -> Dataset {
        match self.orientation {
            Orientation::FeaturesAsColumns => self.clone(),
            Orientation::DatapointsAsColumns => Dataset {
                matrix: self.matrix.transpose(),
                targets: self.targets.clone(),
                orientation: Orientation::FeaturesAsColumns,
            },
        }
    }

    pub fn to_datapoints_as_columns(&self) -> Dataset {
        match self.orientation {
            Orientation::DatapointsAsColumns => self.clone(),
            Orientation::FeaturesAsColumns => Dataset {
                matrix: self.matrix.transpose(),
                targets: self.targets.clone(),
                orientation: Orientation::DatapointsAsColumns,
            },
        }
    }

    /// Maps a two-class label set onto `{-1, +1}` (smaller value to `-1`).
    ///
    /// Labels already in `{-1, +1}` are kept as is; a single class must already be ±1.
    pub fn with_pm1_labels(mut self) -> Result<Dataset> {
        let mut classes: Vec<f64> = Vec::new();
        for &t in &self.targets {
            if !classes.contains(&t) {
                classes.push(t);
                if classes.len() > 2 {
                    return Err(Error::Labels(format!(
                        "more than two classes ({:?} ...)",
                        classes
                    )));
                }
            }
        }
        classes.sort_by(f64::total_cmp);
        let already_pm1 = classes.iter().all(|&c| c == 1.0 || c == -1.0);
        if !already_pm1 {
            if classes.len() != 2 {
                return Err(Error::Labels(format!(
                    "single class {:?} is not ±1",
                    classes
                )));
            }
            let low = classes[0];
            for t in &mut self.targets {
                *t = if *t == low { -1.0 } else { 1.0 };
            }
        }
        Ok(self)
    }

    pub fn check_pm1_labels(&self) -> Result<()> {
        match self.targets.iter().position(|&t| t != 1.0 && t != -1.0) {
            Some(k) => Err(Error::Labels(format!(
                "label {} at position {k} is not ±1",
                self.targets[k]
            ))),
            None => Ok(()),
        }
    }

    /// Drops all-zero columns (and their per-column targets).
    pub fn drop_zero_columns(&self) -> Result<Dataset> {
        let keep: Vec<usize> = (0..self.n())
            .filter(|&i| !self.matrix.column(i).is_empty())
            .collect();
        let rows: Vec<usize> = (0..self.d()).collect();
        self.restrict(&rows, &keep)
    }

    fn restrict(&self, rows: &[usize], cols: &[usize]) -> Result<Dataset> {
        let matrix = self.matrix.select(rows, cols)?;
        let targets = match self.orientation {
            Orientation::FeaturesAsColumns => rows.iter().map(|&r| self.targets[r]).collect(),
            Orientation::DatapointsAsColumns => cols.iter().map(|&c| self.targets[c]).collect(),
        };
        Dataset::new(matrix, targets, self.orientation)
    }
}

/// Rescales columns; `UnitL2` leaves every column with Euclidean norm 1.
pub fn normalize_columns(ds: &Dataset, mode: Normalization) -> Result<Dataset> {
    match mode {
        Normalization::None => Ok(ds.clone()),
        Normalization::UnitL2 => {
            let norms = ds.matrix.column_norms();
            if let Some(i) = norms.iter().position(|&v| v == 0.0) {
                return Err(Error::ZeroColumn(i));
            }
            let columns = ds
                .matrix
                .columns()
                .zip(norms)
                .map(|(col, &norm)| col.iter().map(|(r, v)| (r, v / norm)).collect())
                .collect();
            Ok(Dataset {
                matrix: SparseColumnMatrix::from_columns(ds.d(), columns)?,
                targets: ds.targets.clone(),
                orientation: ds.orientation,
            })
        }
    }
}

/// Picks `n_rows` rows and `n_cols` columns uniformly without replacement,
/// then removes rows and columns left without any nonzero.
pub fn subsample(ds: &Dataset, n_rows: usize, n_cols: usize, seed: u64) -> Result<Dataset> {
    if n_rows > ds.d() || n_cols > ds.n() {
        return Err(Error::InvalidArgument(format!(
            "cannot take {n_rows}x{n_cols} from a {}x{} matrix",
            ds.d(),
            ds.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = sample(&mut rng, ds.d(), n_rows).into_vec();
    let mut cols = sample(&mut rng, ds.n(), n_cols).into_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    let picked = ds.restrict(&rows, &cols)?;

    let row_counts = picked.matrix.row_counts();
    let keep_rows: Vec<usize> = (0..picked.d()).filter(|&r| row_counts[r] > 0).collect();
    let keep_cols: Vec<usize> = (0..picked.n())
        .filter(|&c| !picked.matrix.column(c).is_empty())
        .collect();
    picked.restrict(&keep_rows, &keep_cols)
}

/// Summary statistics in the layout of a dataset table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub d: usize,
    pub n: usize,
    pub nnz: usize,
    pub density: f64,
    /// Coefficient of variation of column norms, `std / mean`.
    pub norm_std_over_mean: f64,
    /// The inverse ratio `mean / std`, as some tables print it.
    pub norm_mean_over_std: f64,
}

pub fn dataset_stats(matrix: &SparseColumnMatrix) -> DatasetStats {
    let norms = matrix.column_norms();
    let n = norms.len();
    let (mean, std) = if n == 0 {
        (0.0, 0.0)
    } else {
        let mean = norms.iter().sum::<f64>() / n as f64;
        let var = norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        (mean, var.sqrt())
    };
    DatasetStats {
        d: matrix.n_rows(),
        n,
        nnz: matrix.nnz(),
        density: matrix.density(),
        norm_std_over_mean: std / mean,
        norm_mean_over_std: mean / std,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small(orientation: Orientation) -> Dataset {
        let m = SparseColumnMatrix::from_dense(2, 2, &[3.0, 4.0, 0.0, 2.0]).unwrap();
        let targets = match orientation {
            Orientation::FeaturesAsColumns => vec![1.0, 0.0],
            Orientation::DatapointsAsColumns => vec![1.0, -1.0],
        };
        Dataset::new(m, targets, orientation).unwrap()
    }

    #[test]
    fn unit_l2_scales_three_four_column() {
        let ds = normalize_columns(
            &small(Orientation::FeaturesAsColumns),
            Normalization::UnitL2,
        )
        .unwrap();
        assert_eq!(ds.matrix.column(0).values, &[0.6, 0.8]);
        assert_eq!(ds.matrix.column(1).values, &[1.0]);
    }

    #[test]
    fn none_is_identity() {
        let ds = small(Orientation::FeaturesAsColumns);
        assert_eq!(normalize_columns(&ds, Normalization::None).unwrap(), ds);
    }

    #[test]
    fn unit_l2_names_zero_column() {
        let m = SparseColumnMatrix::from_columns(2, vec![vec![(0, 1.0)], vec![], vec![(1, 2.0)]])
            .unwrap();
        let ds = Dataset::new(m, vec![0.0, 1.0], Orientation::FeaturesAsColumns).unwrap();
        match normalize_columns(&ds, Normalization::UnitL2) {
            Err(Error::ZeroColumn(1)) => {}
            other => panic!("expected zero-column error, got {other:?}"),
        }
    }

    #[test]
    fn unit_l2_on_random_matrix_gives_unit_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dense: Vec<f64> = (0..35).map(|_| rng.random_range(-3.0..3.0)).collect();
        let m = SparseColumnMatrix::from_dense(5, 7, &dense).unwrap();
        let ds = Dataset::new(m, vec![0.0; 5], Orientation::FeaturesAsColumns).unwrap();
        let once = normalize_columns(&ds, Normalization::UnitL2).unwrap();
        for col in once.matrix.columns() {
            let norm = col.values.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        let twice = normalize_columns(&once, Normalization::UnitL2).unwrap();
        for (a, b) in once
            .matrix
            .to_dense_column_major()
            .iter()
            .zip(twice.matrix.to_dense_column_major())
        {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn subsample_full_size_removes_only_zero_lines() {
        let m = SparseColumnMatrix::from_columns(
            3,
            vec![vec![(0, 1.0)], vec![], vec![(0, 2.0), (2, 1.0)]],
        )
        .unwrap();
        let ds = Dataset::new(m, vec![1.0, -1.0, 1.0], Orientation::DatapointsAsColumns).unwrap();
        let sub = subsample(&ds, 3, 3, 11).unwrap();
        assert_eq!(sub.d(), 2);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.targets, vec![1.0, 1.0]);
        assert_eq!(sub.matrix.to_dense_column_major(), vec![1.0, 0.0, 2.0, 1.0]);
    }

    #[test]
    fn subsample_is_deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dense: Vec<f64> = (0..400)
            .map(|_| if rng.random::<f64>() < 0.2 { 1.0 } else { 0.0 })
            .collect();
        let m = SparseColumnMatrix::from_dense(20, 20, &dense).unwrap();
        let ds = Dataset::new(m, vec![1.0; 20], Orientation::DatapointsAsColumns).unwrap();
        let a = subsample(&ds, 10, 8, 42).unwrap();
        let b = subsample(&ds, 10, 8, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.d() <= 10 && a.n() <= 8);
        assert!(subsample(&ds, 21, 1, 0).is_err());
    }

    #[test]
    fn pm1_mapping() {
        let m = SparseColumnMatrix::from_columns(1, vec![vec![(0, 1.0)]; 3]).unwrap();
        let ds = Dataset::new(m, vec![2.0, 1.0, 2.0], Orientation::DatapointsAsColumns).unwrap();
        let ds = ds.with_pm1_labels().unwrap();
        assert_eq!(ds.targets, vec![1.0, -1.0, 1.0]);
        ds.check_pm1_labels().unwrap();
    }

    #[test]
    fn orientation_round_trip() {
        let ds = small(Orientation::DatapointsAsColumns);
        let f = ds.to_features_as_columns();
        assert_eq!(f.d(), ds.n());
        assert_eq!(f.to_datapoints_as_columns(), ds);
    }
}
