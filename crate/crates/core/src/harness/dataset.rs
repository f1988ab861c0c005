//! CSV datasets and pair sampling.

use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Per-column affine map applied by [`Dataset::standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    dim: usize,
    pub source: Option<PathBuf>,
    pub normalization: Option<Normalization>,
}

impl Dataset {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Parse { line: i + 1, msg: format!("expected {dim} values, found {}", r.len()) });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse { line: i + 1, msg: "non-finite value".into() });
            }
        }
        Ok(Self { rows, dim, source: None, normalization: None })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Zero-mean, unit-variance columns (constant columns are only centered).
    pub fn standardize(&self) -> Self {
        let n = self.len().max(1) as f64;
        let mean: Vec<f64> = (0..self.dim).map(|j| self.rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale: Vec<f64> = (0..self.dim)
            .map(|j| {
                let var = self.rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 { var.sqrt() } else { 1.0 }
            })
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| (v - mean[j]) / scale[j]).collect())
            .collect();
        Self { rows, dim: self.dim, source: self.source.clone(), normalization: Some(Normalization { mean, scale }) }
    }
}

/// Reads comma-separated reals. A first row that does not parse as numbers is
/// taken as a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k as u64 + 1, |p| p.line()) as usize;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if k == 0 => continue,
            Err(_) => {
                let bad = rec.iter().find(|c| c.parse::<f64>().is_err()).unwrap_or_default();
                return Err(Error::Parse { line, msg: format!("non-numeric cell '{bad}'") });
            }
        };
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse { line, msg: format!("non-finite value {v}") });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse { line, msg: format!("expected {w} columns, found {}", row.len()) });
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no data rows".into() });
    }
    let mut ds = Dataset::from_rows(rows)?;
    ds.source = Some(path.to_path_buf());
    Ok(ds)
}

/// Writes one comma-separated row per entry.
pub fn write_csv_rows(path: impl AsRef<Path>, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `n` index pairs drawn uniformly with replacement, distinct within a pair.
pub fn sample_pair_indices(rows: usize, n: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if rows < 2 {
        return Err(Error::Argument(format!("pair sampling needs at least 2 rows, got {rows}")));
    }
    let mut rng = rng::seeded(seed);
    Ok((0..n)
        .map(|_| {
            let i = rng.random_range(0..rows);
            let mut j = rng.random_range(0..rows - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        })
        .collect())
}

pub fn sample_pairs(ds: &Dataset, n: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    Ok(sample_pair_indices(ds.len(), n, seed)?
        .into_iter()
        .map(|(i, j)| (ds.rows[i].clone(), ds.rows[j].clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn zeros_file() {
        let f = write("0,0\n0,0\n0,0\n");
        let ds = load_csv(f.path()).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 2));
    }

    #[test]
    fn header_is_skipped() {
        let f = write("a, b\n1, 2\n3.5,-4e-1\n");
        let ds = load_csv(f.path()).unwrap();
        assert_eq!(ds.rows(), &[vec![1.0, 2.0], vec![3.5, -0.4]]);
    }

    #[test]
    fn ragged_and_garbage_report_lines() {
        let f = write("1,2\n3,4\n5\n");
        match load_csv(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let f = write("1,2\n3,x\n");
        match load_csv(f.path()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains('x'));
            }
            other => panic!("{other:?}"),
        }
        assert!(load_csv(write("h1,h2\n").path()).is_err());
    }

    #[test]
    fn two_rows_give_the_only_pair() {
        let ds = Dataset::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let p = sample_pairs(&ds, 1, 0).unwrap();
        assert_ne!(p[0].0, p[0].1);
        let one = Dataset::from_rows(vec![vec![1.0]]).unwrap();
        assert!(sample_pairs(&one, 1, 0).is_err());
    }

    #[test]
    fn pair_frequencies_are_uniform() {
        let n = 100_000;
        let idx = sample_pair_indices(5, n, 17).unwrap();
        let mut counts = [[0usize; 5]; 5];
        for &(i, j) in &idx {
            assert_ne!(i, j);
            counts[i][j] += 1;
        }
        // 20 ordered pairs, each with probability 1/20.
        let expect = n as f64 / 20.0;
        let chi2: f64 = (0..5)
            .flat_map(|i| (0..5).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| (counts[i][j] as f64 - expect).powi(2) / expect)
            .sum();
        // 19 degrees of freedom; the 0.999 quantile is about 43.8.
        assert!(chi2 < 43.8, "chi2 {chi2}");
    }

    #[test]
    fn standardize_records_the_map() {
        let ds = Dataset::from_rows(vec![vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let s = ds.standardize();
        assert_eq!(s.rows(), &[vec![-1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(s.normalization.unwrap().mean, vec![2.0, 5.0]);
    }
}
