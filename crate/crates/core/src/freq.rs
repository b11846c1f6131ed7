//! Frequency tables, equal-width binning, truncations and the renormalized
//! empirical distribution on a truncation.
//!
//! Counts are real-valued: worked examples may use fractional frequencies such
//! as 79.93. Rows with zero counts are kept until [`drop_zero`] is called
//! explicitly, since removing them changes the truncated sample size.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const POINT_TOL: f64 = 1e-9;

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= POINT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Support points with absolute frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    points: Vec<f64>,
    counts: Vec<f64>,
    /// Complete sample size, when known. Estimators never read it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    full_size: Option<f64>,
}

impl FrequencyTable {
    pub fn new(points: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTable("table has no rows".into()));
        }
        if points.len() != counts.len() {
            return Err(Error::InvalidTable(format!(
                "{} points but {} counts",
                points.len(),
                counts.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidTable(format!("non-finite point {p}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable(format!(
                "points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(c) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidTable(format!("invalid count {c}")));
        }
        Ok(FrequencyTable {
            points,
            counts,
            full_size: None,
        })
    }

    /// Attach the complete (pre-truncation) sample size.
    pub fn with_full_size(mut self, n: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) || n + 1e-9 < self.truncated_size() {
            return Err(Error::InvalidTable(format!(
                "full size {n} is below the truncated size {}",
                self.truncated_size()
            )));
        }
        self.full_size = Some(n);
        Ok(self)
    }

    /// Counts the distinct values of a discrete sample.
    pub fn tabulate(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut points: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for x in sorted {
            match points.last() {
                Some(&last) if last == x => *counts.last_mut().expect("paired") += 1.0,
                _ => {
                    points.push(x);
                    counts.push(1.0);
                }
            }
        }
        FrequencyTable::new(points, counts)?.with_full_size(sample.len() as f64)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.counts.iter().copied())
    }

    /// n_t, the sum of the counts.
    pub fn truncated_size(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn full_size(&self) -> Option<f64> {
        self.full_size
    }

    /// Q = 100 (n - n_t) / n, when the complete size is known.
    pub fn truncation_proportion(&self) -> Option<f64> {
        self.full_size
            .map(|n| 100.0 * (n - self.truncated_size()) / n)
    }

    /// Frequency-weighted mean of the points.
    pub fn mean(&self) -> f64 {
        let n = self.truncated_size();
        self.rows().map(|(u, c)| u * c).sum::<f64>() / n
    }

    pub fn position(&self, point: f64) -> Option<usize> {
        self.points.iter().position(|&p| same_point(p, point))
    }

    /// Same table with every count multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        FrequencyTable::new(
            self.points.clone(),
            self.counts.iter().map(|c| c * factor).collect(),
        )
    }

    /// Rows whose 0-based indices are listed (in table order).
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidTable(format!("row {bad} out of range")));
        }
        FrequencyTable::new(
            idx.iter().map(|&i| self.points[i]).collect(),
            idx.iter().map(|&i| self.counts[i]).collect(),
        )
    }

    /// Writes the table as `point,count` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["point", "count"])?;
        for (p, c) in self.rows() {
            w.write_record([p.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `point,count` CSV; lines starting with `#` are ignored.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            point: f64,
            count: f64,
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["point", "count"] {
            return Err(Error::InvalidTable(format!(
                "expected header `point,count`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        let mut counts = Vec::new();
        for (line, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::InvalidTable(format!("row {}: {e}", line + 1)))?;
            if row.count < 0.0 {
                return Err(Error::InvalidTable(format!(
                    "negative count {} at point {}",
                    row.count, row.point
                )));
            }
            points.push(row.point);
            counts.push(row.count);
        }
        FrequencyTable::new(points, counts)
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<FrequencyTable> {
    FrequencyTable::read_csv(std::fs::File::open(path)?)
}

pub fn save_csv(table: &FrequencyTable, path: impl AsRef<Path>) -> Result<()> {
    table.write_csv(std::fs::File::create(path)?)
}

/// Parses a raw sample: one number per line, blank lines and `#` comments ignored.
pub fn parse_sample(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad sample value `{l}`")))
        })
        .collect()
}

pub fn load_sample(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_sample(&std::fs::read_to_string(path)?)
}

/// A subset of a table's points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    kept: Vec<f64>,
}

impl Truncation {
    pub fn new(kept: Vec<f64>) -> Result<Self> {
        if kept.is_empty() {
            return Err(Error::InvalidTable("truncation keeps no points".into()));
        }
        Ok(Truncation { kept })
    }

    /// Truncation keeping the rows at the given 1-based positions, as in `{u2,...,u5}`.
    pub fn from_positions(table: &FrequencyTable, positions: &[usize]) -> Result<Self> {
        let kept = positions
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .and_then(|i| table.points.get(i).copied())
                    .ok_or_else(|| Error::InvalidTable(format!("no row u{i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Truncation::new(kept)
    }

    pub fn all(table: &FrequencyTable) -> Self {
        Truncation {
            kept: table.points.clone(),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.kept
    }
}

/// Restricts `table` to the truncation's points. The complete size is dropped.
pub fn truncate(table: &FrequencyTable, trunc: &Truncation) -> Result<FrequencyTable> {
    let mut rows = trunc
        .kept
        .iter()
        .map(|&p| table.position(p).ok_or(Error::UnknownPoint(p)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_unstable();
    rows.dedup();
    table.select_rows(&rows)
}

/// Like [`truncate`] but keeps the complete sample size for reporting Q.
pub fn truncate_keeping_full_size(
    table: &FrequencyTable,
    trunc: &Truncation,
) -> Result<FrequencyTable> {
    let out = truncate(table, trunc)?;
    match table.full_size {
        Some(n) => out.with_full_size(n),
        None => Ok(out),
    }
}

/// Removes zero-count rows, preserving order.
pub fn drop_zero(table: &FrequencyTable) -> Result<FrequencyTable> {
    let rows: Vec<usize> = (0..table.len())
        .filter(|&i| table.counts[i] > 0.0)
        .collect();
    if rows.is_empty() {
        return Err(Error::AllZero);
    }
    let mut out = table.select_rows(&rows)?;
    out.full_size = table.full_size;
    Ok(out)
}

/// Relative frequencies on a truncation, renormalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTruncated {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl EmpiricalTruncated {
    /// From explicit probabilities; they are renormalized.
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let table = FrequencyTable::new(points, probs)?;
        empirical_truncated(&table)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(u, p)| u * p)
            .sum()
    }
}

/// f̃_i = n_i / n_t. Every count must be positive.
pub fn empirical_truncated(table: &FrequencyTable) -> Result<EmpiricalTruncated> {
    if let Some((p, _)) = table.rows().find(|&(_, c)| c <= 0.0) {
        return Err(Error::ZeroCount(p));
    }
    let total = table.truncated_size();
    Ok(EmpiricalTruncated {
        points: table.points.clone(),
        probs: table.counts.iter().map(|c| c / total).collect(),
    })
}

/// Equal-width classes over `[lo, lo + width * classes]`; the last class is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    lo: f64,
    hi: f64,
    width: f64,
    classes: usize,
}

impl Binning {
    pub fn new(lo: f64, hi: f64, classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(Error::InvalidTable("need at least one class".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(Error::InvalidTable(format!(
                "bad binning range [{lo}, {hi}]"
            )));
        }
        // a zero-width range collapses to a single class
        let classes = if hi == lo { 1 } else { classes };
        Ok(Binning {
            lo,
            hi,
            width: (hi - lo) / classes as f64,
            classes,
        })
    }

    /// Classes spanning the sample's `[min, max]`.
    pub fn spanning(sample: &[f64], classes: usize) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let (lo, hi) = sample
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        Binning::new(lo, hi, classes)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn edges(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = (0..self.classes)
            .map(|i| self.lo + self.width * i as f64)
            .collect();
        edges.push(self.hi);
        edges
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.classes)
            .map(|i| self.lo + self.width * (i as f64 + 0.5))
            .collect()
    }

    /// Class of `x`, or `None` outside the range.
    pub fn class_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi()) {
            return None;
        }
        if self.width == 0.0 {
            return Some(0);
        }
        let i = ((x - self.lo) / self.width).floor() as usize;
        Some(i.min(self.classes - 1))
    }

    /// Class counts of `sample`; values outside the range are ignored.
    pub fn counts(&self, sample: &[f64]) -> Vec<f64> {
        let mut counts = vec![0.0; self.classes];
        for &x in sample {
            if let Some(i) = self.class_of(x) {
                counts[i] += 1.0;
            }
        }
        counts
    }

    pub fn tabulate(&self, sample: &[f64]) -> Result<FrequencyTable> {
        FrequencyTable::new(self.midpoints(), self.counts(sample))
    }
}

/// Groups `sample` into `num_bins` equal-width classes over `[min, max]`.
///
/// Points are class midpoints; zero-count classes are kept.
pub fn bin_sample(sample: &[f64], num_bins: usize) -> Result<FrequencyTable> {
    let binning = Binning::spanning(sample, num_bins)?;
    binning
        .tabulate(sample)?
        .with_full_size(sample.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> FrequencyTable {
        FrequencyTable::new(
            (0..8).map(f64::from).collect(),
            vec![15.0, 71.0, 108.0, 134.0, 97.0, 47.0, 23.0, 5.0],
        )
        .unwrap()
        .with_full_size(500.0)
        .unwrap()
    }

    #[test]
    fn truncate_table1() {
        let t = table1();
        let out = truncate(&t, &Truncation::new(vec![2.0, 3.0, 4.0, 5.0]).unwrap()).unwrap();
        assert_eq!(out.counts(), &[108.0, 134.0, 97.0, 47.0]);
        assert_eq!(out.truncated_size(), 386.0);
        assert_eq!(out.full_size(), None);
        let kept =
            truncate_keeping_full_size(&t, &Truncation::new(vec![2.0, 3.0, 4.0, 5.0]).unwrap())
                .unwrap();
        assert!((kept.truncation_proportion().unwrap() - 22.8).abs() < 1e-9);

        let out = truncate(&t, &Truncation::new(vec![5.0, 0.0]).unwrap()).unwrap();
        assert_eq!(out.counts(), &[15.0, 47.0]);
        assert_eq!(out.truncated_size(), 62.0);
    }

    #[test]
    fn truncate_identity_and_unknown_point() {
        let t = table1();
        let all = truncate(&t, &Truncation::all(&t)).unwrap();
        assert_eq!(all.points(), t.points());
        assert_eq!(all.counts(), t.counts());
        assert!(matches!(
            truncate(&t, &Truncation::new(vec![8.0]).unwrap()),
            Err(Error::UnknownPoint(_))
        ));
    }

    #[test]
    fn empirical_truncated_on_delta() {
        let t = truncate(
            &table1(),
            &Truncation::new(vec![2.0, 3.0, 4.0, 5.0]).unwrap(),
        )
        .unwrap();
        let e = empirical_truncated(&t).unwrap();
        assert_eq!(e.probs()[0], 108.0 / 386.0);
        assert_eq!(e.probs()[1], 134.0 / 386.0);

        let single = FrequencyTable::new(vec![4.0], vec![9.0]).unwrap();
        assert_eq!(empirical_truncated(&single).unwrap().probs(), &[1.0]);

        let two = FrequencyTable::new(vec![0.0, 1.0], vec![7.0, 30.0]).unwrap();
        let e = empirical_truncated(&two).unwrap();
        assert_eq!(e.probs(), &[7.0 / 37.0, 30.0 / 37.0]);
        assert!((e.mean() - 30.0 / 37.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_truncated_rejects_zero() {
        let t = FrequencyTable::new(vec![0.0, 1.0], vec![0.0, 3.0]).unwrap();
        assert!(matches!(empirical_truncated(&t), Err(Error::ZeroCount(p)) if p == 0.0));
    }

    #[test]
    fn drop_zero_cases() {
        let t = FrequencyTable::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.0, 5.0, 0.0, 7.0]).unwrap();
        let d = drop_zero(&t).unwrap();
        assert_eq!(d.points(), &[2.0, 4.0]);
        assert_eq!(d.counts(), &[5.0, 7.0]);
        assert_eq!(drop_zero(&d).unwrap(), d);
        let z = FrequencyTable::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(drop_zero(&z), Err(Error::AllZero)));
    }

    #[test]
    fn table_validation() {
        assert!(FrequencyTable::new(vec![], vec![]).is_err());
        assert!(FrequencyTable::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(FrequencyTable::new(vec![2.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(FrequencyTable::new(vec![1.0], vec![-1.0]).is_err());
        assert!(FrequencyTable::new(vec![1.0, 2.0], vec![1.0]).is_err());
        let t = FrequencyTable::new(vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        assert!(t.clone().with_full_size(6.0).is_err());
        assert!(t.with_full_size(7.0).is_ok());
    }

    #[test]
    fn bin_degenerate_sample() {
        let t = bin_sample(&[1.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(t.points(), &[1.0]);
        assert_eq!(t.counts(), &[3.0]);
        let t = bin_sample(&[1.0, 1.0, 1.0], 5).unwrap();
        assert_eq!(t.len(), 1);
        assert!(matches!(bin_sample(&[], 3), Err(Error::EmptySample)));
    }

    #[test]
    fn bin_edges_and_last_class_closed() {
        let b = Binning::new(0.0, 10.0, 5).unwrap();
        assert_eq!(b.midpoints(), vec![1.0, 3.0, 5.0, 7.0, 9.0]);
        assert_eq!(b.class_of(0.0), Some(0));
        assert_eq!(b.class_of(2.0), Some(1));
        assert_eq!(b.class_of(10.0), Some(4));
        assert_eq!(b.class_of(10.5), None);
        assert_eq!(b.class_of(-0.1), None);
    }

    #[test]
    fn tabulate_counts_distinct_values() {
        let t = FrequencyTable::tabulate(&[3.0, 1.0, 3.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.points(), &[1.0, 2.0, 3.0]);
        assert_eq!(t.counts(), &[1.0, 1.0, 3.0]);
        assert_eq!(t.full_size(), Some(5.0));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let t = FrequencyTable::new(vec![30.13, 60.02], vec![79.93, 100.0]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(FrequencyTable::read_csv(buf.as_slice()).unwrap(), t);

        let text = "# comment\npoint,count\n# another\n2, 26\n3,16\n";
        let t = FrequencyTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(t.counts(), &[26.0, 16.0]);

        for bad in [
            "point,count\n2,1\n1,1\n",
            "point,count\n1,-1\n",
            "point,count\n1,abc\n",
            "x,y\n1,1\n",
            "point,count\n",
        ] {
            assert!(FrequencyTable::read_csv(bad.as_bytes()).is_err(), "{bad}");
        }
    }

    #[test]
    fn positions_are_one_based() {
        let t = table1();
        let tr = Truncation::from_positions(&t, &[1, 3]).unwrap();
        assert_eq!(tr.points(), &[0.0, 2.0]);
        assert!(Truncation::from_positions(&t, &[0]).is_err());
        assert!(Truncation::from_positions(&t, &[9]).is_err());
    }

    #[test]
    fn parse_sample_skips_comments() {
        assert_eq!(parse_sample("# x\n1.5\n\n-2\n").unwrap(), vec![1.5, -2.0]);
        assert!(parse_sample("1\nfoo\n").is_err());
    }
}
