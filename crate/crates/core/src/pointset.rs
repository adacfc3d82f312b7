use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite list of sites in `ℝ^d`, optionally with observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    d: usize,
    sites: Vec<Vec<f64>>,
    values: Option<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl PointSet {
    pub fn new(d: usize, sites: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("point dimension must be positive".into()));
        }
        for (i, s) in sites.iter().enumerate() {
            if s.len() != d {
                return Err(Error::Dimension(format!(
                    "site {i} has {} coordinates, expected {d}",
                    s.len()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("site {i} has a non-finite coordinate")));
            }
        }
        Ok(PointSet {
            d,
            sites,
            values: None,
            labels: None,
        })
    }

    /// Sites on the real line.
    pub fn line(xs: &[f64]) -> Result<Self> {
        PointSet::new(1, xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.sites.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} sites",
                values.len(),
                self.sites.len()
            )));
        }
        self.values = Some(values);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.sites.len() {
            return Err(Error::Dimension("one label per site required".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// `n` sites uniform in `[lo, hi]^d` from a seeded ChaCha stream.
    pub fn random(n: usize, d: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(lo..=hi)).collect())
            .collect();
        PointSet::new(d, sites)
    }

    /// Parse CSV with header `x1,...,xd[,value]`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse(format!("CSV header: {e}")))?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        let has_value = names.last() == Some(&"value");
        let d = if has_value { names.len() - 1 } else { names.len() };
        for (i, name) in names[..d].iter().enumerate() {
            if *name != format!("x{}", i + 1) {
                return Err(Error::Parse(format!(
                    "CSV header column {} is `{name}`, expected `x{}`",
                    i + 1,
                    i + 1
                )));
            }
        }
        let mut sites = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("CSV row {}: {e}", row + 1)))?;
            if record.len() != names.len() {
                return Err(Error::Parse(format!(
                    "CSV row {} has {} fields, expected {}",
                    row + 1,
                    record.len(),
                    names.len()
                )));
            }
            let nums: Vec<f64> = record
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("CSV row {}: `{s}` is not a number", row + 1)))
                })
                .collect::<Result<_>>()?;
            sites.push(nums[..d].to_vec());
            if has_value {
                values.push(nums[d]);
            }
        }
        if d == 0 {
            return Err(Error::Parse("CSV has no coordinate columns".into()));
        }
        let set = PointSet::new(d, sites)?;
        if has_value {
            set.with_values(values)
        } else {
            Ok(set)
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out: Vec<String> = (1..=self.d).map(|i| format!("x{i}")).collect();
        if self.values.is_some() {
            out.push("value".into());
        }
        let mut text = out.join(",") + "\n";
        for (i, s) in self.sites.iter().enumerate() {
            let mut row: Vec<String> = s.iter().map(|v| v.to_string()).collect();
            if let Some(v) = &self.values {
                row.push(v[i].to_string());
            }
            text.push_str(&row.join(","));
            text.push('\n');
        }
        text
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &[f64] {
        &self.sites[i]
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The same sites moved by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for s in &mut out.sites {
            for (v, t) in s.iter_mut().zip(shift) {
                *v += t;
            }
        }
        out
    }

    /// Index pairs `(i, j)`, `i < j`, of coinciding sites.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.sites[i] == self.sites[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_values() {
        let text = "x1,x2,value\n0,1,2.5\n-1,0.5,3\n";
        let p = PointSet::from_csv(text).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.values().unwrap(), &[2.5, 3.0]);
        assert_eq!(PointSet::from_csv(&p.to_csv()).unwrap(), p);
    }

    #[test]
    fn malformed_csv_is_a_parse_error() {
        assert!(matches!(PointSet::from_csv("x1,x2\n1,abc\n"), Err(Error::Parse(_))));
        assert!(matches!(PointSet::from_csv("a,b\n1,2\n"), Err(Error::Parse(_))));
        assert!(matches!(PointSet::from_csv("x1\n1,2\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn random_sets_are_seeded() {
        let a = PointSet::random(10, 3, -5.0, 5.0, 7).unwrap();
        let b = PointSet::random(10, 3, -5.0, 5.0, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.sites().iter().flatten().all(|v| (-5.0..=5.0).contains(v)));
    }
}
