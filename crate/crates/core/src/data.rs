//! The observed sample `{(Y_i, U_i, V_i)}` and its CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bandwidth::sort_permutation;
use crate::error::{Error, Result};

/// Response and the two predictors, in observation order, with the
/// permutations that sort each predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    sort_u: Vec<usize>,
    sort_v: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    y: f64,
    u: f64,
    v: f64,
}

impl Dataset {
    pub fn new(y: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if u.len() != n || v.len() != n {
            return Err(Error::Dimension(format!(
                "y, u, v have lengths {}, {}, {}",
                n,
                u.len(),
                v.len()
            )));
        }
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 observations, got {n}")));
        }
        if let Some(i) = (0..n).find(|&i| !(y[i].is_finite() && u[i].is_finite() && v[i].is_finite())) {
            return Err(Error::Domain(format!("non-finite value in observation {i}")));
        }
        let sort_u = sort_permutation(&u);
        let sort_v = sort_permutation(&v);
        Ok(Self { y, u, v, sort_u, sort_v })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Indices of `u` in ascending order: `u[sort_u[0]]` is `U_(1)`.
    pub fn sort_u(&self) -> &[usize] {
        &self.sort_u
    }

    pub fn sort_v(&self) -> &[usize] {
        &self.sort_v
    }

    pub fn mean_y(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.len() as f64
    }

    /// Reads a `y,u,v` CSV with a header row. Any non-numeric field is an error.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["y", "u", "v"] {
            return Err(Error::Parse(format!(
                "expected header `y,u,v`, found `{}`",
                names.join(",")
            )));
        }
        let (mut y, mut u, mut v) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.deserialize::<Row>().enumerate() {
            let row = rec.map_err(|e| Error::Parse(format!("data row {}: {e}", line + 1)))?;
            y.push(row.y);
            u.push(row.u);
            v.push(row.v);
        }
        Self::new(y, u, v)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for i in 0..self.len() {
            wtr.serialize(Row {
                y: self.y[i],
                u: self.u[i],
                v: self.v[i],
            })?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_permutations_order_data() {
        let d = Dataset::new(vec![0.0; 4], vec![3.0, 1.0, 2.0, 1.0], vec![0.5, -1.0, 9.0, 0.0]).unwrap();
        let su: Vec<f64> = d.sort_u().iter().map(|&i| d.u()[i]).collect();
        assert!(su.windows(2).all(|w| w[0] <= w[1]));
        let sv: Vec<f64> = d.sort_v().iter().map(|&i| d.v()[i]).collect();
        assert_eq!(sv, vec![-1.0, 0.0, 0.5, 9.0]);
        let mut seen = d.sort_u().to_vec();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Dataset::new(vec![1.0], vec![1.0], vec![1.0]).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(Dataset::new(vec![1.0, f64::NAN], vec![1.0, 2.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = Dataset::new(vec![0.1, -2.5, 1e-17], vec![1.0 / 3.0, 2.0, 3.0], vec![7.0, 8.0, 9.25]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"y,u,v\n"));
        assert_eq!(Dataset::read_csv(&buf[..]).unwrap(), d);
    }

    #[test]
    fn csv_non_numeric_is_hard_error() {
        let text = "y,u,v\n1,2,3\n1,abc,3\n4,5,6\n";
        assert!(matches!(Dataset::read_csv(text.as_bytes()), Err(Error::Parse(_))));
        let text = "y,u,v\n1,2,3\n1,,3\n";
        assert!(Dataset::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn csv_header_checked() {
        assert!(Dataset::read_csv("a,b,c\n1,2,3\n4,5,6\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("y,v,u\n1,2,3\n4,5,6\n".as_bytes()).is_err());
    }
}
