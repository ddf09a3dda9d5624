//! JSON and CSV artifacts: report envelopes, fitted component curves and
//! per-replicate Monte-Carlo rows.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backfit::FitResult;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::simulate::ReplicateRow;

/// Where a report came from. No timestamps, so identical runs produce
/// byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: serde_json::to_value(config)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub provenance: Provenance,
    pub result: T,
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One row of the fitted-curve table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub index: usize,
    pub u: f64,
    pub m1_hat: f64,
    pub v: f64,
    pub m2_hat: f64,
    pub y: f64,
    pub residual: f64,
}

pub fn curve_rows(data: &Dataset, fit: &FitResult) -> Result<Vec<CurveRow>> {
    if fit.m1_hat.len() != data.len() || fit.m2_hat.len() != data.len() {
        return Err(Error::Dimension("fit and dataset sizes differ".into()));
    }
    let residuals = fit.residuals(data.y());
    Ok((0..data.len())
        .map(|i| CurveRow {
            index: i,
            u: data.u()[i],
            m1_hat: fit.m1_hat[i],
            v: data.v()[i],
            m2_hat: fit.m2_hat[i],
            y: data.y()[i],
            residual: residuals[i],
        })
        .collect())
}

/// Writes `index,u,m1_hat,v,m2_hat,y,residual`. Floats are printed in
/// shortest round-trip form, so reading the file back is lossless.
pub fn write_curves<W: Write>(writer: W, data: &Dataset, fit: &FitResult) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in curve_rows(data, fit)? {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_curves<R: Read>(reader: R) -> Result<Vec<CurveRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::Parse(format!("curve table: {e}"))))
        .collect()
}

/// Recovers `(alpha_hat, m1_hat, m2_hat)` from a curve table.
pub fn components_from_curves(rows: &[CurveRow]) -> (f64, Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let alpha = rows.iter().map(|r| r.y).sum::<f64>() / n;
    let m1 = rows.iter().map(|r| r.m1_hat).collect();
    let m2 = rows.iter().map(|r| r.m2_hat).collect();
    (alpha, m1, m2)
}

/// Writes `replicate,max_gap_u,max_gap_v,gap_ok,certified,rho_product`.
pub fn write_replicates<W: Write>(writer: W, rows: &[ReplicateRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backfit::backfit_direct;
    use crate::bandwidth::BandwidthSpec;
    use crate::kernel::Kernel;
    use crate::smoother::build_pair;

    #[test]
    fn curves_round_trip_exactly() {
        let u = vec![0.11, 0.52, 0.33, 0.97, 0.74, 0.05];
        let v = vec![0.9, 0.15, 0.48, 0.61, 0.27, 0.83];
        let y: Vec<f64> = u.iter().zip(&v).map(|(a, b): (&f64, &f64)| (3.0 * a).cos() + b / 3.0).collect();
        let d = Dataset::new(y, u, v).unwrap();
        let bw = BandwidthSpec::Constant(0.3);
        let pair = build_pair(&d, Kernel::Gaussian, &bw, &bw).unwrap();
        let fit = backfit_direct(&pair, d.y()).unwrap();

        let mut buf = Vec::new();
        write_curves(&mut buf, &d, &fit).unwrap();
        assert!(buf.starts_with(b"index,u,m1_hat,v,m2_hat,y,residual\n"));
        let rows = read_curves(&buf[..]).unwrap();
        let (alpha, m1, m2) = components_from_curves(&rows);
        assert_eq!(alpha, fit.alpha_hat);
        assert_eq!(m1, fit.m1_hat);
        assert_eq!(m2, fit.m2_hat);
        assert_eq!(rows, curve_rows(&d, &fit).unwrap());
    }

    #[test]
    fn replicate_rows_header() {
        let rows = vec![ReplicateRow {
            replicate: 0,
            max_gap_u: 0.1,
            max_gap_v: 0.2,
            gap_ok: true,
            certified: None,
            rho_product: None,
        }];
        let mut buf = Vec::new();
        write_replicates(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "replicate,max_gap_u,max_gap_v,gap_ok,certified,rho_product\n0,0.1,0.2,true,,\n"
        );
    }
}
