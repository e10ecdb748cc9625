//! Dataset persistence: CSV body plus a JSON lineage sidecar.

use super::{Dataset, Lineage};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

const HEADER: &str = "t,N_raw,N_filt,N_norm,Wf_norm,dNdt,segment";

/// Write `<path>` as CSV and `<path>.lineage.json` alongside it.
pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let mut body = String::with_capacity(ds.len() * 96);
    body.push_str(HEADER);
    body.push('\n');
    for i in 0..ds.len() {
        writeln!(
            body,
            "{},{},{},{},{},{},{}",
            ds.t[i], ds.n_raw[i], ds.n_filt[i], ds.n_norm[i], ds.wf_norm[i], ds.dn_dt[i], ds.segment[i]
        )
        .expect("string write");
    }
    std::fs::write(path, body)?;
    let sidecar = sidecar_path(path);
    std::fs::write(sidecar, serde_json::to_string_pretty(&ds.lineage)?)?;
    Ok(())
}

/// Read a dataset written by [`write_dataset`].
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        other => {
            return Err(Error::invalid(format!(
                "dataset {}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut ds = Dataset {
        t: Vec::new(),
        n_raw: Vec::new(),
        n_filt: Vec::new(),
        n_norm: Vec::new(),
        wf_norm: Vec::new(),
        dn_dt: Vec::new(),
        segment: Vec::new(),
        lineage: read_lineage(path)?,
    };
    for (row, line) in lines.enumerate() {
        let mut cols = line.split(',');
        let mut take = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| Error::invalid(format!("row {row}: missing {name}")))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("row {row}: bad {name}: {e}")))
        };
        ds.t.push(take("t")?);
        ds.n_raw.push(take("N_raw")?);
        ds.n_filt.push(take("N_filt")?);
        ds.n_norm.push(take("N_norm")?);
        ds.wf_norm.push(take("Wf_norm")?);
        ds.dn_dt.push(take("dNdt")?);
        let seg = cols
            .next()
            .ok_or_else(|| Error::invalid(format!("row {row}: missing segment")))?;
        ds.segment.push(
            seg.parse::<u8>()
                .map_err(|e| Error::invalid(format!("row {row}: bad segment: {e}")))?,
        );
    }
    Ok(ds)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".lineage.json");
    s.into()
}

fn read_lineage(path: &Path) -> Result<Lineage> {
    let text = std::fs::read_to_string(sidecar_path(path))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datakit::prepare_regression;

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("koopjet_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let t: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        let n: Vec<f64> = t.iter().map(|t| 8000.0 + 50.0 * t.sin()).collect();
        let ds = prepare_regression(t, n, vec![0.12; 300], vec![2; 300], 0.0, 11).unwrap();
        let path = dir.join("ds.csv");
        write_dataset(&path, &ds).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back.len(), ds.len());
        for i in 0..ds.len() {
            assert_eq!(back.n_norm[i], ds.n_norm[i]);
            assert_eq!(back.dn_dt[i], ds.dn_dt[i]);
        }
        assert_eq!(back.lineage.seed, 11);
        // byte-identical rewrite
        let first = std::fs::read(&path).unwrap();
        write_dataset(&path, &back).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
        std::fs::remove_dir_all(&dir).ok();
    }
}
