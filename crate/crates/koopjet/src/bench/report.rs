//! Trace and summary emission.

use super::metrics::Metrics;
use super::runner::Trace;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Trace CSV with the fixed `t,Nd_rel,N_rel,N_hat_rel,v,Wf,clamp`
/// schema; the estimate column is empty for observerless controllers.
pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let mut body = String::with_capacity(trace.t.len() * 64);
    body.push_str("t,Nd_rel,N_rel,N_hat_rel,v,Wf,clamp\n");
    for k in 0..trace.t.len() {
        let n_hat = trace.n_hat_rel[k]
            .map(|v| v.to_string())
            .unwrap_or_default();
        writeln!(
            body,
            "{},{},{},{},{},{},{}",
            trace.t[k],
            trace.nd_rel[k],
            trace.n_rel[k],
            n_hat,
            trace.v[k],
            trace.wf[k],
            trace.clamp[k] as u8
        )
        .expect("string write");
    }
    if let Some(f) = &trace.failure {
        writeln!(body, "# failure: {f}").expect("string write");
    }
    std::fs::write(path, body)?;
    Ok(())
}

/// Summary JSON keyed controller -> scenario -> metrics, with the run
/// lineage attached.
pub fn write_summary(
    path: &Path,
    results: &BTreeMap<String, BTreeMap<String, Metrics>>,
    lineage: &serde_json::Value,
) -> Result<()> {
    if results.is_empty() {
        return Err(Error::invalid("write_summary: no metrics to report"));
    }
    let doc = serde_json::json!({
        "units": { "wiae": "RPM*s", "iae": "RPM*s", "mst": "s" },
        "controllers": results,
        "lineage": lineage,
    });
    std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}
