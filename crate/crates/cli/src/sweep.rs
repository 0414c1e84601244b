//! Parameter sweeps: one target job per axis value, run in parallel, rows
//! kept in axis order.

use serde_json::{json, Map, Value};

use crate::commands::run_job;
use crate::config::{Job, SweepParams};
use crate::error::{CliError, Result};
use crate::output::{number, Artifact, Table};

/// The target job with `axis` set to `value`.
pub fn job_at(target: &Job, axis: &str, value: f64) -> Result<Job> {
    let mut table = target.table();
    let replacement = match table.get(axis) {
        Some(toml::Value::Integer(_)) => {
            if value.fract() != 0.0 || !value.is_finite() {
                return Err(CliError::Usage(format!(
                    "sweep value {value} is not an integer for {axis:?}"
                )));
            }
            toml::Value::Integer(value as i64)
        }
        Some(toml::Value::Float(_)) => toml::Value::Float(value),
        _ => {
            return Err(CliError::Usage(format!(
                "sweep axis {axis:?} is not a numeric parameter"
            )))
        }
    };
    table.insert(axis.to_string(), replacement);
    Job::from_table(target.name(), table)
}

/// Scalars of a summary object under dotted keys; arrays are indexed.
pub fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        scalar => out.push((prefix.to_string(), scalar.clone())),
    }
}

pub fn run(sweep: &SweepParams, target: &Job) -> Result<Artifact> {
    let values = sweep.values()?;
    let jobs: Vec<Job> = values
        .iter()
        .map(|&v| job_at(target, &sweep.axis, v))
        .collect::<Result<_>>()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = sweep.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("sweep workers: {e}")))?;
    let results: Vec<Result<Artifact>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter().map(run_job).collect()
    });

    let mut flat_rows = Vec::with_capacity(results.len());
    for result in results {
        let artifact = result?;
        let mut flat = Vec::new();
        flatten("", &Value::Object(artifact.summary), &mut flat);
        flat_rows.push(flat);
    }
    let mut columns: Vec<String> = Vec::new();
    for row in &flat_rows {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut header = vec!["index".to_string(), sweep.axis.clone()];
    header.extend(columns.iter().cloned());
    let mut table = Table {
        suffix: String::new(),
        columns: header,
        rows: Vec::new(),
    };
    for (i, (value, row)) in values.iter().zip(&flat_rows).enumerate() {
        let mut cells = vec![json!(i), number(*value)];
        cells.extend(columns.iter().map(|c| {
            row.iter()
                .find(|(k, _)| k == c)
                .map_or(Value::Null, |(_, v)| v.clone())
        }));
        table.rows.push(cells);
    }
    let mut summary = Map::new();
    summary.insert("axis".into(), json!(sweep.axis));
    summary.insert("target".into(), json!(target.name()));
    summary.insert("count".into(), json!(values.len()));
    summary.insert(
        "values".into(),
        Value::Array(values.iter().map(|&v| number(v)).collect()),
    );
    let line = format!(
        "sweep: {} × {} over {} ∈ [{}, {}]",
        values.len(),
        target.name(),
        sweep.axis,
        values[0],
        values[values.len() - 1]
    );
    Ok(Artifact {
        summary,
        line,
        tables: vec![table],
    })
}
