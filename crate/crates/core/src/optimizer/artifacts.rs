use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::sbo::EvaluationRecord;
use crate::error::{Error, Result};
use crate::moo::{write_front_csv, Solution};

pub fn write_records_jsonl(path: impl AsRef<Path>, records: &[EvaluationRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_records_jsonl(path: impl AsRef<Path>) -> Result<Vec<EvaluationRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_hv_series(path: impl AsRef<Path>, series: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["generation", "hv"])?;
    for (g, hv) in series.iter().enumerate() {
        w.write_record([g.to_string(), format!("{hv:?}")])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&text).map_err(|e| Error::io(path, e))
}

/// Writes `front.csv`, `hv_series.csv` and `records.jsonl` into `dir`.
pub fn write_run_artifacts(
    dir: impl AsRef<Path>,
    front: &[Solution],
    hv_series: Option<&[f64]>,
    records: &[EvaluationRecord],
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_front_csv(dir.join("front.csv"), front)?;
    if let Some(series) = hv_series {
        write_hv_series(dir.join("hv_series.csv"), series)?;
    }
    write_records_jsonl(dir.join("records.jsonl"), records)
}
