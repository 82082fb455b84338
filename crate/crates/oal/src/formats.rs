//! Region files: line-delimited JSON records or a CSV table.
//!
//! JSON lines carry `{"id", "features", "annotations", "description"?}` where
//! `description` is either a string or a list of predicate strings. The CSV
//! header is `id,f0,...,f{d-1},annotations[,description][,description_predicates]`
//! with annotations and description predicates separated by `|`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use oal_core::corpus::{Description, RegionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("jsonl" | "json" | "ndjson") => Ok(Format::Jsonl),
            Some("csv") => Ok(Format::Csv),
            _ => bail!("cannot infer region format of {}: use .jsonl or .csv", path.display()),
        }
    }

    pub fn parse(name: &str) -> anyhow::Result<Self> {
        match name {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => bail!("unknown region format `{other}` (expected jsonl or csv)"),
        }
    }
}

pub fn load_regions(path: &Path, format: Format) -> anyhow::Result<Vec<RegionRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader = BufReader::new(file);
    match format {
        Format::Jsonl => read_jsonl(reader),
        Format::Csv => read_csv(reader),
    }
    .with_context(|| format!("reading {}", path.display()))
}

pub fn read_jsonl(reader: impl BufRead) -> anyhow::Result<Vec<RegionRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RegionRecord =
            serde_json::from_str(&line).map_err(|e| anyhow!("line {}: malformed record: {e}", i + 1))?;
        out.push(record);
    }
    Ok(out)
}

fn split_list(cell: &str) -> Vec<String> {
    cell.split('|').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

pub fn read_csv(reader: impl std::io::Read) -> anyhow::Result<Vec<RegionRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("id").ok_or_else(|| anyhow!("line 1: missing `id` column"))?;
    let ann_col = col("annotations").ok_or_else(|| anyhow!("line 1: missing `annotations` column"))?;
    let desc_col = col("description");
    let desc_pred_col = col("description_predicates");
    let mut feature_cols = Vec::new();
    while let Some(c) = col(&format!("f{}", feature_cols.len())) {
        feature_cols.push(c);
    }
    if feature_cols.is_empty() {
        bail!("line 1: no feature columns f0..f{{d-1}}");
    }

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| anyhow!("line {line}: {e}"))?;
        let cell = |c: usize| row.get(c).unwrap_or("");
        let id: u64 = cell(id_col).trim().parse().map_err(|e| anyhow!("line {line}: bad id: {e}"))?;
        let features = feature_cols
            .iter()
            .map(|&c| cell(c).trim().parse::<f64>().map_err(|e| anyhow!("line {line}: bad feature: {e}")))
            .collect::<anyhow::Result<Vec<f64>>>()?;
        let text = desc_col.map(cell).filter(|s| !s.trim().is_empty());
        let preds = desc_pred_col.map(cell).filter(|s| !s.trim().is_empty());
        let description = match (text, preds) {
            (Some(_), Some(_)) => bail!("line {line}: both description and description_predicates are set"),
            (Some(t), None) => Some(Description::Text(t.to_string())),
            (None, Some(p)) => Some(Description::Predicates(split_list(p))),
            (None, None) => None,
        };
        out.push(RegionRecord { id, features, annotations: split_list(cell(ann_col)), description });
    }
    Ok(out)
}

pub fn write_regions(path: &Path, records: &[RegionRecord], format: Format) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Jsonl => write_jsonl(&mut w, records)?,
        Format::Csv => write_csv(&mut w, records)?,
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl(w: &mut impl Write, records: &[RegionRecord]) -> anyhow::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv(w: &mut impl Write, records: &[RegionRecord]) -> anyhow::Result<()> {
    let dim = records.first().map_or(0, |r| r.features.len());
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["id".to_string()];
    header.extend((0..dim).map(|i| format!("f{i}")));
    header.extend(["annotations", "description", "description_predicates"].map(String::from));
    wtr.write_record(&header)?;
    for r in records {
        let mut row = vec![r.id.to_string()];
        row.extend(r.features.iter().map(|v| v.to_string()));
        row.push(r.annotations.join("|"));
        match &r.description {
            Some(Description::Text(t)) => row.extend([t.clone(), String::new()]),
            Some(Description::Predicates(p)) => row.extend([String::new(), p.join("|")]),
            None => row.extend([String::new(), String::new()]),
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<RegionRecord> {
        vec![
            RegionRecord {
                id: 1,
                features: vec![0.5, -1.25],
                annotations: vec!["red".into(), "box".into()],
                description: Some(Description::Predicates(vec!["red".into()])),
            },
            RegionRecord {
                id: 2,
                features: vec![0.1, 3.0],
                annotations: vec!["Blue Cup".into()],
                description: Some(Description::Text("a blue cup".into())),
            },
            RegionRecord { id: 3, features: vec![1e-17, 0.0], annotations: vec!["cup".into()], description: None },
        ]
    }

    #[test]
    fn jsonl_round_trip() {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &sample()).unwrap();
        assert_eq!(read_jsonl(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &sample()).unwrap();
        assert_eq!(read_csv(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn errors_name_the_line() {
        let text = "{\"id\":1,\"features\":[1.0],\"annotations\":[\"a\"]}\n{\"id\":2,\"features\":[1.0]\n";
        let err = read_jsonl(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let csv = "id,f0,annotations\n1,0.5,a\n2,oops,b\n";
        let err = read_csv(csv.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
