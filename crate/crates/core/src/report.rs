//! Machine-readable output: CSV with a `#` config preamble and JSON
//! documents of the form `{"config": …, "results": …}`.

use std::io::{Read, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::SweepTable;
use crate::error::{invalid, Result};
use crate::sector::PropagatorMode;

/// Writes `# config <json>` followed by a header row and data rows.
pub fn write_csv<W, I>(mut out: W, config: &Value, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    writeln!(out, "# config {}", serde_json::to_string(config)?)?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, config: &Value, results: &T) -> Result<()> {
    let doc = json!({ "config": config, "results": results });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// Extracts the config object from a CSV preamble, if present.
pub fn read_csv_config(text: &str) -> Option<Value> {
    text.lines()
        .filter_map(|line| line.strip_prefix("# config "))
        .find_map(|json| serde_json::from_str(json).ok())
}

/// Reads a two-column table from CSV.
///
/// `x` and `y` name the key and value columns; by default the first two
/// columns other than `mode` are used. A `mode` column must hold a single
/// value across all rows; without one `fallback_mode` applies.
pub fn read_table_csv<R: Read>(
    input: R,
    x: Option<&str>,
    y: Option<&str>,
    fallback_mode: PropagatorMode,
) -> Result<SweepTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let data_columns: Vec<usize> = (0..headers.len()).filter(|&i| headers[i] != "mode").collect();
    let locate = |name: Option<&str>, default: usize| -> Result<usize> {
        match name {
            Some(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| invalid("column", format!("no column named `{name}`"))),
            None => data_columns
                .get(default)
                .copied()
                .ok_or_else(|| invalid("column", "need at least two data columns")),
        }
    };
    let (xi, yi) = (locate(x, 0)?, locate(y, 1)?);
    let mode_col = headers.iter().position(|h| h == "mode");

    let mut rows = Vec::new();
    let mut mode: Option<PropagatorMode> = None;
    for record in reader.records() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record
                .get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| invalid("csv", format!("bad number in column `{}`: {e}", headers[i])))
        };
        rows.push((parse(xi)?, parse(yi)?));
        if let Some(mi) = mode_col {
            let row_mode: PropagatorMode = record.get(mi).unwrap_or("").parse()?;
            match mode {
                Some(m) if m != row_mode => {
                    return Err(invalid("mode", format!("table mixes {m} and {row_mode} rows")));
                }
                _ => mode = Some(row_mode),
            }
        }
    }
    SweepTable::new(
        headers[xi].clone(),
        headers[yi].clone(),
        mode.unwrap_or(fallback_mode),
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_preamble() {
        let config = json!({"n": 20, "mode": "spectral"});
        let mut buf = Vec::new();
        write_csv(
            &mut buf,
            &config,
            &["n", "p1", "mode"],
            vec![
                vec!["10".into(), "0.5".into(), "spectral".into()],
                vec!["20".into(), "0.25".into(), "spectral".into()],
            ],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# config {"));
        assert_eq!(read_csv_config(&text).unwrap(), config);
        let table = read_table_csv(text.as_bytes(), None, None, PropagatorMode::Exact).unwrap();
        assert_eq!(table.rows, vec![(10.0, 0.5), (20.0, 0.25)]);
        assert_eq!(table.mode, PropagatorMode::Spectral);
        assert_eq!(table.value, "p1");
    }

    #[test]
    fn mixed_modes_are_rejected() {
        let text = "n,p,mode\n1,1,exact\n2,1,spectral\n";
        assert!(read_table_csv(text.as_bytes(), None, None, PropagatorMode::Exact).is_err());
    }

    #[test]
    fn named_columns() {
        let text = "n,k,p\n5,1,0.2\n6,2,0.3\n";
        let table = read_table_csv(text.as_bytes(), Some("k"), Some("p"), PropagatorMode::Exact).unwrap();
        assert_eq!(table.rows, vec![(1.0, 0.2), (2.0, 0.3)]);
        assert!(read_table_csv(text.as_bytes(), Some("q"), None, PropagatorMode::Exact).is_err());
    }
}
