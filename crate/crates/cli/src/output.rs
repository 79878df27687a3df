use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use mfscale_core::io::write_file;
use mfscale_core::Result;

use crate::Format;

/// One named result, renderable as CSV text and/or JSON.
pub struct Item {
    pub name: String,
    pub csv: Option<String>,
    pub json: Value,
}

impl Item {
    pub fn new<T: Serialize>(
        name: impl Into<String>,
        csv: Option<String>,
        json: &T,
    ) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            csv,
            json: serde_json::to_value(json)?,
        })
    }
}

/// Writes `name.csv` / `name.json` under the output directory, or prints
/// everything to stdout: CSV tables separated by blank lines, JSON as one
/// document (an object keyed by name when there are several items).
pub fn emit(out: Option<&PathBuf>, format: Format, items: Vec<Item>) -> Result<()> {
    match out {
        Some(dir) => {
            for item in items {
                match (format, item.csv) {
                    (Format::Csv, Some(csv)) => {
                        write_file(&dir.join(format!("{}.csv", item.name)), &csv)?
                    }
                    _ => write_file(
                        &dir.join(format!("{}.json", item.name)),
                        &pretty(&item.json)?,
                    )?,
                }
            }
        }
        None => {
            let text = match format {
                Format::Csv => items
                    .into_iter()
                    .map(|i| match i.csv {
                        Some(c) => Ok(c),
                        None => pretty(&i.json),
                    })
                    .collect::<Result<Vec<_>>>()?
                    .join("\n"),
                Format::Json if items.len() == 1 => pretty(&items[0].json)?,
                Format::Json => pretty(&Value::Object(
                    items.into_iter().map(|i| (i.name, i.json)).collect(),
                ))?,
            };
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
