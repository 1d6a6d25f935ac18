//! Two-column CSV files of bivariate observations.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Parses two numeric columns; a first row that is not numeric is taken as a header.
pub fn parse_pairs<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "row {}: expected two columns, found {}",
                line + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => out.push((x, y)),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "row {}: `{}`, `{}` are not numbers",
                    line + 1,
                    &record[0],
                    &record[1]
                )))
            }
        }
    }
    Ok(out)
}

pub fn read_pairs_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    parse_pairs(File::open(path)?)
}

/// Writes header `u1,u2` and values with 17 significant digits.
pub fn write_pairs<W: Write>(writer: W, pairs: &[(f64, f64)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["u1", "u2"]).map_err(csv_error)?;
    for &(u, v) in pairs {
        wtr.write_record([format!("{u:.16e}"), format!("{v:.16e}")])
            .map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_pairs_csv(path: &Path, pairs: &[(f64, f64)]) -> Result<()> {
    write_pairs(File::create(path)?, pairs)
}
