//! CSV writers. Times use the shortest round-trip decimal form and values
//! the shortest round-trip scientific form, so identical inputs always give
//! identical bytes.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use iie_core::eulerian::DiagnosticRecord;

pub type CsvResult<T> = Result<T, csv::Error>;

/// Writes `t,name,value` rows.
pub fn write_diagnostics_csv<W: Write>(w: W, records: &[DiagnosticRecord]) -> CsvResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "name", "value"])?;
    for r in records {
        out.write_record([format!("{}", r.t), r.name.clone(), format!("{:e}", r.value)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_diagnostics_file(path: &Path, records: &[DiagnosticRecord]) -> CsvResult<()> {
    write_diagnostics_csv(File::create(path)?, records)
}

/// Writes a header plus one row per entry; the first column is an integer index.
pub fn write_indexed_table<W: Write>(
    w: W,
    headers: &[&str],
    rows: &[(usize, Vec<f64>)],
) -> CsvResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(headers)?;
    for (index, values) in rows {
        let mut record = vec![index.to_string()];
        record.extend(values.iter().map(|v| format!("{v:e}")));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a diagnostics CSV back into records.
pub fn read_diagnostics_csv<R: std::io::Read>(r: R) -> CsvResult<Vec<DiagnosticRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize::<(f64, String, f64)>()
        .map(|row| row.map(|(t, name, value)| DiagnosticRecord::new(t, name, value)))
        .collect()
}
