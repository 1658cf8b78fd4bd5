use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use jumpchamp_core::gap_census::TableMeta;

use crate::error::{CliError, CliResult};

pub fn table_meta() -> TableMeta {
    let command = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    TableMeta {
        tool: "jumpchamp".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

pub fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// The file at `path`, or stdout.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create_file(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}
