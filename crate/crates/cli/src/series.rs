use std::io::Write;

use jumpchamp_core::singular_series::SeriesEvaluator;
use jumpchamp_core::Exec;
use serde::Serialize;

use crate::args::{Format, SeriesArgs};
use crate::error::CliResult;
use crate::output::{sink, table_meta};

fn set_label(set: &[i64]) -> String {
    set.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Serialize)]
struct Row {
    set: String,
    value: f64,
    lower: f64,
    upper: f64,
    tail_bound: f64,
    truncation_prime: u64,
    zero_flag: bool,
}

pub fn run(args: &SeriesArgs, exec: Exec) -> CliResult<()> {
    let eval = SeriesEvaluator::with_exec(args.truncation, exec)?;
    let mut rows = Vec::with_capacity(args.set.len());
    for set in &args.set {
        let v = eval.evaluate(set)?;
        rows.push(Row {
            set: set_label(set),
            value: v.value,
            lower: v.lower(),
            upper: v.upper(),
            tail_bound: v.tail_bound,
            truncation_prime: v.truncation_prime,
            zero_flag: v.zero_flag,
        });
    }
    let meta = table_meta();
    let mut w = sink(args.common.out.as_deref())?;
    match args.common.format {
        Format::Csv => {
            writeln!(w, "{}", meta.header_line())?;
            let mut out = csv::Writer::from_writer(&mut w);
            for row in &rows {
                out.serialize(row)?;
            }
            out.flush()?;
        }
        Format::Json => {
            let doc = serde_json::json!({ "meta": meta, "rows": rows });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}
