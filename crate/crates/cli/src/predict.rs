use std::io::Write;

use jumpchamp_core::hl_model::{CandidateFamily, HlModel};
use jumpchamp_core::Exec;
use serde::Serialize;

use crate::args::{Format, PredictArgs};
use crate::error::{CliError, CliResult};
use crate::output::{sink, table_meta};

#[derive(Serialize)]
struct Row {
    pattern: String,
    singular_series: f64,
    main: f64,
    corrected: f64,
    rank: usize,
}

pub fn run(args: &PredictArgs, exec: Exec) -> CliResult<()> {
    let k = args.k as usize;
    let family = match (args.dmax, args.patterns.is_empty()) {
        (Some(dmax), _) => CandidateFamily::UpTo { dmax },
        (None, false) => {
            if let Some(p) = args.patterns.iter().find(|p| p.k() != k) {
                return Err(CliError::Usage(format!(
                    "pattern {p} has {} diffs, expected k = {k}",
                    p.k()
                )));
            }
            CandidateFamily::Explicit(args.patterns.clone())
        }
        (None, true) => CandidateFamily::Default,
    };
    let model = HlModel::with_exec(args.truncation, exec)?;
    let ranked = model.predict_champion(args.x, k, &family)?;
    if ranked.is_empty() {
        eprintln!("warning: every candidate has a vanishing singular series; the table is empty");
    }
    let outside = ranked
        .iter()
        .filter(|r| r.prediction.regime_warning)
        .count();
    if outside > 0 {
        eprintln!("note: {outside} pattern(s) have d_k >= log x, outside the correction's regime");
    }
    let rows: Vec<Row> = ranked
        .iter()
        .map(|r| Row {
            pattern: r.prediction.pattern.to_string(),
            singular_series: r.prediction.singular_series,
            main: r.prediction.main_term,
            corrected: r.prediction.corrected,
            rank: r.rank,
        })
        .collect();

    let meta = table_meta();
    let mut w = sink(args.common.out.as_deref())?;
    match args.common.format {
        Format::Csv => {
            writeln!(w, "{}", meta.header_line())?;
            let mut out = csv::Writer::from_writer(&mut w);
            out.write_record(["pattern", "singular_series", "main", "corrected", "rank"])?;
            for row in &rows {
                out.write_record([
                    row.pattern.clone(),
                    row.singular_series.to_string(),
                    row.main.to_string(),
                    row.corrected.to_string(),
                    row.rank.to_string(),
                ])?;
            }
            out.flush()?;
        }
        Format::Json => {
            let doc = serde_json::json!({ "meta": meta, "x": args.x, "k": k, "rows": rows });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}
