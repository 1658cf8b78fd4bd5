use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use jumpchamp_core::gap_census::{
    champions_of, write_champions_csv, write_snapshot_csv, write_snapshot_json, CensusConfig,
    CensusScanner, CensusSink, CensusState, TableMeta,
};
use jumpchamp_core::prime_engine::{write_segment_dump, PrimeSegment};
use jumpchamp_core::{CensusSnapshot, ChampionRecord, Exec};
use serde::{Deserialize, Serialize};

use crate::args::{CensusArgs, Format};
use crate::error::{CliError, CliResult};
use crate::output::{create_file, table_meta};

/// On-disk resume record: scanner position plus what was already reported.
#[derive(Debug, Serialize, Deserialize)]
struct ResumeFile {
    scanner: CensusState,
    champions: Vec<ChampionRecord>,
    /// Checkpoints whose snapshot had no windows.
    empty: Vec<u64>,
}

struct FileSink {
    dir: PathBuf,
    format: Format,
    meta: TableMeta,
    dump: Option<BufWriter<File>>,
    champions: Vec<ChampionRecord>,
    empty: Vec<u64>,
}

impl FileSink {
    fn snapshot_path(&self, snap: &CensusSnapshot) -> PathBuf {
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        self.dir
            .join(format!("census_k{}_x{}.{ext}", snap.k, snap.x))
    }
}

impl CensusSink for FileSink {
    fn on_snapshot(&mut self, snap: CensusSnapshot) -> jumpchamp_core::Result<()> {
        let path = self.snapshot_path(&snap);
        let w = BufWriter::new(File::create(&path)?);
        match self.format {
            Format::Csv => write_snapshot_csv(&snap, &self.meta, w)?,
            Format::Json => write_snapshot_json(&snap, &self.meta, w)?,
        }
        if snap.counts.is_empty() {
            eprintln!(
                "warning: no windows of {} primes anchored at or below {}",
                snap.k + 1,
                snap.x
            );
            self.empty.push(snap.x);
        } else {
            self.champions.push(champions_of(&snap)?);
        }
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn on_segment(&mut self, segment: &PrimeSegment) -> jumpchamp_core::Result<()> {
        if let Some(w) = self.dump.as_mut() {
            write_segment_dump(segment, w)?;
        }
        Ok(())
    }
}

fn checkpoints(args: &CensusArgs) -> CliResult<Vec<u64>> {
    let mut cps = args.checkpoints.clone();
    match (args.limit, cps.last().copied()) {
        (None, None) => {
            return Err(CliError::Usage(
                "census needs --limit or --checkpoints".into(),
            ));
        }
        (Some(limit), None) => cps.push(limit),
        (Some(limit), Some(last)) if last > limit => {
            return Err(CliError::Usage(format!(
                "checkpoint {last} exceeds --limit {limit}; raise the limit or drop the checkpoint"
            )));
        }
        (Some(limit), Some(last)) if last < limit => cps.push(limit),
        _ => {}
    }
    Ok(cps)
}

fn load_resume(path: &Path, cfg: &CensusConfig) -> CliResult<Option<ResumeFile>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path)?;
    let mut file: ResumeFile = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{} is not a census state file: {e}",
            path.display()
        ))
    })?;
    let saved = &file.scanner.config;
    if saved.k != cfg.k
        || saved.convention != cfg.convention
        || saved.checkpoints != cfg.checkpoints
    {
        return Err(CliError::Usage(format!(
            "{} belongs to a different census (k = {}, {} checkpoints); delete it or match its flags",
            path.display(),
            saved.k,
            saved.checkpoints.len()
        )));
    }
    file.scanner.config.exec = cfg.exec;
    Ok(Some(file))
}

fn save_resume(path: &Path, scanner: &CensusScanner, sink: &FileSink) -> CliResult<()> {
    let record = ResumeFile {
        scanner: scanner.state(),
        champions: sink.champions.clone(),
        empty: sink.empty.clone(),
    };
    let tmp = path.with_extension("tmp");
    {
        let mut w = create_file(&tmp)?;
        serde_json::to_writer(&mut w, &record).map_err(|e| CliError::Io(e.to_string()))?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn run(args: &CensusArgs, exec: Exec) -> CliResult<()> {
    let cps = checkpoints(args)?;
    let cfg = CensusConfig::new(cps, args.k as usize, args.convention.into())?
        .with_segment_size(args.segment_size)?
        .with_exec(exec);
    let dir = args
        .common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;

    let resumed = match &args.resume {
        Some(p) => load_resume(p, &cfg)?,
        None => None,
    };
    let dump = match &args.dump_primes {
        Some(p) => {
            let f = OpenOptions::new()
                .create(true)
                .write(true)
                .append(resumed.is_some())
                .truncate(resumed.is_none())
                .open(p)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            Some(BufWriter::new(f))
        }
        None => None,
    };
    let meta = table_meta();
    let (mut scanner, champions, empty) = match resumed {
        Some(r) => {
            eprintln!("resuming at {}", r.scanner.next_lo);
            (CensusScanner::from_state(r.scanner)?, r.champions, r.empty)
        }
        None => (CensusScanner::new(cfg)?, Vec::new(), Vec::new()),
    };
    let mut sink = FileSink {
        dir: dir.clone(),
        format: args.common.format,
        meta: meta.clone(),
        dump,
        champions,
        empty,
    };

    match &args.resume {
        Some(path) => {
            let stride = args.resume_every.max(args.segment_size);
            while !scanner.is_finished() {
                let until = scanner.position().saturating_add(stride);
                scanner.advance(until, &mut sink)?;
                if let Some(d) = sink.dump.as_mut() {
                    d.flush()?;
                }
                save_resume(path, &scanner, &sink)?;
            }
        }
        None => scanner.run(&mut sink)?,
    }
    if let Some(mut d) = sink.dump.take() {
        d.flush()?;
    }

    let path = dir.join("champions.csv");
    write_champions_csv(&sink.champions, &meta, create_file(&path)?)?;
    write_champions_csv(&sink.champions, &meta, std::io::stdout().lock())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
