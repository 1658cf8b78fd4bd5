//! CSV / JSON persistence for snapshots and champion tables.
//!
//! Every table starts with a `# tool version, command, timestamp` line.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;

use super::{AnchorConvention, CensusSnapshot, ChampionRecord, GapPattern};
use crate::error::{CoreError, Result};
use crate::prime_engine::is_squarefree;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub timestamp: String,
}

impl TableMeta {
    pub fn header_line(&self) -> String {
        format!(
            "# {} {}, {}, {}",
            self.tool, self.version, self.command, self.timestamp
        )
    }
}

#[derive(Serialize)]
struct SnapshotRow<'a> {
    x: u64,
    k: usize,
    pattern: &'a GapPattern,
    count: u64,
}

#[derive(Serialize)]
struct ChampionRow<'a> {
    x: u64,
    k: usize,
    pattern: &'a GapPattern,
    count: u64,
    gcd: u64,
    gcd_squarefree: bool,
}

fn rows(snap: &CensusSnapshot) -> impl Iterator<Item = SnapshotRow<'_>> {
    snap.counts.iter().map(|(p, &count)| SnapshotRow {
        x: snap.x,
        k: snap.k,
        pattern: p,
        count,
    })
}

/// Header `x,k,pattern,count`; patterns are dash-joined (`2-6`).
pub fn write_snapshot_csv<W: Write>(
    snap: &CensusSnapshot,
    meta: &TableMeta,
    mut w: W,
) -> Result<()> {
    writeln!(w, "{}", meta.header_line())?;
    let mut out = csv::Writer::from_writer(w);
    for row in rows(snap) {
        out.serialize(row)?;
    }
    if snap.counts.is_empty() {
        out.write_record(["x", "k", "pattern", "count"])?;
    }
    out.flush()?;
    Ok(())
}

/// JSON mirror of the CSV table: `{"meta": ..., "anchor_convention": ..., "rows": [...]}`.
pub fn write_snapshot_json<W: Write>(snap: &CensusSnapshot, meta: &TableMeta, w: W) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        meta: &'a TableMeta,
        anchor_convention: AnchorConvention,
        rows: Vec<SnapshotRow<'a>>,
    }
    let doc = Doc {
        meta,
        anchor_convention: snap.anchor_convention,
        rows: rows(snap).collect(),
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

/// Read a snapshot table written by [`write_snapshot_csv`].
pub fn read_snapshot_csv<R: Read>(r: R, convention: AnchorConvention) -> Result<CensusSnapshot> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut counts = BTreeMap::new();
    let mut xk: Option<(u64, usize)> = None;
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| {
            rec.get(i)
                .ok_or_else(|| CoreError::State("short snapshot row".into()))
        };
        let parse_err = |what: &str| CoreError::State(format!("bad {what} in snapshot row"));
        let x: u64 = field(0)?.parse().map_err(|_| parse_err("x"))?;
        let k: usize = field(1)?.parse().map_err(|_| parse_err("k"))?;
        let pattern: GapPattern = field(2)?.parse()?;
        let count: u64 = field(3)?.parse().map_err(|_| parse_err("count"))?;
        match xk {
            None => xk = Some((x, k)),
            Some(prev) if prev != (x, k) => {
                return Err(CoreError::State("snapshot rows mix checkpoints".into()))
            }
            _ => {}
        }
        counts.insert(pattern, count);
    }
    let (x, k) = xk.ok_or_else(|| CoreError::State("empty snapshot table".into()))?;
    Ok(CensusSnapshot {
        x,
        k,
        anchor_convention: convention,
        counts,
    })
}

/// Header `x,k,pattern,count,gcd,gcd_squarefree`, one row per champion.
pub fn write_champions_csv<W: Write>(
    records: &[ChampionRecord],
    meta: &TableMeta,
    mut w: W,
) -> Result<()> {
    writeln!(w, "{}", meta.header_line())?;
    let mut out = csv::Writer::from_writer(w);
    if records.iter().all(|r| r.champions.is_empty()) {
        out.write_record(["x", "k", "pattern", "count", "gcd", "gcd_squarefree"])?;
    }
    for rec in records {
        for p in &rec.champions {
            let gcd = rec.gcds[p];
            out.serialize(ChampionRow {
                x: rec.x,
                k: rec.k,
                pattern: p,
                count: rec.max_count,
                gcd,
                gcd_squarefree: is_squarefree(gcd)?,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}
