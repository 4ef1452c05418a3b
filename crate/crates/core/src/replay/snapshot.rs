//! Line-delimited JSON snapshot of a replay buffer: a header line, then one
//! trajectory record per line, oldest first.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ReplayBuffer, ReplayError, TrajectoryRecord};

pub const SNAPSHOT_FORMAT: &str = "autotelic-replay";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    capacity: usize,
    first_id: u64,
    records: usize,
}

pub fn write_snapshot<W: Write>(buffer: &ReplayBuffer, mut out: W) -> Result<(), ReplayError> {
    let header = Header {
        format: SNAPSHOT_FORMAT.to_string(),
        version: SNAPSHOT_VERSION,
        capacity: buffer.capacity,
        first_id: buffer.first_id,
        records: buffer.len(),
    };
    let line = |e: serde_json::Error| ReplayError::Snapshot(e.to_string());
    serde_json::to_writer(&mut out, &header).map_err(line)?;
    out.write_all(b"\n")?;
    for (_, record) in buffer.records() {
        serde_json::to_writer(&mut out, record.as_ref()).map_err(line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a snapshot back, re-validating every record and rebuilding the index.
pub fn load_snapshot<R: BufRead>(input: R) -> Result<ReplayBuffer, ReplayError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| ReplayError::Snapshot("empty snapshot".into()))??;
    let header: Header = serde_json::from_str(&first).map_err(|e| ReplayError::Snapshot(format!("header: {e}")))?;
    if header.format != SNAPSHOT_FORMAT || header.version != SNAPSHOT_VERSION {
        return Err(ReplayError::Snapshot(format!("unsupported format {} v{}", header.format, header.version)));
    }
    let mut buffer = ReplayBuffer::new(header.capacity.max(1));
    buffer.first_id = header.first_id;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let record: TrajectoryRecord =
            serde_json::from_str(&line).map_err(|e| ReplayError::Snapshot(format!("record {}: {e}", i + 1)))?;
        buffer.push(record)?;
    }
    if buffer.len() != header.records {
        return Err(ReplayError::Snapshot(format!(
            "header announces {} records, found {}",
            header.records,
            buffer.len()
        )));
    }
    Ok(buffer)
}
