use std::io::{Read, Write};

use serde::Serialize;

use super::{FlowError, Grid, PathSample};

const MAGIC: &[u8; 8] = b"KLFLOW01";

/// Header of the binary path format. Values follow as little-endian `f64`,
/// path by path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinaryHeader {
    pub seed: u64,
    pub grid: Grid,
    pub paths: u64,
    pub scale: f64,
    pub measure_sha256: String,
}

fn io(e: impl std::fmt::Display) -> FlowError {
    FlowError::Io(e.to_string())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// First column time, then one column per path.
pub fn write_csv<W: Write>(sample: &PathSample, out: W) -> Result<(), FlowError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend((0..sample.paths()).map(|p| format!("path{p}")));
    w.write_record(&header).map_err(io)?;
    for (k, t) in sample.times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(sample.values.iter().map(|p| p[k].to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_binary<W: Write>(sample: &PathSample, mut out: W) -> Result<(), FlowError> {
    let g = sample.spec.grid;
    let mut buf = Vec::with_capacity(88 + 8 * sample.paths() * sample.times.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&sample.spec.seed.to_le_bytes());
    buf.extend_from_slice(&g.t0.to_le_bytes());
    buf.extend_from_slice(&g.step.to_le_bytes());
    buf.extend_from_slice(&(g.count as u64).to_le_bytes());
    buf.extend_from_slice(&(sample.paths() as u64).to_le_bytes());
    buf.extend_from_slice(&sample.scale.to_le_bytes());
    buf.extend_from_slice(&sample.spec.measure_hash());
    for v in sample.values.iter().flatten() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf).map_err(io)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<(BinaryHeader, Vec<Vec<f64>>), FlowError> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf).map_err(io)?;
    if buf.len() < 88 || &buf[..8] != MAGIC {
        return Err(FlowError::Format("bad magic or truncated header".into()));
    }
    let word = |i: usize| -> [u8; 8] { buf[8 + 8 * i..16 + 8 * i].try_into().expect("8 bytes") };
    let seed = u64::from_le_bytes(word(0));
    let grid = Grid {
        t0: f64::from_le_bytes(word(1)),
        step: f64::from_le_bytes(word(2)),
        count: u64::from_le_bytes(word(3)) as usize,
    };
    let paths = u64::from_le_bytes(word(4));
    let scale = f64::from_le_bytes(word(5));
    let hash = hex(&buf[56..88]);
    let body = &buf[88..];
    if body.len() != 8 * grid.count * paths as usize {
        return Err(FlowError::Format(format!("expected {} values", grid.count * paths as usize)));
    }
    let values = body
        .chunks_exact(8 * grid.count.max(1))
        .map(|row| row.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
        .collect();
    Ok((BinaryHeader { seed, grid, paths, scale, measure_sha256: hash }, values))
}
