//! Trilemma instrumentation: communicated bytes (split by boundary), I/O
//! amplification, and peak buffered memory.
//!
//! Two byte boundaries are tracked separately:
//!
//! - the slow-storage boundary (`q_source_bytes`): reads of input tiles,
//!   writes of outputs, and any redundant re-reads of the same tile;
//! - the node-to-node boundary (`q_net_bytes`): every scheduled message copy
//!   plus acks.
//!
//! Amplification is computed over the slow-storage boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::NodeId;
use crate::netsim::SimTime;

/// Bytes charged to the network for each ack.
pub const ACK_BYTES: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("|I| + |O| is zero; amplification is undefined")]
    ZeroIo,
    #[error("no buffer samples were recorded")]
    NoSamples,
    #[error("tile_sizes ({sizes}) and consumption counts ({counts}) differ in length")]
    LengthMismatch { sizes: usize, counts: usize },
    #[error("consumption count of tile {index} is {count}; every tile is consumed at least once")]
    BadConsumption { index: usize, count: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsLedger {
    q_source_bytes: u64,
    q_net_bytes: u64,
    input_bytes: u64,
    output_bytes: u64,
    per_node_peak: Vec<u64>,
    buffer_samples: u64,
    completions: Vec<SimTime>,
}

impl MetricsLedger {
    pub fn new(nodes: usize) -> Self {
        MetricsLedger {
            per_node_peak: vec![0; nodes],
            ..Default::default()
        }
    }

    /// Declare the problem's essential I/O volume `|I|` and `|O|`.
    pub fn set_io(&mut self, input_bytes: u64, output_bytes: u64) {
        self.input_bytes = input_bytes;
        self.output_bytes = output_bytes;
    }

    pub fn record_source_read(&mut self, bytes: u64) {
        self.q_source_bytes += bytes;
    }

    pub fn record_source_write(&mut self, bytes: u64) {
        self.q_source_bytes += bytes;
    }

    pub fn record_net(&mut self, bytes: u64) {
        self.q_net_bytes += bytes;
    }

    /// Sample the bytes currently buffered in `node`'s fast memory.
    pub fn record_buffer(&mut self, node: NodeId, bytes: u64) {
        let i = node.index();
        if i >= self.per_node_peak.len() {
            self.per_node_peak.resize(i + 1, 0);
        }
        self.per_node_peak[i] = self.per_node_peak[i].max(bytes);
        self.buffer_samples += 1;
    }

    pub fn record_completion(&mut self, at: SimTime) {
        self.completions.push(at);
    }

    pub fn q_source_bytes(&self) -> u64 {
        self.q_source_bytes
    }

    pub fn q_net_bytes(&self) -> u64 {
        self.q_net_bytes
    }

    pub fn input_bytes(&self) -> u64 {
        self.input_bytes
    }

    pub fn output_bytes(&self) -> u64 {
        self.output_bytes
    }

    pub fn io_total(&self) -> u64 {
        self.input_bytes + self.output_bytes
    }

    pub fn per_node_peaks(&self) -> &[u64] {
        &self.per_node_peak
    }

    pub fn completions(&self) -> &[SimTime] {
        &self.completions
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            q_source: self.q_source_bytes,
            q_net: self.q_net_bytes,
            io_total: self.io_total(),
            r_a: amplification(self).ok(),
            w_max: peak_memory(self).ok(),
            per_node_peaks: self.per_node_peak.clone(),
        }
    }
}

/// JSON shape: `{q_source, q_net, io_total, R_A, W_max, per_node_peaks[]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub q_source: u64,
    pub q_net: u64,
    pub io_total: u64,
    #[serde(rename = "R_A")]
    pub r_a: Option<f64>,
    #[serde(rename = "W_max")]
    pub w_max: Option<u64>,
    pub per_node_peaks: Vec<u64>,
}

/// `R_A = q_source / (|I| + |O|)`.
pub fn amplification(ledger: &MetricsLedger) -> Result<f64, MetricsError> {
    let io = ledger.io_total();
    if io == 0 {
        return Err(MetricsError::ZeroIo);
    }
    Ok(ledger.q_source_bytes as f64 / io as f64)
}

/// Lower bound on `R_A` when every consumer of a tile fetches it from the
/// source independently: `1 + sum_k (U_k - 1) * |tile_k| / io_total`.
pub fn prop51_bound(tile_sizes: &[u64], consumption_counts: &[u64], io_total: u64) -> Result<f64, MetricsError> {
    if tile_sizes.len() != consumption_counts.len() {
        return Err(MetricsError::LengthMismatch {
            sizes: tile_sizes.len(),
            counts: consumption_counts.len(),
        });
    }
    if io_total == 0 {
        return Err(MetricsError::ZeroIo);
    }
    let mut redundant = 0u64;
    for (index, (&size, &count)) in tile_sizes.iter().zip(consumption_counts).enumerate() {
        if count < 1 {
            return Err(MetricsError::BadConsumption { index, count });
        }
        redundant += (count - 1) * size;
    }
    Ok(1.0 + redundant as f64 / io_total as f64)
}

/// `W_max`: maximum buffered bytes over all nodes and sample times.
pub fn peak_memory(ledger: &MetricsLedger) -> Result<u64, MetricsError> {
    if ledger.buffer_samples == 0 {
        return Err(MetricsError::NoSamples);
    }
    Ok(ledger.per_node_peak.iter().copied().max().unwrap_or(0))
}
