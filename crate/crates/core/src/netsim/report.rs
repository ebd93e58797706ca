use serde::{Deserialize, Serialize};

use super::{ChannelConfig, FaultConfig, SimTime};
use crate::metrics::LedgerSummary;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub events: u64,
    pub sent: u64,
    pub transmissions: u64,
    pub retransmissions: u64,
    pub delivered: u64,
    pub lost: u64,
    pub duplicated: u64,
    pub echoes: u64,
    pub dropped_at_down_node: u64,
    pub acks_sent: u64,
    pub acks_lost: u64,
    pub acked: u64,
    pub nacks: u64,
    pub gave_up: u64,
    pub crashes: u64,
    pub recoveries: u64,
}

/// Outcome of one engine run. Seed and configuration are echoed so that a
/// report alone is enough to reproduce the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub seed: u64,
    pub nodes: usize,
    pub channel: ChannelConfig,
    pub faults: FaultConfig,
    pub counters: Counters,
    pub final_time: SimTime,
    pub quiescent: bool,
    pub unacked: u64,
    pub trace_hash: String,
    pub ledger: LedgerSummary,
}

impl TraceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace report serializes")
    }
}
