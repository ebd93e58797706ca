use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::tiles::{apply, branch, combine, reconstruct, translate, Store, Translation};
use super::{match_redex, reachable, ExprNode, SkError};
use crate::ids::{NodeId, Rid, TargetId, TileId};
use crate::netsim::{Actor, ChannelConfig, Delivery, Engine, FaultConfig, Net, NetsimError, Reply, SimTime, TraceReport};
use crate::node::owner_of;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkRunConfig {
    pub nodes: usize,
    pub channel: ChannelConfig,
    pub faults: FaultConfig,
    pub seed: u64,
    pub max_time: SimTime,
    /// Budget of distinct rewrite transactions.
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkOutcome {
    NormalForm(ExprNode),
    StepLimit,
    Timeout {
        at: SimTime,
        unacked: usize,
        pending_redexes: usize,
    },
}

#[derive(Debug, Clone)]
pub struct SkRun {
    pub outcome: Result<SkOutcome, SkError>,
    /// Distinct transactions fired.
    pub steps: usize,
    pub stores: Vec<Store>,
    pub trace: TraceReport,
    pub monotone_violations: u64,
}

impl SkRun {
    pub fn normal_form(&self) -> Option<&ExprNode> {
        match &self.outcome {
            Ok(SkOutcome::NormalForm(e)) => Some(e),
            _ => None,
        }
    }
}

struct SkActor {
    root: TileId,
    replicas: Vec<Store>,
    fired: Vec<BTreeSet<Rid>>,
    all_fired: BTreeSet<Rid>,
    max_steps: usize,
    limit_hit: bool,
    monotone_violations: u64,
    errors: Vec<SkError>,
}

impl SkActor {
    fn merge(&mut self, node: NodeId, incs: &[crate::flow::Increment]) -> bool {
        let replica = &mut self.replicas[node.index()];
        let before: Vec<_> = incs
            .iter()
            .filter_map(|i| i.payload.as_value().and_then(|v| v.tiles()))
            .flat_map(|m| m.keys())
            .map(|id| (*id, replica.get(id).cloned()))
            .collect();
        let changed = apply(replica, incs);
        for (id, old) in before {
            if let Some(old) = old {
                if replica[&id] < old {
                    self.monotone_violations += 1;
                }
            }
        }
        changed
    }

    /// Fire every owned redex visible in `node`'s replica until none is left.
    fn fire(&mut self, net: &mut Net, node: NodeId) {
        let p = self.replicas.len();
        loop {
            let reqs = branch(&self.replicas[node.index()], self.root, |id| {
                owner_of(TargetId(id.0), p) == node
            });
            let mut progressed = false;
            for req in reqs {
                if self.fired[node.index()].contains(&req.rid) {
                    continue;
                }
                if !self.all_fired.contains(&req.rid) && self.all_fired.len() >= self.max_steps {
                    self.limit_hit = true;
                    continue;
                }
                match combine(&req, &self.replicas[node.index()]) {
                    Err(e) => self.errors.push(e),
                    Ok(None) => {}
                    Ok(Some(incs)) => {
                        self.fired[node.index()].insert(req.rid);
                        self.all_fired.insert(req.rid);
                        self.merge(node, &incs);
                        for other in 0..p {
                            if other != node.index() {
                                for inc in &incs {
                                    net.send(node, NodeId(other as u32), inc.clone());
                                }
                            }
                        }
                        progressed = true;
                    }
                }
            }
            if !progressed {
                break;
            }
        }
    }
}

impl Actor for SkActor {
    fn on_deliver(&mut self, net: &mut Net, node: NodeId, delivery: &Delivery) -> Reply {
        if self.merge(node, std::slice::from_ref(&delivery.inc)) {
            self.fire(net, node);
        }
        Reply::Ack
    }

    fn on_crash(&mut self, _net: &mut Net, node: NodeId) {
        self.fired[node.index()].clear();
    }

    fn on_recover(&mut self, net: &mut Net, node: NodeId) {
        self.fire(net, node);
    }
}

/// Reduce `expr` on `cfg.nodes` simulated nodes.
pub fn run_distributed(expr: &ExprNode, cfg: &SkRunConfig) -> Result<SkRun, NetsimError> {
    run_translation(&translate(expr), cfg)
}

/// Reduce an already laid-out term. Every replica starts from the full
/// translation.
pub fn run_translation(t: &Translation, cfg: &SkRunConfig) -> Result<SkRun, NetsimError> {
    let store = t.store();
    let actor = SkActor {
        root: t.root,
        replicas: vec![store; cfg.nodes],
        fired: vec![BTreeSet::new(); cfg.nodes],
        all_fired: BTreeSet::new(),
        max_steps: cfg.max_steps,
        limit_hit: false,
        monotone_violations: 0,
        errors: Vec::new(),
    };
    let mut eng = Engine::new(cfg.nodes, cfg.channel, cfg.faults, cfg.seed, actor)?;
    eng.with(|a, net| {
        for n in 0..cfg.nodes {
            a.fire(net, NodeId(n as u32));
        }
    });
    let result = eng.run_until_quiescent(cfg.max_time);
    let (actor, net) = eng.into_parts();
    let pending_redexes = |s: &Store| {
        reachable(s, actor.root)
            .into_iter()
            .filter(|&id| match_redex(s, id).is_some())
            .count()
    };
    let (trace, outcome) = match result {
        Err(NetsimError::NotQuiescent { at, unacked, report, .. }) => (
            *report,
            Ok(SkOutcome::Timeout {
                at,
                unacked,
                pending_redexes: pending_redexes(&actor.replicas[0]),
            }),
        ),
        Err(e) => return Err(e),
        Ok(report) => {
            let outcome = if let Some(e) = actor.errors.first() {
                Err(e.clone())
            } else if actor.replicas.iter().any(|r| r != &actor.replicas[0]) {
                Err(SkError::ReplicasDiverged)
            } else if actor.limit_hit {
                Ok(SkOutcome::StepLimit)
            } else {
                reconstruct(&actor.replicas[0], actor.root).map(SkOutcome::NormalForm)
            };
            (report, outcome)
        }
    };
    let _ = net;
    Ok(SkRun {
        outcome,
        steps: actor.all_fired.len(),
        stores: actor.replicas,
        trace,
        monotone_violations: actor.monotone_violations,
    })
}
