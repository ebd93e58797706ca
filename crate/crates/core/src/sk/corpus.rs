use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tiles::{apply, branch, combine, reconstruct, translate};
use super::{parse, reduce_oracle, ExprNode, Reduction};

/// Random term with exactly `leaves` leaves: S and K with probability 0.3
/// each, otherwise one of `vars` variables.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, leaves: usize, vars: usize) -> ExprNode {
    if leaves <= 1 {
        let u: f64 = rng.gen();
        return if u < 0.3 {
            ExprNode::S
        } else if u < 0.6 {
            ExprNode::K
        } else {
            let v = rng.gen_range(0..vars.max(1)) as u8;
            ExprNode::Var(((b'a' + v) as char).to_string())
        };
    }
    let k = rng.gen_range(1..leaves);
    ExprNode::app(random_expr(rng, k, vars), random_expr(rng, leaves - k, vars))
}

/// Largest store the eager simulation will grow before giving up.
const EAGER_MAX_TILES: usize = 20_000;

/// Reduce by firing every reachable redex the tile rewrites allow, round
/// after round, on a single store. This is the most eager schedule the
/// distributed runner can take.
pub fn eager_reduce(expr: &ExprNode, max_steps: usize) -> Reduction {
    let t = translate(expr);
    let mut store = t.store();
    let mut steps = 0;
    loop {
        let mut fired = false;
        for req in branch(&store, t.root, |_| true) {
            if let Ok(Some(incs)) = combine(&req, &store) {
                if steps == max_steps || store.len() > EAGER_MAX_TILES {
                    return Reduction::StepLimit { steps };
                }
                apply(&mut store, &incs);
                steps += 1;
                fired = true;
            }
        }
        if !fired {
            return match reconstruct(&store, t.root) {
                Ok(expr) => Reduction::NormalForm { expr, steps },
                Err(_) => Reduction::StepLimit { steps },
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub count: usize,
    pub min_leaves: usize,
    pub max_leaves: usize,
    pub vars: usize,
    /// Oracle budget; only terms normalizing within it are kept.
    pub oracle_steps: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            count: 30,
            min_leaves: 4,
            max_leaves: 10,
            vars: 4,
            oracle_steps: 200,
            seed: 0,
        }
    }
}

/// Rejection-sample distinct terms that take at least one step, normalize
/// under the oracle within budget, and also normalize (to the same form)
/// under the eager schedule.
pub fn generate_corpus(spec: &CorpusSpec) -> Vec<ExprNode> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut attempts = 0usize;
    while out.len() < spec.count && attempts < 1_000_000 {
        attempts += 1;
        let leaves = rng.gen_range(spec.min_leaves..=spec.max_leaves);
        let e = random_expr(&mut rng, leaves, spec.vars);
        let key = e.to_string();
        if seen.contains(&key) {
            continue;
        }
        let Reduction::NormalForm { expr: nf, steps } = reduce_oracle(&e, spec.oracle_steps) else {
            continue;
        };
        if steps == 0 {
            continue;
        }
        if eager_reduce(&e, spec.oracle_steps * 4).normal_form() != Some(&nf) {
            continue;
        }
        seen.insert(key);
        out.push(e);
    }
    out
}

/// Terms in which structurally equal subtrees are consumed by different
/// redexes. Distinct tile ids are what keep those uses apart.
pub fn duplicate_subtree_corpus() -> Vec<ExprNode> {
    [
        "(K a b)(K a c)",
        "(S K K a)(S K K b)",
        "(K (f x) a)(K (f x) b)",
        "K (K a b) (K a c)",
        "S (K a) (K a) b",
        "(K (S K K a) b)(S K K a)",
    ]
    .iter()
    .map(|s| parse(s).expect("corpus entry parses"))
    .collect()
}
