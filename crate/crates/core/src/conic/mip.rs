//! Best-first branch-and-bound over the binary variables of a conic program.
//!
//! Node relaxations reuse the base workspace (fixings enter as rank-one
//! factor updates) and warm-start from their parent. The incumbent is seeded
//! by rounding the root relaxation at 0.5 and re-solving with all binaries
//! fixed; nodes are pruned against the incumbent plus an absolute gap.

use super::problem::ConicProblem;
use super::solver::{ConicSolution, MipStats, SolveSettings, SolveStatus, WarmStart, Workspace};
use crate::error::Error;
use crate::Result;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Node {
    fixings: Vec<(usize, f64)>,
    bound: f64,
    warm: Option<WarmStart>,
    seq: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on bound; FIFO tie-break for determinism
        self.bound
            .partial_cmp(&other.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.seq.cmp(&self.seq))
    }
}

fn child_warm(parent: &ConicSolution) -> WarmStart {
    let mut w = WarmStart {
        x: parent.x.clone(),
        y: parent.y.clone(),
        s: parent.s.clone(),
    };
    // one more fixing row than the parent had
    w.y.push(0.0);
    w.s.push(0.0);
    w
}

/// Solves a mixed-integer conic program to a proven absolute gap.
pub fn solve_mixed(prob: &ConicProblem, settings: &SolveSettings) -> Result<ConicSolution> {
    if prob.binary_idx().is_empty() {
        return Err(Error::Conic(
            "solve_mixed requires at least one binary variable".into(),
        ));
    }
    let binaries: Vec<usize> = prob.binary_idx().to_vec();
    let ws = Workspace::new(prob, settings)?;

    let root = ws.solve(&[], None, settings);
    let mut nodes_explored = 1usize;
    match root.status {
        SolveStatus::Infeasible => {
            let mut sol = root;
            sol.mip = Some(MipStats {
                incumbent: f64::NEG_INFINITY,
                bound: f64::NEG_INFINITY,
                gap: 0.0,
                nodes: nodes_explored,
            });
            return Ok(sol);
        }
        SolveStatus::Unbounded => {
            let mut sol = root;
            sol.mip = Some(MipStats {
                incumbent: f64::NEG_INFINITY,
                bound: f64::INFINITY,
                gap: f64::INFINITY,
                nodes: nodes_explored,
            });
            return Ok(sol);
        }
        _ => {}
    }

    // incumbent from rounding the root
    let mut incumbent: Option<ConicSolution> = None;
    {
        let rounded: Vec<(usize, f64)> = binaries
            .iter()
            .map(|&j| (j, if root.x[j] >= 0.5 { 1.0 } else { 0.0 }))
            .collect();
        let mut warm = root.clone();
        for _ in 0..rounded.len() {
            warm.y.push(0.0);
            warm.s.push(0.0);
        }
        let cand = ws.solve(
            &rounded,
            Some(&WarmStart {
                x: warm.x.clone(),
                y: warm.y.clone(),
                s: warm.s.clone(),
            }),
            settings,
        );
        nodes_explored += 1;
        if cand.status == SolveStatus::Optimal {
            incumbent = Some(cand);
        }
    }

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node {
        fixings: vec![],
        bound: root.objective,
        warm: None,
        seq,
    });
    let mut proven_bound = root.objective;
    let mut budget_hit = false;

    while let Some(node) = heap.pop() {
        let inc_obj = incumbent.as_ref().map_or(f64::NEG_INFINITY, |s| s.objective);
        proven_bound = node.bound.max(inc_obj);
        if node.bound <= inc_obj + settings.mip_gap {
            // best-first: every remaining node is dominated
            proven_bound = inc_obj.max(node.bound.min(inc_obj + settings.mip_gap));
            break;
        }
        if nodes_explored >= settings.mip_node_budget {
            budget_hit = true;
            break;
        }

        // solve this node (root node reuses the already-computed relaxation)
        let sol = if node.fixings.is_empty() {
            root.clone()
        } else {
            nodes_explored += 1;
            ws.solve(&node.fixings, node.warm.as_ref(), settings)
        };
        match sol.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                // a restricted problem cannot be less bounded than the root
                continue;
            }
            _ => {}
        }
        if sol.objective <= inc_obj + settings.mip_gap {
            continue;
        }

        // most fractional unfixed binary
        let fixed: Vec<usize> = node.fixings.iter().map(|&(j, _)| j).collect();
        let mut branch_var = None;
        let mut worst = settings.int_tol;
        for &j in &binaries {
            if fixed.contains(&j) {
                continue;
            }
            let frac = (sol.x[j] - sol.x[j].round()).abs();
            if frac > worst {
                worst = frac;
                branch_var = Some(j);
            }
        }

        match branch_var {
            None => {
                // integral candidate: clean it up with all binaries pinned
                let full: Vec<(usize, f64)> = binaries
                    .iter()
                    .map(|&j| (j, sol.x[j].round().clamp(0.0, 1.0)))
                    .collect();
                let mut warm = child_warm(&sol);
                while warm.y.len() < ws_rows(&ws, full.len()) {
                    warm.y.push(0.0);
                    warm.s.push(0.0);
                }
                warm.y.truncate(ws_rows(&ws, full.len()));
                warm.s.truncate(ws_rows(&ws, full.len()));
                let cand = ws.solve(&full, Some(&warm), settings);
                nodes_explored += 1;
                if cand.status == SolveStatus::Optimal
                    && cand.objective > incumbent.as_ref().map_or(f64::NEG_INFINITY, |s| s.objective)
                {
                    incumbent = Some(cand);
                }
            }
            Some(j) => {
                for val in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, val));
                    seq += 1;
                    heap.push(Node {
                        fixings,
                        bound: sol.objective,
                        warm: Some(child_warm(&sol)),
                        seq,
                    });
                }
            }
        }
    }

    let inc_obj = incumbent.as_ref().map_or(f64::NEG_INFINITY, |s| s.objective);
    let open_bound = heap
        .peek()
        .map(|nd| nd.bound)
        .unwrap_or(f64::NEG_INFINITY)
        .max(inc_obj)
        .min(proven_bound.max(inc_obj));
    let gap = (open_bound - inc_obj).max(0.0);

    match incumbent {
        Some(mut sol) => {
            sol.status = if budget_hit && gap > settings.mip_gap {
                SolveStatus::IterationLimit
            } else {
                SolveStatus::Optimal
            };
            sol.mip = Some(MipStats {
                incumbent: inc_obj,
                bound: open_bound,
                gap,
                nodes: nodes_explored,
            });
            Ok(sol)
        }
        None => Ok(ConicSolution {
            x: vec![0.0; prob.n_vars()],
            status: SolveStatus::Infeasible,
            objective: f64::NEG_INFINITY,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            gap: f64::INFINITY,
            iterations: 0,
            mip: Some(MipStats {
                incumbent: f64::NEG_INFINITY,
                bound: open_bound,
                gap: f64::INFINITY,
                nodes: nodes_explored,
            }),
            y: vec![],
            s: vec![],
        }),
    }
}

fn ws_rows(ws: &Workspace<'_>, fixings: usize) -> usize {
    ws.base_rows() + fixings
}
