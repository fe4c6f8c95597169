//! The lollipop family on which approximate balance only buys `Θ(nε)` stability.
//!
//! For `k ≥ 2` the graph has vertices `v_0, u_1, v_1, …, u_k, v_k` (ids 0,
//! 1, 2, … in that order), unit weights, a pendant edge `v_0 u_1`, and the
//! alternating cycle `u_1 v_1 u_2 … u_k v_k u_1` with `M = {u_j v_j}`. With
//! `ε = 4/(k+2)²`, the allocation `x_{u_j} = 1 - j(k+2-j)ε`,
//! `x_{v_j} = j(k+2-j)ε` is `2ε`-quasi-balanced while `v_0 u_1` is short by
//! `(k+1)ε`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightedGraph};
use crate::outcome::{Allocation, Matching, Outcome};
use crate::rational::{int, ratio, Rational};
use crate::status::check_outcome;

pub fn tight_eps(k: u32) -> Rational {
    ratio(4, (k as i64 + 2).pow(2))
}

fn u(j: u32) -> Vertex {
    2 * j as usize - 1
}

fn v(j: u32) -> Vertex {
    2 * j as usize
}

/// Builds the instance and its allocation, and checks the quasi-balance and
/// instability gap exactly.
pub fn gen_tight_lollipop(k: u32) -> Result<Outcome> {
    if k < 2 {
        return Err(Error::Input(format!("k must be at least 2 (got {k}); k = 1 would need a two-vertex cycle")));
    }
    let n = 2 * k as usize + 1;
    let mut edges = vec![(v(0), u(1), 1)];
    for j in 1..=k {
        edges.push((u(j), v(j), 1));
        let next = if j == k { u(1) } else { u(j + 1) };
        edges.push((v(j), next, 1));
    }
    let g = WeightedGraph::new(n, edges)?;
    let m = Matching::from_pairs(&g, (1..=k).map(|j| (u(j), v(j))))?;
    let eps = tight_eps(k);
    let mut x = vec![Rational::zero(); n];
    for j in 1..=k {
        let t = int((j * (k + 2 - j)) as i64) * &eps;
        x[u(j)] = int(1) - &t;
        x[v(j)] = t;
    }
    let o = Outcome::new(g, m, Allocation(x))?;

    let two_eps = &eps * int(2);
    let gap = &eps * int(k as i64 + 1);
    let report = check_outcome(&o, &two_eps, &gap)?;
    if !report.eps_quasi_balanced || report.max_imbalance != two_eps {
        return Err(Error::Internal(format!("tight family k={k}: max imbalance {} != 2ε", report.max_imbalance)));
    }
    if report.max_instability() != gap || report.worst_slack_edge != Some((v(0), u(1))) {
        return Err(Error::Internal(format!("tight family k={k}: instability {} != (k+1)ε", report.max_instability())));
    }
    Ok(o)
}
