//! Maximum-weight independent set on a conflict graph.
//!
//! The graph is split into connected components; each component is solved
//! exactly when small enough, otherwise greedily with swap-based local search.

use super::SolverStatus;

#[derive(Debug, Clone, PartialEq)]
pub struct MwisSolution {
    pub chosen: Vec<usize>,
    pub value: f64,
    pub status: SolverStatus,
    pub components: usize,
    pub largest_component: usize,
}

/// Hard cap on the exact component size (bitmask width).
pub const MAX_EXACT: usize = 64;

/// `adj[i]` lists the neighbours of vertex `i`. Vertices with non-positive
/// weight are never chosen.
pub fn solve_mwis(weights: &[f64], adj: &[Vec<usize>], exact_limit: usize) -> MwisSolution {
    assert_eq!(weights.len(), adj.len());
    let n = weights.len();
    let exact_limit = exact_limit.min(MAX_EXACT);
    let active: Vec<bool> = weights.iter().map(|&w| w > 0.0).collect();

    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if !active[s] || comp_of[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![s];
        comp_of[s] = id;
        let mut members = Vec::new();
        while let Some(v) = stack.pop() {
            members.push(v);
            for &u in &adj[v] {
                if active[u] && comp_of[u] == usize::MAX {
                    comp_of[u] = id;
                    stack.push(u);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }

    let mut chosen = Vec::new();
    let mut all_exact = true;
    let mut any_improved = false;
    for members in &comps {
        let (pick, status) = if members.len() <= exact_limit {
            (exact_component(weights, adj, members), SolverStatus::Exact)
        } else {
            let (pick, improved) = local_search_component(weights, adj, members);
            all_exact = false;
            any_improved |= improved;
            (pick, if improved { SolverStatus::Improved } else { SolverStatus::Greedy })
        };
        debug_assert!(status != SolverStatus::Infeasible);
        chosen.extend(pick);
    }
    chosen.sort_unstable();
    let status = if all_exact {
        SolverStatus::Exact
    } else if any_improved {
        SolverStatus::Improved
    } else {
        SolverStatus::Greedy
    };
    MwisSolution {
        value: chosen.iter().map(|&i| weights[i]).sum(),
        chosen,
        status,
        components: comps.len(),
        largest_component: comps.iter().map(Vec::len).max().unwrap_or(0),
    }
}

struct Exact {
    w: Vec<f64>,
    nbr: Vec<u64>,
    best: f64,
    best_set: u64,
}

impl Exact {
    /// Greedy clique cover: each clique contributes its heaviest vertex.
    fn bound(&self, mut cand: u64) -> f64 {
        let mut total = 0.0;
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            total += self.w[v];
            let mut clique = 1u64 << v;
            let mut common = self.nbr[v] & cand;
            while common != 0 {
                let u = common.trailing_zeros() as usize;
                clique |= 1 << u;
                common &= self.nbr[u];
                common &= !(1u64 << u);
            }
            cand &= !clique;
        }
        total
    }

    fn search(&mut self, cand: u64, set: u64, value: f64) {
        if cand == 0 {
            if value > self.best {
                self.best = value;
                self.best_set = set;
            }
            return;
        }
        if value + self.bound(cand) <= self.best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let bit = 1u64 << v;
        self.search(cand & !bit & !self.nbr[v], set | bit, value + self.w[v]);
        self.search(cand & !bit, set, value);
    }
}

fn exact_component(weights: &[f64], adj: &[Vec<usize>], members: &[usize]) -> Vec<usize> {
    // heaviest first so the lowest set bit is the branching vertex
    let mut order = members.to_vec();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut local = vec![usize::MAX; weights.len()];
    for (k, &v) in order.iter().enumerate() {
        local[v] = k;
    }
    let nbr: Vec<u64> = order
        .iter()
        .map(|&v| {
            adj[v]
                .iter()
                .filter(|&&u| local[u] != usize::MAX && u != v)
                .fold(0u64, |m, &u| m | 1 << local[u])
        })
        .collect();
    let mut ex = Exact {
        w: order.iter().map(|&v| weights[v]).collect(),
        nbr,
        best: -1.0,
        best_set: 0,
    };
    let all = if order.len() == 64 { u64::MAX } else { (1u64 << order.len()) - 1 };
    ex.search(all, 0, 0.0);
    (0..order.len()).filter(|&k| ex.best_set >> k & 1 == 1).map(|k| order[k]).collect()
}

fn local_search_component(weights: &[f64], adj: &[Vec<usize>], members: &[usize]) -> (Vec<usize>, bool) {
    let mut order = members.to_vec();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let n = weights.len();
    let mut inset = vec![false; n];
    // number of chosen neighbours
    let mut blocked = vec![0u32; n];
    let add = |v: usize, inset: &mut Vec<bool>, blocked: &mut Vec<u32>| {
        inset[v] = true;
        for &u in &adj[v] {
            blocked[u] += 1;
        }
    };
    let remove = |v: usize, inset: &mut Vec<bool>, blocked: &mut Vec<u32>| {
        inset[v] = false;
        for &u in &adj[v] {
            blocked[u] -= 1;
        }
    };
    let fill = |inset: &mut Vec<bool>, blocked: &mut Vec<u32>| {
        for &v in &order {
            if !inset[v] && blocked[v] == 0 {
                add(v, inset, blocked);
            }
        }
    };
    fill(&mut inset, &mut blocked);
    let value = |inset: &[bool]| members.iter().filter(|&&v| inset[v]).map(|&v| weights[v]).sum::<f64>();
    let greedy_value = value(&inset);

    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut improved = false;
        // (1, k)-swap: insert v and evict its chosen neighbours
        for &v in &order {
            if inset[v] {
                continue;
            }
            let evicted: Vec<usize> = adj[v].iter().copied().filter(|&u| inset[u]).collect();
            let lost: f64 = evicted.iter().map(|&u| weights[u]).sum();
            if weights[v] > lost + 1e-15 {
                for u in evicted {
                    remove(u, &mut inset, &mut blocked);
                }
                add(v, &mut inset, &mut blocked);
                fill(&mut inset, &mut blocked);
                improved = true;
            }
        }
        // (2, 1)-swap: drop u, insert two non-adjacent vertices it alone blocks
        for &u in &order {
            if !inset[u] {
                continue;
            }
            let freed: Vec<usize> = adj[u]
                .iter()
                .copied()
                .filter(|&x| !inset[x] && blocked[x] == 1 && weights[x] > 0.0)
                .collect();
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, &x) in freed.iter().enumerate() {
                for &y in &freed[i + 1..] {
                    if adj[x].contains(&y) {
                        continue;
                    }
                    let gain = weights[x] + weights[y];
                    if gain > weights[u] + 1e-15 && best.is_none_or(|(g, _, _)| gain > g) {
                        best = Some((gain, x, y));
                    }
                }
            }
            if let Some((_, x, y)) = best {
                remove(u, &mut inset, &mut blocked);
                add(x, &mut inset, &mut blocked);
                add(y, &mut inset, &mut blocked);
                fill(&mut inset, &mut blocked);
                improved = true;
            }
        }
        if !improved || rounds >= 200 {
            break;
        }
    }
    let chosen: Vec<usize> = members.iter().copied().filter(|&v| inset[v]).collect();
    let better = value(&inset) > greedy_value;
    (chosen, better)
}
