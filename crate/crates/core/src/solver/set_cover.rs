//! Weighted set cover over a finite candidate family.
//!
//! Candidates are expected to arrive already sorted by the caller's
//! tie-break order; among equally cost-effective sets the lower index wins.

use super::SolverStatus;

#[derive(Debug, Clone)]
pub struct SetCoverProblem {
    pub n_targets: usize,
    pub costs: Vec<f64>,
    /// Target indices covered by each candidate.
    pub covers: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetCoverSolution {
    pub chosen: Vec<usize>,
    /// Sum of the chosen costs; `+inf` when infeasible.
    pub value: f64,
    pub status: SolverStatus,
}

#[derive(Debug, Clone, Copy)]
pub struct CoverLimits {
    /// Exact search when the target has at most this many points.
    pub exact_targets: usize,
    /// Exact search when there are at most this many candidates.
    pub exact_candidates: usize,
}

impl Default for CoverLimits {
    fn default() -> Self {
        CoverLimits {
            exact_targets: 12,
            exact_candidates: 20,
        }
    }
}

impl SetCoverProblem {
    fn value_of(&self, chosen: &[usize]) -> f64 {
        chosen.iter().map(|&i| self.costs[i]).sum()
    }

    pub fn is_cover(&self, chosen: &[usize]) -> bool {
        let mut hit = vec![false; self.n_targets];
        for &i in chosen {
            for &t in &self.covers[i] {
                hit[t] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }
}

pub fn solve(problem: &SetCoverProblem, limits: CoverLimits) -> SetCoverSolution {
    assert_eq!(problem.costs.len(), problem.covers.len());
    if problem.n_targets == 0 {
        return SetCoverSolution {
            chosen: Vec::new(),
            value: 0.0,
            status: SolverStatus::Exact,
        };
    }
    let all: Vec<usize> = (0..problem.costs.len()).collect();
    if !problem.is_cover(&all) {
        return SetCoverSolution {
            chosen: Vec::new(),
            value: f64::INFINITY,
            status: SolverStatus::Infeasible,
        };
    }
    let chosen = if problem.n_targets <= limits.exact_targets.min(20) {
        Some(mask_dp(problem))
    } else if problem.costs.len() <= limits.exact_candidates {
        Some(branch_and_bound(problem))
    } else {
        None
    };
    match chosen {
        Some(mut chosen) => {
            chosen.sort_unstable();
            SetCoverSolution {
                value: problem.value_of(&chosen),
                chosen,
                status: SolverStatus::Exact,
            }
        }
        None => {
            let (mut chosen, improved) = greedy_with_improvement(problem);
            chosen.sort_unstable();
            SetCoverSolution {
                value: problem.value_of(&chosen),
                chosen,
                status: if improved { SolverStatus::Improved } else { SolverStatus::Greedy },
            }
        }
    }
}

/// Dynamic programming over subsets of the target.
fn mask_dp(p: &SetCoverProblem) -> Vec<usize> {
    let n = p.n_targets;
    let full = (1usize << n) - 1;
    // cheapest candidate per distinct coverage mask
    let mut by_mask: Vec<Option<usize>> = vec![None; full + 1];
    for (i, cov) in p.covers.iter().enumerate() {
        let m = cov.iter().fold(0usize, |m, &t| m | (1 << t));
        if m == 0 {
            continue;
        }
        match by_mask[m] {
            Some(j) if p.costs[j] <= p.costs[i] => {}
            _ => by_mask[m] = Some(i),
        }
    }
    let sets: Vec<(usize, usize)> = by_mask
        .iter()
        .enumerate()
        .filter_map(|(m, c)| c.map(|i| (m, i)))
        .collect();
    let mut best = vec![f64::INFINITY; full + 1];
    let mut back: Vec<Option<(usize, usize)>> = vec![None; full + 1];
    best[0] = 0.0;
    for mask in 0..=full {
        if !best[mask].is_finite() {
            continue;
        }
        for &(m, i) in &sets {
            let next = mask | m;
            if next == mask {
                continue;
            }
            let v = best[mask] + p.costs[i];
            if v < best[next] {
                best[next] = v;
                back[next] = Some((mask, i));
            }
        }
    }
    let mut chosen = Vec::new();
    let mut cur = full;
    while cur != 0 {
        let (prev, i) = back[cur].expect("feasible instance has a DP path");
        chosen.push(i);
        cur = prev;
    }
    chosen
}

struct Bnb<'a> {
    p: &'a SetCoverProblem,
    covering: Vec<Vec<usize>>,
    best_value: f64,
    best: Vec<usize>,
}

impl Bnb<'_> {
    fn lower_bound(&self, hit: &[u32]) -> f64 {
        (0..self.p.n_targets)
            .filter(|&t| hit[t] == 0)
            .map(|t| {
                self.covering[t]
                    .iter()
                    .map(|&i| self.p.costs[i])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    fn search(&mut self, chosen: &mut Vec<usize>, hit: &mut [u32], cost: f64) {
        // branch on the uncovered target with the fewest covering candidates
        let pick = (0..self.p.n_targets)
            .filter(|&t| hit[t] == 0)
            .min_by_key(|&t| self.covering[t].len());
        let Some(t) = pick else {
            if cost < self.best_value {
                self.best_value = cost;
                self.best = chosen.clone();
            }
            return;
        };
        if cost + self.lower_bound(hit) >= self.best_value {
            return;
        }
        let mut options = self.covering[t].clone();
        options.sort_by(|&a, &b| self.p.costs[a].total_cmp(&self.p.costs[b]).then(a.cmp(&b)));
        for i in options {
            if chosen.contains(&i) {
                continue;
            }
            for &u in &self.p.covers[i] {
                hit[u] += 1;
            }
            chosen.push(i);
            self.search(chosen, hit, cost + self.p.costs[i]);
            chosen.pop();
            for &u in &self.p.covers[i] {
                hit[u] -= 1;
            }
        }
    }
}

fn branch_and_bound(p: &SetCoverProblem) -> Vec<usize> {
    let mut covering = vec![Vec::new(); p.n_targets];
    for (i, cov) in p.covers.iter().enumerate() {
        for &t in cov {
            covering[t].push(i);
        }
    }
    let (incumbent, _) = greedy_with_improvement(p);
    let mut bnb = Bnb {
        p,
        covering,
        best_value: p.value_of(&incumbent),
        best: incumbent,
    };
    let mut hit = vec![0u32; p.n_targets];
    bnb.search(&mut Vec::new(), &mut hit, 0.0);
    bnb.best
}

/// Greedy by cost per newly covered target, then redundancy removal and
/// single-set replacement. Returns the cover and whether local search helped.
pub fn greedy_with_improvement(p: &SetCoverProblem) -> (Vec<usize>, bool) {
    let n = p.n_targets;
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut chosen: Vec<usize> = Vec::new();
    let mut used = vec![false; p.costs.len()];
    while remaining > 0 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, cov) in p.covers.iter().enumerate() {
            if used[i] {
                continue;
            }
            let fresh = cov.iter().filter(|&&t| !covered[t]).count();
            if fresh == 0 {
                continue;
            }
            let ratio = p.costs[i] / fresh as f64;
            if best.is_none_or(|(r, _, _)| ratio < r) {
                best = Some((ratio, i, fresh));
            }
        }
        let Some((_, i, fresh)) = best else { break };
        used[i] = true;
        chosen.push(i);
        for &t in &p.covers[i] {
            covered[t] = true;
        }
        remaining -= fresh;
    }

    let greedy_value = p.value_of(&chosen);
    let mut count = vec![0u32; n];
    for &i in &chosen {
        for &t in &p.covers[i] {
            count[t] += 1;
        }
    }
    let mut changed = true;
    let mut rounds = 0;
    while changed && rounds < 100 {
        changed = false;
        rounds += 1;
        // drop redundant sets, most expensive first
        let mut order: Vec<usize> = (0..chosen.len()).collect();
        order.sort_by(|&a, &b| p.costs[chosen[b]].total_cmp(&p.costs[chosen[a]]));
        let mut drop = vec![false; chosen.len()];
        for k in order {
            let i = chosen[k];
            if p.covers[i].iter().all(|&t| count[t] > 1) {
                for &t in &p.covers[i] {
                    count[t] -= 1;
                }
                drop[k] = true;
                changed = true;
            }
        }
        let mut k = 0;
        chosen.retain(|_| {
            k += 1;
            !drop[k - 1]
        });
        // replace a set by a cheaper one covering everything only it covers
        for k in 0..chosen.len() {
            let i = chosen[k];
            let sole: Vec<usize> = p.covers[i].iter().copied().filter(|&t| count[t] == 1).collect();
            let replacement = (0..p.costs.len())
                .filter(|&j| !chosen.contains(&j) && p.costs[j] < p.costs[i])
                .filter(|&j| sole.iter().all(|t| p.covers[j].contains(t)))
                .min_by(|&a, &b| p.costs[a].total_cmp(&p.costs[b]).then(a.cmp(&b)));
            if let Some(j) = replacement {
                for &t in &p.covers[i] {
                    count[t] -= 1;
                }
                for &t in &p.covers[j] {
                    count[t] += 1;
                }
                chosen[k] = j;
                changed = true;
            }
        }
    }
    let improved = p.value_of(&chosen) < greedy_value;
    (chosen, improved)
}
