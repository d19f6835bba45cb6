//! Maximum clique on small dense graphs given as adjacency matrices.

/// Exact maximum clique by branch and bound; intended for at most 64 vertices.
pub fn max_clique_exact(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    assert!(n <= 64, "exact clique search limited to 64 vertices");
    if n == 0 {
        return Vec::new();
    }
    let nbr: Vec<u64> = adj
        .iter()
        .map(|row| row.iter().enumerate().filter(|&(_, &a)| a).fold(0u64, |m, (j, _)| m | (1 << j)))
        .collect();
    let mut best = 0u64;
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    expand(&nbr, 0, all, &mut best);
    (0..n).filter(|&i| best >> i & 1 == 1).collect()
}

fn expand(nbr: &[u64], current: u64, mut cand: u64, best: &mut u64) {
    if cand == 0 {
        if current.count_ones() > best.count_ones() {
            *best = current;
        }
        return;
    }
    while cand != 0 {
        if current.count_ones() + cand.count_ones() <= best.count_ones() {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        cand &= !(1 << v);
        expand(nbr, current | (1 << v), cand & nbr[v], best);
    }
    if current.count_ones() > best.count_ones() {
        *best = current;
    }
}

/// Multi-start greedy clique: from every start vertex, scan the remaining
/// vertices cyclically and keep each one adjacent to all chosen so far.
pub fn greedy_clique(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut best: Vec<usize> = Vec::new();
    for start in 0..n {
        let mut chosen = vec![start];
        for k in 1..n {
            let v = (start + k) % n;
            if chosen.iter().all(|&u| adj[u][v]) {
                chosen.push(v);
            }
        }
        if chosen.len() > best.len() {
            best = chosen;
        }
    }
    best.sort_unstable();
    best
}

/// Number of colours of a greedy proper colouring; bounds the clique number from above.
pub fn coloring_upper_bound(adj: &[Vec<bool>]) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    let by_index: Vec<usize> = (0..n).collect();
    let mut by_degree = by_index.clone();
    by_degree.sort_by_key(|&v| std::cmp::Reverse(adj[v].iter().filter(|&&a| a).count()));
    greedy_colors(adj, &by_index).min(greedy_colors(adj, &by_degree))
}

fn greedy_colors(adj: &[Vec<bool>], order: &[usize]) -> usize {
    let n = adj.len();
    let mut color = vec![usize::MAX; n];
    let mut used = Vec::new();
    let mut colors = 0;
    for &v in order {
        used.clear();
        used.resize(colors + 1, false);
        for u in 0..n {
            if adj[v][u] && color[u] != usize::MAX {
                used[color[u]] = true;
            }
        }
        let c = used.iter().position(|&x| !x).unwrap_or(colors);
        color[v] = c;
        colors = colors.max(c + 1);
    }
    colors
}
