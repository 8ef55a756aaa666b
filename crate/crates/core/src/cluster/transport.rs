//! Trace bounds over contingency tables with fixed marginals, solved as
//! transportation problems.
//!
//! Minimizing (maximizing) the diagonal sum is a min-cost flow with cost 1 on
//! diagonal cells and 0 elsewhere (respectively cost 0 / 1); integral
//! marginals guarantee an integral optimum. Instances here are tiny (k x k
//! with k around 4), so a successive-shortest-path augmentation over the
//! bipartite graph is exact and immediate.

use super::ClusterError;

/// Minimum and maximum achievable diagonal sum over all non-negative integer
/// matrices with the given row and column marginals.
pub fn trace_bounds(rows: &[u64], cols: &[u64]) -> Result<(u64, u64), ClusterError> {
    if rows.is_empty() || rows.len() != cols.len() {
        return Err(ClusterError::BadMarginals);
    }
    let row_total: u64 = rows.iter().sum();
    let col_total: u64 = cols.iter().sum();
    if row_total != col_total {
        return Err(ClusterError::MarginalMismatch {
            rows: row_total,
            cols: col_total,
        });
    }
    let k = rows.len();
    // Min trace: pay 1 per unit on the diagonal.
    let min_trace = min_cost_transport(rows, cols, |i, j| u64::from(i == j));
    // Max trace: pay 1 per unit off the diagonal, so the optimum routes as
    // much as possible over the diagonal.
    let off_diag_cost = min_cost_transport(rows, cols, |i, j| u64::from(i != j));
    let max_trace = row_total - off_diag_cost;
    debug_assert!(min_trace <= max_trace || k == 0);
    Ok((min_trace, max_trace))
}

/// Exact min-cost transportation via successive shortest paths with
/// Bellman-Ford on the residual graph. Nodes: source, k rows, k columns,
/// sink. Each augmentation saturates a row or column, so at most 2k rounds.
fn min_cost_transport(rows: &[u64], cols: &[u64], cost: impl Fn(usize, usize) -> u64) -> u64 {
    let k = rows.len();
    let nodes = 2 * k + 2;
    let source = 2 * k;
    let sink = 2 * k + 1;

    #[derive(Clone)]
    struct Edge {
        to: usize,
        cap: u64,
        cost: i64,
        rev: usize,
    }

    let mut graph: Vec<Vec<Edge>> = vec![Vec::new(); nodes];
    let add_edge = |graph: &mut Vec<Vec<Edge>>, from: usize, to: usize, cap: u64, cost: i64| {
        let rev_from = graph[to].len();
        let rev_to = graph[from].len();
        graph[from].push(Edge {
            to,
            cap,
            cost,
            rev: rev_from,
        });
        graph[to].push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
            rev: rev_to,
        });
    };

    for (i, &supply) in rows.iter().enumerate() {
        add_edge(&mut graph, source, i, supply, 0);
    }
    for (j, &demand) in cols.iter().enumerate() {
        add_edge(&mut graph, k + j, sink, demand, 0);
    }
    let total: u64 = rows.iter().sum();
    for i in 0..k {
        for j in 0..k {
            add_edge(&mut graph, i, k + j, total, cost(i, j) as i64);
        }
    }

    let mut flow = 0u64;
    let mut total_cost = 0i64;
    while flow < total {
        // Bellman-Ford shortest path by cost in the residual graph.
        let mut dist = vec![i64::MAX; nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        dist[source] = 0;
        for _ in 0..nodes {
            let mut improved = false;
            for u in 0..nodes {
                if dist[u] == i64::MAX {
                    continue;
                }
                for (e_idx, e) in graph[u].iter().enumerate() {
                    if e.cap > 0 && dist[u] + e.cost < dist[e.to] {
                        dist[e.to] = dist[u] + e.cost;
                        prev[e.to] = Some((u, e_idx));
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        assert!(dist[sink] < i64::MAX, "transportation problem infeasible");

        // Bottleneck along the path.
        let mut bottleneck = total - flow;
        let mut node = sink;
        while let Some((u, e_idx)) = prev[node] {
            bottleneck = bottleneck.min(graph[u][e_idx].cap);
            node = u;
        }
        // Augment.
        let mut node = sink;
        while let Some((u, e_idx)) = prev[node] {
            let rev = graph[u][e_idx].rev;
            graph[u][e_idx].cap -= bottleneck;
            graph[node][rev].cap += bottleneck;
            total_cost += graph[u][e_idx].cost * bottleneck as i64;
            node = u;
        }
        flow += bottleneck;
    }
    total_cost as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::expected_trace;

    /// Exhaustive oracle: enumerate every feasible diagonal vector and check
    /// the off-diagonal completion with an independent max-flow feasibility
    /// test. The achievable traces are exactly the feasible diagonal sums.
    mod oracle {
        /// Max-flow (augmenting paths) feasibility of a transportation
        /// problem with forbidden diagonal cells.
        fn off_diagonal_feasible(rows: &[u64], cols: &[u64]) -> bool {
            let k = rows.len();
            let total: u64 = rows.iter().sum();
            if total != cols.iter().sum::<u64>() {
                return false;
            }
            // capacity[i][j]: unlimited off-diagonal, zero on the diagonal.
            let mut flow = vec![vec![0u64; k]; k];
            let mut row_left: Vec<u64> = rows.to_vec();
            let mut col_left: Vec<u64> = cols.to_vec();
            // Greedy fill then augmenting search is overkill here; because
            // every off-diagonal cell is uncapacitated, feasibility reduces
            // to a Hall-type bound, but we keep the explicit construction.
            loop {
                // Find any row with remaining supply.
                let Some(i) = (0..k).find(|&i| row_left[i] > 0) else {
                    return true;
                };
                // Direct placement into any off-diagonal column with space.
                if let Some(j) = (0..k).find(|&j| j != i && col_left[j] > 0) {
                    let amount = row_left[i].min(col_left[j]);
                    flow[i][j] += amount;
                    row_left[i] -= amount;
                    col_left[j] -= amount;
                    continue;
                }
                // Only column i has remaining demand: reroute one unit of
                // some other row's flow. Find i2 != i with flow[i2][j2] > 0,
                // j2 != i2, j2 != i, and push flow[i2][i], flow[i][j2].
                let mut rerouted = false;
                'search: for i2 in 0..k {
                    if i2 == i {
                        continue;
                    }
                    for j2 in 0..k {
                        if j2 == i2 || j2 == i || flow[i2][j2] == 0 {
                            continue;
                        }
                        let amount = row_left[i].min(flow[i2][j2]).min(col_left[i]);
                        if amount == 0 {
                            continue;
                        }
                        flow[i2][j2] -= amount;
                        flow[i2][i] += amount;
                        flow[i][j2] += amount;
                        row_left[i] -= amount;
                        col_left[i] -= amount;
                        rerouted = true;
                        break 'search;
                    }
                }
                if !rerouted {
                    return false;
                }
            }
        }

        /// Enumerate feasible diagonal vectors; return (min, max) trace.
        pub fn trace_bounds(rows: &[u64], cols: &[u64]) -> (u64, u64) {
            let k = rows.len();
            let mut min = u64::MAX;
            let mut max = 0u64;
            let mut diag = vec![0u64; k];
            fn recurse(
                rows: &[u64],
                cols: &[u64],
                diag: &mut Vec<u64>,
                idx: usize,
                min: &mut u64,
                max: &mut u64,
                feasible: &dyn Fn(&[u64], &[u64]) -> bool,
            ) {
                let k = rows.len();
                if idx == k {
                    let rem_rows: Vec<u64> =
                        rows.iter().zip(diag.iter()).map(|(&r, &d)| r - d).collect();
                    let rem_cols: Vec<u64> =
                        cols.iter().zip(diag.iter()).map(|(&c, &d)| c - d).collect();
                    if feasible(&rem_rows, &rem_cols) {
                        let trace: u64 = diag.iter().sum();
                        *min = (*min).min(trace);
                        *max = (*max).max(trace);
                    }
                    return;
                }
                for d in 0..=rows[idx].min(cols[idx]) {
                    diag[idx] = d;
                    recurse(rows, cols, diag, idx + 1, min, max, feasible);
                }
                diag[idx] = 0;
            }
            recurse(
                rows,
                cols,
                &mut diag,
                0,
                &mut min,
                &mut max,
                &off_diagonal_feasible,
            );
            (min, max)
        }
    }

    #[test]
    fn tiny_hand_checked_instance() {
        // rows (3,1), cols (2,2): placing row 0 needs at least 1 on the
        // diagonal, and at most min(3,2)+min(1,2)=3.
        assert_eq!(trace_bounds(&[3, 1], &[2, 2]).unwrap(), (1, 3));
    }

    #[test]
    fn equal_marginals_admit_the_full_diagonal() {
        let rows = [7u64, 5, 3, 1];
        let (_, max) = trace_bounds(&rows, &rows).unwrap();
        assert_eq!(max, 16);
    }

    #[test]
    fn mismatched_totals_are_rejected() {
        assert!(matches!(
            trace_bounds(&[3, 1], &[2, 3]),
            Err(ClusterError::MarginalMismatch { .. })
        ));
    }

    #[test]
    fn max_trace_equals_sum_of_rowwise_minima() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let k = rng.gen_range(2..=5);
            let (rows, cols) = random_marginals(&mut rng, k, 60);
            let (_, max) = trace_bounds(&rows, &cols).unwrap();
            let closed_form: u64 = rows.iter().zip(&cols).map(|(&r, &c)| r.min(c)).sum();
            assert_eq!(max, closed_form, "rows {rows:?}, cols {cols:?}");
        }
    }

    #[test]
    fn bounds_match_exhaustive_enumeration() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for trial in 0..100 {
            let (rows, cols) = random_marginals(&mut rng, 4, 50);
            let fast = trace_bounds(&rows, &cols).unwrap();
            let slow = oracle::trace_bounds(&rows, &cols);
            assert_eq!(fast, slow, "trial {trial}: rows {rows:?}, cols {cols:?}");
        }
    }

    #[test]
    fn bounds_straddle_the_expected_trace() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4_2);
        for _ in 0..100 {
            let (rows, cols) = random_marginals(&mut rng, 4, 200);
            let (min, max) = trace_bounds(&rows, &cols).unwrap();
            let expected = expected_trace(&rows, &cols).unwrap();
            assert!(min as f64 <= expected + 1e-9);
            assert!(expected <= max as f64 + 1e-9);
        }
    }

    /// Random non-negative marginals with equal totals at most `n_max`.
    fn random_marginals(
        rng: &mut rand_chacha::ChaCha8Rng,
        k: usize,
        n_max: u64,
    ) -> (Vec<u64>, Vec<u64>) {
        use rand::Rng;
        let n = rng.gen_range(k as u64..=n_max);
        let cut = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut cuts: Vec<u64> = (0..k - 1).map(|_| rng.gen_range(0..=n)).collect();
            cuts.sort_unstable();
            let mut parts = Vec::with_capacity(k);
            let mut last = 0;
            for c in cuts {
                parts.push(c - last);
                last = c;
            }
            parts.push(n - last);
            parts
        };
        (cut(rng), cut(rng))
    }
}
