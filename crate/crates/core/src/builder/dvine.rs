use crate::scalar::{lit, Scalar};
use crate::vcg::VarSet;

fn travel_cost<T: Scalar>(w: T, eps: T) -> T {
    (T::one() / (w + eps)).ln_1p()
}

fn path_cost<T: Scalar>(path: &[usize], cost: &[Vec<T>]) -> T {
    path.windows(2).map(|p| cost[p[0]][p[1]]).sum()
}

/// Whether the members of `cluster` occupy consecutive positions.
fn contiguous(path: &[usize], cluster: VarSet) -> bool {
    let pos: Vec<usize> = path
        .iter()
        .enumerate()
        .filter(|(_, x)| cluster.contains(**x))
        .map(|(i, _)| i)
        .collect();
    pos.windows(2).all(|w| w[1] == w[0] + 1)
}

fn nearest_neighbour<T: Scalar>(start: usize, cost: &[Vec<T>], cluster: VarSet) -> Vec<usize> {
    let d = cost.len();
    let mut path = vec![start];
    let mut visited = VarSet::singleton(start);
    while path.len() < d {
        let cur = *path.last().expect("path is non-empty");
        let inside_open = cluster.contains(cur) && !cluster.is_subset(visited);
        let next = (0..d)
            .filter(|&x| !visited.contains(x))
            .filter(|&x| !inside_open || cluster.contains(x))
            .min_by(|&a, &b| {
                cost[cur][a]
                    .partial_cmp(&cost[cur][b])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            })
            .expect("an unvisited variable remains");
        path.push(next);
        visited = visited.with(next);
    }
    path
}

/// Improves `path` by segment reversals that keep `cluster` contiguous.
fn two_opt<T: Scalar>(path: &mut [usize], cost: &[Vec<T>], cluster: VarSet) {
    let n = path.len();
    let tol = T::epsilon() * lit::<T>(64.0);
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                let mut delta = T::zero();
                if i > 0 {
                    delta = delta + cost[path[i - 1]][path[j]] - cost[path[i - 1]][path[i]];
                }
                if j + 1 < n {
                    delta = delta + cost[path[i]][path[j + 1]] - cost[path[j]][path[j + 1]];
                }
                if delta < -tol {
                    path[i..=j].reverse();
                    if contiguous(path, cluster) {
                        improved = true;
                    } else {
                        path[i..=j].reverse();
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Short Hamiltonian path over `weights` (absolute dependence) with the
/// `cluster` variables adjacent; edge cost is `ln(1 + 1/(w + eps))`.
///
/// Nearest-neighbour tours from every start are refined by 2-opt and the
/// cheapest is returned, oriented so the first variable is the smaller end.
pub fn dvine_path<T: Scalar>(weights: &[Vec<T>], cluster: VarSet, eps: T) -> Vec<usize> {
    let d = weights.len();
    if d <= 1 {
        return (0..d).collect();
    }
    let cost: Vec<Vec<T>> = weights
        .iter()
        .map(|row| row.iter().map(|&w| travel_cost(w, eps)).collect())
        .collect();
    let mut best: Option<(T, Vec<usize>)> = None;
    for start in 0..d {
        let mut p = nearest_neighbour(start, &cost, cluster);
        two_opt(&mut p, &cost, cluster);
        let c = path_cost(&p, &cost);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, p));
        }
    }
    let mut path = best.expect("d >= 2 yields a path").1;
    if path[0] > path[d - 1] {
        path.reverse();
    }
    path
}
