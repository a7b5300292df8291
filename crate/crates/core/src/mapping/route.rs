use crate::error::{Error, Result};
use crate::gate::QubitId;

use super::{check_permutation, matching_decomposition_by, BipartiteColumnGraph, Placement, SwapSchedule};

/// Odd-even transposition sort of `keys` starting with pairs `(parity,
/// parity+1)`. Returns non-empty layers over local indices.
fn oets_layers(keys: &[usize], parity: usize) -> Vec<Vec<(usize, usize)>> {
    let n = keys.len();
    let mut keys = keys.to_vec();
    let mut layers = Vec::new();
    let mut p = parity;
    for _ in 0..=n {
        if keys.windows(2).all(|w| w[0] < w[1]) {
            break;
        }
        let mut layer = Vec::new();
        let mut i = p;
        while i + 1 < n {
            if keys[i] > keys[i + 1] {
                keys.swap(i, i + 1);
                layer.push((i, i + 1));
            }
            i += 2;
        }
        if !layer.is_empty() {
            layers.push(layer);
        }
        p ^= 1;
    }
    debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
    layers
}

fn best_oets(keys: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let even = oets_layers(keys, 0);
    let odd = oets_layers(keys, 1);
    let cost = |l: &Vec<Vec<(usize, usize)>>| (l.len(), l.iter().map(Vec::len).sum::<usize>());
    if cost(&odd) < cost(&even) {
        odd
    } else {
        even
    }
}

/// Swap layers on a line realizing `perm`, where `perm[p]` is the destination
/// of the item at position `p`. At most `perm.len()` layers.
pub fn oets_route(perm: &[usize]) -> Result<SwapSchedule> {
    check_permutation(perm)?;
    Ok(SwapSchedule {
        layers: best_oets(perm),
    })
}

/// Routes several independent lines in parallel; `lines[k]` lists the global
/// positions of line `k` in order and `perm` is the global permutation, which
/// must keep every item on its line.
fn parallel_lines(lines: &[Vec<usize>], perm: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    for line in lines {
        let keys: Vec<usize> = line
            .iter()
            .map(|&p| line.iter().position(|&x| x == perm[p]).expect("item stays on its line"))
            .collect();
        for (t, layer) in best_oets(&keys).into_iter().enumerate() {
            if layers.len() <= t {
                layers.push(Vec::new());
            }
            layers[t].extend(layer.into_iter().map(|(a, b)| (line[a], line[b])));
        }
    }
    layers
}

/// Row and column of the `i`-th snake cell on a grid with `cols` columns.
pub fn snake_position(i: usize, cols: usize) -> (usize, usize) {
    let row = i / cols;
    let col = if row.is_multiple_of(2) {
        i % cols
    } else {
        cols - 1 - i % cols
    };
    (row, col)
}

/// Lays `order` along a boustrophedon path so that consecutive qubits are
/// grid neighbors.
pub fn snake_embed(order: &[QubitId], rows: usize, cols: usize) -> Result<Placement> {
    if order.len() > rows * cols {
        return Err(Error::TooManyQubits(order.len()));
    }
    Placement::from_pairs(
        rows * cols,
        order.iter().enumerate().map(|(i, &q)| {
            let (r, c) = snake_position(i, cols);
            (q, r * cols + c)
        }),
    )
}

/// Swap layers on a `rows x cols` grid realizing `perm` (row-major
/// positions). At most `2 * rows + cols` layers.
///
/// Candidates are the three-phase column/row/column schedule, its transposed
/// row/column/row form and odd-even transposition along the snake path; the
/// shallowest wins, ties broken by swap count.
pub fn grid_route(perm: &[usize], rows: usize, cols: usize) -> Result<SwapSchedule> {
    if perm.len() != rows * cols {
        return Err(Error::InvalidPermutation(format!(
            "{} positions on a {rows}x{cols} grid",
            perm.len()
        )));
    }
    check_permutation(perm)?;

    let transpose = |p: usize| (p % cols) * rows + p / cols;
    let untranspose = |t: usize| (t % rows) * cols + t / rows;
    let mut tperm = vec![0usize; perm.len()];
    for (p, &d) in perm.iter().enumerate() {
        tperm[transpose(p)] = transpose(d);
    }
    let transposed = three_phase(&tperm, cols, rows)?
        .into_iter()
        .map(|layer| {
            layer
                .into_iter()
                .map(|(a, b)| (untranspose(a), untranspose(b)))
                .collect()
        })
        .collect();

    let snake: Vec<usize> = (0..perm.len())
        .map(|i| {
            let (r, c) = snake_position(i, cols);
            r * cols + c
        })
        .collect();
    let mut index = vec![0usize; perm.len()];
    for (i, &p) in snake.iter().enumerate() {
        index[p] = i;
    }
    let keys: Vec<usize> = snake.iter().map(|&p| index[perm[p]]).collect();
    let along_snake = best_oets(&keys)
        .into_iter()
        .map(|layer| layer.into_iter().map(|(a, b)| (snake[a], snake[b])).collect())
        .collect();

    let cost = |l: &Vec<Vec<(usize, usize)>>| (l.len(), l.iter().map(Vec::len).sum::<usize>());
    let layers = [three_phase(perm, rows, cols)?, transposed, along_snake]
        .into_iter()
        .min_by_key(cost)
        .expect("candidates");
    Ok(SwapSchedule { layers })
}

/// Permutes within columns so that every row holds one item per destination
/// column, then within rows, then within columns. At most `2 * rows + cols`
/// layers.
fn three_phase(perm: &[usize], rows: usize, cols: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    let pos = |r: usize, c: usize| r * cols + c;

    let mut g = BipartiteColumnGraph::new(cols, cols);
    for (p, &d) in perm.iter().enumerate() {
        g.add_edge(p % cols, d % cols);
    }
    // edge index == source position; matching k sends its items to row k,
    // so prefer items already in row k, then items bound for row k
    let matchings = matching_decomposition_by(&g, |k, e| {
        usize::from(e / cols != k) * 2 + usize::from(perm[e] / cols != k)
    })?;
    let mut row_of = vec![0usize; perm.len()];
    for (k, m) in matchings.iter().enumerate() {
        for &e in m {
            row_of[e] = k;
        }
    }

    let columns: Vec<Vec<usize>> = (0..cols).map(|c| (0..rows).map(|r| pos(r, c)).collect()).collect();
    let rows_lines: Vec<Vec<usize>> = (0..rows).map(|r| (0..cols).map(|c| pos(r, c)).collect()).collect();

    // phase 1: (sr, sc) -> (k, sc)
    let mut p1 = vec![0usize; perm.len()];
    for p in 0..perm.len() {
        p1[p] = pos(row_of[p], p % cols);
    }
    // phase 2: (k, sc) -> (k, dc)
    let mut p2 = vec![0usize; perm.len()];
    for p in 0..perm.len() {
        p2[p1[p]] = pos(row_of[p], perm[p] % cols);
    }
    // phase 3: (k, dc) -> (dr, dc)
    let mut p3 = vec![0usize; perm.len()];
    for p in 0..perm.len() {
        p3[p2[p1[p]]] = perm[p];
    }

    let mut layers = parallel_lines(&columns, &p1);
    layers.extend(parallel_lines(&rows_lines, &p2));
    layers.extend(parallel_lines(&columns, &p3));
    Ok(layers)
}
