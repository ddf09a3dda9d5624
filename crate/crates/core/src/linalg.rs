//! Small dense linear-algebra helpers shared by the solver and the certifier.

use nalgebra::{Complex, DMatrix, Schur};

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced infinity-norm (maximum absolute row sum).
pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU-based inverse together with the 1-norm condition number
/// `||A||_1 ||A^-1||_1`. Returns `None` with an infinite condition when the
/// factorization hits an exact zero pivot.
pub fn inverse_with_condition(a: &DMatrix<f64>) -> (Option<DMatrix<f64>>, f64) {
    let lu = a.clone().lu();
    match lu.try_inverse() {
        Some(inv) => {
            let cond = norm_1(a) * norm_1(&inv);
            let cond = if cond.is_finite() { cond } else { f64::INFINITY };
            (Some(inv), cond)
        }
        None => (None, f64::INFINITY),
    }
}

/// QR sweeps allowed per Schur attempt, per row of the block.
const SCHUR_SWEEPS_PER_ROW: usize = 30;
/// Deflation thresholds tried in turn, as multiples of machine epsilon.
const SCHUR_EPS_LADDER: [f64; 8] = [1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0, 16384.0];

/// All eigenvalues of a general real square matrix.
///
/// The matrix is split into the strongly connected components of its
/// nonzero pattern; in topological order these give a block triangular
/// form, so the spectrum is the union of the diagonal blocks' spectra.
/// Each block goes through a bounded real Schur iteration, loosening the
/// deflation threshold when the iteration stalls.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut out = Vec::with_capacity(m.nrows());
    for comp in strong_components(m) {
        if comp.len() == 1 {
            let i = comp[0];
            out.push(Complex::new(m[(i, i)], 0.0));
            continue;
        }
        let block = DMatrix::from_fn(comp.len(), comp.len(), |a, b| m[(comp[a], comp[b])]);
        out.extend(block_eigenvalues(block));
    }
    out
}

fn block_eigenvalues(block: DMatrix<f64>) -> Vec<Complex<f64>> {
    let cap = SCHUR_SWEEPS_PER_ROW * block.nrows();
    for scale in SCHUR_EPS_LADDER {
        if let Some(schur) = Schur::try_new(block.clone(), scale * f64::EPSILON, cap) {
            return schur.complex_eigenvalues().iter().copied().collect();
        }
        if let Some(schur) = Schur::try_new(block.transpose(), scale * f64::EPSILON, cap) {
            return schur.complex_eigenvalues().iter().copied().collect();
        }
    }
    panic!("real Schur iteration failed to converge on a {}x{} block", block.nrows(), block.ncols());
}

/// Strongly connected components of the graph with an edge `i -> j` whenever
/// `m[(i, j)] != 0`, each sorted, in no particular order.
pub fn strong_components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let succ: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| m[(i, j)] != 0.0).collect()).collect();
    let pred: Vec<Vec<usize>> = (0..n).map(|j| (0..n).filter(|&i| m[(i, j)] != 0.0).collect()).collect();

    // Kosaraju: finish order on the forward graph, then sweep the reverse graph.
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((node, next)) = stack.pop() {
            if let Some(&child) = succ[node].get(next) {
                stack.push((node, next + 1));
                if !seen[child] {
                    seen[child] = true;
                    stack.push((child, 0));
                }
            } else {
                order.push(node);
            }
        }
    }

    let mut label = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &root in order.iter().rev() {
        if label[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        label[root] = id;
        let mut members = vec![root];
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            for &p in &pred[node] {
                if label[p] == usize::MAX {
                    label[p] = id;
                    members.push(p);
                    stack.push(p);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// Weights `pi > 0` with `pi_i s_ij = pi_j s_ji` for every pair, when `s`
/// is the transition matrix of a reversible chain. The candidate is built
/// along a maximum-weight spanning tree and then checked on all pairs.
pub fn reversible_weights(s: &DMatrix<f64>) -> Option<Vec<f64>> {
    let n = s.nrows();
    if n == 0 || !s.is_square() {
        return None;
    }
    let link = |i: usize, j: usize| s[(i, j)].min(s[(j, i)]);
    let mut log_pi = vec![0.0; n];
    let mut in_tree = vec![false; n];
    let mut best: Vec<f64> = (0..n).map(|j| link(0, j)).collect();
    let mut parent = vec![0; n];
    in_tree[0] = true;
    for _ in 1..n {
        let next = (0..n)
            .filter(|&j| !in_tree[j])
            .max_by(|&a, &b| best[a].total_cmp(&best[b]))?;
        if !(best[next] > 0.0) {
            return None;
        }
        let p = parent[next];
        log_pi[next] = log_pi[p] + s[(p, next)].ln() - s[(next, p)].ln();
        in_tree[next] = true;
        for j in 0..n {
            if !in_tree[j] && link(next, j) > best[j] {
                best[j] = link(next, j);
                parent[j] = next;
            }
        }
    }
    let top = log_pi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pi: Vec<f64> = log_pi.iter().map(|l| (l - top).exp()).collect();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (pi[i] * s[(i, j)], pi[j] * s[(j, i)]);
            if (a - b).abs() > 1e-12 * a.max(b) {
                return None;
            }
        }
    }
    Some(pi)
}

/// Eigenvalues of a transition matrix. Reversible chains are similar to the
/// symmetric matrix `D^(1/2) s D^(-1/2)` with `D = diag(pi)`, whose
/// eigenvalues are real and cheaper to compute; other chains go through the
/// general solver.
pub fn transition_eigenvalues(s: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let Some(pi) = reversible_weights(s) else {
        return eigenvalues(s);
    };
    let root: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let n = s.nrows();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let (x, y) = (root[i] / root[j] * s[(i, j)], root[j] / root[i] * s[(j, i)]);
        0.5 * (x + y)
    });
    a.symmetric_eigenvalues().iter().map(|&e| Complex::new(e, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(norm_1(&m), 6.0);
        assert_eq!(norm_inf(&m), 7.0);
    }

    #[test]
    fn condition_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5, 1.0]));
        let (inv, cond) = inverse_with_condition(&a);
        assert!(inv.is_some());
        assert!((cond - 4.0).abs() < 1e-12);
        let (inv, cond) = inverse_with_condition(&DMatrix::zeros(2, 2));
        assert!(inv.is_none());
        assert!(cond.is_infinite());
    }

    #[test]
    fn components_of_block_triangular_pattern() {
        let m = DMatrix::from_row_slice(4, 4, &[
            0.5, 0.5, 0.0, 0.0, //
            0.5, 0.5, 0.0, 0.0, //
            0.2, 0.0, 0.3, 0.5, //
            0.0, 0.0, 0.0, 1.0,
        ]);
        let mut comps = strong_components(&m);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn block_triangular_spectrum_is_union_of_blocks() {
        let m = DMatrix::from_row_slice(4, 4, &[
            0.5, 0.5, 0.0, 0.0, //
            0.5, 0.5, 0.0, 0.0, //
            0.2, 0.0, 0.3, 0.5, //
            0.0, 0.0, 0.0, 1.0,
        ]);
        let mut got: Vec<f64> = eigenvalues(&m).iter().map(|e| e.re).collect();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip([0.0, 0.3, 1.0, 1.0]) {
            assert!((g - e).abs() < 1e-14, "{got:?}");
        }
    }

    #[test]
    fn eigenvalues_of_empty_matrix() {
        assert!(eigenvalues(&DMatrix::zeros(0, 0)).is_empty());
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        let ev = eigenvalues(&m);
        assert_eq!(ev.len(), 2);
        for e in ev {
            assert!((e.norm() - 0.5).abs() < 1e-14);
            assert!(e.re.abs() < 1e-14);
        }
    }

    #[test]
    fn reversible_weights_of_symmetric_kernel() {
        // Rows of a symmetric matrix normalized: pi is proportional to the row sums.
        let k = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 2.0, 0.0, 2.0, 1.0]);
        let mass: Vec<f64> = k.row_iter().map(|r| r.sum()).collect();
        let s = DMatrix::from_fn(3, 3, |i, j| k[(i, j)] / mass[i]);
        let pi = reversible_weights(&s).unwrap();
        for i in 0..3 {
            assert!((pi[i] / pi[0] - mass[i] / mass[0]).abs() < 1e-14);
        }
        let mut fast: Vec<f64> = transition_eigenvalues(&s).iter().map(|e| e.re).collect();
        let mut slow: Vec<f64> = eigenvalues(&s).iter().map(|e| e.re).collect();
        fast.sort_by(f64::total_cmp);
        slow.sort_by(f64::total_cmp);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn cyclic_chain_is_not_reversible() {
        let s = DMatrix::from_row_slice(3, 3, &[0.1, 0.9, 0.0, 0.0, 0.1, 0.9, 0.9, 0.0, 0.1]);
        assert!(reversible_weights(&s).is_none());
        assert_eq!(transition_eigenvalues(&s), eigenvalues(&s));
        let blocks = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(reversible_weights(&blocks).is_none());
    }
}
