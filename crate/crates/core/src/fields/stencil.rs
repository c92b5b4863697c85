//! Finite-difference weights on arbitrary node sets.

/// Weights `c_k` such that `sum_k c_k f(nodes[k])` approximates the
/// `order`-th derivative of `f` at `x0` (Fornberg's recursion).
pub fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than the derivative order");
    // c[k][m]: weight of node k for derivative m
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// First and second derivatives of node samples.
///
/// Interior nodes use three-point formulas. The end nodes use one point more
/// than a second-order one-sided formula needs (when available), so the ends
/// do not dominate the error on coarse grids.
pub fn differentiate(nodes: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    assert!(n >= 4, "one-sided second derivatives need four nodes");
    let apply = |w: &[f64], range: std::ops::Range<usize>| -> f64 {
        w.iter().zip(&values[range]).map(|(a, b)| a * b).sum()
    };
    let (e1, e2) = (4, n.min(5));
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let (r1, r2) = if i == 0 {
            (0..e1, 0..e2)
        } else if i == n - 1 {
            (n - e1..n, n - e2..n)
        } else {
            (i - 1..i + 2, i - 1..i + 2)
        };
        d1[i] = apply(&fd_weights(nodes[i], &nodes[r1.clone()], 1), r1);
        d2[i] = apply(&fd_weights(nodes[i], &nodes[r2.clone()], 2), r2);
    }
    (d1, d2)
}
