//! Tree-metric checks on finite distance matrices.

/// Square distance matrix, row-major.
pub type DistMatrix = Vec<Vec<f64>>;

pub fn is_symmetric(d: &[Vec<f64>], tol: f64) -> bool {
    let k = d.len();
    d.iter().all(|row| row.len() == k)
        && (0..k).all(|i| d[i][i].abs() <= tol && (0..i).all(|j| (d[i][j] - d[j][i]).abs() <= tol))
}

/// Four-point condition: for all `i, j, k, l` the two largest of
/// `d_ij + d_kl`, `d_ik + d_jl`, `d_il + d_jk` agree within `tol`.
/// Also requires symmetry, zero diagonal and non-negative entries.
pub fn four_point_holds(d: &[Vec<f64>], tol: f64) -> bool {
    if !is_symmetric(d, tol) || d.iter().flatten().any(|x| !x.is_finite() || *x < -tol) {
        return false;
    }
    let k = d.len();
    for i in 0..k {
        for j in i..k {
            for a in j..k {
                for b in a..k {
                    let mut s = [
                        d[i][j] + d[a][b],
                        d[i][a] + d[j][b],
                        d[i][b] + d[j][a],
                    ];
                    s.sort_by(|x, y| x.total_cmp(y));
                    if s[2] - s[1] > tol * (1.0 + s[2].abs()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
