use super::{CMat, C64, ZERO};

const MAX_SWEEPS: usize = 60;
/// Largest column count accepted by [`compress_factor`].
pub const MAX_COLUMNS: usize = 16;
const PAIR_REL_TOL: f64 = 4.0 * f64::EPSILON;

/// Singular values of a square matrix, sorted descending.
///
/// One-sided (Hestenes) Jacobi: columns are rotated pairwise until mutually
/// orthogonal, after which the singular values are the column norms. The
/// absolute error is of order `ε‖M‖`, so small singular values are not
/// amplified the way `√eig(M†M)` would amplify them.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let n = m.cols();
    let rows = m.rows();
    let mut a = *m;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for r in 0..rows {
                    alpha += a[(r, p)].norm_sqr();
                    beta += a[(r, q)].norm_sqr();
                    gamma += a[(r, p)].conj() * a[(r, q)];
                }
                let g = gamma.norm();
                if g == 0.0 || g <= PAIR_REL_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj(); // e^{-iφ}
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..rows {
                    let ap = a[(r, p)];
                    let aq = a[(r, q)] * phase;
                    a[(r, p)] = ap * c - aq * s;
                    a[(r, q)] = ap * s + aq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut out: Vec<f64> = (0..n).map(|c| (0..rows).map(|r| a[(r, c)].norm_sqr()).sum::<f64>().sqrt()).collect();
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// A 4×4 factor `L` with `L·L† = W·W†` for a 4×m matrix `W` given by columns.
///
/// Householder QR of `W†` gives `W† = Q·R`, so `W·W† = R†·R` and `L = R†`.
pub fn compress_factor(columns: &[[C64; 4]]) -> CMat {
    // rows of W† are the conjugated columns of W
    let m = columns.len();
    assert!(m <= MAX_COLUMNS, "at most {MAX_COLUMNS} columns, got {m}");
    let mut a = [[ZERO; 4]; MAX_COLUMNS];
    for (row, col) in a.iter_mut().zip(columns) {
        *row = col.map(|z| z.conj());
    }
    let mut l = CMat::zeros(4, 4);
    for k in 0..4.min(m) {
        let norm = (k..m).map(|i| a[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[k][k];
        let unit = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -unit * norm;
        // v = x − α e₁, H = I − 2vv†/(v†v)
        let mut v = [ZERO; MAX_COLUMNS];
        for i in k..m {
            v[i] = a[i][k];
        }
        v[k] -= alpha;
        let vv: f64 = v[k..m].iter().map(|z| z.norm_sqr()).sum();
        if vv > 0.0 {
            for j in k..4 {
                let dot: C64 = (k..m).map(|i| v[i].conj() * a[i][j]).sum();
                let f = dot * (2.0 / vv);
                for i in k..m {
                    a[i][j] -= v[i] * f;
                }
            }
        }
    }
    for i in 0..4.min(m) {
        for j in i..4 {
            // L = R†
            l[(j, i)] = a[i][j].conj();
        }
    }
    l
}
