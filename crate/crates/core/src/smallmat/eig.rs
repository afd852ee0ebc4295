use super::{CMat, C64, ZERO};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
// A pivot is negligible once it is this small relative to √|a_pp·a_qq|; the
// relative test keeps tiny eigenvalues of nearly singular matrices accurate.
const PIVOT_REL_TOL: f64 = 4.0 * f64::EPSILON;
const PIVOT_ABS_TOL: f64 = 1e-30;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix, sorted descending, with the matching
/// orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl EigResult {
    /// V·diag(f(λ))·V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMat {
        let v = &self.eigenvectors;
        let n = v.rows();
        let mut out = CMat::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let a = v[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += a * v[(c, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMat {
        self.reconstruct_with(|x| x)
    }
}

/// Cyclic Jacobi eigensolver for small Hermitian matrices.
///
/// Each rotation removes the phase of the pivot entry and then applies the
/// classic real symmetric Jacobi rotation. Sweeps stop once a full sweep finds
/// every pivot negligible against its diagonal pair.
pub fn hermitian_eig(h: &CMat) -> Result<EigResult> {
    if !h.is_square() {
        return Err(Error::InvalidInput(format!("eigenproblem on {}x{} matrix", h.rows(), h.cols())));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidInput(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let n = h.rows();
    let mut a = h.hermitize();
    let mut v = CMat::identity(n);
    let scale = a.frobenius();
    if scale > 0.0 {
        let floor = PIVOT_ABS_TOL * scale;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotated |= rotate(&mut a, &mut v, p, q, floor);
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let mut vecs = CMat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, new_col)] = v[(r, old_col)];
        }
    }
    Ok(EigResult { eigenvalues: order.iter().map(|&i| diag[i]).collect(), eigenvectors: vecs })
}

fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize, floor: f64) -> bool {
    let apq = a[(p, q)];
    let g = apq.norm();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if g <= floor || g <= PIVOT_REL_TOL * (app * aqq).abs().sqrt() {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return false;
    }
    let phase = apq / g; // e^{iφ}
    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane.
    let upp = C64::new(c, 0.0);
    let upq = C64::new(s, 0.0);
    let uqp = -phase.conj() * s;
    let uqq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(app - t * g, 0.0);
    a[(q, q)] = C64::new(aqq + t * g, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
    true
}

const REJECT_NEGATIVE: f64 = 1e-8;
/// Eigenvalues this small relative to the largest are zeroed before the square
/// root, so a rank-deficient input yields an exactly rank-deficient root.
pub(crate) const RELATIVE_CLAMP: f64 = 1e-14;

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn psd_sqrt(h: &CMat) -> Result<CMat> {
    let eig = hermitian_eig(h)?;
    psd_sqrt_from_eig(&eig)
}

pub(crate) fn psd_sqrt_from_eig(eig: &EigResult) -> Result<CMat> {
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&low) = eig.eigenvalues.last() {
        if low < -REJECT_NEGATIVE {
            return Err(Error::InvalidState(format!("negative eigenvalue {low:e}")));
        }
    }
    Ok(eig.reconstruct_with(|lam| {
        if lam <= RELATIVE_CLAMP * top {
            0.0
        } else {
            lam.sqrt()
        }
    }))
}
