//! Two-qubit states and the random-state samplers.
//!
//! Every sampler draws from a [`SeedSpec`]: a ChaCha8 keystream selected by a
//! 64-bit seed and a 64-bit stream index. Large jobs are cut into fixed-size
//! chunks and chunk `j` always uses stream `j`, so the sample sequence does
//! not depend on how many worker threads process the chunks.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smallmat::{hermitian_eig, CMat, C64, ZERO};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const MIN_EIG_TOL: f64 = 1e-9;

/// Number of samples drawn from one stream before moving to the next.
pub const CHUNK_SIZE: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        SeedSpec { seed, stream }
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::new(*self)
    }
}

/// Counter-based generator with Box–Muller normals.
pub struct StreamRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl StreamRng {
    pub fn new(spec: SeedSpec) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(spec.seed);
        inner.set_stream(spec.stream);
        StreamRng { inner, spare: None }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 − u lies in (0, 1], keeping the logarithm finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }

    /// Complex Gaussian with independent N(0, 1/2) parts, so E|z|² = 1.
    pub fn complex_normal(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// 4×4 Ginibre matrix.
    pub fn ginibre(&mut self) -> CMat {
        let mut g = CMat::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                g[(r, c)] = self.complex_normal();
            }
        }
        g
    }
}

/// Normalized two-qubit pure state ψ₀₀|00⟩ + ψ₀₁|01⟩ + ψ₁₀|10⟩ + ψ₁₁|11⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amps: [C64; 4],
}

/// Invariants of a pure state used by the phase-damping formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrdInvariants {
    /// |ψ₀₀ψ₁₁| + |ψ₀₁ψ₁₀|
    pub s: f64,
    /// ||ψ₀₀ψ₁₁| − |ψ₀₁ψ₁₀||
    pub r: f64,
    /// 4|ψ₀₀ψ₀₁ψ₁₀ψ₁₁|^{1/2}
    pub d: f64,
    /// arg(ψ₀₀ψ₁₁) − arg(ψ₀₁ψ₁₀) in [0, 2π); 0 when either product vanishes.
    pub theta: f64,
    /// Initial concurrence 2|ψ₀₀ψ₁₁ − ψ₀₁ψ₁₀|.
    pub c0: f64,
}

impl SrdInvariants {
    /// Angle θ′ = π − θ for which C₀ = √2·√(s² + r² + (s² − r²) cos θ′).
    pub fn theta_prime(&self) -> f64 {
        std::f64::consts::PI - self.theta
    }

    pub fn c0_from_angle(&self) -> f64 {
        let (s2, r2) = (self.s * self.s, self.r * self.r);
        (2.0 * (s2 + r2 + (s2 - r2) * self.theta_prime().cos())).max(0.0).sqrt()
    }
}

impl PureState {
    /// Accepts amplitudes that are already normalized to 1e-12.
    pub fn new(amps: [C64; 4]) -> Result<Self> {
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} differs from 1")));
        }
        Ok(PureState { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: [C64; 4]) -> Result<Self> {
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(PureState { amps: amps.map(|z| z / norm) })
    }

    pub fn from_real(amps: [f64; 4]) -> Result<Self> {
        Self::normalized(amps.map(|x| C64::new(x, 0.0)))
    }

    /// (|00⟩ + |11⟩)/√2
    pub fn bell_phi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState { amps: [C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)] }
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amps
    }

    pub fn amp(&self, i: usize, j: usize) -> C64 {
        self.amps[2 * i + j]
    }

    /// |ψ₁₁|²
    pub fn p11(&self) -> f64 {
        self.amps[3].norm_sqr()
    }

    pub fn c0(&self) -> f64 {
        (2.0 * (self.amps[0] * self.amps[3] - self.amps[1] * self.amps[2]).norm()).min(1.0)
    }

    pub fn density(&self) -> DensityMatrix {
        let mut factor = CMat::zeros(4, 4);
        for (r, &a) in self.amps.iter().enumerate() {
            factor[(r, 0)] = a;
        }
        DensityMatrix { mat: CMat::outer(&self.amps, &self.amps), factor: Some(factor) }
    }

    /// Applies a 4×4 unitary to the amplitude vector.
    pub fn transformed(&self, u: &CMat) -> Result<Self> {
        if (u.rows(), u.cols()) != (4, 4) {
            return Err(Error::InvalidInput("expected a 4x4 unitary".into()));
        }
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| u[(r, c)] * self.amps[c]).sum();
        }
        Self::normalized(out)
    }

    pub fn srd_invariants(&self) -> SrdInvariants {
        srd_invariants(self)
    }
}

pub fn srd_invariants(psi: &PureState) -> SrdInvariants {
    let diag = psi.amps[0] * psi.amps[3];
    let anti = psi.amps[1] * psi.amps[2];
    let a = diag.norm();
    let b = anti.norm();
    let theta = if a == 0.0 || b == 0.0 {
        0.0
    } else {
        (diag.arg() - anti.arg()).rem_euclid(TAU)
    };
    SrdInvariants { s: a + b, r: (a - b).abs(), d: 4.0 * (a * b).sqrt(), theta, c0: psi.c0() }
}

/// 4×4 complex Hermitian, positive semidefinite, unit-trace matrix.
///
/// States built from a known factor (pure states, Ginibre constructions,
/// channel outputs of those) also keep `L` with `ρ = L·L†`. The factor lets
/// the concurrence be computed without square roots of tiny eigenvalues.
#[derive(Debug, Clone, Copy)]
pub struct DensityMatrix {
    mat: CMat,
    factor: Option<CMat>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: CMat) -> Result<Self> {
        if (mat.rows(), mat.cols()) != (4, 4) {
            return Err(Error::InvalidInput(format!("density matrix must be 4x4, got {}x{}", mat.rows(), mat.cols())));
        }
        let defect = mat.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let low = *hermitian_eig(&mat)?.eigenvalues.last().expect("4 eigenvalues");
        if low < -MIN_EIG_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {low:e}")));
        }
        Ok(DensityMatrix { mat: mat.hermitize(), factor: None })
    }

    /// Wraps a matrix known to be a state by construction.
    pub(crate) fn from_trusted(mat: CMat, factor: Option<CMat>) -> Self {
        DensityMatrix { mat, factor }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix { mat: CMat::identity(4).scale_re(0.25), factor: Some(CMat::identity(4).scale_re(0.5)) }
    }

    /// ρ = GG†/tr(GG†) for any non-zero 4×4 matrix G.
    pub fn from_factor(g: &CMat) -> Result<Self> {
        if (g.rows(), g.cols()) != (4, 4) {
            return Err(Error::InvalidInput(format!("factor must be 4x4, got {}x{}", g.rows(), g.cols())));
        }
        let m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidInput("factor must be non-zero".into()));
        }
        Ok(DensityMatrix { mat: m.scale_re(1.0 / tr).hermitize(), factor: Some(g.scale_re(1.0 / tr.sqrt())) })
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    /// `L` with `ρ = L·L†`, when the state was built from one.
    pub fn factor(&self) -> Option<&CMat> {
        self.factor.as_ref()
    }

    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*hermitian_eig(&self.mat)?.eigenvalues.last().expect("4 eigenvalues"))
    }

    /// Re-checks all invariants; used by tests and the numeric paths.
    pub fn validate(&self) -> Result<()> {
        DensityMatrix::new(self.mat).map(|_| ())
    }
}

/// Random-state ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    HaarPure,
    HsMixed,
    BuresMixed,
}

fn require_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidInput("sample count must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub fn draw_haar_pure(rng: &mut StreamRng) -> PureState {
    loop {
        let amps = [rng.complex_normal(), rng.complex_normal(), rng.complex_normal(), rng.complex_normal()];
        if let Ok(psi) = PureState::normalized(amps) {
            return psi;
        }
    }
}

pub fn draw_hs_mixed(rng: &mut StreamRng) -> DensityMatrix {
    let g = rng.ginibre();
    DensityMatrix::from_factor(&g).expect("Ginibre matrix is non-zero with probability one")
}

/// Haar unitary: Gram–Schmidt on a Ginibre matrix. Modified Gram–Schmidt
/// leaves a positive real diagonal in R, which is exactly the phase fix.
pub fn draw_haar_unitary(rng: &mut StreamRng) -> CMat {
    let z = rng.ginibre();
    let mut q = CMat::zeros(4, 4);
    for c in 0..4 {
        let mut v: Vec<C64> = z.column(c);
        for k in 0..c {
            let proj: C64 = (0..4).map(|r| q[(r, k)].conj() * v[r]).sum();
            for r in 0..4 {
                v[r] -= proj * q[(r, k)];
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for r in 0..4 {
            q[(r, c)] = v[r] / norm;
        }
    }
    q
}

pub fn draw_bures_mixed(rng: &mut StreamRng) -> DensityMatrix {
    let u = draw_haar_unitary(rng);
    let g = rng.ginibre();
    let factor = (CMat::identity(4) + u).matmul(&g);
    DensityMatrix::from_factor(&factor).expect("non-zero factor")
}

/// Haar-random pure states from one stream.
pub fn sample_haar_pure(seed: SeedSpec, n: usize) -> Result<Vec<PureState>> {
    require_count(n)?;
    let mut rng = seed.rng();
    Ok((0..n).map(|_| draw_haar_pure(&mut rng)).collect())
}

/// Hilbert–Schmidt random mixed states, ρ = GG†/tr(GG†).
pub fn sample_hs_mixed(seed: SeedSpec, n: usize) -> Result<Vec<DensityMatrix>> {
    require_count(n)?;
    let mut rng = seed.rng();
    Ok((0..n).map(|_| draw_hs_mixed(&mut rng)).collect())
}

/// Bures random mixed states, ρ ∝ (I + U)GG†(I + U)†.
pub fn sample_bures_mixed(seed: SeedSpec, n: usize) -> Result<Vec<DensityMatrix>> {
    require_count(n)?;
    let mut rng = seed.rng();
    Ok((0..n).map(|_| draw_bures_mixed(&mut rng)).collect())
}

/// A sampled ensemble of either kind.
#[derive(Debug, Clone)]
pub enum Ensemble {
    Pure(Vec<PureState>),
    Mixed(Vec<DensityMatrix>),
}

impl Ensemble {
    pub fn len(&self) -> usize {
        match self {
            Ensemble::Pure(v) => v.len(),
            Ensemble::Mixed(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Runs `per_chunk` over the chunk decomposition of `n` samples and returns the
/// per-chunk results in chunk order.
///
/// Chunk `j` receives `SeedSpec { seed, stream: j }` and its sample count; the
/// output is identical for every `workers ≥ 1`.
pub fn par_chunk_map<R, F>(seed: u64, n: usize, workers: usize, per_chunk: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(SeedSpec, usize) -> R + Sync + Send,
{
    require_count(n)?;
    let chunks = n.div_ceil(CHUNK_SIZE);
    let job = || {
        (0..chunks)
            .into_par_iter()
            .map(|j| {
                let len = CHUNK_SIZE.min(n - j * CHUNK_SIZE);
                per_chunk(SeedSpec::new(seed, j as u64), len)
            })
            .collect::<Vec<R>>()
    };
    if workers <= 1 {
        let mut out = Vec::with_capacity(chunks);
        for j in 0..chunks {
            let len = CHUNK_SIZE.min(n - j * CHUNK_SIZE);
            out.push(per_chunk(SeedSpec::new(seed, j as u64), len));
        }
        return Ok(out);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Applies `f` to every item on a pool of `workers` threads, keeping input
/// order. Each item is processed independently, so the result does not depend
/// on the worker count.
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if workers <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Samples `n` states of the given measure, chunk-parallel over `workers`.
pub fn sample_ensemble(measure: Measure, seed: u64, n: usize, workers: usize) -> Result<Ensemble> {
    match measure {
        Measure::HaarPure => {
            let parts = par_chunk_map(seed, n, workers, sample_haar_pure)?;
            Ok(Ensemble::Pure(flatten(parts)?))
        }
        Measure::HsMixed => {
            let parts = par_chunk_map(seed, n, workers, sample_hs_mixed)?;
            Ok(Ensemble::Mixed(flatten(parts)?))
        }
        Measure::BuresMixed => {
            let parts = par_chunk_map(seed, n, workers, sample_bures_mixed)?;
            Ok(Ensemble::Mixed(flatten(parts)?))
        }
    }
}

fn flatten<T>(parts: Vec<Result<Vec<T>>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
