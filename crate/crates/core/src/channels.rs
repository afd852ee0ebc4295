//! Kraus sets for the three single-qubit noise channels and their local action
//! on two-qubit states.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, SeedSpec};
use crate::smallmat::{compress_factor, kron, pauli, CMat, C64, ONE, ZERO};

/// Tolerance on ΣE†E = I for a set to count as trace preserving.
pub const CPTP_TOL: f64 = 1e-12;
const OUTPUT_TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [ChannelKind::Depolarizing, ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping];

    pub fn short_name(&self) -> &'static str {
        match self {
            ChannelKind::Depolarizing => "D",
            ChannelKind::AmplitudeDamping => "AD",
            ChannelKind::PhaseDamping => "PD",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" | "depolarizing" => Ok(ChannelKind::Depolarizing),
            "ad" | "amplitude-damping" | "amplitudedamping" => Ok(ChannelKind::AmplitudeDamping),
            "pd" | "phase-damping" | "phasedamping" => Ok(ChannelKind::PhaseDamping),
            other => Err(Error::InvalidInput(format!("unknown channel kind '{other}'"))),
        }
    }
}

/// Which qubits the channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SideSpec {
    #[default]
    BothQubits,
    FirstOnly,
}

impl FromStr for SideSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "both" | "bothqubits" => Ok(SideSpec::BothQubits),
            "first" | "firstonly" | "single" => Ok(SideSpec::FirstOnly),
            other => Err(Error::InvalidInput(format!("unknown side '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub ops: Vec<CMat>,
    pub q: f64,
}

impl KrausSet {
    /// Wraps arbitrary 2×2 operators without checking completeness.
    pub fn from_ops(ops: Vec<CMat>, q: f64) -> Result<Self> {
        if ops.is_empty() || ops.iter().any(|e| (e.rows(), e.cols()) != (2, 2)) {
            return Err(Error::InvalidInput("Kraus operators must be a non-empty list of 2x2 matrices".into()));
        }
        Ok(KrausSet { ops, q })
    }

    /// ΣE†E
    pub fn completeness_sum(&self) -> CMat {
        self.ops.iter().fold(CMat::zeros(2, 2), |acc, e| acc + e.adjoint().matmul(e))
    }

    /// Single-qubit action ρ ↦ ΣEρE†.
    pub fn apply(&self, rho: &CMat) -> CMat {
        self.ops.iter().fold(CMat::zeros(2, 2), |acc, e| acc + e.sandwich(rho))
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("channel parameter q must lie in [0, 1], got {q}")));
    }
    Ok(())
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Kraus operators at reparameterized time `q`.
pub fn make_kraus(kind: ChannelKind, q: f64) -> Result<KrausSet> {
    check_q(q)?;
    let ops = match kind {
        ChannelKind::Depolarizing => {
            let a = (1.0 - 0.75 * q).sqrt();
            let b = (0.25 * q).sqrt();
            vec![
                CMat::identity(2).scale_re(a),
                pauli::sigma_x().scale_re(b),
                pauli::sigma_y().scale_re(b),
                pauli::sigma_z().scale_re(b),
            ]
        }
        ChannelKind::AmplitudeDamping => vec![
            CMat::from_rows(2, 2, &[ONE, ZERO, ZERO, real((1.0 - q).sqrt())])?,
            CMat::from_rows(2, 2, &[ZERO, real(q.sqrt()), ZERO, ZERO])?,
        ],
        ChannelKind::PhaseDamping => vec![
            CMat::identity(2).scale_re((1.0 - q).sqrt()),
            CMat::from_rows(2, 2, &[real(q.sqrt()), ZERO, ZERO, ZERO])?,
            CMat::from_rows(2, 2, &[ZERO, ZERO, ZERO, real(q.sqrt())])?,
        ],
    };
    Ok(KrausSet { ops, q })
}

const MAX_OPS: usize = 4;

/// Kraus operators lifted to the two-qubit space, ready to be applied
/// repeatedly.
#[derive(Debug, Clone)]
pub struct LocalChannel {
    ops: Vec<CMat>,
    first: Vec<CMat>,
    second: Vec<CMat>,
}

impl LocalChannel {
    pub fn new(kind: ChannelKind, q: f64, side: SideSpec) -> Result<Self> {
        let set = make_kraus(kind, q)?;
        Self::from_set(&set, side)
    }

    pub fn from_set(set: &KrausSet, side: SideSpec) -> Result<Self> {
        let id = CMat::identity(2);
        let first = set.ops.iter().map(|e| kron(e, &id)).collect::<Result<Vec<_>>>()?;
        let second = match side {
            SideSpec::BothQubits => set.ops.iter().map(|e| kron(&id, e)).collect::<Result<Vec<_>>>()?,
            SideSpec::FirstOnly => Vec::new(),
        };
        Ok(LocalChannel { ops: set.ops.clone(), first, second })
    }

    /// Kraus sum on the first qubit, then on the second, then Hermitization.
    pub fn apply_mat(&self, rho: &CMat) -> CMat {
        let sum = |ops: &[CMat], m: &CMat| ops.iter().fold(CMat::zeros(4, 4), |acc, e| acc + e.sandwich(m));
        let mut out = sum(&self.first, rho);
        if !self.second.is_empty() {
            out = sum(&self.second, &out);
        }
        out.hermitize()
    }

    /// Maps a factor `L` of ρ to a 4×4 factor of the channel output.
    pub fn apply_factor(&self, l: &CMat) -> CMat {
        let mut cols = [[ZERO; 4]; 4 * MAX_OPS];
        let mut out = self.factor_stage(l, 2, &mut cols);
        if !self.second.is_empty() {
            out = self.factor_stage(&out, 1, &mut cols);
        }
        out
    }

    // Applies every E on the qubit whose index bit has weight `stride` to
    // each column of `l`, then compresses the result back to 4 columns.
    fn factor_stage(&self, l: &CMat, stride: usize, cols: &mut [[C64; 4]; 4 * MAX_OPS]) -> CMat {
        let mut n = 0;
        for e in &self.ops {
            let (e00, e01, e10, e11) = (e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
            for c in 0..4 {
                let v = [l[(0, c)], l[(1, c)], l[(2, c)], l[(3, c)]];
                let mut w = [ZERO; 4];
                for low in [0, 1, 2, 3].into_iter().filter(|i| i & stride == 0) {
                    let (x0, x1) = (v[low], v[low + stride]);
                    w[low] = e00 * x0 + e01 * x1;
                    w[low + stride] = e10 * x0 + e11 * x1;
                }
                cols[n] = w;
                n += 1;
            }
        }
        compress_factor(&cols[..n])
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_mat(rho.mat());
        let tr = out.trace();
        if (tr.re - 1.0).abs() > OUTPUT_TRACE_TOL || tr.im.abs() > OUTPUT_TRACE_TOL {
            return Err(Error::Internal(format!("channel output has trace {tr}")));
        }
        let factor = rho.factor().map(|l| self.apply_factor(l));
        Ok(DensityMatrix::from_trusted(out, factor))
    }
}

/// Applies the channel locally: `E⊗E` on both qubits or `E⊗I` on the first.
pub fn apply_local(rho: &DensityMatrix, kind: ChannelKind, q: f64, side: SideSpec) -> Result<DensityMatrix> {
    LocalChannel::new(kind, q, side)?.apply(rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    /// max |ΣE†E − I|
    pub completeness_deviation: f64,
    /// max |tr Λ(ρ) − 1| over the probe states.
    pub trace_deviation: f64,
    pub passed: bool,
}

const PROBE_STATES: usize = 100;

/// Diagnoses how far a Kraus set is from trace preservation.
pub fn verify_cptp(k: &KrausSet) -> CptpReport {
    let completeness_deviation = k.completeness_sum().max_diff(&CMat::identity(2));
    let mut rng = SeedSpec::new(0x00C0_FFEE, 0).rng();
    let mut trace_deviation = 0.0f64;
    for _ in 0..PROBE_STATES {
        let mut g = CMat::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                g[(r, c)] = rng.complex_normal();
            }
        }
        let rho = g.matmul(&g.adjoint());
        let rho = rho.scale_re(1.0 / rho.trace().re);
        let out = k.apply(&rho);
        trace_deviation = trace_deviation.max((out.trace() - ONE).norm());
    }
    CptpReport {
        completeness_deviation,
        trace_deviation,
        passed: completeness_deviation <= CPTP_TOL && trace_deviation <= CPTP_TOL,
    }
}
