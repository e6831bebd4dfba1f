//! Full open-system simulation of the QD-cavity on the truncated
//! QD ⊗ Fock space.
//!
//! The frame rotates at the cavity frequency, so only the detuning enters
//! the Hamiltonian:
//!
//! ```text
//! H = δ σ₊σ₋ + i g (a†σ₋ − σ₊a)
//! ```
//!
//! Dissipation follows the standard Lindblad channels: QD decay at γ,
//! cavity decay at κ, incoherent pumping at P (jump operator σ₊) and pure
//! dephasing written as (γ*/4)[σ_z ρ σ_z − ρ], which damps the e–g
//! coherence at γ*/2 and is exactly what puts γ* into the total linewidth
//! Γ = P + γ + γ* + κ of the rate model.
//!
//! Everything is dense: the dimension is 2(n_max+1) ≈ 12, the vectorized
//! Liouvillian at most ~150×150. Superoperators use the column-stacking
//! convention vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

mod rk;

pub use rk::RkOptions;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::rates::check_grid;
use crate::{Error, Result, SystemParams};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncated Hilbert space: two QD levels ⊗ Fock levels 0..=n_max.
///
/// Basis ordering is |s⟩⊗|n⟩ with s ∈ {g, e}; the flat index of |s, n⟩ is
/// `s·(n_max+1) + n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    n_max: usize,
}

impl HilbertConfig {
    /// Default photon truncation; enough for bad-cavity pumping at P ≤ 2g.
    pub const DEFAULT_N_MAX: usize = 5;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParam {
                field: "n_max",
                reason: "must be at least 1",
            });
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Total dimension 2·(n_max+1).
    pub fn dimension(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Flat index of the basis state |s, n⟩.
    pub fn index(&self, excited: bool, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        usize::from(excited) * (self.n_max + 1) + n
    }
}

impl Default for HilbertConfig {
    fn default() -> Self {
        Self {
            n_max: Self::DEFAULT_N_MAX,
        }
    }
}

/// The operator algebra on the full space.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub sigma_minus: CMat,
    pub sigma_plus: CMat,
    pub sigma_z: CMat,
    pub a: CMat,
    pub a_dagger: CMat,
    pub identity: CMat,
}

/// Build σ±, σ_z, a, a† as Kronecker products of the 2-level and
/// (n_max+1)-level primitives.
pub fn build_operators(h: &HilbertConfig) -> OperatorSet {
    let nf = h.n_max + 1;
    let id2 = CMat::identity(2, 2);
    let idf = CMat::identity(nf, nf);

    // σ₋ = |g⟩⟨e| on the QD factor; basis order (g, e).
    let mut sm2 = CMat::zeros(2, 2);
    sm2[(0, 1)] = ONE;

    // Fock lowering: a|n⟩ = √n |n−1⟩.
    let mut af = CMat::zeros(nf, nf);
    for n in 1..nf {
        af[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }

    let sigma_minus = sm2.kronecker(&idf);
    let sigma_plus = sigma_minus.adjoint();
    let a = id2.kronecker(&af);
    let a_dagger = a.adjoint();
    let sigma_z = &sigma_plus * &sigma_minus - &sigma_minus * &sigma_plus;
    OperatorSet {
        sigma_minus,
        sigma_plus,
        sigma_z,
        a,
        a_dagger,
        identity: CMat::identity(2 * nf, 2 * nf),
    }
}

fn check_rates(p: &SystemParams) -> Result<()> {
    for (field, v) in [
        ("g", p.g),
        ("gamma", p.gamma),
        ("gamma_star", p.gamma_star),
        ("kappa_in", p.kappa_in),
        ("kappa_out", p.kappa_out),
        ("pump", p.pump),
    ] {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::InvalidParam {
                field,
                reason: "must be finite and non-negative",
            });
        }
    }
    if !p.delta.is_finite() {
        return Err(Error::InvalidParam {
            field: "delta",
            reason: "must be finite",
        });
    }
    Ok(())
}

/// Rotating-frame Hamiltonian H = δ σ₊σ₋ + i g (a†σ₋ − σ₊a), in μeV.
///
/// Unlike the rate model this accepts κ = 0 (lossless runs are the
/// calibration oracle); rates only need to be non-negative.
pub fn hamiltonian(h: &HilbertConfig, p: &SystemParams) -> Result<CMat> {
    check_rates(p)?;
    let ops = build_operators(h);
    Ok(hamiltonian_from_ops(&ops, p))
}

fn hamiltonian_from_ops(ops: &OperatorSet, p: &SystemParams) -> CMat {
    let number = &ops.sigma_plus * &ops.sigma_minus;
    let exchange = &ops.a_dagger * &ops.sigma_minus - &ops.sigma_plus * &ops.a;
    number * Complex64::new(p.delta, 0.0) + exchange * (I * Complex64::new(p.g, 0.0))
}

/// vec(AρB) = (Bᵀ ⊗ A) vec(ρ), column-stacking convention.
fn sandwich(a: &CMat, b: &CMat) -> CMat {
    b.transpose().kronecker(a)
}

/// Superoperator for the dissipator (rate/2)[2 LρL† − L†Lρ − ρL†L].
fn dissipator(l: &CMat, rate: f64, id: &CMat) -> CMat {
    let l_dag = l.adjoint();
    let ldl = &l_dag * l;
    (sandwich(l, &l_dag) * Complex64::new(2.0, 0.0) - sandwich(&ldl, id) - sandwich(id, &ldl))
        * Complex64::new(rate / 2.0, 0.0)
}

/// Build the full Liouvillian as a dimension² × dimension² matrix acting on
/// column-stacked density matrices.
///
/// Acting on any Hermitian unit-trace matrix it preserves the trace: the
/// vectorized identity is a left null vector.
pub fn liouvillian(h: &HilbertConfig, p: &SystemParams) -> Result<CMat> {
    check_rates(p)?;
    let ops = build_operators(h);
    let id = &ops.identity;
    let ham = hamiltonian_from_ops(&ops, p);

    let mut l = (sandwich(&ham, id) - sandwich(id, &ham)) * (-I);
    if p.gamma > 0.0 {
        l += dissipator(&ops.sigma_minus, p.gamma, id);
    }
    let kappa = p.kappa();
    if kappa > 0.0 {
        l += dissipator(&ops.a, kappa, id);
    }
    if p.pump > 0.0 {
        l += dissipator(&ops.sigma_plus, p.pump, id);
    }
    if p.gamma_star > 0.0 {
        let d = h.dimension();
        let full_id = CMat::identity(d * d, d * d);
        l += (sandwich(&ops.sigma_z, &ops.sigma_z) - full_id)
            * Complex64::new(p.gamma_star / 4.0, 0.0);
    }
    Ok(l)
}

/// Hermitian, unit-trace, positive-semidefinite state on the truncated
/// space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Hermiticity defect tolerance (max entry of |ρ − ρ†|).
    pub const HERMITICITY_TOL: f64 = 1e-10;
    /// Trace deviation tolerance.
    pub const TRACE_TOL: f64 = 1e-8;
    /// Allowed negative dip of the smallest eigenvalue.
    pub const EIGENVALUE_TOL: f64 = -1e-8;

    /// Validate the three invariants and wrap the matrix.
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidDensityMatrix {
                reason: "matrix is not square".into(),
            });
        }
        let dm = Self { mat };
        let herm = dm.hermiticity_defect();
        if herm > Self::HERMITICITY_TOL || herm.is_nan() {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("hermiticity defect {herm:.3e} exceeds 1e-10"),
            });
        }
        let tr = dm.trace_error();
        if tr > Self::TRACE_TOL || tr.is_nan() {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("trace deviates from 1 by {tr:.3e}"),
            });
        }
        let min_eig = dm.min_eigenvalue();
        if min_eig < Self::EIGENVALUE_TOL || min_eig.is_nan() {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("minimum eigenvalue {min_eig:.3e} below -1e-8"),
            });
        }
        Ok(dm)
    }

    /// Pure basis state |s, n⟩⟨s, n|.
    pub fn basis_state(h: &HilbertConfig, excited: bool, n: usize) -> Self {
        let d = h.dimension();
        let mut mat = CMat::zeros(d, d);
        let idx = h.index(excited, n);
        mat[(idx, idx)] = ONE;
        Self { mat }
    }

    /// |e, 0⟩⟨e, 0| — the QD prepared in its excited state, empty cavity.
    pub fn excited_vacuum(h: &HilbertConfig) -> Self {
        Self::basis_state(h, true, 0)
    }

    /// |g, 0⟩⟨g, 0|.
    pub fn ground_vacuum(h: &HilbertConfig) -> Self {
        Self::basis_state(h, false, 0)
    }

    /// Diagonal (classical) state from populations in basis order; the
    /// entries must be non-negative and sum to 1.
    pub fn from_diagonal(h: &HilbertConfig, populations: &[f64]) -> Result<Self> {
        let d = h.dimension();
        if populations.len() != d {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("expected {d} diagonal entries, got {}", populations.len()),
            });
        }
        let mut mat = CMat::zeros(d, d);
        for (i, &v) in populations.iter().enumerate() {
            mat[(i, i)] = Complex64::new(v, 0.0);
        }
        Self::new(mat)
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dimension(&self) -> usize {
        self.mat.nrows()
    }

    /// |Tr ρ − 1|.
    pub fn trace_error(&self) -> f64 {
        (self.mat.trace() - ONE).norm()
    }

    /// Max entry of |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let diff = &self.mat - self.mat.adjoint();
        diff.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// Smallest eigenvalue of the hermitized matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    fn to_vec(&self) -> CVec {
        CVec::from_column_slice(self.mat.as_slice())
    }

    fn from_vec(d: usize, v: &CVec) -> CMat {
        CMat::from_column_slice(d, d, v.as_slice())
    }
}

/// A solved time evolution: states on the requested grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub hilbert: HilbertConfig,
    /// Time grid in ħ/μeV.
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

/// Integrate the master equation from `rho0` over `t_grid` (strictly
/// increasing, starting at 0, in ħ/μeV).
///
/// Uses the adaptive 5(4) pair at the given tolerances on the vectorized
/// equation; no renormalization is applied — trace drift is a diagnostic
/// and aborts the run beyond 1e-6. Every output state is checked against
/// the density-matrix invariants.
pub fn evolve(
    h: &HilbertConfig,
    p: &SystemParams,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &RkOptions,
) -> Result<Trajectory> {
    check_grid(t_grid)?;
    if rho0.dimension() != h.dimension() {
        return Err(Error::InvalidDensityMatrix {
            reason: format!(
                "state dimension {} does not match hilbert dimension {}",
                rho0.dimension(),
                h.dimension()
            ),
        });
    }
    let l = liouvillian(h, p)?;
    let d = h.dimension();
    let y0 = rho0.to_vec();
    let ys = rk::integrate_grid(
        |y| &l * y,
        &y0,
        t_grid,
        opts,
        |t, y| {
            let mut trace = Complex64::new(0.0, 0.0);
            for i in 0..d {
                trace += y[i * d + i];
            }
            let drift = (trace - ONE).norm();
            if drift > 1e-6 {
                return Err(Error::TraceDrift { t, drift });
            }
            Ok(())
        },
    )?;
    let states = ys
        .iter()
        .map(|y| DensityMatrix::new(DensityMatrix::from_vec(d, y)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        hilbert: *h,
        times: t_grid.to_vec(),
        states,
    })
}

/// Time series of ⟨σ₊σ₋⟩ and ⟨a†a⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationSeries {
    pub n_e: Vec<f64>,
    pub n_ph: Vec<f64>,
}

/// Extract the electron and photon numbers from a trajectory.
///
/// Both are sums of diagonal elements; imaginary parts above 1e-10 or a
/// QD population outside [−1e-8, 1+1e-8] are reported as invalid states.
pub fn expectations(traj: &Trajectory) -> Result<ExpectationSeries> {
    let h = &traj.hilbert;
    let mut n_e = Vec::with_capacity(traj.states.len());
    let mut n_ph = Vec::with_capacity(traj.states.len());
    for state in &traj.states {
        let (e, ph) = expectation_pair(h, state)?;
        n_e.push(e);
        n_ph.push(ph);
    }
    Ok(ExpectationSeries { n_e, n_ph })
}

/// (⟨σ₊σ₋⟩, ⟨a†a⟩) for a single state.
pub fn expectation_pair(h: &HilbertConfig, state: &DensityMatrix) -> Result<(f64, f64)> {
    let mat = state.matrix();
    let mut e = Complex64::new(0.0, 0.0);
    let mut ph = Complex64::new(0.0, 0.0);
    for n in 0..=h.n_max {
        let ig = h.index(false, n);
        let ie = h.index(true, n);
        e += mat[(ie, ie)];
        ph += (mat[(ig, ig)] + mat[(ie, ie)]) * Complex64::new(n as f64, 0.0);
    }
    if e.im.abs() > 1e-10 || ph.im.abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix {
            reason: format!(
                "observable has imaginary part {:.3e}",
                e.im.abs().max(ph.im.abs())
            ),
        });
    }
    if !(-1e-8..=1.0 + 1e-8).contains(&e.re) {
        return Err(Error::InvalidDensityMatrix {
            reason: format!("QD population {} outside [0, 1]", e.re),
        });
    }
    Ok((e.re, ph.re))
}

/// Solve L(ρ) = 0 with Tr ρ = 1 through the bordered linear system
///
/// ```text
/// [ L   vec(I) ] [ vec(ρ) ]   [ 0 ]
/// [ vec(I)ᵀ  0 ] [   μ    ] = [ 1 ]
/// ```
///
/// A unique steady state makes the bordered matrix regular and drives the
/// multiplier μ to zero; the residual ‖L vec(ρ)‖ is checked to 1e-10.
pub fn steady_state(h: &HilbertConfig, p: &SystemParams) -> Result<DensityMatrix> {
    check_rates(p)?;
    if p.gamma == 0.0 && p.kappa() == 0.0 && p.gamma_star == 0.0 && p.pump == 0.0 {
        return Err(Error::SingularSteadyState {
            reason: "no dissipation channel; every Hamiltonian eigenstate is stationary".into(),
        });
    }
    let l = liouvillian(h, p)?;
    let d = h.dimension();
    let n = d * d;
    let mut bordered = CMat::zeros(n + 1, n + 1);
    bordered.view_mut((0, 0), (n, n)).copy_from(&l);
    for i in 0..d {
        bordered[(i * d + i, n)] = ONE;
        bordered[(n, i * d + i)] = ONE;
    }
    let mut rhs = CVec::zeros(n + 1);
    rhs[n] = ONE;
    let solution = bordered
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSteadyState {
            reason: "bordered system is singular".into(),
        })?;
    let rho_vec = solution.rows(0, n).into_owned();
    let residual = (&l * &rho_vec).norm();
    if residual > 1e-10 {
        return Err(Error::SingularSteadyState {
            reason: format!("stationary residual {residual:.3e} exceeds 1e-10"),
        });
    }
    let raw = DensityMatrix::from_vec(d, &rho_vec);
    let hermitized = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(hermitized)
}

/// Fit the decay rate (in μeV) of a positive decaying series by the
/// least-squares slope of log(value) against time.
///
/// The fit window keeps the samples between 1e-4 and 1e-1 of the initial
/// value, skipping any early transient; it must contain at least 10 points
/// and only positive values.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DecayFit {
            reason: "times and values must have equal length".into(),
        });
    }
    let v0 = *values.first().ok_or_else(|| Error::DecayFit {
        reason: "empty series".into(),
    })?;
    if v0 <= 0.0 || v0.is_nan() {
        return Err(Error::DecayFit {
            reason: format!("initial value {v0} is not positive"),
        });
    }
    let lo = 1e-4 * v0;
    let hi = 1e-1 * v0;
    let in_band: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] >= lo && values[i] <= hi)
        .collect();
    if in_band.len() < 10 {
        return Err(Error::DecayFit {
            reason: format!(
                "only {} samples in the [1e-4, 1e-1] window; need at least 10",
                in_band.len()
            ),
        });
    }
    let (first, last) = (in_band[0], *in_band.last().unwrap());
    if values[first..=last].iter().any(|&v| v <= 0.0 || v.is_nan()) {
        return Err(Error::DecayFit {
            reason: "non-positive value inside the fit window".into(),
        });
    }
    let pts: Vec<(f64, f64)> = in_band
        .iter()
        .map(|&i| (times[i], values[i].ln()))
        .collect();
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, y) in &pts {
        num += (t - t_mean) * (y - y_mean);
        den += (t - t_mean) * (t - t_mean);
    }
    if den == 0.0 {
        return Err(Error::DecayFit {
            reason: "degenerate time axis in fit window".into(),
        });
    }
    Ok(-num / den)
}
