//! Independent validation backend on the unit circle. The Cayley-type
//! conformal map phi(z) = (z-i)/(z+i) carries Hardy space of the line onto
//! Hardy space of the disk; rational states become rapidly decaying Fourier
//! series there, and the evolution transfers to
//!     i d/dt f = (1/4pi) P(|1-zeta|^2 |f|^2 f),
//! which a pseudospectral fixed-step RK4 scheme integrates. Everything here
//! is sampling, FFT, and dense linear algebra — deliberately disjoint from
//! the exact partial-fraction path it cross-checks.

use num_complex::Complex64;

use crate::error::{Result, SzegoError};
use crate::flow::InvariantReport;
use crate::numerics::{fft, ifft, solve, CMatrix, CVector};
use crate::rational::HardyRational;

const PI: f64 = std::f64::consts::PI;
const SQRT_PI: f64 = 1.772_453_850_905_516_f64;
/// Relative isometry-defect bound for the truncation of a transferred state.
const TAIL_TOL: f64 = 1e-3;
/// Mid-run abort threshold on relative norm drift.
const NORM_DRIFT_ABORT: f64 = 1e-4;

/// Taylor coefficients f_hat(0..=N) of a disk Hardy function.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskCoeffs {
    pub coeffs: Vec<Complex64>,
}

impl DiskCoeffs {
    pub fn modes(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn zeros(n: usize) -> DiskCoeffs {
        DiskCoeffs { coeffs: vec![Complex64::default(); n + 1] }
    }
}

/// Fixed-step integrator parameters.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub modes: usize,
    pub dt: f64,
    /// Dealiasing factor for the quartic-bandwidth product; must be >= 2.
    pub pad: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { modes: 512, dt: 1e-3, pad: 4 }
    }
}

/// One integration run: checkpointed states plus conservation diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub checkpoints: Vec<(f64, DiskCoeffs)>,
    /// (norm drift, energy drift) accumulated up to each checkpoint.
    pub drifts: Vec<(f64, f64)>,
    pub norm_drift: f64,
    pub energy_drift: f64,
}

/// Boundary pre-image of the grid angle: phi^{-1}(e^{i theta}) = -cot(theta/2).
fn grid_x(theta: f64) -> f64 {
    -1.0 / (0.5 * theta).tan()
}

/// Offset angles theta_k = 2 pi (k + 1/2) / m, which avoid zeta = 1 (x = inf).
fn offset_grid(m: usize) -> Vec<f64> {
    (0..m).map(|k| 2.0 * PI * (k as f64 + 0.5) / m as f64).collect()
}

/// Offset-grid samples -> Fourier coefficients 0..=n via FFT with the
/// half-cell phase twist.
fn offset_samples_to_coeffs(samples: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = samples.len();
    let hat = fft(samples);
    (0..=n)
        .map(|j| hat[j] * Complex64::from_polar(1.0 / m as f64, -PI * j as f64 / m as f64))
        .collect()
}

/// Transfer a rational state to the disk: sample
/// (W* u)(zeta) = (2 i sqrt(pi) / (1 - zeta)) u(phi^{-1}(zeta))
/// on a 4(N+1)-point offset grid and FFT down to N+1 coefficients.
pub fn to_disk(u: &HardyRational, n: usize) -> Result<DiskCoeffs> {
    assert!(n >= 16);
    let norm2 = u.norm_sqr();
    if norm2 == 0.0 {
        return Ok(DiskCoeffs::zeros(n));
    }
    let m = 4 * (n + 1);
    let samples = offset_grid(m)
        .iter()
        .map(|&theta| {
            let zeta = Complex64::from_polar(1.0, theta);
            let prefactor = Complex64::new(0.0, 2.0 * SQRT_PI) / (Complex64::new(1.0, 0.0) - zeta);
            Ok(prefactor * u.eval(Complex64::new(grid_x(theta), 0.0))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let coeffs = DiskCoeffs { coeffs: offset_samples_to_coeffs(&samples, n) };
    let defect = (coeffs.norm_sqr() - norm2).abs() / norm2;
    if defect > TAIL_TOL {
        return Err(SzegoError::TailTooFat { defect, modes: n });
    }
    Ok(coeffs)
}

/// Pull a disk state back to the line at a boundary point:
/// (W f)(x) = f((x - i)/(x + i)) / (sqrt(pi)(x + i)).
pub fn from_disk(f: &DiskCoeffs, x: f64) -> Complex64 {
    let xi = Complex64::new(x, 1.0);
    let zeta = Complex64::new(x, -1.0) / xi;
    let mut value = Complex64::default();
    for &c in f.coeffs.iter().rev() {
        value = value * zeta + c;
    }
    value / (SQRT_PI * xi)
}

/// Grid values v_k = f(e^{i theta_k}) on the plain m-point grid.
fn coeffs_to_grid(f: &DiskCoeffs, m: usize) -> Vec<Complex64> {
    assert!(m >= f.coeffs.len());
    let mut padded = f.coeffs.clone();
    padded.resize(m, Complex64::default());
    let mut v = ifft(&padded);
    for val in &mut v {
        *val *= m as f64;
    }
    v
}

/// Right-hand side of the transferred equation,
/// d/dt f = -(i/4pi) P(|1 - zeta|^2 |f|^2 f),
/// evaluated pseudospectrally on a pad-times grid (alias-free for pad >= 4).
pub fn rhs_disk(f: &DiskCoeffs, pad: usize) -> DiskCoeffs {
    assert!(pad >= 2);
    let n = f.modes();
    let m = pad * (n + 1);
    let v = coeffs_to_grid(f, m);
    let w: Vec<Complex64> = v
        .iter()
        .enumerate()
        .map(|(k, &vk)| {
            let theta = 2.0 * PI * k as f64 / m as f64;
            (2.0 - 2.0 * theta.cos()) * vk.norm_sqr() * vk
        })
        .collect();
    let hat = fft(&w);
    let factor = Complex64::new(0.0, -1.0 / (4.0 * PI)) / m as f64;
    DiskCoeffs { coeffs: (0..=n).map(|j| factor * hat[j]).collect() }
}

/// The Hamiltonian in transferred coordinates:
/// E = (1/32 pi^2) int_0^{2pi} (2 - 2 cos theta) |f|^4 d theta,
/// computed as an exact trigonometric mean on the padded grid.
pub fn disk_energy(f: &DiskCoeffs, pad: usize) -> f64 {
    let n = f.modes();
    let m = pad.max(4) * (n + 1);
    let v = coeffs_to_grid(f, m);
    let mean: f64 = v
        .iter()
        .enumerate()
        .map(|(k, vk)| {
            let theta = 2.0 * PI * k as f64 / m as f64;
            (2.0 - 2.0 * theta.cos()) * vk.norm_sqr().powi(2)
        })
        .sum::<f64>()
        / m as f64;
    mean / (16.0 * PI)
}

/// Coordinate matrix of the transferred Hankel operator: Gamma[n][k] =
/// u_ring(n + k), where u_ring = S*(u o phi^{-1}). The operator acts
/// anti-linearly as c -> Gamma conj(c).
pub fn disk_hankel_matrix(u: &HardyRational, n: usize) -> Result<CMatrix> {
    if u.norm_sqr() == 0.0 {
        return Ok(CMatrix::zeros(n, n));
    }
    let m = 4 * (n + 1);
    let samples = offset_grid(m)
        .iter()
        .map(|&theta| u.eval(Complex64::new(grid_x(theta), 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let g_hat = offset_samples_to_coeffs(&samples, 2 * n - 1);
    // Left shift drops g_hat(0): u_ring(j) = g_hat(j + 1).
    Ok(CMatrix::from_fn(n, n, |r, c| g_hat[r + c + 1]))
}

/// Same matrix, but from an evolved disk state: the composition
/// u o phi^{-1} = (1 - zeta) f / (2 i sqrt(pi)) gives
/// u_ring(j) = (f_hat(j + 1) - f_hat(j)) / (2 i sqrt(pi)).
pub fn hankel_from_coeffs(f: &DiskCoeffs) -> CMatrix {
    let len = f.coeffs.len();
    let d = len / 2;
    let factor = Complex64::new(0.0, 2.0 * SQRT_PI).inv();
    CMatrix::from_fn(d, d, |r, c| {
        let j = r + c;
        let hi = if j + 1 < len { f.coeffs[j + 1] } else { Complex64::default() };
        factor * (hi - f.coeffs[j])
    })
}

/// Eigenvalues of the Hankel square Gamma conj(Gamma) (Hermitian PSD because
/// Gamma is symmetric), descending.
pub fn hankel_square_eigs(gamma: &CMatrix) -> Vec<f64> {
    let k = gamma * gamma.map(|z| z.conj());
    let mut eigs: Vec<f64> = k.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eigs.sort_by(f64::total_cmp);
    eigs.reverse();
    eigs
}

/// Sup-grid relative defect of the pseudospectral nonlinearity against the
/// exact partial-fraction value of -i P(|u|^2 u) on |x| <= 10.
pub fn rhs_consistency(u: &HardyRational, n: usize) -> Result<f64> {
    let f = to_disk(u, n)?;
    let rhs = rhs_disk(&f, 4);
    let cubic = u
        .as_pole_sum()
        .multiply(&u.as_pole_sum().conjugate())?
        .multiply(u.as_pole_sum())?
        .project_upper()
        .scale(Complex64::new(0.0, -1.0));
    let mut sup_err: f64 = 0.0;
    let mut sup_ref: f64 = 0.0;
    for k in 0..=400 {
        let x = -10.0 + 0.05 * k as f64;
        let exact = cubic.eval(Complex64::new(x, 0.0))?;
        sup_err = sup_err.max((from_disk(&rhs, x) - exact).norm());
        sup_ref = sup_ref.max(exact.norm());
    }
    Ok(sup_err / sup_ref.max(f64::MIN_POSITIVE))
}

fn rk4_step(f: &DiskCoeffs, dt: f64, pad: usize) -> DiskCoeffs {
    let axpy = |f: &DiskCoeffs, s: f64, k: &DiskCoeffs| DiskCoeffs {
        coeffs: f
            .coeffs
            .iter()
            .zip(&k.coeffs)
            .map(|(a, b)| a + s * b)
            .collect(),
    };
    let k1 = rhs_disk(f, pad);
    let k2 = rhs_disk(&axpy(f, 0.5 * dt, &k1), pad);
    let k3 = rhs_disk(&axpy(f, 0.5 * dt, &k2), pad);
    let k4 = rhs_disk(&axpy(f, dt, &k3), pad);
    DiskCoeffs {
        coeffs: f
            .coeffs
            .iter()
            .zip(&k1.coeffs)
            .zip(k2.coeffs.iter().zip(&k3.coeffs))
            .zip(&k4.coeffs)
            .map(|(((a, k1), (k2, k3)), k4)| a + dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4))
            .collect(),
    }
}

/// Classical RK4 with fixed step; `t_final` may be negative (time-reversed
/// integration). Checkpoints are hit exactly by shortening the final step of
/// each leg. Norm and transferred energy are monitored every step; the run
/// aborts once relative norm drift exceeds 1e-4.
pub fn integrate(f0: &DiskCoeffs, checkpoints: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    assert!(cfg.dt > 0.0 && cfg.pad >= 2);
    let norm0 = f0.norm_sqr();
    let energy0 = disk_energy(f0, cfg.pad);
    // Stability precheck: the nonlinearity acts pointwise with local
    // frequency (2 - 2 cos theta)|f|^2 / 4 pi; RK4 needs dt times that
    // scale comfortably inside its stability region.
    let vmax = coeffs_to_grid(f0, cfg.pad * f0.coeffs.len())
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0_f64, f64::max);
    let scale = vmax / PI;
    if cfg.dt * scale > 2.0 {
        return Err(SzegoError::Unstable { drift: cfg.dt * scale, t: 0.0 });
    }
    let mut state = f0.clone();
    let mut t = 0.0_f64;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut drifts = Vec::with_capacity(checkpoints.len());
    let mut norm_drift: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;
    for &target in checkpoints {
        while (target - t).abs() > 1e-14 {
            let dt = (target - t).signum() * cfg.dt.min((target - t).abs());
            state = rk4_step(&state, dt, cfg.pad);
            t += dt;
            let nd = (state.norm_sqr() - norm0).abs() / norm0.max(f64::MIN_POSITIVE);
            let ed = (disk_energy(&state, cfg.pad) - energy0).abs() / energy0.max(f64::MIN_POSITIVE);
            norm_drift = norm_drift.max(nd);
            energy_drift = energy_drift.max(ed);
            if nd > NORM_DRIFT_ABORT {
                return Err(SzegoError::Unstable { drift: nd, t });
            }
        }
        out.push((t, state.clone()));
        drifts.push((norm_drift, energy_drift));
    }
    Ok(Trajectory { checkpoints: out, drifts, norm_drift, energy_drift })
}

/// Conserved-quantity snapshot recomputed purely from a disk state: the
/// resolvent functional is J(x) = <(I + x Gamma conj(Gamma))^{-1} c, c>.
pub fn invariants_disk(f: &DiskCoeffs, t: f64, j_points: &[f64]) -> Result<InvariantReport> {
    let gamma = hankel_from_coeffs(f);
    let d = gamma.nrows();
    let k = &gamma * gamma.map(|z| z.conj());
    let c = CVector::from_iterator(d, f.coeffs.iter().take(d).cloned());
    let tail: f64 = f.coeffs.iter().skip(d).map(|z| z.norm_sqr()).sum();
    let mut j_values = Vec::with_capacity(j_points.len());
    for &x in j_points {
        let system = CMatrix::identity(d, d) + k.scale(x);
        let y = solve(&system, &c)?;
        // Coefficients beyond the matrix block see an exponentially small
        // Hankel action; count them at resolvent value 1.
        j_values.push((x, c.dotc(&y).re + tail));
    }
    let mut lambdas = hankel_square_eigs(&gamma);
    lambdas.truncate(8);
    Ok(InvariantReport {
        t,
        norm2: f.norm_sqr(),
        energy: disk_energy(f, 4),
        j_values,
        hankel_lambdas: lambdas,
    })
}
