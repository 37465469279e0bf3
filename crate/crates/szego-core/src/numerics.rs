//! Small dense complex linear algebra shared by all modules: linear solves,
//! generalized Hermitian eigendecomposition, FFT and Gauss-Legendre quadrature.
//! Dimensions are small (d <= 64 for the operator blocks, N <= 4096 for FFTs).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SzegoError};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const COND_LIMIT: f64 = 1e12;

/// Solve A x = b by LU with partial pivoting; rejects systems whose pivot
/// ratio suggests a condition number beyond 1e12.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    assert_eq!(a.nrows(), a.ncols(), "solve requires a square matrix");
    assert_eq!(a.nrows(), b.len());
    if a.nrows() == 0 {
        return Ok(CVector::zeros(0));
    }
    let lu = a.clone().lu();
    let diag: Vec<f64> = (0..a.nrows()).map(|i| lu.u()[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0_f64, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(SzegoError::SingularSystem { cond });
    }
    lu.solve(b).ok_or(SzegoError::SingularSystem { cond })
}

/// Generalized Hermitian eigenproblem K v = lambda G v with G Hermitian
/// positive definite. Reduction by Cholesky G = L L^H, ordinary Hermitian
/// eigensolve on L^{-1} K L^{-H}. Returns eigenvalues ascending (clamped to
/// be >= 0) and G-orthonormal eigenvectors as matrix columns.
pub fn herm_gen_eig(k: &CMatrix, g: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = g.nrows();
    assert_eq!(k.nrows(), n);
    assert_eq!(k.ncols(), n);
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let chol = g
        .clone()
        .cholesky()
        .ok_or(SzegoError::IllConditioned { cond: f64::INFINITY })?;
    let l = chol.l();
    let ldiag: Vec<f64> = (0..n).map(|i| l[(i, i)].norm()).collect();
    let lmax = ldiag.iter().cloned().fold(0.0_f64, f64::max);
    let lmin = ldiag.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = (lmax / lmin).powi(2);
    if cond > COND_LIMIT {
        return Err(SzegoError::IllConditioned { cond });
    }
    // B = L^{-1} K L^{-H}, Hermitian.
    let y = l
        .solve_lower_triangular(k)
        .ok_or(SzegoError::IllConditioned { cond })?;
    let b = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or(SzegoError::IllConditioned { cond })?
        .adjoint();
    // Symmetrize away roundoff before the Hermitian eigensolve.
    let b = (&b + b.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let mut lambdas = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    let lh = l.adjoint();
    for (col, &i) in order.iter().enumerate() {
        lambdas.push(eig.eigenvalues[i].max(0.0));
        let w = eig.eigenvectors.column(i).into_owned();
        let v = lh
            .solve_upper_triangular(&w)
            .ok_or(SzegoError::IllConditioned { cond })?;
        vectors.set_column(col, &v);
    }
    Ok((lambdas, vectors))
}

/// Forward DFT, unnormalized: X_n = sum_k x_k e^{-2 pi i n k / N}.
pub fn fft(data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT with 1/N normalization.
pub fn ifft(data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
