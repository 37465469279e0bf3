//! Anti-linear Hankel operators H_u f = P(u conj f) and Toeplitz operators
//! T_b f = P(b f) on rational symbols. For rational u the range of H_u is the
//! finite-dimensional space R_u spanned by the Laurent monomials at u's poles
//! (Kronecker), which makes the spectral decomposition of H_u^2 a small dense
//! generalized eigenproblem.

use num_complex::Complex64;

use crate::error::{Result, SzegoError};
use crate::numerics::{herm_gen_eig, CMatrix, CVector};
use crate::rational::{inner_product, HardyRational, PoleSum, PoleTerm};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// The Laurent monomial basis of R_u together with its Gram matrix,
/// gram[j][k] = <e_k, e_j>.
#[derive(Clone, Debug)]
pub struct FiniteBasis {
    pub elems: Vec<HardyRational>,
    pub gram: CMatrix,
}

impl FiniteBasis {
    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    /// Rebuild a HardyRational from coordinates over the basis.
    pub fn expand(&self, coords: &CVector) -> HardyRational {
        let mut acc = HardyRational::zero();
        for (e, c) in self.elems.iter().zip(coords.iter()) {
            acc = acc.add(&e.scale(*c));
        }
        acc
    }

    /// <f, g> for coordinate vectors: g^H G f.
    pub fn pairing(&self, f: &CVector, g: &CVector) -> Complex64 {
        (g.adjoint() * &self.gram * f)[(0, 0)]
    }
}

/// Coordinate matrix m[j][k] = <H_u e_k, e_j> = int u conj(e_j) conj(e_k) dx.
/// The anti-linear action on coordinates is c -> G^{-1} M conj(c).
#[derive(Clone, Debug)]
pub struct HankelMatrix {
    pub m: CMatrix,
    pub basis: FiniteBasis,
}

/// Eigen-data of H_u^2 restricted to R_u: eigenvalues, G-orthonormal
/// eigenfunctions (as rational functions and as coordinate columns), and the
/// expansion coefficients a_j = <u, phi_j>.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub lambdas: Vec<f64>,
    pub vectors: CMatrix,
    pub phis: Vec<HardyRational>,
    pub basis: FiniteBasis,
    pub a: Vec<Complex64>,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// sum |a_j|^2 = ||u||^2.
    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Coefficients <h, phi_j> of an arbitrary rational h against the
    /// eigenfunctions, by residue inner products.
    pub fn project(&self, h: &PoleSum) -> Result<Vec<Complex64>> {
        self.phis
            .iter()
            .map(|phi| inner_product(h, phi.as_pole_sum()))
            .collect()
    }

    /// e^{-i t H_u^2} h for h in R_u.
    pub fn evolve(&self, h: &HardyRational, t: f64) -> Result<HardyRational> {
        let coeffs = self.project(h.as_pole_sum())?;
        let mut acc = HardyRational::zero();
        for ((phi, &b), &lambda) in self.phis.iter().zip(&coeffs).zip(&self.lambdas) {
            let phase = Complex64::from_polar(1.0, -t * lambda);
            acc = acc.add(&phi.scale(b * phase));
        }
        Ok(acc)
    }
}

/// The monomial basis of R_u with its Gram matrix.
pub fn invariant_basis(u: &HardyRational) -> Result<FiniteBasis> {
    assert!(!u.as_pole_sum().is_zero(), "invariant_basis requires u != 0");
    let mut elems = Vec::new();
    for t in u.as_pole_sum().terms() {
        for k in 1..=t.coeffs.len() {
            let mut coeffs = vec![Complex64::default(); k];
            coeffs[k - 1] = Complex64::new(1.0, 0.0);
            elems.push(
                HardyRational::new(PoleSum::from_terms(vec![PoleTerm {
                    pole: t.pole,
                    coeffs,
                }]))
                .expect("u is Hardy, so are its monomials"),
            );
        }
    }
    let d = elems.len();
    let mut gram = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            gram[(j, k)] = inner_product(elems[k].as_pole_sum(), elems[j].as_pole_sum())?;
        }
    }
    let cond = gram_condition(&gram);
    if !cond.is_finite() || cond > 1e12 {
        return Err(SzegoError::IllConditioned { cond });
    }
    Ok(FiniteBasis { elems, gram })
}

fn gram_condition(g: &CMatrix) -> f64 {
    let eig = g.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// H_u f = P(u conj f).
pub fn hankel_apply(u: &HardyRational, f: &HardyRational) -> Result<HardyRational> {
    Ok(u
        .as_pole_sum()
        .multiply(&f.as_pole_sum().conjugate())?
        .project_upper())
}

/// T_b f = P(b f) for a bounded rational symbol b (no real poles).
pub fn toeplitz_apply(b: &PoleSum, f: &HardyRational) -> Result<HardyRational> {
    Ok(b.multiply(f.as_pole_sum())?.project_upper())
}

/// Coordinate matrix of H_u over the invariant basis.
pub fn hankel_matrix(u: &HardyRational, basis: &FiniteBasis) -> Result<HankelMatrix> {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        let uek = u
            .as_pole_sum()
            .multiply(&basis.elems[k].as_pole_sum().conjugate())?;
        for j in 0..d {
            m[(j, k)] = inner_product(&uek, basis.elems[j].as_pole_sum())?;
        }
    }
    Ok(HankelMatrix { m, basis: basis.clone() })
}

/// Spectral decomposition of H_u^2 on R_u: solves K phi = lambda G phi with
/// K = M conj(G)^{-1} conj(M), Hermitian positive semi-definite.
pub fn hankel_square_spectrum(u: &HardyRational) -> Result<SpectralData> {
    if u.as_pole_sum().is_zero() {
        return Ok(SpectralData {
            lambdas: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
            phis: Vec::new(),
            basis: FiniteBasis { elems: Vec::new(), gram: CMatrix::zeros(0, 0) },
            a: Vec::new(),
        });
    }
    let basis = invariant_basis(u)?;
    let hm = hankel_matrix(u, &basis)?;
    let g_bar = basis.gram.map(|v| v.conj());
    let m_bar = hm.m.map(|v| v.conj());
    let lu = g_bar.lu();
    let cond = gram_condition(&basis.gram);
    let ginv_mbar = lu.solve(&m_bar).ok_or(SzegoError::IllConditioned { cond })?;
    let k = &hm.m * ginv_mbar;
    // Symmetrize roundoff.
    let k = (&k + k.adjoint()) * Complex64::new(0.5, 0.0);
    let (mut lambdas, vectors) = herm_gen_eig(&k, &basis.gram)?;
    for l in &mut lambdas {
        if *l < 1e-12 {
            *l = l.max(0.0);
        }
    }
    let d = basis.dim();
    let phis: Vec<HardyRational> = (0..d)
        .map(|j| basis.expand(&vectors.column(j).into_owned()))
        .collect();
    // u's own coordinates are its Laurent coefficients in basis order.
    let mut u_coords = CVector::zeros(d);
    let mut idx = 0;
    for t in u.as_pole_sum().terms() {
        for &c in &t.coeffs {
            u_coords[idx] = c;
            idx += 1;
        }
    }
    let a: Vec<Complex64> = (0..d)
        .map(|j| basis.pairing(&u_coords, &vectors.column(j).into_owned()))
        .collect();
    Ok(SpectralData { lambdas, vectors, phis, basis, a })
}

/// [A*, T_b] f - (i/2pi) I+(f) P b; vanishes identically for rational data.
pub fn commutator_bracket0_defect(b: &PoleSum, f: &HardyRational) -> Result<PoleSum> {
    let tbf = toeplitz_apply(b, f)?;
    let astar_tbf = tbf.astar_apply();
    let tb_astar_f = toeplitz_apply(b, &f.astar_apply())?;
    let commutator = astar_tbf.sub(&tb_astar_f);
    let scale = Complex64::new(0.0, 1.0 / TAU) * f.iplus();
    let correction = b.project_upper().scale(scale);
    Ok(commutator.sub(&correction).into_pole_sum())
}

/// B_u f with B_u = -i T_{|u|^2} + (i/2) H_u^2, the skew-adjoint half of the
/// Lax pair.
pub fn lax_b_apply(u: &HardyRational, f: &HardyRational) -> Result<HardyRational> {
    let u_abs2 = u.as_pole_sum().multiply(&u.as_pole_sum().conjugate())?;
    let t_part = toeplitz_apply(&u_abs2, f)?.scale(Complex64::new(0.0, -1.0));
    let h2 = hankel_apply(u, &hankel_apply(u, f)?)?;
    Ok(t_part.add(&h2.scale(Complex64::new(0.0, 0.5))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::UhpPoint;

    const PI: f64 = std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_pole(p: Complex64, coeff: Complex64) -> HardyRational {
        HardyRational::new(PoleSum::simple_pole(p, coeff)).unwrap()
    }

    fn soliton() -> HardyRational {
        one_pole(c(0.0, -1.0), c(1.0, 0.0))
    }

    fn two_pole() -> HardyRational {
        one_pole(c(0.0, -1.0), c(1.0, 0.0)).add(&one_pole(c(0.0, -2.0), c(1.0, 0.0)))
    }

    /// Standard asymmetric test symbol with a double pole.
    fn fancy() -> HardyRational {
        HardyRational::new(PoleSum::from_terms(vec![
            PoleTerm { pole: c(0.5, -1.0), coeffs: vec![c(1.0, 0.3)] },
            PoleTerm { pole: c(-0.8, -0.6), coeffs: vec![c(0.2, -0.4), c(0.5, 0.0)] },
        ]))
        .unwrap()
    }

    #[test]
    fn basis_single_pole() {
        let b = invariant_basis(&soliton()).unwrap();
        assert_eq!(b.dim(), 1);
        assert!((b.gram[(0, 0)] - c(PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn basis_two_pole_gram() {
        let b = invariant_basis(&two_pole()).unwrap();
        assert_eq!(b.dim(), 2);
        // <(x+ai)^{-1}, (x+bi)^{-1}> = 2 pi / (a + b); basis order is sorted
        // by pole, so elems = {(x+2i)^{-1}, (x+i)^{-1}}.
        let mut diags: Vec<f64> = (0..2).map(|j| b.gram[(j, j)].re).collect();
        diags.sort_by(f64::total_cmp);
        assert!((diags[0] - PI / 2.0).abs() < 1e-12);
        assert!((diags[1] - PI).abs() < 1e-12);
        assert!((b.gram[(0, 1)] - c(2.0 * PI / 3.0, 0.0)).norm() < 1e-12);
        assert!((b.gram[(1, 0)] - c(2.0 * PI / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn basis_multiplicity_expansion() {
        let u = HardyRational::new(PoleSum::from_terms(vec![PoleTerm {
            pole: c(0.0, -1.0),
            coeffs: vec![c(0.0, 0.0), c(1.0, 0.0)],
        }]))
        .unwrap();
        let b = invariant_basis(&u).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.elems[0].as_pole_sum().terms()[0].coeffs.len(), 1);
        assert_eq!(b.elems[1].as_pole_sum().terms()[0].coeffs.len(), 2);
    }

    #[test]
    fn basis_invariance_under_hankel() {
        let u = fancy();
        let b = invariant_basis(&u).unwrap();
        for e in &b.elems {
            let he = hankel_apply(&u, e).unwrap();
            // Every pole of H_u e must be one of u's poles, with order
            // bounded by u's multiplicity there.
            for t in he.as_pole_sum().terms() {
                let host = u
                    .as_pole_sum()
                    .terms()
                    .iter()
                    .find(|s| (s.pole - t.pole).norm() < 1e-9);
                assert!(host.is_some());
                assert!(t.coeffs.len() <= host.unwrap().coeffs.len());
            }
        }
    }

    #[test]
    fn hankel_apply_soliton() {
        let u = soliton();
        let h = hankel_apply(&u, &u).unwrap();
        // H_u u = (i/2)(x+i)^{-1}
        let want = u.scale(c(0.0, 0.5));
        assert!(h.sub(&want).as_pole_sum().max_coeff_norm() < 1e-13);
        assert!(hankel_apply(&u, &HardyRational::zero()).unwrap().as_pole_sum().is_zero());
    }

    #[test]
    fn hankel_symmetry_relation() {
        let u = fancy();
        let f = one_pole(c(1.1, -0.7), c(0.3, 0.9));
        let g = one_pole(c(-2.0, -1.4), c(1.0, -0.2));
        let lhs = inner_product(hankel_apply(&u, &f).unwrap().as_pole_sum(), g.as_pole_sum()).unwrap();
        let rhs = inner_product(hankel_apply(&u, &g).unwrap().as_pole_sum(), f.as_pole_sum()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hankel_matrix_soliton() {
        let u = soliton();
        let b = invariant_basis(&u).unwrap();
        let hm = hankel_matrix(&u, &b).unwrap();
        assert!((hm.m[(0, 0)] - c(0.0, PI / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn hankel_matrix_symmetric_and_linear() {
        let u = fancy();
        let b = invariant_basis(&u).unwrap();
        let hm = hankel_matrix(&u, &b).unwrap();
        let d = b.dim();
        for j in 0..d {
            for k in 0..d {
                assert!((hm.m[(j, k)] - hm.m[(k, j)]).norm() < 1e-12);
            }
        }
        let us = u.scale(c(3.0, 0.0));
        let hms = hankel_matrix(&us, &b).unwrap();
        assert!((&hms.m - &hm.m * c(3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn hankel_matrix_agrees_with_apply() {
        let u = fancy();
        let b = invariant_basis(&u).unwrap();
        let hm = hankel_matrix(&u, &b).unwrap();
        let d = b.dim();
        let g_lu = b.gram.clone().lu();
        for trial in 0..5 {
            let coords = CVector::from_fn(d, |i, _| {
                c(((trial * 3 + i) % 5) as f64 - 2.0, ((trial + 2 * i) % 3) as f64)
            });
            let f = b.expand(&coords);
            let direct = hankel_apply(&u, &f).unwrap();
            let via_matrix = b.expand(&g_lu.solve(&(&hm.m * coords.map(|v| v.conj()))).unwrap());
            assert!(direct.sub(&via_matrix).as_pole_sum().max_coeff_norm() < 1e-10);
        }
    }

    #[test]
    fn spectrum_soliton() {
        let spec = hankel_square_spectrum(&soliton()).unwrap();
        assert_eq!(spec.dim(), 1);
        assert!((spec.lambdas[0] - 0.25).abs() < 1e-12);
        assert!((spec.a[0].norm() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spectrum_double_application_check() {
        let u = fancy();
        let spec = hankel_square_spectrum(&u).unwrap();
        for (phi, &lambda) in spec.phis.iter().zip(&spec.lambdas) {
            let hhphi = hankel_apply(&u, &hankel_apply(&u, phi).unwrap()).unwrap();
            let defect = hhphi.sub(&phi.scale(c(lambda, 0.0)));
            assert!(defect.as_pole_sum().max_coeff_norm() < 1e-9);
        }
        // Orthonormality and Parseval for u.
        for (j, pj) in spec.phis.iter().enumerate() {
            for (k, pk) in spec.phis.iter().enumerate() {
                let ip = inner_product(pj.as_pole_sum(), pk.as_pole_sum()).unwrap();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((ip - c(want, 0.0)).norm() < 1e-10);
            }
        }
        assert!((spec.norm_sqr() - u.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn spectrum_trace_check() {
        let u = fancy();
        let spec = hankel_square_spectrum(&u).unwrap();
        let b = &spec.basis;
        let hm = hankel_matrix(&u, b).unwrap();
        let g_bar = b.gram.map(|v| v.conj());
        let k = &hm.m * g_bar.lu().solve(&hm.m.map(|v| v.conj())).unwrap();
        let ginv_k = b.gram.clone().lu().solve(&k).unwrap();
        let trace: Complex64 = (0..b.dim()).map(|i| ginv_k[(i, i)]).sum();
        let sum: f64 = spec.lambdas.iter().sum();
        assert!((trace - c(sum, 0.0)).norm() < 1e-10 * sum.max(1.0));
    }

    #[test]
    fn spectrum_near_zero_symbol_clamps() {
        let u = one_pole(c(0.0, -1.0), c(1e-20, 0.0));
        // Canonicalization keeps the lone coefficient (it is the largest);
        // all eigenvalues must clamp to >= 0.
        let spec = hankel_square_spectrum(&u).unwrap();
        for &l in &spec.lambdas {
            assert!(l >= 0.0 && l < 1e-30);
        }
    }

    #[test]
    fn spectrum_gauge_covariance() {
        let u = fancy();
        let s1 = hankel_square_spectrum(&u).unwrap();
        let s2 = hankel_square_spectrum(&u.scale(Complex64::from_polar(1.0, 1.234))).unwrap();
        for (a, b) in s1.lambdas.iter().zip(&s2.lambdas) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_perturbation_continuity() {
        let u = two_pole();
        let s1 = hankel_square_spectrum(&u).unwrap();
        let bump = one_pole(c(0.0, -1.0), c(1e-8, 0.0));
        let s2 = hankel_square_spectrum(&u.add(&bump)).unwrap();
        for (a, b) in s1.lambdas.iter().zip(&s2.lambdas) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn toeplitz_cubic_term() {
        let u = soliton();
        let b = u.as_pole_sum().multiply(&u.as_pole_sum().conjugate()).unwrap();
        let out = toeplitz_apply(&b, &u).unwrap();
        // (1/4)(x+i)^{-1} + (i/2)(x+i)^{-2}
        let want = HardyRational::new(PoleSum::from_terms(vec![PoleTerm {
            pole: c(0.0, -1.0),
            coeffs: vec![c(0.25, 0.0), c(0.0, 0.5)],
        }]))
        .unwrap();
        assert!(out.sub(&want).as_pole_sum().max_coeff_norm() < 1e-13);
        // Lower-pole symbols act by plain multiplication.
        let blo = PoleSum::simple_pole(c(0.3, -2.0), c(1.0, 1.0));
        let f = one_pole(c(-1.0, -1.5), c(2.0, 0.0));
        let tf = toeplitz_apply(&blo, &f).unwrap();
        let prod = blo.multiply(f.as_pole_sum()).unwrap();
        assert!(tf.as_pole_sum().sub(&prod).max_coeff_norm() < 1e-13);
    }

    #[test]
    fn bracket0_defect_vanishes() {
        let u0 = soliton();
        let b = u0.as_pole_sum().multiply(&u0.as_pole_sum().conjugate()).unwrap();
        let defect = commutator_bracket0_defect(&b, &u0).unwrap();
        assert!(defect.max_coeff_norm() < 1e-10);
        // I+(f) = 0 with lower-pole symbol: both terms vanish separately.
        let f2 = HardyRational::new(PoleSum::from_terms(vec![PoleTerm {
            pole: c(0.0, -1.0),
            coeffs: vec![c(0.0, 0.0), c(1.0, 0.0)],
        }]))
        .unwrap();
        let blo = PoleSum::simple_pole(c(0.0, -2.0), c(1.0, 0.0));
        let d2 = commutator_bracket0_defect(&blo, &f2).unwrap();
        assert!(d2.max_coeff_norm() < 1e-10);
        // Linearity in b.
        let d3 = commutator_bracket0_defect(&b.scale(c(2.5, 0.0)), &u0).unwrap();
        assert!(d3.max_coeff_norm() < 1e-10);
    }

    #[test]
    fn bracket0_defect_general_symbols() {
        let u = fancy();
        let b = u.as_pole_sum().multiply(&u.as_pole_sum().conjugate()).unwrap();
        for f in [
            one_pole(c(0.7, -0.9), c(1.0, -1.0)),
            two_pole(),
            crate::rational::kernel(UhpPoint::new(c(0.2, 1.5)).unwrap()),
        ] {
            let defect = commutator_bracket0_defect(&b, &f).unwrap();
            assert!(defect.max_coeff_norm() < 1e-10);
        }
    }

    #[test]
    fn hankel_square_toeplitz_identity() {
        // H_u^2 = T_{|u|^2} - T_u T_{conj u} on each basis vector of R_u.
        let u = fancy();
        let basis = invariant_basis(&u).unwrap();
        let u_abs2 = u.as_pole_sum().multiply(&u.as_pole_sum().conjugate()).unwrap();
        let u_conj = u.as_pole_sum().conjugate();
        for e in &basis.elems {
            let h2 = hankel_apply(&u, &hankel_apply(&u, e).unwrap()).unwrap();
            let t1 = toeplitz_apply(&u_abs2, e).unwrap();
            let t2 = toeplitz_apply(u.as_pole_sum(), &toeplitz_apply(&u_conj, e).unwrap()).unwrap();
            let defect = h2.sub(&t1.sub(&t2));
            assert!(defect.as_pole_sum().max_coeff_norm() < 1e-10);
        }
    }

    #[test]
    fn lax_b_skew_symmetry() {
        let u = fancy();
        let f = one_pole(c(0.4, -1.1), c(1.0, 0.5));
        let g = one_pole(c(-0.6, -0.8), c(0.0, 1.0));
        let lhs = inner_product(lax_b_apply(&u, &f).unwrap().as_pole_sum(), g.as_pole_sum()).unwrap();
        let rhs = inner_product(f.as_pole_sum(), lax_b_apply(&u, &g).unwrap().as_pole_sum()).unwrap();
        assert!((lhs + rhs).norm() < 1e-10);
        // <B_u f, f> purely imaginary.
        let diag = inner_product(lax_b_apply(&u, &f).unwrap().as_pole_sum(), f.as_pole_sum()).unwrap();
        assert!(diag.re.abs() < 1e-10);
        assert!(lax_b_apply(&u, &HardyRational::zero()).unwrap().as_pole_sum().is_zero());
    }

    #[test]
    fn lax_b_soliton_value() {
        let u = soliton();
        let bu = lax_b_apply(&u, &u).unwrap();
        // -i P(|u|^2 u) + (i/2)(1/4) u with P(|u|^2 u) from the Toeplitz test.
        let want = HardyRational::new(PoleSum::from_terms(vec![PoleTerm {
            pole: c(0.0, -1.0),
            coeffs: vec![c(0.0, -0.25) + c(0.0, 0.125), c(0.5, 0.0)],
        }]))
        .unwrap();
        assert!(bu.sub(&want).as_pole_sum().max_coeff_norm() < 1e-12);
    }

    #[test]
    fn lemma_bracket_identity() {
        // [A*, B_u] f + (i/2)[A*, H_u^2] f - (1/2pi) <f, u> u = 0.
        let u = fancy();
        for f in [soliton(), two_pole(), one_pole(c(1.3, -0.5), c(0.2, -0.8))] {
            let bu_f = lax_b_apply(&u, &f).unwrap();
            let comm_b = bu_f.astar_apply().sub(&lax_b_apply(&u, &f.astar_apply()).unwrap());
            let h2 = |g: &HardyRational| -> HardyRational {
                hankel_apply(&u, &hankel_apply(&u, g).unwrap()).unwrap()
            };
            let comm_h2 = h2(&f).astar_apply().sub(&h2(&f.astar_apply()));
            let fu = inner_product(f.as_pole_sum(), u.as_pole_sum()).unwrap();
            let rank_one = u.scale(fu / TAU);
            let defect = comm_b
                .add(&comm_h2.scale(c(0.0, 0.5)))
                .sub(&rank_one);
            assert!(defect.as_pole_sum().max_coeff_norm() < 1e-9);
        }
    }
}
