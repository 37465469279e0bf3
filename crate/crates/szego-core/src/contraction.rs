//! Audit of the Cayley-transform machinery: the perturbed shift
//! Sigma_u = (A + L - i)(A + L + i)^{-1}, its adjoint, the rank-one defect
//! vector q, the orthonormal family {Sigma_u^n q}, the Plancherel exhaustion
//! of ||u||^2, and the commutation with the phase-twisted Hankel operator.
//! Everything runs in exact partial-fraction arithmetic: Sigma_u only adds
//! pole multiplicity at -i, which the representation carries natively.

use num_complex::Complex64;

use crate::error::Result;
use crate::flow::{build_l, evolve_phase, resolve_dissipative, LOperator, ResolventKind};
use crate::hankel::{hankel_apply, hankel_square_spectrum, invariant_basis, SpectralData};
use crate::numerics::{solve, CMatrix, CVector};
use crate::rational::{inner_product, kernel, HardyRational, UhpPoint};

const PI: f64 = std::f64::consts::PI;

/// Which Cayley transform to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CayleyKind {
    Sigma,
    SigmaStar,
}

/// Full audit report; all defects are sups over a fixed probe family.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ContractionAudit {
    pub q_norm: f64,
    pub isometry_defect: f64,
    pub coisometry_defect: f64,
    pub gram_defect: f64,
    pub plancherel_partials: Vec<f64>,
    pub plancherel_ratio: f64,
    pub commutation_defect: f64,
}

/// Precomputed spectral data and L for one (u, t) pair.
#[derive(Clone, Debug)]
pub struct CayleyEngine {
    pub spec: SpectralData,
    pub l: LOperator,
    pub t: f64,
}

impl CayleyEngine {
    pub fn new(u: &HardyRational, t: f64) -> Result<CayleyEngine> {
        let spec = hankel_square_spectrum(u)?;
        let l = build_l(&spec, t);
        Ok(CayleyEngine { spec, l, t })
    }

    /// Sigma_u f = f - 2i (A + L + i)^{-1} f and its adjoint
    /// Sigma_u* f = f + 2i (A* + L - i)^{-1} f.
    pub fn apply(&self, f: &HardyRational, which: CayleyKind) -> Result<HardyRational> {
        match which {
            CayleyKind::Sigma => {
                let g = resolve_dissipative(
                    &self.spec,
                    &self.l,
                    ResolventKind::APlusL,
                    Complex64::new(0.0, -1.0),
                    f,
                )?;
                Ok(f.sub(&g.scale(Complex64::new(0.0, 2.0))))
            }
            CayleyKind::SigmaStar => {
                let g = resolve_dissipative(
                    &self.spec,
                    &self.l,
                    ResolventKind::AstarPlusL,
                    Complex64::new(0.0, 1.0),
                    f,
                )?;
                Ok(f.add(&g.scale(Complex64::new(0.0, 2.0))))
            }
        }
    }

    /// The wandering vector q = sqrt(4 pi)(I - (A + L + i)^{-1} L) v_i,
    /// where v_i is the reproducing kernel at i; always a unit vector.
    pub fn defect_vector_q(&self) -> Result<HardyRational> {
        let v_i = kernel(UhpPoint::new(Complex64::new(0.0, 1.0)).expect("i is interior"));
        let lv = self.l.apply(&self.spec, &v_i)?;
        let correction = resolve_dissipative(
            &self.spec,
            &self.l,
            ResolventKind::APlusL,
            Complex64::new(0.0, -1.0),
            &lv,
        )?;
        Ok(v_i.sub(&correction).scale(Complex64::new((4.0 * PI).sqrt(), 0.0)))
    }

    /// The anti-linear twisted Hankel operator e^{-i t H_u^2} H_u.
    pub fn twisted_hankel(&self, u: &HardyRational, f: &HardyRational) -> Result<HardyRational> {
        let h = hankel_apply(u, f)?;
        self.spec.evolve(&h, self.t)
    }
}

pub fn cayley_apply(
    u: &HardyRational,
    t: f64,
    f: &HardyRational,
    which: CayleyKind,
) -> Result<HardyRational> {
    CayleyEngine::new(u, t)?.apply(f, which)
}

pub fn defect_vector_q(u: &HardyRational, t: f64) -> Result<HardyRational> {
    CayleyEngine::new(u, t)?.defect_vector_q()
}

/// Partial sums P_n = sum_{m<=n} |<p, Sigma_u^m q>|^2 with p = e^{-itH_u^2}u.
/// The full series exhausts ||u||^2; the rate is problem-dependent and the
/// caller picks the iteration budget.
pub fn plancherel_partials(u: &HardyRational, t: f64, n: usize) -> Result<Vec<f64>> {
    let engine = CayleyEngine::new(u, t)?;
    if u.norm_sqr() == 0.0 {
        return Ok(vec![0.0; n + 1]);
    }
    let orbit = CoordOrbit::new(&engine, n)?;
    let p = orbit.coords(&evolve_phase(&engine.spec, t))?;
    let mut state = orbit.coords(&engine.defect_vector_q()?)?;
    let mut partials = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    for m in 0..=n {
        if m > 0 {
            state = orbit.step(&state)?;
        }
        acc += coord_dot(&p, &state).norm_sqr();
        partials.push(acc);
    }
    Ok(partials)
}

/// || Sigma_u* (H~ f) - H~ (Sigma_u f) || for the twisted Hankel H~.
pub fn commutation_defect(u: &HardyRational, t: f64, f: &HardyRational) -> Result<f64> {
    let engine = CayleyEngine::new(u, t)?;
    let lhs = engine.apply(&engine.twisted_hankel(u, f)?, CayleyKind::SigmaStar)?;
    let rhs = engine.twisted_hankel(u, &engine.apply(f, CayleyKind::Sigma)?)?;
    Ok(lhs.sub(&rhs).norm_sqr().sqrt())
}

/// Independent evaluation of Sigma_u through the multiplicative
/// representation (Sigma_0 + (1/2i) L (I - Sigma_0)) (I + (1/2i) L (I - Sigma_0))^{-1}.
/// Since I - Sigma_0 = 2i (x+i)^{-1}, the preimage g solves
/// g + L((x+i)^{-1} g) = f; because L lands in the invariant subspace, g sits
/// in f + R_u and the solve is assembled over the raw monomial basis of R_u
/// (Gram expansion) rather than the eigenvector projections used by the
/// resolvent path.
pub fn sigma_via_representation(
    u: &HardyRational,
    t: f64,
    f: &HardyRational,
) -> Result<HardyRational> {
    let engine = CayleyEngine::new(u, t)?;
    let minus_i = Complex64::new(0.0, -1.0);
    if engine.spec.dim() == 0 {
        return Ok(f.sub(&f.multiply_simple_pole(minus_i)?.scale(Complex64::new(0.0, 2.0))));
    }
    let basis = invariant_basis(u)?;
    let d = basis.dim();
    let coords = |h: &HardyRational| -> Result<CVector> {
        let rhs = CVector::from_iterator(
            d,
            basis
                .elems
                .iter()
                .map(|e| inner_product(h.as_pole_sum(), e.as_pole_sum()))
                .collect::<Result<Vec<_>>>()?,
        );
        solve(&basis.gram, &rhs)
    };
    // g = f + sum_m xi_m e_m; project the fixed-point equation on the basis.
    let mut amat = CMatrix::zeros(d, d);
    for m in 0..d {
        let le = engine
            .l
            .apply(&engine.spec, &basis.elems[m].multiply_simple_pole(minus_i)?)?;
        amat.set_column(m, &coords(&le)?);
    }
    let lf = engine.l.apply(&engine.spec, &f.multiply_simple_pole(minus_i)?)?;
    let rhs = -coords(&lf)?;
    let xi = solve(&(CMatrix::identity(d, d) + amat), &rhs)?;
    let g = f.add(&basis.expand(&xi));
    Ok(f.sub(&g.multiply_simple_pole(minus_i)?.scale(Complex64::new(0.0, 2.0))))
}

/// Coordinate-space walker for the orbit {Sigma_u^n q}. The raw Laurent
/// coefficients of (x+i)^{-k} blow up combinatorially with the multiplicity
/// Sigma_u accrues at -i, so deep orbits cannot be carried as PoleSums in
/// f64. Instead the orbit is tracked over the orthonormal rational basis
/// e_k = (x-i)^k / (sqrt(pi)(x+i)^{k+1}), in which Sigma_0 is exactly the
/// coordinate shift and multiplication by (x+i)^{-1} is an exact two-term
/// difference; only the finite-rank part of Sigma_u needs a solve. The two
/// paths agree wherever the rational one is still well-conditioned.
pub struct CoordOrbit {
    /// Coordinates of the H_u^2 eigenvectors.
    phi: Vec<Vec<Complex64>>,
    /// psi_j = 2i (x+i)^{-1} phi_j.
    psi: Vec<Vec<Complex64>>,
    /// L coefficient matrix over the eigenbasis.
    c_mat: CMatrix,
    /// I + B C with B[k][j] = <(x+i)^{-1} phi_j, phi_k>.
    system: CMatrix,
    len: usize,
}

/// Exact coordinate action of multiplication by (x+i)^{-1} = (1 - zeta)/2i.
fn coord_simple_pole(c: &[Complex64]) -> Vec<Complex64> {
    let half_i_inv = Complex64::new(0.0, -0.5); // 1/(2i)
    let mut out = vec![Complex64::default(); c.len()];
    for n in 0..c.len() {
        let prev = if n == 0 { Complex64::default() } else { c[n - 1] };
        out[n] = half_i_inv * (c[n] - prev);
    }
    out
}

fn coord_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Basis coordinates <f, e_k> for k < len, via the conformal transfer.
fn mt_coords(f: &HardyRational, len: usize) -> Result<Vec<Complex64>> {
    if f.norm_sqr() == 0.0 {
        return Ok(vec![Complex64::default(); len]);
    }
    let mut coeffs = crate::disk::to_disk(f, len.max(64))?.coeffs;
    let tail: f64 = coeffs.iter().rev().take(8).map(|z| z.norm_sqr()).sum();
    debug_assert!(tail < 1e-24 * f.norm_sqr().max(1.0), "basis truncation too short");
    coeffs.resize(len, Complex64::default());
    Ok(coeffs)
}

impl CoordOrbit {
    /// `depth` is the number of Sigma_u applications the orbit will take;
    /// the expansion length covers the pole tails plus the shift budget.
    pub fn new(engine: &CayleyEngine, depth: usize) -> Result<CoordOrbit> {
        let d = engine.spec.dim();
        let len = 256 + depth + 2;
        let phi: Vec<Vec<Complex64>> = engine
            .spec
            .phis
            .iter()
            .map(|p| mt_coords(p, len))
            .collect::<Result<_>>()?;
        let psi: Vec<Vec<Complex64>> = phi
            .iter()
            .map(|p| {
                coord_simple_pole(p)
                    .into_iter()
                    .map(|z| Complex64::new(0.0, 2.0) * z)
                    .collect()
            })
            .collect();
        let mut b = CMatrix::zeros(d, d);
        for j in 0..d {
            let rp = coord_simple_pole(&phi[j]);
            for k in 0..d {
                b[(k, j)] = coord_dot(&rp, &phi[k]);
            }
        }
        let system = CMatrix::identity(d, d) + &b * &engine.l.c;
        Ok(CoordOrbit { phi, psi, c_mat: engine.l.c.clone(), system, len })
    }

    pub fn coords(&self, f: &HardyRational) -> Result<Vec<Complex64>> {
        mt_coords(f, self.len)
    }

    /// One application of Sigma_u: shift plus the finite-rank correction.
    pub fn step(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        let d = self.phi.len();
        let mut next = vec![Complex64::default(); c.len()];
        next[1..].copy_from_slice(&c[..c.len() - 1]);
        if d == 0 {
            return Ok(next);
        }
        let rc = coord_simple_pole(c);
        let svec = CVector::from_iterator(d, self.phi.iter().map(|p| coord_dot(&rc, p)));
        let gamma = solve(&self.system, &svec)?;
        let alpha = &self.c_mat * gamma;
        for (psi, a) in self.psi.iter().zip(alpha.iter()) {
            for (n, p) in psi.iter().enumerate() {
                next[n] += a * p;
            }
        }
        Ok(next)
    }
}

/// Deterministic probe family used for the defect sups.
fn probes(u: &HardyRational) -> Vec<HardyRational> {
    use crate::rational::PoleSum;
    let mut v = vec![
        HardyRational::new(PoleSum::simple_pole(
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
        ))
        .unwrap(),
        HardyRational::new(PoleSum::simple_pole(
            Complex64::new(0.5, -1.5),
            Complex64::new(0.7, -0.3),
        ))
        .unwrap(),
        HardyRational::new(PoleSum::from_terms(vec![crate::rational::PoleTerm {
            pole: Complex64::new(-0.4, -0.7),
            coeffs: vec![Complex64::new(0.2, 0.1), Complex64::new(1.0, 0.0)],
        }]))
        .unwrap(),
    ];
    if u.norm_sqr() > 0.0 {
        v.push(u.clone());
    }
    v
}

/// Run the whole audit for one (u, t) pair with the given Plancherel budget.
pub fn audit(u: &HardyRational, t: f64, iterations: usize) -> Result<ContractionAudit> {
    let engine = CayleyEngine::new(u, t)?;
    let q = engine.defect_vector_q()?;
    let q_norm = q.norm_sqr().sqrt();
    let probes = probes(u);
    let images: Vec<HardyRational> = probes
        .iter()
        .map(|f| engine.apply(f, CayleyKind::Sigma))
        .collect::<Result<_>>()?;
    let mut isometry_defect: f64 = 0.0;
    for (f, sf) in probes.iter().zip(&images) {
        for (g, sg) in probes.iter().zip(&images) {
            let before = inner_product(f.as_pole_sum(), g.as_pole_sum())?;
            let after = inner_product(sf.as_pole_sum(), sg.as_pole_sum())?;
            isometry_defect = isometry_defect.max((after - before).norm());
        }
    }
    let mut coisometry_defect: f64 = 0.0;
    for f in &probes {
        let ssf = engine.apply(&engine.apply(f, CayleyKind::SigmaStar)?, CayleyKind::Sigma)?;
        let fq = inner_product(f.as_pole_sum(), q.as_pole_sum())?;
        let residual = ssf.sub(f).add(&q.scale(fq));
        coisometry_defect = coisometry_defect.max(residual.norm_sqr().sqrt());
    }
    let mut commutation = 0.0_f64;
    for f in &probes {
        commutation = commutation.max(commutation_defect(u, t, f)?);
    }
    // Orthonormality of {Sigma^n q} and the Plancherel exhaustion share the
    // same orbit; walk it once in basis coordinates.
    let walker = CoordOrbit::new(&engine, iterations)?;
    let mut orbit = vec![walker.coords(&q)?];
    for _ in 0..iterations {
        orbit.push(walker.step(orbit.last().unwrap())?);
    }
    let mut gram_defect: f64 = 0.0;
    for (m, cm) in orbit.iter().enumerate() {
        for (n, cn) in orbit.iter().enumerate() {
            let p = coord_dot(cm, cn);
            let want = if m == n { Complex64::new(1.0, 0.0) } else { Complex64::default() };
            gram_defect = gram_defect.max((p - want).norm());
        }
    }
    let p = walker.coords(&evolve_phase(&engine.spec, t))?;
    let mut partials = Vec::with_capacity(orbit.len());
    let mut acc = 0.0;
    for state in &orbit {
        acc += coord_dot(&p, state).norm_sqr();
        partials.push(acc);
    }
    let norm2 = u.norm_sqr();
    let ratio = if norm2 > 0.0 { partials.last().unwrap() / norm2 } else { 1.0 };
    Ok(ContractionAudit {
        q_norm,
        isometry_defect,
        coisometry_defect,
        gram_defect,
        plancherel_partials: partials,
        plancherel_ratio: ratio,
        commutation_defect: commutation,
    })
}
