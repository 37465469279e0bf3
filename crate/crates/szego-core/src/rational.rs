//! Exact arithmetic on rational functions vanishing at infinity, stored as
//! poles plus Laurent coefficients. This is the carrier for everything the
//! solver does on the line: partial-fraction products, residue inner
//! products, the analytic projector, resolvents of the generator A and its
//! adjoint, and the boundary functional I+.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SzegoError};

/// Two poles closer than this (complex distance) are merged into one
/// higher-multiplicity pole.
pub const MERGE_TOL: f64 = 1e-10;
/// Coefficients smaller than this times the largest coefficient are dropped
/// during canonicalization.
pub const COEFF_DROP_REL: f64 = 1e-13;
/// Default cap on pole multiplicity; contraction iterates grow the
/// multiplicity at -i by one per application.
pub const DEFAULT_MAX_MULTIPLICITY: usize = 64;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A point in the open upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UhpPoint(Complex64);

impl UhpPoint {
    pub fn new(z: Complex64) -> Option<Self> {
        (z.im > 0.0 && z.is_finite()).then_some(UhpPoint(z))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

/// One pole with its Laurent tail: `coeffs[k-1]` multiplies `(x - pole)^{-k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub coeffs: Vec<Complex64>,
}

/// A finite sum of Laurent tails at poles off the real axis,
/// f(x) = sum_j sum_k c_{j,k} (x - p_j)^{-k}.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoleSum {
    terms: Vec<PoleTerm>,
}

impl PoleSum {
    pub fn zero() -> Self {
        PoleSum { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<PoleTerm>) -> Self {
        let mut f = PoleSum { terms };
        f.canonicalize();
        f
    }

    /// c / (x - p)
    pub fn simple_pole(pole: Complex64, coeff: Complex64) -> Self {
        PoleSum::from_terms(vec![PoleTerm { pole, coeffs: vec![coeff] }])
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total pole order (sum of multiplicities).
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.coeffs.len()).sum()
    }

    /// Largest coefficient modulus; 0 for the zero function. Used as the
    /// defect measure for identities that must vanish as PoleSums.
    pub fn max_coeff_norm(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.coeffs.iter().map(|c| c.norm()))
            .fold(0.0, f64::max)
    }

    /// Sum of order-1 coefficients; this is x f(x) as x -> infinity.
    pub fn leading_tail_coeff(&self) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|t| t.coeffs.first())
            .sum()
    }

    fn canonicalize(&mut self) {
        // Merge near-coincident poles.
        let mut merged: Vec<PoleTerm> = Vec::with_capacity(self.terms.len());
        for term in self.terms.drain(..) {
            match merged.iter_mut().find(|t| (t.pole - term.pole).norm() < MERGE_TOL) {
                Some(t) => {
                    if t.coeffs.len() < term.coeffs.len() {
                        t.coeffs.resize(term.coeffs.len(), Complex64::default());
                    }
                    for (dst, src) in t.coeffs.iter_mut().zip(&term.coeffs) {
                        *dst += src;
                    }
                }
                None => merged.push(term),
            }
        }
        // Drop negligible coefficients and empty tails.
        let scale = merged
            .iter()
            .flat_map(|t| t.coeffs.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        let cutoff = COEFF_DROP_REL * scale;
        for t in &mut merged {
            for c in &mut t.coeffs {
                if c.norm() <= cutoff {
                    *c = Complex64::default();
                }
            }
            while t.coeffs.last().is_some_and(|c| *c == Complex64::default()) {
                t.coeffs.pop();
            }
        }
        merged.retain(|t| !t.coeffs.is_empty());
        merged.sort_by(|a, b| {
            (a.pole.re, a.pole.im)
                .partial_cmp(&(b.pole.re, b.pole.im))
                .unwrap()
        });
        self.terms = merged;
    }

    /// Pointwise evaluation. Fails if z sits on (or within tolerance of) a pole.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::default();
        for t in &self.terms {
            let d = z - t.pole;
            if d.norm() < MERGE_TOL {
                return Err(SzegoError::PoleHit { point: z });
            }
            let inv = d.inv();
            let mut pw = inv;
            for c in &t.coeffs {
                acc += c * pw;
                pw *= inv;
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, c: Complex64) -> PoleSum {
        PoleSum::from_terms(
            self.terms
                .iter()
                .map(|t| PoleTerm {
                    pole: t.pole,
                    coeffs: t.coeffs.iter().map(|a| a * c).collect(),
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &PoleSum) -> PoleSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PoleSum::from_terms(terms)
    }

    pub fn sub(&self, other: &PoleSum) -> PoleSum {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Complex conjugate taken on the real line: (p, k, c) -> (conj p, k, conj c).
    pub fn conjugate(&self) -> PoleSum {
        PoleSum::from_terms(
            self.terms
                .iter()
                .map(|t| PoleTerm {
                    pole: t.pole.conj(),
                    coeffs: t.coeffs.iter().map(|c| c.conj()).collect(),
                })
                .collect(),
        )
    }

    /// Exact partial-fraction expansion of the product, with the default
    /// multiplicity cap.
    pub fn multiply(&self, other: &PoleSum) -> Result<PoleSum> {
        self.multiply_capped(other, DEFAULT_MAX_MULTIPLICITY)
    }

    pub fn multiply_capped(&self, other: &PoleSum, max_mult: usize) -> Result<PoleSum> {
        let mut acc: Vec<PoleTerm> = Vec::new();
        for t1 in &self.terms {
            for t2 in &other.terms {
                for (i, &c1) in t1.coeffs.iter().enumerate() {
                    if c1 == Complex64::default() {
                        continue;
                    }
                    let m = i + 1;
                    for (j, &c2) in t2.coeffs.iter().enumerate() {
                        if c2 == Complex64::default() {
                            continue;
                        }
                        let n = j + 1;
                        cross_product(&mut acc, t1.pole, m, t2.pole, n, c1 * c2, max_mult)?;
                    }
                }
            }
        }
        Ok(PoleSum::from_terms(acc))
    }

    /// The Szego projector on rational functions: keep the terms whose poles
    /// lie in the lower half-plane (the H^2 part); the discarded terms are
    /// orthogonal to H^2.
    pub fn project_upper(&self) -> HardyRational {
        HardyRational(PoleSum::from_terms(
            self.terms.iter().filter(|t| t.pole.im < 0.0).cloned().collect(),
        ))
    }

    /// The complementary part with poles in the upper half-plane.
    pub fn anti_hardy_part(&self) -> PoleSum {
        PoleSum::from_terms(
            self.terms.iter().filter(|t| t.pole.im > 0.0).cloned().collect(),
        )
    }

    /// x f(x) split as (decaying PoleSum, constant at infinity).
    pub fn x_multiply(&self) -> (PoleSum, Complex64) {
        let mut terms: Vec<PoleTerm> = Vec::new();
        let mut constant = Complex64::default();
        for t in &self.terms {
            let mut coeffs = vec![Complex64::default(); t.coeffs.len()];
            for (i, &c) in t.coeffs.iter().enumerate() {
                // x (x-p)^{-k} = (x-p)^{-(k-1)} + p (x-p)^{-k}
                coeffs[i] += t.pole * c;
                if i == 0 {
                    constant += c;
                } else {
                    coeffs[i - 1] += c;
                }
            }
            terms.push(PoleTerm { pole: t.pole, coeffs });
        }
        (PoleSum::from_terms(terms), constant)
    }
}

/// Partial fractions of c (x-a)^{-m} (x-b)^{-n}, accumulated into `acc`.
fn cross_product(
    acc: &mut Vec<PoleTerm>,
    a: Complex64,
    m: usize,
    b: Complex64,
    n: usize,
    c: Complex64,
    max_mult: usize,
) -> Result<()> {
    if (a - b).norm() < MERGE_TOL {
        let order = m + n;
        if order > max_mult {
            return Err(SzegoError::DegenerateCollision { max: max_mult });
        }
        add_coeff(acc, a, order, c);
        return Ok(());
    }
    let d = a - b;
    // (x-a)^{-j} side: (-1)^{m-j} C(m-j+n-1, n-1) (a-b)^{-(m+n-j)}
    for j in 1..=m {
        let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = c * sign * binomial(m - j + n - 1, n - 1) * d.powi(-((m + n - j) as i32));
        add_coeff(acc, a, j, coeff);
    }
    for k in 1..=n {
        let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = c * sign * binomial(n - k + m - 1, m - 1) * (-d).powi(-((m + n - k) as i32));
        add_coeff(acc, b, k, coeff);
    }
    Ok(())
}

fn add_coeff(acc: &mut Vec<PoleTerm>, pole: Complex64, order: usize, c: Complex64) {
    let term = match acc.iter_mut().find(|t| (t.pole - pole).norm() < MERGE_TOL) {
        Some(t) => t,
        None => {
            acc.push(PoleTerm { pole, coeffs: Vec::new() });
            acc.last_mut().unwrap()
        }
    };
    if term.coeffs.len() < order {
        term.coeffs.resize(order, Complex64::default());
    }
    term.coeffs[order - 1] += c;
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// The L^2(R) pairing <f, g> = int f conj(g) dx, computed by closing the
/// contour in the upper half-plane: 2 pi i times the sum of residues of
/// f conj(g) there.
pub fn inner_product(f: &PoleSum, g: &PoleSum) -> Result<Complex64> {
    let h = f.multiply(&g.conjugate())?;
    let mut res = Complex64::default();
    for t in h.terms() {
        if t.pole.im > 0.0 {
            res += t.coeffs[0];
        }
    }
    Ok(Complex64::new(0.0, TAU) * res)
}

pub fn norm_sqr(f: &PoleSum) -> Result<f64> {
    Ok(inner_product(f, f)?.re)
}

/// A rational element of H^2(R): all poles strictly below the real axis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HardyRational(PoleSum);

impl HardyRational {
    pub fn new(f: PoleSum) -> Option<Self> {
        f.terms().iter().all(|t| t.pole.im < 0.0).then_some(HardyRational(f))
    }

    pub fn zero() -> Self {
        HardyRational(PoleSum::zero())
    }

    pub fn as_pole_sum(&self) -> &PoleSum {
        &self.0
    }

    pub fn into_pole_sum(self) -> PoleSum {
        self.0
    }

    pub fn scale(&self, c: Complex64) -> HardyRational {
        HardyRational(self.0.scale(c))
    }

    pub fn add(&self, other: &HardyRational) -> HardyRational {
        HardyRational(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &HardyRational) -> HardyRational {
        HardyRational(self.0.sub(&other.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0).expect("Hardy norm is always integrable")
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.0.eval(z)
    }

    /// The boundary functional I+(f) = Fourier transform at 0+. Closed form:
    /// -2 pi i times the sum of order-1 coefficients; higher orders
    /// contribute nothing at the edge.
    pub fn iplus(&self) -> Complex64 {
        Complex64::new(0.0, -TAU) * self.0.leading_tail_coeff()
    }

    /// (A* - z)^{-1} f = (f(x) - f(z)) / (x - z). The apparent pole at z
    /// cancels exactly; the result keeps f's pole set.
    pub fn resolvent_a_star(&self, z: Complex64) -> Result<HardyRational> {
        let mut terms = Vec::with_capacity(self.0.terms().len());
        for t in self.0.terms() {
            let d = z - t.pole;
            if d.norm() < MERGE_TOL {
                return Err(SzegoError::PoleHit { point: z });
            }
            let kmax = t.coeffs.len();
            // Coefficient of (x-p)^{-m}: -sum_{k>=m} c_k (z-p)^{m-k-1}.
            let mut coeffs = vec![Complex64::default(); kmax];
            for (m, slot) in coeffs.iter_mut().enumerate() {
                let m = m + 1;
                let mut s = Complex64::default();
                for (ki, &c) in t.coeffs.iter().enumerate().skip(m - 1) {
                    let k = ki + 1;
                    s += c * d.powi(m as i32 - k as i32 - 1);
                }
                *slot = -s;
            }
            terms.push(PoleTerm { pole: t.pole, coeffs });
        }
        Ok(HardyRational(PoleSum::from_terms(terms)))
    }

    /// (A - conj(z))^{-1} f = (x - conj(z))^{-1} f(x) for z in the upper
    /// half-plane; the new pole conj(z) lies below the axis.
    pub fn resolvent_a(&self, z: UhpPoint) -> Result<HardyRational> {
        self.multiply_simple_pole(z.value().conj())
    }

    /// Multiply by (x - w)^{-1}, w in the lower half-plane.
    pub fn multiply_simple_pole(&self, w: Complex64) -> Result<HardyRational> {
        let factor = PoleSum::simple_pole(w, Complex64::new(1.0, 0.0));
        let prod = self.0.multiply(&factor)?;
        Ok(HardyRational(prod))
    }

    /// A* f: x f(x) minus the constant the product picks up at infinity.
    pub fn astar_apply(&self) -> HardyRational {
        HardyRational(self.0.x_multiply().0)
    }

    /// Time-reversal companion (R f)(x) = conj(f(-x)); pole map p -> -conj(p),
    /// an isometric involution of H^2.
    pub fn reflect(&self) -> HardyRational {
        HardyRational(PoleSum::from_terms(
            self.0
                .terms()
                .iter()
                .map(|t| PoleTerm {
                    pole: -t.pole.conj(),
                    coeffs: t
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
                            c.conj() * sign
                        })
                        .collect(),
                })
                .collect(),
        ))
    }

    /// f(mu x) rescaled; mu > 0 keeps the Hardy property.
    pub fn dilate(&self, mu: f64) -> HardyRational {
        assert!(mu > 0.0);
        HardyRational(PoleSum::from_terms(
            self.0
                .terms()
                .iter()
                .map(|t| PoleTerm {
                    pole: t.pole / mu,
                    coeffs: t
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c * (mu as f64).powi(-(i as i32 + 1)))
                        .collect(),
                })
                .collect(),
        ))
    }
}

/// The reproducing kernel v_a(x) = (1/2 pi i) (conj(a) - x)^{-1}; satisfies
/// <f, v_a> = f(a).
pub fn kernel(a: UhpPoint) -> HardyRational {
    // (1/2pi i)(abar - x)^{-1} = -(1/2pi i)(x - abar)^{-1}
    HardyRational(PoleSum::simple_pole(
        a.value().conj(),
        Complex64::new(0.0, 1.0 / TAU),
    ))
}

/// The approximate identity chi_eps(x) = 1/(1 - i eps x) = (i/eps)(x + i/eps)^{-1}.
pub fn chi(eps: f64) -> HardyRational {
    assert!(eps > 0.0);
    HardyRational(PoleSum::simple_pole(
        Complex64::new(0.0, -1.0 / eps),
        Complex64::new(0.0, 1.0 / eps),
    ))
}

// ---- JSON wire format ----------------------------------------------------
// {"terms":[{"pole":[re,im],"coeffs":[[re,im],...]}]}

#[derive(Serialize, Deserialize)]
struct WireTerm {
    pole: [f64; 2],
    coeffs: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct WirePoleSum {
    terms: Vec<WireTerm>,
}

impl Serialize for PoleSum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        WirePoleSum {
            terms: self
                .terms
                .iter()
                .map(|t| WireTerm {
                    pole: [t.pole.re, t.pole.im],
                    coeffs: t.coeffs.iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PoleSum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = WirePoleSum::deserialize(deserializer)?;
        let terms = wire
            .terms
            .into_iter()
            .map(|t| PoleTerm {
                pole: Complex64::new(t.pole[0], t.pole[1]),
                coeffs: t.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            })
            .collect::<Vec<_>>();
        for t in &terms {
            if t.pole.im == 0.0 {
                return Err(D::Error::custom("pole on the real axis"));
            }
        }
        Ok(PoleSum::from_terms(terms))
    }
}

impl Serialize for HardyRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HardyRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let f = PoleSum::deserialize(deserializer)?;
        HardyRational::new(f).ok_or_else(|| D::Error::custom("pole in the upper half-plane"))
    }
}
