//! Real-coefficient polynomials (ascending order) and complex root sets.

use num_complex::Complex64;

use super::{eigvals, Matrix, Vector};
use crate::error::{Error, Result};

/// Relative magnitude below which a stored coefficient is treated as zero.
pub const TRIM_REL_TOL: f64 = 1e-10;

/// Real polynomial with coefficients in ascending degree order. The zero
/// polynomial is the empty coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial z^k.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Polynomial { coeffs: c }
    }

    /// Build the real polynomial with the given roots; complex roots must
    /// come in conjugate pairs (within `tol`).
    pub fn from_roots(roots: &[Complex64], tol: f64) -> Result<Self> {
        let mut remaining: Vec<Complex64> = roots.to_vec();
        let mut p = Polynomial::one();
        while let Some(r) = remaining.pop() {
            if r.im.abs() <= tol {
                p = &p * &Polynomial::new(vec![-r.re, 1.0]);
            } else {
                let conj = r.conj();
                let idx = remaining
                    .iter()
                    .position(|c| (c - conj).norm() <= tol * (1.0 + r.norm()))
                    .ok_or_else(|| {
                        Error::InvalidInput(format!("root {r} has no conjugate partner"))
                    })?;
                remaining.swap_remove(idx);
                p = &p * &Polynomial::new(vec![r.norm_sqr(), -2.0 * r.re, 1.0]);
            }
        }
        Ok(p)
    }

    fn trim(&mut self) {
        let max = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if max == 0.0 {
            self.coeffs.clear();
            return;
        }
        let tol = TRIM_REL_TOL * max;
        while let Some(&last) = self.coeffs.last() {
            if last.abs() <= tol {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of z^k (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn is_monic(&self, tol: f64) -> bool {
        (self.leading() - 1.0).abs() <= tol
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("cannot normalize the zero polynomial".into()));
        }
        let lead = self.leading();
        Ok(Polynomial {
            coeffs: self.coeffs.iter().map(|c| c / lead).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.coeff(i) + other.coeff(i);
        }
        Polynomial::new(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    /// Coefficient-wise max-norm.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()))
    }

    /// Least-squares quotient of `self / d` together with the max-norm of
    /// the residual `self - q * d`. The caller decides whether a nonzero
    /// residual means "not divisible".
    pub fn div_exact(&self, d: &Polynomial, _tol: f64) -> Result<(Polynomial, f64)> {
        if d.is_zero() {
            return Err(Error::InvalidInput("division by the zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok((Polynomial::zero(), 0.0));
        }
        let da = self.degree().unwrap();
        let dd = d.degree().unwrap();
        if da < dd {
            return Ok((Polynomial::zero(), self.max_norm()));
        }
        let dq = da - dd;
        // convolution matrix of d acting on q: (da+1) x (dq+1)
        let mut t = Matrix::zeros(da + 1, dq + 1);
        for j in 0..=dq {
            for (k, &c) in d.coeffs.iter().enumerate() {
                t[(j + k, j)] = c;
            }
        }
        let mut rhs = Vector::from_fn(da + 1, |i, _| self.coeff(i));
        let qr = t.clone().qr();
        qr.q_tr_mul(&mut rhs);
        let r = qr.r();
        let q = r
            .solve_upper_triangular(&rhs.rows(0, dq + 1).into_owned())
            .ok_or_else(|| Error::InvalidInput("rank-deficient division system".into()))?;
        let qpoly = Polynomial::new(q.iter().copied().collect());
        let resid = self.sub(&(&qpoly * d)).max_norm();
        Ok((qpoly, resid))
    }

    /// Roots as eigenvalues of the companion matrix of the monic
    /// normalization.
    pub fn roots(&self) -> Result<ComplexRootSet> {
        let deg = self.degree().ok_or(Error::EmptyRootSet)?;
        if deg == 0 {
            return Err(Error::EmptyRootSet);
        }
        let m = self.monic()?;
        if deg == 1 {
            return Ok(ComplexRootSet::new(vec![Complex64::new(-m.coeff(0), 0.0)]));
        }
        let mut comp = Matrix::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -m.coeff(i);
        }
        eigvals(&comp)
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        Polynomial::new(conv(&self.coeffs, &rhs.coeffs))
    }
}

impl std::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*z"),
                _ => format!("{c}*z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Discrete convolution of two coefficient slices.
pub fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Multiset of complex scalars, typically roots of a real polynomial.
#[derive(Debug, Clone)]
pub struct ComplexRootSet {
    roots: Vec<Complex64>,
}

impl ComplexRootSet {
    pub fn new(roots: Vec<Complex64>) -> Self {
        ComplexRootSet { roots }
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().fold(0.0f64, |a, c| a.max(c.norm()))
    }

    /// True if the multiset is closed under conjugation within `tol`.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        let mut remaining: Vec<Complex64> = self.roots.clone();
        while let Some(r) = remaining.pop() {
            if r.im.abs() <= tol {
                continue;
            }
            match remaining
                .iter()
                .position(|c| (c - r.conj()).norm() <= tol * (1.0 + r.norm()))
            {
                Some(i) => {
                    remaining.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }

    /// Greedy nearest-pair matching of `targets` against this set. Returns
    /// for each target the index of the matched element; ties broken by
    /// smallest index. Errors when two unmatched candidates both lie within
    /// `tol` of one target (ambiguous) or a target has no candidate within
    /// `tol`.
    pub fn greedy_match(&self, targets: &[Complex64], tol: f64) -> Result<Vec<usize>> {
        let mut used = vec![false; self.roots.len()];
        let mut out = Vec::with_capacity(targets.len());
        for t in targets {
            let mut best: Option<(usize, f64)> = None;
            let mut close = 0usize;
            for (i, c) in self.roots.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (c - t).norm();
                if d <= tol {
                    close += 1;
                }
                match best {
                    Some((_, bd)) if d >= bd => {}
                    _ => best = Some((i, d)),
                }
            }
            let (idx, dist) = best.ok_or_else(|| {
                Error::AmbiguousMatch(format!("no candidates remain for target {t}"))
            })?;
            if close > 1 {
                return Err(Error::AmbiguousMatch(format!(
                    "{close} candidates within {tol:.2e} of target {t}"
                )));
            }
            if dist > tol {
                return Err(Error::AmbiguousMatch(format!(
                    "nearest candidate to target {t} is at distance {dist:.3e} > tol {tol:.2e}"
                )));
            }
            used[idx] = true;
            out.push(idx);
        }
        Ok(out)
    }

    /// Nearest-pair matching without a tolerance gate: every target is
    /// matched to its closest unused element.
    pub fn nearest_assign(&self, targets: &[Complex64]) -> Vec<usize> {
        let mut used = vec![false; self.roots.len()];
        let mut out = Vec::with_capacity(targets.len());
        for t in targets {
            let mut best: Option<(usize, f64)> = None;
            for (i, c) in self.roots.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (c - t).norm();
                match best {
                    Some((_, bd)) if d >= bd => {}
                    _ => best = Some((i, d)),
                }
            }
            if let Some((i, _)) = best {
                used[i] = true;
                out.push(i);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mul_difference_of_squares() {
        let a = Polynomial::new(vec![-1.0, 1.0]);
        let b = Polynomial::new(vec![1.0, 1.0]);
        let p = &a * &b;
        assert_eq!(p.coeffs(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn div_exact_simple() {
        let num = Polynomial::new(vec![-1.0, 0.0, 1.0]); // z^2 - 1
        let den = Polynomial::new(vec![-1.0, 1.0]); // z - 1
        let (q, r) = num.div_exact(&den, 1e-10).unwrap();
        assert_eq!(q.degree(), Some(1));
        assert_relative_eq!(q.coeff(0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(q.coeff(1), 1.0, epsilon = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn div_exact_latent_factor() {
        // (z - 2)(z + 1/3) / (z - 2) = z + 1/3
        let num = &Polynomial::new(vec![-2.0, 1.0]) * &Polynomial::new(vec![1.0 / 3.0, 1.0]);
        let den = Polynomial::new(vec![-2.0, 1.0]);
        let (q, r) = num.div_exact(&den, 1e-10).unwrap();
        assert_relative_eq!(q.coeff(0), 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(q.coeff(1), 1.0, epsilon = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn div_not_divisible_reports_residual() {
        let num = Polynomial::new(vec![1.0, 0.0, 1.0]); // z^2 + 1
        let den = Polynomial::new(vec![-1.0, 1.0]); // z - 1
        let (_, r) = num.div_exact(&den, 1e-10).unwrap();
        assert!(r > 0.5);
    }

    #[test]
    fn roots_quadratic() {
        let p = Polynomial::new(vec![2.0, -3.0, 1.0]); // z^2 - 3z + 2
        let rs = p.roots().unwrap();
        let mut re: Vec<f64> = rs.roots().iter().map(|c| c.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(re[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(re[1], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn roots_pure_imaginary() {
        let p = Polynomial::new(vec![1.0, 0.0, 1.0]); // z^2 + 1
        let rs = p.roots().unwrap();
        assert!(rs.is_conjugate_closed(1e-8));
        for r in rs.roots() {
            assert_relative_eq!(r.norm(), 1.0, epsilon = 1e-10);
            assert!(r.re.abs() < 1e-10);
        }
    }

    #[test]
    fn roots_of_cubic_product() {
        let p = Polynomial::from_roots(
            &[
                Complex64::new(0.9, 0.0),
                Complex64::new(-0.5, 0.0),
                Complex64::new(2.0, 0.0),
            ],
            1e-9,
        )
        .unwrap();
        let rs = p.roots().unwrap();
        let targets = [
            Complex64::new(0.9, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(2.0, 0.0),
        ];
        let idx = rs.greedy_match(&targets, 1e-8).unwrap();
        for (t, &i) in targets.iter().zip(&idx) {
            assert!((rs.roots()[i] - t).norm() < 1e-8);
        }
    }

    #[test]
    fn roots_degree_zero_errors() {
        assert!(matches!(Polynomial::one().roots(), Err(Error::EmptyRootSet)));
        assert!(matches!(Polynomial::zero().roots(), Err(Error::EmptyRootSet)));
    }

    #[test]
    fn residual_at_roots_is_small() {
        let p = Polynomial::new(vec![0.5, -1.2, 0.3, 1.0]);
        let rs = p.roots().unwrap();
        let norm = p.max_norm();
        for r in rs.roots() {
            assert!(p.eval_complex(*r).norm() <= 1e-6 * norm);
        }
    }

    #[test]
    fn trimming_drops_spurious_leading_coefficient() {
        let p = Polynomial::new(vec![1.0, 2.0, 1e-14]);
        assert_eq!(p.degree(), Some(1));
    }

    #[test]
    fn greedy_match_ambiguity() {
        let set = ComplexRootSet::new(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0001, 0.0)]);
        let r = set.greedy_match(&[Complex64::new(1.00005, 0.0)], 1e-3);
        assert!(matches!(r, Err(Error::AmbiguousMatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // roots of a polynomial built from known roots recover the roots
        #[test]
        fn roots_round_trip(res in proptest::collection::vec(-2.0f64..2.0, 1..6),
                            pairs in proptest::collection::vec((-1.5f64..1.5, 0.05f64..1.5), 0..3)) {
            let mut roots: Vec<Complex64> = res.iter().map(|&r| Complex64::new(r, 0.0)).collect();
            for (re, im) in &pairs {
                roots.push(Complex64::new(*re, *im));
                roots.push(Complex64::new(*re, -*im));
            }
            // keep roots separated so matching is well-posed
            let mut ok = true;
            for i in 0..roots.len() {
                for j in (i + 1)..roots.len() {
                    if (roots[i] - roots[j]).norm() < 5e-2 {
                        ok = false;
                    }
                }
            }
            prop_assume!(ok);
            let p = Polynomial::from_roots(&roots, 1e-9).unwrap();
            let rs = p.roots().unwrap();
            let idx = rs.greedy_match(&roots, 1e-6).unwrap();
            for (t, &i) in roots.iter().zip(&idx) {
                prop_assert!((rs.roots()[i] - t).norm() < 1e-6);
            }
        }

        // polynomial multiplication then exact division round-trips
        #[test]
        fn mul_div_round_trip(ac in proptest::collection::vec(-1.0f64..1.0, 2..5),
                              bc in proptest::collection::vec(-1.0f64..1.0, 2..5)) {
            let a = Polynomial::new(ac);
            let b = Polynomial::new(bc);
            prop_assume!(!a.is_zero() && !b.is_zero());
            prop_assume!(a.leading().abs() > 0.1 && b.leading().abs() > 0.1);
            let p = &a * &b;
            let (q, r) = p.div_exact(&b, 1e-8).unwrap();
            prop_assert!(r <= 1e-8 * p.max_norm().max(1.0));
            prop_assert!(q.sub(&a).max_norm() <= 1e-7 * a.max_norm().max(1.0));
        }
    }
}
