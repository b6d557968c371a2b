//! Independent optimization oracle for the latent polynomial: the
//! coefficient-energy cost over monic cofactors, its closed-form
//! minimizers for degrees one and two, and the general least-squares
//! minimizer. Used to cross-check the latent factors extracted from data.

use crate::error::{Error, Result};
use crate::matpoly::{conv, Matrix, Polynomial, Vector};

/// Convolution (Toeplitz) machinery for one cost instance: the stacked
/// shift columns of `p` and of each entry of `q`, plus the Gram scalars
/// used by the closed-form minimizers.
#[derive(Debug, Clone)]
pub struct ToeplitzStack {
    /// Stacked convolution matrix; column j holds the coefficients of
    /// `z^j * p` over all entries `[p; q_1; ...; q_m]`, width `tau + 1`.
    pub conv: Matrix,
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl ToeplitzStack {
    /// Build the width-(tau+1) stack for monic `p` and the row `q`.
    pub fn new(p: &Polynomial, q: &[Polynomial], tau: usize) -> Result<Self> {
        if !p.is_monic(1e-9) {
            return Err(Error::InvalidInput("p must be monic".into()));
        }
        let np = p.degree().unwrap_or(0);
        let nq = q.iter().filter_map(|e| e.degree()).max().unwrap_or(0);
        let rows_p = np + tau + 1;
        let rows_q = nq + tau + 1;
        let width = tau + 1;
        let mut conv_m = Matrix::zeros(rows_p + q.len() * rows_q, width);
        for j in 0..width {
            for (k, &c) in p.coeffs().iter().enumerate() {
                conv_m[(j + k, j)] = c;
            }
            for (e, qe) in q.iter().enumerate() {
                for (k, &c) in qe.coeffs().iter().enumerate() {
                    conv_m[(rows_p + e * rows_q + j + k, j)] = c;
                }
            }
        }
        let col = |j: usize| conv_m.column(j);
        let theta0 = col(0).dot(&col(0));
        let theta1 = if width > 1 { col(0).dot(&col(1)) } else { 0.0 };
        let theta2 = if width > 2 { col(0).dot(&col(2)) } else { 0.0 };
        Ok(ToeplitzStack {
            conv: conv_m,
            theta0,
            theta1,
            theta2,
        })
    }
}

/// A monic minimizer of the coefficient-energy cost together with the
/// attained cost value.
#[derive(Debug, Clone)]
pub struct MonicMinimizer {
    pub poly: Polynomial,
    pub cost: f64,
}

/// Coefficient-energy cost of the monic cofactor `r` against the monic
/// polynomial `p` and the polynomial row `q`: the squared norm of all
/// coefficients of `r*q` plus those of `r*p` with the leading one removed.
pub fn cost_f(r: &Polynomial, p: &Polynomial, q: &[Polynomial]) -> Result<f64> {
    if !r.is_monic(1e-9) || !p.is_monic(1e-9) {
        return Err(Error::InvalidInput("r and p must be monic".into()));
    }
    let rp = r * p;
    let mut acc = -1.0; // remove the monic leading coefficient of r*p
    for c in rp.coeffs() {
        acc += c * c;
    }
    for qe in q {
        if qe.is_zero() {
            continue;
        }
        for c in conv(r.coeffs(), qe.coeffs()) {
            acc += c * c;
        }
    }
    Ok(acc)
}

/// Closed-form minimizer of the degree-one cofactor `z + lambda`.
/// Always satisfies `|lambda| < 1`.
pub fn minimize_lambda(p: &Polynomial, q: &[Polynomial]) -> Result<f64> {
    let t = ToeplitzStack::new(p, q, 1)?;
    Ok(-t.theta1 / t.theta0)
}

/// Closed-form minimizer of the degree-two cofactor `z^2 + phi z + psi`.
/// Always satisfies `psi < 1`.
pub fn minimize_phi_psi(p: &Polynomial, q: &[Polynomial]) -> Result<(f64, f64)> {
    let t = ToeplitzStack::new(p, q, 2)?;
    let det = t.theta0 * t.theta0 - t.theta1 * t.theta1;
    let phi = (t.theta1 * t.theta2 - t.theta0 * t.theta1) / det;
    let psi = (t.theta1 * t.theta1 - t.theta0 * t.theta2) / det;
    Ok((phi, psi))
}

/// General minimizer over monic cofactors of degree `tau`: the cost is a
/// positive-definite quadratic in the free coefficients, solved by normal
/// equations with a QR fallback on ill conditioning.
pub fn minimize_cstar(p: &Polynomial, q: &[Polynomial], tau: usize) -> Result<MonicMinimizer> {
    if tau == 0 {
        let r = Polynomial::one();
        let cost = cost_f(&r, p, q)?;
        return Ok(MonicMinimizer { poly: r, cost });
    }
    let t = ToeplitzStack::new(p, q, tau)?;
    let free = t.conv.columns(0, tau).into_owned();
    let last = t.conv.column(tau).into_owned();
    let gram = free.transpose() * &free;
    let rhs = -free.transpose() * &last;

    let sol = nalgebra::linalg::Cholesky::new(gram.clone()).and_then(|chol| {
        let x = chol.solve(&rhs);
        if (&gram * &x - &rhs).norm() <= 1e-8 * rhs.norm().max(1.0) {
            Some(x)
        } else {
            None
        }
    });
    let x = match sol {
        Some(x) => x,
        None => qr_least_squares(&free, &(-&last))?,
    };

    let mut coeffs: Vec<f64> = x.iter().copied().collect();
    coeffs.push(1.0);
    let poly = Polynomial::new(coeffs);
    let cost = cost_f(&poly, p, q)?;
    Ok(MonicMinimizer { poly, cost })
}

fn qr_least_squares(a: &Matrix, b: &Vector) -> Result<Vector> {
    let qr = a.clone().qr();
    let mut rhs = b.clone();
    qr.q_tr_mul(&mut rhs);
    let r = qr.r();
    r.solve_upper_triangular(&rhs.rows(0, a.ncols()).into_owned())
        .ok_or_else(|| Error::InvalidInput("rank-deficient least squares".into()))
}

/// Minimizer for the inversion problem: the roles of numerator and
/// denominator swap after normalizing by the leading numerator
/// coefficient `rho`.
pub fn minimize_cstar_inverse(
    num: &Polynomial,
    den: &Polynomial,
    rho: f64,
    tau: usize,
) -> Result<MonicMinimizer> {
    if rho == 0.0 || !rho.is_finite() {
        return Err(Error::InvalidInput("leading numerator coefficient is zero".into()));
    }
    let p = num.scale(1.0 / rho);
    if !p.is_monic(1e-7) {
        return Err(Error::InvalidInput(
            "numerator over rho is not monic; wrong rho or relative degree".into(),
        ));
    }
    let q = vec![den.scale(1.0 / rho)];
    minimize_cstar(&p, &q, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn cost_direct_expansion() {
        let c = cost_f(&Polynomial::one(), &poly(&[-0.5, 1.0]), &[Polynomial::one()]).unwrap();
        assert_relative_eq!(c, 1.25, epsilon = 1e-14);
    }

    #[test]
    fn cost_hand_expanded_quadratic() {
        // r = z + lambda, p = z - 2, q = 1 gives 6 lambda^2 - 4 lambda + 5
        for lambda in [-1.0, -0.3, 0.0, 1.0 / 3.0, 0.8] {
            let r = poly(&[lambda, 1.0]);
            let c = cost_f(&r, &poly(&[-2.0, 1.0]), &[Polynomial::one()]).unwrap();
            assert_relative_eq!(
                c,
                6.0 * lambda * lambda - 4.0 * lambda + 5.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn cost_scales_quadratically_in_q() {
        let r = poly(&[0.3, 1.0]);
        let p = poly(&[-0.5, 0.2, 1.0]);
        let base = cost_f(&r, &p, &[]).unwrap();
        let c1 = cost_f(&r, &p, &[poly(&[1.0, -0.7])]).unwrap() - base;
        let c3 = cost_f(&r, &p, &[poly(&[3.0, -2.1])]).unwrap() - base;
        assert_relative_eq!(c3, 9.0 * c1, epsilon = 1e-10);
    }

    #[test]
    fn lambda_symmetric_case() {
        let l = minimize_lambda(&poly(&[0.0, 1.0]), &[Polynomial::one()]).unwrap();
        assert_relative_eq!(l, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn lambda_for_unstable_pole() {
        let l = minimize_lambda(&poly(&[-2.0, 1.0]), &[Polynomial::one()]).unwrap();
        assert_relative_eq!(l, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_always_inside_unit_interval() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..200 {
            let deg = rng.gen_range(1..6);
            let mut pc: Vec<f64> = (0..deg).map(|_| rng.gen_range(-2.0..2.0)).collect();
            pc.push(1.0);
            let qdeg = rng.gen_range(0..=deg);
            let qc: Vec<f64> = (0..=qdeg).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let l = minimize_lambda(&poly(&pc), &[poly(&qc)]).unwrap();
            assert!(l.abs() < 1.0, "lambda {l}");
        }
    }

    #[test]
    fn phi_psi_matches_general_solver() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        for _ in 0..50 {
            let deg = rng.gen_range(1..5);
            let mut pc: Vec<f64> = (0..deg).map(|_| rng.gen_range(-1.5..1.5)).collect();
            pc.push(1.0);
            let qc: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let p = poly(&pc);
            let q = vec![poly(&qc)];
            let (phi, psi) = minimize_phi_psi(&p, &q).unwrap();
            assert!(psi < 1.0);
            let general = minimize_cstar(&p, &q, 2).unwrap();
            assert_relative_eq!(general.poly.coeff(1), phi, epsilon = 1e-10);
            assert_relative_eq!(general.poly.coeff(0), psi, epsilon = 1e-10);
            let l = minimize_lambda(&p, &q).unwrap();
            let g1 = minimize_cstar(&p, &q, 1).unwrap();
            assert_relative_eq!(g1.poly.coeff(0), l, epsilon = 1e-10);
        }
    }

    #[test]
    fn phi_vanishes_for_even_instance() {
        // even p and q zero the odd Gram scalar, so the quadratic is
        // symmetric in phi
        let p = poly(&[0.3, 0.0, 1.0]);
        let q = vec![poly(&[0.5, 0.0, 0.7])];
        let (phi, _) = minimize_phi_psi(&p, &q).unwrap();
        assert_relative_eq!(phi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cstar_degree_zero_is_one() {
        let m = minimize_cstar(&poly(&[-0.5, 1.0]), &[Polynomial::one()], 0).unwrap();
        assert_eq!(m.poly.coeffs(), &[1.0]);
    }

    #[test]
    fn cstar_closed_form_case() {
        let m = minimize_cstar(&poly(&[-2.0, 1.0]), &[Polynomial::one()], 1).unwrap();
        assert_relative_eq!(m.poly.coeff(0), 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(m.cost, 6.0 / 9.0 - 4.0 / 3.0 + 5.0, epsilon = 1e-12);
    }

    #[test]
    fn cstar_attained_cost_matches() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..20 {
            let deg = rng.gen_range(1..5);
            let mut pc: Vec<f64> = (0..deg).map(|_| rng.gen_range(-1.5..1.5)).collect();
            pc.push(1.0);
            let qc: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let tau = rng.gen_range(0..5);
            let m = minimize_cstar(&poly(&pc), &[poly(&qc)], tau).unwrap();
            let direct = cost_f(&m.poly, &poly(&pc), &[poly(&qc)]).unwrap();
            assert_relative_eq!(m.cost, direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn cstar_beats_grid_search() {
        // refined dense grid over [-3,3]^2 as a brute-force oracle
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..20 {
            let deg = rng.gen_range(1..4);
            let mut pc: Vec<f64> = (0..deg).map(|_| rng.gen_range(-1.5..1.5)).collect();
            pc.push(1.0);
            let qc: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let p = poly(&pc);
            let q = vec![poly(&qc)];
            let m = minimize_cstar(&p, &q, 2).unwrap();

            let mut best = (f64::INFINITY, 0.0, 0.0);
            let mut center = (0.0f64, 0.0f64);
            let mut half = 3.0f64;
            while half > 1e-4 {
                let steps = 12;
                for i in 0..=steps {
                    for j in 0..=steps {
                        let phi = center.0 - half + 2.0 * half * i as f64 / steps as f64;
                        let psi = center.1 - half + 2.0 * half * j as f64 / steps as f64;
                        let c = cost_f(&poly(&[psi, phi, 1.0]), &p, &q).unwrap();
                        if c < best.0 {
                            best = (c, phi, psi);
                        }
                    }
                }
                center = (best.1, best.2);
                half /= 4.0;
            }
            assert!(m.cost <= best.0 + 1e-8, "solver {} vs grid {}", m.cost, best.0);
            assert_relative_eq!(m.poly.coeff(1), best.1, epsilon = 2e-4);
            assert_relative_eq!(m.poly.coeff(0), best.2, epsilon = 2e-4);
        }
    }

    #[test]
    fn cstar_roots_always_schur_stable() {
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        for _ in 0..500 {
            let deg = rng.gen_range(1..5);
            // p built from roots in the disk of radius 2
            let mut p = Polynomial::one();
            let mut left = deg;
            while left > 0 {
                if left >= 2 && rng.gen_bool(0.5) {
                    let re = rng.gen_range(-1.4..1.4);
                    let im = rng.gen_range(0.05..1.4);
                    p = &p * &poly(&[re * re + im * im, -2.0 * re, 1.0]);
                    left -= 2;
                } else {
                    let r = rng.gen_range(-2.0..2.0);
                    p = &p * &poly(&[-r, 1.0]);
                    left -= 1;
                }
            }
            let m_inputs = rng.gen_range(1..3);
            let q: Vec<Polynomial> = (0..m_inputs)
                .map(|_| {
                    let qdeg = rng.gen_range(0..=deg);
                    poly(&(0..=qdeg).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>())
                })
                .collect();
            let tau = rng.gen_range(1..7);
            let m = minimize_cstar(&p, &q, tau).unwrap();
            let roots = m.poly.roots().unwrap();
            assert!(
                roots.max_modulus() <= 1.0 - 1e-6,
                "unstable cofactor root modulus {}",
                roots.max_modulus()
            );
        }
    }

    #[test]
    fn factor_reduction_identity() {
        // pulling a real root out of r moves it into p and q
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        for _ in 0..50 {
            let deg = rng.gen_range(1..4);
            let mut pc: Vec<f64> = (0..deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            pc.push(1.0);
            let p = poly(&pc);
            let q = vec![poly(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])];
            let lambda: f64 = rng.gen_range(-0.9..0.9);
            let r1 = poly(&[rng.gen_range(-0.5..0.5), 1.0]);
            let r = &r1 * &poly(&[-lambda, 1.0]);
            let lhs = cost_f(&r, &p, &q).unwrap();
            let rhs = cost_f(&poly(&[-lambda, 1.0]), &(&r1 * &p), &[&r1 * &q[0]]).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn inverse_variant_first_order() {
        // numerator 1, denominator z - 0.5: minimize 2.25 l^2 - l + 1.25
        let m = minimize_cstar_inverse(&Polynomial::one(), &poly(&[-0.5, 1.0]), 1.0, 1).unwrap();
        assert_relative_eq!(m.poly.coeff(0), 2.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_variant_degree_zero() {
        let m = minimize_cstar_inverse(&Polynomial::one(), &poly(&[-0.5, 1.0]), 1.0, 0).unwrap();
        assert_eq!(m.poly.coeffs(), &[1.0]);
    }

    #[test]
    fn inverse_variant_rejects_zero_rho() {
        assert!(minimize_cstar_inverse(&Polynomial::one(), &poly(&[-0.5, 1.0]), 0.0, 1).is_err());
    }
}
