//! Dense real linear algebra and real polynomial arithmetic.
//!
//! Matrices are plain `nalgebra::DMatrix<f64>`. Everything here is a pure
//! function of its inputs; seeded random sources are passed explicitly.

mod poly;

pub use poly::{conv, ComplexRootSet, Polynomial};

use nalgebra::{DMatrix, DVector};
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Singular value decomposition `A = U diag(sigma) V^T` with singular
/// values in nonincreasing order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub sigma: Vector,
    pub v: Matrix,
}

impl SvdFactors {
    pub fn sigma_max(&self) -> f64 {
        if self.sigma.is_empty() {
            0.0
        } else {
            self.sigma[0]
        }
    }

    /// Smallest nonzero singular value, treating values below
    /// `rel_tol * sigma_max` as zero.
    pub fn sigma_min_nonzero(&self, rel_tol: f64) -> Option<f64> {
        let floor = rel_tol * self.sigma_max();
        self.sigma.iter().copied().filter(|s| *s > floor).last()
    }

    pub fn rank_at(&self, tau: f64) -> usize {
        self.sigma.iter().filter(|s| **s > tau).count()
    }
}

fn check_finite(a: &Matrix) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    Ok(())
}

fn reconstruction_ok(a: &Matrix, f: &SvdFactors) -> bool {
    let mut err = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let mut v = 0.0;
            for k in 0..f.sigma.len() {
                v += f.u[(i, k)] * f.sigma[k] * f.v[(j, k)];
            }
            err = err.max((v - a[(i, j)]).abs());
        }
    }
    err <= 1e-12 * f.sigma_max().max(1.0)
}

/// Thin SVD with singular values sorted in nonincreasing order. The QR
/// path is verified by reconstruction and falls back to a one-sided
/// Jacobi sweep, which it occasionally needs.
pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    check_finite(a)?;
    let decomp = a.clone().svd(true, true);
    let u = decomp.u.expect("svd requested u");
    let v_t = decomp.v_t.expect("svd requested v_t");
    let sigma = decomp.singular_values;

    // nalgebra sorts, but don't rely on it
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let k = sigma.len();
    let mut us = Matrix::zeros(u.nrows(), k);
    let mut vs = Matrix::zeros(v_t.ncols(), k);
    let mut ss = Vector::zeros(k);
    for (new, &old) in order.iter().enumerate() {
        us.set_column(new, &u.column(old));
        vs.set_column(new, &v_t.row(old).transpose());
        ss[new] = sigma[old];
    }
    let f = SvdFactors { u: us, sigma: ss, v: vs };
    if reconstruction_ok(a, &f) {
        return Ok(f);
    }
    let f = jacobi_svd(a);
    if !reconstruction_ok(a, &f) {
        return Err(Error::InvalidInput("singular value decomposition failed".into()));
    }
    Ok(f)
}

/// One-sided Jacobi SVD: orthogonalize the columns of the tall side by
/// plane rotations. Slower than the QR path but accurate at every scale.
fn jacobi_svd(a: &Matrix) -> SvdFactors {
    let transposed = a.nrows() < a.ncols();
    let mut b = if transposed { a.transpose() } else { a.clone() };
    let (m, n) = (b.nrows(), b.ncols());
    let mut v = Matrix::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    app += b[(i, p)] * b[(i, p)];
                    aqq += b[(i, q)] * b[(i, q)];
                    apq += b[(i, p)] * b[(i, q)];
                }
                if apq.abs() <= 1e-16 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = c * bip - s * biq;
                    b[(i, q)] = s * bip + c * biq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = Vector::zeros(n);
    for j in 0..n {
        sigma[j] = b.column(j).norm();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let smax = sigma[order[0]].max(1e-300);
    let mut uu = Matrix::zeros(m, n);
    let mut vv = Matrix::zeros(n, n);
    let mut ss = Vector::zeros(n);
    let mut kept = 0usize;
    for (new, &old) in order.iter().enumerate() {
        ss[new] = sigma[old];
        vv.set_column(new, &v.column(old));
        if sigma[old] > smax * 1e-250 {
            uu.set_column(new, &(b.column(old) / sigma[old]));
            kept = new + 1;
        }
    }
    if kept < n {
        // orthonormal completion for the exactly-zero directions
        let partial = uu.columns(0, kept).into_owned();
        let comp = orthogonal_complement(&partial, m);
        for j in kept..n {
            uu.set_column(j, &comp.column(j - kept));
        }
    }
    if transposed {
        SvdFactors { u: vv, sigma: ss, v: uu }
    } else {
        SvdFactors { u: uu, sigma: ss, v: vv }
    }
}

/// Conventional default truncation threshold
/// `max(rows, cols) * sigma_max * eps`.
pub fn default_tolerance(a: &Matrix) -> f64 {
    let smax = a
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(match svd(a) {
            Ok(f) => f.sigma_max(),
            Err(_) => 0.0,
        });
    a.nrows().max(a.ncols()) as f64 * smax * f64::EPSILON
}

/// Truncated Moore-Penrose inverse: singular values at or below `tau` are
/// discarded, the rest inverted.
pub fn pinv_truncated(a: &Matrix, tau: f64) -> Result<Matrix> {
    if tau < 0.0 {
        return Err(Error::InvalidInput("negative truncation tolerance".into()));
    }
    let f = svd(a)?;
    pinv_from_factors(&f, tau)
}

pub fn pinv_from_factors(f: &SvdFactors, tau: f64) -> Result<Matrix> {
    let kappa = f.rank_at(tau);
    let n = f.v.nrows();
    let m = f.u.nrows();
    let mut out = Matrix::zeros(n, m);
    for i in 0..kappa {
        let vi = f.v.column(i);
        let ui = f.u.column(i);
        // out += v_i u_i^T / sigma_i
        out.ger(1.0 / f.sigma[i], &vi, &ui, 1.0);
    }
    Ok(out)
}

/// Seeded random generalized inverse `G` with `A G A = A`, built from the
/// full SVD by filling the free blocks with standard normal draws.
pub fn random_generalized_inverse(a: &Matrix, seed: u64) -> Result<Matrix> {
    let f = svd(a)?;
    let tau = default_tolerance(a);
    let r = f.rank_at(tau);
    let (m, n) = (a.nrows(), a.ncols());

    let u1 = f.u.columns(0, r).into_owned();
    let v1 = f.v.columns(0, r).into_owned();
    let u2 = orthogonal_complement(&u1, m);
    let v2 = orthogonal_complement(&v1, n);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut draw = |rows: usize, cols: usize| {
        Matrix::from_fn(rows, cols, |_, _| normal.sample(&mut rng))
    };
    let x = draw(r, m - r);
    let y = draw(n - r, r);
    let z = draw(n - r, m - r);

    let mut sinv_u1t = Matrix::zeros(r, m);
    for i in 0..r {
        sinv_u1t.row_mut(i).copy_from(&(f.u.column(i).transpose() / f.sigma[i]));
    }
    let mut g = &v1 * sinv_u1t;
    if m > r {
        g += &v1 * x * u2.transpose();
    }
    if n > r {
        g += &v2 * y * u1.transpose();
        if m > r {
            g += &v2 * z * u2.transpose();
        }
    }
    Ok(g)
}

/// Orthonormal basis of the complement of the column span of `basis`
/// inside R^dim. `basis` must have orthonormal columns.
fn orthogonal_complement(basis: &Matrix, dim: usize) -> Matrix {
    let r = basis.ncols();
    let mut cols: Vec<Vector> = Vec::with_capacity(dim - r);
    for j in 0..dim {
        if cols.len() == dim - r {
            break;
        }
        let mut v = Vector::zeros(dim);
        v[j] = 1.0;
        // two rounds of Gram-Schmidt for orthogonality at machine precision
        for _ in 0..2 {
            for k in 0..r {
                let b = basis.column(k);
                let proj = b.dot(&v);
                v -= proj * Vector::from_column_slice(b.as_slice());
            }
            for w in &cols {
                let proj = w.dot(&v);
                v -= proj * w.clone();
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            cols.push(v / nrm);
        }
    }
    let mut out = Matrix::zeros(dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Least-norm solution of `A x = b`; errors if `b` is not in the image of
/// `A` (relative residual above 1e-8).
pub fn least_norm_solution(a: &Matrix, b: &Vector) -> Result<Vector> {
    check_finite(a)?;
    let pinv = pinv_truncated(a, default_tolerance(a))?;
    let x = &pinv * b;
    let resid = (a * &x - b).norm();
    let scale = b.norm().max(1e-300);
    if resid / scale > 1e-8 && resid > 1e-12 {
        return Err(Error::Inconsistent { residual: resid / scale });
    }
    Ok(x)
}

/// Parlett-Reinsch balancing: diagonal similarity with powers of two that
/// equalizes row/column norms. Improves eigenvalue accuracy.
fn balance(a: &mut Matrix) {
    let n = a.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
            let mut r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if c + r < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a square real matrix.
pub fn eigvals(a: &Matrix) -> Result<ComplexRootSet> {
    check_finite(a)?;
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("eigvals requires a square matrix".into()));
    }
    let mut b = a.clone();
    balance(&mut b);
    let ev = b.complex_eigenvalues();
    Ok(ComplexRootSet::new(ev.iter().copied().collect()))
}

pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigvals(a)?.max_modulus())
}

/// Solve the discrete Lyapunov equation `P = A P A^T + Q` by doubled
/// fixed-point summation. Requires `A` Schur stable and `Q` symmetric.
pub fn solve_dlyap(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    check_finite(a)?;
    check_finite(q)?;
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::InvalidInput("dlyap dimension mismatch".into()));
    }
    let rho = spectral_radius(a)?;
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    // P = sum_k A^k Q (A^T)^k accumulated with squaring
    let mut p = q.clone();
    let mut s = a.clone();
    for _ in 0..120 {
        let term = &s * &p * s.transpose();
        let tnorm = term.norm();
        p += term;
        if tnorm <= 1e-300 || tnorm <= 1e-18 * p.norm() {
            break;
        }
        s = &s * &s;
    }
    // symmetrize
    let p = (&p + p.transpose()) * 0.5;
    Ok(p)
}

/// Smallest singular value of the complex matrix `Re + i Im` computed via
/// its real embedding (each complex singular value appears twice).
pub fn sigma_min_complex(re: &Matrix, im: &Matrix) -> Result<f64> {
    let (m, n) = (re.nrows(), re.ncols());
    let mut emb = Matrix::zeros(2 * m, 2 * n);
    emb.view_mut((0, 0), (m, n)).copy_from(re);
    emb.view_mut((0, n), (m, n)).copy_from(&(-im));
    emb.view_mut((m, 0), (m, n)).copy_from(im);
    emb.view_mut((m, n), (m, n)).copy_from(re);
    let f = svd(&emb)?;
    Ok(f.sigma[f.sigma.len() - 1])
}

/// Largest singular value of the complex matrix `Re + i Im`.
pub fn sigma_max_complex(re: &Matrix, im: &Matrix) -> Result<f64> {
    let (m, n) = (re.nrows(), re.ncols());
    let mut emb = Matrix::zeros(2 * m, 2 * n);
    emb.view_mut((0, 0), (m, n)).copy_from(re);
    emb.view_mut((0, n), (m, n)).copy_from(&(-im));
    emb.view_mut((m, 0), (m, n)).copy_from(im);
    emb.view_mut((m, n), (m, n)).copy_from(re);
    let f = svd(&emb)?;
    Ok(f.sigma_max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn rand_matrix(rng: &mut ChaCha12Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn svd_identity() {
        let f = svd(&Matrix::identity(2, 2)).unwrap();
        assert_relative_eq!(f.sigma[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.sigma[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_diag() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 0.0]));
        let f = svd(&a).unwrap();
        assert_relative_eq!(f.sigma[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(f.sigma[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_reconstruction() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let a = rand_matrix(&mut rng, 5, 3);
        let f = svd(&a).unwrap();
        let rec = &f.u * Matrix::from_diagonal(&f.sigma) * f.v.transpose();
        assert!((rec - &a).norm() <= 1e-12 * f.sigma_max().max(1.0));
        // orthonormal columns
        assert!((f.u.transpose() * &f.u - Matrix::identity(3, 3)).norm() < 1e-10);
        assert!((f.v.transpose() * &f.v - Matrix::identity(3, 3)).norm() < 1e-10);
        // nonincreasing
        for i in 1..f.sigma.len() {
            assert!(f.sigma[i] <= f.sigma[i - 1] + 1e-15);
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let a = Matrix::from_vec(1, 2, vec![1.0, f64::NAN]);
        assert!(matches!(svd(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pinv_identity_and_diag() {
        let p = pinv_truncated(&Matrix::identity(2, 2), 1e-12).unwrap();
        assert!((p - Matrix::identity(2, 2)).norm() < 1e-12);

        let a = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 0.0]));
        let p = pinv_truncated(&a, 1e-12).unwrap();
        assert_relative_eq!(p[(0, 0)], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(p[(1, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pinv_rank_one_symmetric() {
        let a = Matrix::from_element(2, 2, 1.0);
        let p = pinv_truncated(&a, 1e-12).unwrap();
        for e in p.iter() {
            assert_relative_eq!(*e, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn pinv_penrose_identities() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = rand_matrix(&mut rng, 6, 4);
            let g = pinv_truncated(&a, 1e-13).unwrap();
            let aga = &a * &g * &a;
            let gag = &g * &a * &g;
            assert!((aga - &a).norm() < 1e-10);
            assert!((gag - &g).norm() < 1e-10);
            let ag = &a * &g;
            let ga = &g * &a;
            assert!((ag.transpose() - &ag).norm() < 1e-10);
            assert!((ga.transpose() - &ga).norm() < 1e-10);
        }
    }

    #[test]
    fn pinv_truncation_rank() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![5.0, 1.0, 1e-9]));
        let f = svd(&a).unwrap();
        assert_eq!(f.rank_at(1e-6), 2);
        let p = pinv_truncated(&a, 1e-6).unwrap();
        let pf = svd(&p).unwrap();
        assert_eq!(pf.rank_at(1e-12), 2);
    }

    #[test]
    fn default_tolerance_values() {
        assert_relative_eq!(
            default_tolerance(&Matrix::identity(3, 3)),
            3.0 * f64::EPSILON,
            epsilon = 1e-30
        );
        assert_eq!(default_tolerance(&Matrix::zeros(2, 2)), 0.0);
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![10.0, 1.0]));
        assert_relative_eq!(default_tolerance(&a), 20.0 * f64::EPSILON, epsilon = 1e-28);
    }

    #[test]
    fn ginverse_invertible_case() {
        let g = random_generalized_inverse(&Matrix::identity(2, 2), 3).unwrap();
        assert!((g - Matrix::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn ginverse_property_and_determinism() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        let g1 = random_generalized_inverse(&a, 42).unwrap();
        let g2 = random_generalized_inverse(&a, 42).unwrap();
        assert_eq!(g1, g2);
        let aga = &a * &g1 * &a;
        assert!((aga - &a).norm() <= 1e-8);
        let g3 = random_generalized_inverse(&a, 43).unwrap();
        assert!((g3 - &g1).norm() > 1e-8);
    }

    #[test]
    fn ginverse_rectangular() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = rand_matrix(&mut rng, 3, 7);
        let g = random_generalized_inverse(&a, 11).unwrap();
        let f = svd(&a).unwrap();
        assert!((&a * &g * &a - &a).norm() <= 1e-8 * f.sigma_max());
    }

    #[test]
    fn least_norm_identity() {
        let b = Vector::from_vec(vec![1.0, -2.0]);
        let x = least_norm_solution(&Matrix::identity(2, 2), &b).unwrap();
        assert!((x - b).norm() < 1e-12);
    }

    #[test]
    fn least_norm_underdetermined() {
        let a = Matrix::from_vec(1, 2, vec![1.0, 1.0]);
        let b = Vector::from_vec(vec![2.0]);
        let x = least_norm_solution(&a, &b).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn least_norm_matches_normal_equations() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let a = rand_matrix(&mut rng, 3, 6);
        let x0 = Vector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
        let b = &a * x0;
        let x = least_norm_solution(&a, &b).unwrap();
        // least-norm solution via normal equations on A^T: x = A^T (A A^T)^{-1} b
        let aat = &a * a.transpose();
        let z = aat.lu().solve(&b).unwrap();
        let xref = a.transpose() * z;
        assert!((x - &xref).norm() < 1e-10 * xref.norm().max(1.0));
    }

    #[test]
    fn least_norm_orthogonal_to_kernel() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let a = rand_matrix(&mut rng, 2, 5);
        let b = &a * Vector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
        let x = least_norm_solution(&a, &b).unwrap();
        let f = svd(&a).unwrap();
        let kernel = orthogonal_complement(&f.v, 5);
        assert_eq!(kernel.ncols(), 3);
        for i in 0..kernel.ncols() {
            let k = kernel.column(i).into_owned();
            assert!((&a * &k).norm() < 1e-10);
            assert!(x.dot(&k).abs() < 1e-10 * x.norm().max(1.0));
        }
    }

    #[test]
    fn least_norm_inconsistent() {
        let a = Matrix::from_vec(2, 1, vec![1.0, 0.0]);
        let b = Vector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(
            least_norm_solution(&a, &b),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn dlyap_zero_a() {
        let q = Matrix::from_vec(2, 2, vec![2.0, 0.5, 0.5, 1.0]);
        let p = solve_dlyap(&Matrix::zeros(2, 2), &q).unwrap();
        assert!((p - &q).norm() < 1e-14);
    }

    #[test]
    fn dlyap_scalar_geometric() {
        let a = Matrix::from_element(1, 1, 0.5);
        let q = Matrix::identity(1, 1);
        let p = solve_dlyap(&a, &q).unwrap();
        assert_relative_eq!(p[(0, 0)], 1.0 / (1.0 - 0.25), epsilon = 1e-12);
    }

    #[test]
    fn dlyap_residual_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut a = rand_matrix(&mut rng, 3, 3);
        let rho = spectral_radius(&a).unwrap();
        a *= 0.8 / rho;
        let m = rand_matrix(&mut rng, 3, 3);
        let q = &m * m.transpose();
        let p = solve_dlyap(&a, &q).unwrap();
        let resid = (&p - &a * &p * a.transpose() - &q).norm();
        assert!(resid <= 1e-8 * q.norm());
    }

    #[test]
    fn dlyap_unstable_errors() {
        let a = Matrix::from_element(1, 1, 1.1);
        assert!(matches!(
            solve_dlyap(&a, &Matrix::identity(1, 1)),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn eigvals_companion_cross_check() {
        // matrix with known spectrum {2, -1, 0.5}
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, -1.0, 0.5]));
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let t = rand_matrix(&mut rng, 3, 3);
        let a = &t * d * t.lu().try_inverse().unwrap();
        let ev = eigvals(&a).unwrap();
        let mut mods: Vec<f64> = ev.roots().iter().map(|c| c.norm()).collect();
        mods.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_relative_eq!(mods[0], 0.5, epsilon = 1e-8);
        assert_relative_eq!(mods[1], 1.0, epsilon = 1e-8);
        assert_relative_eq!(mods[2], 2.0, epsilon = 1e-8);
    }

    #[test]
    fn sigma_min_complex_matches_real_case() {
        let a = Matrix::from_vec(2, 2, vec![3.0, 0.0, 0.0, 0.5]);
        let s = sigma_min_complex(&a, &Matrix::zeros(2, 2)).unwrap();
        assert_relative_eq!(s, 0.5, epsilon = 1e-12);
    }
}
