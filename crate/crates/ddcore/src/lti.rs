//! State-space plant models, ZOH discretization, simulation, per-output
//! transfer rows and structural indices. Includes the benchmark plants.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matpoly::{self, ComplexRootSet, Matrix, Polynomial, Vector};

/// Discrete- or continuous-time state-space model `(A, B, C, D)`.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n {
            return Err(Error::InvalidInput("state dimension mismatch".into()));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::InvalidInput("feedthrough dimension mismatch".into()));
        }
        for m in [&a, &b, &c, &d] {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite model entry".into()));
            }
        }
        Ok(StateSpace { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Markov parameter: `D` for k = 0, `C A^(k-1) B` for k >= 1.
    pub fn markov(&self, k: usize) -> Matrix {
        if k == 0 {
            return self.d.clone();
        }
        let mut ak = Matrix::identity(self.order(), self.order());
        for _ in 0..k - 1 {
            ak = &ak * &self.a;
        }
        &self.c * ak * &self.b
    }
}

/// One output row of the transfer function matrix: monic denominator and a
/// numerator polynomial per input, coprime after pole-zero cancellation.
#[derive(Debug, Clone)]
pub struct TransferRow {
    pub den: Polynomial,
    pub num: Vec<Polynomial>,
}

impl TransferRow {
    /// Minimal order of this row.
    pub fn order(&self) -> usize {
        self.den.degree().unwrap_or(0)
    }

    /// Relative degree: denominator degree minus the largest numerator degree.
    pub fn relative_degree(&self) -> usize {
        let nd = self.num.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
        self.order().saturating_sub(nd)
    }

    /// First `count` Markov parameters of the row (impulse response terms),
    /// starting at the direct feedthrough.
    pub fn markov(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.order();
        let m = self.num.len();
        let a: Vec<f64> = (0..n).map(|k| -self.den.coeff(k)).collect();
        let mut out = vec![vec![0.0; m]; count];
        for (j, numj) in self.num.iter().enumerate() {
            let b: Vec<f64> = (0..=n).map(|k| numj.coeff(k)).collect();
            let mut y = vec![0.0f64; count];
            for t in 0..count {
                // unit impulse at time 0: u(t-n+k) = 1 iff k = n-t
                let mut v = if t <= n { b[n - t] } else { 0.0 };
                for (k, ak) in a.iter().enumerate() {
                    let idx = t as isize - n as isize + k as isize;
                    if idx >= 0 {
                        v += ak * y[idx as usize];
                    }
                }
                y[t] = v;
            }
            for t in 0..count {
                out[t][j] = y[t];
            }
        }
        out
    }
}

/// Structural indices of a plant.
#[derive(Debug, Clone)]
pub struct SystemStructure {
    pub minimal_order: usize,
    /// Observability index of a minimal realization.
    pub lag: usize,
    pub row_orders: Vec<usize>,
    pub relative_degrees: Vec<usize>,
}

impl SystemStructure {
    pub fn siso_relative_degree(&self) -> usize {
        self.relative_degrees[0]
    }
}

/// Exact recursion `x(t+1) = A x(t) + B u(t)`, `y(t) = C x(t) + D u(t)`.
/// `u` is an `m x T` input matrix; returns the `p x T` output matrix.
pub fn simulate(ss: &StateSpace, x0: &Vector, u: &Matrix) -> Result<Matrix> {
    if x0.len() != ss.order() || u.nrows() != ss.n_inputs() {
        return Err(Error::InvalidInput("simulate dimension mismatch".into()));
    }
    let steps = u.ncols();
    let mut y = Matrix::zeros(ss.n_outputs(), steps);
    let mut x = x0.clone();
    for t in 0..steps {
        let ut = u.column(t);
        y.set_column(t, &(&ss.c * &x + &ss.d * ut));
        x = &ss.a * x + &ss.b * ut;
    }
    Ok(y)
}

/// Matrix exponential by scaling-and-squaring, Taylor series truncated at
/// relative term size 1e-16.
fn expm(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let norm = m.iter().fold(0.0f64, |a, x| a.max(x.abs())) * n as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2f64.powi(s as i32);
    let mut sum = Matrix::identity(n, n);
    let mut term = Matrix::identity(n, n);
    for k in 1..200 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.norm() <= 1e-16 * sum.norm() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Zero-order-hold discretization of `(Ac, Bc)` at sampling period `ts`
/// via the augmented-matrix exponential.
pub fn zoh_discretize(ac: &Matrix, bc: &Matrix, ts: f64) -> Result<(Matrix, Matrix)> {
    if ts <= 0.0 {
        return Err(Error::InvalidInput("sampling period must be positive".into()));
    }
    let n = ac.nrows();
    let m = bc.ncols();
    if ac.ncols() != n || bc.nrows() != n {
        return Err(Error::InvalidInput("zoh dimension mismatch".into()));
    }
    let mut aug = Matrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(ac * ts));
    aug.view_mut((0, n), (n, m)).copy_from(&(bc * ts));
    let e = expm(&aug);
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    ))
}

/// Discretize a continuous plant; `C` and `D` carry over unchanged.
pub fn zoh_plant(ss: &StateSpace, ts: f64) -> Result<StateSpace> {
    let (a, b) = zoh_discretize(&ss.a, &ss.b, ts)?;
    StateSpace::new(a, b, ss.c.clone(), ss.d.clone())
}

/// Characteristic polynomial (ascending) and adjugate expansion of
/// `zI - A` via the Faddeev-LeVerrier recursion:
/// `adj(zI - A) = sum_k z^k M_k`.
fn faddeev_leverrier(a: &Matrix) -> (Polynomial, Vec<Matrix>) {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut adj = vec![Matrix::zeros(n, n); n];
    let mut mk = Matrix::identity(n, n);
    for k in 1..=n {
        adj[n - k] = mk.clone();
        let am = a * &mk;
        let c = -am.trace() / k as f64;
        coeffs[n - k] = c;
        mk = am + Matrix::identity(n, n) * c;
    }
    (Polynomial::new(coeffs), adj)
}

/// Per-output transfer rows with pole-zero cancellation by root matching
/// at tolerance `cancel_tol`. Near-cancellations are the central numerical
/// hazard here, hence the configurable tolerance.
pub fn tf_rows_with_tol(ss: &StateSpace, cancel_tol: f64) -> Result<Vec<TransferRow>> {
    let (den, adj) = faddeev_leverrier(&ss.a);
    let p = ss.n_outputs();
    let m = ss.n_inputs();
    let nprime = ss.order();

    let mut rows = Vec::with_capacity(p);
    for i in 0..p {
        let ci = ss.c.row(i).into_owned();
        let mut nums = Vec::with_capacity(m);
        for j in 0..m {
            let bj = ss.b.column(j).into_owned();
            let mut coeffs = vec![0.0; nprime + 1];
            for (k, mk) in adj.iter().enumerate() {
                coeffs[k] = (&ci * mk * &bj)[(0, 0)];
            }
            let mut num = Polynomial::new(coeffs);
            let dij = ss.d[(i, j)];
            if dij != 0.0 {
                num = num.add(&den.scale(dij));
            }
            nums.push(num);
        }
        let row = reduce_row(&den, nums, cancel_tol)?;

        // the reduced row must reproduce the state-space Markov parameters
        let hrow = row.markov(2 * nprime + 1);
        let scale = hrow.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
        for (k, hk) in hrow.iter().enumerate() {
            let want = ss.markov(k);
            for j in 0..m {
                if (hk[j] - want[(i, j)]).abs() > 1e-7 * scale {
                    return Err(Error::ReductionAmbiguous(format!(
                        "Markov parameter {k} mismatch after cancellation (output {i})"
                    )));
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Per-output transfer rows at the default cancellation tolerance 1e-6.
pub fn tf_rows(ss: &StateSpace) -> Result<Vec<TransferRow>> {
    tf_rows_with_tol(ss, 1e-6)
}

/// Cancel denominator roots matched (within `tol`, scaled by `1 + |root|`)
/// by a root of every numerator entry; deflate by the real factor built
/// from the cancelled set.
fn reduce_row(den: &Polynomial, nums: Vec<Polynomial>, tol: f64) -> Result<TransferRow> {
    let den_roots = den.roots()?;
    let num_roots: Vec<Option<ComplexRootSet>> = nums
        .iter()
        .map(|p| match p.degree() {
            Some(d) if d >= 1 => p.roots().ok(),
            _ => None,
        })
        .collect();

    let mut cancel: Vec<Complex64> = Vec::new();
    let mut used: Vec<Vec<bool>> = num_roots
        .iter()
        .map(|r| vec![false; r.as_ref().map_or(0, |s| s.len())])
        .collect();
    for r in den_roots.roots() {
        let gate = tol * (1.0 + r.norm());
        let mut marks = Vec::with_capacity(nums.len());
        let mut everywhere = true;
        for (j, nr) in num_roots.iter().enumerate() {
            let found = nr.as_ref().and_then(|set| {
                set.roots()
                    .iter()
                    .enumerate()
                    .position(|(k, c)| !used[j][k] && (c - r).norm() <= gate)
            });
            match found {
                Some(k) => marks.push((j, k)),
                None => {
                    everywhere = false;
                    break;
                }
            }
        }
        if everywhere {
            for (j, k) in marks {
                used[j][k] = true;
            }
            cancel.push(*r);
        }
    }

    if cancel.is_empty() {
        let lead = den.leading();
        return Ok(TransferRow {
            den: den.monic()?,
            num: nums.iter().map(|p| p.scale(1.0 / lead)).collect(),
        });
    }

    let factor = Polynomial::from_roots(&cancel, 1e-6)?;
    let (new_den, dres) = den.div_exact(&factor, tol)?;
    if dres > 1e-6 * den.max_norm() {
        return Err(Error::ReductionAmbiguous(format!(
            "denominator deflation residual {dres:.3e}"
        )));
    }
    let num_scale = nums.iter().map(|p| p.max_norm()).fold(0.0f64, f64::max);
    let mut new_nums = Vec::with_capacity(nums.len());
    for p in &nums {
        if p.is_zero() {
            new_nums.push(Polynomial::zero());
            continue;
        }
        let (q, res) = p.div_exact(&factor, tol)?;
        if res > 1e-6 * num_scale {
            return Err(Error::ReductionAmbiguous(format!(
                "numerator deflation residual {res:.3e}"
            )));
        }
        new_nums.push(q);
    }
    let lead = new_den.leading();
    Ok(TransferRow {
        den: new_den.monic()?,
        num: new_nums.iter().map(|p| p.scale(1.0 / lead)).collect(),
    })
}

/// Structural indices from Markov-parameter ranks.
pub fn structure(ss: &StateSpace) -> Result<SystemStructure> {
    let nprime = ss.order();
    let p = ss.n_outputs();
    let m = ss.n_inputs();

    // block Hankel of Markov parameters C A^k B, k = 0 .. 2n'-1
    let mut hank = Matrix::zeros(nprime * p, nprime * m);
    for bi in 0..nprime {
        for bj in 0..nprime {
            let mk = ss.markov(bi + bj + 1);
            hank.view_mut((bi * p, bj * m), (p, m)).copy_from(&mk);
        }
    }
    // slow plants push genuine Hankel directions below a fixed 1e-8
    // relative cut, so rank at the machine-precision default instead
    let f = matpoly::svd(&hank)?;
    let n = f.rank_at(matpoly::default_tolerance(&hank));

    // lag: smallest i with rank(O_i) = rank(O_n')
    let mut obs = Matrix::zeros(nprime * p, nprime);
    let mut cak = ss.c.clone();
    for i in 0..nprime {
        obs.view_mut((i * p, 0), (p, nprime)).copy_from(&cak);
        cak = &cak * &ss.a;
    }
    let fo = matpoly::svd(&obs)?;
    let otol = matpoly::default_tolerance(&obs);
    let full_rank = fo.rank_at(otol);
    let mut lag = nprime;
    for i in 1..=nprime {
        let oi = obs.rows(0, i * p).into_owned();
        let fi = matpoly::svd(&oi)?;
        if fi.rank_at(otol) == full_rank {
            lag = i;
            break;
        }
    }

    let rows = tf_rows(ss)?;
    let row_orders: Vec<usize> = rows.iter().map(|r| r.order()).collect();
    let mut relative_degrees = Vec::with_capacity(p);
    for row in &rows {
        let h = row.markov(2 * nprime + 2);
        let scale = h
            .iter()
            .flatten()
            .fold(0.0f64, |a, x| a.max(x.abs()))
            .max(1e-300);
        let nu = h
            .iter()
            .position(|hk| hk.iter().any(|x| x.abs() > 1e-10 * scale))
            .unwrap_or(0);
        relative_degrees.push(nu);
    }

    Ok(SystemStructure {
        minimal_order: n,
        lag,
        row_orders,
        relative_degrees,
    })
}

/// Recommended sampling period for the benchmark plants.
pub const BENCH_TS: f64 = 0.05;

/// Two-mass mass-spring-damper chain between two walls, force on the first
/// mass, position of the first mass as output. Continuous time; stable.
pub fn msd() -> (StateSpace, f64) {
    let (m1, m2) = (10.0, 9.0);
    let (k0, k1, k2) = (0.5, 9.0, 0.1);
    let (d0, d1, d2) = (0.2, 1.8, 0.3);
    #[rustfmt::skip]
    let a = Matrix::from_row_slice(4, 4, &[
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        -(k0 + k1) / m1, k1 / m1, -(d0 + d1) / m1, d1 / m1,
        k1 / m2, -(k1 + k2) / m2, d1 / m2, -(d1 + d2) / m2,
    ]);
    let b = Matrix::from_column_slice(4, 1, &[0.0, 0.0, 1.0 / m1, 0.0]);
    let c = Matrix::from_row_slice(1, 4, &[1.0, 0.0, 0.0, 0.0]);
    (StateSpace::new(a, b, c, Matrix::zeros(1, 1)).unwrap(), BENCH_TS)
}

/// Inverted pendulum on a cart, linearized about the upright equilibrium;
/// output is the rod tip position `x + 2 l theta`. Continuous; unstable.
pub fn inverted_pendulum() -> (StateSpace, f64) {
    let (mc, mp, fr, len, inertia, grav) = (0.5, 0.2, 0.1, 0.3, 0.006, 9.81);
    let det = (inertia + mp * len * len) * (mc + mp) - (mp * len) * (mp * len);
    #[rustfmt::skip]
    let a = Matrix::from_row_slice(4, 4, &[
        0.0, 1.0, 0.0, 0.0,
        0.0, -(inertia + mp * len * len) * fr / det, (mp * len) * (mp * len) * grav / det, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, -mp * len * fr / det, (mc + mp) * mp * grav * len / det, 0.0,
    ]);
    let b = Matrix::from_column_slice(
        4,
        1,
        &[0.0, (inertia + mp * len * len) / det, 0.0, mp * len / det],
    );
    let c = Matrix::from_row_slice(1, 4, &[1.0, 0.0, 2.0 * len, 0.0]);
    (StateSpace::new(a, b, c, Matrix::zeros(1, 1)).unwrap(), BENCH_TS)
}

/// Submarine longitudinal model at constant speed; outputs are depth and
/// pitch angle. Continuous; contains the depth integrator.
pub fn submarine() -> (StateSpace, f64) {
    let v = 3.086;
    #[rustfmt::skip]
    let a = Matrix::from_row_slice(4, 4, &[
        -0.0123 * v, 0.29029 * v, 0.0, 0.000475 * v,
        0.000554 * v, -0.02979 * v, 0.0, -0.001817 * v,
        1.0, 0.0, 0.0, -v,
        0.0, 1.0, 0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let b = Matrix::from_row_slice(4, 2, &[
        -0.000791 * v * v, -0.002399 * v * v,
        0.00018178 * v * v, -0.000233 * v * v,
        0.0, 0.0,
        0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let c = Matrix::from_row_slice(2, 4, &[
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ]);
    (StateSpace::new(a, b, c, Matrix::zeros(2, 2)).unwrap(), BENCH_TS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matpoly::spectral_radius;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn simulate_delay_impulse() {
        let ss = StateSpace::new(
            Matrix::zeros(1, 1),
            Matrix::identity(1, 1),
            Matrix::identity(1, 1),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let mut u = Matrix::zeros(1, 4);
        u[(0, 0)] = 1.0;
        let y = simulate(&ss, &Vector::zeros(1), &u).unwrap();
        assert_eq!(y.as_slice(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn simulate_zero_everything() {
        let (plant, ts) = msd();
        let ss = zoh_plant(&plant, ts).unwrap();
        let y = simulate(&ss, &Vector::zeros(4), &Matrix::zeros(1, 10)).unwrap();
        assert_eq!(y.norm(), 0.0);
    }

    #[test]
    fn simulate_first_order_geometric_step() {
        let (a, b, c) = (0.5, 2.0, 3.0);
        let ss = StateSpace::new(
            Matrix::from_element(1, 1, a),
            Matrix::from_element(1, 1, b),
            Matrix::from_element(1, 1, c),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let u = Matrix::from_element(1, 20, 1.0);
        let y = simulate(&ss, &Vector::zeros(1), &u).unwrap();
        for t in 0..20 {
            let expect = c * b * (1.0 - a.powi(t as i32)) / (1.0 - a);
            assert_relative_eq!(y[(0, t)], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn zoh_integrator() {
        let (a, b) = zoh_discretize(&Matrix::zeros(2, 2), &Matrix::identity(2, 2), 0.1).unwrap();
        assert!((a - Matrix::identity(2, 2)).norm() < 1e-15);
        assert!((b - Matrix::identity(2, 2) * 0.1).norm() < 1e-15);
    }

    #[test]
    fn zoh_scalar_exponential() {
        let (a, _) =
            zoh_discretize(&Matrix::from_element(1, 1, -1.7), &Matrix::identity(1, 1), 0.3)
                .unwrap();
        assert_relative_eq!(a[(0, 0)], (-1.7f64 * 0.3).exp(), epsilon = 1e-12);
    }

    #[test]
    fn zoh_matches_long_series_oracle() {
        // independent oracle: plain Taylor series, many terms, no squaring
        let (plant, ts) = msd();
        let (a, b) = zoh_discretize(&plant.a, &plant.b, ts).unwrap();
        let (n, m) = (4, 1);
        let mut aug = Matrix::zeros(n + m, n + m);
        aug.view_mut((0, 0), (n, n)).copy_from(&(&plant.a * ts));
        aug.view_mut((0, n), (n, m)).copy_from(&(&plant.b * ts));
        let mut sum = Matrix::identity(n + m, n + m);
        let mut term = Matrix::identity(n + m, n + m);
        for k in 1..60 {
            term = &term * &aug / k as f64;
            sum += &term;
        }
        assert!((a - sum.view((0, 0), (n, n)).into_owned()).norm() < 1e-10);
        assert!((b - sum.view((0, n), (n, m)).into_owned()).norm() < 1e-10);
    }

    #[test]
    fn tf_first_order() {
        let ss = StateSpace::new(
            Matrix::from_element(1, 1, 0.5),
            Matrix::identity(1, 1),
            Matrix::identity(1, 1),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let rows = tf_rows(&ss).unwrap();
        assert_eq!(rows[0].den.coeffs(), &[-0.5, 1.0]);
        assert_eq!(rows[0].num[0].coeffs(), &[1.0]);
    }

    #[test]
    fn tf_cancels_unreachable_duplicate_mode() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![0.5, 0.5]));
        let b = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let c = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let ss = StateSpace::new(a, b, c, Matrix::zeros(1, 1)).unwrap();
        let rows = tf_rows(&ss).unwrap();
        assert_eq!(rows[0].order(), 1);
        assert_relative_eq!(rows[0].den.coeff(0), -0.5, epsilon = 1e-9);
    }

    #[test]
    fn msd_minimal_order_four() {
        let (plant, ts) = msd();
        let ss = zoh_plant(&plant, ts).unwrap();
        let rows = tf_rows(&ss).unwrap();
        assert_eq!(rows[0].order(), 4);
        let s = structure(&ss).unwrap();
        assert_eq!(s.minimal_order, 4);
    }

    #[test]
    fn msd_discretized_is_stable() {
        let (plant, ts) = msd();
        let ss = zoh_plant(&plant, ts).unwrap();
        assert!(spectral_radius(&ss.a).unwrap() < 1.0);
    }

    #[test]
    fn pendulum_unstable_order_four() {
        let (plant, ts) = inverted_pendulum();
        let ss = zoh_plant(&plant, ts).unwrap();
        assert!(spectral_radius(&ss.a).unwrap() > 1.0);
        let s = structure(&ss).unwrap();
        assert_eq!(s.minimal_order, 4);
    }

    #[test]
    fn submarine_pole_at_one() {
        let (plant, ts) = submarine();
        let ss = zoh_plant(&plant, ts).unwrap();
        let ev = matpoly::eigvals(&ss.a).unwrap();
        let dist = ev
            .roots()
            .iter()
            .map(|c| (c - Complex64::new(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(dist < 1e-9, "distance to z=1 was {dist:.3e}");
    }

    #[test]
    fn structure_scalar() {
        let ss = StateSpace::new(
            Matrix::from_element(1, 1, 0.5),
            Matrix::identity(1, 1),
            Matrix::identity(1, 1),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let s = structure(&ss).unwrap();
        assert_eq!(s.minimal_order, 1);
        assert_eq!(s.lag, 1);
        assert_eq!(s.siso_relative_degree(), 1);
    }

    #[test]
    fn structure_feedthrough_relative_degree_zero() {
        let ss = StateSpace::new(
            Matrix::from_element(1, 1, 0.5),
            Matrix::identity(1, 1),
            Matrix::identity(1, 1),
            Matrix::identity(1, 1),
        )
        .unwrap();
        let s = structure(&ss).unwrap();
        assert_eq!(s.siso_relative_degree(), 0);
    }

    #[test]
    fn tf_markov_match_simulated_impulse() {
        let (plant, ts) = msd();
        let ss = zoh_plant(&plant, ts).unwrap();
        let rows = tf_rows(&ss).unwrap();
        let steps = 3 * ss.order();
        let mut u = Matrix::zeros(1, steps);
        u[(0, 0)] = 1.0;
        let y = simulate(&ss, &Vector::zeros(4), &u).unwrap();
        let h = rows[0].markov(steps);
        let scale = y.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        for t in 0..steps {
            assert!((h[t][0] - y[(0, t)]).abs() <= 1e-7 * scale);
        }
    }

    #[test]
    fn structure_invariant_under_similarity() {
        let (plant, ts) = inverted_pendulum();
        let ss = zoh_plant(&plant, ts).unwrap();
        let s0 = structure(&ss).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..20 {
            let g = Matrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
            let q = g.qr().q();
            let a = q.transpose() * &ss.a * &q;
            let b = q.transpose() * &ss.b;
            let c = &ss.c * &q;
            let tss = StateSpace::new(a, b, c, ss.d.clone()).unwrap();
            let s = structure(&tss).unwrap();
            assert_eq!(s.minimal_order, s0.minimal_order);
            assert_eq!(s.lag, s0.lag);
            assert_eq!(s.relative_degrees, s0.relative_degrees);
        }
    }

    #[test]
    fn zoh_of_stable_plant_is_stable() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..10 {
            let g = Matrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let shift = spectral_radius(&g).unwrap() + 0.1;
            let ac = g - Matrix::identity(3, 3) * shift;
            let (ad, _) = zoh_discretize(&ac, &Matrix::identity(3, 3), 0.3).unwrap();
            assert!(spectral_radius(&ad).unwrap() < 1.0);
        }
    }
}
