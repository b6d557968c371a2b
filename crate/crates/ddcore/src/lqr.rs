//! Output-feedback LQR from the non-minimal realization: discrete Riccati
//! solve, controller assembly, closed-loop simulation, and H2 evaluation
//! of the measurement-noise-to-cost transfer.

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::datagen::NoiseSpec;
use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::matpoly::{self, Matrix, Vector};
use crate::realization::{self, NonMinimalRealization};

/// LQR weights; both must be symmetric positive definite.
#[derive(Debug, Clone)]
pub struct LqrWeights {
    pub q: Matrix,
    pub r: Matrix,
}

impl LqrWeights {
    pub fn new(q: Matrix, r: Matrix) -> Result<Self> {
        for (name, m) in [("Q", &q), ("R", &r)] {
            if m.nrows() != m.ncols() {
                return Err(Error::InvalidInput(format!("{name} must be square")));
            }
            if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                return Err(Error::InvalidInput(format!("{name} must be symmetric")));
            }
            let ev = matpoly::eigvals(m)?;
            if ev.roots().iter().any(|l| l.re <= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive definite")));
            }
        }
        Ok(LqrWeights { q, r })
    }

    pub fn scalar(q: f64, r: f64, p: usize, m: usize) -> Result<Self> {
        LqrWeights::new(Matrix::identity(p, p) * q, Matrix::identity(m, m) * r)
    }

    /// Symmetric square root via eigendecomposition.
    fn sqrt(m: &Matrix) -> Matrix {
        let se = nalgebra::linalg::SymmetricEigen::new(m.clone());
        let vals = se.eigenvalues.map(|v| v.max(0.0).sqrt());
        &se.eigenvectors * Matrix::from_diagonal(&vals) * se.eigenvectors.transpose()
    }
}

/// Stabilizing solution of the discrete algebraic Riccati equation with
/// the feedback gain, iteration count and final residual.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub p: Matrix,
    pub gain: Matrix,
    pub iterations: usize,
    pub residual: f64,
}

fn riccati_residual(a: &Matrix, b: &Matrix, qbar: &Matrix, r: &Matrix, p: &Matrix) -> f64 {
    let btp = b.transpose() * p;
    let inner = (&btp * b + r).clone();
    let gain = inner
        .lu()
        .solve(&(&btp * a))
        .expect("B'PB + R is positive definite");
    (p - a.transpose() * p * a - qbar + a.transpose() * p * b * gain).norm()
}

/// Fixed-point iteration of the Riccati difference equation, starting at
/// `P_0 = Qbar`.
fn dare_fixed_point(
    a: &Matrix,
    b: &Matrix,
    qbar: &Matrix,
    r: &Matrix,
    tol: f64,
    max_iter: usize,
) -> Result<(Matrix, usize)> {
    let mut p = qbar.clone();
    for it in 1..=max_iter {
        let btp = b.transpose() * &p;
        let inner = (&btp * b + r).clone();
        let gain = inner
            .lu()
            .solve(&(&btp * a))
            .ok_or_else(|| Error::InvalidInput("B'PB + R singular".into()))?;
        let next = a.transpose() * &p * a + qbar - a.transpose() * &p * b * gain;
        let next = (&next + next.transpose()) * 0.5;
        let delta = (&next - &p).amax();
        p = next;
        if delta <= tol * p.amax().max(1e-300) {
            return Ok((p, it));
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// Structure-preserving doubling iteration; quadratically convergent
/// accelerator for the same fixed point. Runs to stagnation when `tol` is
/// tighter than the attainable floor.
fn dare_doubling(
    a: &Matrix,
    b: &Matrix,
    qbar: &Matrix,
    r: &Matrix,
    tol: f64,
) -> Result<(Matrix, usize)> {
    let n = a.nrows();
    let rinv = r
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("R singular".into()))?;
    let mut ak = a.clone();
    let mut gk = b * &rinv * b.transpose();
    let mut hk = qbar.clone();
    let mut prev_delta = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=100 {
        let igh = (Matrix::identity(n, n) + &gk * &hk)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::NoConvergence(it))?;
        let aig = &ak * &igh;
        let a_next = &aig * &ak;
        let g_next = &gk + &aig * &gk * ak.transpose();
        let h_next = &hk + ak.transpose() * &hk * &igh * &ak;
        let delta = (&h_next - &hk).amax();
        ak = a_next;
        gk = (&g_next + g_next.transpose()) * 0.5;
        hk = (&h_next + h_next.transpose()) * 0.5;
        let scale = hk.amax().max(1e-300);
        if delta <= tol.max(1e-15) * scale {
            return Ok((hk, it));
        }
        // quadratic convergence has hit its floor
        if delta >= 0.5 * prev_delta {
            stalled += 1;
            if stalled >= 2 && delta <= 1e-10 * scale {
                return Ok((hk, it));
            }
        } else {
            stalled = 0;
        }
        prev_delta = delta;
    }
    Err(Error::NoConvergence(100))
}

/// One Newton polish step: with the stabilizing gain from `p`, solve the
/// closed-loop Stein equation for the exact cost-to-go of that gain.
fn kleinman_step(a: &Matrix, b: &Matrix, qbar: &Matrix, r: &Matrix, p: &Matrix) -> Result<Matrix> {
    let btp = b.transpose() * p;
    let inner = (&btp * b + r).clone();
    let gain = inner
        .lu()
        .solve(&(&btp * a))
        .ok_or_else(|| Error::InvalidInput("B'PB + R singular".into()))?;
    let acl = a - b * &gain;
    let q_closed = qbar + gain.transpose() * r * &gain;
    crate::matpoly::solve_dlyap(&acl.transpose(), &q_closed)
}

/// Solve the LQR Riccati equation for the realization. Checks
/// stabilizability first and requires zero feedthrough. The doubling
/// accelerator runs first; the plain fixed-point iteration is the
/// fallback, and the returned residual is always verified.
pub fn solve_dare(
    r: &NonMinimalRealization,
    w: &LqrWeights,
    tol: f64,
    max_iter: usize,
) -> Result<RiccatiSolution> {
    if r.d.amax() > 1e-9 {
        return Err(Error::Unsupported(
            "LQR synthesis requires zero feedthrough".into(),
        ));
    }
    let (margin, modulus) = realization::stabilizability_margin(r, realization::PBH_TOL)?;
    if margin <= realization::PBH_TOL {
        return Err(Error::NotStabilizable { margin, modulus });
    }
    let qbar = r.c.transpose() * &w.q * &r.c;
    solve_dare_unchecked(&r.a, &r.b, &qbar, &w.r, tol, max_iter)
}

/// Riccati solve on raw matrices (state cost already assembled); used for
/// the model-based reference solution in tests and experiments.
pub fn solve_dare_unchecked(
    a: &Matrix,
    b: &Matrix,
    qbar: &Matrix,
    rw: &Matrix,
    tol: f64,
    max_iter: usize,
) -> Result<RiccatiSolution> {
    let scale = qbar.amax().max(1.0);
    let accept = |p: &Matrix| riccati_residual(a, b, qbar, rw, p) <= 1e-8 * p.norm().max(scale);

    let solved = match dare_doubling(a, b, qbar, rw, tol) {
        Ok((p, it)) if accept(&p) => Some((p, it)),
        _ => None,
    };
    let (mut p, iterations) = match solved {
        Some(s) => s,
        None => {
            let (p, it) = dare_fixed_point(a, b, qbar, rw, tol, max_iter)?;
            if !accept(&p) {
                return Err(Error::NoConvergence(it));
            }
            (p, it)
        }
    };
    // Newton polish while it improves the residual
    for _ in 0..3 {
        let before = riccati_residual(a, b, qbar, rw, &p);
        match kleinman_step(a, b, qbar, rw, &p) {
            Ok(next) if riccati_residual(a, b, qbar, rw, &next) < before => p = next,
            _ => break,
        }
    }
    let btp = b.transpose() * &p;
    let inner = (&btp * b + rw).clone();
    let gain = inner
        .lu()
        .solve(&(&btp * a))
        .ok_or_else(|| Error::InvalidInput("B'PB + R singular".into()))?;
    let residual = riccati_residual(a, b, qbar, rw, &p);
    Ok(RiccatiSolution {
        p,
        gain,
        iterations,
        residual,
    })
}

/// The output-feedback controller: observer-like recursion on the stacked
/// window state plus the LQR gain.
#[derive(Debug, Clone)]
pub struct Controller {
    pub f: Matrix,
    pub g: Matrix,
    pub k: Matrix,
    pub chi_hat: Vector,
    pub n_window: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
}

/// Assemble the controller `F = A - G C - B K` with the canonical
/// injection `G`.
pub fn build_controller(r: &NonMinimalRealization, k: &Matrix) -> Result<Controller> {
    if k.nrows() != r.n_inputs || k.ncols() != r.state_dim() {
        return Err(Error::InvalidInput("gain dimension mismatch".into()));
    }
    let g = r.injection();
    let f = &r.a - &g * &r.c - &r.b * k;
    Ok(Controller {
        f,
        g,
        k: k.clone(),
        chi_hat: Vector::zeros(r.state_dim()),
        n_window: r.n_window,
        n_inputs: r.n_inputs,
        n_outputs: r.n_outputs,
    })
}

impl Controller {
    /// One controller step: emit `u = -K chi_hat`, then absorb the
    /// measurement `y - y_ref` into the state.
    pub fn step(&mut self, y_meas: &Vector, y_ref: &Vector) -> Vector {
        let u = -(&self.k * &self.chi_hat);
        self.chi_hat = &self.f * &self.chi_hat + &self.g * (y_meas - y_ref);
        u
    }

    pub fn reset(&mut self, chi0: Vector) {
        self.chi_hat = chi0;
    }
}

/// The closed loop of plant and controller with measurement noise as the
/// external input and the weighted output/input stack as the performance
/// output.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    pub a: Matrix,
    pub b: Matrix,
    pub cz: Matrix,
}

/// Assemble the closed-loop matrices; the plant must have zero
/// feedthrough.
pub fn closed_loop(ss: &StateSpace, ctrl: &Controller, w: &LqrWeights) -> Result<ClosedLoop> {
    if ss.d.amax() > 0.0 {
        return Err(Error::Unsupported("closed loop assumes D = 0".into()));
    }
    let n = ss.order();
    let nc = ctrl.f.nrows();
    let p = ss.n_outputs();
    let m = ss.n_inputs();
    let mut a = Matrix::zeros(n + nc, n + nc);
    a.view_mut((0, 0), (n, n)).copy_from(&ss.a);
    a.view_mut((0, n), (n, nc)).copy_from(&(-&ss.b * &ctrl.k));
    a.view_mut((n, 0), (nc, n)).copy_from(&(&ctrl.g * &ss.c));
    a.view_mut((n, n), (nc, nc)).copy_from(&ctrl.f);
    let mut b = Matrix::zeros(n + nc, p);
    b.view_mut((n, 0), (nc, p)).copy_from(&ctrl.g);
    let mut cz = Matrix::zeros(p + m, n + nc);
    cz.view_mut((0, 0), (p, n))
        .copy_from(&(LqrWeights::sqrt(&w.q) * &ss.c));
    cz.view_mut((p, n), (m, nc))
        .copy_from(&(LqrWeights::sqrt(&w.r) * &ctrl.k));
    Ok(ClosedLoop { a, b, cz })
}

/// H2 norm of the closed loop via the discrete Lyapunov equation.
pub fn h2_norm(cl: &ClosedLoop) -> Result<f64> {
    let gram = matpoly::solve_dlyap(&cl.a, &(&cl.b * cl.b.transpose()))?;
    Ok((&cl.cz * gram * cl.cz.transpose()).trace().sqrt())
}

/// Traces from a closed-loop run.
#[derive(Debug, Clone)]
pub struct ClosedLoopRun {
    pub u: Matrix,
    pub y: Matrix,
    pub chi_hat: Matrix,
}

/// Simulate the plant in feedback with the controller; measurement noise
/// is added to the plant output before it reaches the controller.
#[allow(clippy::too_many_arguments)]
pub fn simulate_closed_loop(
    ss: &StateSpace,
    ctrl: &Controller,
    x0: &Vector,
    chi0: &Vector,
    noise: Option<&NoiseSpec>,
    y_ref: &Vector,
    steps: usize,
) -> Result<ClosedLoopRun> {
    if x0.len() != ss.order() || chi0.len() != ctrl.f.nrows() {
        return Err(Error::InvalidInput("initial state dimension mismatch".into()));
    }
    let p = ss.n_outputs();
    let m = ss.n_inputs();
    let mut rng_normal = noise.map(|spec| {
        (
            ChaCha12Rng::seed_from_u64(spec.seed),
            rand_distr::Normal::new(0.0, spec.sigma).unwrap(),
        )
    });
    let mut ctrl = ctrl.clone();
    ctrl.reset(chi0.clone());
    let mut x = x0.clone();
    let mut u_trace = Matrix::zeros(m, steps);
    let mut y_trace = Matrix::zeros(p, steps);
    let mut chi_trace = Matrix::zeros(ctrl.f.nrows(), steps);
    for t in 0..steps {
        let y = &ss.c * &x;
        let mut y_meas = y.clone();
        if let Some((rng, normal)) = rng_normal.as_mut() {
            for v in y_meas.iter_mut() {
                *v += normal.sample(rng);
            }
        }
        chi_trace.set_column(t, &ctrl.chi_hat);
        let u = ctrl.step(&y_meas, y_ref);
        u_trace.set_column(t, &u);
        y_trace.set_column(t, &y);
        x = &ss.a * &x + &ss.b * &u;
    }
    Ok(ClosedLoopRun {
        u: u_trace,
        y: y_trace,
        chi_hat: chi_trace,
    })
}

/// Serialize a controller (mirrors the representation format, plus the
/// gain and the weights).
pub fn controller_to_text(ctrl: &Controller, w: &LqrWeights) -> String {
    let mut s = String::new();
    s.push_str(&format!("n = {}\n", ctrl.n_window));
    s.push_str(&format!("m = {}\n", ctrl.n_inputs));
    s.push_str(&format!("p = {}\n", ctrl.n_outputs));
    let dump = |name: &str, m: &Matrix, s: &mut String| {
        let vals: Vec<String> = m.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&format!("{name}_rows = {}\n", m.nrows()));
        s.push_str(&format!("{name} = [{}]\n", vals.join(", ")));
    };
    dump("q", &w.q, &mut s);
    dump("r", &w.r, &mut s);
    dump("k", &ctrl.k, &mut s);
    dump("f", &ctrl.f, &mut s);
    dump("g", &ctrl.g, &mut s);
    s
}

pub fn write_controller(ctrl: &Controller, w: &LqrWeights, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    out.write_all(controller_to_text(ctrl, w).as_bytes())?;
    Ok(())
}
