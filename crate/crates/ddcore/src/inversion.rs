//! Data-driven L-delay inversion for SISO systems: the stacked inversion
//! data matrix, its rank condition, the latent-pole-stable inverse via the
//! truncated pseudoinverse, recursive unknown-input estimation, and the
//! disturbance-observer loop built on top of it.

use crate::datagen::Trajectory;
use crate::error::{Error, Result};
use crate::lti::{self, StateSpace};
use crate::matpoly::{self, Matrix, Polynomial, Vector};

/// Hankel blocks for the inversion problem. Each column pairs `N+1` input
/// samples with `N+L+1` output samples of the same window.
#[derive(Debug, Clone)]
pub struct InversionBlocks {
    pub n_window: usize,
    pub l_delay: usize,
    pub u_past: Matrix,
    pub u_future: Matrix,
    pub y_past: Matrix,
    pub y_future_l: Matrix,
}

impl InversionBlocks {
    pub fn n_cols(&self) -> usize {
        self.u_past.ncols()
    }

    /// The stacked matrix `[U_p; Y_p; Y_f^L]` the inverse is fitted
    /// against.
    pub fn h_inv(&self) -> Matrix {
        let t = self.n_cols();
        let n = self.n_window;
        let l = self.l_delay;
        let mut h = Matrix::zeros(2 * n + l + 1, t);
        h.view_mut((0, 0), (n, t)).copy_from(&self.u_past);
        h.view_mut((n, 0), (n, t)).copy_from(&self.y_past);
        h.view_mut((2 * n, 0), (l + 1, t)).copy_from(&self.y_future_l);
        h
    }
}

/// Coefficients of the fitted L-delay inverse:
/// `u_hat(t-L) = sum_k gamma_k u_hat(t-N-L+k) + sum_k delta_k y(t-N-L+k)`.
#[derive(Debug, Clone)]
pub struct InverseRepresentation {
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub n_window: usize,
    pub l_delay: usize,
    pub fit_residual: f64,
}

impl InverseRepresentation {
    /// Pole polynomial of the inverse recursion,
    /// `z^N - sum_k gamma_k z^k`.
    pub fn gamma_polynomial(&self) -> Polynomial {
        let n = self.n_window;
        let mut c = vec![0.0; n + 1];
        for (k, g) in self.gamma.iter().enumerate() {
            c[k] = -g;
        }
        c[n] = 1.0;
        Polynomial::new(c)
    }

    pub fn delta_polynomial(&self) -> Polynomial {
        Polynomial::new(self.delta.clone())
    }
}

/// Configuration of one disturbance-observer run.
#[derive(Debug, Clone)]
pub struct DobConfig {
    pub l_delay: usize,
    /// The N input estimates preceding the first estimated sample.
    pub init_estimates: Vec<f64>,
    /// Command input, one sample per step.
    pub u_command: Vec<f64>,
    /// Additive input disturbance, one sample per step.
    pub disturbance: Vec<f64>,
}

/// Traces of a disturbance-observer run.
#[derive(Debug, Clone)]
pub struct DobRun {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub u_hat: Vec<f64>,
    /// Set when the inverse has a pole on or outside the unit circle, so
    /// divergence is expected.
    pub unstable_inverse: bool,
}

/// Build the inversion blocks from a SISO trajectory recorded with `L`
/// extra input samples: the last `L` inputs only shape the outputs and do
/// not enter the data matrix.
pub fn build_inversion_blocks(
    traj: &Trajectory,
    n_window: usize,
    l_delay: usize,
) -> Result<InversionBlocks> {
    if traj.n_inputs() != 1 || traj.n_outputs() != 1 {
        return Err(Error::Unsupported("inversion is SISO only".into()));
    }
    let total = traj.len();
    if total < n_window + l_delay + 1 {
        return Err(Error::InvalidInput(format!(
            "trajectory length {total} too short for windows N={n_window}, L={l_delay}"
        )));
    }
    let k = total - l_delay; // usable input samples
    let u = traj.u.columns(0, k).into_owned();
    let hu = crate::datagen::hankel(&u, n_window + 1)?;
    let hy = crate::datagen::hankel(&traj.y, n_window + l_delay + 1)?;
    debug_assert_eq!(hu.ncols(), hy.ncols());
    Ok(InversionBlocks {
        n_window,
        l_delay,
        u_past: hu.rows(0, n_window).into_owned(),
        u_future: hu.rows(n_window, 1).into_owned(),
        y_past: hy.rows(0, n_window).into_owned(),
        y_future_l: hy.rows(n_window, l_delay + 1).into_owned(),
    })
}

/// Rank condition for exact inversion:
/// `rank(H_inv) = N + n + L - nu + 1`.
pub fn rank_condition_inv(
    blocks: &InversionBlocks,
    minimal_order: usize,
    relative_degree: usize,
) -> Result<bool> {
    let h = blocks.h_inv();
    let want = blocks.n_window + minimal_order + blocks.l_delay - relative_degree + 1;
    if h.ncols() < want {
        return Ok(false);
    }
    let f = matpoly::svd(&h)?;
    Ok(f.rank_at(matpoly::default_tolerance(&h)) == want)
}

/// Fit the inverse row `U_f [H_inv]_tau^dagger`; `tau = None` uses the
/// default tolerance.
pub fn fit_inverse(blocks: &InversionBlocks, tau: Option<f64>) -> Result<InverseRepresentation> {
    let h = blocks.h_inv();
    let t = tau.unwrap_or_else(|| matpoly::default_tolerance(&h));
    let pinv = matpoly::pinv_truncated(&h, t)?;
    let row = &blocks.u_future * pinv;
    let resid = (&blocks.u_future - &row * &h).amax();
    let n = blocks.n_window;
    let l = blocks.l_delay;
    Ok(InverseRepresentation {
        gamma: (0..n).map(|k| row[(0, k)]).collect(),
        delta: (0..n + l + 1).map(|k| row[(0, n + k)]).collect(),
        n_window: n,
        l_delay: l,
        fit_residual: resid,
    })
}

/// One estimation step from explicit windows: `u_hat_window` holds the N
/// previous estimates (oldest first), `y_window` the  N+L+1 outputs ending
/// at the current time.
pub fn estimate_step(ir: &InverseRepresentation, u_hat_window: &[f64], y_window: &[f64]) -> Result<f64> {
    let n = ir.n_window;
    if u_hat_window.len() != n || y_window.len() != n + ir.l_delay + 1 {
        return Err(Error::InvalidInput("estimation window length mismatch".into()));
    }
    let mut v = 0.0;
    for (k, g) in ir.gamma.iter().enumerate() {
        v += g * u_hat_window[k];
    }
    for (k, d) in ir.delta.iter().enumerate() {
        v += d * y_window[k];
    }
    Ok(v)
}

/// Recursive input estimation over an output record: estimates
/// `u_hat(s)` for `s = 0 .. len(y)-L-1`, seeding the first `N` estimates
/// from `init_guess` and reusing estimates afterwards.
pub fn estimate_recursive(
    ir: &InverseRepresentation,
    y: &[f64],
    init_guess: &[f64],
) -> Result<Vec<f64>> {
    let n = ir.n_window;
    let l = ir.l_delay;
    if init_guess.len() != n {
        return Err(Error::InvalidInput("init window must have N entries".into()));
    }
    if y.len() < n + l + 1 {
        return Err(Error::InvalidInput("output record too short".into()));
    }
    let mut u_hat: Vec<f64> = init_guess.to_vec();
    for s in n..y.len() - l {
        let v = estimate_step(ir, &u_hat[s - n..s], &y[s - n..s + l + 1])?;
        u_hat.push(v);
    }
    Ok(u_hat)
}

/// Factor the estimator against the true transfer function: the pole
/// polynomial must equal `latent * N(z)/rho`, the output polynomial
/// `latent * D(z)/rho`.
pub fn factorize_inverse(
    ir: &InverseRepresentation,
    num: &Polynomial,
    den: &Polynomial,
    tol: f64,
) -> Result<(Polynomial, f64)> {
    let rho = num.leading();
    if rho == 0.0 {
        return Err(Error::InvalidInput("zero numerator".into()));
    }
    let gamma = ir.gamma_polynomial();
    let (latent, gres) = gamma.div_exact(&num.scale(1.0 / rho), tol)?;
    if gres > tol {
        return Err(Error::FactorizationFailed {
            residual: gres,
            tol,
        });
    }
    let expect = &latent * &den.scale(1.0 / rho);
    let dres = ir.delta_polynomial().sub(&expect).max_norm();
    if dres > tol {
        return Err(Error::FactorizationFailed {
            residual: dres,
            tol,
        });
    }
    Ok((latent.monic()?, gres.max(dres)))
}

/// Run the disturbance-observer loop: the estimator reconstructs the
/// plant input L steps back, the delayed mismatch with the command
/// becomes the disturbance estimate, and the estimate is subtracted from
/// the command before the (disturbed) plant input.
pub fn dob_simulate(
    ss: &StateSpace,
    ir: &InverseRepresentation,
    cfg: &DobConfig,
    steps: usize,
) -> Result<DobRun> {
    if ss.n_inputs() != 1 || ss.n_outputs() != 1 {
        return Err(Error::Unsupported("disturbance observer is SISO only".into()));
    }
    let n = ir.n_window;
    let l = ir.l_delay;
    if cfg.l_delay != l {
        return Err(Error::InvalidInput("delay mismatch between config and inverse".into()));
    }
    if cfg.init_estimates.len() != n {
        return Err(Error::InvalidInput("init window must have N entries".into()));
    }
    if cfg.u_command.len() < steps || cfg.disturbance.len() < steps {
        return Err(Error::InvalidInput("command/disturbance records too short".into()));
    }
    let unstable_inverse = ir
        .gamma_polynomial()
        .roots()
        .map(|r| r.max_modulus() >= 1.0)
        .unwrap_or(false);

    let get = |v: &[f64], idx: isize| -> f64 {
        if idx >= 0 {
            v.get(idx as usize).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    };

    let mut x = Vector::zeros(ss.order());
    let mut y_hist: Vec<f64> = Vec::with_capacity(steps);
    // u_hat indexed by the estimated time s >= 0; seed lives separately
    let mut u_hat: Vec<f64> = Vec::with_capacity(steps);
    let mut d_hat: Vec<f64> = vec![0.0; steps];
    let mut u_applied: Vec<f64> = Vec::with_capacity(steps);

    for t in 0..steps {
        let y = (&ss.c * &x)[(0, 0)];
        y_hist.push(y);

        // estimate the plant input at s = t - L from outputs up to t
        let s = t as isize - l as isize;
        if s >= 0 {
            let s = s as usize;
            let mut v = 0.0;
            for (k, g) in ir.gamma.iter().enumerate() {
                let idx = s as isize - n as isize + k as isize;
                let prev = if idx >= 0 {
                    u_hat[idx as usize]
                } else {
                    cfg.init_estimates[(idx + n as isize) as usize]
                };
                v += g * prev;
            }
            for (k, d) in ir.delta.iter().enumerate() {
                v += d * get(&y_hist, s as isize - n as isize + k as isize);
            }
            u_hat.push(v);
        }

        // d_hat(t) = u_hat(t-L) - (u0(t-L) - d_hat(t-L))
        let dh = if s >= 0 {
            let s = s as usize;
            u_hat[s] - cfg.u_command[s] + d_hat[s]
        } else {
            0.0
        };
        d_hat[t] = dh;

        let u = cfg.u_command[t] - dh + cfg.disturbance[t];
        u_applied.push(u);
        x = &ss.a * &x + &ss.b * Vector::from_element(1, u);
    }

    Ok(DobRun {
        u: u_applied,
        y: y_hist,
        d_hat,
        u_hat,
        unstable_inverse,
    })
}

/// Simulate a SISO inversion experiment: excite the plant for
/// `len + L` steps and keep all outputs, so the recorded trajectory has
/// the L extra input samples the blocks need.
pub fn inversion_experiment(
    ss: &StateSpace,
    len: usize,
    l_delay: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Trajectory> {
    let u = crate::datagen::pe_input(1, len + l_delay, amplitude, seed);
    let y = lti::simulate(ss, &Vector::zeros(ss.order()), &u)?;
    Trajectory::new(u, y)
}
