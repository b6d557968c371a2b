//! Trajectory generation and persistence, Hankel data blocks, excitation
//! and rank checks, noise injection, SNR, and multi-trajectory averaging.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::distributions::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::lti::{self, StateSpace};
use crate::matpoly::{self, Matrix, Vector};

/// A sampled input-output signal pair: `u` is `m x T'`, `y` is `p x T'`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub u: Matrix,
    pub y: Matrix,
}

impl Trajectory {
    pub fn new(u: Matrix, y: Matrix) -> Result<Self> {
        if u.ncols() != y.ncols() {
            return Err(Error::InvalidInput("input/output length mismatch".into()));
        }
        if u.iter().chain(y.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        Ok(Trajectory { u, y })
    }

    pub fn len(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.u.ncols() == 0
    }

    pub fn n_inputs(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.y.nrows()
    }
}

/// The partitioned Hankel stack. All blocks share the column count
/// `T = T' - N`.
#[derive(Debug, Clone)]
pub struct DataBlocks {
    pub n_window: usize,
    pub u_past: Matrix,
    pub u_future: Matrix,
    pub y_past: Matrix,
    pub y_future: Matrix,
}

impl DataBlocks {
    pub fn n_inputs(&self) -> usize {
        self.u_future.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.y_future.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.u_past.ncols()
    }

    /// Per-output data matrix `H_i = [U_p; U_f; Y_p,i]`.
    pub fn h_i(&self, output: usize) -> Matrix {
        let m = self.n_inputs();
        let p = self.n_outputs();
        let nw = self.n_window;
        let t = self.n_cols();
        let mut h = Matrix::zeros(m * nw + m + nw, t);
        h.view_mut((0, 0), (m * nw, t)).copy_from(&self.u_past);
        h.view_mut((m * nw, 0), (m, t)).copy_from(&self.u_future);
        for k in 0..nw {
            h.view_mut((m * nw + m + k, 0), (1, t))
                .copy_from(&self.y_past.row(k * p + output));
        }
        h
    }

    /// Row `Y_f,i` of the future-output block as a 1 x T matrix.
    pub fn y_future_i(&self, output: usize) -> Matrix {
        let t = self.n_cols();
        Matrix::from_fn(1, t, |_, j| self.y_future[(output, j)])
    }

    /// The full stack `[U_p; U_f; Y_p]`.
    pub fn h_full(&self) -> Matrix {
        stack_rows(&[&self.u_past, &self.u_future, &self.y_past])
    }

    /// The stack `[U_p; U_f; Y_p; Y_f]` whose columns are length-(N+1)
    /// trajectories.
    pub fn h_with_future(&self) -> Matrix {
        stack_rows(&[&self.u_past, &self.u_future, &self.y_past, &self.y_future])
    }
}

fn stack_rows(blocks: &[&Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks[0].ncols();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Output measurement noise: i.i.d. zero-mean Gaussian of standard
/// deviation `sigma`, reproducible from `seed`.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Block Hankel matrix of a `d x T'` signal with window length `l`:
/// column j stacks samples j .. j+l-1.
pub fn hankel(signal: &Matrix, l: usize) -> Result<Matrix> {
    let d = signal.nrows();
    let tp = signal.ncols();
    if l == 0 || l > tp {
        return Err(Error::InvalidInput(format!(
            "window {l} exceeds signal length {tp}"
        )));
    }
    let cols = tp - l + 1;
    let mut h = Matrix::zeros(d * l, cols);
    for j in 0..cols {
        for k in 0..l {
            for i in 0..d {
                h[(k * d + i, j)] = signal[(i, j + k)];
            }
        }
    }
    Ok(h)
}

/// Persistency of excitation of the given order: the order-window block
/// Hankel of the input has full row rank.
pub fn pe_order(u: &Matrix, order: usize) -> Result<bool> {
    let h = hankel(u, order)?;
    if h.nrows() > h.ncols() {
        return Ok(false);
    }
    let f = matpoly::svd(&h)?;
    Ok(f.rank_at(1e-8 * f.sigma_max()) == h.nrows())
}

/// Partition the length-(N+1) window Hankels of a trajectory into
/// past/future blocks.
pub fn build_blocks(traj: &Trajectory, n_window: usize) -> Result<DataBlocks> {
    if traj.len() < n_window + 1 {
        return Err(Error::InvalidInput(format!(
            "trajectory length {} too short for window {}",
            traj.len(),
            n_window
        )));
    }
    let m = traj.n_inputs();
    let p = traj.n_outputs();
    let hu = hankel(&traj.u, n_window + 1)?;
    let hy = hankel(&traj.y, n_window + 1)?;
    let t = hu.ncols();
    Ok(DataBlocks {
        n_window,
        u_past: hu.rows(0, m * n_window).into_owned(),
        u_future: hu.rows(m * n_window, m).into_owned(),
        y_past: hy.rows(0, p * n_window).into_owned(),
        y_future: hy.rows(p * n_window, p).into_owned(),
        // t used implicitly; kept for clarity
    })
    .map(|b| {
        debug_assert_eq!(b.n_cols(), t);
        b
    })
}

/// Rank condition `rank([U_p; U_f; Y_p]) = m (N+1) + n`.
pub fn verify_rank_condition(blocks: &DataBlocks, minimal_order: usize) -> Result<bool> {
    let h = blocks.h_full();
    let want = blocks.n_inputs() * (blocks.n_window + 1) + minimal_order;
    if h.ncols() < want {
        return Ok(false);
    }
    let f = matpoly::svd(&h)?;
    Ok(f.rank_at(matpoly::default_tolerance(&h)) == want)
}

/// Perturb the outputs by seeded i.i.d. Gaussian noise; inputs untouched.
pub fn add_noise(traj: &Trajectory, spec: &NoiseSpec) -> Result<Trajectory> {
    if spec.sigma < 0.0 || !spec.sigma.is_finite() {
        return Err(Error::InvalidInput("noise sigma must be finite and >= 0".into()));
    }
    if spec.sigma == 0.0 {
        return Ok(traj.clone());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let normal = rand_distr::Normal::new(0.0, spec.sigma)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut y = traj.y.clone();
    for v in y.iter_mut() {
        *v += normal.sample(&mut rng);
    }
    Trajectory::new(traj.u.clone(), y)
}

/// Signal-to-noise ratio in dB: smallest nonzero singular value of the
/// clean stack against the largest singular value of the noise stack.
/// Returns +inf for zero noise.
pub fn snr(clean: &DataBlocks, noise: &DataBlocks) -> Result<f64> {
    let s = clean.h_with_future();
    let e = noise.h_with_future();
    if s.shape() != e.shape() {
        return Err(Error::InvalidInput("snr shape mismatch".into()));
    }
    let fe = matpoly::svd(&e)?;
    if fe.sigma_max() == 0.0 {
        return Ok(f64::INFINITY);
    }
    let fs = matpoly::svd(&s)?;
    let smin = fs
        .sigma_min_nonzero(1e-12)
        .ok_or_else(|| Error::InvalidInput("zero signal stack".into()))?;
    Ok(10.0 * smin.log10() - 10.0 * fe.sigma_max().log10())
}

/// Elementwise mean of the per-dataset fitted rows
/// `Y_f,i [H_i]_tau^dagger`, accumulated in index order.
pub fn average_predictor(
    datasets: &[DataBlocks],
    tau: Option<f64>,
    output: usize,
) -> Result<Matrix> {
    if datasets.is_empty() {
        return Err(Error::InvalidInput("no datasets".into()));
    }
    let mut acc: Option<Matrix> = None;
    for blocks in datasets {
        let h = blocks.h_i(output);
        let t = tau.unwrap_or_else(|| matpoly::default_tolerance(&h));
        let row = blocks.y_future_i(output) * matpoly::pinv_truncated(&h, t)?;
        match &mut acc {
            None => acc = Some(row),
            Some(a) => {
                if a.shape() != row.shape() {
                    return Err(Error::InvalidInput("inconsistent dataset shapes".into()));
                }
                *a += row;
            }
        }
    }
    Ok(acc.unwrap() / datasets.len() as f64)
}

/// Seeded uniform excitation on [-amplitude, amplitude].
pub fn pe_input(m: usize, len: usize, amplitude: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Matrix::from_fn(m, len, |_, _| rng.gen_range(-amplitude..amplitude))
}

/// Simulate a trajectory of the plant from `x0` under seeded uniform
/// excitation.
pub fn excite(
    ss: &StateSpace,
    x0: &Vector,
    len: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Trajectory> {
    let u = pe_input(ss.n_inputs(), len, amplitude, seed);
    let y = lti::simulate(ss, x0, &u)?;
    Trajectory::new(u, y)
}

/// Write a trajectory as CSV with header `t,u1,...,um,y1,...,yp`.
pub fn write_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let m = traj.n_inputs();
    let p = traj.n_outputs();
    let mut header = String::from("t");
    for j in 1..=m {
        header.push_str(&format!(",u{j}"));
    }
    for j in 1..=p {
        header.push_str(&format!(",y{j}"));
    }
    writeln!(w, "{header}")?;
    for t in 0..traj.len() {
        write!(w, "{t}")?;
        for i in 0..m {
            write!(w, ",{:.17e}", traj.u[(i, t)])?;
        }
        for i in 0..p {
            write!(w, ",{:.17e}", traj.y[(i, t)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a trajectory from the CSV format written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Trajectory> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.first() != Some(&"t") {
        return Err(Error::Parse("header must start with 't'".into()));
    }
    let m = cols.iter().filter(|c| c.starts_with('u')).count();
    let p = cols.iter().filter(|c| c.starts_with('y')).count();
    if m == 0 || p == 0 || cols.len() != 1 + m + p {
        return Err(Error::Parse(format!("unexpected header '{header}'")));
    }
    let mut us: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 1 + m + p {
            return Err(Error::Parse(format!("row {rows} has {} fields", fields.len())));
        }
        for f in &fields[1..1 + m] {
            us.push(f.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        }
        for f in &fields[1 + m..] {
            ys.push(f.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        }
        rows += 1;
    }
    let u = Matrix::from_fn(m, rows, |i, t| us[t * m + i]);
    let y = Matrix::from_fn(p, rows, |i, t| ys[t * p + i]);
    Trajectory::new(u, y)
}
