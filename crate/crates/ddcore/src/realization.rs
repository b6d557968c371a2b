//! Non-minimal state-space realization over the stacked past-window state,
//! with detectability and stabilizability tests (PBH and the root-set
//! condition on the fitted polynomials).

use num_complex::Complex64;

use crate::ddrep::Representation;
use crate::error::{Error, Result};
use crate::lti::TransferRow;
use crate::matpoly::{self, Matrix, Vector};

/// Default PBH tolerance: relative smallest-singular-value threshold and
/// the margin for classifying an eigenvalue as non-stable.
pub const PBH_TOL: f64 = 1e-7;

/// Stacked past-window state `chi = col(chi_1 .. chi_p)` with
/// `chi_i = col(y_i(t-N:t-1), u(t-N:t-1))`.
#[derive(Debug, Clone)]
pub struct StackedState(pub Vector);

/// Block realization of the data-driven representation: `A` block-diagonal
/// with one companion-plus-shift block per output, `B`/`D` stacked,
/// `C` block-diagonal.
#[derive(Debug, Clone)]
pub struct NonMinimalRealization {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub n_window: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
}

impl NonMinimalRealization {
    pub fn state_dim(&self) -> usize {
        self.n_outputs * self.n_window * (self.n_inputs + 1)
    }

    /// Canonical output injection `I_p (x) col(0_{N-1}, 1, 0_{mN})`.
    pub fn injection(&self) -> Matrix {
        let n = self.n_window;
        let m = self.n_inputs;
        let p = self.n_outputs;
        let block = n * (m + 1);
        let mut g = Matrix::zeros(p * block, p);
        for i in 0..p {
            g[(i * block + n - 1, i)] = 1.0;
        }
        g
    }

    /// Markov parameter of the realization.
    pub fn markov(&self, k: usize) -> Matrix {
        if k == 0 {
            return self.d.clone();
        }
        let mut ak = Matrix::identity(self.state_dim(), self.state_dim());
        for _ in 0..k - 1 {
            ak = &ak * &self.a;
        }
        &self.c * ak * &self.b
    }
}

/// Assemble the realization from fitted coefficient rows.
pub fn build(rep: &Representation) -> NonMinimalRealization {
    let n = rep.n_window;
    let m = rep.n_inputs;
    let p = rep.n_outputs;
    let block = n * (m + 1);
    let mut a = Matrix::zeros(p * block, p * block);
    let mut b = Matrix::zeros(p * block, m);
    let mut c = Matrix::zeros(p, p * block);
    let mut d = Matrix::zeros(p, m);

    for (i, row) in rep.rows.iter().enumerate() {
        let off = i * block;
        // y-window shift
        for k in 0..n - 1 {
            a[(off + k, off + k + 1)] = 1.0;
        }
        // the coefficient row enters both the window update and the output
        for k in 0..n {
            a[(off + n - 1, off + k)] = row.a[k];
            c[(i, off + k)] = row.a[k];
            for j in 0..m {
                a[(off + n - 1, off + n + k * m + j)] = row.b[k][j];
                c[(i, off + n + k * m + j)] = row.b[k][j];
            }
        }
        for j in 0..m {
            b[(off + n - 1, j)] = row.b[n][j];
            d[(i, j)] = row.b[n][j];
        }
        // u-window shift and the new-input slot
        for k in 0..n - 1 {
            for j in 0..m {
                a[(off + n + k * m + j, off + n + (k + 1) * m + j)] = 1.0;
            }
        }
        for j in 0..m {
            b[(off + n + (n - 1) * m + j, j)] = 1.0;
        }
    }
    NonMinimalRealization {
        a,
        b,
        c,
        d,
        n_window: n,
        n_inputs: m,
        n_outputs: p,
    }
}

/// Pack an N-step window `(u, y)` (matrices `m x N`, `p x N`, oldest
/// sample first) into the stacked state.
pub fn build_chi(u_window: &Matrix, y_window: &Matrix) -> Result<StackedState> {
    let n = u_window.ncols();
    if y_window.ncols() != n {
        return Err(Error::InvalidInput("window length mismatch".into()));
    }
    let m = u_window.nrows();
    let p = y_window.nrows();
    let block = n * (m + 1);
    let mut chi = Vector::zeros(p * block);
    for i in 0..p {
        let off = i * block;
        for k in 0..n {
            chi[off + k] = y_window[(i, k)];
            for j in 0..m {
                chi[off + n + k * m + j] = u_window[(j, k)];
            }
        }
    }
    Ok(StackedState(chi))
}

fn unstable_eigs(a: &Matrix, margin: f64) -> Result<Vec<Complex64>> {
    Ok(matpoly::eigvals(a)?
        .roots()
        .iter()
        .copied()
        .filter(|l| l.norm() >= 1.0 - margin)
        .collect())
}

/// PBH margin: smallest relative singular value of the test matrix over
/// the non-stable eigenvalues. 1.0 when there are none.
fn pbh_margin(a: &Matrix, other: &Matrix, vertical: bool, tol: f64) -> Result<(f64, f64)> {
    let n = a.nrows();
    let mut worst = 1.0f64;
    let mut at = 0.0f64;
    for lam in unstable_eigs(a, tol)? {
        let (rows, cols) = if vertical {
            (n + other.nrows(), n)
        } else {
            (n, n + other.ncols())
        };
        let mut re = Matrix::zeros(rows, cols);
        let mut im = Matrix::zeros(rows, cols);
        for i in 0..n {
            for j in 0..n {
                re[(i, j)] = -a[(i, j)];
                if i == j {
                    re[(i, j)] += lam.re;
                    im[(i, j)] = lam.im;
                }
            }
        }
        if vertical {
            re.view_mut((n, 0), (other.nrows(), n)).copy_from(other);
        } else {
            re.view_mut((0, n), (n, other.ncols())).copy_from(other);
        }
        let smin = matpoly::sigma_min_complex(&re, &im)?;
        let smax = matpoly::sigma_max_complex(&re, &im)?;
        let rel = smin / smax.max(1e-300);
        if rel < worst {
            worst = rel;
            at = lam.norm();
        }
    }
    Ok((worst, at))
}

/// PBH detectability test over the non-stable eigenvalues of `A`.
pub fn is_detectable(r: &NonMinimalRealization, tol: f64) -> Result<bool> {
    let (margin, _) = pbh_margin(&r.a, &r.c, true, tol)?;
    Ok(margin > tol)
}

/// PBH stabilizability test over the non-stable eigenvalues of `A`.
pub fn is_stabilizable_pbh(r: &NonMinimalRealization, tol: f64) -> Result<bool> {
    let (margin, _) = pbh_margin(&r.a, &r.b, false, tol)?;
    Ok(margin > tol)
}

/// PBH stabilizability margin (relative sigma_min and the modulus of the
/// worst eigenvalue), for diagnostics.
pub fn stabilizability_margin(r: &NonMinimalRealization, tol: f64) -> Result<(f64, f64)> {
    pbh_margin(&r.a, &r.b, false, tol)
}

/// One inspected non-stable root cluster in the root-set condition.
#[derive(Debug, Clone)]
pub struct RootSetWitness {
    pub lambda: Complex64,
    /// Outputs whose fitted denominator vanishes at this root.
    pub outputs: Vec<usize>,
    /// Stacked real/imaginary numerator values, one column per output.
    pub vectors: Matrix,
    /// Relative smallest singular value of the stacked vectors.
    pub sigma_min_rel: f64,
}

/// Outcome of the root-set stabilizability check.
#[derive(Debug, Clone)]
pub struct StabilizabilityReport {
    pub stabilizable: bool,
    pub witnesses: Vec<RootSetWitness>,
}

/// Root-set stabilizability condition evaluated on the fitted rows: at
/// every non-stable root of the fitted denominators, the stacked
/// real/imaginary numerator values of the owning outputs must be linearly
/// independent. True transfer rows are used to stabilize the root
/// clustering in the presence of tiny fit perturbations.
pub fn prop3_condition(
    rep: &Representation,
    true_rows: &[TransferRow],
    tol: f64,
) -> Result<StabilizabilityReport> {
    let cluster_tol = 1e-6f64;
    let m = rep.n_inputs;

    // collect non-stable roots of each fitted denominator
    let mut candidates: Vec<(usize, Complex64)> = Vec::new();
    for (i, row) in rep.rows.iter().enumerate() {
        let roots = row.denominator().roots()?;
        for r in roots.roots() {
            if r.norm() >= 1.0 - tol && r.im >= -cluster_tol {
                candidates.push((i, *r));
            }
        }
    }

    // snap candidates toward true unstable roots where available
    let mut snap: Vec<Complex64> = Vec::new();
    for row in true_rows {
        if let Ok(roots) = row.den.roots() {
            for r in roots.roots() {
                if r.norm() >= 1.0 - tol && r.im >= -cluster_tol {
                    snap.push(*r);
                }
            }
        }
    }

    // greedy clustering
    let mut clusters: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (i, r) in &candidates {
        let gate = cluster_tol * (1.0 + r.norm());
        let near: Vec<usize> = clusters
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| (c - r).norm() <= gate)
            .map(|(k, _)| k)
            .collect();
        match near.len() {
            0 => {
                let center = snap
                    .iter()
                    .find(|s| (*s - r).norm() <= gate)
                    .copied()
                    .unwrap_or(*r);
                clusters.push((center, vec![*i]));
            }
            1 => clusters[near[0]].1.push(*i),
            _ => {
                return Err(Error::AmbiguousMatch(format!(
                    "root {r} lies within {cluster_tol:.1e} of multiple clusters"
                )))
            }
        }
    }

    let mut witnesses = Vec::new();
    let mut ok = true;
    for (lambda, outputs) in clusters {
        let s = outputs.len();
        let mut vectors = Matrix::zeros(2 * m, s);
        for (col, &i) in outputs.iter().enumerate() {
            for j in 0..m {
                let v = rep.rows[i].numerator(j).eval_complex(lambda);
                vectors[(j, col)] = v.re;
                vectors[(m + j, col)] = v.im;
            }
        }
        let f = matpoly::svd(&vectors)?;
        let smin = f.sigma[f.sigma.len() - 1];
        let rel = smin / f.sigma_max().max(1e-300);
        // a singleton with a vanishing numerator is a (numerically)
        // uncontrollable unstable mode, so it is inspected as well
        let independent = f.sigma_max() > tol && rel > tol && s <= 2 * m;
        if !independent {
            ok = false;
        }
        witnesses.push(RootSetWitness {
            lambda,
            outputs,
            vectors,
            sigma_min_rel: rel,
        });
    }
    Ok(StabilizabilityReport {
        stabilizable: ok,
        witnesses,
    })
}

/// Sufficient condition on the true rows: at every non-stable root shared
/// among the row denominators, the numerator value vectors are linearly
/// independent over the complex numbers.
pub fn cor2_condition2(rows: &[TransferRow], tol: f64) -> Result<bool> {
    let cluster_tol = 1e-6f64;
    let m = rows.first().map(|r| r.num.len()).unwrap_or(0);
    let mut clusters: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.order() == 0 {
            continue;
        }
        for r in row.den.roots()?.roots() {
            if r.norm() < 1.0 - 1e-6 || r.im < -cluster_tol {
                continue;
            }
            let gate = cluster_tol * (1.0 + r.norm());
            match clusters.iter_mut().find(|(c, _)| (*c - r).norm() <= gate) {
                Some((_, v)) => v.push(i),
                None => clusters.push((*r, vec![i])),
            }
        }
    }
    for (lambda, outputs) in clusters {
        let s = outputs.len();
        if s > m {
            return Ok(false);
        }
        let mut re = Matrix::zeros(m, s);
        let mut im = Matrix::zeros(m, s);
        for (col, &i) in outputs.iter().enumerate() {
            for j in 0..m {
                let v = rows[i].num[j].eval_complex(lambda);
                re[(j, col)] = v.re;
                im[(j, col)] = v.im;
            }
        }
        let smin = matpoly::sigma_min_complex(&re, &im)?;
        let smax = matpoly::sigma_max_complex(&re, &im)?;
        if smax <= tol || smin / smax <= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Build the exact representation of a plant (coefficients `latent * row`)
/// from its true transfer rows via the latent-polynomial oracle. This is
/// the noise-free ideal that any data fit under the rank condition
/// converges to; useful when the data route is resolution-limited.
pub fn exact_representation(rows: &[TransferRow], n_window: usize) -> Result<Representation> {
    use crate::ddrep::CoefficientRow;
    let m = rows.first().map(|r| r.num.len()).unwrap_or(0);
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let n_i = row.order();
        if n_window < n_i {
            return Err(Error::InvalidInput(format!(
                "window {n_window} below row order {n_i}"
            )));
        }
        let latent = crate::latentoracle::minimize_cstar(&row.den, &row.num, n_window - n_i)?;
        let dfull = &latent.poly * &row.den;
        let a: Vec<f64> = (0..n_window).map(|k| -dfull.coeff(k)).collect();
        let mut b = vec![Vector::zeros(m); n_window + 1];
        for j in 0..m {
            let nfull = &latent.poly * &row.num[j];
            for (k, bk) in b.iter_mut().enumerate() {
                bk[j] = nfull.coeff(k);
            }
        }
        out.push(CoefficientRow {
            output: i,
            b,
            a,
            fit_residual: 0.0,
            rank_ok: true,
        });
    }
    Ok(Representation {
        n_window,
        n_inputs: m,
        n_outputs: rows.len(),
        rows: out,
    })
}
