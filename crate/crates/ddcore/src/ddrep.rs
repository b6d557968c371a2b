//! The data-driven representation: per-output coefficient rows fitted via
//! truncated pseudoinverse of the Hankel data blocks, recursive
//! prediction, pole analysis, and latent-polynomial factorization against
//! known true dynamics.

use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::datagen::DataBlocks;
use crate::error::{Error, Result};
use crate::lti::TransferRow;
use crate::matpoly::{self, ComplexRootSet, Matrix, Polynomial, Vector};

/// Fitted coefficients for one output: `y_i(t) = sum_k a_k y_i(t-N+k)
/// + sum_{k<N} b_k' u(t-N+k) + b_N' u(t)`.
#[derive(Debug, Clone)]
pub struct CoefficientRow {
    pub output: usize,
    /// `b_0 .. b_N`, each of length m.
    pub b: Vec<Vector>,
    /// `a_0 .. a_{N-1}`.
    pub a: Vec<f64>,
    /// Max-norm residual of `Y_f,i - row * H_i` at fit time.
    pub fit_residual: f64,
    /// True when the data matrix had full expected rank at the truncation
    /// used for the fit.
    pub rank_ok: bool,
}

impl CoefficientRow {
    pub fn n_window(&self) -> usize {
        self.a.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.b[0].len()
    }

    /// Denominator polynomial `z^N - sum_k a_k z^k`.
    pub fn denominator(&self) -> Polynomial {
        let n = self.n_window();
        let mut c = vec![0.0; n + 1];
        for (k, ak) in self.a.iter().enumerate() {
            c[k] = -ak;
        }
        c[n] = 1.0;
        Polynomial::new(c)
    }

    /// Numerator polynomial of input `j`: `sum_k b_{k,j} z^k`.
    pub fn numerator(&self, input: usize) -> Polynomial {
        Polynomial::new(self.b.iter().map(|bk| bk[input]).collect())
    }

    /// Flat row `[b_0', ..., b_N', a_0, ..., a_{N-1}]`.
    pub fn flat(&self) -> Vector {
        let m = self.n_inputs();
        let n = self.n_window();
        let mut v = Vector::zeros(m * (n + 1) + n);
        for (k, bk) in self.b.iter().enumerate() {
            for j in 0..m {
                v[k * m + j] = bk[j];
            }
        }
        for (k, ak) in self.a.iter().enumerate() {
            v[m * (n + 1) + k] = *ak;
        }
        v
    }

    fn from_flat(row: &Matrix, output: usize, n: usize, m: usize, residual: f64, rank_ok: bool) -> Self {
        let b = (0..=n)
            .map(|k| Vector::from_fn(m, |j, _| row[(0, k * m + j)]))
            .collect();
        let a = (0..n).map(|k| row[(0, m * (n + 1) + k)]).collect();
        CoefficientRow {
            output,
            b,
            a,
            fit_residual: residual,
            rank_ok,
        }
    }
}

/// The full data-driven representation: one coefficient row per output.
#[derive(Debug, Clone)]
pub struct Representation {
    pub n_window: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub rows: Vec<CoefficientRow>,
}

/// Regressor for one output channel at one time step.
#[derive(Debug, Clone)]
pub struct RegressorStack {
    /// Past inputs `u(t-N .. t-1)`, an `m x N` matrix.
    pub u_past: Matrix,
    /// Current input `u(t)`.
    pub u_now: Vector,
    /// Past outputs of this channel, length N.
    pub y_past: Vector,
}

/// Latent factorization of a fitted row against the true transfer row.
#[derive(Debug, Clone)]
pub struct LatentFactorization {
    /// The true row denominator used for the division.
    pub system_den: Polynomial,
    /// Monic latent cofactor of degree `N - n_i`.
    pub latent: Polynomial,
    pub denominator_residual: f64,
    pub numerator_residual: f64,
}

fn fit_row(blocks: &DataBlocks, output: usize, tau: Option<f64>) -> Result<CoefficientRow> {
    let h = blocks.h_i(output);
    let t = tau.unwrap_or_else(|| matpoly::default_tolerance(&h));
    let f = matpoly::svd(&h)?;
    let pinv = matpoly::pinv_from_factors(&f, t)?;
    let yf = blocks.y_future_i(output);
    let row = &yf * pinv;
    let resid = (&yf - &row * &h).amax();
    let m = blocks.n_inputs();
    let n = blocks.n_window;
    // full expected rank is m(N+1) + n_i, unknown here; flag against the
    // weaker necessary condition rank >= m(N+1)
    let rank_ok = f.rank_at(t) >= m * (n + 1) && resid <= 1e-8 * yf.amax().max(1e-300);
    Ok(CoefficientRow::from_flat(&row, output, n, m, resid, rank_ok))
}

/// Fit all output rows with the truncated pseudoinverse; `tau = None`
/// uses the per-matrix default tolerance.
pub fn fit(blocks: &DataBlocks, tau: Option<f64>) -> Result<Representation> {
    if blocks.n_cols() == 0 {
        return Err(Error::InvalidInput("empty data blocks".into()));
    }
    let rows = (0..blocks.n_outputs())
        .map(|i| fit_row(blocks, i, tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(Representation {
        n_window: blocks.n_window,
        n_inputs: blocks.n_inputs(),
        n_outputs: blocks.n_outputs(),
        rows,
    })
}

/// Fit a single-output representation through a seeded random generalized
/// inverse instead of the Moore-Penrose inverse.
pub fn fit_with_ginverse(blocks: &DataBlocks, seed: u64) -> Result<Representation> {
    if blocks.n_outputs() != 1 {
        return Err(Error::Unsupported(
            "generalized-inverse fit is single-output only".into(),
        ));
    }
    let h = blocks.h_i(0);
    let g = matpoly::random_generalized_inverse(&h, seed)?;
    let yf = blocks.y_future_i(0);
    let row = &yf * g;
    let resid = (&yf - &row * &h).amax();
    let rank_ok = resid <= 1e-8 * yf.amax().max(1e-300);
    Ok(Representation {
        n_window: blocks.n_window,
        n_inputs: blocks.n_inputs(),
        n_outputs: 1,
        rows: vec![CoefficientRow::from_flat(
            &row,
            0,
            blocks.n_window,
            blocks.n_inputs(),
            resid,
            rank_ok,
        )],
    })
}

/// One prediction step. `regs` supplies one regressor per output.
pub fn step(rep: &Representation, regs: &[RegressorStack]) -> Result<Vector> {
    if regs.len() != rep.n_outputs {
        return Err(Error::InvalidInput("one regressor per output required".into()));
    }
    let n = rep.n_window;
    let m = rep.n_inputs;
    let mut y = Vector::zeros(rep.n_outputs);
    for (i, (row, reg)) in rep.rows.iter().zip(regs).enumerate() {
        if reg.u_past.ncols() != n || reg.u_past.nrows() != m || reg.y_past.len() != n {
            return Err(Error::InvalidInput("regressor shape mismatch".into()));
        }
        let mut v = row.b[n].dot(&reg.u_now);
        for k in 0..n {
            v += row.a[k] * reg.y_past[k];
            v += row.b[k].dot(&reg.u_past.column(k).into_owned());
        }
        y[i] = v;
    }
    Ok(y)
}

/// Run the representation recursively over the input sequence `u`
/// (`m x T`), starting from the length-N initialization window
/// `(u_init, y_init)`. Predicted outputs are fed back into the regressor.
pub fn predict_recursive(
    rep: &Representation,
    u: &Matrix,
    u_init: &Matrix,
    y_init: &Matrix,
) -> Result<Matrix> {
    let n = rep.n_window;
    let m = rep.n_inputs;
    let p = rep.n_outputs;
    if u.nrows() != m || u_init.shape() != (m, n) || y_init.shape() != (p, n) {
        return Err(Error::InvalidInput("prediction window shape mismatch".into()));
    }
    let steps = u.ncols();
    let mut uw = u_init.clone();
    let mut yw = y_init.clone();
    let mut out = Matrix::zeros(p, steps);
    for t in 0..steps {
        let u_now = u.column(t).into_owned();
        let mut yt = Vector::zeros(p);
        for (i, row) in rep.rows.iter().enumerate() {
            let mut v = row.b[n].dot(&u_now);
            for k in 0..n {
                v += row.a[k] * yw[(i, k)];
                v += row.b[k].dot(&uw.column(k).into_owned());
            }
            yt[i] = v;
        }
        out.set_column(t, &yt);
        // shift the windows
        for k in 0..n - 1 {
            let copy_u = uw.column(k + 1).into_owned();
            uw.set_column(k, &copy_u);
            for i in 0..p {
                yw[(i, k)] = yw[(i, k + 1)];
            }
        }
        uw.set_column(n - 1, &u_now);
        for i in 0..p {
            yw[(i, n - 1)] = yt[i];
        }
    }
    Ok(out)
}

/// Poles of output row `i`: roots of `z^N - sum_k a_k z^k`.
pub fn poles(rep: &Representation, output: usize) -> Result<ComplexRootSet> {
    let row = rep
        .rows
        .get(output)
        .ok_or_else(|| Error::InvalidInput(format!("no output {output}")))?;
    row.denominator().roots()
}

/// Factor the fitted denominator as `latent * D_i` against the true row,
/// and check the numerators against `latent * N_i`.
pub fn latent_factorize(
    rep: &Representation,
    output: usize,
    true_row: &TransferRow,
    tol: f64,
) -> Result<LatentFactorization> {
    let row = rep
        .rows
        .get(output)
        .ok_or_else(|| Error::InvalidInput(format!("no output {output}")))?;
    let n = rep.n_window;
    let n_i = true_row.order();
    if n_i > n {
        return Err(Error::InvalidInput("window shorter than the row order".into()));
    }
    let den = row.denominator();
    let (latent, den_res) = den.div_exact(&true_row.den, tol)?;
    if den_res > tol {
        return Err(Error::FactorizationFailed {
            residual: den_res,
            tol,
        });
    }
    let mut num_res = 0.0f64;
    for j in 0..rep.n_inputs {
        let fitted = row.numerator(j);
        let expect = &latent * &true_row.num[j];
        num_res = num_res.max(fitted.sub(&expect).max_norm());
    }
    if num_res > tol {
        return Err(Error::FactorizationFailed {
            residual: num_res,
            tol,
        });
    }
    if latent.degree() != Some(n - n_i) && !(latent.degree().is_none() && n == n_i) {
        return Err(Error::FactorizationFailed {
            residual: den_res.max(num_res),
            tol,
        });
    }
    Ok(LatentFactorization {
        system_den: true_row.den.clone(),
        latent: latent.monic()?,
        denominator_residual: den_res,
        numerator_residual: num_res,
    })
}

/// Split `all_poles` into (system, latent) by greedy nearest matching of
/// the known system roots; everything unmatched is latent.
pub fn classify_poles(
    all_poles: &ComplexRootSet,
    system_roots: &ComplexRootSet,
    tol: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if all_poles.len() < system_roots.len() {
        return Err(Error::InvalidInput(
            "fewer candidate poles than system roots".into(),
        ));
    }
    let idx = all_poles.greedy_match(system_roots.roots(), tol)?;
    let mut latent = Vec::new();
    let mut system = Vec::new();
    for (i, c) in all_poles.roots().iter().enumerate() {
        if idx.contains(&i) {
            system.push(*c);
        } else {
            latent.push(*c);
        }
    }
    Ok((system, latent))
}

/// Serialize a representation as a key-value text document; floats carry
/// 17 significant digits so the round trip is bit exact.
pub fn to_text(rep: &Representation) -> String {
    let mut s = String::new();
    s.push_str(&format!("n = {}\n", rep.n_window));
    s.push_str(&format!("m = {}\n", rep.n_inputs));
    s.push_str(&format!("p = {}\n", rep.n_outputs));
    for row in &rep.rows {
        s.push_str("\n[[row]]\n");
        s.push_str(&format!("output = {}\n", row.output));
        let a: Vec<String> = row.a.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&format!("a = [{}]\n", a.join(", ")));
        let b: Vec<String> = row
            .b
            .iter()
            .flat_map(|bk| bk.iter().map(|v| format!("{v:.16e}")))
            .collect();
        s.push_str(&format!("b = [{}]\n", b.join(", ")));
    }
    s
}

pub fn write_text(rep: &Representation, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(to_text(rep).as_bytes())?;
    Ok(())
}

/// Parse the representation text format written by [`to_text`].
pub fn from_text(text: &str) -> Result<Representation> {
    let mut n = None;
    let mut m = None;
    let mut p = None;
    let mut rows: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut current: Option<(usize, Vec<f64>, Vec<f64>)> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[[row]]" {
            if let Some(r) = current.take() {
                rows.push(r);
            }
            current = Some((usize::MAX, vec![], vec![]));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key = value, got '{line}'")))?;
        let key = key.trim();
        let value = value.trim();
        let parse_usize =
            |v: &str| v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
        let parse_list = |v: &str| -> Result<Vec<f64>> {
            let inner = v
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("expected [..] list, got '{v}'")))?;
            if inner.trim().is_empty() {
                return Ok(vec![]);
            }
            inner
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect()
        };
        match (key, &mut current) {
            ("n", None) => n = Some(parse_usize(value)?),
            ("m", None) => m = Some(parse_usize(value)?),
            ("p", None) => p = Some(parse_usize(value)?),
            ("output", Some(r)) => r.0 = parse_usize(value)?,
            ("a", Some(r)) => r.1 = parse_list(value)?,
            ("b", Some(r)) => r.2 = parse_list(value)?,
            _ => return Err(Error::Parse(format!("unexpected key '{key}'"))),
        }
    }
    if let Some(r) = current.take() {
        rows.push(r);
    }
    let (n, m, p) = match (n, m, p) {
        (Some(n), Some(m), Some(p)) => (n, m, p),
        _ => return Err(Error::Parse("missing n, m, or p".into())),
    };
    if rows.len() != p {
        return Err(Error::Parse(format!("expected {p} rows, found {}", rows.len())));
    }
    let rows = rows
        .into_iter()
        .map(|(output, a, bflat)| {
            if a.len() != n || bflat.len() != m * (n + 1) || output >= p {
                return Err(Error::Parse("row shape mismatch".into()));
            }
            let b = (0..=n)
                .map(|k| Vector::from_fn(m, |j, _| bflat[k * m + j]))
                .collect();
            Ok(CoefficientRow {
                output,
                b,
                a,
                fit_residual: 0.0,
                rank_ok: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Representation {
        n_window: n,
        n_inputs: m,
        n_outputs: p,
        rows,
    })
}

pub fn read_text(path: &Path) -> Result<Representation> {
    from_text(&std::fs::read_to_string(path)?)
}
