//! Restarted GMRES with right preconditioning.
//!
//! The Krylov space is built for `A P^{-1}` and the returned solution is
//! `P^{-1} y`, so the convergence criterion acts on the true residual.
//! Orthogonalization uses modified Gram-Schmidt; the least-squares problem
//! is updated with Givens rotations.

use super::SolverError;

#[derive(Debug, Clone)]
pub struct GmresConfig {
    /// Relative residual tolerance.
    pub tol_rel: f64,
    /// Krylov dimension per restart cycle.
    pub restart: usize,
    /// Cap on the total number of operator applications.
    pub max_total: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            tol_rel: 1e-3,
            restart: 700,
            max_total: 7000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresResult {
    pub x: Vec<f64>,
    /// Operator applications accumulated across restarts.
    pub iterations: usize,
    /// Final relative residual estimate.
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = rhs` with restarted, right-preconditioned GMRES.
///
/// `apply` is the action of `A`; `precond`, when present, applies `P^{-1}`.
pub fn gmres<A, P>(
    mut apply: A,
    rhs: &[f64],
    precond: Option<&P>,
    cfg: &GmresConfig,
) -> Result<GmresResult, SolverError>
where
    A: FnMut(&[f64]) -> Result<Vec<f64>, SolverError>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let n = rhs.len();
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok(GmresResult {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = cfg.tol_rel * b_norm;
    let m = cfg.restart.max(1);

    let mut x = vec![0.0; n];
    let mut total = 0usize;
    let mut last_residual = 1.0;

    loop {
        // true residual at the start of each cycle
        let r = if total == 0 {
            rhs.to_vec()
        } else {
            let ax = apply(&x)?;
            rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
        };
        let beta = norm(&r);
        if beta <= target {
            return Ok(GmresResult {
                x,
                iterations: total,
                residual: beta / b_norm,
            });
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns after Givens elimination
        let mut h_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![beta];
        let mut converged_at: Option<usize> = None;

        for j in 0..m {
            if total >= cfg.max_total {
                return Err(SolverError::GmresMaxIterations {
                    iterations: total,
                    residual: last_residual,
                });
            }
            let z = match precond {
                Some(p) => p(&basis[j]),
                None => basis[j].clone(),
            };
            let mut w = apply(&z)?;
            total += 1;

            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wnorm = norm(&w);
            h[j + 1] = wnorm;

            // apply the accumulated rotations to the new column
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let denom = (h[j] * h[j] + h[j + 1] * h[j + 1]).sqrt();
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[j] / denom, h[j + 1] / denom) };
            cs.push(c);
            sn.push(s);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            h_cols.push(h);

            last_residual = g[j + 1].abs() / b_norm;
            let happy_breakdown = wnorm <= 1e-14 * b_norm;
            if !happy_breakdown {
                basis.push(w.iter().map(|v| v / wnorm).collect());
            }
            if g[j + 1].abs() <= target || happy_breakdown {
                converged_at = Some(j + 1);
                break;
            }
        }

        // solve the small triangular system for the cycle length used
        let k = converged_at.unwrap_or(m);
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= h_cols[l][i] * y[l];
            }
            y[i] = s / h_cols[i][i];
        }
        let mut update = vec![0.0; n];
        for (l, yl) in y.iter().enumerate() {
            for (u, v) in update.iter_mut().zip(&basis[l]) {
                *u += yl * v;
            }
        }
        let update = match precond {
            Some(p) => p(&update),
            None => update,
        };
        for (xi, ui) in x.iter_mut().zip(&update) {
            *xi += ui;
        }

        if converged_at.is_some() {
            return Ok(GmresResult {
                x,
                iterations: total,
                residual: last_residual,
            });
        }
        // otherwise restart
    }
}
