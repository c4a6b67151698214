//! One-dimensional Gauss-Legendre collocation data.
//!
//! Holds everything the tensor-product DGSEM needs from the reference
//! interval [-1, 1]: quadrature nodes and weights, the weak-form derivative
//! matrix and the boundary interpolation vectors.

use ndarray::{Array1, Array2};

/// Newton tolerance for the Legendre root solve.
const NODE_TOL: f64 = 1e-15;

/// Gauss-Legendre collocation basis of degree `n`.
///
/// The weak-form derivative matrix is `dhat = -M^{-1} D^T M` with
/// `M = diag(weights)` and `D` the nodal differentiation matrix, i.e.
/// `dhat[i][j] = -(w_j / w_i) * l_i'(xi_j)`. The boundary vectors store
/// `lhat_i(x) = l_i(x) / w_i` at `x = -1` and `x = +1`.
#[derive(Debug, Clone)]
pub struct Basis {
    /// Polynomial degree.
    pub degree: usize,
    /// Quadrature nodes, strictly increasing in (-1, 1).
    pub nodes: Array1<f64>,
    /// Quadrature weights, summing to 2.
    pub weights: Array1<f64>,
    /// Weak-form derivative matrix.
    pub dhat: Array2<f64>,
    /// Nodal differentiation matrix `d[i][j] = l_j'(xi_i)`.
    pub diff: Array2<f64>,
    /// `l_i(-1)`.
    pub l_left: Array1<f64>,
    /// `l_i(+1)`.
    pub l_right: Array1<f64>,
    /// `l_i(-1) / w_i`.
    pub lhat_left: Array1<f64>,
    /// `l_i(+1) / w_i`.
    pub lhat_right: Array1<f64>,
}

impl Basis {
    /// Number of nodes per direction.
    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }
}

/// Legendre polynomial `P_n` and its derivative at `x`, by the three-term
/// recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // derivative from P_n and P_{n-1}
    let dp = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss-Legendre nodes and weights with `n` points, i.e. the roots of
/// `P_n`. Nodes are symmetrized about the origin.
fn gauss_legendre(n: usize) -> (Array1<f64>, Array1<f64>) {
    assert!(n >= 1);
    let mut nodes = Array1::zeros(n);
    let mut weights = Array1::zeros(n);
    if n == 1 {
        nodes[0] = 0.0;
        weights[0] = 2.0;
        return (nodes, weights);
    }
    for k in 0..n {
        // classic asymptotic initial guess, then Newton on P_n
        let mut x = -(std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < NODE_TOL {
                break;
            }
        }
        nodes[k] = x;
    }
    // enforce exact symmetry about zero
    for k in 0..n / 2 {
        let s = 0.5 * (nodes[n - 1 - k] - nodes[k]);
        nodes[k] = -s;
        nodes[n - 1 - k] = s;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    for k in 0..n {
        let (_, dp) = legendre(n, nodes[k]);
        weights[k] = 2.0 / ((1.0 - nodes[k] * nodes[k]) * dp * dp);
    }
    (nodes, weights)
}

/// Barycentric interpolation weights for the node set.
fn barycentric_weights(nodes: &Array1<f64>) -> Array1<f64> {
    let n = nodes.len();
    let mut b = Array1::from_elem(n, 1.0);
    for i in 0..n {
        for k in 0..n {
            if k != i {
                b[i] *= nodes[i] - nodes[k];
            }
        }
        b[i] = 1.0 / b[i];
    }
    b
}

/// Lagrange basis values `l_i(x)` at a point outside the node set.
fn lagrange_at(nodes: &Array1<f64>, bary: &Array1<f64>, x: f64) -> Array1<f64> {
    let n = nodes.len();
    let mut vals = Array1::zeros(n);
    let mut denom = 0.0;
    for i in 0..n {
        vals[i] = bary[i] / (x - nodes[i]);
        denom += vals[i];
    }
    vals.mapv_inplace(|v| v / denom);
    vals
}

/// Build the collocation data for polynomial degree `n`.
pub fn build_basis(n: usize) -> Basis {
    let (nodes, weights) = gauss_legendre(n + 1);
    let np = n + 1;
    let bary = barycentric_weights(&nodes);

    // nodal differentiation matrix with the negative-sum diagonal
    let mut diff = Array2::zeros((np, np));
    for i in 0..np {
        let mut row_sum = 0.0;
        for j in 0..np {
            if i != j {
                diff[[i, j]] = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                row_sum += diff[[i, j]];
            }
        }
        diff[[i, i]] = -row_sum;
    }

    // weak-form operator dhat = -M^{-1} D^T M
    let mut dhat = Array2::zeros((np, np));
    for i in 0..np {
        for j in 0..np {
            dhat[[i, j]] = -(weights[j] / weights[i]) * diff[[j, i]];
        }
    }

    let l_left = lagrange_at(&nodes, &bary, -1.0);
    let l_right = lagrange_at(&nodes, &bary, 1.0);
    let lhat_left = &l_left / &weights;
    let lhat_right = &l_right / &weights;

    Basis {
        degree: n,
        nodes,
        weights,
        dhat,
        diff,
        l_left,
        l_right,
        lhat_left,
        lhat_right,
    }
}
