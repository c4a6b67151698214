//! Two-derivative Butcher tableaux of the limiting Hermite-Birkhoff
//! Runge-Kutta methods, orders 4, 6 and 8.

use crate::field::NodalField;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("unsupported quadrature order {0}; available orders are 4, 6 and 8")]
pub struct UnsupportedOrder(pub usize);

/// Stage abscissae and the two weight matrices defining the quadrature
/// `I_l = dt sum_j B1[l][j] R1_j + dt^2 sum_j B2[l][j] R2_j`.
#[derive(Debug, Clone)]
pub struct ButcherTableau {
    /// Stage count.
    pub s: usize,
    /// Quadrature order.
    pub q: usize,
    pub c: Vec<f64>,
    pub b1: Array2<f64>,
    pub b2: Array2<f64>,
}

/// The tableau of the given order.
pub fn tableau(q: usize) -> Result<ButcherTableau, UnsupportedOrder> {
    match q {
        4 => Ok(ButcherTableau {
            s: 2,
            q,
            c: vec![0.0, 1.0],
            b1: Array2::from_shape_vec((2, 2), vec![0.0, 0.0, 0.5, 0.5]).unwrap(),
            b2: Array2::from_shape_vec((2, 2), vec![0.0, 0.0, 1.0 / 12.0, -1.0 / 12.0]).unwrap(),
        }),
        6 => Ok(ButcherTableau {
            s: 3,
            q,
            c: vec![0.0, 0.5, 1.0],
            b1: Array2::from_shape_vec(
                (3, 3),
                vec![
                    0.0,
                    0.0,
                    0.0,
                    101.0 / 480.0,
                    8.0 / 30.0,
                    55.0 / 2400.0,
                    7.0 / 30.0,
                    16.0 / 30.0,
                    7.0 / 30.0,
                ],
            )
            .unwrap(),
            b2: Array2::from_shape_vec(
                (3, 3),
                vec![
                    0.0,
                    0.0,
                    0.0,
                    65.0 / 4800.0,
                    -25.0 / 600.0,
                    -25.0 / 8000.0,
                    5.0 / 300.0,
                    0.0,
                    -5.0 / 300.0,
                ],
            )
            .unwrap(),
        }),
        8 => Ok(ButcherTableau {
            s: 4,
            q,
            c: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            b1: Array2::from_shape_vec(
                (4, 4),
                vec![
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                    6893.0 / 54432.0,
                    313.0 / 2016.0,
                    89.0 / 2016.0,
                    397.0 / 54432.0,
                    223.0 / 1701.0,
                    20.0 / 63.0,
                    13.0 / 63.0,
                    20.0 / 1701.0,
                    31.0 / 224.0,
                    81.0 / 224.0,
                    81.0 / 224.0,
                    31.0 / 224.0,
                ],
            )
            .unwrap(),
            b2: Array2::from_shape_vec(
                (4, 4),
                vec![
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                    1283.0 / 272160.0,
                    -851.0 / 30240.0,
                    -269.0 / 30240.0,
                    -163.0 / 272160.0,
                    43.0 / 8505.0,
                    -16.0 / 945.0,
                    -19.0 / 945.0,
                    -8.0 / 8505.0,
                    19.0 / 3360.0,
                    -9.0 / 1120.0,
                    9.0 / 1120.0,
                    -19.0 / 3360.0,
                ],
            )
            .unwrap(),
        }),
        other => Err(UnsupportedOrder(other)),
    }
}

/// Quadrature of the stage data up to abscissa `c_l` (stage index `l`,
/// zero-based): `I_l = dt sum_j B1[l][j] r1_j + dt^2 sum_j B2[l][j] r2_j`.
pub fn stage_quadrature(
    tab: &ButcherTableau,
    dt: f64,
    r1_stages: &[NodalField],
    r2_stages: &[NodalField],
    l: usize,
) -> NodalField {
    assert_eq!(r1_stages.len(), tab.s);
    assert_eq!(r2_stages.len(), tab.s);
    let mut out = NodalField::zeros_like(&r1_stages[0]);
    for j in 0..tab.s {
        let w1 = dt * tab.b1[[l, j]];
        if w1 != 0.0 {
            out.axpy(w1, &r1_stages[j]);
        }
        let w2 = dt * dt * tab.b2[[l, j]];
        if w2 != 0.0 {
            out.axpy(w2, &r2_stages[j]);
        }
    }
    out
}
