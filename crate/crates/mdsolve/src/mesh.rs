//! Periodic Cartesian 2D meshes.
//!
//! Elements are axis-aligned rectangles of uniform size, so all metric
//! terms are constants: the geometric Jacobian is `dx*dy/4` and the
//! surface elements are `dy/2` (xi1 faces) and `dx/2` (xi2 faces).

use thiserror::Error;

/// The four faces of a quadrilateral element in reference space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    /// `xi_1 = -1`, outward normal (-1, 0).
    West = 0,
    /// `xi_1 = +1`, outward normal (+1, 0).
    East = 1,
    /// `xi_2 = -1`, outward normal (0, -1).
    South = 2,
    /// `xi_2 = +1`, outward normal (0, +1).
    North = 3,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::West, Face::East, Face::South, Face::North];

    /// Outward unit normal in physical coordinates.
    #[inline]
    pub fn normal(self) -> (f64, f64) {
        match self {
            Face::West => (-1.0, 0.0),
            Face::East => (1.0, 0.0),
            Face::South => (0.0, -1.0),
            Face::North => (0.0, 1.0),
        }
    }

    /// The face of the neighboring element that touches this face.
    #[inline]
    pub fn opposite(self) -> Face {
        match self {
            Face::West => Face::East,
            Face::East => Face::West,
            Face::South => Face::North,
            Face::North => Face::South,
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("element counts must be positive, got nx={nx}, ny={ny}")]
    ZeroElements { nx: usize, ny: usize },
    #[error("degenerate bounds: [{x_min}, {x_max}] x [{y_min}, {y_max}]")]
    DegenerateBounds {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
}

/// Uniform, fully periodic Cartesian mesh.
#[derive(Debug, Clone)]
pub struct CartesianMesh {
    pub nx: usize,
    pub ny: usize,
    pub bounds: (f64, f64, f64, f64),
    pub dx: f64,
    pub dy: f64,
    /// Geometric Jacobian of the reference mapping, `dx*dy/4`.
    pub jgeo: f64,
    /// Surface element on xi1 faces (west/east), `dy/2`.
    pub shat_xi1: f64,
    /// Surface element on xi2 faces (south/north), `dx/2`.
    pub shat_xi2: f64,
    /// `neighbor[e][f]` is the element across face `f` of element `e`.
    neighbor: Vec<[usize; 4]>,
}

impl CartesianMesh {
    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    /// Row-major element index of cell `(p, q)`.
    #[inline]
    pub fn element_index(&self, p: usize, q: usize) -> usize {
        q * self.nx + p
    }

    /// Neighbor element across the given face, under periodic wrap.
    #[inline]
    pub fn neighbor(&self, element: usize, face: Face) -> usize {
        self.neighbor[element][face as usize]
    }

    /// Surface element for the given face.
    #[inline]
    pub fn surface(&self, face: Face) -> f64 {
        match face {
            Face::West | Face::East => self.shat_xi1,
            Face::South | Face::North => self.shat_xi2,
        }
    }

    /// Lower-left corner of an element.
    pub fn element_origin(&self, element: usize) -> (f64, f64) {
        let p = element % self.nx;
        let q = element / self.nx;
        (
            self.bounds.0 + p as f64 * self.dx,
            self.bounds.2 + q as f64 * self.dy,
        )
    }

    /// Physical coordinates of the reference point `(xi1, xi2)` in an element.
    pub fn map_to_physical(&self, element: usize, xi1: f64, xi2: f64) -> (f64, f64) {
        let (x0, y0) = self.element_origin(element);
        (
            x0 + (xi1 + 1.0) * 0.5 * self.dx,
            y0 + (xi2 + 1.0) * 0.5 * self.dy,
        )
    }

    /// Total domain area.
    pub fn area(&self) -> f64 {
        (self.bounds.1 - self.bounds.0) * (self.bounds.3 - self.bounds.2)
    }
}

/// Build a periodic Cartesian mesh over the rectangle
/// `[x_min, x_max] x [y_min, y_max]`.
pub fn build_cartesian_mesh(
    nx: usize,
    ny: usize,
    bounds: (f64, f64, f64, f64),
) -> Result<CartesianMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::ZeroElements { nx, ny });
    }
    let (x_min, x_max, y_min, y_max) = bounds;
    if !(x_max > x_min) || !(y_max > y_min) {
        return Err(MeshError::DegenerateBounds {
            x_min,
            x_max,
            y_min,
            y_max,
        });
    }
    let dx = (x_max - x_min) / nx as f64;
    let dy = (y_max - y_min) / ny as f64;

    let mut neighbor = Vec::with_capacity(nx * ny);
    for q in 0..ny {
        for p in 0..nx {
            let west = q * nx + (p + nx - 1) % nx;
            let east = q * nx + (p + 1) % nx;
            let south = ((q + ny - 1) % ny) * nx + p;
            let north = ((q + 1) % ny) * nx + p;
            neighbor.push([west, east, south, north]);
        }
    }

    Ok(CartesianMesh {
        nx,
        ny,
        bounds,
        dx,
        dy,
        jgeo: dx * dy / 4.0,
        shat_xi1: dy / 2.0,
        shat_xi2: dx / 2.0,
        neighbor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;

    #[test]
    fn single_element_is_self_periodic() {
        let m = build_cartesian_mesh(1, 1, (-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(m.jgeo, 1.0);
        assert_eq!(m.shat_xi1, 1.0);
        assert_eq!(m.shat_xi2, 1.0);
        for f in Face::ALL {
            assert_eq!(m.neighbor(0, f), 0);
        }
    }

    #[test]
    fn metric_terms_sixteen_squared() {
        let m = build_cartesian_mesh(16, 16, (-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(m.dx, 0.125);
        assert_eq!(m.dy, 0.125);
        assert_eq!(m.jgeo, 0.00390625);
        assert_eq!(m.shat_xi1, 0.0625);
        assert_eq!(m.shat_xi2, 0.0625);
    }

    #[test]
    fn periodic_wrap_west_of_first_column() {
        let m = build_cartesian_mesh(16, 16, (-1.0, 1.0, -1.0, 1.0)).unwrap();
        let e = m.element_index(0, 0);
        assert_eq!(m.neighbor(e, Face::West), m.element_index(15, 0));
        assert_eq!(Face::West.normal(), (-1.0, 0.0));
    }

    #[test]
    fn connectivity_is_an_involution() {
        let m = build_cartesian_mesh(5, 3, (0.0, 2.0, -1.0, 1.0)).unwrap();
        for e in 0..m.n_elements() {
            for f in Face::ALL {
                let nb = m.neighbor(e, f);
                assert_eq!(m.neighbor(nb, f.opposite()), e, "e={e} f={f:?}");
                let n = f.normal();
                let on = f.opposite().normal();
                assert_eq!(n.0, -on.0);
                assert_eq!(n.1, -on.1);
            }
        }
    }

    #[test]
    fn quadrature_of_one_gives_domain_area() {
        let m = build_cartesian_mesh(7, 4, (-1.0, 3.0, 0.5, 2.0)).unwrap();
        let b = build_basis(5);
        let mut total = 0.0;
        for _e in 0..m.n_elements() {
            for i in 0..b.n_nodes() {
                for j in 0..b.n_nodes() {
                    total += m.jgeo * b.weights[i] * b.weights[j];
                }
            }
        }
        assert!((total - m.area()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_cartesian_mesh(0, 1, (-1.0, 1.0, -1.0, 1.0)).is_err());
        assert!(build_cartesian_mesh(2, 2, (1.0, 1.0, -1.0, 1.0)).is_err());
        assert!(build_cartesian_mesh(2, 2, (-1.0, 1.0, 2.0, 1.0)).is_err());
    }
}
