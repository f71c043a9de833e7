//! P1 finite element matrices for `-Δu + εu = f` with homogeneous Neumann data.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use super::grid::{Cells, Dim, Grid};
use crate::error::{invalid, Error, Result};

/// Assembled stiffness, mass and boundary-mass matrices on one grid, plus a
/// Cholesky factorization of `L + εM` shared by every solve.
///
/// The boundary mass is also kept as a dense matrix restricted to the
/// boundary nodes (in the order of [`Grid::boundary_nodes`]), together with
/// its symmetric square root.
#[derive(Debug, Clone)]
pub struct FemSystem {
    grid: Grid,
    epsilon: f64,
    stiffness: CscMatrix<f64>,
    mass: CscMatrix<f64>,
    boundary_mass: CscMatrix<f64>,
    boundary_block: DMatrix<f64>,
    sqrt_boundary_block: DMatrix<f64>,
    factor: CscCholesky<f64>,
}

impl FemSystem {
    pub fn assemble(grid: Grid, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let n = grid.num_nodes();
        let mut stiff = CooMatrix::new(n, n);
        let mut mass = CooMatrix::new(n, n);

        match grid.cells() {
            Cells::Intervals(cells) => {
                for (c, &[a, b]) in cells.iter().enumerate() {
                    let h = grid.cell_measure(c);
                    if !(h > 0.0) {
                        return Err(Error::Assembly(format!("degenerate interval {c}")));
                    }
                    let idx = [a, b];
                    let ke = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
                    let me = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
                    for r in 0..2 {
                        for s in 0..2 {
                            stiff.push(idx[r], idx[s], ke[r][s]);
                            mass.push(idx[r], idx[s], me[r][s]);
                        }
                    }
                }
            }
            Cells::Triangles(cells) => {
                for (c, tri) in cells.iter().enumerate() {
                    let area = grid.cell_measure(c);
                    if !(area > 0.0) {
                        return Err(Error::Assembly(format!(
                            "triangle {c} has non-positive area {area:e}"
                        )));
                    }
                    // the 2D P1 stiffness is scale invariant, so integer lattice
                    // coordinates give the same element matrix without rounding
                    let p = tri.map(|i| grid.lattice_position(i));
                    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
                    let g = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
                    let twice_area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                        - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
                    for r in 0..3 {
                        for s in 0..3 {
                            let k = (b[r] * b[s] + g[r] * g[s]) / (2.0 * twice_area);
                            let m = if r == s { area / 6.0 } else { area / 12.0 };
                            stiff.push(tri[r], tri[s], k);
                            mass.push(tri[r], tri[s], m);
                        }
                    }
                }
            }
        }

        let bnodes = grid.boundary_nodes();
        let mut bmass = CooMatrix::new(n, n);
        let mut block = DMatrix::zeros(bnodes.len(), bnodes.len());
        let local = |node: usize| bnodes.binary_search(&node).expect("boundary node");
        match grid.dim() {
            // point evaluation at both endpoints
            Dim::One => {
                for (r, &node) in bnodes.iter().enumerate() {
                    bmass.push(node, node, 1.0);
                    block[(r, r)] = 1.0;
                }
            }
            Dim::Two => {
                let xy = grid.coords();
                for [a, b] in grid.boundary_edges() {
                    let len = ((xy[a][0] - xy[b][0]).powi(2) + (xy[a][1] - xy[b][1]).powi(2)).sqrt();
                    let idx = [a, b];
                    for r in 0..2 {
                        for s in 0..2 {
                            let v = if r == s { len / 3.0 } else { len / 6.0 };
                            bmass.push(idx[r], idx[s], v);
                            block[(local(idx[r]), local(idx[s]))] += v;
                        }
                    }
                }
            }
        }

        let stiffness = CscMatrix::from(&stiff);
        let mass = CscMatrix::from(&mass);
        let boundary_mass = CscMatrix::from(&bmass);
        let sqrt_boundary_block = symmetric_sqrt(&block);

        let operator = &stiffness + &(&mass * epsilon);
        let factor = CscCholesky::factor(&operator)
            .map_err(|e| Error::Assembly(format!("Cholesky of L + eps*M failed: {e:?}")))?;

        Ok(FemSystem {
            grid,
            epsilon,
            stiffness,
            mass,
            boundary_mass,
            boundary_block: block,
            sqrt_boundary_block,
            factor,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn stiffness(&self) -> &CscMatrix<f64> {
        &self.stiffness
    }

    pub fn mass(&self) -> &CscMatrix<f64> {
        &self.mass
    }

    pub fn boundary_mass(&self) -> &CscMatrix<f64> {
        &self.boundary_mass
    }

    /// `M_∂` restricted to boundary rows and columns.
    pub fn boundary_block(&self) -> &DMatrix<f64> {
        &self.boundary_block
    }

    /// Symmetric PSD square root of [`Self::boundary_block`].
    pub fn sqrt_boundary_block(&self) -> &DMatrix<f64> {
        &self.sqrt_boundary_block
    }

    /// Solves `(L + εM) u = rhs` for every column of `rhs`.
    pub fn solve_state(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(rhs)
    }

    /// Load vector `∫ f ψ_k` for a field that is constant on every grid cell.
    ///
    /// A P1 hat function integrates to `|cell| / (dim + 1)` over each cell
    /// it touches, so this is exact for piecewise-constant sources.
    pub fn cell_load(&self, cell_values: &DVector<f64>) -> Result<DVector<f64>> {
        let g = &self.grid;
        if cell_values.len() != g.num_cells() {
            return Err(invalid(format!(
                "expected {} cell values, got {}",
                g.num_cells(),
                cell_values.len()
            )));
        }
        let mut load = DVector::zeros(g.num_nodes());
        let share = 1.0 / (g.dim().as_usize() + 1) as f64;
        for (c, &v) in cell_values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let w = v * g.cell_measure(c) * share;
            for &n in g.cell_nodes(c) {
                load[n] += w;
            }
        }
        Ok(load)
    }

    /// Values of a nodal vector at the boundary nodes.
    pub fn restrict_to_boundary(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.grid.boundary_nodes().len(),
            self.grid.boundary_nodes().iter().map(|&i| u[i]),
        )
    }
}

/// Square root of a symmetric PSD matrix with negative eigenvalues clamped to 0.
pub fn symmetric_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, r) in roots.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*r);
    }
    let s = scaled * q.transpose();
    // symmetrize away rounding
    (&s + s.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &CscMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from(m)
    }

    #[test]
    fn stiffness_of_three_node_interval() {
        let g = Grid::new(Dim::One, 3).unwrap();
        let sys = FemSystem::assemble(g, 1.0).unwrap();
        let l = dense(sys.stiffness());
        let expected = DMatrix::from_row_slice(3, 3, &[2.0, -2.0, 0.0, -2.0, 4.0, -2.0, 0.0, -2.0, 2.0]);
        assert_eq!(l, expected);
        let ones = DVector::from_element(3, 1.0);
        assert_eq!(&l * ones, DVector::zeros(3));
    }

    #[test]
    fn constants_in_stiffness_kernel_exactly() {
        for k in [3, 4, 9, 17] {
            let sys = FemSystem::assemble(Grid::new(Dim::Two, k).unwrap(), 1.0).unwrap();
            let l = dense(sys.stiffness());
            let ones = DVector::from_element(k * k, 1.0);
            assert_eq!((&l * &ones).amax(), 0.0, "k = {k}");
            assert_eq!((&l - l.transpose()).amax(), 0.0);
        }
    }

    #[test]
    fn mass_totals_match_measures() {
        for k in [3, 5, 8] {
            let sys = FemSystem::assemble(Grid::new(Dim::Two, k).unwrap(), 1.0).unwrap();
            let total: f64 = dense(sys.mass()).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let btotal: f64 = dense(sys.boundary_mass()).iter().sum();
            assert!((btotal - 4.0).abs() < 1e-10);
            assert!((sys.boundary_block().sum() - 4.0).abs() < 1e-10);
        }
        let sys = FemSystem::assemble(Grid::new(Dim::One, 9).unwrap(), 1.0).unwrap();
        assert!((dense(sys.boundary_mass()).sum() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_mass_of_3x3_grid_by_edges() {
        // eight edges of length 1/2, each contributes (1/2)(1/3+1/3+1/6+1/6) = 1/2
        let sys = FemSystem::assemble(Grid::new(Dim::Two, 3).unwrap(), 1.0).unwrap();
        let per_edge = 0.5 * (2.0 / 3.0 + 2.0 / 6.0);
        assert!((sys.boundary_block().sum() - 8.0 * per_edge).abs() < 1e-10);
        assert!((sys.boundary_block().sum() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn mass_is_positive_definite_and_sqrt_is_exact() {
        let sys = FemSystem::assemble(Grid::new(Dim::Two, 9).unwrap(), 1.0).unwrap();
        assert!(CscCholesky::factor(sys.mass()).is_ok());
        let s = sys.sqrt_boundary_block();
        let err = (s * s - sys.boundary_block()).amax();
        assert!(err < 1e-10, "sqrt error {err}");
        assert_eq!((s - s.transpose()).amax(), 0.0);
        // load of f = 1 integrates to |Ω|
        let ones = DVector::from_element(sys.grid().num_cells(), 1.0);
        let load = sys.cell_load(&ones).unwrap();
        assert!((load.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_mass_supported_on_boundary() {
        let sys = FemSystem::assemble(Grid::new(Dim::Two, 6).unwrap(), 1.0).unwrap();
        let bm = dense(sys.boundary_mass());
        let b = sys.grid().boundary_nodes();
        for i in 0..bm.nrows() {
            if b.binary_search(&i).is_err() {
                assert!(bm.row(i).iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let g = Grid::new(Dim::Two, 3).unwrap();
        assert!(FemSystem::assemble(g.clone(), 0.0).is_err());
        assert!(FemSystem::assemble(g, -1.0).is_err());
    }

    #[test]
    fn symmetric_sqrt_clamps_negative_modes() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-18]);
        let s = symmetric_sqrt(&m);
        assert!((s[(0, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(s[(1, 1)], 0.0);
    }
}
