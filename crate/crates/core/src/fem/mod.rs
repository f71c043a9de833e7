//! Finite element discretization of the model problem and its transfer matrix.

mod assembly;
mod basis;
mod grid;
mod transfer;

pub use assembly::{symmetric_sqrt, FemSystem};
pub use basis::SourceBasis;
pub use grid::{Cells, Dim, Grid};
pub use transfer::{generate_boundary_data, SourceField, TransferOperator};

/// Mesh, FEM system, source basis and transfer matrix for one configuration.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub system: FemSystem,
    pub basis: SourceBasis,
    pub transfer: TransferOperator,
}

impl Discretization {
    pub fn build(dim: Dim, nodes_per_side: usize, source_cells: usize, epsilon: f64) -> crate::Result<Self> {
        let grid = Grid::new(dim, nodes_per_side)?;
        let system = FemSystem::assemble(grid, epsilon)?;
        let basis = SourceBasis::new(system.grid(), source_cells)?;
        let transfer = TransferOperator::assemble(&system, &basis)?;
        Ok(Discretization {
            system,
            basis,
            transfer,
        })
    }
}
