//! Uniform meshes of the unit interval and the unit square.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            _ => Err(invalid(format!("dimension must be 1 or 2, got {d}"))),
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

/// Cell connectivity. Triangles are stored counter-clockwise.
#[derive(Debug, Clone)]
pub enum Cells {
    Intervals(Vec<[usize; 2]>),
    Triangles(Vec<[usize; 3]>),
}

/// Structured P1 mesh on `[0,1]^dim`.
///
/// Nodes are numbered lexicographically, `iy * nodes_per_side + ix`. In 2D
/// every square is split along the diagonal running from its lower-left to
/// its upper-right corner; the two triangles of square `s` are cells `2s`
/// and `2s + 1`.
#[derive(Debug, Clone)]
pub struct Grid {
    dim: Dim,
    nodes_per_side: usize,
    coords: Vec<[f64; 2]>,
    cells: Cells,
    boundary_nodes: Vec<usize>,
}

impl Grid {
    pub fn new(dim: Dim, nodes_per_side: usize) -> Result<Self> {
        if nodes_per_side < 2 {
            return Err(invalid(format!(
                "nodes_per_side must be at least 2, got {nodes_per_side}"
            )));
        }
        let k = nodes_per_side;
        let h = 1.0 / (k - 1) as f64;
        let coord = |i: usize| if i == k - 1 { 1.0 } else { i as f64 * h };

        match dim {
            Dim::One => {
                let coords = (0..k).map(|i| [coord(i), 0.0]).collect();
                let cells = (0..k - 1).map(|i| [i, i + 1]).collect();
                Ok(Grid {
                    dim,
                    nodes_per_side: k,
                    coords,
                    cells: Cells::Intervals(cells),
                    boundary_nodes: vec![0, k - 1],
                })
            }
            Dim::Two => {
                let mut coords = Vec::with_capacity(k * k);
                let mut boundary_nodes = Vec::with_capacity(4 * k - 4);
                for iy in 0..k {
                    for ix in 0..k {
                        coords.push([coord(ix), coord(iy)]);
                        if ix == 0 || iy == 0 || ix == k - 1 || iy == k - 1 {
                            boundary_nodes.push(iy * k + ix);
                        }
                    }
                }
                let mut tris = Vec::with_capacity(2 * (k - 1) * (k - 1));
                for iy in 0..k - 1 {
                    for ix in 0..k - 1 {
                        let a = iy * k + ix;
                        let b = a + 1;
                        let c = a + k + 1;
                        let d = a + k;
                        tris.push([a, b, c]);
                        tris.push([a, c, d]);
                    }
                }
                Ok(Grid {
                    dim,
                    nodes_per_side: k,
                    coords,
                    cells: Cells::Triangles(tris),
                    boundary_nodes,
                })
            }
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn nodes_per_side(&self) -> usize {
        self.nodes_per_side
    }

    /// Number of cell intervals along one side.
    pub fn cells_per_side(&self) -> usize {
        self.nodes_per_side - 1
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.cells_per_side() as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_cells(&self) -> usize {
        match &self.cells {
            Cells::Intervals(c) => c.len(),
            Cells::Triangles(c) => c.len(),
        }
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    /// Node indices of cell `c`.
    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        match &self.cells {
            Cells::Intervals(v) => &v[c],
            Cells::Triangles(v) => &v[c],
        }
    }

    /// Sorted indices of nodes lying on the boundary.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Signed measure of cell `c` (length in 1D, area in 2D).
    pub fn cell_measure(&self, c: usize) -> f64 {
        match &self.cells {
            Cells::Intervals(v) => {
                let [a, b] = v[c];
                self.coords[b][0] - self.coords[a][0]
            }
            Cells::Triangles(v) => signed_area(&self.coords, v[c]),
        }
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 2] {
        let nodes = self.cell_nodes(c);
        let mut p = [0.0; 2];
        for &n in nodes {
            p[0] += self.coords[n][0];
            p[1] += self.coords[n][1];
        }
        let k = nodes.len() as f64;
        [p[0] / k, p[1] / k]
    }

    /// Lattice position `(ix, iy)` of the square (or interval) that owns cell `c`.
    pub fn cell_square(&self, c: usize) -> (usize, usize) {
        let n = self.cells_per_side();
        match self.dim {
            Dim::One => (c, 0),
            Dim::Two => {
                let s = c / 2;
                (s % n, s / n)
            }
        }
    }

    /// Integer lattice coordinates `(ix, iy)` of a node, as floats.
    pub fn lattice_position(&self, node: usize) -> [f64; 2] {
        let k = self.nodes_per_side;
        match self.dim {
            Dim::One => [node as f64, 0.0],
            Dim::Two => [(node % k) as f64, (node / k) as f64],
        }
    }

    /// Boundary edges as node pairs (2D only; empty in 1D).
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        if self.dim == Dim::One {
            return Vec::new();
        }
        let k = self.nodes_per_side;
        let mut edges = Vec::with_capacity(4 * (k - 1));
        for i in 0..k - 1 {
            edges.push([i, i + 1]); // bottom
            edges.push([(k - 1) * k + i, (k - 1) * k + i + 1]); // top
            edges.push([i * k, (i + 1) * k]); // left
            edges.push([i * k + k - 1, (i + 1) * k + k - 1]); // right
        }
        edges
    }

    /// Evaluates the P1 interpolant with nodal values `u` at `point`.
    pub fn eval_p1(&self, u: &[f64], point: [f64; 2]) -> Result<f64> {
        if u.len() != self.num_nodes() {
            return Err(invalid("nodal vector length does not match grid"));
        }
        let inside = |t: f64| (0.0..=1.0).contains(&t);
        let n = self.cells_per_side();
        let h = self.spacing();
        let locate = |t: f64| -> (usize, f64) {
            let s = (t / h).floor() as usize;
            let s = s.min(n - 1);
            (s, t / h - s as f64)
        };
        match self.dim {
            Dim::One => {
                if !inside(point[0]) {
                    return Err(invalid("evaluation point outside the domain"));
                }
                let (s, t) = locate(point[0]);
                Ok((1.0 - t) * u[s] + t * u[s + 1])
            }
            Dim::Two => {
                if !inside(point[0]) || !inside(point[1]) {
                    return Err(invalid("evaluation point outside the domain"));
                }
                let k = self.nodes_per_side;
                let (ix, tx) = locate(point[0]);
                let (iy, ty) = locate(point[1]);
                let a = iy * k + ix;
                let (b, c, d) = (a + 1, a + k + 1, a + k);
                // lower triangle (a, b, c) when tx >= ty, upper (a, c, d) otherwise
                if tx >= ty {
                    Ok((1.0 - tx) * u[a] + (tx - ty) * u[b] + ty * u[c])
                } else {
                    Ok((1.0 - ty) * u[a] + tx * u[c] + (ty - tx) * u[d])
                }
            }
        }
    }
}

fn signed_area(coords: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| coords[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_interval_mesh() {
        let g = Grid::new(Dim::One, 2).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_cells(), 1);
        assert_eq!(g.boundary_nodes(), &[0, 1]);
        assert_eq!(g.coords()[1][0], 1.0);
    }

    #[test]
    fn three_by_three_counts() {
        let g = Grid::new(Dim::Two, 3).unwrap();
        assert_eq!(g.num_nodes(), 9);
        assert_eq!(g.num_cells(), 8);
        assert_eq!(g.boundary_nodes().len(), 8);
        assert!(!g.boundary_nodes().contains(&4));
    }

    #[test]
    fn counts_match_enumeration_at_65() {
        let k = 65;
        let g = Grid::new(Dim::Two, k).unwrap();
        assert_eq!(g.num_nodes(), k * k);
        assert_eq!(g.num_cells(), 2 * (k - 1) * (k - 1));
        assert_eq!(g.boundary_nodes().len(), 4 * k - 4);
        // brute-force boundary enumeration by coordinates
        let by_coord: Vec<usize> = g
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, p)| p.iter().any(|&t| t == 0.0 || t == 1.0))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(by_coord, g.boundary_nodes());
        assert_eq!(by_coord.len(), 256);
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(Grid::new(Dim::Two, 1).is_err());
        assert!(Grid::new(Dim::One, 0).is_err());
        assert!(Dim::from_usize(3).is_err());
    }

    #[test]
    fn triangles_are_positive_and_in_range() {
        let g = Grid::new(Dim::Two, 7).unwrap();
        for c in 0..g.num_cells() {
            assert!(g.cell_measure(c) > 0.0);
            assert!(g.cell_nodes(c).iter().all(|&n| n < g.num_nodes()));
        }
        for p in g.coords() {
            assert!(p.iter().all(|t| (0.0..=1.0).contains(t)));
        }
        let total: f64 = (0..g.num_cells()).map(|c| g.cell_measure(c)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_edges_cover_perimeter() {
        let g = Grid::new(Dim::Two, 5).unwrap();
        let edges = g.boundary_edges();
        assert_eq!(edges.len(), 16);
        let len: f64 = edges
            .iter()
            .map(|[a, b]| {
                let (p, q) = (g.coords()[*a], g.coords()[*b]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .sum();
        assert!((len - 4.0).abs() < 1e-14);
    }

    #[test]
    fn p1_evaluation_reproduces_linear_functions() {
        let g = Grid::new(Dim::Two, 5).unwrap();
        let u: Vec<f64> = g.coords().iter().map(|p| 2.0 * p[0] - 3.0 * p[1] + 0.5).collect();
        for &pt in &[[0.1, 0.7], [0.33, 0.33], [1.0, 1.0], [0.0, 0.5], [0.9, 0.05]] {
            let v = g.eval_p1(&u, pt).unwrap();
            assert!((v - (2.0 * pt[0] - 3.0 * pt[1] + 0.5)).abs() < 1e-13);
        }
        assert!(g.eval_p1(&u, [1.2, 0.0]).is_err());
    }
}
