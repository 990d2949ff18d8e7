use crate::grid::GridGeometry;

/// Forward neighbourhoods `N_m` (the pixel below and the pixel to the right,
/// when annotated) and their adjoints `N̄_m = { m̃ : m ∈ N_m̃ }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    forward: Vec<Vec<usize>>,
    adjoint: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn build(grid: &GridGeometry) -> Self {
        let n = grid.len();
        let mut forward = vec![Vec::with_capacity(2); n];
        let mut adjoint = vec![Vec::with_capacity(2); n];
        for (m, fwd) in forward.iter_mut().enumerate() {
            let (i, j) = grid.pixel_of_row(m);
            for (di, dj) in [(1, 0), (0, 1)] {
                if let Some(nb) = grid.row_of_pixel(i + di, j + dj) {
                    fwd.push(nb);
                    adjoint[nb].push(m);
                }
            }
        }
        Self { forward, adjoint }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self, m: usize) -> &[usize] {
        &self.forward[m]
    }

    pub fn adjoint(&self, m: usize) -> &[usize] {
        &self.adjoint[m]
    }
}
