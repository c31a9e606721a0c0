//! Cell-list neighbor search for needle centres on the torus.
//!
//! Cells are square-ish with side ≥ 2·eps, so two needles of length `eps`
//! (which can only touch when their centres are within `eps` of each other)
//! always sit in the same or in adjacent cells — the candidate set is a
//! strict superset of every potentially overlapping pair. Small boxes
//! degenerate to one or two cells per axis; the precomputed adjacency is
//! deduplicated so each candidate appears exactly once.

use nalgebra::Vector2;

use crate::geometry::Torus2;

#[derive(Debug, Clone)]
pub struct CellList {
    ncx: usize,
    ncy: usize,
    torus: Torus2,
    /// Particle indices per cell.
    members: Vec<Vec<usize>>,
    /// Cell currently holding each particle.
    cell_of: Vec<usize>,
    /// Deduplicated self-plus-adjacent cells, per cell.
    adjacency: Vec<Vec<usize>>,
}

impl CellList {
    /// Build the list for needle centres `positions` and needle length `eps`.
    ///
    /// The grid never exceeds ~√N cells per axis: finer grids than that buy
    /// nothing (cells would be mostly empty) and coarser-than-requested cells
    /// are always safe — the side only grows, so adjacency still covers
    /// every pair within `2·eps`.
    pub fn build(torus: &Torus2, eps: f64, positions: &[Vector2<f64>]) -> Self {
        let side = 2.0 * eps;
        let cap = (positions.len() as f64).sqrt().ceil() as usize + 1;
        let ncx = ((torus.lx() / side).floor() as usize).clamp(1, cap);
        let ncy = ((torus.ly() / side).floor() as usize).clamp(1, cap);
        let mut adjacency = Vec::with_capacity(ncx * ncy);
        for cy in 0..ncy {
            for cx in 0..ncx {
                let mut neigh = Vec::with_capacity(9);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let nx = (cx as i64 + dx).rem_euclid(ncx as i64) as usize;
                        let ny = (cy as i64 + dy).rem_euclid(ncy as i64) as usize;
                        neigh.push(ny * ncx + nx);
                    }
                }
                neigh.sort_unstable();
                neigh.dedup();
                adjacency.push(neigh);
            }
        }
        let mut list = CellList {
            ncx,
            ncy,
            torus: *torus,
            members: vec![Vec::new(); ncx * ncy],
            cell_of: vec![0; positions.len()],
            adjacency,
        };
        for (idx, &p) in positions.iter().enumerate() {
            let c = list.cell_index(p);
            list.cell_of[idx] = c;
            list.members[c].push(idx);
        }
        list
    }

    /// Cell holding position `p` (any representative; wrapped internally).
    pub fn cell_index(&self, p: Vector2<f64>) -> usize {
        let w = self.torus.wrap(p);
        let cx = ((w.x / self.torus.lx() * self.ncx as f64).floor() as usize).min(self.ncx - 1);
        let cy = ((w.y / self.torus.ly() * self.ncy as f64).floor() as usize).min(self.ncy - 1);
        cy * self.ncx + cx
    }

    /// Append every particle registered in the cell of `p` or an adjacent
    /// cell (including, when registered, the querying particle itself).
    pub fn candidates_into(&self, p: Vector2<f64>, out: &mut Vec<usize>) {
        out.clear();
        for &cell in &self.adjacency[self.cell_index(p)] {
            out.extend_from_slice(&self.members[cell]);
        }
    }

    /// Move particle `idx` to `new_pos`, keeping memberships consistent.
    pub fn relocate(&mut self, idx: usize, new_pos: Vector2<f64>) {
        let new_cell = self.cell_index(new_pos);
        let old_cell = self.cell_of[idx];
        if new_cell == old_cell {
            return;
        }
        let slot = self.members[old_cell]
            .iter()
            .position(|&m| m == idx)
            .expect("particle registered in its recorded cell");
        self.members[old_cell].swap_remove(slot);
        self.members[new_cell].push(idx);
        self.cell_of[idx] = new_cell;
    }

    pub fn cell_counts(&self) -> (usize, usize) {
        (self.ncx, self.ncy)
    }
}
