//! Rotated surface code geometry.
//!
//! Data qubits sit on integer grid points `(row, col)`. Checks sit on the
//! faces between four grid points; face `(i, j)` is bounded by rows `i, i+1`
//! and columns `j, j+1`. Faces are coloured by a global checkerboard (`X` when
//! `i + j` is even), so patches laid side by side at an even column offset
//! agree on check types and can be merged.
//!
//! Top and bottom boundaries carry weight-2 `X` checks, left and right
//! boundaries carry weight-2 `Z` checks. The logical `X` operator is a column
//! of data qubits and the logical `Z` operator a row.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Data qubit position `(row, col)`.
pub type Coord = (i32, i32);

/// Pauli type of a check, an observable or a decoding sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    pub fn other(self) -> Pauli {
        match self {
            Pauli::X => Pauli::Z,
            Pauli::Z => Pauli::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Z => 'Z',
        }
    }
}

/// A stabilizer check on one face of the lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub kind: Pauli,
    /// Face centre in doubled coordinates `(2i + 1, 2j + 1)`.
    pub face: (i32, i32),
    /// Data qubit (index into [`CodeLayout::data`]) touched in each of the
    /// four entangling steps; `None` where a boundary check idles.
    pub schedule: [Option<usize>; 4],
}

impl Check {
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.schedule.iter().flatten().copied()
    }

    pub fn weight(&self) -> usize {
        self.schedule.iter().flatten().count()
    }

    /// Sorted data-qubit support.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.qubits().collect();
        s.sort_unstable();
        s
    }
}

/// Geometry of one rectangular rotated surface-code patch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeLayout {
    /// Code distance (the row count; equal to the column count for square patches).
    pub d: usize,
    pub rows: usize,
    pub cols: usize,
    /// Global column of the patch's leftmost data column.
    pub col_offset: i32,
    pub data: Vec<Coord>,
    pub x_checks: Vec<Check>,
    pub z_checks: Vec<Check>,
    pub logical_x: Vec<usize>,
    pub logical_z: Vec<usize>,
    #[serde(skip)]
    index: HashMap<Coord, usize>,
}

/// Builds the square distance-`d` rotated surface code.
pub fn build_rotated_code(d: usize) -> Result<CodeLayout> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDistance(d));
    }
    Ok(CodeLayout::rectangle(d, d, 0))
}

impl CodeLayout {
    /// A `rows x cols` patch whose leftmost column sits at global column
    /// `col_offset`. `col_offset` must be even to keep the standard colouring.
    pub fn rectangle(rows: usize, cols: usize, col_offset: i32) -> CodeLayout {
        assert!(rows >= 2 && cols >= 2, "patch must be at least 2x2");
        assert!(col_offset % 2 == 0, "column offset must be even");
        let mut data = Vec::with_capacity(rows * cols);
        let mut index = HashMap::with_capacity(rows * cols);
        for r in 0..rows as i32 {
            for c in 0..cols as i32 {
                index.insert((r, c + col_offset), data.len());
                data.push((r, c + col_offset));
            }
        }

        let (r_last, c_first, c_last) = (rows as i32 - 1, col_offset, col_offset + cols as i32 - 1);
        let mut x_checks = Vec::new();
        let mut z_checks = Vec::new();
        for i in -1..=r_last {
            for j in (c_first - 1)..=c_last {
                let kind = if (i + j).rem_euclid(2) == 0 { Pauli::X } else { Pauli::Z };
                let top_or_bottom = i == -1 || i == r_last;
                let left_or_right = j == c_first - 1 || j == c_last;
                let keep = match (top_or_bottom, left_or_right) {
                    (false, false) => true,
                    (true, false) => kind == Pauli::X,
                    (false, true) => kind == Pauli::Z,
                    (true, true) => false,
                };
                if !keep {
                    continue;
                }
                let nw = index.get(&(i, j)).copied();
                let ne = index.get(&(i, j + 1)).copied();
                let sw = index.get(&(i + 1, j)).copied();
                let se = index.get(&(i + 1, j + 1)).copied();
                // Z-shaped traversal for X checks, N-shaped for Z checks keeps
                // hook errors perpendicular to the matching logical operator.
                let schedule = match kind {
                    Pauli::X => [nw, ne, sw, se],
                    Pauli::Z => [nw, sw, ne, se],
                };
                let check = Check { kind, face: (2 * i + 1, 2 * j + 1), schedule };
                match kind {
                    Pauli::X => x_checks.push(check),
                    Pauli::Z => z_checks.push(check),
                }
            }
        }

        let logical_x = (0..rows as i32).map(|r| index[&(r, c_first)]).collect();
        let logical_z = (0..cols as i32).map(|c| index[&(0, c + col_offset)]).collect();
        CodeLayout { d: rows, rows, cols, col_offset, data, x_checks, z_checks, logical_x, logical_z, index }
    }

    pub fn data_index(&self, coord: Coord) -> Option<usize> {
        self.index.get(&coord).copied()
    }

    pub fn checks(&self, kind: Pauli) -> &[Check] {
        match kind {
            Pauli::X => &self.x_checks,
            Pauli::Z => &self.z_checks,
        }
    }

    pub fn logical(&self, kind: Pauli) -> &[usize] {
        match kind {
            Pauli::X => &self.logical_x,
            Pauli::Z => &self.logical_z,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.x_checks.len() + self.z_checks.len()
    }

    /// Ordered data-qubit sequence of every check (X checks first, then Z),
    /// in the order the entangling gates visit them.
    pub fn extraction_schedule(&self) -> Vec<Vec<usize>> {
        self.x_checks
            .iter()
            .chain(self.z_checks.iter())
            .map(|c| c.qubits().collect())
            .collect()
    }

    /// Returns `true` when no data qubit is touched twice within any of the
    /// four entangling steps.
    pub fn schedule_is_conflict_free(&self) -> bool {
        (0..4).all(|step| {
            let mut seen = vec![false; self.data.len()];
            self.x_checks.iter().chain(self.z_checks.iter()).all(|c| match c.schedule[step] {
                Some(q) => !std::mem::replace(&mut seen[q], true),
                None => true,
            })
        })
    }
}
