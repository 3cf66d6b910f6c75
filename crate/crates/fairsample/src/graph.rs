//! Chimera topology.
//!
//! A Chimera graph of dimension `c` is a `c x c` grid of complete bipartite
//! K4,4 unit cells.  Qubit indices are linear:
//!
//! ```text
//! index = 8 * (row * c + col) + 4 * side + position
//! ```
//!
//! with `side` 0 for the left shore and 1 for the right shore, and `position`
//! in `0..4` within a shore.  Left-shore qubits carry the vertical inter-cell
//! wires (same column, adjacent rows, same position); right-shore qubits
//! carry the horizontal wires.  Defects are explicit lists of dead qubits and
//! dead couplers; a dead qubit removes every coupler incident to it.

use crate::{Error, Result};

/// Shore size of a unit cell.
pub const SHORE: u32 = 4;
/// Qubits per unit cell.
pub const CELL: u32 = 8;

/// Decoded qubit coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coord {
    pub row: u32,
    pub col: u32,
    /// 0 = left shore (vertical wires), 1 = right shore (horizontal wires).
    pub side: u32,
    /// Position within the shore, `0..4`.
    pub pos: u32,
}

/// Dead qubits and dead couplers to remove from the ideal graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Defects {
    pub qubits: Vec<u32>,
    /// Coupler endpoints in either order; each pair must be a Chimera edge.
    pub couplers: Vec<(u32, u32)>,
}

impl Defects {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty() && self.couplers.is_empty()
    }
}

/// A Chimera graph with defects applied.
///
/// Active qubits are numbered densely in increasing qubit-index order; all
/// per-spin arrays elsewhere in the crate use that dense numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChimeraGraph {
    c: u32,
    n_sites: u32,
    active: Vec<bool>,
    dense_of: Vec<u32>,
    qubit_of: Vec<u32>,
    couplers: Vec<(u32, u32)>,
    adj: Vec<Vec<(u32, u32)>>,
    defects: Defects,
}

impl ChimeraGraph {
    /// Builds the dimension-`c` Chimera graph with the given defects removed.
    ///
    /// Rejects `c = 0`, out-of-range defect indices, and defect couplers that
    /// are not Chimera edges.
    pub fn build(c: u32, defects: &Defects) -> Result<Self> {
        if c == 0 {
            return Err(Error::ZeroGridDimension);
        }
        let n_sites = CELL * c * c;

        let mut active = vec![true; n_sites as usize];
        for &q in &defects.qubits {
            if q >= n_sites {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    c,
                    n: n_sites,
                });
            }
            active[q as usize] = false;
        }

        let mut dead_couplers = Vec::new();
        for &(a, b) in &defects.couplers {
            for q in [a, b] {
                if q >= n_sites {
                    return Err(Error::QubitOutOfRange {
                        index: q,
                        c,
                        n: n_sites,
                    });
                }
            }
            let (i, j) = (a.min(b), a.max(b));
            if !is_chimera_edge(c, i, j) {
                return Err(Error::NotAChimeraEdge { i, j });
            }
            dead_couplers.push((i, j));
        }
        dead_couplers.sort_unstable();
        dead_couplers.dedup();

        let mut dense_of = vec![u32::MAX; n_sites as usize];
        let mut qubit_of = Vec::new();
        for q in 0..n_sites {
            if active[q as usize] {
                dense_of[q as usize] = qubit_of.len() as u32;
                qubit_of.push(q);
            }
        }

        let mut couplers = Vec::new();
        for q in 0..n_sites {
            if !active[q as usize] {
                continue;
            }
            for nbr in ideal_neighbors(c, q) {
                if nbr > q
                    && active[nbr as usize]
                    && dead_couplers.binary_search(&(q, nbr)).is_err()
                {
                    couplers.push((q, nbr));
                }
            }
        }
        couplers.sort_unstable();

        let mut adj = vec![Vec::new(); qubit_of.len()];
        for (k, &(i, j)) in couplers.iter().enumerate() {
            let (di, dj) = (dense_of[i as usize], dense_of[j as usize]);
            adj[di as usize].push((dj, k as u32));
            adj[dj as usize].push((di, k as u32));
        }
        for list in &mut adj {
            list.sort_unstable();
        }

        Ok(Self {
            c,
            n_sites,
            active,
            dense_of,
            qubit_of,
            couplers,
            adj,
            defects: Defects {
                qubits: {
                    let mut q = defects.qubits.clone();
                    q.sort_unstable();
                    q.dedup();
                    q
                },
                couplers: dead_couplers,
            },
        })
    }

    /// Grid dimension.
    pub fn c(&self) -> u32 {
        self.c
    }

    /// Total sites of the ideal graph, `8 c^2`.
    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    /// Number of active qubits.
    pub fn num_active(&self) -> usize {
        self.qubit_of.len()
    }

    /// Number of active couplers.
    pub fn num_couplers(&self) -> usize {
        self.couplers.len()
    }

    /// Active couplers as `(i, j)` qubit pairs with `i < j`, sorted.
    pub fn couplers(&self) -> &[(u32, u32)] {
        &self.couplers
    }

    /// The defects this graph was built with (sorted, deduplicated).
    pub fn defects(&self) -> &Defects {
        &self.defects
    }

    pub fn is_active(&self, q: u32) -> bool {
        q < self.n_sites && self.active[q as usize]
    }

    /// Dense index of an active qubit.
    pub fn dense_of(&self, q: u32) -> Option<u32> {
        if self.is_active(q) {
            Some(self.dense_of[q as usize])
        } else {
            None
        }
    }

    /// Qubit index of a dense position.
    pub fn qubit_of(&self, dense: u32) -> u32 {
        self.qubit_of[dense as usize]
    }

    /// Active qubits in increasing index order.
    pub fn active_qubits(&self) -> &[u32] {
        &self.qubit_of
    }

    /// Neighbors of an active qubit in increasing qubit-index order.
    pub fn neighbors(&self, q: u32) -> Result<Vec<u32>> {
        if q >= self.n_sites {
            return Err(Error::QubitOutOfRange {
                index: q,
                c: self.c,
                n: self.n_sites,
            });
        }
        if !self.active[q as usize] {
            return Err(Error::InactiveQubit(q));
        }
        let d = self.dense_of[q as usize];
        Ok(self.adj[d as usize]
            .iter()
            .map(|&(dn, _)| self.qubit_of[dn as usize])
            .collect())
    }

    /// Adjacency of a dense index: `(dense neighbor, coupler index)` pairs in
    /// increasing dense-neighbor order.
    pub fn adj_dense(&self, dense: u32) -> &[(u32, u32)] {
        &self.adj[dense as usize]
    }

    /// Decodes a qubit index into grid coordinates.
    pub fn coord(&self, q: u32) -> Coord {
        coord(self.c, q)
    }

    /// Encodes grid coordinates into a qubit index.
    pub fn index(&self, coord: Coord) -> u32 {
        index(self.c, coord)
    }
}

/// Decodes a qubit index for dimension `c`.
pub fn coord(c: u32, q: u32) -> Coord {
    let cell = q / CELL;
    let within = q % CELL;
    Coord {
        row: cell / c,
        col: cell % c,
        side: within / SHORE,
        pos: within % SHORE,
    }
}

/// Encodes grid coordinates for dimension `c`.
pub fn index(c: u32, coord: Coord) -> u32 {
    CELL * (coord.row * c + coord.col) + SHORE * coord.side + coord.pos
}

/// Whether `(i, j)` is an edge of the ideal dimension-`c` Chimera graph.
pub fn is_chimera_edge(c: u32, i: u32, j: u32) -> bool {
    let n = CELL * c * c;
    if i >= n || j >= n || i == j {
        return false;
    }
    let (a, b) = (coord(c, i), coord(c, j));
    if a.row == b.row && a.col == b.col {
        return a.side != b.side;
    }
    if a.side != b.side || a.pos != b.pos {
        return false;
    }
    if a.side == 0 {
        a.col == b.col && a.row.abs_diff(b.row) == 1
    } else {
        a.row == b.row && a.col.abs_diff(b.col) == 1
    }
}

fn ideal_neighbors(c: u32, q: u32) -> Vec<u32> {
    let co = coord(c, q);
    let mut out = Vec::with_capacity(6);
    for pos in 0..SHORE {
        out.push(index(
            c,
            Coord {
                side: 1 - co.side,
                pos,
                ..co
            },
        ));
    }
    if co.side == 0 {
        if co.row > 0 {
            out.push(index(
                c,
                Coord {
                    row: co.row - 1,
                    ..co
                },
            ));
        }
        if co.row + 1 < c {
            out.push(index(
                c,
                Coord {
                    row: co.row + 1,
                    ..co
                },
            ));
        }
    } else {
        if co.col > 0 {
            out.push(index(
                c,
                Coord {
                    col: co.col - 1,
                    ..co
                },
            ));
        }
        if co.col + 1 < c {
            out.push(index(
                c,
                Coord {
                    col: co.col + 1,
                    ..co
                },
            ));
        }
    }
    out.sort_unstable();
    out
}
