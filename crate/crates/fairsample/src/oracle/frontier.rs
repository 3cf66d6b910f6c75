//! Transfer-matrix ground-state oracle over cell rows.
//!
//! The sweep processes unit cells row by row, column by column.  Its state
//! packs `c + 1` nibbles:
//!
//! * one nibble per grid column holding that column's boundary left shore
//!   (the four qubits carrying vertical wires downward): the previous row's
//!   assignment before the column is processed, the current row's after;
//! * one nibble holding the right shore of the column just processed, which
//!   still faces a horizontal wire.
//!
//! Every cell is absorbed in two steps.  Step A consumes the vertical bond:
//! it enumerates the cell's left shore and replaces the column nibble,
//! merging out the row above.  Step B consumes the intra-cell K4,4 and the
//! horizontal bond: it enumerates the right shore and replaces the right
//! nibble, merging out the previous column's right shore.  Each state keeps
//! the minimal achievable energy and the exact 64-bit minimizer count.
//!
//! Enumeration reruns one row at a time, storing per-step energy tables and
//! walking them backward; a prefix is on a globally minimal path exactly
//! when it is minimal for its own frontier state, because everything
//! downstream couples only through the frontier.  Defective qubits never
//! enter a pattern (their bits stay zero), and defective couplers simply
//! drop out of the bond tables.

use super::{Enumeration, GroundStateCount, GroundStateSet};
use crate::graph::{index, ChimeraGraph, Coord, SHORE};
use crate::instance::Instance;
use crate::ising::SpinConfig;
use crate::{Error, Result};

/// Largest grid dimension the frontier sweep will attempt.
pub const FRONTIER_LIMIT: u32 = 4;

const UNREACHABLE: i64 = i64::MAX;

/// Exact minimum energy and minimizer count via the frontier sweep.
pub fn frontier_count(instance: &Instance) -> Result<GroundStateCount> {
    let fwd = forward(instance, false)?;
    Ok(GroundStateCount {
        min_energy: fwd.min_energy,
        count: fwd.count,
    })
}

/// Enumerates the full manifold unless it exceeds `cap`, in which case the
/// exact count is still reported.
pub fn frontier_enumerate(instance: &Instance, cap: u64) -> Result<Enumeration> {
    let fwd = forward(instance, true)?;
    if fwd.count > cap {
        return Ok(Enumeration::Overflow {
            min_energy: fwd.min_energy,
            count: fwd.count,
        });
    }
    let configs = traceback(instance, &fwd)?;
    assert_eq!(
        configs.len() as u64,
        fwd.count,
        "traceback path count must equal the forward minimizer count"
    );
    Ok(Enumeration::Complete(GroundStateSet::new(
        fwd.min_energy,
        configs,
        true,
    )))
}

/// Per-cell energy tables; sign convention `H = -sum J s s` baked in.
struct CellTables {
    /// `-sum J(left p, right q) s_p s_q`, index `(l << 4) | r`.
    intra: [i64; 256],
    /// Vertical bond to the row above, index `(above << 4) | l`; zeros in
    /// row 0.
    vert: [i64; 256],
    /// Horizontal bond to the column on the left, index `(prev << 4) | r`;
    /// zeros in column 0.
    horiz: [i64; 256],
    /// Left-shore nibbles with bits only on active qubits.
    l_patterns: Vec<u8>,
    /// Right-shore nibbles with bits only on active qubits.
    r_patterns: Vec<u8>,
}

#[inline]
fn nibble_spin(nib: u8, p: u32) -> i64 {
    if nib >> p & 1 == 1 {
        1
    } else {
        -1
    }
}

fn coupling_between(instance: &Instance, a: u32, b: u32) -> Option<i64> {
    let pair = (a.min(b), a.max(b));
    instance
        .graph()
        .couplers()
        .binary_search(&pair)
        .ok()
        .map(|k| instance.coupling(k) as i64)
}

fn active_shore_patterns(graph: &ChimeraGraph, row: u32, col: u32, side: u32) -> Vec<u8> {
    let c = graph.c();
    let mask: u8 = (0..SHORE)
        .filter(|&pos| {
            graph.is_active(index(
                c,
                Coord {
                    row,
                    col,
                    side,
                    pos,
                },
            ))
        })
        .map(|pos| 1u8 << pos)
        .sum();
    (0..16u8).filter(|nib| nib & !mask == 0).collect()
}

fn build_tables(instance: &Instance) -> Vec<CellTables> {
    let graph = instance.graph();
    let c = graph.c();
    let mut tables = Vec::with_capacity((c * c) as usize);
    for row in 0..c {
        for col in 0..c {
            let ql = |p: u32| {
                index(
                    c,
                    Coord {
                        row,
                        col,
                        side: 0,
                        pos: p,
                    },
                )
            };
            let qr = |p: u32| {
                index(
                    c,
                    Coord {
                        row,
                        col,
                        side: 1,
                        pos: p,
                    },
                )
            };

            let mut intra = [0i64; 256];
            for l in 0..16u8 {
                for r in 0..16u8 {
                    let mut e = 0i64;
                    for p in 0..SHORE {
                        for q in 0..SHORE {
                            if let Some(j) = coupling_between(instance, ql(p), qr(q)) {
                                e -= j * nibble_spin(l, p) * nibble_spin(r, q);
                            }
                        }
                    }
                    intra[((l as usize) << 4) | r as usize] = e;
                }
            }

            let mut vert = [0i64; 256];
            if row > 0 {
                let qa = |p: u32| {
                    index(
                        c,
                        Coord {
                            row: row - 1,
                            col,
                            side: 0,
                            pos: p,
                        },
                    )
                };
                for above in 0..16u8 {
                    for l in 0..16u8 {
                        let mut e = 0i64;
                        for p in 0..SHORE {
                            if let Some(j) = coupling_between(instance, qa(p), ql(p)) {
                                e -= j * nibble_spin(above, p) * nibble_spin(l, p);
                            }
                        }
                        vert[((above as usize) << 4) | l as usize] = e;
                    }
                }
            }

            let mut horiz = [0i64; 256];
            if col > 0 {
                let qp = |p: u32| {
                    index(
                        c,
                        Coord {
                            row,
                            col: col - 1,
                            side: 1,
                            pos: p,
                        },
                    )
                };
                for prev in 0..16u8 {
                    for r in 0..16u8 {
                        let mut e = 0i64;
                        for p in 0..SHORE {
                            if let Some(j) = coupling_between(instance, qp(p), qr(p)) {
                                e -= j * nibble_spin(prev, p) * nibble_spin(r, p);
                            }
                        }
                        horiz[((prev as usize) << 4) | r as usize] = e;
                    }
                }
            }

            tables.push(CellTables {
                intra,
                vert,
                horiz,
                l_patterns: active_shore_patterns(graph, row, col, 0),
                r_patterns: active_shore_patterns(graph, row, col, 1),
            });
        }
    }
    tables
}

struct Forward {
    min_energy: i64,
    count: u64,
    /// Collapsed `(energy, count)` tables over `2^(4c)` frontier states,
    /// one per processed row.  Only kept when `keep_boundaries` is set.
    boundaries: Vec<(Vec<i64>, Vec<u64>)>,
}

#[inline]
fn relax(e_arr: &mut [i64], cnt_arr: &mut [u64], t: usize, e: i64, cnt: u64) -> Result<()> {
    if e < e_arr[t] {
        e_arr[t] = e;
        cnt_arr[t] = cnt;
    } else if e == e_arr[t] {
        cnt_arr[t] = cnt_arr[t].checked_add(cnt).ok_or(Error::CountOverflow)?;
    }
    Ok(())
}

fn check_feasible(instance: &Instance) -> Result<usize> {
    let c = instance.graph().c();
    if c > FRONTIER_LIMIT {
        return Err(Error::OracleInfeasible {
            what: "frontier oracle",
            why: format!("c = {c} exceeds the 2^(4c) frontier budget (c <= {FRONTIER_LIMIT})"),
        });
    }
    if instance.num_spins() == 0 {
        return Err(Error::OracleInfeasible {
            what: "frontier oracle",
            why: "no active qubits".into(),
        });
    }
    Ok(c as usize)
}

fn forward(instance: &Instance, keep_boundaries: bool) -> Result<Forward> {
    let c = check_feasible(instance)?;
    let tables = build_tables(instance);
    let size = 1usize << (4 * c + 4);
    let frontier_size = 1usize << (4 * c);
    let rshift = 4 * c;

    let mut cur_e = vec![UNREACHABLE; size];
    let mut cur_cnt = vec![0u64; size];
    let mut next_e = vec![UNREACHABLE; size];
    let mut next_cnt = vec![0u64; size];
    cur_e[0] = 0;
    cur_cnt[0] = 1;

    let mut boundaries = Vec::new();

    for row in 0..c {
        for col in 0..c {
            let t = &tables[row * c + col];
            let shift = 4 * col;
            let col_mask = !(0xFusize << shift);

            next_e.fill(UNREACHABLE);
            next_cnt.fill(0);
            for s in 0..size {
                let e0 = cur_e[s];
                if e0 == UNREACHABLE {
                    continue;
                }
                let above = (s >> shift) & 0xF;
                let base = s & col_mask;
                let cnt = cur_cnt[s];
                for &l in &t.l_patterns {
                    let e = e0 + t.vert[(above << 4) | l as usize];
                    relax(
                        &mut next_e,
                        &mut next_cnt,
                        base | ((l as usize) << shift),
                        e,
                        cnt,
                    )?;
                }
            }
            std::mem::swap(&mut cur_e, &mut next_e);
            std::mem::swap(&mut cur_cnt, &mut next_cnt);

            let r_mask = !(0xFusize << rshift);
            next_e.fill(UNREACHABLE);
            next_cnt.fill(0);
            for s in 0..size {
                let e0 = cur_e[s];
                if e0 == UNREACHABLE {
                    continue;
                }
                let l = (s >> shift) & 0xF;
                let prev = (s >> rshift) & 0xF;
                let base = s & r_mask;
                let cnt = cur_cnt[s];
                for &r in &t.r_patterns {
                    let e = e0 + t.intra[(l << 4) | r as usize] + t.horiz[(prev << 4) | r as usize];
                    relax(
                        &mut next_e,
                        &mut next_cnt,
                        base | ((r as usize) << rshift),
                        e,
                        cnt,
                    )?;
                }
            }
            std::mem::swap(&mut cur_e, &mut next_e);
            std::mem::swap(&mut cur_cnt, &mut next_cnt);
        }

        // Collapse the right nibble: the last column's right shore has no
        // remaining couplings.
        let mut boundary_e = vec![UNREACHABLE; frontier_size];
        let mut boundary_cnt = vec![0u64; frontier_size];
        for s in 0..size {
            if cur_e[s] != UNREACHABLE {
                relax(
                    &mut boundary_e,
                    &mut boundary_cnt,
                    s & (frontier_size - 1),
                    cur_e[s],
                    cur_cnt[s],
                )?;
            }
        }
        cur_e.fill(UNREACHABLE);
        cur_cnt.fill(0);
        for f in 0..frontier_size {
            if boundary_e[f] != UNREACHABLE {
                cur_e[f] = boundary_e[f];
                cur_cnt[f] = boundary_cnt[f];
            }
        }
        boundaries.push((boundary_e, boundary_cnt));
    }

    let last = boundaries.last().unwrap();
    let min_energy = *last.0.iter().min().unwrap();
    let mut count = 0u64;
    for f in 0..frontier_size {
        if last.0[f] == min_energy {
            count = count.checked_add(last.1[f]).ok_or(Error::CountOverflow)?;
        }
    }
    if !keep_boundaries {
        boundaries.clear();
    }
    Ok(Forward {
        min_energy,
        count,
        boundaries,
    })
}

/// Energy-only stage tables for one row: `stages[0]` is the expanded
/// previous boundary, `stages[2k + 1]` follows step A of column `k`,
/// `stages[2k + 2]` follows step B.
fn rebuild_row_stages(
    tables: &[CellTables],
    prev_boundary: Option<&Vec<i64>>,
    row: usize,
    c: usize,
) -> Vec<Vec<i64>> {
    let size = 1usize << (4 * c + 4);
    let frontier_size = 1usize << (4 * c);
    let rshift = 4 * c;

    let mut t0 = vec![UNREACHABLE; size];
    match prev_boundary {
        Some(b) => t0[..frontier_size].copy_from_slice(&b[..frontier_size]),
        None => t0[0] = 0,
    }
    let mut stages = vec![t0];

    for col in 0..c {
        let t = &tables[row * c + col];
        let shift = 4 * col;

        let mut after_a = vec![UNREACHABLE; size];
        {
            let cur = stages.last().unwrap();
            for (s, &e0) in cur.iter().enumerate() {
                if e0 == UNREACHABLE {
                    continue;
                }
                let above = (s >> shift) & 0xF;
                let base = s & !(0xFusize << shift);
                for &l in &t.l_patterns {
                    let e = e0 + t.vert[(above << 4) | l as usize];
                    let u = base | ((l as usize) << shift);
                    if e < after_a[u] {
                        after_a[u] = e;
                    }
                }
            }
        }
        stages.push(after_a);

        let mut after_b = vec![UNREACHABLE; size];
        {
            let cur = stages.last().unwrap();
            for (s, &e0) in cur.iter().enumerate() {
                if e0 == UNREACHABLE {
                    continue;
                }
                let l = (s >> shift) & 0xF;
                let prev = (s >> rshift) & 0xF;
                let base = s & !(0xFusize << rshift);
                for &r in &t.r_patterns {
                    let e = e0 + t.intra[(l << 4) | r as usize] + t.horiz[(prev << 4) | r as usize];
                    let u = base | ((r as usize) << rshift);
                    if e < after_b[u] {
                        after_b[u] = e;
                    }
                }
            }
        }
        stages.push(after_b);
    }
    stages
}

#[derive(Clone)]
struct Path {
    state: usize,
    /// `(left, right)` nibble per cell, row-major.
    cells: Vec<(u8, u8)>,
}

fn traceback(instance: &Instance, fwd: &Forward) -> Result<Vec<SpinConfig>> {
    let graph = instance.graph();
    let c = graph.c() as usize;
    let tables = build_tables(instance);
    let frontier_size = 1usize << (4 * c);
    let rshift = 4 * c;

    // Seed with the minimal frontier states of the last row.
    let last = &fwd.boundaries[c - 1];
    let mut paths: Vec<Path> = (0..frontier_size)
        .filter(|&f| last.0[f] == fwd.min_energy)
        .map(|f| Path {
            state: f,
            cells: vec![(0, 0); c * c],
        })
        .collect();

    for row in (0..c).rev() {
        let prev_boundary = if row > 0 {
            Some(&fwd.boundaries[row - 1].0)
        } else {
            None
        };
        let stages = rebuild_row_stages(&tables, prev_boundary, row, c);
        let boundary_e = &fwd.boundaries[row].0;

        // Lift collapsed frontier states back to full states: any right
        // nibble matching the boundary energy.
        let mut lifted: Vec<Path> = Vec::new();
        for path in &paths {
            let target = boundary_e[path.state];
            for &rc in &tables[row * c + (c - 1)].r_patterns {
                let u = path.state | ((rc as usize) << rshift);
                if stages[2 * c][u] == target {
                    lifted.push(Path {
                        state: u,
                        cells: path.cells.clone(),
                    });
                }
            }
        }

        let mut cur = lifted;
        for col in (0..c).rev() {
            let t = &tables[row * c + col];
            let shift = 4 * col;

            // Undo step B: learn the right nibble, restore the previous
            // column's right shore.
            let prev_patterns: &[u8] = if col > 0 {
                &tables[row * c + col - 1].r_patterns
            } else {
                &[0]
            };
            let mut after: Vec<Path> = Vec::new();
            for path in &cur {
                let u = path.state;
                let r = ((u >> rshift) & 0xF) as u8;
                let l = (u >> shift) & 0xF;
                let e_u = stages[2 * col + 2][u];
                let step = t.intra[(l << 4) | r as usize];
                for &prev in prev_patterns {
                    let v = (u & !(0xFusize << rshift)) | ((prev as usize) << rshift);
                    let e_step = step + t.horiz[((prev as usize) << 4) | r as usize];
                    if stages[2 * col + 1][v] != UNREACHABLE
                        && stages[2 * col + 1][v] + e_step == e_u
                    {
                        let mut cells = path.cells.clone();
                        cells[row * c + col].1 = r;
                        after.push(Path { state: v, cells });
                    }
                }
            }

            // Undo step A: learn the left nibble, restore the row above.
            let above_patterns: Vec<u8> = if row > 0 {
                tables[(row - 1) * c + col].l_patterns.clone()
            } else {
                vec![0]
            };
            let mut before: Vec<Path> = Vec::new();
            for path in &after {
                let v = path.state;
                let l = ((v >> shift) & 0xF) as u8;
                let e_v = stages[2 * col + 1][v];
                for &above in &above_patterns {
                    let w = (v & !(0xFusize << shift)) | ((above as usize) << shift);
                    let e_step = t.vert[((above as usize) << 4) | l as usize];
                    if stages[2 * col][w] != UNREACHABLE && stages[2 * col][w] + e_step == e_v {
                        let mut cells = path.cells.clone();
                        cells[row * c + col].0 = l;
                        before.push(Path { state: w, cells });
                    }
                }
            }
            cur = before;
        }

        // States are back in the previous boundary's domain (right nibble 0).
        for path in &mut cur {
            debug_assert_eq!(path.state >> rshift, 0);
            path.state &= frontier_size - 1;
        }
        paths = cur;
    }

    let mut configs = Vec::with_capacity(paths.len());
    for path in paths {
        let mut spins = vec![-1i8; instance.num_spins()];
        for row in 0..c {
            for col in 0..c {
                let (l, r) = path.cells[row * c + col];
                for pos in 0..SHORE {
                    let ql = index(
                        graph.c(),
                        Coord {
                            row: row as u32,
                            col: col as u32,
                            side: 0,
                            pos,
                        },
                    );
                    if let Some(d) = graph.dense_of(ql) {
                        spins[d as usize] = nibble_spin(l, pos) as i8;
                    }
                    let qr = index(
                        graph.c(),
                        Coord {
                            row: row as u32,
                            col: col as u32,
                            side: 1,
                            pos,
                        },
                    );
                    if let Some(d) = graph.dense_of(qr) {
                        spins[d as usize] = nibble_spin(r, pos) as i8;
                    }
                }
            }
        }
        let cfg = SpinConfig::from_spins(&spins);
        debug_assert_eq!(
            crate::ising::energy(instance, &cfg).unwrap(),
            fwd.min_energy,
            "traceback produced a non-minimal configuration"
        );
        configs.push(cfg);
    }
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Defects;
    use crate::instance::random_instance;
    use crate::oracle::brute_force_enumerate;
    use crate::seeds::rng_from;
    use std::sync::Arc;

    fn ferromagnet(c: u32) -> Instance {
        let graph = Arc::new(ChimeraGraph::build(c, &Defects::none()).unwrap());
        let n = graph.num_couplers();
        Instance::from_parts(graph, vec![6; n], 0).unwrap()
    }

    #[test]
    fn ferromagnet_minimum_and_count() {
        for c in 1..=3u32 {
            let inst = ferromagnet(c);
            let gc = frontier_count(&inst).unwrap();
            let couplers = inst.graph().num_couplers() as i64;
            assert_eq!(gc.min_energy, -6 * couplers);
            assert_eq!(gc.count, 2);
        }
    }

    #[test]
    fn ferromagnet_enumeration_is_all_up_all_down() {
        let inst = ferromagnet(2);
        let set = frontier_enumerate(&inst, 10)
            .unwrap()
            .into_complete()
            .unwrap();
        assert_eq!(set.n_gs(), 2);
        assert_eq!(set.configs()[0], SpinConfig::from_spins(&[-1; 32]));
        assert_eq!(set.configs()[1], SpinConfig::from_spins(&[1; 32]));
    }

    #[test]
    fn overflow_keeps_the_exact_count() {
        let inst = ferromagnet(2);
        match frontier_enumerate(&inst, 1).unwrap() {
            Enumeration::Overflow { min_energy, count } => {
                assert_eq!(min_energy, -480);
                assert_eq!(count, 2);
            }
            Enumeration::Complete(_) => panic!("expected overflow at cap 1"),
        }
    }

    #[test]
    fn agrees_with_brute_force_at_c1() {
        let mut rng = rng_from(41);
        for _ in 0..20 {
            let inst = random_instance(1, &Defects::none(), &mut rng).unwrap();
            let brute = brute_force_enumerate(&inst).unwrap();
            let count = frontier_count(&inst).unwrap();
            assert_eq!(count.min_energy, brute.min_energy());
            assert_eq!(count.count, brute.n_gs());
            let set = frontier_enumerate(&inst, 1 << 20)
                .unwrap()
                .into_complete()
                .unwrap();
            assert_eq!(set.configs(), brute.configs());
        }
    }

    #[test]
    fn agrees_with_brute_force_on_trimmed_c2() {
        let mut rng = rng_from(42);
        // Kill one full cell minus two qubits: 26 active spins.
        let defects = Defects {
            qubits: vec![24, 25, 26, 27, 28, 29],
            couplers: vec![],
        };
        for _ in 0..5 {
            let inst = random_instance(2, &defects, &mut rng).unwrap();
            let brute = brute_force_enumerate(&inst).unwrap();
            let set = frontier_enumerate(&inst, 1 << 20)
                .unwrap()
                .into_complete()
                .unwrap();
            assert_eq!(set.min_energy(), brute.min_energy());
            assert_eq!(set.configs(), brute.configs());
        }
    }

    #[test]
    fn agrees_with_brute_force_on_trimmed_c3() {
        let mut rng = rng_from(43);
        // Keep cells (0,0), (0,1), (1,1) partially: 24 active spins spread
        // over multiple rows and columns.
        let keep: Vec<u32> = (0..8).chain(8..16).chain(32..40).collect();
        let defects = Defects {
            qubits: (0..72u32).filter(|q| !keep.contains(q)).collect(),
            couplers: vec![],
        };
        for _ in 0..3 {
            let inst = random_instance(3, &defects, &mut rng).unwrap();
            let brute = brute_force_enumerate(&inst).unwrap();
            let set = frontier_enumerate(&inst, 1 << 20)
                .unwrap()
                .into_complete()
                .unwrap();
            assert_eq!(set.min_energy(), brute.min_energy());
            assert_eq!(set.configs(), brute.configs());
        }
    }

    #[test]
    fn dead_couplers_are_respected() {
        let mut rng = rng_from(44);
        // Trimmed c = 2 with an intra-cell, a vertical (0-16), and a
        // horizontal (4-12) coupler removed.
        let defects = Defects {
            qubits: vec![26, 27, 30, 31, 21, 22],
            couplers: vec![(0, 4), (0, 16), (4, 12)],
        };
        for _ in 0..3 {
            let inst = random_instance(2, &defects, &mut rng).unwrap();
            let brute = brute_force_enumerate(&inst).unwrap();
            let set = frontier_enumerate(&inst, 1 << 20)
                .unwrap()
                .into_complete()
                .unwrap();
            assert_eq!(set.min_energy(), brute.min_energy());
            assert_eq!(set.configs(), brute.configs());
        }
    }

    #[test]
    fn c3_random_instances_have_consistent_counts() {
        let mut rng = rng_from(45);
        for _ in 0..3 {
            let inst = random_instance(3, &Defects::none(), &mut rng).unwrap();
            let gc = frontier_count(&inst).unwrap();
            let set = frontier_enumerate(&inst, 1 << 20)
                .unwrap()
                .into_complete()
                .unwrap();
            assert_eq!(set.min_energy(), gc.min_energy);
            assert_eq!(set.n_gs(), gc.count);
            assert!(set.closed_under_global_flip());
            for cfg in set.configs() {
                assert_eq!(crate::ising::energy(&inst, cfg).unwrap(), gc.min_energy);
            }
        }
    }

    #[test]
    fn grid_limit_is_enforced() {
        let graph = Arc::new(ChimeraGraph::build(5, &Defects::none()).unwrap());
        let n = graph.num_couplers();
        let inst = Instance::from_parts(graph, vec![5; n], 0).unwrap();
        assert!(matches!(
            frontier_count(&inst),
            Err(Error::OracleInfeasible { .. })
        ));
    }
}
