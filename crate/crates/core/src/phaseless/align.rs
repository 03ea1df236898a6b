//! Reciprocity alignment of independently retrieved rows.
//!
//! Row `i` is known up to `R_i = e^{iφ} T_i` or `R_i = e^{iφ} conj(T_i)`.
//! Reciprocity `u∞(x̂_i, d_j) = u∞(−d_j, −x̂_i)` ties row `i` to row `p` via
//! `T_i[A(p)] = T_p[A(i)]`, with `A` the antipode map. A single link fixes
//! the relative phase of two rows but not their relative conjugation, so
//! every row after the first two is placed against at least two placed
//! neighbours, and the first two are chosen jointly with a third.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{RetrievedRow, ACTIVITY_FLOOR};
use crate::geometry::DirectionRule;
use crate::{CMatrix, Error, Result};

#[derive(Debug, Clone)]
pub struct Alignment {
    pub values: CMatrix,
    /// `T_i = e^{iφ_i} R_i`, or `e^{iφ_i} conj(R_i)` when `conjugated[i]`.
    pub phases: Vec<f64>,
    pub conjugated: Vec<bool>,
    pub report: AlignmentReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    /// Largest `|T_i[A(p)] − T_p[A(i)]|` over all links, relative to the
    /// largest retrieved modulus.
    pub worst_link_residual: f64,
    pub links_checked: usize,
    pub zero_rows: usize,
    /// Rows placed against a single neighbour, whose conjugation is unresolved.
    pub weakly_placed: usize,
}

#[derive(Clone, Copy)]
struct Placement {
    phase: Complex64,
    conj: bool,
}

impl Placement {
    fn apply(&self, v: Complex64) -> Complex64 {
        self.phase * if self.conj { v.conj() } else { v }
    }
}

struct Graph<'a> {
    rows: &'a [RetrievedRow],
    antipode: Vec<usize>,
    strength: Vec<f64>,
    n: usize,
}

impl Graph<'_> {
    fn s(&self, i: usize, p: usize) -> f64 {
        self.strength[i * self.n + p]
    }

    /// Entry of row `i` shared with row `p`.
    fn shared(&self, i: usize, p: usize) -> Complex64 {
        self.rows[i].values[self.antipode[p]]
    }

    /// Best placement of `p` against the placed rows, with its coherence
    /// `|Σ t conj(S(obs))| / Σ |t||obs|` in `[0, 1]`.
    fn place(&self, p: usize, placed: &[Option<Placement>], conj: bool) -> (Placement, f64) {
        let mut z = Complex64::new(0.0, 0.0);
        let mut total = 0.0;
        for (q, g) in placed.iter().enumerate() {
            let Some(g) = g else { continue };
            if q == p || self.s(p, q) == 0.0 {
                continue;
            }
            let target = g.apply(self.shared(q, p));
            let obs = self.shared(p, q);
            let obs = if conj { obs.conj() } else { obs };
            z += target * obs.conj();
            total += target.norm() * obs.norm();
        }
        let coherence = if total > 0.0 { z.norm() / total } else { 0.0 };
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        (Placement { phase, conj }, coherence)
    }

    fn best_placement(&self, p: usize, placed: &[Option<Placement>]) -> (Placement, f64) {
        let direct = self.place(p, placed, false);
        let flipped = self.place(p, placed, true);
        if flipped.1 > direct.1 {
            flipped
        } else {
            direct
        }
    }
}

pub fn reciprocity_align(rows: &[RetrievedRow], rule: &DirectionRule) -> Result<Alignment> {
    let n = rule.len();
    if rows.len() != n || rows.iter().any(|r| r.values.len() != n) {
        return Err(Error::InvalidInput(format!(
            "expected {n} retrieved rows of length {n}"
        )));
    }
    let antipode: Vec<usize> = (0..n).map(|i| rule.antipode(i)).collect();
    let scale = rows
        .iter()
        .flat_map(|r| r.values.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let zero_rows = rows.iter().filter(|r| r.is_zero()).count();
    if scale == 0.0 {
        return Ok(Alignment {
            values: CMatrix::zeros(n, n),
            phases: vec![0.0; n],
            conjugated: vec![false; n],
            report: AlignmentReport {
                worst_link_residual: 0.0,
                links_checked: 0,
                zero_rows,
                weakly_placed: 0,
            },
        });
    }
    let floor = ACTIVITY_FLOOR * scale;
    let mut strength = vec![0.0; n * n];
    for i in 0..n {
        for p in 0..n {
            if i != p {
                let a = rows[i].values[antipode[p]].norm();
                let b = rows[p].values[antipode[i]].norm();
                if a >= floor && b >= floor {
                    strength[i * n + p] = a.min(b);
                }
            }
        }
    }
    let graph = Graph {
        rows,
        antipode,
        strength,
        n,
    };
    let active: Vec<usize> = (0..n).filter(|&i| !rows[i].is_zero()).collect();
    let components = components(&graph, &active);
    if components.len() > 1 {
        return Err(Error::AlignmentImpossible { components });
    }

    let mut placed: Vec<Option<Placement>> = vec![None; n];
    let total = |i: usize| (0..n).map(|p| graph.s(i, p)).sum::<f64>();
    let root = active
        .iter()
        .copied()
        .max_by(|&x, &y| total(x).total_cmp(&total(y)).then(y.cmp(&x)))
        .expect("at least one active row");
    placed[root] = Some(Placement {
        phase: Complex64::new(1.0, 0.0),
        conj: false,
    });

    // strongest neighbour of the root, then a third row linked to both
    let strongest = |from: usize, exclude: &[usize]| {
        (0..n)
            .filter(|p| !exclude.contains(p) && graph.s(from, *p) > 0.0)
            .max_by(|&x, &y| {
                graph
                    .s(from, x)
                    .total_cmp(&graph.s(from, y))
                    .then(y.cmp(&x))
            })
    };
    if let Some(p) = strongest(root, &[root]) {
        let third = (0..n)
            .filter(|&q| q != root && q != p)
            .map(|q| (q, graph.s(root, q).min(graph.s(p, q))))
            .filter(|&(_, s)| s > 0.0)
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)))
            .map(|(q, _)| q);
        let mut best: Option<(Placement, f64)> = None;
        for conj in [false, true] {
            let (g, _) = graph.place(p, &placed, conj);
            let score = match third {
                Some(q) => {
                    let mut trial = placed.clone();
                    trial[p] = Some(g);
                    graph.best_placement(q, &trial).1
                }
                None => 1.0,
            };
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((g, score));
            }
        }
        placed[p] = best.map(|(g, _)| g);
    }

    // grow by the row with the strongest second link to the placed set
    let mut links: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
    let add_links = |links: &mut Vec<(f64, f64)>, q: usize, placed: &[Option<Placement>]| {
        for u in 0..n {
            if placed[u].is_none() {
                let s = graph.s(u, q);
                let (b1, b2) = links[u];
                links[u] = if s > b1 { (s, b1) } else { (b1, b2.max(s)) };
            }
        }
    };
    for q in 0..n {
        if placed[q].is_some() {
            add_links(&mut links, q, &placed);
        }
    }
    let mut weakly_placed = 0;
    loop {
        let next = active
            .iter()
            .copied()
            .filter(|&u| placed[u].is_none() && links[u].0 > 0.0)
            .max_by(|&x, &y| {
                links[x]
                    .1
                    .total_cmp(&links[y].1)
                    .then(links[x].0.total_cmp(&links[y].0))
                    .then(y.cmp(&x))
            });
        let Some(u) = next else { break };
        let g = if links[u].1 > 0.0 {
            graph.best_placement(u, &placed).0
        } else {
            weakly_placed += 1;
            graph.place(u, &placed, false).0
        };
        placed[u] = Some(g);
        add_links(&mut links, u, &placed);
    }

    let mut values = CMatrix::zeros(n, n);
    let mut phases = vec![0.0; n];
    let mut conjugated = vec![false; n];
    for i in 0..n {
        if let Some(g) = placed[i] {
            phases[i] = g.phase.arg();
            conjugated[i] = g.conj;
            for j in 0..n {
                values[(i, j)] = g.apply(rows[i].values[j]);
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..n {
        for p in (i + 1)..n {
            if graph.s(i, p) > 0.0 {
                let d = values[(i, graph.antipode[p])] - values[(p, graph.antipode[i])];
                worst = worst.max(d.norm() / scale);
                checked += 1;
            }
        }
    }
    Ok(Alignment {
        values,
        phases,
        conjugated,
        report: AlignmentReport {
            worst_link_residual: worst,
            links_checked: checked,
            zero_rows,
            weakly_placed,
        },
    })
}

fn components(graph: &Graph, active: &[usize]) -> Vec<Vec<usize>> {
    let n = graph.n;
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for &start in active {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for p in 0..n {
                if !seen[p] && graph.s(i, p) > 0.0 {
                    seen[p] = true;
                    comp.push(p);
                    queue.push_back(p);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
