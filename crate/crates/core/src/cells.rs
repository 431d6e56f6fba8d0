// Exact nearest-location decomposition of every edge.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::network::{EdgeId, Location, Network, Point};
use crate::rational::{self, half, Q};
use crate::Result;

/// Distinct occupied locations of a profile.
#[derive(Clone, Debug)]
pub(crate) struct Occupancy {
    pub locs: Vec<Location>,
    pub mult: Vec<usize>,
    pub player_loc: Vec<usize>,
}

impl Occupancy {
    pub fn from_points(net: &Network, pts: &[Point]) -> Result<Self> {
        let resolved = pts.iter().map(|p| net.locate(p)).collect::<Result<Vec<_>>>()?;
        // sorted order, so results do not depend on player order
        let locs: Vec<Location> = resolved.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let rank: BTreeMap<&Location, usize> = locs.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let player_loc: Vec<usize> = resolved.iter().map(|l| rank[l]).collect();
        let mut mult = vec![0; locs.len()];
        for &l in &player_loc {
            mult[l] += 1;
        }
        Ok(Occupancy { locs, mult, player_loc })
    }

    pub fn index_of(&self, loc: &Location) -> Option<usize> {
        self.locs.binary_search(loc).ok()
    }
}

/// Distance from the nearest location to each vertex, and the set of nearest locations.
#[derive(Clone, Debug)]
pub(crate) struct VertexField {
    pub dist: Vec<Q>,
    pub owners: Vec<Vec<usize>>,
}

pub(crate) fn vertex_field(net: &Network, locs: &[Location]) -> VertexField {
    assert!(!locs.is_empty(), "vertex field needs at least one location");
    let nv = net.vertex_count();
    let mut dist: Vec<Option<Q>> = vec![None; nv];
    let mut owners = vec![Vec::new(); nv];
    for (i, loc) in locs.iter().enumerate() {
        for (w, d) in net.distances_from(loc).into_iter().enumerate() {
            match &dist[w] {
                Some(best) if &d > best => {}
                Some(best) if &d == best => owners[w].push(i),
                _ => {
                    dist[w] = Some(d);
                    owners[w] = vec![i];
                }
            }
        }
    }
    VertexField {
        dist: dist.into_iter().map(|d| d.expect("some location")).collect(),
        owners,
    }
}

/// Interior locations of each edge, sorted by offset.
pub(crate) fn interior_lists(net: &Network, locs: &[Location]) -> Vec<Vec<(Q, usize)>> {
    let mut lists = vec![Vec::new(); net.edge_count()];
    for (i, loc) in locs.iter().enumerate() {
        if let Location::Interior { edge, offset } = loc {
            lists[*edge].push((offset.clone(), i));
        }
    }
    for l in &mut lists {
        l.sort();
    }
    lists
}

/// A maximal stretch `[lo, hi]` of an edge (offsets from `v`) served by `owners`;
/// the distance to the nearest location is linear from `d_lo` to `d_hi`.
#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub edge: EdgeId,
    pub lo: Q,
    pub hi: Q,
    pub owners: Vec<usize>,
    pub d_lo: Q,
    pub d_hi: Q,
}

impl Piece {
    pub fn len(&self) -> Q {
        &self.hi - &self.lo
    }
}

pub(crate) struct Decomposition {
    pub field: VertexField,
    pub pieces: Vec<Piece>,
}

pub(crate) fn decompose(net: &Network, locs: &[Location]) -> Decomposition {
    let field = vertex_field(net, locs);
    let lists = interior_lists(net, locs);
    let mut pieces = Vec::new();
    for (e, edge) in net.edges().iter().enumerate() {
        let len = &edge.length;
        let (dv, du) = (&field.dist[edge.v], &field.dist[edge.u]);
        let (ov, ou) = (&field.owners[edge.v], &field.owners[edge.u]);
        let mut push = |lo: Q, hi: Q, owners: Vec<usize>, d_lo: Q, d_hi: Q| {
            if lo < hi {
                pieces.push(Piece { edge: e, lo, hi, owners, d_lo, d_hi });
            }
        };
        let list = &lists[e];
        if list.is_empty() {
            let z = rational::clamp(half(&(du + len - dv)), &Q::zero(), len);
            push(Q::zero(), z.clone(), ov.clone(), dv.clone(), dv + &z);
            let back = len - &z;
            push(z, len.clone(), ou.clone(), du + &back, du.clone());
            continue;
        }
        let (p1, first) = &list[0];
        let z = half(&(p1 - dv));
        push(Q::zero(), z.clone(), ov.clone(), dv.clone(), dv + &z);
        push(z.clone(), p1.clone(), vec![*first], p1 - &z, Q::zero());
        for pair in list.windows(2) {
            let ((a, la), (b, lb)) = (&pair[0], &pair[1]);
            let mid = half(&(a + b));
            let gap = half(&(b - a));
            push(a.clone(), mid.clone(), vec![*la], Q::zero(), gap.clone());
            push(mid, b.clone(), vec![*lb], gap, Q::zero());
        }
        let (pm, last) = list.last().expect("non-empty");
        let w = half(&(len - pm - du));
        let cut = len - &w;
        push(pm.clone(), cut.clone(), vec![*last], Q::zero(), &cut - pm);
        push(cut, len.clone(), ou.clone(), du + &w, du.clone());
    }
    Decomposition { field, pieces }
}

/// Consumer mass captured by each location; tied pieces are split equally.
pub(crate) fn masses(pieces: &[Piece], nlocs: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); nlocs];
    for p in pieces {
        let share = p.len() / Q::from_integer(p.owners.len().into());
        for &o in &p.owners {
            out[o] += &share;
        }
    }
    out
}

pub(crate) fn cost(pieces: &[Piece]) -> Q {
    pieces
        .iter()
        .map(|p| half(&(&p.d_lo + &p.d_hi)) * p.len())
        .sum()
}
