//! Constructive pure equilibria for large player counts.
//!
//! Every vertex of degree `d >= 3` hosts `d` players. Each edge then carries pairs
//! of players near its ends and single players spread in between, with gaps that
//! are multiples of a common unit `xi`; a per-edge stretch factor in `[1, 2]`
//! absorbs the rounding. The player count only moves in steps, so up to one
//! redundant player per edge is dropped to hit `n` exactly.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::network::{EdgeClass, EdgeId, Network, Point, VertexId};
use crate::payoff::Profile;
use crate::rational::{self, int, serde_q, Q};
use crate::{Error, Result};

/// Smallest player count for which [`build_equilibrium`] applies.
pub fn n_bar(net: &Network) -> usize {
    let min = net.min_length();
    3 * net.edge_count()
        + net
            .edges()
            .iter()
            .map(|e| rational::ceil_usize(&(int(5) * &e.length / &min)))
            .sum::<usize>()
}

/// Player count of the layout with unit `z`.
pub fn f(net: &Network, z: &Q) -> usize {
    assert!(z > &Q::zero(), "unit must be positive");
    3 * net.edge_count()
        + net
            .edges()
            .iter()
            .map(|e| rational::ceil_usize(&(&e.length / (int(2) * z))))
            .sum::<usize>()
}

// Breakpoints of f, largest first: length / (2k) for k = 1..=depth.
fn breakpoints(net: &Network, depth: impl Fn(&Q) -> usize) -> Vec<Q> {
    let mut zs: Vec<Q> = net
        .edges()
        .iter()
        .flat_map(|e| {
            let kmax = depth(&e.length);
            (1..=kmax).map(move |k| &e.length / Q::from_integer((2 * k).into()))
        })
        .collect();
    zs.sort_by(|a, b| b.cmp(a));
    zs.dedup();
    zs
}

/// Smallest unit `z` with `f(z) = target`, if `f` takes that value.
pub fn unit_for(net: &Network, target: usize) -> Option<Q> {
    let total = net.total_measure();
    let mut extra = net.edge_count() + 2;
    loop {
        let zs = breakpoints(net, |len| {
            rational::ceil_usize(&(len * Q::from_integer(target.into()) / &total)) + extra
        });
        let values: Vec<usize> = zs.iter().map(|z| f(net, z)).collect();
        if values.last().is_some_and(|&v| v > target) {
            return zs
                .iter()
                .zip(&values)
                .filter(|(_, &v)| v == target)
                .map(|(z, _)| z.clone())
                .last();
        }
        extra *= 2;
    }
}

/// Unit `xi` and layout count `n' >= n`: `n'` is the smallest value of `f` that
/// reaches `n`, and `xi` the left end of the stretch where `f = n'`.
pub fn find_xi(net: &Network, n: usize) -> Result<(Q, usize)> {
    let n_bar = n_bar(net);
    if n < n_bar {
        return Err(Error::BelowThreshold { n, n_bar });
    }
    let total = net.total_measure();
    let mut extra = net.edge_count() + 2;
    loop {
        let zs = breakpoints(net, |len| {
            rational::ceil_usize(&(len * Q::from_integer(n.into()) / &total)) + extra
        });
        let values: Vec<usize> = zs.iter().map(|z| f(net, z)).collect();
        let n_prime = values.iter().copied().filter(|&v| v >= n).min();
        if let Some(n_prime) = n_prime {
            if values.last().is_some_and(|&v| v > n_prime) {
                let xi = zs
                    .iter()
                    .zip(&values)
                    .filter(|(_, &v)| v == n_prime)
                    .map(|(z, _)| z.clone())
                    .last()
                    .expect("n' is attained");
                return Ok((xi, n_prime));
            }
        }
        extra *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub point: Point,
    pub count: usize,
    /// Distance from the layout's reference end.
    #[serde(with = "serde_q")]
    pub offset: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLayout {
    pub edge: EdgeId,
    pub class: EdgeClass,
    /// Reference end: the degree >= 3 end of a pendant edge, otherwise the lower vertex id.
    pub from: VertexId,
    #[serde(with = "serde_q")]
    pub length: Q,
    /// `ceil(length / (2 xi))`.
    pub steps: usize,
    #[serde(with = "serde_q")]
    pub alpha: Q,
    pub slots: Vec<Slot>,
    /// Index into `slots` of the pair that may lose a redundant player.
    pub spare: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSlot {
    pub vertex: VertexId,
    pub point: Point,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAlpha {
    pub edge: EdgeId,
    #[serde(with = "serde_q")]
    pub alpha: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    #[serde(with = "serde_q")]
    pub xi: Q,
    pub n: usize,
    pub n_prime: usize,
    pub alpha_by_edge: Vec<EdgeAlpha>,
    pub vertex_slots: Vec<VertexSlot>,
    pub layout_by_edge: Vec<EdgeLayout>,
    /// Edges that lost one player of their spare pair.
    pub removed: Vec<EdgeId>,
}

impl ConstructionPlan {
    fn players(&self, drop: &[EdgeId]) -> Profile {
        let mut pts = Vec::with_capacity(self.n_prime);
        for v in &self.vertex_slots {
            pts.extend(std::iter::repeat(v.point.clone()).take(v.count));
        }
        for layout in &self.layout_by_edge {
            for (i, s) in layout.slots.iter().enumerate() {
                let cut = usize::from(i == layout.spare && drop.contains(&layout.edge));
                pts.extend(std::iter::repeat(s.point.clone()).take(s.count - cut));
            }
        }
        Profile::new(pts)
    }

    /// The layout with all `n'` players.
    pub fn full_profile(&self) -> Profile {
        self.players(&[])
    }

    /// The layout after removing redundant players: `n` players.
    pub fn profile(&self) -> Profile {
        self.players(&self.removed)
    }

    /// Points that lost a player, one per entry of `removed`.
    pub fn removed_points(&self) -> Vec<Point> {
        self.layout_by_edge
            .iter()
            .filter(|l| self.removed.contains(&l.edge))
            .map(|l| l.slots[l.spare].point.clone())
            .collect()
    }
}

fn layout_edge(net: &Network, e: EdgeId, class: EdgeClass, xi: &Q) -> Option<EdgeLayout> {
    let edge = net.edge(e);
    let len = edge.length.clone();
    let steps = rational::ceil_usize(&(&len / (int(2) * xi)));
    let c = Q::from_integer(steps.into());
    let from = match class {
        EdgeClass::InteriorLeaf => {
            if net.vertex_degree(edge.u) >= 3 {
                edge.u
            } else {
                edge.v
            }
        }
        _ => edge.u.min(edge.v),
    };
    let x = |k: i64| int(k) * xi;
    // (fixed length in units of xi, interior gaps), then offsets of the slots
    let (fixed, gaps) = match class {
        EdgeClass::InteriorLeaf => (7, 3),
        EdgeClass::InteriorInterior => (6, 2),
        EdgeClass::LeafLeaf => (8, 4),
        EdgeClass::Other => return None,
    };
    if steps <= gaps {
        return None;
    }
    let alpha = (&len - x(fixed)) / (xi * (&c - int(gaps as i64)));
    let gap = &alpha * xi;
    let singles_from = |start: Q, count: usize| -> Vec<(Q, usize)> {
        (0..count)
            .map(|i| (&start + Q::from_integer(i.into()) * &gap, 1))
            .collect()
    };
    let (mut slots, spare): (Vec<(Q, usize)>, usize) = match class {
        EdgeClass::InteriorLeaf => {
            let mut s = vec![(x(2), 2)];
            s.extend(singles_from(x(4), steps - 2));
            s.push((&len - x(1), 2));
            (s, 0)
        }
        EdgeClass::InteriorInterior => {
            let mut s = singles_from(x(2), steps - 1);
            s.push((&len - x(2), 2));
            let spare = s.len() - 1;
            (s, spare)
        }
        _ => {
            let mut s = vec![(x(1), 2)];
            s.extend(singles_from(x(3), steps - 3));
            s.push((&len - x(3), 2));
            s.push((&len - x(1), 2));
            let spare = s.len() - 2;
            (s, spare)
        }
    };
    let slots = slots
        .drain(..)
        .map(|(offset, count)| Slot {
            point: net.point_from(e, from, &offset).expect("offset within edge"),
            count,
            offset,
        })
        .collect();
    Some(EdgeLayout { edge: e, class, from, length: len, steps, alpha, slots, spare })
}

fn plan_with_unit(net: &Network, n: usize, xi: Q, n_prime: usize) -> Result<ConstructionPlan> {
    let classes = net.classify_edges()?;
    if !classes.other.is_empty() {
        return Err(Error::InvalidArgument(
            "construction needs a network without degree-2 vertices".into(),
        ));
    }
    let vertex_slots = net
        .interior_vertices()
        .into_iter()
        .map(|w| VertexSlot { vertex: w, point: net.vertex_point(w), count: net.vertex_degree(w) })
        .collect::<Vec<_>>();
    let mut layouts = Vec::with_capacity(net.edge_count());
    for e in 0..net.edge_count() {
        let layout = layout_edge(net, e, net.classify(e)?, &xi).ok_or_else(|| {
            Error::InvalidArgument(format!("unit {xi} too coarse for edge {e}"))
        })?;
        if layout.alpha < Q::one() || layout.alpha > int(2) {
            return Err(Error::InvalidArgument(format!(
                "stretch {} of edge {e} outside [1, 2]",
                layout.alpha
            )));
        }
        layouts.push(layout);
    }
    let count: usize = vertex_slots.iter().map(|v| v.count).sum::<usize>()
        + layouts.iter().flat_map(|l| l.slots.iter().map(|s| s.count)).sum::<usize>();
    assert_eq!(count, n_prime, "layout player count disagrees with f(xi)");
    if n > n_prime || n_prime - n > net.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "cannot reach {n} players from a layout of {n_prime}"
        )));
    }
    Ok(ConstructionPlan {
        alpha_by_edge: layouts
            .iter()
            .map(|l| EdgeAlpha { edge: l.edge, alpha: l.alpha.clone() })
            .collect(),
        removed: (0..n_prime - n).collect(),
        xi,
        n,
        n_prime,
        vertex_slots,
        layout_by_edge: layouts,
    })
}

pub fn build_equilibrium(net: &Network, n: usize) -> Result<(Profile, ConstructionPlan)> {
    if net.degree2_allowed() {
        return Err(Error::InvalidArgument(
            "construction needs a normalized network; use the closed forms for the circle".into(),
        ));
    }
    if !net.classify_edges()?.other.is_empty() {
        return Err(Error::InvalidArgument("construction needs a network without degree-2 vertices".into()));
    }
    let (xi, n_prime) = find_xi(net, n)?;
    let plan = plan_with_unit(net, n, xi, n_prime).unwrap_or_else(|e| panic!("construction failed: {e}"));
    Ok((plan.profile(), plan))
}

/// The same construction from a larger layout count `n_prime`, when `f` takes
/// that value and the stretch factors stay in range.
pub fn build_from_layout(net: &Network, n: usize, n_prime: usize) -> Result<(Profile, ConstructionPlan)> {
    let xi = unit_for(net, n_prime)
        .ok_or_else(|| Error::InvalidArgument(format!("no layout has exactly {n_prime} players")))?;
    let plan = plan_with_unit(net, n, xi, n_prime)?;
    Ok((plan.profile(), plan))
}

/// Consumer cost of the construction in closed form; removing redundant players
/// changes no gap, so the value holds for the `n`- and `n'`-player profiles.
pub fn constructed_cost(plan: &ConstructionPlan) -> Q {
    let xi2 = &plan.xi * &plan.xi;
    plan.layout_by_edge
        .iter()
        .map(|l| {
            let (fixed, gaps) = match l.class {
                EdgeClass::InteriorLeaf => (7, 3),
                EdgeClass::InteriorInterior => (6, 2),
                _ => (8, 4),
            };
            let spread = Q::from_integer((l.steps - gaps).into());
            int(fixed) * &xi2 / int(2) + spread * &l.alpha * &l.alpha * &xi2 / int(4)
        })
        .sum()
}
