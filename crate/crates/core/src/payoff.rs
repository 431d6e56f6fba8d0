//! Payoffs, consumer cost and half intervals of a strategy profile.

use std::ops::Index;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cells::{self, Occupancy};
use crate::network::{EdgeId, Interval, Location, Network, Point, VertexId};
use crate::rational::{half, serde_q, Q};
use crate::{Error, Result};

/// Ordered player locations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile(pub Vec<Point>);

impl Profile {
    pub fn new(points: Vec<Point>) -> Self {
        Profile(points)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.0.iter()
    }

    /// The profile with player `i` moved to `y`.
    pub fn with_player(&self, i: usize, y: Point) -> Profile {
        let mut pts = self.0.clone();
        pts[i] = y;
        Profile(pts)
    }

    pub fn without_player(&self, i: usize) -> Profile {
        let mut pts = self.0.clone();
        pts.remove(i);
        Profile(pts)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("profile JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Rewrites every point in canonical form (vertices on their first incident edge).
    pub fn canonical(&self, net: &Network) -> Result<Profile> {
        self.0
            .iter()
            .map(|p| net.locate(p).map(|l| net.point_of(&l)))
            .collect::<Result<Vec<_>>>()
            .map(Profile)
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidArgument("profile has no players".into()));
        }
        for p in &self.0 {
            net.locate(p)?;
        }
        Ok(())
    }
}

impl Index<usize> for Profile {
    type Output = Point;

    fn index(&self, i: usize) -> &Point {
        &self.0[i]
    }
}

impl FromIterator<Point> for Profile {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        Profile(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedInterval {
    pub interval: Interval,
    #[serde(with = "serde_q")]
    pub share: Q,
}

/// What one occupied location captures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub location: Point,
    pub multiplicity: usize,
    #[serde(with = "serde_q")]
    pub mass: Q,
    pub intervals: Vec<WeightedInterval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieRegion {
    pub interval: Interval,
    pub locations: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttractionReport {
    #[serde(with = "serde_q::vec")]
    pub payoffs: Vec<Q>,
    pub cells: Vec<Cell>,
    pub tie_regions: Vec<TieRegion>,
}

fn interval_of(net: &Network, p: &cells::Piece) -> Interval {
    let len = net.length(p.edge);
    Interval {
        edge: p.edge,
        lo: &p.lo / len,
        hi: &p.hi / len,
    }
}

pub fn attraction(net: &Network, profile: &Profile) -> Result<AttractionReport> {
    profile.validate(net)?;
    let occ = Occupancy::from_points(net, profile.points())?;
    let dec = cells::decompose(net, &occ.locs);
    let masses = cells::masses(&dec.pieces, occ.locs.len());
    let payoffs = occ
        .player_loc
        .iter()
        .map(|&l| &masses[l] / Q::from_integer(occ.mult[l].into()))
        .collect();
    let mut cells: Vec<Cell> = occ
        .locs
        .iter()
        .enumerate()
        .map(|(i, loc)| Cell {
            location: net.point_of(loc),
            multiplicity: occ.mult[i],
            mass: masses[i].clone(),
            intervals: Vec::new(),
        })
        .collect();
    let mut tie_regions = Vec::new();
    for p in &dec.pieces {
        let interval = interval_of(net, p);
        let share = Q::new(1.into(), p.owners.len().into());
        for &o in &p.owners {
            cells[o].intervals.push(WeightedInterval {
                interval: interval.clone(),
                share: share.clone(),
            });
        }
        if p.owners.len() > 1 {
            tie_regions.push(TieRegion {
                interval,
                locations: p.owners.iter().map(|&o| net.point_of(&occ.locs[o])).collect(),
            });
        }
    }
    Ok(AttractionReport { payoffs, cells, tie_regions })
}

pub fn payoffs(net: &Network, profile: &Profile) -> Result<Vec<Q>> {
    Ok(attraction(net, profile)?.payoffs)
}

/// Integral over the network of the distance to the nearest player.
pub fn social_cost(net: &Network, profile: &Profile) -> Result<Q> {
    profile.validate(net)?;
    let occ = Occupancy::from_points(net, profile.points())?;
    Ok(cells::cost(&cells::decompose(net, &occ.locs).pieces))
}

/// Largest distance from a consumer to the nearest player.
pub fn eccentricity(net: &Network, profile: &Profile) -> Result<Q> {
    profile.validate(net)?;
    let occ = Occupancy::from_points(net, profile.points())?;
    Ok(cells::decompose(net, &occ.locs)
        .pieces
        .iter()
        .flat_map(|p| [p.d_lo.clone(), p.d_hi.clone()])
        .max()
        .expect("non-empty network"))
}

/// Span from an occupied location to a leaf, or to the midpoint toward the next
/// occupied location.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfInterval {
    pub owner: Point,
    pub a: Point,
    pub b: Point,
    #[serde(with = "serde_q")]
    pub length: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfIntervalSet {
    pub intervals: Vec<HalfInterval>,
}

impl HalfIntervalSet {
    pub fn lengths(&self) -> Vec<Q> {
        self.intervals.iter().map(|h| h.length.clone()).collect()
    }

    pub fn total(&self) -> Q {
        self.intervals.iter().map(|h| h.length.clone()).sum()
    }

    /// Sum of squared lengths over two.
    pub fn cost(&self) -> Q {
        self.intervals.iter().map(|h| half(&(&h.length * &h.length))).sum()
    }
}

// One straight run along an edge: start offset, direction (+1 toward u) and length.
struct Leg {
    edge: EdgeId,
    start: Q,
    forward: bool,
    len: Q,
}

struct Walk {
    legs: Vec<Leg>,
    gap: Q,
    at_leaf: bool,
}

impl Walk {
    fn point_at(&self, net: &Network, mut t: Q) -> Point {
        for leg in &self.legs {
            if t <= leg.len {
                let off = if leg.forward { &leg.start + &t } else { &leg.start - &t };
                return Point::new(leg.edge, off / net.length(leg.edge));
            }
            t -= &leg.len;
        }
        unreachable!("walk shorter than requested distance")
    }
}

// Walks from offset `from` on `edge` toward vertex `toward` until the next occupied
// location or a leaf, passing through unoccupied degree-2 vertices.
fn walk(
    net: &Network,
    occ: &Occupancy,
    lists: &[Vec<(Q, usize)>],
    mut edge: EdgeId,
    mut from: Q,
    mut toward: VertexId,
) -> Result<Walk> {
    let mut legs = Vec::new();
    let mut acc = Q::zero();
    for _ in 0..=net.edge_count() {
        let e = net.edge(edge);
        let forward = toward == e.u;
        let next = if forward {
            lists[edge].iter().find(|(o, _)| o > &from).map(|(o, _)| o - &from)
        } else {
            lists[edge].iter().rev().find(|(o, _)| o < &from).map(|(o, _)| &from - o)
        };
        if let Some(gap) = next {
            acc += &gap;
            legs.push(Leg { edge, start: from, forward, len: gap });
            return Ok(Walk { legs, gap: acc, at_leaf: false });
        }
        let run = if forward { &e.length - &from } else { from.clone() };
        acc += &run;
        legs.push(Leg { edge, start: from, forward, len: run });
        if occ.index_of(&Location::Vertex(toward)).is_some() {
            return Ok(Walk { legs, gap: acc, at_leaf: false });
        }
        match net.vertex_degree(toward) {
            1 => return Ok(Walk { legs, gap: acc, at_leaf: true }),
            2 => {
                let w = toward;
                let inc = net.incident(w);
                edge = if inc[0] == edge { inc[1] } else { inc[0] };
                let ne = net.edge(edge);
                from = if ne.v == w { Q::zero() } else { ne.length.clone() };
                toward = ne.other(w);
            }
            _ => return Err(Error::VertexProperty(net.vertex_name(toward).to_string())),
        }
    }
    unreachable!("walk revisited every edge")
}

fn check_vertex_property(net: &Network, occ: &Occupancy) -> Result<()> {
    for w in net.interior_vertices() {
        if occ.index_of(&Location::Vertex(w)).is_none() {
            return Err(Error::VertexProperty(net.vertex_name(w).to_string()));
        }
    }
    Ok(())
}

// Directions leaving a location: (edge, offset on that edge, vertex headed to).
fn directions(net: &Network, loc: &Location) -> Vec<(EdgeId, Q, VertexId)> {
    match loc {
        Location::Vertex(w) => net
            .incident(*w)
            .iter()
            .map(|&e| {
                let edge = net.edge(e);
                let off = if edge.v == *w { Q::zero() } else { edge.length.clone() };
                (e, off, edge.other(*w))
            })
            .collect(),
        Location::Interior { edge, offset } => {
            let e = net.edge(*edge);
            vec![(*edge, offset.clone(), e.v), (*edge, offset.clone(), e.u)]
        }
    }
}

/// Half intervals of a profile satisfying the vertex property. Every location
/// with `m` players adds `2(m - 1)` zero-length half intervals, and an occupied
/// leaf adds one more.
pub fn half_intervals(net: &Network, profile: &Profile) -> Result<HalfIntervalSet> {
    profile.validate(net)?;
    let occ = Occupancy::from_points(net, profile.points())?;
    check_vertex_property(net, &occ)?;
    let lists = cells::interior_lists(net, &occ.locs);
    let mut intervals = Vec::new();
    for (i, loc) in occ.locs.iter().enumerate() {
        let owner = net.point_of(loc);
        let zero = HalfInterval {
            owner: owner.clone(),
            a: owner.clone(),
            b: owner.clone(),
            length: Q::zero(),
        };
        let mut zeros = 2 * (occ.mult[i] - 1);
        if net.location_degree(loc) == 1 {
            zeros += 1;
        }
        intervals.extend(std::iter::repeat(zero).take(zeros));
        for (e, off, toward) in directions(net, loc) {
            let w = walk(net, &occ, &lists, e, off, toward)?;
            let length = if w.at_leaf { w.gap.clone() } else { half(&w.gap) };
            let b = w.point_at(net, length.clone());
            intervals.push(HalfInterval {
                owner: owner.clone(),
                a: owner.clone(),
                b,
                length,
            });
        }
    }
    Ok(HalfIntervalSet { intervals })
}

/// Consumer mass on the branch of `e` leaving the occupied point `w` toward
/// `toward` that shops at `w`: half the distance to the next occupied point, or
/// the whole branch when it ends at an empty leaf.
pub fn delta(net: &Network, profile: &Profile, w: &Point, e: EdgeId, toward: VertexId) -> Result<Q> {
    profile.validate(net)?;
    if e >= net.edge_count() {
        return Err(Error::InvalidArgument(format!("unknown edge {e}")));
    }
    let occ = Occupancy::from_points(net, profile.points())?;
    let loc = net.locate(w)?;
    if occ.index_of(&loc).is_none() {
        return Err(Error::InvalidArgument(format!("{w} is not occupied")));
    }
    let dir = directions(net, &loc)
        .into_iter()
        .find(|(de, _, to)| *de == e && *to == toward)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("edge {e} toward vertex {toward} does not leave {w}"))
        })?;
    let lists = cells::interior_lists(net, &occ.locs);
    let walk = walk(net, &occ, &lists, dir.0, dir.1, dir.2)?;
    Ok(if walk.at_leaf { walk.gap } else { half(&walk.gap) })
}

/// Number of half intervals for a vertex-property profile on a normalized network.
pub fn half_interval_count(net: &Network, n: usize) -> i64 {
    let interior = net.interior_vertices().len() as i64;
    2 * n as i64 + 2 * net.edge_count() as i64 - interior - net.vertex_count() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Edge;
    use crate::rational::{int, ratio};

    fn segment() -> Network {
        Network::new(
            vec!["left".into(), "right".into()],
            vec![Edge { u: 1, v: 0, length: int(1) }],
            false,
        )
        .unwrap()
    }

    fn seg_profile(xs: &[Q]) -> Profile {
        xs.iter().map(|x| Point::new(0, x.clone())).collect()
    }

    #[test]
    fn one_player_at_middle() {
        let net = segment();
        let p = seg_profile(&[ratio(1, 2)]);
        assert_eq!(social_cost(&net, &p).unwrap(), ratio(1, 4));
        assert_eq!(payoffs(&net, &p).unwrap(), vec![int(1)]);
        assert_eq!(eccentricity(&net, &p).unwrap(), ratio(1, 2));
    }

    #[test]
    fn co_located_pair_splits_evenly() {
        let net = segment();
        let p = seg_profile(&[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(payoffs(&net, &p).unwrap(), vec![ratio(1, 2), ratio(1, 2)]);
        let h = half_intervals(&net, &p).unwrap();
        assert_eq!(h.intervals.len(), 4);
        assert_eq!(h.lengths().iter().filter(|l| l.is_zero()).count(), 2);
    }

    #[test]
    fn generic_segment_profile_has_two_n_half_intervals() {
        let net = segment();
        let p = seg_profile(&[ratio(1, 7), ratio(2, 5), ratio(5, 6)]);
        let h = half_intervals(&net, &p).unwrap();
        assert_eq!(h.intervals.len(), 6);
        assert_eq!(h.intervals.len() as i64, half_interval_count(&net, 3));
        assert_eq!(h.total(), int(1));
        assert_eq!(h.cost(), social_cost(&net, &p).unwrap());
    }

    #[test]
    fn delta_on_segment() {
        let net = segment();
        let p = seg_profile(&[ratio(1, 3), ratio(2, 3)]);
        // toward `right` (vertex 1) from 1/3: half the gap
        assert_eq!(delta(&net, &p, &p[0], 0, 1).unwrap(), ratio(1, 6));
        // toward `left`: the whole stretch to the empty leaf
        assert_eq!(delta(&net, &p, &p[0], 0, 0).unwrap(), ratio(1, 3));
        assert!(matches!(delta(&net, &p, &p[0], 3, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            delta(&net, &p, &Point::new(0, ratio(1, 2)), 0, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn vertex_property_is_required() {
        let star = Network::from_named(
            &["c", "x", "y", "z"],
            &[("x", "c", int(1)), ("y", "c", int(1)), ("z", "c", int(1))],
        )
        .unwrap();
        let p = Profile::new(vec![Point::new(0, ratio(1, 2))]);
        assert!(matches!(half_intervals(&star, &p), Err(Error::VertexProperty(v)) if v == "c"));
        let centered = Profile::new(vec![Point::new(0, int(0)), Point::new(1, ratio(1, 2))]);
        let h = half_intervals(&star, &centered).unwrap();
        assert_eq!(h.intervals.len() as i64, half_interval_count(&star, 2));
        assert_eq!(delta(&star, &centered, &centered[0], 2, 3).unwrap(), int(1));
    }

    #[test]
    fn json_shape() {
        let p = seg_profile(&[ratio(1, 2)]);
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"[{"edge":0,"alpha":"1/2"}]"#);
        assert_eq!(Profile::from_json(r#"[{"edge":0,"alpha":"1/2"}]"#).unwrap(), p);
    }
}
