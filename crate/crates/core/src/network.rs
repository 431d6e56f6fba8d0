//! Metric networks: weighted multigraphs seen as a continuum of points.
//!
//! A [`Point`] sits on an edge `(u, v)` with barycentric weight `alpha` on `u`:
//! `alpha = 1` is `u`, `alpha = 0` is `v`. Internally most code works with the
//! arc offset `alpha * length`, which is the distance from `v` along the edge.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, serde_q, Q};
use crate::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub length: Q,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, w: VertexId) -> bool {
        self.u == w || self.v == w
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub edge: EdgeId,
    #[serde(with = "serde_q")]
    pub alpha: Q,
}

impl Point {
    pub fn new(edge: EdgeId, alpha: Q) -> Self {
        Point { edge, alpha }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(edge {}, alpha {})", self.edge, self.alpha)
    }
}

/// A point with vertex identity resolved. Interior points carry the offset from
/// the edge's `v` endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Vertex(VertexId),
    Interior { edge: EdgeId, offset: Q },
}

/// Sub-interval of an edge in barycentric units, `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub edge: EdgeId,
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    /// Both endpoints have degree at least three.
    InteriorInterior,
    InteriorLeaf,
    LeafLeaf,
    /// Touches a degree-2 vertex; only on networks with `degree2_allowed`.
    Other,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClasses {
    pub interior_interior: Vec<EdgeId>,
    pub interior_leaf: Vec<EdgeId>,
    pub leaf_leaf: Vec<EdgeId>,
    pub other: Vec<EdgeId>,
}

#[derive(Clone, Debug)]
pub struct Network {
    names: Vec<String>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    degree2_allowed: bool,
    dist: Vec<Vec<Q>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.edges == other.edges
            && self.degree2_allowed == other.degree2_allowed
    }
}

impl Eq for Network {}

impl Network {
    pub fn new(names: Vec<String>, edges: Vec<Edge>, degree2_allowed: bool) -> Result<Self> {
        let nv = names.len();
        if edges.is_empty() {
            return Err(Error::InvalidNetwork("network has no edges".into()));
        }
        let mut seen = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate vertex {name:?}")));
            }
        }
        let mut incident = vec![Vec::new(); nv];
        for (id, e) in edges.iter().enumerate() {
            if e.u >= nv || e.v >= nv {
                return Err(Error::InvalidNetwork(format!("edge {id} names an unknown vertex")));
            }
            if e.u == e.v {
                return Err(Error::InvalidNetwork(format!(
                    "edge {id} is a self-loop at {:?}; split it by inserting a vertex",
                    names[e.u]
                )));
            }
            if e.length <= Q::zero() {
                return Err(Error::InvalidNetwork(format!("edge {id} has non-positive length")));
            }
            incident[e.u].push(id);
            incident[e.v].push(id);
        }
        let mut net = Network {
            names,
            edges,
            incident,
            degree2_allowed,
            dist: Vec::new(),
        };
        if !net.is_connected() {
            return Err(Error::InvalidNetwork("network is not connected".into()));
        }
        net.dist = net.all_pairs();
        Ok(net)
    }

    pub fn from_named(vertices: &[&str], edges: &[(&str, &str, Q)]) -> Result<Self> {
        let names: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
        let edges = resolve_edges(&names, edges.iter().map(|(a, b, l)| (*a, *b, l.clone())))?;
        Network::new(names, edges, false)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: NetworkJson =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("network JSON: {e}")))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkJson::from(self.clone())).expect("network serializes")
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn length(&self, e: EdgeId) -> &Q {
        &self.edges[e].length
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn vertex_degree(&self, v: VertexId) -> usize {
        self.incident[v].len()
    }

    pub fn degree2_allowed(&self) -> bool {
        self.degree2_allowed
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.vertex_degree(v) == 1
    }

    /// Shortest-path distance between two vertices.
    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> &Q {
        &self.dist[a][b]
    }

    pub fn total_measure(&self) -> Q {
        self.edges.iter().map(|e| e.length.clone()).sum()
    }

    pub fn min_length(&self) -> Q {
        self.edges
            .iter()
            .map(|e| e.length.clone())
            .min()
            .expect("network has edges")
    }

    pub fn interval_measure(&self, i: &Interval) -> Q {
        self.length(i.edge) * (&i.hi - &i.lo)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.edge >= self.edges.len() {
            return Err(Error::InvalidPoint(format!("unknown edge {}", p.edge)));
        }
        if p.alpha < Q::zero() || p.alpha > Q::one() {
            return Err(Error::InvalidPoint(format!("alpha {} outside [0, 1]", p.alpha)));
        }
        Ok(())
    }

    pub fn locate(&self, p: &Point) -> Result<Location> {
        self.check_point(p)?;
        let e = &self.edges[p.edge];
        Ok(if p.alpha.is_zero() {
            Location::Vertex(e.v)
        } else if p.alpha.is_one() {
            Location::Vertex(e.u)
        } else {
            Location::Interior {
                edge: p.edge,
                offset: &p.alpha * &e.length,
            }
        })
    }

    /// Canonical point for a location: vertices are written on their first incident edge.
    pub fn point_of(&self, loc: &Location) -> Point {
        match loc {
            Location::Vertex(w) => self.vertex_point(*w),
            Location::Interior { edge, offset } => Point::new(*edge, offset / self.length(*edge)),
        }
    }

    pub fn vertex_point(&self, w: VertexId) -> Point {
        let e = self.incident[w][0];
        let alpha = if self.edges[e].u == w { Q::one() } else { Q::zero() };
        Point::new(e, alpha)
    }

    /// Point on `e` at arc distance `dist` from its endpoint `from`.
    pub fn point_from(&self, e: EdgeId, from: VertexId, dist: &Q) -> Result<Point> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| Error::InvalidPoint(format!("unknown edge {e}")))?;
        if !edge.touches(from) {
            return Err(Error::InvalidArgument(format!("vertex {from} is not an endpoint of edge {e}")));
        }
        let t = dist / &edge.length;
        let alpha = if from == edge.v { t } else { Q::one() - t };
        let p = Point::new(e, alpha);
        self.check_point(&p)?;
        Ok(p)
    }

    /// The point `alpha * a + (1 - alpha) * b` on edge `e` joining `a` and `b`.
    pub fn triplet(&self, e: EdgeId, a: VertexId, b: VertexId, alpha: Q) -> Result<Point> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| Error::InvalidPoint(format!("unknown edge {e}")))?;
        let p = if (edge.u, edge.v) == (a, b) {
            Point::new(e, alpha)
        } else if (edge.u, edge.v) == (b, a) {
            Point::new(e, Q::one() - alpha)
        } else {
            return Err(Error::InvalidPoint(format!("edge {e} does not join {a} and {b}")));
        };
        self.check_point(&p)?;
        Ok(p)
    }

    /// Distance from a location to every vertex.
    pub fn distances_from(&self, loc: &Location) -> Vec<Q> {
        match loc {
            Location::Vertex(w) => self.dist[*w].clone(),
            Location::Interior { edge, offset } => {
                let e = &self.edges[*edge];
                let back = &e.length - offset;
                (0..self.vertex_count())
                    .map(|w| {
                        rational::min(offset + &self.dist[e.v][w], &back + &self.dist[e.u][w])
                    })
                    .collect()
            }
        }
    }

    pub fn location_distance(&self, a: &Location, b: &Location) -> Q {
        match (a, b) {
            (Location::Vertex(x), Location::Vertex(y)) => self.dist[*x][*y].clone(),
            (loc, Location::Vertex(w)) | (Location::Vertex(w), loc) => {
                self.distances_from(loc)[*w].clone()
            }
            (Location::Interior { edge: ea, offset: xa }, Location::Interior { edge: eb, offset: xb }) => {
                let from_a = self.distances_from(a);
                let e = &self.edges[*eb];
                let mut best = rational::min(
                    &from_a[e.v] + xb,
                    &from_a[e.u] + (&e.length - xb),
                );
                if ea == eb {
                    let direct = if xa > xb { xa - xb } else { xb - xa };
                    best = rational::min(best, direct);
                }
                best
            }
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<Q> {
        let a = self.locate(x)?;
        let b = self.locate(y)?;
        Ok(self.location_distance(&a, &b))
    }

    pub fn degree(&self, x: &Point) -> Result<usize> {
        Ok(match self.locate(x)? {
            Location::Vertex(w) => self.vertex_degree(w),
            Location::Interior { .. } => 2,
        })
    }

    pub fn location_degree(&self, loc: &Location) -> usize {
        match loc {
            Location::Vertex(w) => self.vertex_degree(*w),
            Location::Interior { .. } => 2,
        }
    }

    /// Suppresses degree-2 vertices by merging their two edges. A degree-2 vertex
    /// whose edges both lead to the same neighbour is kept (merging would create a
    /// self-loop) and the result is flagged `degree2_allowed`. Networks already
    /// flagged are returned unchanged.
    pub fn normalize(&self) -> Network {
        if self.degree2_allowed {
            return self.clone();
        }
        let mut names = self.names.clone();
        let mut edges = self.edges.clone();
        loop {
            let counts = degree_counts(names.len(), &edges);
            let pick = (0..names.len()).find_map(|w| {
                if counts[w] != 2 {
                    return None;
                }
                let inc: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].touches(w)).collect();
                let (a, b) = (edges[inc[0]].other(w), edges[inc[1]].other(w));
                (a != b).then_some((w, inc[0], inc[1], a, b))
            });
            let Some((w, e1, e2, a, b)) = pick else { break };
            let merged = Edge {
                u: a,
                v: b,
                length: &edges[e1].length + &edges[e2].length,
            };
            edges[e1] = merged;
            edges.remove(e2);
            names.remove(w);
            for e in edges.iter_mut() {
                if e.u > w {
                    e.u -= 1;
                }
                if e.v > w {
                    e.v -= 1;
                }
            }
        }
        let has_deg2 = degree_counts(names.len(), &edges).contains(&2);
        Network::new(names, edges, has_deg2).expect("normalization preserves validity")
    }

    pub fn classify(&self, e: EdgeId) -> Result<EdgeClass> {
        let edge = &self.edges[e];
        let kind = |w: VertexId| match self.vertex_degree(w) {
            1 => Ok(Some(false)),
            2 if self.degree2_allowed => Ok(None),
            2 => Err(Error::NormalizationRequired(self.names[w].clone())),
            _ => Ok(Some(true)),
        };
        Ok(match (kind(edge.u)?, kind(edge.v)?) {
            (Some(true), Some(true)) => EdgeClass::InteriorInterior,
            (Some(true), Some(false)) | (Some(false), Some(true)) => EdgeClass::InteriorLeaf,
            (Some(false), Some(false)) => EdgeClass::LeafLeaf,
            _ => EdgeClass::Other,
        })
    }

    pub fn classify_edges(&self) -> Result<EdgeClasses> {
        let mut out = EdgeClasses::default();
        for e in 0..self.edge_count() {
            match self.classify(e)? {
                EdgeClass::InteriorInterior => out.interior_interior.push(e),
                EdgeClass::InteriorLeaf => out.interior_leaf.push(e),
                EdgeClass::LeafLeaf => out.leaf_leaf.push(e),
                EdgeClass::Other => out.other.push(e),
            }
        }
        Ok(out)
    }

    /// Vertices of degree at least three.
    pub fn interior_vertices(&self) -> Vec<VertexId> {
        (0..self.vertex_count()).filter(|&w| self.vertex_degree(w) >= 3).collect()
    }

    pub fn leaves(&self) -> Vec<VertexId> {
        (0..self.vertex_count()).filter(|&w| self.is_leaf(w)).collect()
    }

    /// Multiplies every edge length by `s > 0`.
    pub fn scaled(&self, s: &Q) -> Network {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                u: e.u,
                v: e.v,
                length: &e.length * s,
            })
            .collect();
        Network::new(self.names.clone(), edges, self.degree2_allowed).expect("scaling keeps validity")
    }

    fn is_connected(&self) -> bool {
        let nv = self.vertex_count();
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(w) = queue.pop_front() {
            for &e in &self.incident[w] {
                let x = self.edges[e].other(w);
                if !seen[x] {
                    seen[x] = true;
                    queue.push_back(x);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    // Dense Dijkstra from every vertex; graphs here are small.
    fn all_pairs(&self) -> Vec<Vec<Q>> {
        let nv = self.vertex_count();
        (0..nv)
            .map(|s| {
                let mut dist: Vec<Option<Q>> = vec![None; nv];
                let mut done = vec![false; nv];
                dist[s] = Some(Q::zero());
                for _ in 0..nv {
                    let Some(w) = (0..nv)
                        .filter(|&w| !done[w] && dist[w].is_some())
                        .min_by(|&a, &b| dist[a].cmp(&dist[b]))
                    else {
                        break;
                    };
                    done[w] = true;
                    let dw = dist[w].clone().expect("reached");
                    for &e in &self.incident[w] {
                        let x = self.edges[e].other(w);
                        let cand = &dw + &self.edges[e].length;
                        if dist[x].as_ref().map_or(true, |d| cand < *d) {
                            dist[x] = Some(cand);
                        }
                    }
                }
                dist.into_iter().map(|d| d.expect("connected")).collect()
            })
            .collect()
    }
}

fn degree_counts(nv: usize, edges: &[Edge]) -> Vec<usize> {
    let mut counts = vec![0; nv];
    for e in edges {
        counts[e.u] += 1;
        counts[e.v] += 1;
    }
    counts
}

fn resolve_edges<'a>(
    names: &[String],
    edges: impl Iterator<Item = (&'a str, &'a str, Q)>,
) -> Result<Vec<Edge>> {
    let id = |s: &str| {
        names
            .iter()
            .position(|n| n == s)
            .ok_or_else(|| Error::InvalidNetwork(format!("unknown vertex {s:?}")))
    };
    edges
        .map(|(a, b, length)| Ok(Edge { u: id(a)?, v: id(b)?, length }))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    u: String,
    v: String,
    #[serde(with = "serde_q")]
    length: Q,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    vertices: Vec<String>,
    edges: Vec<EdgeJson>,
    #[serde(default)]
    degree2_allowed: bool,
}

impl TryFrom<NetworkJson> for Network {
    type Error = Error;

    fn try_from(raw: NetworkJson) -> Result<Self> {
        let edges = resolve_edges(
            &raw.vertices,
            raw.edges.iter().map(|e| (e.u.as_str(), e.v.as_str(), e.length.clone())),
        )?;
        Network::new(raw.vertices, edges, raw.degree2_allowed)
    }
}

impl From<Network> for NetworkJson {
    fn from(net: Network) -> Self {
        NetworkJson {
            edges: net
                .edges
                .iter()
                .map(|e| EdgeJson {
                    u: net.names[e.u].clone(),
                    v: net.names[e.v].clone(),
                    length: e.length.clone(),
                })
                .collect(),
            vertices: net.names,
            degree2_allowed: net.degree2_allowed,
        }
    }
}

impl Serialize for Network {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkJson::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = NetworkJson::deserialize(d)?;
        Network::try_from(raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn path() -> Network {
        Network::from_named(&["a", "b", "c"], &[("a", "b", int(1)), ("b", "c", int(2))]).unwrap()
    }

    #[test]
    fn path_normalizes_to_single_edge() {
        let net = path().normalize();
        assert_eq!(net.vertex_count(), 2);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.length(0), &int(3));
        assert!(!net.degree2_allowed());
        assert_eq!(net.vertex_names(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn triangle_normalizes_to_two_parallel_edges() {
        let net = Network::from_named(
            &["a", "b", "c"],
            &[("a", "b", int(1)), ("b", "c", int(1)), ("c", "a", int(1))],
        )
        .unwrap()
        .normalize();
        assert_eq!(net.vertex_count(), 2);
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.total_measure(), int(3));
        assert!(net.degree2_allowed());
    }

    #[test]
    fn normalize_is_identity_without_degree_two() {
        let star = Network::from_named(
            &["c", "x", "y", "z"],
            &[("x", "c", int(1)), ("y", "c", int(2)), ("z", "c", int(3))],
        )
        .unwrap();
        assert_eq!(star.normalize(), star);
    }

    #[test]
    fn rejects_self_loop_and_disconnected() {
        let looped = Network::from_named(&["a", "b"], &[("a", "b", int(1)), ("a", "a", int(1))]);
        assert!(matches!(looped, Err(Error::InvalidNetwork(_))));
        let split = Network::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                Edge { u: 0, v: 1, length: int(1) },
                Edge { u: 2, v: 3, length: int(1) },
            ],
            false,
        );
        assert!(matches!(split, Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn degree_two_requires_normalization_before_classification() {
        let raw = r#"{"vertices":["a","b","c"],"edges":[{"u":"a","v":"b","length":1},{"u":"b","v":"c","length":"2"}]}"#;
        let net = Network::from_json(raw).unwrap();
        assert!(matches!(net.classify_edges(), Err(Error::NormalizationRequired(v)) if v == "b"));
        assert_eq!(net.normalize().classify_edges().unwrap().leaf_leaf, vec![0]);
    }

    #[test]
    fn json_round_trip() {
        let raw = r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","length":"3/2"}],"degree2_allowed":false}"#;
        let net = Network::from_json(raw).unwrap();
        assert_eq!(net.length(0), &ratio(3, 2));
        assert_eq!(Network::from_json(&net.to_json()).unwrap(), net);
    }

    #[test]
    fn vertex_points_compare_by_vertex() {
        let net = path().normalize();
        let star = Network::from_named(
            &["c", "x", "y", "z"],
            &[("x", "c", int(1)), ("c", "y", int(2)), ("z", "c", int(3))],
        )
        .unwrap();
        let a = star.locate(&Point::new(0, int(0))).unwrap();
        let b = star.locate(&Point::new(1, int(1))).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, Location::Vertex(0));
        assert_eq!(
            net.triplet(0, 1, 0, ratio(1, 3)).unwrap(),
            net.triplet(0, 0, 1, ratio(2, 3)).unwrap()
        );
    }

    #[test]
    fn degrees() {
        let star = Network::from_named(
            &["c", "x", "y", "z"],
            &[("x", "c", int(1)), ("y", "c", int(1)), ("z", "c", int(1))],
        )
        .unwrap();
        assert_eq!(star.degree(&Point::new(0, ratio(1, 2))).unwrap(), 2);
        assert_eq!(star.degree(&Point::new(0, int(0))).unwrap(), 3);
        assert_eq!(star.degree(&Point::new(0, int(1))).unwrap(), 1);
        assert!(matches!(star.degree(&Point::new(7, int(0))), Err(Error::InvalidPoint(_))));
        assert!(matches!(star.locate(&Point::new(0, int(2))), Err(Error::InvalidPoint(_))));
    }

    #[test]
    fn classification_of_single_edge_and_circle() {
        let seg = path().normalize();
        let c = seg.classify_edges().unwrap();
        assert_eq!(c.leaf_leaf, vec![0]);
        assert!(c.interior_interior.is_empty() && c.interior_leaf.is_empty());

        let circle = Network::new(
            vec!["a".into(), "b".into()],
            vec![
                Edge { u: 1, v: 0, length: int(1) },
                Edge { u: 0, v: 1, length: int(1) },
            ],
            true,
        )
        .unwrap();
        assert_eq!(circle.classify_edges().unwrap().other, vec![0, 1]);
        assert_eq!(circle.normalize(), circle);
    }

    #[test]
    fn same_edge_distance_can_go_around() {
        // Two parallel edges of lengths 10 and 1: points near opposite ends of the
        // long edge are closer through the short one.
        let net = Network::new(
            vec!["a".into(), "b".into()],
            vec![
                Edge { u: 0, v: 1, length: int(10) },
                Edge { u: 0, v: 1, length: int(1) },
            ],
            true,
        )
        .unwrap();
        let x = Point::new(0, ratio(1, 10));
        let y = Point::new(0, ratio(9, 10));
        assert_eq!(net.distance(&x, &y).unwrap(), int(3));
        assert_eq!(net.distance(&x, &x).unwrap(), int(0));
    }
}
