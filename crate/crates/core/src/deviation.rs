// Payoff of a single deviating player against a fixed residual profile, evaluated
// symbolically as a linear function of the deviator's offset on an edge.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::cells::{self, VertexField};
use crate::network::{EdgeId, Location, Network, Point, VertexId};
use crate::rational::{half, ratio, Q};

/// `c + m * s`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Lin {
    pub c: Q,
    pub m: Q,
}

impl Lin {
    pub fn constant(c: Q) -> Lin {
        Lin { c, m: Q::zero() }
    }

    pub fn var() -> Lin {
        Lin { c: Q::zero(), m: Q::one() }
    }

    pub fn at(&self, s: &Q) -> Q {
        &self.c + &self.m * s
    }

    fn add(&self, o: &Lin) -> Lin {
        Lin { c: &self.c + &o.c, m: &self.m + &o.m }
    }

    fn sub(&self, o: &Lin) -> Lin {
        Lin { c: &self.c - &o.c, m: &self.m - &o.m }
    }

    fn plus(&self, k: &Q) -> Lin {
        Lin { c: &self.c + k, m: self.m.clone() }
    }

    fn scale(&self, k: &Q) -> Lin {
        Lin { c: &self.c * k, m: &self.m * k }
    }

    fn halved(&self) -> Lin {
        Lin { c: half(&self.c), m: half(&self.m) }
    }

    fn neg(&self) -> Lin {
        Lin { c: -&self.c, m: -&self.m }
    }
}

/// Compares linear functions just to the right of `s0` and remembers the first
/// crossing after `s0`, which bounds the stretch where every comparison holds.
pub(crate) struct Probe {
    s0: Q,
    horizon: Option<Q>,
}

impl Probe {
    pub fn new(s0: Q) -> Probe {
        Probe { s0, horizon: None }
    }

    fn cmp(&mut self, a: &Lin, b: &Lin) -> Ordering {
        let dc = &a.c - &b.c;
        let dm = &a.m - &b.m;
        let zero = Q::zero();
        if !dm.is_zero() {
            let cross = -&dc / &dm;
            if cross > self.s0 && self.horizon.as_ref().map_or(true, |h| &cross < h) {
                self.horizon = Some(cross);
            }
        }
        let val = &dc + &dm * &self.s0;
        if !val.is_zero() {
            val.cmp(&zero)
        } else {
            dm.cmp(&zero)
        }
    }

    fn min(&mut self, a: Lin, b: Lin) -> Lin {
        if self.cmp(&a, &b) == Ordering::Greater {
            b
        } else {
            a
        }
    }

    fn clamp(&mut self, x: Lin, lo: &Q, hi: &Q) -> Lin {
        let (l, h) = (Lin::constant(lo.clone()), Lin::constant(hi.clone()));
        if self.cmp(&x, &l) == Ordering::Less {
            l
        } else if self.cmp(&x, &h) == Ordering::Greater {
            h
        } else {
            x
        }
    }
}

pub(crate) enum Pos<'a> {
    Vertex(VertexId),
    /// Offset `s` on `edge`, strictly between the residual locations (or edge
    /// ends) `left` and `right`.
    Edge {
        edge: EdgeId,
        s: Lin,
        left: Option<&'a Q>,
        right: Option<&'a Q>,
    },
}

/// The profile without the deviating player.
pub(crate) struct Residual {
    pub locs: Vec<Location>,
    pub mult: Vec<usize>,
    pub masses: Vec<Q>,
    field: VertexField,
    lists: Vec<Vec<(Q, usize)>>,
}

impl Residual {
    pub fn new(net: &Network, locs: Vec<Location>, mult: Vec<usize>) -> Residual {
        let dec = cells::decompose(net, &locs);
        let masses = cells::masses(&dec.pieces, locs.len());
        let lists = cells::interior_lists(net, &locs);
        Residual { locs, mult, masses, field: dec.field, lists }
    }

    pub fn eval(&self, net: &Network, pos: &Pos, probe: &mut Probe) -> Lin {
        let nv = net.vertex_count();
        let mut reach = Vec::with_capacity(nv);
        let mut share = Vec::with_capacity(nv);
        for w in 0..nv {
            let dy = match pos {
                Pos::Vertex(w0) => Lin::constant(net.vertex_distance(*w0, w).clone()),
                Pos::Edge { edge, s, .. } => {
                    let e = net.edge(*edge);
                    let via_v = s.plus(net.vertex_distance(e.v, w));
                    let via_u = s.neg().plus(&(&e.length + net.vertex_distance(e.u, w)));
                    probe.min(via_v, via_u)
                }
            };
            let dr = Lin::constant(self.field.dist[w].clone());
            match probe.cmp(&dy, &dr) {
                Ordering::Less => {
                    reach.push(dy);
                    share.push(Q::one());
                }
                Ordering::Equal => {
                    reach.push(dr);
                    share.push(ratio(1, self.field.owners[w].len() as i64 + 1));
                }
                Ordering::Greater => {
                    reach.push(dr);
                    share.push(Q::zero());
                }
            }
        }
        let own = match pos {
            Pos::Edge { edge, .. } => Some(*edge),
            Pos::Vertex(_) => None,
        };
        let zero = Q::zero();
        let mut mass = Lin::constant(Q::zero());
        for (id, e) in net.edges().iter().enumerate() {
            if Some(id) == own {
                continue;
            }
            let (sv, su) = (&share[e.v], &share[e.u]);
            if sv.is_zero() && su.is_zero() {
                continue;
            }
            let list = &self.lists[id];
            if list.is_empty() {
                let z = reach[e.u].plus(&e.length).sub(&reach[e.v]).halved();
                let z = probe.clamp(z, &zero, &e.length);
                let rest = z.neg().plus(&e.length);
                mass = mass.add(&z.scale(sv)).add(&rest.scale(su));
            } else {
                let p1 = &list[0].0;
                let pm = &list[list.len() - 1].0;
                if !sv.is_zero() {
                    let z = reach[e.v].neg().plus(p1).halved();
                    mass = mass.add(&z.scale(sv));
                }
                if !su.is_zero() {
                    let z = reach[e.u].neg().plus(&(&e.length - pm)).halved();
                    mass = mass.add(&z.scale(su));
                }
            }
        }
        if let Pos::Edge { edge, s, left, right } = pos {
            let e = net.edge(*edge);
            let lpart = match left {
                Some(q) => s.plus(&-*q).halved(),
                None => {
                    let z = s.sub(&reach[e.v]).halved();
                    s.sub(&z).add(&z.scale(&share[e.v]))
                }
            };
            let back = s.neg().plus(&e.length);
            let rpart = match right {
                Some(q) => back.plus(&(*q - &e.length)).halved(),
                None => {
                    let w = back.sub(&reach[e.u]).halved();
                    back.sub(&w).add(&w.scale(&share[e.u]))
                }
            };
            mass = mass.add(&lpart).add(&rpart);
        }
        mass
    }

    /// Exact deviator payoff at a point that is not a residual location.
    #[cfg(test)]
    pub fn payoff_at(&self, net: &Network, y: &Point) -> Q {
        let loc = net.locate(y).expect("valid point");
        if let Ok(i) = self.locs.binary_search(&loc) {
            return &self.masses[i] / Q::from_integer((self.mult[i] + 1).into());
        }
        let mut probe = Probe::new(Q::zero());
        match loc {
            Location::Vertex(w) => self.eval(net, &Pos::Vertex(w), &mut probe).c,
            Location::Interior { edge, offset } => {
                let list = &self.lists[edge];
                let left = list.iter().rev().find(|(o, _)| o < &offset).map(|(o, _)| o);
                let right = list.iter().find(|(o, _)| o > &offset).map(|(o, _)| o);
                let pos = Pos::Edge {
                    edge,
                    s: Lin::constant(offset.clone()),
                    left,
                    right,
                };
                self.eval(net, &pos, &mut probe).c
            }
        }
    }
}

/// How a supremum candidate is reached.
#[derive(Clone, Debug)]
pub(crate) enum Reach {
    At(Point),
    /// Limit approaching `offset` on `edge` from larger (`from_above`) or smaller offsets.
    Limit { edge: EdgeId, offset: Q, from_above: bool },
}

pub(crate) struct Candidate {
    pub value: Q,
    pub attained: bool,
    pub reach: Reach,
}

/// Every closed point and one-sided limit that can realise the supremum of the
/// deviator's payoff.
pub(crate) fn candidates(net: &Network, res: &Residual) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (i, loc) in res.locs.iter().enumerate() {
        out.push(Candidate {
            value: &res.masses[i] / Q::from_integer((res.mult[i] + 1).into()),
            attained: true,
            reach: Reach::At(net.point_of(loc)),
        });
    }
    for w in 0..net.vertex_count() {
        if res.locs.binary_search(&Location::Vertex(w)).is_ok() {
            continue;
        }
        let mut probe = Probe::new(Q::zero());
        out.push(Candidate {
            value: res.eval(net, &Pos::Vertex(w), &mut probe).c,
            attained: true,
            reach: Reach::At(net.vertex_point(w)),
        });
    }
    for edge in 0..net.edge_count() {
        let len = net.length(edge);
        let list = &res.lists[edge];
        let mut stops: Vec<(Q, bool)> = vec![(Q::zero(), false)];
        stops.extend(list.iter().map(|(o, _)| (o.clone(), true)));
        stops.push((len.clone(), false));
        for pair in stops.windows(2) {
            let ((a, la), (b, lb)) = (&pair[0], &pair[1]);
            let left = la.then_some(a);
            let right = lb.then_some(b);
            if left.is_some() && right.is_some() {
                let mid = half(&(a + b));
                out.push(Candidate {
                    value: half(&(b - a)),
                    attained: true,
                    reach: Reach::At(Point::new(edge, mid / len)),
                });
                continue;
            }
            sweep(net, res, edge, a, b, left, right, &mut out);
        }
    }
    out
}

// Walks the open stretch (a, b) piece by piece.
#[allow(clippy::too_many_arguments)]
fn sweep(
    net: &Network,
    res: &Residual,
    edge: EdgeId,
    a: &Q,
    b: &Q,
    left: Option<&Q>,
    right: Option<&Q>,
    out: &mut Vec<Candidate>,
) {
    let len = net.length(edge);
    let at = |s: &Q| {
        let mut probe = Probe::new(s.clone());
        let pos = Pos::Edge { edge, s: Lin::constant(s.clone()), left, right };
        res.eval(net, &pos, &mut probe).c
    };
    let mut lo = a.clone();
    loop {
        let mut probe = Probe::new(lo.clone());
        let pos = Pos::Edge { edge, s: Lin::var(), left, right };
        let f = res.eval(net, &pos, &mut probe);
        let hi = match probe.horizon {
            Some(h) if &h < b => h,
            _ => b.clone(),
        };
        for t in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
            let s = &lo + (&hi - &lo) * t;
            assert_eq!(at(&s), f.at(&s), "deviation payoff is not affine on ({lo}, {hi}) of edge {edge}");
        }
        if f.m.is_zero() {
            out.push(Candidate {
                value: f.c.clone(),
                attained: true,
                reach: Reach::At(Point::new(edge, half(&(&lo + &hi)) / len)),
            });
        } else {
            out.push(Candidate {
                value: f.at(&lo),
                attained: false,
                reach: Reach::Limit { edge, offset: lo.clone(), from_above: true },
            });
            out.push(Candidate {
                value: f.at(&hi),
                attained: false,
                reach: Reach::Limit { edge, offset: hi.clone(), from_above: false },
            });
        }
        if &hi == b {
            break;
        }
        out.push(Candidate {
            value: at(&hi),
            attained: true,
            reach: Reach::At(Point::new(edge, &hi / len)),
        });
        lo = hi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::Occupancy;
    use crate::network::Edge;
    use crate::payoff::{attraction, Profile};
    use crate::rational::int;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_net(rng: &mut ChaCha8Rng) -> Network {
        loop {
            let nv = rng.gen_range(2..=5);
            let ne = rng.gen_range(nv - 1..=nv + 2);
            let mut edges = Vec::new();
            for v in 1..nv {
                let u = rng.gen_range(0..v);
                edges.push(Edge { u, v, length: ratio(rng.gen_range(1..=6), rng.gen_range(1..=3)) });
            }
            while edges.len() < ne {
                let u = rng.gen_range(0..nv);
                let v = rng.gen_range(0..nv);
                if u != v {
                    edges.push(Edge { u, v, length: ratio(rng.gen_range(1..=6), rng.gen_range(1..=3)) });
                }
            }
            let names = (0..nv).map(|i| format!("v{i}")).collect();
            if let Ok(net) = Network::new(names, edges, true) {
                return net;
            }
        }
    }

    fn random_point(net: &Network, rng: &mut ChaCha8Rng) -> Point {
        let e = rng.gen_range(0..net.edge_count());
        let alpha = match rng.gen_range(0..6) {
            0 => int(0),
            1 => int(1),
            _ => ratio(rng.gen_range(0..=12), 12),
        };
        Point::new(e, alpha)
    }

    #[test]
    fn symbolic_payoff_matches_full_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let net = random_net(&mut rng);
            let n = rng.gen_range(2..=5);
            let profile: Profile = (0..n).map(|_| random_point(&net, &mut rng)).collect();
            let i = rng.gen_range(0..n);
            let rest = profile.without_player(i);
            let occ = Occupancy::from_points(&net, rest.points()).unwrap();
            let res = Residual::new(&net, occ.locs.clone(), occ.mult.clone());
            for _ in 0..5 {
                let y = random_point(&net, &mut rng);
                let full = attraction(&net, &profile.with_player(i, y.clone())).unwrap().payoffs[i].clone();
                assert_eq!(res.payoff_at(&net, &y), full, "net {net:?} profile {profile:?} i {i} y {y}");
            }
        }
    }

    #[test]
    fn probe_tracks_first_crossing() {
        let mut p = Probe::new(int(0));
        let a = Lin::var();
        let b = Lin::constant(int(2));
        assert_eq!(p.cmp(&a, &b), Ordering::Less);
        assert_eq!(p.cmp(&a.scale(&int(4)), &b), Ordering::Less);
        assert_eq!(p.horizon, Some(ratio(1, 2)));
        // equal at s0, decided by slope
        let mut p = Probe::new(int(2));
        assert_eq!(p.cmp(&a, &b), Ordering::Greater);
        assert_eq!(p.horizon, None);
    }
}
