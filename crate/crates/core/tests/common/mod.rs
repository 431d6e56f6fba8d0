// Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use netloc::network::Edge;
use netloc::rational::{int, ratio};
use netloc::{Network, Point, Profile, Q};
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn q(n: usize) -> Q {
    Q::from_integer(n.into())
}

/// Network of the attraction example: `u` carries e1, e2, e3 to leaves and e4
/// to `m`; `v` carries e6, e7 to leaves and e5 to `m`; `m` has the pendant e8.
/// Edge ids are 0..8 for e1..e8.
pub fn fig1(lengths: [Q; 8]) -> Network {
    let names = ["u", "v", "m", "l1", "l2", "l3", "l6", "l7", "l8"];
    let pairs = [
        ("l1", "u"),
        ("l2", "u"),
        ("l3", "u"),
        ("m", "u"),
        ("m", "v"),
        ("l6", "v"),
        ("l7", "v"),
        ("l8", "m"),
    ];
    let edges: Vec<(&str, &str, Q)> = pairs.iter().zip(lengths).map(|(&(a, b), l)| (a, b, l)).collect();
    Network::from_named(&names, &edges).unwrap()
}

/// Length in `[1, spread]` with denominator at most 3.
pub fn random_length<R: Rng>(rng: &mut R, spread: i64) -> Q {
    let d = rng.gen_range(1..=3i64);
    ratio(rng.gen_range(d..=spread * d), d)
}

/// Connected network on 2..=max_v vertices: a random tree plus a few extra edges.
pub fn random_network<R: Rng>(rng: &mut R, max_v: usize, spread: i64) -> Network {
    let nv = rng.gen_range(2..=max_v);
    let mut edges = Vec::new();
    for i in 1..nv {
        edges.push(Edge { u: i, v: rng.gen_range(0..i), length: random_length(rng, spread) });
    }
    for _ in 0..rng.gen_range(0..=2) {
        let a = rng.gen_range(0..nv);
        let b = rng.gen_range(0..nv);
        if a != b {
            edges.push(Edge { u: a, v: b, length: random_length(rng, spread) });
        }
    }
    let names = (0..nv).map(|i| format!("w{i}")).collect();
    Network::new(names, edges, false).unwrap()
}

/// Random network whose normalized form admits the construction.
pub fn random_constructible<R: Rng>(rng: &mut R, max_v: usize) -> Network {
    loop {
        let net = random_network(rng, max_v, 2).normalize();
        if net.degree2_allowed() || net.edge_count() < 2 {
            continue;
        }
        if net.classify_edges().is_ok_and(|c| c.other.is_empty()) {
            return net;
        }
    }
}

pub fn random_point<R: Rng>(rng: &mut R, net: &Network) -> Point {
    let e = rng.gen_range(0..net.edge_count());
    if rng.gen_bool(0.2) {
        return Point::new(e, if rng.gen_bool(0.5) { Q::zero() } else { Q::one() });
    }
    let d = rng.gen_range(2..=12i64);
    Point::new(e, ratio(rng.gen_range(1..d), d))
}

pub fn random_profile<R: Rng>(rng: &mut R, net: &Network, n: usize) -> Profile {
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    for _ in 0..n {
        if !pts.is_empty() && rng.gen_bool(0.15) {
            let p = pts.choose(rng).unwrap().clone();
            pts.push(p);
        } else {
            pts.push(random_point(rng, net));
        }
    }
    Profile::new(pts)
}

/// All-pairs vertex distances by Floyd-Warshall.
pub fn floyd_warshall(nv: usize, edges: &[(usize, usize, Q)]) -> Vec<Vec<Option<Q>>> {
    let mut d = vec![vec![None::<Q>; nv]; nv];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Q::zero());
    }
    for (a, b, l) in edges {
        for (x, y) in [(*a, *b), (*b, *a)] {
            if d[x][y].as_ref().map_or(true, |old| l < old) {
                d[x][y] = Some(l.clone());
            }
        }
    }
    for k in 0..nv {
        for i in 0..nv {
            for j in 0..nv {
                if let (Some(a), Some(b)) = (&d[i][k], &d[k][j]) {
                    let via = a + b;
                    if d[i][j].as_ref().map_or(true, |old| &via < old) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    d
}

/// Distances between points, from Floyd-Warshall on the network with the
/// points inserted as extra vertices.
pub fn augmented_distances(net: &Network, pts: &[Point]) -> Vec<Vec<Q>> {
    let nv = net.vertex_count();
    let mut nodes = nv;
    // node id of each point; vertices keep their ids
    let mut node_of = Vec::with_capacity(pts.len());
    let mut cuts: Vec<Vec<(Q, usize)>> = vec![Vec::new(); net.edge_count()];
    for p in pts {
        let e = net.edge(p.edge);
        let id = if p.alpha.is_zero() {
            e.v
        } else if p.alpha.is_one() {
            e.u
        } else if let Some((_, id)) = cuts[p.edge].iter().find(|(a, _)| *a == p.alpha) {
            *id
        } else {
            cuts[p.edge].push((p.alpha.clone(), nodes));
            nodes += 1;
            nodes - 1
        };
        node_of.push(id);
    }
    let mut edges = Vec::new();
    for (k, e) in net.edges().iter().enumerate() {
        let mut chain = vec![(Q::zero(), e.v)];
        let mut inner = cuts[k].clone();
        inner.sort();
        chain.extend(inner);
        chain.push((Q::one(), e.u));
        for w in chain.windows(2) {
            edges.push((w[0].1, w[1].1, (&w[1].0 - &w[0].0) * &e.length));
        }
    }
    let d = floyd_warshall(nodes, &edges);
    node_of
        .iter()
        .map(|&a| node_of.iter().map(|&b| d[a][b].clone().expect("connected")).collect())
        .collect()
}

/// Vertex distances from Floyd-Warshall on the plain network.
pub fn vertex_distances(net: &Network) -> Vec<Vec<Q>> {
    let edges: Vec<_> = net.edges().iter().map(|e| (e.u, e.v, e.length.clone())).collect();
    floyd_warshall(net.vertex_count(), &edges)
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.expect("connected")).collect())
        .collect()
}

/// Distance from a point to the point at offset `t` (from `v`) on edge `e`.
pub fn point_to_offset(net: &Network, vd: &[Vec<Q>], p: &Point, e: usize, t: &Q) -> Q {
    let pe = net.edge(p.edge);
    let s = &p.alpha * &pe.length;
    let ce = net.edge(e);
    let ends_p = [(pe.v, s.clone()), (pe.u, &pe.length - &s)];
    let ends_c = [(ce.v, t.clone()), (ce.u, &ce.length - t)];
    let mut best: Option<Q> = None;
    for (a, da) in &ends_p {
        for (b, db) in &ends_c {
            let d = da + &vd[*a][*b] + db;
            if best.as_ref().map_or(true, |x| &d < x) {
                best = Some(d);
            }
        }
    }
    let mut best = best.unwrap();
    if p.edge == e {
        best = best.min((&s - t).abs());
    }
    best
}

/// Grid step used by the oracles: `min length / 240`.
pub fn grid_step(net: &Network) -> Q {
    net.min_length() / int(240)
}

/// Payoffs and cost with consumers lumped at the midpoints of a grid of step at
/// most `h` on every edge; ties split per location, then per player.
pub fn grid_payoffs(net: &Network, profile: &Profile, h: &Q) -> (Vec<Q>, Q) {
    let vd = vertex_distances(net);
    let n = profile.len();
    let pts = profile.points();
    // players at distance zero share a location
    let mut loc_of = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if loc_of[i] != usize::MAX {
            continue;
        }
        let g = groups.len();
        let mut members = vec![i];
        loc_of[i] = g;
        for j in i + 1..n {
            if loc_of[j] == usize::MAX && augmented_distances(net, &[pts[i].clone(), pts[j].clone()])[0][1].is_zero() {
                loc_of[j] = g;
                members.push(j);
            }
        }
        groups.push(members);
    }
    let mut pay = vec![Q::zero(); n];
    let mut cost = Q::zero();
    for (e, edge) in net.edges().iter().enumerate() {
        let cells = (&edge.length / h).ceil().to_integer();
        let cells: usize = cells.try_into().unwrap();
        let width = &edge.length / q(cells);
        for c in 0..cells {
            let t = &width * (q(2 * c + 1)) / int(2);
            let d: Vec<Q> = groups.iter().map(|g| point_to_offset(net, &vd, &pts[g[0]], e, &t)).collect();
            let min = d.iter().min().unwrap().clone();
            let winners: Vec<usize> = (0..groups.len()).filter(|&g| d[g] == min).collect();
            let share = &width / q(winners.len());
            for &g in &winners {
                let each = &share / q(groups[g].len());
                for &i in &groups[g] {
                    pay[i] += &each;
                }
            }
            cost += &min * &width;
        }
    }
    (pay, cost)
}

/// Grid of candidate deviation points with spacing at most `h` on every edge.
pub fn grid_points(net: &Network, h: &Q) -> Vec<Point> {
    let mut out = Vec::new();
    for (e, edge) in net.edges().iter().enumerate() {
        let cells: usize = (&edge.length / h).ceil().to_integer().try_into().unwrap();
        for c in 0..=cells {
            out.push(Point::new(e, ratio(c as i64, cells as i64)));
        }
    }
    out
}

/// The ten networks used for the construction checks.
pub fn construction_networks() -> Vec<(String, Network)> {
    use netloc::examples::{make_segment, make_star};
    use rand::SeedableRng;
    let mut nets = vec![
        ("segment".to_string(), make_segment()),
        ("star S3".to_string(), make_star(3).unwrap()),
        ("star S6".to_string(), make_star(6).unwrap()),
        (
            "fig1".to_string(),
            fig1([int(1), int(1), ratio(3, 2), int(2), int(2), int(1), ratio(4, 3), int(1)]),
        ),
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_240_601);
    for i in 0..6 {
        nets.push((format!("random {i}"), random_constructible(&mut rng, 6)));
    }
    nets
}
