//! Price of anarchy and stability: bound formulas, a search for the social
//! optimum, and reports that compare verified equilibria against it.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{self, Occupancy, Piece};
use crate::construct;
use crate::examples::{SegmentShape, Shape, StarOutcome};
use crate::network::{Location, Network, Point};
use crate::payoff::{social_cost, Profile};
use crate::rational::{half, int, ratio, serde_q, Q};
use crate::verify;
use crate::{Error, Result};

fn q(n: usize) -> Q {
    Q::from_integer(n.into())
}

fn need_players(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one player".into()));
    }
    Ok(())
}

// |E_II| and |E_IL| of the normalized network.
fn class_counts(net: &Network) -> Result<(usize, usize)> {
    let c = net.normalize().classify_edges()?;
    Ok((c.interior_interior.len(), c.interior_leaf.len()))
}

/// `(4n + 4|E_II| + 2|E_IL|) / (2n)` on the normalized network.
pub fn phi(net: &Network, n: usize) -> Result<Q> {
    need_players(n)?;
    let (ii, il) = class_counts(net)?;
    Ok(q(4 * n + 4 * ii + 2 * il) / q(2 * n))
}

/// `Λ² / (2(2n + 2|E_II| + |E_IL|))`: no profile costs less.
pub fn opt_lower_bound(net: &Network, n: usize) -> Result<Q> {
    need_players(n)?;
    let (ii, il) = class_counts(net)?;
    let total = net.total_measure();
    Ok(&total * &total / q(2 * (2 * n + 2 * ii + il)))
}

/// `Λ² / (2n)`: cost ceiling for equilibria with the vertex property.
pub fn eq_cost_upper_bound(net: &Network, n: usize) -> Result<Q> {
    need_players(n)?;
    let total = net.total_measure();
    Ok(&total * &total / q(2 * n))
}

/// Whether `a` is majorized by `b`. Shorter vectors are padded with zeros; the
/// sums must agree.
pub fn majorizes(a: &[Q], b: &[Q]) -> Result<bool> {
    let sa: Q = a.iter().sum();
    let sb: Q = b.iter().sum();
    if sa != sb {
        return Err(Error::InvalidArgument(format!("sums differ: {sa} vs {sb}")));
    }
    let len = a.len().max(b.len());
    let sorted = |v: &[Q]| {
        let mut s = v.to_vec();
        s.resize(len, Q::zero());
        s.sort_by(|x, y| y.cmp(x));
        s
    };
    let (a, b) = (sorted(a), sorted(b));
    let (mut pa, mut pb) = (Q::zero(), Q::zero());
    for (x, y) in a.iter().zip(&b) {
        pa += x;
        pb += y;
        if pa > pb {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { starts: 4, iters: 25, seed: 0 }
    }
}

// Point at distance t along the edges laid end to end in id order.
fn along(net: &Network, t: &Q) -> Point {
    let mut rest = t.clone();
    let last = net.edge_count() - 1;
    for (e, edge) in net.edges().iter().enumerate() {
        if rest <= edge.length || e == last {
            let a = rest.clone().min(edge.length.clone()) / &edge.length;
            return Point::new(e, a);
        }
        rest -= &edge.length;
    }
    unreachable!("network has edges")
}

/// Start 0 is the stratified midpoints; later starts jitter within the strata.
fn start_profile(net: &Network, n: usize, rng: Option<&mut ChaCha8Rng>) -> Profile {
    let total = net.total_measure();
    let step = &total / q(n);
    let mut rng = rng;
    (0..n)
        .map(|i| {
            let u = match rng.as_deref_mut() {
                Some(r) => ratio(r.gen_range(1..1000), 1000),
                None => ratio(1, 2),
            };
            along(net, &(&step * (q(i) + u)))
        })
        .collect()
}

fn loc_at(net: &Network, e: usize, offset: &Q) -> Location {
    net.locate(&Point::new(e, offset / net.length(e))).expect("offset on edge")
}

/// Weighted 1-median of a cell whose pieces form a tree; `None` otherwise.
fn tree_median(net: &Network, cell: &[(&Piece, Q)]) -> Option<Point> {
    let mut ids: BTreeMap<Location, usize> = BTreeMap::new();
    let mut ends = Vec::with_capacity(cell.len());
    for (p, _) in cell {
        let mut id = |l: Location| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        };
        let a = id(loc_at(net, p.edge, &p.lo));
        let b = id(loc_at(net, p.edge, &p.hi));
        ends.push((a, b));
    }
    let nodes = ids.len();
    if cell.is_empty() || cell.len() + 1 != nodes {
        return None;
    }
    let mut adj = vec![Vec::new(); nodes];
    for (k, &(a, b)) in ends.iter().enumerate() {
        adj[a].push((k, b));
        adj[b].push((k, a));
    }
    // depth-first order from node 0
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    let mut order = vec![0];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let a = order[i];
        for &(k, b) in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                parent[b] = Some((k, a));
                order.push(b);
            }
        }
        i += 1;
    }
    if order.len() != nodes {
        return None;
    }
    let mass = |k: usize| cell[k].0.len() * &cell[k].1;
    let total: Q = (0..cell.len()).map(mass).sum();
    let mut sub = vec![Q::zero(); nodes];
    for &c in order.iter().rev() {
        if let Some((k, p)) = parent[c] {
            let add = &sub[c] + mass(k);
            sub[p] += add;
        }
    }
    let half_total = half(&total);
    let by_loc: Vec<Location> = {
        let mut v = vec![None; nodes];
        for (l, &k) in &ids {
            v[k] = Some(l.clone());
        }
        v.into_iter().map(|l| l.expect("every node named")).collect()
    };
    // interior of a piece
    for &c in &order {
        let Some((k, _)) = parent[c] else { continue };
        let (piece, w) = &cell[k];
        let len = piece.len();
        let above = &total - &sub[c] - mass(k);
        let t = (&above - &sub[c]) / (int(2) * w) + half(&len);
        if t > Q::zero() && t < len {
            // distance t from c along the piece
            let c_is_lo = loc_at(net, piece.edge, &piece.lo) == by_loc[c];
            let offset = if c_is_lo { &piece.lo + &t } else { &piece.hi - &t };
            return Some(Point::new(piece.edge, offset / net.length(piece.edge)));
        }
    }
    // otherwise a node whose branches each carry at most half
    for c in 0..nodes {
        let mut worst = match parent[c] {
            Some(_) => &total - &sub[c],
            None => Q::zero(),
        };
        for &(k, b) in &adj[c] {
            if parent[b].is_some_and(|(kk, _)| kk == k) {
                worst = worst.max(&sub[b] + mass(k));
            }
        }
        if worst <= half_total {
            return Some(net.point_of(&by_loc[c]));
        }
    }
    None
}

// Exact medians compound denominators from move to move, so positions with
// large denominators go to a common grid; every move still needs an exact gain.
fn snap(alpha: &Q) -> Q {
    if alpha.denom() <= &64.into() {
        return alpha.clone();
    }
    let grid = Q::from_integer(720_720.into());
    (alpha * &grid).round() / grid
}

// Best strictly improving relocation of player i, if any.
fn improve(net: &Network, profile: &Profile, cost: &Q, i: usize) -> Result<Option<(Profile, Q)>> {
    let occ = Occupancy::from_points(net, profile.points())?;
    let dec = cells::decompose(net, &occ.locs);
    let li = occ.player_loc[i];
    let cell: Vec<(&Piece, Q)> = dec
        .pieces
        .iter()
        .filter(|p| p.owners.contains(&li))
        .map(|p| (p, Q::one() / q(p.owners.len())))
        .collect();
    let mut best: Option<(Profile, Q)> = None;
    let try_point = |y: Point, best: &mut Option<(Profile, Q)>| -> Result<()> {
        let y = Point::new(y.edge, snap(&y.alpha));
        let cand = profile.with_player(i, y);
        let c = social_cost(net, &cand)?;
        let bar = best.as_ref().map_or(cost, |b| &b.1);
        if &c < bar {
            *best = Some((cand, c));
        }
        Ok(())
    };
    if let Some(m) = tree_median(net, &cell) {
        try_point(m, &mut best)?;
        if best.is_some() || occ.mult[li] == 1 {
            return Ok(best);
        }
    }
    // cells with cycles, or co-located players that need to split up
    for (p, _) in &cell {
        let len = net.length(p.edge);
        for x in [p.lo.clone(), half(&(&p.lo + &p.hi)), p.hi.clone()] {
            try_point(Point::new(p.edge, x / len), &mut best)?;
        }
    }
    Ok(best)
}

fn descend(net: &Network, start: Profile, iters: usize) -> Result<(Profile, Q)> {
    let mut profile = start;
    let mut cost = social_cost(net, &profile)?;
    for _ in 0..iters {
        let before = cost.clone();
        for i in 0..profile.len() {
            if let Some((p, c)) = improve(net, &profile, &cost, i)? {
                profile = p;
                cost = c;
            }
        }
        // stop once a pass gains less than a relative 1e-6
        if (&before - &cost) * Q::from_integer(1_000_000i64.into()) <= before {
            break;
        }
    }
    Ok((profile, cost))
}

/// Multistart coordinate descent towards the social optimum: every player in
/// turn moves to the 1-median of its cell while that lowers the exact cost.
pub fn empirical_optimum(net: &Network, n: usize, budget: &SearchBudget) -> Result<(Profile, Q)> {
    empirical_optimum_from(net, n, budget, &[])
}

/// [`empirical_optimum`] with extra starting profiles of `n` players.
pub fn empirical_optimum_from(
    net: &Network,
    n: usize,
    budget: &SearchBudget,
    seeds: &[Profile],
) -> Result<(Profile, Q)> {
    need_players(n)?;
    for s in seeds {
        if s.len() != n {
            return Err(Error::InvalidArgument(format!("seed profile has {} players, expected {n}", s.len())));
        }
        s.validate(net)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut starts = vec![start_profile(net, n, None)];
    for _ in 1..budget.starts.max(1) {
        starts.push(start_profile(net, n, Some(&mut rng)));
    }
    starts.extend(seeds.iter().cloned());
    let results = starts
        .into_par_iter()
        .map(|s| descend(net, s, budget.iters))
        .collect::<Result<Vec<_>>>()?;
    // first of the cheapest, so the result does not depend on scheduling
    let mut best = None::<(Profile, Q)>;
    for r in results {
        if best.as_ref().map_or(true, |b| r.1 < b.1) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one start"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatedProfile {
    pub label: String,
    #[serde(with = "serde_q")]
    pub cost: Q,
    pub profile: Profile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub n: usize,
    #[serde(with = "serde_q")]
    pub lambda_total: Q,
    #[serde(with = "serde_q")]
    pub opt_lower_bound: Q,
    #[serde(with = "serde_q")]
    pub eq_cost_upper_bound: Q,
    #[serde(with = "serde_q")]
    pub phi_n: Q,
    #[serde(with = "serde_q")]
    pub empirical_opt_cost: Q,
    pub empirical_opt_profile: Profile,
    /// Worst verified equilibrium cost over the empirical optimum.
    #[serde(with = "serde_q")]
    pub poa_estimate: Q,
    /// Best verified equilibrium cost over the empirical optimum.
    #[serde(with = "serde_q")]
    pub pos_estimate: Q,
    /// `[poa_estimate, phi_n]`; the lower end is a true lower bound on the price of anarchy.
    pub poa_bracket: Bracket,
    /// `[1, best cost / opt_lower_bound]`.
    pub pos_bracket: Bracket,
    pub worst_equilibrium: RatedProfile,
    pub best_equilibrium: RatedProfile,
    pub candidates_checked: usize,
    pub equilibria_verified: usize,
    pub seed: u64,
    pub starts: usize,
    pub iters: usize,
}

// Known equilibria of the special shapes plus profiles worth seeding the optimum search with.
fn shape_candidates(shape: &Shape, n: usize) -> (Vec<(String, Profile)>, Vec<Profile>) {
    let mut cands = Vec::new();
    let mut seeds = Vec::new();
    match shape {
        Shape::Segment(s) => {
            if let Ok(p) = s.opt(n) {
                cands.push(("opt".into(), p.clone()));
                seeds.push(p);
            }
            if let Ok(p) = s.tilde(n) {
                cands.push(("tilde".into(), p));
            }
            if let Ok(p) = s.hat(n) {
                cands.push(("hat".into(), p));
            }
            for l in SegmentShape::hat_ell_range(n) {
                if let Ok(p) = s.hat_ell(n, l) {
                    cands.push((format!("hat_ell l={l}"), p));
                }
            }
            if n >= 5 {
                // equal gaps g = xi (1 + j/4), all inside the equilibrium range
                for j in 0..=4 {
                    let g = Q::one() + ratio(j, 4);
                    let xi = Q::one() / (int(6) + q(n - 5) * &g);
                    let gaps = vec![&g * &xi; n - 5];
                    if let Ok(p) = s.gap_profile(&xi, &gaps) {
                        cands.push((format!("gap family g/xi={g}"), p));
                    }
                }
            }
        }
        Shape::Circle(c) => {
            if let Ok(p) = c.tilde(n) {
                cands.push(("tilde".into(), p.clone()));
                seeds.push(p);
            }
            if let Ok(p) = c.hat(n) {
                cands.push(("hat".into(), p));
            }
            if let Ok(p) = c.breve(n) {
                cands.push(("breve".into(), p));
            }
        }
        Shape::Star(s) => {
            if let Ok(StarOutcome::Equilibrium(eq)) = s.equilibrium(n) {
                cands.push((format!("star {:?}", eq.kind).to_lowercase(), eq.profile));
            }
            if let Ok(iv) = s.family_interval(n) {
                for xi in [iv.lo.clone(), iv.hi.clone()] {
                    if let Ok(eq) = s.family(n, &xi) {
                        cands.push((format!("star family xi={xi}"), eq.profile));
                    }
                }
            }
            if s.k() == 3 && n % 6 == 3 {
                let b = (n / 3 - 1) / 2;
                if let Ok(p) = s.worst_equilibrium(b) {
                    cands.push(("star worst".into(), p));
                }
                if let Ok(r) = s.remark_profiles(b) {
                    seeds.push(r.good);
                }
            }
            if s.k() == 3 && n % 6 == 1 {
                if let Ok(r) = s.remark_profiles(n / 6) {
                    cands.push(("star worst odd".into(), r.worst_eq_odd));
                    seeds.push(r.opt_odd);
                }
            }
        }
    }
    (cands, seeds)
}

/// Verified equilibria with `n` players: the construction and its variants
/// with more layout players, plus the closed forms on special shapes.
pub fn efficiency_report(net: &Network, n: usize, budget: &SearchBudget) -> Result<EfficiencyReport> {
    need_players(n)?;
    let n_bar = construct::n_bar(&net.normalize());
    let shape = Shape::detect(net);
    let mut cands: Vec<(String, Profile)> = Vec::new();
    let mut seeds = Vec::new();
    if let Some(shape) = &shape {
        let (c, s) = shape_candidates(shape, n);
        cands.extend(c);
        seeds.extend(s);
    }
    if n >= n_bar && !net.degree2_allowed() {
        if let Ok((p, plan)) = construct::build_equilibrium(net, n) {
            cands.push(("constructed".into(), p));
            for np in plan.n_prime + 1..=n + net.edge_count() {
                if let Ok((p, _)) = construct::build_from_layout(net, n, np) {
                    cands.push((format!("layout n'={np}"), p));
                }
            }
        }
    }
    if shape.is_none() && n < n_bar {
        return Err(Error::BelowThreshold { n, n_bar });
    }
    let checked = cands.len();
    let mut eqs: Vec<RatedProfile> = Vec::new();
    for (label, profile) in cands {
        if verify::is_nash(net, &profile)?.is_nash {
            let cost = social_cost(net, &profile)?;
            seeds.push(profile.clone());
            eqs.push(RatedProfile { label, cost, profile });
        }
    }
    if eqs.is_empty() {
        return Err(if n < n_bar {
            Error::BelowThreshold { n, n_bar }
        } else {
            Error::InvalidArgument(format!("no verified equilibrium with {n} players"))
        });
    }
    let (opt_profile, opt_cost) = empirical_optimum_from(net, n, budget, &seeds)?;
    let worst = eqs.iter().fold(&eqs[0], |w, e| if e.cost > w.cost { e } else { w }).clone();
    let best = eqs.iter().fold(&eqs[0], |b, e| if e.cost < b.cost { e } else { b }).clone();
    let phi_n = phi(net, n)?;
    let lower = opt_lower_bound(net, n)?;
    let poa = &worst.cost / &opt_cost;
    Ok(EfficiencyReport {
        n,
        lambda_total: net.total_measure(),
        eq_cost_upper_bound: eq_cost_upper_bound(net, n)?,
        poa_bracket: Bracket { lo: poa.clone(), hi: phi_n.clone() },
        pos_bracket: Bracket { lo: Q::one(), hi: &best.cost / &lower },
        pos_estimate: &best.cost / &opt_cost,
        poa_estimate: poa,
        opt_lower_bound: lower,
        phi_n,
        empirical_opt_cost: opt_cost,
        empirical_opt_profile: opt_profile,
        worst_equilibrium: worst,
        best_equilibrium: best,
        candidates_checked: checked,
        equilibria_verified: eqs.len(),
        seed: budget.seed,
        starts: budget.starts,
        iters: budget.iters,
    })
}
