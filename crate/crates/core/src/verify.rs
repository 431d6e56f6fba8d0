//! Exact Nash equilibrium verification.
//!
//! For each player the residual profile (everyone else) is fixed and the
//! deviator's payoff is swept over the whole network. Along an edge the payoff is
//! piecewise affine in the deviator's offset; each affine piece is found
//! symbolically, so the supremum is the best of its one-sided endpoint limits,
//! the vertices, the breakpoints, and the co-location payoffs.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::Occupancy;
use crate::deviation::{self, Candidate, Reach, Residual};
use crate::network::{EdgeId, Location, Network, Point};
use crate::payoff::{self, Profile};
use crate::rational::{serde_q, Q};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Approached through smaller `alpha`.
    Below,
    Above,
}

/// Where the best deviation is, or is approached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { point: Point },
    Limit {
        edge: EdgeId,
        #[serde(with = "serde_q")]
        alpha: Q,
        side: Side,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestResponse {
    #[serde(with = "serde_q")]
    pub value: Q,
    pub attained: bool,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerCertificate {
    #[serde(with = "serde_q")]
    pub payoff: Q,
    #[serde(with = "serde_q")]
    pub best_response_value: Q,
    pub attained: bool,
    /// Present when the player has a strictly profitable deviation.
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub is_nash: bool,
    pub per_player: Vec<PlayerCertificate>,
}

impl EquilibriumCertificate {
    pub fn payoffs(&self) -> Vec<Q> {
        self.per_player.iter().map(|p| p.payoff.clone()).collect()
    }

    /// First player with a profitable deviation.
    pub fn first_violation(&self) -> Option<(usize, &PlayerCertificate)> {
        self.per_player.iter().enumerate().find(|(_, p)| p.witness.is_some())
    }
}

/// Payoff of player `i` after moving to `y`, everyone else fixed.
pub fn deviation_payoff(net: &Network, profile: &Profile, i: usize, y: &Point) -> Result<Q> {
    check_player(profile, i)?;
    net.locate(y)?;
    let moved = profile.with_player(i, y.clone());
    Ok(payoff::attraction(net, &moved)?.payoffs.swap_remove(i))
}

fn check_player(profile: &Profile, i: usize) -> Result<()> {
    if i >= profile.len() {
        return Err(Error::InvalidArgument(format!(
            "player {i} out of range for {} players",
            profile.len()
        )));
    }
    Ok(())
}

fn witness_of(net: &Network, reach: &Reach) -> Witness {
    match reach {
        Reach::At(p) => Witness::Point { point: p.clone() },
        Reach::Limit { edge, offset, from_above } => Witness::Limit {
            edge: *edge,
            alpha: offset / net.length(*edge),
            side: if *from_above { Side::Above } else { Side::Below },
        },
    }
}

fn best_of(net: &Network, cands: Vec<Candidate>) -> BestResponse {
    let mut best: Option<Candidate> = None;
    for c in cands {
        let better = match &best {
            None => true,
            Some(b) => c.value > b.value || (c.value == b.value && c.attained && !b.attained),
        };
        if better {
            best = Some(c);
        }
    }
    let best = best.expect("at least one candidate");
    BestResponse {
        witness: witness_of(net, &best.reach),
        value: best.value,
        attained: best.attained,
    }
}

// Best response of a player currently at location `li` of `occ`.
fn best_response_at(net: &Network, occ: &Occupancy, li: usize, here: &Point) -> BestResponse {
    let mut locs = occ.locs.clone();
    let mut mult = occ.mult.clone();
    if mult[li] > 1 {
        mult[li] -= 1;
    } else {
        locs.remove(li);
        mult.remove(li);
    }
    if locs.is_empty() {
        return BestResponse {
            value: net.total_measure(),
            attained: true,
            witness: Witness::Point { point: here.clone() },
        };
    }
    let res = Residual::new(net, locs, mult);
    best_of(net, deviation::candidates(net, &res))
}

/// Supremum over all points of player `i`'s deviation payoff.
pub fn best_response_value(net: &Network, profile: &Profile, i: usize) -> Result<BestResponse> {
    check_player(profile, i)?;
    profile.validate(net)?;
    let occ = Occupancy::from_points(net, profile.points())?;
    Ok(best_response_at(net, &occ, occ.player_loc[i], &profile[i]))
}

pub fn is_nash(net: &Network, profile: &Profile) -> Result<EquilibriumCertificate> {
    profile.validate(net)?;
    let occ = Occupancy::from_points(net, profile.points())?;
    let payoffs = payoff::attraction(net, profile)?.payoffs;
    // one residual per distinct location
    let mut first_player: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &l) in occ.player_loc.iter().enumerate() {
        first_player.entry(l).or_insert(i);
    }
    let jobs: Vec<(usize, usize)> = first_player.into_iter().collect();
    let results: BTreeMap<usize, BestResponse> = jobs
        .par_iter()
        .map(|&(l, i)| (l, best_response_at(net, &occ, l, &profile[i])))
        .collect();
    let per_player: Vec<PlayerCertificate> = occ
        .player_loc
        .iter()
        .zip(payoffs)
        .map(|(l, payoff)| {
            let br = &results[l];
            let profitable = br.value > payoff;
            PlayerCertificate {
                best_response_value: br.value.clone(),
                attained: br.attained,
                witness: profitable.then(|| br.witness.clone()),
                payoff,
            }
        })
        .collect();
    Ok(EquilibriumCertificate {
        is_nash: per_player.iter().all(|p| p.witness.is_none()),
        per_player,
    })
}

/// Consequences every equilibrium must satisfy, evaluated on a verified profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub vertex_property: bool,
    #[serde(with = "serde_q")]
    pub eccentricity: Q,
    #[serde(with = "serde_q")]
    pub eccentricity_bound: Q,
    #[serde(with = "serde_q::option")]
    pub longest_half_interval: Option<Q>,
    #[serde(with = "serde_q")]
    pub half_interval_bound: Q,
    /// Common payoff of players at saturated locations, if any.
    #[serde(with = "serde_q::option")]
    pub balanced_payoff: Option<Q>,
    pub violations: Vec<String>,
}

impl StructuralReport {
    pub fn all_hold(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_structural_lemmas(
    net: &Network,
    profile: &Profile,
    cert: &EquilibriumCertificate,
) -> Result<StructuralReport> {
    if !cert.is_nash {
        return Err(Error::InvalidArgument(
            "structural checks apply to verified equilibria only".into(),
        ));
    }
    let occ = Occupancy::from_points(net, profile.points())?;
    let n = Q::from_integer(profile.len().into());
    let total = net.total_measure();
    let payoffs = cert.payoffs();
    let mut violations = Vec::new();

    let eccentricity = payoff::eccentricity(net, profile)?;
    let eccentricity_bound = Q::from_integer(2.into()) * &total / &n;
    if eccentricity > eccentricity_bound {
        violations.push(format!("eccentricity {eccentricity} exceeds {eccentricity_bound}"));
    }

    for (l, loc) in occ.locs.iter().enumerate() {
        let deg = net.location_degree(loc);
        if occ.mult[l] > deg {
            violations.push(format!("{} players share a location of degree {deg}", occ.mult[l]));
        }
    }

    let mut balanced_payoff: Option<Q> = None;
    for (i, &l) in occ.player_loc.iter().enumerate() {
        if occ.mult[l] == net.location_degree(&occ.locs[l]) {
            match &balanced_payoff {
                None => balanced_payoff = Some(payoffs[i].clone()),
                Some(b) if b != &payoffs[i] => {
                    violations.push(format!("balanced players earn {b} and {}", payoffs[i]));
                }
                _ => {}
            }
        }
    }

    let min_payoff = payoffs.iter().min().expect("players").clone();
    if min_payoff > &total / &n {
        violations.push(format!("smallest payoff {min_payoff} exceeds the average share"));
    }

    let half_interval_bound = &total / &n;
    let vertex_property = net
        .interior_vertices()
        .into_iter()
        .all(|w| occ.index_of(&Location::Vertex(w)).is_some());
    let mut longest_half_interval = None;
    if vertex_property {
        let halves = payoff::half_intervals(net, profile)?;
        let longest = halves.lengths().into_iter().max().unwrap_or_else(Q::zero);
        if longest > half_interval_bound {
            violations.push(format!("half interval {longest} exceeds {half_interval_bound}"));
        }
        longest_half_interval = Some(longest);
        lone_leaf_neighbours(net, &occ, &mut violations);
    }

    Ok(StructuralReport {
        vertex_property,
        eccentricity,
        eccentricity_bound,
        longest_half_interval,
        half_interval_bound,
        balanced_payoff,
        violations,
    })
}

// The player nearest to a leaf, when interior to the leaf's edge, is not alone.
fn lone_leaf_neighbours(net: &Network, occ: &Occupancy, violations: &mut Vec<String>) {
    for leaf in net.leaves() {
        if occ.index_of(&Location::Vertex(leaf)).is_some() {
            continue;
        }
        let e = net.incident(leaf)[0];
        let from_v = net.edge(e).v == leaf;
        let nearest = occ
            .locs
            .iter()
            .enumerate()
            .filter_map(|(i, loc)| match loc {
                Location::Interior { edge, offset } if *edge == e => Some((offset.clone(), i)),
                _ => None,
            })
            .reduce(|a, b| if (a.0 < b.0) == from_v { a } else { b });
        if let Some((_, i)) = nearest {
            if occ.mult[i] < 2 {
                violations.push(format!(
                    "player nearest to leaf {} is alone",
                    net.vertex_name(leaf)
                ));
            }
        }
    }
}
