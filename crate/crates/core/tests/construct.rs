mod common;

use common::*;
use netloc::construct::{build_equilibrium, build_from_layout, constructed_cost, f, find_xi, n_bar};
use netloc::examples::{make_circle, make_segment, make_star};
use netloc::payoff::social_cost;
use netloc::rational::{int, ratio};
use netloc::verify::is_nash;
use netloc::{Error, Network, Q};
use num_traits::One;

fn two_edges() -> Network {
    Network::from_named(&["a", "b", "c", "d"], &[("a", "b", int(1)), ("b", "c", int(2)), ("b", "d", int(1))]).unwrap()
}

#[test]
fn threshold_values() {
    assert_eq!(n_bar(&make_segment()), 8);
    assert_eq!(n_bar(&make_star(3).unwrap()), 24);
    assert_eq!(n_bar(&two_edges()), 9 + 5 + 10 + 5);
}

#[test]
fn step_function() {
    let seg = make_segment();
    assert_eq!(f(&seg, &ratio(1, 10)), 8);
    assert_eq!(f(&seg, &ratio(1, 8)), 7);
    let net = two_edges();
    assert_eq!(f(&net, &int(1000)), 4 * net.edge_count());
    let eps = ratio(1, 1_000_000);
    for e in net.edges() {
        for k in 1..=12 {
            let z = &e.length / int(2 * k);
            let (at, left) = (f(&net, &z), f(&net, &(&z - &eps)));
            assert!(left > at && left - at <= net.edge_count(), "z={z}");
            assert_eq!(f(&net, &(&z + &eps)), at);
        }
    }
}

#[test]
fn unit_on_the_segment() {
    let seg = make_segment();
    assert_eq!(find_xi(&seg, 8).unwrap(), (ratio(1, 10), 8));
    assert_eq!(find_xi(&seg, 9).unwrap(), (ratio(1, 12), 9));
    assert!(matches!(find_xi(&seg, 7), Err(Error::BelowThreshold { n: 7, n_bar: 8 })));
}

#[test]
fn segment_layout_at_threshold() {
    let seg = make_segment();
    let (p, plan) = build_equilibrium(&seg, 8).unwrap();
    assert_eq!(plan.alpha_by_edge[0].alpha, int(2));
    let mut offs: Vec<Q> = p.iter().map(|x| &Q::one() - &x.alpha).collect();
    offs.sort();
    let want = [1, 1, 3, 5, 7, 7, 9, 9].map(|k| ratio(k, 10));
    // the layout may come out reflected
    let mut mirrored: Vec<Q> = offs.iter().map(|t| Q::one() - t).collect();
    mirrored.sort();
    assert!(offs == want || mirrored == want, "{offs:?}");
    assert_eq!(social_cost(&seg, &p).unwrap(), constructed_cost(&plan));
}

#[test]
fn construction_is_certified_on_the_fixture_networks() {
    for (name, net) in construction_networks() {
        let base = n_bar(&net);
        for n in [base, base + 1, base + net.edge_count() + 1] {
            let (p, plan) = build_equilibrium(&net, n).unwrap();
            assert_eq!(p.len(), n, "{name}");
            assert!(plan.removed.len() <= net.edge_count());
            assert_eq!(plan.n_prime - plan.removed.len(), n);
            for a in &plan.alpha_by_edge {
                assert!(a.alpha >= Q::one() && a.alpha <= int(2), "{name} alpha {}", a.alpha);
            }
            let cert = is_nash(&net, &p).unwrap();
            assert!(cert.is_nash, "{name} n={n}");
            let payoffs = cert.payoffs();
            assert!(payoffs.iter().all(|x| *x >= plan.xi && *x <= int(2) * &plan.xi), "{name} n={n}");
            let full = plan.full_profile();
            assert_eq!(social_cost(&net, &full).unwrap(), constructed_cost(&plan), "{name} n={n}");
        }
    }
}

#[test]
fn denser_layouts_stay_equilibria() {
    let net = make_star(3).unwrap();
    let n = n_bar(&net) + 2;
    let (_, plan) = build_equilibrium(&net, n).unwrap();
    for np in plan.n_prime + 1..=n + net.edge_count() {
        if let Ok((p, _)) = build_from_layout(&net, n, np) {
            assert_eq!(p.len(), n);
            assert!(is_nash(&net, &p).unwrap().is_nash, "n'={np}");
        }
    }
}

#[test]
fn rejects_unsupported_networks() {
    let circle = make_circle(&int(1)).unwrap();
    assert!(build_equilibrium(&circle, 40).is_err());
    assert!(matches!(build_equilibrium(&make_segment(), 3), Err(Error::BelowThreshold { .. })));
}
