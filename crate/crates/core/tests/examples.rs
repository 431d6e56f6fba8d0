mod common;

use netloc::examples::{
    self, gap_conditions_hold, make_circle, make_segment, make_star, CircleShape, SegmentShape, StarKind,
    StarOutcome, StarShape,
};
use netloc::payoff::social_cost;
use netloc::rational::{int, ratio};
use netloc::verify::is_nash;
use netloc::{Network, Profile, Q};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nash(net: &Network, p: &Profile) -> bool {
    is_nash(net, p).unwrap().is_nash
}

fn cost(net: &Network, p: &Profile) -> Q {
    social_cost(net, p).unwrap()
}

#[test]
fn segment_closed_forms() {
    let net = make_segment();
    let s = SegmentShape::detect(&net).unwrap();
    for n in 1..=12usize {
        let nq = common::q(n);
        let opt = s.opt(n).unwrap();
        assert_eq!(cost(&net, &opt), Q::one() / (int(4) * &nq));
        assert_eq!(s.opt_cost(n), cost(&net, &opt));
        if n >= 4 {
            let t = s.tilde(n).unwrap();
            assert!(nash(&net, &t), "tilde n={n}");
            assert_eq!(cost(&net, &t), s.tilde_cost(n));
        }
        if n % 2 == 0 {
            let h = s.hat(n).unwrap();
            assert!(nash(&net, &h), "hat n={n}");
            assert_eq!(cost(&net, &h), Q::one() / (int(2) * &nq));
        }
        if n % 2 == 1 && n >= 5 {
            for l in SegmentShape::hat_ell_range(n) {
                let h = s.hat_ell(n, l).unwrap();
                assert!(nash(&net, &h), "hat_ell n={n} l={l}");
                assert_eq!(cost(&net, &h), Q::one() / (int(2) * (&nq + int(1))));
            }
        }
    }
}

#[test]
fn segment_profiles_scale_with_length() {
    let long = make_segment().scaled(&int(3));
    let s = SegmentShape::detect(&long).unwrap();
    let p = s.tilde(6).unwrap();
    assert!(nash(&long, &p));
    assert_eq!(cost(&long, &p), int(9) / int(16));
}

// Gaps are drawn as multiples of xi, so the unit is fixed by 6 xi + sum = 1.
#[test]
fn gap_family_matches_equilibrium_condition() {
    let net = make_segment();
    let s = SegmentShape::detect(&net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..150 {
        let g = rng.gen_range(1..=4);
        let units: Vec<Q> = (0..g).map(|_| ratio(rng.gen_range(1..=25), 10)).collect();
        let xi = Q::one() / (int(6) + units.iter().sum::<Q>());
        let gaps: Vec<Q> = units.iter().map(|u| u * &xi).collect();
        let p = s.gap_profile(&xi, &gaps).unwrap();
        let predicted = gap_conditions_hold(&xi, &gaps);
        assert_eq!(nash(&net, &p), predicted, "xi={xi} units={units:?}");
        if predicted {
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 10 && no > 10, "{yes} equilibria, {no} non-equilibria");
}

#[test]
fn circle_profiles_on_a_long_circle() {
    let unit = make_circle(&Q::one()).unwrap();
    // rational stand-in for 2 pi
    let l = ratio(710, 113);
    let big = make_circle(&l).unwrap();
    let (cu, cb) = (CircleShape::detect(&unit).unwrap(), CircleShape::detect(&big).unwrap());
    for n in 2..=7 {
        let (pu, pb) = (cu.profiles(n).unwrap(), cb.profiles(n).unwrap());
        let pairs = [(Some(pu.tilde), Some(pb.tilde)), (pu.hat, pb.hat), (pu.breve, pb.breve)];
        for (a, b) in pairs.into_iter().filter_map(|(a, b)| Some((a?, b?))) {
            assert!(nash(&unit, &a) && nash(&big, &b), "n={n}");
            assert_eq!(cost(&big, &b), cost(&unit, &a) * &l * &l);
        }
        assert_eq!(cost(&big, &cb.tilde(n).unwrap()), cb.tilde_cost(n));
    }
}

#[test]
fn star_outcomes_by_player_count() {
    for k in 3..=5usize {
        let net = make_star(k).unwrap();
        let s = StarShape::detect(&net).unwrap();
        for n in 1..=4 * k + 3 {
            match s.equilibrium(n).unwrap() {
                StarOutcome::Equilibrium(eq) => {
                    assert!(n <= k || n >= 3 * k - 1, "k={k} n={n}");
                    let want = if n <= k {
                        StarKind::AllCenter
                    } else if n <= 3 * k {
                        StarKind::Unique
                    } else {
                        StarKind::Family
                    };
                    assert_eq!(eq.kind, want);
                    assert_eq!(eq.profile.len(), n);
                    assert!(nash(&net, &eq.profile), "k={k} n={n}");
                }
                StarOutcome::NoEquilibrium => assert!(n > k && n < 3 * k - 1, "k={k} n={n}"),
            }
        }
    }
}

#[test]
fn star_family_endpoints_are_equilibria() {
    let net = make_star(3).unwrap();
    let s = StarShape::detect(&net).unwrap();
    for n in [10, 11, 13, 14, 16, 17] {
        let iv = s.family_interval(n).unwrap();
        assert!(iv.lo <= iv.hi);
        for xi in [&iv.lo, &iv.hi] {
            let eq = s.family(n, xi).unwrap();
            assert_eq!(eq.profile.len(), n);
            assert!(nash(&net, &eq.profile), "n={n} xi={xi}");
        }
    }
    let iv = examples::family_interval(3, 13).unwrap();
    assert_eq!((iv.lo, iv.hi, iv.m, iv.r), (ratio(3, 19), ratio(3, 17), 4, 1));
}

#[test]
fn star_remark_ratios() {
    let net = make_star(3).unwrap();
    for b in 3..=5 {
        let r = examples::star_remark_profiles(b).unwrap();
        assert!(nash(&net, &r.worst_eq) && nash(&net, &r.worst_eq_odd), "b={b}");
        assert_eq!(r.ratio, &r.worst_cost / &r.good_cost);
        assert_eq!(r.worst_cost, cost(&net, &r.worst_eq));
        assert_eq!(r.opt_odd_cost, cost(&net, &r.opt_odd));
    }
    assert_eq!(examples::star_remark_profiles(3).unwrap().ratio, ratio(585, 287));
}
