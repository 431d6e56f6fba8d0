//! Closed-form profiles on the segment, the circle and the star.
//!
//! Positions are given as fractions of the segment, the circle or a ray, so the
//! generators work on any network of the right shape; consumer costs scale with
//! the square of the length.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::network::{Edge, EdgeId, Network, Point, VertexId};
use crate::payoff::Profile;
use crate::rational::{self, int, ratio, serde_q, Q};
use crate::{Error, Result};

fn q(n: usize) -> Q {
    Q::from_integer(n.into())
}

/// Unit segment with vertices `left` and `right`.
pub fn make_segment() -> Network {
    Network::from_named(&["left", "right"], &[("right", "left", Q::one())]).expect("valid segment")
}

/// Circle of the given perimeter, as two parallel edges between two vertices.
pub fn make_circle(perimeter: &Q) -> Result<Network> {
    if perimeter <= &Q::zero() {
        return Err(Error::InvalidArgument("circle perimeter must be positive".into()));
    }
    let half = perimeter / int(2);
    let edges = vec![
        Edge { u: 1, v: 0, length: half.clone() },
        Edge { u: 0, v: 1, length: half },
    ];
    Network::new(vec!["a".into(), "b".into()], edges, true)
}

/// Star with `k >= 3` unit rays around `center`.
pub fn make_star(k: usize) -> Result<Network> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!("a star needs at least 3 rays, got {k}")));
    }
    let mut names = vec!["center".to_string()];
    names.extend((1..=k).map(|j| format!("leaf{j}")));
    let edges = (1..=k).map(|j| Edge { u: j, v: 0, length: Q::one() }).collect();
    Network::new(names, edges, false)
}

/// A network recognised as a segment, a circle or a star.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Segment(SegmentShape),
    Circle(CircleShape),
    Star(StarShape),
}

impl Shape {
    pub fn detect(net: &Network) -> Option<Shape> {
        SegmentShape::detect(net)
            .map(Shape::Segment)
            .or_else(|| CircleShape::detect(net).map(Shape::Circle))
            .or_else(|| StarShape::detect(net).map(Shape::Star))
    }

    /// Square of the scale factor against the unit shape.
    pub fn cost_scale(&self) -> Q {
        let l = match self {
            Shape::Segment(s) => s.length.clone(),
            Shape::Circle(c) => c.perimeter.clone(),
            Shape::Star(s) => s.ray_length.clone(),
        };
        &l * &l
    }
}

// ---------------------------------------------------------------- segment

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentShape {
    pub edge: EdgeId,
    /// The end at fraction 0.
    pub start: VertexId,
    pub length: Q,
    start_is_v: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentProfiles {
    pub opt: Profile,
    pub tilde: Option<Profile>,
    pub hat: Option<Profile>,
    pub hat_ell: Option<Profile>,
}

impl SegmentShape {
    pub fn detect(net: &Network) -> Option<SegmentShape> {
        if net.edge_count() != 1 {
            return None;
        }
        let e = net.edge(0);
        Some(SegmentShape { edge: 0, start: e.v.min(e.u), length: e.length.clone(), start_is_v: e.v <= e.u })
    }

    /// Point at fraction `t` of the way from `start`.
    pub fn at(&self, t: &Q) -> Point {
        let alpha = if self.start_is_v { t.clone() } else { Q::one() - t };
        Point::new(self.edge, alpha)
    }

    fn profile(&self, ts: impl IntoIterator<Item = Q>) -> Profile {
        ts.into_iter().map(|t| self.at(&t)).collect()
    }

    /// Players at the odd multiples of `1/(2n)`: the optimum.
    pub fn opt(&self, n: usize) -> Result<Profile> {
        positive(n)?;
        Ok(self.profile((1..=n).map(|i| ratio(2 * i as i64 - 1, 2 * n as i64))))
    }

    /// Pairs a half-gap from each end and singles evenly between (`n >= 4`).
    pub fn tilde(&self, n: usize) -> Result<Profile> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!("tilde profile needs n >= 4, got {n}")));
        }
        let d = 2 * n as i64 - 4;
        let mut ts = vec![ratio(1, d), ratio(1, d)];
        ts.extend((3..=n as i64 - 2).map(|i| ratio(2 * i - 3, d)));
        ts.extend([ratio(d - 1, d), ratio(d - 1, d)]);
        Ok(self.profile(ts))
    }

    /// Pairs at the odd multiples of `1/n` (even `n`).
    pub fn hat(&self, n: usize) -> Result<Profile> {
        if n == 0 || n % 2 == 1 {
            return Err(Error::InvalidArgument(format!("hat profile needs even n >= 2, got {n}")));
        }
        let m = n as i64;
        Ok(self.profile((1..=m / 2).flat_map(|i| {
            let t = ratio(2 * i - 1, m);
            [t.clone(), t]
        })))
    }

    /// Admissible single positions `l` for [`SegmentShape::hat_ell`].
    pub fn hat_ell_range(n: usize) -> std::ops::RangeInclusive<usize> {
        1..=n.saturating_sub(3) / 2
    }

    /// Odd `n >= 5`: pairs at the odd multiples of `1/(n+1)` except the `l`-th,
    /// which holds a single player.
    pub fn hat_ell(&self, n: usize, l: usize) -> Result<Profile> {
        if n < 5 || n % 2 == 0 {
            return Err(Error::InvalidArgument(format!("hat_l profile needs odd n >= 5, got {n}")));
        }
        if !Self::hat_ell_range(n).contains(&l) {
            return Err(Error::InvalidArgument(format!(
                "single position {l} outside 1..={}",
                (n - 3) / 2
            )));
        }
        let d = n as i64 + 1;
        let mut ts = Vec::with_capacity(n);
        for i in 1..=(n as i64 + 1) / 2 {
            let t = ratio(2 * i - 1, d);
            ts.push(t.clone());
            if i != l as i64 + 1 {
                ts.push(t);
            }
        }
        Ok(self.profile(ts))
    }

    /// Default single position for [`SegmentShape::hat_ell`].
    pub fn default_ell(n: usize) -> usize {
        if Self::hat_ell_range(n).contains(&2) {
            2
        } else {
            1
        }
    }

    pub fn profiles(&self, n: usize) -> Result<SegmentProfiles> {
        Ok(SegmentProfiles {
            opt: self.opt(n)?,
            tilde: self.tilde(n).ok(),
            hat: self.hat(n).ok(),
            hat_ell: self.hat_ell(n, Self::default_ell(n)).ok(),
        })
    }

    /// Unit-length costs: `1/(4n)`, `1/(4(n-2))`, `1/(2n)`, `1/(2(n+1))`.
    pub fn opt_cost(&self, n: usize) -> Q {
        &self.length * &self.length / q(4 * n)
    }

    pub fn tilde_cost(&self, n: usize) -> Q {
        &self.length * &self.length / q(4 * (n - 2))
    }

    pub fn hat_cost(&self, n: usize) -> Q {
        &self.length * &self.length / q(2 * n)
    }

    pub fn hat_ell_cost(&self, n: usize) -> Q {
        &self.length * &self.length / q(2 * (n + 1))
    }

    /// Pair at `xi`, singles at `3 xi` and then after each gap, pair at `1 - xi`.
    /// The gaps (fractions of the segment) must satisfy `6 xi + sum = 1`.
    pub fn gap_profile(&self, xi: &Q, gaps: &[Q]) -> Result<Profile> {
        let total: Q = gaps.iter().sum::<Q>() + int(6) * xi;
        if xi <= &Q::zero() || total != Q::one() || gaps.iter().any(|g| g <= &Q::zero()) {
            return Err(Error::InvalidArgument("gaps and unit must be positive and fill the segment".into()));
        }
        let mut ts = vec![xi.clone(), xi.clone()];
        let mut t = int(3) * xi;
        ts.push(t.clone());
        for g in gaps {
            t += g;
            ts.push(t.clone());
        }
        let last = Q::one() - xi;
        ts.extend([last.clone(), last]);
        Ok(self.profile(ts))
    }
}

/// Equilibrium condition on the gaps of [`SegmentShape::gap_profile`]: every gap
/// is at most `2 xi` and adjacent gaps average at least `xi`.
pub fn gap_conditions_hold(xi: &Q, gaps: &[Q]) -> bool {
    let two = int(2) * xi;
    gaps.iter().all(|g| g <= &two) && gaps.windows(2).all(|w| (&w[0] + &w[1]) / int(2) >= *xi)
}

// ---------------------------------------------------------------- circle

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleShape {
    /// Edges in walking order from `start`.
    pub legs: [EdgeId; 2],
    pub start: VertexId,
    pub perimeter: Q,
    lengths: [Q; 2],
    leg_from_v: [bool; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleProfiles {
    pub tilde: Profile,
    pub hat: Option<Profile>,
    pub breve: Option<Profile>,
}

impl CircleShape {
    pub fn detect(net: &Network) -> Option<CircleShape> {
        if net.vertex_count() != 2 || net.edge_count() != 2 {
            return None;
        }
        let (e0, e1) = (net.edge(0), net.edge(1));
        let start = 0;
        Some(CircleShape {
            legs: [0, 1],
            start,
            perimeter: net.total_measure(),
            lengths: [e0.length.clone(), e1.length.clone()],
            // first leg walks start -> other vertex, second walks back
            leg_from_v: [e0.v == start, e1.v != start],
        })
    }

    /// Point at fraction `t` of the perimeter, walking from `start`.
    pub fn at(&self, t: &Q) -> Point {
        let s = t - t.floor();
        let d = &s * &self.perimeter;
        let (leg, along) = if d <= self.lengths[0] { (0, d) } else { (1, &d - &self.lengths[0]) };
        let frac = &along / &self.lengths[leg];
        let alpha = if self.leg_from_v[leg] { frac } else { Q::one() - frac };
        Point::new(self.legs[leg], alpha)
    }

    fn profile(&self, ts: impl IntoIterator<Item = Q>) -> Profile {
        ts.into_iter().map(|t| self.at(&t)).collect()
    }

    /// Singles at `i/n`.
    pub fn tilde(&self, n: usize) -> Result<Profile> {
        positive(n)?;
        Ok(self.profile((0..n).map(|i| ratio(i as i64, n as i64))))
    }

    /// Pairs at `2i/n` (even `n`).
    pub fn hat(&self, n: usize) -> Result<Profile> {
        if n == 0 || n % 2 == 1 {
            return Err(Error::InvalidArgument(format!("hat profile needs even n >= 2, got {n}")));
        }
        Ok(self.profile((0..n / 2).flat_map(|i| {
            let t = ratio(2 * i as i64, n as i64);
            [t.clone(), t]
        })))
    }

    /// Odd `n`: a single at 0 and pairs at `2i/(n+1)` for `i = 1..(n-1)/2`.
    pub fn breve(&self, n: usize) -> Result<Profile> {
        if n % 2 == 0 {
            return Err(Error::InvalidArgument(format!("breve profile needs odd n, got {n}")));
        }
        let mut ts = vec![Q::zero()];
        ts.extend((1..=(n - 1) / 2).flat_map(|i| {
            let t = ratio(2 * i as i64, n as i64 + 1);
            [t.clone(), t]
        }));
        Ok(self.profile(ts))
    }

    pub fn profiles(&self, n: usize) -> Result<CircleProfiles> {
        Ok(CircleProfiles { tilde: self.tilde(n)?, hat: self.hat(n).ok(), breve: self.breve(n).ok() })
    }

    /// `L^2 / (4n)`.
    pub fn tilde_cost(&self, n: usize) -> Q {
        &self.perimeter * &self.perimeter / q(4 * n)
    }

    /// `L^2 / (2n)`.
    pub fn hat_cost(&self, n: usize) -> Q {
        &self.perimeter * &self.perimeter / q(2 * n)
    }

    /// `L^2 / (2(n+1))`.
    pub fn breve_cost(&self, n: usize) -> Q {
        &self.perimeter * &self.perimeter / q(2 * (n + 1))
    }
}

// ---------------------------------------------------------------- star

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarShape {
    pub center: VertexId,
    pub rays: Vec<EdgeId>,
    pub ray_length: Q,
    center_is_v: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarKind {
    /// `n <= k`: everyone at the center.
    AllCenter,
    /// `3k - 1 <= n <= 3k`: pairs at `2/3` of every ray, the rest at the center.
    Unique,
    /// `n >= 3k + 1`: a one-parameter family.
    Family,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarEquilibrium {
    pub kind: StarKind,
    pub profile: Profile,
    /// Unit of the family, with the admissible interval and the layout parameters.
    #[serde(with = "serde_q::option", default)]
    pub xi: Option<Q>,
    #[serde(default)]
    pub interval: Option<StarInterval>,
    #[serde(with = "serde_q::option", default)]
    pub y: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarInterval {
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
    /// Players per ray.
    pub m: usize,
    /// Players at the center.
    pub r: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StarOutcome {
    Equilibrium(StarEquilibrium),
    NoEquilibrium,
}

impl StarShape {
    pub fn detect(net: &Network) -> Option<StarShape> {
        let k = net.edge_count();
        if k < 3 || net.vertex_count() != k + 1 {
            return None;
        }
        let center = (0..net.vertex_count()).find(|&w| net.vertex_degree(w) == k)?;
        let ray_length = net.edge(0).length.clone();
        if net.edges().iter().any(|e| e.length != ray_length || !e.touches(center)) {
            return None;
        }
        let mut rays: Vec<EdgeId> = (0..k).collect();
        rays.sort_by_key(|&e| net.edge(e).other(center));
        let center_is_v = rays.iter().map(|&e| net.edge(e).v == center).collect();
        Some(StarShape { center, rays, ray_length, center_is_v })
    }

    pub fn k(&self) -> usize {
        self.rays.len()
    }

    /// Point on ray `j` at fraction `t` from the center.
    pub fn at(&self, j: usize, t: &Q) -> Point {
        let alpha = if self.center_is_v[j] { t.clone() } else { Q::one() - t };
        Point::new(self.rays[j], alpha)
    }

    pub fn center_point(&self) -> Point {
        self.at(0, &Q::zero())
    }

    fn centered(&self, count: usize) -> Vec<Point> {
        vec![self.center_point(); count]
    }

    /// Admissible unit interval, per-ray count `m` and center count `r` of the
    /// family for `n >= 3k + 1` (unit ray length).
    pub fn family_interval(&self, n: usize) -> Result<StarInterval> {
        family_interval(self.k(), n)
    }

    /// The family member with unit `xi` (fraction of a ray): per ray, singles
    /// from `y = 1 - (2m - 3) xi` in steps of `2 xi`, then a pair at `1 - xi`.
    /// Any `xi` that keeps the layout on the rays is accepted, so members
    /// outside the admissible interval can be inspected too.
    pub fn family(&self, n: usize, xi: &Q) -> Result<StarEquilibrium> {
        let interval = self.family_interval(n)?;
        let m = interval.m;
        let y = Q::one() - q(2 * m - 3) * xi;
        if xi <= &Q::zero() || y < Q::zero() {
            return Err(Error::InvalidArgument(format!("unit {xi} does not fit the ray")));
        }
        let mut pts = self.centered(interval.r);
        for j in 0..self.k() {
            for s in 0..m - 2 {
                pts.push(self.at(j, &(&y + q(2 * s) * xi)));
            }
            let last = Q::one() - xi;
            pts.push(self.at(j, &last));
            pts.push(self.at(j, &last));
        }
        Ok(StarEquilibrium {
            kind: StarKind::Family,
            profile: Profile::new(pts),
            xi: Some(xi.clone()),
            interval: Some(interval),
            y: Some(y),
        })
    }

    pub fn equilibrium(&self, n: usize) -> Result<StarOutcome> {
        positive(n)?;
        let k = self.k();
        let plain = |kind, profile| StarEquilibrium { kind, profile, xi: None, interval: None, y: None };
        if n <= k {
            return Ok(StarOutcome::Equilibrium(plain(StarKind::AllCenter, Profile::new(self.centered(n)))));
        }
        if n < 3 * k - 1 {
            return Ok(StarOutcome::NoEquilibrium);
        }
        if n <= 3 * k {
            let mut pts = self.centered(n - 2 * k);
            for j in 0..k {
                let p = self.at(j, &ratio(2, 3));
                pts.push(p.clone());
                pts.push(p);
            }
            return Ok(StarOutcome::Equilibrium(plain(StarKind::Unique, Profile::new(pts))));
        }
        let iv = self.family_interval(n)?;
        let mid = (&iv.lo + &iv.hi) / int(2);
        Ok(StarOutcome::Equilibrium(self.family(n, &mid)?))
    }
}

/// Admissible unit interval of the star family with `k` unit rays.
pub fn family_interval(k: usize, n: usize) -> Result<StarInterval> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!("a star needs at least 3 rays, got {k}")));
    }
    if n < 3 * k + 1 {
        return Err(Error::InvalidArgument(format!("the family needs n >= 3k + 1 = {}, got {n}", 3 * k + 1)));
    }
    let (m, r) = match (n / k, n % k) {
        (m, 0) => (m - 1, k),
        (m, r) => (m, r),
    };
    let (kq, mq, rq) = (q(k), q(m), q(r));
    let base = int(2) * &kq * &mq - int(3) * &kq;
    // center players must also not want an empty stretch of length y: y <= 2 xi
    let lo = rational::max(&kq / (int(2) * (&rq + int(1)) + &base), Q::one() / q(2 * m - 1));
    let hi = &kq / (int(2) * &rq + &base);
    Ok(StarInterval { lo, hi, m, r })
}

/// Equilibria of the star with `k` unit rays.
pub fn star_equilibrium(k: usize, n: usize) -> Result<StarOutcome> {
    let net = make_star(k)?;
    StarShape::detect(&net).expect("star").equilibrium(n)
}

/// Profiles on the three-ray star behind the efficiency lower bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarRemarkProfiles {
    pub b: usize,
    /// `n = 3(2b+1)`: three at the center and `b` pairs on every ray.
    pub worst_eq: Profile,
    /// `n = 3(2b+1)`: one at the center and evenly spread singles.
    pub good: Profile,
    /// `n = 6b + 1`: two at the center, pairs on the rays, one single.
    pub worst_eq_odd: Profile,
    /// `n = 6b + 1`: one at the center and `2b` singles per ray.
    pub opt_odd: Profile,
    #[serde(with = "serde_q")]
    pub worst_cost: Q,
    #[serde(with = "serde_q")]
    pub good_cost: Q,
    #[serde(with = "serde_q")]
    pub worst_odd_cost: Q,
    #[serde(with = "serde_q")]
    pub opt_odd_cost: Q,
    /// `worst_cost / good_cost`.
    #[serde(with = "serde_q")]
    pub ratio: Q,
    /// `worst_odd_cost / opt_odd_cost`.
    #[serde(with = "serde_q")]
    pub ratio_odd: Q,
}

impl StarShape {
    fn require_three(&self) -> Result<()> {
        if self.k() != 3 {
            return Err(Error::InvalidArgument(format!("needs the three-ray star, got {} rays", self.k())));
        }
        Ok(())
    }

    /// `n = 3(2b+1)`, `b >= 1`: three at the center and pairs at `2j/(2b+1)`.
    pub fn worst_equilibrium(&self, b: usize) -> Result<Profile> {
        self.require_three()?;
        if b < 1 {
            return Err(Error::InvalidArgument("b must be at least 1".into()));
        }
        let d = 2 * b as i64 + 1;
        let mut pts = self.centered(3);
        for j in 0..3 {
            for i in 1..=b as i64 {
                let p = self.at(j, &ratio(2 * i, d));
                pts.push(p.clone());
                pts.push(p);
            }
        }
        Ok(Profile::new(pts))
    }

    pub fn remark_profiles(&self, b: usize) -> Result<StarRemarkProfiles> {
        self.require_three()?;
        if b <= 2 {
            return Err(Error::InvalidArgument(format!("needs b > 2, got {b}")));
        }
        let bi = b as i64;
        let worst_eq = self.worst_equilibrium(b)?;

        let mut good = self.centered(1);
        for j in 0..2 {
            good.extend((1..=2 * bi + 1).map(|i| self.at(j, &ratio(2 * i, 4 * bi + 3))));
        }
        good.extend((1..=2 * bi).map(|i| self.at(2, &ratio(2 * i, 4 * bi + 1))));

        let d = 2 * bi + 1;
        let mut odd = self.centered(2);
        for j in 0..2 {
            for i in 1..=bi {
                let p = self.at(j, &ratio(2 * i, d));
                odd.push(p.clone());
                odd.push(p);
            }
        }
        odd.push(self.at(2, &ratio(2, d)));
        for i in 2..=bi {
            let p = self.at(2, &ratio(2 * i, d));
            odd.push(p.clone());
            odd.push(p);
        }

        let mut opt = self.centered(1);
        for j in 0..3 {
            opt.extend((1..=2 * bi).map(|i| self.at(j, &ratio(2 * i, 4 * bi + 1))));
        }

        let s = &self.ray_length * &self.ray_length;
        let worst_cost = &s * ratio(3, 4 * bi + 2);
        let good_cost = &s * (ratio(1, 4 * bi + 3) + ratio(1, 8 * bi + 2));
        let worst_odd_cost = &s * ratio(3, 2 * (2 * bi + 1));
        let opt_odd_cost = &s * ratio(3, 2 * (4 * bi + 1));
        Ok(StarRemarkProfiles {
            b,
            worst_eq,
            good: Profile::new(good),
            worst_eq_odd: Profile::new(odd),
            opt_odd: Profile::new(opt),
            ratio: &worst_cost / &good_cost,
            ratio_odd: &worst_odd_cost / &opt_odd_cost,
            worst_cost,
            good_cost,
            worst_odd_cost,
            opt_odd_cost,
        })
    }
}

/// [`StarShape::remark_profiles`] on the unit three-ray star.
pub fn star_remark_profiles(b: usize) -> Result<StarRemarkProfiles> {
    let net = make_star(3)?;
    StarShape::detect(&net).expect("star").remark_profiles(b)
}

fn positive(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one player".into()));
    }
    Ok(())
}
