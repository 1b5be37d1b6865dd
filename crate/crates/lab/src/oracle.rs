//! Brute-force references for the fast observables, usable on small boxes.
//!
//! Each oracle works from a definition instead of an algorithm: pivotal
//! sites by flipping and re-testing, the lowest crossing and the pioneering
//! sites by their arm conditions, crossings by cluster labels.

use std::time::Instant;

use pivotal_core::connectivity::{has_crossing, reach, two_disjoint_arms, Direction};
use pivotal_core::features::{exploration_walk, lowest_crossing, pivotal_sites};
use pivotal_core::lattice::{boundary_sites, neighbors, BoxRegion, Color, Edge, LatticeKind, Site};
use pivotal_core::rng::TrialKey;
use pivotal_core::sampling::{critical_p, sample, Configuration, SiteField};
use serde::Serialize;

pub fn open_crossing(c: &Configuration) -> bool {
    has_crossing(c, Color::Open, Direction::Horizontal, c.bounds()).exists
}

/// Open sites whose closing destroys every open left-right crossing.
pub fn flip_pivotal_oracle(c: &Configuration) -> Vec<Site> {
    if !open_crossing(c) {
        return Vec::new();
    }
    let mut work = c.clone();
    let mut out = Vec::new();
    for s in c.bounds().sites() {
        if c.is_open(s) {
            work.toggle(s);
            if !open_crossing(&work) {
                out.push(s);
            }
            work.toggle(s);
        }
    }
    out.sort_unstable();
    out
}

/// `closed[i]`: site `i` is closed and joined to the bottom row by a closed
/// path.
fn closed_to_bottom(c: &Configuration) -> Vec<bool> {
    let b = c.bounds();
    reach(c, Color::Closed, &boundary_sites(&b, Edge::Bottom), |_| true)
}

/// Bottom row, or a closed neighbour with a closed path to the bottom.
fn sees_bottom(c: &Configuration, s: Site, closed: &[bool]) -> bool {
    let b = c.bounds();
    s.y == b.ymin()
        || neighbors(c.lattice(), s, Color::Closed).into_iter().any(|t| b.contains(t) && closed[b.index(t)])
}

/// Open sites with two disjoint open arms to the left and right sides and a
/// closed path to the bottom: the sites of the lowest crossing.
pub fn three_arm_sites(c: &Configuration) -> Vec<Site> {
    let b = c.bounds();
    let closed = closed_to_bottom(c);
    let (left, right) = (boundary_sites(&b, Edge::Left), boundary_sites(&b, Edge::Right));
    let mut out: Vec<Site> = b
        .sites()
        .filter(|&s| {
            c.is_open(s) && sees_bottom(c, s, &closed) && two_disjoint_arms(c, s, Color::Open, &left, &right)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Open sites joined to both sides by open paths (not necessarily
/// disjoint) and seeing the bottom through closed sites.
pub fn pioneer_oracle(c: &Configuration) -> Vec<Site> {
    let b = c.bounds();
    let closed = closed_to_bottom(c);
    let from_left = reach(c, Color::Open, &boundary_sites(&b, Edge::Left), |_| true);
    let from_right = reach(c, Color::Open, &boundary_sites(&b, Edge::Right), |_| true);
    let mut out: Vec<Site> = b
        .sites()
        .filter(|&s| {
            let i = b.index(s);
            from_left[i] && from_right[i] && sees_bottom(c, s, &closed)
        })
        .collect();
    out.sort_unstable();
    out
}

/// `X_{n,m}` by scanning the blocks one by one.
pub fn block_count_oracle(q: &[Site], b: &BoxRegion, m: u32) -> u32 {
    let n = b.radius as i32;
    let m = m as i32;
    let blocks = (2 * n + m - 1) / m;
    (1..=blocks)
        .filter(|&k| {
            let (x0, x1) = (b.xmin() + (k - 1) * m, b.xmin() + k * m);
            q.iter().any(|s| {
                let in_x = (s.x > x0 && s.x <= x1) || (k == 1 && s.x == b.xmin());
                in_x && s.y - b.ymin() <= m
            })
        })
        .count() as u32
}

/// Exactly one of: open left-right crossing, closed top-bottom crossing.
pub fn duality_holds(c: &Configuration) -> bool {
    let closed = has_crossing(c, Color::Closed, Direction::Vertical, c.bounds()).exists;
    open_crossing(c) != closed
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleSummary {
    pub lattice: String,
    pub radius: u32,
    pub configs: u64,
    pub pivotal_mismatches: u64,
    pub lowest_mismatches: u64,
    /// Only counted on the triangular lattice.
    pub pioneer_mismatches: u64,
    pub block_mismatches: u64,
    pub strip_mismatches: u64,
    pub duality_violations: u64,
    pub elapsed_secs: f64,
    /// A few offending trial indices for reproduction.
    pub examples: Vec<u64>,
}

impl OracleSummary {
    pub fn mismatches(&self) -> u64 {
        self.pivotal_mismatches
            + self.lowest_mismatches
            + self.pioneer_mismatches
            + self.block_mismatches
            + self.strip_mismatches
            + self.duality_violations
    }
}

/// Compares the fast observables with the oracles on `configs` critical
/// configurations of `B(radius)`.
pub fn run_oracle_suite(lattice: LatticeKind, radius: u32, configs: u64, seed: u64) -> OracleSummary {
    let start = Instant::now();
    let b = BoxRegion::centered(radius);
    let mut sum = OracleSummary { lattice: lattice.name().into(), radius, configs, ..Default::default() };
    for t in 0..configs {
        let c = sample(lattice, b, critical_p(lattice), TrialKey::new(seed, 0x0_4ac1e, t)).expect("valid p");
        let before = sum.mismatches();
        let rep = pivotal_sites(&c);
        let q = flip_pivotal_oracle(&c);
        sum.pivotal_mismatches += (rep.pivotal_sites != q) as u64;
        for m in 1..=radius {
            sum.block_mismatches += (rep.block_indicator_count(m).ok() != Some(block_count_oracle(&q, &b, m))) as u64;
        }
        for m in 0..=2 * radius {
            let direct = q.iter().filter(|s| s.y - b.ymin() <= m as i32).count() as u32;
            sum.strip_mismatches += (rep.strip_pivotal_count(m) != direct) as u64;
        }
        let mut low: Vec<Site> = lowest_crossing(&c).map(|p| p.sites).unwrap_or_default();
        low.sort_unstable();
        sum.lowest_mismatches += (low != three_arm_sites(&c)) as u64;
        if lattice == LatticeKind::Triangular {
            let walk = exploration_walk(&c).expect("triangular");
            sum.pioneer_mismatches += (walk.pioneers != pioneer_oracle(&c)) as u64;
        }
        sum.duality_violations += !duality_holds(&c) as u64;
        if sum.mismatches() > before && sum.examples.len() < 5 {
            sum.examples.push(t);
        }
    }
    sum.elapsed_secs = start.elapsed().as_secs_f64();
    sum
}

/// Counts duality violations on `configs` critical configurations.
pub fn run_duality_suite(lattice: LatticeKind, radius: u32, configs: u64, seed: u64) -> u64 {
    let b = BoxRegion::centered(radius);
    (0..configs)
        .filter(|&t| {
            let c = sample(lattice, b, critical_p(lattice), TrialKey::new(seed, 0xd0a1, t)).expect("valid p");
            !duality_holds(&c)
        })
        .count() as u64
}
