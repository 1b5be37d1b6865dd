//! Observables of a configuration on a box `B(n)`.
//!
//! Heights are measured from the bottom row: a site `(x, y)` has height
//! `y − ymin`, which is `y + n` for a box centred at the origin.

use alloc::vec::Vec;

use crate::connectivity::{label_clusters, reach, terminal_cut_vertices};
use crate::lattice::{boundary_sites, BoxRegion, Color, Edge, LatticeKind, Site};
use crate::sampling::{Reflected, SiteField};
use crate::search::rightmost_path;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    Lowest,
    Highest,
    Exploration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingPath {
    pub kind: PathKind,
    pub sites: Vec<Site>,
}

impl CrossingPath {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn min_y(&self) -> Option<i32> {
        self.sites.iter().map(|s| s.y).min()
    }
}

/// Seeds for a left-to-right search: the left column, bottom first,
/// arriving from the west.
fn left_seeds(b: &BoxRegion) -> Vec<(Site, u8)> {
    boundary_sites(b, Edge::Left).into_iter().map(|s| (s, 4)).collect()
}

/// The open left-right crossing lying on or beneath every other one.
pub fn lowest_crossing<F: SiteField>(field: &F) -> Option<CrossingPath> {
    let b = field.bounds();
    let xmax = b.xmax();
    let seeds = left_seeds(&b);
    let first = rightmost_path(field, Color::Open, &seeds, |_| true, |s| s.x == xmax)?;
    // The crossing ends at the lowest right-side site of its cluster: a path
    // to anything lower would run beneath it.
    let end = *first.last().unwrap();
    let cluster = reach(field, Color::Open, &[end], |_| true);
    let target = (b.ymin()..=end.y).map(|y| Site::new(xmax, y)).find(|&s| cluster[b.index(s)]).unwrap_or(end);
    let sites = if target == end {
        first
    } else {
        rightmost_path(field, Color::Open, &seeds, |_| true, |s| s == target).expect("target joins the left side")
    };
    Some(CrossingPath { kind: PathKind::Lowest, sites })
}

/// The open left-right crossing lying on or above every other one; the
/// lowest crossing of the configuration turned by half a turn.
pub fn highest_crossing<F: SiteField>(field: &F) -> Option<CrossingPath> {
    let c = field.bounds().center;
    let turned = lowest_crossing(&Reflected(field))?;
    let sites = turned.sites.into_iter().rev().map(|s| s.reflect_through(c)).collect();
    Some(CrossingPath { kind: PathKind::Highest, sites })
}

/// Pivotal sites of the horizontal open crossing and quantities derived from
/// them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotalReport {
    pub bounds: BoxRegion,
    /// Whether an open left-right crossing exists.
    pub crossing: bool,
    /// `Q_n`, sorted.
    pub pivotal_sites: Vec<Site>,
    /// `M_n`: lowest height of a pivotal site, `2n` if there is none.
    pub min_height: u32,
}

pub fn pivotal_sites<F: SiteField>(field: &F) -> PivotalReport {
    let b = field.bounds();
    let left = boundary_sites(&b, Edge::Left);
    let right = boundary_sites(&b, Edge::Right);
    let cuts = terminal_cut_vertices(field, Color::Open, &left, &right);
    let crossing = cuts.is_ok();
    let pivotal_sites = cuts.unwrap_or_default();
    let min_height = pivotal_sites
        .iter()
        .map(|s| (s.y - b.ymin()) as u32)
        .min()
        .unwrap_or(2 * b.radius);
    PivotalReport { bounds: b, crossing, pivotal_sites, min_height }
}

pub fn min_pivotal_height(report: &PivotalReport) -> u32 {
    report.min_height
}

impl PivotalReport {
    fn radius(&self) -> u32 {
        self.bounds.radius
    }

    fn height(&self, s: Site) -> u32 {
        (s.y - self.bounds.ymin()) as u32
    }

    /// Number of blocks of the bottom row of `m × m` blocks that hold a
    /// pivotal site (`X_{n,m}`).
    ///
    /// Block `k` covers `xmin + (k−1)m < x ≤ xmin + km` and heights `0..=m`;
    /// the leftmost column `x = xmin` is added to block 1 so that the blocks
    /// tile the whole bottom strip. The last block is truncated when `m`
    /// does not divide `2n`.
    pub fn block_indicator_count(&self, m: u32) -> Result<u32> {
        let n = self.radius();
        if m == 0 || m > n {
            return Err(Error::BlockSizeOutOfRange { m, n });
        }
        let xmin = self.bounds.xmin();
        let mut last_block = 0;
        let mut count = 0;
        // Sites are sorted by x, so blocks are visited in order.
        for s in &self.pivotal_sites {
            if self.height(*s) > m {
                continue;
            }
            let d = (s.x - xmin) as u32;
            let k = d.div_ceil(m).max(1);
            if k != last_block {
                last_block = k;
                count += 1;
            }
        }
        Ok(count)
    }

    /// `Q_{n,m}`: pivotal sites of height at most `m`.
    pub fn strip_pivotal_count(&self, m: u32) -> u32 {
        self.pivotal_sites.iter().filter(|s| self.height(**s) <= m).count() as u32
    }
}

pub fn block_indicator_count(report: &PivotalReport, m: u32) -> Result<u32> {
    report.block_indicator_count(m)
}

pub fn strip_pivotal_count(report: &PivotalReport, m: u32) -> u32 {
    report.strip_pivotal_count(m)
}

/// Result of the exploration walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    /// Open sites met on the left of the walk, in order (immediate repeats
    /// collapsed).
    pub path: CrossingPath,
    /// Closed sites met on the right of the walk, in order.
    pub closed_side: Vec<Site>,
    /// `F_n`: sites of the left side that belong to an open cluster joining
    /// the left and right sides of the box. Sorted.
    pub pioneers: Vec<Site>,
    /// Number of interface edges traversed.
    pub steps: usize,
}

/// Hexagon interface walk from the lower-left to the lower-right corner.
///
/// Sites below the box are closed; sites left of, right of and above the box
/// are open. The walk keeps open sites on its left and closed ones on its
/// right, so it traces the boundary of the closed cluster hanging from the
/// bottom edge.
pub fn exploration_walk<F: SiteField>(field: &F) -> Result<Exploration> {
    if field.lattice() != LatticeKind::Triangular {
        return Err(Error::UnsupportedLattice);
    }
    let b = field.bounds();
    let is_open = |s: Site| {
        if b.contains(s) {
            field.is_open(s)
        } else {
            s.y >= b.ymin()
        }
    };
    // Triangular steps in counterclockwise order.
    const RING: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    let ccw_next = |d: Site| {
        let i = RING.iter().position(|&r| r == (d.x, d.y)).expect("walk edge is a lattice step");
        RING[(i + 1) % 6]
    };

    let mut open_side = Site::new(b.xmin() - 1, b.ymin());
    let mut closed_side = Site::new(b.xmin(), b.ymin() - 1);
    let mut lefts: Vec<Site> = Vec::new();
    let mut rights: Vec<Site> = Vec::new();
    let limit = 8 * (b.width() + 2) * (b.width() + 2);
    let mut steps = 0;
    loop {
        let (dx, dy) = ccw_next(closed_side.minus(open_side));
        let ahead = open_side.offset(dx, dy);
        if is_open(ahead) {
            open_side = ahead;
            if b.contains(ahead) && lefts.last() != Some(&ahead) {
                lefts.push(ahead);
            }
        } else {
            closed_side = ahead;
            if b.contains(ahead) && rights.last() != Some(&ahead) {
                rights.push(ahead);
            }
        }
        steps += 1;
        if !b.contains(open_side) && !b.contains(closed_side) {
            break;
        }
        assert!(steps < limit, "exploration walk failed to terminate");
    }

    let labels = label_clusters(field, Color::Open);
    let (on_left, on_right) = (labels.labels_on_edge(Edge::Left), labels.labels_on_edge(Edge::Right));
    let mut pioneers: Vec<Site> = lefts
        .iter()
        .copied()
        .filter(|&s| labels.label(s).is_some_and(|l| on_left[l as usize] && on_right[l as usize]))
        .collect();
    pioneers.sort_unstable();
    pioneers.dedup();
    Ok(Exploration {
        path: CrossingPath { kind: PathKind::Exploration, sites: lefts },
        closed_side: rights,
        pioneers,
        steps,
    })
}

/// `M_hc`: lowest height reached by the highest crossing, `2n` without one.
pub fn highest_crossing_min_height<F: SiteField>(field: &F) -> u32 {
    let b = field.bounds();
    match lowest_site_height_of_highest_crossing(field) {
        Some(y) => (y - b.ymin()) as u32,
        None => 2 * b.radius,
    }
}

/// Lowest `y` coordinate on the highest crossing.
pub fn lowest_site_height_of_highest_crossing<F: SiteField>(field: &F) -> Option<i32> {
    highest_crossing(field).and_then(|p| p.min_y())
}
