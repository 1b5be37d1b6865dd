//! Lattice geometry.
//!
//! Both lattices use the vertex set Z². On the triangular lattice a site
//! `(x, y)` is adjacent to `(x±1, y)`, `(x, y±1)`, `(x+1, y−1)` and
//! `(x−1, y+1)`, and open and closed sites share that adjacency. On the
//! square site lattice open sites use the 4-neighbourhood and closed sites
//! the 8-neighbourhood (the matching lattice), so that an open left-right
//! crossing exists exactly when no closed top-bottom crossing does.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeKind {
    Triangular,
    SquareSite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Open,
    Closed,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Open => Color::Closed,
            Color::Closed => Color::Open,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    /// Chebyshev norm `max(|x|, |y|)`.
    pub fn norm(self) -> u32 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }

    pub const fn offset(self, dx: i32, dy: i32) -> Site {
        Site { x: self.x + dx, y: self.y + dy }
    }

    pub const fn minus(self, other: Site) -> Site {
        Site { x: self.x - other.x, y: self.y - other.y }
    }

    /// Point reflection through `center`.
    pub const fn reflect_through(self, center: Site) -> Site {
        Site { x: 2 * center.x - self.x, y: 2 * center.y - self.y }
    }
}

/// The eight unit steps, counterclockwise from east.
pub(crate) const OCTANTS: [(i32, i32); 8] =
    [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

const TRIANGULAR_STEPS: [u8; 6] = [0, 2, 3, 4, 6, 7];
const SQUARE_OPEN_STEPS: [u8; 4] = [0, 2, 4, 6];
const SQUARE_CLOSED_STEPS: [u8; 8] = [0, 1, 2, 3, 4, 5, 6, 7];

/// Octant index of a unit step, if it is one.
pub(crate) fn octant_of(dx: i32, dy: i32) -> Option<u8> {
    OCTANTS.iter().position(|&d| d == (dx, dy)).map(|i| i as u8)
}

impl LatticeKind {
    /// Octant indices of the steps of `color`'s graph, in counterclockwise order.
    pub(crate) fn steps(self, color: Color) -> &'static [u8] {
        match (self, color) {
            (LatticeKind::Triangular, _) => &TRIANGULAR_STEPS,
            (LatticeKind::SquareSite, Color::Open) => &SQUARE_OPEN_STEPS,
            (LatticeKind::SquareSite, Color::Closed) => &SQUARE_CLOSED_STEPS,
        }
    }

    pub(crate) fn is_step(self, color: Color, octant: u8) -> bool {
        self.steps(color).contains(&octant)
    }

    pub fn adjacent(self, color: Color, a: Site, b: Site) -> bool {
        let d = b.minus(a);
        match octant_of(d.x, d.y) {
            Some(o) => self.is_step(color, o),
            None => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Triangular => "triangular",
            LatticeKind::SquareSite => "square-site",
        }
    }
}

impl core::str::FromStr for LatticeKind {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "triangular" | "tri" => Ok(LatticeKind::Triangular),
            "square-site" | "square" | "squaresite" => Ok(LatticeKind::SquareSite),
            _ => Err(()),
        }
    }
}

/// Neighbours of `s` in the graph used for paths of `color`.
pub fn neighbors(kind: LatticeKind, s: Site, color: Color) -> Vec<Site> {
    kind.steps(color)
        .iter()
        .map(|&o| {
            let (dx, dy) = OCTANTS[o as usize];
            s.offset(dx, dy)
        })
        .collect()
}

/// The square box `{x : ‖x − center‖ ≤ radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoxRegion {
    pub center: Site,
    pub radius: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Top,
    Bottom,
    /// Left ∪ Top ∪ Right.
    TopAndSides,
}

impl BoxRegion {
    pub const fn new(center: Site, radius: u32) -> Self {
        BoxRegion { center, radius }
    }

    /// `B(n)` centred at the origin.
    pub const fn centered(radius: u32) -> Self {
        BoxRegion { center: Site::ORIGIN, radius }
    }

    pub fn xmin(&self) -> i32 {
        self.center.x - self.radius as i32
    }
    pub fn xmax(&self) -> i32 {
        self.center.x + self.radius as i32
    }
    pub fn ymin(&self) -> i32 {
        self.center.y - self.radius as i32
    }
    pub fn ymax(&self) -> i32 {
        self.center.y + self.radius as i32
    }

    /// Side length `2n + 1`.
    pub fn width(&self) -> usize {
        2 * self.radius as usize + 1
    }

    pub fn len(&self) -> usize {
        self.width() * self.width()
    }

    /// A box always holds at least its centre.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: Site) -> bool {
        s.minus(self.center).norm() <= self.radius
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.xmin() >= self.xmin()
            && other.xmax() <= self.xmax()
            && other.ymin() >= self.ymin()
            && other.ymax() <= self.ymax()
    }

    /// Row-major index, bottom row first. Caller guarantees containment.
    #[inline]
    pub fn index(&self, s: Site) -> usize {
        let w = self.width();
        (s.y - self.ymin()) as usize * w + (s.x - self.xmin()) as usize
    }

    #[inline]
    pub fn site_at(&self, index: usize) -> Site {
        let w = self.width();
        Site::new(self.xmin() + (index % w) as i32, self.ymin() + (index / w) as i32)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(move |i| self.site_at(i))
    }

    pub fn is_on_edge(&self, s: Site, edge: Edge) -> bool {
        match edge {
            Edge::Left => s.x == self.xmin(),
            Edge::Right => s.x == self.xmax(),
            Edge::Top => s.y == self.ymax(),
            Edge::Bottom => s.y == self.ymin(),
            Edge::TopAndSides => s.x == self.xmin() || s.x == self.xmax() || s.y == self.ymax(),
        }
    }

    /// Position of `s` along `∂₊B`, counterclockwise from the bottom-right
    /// corner: up the right side, leftwards along the top, down the left side.
    pub fn upper_boundary_position(&self, s: Site) -> Option<u32> {
        if !self.contains(s) {
            return None;
        }
        let r = 2 * self.radius;
        if s.x == self.xmax() {
            Some((s.y - self.ymin()) as u32)
        } else if s.y == self.ymax() {
            Some(r + (self.xmax() - s.x) as u32)
        } else if s.x == self.xmin() {
            Some(2 * r + (self.ymax() - s.y) as u32)
        } else {
            None
        }
    }
}

/// Sites of the named edge. Sides run bottom to top, top and bottom run left
/// to right; `TopAndSides` runs counterclockwise from the bottom-right corner.
pub fn boundary_sites(b: &BoxRegion, edge: Edge) -> Vec<Site> {
    let (x0, x1, y0, y1) = (b.xmin(), b.xmax(), b.ymin(), b.ymax());
    match edge {
        Edge::Left => (y0..=y1).map(|y| Site::new(x0, y)).collect(),
        Edge::Right => (y0..=y1).map(|y| Site::new(x1, y)).collect(),
        Edge::Top => (x0..=x1).map(|x| Site::new(x, y1)).collect(),
        Edge::Bottom => (x0..=x1).map(|x| Site::new(x, y0)).collect(),
        Edge::TopAndSides => {
            let mut out = Vec::with_capacity(3 * b.width());
            out.extend((y0..=y1).map(|y| Site::new(x1, y)));
            out.extend((x0..x1).rev().map(|x| Site::new(x, y1)));
            if b.radius > 0 {
                out.extend((y0..y1).rev().map(|y| Site::new(x0, y)));
            }
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aperture {
    /// φ = π/2, the first quadrant.
    QuarterPlane,
    /// φ = π, the upper half plane.
    HalfPlane,
}

impl Aperture {
    pub fn name(self) -> &'static str {
        match self {
            Aperture::QuarterPlane => "quarter",
            Aperture::HalfPlane => "half",
        }
    }

    fn admits(self, d: Site) -> bool {
        match self {
            Aperture::QuarterPlane => d.x >= 0 && d.y >= 0,
            Aperture::HalfPlane => d.y >= 0,
        }
    }
}

/// The annular sector `S(φ, n) \ S(φ, l)` around `apex`, together with the
/// seed intervals `K1` (right edge of `S(φ, l)`) and `K2` (top edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorRegion {
    pub aperture: Aperture,
    pub inner: u32,
    pub outer: u32,
    pub apex: Site,
}

impl SectorRegion {
    pub fn new(aperture: Aperture, inner: u32, outer: u32) -> Result<Self> {
        if inner == 0 || inner >= outer {
            return Err(Error::InvalidGeometry("sector radii need 1 <= l < n"));
        }
        Ok(SectorRegion { aperture, inner, outer, apex: Site::ORIGIN })
    }

    pub fn with_apex(mut self, apex: Site) -> Self {
        self.apex = apex;
        self
    }

    pub fn contains(&self, s: Site) -> bool {
        in_sector(self, s)
    }

    /// `{(l, y) : 3l/8 ≤ y ≤ 5l/8}`.
    pub fn k1(&self) -> Vec<Site> {
        let l = self.inner as i64;
        let lo = (3 * l + 7) / 8;
        let hi = 5 * l / 8;
        (lo..=hi).map(|y| self.apex.offset(l as i32, y as i32)).collect()
    }

    /// `{(x, l) : l/4 ≤ x ≤ 3l/4}`.
    pub fn k2(&self) -> Vec<Site> {
        let l = self.inner as i64;
        let lo = (l + 3) / 4;
        let hi = 3 * l / 4;
        (lo..=hi).map(|x| self.apex.offset(x as i32, l as i32)).collect()
    }

    /// Box that must be covered by a configuration hosting the sector.
    pub fn bounding_box(&self) -> BoxRegion {
        BoxRegion::new(self.apex, self.outer)
    }

    /// Whether `s` lies on `∂B(n)` around the apex.
    pub fn is_outer(&self, s: Site) -> bool {
        s.minus(self.apex).norm() == self.outer
    }
}

/// Membership in `S(φ, outer) \ S(φ, inner)`; sites on the bounding rays count.
pub fn in_sector(region: &SectorRegion, s: Site) -> bool {
    let d = s.minus(region.apex);
    let r = d.norm();
    region.inner < r && r <= region.outer && region.aperture.admits(d)
}

/// Horseshoe `H = B2 \ B1` where both boxes have their bottom edge on the
/// row of `anchor` and are centred horizontally on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HorseshoeSpec {
    pub inner_radius: u32,
    pub outer_radius: u32,
    pub anchor: Site,
}

impl HorseshoeSpec {
    pub fn new(inner_radius: u32, outer_radius: u32, anchor: Site) -> Result<Self> {
        if inner_radius == 0 {
            return Err(Error::InvalidGeometry("horseshoe inner radius must be positive"));
        }
        if inner_radius > outer_radius {
            return Err(Error::InvalidGeometry("horseshoe needs rho <= nu"));
        }
        Ok(HorseshoeSpec { inner_radius, outer_radius, anchor })
    }

    /// `H(ρ, ν)` with radii `2^ρ` and `2^ν`, anchored at the origin.
    pub fn dyadic(rho: u32, nu: u32) -> Result<Self> {
        if nu >= 30 {
            return Err(Error::InvalidGeometry("horseshoe exponent too large"));
        }
        HorseshoeSpec::new(1 << rho, 1 << nu, Site::ORIGIN)
    }

    pub fn inner_box(&self) -> BoxRegion {
        BoxRegion::new(self.anchor.offset(0, self.inner_radius as i32), self.inner_radius)
    }

    pub fn outer_box(&self) -> BoxRegion {
        BoxRegion::new(self.anchor.offset(0, self.outer_radius as i32), self.outer_radius)
    }

    pub fn contains(&self, s: Site) -> bool {
        self.outer_box().contains(s) && !self.inner_box().contains(s)
    }

    /// `∂₊B1`, counterclockwise from its bottom-right corner.
    pub fn inner_boundary(&self) -> Vec<Site> {
        boundary_sites(&self.inner_box(), Edge::TopAndSides)
    }

    /// The intervals `Γ1` (top of `B1`) and `Γ2` (left side of `B1`), each of
    /// length `max(1, radius/4)` and centred on its side.
    pub fn default_start_arcs(&self) -> [Vec<Site>; 2] {
        let b = self.inner_box();
        let len = (self.inner_radius / 4).max(1) as i32;
        let first = -(len / 2);
        let top = (0..len).map(|i| Site::new(b.center.x + first + i, b.ymax())).collect();
        let left = (0..len).map(|i| Site::new(b.xmin(), b.center.y + first + i)).collect();
        [top, left]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn set(v: Vec<Site>) -> BTreeSet<Site> {
        v.into_iter().collect()
    }

    #[test]
    fn triangular_neighbors_of_origin() {
        let got = set(neighbors(LatticeKind::Triangular, Site::ORIGIN, Color::Open));
        let want = set(vec![
            Site::new(1, 0),
            Site::new(-1, 0),
            Site::new(0, 1),
            Site::new(0, -1),
            Site::new(1, -1),
            Site::new(-1, 1),
        ]);
        assert_eq!(got, want);
        assert_eq!(
            neighbors(LatticeKind::Triangular, Site::ORIGIN, Color::Closed),
            neighbors(LatticeKind::Triangular, Site::ORIGIN, Color::Open)
        );
    }

    #[test]
    fn square_neighbors() {
        let open = set(neighbors(LatticeKind::SquareSite, Site::ORIGIN, Color::Open));
        assert_eq!(
            open,
            set(vec![Site::new(1, 0), Site::new(-1, 0), Site::new(0, 1), Site::new(0, -1)])
        );
        let closed = neighbors(LatticeKind::SquareSite, Site::ORIGIN, Color::Closed);
        assert_eq!(closed.len(), 8);
        assert!(closed.iter().all(|s| s.norm() == 1));
    }

    #[test]
    fn adjacency_is_symmetric() {
        let kinds = [LatticeKind::Triangular, LatticeKind::SquareSite];
        for kind in kinds {
            for color in [Color::Open, Color::Closed] {
                for v in BoxRegion::centered(2).sites() {
                    for u in neighbors(kind, v, color) {
                        assert!(neighbors(kind, u, color).contains(&v));
                        assert!(kind.adjacent(color, u, v));
                    }
                    let n = neighbors(kind, v, color);
                    assert_eq!(set(n.clone()).len(), n.len());
                }
            }
        }
    }

    #[test]
    fn box_edges() {
        let b1 = BoxRegion::centered(1);
        assert_eq!(
            boundary_sites(&b1, Edge::Bottom),
            vec![Site::new(-1, -1), Site::new(0, -1), Site::new(1, -1)]
        );
        let ts = boundary_sites(&b1, Edge::TopAndSides);
        assert_eq!(ts.len(), 7);
        let union: BTreeSet<_> = [Edge::Left, Edge::Top, Edge::Right]
            .into_iter()
            .flat_map(|e| boundary_sites(&b1, e))
            .collect();
        assert_eq!(set(ts), union);
        let b0 = BoxRegion::centered(0);
        assert_eq!(boundary_sites(&b0, Edge::Left), vec![Site::ORIGIN]);
        assert_eq!(boundary_sites(&b0, Edge::TopAndSides), vec![Site::ORIGIN]);
    }

    #[test]
    fn box_cardinality_and_index() {
        for n in 0..6 {
            let b = BoxRegion::new(Site::new(3, -2), n);
            assert_eq!(b.sites().count(), (2 * n as usize + 1).pow(2));
            for (i, s) in b.sites().enumerate() {
                assert!(b.contains(s));
                assert_eq!(b.index(s), i);
            }
        }
    }

    #[test]
    fn upper_boundary_positions_follow_ccw_order() {
        let b = BoxRegion::new(Site::new(1, 4), 3);
        for (i, s) in boundary_sites(&b, Edge::TopAndSides).into_iter().enumerate() {
            assert_eq!(b.upper_boundary_position(s), Some(i as u32));
        }
        assert_eq!(b.upper_boundary_position(b.center), None);
    }

    #[test]
    fn sector_membership() {
        let q = SectorRegion::new(Aperture::QuarterPlane, 2, 8).unwrap();
        assert!(in_sector(&q, Site::new(4, 1)));
        assert!(!in_sector(&q, Site::new(4, -1)));
        assert!(in_sector(&q, Site::new(4, 0)));
        assert!(in_sector(&q, Site::new(0, 5)));
        assert!(!in_sector(&q, Site::new(2, 2)));
        let h = SectorRegion::new(Aperture::HalfPlane, 2, 8).unwrap();
        assert!(in_sector(&h, Site::new(-4, 1)));
        assert!(in_sector(&h, Site::new(-4, 0)));
        assert!(!in_sector(&h, Site::new(-4, -1)));
        assert!(!in_sector(&h, Site::new(9, 0)));
        assert!(SectorRegion::new(Aperture::HalfPlane, 4, 4).is_err());
    }

    #[test]
    fn sector_seed_intervals() {
        let s = SectorRegion::new(Aperture::QuarterPlane, 8, 32).unwrap();
        assert_eq!(s.k1(), vec![Site::new(8, 3), Site::new(8, 4), Site::new(8, 5)]);
        assert_eq!(s.k2(), (2..=6).map(|x| Site::new(x, 8)).collect::<Vec<_>>());
        let tiny = SectorRegion::new(Aperture::QuarterPlane, 2, 4).unwrap();
        assert_eq!(tiny.k1(), vec![Site::new(2, 1)]);
        assert_eq!(tiny.k2(), vec![Site::new(1, 2)]);
    }

    #[test]
    fn horseshoe_membership_matches_box_difference() {
        for rho in 0..=3 {
            for nu in rho..=5 {
                let h = HorseshoeSpec::dyadic(rho, nu).unwrap();
                let (b1, b2) = (h.inner_box(), h.outer_box());
                assert_eq!(b1.ymin(), 0);
                assert_eq!(b2.ymin(), 0);
                assert!(b2.contains_box(&b1));
                let scan = BoxRegion::centered(1 << (nu + 1));
                for s in scan.sites() {
                    assert_eq!(h.contains(s), b2.contains(s) && !b1.contains(s));
                }
            }
        }
        assert!(HorseshoeSpec::dyadic(3, 2).is_err());
    }

    #[test]
    fn default_arcs_sit_on_top_and_left() {
        let h = HorseshoeSpec::dyadic(3, 5).unwrap();
        let [top, left] = h.default_start_arcs();
        assert_eq!(top, vec![Site::new(-1, 16), Site::new(0, 16)]);
        assert_eq!(left, vec![Site::new(-8, 7), Site::new(-8, 8)]);
        let inner = h.inner_boundary();
        assert!(top.iter().chain(&left).all(|s| inner.contains(s)));
    }
}
