//! Reproducible configurations at (or away from) criticality.

use alloc::vec;
use core::cell::Cell;
use alloc::vec::Vec;

use crate::lattice::{BoxRegion, Color, LatticeKind, Site};
use crate::rng::{OpenThreshold, SiteStream, TrialKey};
use crate::{Error, Result};

/// Literature estimate of the site threshold on Z². The exact value is not
/// known; runs record the constant they used.
pub const SQUARE_SITE_PC: f64 = 0.592_746_05;

pub fn critical_p(kind: LatticeKind) -> f64 {
    match kind {
        LatticeKind::Triangular => 0.5,
        LatticeKind::SquareSite => SQUARE_SITE_PC,
    }
}

/// Read access to site colors over a box.
///
/// Callers only query sites inside [`SiteField::bounds`].
pub trait SiteField {
    fn lattice(&self) -> LatticeKind;
    fn bounds(&self) -> BoxRegion;
    fn is_open(&self, s: Site) -> bool;

    fn color(&self, s: Site) -> Color {
        if self.is_open(s) {
            Color::Open
        } else {
            Color::Closed
        }
    }

    fn has_color(&self, s: Site, color: Color) -> bool {
        self.is_open(s) == (color == Color::Open)
    }
}

impl<F: SiteField + ?Sized> SiteField for &F {
    fn lattice(&self) -> LatticeKind {
        (**self).lattice()
    }
    fn bounds(&self) -> BoxRegion {
        (**self).bounds()
    }
    fn is_open(&self, s: Site) -> bool {
        (**self).is_open(s)
    }
}

/// Dense, immutable open/closed assignment on a box (one bit per site).
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    lattice: LatticeKind,
    bounds: BoxRegion,
    p_open: f64,
    key: Option<TrialKey>,
    bits: Vec<u64>,
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Each site of `bounds` open independently with probability `p`.
pub fn sample(lattice: LatticeKind, bounds: BoxRegion, p: f64, key: TrialKey) -> Result<Configuration> {
    check_p(p)?;
    let stream = key.site_stream();
    let threshold = OpenThreshold::new(p);
    let mut bits = vec![0u64; bounds.len().div_ceil(64)];
    let w = bounds.width();
    let (x0, x1) = (bounds.xmin(), bounds.xmax());
    for (row, y) in (bounds.ymin()..=bounds.ymax()).enumerate() {
        let base = row * w;
        for pair in x0.div_euclid(2)..=x1.div_euclid(2) {
            let (even, odd) = stream.pair_bits53(pair, y);
            for (x, b) in [(2 * pair, even), (2 * pair + 1, odd)] {
                if x >= x0 && x <= x1 && threshold.is_open(b) {
                    let i = base + (x - x0) as usize;
                    bits[i >> 6] |= 1 << (i & 63);
                }
            }
        }
    }
    Ok(Configuration { lattice, bounds, p_open: p, key: Some(key), bits })
}

impl Configuration {
    /// Fixture constructor: `open(s)` decides every site.
    pub fn from_fn(lattice: LatticeKind, bounds: BoxRegion, mut open: impl FnMut(Site) -> bool) -> Self {
        let mut bits = vec![0u64; bounds.len().div_ceil(64)];
        for (i, s) in bounds.sites().enumerate() {
            if open(s) {
                bits[i >> 6] |= 1 << (i & 63);
            }
        }
        Configuration { lattice, bounds, p_open: f64::NAN, key: None, bits }
    }

    pub fn uniform(lattice: LatticeKind, bounds: BoxRegion, color: Color) -> Self {
        Configuration::from_fn(lattice, bounds, |_| color == Color::Open)
    }

    /// Copies any field restricted to its bounds.
    pub fn materialize<F: SiteField>(field: &F) -> Self {
        Configuration::from_fn(field.lattice(), field.bounds(), |s| field.is_open(s))
    }

    pub fn p_open(&self) -> f64 {
        self.p_open
    }

    pub fn key(&self) -> Option<TrialKey> {
        self.key
    }

    pub fn open_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Copy that differs from `self` exactly at `s`.
    pub fn flip(&self, s: Site) -> Result<Configuration> {
        if !self.bounds.contains(s) {
            return Err(Error::SiteOutsideBox(s));
        }
        let mut out = self.clone();
        out.toggle(s);
        Ok(out)
    }

    /// In-place flip for oracles that test many single-site changes.
    pub fn toggle(&mut self, s: Site) {
        let i = self.bounds.index(s);
        self.bits[i >> 6] ^= 1 << (i & 63);
    }

    /// Image under the point reflection through the box centre.
    pub fn reflected(&self) -> Configuration {
        let c = self.bounds.center;
        let mut out = Configuration::from_fn(self.lattice, self.bounds, |s| self.is_open(s.reflect_through(c)));
        out.p_open = self.p_open;
        out.key = self.key;
        out
    }
}

impl SiteField for Configuration {
    fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    fn bounds(&self) -> BoxRegion {
        self.bounds
    }

    #[inline]
    fn is_open(&self, s: Site) -> bool {
        let i = self.bounds.index(s);
        (self.bits[i >> 6] >> (i & 63)) & 1 == 1
    }
}

/// Configuration evaluated on demand from the site stream. Agrees with
/// [`sample`] for the same arguments but costs nothing for sites never read,
/// which matters for arm events where only the clusters near the seeds are
/// explored.
#[derive(Debug, Clone, Copy)]
pub struct LazyConfiguration {
    lattice: LatticeKind,
    bounds: BoxRegion,
    threshold: OpenThreshold,
    stream: SiteStream,
}

impl LazyConfiguration {
    pub fn new(lattice: LatticeKind, bounds: BoxRegion, p: f64, key: TrialKey) -> Result<Self> {
        check_p(p)?;
        Ok(LazyConfiguration { lattice, bounds, threshold: OpenThreshold::new(p), stream: key.site_stream() })
    }
}

impl SiteField for LazyConfiguration {
    fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    fn bounds(&self) -> BoxRegion {
        self.bounds
    }

    #[inline]
    fn is_open(&self, s: Site) -> bool {
        self.threshold.is_open(self.stream.bits53(s))
    }
}

/// [`LazyConfiguration`] that remembers every site it has evaluated, for
/// trials that run several searches over the same sites.
#[derive(Debug, Clone)]
pub struct MemoConfiguration {
    inner: LazyConfiguration,
    known: Vec<Cell<u64>>,
    open: Vec<Cell<u64>>,
}

impl MemoConfiguration {
    pub fn new(lattice: LatticeKind, bounds: BoxRegion, p: f64, key: TrialKey) -> Result<Self> {
        let inner = LazyConfiguration::new(lattice, bounds, p, key)?;
        let words = bounds.len().div_ceil(64);
        Ok(MemoConfiguration { inner, known: vec![Cell::new(0); words], open: vec![Cell::new(0); words] })
    }
}

impl SiteField for MemoConfiguration {
    fn lattice(&self) -> LatticeKind {
        self.inner.lattice
    }

    fn bounds(&self) -> BoxRegion {
        self.inner.bounds
    }

    #[inline]
    fn is_open(&self, s: Site) -> bool {
        let i = self.inner.bounds.index(s);
        let (w, b) = (i >> 6, 1u64 << (i & 63));
        if self.known[w].get() & b != 0 {
            return self.open[w].get() & b != 0;
        }
        let v = self.inner.is_open(s);
        self.known[w].set(self.known[w].get() | b);
        if v {
            self.open[w].set(self.open[w].get() | b);
        }
        v
    }
}

/// View of a field under the point reflection through its box centre.
#[derive(Debug, Clone, Copy)]
pub struct Reflected<F>(pub F);

impl<F: SiteField> SiteField for Reflected<F> {
    fn lattice(&self) -> LatticeKind {
        self.0.lattice()
    }

    fn bounds(&self) -> BoxRegion {
        self.0.bounds()
    }

    #[inline]
    fn is_open(&self, s: Site) -> bool {
        self.0.is_open(s.reflect_through(self.0.bounds().center))
    }
}
