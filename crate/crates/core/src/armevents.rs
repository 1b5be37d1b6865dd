//! Multi-arm events in horseshoes and annular sectors.
//!
//! An arm is a path of one color. In a horseshoe `H = B2 \ B1` it starts at
//! a site of `∂₊B1` (the top and the two sides of the inner box), continues
//! inside `H` and ends on `∂₊B2`. Open and closed arms can never share a
//! site, so only arms of equal color need to be kept apart; the peeling
//! below does that by geometry.
//!
//! With two arms the rotational order is ignored: the event is "some open
//! arm and some closed arm". Reflecting the horseshoe in its vertical axis
//! swaps the two orders, so each order carries half of the probability and
//! the exponent is unaffected.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{Color, HorseshoeSpec, SectorRegion, Site};
use crate::rng::TrialKey;
use crate::sampling::SiteField;
use crate::search::{rightmost_path, Seed};
use crate::stats::BernoulliEstimate;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ArmOrder {
    #[default]
    Counterclockwise,
}

/// Where arms may start on `∂₊B1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum StartArcs {
    /// The short arcs `Γ2` (left side, open arm) and `Γ1` (top, closed arm)
    /// for two arms; the whole of `∂₊B1` for three.
    #[default]
    Default,
    /// Every arm may start anywhere on `∂₊B1`.
    WholeBoundary,
    /// One list of start sites per arm, in pattern order.
    PerArm(Vec<Vec<Site>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmPattern {
    pub colors: Vec<Color>,
    pub order: ArmOrder,
    pub start_arcs: StartArcs,
}

impl ArmPattern {
    pub fn new(colors: Vec<Color>, start_arcs: StartArcs) -> Result<Self> {
        let ok = match colors.as_slice() {
            [Color::Open, Color::Closed] => true,
            [Color::Open, Color::Closed, Color::Open] => true,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidPattern);
        }
        if let StartArcs::PerArm(arcs) = &start_arcs {
            if arcs.len() != colors.len() {
                return Err(Error::InvalidPattern);
            }
        }
        Ok(ArmPattern { colors, order: ArmOrder::Counterclockwise, start_arcs })
    }

    /// Open and closed.
    pub fn two_arm() -> Self {
        ArmPattern::new(vec![Color::Open, Color::Closed], StartArcs::Default).unwrap()
    }

    /// Open, closed, open counterclockwise.
    pub fn three_arm() -> Self {
        ArmPattern::new(vec![Color::Open, Color::Closed, Color::Open], StartArcs::Default).unwrap()
    }

    pub fn with_arcs(mut self, arcs: StartArcs) -> Result<Self> {
        self = ArmPattern::new(self.colors, arcs)?;
        Ok(self)
    }

    pub fn kappa(&self) -> usize {
        self.colors.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmEventOutcome {
    pub occurred: bool,
    /// First and last site of each arm, in pattern order.
    pub witness_arm_endpoints: Option<Vec<Site>>,
}

impl ArmEventOutcome {
    fn from_arms(arms: Option<Vec<Vec<Site>>>) -> Self {
        match arms {
            Some(arms) => ArmEventOutcome {
                occurred: true,
                witness_arm_endpoints: Some(arms.iter().flat_map(|a| [a[0], a[a.len() - 1]]).collect()),
            },
            None => ArmEventOutcome { occurred: false, witness_arm_endpoints: None },
        }
    }
}

/// Octant pointing from a site of `∂₊B1` into `B1`.
fn inward(spec: &HorseshoeSpec, s: Site) -> u8 {
    let b = spec.inner_box();
    let (right, left, top) = (s.x == b.xmax(), s.x == b.xmin(), s.y == b.ymax());
    match (right, left, top) {
        (true, _, true) => 5,
        (_, true, true) => 7,
        (_, _, true) => 6,
        (true, _, _) => 4,
        _ => 0,
    }
}

/// Start sites as seeds sorted clockwise-most first.
fn seeds_for(spec: &HorseshoeSpec, sites: &[Site]) -> Vec<(u32, Seed)> {
    let b = spec.inner_box();
    let mut out: Vec<(u32, Seed)> = sites
        .iter()
        .filter_map(|&s| b.upper_boundary_position(s).map(|p| (p, (s, inward(spec, s)))))
        .collect();
    out.sort_unstable_by_key(|e| e.0);
    out.dedup_by_key(|e| e.0);
    out
}

pub fn horseshoe_event<F: SiteField>(field: &F, spec: &HorseshoeSpec, pattern: &ArmPattern) -> Result<ArmEventOutcome> {
    let outer = spec.outer_box();
    if !field.bounds().contains_box(&outer) {
        return Err(Error::GeometryDoesNotFit("horseshoe outer box exceeds the configuration box"));
    }
    let whole = spec.inner_boundary();
    let arcs: Vec<Vec<Site>> = match &pattern.start_arcs {
        StartArcs::PerArm(a) => a.clone(),
        StartArcs::WholeBoundary => vec![whole; pattern.kappa()],
        StartArcs::Default if pattern.kappa() == 2 => {
            let [top, left] = spec.default_start_arcs();
            vec![left, top]
        }
        StartArcs::Default => vec![whole; 3],
    };
    let is_target = |s: Site| outer.upper_boundary_position(s).is_some();
    let in_h = |s: Site| spec.contains(s);

    let arms = if pattern.kappa() == 2 {
        let arm = |i: usize| {
            let seeds: Vec<Seed> = seeds_for(spec, &arcs[i]).into_iter().map(|e| e.1).collect();
            rightmost_path(field, pattern.colors[i], &seeds, in_h, is_target)
        };
        arm(0).and_then(|o| arm(1).map(|c| vec![o, c]))
    } else {
        peel(field, spec, pattern, &arcs, in_h, is_target)
    };
    Ok(ArmEventOutcome::from_arms(arms))
}

/// Clockwise-most arm of each color in turn, each one starting strictly
/// counterclockwise of the previous start and avoiding earlier arms.
fn peel<F: SiteField>(
    field: &F,
    spec: &HorseshoeSpec,
    pattern: &ArmPattern,
    arcs: &[Vec<Site>],
    in_h: impl Fn(Site) -> bool,
    is_target: impl Fn(Site) -> bool + Copy,
) -> Option<Vec<Vec<Site>>> {
    let inner = spec.inner_box();
    let outer = spec.outer_box();
    let mut used = vec![0u64; outer.len().div_ceil(64)];
    let mut arms: Vec<Vec<Site>> = Vec::new();
    let mut after: Option<u32> = None;
    for (i, &color) in pattern.colors.iter().enumerate() {
        let seeds: Vec<Seed> = seeds_for(spec, &arcs[i])
            .into_iter()
            .filter(|e| after.is_none_or(|a| e.0 > a))
            .map(|e| e.1)
            .collect();
        let free = |s: Site| {
            let j = outer.index(s);
            used[j >> 6] >> (j & 63) & 1 == 0
        };
        let arm = rightmost_path(field, color, &seeds, |s| in_h(s) && free(s), is_target)?;
        for &s in &arm[1..] {
            let j = outer.index(s);
            used[j >> 6] |= 1 << (j & 63);
        }
        after = inner.upper_boundary_position(arm[0]);
        arms.push(arm);
    }
    Some(arms)
}

fn check_sector<F: SiteField>(field: &F, region: &SectorRegion) -> Result<()> {
    if 2 * region.inner > region.outer {
        return Err(Error::InvalidGeometry("sector needs l <= n/2"));
    }
    if region.k1().is_empty() || region.k2().is_empty() {
        return Err(Error::InvalidGeometry("sector inner radius too small for K1 and K2"));
    }
    if !field.bounds().contains_box(&region.bounding_box()) {
        return Err(Error::GeometryDoesNotFit("sector exceeds the configuration box"));
    }
    Ok(())
}

/// Closed arm from `K1` and open arm from `K2`, both inside the annular
/// sector and ending at distance `n` from the apex.
pub fn sector_event<F: SiteField>(field: &F, region: &SectorRegion) -> Result<ArmEventOutcome> {
    check_sector(field, region)?;
    let closed = sector_arm(field, region, Color::Closed);
    let open = closed.as_ref().and_then(|_| sector_arm(field, region, Color::Open));
    Ok(ArmEventOutcome::from_arms(closed.zip(open).map(|(c, o)| vec![c, o])))
}

/// Single arm of `color` in the sector: closed from `K1`, open from `K2`.
pub fn sector_arm<F: SiteField>(field: &F, region: &SectorRegion, color: Color) -> Option<Vec<Site>> {
    let (starts, back) = match color {
        Color::Closed => (region.k1(), 4),
        Color::Open => (region.k2(), 6),
    };
    let seeds: Vec<Seed> = starts.into_iter().map(|s| (s, back)).collect();
    rightmost_path(field, color, &seeds, |s| region.contains(s), |s| region.is_outer(s))
}

/// Runs `event` on trial keys `base, base+1, …` and counts successes.
pub fn estimate_event_probability(
    mut event: impl FnMut(TrialKey) -> bool,
    trials: u64,
    base: TrialKey,
) -> Result<BernoulliEstimate> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let successes =
        (0..trials).filter(|&t| event(base.with_trial(base.trial_index.wrapping_add(t)))).count() as u64;
    BernoulliEstimate::new(successes, trials)
}
