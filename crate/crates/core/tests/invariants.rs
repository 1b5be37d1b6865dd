use std::collections::{BTreeSet, VecDeque};

use pivotal_core::features::{exploration_walk, highest_crossing, lowest_crossing, pivotal_sites, CrossingPath};
use pivotal_core::lattice::{BoxRegion, Color, LatticeKind, Site};
use pivotal_core::rng::TrialKey;
use pivotal_core::sampling::{sample, Configuration, SiteField};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = Configuration> {
    (prop_oneof![Just(LatticeKind::Triangular), Just(LatticeKind::SquareSite)], 1u32..=9, 0.3f64..0.75, any::<u64>())
        .prop_map(|(lattice, n, p, seed)| sample(lattice, BoxRegion::centered(n), p, TrialKey::new(seed, 1, 0)).unwrap())
}

fn dual_steps(lattice: LatticeKind) -> &'static [(i32, i32)] {
    match lattice {
        LatticeKind::Triangular => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)],
        LatticeKind::SquareSite => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
    }
}

/// Sites off `path` that can be joined to the row `y = start_row` without
/// touching the path (in the adjacency that the path blocks).
fn side_of(c: &Configuration, path: &[Site], start_row: i32) -> BTreeSet<Site> {
    let b = c.bounds();
    let on: BTreeSet<Site> = path.iter().copied().collect();
    let mut seen: BTreeSet<Site> =
        (b.xmin()..=b.xmax()).map(|x| Site::new(x, start_row)).filter(|s| !on.contains(s)).collect();
    let mut queue: VecDeque<Site> = seen.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        for &(dx, dy) in dual_steps(c.lattice()) {
            let v = Site::new(u.x + dx, u.y + dy);
            if b.contains(v) && !on.contains(&v) && seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}

fn sites(p: &Option<CrossingPath>) -> BTreeSet<Site> {
    p.iter().flat_map(|p| p.sites.iter().copied()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn block_count_positive_iff_min_height_reached(c in config()) {
        let r = pivotal_sites(&c);
        for m in 1..=c.bounds().radius {
            prop_assert_eq!(r.block_indicator_count(m).unwrap() >= 1, r.min_height <= m, "m = {}", m);
        }
    }

    #[test]
    fn strip_counts_grow_to_the_full_set(c in config()) {
        let r = pivotal_sites(&c);
        let n = c.bounds().radius;
        prop_assert_eq!(r.strip_pivotal_count(2 * n) as usize, r.pivotal_sites.len());
        for m in 1..=2 * n {
            prop_assert!(r.strip_pivotal_count(m - 1) <= r.strip_pivotal_count(m));
        }
        prop_assert_eq!(r.min_height == 2 * n, r.pivotal_sites.iter().all(|s| s.y == c.bounds().ymax()));
    }

    #[test]
    fn pivotal_sites_lie_on_both_extreme_crossings(c in config()) {
        let r = pivotal_sites(&c);
        let low = sites(&lowest_crossing(&c));
        let high = sites(&highest_crossing(&c));
        prop_assert_eq!(r.crossing, !low.is_empty());
        prop_assert_eq!(r.crossing, !high.is_empty());
        for s in &r.pivotal_sites {
            prop_assert!(low.contains(s) && high.contains(s), "{:?}", s);
        }
    }

    #[test]
    fn pivotal_sites_commute_with_half_turn(c in config()) {
        let b = c.bounds();
        let mut turned: Vec<Site> = pivotal_sites(&c.reflected())
            .pivotal_sites
            .into_iter()
            .map(|s| s.reflect_through(b.center))
            .collect();
        turned.sort_unstable();
        prop_assert_eq!(turned, pivotal_sites(&c).pivotal_sites);
    }

    #[test]
    fn pioneers_contain_lowest_crossing(c in config()) {
        prop_assume!(c.lattice() == LatticeKind::Triangular);
        let pioneers: BTreeSet<Site> = exploration_walk(&c).unwrap().pioneers.into_iter().collect();
        prop_assert!(sites(&lowest_crossing(&c)).is_subset(&pioneers));
    }

    #[test]
    fn crossing_paths_are_simple_open_and_span(c in config()) {
        let b = c.bounds();
        for p in [lowest_crossing(&c), highest_crossing(&c)].into_iter().flatten() {
            prop_assert_eq!(p.sites[0].x, b.xmin());
            prop_assert_eq!(p.sites.last().unwrap().x, b.xmax());
            prop_assert_eq!(p.sites.iter().collect::<BTreeSet<_>>().len(), p.len());
            for w in p.sites.windows(2) {
                prop_assert!(c.lattice().adjacent(Color::Open, w[0], w[1]));
            }
            prop_assert!(p.sites.iter().all(|&s| c.is_open(s)));
        }
    }

    #[test]
    fn lowest_crossing_is_weakly_below_every_crossing(c in config()) {
        let Some(low) = lowest_crossing(&c) else { return Ok(()) };
        let b = c.bounds();
        let below = side_of(&c, &low.sites, b.ymin());
        // changing anything above the path leaves it the lowest crossing
        for fill in [true, false] {
            let mut d = c.clone();
            for s in b.sites() {
                if !below.contains(&s) && !low.sites.contains(&s) && d.is_open(s) != fill {
                    d.toggle(s);
                }
            }
            prop_assert_eq!(lowest_crossing(&d), Some(low.clone()));
        }
        // and no site of it lies strictly above the highest crossing
        let high = highest_crossing(&c).unwrap();
        let above_high = side_of(&c, &high.sites, b.ymax());
        prop_assert!(low.sites.iter().all(|s| !above_high.contains(s)));
        prop_assert!(high.sites.iter().all(|s| !below.contains(s)));
    }
}
