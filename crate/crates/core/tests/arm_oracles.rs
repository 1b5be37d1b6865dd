//! Arm events against direct breadth-first definitions, and exact small-box
//! probabilities against Monte Carlo.

use std::collections::VecDeque;

use pivotal_core::armevents::{estimate_event_probability, horseshoe_event, sector_event, ArmPattern, StartArcs};
use pivotal_core::connectivity::{has_crossing, Direction};
use pivotal_core::lattice::{Aperture, BoxRegion, Color, HorseshoeSpec, LatticeKind, SectorRegion, Site};
use pivotal_core::rng::TrialKey;
use pivotal_core::sampling::{critical_p, sample, Configuration, SiteField};

const LATTICES: [LatticeKind; 2] = [LatticeKind::Triangular, LatticeKind::SquareSite];

fn steps(lattice: LatticeKind, color: Color) -> &'static [(i32, i32)] {
    const TRI: [(i32, i32); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];
    const FOUR: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    const EIGHT: [(i32, i32); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    match (lattice, color) {
        (LatticeKind::Triangular, _) => &TRI,
        (LatticeKind::SquareSite, Color::Open) => &FOUR,
        (LatticeKind::SquareSite, Color::Closed) => &EIGHT,
    }
}

/// Whether a path of `color` leaves `start` and, moving only through sites
/// satisfying `inside`, reaches a site satisfying `done`.
fn arm(c: &Configuration, color: Color, start: Site, inside: impl Fn(Site) -> bool, done: impl Fn(Site) -> bool) -> bool {
    if c.color(start) != color {
        return false;
    }
    let mut seen = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &(dx, dy) in steps(c.lattice(), color) {
            let v = Site::new(u.x + dx, u.y + dy);
            if !inside(v) || c.color(v) != color || seen.contains(&v) {
                continue;
            }
            if done(v) {
                return true;
            }
            seen.push(v);
            queue.push_back(v);
        }
    }
    false
}

/// Top and sides of `b`, as (position counterclockwise from the bottom-right
/// corner, site).
fn upper_boundary(b: &BoxRegion) -> Vec<(u32, Site)> {
    let mut out = Vec::new();
    let mut pos = 0;
    for y in b.ymin()..=b.ymax() {
        out.push((pos, Site::new(b.xmax(), y)));
        pos += 1;
    }
    for x in (b.xmin()..b.xmax()).rev() {
        out.push((pos, Site::new(x, b.ymax())));
        pos += 1;
    }
    for y in (b.ymin()..b.ymax()).rev() {
        out.push((pos, Site::new(b.xmin(), y)));
        pos += 1;
    }
    out
}

fn horseshoe_arm(c: &Configuration, spec: &HorseshoeSpec, color: Color, start: Site) -> bool {
    let outer = spec.outer_box();
    let on_outer = |s: Site| upper_boundary(&outer).iter().any(|&(_, t)| t == s);
    arm(c, color, start, |s| spec.contains(s), on_outer)
}

/// Open arm from the left arc and closed arm from the top arc.
fn two_arm_oracle(c: &Configuration, spec: &HorseshoeSpec) -> bool {
    let [top, left] = spec.default_start_arcs();
    left.iter().any(|&s| horseshoe_arm(c, spec, Color::Open, s))
        && top.iter().any(|&s| horseshoe_arm(c, spec, Color::Closed, s))
}

/// A closed arm separates the horseshoe, so open arms starting on either
/// side of it are automatically disjoint from each other.
fn three_arm_oracle(c: &Configuration, spec: &HorseshoeSpec) -> bool {
    let starts = upper_boundary(&spec.inner_box());
    let open: Vec<u32> =
        starts.iter().filter(|&&(_, s)| horseshoe_arm(c, spec, Color::Open, s)).map(|&(p, _)| p).collect();
    starts.iter().any(|&(pb, s)| {
        open.iter().any(|&p| p < pb)
            && open.iter().any(|&p| p > pb)
            && horseshoe_arm(c, spec, Color::Closed, s)
    })
}

#[test]
fn horseshoe_events_match_breadth_first_definitions() {
    for lattice in LATTICES {
        for (rho, nu, p) in [(1, 2, 0.5), (1, 3, 0.5), (2, 4, 0.5), (1, 2, 0.35), (1, 3, 0.65)] {
            let spec = HorseshoeSpec::new(rho, nu, Site::new(3, -5)).unwrap();
            let whole = ArmPattern::three_arm().with_arcs(StartArcs::WholeBoundary).unwrap();
            let (mut hits2, mut hits3) = (0, 0);
            for t in 0..3000 {
                let c = sample(lattice, spec.outer_box(), p, TrialKey::new(77, rho * 10 + nu, t)).unwrap();
                let two = horseshoe_event(&c, &spec, &ArmPattern::two_arm()).unwrap().occurred;
                let three = horseshoe_event(&c, &spec, &ArmPattern::three_arm()).unwrap().occurred;
                assert_eq!(two, two_arm_oracle(&c, &spec), "{lattice:?} rho={rho} nu={nu} trial {t}");
                assert_eq!(three, three_arm_oracle(&c, &spec), "{lattice:?} rho={rho} nu={nu} trial {t}");
                assert_eq!(three, horseshoe_event(&c, &spec, &whole).unwrap().occurred);
                hits2 += two as u32;
                hits3 += three as u32;
            }
            // both outcomes must actually be exercised
            assert!(hits2 > 0 && hits3 > 0 && hits3 < 3000, "{lattice:?} {rho} {nu}: {hits2} {hits3}");
        }
    }
}

fn sector_oracle(c: &Configuration, r: &SectorRegion) -> bool {
    let closed = r.k1().into_iter().any(|s| arm(c, Color::Closed, s, |t| r.contains(t), |t| r.is_outer(t)));
    let open = r.k2().into_iter().any(|s| arm(c, Color::Open, s, |t| r.contains(t), |t| r.is_outer(t)));
    closed && open
}

#[test]
fn sector_events_match_breadth_first_definitions() {
    for lattice in LATTICES {
        for aperture in [Aperture::QuarterPlane, Aperture::HalfPlane] {
            for (l, n) in [(2, 4), (4, 8), (4, 12)] {
                let r = SectorRegion::new(aperture, l, n).unwrap().with_apex(Site::new(-2, 1));
                for t in 0..2000 {
                    let c = sample(lattice, r.bounding_box(), 0.5, TrialKey::new(3, l * 100 + n, t)).unwrap();
                    assert_eq!(sector_event(&c, &r).unwrap().occurred, sector_oracle(&c, &r), "{lattice:?} {aperture:?} {l} {n} {t}");
                }
            }
        }
    }
}

/// The quarter sector with `l = 2`, `n = 4` depends on 18 sites: the 16 of
/// the annulus plus one site each in `K1` and `K2`. Enumerating all of them
/// gives the exact probability.
#[test]
fn quarter_sector_exhaustive_probability_matches_monte_carlo() {
    let lattice = LatticeKind::Triangular;
    let r = SectorRegion::new(Aperture::QuarterPlane, 2, 4).unwrap();
    let b = r.bounding_box();
    let mut relevant: Vec<Site> = b.sites().filter(|&s| r.contains(s)).collect();
    relevant.extend(r.k1());
    relevant.extend(r.k2());
    assert_eq!(relevant.len(), 18);
    let p = critical_p(lattice);
    let mut exact = 0.0;
    for mask in 0u32..1 << relevant.len() {
        let c = Configuration::from_fn(lattice, b, |s| {
            relevant.iter().position(|&t| t == s).is_some_and(|i| mask >> i & 1 == 1)
        });
        let hit = sector_event(&c, &r).unwrap().occurred;
        assert_eq!(hit, sector_oracle(&c, &r), "mask {mask:#x}");
        if hit {
            let k = mask.count_ones() as i32;
            exact += p.powi(k) * (1.0 - p).powi(relevant.len() as i32 - k);
        }
    }
    let est = estimate_event_probability(
        |key| sector_event(&sample(lattice, b, p, key).unwrap(), &r).unwrap().occurred,
        40_000,
        TrialKey::new(11, 12, 0),
    )
    .unwrap();
    let se = (exact * (1.0 - exact) / 40_000.0).sqrt();
    assert!((est.p_hat - exact).abs() < 4.0 * se, "exact {exact} estimate {}", est.p_hat);
}

/// `B(1)` has nine sites; the crossing probability is a polynomial in `p`.
#[test]
fn unit_box_crossing_probability_exact() {
    for lattice in LATTICES {
        let b = BoxRegion::centered(1);
        let p = critical_p(lattice);
        let mut exact = 0.0;
        for mask in 0u32..512 {
            let c = Configuration::from_fn(lattice, b, |s| mask >> b.index(s) & 1 == 1);
            if has_crossing(&c, Color::Open, Direction::Horizontal, b).exists {
                let k = mask.count_ones() as i32;
                exact += p.powi(k) * (1.0 - p).powi(9 - k);
            }
        }
        if lattice == LatticeKind::Triangular {
            // self-duality at p = 1/2
            assert!((exact - 0.5).abs() < 1e-12, "{exact}");
        }
        let trials = 100_000;
        let est = estimate_event_probability(
            |key| has_crossing(&sample(lattice, b, p, key).unwrap(), Color::Open, Direction::Horizontal, b).exists,
            trials,
            TrialKey::new(5, 9, 0),
        )
        .unwrap();
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((est.p_hat - exact).abs() < 4.0 * se, "{lattice:?}: exact {exact} estimate {}", est.p_hat);
    }
}
