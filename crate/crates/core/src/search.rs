//! Right-hand-first depth-first search.
//!
//! At every site the search tries the outgoing steps counterclockwise,
//! starting just after the step it arrived by, so the first path found hugs
//! whatever lies on its right. Started from the clockwise-most seed, this
//! yields the clockwise-most (lowest) crossing of a topological rectangle.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{Color, Site, OCTANTS};
use crate::sampling::SiteField;

/// A seed site and the octant pointing back to where the walk "came from".
pub(crate) type Seed = (Site, u8);

/// Clockwise-most path of `color` from one of `seeds` (tried in order) to a
/// site satisfying `is_target`. Sites after the seed must satisfy `allowed`;
/// the path stops at its first target site.
pub(crate) fn rightmost_path<F: SiteField>(
    field: &F,
    color: Color,
    seeds: &[Seed],
    allowed: impl Fn(Site) -> bool,
    is_target: impl Fn(Site) -> bool,
) -> Option<Vec<Site>> {
    let bounds = field.bounds();
    let lattice = field.lattice();
    // one bit per site: arm searches on large lazy boxes touch few sites
    let mut visited = vec![0u64; bounds.len().div_ceil(64)];
    let mut mark = |i: usize| {
        let (w, b) = (i >> 6, 1u64 << (i & 63));
        let fresh = visited[w] & b == 0;
        visited[w] |= b;
        fresh
    };
    let mut stack: Vec<(Site, u8, u8)> = Vec::new();
    for &(start, back) in seeds {
        if !bounds.contains(start) || !field.has_color(start, color) {
            continue;
        }
        if !mark(bounds.index(start)) {
            continue;
        }
        if is_target(start) {
            return Some(vec![start]);
        }
        stack.clear();
        stack.push((start, back, 0));
        while let Some(top) = stack.last_mut() {
            let (v, back, tried) = *top;
            if tried == 7 {
                stack.pop();
                continue;
            }
            top.2 += 1;
            let o = (back + tried + 1) % 8;
            if !lattice.is_step(color, o) {
                continue;
            }
            let (dx, dy) = OCTANTS[o as usize];
            let w = v.offset(dx, dy);
            if !bounds.contains(w) {
                continue;
            }
            if !allowed(w) || !field.has_color(w, color) || !mark(bounds.index(w)) {
                continue;
            }
            if is_target(w) {
                let mut path: Vec<Site> = stack.iter().map(|f| f.0).collect();
                path.push(w);
                return Some(path);
            }
            stack.push((w, (o + 4) % 8, 0));
        }
    }
    None
}
