//! Clusters, crossings, terminal cut vertices and disjoint arms.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{BoxRegion, Color, Edge, Site, OCTANTS};
use crate::sampling::SiteField;
use crate::{Error, Result};

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

const NO_LABEL: u32 = u32::MAX;

/// Cluster ids for the sites of one color inside a region; ids are dense,
/// numbered in order of each cluster's first site in row-major order.
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    color: Color,
    region: BoxRegion,
    labels: Vec<u32>,
    count: u32,
}

impl ClusterLabeling {
    pub fn color(&self) -> Color {
        self.color
    }

    pub fn region(&self) -> BoxRegion {
        self.region
    }

    pub fn label(&self, s: Site) -> Option<u32> {
        if !self.region.contains(s) {
            return None;
        }
        match self.labels[self.region.index(s)] {
            NO_LABEL => None,
            l => Some(l),
        }
    }

    pub fn cluster_count(&self) -> u32 {
        self.count
    }

    pub fn same_cluster(&self, a: Site, b: Site) -> bool {
        matches!((self.label(a), self.label(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn cluster_sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0; self.count as usize];
        for &l in &self.labels {
            if l != NO_LABEL {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    /// Labels of the clusters that meet the given edge of the region.
    pub fn labels_on_edge(&self, edge: Edge) -> Vec<bool> {
        let mut hit = vec![false; self.count as usize];
        for s in crate::lattice::boundary_sites(&self.region, edge) {
            if let Some(l) = self.label(s) {
                hit[l as usize] = true;
            }
        }
        hit
    }
}

pub fn label_clusters<F: SiteField>(field: &F, color: Color) -> ClusterLabeling {
    label_clusters_in(field, color, field.bounds())
}

/// Labels restricted to `region`, which must lie inside the field's bounds.
pub fn label_clusters_in<F: SiteField>(field: &F, color: Color, region: BoxRegion) -> ClusterLabeling {
    let n = region.len();
    let mut sets = DisjointSet::new(n);
    let lattice = field.lattice();
    // Each undirected edge once: only the steps in the upper half-plane plus east.
    let forward: Vec<(i32, i32)> = lattice
        .steps(color)
        .iter()
        .map(|&o| OCTANTS[o as usize])
        .filter(|&(dx, dy)| dy > 0 || (dy == 0 && dx > 0))
        .collect();
    let member: Vec<bool> = region.sites().map(|s| field.has_color(s, color)).collect();
    for i in 0..n {
        if !member[i] {
            continue;
        }
        let s = region.site_at(i);
        for &(dx, dy) in &forward {
            let t = s.offset(dx, dy);
            if region.contains(t) {
                let j = region.index(t);
                if member[j] {
                    sets.union(i as u32, j as u32);
                }
            }
        }
    }
    let mut labels = vec![NO_LABEL; n];
    let mut root_label = vec![NO_LABEL; n];
    let mut count = 0;
    for i in 0..n {
        if member[i] {
            let r = sets.find(i as u32) as usize;
            if root_label[r] == NO_LABEL {
                root_label[r] = count;
                count += 1;
            }
            labels[i] = root_label[r];
        }
    }
    ClusterLabeling { color, region, labels, count }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Left side to right side.
    Horizontal,
    /// Bottom side to top side.
    Vertical,
}

impl Direction {
    pub fn sides(self) -> (Edge, Edge) {
        match self {
            Direction::Horizontal => (Edge::Left, Edge::Right),
            Direction::Vertical => (Edge::Bottom, Edge::Top),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingReport {
    pub exists: bool,
    /// Smallest cluster id (in the region's labeling) joining both sides.
    pub witness_cluster: Option<u32>,
}

/// Whether a path of `color` inside `region` joins its two opposite sides.
pub fn has_crossing<F: SiteField>(field: &F, color: Color, direction: Direction, region: BoxRegion) -> CrossingReport {
    let labels = label_clusters_in(field, color, region);
    let (a, b) = direction.sides();
    let (on_a, on_b) = (labels.labels_on_edge(a), labels.labels_on_edge(b));
    let witness = (0..labels.cluster_count()).find(|&l| on_a[l as usize] && on_b[l as usize]);
    CrossingReport { exists: witness.is_some(), witness_cluster: witness }
}

/// Breadth-first reach over `color` sites of the field's bounds that satisfy
/// `within`, started from the seeds that have the color and satisfy `within`.
/// The result is indexed by `field.bounds().index`.
pub fn reach<F: SiteField>(field: &F, color: Color, seeds: &[Site], within: impl Fn(Site) -> bool) -> Vec<bool> {
    let bounds = field.bounds();
    let steps = field.lattice().steps(color);
    let mut seen = vec![false; bounds.len()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if bounds.contains(s) && within(s) && field.has_color(s, color) {
            let i = bounds.index(s);
            if !seen[i] {
                seen[i] = true;
                queue.push_back(s);
            }
        }
    }
    while let Some(s) = queue.pop_front() {
        for &o in steps {
            let (dx, dy) = OCTANTS[o as usize];
            let t = s.offset(dx, dy);
            if bounds.contains(t) && within(t) && field.has_color(t, color) {
                let j = bounds.index(t);
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    seen
}

/// Sites of `color` whose removal disconnects `terminal_a` from `terminal_b`
/// in the color's graph on the field's bounds, sorted.
///
/// Two virtual vertices are attached to the terminal sets and the cut
/// vertices on the tree path between them are read off one iterative
/// Tarjan depth-first search.
pub fn terminal_cut_vertices<F: SiteField>(
    field: &F,
    color: Color,
    terminal_a: &[Site],
    terminal_b: &[Site],
) -> Result<Vec<Site>> {
    let mut cuts = TerminalCuts::new(field, color, terminal_a, terminal_b).run().ok_or(Error::NoSpanningCluster)?;
    cuts.sort_unstable();
    Ok(cuts)
}

struct TerminalCuts<'a, F> {
    field: &'a F,
    color: Color,
    bounds: BoxRegion,
    steps: &'static [u8],
    a_sites: Vec<Site>,
    b_sites: Vec<Site>,
    in_a: Vec<bool>,
    in_b: Vec<bool>,
}

impl<'a, F: SiteField> TerminalCuts<'a, F> {
    fn new(field: &'a F, color: Color, terminal_a: &[Site], terminal_b: &[Site]) -> Self {
        let bounds = field.bounds();
        let keep = |s: &&Site| bounds.contains(**s) && field.has_color(**s, color);
        let a_sites: Vec<Site> = terminal_a.iter().filter(keep).copied().collect();
        let b_sites: Vec<Site> = terminal_b.iter().filter(keep).copied().collect();
        let mut in_a = vec![false; bounds.len()];
        let mut in_b = vec![false; bounds.len()];
        for s in &a_sites {
            in_a[bounds.index(*s)] = true;
        }
        for s in &b_sites {
            in_b[bounds.index(*s)] = true;
        }
        TerminalCuts { field, color, bounds, steps: field.lattice().steps(color), a_sites, b_sites, in_a, in_b }
    }

    /// Next neighbour of node `v` at or after `cursor`; advances the cursor.
    #[inline]
    fn next_neighbor(&self, v: u32, cursor: &mut u32) -> Option<u32> {
        let n = self.bounds.len() as u32;
        let (node_a, node_b) = (n, n + 1);
        if v == node_a || v == node_b {
            let list = if v == node_a { &self.a_sites } else { &self.b_sites };
            let s = list.get(*cursor as usize)?;
            *cursor += 1;
            return Some(self.bounds.index(*s) as u32);
        }
        let s = self.bounds.site_at(v as usize);
        let k = self.steps.len() as u32;
        while *cursor < k {
            let (dx, dy) = OCTANTS[self.steps[*cursor as usize] as usize];
            *cursor += 1;
            let t = s.offset(dx, dy);
            if self.bounds.contains(t) && self.field.has_color(t, self.color) {
                return Some(self.bounds.index(t) as u32);
            }
        }
        if *cursor == k {
            *cursor += 1;
            if self.in_a[v as usize] {
                return Some(node_a);
            }
        }
        if *cursor == k + 1 {
            *cursor += 1;
            if self.in_b[v as usize] {
                return Some(node_b);
            }
        }
        None
    }

    fn run(&self) -> Option<Vec<Site>> {
        let n = self.bounds.len();
        let (node_a, node_b) = (n as u32, n as u32 + 1);
        const NONE: u32 = u32::MAX;
        let mut disc = vec![0u32; n + 2];
        let mut low = vec![0u32; n + 2];
        let mut parent = vec![NONE; n + 2];
        let mut stack: Vec<(u32, u32)> = Vec::new();
        let mut time = 1;
        disc[node_a as usize] = time;
        low[node_a as usize] = time;
        stack.push((node_a, 0));
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(w) = self.next_neighbor(v, &mut top.1) {
                let wi = w as usize;
                if disc[wi] == 0 {
                    time += 1;
                    disc[wi] = time;
                    low[wi] = time;
                    parent[wi] = v;
                    stack.push((w, 0));
                } else if w != parent[v as usize] && disc[wi] < low[v as usize] {
                    low[v as usize] = disc[wi];
                }
            } else {
                stack.pop();
                let p = parent[v as usize];
                if p != NONE && low[v as usize] < low[p as usize] {
                    low[p as usize] = low[v as usize];
                }
            }
        }
        if disc[node_b as usize] == 0 {
            return None;
        }
        let mut cuts = Vec::new();
        let mut child = node_b;
        let mut v = parent[node_b as usize];
        while v != node_a {
            if low[child as usize] >= disc[v as usize] {
                cuts.push(self.bounds.site_at(v as usize));
            }
            child = v;
            v = parent[v as usize];
        }
        Some(cuts)
    }
}

/// Whether two paths of `color`, vertex-disjoint except at `s`, lead from `s`
/// to `target_a` and to `target_b`. Decided by a unit-capacity max flow with
/// split vertices; `s` lying in a target counts as a path of length zero.
pub fn two_disjoint_arms<F: SiteField>(
    field: &F,
    s: Site,
    color: Color,
    target_a: &[Site],
    target_b: &[Site],
) -> bool {
    let bounds = field.bounds();
    if !bounds.contains(s) || !field.has_color(s, color) {
        return false;
    }
    let n = bounds.len();
    // Nodes: 2i = in(i), 2i+1 = out(i); then hub_a, hub_b, sink.
    let (hub_a, hub_b, sink) = (2 * n, 2 * n + 1, 2 * n + 2);
    let mut g = FlowGraph::new(2 * n + 3);
    let steps = field.lattice().steps(color);
    for i in 0..n {
        let u = bounds.site_at(i);
        if !field.has_color(u, color) {
            continue;
        }
        g.add_edge(2 * i, 2 * i + 1, 1);
        for &o in steps {
            let (dx, dy) = OCTANTS[o as usize];
            let t = u.offset(dx, dy);
            if bounds.contains(t) && field.has_color(t, color) {
                g.add_edge(2 * i + 1, 2 * bounds.index(t), 1);
            }
        }
    }
    for (targets, hub) in [(target_a, hub_a), (target_b, hub_b)] {
        for &t in targets {
            if bounds.contains(t) && field.has_color(t, color) {
                g.add_edge(2 * bounds.index(t) + 1, hub, 1);
            }
        }
        g.add_edge(hub, sink, 1);
    }
    g.max_flow(2 * bounds.index(s) + 1, sink, 2) == 2
}

struct FlowEdge {
    to: usize,
    cap: u32,
}

struct FlowGraph {
    edges: Vec<FlowEdge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph { edges: Vec::new(), adj: (0..n).map(|_| Vec::new()).collect() }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u32) {
        self.adj[from].push(self.edges.len());
        self.edges.push(FlowEdge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(FlowEdge { to: from, cap: 0 });
    }

    fn max_flow(&mut self, source: usize, sink: usize, limit: u32) -> u32 {
        let mut flow = 0;
        while flow < limit {
            let mut via = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([source]);
            let mut found = false;
            while let Some(v) = queue.pop_front() {
                if v == sink {
                    found = true;
                    break;
                }
                for &e in &self.adj[v] {
                    let w = self.edges[e].to;
                    if self.edges[e].cap > 0 && w != source && via[w] == usize::MAX {
                        via[w] = e;
                        queue.push_back(w);
                    }
                }
            }
            if !found {
                break;
            }
            let mut v = sink;
            while v != source {
                let e = via[v];
                self.edges[e].cap -= 1;
                self.edges[e ^ 1].cap += 1;
                v = self.edges[e ^ 1].to;
            }
            flow += 1;
        }
        flow
    }
}
