//! Rainbow-cycle search in properly edge-colored multigraphs, rainbow
//! even-cover search in colored r-uniform matchings, and the direct-sum
//! subset-graph transformation with cycle lifting.
//!
//! Searches are deterministic: colors ascending, vertices ascending, ties by
//! edge insertion order. Budgets are node expansions, not wall time.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instance::Hyperedge;

pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;
pub const DEFAULT_DIRECT_SUM_CAP: usize = 1_000_000;

/// A multigraph on `[n]` with an integer color label per edge. Parallel
/// edges are allowed; self-loops are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    n: usize,
    edges: Vec<(u32, u32, u32)>, // (u, v, color)
}

impl ColoredGraph {
    pub fn new(n: usize, edges: Vec<(u32, u32, u32)>) -> Result<Self, Error> {
        for &(u, v, _) in &edges {
            if u == v {
                return Err(Error::Structure(format!("self-loop at vertex {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::Structure(format!(
                    "edge ({u},{v}) out of vertex range [0, {n})"
                )));
            }
        }
        Ok(ColoredGraph { n, edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32, u32)] {
        &self.edges
    }

    /// True iff every color class is a matching (no two incident edges share
    /// a color; two copies of the same edge in one color also violate this).
    pub fn check_proper(&self) -> bool {
        let mut by_color: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
        for &(u, v, c) in &self.edges {
            by_color.entry(c).or_default().push((u, v));
        }
        let mut stamp = vec![u32::MAX; self.n];
        let mut version = 0u32;
        for class in by_color.values() {
            version = version.wrapping_add(1);
            for &(u, v) in class {
                if stamp[u as usize] == version || stamp[v as usize] == version {
                    return false;
                }
                stamp[u as usize] = version;
                stamp[v as usize] = version;
            }
        }
        true
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(u32, u32, u32)>,
}

pub fn graph_to_json(g: &ColoredGraph) -> String {
    serde_json::to_string(&GraphFile {
        n: g.n,
        edges: g.edges.clone(),
    })
    .expect("graph serialization cannot fail")
}

pub fn graph_from_json(json: &str) -> Result<ColoredGraph, Error> {
    let f: GraphFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    ColoredGraph::new(f.n, f.edges)
}

pub fn write_graph(g: &ColoredGraph, path: &Path) -> Result<(), Error> {
    std::fs::write(path, graph_to_json(g))?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<ColoredGraph, Error> {
    let json = std::fs::read_to_string(path)?;
    graph_from_json(&json)
}

/// A closed walk whose edges all carry distinct colors, stored oriented:
/// `edges[t] = (from, to, color)` with each `to` equal to the next `from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RainbowCycle {
    pub edges: Vec<(u32, u32, u32)>,
}

impl RainbowCycle {
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.edges.len()
    }
}

/// Outcome of a budgeted exhaustive search. `AbsentProven` is only produced
/// when the search space was exhausted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    AbsentProven,
    BudgetExhausted { nodes_expanded: u64 },
}

impl<T> SearchOutcome<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Checks: closed walk, every edge present in `g`, colors pairwise distinct,
/// and the symmetric difference of the edge 2-sets is empty.
pub fn verify_rainbow_cycle(g: &ColoredGraph, cycle: &RainbowCycle) -> bool {
    let m = cycle.edges.len();
    if m < 2 {
        return false;
    }
    for t in 0..m {
        let (_, to, _) = cycle.edges[t];
        let (next_from, _, _) = cycle.edges[(t + 1) % m];
        if to != next_from {
            return false;
        }
    }
    let mut colors: Vec<u32> = cycle.edges.iter().map(|e| e.2).collect();
    colors.sort_unstable();
    colors.dedup();
    if colors.len() != m {
        return false;
    }
    for &(from, to, c) in &cycle.edges {
        let present = g
            .edges
            .iter()
            .any(|&(u, v, gc)| gc == c && ((u, v) == (from, to) || (u, v) == (to, from)));
        if !present {
            return false;
        }
    }
    let mut parity: BTreeMap<u32, usize> = BTreeMap::new();
    for &(from, to, _) in &cycle.edges {
        *parity.entry(from).or_insert(0) += 1;
        *parity.entry(to).or_insert(0) += 1;
    }
    parity.values().all(|&cnt| cnt % 2 == 0)
}

struct CycleSearch<'a> {
    adj: Vec<Vec<(u32, u32, u32)>>, // per vertex: (dense color, neighbor, edge idx), sorted
    n: usize,
    n_colors: usize,
    budget: u64,
    expanded: u64,
    graph: &'a ColoredGraph,
}

enum Walk {
    Done(RainbowCycle),
    Exhausted,
    OutOfBudget,
}

impl<'a> CycleSearch<'a> {
    fn new(g: &'a ColoredGraph) -> Self {
        let mut palette: Vec<u32> = g.edges.iter().map(|e| e.2).collect();
        palette.sort_unstable();
        palette.dedup();
        let dense = |c: u32| palette.binary_search(&c).unwrap() as u32;
        let mut adj: Vec<Vec<(u32, u32, u32)>> = vec![Vec::new(); g.n];
        for (idx, &(u, v, c)) in g.edges.iter().enumerate() {
            adj[u as usize].push((dense(c), v, idx as u32));
            adj[v as usize].push((dense(c), u, idx as u32));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        CycleSearch {
            adj,
            n: g.n,
            n_colors: palette.len(),
            budget: 0,
            expanded: 0,
            graph: g,
        }
    }

    fn spend(&mut self) -> bool {
        self.expanded += 1;
        self.expanded <= self.budget
    }

    /// Length-2 cycles: parallel edges with distinct colors.
    fn parallel_scan(&mut self) -> Walk {
        let g = self.graph;
        let mut order: Vec<usize> = (0..g.edges.len()).collect();
        let key = |i: usize| {
            let (u, v, _) = g.edges[i];
            (u.min(v), u.max(v))
        };
        order.sort_by_key(|&i| key(i));
        let mut start = 0;
        while start < order.len() {
            let mut end = start;
            while end < order.len() && key(order[end]) == key(order[start]) {
                end += 1;
            }
            let anchor = g.edges[order[start]];
            for &i in &order[start + 1..end] {
                if !self.spend() {
                    return Walk::OutOfBudget;
                }
                let e = g.edges[i];
                if e.2 != anchor.2 {
                    let (u, v) = (anchor.0, anchor.1);
                    return Walk::Done(RainbowCycle {
                        edges: vec![(u, v, anchor.2), (v, u, e.2)],
                    });
                }
            }
            if !self.spend() {
                return Walk::OutOfBudget;
            }
            start = end;
        }
        Walk::Exhausted
    }

    /// Simple rainbow cycles of exactly `depth >= 3` edges through `root`,
    /// with every non-root vertex greater than root and the orientation
    /// fixed by `path[1] < path[depth-1]`.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        root: u32,
        current: u32,
        edges_used: usize,
        depth: usize,
        first_hop: u32,
        on_path: &mut Vec<bool>,
        used_colors: &mut Vec<bool>,
        path: &mut Vec<(u32, u32, u32)>,
    ) -> Option<Walk> {
        let closing = edges_used == depth - 1;
        for ai in 0..self.adj[current as usize].len() {
            let (dc, w, eidx) = self.adj[current as usize][ai];
            if !self.spend() {
                return Some(Walk::OutOfBudget);
            }
            if used_colors[dc as usize] {
                continue;
            }
            let color = self.graph.edges[eidx as usize].2;
            if closing {
                if w == root && first_hop < current {
                    let mut edges = path.clone();
                    edges.push((current, root, color));
                    return Some(Walk::Done(RainbowCycle { edges }));
                }
                continue;
            }
            if w <= root || on_path[w as usize] {
                continue;
            }
            on_path[w as usize] = true;
            used_colors[dc as usize] = true;
            path.push((current, w, color));
            let hop = if edges_used == 0 { w } else { first_hop };
            let res = self.dfs(
                root,
                w,
                edges_used + 1,
                depth,
                hop,
                on_path,
                used_colors,
                path,
            );
            path.pop();
            used_colors[dc as usize] = false;
            on_path[w as usize] = false;
            if res.is_some() {
                return res;
            }
        }
        None
    }
}

/// Finds a rainbow cycle in a properly edge-colored multigraph, shortest
/// first: a scan for parallel edges of distinct colors, then iterative
/// deepening over simple paths carrying a used-color set, rooted at each
/// vertex with the root pinned to the smallest cycle vertex.
pub fn find_rainbow_cycle(
    g: &ColoredGraph,
    budget: u64,
) -> Result<SearchOutcome<RainbowCycle>, Error> {
    Ok(find_rainbow_cycle_counted(g, budget)?.0)
}

/// As [`find_rainbow_cycle`], also reporting expansions spent (for callers
/// metering several searches against one budget).
pub fn find_rainbow_cycle_counted(
    g: &ColoredGraph,
    budget: u64,
) -> Result<(SearchOutcome<RainbowCycle>, u64), Error> {
    if !g.check_proper() {
        return Err(Error::Precondition(
            "graph is not properly edge-colored".into(),
        ));
    }
    let mut search = CycleSearch::new(g);
    search.budget = budget;
    match search.parallel_scan() {
        Walk::Done(c) => {
            debug_assert!(verify_rainbow_cycle(g, &c));
            return Ok((SearchOutcome::Found(c), search.expanded));
        }
        Walk::OutOfBudget => {
            return Ok((
                SearchOutcome::BudgetExhausted {
                    nodes_expanded: search.expanded,
                },
                search.expanded,
            ))
        }
        Walk::Exhausted => {}
    }
    let max_depth = search.n.min(search.n_colors);
    let mut on_path = vec![false; search.n];
    let mut used_colors = vec![false; search.n_colors];
    for depth in 3..=max_depth {
        for root in 0..search.n as u32 {
            on_path[root as usize] = true;
            let mut path = Vec::with_capacity(depth);
            let res = search.dfs(
                root,
                root,
                0,
                depth,
                root,
                &mut on_path,
                &mut used_colors,
                &mut path,
            );
            on_path[root as usize] = false;
            match res {
                Some(Walk::Done(c)) => {
                    debug_assert!(verify_rainbow_cycle(g, &c));
                    return Ok((SearchOutcome::Found(c), search.expanded));
                }
                Some(Walk::OutOfBudget) => {
                    return Ok((
                        SearchOutcome::BudgetExhausted {
                            nodes_expanded: search.expanded,
                        },
                        search.expanded,
                    ))
                }
                _ => {}
            }
        }
    }
    Ok((SearchOutcome::AbsentProven, search.expanded))
}

/// Colored r-uniform matchings: one edge family per color, every family a
/// matching. Input shape for even-cover search and the direct sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredMatchings {
    n: usize,
    r: usize,
    classes: Vec<(u32, Vec<Hyperedge>)>,
}

impl ColoredMatchings {
    pub fn new(n: usize, r: usize, mut classes: Vec<(u32, Vec<Hyperedge>)>) -> Result<Self, Error> {
        classes.sort_by_key(|(c, _)| *c);
        if classes.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Structure("two classes with the same color".into()));
        }
        let mut seen = vec![false; n];
        for (color, edges) in classes.iter_mut() {
            edges.sort_unstable();
            seen.fill(false);
            for e in edges.iter() {
                if e.len() != r {
                    return Err(Error::Precondition(format!(
                        "color {color}: edge {e} is not {r}-uniform"
                    )));
                }
                for &v in e.indices() {
                    if v as usize >= n {
                        return Err(Error::Structure(format!(
                            "color {color}: index {v} out of range [0, {n})"
                        )));
                    }
                    if seen[v as usize] {
                        return Err(Error::Precondition(format!(
                            "color {color} is not a matching: index {v} repeats"
                        )));
                    }
                    seen[v as usize] = true;
                }
            }
        }
        Ok(ColoredMatchings { n, r, classes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn classes(&self) -> &[(u32, Vec<Hyperedge>)] {
        &self.classes
    }

    pub fn contains(&self, color: u32, edge: &Hyperedge) -> bool {
        self.classes
            .iter()
            .find(|(c, _)| *c == color)
            .map(|(_, edges)| edges.binary_search(edge).is_ok())
            .unwrap_or(false)
    }
}

/// A nonempty hyperedge collection, at most one edge per color, whose
/// symmetric difference is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RainbowEvenCover {
    pub edges: Vec<(u32, Hyperedge)>,
}

pub fn verify_rainbow_even_cover(cover: &RainbowEvenCover) -> bool {
    if cover.edges.is_empty() {
        return false;
    }
    let mut colors: Vec<u32> = cover.edges.iter().map(|(c, _)| *c).collect();
    colors.sort_unstable();
    colors.dedup();
    if colors.len() != cover.edges.len() {
        return false;
    }
    let mut acc = Hyperedge::new(vec![]).expect("empty edge");
    for (_, e) in &cover.edges {
        acc = acc.xor(e);
    }
    acc.is_empty()
}

struct CoverSearch<'a> {
    cm: &'a ColoredMatchings,
    budget: u64,
    expanded: u64,
    words: Vec<u64>,
    xor_size: usize,
    chosen: Vec<(u32, Hyperedge)>,
}

enum Walk2 {
    Done(RainbowEvenCover),
    OutOfBudget,
}

impl CoverSearch<'_> {
    fn toggle(&mut self, e: &Hyperedge) {
        for &v in e.indices() {
            let (w, b) = (v as usize / 64, v as usize % 64);
            let was = (self.words[w] >> b) & 1 == 1;
            self.words[w] ^= 1u64 << b;
            if was {
                self.xor_size -= 1;
            } else {
                self.xor_size += 1;
            }
        }
    }

    fn dfs(&mut self, class_idx: usize) -> Option<Walk2> {
        if self.xor_size == 0 && !self.chosen.is_empty() {
            return Some(Walk2::Done(RainbowEvenCover {
                edges: self.chosen.clone(),
            }));
        }
        if class_idx == self.cm.classes.len() {
            return None;
        }
        // Remaining classes can each change at most r positions.
        let capacity = (self.cm.classes.len() - class_idx) * self.cm.r;
        if self.xor_size > capacity {
            return None;
        }
        let color = self.cm.classes[class_idx].0;
        let n_edges = self.cm.classes[class_idx].1.len();
        for i in 0..n_edges {
            self.expanded += 1;
            if self.expanded > self.budget {
                return Some(Walk2::OutOfBudget);
            }
            let e = self.cm.classes[class_idx].1[i].clone();
            self.toggle(&e);
            self.chosen.push((color, e.clone()));
            let res = self.dfs(class_idx + 1);
            self.chosen.pop();
            self.toggle(&e);
            if res.is_some() {
                return res;
            }
        }
        self.expanded += 1;
        if self.expanded > self.budget {
            return Some(Walk2::OutOfBudget);
        }
        self.dfs(class_idx + 1)
    }
}

/// Exhaustive DFS over per-color edge choices (colors ascending) for a
/// nonempty collection with empty symmetric difference. For r = 2 this
/// agrees with [`find_rainbow_cycle`] on the union graph.
pub fn find_rainbow_even_cover(
    cm: &ColoredMatchings,
    budget: u64,
) -> Result<SearchOutcome<RainbowEvenCover>, Error> {
    Ok(find_rainbow_even_cover_counted(cm, budget)?.0)
}

pub fn find_rainbow_even_cover_counted(
    cm: &ColoredMatchings,
    budget: u64,
) -> Result<(SearchOutcome<RainbowEvenCover>, u64), Error> {
    let mut search = CoverSearch {
        cm,
        budget,
        expanded: 0,
        words: vec![0u64; cm.n.div_ceil(64)],
        xor_size: 0,
        chosen: Vec::new(),
    };
    match search.dfs(0) {
        Some(Walk2::Done(cover)) => {
            debug_assert!(verify_rainbow_even_cover(&cover));
            Ok((SearchOutcome::Found(cover), search.expanded))
        }
        Some(Walk2::OutOfBudget) => Ok((
            SearchOutcome::BudgetExhausted {
                nodes_expanded: search.expanded,
            },
            search.expanded,
        )),
        None => Ok((SearchOutcome::AbsentProven, search.expanded)),
    }
}

/// The direct-sum graph over ell-subsets of [n], after deleting every edge
/// incident to another edge of its own color, plus provenance back to the
/// source hyperedges. Only subsets actually touched by an edge are
/// materialized; `cap` bounds both materialized vertices and raw edges.
#[derive(Debug, Clone)]
pub struct DirectSumGraph {
    pub graph: ColoredGraph,
    /// The ell-subset behind each graph vertex.
    pub vertex_subsets: Vec<Hyperedge>,
    /// Per surviving edge (parallel to `graph.edges()`): source color and
    /// hyperedge, with `E = A xor B` for the edge's endpoints.
    pub edge_sources: Vec<(u32, Hyperedge)>,
}

fn for_each_combination<F: FnMut(&[u32])>(pool: &[u32], t: usize, f: &mut F) {
    fn rec<F: FnMut(&[u32])>(pool: &[u32], t: usize, start: usize, cur: &mut Vec<u32>, f: &mut F) {
        if cur.len() == t {
            f(cur);
            return;
        }
        let need = t - cur.len();
        for i in start..=pool.len().saturating_sub(need) {
            cur.push(pool[i]);
            rec(pool, t, i + 1, cur, f);
            cur.pop();
        }
    }
    if t > pool.len() {
        return;
    }
    if t == 0 {
        f(&[]);
        return;
    }
    rec(pool, t, 0, &mut Vec::with_capacity(t), f);
}

pub fn direct_sum_graph(
    cm: &ColoredMatchings,
    ell: usize,
    cap: usize,
) -> Result<DirectSumGraph, Error> {
    if cm.r % 2 != 0 {
        return Err(Error::Precondition(format!(
            "direct sum needs even r, got {}",
            cm.r
        )));
    }
    if ell < cm.r / 2 {
        return Err(Error::Precondition(format!(
            "ell = {ell} below r/2 = {}",
            cm.r / 2
        )));
    }
    let half = cm.r / 2;
    let mut ids: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut subsets: Vec<Hyperedge> = Vec::new();
    let mut raw_edges: Vec<(u32, u32, u32)> = Vec::new();
    let mut raw_sources: Vec<(u32, Hyperedge)> = Vec::new();

    let intern = |set: Vec<u32>,
                      subsets: &mut Vec<Hyperedge>,
                      ids: &mut BTreeMap<Vec<u32>, u32>|
     -> Result<u32, Error> {
        if let Some(&id) = ids.get(&set) {
            return Ok(id);
        }
        if subsets.len() >= cap {
            return Err(Error::SizeCap(format!(
                "more than {cap} subset vertices materialized"
            )));
        }
        let id = subsets.len() as u32;
        subsets.push(Hyperedge::new(set.clone()).expect("sorted distinct subset"));
        ids.insert(set, id);
        Ok(id)
    };

    for (color, edges) in &cm.classes {
        for e in edges {
            // Split E into P and E \ P with |P| = r/2; pinning the least
            // element of E into P enumerates each unordered pair once.
            let e_idx = e.indices();
            let mut inside = vec![false; cm.n];
            for &v in e_idx {
                inside[v as usize] = true;
            }
            let complement: Vec<u32> =
                (0..cm.n as u32).filter(|&v| !inside[v as usize]).collect();
            let mut fail: Option<Error> = None;
            for_each_combination(&e_idx[1..], half - 1, &mut |p_tail| {
                if fail.is_some() {
                    return;
                }
                let mut p = Vec::with_capacity(half);
                p.push(e_idx[0]);
                p.extend_from_slice(p_tail);
                let q: Vec<u32> = e_idx.iter().copied().filter(|v| !p.contains(v)).collect();
                for_each_combination(&complement, ell - half, &mut |s| {
                    if fail.is_some() {
                        return;
                    }
                    let mut a: Vec<u32> = s.iter().copied().chain(p.iter().copied()).collect();
                    let mut b: Vec<u32> = s.iter().copied().chain(q.iter().copied()).collect();
                    a.sort_unstable();
                    b.sort_unstable();
                    let ia = match intern(a, &mut subsets, &mut ids) {
                        Ok(i) => i,
                        Err(e) => {
                            fail = Some(e);
                            return;
                        }
                    };
                    let ib = match intern(b, &mut subsets, &mut ids) {
                        Ok(i) => i,
                        Err(e) => {
                            fail = Some(e);
                            return;
                        }
                    };
                    if raw_edges.len() >= cap {
                        fail = Some(Error::SizeCap(format!(
                            "more than {cap} subset edges materialized"
                        )));
                        return;
                    }
                    raw_edges.push((ia, ib, *color));
                    raw_sources.push((*color, e.clone()));
                });
            });
            if let Some(err) = fail {
                return Err(err);
            }
        }
    }

    // Delete every edge incident to another edge of the same color: count
    // endpoint occurrences per color, keep edges whose endpoints are unique.
    let mut occurrences: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for &(a, b, c) in &raw_edges {
        *occurrences.entry((c, a)).or_insert(0) += 1;
        *occurrences.entry((c, b)).or_insert(0) += 1;
    }
    let mut edges = Vec::new();
    let mut sources = Vec::new();
    for (i, &(a, b, c)) in raw_edges.iter().enumerate() {
        if occurrences[&(c, a)] == 1 && occurrences[&(c, b)] == 1 {
            edges.push((a, b, c));
            sources.push(raw_sources[i].clone());
        }
    }
    let graph = ColoredGraph::new(subsets.len(), edges)?;
    debug_assert!(graph.check_proper());
    Ok(DirectSumGraph {
        graph,
        vertex_subsets: subsets,
        edge_sources: sources,
    })
}

/// Pulls a rainbow cycle found in a direct-sum graph back to the hyperedges
/// behind its edges and verifies the even-cover predicate.
pub fn lift_cycle_to_cover(
    cycle: &RainbowCycle,
    dsg: &DirectSumGraph,
) -> Result<RainbowEvenCover, Error> {
    let mut edges = Vec::with_capacity(cycle.len());
    for &(from, to, color) in &cycle.edges {
        let pos = dsg
            .graph
            .edges()
            .iter()
            .position(|&(u, v, c)| c == color && ((u, v) == (from, to) || (u, v) == (to, from)))
            .ok_or_else(|| {
                Error::Internal(format!(
                    "cycle edge ({from},{to},{color}) is not in the direct-sum graph"
                ))
            })?;
        let (src_color, src_edge) = dsg.edge_sources[pos].clone();
        let xor = dsg.vertex_subsets[from as usize].xor(&dsg.vertex_subsets[to as usize]);
        if xor != src_edge || src_color != color {
            return Err(Error::Internal(format!(
                "provenance mismatch on edge ({from},{to},{color}): A xor B = {xor}, source {src_edge}"
            )));
        }
        edges.push((src_color, src_edge));
    }
    let cover = RainbowEvenCover { edges };
    if !verify_rainbow_even_cover(&cover) {
        return Err(Error::Internal(
            "lifted collection fails the even-cover predicate".into(),
        ));
    }
    Ok(cover)
}
