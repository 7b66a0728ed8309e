//! Data model and validation for combinatorial LCC / LDC instances, plus the
//! canonical JSON file format (format_version 1).
//!
//! Structural problems (out-of-range index, duplicate inside an edge, shape
//! mismatches) raise [`Error::Structure`] at construction or load time.
//! Semantic checks (linear identities, matching sizes, disjointness, rank)
//! are *reported* by the validators, never raised.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use serde::de::Visitor;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::fq::{check_prime_modulus, FqElement, FqVector};
use crate::gf2::{BitMatrix, BitRow};

pub type Delta = Ratio<u64>;

/// A sorted set of `r` distinct positions in `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperedge(Vec<u32>);

impl Hyperedge {
    /// Sorts the indices; duplicates are a structural error.
    pub fn new(mut indices: Vec<u32>) -> Result<Self, Error> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Structure(format!(
                "duplicate index inside hyperedge {:?}",
                indices
            )));
        }
        Ok(Hyperedge(indices))
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Symmetric difference.
    pub fn xor(&self, other: &Hyperedge) -> Hyperedge {
        let mut out = Vec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                out.push(b[j]);
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        Hyperedge(out)
    }
}

impl fmt::Display for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// The r-uniform edge family attached to one target index. Edges are stored
/// flat (r indices per edge) in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    owner: u32,
    r: usize,
    flat: Vec<u32>,
}

impl Matching {
    pub fn new(owner: u32, r: usize, edges: Vec<Hyperedge>) -> Result<Self, Error> {
        let mut edges = edges;
        for e in &edges {
            if e.len() != r {
                return Err(Error::Structure(format!(
                    "edge {} in matching for {} has {} indices, expected {}",
                    e,
                    owner,
                    e.len(),
                    r
                )));
            }
        }
        edges.sort_unstable();
        let mut flat = Vec::with_capacity(edges.len() * r);
        for e in &edges {
            flat.extend_from_slice(e.indices());
        }
        Ok(Matching { owner, r, flat })
    }

    /// Builds from flat storage (r indices per edge, each chunk strictly
    /// increasing) without a per-edge allocation; edges are sorted
    /// lexicographically.
    pub fn from_flat(owner: u32, r: usize, flat: Vec<u32>) -> Result<Self, Error> {
        if r == 0 {
            return Err(Error::Structure("edge arity r must be positive".into()));
        }
        if flat.len() % r != 0 {
            return Err(Error::Structure(format!(
                "flat edge storage of {} indices is not a multiple of r = {r}",
                flat.len()
            )));
        }
        for chunk in flat.chunks_exact(r) {
            if chunk.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structure(format!(
                    "edge {:?} is not strictly increasing",
                    chunk
                )));
            }
        }
        let n_edges = flat.len() / r;
        let mut perm: Vec<u32> = (0..n_edges as u32).collect();
        perm.sort_unstable_by(|&a, &b| {
            flat[a as usize * r..(a as usize + 1) * r]
                .cmp(&flat[b as usize * r..(b as usize + 1) * r])
        });
        let sorted = if perm.iter().enumerate().all(|(i, &p)| i == p as usize) {
            flat
        } else {
            let mut out = Vec::with_capacity(flat.len());
            for &p in &perm {
                out.extend_from_slice(&flat[p as usize * r..(p as usize + 1) * r]);
            }
            out
        };
        Ok(Matching {
            owner,
            r,
            flat: sorted,
        })
    }

    pub fn owner(&self) -> u32 {
        self.owner
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        if self.r == 0 {
            0
        } else {
            self.flat.len() / self.r
        }
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn edge(&self, idx: usize) -> &[u32] {
        &self.flat[idx * self.r..(idx + 1) * self.r]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.flat.chunks_exact(self.r)
    }
}

/// One named check plus its first counterexample, if any.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, counterexample: Option<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: counterexample.is_none(),
            counterexample,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.counterexample {
                None => writeln!(f, "  [ok]   {}", c.name)?,
                Some(ce) => writeln!(f, "  [FAIL] {}: {}", c.name, ce)?,
            }
        }
        Ok(())
    }
}

/// A combinatorial LCC instance over F2: generator rows `v_0..v_{n-1}` of
/// dimension `k`, plus for (a subset of) indices `i` an r-uniform matching
/// whose every edge `{a_1..a_r}` satisfies `v_i = v_{a_1} + ... + v_{a_r}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LccInstance {
    n: usize,
    k: usize,
    r: usize,
    rows: BitMatrix,
    matchings: BTreeMap<u32, Matching>,
    delta_declared: Delta,
}

fn check_delta(delta: Delta) -> Result<(), Error> {
    if delta <= Delta::from_integer(0) || delta > Delta::from_integer(1) {
        return Err(Error::Structure(format!("delta {delta} outside (0, 1]")));
    }
    Ok(())
}

impl LccInstance {
    pub fn new(
        n: usize,
        k: usize,
        r: usize,
        rows: BitMatrix,
        matchings: Vec<Matching>,
        delta_declared: Delta,
    ) -> Result<Self, Error> {
        if n == 0 || k == 0 {
            return Err(Error::Structure("n and k must be positive".into()));
        }
        if r < 2 {
            return Err(Error::Structure(format!("r = {r} must be at least 2")));
        }
        if rows.n() != n {
            return Err(Error::Structure(format!(
                "row count {} does not match n = {}",
                rows.n(),
                n
            )));
        }
        if rows.dim() != k {
            return Err(Error::Structure(format!(
                "row dimension {} does not match k = {}",
                rows.dim(),
                k
            )));
        }
        check_delta(delta_declared)?;
        let mut map = BTreeMap::new();
        for m in matchings {
            if m.owner() as usize >= n {
                return Err(Error::Structure(format!(
                    "matching owner {} out of range [0, {})",
                    m.owner(),
                    n
                )));
            }
            if m.r() != r {
                return Err(Error::Structure(format!(
                    "matching for {} is {}-uniform, instance has r = {}",
                    m.owner(),
                    m.r(),
                    r
                )));
            }
            if let Some(&bad) = m.flat.iter().find(|&&v| v as usize >= n) {
                return Err(Error::Structure(format!(
                    "index {} in matching for {} out of range [0, {})",
                    bad,
                    m.owner(),
                    n
                )));
            }
            if map.insert(m.owner(), m).is_some() {
                return Err(Error::Structure("two matchings with the same owner".into()));
            }
        }
        Ok(LccInstance {
            n,
            k,
            r,
            rows,
            matchings: map,
            delta_declared,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn rows(&self) -> &BitMatrix {
        &self.rows
    }

    pub fn delta_declared(&self) -> Delta {
        self.delta_declared
    }

    pub fn matchings(&self) -> &BTreeMap<u32, Matching> {
        &self.matchings
    }

    pub fn matching(&self, i: u32) -> Option<&Matching> {
        self.matchings.get(&i)
    }

    /// min over present matchings of |H_i| / n.
    pub fn effective_delta(&self) -> Result<Delta, Error> {
        effective_delta_of(self.n, self.matchings.values())
    }
}

fn effective_delta_of<'a, I: Iterator<Item = &'a Matching>>(
    n: usize,
    matchings: I,
) -> Result<Delta, Error> {
    matchings
        .map(|m| Delta::new(m.len() as u64, n as u64))
        .min()
        .ok_or_else(|| Error::Domain("instance has no matchings".into()))
}

/// Disjointness scan shared by both validators. Returns the first pair of
/// overlapping edges in a matching, if any.
fn find_overlap(m: &Matching, stamp: &mut [u32], version: u32) -> Option<(usize, usize, u32)> {
    for (idx, edge) in m.edges().enumerate() {
        for &v in edge {
            if stamp[v as usize] == version {
                // Locate the earlier edge containing v for the report.
                let prev = m
                    .edges()
                    .take(idx)
                    .position(|e| e.contains(&v))
                    .unwrap_or(idx);
                return Some((prev, idx, v));
            }
        }
        for &v in edge {
            stamp[v as usize] = version;
        }
    }
    None
}

/// Validates an LCC instance against Def-2.2-style checks.
///
/// `strict` additionally requires a matching for every index in `[0, n)`;
/// non-strict accepts partial instances.
pub fn validate_lcc(inst: &LccInstance, strict: bool) -> ValidationReport {
    let mut report = ValidationReport { checks: Vec::new() };
    let n = inst.n;

    // Each matching's edges are pairwise disjoint.
    let mut stamp = vec![u32::MAX; n];
    let mut version = 0u32;
    let mut overlap = None;
    for (&i, m) in &inst.matchings {
        version = version.wrapping_add(1);
        if let Some((e1, e2, v)) = find_overlap(m, &mut stamp, version) {
            overlap = Some(format!(
                "H_{i}: edges #{e1} and #{e2} share index {v}"
            ));
            break;
        }
    }
    report.push("matchings-disjoint", overlap);

    // No edge contains its own target (required for substitution soundness;
    // inputs violating it are flagged, not silently accepted).
    let owner_hit = inst.matchings.iter().find_map(|(&i, m)| {
        m.edges()
            .position(|e| e.contains(&i))
            .map(|idx| format!("H_{i}: edge #{idx} contains its owner {i}"))
    });
    report.push("owner-excluded", owner_hit);

    // |H_i| >= delta * n for every present matching.
    let min_size = inst.delta_declared * Delta::from_integer(n as u64);
    let small = inst.matchings.iter().find_map(|(&i, m)| {
        if Delta::from_integer(m.len() as u64) < min_size {
            Some(format!(
                "H_{i} has {} edges, below delta*n = {min_size}",
                m.len()
            ))
        } else {
            None
        }
    });
    report.push("matching-size", small);

    // v_i = sum of v_a over every edge.
    let mut acc = BitRow::zeros(inst.k);
    let mut identity_fail = None;
    'outer: for (&i, m) in &inst.matchings {
        for (idx, edge) in m.edges().enumerate() {
            acc.clear();
            for &a in edge {
                acc.xor_assign(inst.rows.row(a as usize));
            }
            if &acc != inst.rows.row(i as usize) {
                identity_fail = Some(format!(
                    "H_{i}: edge #{idx} {:?} does not sum to v_{i}",
                    edge
                ));
                break 'outer;
            }
        }
    }
    report.push("linear-identities", identity_fail);

    // Generator has full column rank.
    let rank = inst.rows.rank();
    report.push(
        "full-rank",
        (rank != inst.k).then(|| format!("rank(rows) = {rank}, expected k = {}", inst.k)),
    );

    if strict {
        let missing = (0..n as u32).find(|i| !inst.matchings.contains_key(i));
        report.push(
            "complete",
            missing.map(|i| format!("no matching for index {i}")),
        );
    }

    report
}

/// A linear LDC instance over F_q: rows `v_0..v_{n-1}` in F_q^k and, for
/// message indices `i < k`, matchings plus nonzero coefficients realizing
/// `e_i = sum_s alpha_s^E * v_{a_s}` for every edge E.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdcInstance {
    n: usize,
    k: usize,
    r: usize,
    q: u32,
    rows: Vec<FqVector>,
    matchings: BTreeMap<u32, Matching>,
    /// Per owner, one coefficient list per edge, parallel to the matching's
    /// lexicographic edge order; within an edge, parallel to sorted indices.
    coeffs: BTreeMap<u32, Vec<Vec<u32>>>,
    delta_declared: Delta,
}

impl LdcInstance {
    /// `edges_with_coeffs`: per owner, raw (indices, coefficients) pairs.
    /// Indices are sorted here with coefficients permuted in lockstep, and
    /// edges then sorted lexicographically.
    pub fn new(
        n: usize,
        k: usize,
        r: usize,
        q: u32,
        rows: Vec<FqVector>,
        edges_with_coeffs: Vec<(u32, Vec<(Vec<u32>, Vec<u32>)>)>,
        delta_declared: Delta,
    ) -> Result<Self, Error> {
        check_prime_modulus(q)?;
        if n == 0 || k == 0 {
            return Err(Error::Structure("n and k must be positive".into()));
        }
        if r < 2 {
            return Err(Error::Structure(format!("r = {r} must be at least 2")));
        }
        if rows.len() != n {
            return Err(Error::Structure(format!(
                "row count {} does not match n = {}",
                rows.len(),
                n
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.dim() != k || row.modulus() != q {
                return Err(Error::Structure(format!(
                    "row {i} has dim {} mod {}, expected {k} mod {q}",
                    row.dim(),
                    row.modulus()
                )));
            }
        }
        check_delta(delta_declared)?;
        let mut matchings = BTreeMap::new();
        let mut coeffs = BTreeMap::new();
        for (owner, raw_edges) in edges_with_coeffs {
            if owner as usize >= k {
                return Err(Error::Structure(format!(
                    "matching owner {owner} out of message range [0, {k})"
                )));
            }
            let mut pairs: Vec<(Hyperedge, Vec<u32>)> = Vec::with_capacity(raw_edges.len());
            for (indices, cs) in raw_edges {
                if cs.len() != indices.len() {
                    return Err(Error::Structure(format!(
                        "edge {:?} for message {owner} has {} coefficients",
                        indices,
                        cs.len()
                    )));
                }
                if let Some(&bad) = indices.iter().find(|&&v| v as usize >= n) {
                    return Err(Error::Structure(format!(
                        "index {bad} in matching for message {owner} out of range [0, {n})"
                    )));
                }
                if let Some(&c) = cs.iter().find(|&&c| c >= q) {
                    return Err(Error::Structure(format!(
                        "coefficient {c} not a residue mod {q}"
                    )));
                }
                let mut zipped: Vec<(u32, u32)> =
                    indices.into_iter().zip(cs.into_iter()).collect();
                zipped.sort_unstable_by_key(|&(v, _)| v);
                let (sorted_idx, sorted_cs): (Vec<u32>, Vec<u32>) = zipped.into_iter().unzip();
                let edge = Hyperedge::new(sorted_idx)?;
                pairs.push((edge, sorted_cs));
            }
            pairs.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            let edge_list: Vec<Hyperedge> = pairs.iter().map(|(e, _)| e.clone()).collect();
            let coeff_list: Vec<Vec<u32>> = pairs.into_iter().map(|(_, c)| c).collect();
            let m = Matching::new(owner, r, edge_list)?;
            if matchings.insert(owner, m).is_some() {
                return Err(Error::Structure("two matchings with the same owner".into()));
            }
            coeffs.insert(owner, coeff_list);
        }
        Ok(LdcInstance {
            n,
            k,
            r,
            q,
            rows,
            matchings,
            coeffs,
            delta_declared,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn rows(&self) -> &[FqVector] {
        &self.rows
    }

    pub fn delta_declared(&self) -> Delta {
        self.delta_declared
    }

    pub fn matchings(&self) -> &BTreeMap<u32, Matching> {
        &self.matchings
    }

    pub fn coeffs(&self, owner: u32) -> Option<&Vec<Vec<u32>>> {
        self.coeffs.get(&owner)
    }

    pub fn effective_delta(&self) -> Result<Delta, Error> {
        effective_delta_of(self.n, self.matchings.values())
    }
}

pub fn validate_ldc(inst: &LdcInstance) -> ValidationReport {
    let mut report = ValidationReport { checks: Vec::new() };

    let mut stamp = vec![u32::MAX; inst.n];
    let mut version = 0u32;
    let mut overlap = None;
    for (&i, m) in &inst.matchings {
        version = version.wrapping_add(1);
        if let Some((e1, e2, v)) = find_overlap(m, &mut stamp, version) {
            overlap = Some(format!("H_{i}: edges #{e1} and #{e2} share index {v}"));
            break;
        }
    }
    report.push("matchings-disjoint", overlap);

    let min_size = inst.delta_declared * Delta::from_integer(inst.n as u64);
    let small = inst.matchings.iter().find_map(|(&i, m)| {
        (Delta::from_integer(m.len() as u64) < min_size)
            .then(|| format!("H_{i} has {} edges, below delta*n = {min_size}", m.len()))
    });
    report.push("matching-size", small);

    let zero = inst.matchings.iter().find_map(|(&i, m)| {
        let cs = &inst.coeffs[&i];
        (0..m.len()).find_map(|idx| {
            cs[idx]
                .iter()
                .position(|&c| c == 0)
                .map(|s| format!("H_{i}: edge #{idx} has zero coefficient at slot {s}"))
        })
    });
    report.push("coefficients-nonzero", zero);

    let mut identity_fail = None;
    'outer: for (&i, m) in &inst.matchings {
        let cs = &inst.coeffs[&i];
        let target = FqVector::unit(inst.q, inst.k, i as usize);
        for (idx, edge) in m.edges().enumerate() {
            let mut acc = FqVector::zeros(inst.q, inst.k);
            for (&a, &c) in edge.iter().zip(&cs[idx]) {
                acc.add_scaled(FqElement::new(c, inst.q), &inst.rows[a as usize]);
            }
            if acc != target {
                identity_fail = Some(format!(
                    "H_{i}: edge #{idx} {:?} with coeffs {:?} does not sum to e_{i}",
                    edge, cs[idx]
                ));
                break 'outer;
            }
        }
    }
    report.push("linear-identities", identity_fail);

    report
}

/// Either kind of instance, as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Lcc(LccInstance),
    Ldc(LdcInstance),
}

pub const FORMAT_VERSION: u32 = 1;

/// Map key serialized as a decimal string but ordered numerically, so the
/// JSON object keys come out in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct MapKey(u32);

impl Serialize for MapKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for MapKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = MapKey;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a decimal index string")
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<MapKey, E> {
                s.parse::<u32>()
                    .map(MapKey)
                    .map_err(|_| E::custom(format!("bad index key {s:?}")))
            }
        }
        d.deserialize_str(V)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RowRepr {
    /// F2 rows: ceil(k/8) bytes, LSB-first bit order, lowercase hex.
    Hex(String),
    /// F_q rows for q > 2: k residues.
    Residues(Vec<u32>),
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format_version: u32,
    kind: String,
    q: u32,
    n: usize,
    k: usize,
    r: usize,
    delta: String,
    rows: Vec<RowRepr>,
    matchings: BTreeMap<MapKey, Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coeffs: Option<BTreeMap<MapKey, Vec<Vec<u32>>>>,
}

fn delta_to_string(d: Delta) -> String {
    format!("{}/{}", d.numer(), d.denom())
}

fn delta_from_string(s: &str) -> Result<Delta, Error> {
    let (numer, denom) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let numer: u64 = numer
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad delta fraction {s:?}")))?;
    let denom: u64 = denom
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad delta fraction {s:?}")))?;
    if denom == 0 {
        return Err(Error::Parse(format!("bad delta fraction {s:?}")));
    }
    Ok(Delta::new(numer, denom))
}

fn instance_to_file(inst: &Instance) -> InstanceFile {
    match inst {
        Instance::Lcc(lcc) => InstanceFile {
            format_version: FORMAT_VERSION,
            kind: "lcc".into(),
            q: 2,
            n: lcc.n,
            k: lcc.k,
            r: lcc.r,
            delta: delta_to_string(lcc.delta_declared),
            rows: lcc
                .rows
                .rows()
                .iter()
                .map(|r| RowRepr::Hex(r.to_hex()))
                .collect(),
            matchings: lcc
                .matchings
                .iter()
                .map(|(&i, m)| {
                    (MapKey(i), m.edges().map(|e| e.to_vec()).collect())
                })
                .collect(),
            coeffs: None,
        },
        Instance::Ldc(ldc) => InstanceFile {
            format_version: FORMAT_VERSION,
            kind: "ldc".into(),
            q: ldc.q,
            n: ldc.n,
            k: ldc.k,
            r: ldc.r,
            delta: delta_to_string(ldc.delta_declared),
            rows: ldc
                .rows
                .iter()
                .map(|v| {
                    if ldc.q == 2 {
                        RowRepr::Hex(
                            BitRow::from_indices(
                                v.dim(),
                                &v.support(),
                            )
                            .to_hex(),
                        )
                    } else {
                        RowRepr::Residues(v.values().to_vec())
                    }
                })
                .collect(),
            matchings: ldc
                .matchings
                .iter()
                .map(|(&i, m)| (MapKey(i), m.edges().map(|e| e.to_vec()).collect()))
                .collect(),
            coeffs: Some(
                ldc.coeffs
                    .iter()
                    .map(|(&i, cs)| (MapKey(i), cs.clone()))
                    .collect(),
            ),
        },
    }
}

fn file_to_instance(file: InstanceFile) -> Result<Instance, Error> {
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Version(file.format_version));
    }
    let delta = delta_from_string(&file.delta)?;
    let parse_bit_rows = |file: &InstanceFile| -> Result<Vec<BitRow>, Error> {
        file.rows
            .iter()
            .map(|r| match r {
                RowRepr::Hex(h) => BitRow::from_hex(file.k, h),
                RowRepr::Residues(_) => Err(Error::Parse(
                    "expected hex row strings for q = 2".into(),
                )),
            })
            .collect()
    };
    match file.kind.as_str() {
        "lcc" => {
            if file.q != 2 {
                return Err(Error::Parse(format!(
                    "lcc instances are binary; got q = {}",
                    file.q
                )));
            }
            if file.coeffs.is_some() {
                return Err(Error::Parse("lcc instances carry no coeffs".into()));
            }
            let rows = BitMatrix::new(file.k, parse_bit_rows(&file)?)?;
            let matchings = file
                .matchings
                .into_iter()
                .map(|(MapKey(i), edges)| {
                    let hyperedges = edges
                        .into_iter()
                        .map(Hyperedge::new)
                        .collect::<Result<Vec<_>, _>>()?;
                    Matching::new(i, file.r, hyperedges)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Instance::Lcc(LccInstance::new(
                file.n, file.k, file.r, rows, matchings, delta,
            )?))
        }
        "ldc" => {
            let rows: Vec<FqVector> = file
                .rows
                .iter()
                .map(|r| match (r, file.q) {
                    (RowRepr::Hex(h), 2) => {
                        let bits = BitRow::from_hex(file.k, h)?;
                        let mut vals = vec![0u32; file.k];
                        for j in bits.ones() {
                            vals[j] = 1;
                        }
                        FqVector::from_values(2, vals)
                    }
                    (RowRepr::Residues(vals), q) if q > 2 => {
                        if vals.len() != file.k {
                            return Err(Error::Parse(format!(
                                "row has {} residues, expected k = {}",
                                vals.len(),
                                file.k
                            )));
                        }
                        FqVector::from_values(q, vals.clone())
                            .map_err(|e| Error::Parse(e.to_string()))
                    }
                    (RowRepr::Hex(_), _) => Err(Error::Parse(
                        "hex rows are only valid for q = 2".into(),
                    )),
                    (RowRepr::Residues(_), _) => Err(Error::Parse(
                        "expected hex row strings for q = 2".into(),
                    )),
                })
                .collect::<Result<_, _>>()?;
            let mut coeffs = file.coeffs.ok_or_else(|| {
                Error::Parse("ldc instance is missing its coeffs table".into())
            })?;
            let mut edges_with_coeffs = Vec::new();
            for (MapKey(i), edges) in file.matchings {
                let cs = coeffs.remove(&MapKey(i)).ok_or_else(|| {
                    Error::Parse(format!("no coefficients for matching {i}"))
                })?;
                if cs.len() != edges.len() {
                    return Err(Error::Parse(format!(
                        "matching {i}: {} edges but {} coefficient lists",
                        edges.len(),
                        cs.len()
                    )));
                }
                edges_with_coeffs.push((i, edges.into_iter().zip(cs).collect()));
            }
            if let Some((MapKey(i), _)) = coeffs.into_iter().next() {
                return Err(Error::Parse(format!(
                    "coefficients for {i} have no matching"
                )));
            }
            Ok(Instance::Ldc(LdcInstance::new(
                file.n,
                file.k,
                file.r,
                file.q,
                rows,
                edges_with_coeffs,
                delta,
            )?))
        }
        other => Err(Error::Parse(format!("unknown instance kind {other:?}"))),
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string(&instance_to_file(inst)).expect("instance serialization cannot fail")
}

pub fn instance_from_json(json: &str) -> Result<Instance, Error> {
    let file: InstanceFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file_to_instance(file)
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<(), Error> {
    std::fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance, Error> {
    let json = std::fs::read_to_string(path)?;
    instance_from_json(&json)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_lcc() -> LccInstance {
        // Rows: kernel of the single parity check {0,1,2,3} on n=4, so
        // v_0 = v_1 + v_2 + v_3 holds; k = 3.
        let rows = BitMatrix::new(
            3,
            vec![
                BitRow::from_indices(3, &[0, 1, 2]),
                BitRow::from_indices(3, &[0]),
                BitRow::from_indices(3, &[1]),
                BitRow::from_indices(3, &[2]),
            ],
        )
        .unwrap();
        let m = Matching::new(0, 3, vec![Hyperedge::new(vec![1, 2, 3]).unwrap()]).unwrap();
        LccInstance::new(4, 3, 3, rows, vec![m], Delta::new(1, 4)).unwrap()
    }

    #[test]
    fn tiny_instance_validates_non_strict() {
        let inst = tiny_lcc();
        let report = validate_lcc(&inst, false);
        assert!(report.passed(), "{report}");
        let strict = validate_lcc(&inst, true);
        assert!(!strict.passed());
        assert!(strict.failures().any(|c| c.name == "complete"));
    }

    #[test]
    fn planted_identity_violation_is_reported() {
        // v_0 + v_1 + v_2 = 0, but v_3 = e_0, so the planted triple fails.
        let rows = BitMatrix::new(
            2,
            vec![
                BitRow::from_indices(2, &[0]),
                BitRow::from_indices(2, &[1]),
                BitRow::from_indices(2, &[0, 1]),
                BitRow::from_indices(2, &[0]),
            ],
        )
        .unwrap();
        let m = Matching::new(3, 3, vec![Hyperedge::new(vec![0, 1, 2]).unwrap()]).unwrap();
        let inst = LccInstance::new(4, 2, 3, rows, vec![m], Delta::new(1, 4)).unwrap();
        let report = validate_lcc(&inst, false);
        let fail = report
            .failures()
            .find(|c| c.name == "linear-identities")
            .expect("identity check must fail");
        assert!(fail.counterexample.as_ref().unwrap().contains("H_3"));
    }

    #[test]
    fn overlapping_edges_fail_disjointness() {
        let rows = BitMatrix::new(
            3,
            vec![
                BitRow::from_indices(3, &[0, 1, 2]),
                BitRow::from_indices(3, &[0]),
                BitRow::from_indices(3, &[1]),
                BitRow::from_indices(3, &[2]),
                BitRow::from_indices(3, &[0]),
                BitRow::from_indices(3, &[1, 2]),
            ],
        )
        .unwrap();
        // v_4 = v_1, so {2,3,4} sums to v_0 just like {1,2,3}; the two edges
        // overlap at 2 and 3, so only disjointness should fail.
        let m = Matching::new(
            0,
            3,
            vec![
                Hyperedge::new(vec![1, 2, 3]).unwrap(),
                Hyperedge::new(vec![4, 2, 3]).unwrap(),
            ],
        )
        .unwrap();
        let inst = LccInstance::new(6, 3, 3, rows, vec![m], Delta::new(1, 6)).unwrap();
        let report = validate_lcc(&inst, false);
        assert!(report
            .failures()
            .any(|c| c.name == "matchings-disjoint"));
    }

    #[test]
    fn owner_inside_edge_is_flagged() {
        // v_0 = v_0 + v_1 + v_2 forces v_1 + v_2 = 0; make v_1 = v_2.
        let rows = BitMatrix::new(
            2,
            vec![
                BitRow::from_indices(2, &[0]),
                BitRow::from_indices(2, &[1]),
                BitRow::from_indices(2, &[1]),
            ],
        )
        .unwrap();
        let m = Matching::new(0, 3, vec![Hyperedge::new(vec![0, 1, 2]).unwrap()]).unwrap();
        let inst = LccInstance::new(3, 2, 3, rows, vec![m], Delta::new(1, 3)).unwrap();
        let report = validate_lcc(&inst, false);
        assert!(report.failures().any(|c| c.name == "owner-excluded"));
    }

    #[test]
    fn structural_errors_are_raised_not_reported() {
        assert!(Hyperedge::new(vec![1, 1, 2]).is_err());
        let rows = BitMatrix::new(2, vec![BitRow::zeros(2), BitRow::zeros(2)]).unwrap();
        let m = Matching::new(0, 3, vec![Hyperedge::new(vec![0, 1, 9]).unwrap()]).unwrap();
        let err = LccInstance::new(2, 2, 3, rows, vec![m], Delta::new(1, 2));
        assert!(matches!(err, Err(Error::Structure(_))));
    }

    #[test]
    fn effective_delta_minimum() {
        let inst = tiny_lcc();
        assert_eq!(inst.effective_delta().unwrap(), Delta::new(1, 4));
    }

    #[test]
    fn effective_delta_requires_matchings() {
        let rows = BitMatrix::new(1, vec![BitRow::from_indices(1, &[0])]).unwrap();
        let inst = LccInstance::new(1, 1, 3, rows, vec![], Delta::new(1, 2)).unwrap();
        assert!(matches!(inst.effective_delta(), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_size_matching_gives_delta_zero_effect() {
        let rows = BitMatrix::new(1, vec![BitRow::from_indices(1, &[0]); 2]).unwrap();
        let m = Matching::new(0, 3, vec![]).unwrap();
        let inst = LccInstance::new(2, 1, 3, rows, vec![m], Delta::new(1, 2)).unwrap();
        assert_eq!(inst.effective_delta().unwrap(), Delta::new(0, 1));
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::Lcc(tiny_lcc());
        let json = instance_to_json(&inst);
        let back = instance_from_json(&json).unwrap();
        assert_eq!(back, inst);
        // Write is canonical: serializing the reparse gives identical bytes.
        assert_eq!(instance_to_json(&back), json);
    }

    #[test]
    fn json_tolerates_unsorted_edges() {
        let inst = Instance::Lcc(tiny_lcc());
        let json = instance_to_json(&inst).replace("[1,2,3]", "[3,1,2]");
        let back = instance_from_json(&json).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let json = instance_to_json(&Instance::Lcc(tiny_lcc()));
        let err = instance_from_json(&json[..json.len() / 2]);
        assert!(matches!(err, Err(Error::Parse(_))));
    }

    #[test]
    fn future_version_is_rejected() {
        let json = instance_to_json(&Instance::Lcc(tiny_lcc()))
            .replace("\"format_version\":1", "\"format_version\":99");
        assert!(matches!(instance_from_json(&json), Err(Error::Version(99))));
    }

    #[test]
    fn delta_string_forms() {
        assert_eq!(delta_from_string("1/4").unwrap(), Delta::new(1, 4));
        assert_eq!(delta_from_string("1").unwrap(), Delta::new(1, 1));
        assert!(delta_from_string("1/0").is_err());
        assert!(delta_from_string("x").is_err());
        assert_eq!(delta_to_string(Delta::new(2, 8)), "1/4");
    }
}
