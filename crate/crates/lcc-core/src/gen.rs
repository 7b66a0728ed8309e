//! Deterministic, seeded generators for LCC/LDC instances and graph
//! fixtures. All sampling flows through ChaCha8 child streams derived by
//! [`crate::rng`], so identical (config, seed) gives a bit-identical result.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Error;
use crate::fq::{check_prime_modulus, FqVector};
use crate::gf2::{BitMatrix, BitRow};
use crate::instance::{Delta, Instance, LccInstance, LdcInstance, Matching};
use crate::rainbow::ColoredGraph;

const HADAMARD_RESHUFFLES: u32 = 32;
const HADAMARD_TRIES_PER_EDGE: u32 = 64;

/// Hadamard-style LCC: `n = 2^k`, row `y` is the vector `y` itself, and each
/// `H_i` greedily packs disjoint triples `{a, b, a^b^i}`, which sum to `v_i`
/// because the rows are all of F2^k.
pub fn gen_hadamard(k: u32, seed: u64, target_delta: Delta) -> Result<LccInstance, Error> {
    if !(2..=20).contains(&k) {
        return Err(Error::Precondition(format!("k = {k} outside [2, 20]")));
    }
    if target_delta <= Ratio::from_integer(0) || target_delta > Ratio::new(1, 4) {
        return Err(Error::Precondition(format!(
            "target delta {target_delta} outside (0, 1/4]"
        )));
    }
    let n: usize = 1 << k;
    let rows: Vec<BitRow> = (0..n as u64)
        .map(|y| BitRow::from_low_bits(k as usize, y))
        .collect();
    let target_edges = (target_delta * Ratio::from_integer(n as u64))
        .ceil()
        .to_integer() as usize;

    let mut matchings = Vec::with_capacity(n);
    for i in 0..n as u32 {
        let mut rng = crate::rng::child_rng(seed, "hadamard-matching", i as u64);
        let mut flat: Vec<u32> = Vec::with_capacity(target_edges * 3);
        let mut achieved = 0usize;
        'attempt: for _ in 0..HADAMARD_RESHUFFLES {
            flat.clear();
            // avail holds unused indices; pos[x] is x's slot in avail.
            const GONE: u32 = u32::MAX;
            let mut avail: Vec<u32> = (0..n as u32).filter(|&x| x != i).collect();
            let mut pos: Vec<u32> = (0..n as u32).collect();
            for (slot, &x) in avail.iter().enumerate() {
                pos[x as usize] = slot as u32;
            }
            pos[i as usize] = GONE;
            let remove = |x: u32, avail: &mut Vec<u32>, pos: &mut Vec<u32>| {
                let slot = pos[x as usize] as usize;
                let last = *avail.last().expect("nonempty");
                avail.swap_remove(slot);
                pos[last as usize] = slot as u32;
                pos[x as usize] = GONE;
            };
            while flat.len() / 3 < target_edges {
                let mut placed = false;
                for _ in 0..HADAMARD_TRIES_PER_EDGE {
                    if avail.len() < 2 {
                        break;
                    }
                    let sa = rng.gen_range(0..avail.len());
                    let sb = rng.gen_range(0..avail.len());
                    if sa == sb {
                        continue;
                    }
                    let (a, b) = (avail[sa], avail[sb]);
                    let c = a ^ b ^ i;
                    // a != b gives c != i; a,b != i gives c != a,b.
                    if pos[c as usize] == GONE {
                        continue;
                    }
                    let mut triple = [a, b, c];
                    triple.sort_unstable();
                    flat.extend_from_slice(&triple);
                    remove(a, &mut avail, &mut pos);
                    remove(b, &mut avail, &mut pos);
                    remove(c, &mut avail, &mut pos);
                    placed = true;
                    break;
                }
                if !placed {
                    achieved = achieved.max(flat.len() / 3);
                    continue 'attempt;
                }
            }
            matchings.push(Matching::from_flat(i, 3, std::mem::take(&mut flat))?);
            break 'attempt;
        }
        if matchings.len() != i as usize + 1 {
            return Err(Error::Generation(format!(
                "H_{i}: packed only {achieved} of {target_edges} triples after {HADAMARD_RESHUFFLES} reshuffles"
            )));
        }
    }
    LccInstance::new(
        n,
        k as usize,
        3,
        BitMatrix::new(k as usize, rows)?,
        matchings,
        target_delta,
    )
}

/// Samples, for each target, a 3-uniform matching avoiding the target; turns
/// each local identity into the parity check `{i} ∪ E`; and reads generator
/// rows off a null-space basis of the check matrix, so every identity holds
/// by construction. The result is a partial instance (matchings only for
/// `targets`).
pub fn gen_constraint_kernel(
    n: usize,
    targets: &[u32],
    per_target_edges: usize,
    seed: u64,
) -> Result<LccInstance, Error> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != targets.len() {
        return Err(Error::Precondition("duplicate targets".into()));
    }
    if let Some(&bad) = sorted.iter().find(|&&t| t as usize >= n) {
        return Err(Error::Precondition(format!(
            "target {bad} out of range [0, {n})"
        )));
    }
    if per_target_edges > 0 && 3 * per_target_edges > n - 1 {
        return Err(Error::Precondition(format!(
            "cannot pack {per_target_edges} disjoint triples avoiding the target in [0, {n})"
        )));
    }

    let mut matchings = Vec::new();
    let mut checks: Vec<BitRow> = Vec::new();
    if per_target_edges > 0 {
        for &i in &sorted {
            let mut rng = crate::rng::child_rng(seed, "kernel-matching", i as u64);
            let mut pool: Vec<u32> = (0..n as u32).filter(|&x| x != i).collect();
            pool.shuffle(&mut rng);
            let mut flat = Vec::with_capacity(per_target_edges * 3);
            for chunk in pool.chunks_exact(3).take(per_target_edges) {
                let mut triple = [chunk[0], chunk[1], chunk[2]];
                triple.sort_unstable();
                flat.extend_from_slice(&triple);
                let mut check = BitRow::from_indices(n, &[i as usize]);
                for &v in &triple {
                    check.set(v as usize, true);
                }
                checks.push(check);
            }
            matchings.push(Matching::from_flat(i, 3, flat)?);
        }
    }

    let basis = if checks.is_empty() {
        (0..n).map(|i| BitRow::from_indices(n, &[i])).collect()
    } else {
        // Codewords c with A c = 0 are the left kernel of A^T.
        BitMatrix::new(n, checks)?.transpose().kernel_basis()
    };
    let k = basis.len();
    if k == 0 {
        return Err(Error::Generation(
            "constraints leave a trivial code (kernel dimension 0)".into(),
        ));
    }
    let rows: Vec<BitRow> = (0..n)
        .map(|i| {
            let mut row = BitRow::zeros(k);
            for (j, codeword) in basis.iter().enumerate() {
                if codeword.get(i) {
                    row.set(j, true);
                }
            }
            row
        })
        .collect();
    let delta = if per_target_edges > 0 {
        Ratio::new(per_target_edges as u64, n as u64)
    } else {
        Ratio::new(1, n as u64)
    };
    LccInstance::new(n, k, 3, BitMatrix::new(k, rows)?, matchings, delta)
}

/// Hadamard-style 2-LDC over F_q: rows are all vectors of F_q^k; `H_i` pairs
/// `y` with `y + e_i` (digit i: 0 with 1, 2 with 3, ...), with coefficients
/// `(q-1, 1)` realizing `e_i = v_{y+e_i} - v_y`. For q = 2 this is a perfect
/// matching with delta = 1/2; generally delta = floor(q/2)/q.
pub fn gen_hadamard_ldc(k: u32, q: u32) -> Result<LdcInstance, Error> {
    check_prime_modulus(q)?;
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let cap: u64 = 1 << 20;
    let mut n: u64 = 1;
    for _ in 0..k {
        n = n.saturating_mul(q as u64);
        if n > cap {
            return Err(Error::SizeCap(format!(
                "q^k = {q}^{k} exceeds the desk cap {cap}"
            )));
        }
    }
    let n = n as usize;
    let k = k as usize;
    let rows: Vec<FqVector> = (0..n)
        .map(|y| {
            let mut vals = vec![0u32; k];
            let mut rest = y as u64;
            for v in vals.iter_mut() {
                *v = (rest % q as u64) as u32;
                rest /= q as u64;
            }
            FqVector::from_values(q, vals).expect("digits are residues")
        })
        .collect();

    let mut stride: u64 = 1;
    let mut edges_with_coeffs = Vec::with_capacity(k);
    for i in 0..k {
        let mut edges = Vec::with_capacity(n / 2);
        for y in 0..n as u64 {
            let digit = (y / stride) % q as u64;
            if digit % 2 == 0 && digit + 1 < q as u64 {
                let partner = y + stride;
                edges.push((vec![y as u32, partner as u32], vec![q - 1, 1]));
            }
        }
        edges_with_coeffs.push((i as u32, edges));
        stride *= q as u64;
    }
    let delta = Ratio::new((q / 2) as u64, q as u64);
    LdcInstance::new(n, k, 2, q, rows, edges_with_coeffs, delta)
}

/// The Boolean hypercube on 2^d vertices with every edge colored by its
/// direction: a properly colored d-regular graph with no rainbow cycle
/// (every cycle uses each direction an even number of times).
pub fn gen_hypercube_graph(d: u32) -> Result<ColoredGraph, Error> {
    if !(1..=16).contains(&d) {
        return Err(Error::Precondition(format!("d = {d} outside [1, 16]")));
    }
    let n: usize = 1 << d;
    let mut edges = Vec::with_capacity(d as usize * n / 2);
    for y in 0..n as u32 {
        for j in 0..d {
            if (y >> j) & 1 == 0 {
                edges.push((y, y | (1 << j), j));
            }
        }
    }
    ColoredGraph::new(n, edges)
}

/// Variant tag plus size parameters for one generator run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenVariant {
    Hadamard { k: u32 },
    ConstraintKernel { n: usize, targets: Vec<u32>, per_target_edges: usize },
    HadamardLdc { k: u32, q: u32 },
    Hypercube { d: u32 },
}

/// One generator invocation, as driven by the CLI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    /// Only meaningful for the Hadamard LCC; other variants derive theirs.
    pub target_delta: Option<Delta>,
    pub variant: GenVariant,
}

#[derive(Debug, Clone)]
pub enum Generated {
    Instance(Instance),
    Graph(ColoredGraph),
}

pub fn generate(cfg: &GenConfig) -> Result<Generated, Error> {
    if let Some(d) = cfg.target_delta {
        // A 3-uniform matching has at most n/3 edges.
        if d <= Ratio::from_integer(0) || d > Ratio::new(1, 3) {
            return Err(Error::Precondition(format!(
                "target delta {d} outside (0, 1/3]"
            )));
        }
    }
    match &cfg.variant {
        GenVariant::Hadamard { k } => {
            let delta = cfg.target_delta.unwrap_or(Ratio::new(1, 4));
            Ok(Generated::Instance(Instance::Lcc(gen_hadamard(
                *k, cfg.seed, delta,
            )?)))
        }
        GenVariant::ConstraintKernel {
            n,
            targets,
            per_target_edges,
        } => Ok(Generated::Instance(Instance::Lcc(gen_constraint_kernel(
            *n,
            targets,
            *per_target_edges,
            cfg.seed,
        )?))),
        GenVariant::HadamardLdc { k, q } => Ok(Generated::Instance(Instance::Ldc(
            gen_hadamard_ldc(*k, *q)?,
        ))),
        GenVariant::Hypercube { d } => Ok(Generated::Graph(gen_hypercube_graph(*d)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{validate_lcc, validate_ldc};

    #[test]
    fn hadamard_k3_identities_and_sizes() {
        // At k=3 the maximum matching size is 1 (see the parity test below),
        // so 1/8 is the densest achievable target.
        let inst = gen_hadamard(3, 1, Ratio::new(1, 8)).unwrap();
        assert_eq!(inst.n(), 8);
        let report = validate_lcc(&inst, true);
        assert!(report.passed(), "{report}");
        for (&i, m) in inst.matchings() {
            assert!(!m.is_empty());
            for e in m.edges() {
                assert_eq!(e[0] ^ e[1] ^ e[2], i);
            }
        }
        assert!(inst.effective_delta().unwrap() >= Ratio::new(1, 8));
    }

    #[test]
    fn hadamard_k3_quarter_delta_is_unattainable() {
        // Two disjoint triples XOR-ing to i would leave one unused index
        // equal to i itself: XOR over [8] is 0, over the pool is i, over the
        // two triples is 0. So |H_i| <= 1 and packing 2 triples must fail.
        assert!(matches!(
            gen_hadamard(3, 1, Ratio::new(1, 4)),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn hadamard_quarter_delta_from_k4() {
        for k in 4..=6 {
            let inst = gen_hadamard(k, 2, Ratio::new(1, 4)).unwrap();
            let report = validate_lcc(&inst, true);
            assert!(report.passed(), "k={k}: {report}");
            assert!(inst.effective_delta().unwrap() >= Ratio::new(1, 4));
        }
    }

    #[test]
    fn hadamard_rejects_bad_parameters() {
        assert!(matches!(
            gen_hadamard(1, 0, Ratio::new(1, 4)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            gen_hadamard(21, 0, Ratio::new(1, 4)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            gen_hadamard(3, 0, Ratio::new(1, 3)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hadamard_is_deterministic() {
        let a = gen_hadamard(4, 7, Ratio::new(1, 4)).unwrap();
        let b = gen_hadamard(4, 7, Ratio::new(1, 4)).unwrap();
        assert_eq!(a, b);
        let c = gen_hadamard(4, 8, Ratio::new(1, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn kernel_zero_constraints_is_identity() {
        let inst = gen_constraint_kernel(5, &[], 0, 0).unwrap();
        assert_eq!(inst.k(), 5);
        for i in 0..5 {
            assert_eq!(
                inst.rows().row(i),
                &BitRow::from_indices(5, &[i]),
                "row {i} is not e_{i}"
            );
        }
    }

    #[test]
    fn kernel_single_constraint() {
        let inst = gen_constraint_kernel(4, &[0], 1, 3).unwrap();
        assert_eq!(inst.k(), 3);
        let mut sum = BitRow::zeros(3);
        for i in 1..4 {
            sum.xor_assign(inst.rows().row(i));
        }
        assert_eq!(&sum, inst.rows().row(0));
        assert!(validate_lcc(&inst, false).passed());
    }

    #[test]
    fn kernel_medium_instance_validates() {
        let targets: Vec<u32> = (0..8).collect();
        let inst = gen_constraint_kernel(64, &targets, 4, 1).unwrap();
        let report = validate_lcc(&inst, false);
        assert!(report.passed(), "{report}");
        // k + rank(checks) = n, with the checks rebuilt from the instance.
        let mut checks = Vec::new();
        for (&i, m) in inst.matchings() {
            for e in m.edges() {
                let mut row = BitRow::from_indices(64, &[i as usize]);
                for &v in e {
                    row.set(v as usize, true);
                }
                checks.push(row);
            }
        }
        let rank = BitMatrix::new(64, checks).unwrap().rank();
        assert_eq!(inst.k() + rank, 64);
    }

    #[test]
    fn kernel_overconstrained_can_fail() {
        // Per-target edge demand beyond what [0, n) can host.
        assert!(gen_constraint_kernel(7, &[0], 3, 0).is_err());
    }

    #[test]
    fn ldc_q2_pairs() {
        let inst = gen_hadamard_ldc(3, 2).unwrap();
        assert_eq!(inst.n(), 8);
        let report = validate_ldc(&inst);
        assert!(report.passed(), "{report}");
        let h0 = &inst.matchings()[&0];
        assert_eq!(h0.len(), 4);
        for e in h0.edges() {
            assert_eq!(e[0] ^ 1, e[1]);
        }
        assert_eq!(inst.effective_delta().unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn ldc_q3_identity() {
        let inst = gen_hadamard_ldc(2, 3).unwrap();
        assert_eq!(inst.n(), 9);
        let report = validate_ldc(&inst);
        assert!(report.passed(), "{report}");
        for cs in inst.coeffs(0).unwrap() {
            assert_eq!(cs, &vec![2, 1]);
        }
    }

    #[test]
    fn ldc_rejects_non_prime() {
        assert!(matches!(gen_hadamard_ldc(2, 4), Err(Error::Precondition(_))));
    }

    #[test]
    fn hypercube_small_structure() {
        let g2 = gen_hypercube_graph(2).unwrap();
        assert_eq!(g2.n_vertices(), 4);
        assert_eq!(g2.edges().len(), 4);
        let g3 = gen_hypercube_graph(3).unwrap();
        assert_eq!(g3.edges().len(), 12);
        for j in 0..3u32 {
            let class: Vec<_> = g3.edges().iter().filter(|e| e.2 == j).collect();
            assert_eq!(class.len(), 4);
        }
        assert!(g3.check_proper());
    }

    #[test]
    fn generate_dispatch_enforces_delta_range() {
        let cfg = GenConfig {
            seed: 0,
            target_delta: Some(Ratio::new(1, 2)),
            variant: GenVariant::Hadamard { k: 3 },
        };
        assert!(matches!(generate(&cfg), Err(Error::Precondition(_))));
    }
}
