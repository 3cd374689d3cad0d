//! Toeplitz edge labelings of Z^2 carrying an action of the free product
//! Δ = Z/2 ∗ Z/2 ∗ Z/2, and their packing into a 36-symbol subshift.
//!
//! A parameter `z ∈ 2^N` gives the Toeplitz sequence `z̃`; vertical edges
//! spell `⋯wdwd⋯` down each column with `w` chosen by a profinitely
//! continuous map `Z → Δ ∖ {1}`, horizontal edges of column `n` carry `z̃(n)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coe::{cocycle_image, extend_cocycle, BlockCode, CocycleTable};
use crate::error::{LabError, LabResult};
use crate::fullgroup::{evaluate_word, reduced_involution_words, Clopen, ClopenSet, GroupWord, Piece, TableElement};
use crate::lattice::{FiniteRegion, LatticePoint};
use crate::subshift::{from_fn, translate, PatchPoint, Pattern, Point, Sym};

/// `(a0, a1, a2, d, 0, 1)`
pub const SIGMA: [&str; 6] = ["a0", "a1", "a2", "d", "0", "1"];
pub const SIGMA_D: u8 = 3;
pub const SIGMA_0: u8 = 4;
pub const SIGMA_1: u8 = 5;
pub const PACKED_SYMBOLS: u32 = 36;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TailRule {
    Zero,
    One,
    Periodic { bits: Vec<u8> },
    Seeded { seed: u64 },
}

/// A point of `2^N`: a finite prefix followed by a tail rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ZParameter {
    pub prefix_bits: Vec<u8>,
    pub tail_rule: TailRule,
}

impl ZParameter {
    pub fn zeros() -> Self {
        ZParameter {
            prefix_bits: vec![],
            tail_rule: TailRule::Zero,
        }
    }

    pub fn seeded(seed: u64) -> Self {
        ZParameter {
            prefix_bits: vec![],
            tail_rule: TailRule::Seeded { seed },
        }
    }

    pub fn bit(&self, i: usize) -> u8 {
        if let Some(&b) = self.prefix_bits.get(i) {
            return b;
        }
        let j = i - self.prefix_bits.len();
        match &self.tail_rule {
            TailRule::Zero => 0,
            TailRule::One => 1,
            TailRule::Periodic { bits } => bits[j % bits.len()],
            TailRule::Seeded { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(j as u128);
                (rng.next_u32() & 1) as u8
            }
        }
    }
}

/// `prefix:rule` with rule `zero`, `one`, `periodic=BITS` or `seeded=N`,
/// e.g. `101:zero` or `:seeded=7`.
impl FromStr for ZParameter {
    type Err = LabError;
    fn from_str(s: &str) -> LabResult<Self> {
        let (prefix, rule) = s.split_once(':').unwrap_or((s, "zero"));
        let bits = |t: &str| -> LabResult<Vec<u8>> {
            t.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(LabError::Usage(format!("bad bit {c:?} in {s:?}"))),
                })
                .collect()
        };
        let tail_rule = match rule.split_once('=') {
            None if rule == "zero" => TailRule::Zero,
            None if rule == "one" => TailRule::One,
            Some(("periodic", b)) => {
                let b = bits(b)?;
                if b.is_empty() {
                    return Err(LabError::Usage("empty period".into()));
                }
                TailRule::Periodic { bits: b }
            }
            Some(("seeded", n)) => TailRule::Seeded {
                seed: n.parse().map_err(|_| LabError::Usage(format!("bad seed {n:?}")))?,
            },
            _ => return Err(LabError::Usage(format!("unknown tail rule {rule:?}"))),
        };
        Ok(ZParameter {
            prefix_bits: bits(prefix)?,
            tail_rule,
        })
    }
}

impl fmt::Display for ZParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.prefix_bits {
            write!(f, "{b}")?;
        }
        match &self.tail_rule {
            TailRule::Zero => write!(f, ":zero"),
            TailRule::One => write!(f, ":one"),
            TailRule::Periodic { bits } => {
                write!(f, ":periodic=")?;
                bits.iter().try_for_each(|b| write!(f, "{b}"))
            }
            TailRule::Seeded { seed } => write!(f, ":seeded={seed}"),
        }
    }
}

/// Reduced words over `{a0, a1, a2}` of length `1..=max_len`, by length then
/// lexicographically; position `j` in this list is `w_{j+1}`.
pub fn enumerate_delta(max_len: usize) -> Vec<Vec<usize>> {
    reduced_involution_words(3, max_len)
}

/// `w_j`, 1-based, without enumerating its predecessors.
pub fn delta_word(j: u64) -> Vec<usize> {
    assert!(j >= 1, "words are indexed from 1");
    let mut len = 1u32;
    let mut before = 0u64;
    while before + 3 * (1u64 << (len - 1)) < j {
        before += 3 * (1u64 << (len - 1));
        len += 1;
    }
    let rank = j - 1 - before;
    let tail = len - 1;
    let mut word = vec![(rank >> tail) as usize];
    for i in (0..tail).rev() {
        let choice = ((rank >> i) & 1) as usize;
        let prev = *word.last().unwrap();
        let options: Vec<usize> = (0..3).filter(|&a| a != prev).collect();
        word.push(options[choice]);
    }
    word
}

/// Bit `i` of `n` in two's complement.
pub fn bit_of(n: i64, i: u32) -> u8 {
    if i >= 127 {
        return (n < 0) as u8;
    }
    (((n as i128) >> i) & 1) as u8
}

/// Bits of α = −1/3 = ⋯0101 (bit 0 is 1).
pub fn alpha_bit(i: u32) -> u8 {
    i.is_multiple_of(2) as u8
}

/// Bits of β = −2/3 = ⋯1010 (bit 0 is 0).
pub fn beta_bit(i: u32) -> u8 {
    (i % 2 == 1) as u8
}

fn first_difference(n: i64, anchor: fn(u32) -> u8) -> u32 {
    (0..).find(|&i| bit_of(n, i) != anchor(i)).expect("anchors are not integers")
}

/// Least bit position where `n` and α differ.
pub fn j_index(n: i64) -> u32 {
    first_difference(n, alpha_bit)
}

/// Least bit position where `n` and β differ.
pub fn k_index(n: i64) -> u32 {
    first_difference(n, beta_bit)
}

/// `g(n) = w_{j(n)+1}`, constant on `n + 2^{j(n)+1} Z`.
pub fn profinite_g(n: i64) -> Vec<usize> {
    delta_word(j_index(n) as u64 + 1)
}

/// Residue class on which `profinite_g` is constant around `n`.
pub fn g_fiber(n: i64) -> (i64, i64) {
    let m = 1i64 << (j_index(n) + 1);
    (n.rem_euclid(m), m)
}

/// Least non-negative `n` with `g(n) = w`.
pub fn g_preimage(w: &[usize]) -> LabResult<i64> {
    let j = (1..)
        .take(1 << 20)
        .find(|&j| delta_word(j) == w)
        .ok_or_else(|| LabError::pre("not a reduced nonempty word"))?
        - 1;
    if j > 60 {
        return Err(LabError::pre("word index too deep for i64 coordinates"));
    }
    let mut n = 0i64;
    for i in 0..j as u32 {
        n |= (alpha_bit(i) as i64) << i;
    }
    n |= ((1 - alpha_bit(j as u32)) as i64) << j;
    Ok(n)
}

/// `z̃(n) = z(k(n))` on Z.
pub fn thomas_like_map(z: &ZParameter) -> Point {
    let z = z.clone();
    from_fn(format!("toeplitz:{z}"), move |t| z.bit(k_index(t.x()) as usize) as Sym)
}

/// Label of the vertical edge `{(n,m),(n,m+1)}`: `W[(−1−m) mod l]` with
/// `W = (d, w_1, …, w_{l−1})`, `w = g(n)`.
pub fn vertical_labeling(n: i64, m: i64) -> u8 {
    let w = profinite_g(n);
    let l = w.len() as i64 + 1;
    let i = (-1 - m).rem_euclid(l) as usize;
    if i == 0 {
        SIGMA_D
    } else {
        w[i - 1] as u8
    }
}

/// `λ_z` seen from `offset`, with optional corrupted vertical edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeLabeling {
    pub z: ZParameter,
    pub offset: LatticePoint,
    /// absolute vertical-edge overrides
    pub faults: Vec<(LatticePoint, u8)>,
}

impl EdgeLabeling {
    pub fn vertical(&self, t: LatticePoint) -> u8 {
        let a = t + self.offset;
        if let Some((_, v)) = self.faults.iter().find(|(p, _)| *p == a) {
            return *v;
        }
        vertical_labeling(a.x(), a.y())
    }

    pub fn horizontal(&self, t: LatticePoint) -> u8 {
        SIGMA_0 + self.z.bit(k_index(t.x() + self.offset.x()) as usize)
    }

    pub fn translate(&self, v: LatticePoint) -> EdgeLabeling {
        EdgeLabeling {
            offset: self.offset + v,
            ..self.clone()
        }
    }

    /// Row-major matrices over `[lo, hi)`, rows indexed by the second coordinate.
    pub fn export(&self, lo: LatticePoint, hi: LatticePoint) -> LabelMatrices {
        let rows = |f: &dyn Fn(LatticePoint) -> u8| {
            (lo.y()..hi.y())
                .map(|m| (lo.x()..hi.x()).map(|n| f(LatticePoint::new(n, m))).collect())
                .collect()
        };
        LabelMatrices {
            lo,
            vertical: rows(&|t| self.vertical(t)),
            horizontal: rows(&|t| self.horizontal(t)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrices {
    pub lo: LatticePoint,
    pub vertical: Vec<Vec<u8>>,
    pub horizontal: Vec<Vec<u8>>,
}

pub fn build_labeling(z: &ZParameter) -> EdgeLabeling {
    EdgeLabeling {
        z: z.clone(),
        offset: LatticePoint::ZERO,
        faults: vec![],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ViolationKind {
    VerticalAlphabet,
    HorizontalAlphabet,
    AdjacentVertical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub at: LatticePoint,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub scanned: usize,
    pub violations: Vec<Violation>,
}

impl MembershipReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Edge-by-edge membership in the labeling space on `region`.
pub fn check_membership(lambda: &EdgeLabeling, region: &FiniteRegion) -> MembershipReport {
    let pts = region.points();
    let mut violations: Vec<Violation> = pts
        .par_iter()
        .flat_map_iter(|&t| {
            let v = lambda.vertical(t);
            let mut out = Vec::new();
            if v > SIGMA_D {
                out.push(Violation { at: t, kind: ViolationKind::VerticalAlphabet });
            }
            if !(SIGMA_0..=SIGMA_1).contains(&lambda.horizontal(t)) {
                out.push(Violation { at: t, kind: ViolationKind::HorizontalAlphabet });
            }
            if v == lambda.vertical(t + LatticePoint::new(0, 1)) {
                out.push(Violation { at: t, kind: ViolationKind::AdjacentVertical });
            }
            out
        })
        .collect();
    violations.sort_by_key(|v| v.at);
    MembershipReport {
        scanned: pts.len(),
        violations,
    }
}

pub fn pack_symbol(vertical: u8, horizontal: u8) -> Sym {
    6 * vertical as Sym + horizontal as Sym
}

/// `Φ(λ)(t) = 6·vertical(t) + horizontal(t)`: vertex `t` owns its up-edge
/// and its right-edge.
pub fn pack_phi(lambda: &EdgeLabeling) -> Point {
    let l = lambda.clone();
    from_fn(format!("packed:{}@{}", l.z, l.offset), move |t| pack_symbol(l.vertical(t), l.horizontal(t)))
}

/// `ψ(λ)(n) = λ({(n,0),(n+1,0)})` as a `{0,1}` point on Z.
pub fn psi_projection(lambda: &EdgeLabeling) -> Point {
    let l = lambda.clone();
    from_fn(format!("psi:{}", l.z), move |t| (l.horizontal(LatticePoint::new(t.x(), 0)) - SIGMA_0) as Sym)
}

/// `φ_{a_i}`: step the origin along its incident `a_i` edge, if any.
pub fn delta_action(i: usize, lambda: &EdgeLabeling) -> LabResult<EdgeLabeling> {
    let up = lambda.vertical(LatticePoint::ZERO) as usize == i;
    let down = lambda.vertical(LatticePoint::new(0, -1)) as usize == i;
    match (up, down) {
        (true, true) => Err(LabError::Certificate(format!(
            "both vertical edges at {} carry a{i}",
            lambda.offset
        ))),
        (true, false) => Ok(lambda.translate(LatticePoint::new(0, 1))),
        (false, true) => Ok(lambda.translate(LatticePoint::new(0, -1))),
        (false, false) => Ok(lambda.clone()),
    }
}

/// `φ_{a_0}, φ_{a_1}, φ_{a_2}` as piecewise translations of packed points.
pub fn delta_generators() -> Vec<TableElement> {
    (0..3u32)
        .map(|i| {
            let syms = [vec![6 * i + SIGMA_0 as u32], vec![6 * i + SIGMA_1 as u32]];
            let cyl = |at: LatticePoint| {
                Clopen::Cyl(ClopenSet::new(FiniteRegion::singleton(2, at), syms.clone()).expect("singleton window"))
            };
            TableElement {
                pieces: vec![
                    Piece { domain: cyl(LatticePoint::ZERO), shift: LatticePoint::new(0, 1) },
                    Piece { domain: cyl(LatticePoint::new(0, -1)), shift: LatticePoint::new(0, -1) },
                ],
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessRow {
    pub word: Vec<usize>,
    /// column with `g(n) = w`
    pub column: i64,
    pub displacement: LatticePoint,
    /// up-edge label at the witness before and after
    pub before: u8,
    pub after: u8,
    pub found: bool,
}

/// For each reduced `w` up to `max_len`, `φ_w` moves `(n,0)·λ` with
/// `g(n) = w`: the up-edge reads the last letter of `w` before and `d` after.
pub fn faithfulness_table(lambda: &EdgeLabeling, max_len: usize) -> LabResult<Vec<FaithfulnessRow>> {
    let gens = delta_generators();
    let packed = pack_phi(lambda);
    enumerate_delta(max_len)
        .par_iter()
        .map(|w| {
            let n = g_preimage(w)?;
            let x = translate(&packed, LatticePoint::new(n, 0));
            let ev = evaluate_word(&GroupWord::involutions(w), &gens, &x)?;
            // replay on the labeling itself
            let mut lam = lambda.translate(LatticePoint::new(n, 0));
            for &a in w.iter().rev() {
                lam = delta_action(a, &lam)?;
            }
            let replay = lam.offset - lambda.offset - LatticePoint::new(n, 0);
            let before = lambda.vertical(LatticePoint::new(n, 0));
            let after = lam.vertical(LatticePoint::ZERO);
            let found = !ev.displacement.is_zero()
                && replay == ev.displacement
                && before as usize == *w.last().unwrap()
                && after == SIGMA_D;
            Ok(FaithfulnessRow {
                word: w.clone(),
                column: n,
                displacement: ev.displacement,
                before,
                after,
                found,
            })
        })
        .collect()
}

/// `φ_{a_i}^2 = id` at each offset; returns the offsets where it fails.
pub fn involution_failures(lambda: &EdgeLabeling, offsets: &[LatticePoint]) -> LabResult<Vec<LatticePoint>> {
    let bad = offsets
        .par_iter()
        .map(|&v| {
            let l = lambda.translate(v);
            for i in 0..3 {
                if delta_action(i, &delta_action(i, &l)?)?.offset != l.offset {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        })
        .collect::<LabResult<Vec<_>>>()?;
    Ok(bad.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub agree_from: u32,
    pub differing: usize,
    /// differing coordinates with `k(n) ≥ agree_from`
    pub violations: Vec<LatticePoint>,
}

/// Packed points of `z`, `z′` agreeing from bit `k` on differ only in
/// columns with `k(n) < k`.
pub fn locality_check(z: &ZParameter, z2: &ZParameter, k: u32, region: &FiniteRegion) -> LabResult<LocalityReport> {
    if (k as usize..k as usize + 256).any(|i| z.bit(i) != z2.bit(i)) {
        return Err(LabError::pre("parameters disagree beyond the given bit"));
    }
    let (a, b) = (pack_phi(&build_labeling(z)), pack_phi(&build_labeling(z2)));
    let diff: Vec<LatticePoint> = region.points().into_par_iter().filter(|&t| a.eval(t) != b.eval(t)).collect();
    let violations = diff.iter().copied().filter(|t| k_index(t.x()) >= k).collect();
    Ok(LocalityReport {
        agree_from: k,
        differing: diff.len(),
        violations,
    })
}

/// Distinct packed `window`-pattern sets for distinct parameters, a
/// diagnostic for injectivity of `z ↦ orbit closure` (not a proof).
pub fn injectivity_diagnostic(zs: &[ZParameter], window: &FiniteRegion, scan: &FiniteRegion) -> LabResult<usize> {
    let langs = zs
        .iter()
        .map(|z| crate::subshift::sample_language(&pack_phi(&build_labeling(z)), window, scan).map(|l| l.patterns))
        .collect::<LabResult<Vec<_>>>()?;
    Ok(langs.into_iter().collect::<BTreeSet<_>>().len())
}

/// Inputs to the orbit-equivalence claim: cocycle tables `u`, `v`, window
/// maps `f`, `g`, and a sample of points of `X`.
pub struct ClaimToeInput<'a> {
    pub u: &'a CocycleTable,
    pub v: &'a CocycleTable,
    pub f: &'a BlockCode,
    pub g: &'a BlockCode,
    pub samples: &'a [Point],
    /// pairs of words with equal products
    pub word_pairs: &'a [(Vec<LatticePoint>, Vec<LatticePoint>)],
    /// where `φ_{(u,f)}(x)` is materialized
    pub region: FiniteRegion,
    /// where the round trip is compared; must stay inside the image
    pub inner: FiniteRegion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimToeReport {
    pub path_independent: bool,
    pub intertwines: bool,
    pub round_trip: bool,
    pub inconclusive: Vec<String>,
    pub counterexample: Option<String>,
}

impl ClaimToeReport {
    pub fn passes(&self) -> bool {
        self.path_independent && self.intertwines && self.round_trip && self.inconclusive.is_empty()
    }
}

pub fn check_claim_toe(inp: &ClaimToeInput) -> LabResult<ClaimToeReport> {
    let mut rep = ClaimToeReport {
        path_independent: true,
        intertwines: true,
        round_trip: true,
        inconclusive: vec![],
        counterexample: None,
    };
    let sum = |w: &[LatticePoint]| w.iter().fold(LatticePoint::ZERO, |a, b| a + *b);
    for (a, b) in inp.word_pairs {
        if sum(a) != sum(b) {
            return Err(LabError::pre("word pair with different products"));
        }
    }
    let dim = inp.region.dim();
    let gens: Vec<LatticePoint> = if dim == 1 {
        vec![LatticePoint::d1(1), LatticePoint::d1(-1)]
    } else {
        vec![LatticePoint::new(1, 0), LatticePoint::new(-1, 0), LatticePoint::new(0, 1), LatticePoint::new(0, -1)]
    };
    for (si, x) in inp.samples.iter().enumerate() {
        for (a, b) in inp.word_pairs {
            let (ua, ub) = (extend_cocycle(inp.u, a, x)?, extend_cocycle(inp.u, b, x)?);
            if ua != ub && rep.path_independent {
                rep.path_independent = false;
                rep.counterexample.get_or_insert(format!("sample {si}: words {a:?} and {b:?} give {ua} and {ub}"));
            }
        }
        if !rep.path_independent {
            continue;
        }
        let img = cocycle_image(inp.u, inp.f, x, &inp.region)?;
        for &s in &gens {
            let us = crate::coe::cocycle_at(inp.u, s, x)?;
            let img_s = cocycle_image(inp.u, inp.f, &translate(x, s), &inp.region)?;
            for (h, val) in &img_s {
                if let Some(w) = img.get(&(*h + us)) {
                    if w != val && rep.intertwines {
                        rep.intertwines = false;
                        rep.counterexample.get_or_insert(format!("sample {si}: φ(s·x) ≠ u⁰(s,x)·φ(x) at {h} for s = {s}"));
                    }
                }
            }
        }
        // materialize y = φ_{(u,f)}(x) and map it back
        let mut keys: Vec<LatticePoint> = img.keys().copied().collect();
        keys.sort();
        let window = FiniteRegion::from_points(dim, keys.iter().copied());
        let values = window.iter().map(|t| img[&t]).collect();
        let patch = Arc::new(PatchPoint::new(Pattern::new(window, values)?, 0));
        let y: Point = patch.clone();
        let back: HashMap<LatticePoint, Sym> = cocycle_image(inp.v, inp.g, &y, &inp.inner)?;
        if patch.misses() > 0 {
            rep.inconclusive.push(format!("sample {si}: round trip left the materialized image ({} reads)", patch.misses()));
            continue;
        }
        for (h, val) in &back {
            if x.eval(*h) != *val && rep.round_trip {
                rep.round_trip = false;
                rep.counterexample.get_or_insert(format!("sample {si}: round trip differs at {h}"));
            }
        }
    }
    Ok(rep)
}

/// Symbols realized by packed labelings: vertical index ≤ 3, horizontal 4 or 5.
pub fn realizable_symbols() -> BTreeSet<Sym> {
    (0..=SIGMA_D)
        .flat_map(|v| [pack_symbol(v, SIGMA_0), pack_symbol(v, SIGMA_1)])
        .collect()
}

/// A block code swapping the two horizontal labels, with its inverse.
pub fn horizontal_flip() -> (BlockCode, BlockCode) {
    let map: BTreeMap<Sym, Sym> = (0..=SIGMA_D)
        .flat_map(|v| [(pack_symbol(v, SIGMA_0), pack_symbol(v, SIGMA_1)), (pack_symbol(v, SIGMA_1), pack_symbol(v, SIGMA_0))])
        .collect();
    (BlockCode::relabel(2, &map), BlockCode::relabel(2, &map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subshift::{restrict_values, toeplitz_certificate};
    use proptest::prelude::*;

    /// Independent bit comparison against explicit 64-bit anchors.
    fn first_diff_oracle(n: i64, anchor: u64) -> u32 {
        let x = (n as u64) ^ anchor;
        if x == 0 {
            64
        } else {
            x.trailing_zeros()
        }
    }
    const ALPHA64: u64 = 0x5555_5555_5555_5555;
    const BETA64: u64 = 0xAAAA_AAAA_AAAA_AAAA;

    #[test]
    fn delta_enumeration() {
        let w = enumerate_delta(4);
        assert_eq!(w.len(), 45);
        assert_eq!(enumerate_delta(1), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(enumerate_delta(2).len(), 9);
        for len in 1..=6 {
            assert_eq!(enumerate_delta(6).iter().filter(|v| v.len() == len).count(), 3 << (len - 1));
        }
        for (i, v) in enumerate_delta(6).iter().enumerate() {
            assert_eq!(&delta_word(i as u64 + 1), v);
        }
    }

    #[test]
    fn profinite_examples() {
        assert_eq!(profinite_g(0), vec![0]);
        assert_eq!(profinite_g(-1), vec![1]);
        assert_eq!(j_index(5), 4);
        assert_eq!(profinite_g(5), delta_word(5));
        for n in -300i64..300 {
            assert_eq!(j_index(n), first_diff_oracle(n, ALPHA64));
            assert_eq!(k_index(n), first_diff_oracle(n, BETA64));
            let (_, m) = g_fiber(n);
            assert_eq!(profinite_g(n + 7 * m), profinite_g(n));
            assert_eq!(profinite_g(n - m), profinite_g(n));
        }
        for w in enumerate_delta(4) {
            assert_eq!(profinite_g(g_preimage(&w).unwrap()), w);
        }
    }

    #[test]
    fn toeplitz_sequence_examples() {
        let zero = thomas_like_map(&ZParameter::zeros());
        let e = ZParameter::from_str("1:zero").unwrap();
        let ze = thomas_like_map(&e);
        // brute table: z̃(n) = 1 exactly for odd n
        let table: Vec<(i64, Sym)> = (-8i64..=8).map(|n| (n, (n.rem_euclid(2) == 1) as Sym)).collect();
        for (n, v) in table {
            assert_eq!(zero.eval(LatticePoint::d1(n)), 0);
            assert_eq!(ze.eval(LatticePoint::d1(n)), v);
        }
        let s = thomas_like_map(&ZParameter::seeded(11));
        assert!(toeplitz_certificate(&s, &FiniteRegion::interval(-64, 65), 8, 1).all_certified());
    }

    #[test]
    fn z_parameter_text_round_trip() {
        for s in ["101:zero", ":one", "0:periodic=011", "11:seeded=42"] {
            let z = ZParameter::from_str(s).unwrap();
            assert_eq!(z.to_string(), s);
            let j: ZParameter = serde_json::from_str(&serde_json::to_string(&z).unwrap()).unwrap();
            assert_eq!(j, z);
        }
        assert!(ZParameter::from_str("12:zero").is_err());
        assert!(ZParameter::from_str("1:sometimes").is_err());
        let p = ZParameter::from_str("1:periodic=01").unwrap();
        assert_eq!((0..5).map(|i| p.bit(i)).collect::<Vec<_>>(), vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn vertical_words() {
        for n in -32..=32 {
            assert_eq!(vertical_labeling(n, -1), SIGMA_D);
            for m in -32..=32 {
                assert_ne!(vertical_labeling(n, m), vertical_labeling(n, m + 1));
            }
        }
        // column spelling a0 a1 downward: d, a0, a1, d
        let n = g_preimage(&[0, 1]).unwrap();
        let col: Vec<u8> = [-1, -2, -3, -4].iter().map(|&m| vertical_labeling(n, m)).collect();
        assert_eq!(col, vec![SIGMA_D, 0, 1, SIGMA_D]);
    }

    #[test]
    fn packing_and_projection() {
        assert_eq!(pack_symbol(SIGMA_D, SIGMA_0), 22);
        let z = ZParameter::seeded(3);
        let lam = build_labeling(&z);
        let x = pack_phi(&lam);
        let real = realizable_symbols();
        assert_eq!(real, BTreeSet::from([4, 5, 10, 11, 16, 17, 22, 23]));
        let r = FiniteRegion::centered_square(-16, 16);
        assert!(r.iter().all(|t| real.contains(&x.eval(t))));
        let v = LatticePoint::new(5, -3);
        assert_eq!(restrict_values(&pack_phi(&lam.translate(v)), &r), restrict_values(&translate(&x, v), &r));
        let psi = psi_projection(&lam);
        let zt = thomas_like_map(&z);
        for n in -64..=64 {
            let t = LatticePoint::d1(n);
            assert_eq!(psi.eval(t), zt.eval(t));
            assert_eq!(psi_projection(&lam.translate(LatticePoint::new(0, 9))).eval(t), zt.eval(t));
            assert_eq!(psi_projection(&lam.translate(LatticePoint::new(4, 0))).eval(t), zt.eval(t + LatticePoint::d1(4)));
        }
        assert!(check_membership(&lam, &FiniteRegion::centered_square(-32, 32)).passes());
        let other = build_labeling(&ZParameter::seeded(4));
        assert!(r.iter().all(|t| other.vertical(t) == lam.vertical(t)));
    }

    #[test]
    fn faults_are_reported() {
        let mut lam = build_labeling(&ZParameter::zeros());
        let t = LatticePoint::new(2, 0);
        lam.faults.push((t, lam.vertical(t + LatticePoint::new(0, 1))));
        let rep = check_membership(&lam, &FiniteRegion::centered_square(-4, 4));
        // column 2 alternates d, a0, so both neighbours now clash
        let below = t - LatticePoint::new(0, 1);
        assert_eq!(
            rep.violations,
            vec![Violation { at: below, kind: ViolationKind::AdjacentVertical }, Violation { at: t, kind: ViolationKind::AdjacentVertical }]
        );
    }

    #[test]
    fn delta_action_and_faithfulness() {
        let lam = build_labeling(&ZParameter::seeded(9));
        let offs: Vec<LatticePoint> = FiniteRegion::centered_square(-15, 16).iter().take(1000).collect();
        assert!(involution_failures(&lam, &offs).unwrap().is_empty());
        let rows = faithfulness_table(&lam, 4).unwrap();
        assert_eq!(rows.len(), 45);
        for r in &rows {
            assert!(r.found, "{r:?}");
            assert_eq!(r.displacement, LatticePoint::new(0, r.word.len() as i64));
        }
        // packed generators agree with the labeling action
        let gens = delta_generators();
        let x = pack_phi(&lam);
        for v in offs.iter().take(200) {
            for (i, g) in gens.iter().enumerate() {
                let d = g.displacement(&translate(&x, *v)).unwrap();
                assert_eq!(d, delta_action(i, &lam.translate(*v)).unwrap().offset - *v);
            }
        }
    }

    #[test]
    fn packed_point_is_toeplitz_and_local() {
        let z = ZParameter::seeded(5);
        let x = pack_phi(&build_labeling(&z));
        assert!(toeplitz_certificate(&x, &FiniteRegion::centered_square(-8, 8), 8, 3).all_certified());
        let a = ZParameter::from_str("000:periodic=10").unwrap();
        let b = ZParameter::from_str("101:periodic=10").unwrap();
        let rep = locality_check(&a, &b, 3, &FiniteRegion::centered_square(-32, 32)).unwrap();
        assert!(rep.differing > 0);
        assert!(rep.violations.is_empty());
        assert_eq!(injectivity_diagnostic(&[ZParameter::zeros(), ZParameter::from_str(":one").unwrap()], &FiniteRegion::rect_dims(2, 1), &FiniteRegion::centered_square(-8, 8)).unwrap(), 2);
    }

    #[test]
    fn claim_checks() {
        let x = pack_phi(&build_labeling(&ZParameter::seeded(2)));
        let samples: Vec<Point> = (0..4).map(|i| translate(&x, LatticePoint::new(3 * i, -i))).collect();
        let e1 = LatticePoint::new(1, 0);
        let e2 = LatticePoint::new(0, 1);
        let pairs = vec![(vec![e1, e2], vec![e2, e1]), (vec![e1, -e1], vec![])];
        let id = CocycleTable::identity(2);
        let idc = BlockCode::identity(2);
        let inp = ClaimToeInput {
            u: &id,
            v: &id,
            f: &idc,
            g: &idc,
            samples: &samples,
            word_pairs: &pairs,
            region: FiniteRegion::centered_square(-4, 4),
            inner: FiniteRegion::centered_square(-3, 3),
        };
        assert!(check_claim_toe(&inp).unwrap().passes());

        let (f, g) = horizontal_flip();
        let alphabet: Vec<Sym> = realizable_symbols().into_iter().collect();
        let u = CocycleTable::conjugacy(2, &alphabet);
        let inp = ClaimToeInput { u: &u, v: &u, f: &f, g: &g, ..inp };
        assert!(check_claim_toe(&inp).unwrap().passes());

        let mut bad = u.clone();
        let piece = alphabet.iter().position(|&s| s == 22).unwrap();
        bad.corrupt(e1, piece, LatticePoint::new(2, 0)).unwrap();
        let inp = ClaimToeInput { u: &bad, ..inp };
        let rep = check_claim_toe(&inp).unwrap();
        assert!(!rep.path_independent);
        assert!(rep.counterexample.is_some());
    }

    proptest! {
        #[test]
        fn preimages_land_in_fibers(n in -100000i64..100000) {
            let w = profinite_g(n);
            let (r, m) = g_fiber(n);
            prop_assert_eq!(profinite_g(r), w.clone());
            prop_assert_eq!(profinite_g(r + m), w);
            let lam = build_labeling(&ZParameter::zeros());
            prop_assert!(delta_action(0, &lam.translate(LatticePoint::new(n, n % 17))).is_ok());
        }
    }
}
