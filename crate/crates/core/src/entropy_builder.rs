//! Prescribed-entropy subshifts of Z^2 built from nested boxes.
//!
//! Level `k` is a label `R_k → 2^{0..q}` on the rectangle `R_k = [0,A_k)×[0,B_k)`,
//! extended periodically. A coordinate is *free* when its label is the full
//! alphabet and *forced* when it is a singleton; the free density of level
//! `k` lies strictly between `θ + 2^{-(k+1)}` and `θ + 2^{-k}` where
//! `θ = λ / ln q`. Every inequality is decided against a certified rational
//! bracket for `θ`, so a pass is a proof.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::fullgroup::{
    free_product_certificate, is_identity, make_element, Clopen, ClopenSet, FreeProductCertificate, Piece, SampleLang, TableElement,
};
use crate::lattice::{FiniteRegion, LatticePoint};
use crate::rational::{floor_q, fmt_q, ln_int, qi, qu, to_f64, Bracket, LogCount, RatPair, Q};
use crate::subshift::{minimality_certificate, overlay, translate, Minimality, Point, PointOracle, Sym};
use crate::tilings::monotiling_entropy_bound;

/// Precision of the `ln q` bracket behind every `θ` comparison.
const LN_BITS: u32 = 160;

/// Masks are `u64`, so at most 63 symbols.
pub const MAX_Q: u64 = 63;

/// Dimensions that satisfy every level inequality for `λ = 1/2`, budget 4.
pub const DEFAULT_SCHEDULE: [(i64, i64); 3] = [(8, 8), (512, 32), (65536, 64)];

fn pow2(k: u32) -> Q {
    Q::from_integer(BigInt::one() << k)
}

fn inv_pow2(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k)
}

fn full_mask(q: u64) -> u64 {
    (1u64 << q) - 1
}

/// Least integer `q > 3` with `ln q > 2λ`, certified on bracket endpoints.
pub fn choose_q(lambda: &Q) -> LabResult<u64> {
    if !lambda.is_positive() {
        return Err(LabError::pre("lambda must be positive"));
    }
    let two_l = lambda * qi(2);
    let mut q = 4u64;
    loop {
        let mut bits = 64;
        let above = loop {
            let b = ln_int(q, bits);
            if b.lo > two_l {
                break true;
            }
            if b.hi < two_l {
                break false;
            }
            bits *= 2;
            if bits > 4096 {
                return Err(LabError::Inconclusive(format!("cannot separate ln {q} from 2λ")));
            }
        };
        if above {
            return Ok(q);
        }
        q += 1;
        if q > 1 << 40 {
            return Err(LabError::pre("lambda too large"));
        }
    }
}

/// `[λ / ln_hi q, λ / ln_lo q]`
pub fn theta_bracket(lambda: &Q, q: u64) -> Bracket {
    let ln = ln_int(q, LN_BITS);
    Bracket {
        lo: lambda / &ln.hi,
        hi: lambda / &ln.lo,
    }
}

#[derive(Clone, Debug)]
pub struct BuilderParams {
    pub lambda: Q,
    pub q: u64,
    pub theta: Bracket,
    pub schedule: Vec<(i64, i64)>,
    pub budget: u64,
    pub seed: u64,
}

impl BuilderParams {
    pub fn new(lambda: Q, schedule: Vec<(i64, i64)>, budget: u64, seed: u64) -> LabResult<Self> {
        let q = choose_q(&lambda)?;
        if q > MAX_Q {
            return Err(LabError::pre(format!("q = {q} exceeds the {MAX_Q}-symbol mask limit")));
        }
        let theta = theta_bracket(&lambda, q);
        if theta.hi >= Q::new(1.into(), 2.into()) {
            return Err(LabError::Inconclusive("could not certify θ < 1/2".into()));
        }
        if schedule.is_empty() {
            return Err(LabError::pre("empty level schedule"));
        }
        for (i, &(a, b)) in schedule.iter().enumerate() {
            if a < 1 || b < 1 {
                return Err(LabError::pre(format!("level {} has non-positive dims {a}x{b}", i + 1)));
            }
            if i > 0 {
                let (pa, pb) = schedule[i - 1];
                if a % pa != 0 || b % pb != 0 {
                    return Err(LabError::infeasible(
                        "divisibility",
                        format!("{a}x{b} at k={} is not a multiple of {pa}x{pb}", i + 1),
                    ));
                }
            }
        }
        Ok(BuilderParams {
            lambda,
            q,
            theta,
            schedule,
            budget,
            seed,
        })
    }

    /// The first `levels` entries of [`DEFAULT_SCHEDULE`].
    pub fn with_default_schedule(lambda: Q, levels: usize, budget: u64, seed: u64) -> LabResult<Self> {
        if levels == 0 || levels > DEFAULT_SCHEDULE.len() {
            return Err(LabError::Usage(format!(
                "the default schedule has 1..={} levels; pass explicit dims for more",
                DEFAULT_SCHEDULE.len()
            )));
        }
        Self::new(lambda, DEFAULT_SCHEDULE[..levels].to_vec(), budget, seed)
    }
}

/// How the subtiles of `R_k` were used.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubtileClasses {
    /// subtiles meeting the column `{0}×Z`, copied from the previous level
    pub copied: u64,
    /// subtiles carrying one enumerated previous-level pattern each
    pub assigned: u64,
    /// subtiles thinned to `kept` free coordinates
    pub reduced: u64,
    pub kept: u64,
}

/// Budgeted surjectivity: how many of the `|W|` previous-level patterns
/// were placed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Coverage {
    pub assigned: u64,
    pub space: LogCount,
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelData {
    pub k: u32,
    pub dims: (i64, i64),
    pub q: u64,
    /// symbol-set bitmasks, index `x * B + y`
    pub labels: Vec<u64>,
    pub classes: SubtileClasses,
    pub coverage: Option<Coverage>,
}

impl LevelData {
    pub fn area(&self) -> u64 {
        (self.dims.0 * self.dims.1) as u64
    }

    pub fn label(&self, t: LatticePoint) -> u64 {
        let x = t.x().rem_euclid(self.dims.0);
        let y = t.y().rem_euclid(self.dims.1);
        self.labels[(x * self.dims.1 + y) as usize]
    }

    pub fn is_free(&self, t: LatticePoint) -> bool {
        self.label(t) == full_mask(self.q)
    }

    pub fn d_count(&self) -> u64 {
        let f = full_mask(self.q);
        self.labels.iter().filter(|&&m| m == f).count() as u64
    }

    /// Every label is either the full alphabet or a single symbol.
    pub fn box_shaped(&self) -> bool {
        let f = full_mask(self.q);
        self.labels.iter().all(|&m| m == f || m.count_ones() == 1)
    }

    /// `|π_{R_k}(A_k)|` as a product of label sizes.
    pub fn pattern_space(&self) -> LogCount {
        let mut by: BTreeMap<u64, u64> = BTreeMap::new();
        for &m in &self.labels {
            let c = m.count_ones() as u64;
            if c != 1 {
                *by.entry(c).or_default() += 1;
            }
        }
        LogCount {
            factors: by.into_iter().collect(),
        }
    }

    pub fn to_doc(&self) -> LevelDoc {
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for &m in &self.labels {
            match runs.last_mut() {
                Some((c, v)) if *v == m => *c += 1,
                _ => runs.push((1, m)),
            }
        }
        LevelDoc {
            k: self.k,
            dims: self.dims,
            label_runs: runs,
            classes: self.classes.clone(),
            coverage: self.coverage.clone(),
        }
    }

    pub fn from_doc(doc: &LevelDoc, q: u64) -> LabResult<Self> {
        let (a, b) = doc.dims;
        if a < 1 || b < 1 {
            return Err(LabError::pre("level dims must be positive"));
        }
        let mut labels = Vec::with_capacity((a * b) as usize);
        for &(c, m) in &doc.label_runs {
            if m == 0 || m > full_mask(q) {
                return Err(LabError::Certificate(format!("level {}: mask {m:#x} is not a nonempty subset of the alphabet", doc.k)));
            }
            labels.extend(std::iter::repeat_n(m, c as usize));
        }
        if labels.len() as i64 != a * b {
            return Err(LabError::Certificate(format!(
                "level {}: label runs cover {} cells, expected {}",
                doc.k,
                labels.len(),
                a * b
            )));
        }
        Ok(LevelData {
            k: doc.k,
            dims: doc.dims,
            q,
            labels,
            classes: doc.classes.clone(),
            coverage: doc.coverage.clone(),
        })
    }
}

/// Wire form of a level: run-length encoded row-major labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelDoc {
    pub k: u32,
    pub dims: (i64, i64),
    pub label_runs: Vec<(u64, u64)>,
    #[serde(default)]
    pub classes: SubtileClasses,
    #[serde(default)]
    pub coverage: Option<Coverage>,
}

/// Everything `verify --level-file` needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelsFile {
    pub lambda: RatPair,
    pub q: u64,
    pub levels: Vec<LevelDoc>,
}

impl LevelsFile {
    pub fn new(params: &BuilderParams, levels: &[LevelData]) -> Self {
        LevelsFile {
            lambda: RatPair::from(&params.lambda),
            q: params.q,
            levels: levels.iter().map(LevelData::to_doc).collect(),
        }
    }

    pub fn decode(&self) -> LabResult<(Q, Bracket, Vec<LevelData>)> {
        let lambda = self.lambda.to_q()?;
        let q = choose_q(&lambda)?;
        if q != self.q {
            return Err(LabError::Certificate(format!("file says q = {}, but λ = {} gives q = {q}", self.q, fmt_q(&lambda))));
        }
        let levels = self
            .levels
            .iter()
            .map(|d| LevelData::from_doc(d, q))
            .collect::<LabResult<Vec<_>>>()?;
        Ok((lambda.clone(), theta_bracket(&lambda, q), levels))
    }
}

/// Lex-least `keep` free cells stay free, other free cells collapse to the
/// least symbol they admit.
fn thin(labels: &[u64], q: u64, keep: u64) -> Vec<u64> {
    let f = full_mask(q);
    let mut kept = 0;
    labels
        .iter()
        .map(|&m| {
            if m != f {
                m
            } else if kept < keep {
                kept += 1;
                m
            } else {
                1 << m.trailing_zeros()
            }
        })
        .collect()
}

/// `floor((θ_lo + c) n) + 1`
fn kept_count(theta: &Bracket, c: &Q, n: u64) -> u64 {
    (floor_q(&((&theta.lo + c) * qu(n))) + BigInt::one()).to_u64().unwrap()
}

fn level_one(params: &BuilderParams) -> LabResult<LevelData> {
    let (a, b) = params.schedule[0];
    let t = (a * b) as u64;
    let th = &params.theta;
    if t <= 32 {
        return Err(LabError::infeasible("condition (ii)", format!("{a}x{b} at k=1: |T|={t} ≤ 32")));
    }
    let keep = kept_count(th, &Q::new(5.into(), 16.into()), t);
    let m = qu(keep);
    let lo = (&th.hi + Q::new(1.into(), 4.into())) * qu(t);
    let hi = (&th.lo + Q::new(1.into(), 2.into())) * qu(t);
    if m <= lo || m >= hi {
        return Err(LabError::infeasible(
            "condition (i)",
            format!("{a}x{b} at k=1: kept {keep} of {t} is outside ({}, {})", fmt_q(&lo), fmt_q(&hi)),
        ));
    }
    if keep < b as u64 {
        return Err(LabError::infeasible(
            "condition (iii)",
            format!("{a}x{b} at k=1: kept {keep} cells cannot cover the column of height {b}"),
        ));
    }
    let full = vec![full_mask(params.q); t as usize];
    Ok(LevelData {
        k: 1,
        dims: (a, b),
        q: params.q,
        labels: thin(&full, params.q, keep),
        classes: SubtileClasses {
            copied: 0,
            assigned: 0,
            reduced: 1,
            kept: keep,
        },
        coverage: None,
    })
}

/// The first `n` patterns of `π(prev)` in lexicographic order, last cell
/// least significant, each as singleton masks.
fn lex_patterns(labels: &[u64], n: u64) -> Vec<Vec<u64>> {
    let choices: Vec<Vec<u64>> = labels
        .iter()
        .map(|&m| (0..64).filter(|i| m >> i & 1 == 1).map(|i| 1u64 << i).collect())
        .collect();
    let mut digits = vec![0usize; labels.len()];
    let mut out = Vec::new();
    'outer: for _ in 0..n {
        out.push(digits.iter().zip(&choices).map(|(&d, c)| c[d]).collect());
        for i in (0..digits.len()).rev() {
            digits[i] += 1;
            if digits[i] < choices[i].len() {
                continue 'outer;
            }
            digits[i] = 0;
        }
        break;
    }
    out
}

fn pattern_space_small(labels: &[u64]) -> Option<u64> {
    labels
        .iter()
        .try_fold(1u64, |acc, &m| acc.checked_mul(m.count_ones() as u64))
}

/// Level `k ≥ 2` from level `k − 1`.
pub fn build_level(prev: &LevelData, params: &BuilderParams) -> LabResult<LevelData> {
    let k = prev.k + 1;
    let (a, b) = *params
        .schedule
        .get(k as usize - 1)
        .ok_or_else(|| LabError::pre(format!("no dims scheduled for level {k}")))?;
    let (pa, pb) = prev.dims;
    if a % pa != 0 || b % pb != 0 {
        return Err(LabError::infeasible("divisibility", format!("{a}x{b} at k={k} is not a multiple of {pa}x{pb}")));
    }
    let th = &params.theta;
    let (nx, ny) = ((a / pa) as u64, (b / pb) as u64);
    let ti = (pa * pb) as u64;
    let t = (a * b) as u64;
    let tq = qu(t);

    if tq <= pow2(k + 4) {
        return Err(LabError::infeasible("condition (ii)", format!("{a}x{b} at k={k}: |T|={t} ≤ {}", pow2(k + 4))));
    }
    let copied = ny;
    let bound_b = &tq * inv_pow2(k + 3);
    if qu(copied * ti) >= bound_b {
        return Err(LabError::infeasible(
            "step (b)",
            format!("{a}x{b} at k={k}: column subtiles cover {} ≥ |T|/2^{} = {}", copied * ti, k + 3, fmt_q(&bound_b)),
        ));
    }
    let available = nx * ny - copied;
    let space = pattern_space_small(&prev.labels);
    let assigned = space.map_or(params.budget, |s| s.min(params.budget));
    if assigned > available {
        return Err(LabError::infeasible(
            "step (c)",
            format!("{a}x{b} at k={k}: budget {assigned} exceeds the {available} available subtiles"),
        ));
    }
    let reduced = available - assigned;
    let c5 = Q::new(5.into(), 1.into()) * inv_pow2(k + 3);
    let c6 = Q::new(6.into(), 1.into()) * inv_pow2(k + 3);
    let bound_a = (&th.hi + inv_pow2(k + 1)) / (&th.lo + &c5) * &tq;
    if qu(reduced * ti) <= bound_a {
        return Err(LabError::infeasible(
            "step (a)",
            format!("{a}x{b} at k={k}: thinned subtiles cover {} ≤ {}", reduced * ti, fmt_q(&bound_a)),
        ));
    }
    let keep = kept_count(th, &c5, ti);
    let f_lo = (&th.hi + &c5) * qu(ti);
    let f_hi = (&th.lo + &c6) * qu(ti);
    if qu(keep) <= f_lo || qu(keep) >= f_hi {
        return Err(LabError::infeasible(
            "step (f)",
            format!("{a}x{b} at k={k}: kept {keep} of {ti} is outside ({}, {})", fmt_q(&f_lo), fmt_q(&f_hi)),
        ));
    }
    let prev_d = prev.d_count();
    if keep > prev_d {
        return Err(LabError::infeasible(
            "step (f)",
            format!("{a}x{b} at k={k}: kept {keep} exceeds the {prev_d} free cells of level {}", k - 1),
        ));
    }

    let thinned = thin(&prev.labels, params.q, keep);
    let patterns = lex_patterns(&prev.labels, assigned);
    let mut labels = vec![0u64; t as usize];
    let mut next_pattern = 0usize;
    for i in 0..nx {
        for j in 0..ny {
            let src: &[u64] = if i == 0 {
                &prev.labels
            } else if next_pattern < patterns.len() {
                next_pattern += 1;
                &patterns[next_pattern - 1]
            } else {
                &thinned
            };
            for lx in 0..pa {
                let dst = ((i as i64 * pa + lx) * b + j as i64 * pb) as usize;
                let s = (lx * pb) as usize;
                labels[dst..dst + pb as usize].copy_from_slice(&src[s..s + pb as usize]);
            }
        }
    }
    let level = LevelData {
        k,
        dims: (a, b),
        q: params.q,
        labels,
        classes: SubtileClasses {
            copied,
            assigned,
            reduced,
            kept: keep,
        },
        coverage: Some(Coverage {
            assigned,
            space: prev.pattern_space(),
            full: space == Some(assigned),
        }),
    };
    let check = verify_level(Some(prev), &level, th);
    if !check.passes() {
        return Err(LabError::Certificate(format!("level {k} failed its own verification: {check:?}")));
    }
    Ok(level)
}

pub fn build_levels(params: &BuilderParams) -> LabResult<Vec<LevelData>> {
    let mut levels = vec![level_one(params)?];
    for _ in 1..params.schedule.len() {
        let next = build_level(levels.last().unwrap(), params)?;
        levels.push(next);
    }
    Ok(levels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityCertificate {
    pub k: u32,
    pub d_count: u64,
    pub area: u64,
    pub ratio: RatPair,
    /// `θ_hi + 2^{-(k+1)} < ratio`
    pub lower_holds: bool,
    /// `ratio < θ_lo + 2^{-k}`
    pub upper_holds: bool,
}

impl DensityCertificate {
    pub fn passes(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Free density against both strict bounds, conservative endpoints.
pub fn verify_densities(level: &LevelData, theta: &Bracket) -> DensityCertificate {
    let d = level.d_count();
    let area = level.area();
    let ratio = Q::new(d.into(), area.into());
    DensityCertificate {
        k: level.k,
        d_count: d,
        area,
        lower_holds: &theta.hi + inv_pow2(level.k + 1) < ratio,
        upper_holds: ratio < &theta.lo + inv_pow2(level.k),
        ratio: RatPair::from(&ratio),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelCheck {
    pub density: DensityCertificate,
    pub box_shaped: bool,
    /// `{0}×[0,B_k)` entirely free
    pub column_free: bool,
    /// restriction to `R_{k−1}` equals the previous level
    pub restricts_to_prev: bool,
    /// every label is a subset of the previous level's label at that cell
    pub nested: bool,
}

impl LevelCheck {
    pub fn passes(&self) -> bool {
        self.density.passes() && self.box_shaped && self.column_free && self.restricts_to_prev && self.nested
    }
}

pub fn verify_level(prev: Option<&LevelData>, level: &LevelData, theta: &Bracket) -> LevelCheck {
    let (a, b) = level.dims;
    let column_free = (0..b).all(|y| level.is_free(LatticePoint::new(0, y)));
    let (restricts_to_prev, nested) = match prev {
        None => (true, true),
        Some(p) => {
            let (pa, pb) = p.dims;
            let divisible = a % pa == 0 && b % pb == 0;
            let restricts = divisible
                && (0..pa).all(|x| (0..pb).all(|y| level.labels[(x * b + y) as usize] == p.labels[(x * pb + y) as usize]));
            let nested = divisible
                && (0..a).all(|x| {
                    (0..b).all(|y| {
                        let m = level.labels[(x * b + y) as usize];
                        m & !p.label(LatticePoint::new(x, y)) == 0
                    })
                });
            (restricts, nested)
        }
    };
    LevelCheck {
        density: verify_densities(level, theta),
        box_shaped: level.box_shaped(),
        column_free,
        restricts_to_prev,
        nested,
    }
}

pub fn verify_levels(levels: &[LevelData], theta: &Bracket) -> Vec<LevelCheck> {
    levels
        .iter()
        .enumerate()
        .map(|(i, l)| verify_level(if i == 0 { None } else { Some(&levels[i - 1]) }, l, theta))
        .collect()
}

/// A point of the deepest box: singletons are forced, free cells take the
/// least symbol (`seed = None`) or a seeded choice.
pub struct BoxPoint {
    level: Arc<LevelData>,
    seed: Option<u64>,
}

fn cell_stream(t: LatticePoint) -> u64 {
    (t.x() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (t.y() as u64).rotate_left(32)
}

impl PointOracle for BoxPoint {
    fn eval(&self, t: LatticePoint) -> Sym {
        let m = self.level.label(t);
        if m.count_ones() == 1 || self.seed.is_none() {
            return m.trailing_zeros();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap());
        rng.set_stream(cell_stream(t));
        let pick = rng.gen_range(0..m.count_ones());
        (0..64).filter(|i| m >> i & 1 == 1).nth(pick as usize).unwrap()
    }
    fn provenance(&self) -> String {
        match self.seed {
            None => format!("box:k{}:canonical", self.level.k),
            Some(s) => format!("box:k{}:seed={s}", self.level.k),
        }
    }
    fn period(&self) -> Option<(i64, i64)> {
        self.seed.is_none().then_some(self.level.dims)
    }
}

pub fn point_from_box(levels: &[LevelData], seed: Option<u64>) -> LabResult<Point> {
    let deepest = levels.last().ok_or_else(|| LabError::pre("no levels"))?;
    Ok(Arc::new(BoxPoint {
        level: Arc::new(deepest.clone()),
        seed,
    }))
}

/// Every pattern of the deepest box on `f`; errors past `cap` patterns.
pub fn box_patterns(levels: &[LevelData], f: &FiniteRegion, cap: u64) -> LabResult<BTreeSet<Vec<Sym>>> {
    let deepest = levels.last().ok_or_else(|| LabError::pre("no levels"))?;
    let masks: Vec<u64> = f.iter().map(|t| deepest.label(t)).collect();
    match pattern_space_small(&masks) {
        Some(n) if n <= cap => {}
        _ => return Err(LabError::pre(format!("more than {cap} box patterns on the window"))),
    }
    let n = pattern_space_small(&masks).unwrap();
    Ok(lex_patterns(&masks, n)
        .into_iter()
        .map(|p| p.iter().map(|m| m.trailing_zeros()).collect())
        .collect())
}

/// Free cells of the deepest box inside `f`.
pub fn free_cells(levels: &[LevelData], f: &FiniteRegion) -> Vec<LatticePoint> {
    let Some(deepest) = levels.last() else {
        return vec![];
    };
    f.iter().filter(|&t| deepest.is_free(t)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntropyBounds {
    pub k: u32,
    pub q: u64,
    /// `|D|/|R_k|`; both bounds are this coefficient times `ln q`
    pub coefficient: RatPair,
    pub lower_nats: f64,
    pub tiling_term: f64,
    pub upper_nats: f64,
    /// `λ < coefficient · ln q`, certified
    pub lower_exceeds_lambda: bool,
    /// `coefficient · ln q ≤ λ + 2^{-k} ln q`, certified
    pub within_gap: bool,
}

/// `h(A) ≥ (|D|/|R_k|) ln q` from the box structure; `h(A) ≤ h(A_k)`, which is
/// the same count plus the entropy of the rectangle tiling.
pub fn entropy_report(levels: &[LevelData], lambda: &Q) -> Vec<EntropyBounds> {
    levels
        .iter()
        .map(|l| {
            let c = Q::new(l.d_count().into(), l.area().into());
            let ln = ln_int(l.q, LN_BITS);
            let lnf = ln.mid_f64();
            let tiling = monotiling_entropy_bound(l.area());
            let lower = to_f64(&c) * lnf;
            EntropyBounds {
                k: l.k,
                q: l.q,
                lower_exceeds_lambda: *lambda < &c * &ln.lo,
                within_gap: (&c - inv_pow2(l.k)) * &ln.hi < *lambda,
                coefficient: RatPair::from(&c),
                lower_nats: lower,
                tiling_term: tiling,
                upper_nats: lower + tiling,
            }
        })
        .collect()
}

/// `g_1, g_2, g_3` and the sets `V_l` they are built from.
#[derive(Clone, Debug)]
pub struct CsimplicityGenerators {
    pub k: u32,
    pub m: i64,
    pub window: FiniteRegion,
    pub sets: Vec<ClopenSet>,
    pub gens: Vec<TableElement>,
    pub involutive: Vec<bool>,
    pub disjoint: bool,
    pub supported: bool,
}

fn a_pow(n: i64) -> LatticePoint {
    LatticePoint::new(0, n)
}

/// `S·{a^0, a^{2m}, a^{4m}, a^{6m}} ∪ {a^{−m}, a^m, a^{3m}, a^{5m}}` with
/// `S = R_k`, `a = (0,1)`, `m = B_k`.
pub fn generator_window(levels: &[LevelData], k: u32) -> LabResult<(FiniteRegion, FiniteRegion, i64)> {
    let lvl = levels
        .get(k as usize - 1)
        .ok_or_else(|| LabError::pre(format!("level {k} not built")))?;
    let (a, b) = lvl.dims;
    let s = FiniteRegion::rect_dims(a, b);
    let m = b;
    let mut pts: Vec<LatticePoint> = Vec::new();
    for j in 0..4 {
        pts.extend(s.translate(a_pow(2 * j * m)).iter());
    }
    for j in [-1, 1, 3, 5] {
        pts.push(a_pow(j * m));
    }
    let w = FiniteRegion::from_points(2, pts.iter().copied());
    if w.len() != pts.len() {
        return Err(LabError::pre(format!("m = {m} is too small: window blocks overlap")));
    }
    Ok((w, s, m))
}

fn v_set(z: &Point, w: &FiniteRegion, m: i64, l: Sym) -> LabResult<ClopenSet> {
    let base = z.clone();
    let rest: Vec<Sym> = (0..4).filter(|&v| v != l).collect();
    let mut pats = Vec::new();
    for p in permutations3(&rest) {
        let mut ov = HashMap::new();
        ov.insert(a_pow(-m), l);
        ov.insert(a_pow(m), p[0]);
        ov.insert(a_pow(3 * m), p[1]);
        ov.insert(a_pow(5 * m), p[2]);
        let y = overlay(&base, ov);
        pats.push(w.iter().map(|t| y.eval(t)).collect::<Vec<_>>());
    }
    ClopenSet::new(w.clone(), pats)
}

fn permutations3(v: &[Sym]) -> Vec<[Sym; 3]> {
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                if i != j && j != k && i != k {
                    out.push([v[i], v[j], v[k]]);
                }
            }
        }
    }
    out
}

/// The involutions `g_l`, `l ∈ {0,1,2}`: `V ↦ a^{6m}V`, `a^{2m}V ↦ a^{4m}V`
/// and back, identity elsewhere.
pub fn csimplicity_generators(levels: &[LevelData], k: u32, lang: &SampleLang) -> LabResult<CsimplicityGenerators> {
    let deepest = levels.last().ok_or_else(|| LabError::pre("no levels"))?;
    if deepest.q < 4 {
        return Err(LabError::pre("the generators need at least 4 symbols"));
    }
    let (w, s, m) = generator_window(levels, k)?;
    let z = point_from_box(levels, None)?;
    let u = ClopenSet::cylinder(&z, &s);
    let mut sets = Vec::new();
    let mut gens = Vec::new();
    let mut disjoint = true;
    let mut supported = true;
    for l in 0..3 {
        let v = v_set(&z, &w, m, l)?;
        let translates: Vec<ClopenSet> = (0..4).map(|j| v.shift(a_pow(2 * j * m))).collect();
        for i in 0..4 {
            for j in i + 1..4 {
                disjoint &= translates[i].disjoint(&translates[j]);
            }
            supported &= translates[i].subset_of(&u) == Some(true);
        }
        let pieces = vec![
            Piece {
                domain: Clopen::Cyl(translates[0].clone()),
                shift: a_pow(6 * m),
            },
            Piece {
                domain: Clopen::Cyl(translates[3].clone()),
                shift: a_pow(-6 * m),
            },
            Piece {
                domain: Clopen::Cyl(translates[1].clone()),
                shift: a_pow(2 * m),
            },
            Piece {
                domain: Clopen::Cyl(translates[2].clone()),
                shift: a_pow(-2 * m),
            },
        ];
        gens.push(make_element(pieces, lang)?);
        sets.push(v);
    }
    let involutive = gens
        .iter()
        .map(|g| is_identity(&g.compose(g), lang))
        .collect::<LabResult<Vec<_>>>()?;
    if !disjoint {
        return Err(LabError::Certificate("translates of some V_l intersect".into()));
    }
    if !supported {
        return Err(LabError::Certificate("a generator piece leaves the cylinder of z on S".into()));
    }
    if let Some(l) = involutive.iter().position(|&b| !b) {
        return Err(LabError::Certificate(format!("g_{l} squared moves a sample point")));
    }
    Ok(CsimplicityGenerators {
        k,
        m,
        window: w,
        sets,
        gens,
        involutive,
        disjoint,
        supported,
    })
}

/// A point `x` with `g_{w_0} g_{w_1} ⋯ g_{w_{r−1}} x = a^{6rm} x`, letters
/// applied right to left. Only column cells `a^{odd·m}` of the canonical
/// point are changed, and each must be free.
pub fn free_product_witness(levels: &[LevelData], k: u32, word: &[usize]) -> LabResult<Point> {
    if word.is_empty() {
        return Err(LabError::pre("empty word"));
    }
    if word.iter().any(|&l| l >= 3) {
        return Err(LabError::pre("letters must lie in {0, 1, 2}"));
    }
    if word.windows(2).any(|p| p[0] == p[1]) {
        return Err(LabError::pre("word is not alternating"));
    }
    let (_, _, m) = generator_window(levels, k)?;
    let deepest = levels.last().unwrap();
    let l: Vec<Sym> = word.iter().rev().map(|&i| i as Sym).collect();
    let r = l.len();
    let mut ov: HashMap<LatticePoint, Sym> = HashMap::new();
    for j in 0..r {
        let base = 6 * j as i64;
        let v5 = if j + 1 < r {
            l[j + 1]
        } else {
            (0..4).find(|&v| v != l[r - 1] && v != l[0]).unwrap()
        };
        let mut rest = (0..4).filter(|&v| v != l[j] && v != v5);
        ov.insert(a_pow((base - 1) * m), l[j]);
        ov.insert(a_pow((base + 1) * m), rest.next().unwrap());
        ov.insert(a_pow((base + 3) * m), rest.next().unwrap());
        ov.insert(a_pow((base + 5) * m), v5);
    }
    if let Some(t) = ov.keys().find(|&&t| !deepest.is_free(t)) {
        return Err(LabError::Certificate(format!("witness cell {t} is forced by the box")));
    }
    let z = point_from_box(levels, None)?;
    let word_s: Vec<String> = word.iter().map(|i| i.to_string()).collect();
    let x = overlay(&z, ov);
    Ok(Arc::new(Named {
        inner: x,
        name: format!("witness[{}]", word_s.join("")),
    }))
}

struct Named {
    inner: Point,
    name: String,
}

impl PointOracle for Named {
    fn eval(&self, t: LatticePoint) -> Sym {
        self.inner.eval(t)
    }
    fn provenance(&self) -> String {
        self.name.clone()
    }
}

/// Sample language for the generator checks: a patch of the canonical orbit
/// plus column translates of witnesses for all words of length ≤ 2.
pub fn generator_language(levels: &[LevelData], k: u32) -> LabResult<SampleLang> {
    let (_, _, m) = generator_window(levels, k)?;
    let z = point_from_box(levels, None)?;
    let mut lang = SampleLang::orbit(&z, &FiniteRegion::centered_square(-2, 2));
    for w in crate::fullgroup::reduced_involution_words(3, 2) {
        let x = free_product_witness(levels, k, &w)?;
        let r = w.len() as i64;
        lang = lang.extend((-1..=3 * r + 1).map(|j| translate(&x, a_pow(2 * j * m))));
    }
    Ok(lang)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratorSummary {
    pub k: u32,
    pub m: i64,
    pub piece_counts: Vec<usize>,
    pub involutive: Vec<bool>,
    pub disjoint: bool,
    pub supported: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstructionReport {
    pub lambda: RatPair,
    pub q: u64,
    pub theta: (RatPair, RatPair),
    pub schedule: Vec<(i64, i64)>,
    pub budget: u64,
    pub seed: u64,
    pub checks: Vec<LevelCheck>,
    pub entropy: Vec<EntropyBounds>,
    pub coverage: Vec<Option<Coverage>>,
    pub minimality: Minimality,
    pub minimality_weakened: bool,
    pub generators: GeneratorSummary,
    pub free_product: FreeProductCertificate,
    /// every witness moved by exactly `(0, 6rm)`
    pub displacements_exact: bool,
    pub passed: bool,
}

pub struct Construction {
    pub params: BuilderParams,
    pub levels: Vec<LevelData>,
    pub generators: CsimplicityGenerators,
    pub report: ConstructionReport,
}

/// Generators at level `k` and the witness table for every reduced word up
/// to `max_len`; the flag says each displacement is exactly `(0, 6rm)`.
pub fn free_product_table(levels: &[LevelData], k: u32, max_len: usize) -> LabResult<(CsimplicityGenerators, FreeProductCertificate, bool)> {
    let lang = generator_language(levels, k)?;
    let generators = csimplicity_generators(levels, k, &lang)?;
    let m = generators.m;
    let factory = |w: &[usize], i: usize| -> Option<Point> {
        if i == 0 {
            free_product_witness(levels, k, w).ok()
        } else {
            None
        }
    };
    let cert = free_product_certificate(&generators.gens, max_len, &factory, 1, &lang)?;
    let exact = cert
        .rows
        .iter()
        .all(|r| r.displacement == a_pow(6 * r.word.len() as i64 * m));
    Ok((generators, cert, exact))
}

/// Level used for the generators: the first, whose window is smallest.
pub const GENERATOR_LEVEL: u32 = 1;

/// Levels, density and entropy certificates, a minimality scan of the
/// canonical point, the generators, and the free-product table.
pub fn run_construction(params: &BuilderParams, max_len: usize) -> LabResult<Construction> {
    let levels = build_levels(params)?;
    let checks = verify_levels(&levels, &params.theta);
    let entropy = entropy_report(&levels, &params.lambda);
    let z = point_from_box(&levels, None)?;
    let minimality = minimality_certificate(&z, &FiniteRegion::square(2), &FiniteRegion::square(64))?;
    let coverage: Vec<Option<Coverage>> = levels.iter().map(|l| l.coverage.clone()).collect();
    let minimality_weakened =
        coverage.iter().flatten().any(|c| !c.full) || matches!(minimality, Minimality::Inconclusive { .. });

    let k = GENERATOR_LEVEL;
    let (generators, free_product, displacements_exact) = free_product_table(&levels, k, max_len)?;
    let m = generators.m;
    let passed = checks.iter().all(LevelCheck::passes)
        && entropy.iter().all(|e| e.lower_exceeds_lambda && e.within_gap)
        && free_product.complete()
        && free_product.involutive.iter().all(|&b| b)
        && displacements_exact;
    let report = ConstructionReport {
        lambda: RatPair::from(&params.lambda),
        q: params.q,
        theta: (RatPair::from(&params.theta.lo), RatPair::from(&params.theta.hi)),
        schedule: params.schedule.clone(),
        budget: params.budget,
        seed: params.seed,
        checks,
        entropy,
        coverage,
        minimality,
        minimality_weakened,
        generators: GeneratorSummary {
            k,
            m,
            piece_counts: generators.gens.iter().map(TableElement::piece_count).collect(),
            involutive: generators.involutive.clone(),
            disjoint: generators.disjoint,
            supported: generators.supported,
        },
        free_product,
        displacements_exact,
        passed,
    };
    Ok(Construction {
        params: params.clone(),
        levels,
        generators,
        report,
    })
}
