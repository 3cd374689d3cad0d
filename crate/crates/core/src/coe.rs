//! Orbit-equivalence bookkeeping: cocycle tables over cylinder partitions,
//! the cocycle identity, invariance transfer, block codes and entropy
//! comparison between recoded systems.
//!
//! Actions are written additively: `s·x = translate(x, s)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::fullgroup::ClopenSet;
use crate::lattice::{is_invariant, FiniteRegion, InvarianceReport, LatticePoint};
use crate::rational::{LogCount, LogRatio, Q};
use crate::subshift::{restrict_values, sample_language, translate, PatternCounter, Point, Sym};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocyclePiece {
    pub domain: ClopenSet,
    pub value: LatticePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTable {
    pub generator: LatticePoint,
    pub pieces: Vec<CocyclePiece>,
}

/// `u(s, x)` for each generator `s`, constant on cylinder pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleTable {
    pub dim: usize,
    pub tables: Vec<GeneratorTable>,
}

fn unit_vectors(dim: usize) -> Vec<LatticePoint> {
    let mut g = vec![LatticePoint::new(1, 0), LatticePoint::new(-1, 0)];
    if dim == 2 {
        g.push(LatticePoint::new(0, 1));
        g.push(LatticePoint::new(0, -1));
    }
    g
}

impl CocycleTable {
    /// `u(s, ·) ≡ s` on one piece.
    pub fn identity(dim: usize) -> Self {
        let all = ClopenSet::new(FiniteRegion::from_points(dim, []), [vec![]]).expect("empty window");
        CocycleTable {
            dim,
            tables: unit_vectors(dim)
                .into_iter()
                .map(|s| GeneratorTable {
                    generator: s,
                    pieces: vec![CocyclePiece {
                        domain: all.clone(),
                        value: s,
                    }],
                })
                .collect(),
        }
    }

    /// The cocycle of a conjugacy, `u(s, ·) ≡ s`, tabulated over the
    /// partition by the symbol at the origin.
    pub fn conjugacy(dim: usize, alphabet: &[Sym]) -> Self {
        let w = FiniteRegion::singleton(dim, LatticePoint::ZERO);
        CocycleTable {
            dim,
            tables: unit_vectors(dim)
                .into_iter()
                .map(|s| GeneratorTable {
                    generator: s,
                    pieces: alphabet
                        .iter()
                        .map(|&a| CocyclePiece {
                            domain: ClopenSet::new(w.clone(), [vec![a]]).expect("singleton"),
                            value: s,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Replaces the value of one piece.
    pub fn corrupt(&mut self, generator: LatticePoint, piece: usize, value: LatticePoint) -> LabResult<()> {
        let t = self
            .tables
            .iter_mut()
            .find(|t| t.generator == generator)
            .ok_or_else(|| LabError::pre(format!("no table for generator {generator}")))?;
        let p = t
            .pieces
            .get_mut(piece)
            .ok_or_else(|| LabError::pre(format!("no piece {piece}")))?;
        p.value = value;
        Ok(())
    }

    pub fn value(&self, s: LatticePoint, x: &Point) -> LabResult<LatticePoint> {
        let t = self
            .tables
            .iter()
            .find(|t| t.generator == s)
            .ok_or_else(|| LabError::pre(format!("no table for generator {s}")))?;
        let mut hit = None;
        for p in &t.pieces {
            if p.domain.contains(x) {
                if hit.is_some() {
                    return Err(LabError::Certificate(format!("pieces of generator {s} overlap")));
                }
                hit = Some(p.value);
            }
        }
        hit.ok_or_else(|| LabError::Certificate(format!("no piece of generator {s} matches")))
    }

    pub fn value_set(&self) -> FiniteRegion {
        FiniteRegion::from_points(
            self.dim,
            self.tables.iter().flat_map(|t| t.pieces.iter().map(|p| p.value)),
        )
    }
}

/// `ū((s_n,…,s_0), x) = u(s_n, s_{n−1}⋯s_0 x) + ⋯ + u(s_0, x)`; `word` is
/// written left to right and applied right to left.
pub fn extend_cocycle(u: &CocycleTable, word: &[LatticePoint], x: &Point) -> LabResult<LatticePoint> {
    let mut cur = x.clone();
    let mut total = LatticePoint::ZERO;
    for &s in word.iter().rev() {
        total = total + u.value(s, &cur)?;
        cur = translate(&cur, s);
    }
    Ok(total)
}

/// Unit steps reaching `g`: first along the first axis, then the second.
/// Returned in written order (last step first).
pub fn canonical_word(g: LatticePoint) -> Vec<LatticePoint> {
    let mut steps = Vec::new();
    let sx = LatticePoint::new(g.x().signum(), 0);
    let sy = LatticePoint::new(0, g.y().signum());
    steps.extend(std::iter::repeat_n(sx, g.x().unsigned_abs() as usize));
    steps.extend(std::iter::repeat_n(sy, g.y().unsigned_abs() as usize));
    steps.reverse();
    steps
}

/// `u⁰(g, x)` along the canonical path.
pub fn cocycle_at(u: &CocycleTable, g: LatticePoint, x: &Point) -> LabResult<LatticePoint> {
    extend_cocycle(u, &canonical_word(g), x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleFailure {
    pub r: LatticePoint,
    pub s: LatticePoint,
    pub sample: usize,
    pub lhs: LatticePoint,
    pub rhs: LatticePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub checked: usize,
    pub failures: Vec<CocycleFailure>,
}

impl CocycleReport {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `κ(r + s, x) = κ(r, s·x) + κ(s, x)` on each `(r, s, x)` triple.
pub fn check_cocycle_identity(kappa: &CocycleTable, triples: &[(LatticePoint, LatticePoint, Point)]) -> LabResult<CocycleReport> {
    let rows: Vec<LabResult<Option<CocycleFailure>>> = triples
        .par_iter()
        .enumerate()
        .map(|(i, (r, s, x))| {
            let lhs = cocycle_at(kappa, *r + *s, x)?;
            let rhs = cocycle_at(kappa, *r, &translate(x, *s))? + cocycle_at(kappa, *s, x)?;
            Ok((lhs != rhs).then_some(CocycleFailure {
                r: *r,
                s: *s,
                sample: i,
                lhs,
                rhs,
            }))
        })
        .collect();
    let mut failures = Vec::new();
    for r in rows {
        if let Some(f) = r? {
            failures.push(f);
        }
    }
    Ok(CocycleReport {
        checked: triples.len(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceTransfer {
    /// `κ(E, x)`
    pub image: FiniteRegion,
    pub injective: bool,
    pub image_report: InvarianceReport,
    /// `|{g ∈ E : Kg ⊆ E}|` with `K` the supplied value set
    pub source_core: u64,
    /// `|{h ∈ F : Lh ⊆ F}| ≥ |{g ∈ E : Kg ⊆ E}|`
    pub counting_holds: bool,
}

/// Pushes `E` through `g ↦ κ(g, x)` and tests `(L, δ)`-invariance of the image.
pub fn invariance_transfer_check(kappa: &CocycleTable, k: &FiniteRegion, e: &FiniteRegion, l: &FiniteRegion, delta: &Q, x: &Point) -> LabResult<InvarianceTransfer> {
    let pts = e.points();
    let vals = pts
        .par_iter()
        .map(|&g| cocycle_at(kappa, g, x))
        .collect::<LabResult<Vec<_>>>()?;
    let distinct: HashSet<LatticePoint> = vals.iter().copied().collect();
    let injective = distinct.len() == vals.len();
    if !injective {
        return Err(LabError::Certificate("cocycle is not injective on E at x".into()));
    }
    let image = FiniteRegion::from_points(e.dim(), vals);
    let image_report = is_invariant(&image, l, delta)?;
    let source_core = crate::lattice::invariance_core(e, k);
    Ok(InvarianceTransfer {
        counting_holds: image_report.core >= source_core,
        image,
        injective,
        image_report,
        source_core,
    })
}

/// Number of distinct maps `v ↦ κ(v, x)` on `vertices` over the samples.
pub fn distinct_cocycle_maps(kappa: &CocycleTable, vertices: &FiniteRegion, samples: &[Point]) -> LabResult<usize> {
    let maps = samples
        .par_iter()
        .map(|x| vertices.iter().map(|v| cocycle_at(kappa, v, x)).collect::<LabResult<Vec<_>>>())
        .collect::<LabResult<Vec<_>>>()?;
    Ok(maps.into_iter().collect::<BTreeSet<_>>().len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum BlockRule {
    Identity,
    Constant { symbol: Sym },
    /// Base-`q` digits of the window pattern, first coordinate least significant.
    HigherBlock { base: Sym },
    Table { entries: Vec<(Vec<Sym>, Sym)> },
}

/// A sliding block code: the image at `t` is `rule(x|_{t+W})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCode {
    pub window: FiniteRegion,
    pub rule: BlockRule,
}

/// Image value for a pattern outside the table.
pub const UNDEFINED: Sym = Sym::MAX;

impl BlockCode {
    pub fn identity(dim: usize) -> Self {
        BlockCode {
            window: FiniteRegion::singleton(dim, LatticePoint::ZERO),
            rule: BlockRule::Identity,
        }
    }

    pub fn higher_block(window: FiniteRegion, base: Sym) -> LabResult<Self> {
        if (base as f64).powi(window.len() as i32) >= Sym::MAX as f64 {
            return Err(LabError::pre("higher-block alphabet overflows"));
        }
        Ok(BlockCode {
            window,
            rule: BlockRule::HigherBlock { base },
        })
    }

    /// A symbol permutation at the origin.
    pub fn relabel(dim: usize, map: &BTreeMap<Sym, Sym>) -> Self {
        BlockCode {
            window: FiniteRegion::singleton(dim, LatticePoint::ZERO),
            rule: BlockRule::Table {
                entries: map.iter().map(|(a, b)| (vec![*a], *b)).collect(),
            },
        }
    }

    fn apply_pattern(&self, p: &[Sym], table: Option<&HashMap<Vec<Sym>, Sym>>) -> Sym {
        match &self.rule {
            BlockRule::Identity => p[0],
            BlockRule::Constant { symbol } => *symbol,
            BlockRule::HigherBlock { base } => p.iter().rev().fold(0, |acc, &s| {
                if s >= *base {
                    UNDEFINED
                } else if acc == UNDEFINED {
                    acc
                } else {
                    acc * base + s
                }
            }),
            BlockRule::Table { .. } => table.and_then(|t| t.get(p).copied()).unwrap_or(UNDEFINED),
        }
    }

    fn table(&self) -> Option<HashMap<Vec<Sym>, Sym>> {
        match &self.rule {
            BlockRule::Table { entries } => Some(entries.iter().cloned().collect()),
            _ => None,
        }
    }

    /// `f(x)`: the image symbol at the origin.
    pub fn at_origin(&self, x: &Point) -> Sym {
        self.apply_pattern(&restrict_values(x, &self.window), self.table().as_ref())
    }

    /// First scanned pattern the code does not cover.
    pub fn check_total(&self, x: &Point, scan: &FiniteRegion) -> LabResult<Option<Vec<Sym>>> {
        let lang = sample_language(x, &self.window, scan)?;
        let t = self.table();
        Ok(lang
            .patterns
            .iter()
            .find(|p| self.apply_pattern(p, t.as_ref()) == UNDEFINED)
            .cloned())
    }
}

/// Sliding-block image of `x`; the code is checked total on `scan`.
pub fn conjugate_by_blockcode(x: &Point, code: &BlockCode, scan: &FiniteRegion) -> LabResult<Point> {
    if let Some(p) = code.check_total(x, scan)? {
        return Err(LabError::Certificate(format!("block code undefined on pattern {p:?}")));
    }
    let x = x.clone();
    let code = code.clone();
    let table = code.table();
    let name = format!("blockcode:{}", x.provenance());
    Ok(crate::subshift::from_fn(name, move |t| {
        let p: Vec<Sym> = code.window.iter().map(|w| x.eval(t + w)).collect();
        code.apply_pattern(&p, table.as_ref())
    }))
}

/// Pooled orbit samples of several points.
pub struct SampledFamily {
    pub name: String,
    pub points: Vec<Point>,
    pub scan: FiniteRegion,
}

impl PatternCounter for SampledFamily {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn pattern_count(&self, f: &FiniteRegion) -> LabResult<LogRatio> {
        let sets = self
            .points
            .iter()
            .map(|x| sample_language(x, f, &self.scan))
            .collect::<LabResult<Vec<_>>>()?;
        let exact = sets.iter().all(|s| s.complete);
        let all: BTreeSet<&Vec<Sym>> = sets.iter().flat_map(|s| s.patterns.iter()).collect();
        Ok(LogRatio {
            count: LogCount::count(all.len() as u64),
            area: f.len() as u64,
            exact,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompareRow {
    pub window_size: u64,
    pub estimates: Vec<LogRatio>,
    /// max minus min estimate, nats
    pub gap: f64,
}

pub fn entropy_compare(systems: &[&dyn PatternCounter], windows: &[FiniteRegion]) -> LabResult<Vec<CompareRow>> {
    windows
        .iter()
        .map(|w| {
            let estimates = systems
                .iter()
                .map(|s| s.pattern_count(w))
                .collect::<LabResult<Vec<_>>>()?;
            let nats: Vec<f64> = estimates.iter().map(|e| e.nats()).collect();
            let gap = nats.iter().cloned().fold(f64::MIN, f64::max) - nats.iter().cloned().fold(f64::MAX, f64::min);
            Ok(CompareRow {
                window_size: w.len() as u64,
                estimates,
                gap: if nats.is_empty() { 0.0 } else { gap },
            })
        })
        .collect()
}

/// `φ_{(u,f)}(x)` on the coordinates `u⁰(s, x)`, `s ∈ region`:
/// `φ(x)(u⁰(s, x)) = f(s·x)`.
pub fn cocycle_image(u: &CocycleTable, f: &BlockCode, x: &Point, region: &FiniteRegion) -> LabResult<HashMap<LatticePoint, Sym>> {
    let rows = region
        .points()
        .par_iter()
        .map(|&s| Ok((cocycle_at(u, s, x)?, f.at_origin(&translate(x, s)))))
        .collect::<LabResult<Vec<_>>>()?;
    let mut out = HashMap::with_capacity(rows.len());
    for (h, v) in rows {
        if out.insert(h, v).is_some() {
            return Err(LabError::Certificate(format!("u⁰(·, x) is not injective: {h} is hit twice")));
        }
    }
    Ok(out)
}
