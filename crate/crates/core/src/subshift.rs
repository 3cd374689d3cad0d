//! Points as lazy oracles, patterns, language samples, and the pattern
//! counting estimators built on them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::lattice::{FiniteRegion, LatticePoint};
use crate::rational::{LogCount, LogRatio, Q};

pub type Sym = u32;

/// Ordered list of distinct symbol names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub symbols: Vec<String>,
}

impl Alphabet {
    pub fn numeric(q: u32) -> Self {
        Alphabet {
            symbols: (0..q).map(|i| i.to_string()).collect(),
        }
    }

    pub fn new(symbols: Vec<String>) -> LabResult<Self> {
        let set: BTreeSet<_> = symbols.iter().collect();
        if set.len() != symbols.len() {
            return Err(LabError::pre("alphabet symbols must be distinct"));
        }
        Ok(Alphabet { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A deterministic configuration `Z^d → symbols`, evaluated on demand.
pub trait PointOracle: Send + Sync {
    fn eval(&self, t: LatticePoint) -> Sym;

    /// Construction id and seed, for reports.
    fn provenance(&self) -> String {
        "anonymous".into()
    }

    /// A diagonal period `(p1, p2)` with `x(t + p) = x(t)` along both axes.
    fn period(&self) -> Option<(i64, i64)> {
        None
    }

    /// `Some((inner, v))` when this point is `translate(inner, v)`.
    fn as_shift(&self) -> Option<(&Point, LatticePoint)> {
        None
    }
}

pub type Point = Arc<dyn PointOracle>;

impl fmt::Debug for dyn PointOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point<{}>", self.provenance())
    }
}

struct Shifted {
    inner: Point,
    offset: LatticePoint,
}

impl PointOracle for Shifted {
    fn eval(&self, t: LatticePoint) -> Sym {
        self.inner.eval(t + self.offset)
    }
    fn provenance(&self) -> String {
        format!("{}+{}", self.inner.provenance(), self.offset)
    }
    fn period(&self) -> Option<(i64, i64)> {
        self.inner.period()
    }
    fn as_shift(&self) -> Option<(&Point, LatticePoint)> {
        Some((&self.inner, self.offset))
    }
}

/// The shifted point `t ↦ x(t + v)`. Offsets of nested translates add up.
pub fn translate(x: &Point, v: LatticePoint) -> Point {
    let (inner, offset) = match x.as_shift() {
        Some((inner, w)) => (inner.clone(), w + v),
        None => (x.clone(), v),
    };
    if offset.is_zero() {
        return inner;
    }
    Arc::new(Shifted { inner, offset })
}

/// Total offset relative to the innermost untranslated point.
pub fn shift_offset(x: &Point) -> LatticePoint {
    x.as_shift().map(|(_, v)| v).unwrap_or(LatticePoint::ZERO)
}

pub struct ConstantPoint(pub Sym);

impl PointOracle for ConstantPoint {
    fn eval(&self, _: LatticePoint) -> Sym {
        self.0
    }
    fn provenance(&self) -> String {
        format!("constant:{}", self.0)
    }
    fn period(&self) -> Option<(i64, i64)> {
        Some((1, 1))
    }
}

pub fn constant(sym: Sym) -> Point {
    Arc::new(ConstantPoint(sym))
}

/// Doubly periodic point given by one fundamental block, row-major.
pub struct PeriodicPoint {
    pub p: (i64, i64),
    pub block: Vec<Sym>,
}

impl PointOracle for PeriodicPoint {
    fn eval(&self, t: LatticePoint) -> Sym {
        let x = t.x().rem_euclid(self.p.0);
        let y = t.y().rem_euclid(self.p.1);
        self.block[(x * self.p.1 + y) as usize]
    }
    fn provenance(&self) -> String {
        format!("periodic:{}x{}", self.p.0, self.p.1)
    }
    fn period(&self) -> Option<(i64, i64)> {
        Some(self.p)
    }
}

pub fn periodic(p: (i64, i64), block: Vec<Sym>) -> LabResult<Point> {
    if p.0 < 1 || p.1 < 1 || block.len() as i64 != p.0 * p.1 {
        return Err(LabError::pre("periodic block does not match its period"));
    }
    Ok(Arc::new(PeriodicPoint { p, block }))
}

type Rule = dyn Fn(LatticePoint) -> Sym + Send + Sync;

/// A point given by a closed-form rule.
pub struct FnPoint {
    pub name: String,
    pub rule: Box<Rule>,
    pub period: Option<(i64, i64)>,
}

impl PointOracle for FnPoint {
    fn eval(&self, t: LatticePoint) -> Sym {
        (self.rule)(t)
    }
    fn provenance(&self) -> String {
        self.name.clone()
    }
    fn period(&self) -> Option<(i64, i64)> {
        self.period
    }
}

pub fn from_fn(name: impl Into<String>, rule: impl Fn(LatticePoint) -> Sym + Send + Sync + 'static) -> Point {
    Arc::new(FnPoint {
        name: name.into(),
        rule: Box::new(rule),
        period: None,
    })
}

/// `base` with finitely many coordinates replaced.
pub struct Overlay {
    pub base: Point,
    pub overrides: HashMap<LatticePoint, Sym>,
}

impl PointOracle for Overlay {
    fn eval(&self, t: LatticePoint) -> Sym {
        match self.overrides.get(&t) {
            Some(&s) => s,
            None => self.base.eval(t),
        }
    }
    fn provenance(&self) -> String {
        format!("{}+overlay[{}]", self.base.provenance(), self.overrides.len())
    }
}

pub fn overlay(base: &Point, overrides: HashMap<LatticePoint, Sym>) -> Point {
    Arc::new(Overlay {
        base: base.clone(),
        overrides,
    })
}

/// A materialized pattern used as a point. Coordinates outside the window
/// read as `fill` and are counted, so consumers can tell whether a
/// computation strayed off the stored data.
pub struct PatchPoint {
    pub pattern: Pattern,
    pub fill: Sym,
    misses: AtomicU64,
}

impl PatchPoint {
    pub fn new(pattern: Pattern, fill: Sym) -> Self {
        PatchPoint {
            pattern,
            fill,
            misses: AtomicU64::new(0),
        }
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }
}

impl PointOracle for PatchPoint {
    fn eval(&self, t: LatticePoint) -> Sym {
        match self.pattern.at(t) {
            Some(s) => s,
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                self.fill
            }
        }
    }
    fn provenance(&self) -> String {
        "patch".into()
    }
}

/// Symbols on a window, listed in the window's lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub window: FiniteRegion,
    #[serde(rename = "rowMajorValues")]
    pub values: Vec<Sym>,
}

impl Pattern {
    pub fn new(window: FiniteRegion, values: Vec<Sym>) -> LabResult<Self> {
        if window.len() != values.len() {
            return Err(LabError::pre("pattern is not total on its window"));
        }
        Ok(Pattern { window, values })
    }

    pub fn at(&self, t: LatticePoint) -> Option<Sym> {
        self.window.index_of(t).map(|i| self.values[i])
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, sub: &FiniteRegion) -> Option<Pattern> {
        let values = sub.iter().map(|t| self.at(t)).collect::<Option<Vec<_>>>()?;
        Some(Pattern {
            window: sub.clone(),
            values,
        })
    }
}

/// `π_F(x)`
pub fn restrict(x: &Point, f: &FiniteRegion) -> Pattern {
    Pattern {
        window: f.clone(),
        values: f.iter().map(|t| x.eval(t)).collect(),
    }
}

pub fn restrict_values(x: &Point, f: &FiniteRegion) -> Vec<Sym> {
    f.iter().map(|t| x.eval(t)).collect()
}

/// Window patterns seen along a finite segment of the orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageSample {
    pub window: FiniteRegion,
    pub patterns: BTreeSet<Vec<Sym>>,
    pub scan: FiniteRegion,
    /// true only under a periodicity certificate
    pub complete: bool,
}

impl LanguageSample {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains(&self, p: &[Sym]) -> bool {
        self.patterns.contains(p)
    }

    pub fn pattern_list(&self) -> Vec<Pattern> {
        self.patterns
            .iter()
            .map(|v| Pattern {
                window: self.window.clone(),
                values: v.clone(),
            })
            .collect()
    }
}

/// Range of `v` with `window + v ⊆ scan`, as `[lo, hi)`.
fn translation_range(window: &FiniteRegion, scan: &FiniteRegion) -> LabResult<(LatticePoint, LatticePoint)> {
    let (slo, shi) = scan
        .as_rect()
        .ok_or_else(|| LabError::pre("scan region must be a rectangle"))?;
    let (wlo, whi) = window
        .bounds()
        .ok_or_else(|| LabError::pre("empty window"))?;
    let lo = slo - wlo;
    let hi = shi - whi + LatticePoint::new(1, 1);
    if hi.x() <= lo.x() || hi.y() <= lo.y() {
        return Err(LabError::pre("scan is smaller than the window"));
    }
    Ok((lo, hi))
}

pub fn sample_language(x: &Point, window: &FiniteRegion, scan: &FiniteRegion) -> LabResult<LanguageSample> {
    let (lo, hi) = translation_range(window, scan)?;
    let offs: Vec<LatticePoint> = window.points();
    let patterns = (lo.x()..hi.x())
        .into_par_iter()
        .map(|vx| {
            let mut set = BTreeSet::new();
            for vy in lo.y()..hi.y() {
                let v = LatticePoint::new(vx, vy);
                set.insert(offs.iter().map(|&w| x.eval(w + v)).collect::<Vec<_>>());
            }
            set
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    let complete = match x.period() {
        Some((p1, p2)) => hi.x() - lo.x() >= p1 && hi.y() - lo.y() >= p2,
        None => false,
    };
    Ok(LanguageSample {
        window: window.clone(),
        patterns,
        scan: scan.clone(),
        complete,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub window_size: u64,
    pub patterns: u64,
    /// `ln(#patterns)/|F|`; a lower bound unless `exact`
    pub estimate: LogRatio,
}

/// `(1/|F|) ln #patterns` per window, from a finite scan. Lower bounds.
pub fn entropy_estimate(x: &Point, windows: &[FiniteRegion], scan: &FiniteRegion) -> LabResult<Vec<EntropyEstimate>> {
    windows
        .iter()
        .map(|w| {
            let s = sample_language(x, w, scan)?;
            let n = s.len() as u64;
            Ok(EntropyEstimate {
                window_size: w.len() as u64,
                patterns: n,
                estimate: LogRatio {
                    count: LogCount::count(n),
                    area: w.len() as u64,
                    exact: s.complete,
                },
            })
        })
        .collect()
}

/// Something that can count (or lower-bound) its `F`-patterns.
pub trait PatternCounter: Sync {
    fn name(&self) -> String;
    fn pattern_count(&self, f: &FiniteRegion) -> LabResult<LogRatio>;
}

/// Orbit sample of a single point.
pub struct SampledSystem {
    pub point: Point,
    pub scan: FiniteRegion,
}

impl PatternCounter for SampledSystem {
    fn name(&self) -> String {
        format!("sampled:{}", self.point.provenance())
    }
    fn pattern_count(&self, f: &FiniteRegion) -> LabResult<LogRatio> {
        Ok(entropy_estimate(&self.point, std::slice::from_ref(f), &self.scan)?
            .remove(0)
            .estimate)
    }
}

/// Radius `R` with `2^{-R} ≤ ε`, the max-norm disagreement radius.
pub fn eps_radius(eps: &Q) -> LabResult<i64> {
    use num_traits::{One, Signed};
    if !eps.is_positive() || *eps > Q::one() {
        return Err(LabError::pre("epsilon must lie in (0, 1]"));
    }
    let mut r = 0;
    let mut p = Q::one();
    while p > *eps {
        p /= Q::from_integer(2.into());
        r += 1;
    }
    Ok(r)
}

/// Size of a greedy separated subset of the sample: members pairwise
/// disagree somewhere on `F + [−R, R]^d`.
pub fn separated_set_estimate(points: &[Point], f: &FiniteRegion, eps: &Q) -> LabResult<usize> {
    if points.is_empty() {
        return Err(LabError::pre("empty sample"));
    }
    let r = eps_radius(eps)?;
    let win = if f.dim() == 1 {
        f.minkowski(&FiniteRegion::interval(-r, r + 1))
    } else {
        f.minkowski(&FiniteRegion::centered_square(-r, r))
    };
    let mut kept: Vec<Vec<Sym>> = Vec::new();
    for x in points {
        let p = restrict_values(x, &win);
        if !kept.contains(&p) {
            kept.push(p);
        }
    }
    Ok(kept.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Minimality {
    /// every window pattern occurs in every `gap × gap` box of translates
    Gap { gap: i64, patterns: usize },
    Inconclusive { reason: String },
}

/// Syndeticity of every window pattern seen in the scan.
pub fn minimality_certificate(x: &Point, window: &FiniteRegion, scan: &FiniteRegion) -> LabResult<Minimality> {
    let (wlo, whi) = window.bounds().ok_or_else(|| LabError::pre("empty window"))?;
    let (slo, shi) = scan.as_rect().ok_or_else(|| LabError::pre("scan must be a rectangle"))?;
    let one_d = window.dim() == 1;
    let wx = whi.x() - wlo.x();
    let wy = whi.y() - wlo.y();
    if shi.x() - slo.x() < 8 * wx || (!one_d && shi.y() - slo.y() < 8 * wy) {
        return Err(LabError::pre("scan must be at least 8x the window in each direction"));
    }
    let (lo, hi) = translation_range(window, scan)?;
    let n1 = (hi.x() - lo.x()) as usize;
    let n2 = (hi.y() - lo.y()) as usize;
    let offs = window.points();
    let mut ids: HashMap<Vec<Sym>, usize> = HashMap::new();
    let mut grid = vec![0usize; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let v = lo + LatticePoint::new(i as i64, j as i64);
            let p: Vec<Sym> = offs.iter().map(|&w| x.eval(w + v)).collect();
            let next = ids.len();
            grid[i * n2 + j] = *ids.entry(p).or_insert(next);
        }
    }
    let limit = if one_d { n1 / 2 } else { n1.min(n2) / 2 };
    let npat = ids.len();
    let mut worst = 1usize;
    for pid in 0..npat {
        let mut pre = vec![0u32; (n1 + 1) * (n2 + 1)];
        for i in 0..n1 {
            for j in 0..n2 {
                let c = (grid[i * n2 + j] == pid) as u32;
                pre[(i + 1) * (n2 + 1) + j + 1] =
                    c + pre[i * (n2 + 1) + j + 1] + pre[(i + 1) * (n2 + 1) + j] - pre[i * (n2 + 1) + j];
            }
        }
        let covered = |g: usize| {
            let gy = if one_d { 1 } else { g };
            for i in 0..=(n1 - g) {
                for j in 0..=(n2 - gy) {
                    let s = pre[(i + g) * (n2 + 1) + j + gy] + pre[i * (n2 + 1) + j]
                        - pre[i * (n2 + 1) + j + gy]
                        - pre[(i + g) * (n2 + 1) + j];
                    if s == 0 {
                        return false;
                    }
                }
            }
            true
        };
        if !covered(limit.max(1)) {
            return Ok(Minimality::Inconclusive {
                reason: format!("a pattern has gaps beyond half the scan ({limit})"),
            });
        }
        let (mut a, mut b) = (worst, limit.max(1));
        if covered(a) {
            continue;
        }
        while b - a > 1 {
            let m = (a + b) / 2;
            if covered(m) {
                b = m;
            } else {
                a = m;
            }
        }
        worst = b;
    }
    Ok(Minimality::Gap {
        gap: worst as i64,
        patterns: npat,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzCoord {
    pub t: LatticePoint,
    /// least certified `(p_h, p_v)`, if any
    pub period: Option<(i64, i64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToeplitzReport {
    pub max_exp: u32,
    pub odd_max: i64,
    pub coords: Vec<ToeplitzCoord>,
}

impl ToeplitzReport {
    pub fn all_certified(&self) -> bool {
        self.coords.iter().all(|c| c.period.is_some())
    }

    pub fn failures(&self) -> Vec<LatticePoint> {
        self.coords.iter().filter(|c| c.period.is_none()).map(|c| c.t).collect()
    }
}

/// Candidate lattices `diag(2^a, c·2^b)` with `a, b ≤ max_exp` and odd
/// `c ≤ odd_max`, ordered by index. For one-dimensional points only the
/// first factor is used.
pub fn toeplitz_candidates(max_exp: u32, odd_max: i64, one_d: bool) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for a in 0..=max_exp {
        if one_d {
            out.push((1i64 << a, 1));
            continue;
        }
        for b in 0..=max_exp {
            let mut c = 1;
            while c <= odd_max.max(1) {
                out.push((1i64 << a, c << b));
                c += 2;
            }
        }
    }
    out.sort_by_key(|&(p, q)| (p * q, p, q));
    out.dedup();
    out
}

/// Number of lattice steps in each direction checked around `t`.
pub const TOEPLITZ_REACH: i64 = 4;

pub fn toeplitz_certificate(x: &Point, coords: &FiniteRegion, max_exp: u32, odd_max: i64) -> ToeplitzReport {
    let one_d = coords.dim() == 1;
    let cands = toeplitz_candidates(max_exp, odd_max, one_d);
    let pts = coords.points();
    let res: Vec<ToeplitzCoord> = pts
        .par_iter()
        .map(|&t| {
            let s = x.eval(t);
            let period = cands.iter().copied().find(|&(ph, pv)| {
                let jr = if one_d { 0 } else { TOEPLITZ_REACH };
                (-TOEPLITZ_REACH..=TOEPLITZ_REACH).all(|i| {
                    (-jr..=jr).all(|j| x.eval(t + LatticePoint::new(i * ph, j * pv)) == s)
                })
            });
            ToeplitzCoord { t, period }
        })
        .collect();
    ToeplitzReport {
        max_exp,
        odd_max,
        coords: res,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn checker() -> Point {
        periodic((2, 3), vec![0, 1, 2, 3, 4, 5]).unwrap()
    }

    #[test]
    fn translate_composes() {
        let x = from_fn("lin", |t| (t.x() * 7 + t.y() * 3).rem_euclid(11) as Sym);
        let a = translate(&translate(&x, LatticePoint::new(2, -1)), LatticePoint::new(-5, 4));
        assert_eq!(shift_offset(&a), LatticePoint::new(-3, 3));
        let b = translate(&a, LatticePoint::new(3, -3));
        assert!(b.as_shift().is_none());
        for t in FiniteRegion::centered_square(-3, 3).iter() {
            assert_eq!(a.eval(t), x.eval(t + LatticePoint::new(-3, 3)));
            assert_eq!(b.eval(t), x.eval(t));
        }
    }

    #[test]
    fn restrict_and_translate() {
        let x = checker();
        let f = FiniteRegion::rect_dims(3, 2);
        let v = LatticePoint::new(1, 4);
        let p = restrict(&translate(&x, v), &f);
        let q = restrict(&x, &f.translate(v));
        assert_eq!(p.values, q.values);
        assert_eq!(restrict(&constant(3), &f).values, vec![3; 6]);
    }

    #[test]
    fn language_of_periodic_point() {
        let x = checker();
        let s = sample_language(&x, &FiniteRegion::square(2), &FiniteRegion::square(12)).unwrap();
        assert!(s.complete);
        assert_eq!(s.len(), 6);
        let c = sample_language(&constant(1), &FiniteRegion::square(3), &FiniteRegion::square(9)).unwrap();
        assert_eq!(c.len(), 1);
        assert!(sample_language(&x, &FiniteRegion::square(5), &FiniteRegion::square(4)).is_err());
    }

    #[test]
    fn entropy_of_constant_and_free_box() {
        let e = entropy_estimate(&constant(0), &[FiniteRegion::square(2), FiniteRegion::square(4)], &FiniteRegion::square(16)).unwrap();
        assert!(e.iter().all(|r| r.estimate.nats() == 0.0));
        let mut block = Vec::new();
        for i in 0..16u32 {
            for j in 0..16u32 {
                block.push(((i * 16 + j).wrapping_mul(2654435761) >> 7) % 4);
            }
        }
        let x = periodic((16, 16), block).unwrap();
        let r = entropy_estimate(&x, &[FiniteRegion::square(1)], &FiniteRegion::square(32)).unwrap();
        assert_eq!(r[0].patterns, 4);
        assert!((r[0].estimate.nats() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn separated_sets() {
        let x = checker();
        let pts: Vec<Point> = vec![x.clone(), x.clone(), x.clone()];
        assert_eq!(separated_set_estimate(&pts, &FiniteRegion::square(1), &q(1, 2)).unwrap(), 1);
        let shifts: Vec<Point> = (0..6).map(|i| translate(&x, LatticePoint::new(i / 3, i % 3))).collect();
        assert_eq!(separated_set_estimate(&shifts, &FiniteRegion::square(1), &q(1, 1)).unwrap(), 6);
        assert!(separated_set_estimate(&[], &FiniteRegion::square(1), &q(1, 1)).is_err());
        assert_eq!(eps_radius(&q(1, 8)).unwrap(), 3);
        assert_eq!(eps_radius(&q(1, 5)).unwrap(), 3);
    }

    #[test]
    fn minimality_gaps() {
        let p4 = periodic((4, 4), (0..16).collect()).unwrap();
        let g = minimality_certificate(&p4, &FiniteRegion::square(2), &FiniteRegion::square(32)).unwrap();
        assert_eq!(g, Minimality::Gap { gap: 4, patterns: 16 });
        let c = minimality_certificate(&constant(2), &FiniteRegion::square(2), &FiniteRegion::square(16)).unwrap();
        assert_eq!(c, Minimality::Gap { gap: 1, patterns: 1 });
        let spike = from_fn("spike", |t| (t == LatticePoint::new(5, 5)) as Sym);
        let s = minimality_certificate(&spike, &FiniteRegion::square(1), &FiniteRegion::square(16)).unwrap();
        assert!(matches!(s, Minimality::Inconclusive { .. }));
        assert!(minimality_certificate(&p4, &FiniteRegion::square(4), &FiniteRegion::square(16)).is_err());
    }

    #[test]
    fn toeplitz_periodic_and_not() {
        let x = checker();
        let r = toeplitz_certificate(&x, &FiniteRegion::centered_square(-4, 4), 4, 3);
        assert!(r.all_certified());
        assert!(r.coords.iter().all(|c| c.period == Some((2, 3))));
        // pure dyadic lattices miss the vertical period 3
        let d = toeplitz_certificate(&x, &FiniteRegion::centered_square(-4, 4), 4, 1);
        assert!(!d.all_certified());
        // a Sturmian row is not Toeplitz
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let st = from_fn("sturmian", move |t| {
            let n = t.x() as f64;
            (((n + 1.0) * alpha).floor() - (n * alpha).floor()) as Sym
        });
        let s = toeplitz_certificate(&st, &FiniteRegion::interval(-16, 17), 8, 1);
        assert!(!s.all_certified());
    }

    proptest! {
        #[test]
        fn translation_is_an_action(ux in -20i64..20, uy in -20i64..20, vx in -20i64..20, vy in -20i64..20, tx in -9i64..9, ty in -9i64..9) {
            let x = from_fn("mix", |t| (t.x().wrapping_mul(31) ^ t.y().wrapping_mul(17)).rem_euclid(5) as Sym);
            let u = LatticePoint::new(ux, uy);
            let v = LatticePoint::new(vx, vy);
            let t = LatticePoint::new(tx, ty);
            prop_assert_eq!(translate(&translate(&x, u), v).eval(t), translate(&x, u + v).eval(t));
        }

        #[test]
        fn language_closed_under_subwindows(seed in 0u32..1000) {
            let x = from_fn("hash", move |t| (((t.x() * 73856093) ^ (t.y() * 19349663)) as u32 ^ seed).count_ones() % 3);
            let scan = FiniteRegion::square(14);
            let big = sample_language(&x, &FiniteRegion::square(3), &scan).unwrap();
            let sub = FiniteRegion::rect_dims(2, 3);
            let small = sample_language(&x, &sub, &scan).unwrap();
            for p in big.pattern_list() {
                let r = p.restrict(&sub).unwrap();
                prop_assert!(small.contains(&r.values));
            }
        }

        #[test]
        fn toeplitz_success_is_sound(p1 in 1i64..5, p2 in 1i64..5, tx in -6i64..6, ty in -6i64..6) {
            let block: Vec<Sym> = (0..p1 * p2).map(|i| (i % 3) as Sym).collect();
            let x = periodic((p1, p2), block).unwrap();
            let t = LatticePoint::new(tx, ty);
            let r = toeplitz_certificate(&x, &FiniteRegion::singleton(2, t), 3, 3);
            if let Some((a, b)) = r.coords[0].period {
                for i in -3..=3 {
                    for j in -3..=3 {
                        prop_assert_eq!(x.eval(t + LatticePoint::new(i * a, j * b)), x.eval(t));
                    }
                }
            }
        }
    }
}
