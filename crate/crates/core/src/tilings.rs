//! Tilings of Z^d by finitely many shapes over diagonal center lattices,
//! nested sequences, tiling entropy, property ID checks and the
//! residually finite monotiling recursion.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::lattice::{is_invariant, FiniteRegion, LatticePoint};
use crate::rational::{q, RatPair, Q};
use crate::subshift::{self, EntropyEstimate, FnPoint, Point, Sym};

/// `offset + diag(moduli)·Z^d`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterLattice {
    pub offset: LatticePoint,
    pub moduli: (i64, i64),
}

impl CenterLattice {
    pub fn new(offset: LatticePoint, moduli: (i64, i64)) -> LabResult<Self> {
        if moduli.0 < 1 || moduli.1 < 1 {
            return Err(LabError::pre("center moduli must be positive"));
        }
        Ok(CenterLattice { offset, moduli })
    }

    pub fn contains(&self, c: LatticePoint) -> bool {
        let d = c - self.offset;
        d.x().rem_euclid(self.moduli.0) == 0 && d.y().rem_euclid(self.moduli.1) == 0
    }

    /// Centers inside the rectangle `[lo, hi)`, lexicographic.
    pub fn in_rect(&self, lo: LatticePoint, hi: LatticePoint) -> Vec<LatticePoint> {
        let first = |lo: i64, off: i64, m: i64| lo + (off - lo).rem_euclid(m);
        let x0 = first(lo.x(), self.offset.x(), self.moduli.0);
        let y0 = first(lo.y(), self.offset.y(), self.moduli.1);
        let mut out = Vec::new();
        let mut x = x0;
        while x < hi.x() {
            let mut y = y0;
            while y < hi.y() {
                out.push(LatticePoint::new(x, y));
                y += self.moduli.1;
            }
            x += self.moduli.0;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tiling {
    pub shapes: Vec<FiniteRegion>,
    pub centers: Vec<CenterLattice>,
}

impl Tiling {
    pub fn new(pairs: Vec<(FiniteRegion, CenterLattice)>) -> LabResult<Self> {
        if pairs.is_empty() || pairs.iter().any(|(s, _)| s.is_empty()) {
            return Err(LabError::pre("tiling needs nonempty shapes"));
        }
        let (shapes, centers) = pairs.into_iter().unzip();
        Ok(Tiling { shapes, centers })
    }

    pub fn dim(&self) -> usize {
        self.shapes[0].dim()
    }

    /// Every tile `(shape index, center)` meeting the rectangle `[lo, hi)`.
    pub fn tiles_meeting(&self, lo: LatticePoint, hi: LatticePoint) -> Vec<(usize, LatticePoint)> {
        let mut out = Vec::new();
        for (i, (s, c)) in self.shapes.iter().zip(&self.centers).enumerate() {
            let (slo, shi) = s.bounds().unwrap();
            // c + slo < hi and c + shi > lo
            for ctr in c.in_rect(lo - shi + LatticePoint::new(1, 1), hi - slo) {
                let tile = s.translate(ctr);
                let hit = match tile.as_rect() {
                    Some(_) => true,
                    None => tile.iter().any(|p| {
                        lo.x() <= p.x() && p.x() < hi.x() && lo.y() <= p.y() && p.y() < hi.y()
                    }),
                };
                if hit {
                    out.push((i, ctr));
                }
            }
        }
        out
    }

    /// Index of the unique tile containing `t`, if exactly one does.
    pub fn tile_of(&self, t: LatticePoint) -> Option<(usize, LatticePoint)> {
        let hits = self.tiles_meeting(t, t + LatticePoint::new(1, 1));
        let inside: Vec<_> = hits
            .into_iter()
            .filter(|&(i, c)| self.shapes[i].contains(t - c))
            .collect();
        (inside.len() == 1).then(|| inside[0])
    }
}

/// `[0,a)×[0,b)` with centers `diag(a,b)·Z^2`; for `d = 1` pass `b = 1`.
pub fn rectangle_monotiling(dims: (i64, i64)) -> LabResult<Tiling> {
    if dims.0 < 1 || dims.1 < 1 {
        return Err(LabError::pre("rectangle sides must be positive"));
    }
    Tiling::new(vec![(
        FiniteRegion::rect_dims(dims.0, dims.1),
        CenterLattice::new(LatticePoint::ZERO, dims)?,
    )])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TilingDefect {
    Gap { at: LatticePoint },
    Overlap { at: LatticePoint, tiles: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingCheck {
    pub ok: bool,
    pub tiles: usize,
    pub defects: Vec<TilingDefect>,
}

/// Every point of the window is covered by exactly one tile.
pub fn verify_tiling(t: &Tiling, window: &FiniteRegion) -> LabResult<TilingCheck> {
    let (lo, hi) = window.bounds().ok_or_else(|| LabError::pre("empty window"))?;
    let w = (hi.x() - lo.x()) as usize;
    let h = (hi.y() - lo.y()) as usize;
    let mut cover = vec![0u32; w * h];
    let tiles = t.tiles_meeting(lo, hi);
    for &(i, c) in &tiles {
        let shape = &t.shapes[i];
        for p in shape.iter() {
            let p = p + c;
            if lo.x() <= p.x() && p.x() < hi.x() && lo.y() <= p.y() && p.y() < hi.y() {
                cover[(p.x() - lo.x()) as usize * h + (p.y() - lo.y()) as usize] += 1;
            }
        }
    }
    let mut defects = Vec::new();
    for p in window.iter() {
        let n = cover[(p.x() - lo.x()) as usize * h + (p.y() - lo.y()) as usize];
        if n == 0 {
            defects.push(TilingDefect::Gap { at: p });
        } else if n > 1 {
            defects.push(TilingDefect::Overlap { at: p, tiles: n as usize });
        }
    }
    let tiles_in = tiles
        .iter()
        .filter(|&&(i, c)| t.shapes[i].iter().any(|p| window.contains(p + c)))
        .count();
    Ok(TilingCheck {
        ok: defects.is_empty(),
        tiles: tiles_in,
        defects,
    })
}

/// One piece `S_j + g_j` of a refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementPiece {
    pub shape: usize,
    pub offset: LatticePoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NestedTilingSequence {
    pub levels: Vec<Tiling>,
    /// `refinements[n][i]`: partition of shape `i` of level `n` into shapes
    /// of level `n − 1`; empty for level 0
    pub refinements: Vec<Vec<Vec<RefinementPiece>>>,
}

/// Rectangles `(A_k, B_k)` with refinement offsets `(i A_{k−1}, j B_{k−1})`.
/// Non-dividing schedules still get offsets (floor counts), so the
/// mismatch surfaces in `verify_tightly_nested`.
pub fn nested_rectangles(dims: &[(i64, i64)]) -> LabResult<NestedTilingSequence> {
    let mut levels = Vec::new();
    let mut refinements = Vec::new();
    for (n, &d) in dims.iter().enumerate() {
        levels.push(rectangle_monotiling(d)?);
        if n == 0 {
            refinements.push(vec![vec![]]);
            continue;
        }
        let p = dims[n - 1];
        let mut pieces = Vec::new();
        for i in 0..(d.0 + p.0 - 1) / p.0 {
            for j in 0..(d.1 + p.1 - 1) / p.1 {
                pieces.push(RefinementPiece {
                    shape: 0,
                    offset: LatticePoint::new(i * p.0, j * p.1),
                });
            }
        }
        refinements.push(vec![pieces]);
    }
    Ok(NestedTilingSequence { levels, refinements })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NestingDefect {
    /// pieces of the declared refinement do not partition the shape
    NotPartition { shape: usize, at: LatticePoint },
    /// `g_j + c` is not a center for `S_j`
    OffsetNotCenter { piece: usize, center: LatticePoint },
}

pub fn verify_tightly_nested(seq: &NestedTilingSequence, level: usize, window: &FiniteRegion) -> LabResult<Result<(), NestingDefect>> {
    if level == 0 || level >= seq.levels.len() {
        return Err(LabError::pre("level index must be in [1, levels)"));
    }
    let (lo, hi) = window.bounds().ok_or_else(|| LabError::pre("empty window"))?;
    let cur = &seq.levels[level];
    let prev = &seq.levels[level - 1];
    for (i, shape) in cur.shapes.iter().enumerate() {
        let pieces = &seq.refinements[level][i];
        let mut count = std::collections::HashMap::new();
        for pc in pieces {
            for p in prev.shapes[pc.shape].iter() {
                *count.entry(p + pc.offset).or_insert(0u32) += 1;
            }
        }
        for p in shape.iter() {
            if count.get(&p) != Some(&1) {
                return Ok(Err(NestingDefect::NotPartition { shape: i, at: p }));
            }
        }
        if let Some((&p, _)) = count.iter().filter(|(p, _)| !shape.contains(**p)).min() {
            return Ok(Err(NestingDefect::NotPartition { shape: i, at: p }));
        }
    }
    for (i, c) in cur.tiles_meeting(lo, hi) {
        for (j, pc) in seq.refinements[level][i].iter().enumerate() {
            if !prev.centers[pc.shape].contains(pc.offset + c) {
                return Ok(Err(NestingDefect::OffsetNotCenter { piece: j, center: c }));
            }
        }
    }
    Ok(Ok(()))
}

/// The point `x_t = i + 1` on centers of shape `i`, `0` elsewhere.
pub fn tiling_point(t: &Tiling) -> Point {
    let centers = t.centers.clone();
    let mut per = (1i64, 1i64);
    for c in &centers {
        per = (lcm(per.0, c.moduli.0), lcm(per.1, c.moduli.1));
    }
    std::sync::Arc::new(FnPoint {
        name: "tiling".into(),
        rule: Box::new(move |p| {
            centers
                .iter()
                .position(|c| c.contains(p))
                .map(|i| i as Sym + 1)
                .unwrap_or(0)
        }),
        period: Some(per),
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

pub fn tiling_entropy_estimate(t: &Tiling, windows: &[FiniteRegion], scan: &FiniteRegion) -> LabResult<Vec<EntropyEstimate>> {
    subshift::entropy_estimate(&tiling_point(t), windows, scan)
}

/// Analytic upper bound `ln|S|/|S|` on the tiling entropy contribution of a
/// rectangle monotiling.
pub fn monotiling_entropy_bound(shape_size: u64) -> f64 {
    (shape_size as f64).ln() / shape_size as f64
}

/// Smallest `[0,a)×[0,b)` with `F + (C ∩ dilated window) ⊇ window`; each
/// window point `w` is reached from a center `c ≤ w` coordinatewise.
pub fn syndeticity_bound(centers: &CenterLattice, window: &FiniteRegion) -> LabResult<FiniteRegion> {
    let (lo, hi) = window.bounds().ok_or_else(|| LabError::pre("empty window"))?;
    let dil = LatticePoint::new(centers.moduli.0, centers.moduli.1);
    let cs = centers.in_rect(lo - dil, hi);
    if cs.is_empty() {
        return Err(LabError::pre("no centers near the window"));
    }
    let mut xs: Vec<i64> = cs.iter().map(|c| c.x()).collect();
    let mut ys: Vec<i64> = cs.iter().map(|c| c.y()).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let side = |v: &[i64], a: i64, b: i64| -> LabResult<i64> {
        let mut need = 1;
        for w in a..b {
            let k = v.partition_point(|&c| c <= w);
            if k == 0 {
                return Err(LabError::pre("centers do not reach the window start"));
            }
            need = need.max(w - v[k - 1] + 1);
        }
        Ok(need)
    };
    let a = side(&xs, lo.x(), hi.x())?;
    let b = if window.dim() == 1 { 1 } else { side(&ys, lo.y(), hi.y())? };
    Ok(if window.dim() == 1 {
        FiniteRegion::interval(0, a)
    } else {
        FiniteRegion::rect_dims(a, b)
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyIdParams {
    pub tests: Vec<FiniteRegion>,
    #[serde(with = "crate::rational::serde_q_vec")]
    pub deltas: Vec<Q>,
    pub window: FiniteRegion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict<T> {
    Found(T),
    Inconclusive(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnCover {
    pub level: usize,
    pub shape: usize,
    pub step: i64,
    pub covered: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyIdReport {
    pub direction: LatticePoint,
    /// per test set, least level (1-based) with a tile containing it
    pub containment: Vec<Verdict<usize>>,
    /// per δ, least level (1-based) with `|H ∩ T| ≤ δ|T|` on visible tiles
    pub density: Vec<Verdict<usize>>,
    pub density_ratios: Vec<RatPair>,
    pub column_cover: Vec<ColumnCover>,
    /// `ln|S|/|S|` per level for single-shape levels
    pub entropy_trend: Vec<f64>,
}

fn h_count(tile: &FiniteRegion, h: LatticePoint) -> u64 {
    let (lo, hi) = tile.bounds().unwrap();
    let mut kr = (i64::MIN, i64::MAX);
    for (a, l, u) in [(h.x(), lo.x(), hi.x() - 1), (h.y(), lo.y(), hi.y() - 1)] {
        if a == 0 {
            if l > 0 || u < 0 {
                return 0;
            }
            continue;
        }
        let (mut k0, mut k1) = (l.div_euclid(a), u.div_euclid(a) + 1);
        if a < 0 {
            std::mem::swap(&mut k0, &mut k1);
        }
        kr = (kr.0.max(k0.min(k1) - 1), kr.1.min(k0.max(k1) + 1));
    }
    (kr.0..=kr.1)
        .filter(|&k| tile.contains(h.scale(k)))
        .count() as u64
}

pub fn check_property_id(seq: &NestedTilingSequence, h: LatticePoint, params: &PropertyIdParams) -> LabResult<PropertyIdReport> {
    if seq.levels.is_empty() {
        return Err(LabError::pre("empty tiling sequence"));
    }
    if h.is_zero() {
        return Err(LabError::pre("direction must be nonzero"));
    }
    let (wlo, whi) = params.window.bounds().ok_or_else(|| LabError::pre("empty window"))?;

    let containment = params
        .tests
        .iter()
        .map(|f| {
            let (flo, fhi) = match f.bounds() {
                Some(b) => b,
                None => return Verdict::Found(1),
            };
            for (n, lv) in seq.levels.iter().enumerate() {
                let ok = lv
                    .tiles_meeting(flo, fhi)
                    .into_iter()
                    .any(|(i, c)| f.iter().all(|p| lv.shapes[i].contains(p - c)));
                if ok {
                    return Verdict::Found(n + 1);
                }
            }
            Verdict::Inconclusive("no level has a tile containing the set".into())
        })
        .collect();

    let mut worst = Vec::new();
    for lv in &seq.levels {
        let mut w = q(0, 1);
        for (i, c) in lv.tiles_meeting(wlo, whi) {
            let tile = lv.shapes[i].translate(c);
            let r = Q::new(h_count(&tile, h).into(), (tile.len() as u64).into());
            w = w.max(r);
        }
        worst.push(w);
    }
    let density = params
        .deltas
        .iter()
        .map(|d| match worst.iter().position(|w| w <= d) {
            Some(n) => Verdict::Found(n + 1),
            None => Verdict::Inconclusive("no built level is sparse enough".into()),
        })
        .collect();

    let mut column_cover = Vec::new();
    for (n, lv) in seq.levels.iter().enumerate() {
        let Some((i, c0)) = lv.tile_of(LatticePoint::ZERO) else {
            continue;
        };
        let cl = &lv.centers[i];
        let step = (1..=cl.moduli.0.max(1) * cl.moduli.1.max(1))
            .find(|&m| cl.contains(c0 + h.scale(m)))
            .unwrap_or(0);
        let covered = step > 0
            && params
                .window
                .iter()
                .filter(|p| on_line(*p, h))
                .all(|p| {
                    let k = line_index(p, h);
                    let j = k.div_euclid(step);
                    (j - 1..=j + 1).any(|jj| lv.shapes[i].contains(p - c0 - h.scale(jj * step)))
                });
        column_cover.push(ColumnCover {
            level: n + 1,
            shape: i,
            step,
            covered,
        });
    }
    let entropy_trend = seq
        .levels
        .iter()
        .map(|lv| monotiling_entropy_bound(lv.shapes[0].len() as u64))
        .collect();
    Ok(PropertyIdReport {
        direction: h,
        containment,
        density,
        density_ratios: worst.iter().map(RatPair::from).collect(),
        column_cover,
        entropy_trend,
    })
}

fn on_line(p: LatticePoint, h: LatticePoint) -> bool {
    p.x() * h.y() == p.y() * h.x()
        && (h.x() == 0 || p.x() % h.x() == 0)
        && (h.y() == 0 || p.y() % h.y() == 0)
}

fn line_index(p: LatticePoint, h: LatticePoint) -> i64 {
    if h.x() != 0 {
        p.x() / h.x()
    } else {
        p.y() / h.y()
    }
}

/// Exact certificate numbers for one level of the monotiling recursion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResFiniteLevel {
    pub k: usize,
    pub m: i64,
    pub o: i64,
    pub contains_e: bool,
    pub invariance: RatPair,
    pub invariance_ok: bool,
    pub h_density: RatPair,
    pub h_density_ok: bool,
    /// `|S_k ∩ F| / |F|` against `1 − ε_k/2`
    pub shape_overlap: RatPair,
    pub shape_overlap_ok: bool,
    /// boundary subtiles versus `δ|F|/|S_{k−1}|` (diagnostic only)
    pub boundary_count: u64,
    pub boundary_allowance: RatPair,
}

impl ResFiniteLevel {
    pub fn passes(&self) -> bool {
        self.contains_e && self.invariance_ok && self.h_density_ok && self.shape_overlap_ok
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResFiniteResult {
    pub sequence: NestedTilingSequence,
    pub levels: Vec<ResFiniteLevel>,
}

/// Cap on the square side searched per level.
pub const RESFINITE_MAX_SIDE: i64 = 1 << 24;

/// `S_k = S_{k−1} + (F_k ∩ N_{k−1})` over `Γ = Z^2` with `N_k = (m_k Z)^2`.
/// Level 0 is `S_0 = {0}`, `N_0 = Z^2`; `e[0]` and `eps[0]` are ignored
/// beyond validation.
pub fn resfinite_monotiling_recursion(e: &[FiniteRegion], eps: &[Q], depth: usize) -> LabResult<ResFiniteResult> {
    if depth == 0 || e.len() < depth || eps.len() < depth {
        return Err(LabError::pre("need depth ≥ 1 and that many targets"));
    }
    if eps[0] != q(1, 1) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::pre("epsilons must decrease strictly from 1"));
    }
    if e[0].points() != vec![LatticePoint::ZERO] {
        return Err(LabError::pre("first target must be {0}"));
    }
    let one = q(1, 1);
    let h = LatticePoint::new(0, 1);
    let mut levels = Vec::new();
    let mut ms = vec![1i64];
    let mut os = vec![0i64];
    for k in 1..depth {
        let (elo, ehi) = e[k].bounds().ok_or_else(|| LabError::pre("empty target"))?;
        let need_o = (-elo.x()).max(-elo.y()).max(0);
        let need_hi = (ehi.x()).max(ehi.y());
        let (mp, op) = (ms[k - 1], os[k - 1]);
        let mut c = 0;
        while op + c < need_o {
            c += mp;
        }
        let o = op + c;
        let delta = &eps[k] / q(2, 1);
        let mut m = 2 * mp;
        let best = loop {
            let s = FiniteRegion::rect(LatticePoint::new(-o, -o), LatticePoint::new(m - o, m - o));
            let size = (m * m) as u64;
            let contains_e = m - o >= need_hi && e[k].iter().all(|p| s.contains(p));
            let inv = is_invariant(&s, &e[k], &eps[k])?;
            let hd = Q::new(h_count(&s, h).into(), size.into());
            let ov = Q::new((((m - op) * (m - op)) as u64).into(), size.into());
            // boundary subtiles: S_{k-1} + j·m_{k-1} not inside F = [-c, m-c)
            let n1 = m / mp;
            let good1 = (0..n1)
                .map(|j| j * mp - c)
                .filter(|&g| g - op >= -c && g + mp - op <= m - c)
                .count() as i64;
            let boundary = (n1 * n1 - good1 * good1) as u64;
            let allowance = &delta * Q::new(size.into(), ((mp * mp) as u64).into());
            let lvl = ResFiniteLevel {
                k,
                m,
                o,
                contains_e,
                invariance_ok: inv.holds,
                invariance: RatPair::from(&inv.ratio),
                h_density_ok: hd <= eps[k],
                h_density: RatPair::from(&hd),
                shape_overlap_ok: ov >= &one - &delta,
                shape_overlap: RatPair::from(&ov),
                boundary_count: boundary,
                boundary_allowance: RatPair::from(&allowance),
            };
            if m > 2 * k as i64 && lvl.passes() {
                break lvl;
            }
            if m >= RESFINITE_MAX_SIDE {
                return Err(LabError::infeasible(
                    format!("level {k} targets"),
                    format!("no side up to {m}: last invariance ratio {}", inv.ratio),
                ));
            }
            m *= 2;
        };
        levels.push(best);
        ms.push(m);
        os.push(o);
    }

    let mut tl = Vec::new();
    let mut refinements = Vec::new();
    for k in 0..depth {
        let (m, o) = (ms[k], os[k]);
        let shape = FiniteRegion::rect(LatticePoint::new(-o, -o), LatticePoint::new(m - o, m - o));
        tl.push(Tiling::new(vec![(shape, CenterLattice::new(LatticePoint::ZERO, (m, m))?)])?);
        if k == 0 {
            refinements.push(vec![vec![]]);
            continue;
        }
        let (mp, c) = (ms[k - 1], o - os[k - 1]);
        let mut pieces = Vec::new();
        for i in 0..m / mp {
            for j in 0..m / mp {
                pieces.push(RefinementPiece {
                    shape: 0,
                    offset: LatticePoint::new(i * mp - c, j * mp - c),
                });
            }
        }
        refinements.push(vec![pieces]);
    }
    Ok(ResFiniteResult {
        sequence: NestedTilingSequence {
            levels: tl,
            refinements,
        },
        levels,
    })
}

/// Standard targets `E_k = [−k, k]^2`, `ε_k = 2^{−k}`.
pub fn standard_resfinite_targets(depth: usize) -> (Vec<FiniteRegion>, Vec<Q>) {
    let e = (0..depth)
        .map(|k| FiniteRegion::centered_square(-(k as i64), k as i64))
        .collect();
    let eps = (0..depth).map(|k| Q::new(1.into(), (1u64 << k).into())).collect();
    (e, eps)
}
