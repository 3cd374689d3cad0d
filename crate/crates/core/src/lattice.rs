//! Geometry of Z^d for d in {1, 2}: regions, word metric, invariance,
//! separated sets and spanning trees.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::rational::{qu, RatPair, Q};

/// A point of Z^d. One-dimensional points keep a zero second coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LatticePoint(pub [i64; 2]);

impl LatticePoint {
    pub const ZERO: LatticePoint = LatticePoint([0, 0]);

    pub const fn new(x: i64, y: i64) -> Self {
        LatticePoint([x, y])
    }

    pub const fn d1(x: i64) -> Self {
        LatticePoint([x, 0])
    }

    pub fn x(self) -> i64 {
        self.0[0]
    }

    pub fn y(self) -> i64 {
        self.0[1]
    }

    pub fn l1(self) -> i64 {
        self.0[0].abs() + self.0[1].abs()
    }

    pub fn linf(self) -> i64 {
        self.0[0].abs().max(self.0[1].abs())
    }

    pub fn scale(self, k: i64) -> Self {
        LatticePoint([self.0[0] * k, self.0[1] * k])
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0[0], self.0[1])
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, o: Self) -> Self {
        LatticePoint([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, o: Self) -> Self {
        LatticePoint([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> Self {
        LatticePoint([-self.0[0], -self.0[1]])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    /// half-open `[lo, hi)` per coordinate
    Rect { lo: LatticePoint, hi: LatticePoint },
    /// sorted, deduplicated
    Points(Vec<LatticePoint>),
}

/// A finite subset of Z^d. Rectangles are kept symbolic so that large boxes
/// cost nothing until iterated.
#[derive(Clone, Debug)]
pub struct FiniteRegion {
    dim: usize,
    repr: Repr,
}

/// Set equality, whatever the representation.
impl PartialEq for FiniteRegion {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Points(a), Repr::Points(b)) => a == b,
            _ => self.len() == other.len() && self.iter().eq(other.iter()),
        }
    }
}

impl Eq for FiniteRegion {}

impl FiniteRegion {
    /// `[lo, hi)` in each coordinate; empty if any side is empty.
    pub fn rect(lo: LatticePoint, hi: LatticePoint) -> Self {
        let hi = LatticePoint([hi.x().max(lo.x()), hi.y().max(lo.y())]);
        FiniteRegion {
            dim: 2,
            repr: Repr::Rect { lo, hi },
        }
    }

    pub fn rect_dims(a: i64, b: i64) -> Self {
        Self::rect(LatticePoint::ZERO, LatticePoint::new(a, b))
    }

    pub fn square(n: i64) -> Self {
        Self::rect_dims(n, n)
    }

    /// `[lo, hi]^2`, closed on both ends.
    pub fn centered_square(lo: i64, hi: i64) -> Self {
        Self::rect(LatticePoint::new(lo, lo), LatticePoint::new(hi + 1, hi + 1))
    }

    /// One-dimensional `[lo, hi)`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        FiniteRegion {
            dim: 1,
            repr: Repr::Rect {
                lo: LatticePoint::d1(lo),
                hi: LatticePoint::new(hi.max(lo), 1),
            },
        }
    }

    /// `[0, n)^d`
    pub fn cube(dim: usize, n: i64) -> Self {
        if dim == 1 {
            Self::interval(0, n)
        } else {
            Self::square(n)
        }
    }

    pub fn from_points(dim: usize, pts: impl IntoIterator<Item = LatticePoint>) -> Self {
        let mut v: Vec<LatticePoint> = pts.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FiniteRegion {
            dim,
            repr: Repr::Points(v),
        }
    }

    pub fn singleton(dim: usize, p: LatticePoint) -> Self {
        Self::from_points(dim, [p])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_rect(&self) -> Option<(LatticePoint, LatticePoint)> {
        match &self.repr {
            Repr::Rect { lo, hi } => Some((*lo, *hi)),
            Repr::Points(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Rect { lo, hi } => ((hi.x() - lo.x()) * (hi.y() - lo.y())) as usize,
            Repr::Points(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        match &self.repr {
            Repr::Rect { lo, hi } => {
                lo.x() <= p.x() && p.x() < hi.x() && lo.y() <= p.y() && p.y() < hi.y()
            }
            Repr::Points(v) => v.binary_search(&p).is_ok(),
        }
    }

    /// Points in lexicographic order (first coordinate major).
    pub fn iter(&self) -> Box<dyn Iterator<Item = LatticePoint> + '_> {
        match &self.repr {
            Repr::Rect { lo, hi } => {
                let (lo, hi) = (*lo, *hi);
                Box::new(
                    (lo.x()..hi.x()).flat_map(move |x| (lo.y()..hi.y()).map(move |y| LatticePoint::new(x, y))),
                )
            }
            Repr::Points(v) => Box::new(v.iter().copied()),
        }
    }

    pub fn points(&self) -> Vec<LatticePoint> {
        self.iter().collect()
    }

    /// Position of `p` in lexicographic order, if present.
    pub fn index_of(&self, p: LatticePoint) -> Option<usize> {
        match &self.repr {
            Repr::Rect { lo, hi } => {
                if !self.contains(p) {
                    return None;
                }
                let h = hi.y() - lo.y();
                Some(((p.x() - lo.x()) * h + (p.y() - lo.y())) as usize)
            }
            Repr::Points(v) => v.binary_search(&p).ok(),
        }
    }

    pub fn translate(&self, v: LatticePoint) -> Self {
        match &self.repr {
            Repr::Rect { lo, hi } => FiniteRegion {
                dim: self.dim,
                repr: Repr::Rect {
                    lo: *lo + v,
                    hi: *hi + v,
                },
            },
            Repr::Points(p) => FiniteRegion {
                dim: self.dim,
                repr: Repr::Points(p.iter().map(|&q| q + v).collect()),
            },
        }
    }

    pub fn minkowski(&self, other: &FiniteRegion) -> Self {
        if let (Some((a0, a1)), Some((b0, b1))) = (self.as_rect(), other.as_rect()) {
            if !self.is_empty() && !other.is_empty() {
                let mut r = Self::rect(a0 + b0, a1 + b1 - LatticePoint::new(1, 1));
                r.dim = self.dim;
                if self.dim == 1 {
                    r.repr = Repr::Rect {
                        lo: LatticePoint::d1(a0.x() + b0.x()),
                        hi: LatticePoint::new(a1.x() + b1.x() - 1, 1),
                    };
                }
                return r;
            }
        }
        let mut out = HashSet::new();
        for a in self.iter() {
            for b in other.iter() {
                out.insert(a + b);
            }
        }
        Self::from_points(self.dim, out)
    }

    pub fn union(&self, other: &FiniteRegion) -> Self {
        Self::from_points(self.dim, self.iter().chain(other.iter()))
    }

    pub fn intersect(&self, other: &FiniteRegion) -> Self {
        if let (Some((a0, a1)), Some((b0, b1))) = (self.as_rect(), other.as_rect()) {
            let lo = LatticePoint::new(a0.x().max(b0.x()), a0.y().max(b0.y()));
            let hi = LatticePoint::new(a1.x().min(b1.x()), a1.y().min(b1.y()));
            let mut r = Self::rect(lo, hi);
            r.dim = self.dim;
            return r;
        }
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Self::from_points(self.dim, small.iter().filter(|p| big.contains(*p)))
    }

    /// Smallest enclosing rectangle `[lo, hi)`; `None` when empty.
    pub fn bounds(&self) -> Option<(LatticePoint, LatticePoint)> {
        if self.is_empty() {
            return None;
        }
        match &self.repr {
            Repr::Rect { lo, hi } => Some((*lo, *hi)),
            Repr::Points(v) => {
                let mut lo = v[0];
                let mut hi = v[0];
                for p in v {
                    lo = LatticePoint::new(lo.x().min(p.x()), lo.y().min(p.y()));
                    hi = LatticePoint::new(hi.x().max(p.x()), hi.y().max(p.y()));
                }
                Some((lo, hi + LatticePoint::new(1, 1)))
            }
        }
    }

    pub fn to_point_set(&self) -> HashSet<LatticePoint> {
        self.iter().collect()
    }
}

#[derive(Serialize, Deserialize)]
struct RegionDoc {
    version: u32,
    dim: usize,
    points: Vec<Vec<i64>>,
}

impl Serialize for FiniteRegion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let points = self
            .iter()
            .map(|p| p.0[..self.dim].to_vec())
            .collect();
        RegionDoc {
            version: 1,
            dim: self.dim,
            points,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteRegion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = RegionDoc::deserialize(d)?;
        if doc.dim == 0 || doc.dim > 2 {
            return Err(D::Error::custom("region dim must be 1 or 2"));
        }
        let mut pts = Vec::with_capacity(doc.points.len());
        for c in doc.points {
            if c.len() != doc.dim {
                return Err(D::Error::custom("coordinate length does not match dim"));
            }
            pts.push(LatticePoint::new(c[0], if doc.dim == 2 { c[1] } else { 0 }));
        }
        Ok(FiniteRegion::from_points(doc.dim, pts))
    }
}

/// Symmetric generating set of Z^d defining the word metric.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricContext {
    pub dim: usize,
    pub generators: Vec<LatticePoint>,
}

impl MetricContext {
    /// `±e_1, ..., ±e_d`
    pub fn standard(dim: usize) -> Self {
        let mut g = vec![LatticePoint::d1(1), LatticePoint::d1(-1)];
        if dim == 2 {
            g.push(LatticePoint::new(0, 1));
            g.push(LatticePoint::new(0, -1));
        }
        MetricContext { dim, generators: g }
    }

    pub fn new(dim: usize, generators: Vec<LatticePoint>) -> LabResult<Self> {
        if !(1..=2).contains(&dim) {
            return Err(LabError::pre("dimension must be 1 or 2"));
        }
        let set: HashSet<_> = generators.iter().copied().collect();
        if generators.iter().any(|g| !set.contains(&-*g)) {
            return Err(LabError::pre("generating set is not symmetric"));
        }
        if dim == 1 && generators.iter().any(|g| g.y() != 0) {
            return Err(LabError::pre("generator outside Z^1"));
        }
        let ctx = MetricContext { dim, generators };
        // reachability of the unit vectors within a generous radius
        let reach = ctx.bfs_ball(64);
        let units = MetricContext::standard(dim).generators;
        if units.iter().any(|u| !reach.contains_key(u)) {
            return Err(LabError::pre("generators do not generate Z^d"));
        }
        Ok(ctx)
    }

    fn is_standard(&self) -> bool {
        let std = MetricContext::standard(self.dim);
        let a: HashSet<_> = self.generators.iter().collect();
        let b: HashSet<_> = std.generators.iter().collect();
        a == b
    }

    fn bfs_ball(&self, r: u32) -> HashMap<LatticePoint, u32> {
        let mut dist = HashMap::new();
        dist.insert(LatticePoint::ZERO, 0);
        let mut queue = VecDeque::from([LatticePoint::ZERO]);
        while let Some(p) = queue.pop_front() {
            let d = dist[&p];
            if d == r {
                continue;
            }
            for &g in &self.generators {
                let n = p + g;
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(n) {
                    e.insert(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Word length of `v`, searched up to `cap`.
    pub fn word_len(&self, v: LatticePoint, cap: u32) -> Option<u32> {
        if self.is_standard() {
            let l = v.l1() as u32;
            return (l <= cap).then_some(l);
        }
        self.bfs_ball(cap).get(&v).copied()
    }
}

/// `S^r`: all products of at most `r` generators.
pub fn ball(ctx: &MetricContext, r: u32) -> FiniteRegion {
    if ctx.is_standard() {
        let r = r as i64;
        let mut pts = Vec::new();
        if ctx.dim == 1 {
            for x in -r..=r {
                pts.push(LatticePoint::d1(x));
            }
        } else {
            for x in -r..=r {
                let rem = r - x.abs();
                for y in -rem..=rem {
                    pts.push(LatticePoint::new(x, y));
                }
            }
        }
        return FiniteRegion::from_points(ctx.dim, pts);
    }
    FiniteRegion::from_points(ctx.dim, ctx.bfs_ball(r).into_keys())
}

/// Outcome of an invariance test with the exact core count.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub core: u64,
    pub size: u64,
    pub ratio: Q,
    pub delta: Q,
    pub holds: bool,
}

impl InvarianceReport {
    pub fn ratio_pair(&self) -> RatPair {
        RatPair::from(&self.ratio)
    }
}

/// `|E ∩ ⋂_{s∈K} (E − s)|` exactly.
pub fn invariance_core(e: &FiniteRegion, k: &FiniteRegion) -> u64 {
    if k.is_empty() {
        return e.len() as u64;
    }
    if let (Some((lo, hi)), Some((klo, khi))) = (e.as_rect(), k.bounds()) {
        // E − s is a translate of the box, so the intersection is a box
        let kmax = khi - LatticePoint::new(1, 1);
        let cx0 = lo.x().max(lo.x() - klo.x());
        let cx1 = hi.x().min(hi.x() - kmax.x());
        let cy0 = lo.y().max(lo.y() - klo.y());
        let cy1 = hi.y().min(hi.y() - kmax.y());
        let w = (cx1 - cx0).max(0) as u64;
        let h = (cy1 - cy0).max(0) as u64;
        return w * h;
    }
    let ks = k.points();
    e.iter()
        .filter(|&t| ks.iter().all(|&s| e.contains(t + s)))
        .count() as u64
}

/// Whether `E` is `(K, δ)`-invariant, with the exact ratio `core/|E|`.
pub fn is_invariant(e: &FiniteRegion, k: &FiniteRegion, delta: &Q) -> LabResult<InvarianceReport> {
    if e.is_empty() {
        return Err(LabError::pre("invariance of an empty set"));
    }
    let core = invariance_core(e, k);
    let size = e.len() as u64;
    let ratio = Q::new(core.into(), size.into());
    let holds = ratio >= Q::from_integer(1.into()) - delta;
    Ok(InvarianceReport {
        core,
        size,
        ratio,
        delta: delta.clone(),
        holds,
    })
}

/// Connectivity of the graph joining points at word distance at most `r`.
pub fn is_r_connected(v: &FiniteRegion, r: u32, ctx: &MetricContext) -> bool {
    if v.len() <= 1 {
        return true;
    }
    let offsets: Vec<LatticePoint> = ball(ctx, r).iter().filter(|p| !p.is_zero()).collect();
    let set = v.to_point_set();
    let start = v.iter().next().unwrap();
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    let pts = v.points();
    let sparse = offsets.len() > pts.len();
    let ball_set: HashSet<_> = offsets.iter().copied().collect();
    while let Some(p) = stack.pop() {
        if sparse {
            for &q in &pts {
                if !seen.contains(&q) && ball_set.contains(&(q - p)) {
                    seen.insert(q);
                    stack.push(q);
                }
            }
        } else {
            for &o in &offsets {
                let q = p + o;
                if set.contains(&q) && seen.insert(q) {
                    stack.push(q);
                }
            }
        }
    }
    seen.len() == set.len()
}

/// Lexicographic greedy subset with pairwise distances `> r`; maximal, so
/// every point of `V` lies within `r` of it.
pub fn maximal_r_separated(v: &FiniteRegion, r: u32, ctx: &MetricContext) -> FiniteRegion {
    let offsets: Vec<LatticePoint> = ball(ctx, r).points();
    let mut chosen: HashSet<LatticePoint> = HashSet::new();
    let mut order = Vec::new();
    for p in v.iter() {
        if offsets.iter().all(|&o| !chosen.contains(&(p + o))) {
            chosen.insert(p);
            order.push(p);
        }
    }
    FiniteRegion::from_points(v.dim(), order)
}

/// Every point of `v` is within distance `r` of `c`.
pub fn is_spanning(c: &FiniteRegion, v: &FiniteRegion, r: u32, ctx: &MetricContext) -> bool {
    let offsets = ball(ctx, r).points();
    let cs = c.to_point_set();
    v.iter().all(|p| offsets.iter().any(|&o| cs.contains(&(p + o))))
}

/// Pairwise distances exceed `r`.
pub fn is_separated(c: &FiniteRegion, r: u32, ctx: &MetricContext) -> bool {
    let offsets: Vec<_> = ball(ctx, r).iter().filter(|p| !p.is_zero()).collect();
    let cs = c.to_point_set();
    c.iter().all(|p| offsets.iter().all(|&o| !cs.contains(&(p + o))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub i: usize,
    pub j: usize,
    pub path: Vec<LatticePoint>,
}

impl TreeEdge {
    pub fn len(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanningTree {
    pub vertices: Vec<LatticePoint>,
    pub edges: Vec<TreeEdge>,
    pub region_size: u64,
    pub ball_size: u64,
    pub dilated_size: u64,
    pub path_edge_total: u64,
}

impl SpanningTree {
    /// `|V|·|S^r| ≤ 2|F|`
    pub fn vertex_bound_holds(&self) -> bool {
        self.vertices.len() as u64 * self.ball_size <= 2 * self.region_size
    }

    pub fn path_bound_holds(&self, r: u32) -> bool {
        let n = self.vertices.len() as u64;
        self.path_edge_total <= 5 * r as u64 * n.saturating_sub(1)
    }

    /// Edges form a tree on the vertex set and each path is a walk in `f`
    /// between its endpoints.
    pub fn is_valid_tree(&self, f: &FiniteRegion, ctx: &MetricContext) -> bool {
        let n = self.vertices.len();
        if self.edges.len() + 1 != n.max(1) {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        let gens: HashSet<_> = ctx.generators.iter().copied().collect();
        for e in &self.edges {
            if e.i >= n || e.j >= n {
                return false;
            }
            if e.path.first() != Some(&self.vertices[e.i]) || e.path.last() != Some(&self.vertices[e.j]) {
                return false;
            }
            if e.path.iter().any(|p| !f.contains(*p)) {
                return false;
            }
            if e.path.windows(2).any(|w| !gens.contains(&(w[1] - w[0]))) {
                return false;
            }
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

/// A 2r-spanning tree in `F` whose vertices are a maximal 2r-separated set.
///
/// A 2r-separated set has pairwise disjoint `S^r`-balls, all inside `S^r F`,
/// which gives `|V|·|S^r| ≤ |S^r F| ≤ 2|F|`. Maximality makes it 2r-spanning,
/// and neighbouring vertices are joined by paths of length at most `4r+1`.
pub fn spanning_tree_2r(f: &FiniteRegion, r: u32, ctx: &MetricContext) -> LabResult<SpanningTree> {
    if f.is_empty() {
        return Err(LabError::pre("spanning tree of an empty set"));
    }
    if r == 0 {
        return Err(LabError::pre("r must be positive"));
    }
    if !is_r_connected(f, 1, ctx) {
        return Err(LabError::pre("region is not connected"));
    }
    let sr = ball(ctx, r);
    let dilated = sr.minkowski(f).len() as u64;
    let fsize = f.len() as u64;
    if dilated > 2 * fsize {
        return Err(LabError::pre(format!(
            "|S^{r} F| = {dilated} > 2|F| = {}",
            2 * fsize
        )));
    }
    let verts = maximal_r_separated(f, 2 * r, ctx).points();
    let index: HashMap<LatticePoint, usize> = verts.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let max_len = 4 * r + 1;

    // BFS tree over the vertex graph; each new edge is a shortest path in F
    let mut in_tree = vec![false; verts.len()];
    in_tree[0] = true;
    let mut queue = VecDeque::from([0usize]);
    let mut edges = Vec::new();
    while let Some(i) = queue.pop_front() {
        let src = verts[i];
        let mut prev: HashMap<LatticePoint, LatticePoint> = HashMap::new();
        let mut depth: HashMap<LatticePoint, u32> = HashMap::from([(src, 0)]);
        let mut bfs = VecDeque::from([src]);
        let mut found = Vec::new();
        while let Some(p) = bfs.pop_front() {
            let d = depth[&p];
            if let Some(&j) = index.get(&p) {
                if j != i && !in_tree[j] {
                    found.push(j);
                }
            }
            if d == max_len {
                continue;
            }
            for &g in &ctx.generators {
                let n = p + g;
                if f.contains(n) && !depth.contains_key(&n) {
                    depth.insert(n, d + 1);
                    prev.insert(n, p);
                    bfs.push_back(n);
                }
            }
        }
        found.sort_unstable();
        for j in found {
            if in_tree[j] {
                continue;
            }
            in_tree[j] = true;
            let mut path = vec![verts[j]];
            let mut cur = verts[j];
            while cur != src {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            edges.push(TreeEdge { i, j, path });
            queue.push_back(j);
        }
    }
    if in_tree.iter().any(|b| !b) {
        return Err(LabError::Certificate(
            "vertex graph with path length 4r+1 is disconnected".into(),
        ));
    }
    let path_edge_total = edges.iter().map(|e| e.len() as u64).sum();
    Ok(SpanningTree {
        vertices: verts,
        edges,
        region_size: fsize,
        ball_size: sr.len() as u64,
        dilated_size: dilated,
        path_edge_total,
    })
}

/// Smallest `[0,n)^d` with `n` a power of two that is `(K, δ)`-invariant.
pub fn connected_invariant_set(k: &FiniteRegion, delta: &Q, ctx: &MetricContext) -> LabResult<FiniteRegion> {
    if *delta <= Q::from_integer(0.into()) || *delta > Q::from_integer(1.into()) {
        return Err(LabError::pre("delta must lie in (0, 1]"));
    }
    let mut n: i64 = 1;
    loop {
        let sq = FiniteRegion::cube(ctx.dim, n);
        if is_invariant(&sq, k, delta)?.holds {
            return Ok(sq);
        }
        n = n
            .checked_mul(2)
            .ok_or_else(|| LabError::Inconclusive("no invariant square below 2^62".into()))?;
    }
}

/// Checks `|S^r| ≥ c·r²` for `1 ≤ r ≤ max_r`; returns the least observed
/// ratio `|S^r|/r²`.
pub fn ball_growth_constant(ctx: &MetricContext, max_r: u32) -> Q {
    (1..=max_r)
        .map(|r| Q::new((ball(ctx, r).len() as u64).into(), (r as u64 * r as u64).into()))
        .min()
        .unwrap_or_else(|| qu(1))
}
