//! Topological full group calculus over lattice subshifts: clopen sets,
//! piecewise-translation elements, 3-cycles, word evaluation, witnesses,
//! and the finite certificates built from them.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::lattice::{FiniteRegion, LatticePoint};
use crate::rational::{qu, Q};
use crate::subshift::{restrict_values, shift_offset, translate, Point, Sym};

/// Finite union of cylinders over one window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClopenSet {
    pub window: FiniteRegion,
    pub admitted: BTreeSet<Vec<Sym>>,
}

impl ClopenSet {
    pub fn new(window: FiniteRegion, admitted: impl IntoIterator<Item = Vec<Sym>>) -> LabResult<Self> {
        let admitted: BTreeSet<Vec<Sym>> = admitted.into_iter().collect();
        if admitted.iter().any(|p| p.len() != window.len()) {
            return Err(LabError::pre("admitted pattern does not fit the window"));
        }
        Ok(ClopenSet { window, admitted })
    }

    /// `{y : y|_W = x|_W}`
    pub fn cylinder(x: &Point, window: &FiniteRegion) -> Self {
        ClopenSet {
            window: window.clone(),
            admitted: BTreeSet::from([restrict_values(x, window)]),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.admitted.contains(&restrict_values(x, &self.window))
    }

    /// `v·C = {translate(y, v) : y ∈ C}`, the cylinder over `W − v`.
    pub fn shift(&self, v: LatticePoint) -> Self {
        ClopenSet {
            window: self.window.translate(-v),
            admitted: self.admitted.clone(),
        }
    }

    /// Exact: no admitted pair agrees on the window overlap.
    pub fn disjoint(&self, other: &ClopenSet) -> bool {
        let common: Vec<(usize, usize)> = self
            .window
            .iter()
            .enumerate()
            .filter_map(|(i, p)| other.window.index_of(p).map(|j| (i, j)))
            .collect();
        for a in &self.admitted {
            for b in &other.admitted {
                if common.iter().all(|&(i, j)| a[i] == b[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Exact `self ⊆ other` when `other.window ⊆ self.window`.
    pub fn subset_of(&self, other: &ClopenSet) -> Option<bool> {
        let idx: Option<Vec<usize>> = other.window.iter().map(|p| self.window.index_of(p)).collect();
        let idx = idx?;
        Some(self.admitted.iter().all(|a| {
            let r: Vec<Sym> = idx.iter().map(|&i| a[i]).collect();
            other.admitted.contains(&r)
        }))
    }

    pub fn is_empty(&self) -> bool {
        self.admitted.is_empty()
    }
}

/// Boolean combinations of cylinders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clopen {
    All,
    Empty,
    Cyl(ClopenSet),
    Not(Box<Clopen>),
    And(Vec<Clopen>),
    Or(Vec<Clopen>),
}

impl Clopen {
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Clopen::All => true,
            Clopen::Empty => false,
            Clopen::Cyl(c) => c.contains(x),
            Clopen::Not(c) => !c.contains(x),
            Clopen::And(v) => v.iter().all(|c| c.contains(x)),
            Clopen::Or(v) => v.iter().any(|c| c.contains(x)),
        }
    }

    /// `v·C`; shifting commutes with every Boolean operation.
    pub fn shift(&self, v: LatticePoint) -> Clopen {
        if v.is_zero() {
            return self.clone();
        }
        match self {
            Clopen::All | Clopen::Empty => self.clone(),
            Clopen::Cyl(c) => Clopen::Cyl(c.shift(v)),
            Clopen::Not(c) => Clopen::Not(Box::new(c.shift(v))),
            Clopen::And(xs) => Clopen::And(xs.iter().map(|c| c.shift(v)).collect()),
            Clopen::Or(xs) => Clopen::Or(xs.iter().map(|c| c.shift(v)).collect()),
        }
    }

    /// Conservative emptiness: `true` only when provably empty.
    pub fn provably_empty(&self) -> bool {
        match self {
            Clopen::Empty => true,
            Clopen::All => false,
            Clopen::Cyl(c) => c.is_empty(),
            Clopen::Not(c) => matches!(**c, Clopen::All),
            Clopen::Or(v) => v.iter().all(|c| c.provably_empty()),
            Clopen::And(v) => {
                if v.iter().any(|c| c.provably_empty()) {
                    return true;
                }
                let cyls: Vec<&ClopenSet> = v
                    .iter()
                    .filter_map(|c| match c {
                        Clopen::Cyl(s) => Some(s),
                        _ => None,
                    })
                    .collect();
                for i in 0..cyls.len() {
                    for j in i + 1..cyls.len() {
                        if cyls[i].disjoint(cyls[j]) {
                            return true;
                        }
                    }
                }
                // a cylinder next to the negation of a larger cylinder
                for c in &cyls {
                    for n in v {
                        if let Clopen::Not(inner) = n {
                            if let Clopen::Cyl(d) = &**inner {
                                if c.subset_of(d) == Some(true) {
                                    return true;
                                }
                            }
                        }
                    }
                }
                false
            }
        }
    }

    fn and(a: Clopen, b: Clopen) -> Clopen {
        match (a, b) {
            (Clopen::All, x) | (x, Clopen::All) => x,
            (Clopen::Empty, _) | (_, Clopen::Empty) => Clopen::Empty,
            (Clopen::And(mut xs), Clopen::And(ys)) => {
                xs.extend(ys);
                Clopen::And(xs)
            }
            (Clopen::And(mut xs), y) | (y, Clopen::And(mut xs)) => {
                xs.push(y);
                Clopen::And(xs)
            }
            (x, y) => Clopen::And(vec![x, y]),
        }
    }
}

/// One moving piece: `g x = translate(x, shift)` on `domain`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub domain: Clopen,
    pub shift: LatticePoint,
}

/// A piecewise translation; the identity off the moving pieces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableElement {
    pub pieces: Vec<Piece>,
}

impl TableElement {
    pub fn identity() -> Self {
        TableElement { pieces: vec![] }
    }

    pub fn global_shift(v: LatticePoint) -> Self {
        let mut g = TableElement::identity();
        if !v.is_zero() {
            g.pieces.push(Piece {
                domain: Clopen::All,
                shift: v,
            });
        }
        g
    }

    /// Moving pieces plus the implicit identity piece.
    pub fn piece_count(&self) -> usize {
        self.pieces.len() + 1
    }

    /// Shift applied at `x`; errors if two moving pieces claim it.
    pub fn displacement(&self, x: &Point) -> LabResult<LatticePoint> {
        let mut hit: Option<LatticePoint> = None;
        for p in &self.pieces {
            if p.domain.contains(x) {
                if hit.is_some() {
                    return Err(LabError::Certificate(format!(
                        "overlapping pieces at point offset {}",
                        shift_offset(x)
                    )));
                }
                hit = Some(p.shift);
            }
        }
        Ok(hit.unwrap_or(LatticePoint::ZERO))
    }

    pub fn apply(&self, x: &Point) -> LabResult<(Point, LatticePoint)> {
        let d = self.displacement(x)?;
        Ok((translate(x, d), d))
    }

    pub fn support(&self) -> Clopen {
        Clopen::Or(self.pieces.iter().map(|p| p.domain.clone()).collect())
    }

    pub fn inverse(&self) -> TableElement {
        TableElement {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    domain: p.domain.shift(p.shift),
                    shift: -p.shift,
                })
                .collect(),
        }
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &TableElement) -> TableElement {
        let id_g = Clopen::Not(Box::new(self.support()));
        let id_h = Clopen::Not(Box::new(other.support()));
        let mut hs: Vec<(Clopen, LatticePoint)> = other.pieces.iter().map(|p| (p.domain.clone(), p.shift)).collect();
        hs.push((id_h, LatticePoint::ZERO));
        let mut gs: Vec<(Clopen, LatticePoint)> = self.pieces.iter().map(|p| (p.domain.clone(), p.shift)).collect();
        gs.push((id_g, LatticePoint::ZERO));
        let mut pieces = Vec::new();
        for (e, u) in &hs {
            for (d, v) in &gs {
                let total = *u + *v;
                if total.is_zero() {
                    continue;
                }
                let dom = Clopen::and(e.clone(), d.shift(-*u));
                if dom.provably_empty() {
                    continue;
                }
                pieces.push(Piece { domain: dom, shift: total });
            }
        }
        TableElement { pieces }
    }

    /// Flat form when every domain is a single cylinder set.
    pub fn to_doc(&self) -> Option<ElementDoc> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| match &p.domain {
                Clopen::Cyl(c) => Some(PieceDoc {
                    window: c.window.clone(),
                    patterns: c.admitted.iter().cloned().collect(),
                    shift: p.shift,
                }),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(ElementDoc { pieces })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceDoc {
    pub window: FiniteRegion,
    pub patterns: Vec<Vec<Sym>>,
    pub shift: LatticePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub pieces: Vec<PieceDoc>,
}

/// A finite set of points every verdict is relative to.
#[derive(Clone)]
pub struct SampleLang {
    pub id: String,
    pub points: Vec<Point>,
}

impl SampleLang {
    /// Translates `translate(x, v)` for `v` in `region`.
    pub fn orbit(x: &Point, region: &FiniteRegion) -> Self {
        SampleLang {
            id: format!("orbit:{}:{}", x.provenance(), region.len()),
            points: region.iter().map(|v| translate(x, v)).collect(),
        }
    }

    pub fn extend(mut self, more: impl IntoIterator<Item = Point>) -> Self {
        self.points.extend(more);
        self
    }
}

/// Validates domain disjointness and injectivity on the sample.
pub fn make_element(pieces: Vec<Piece>, lang: &SampleLang) -> LabResult<TableElement> {
    let g = TableElement {
        pieces: pieces.into_iter().filter(|p| !p.shift.is_zero()).collect(),
    };
    let inv = g.inverse();
    for x in &lang.points {
        let (y, d) = g.apply(x)?;
        let back = inv.displacement(&y).map_err(|_| {
            LabError::Certificate(format!("image overlap: two pieces land on the image of offset {}", shift_offset(x)))
        })?;
        if back != -d {
            return Err(LabError::Certificate(format!(
                "not injective: image of offset {} is also the image of another piece",
                shift_offset(x)
            )));
        }
    }
    Ok(g)
}

pub fn is_identity(g: &TableElement, lang: &SampleLang) -> LabResult<bool> {
    for x in &lang.points {
        if !g.displacement(x)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Agreement of two elements at every sample point.
pub fn agree_on(g: &TableElement, h: &TableElement, lang: &SampleLang) -> LabResult<bool> {
    for x in &lang.points {
        if g.displacement(x)? != h.displacement(x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `A1 → A2 → A3 → A1` with `A2 = v12·A1`, `A3 = v23·A2`.
pub fn multisection_3cycle(a1: &Clopen, a2: &Clopen, a3: &Clopen, v12: LatticePoint, v23: LatticePoint, lang: &SampleLang) -> LabResult<TableElement> {
    let sets = [a1, a2, a3];
    for i in 0..3 {
        for j in i + 1..3 {
            let exact = match (sets[i], sets[j]) {
                (Clopen::Cyl(a), Clopen::Cyl(b)) => Some(a.disjoint(b)),
                _ => None,
            };
            match exact {
                Some(false) => return Err(LabError::pre(format!("sets {} and {} intersect", i + 1, j + 1))),
                Some(true) => {}
                None => {
                    if lang.points.iter().any(|x| sets[i].contains(x) && sets[j].contains(x)) {
                        return Err(LabError::pre(format!("sets {} and {} intersect on the sample", i + 1, j + 1)));
                    }
                }
            }
        }
    }
    for x in &lang.points {
        for (src, dst, v) in [(a1, a2, v12), (a2, a3, v23)] {
            if src.contains(x) != dst.contains(&translate(x, v)) {
                return Err(LabError::pre("translation does not carry one set onto the next"));
            }
        }
    }
    let g = make_element(
        vec![
            Piece { domain: a1.clone(), shift: v12 },
            Piece { domain: a2.clone(), shift: v23 },
            Piece { domain: a3.clone(), shift: -(v12 + v23) },
        ],
        lang,
    )?;
    let cube = GroupWord::power(0, 3);
    for x in &lang.points {
        if !evaluate_word(&cube, std::slice::from_ref(&g), x)?.displacement.is_zero() {
            return Err(LabError::Certificate("3-cycle does not have order 3".into()));
        }
    }
    Ok(g)
}

/// Letters `(generator, ±1)`, applied right to left.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupWord {
    pub letters: Vec<(usize, i8)>,
}

impl GroupWord {
    pub fn new(letters: Vec<(usize, i8)>) -> Self {
        GroupWord { letters }
    }

    /// Word in involutions, one letter per generator index.
    pub fn involutions(ids: &[usize]) -> Self {
        GroupWord {
            letters: ids.iter().map(|&i| (i, 1)).collect(),
        }
    }

    pub fn power(g: usize, n: usize) -> Self {
        GroupWord {
            letters: vec![(g, 1); n],
        }
    }

    pub fn inverse(&self) -> Self {
        GroupWord {
            letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn concat(&self, other: &GroupWord) -> Self {
        let mut l = self.letters.clone();
        l.extend(other.letters.iter().copied());
        GroupWord { letters: l }
    }

    /// Cancels adjacent `g g⁻¹` pairs.
    pub fn reduce(&self) -> Self {
        let mut out: Vec<(usize, i8)> = Vec::new();
        for &l in &self.letters {
            if let Some(&last) = out.last() {
                if last.0 == l.0 && last.1 == -l.1 {
                    out.pop();
                    continue;
                }
            }
            out.push(l);
        }
        GroupWord { letters: out }
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }
}

#[derive(Clone, Debug)]
pub struct WordEval {
    pub point: Point,
    pub displacement: LatticePoint,
    /// shift contributed by each letter, in application order
    pub trace: Vec<LatticePoint>,
}

pub fn evaluate_word(w: &GroupWord, gens: &[TableElement], x: &Point) -> LabResult<WordEval> {
    let mut cur = x.clone();
    let mut total = LatticePoint::ZERO;
    let mut trace = Vec::with_capacity(w.len());
    let invs: Vec<Option<TableElement>> = (0..gens.len())
        .map(|i| w.letters.iter().any(|&(g, e)| g == i && e < 0).then(|| gens[i].inverse()))
        .collect();
    for &(g, e) in w.letters.iter().rev() {
        let el = gens
            .get(g)
            .ok_or_else(|| LabError::pre(format!("unknown generator {g}")))?;
        let el = if e < 0 { invs[g].as_ref().unwrap() } else { el };
        let (y, d) = el.apply(&cur)?;
        cur = y;
        total = total + d;
        trace.push(d);
    }
    Ok(WordEval {
        point: cur,
        displacement: total,
        trace,
    })
}

/// A coordinate `t` with `x(t) ≠ x(t + d)` inside `[−r, r]^2`.
pub fn distinguishing_coordinate(x: &Point, d: LatticePoint, r: i64) -> Option<LatticePoint> {
    if d.is_zero() {
        return None;
    }
    let mut rad = 0;
    loop {
        for t in FiniteRegion::centered_square(-rad, rad).iter() {
            if t.linf() == rad && x.eval(t) != x.eval(t + d) {
                return Some(t);
            }
        }
        if rad >= r {
            return None;
        }
        rad += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub word: GroupWord,
    pub witness_id: usize,
    pub provenance: String,
    pub displacement: LatticePoint,
    pub trace: Vec<LatticePoint>,
    pub distinguishing: LatticePoint,
    pub attempts: usize,
}

/// Radius searched for a coordinate that separates `x` from its image.
pub const DISTINGUISH_RADIUS: i64 = 64;

/// First factory point moved by `w`; `None` means unknown, never trivial.
pub fn nontriviality_witness(w: &GroupWord, gens: &[TableElement], factory: &dyn Fn(usize) -> Option<Point>, budget: usize) -> LabResult<Option<WitnessReport>> {
    for i in 0..budget {
        let Some(x) = factory(i) else {
            continue;
        };
        let ev = evaluate_word(w, gens, &x)?;
        if let Some(t) = distinguishing_coordinate(&x, ev.displacement, DISTINGUISH_RADIUS) {
            return Ok(Some(WitnessReport {
                word: w.clone(),
                witness_id: i,
                provenance: x.provenance(),
                displacement: ev.displacement,
                trace: ev.trace,
                distinguishing: t,
                attempts: i + 1,
            }));
        }
    }
    Ok(None)
}

/// Reduced words in `n` involutions of length `1..=max_len`, by length then
/// lexicographically.
pub fn reduced_involution_words(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for _ in 0..max_len {
        out.extend(layer.iter().cloned());
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..n {
                if *w.last().unwrap() != i {
                    let mut v = w.clone();
                    v.push(i);
                    next.push(v);
                }
            }
        }
        layer = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub word: Vec<usize>,
    pub witness_id: usize,
    pub displacement: LatticePoint,
    pub distinguishing: LatticePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeProductCertificate {
    pub max_len: usize,
    pub rows: Vec<CertificateRow>,
    pub missing: Vec<Vec<usize>>,
    pub involutive: Vec<bool>,
}

impl FreeProductCertificate {
    pub fn complete(&self) -> bool {
        self.missing.is_empty() && self.involutive.iter().all(|b| *b)
    }
}

pub type WordFactory<'a> = dyn Fn(&[usize], usize) -> Option<Point> + Sync + 'a;

pub fn free_product_certificate(gens: &[TableElement], max_len: usize, factory: &WordFactory<'_>, budget: usize, lang: &SampleLang) -> LabResult<FreeProductCertificate> {
    let involutive = gens
        .iter()
        .map(|g| is_identity(&g.compose(g), lang))
        .collect::<LabResult<Vec<bool>>>()?;
    let words = reduced_involution_words(gens.len(), max_len);
    let found: Vec<LabResult<Option<WitnessReport>>> = words
        .par_iter()
        .map(|w| {
            let gw = GroupWord::involutions(w);
            nontriviality_witness(&gw, gens, &|i| factory(w, i), budget)
        })
        .collect();
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for (w, r) in words.into_iter().zip(found) {
        match r? {
            Some(rep) => rows.push(CertificateRow {
                word: w,
                witness_id: rep.witness_id,
                displacement: rep.displacement,
                distinguishing: rep.distinguishing,
            }),
            None => missing.push(w),
        }
    }
    Ok(FreeProductCertificate {
        max_len,
        rows,
        missing,
        involutive,
    })
}

/// `{y : y = x0 on [−r, r]^2}`
pub fn centered_cylinder(x0: &Point, r: i64) -> ClopenSet {
    ClopenSet::cylinder(x0, &FiniteRegion::centered_square(-r, r))
}

#[derive(Clone, Debug)]
pub struct CentralPair {
    pub n: usize,
    pub radius: i64,
    pub next_radius: i64,
    pub orbit: [LatticePoint; 4],
    pub c: TableElement,
    pub d: TableElement,
    /// point at which `cd` and `dc` differ
    pub noncommuting_at: LatticePoint,
}

/// Non-commuting 3-cycles supported in the annuli `U_n ∖ U_{n+1}` around
/// `x0`, with `U_n` the cylinder of `x0` on `[−r_n, r_n]^2`.
pub fn asymptotically_central_pairs(x0: &Point, radii: &[i64], search: &FiniteRegion) -> LabResult<Vec<CentralPair>> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::pre("radii must increase and have at least two entries"));
    }
    let mut out = Vec::new();
    for n in 0..radii.len() - 1 {
        let (r, r1) = (radii[n], radii[n + 1]);
        let un = centered_cylinder(x0, r);
        let un1 = centered_cylinder(x0, r1);
        let mut ts: Vec<LatticePoint> = Vec::new();
        for t in search.iter() {
            let y = translate(x0, t);
            if un.contains(&y) && !un1.contains(&y) {
                ts.push(t);
                if ts.len() == 4 {
                    break;
                }
            }
        }
        if ts.len() < 4 {
            return Err(LabError::Inconclusive(format!(
                "annulus {n} has {} orbit points in the search region",
                ts.len()
            )));
        }
        let spread = ts.iter().map(|t| (*t - ts[0]).linf()).max().unwrap();
        let mut big = r1 + spread;
        let a1 = loop {
            let a1 = ClopenSet::cylinder(&translate(x0, ts[0]), &FiniteRegion::centered_square(-big, big));
            let a: Vec<ClopenSet> = ts.iter().map(|t| a1.shift(*t - ts[0])).collect();
            let ok = (0..4).all(|i| (i + 1..4).all(|j| a[i].disjoint(&a[j])));
            if ok {
                break a1;
            }
            big *= 2;
            if big > 1 << 12 {
                return Err(LabError::Inconclusive("orbit cylinders do not separate".into()));
            }
        };
        let a: Vec<Clopen> = ts.iter().map(|t| Clopen::Cyl(a1.shift(*t - ts[0]))).collect();
        // every A_i lies in U_n and misses U_{n+1}
        for ai in &a {
            if let Clopen::Cyl(s) = ai {
                if s.subset_of(&un) != Some(true) || !s.disjoint(&un1) {
                    return Err(LabError::Certificate("orbit cylinder leaves the annulus".into()));
                }
            }
        }
        let lang = SampleLang {
            id: format!("annulus:{n}"),
            points: ts.iter().map(|t| translate(x0, *t)).collect(),
        };
        let c = multisection_3cycle(&a[0], &a[1], &a[2], ts[1] - ts[0], ts[2] - ts[1], &lang)?;
        let d = multisection_3cycle(&a[1], &a[2], &a[3], ts[2] - ts[1], ts[3] - ts[2], &lang)?;
        let x = translate(x0, ts[0]);
        let cd = evaluate_word(&GroupWord::new(vec![(0, 1), (1, 1)]), &[c.clone(), d.clone()], &x)?;
        let dc = evaluate_word(&GroupWord::new(vec![(1, 1), (0, 1)]), &[c.clone(), d.clone()], &x)?;
        if cd.displacement == dc.displacement {
            return Err(LabError::Certificate(format!("pair {n} commutes at its witness")));
        }
        out.push(CentralPair {
            n,
            radius: r,
            next_radius: r1,
            orbit: [ts[0], ts[1], ts[2], ts[3]],
            c,
            d,
            noncommuting_at: ts[0],
        });
    }
    Ok(out)
}

/// `[g, h]` acts trivially at every sample point.
pub fn commute_on(g: &TableElement, h: &TableElement, lang: &SampleLang) -> LabResult<bool> {
    let gens = [g.clone(), h.clone()];
    let gh = GroupWord::new(vec![(0, 1), (1, 1)]);
    let hg = GroupWord::new(vec![(1, 1), (0, 1)]);
    for x in &lang.points {
        if evaluate_word(&gh, &gens, x)?.displacement != evaluate_word(&hg, &gens, x)?.displacement {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct IccConjugate {
    pub h: TableElement,
    pub conjugate: TableElement,
    /// orbit position of the point `x_i` moved by `g`
    pub at: LatticePoint,
    pub step: LatticePoint,
}

/// Conjugates `h_i g h_i⁻¹` by 3-cycles around separated points moved by
/// `g`; `h_i g h_i⁻¹` fixes `x_i` while every other conjugate moves it.
pub fn icc_witness(g: &TableElement, x0: &Point, direction: LatticePoint, count: usize, search: &FiniteRegion, radius: i64) -> LabResult<Vec<IccConjugate>> {
    if direction.is_zero() {
        return Err(LabError::pre("direction must be nonzero"));
    }
    let window = FiniteRegion::centered_square(-radius, radius);
    let mut moved: Vec<LatticePoint> = Vec::new();
    for t in search.iter() {
        if !g.displacement(&translate(x0, t))?.is_zero() {
            moved.push(t);
        }
    }
    if moved.is_empty() {
        return Err(LabError::pre("element acts trivially on the sample"));
    }
    let mut out: Vec<IccConjugate> = Vec::new();
    let mut used: Vec<ClopenSet> = Vec::new();
    let mut protected: Vec<Point> = Vec::new();
    'points: for &t in &moved {
        if out.len() == count {
            break;
        }
        let x = translate(x0, t);
        let gx_d = g.displacement(&x)?;
        let a = ClopenSet::cylinder(&x, &window);
        for j in 1..=64i64 {
            let s = direction.scale(j);
            let sets = [a.clone(), a.shift(s), a.shift(s.scale(2))];
            if !(sets[0].disjoint(&sets[1]) && sets[0].disjoint(&sets[2]) && sets[1].disjoint(&sets[2])) {
                continue;
            }
            // earlier cycles must keep away from all three sets
            if used.iter().any(|u| sets.iter().any(|s| !u.disjoint(s))) {
                continue 'points;
            }
            let gx = translate(&x, gx_d);
            if used.iter().any(|u| u.contains(&x) || u.contains(&gx)) {
                continue 'points;
            }
            if protected.iter().any(|p| sets.iter().any(|c| c.contains(p))) {
                continue;
            }
            let y = translate(&x, s.scale(2));
            if !g.displacement(&y)?.is_zero() {
                continue;
            }
            // g x must avoid the new support
            if sets.iter().any(|c| c.contains(&gx)) {
                continue;
            }
            let lang = SampleLang {
                id: format!("icc:{t}"),
                points: vec![x.clone(), translate(&x, s), y.clone()],
            };
            let h = multisection_3cycle(&Clopen::Cyl(sets[0].clone()), &Clopen::Cyl(sets[1].clone()), &Clopen::Cyl(sets[2].clone()), s, s, &lang)?;
            let conj = h.compose(g).compose(&h.inverse());
            if !conj.displacement(&x)?.is_zero() {
                continue;
            }
            used.extend(sets.iter().cloned());
            protected.push(x.clone());
            protected.push(gx);
            out.push(IccConjugate {
                h,
                conjugate: conj,
                at: t,
                step: s,
            });
            continue 'points;
        }
    }
    if out.len() < count {
        return Err(LabError::Inconclusive(format!(
            "found {} of {count} disjoint orbit segments",
            out.len()
        )));
    }
    // pairwise distinctness: conj_i fixes x_i, conj_j moves it like g
    for (i, ci) in out.iter().enumerate() {
        let xi = translate(x0, ci.at);
        for (j, cj) in out.iter().enumerate() {
            let d = cj.conjugate.displacement(&xi)?;
            let expect = if i == j { LatticePoint::ZERO } else { g.displacement(&xi)? };
            if d != expect {
                return Err(LabError::Certificate(format!("conjugates {i} and {j} not separated")));
            }
        }
    }
    Ok(out)
}

/// Smallest `[−R, R]^2` cylinder `B` at `x` whose translates `tB`, `t ∈ F`,
/// are pairwise disjoint (and each inside one partition cylinder, when
/// a partition is given).
pub fn disjoint_translates_neighborhood(x: &Point, f: &FiniteRegion, partition: Option<&[ClopenSet]>, max_radius: i64) -> LabResult<ClopenSet> {
    let ts = f.points();
    let mut r = 0;
    loop {
        let b = ClopenSet::cylinder(x, &FiniteRegion::centered_square(-r, r));
        let tb: Vec<ClopenSet> = ts.iter().map(|&t| b.shift(t)).collect();
        let disjoint = (0..tb.len()).all(|i| (i + 1..tb.len()).all(|j| tb[i].disjoint(&tb[j])));
        let inside = match partition {
            None => true,
            Some(ps) => tb
                .iter()
                .all(|c| ps.iter().any(|p| c.subset_of(p) == Some(true))),
        };
        if disjoint && inside {
            return Ok(b);
        }
        if r >= max_radius {
            return Err(LabError::Inconclusive(format!("no separating window up to radius {max_radius}")));
        }
        r = if r == 0 { 1 } else { r * 2 };
    }
}

/// `|W′|/|W|` for the sets of 3-cycles on `n′ ≤ n` points, and the bound
/// `2(1 − |W′|/|W|)` on the conjugation defect.
pub fn inner_amenability_ratio(n: u64, n_prime: u64) -> LabResult<(Q, Q)> {
    if n < 3 || n_prime < 3 || n_prime > n {
        return Err(LabError::pre("need 3 ≤ n′ ≤ n"));
    }
    let w = |k: u64| qu(k) * qu(k - 1) * qu(k - 2);
    let ratio = w(n_prime) / w(n);
    let bound = qu(2) * (qu(1) - &ratio);
    Ok((ratio, bound))
}

/// Collects sample points so callers can reuse one set across checks.
pub fn orbit_points(x: &Point, offsets: impl IntoIterator<Item = LatticePoint>) -> Vec<Point> {
    let mut seen = HashSet::new();
    offsets
        .into_iter()
        .filter(|v| seen.insert(*v))
        .map(|v| translate(x, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::subshift::from_fn;
    use proptest::prelude::*;

    /// Aperiodic test point on Z^2 from a hashed coordinate.
    fn hashed() -> Point {
        from_fn("hashed", |t| {
            let h = (t.x().wrapping_mul(0x9E3779B97F4A7C15u64 as i64) ^ t.y().wrapping_mul(0xC2B2AE3D27D4EB4Fu64 as i64)) as u64;
            ((h ^ (h >> 29)).wrapping_mul(0xBF58476D1CE4E5B9) >> 61) as Sym
        })
    }

    /// Parities of 2-adic valuations: aperiodic, every pattern recurs.
    fn valuation_point() -> Point {
        fn v(n: i64) -> u32 {
            if n == 0 { 7 } else { n.trailing_zeros() }
        }
        from_fn("valuation", |t| (v(t.x()) % 2 + 2 * (v(t.y()) % 2)) as Sym)
    }

    fn lang() -> SampleLang {
        SampleLang::orbit(&hashed(), &FiniteRegion::centered_square(-6, 6))
    }

    fn swap(x: &Point, at: LatticePoint, v: LatticePoint) -> TableElement {
        let a = ClopenSet::cylinder(&translate(x, at), &FiniteRegion::centered_square(-2, 2));
        let b = a.shift(v);
        assert!(a.disjoint(&b));
        TableElement {
            pieces: vec![
                Piece { domain: Clopen::Cyl(a), shift: v },
                Piece { domain: Clopen::Cyl(b), shift: -v },
            ],
        }
    }

    #[test]
    fn identity_and_shifts() {
        let l = lang();
        assert!(is_identity(&make_element(vec![], &l).unwrap(), &l).unwrap());
        let u = TableElement::global_shift(LatticePoint::new(1, 2));
        let v = TableElement::global_shift(LatticePoint::new(-3, 1));
        let uv = u.compose(&v);
        assert!(agree_on(&uv, &TableElement::global_shift(LatticePoint::new(-2, 3)), &l).unwrap());
        assert!(is_identity(&u.compose(&u.inverse()), &l).unwrap());
    }

    #[test]
    fn swap_is_valid_involution() {
        let x = hashed();
        let l = lang();
        let g = swap(&x, LatticePoint::new(1, 1), LatticePoint::new(0, 3));
        let g = make_element(g.pieces, &l).unwrap();
        assert!(is_identity(&g.compose(&g), &l).unwrap());
        assert!(!is_identity(&g, &l).unwrap());
        // an overlapping pair is rejected
        let a = ClopenSet::cylinder(&x, &FiniteRegion::singleton(2, LatticePoint::ZERO));
        let bad = vec![
            Piece { domain: Clopen::Cyl(a.clone()), shift: LatticePoint::new(1, 0) },
            Piece { domain: Clopen::Cyl(a), shift: LatticePoint::new(2, 0) },
        ];
        assert!(make_element(bad, &l).is_err());
    }

    #[test]
    fn disjoint_supports_commute() {
        let x = hashed();
        let l = lang();
        let g = swap(&x, LatticePoint::new(0, 0), LatticePoint::new(0, 2));
        let h = swap(&x, LatticePoint::new(4, 4), LatticePoint::new(1, 0));
        assert!(agree_on(&g.compose(&h), &h.compose(&g), &l).unwrap());
    }

    #[test]
    fn three_cycle_order() {
        let x = hashed();
        let l = lang();
        let a1 = ClopenSet::cylinder(&x, &FiniteRegion::centered_square(-2, 2));
        let (v12, v23) = (LatticePoint::new(3, 0), LatticePoint::new(0, 3));
        let a2 = a1.shift(v12);
        let a3 = a2.shift(v23);
        let g = multisection_3cycle(&Clopen::Cyl(a1.clone()), &Clopen::Cyl(a2), &Clopen::Cyl(a3), v12, v23, &l).unwrap();
        assert_eq!(g.displacement(&x).unwrap(), v12);
        let g2 = g.compose(&g);
        assert!(agree_on(&g.inverse(), &g2, &l).unwrap());
        assert!(is_identity(&g2.compose(&g), &l).unwrap());
        let w = nontriviality_witness(&GroupWord::power(0, 1), std::slice::from_ref(&g), &|i| l.points.get(i).cloned(), l.points.len()).unwrap();
        assert_eq!(w.unwrap().displacement.l1(), 3);
        let none = nontriviality_witness(&GroupWord::new(vec![(0, 1), (0, -1)]), &[g], &|i| l.points.get(i).cloned(), 50).unwrap();
        assert!(none.is_none());
        assert!(multisection_3cycle(&Clopen::Cyl(a1.clone()), &Clopen::Cyl(a1.clone()), &Clopen::Cyl(a1), v12, v23, &l).is_err());
    }

    #[test]
    fn word_reduction_and_counts() {
        let w = GroupWord::new(vec![(0, 1), (1, 1), (1, -1), (0, -1), (2, 1)]);
        assert_eq!(w.reduce().letters, vec![(2, 1)]);
        let words = reduced_involution_words(3, 4);
        assert_eq!(words.len(), 45);
        assert_eq!(words.iter().filter(|w| w.len() == 1).count(), 3);
        assert_eq!(words.iter().filter(|w| w.len() == 2).count(), 6);
        assert!(words.iter().all(|w| w.windows(2).all(|p| p[0] != p[1])));
    }

    #[test]
    fn inner_amenability() {
        assert_eq!(inner_amenability_ratio(5, 4).unwrap(), (q(2, 5), q(6, 5)));
        assert_eq!(inner_amenability_ratio(7, 7).unwrap(), (q(1, 1), q(0, 1)));
        assert_eq!(inner_amenability_ratio(100, 99).unwrap(), (q(97, 100), q(3, 50)));
        assert!(inner_amenability_ratio(2, 2).is_err());
        let mut prev = q(0, 1);
        for n in 10..200u64 {
            let (r, _) = inner_amenability_ratio(n, n - 3).unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn neighborhoods_separate_translates() {
        let x = hashed();
        let b = disjoint_translates_neighborhood(&x, &FiniteRegion::singleton(2, LatticePoint::ZERO), None, 8).unwrap();
        assert_eq!(b.window.len(), 1);
        let f = FiniteRegion::square(3);
        let b = disjoint_translates_neighborhood(&x, &f, None, 16).unwrap();
        let tb: Vec<_> = f.iter().map(|t| b.shift(t)).collect();
        for i in 0..tb.len() {
            assert!(tb[i].contains(&translate(&x, f.points()[i])));
            for j in i + 1..tb.len() {
                assert!(tb[i].disjoint(&tb[j]));
            }
        }
    }

    #[test]
    fn central_pairs_and_icc_conjugates() {
        let x = valuation_point();
        let pairs = asymptotically_central_pairs(&x, &[1, 2, 8], &FiniteRegion::centered_square(-200, 200)).unwrap();
        assert_eq!(pairs.len(), 2);
        let mut pts: Vec<Point> = Vec::new();
        for p in &pairs {
            pts.extend(p.orbit.iter().map(|t| translate(&x, *t)));
        }
        let l = SampleLang { id: "pairs".into(), points: pts };
        assert!(!commute_on(&pairs[0].c, &pairs[0].d, &l).unwrap());
        assert!(commute_on(&pairs[0].c, &pairs[1].d, &l).unwrap());
        assert!(commute_on(&pairs[1].c, &pairs[0].c, &l).unwrap());

        let x = hashed();
        let g = swap(&x, LatticePoint::ZERO, LatticePoint::new(0, 3)).compose(&swap(&x, LatticePoint::new(5, 5), LatticePoint::new(0, -3)));
        let conj = icc_witness(&g, &x, LatticePoint::new(1, 0), 2, &FiniteRegion::centered_square(-6, 6), 2).unwrap();
        assert_eq!(conj.len(), 2);
        assert!(icc_witness(&TableElement::identity(), &x, LatticePoint::new(1, 0), 1, &FiniteRegion::square(3), 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn group_laws_on_sample(a in 0i64..4, b in 0i64..4, c in 1i64..4, d in 1i64..4) {
            let x = hashed();
            let l = SampleLang::orbit(&x, &FiniteRegion::centered_square(-3, 3));
            let g = swap(&x, LatticePoint::new(a, b), LatticePoint::new(0, c));
            let h = swap(&x, LatticePoint::new(b, a), LatticePoint::new(d, 0));
            let k = TableElement::global_shift(LatticePoint::new(c, -d));
            let lhs = g.compose(&h).compose(&k);
            let rhs = g.compose(&h.compose(&k));
            prop_assert!(agree_on(&lhs, &rhs, &l).unwrap());
            prop_assert!(agree_on(&g.compose(&h).inverse(), &h.inverse().compose(&g.inverse()), &l).unwrap());
        }

        #[test]
        fn word_trace_sums(letters in proptest::collection::vec(0usize..2, 0..6)) {
            let x = hashed();
            let gens = [swap(&x, LatticePoint::ZERO, LatticePoint::new(0, 2)), TableElement::global_shift(LatticePoint::new(1, 0))];
            let w = GroupWord::involutions(&letters);
            let ev = evaluate_word(&w, &gens, &x).unwrap();
            let sum = ev.trace.iter().fold(LatticePoint::ZERO, |a, b| a + *b);
            prop_assert_eq!(sum, ev.displacement);
        }
    }
}
