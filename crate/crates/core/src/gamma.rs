//! Exact finite probability for almost-invariant half-sets: i.i.d. sum laws,
//! the event `W ≤ −U < V`, half-set discrepancies and translate packing.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::lattice::{is_invariant, FiniteRegion, InvarianceReport, LatticePoint};
use crate::rational::{q, qu, Q};

/// Finitely supported centered law on `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    atoms: Vec<(Q, Q)>,
}

impl FiniteDistribution {
    /// Merges repeated values and validates mass, range and centering.
    pub fn new(atoms: impl IntoIterator<Item = (Q, Q)>) -> LabResult<Self> {
        let mut merged: BTreeMap<Q, Q> = BTreeMap::new();
        for (v, m) in atoms {
            if !m.is_positive() {
                return Err(LabError::pre("atom masses must be positive"));
            }
            if v.abs() > Q::one() {
                return Err(LabError::pre(format!("atom value {v} outside [-1,1]")));
            }
            *merged.entry(v).or_insert_with(Q::zero) += m;
        }
        let total: Q = merged.values().sum();
        if total != Q::one() {
            return Err(LabError::pre(format!("masses sum to {total}, not 1")));
        }
        let mean: Q = merged.iter().map(|(v, m)| v * m).sum();
        if !mean.is_zero() {
            return Err(LabError::pre(format!("law has mean {mean}, not 0")));
        }
        if merged.len() == 1 {
            return Err(LabError::pre("law is concentrated at 0"));
        }
        Ok(FiniteDistribution {
            atoms: merged.into_iter().collect(),
        })
    }

    pub fn uniform(values: &[Q]) -> LabResult<Self> {
        let m = Q::new(BigInt::one(), BigInt::from(values.len()));
        Self::new(values.iter().map(|v| (v.clone(), m.clone())))
    }

    /// uniform on `{−1, 1}`
    pub fn uniform2() -> Self {
        Self::uniform(&[q(-1, 1), q(1, 1)]).unwrap()
    }

    /// uniform on `{±1/2, ±1}`
    pub fn uniform4() -> Self {
        Self::uniform(&[q(-1, 1), q(-1, 2), q(1, 2), q(1, 1)]).unwrap()
    }

    /// uniform on `{±1/3, ±1}`
    pub fn uniform4b() -> Self {
        Self::uniform(&[q(-1, 1), q(-1, 3), q(1, 3), q(1, 1)]).unwrap()
    }

    pub fn atoms(&self) -> &[(Q, Q)] {
        &self.atoms
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionDoc {
    atoms: Vec<[i64; 4]>,
}

impl Serialize for FiniteDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::Error;
        let mut atoms = Vec::new();
        for (v, m) in &self.atoms {
            let n = |x: &BigInt| x.to_i64().ok_or_else(|| S::Error::custom("atom does not fit i64"));
            atoms.push([n(v.numer())?, n(v.denom())?, n(m.numer())?, n(m.denom())?]);
        }
        DistributionDoc { atoms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = DistributionDoc::deserialize(d)?;
        let mut atoms = Vec::new();
        for [a, b, c, e] in doc.atoms {
            if b == 0 || e == 0 {
                return Err(D::Error::custom("zero denominator"));
            }
            atoms.push((q(a, b), q(c, e)));
        }
        FiniteDistribution::new(atoms).map_err(D::Error::custom)
    }
}

/// Exact law of a sum of i.i.d. copies, sorted by value.
#[derive(Clone, Debug, PartialEq)]
pub struct SumLaw {
    pub n: usize,
    pub atoms: Vec<(Q, Q)>,
}

impl SumLaw {
    pub fn point_mass_zero() -> Self {
        SumLaw {
            n: 0,
            atoms: vec![(Q::zero(), Q::one())],
        }
    }

    pub fn total_mass(&self) -> Q {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    pub fn mean(&self) -> Q {
        self.atoms.iter().map(|(v, m)| v * m).sum()
    }

    fn convolve(&self, nu: &FiniteDistribution) -> SumLaw {
        let mut out: BTreeMap<Q, Q> = BTreeMap::new();
        for (v, m) in &self.atoms {
            for (a, p) in nu.atoms() {
                *out.entry(v + a).or_insert_with(Q::zero) += m * p;
            }
        }
        let law = SumLaw {
            n: self.n + 1,
            atoms: out.into_iter().collect(),
        };
        assert!(law.total_mass().is_one() && law.mean().is_zero(), "convolution lost exactness");
        law
    }

    /// `P(S ≤ x)`
    pub fn cdf(&self, x: &Q) -> Q {
        self.atoms.iter().take_while(|(v, _)| v <= x).map(|(_, m)| m).sum()
    }

    /// `P(S > x)`
    pub fn survival(&self, x: &Q) -> Q {
        Q::one() - self.cdf(x)
    }
}

pub fn iid_sum_law(nu: &FiniteDistribution, n: usize) -> SumLaw {
    let mut law = SumLaw::point_mass_zero();
    for _ in 0..n {
        law = law.convolve(nu);
    }
    law
}

/// Grows sum laws on demand so repeated queries share convolutions.
pub struct SumLawCache<'a> {
    nu: &'a FiniteDistribution,
    laws: Vec<SumLaw>,
    prefix: Vec<Vec<Q>>,
}

impl<'a> SumLawCache<'a> {
    pub fn new(nu: &'a FiniteDistribution) -> Self {
        SumLawCache {
            nu,
            laws: vec![SumLaw::point_mass_zero()],
            prefix: vec![vec![Q::one()]],
        }
    }

    pub fn law(&mut self, n: usize) -> &SumLaw {
        self.ensure(n);
        &self.laws[n]
    }

    fn ensure(&mut self, n: usize) {
        while self.laws.len() <= n {
            let next = self.laws.last().unwrap().convolve(self.nu);
            let mut acc = Q::zero();
            let pre = next
                .atoms
                .iter()
                .map(|(_, m)| {
                    acc += m;
                    acc.clone()
                })
                .collect();
            self.laws.push(next);
            self.prefix.push(pre);
        }
    }

    /// `P(S_n ≤ x)` by binary search on the prefix sums.
    fn cdf(&mut self, n: usize, x: &Q) -> Q {
        self.ensure(n);
        let law = &self.laws[n];
        let idx = law.atoms.partition_point(|(v, _)| v <= x);
        if idx == 0 {
            Q::zero()
        } else {
            self.prefix[n][idx - 1].clone()
        }
    }

    /// `P(W ≤ −U < V)` with `U, V, W` sums over `j, k, l` copies.
    pub fn prob_event(&mut self, j: usize, k: usize, l: usize) -> Q {
        self.ensure(j.max(k).max(l));
        let u_law = self.laws[j].atoms.clone();
        let mut total = Q::zero();
        for (u, pu) in &u_law {
            let neg = -u;
            let pw = self.cdf(l, &neg);
            if pw.is_zero() {
                continue;
            }
            let pv = Q::one() - self.cdf(k, &neg);
            total += pu * pw * pv;
        }
        total
    }

    /// `P(S_n > 0)`
    pub fn positive_mass(&mut self, n: usize) -> Q {
        Q::one() - self.cdf(n, &Q::zero())
    }
}

pub fn prob_event(nu: &FiniteDistribution, j: usize, k: usize, l: usize) -> Q {
    SumLawCache::new(nu).prob_event(j, k, l)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfSet {
    pub measure_a: Q,
    pub discrepancy: Q,
}

fn check_half_set_sizes(size_f: usize, size_e: usize, overlap: usize) -> LabResult<()> {
    if size_e > size_f || overlap > size_e {
        return Err(LabError::pre("need overlap ≤ |E| ≤ |F|"));
    }
    if 2 * size_e - overlap > size_f {
        return Err(LabError::pre(format!(
            "E and its image need {} points but |F| = {size_f}",
            2 * size_e - overlap
        )));
    }
    Ok(())
}

/// `ν^F(A)` and `ν^F(σA Δ A)` for `A = {Σ_E y > 0}` where `|σE ∩ E| = overlap`.
pub fn half_set_discrepancy(nu: &FiniteDistribution, size_f: usize, size_e: usize, overlap: usize) -> LabResult<HalfSet> {
    check_half_set_sizes(size_f, size_e, overlap)?;
    let mut cache = SumLawCache::new(nu);
    Ok(half_set_cached(&mut cache, size_e, overlap))
}

fn half_set_cached(cache: &mut SumLawCache<'_>, size_e: usize, overlap: usize) -> HalfSet {
    let d = size_e - overlap;
    HalfSet {
        measure_a: cache.positive_mass(size_e),
        discrepancy: qu(2) * cache.prob_event(overlap, d, d),
    }
}

/// Same quantities by enumerating every configuration on `E ∪ σE`.
/// Exponential; only for cross-checks on small sizes.
pub fn half_set_discrepancy_direct(nu: &FiniteDistribution, size_f: usize, size_e: usize, overlap: usize) -> LabResult<HalfSet> {
    check_half_set_sizes(size_f, size_e, overlap)?;
    let d = size_e - overlap;
    // coordinates: [0, overlap) shared, then E-only, then σE-only
    let n = overlap + 2 * d;
    let atoms = nu.atoms();
    let mut idx = vec![0usize; n];
    let mut measure_a = Q::zero();
    let mut disc = Q::zero();
    loop {
        let mut mass = Q::one();
        let mut se = Q::zero();
        let mut sse = Q::zero();
        for (c, &i) in idx.iter().enumerate() {
            let (v, m) = &atoms[i];
            mass *= m;
            if c < overlap + d {
                se += v;
            }
            if c < overlap || c >= overlap + d {
                sse += v;
            }
        }
        let in_a = se.is_positive();
        if in_a {
            measure_a += &mass;
        }
        if in_a != sse.is_positive() {
            disc += &mass;
        }
        let mut c = 0;
        loop {
            if c == n {
                return Ok(HalfSet {
                    measure_a,
                    discrepancy: disc,
                });
            }
            idx[c] += 1;
            if idx[c] < atoms.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub size_f: usize,
    /// largest certified grid value `j/|F|`, if any
    pub best_delta: Option<(usize, usize)>,
    /// worst discrepancy over the certified range
    pub worst_discrepancy: Option<(String, String)>,
    /// worst `|ν(A) − 1/2|` over the certified range
    pub worst_measure_gap: Option<(String, String)>,
}

/// For each `|F| ≤ max_size`, the largest grid `δ = j/|F|` for which every
/// `E` with `|E| ≥ (1−δ)|F|` and every compatible overlap passes both
/// `ε` tests.
pub fn delta_curve(nu: &FiniteDistribution, eps: &Q, max_size: usize) -> LabResult<Vec<DeltaRow>> {
    if !eps.is_positive() {
        return Err(LabError::pre("epsilon must be positive"));
    }
    let half = q(1, 2);
    let mut cache = SumLawCache::new(nu);
    let mut rows = Vec::new();
    for f in 1..=max_size {
        let mut best = None;
        let mut worst_d = Q::zero();
        let mut worst_g = Q::zero();
        for j in 0..=f {
            let e = f - j;
            let mut ok = true;
            let mut wd = worst_d.clone();
            let mut wg = worst_g.clone();
            let lo = (2 * e).saturating_sub(f);
            for o in lo..=e {
                let h = half_set_cached(&mut cache, e, o);
                let gap = (&h.measure_a - &half).abs();
                if h.discrepancy >= *eps || gap >= *eps {
                    ok = false;
                    break;
                }
                wd = wd.max(h.discrepancy);
                wg = wg.max(gap);
            }
            if !ok {
                break;
            }
            best = Some((j, f));
            worst_d = wd;
            worst_g = wg;
        }
        let pair = |x: &Q| (x.numer().to_string(), x.denom().to_string());
        rows.push(DeltaRow {
            size_f: f,
            best_delta: best,
            worst_discrepancy: best.map(|_| pair(&worst_d)),
            worst_measure_gap: best.map(|_| pair(&worst_g)),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct TranslatePacking {
    pub centers: FiniteRegion,
    pub invariance: InvarianceReport,
    /// `|F| / (2|T|²)`
    pub bound: Q,
    pub bound_holds: bool,
}

/// Lexicographic greedy `C ⊆ ⋂_{s∈T}(F − s)` with pairwise disjoint `T + c`.
pub fn greedy_disjoint_translates(t: &FiniteRegion, f: &FiniteRegion) -> LabResult<TranslatePacking> {
    if !t.contains(LatticePoint::ZERO) {
        return Err(LabError::pre("T must contain 0"));
    }
    let invariance = is_invariant(f, t, &q(1, 2))?;
    if !invariance.holds {
        return Err(LabError::pre(format!(
            "F is not (T,1/2)-invariant: ratio {}",
            invariance.ratio
        )));
    }
    let tp = t.points();
    let diffs: Vec<LatticePoint> = {
        let mut s = HashSet::new();
        for &a in &tp {
            for &b in &tp {
                s.insert(a - b);
            }
        }
        s.into_iter().collect()
    };
    let mut chosen: HashSet<LatticePoint> = HashSet::new();
    let mut order = Vec::new();
    for c in f.iter() {
        if !tp.iter().all(|&s| f.contains(c + s)) {
            continue;
        }
        if diffs.iter().all(|&d| !chosen.contains(&(c + d))) {
            chosen.insert(c);
            order.push(c);
        }
    }
    let tsize = t.len() as u64;
    let bound = Q::new((f.len() as u64).into(), (2 * tsize * tsize).into());
    let bound_holds = qu(order.len() as u64) >= bound;
    assert!(bound_holds, "translate packing bound violated");
    Ok(TranslatePacking {
        centers: FiniteRegion::from_points(f.dim(), order),
        invariance,
        bound,
        bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Event probability by listing every tuple of atoms.
    fn brute_event(nu: &FiniteDistribution, j: usize, k: usize, l: usize) -> Q {
        let atoms = nu.atoms();
        let n = j + k + l;
        let mut idx = vec![0usize; n];
        let mut total = Q::zero();
        loop {
            let (mut u, mut v, mut w, mut m) = (Q::zero(), Q::zero(), Q::zero(), Q::one());
            for (c, &i) in idx.iter().enumerate() {
                let (a, p) = &atoms[i];
                m *= p;
                if c < j {
                    u += a;
                } else if c < j + k {
                    v += a;
                } else {
                    w += a;
                }
            }
            let nu_ = -&u;
            if w <= nu_ && nu_ < v {
                total += m;
            }
            let mut c = 0;
            loop {
                if c == n {
                    return total;
                }
                idx[c] += 1;
                if idx[c] < atoms.len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
        }
    }

    #[test]
    fn sum_law_examples() {
        let nu = FiniteDistribution::uniform2();
        assert_eq!(iid_sum_law(&nu, 0), SumLaw::point_mass_zero());
        let l2 = iid_sum_law(&nu, 2);
        assert_eq!(l2.atoms, vec![(q(-2, 1), q(1, 4)), (q(0, 1), q(1, 2)), (q(2, 1), q(1, 4))]);
        for n in 0..10 {
            let l = iid_sum_law(&FiniteDistribution::uniform4(), n);
            assert!(l.mean().is_zero() && l.total_mass().is_one());
        }
    }

    #[test]
    fn event_examples() {
        let nu = FiniteDistribution::uniform2();
        assert_eq!(prob_event(&nu, 5, 0, 0), Q::zero());
        assert_eq!(prob_event(&nu, 1, 1, 1), q(1, 8));
        assert_eq!(brute_event(&nu, 1, 1, 1), q(1, 8));
        let mut prev = None;
        for j in 0..=12 {
            let p = prob_event(&nu, j, 2, 2);
            assert_eq!(p, brute_event(&nu, j, 2, 2));
            if let Some(pp) = prev {
                assert!(p <= pp);
            }
            prev = Some(p);
        }
    }

    #[test]
    fn half_set_example() {
        let nu = FiniteDistribution::uniform2();
        let h = half_set_discrepancy(&nu, 3, 2, 1).unwrap();
        assert_eq!(h, HalfSet { measure_a: q(1, 4), discrepancy: q(1, 4) });
        assert_eq!(half_set_discrepancy_direct(&nu, 3, 2, 1).unwrap(), h);
        assert_eq!(half_set_discrepancy(&nu, 5, 3, 3).unwrap().discrepancy, Q::zero());
        assert!(half_set_discrepancy(&nu, 3, 2, 0).is_err());
        assert!(half_set_discrepancy(&nu, 3, 4, 0).is_err());
    }

    #[test]
    fn measure_tends_to_half_on_odd_sizes() {
        let nu = FiniteDistribution::uniform4b();
        let mut cache = SumLawCache::new(&nu);
        let gaps: Vec<Q> = [1usize, 3, 5, 7, 9]
            .iter()
            .map(|&n| (cache.positive_mass(n) - q(1, 2)).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn distribution_validation() {
        assert!(FiniteDistribution::new([(q(1, 1), q(1, 1))]).is_err());
        assert!(FiniteDistribution::new([(q(0, 1), q(1, 1))]).is_err());
        assert!(FiniteDistribution::new([(q(2, 1), q(1, 2)), (q(-2, 1), q(1, 2))]).is_err());
        assert!(FiniteDistribution::new([(q(1, 1), q(1, 2)), (q(-1, 1), q(1, 3))]).is_err());
        let d = FiniteDistribution::uniform4();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"atoms":[[-1,1,1,4],[-1,2,1,4],[1,2,1,4],[1,1,1,4]]}"#);
        assert_eq!(serde_json::from_str::<FiniteDistribution>(&s).unwrap(), d);
        assert!(serde_json::from_str::<FiniteDistribution>(r#"{"atoms":[[1,1,1,1]]}"#).is_err());
    }

    #[test]
    fn delta_curve_rows() {
        let nu = FiniteDistribution::uniform2();
        for row in delta_curve(&nu, &q(1, 1), 8).unwrap() {
            assert_eq!(row.best_delta, Some((row.size_f, row.size_f)));
        }
        let rows = delta_curve(&nu, &q(1, 10), 12).unwrap();
        assert_eq!(rows.len(), 12);
        // row 12 against direct enumeration at the certified boundary
        let r12 = &rows[11];
        if let Some((j, f)) = r12.best_delta {
            for e in (f - j)..=f {
                for o in (2 * e).saturating_sub(f)..=e {
                    let a = half_set_discrepancy(&nu, f, e, o).unwrap();
                    let b = half_set_discrepancy_direct(&nu, f, e, o).unwrap();
                    assert_eq!(a, b);
                    assert!(a.discrepancy < q(1, 10));
                }
            }
        }
    }

    #[test]
    fn packing_example() {
        let t = FiniteRegion::from_points(2, [LatticePoint::ZERO, LatticePoint::new(1, 0)]);
        let f = FiniteRegion::square(10);
        let p = greedy_disjoint_translates(&t, &f).unwrap();
        assert_eq!(p.centers.len(), 50);
        assert!(p.bound_holds);
        let z = FiniteRegion::singleton(2, LatticePoint::ZERO);
        assert_eq!(greedy_disjoint_translates(&z, &f).unwrap().centers.len(), 100);
        let far = FiniteRegion::from_points(2, [LatticePoint::ZERO, LatticePoint::new(9, 0)]);
        assert!(greedy_disjoint_translates(&far, &f).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn event_matches_enumeration(j in 0usize..5, k in 0usize..4, l in 0usize..4) {
            let nu = FiniteDistribution::uniform2();
            prop_assert_eq!(prob_event(&nu, j, k, l), brute_event(&nu, j, k, l));
            let nu4 = FiniteDistribution::uniform4();
            if j + k + l <= 7 {
                prop_assert_eq!(prob_event(&nu4, j, k, l), brute_event(&nu4, j, k, l));
            }
        }

        #[test]
        fn half_set_routes_agree(f in 1usize..=8, e_raw in 0usize..=8, o_raw in 0usize..=8) {
            let e = e_raw.min(f);
            let o = o_raw.min(e).max((2 * e).saturating_sub(f));
            let nu = FiniteDistribution::uniform2();
            prop_assert_eq!(half_set_discrepancy(&nu, f, e, o).unwrap(), half_set_discrepancy_direct(&nu, f, e, o).unwrap());
        }
    }
}
