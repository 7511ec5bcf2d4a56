//! Jet conditions imposed by effective divisors and `p`-very-ampleness
//! verdicts over rational divisors.
//!
//! A divisor `xi` of degree `p + 1` imposes independent conditions on
//! `H^0(B)` iff its jet matrix has full row rank. `B` is `p`-very ample iff
//! every such `xi` does; a verdict searches rational `xi` exhaustively over a
//! prefix of the enumerated points and then by seeded sampling.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveKind, CurveModel, PointOnCurve};
use crate::error::{Error, Result};
use crate::field::Fp;
use crate::linalg;
use crate::sections::{choose_sample, monomial_series, riemann_roch_space, DivisorSpec, SectionSpace};
use crate::sparse::{rank_dense_oracle, OracleArithmetic, SparseMatrix};

/// Largest jet order extracted at a single point.
pub const JET_TRUNCATION: usize = 16;

pub const DEFAULT_MAX_MULTIPLICITY: u32 = 3;

/// Sum of `multiplicity * point` over distinct rational points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EffectiveDivisor {
    /// Sorted by point; multiplicities at least 1.
    points: Vec<(PointOnCurve, u32)>,
}

impl EffectiveDivisor {
    pub fn new(mut points: Vec<(PointOnCurve, u32)>) -> Result<Self> {
        points.sort_by_key(|e| e.0);
        for w in points.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::PointCollision { point: w[0].0.raw() });
            }
        }
        points.retain(|e| e.1 > 0);
        Ok(EffectiveDivisor { points })
    }

    /// Reduced divisor of a set of points.
    pub fn reduced(points: &[PointOnCurve]) -> Result<Self> {
        Self::new(points.iter().map(|&p| (p, 1)).collect())
    }

    pub fn points(&self) -> &[(PointOnCurve, u32)] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.iter().map(|e| e.1 as usize).sum()
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.points.iter().map(|e| e.1).max().unwrap_or(0)
    }
}

/// Jet rows of `space` at `point`: Taylor coefficients `e .. e + count` of each
/// basis section in the chosen local parameter, where `e` is the vanishing
/// order already imposed by the space's divisor. Row `k` has one entry per
/// basis section.
pub fn point_jets(curve: &CurveModel, space: &SectionSpace, point: &PointOnCurve, count: usize) -> Result<Vec<Vec<Fp>>> {
    let f = curve.field();
    let e = space.divisor().multiplicity_at(point) as usize;
    let order = e + count;
    if order > JET_TRUNCATION + 1 {
        return Err(Error::TruncationTooLarge { order: order - 1, max: JET_TRUNCATION });
    }
    let h = space.dim();
    let mut rows = vec![vec![Fp::ZERO; h]; count];
    if h == 0 || count == 0 {
        return Ok(rows);
    }
    let series = monomial_series(curve, space.ambient().monomials(), point, order.max(1) - 1)?;
    for (j, v) in space.basis().iter().enumerate() {
        let mut coeffs = vec![Fp::ZERO; order];
        for &(i, c) in v {
            for (k, out) in coeffs.iter_mut().enumerate() {
                *out = f.add(*out, f.mul(c, series[i as usize].coeff(k)));
            }
        }
        // sections of B(-D) vanish to order e at each point of D
        if coeffs[..e].iter().any(|c| !c.is_zero()) {
            return Err(Error::DimensionMismatch { what: "imposed vanishing order", expected: e as i64, found: -1 });
        }
        for (k, row) in rows.iter_mut().enumerate() {
            row[j] = coeffs[e + k];
        }
    }
    Ok(rows)
}

/// Evaluation map `H^0(B) -> H^0(B|_xi)`: one row block per point of `xi`
/// holding its first `multiplicity` jets, one column per basis section.
pub fn jet_matrix(curve: &CurveModel, space: &SectionSpace, xi: &EffectiveDivisor) -> Result<SparseMatrix> {
    let mut rows = Vec::with_capacity(xi.degree());
    for (pt, m) in xi.points() {
        rows.extend(point_jets(curve, space, pt, *m as usize)?);
    }
    let cols = space.dim();
    let entries = rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            row.iter().enumerate().filter(|e| !e.1.is_zero()).map(move |(c, &v)| (r as u32, c as u32, v))
        })
        .collect();
    SparseMatrix::new(rows.len(), cols, entries)
}

/// Search parameters for [`is_p_very_ample`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplenessConfig {
    /// Multiplicity ceiling; `None` picks [`DEFAULT_MAX_MULTIPLICITY`], raised
    /// to `p + 1` for the canonical class on hyperelliptic models.
    pub max_multiplicity: Option<u32>,
    /// Upper bound on the number of exhaustively enumerated divisors.
    pub exhaustive_cap: u64,
    pub random_divisors: usize,
    /// Rational points drawn into the candidate pool, in enumeration order.
    pub point_pool: usize,
}

impl Default for AmplenessConfig {
    fn default() -> Self {
        AmplenessConfig { max_multiplicity: None, exhaustive_cap: 1_000_000, random_divisors: 2000, point_pool: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplenessOutcome {
    /// `xi` fails to impose independent conditions; `jet_rank < deg xi`, confirmed
    /// by the dense oracle on a freshly built jet matrix.
    FailureWitness { divisor: EffectiveDivisor, jet_rank: usize },
    NoFailureFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// Size of the enumeration prefix searched exhaustively.
    pub exhaustive_points: usize,
    pub exhaustive_divisors: u64,
    pub sampled_divisors: u64,
    pub max_multiplicity: u32,
    /// Every rational divisor of degree `p + 1` within the multiplicity ceiling
    /// was tested. Never a statement about non-rational divisors.
    pub all_rational_divisors: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplenessVerdict {
    pub p: usize,
    pub divisor: DivisorSpec,
    pub h0: usize,
    pub outcome: AmplenessOutcome,
    pub coverage: Coverage,
}

impl AmplenessVerdict {
    pub fn failed(&self) -> bool {
        matches!(self.outcome, AmplenessOutcome::FailureWitness { .. })
    }
}

/// Number of multisets of size `k` from `n` items, saturating.
fn multisets(n: usize, k: usize) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 + i) / (i + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Advances a nondecreasing index sequence over `0..n` in lexicographic order,
/// skipping sequences that repeat an index more than `cap` times.
fn next_sequence(seq: &mut [usize], n: usize, cap: u32) -> bool {
    loop {
        let Some(i) = (0..seq.len()).rev().find(|&i| seq[i] + 1 < n) else { return false };
        let v = seq[i] + 1;
        for s in &mut seq[i..] {
            *s = v;
        }
        if repeats_within(seq, cap) {
            return true;
        }
    }
}

fn repeats_within(seq: &[usize], cap: u32) -> bool {
    let mut run = 0u32;
    for (k, &s) in seq.iter().enumerate() {
        run = if k > 0 && seq[k - 1] == s { run + 1 } else { 1 };
        if run > cap {
            return false;
        }
    }
    true
}

/// Groups a sorted index sequence into `(index, multiplicity)` pairs.
fn group(seq: &[usize]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32)> = Vec::new();
    for &s in seq {
        match out.last_mut() {
            Some((i, m)) if *i == s => *m += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

/// Jet rows per pool point, computed on first use.
struct JetCache<'a> {
    curve: &'a CurveModel,
    space: &'a SectionSpace,
    pool: &'a [PointOnCurve],
    depth: usize,
    rows: BTreeMap<usize, Vec<Vec<Fp>>>,
}

impl JetCache<'_> {
    /// Rank of the jet matrix of `sum(mult * pool[index])`.
    fn rank(&mut self, pattern: &[(usize, u32)]) -> Result<usize> {
        let mut m: Vec<Vec<Fp>> = Vec::new();
        for &(i, mult) in pattern {
            if !self.rows.contains_key(&i) {
                let r = point_jets(self.curve, self.space, &self.pool[i], self.depth)?;
                self.rows.insert(i, r);
            }
            m.extend(self.rows[&i][..mult as usize].iter().cloned());
        }
        Ok(linalg::rank(self.curve.field(), &m))
    }
}

/// Decides whether rational divisors of degree `p + 1` impose independent
/// conditions on `H^0(b)`. The first failure in enumeration order wins:
/// exhaustive candidates first, then `random_divisors` seeded draws from the
/// point pool.
pub fn is_p_very_ample(
    curve: &CurveModel,
    b: &DivisorSpec,
    p: usize,
    config: &AmplenessConfig,
    seed: u64,
) -> Result<AmplenessVerdict> {
    let avoid: Vec<PointOnCurve> = b.support().copied().collect();
    let samples = choose_sample(curve, b.base_degree(curve).max(0), seed, &avoid)?;
    let space = riemann_roch_space(curve, b, &samples)?;
    let degree = p + 1;
    let hyper_canonical = curve.kind() == CurveKind::Hyperelliptic && *b == DivisorSpec::canonical(curve);
    let max_mult = config.max_multiplicity.unwrap_or(if hyper_canonical {
        DEFAULT_MAX_MULTIPLICITY.max(degree as u32)
    } else {
        DEFAULT_MAX_MULTIPLICITY
    });
    let max_mult = max_mult.clamp(1, degree as u32);

    let enumeration = curve.enumerate_points(config.point_pool);
    let pool = enumeration.points;
    let mut exhaustive_points = pool.len();
    while exhaustive_points > 0 && multisets(exhaustive_points, degree) > config.exhaustive_cap {
        exhaustive_points -= 1;
    }
    let mut cache = JetCache { curve, space: &space, pool: &pool, depth: max_mult as usize, rows: BTreeMap::new() };
    let mut coverage = Coverage {
        exhaustive_points,
        exhaustive_divisors: 0,
        sampled_divisors: 0,
        max_multiplicity: max_mult,
        all_rational_divisors: false,
    };
    let verdict = |outcome, coverage| AmplenessVerdict { p, divisor: b.clone(), h0: space.dim(), outcome, coverage };

    let mut witness: Option<(Vec<(usize, u32)>, usize)> = None;
    if exhaustive_points > 0 {
        let mut seq = vec![0usize; degree];
        let mut valid = repeats_within(&seq, max_mult) || next_sequence(&mut seq, exhaustive_points, max_mult);
        while valid {
            let pattern = group(&seq);
            coverage.exhaustive_divisors += 1;
            let r = cache.rank(&pattern)?;
            if r < degree {
                witness = Some((pattern, r));
                break;
            }
            valid = next_sequence(&mut seq, exhaustive_points, max_mult);
        }
    }
    if witness.is_none() && !pool.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        while coverage.sampled_divisors < config.random_divisors as u64 {
            let mut seq: Vec<usize> = (0..degree).map(|_| rng.random_range(0..pool.len())).collect();
            seq.sort_unstable();
            if !repeats_within(&seq, max_mult) {
                continue;
            }
            let pattern = group(&seq);
            coverage.sampled_divisors += 1;
            let r = cache.rank(&pattern)?;
            if r < degree {
                witness = Some((pattern, r));
                break;
            }
        }
    }

    match witness {
        Some((pattern, r)) => {
            let divisor = EffectiveDivisor::new(pattern.iter().map(|&(i, m)| (pool[i], m)).collect())?;
            let oracle = rank_dense_oracle(curve.field(), &jet_matrix(curve, &space, &divisor)?, OracleArithmetic::ModP)?;
            if oracle.rank != r {
                return Err(Error::DimensionMismatch { what: "jet rank recomputed by the dense oracle", expected: r as i64, found: oracle.rank as i64 });
            }
            Ok(verdict(AmplenessOutcome::FailureWitness { divisor, jet_rank: r }, coverage))
        }
        None => {
            coverage.all_rational_divisors = enumeration.shortfall && exhaustive_points == pool.len();
            Ok(verdict(AmplenessOutcome::NoFailureFound, coverage))
        }
    }
}

/// Independently recomputes a witness: a fresh section space on a different
/// sample set, a fresh jet matrix and the dense oracle. True iff the rank is
/// below the degree.
pub fn witness_reverifies(curve: &CurveModel, b: &DivisorSpec, xi: &EffectiveDivisor, seed: u64) -> Result<bool> {
    let avoid: Vec<PointOnCurve> = b.support().copied().collect();
    let samples: Arc<_> = choose_sample(curve, b.base_degree(curve).max(0), seed.wrapping_add(1), &avoid)?;
    let space = riemann_roch_space(curve, b, &samples)?;
    let m = jet_matrix(curve, &space, xi)?;
    Ok(rank_dense_oracle(curve.field(), &m, OracleArithmetic::ModP)?.rank < xi.degree())
}

/// `b(-sum points)`: the bundle after projecting from each point in turn.
pub fn inner_projection(curve: &CurveModel, b: &DivisorSpec, points: &[PointOnCurve]) -> Result<DivisorSpec> {
    for (i, pt) in points.iter().enumerate() {
        if !curve.contains(pt) {
            return Err(Error::NotOnCurve { point: pt.raw() });
        }
        if points[..i].contains(pt) || b.multiplicity_at(pt) > 0 {
            return Err(Error::PointCollision { point: pt.raw() });
        }
        if curve.gradient(pt.coords).iter().all(|g| g.is_zero()) {
            return Err(Error::SingularPoint { point: pt.raw() });
        }
    }
    Ok(b.minus_points(&points.iter().map(|&p| (p, 1)).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::sections::h0_h1;

    fn g2() -> CurveModel {
        CurveModel::hyperelliptic(PrimeField::new(10007).unwrap(), &[1, 0, 0, 0, 0, 1]).unwrap()
    }

    fn quartic() -> CurveModel {
        CurveModel::plane(PrimeField::new(10007).unwrap(), &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]]).unwrap()
    }

    fn space(c: &CurveModel, d: &DivisorSpec) -> SectionSpace {
        let avoid: Vec<PointOnCurve> = d.support().copied().collect();
        let s = choose_sample(c, d.base_degree(c), 3, &avoid).unwrap();
        riemann_roch_space(c, d, &s).unwrap()
    }

    fn rank(c: &CurveModel, m: &SparseMatrix) -> usize {
        rank_dense_oracle(c.field(), m, OracleArithmetic::ModP).unwrap().rank
    }

    #[test]
    fn jet_examples() {
        let c = g2();
        let k = space(&c, &DivisorSpec::canonical(&c));
        let pts = c.affine_points(40);
        let simple = EffectiveDivisor::reduced(&pts[..1]).unwrap();
        assert_eq!(rank(&c, &jet_matrix(&c, &k, &simple).unwrap()), 1);
        // the two points over one x
        let p = pts.iter().find(|p| !p.ramified).unwrap();
        let q = pts.iter().find(|q| q.x() == p.x() && q != &p).unwrap();
        let fiber = EffectiveDivisor::reduced(&[*p, *q]).unwrap();
        let m = jet_matrix(&c, &k, &fiber).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(rank(&c, &m), 1);
        // x = -1 is a root of x^5 + 1, so (-1, 0) is a Weierstrass point
        let w = c.affine_points(usize::MAX).into_iter().find(|p| p.ramified).unwrap();
        let double = EffectiveDivisor::new(vec![(w, 2)]).unwrap();
        assert_eq!(rank(&c, &jet_matrix(&c, &k, &double).unwrap()), 1);
        let ordinary = EffectiveDivisor::new(vec![(*p, 2)]).unwrap();
        assert_eq!(rank(&c, &jet_matrix(&c, &k, &ordinary).unwrap()), 2);
    }

    #[test]
    fn jets_respect_imposed_vanishing() {
        let c = quartic();
        let pts = c.enumerate_points(4).points;
        let d = DivisorSpec::base_multiple(1).minus_points(&[(pts[0], 1)]);
        let s = space(&c, &d);
        assert_eq!(s.dim(), 2);
        // the next jet at the subtracted point is the tangent condition
        let xi = EffectiveDivisor::reduced(&pts[..1]).unwrap();
        assert_eq!(rank(&c, &jet_matrix(&c, &s, &xi).unwrap()), 1);
    }

    #[test]
    fn sequences_respect_the_multiplicity_cap() {
        let mut seq = vec![0usize; 3];
        let mut all = Vec::new();
        let mut ok = repeats_within(&seq, 2) || next_sequence(&mut seq, 3, 2);
        while ok {
            all.push(seq.clone());
            ok = next_sequence(&mut seq, 3, 2);
        }
        // multisets of size 3 from 3 items, minus the three constant ones
        assert_eq!(all.len(), 10 - 3);
        assert_eq!(all[0], [0, 0, 1]);
        assert_eq!(multisets(3, 3), 10);
    }

    #[test]
    fn hyperelliptic_canonical_verdicts() {
        let c = g2();
        let k = DivisorSpec::canonical(&c);
        let cfg = AmplenessConfig { random_divisors: 50, ..Default::default() };
        let v0 = is_p_very_ample(&c, &k, 0, &cfg, 1).unwrap();
        assert!(!v0.failed());
        let v1 = is_p_very_ample(&c, &k, 1, &cfg, 1).unwrap();
        let AmplenessOutcome::FailureWitness { divisor, jet_rank } = &v1.outcome else { panic!("K is not very ample") };
        assert_eq!(*jet_rank, 1);
        assert_eq!(v1.coverage.max_multiplicity, 2);
        // a fiber of the x-map: one x-coordinate
        assert!(divisor.points().iter().all(|(p, _)| p.x() == divisor.points()[0].0.x()));
        assert!(witness_reverifies(&c, &k, divisor, 5).unwrap());
    }

    #[test]
    fn high_degree_is_ample() {
        let c = g2();
        let cfg = AmplenessConfig { exhaustive_cap: 20_000, random_divisors: 200, ..Default::default() };
        let v = is_p_very_ample(&c, &DivisorSpec::base_multiple(7), 3, &cfg, 2).unwrap();
        assert!(!v.failed());
        assert!(v.coverage.exhaustive_divisors > 0);
    }

    #[test]
    fn quartic_canonical_verdicts() {
        let c = quartic();
        let k = DivisorSpec::canonical(&c);
        let cfg = AmplenessConfig { exhaustive_cap: 50_000, random_divisors: 200, ..Default::default() };
        assert!(!is_p_very_ample(&c, &k, 1, &cfg, 1).unwrap().failed());
        let v2 = is_p_very_ample(&c, &k, 2, &cfg, 1).unwrap();
        let AmplenessOutcome::FailureWitness { divisor, jet_rank } = &v2.outcome else { panic!("K is not 2-very ample") };
        assert_eq!(*jet_rank, 2);
        assert_eq!(divisor.degree(), 3);
        assert!(witness_reverifies(&c, &k, divisor, 9).unwrap());
    }

    #[test]
    fn projections() {
        let c = quartic();
        let k = DivisorSpec::canonical(&c);
        let pts = c.enumerate_points(2).points;
        assert_eq!(inner_projection(&c, &k, &[]).unwrap(), k);
        let d = inner_projection(&c, &k, &pts[..1]).unwrap();
        assert_eq!(d.degree(&c), 3);
        let coh = h0_h1(&c, &d).unwrap();
        assert_eq!((coh.h0, coh.h1), (2, 1));
        assert_eq!(inner_projection(&c, &d, &pts[..1]).unwrap_err(), Error::PointCollision { point: pts[0].raw() });
        let h = g2();
        let p = h.affine_points(1)[0];
        let e = inner_projection(&h, &DivisorSpec::canonical(&h), &[p]).unwrap();
        let coh = h0_h1(&h, &e).unwrap();
        assert_eq!((e.degree(&h), coh.h0, coh.h1), (1, 1, 1));
    }
}
