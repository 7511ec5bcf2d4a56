//! Spaces of global sections `H^0(C, D)` for divisors of the form
//! "multiple of the base class minus rational points".
//!
//! Sections of the base class `m` (`m * inf` on hyperelliptic models, `m * H`
//! on plane models) are spanned by a natural monomial basis:
//! `x^i` and `x^j y` by pole order, or the degree-`m` monomials not divisible
//! by the leading monomial of `F`. Products of natural basis elements reduce
//! back to natural coordinates through the curve equation, so every section
//! is carried as a sparse coordinate vector. Subtracted points cut the space
//! down by jet-vanishing conditions.
//!
//! Every space is also evaluated on a [`SampleSet`]; the evaluation matrix
//! certifies independence of the basis and every product computed
//! symbolically.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveKind, CurveModel, Equation, PointOnCurve, DEFAULT_MAX_ORDER};
use crate::error::{Error, Result};
use crate::field::{Fp, PrimeField};
use crate::linalg;
use crate::series::Series;

/// Exponents of `x^i y^j z^k`; hyperelliptic monomials use `[i, e, 0]` for `x^i y^e`.
pub type Monomial = [u32; 3];

/// Sparse vector as sorted `(index, value)` pairs.
pub type SparseVec = Vec<(u32, Fp)>;

/// Divisor `base * (base class) - sum(mult * point)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DivisorSpec {
    pub base: i64,
    /// Sorted by point, multiplicities at least 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subtracted: Vec<(PointOnCurve, u32)>,
}

impl DivisorSpec {
    pub fn trivial() -> Self {
        DivisorSpec { base: 0, subtracted: Vec::new() }
    }

    pub fn base_multiple(m: i64) -> Self {
        DivisorSpec { base: m, subtracted: Vec::new() }
    }

    pub fn canonical(curve: &CurveModel) -> Self {
        DivisorSpec::base_multiple(curve.canonical_multiple())
    }

    pub fn is_trivial(&self) -> bool {
        self.base == 0 && self.subtracted.is_empty()
    }

    /// Degree of the base-class part alone.
    pub fn base_degree(&self, curve: &CurveModel) -> i64 {
        self.base * curve.base_degree()
    }

    pub fn subtracted_degree(&self) -> i64 {
        self.subtracted.iter().map(|s| s.1 as i64).sum()
    }

    pub fn degree(&self, curve: &CurveModel) -> i64 {
        self.base_degree(curve) - self.subtracted_degree()
    }

    pub fn support(&self) -> impl Iterator<Item = &PointOnCurve> {
        self.subtracted.iter().map(|s| &s.0)
    }

    pub fn multiplicity_at(&self, p: &PointOnCurve) -> u32 {
        self.subtracted.iter().find(|s| &s.0 == p).map_or(0, |s| s.1)
    }

    /// `self - sum(points)`, merging multiplicities at repeated points.
    pub fn minus_points(&self, points: &[(PointOnCurve, u32)]) -> Self {
        let mut map: BTreeMap<PointOnCurve, u32> = self.subtracted.iter().copied().collect();
        for &(p, m) in points {
            *map.entry(p).or_insert(0) += m;
        }
        DivisorSpec { base: self.base, subtracted: map.into_iter().filter(|e| e.1 > 0).collect() }
    }

    /// Tensor product (sum of divisors).
    pub fn tensor(&self, other: &DivisorSpec) -> Self {
        DivisorSpec { base: self.base + other.base, ..self.clone() }.minus_points(&other.subtracted)
    }

    /// `q`-th tensor power; negative powers exist only without subtracted points.
    pub fn power(&self, q: i64) -> Result<Self> {
        if q < 0 && !self.subtracted.is_empty() {
            return Err(Error::NotRepresentable(format!("({self})^{q}")));
        }
        Ok(DivisorSpec {
            base: self.base * q,
            subtracted: self.subtracted.iter().map(|&(p, m)| (p, m * q.max(0) as u32)).collect(),
        })
    }

    /// `self - other`; representable when the points of `other` are also
    /// subtracted in `self` with at least the same multiplicity.
    pub fn difference(&self, other: &DivisorSpec) -> Result<Self> {
        let mut map: BTreeMap<PointOnCurve, u32> = self.subtracted.iter().copied().collect();
        for &(p, m) in &other.subtracted {
            match map.get_mut(&p) {
                Some(have) if *have >= m => *have -= m,
                _ => return Err(Error::NotRepresentable(format!("({self}) - ({other})"))),
            }
        }
        Ok(DivisorSpec { base: self.base - other.base, subtracted: map.into_iter().filter(|e| e.1 > 0).collect() })
    }

    /// Parses recipes such as `trivial`, `canonical`, `K`, `5*inf`, `3*H - P1 - 2*P4`
    /// or `3*H - P[1,2,1]`. `P<i>` is the `i`-th enumerated rational point,
    /// counting from 1.
    pub fn parse(curve: &CurveModel, recipe: &str) -> Result<Self> {
        let cleaned: String = recipe.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parts = cleaned.split('-');
        let head = parts.next().unwrap_or("");
        let base = parse_base(curve, head)?;
        let mut points = Vec::new();
        for term in parts {
            let (mult, name) = match term.split_once('*') {
                Some((m, n)) => (m.parse::<u32>().map_err(|_| bad(recipe))?, n),
                None => (1, term),
            };
            if mult == 0 {
                return Err(bad(recipe));
            }
            points.push((parse_point(curve, name).map_err(|e| match e {
                Error::Parse(_) => bad(recipe),
                other => other,
            })?, mult));
        }
        Ok(DivisorSpec::base_multiple(base).minus_points(&points))
    }
}

fn bad(recipe: &str) -> Error {
    Error::Parse(format!("unrecognized divisor recipe '{recipe}'"))
}

fn parse_base(curve: &CurveModel, head: &str) -> Result<i64> {
    let lower = head.to_ascii_lowercase();
    match lower.as_str() {
        "trivial" | "o" | "0" => return Ok(0),
        "canonical" | "k" => return Ok(curve.canonical_multiple()),
        _ => {}
    }
    let (m, class) = match lower.split_once('*') {
        Some((m, c)) => (m.parse::<i64>().map_err(|_| bad(head))?, c.to_string()),
        None => (1, lower.clone()),
    };
    match (class.as_str(), curve.kind()) {
        ("inf", CurveKind::Hyperelliptic) | ("h", CurveKind::Plane) => Ok(m),
        ("k" | "canonical", _) => Ok(m * curve.canonical_multiple()),
        ("inf", CurveKind::Plane) | ("h", CurveKind::Hyperelliptic) => {
            Err(Error::Parse(format!("base class '{class}' does not exist on this curve")))
        }
        _ => Err(bad(head)),
    }
}

fn parse_point(curve: &CurveModel, name: &str) -> Result<PointOnCurve> {
    let rest = name.strip_prefix('P').or_else(|| name.strip_prefix('p')).ok_or_else(|| bad(name))?;
    if let Some(inner) = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let f = curve.field();
        let vals: Vec<i64> = inner.split(',').map(|v| v.parse::<i64>()).collect::<core::result::Result<_, _>>().map_err(|_| bad(name))?;
        let coords = match vals.as_slice() {
            [x, y] => [f.elem(*x), f.elem(*y), Fp::ONE],
            [x, y, z] => [f.elem(*x), f.elem(*y), f.elem(*z)],
            _ => return Err(bad(name)),
        };
        let pts = curve.enumerate_points(usize::MAX).points;
        return pts.into_iter().find(|p| p.coords == coords).ok_or(Error::NotOnCurve { point: coords.map(|c| c.value()) });
    }
    let idx: usize = rest.parse().map_err(|_| bad(name))?;
    if idx == 0 {
        return Err(bad(name));
    }
    let pts = curve.enumerate_points(idx);
    pts.points.get(idx - 1).copied().ok_or(Error::PointShortfall { required: idx, available: pts.points.len() })
}

impl fmt::Display for DivisorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*B", self.base)?;
        for (p, m) in &self.subtracted {
            let c = p.raw();
            if *m == 1 {
                write!(f, "-P[{},{},{}]", c[0], c[1], c[2])?;
            } else {
                write!(f, "-{}*P[{},{},{}]", m, c[0], c[1], c[2])?;
            }
        }
        Ok(())
    }
}

impl DivisorSpec {
    /// Recipe string using the curve's own base-class name.
    pub fn recipe(&self, curve: &CurveModel) -> String {
        let class = match curve.kind() {
            CurveKind::Hyperelliptic => "inf",
            CurveKind::Plane => "H",
        };
        let s = self.to_string();
        format!("{}*{}{}", self.base, class, &s[s.find('B').map_or(s.len(), |i| i + 1)..])
    }
}

/// Ordered evaluation points, faithful for bundles of degree at most `guard`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    points: Vec<PointOnCurve>,
    guard: i64,
    seed: u64,
}

impl SampleSet {
    pub fn points(&self) -> &[PointOnCurve] {
        &self.points
    }

    pub fn guard(&self) -> i64 {
        self.guard
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Picks `guard + 1` affine points by a seeded shuffle of the first rational
/// points, skipping `avoid` (and, on hyperelliptic models, whole x-fibers of
/// `avoid`).
pub fn choose_sample(curve: &CurveModel, guard: i64, seed: u64, avoid: &[PointOnCurve]) -> Result<Arc<SampleSet>> {
    let needed = (guard.max(0) + 1) as usize;
    let pool_size = 4 * needed + 16 + 2 * avoid.len();
    let hyper = curve.kind() == CurveKind::Hyperelliptic;
    let blocked = |p: &PointOnCurve| {
        avoid.iter().any(|a| a == p || (hyper && a.x() == p.x()))
    };
    let mut pool: Vec<PointOnCurve> = curve.affine_points(pool_size).into_iter().filter(|p| !blocked(p)).collect();
    if pool.len() < needed {
        return Err(Error::PointShortfall { required: needed, available: pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(needed);
    Ok(Arc::new(SampleSet { points: pool, guard: guard.max(0), seed }))
}

/// The natural spanning monomials of the base class `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ambient {
    pub base: i64,
    monomials: Vec<Monomial>,
    index: BTreeMap<Monomial, u32>,
}

impl Ambient {
    pub fn new(curve: &CurveModel, m: i64) -> Self {
        let mut monomials = Vec::new();
        if m >= 0 {
            match curve.equation() {
                Equation::Hyperelliptic { .. } => {
                    let odd = 2 * curve.genus() as i64 + 1;
                    let mut by_pole: Vec<(i64, Monomial)> = Vec::new();
                    for i in 0..=(m / 2) {
                        by_pole.push((2 * i, [i as u32, 0, 0]));
                    }
                    let mut j = 0;
                    while 2 * j + odd <= m {
                        by_pole.push((2 * j + odd, [j as u32, 1, 0]));
                        j += 1;
                    }
                    by_pole.sort();
                    monomials = by_pole.into_iter().map(|e| e.1).collect();
                }
                Equation::Plane { .. } => {
                    let lead = plane_lead(curve);
                    let m = m as u32;
                    for i in (0..=m).rev() {
                        for j in (0..=m - i).rev() {
                            let mono = [i, j, m - i - j];
                            if !divides(lead, mono) {
                                monomials.push(mono);
                            }
                        }
                    }
                }
            }
        }
        let index = monomials.iter().enumerate().map(|(i, &mo)| (mo, i as u32)).collect();
        Ambient { base: m, monomials, index }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn index_of(&self, m: &Monomial) -> Option<u32> {
        self.index.get(m).copied()
    }
}

fn divides(a: Monomial, b: Monomial) -> bool {
    (0..3).all(|i| a[i] <= b[i])
}

fn mono_mul(a: Monomial, b: Monomial) -> Monomial {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Lexicographically largest monomial of `F`.
fn plane_lead(curve: &CurveModel) -> Monomial {
    match curve.equation() {
        Equation::Plane { terms, .. } => terms.iter().map(|t| t.exps).max().expect("nonzero equation"),
        Equation::Hyperelliptic { .. } => [0, 2, 0],
    }
}

/// Rewrites monomials into natural coordinates using the curve equation:
/// `y^2 -> f(x)` on hyperelliptic models, `lead(F) -> lead(F) - F / lc(F)` on
/// plane models.
pub struct Reducer {
    field: PrimeField,
    lead: Monomial,
    /// `lead = sum(c * mono)` on the curve.
    rule: Vec<(Monomial, Fp)>,
    memo: BTreeMap<Monomial, Vec<(Monomial, Fp)>>,
}

impl Reducer {
    pub fn new(curve: &CurveModel) -> Self {
        let f = curve.field();
        let (lead, rule) = match curve.equation() {
            Equation::Hyperelliptic { f: poly } => (
                [0, 2, 0],
                poly.coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, &c)| ([i as u32, 0, 0], c))
                    .collect(),
            ),
            Equation::Plane { terms, .. } => {
                let lead = plane_lead(curve);
                let lc = terms.iter().find(|t| t.exps == lead).unwrap().coeff;
                let scale = f.neg(f.inv(lc).unwrap());
                (lead, terms.iter().filter(|t| t.exps != lead).map(|t| (t.exps, f.mul(t.coeff, scale))).collect())
            }
        };
        Reducer { field: f, lead, rule, memo: BTreeMap::new() }
    }

    /// Normal form of a monomial, sorted by monomial.
    pub fn normal_form(&mut self, m: Monomial) -> Vec<(Monomial, Fp)> {
        if !divides(self.lead, m) {
            return vec![(m, Fp::ONE)];
        }
        if let Some(v) = self.memo.get(&m) {
            return v.clone();
        }
        let rest = [m[0] - self.lead[0], m[1] - self.lead[1], m[2] - self.lead[2]];
        let mut acc: BTreeMap<Monomial, Fp> = BTreeMap::new();
        let f = self.field;
        for (t, c) in self.rule.clone() {
            for (u, d) in self.normal_form(mono_mul(rest, t)) {
                let e = acc.entry(u).or_insert(Fp::ZERO);
                *e = f.add(*e, f.mul(c, d));
            }
        }
        let out: Vec<(Monomial, Fp)> = acc.into_iter().filter(|e| !e.1.is_zero()).collect();
        self.memo.insert(m, out.clone());
        out
    }
}

/// Value of a natural monomial at an affine point.
fn eval_monomial(f: PrimeField, m: Monomial, p: &PointOnCurve) -> Fp {
    (0..3).fold(Fp::ONE, |acc, i| f.mul(acc, f.pow(p.coords[i], m[i] as u64)))
}

/// Truncated local series of each natural monomial at a point, in the
/// trivialization where the chart coordinate is 1.
pub fn monomial_series(curve: &CurveModel, monomials: &[Monomial], p: &PointOnCurve, order: usize) -> Result<Vec<Series>> {
    let f = curve.field();
    let exp = curve.local_expansion_with_max(p, order, DEFAULT_MAX_ORDER)?;
    let maxes = monomials.iter().fold([0u32; 3], |a, m| [a[0].max(m[0]), a[1].max(m[1]), a[2].max(m[2])]);
    let powers: Vec<Vec<Series>> = (0..3).map(|i| exp.coords[i].powers(f, maxes[i] as usize)).collect();
    Ok(monomials
        .iter()
        .map(|m| {
            powers[0][m[0] as usize].mul(f, &powers[1][m[1] as usize]).mul(f, &powers[2][m[2] as usize])
        })
        .collect())
}

/// `H^0` of a divisor: a basis of sparse natural-coordinate vectors together
/// with its evaluations on a sample set.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    divisor: DivisorSpec,
    ambient: Ambient,
    basis: Vec<SparseVec>,
    /// Ambient index holding coordinate `i` of a section in this basis.
    coord_cols: Vec<u32>,
    /// Reduced jet conditions `(pivot ambient index, row)`.
    constraints: Vec<(u32, SparseVec)>,
    samples: Arc<SampleSet>,
    eval: Vec<Vec<Fp>>,
}

impl SectionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn divisor(&self) -> &DivisorSpec {
        &self.divisor
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// Basis sections in natural coordinates.
    pub fn basis(&self) -> &[SparseVec] {
        &self.basis
    }

    pub fn samples(&self) -> &Arc<SampleSet> {
        &self.samples
    }

    /// Values of basis section `j` at the sample points.
    pub fn evaluations(&self) -> &[Vec<Fp>] {
        &self.eval
    }

    /// `N x h` evaluation matrix, row-major.
    pub fn evaluation_matrix(&self) -> Vec<Vec<Fp>> {
        (0..self.samples.len()).map(|i| self.eval.iter().map(|col| col[i]).collect()).collect()
    }

    /// Coordinates of an ambient vector in this basis, or
    /// [`Error::ProductNotContained`] if it violates a jet condition.
    pub fn coordinates(&self, field: PrimeField, v: &SparseVec) -> Result<SparseVec> {
        let dense_get = |idx: u32| v.binary_search_by_key(&idx, |e| e.0).map_or(Fp::ZERO, |k| v[k].1);
        for (_, row) in &self.constraints {
            let s = row.iter().fold(Fp::ZERO, |acc, &(c, r)| field.add(acc, field.mul(r, dense_get(c))));
            if !s.is_zero() {
                return Err(Error::ProductNotContained);
            }
        }
        let mut out = Vec::new();
        for (i, &c) in self.coord_cols.iter().enumerate() {
            let x = dense_get(c);
            if !x.is_zero() {
                out.push((i as u32, x));
            }
        }
        Ok(out)
    }

    /// Evaluates a section given by coordinates in this basis.
    pub fn evaluate(&self, field: PrimeField, coords: &SparseVec) -> Vec<Fp> {
        let mut out = vec![Fp::ZERO; self.samples.len()];
        for &(j, c) in coords {
            for (o, &e) in out.iter_mut().zip(&self.eval[j as usize]) {
                *o = field.add(*o, field.mul(c, e));
            }
        }
        out
    }
}

/// Builds `H^0(d)` on a sample set, auditing independence on the samples and
/// Riemann-Roch.
pub fn riemann_roch_space(curve: &CurveModel, d: &DivisorSpec, samples: &Arc<SampleSet>) -> Result<SectionSpace> {
    let f = curve.field();
    let needed = d.base_degree(curve);
    if needed > samples.guard {
        return Err(Error::GuardViolation { needed, guard: samples.guard });
    }
    if samples.points.iter().any(|s| d.multiplicity_at(s) > 0) {
        return Err(Error::SampleCollision);
    }
    let ambient = Ambient::new(curve, d.base);
    let amb = ambient.len();

    let mut jets: Vec<Vec<Fp>> = Vec::new();
    for &(p, mult) in &d.subtracted {
        if mult as usize > DEFAULT_MAX_ORDER + 1 {
            return Err(Error::MultiplicityTooLarge { multiplicity: mult, max: DEFAULT_MAX_ORDER as u32 + 1 });
        }
        if amb == 0 {
            continue;
        }
        let series = monomial_series(curve, ambient.monomials(), &p, mult as usize - 1)?;
        for k in 0..mult as usize {
            jets.push(series.iter().map(|s| s.coeff(k)).collect());
        }
    }
    let pivots = linalg::rref(f, &mut jets);
    let mut is_pivot = vec![false; amb];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let constraints: Vec<(u32, SparseVec)> = pivots
        .iter()
        .zip(&jets)
        .map(|(&c, row)| {
            (c as u32, row.iter().enumerate().filter(|e| !e.1.is_zero()).map(|(i, &v)| (i as u32, v)).collect())
        })
        .collect();
    let coord_cols: Vec<u32> = (0..amb as u32).filter(|&c| !is_pivot[c as usize]).collect();
    let basis: Vec<SparseVec> = coord_cols
        .iter()
        .map(|&free| {
            let mut v: SparseVec = vec![(free, Fp::ONE)];
            for (&pc, row) in pivots.iter().zip(&jets) {
                let r = row[free as usize];
                if !r.is_zero() {
                    v.push((pc as u32, f.neg(r)));
                }
            }
            v.sort_unstable_by_key(|e| e.0);
            v
        })
        .collect();

    let mono_eval: Vec<Vec<Fp>> = ambient
        .monomials()
        .iter()
        .map(|&m| samples.points.iter().map(|p| eval_monomial(f, m, p)).collect())
        .collect();
    let eval: Vec<Vec<Fp>> = basis
        .iter()
        .map(|v| {
            let mut col = vec![Fp::ZERO; samples.len()];
            for &(i, c) in v {
                for (o, &e) in col.iter_mut().zip(&mono_eval[i as usize]) {
                    *o = f.add(*o, f.mul(c, e));
                }
            }
            col
        })
        .collect();

    let space = SectionSpace { divisor: d.clone(), ambient, basis, coord_cols, constraints, samples: samples.clone(), eval };
    audit_space(curve, &space)?;
    Ok(space)
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

fn audit_space(curve: &CurveModel, space: &SectionSpace) -> Result<()> {
    let h = space.dim() as i64;
    let rank = linalg::column_rank(curve.field(), &space.eval) as i64;
    if rank != h {
        return Err(Error::DimensionMismatch { what: "rank of sample evaluations", expected: h, found: rank });
    }
    if let Equation::Plane { degree, .. } = curve.equation() {
        let m = space.divisor.base;
        let expected = if m < 0 { 0 } else { binom(m + 2, 2) - binom(m - *degree as i64 + 2, 2) };
        if space.ambient.len() as i64 != expected {
            return Err(Error::DimensionMismatch { what: "forms of degree m on the curve", expected, found: space.ambient.len() as i64 });
        }
    }
    let deg = space.divisor.degree(curve);
    let g = curve.genus() as i64;
    if deg > 2 * g - 2 && h != deg - g + 1 {
        return Err(Error::DimensionMismatch { what: "Riemann-Roch h0 of a nonspecial divisor", expected: deg - g + 1, found: h });
    }
    if deg < 0 && h != 0 {
        return Err(Error::DimensionMismatch { what: "h0 of a negative-degree divisor", expected: 0, found: h });
    }
    if (0..=2 * g - 2).contains(&deg) {
        if h < deg - g + 1 {
            return Err(Error::DimensionMismatch { what: "Riemann-Roch lower bound on h0", expected: deg - g + 1, found: h });
        }
        if h > deg / 2 + 1 {
            return Err(Error::DimensionMismatch { what: "Clifford bound on h0", expected: deg / 2 + 1, found: h });
        }
    }
    Ok(())
}

/// Coordinates of all products `a_i * b_j` in the basis of `target`,
/// indexed `i * b.dim() + j`.
#[derive(Clone, Debug)]
pub struct ProductTable {
    pub rows: usize,
    pub cols: usize,
    pub products: Vec<SparseVec>,
}

impl ProductTable {
    pub fn get(&self, i: usize, j: usize) -> &SparseVec {
        &self.products[i * self.cols + j]
    }
}

/// Multiplies two spaces into `target`, certifying each product twice:
/// symbolically (it satisfies the target's jet conditions) and numerically
/// (its coordinates reproduce the pointwise product on the samples).
pub fn product_table(curve: &CurveModel, a: &SectionSpace, b: &SectionSpace, target: &SectionSpace) -> Result<ProductTable> {
    if !Arc::ptr_eq(&a.samples, &b.samples) && a.samples != b.samples
        || !Arc::ptr_eq(&a.samples, &target.samples) && a.samples != target.samples
    {
        return Err(Error::SampleSetMismatch);
    }
    let needed = a.divisor.base_degree(curve) + b.divisor.base_degree(curve);
    if needed > target.samples.guard {
        return Err(Error::GuardViolation { needed, guard: target.samples.guard });
    }
    if a.dim() == 0 || b.dim() == 0 {
        return Ok(ProductTable { rows: a.dim(), cols: b.dim(), products: Vec::new() });
    }
    if target.divisor.base != a.divisor.base + b.divisor.base {
        return Err(Error::ProductNotContained);
    }
    let f = curve.field();
    let mut reducer = Reducer::new(curve);
    let mut products = Vec::with_capacity(a.dim() * b.dim());
    for (i, va) in a.basis.iter().enumerate() {
        for (j, vb) in b.basis.iter().enumerate() {
            let mut acc: BTreeMap<u32, Fp> = BTreeMap::new();
            for &(ia, ca) in va {
                for &(ib, cb) in vb {
                    let m = mono_mul(a.ambient.monomials[ia as usize], b.ambient.monomials[ib as usize]);
                    let c = f.mul(ca, cb);
                    for (u, d) in reducer.normal_form(m) {
                        let idx = target.ambient.index_of(&u).ok_or(Error::ProductNotContained)?;
                        let e = acc.entry(idx).or_insert(Fp::ZERO);
                        *e = f.add(*e, f.mul(c, d));
                    }
                }
            }
            let v: SparseVec = acc.into_iter().filter(|e| !e.1.is_zero()).collect();
            let coords = target.coordinates(f, &v)?;
            let lhs: Vec<Fp> = a.eval[i].iter().zip(&b.eval[j]).map(|(&x, &y)| f.mul(x, y)).collect();
            if target.evaluate(f, &coords) != lhs {
                return Err(Error::ProductNotContained);
            }
            products.push(coords);
        }
    }
    Ok(ProductTable { rows: a.dim(), cols: b.dim(), products })
}

/// The product space `H^0(A + B)` together with the certified product table.
#[derive(Clone, Debug)]
pub struct Multiplication {
    pub target: SectionSpace,
    pub table: ProductTable,
}

pub fn multiply(curve: &CurveModel, a: &SectionSpace, b: &SectionSpace) -> Result<Multiplication> {
    let target = riemann_roch_space(curve, &a.divisor.tensor(&b.divisor), &a.samples)?;
    let table = product_table(curve, a, b, &target)?;
    Ok(Multiplication { target, table })
}

/// `h^0` and `h^1`, with the Serre-duality cross-check recorded when `K - d`
/// is representable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cohomology {
    pub h0: i64,
    pub h1: i64,
    pub degree: i64,
    pub serre_checked: bool,
}

/// Seed used for the sample sets behind standalone `h0_h1` calls.
pub const AUDIT_SEED: u64 = 0x5eed;

fn h0_only(curve: &CurveModel, d: &DivisorSpec) -> Result<i64> {
    if d.base < 0 {
        return Ok(0);
    }
    let avoid: Vec<PointOnCurve> = d.support().copied().collect();
    let samples = choose_sample(curve, d.base_degree(curve), AUDIT_SEED, &avoid)?;
    Ok(riemann_roch_space(curve, d, &samples)?.dim() as i64)
}

pub fn h0_h1(curve: &CurveModel, d: &DivisorSpec) -> Result<Cohomology> {
    let g = curve.genus() as i64;
    let degree = d.degree(curve);
    let h0 = h0_only(curve, d)?;
    let h1 = h0 - degree + g - 1;
    if degree > 2 * g - 2 && h1 != 0 {
        return Err(Error::DimensionMismatch { what: "h1 of a divisor of degree > 2g-2", expected: 0, found: h1 });
    }
    let mut serre_checked = false;
    if let Ok(dual) = DivisorSpec::canonical(curve).difference(d) {
        let h0_dual = h0_only(curve, &dual)?;
        if h0_dual != h1 {
            return Err(Error::DimensionMismatch { what: "Serre duality h1(D) = h0(K - D)", expected: h0_dual, found: h1 });
        }
        serre_checked = true;
    }
    Ok(Cohomology { h0, h1, degree, serre_checked })
}

/// Cohomology of `K - d` when only `d` is representable.
pub fn h0_h1_canonical_minus(curve: &CurveModel, d: &DivisorSpec) -> Result<Cohomology> {
    let c = h0_h1(curve, d)?;
    Ok(Cohomology { h0: c.h1, h1: c.h0, degree: 2 * curve.genus() as i64 - 2 - c.degree, serre_checked: c.serre_checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn g2() -> CurveModel {
        CurveModel::hyperelliptic(PrimeField::new(10007).unwrap(), &[1, 0, 0, 0, 0, 1]).unwrap()
    }

    fn quartic() -> CurveModel {
        CurveModel::plane(PrimeField::new(10007).unwrap(), &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]]).unwrap()
    }

    #[test]
    fn gap_bases() {
        let c = g2();
        let s = choose_sample(&c, 60, 1, &[]).unwrap();
        assert_eq!(s.len(), 61);
        let five = riemann_roch_space(&c, &DivisorSpec::base_multiple(5), &s).unwrap();
        assert_eq!(five.ambient().monomials(), &[[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]]);
        let two = riemann_roch_space(&c, &DivisorSpec::base_multiple(2), &s).unwrap();
        assert_eq!(two.dim(), 2);
        assert_eq!(h0_h1(&c, &DivisorSpec::base_multiple(5)).unwrap().h1, 0);
        let k = h0_h1(&c, &DivisorSpec::canonical(&c)).unwrap();
        assert_eq!((k.h0, k.h1), (2, 1));
        assert!(k.serre_checked);
    }

    #[test]
    fn sample_edge_cases() {
        let c = g2();
        assert_eq!(choose_sample(&c, 0, 3, &[]).unwrap().len(), 1);
        let small = CurveModel::hyperelliptic(PrimeField::new(7).unwrap(), &[1, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(choose_sample(&small, 60, 1, &[]).unwrap_err(), Error::PointShortfall { required: 61, available: 7 });
        let a = choose_sample(&c, 20, 9, &[]).unwrap();
        let b = choose_sample(&c, 20, 9, &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plane_spaces() {
        let q = quartic();
        let s = choose_sample(&q, 40, 2, &[]).unwrap();
        assert_eq!(riemann_roch_space(&q, &DivisorSpec::base_multiple(2), &s).unwrap().dim(), 6);
        let pts = q.enumerate_points(3).points;
        let d = DivisorSpec::base_multiple(3).minus_points(&pts.iter().map(|&p| (p, 1)).collect::<Vec<_>>());
        let s = choose_sample(&q, 40, 2, &pts).unwrap();
        assert_eq!(riemann_roch_space(&q, &d, &s).unwrap().dim(), 7);
        let k = h0_h1(&q, &DivisorSpec::canonical(&q)).unwrap();
        assert_eq!((k.h0, k.h1), (3, 1));
    }

    #[test]
    fn products() {
        let c = g2();
        let s = choose_sample(&c, 10, 4, &[]).unwrap();
        let five = riemann_roch_space(&c, &DivisorSpec::base_multiple(5), &s).unwrap();
        let m = multiply(&c, &five, &five).unwrap();
        assert_eq!(m.target.dim(), 9);
        let one = riemann_roch_space(&c, &DivisorSpec::trivial(), &s).unwrap();
        let m1 = multiply(&c, &five, &one).unwrap();
        assert_eq!(m1.target.dim(), 4);
        // multiplying by the constant 1 is the identity on coordinates
        for i in 0..4 {
            assert_eq!(m1.table.get(i, 0), &vec![(i as u32, Fp::ONE)]);
        }
        let q = quartic();
        let s = choose_sample(&q, 12, 4, &[]).unwrap();
        let o2 = riemann_roch_space(&q, &DivisorSpec::base_multiple(2), &s).unwrap();
        let o1 = riemann_roch_space(&q, &DivisorSpec::base_multiple(1), &s).unwrap();
        assert_eq!(multiply(&q, &o2, &o1).unwrap().target.dim(), 10);
        let s_small = choose_sample(&c, 6, 4, &[]).unwrap();
        let five = riemann_roch_space(&c, &DivisorSpec::base_multiple(5), &s_small).unwrap();
        assert!(matches!(multiply(&c, &five, &five), Err(Error::GuardViolation { needed: 10, guard: 6 })));
    }

    #[test]
    fn recipes() {
        let c = g2();
        assert_eq!(DivisorSpec::parse(&c, "5*inf").unwrap(), DivisorSpec::base_multiple(5));
        assert_eq!(DivisorSpec::parse(&c, "canonical").unwrap(), DivisorSpec::base_multiple(2));
        assert_eq!(DivisorSpec::parse(&c, "trivial").unwrap(), DivisorSpec::trivial());
        let d = DivisorSpec::parse(&c, "K - P1").unwrap();
        assert_eq!(d.degree(&c), 1);
        assert_eq!(DivisorSpec::parse(&c, &d.recipe(&c)).unwrap(), d);
        assert!(DivisorSpec::parse(&c, "3*H").is_err());
        let q = quartic();
        let d = DivisorSpec::parse(&q, "3*H - P1 - P2 - 2*P3").unwrap();
        assert_eq!(d.degree(&q), 8);
        assert!(DivisorSpec::canonical(&q).difference(&d).is_err());
        assert_eq!(d.difference(&d).unwrap(), DivisorSpec::trivial());
    }

    #[test]
    fn inner_projection_dimensions() {
        let c = g2();
        let p = c.enumerate_points(1).points[0];
        let kx = DivisorSpec::canonical(&c).minus_points(&[(p, 1)]);
        let h = h0_h1(&c, &kx).unwrap();
        assert_eq!((h.degree, h.h0, h.h1), (1, 1, 1));
        let q = quartic();
        let p = q.enumerate_points(1).points[0];
        let h = h0_h1(&q, &DivisorSpec::canonical(&q).minus_points(&[(p, 1)])).unwrap();
        assert_eq!((h.degree, h.h0, h.h1), (3, 2, 1));
    }
}
