//! Explicit smooth curves over `F_p`.
//!
//! Two families are supported: odd-degree hyperelliptic models `y^2 = f(x)`
//! with `deg f = 2g + 1` (one point at infinity), and smooth plane curves
//! `F(x, y, z) = 0` of degree `D >= 4`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeField};
use crate::poly::Poly;
use crate::series::{check_order, Series};

/// Largest local-expansion order served by default.
pub const DEFAULT_MAX_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Hyperelliptic,
    Plane,
}

/// Integer coefficients as they appear in a curve description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    /// `f(x)` coefficients, constant term first.
    Univariate(Vec<i64>),
    /// Terms `[i, j, k, c]` of `c x^i y^j z^k`.
    Terms(Vec<[i64; 4]>),
}

/// Serializable curve description `{kind, p, genus, coefficients, seed}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub p: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A rational point, stored as projective coordinates normalized so that the
/// last nonzero coordinate is 1. Hyperelliptic points are always `(x, y, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointOnCurve {
    pub coords: [Fp; 3],
    /// The first affine coordinate is not a local parameter here
    /// (Weierstrass point on a hyperelliptic model).
    pub ramified: bool,
}

impl PointOnCurve {
    pub fn x(&self) -> Fp {
        self.coords[0]
    }

    pub fn y(&self) -> Fp {
        self.coords[1]
    }

    pub fn is_affine(&self) -> bool {
        self.coords[2] == Fp::ONE
    }

    /// Index of the coordinate normalized to 1.
    pub fn chart(&self) -> usize {
        if self.coords[2] == Fp::ONE {
            2
        } else if self.coords[1] == Fp::ONE {
            1
        } else {
            0
        }
    }

    fn sort_key(&self) -> (bool, Fp, Fp, Fp) {
        (!self.is_affine(), self.coords[0], self.coords[1], self.coords[2])
    }

    pub fn raw(&self) -> [u32; 3] {
        [self.coords[0].value(), self.coords[1].value(), self.coords[2].value()]
    }
}

impl PartialOrd for PointOnCurve {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PointOnCurve {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Polynomial in two affine coordinates `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bivariate {
    terms: Vec<(u32, u32, Fp)>,
}

impl Bivariate {
    fn new(mut terms: Vec<(u32, u32, Fp)>) -> Self {
        terms.retain(|t| !t.2.is_zero());
        Bivariate { terms }
    }

    pub fn eval(&self, f: PrimeField, a: Fp, b: Fp) -> Fp {
        self.terms.iter().fold(Fp::ZERO, |acc, &(i, j, c)| {
            f.add(acc, f.mul(c, f.mul(f.pow(a, i as u64), f.pow(b, j as u64))))
        })
    }

    fn partial_a(&self, f: PrimeField) -> Bivariate {
        Bivariate::new(
            self.terms
                .iter()
                .filter(|t| t.0 > 0)
                .map(|&(i, j, c)| (i - 1, j, f.mul(c, f.from_u64(i as u64))))
                .collect(),
        )
    }

    fn partial_b(&self, f: PrimeField) -> Bivariate {
        Bivariate::new(
            self.terms
                .iter()
                .filter(|t| t.1 > 0)
                .map(|&(i, j, c)| (i, j - 1, f.mul(c, f.from_u64(j as u64))))
                .collect(),
        )
    }

    fn degrees(&self) -> (u32, u32) {
        self.terms.iter().fold((0, 0), |(da, db), t| (da.max(t.0), db.max(t.1)))
    }

    pub fn eval_series(&self, f: PrimeField, a: &Series, b: &Series) -> Series {
        let (da, db) = self.degrees();
        let pa = a.powers(f, da as usize);
        let pb = b.powers(f, db as usize);
        let mut acc = Series::zero(a.order().min(b.order()));
        for &(i, j, c) in &self.terms {
            acc = acc.add(f, &pa[i as usize].mul(f, &pb[j as usize]).scale(f, c));
        }
        acc
    }

    /// Restriction to `a = a0` as a polynomial in `b`.
    fn at_a(&self, f: PrimeField, a0: Fp) -> Poly {
        let db = self.degrees().1 as usize;
        let mut coeffs = vec![Fp::ZERO; db + 1];
        for &(i, j, c) in &self.terms {
            coeffs[j as usize] = f.add(coeffs[j as usize], f.mul(c, f.pow(a0, i as u64)));
        }
        Poly::new(coeffs)
    }
}

/// Homogeneous term `c x^i y^j z^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub exps: [u32; 3],
    pub coeff: Fp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equation {
    Hyperelliptic { f: Poly },
    Plane { degree: u32, terms: Vec<Term> },
}

/// Result of the rational-point smoothness audit of a plane model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothnessAudit {
    pub points_checked: usize,
    pub exhaustive_over_rational_points: bool,
}

#[derive(Clone, Debug)]
pub struct CurveModel {
    field: PrimeField,
    genus: usize,
    gonality: Option<usize>,
    equation: Equation,
    spec: CurveSpec,
    audit: Option<SmoothnessAudit>,
}

/// Points returned by [`CurveModel::enumerate_points`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointEnumeration {
    pub points: Vec<PointOnCurve>,
    /// Set when fewer points exist than were requested.
    pub shortfall: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalParameter {
    /// `t = a - a0` for the first affine coordinate of the chart.
    First,
    /// `t = b - b0` for the second affine coordinate of the chart.
    Second,
}

/// Truncated local expansion of the homogeneous coordinates at a point.
#[derive(Clone, Debug)]
pub struct LocalExpansion {
    pub point: PointOnCurve,
    pub parameter: LocalParameter,
    pub order: usize,
    /// Series for `(x, y, z)`; the chart coordinate is the constant 1.
    pub coords: [Series; 3],
}

impl LocalExpansion {
    pub fn x(&self) -> &Series {
        &self.coords[0]
    }

    pub fn y(&self) -> &Series {
        &self.coords[1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pencil {
    /// The double cover `(x, y) -> x`.
    XMap,
    /// Projection from a point of the curve.
    Projection { center: PointOnCurve },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fiber {
    pub points: Vec<(PointOnCurve, usize)>,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GonalityCertificate {
    pub claimed: usize,
    pub pencil: Pencil,
    pub fiber_degree: usize,
    pub fibers: Vec<Fiber>,
}

/// Minimum number of split fibers checked by [`CurveModel::pencil_certificate`].
pub const CERTIFIED_FIBERS: usize = 20;

impl CurveModel {
    /// Hyperelliptic model `y^2 = f(x)` from explicit integer coefficients
    /// (constant term first).
    pub fn hyperelliptic(field: PrimeField, coeffs: &[i64]) -> Result<Self> {
        let f = Poly::from_ints(field, coeffs);
        let deg = f.degree().unwrap_or(0);
        if deg < 5 || deg.is_multiple_of(2) {
            return Err(Error::InvalidCurve(format!(
                "hyperelliptic model needs odd degree >= 5, got {deg}"
            )));
        }
        let g = f.gcd(field, &f.derivative(field));
        if g.degree() != Some(0) {
            return Err(Error::NotSquarefree { gcd: g.coeffs().iter().map(|c| c.value()).collect() });
        }
        let genus = (deg - 1) / 2;
        let spec = CurveSpec {
            kind: CurveKind::Hyperelliptic,
            p: field.modulus(),
            genus: Some(genus),
            coefficients: Some(Coefficients::Univariate(
                f.coeffs().iter().map(|&c| field.lift(c)).collect(),
            )),
            seed: None,
        };
        Ok(CurveModel { field, genus, gonality: Some(2), equation: Equation::Hyperelliptic { f }, spec, audit: None })
    }

    /// Random monic squarefree `f` of degree `2g + 1`, redrawn until squarefree.
    pub fn hyperelliptic_seeded(field: PrimeField, genus: usize, seed: u64) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidCurve(format!("genus {genus} < 2")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = field.modulus();
        loop {
            let mut coeffs: Vec<i64> = (0..2 * genus + 1).map(|_| rng.random_range(0..p) as i64).collect();
            coeffs.push(1);
            match Self::hyperelliptic(field, &coeffs) {
                Ok(mut c) => {
                    c.spec.seed = Some(seed);
                    return Ok(c);
                }
                Err(Error::NotSquarefree { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    /// Plane curve from terms `[i, j, k, c]`, all of degree `D = i + j + k`.
    pub fn plane(field: PrimeField, terms: &[[i64; 4]]) -> Result<Self> {
        let mut out: Vec<Term> = Vec::new();
        let mut degree = None;
        for t in terms {
            if t[..3].iter().any(|&e| e < 0) {
                return Err(Error::InvalidCurve(String::from("negative exponent")));
            }
            let exps = [t[0] as u32, t[1] as u32, t[2] as u32];
            let d = exps.iter().sum::<u32>();
            if *degree.get_or_insert(d) != d {
                return Err(Error::InvalidCurve(String::from("polynomial is not homogeneous")));
            }
            let coeff = field.elem(t[3]);
            match out.iter_mut().find(|o| o.exps == exps) {
                Some(o) => o.coeff = field.add(o.coeff, coeff),
                None => out.push(Term { exps, coeff }),
            }
        }
        out.retain(|t| !t.coeff.is_zero());
        out.sort_by(|a, b| b.exps.cmp(&a.exps));
        let degree = degree.unwrap_or(0);
        if degree < 4 || out.is_empty() {
            return Err(Error::InvalidCurve(format!("plane model needs degree >= 4, got {degree}")));
        }
        let d = degree as usize;
        let genus = (d - 1) * (d - 2) / 2;
        let spec = CurveSpec {
            kind: CurveKind::Plane,
            p: field.modulus(),
            genus: Some(genus),
            coefficients: Some(Coefficients::Terms(
                out.iter()
                    .map(|t| [t.exps[0] as i64, t.exps[1] as i64, t.exps[2] as i64, field.lift(t.coeff)])
                    .collect(),
            )),
            seed: None,
        };
        let mut curve = CurveModel {
            field,
            genus,
            gonality: Some(d - 1),
            equation: Equation::Plane { degree, terms: out },
            spec,
            audit: None,
        };
        curve.audit = Some(curve.smoothness_audit()?);
        Ok(curve)
    }

    /// Random plane curve of degree `D`, redrawn until the smoothness audit passes.
    pub fn plane_seeded(field: PrimeField, degree: u32, seed: u64) -> Result<Self> {
        if degree < 4 {
            return Err(Error::InvalidCurve(format!("plane model needs degree >= 4, got {degree}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = field.modulus();
        loop {
            let mut terms = Vec::new();
            for i in (0..=degree).rev() {
                for j in (0..=degree - i).rev() {
                    let k = degree - i - j;
                    terms.push([i as i64, j as i64, k as i64, rng.random_range(0..p) as i64]);
                }
            }
            match Self::plane(field, &terms) {
                Ok(mut c) => {
                    c.spec.seed = Some(seed);
                    return Ok(c);
                }
                Err(Error::SingularPoint { .. }) | Err(Error::InvalidCurve(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    /// Builds a model from its serializable description.
    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        let field = PrimeField::new(spec.p)?;
        let curve = match (spec.kind, &spec.coefficients, spec.seed) {
            (CurveKind::Hyperelliptic, Some(Coefficients::Univariate(c)), _) => Self::hyperelliptic(field, c)?,
            (CurveKind::Plane, Some(Coefficients::Terms(t)), _) => Self::plane(field, t)?,
            (CurveKind::Hyperelliptic, None, Some(seed)) => {
                let g = spec.genus.ok_or_else(|| Error::InvalidCurve(String::from("seeded curve needs genus")))?;
                Self::hyperelliptic_seeded(field, g, seed)?
            }
            (CurveKind::Plane, None, Some(seed)) => {
                let g = spec.genus.ok_or_else(|| Error::InvalidCurve(String::from("seeded curve needs genus")))?;
                let d = (4..64u32)
                    .find(|&d| ((d - 1) * (d - 2) / 2) as usize == g)
                    .ok_or_else(|| Error::InvalidCurve(format!("no smooth plane curve has genus {g}")))?;
                Self::plane_seeded(field, d, seed)?
            }
            _ => return Err(Error::InvalidCurve(String::from("coefficients do not match curve kind"))),
        };
        if let Some(g) = spec.genus {
            if g != curve.genus {
                return Err(Error::DimensionMismatch { what: "genus", expected: g as i64, found: curve.genus as i64 });
            }
        }
        Ok(curve)
    }

    /// Same integer model reduced modulo another prime.
    pub fn with_prime(&self, p: u32) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.p = p;
        if spec.coefficients.is_some() {
            spec.seed = None;
        }
        let mut c = Self::from_spec(&spec)?;
        c.spec.seed = self.spec.seed;
        Ok(c)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn gonality(&self) -> Option<usize> {
        self.gonality
    }

    pub fn kind(&self) -> CurveKind {
        match self.equation {
            Equation::Hyperelliptic { .. } => CurveKind::Hyperelliptic,
            Equation::Plane { .. } => CurveKind::Plane,
        }
    }

    pub fn equation(&self) -> &Equation {
        &self.equation
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn smoothness(&self) -> Option<SmoothnessAudit> {
        self.audit
    }

    /// Degree of the base class: 1 for the point at infinity, `D` for a line section.
    pub fn base_degree(&self) -> i64 {
        match &self.equation {
            Equation::Hyperelliptic { .. } => 1,
            Equation::Plane { degree, .. } => *degree as i64,
        }
    }

    /// Multiple of the base class equal to the canonical class.
    pub fn canonical_multiple(&self) -> i64 {
        match &self.equation {
            Equation::Hyperelliptic { .. } => 2 * self.genus as i64 - 2,
            Equation::Plane { degree, .. } => *degree as i64 - 3,
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match &self.equation {
            Equation::Hyperelliptic { f } => {
                let c: Vec<String> = f.coeffs().iter().map(|&c| format!("{}", self.field.lift(c))).collect();
                format!("hyp(g={},p={},f=[{}])", self.genus, self.field.modulus(), c.join(","))
            }
            Equation::Plane { degree, terms } => {
                let c: Vec<String> = terms
                    .iter()
                    .map(|t| format!("{}x{}y{}z{}", self.field.lift(t.coeff), t.exps[0], t.exps[1], t.exps[2]))
                    .collect();
                format!("plane(D={},p={},F={})", degree, self.field.modulus(), c.join("+"))
            }
        }
    }

    /// Defining polynomial in the affine chart where coordinate `chart` is 1;
    /// the remaining coordinates, in order, become `(a, b)`.
    pub fn chart_equation(&self, chart: usize) -> Bivariate {
        let f = self.field;
        match &self.equation {
            Equation::Hyperelliptic { f: poly } => {
                let mut terms = vec![(0, 2, Fp::ONE)];
                for (i, &c) in poly.coeffs().iter().enumerate() {
                    terms.push((i as u32, 0, f.neg(c)));
                }
                Bivariate::new(terms)
            }
            Equation::Plane { terms, .. } => {
                let (ia, ib) = other_coords(chart);
                Bivariate::new(terms.iter().map(|t| (t.exps[ia], t.exps[ib], t.coeff)).collect())
            }
        }
    }

    /// Value of the defining polynomial at projective coordinates
    /// (for hyperelliptic models the affine equation `y^2 - f(x)`).
    pub fn eval_equation(&self, c: [Fp; 3]) -> Fp {
        let f = self.field;
        match &self.equation {
            Equation::Hyperelliptic { f: poly } => f.sub(f.mul(c[1], c[1]), poly.eval(f, c[0])),
            Equation::Plane { terms, .. } => terms.iter().fold(Fp::ZERO, |acc, t| {
                let m = (0..3).fold(t.coeff, |m, i| f.mul(m, f.pow(c[i], t.exps[i] as u64)));
                f.add(acc, m)
            }),
        }
    }

    pub fn contains(&self, p: &PointOnCurve) -> bool {
        self.eval_equation(p.coords).is_zero()
    }

    /// Gradient of the homogeneous plane equation, or of `y^2 - f(x)`.
    pub fn gradient(&self, c: [Fp; 3]) -> [Fp; 3] {
        let f = self.field;
        match &self.equation {
            Equation::Hyperelliptic { f: poly } => {
                [f.neg(poly.derivative(f).eval(f, c[0])), f.mul(f.elem(2), c[1]), Fp::ZERO]
            }
            Equation::Plane { terms, .. } => {
                let mut g = [Fp::ZERO; 3];
                for t in terms {
                    for (v, gv) in g.iter_mut().enumerate() {
                        if t.exps[v] == 0 {
                            continue;
                        }
                        let mut m = f.mul(t.coeff, f.from_u64(t.exps[v] as u64));
                        for i in 0..3 {
                            let e = if i == v { t.exps[i] - 1 } else { t.exps[i] };
                            m = f.mul(m, f.pow(c[i], e as u64));
                        }
                        *gv = f.add(*gv, m);
                    }
                }
                g
            }
        }
    }

    fn make_point(&self, coords: [Fp; 3]) -> PointOnCurve {
        let chart = PointOnCurve { coords, ramified: false }.chart();
        let g = self.chart_equation(chart);
        let (ia, ib) = other_coords(chart);
        let gb = g.partial_b(self.field).eval(self.field, coords[ia], coords[ib]);
        PointOnCurve { coords, ramified: gb.is_zero() }
    }

    /// Affine points with the given first coordinate, ascending in `y`.
    fn points_over(&self, x: Fp) -> Result<Vec<PointOnCurve>> {
        let f = self.field;
        let mut out = Vec::new();
        match &self.equation {
            Equation::Hyperelliptic { f: poly } => {
                let v = poly.eval(f, x);
                if let Some(r) = f.sqrt(v) {
                    out.push(self.make_point([x, r, Fp::ONE]));
                    if !r.is_zero() {
                        out.push(self.make_point([x, f.neg(r), Fp::ONE]));
                    }
                }
            }
            Equation::Plane { .. } => {
                let g = self.chart_equation(2);
                let h = g.at_a(f, x);
                if h.is_zero() {
                    // the line x = x0 is a component
                    return Err(self.component_witness([x, Fp::ZERO, Fp::ONE]));
                }
                for y in h.roots(f) {
                    out.push(self.make_point([x, y, Fp::ONE]));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    fn component_witness(&self, c: [Fp; 3]) -> Error {
        Error::SingularPoint { point: [c[0].value(), c[1].value(), c[2].value()] }
    }

    fn points_at_infinity(&self) -> Result<Vec<PointOnCurve>> {
        let f = self.field;
        let mut out = Vec::new();
        if let Equation::Plane { .. } = &self.equation {
            // (x : 1 : 0)
            let g = self.chart_equation(1);
            let h = g.at_a(f, Fp::ZERO);
            // g(a, b) with (a, b) = (x, z); restrict to z = 0
            let mut coeffs = Vec::new();
            for &(i, j, c) in &g.terms {
                if j == 0 {
                    if coeffs.len() <= i as usize {
                        coeffs.resize(i as usize + 1, Fp::ZERO);
                    }
                    coeffs[i as usize] = f.add(coeffs[i as usize], c);
                }
            }
            let _ = h;
            let at_z0 = Poly::new(coeffs);
            if at_z0.is_zero() {
                return Err(self.component_witness([Fp::ZERO, Fp::ONE, Fp::ZERO]));
            }
            for x in at_z0.roots(f) {
                out.push(self.make_point([x, Fp::ONE, Fp::ZERO]));
            }
            if self.eval_equation([Fp::ONE, Fp::ZERO, Fp::ZERO]).is_zero() {
                out.push(self.make_point([Fp::ONE, Fp::ZERO, Fp::ZERO]));
            }
        }
        Ok(out)
    }

    /// Rational points in lexicographic `(x, y)` order, affine points first.
    /// The hyperelliptic point at infinity is the base of every divisor and is
    /// never listed.
    pub fn enumerate_points(&self, max_count: usize) -> PointEnumeration {
        self.try_enumerate(max_count).unwrap_or(PointEnumeration { points: Vec::new(), shortfall: true })
    }

    fn try_enumerate(&self, max_count: usize) -> Result<PointEnumeration> {
        let mut points = Vec::new();
        if max_count == 0 {
            return Ok(PointEnumeration { points, shortfall: false });
        }
        for x in self.field.elements() {
            for pt in self.points_over(x)? {
                points.push(pt);
                if points.len() == max_count {
                    return Ok(PointEnumeration { points, shortfall: false });
                }
            }
        }
        for pt in self.points_at_infinity()? {
            points.push(pt);
            if points.len() == max_count {
                return Ok(PointEnumeration { points, shortfall: false });
            }
        }
        Ok(PointEnumeration { points, shortfall: true })
    }

    /// Affine points only, in enumeration order.
    pub fn affine_points(&self, max_count: usize) -> Vec<PointOnCurve> {
        let mut out = Vec::new();
        for x in self.field.elements() {
            let Ok(pts) = self.points_over(x) else { break };
            for pt in pts {
                if out.len() == max_count {
                    return out;
                }
                out.push(pt);
            }
        }
        out
    }

    fn smoothness_audit(&self) -> Result<SmoothnessAudit> {
        let mut checked = 0;
        for x in self.field.elements() {
            let pts = self.points_over(x)?;
            for pt in pts {
                self.check_smooth(&pt)?;
                checked += 1;
            }
        }
        for pt in self.points_at_infinity()? {
            self.check_smooth(&pt)?;
            checked += 1;
        }
        Ok(SmoothnessAudit { points_checked: checked, exhaustive_over_rational_points: true })
    }

    fn check_smooth(&self, pt: &PointOnCurve) -> Result<()> {
        if self.gradient(pt.coords).iter().all(|g| g.is_zero()) {
            return Err(self.component_witness(pt.coords));
        }
        Ok(())
    }

    /// Power-series expansion of the coordinates at a smooth point, correct
    /// modulo `t^(order + 1)`.
    ///
    /// The parameter is `t = a - a0` for the first affine chart coordinate when
    /// the equation's `b`-partial is nonzero, otherwise `t = b - b0`. The other
    /// coordinate is solved by Newton iteration on the chart equation.
    pub fn local_expansion(&self, pt: &PointOnCurve, order: usize) -> Result<LocalExpansion> {
        self.local_expansion_with_max(pt, order, DEFAULT_MAX_ORDER)
    }

    pub fn local_expansion_with_max(&self, pt: &PointOnCurve, order: usize, max_order: usize) -> Result<LocalExpansion> {
        check_order(order, max_order)?;
        if !self.contains(pt) {
            return Err(Error::NotOnCurve { point: pt.raw() });
        }
        let f = self.field;
        let chart = pt.chart();
        let (ia, ib) = other_coords(chart);
        let (a0, b0) = (pt.coords[ia], pt.coords[ib]);
        let g = self.chart_equation(chart);
        let ga = g.partial_a(f);
        let gb = g.partial_b(f);
        let (parameter, a, b) = if !gb.eval(f, a0, b0).is_zero() {
            let a = Series::shifted_variable(a0, order);
            let b = newton(f, order, b0, |b| (g.eval_series(f, &a, b), gb.eval_series(f, &a, b)))?;
            (LocalParameter::First, a, b)
        } else if !ga.eval(f, a0, b0).is_zero() {
            let b = Series::shifted_variable(b0, order);
            let a = newton(f, order, a0, |a| (g.eval_series(f, a, &b), ga.eval_series(f, a, &b)))?;
            (LocalParameter::Second, a, b)
        } else {
            return Err(Error::SingularPoint { point: pt.raw() });
        };
        let mut coords = [Series::zero(order), Series::zero(order), Series::zero(order)];
        coords[chart] = Series::constant(Fp::ONE, order);
        coords[ia] = a;
        coords[ib] = b;
        Ok(LocalExpansion { point: *pt, parameter, order, coords })
    }

    /// Certificate for the gonality upper bound: the x-map on hyperelliptic
    /// models, projection from a rational point on plane models. Fiber degrees
    /// are checked on at least [`CERTIFIED_FIBERS`] fibers that split over `F_p`.
    pub fn pencil_certificate(&self) -> Result<GonalityCertificate> {
        match &self.equation {
            Equation::Hyperelliptic { .. } => self.hyperelliptic_certificate(),
            Equation::Plane { degree, .. } => self.projection_certificate(*degree as usize),
        }
    }

    fn hyperelliptic_certificate(&self) -> Result<GonalityCertificate> {
        let f = self.field;
        let mut fibers = Vec::new();
        // prefer including ramified fibers first so they are always audited
        let Equation::Hyperelliptic { f: poly } = &self.equation else { unreachable!() };
        let mut xs: Vec<Fp> = poly.roots(f);
        for x in f.elements() {
            if fibers.len() + xs.len() >= 4 * CERTIFIED_FIBERS {
                break;
            }
            if !xs.contains(&x) && f.is_square(poly.eval(f, x)) {
                xs.push(x);
            }
        }
        for x in xs {
            let pts = self.points_over(x)?;
            if pts.is_empty() {
                continue;
            }
            let mut fiber = Fiber { points: Vec::new(), degree: 0 };
            for pt in pts {
                let exp = self.local_expansion(&pt, 3)?;
                let shifted = exp.x().sub(f, &Series::constant(x, 3));
                let m = shifted.valuation().unwrap_or(4);
                fiber.degree += m;
                fiber.points.push((pt, m));
            }
            if fiber.degree != 2 {
                return Err(Error::FiberDegreeMismatch { expected: 2, found: fiber.degree });
            }
            fibers.push(fiber);
            if fibers.len() >= CERTIFIED_FIBERS && fibers.iter().any(|fb| fb.points.len() == 1) {
                break;
            }
            if fibers.len() >= 2 * CERTIFIED_FIBERS {
                break;
            }
        }
        if fibers.len() < CERTIFIED_FIBERS {
            return Err(Error::PointShortfall { required: CERTIFIED_FIBERS, available: fibers.len() });
        }
        Ok(GonalityCertificate { claimed: 2, pencil: Pencil::XMap, fiber_degree: 2, fibers })
    }

    fn projection_certificate(&self, d: usize) -> Result<GonalityCertificate> {
        let f = self.field;
        let pts = self.affine_points(40 * CERTIFIED_FIBERS);
        let Some(&center) = pts.first() else {
            return Err(Error::PointShortfall { required: 1, available: 0 });
        };
        let o = center.coords;
        let mut fibers: Vec<Fiber> = Vec::new();
        let mut seen_dirs: Vec<[Fp; 3]> = Vec::new();
        for q in pts.iter().skip(1) {
            // direction normalized so lines are not revisited
            let dir = normalize(f, [f.sub(q.coords[0], o[0]), f.sub(q.coords[1], o[1]), Fp::ZERO]);
            if seen_dirs.contains(&dir) {
                continue;
            }
            seen_dirs.push(dir);
            // h(s) = F(O + s * dir) in homogeneous coordinates, dir at infinity
            let mut h = vec![Fp::ZERO; d + 1];
            let lines: Vec<Poly> = (0..3)
                .map(|i| Poly::new(vec![o[i], dir[i]]))
                .collect();
            if let Equation::Plane { terms, .. } = &self.equation {
                let mut acc = Poly::zero();
                for t in terms {
                    let mut m = Poly::new(vec![t.coeff]);
                    for (i, line) in lines.iter().enumerate() {
                        for _ in 0..t.exps[i] {
                            m = m.mul(f, line);
                        }
                    }
                    acc = acc.add(f, &m);
                }
                for (i, c) in acc.coeffs().iter().enumerate() {
                    h[i] = *c;
                }
                if acc.is_zero() {
                    return Err(Error::FiberDegreeMismatch { expected: d - 1, found: 0 });
                }
                let hp = acc;
                let deg_h = hp.degree().unwrap_or(0);
                let roots = hp.roots(f);
                let total: usize = roots.iter().map(|&r| hp.root_multiplicity(f, r)).sum();
                if total != deg_h {
                    continue; // not split over F_p
                }
                let mut fiber = Fiber { points: Vec::new(), degree: 0 };
                for r in roots {
                    let m = hp.root_multiplicity(f, r) - usize::from(r.is_zero());
                    if m == 0 {
                        continue;
                    }
                    let c = [f.add(o[0], f.mul(r, dir[0])), f.add(o[1], f.mul(r, dir[1])), Fp::ONE];
                    fiber.points.push((self.make_point(c), m));
                    fiber.degree += m;
                }
                if deg_h < d {
                    fiber.points.push((self.make_point(normalize(f, dir)), d - deg_h));
                    fiber.degree += d - deg_h;
                }
                if fiber.degree != d - 1 {
                    return Err(Error::FiberDegreeMismatch { expected: d - 1, found: fiber.degree });
                }
                fibers.push(fiber);
                if fibers.len() >= CERTIFIED_FIBERS {
                    break;
                }
            }
            let _ = &h;
        }
        if fibers.len() < CERTIFIED_FIBERS {
            return Err(Error::PointShortfall { required: CERTIFIED_FIBERS, available: fibers.len() });
        }
        Ok(GonalityCertificate { claimed: d - 1, pencil: Pencil::Projection { center }, fiber_degree: d - 1, fibers })
    }
}

fn other_coords(chart: usize) -> (usize, usize) {
    match chart {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn normalize(f: PrimeField, c: [Fp; 3]) -> [Fp; 3] {
    let idx = (0..3).rev().find(|&i| !c[i].is_zero()).unwrap_or(2);
    let inv = f.inv(c[idx]).unwrap_or(Fp::ONE);
    [f.mul(c[0], inv), f.mul(c[1], inv), f.mul(c[2], inv)]
}

/// Newton iteration `u <- u - G(u) / G'(u)` on truncated series, starting at
/// the constant `u0`, doubling the precision each round.
fn newton(
    f: PrimeField,
    order: usize,
    u0: Fp,
    eval: impl Fn(&Series) -> (Series, Series),
) -> Result<Series> {
    let mut u = Series::constant(u0, order);
    let mut prec = 1usize;
    while prec <= order {
        let (g, dg) = eval(&u);
        let step = g.mul(f, &dg.inverse(f)?);
        u = u.sub(f, &step);
        prec *= 2;
    }
    // one more round settles the last doubled block
    let (g, dg) = eval(&u);
    u = u.sub(f, &g.mul(f, &dg.inverse(f)?));
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn hyperelliptic_construction() {
        let c = CurveModel::hyperelliptic(f(10007), &[1, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(c.genus(), 2);
        assert_eq!(c.gonality(), Some(2));
        let err = CurveModel::hyperelliptic(f(10007), &[0, 0, 0, 0, 1, 1]).unwrap_err();
        // gcd(x^5 + x^4, 5x^4 + 4x^3) = x^3
        assert_eq!(err, Error::NotSquarefree { gcd: vec![0, 0, 0, 1] });
    }

    #[test]
    fn seeded_hyperelliptic_is_squarefree() {
        let field = f(10007);
        let c = CurveModel::hyperelliptic_seeded(field, 4, 1).unwrap();
        let Equation::Hyperelliptic { f: poly } = c.equation() else { panic!() };
        assert_eq!(poly.degree(), Some(9));
        assert_eq!(poly.gcd(field, &poly.derivative(field)).degree(), Some(0));
        assert_eq!(c.spec().seed, Some(1));
        let again = CurveModel::hyperelliptic_seeded(field, 4, 1).unwrap();
        assert_eq!(again.equation(), c.equation());
    }

    #[test]
    fn fermat_quartic_and_singular_rejection() {
        let q = CurveModel::plane(f(10007), &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]]).unwrap();
        assert_eq!(q.genus(), 3);
        assert_eq!(q.gonality(), Some(3));
        assert!(q.smoothness().unwrap().points_checked > 0);
        assert!(matches!(CurveModel::plane(f(10007), &[[4, 0, 0, 1]]), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn enumeration_mod_7() {
        let c = CurveModel::hyperelliptic(f(7), &[1, 0, 0, 0, 0, 1]).unwrap();
        let all = c.enumerate_points(1000);
        assert!(all.shortfall);
        let raw: Vec<(u32, u32)> = all.points.iter().map(|p| (p.x().value(), p.y().value())).collect();
        assert!(raw.starts_with(&[(0, 1), (0, 6), (1, 3), (1, 4)]));
        for p in &all.points {
            assert!(c.contains(p));
        }
        assert!(c.enumerate_points(0).points.is_empty());

        let q = CurveModel::plane(f(7), &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]]).unwrap();
        let pts = q.enumerate_points(1000).points;
        assert!(pts.iter().all(|p| !(p.x().is_zero() && p.is_affine())));
    }

    #[test]
    fn expansion_examples() {
        let field = f(10007);
        let c = CurveModel::hyperelliptic(field, &[1, 0, 0, 0, 0, 1]).unwrap();
        let p = PointOnCurve { coords: [Fp::ZERO, Fp::ONE, Fp::ONE], ramified: false };
        let e = c.local_expansion(&p, 3).unwrap();
        assert_eq!(e.parameter, LocalParameter::First);
        assert_eq!(e.y(), &Series::constant(Fp::ONE, 3));

        let w = PointOnCurve { coords: [field.elem(-1), Fp::ZERO, Fp::ONE], ramified: true };
        let e = c.local_expansion(&w, 3).unwrap();
        assert_eq!(e.parameter, LocalParameter::Second);
        // x(t) = -1 + t^2 / f'(-1) + O(t^4), f'(-1) = 5
        assert_eq!(e.x().coeff(0), field.elem(-1));
        assert_eq!(e.x().coeff(1), Fp::ZERO);
        assert_eq!(e.x().coeff(2), field.inv(field.elem(5)).unwrap());
        assert_eq!(e.x().coeff(3), Fp::ZERO);

        let e0 = c.local_expansion(&p, 0).unwrap();
        assert_eq!(e0.x(), &Series::constant(Fp::ZERO, 0));
        assert_eq!(e0.y(), &Series::constant(Fp::ONE, 0));
        assert!(matches!(c.local_expansion(&p, 9), Err(Error::TruncationTooLarge { .. })));
    }

    #[test]
    fn certificates() {
        let c = CurveModel::hyperelliptic(f(10007), &[1, 0, 0, 0, 0, 1]).unwrap();
        let cert = c.pencil_certificate().unwrap();
        assert_eq!(cert.claimed, 2);
        assert!(cert.fibers.len() >= CERTIFIED_FIBERS);
        assert!(cert.fibers.iter().any(|fb| fb.points.len() == 1 && fb.points[0].1 == 2));

        let q = CurveModel::plane(f(10007), &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]]).unwrap();
        let cert = q.pencil_certificate().unwrap();
        assert_eq!(cert.claimed, 3);
        assert!(cert.fibers.iter().all(|fb| fb.degree == 3));
    }
}
