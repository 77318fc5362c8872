//! Flat vector bundles over catalog bases built from line representations.
//!
//! A line representation is a character `H_1(X) → Q/Z` given by its values on
//! the coordinates of the abelianization. Real lines take values in `{0, 1/2}`
//! (the signs `±1`); complex lines are arbitrary rational rotations.
//!
//! Mod-2 cohomology classes are stored by their values on a fixed set of
//! generators of `π_1(X)` whose images form a basis of `H_1(X; Z/2)`, so the
//! stored vector is a coordinate vector in the dual basis.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bieberbach::{
    abelianization, catalog, holonomy_group, AbelianizationData, BieberbachGroupSpec,
};
use crate::error::{Error, Result};
use crate::rational::{format_rational, half, mod_one, parse_rational};
use crate::zlinalg::{inverse_mod2, rank_mod_dense, IntMatrix};

/// Bound on the closure of the total holonomy of a bundle.
pub const TOTAL_HOLONOMY_BOUND: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Real,
    Complex,
}

/// Character of `H_1(X)` with values in `Q/Z`, normalized to `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineRep {
    pub kind: LineKind,
    pub free: Vec<BigRational>,
    pub torsion: Vec<BigRational>,
}

impl LineRep {
    pub fn new(kind: LineKind, free: Vec<BigRational>, torsion: Vec<BigRational>) -> Self {
        LineRep {
            kind,
            free: free.iter().map(mod_one).collect(),
            torsion: torsion.iter().map(mod_one).collect(),
        }
    }

    pub fn trivial(kind: LineKind, base: &FlatBase) -> Self {
        let (f, t) = base.value_shape();
        LineRep {
            kind,
            free: vec![BigRational::zero(); f],
            torsion: vec![BigRational::zero(); t],
        }
    }

    pub fn values(&self) -> Vec<BigRational> {
        self.free.iter().chain(&self.torsion).cloned().collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.free.iter().chain(&self.torsion).all(Zero::is_zero)
    }

    /// Pointwise product of the representations.
    pub fn tensor(&self, other: &LineRep) -> Result<LineRep> {
        if self.kind != other.kind
            || self.free.len() != other.free.len()
            || self.torsion.len() != other.torsion.len()
        {
            return Err(Error::InvalidLineRep(
                "tensor of incompatible line representations".into(),
            ));
        }
        let add =
            |a: &[BigRational], b: &[BigRational]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(LineRep::new(
            self.kind,
            add(&self.free, &other.free),
            add(&self.torsion, &other.torsion),
        ))
    }

    pub fn conjugate(&self) -> LineRep {
        let neg = |a: &[BigRational]| a.iter().map(|x| -x).collect();
        LineRep::new(self.kind, neg(&self.free), neg(&self.torsion))
    }
}

#[derive(Serialize, Deserialize)]
struct LineRepWire {
    kind: LineKind,
    free: Vec<String>,
    torsion: Vec<String>,
}

impl From<&LineRep> for LineRepWire {
    fn from(l: &LineRep) -> Self {
        LineRepWire {
            kind: l.kind,
            free: l.free.iter().map(format_rational).collect(),
            torsion: l.torsion.iter().map(format_rational).collect(),
        }
    }
}

impl TryFrom<LineRepWire> for LineRep {
    type Error = Error;
    fn try_from(w: LineRepWire) -> Result<Self> {
        let parse = |v: &[String]| {
            v.iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()
        };
        Ok(LineRep::new(w.kind, parse(&w.free)?, parse(&w.torsion)?))
    }
}

impl Serialize for LineRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LineRepWire::from(self).serialize(s)
    }
}

/// Element of `H^1(X; Z/2)` as values on the chosen generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Z2Class(pub Vec<u8>);

impl Z2Class {
    pub fn zero(dim: usize) -> Self {
        Z2Class(vec![0; dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        Z2Class(v)
    }

    /// Class whose bit `i` is bit `i` of `code`.
    pub fn from_index(dim: usize, code: usize) -> Self {
        Z2Class((0..dim).map(|i| ((code >> i) & 1) as u8).collect())
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &b)| usize::from(b) << i)
            .sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn add(&self, other: &Z2Class) -> Z2Class {
        Z2Class(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }
}

/// Catalog base with its abelianization and a mod-2 basis.
#[derive(Debug)]
pub struct FlatBase {
    spec: BieberbachGroupSpec,
    ab: AbelianizationData,
    holonomy: Vec<IntMatrix>,
    chosen: Vec<usize>,
    labels: Vec<String>,
    /// Coordinates of `H_1` that survive reduction mod 2.
    mod2_coords: Vec<usize>,
    /// Inverse of the chosen generators' mod-2 coordinate matrix.
    coord_hom: Vec<Vec<u8>>,
    orientation: Z2Class,
}

impl PartialEq for FlatBase {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for FlatBase {}

fn class_labels(name: &str, dim: usize) -> Vec<String> {
    match (name, dim) {
        ("S1", 1) => vec!["u".into()],
        ("T2", 2) => vec!["x".into(), "y".into()],
        ("K", 2) => vec!["alpha".into(), "beta".into()],
        _ => (1..=dim).map(|i| format!("x{i}")).collect(),
    }
}

impl FlatBase {
    pub fn from_catalog(name: &str) -> Result<Arc<FlatBase>> {
        FlatBase::new(catalog(name)?)
    }

    pub fn new(spec: BieberbachGroupSpec) -> Result<Arc<FlatBase>> {
        let ab = abelianization(&spec)?;
        let (holonomy, _) = holonomy_group(&spec)?;
        let mod2_coords: Vec<usize> = ab
            .moduli
            .iter()
            .enumerate()
            .filter(|(_, d)| d.as_ref().is_none_or(|d| d.is_even()))
            .map(|(i, _)| i)
            .collect();
        let two = BigInt::from(2);
        let gen_mod2 = |j: usize| -> Vec<u8> {
            mod2_coords
                .iter()
                .map(|&i| u8::from(!ab.projection[(i, j)].mod_floor(&two).is_zero()))
                .collect()
        };
        let dim = mod2_coords.len();
        let mut chosen = Vec::new();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for j in 0..spec.gens.len() {
            if chosen.len() == dim {
                break;
            }
            let mut candidate = rows.clone();
            candidate.push(gen_mod2(j).into_iter().map(u64::from).collect());
            if rank_mod_dense(candidate.clone(), 2) > rows.len() {
                rows = candidate;
                chosen.push(j);
            }
        }
        if chosen.len() != dim {
            return Err(Error::Internal(format!(
                "generators of '{}' do not span H_1 mod 2",
                spec.name
            )));
        }
        let matrix: Vec<Vec<u8>> = chosen.iter().map(|&j| gen_mod2(j)).collect();
        let coord_hom = if dim == 0 {
            Vec::new()
        } else {
            inverse_mod2(&matrix)
                .ok_or_else(|| Error::Internal("chosen mod-2 basis is singular".into()))?
        };
        let orientation = Z2Class(
            chosen
                .iter()
                .map(|&j| Ok(u8::from(spec.gens[j].linear.determinant()?.is_negative())))
                .collect::<Result<Vec<_>>>()?,
        );
        let labels = class_labels(&spec.name, dim);
        Ok(Arc::new(FlatBase {
            spec,
            ab,
            holonomy,
            chosen,
            labels,
            mod2_coords,
            coord_hom,
            orientation,
        }))
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn spec(&self) -> &BieberbachGroupSpec {
        &self.spec
    }

    pub fn abelianization(&self) -> &AbelianizationData {
        &self.ab
    }

    pub fn holonomy(&self) -> &[IntMatrix] {
        &self.holonomy
    }

    pub fn holonomy_order(&self) -> usize {
        self.holonomy.len()
    }

    /// `dim H^1(X; Z/2)`.
    pub fn h1_dim_mod2(&self) -> usize {
        self.chosen.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn chosen_generators(&self) -> &[usize] {
        &self.chosen
    }

    /// `w_1(TX)`, the orientation character of the base.
    pub fn orientation_class(&self) -> &Z2Class {
        &self.orientation
    }

    /// `(free, torsion)` lengths of a line representation over this base.
    pub fn value_shape(&self) -> (usize, usize) {
        let f = self.ab.free_rank();
        (f, self.ab.coord_count() - f)
    }

    /// All classes, ordered by the binary code of their coordinates.
    pub fn all_classes(&self) -> Vec<Z2Class> {
        let d = self.h1_dim_mod2();
        (0..1usize << d)
            .map(|c| Z2Class::from_index(d, c))
            .collect()
    }

    pub fn format_class(&self, u: &Z2Class) -> String {
        let terms: Vec<&str> =
            u.0.iter()
                .zip(&self.labels)
                .filter(|(b, _)| **b == 1)
                .map(|(_, l)| l.as_str())
                .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    fn mod2_reduce(&self, x: &[BigInt]) -> Vec<u8> {
        let two = BigInt::from(2);
        self.mod2_coords
            .iter()
            .map(|&i| u8::from(!x[i].mod_floor(&two).is_zero()))
            .collect()
    }

    /// Value of a class on an element of `H_1` given in coordinates.
    pub fn evaluate_class(&self, u: &Z2Class, x: &[BigInt]) -> u8 {
        let reduced = self.mod2_reduce(x);
        let mut total = 0u8;
        for (k, r) in reduced.iter().enumerate() {
            let h = self.coord_hom[k]
                .iter()
                .zip(&u.0)
                .fold(0u8, |acc, (m, b)| acc ^ (m & b));
            total ^= h & r;
        }
        total
    }

    /// Class of a homomorphism `H_1 → Z/2` given by its values on generators.
    pub fn class_from_generator_values(&self, values: impl Fn(usize) -> u8) -> Z2Class {
        Z2Class(self.chosen.iter().map(|&j| values(j) & 1).collect())
    }

    /// `x ↦ Σ x_i v_i mod 1`.
    pub fn character_on_coords(&self, values: &[BigRational], x: &[BigInt]) -> BigRational {
        let total = values
            .iter()
            .zip(x)
            .fold(BigRational::zero(), |acc, (v, c)| {
                acc + v * BigRational::from_integer(c.clone())
            });
        mod_one(&total)
    }

    pub fn character_on_generator(&self, line: &LineRep, j: usize) -> BigRational {
        self.character_on_coords(&line.values(), &self.ab.generator_coords(j))
    }

    /// The real line representation whose first Stiefel-Whitney class is `u`.
    pub fn real_line_from_class(&self, u: &Z2Class) -> LineRep {
        let (f, t) = self.value_shape();
        let mut values = vec![BigRational::zero(); f + t];
        for (k, &i) in self.mod2_coords.iter().enumerate() {
            let bit = self.coord_hom[k]
                .iter()
                .zip(&u.0)
                .fold(0u8, |acc, (m, b)| acc ^ (m & b));
            if bit == 1 {
                values[i] = half();
            }
        }
        let torsion = values.split_off(f);
        LineRep::new(LineKind::Real, values, torsion)
    }

    /// Checks shape, torsion orders and, for real lines, the sign condition.
    pub fn validate_line(&self, line: &LineRep) -> Result<()> {
        let (f, t) = self.value_shape();
        if line.free.len() != f || line.torsion.len() != t {
            return Err(Error::InvalidLineRep(format!(
                "base '{}' needs {f} free and {t} torsion values, got {} and {}",
                self.name(),
                line.free.len(),
                line.torsion.len()
            )));
        }
        for (v, d) in line.torsion.iter().zip(self.ab.torsion_orders()) {
            if !(v * BigRational::from_integer(d.clone())).is_integer() {
                return Err(Error::InvalidLineRep(format!(
                    "value {} on a torsion generator of order {d}",
                    format_rational(v)
                )));
            }
        }
        if line.kind == LineKind::Real {
            if let Some(v) = line
                .free
                .iter()
                .chain(&line.torsion)
                .find(|v| !v.is_zero() && **v != half())
            {
                return Err(Error::InvalidLineRep(format!(
                    "real line takes value {} outside {{0, 1/2}}",
                    format_rational(v)
                )));
            }
        }
        Ok(())
    }

    /// Is `line` the real line carried by a character of order at most two?
    fn is_two_torsion(line: &LineRep) -> bool {
        line.free
            .iter()
            .chain(&line.torsion)
            .all(|v| v.is_zero() || *v == half())
    }
}

/// Flat bundle `⊕ summands` over a catalog base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatBundleSpec {
    pub base: Arc<FlatBase>,
    pub summands: Vec<LineRep>,
}

impl FlatBundleSpec {
    pub fn new(base: Arc<FlatBase>, summands: Vec<LineRep>) -> Result<Self> {
        for line in &summands {
            base.validate_line(line)?;
        }
        Ok(FlatBundleSpec { base, summands })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: BundleWire =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        wire.try_into()
    }

    pub fn fiber_dim(&self) -> usize {
        self.summands
            .iter()
            .map(|l| match l.kind {
                LineKind::Real => 1,
                LineKind::Complex => 2,
            })
            .sum()
    }

    pub fn total_dim(&self) -> usize {
        self.base.dim() + self.fiber_dim()
    }
}

#[derive(Serialize, Deserialize)]
struct BundleWire {
    base: String,
    summands: Vec<LineRepWire>,
}

impl TryFrom<BundleWire> for FlatBundleSpec {
    type Error = Error;
    fn try_from(w: BundleWire) -> Result<Self> {
        let base = FlatBase::from_catalog(&w.base)?;
        let summands = w
            .summands
            .into_iter()
            .map(LineRep::try_from)
            .collect::<Result<Vec<_>>>()?;
        FlatBundleSpec::new(base, summands)
    }
}

impl Serialize for FlatBundleSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BundleWire {
            base: self.base.name().to_string(),
            summands: self.summands.iter().map(LineRepWire::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FlatBundleSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        BundleWire::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// `w_1` of a real line: the sign character read on the chosen generators.
pub fn w1_of_line(base: &FlatBase, line: &LineRep) -> Result<Z2Class> {
    if line.kind != LineKind::Real {
        return Err(Error::InvalidLineRep(
            "w1_of_line expects a real line".into(),
        ));
    }
    base.validate_line(line)?;
    Ok(base
        .class_from_generator_values(|j| u8::from(!base.character_on_generator(line, j).is_zero())))
}

/// `c_1` of a complex line as an element of `Hom(Tors H_1, Z/k_X)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct C1Class {
    /// Values on the torsion generators of `H_1`.
    pub values: Vec<u64>,
    pub modulus: usize,
    pub trivial: bool,
}

pub fn c1_of_line(base: &FlatBase, line: &LineRep) -> Result<C1Class> {
    if line.kind != LineKind::Complex {
        return Err(Error::InvalidLineRep(
            "c1_of_line expects a complex line".into(),
        ));
    }
    base.validate_line(line)?;
    let k = base.holonomy_order();
    let kx = BigRational::from_integer(BigInt::from(k));
    let mut values = Vec::with_capacity(line.torsion.len());
    for v in &line.torsion {
        let scaled = v * &kx;
        if !scaled.is_integer() {
            return Err(Error::InvalidLineRep(format!(
                "torsion value {} has order not dividing k_X = {k}",
                format_rational(v)
            )));
        }
        let reduced = scaled.to_integer().mod_floor(&BigInt::from(k));
        values.push(reduced.to_u64().expect("value reduced mod k_X"));
    }
    let trivial = values.iter().all(|&v| v == 0);
    Ok(C1Class {
        values,
        modulus: k,
        trivial,
    })
}

/// `w_1` of the vertical bundle; rotations have determinant one.
pub fn orientation_character(b: &FlatBundleSpec) -> Result<Z2Class> {
    let mut total = Z2Class::zero(b.base.h1_dim_mod2());
    for line in b.summands.iter().filter(|l| l.kind == LineKind::Real) {
        total = total.add(&w1_of_line(&b.base, line)?);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharClassVector {
    pub w1: Z2Class,
    /// Present when the base is a surface.
    pub w2: Option<u8>,
    /// One entry per complex summand.
    pub c1: Vec<C1Class>,
}

/// Mod-2 cup products `H^1 × H^1 → H^2` of a closed surface or circle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CupTable {
    pub base: String,
    pub labels: Vec<String>,
    /// `matrix[i][j] = label_i ∪ label_j` evaluated on the top class.
    pub matrix: Vec<Vec<u8>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CupTableHealth {
    pub symmetric: bool,
    pub nondegenerate: bool,
    /// `u ∪ u = w_1(X) ∪ u` for every `u`.
    pub wu: bool,
    /// `w_1(X) ∪ w_1(X) = 0`.
    pub w1_squared_zero: bool,
}

impl CupTableHealth {
    pub fn ok(&self) -> bool {
        self.symmetric && self.nondegenerate && self.wu && self.w1_squared_zero
    }
}

impl CupTable {
    pub fn cup(&self, u: &Z2Class, v: &Z2Class) -> u8 {
        let mut total = 0;
        for (i, a) in u.0.iter().enumerate() {
            for (j, b) in v.0.iter().enumerate() {
                total ^= a & b & self.matrix[i][j];
            }
        }
        total
    }

    pub fn health(&self, orientation: &Z2Class) -> CupTableHealth {
        let n = self.labels.len();
        let symmetric = (0..n).all(|i| (0..n).all(|j| self.matrix[i][j] == self.matrix[j][i]));
        let nondegenerate = n == 0 || inverse_mod2(&self.matrix).is_some();
        let wu = (0..1usize << n).all(|c| {
            let u = Z2Class::from_index(n, c);
            self.cup(&u, &u) == self.cup(orientation, &u)
        });
        let w1_squared_zero = n == 0 || self.cup(orientation, orientation) == 0;
        CupTableHealth {
            symmetric,
            nondegenerate,
            wu,
            w1_squared_zero,
        }
    }
}

/// Cup table in the basis dual to the chosen generators.
pub fn cup_table(base: &FlatBase) -> Result<CupTable> {
    let matrix: Vec<Vec<u8>> = match base.name() {
        "S1" => Vec::new(),
        "T2" => vec![vec![0, 1], vec![1, 0]],
        "K" => vec![vec![1, 1], vec![1, 0]],
        other => return Err(Error::UnsupportedBase(other.to_string())),
    };
    let labels = if matrix.is_empty() {
        Vec::new()
    } else {
        base.labels().to_vec()
    };
    let table = CupTable {
        base: base.name().to_string(),
        labels,
        matrix,
    };
    let health = table.health(base.orientation_class());
    if !health.ok() {
        return Err(Error::Internal(format!(
            "cup table of '{}' fails {:?}",
            base.name(),
            health
        )));
    }
    Ok(table)
}

/// `(w_1, w_2, c_1)` by the Whitney product formula.
///
/// A complex summand `L` contributes `w_2(L_R) = c_1(L) mod 2 = u ∪ u`, where
/// `u` is its character restricted to the torsion of `H_1` and read mod 2.
pub fn sw_vector(b: &FlatBundleSpec) -> Result<CharClassVector> {
    let base = &b.base;
    if base.dim() > 2 {
        return Err(Error::UnsupportedBase(base.name().to_string()));
    }
    let w1 = orientation_character(b)?;
    let mut c1 = Vec::new();
    for line in b.summands.iter().filter(|l| l.kind == LineKind::Complex) {
        c1.push(c1_of_line(base, line)?);
    }
    if base.dim() < 2 {
        return Ok(CharClassVector { w1, w2: None, c1 });
    }
    let table = cup_table(base)?;
    let reals: Vec<Z2Class> = b
        .summands
        .iter()
        .filter(|l| l.kind == LineKind::Real)
        .map(|l| w1_of_line(base, l))
        .collect::<Result<_>>()?;
    let mut w2 = 0u8;
    for i in 0..reals.len() {
        for j in i + 1..reals.len() {
            w2 ^= table.cup(&reals[i], &reals[j]);
        }
    }
    let (f, _) = base.value_shape();
    for line in b.summands.iter().filter(|l| l.kind == LineKind::Complex) {
        let mut values = line.values();
        for v in values.iter_mut().take(f) {
            *v = BigRational::zero();
        }
        let on_gens: Vec<BigRational> = (0..base.spec().gens.len())
            .map(|j| base.character_on_coords(&values, &base.abelianization().generator_coords(j)))
            .collect();
        if on_gens.iter().any(|x| !x.is_zero() && *x != half()) {
            return Err(Error::InvalidLineRep(
                "torsion character of a complex summand is not of order two".into(),
            ));
        }
        let u = base.class_from_generator_values(|j| u8::from(!on_gens[j].is_zero()));
        w2 ^= table.cup(&u, &u);
    }
    Ok(CharClassVector {
        w1,
        w2: Some(w2),
        c1,
    })
}

/// Finite group generated by the base holonomy together with the angles of
/// every summand.
#[derive(Clone, Debug)]
pub struct TotalHolonomy {
    pub elements: Vec<(IntMatrix, Vec<BigRational>)>,
}

impl TotalHolonomy {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element_order(&self, i: usize) -> usize {
        let (m0, a0) = &self.elements[i];
        let mut m = m0.clone();
        let mut a = a0.clone();
        let mut k = 1;
        while !(m.is_identity() && a.iter().all(Zero::is_zero)) {
            m = &m * m0;
            a = a.iter().zip(a0).map(|(x, y)| mod_one(&(x + y))).collect();
            k += 1;
        }
        k
    }

    pub fn is_cyclic(&self) -> bool {
        let n = self.order();
        (0..n).any(|i| self.element_order(i) == n)
    }
}

pub fn total_holonomy(b: &FlatBundleSpec) -> Result<TotalHolonomy> {
    let base = &b.base;
    let dim = base.dim();
    let gens: Vec<(IntMatrix, Vec<BigRational>)> = base
        .spec()
        .gens
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let angles = b
                .summands
                .iter()
                .map(|l| base.character_on_generator(l, j))
                .collect();
            (g.linear.clone(), angles)
        })
        .collect();
    let identity = (
        IntMatrix::identity(dim),
        vec![BigRational::zero(); b.summands.len()],
    );
    let mut seen: HashMap<(IntMatrix, Vec<BigRational>), ()> = HashMap::new();
    seen.insert(identity.clone(), ());
    let mut elements = vec![identity];
    let mut head = 0;
    while head < elements.len() {
        for (gm, ga) in &gens {
            let (m, a) = &elements[head];
            let next = (
                m * gm,
                a.iter()
                    .zip(ga)
                    .map(|(x, y)| mod_one(&(x + y)))
                    .collect::<Vec<_>>(),
            );
            if seen.contains_key(&next) {
                continue;
            }
            if elements.len() >= TOTAL_HOLONOMY_BOUND {
                return Err(Error::ClosureTooLarge(TOTAL_HOLONOMY_BOUND));
            }
            seen.insert(next.clone(), ());
            elements.push(next);
        }
        head += 1;
    }
    Ok(TotalHolonomy { elements })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CyclicStructure {
    /// `Θ^s`
    Trivial { rank: usize },
    /// `Θ^{s-1} ⊕ ε`
    DetSplit {
        trivial_rank: usize,
        epsilon: Z2Class,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TangentStructure {
    Parallelizable,
    /// `TM ≅ Θ^{m-1} ⊕ λ` with `w_1(λ)` the given class.
    SplitLine {
        w1: Z2Class,
    },
}

fn require_cyclic(b: &FlatBundleSpec) -> Result<()> {
    let hol = total_holonomy(b)?;
    if hol.is_cyclic() {
        Ok(())
    } else {
        Err(Error::NotCyclic(hol.order()))
    }
}

/// Topological type of a flat bundle with cyclic total holonomy.
pub fn cyclic_structure(b: &FlatBundleSpec) -> Result<CyclicStructure> {
    require_cyclic(b)?;
    let s = b.fiber_dim();
    let eps = orientation_character(b)?;
    if eps.is_zero() {
        Ok(CyclicStructure::Trivial { rank: s })
    } else {
        Ok(CyclicStructure::DetSplit {
            trivial_rank: s - 1,
            epsilon: eps,
        })
    }
}

/// Tangent bundle of the total space when its holonomy is cyclic.
pub fn tangent_structure(b: &FlatBundleSpec) -> Result<TangentStructure> {
    require_cyclic(b)?;
    let w1 = b.base.orientation_class().add(&orientation_character(b)?);
    if w1.is_zero() {
        Ok(TangentStructure::Parallelizable)
    } else {
        Ok(TangentStructure::SplitLine { w1 })
    }
}

/// Splits each summand into real irreducibles: a complex line whose character
/// has order at most two is a sum of two equal real lines.
pub fn real_irreducibles(b: &FlatBundleSpec) -> Vec<LineRep> {
    let mut out = Vec::new();
    for line in &b.summands {
        match line.kind {
            LineKind::Real => out.push(line.clone()),
            LineKind::Complex if FlatBase::is_two_torsion(line) => {
                let real = LineRep {
                    kind: LineKind::Real,
                    ..line.clone()
                };
                out.push(real.clone());
                out.push(real);
            }
            LineKind::Complex => out.push(line.clone()),
        }
    }
    out
}

/// Largest denominator among the values of all summands.
pub fn common_value_denominator(b: &FlatBundleSpec) -> BigInt {
    b.summands
        .iter()
        .flat_map(|l| l.free.iter().chain(&l.torsion))
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn line(kind: LineKind, free: &[&str], torsion: &[&str]) -> LineRep {
        LineRep::new(
            kind,
            free.iter().map(|s| r(s)).collect(),
            torsion.iter().map(|s| r(s)).collect(),
        )
    }

    fn bundle(base: &str, summands: Vec<LineRep>) -> FlatBundleSpec {
        FlatBundleSpec::new(FlatBase::from_catalog(base).unwrap(), summands).unwrap()
    }

    #[test]
    fn klein_basis_and_lines() {
        let k = FlatBase::from_catalog("K").unwrap();
        assert_eq!(k.chosen_generators(), &[0, 1]);
        assert_eq!(k.orientation_class(), &Z2Class(vec![0, 1]));
        // values: (on b, on a)
        let lambda2 = line(LineKind::Real, &["1/2"], &["0"]);
        assert_eq!(w1_of_line(&k, &lambda2).unwrap(), Z2Class(vec![0, 1]));
        assert_eq!(k.format_class(&w1_of_line(&k, &lambda2).unwrap()), "beta");
        let lambda1 = line(LineKind::Real, &["0"], &["1/2"]);
        assert_eq!(k.format_class(&w1_of_line(&k, &lambda1).unwrap()), "alpha");
        assert!(w1_of_line(&k, &LineRep::trivial(LineKind::Real, &k))
            .unwrap()
            .is_zero());
        for u in k.all_classes() {
            assert_eq!(w1_of_line(&k, &k.real_line_from_class(&u)).unwrap(), u);
        }
    }

    #[test]
    fn circle_mobius_line() {
        let s1 = FlatBase::from_catalog("S1").unwrap();
        let mu = line(LineKind::Real, &["1/2"], &[]);
        assert_eq!(s1.format_class(&w1_of_line(&s1, &mu).unwrap()), "u");
        assert!(w1_of_line(&s1, &line(LineKind::Complex, &["1/3"], &[])).is_err());
    }

    #[test]
    fn invalid_lines_rejected() {
        let k = FlatBase::from_catalog("K").unwrap();
        assert!(k
            .validate_line(&line(LineKind::Real, &["1/3"], &["0"]))
            .is_err());
        assert!(k
            .validate_line(&line(LineKind::Complex, &["1/3"], &["1/4"]))
            .is_err());
        assert!(k
            .validate_line(&line(LineKind::Complex, &["1/3"], &[]))
            .is_err());
        assert!(k
            .validate_line(&line(LineKind::Complex, &["1/3"], &["1/2"]))
            .is_ok());
    }

    #[test]
    fn w1_additive_under_tensor() {
        let t2 = FlatBase::from_catalog("T2").unwrap();
        let lines: Vec<LineRep> = t2
            .all_classes()
            .iter()
            .map(|u| t2.real_line_from_class(u))
            .collect();
        for a in &lines {
            for b in &lines {
                let ab = a.tensor(b).unwrap();
                let lhs = w1_of_line(&t2, &ab).unwrap();
                let rhs = w1_of_line(&t2, a)
                    .unwrap()
                    .add(&w1_of_line(&t2, b).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn c1_examples() {
        let t3 = FlatBase::from_catalog("T3").unwrap();
        let c = c1_of_line(&t3, &line(LineKind::Complex, &["1/5", "2/3", "0"], &[])).unwrap();
        assert!(c.trivial && c.values.is_empty());

        let g2 = FlatBase::from_catalog("G2").unwrap();
        let c = c1_of_line(&g2, &line(LineKind::Complex, &["1/7"], &["1/2", "0"])).unwrap();
        assert_eq!(c.values, vec![1, 0]);
        assert!(!c.trivial);
        assert!(
            c1_of_line(&g2, &LineRep::trivial(LineKind::Complex, &g2))
                .unwrap()
                .trivial
        );

        let b4 = FlatBase::from_catalog("B4").unwrap();
        let c = c1_of_line(&b4, &line(LineKind::Complex, &["0"], &["1/4"])).unwrap();
        assert_eq!((c.values, c.modulus), (vec![1], 4));
    }

    #[test]
    fn c1_injective_on_torsion_characters() {
        for name in ["G2", "G4"] {
            let base = FlatBase::from_catalog(name).unwrap();
            let orders = base.abelianization().torsion_orders();
            let mut grids: Vec<Vec<BigRational>> = vec![Vec::new()];
            for d in &orders {
                let d = d.to_i64().unwrap();
                grids = grids
                    .into_iter()
                    .flat_map(|g| {
                        (0..d).map(move |j| {
                            let mut g = g.clone();
                            g.push(BigRational::new(BigInt::from(j), BigInt::from(d)));
                            g
                        })
                    })
                    .collect();
            }
            let (f, _) = base.value_shape();
            let mut seen = std::collections::HashSet::new();
            for t in &grids {
                let l = LineRep::new(LineKind::Complex, vec![BigRational::zero(); f], t.clone());
                assert!(seen.insert(c1_of_line(&base, &l).unwrap().values), "{name}");
            }
            assert_eq!(seen.len(), grids.len());
        }
    }

    #[test]
    fn orientation_examples() {
        let t2 = FlatBase::from_catalog("T2").unwrap();
        let mu1 = line(LineKind::Real, &["1/2", "0"], &[]);
        let mu2 = line(LineKind::Real, &["0", "1/2"], &[]);
        let b = bundle("T2", vec![mu1.clone(), mu2.clone()]);
        assert_eq!(t2.format_class(&orientation_character(&b).unwrap()), "x+y");
        let b = bundle("T2", vec![mu1.clone(), mu1.clone()]);
        assert!(orientation_character(&b).unwrap().is_zero());
        let b = bundle("T2", vec![line(LineKind::Complex, &["1/3", "1/2"], &[])]);
        assert!(orientation_character(&b).unwrap().is_zero());
    }

    #[test]
    fn cup_tables_validate() {
        let t2 = FlatBase::from_catalog("T2").unwrap();
        let table = cup_table(&t2).unwrap();
        let (x, y) = (Z2Class(vec![1, 0]), Z2Class(vec![0, 1]));
        assert_eq!(
            (table.cup(&x, &x), table.cup(&y, &y), table.cup(&x, &y)),
            (0, 0, 1)
        );
        let k = FlatBase::from_catalog("K").unwrap();
        let table = cup_table(&k).unwrap();
        let (a, b) = (Z2Class(vec![1, 0]), Z2Class(vec![0, 1]));
        assert_eq!(
            (table.cup(&a, &a), table.cup(&a, &b), table.cup(&b, &b)),
            (1, 1, 0)
        );
        assert!(table.health(k.orientation_class()).ok());
        let s1 = FlatBase::from_catalog("S1").unwrap();
        assert!(cup_table(&s1).unwrap().matrix.is_empty());
        assert!(cup_table(&FlatBase::from_catalog("G2").unwrap()).is_err());
    }

    #[test]
    fn klein_cup_table_matches_inverse_intersection_form() {
        // a·a = 0, a·b = 1, b·b = 1 on H_1(K; Z/2); the cup form is its inverse
        let intersection = vec![vec![0u8, 1], vec![1, 1]];
        let cup = inverse_mod2(&intersection).unwrap();
        let k = FlatBase::from_catalog("K").unwrap();
        assert_eq!(cup_table(&k).unwrap().matrix, cup);
    }

    #[test]
    fn sw_examples() {
        let t2 = FlatBase::from_catalog("T2").unwrap();
        let mu1 = line(LineKind::Real, &["1/2", "0"], &[]);
        let mu2 = line(LineKind::Real, &["0", "1/2"], &[]);
        let mu12 = mu1.tensor(&mu2).unwrap();
        let v = sw_vector(&bundle("T2", vec![mu1.clone(), mu2.clone()])).unwrap();
        assert_eq!((t2.format_class(&v.w1), v.w2), ("x+y".to_string(), Some(1)));
        let v = sw_vector(&bundle("T2", vec![mu1.clone(), mu2.clone(), mu12])).unwrap();
        assert_eq!((v.w1.is_zero(), v.w2), (true, Some(1)));

        let k = FlatBase::from_catalog("K").unwrap();
        let theta = LineRep::trivial(LineKind::Real, &k);
        let v = sw_vector(&bundle("K", vec![theta.clone(), theta.clone(), theta])).unwrap();
        assert_eq!((v.w1.is_zero(), v.w2), (true, Some(0)));

        let s1 = bundle("S1", vec![line(LineKind::Real, &["1/2"], &[])]);
        assert_eq!(sw_vector(&s1).unwrap().w2, None);
        let g2 = FlatBase::from_catalog("G2").unwrap();
        assert!(sw_vector(&FlatBundleSpec::new(g2, vec![]).unwrap()).is_err());
    }

    #[test]
    fn complex_line_w2_over_klein_bottle() {
        // rotation by π along a is λ1 ⊕ λ1, with w2 = α ∪ α
        let rot = bundle("K", vec![line(LineKind::Complex, &["1/3"], &["1/2"])]);
        assert_eq!(sw_vector(&rot).unwrap().w2, Some(1));
        let k = FlatBase::from_catalog("K").unwrap();
        let l1 = k.real_line_from_class(&Z2Class(vec![1, 0]));
        let pair = bundle("K", vec![l1.clone(), l1]);
        assert_eq!(sw_vector(&pair).unwrap().w2, Some(1));
        let free_rot = bundle("K", vec![line(LineKind::Complex, &["1/3"], &["0"])]);
        assert_eq!(sw_vector(&free_rot).unwrap().w2, Some(0));
        let t2 = bundle("T2", vec![line(LineKind::Complex, &["1/2", "1/5"], &[])]);
        assert_eq!(sw_vector(&t2).unwrap().w2, Some(0));
    }

    #[test]
    fn structure_theorems() {
        let k = FlatBase::from_catalog("K").unwrap();
        let theta = LineRep::trivial(LineKind::Real, &k);
        let l2 = line(LineKind::Real, &["1/2"], &["0"]);
        let b = bundle("K", vec![l2.clone(), theta.clone(), theta.clone()]);
        assert_eq!(
            cyclic_structure(&b).unwrap(),
            CyclicStructure::DetSplit {
                trivial_rank: 2,
                epsilon: Z2Class(vec![0, 1])
            }
        );
        assert_eq!(
            tangent_structure(&b).unwrap(),
            TangentStructure::Parallelizable
        );
        let b = bundle("K", vec![l2.clone(), l2.clone(), theta.clone()]);
        assert_eq!(
            cyclic_structure(&b).unwrap(),
            CyclicStructure::Trivial { rank: 3 }
        );
        let b = bundle("K", vec![theta.clone(), theta.clone()]);
        assert_eq!(
            tangent_structure(&b).unwrap(),
            TangentStructure::SplitLine {
                w1: Z2Class(vec![0, 1])
            }
        );
        let l1 = line(LineKind::Real, &["0"], &["1/2"]);
        let b = bundle("K", vec![l1, theta.clone()]);
        assert_eq!(cyclic_structure(&b), Err(Error::NotCyclic(4)));

        let s1 = FlatBase::from_catalog("S1").unwrap();
        let b = bundle("S1", vec![LineRep::trivial(LineKind::Real, &s1)]);
        assert_eq!(
            cyclic_structure(&b).unwrap(),
            CyclicStructure::Trivial { rank: 1 }
        );
        let b = bundle("G3", vec![line(LineKind::Complex, &["1/3"], &["0"])]);
        assert_eq!(
            tangent_structure(&b).unwrap(),
            TangentStructure::Parallelizable
        );
    }

    #[test]
    fn bundle_json_round_trip() {
        let text = r#"{"base":"K","summands":[{"kind":"real","free":["1/2"],"torsion":["0"]},{"kind":"complex","free":["2/6"],"torsion":["1/2"]}]}"#;
        let b = FlatBundleSpec::from_json(text).unwrap();
        assert_eq!((b.fiber_dim(), b.total_dim()), (3, 5));
        let out = serde_json::to_string(&b).unwrap();
        assert_eq!(out, text.replace("2/6", "1/3"));
        assert!(FlatBundleSpec::from_json(
            r#"{"base":"K","summands":[{"kind":"real","free":["1/3"],"torsion":["0"]}]}"#
        )
        .is_err());
        assert!(FlatBundleSpec::from_json(r#"{"base":"Q","summands":[]}"#).is_err());
    }
}
