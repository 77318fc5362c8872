//! Low-dimensional Bieberbach groups.
//!
//! Groups are given by affine generators in lattice coordinates: the linear
//! part is an integer matrix and the pure translations of the group are
//! exactly `Z^n`. From the generators we derive the holonomy group, a finite
//! presentation of the extension `Z^n → Γ → H`, and the abelianization
//! `H_1(Γ)` with an explicit projection of every generator.
//!
//! Holonomy relators come from the Cayley graph of `H` on the images of the
//! generators: every non-tree edge closes a loop whose affine value is a pure
//! translation. Together with the conjugation action of the generators on the
//! lattice these give a complete presentation.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glattice::GLattice;
use crate::rational::{format_rational, parse_rational};
use crate::zlinalg::{
    cokernel_map, hermite_normal_form, reduce_coords, smith_normal_form, solve_integer,
    AbelianGroup, IntMatrix,
};

/// Closures of linear parts are abandoned beyond this many elements.
pub const HOLONOMY_BOUND: usize = 1000;

/// Catalog names in the order used by the dimension-4 table: the orientable
/// closed flat 3-manifolds followed by the nonorientable ones.
pub const THREE_MANIFOLDS: [&str; 10] =
    ["G1", "G2", "G3", "G4", "G5", "G6", "B1", "B2", "B3", "B4"];

pub const CATALOG_NAMES: [&str; 14] = [
    "S1", "T2", "T3", "K", "G1", "G2", "G3", "G4", "G5", "G6", "B1", "B2", "B3", "B4",
];

/// An affine map `x ↦ linear · x + translation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineGen {
    pub linear: IntMatrix,
    pub translation: Vec<BigRational>,
}

impl AffineGen {
    pub fn new(linear: IntMatrix, translation: Vec<BigRational>) -> Result<Self> {
        if !linear.is_square() || linear.rows() != translation.len() {
            return Err(Error::DimensionMismatch(format!(
                "linear part {}x{} with translation of length {}",
                linear.rows(),
                linear.cols(),
                translation.len()
            )));
        }
        Ok(AffineGen {
            linear,
            translation,
        })
    }

    pub fn identity(n: usize) -> Self {
        AffineGen {
            linear: IntMatrix::identity(n),
            translation: vec![BigRational::zero(); n],
        }
    }

    pub fn translation_by(v: &[BigInt]) -> Self {
        AffineGen {
            linear: IntMatrix::identity(v.len()),
            translation: v.iter().cloned().map(BigRational::from_integer).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    fn apply_linear(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.dim())
            .map(|i| {
                self.linear
                    .row(i)
                    .iter()
                    .zip(v)
                    .fold(BigRational::zero(), |acc, (a, x)| {
                        acc + BigRational::from_integer(a.clone()) * x
                    })
            })
            .collect()
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &AffineGen) -> AffineGen {
        let moved = self.apply_linear(&other.translation);
        AffineGen {
            linear: &self.linear * &other.linear,
            translation: moved
                .into_iter()
                .zip(&self.translation)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn inverse(&self) -> Result<AffineGen> {
        let inv = self.linear.inverse_unimodular()?;
        let linv = AffineGen {
            linear: inv,
            translation: vec![BigRational::zero(); self.dim()],
        };
        let back = linv.apply_linear(&self.translation);
        Ok(AffineGen {
            linear: linv.linear,
            translation: back.into_iter().map(|x| -x).collect(),
        })
    }

    pub fn is_translation(&self) -> bool {
        self.linear.is_identity()
    }

    /// Integer translation vector, if the map is a lattice translation.
    pub fn lattice_translation(&self) -> Option<Vec<BigInt>> {
        if !self.is_translation() {
            return None;
        }
        self.translation
            .iter()
            .map(|x| x.is_integer().then(|| x.to_integer()))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct AffineGenWire {
    linear: IntMatrix,
    translation: Vec<String>,
}

impl Serialize for AffineGen {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AffineGenWire {
            linear: self.linear.clone(),
            translation: self.translation.iter().map(format_rational).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineGen {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = AffineGenWire::deserialize(d)?;
        let translation = wire
            .translation
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        AffineGen::new(wire.linear, translation).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BieberbachGroupSpec {
    pub name: String,
    pub dim: usize,
    pub gens: Vec<AffineGen>,
    pub holonomy_order: usize,
}

#[derive(Serialize, Deserialize)]
struct SpecWire {
    name: String,
    dim: usize,
    gens: Vec<AffineGen>,
}

impl Serialize for BieberbachGroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecWire {
            name: self.name.clone(),
            dim: self.dim,
            gens: self.gens.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BieberbachGroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SpecWire::deserialize(d)?;
        BieberbachGroupSpec::new(&wire.name, wire.dim, wire.gens).map_err(serde::de::Error::custom)
    }
}

impl BieberbachGroupSpec {
    pub fn new(name: &str, dim: usize, gens: Vec<AffineGen>) -> Result<Self> {
        if let Some(g) = gens.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "generator of dimension {} in a {dim}-dimensional group",
                g.dim()
            )));
        }
        let mut spec = BieberbachGroupSpec {
            name: name.to_string(),
            dim,
            gens,
            holonomy_order: 0,
        };
        spec.holonomy_order = holonomy_closure(&spec)?.elements.len();
        Ok(spec)
    }

    /// Orientation character on generators: `1` when the linear part reverses
    /// orientation.
    pub fn orientation_bits(&self) -> Result<Vec<u8>> {
        self.gens
            .iter()
            .map(|g| Ok(u8::from(g.linear.determinant()?.is_negative())))
            .collect()
    }
}

/// Holonomy group with a BFS spanning tree of its Cayley graph.
struct HolonomyClosure {
    elements: Vec<IntMatrix>,
    /// Generator word reaching each element from the identity.
    words: Vec<Vec<usize>>,
}

fn holonomy_closure(spec: &BieberbachGroupSpec) -> Result<HolonomyClosure> {
    let identity = IntMatrix::identity(spec.dim);
    let mut index: HashMap<IntMatrix, usize> = HashMap::new();
    index.insert(identity.clone(), 0);
    let mut elements = vec![identity];
    let mut words = vec![Vec::new()];
    let mut head = 0;
    while head < elements.len() {
        for (j, g) in spec.gens.iter().enumerate() {
            let next = &elements[head] * &g.linear;
            if index.contains_key(&next) {
                continue;
            }
            if elements.len() >= HOLONOMY_BOUND {
                return Err(Error::ClosureTooLarge(HOLONOMY_BOUND));
            }
            let mut word = words[head].clone();
            word.push(j);
            index.insert(next.clone(), elements.len());
            elements.push(next);
            words.push(word);
        }
        head += 1;
    }
    Ok(HolonomyClosure { elements, words })
}

/// Elements of the holonomy group (identity first) and its order.
pub fn holonomy_group(spec: &BieberbachGroupSpec) -> Result<(Vec<IntMatrix>, usize)> {
    let closure = holonomy_closure(spec)?;
    let order = closure.elements.len();
    Ok((closure.elements, order))
}

fn evaluate_word(spec: &BieberbachGroupSpec, word: &[usize]) -> AffineGen {
    word.iter().fold(AffineGen::identity(spec.dim), |acc, &j| {
        acc.compose(&spec.gens[j])
    })
}

/// `H_1(Γ)` with coordinates for every generator.
///
/// Free coordinates come first and are in Hermite normal form with respect to
/// the generators; whenever a pivot equals one the corresponding generator is
/// a free basis element with zero torsion part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianizationData {
    pub group: AbelianGroup,
    /// Column `j` holds the coordinates of generator `j`.
    pub projection: IntMatrix,
    /// Column `i` holds the coordinates of the lattice translation `e_i`.
    pub translation_projection: IntMatrix,
    /// `None` for free coordinates, `Some(d)` for a cyclic factor of order `d`.
    pub moduli: Vec<Option<BigInt>>,
    /// Integer combination of generators mapping to each basis element.
    pub basis_lifts: Vec<Vec<BigInt>>,
    /// Relation matrix over the variables `(t_1..t_n, g_1..g_m)`.
    pub relations: IntMatrix,
}

impl AbelianizationData {
    pub fn coord_count(&self) -> usize {
        self.moduli.len()
    }

    pub fn free_rank(&self) -> usize {
        self.group.free_rank
    }

    /// Orders of the torsion coordinates.
    pub fn torsion_orders(&self) -> Vec<BigInt> {
        self.moduli.iter().flatten().cloned().collect()
    }

    pub fn reduce(&self, x: &[BigInt]) -> Vec<BigInt> {
        reduce_coords(x, &self.moduli)
    }

    pub fn generator_coords(&self, j: usize) -> Vec<BigInt> {
        self.projection.column(j)
    }

    /// Coordinates of `∏ g_j^{e_j}` for a word given as generator exponents.
    pub fn project_word(&self, word: &[(usize, i64)]) -> Vec<BigInt> {
        let mut exponents = vec![BigInt::zero(); self.projection.cols()];
        for &(j, e) in word {
            exponents[j] += e;
        }
        self.reduce(&self.projection.mul_vec(&exponents))
    }

    /// Coordinates of a combination of generators.
    pub fn project_combination(&self, c: &[BigInt]) -> Vec<BigInt> {
        self.reduce(&self.projection.mul_vec(c))
    }

    pub fn is_zero(&self, coords: &[BigInt]) -> bool {
        self.reduce(coords).iter().all(Zero::is_zero)
    }

    /// Full projection over the relation variables `(t, g)`.
    pub fn variable_projection(&self) -> IntMatrix {
        self.translation_projection
            .hstack(&self.projection)
            .expect("projections share their row count")
    }
}

/// Abelianization of a catalog-style affine crystallographic group.
pub fn abelianization(spec: &BieberbachGroupSpec) -> Result<AbelianizationData> {
    let n = spec.dim;
    let m = spec.gens.len();
    let closure = holonomy_closure(spec)?;
    let index: HashMap<&IntMatrix, usize> = closure
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    let values: Vec<AffineGen> = closure
        .words
        .iter()
        .map(|w| evaluate_word(spec, w))
        .collect();

    let mut relations: Vec<Vec<BigInt>> = Vec::new();
    // g t_e g^{-1} = t_{L e}
    for g in &spec.gens {
        for i in 0..n {
            let mut rel = vec![BigInt::zero(); n + m];
            for (k, slot) in rel.iter_mut().enumerate().take(n) {
                *slot = g.linear[(k, i)].clone();
            }
            rel[i] -= BigInt::one();
            if rel.iter().any(|x| !x.is_zero()) {
                relations.push(rel);
            }
        }
    }
    // w_h g_j w_{h g_j}^{-1} is a lattice translation
    for (h, word) in closure.words.iter().enumerate() {
        for (j, g) in spec.gens.iter().enumerate() {
            let target_matrix = &closure.elements[h] * &g.linear;
            let target = index[&target_matrix];
            let loop_value = values[h].compose(g).compose(&values[target].inverse()?);
            let c = loop_value.lattice_translation().ok_or_else(|| {
                Error::Internal(format!(
                    "relator in '{}' is not a lattice translation; translation lattice is not Z^{n}",
                    spec.name
                ))
            })?;
            let mut rel = vec![BigInt::zero(); n + m];
            for &x in word {
                rel[n + x] += BigInt::one();
            }
            rel[n + j] += BigInt::one();
            for &x in &closure.words[target] {
                rel[n + x] -= BigInt::one();
            }
            for (i, ci) in c.iter().enumerate() {
                rel[i] -= ci;
            }
            if rel.iter().any(|x| !x.is_zero()) {
                relations.push(rel);
            }
        }
    }
    let relation_matrix = IntMatrix::from_columns(n + m, &relations)?;
    let coker = cokernel_map(&relation_matrix);
    let moduli = coker.moduli.clone();
    let free = coker.group.free_rank;
    let coords = moduli.len();
    let mut full = coker.projection.clone();

    // Canonical free coordinates: Hermite form of the generator columns.
    let gen_part = full.column_range(n, n + m);
    let mut free_block = IntMatrix::zeros(free, m);
    for i in 0..free {
        for j in 0..m {
            free_block[(i, j)] = gen_part[(i, j)].clone();
        }
    }
    let (w, hnf) = hermite_normal_form(&free_block);
    let mut updated = IntMatrix::zeros(coords, n + m);
    for i in 0..free {
        for j in 0..n + m {
            updated[(i, j)] =
                (0..free).fold(BigInt::zero(), |acc, k| acc + &w[(i, k)] * &full[(k, j)]);
        }
    }
    for i in free..coords {
        for j in 0..n + m {
            updated[(i, j)] = full[(i, j)].clone();
        }
    }
    full = updated;

    // Re-split so that generators carrying a unit pivot have no torsion part.
    for i in 0..free {
        let Some(pivot_col) = (0..m).find(|&j| !hnf[(i, j)].is_zero()) else {
            continue;
        };
        if !hnf[(i, pivot_col)].is_one() {
            continue;
        }
        let shift: Vec<BigInt> = (free..coords)
            .map(|t| full[(t, n + pivot_col)].clone())
            .collect();
        for (t_off, s) in shift.iter().enumerate() {
            let t = free + t_off;
            for j in 0..n + m {
                let v = &full[(t, j)] - s * &full[(i, j)];
                full[(t, j)] = v;
            }
        }
    }
    for i in 0..coords {
        if let Some(d) = &moduli[i] {
            for j in 0..n + m {
                let v = full[(i, j)].mod_floor(d);
                full[(i, j)] = v;
            }
        }
    }

    let translation_projection = full.column_range(0, n);
    let projection = full.column_range(n, n + m);

    // Lifts: solve P x + D y = e_i with D the torsion moduli.
    let mut moduli_block = IntMatrix::zeros(coords, coords);
    for (i, d) in moduli.iter().enumerate() {
        if let Some(d) = d {
            moduli_block[(i, i)] = d.clone();
        }
    }
    let system = projection.hstack(&moduli_block)?;
    let mut basis_lifts = Vec::with_capacity(coords);
    for i in 0..coords {
        let mut e = vec![BigInt::zero(); coords];
        e[i] = BigInt::one();
        let sol = solve_integer(&system, &e).ok_or_else(|| {
            Error::Internal(format!(
                "generators of '{}' do not surject onto H_1",
                spec.name
            ))
        })?;
        basis_lifts.push(sol[..m].to_vec());
    }

    Ok(AbelianizationData {
        group: coker.group,
        projection,
        translation_projection,
        moduli,
        basis_lifts,
        relations: relation_matrix,
    })
}

fn rat(s: &str) -> BigRational {
    parse_rational(s).expect("catalog rationals are well formed")
}

fn affine(linear: &[&[i64]], translation: &[&str]) -> AffineGen {
    AffineGen::new(
        IntMatrix::from_i64(linear),
        translation.iter().map(|s| rat(s)).collect(),
    )
    .expect("catalog generators are well formed")
}

fn unit_translations(n: usize) -> Vec<AffineGen> {
    (0..n)
        .map(|i| {
            let mut v = vec![BigInt::zero(); n];
            v[i] = BigInt::one();
            AffineGen::translation_by(&v)
        })
        .collect()
}

/// Screw motion along the first axis: `1 ⊕ block` with translation `shift`
/// in the first coordinate, followed by the three lattice translations.
fn screw_group(block: &[&[i64]], shift: &str) -> Vec<AffineGen> {
    let linear = IntMatrix::block_diagonal(&[IntMatrix::identity(1), IntMatrix::from_i64(block)]);
    let screw = AffineGen::new(linear, vec![rat(shift), rat("0"), rat("0")])
        .expect("catalog generators are well formed");
    let mut gens = vec![screw];
    gens.extend(unit_translations(3));
    gens
}

/// Standard presentations of the compact flat manifolds of dimension ≤ 3.
///
/// Non-translation generators come first so that they become free basis
/// elements of `H_1` when possible. The Klein bottle uses
/// `a(x, y) = (x + 1, y)` and `b(x, y) = (-x, y + 1/2)`.
pub fn catalog(name: &str) -> Result<BieberbachGroupSpec> {
    let (dim, gens) = match name {
        "S1" => (1, unit_translations(1)),
        "T2" => (2, unit_translations(2)),
        "T3" | "G1" => (3, unit_translations(3)),
        "K" => (
            2,
            vec![
                affine(&[&[1, 0], &[0, 1]], &["1", "0"]),
                affine(&[&[-1, 0], &[0, 1]], &["0", "1/2"]),
            ],
        ),
        "G2" => (3, screw_group(&[&[-1, 0], &[0, -1]], "1/2")),
        "G3" => (3, screw_group(&[&[0, -1], &[1, -1]], "1/3")),
        "G4" => (3, screw_group(&[&[0, -1], &[1, 0]], "1/4")),
        "G5" => (3, screw_group(&[&[1, -1], &[1, 0]], "1/6")),
        "G6" => {
            let mut gens = vec![
                affine(
                    &[&[1, 0, 0], &[0, -1, 0], &[0, 0, -1]],
                    &["1/2", "1/2", "0"],
                ),
                affine(
                    &[&[-1, 0, 0], &[0, 1, 0], &[0, 0, -1]],
                    &["0", "1/2", "1/2"],
                ),
            ];
            gens.extend(unit_translations(3));
            (3, gens)
        }
        "B1" => {
            let mut gens = vec![affine(
                &[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]],
                &["1/2", "0", "0"],
            )];
            gens.extend(unit_translations(3));
            (3, gens)
        }
        "B2" => {
            // e1 ↦ e1, e2 ↦ e2, e3 ↦ e2 - e3
            let mut gens = vec![affine(
                &[&[1, 0, 0], &[0, 1, 1], &[0, 0, -1]],
                &["1/2", "0", "0"],
            )];
            gens.extend(unit_translations(3));
            (3, gens)
        }
        "B3" => {
            let mut gens = vec![
                affine(&[&[1, 0, 0], &[0, -1, 0], &[0, 0, -1]], &["1/2", "0", "0"]),
                affine(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]], &["0", "1/2", "0"]),
            ];
            gens.extend(unit_translations(3));
            (3, gens)
        }
        "B4" => {
            let mut gens = vec![
                affine(&[&[1, 0, 0], &[0, -1, 0], &[0, 0, -1]], &["1/2", "0", "0"]),
                affine(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]], &["0", "1/2", "1/2"]),
            ];
            gens.extend(unit_translations(3));
            (3, gens)
        }
        _ => return Err(Error::UnknownGroup(name.to_string())),
    };
    BieberbachGroupSpec::new(name, dim, gens)
}

/// Mapping torus of the affine map of `T^n` with linear part `g0`: the
/// `(n+1)`-dimensional group generated by the screw `(g0 ⊕ 1, (0, …, 0, 1/k))`
/// and the translations `e_1, …, e_n`. The `k`-th power of the screw is the
/// primitive translation `e_{n+1}`.
pub fn mapping_torus(lattice: &GLattice) -> BieberbachGroupSpec {
    let n = lattice.rank();
    let k = lattice.order();
    let linear = IntMatrix::block_diagonal(&[lattice.g0().clone(), IntMatrix::identity(1)]);
    let mut shift = vec![BigRational::zero(); n + 1];
    shift[n] = BigRational::new(BigInt::one(), BigInt::from(k));
    let mut gens = vec![AffineGen::new(linear, shift).expect("dimensions agree")];
    gens.extend(unit_translations(n + 1).into_iter().take(n));
    BieberbachGroupSpec::new("mapping_torus", n + 1, gens)
        .expect("finite-order lattice gives a finite holonomy")
}

/// `(Tors H_1(M(g)), Tors A_G)`; the two are isomorphic.
pub fn tors_h1_two_ways(lattice: &GLattice) -> Result<(AbelianGroup, AbelianGroup)> {
    let torus = mapping_torus(lattice);
    let h1 = abelianization(&torus)?.group.torsion_part();
    let (_, tors) = lattice.coinvariants();
    Ok((h1, tors))
}

/// Decomposition `H_1 = ⟨a⟩ ⊕ B` adapted to a cyclic holonomy map `Ψ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicSplitting {
    /// Coordinates of `a` in `H_1`.
    pub a: Vec<BigInt>,
    /// Generators of `B` as coordinates.
    pub complement: Vec<Vec<BigInt>>,
    /// Generator `h` of the holonomy group.
    pub holonomy_generator: IntMatrix,
    /// `Ψ(a) = h^psi_a`.
    pub psi_a: usize,
    /// `Ψ` on each basis element of `H_1` as a power of `h`.
    pub psi_basis: Vec<usize>,
}

/// Holonomy map `H_1 → Z/k` for cyclic holonomy, as powers of a generator.
pub(crate) fn cyclic_holonomy_map(
    spec: &BieberbachGroupSpec,
    ab: &AbelianizationData,
) -> Result<(IntMatrix, Vec<usize>)> {
    let (elements, order) = holonomy_group(spec)?;
    let generator = elements
        .iter()
        .find(|h| (1..order).all(|j| !h.pow(j).is_identity()))
        .cloned()
        .ok_or(Error::NotCyclic(order))?;
    let powers: Vec<IntMatrix> = (0..order).map(|j| generator.pow(j)).collect();
    let mut psi = Vec::with_capacity(ab.coord_count());
    for lift in &ab.basis_lifts {
        let mut image = IntMatrix::identity(spec.dim);
        for (j, e) in lift.iter().enumerate() {
            let g = &spec.gens[j].linear;
            let e_mod = e.mod_floor(&BigInt::from(order));
            let exp = usize::try_from(e_mod).expect("reduced exponent fits");
            image = &image * &g.pow(exp);
        }
        let log = powers
            .iter()
            .position(|p| *p == image)
            .ok_or_else(|| Error::Internal("holonomy image outside the cyclic group".into()))?;
        psi.push(log);
    }
    Ok((generator, psi))
}

/// Splits `H_1 = ⟨a⟩ ⊕ B` with `Ψ(⟨a⟩)` the whole holonomy group and
/// `Tors H_1 ⊆ B ⊆ ker Ψ`.
pub fn cyclic_splitting(spec: &BieberbachGroupSpec) -> Result<CyclicSplitting> {
    let ab = abelianization(spec)?;
    let (generator, psi) = cyclic_holonomy_map(spec, &ab)?;
    let k = spec.holonomy_order;
    let free = ab.free_rank();
    if free == 0 {
        return Err(Error::Internal(format!("'{}' has finite H_1", spec.name)));
    }
    if psi[free..].iter().any(|&p| p != 0) {
        return Err(Error::Internal(
            "holonomy does not vanish on torsion".into(),
        ));
    }
    // Unimodular change of free basis bringing Ψ to (g, 0, ..., 0).
    let row = IntMatrix::from_rows(vec![psi[..free].iter().map(|&p| BigInt::from(p)).collect()])?;
    let snf = smith_normal_form(&row);
    let mut change = snf.v.clone();
    if snf.u[(0, 0)].is_negative() {
        change.negate_col(0);
    }
    let coords = ab.coord_count();
    let column_as_coords = |c: usize| -> Vec<BigInt> {
        let mut x = vec![BigInt::zero(); coords];
        for i in 0..free {
            x[i] = change[(i, c)].clone();
        }
        x
    };
    let a = column_as_coords(0);
    let mut complement: Vec<Vec<BigInt>> = (1..free).map(column_as_coords).collect();
    for t in free..coords {
        let mut x = vec![BigInt::zero(); coords];
        x[t] = BigInt::one();
        complement.push(x);
    }
    let psi_of = |x: &[BigInt]| -> usize {
        let total = x
            .iter()
            .zip(&psi)
            .fold(BigInt::zero(), |acc, (c, &p)| acc + c * BigInt::from(p));
        usize::try_from(total.mod_floor(&BigInt::from(k))).expect("reduced value fits")
    };
    let psi_a = psi_of(&a);
    if (psi_a as u64).gcd(&(k as u64)) != 1 && k > 1 {
        return Err(Error::Internal(
            "Ψ(a) does not generate the holonomy".into(),
        ));
    }
    if complement.iter().any(|b| psi_of(b) != 0) {
        return Err(Error::Internal("complement not contained in ker Ψ".into()));
    }
    Ok(CyclicSplitting {
        a,
        complement,
        holonomy_generator: generator,
        psi_a,
        psi_basis: psi,
    })
}
