//! Diffeomorphism and affine classification of flat bundles over low-dimensional
//! bases, together with canonical forms for the moduli of flat structures.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bieberbach::THREE_MANIFOLDS;
use crate::error::{Error, Result};
use crate::flatbundle::cup_table;
use crate::flatbundle::{
    orientation_character, real_irreducibles, sw_vector, total_holonomy, CupTable, FlatBase,
    FlatBundleSpec, LineKind, LineRep, Z2Class,
};
use crate::rational::{common_denominator, format_rational, mod_one};
use crate::zlinalg::IntMatrix;

/// Largest common denominator for which affine questions are decided.
pub const DENOMINATOR_BOUND: u64 = 64;

/// Orbit enumerations are abandoned beyond this many points.
pub const ORBIT_BOUND: usize = 2_000_000;

fn orbit<T, F>(start: T, step: F) -> Result<Vec<T>>
where
    T: Clone + Eq + Hash,
    F: Fn(&T) -> Vec<T>,
{
    let mut seen: HashSet<T> = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start.clone()]);
    let mut out = vec![start];
    while let Some(x) = queue.pop_front() {
        for y in step(&x) {
            if seen.insert(y.clone()) {
                if out.len() >= ORBIT_BOUND {
                    return Err(Error::BoundExceeded(format!(
                        "orbit larger than {ORBIT_BOUND}"
                    )));
                }
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// Automorphisms of `π_1(X)` acting through `H_1`.
#[derive(Clone, Debug)]
pub struct AutAction {
    pub base: Arc<FlatBase>,
    /// Column `j` of each matrix is the image of generator `j` in `H_1`,
    /// written as a combination of generators.
    pub generators: Vec<IntMatrix>,
    /// `u ↦ u ∘ f` on `H^1(X; Z/2)`; column `i` is the image of basis class `i`.
    pub h1_matrices: Vec<Vec<Vec<u8>>>,
    /// Action of each generator on the coordinates of `H_1`.
    pub coord_matrices: Vec<IntMatrix>,
}

fn torus_generators(n: usize) -> Vec<IntMatrix> {
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut e = IntMatrix::identity(n);
                e[(i, j)] = BigInt::from(1);
                gens.push(e);
            }
        }
    }
    let mut r = IntMatrix::identity(n);
    r[(0, 0)] = BigInt::from(-1);
    gens.push(r);
    gens
}

pub fn aut_action(base: &Arc<FlatBase>) -> Result<AutAction> {
    let generators = match base.name() {
        "S1" => vec![IntMatrix::from_i64(&[&[-1]])],
        "T2" => torus_generators(2),
        "T3" | "G1" => torus_generators(3),
        // generators (a, b) with b a b^{-1} = a^{-1}
        "K" => vec![
            IntMatrix::from_i64(&[&[-1, 0], &[0, 1]]),
            IntMatrix::from_i64(&[&[1, 1], &[0, 1]]),
            IntMatrix::from_i64(&[&[1, 0], &[0, -1]]),
        ],
        other => return Err(Error::UnsupportedBase(other.to_string())),
    };
    let ab = base.abelianization();
    let coords = ab.coord_count();
    let lifts = IntMatrix::from_columns(ab.projection.cols(), &ab.basis_lifts)?;
    let d = base.h1_dim_mod2();
    let mut h1_matrices = Vec::with_capacity(generators.len());
    let mut coord_matrices = Vec::with_capacity(generators.len());
    for f in &generators {
        let image = &ab.projection * f;
        let mut h1 = vec![vec![0u8; d]; d];
        for i in 0..d {
            let u = Z2Class::basis(d, i);
            for (c, &g) in base.chosen_generators().iter().enumerate() {
                h1[c][i] = base.evaluate_class(&u, &image.column(g));
            }
        }
        h1_matrices.push(h1);
        let mut coord = &image * &lifts;
        for i in 0..coords {
            if let Some(m) = &ab.moduli[i] {
                for j in 0..coords {
                    let v = coord[(i, j)].mod_floor(m);
                    coord[(i, j)] = v;
                }
            }
        }
        coord_matrices.push(coord);
    }
    Ok(AutAction {
        base: base.clone(),
        generators,
        h1_matrices,
        coord_matrices,
    })
}

fn apply_mod2(m: &[Vec<u8>], u: &Z2Class) -> Z2Class {
    Z2Class(
        m.iter()
            .map(|row| row.iter().zip(&u.0).fold(0u8, |acc, (a, b)| acc ^ (a & b)))
            .collect(),
    )
}

fn mul_mod2(a: &[Vec<u8>], b: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(0u8, |acc, k| acc ^ (a[i][k] & b[k][j])))
                .collect()
        })
        .collect()
}

impl AutAction {
    pub fn act_h1(&self, g: usize, u: &Z2Class) -> Z2Class {
        apply_mod2(&self.h1_matrices[g], u)
    }

    /// Orbit of `(w_1, w_2)`; the action on `H^2` is trivial.
    pub fn orbit_of(&self, u: &Z2Class, w2: Option<u8>) -> Vec<(Z2Class, Option<u8>)> {
        let mut out = orbit(u.clone(), |x| {
            (0..self.h1_matrices.len())
                .map(|g| self.act_h1(g, x))
                .collect()
        })
        .expect("orbits in H^1 are tiny");
        out.sort();
        out.into_iter().map(|x| (x, w2)).collect()
    }

    /// Order of the image of the action on `H^1 ⊕ H^2`.
    pub fn closure_order(&self) -> usize {
        let d = self.base.h1_dim_mod2();
        let identity: Vec<Vec<u8>> = (0..d).map(|i| Z2Class::basis(d, i).0).collect();
        orbit(identity, |m| {
            self.h1_matrices.iter().map(|g| mul_mod2(g, m)).collect()
        })
        .expect("finite matrix group")
        .len()
    }

    /// Pullback of a character through generator `g`, numerators mod `n`.
    fn pull_back(&self, g: usize, values: &[u64], n: u64) -> Vec<u64> {
        let c = &self.coord_matrices[g];
        let nn = BigInt::from(n);
        (0..values.len())
            .map(|i| {
                let total = values
                    .iter()
                    .enumerate()
                    .fold(BigInt::zero(), |acc, (k, v)| {
                        acc + &c[(k, i)] * BigInt::from(*v)
                    });
                total.mod_floor(&nn).to_u64().expect("reduced mod n")
            })
            .collect()
    }
}

/// Orbits of `H^1(X; Z/2)` under automorphisms: flat line bundles up to
/// diffeomorphism of their total spaces.
pub fn codim1_classes(base: &Arc<FlatBase>) -> Result<Vec<Vec<Z2Class>>> {
    let aut = aut_action(base)?;
    let mut seen = HashSet::new();
    let mut orbits = Vec::new();
    for u in base.all_classes() {
        if seen.contains(&u) {
            continue;
        }
        let o: Vec<Z2Class> = aut.orbit_of(&u, None).into_iter().map(|(x, _)| x).collect();
        seen.extend(o.iter().cloned());
        orbits.push(o);
    }
    Ok(orbits)
}

/// Cohomology point `(w_1, w_2)`; `w_2` is absent over the circle.
pub type SwPoint = (Z2Class, Option<u8>);

#[derive(Clone, Debug)]
pub struct DiffeoClass {
    pub label: String,
    pub representative: FlatBundleSpec,
    /// Classes of the nontrivial summands of the representative.
    pub summand_classes: Vec<Z2Class>,
    pub w1: Z2Class,
    pub w2: Option<u8>,
    pub orbit: Vec<SwPoint>,
}

impl DiffeoClass {
    pub fn to_json(&self) -> Value {
        let base = &self.representative.base;
        json!({
            "label": self.label,
            "w1": base.format_class(&self.w1),
            "w2": self.w2,
            "representative": self.representative,
            "orbit": self.orbit.iter().map(|(u, w2)| json!({"w1": base.format_class(u), "w2": w2})).collect::<Vec<_>>(),
        })
    }
}

fn line_name(base: &FlatBase, u: &Z2Class) -> String {
    let prefix = match base.name() {
        "K" => "lambda",
        _ => "mu",
    };
    if base.h1_dim_mod2() == 1 {
        return prefix.to_string();
    }
    u.0.iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(i, _)| format!("{prefix}{}", i + 1))
        .collect()
}

fn class_label(base: &FlatBase, summands: &[Z2Class], s: usize) -> String {
    if summands.is_empty() {
        return format!("{}xR^{s}", base.name());
    }
    let mut parts: Vec<String> = summands.iter().map(|u| line_name(base, u)).collect();
    if s > summands.len() {
        parts.push(format!("Theta^{}", s - summands.len()));
    }
    format!("E({})", parts.join(" + "))
}

fn whitney(table: Option<&CupTable>, lines: &[Z2Class], dim: usize) -> SwPoint {
    let w1 = lines.iter().fold(Z2Class::zero(dim), |acc, u| acc.add(u));
    let w2 = table.map(|t| {
        let mut w2 = 0;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                w2 ^= t.cup(&lines[i], &lines[j]);
            }
        }
        w2
    });
    (w1, w2)
}

/// Multisets of nontrivial classes with at most `s` elements. Multiplicities
/// stop at three: `(1 + u)^4 = 1` in the cohomology of a surface, so larger
/// multiplicities realize nothing new.
fn reduced_multisets(classes: &[Z2Class], s: usize) -> Vec<Vec<Z2Class>> {
    let mut out = vec![Vec::new()];
    for u in classes {
        let mut next = Vec::new();
        for m in &out {
            for k in 0..=3 {
                if m.len() + k > s {
                    break;
                }
                let mut m2 = m.clone();
                m2.extend(std::iter::repeat_n(u.clone(), k));
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Diffeomorphism classes of total spaces of flat bundles of dimension `m`
/// over `base` that split into flat line bundles.
pub fn diffeo_classes(base: &Arc<FlatBase>, m: usize) -> Result<Vec<DiffeoClass>> {
    let dim = base.dim();
    if m <= dim {
        return Err(Error::TotalDimTooSmall {
            total: m,
            base: dim,
        });
    }
    let aut = aut_action(base)?;
    let table = if dim == 2 {
        Some(cup_table(base)?)
    } else {
        None
    };
    let s = m - dim;
    let d = base.h1_dim_mod2();
    let nontrivial: Vec<Z2Class> = base.all_classes().into_iter().skip(1).collect();
    let mut candidates = reduced_multisets(&nontrivial, s);
    candidates.sort_by(|a, b| {
        let ka: Vec<usize> = a.iter().map(Z2Class::index).collect();
        let kb: Vec<usize> = b.iter().map(Z2Class::index).collect();
        (a.len(), ka).cmp(&(b.len(), kb))
    });
    let mut covered: HashSet<SwPoint> = HashSet::new();
    let mut classes = Vec::new();
    for lines in candidates {
        let point = whitney(table.as_ref(), &lines, d);
        if covered.contains(&point) {
            continue;
        }
        let orbit = aut.orbit_of(&point.0, point.1);
        covered.extend(orbit.iter().cloned());
        let mut summands: Vec<LineRep> =
            lines.iter().map(|u| base.real_line_from_class(u)).collect();
        summands.resize(s, LineRep::trivial(LineKind::Real, base));
        let representative = FlatBundleSpec::new(base.clone(), summands)?;
        let sw = sw_vector_or_w1(&representative)?;
        if sw != point {
            return Err(Error::Internal(
                "representative does not realize its class".into(),
            ));
        }
        classes.push(DiffeoClass {
            label: class_label(base, &lines, s),
            representative,
            summand_classes: lines,
            w1: point.0,
            w2: point.1,
            orbit,
        });
    }
    Ok(classes)
}

fn sw_vector_or_w1(b: &FlatBundleSpec) -> Result<SwPoint> {
    let v = sw_vector(b)?;
    Ok((v.w1, v.w2))
}

/// Same automorphism orbit of `(w_1, w_2)`.
pub fn stably_diffeomorphic(b1: &FlatBundleSpec, b2: &FlatBundleSpec) -> Result<bool> {
    if b1.base.name() != b2.base.name() {
        return Err(Error::DifferentBases(
            b1.base.name().into(),
            b2.base.name().into(),
        ));
    }
    let aut = aut_action(&b1.base)?;
    let p1 = sw_vector_or_w1(b1)?;
    let p2 = sw_vector_or_w1(b2)?;
    Ok(aut.orbit_of(&p1.0, p1.1).contains(&p2))
}

/// Representatives of the classes published for each base, as classes of
/// nontrivial summands (`1`, `2` are the duals of the first and second
/// generator, `3` their sum).
fn reference_representatives(base: &str, m: usize) -> Option<Vec<Vec<usize>>> {
    match (base, m) {
        ("S1", m) if m >= 2 => Some(vec![vec![], vec![1]]),
        ("T2", 4) => Some(vec![vec![], vec![1], vec![1, 2]]),
        ("T2", m) if m >= 5 => Some(vec![vec![], vec![1], vec![1, 2], vec![1, 2, 3]]),
        ("K", m) if m >= 4 => Some(vec![vec![], vec![1], vec![2], vec![1, 2], vec![2, 3]]),
        _ => None,
    }
}

pub const FLAG_COUNT_MISMATCH: &str = "REFERENCE_COUNT_MISMATCH";
pub const FLAG_ORBIT_COLLISION: &str = "REFERENCE_ORBIT_COLLISION";

/// Oracle classification compared with the published representative list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReferenceComparison {
    pub base: String,
    pub total_dim: usize,
    pub oracle_count: usize,
    pub reference_count: Option<usize>,
    /// Oracle class reached by each published representative.
    pub reference_hits: Vec<Option<String>>,
    /// Pairs of published representatives lying in one orbit.
    pub collisions: Vec<(String, String)>,
    /// Oracle classes reached by no published representative.
    pub missed: Vec<String>,
    pub flags: Vec<String>,
}

impl ReferenceComparison {
    pub fn agrees(&self) -> bool {
        self.flags.is_empty()
    }
}

pub fn compare_with_reference(base: &Arc<FlatBase>, m: usize) -> Result<ReferenceComparison> {
    let classes = diffeo_classes(base, m)?;
    let table = if base.dim() == 2 {
        Some(cup_table(base)?)
    } else {
        None
    };
    let d = base.h1_dim_mod2();
    let s = m - base.dim();
    let reference = reference_representatives(base.name(), m);
    let mut hits = Vec::new();
    let mut names = Vec::new();
    if let Some(reps) = &reference {
        for rep in reps {
            let lines: Vec<Z2Class> = rep.iter().map(|&c| Z2Class::from_index(d, c)).collect();
            names.push(class_label(base, &lines, s));
            if lines.len() > s {
                hits.push(None);
                continue;
            }
            let point = whitney(table.as_ref(), &lines, d);
            hits.push(classes.iter().position(|c| c.orbit.contains(&point)));
        }
    }
    let mut collisions = Vec::new();
    for i in 0..hits.len() {
        for j in i + 1..hits.len() {
            if hits[i].is_some() && hits[i] == hits[j] {
                collisions.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    let reached: BTreeSet<usize> = hits.iter().flatten().copied().collect();
    let missed: Vec<String> = if reference.is_some() {
        (0..classes.len())
            .filter(|i| !reached.contains(i))
            .map(|i| classes[i].label.clone())
            .collect()
    } else {
        Vec::new()
    };
    let reference_count = reference.as_ref().map(Vec::len);
    let mut flags = Vec::new();
    if reference_count.is_some_and(|r| r != classes.len()) {
        flags.push(FLAG_COUNT_MISMATCH.to_string());
    }
    if !collisions.is_empty() {
        flags.push(FLAG_ORBIT_COLLISION.to_string());
    }
    Ok(ReferenceComparison {
        base: base.name().to_string(),
        total_dim: m,
        oracle_count: classes.len(),
        reference_count,
        reference_hits: hits
            .iter()
            .map(|h| h.map(|i| classes[i].label.clone()))
            .collect(),
        collisions,
        missed,
        flags,
    })
}

/// TSV report: one row per class, then one row per discrepancy flag.
pub fn classes_tsv(classes: &[DiffeoClass], comparison: Option<&ReferenceComparison>) -> String {
    let mut out = String::from("label\tw1\tw2\trepresentative\n");
    for c in classes {
        let base = &c.representative.base;
        let w2 = c.w2.map_or("-".to_string(), |w| w.to_string());
        let rep = serde_json::to_string(&c.representative).expect("bundle serializes");
        out.push_str(&format!(
            "{}\t{}\t{w2}\t{rep}\n",
            c.label,
            base.format_class(&c.w1)
        ));
    }
    if let Some(cmp) = comparison {
        for flag in &cmp.flags {
            let reference = cmp
                .reference_count
                .map_or("-".to_string(), |r| r.to_string());
            let detail = if flag == FLAG_ORBIT_COLLISION {
                cmp.collisions
                    .iter()
                    .map(|(a, b)| format!("{a} ~ {b}"))
                    .collect::<Vec<_>>()
                    .join("; ")
            } else {
                format!("missed={}", cmp.missed.join("; "))
            };
            out.push_str(&format!(
                "{flag}\toracle={}\treference={reference}\t{detail}\n",
                cmp.oracle_count
            ));
        }
    }
    out
}

/// Real irreducible pieces of the vertical holonomy, as numerators mod `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Piece {
    rotation: bool,
    values: Vec<u64>,
}

fn canonical_pieces(mut pieces: Vec<Piece>, n: u64) -> Vec<Piece> {
    for p in pieces.iter_mut().filter(|p| p.rotation) {
        let neg: Vec<u64> = p.values.iter().map(|v| (n - v) % n).collect();
        if neg < p.values {
            p.values = neg;
        }
    }
    pieces.sort();
    pieces
}

fn pieces_of(b: &FlatBundleSpec, n: u64) -> Vec<Piece> {
    let nn = BigRational::from_integer(BigInt::from(n));
    let pieces = real_irreducibles(b)
        .into_iter()
        .map(|l| Piece {
            rotation: l.kind == LineKind::Complex,
            values: l
                .values()
                .iter()
                .map(|v| {
                    (v * &nn)
                        .to_integer()
                        .to_u64()
                        .expect("value numerators lie in [0, n)")
                })
                .collect(),
        })
        .collect();
    canonical_pieces(pieces, n)
}

/// Affine equivalence of the total spaces of two flat bundles over one base.
pub fn affine_equivalent(b1: &FlatBundleSpec, b2: &FlatBundleSpec) -> Result<bool> {
    if b1.base.name() != b2.base.name() {
        return Err(Error::DifferentBases(
            b1.base.name().into(),
            b2.base.name().into(),
        ));
    }
    let aut = aut_action(&b1.base)?;
    if b1.total_dim() != b2.total_dim() {
        return Ok(false);
    }
    if total_holonomy(b1)?.order() != total_holonomy(b2)?.order() {
        return Ok(false);
    }
    let n = crate::flatbundle::common_value_denominator(b1)
        .lcm(&crate::flatbundle::common_value_denominator(b2));
    let n = match n.to_u64() {
        Some(n) if n <= DENOMINATOR_BOUND => n,
        _ => return Err(Error::DenominatorTooLarge(n.to_string(), DENOMINATOR_BOUND)),
    };
    let start = pieces_of(b1, n);
    let target = pieces_of(b2, n);
    if start == target {
        return Ok(true);
    }
    if start.len() != target.len() {
        return Ok(false);
    }
    let reachable = orbit(start, |ps| {
        (0..aut.generators.len())
            .map(|g| {
                let moved = ps
                    .iter()
                    .map(|p| Piece {
                        rotation: p.rotation,
                        values: aut.pull_back(g, &p.values, n),
                    })
                    .collect();
                canonical_pieces(moved, n)
            })
            .collect()
    })?;
    Ok(reachable.contains(&target))
}

/// Rational angles, as fractions of a full turn, normalized to `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngleTuple(pub Vec<BigRational>);

impl AngleTuple {
    pub fn new(angles: Vec<BigRational>) -> Self {
        AngleTuple(angles.iter().map(mod_one).collect())
    }

    pub fn denominator(&self) -> BigInt {
        common_denominator(&self.0)
    }

    pub fn formatted(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }

    fn numerators(&self, n: u64) -> Vec<u64> {
        let nn = BigRational::from_integer(BigInt::from(n));
        self.0
            .iter()
            .map(|a| (a * &nn).to_integer().to_u64().expect("normalized angle"))
            .collect()
    }

    fn from_numerators(nums: &[u64], n: u64) -> Self {
        AngleTuple(
            nums.iter()
                .map(|&a| BigRational::new(BigInt::from(a), BigInt::from(n)))
                .collect(),
        )
    }
}

fn bounded_denominator(t: &AngleTuple, len: usize) -> Result<u64> {
    if t.0.len() != len {
        return Err(Error::InvalidArgument(format!(
            "expected {len} angles, got {}",
            t.0.len()
        )));
    }
    let n = t.denominator();
    match n.to_u64() {
        Some(n) if n <= DENOMINATOR_BOUND => Ok(n),
        _ => Err(Error::DenominatorTooLarge(n.to_string(), DENOMINATOR_BOUND)),
    }
}

/// Least point of the `GL(2, Z)` orbit of a pair of angles.
pub fn torus_moduli_canonical(t: &AngleTuple) -> Result<AngleTuple> {
    let n = bounded_denominator(t, 2)?;
    let start = t.numerators(n);
    let points = orbit((start[0], start[1]), |&(a, b)| {
        vec![((a + b) % n, b), (a, (a + b) % n), ((n - a) % n, b)]
    })?;
    let (a, b) = points.into_iter().min().expect("orbit contains its start");
    Ok(AngleTuple::from_numerators(&[a, b], n))
}

/// Least point under `(α, β) ↦ (ε₁α, ε₂(β − kα))`.
pub fn klein_rho_canonical(t: &AngleTuple) -> Result<AngleTuple> {
    let n = bounded_denominator(t, 2)?;
    let nums = t.numerators(n);
    let (a, b) = (nums[0], nums[1]);
    let neg = |x: u64| (n - x) % n;
    let mut best = (a, b);
    for k in 0..n {
        let shifted = (b + n * n - (k * a) % n) % n;
        for (x, y) in [
            (a, shifted),
            (neg(a), shifted),
            (a, neg(shifted)),
            (neg(a), neg(shifted)),
        ] {
            best = best.min((x, y));
        }
    }
    Ok(AngleTuple::from_numerators(&[best.0, best.1], n))
}

/// `min(θ, 1 − θ)`
pub fn circle_canonical(theta: &BigRational) -> BigRational {
    let t = mod_one(theta);
    let other = mod_one(&-t.clone());
    t.min(other)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dim4Entry {
    pub index: usize,
    pub label: String,
    pub base: String,
    pub fiber_dim: usize,
    pub orientable: bool,
}

fn vertical_orientable(b: &FlatBundleSpec) -> Result<bool> {
    Ok(b.base
        .orientation_class()
        .add(&orientation_character(b)?)
        .is_zero())
}

/// Orientable noncompact complete flat 4-manifolds.
pub fn dim4_table() -> Result<Vec<Dim4Entry>> {
    let mut out = vec![Dim4Entry {
        index: 1,
        label: "R^4".into(),
        base: "point".into(),
        fiber_dim: 4,
        orientable: true,
    }];
    let trivial = |name: &str, s: usize| -> Result<FlatBundleSpec> {
        let base = FlatBase::from_catalog(name)?;
        let theta = LineRep::trivial(LineKind::Real, &base);
        FlatBundleSpec::new(base, vec![theta; s])
    };
    let mut push = |label: String, b: FlatBundleSpec| -> Result<()> {
        out.push(Dim4Entry {
            index: out.len() + 1,
            label,
            base: b.base.name().to_string(),
            fiber_dim: b.fiber_dim(),
            orientable: vertical_orientable(&b)?,
        });
        Ok(())
    };
    push("S1xR^3".into(), trivial("S1", 3)?)?;
    push("T2xR^2".into(), trivial("T2", 2)?)?;
    let k = FlatBase::from_catalog("K")?;
    let tk = vec![
        k.real_line_from_class(k.orientation_class()),
        LineRep::trivial(LineKind::Real, &k),
    ];
    push("TK".into(), FlatBundleSpec::new(k, tk)?)?;
    for (j, name) in THREE_MANIFOLDS.iter().enumerate() {
        let x = FlatBase::from_catalog(name)?;
        let det = x.real_line_from_class(x.orientation_class());
        push(
            format!("L3(X{})", j + 1),
            FlatBundleSpec::new(x, vec![det])?,
        )?;
    }
    Ok(out)
}

/// `card Epi(Z^n, Z/k) · card Rep(Z/k, s)` with representations counted as
/// multisets of real irreducibles.
pub fn affine_class_bound(n: usize, k: u64, s: usize) -> Result<u64> {
    if !(1..=3).contains(&n) || !(1..=12).contains(&k) || s > 4 {
        return Err(Error::BoundExceeded(format!(
            "affine_class_bound needs 1 <= n <= 3, 1 <= k <= 12, s <= 4 (got n={n}, k={k}, s={s})"
        )));
    }
    let mut epis = 0u64;
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut g = k;
        let mut c = code;
        for _ in 0..n {
            g = g.gcd(&(c % k));
            c /= k;
        }
        if g == 1 {
            epis += 1;
        }
    }
    let mut dims = vec![1usize];
    if k % 2 == 0 {
        dims.push(1);
    }
    dims.extend(std::iter::repeat_n(2, ((k.max(1) - 1) / 2) as usize));
    // multisets of irreducibles with total dimension s
    let mut ways = vec![0u64; s + 1];
    ways[0] = 1;
    for d in dims {
        for t in d..=s {
            ways[t] += ways[t - d];
        }
    }
    Ok(epis * ways[s])
}

/// Pairwise affinely inequivalent bundles with isomorphic fundamental groups.
pub fn inequivalent_family(base: &Arc<FlatBase>, t: usize) -> Result<Vec<FlatBundleSpec>> {
    if !matches!(base.name(), "S1" | "T2") {
        return Err(Error::UnsupportedBase(base.name().to_string()));
    }
    if t < 2 {
        return Err(Error::InvalidArgument(format!(
            "family size must be at least 2, got {t}"
        )));
    }
    let (f, tors) = base.value_shape();
    (0..t)
        .map(|j| {
            let mut free = vec![BigRational::zero(); f];
            free[0] = BigRational::new(BigInt::from(1), BigInt::from(j + 2));
            let line = LineRep::new(LineKind::Complex, free, vec![BigRational::zero(); tors]);
            FlatBundleSpec::new(base.clone(), vec![line])
        })
        .collect()
}
