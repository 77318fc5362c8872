#![allow(dead_code)]

use cfmanifold::{make_glattice, GLattice, IntMatrix};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

/// Companion blocks of the cyclotomic polynomials Φ1, Φ2, Φ3, Φ4, Φ6,
/// tagged with the order of the block.
fn cyclotomic_blocks() -> Vec<(usize, IntMatrix)> {
    vec![
        (1, IntMatrix::from_i64(&[&[1]])),
        (2, IntMatrix::from_i64(&[&[-1]])),
        (3, IntMatrix::from_i64(&[&[0, -1], &[1, -1]])),
        (4, IntMatrix::from_i64(&[&[0, -1], &[1, 0]])),
        (6, IntMatrix::from_i64(&[&[0, -1], &[1, 1]])),
    ]
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Random unimodular matrix: a product of elementary operations, rejected
/// when an entry leaves [-3, 3].
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> IntMatrix {
    let mut w = IntMatrix::identity(n);
    if n < 2 {
        if rng.gen_bool(0.5) {
            w.negate_row(0);
        }
        return w;
    }
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let f = BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 });
        let mut candidate = w.clone();
        candidate.add_row_multiple(i, j, &f);
        let bounded = (0..n).all(|r| (0..n).all(|c| candidate[(r, c)].magnitude() <= &3u32.into()));
        if bounded {
            w = candidate;
        }
    }
    if rng.gen_bool(0.5) {
        w.negate_row(rng.gen_range(0..n));
    }
    w
}

/// Random lattice of the given order (2, 3, 4 or 6) and rank at most
/// `max_rank`, conjugated into a random basis.
pub fn random_cyclic_lattice<R: Rng>(rng: &mut R, order: usize, max_rank: usize) -> GLattice {
    let blocks: Vec<(usize, IntMatrix)> = cyclotomic_blocks()
        .into_iter()
        .filter(|(d, _)| order % d == 0)
        .collect();
    loop {
        let target = rng.gen_range(1..=max_rank);
        let mut chosen: Vec<IntMatrix> = Vec::new();
        let mut rank = 0;
        let mut l = 1;
        while rank < target {
            let (d, b) = blocks.choose(rng).unwrap();
            if rank + b.rows() > target {
                continue;
            }
            rank += b.rows();
            l = lcm(l, *d);
            chosen.push(b.clone());
        }
        if l != order {
            continue;
        }
        chosen.shuffle(rng);
        let block = IntMatrix::block_diagonal(&chosen);
        let w = random_unimodular(rng, rank);
        let winv = w.inverse_unimodular().unwrap();
        let g0 = &(&w * &block) * &winv;
        let lattice = make_glattice(g0).unwrap();
        assert_eq!(lattice.order(), order);
        return lattice;
    }
}

/// The random suite: `count` lattices cycling through orders 2, 3, 4, 6.
pub fn lattice_suite<R: Rng>(rng: &mut R, count: usize) -> Vec<GLattice> {
    let orders = [2, 3, 4, 6];
    (0..count)
        .map(|i| random_cyclic_lattice(rng, orders[i % 4], 5))
        .collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, max_dim: usize, bound: i64) -> IntMatrix {
    let rows = rng.gen_range(1..=max_dim);
    let cols = rng.gen_range(1..=max_dim);
    let data: Vec<Vec<BigInt>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
                .collect()
        })
        .collect();
    IntMatrix::from_rows(data).unwrap()
}
