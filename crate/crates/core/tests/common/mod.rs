//! Shared helpers for integration tests: random distributions and an
//! independent brute-force evaluation of the region quantities.
#![allow(dead_code)]

use std::collections::HashMap;

use diamond_core::{ConditionalKernel, DiamondDistribution, Dmc, JointPmf, RegionEval};
use rand::Rng;

/// A random probability vector; each entry is zeroed with probability
/// `sparsity`, keeping at least one positive entry.
pub fn random_pmf(rng: &mut impl Rng, len: usize, sparsity: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            if rng.gen_bool(sparsity) {
                0.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.gen_range(0..len)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Random distribution with the given alphabet sizes.
pub fn random_dist(
    rng: &mut impl Rng,
    cu: usize,
    cx: usize,
    cy: usize,
    cz: usize,
) -> DiamondDistribution {
    let p_ux = JointPmf::new(vec![cu, cx], random_pmf(rng, cu * cx, 0.1)).unwrap();
    let channel = Dmc::from_matrix((0..cx).map(|_| random_pmf(rng, cy, 0.1)).collect()).unwrap();
    let kernel =
        ConditionalKernel::new((0..cu * cy).map(|_| random_pmf(rng, cz, 0.1)).collect()).unwrap();
    DiamondDistribution::new(p_ux, channel, kernel).unwrap()
}

/// Binary X and Y, |U| and |Z| drawn from 1..=3.
pub fn random_binary_dist(rng: &mut impl Rng) -> DiamondDistribution {
    let cu = rng.gen_range(1..=3);
    let cz = rng.gen_range(1..=3);
    random_dist(rng, cu, 2, 2, cz)
}

/// Full joint as a list of ((u, z, x, y), p) cells, built from the factors
/// by direct multiplication.
pub fn brute_cells(d: &DiamondDistribution) -> Vec<([usize; 4], f64)> {
    let (cu, cx, cy, cz) = (d.card_u(), d.card_x(), d.card_y(), d.card_z());
    let mut cells = Vec::new();
    for u in 0..cu {
        for z in 0..cz {
            for x in 0..cx {
                for y in 0..cy {
                    let p = d.p_ux().prob(&[u, x])
                        * d.channel().prob(x, y)
                        * d.p_z_given_uy().prob(u * cy + y, z);
                    cells.push(([u, z, x, y], p));
                }
            }
        }
    }
    cells
}

const U: usize = 0;
const Z: usize = 1;
const X: usize = 2;
const Y: usize = 3;

fn marginal(cells: &[([usize; 4], f64)], keep: &[usize]) -> HashMap<Vec<usize>, f64> {
    let mut m = HashMap::new();
    for (k, p) in cells {
        let key: Vec<usize> = keep.iter().map(|&a| k[a]).collect();
        *m.entry(key).or_insert(0.0) += p;
    }
    m
}

fn key(k: &[usize; 4], axes: &[usize]) -> Vec<usize> {
    axes.iter().map(|&a| k[a]).collect()
}

/// I(A;B|C) = Σ p(a,b,c) ln[p(a,b,c) p(c) / (p(a,c) p(b,c))] by raw summation.
pub fn brute_mi(cells: &[([usize; 4], f64)], a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
    let ac: Vec<usize> = a.iter().chain(c).copied().collect();
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    let (m_abc, m_ac, m_bc, m_c) = (
        marginal(cells, &abc),
        marginal(cells, &ac),
        marginal(cells, &bc),
        marginal(cells, c),
    );
    let mut total = 0.0;
    for (k, &p) in &m_abc {
        if p > 0.0 {
            let full: [usize; 4] = {
                let mut f = [0; 4];
                for (&ax, &v) in abc.iter().zip(k) {
                    f[ax] = v;
                }
                f
            };
            total += p
                * (p * m_c[&key(&full, c)] / (m_ac[&key(&full, &ac)] * m_bc[&key(&full, &bc)]))
                    .ln();
        }
    }
    total
}

/// H(A|C) = -Σ p(a,c) ln[p(a,c) / p(c)] by raw summation.
pub fn brute_h(cells: &[([usize; 4], f64)], a: &[usize], c: &[usize]) -> f64 {
    let ac: Vec<usize> = a.iter().chain(c).copied().collect();
    let (m_ac, m_c) = (marginal(cells, &ac), marginal(cells, c));
    let mut total = 0.0;
    for (k, &p) in &m_ac {
        if p > 0.0 {
            let mut f = [0; 4];
            for (&ax, &v) in ac.iter().zip(k) {
                f[ax] = v;
            }
            total -= p * (p / m_c[&key(&f, c)]).ln();
        }
    }
    total
}

/// The seven region quantities computed from the raw joint.
pub fn brute_eval(d: &DiamondDistribution) -> RegionEval {
    let cells = brute_cells(d);
    let i_uy = brute_mi(&cells, &[U], &[Y], &[]);
    RegionEval {
        b1: i_uy + brute_h(&cells, &[X], &[U]),
        b2: brute_mi(&cells, &[Z], &[Y], &[U, X]),
        b3: brute_h(&cells, &[X], &[Z, U]),
        b4: brute_mi(&cells, &[Y], &[Z], &[X, U]),
        i_uy,
        i_yz_u: brute_mi(&cells, &[Y], &[Z], &[U]),
        i_xz_u: brute_mi(&cells, &[X], &[Z], &[U]),
    }
}

pub fn max_deviation(a: &RegionEval, b: &RegionEval) -> f64 {
    [
        a.b1 - b.b1,
        a.b2 - b.b2,
        a.b3 - b.b3,
        a.b4 - b.b4,
        a.i_uy - b.i_uy,
        a.i_yz_u - b.i_yz_u,
        a.i_xz_u - b.i_xz_u,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Random joint over 2n binary axes.
pub fn random_binary_joint(rng: &mut impl Rng, n: usize) -> JointPmf {
    JointPmf::new(vec![2; 2 * n], random_pmf(rng, 1 << (2 * n), 0.05)).unwrap()
}
