//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use hrkit::algebra::{BlockSpace, DCharacter, ScalarCharacter, Subalgebra, TraceWeights};
use hrkit::numerics::{ComplexMatrix, Tolerances, C64};
use hrkit::random::{random_unitary, seeded_rng, Rng};
use rand::Rng as _;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

/// Random composition of `n` into parts from `sizes`.
pub fn random_partition(n: usize, sizes: &[usize], rng: &mut Rng) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let choices: Vec<usize> = sizes.iter().copied().filter(|&s| s <= left).collect();
        let s = choices[rng.random_range(0..choices.len())];
        parts.push(s);
        left -= s;
    }
    parts
}

fn offsets(parts: &[usize]) -> Vec<usize> {
    parts
        .iter()
        .scan(0, |acc, &p| {
            let o = *acc;
            *acc += p;
            Some(o)
        })
        .collect()
}

fn conj(u: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    u.matmul(x).matmul(&u.adjoint())
}

/// Matrix units `E_ij` with `block(i) <= block(j)`.
pub fn block_upper_units(parts: &[usize]) -> Vec<ComplexMatrix> {
    let n: usize = parts.iter().sum();
    let block: Vec<usize> = parts
        .iter()
        .enumerate()
        .flat_map(|(b, &p)| std::iter::repeat_n(b, p))
        .collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if block[i] <= block[j] {
                out.push(ComplexMatrix::unit(n, i, j));
            }
        }
    }
    out
}

pub struct ScalarInstance {
    pub n: usize,
    pub a: Subalgebra,
    pub phi: ScalarCharacter,
}

/// Unitary conjugate of a block upper-triangular algebra in `M_N` and the
/// character reading off a `1 x 1` diagonal corner.
pub fn scalar_instance(seed: u64) -> ScalarInstance {
    let tol = tol();
    let mut rng = seeded_rng(seed);
    let n = rng.random_range(2..=8);
    let mut parts = random_partition(n, &[1, 2, 3], &mut rng);
    if !parts.contains(&1) {
        // force a 1x1 corner
        let last = parts.pop().unwrap();
        parts.push(last - 1);
        parts.push(1);
    }
    let ones: Vec<usize> = (0..parts.len()).filter(|&b| parts[b] == 1).collect();
    let corner_block = ones[rng.random_range(0..ones.len())];
    let p = offsets(&parts)[corner_block];
    let u = random_unitary(n, &mut rng);
    let elems: Vec<ComplexMatrix> = block_upper_units(&parts)
        .iter()
        .map(|x| conj(&u, x))
        .collect();
    let a = Subalgebra::with_unit_weights(BlockSpace::full(n), &elems, true, false, &tol).unwrap();
    let ua = u.adjoint();
    let phi = ScalarCharacter::from_fn(a.clone(), move |x| ua.matmul(x).matmul(&u)[(p, p)]);
    ScalarInstance { n, a, phi }
}

pub struct DInstance {
    pub n: usize,
    pub parts: Vec<usize>,
    pub a: Subalgebra,
    pub d: Subalgebra,
    pub phi: DCharacter,
}

/// `D = U(⊕ M_{s_i})U*` with `s_i ∈ {1,2,3}`, `A = D + span` of a random
/// transitively closed set of strictly upper block corners, `Φ` the block
/// diagonal truncation.
pub fn dchar_instance(seed: u64, max_n: usize) -> DInstance {
    let tol = tol();
    let mut rng = seeded_rng(seed);
    let n = rng.random_range(2..=max_n);
    let parts = random_partition(n, &[1, 2, 3], &mut rng);
    let k = parts.len();
    let off = offsets(&parts);
    let mut upper = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            upper[i][j] = rng.random_bool(0.6);
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                if upper[i][m] && upper[m][j] {
                    upper[i][j] = true;
                }
            }
        }
    }
    let u = random_unitary(n, &mut rng);
    let mut d_elems = Vec::new();
    let mut a_elems = Vec::new();
    for bi in 0..k {
        for bj in 0..k {
            if bi != bj && !upper[bi][bj] {
                continue;
            }
            for r in 0..parts[bi] {
                for c in 0..parts[bj] {
                    let x = conj(&u, &ComplexMatrix::unit(n, off[bi] + r, off[bj] + c));
                    if bi == bj {
                        d_elems.push(x.clone());
                    }
                    a_elems.push(x);
                }
            }
        }
    }
    let space = BlockSpace::full(n);
    let d = Subalgebra::with_unit_weights(space.clone(), &d_elems, true, true, &tol).unwrap();
    let a = Subalgebra::with_unit_weights(space, &a_elems, true, false, &tol).unwrap();
    let projections: Vec<ComplexMatrix> = (0..k)
        .map(|b| {
            let diag: Vec<C64> = (0..n)
                .map(|i| {
                    if i >= off[b] && i < off[b] + parts[b] {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            conj(&u, &ComplexMatrix::from_diag(&diag))
        })
        .collect();
    let phi = DCharacter::from_fn(a.clone(), d.clone(), |x| {
        let mut out = ComplexMatrix::zeros(n, n);
        for p in &projections {
            out = &out + &p.matmul(x).matmul(p);
        }
        out
    })
    .unwrap();
    DInstance {
        n,
        parts,
        a,
        d,
        phi,
    }
}

pub struct DirectSum {
    pub n: usize,
    pub sizes: Vec<usize>,
    pub d: Subalgebra,
}

/// `U(⊕ M_{s_i} ⊗ 1_{m_i})U*` inside `M_N`, `N <= max_n`.
pub fn direct_sum_instance(seed: u64, max_n: usize) -> DirectSum {
    let tol = tol();
    let mut rng = seeded_rng(seed);
    let mut factors: Vec<(usize, usize)> = Vec::new();
    let mut used = 0;
    loop {
        let s = rng.random_range(1..=3);
        let m = rng.random_range(1..=2);
        if used + s * m > max_n {
            break;
        }
        factors.push((s, m));
        used += s * m;
        if rng.random_bool(0.3) {
            break;
        }
    }
    if factors.is_empty() {
        factors.push((1, 1));
        used = 1;
    }
    let n = used;
    let u = random_unitary(n, &mut rng);
    let mut elems = Vec::new();
    let mut o = 0;
    for &(s, m) in &factors {
        for a in 0..s {
            for b in 0..s {
                let mut x = ComplexMatrix::zeros(n, n);
                for r in 0..m {
                    x[(o + a * m + r, o + b * m + r)] = C64::new(1.0, 0.0);
                }
                elems.push(conj(&u, &x));
            }
        }
        o += s * m;
    }
    let d = Subalgebra::with_unit_weights(BlockSpace::full(n), &elems, true, true, &tol).unwrap();
    let mut sizes: Vec<usize> = factors.iter().map(|f| f.0).collect();
    sizes.sort_unstable();
    DirectSum { n, sizes, d }
}

/// Uniform-weight helper for block spaces.
pub fn uniform(space: &BlockSpace) -> TraceWeights {
    TraceWeights::uniform(space)
}
