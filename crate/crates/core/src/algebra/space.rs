use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Pairing, C64, ZERO};

/// The ambient algebra `M = ⊕ M_{nᵢ}` embedded block-diagonally in `M_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockSpace {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl TryFrom<Vec<usize>> for BlockSpace {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        BlockSpace::new(dims)
    }
}

impl From<BlockSpace> for Vec<usize> {
    fn from(s: BlockSpace) -> Self {
        s.block_dims
    }
}

impl BlockSpace {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::validation("block space needs at least one block"));
        }
        if let Some(i) = block_dims.iter().position(|&d| d == 0) {
            return Err(Error::validation(format!("block {i} has dimension 0")));
        }
        let mut offsets = Vec::with_capacity(block_dims.len() + 1);
        let mut acc = 0;
        for &d in &block_dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        Ok(Self {
            block_dims,
            offsets,
        })
    }

    /// A single full matrix block `M_n`.
    pub fn full(n: usize) -> Self {
        Self::new(vec![n]).expect("n must be positive")
    }

    /// `ℓ^∞_n`: `n` one-dimensional blocks.
    pub fn commutative(atoms: usize) -> Self {
        Self::new(vec![1; atoms]).expect("atom count must be positive")
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// `N = Σ nᵢ`.
    pub fn total_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Dimension of `M` as a vector space, `Σ nᵢ²`.
    pub fn algebra_dim(&self) -> usize {
        self.block_dims.iter().map(|d| d * d).sum()
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn block_of(&self, index: usize) -> usize {
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&d| d == 1)
    }

    pub fn identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.total_dim())
    }

    pub fn check_shape(&self, x: &ComplexMatrix) -> Result<()> {
        let n = self.total_dim();
        Error::check_shape((n, n), x.shape())
    }

    /// Frobenius norm of the part of `x` outside the diagonal blocks.
    pub fn support_residual(&self, x: &ComplexMatrix) -> f64 {
        let n = self.total_dim();
        let mut acc = 0.0;
        for i in 0..n {
            let bi = self.block_of(i);
            for j in 0..n {
                if self.block_of(j) != bi {
                    acc += x[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Rejects matrices of the wrong size or with mass outside the blocks.
    pub fn check_element(&self, x: &ComplexMatrix, residual_tol: f64) -> Result<()> {
        self.check_shape(x)?;
        let r = self.support_residual(x);
        if r > residual_tol * x.frobenius_norm().max(1.0) {
            return Err(Error::validation(format!(
                "element is not supported on blocks {:?} (off-block residual {r:.3e})",
                self.block_dims
            )));
        }
        Ok(())
    }

    /// Zeroes everything outside the diagonal blocks.
    pub fn pinch(&self, x: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(x.rows(), x.cols(), |i, j| {
            if self.block_of(i) == self.block_of(j) {
                x[(i, j)]
            } else {
                ZERO
            }
        })
    }

    pub fn block(&self, x: &ComplexMatrix, b: usize) -> ComplexMatrix {
        let o = self.offsets[b];
        let d = self.block_dims[b];
        x.submatrix(o, o, d, d)
    }

    /// Places the given blocks on the diagonal of an `N×N` matrix.
    pub fn embed_direct_sum(&self, blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if blocks.len() != self.num_blocks() {
            return Err(Error::validation(format!(
                "expected {} blocks, got {}",
                self.num_blocks(),
                blocks.len()
            )));
        }
        let n = self.total_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (b, blk) in blocks.iter().enumerate() {
            let d = self.block_dims[b];
            Error::check_shape((d, d), blk.shape())?;
            out.set_submatrix(self.offsets[b], self.offsets[b], blk);
        }
        Ok(out)
    }

    /// The matrix units `E_ij` with `i, j` in a common block; a basis of `M`.
    pub fn matrix_units(&self) -> Vec<ComplexMatrix> {
        let n = self.total_dim();
        let mut out = Vec::with_capacity(self.algebra_dim());
        for (b, &d) in self.block_dims.iter().enumerate() {
            let o = self.offsets[b];
            for i in 0..d {
                for j in 0..d {
                    out.push(ComplexMatrix::unit(n, o + i, o + j));
                }
            }
        }
        out
    }
}

/// Per-block masses defining the faithful trace `tr_w(x) = Σᵢ wᵢ tr(xᵢ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceWeights {
    per_block: Vec<f64>,
    per_index: Vec<f64>,
}

impl TraceWeights {
    pub fn new(space: &BlockSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.num_blocks() {
            return Err(Error::validation(format!(
                "expected {} weights, got {}",
                space.num_blocks(),
                weights.len()
            )));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w > 0.0 && w.is_finite()))
        {
            return Err(Error::validation(format!(
                "weight {i} must be positive and finite, got {w}"
            )));
        }
        let per_index = space
            .block_dims()
            .iter()
            .zip(&weights)
            .flat_map(|(&d, &w)| std::iter::repeat_n(w, d))
            .collect();
        Ok(Self {
            per_block: weights,
            per_index,
        })
    }

    pub fn uniform(space: &BlockSpace) -> Self {
        Self::new(space, vec![1.0; space.num_blocks()]).expect("unit weights are valid")
    }

    pub fn per_block(&self) -> &[f64] {
        &self.per_block
    }

    pub fn per_index(&self) -> &[f64] {
        &self.per_index
    }

    pub fn is_uniform_unit(&self) -> bool {
        self.per_block.iter().all(|&w| w == 1.0)
    }

    /// `tr_w(x)`.
    pub fn trace(&self, x: &ComplexMatrix) -> C64 {
        self.per_index
            .iter()
            .enumerate()
            .map(|(k, &w)| x[(k, k)] * w)
            .sum()
    }

    /// `tr_w(x y)`.
    pub fn trace_product(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
        let n = self.per_index.len();
        let mut acc = ZERO;
        for k in 0..n {
            let mut d = ZERO;
            for l in 0..x.cols() {
                d += x[(k, l)] * y[(l, k)];
            }
            acc += d * self.per_index[k];
        }
        acc
    }

    /// The diagonal density `W` with `tr_w(x) = tr(W x)`.
    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.per_index)
    }

    /// `W^{-1}`.
    pub fn inverse_density(&self) -> ComplexMatrix {
        let inv: Vec<f64> = self.per_index.iter().map(|w| 1.0 / w).collect();
        ComplexMatrix::from_real_diag(&inv)
    }
}

impl Pairing for TraceWeights {
    /// `tr_w(y* x) = Σ_k w_k Σ_l conj(y_lk) x_lk`.
    fn inner(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
        assert_eq!(x.shape(), y.shape(), "pairing shape mismatch");
        let cols = x.cols();
        let mut acc = ZERO;
        for (xr, yr) in x.data().chunks_exact(cols).zip(y.data().chunks_exact(cols)) {
            for ((a, b), &w) in xr.iter().zip(yr).zip(&self.per_index) {
                acc += b.conj() * a * w;
            }
        }
        acc
    }
}

/// Weighted Hilbert-Schmidt pairing `tr_w(y* x)`.
pub fn hs_inner(x: &ComplexMatrix, y: &ComplexMatrix, w: &TraceWeights) -> Result<C64> {
    let n = w.per_index().len();
    Error::check_shape((n, n), x.shape())?;
    Error::check_shape((n, n), y.shape())?;
    Ok(w.inner(x, y))
}

/// Block-diagonal embedding of per-block matrices.
pub fn embed_direct_sum(space: &BlockSpace, blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    space.embed_direct_sum(blocks)
}
