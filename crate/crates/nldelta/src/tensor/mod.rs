//! Dense tensors and the numeric side of the semantics: contraction of
//! deltas against lexical tensors, Frobenius operations, and the categorical
//! evaluation of proofs.

mod categorical;
mod sparse;

pub use categorical::{
    categorical_eval, categorical_eval_with_cap, LinearMapMatrix, DEFAULT_DIM_CAP,
};
pub(crate) use sparse::SparseMatrix;

use thiserror::Error;

use crate::delta::{Delta, DeltaError, SlotRef};
use crate::formula::SpaceSignature;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape {found:?} does not match expected {expected:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("{found} data values for shape {shape:?} ({expected} expected)")]
    LengthMismatch { shape: Vec<usize>, expected: usize, found: usize },
    #[error("index {index:?} out of bounds for shape {shape:?}")]
    IndexOutOfBounds { index: Vec<usize>, shape: Vec<usize> },
    #[error("tensor entries must be finite")]
    NonFinite,
    #[error("dimension product {required} exceeds the cap {cap}")]
    DimensionCap { required: u128, cap: usize },
    #[error(transparent)]
    Delta(#[from] DeltaError),
}

/// Dense row-major tensor. Rank 0 is a scalar with one entry. All entries
/// are finite; constructors reject NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        DenseTensor { shape, data: vec![T::zero(); len] }
    }

    pub fn from_vec(shape: Vec<usize>, data: Vec<T>) -> Result<Self, TensorError> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(TensorError::LengthMismatch { shape, expected, found: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn scalar(value: T) -> Result<Self, TensorError> {
        Self::from_vec(Vec::new(), vec![value])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    fn flat_index(&self, index: &[usize]) -> Result<usize, TensorError> {
        if index.len() != self.shape.len()
            || index.iter().zip(&self.shape).any(|(&i, &d)| i >= d)
        {
            return Err(TensorError::IndexOutOfBounds {
                index: index.to_vec(),
                shape: self.shape.clone(),
            });
        }
        Ok(index.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| acc * d + i))
    }

    pub fn get(&self, index: &[usize]) -> Result<T, TensorError> {
        Ok(self.data[self.flat_index(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: T) -> Result<(), TensorError> {
        if !value.is_finite() {
            return Err(TensorError::NonFinite);
        }
        let flat = self.flat_index(index)?;
        self.data[flat] = value;
        Ok(())
    }

    /// The single entry of a rank-0 tensor.
    pub fn scalar_value(&self) -> Option<T> {
        if self.shape.is_empty() {
            Some(self.data[0])
        } else {
            None
        }
    }

    /// Same data viewed as a vector of length `len()`.
    pub fn flatten(&self) -> Self {
        DenseTensor { shape: vec![self.data.len()], data: self.data.clone() }
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self, TensorError> {
        Self::from_vec(shape, self.data.clone())
    }

    pub fn ew_mul(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).collect();
        Ok(DenseTensor { shape: self.shape.clone(), data })
    }

    pub fn sum_axis(&self, axis: usize) -> Result<Self, TensorError> {
        if axis >= self.shape.len() {
            return Err(TensorError::IndexOutOfBounds {
                index: vec![axis],
                shape: self.shape.clone(),
            });
        }
        let d = self.shape[axis];
        let inner: usize = self.shape[axis + 1..].iter().product();
        let outer: usize = self.shape[..axis].iter().product();
        let mut shape = self.shape.clone();
        shape.remove(axis);
        let mut out = DenseTensor::zeros(shape);
        for o in 0..outer {
            for j in 0..d {
                for i in 0..inner {
                    out.data[o * inner + i] += self.data[(o * d + j) * inner + i];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product; `self` must be rank 2 of shape `[r, c]`, `v` a
    /// vector of length `c`.
    pub fn mat_apply(&self, v: &Self) -> Result<Self, TensorError> {
        let (r, c) = self.matrix_dims()?;
        if v.shape != [c] {
            return Err(TensorError::ShapeMismatch { expected: vec![c], found: v.shape.clone() });
        }
        let mut out = DenseTensor::zeros(vec![r]);
        for i in 0..r {
            for j in 0..c {
                out.data[i] += self.data[i * c + j] * v.data[j];
            }
        }
        Ok(out)
    }

    /// Transposed matrix-vector product `Mᵀ v`; `v` has length `r`.
    pub fn mat_apply_t(&self, v: &Self) -> Result<Self, TensorError> {
        let (r, c) = self.matrix_dims()?;
        if v.shape != [r] {
            return Err(TensorError::ShapeMismatch { expected: vec![r], found: v.shape.clone() });
        }
        let mut out = DenseTensor::zeros(vec![c]);
        for i in 0..r {
            for j in 0..c {
                out.data[j] += self.data[i * c + j] * v.data[i];
            }
        }
        Ok(out)
    }

    fn matrix_dims(&self) -> Result<(usize, usize), TensorError> {
        match self.shape.as_slice() {
            [r, c] => Ok((*r, *c)),
            _ => Err(TensorError::ShapeMismatch {
                expected: vec![0, 0],
                found: self.shape.clone(),
            }),
        }
    }

    /// Tensor (outer) product; shapes concatenate.
    pub fn outer(&self, other: &Self) -> Self {
        let mut shape = self.shape.clone();
        shape.extend_from_slice(&other.shape);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for &a in &self.data {
            for &b in &other.data {
                data.push(a * b);
            }
        }
        DenseTensor { shape, data }
    }

    /// Full contraction `Σ a_i b_i` over identically shaped tensors.
    pub fn dot(&self, other: &Self) -> Result<T, TensorError> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    }

    pub fn scale(&self, k: T) -> Self {
        DenseTensor { shape: self.shape.clone(), data: self.data.iter().map(|&v| v * k).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T, TensorError> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), TensorError> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.shape.clone(),
            });
        }
        Ok(())
    }
}

/// The name map `η: R → V ⊗ V` as a tensor of shape `dims(V) ++ dims(V)`,
/// ones where the two halves of the index agree.
pub fn eta<T: Scalar>(space: &SpaceSignature) -> DenseTensor<T> {
    let dims = space.dims();
    let total = space.total_dim();
    let mut shape = dims.clone();
    shape.extend_from_slice(&dims);
    let mut out = DenseTensor::zeros(shape);
    for k in 0..total {
        out.data[k * total + k] = T::one();
    }
    out
}

/// The evaluation map `ε` applied to a pair of equally shaped tensors: their
/// full contraction.
pub fn epsilon_apply<T: Scalar>(u: &DenseTensor<T>, v: &DenseTensor<T>) -> Result<T, TensorError> {
    u.dot(v)
}

/// Cosine similarity of two equally shaped tensors; 0 when either is zero.
pub fn cosine<T: Scalar>(u: &DenseTensor<T>, v: &DenseTensor<T>) -> Result<T, TensorError> {
    let uu = u.dot(u)?.sqrt();
    let vv = v.dot(v)?.sqrt();
    if uu == T::zero() || vv == T::zero() {
        return Ok(T::zero());
    }
    Ok(u.dot(v)? / (uu * vv))
}

/// Frobenius algebra operations over a fixed basis.
pub mod frobenius {
    use super::{DenseTensor, TensorError};
    use crate::Scalar;

    /// `Δ: V → V⊗V`, a vector onto the diagonal of a matrix.
    pub fn delta<T: Scalar>(v: &DenseTensor<T>) -> Result<DenseTensor<T>, TensorError> {
        let n = vector_len(v)?;
        let mut out = DenseTensor::zeros(vec![n, n]);
        for k in 0..n {
            out.data[k * n + k] = v.data[k];
        }
        Ok(out)
    }

    /// `μ: V⊗V → V`, the diagonal of a square matrix.
    pub fn mu<T: Scalar>(m: &DenseTensor<T>) -> Result<DenseTensor<T>, TensorError> {
        match m.shape() {
            [r, c] if r == c => {
                let n = *r;
                let data = (0..n).map(|k| m.data[k * n + k]).collect();
                DenseTensor::from_vec(vec![n], data)
            }
            other => Err(TensorError::ShapeMismatch {
                expected: vec![0, 0],
                found: other.to_vec(),
            }),
        }
    }

    /// `ι: V → R`, the sum of coefficients.
    pub fn iota<T: Scalar>(v: &DenseTensor<T>) -> Result<T, TensorError> {
        vector_len(v)?;
        Ok(v.data.iter().fold(T::zero(), |acc, &x| acc + x))
    }

    /// `ζ: R → V`, the constant vector with every entry `lambda`.
    pub fn zeta<T: Scalar>(dim: usize, lambda: T) -> Result<DenseTensor<T>, TensorError> {
        DenseTensor::from_vec(vec![dim], vec![lambda; dim])
    }

    fn vector_len<T: Scalar>(v: &DenseTensor<T>) -> Result<usize, TensorError> {
        match v.shape() {
            [n] => Ok(*n),
            other => Err(TensorError::ShapeMismatch {
                expected: vec![0],
                found: other.to_vec(),
            }),
        }
    }
}

/// The relative-pronoun tensor `(1_N ⊗ μ_N ⊗ 1_N ⊗ ζ_S) ∘ (η_N ⊗ η_N)`,
/// built by literal matrix composition and reshaped to `[n, n, n, s]`.
/// Entrywise it is `λ` where the three noun indices agree and 0 elsewhere.
pub fn relpron_tensor<T: Scalar>(
    n_dim: usize,
    s_dim: usize,
    lambda: T,
) -> Result<DenseTensor<T>, TensorError> {
    let eta_n = SparseMatrix::<T>::eta(n_dim);
    let pair_of_etas = eta_n.kron(&eta_n);
    let id_n = SparseMatrix::<T>::identity(n_dim);
    let outer = id_n
        .kron(&SparseMatrix::mu(n_dim))
        .kron(&id_n)
        .kron(&SparseMatrix::column(s_dim, lambda));
    let composed = outer.matmul(&pair_of_etas);
    DenseTensor::from_vec(vec![n_dim, n_dim, n_dim, s_dim], composed.to_dense())
}

// ---------------------------------------------------------------------------
// Delta contraction
// ---------------------------------------------------------------------------

struct InputLayout {
    /// For each domain slot: which input covers it and the input-local axis.
    owner: Vec<(usize, usize)>,
}

fn input_layout<T: Scalar>(
    delta: &Delta,
    inputs: &[&DenseTensor<T>],
) -> Result<InputLayout, TensorError> {
    let dom_dims: Vec<usize> = delta.domain().iter().map(|s| s.space.dim).collect();
    let flat: Vec<usize> = inputs.iter().flat_map(|t| t.shape().iter().copied()).collect();
    if flat != dom_dims {
        return Err(TensorError::ShapeMismatch { expected: dom_dims, found: flat });
    }
    let mut owner = Vec::with_capacity(dom_dims.len());
    for (k, input) in inputs.iter().enumerate() {
        for axis in 0..input.rank() {
            owner.push((k, axis));
        }
    }
    Ok(InputLayout { owner })
}

/// Evaluates a delta against input tensors whose concatenated axes match the
/// domain slots. Codomain-linked slots copy indices, domain-domain pairs are
/// summed over, and every self-loop multiplies the result by its dimension.
pub fn contract<T: Scalar>(
    delta: &Delta,
    inputs: &[&DenseTensor<T>],
) -> Result<DenseTensor<T>, TensorError> {
    let layout = input_layout(delta, inputs)?;
    let cod_dims: Vec<usize> = delta.codomain().iter().map(|s| s.space.dim).collect();

    // Classify pairs by where their endpoints live.
    let position = slot_positions(delta);
    let mut scale = T::one();
    let mut dom_dom: Vec<(usize, usize, usize)> = Vec::new();
    let mut dom_cod: Vec<(usize, usize)> = Vec::new();
    let mut cod_cod: Vec<(usize, usize)> = Vec::new();
    for pair in delta.pairs() {
        if pair.a == pair.b {
            scale *= T::from_usize(pair.space.dim).expect("dimension fits scalar");
            continue;
        }
        match (position[&pair.a], position[&pair.b]) {
            (SlotRef::Dom(i), SlotRef::Dom(j)) => dom_dom.push((i, j, pair.space.dim)),
            (SlotRef::Dom(i), SlotRef::Cod(j)) | (SlotRef::Cod(j), SlotRef::Dom(i)) => {
                dom_cod.push((i, j))
            }
            (SlotRef::Cod(i), SlotRef::Cod(j)) => cod_cod.push((i, j)),
        }
    }

    let mut out = DenseTensor::zeros(cod_dims.clone());
    let mut cod_idx = vec![0usize; cod_dims.len()];
    let mut dom_idx = vec![0usize; delta.domain().len()];
    loop {
        if cod_cod.iter().all(|&(i, j)| cod_idx[i] == cod_idx[j]) {
            for &(d, c) in &dom_cod {
                dom_idx[d] = cod_idx[c];
            }
            let sum = sum_over(&dom_dom, 0, &mut dom_idx, inputs, &layout);
            let flat = cod_idx.iter().zip(&cod_dims).fold(0, |acc, (&i, &d)| acc * d + i);
            out.data[flat] = scale * sum;
        }
        if !advance(&mut cod_idx, &cod_dims) {
            break;
        }
    }
    Ok(out)
}

fn sum_over<T: Scalar>(
    dom_dom: &[(usize, usize, usize)],
    k: usize,
    dom_idx: &mut Vec<usize>,
    inputs: &[&DenseTensor<T>],
    layout: &InputLayout,
) -> T {
    if k == dom_dom.len() {
        let mut product = T::one();
        let mut local: Vec<Vec<usize>> = inputs.iter().map(|t| vec![0; t.rank()]) .collect();
        for (slot, &(input, axis)) in layout.owner.iter().enumerate() {
            local[input][axis] = dom_idx[slot];
        }
        for (input, idx) in inputs.iter().zip(&local) {
            product *= input.get(idx).expect("validated layout");
        }
        return product;
    }
    let (i, j, dim) = dom_dom[k];
    let mut total = T::zero();
    for v in 0..dim {
        dom_idx[i] = v;
        dom_idx[j] = v;
        total += sum_over(dom_dom, k + 1, dom_idx, inputs, layout);
    }
    total
}

fn slot_positions(delta: &Delta) -> std::collections::HashMap<crate::delta::IndexVar, SlotRef> {
    delta
        .domain()
        .iter()
        .enumerate()
        .map(|(k, s)| (s.index, SlotRef::Dom(k)))
        .chain(
            delta
                .codomain()
                .iter()
                .enumerate()
                .map(|(k, s)| (s.index, SlotRef::Cod(k))),
        )
        .collect()
}

fn advance(idx: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// The delta as an explicit matrix `[dim(codomain), dim(domain)]`, built by
/// enumerating one index value per pair.
pub fn delta_matrix<T: Scalar>(delta: &Delta) -> DenseTensor<T> {
    let dom_dims: Vec<usize> = delta.domain().iter().map(|s| s.space.dim).collect();
    let cod_dims: Vec<usize> = delta.codomain().iter().map(|s| s.space.dim).collect();
    let dom_total: usize = dom_dims.iter().product();
    let cod_total: usize = cod_dims.iter().product();
    let position = slot_positions(delta);

    let mut scale = T::one();
    let mut links: Vec<(SlotRef, SlotRef, usize)> = Vec::new();
    for pair in delta.pairs() {
        if pair.a == pair.b {
            scale *= T::from_usize(pair.space.dim).expect("dimension fits scalar");
        } else {
            links.push((position[&pair.a], position[&pair.b], pair.space.dim));
        }
    }

    let mut out = DenseTensor::zeros(vec![cod_total, dom_total]);
    let dims: Vec<usize> = links.iter().map(|&(_, _, d)| d).collect();
    let mut values = vec![0usize; links.len()];
    loop {
        let mut dom_idx = vec![0usize; dom_dims.len()];
        let mut cod_idx = vec![0usize; cod_dims.len()];
        for (&(x, y, _), &v) in links.iter().zip(&values) {
            for end in [x, y] {
                match end {
                    SlotRef::Dom(k) => dom_idx[k] = v,
                    SlotRef::Cod(k) => cod_idx[k] = v,
                }
            }
        }
        let dom_flat = dom_idx.iter().zip(&dom_dims).fold(0, |acc, (&i, &d)| acc * d + i);
        let cod_flat = cod_idx.iter().zip(&cod_dims).fold(0, |acc, (&i, &d)| acc * d + i);
        out.data[cod_flat * dom_total + dom_flat] = scale;
        if !advance(&mut values, &dims) {
            break;
        }
    }
    out
}
