//! Derivations in the modal Lambek calculus NL◇ and their tensor semantics.
//!
//! The pipeline has three stages:
//!
//! 1. [`proofs::derive`] searches for derivations of a sequent `A --> B` in
//!    NL◇ (the non-associative Lambek calculus extended with the unary
//!    control modalities `<>` and `[]`), optionally using structural
//!    extraction postulates that let a `<>`-marked hypothesis travel through
//!    an antecedent tree.
//! 2. [`delta::delta_of_proof`] reads a derivation off as a generalized
//!    Kronecker delta: a perfect matching on the tensor indices of the
//!    endsequent, which is the derivation's meaning as a multilinear map.
//! 3. [`tensor::contract`] evaluates that delta against concrete lexical
//!    tensors, so distinct derivations of an ambiguous sentence yield its
//!    distinct meaning vectors.
//!
//! The [`lexicon`] module loads word-to-tensor assignments from a small text
//! format (explicit values, seeded pseudo-random fills, or Frobenius recipes
//! such as the copying tensor used for relative pronouns), and [`pipeline`]
//! wires everything into the operations behind the `nldelta` command-line
//! tool.

pub mod delta;
pub mod formula;
pub mod lexicon;
pub mod pipeline;
pub mod proofs;
pub mod tensor;

/// Scalar element type for tensor arithmetic.
///
/// Implemented for `f32` and `f64`; tensor code is generic so precision is a
/// caller choice. The lexicon and CLI pin `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::NumAssign
        + std::fmt::Debug
        + std::fmt::Display
        + 'static
{
}

/// Double-precision tensor, the default for lexicon and CLI work.
pub type Tensor64 = tensor::DenseTensor<f64>;
/// Single-precision tensor.
pub type Tensor32 = tensor::DenseTensor<f32>;
