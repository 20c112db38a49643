//! Categorical evaluation: interprets a proof as an explicit linear map by
//! composing matrices rule by rule in the compact closed category of finite
//! dimensional vector spaces.
//!
//! Residuation introduces `η` (name) or `ε` (evaluation) factors, the binary
//! monotonicity rules wrap the premise maps between `η`/`ε` pairs, and the
//! structural postulates become permutation matrices (the associator is the
//! identity once spaces are flattened). This construction is deliberately
//! independent of the delta extraction; agreement of the two is what the
//! equivalence checks of the CLI and the test suite establish.

use crate::delta::DeltaError;
use crate::formula::{AtomMap, Formula, FormulaError, SpaceSignature};
use crate::proofs::{check_proof, Proof, ProofError, RuleName};
use crate::tensor::{DenseTensor, SparseMatrix, TensorError};
use crate::Scalar;

/// Bound on `dim(source) * dim(target)` per proof node, which also bounds
/// every intermediate matrix of the construction.
pub const DEFAULT_DIM_CAP: usize = 1_000_000;

/// A linear map between interpreted formulas, stored as a dense matrix of
/// shape `[dim(target), dim(source)]`.
#[derive(Debug, Clone)]
pub struct LinearMapMatrix<T> {
    source: SpaceSignature,
    target: SpaceSignature,
    matrix: DenseTensor<T>,
}

impl<T: Scalar> LinearMapMatrix<T> {
    pub fn new(
        source: SpaceSignature,
        target: SpaceSignature,
        matrix: DenseTensor<T>,
    ) -> Result<Self, TensorError> {
        let expected = vec![target.total_dim(), source.total_dim()];
        if matrix.shape() != expected.as_slice() {
            return Err(TensorError::ShapeMismatch {
                expected,
                found: matrix.shape().to_vec(),
            });
        }
        Ok(LinearMapMatrix { source, target, matrix })
    }

    pub fn source(&self) -> &SpaceSignature {
        &self.source
    }

    pub fn target(&self) -> &SpaceSignature {
        &self.target
    }

    pub fn matrix(&self) -> &DenseTensor<T> {
        &self.matrix
    }

    /// Applies the map to a flattened input vector.
    pub fn apply(&self, input: &DenseTensor<T>) -> Result<DenseTensor<T>, TensorError> {
        self.matrix.mat_apply(&input.flatten())
    }
}

/// Evaluates a proof to its matrix with the default dimension guard.
pub fn categorical_eval<T: Scalar>(
    proof: &Proof,
    atoms: &AtomMap,
) -> Result<LinearMapMatrix<T>, TensorError> {
    categorical_eval_with_cap(proof, atoms, DEFAULT_DIM_CAP)
}

pub fn categorical_eval_with_cap<T: Scalar>(
    proof: &Proof,
    atoms: &AtomMap,
    dim_cap: usize,
) -> Result<LinearMapMatrix<T>, TensorError> {
    check_proof(proof).map_err(box_proof_err)?;
    let matrix = eval(proof, atoms, dim_cap)?;
    let source = interpret(&proof.conclusion().source, atoms)?;
    let target = interpret(&proof.conclusion().target, atoms)?;
    let dense = DenseTensor::from_vec(vec![matrix.rows(), matrix.cols()], matrix.to_dense())?;
    LinearMapMatrix::new(source, target, dense)
}

fn box_proof_err(e: ProofError) -> TensorError {
    TensorError::Delta(DeltaError::Proof(e))
}

fn interpret(formula: &Formula, atoms: &AtomMap) -> Result<SpaceSignature, TensorError> {
    formula.interpret(atoms).map_err(|e: FormulaError| TensorError::Delta(DeltaError::Formula(e)))
}

fn dim_of(formula: &Formula, atoms: &AtomMap) -> Result<usize, TensorError> {
    Ok(interpret(formula, atoms)?.total_dim())
}

fn eval<T: Scalar>(
    proof: &Proof,
    atoms: &AtomMap,
    dim_cap: usize,
) -> Result<SparseMatrix<T>, TensorError> {
    use Formula::{Dia, Over, Tensor, Under};
    let conclusion = proof.conclusion();
    let src_dim = dim_of(&conclusion.source, atoms)?;
    let tgt_dim = dim_of(&conclusion.target, atoms)?;
    let required = src_dim as u128 * tgt_dim as u128;
    if required > dim_cap as u128 {
        return Err(TensorError::DimensionCap { required, cap: dim_cap });
    }
    let premise = |k: usize| eval::<T>(&proof.premises()[k], atoms, dim_cap);
    let id = SparseMatrix::<T>::identity;

    match proof.rule() {
        RuleName::Axiom => Ok(id(src_dim)),
        RuleName::ResUnder => {
            // B --> A\C from f: A*B --> C:  (1_A ⊗ f) · (η_A ⊗ 1_B).
            let f = premise(0)?;
            let a = match &conclusion.target {
                Under(a, _) => dim_of(a, atoms)?,
                _ => unreachable!("checked proof"),
            };
            Ok(id(a).kron(&f).matmul(&SparseMatrix::eta(a).kron(&id(src_dim))))
        }
        RuleName::ResOver => {
            // A --> C/B from f: A*B --> C:  (f ⊗ 1_B) · (1_A ⊗ η_B).
            let f = premise(0)?;
            let b = match &conclusion.target {
                Over(_, b) => dim_of(b, atoms)?,
                _ => unreachable!("checked proof"),
            };
            Ok(f.kron(&id(b)).matmul(&id(src_dim).kron(&SparseMatrix::eta(b))))
        }
        RuleName::ResUnderInv => {
            // A*B --> C from h: B --> A\C:  (ε_A ⊗ 1_C) · (1_A ⊗ h).
            let h = premise(0)?;
            let a = match &conclusion.source {
                Tensor(a, _) => dim_of(a, atoms)?,
                _ => unreachable!("checked proof"),
            };
            Ok(SparseMatrix::epsilon(a).kron(&id(tgt_dim)).matmul(&id(a).kron(&h)))
        }
        RuleName::ResOverInv => {
            // A*B --> C from g: A --> C/B:  (1_C ⊗ ε_B) · (g ⊗ 1_B).
            let g = premise(0)?;
            let b = match &conclusion.source {
                Tensor(_, b) => dim_of(b, atoms)?,
                _ => unreachable!("checked proof"),
            };
            Ok(id(tgt_dim).kron(&SparseMatrix::epsilon(b)).matmul(&g.kron(&id(b))))
        }
        // The modalities are dimension-transparent; their rules keep the map.
        RuleName::ResDia | RuleName::ResDiaInv | RuleName::MonDia | RuleName::MonBox => premise(0),
        RuleName::MonTensor => {
            let f = premise(0)?;
            let g = premise(1)?;
            Ok(f.kron(&g))
        }
        RuleName::MonOver => {
            // A/D --> B/C from f: A --> B, g: C --> D:
            // (1_{B⊗C} ⊗ ε_D) · (1_{B⊗C} ⊗ g ⊗ 1_D) · (1_B ⊗ η_C ⊗ 1_D) · (f ⊗ 1_D).
            let f = premise(0)?;
            let g = premise(1)?;
            let (b, c) = match &conclusion.target {
                Over(b, c) => (dim_of(b, atoms)?, dim_of(c, atoms)?),
                _ => unreachable!("checked proof"),
            };
            let d = match &conclusion.source {
                Over(_, d) => dim_of(d, atoms)?,
                _ => unreachable!("checked proof"),
            };
            let m1 = f.kron(&id(d));
            let m2 = id(b).kron(&SparseMatrix::eta(c)).kron(&id(d));
            let m3 = id(b * c).kron(&g).kron(&id(d));
            let m4 = id(b * c).kron(&SparseMatrix::epsilon(d));
            Ok(m4.matmul(&m3.matmul(&m2.matmul(&m1))))
        }
        RuleName::MonUnder => {
            // B\C --> A\D from f: A --> B, g: C --> D:
            // (1_A ⊗ g) · (1_A ⊗ ε_B ⊗ 1_C) · (1_A ⊗ f ⊗ 1_{B⊗C}) · (η_A ⊗ 1_{B⊗C}).
            let f = premise(0)?;
            let g = premise(1)?;
            let a = match &conclusion.target {
                Under(a, _) => dim_of(a, atoms)?,
                _ => unreachable!("checked proof"),
            };
            let (b, c) = match &conclusion.source {
                Under(b, c) => (dim_of(b, atoms)?, dim_of(c, atoms)?),
                _ => unreachable!("checked proof"),
            };
            let m1 = SparseMatrix::eta(a).kron(&id(b * c));
            let m2 = id(a).kron(&f).kron(&id(b * c));
            let m3 = id(a).kron(&SparseMatrix::epsilon(b)).kron(&id(c));
            let m4 = id(a).kron(&g);
            Ok(m4.matmul(&m3.matmul(&m2.matmul(&m1))))
        }
        RuleName::AlphaLeft | RuleName::AlphaRight => {
            // The associator is the identity matrix on the flattened space.
            let f = premise(0)?;
            Ok(f.matmul(&id(src_dim)))
        }
        RuleName::SigmaLeft => {
            // <>A*(B*C) --> D from B*(<>A*C) --> D: f · α⁻¹ · (σ_{A,B} ⊗ 1_C) · α.
            let f = premise(0)?;
            let (a, b, c) = match &conclusion.source {
                Tensor(da, bc) => match (&**da, &**bc) {
                    (Dia(_), Tensor(b, c)) => {
                        (dim_of(da, atoms)?, dim_of(b, atoms)?, dim_of(c, atoms)?)
                    }
                    _ => unreachable!("checked proof"),
                },
                _ => unreachable!("checked proof"),
            };
            let assoc = id(a * b * c);
            let swap = SparseMatrix::block_swap(a, b).kron(&id(c));
            Ok(f.matmul(&assoc).matmul(&swap).matmul(&assoc))
        }
        RuleName::SigmaRight => {
            // (A*B)*<>C --> D from (A*<>C)*B --> D: f · α · (1_A ⊗ σ_{B,C}) · α⁻¹.
            let f = premise(0)?;
            let (a, b, c) = match &conclusion.source {
                Tensor(ab, dc) => match (&**ab, &**dc) {
                    (Tensor(a, b), Dia(_)) => {
                        (dim_of(a, atoms)?, dim_of(b, atoms)?, dim_of(dc, atoms)?)
                    }
                    _ => unreachable!("checked proof"),
                },
                _ => unreachable!("checked proof"),
            };
            let assoc = id(a * b * c);
            let swap = id(a).kron(&SparseMatrix::block_swap(b, c));
            Ok(f.matmul(&assoc).matmul(&swap).matmul(&assoc))
        }
    }
}
