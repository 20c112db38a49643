//! Generalized Kronecker deltas: the index-matching semantics of proofs.
//!
//! A delta stands for a multilinear map written in Einstein notation as a
//! product of two-index deltas, e.g. `δ^{i,k}_{j,l} = δ_{ij} δ^{kl}`. It
//! carries a domain and codomain signature (ordered base-space slots) and a
//! list of index pairs. In *normal form* the pairs are a perfect matching on
//! the slots, except for self-loops, which contribute a trace factor equal to
//! the dimension of their space.
//!
//! [`delta_of_proof`] reads a delta off a derivation: axioms introduce one
//! pair per slot, residuation and structural rules only re-partition slots
//! between domain and codomain, and binary monotonicity rules take disjoint
//! unions. [`compose`] splices two deltas along a shared signature by adding
//! bridge pairs and then normalizing with the rewrite that merges two pairs
//! sharing an index. The rewrite system is confluent up to renaming, which
//! [`alpha_equiv`] decides by comparing slot-anchored canonical forms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{AtomMap, BaseSpace, Formula, FormulaError, SpaceSignature};
use crate::proofs::{check_proof, Proof, ProofError, RuleName};

/// Identifier of one tensor index within a delta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexVar(pub u64);

/// A two-index delta factor `δ_{ab}` over one base space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub a: IndexVar,
    pub b: IndexVar,
    pub space: BaseSpace,
}

/// One tensor slot of a domain or codomain signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub space: BaseSpace,
    pub index: IndexVar,
}

/// Position of a slot, used when describing edges without index names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotRef {
    Dom(usize),
    Cod(usize),
}

impl fmt::Display for SlotRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotRef::Dom(k) => write!(f, "d{k}"),
            SlotRef::Cod(k) => write!(f, "c{k}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum DeltaError {
    #[error("ill-formed delta: {0}")]
    IllFormed(String),
    #[error("pair links spaces {left} and {right}")]
    SpaceMismatch { left: BaseSpace, right: BaseSpace },
    #[error("cannot compose: inner signatures differ ({left} vs {right})")]
    SignatureMismatch { left: String, right: String },
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

// ---------------------------------------------------------------------------
// Raw deltas and normalization
// ---------------------------------------------------------------------------

/// A delta whose pairs may chain through internal indices; [`RawDelta::normalize`]
/// rewrites it to normal form.
///
/// Well-formedness: every slot index occurs in exactly one pair end, every
/// other index in exactly two, and all ends of a pair share its space.
#[derive(Debug, Clone)]
pub struct RawDelta {
    pub pairs: Vec<Pair>,
    pub domain: Vec<Slot>,
    pub codomain: Vec<Slot>,
}

impl RawDelta {
    fn validate(&self) -> Result<(), DeltaError> {
        let mut slot_spaces: HashMap<IndexVar, BaseSpace> = HashMap::new();
        for slot in self.domain.iter().chain(&self.codomain) {
            if slot_spaces.insert(slot.index, slot.space.clone()).is_some() {
                return Err(DeltaError::IllFormed(format!(
                    "index {:?} occupies two slots",
                    slot.index
                )));
            }
        }
        let mut occurrences: HashMap<IndexVar, usize> = HashMap::new();
        for pair in &self.pairs {
            for end in [pair.a, pair.b] {
                *occurrences.entry(end).or_insert(0) += 1;
                if let Some(space) = slot_spaces.get(&end) {
                    if *space != pair.space {
                        return Err(DeltaError::SpaceMismatch {
                            left: space.clone(),
                            right: pair.space.clone(),
                        });
                    }
                }
            }
        }
        for (index, space) in &slot_spaces {
            match occurrences.get(index) {
                Some(1) => {}
                n => {
                    return Err(DeltaError::IllFormed(format!(
                        "slot index {index:?} of {space} occurs {} time(s) in pairs, expected 1",
                        n.copied().unwrap_or(0)
                    )))
                }
            }
        }
        for (index, count) in &occurrences {
            if !slot_spaces.contains_key(index) && *count != 2 {
                return Err(DeltaError::IllFormed(format!(
                    "internal index {index:?} occurs {count} time(s) in pairs, expected 2"
                )));
            }
        }
        Ok(())
    }

    /// Rewrites to normal form, merging pairs deterministically (first
    /// mergeable index in pair order).
    pub fn normalize(self) -> Result<Delta, DeltaError> {
        self.normalize_inner(None)
    }

    /// Rewrites to normal form with a seed-driven choice of which mergeable
    /// index to contract at each step. Exists to exercise confluence: the
    /// result is equal to [`RawDelta::normalize`] up to renaming for every
    /// seed.
    pub fn normalize_seeded(self, seed: u64) -> Result<Delta, DeltaError> {
        self.normalize_inner(Some(seed))
    }

    fn normalize_inner(self, seed: Option<u64>) -> Result<Delta, DeltaError> {
        self.validate()?;
        let RawDelta { mut pairs, domain, codomain } = self;
        let slot_ids: BTreeSet<IndexVar> =
            domain.iter().chain(&codomain).map(|s| s.index).collect();
        let mut rng = seed.map(crate::lexicon::SplitMix64::new);

        loop {
            // A merge is possible at any internal index whose two occurrences
            // sit in different pairs.
            let mut candidates: Vec<(usize, usize, IndexVar)> = Vec::new();
            let mut seen: HashMap<IndexVar, usize> = HashMap::new();
            for (k, pair) in pairs.iter().enumerate() {
                for end in [pair.a, pair.b] {
                    if slot_ids.contains(&end) {
                        continue;
                    }
                    match seen.get(&end) {
                        Some(&first) if first != k => candidates.push((first, k, end)),
                        Some(_) => {}
                        None => {
                            seen.insert(end, k);
                        }
                    }
                }
            }
            if candidates.is_empty() {
                break;
            }
            let chosen = match &mut rng {
                Some(rng) => {
                    let roll = rng.next_u64() as usize % candidates.len();
                    candidates[roll]
                }
                None => candidates[0],
            };
            let (i, j, index) = chosen;
            let (pi, pj) = (pairs[i].clone(), pairs[j].clone());
            if pi.space != pj.space {
                return Err(DeltaError::SpaceMismatch { left: pi.space, right: pj.space });
            }
            let other = |p: &Pair| if p.a == index { p.b } else { p.a };
            let merged = Pair { a: other(&pi), b: other(&pj), space: pi.space };
            // Replace the earlier pair, drop the later one.
            pairs[i] = merged;
            pairs.remove(j);
        }

        let delta = Delta { pairs, domain, codomain };
        delta.check_normal()?;
        Ok(delta.canonical_pair_order())
    }
}

// ---------------------------------------------------------------------------
// Normal-form deltas
// ---------------------------------------------------------------------------

/// A delta in normal form: pairs form a perfect matching on the slots, plus
/// zero or more self-loops (trace factors).
#[derive(Debug, Clone)]
pub struct Delta {
    pairs: Vec<Pair>,
    domain: Vec<Slot>,
    codomain: Vec<Slot>,
}

impl Delta {
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn domain(&self) -> &[Slot] {
        &self.domain
    }

    pub fn codomain(&self) -> &[Slot] {
        &self.codomain
    }

    pub fn domain_signature(&self) -> SpaceSignature {
        SpaceSignature::new(self.domain.iter().map(|s| s.space.clone()).collect())
    }

    pub fn codomain_signature(&self) -> SpaceSignature {
        SpaceSignature::new(self.codomain.iter().map(|s| s.space.clone()).collect())
    }

    /// Identity delta on a signature: slot `k` of the domain linked to slot
    /// `k` of the codomain.
    pub fn identity(sig: &SpaceSignature) -> Delta {
        let n = sig.len() as u64;
        let domain: Vec<Slot> = sig
            .components()
            .iter()
            .enumerate()
            .map(|(k, space)| Slot { space: space.clone(), index: IndexVar(k as u64) })
            .collect();
        let codomain: Vec<Slot> = sig
            .components()
            .iter()
            .enumerate()
            .map(|(k, space)| Slot { space: space.clone(), index: IndexVar(n + k as u64) })
            .collect();
        let pairs = domain
            .iter()
            .zip(&codomain)
            .map(|(d, c)| Pair { a: d.index, b: c.index, space: d.space.clone() })
            .collect();
        Delta { pairs, domain, codomain }.canonical_pair_order()
    }

    /// Builds a normal-form delta from slot positions and edges; `edges` must
    /// be a perfect matching on the slots. Loops (trace factors) can be added
    /// as extra spaces.
    pub fn from_edges(
        domain: Vec<BaseSpace>,
        codomain: Vec<BaseSpace>,
        edges: &[(SlotRef, SlotRef)],
        loops: &[BaseSpace],
    ) -> Result<Delta, DeltaError> {
        let mut next = 0u64;
        let mut fresh = || {
            next += 1;
            IndexVar(next - 1)
        };
        let domain: Vec<Slot> =
            domain.into_iter().map(|space| Slot { space, index: fresh() }).collect();
        let codomain: Vec<Slot> =
            codomain.into_iter().map(|space| Slot { space, index: fresh() }).collect();
        let resolve = |r: SlotRef| -> Result<&Slot, DeltaError> {
            match r {
                SlotRef::Dom(k) => domain
                    .get(k)
                    .ok_or_else(|| DeltaError::IllFormed(format!("no domain slot {k}"))),
                SlotRef::Cod(k) => codomain
                    .get(k)
                    .ok_or_else(|| DeltaError::IllFormed(format!("no codomain slot {k}"))),
            }
        };
        let mut pairs = Vec::new();
        for &(x, y) in edges {
            let (sx, sy) = (resolve(x)?, resolve(y)?);
            if sx.space != sy.space {
                return Err(DeltaError::SpaceMismatch {
                    left: sx.space.clone(),
                    right: sy.space.clone(),
                });
            }
            pairs.push(Pair { a: sx.index, b: sy.index, space: sx.space.clone() });
        }
        for space in loops {
            let id = fresh();
            pairs.push(Pair { a: id, b: id, space: space.clone() });
        }
        let delta = Delta { pairs, domain, codomain };
        delta.check_normal()?;
        Ok(delta.canonical_pair_order())
    }

    /// Low-level constructor from explicit parts; the pairs must already form
    /// a perfect matching over the slot indices.
    pub fn from_parts(
        pairs: Vec<Pair>,
        domain: Vec<Slot>,
        codomain: Vec<Slot>,
    ) -> Result<Delta, DeltaError> {
        let delta = Delta { pairs, domain, codomain };
        delta.check_normal()?;
        Ok(delta.canonical_pair_order())
    }

    /// A copy with one extra trace loop, which scales every evaluation by the
    /// loop's dimension. Used as a corruption fallback in negative controls.
    pub fn with_extra_loop(&self) -> Delta {
        let space = self
            .domain
            .first()
            .or_else(|| self.codomain.first())
            .map(|s| s.space.clone())
            .unwrap_or_else(|| BaseSpace::new("X", 2));
        let id = IndexVar(self.max_index());
        let mut pairs = self.pairs.clone();
        pairs.push(Pair { a: id, b: id, space });
        Delta { pairs, domain: self.domain.clone(), codomain: self.codomain.clone() }
            .canonical_pair_order()
    }

    /// Verifies the normal-form invariant.
    fn check_normal(&self) -> Result<(), DeltaError> {
        let mut slot_of: HashMap<IndexVar, ()> = HashMap::new();
        for slot in self.domain.iter().chain(&self.codomain) {
            if slot_of.insert(slot.index, ()).is_some() {
                return Err(DeltaError::IllFormed(format!(
                    "index {:?} occupies two slots",
                    slot.index
                )));
            }
        }
        let mut matched: BTreeSet<IndexVar> = BTreeSet::new();
        for pair in &self.pairs {
            if pair.a == pair.b {
                if slot_of.contains_key(&pair.a) {
                    return Err(DeltaError::IllFormed(
                        "self-loop touches a slot index".into(),
                    ));
                }
                continue;
            }
            for end in [pair.a, pair.b] {
                if !slot_of.contains_key(&end) {
                    return Err(DeltaError::IllFormed(format!(
                        "pair end {end:?} is not a slot index"
                    )));
                }
                if !matched.insert(end) {
                    return Err(DeltaError::IllFormed(format!(
                        "slot index {end:?} matched twice"
                    )));
                }
            }
        }
        if matched.len() != self.domain.len() + self.codomain.len() {
            return Err(DeltaError::IllFormed(format!(
                "{} of {} slots matched",
                matched.len(),
                self.domain.len() + self.codomain.len()
            )));
        }
        Ok(())
    }

    /// Orders pairs by their first slot position (domain first), loops last;
    /// makes printing and contraction order independent of construction
    /// history.
    fn canonical_pair_order(mut self) -> Delta {
        let position: HashMap<IndexVar, SlotRef> = self
            .domain
            .iter()
            .enumerate()
            .map(|(k, s)| (s.index, SlotRef::Dom(k)))
            .chain(self.codomain.iter().enumerate().map(|(k, s)| (s.index, SlotRef::Cod(k))))
            .collect();
        let key = |p: &Pair| -> (u8, SlotRef, SlotRef) {
            if p.a == p.b {
                return (1, SlotRef::Dom(usize::MAX), SlotRef::Dom(usize::MAX));
            }
            let (x, y) = (position[&p.a], position[&p.b]);
            (0, x.min(y), x.max(y))
        };
        self.pairs.sort_by_key(key);
        // Orient non-loop pairs with the earlier slot first.
        for pair in &mut self.pairs {
            if pair.a != pair.b && position[&pair.b] < position[&pair.a] {
                std::mem::swap(&mut pair.a, &mut pair.b);
            }
        }
        self
    }

    fn max_index(&self) -> u64 {
        self.pairs
            .iter()
            .flat_map(|p| [p.a.0, p.b.0])
            .chain(self.domain.iter().map(|s| s.index.0))
            .chain(self.codomain.iter().map(|s| s.index.0))
            .max()
            .map_or(0, |m| m + 1)
    }

    fn shifted(&self, offset: u64) -> Delta {
        let shift = |v: IndexVar| IndexVar(v.0 + offset);
        Delta {
            pairs: self
                .pairs
                .iter()
                .map(|p| Pair { a: shift(p.a), b: shift(p.b), space: p.space.clone() })
                .collect(),
            domain: self
                .domain
                .iter()
                .map(|s| Slot { space: s.space.clone(), index: shift(s.index) })
                .collect(),
            codomain: self
                .codomain
                .iter()
                .map(|s| Slot { space: s.space.clone(), index: shift(s.index) })
                .collect(),
        }
    }

    /// Edge set over slot positions plus the multiset of loop spaces: the
    /// canonical form compared by [`alpha_equiv`].
    pub fn canonical_edges(&self) -> CanonicalForm {
        let position: HashMap<IndexVar, SlotRef> = self
            .domain
            .iter()
            .enumerate()
            .map(|(k, s)| (s.index, SlotRef::Dom(k)))
            .chain(self.codomain.iter().enumerate().map(|(k, s)| (s.index, SlotRef::Cod(k))))
            .collect();
        let mut edges = BTreeSet::new();
        let mut loops: BTreeMap<(String, usize), usize> = BTreeMap::new();
        for pair in &self.pairs {
            if pair.a == pair.b {
                *loops.entry((pair.space.label.clone(), pair.space.dim)).or_insert(0) += 1;
            } else {
                let (x, y) = (position[&pair.a], position[&pair.b]);
                edges.insert((x.min(y), x.max(y)));
            }
        }
        (edges, loops)
    }
}

/// A delta's renaming-invariant shape: edges between slot positions plus a
/// count of trace loops per `(space label, dimension)`.
pub type CanonicalForm = (BTreeSet<(SlotRef, SlotRef)>, BTreeMap<(String, usize), usize>);

/// Equality of deltas up to renaming of index variables.
pub fn alpha_equiv(a: &Delta, b: &Delta) -> bool {
    a.domain_signature() == b.domain_signature()
        && a.codomain_signature() == b.codomain_signature()
        && a.canonical_edges() == b.canonical_edges()
}

/// Composition `g ∘ f`: bridge pairs identify `f`'s codomain slots with `g`'s
/// domain slots, then normalization eliminates the internal indices.
pub fn compose(g: &Delta, f: &Delta) -> Result<Delta, DeltaError> {
    if f.codomain_signature() != g.domain_signature() {
        return Err(DeltaError::SignatureMismatch {
            left: f.codomain_signature().to_string(),
            right: g.domain_signature().to_string(),
        });
    }
    let g = g.shifted(f.max_index());
    let mut pairs = Vec::with_capacity(f.pairs.len() + g.pairs.len() + f.codomain.len());
    for (inner_out, inner_in) in f.codomain.iter().zip(&g.domain) {
        pairs.push(Pair { a: inner_out.index, b: inner_in.index, space: inner_out.space.clone() });
    }
    pairs.extend(f.pairs.iter().cloned());
    pairs.extend(g.pairs.iter().cloned());
    RawDelta { pairs, domain: f.domain.clone(), codomain: g.codomain.clone() }.normalize()
}

/// Parallel composition `f ⊗ g`: disjoint union with `g`'s slots appended.
pub fn tensor_delta(f: &Delta, g: &Delta) -> Delta {
    let g = g.shifted(f.max_index());
    let mut pairs = f.pairs.clone();
    pairs.extend(g.pairs.iter().cloned());
    let mut domain = f.domain.clone();
    domain.extend(g.domain.iter().cloned());
    let mut codomain = f.codomain.clone();
    codomain.extend(g.codomain.iter().cloned());
    Delta { pairs, domain, codomain }.canonical_pair_order()
}

// ---------------------------------------------------------------------------
// Extraction from proofs
// ---------------------------------------------------------------------------

/// Reads the delta off a checked proof.
///
/// Axioms introduce an identity matching; residuation and the structural
/// postulates re-partition slots between domain and codomain without touching
/// pairs; binary monotonicity rules concatenate premise deltas, reading slash
/// argument slots in the opposite direction.
pub fn delta_of_proof(proof: &Proof, atoms: &AtomMap) -> Result<Delta, DeltaError> {
    check_proof(proof)?;
    let delta = extract(proof, atoms)?;
    delta.check_normal()?;
    Ok(delta.canonical_pair_order())
}

fn extract(proof: &Proof, atoms: &AtomMap) -> Result<Delta, DeltaError> {
    use Formula::{Dia, Tensor, Under};
    let conclusion = proof.conclusion();
    let premise = |k: usize| -> Result<Delta, DeltaError> { extract(&proof.premises()[k], atoms) };
    match proof.rule() {
        RuleName::Axiom => Ok(Delta::identity(&conclusion.source.interpret(atoms)?)),
        RuleName::ResUnder => {
            // B --> A\C from A*B --> C: A's slots move to the codomain front.
            let d = premise(0)?;
            let na = match &conclusion.target {
                Under(a, _) => a.atom_count(),
                _ => unreachable!("checked proof"),
            };
            let (a_slots, b_slots) = split(d.domain, na);
            Ok(Delta { pairs: d.pairs, domain: b_slots, codomain: concat(a_slots, d.codomain) })
        }
        RuleName::ResUnderInv => {
            // A*B --> C from B --> A\C: A's slots move back to the domain front.
            let d = premise(0)?;
            let na = match &conclusion.source {
                Tensor(a, _) => a.atom_count(),
                _ => unreachable!("checked proof"),
            };
            let (a_slots, c_slots) = split(d.codomain, na);
            Ok(Delta { pairs: d.pairs, domain: concat(a_slots, d.domain), codomain: c_slots })
        }
        RuleName::ResOver => {
            // A --> C/B from A*B --> C: B's slots move to the codomain tail.
            let d = premise(0)?;
            let na = conclusion.source.atom_count();
            let (a_slots, b_slots) = split(d.domain, na);
            Ok(Delta { pairs: d.pairs, domain: a_slots, codomain: concat(d.codomain, b_slots) })
        }
        RuleName::ResOverInv => {
            // A*B --> C from A --> C/B: B's slots move back to the domain tail.
            let d = premise(0)?;
            let nc = conclusion.target.atom_count();
            let (c_slots, b_slots) = split(d.codomain, nc);
            Ok(Delta { pairs: d.pairs, domain: concat(d.domain, b_slots), codomain: c_slots })
        }
        // The modalities are transparent, so both their residuation and
        // monotonicity rules leave the delta untouched.
        RuleName::ResDia | RuleName::ResDiaInv | RuleName::MonDia | RuleName::MonBox => premise(0),
        RuleName::MonTensor => {
            let (d1, d2) = (premise(0)?, premise(1)?);
            Ok(tensor_delta(&d1, &d2))
        }
        RuleName::MonOver => {
            // A/D --> B/C from f: A --> B, g: C --> D: the argument delta
            // runs backward, so g's codomain lands in the conclusion domain.
            let d1 = premise(0)?;
            let d2 = premise(1)?.shifted(d1.max_index());
            let mut pairs = d1.pairs.clone();
            pairs.extend(d2.pairs.iter().cloned());
            Ok(Delta {
                pairs,
                domain: concat(d1.domain, d2.codomain),
                codomain: concat(d1.codomain, d2.domain),
            })
        }
        RuleName::MonUnder => {
            // B\C --> A\D from f: A --> B, g: C --> D.
            let d1 = premise(0)?;
            let d2 = premise(1)?.shifted(d1.max_index());
            let mut pairs = d1.pairs.clone();
            pairs.extend(d2.pairs.iter().cloned());
            Ok(Delta {
                pairs,
                domain: concat(d1.codomain, d2.domain),
                codomain: concat(d1.domain, d2.codomain),
            })
        }
        RuleName::AlphaLeft | RuleName::AlphaRight => premise(0),
        RuleName::SigmaLeft => {
            // <>A*(B*C) --> D from B*(<>A*C) --> D: swap the A and B blocks.
            let d = premise(0)?;
            let (na, nb) = match &conclusion.source {
                Tensor(da, bc) => match (&**da, &**bc) {
                    (Dia(a), Tensor(b, _)) => (a.atom_count(), b.atom_count()),
                    _ => unreachable!("checked proof"),
                },
                _ => unreachable!("checked proof"),
            };
            let (b_slots, rest) = split(d.domain, nb);
            let (a_slots, c_slots) = split(rest, na);
            Ok(Delta {
                pairs: d.pairs,
                domain: concat(concat(a_slots, b_slots), c_slots),
                codomain: d.codomain,
            })
        }
        RuleName::SigmaRight => {
            // (A*B)*<>C --> D from (A*<>C)*B --> D: swap the C and B blocks.
            let d = premise(0)?;
            let (na, nc) = match &conclusion.source {
                Tensor(ab, dc) => match (&**ab, &**dc) {
                    (Tensor(a, _), Dia(c)) => (a.atom_count(), c.atom_count()),
                    _ => unreachable!("checked proof"),
                },
                _ => unreachable!("checked proof"),
            };
            let (a_slots, rest) = split(d.domain, na);
            let (c_slots, b_slots) = split(rest, nc);
            Ok(Delta {
                pairs: d.pairs,
                domain: concat(concat(a_slots, b_slots), c_slots),
                codomain: d.codomain,
            })
        }
    }
}

fn split(slots: Vec<Slot>, at: usize) -> (Vec<Slot>, Vec<Slot>) {
    let mut left = slots;
    let right = left.split_off(at);
    (left, right)
}

fn concat(mut left: Vec<Slot>, right: Vec<Slot>) -> Vec<Slot> {
    left.extend(right);
    left
}

// ---------------------------------------------------------------------------
// Readings
// ---------------------------------------------------------------------------

/// One semantic reading: a delta class with the proofs that produce it.
#[derive(Debug, Clone)]
pub struct Reading {
    pub delta: Delta,
    /// Indices into the proof slice passed to [`distinct_readings`], in
    /// discovery order; the first is the representative.
    pub proof_indices: Vec<usize>,
}

/// Groups proofs of one sequent by the alpha-class of their deltas, in order
/// of first appearance.
pub fn distinct_readings(proofs: &[Proof], atoms: &AtomMap) -> Result<Vec<Reading>, DeltaError> {
    let mut readings: Vec<Reading> = Vec::new();
    for (k, proof) in proofs.iter().enumerate() {
        let delta = delta_of_proof(proof, atoms)?;
        match readings.iter_mut().find(|r| alpha_equiv(&r.delta, &delta)) {
            Some(reading) => reading.proof_indices.push(k),
            None => readings.push(Reading { delta, proof_indices: vec![k] }),
        }
    }
    Ok(readings)
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Einstein-notation style.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotationStyle {
    /// `mannen_i ⊗ die_{ijkl} ⊗ vrouwen_m ⊗ haten_{mkl} → x_j`
    Unicode,
    /// `mannen[i] die[i,j,k,l] vrouwen[m] haten[m,k,l] -> x[j]`
    Ascii,
}

impl Delta {
    /// Formats the delta as an Einstein-notation contraction. `factors` names
    /// consecutive groups of domain slots (word, slot count); `result` names
    /// the codomain tensor. Index letters run `i, j, …` in order of first
    /// appearance across domain then codomain slots.
    pub fn index_notation(
        &self,
        factors: &[(String, usize)],
        result: &str,
        style: NotationStyle,
    ) -> Result<String, DeltaError> {
        let total: usize = factors.iter().map(|(_, n)| n).sum();
        if total != self.domain.len() {
            return Err(DeltaError::IllFormed(format!(
                "factors cover {total} slots, domain has {}",
                self.domain.len()
            )));
        }
        // Pair -> letter, allocated by first slot occurrence.
        let position: HashMap<IndexVar, usize> = self
            .domain
            .iter()
            .chain(&self.codomain)
            .enumerate()
            .map(|(k, s)| (s.index, k))
            .collect();
        let mut pair_of_slot: Vec<usize> = vec![usize::MAX; position.len()];
        for (pk, pair) in self.pairs.iter().enumerate() {
            if pair.a == pair.b {
                continue;
            }
            pair_of_slot[position[&pair.a]] = pk;
            pair_of_slot[position[&pair.b]] = pk;
        }
        let mut letter_of_pair: HashMap<usize, String> = HashMap::new();
        let mut next = 0usize;
        let mut slot_letters: Vec<String> = Vec::with_capacity(position.len());
        for &pk in &pair_of_slot {
            let letter = letter_of_pair.entry(pk).or_insert_with(|| {
                let l = index_letter(next);
                next += 1;
                l
            });
            slot_letters.push(letter.clone());
        }

        let subscript = |letters: &[String]| -> String {
            match style {
                NotationStyle::Unicode => {
                    let joined = if letters.iter().all(|l| l.len() == 1) {
                        letters.concat()
                    } else {
                        letters.join(",")
                    };
                    if joined.chars().count() == 1 {
                        format!("_{joined}")
                    } else {
                        format!("_{{{joined}}}")
                    }
                }
                NotationStyle::Ascii => format!("[{}]", letters.join(",")),
            }
        };

        let mut parts: Vec<String> = Vec::new();
        let mut cursor = 0usize;
        for (name, count) in factors {
            let letters = &slot_letters[cursor..cursor + count];
            parts.push(format!("{name}{}", subscript(letters)));
            cursor += count;
        }
        for pair in &self.pairs {
            if pair.a == pair.b {
                parts.push(format!("tr({})", pair.space.label));
            }
        }
        let sep = match style {
            NotationStyle::Unicode => " ⊗ ",
            NotationStyle::Ascii => " ",
        };
        let arrow = match style {
            NotationStyle::Unicode => " → ",
            NotationStyle::Ascii => " -> ",
        };
        let out_letters = &slot_letters[self.domain.len()..];
        let rhs = if out_letters.is_empty() {
            result.to_string()
        } else {
            format!("{result}{}", subscript(out_letters))
        };
        Ok(format!("{}{arrow}{rhs}", parts.join(sep)))
    }
}

fn index_letter(k: usize) -> String {
    const CYCLE: &[u8; 26] = b"ijklmnopqrstuvwxyzabcdefgh";
    let c = CYCLE[k % 26] as char;
    if k < 26 {
        c.to_string()
    } else {
        format!("{c}{}", k / 26)
    }
}

// ---------------------------------------------------------------------------
// Wire form
// ---------------------------------------------------------------------------

/// Serializable description of a delta: spaces by slot position, edges by
/// slot position, loops by space. Round-trips through [`Delta::from_wire`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct WireDelta {
    pub domain: Vec<WireSlot>,
    pub codomain: Vec<WireSlot>,
    /// Edges as slot references, `"d3"` for domain slot 3, `"c0"` for
    /// codomain slot 0.
    pub edges: Vec<[String; 2]>,
    pub loops: Vec<WireSlot>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct WireSlot {
    pub space: String,
    pub dim: usize,
}

impl Delta {
    pub fn to_wire(&self) -> WireDelta {
        let (edges, loops) = self.canonical_edges();
        WireDelta {
            domain: self
                .domain
                .iter()
                .map(|s| WireSlot { space: s.space.label.clone(), dim: s.space.dim })
                .collect(),
            codomain: self
                .codomain
                .iter()
                .map(|s| WireSlot { space: s.space.label.clone(), dim: s.space.dim })
                .collect(),
            edges: edges.iter().map(|(x, y)| [x.to_string(), y.to_string()]).collect(),
            loops: loops
                .iter()
                .flat_map(|((label, dim), count)| {
                    (0..*count).map(|_| WireSlot { space: label.clone(), dim: *dim })
                })
                .collect(),
        }
    }

    pub fn from_wire(wire: &WireDelta) -> Result<Delta, DeltaError> {
        let parse_ref = |s: &str| -> Result<SlotRef, DeltaError> {
            let (kind, idx) = s.split_at(1);
            let idx: usize = idx
                .parse()
                .map_err(|_| DeltaError::IllFormed(format!("bad slot reference `{s}`")))?;
            match kind {
                "d" => Ok(SlotRef::Dom(idx)),
                "c" => Ok(SlotRef::Cod(idx)),
                _ => Err(DeltaError::IllFormed(format!("bad slot reference `{s}`"))),
            }
        };
        let spaces = |slots: &[WireSlot]| -> Vec<BaseSpace> {
            slots.iter().map(|s| BaseSpace::new(s.space.clone(), s.dim)).collect()
        };
        let edges = wire
            .edges
            .iter()
            .map(|[x, y]| Ok((parse_ref(x)?, parse_ref(y)?)))
            .collect::<Result<Vec<_>, DeltaError>>()?;
        Delta::from_edges(spaces(&wire.domain), spaces(&wire.codomain), &edges, &spaces(&wire.loops))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proofs::{derive, Arrow, Postulate, SearchConfig};

    fn atoms() -> AtomMap {
        AtomMap::from_entries([("np", "N", 4), ("n", "N", 4), ("s", "S", 3)])
    }

    fn arrow(src: &str, tgt: &str) -> Arrow {
        Arrow::new(src.parse().unwrap(), tgt.parse().unwrap())
    }

    fn sole_delta(src: &str, tgt: &str) -> Delta {
        let out = derive(&arrow(src, tgt), &SearchConfig::default());
        assert_eq!(out.proofs.len(), 1, "expected a unique proof of {src} --> {tgt}");
        delta_of_proof(&out.proofs[0], &atoms()).unwrap()
    }

    fn edges_of(d: &Delta) -> BTreeSet<(SlotRef, SlotRef)> {
        d.canonical_edges().0
    }

    fn edge_set(edges: &[(SlotRef, SlotRef)]) -> BTreeSet<(SlotRef, SlotRef)> {
        edges.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect()
    }

    use SlotRef::{Cod, Dom};

    #[test]
    fn intransitive_clause_delta_matches_hand_computation() {
        // poets*dream: subject contracts with the verb's first slot, the
        // verb's sentence slot is the output.
        let d = sole_delta("np*(np\\s)", "s");
        assert_eq!(d.domain_signature().to_string(), "N⊗N⊗S");
        assert_eq!(d.codomain_signature().to_string(), "S");
        assert_eq!(edges_of(&d), edge_set(&[(Dom(0), Dom(1)), (Dom(2), Cod(0))]));
    }

    #[test]
    fn identity_on_verb_type_is_slotwise() {
        let d = sole_delta("np\\s", "np\\s");
        assert_eq!(edges_of(&d), edge_set(&[(Dom(0), Cod(0)), (Dom(1), Cod(1))]));
    }

    #[test]
    fn type_raising_inserts_an_eta_pair() {
        // poets --> s/(np\s): R[j,k,l] = poets[k] * [j == l].
        let d = sole_delta("np", "s/(np\\s)");
        assert_eq!(d.domain_signature().to_string(), "N");
        assert_eq!(d.codomain_signature().to_string(), "S⊗N⊗S");
        assert_eq!(edges_of(&d), edge_set(&[(Dom(0), Cod(1)), (Cod(0), Cod(2))]));
    }

    #[test]
    fn both_strengthening_proofs_share_one_delta() {
        let out = derive(&arrow("np\\s", "<>[]np\\s"), &SearchConfig::default());
        let readings = distinct_readings(&out.proofs, &atoms()).unwrap();
        assert_eq!(out.proofs.len(), 2);
        assert_eq!(readings.len(), 1);
        assert_eq!(readings[0].proof_indices, vec![0, 1]);
        assert_eq!(
            edges_of(&readings[0].delta),
            edge_set(&[(Dom(0), Cod(0)), (Dom(1), Cod(1))])
        );
    }

    fn dutch_goal() -> Arrow {
        arrow("n*(((n\\n)/(<>[]np\\s))*(np*(np\\(np\\s))))", "n")
    }

    fn dutch_subject_edges() -> BTreeSet<(SlotRef, SlotRef)> {
        edge_set(&[
            (Dom(0), Dom(1)),
            (Dom(2), Cod(0)),
            (Dom(3), Dom(7)),
            (Dom(4), Dom(8)),
            (Dom(5), Dom(6)),
        ])
    }

    fn dutch_object_edges() -> BTreeSet<(SlotRef, SlotRef)> {
        edge_set(&[
            (Dom(0), Dom(1)),
            (Dom(2), Cod(0)),
            (Dom(3), Dom(6)),
            (Dom(4), Dom(8)),
            (Dom(5), Dom(7)),
        ])
    }

    #[test]
    fn dutch_relative_clause_has_subject_and_object_readings() {
        let out = derive(&dutch_goal(), &SearchConfig::with_postulates(Postulate::leftward()));
        assert!(!out.bound_hit);
        let readings = distinct_readings(&out.proofs, &atoms()).unwrap();
        let found: Vec<_> = readings.iter().map(|r| edges_of(&r.delta)).collect();
        assert_eq!(readings.len(), 2, "expected subject and object readings");
        assert!(found.contains(&dutch_subject_edges()), "missing subject matching");
        assert!(found.contains(&dutch_object_edges()), "missing object matching");
    }

    #[test]
    fn without_postulates_only_the_subject_reading_survives() {
        let out = derive(&dutch_goal(), &SearchConfig::default());
        let readings = distinct_readings(&out.proofs, &atoms()).unwrap();
        assert_eq!(readings.len(), 1);
        assert_eq!(edges_of(&readings[0].delta), dutch_subject_edges());
    }

    #[test]
    fn compose_chains_bridge_pairs() {
        // (np*(np\s) --> s) ; (s --> s) stays the clause delta.
        let clause = sole_delta("np*(np\\s)", "s");
        let id_s = Delta::identity(&"s".parse::<Formula>().unwrap().interpret(&atoms()).unwrap());
        let composed = compose(&id_s, &clause).unwrap();
        assert!(alpha_equiv(&composed, &clause));
    }

    #[test]
    fn compose_epsilon_after_eta_yields_a_trace_loop() {
        let n = BaseSpace::new("N", 4);
        // η: I -> N⊗N, ε: N⊗N -> I.
        let eta =
            Delta::from_edges(vec![], vec![n.clone(), n.clone()], &[(Cod(0), Cod(1))], &[]).unwrap();
        let eps =
            Delta::from_edges(vec![n.clone(), n.clone()], vec![], &[(Dom(0), Dom(1))], &[]).unwrap();
        let scalar = compose(&eps, &eta).unwrap();
        assert!(scalar.domain().is_empty() && scalar.codomain().is_empty());
        let (edges, loops) = scalar.canonical_edges();
        assert!(edges.is_empty());
        assert_eq!(loops.get(&("N".to_string(), 4)), Some(&1));
    }

    #[test]
    fn snake_composition_is_the_identity_delta() {
        let n = BaseSpace::new("N", 4);
        // (ε⊗1) ∘ (1⊗η) = 1.
        let id_n = Delta::identity(&SpaceSignature::new(vec![n.clone()]));
        let eta =
            Delta::from_edges(vec![], vec![n.clone(), n.clone()], &[(Cod(0), Cod(1))], &[]).unwrap();
        let eps =
            Delta::from_edges(vec![n.clone(), n.clone()], vec![], &[(Dom(0), Dom(1))], &[]).unwrap();
        let left = tensor_delta(&id_n, &eta);
        let right = tensor_delta(&eps, &id_n);
        let snake = compose(&right, &left).unwrap();
        assert!(alpha_equiv(&snake, &id_n));
    }

    #[test]
    fn compose_rejects_signature_mismatch() {
        let clause = sole_delta("np*(np\\s)", "s");
        let id_n = Delta::identity(&"np".parse::<Formula>().unwrap().interpret(&atoms()).unwrap());
        assert!(matches!(
            compose(&id_n, &clause),
            Err(DeltaError::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn normalize_is_confluent_on_a_chain() {
        // d0 -x- internal -y- c0 chain collapses to d0 - c0 whatever the
        // rewrite order.
        let n = BaseSpace::new("N", 3);
        let raw = || RawDelta {
            pairs: vec![
                Pair { a: IndexVar(0), b: IndexVar(10), space: n.clone() },
                Pair { a: IndexVar(10), b: IndexVar(11), space: n.clone() },
                Pair { a: IndexVar(11), b: IndexVar(1), space: n.clone() },
            ],
            domain: vec![Slot { space: n.clone(), index: IndexVar(0) }],
            codomain: vec![Slot { space: n.clone(), index: IndexVar(1) }],
        };
        let reference = raw().normalize().unwrap();
        assert_eq!(edges_of(&reference), edge_set(&[(Dom(0), Cod(0))]));
        for seed in 0..16 {
            let seeded = raw().normalize_seeded(seed).unwrap();
            assert!(alpha_equiv(&reference, &seeded), "seed {seed} diverged");
        }
    }

    #[test]
    fn normalize_rejects_ill_formed_input() {
        let n = BaseSpace::new("N", 3);
        // Slot index appearing in two pairs.
        let raw = RawDelta {
            pairs: vec![
                Pair { a: IndexVar(0), b: IndexVar(1), space: n.clone() },
                Pair { a: IndexVar(0), b: IndexVar(1), space: n.clone() },
            ],
            domain: vec![Slot { space: n.clone(), index: IndexVar(0) }],
            codomain: vec![Slot { space: n.clone(), index: IndexVar(1) }],
        };
        assert!(raw.normalize().is_err());

        // Pair linking different spaces.
        let s = BaseSpace::new("S", 2);
        let raw = RawDelta {
            pairs: vec![Pair { a: IndexVar(0), b: IndexVar(1), space: n.clone() }],
            domain: vec![Slot { space: n.clone(), index: IndexVar(0) }],
            codomain: vec![Slot { space: s, index: IndexVar(1) }],
        };
        assert!(raw.normalize().is_err());
    }

    #[test]
    fn index_notation_matches_expected_letters() {
        let out = derive(&dutch_goal(), &SearchConfig::with_postulates(Postulate::leftward()));
        let readings = distinct_readings(&out.proofs, &atoms()).unwrap();
        let subject = readings
            .iter()
            .find(|r| edges_of(&r.delta) == dutch_subject_edges())
            .expect("subject reading");
        let factors = [
            ("mannen".to_string(), 1),
            ("die".to_string(), 4),
            ("vrouwen".to_string(), 1),
            ("haten".to_string(), 3),
        ];
        assert_eq!(
            subject.delta.index_notation(&factors, "x", NotationStyle::Unicode).unwrap(),
            "mannen_i ⊗ die_{ijkl} ⊗ vrouwen_m ⊗ haten_{mkl} → x_j"
        );
        assert_eq!(
            subject.delta.index_notation(&factors, "x", NotationStyle::Ascii).unwrap(),
            "mannen[i] die[i,j,k,l] vrouwen[m] haten[m,k,l] -> x[j]"
        );
        let object = readings
            .iter()
            .find(|r| edges_of(&r.delta) == dutch_object_edges())
            .expect("object reading");
        assert_eq!(
            object.delta.index_notation(&factors, "x", NotationStyle::Unicode).unwrap(),
            "mannen_i ⊗ die_{ijkl} ⊗ vrouwen_m ⊗ haten_{kml} → x_j"
        );
    }

    #[test]
    fn wire_form_round_trips() {
        let d = sole_delta("np", "s/(np\\s)");
        let wire = d.to_wire();
        let back = Delta::from_wire(&wire).unwrap();
        assert!(alpha_equiv(&d, &back));
        assert_eq!(back.to_wire(), wire);

        let json = serde_json::to_string(&wire).unwrap();
        let parsed: WireDelta = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, wire);
    }
}
