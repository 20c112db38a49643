//! End-to-end runs: look words up in a lexicon, build the antecedent, search
//! for proofs, group them into readings, and evaluate or cross-check the
//! resulting tensors. The CLI is a thin shell over these functions, and the
//! integration tests call them directly.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delta::{
    alpha_equiv, delta_of_proof, distinct_readings, Delta, DeltaError, NotationStyle, WireDelta,
};
use crate::formula::{Formula, FormulaError};
use crate::lexicon::{Lexicon, LexiconEntry, LexiconError};
use crate::proofs::{derive, Arrow, Postulate, Proof, SearchConfig, DEFAULT_MAX_DEPTH};
use crate::tensor::{
    categorical_eval_with_cap, contract, cosine, delta_matrix, DenseTensor, TensorError,
    DEFAULT_DIM_CAP,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("goal `{sequent}` is underivable with the given postulates")]
    Underivable { sequent: String },
    #[error("{found} reading(s) found; comparison needs at least 2")]
    TooFewReadings { found: usize },
    #[error("bad bracketing: {0}")]
    Bracketing(String),
    #[error("no words given")]
    EmptySentence,
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Delta(#[from] DeltaError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

impl PipelineError {
    /// Process exit code: 2 when the linguistic question has a negative
    /// answer (underivable, not ambiguous), 3 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Underivable { .. } | PipelineError::TooFewReadings { .. } => 2,
            _ => 3,
        }
    }
}

/// How to combine the word formulas into one antecedent formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bracketing {
    /// `a * (b * (c * d))` — the default.
    RightBranching,
    /// A user-written tree over the words, e.g. `((a b) (c d))`.
    Explicit(String),
    /// Every binary bracketing; proofs are pooled across all of them.
    All,
}

/// Sentences longer than this cannot use [`Bracketing::All`] (the number of
/// trees is the Catalan number of the length).
pub const MAX_ALL_BRACKETING_WORDS: usize = 10;

#[derive(Debug, Clone)]
pub struct DeriveOptions {
    pub postulates: BTreeSet<Postulate>,
    pub bracketing: Bracketing,
    pub max_depth: usize,
    pub max_proofs: Option<usize>,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            postulates: Postulate::leftward(),
            bracketing: Bracketing::RightBranching,
            max_depth: DEFAULT_MAX_DEPTH,
            max_proofs: None,
        }
    }
}

impl DeriveOptions {
    fn search_config(&self) -> SearchConfig {
        SearchConfig {
            postulates: self.postulates.clone(),
            max_depth: self.max_depth,
            max_proofs: self.max_proofs,
        }
    }
}

/// One word with the type it was assigned in a particular run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WordTyping {
    pub word: String,
    pub formula: String,
}

/// One alpha-class of derivations, with its evaluated meaning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReadingReport {
    pub assignment: Vec<WordTyping>,
    /// `word_indices ⊗ … → x_indices` over this reading's delta.
    pub einstein: String,
    pub delta: WireDelta,
    pub result_shape: Vec<usize>,
    pub result: Vec<f64>,
    pub proof_count: usize,
    /// S-expressions for every proof in the class, representative first.
    pub proofs: Vec<String>,
}

/// Everything a `derive` run produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    /// The sequent for the first word-type assignment and bracketing; other
    /// assignments appear per reading.
    pub sequent: String,
    pub words: Vec<String>,
    pub readings: Vec<ReadingReport>,
    pub proofs_found: usize,
    /// True when the depth or proof cap cut the search short somewhere.
    pub bound_hit: bool,
    pub elapsed_ms: f64,
}

/// Derives the sentence against `goal` and evaluates every reading.
///
/// Words with several lexicon entries contribute one run per combination;
/// readings keep track of which assignment produced them. Fails with
/// [`PipelineError::Underivable`] when no combination has a proof.
pub fn run_derive(
    lexicon: &Lexicon,
    words: &[String],
    goal: &Formula,
    options: &DeriveOptions,
) -> Result<RunReport, PipelineError> {
    let start = Instant::now();
    if words.is_empty() {
        return Err(PipelineError::EmptySentence);
    }
    let choices: Vec<Vec<&LexiconEntry>> =
        words.iter().map(|w| lexicon.resolve(w)).collect::<Result<_, _>>()?;

    let mut readings_out = Vec::new();
    let mut proofs_found = 0usize;
    let mut bound_hit = false;
    let mut first_sequent = None;

    for assignment in cartesian(&choices) {
        let formulas: Vec<Formula> = assignment.iter().map(|e| e.formula.clone()).collect();
        let pooled = pooled_proofs(
            &formulas,
            words,
            goal,
            options,
            &mut bound_hit,
            &mut first_sequent,
        )?;
        proofs_found += pooled.len();
        if pooled.is_empty() {
            continue;
        }
        let readings = distinct_readings(&pooled, lexicon.atoms())?;
        let inputs: Vec<&DenseTensor<f64>> = assignment.iter().map(|e| &e.tensor).collect();
        let factors: Vec<(String, usize)> = assignment
            .iter()
            .map(|e| (e.word.clone(), e.signature.len()))
            .collect();
        for reading in readings {
            let result = contract(&reading.delta, &inputs)?;
            let einstein =
                reading.delta.index_notation(&factors, "x", NotationStyle::Unicode)?;
            readings_out.push(ReadingReport {
                assignment: assignment
                    .iter()
                    .map(|e| WordTyping {
                        word: e.word.clone(),
                        formula: e.formula.to_string(),
                    })
                    .collect(),
                einstein,
                delta: reading.delta.to_wire(),
                result_shape: result.shape().to_vec(),
                result: result.data().to_vec(),
                proof_count: reading.proof_indices.len(),
                proofs: reading
                    .proof_indices
                    .iter()
                    .map(|&k| pooled[k].to_sexpr())
                    .collect(),
            });
        }
    }

    let sequent = first_sequent.unwrap_or_default();
    if readings_out.is_empty() {
        return Err(PipelineError::Underivable { sequent });
    }
    Ok(RunReport {
        sequent,
        words: words.to_vec(),
        readings: readings_out,
        proofs_found,
        bound_hit,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn pooled_proofs(
    formulas: &[Formula],
    words: &[String],
    goal: &Formula,
    options: &DeriveOptions,
    bound_hit: &mut bool,
    first_sequent: &mut Option<String>,
) -> Result<Vec<Proof>, PipelineError> {
    let config = options.search_config();
    let mut pooled = Vec::new();
    for antecedent in build_antecedents(formulas, words, &options.bracketing)? {
        let arrow = Arrow::new(antecedent, goal.clone());
        if first_sequent.is_none() {
            *first_sequent = Some(arrow.to_string());
        }
        let outcome = derive(&arrow, &config);
        *bound_hit |= outcome.bound_hit;
        pooled.extend(outcome.proofs);
    }
    Ok(pooled)
}

fn cartesian<'a>(choices: &[Vec<&'a LexiconEntry>]) -> Vec<Vec<&'a LexiconEntry>> {
    let mut combos: Vec<Vec<&LexiconEntry>> = vec![Vec::new()];
    for options in choices {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&e| {
                    let mut next = prefix.clone();
                    next.push(e);
                    next
                })
            })
            .collect();
    }
    combos
}

/// Expands a bracketing choice into concrete antecedent formulas. `words`
/// names the leaves (used to validate an explicit tree) and must be as long
/// as `formulas`.
pub fn build_antecedents(
    formulas: &[Formula],
    words: &[String],
    bracketing: &Bracketing,
) -> Result<Vec<Formula>, PipelineError> {
    if formulas.is_empty() {
        return Err(PipelineError::EmptySentence);
    }
    match bracketing {
        Bracketing::RightBranching => Ok(vec![right_branching(formulas)]),
        Bracketing::Explicit(spec) => Ok(vec![explicit_tree(spec, formulas, words)?]),
        Bracketing::All => {
            if formulas.len() > MAX_ALL_BRACKETING_WORDS {
                return Err(PipelineError::Bracketing(format!(
                    "`all` supports at most {MAX_ALL_BRACKETING_WORDS} words, got {}",
                    formulas.len()
                )));
            }
            Ok(all_bracketings(formulas))
        }
    }
}

fn right_branching(formulas: &[Formula]) -> Formula {
    let mut iter = formulas.iter().rev();
    let mut acc = iter.next().expect("nonempty").clone();
    for f in iter {
        acc = Formula::tensor(f.clone(), acc);
    }
    acc
}

fn all_bracketings(formulas: &[Formula]) -> Vec<Formula> {
    if formulas.len() == 1 {
        return vec![formulas[0].clone()];
    }
    let mut out = Vec::new();
    for split in 1..formulas.len() {
        for left in all_bracketings(&formulas[..split]) {
            for right in all_bracketings(&formulas[split..]) {
                out.push(Formula::tensor(left.clone(), right));
            }
        }
    }
    out
}

/// Parses a tree like `((a b) (c d))` whose leaves, read left to right, must
/// be the sentence words (`_` matches any word); leaf `k` receives
/// `formulas[k]`.
fn explicit_tree(
    spec: &str,
    formulas: &[Formula],
    words: &[String],
) -> Result<Formula, PipelineError> {
    struct P<'a> {
        tokens: Vec<&'a str>,
        pos: usize,
        next_leaf: usize,
        formulas: &'a [Formula],
        words: &'a [String],
    }
    impl P<'_> {
        fn node(&mut self) -> Result<Formula, String> {
            match self.tokens.get(self.pos) {
                Some(&"(") => {
                    self.pos += 1;
                    let left = self.node()?;
                    let right = self.node()?;
                    match self.tokens.get(self.pos) {
                        Some(&")") => self.pos += 1,
                        _ => return Err("expected `)`".into()),
                    }
                    Ok(Formula::tensor(left, right))
                }
                Some(&")") | None => Err("expected a word or `(`".into()),
                Some(&leaf) => {
                    let k = self.next_leaf;
                    match self.words.get(k) {
                        None => return Err(format!("more leaves than the {} words", self.words.len())),
                        Some(w) if leaf != "_" && leaf != w => {
                            return Err(format!("leaf {k} is `{leaf}` but the sentence has `{w}`"))
                        }
                        Some(_) => {}
                    }
                    self.pos += 1;
                    self.next_leaf += 1;
                    Ok(self.formulas[k].clone())
                }
            }
        }
    }
    let mut parser =
        P { tokens: tokenize_spec(spec), pos: 0, next_leaf: 0, formulas, words };
    let tree = parser.node().map_err(PipelineError::Bracketing)?;
    if parser.pos != parser.tokens.len() {
        return Err(PipelineError::Bracketing("trailing input after the tree".into()));
    }
    if parser.next_leaf != words.len() {
        return Err(PipelineError::Bracketing(format!(
            "bracketing has {} leaves but the sentence has {} words",
            parser.next_leaf,
            words.len()
        )));
    }
    Ok(tree)
}

fn tokenize_spec(spec: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut rest = spec;
    while let Some(k) = rest.find(|c: char| !c.is_whitespace()) {
        rest = &rest[k..];
        let len = match rest.as_bytes()[0] {
            b'(' | b')' => 1,
            _ => rest
                .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                .unwrap_or(rest.len()),
        };
        tokens.push(&rest[..len]);
        rest = &rest[len..];
    }
    tokens
}

// ---------------------------------------------------------------------------
// Equivalence check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub derive: DeriveOptions,
    /// Maximum allowed deviation; default 1e-9.
    pub tolerance: Option<f64>,
    /// Also compare the two routes as full matrices (every basis vector),
    /// not just on the lexicon tensors.
    pub basis: bool,
    /// Negative-control hook: rewires each extracted delta before the
    /// comparison so the check must fail.
    pub corrupt: bool,
    /// Per-node size bound for the categorical route.
    pub dim_cap: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofCheck {
    pub proof: String,
    /// Max abs deviation between the contraction of the delta and the
    /// categorical matrix applied to the lexicon tensors.
    pub deviation_on_inputs: f64,
    /// Max abs deviation between the delta as a matrix and the categorical
    /// matrix; present when the basis comparison is on.
    pub deviation_on_basis: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub sequent: String,
    pub tolerance: f64,
    pub checks: Vec<ProofCheck>,
    pub max_deviation: f64,
    pub passed: bool,
    pub elapsed_ms: f64,
}

/// Evaluates every proof twice — delta contraction versus explicit matrix
/// composition — and reports the largest disagreement.
pub fn run_check_equivalence(
    lexicon: &Lexicon,
    words: &[String],
    goal: &Formula,
    options: &CheckOptions,
) -> Result<CheckReport, PipelineError> {
    let start = Instant::now();
    if words.is_empty() {
        return Err(PipelineError::EmptySentence);
    }
    let tolerance = options.tolerance.unwrap_or(1e-9);
    let cap = options.dim_cap.unwrap_or(DEFAULT_DIM_CAP);
    let choices: Vec<Vec<&LexiconEntry>> =
        words.iter().map(|w| lexicon.resolve(w)).collect::<Result<_, _>>()?;

    let mut checks = Vec::new();
    let mut max_deviation = 0f64;
    let mut bound_hit = false;
    let mut first_sequent = None;
    let mut any_proof = false;

    for assignment in cartesian(&choices) {
        let formulas: Vec<Formula> = assignment.iter().map(|e| e.formula.clone()).collect();
        let pooled = pooled_proofs(
            &formulas,
            words,
            goal,
            &options.derive,
            &mut bound_hit,
            &mut first_sequent,
        )?;
        let inputs: Vec<&DenseTensor<f64>> = assignment.iter().map(|e| &e.tensor).collect();
        for proof in &pooled {
            any_proof = true;
            let mut delta = delta_of_proof(proof, lexicon.atoms())?;
            if options.corrupt {
                delta = rewire(&delta);
            }
            let map = categorical_eval_with_cap::<f64>(proof, lexicon.atoms(), cap)?;

            let via_delta = contract(&delta, &inputs)?;
            let joined = outer_all(&inputs);
            let via_matrix = map.apply(&joined)?;
            let deviation_on_inputs =
                via_delta.flatten().max_abs_diff(&via_matrix)?;
            max_deviation = max_deviation.max(deviation_on_inputs);

            let deviation_on_basis = if options.basis {
                let dm = delta_matrix::<f64>(&delta);
                let dev = dm.max_abs_diff(map.matrix())?;
                max_deviation = max_deviation.max(dev);
                Some(dev)
            } else {
                None
            };

            checks.push(ProofCheck {
                proof: proof.to_sexpr(),
                deviation_on_inputs,
                deviation_on_basis,
            });
        }
    }

    let sequent = first_sequent.unwrap_or_default();
    if !any_proof {
        return Err(PipelineError::Underivable { sequent });
    }
    Ok(CheckReport {
        sequent,
        tolerance,
        max_deviation,
        passed: max_deviation <= tolerance,
        checks,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn outer_all(inputs: &[&DenseTensor<f64>]) -> DenseTensor<f64> {
    let mut joined = DenseTensor::scalar(1.0).expect("finite");
    for t in inputs {
        joined = joined.outer(t);
    }
    joined.flatten()
}

/// Swaps the partners of the first two same-space links, producing a valid
/// but wrongly wired delta. Falls back to attaching a spurious trace loop
/// when the delta has no two such links.
fn rewire(delta: &Delta) -> Delta {
    let pairs = delta.pairs();
    let mut candidates = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        if p.a != p.b {
            candidates.push((i, p.clone()));
        }
    }
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            let (pi, pj) = (&candidates[i].1, &candidates[j].1);
            if pi.space == pj.space {
                let mut new_pairs: Vec<crate::delta::Pair> = pairs.to_vec();
                new_pairs[candidates[i].0].b = pj.b;
                new_pairs[candidates[j].0].b = pi.b;
                return Delta::from_parts(
                    new_pairs,
                    delta.domain().to_vec(),
                    delta.codomain().to_vec(),
                )
                .expect("swap keeps the matching perfect");
            }
        }
    }
    delta.with_extra_loop()
}

// ---------------------------------------------------------------------------
// Reading comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityEntry {
    pub left: usize,
    pub right: usize,
    pub cosine: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub run: RunReport,
    /// Pairwise cosine similarities `(i, j, cos)` with `i < j`, in index
    /// order.
    pub similarities: Vec<SimilarityEntry>,
}

/// Derives the sentence and reports pairwise cosine similarities between
/// reading vectors. Needs at least two readings.
pub fn run_compare(
    lexicon: &Lexicon,
    words: &[String],
    goal: &Formula,
    options: &DeriveOptions,
) -> Result<CompareReport, PipelineError> {
    let run = run_derive(lexicon, words, goal, options)?;
    if run.readings.len() < 2 {
        return Err(PipelineError::TooFewReadings { found: run.readings.len() });
    }
    let tensors: Vec<DenseTensor<f64>> = run
        .readings
        .iter()
        .map(|r| DenseTensor::from_vec(r.result_shape.clone(), r.result.clone()))
        .collect::<Result<_, _>>()?;
    let mut similarities = Vec::new();
    for i in 0..tensors.len() {
        for j in i + 1..tensors.len() {
            let value = cosine(&tensors[i].flatten(), &tensors[j].flatten())?;
            similarities.push(SimilarityEntry { left: i, right: j, cosine: value });
        }
    }
    Ok(CompareReport { run, similarities })
}

/// Re-evaluates a reading reported over the wire; used by round-trip tests
/// and external consumers of structured output.
pub fn reading_delta(report: &ReadingReport) -> Result<Delta, PipelineError> {
    Ok(Delta::from_wire(&report.delta)?)
}

/// Checks that two wire deltas describe alpha-equivalent readings.
pub fn wire_alpha_equiv(a: &WireDelta, b: &WireDelta) -> Result<bool, PipelineError> {
    Ok(alpha_equiv(&Delta::from_wire(a)?, &Delta::from_wire(b)?))
}

/// Contraction entry point re-exported for report consumers that hold a
/// wire-level delta.
pub fn evaluate_wire(
    wire: &WireDelta,
    inputs: &[&DenseTensor<f64>],
) -> Result<DenseTensor<f64>, PipelineError> {
    Ok(contract(&Delta::from_wire(wire)?, inputs)?)
}
