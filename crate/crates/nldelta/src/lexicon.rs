//! Word-to-tensor lexicons, loaded from a small line-oriented text format:
//!
//! ```text
//! # Base spaces and the atom interpretation.
//! space N 4
//! space S 3
//! atom np N
//! atom n N
//! atom s S
//!
//! # One entry per line: word, type, tensor source.
//! word mannen : n = seed 11
//! word poets : np = values [0.1, 0.2, 0.3, 0.4]
//! word die : (n\n)/(<>[]np\s) = recipe relpron
//! word filler : s = ones
//! ```
//!
//! Sources: `seed <u64>` fills the tensor with splitmix64 uniforms, `values
//! [..]` gives row-major entries explicitly, `ones` fills with 1.0, and
//! `recipe relpron [lambda]` builds the Frobenius relative-pronoun tensor.
//! Tensors are resolved eagerly at load time; a word may have several entries
//! (homonyms), kept in file order.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use thiserror::Error;

use crate::formula::{AtomMap, BaseSpace, Formula, SpaceSignature};
use crate::tensor::{relpron_tensor, DenseTensor};
use crate::Tensor64;

/// The splitmix64 generator; fills seeded lexicon tensors.
///
/// Uniform doubles in `[0, 1)` take the top 53 bits: `(z >> 11) * 2^-53`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// How a lexicon entry's tensor is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorSource {
    Seed(u64),
    Values(Vec<f64>),
    Ones,
    Recipe(Recipe),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recipe {
    /// `(1 ⊗ μ ⊗ 1 ⊗ ζ) ∘ (η ⊗ η)`: copies the head noun through the clause
    /// and discards the clause's sentence dimension. Requires a signature of
    /// the form `X⊗X⊗X⊗Y`.
    Relpron { lambda: f64 },
}

/// One word entry with its resolved tensor.
#[derive(Debug, Clone)]
pub struct LexiconEntry {
    pub word: String,
    pub formula: Formula,
    pub signature: SpaceSignature,
    pub source: TensorSource,
    pub tensor: Tensor64,
}

/// Load-time adjustments, used by the CLI's `--seed-override` and `--dims`.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// XORed into every `seed` source before generation.
    pub seed_override: Option<u64>,
    /// Replacement dimensions for declared spaces, by label.
    pub space_dims: Vec<(String, usize)>,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    atoms: AtomMap,
    spaces: BTreeMap<String, usize>,
    entries: Vec<LexiconEntry>,
    by_word: HashMap<String, Vec<usize>>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: space `{label}` is not declared")]
    UnknownSpace { line: usize, label: String },
    #[error("line {line}: `{word}` needs {expected} values for shape {shape:?}, got {found}")]
    ValueCount { line: usize, word: String, expected: usize, found: usize, shape: Vec<usize> },
    #[error("line {line}: unknown recipe `{name}`")]
    UnknownRecipe { line: usize, name: String },
    #[error("line {line}: recipe {recipe} does not fit `{word}`: {msg}")]
    RecipeShape { line: usize, recipe: &'static str, word: String, msg: String },
    #[error("word `{word}` is not in the lexicon")]
    UnknownWord { word: String },
}

impl Lexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        Self::load_with(path, &LoadOptions::default())
    }

    pub fn load_with(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Lexicon, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_with(&text, options)
    }

    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        Self::parse_with(text, &LoadOptions::default())
    }

    pub fn parse_with(text: &str, options: &LoadOptions) -> Result<Lexicon, LexiconError> {
        let mut lexicon = Lexicon {
            atoms: AtomMap::new(),
            spaces: BTreeMap::new(),
            entries: Vec::new(),
            by_word: HashMap::new(),
        };
        let dim_override: HashMap<&str, usize> =
            options.space_dims.iter().map(|(label, dim)| (label.as_str(), *dim)).collect();

        for (k, raw_line) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| LexiconError::Parse { line, msg };
            let (directive, rest) = match content.split_once(char::is_whitespace) {
                Some((d, r)) => (d, r.trim()),
                None => (content, ""),
            };
            match directive {
                "space" => {
                    let mut parts = rest.split_whitespace();
                    let label = parts
                        .next()
                        .ok_or_else(|| err("expected `space <label> <dim>`".into()))?;
                    let dim: usize = parts
                        .next()
                        .ok_or_else(|| err("expected `space <label> <dim>`".into()))?
                        .parse()
                        .map_err(|_| err(format!("bad dimension for space `{label}`")))?;
                    if parts.next().is_some() {
                        return Err(err("trailing input after space declaration".into()));
                    }
                    if dim == 0 {
                        return Err(err(format!("space `{label}` must have dimension >= 1")));
                    }
                    let dim = dim_override.get(label).copied().unwrap_or(dim);
                    lexicon.spaces.insert(label.to_string(), dim);
                }
                "atom" => {
                    let mut parts = rest.split_whitespace();
                    let (name, label) = match (parts.next(), parts.next(), parts.next()) {
                        (Some(n), Some(l), None) => (n, l),
                        _ => return Err(err("expected `atom <name> <space>`".into())),
                    };
                    let dim = *lexicon.spaces.get(label).ok_or(LexiconError::UnknownSpace {
                        line,
                        label: label.to_string(),
                    })?;
                    lexicon.atoms.insert(name, BaseSpace::new(label, dim));
                }
                "word" => {
                    let entry = lexicon.parse_word(line, rest, options)?;
                    let index = lexicon.entries.len();
                    lexicon.by_word.entry(entry.word.clone()).or_default().push(index);
                    lexicon.entries.push(entry);
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        Ok(lexicon)
    }

    fn parse_word(
        &self,
        line: usize,
        rest: &str,
        options: &LoadOptions,
    ) -> Result<LexiconEntry, LexiconError> {
        let err = |msg: String| LexiconError::Parse { line, msg };
        let (word, rest) = rest
            .split_once(':')
            .ok_or_else(|| err("expected `word <name> : <type> = <source>`".into()))?;
        let word = word.trim().to_string();
        if word.is_empty() {
            return Err(err("empty word name".into()));
        }
        let (type_text, source_text) = rest
            .split_once('=')
            .ok_or_else(|| err("expected `= <source>` after the type".into()))?;
        let formula: Formula = type_text
            .trim()
            .parse()
            .map_err(|e| err(format!("bad type for `{word}`: {e}")))?;
        let signature = formula
            .interpret(&self.atoms)
            .map_err(|e| err(format!("bad type for `{word}`: {e}")))?;
        let source = parse_source(line, source_text.trim())?;
        let tensor = self.resolve_tensor(line, &word, &signature, &source, options)?;
        Ok(LexiconEntry { word, formula, signature, source, tensor })
    }

    fn resolve_tensor(
        &self,
        line: usize,
        word: &str,
        signature: &SpaceSignature,
        source: &TensorSource,
        options: &LoadOptions,
    ) -> Result<Tensor64, LexiconError> {
        let shape = signature.dims();
        let total = signature.total_dim();
        let tensor = match source {
            TensorSource::Seed(seed) => {
                let effective = match options.seed_override {
                    Some(mask) => seed ^ mask,
                    None => *seed,
                };
                let mut rng = SplitMix64::new(effective);
                let data: Vec<f64> = (0..total).map(|_| rng.next_f64()).collect();
                DenseTensor::from_vec(shape, data)
            }
            TensorSource::Values(values) => {
                if values.len() != total {
                    return Err(LexiconError::ValueCount {
                        line,
                        word: word.to_string(),
                        expected: total,
                        found: values.len(),
                        shape,
                    });
                }
                DenseTensor::from_vec(shape, values.clone())
            }
            TensorSource::Ones => DenseTensor::from_vec(shape, vec![1.0; total]),
            TensorSource::Recipe(Recipe::Relpron { lambda }) => {
                let comps = signature.components();
                let fits = comps.len() == 4
                    && comps[0] == comps[1]
                    && comps[0] == comps[2];
                if !fits {
                    return Err(LexiconError::RecipeShape {
                        line,
                        recipe: "relpron",
                        word: word.to_string(),
                        msg: format!(
                            "signature {signature} is not of the form X⊗X⊗X⊗Y"
                        ),
                    });
                }
                relpron_tensor(comps[0].dim, comps[3].dim, *lambda)
            }
        };
        tensor.map_err(|e| LexiconError::Parse { line, msg: format!("`{word}`: {e}") })
    }

    pub fn atoms(&self) -> &AtomMap {
        &self.atoms
    }

    pub fn space_dim(&self, label: &str) -> Option<usize> {
        self.spaces.get(label).copied()
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// All entries for a word, in file order.
    pub fn resolve(&self, word: &str) -> Result<Vec<&LexiconEntry>, LexiconError> {
        match self.by_word.get(word) {
            Some(indices) => Ok(indices.iter().map(|&k| &self.entries[k]).collect()),
            None => Err(LexiconError::UnknownWord { word: word.to_string() }),
        }
    }
}

fn parse_source(line: usize, text: &str) -> Result<TensorSource, LexiconError> {
    let err = |msg: String| LexiconError::Parse { line, msg };
    let (kind, rest) = match text.split_once(char::is_whitespace) {
        Some((k, r)) => (k, r.trim()),
        None => (text, ""),
    };
    match kind {
        "seed" => {
            let seed: u64 =
                rest.parse().map_err(|_| err(format!("bad seed `{rest}`")))?;
            Ok(TensorSource::Seed(seed))
        }
        "ones" => {
            if rest.is_empty() {
                Ok(TensorSource::Ones)
            } else {
                Err(err("trailing input after `ones`".into()))
            }
        }
        "values" => {
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| err("expected `values [v1, v2, …]`".into()))?;
            let values = inner
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<f64>().map_err(|_| err(format!("bad value `{v}`"))))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(TensorSource::Values(values))
        }
        "recipe" => {
            let mut parts = rest.split_whitespace();
            let name = parts.next().ok_or_else(|| err("expected a recipe name".into()))?;
            match name {
                "relpron" => {
                    let lambda = match parts.next() {
                        Some(raw) => raw
                            .parse::<f64>()
                            .map_err(|_| err(format!("bad relpron weight `{raw}`")))?,
                        None => 1.0,
                    };
                    if parts.next().is_some() {
                        return Err(err("trailing input after recipe".into()));
                    }
                    Ok(TensorSource::Recipe(Recipe::Relpron { lambda }))
                }
                other => Err(LexiconError::UnknownRecipe { line, name: other.to_string() }),
            }
        }
        other => Err(err(format!("unknown tensor source `{other}`"))),
    }
}
