//! Shared helpers for the integration suites: a brute-force contraction
//! oracle, random delta/tensor generators, and a tiny deterministic RNG.

#![allow(dead_code)]

use nldelta::delta::{Delta, IndexVar, Pair, RawDelta, SlotRef};
use nldelta::formula::BaseSpace;
use nldelta::lexicon::SplitMix64;
use nldelta::tensor::DenseTensor;

pub struct TestRng(pub SplitMix64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(SplitMix64::new(seed))
    }

    pub fn f64(&mut self) -> f64 {
        self.0.next_f64()
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: usize) -> usize {
        (self.0.next_u64() % bound as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + self.below(hi_inclusive - lo + 1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for k in (1..items.len()).rev() {
            items.swap(k, self.below(k + 1));
        }
    }
}

pub fn random_tensor(rng: &mut TestRng, shape: Vec<usize>) -> DenseTensor<f64> {
    let len = shape.iter().product();
    let data = (0..len).map(|_| 2.0 * rng.f64() - 1.0).collect();
    DenseTensor::from_vec(shape, data).expect("finite by construction")
}

/// A random normal-form delta over the given spaces: a perfect matching
/// built pair-first, plus a few trace loops.
pub fn random_normal_delta(rng: &mut TestRng, spaces: &[BaseSpace]) -> Delta {
    let n_pairs = rng.range(1, 5);
    let n_loops = rng.range(0, 2);

    // Each pair drops one endpoint on a random side; slots are then shuffled
    // within each side so edges cross arbitrarily.
    let mut dom_slots: Vec<(usize, BaseSpace)> = Vec::new(); // (pair id, space)
    let mut cod_slots: Vec<(usize, BaseSpace)> = Vec::new();
    for pair_id in 0..n_pairs {
        let space = spaces[rng.below(spaces.len())].clone();
        for _ in 0..2 {
            if rng.below(2) == 0 {
                dom_slots.push((pair_id, space.clone()));
            } else {
                cod_slots.push((pair_id, space.clone()));
            }
        }
    }
    rng.shuffle(&mut dom_slots);
    rng.shuffle(&mut cod_slots);

    let mut ends: Vec<Vec<SlotRef>> = vec![Vec::new(); n_pairs];
    for (k, (pair_id, _)) in dom_slots.iter().enumerate() {
        ends[*pair_id].push(SlotRef::Dom(k));
    }
    for (k, (pair_id, _)) in cod_slots.iter().enumerate() {
        ends[*pair_id].push(SlotRef::Cod(k));
    }
    let edges: Vec<(SlotRef, SlotRef)> = ends.into_iter().map(|e| (e[0], e[1])).collect();
    let loops: Vec<BaseSpace> =
        (0..n_loops).map(|_| spaces[rng.below(spaces.len())].clone()).collect();

    Delta::from_edges(
        dom_slots.into_iter().map(|(_, s)| s).collect(),
        cod_slots.into_iter().map(|(_, s)| s).collect(),
        &edges,
        &loops,
    )
    .expect("matching is perfect by construction")
}

/// A random normal-form delta whose domain is exactly `domain`: same-space
/// domain slots are paired off at random, the leftovers connect to fresh
/// codomain slots, and a few codomain-only pairs and loops are appended.
pub fn random_delta_from(
    rng: &mut TestRng,
    domain: &[BaseSpace],
    spaces: &[BaseSpace],
) -> Delta {
    let mut groups: Vec<(BaseSpace, Vec<usize>)> = Vec::new();
    for (k, space) in domain.iter().enumerate() {
        match groups.iter_mut().find(|(s, _)| s == space) {
            Some((_, slots)) => slots.push(k),
            None => groups.push((space.clone(), vec![k])),
        }
    }

    let mut edges: Vec<(SlotRef, SlotRef)> = Vec::new();
    let mut cod: Vec<BaseSpace> = Vec::new();
    let mut pending: Vec<(usize, BaseSpace)> = Vec::new(); // dom slot -> cod slot
    for (space, mut slots) in groups {
        rng.shuffle(&mut slots);
        while let Some(a) = slots.pop() {
            if !slots.is_empty() && rng.below(2) == 0 {
                let b = slots.pop().expect("non-empty");
                edges.push((SlotRef::Dom(a), SlotRef::Dom(b)));
            } else {
                pending.push((a, space.clone()));
            }
        }
    }
    rng.shuffle(&mut pending);
    for (dom_slot, space) in pending {
        edges.push((SlotRef::Dom(dom_slot), SlotRef::Cod(cod.len())));
        cod.push(space);
    }
    for _ in 0..rng.range(0, 2) {
        let space = spaces[rng.below(spaces.len())].clone();
        edges.push((SlotRef::Cod(cod.len()), SlotRef::Cod(cod.len() + 1)));
        cod.push(space.clone());
        cod.push(space);
    }
    let loops: Vec<BaseSpace> =
        (0..rng.range(0, 1)).map(|_| spaces[rng.below(spaces.len())].clone()).collect();

    Delta::from_edges(domain.to_vec(), cod, &edges, &loops)
        .expect("matching is perfect by construction")
}

/// Un-normalizes a delta: subdivides links with chains of internal indices
/// and adds closed internal cycles, both of which `normalize` must undo.
/// Returns the raw delta and the spaces of the added cycles (each must
/// surface as one extra trace loop after normalization).
pub fn scramble(
    rng: &mut TestRng,
    delta: &Delta,
    spaces: &[BaseSpace],
) -> (RawDelta, Vec<BaseSpace>) {
    let mut next = fresh_base(delta);
    let mut fresh = || {
        next += 1;
        IndexVar(next - 1)
    };

    let mut pairs: Vec<Pair> = Vec::new();
    for pair in delta.pairs() {
        if pair.a == pair.b {
            pairs.push(pair.clone());
            continue;
        }
        // Chain a -x1- x2 ... -xk- b.
        let hops = rng.range(0, 3);
        let mut prev = pair.a;
        for _ in 0..hops {
            let mid = fresh();
            pairs.push(Pair { a: prev, b: mid, space: pair.space.clone() });
            prev = mid;
        }
        pairs.push(Pair { a: prev, b: pair.b, space: pair.space.clone() });
    }
    let mut cycles = Vec::new();
    for _ in 0..rng.range(0, 2) {
        // A closed internal cycle; it must normalize to one trace loop.
        let space = spaces[rng.below(spaces.len())].clone();
        let len = rng.range(2, 4);
        let ids: Vec<IndexVar> = (0..len).map(|_| fresh()).collect();
        for k in 0..len {
            pairs.push(Pair { a: ids[k], b: ids[(k + 1) % len], space: space.clone() });
        }
        cycles.push(space);
    }
    rng.shuffle(&mut pairs);
    let raw =
        RawDelta { pairs, domain: delta.domain().to_vec(), codomain: delta.codomain().to_vec() };
    (raw, cycles)
}

fn fresh_base(delta: &Delta) -> u64 {
    delta
        .pairs()
        .iter()
        .flat_map(|p| [p.a.0, p.b.0])
        .chain(delta.domain().iter().map(|s| s.index.0))
        .chain(delta.codomain().iter().map(|s| s.index.0))
        .max()
        .map_or(0, |m| m + 1)
}

/// Splits the domain slots into consecutive factor tensors at random and
/// fills them with random entries.
pub fn random_inputs(rng: &mut TestRng, delta: &Delta) -> Vec<DenseTensor<f64>> {
    let dims: Vec<usize> = delta.domain().iter().map(|s| s.space.dim).collect();
    let mut inputs = Vec::new();
    let mut start = 0;
    while start < dims.len() {
        let len = rng.range(1, (dims.len() - start).min(3));
        inputs.push(random_tensor(rng, dims[start..start + len].to_vec()));
        start += len;
    }
    if inputs.is_empty() {
        inputs.push(random_tensor(rng, vec![]));
    }
    inputs
}

/// Contraction by definition: sums over every joint assignment of domain and
/// codomain indices, weighting by the product of pair agreements. Loops
/// enumerate their own hidden index.
pub fn brute_contract(delta: &Delta, inputs: &[&DenseTensor<f64>]) -> DenseTensor<f64> {
    let dom_dims: Vec<usize> = delta.domain().iter().map(|s| s.space.dim).collect();
    let cod_dims: Vec<usize> = delta.codomain().iter().map(|s| s.space.dim).collect();

    let mut loop_factor = 1.0;
    let mut links: Vec<(SlotRef, SlotRef)> = Vec::new();
    for pair in delta.pairs() {
        if pair.a == pair.b {
            let mut hidden = 0.0;
            for _ in 0..pair.space.dim {
                hidden += 1.0; // δ_vv summed over its hidden index
            }
            loop_factor *= hidden;
        } else {
            links.push((slot_ref(delta, pair.a), slot_ref(delta, pair.b)));
        }
    }

    let mut out = DenseTensor::zeros(cod_dims.clone());
    let mut cod_idx = vec![0usize; cod_dims.len()];
    loop {
        let mut acc = 0.0;
        let mut dom_idx = vec![0usize; dom_dims.len()];
        loop {
            let lookup = |r: SlotRef| match r {
                SlotRef::Dom(k) => dom_idx[k],
                SlotRef::Cod(k) => cod_idx[k],
            };
            if links.iter().all(|&(x, y)| lookup(x) == lookup(y)) {
                acc += product_of_inputs(inputs, &dom_idx);
            }
            if !advance(&mut dom_idx, &dom_dims) {
                break;
            }
        }
        out.set(&cod_idx, acc * loop_factor).unwrap();
        if !advance(&mut cod_idx, &cod_dims) {
            break;
        }
    }
    out
}

fn slot_ref(delta: &Delta, index: IndexVar) -> SlotRef {
    if let Some(k) = delta.domain().iter().position(|s| s.index == index) {
        return SlotRef::Dom(k);
    }
    SlotRef::Cod(
        delta
            .codomain()
            .iter()
            .position(|s| s.index == index)
            .expect("pair end is a slot"),
    )
}

fn product_of_inputs(inputs: &[&DenseTensor<f64>], dom_idx: &[usize]) -> f64 {
    let mut product = 1.0;
    let mut offset = 0;
    for input in inputs {
        let rank = input.rank();
        product *= input.get(&dom_idx[offset..offset + rank]).unwrap();
        offset += rank;
    }
    product
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

/// Standard space pool for randomized suites.
pub fn space_pool(rng: &mut TestRng) -> Vec<BaseSpace> {
    vec![
        BaseSpace::new("N", rng.range(1, 3)),
        BaseSpace::new("S", rng.range(1, 3)),
    ]
}
