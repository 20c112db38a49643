//! Randomized laws: printing/parsing, interpretation, wire round-trips,
//! the category axioms for delta composition, and contraction linearity.

mod common;

use proptest::prelude::*;

use nldelta::delta::{alpha_equiv, compose, Delta};
use nldelta::formula::{AtomMap, Formula};
use nldelta::tensor::{contract, cosine, DenseTensor};

use common::{random_delta_from, random_inputs, random_normal_delta, space_pool, TestRng};

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let atom = prop::sample::select(vec!["np", "n", "s", "a", "b"]).prop_map(Formula::atom);
    atom.prop_recursive(8, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::dia),
            inner.clone().prop_map(Formula::boxed),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::tensor(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::over(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::under(a, b)),
        ]
    })
}

fn test_atoms() -> AtomMap {
    AtomMap::from_entries([
        ("np", "N", 2),
        ("n", "N", 2),
        ("s", "S", 3),
        ("a", "A", 1),
        ("b", "B", 4),
    ])
}

proptest! {
    /// Printing is injective up to reparsing: every formula survives a
    /// display/parse round trip unchanged.
    #[test]
    fn display_then_parse_is_identity(formula in formula_strategy()) {
        let printed = formula.to_string();
        let reparsed: Formula = printed.parse()
            .map_err(|e| TestCaseError::fail(format!("`{printed}` failed to reparse: {e}")))?;
        prop_assert_eq!(reparsed, formula);
    }

    /// Interpretation is a homomorphism onto concatenation: every binary
    /// connective concatenates its components' signatures in written order,
    /// and the modalities are transparent.
    #[test]
    fn interpretation_concatenates_signatures(
        a in formula_strategy(),
        b in formula_strategy(),
        op in 0u8..5,
    ) {
        let atoms = test_atoms();
        let sig_a = a.interpret(&atoms).unwrap();
        let sig_b = b.interpret(&atoms).unwrap();
        let (combined, expected) = match op {
            0 => (Formula::tensor(a, b), sig_a.concat(&sig_b)),
            1 => (Formula::over(a, b), sig_a.concat(&sig_b)),
            2 => (Formula::under(a, b), sig_a.concat(&sig_b)),
            3 => (Formula::dia(a), sig_a),
            _ => (Formula::boxed(a), sig_a),
        };
        prop_assert_eq!(combined.interpret(&atoms).unwrap(), expected);
    }

    /// Serializing a delta to its wire form and back preserves it exactly:
    /// same slot spaces in the same order, same matching, same loops.
    #[test]
    fn wire_round_trip_preserves_the_delta(seed in any::<u64>()) {
        let mut rng = TestRng::new(seed);
        let spaces = space_pool(&mut rng);
        let delta = random_normal_delta(&mut rng, &spaces);

        let back = Delta::from_wire(&delta.to_wire())
            .map_err(|e| TestCaseError::fail(format!("round trip failed: {e}")))?;
        prop_assert_eq!(back.domain_signature(), delta.domain_signature());
        prop_assert_eq!(back.codomain_signature(), delta.codomain_signature());
        prop_assert_eq!(back.canonical_edges(), delta.canonical_edges());
        prop_assert!(alpha_equiv(&back, &delta));
    }

    /// Deltas under composition form a category: composition is associative
    /// and identities are neutral on both sides.
    #[test]
    fn composition_is_associative_and_unital(seed in any::<u64>()) {
        let mut rng = TestRng::new(seed);
        let spaces = space_pool(&mut rng);
        let f = random_normal_delta(&mut rng, &spaces);
        let g = random_delta_from(&mut rng, f.codomain_signature().components(), &spaces);
        let h = random_delta_from(&mut rng, g.codomain_signature().components(), &spaces);

        let gf = compose(&g, &f).unwrap();
        let hg = compose(&h, &g).unwrap();
        prop_assert!(
            alpha_equiv(&compose(&h, &gf).unwrap(), &compose(&hg, &f).unwrap()),
            "h∘(g∘f) differs from (h∘g)∘f"
        );

        let id_in = Delta::identity(&f.domain_signature());
        let id_out = Delta::identity(&f.codomain_signature());
        prop_assert!(alpha_equiv(&compose(&f, &id_in).unwrap(), &f), "f∘id differs from f");
        prop_assert!(alpha_equiv(&compose(&id_out, &f).unwrap(), &f), "id∘f differs from f");
    }

    /// Contraction is linear in each input factor.
    #[test]
    fn contraction_is_linear_in_each_factor(seed in any::<u64>()) {
        let mut rng = TestRng::new(seed);
        let spaces = space_pool(&mut rng);
        let delta = random_normal_delta(&mut rng, &spaces);
        let inputs = random_inputs(&mut rng, &delta);
        let slot = rng.below(inputs.len());

        let other = common::random_tensor(&mut rng, inputs[slot].shape().to_vec());
        let summed = DenseTensor::from_vec(
            inputs[slot].shape().to_vec(),
            inputs[slot].data().iter().zip(other.data()).map(|(&x, &y)| x + y).collect(),
        ).unwrap();

        let with = |replacement: &DenseTensor<f64>| -> DenseTensor<f64> {
            let refs: Vec<&DenseTensor<f64>> = inputs
                .iter()
                .enumerate()
                .map(|(k, t)| if k == slot { replacement } else { t })
                .collect();
            contract(&delta, &refs).unwrap()
        };

        let lhs = with(&summed);
        let rhs_a = with(&inputs[slot]);
        let rhs_b = with(&other);
        let rhs = DenseTensor::from_vec(
            rhs_a.shape().to_vec(),
            rhs_a.data().iter().zip(rhs_b.data()).map(|(&x, &y)| x + y).collect(),
        ).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    /// Cosine similarity stays in [-1, 1] and is 1 on any nonzero vector
    /// against itself.
    #[test]
    fn cosine_is_bounded_and_reflexive(
        u in prop::collection::vec(-100.0f64..100.0, 1..8),
        v in prop::collection::vec(-100.0f64..100.0, 1..8),
    ) {
        let n = u.len().min(v.len());
        let a = DenseTensor::from_vec(vec![n], u[..n].to_vec()).unwrap();
        let b = DenseTensor::from_vec(vec![n], v[..n].to_vec()).unwrap();
        let c = cosine(&a, &b).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c), "cosine {c} out of range");
        if a.data().iter().any(|&x| x != 0.0) {
            prop_assert!((cosine(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        }
    }
}
