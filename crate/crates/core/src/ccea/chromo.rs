//! Test chromosomes: fixed-multiset permutations of GUI actions.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use super::ops::{crossover_strings, mutate_string};
use crate::sampler::Domain;
use crate::sim::Action;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Click,
    Type,
}

impl Label {
    pub fn of(a: &Action) -> Label {
        match a {
            Action::Click { .. } => Label::Click,
            Action::Type(_) => Label::Type,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChromosomeError {
    #[error("parents have different event-label counts")]
    LabelCountMismatch,
    #[error("crossover needs between 1 and {max} positions, got {got}")]
    BadPositions { got: usize, max: usize },
}

/// Bounds every action gene must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSpace {
    pub width: u32,
    pub height: u32,
    /// Domain of typed strings.
    pub text: Domain,
}

impl GeneSpace {
    pub fn contains(&self, a: &Action) -> bool {
        match a {
            Action::Click { x, y } => *x < self.width && *y < self.height,
            Action::Type(s) => self.text.contains(&crate::value::Value::Str(s.clone())),
        }
    }

    pub fn random_action<R: Rng>(&self, label: Label, rng: &mut R) -> Action {
        match label {
            Label::Click => Action::Click { x: rng.random_range(0..self.width), y: rng.random_range(0..self.height) },
            Label::Type => Action::Type(self.text.random_string(rng)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestChromosome {
    pub genes: Vec<Action>,
}

impl fmt::Display for TestChromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.genes.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Cut point of a single-point crossover on one gene pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cut {
    /// Prefix lengths kept from the first and second string.
    Text(usize, usize),
    /// Number of leading coordinates kept: 0 swaps both, 2 swaps none.
    Click(usize),
}

impl TestChromosome {
    /// A random permutation of `clicks` click actions and `types` type
    /// actions with random parameters.
    pub fn random<R: Rng>(clicks: usize, types: usize, space: &GeneSpace, rng: &mut R) -> TestChromosome {
        let mut labels: Vec<Label> =
            std::iter::repeat_n(Label::Click, clicks).chain(std::iter::repeat_n(Label::Type, types)).collect();
        labels.shuffle(rng);
        TestChromosome { genes: labels.into_iter().map(|l| space.random_action(l, rng)).collect() }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// `(clicks, types)`.
    pub fn label_counts(&self) -> (usize, usize) {
        let clicks = self.genes.iter().filter(|g| Label::of(g) == Label::Click).count();
        (clicks, self.genes.len() - clicks)
    }

    /// Position of the `k`-th gene with `label`.
    fn nth_of(&self, label: Label, k: usize) -> usize {
        self.genes
            .iter()
            .enumerate()
            .filter(|(_, g)| Label::of(g) == label)
            .nth(k)
            .map(|(i, _)| i)
            .expect("label counts checked")
    }
}

/// Crossover at explicit `(label, label-relative index, cut)` positions.
pub fn crossover_at(
    a: &TestChromosome,
    b: &TestChromosome,
    picks: &[(Label, usize, Cut)],
    space: &GeneSpace,
) -> Result<(TestChromosome, TestChromosome), ChromosomeError> {
    if a.label_counts() != b.label_counts() {
        return Err(ChromosomeError::LabelCountMismatch);
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    for &(label, k, cut) in picks {
        let (i, j) = (a.nth_of(label, k), b.nth_of(label, k));
        match (&a.genes[i], &b.genes[j], cut) {
            (Action::Type(s), Action::Type(t), Cut::Text(ca, cb)) => {
                let (u, w) = crossover_strings(s, t, ca, cb, space.text.max_str_len);
                x.genes[i] = Action::Type(u);
                y.genes[j] = Action::Type(w);
            }
            (Action::Click { x: ax, y: ay }, Action::Click { x: bx, y: by }, Cut::Click(c)) => {
                let (p, q) = match c {
                    0 => ((*bx, *by), (*ax, *ay)),
                    1 => ((*ax, *by), (*bx, *ay)),
                    _ => ((*ax, *ay), (*bx, *by)),
                };
                x.genes[i] = Action::Click { x: p.0, y: p.1 };
                y.genes[j] = Action::Click { x: q.0, y: q.1 };
            }
            _ => return Err(ChromosomeError::LabelCountMismatch),
        }
    }
    Ok((x, y))
}

/// Crossover on `l` distinct label-relative positions with random cuts.
pub fn crossover_tests<R: Rng>(
    a: &TestChromosome,
    b: &TestChromosome,
    l: usize,
    space: &GeneSpace,
    rng: &mut R,
) -> Result<(TestChromosome, TestChromosome), ChromosomeError> {
    let (clicks, types) = a.label_counts();
    if (clicks, types) != b.label_counts() {
        return Err(ChromosomeError::LabelCountMismatch);
    }
    let total = clicks + types;
    if l == 0 || l > total {
        return Err(ChromosomeError::BadPositions { got: l, max: total });
    }
    let slots: Vec<(Label, usize)> =
        (0..clicks).map(|k| (Label::Click, k)).chain((0..types).map(|k| (Label::Type, k))).collect();
    let picks: Vec<(Label, usize, Cut)> = rand::seq::index::sample(rng, total, l)
        .into_iter()
        .map(|s| {
            let (label, k) = slots[s];
            let cut = match label {
                Label::Click => Cut::Click(rng.random_range(0..3)),
                Label::Type => {
                    let (ga, gb) = (&a.genes[a.nth_of(label, k)], &b.genes[b.nth_of(label, k)]);
                    let ca = rng.random_range(0..=text_len(ga));
                    // Equal strings share the cut so the exchange is a no-op.
                    let cb = if ga == gb { ca } else { rng.random_range(0..=text_len(gb)) };
                    Cut::Text(ca, cb)
                }
            };
            (label, k, cut)
        })
        .collect();
    crossover_at(a, b, &picks, space)
}

fn text_len(a: &Action) -> usize {
    match a {
        Action::Type(s) => s.chars().count(),
        Action::Click { .. } => 0,
    }
}

/// Each gene mutates with probability `p_mut`: half the time its parameters
/// change (one redrawn coordinate, or one character edit), otherwise it
/// swaps places with another uniformly chosen gene.
pub fn mutate_test<R: Rng>(t: &TestChromosome, p_mut: f64, space: &GeneSpace, rng: &mut R) -> TestChromosome {
    let mut out = t.clone();
    let n = out.genes.len();
    for i in 0..n {
        if rng.random::<f64>() >= p_mut {
            continue;
        }
        if n > 1 && rng.random::<bool>() {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            out.genes.swap(i, j);
        } else {
            out.genes[i] = mutate_gene(&out.genes[i], space, rng);
        }
    }
    out
}

fn mutate_gene<R: Rng>(g: &Action, space: &GeneSpace, rng: &mut R) -> Action {
    match g {
        Action::Click { x, y } => {
            if rng.random::<bool>() {
                Action::Click { x: rng.random_range(0..space.width), y: *y }
            } else {
                Action::Click { x: *x, y: rng.random_range(0..space.height) }
            }
        }
        Action::Type(s) => Action::Type(mutate_string(s, &space.text, rng)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space() -> GeneSpace {
        GeneSpace { width: 128, height: 128, text: Domain::default() }
    }

    fn c(x: u32, y: u32) -> Action {
        Action::Click { x, y }
    }

    fn t(s: &str) -> Action {
        Action::Type(s.into())
    }

    fn example_parents() -> (TestChromosome, TestChromosome) {
        (
            TestChromosome { genes: vec![c(17, 5), c(51, 42), t("john"), c(6, 6)] },
            TestChromosome { genes: vec![c(4, 15), t("c4rl"), c(1, 22), c(9, 55)] },
        )
    }

    #[test]
    fn worked_crossover_example() {
        let (a, b) = example_parents();
        let picks = [(Label::Type, 0, Cut::Text(2, 2)), (Label::Click, 2, Cut::Click(0))];
        let (x, y) = crossover_at(&a, &b, &picks, &space()).unwrap();
        assert_eq!(x.genes, vec![c(17, 5), c(51, 42), t("jorl"), c(9, 55)]);
        assert_eq!(y.genes, vec![c(4, 15), t("c4hn"), c(1, 22), c(6, 6)]);
    }

    #[test]
    fn identity_cuts_leave_parents_unchanged() {
        let (a, b) = example_parents();
        let picks = [
            (Label::Click, 0, Cut::Click(2)),
            (Label::Click, 1, Cut::Click(2)),
            (Label::Click, 2, Cut::Click(2)),
            (Label::Type, 0, Cut::Text(4, 4)),
        ];
        assert_eq!(crossover_at(&a, &b, &picks, &space()).unwrap(), (a, b));
    }

    #[test]
    fn crossover_rejects_bad_inputs() {
        let (a, _) = example_parents();
        let other = TestChromosome { genes: vec![c(1, 1), t("x"), t("y"), c(2, 2)] };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(crossover_tests(&a, &other, 1, &space(), &mut rng), Err(ChromosomeError::LabelCountMismatch));
        assert_eq!(
            crossover_tests(&a, &a, 0, &space(), &mut rng),
            Err(ChromosomeError::BadPositions { got: 0, max: 4 })
        );
    }

    #[test]
    fn identical_parents_give_identical_offspring() {
        let (a, _) = example_parents();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (x, y) = crossover_tests(&a, &a, 2, &space(), &mut rng).unwrap();
            assert_eq!((&x, &y), (&a, &a));
        }
    }

    #[test]
    fn zero_mutation_probability_is_identity() {
        let (a, _) = example_parents();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(mutate_test(&a, 0.0, &space(), &mut rng), a);
    }

    #[test]
    fn double_swap_restores_order() {
        let (mut a, _) = example_parents();
        let orig = a.clone();
        a.genes.swap(0, 2);
        a.genes.swap(0, 2);
        assert_eq!(a, orig);
    }

    fn arb_chromosome(clicks: usize, types: usize) -> impl Strategy<Value = TestChromosome> {
        any::<u64>().prop_map(move |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            TestChromosome::random(clicks, types, &space(), &mut rng)
        })
    }

    proptest! {
        #[test]
        fn operators_preserve_labels_and_bounds(
            a in arb_chromosome(4, 1),
            b in arb_chromosome(4, 1),
            l in 1usize..=5,
            p in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sp = space();
            let (x, y) = crossover_tests(&a, &b, l, &sp, &mut rng).unwrap();
            for child in [x, y] {
                let m = mutate_test(&child, p, &sp, &mut rng);
                for ch in [&child, &m] {
                    prop_assert_eq!(ch.label_counts(), (4, 1));
                    prop_assert!(ch.genes.iter().all(|g| sp.contains(g)));
                }
            }
        }
    }
}
