//! Seeded random instances.
//!
//! * [`unrestricted`]: arbitrary probabilities and tables.
//! * [`small`]: rare atoms, tables thinned until every event is below its
//!   smallness threshold.
//! * [`lll`]: moderately rare atoms, usually thinned to the local lemma bound.
//! * [`moderate`]: rare-ish events that usually fail the smallness check.
//! * [`sparse_cube_system`]: constraint lines over `{0, 1, 2}^12`.

use std::ops::RangeInclusive;

use isect_core::rational::ratio;
use isect_core::{
    check_lll, check_smallness, Atom, CoordinateSpace, DependencyGraph, Event, ProductSpace,
    Rational,
};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub space: ProductSpace,
    pub events: Vec<Event>,
}

#[derive(Clone, Debug)]
pub struct Shape {
    pub coords: RangeInclusive<usize>,
    pub atoms: RangeInclusive<usize>,
    pub events: RangeInclusive<usize>,
    pub support: RangeInclusive<usize>,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            coords: 1..=10,
            atoms: 2..=3,
            events: 0..=8,
            support: 1..=3,
        }
    }
}

fn random_support(rng: &mut InstanceRng, m: usize, sizes: &RangeInclusive<usize>) -> Vec<usize> {
    let size = rng.gen_range(sizes.clone()).min(m);
    let mut support = rand::seq::index::sample(rng, m, size).into_vec();
    support.sort_unstable();
    support
}

fn table_len(space: &ProductSpace, support: &[usize]) -> usize {
    support.iter().map(|&j| space.coord(j).len()).product()
}

/// Atom-index tuples of a support in table order.
fn local_tuples(space: &ProductSpace, support: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(table_len(space, support));
    let mut local = vec![0usize; support.len()];
    loop {
        out.push(local.clone());
        let mut t = support.len();
        loop {
            if t == 0 {
                return out;
            }
            t -= 1;
            local[t] += 1;
            if local[t] < space.coord(support[t]).len() {
                break;
            }
            local[t] = 0;
        }
    }
}

fn tuple_probability(space: &ProductSpace, support: &[usize], local: &[usize]) -> Rational {
    support
        .iter()
        .zip(local)
        .fold(Rational::one(), |acc, (&j, &a)| {
            acc * &space.coord(j).probs()[a]
        })
}

/// Coordinates with random small-integer weights.
pub fn unrestricted(rng: &mut InstanceRng, shape: &Shape) -> Instance {
    let m = rng.gen_range(shape.coords.clone()).max(1);
    let coords = (0..m)
        .map(|j| {
            let d = rng.gen_range(shape.atoms.clone()).max(1);
            let weights: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=6)).collect();
            let total: i64 = weights.iter().sum();
            CoordinateSpace::new(
                format!("x{}", j + 1),
                (0..d as i64).map(Atom::Int).collect(),
                weights.iter().map(|&w| ratio(w, total)).collect(),
            )
            .expect("valid coordinate")
        })
        .collect();
    let space = ProductSpace::new(coords).expect("nonempty");
    let n = rng.gen_range(shape.events.clone());
    let events = (0..n)
        .map(|i| {
            let support = random_support(rng, m, &shape.support);
            let density = rng.gen_range(0.1..0.6);
            let table = (0..table_len(&space, &support))
                .map(|_| rng.gen_bool(density))
                .collect();
            Event::new(&space, format!("A{}", i + 1), support, table).expect("valid event")
        })
        .collect();
    Instance { space, events }
}

/// A coordinate with one common atom and rare atoms of probability about
/// `10^-e`, `e` drawn from `exponents`.
fn rare_coordinate(
    rng: &mut InstanceRng,
    name: String,
    atoms: usize,
    exponents: RangeInclusive<u32>,
) -> CoordinateSpace {
    let rare: Vec<Rational> = (1..atoms)
        .map(|_| {
            let e = rng.gen_range(exponents.clone());
            Rational::new(rng.gen_range(1..=3i64).into(), 10i64.pow(e).into())
        })
        .collect();
    let common = Rational::one() - rare.iter().fold(Rational::zero(), |a, b| a + b);
    let mut probs = vec![common];
    probs.extend(rare);
    CoordinateSpace::new(name, (0..atoms as i64).map(Atom::Int).collect(), probs)
        .expect("valid coordinate")
}

fn rare_instance(
    rng: &mut InstanceRng,
    m: RangeInclusive<usize>,
    n: RangeInclusive<usize>,
    exponents: RangeInclusive<u32>,
) -> Instance {
    let m = rng.gen_range(m);
    let coords = (0..m)
        .map(|j| {
            let atoms = rng.gen_range(2..=4);
            rare_coordinate(rng, format!("x{}", j + 1), atoms, exponents.clone())
        })
        .collect();
    let space = ProductSpace::new(coords).expect("nonempty");
    let n = rng.gen_range(n);
    let events = (0..n)
        .map(|i| {
            let support = random_support(rng, m, &(1..=3));
            // tuples made only of common atoms are never bad
            let table = local_tuples(&space, &support)
                .iter()
                .map(|t| t.iter().any(|&a| a != 0) && rng.gen_bool(0.5))
                .collect();
            Event::new(&space, format!("A{}", i + 1), support, table).expect("valid event")
        })
        .collect();
    Instance { space, events }
}

/// Removes the most likely bad tuples of event `i` until `P(A_i)` is below
/// `limit` (or at most `limit` when `strict` is false).
fn thin_event(space: &ProductSpace, event: &Event, limit: &Rational, strict: bool) -> Event {
    let support = event.support().to_vec();
    let tuples = local_tuples(space, &support);
    let probs: Vec<Rational> = tuples
        .iter()
        .map(|t| tuple_probability(space, &support, t))
        .collect();
    let mut table = event.table().to_vec();
    let mut total: Rational = table
        .iter()
        .zip(&probs)
        .filter(|(hit, _)| **hit)
        .fold(Rational::zero(), |a, (_, p)| a + p);
    let too_big = |total: &Rational| {
        if strict {
            total >= limit
        } else {
            total > limit
        }
    };
    let mut order: Vec<usize> = (0..table.len()).filter(|&t| table[t]).collect();
    order.sort_by(|&a, &b| probs[b].cmp(&probs[a]).then(a.cmp(&b)));
    for t in order {
        if !too_big(&total) {
            break;
        }
        table[t] = false;
        total -= &probs[t];
    }
    Event::new(space, event.name().to_string(), support, table).expect("valid event")
}

/// Thins events until `limit(i)` holds for all of them, recomputing the
/// graph as supports shrink. Events that become impossible are dropped.
fn thin_until(
    space: &ProductSpace,
    mut events: Vec<Event>,
    strict: bool,
    limit: impl Fn(&[Event], &DependencyGraph) -> Vec<Rational>,
) -> Vec<Event> {
    for _ in 0..32 {
        let graph = DependencyGraph::new(&events);
        let limits = limit(&events, &graph);
        let next: Vec<Event> = events
            .iter()
            .zip(&limits)
            .map(|(e, l)| thin_event(space, e, l, strict))
            .filter(|e| e.table().iter().any(|&b| b))
            .collect();
        if next == events {
            break;
        }
        events = next;
    }
    events
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.with_name(format!("A{}", i + 1)))
        .collect()
}

/// An instance passing the smallness check (strict inequality).
pub fn small(rng: &mut InstanceRng) -> Instance {
    loop {
        let Instance { space, events } = rare_instance(rng, 2..=8, 2..=10, 1..=5);
        let events = thin_until(&space, events, true, |events, graph| {
            (0..events.len())
                .map(|i| isect_core::model::smallness_threshold(graph.max_degree(), graph.mu(i)))
                .collect()
        });
        let graph = DependencyGraph::new(&events);
        if !events.is_empty() && check_smallness(&space, &events, &graph).passes {
            return Instance { space, events };
        }
    }
}

/// Instances for the local lemma check; three in four are thinned to the
/// bound `s_i prod (1 - s_j)` with `s = 1/Delta`.
pub fn lll(rng: &mut InstanceRng) -> Instance {
    let Instance { space, events } = rare_instance(rng, 2..=8, 1..=10, 1..=2);
    if rng.gen_bool(0.25) {
        return Instance { space, events };
    }
    let events = thin_until(&space, events, false, |events, graph| {
        let report = check_lll(&space, events, graph, None).expect("default weights are valid");
        report.events.into_iter().map(|e| e.bound).collect()
    });
    Instance { space, events }
}

/// Events with probability below a random cap in `[1/1000, 1/20]`; most of
/// these fail the smallness check.
pub fn moderate(rng: &mut InstanceRng) -> Instance {
    let Instance { space, events } = rare_instance(rng, 2..=8, 1..=8, 1..=3);
    let cap = ratio(1, rng.gen_range(20..=1000));
    let events = thin_until(&space, events, true, |events, _| {
        vec![cap.clone(); events.len()]
    });
    Instance { space, events }
}

/// `#{y in {0,1,2}^r : sum y <= s}`
fn lower_tail(r: usize, s: usize) -> u64 {
    let mut counts = vec![1u64];
    for _ in 0..r {
        let mut next = vec![0u64; counts.len() + 2];
        for (v, c) in counts.iter().enumerate() {
            for d in 0..3 {
                next[v + d] += c;
            }
        }
        counts = next;
    }
    counts.iter().take(s + 1).sum()
}

/// Constraint lines over `{0, 1, 2}^12`: one long sum constraint violated on
/// fewer than `3^12 / 3375` of the cube's points, plus up to five
/// constraints that hold on the whole cube.
pub fn sparse_cube_system(rng: &mut InstanceRng) -> Vec<String> {
    const DIM: usize = 12;
    let r = rng.gen_range(8..=DIM);
    let mut vars = rand::seq::index::sample(rng, DIM, r).into_vec();
    vars.sort_unstable();
    let total = 3u64.pow(r as u32);
    // largest t with #violations / 3^r < 1/3375
    let mut t = 1;
    while 3375 * lower_tail(r, t) < total {
        t += 1;
    }
    let sum = vars
        .iter()
        .map(|v| format!("x[{}]", v + 1))
        .collect::<Vec<_>>()
        .join(" + ");
    let mut lines = vec![if rng.gen_bool(0.5) {
        format!("{sum} <= {}", 2 * r - t)
    } else {
        format!("{sum} >= {t}")
    }];
    let extra = rng.gen_range(0..=5);
    for _ in 0..extra {
        let i = rng.gen_range(1..=DIM);
        let j = rng.gen_range(1..=DIM);
        let line = match rng.gen_range(0..4) {
            0 => format!("x[{i}] <= 2"),
            1 => format!("x[{i}] + x[{j}] <= 4"),
            2 => format!("x[{i}] - x[{j}] >= -2"),
            _ => format!("2 * x[{i}] + x[{j}] <= 6"),
        };
        lines.push(line);
    }
    lines.shuffle(rng);
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use isect_core::event_probability;

    fn total_probability(space: &ProductSpace, event: &Event) -> Rational {
        let support = event.support();
        local_tuples(space, support)
            .iter()
            .zip(event.table())
            .filter(|(_, hit)| **hit)
            .fold(Rational::zero(), |acc, (t, _)| {
                acc + tuple_probability(space, support, t)
            })
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = unrestricted(&mut rng(7), &Shape::default());
        let b = unrestricted(&mut rng(7), &Shape::default());
        assert_eq!(a, b);
        assert_eq!(small(&mut rng(3)), small(&mut rng(3)));
    }

    #[test]
    fn small_instances_pass() {
        let mut r = rng(11);
        for _ in 0..20 {
            let inst = small(&mut r);
            let graph = DependencyGraph::new(&inst.events);
            assert!(check_smallness(&inst.space, &inst.events, &graph).passes);
            assert!(inst.events.iter().all(|e| e.is_minimal(&inst.space)));
        }
    }

    #[test]
    fn tuple_sums_match_event_probability() {
        let mut r = rng(5);
        for _ in 0..20 {
            let inst = unrestricted(&mut r, &Shape::default());
            for e in &inst.events {
                assert_eq!(
                    total_probability(&inst.space, e),
                    event_probability(&inst.space, e)
                );
            }
        }
    }

    #[test]
    fn lower_tail_counts() {
        assert_eq!(lower_tail(12, 2), 91);
        assert_eq!(lower_tail(8, 0), 1);
        assert_eq!(lower_tail(1, 5), 3);
    }

    #[test]
    fn cube_systems_have_one_long_constraint() {
        let mut r = rng(1);
        for _ in 0..10 {
            let lines = sparse_cube_system(&mut r);
            assert!((1..=6).contains(&lines.len()));
            assert_eq!(
                lines
                    .iter()
                    .filter(|l| l.matches("x[").count() >= 8)
                    .count(),
                1
            );
        }
    }
}
