//! Exact joint probabilities of event intersections and the sums `sigma_k`.
//!
//! `P(A_{i_1} ∩ ... ∩ A_{i_k})` factors over the connected components of the
//! dependency subgraph induced by `{i_1, ..., i_k}`: events in different
//! components depend on disjoint coordinates. Each component is enumerated
//! once over the union of its supports and cached.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use spin::Mutex;

use crate::model::{DependencyGraph, Event, ProductSpace};
use crate::rational::Rational;
use crate::{Error, Result};

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 24;
pub const DEFAULT_SUBSET_BUDGET: u64 = 1 << 24;

/// Resource limits for enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of tuples enumerated for one component.
    pub enumeration: u64,
    /// Maximum `C(n, k)` for a single `sigma_k`.
    pub subsets: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            enumeration: DEFAULT_ENUMERATION_BUDGET,
            subsets: DEFAULT_SUBSET_BUDGET,
        }
    }
}

/// `P(A)`, summed over the support tuples of `A`.
pub fn event_probability(space: &ProductSpace, event: &Event) -> Rational {
    let support = event.support();
    if support.is_empty() {
        return if event.table()[0] {
            Rational::one()
        } else {
            Rational::zero()
        };
    }
    let mut local = vec![0usize; support.len()];
    let mut total = Rational::zero();
    for &hit in event.table() {
        if hit {
            let mut p = Rational::one();
            for (&j, &a) in support.iter().zip(&local) {
                p *= &space.coord(j).probs()[a];
            }
            total += p;
        }
        for t in (0..support.len()).rev() {
            local[t] += 1;
            if local[t] < space.coord(support[t]).len() {
                break;
            }
            local[t] = 0;
        }
    }
    total
}

/// Memoised joint probabilities over one fixed family of events.
///
/// The cache is keyed by the sorted event indices of a connected component
/// and tolerates concurrent use; racing writers store identical values.
pub struct JointProbability<'a> {
    space: &'a ProductSpace,
    events: &'a [Event],
    graph: &'a DependencyGraph,
    budget: u64,
    cache: Mutex<BTreeMap<Vec<usize>, Rational>>,
}

impl<'a> JointProbability<'a> {
    pub fn new(space: &'a ProductSpace, events: &'a [Event], graph: &'a DependencyGraph) -> Self {
        Self::with_budget(space, events, graph, DEFAULT_ENUMERATION_BUDGET)
    }

    pub fn with_budget(
        space: &'a ProductSpace,
        events: &'a [Event],
        graph: &'a DependencyGraph,
        budget: u64,
    ) -> Self {
        debug_assert_eq!(events.len(), graph.len());
        Self {
            space,
            events,
            graph,
            budget,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn events(&self) -> &'a [Event] {
        self.events
    }

    pub fn graph(&self) -> &'a DependencyGraph {
        self.graph
    }

    /// Number of cached components.
    pub fn cached(&self) -> usize {
        self.cache.lock().len()
    }

    /// `P(∩_{i in subset} A_i)`; the empty intersection has probability 1.
    pub fn joint(&self, subset: &[usize]) -> Result<Rational> {
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.events.len()) {
            return Err(Error::input(alloc::format!(
                "event index {bad} out of range (n = {})",
                self.events.len()
            )));
        }
        let mut product = Rational::one();
        for component in self.graph.components(subset) {
            let p = self.component(component)?;
            if p.is_zero() {
                return Ok(p);
            }
            product *= p;
        }
        Ok(product)
    }

    fn component(&self, key: Vec<usize>) -> Result<Rational> {
        if let Some(p) = self.cache.lock().get(&key) {
            return Ok(p.clone());
        }
        let p = if key.len() == 1 {
            event_probability(self.space, &self.events[key[0]])
        } else {
            enumerate_component(self.space, self.events, &key, self.budget)?
        };
        self.cache.lock().insert(key, p.clone());
        Ok(p)
    }
}

/// Sums the probability of every tuple over the union of the members'
/// supports that lies in all members.
fn enumerate_component(
    space: &ProductSpace,
    events: &[Event],
    members: &[usize],
    budget: u64,
) -> Result<Rational> {
    let mut coords: Vec<usize> = members
        .iter()
        .flat_map(|&i| events[i].support().iter().copied())
        .collect();
    coords.sort_unstable();
    coords.dedup();
    let size = space.tuple_count(&coords);
    if size > budget as u128 {
        return Err(Error::EnumerationBudget {
            component: members.to_vec(),
            size,
            budget,
        });
    }
    // An event is tested at the depth where its last support coordinate is
    // assigned; positions map its support into `coords`.
    let mut checks: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); coords.len()];
    for &i in members {
        let support = events[i].support();
        if support.is_empty() {
            if !events[i].table()[0] {
                return Ok(Rational::zero());
            }
            continue;
        }
        let positions: Vec<usize> = support
            .iter()
            .map(|j| coords.binary_search(j).expect("support is in the union"))
            .collect();
        checks[*positions.last().unwrap()].push((i, positions));
    }
    let walker = Walker {
        space,
        events,
        coords: &coords,
        checks: &checks,
    };
    let mut assignment = vec![0usize; coords.len()];
    let numer = walker.sum(0, &mut assignment);
    let denom = coords
        .iter()
        .fold(BigUint::one(), |acc, &j| acc * space.coord(j).denominator());
    Ok(Rational::new(BigInt::from(numer), BigInt::from(denom)))
}

struct Walker<'a> {
    space: &'a ProductSpace,
    events: &'a [Event],
    coords: &'a [usize],
    checks: &'a [Vec<(usize, Vec<usize>)>],
}

impl Walker<'_> {
    fn sum(&self, depth: usize, assignment: &mut [usize]) -> BigUint {
        if depth == self.coords.len() {
            return BigUint::one();
        }
        let coord = self.space.coord(self.coords[depth]);
        let mut total = BigUint::zero();
        let mut local = Vec::new();
        'atoms: for (a, w) in coord.weights().iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            assignment[depth] = a;
            for (i, positions) in &self.checks[depth] {
                local.clear();
                local.extend(positions.iter().map(|&p| assignment[p]));
                if !self.events[*i].contains_local(self.space, &local) {
                    continue 'atoms;
                }
            }
            let rest = self.sum(depth + 1, assignment);
            if !rest.is_zero() {
                total += w * rest;
            }
        }
        total
    }
}

/// `sigma_0 .. sigma_K` and the Taylor coefficients `a_k = (-1)^k sigma_k` of
/// `p(z) = E[prod_i (1 - z [A_i])]` at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionSeries {
    sigma: Vec<Rational>,
    coeffs: Vec<Rational>,
}

impl IntersectionSeries {
    pub fn order(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn sigma(&self) -> &[Rational] {
        &self.sigma
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `sum_k a_k`, i.e. `p(1)` when the order equals the number of events.
    pub fn sum_coeffs(&self) -> Rational {
        self.coeffs.iter().cloned().sum()
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        // exact at every step: acc * (n - t) is divisible by t + 1
        acc = match acc.checked_mul((n - t) as u128) {
            Some(v) => v / (t as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Computes `sigma_k` for `k = 0..=order` by walking k-subsets in
/// lexicographic order.
pub fn sigma_series(
    engine: &JointProbability<'_>,
    order: usize,
    subset_budget: u64,
) -> Result<IntersectionSeries> {
    let n = engine.events().len();
    if order > n {
        return Err(Error::input(alloc::format!(
            "series order {order} exceeds the number of events {n}"
        )));
    }
    let mut sigma = vec![Rational::one()];
    for k in 1..=order {
        let count = binomial(n, k);
        if count > subset_budget as u128 {
            return Err(Error::SubsetBudget {
                k,
                count,
                budget: subset_budget,
            });
        }
        let mut subset: Vec<usize> = (0..k).collect();
        let mut total = Rational::zero();
        loop {
            total += engine.joint(&subset)?;
            if !next_combination(&mut subset, n) {
                break;
            }
        }
        sigma.push(total);
    }
    let coeffs = sigma
        .iter()
        .enumerate()
        .map(|(k, s)| if k % 2 == 0 { s.clone() } else { -s.clone() })
        .collect();
    Ok(IntersectionSeries { sigma, coeffs })
}

/// Advances a sorted k-subset of `0..n` to its lexicographic successor.
pub(crate) fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for t in (0..k).rev() {
        if subset[t] < n - k + t {
            subset[t] += 1;
            for u in (t + 1)..k {
                subset[u] = subset[u - 1] + 1;
            }
            return true;
        }
    }
    false
}
