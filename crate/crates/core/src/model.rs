//! Product spaces, events with minimal coordinate support, the dependency
//! graph between events and the two admissibility checks (the smallness
//! threshold `(3 Delta)^(-3 mu_i)` and the Lovász Local Lemma condition).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::joint::event_probability;
use crate::rational::{common_denominator, pow, Rational};
use crate::{Error, Result};

/// A value a coordinate can take. Only integer atoms can be used in
/// predicate arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Atom {
    Int(i64),
    Label(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(v) => write!(f, "{v}"),
            Atom::Label(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Atom {
    fn from(v: i64) -> Self {
        Atom::Int(v)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::Label(s.into())
    }
}

/// One finite factor of the product space.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateSpace {
    name: String,
    atoms: Vec<Atom>,
    probs: Vec<Rational>,
    // probs[a] == weights[a] / denominator
    weights: Vec<BigUint>,
    denominator: BigUint,
}

impl CoordinateSpace {
    pub fn new(name: impl Into<String>, atoms: Vec<Atom>, probs: Vec<Rational>) -> Result<Self> {
        let name = name.into();
        if atoms.is_empty() {
            return Err(Error::input(format!("coordinate {name:?} has no atoms")));
        }
        if atoms.len() != probs.len() {
            return Err(Error::input(format!(
                "coordinate {name:?}: {} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        let distinct: BTreeSet<&Atom> = atoms.iter().collect();
        if distinct.len() != atoms.len() {
            return Err(Error::input(format!("coordinate {name:?} repeats an atom")));
        }
        if probs.iter().any(|p| *p < Rational::zero()) {
            return Err(Error::input(format!(
                "coordinate {name:?} has a negative probability"
            )));
        }
        let total: Rational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::input(format!(
                "coordinate {name:?}: probabilities sum to {total}, not 1"
            )));
        }
        let (weights, denominator) = common_denominator(&probs);
        Ok(Self {
            name,
            atoms,
            probs,
            weights,
            denominator,
        })
    }

    pub fn uniform(name: impl Into<String>, atoms: Vec<Atom>) -> Result<Self> {
        let n = atoms.len().max(1) as i64;
        let probs = vec![crate::rational::ratio(1, n); atoms.len()];
        Self::new(name, atoms, probs)
    }

    /// Uniform coordinate over the integers `0..=c`.
    pub fn integer_range(name: impl Into<String>, c: i64) -> Result<Self> {
        Self::uniform(name, (0..=c).map(Atom::Int).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index_of(&self, atom: &Atom) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }

    pub(crate) fn weights(&self) -> &[BigUint] {
        &self.weights
    }

    pub(crate) fn denominator(&self) -> &BigUint {
        &self.denominator
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductSpace {
    coords: Vec<CoordinateSpace>,
}

impl ProductSpace {
    pub fn new(coords: Vec<CoordinateSpace>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input(
                "a product space needs at least one coordinate",
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[CoordinateSpace] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> &CoordinateSpace {
        &self.coords[j]
    }

    /// Number of coordinates `m`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of tuples over the given coordinates, saturating at `u128::MAX`.
    pub fn tuple_count(&self, coords: &[usize]) -> u128 {
        coords.iter().fold(1u128, |acc, &j| {
            acc.saturating_mul(self.coords[j].len() as u128)
        })
    }
}

/// An event `A` given by its truth table over its support coordinates.
///
/// Support indices are 0-based and strictly increasing. The table is laid out
/// row-major over the support, the last support coordinate varying fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    name: String,
    support: Vec<usize>,
    table: Vec<bool>,
}

impl Event {
    /// Builds an event and projects out every coordinate the table does not
    /// depend on.
    pub fn new(
        space: &ProductSpace,
        name: impl Into<String>,
        support: Vec<usize>,
        table: Vec<bool>,
    ) -> Result<Self> {
        let raw = Self::unnormalized(space, name, support, table)?;
        Ok(normalize_support(space, &raw))
    }

    /// Builds an event exactly as given; the support may be larger than the
    /// set of coordinates the table depends on.
    pub fn unnormalized(
        space: &ProductSpace,
        name: impl Into<String>,
        support: Vec<usize>,
        table: Vec<bool>,
    ) -> Result<Self> {
        let name = name.into();
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input(format!(
                "event {name:?}: support must be strictly increasing"
            )));
        }
        if let Some(&j) = support.iter().find(|&&j| j >= space.dim()) {
            return Err(Error::input(format!(
                "event {name:?}: coordinate {} out of range (m = {})",
                j + 1,
                space.dim()
            )));
        }
        let expected = space.tuple_count(&support);
        if table.len() as u128 != expected {
            return Err(Error::input(format!(
                "event {name:?}: table has {} entries, expected {expected}",
                table.len()
            )));
        }
        Ok(Self {
            name,
            support,
            table,
        })
    }

    /// Event given by the list of satisfying tuples over `vars` (0-based,
    /// any order, distinct).
    pub fn from_tuples(
        space: &ProductSpace,
        name: impl Into<String>,
        vars: &[usize],
        tuples: &[Vec<Atom>],
    ) -> Result<Self> {
        let name = name.into();
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by_key(|&t| vars[t]);
        let support: Vec<usize> = order.iter().map(|&t| vars[t]).collect();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input(format!("event {name:?}: repeated variable")));
        }
        if let Some(&j) = support.iter().find(|&&j| j >= space.dim()) {
            return Err(Error::input(format!(
                "event {name:?}: coordinate {} out of range (m = {})",
                j + 1,
                space.dim()
            )));
        }
        let size = space.tuple_count(&support);
        if size > (1u128 << 28) {
            return Err(Error::input(format!(
                "event {name:?}: support too large for a table"
            )));
        }
        let mut table = vec![false; size as usize];
        let strides = strides(space, &support);
        for tuple in tuples {
            if tuple.len() != vars.len() {
                return Err(Error::input(format!(
                    "event {name:?}: tuple of length {} over {} variables",
                    tuple.len(),
                    vars.len()
                )));
            }
            let mut idx = 0;
            for (pos, &t) in order.iter().enumerate() {
                let coord = space.coord(support[pos]);
                let a = coord.index_of(&tuple[t]).ok_or_else(|| {
                    Error::input(format!(
                        "event {name:?}: {} is not an atom of coordinate {}",
                        tuple[t],
                        support[pos] + 1
                    ))
                })?;
                idx += a * strides[pos];
            }
            table[idx] = true;
        }
        Self::new(space, name, support, table)
    }

    /// Event with empty support: the whole space or nothing.
    pub fn constant(name: impl Into<String>, value: bool) -> Self {
        Self {
            name: name.into(),
            support: Vec::new(),
            table: vec![value],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    /// `r_i`, the number of coordinates the event depends on.
    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// Membership of a full point, given as atom indices for all `m`
    /// coordinates.
    pub fn contains(&self, space: &ProductSpace, point: &[usize]) -> bool {
        let mut idx = 0;
        for &j in &self.support {
            idx = idx * space.coord(j).len() + point[j];
        }
        self.table[idx]
    }

    /// Membership given atom indices for the support coordinates only.
    pub fn contains_local(&self, space: &ProductSpace, local: &[usize]) -> bool {
        let mut idx = 0;
        for (&j, &a) in self.support.iter().zip(local) {
            idx = idx * space.coord(j).len() + a;
        }
        self.table[idx]
    }

    /// True when every support coordinate actually matters.
    pub fn is_minimal(&self, space: &ProductSpace) -> bool {
        (0..self.support.len())
            .all(|axis| !axis_is_constant(space, &self.support, &self.table, axis))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn strides(space: &ProductSpace, support: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; support.len()];
    for t in (0..support.len().saturating_sub(1)).rev() {
        strides[t] = strides[t + 1] * space.coord(support[t + 1]).len();
    }
    strides
}

fn axis_is_constant(space: &ProductSpace, support: &[usize], table: &[bool], axis: usize) -> bool {
    let strides = strides(space, support);
    let stride = strides[axis];
    let size = space.coord(support[axis]).len();
    (0..table.len())
        .filter(|idx| (idx / stride).is_multiple_of(size))
        .all(|base| (1..size).all(|a| table[base + a * stride] == table[base]))
}

/// Projects out every coordinate the event's table is constant along.
///
/// Constancy along each dropped axis separately implies constancy along all
/// of them jointly, so a single pass yields the minimal support.
pub fn normalize_support(space: &ProductSpace, event: &Event) -> Event {
    let keep: Vec<usize> = (0..event.support.len())
        .filter(|&axis| !axis_is_constant(space, &event.support, &event.table, axis))
        .collect();
    if keep.len() == event.support.len() {
        return event.clone();
    }
    let old_strides = strides(space, &event.support);
    let support: Vec<usize> = keep.iter().map(|&t| event.support[t]).collect();
    let size = space.tuple_count(&support) as usize;
    let mut table = Vec::with_capacity(size);
    let mut local = vec![0usize; keep.len()];
    for _ in 0..size {
        let idx: usize = keep
            .iter()
            .zip(&local)
            .map(|(&axis, &a)| a * old_strides[axis])
            .sum();
        table.push(event.table[idx]);
        // advance the odometer, last coordinate fastest
        for t in (0..keep.len()).rev() {
            local[t] += 1;
            if local[t] < space.coord(support[t]).len() {
                break;
            }
            local[t] = 0;
        }
    }
    Event {
        name: event.name.clone(),
        support,
        table,
    }
}

/// Events as vertices, joined when their supports share a coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    neighbors: Vec<Vec<usize>>,
    support_sizes: Vec<usize>,
}

impl DependencyGraph {
    pub fn new(events: &[Event]) -> Self {
        let n = events.len();
        let supports: Vec<BTreeSet<usize>> = events
            .iter()
            .map(|e| e.support().iter().copied().collect())
            .collect();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if !supports[i].is_disjoint(&supports[j]) {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Self {
            neighbors,
            support_sizes: events.iter().map(Event::support_size).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// `Gamma_i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// `Delta_i = |Gamma_i|`.
    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// `Delta = max{5, Delta_1, ..., Delta_n}`.
    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).fold(5, usize::max)
    }

    /// `r_i`.
    pub fn support_size(&self, i: usize) -> usize {
        self.support_sizes[i]
    }

    /// `mu_i = min{r_i, Delta_i + 1}`.
    pub fn mu(&self, i: usize) -> usize {
        self.support_sizes[i].min(self.degree(i) + 1)
    }

    /// Connected components of the subgraph induced by `subset`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut members: Vec<usize> = subset.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut seen = vec![false; members.len()];
        let mut components = Vec::new();
        for start in 0..members.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut component = Vec::new();
            while let Some(pos) = stack.pop() {
                let i = members[pos];
                component.push(i);
                for &j in &self.neighbors[i] {
                    if let Ok(q) = members.binary_search(&j) {
                        if !seen[q] {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        components
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventCondition {
    pub name: String,
    #[serde(with = "crate::rational::serde_string")]
    pub probability: Rational,
    pub support_size: usize,
    pub degree: usize,
    pub mu: usize,
    #[serde(with = "crate::rational::serde_string")]
    pub threshold: Rational,
    pub passes: bool,
}

/// Result of checking `P(A_i) < (3 Delta)^(-3 mu_i)` for every event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallnessReport {
    pub max_degree: usize,
    pub events: Vec<EventCondition>,
    pub passes: bool,
}

/// `(3 Delta)^(-3 mu)` as an exact rational.
pub fn smallness_threshold(max_degree: usize, mu: usize) -> Rational {
    let base = Rational::from_integer((3 * max_degree).into());
    pow(&base, (3 * mu) as u32).recip()
}

pub fn check_smallness(
    space: &ProductSpace,
    events: &[Event],
    graph: &DependencyGraph,
) -> SmallnessReport {
    let delta = graph.max_degree();
    let events: Vec<EventCondition> = events
        .iter()
        .enumerate()
        .map(|(i, event)| {
            let probability = event_probability(space, event);
            let threshold = smallness_threshold(delta, graph.mu(i));
            EventCondition {
                name: event.name().to_string(),
                passes: probability < threshold,
                probability,
                support_size: graph.support_size(i),
                degree: graph.degree(i),
                mu: graph.mu(i),
                threshold,
            }
        })
        .collect();
    SmallnessReport {
        max_degree: delta,
        passes: events.iter().all(|e| e.passes),
        events,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LllEvent {
    pub name: String,
    #[serde(with = "crate::rational::serde_string")]
    pub probability: Rational,
    /// `s_i * prod_{j in Gamma_i} (1 - s_j)`
    #[serde(with = "crate::rational::serde_string")]
    pub bound: Rational,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LllReport {
    pub events: Vec<LllEvent>,
    pub passes: bool,
    /// `prod_i (1 - s_i)`, a lower bound on the target probability when
    /// `passes` holds.
    #[serde(with = "crate::rational::serde_string")]
    pub lower_bound: Rational,
}

/// Lovász Local Lemma check. With `weights == None` every `s_i = 1/Delta`.
pub fn check_lll(
    space: &ProductSpace,
    events: &[Event],
    graph: &DependencyGraph,
    weights: Option<&[Rational]>,
) -> Result<LllReport> {
    let n = events.len();
    let s: Vec<Rational> = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::input(format!(
                    "{} LLL weights for {n} events",
                    w.len()
                )));
            }
            if let Some(bad) = w
                .iter()
                .find(|s| **s <= Rational::zero() || **s >= Rational::one())
            {
                return Err(Error::input(format!("LLL weight {bad} outside (0, 1)")));
            }
            w.to_vec()
        }
        None => vec![Rational::from_integer(graph.max_degree().into()).recip(); n],
    };
    let one = Rational::one();
    let events: Vec<LllEvent> = events
        .iter()
        .enumerate()
        .map(|(i, event)| {
            let probability = event_probability(space, event);
            let bound = graph
                .neighbors(i)
                .iter()
                .fold(s[i].clone(), |acc, &j| acc * (&one - &s[j]));
            LllEvent {
                name: event.name().to_string(),
                passes: probability <= bound,
                probability,
                bound,
            }
        })
        .collect();
    let lower_bound = s.iter().fold(one.clone(), |acc, si| acc * (&one - si));
    Ok(LllReport {
        passes: events.iter().all(|e| e.passes),
        events,
        lower_bound,
    })
}
