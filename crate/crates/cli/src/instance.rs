//! JSON instance files.
//!
//! ```json
//! {
//!   "coordinates": [
//!     {"name": "x1", "values": [0, 1], "probs": "uniform"},
//!     {"name": "x2", "values": ["lo", "hi"], "probs": ["3/4", "1/4"]}
//!   ],
//!   "events": [
//!     {"name": "a", "predicate": "x[1] > 0"},
//!     {"name": "b", "vars": [2], "tuples": [["hi"]]}
//!   ]
//! }
//! ```
//!
//! Coordinate indices in `vars` and in predicates are 1-based.

use std::fs;
use std::path::Path;

use isect_core::rational::{format_rational, parse_rational};
use isect_core::{
    compile_predicate, parse_predicate, Atom, CoordinateSpace, Error, Event, ProductSpace, Result,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub coordinates: Vec<CoordinateSpec>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateSpec {
    pub name: String,
    pub values: Vec<Atom>,
    pub probs: Probs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probs {
    Named(String),
    Exact(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuples: Option<Vec<Vec<Atom>>>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("instance file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialises")
    }

    pub fn build(&self) -> Result<(ProductSpace, Vec<Event>)> {
        let coords = self
            .coordinates
            .iter()
            .map(|c| match &c.probs {
                Probs::Named(s) if s == "uniform" => {
                    CoordinateSpace::uniform(c.name.clone(), c.values.clone())
                }
                Probs::Named(s) => Err(Error::Input(format!(
                    "coordinate {}: probs must be \"uniform\" or a list, got {s:?}",
                    c.name
                ))),
                Probs::Exact(ps) => {
                    let probs = ps
                        .iter()
                        .map(|p| parse_rational(p))
                        .collect::<Result<Vec<_>>>()?;
                    CoordinateSpace::new(c.name.clone(), c.values.clone(), probs)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let space = ProductSpace::new(coords)?;
        let events = self
            .events
            .iter()
            .map(|e| e.build(&space))
            .collect::<Result<Vec<_>>>()?;
        Ok((space, events))
    }

    /// Writes events back as tuple lists over their supports.
    pub fn from_model(space: &ProductSpace, events: &[Event]) -> Self {
        let coordinates = space
            .coords()
            .iter()
            .map(|c| CoordinateSpec {
                name: c.name().to_string(),
                values: c.atoms().to_vec(),
                probs: Probs::Exact(c.probs().iter().map(format_rational).collect()),
            })
            .collect();
        let events = events
            .iter()
            .map(|e| {
                let support = e.support();
                let mut local = vec![0usize; support.len()];
                let mut tuples = Vec::new();
                for &hit in e.table() {
                    if hit {
                        tuples.push(
                            support
                                .iter()
                                .zip(&local)
                                .map(|(&j, &a)| space.coord(j).atoms()[a].clone())
                                .collect(),
                        );
                    }
                    for t in (0..support.len()).rev() {
                        local[t] += 1;
                        if local[t] < space.coord(support[t]).len() {
                            break;
                        }
                        local[t] = 0;
                    }
                }
                EventSpec {
                    name: e.name().to_string(),
                    vars: Some(support.iter().map(|j| j + 1).collect()),
                    predicate: None,
                    tuples: Some(tuples),
                }
            })
            .collect();
        InstanceFile {
            coordinates,
            events,
        }
    }
}

impl EventSpec {
    fn build(&self, space: &ProductSpace) -> Result<Event> {
        let vars = match &self.vars {
            Some(vars) => {
                if let Some(&bad) = vars.iter().find(|&&v| v == 0 || v > space.dim()) {
                    return Err(Error::Input(format!(
                        "event {}: coordinate {bad} is not declared (1..={})",
                        self.name,
                        space.dim()
                    )));
                }
                Some(vars.iter().map(|v| v - 1).collect::<Vec<_>>())
            }
            None => None,
        };
        match (&self.predicate, &self.tuples) {
            (Some(text), None) => {
                let predicate = parse_predicate(text).map_err(|e| match e {
                    Error::Syntax { column, message } => Error::Syntax {
                        column,
                        message: format!("event {}: {message}", self.name),
                    },
                    other => other,
                })?;
                if let Some(vars) = &vars {
                    if let Some(v) = predicate
                        .variables()
                        .into_iter()
                        .find(|v| !vars.contains(&(v - 1)))
                    {
                        return Err(Error::Input(format!(
                            "event {}: predicate uses x[{v}] outside its vars",
                            self.name
                        )));
                    }
                }
                compile_predicate(space, &self.name, &predicate)
            }
            (None, Some(tuples)) => {
                let vars = vars.ok_or_else(|| {
                    Error::Input(format!("event {}: tuples need vars", self.name))
                })?;
                Event::from_tuples(space, self.name.clone(), &vars, tuples)
            }
            _ => Err(Error::Input(format!(
                "event {}: give exactly one of predicate and tuples",
                self.name
            ))),
        }
    }
}
