//! Constraint systems over the integer cube `{0..c}^m`.
//!
//! A constraints file holds one predicate per line, e.g. `x[1] + x[2] <= 3`.
//! Blank lines and lines starting with `#` are skipped. A point belongs to
//! the solution set when it satisfies every line, so each line becomes the
//! bad event "this constraint is violated".

use isect_core::predicate::Predicate;
use isect_core::{
    compile_predicate, parse_predicate, CoordinateSpace, Error, Event, ProductSpace, Result,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub line: usize,
    pub predicate: Predicate,
}

pub fn parse_constraints(text: &str) -> Result<Vec<Constraint>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let predicate = parse_predicate(line).map_err(|e| match e {
            Error::Syntax { column, message } => Error::Syntax {
                column,
                message: format!("line {}: {message}", i + 1),
            },
            other => other,
        })?;
        out.push(Constraint {
            line: i + 1,
            predicate,
        });
    }
    Ok(out)
}

/// The uniform cube `{0..c}^m` and one violation event per constraint.
pub fn cube_instance(
    constraints: &[Constraint],
    side: i64,
    dim: usize,
) -> Result<(ProductSpace, Vec<Event>)> {
    if side < 1 {
        return Err(Error::Input(format!(
            "cube side must be at least 1, got {side}"
        )));
    }
    if dim == 0 {
        return Err(Error::Input("dimension must be at least 1".into()));
    }
    let space = ProductSpace::new(
        (1..=dim)
            .map(|j| CoordinateSpace::integer_range(format!("x{j}"), side))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let events = constraints
        .iter()
        .map(|c| {
            let violated = Predicate::Not(Box::new(c.predicate.clone()));
            compile_predicate(&space, format!("line {}", c.line), &violated)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((space, events))
}
