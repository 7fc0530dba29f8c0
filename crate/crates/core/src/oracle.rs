//! Ground truth for small instances: brute-force probabilities, the full
//! polynomial `p`, and numerical roots of `p`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::joint::{sigma_series, Budget, JointProbability};
use crate::model::{DependencyGraph, Event, ProductSpace};
use crate::rational::{to_f64, Rational};
use crate::{Error, Result};

/// Backward-error tolerance for accepted roots.
pub const ROOT_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 1000;

/// Sums the weights of all points of the product over `coords` accepted by
/// `keep`, which sees the atom index of every coordinate in `coords`.
fn weighted_count(
    space: &ProductSpace,
    coords: &[usize],
    budget: u64,
    component: &[usize],
    mut keep: impl FnMut(&[usize]) -> bool,
) -> Result<Rational> {
    let size = space.tuple_count(coords);
    if size > budget as u128 {
        return Err(Error::EnumerationBudget {
            component: component.to_vec(),
            size,
            budget,
        });
    }
    let denominator = coords.iter().fold(BigUint::from(1u8), |acc, &j| {
        acc * space.coord(j).denominator()
    });
    let small = denominator.bits() < 127;
    let weights: Vec<&[BigUint]> = coords.iter().map(|&j| space.coord(j).weights()).collect();
    let small_weights: Vec<Vec<u128>> = if small {
        weights
            .iter()
            .map(|w| w.iter().map(|x| x.to_u128().expect("fits")).collect())
            .collect()
    } else {
        Vec::new()
    };
    let mut point = vec![0usize; coords.len()];
    let mut total_small = 0u128;
    let mut total_big = BigUint::zero();
    loop {
        if keep(&point) {
            if small {
                let w = point
                    .iter()
                    .zip(&small_weights)
                    .fold(1u128, |acc, (&a, w)| acc * w[a]);
                total_small += w;
            } else {
                let w = point
                    .iter()
                    .zip(&weights)
                    .fold(BigUint::from(1u8), |acc, (&a, w)| acc * &w[a]);
                total_big += w;
            }
        }
        let mut t = coords.len();
        loop {
            if t == 0 {
                let total = if small {
                    BigUint::from(total_small)
                } else {
                    total_big
                };
                return Ok(Rational::new(total.into(), denominator.into()));
            }
            t -= 1;
            point[t] += 1;
            if point[t] < space.coord(coords[t]).len() {
                break;
            }
            point[t] = 0;
        }
    }
}

/// For each event, the positions of its support inside `coords` and the
/// row-major strides of its table.
fn locate(
    space: &ProductSpace,
    events: &[&Event],
    coords: &[usize],
) -> Vec<(Vec<usize>, Vec<usize>)> {
    events
        .iter()
        .map(|e| {
            let positions: Vec<usize> = e
                .support()
                .iter()
                .map(|j| coords.binary_search(j).expect("support inside coords"))
                .collect();
            let mut strides = vec![1usize; e.support().len()];
            for t in (0..strides.len().saturating_sub(1)).rev() {
                strides[t] = strides[t + 1] * space.coord(e.support()[t + 1]).len();
            }
            (positions, strides)
        })
        .collect()
}

fn occurs(event: &Event, located: &(Vec<usize>, Vec<usize>), point: &[usize]) -> bool {
    let (positions, strides) = located;
    let index: usize = positions
        .iter()
        .zip(strides)
        .map(|(&p, &s)| point[p] * s)
        .sum();
    event.table()[index]
}

fn union_support(events: &[&Event]) -> Vec<usize> {
    let mut coords: Vec<usize> = events
        .iter()
        .flat_map(|e| e.support().iter().copied())
        .collect();
    coords.sort_unstable();
    coords.dedup();
    coords
}

/// `P(no event occurs)` by enumerating every point of the coordinates that
/// some event depends on. The other coordinates integrate to 1.
pub fn exact_intersection_probability(
    space: &ProductSpace,
    events: &[Event],
    budget: u64,
) -> Result<Rational> {
    let refs: Vec<&Event> = events.iter().collect();
    let coords = union_support(&refs);
    let located = locate(space, &refs, &coords);
    let all: Vec<usize> = (0..events.len()).collect();
    // constant events have no support and are decided up front
    if events
        .iter()
        .any(|e| e.support().is_empty() && e.table()[0])
    {
        return Ok(Rational::zero());
    }
    weighted_count(space, &coords, budget, &all, |point| {
        refs.iter().zip(&located).all(|(e, l)| !occurs(e, l, point))
    })
}

/// `P(A_i for all i in subset)` by one enumeration over the union of their
/// supports, without splitting into components.
pub fn direct_joint_probability(
    space: &ProductSpace,
    events: &[Event],
    subset: &[usize],
    budget: u64,
) -> Result<Rational> {
    let refs: Vec<&Event> = subset
        .iter()
        .map(|&i| {
            events
                .get(i)
                .ok_or_else(|| Error::input(format!("event index {i} out of range")))
        })
        .collect::<Result<_>>()?;
    if refs.iter().any(|e| e.support().is_empty() && !e.table()[0]) {
        return Ok(Rational::zero());
    }
    let coords = union_support(&refs);
    let located = locate(space, &refs, &coords);
    weighted_count(space, &coords, budget, subset, |point| {
        refs.iter().zip(&located).all(|(e, l)| occurs(e, l, point))
    })
}

/// `a_0 .. a_n` with `a_k = (-1)^k sigma_k`.
pub fn full_p_polynomial(
    space: &ProductSpace,
    events: &[Event],
    budget: Budget,
) -> Result<Vec<Rational>> {
    let graph = DependencyGraph::new(events);
    let engine = JointProbability::with_budget(space, events, &graph, budget.enumeration);
    Ok(sigma_series(&engine, events.len(), budget.subsets)?
        .coeffs()
        .to_vec())
}

/// Roots of `p` and their distance to `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootReport {
    /// `[re, im]` pairs, one per root with multiplicity.
    pub roots: Vec<[f64; 2]>,
    /// Smallest distance from a root to the segment `[0, 1]`; infinite
    /// (`null` in JSON) for constant `p`.
    pub min_dist: f64,
    /// Largest inclusion radius over the roots.
    pub min_dist_error: f64,
    /// Smallest `|root - 1| - (1 + delta)`; positive means `p` has no zero in
    /// the disk `|z - 1| <= 1 + delta`.
    pub disk_margin: f64,
    pub delta: f64,
    pub zero_free: bool,
}

/// Evaluation of a polynomial and its derivative, switching to the reversed
/// polynomial outside the unit disk. Returns the Newton correction `p/p'`,
/// the backward error `|p(z)| / sum |a_k| |z|^k` and a rounding bound for
/// the same ratio.
struct Eval {
    newton: Complex64,
    backward: f64,
    rounding: f64,
    /// `sum |a_k| |z|^k / |p'(z)|`
    scale: f64,
}

fn horner(
    coeffs: impl DoubleEndedIterator<Item = f64> + Clone,
    z: Complex64,
) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    let mut abs = 0.0;
    let r = z.norm();
    for a in coeffs.rev() {
        dp = dp * z + p;
        p = p * z + a;
        abs = abs * r + a.abs();
    }
    (p, dp, abs)
}

fn evaluate(a: &[f64], z: Complex64) -> Eval {
    let n = a.len() - 1;
    let rounding = 4.0 * (n as f64 + 1.0) * f64::EPSILON;
    if z.norm() <= 1.0 {
        let (p, dp, abs) = horner(a.iter().copied(), z);
        Eval {
            newton: p / dp,
            backward: p.norm() / abs,
            rounding,
            scale: abs / dp.norm(),
        }
    } else {
        // p(z) = z^n q(w), w = 1/z, so p/p' = 1 / (w (n - w q'/q))
        let w = z.inv();
        let (q, dq, abs) = horner(a.iter().rev().copied(), w);
        // p'(z) = z^(n-1) (n q(w) - w q'(w))
        let dp = q * n as f64 - w * dq;
        Eval {
            newton: q / (w * dp),
            backward: q.norm() / abs,
            rounding,
            scale: z.norm() * abs / dp.norm(),
        }
    }
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(k, ln |a_k|)`.
fn initial_guesses(a: &[f64]) -> Vec<Complex64> {
    let points: Vec<(usize, f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| (k, libm::log(c.abs())))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let (o, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross =
                (b.0 as f64 - o.0 as f64) * (p.1 - o.1) - (b.1 - o.1) * (p.0 as f64 - o.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(a.len() - 1);
    for pair in hull.windows(2) {
        let ((i, li), (j, lj)) = (pair[0], pair[1]);
        let count = j - i;
        let radius = libm::exp((li - lj) / count as f64);
        for t in 0..count {
            let theta = 2.0 * core::f64::consts::PI * t as f64 / count as f64 + 0.4 + i as f64;
            guesses.push(Complex64::from_polar(radius, theta));
        }
    }
    guesses
}

/// All complex roots of `sum a_k z^k` (`a_0 != 0`, `a_n != 0`) by the
/// Aberth–Ehrlich iteration followed by Newton polishing.
pub fn find_roots(a: &[f64]) -> Result<Vec<Complex64>> {
    let n = a.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    if a[0] == 0.0 || a[n] == 0.0 || a.iter().any(|c| !c.is_finite()) {
        return Err(Error::input(
            "root finding needs finite coefficients with a_0 and a_n nonzero",
        ));
    }
    let mut z = initial_guesses(a);
    let mut done = vec![false; n];
    for _ in 0..MAX_ITERATIONS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let e = evaluate(a, z[i]);
            if e.backward <= e.rounding {
                done[i] = true;
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = e.newton / (Complex64::new(1.0, 0.0) - e.newton * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..3 {
            let before = evaluate(a, *root);
            let candidate = *root - before.newton;
            if candidate.is_finite() && evaluate(a, candidate).backward < before.backward {
                *root = candidate;
            } else {
                break;
            }
        }
    }
    if z.iter()
        .any(|&r| !r.is_finite() || evaluate(a, r).backward > ROOT_TOLERANCE)
    {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            partial: z.iter().map(|r| [r.re, r.im]).collect(),
        });
    }
    Ok(z)
}

/// Distance from `z` to the real segment `[0, 1]`.
fn segment_distance(z: Complex64) -> f64 {
    crate::interpolate::segment_distance(z)
}

/// Roots of `p` with coefficients `a_0 = 1, a_1, ..`, trailing zeros ignored.
pub fn root_localize(coeffs: &[f64], delta: f64) -> Result<RootReport> {
    if coeffs.first() != Some(&1.0) {
        return Err(Error::input("p must have constant coefficient 1"));
    }
    let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
    let a = &coeffs[..=degree];
    let roots = find_roots(a)?;
    let mut min_dist = f64::INFINITY;
    let mut min_dist_error = 0.0f64;
    let mut disk_margin = f64::INFINITY;
    for &r in &roots {
        let e = evaluate(a, r);
        // some root lies within n |p/p'| of r; widen by the evaluation error
        let radius = degree as f64 * (e.newton.norm() + e.rounding * e.scale);
        let radius = if radius.is_nan() {
            f64::INFINITY
        } else {
            radius
        };
        min_dist = min_dist.min(segment_distance(r));
        min_dist_error = min_dist_error.max(radius);
        disk_margin = disk_margin.min((r - 1.0).norm() - (1.0 + delta));
    }
    Ok(RootReport {
        roots: roots.iter().map(|r| [r.re, r.im]).collect(),
        zero_free: min_dist - min_dist_error > delta,
        min_dist,
        min_dist_error,
        disk_margin,
        delta,
    })
}

/// [`root_localize`] for exact coefficients.
pub fn root_localize_exact(coeffs: &[Rational], delta: f64) -> Result<RootReport> {
    let a: Vec<f64> = coeffs.iter().map(to_f64).collect();
    root_localize(&a, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, CoordinateSpace};
    use crate::rational::ratio;

    fn bits(m: usize) -> ProductSpace {
        ProductSpace::new(
            (0..m)
                .map(|j| {
                    CoordinateSpace::uniform(format!("x{j}"), vec![Atom::Int(0), Atom::Int(1)])
                        .unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn pair() -> (ProductSpace, Vec<Event>) {
        let space = bits(2);
        let events = vec![
            Event::new(&space, "a1", vec![0], vec![false, true]).unwrap(),
            Event::new(&space, "a2", vec![0, 1], vec![false, false, false, true]).unwrap(),
        ];
        (space, events)
    }

    #[test]
    fn exact_on_pair_and_empty() {
        let (space, events) = pair();
        assert_eq!(
            exact_intersection_probability(&space, &events, 1 << 20).unwrap(),
            ratio(1, 2)
        );
        assert_eq!(
            exact_intersection_probability(&space, &[], 1 << 20).unwrap(),
            ratio(1, 1)
        );
        assert_eq!(
            full_p_polynomial(&space, &events, Budget::default()).unwrap(),
            vec![ratio(1, 1), ratio(-3, 4), ratio(1, 4)]
        );
    }

    #[test]
    fn exact_on_independent_events() {
        let space = bits(3);
        let events: Vec<Event> = (0..3)
            .map(|j| Event::new(&space, format!("e{j}"), vec![j], vec![false, true]).unwrap())
            .collect();
        assert_eq!(
            exact_intersection_probability(&space, &events, 1 << 20).unwrap(),
            ratio(1, 8)
        );
        assert_eq!(
            direct_joint_probability(&space, &events, &[0, 2], 1 << 20).unwrap(),
            ratio(1, 4)
        );
    }

    #[test]
    fn exact_respects_budget() {
        let space = bits(3);
        let mut table = vec![false; 8];
        table[7] = true;
        let events = vec![Event::new(&space, "e", vec![0, 1, 2], table).unwrap()];
        assert!(matches!(
            exact_intersection_probability(&space, &events, 7),
            Err(Error::EnumerationBudget { size: 8, .. })
        ));
    }

    #[test]
    fn single_root() {
        let report = root_localize(&[1.0, -0.25], 1.0 / 30.0).unwrap();
        assert_eq!(report.roots.len(), 1);
        assert!((report.roots[0][0] - 4.0).abs() < 1e-12);
        assert!((report.min_dist - 3.0).abs() < 1e-12);
        assert!(report.zero_free);
    }

    #[test]
    fn conjugate_pair() {
        let report = root_localize(&[1.0, -0.75, 0.25], 1.0 / 30.0).unwrap();
        let s7 = libm::sqrt(7.0) / 2.0;
        for r in &report.roots {
            assert!((r[0] - 1.5).abs() < 1e-12 && (r[1].abs() - s7).abs() < 1e-12);
        }
        assert!((report.min_dist - libm::hypot(0.5, s7)).abs() < 1e-12);
        assert!((report.min_dist - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(report.zero_free);
    }

    #[test]
    fn trailing_zeros_and_constants() {
        let report = root_localize(&[1.0, -0.5, 0.0, 0.0], 0.1).unwrap();
        assert_eq!(report.roots.len(), 1);
        let report = root_localize(&[1.0], 0.1).unwrap();
        assert!(report.roots.is_empty() && report.zero_free);
        assert!(root_localize(&[0.5, 1.0], 0.1).is_err());
    }

    #[test]
    fn roots_inside_segment_are_flagged() {
        // (1 - 2z)(1 - 4z/3): roots 1/2 and 3/4
        let report = root_localize(&[1.0, -2.0 - 4.0 / 3.0, 8.0 / 3.0], 0.01).unwrap();
        assert!(report.min_dist < 1e-12);
        assert!(!report.zero_free);
        assert!(report.disk_margin < 0.0);
    }

    #[test]
    fn widely_spread_roots() {
        // prod (1 - z / 10^k), k = 0..8
        let mut a = vec![1.0];
        for k in 0..8 {
            let r = libm::pow(10.0, k as f64);
            let mut next = vec![0.0; a.len() + 1];
            for (i, c) in a.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c / r;
            }
            a = next;
        }
        let mut roots: Vec<f64> = find_roots(&a).unwrap().iter().map(|r| r.re).collect();
        roots.sort_by(f64::total_cmp);
        for (k, r) in roots.iter().enumerate() {
            let expected = libm::pow(10.0, k as f64);
            assert!((r - expected).abs() <= 1e-6 * expected, "{r} vs {expected}");
        }
    }

    #[test]
    fn double_root() {
        // (1 - z/3)^2
        let report = root_localize(&[1.0, -2.0 / 3.0, 1.0 / 9.0], 0.1).unwrap();
        for r in &report.roots {
            assert!((r[0] - 3.0).abs() < 1e-6 && r[1].abs() < 1e-6);
        }
        assert!(report.zero_free);
    }
}
