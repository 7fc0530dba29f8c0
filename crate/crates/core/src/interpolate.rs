//! Approximating `ln p(1)` from the first `K + 1` Taylor coefficients of `p`.
//!
//! `p` has no zeros in a known region `U` around `[0, 1]`. A map `phi` with
//! `phi(0) = 0`, `phi(1) = 1` sends the disk `|z| <= rho`, `rho > 1`, into `U`,
//! so `h = p ∘ phi` has no zeros there and `ln h(z) = sum_k b_k z^k` converges
//! at `z = 1` with a geometric tail. The first `K + 1` coefficients of `h`
//! only need `a_0 .. a_K` because `phi(0) = 0`.
//!
//! Two map families are provided:
//!
//! * [`CompositionMap::Disk`], `phi(z) = (1 - alpha) z / (1 - alpha z)` with
//!   `alpha = rho^-2`. It maps `|z| <= rho` onto `|w - 1| <= rho`. With
//!   `rho = 1 + delta` this is the disk on which the zero-freeness theorem
//!   applies directly (`|1 - z| <= 1 + 1/(6 Delta)`). `ln h` has at most
//!   `deg p` zeros and `deg p` poles, all outside `|z| = rho`, so
//!   `|b_k| <= 2n / (k rho^k)`.
//! * [`CompositionMap::Segment`], the polynomial
//!   `phi(z) = (1 - (1 - alpha z)^q) / (1 - (1 - alpha)^q)`, validated against
//!   the thin neighbourhood `dist(w, [0, 1]) <= delta`. For the `delta` values
//!   that arise here no parameters validate; [`build_segment_plan`] reports
//!   that as a construction error.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::joint::{sigma_series, Budget, JointProbability};
use crate::model::{check_smallness, DependencyGraph, Event, ProductSpace, SmallnessReport};
use crate::rational::{format_rational, parse_rational, ratio, to_f64, Rational};
use crate::real::{Extended, Real};
use crate::{Error, Result};

/// Boundary samples used for a first validation pass.
pub const MIN_VALIDATION_SAMPLES: usize = 4096;
/// Slack allowed when checking sampled images against the region.
pub const VALIDATION_TOLERANCE: f64 = 1e-12;
/// Above this order the extended-precision path is used by default.
pub const DOUBLE_PRECISION_MAX_ORDER: usize = 64;

const MAX_DENSIFY_ROUNDS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum CompositionMap {
    Disk { alpha: Rational },
    Segment { alpha: Rational, degree: usize },
}

impl CompositionMap {
    pub fn alpha(&self) -> &Rational {
        match self {
            CompositionMap::Disk { alpha } | CompositionMap::Segment { alpha, .. } => alpha,
        }
    }

    /// Upper bound on zeros plus poles of `ln (p ∘ phi)` per root of `p`.
    pub fn zero_factor(&self) -> usize {
        match self {
            CompositionMap::Disk { .. } => 2,
            CompositionMap::Segment { degree, .. } => *degree,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CompositionMap::Disk { .. } => "disk",
            CompositionMap::Segment { .. } => "segment",
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let alpha = to_f64(self.alpha());
        match self {
            CompositionMap::Disk { .. } => z * (1.0 - alpha) / (one - z * alpha),
            CompositionMap::Segment { degree, .. } => {
                let norm = 1.0 - libm::pow(1.0 - alpha, *degree as f64);
                (one - (one - z * alpha).powi(*degree as i32)) / norm
            }
        }
    }

    /// Taylor coefficients `phi_0 .. phi_{len-1}` at 0 (`phi_0 = 0`).
    pub fn coeffs<R: Real>(&self, len: usize) -> Vec<R> {
        let mut out = vec![R::zero(); len];
        match self {
            CompositionMap::Disk { alpha } => {
                let a = R::from_rational(alpha);
                let mut c = R::from_rational(&(Rational::one() - alpha));
                for slot in out.iter_mut().skip(1) {
                    *slot = c.clone();
                    c = c * a.clone();
                }
            }
            CompositionMap::Segment { alpha, degree } => {
                // -C(q, k) (-alpha)^k / (1 - (1 - alpha)^q)
                let q = *degree;
                let norm =
                    Rational::one() - crate::rational::pow(&(Rational::one() - alpha), q as u32);
                let mut c = Rational::one();
                for (k, slot) in out.iter_mut().enumerate().take(q + 1).skip(1) {
                    c = c * Rational::from_integer(((q + 1 - k) as i64).into())
                        / Rational::from_integer((k as i64).into())
                        * (-alpha.clone());
                    *slot = R::from_rational(&(-c.clone() / &norm));
                }
            }
        }
        out
    }

    /// First `order + 1` coefficients of `p ∘ phi`. For the disk map,
    /// `phi^j = ((1 - alpha) z)^j (1 - alpha z)^-j` has the closed-form
    /// coefficients `(1 - alpha)^j C(k-1, j-1) alpha^(k-j)`.
    pub fn compose<R: Real>(&self, p: &[R], order: usize) -> Vec<R> {
        let CompositionMap::Disk { alpha } = self else {
            return compose_series(p, &self.coeffs::<R>(order + 1), order);
        };
        let a = R::from_rational(alpha);
        let one_minus = R::from_rational(&(Rational::one() - alpha));
        let mut h = vec![R::zero(); order + 1];
        if let Some(a0) = p.first() {
            h[0] = a0.clone();
        }
        let mut lead = R::one();
        for (j, aj) in p.iter().enumerate().take(order + 1).skip(1) {
            lead = lead * one_minus.clone();
            if *aj == R::zero() {
                continue;
            }
            let mut t = lead.clone();
            for (k, hk) in h.iter_mut().enumerate().skip(j) {
                *hk = hk.clone() + aj.clone() * t.clone();
                // t_{k+1} = t_k alpha k / (k - j + 1)
                t = t * a.clone() * R::from_usize(k) / R::from_usize(k - j + 1);
            }
        }
        h
    }
}

/// A validated composition map with its truncation order and tail bound.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationPlan {
    delta: Rational,
    rho: Rational,
    map: CompositionMap,
    events: usize,
    order: usize,
    tail_bound: f64,
    validation_samples: usize,
}

impl InterpolationPlan {
    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn rho(&self) -> &Rational {
        &self.rho
    }

    pub fn map(&self) -> &CompositionMap {
        &self.map
    }

    pub fn alpha(&self) -> f64 {
        to_f64(self.map.alpha())
    }

    /// The `q` of the tail bound: zeros of `ln h` per root of `p`.
    pub fn q(&self) -> usize {
        self.map.zero_factor()
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn events(&self) -> usize {
        self.events
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn validation_samples(&self) -> usize {
        self.validation_samples
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        self.map.eval(z)
    }

    pub fn phi_coeffs<R: Real>(&self, len: usize) -> Vec<R> {
        self.map.coeffs(len)
    }

    /// Same map, different truncation order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut plan = self.clone();
        plan.order = order;
        plan.tail_bound = tail_bound(self.events, self.q(), to_f64(&self.rho), order);
        plan
    }

    /// Largest `dist(phi(z), [0, 1]) - delta` over `samples` points of
    /// `|z| = rho`. Nonpositive means the image stays in the thin
    /// neighbourhood of the segment.
    pub fn segment_excess(&self, samples: usize) -> f64 {
        let rho = to_f64(&self.rho);
        let delta = to_f64(&self.delta);
        circle(rho, samples)
            .map(|z| segment_distance(self.phi(z)) - delta)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Re-runs the boundary validation for this plan's own region.
    pub fn revalidate(&self) -> Result<usize> {
        validate_image(&self.map, &self.delta, &self.rho).ok_or_else(|| self.construction_error())
    }

    fn construction_error(&self) -> Error {
        Error::Construction {
            alpha: self.alpha(),
            q: self.q(),
            rho: to_f64(&self.rho),
        }
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            map: self.map.kind().into(),
            delta: to_f64(&self.delta),
            alpha: self.alpha(),
            q: self.q(),
            rho: to_f64(&self.rho),
            order: self.order,
            tail_bound: self.tail_bound,
            validation_samples: self.validation_samples,
            events: self.events,
            delta_exact: format_rational(&self.delta),
            alpha_exact: format_rational(self.map.alpha()),
            rho_exact: format_rational(&self.rho),
        }
    }

    /// Rebuilds a plan from its summary, re-validating the boundary image and
    /// the tail bound.
    pub fn from_summary(summary: &PlanSummary) -> Result<Self> {
        let delta = parse_rational(&summary.delta_exact)?;
        let rho = parse_rational(&summary.rho_exact)?;
        let alpha = parse_rational(&summary.alpha_exact)?;
        let map = match summary.map.as_str() {
            "disk" => CompositionMap::Disk { alpha },
            "segment" => CompositionMap::Segment {
                alpha,
                degree: summary.q,
            },
            other => return Err(Error::input(format!("unknown map kind {other:?}"))),
        };
        if rho <= Rational::one() {
            return Err(Error::input("plan radius must exceed 1"));
        }
        let mut plan = InterpolationPlan {
            delta,
            rho,
            map,
            events: summary.events,
            order: summary.order,
            tail_bound: 0.0,
            validation_samples: 0,
        };
        if plan.q() != summary.q {
            return Err(Error::input("plan q does not match its map"));
        }
        plan.validation_samples = plan.revalidate()?;
        plan.tail_bound = tail_bound(plan.events, plan.q(), to_f64(&plan.rho), plan.order);
        if plan.tail_bound > summary.tail_bound * (1.0 + 1e-9) {
            return Err(Error::input(format!(
                "recorded tail bound {} understates the recomputed {}",
                summary.tail_bound, plan.tail_bound
            )));
        }
        Ok(plan)
    }
}

/// Serialisable plan certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub map: String,
    pub delta: f64,
    pub alpha: f64,
    pub q: usize,
    pub rho: f64,
    #[serde(rename = "K")]
    pub order: usize,
    pub tail_bound: f64,
    pub validation_samples: usize,
    pub events: usize,
    pub delta_exact: String,
    pub alpha_exact: String,
    pub rho_exact: String,
}

fn circle(rho: f64, samples: usize) -> impl Iterator<Item = Complex64> {
    (0..samples).map(move |t| {
        let theta = 2.0 * core::f64::consts::PI * t as f64 / samples as f64;
        Complex64::from_polar(rho, theta)
    })
}

/// Euclidean distance from `w` to the real segment `[0, 1]`.
pub fn segment_distance(w: Complex64) -> f64 {
    let x = w.re.clamp(0.0, 1.0);
    libm::hypot(w.re - x, w.im)
}

/// How far `w` lies outside the map's target region (nonpositive inside).
fn region_excess(map: &CompositionMap, delta: f64, w: Complex64) -> f64 {
    match map {
        CompositionMap::Disk { .. } => (w - 1.0).norm() - (1.0 + delta),
        CompositionMap::Segment { .. } => segment_distance(w) - delta,
    }
}

/// Samples `|z| = rho` at 4096 points, then densifies by 4 until the worst
/// excess agrees between consecutive densities. Returns the sample count of
/// the last pass on success.
fn validate_image(map: &CompositionMap, delta: &Rational, rho: &Rational) -> Option<usize> {
    let delta = to_f64(delta);
    let rho = to_f64(rho);
    let worst = |samples| {
        circle(rho, samples)
            .map(|z| region_excess(map, delta, map.eval(z)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // phi(0) = 0 and phi(1) = 1 must hold for the rebuilt map as well
    let at_one = map.eval(Complex64::new(1.0, 0.0));
    if map.eval(Complex64::new(0.0, 0.0)) != Complex64::new(0.0, 0.0)
        || (at_one - 1.0).norm() > 1e-14
    {
        return None;
    }
    let mut samples = MIN_VALIDATION_SAMPLES;
    let mut previous = worst(samples);
    for _ in 0..MAX_DENSIFY_ROUNDS {
        if previous > VALIDATION_TOLERANCE {
            return None;
        }
        let next = worst(samples * 4);
        samples *= 4;
        if next > VALIDATION_TOLERANCE {
            return None;
        }
        if (next - previous).abs() <= 1e-9 {
            return Some(samples);
        }
        previous = next;
    }
    None
}

/// `(n q) rho^-K rho / (K (rho - 1))`, bounding `|sum_{k > K} b_k|`.
pub fn tail_bound(events: usize, q: usize, rho: f64, order: usize) -> f64 {
    if events == 0 {
        return 0.0;
    }
    if order == 0 {
        return f64::INFINITY;
    }
    let log = libm::log((events * q) as f64) - order as f64 * libm::log(rho) + libm::log(rho)
        - libm::log(order as f64)
        - libm::log(rho - 1.0);
    libm::exp(log)
}

fn smallest_order(events: usize, q: usize, rho: f64, epsilon: f64) -> usize {
    if events == 0 {
        return 0;
    }
    let target = epsilon / 2.0;
    // tail_bound is strictly decreasing in K: exponential search, then bisect
    let mut hi = 1usize;
    while tail_bound(events, q, rho, hi) > target {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if tail_bound(events, q, rho, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.max(1)
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must lie in (0, 1), got {x}")))
    }
}

/// Builds the default (disk) plan for zero-free radius `1 + delta` about 1.
pub fn build_plan(delta: &Rational, epsilon: f64, events: usize) -> Result<InterpolationPlan> {
    check_unit_interval("delta", to_f64(delta))?;
    check_unit_interval("epsilon", epsilon)?;
    let one = Rational::one();
    let mut rho = &one + delta;
    let mut last = None;
    for _ in 0..16 {
        let alpha = (&rho * &rho).recip();
        let map = CompositionMap::Disk { alpha };
        if let Some(samples) = validate_image(&map, delta, &rho) {
            let order = smallest_order(events, map.zero_factor(), to_f64(&rho), epsilon);
            return Ok(InterpolationPlan {
                delta: delta.clone(),
                tail_bound: tail_bound(events, map.zero_factor(), to_f64(&rho), order),
                rho,
                map,
                events,
                order,
                validation_samples: samples,
            });
        }
        last = Some((to_f64(map.alpha()), map.zero_factor(), to_f64(&rho)));
        rho = &one + (&rho - &one) / Rational::from_integer(2.into());
    }
    let (alpha, q, rho) = last.expect("at least one attempt");
    Err(Error::Construction { alpha, q, rho })
}

/// Searches the polynomial family `(1 - (1 - alpha z)^q) / (1 - (1 - alpha)^q)`
/// for a map of `|z| <= rho` into the `delta`-neighbourhood of `[0, 1]`:
/// start at `alpha = delta/2`, `q = ceil(1/alpha)`, `rho = 1 + alpha delta / 4`,
/// shrink `rho` and then `alpha` on failure.
pub fn build_segment_plan(
    delta: &Rational,
    epsilon: f64,
    events: usize,
) -> Result<InterpolationPlan> {
    check_unit_interval("delta", to_f64(delta))?;
    check_unit_interval("epsilon", epsilon)?;
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let mut alpha = delta / &two;
    let mut last = (0.0, 0, 0.0);
    for _ in 0..4 {
        let degree = num_integer::Integer::div_ceil(alpha.denom(), alpha.numer());
        let degree: usize = degree.try_into().unwrap_or(usize::MAX);
        if degree > 1 << 20 {
            break;
        }
        let mut rho = &one + &alpha * delta / Rational::from_integer(4.into());
        for _ in 0..6 {
            let map = CompositionMap::Segment {
                alpha: alpha.clone(),
                degree,
            };
            if let Some(samples) = validate_image(&map, delta, &rho) {
                let order = smallest_order(events, degree, to_f64(&rho), epsilon);
                return Ok(InterpolationPlan {
                    delta: delta.clone(),
                    tail_bound: tail_bound(events, degree, to_f64(&rho), order),
                    rho,
                    map,
                    events,
                    order,
                    validation_samples: samples,
                });
            }
            last = (to_f64(&alpha), degree, to_f64(&rho));
            rho = &one + (&rho - &one) / &two;
        }
        alpha = &alpha / &two;
    }
    Err(Error::Construction {
        alpha: last.0,
        q: last.1,
        rho: last.2,
    })
}

/// First `order + 1` Taylor coefficients of `p(phi(z))`, by Horner's rule
/// over truncated products. Needs `phi_0 = 0`.
pub fn compose_series<R: Real>(p: &[R], phi: &[R], order: usize) -> Vec<R> {
    let len = order + 1;
    let p = &p[..p.len().min(len)];
    let mut h = vec![R::zero(); len];
    let Some((last, rest)) = p.split_last() else {
        return h;
    };
    h[0] = last.clone();
    let phi_at = |j: usize| phi.get(j).cloned().unwrap_or_else(R::zero);
    let phi: Vec<R> = (0..len).map(phi_at).collect();
    debug_assert!(phi[0] == R::zero(), "phi(0) must vanish");
    for a in rest.iter().rev() {
        let mut next = vec![R::zero(); len];
        for (i, hi) in h.iter().enumerate() {
            if *hi == R::zero() {
                continue;
            }
            for j in 1..len - i {
                next[i + j] = next[i + j].clone() + hi.clone() * phi[j].clone();
            }
        }
        next[0] = next[0].clone() + a.clone();
        h = next;
    }
    h
}

/// Coefficients `b_0 = 0, b_1, .., b_K` of `ln h` from `c_0 = 1, c_1, .., c_K`
/// via `k c_k = sum_{j=1}^{k} j b_j c_{k-j}`.
pub fn log_taylor<R: Real>(c: &[R]) -> Result<Vec<R>> {
    if c.first() != Some(&R::one()) {
        return Err(Error::input(
            "log series needs constant coefficient exactly 1",
        ));
    }
    let mut b = vec![R::zero(); c.len()];
    // jb[j] = j * b_j
    let mut jb = vec![R::zero(); c.len()];
    for k in 1..c.len() {
        let mut acc = R::from_usize(k) * c[k].clone();
        for j in 1..k {
            if c[k - j] != R::zero() {
                acc = acc - jb[j].clone() * c[k - j].clone();
            }
        }
        b[k] = acc.clone() / R::from_usize(k);
        jb[k] = acc;
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// binary64 up to order 64, extended above
    #[default]
    Auto,
    Double,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Guarantee {
    CertifiedByAssumption,
    ConditionsViolated,
}

#[derive(Clone, Debug, Default)]
pub struct EstimateOptions {
    pub precision: Precision,
    pub budget: Budget,
    /// Overrides the plan's truncation order.
    pub order: Option<usize>,
}

/// Approximation of `ln P(no event occurs)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub log_value: f64,
    pub epsilon: f64,
    #[serde(rename = "K_used")]
    pub order: usize,
    pub guarantee: Guarantee,
    pub precision: Precision,
    pub conditions: SmallnessReport,
    pub plan: PlanSummary,
}

fn series_log_at_one<R: Real>(
    a: &[Rational],
    plan: &InterpolationPlan,
    order: usize,
) -> Result<f64> {
    let a: Vec<R> = a.iter().map(R::from_rational).collect();
    let h = plan.map().compose(&a, order);
    let b = log_taylor(&h)?;
    let total = b.into_iter().skip(1).fold(R::zero(), |acc, x| acc + x);
    Ok(total.to_f64())
}

/// The full pipeline: dependency graph, smallness check, plan, `sigma_k`
/// up to `min(K, n)` (higher ones vanish), composition, log series, sum at 1.
pub fn estimate_log_intersection(
    space: &ProductSpace,
    events: &[Event],
    epsilon: f64,
    options: &EstimateOptions,
) -> Result<Estimate> {
    check_unit_interval("epsilon", epsilon)?;
    let graph = DependencyGraph::new(events);
    let conditions = check_smallness(space, events, &graph);
    if let Some((index, c)) = conditions
        .events
        .iter()
        .enumerate()
        .find(|(_, c)| c.probability.is_one())
    {
        return Err(Error::CertainEvent {
            index,
            name: c.name.clone(),
        });
    }
    let delta = ratio(1, 6 * graph.max_degree() as i64);
    let mut plan = build_plan(&delta, epsilon, events.len())?;
    if let Some(order) = options.order {
        plan = plan.with_order(order);
    }
    let order = plan.order();
    let engine = JointProbability::with_budget(space, events, &graph, options.budget.enumeration);
    let series = sigma_series(&engine, order.min(events.len()), options.budget.subsets)?;
    let precision = match options.precision {
        Precision::Auto if order > DOUBLE_PRECISION_MAX_ORDER => Precision::Extended,
        Precision::Auto => Precision::Double,
        p => p,
    };
    let log_value = match precision {
        Precision::Extended => series_log_at_one::<Extended>(series.coeffs(), &plan, order)?,
        _ => series_log_at_one::<f64>(series.coeffs(), &plan, order)?,
    };
    let guarantee = if conditions.passes {
        Guarantee::CertifiedByAssumption
    } else {
        Guarantee::ConditionsViolated
    };
    Ok(Estimate {
        value: libm::exp(log_value),
        log_value,
        epsilon,
        order,
        guarantee,
        precision,
        conditions,
        plan: plan.summary(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, CoordinateSpace};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn disk_plan_for_delta_one_thirtieth() {
        let plan = build_plan(&ratio(1, 30), 1e-4, 10).unwrap();
        assert_eq!(plan.rho(), &ratio(31, 30));
        assert!(plan.tail_bound() <= 0.5e-4);
        assert!(plan.with_order(plan.order() - 1).tail_bound() > 0.5e-4);
        assert!(plan.validation_samples() >= MIN_VALIDATION_SAMPLES);
        assert_eq!(plan.phi(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert_eq!(plan.phi(Complex64::new(1.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn disk_map_keeps_unit_interval() {
        let plan = build_plan(&ratio(1, 30), 1e-2, 3).unwrap();
        for t in 0..=10_000 {
            let x = t as f64 / 10_000.0;
            let w = plan.phi(Complex64::new(x, 0.0));
            assert!(segment_distance(w) <= 1e-15, "{x} -> {w}");
        }
    }

    #[test]
    fn segment_family_fails_for_small_delta() {
        match build_segment_plan(&ratio(1, 30), 1e-2, 3) {
            Err(Error::Construction { alpha, q, rho }) => {
                assert!(alpha > 0.0 && q >= 1 && rho > 1.0);
            }
            other => panic!("expected construction error, got {other:?}"),
        }
    }

    #[test]
    fn summary_round_trip_revalidates() {
        let plan = build_plan(&ratio(1, 42), 1e-3, 7).unwrap();
        let back = InterpolationPlan::from_summary(&plan.summary()).unwrap();
        assert_eq!(back, plan);
        let mut forged = plan.summary();
        forged.tail_bound /= 10.0;
        assert!(InterpolationPlan::from_summary(&forged).is_err());
        let mut wide = plan.summary();
        wide.alpha_exact = "1/2".into();
        assert!(InterpolationPlan::from_summary(&wide).is_err());
    }

    #[test]
    fn tail_bound_decreases() {
        let rho = 31.0 / 30.0;
        let mut prev = f64::INFINITY;
        for k in 1..2000 {
            let t = tail_bound(10, 2, rho, k);
            assert!(t < prev);
            prev = t;
        }
        assert_eq!(tail_bound(0, 2, rho, 0), 0.0);
    }

    #[test]
    fn compose_with_identity_and_constant() {
        let a = [1.0, -0.75, 0.25];
        let identity = [0.0, 1.0];
        assert_eq!(
            compose_series(&a, &identity, 4),
            vec![1.0, -0.75, 0.25, 0.0, 0.0]
        );
        assert_eq!(
            compose_series(&[1.0], &identity, 3),
            vec![1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn compose_linear_p_matches_pointwise() {
        let plan = build_plan(&ratio(1, 30), 1e-2, 1).unwrap();
        let order = 200;
        let phi = plan.phi_coeffs::<f64>(order + 1);
        let h = compose_series(&[1.0, -0.5], &phi, order);
        assert_eq!(h[0], 1.0);
        for k in 1..=order {
            assert!(close(h[k], -0.5 * phi[k], 1e-15));
        }
        // |z| = 1/2 keeps the truncation error far below 1e-12
        for t in 0..16 {
            let z = Complex64::from_polar(0.5, t as f64 * core::f64::consts::PI / 8.0);
            let direct = 1.0 - 0.5 * plan.phi(z);
            let series: Complex64 = h
                .iter()
                .enumerate()
                .map(|(k, c)| z.powi(k as i32) * c)
                .sum();
            assert!(
                (direct - series).norm() < 1e-12,
                "{z}: {direct} vs {series}"
            );
        }
    }

    #[test]
    fn closed_form_disk_composition_matches_horner() {
        let plan = build_plan(&ratio(1, 30), 1e-2, 4).unwrap();
        let p = [1.0, -0.3, 0.05, -0.002, 1e-4];
        let order = 150;
        let fast = plan.map().compose(&p, order);
        let slow = compose_series(&p, &plan.phi_coeffs::<f64>(order + 1), order);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).abs() <= 1e-13 * (1.0 + s.abs()), "{f} vs {s}");
        }
        let px: Vec<Extended> = p.iter().map(|&x| Extended::from_f64(x)).collect();
        let fast = plan.map().compose(&px, 40);
        let slow = compose_series(&px, &plan.phi_coeffs::<Extended>(41), 40);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f.to_f64() - s.to_f64()).abs() <= 1e-30 + 1e-28 * s.to_f64().abs());
        }
    }

    #[test]
    fn log_of_linear_factor() {
        let c = [1.0, -0.5, 0.0, 0.0];
        let b = log_taylor(&c).unwrap();
        assert_eq!(b[0], 0.0);
        assert!(close(b[1], -0.5, 1e-15));
        assert!(close(b[2], -0.125, 1e-15));
        assert!(close(b[3], -1.0 / 24.0, 1e-15));
        assert!(log_taylor(&[2.0, 1.0]).is_err());
        assert!(log_taylor::<f64>(&[]).is_err());
    }

    #[test]
    fn log_of_product_of_factors() {
        let (z1, z2) = (2.0f64, -3.0f64);
        // (1 - z/z1)(1 - z/z2)
        let c = [
            1.0,
            -(1.0 / z1 + 1.0 / z2),
            1.0 / (z1 * z2),
            0.0,
            0.0,
            0.0,
            0.0,
        ];
        let b = log_taylor(&c).unwrap();
        for (k, bk) in b.iter().enumerate().skip(1) {
            let expected = -(z1.powi(-(k as i32)) + z2.powi(-(k as i32))) / k as f64;
            assert!(close(*bk, expected, 1e-14), "k={k}");
        }
    }

    #[test]
    fn extended_matches_double_on_tame_input() {
        let c64 = [1.0, -0.5, 0.0625, 0.0, 0.0];
        let cx: Vec<Extended> = c64.iter().map(|&x| Extended::from_f64(x)).collect();
        let b64 = log_taylor(&c64).unwrap();
        let bx = log_taylor(&cx).unwrap();
        for (a, b) in b64.iter().zip(&bx) {
            assert!(close(*a, b.to_f64(), 1e-15));
        }
    }

    fn rare_space(m: usize, rare: i64) -> ProductSpace {
        ProductSpace::new(
            (0..m)
                .map(|j| {
                    CoordinateSpace::new(
                        alloc::format!("c{j}"),
                        vec![Atom::Int(0), Atom::Int(1)],
                        vec![ratio(rare - 1, rare), ratio(1, rare)],
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn no_events_gives_one() {
        let space = rare_space(1, 2);
        let est =
            estimate_log_intersection(&space, &[], 0.01, &EstimateOptions::default()).unwrap();
        assert_eq!(est.log_value, 0.0);
        assert_eq!(est.value, 1.0);
        assert_eq!(est.order, 0);
        assert_eq!(est.guarantee, Guarantee::CertifiedByAssumption);
    }

    #[test]
    fn single_rare_event() {
        let space = rare_space(1, 4000);
        let events = vec![Event::new(&space, "a", vec![0], vec![false, true]).unwrap()];
        let est =
            estimate_log_intersection(&space, &events, 1e-4, &EstimateOptions::default()).unwrap();
        let exact = libm::log(3999.0 / 4000.0);
        assert!(
            (est.log_value - exact).abs() <= 1e-4,
            "{} vs {exact}",
            est.log_value
        );
        assert_eq!(est.guarantee, Guarantee::CertifiedByAssumption);
        assert_eq!(est.precision, Precision::Extended);
    }

    #[test]
    fn certain_event_is_refused() {
        let space = rare_space(1, 2);
        let events = vec![Event::constant("always", true)];
        assert!(matches!(
            estimate_log_intersection(&space, &events, 0.1, &EstimateOptions::default()),
            Err(Error::CertainEvent { index: 0, .. })
        ));
        assert!(estimate_log_intersection(&space, &[], 1.5, &EstimateOptions::default()).is_err());
    }

    #[test]
    fn violated_conditions_still_estimate() {
        let space = rare_space(2, 2);
        let events = vec![
            Event::new(&space, "a1", vec![0], vec![false, true]).unwrap(),
            Event::new(&space, "a2", vec![0, 1], vec![false, false, false, true]).unwrap(),
        ];
        let est =
            estimate_log_intersection(&space, &events, 1e-3, &EstimateOptions::default()).unwrap();
        assert_eq!(est.guarantee, Guarantee::ConditionsViolated);
        // p(z) = 1 - 3z/4 + z^2/4 has roots (3 ± i sqrt 7)/2, outside |z - 1| <= 31/30
        assert!((est.log_value - libm::log(0.5)).abs() <= 1e-3);
    }
}
