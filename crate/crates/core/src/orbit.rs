//! The bijection `tau` and truncated numerical orbits.
//!
//! An [`OrbitGrid`] is the numerical stand-in for the orbit sets on which every
//! integral, inner product and operator of the library is evaluated:
//!
//! * a forward (semigroup) orbit `{tau^n(x0) : n >= 0}`,
//! * the union of two forward orbits of `a` and `b` sharing the same limit,
//! * a two-sided (group) orbit `{tau^n(x0) : n in Z}`, truncated in both directions.
//!
//! Points are stored per orbit segment together with the steps
//! `delta_n = tau^n(x) - tau^{n+1}(x)`, which are the quadrature weights of the
//! tau-integral.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Shared real function handle.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A bijection of a real interval together with its inverse.
#[derive(Clone)]
pub struct TauMap {
    name: String,
    forward: RealFn,
    inverse: RealFn,
    lo: f64,
    hi: f64,
}

impl fmt::Debug for TauMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TauMap")
            .field("name", &self.name)
            .field("domain", &(self.lo, self.hi))
            .finish()
    }
}

impl TauMap {
    pub fn new(
        name: impl Into<String>,
        domain: (f64, f64),
        forward: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            lo: domain.0,
            hi: domain.1,
        }
    }

    /// `x -> q x + h` on the whole real line.
    pub fn linear(q: f64, h: f64) -> Self {
        assert!(q != 0.0, "linear map needs q != 0");
        Self::new(
            format!("linear(q={q},h={h})"),
            (f64::NEG_INFINITY, f64::INFINITY),
            move |x| q * x + h,
            move |x| (x - h) / q,
        )
    }

    /// The fractional map `x -> a x / ((a - 1) x + 1)` on `[0, 1]`, fixed points 0 and 1.
    pub fn fractional(a: f64) -> Self {
        assert!(a > 0.0 && a != 1.0, "fractional map needs a > 0, a != 1");
        Self::new(
            format!("fractional(a={a})"),
            (0.0, 1.0),
            move |x| a * x / ((a - 1.0) * x + 1.0),
            move |x| x / ((1.0 - a) * x + a),
        )
    }

    /// `x -> x^p` on `[0, 1]`.
    pub fn power(p: f64) -> Self {
        assert!(p > 0.0, "power map needs p > 0");
        Self::new(
            format!("power(p={p})"),
            (0.0, 1.0),
            move |x| x.powf(p),
            move |x| x.powf(1.0 / p),
        )
    }

    /// Composition applying `maps[0]` first. The domain is that of the first map.
    pub fn compose(maps: &[TauMap]) -> Self {
        assert!(!maps.is_empty(), "composition of zero maps");
        let fwd: Vec<RealFn> = maps.iter().map(|m| m.forward.clone()).collect();
        let inv: Vec<RealFn> = maps.iter().rev().map(|m| m.inverse.clone()).collect();
        let name = maps
            .iter()
            .map(|m| m.name.as_str())
            .collect::<Vec<_>>()
            .join(" then ");
        Self::new(
            name,
            (maps[0].lo, maps[0].hi),
            move |x| fwd.iter().fold(x, |acc, f| f(acc)),
            move |x| inv.iter().fold(x, |acc, f| f(acc)),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    #[inline]
    pub fn inverse(&self, x: f64) -> f64 {
        (self.inverse)(x)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn forward_fn(&self) -> RealFn {
        self.forward.clone()
    }

    pub fn inverse_fn(&self) -> RealFn {
        self.inverse.clone()
    }

    /// Membership test with a relative slack of `tol`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        let slack = tol * (1.0 + x.abs());
        x.is_finite() && x >= self.lo - slack && x <= self.hi + slack
    }

    /// Largest `|inverse(forward(x)) - x| / (1 + |x|)` over the samples.
    pub fn roundtrip_error(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .map(|&x| (self.inverse(self.forward(x)) - x).abs() / (1.0 + x.abs()))
            .fold(0.0, f64::max)
    }
}

const DOMAIN_TOL: f64 = 1e-12;

/// `tau^n(x0)`; negative `n` iterates the inverse.
pub fn iterate(map: &TauMap, x0: f64, n: i64) -> Result<f64> {
    let (lo, hi) = map.domain();
    let mut x = x0;
    let step = |x: f64| if n >= 0 { map.forward(x) } else { map.inverse(x) };
    for _ in 0..n.unsigned_abs() {
        x = step(x);
        if !map.contains(x, DOMAIN_TOL) {
            return Err(Error::DomainEscape { point: x, lo, hi });
        }
    }
    Ok(x)
}

/// Outcome of a fixed-point search along a forward orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitResult {
    /// Estimate of `tau^inf(x0)`, refined by Aitken extrapolation once the
    /// iteration has converged.
    pub value: f64,
    pub last_iterate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Iterates until `|tau^{n+1} - tau^n| < tol (1 + |tau^n|)`.
pub fn limit_point(map: &TauMap, x0: f64, tol: f64, max_iter: usize) -> LimitResult {
    assert!(tol > 0.0 && max_iter >= 1);
    let mut prev2 = f64::NAN;
    let mut prev = x0;
    for it in 1..=max_iter {
        let next = map.forward(prev);
        if !next.is_finite() {
            return LimitResult { value: prev, last_iterate: prev, iterations: it, converged: false };
        }
        if (next - prev).abs() < tol * (1.0 + prev.abs()) {
            let value = aitken(prev2, prev, next);
            let value = if (map.forward(value) - value).abs() <= (map.forward(next) - next).abs() {
                value
            } else {
                next
            };
            return LimitResult { value, last_iterate: next, iterations: it, converged: true };
        }
        prev2 = prev;
        prev = next;
    }
    LimitResult { value: prev, last_iterate: prev, iterations: max_iter, converged: false }
}

fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    if !x0.is_finite() {
        return x2;
    }
    let d1 = x1 - x0;
    let d2 = x2 - 2.0 * x1 + x0;
    if d2 == 0.0 || !d2.is_finite() {
        return x2;
    }
    let v = x0 - d1 * d1 / d2;
    if v.is_finite() {
        v
    } else {
        x2
    }
}

/// Which orbit set the grid represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMode {
    Semigroup { base: f64 },
    Interval { a: f64, b: f64 },
    Group { base: f64 },
}

/// Weight used to truncate the backward direction of group orbits.
pub type DecayWeight = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Grid construction parameters.
#[derive(Clone)]
pub struct GridSpec {
    pub mode: GridMode,
    /// Relative tolerance of the fixed-point search.
    pub fixed_point_tol: f64,
    pub max_iter: usize,
    /// Forward truncation: stop once `|delta_n| < delta_tol (1 + |limit|)` three times in a row.
    pub delta_tol: f64,
    pub max_depth: usize,
    /// Backward depth cap for group orbits.
    pub max_backward_depth: usize,
    /// Group orbits: stop backward once `|delta_n w(x_n)| < backward_tol` three times in a row.
    pub backward_tol: f64,
    pub backward_weight: Option<DecayWeight>,
    /// Tolerance for comparing the limits of the two interval bases.
    pub limit_match_tol: f64,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("mode", &self.mode)
            .field("max_depth", &self.max_depth)
            .field("max_backward_depth", &self.max_backward_depth)
            .finish_non_exhaustive()
    }
}

impl GridSpec {
    pub fn new(mode: GridMode) -> Self {
        Self {
            mode,
            fixed_point_tol: 1e-13,
            max_iter: 10_000,
            delta_tol: 1e-15,
            max_depth: 512,
            max_backward_depth: 64,
            backward_tol: 1e-15,
            backward_weight: None,
            limit_match_tol: 1e-10,
        }
    }

    pub fn semigroup(base: f64) -> Self {
        Self::new(GridMode::Semigroup { base })
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Self::new(GridMode::Interval { a, b })
    }

    pub fn group(base: f64) -> Self {
        Self::new(GridMode::Group { base })
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_backward_depth(mut self, depth: usize) -> Self {
        self.max_backward_depth = depth;
        self
    }

    pub fn with_backward_weight(mut self, w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.backward_weight = Some(Arc::new(w));
        self
    }
}

/// One orbit inside a grid.
#[derive(Debug, Clone)]
pub struct Segment {
    pub base: f64,
    /// Orbit step `n` of the first stored point (negative for group orbits).
    pub first_step: i64,
    pub points: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `tau` of the last stored point.
    pub tail_next: f64,
    pub limit: f64,
    /// Orientation of the segment in the integral: `-1` for the orbit of `a`.
    pub sign: f64,
    /// Flat index of the first point.
    pub offset: usize,
    /// Whether the first stored point is a true boundary point (semigroup base).
    pub has_boundary: bool,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Local index of the orbit base.
    pub fn base_index(&self) -> usize {
        (-self.first_step) as usize
    }
}

/// A truncated orbit set with precomputed steps.
#[derive(Debug)]
pub struct OrbitGrid {
    map: TauMap,
    mode: GridMode,
    segments: Vec<Segment>,
    len: usize,
    /// Forward truncation hit `max_depth` before the step criterion.
    pub truncated_by_depth: bool,
    /// Group orbits: the backward weight criterion was met (otherwise the depth cap stopped it).
    pub backward_converged: bool,
}

/// Shared grid handle; grid functions keep one.
pub type Grid = Arc<OrbitGrid>;

struct Forward {
    points: Vec<f64>,
    tail_next: f64,
    limit: f64,
    hit_depth: bool,
}

fn forward_orbit(map: &TauMap, base: f64, spec: &GridSpec) -> Result<Forward> {
    let (lo, hi) = map.domain();
    if !map.contains(base, DOMAIN_TOL) {
        return Err(Error::DomainEscape { point: base, lo, hi });
    }
    let lim = limit_point(map, base, spec.fixed_point_tol, spec.max_iter);
    if !lim.converged {
        return Err(Error::NotConverged { iterations: lim.iterations, last: lim.last_iterate });
    }
    let limit = lim.value;
    let cutoff = spec.delta_tol * (1.0 + limit.abs());
    let mut points = vec![base];
    let mut small = 0usize;
    let mut hit_depth = false;
    loop {
        let x = *points.last().unwrap();
        let next = map.forward(x);
        if !map.contains(next, DOMAIN_TOL) {
            return Err(Error::DomainEscape { point: next, lo, hi });
        }
        let delta = x - next;
        if delta == 0.0 {
            if points.len() == 1 {
                return Err(Error::DegenerateStep { x });
            }
            // reached the fixed point in floating point; drop it
            points.pop();
            let last = *points.last().unwrap();
            return Ok(Forward { tail_next: map.forward(last), points, limit, hit_depth });
        }
        if delta.abs() < cutoff {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 3 {
            return Ok(Forward { points, tail_next: next, limit, hit_depth });
        }
        if points.len() > spec.max_depth {
            hit_depth = true;
            return Ok(Forward { points, tail_next: next, limit, hit_depth });
        }
        points.push(next);
    }
}

fn deltas_of(points: &[f64], tail_next: f64) -> Vec<f64> {
    (0..points.len())
        .map(|i| points[i] - points.get(i + 1).copied().unwrap_or(tail_next))
        .collect()
}

impl OrbitGrid {
    /// Builds the grid described by `spec`.
    pub fn build(map: &TauMap, spec: &GridSpec) -> Result<Grid> {
        let mut segments = Vec::new();
        let truncated_by_depth;
        let mut backward_converged = true;
        match spec.mode {
            GridMode::Semigroup { base } => {
                let f = forward_orbit(map, base, spec)?;
                truncated_by_depth = f.hit_depth;
                segments.push(Segment {
                    base,
                    first_step: 0,
                    deltas: deltas_of(&f.points, f.tail_next),
                    points: f.points,
                    tail_next: f.tail_next,
                    limit: f.limit,
                    sign: 1.0,
                    offset: 0,
                    has_boundary: true,
                });
            }
            GridMode::Interval { a, b } => {
                let fa = forward_orbit(map, a, spec)?;
                let fb = forward_orbit(map, b, spec)?;
                if (fa.limit - fb.limit).abs() > spec.limit_match_tol * (1.0 + fa.limit.abs()) {
                    return Err(Error::LimitMismatch { a: fa.limit, b: fb.limit });
                }
                let hit = |orbit: &[f64], target: f64| {
                    orbit
                        .iter()
                        .enumerate()
                        .skip(1)
                        .find(|(_, &x)| (x - target).abs() <= 1e-12 * (1.0 + target.abs()))
                        .map(|(n, _)| n as i64)
                };
                if let Some(n) = hit(&fa.points, b) {
                    return Err(Error::CoincidentOrbits { steps: n });
                }
                if let Some(n) = hit(&fb.points, a) {
                    return Err(Error::CoincidentOrbits { steps: -n });
                }
                truncated_by_depth = fa.hit_depth || fb.hit_depth;
                let na = fa.points.len();
                segments.push(Segment {
                    base: a,
                    first_step: 0,
                    deltas: deltas_of(&fa.points, fa.tail_next),
                    points: fa.points,
                    tail_next: fa.tail_next,
                    limit: fa.limit,
                    sign: -1.0,
                    offset: 0,
                    has_boundary: true,
                });
                segments.push(Segment {
                    base: b,
                    first_step: 0,
                    deltas: deltas_of(&fb.points, fb.tail_next),
                    points: fb.points,
                    tail_next: fb.tail_next,
                    limit: fb.limit,
                    sign: 1.0,
                    offset: na,
                    has_boundary: true,
                });
            }
            GridMode::Group { base } => {
                let f = forward_orbit(map, base, spec)?;
                truncated_by_depth = f.hit_depth;
                let (lo, hi) = map.domain();
                let mut back: Vec<f64> = Vec::new();
                let mut small = 0usize;
                backward_converged = false;
                let mut cur = base;
                while back.len() < spec.max_backward_depth {
                    let prev = map.inverse(cur);
                    if !map.contains(prev, DOMAIN_TOL) || prev == cur {
                        let _ = (lo, hi);
                        break;
                    }
                    let delta = prev - cur;
                    let w = spec.backward_weight.as_ref().map_or(1.0, |w| w(prev));
                    back.push(prev);
                    cur = prev;
                    if (delta * w).abs() < spec.backward_tol {
                        small += 1;
                    } else {
                        small = 0;
                    }
                    if small >= 3 {
                        backward_converged = true;
                        break;
                    }
                }
                if spec.max_backward_depth == 0 {
                    backward_converged = true;
                }
                let nb = back.len();
                let mut points: Vec<f64> = back.into_iter().rev().collect();
                points.extend_from_slice(&f.points);
                segments.push(Segment {
                    base,
                    first_step: -(nb as i64),
                    deltas: deltas_of(&points, f.tail_next),
                    points,
                    tail_next: f.tail_next,
                    limit: f.limit,
                    sign: 1.0,
                    offset: 0,
                    has_boundary: false,
                });
            }
        }
        let len = segments.iter().map(Segment::len).sum();
        Ok(Arc::new(Self {
            map: map.clone(),
            mode: spec.mode,
            segments,
            len,
            truncated_by_depth,
            backward_converged,
        }))
    }

    /// Image of `source` under `kappa`, as a grid of `map` (which must satisfy
    /// `map(kappa(x_n)) = kappa(x_{n+1})`). The limit becomes `kappa(limit)`, possibly infinite.
    pub fn image(source: &OrbitGrid, map: &TauMap, kappa: impl Fn(f64) -> f64) -> Result<Grid> {
        let mut segments = Vec::with_capacity(source.segments.len());
        for seg in &source.segments {
            let points: Vec<f64> = seg.points.iter().map(|&x| kappa(x)).collect();
            let tail_next = kappa(seg.tail_next);
            for (j, &y) in points.iter().enumerate() {
                let next = points.get(j + 1).copied().unwrap_or(tail_next);
                let err = (map.forward(y) - next).abs();
                if !(err <= 1e-10 * (1.0 + next.abs())) {
                    return Err(Error::InvalidInput(format!(
                        "image point {j} is not mapped to its successor (error {err:e})"
                    )));
                }
            }
            segments.push(Segment {
                base: kappa(seg.base),
                first_step: seg.first_step,
                deltas: deltas_of(&points, tail_next),
                points,
                tail_next,
                limit: kappa(seg.limit),
                sign: seg.sign,
                offset: seg.offset,
                has_boundary: seg.has_boundary,
            });
        }
        Ok(Arc::new(Self {
            map: map.clone(),
            mode: match source.mode {
                GridMode::Semigroup { base } => GridMode::Semigroup { base: kappa(base) },
                GridMode::Interval { a, b } => GridMode::Interval { a: kappa(a), b: kappa(b) },
                GridMode::Group { base } => GridMode::Group { base: kappa(base) },
            },
            segments,
            len: source.len,
            truncated_by_depth: source.truncated_by_depth,
            backward_converged: source.backward_converged,
        }))
    }

    pub fn map(&self) -> &TauMap {
        &self.map
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Deepest forward step over all segments.
    pub fn truncation_depth(&self) -> usize {
        self.segments
            .iter()
            .map(|s| (s.first_step + s.len() as i64 - 1).max(0) as usize)
            .max()
            .unwrap_or(0)
    }

    /// `(segment, local index)` of a flat index.
    pub fn locate(&self, i: usize) -> (usize, usize) {
        for (s, seg) in self.segments.iter().enumerate() {
            if i < seg.offset + seg.len() {
                return (s, i - seg.offset);
            }
        }
        panic!("grid index {i} out of range {}", self.len);
    }

    pub fn segment_of(&self, i: usize) -> &Segment {
        &self.segments[self.locate(i).0]
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        let (s, j) = self.locate(i);
        self.segments[s].points[j]
    }

    /// `x_i - tau(x_i)`.
    #[inline]
    pub fn delta(&self, i: usize) -> f64 {
        let (s, j) = self.locate(i);
        self.segments[s].deltas[j]
    }

    /// Signed quadrature weight `sign * delta_i`.
    pub fn measure(&self, i: usize) -> f64 {
        let (s, j) = self.locate(i);
        self.segments[s].sign * self.segments[s].deltas[j]
    }

    /// `tau^inf` of the orbit through `x_i`.
    pub fn limit_at(&self, i: usize) -> f64 {
        self.segment_of(i).limit
    }

    /// Orbit step of flat index `i`.
    pub fn step(&self, i: usize) -> i64 {
        let (s, j) = self.locate(i);
        self.segments[s].first_step + j as i64
    }

    /// Flat index `steps` further along the same orbit, if stored.
    pub fn neighbor(&self, i: usize, steps: isize) -> Option<usize> {
        let (s, j) = self.locate(i);
        let seg = &self.segments[s];
        let k = j as isize + steps;
        (k >= 0 && (k as usize) < seg.len()).then(|| seg.offset + k as usize)
    }

    /// True at the base of a forward orbit, where the adjoint shift vanishes.
    pub fn is_boundary(&self, i: usize) -> bool {
        let (s, j) = self.locate(i);
        j == 0 && self.segments[s].has_boundary
    }

    pub fn points(&self) -> Vec<f64> {
        self.segments.iter().flat_map(|s| s.points.iter().copied()).collect()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.segments.iter().flat_map(|s| s.deltas.iter().copied()).collect()
    }

    /// Recomputes every step from the stored points and compares bitwise.
    pub fn deltas_consistent(&self) -> bool {
        self.segments.iter().all(|s| {
            deltas_of(&s.points, s.tail_next)
                .iter()
                .zip(&s.deltas)
                .all(|(a, b)| a.to_bits() == b.to_bits())
        })
    }

    /// Flat indices whose distance from every segment edge is at least `margin`,
    /// not counting true boundaries (semigroup bases) as edges.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for seg in &self.segments {
            let lo = if seg.has_boundary { 0 } else { margin };
            let hi = seg.len().saturating_sub(margin);
            out.extend((lo..hi).map(|j| seg.offset + j));
        }
        out
    }
}

/// `max |tau(x) - tau(y)| / |x - y|` over consecutive grid points.
pub fn contraction_estimate(map: &TauMap, grid: &OrbitGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for seg in grid.segments() {
        for w in seg.points.windows(2) {
            let (x, y) = (w[0], w[1]);
            if x == y {
                return f64::INFINITY;
            }
            let r = ((map.forward(x) - map.forward(y)) / (x - y)).abs();
            worst = worst.max(r);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterate_halving() {
        let m = TauMap::linear(0.5, 0.0);
        assert_eq!(iterate(&m, 1.0, 3).unwrap(), 0.125);
        assert_eq!(iterate(&m, 0.7, 0).unwrap(), 0.7);
        assert_eq!(iterate(&m, 0.125, -3).unwrap(), 1.0);
    }

    #[test]
    fn iterate_fractional_closed_form() {
        let m = TauMap::fractional(2.0);
        let v = iterate(&m, 0.5, 2).unwrap();
        let a2: f64 = 4.0;
        assert!((v - 0.8).abs() < 1e-15);
        assert!((v - a2 * 0.5 / ((a2 - 1.0) * 0.5 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn iterate_detects_escape() {
        let m = TauMap::fractional(2.0);
        assert!(iterate(&m, 0.5, -200).is_ok());
        let m = TauMap::new("shift", (0.0, 10.0), |x| x + 1.0, |x| x - 1.0);
        assert!(matches!(iterate(&m, 0.0, 20), Err(Error::DomainEscape { .. })));
    }

    #[test]
    fn limits() {
        let r = limit_point(&TauMap::linear(0.5, 0.0), 1.0, 1e-13, 10_000);
        assert!(r.converged && r.value.abs() < 1e-13);
        let r = limit_point(&TauMap::fractional(2.0), 0.5, 1e-13, 10_000);
        assert!(r.converged && (r.value - 1.0).abs() < 1e-13);
        let r = limit_point(&TauMap::linear(1.0, 1.0), 0.0, 1e-13, 10_000);
        assert!(!r.converged);
    }

    #[test]
    fn geometric_grid() {
        let m = TauMap::linear(0.5, 0.0);
        let g = OrbitGrid::build(&m, &GridSpec::semigroup(1.0).with_max_depth(50)).unwrap();
        assert_eq!(g.x(0), 1.0);
        assert_eq!(g.x(1), 0.5);
        assert_eq!(g.x(2), 0.25);
        assert!(g.limit_at(0).abs() < 1e-13);
        assert!(g.deltas_consistent());
        assert_eq!(g.len(), 51);
    }

    #[test]
    fn interval_grids() {
        let m = TauMap::linear(0.5, 0.0);
        let g = OrbitGrid::build(&m, &GridSpec::interval(-1.0, 1.0)).unwrap();
        assert_eq!(g.segments().len(), 2);
        assert_eq!(g.segments()[0].sign, -1.0);
        let err = OrbitGrid::build(&m, &GridSpec::interval(0.25, 1.0)).unwrap_err();
        assert!(matches!(err, Error::CoincidentOrbits { .. }));
    }

    #[test]
    fn fixed_base_is_rejected() {
        let m = TauMap::linear(0.5, 0.0);
        assert!(matches!(
            OrbitGrid::build(&m, &GridSpec::semigroup(0.0)),
            Err(Error::DegenerateStep { .. })
        ));
    }

    #[test]
    fn group_orbit_fractional() {
        let m = TauMap::fractional(2.0);
        let g = OrbitGrid::build(&m, &GridSpec::group(0.5).with_backward_depth(400)).unwrap();
        let seg = &g.segments()[0];
        assert!(seg.first_step < -10);
        assert_eq!(seg.points[seg.base_index()], 0.5);
        assert!(g.backward_converged);
        assert!(!g.is_boundary(0));
    }

    #[test]
    fn contraction() {
        let m = TauMap::linear(0.5, 0.0);
        let g = OrbitGrid::build(&m, &GridSpec::semigroup(1.0)).unwrap();
        assert_eq!(contraction_estimate(&m, &g), 0.5);
        let m = TauMap::linear(0.9, 0.0);
        let g = OrbitGrid::build(&m, &GridSpec::semigroup(1.0)).unwrap();
        assert!((contraction_estimate(&m, &g) - 0.9).abs() < 1e-12);
        let m = TauMap::fractional(2.0);
        let g = OrbitGrid::build(&m, &GridSpec::semigroup(0.5)).unwrap();
        let c = contraction_estimate(&m, &g);
        // finite-difference slope of tau near the fixed point 1 is 1/2
        let h = 1e-6;
        let slope = (m.forward(1.0) - m.forward(1.0 - h)) / h;
        assert!(c < 1.0 && c >= slope - 1e-6);
    }
}
