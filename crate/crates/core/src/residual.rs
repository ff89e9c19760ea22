//! Residual metrics shared by the validation code.

use crate::grid_fn::GridFunction;

/// `max(1, sup |f|)` over several functions.
pub fn scale_of(fs: &[&GridFunction]) -> f64 {
    fs.iter().map(|f| f.scale()).fold(1.0, f64::max)
}

/// `max |lhs - rhs| / scale` over the common valid window.
pub fn pointwise(lhs: &GridFunction, rhs: &GridFunction, scale: f64) -> f64 {
    lhs.max_abs_diff(rhs) / scale
}

/// Residual of an identity involving a tau-derivative, measured after clearing
/// the `x - tau(x)` denominator: `max |lhs - rhs| min(1, |delta|) / scale`.
/// Deep in the orbit `delta` is tiny and the divided difference only carries
/// the rounding of its numerator divided by `delta`; the cleared form measures
/// the identity at the precision the inputs actually have.
pub fn cleared(lhs: &GridFunction, rhs: &GridFunction, scale: f64) -> f64 {
    let g = lhs.grid();
    assert!(lhs.same_grid(rhs), "grid mismatch");
    (0..g.len())
        .filter(|&i| lhs.is_valid(i) && rhs.is_valid(i))
        .map(|i| (lhs.value(i) - rhs.value(i)).norm() * g.delta(i).abs().min(1.0))
        .fold(0.0, f64::max)
        / scale
}

/// Indices `margin..` of each segment up to the last point whose step is at
/// least `1e-3` of the largest step, skipping `margin` at non-boundary edges.
/// Probe functions are supported here so that truncation never touches them.
pub fn probe_window(grid: &crate::orbit::OrbitGrid, margin: usize) -> Vec<usize> {
    let dmax = grid.deltas().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut out = Vec::new();
    for seg in grid.segments() {
        let lo = if seg.has_boundary { 0 } else { margin };
        let last = (0..seg.len()).rev().find(|&j| seg.deltas[j].abs() >= 1e-3 * dmax);
        let Some(last) = last else { continue };
        let hi = last.min(seg.len().saturating_sub(margin + 1));
        out.extend((lo..=hi.max(lo)).filter(|&j| j <= hi).map(|j| seg.offset + j));
    }
    out
}
