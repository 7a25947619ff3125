//! Least-squares fit of `y(m) = A·alpha^m + B` with `A, B ∈ [0, 1]` and
//! `alpha ∈ (0, 1]`: a coarse grid over alpha, golden-section refinement,
//! and an exact box-constrained linear solve for `(A, B)` at each alpha.

use super::CalibrationError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
}

/// Sum of squared residuals of a decay curve over `points`.
pub fn sse(points: &[(f64, f64)], fit: &DecayFit) -> f64 {
    points.iter().map(|&(m, y)| (fit.a * fit.alpha.powf(m) + fit.b - y).powi(2)).sum()
}

/// Best `(A, B)` in the unit box for fixed alpha, with its residual. A
/// given `floor` pins `B`.
fn linear_part(points: &[(f64, f64)], alpha: f64, floor: Option<f64>) -> (f64, f64, f64) {
    if let Some(b) = floor {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(m, y) in points {
            let x = alpha.powf(m);
            sxy += x * (y - b);
            sxx += x * x;
        }
        let a = if sxx > 0.0 { (sxy / sxx).clamp(0.0, 1.0) } else { 0.0 };
        return (a, b, sse(points, &DecayFit { a, alpha, b }));
    }
    let xs: Vec<f64> = points.iter().map(|&(m, _)| alpha.powf(m)).collect();
    let n = points.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| x * p.1).sum();
    let eval = |a: f64, b: f64| {
        let f = DecayFit { a, alpha, b };
        (a, b, sse(points, &f))
    };
    let clamp = |v: f64| v.clamp(0.0, 1.0);
    let mut candidates = Vec::with_capacity(5);
    let det = n * sxx - sx * sx;
    if det.abs() > 1e-14 {
        let a = (n * sxy - sx * sy) / det;
        let b = (sy - a * sx) / n;
        if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) {
            return eval(a, b);
        }
    }
    // Optimum lies on the boundary of the box: fix one variable at an edge
    // and solve the other in closed form.
    for a in [0.0, 1.0] {
        candidates.push(eval(a, clamp((sy - a * sx) / n)));
    }
    if sxx > 0.0 {
        for b in [0.0, 1.0] {
            candidates.push(eval(clamp((sxy - b * sx) / sxx), b));
        }
    }
    candidates.into_iter().min_by(|x, y| x.2.total_cmp(&y.2)).expect("non-empty")
}

const ALPHA_MIN: f64 = 1e-6;
const GRID: usize = 400;

/// Fits the RB decay to `(m, mean survival)` points.
///
/// Constant data yields `alpha = 1, A = 0, B = y`.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit, CalibrationError> {
    fit(points, None)
}

/// [`fit_decay`] with the asymptote `B` held at `floor`. For two-qubit RB
/// the fully depolarized survival of |00⟩ is exactly 1/4 whatever the
/// readout error, so pinning it removes the A/B/alpha degeneracy of short
/// sequences.
pub fn fit_decay_with_floor(points: &[(f64, f64)], floor: f64) -> Result<DecayFit, CalibrationError> {
    fit(points, Some(floor.clamp(0.0, 1.0)))
}

fn fit(points: &[(f64, f64)], floor: Option<f64>) -> Result<DecayFit, CalibrationError> {
    let mut ms: Vec<f64> = points.iter().map(|p| p.0).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    if ms.len() < 3 {
        return Err(CalibrationError::TooFewLengths { need: 3, got: ms.len() });
    }
    if let Some(&(_, y)) = points.iter().find(|p| !(0.0..=1.0).contains(&p.1)) {
        return Err(CalibrationError::SurvivalOutOfRange(y));
    }
    let (lo_y, hi_y) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.1), h.max(p.1)));
    if hi_y - lo_y < 1e-12 {
        return Ok(DecayFit { a: 0.0, alpha: 1.0, b: points[0].1 });
    }

    let cost = |alpha: f64| linear_part(points, alpha, floor).2;
    // Grid denser near 1, where RB decays live.
    let grid: Vec<f64> = (0..=GRID)
        .map(|i| {
            let t = i as f64 / GRID as f64;
            (1.0 - (1.0 - t).powi(3)).max(ALPHA_MIN)
        })
        .collect();
    let costs: Vec<f64> = grid.iter().map(|&a| cost(a)).collect();
    let best = (0..grid.len()).min_by(|&i, &j| costs[i].total_cmp(&costs[j])).expect("grid");
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(GRID)];

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = cost(x2);
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    if costs[best] < cost(alpha) {
        alpha = grid[best];
    }
    let (a, b, _) = linear_part(points, alpha, floor);
    Ok(DecayFit { a, alpha, b })
}
