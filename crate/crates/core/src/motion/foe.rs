#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Default bound on the condition number of the FOE normal equations.
pub const FOE_CONDITION_BOUND: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoeEstimate {
    pub point: Point,
    /// Mean perpendicular distance from the flow lines to `point`.
    pub residual: f64,
}

/// A flow sample: where a feature sits and how far it moved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowVector {
    pub origin: Point,
    pub displacement: (f64, f64),
}

/// Least-squares point closest (in perpendicular distance) to every line
/// through a flow origin along its displacement.
pub fn estimate_foe(flow: &[FlowVector], condition_bound: f64) -> Result<FoeEstimate> {
    let mut lines = flow.iter().filter_map(|f| {
        let (dx, dy) = f.displacement;
        let len = (dx * dx + dy * dy).sqrt();
        (len > 1e-9).then(|| {
            let n = (-dy / len, dx / len);
            (n, n.0 * f.origin.x + n.1 * f.origin.y)
        })
    });
    let (mut sxx, mut sxy, mut syy, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0usize;
    for (n, c) in lines.by_ref() {
        sxx += n.0 * n.0;
        sxy += n.0 * n.1;
        syy += n.1 * n.1;
        bx += n.0 * c;
        by += n.1 * c;
        count += 1;
    }
    if count < 2 {
        return Err(Error::TooFewMatches(count));
    }
    // eigenvalues of the symmetric 2×2 normal matrix
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let gap = ((sxx - syy) * (sxx - syy) / 4.0 + sxy * sxy).sqrt();
    let lmax = tr / 2.0 + gap;
    let lmin = tr / 2.0 - gap;
    if lmin <= 0.0 || lmax / lmin > condition_bound || det <= 0.0 {
        return Err(Error::IllConditioned);
    }
    let point = Point::new((syy * bx - sxy * by) / det, (sxx * by - sxy * bx) / det);

    let residual = flow
        .iter()
        .filter_map(|f| {
            let (dx, dy) = f.displacement;
            let len = (dx * dx + dy * dy).sqrt();
            (len > 1e-9).then(|| ((-dy * (point.x - f.origin.x) + dx * (point.y - f.origin.y)) / len).abs())
        })
        .sum::<f64>()
        / count as f64;
    Ok(FoeEstimate { point, residual })
}
