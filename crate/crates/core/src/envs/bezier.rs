//! Quadratic Bezier evaluation for arm waypoint tracks.

use crate::error::{Error, Result};

/// Point on the quadratic Bezier curve through `p0` and `p2` with control
/// point `p1`, using the second-order Bernstein form:
///
/// `B(t) = (1-t)^2 p0 + 2 t (1-t) p1 + t^2 p2`
pub fn bezier_point(p0: [f64; 3], p1: [f64; 3], p2: [f64; 3], t: f64) -> Result<[f64; 3]> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "bezier parameter must lie in [0, 1], got {t}"
        )));
    }
    let u = 1.0 - t;
    let (b0, b1, b2) = (u * u, 2.0 * t * u, t * t);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = b0 * p0[i] + b1 * p1[i] + b2 * p2[i];
    }
    Ok(out)
}
