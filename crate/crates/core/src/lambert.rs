//! Real branches of the Lambert W function.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `-1/e`, the common branch point.
pub const BRANCH_POINT: f64 = -1.0 / E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Principal,
    MinusOne,
}

impl Branch {
    fn name(self) -> &'static str {
        match self {
            Branch::Principal => "principal",
            Branch::MinusOne => "minus-one",
        }
    }
}

/// Solves `w * exp(w) = x` on the requested branch.
pub fn lambert_w(branch: Branch, x: f64) -> Result<f64> {
    let out_of_domain = match branch {
        Branch::Principal => !(x >= BRANCH_POINT) || x.is_infinite(),
        Branch::MinusOne => !(x >= BRANCH_POINT && x < 0.0),
    };
    if out_of_domain {
        return Err(Error::LambertDomain {
            branch: branch.name(),
            x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == BRANCH_POINT {
        return Ok(-1.0);
    }
    Ok(halley(x, initial_guess(branch, x)))
}

fn initial_guess(branch: Branch, x: f64) -> f64 {
    // Series around the branch point in p = sqrt(2 (e x + 1)).
    let near = E * x + 1.0;
    if near < 0.3 {
        let p = (2.0 * near).max(0.0).sqrt();
        let sign = if branch == Branch::Principal { 1.0 } else { -1.0 };
        return -1.0 + sign * p - p * p / 3.0 + sign * 11.0 / 72.0 * p * p * p;
    }
    match branch {
        Branch::Principal if x < 3.0 => {
            // rough start, adequate on (-0.26, 3)
            let l = x.ln_1p();
            l * (1.0 - l.ln_1p() / (2.0 + l))
        }
        Branch::Principal => {
            let l1 = x.ln();
            let l2 = l1.ln();
            l1 - l2 + l2 / l1
        }
        Branch::MinusOne => {
            let l1 = (-x).ln();
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
    }
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1.0) {
            break;
        }
    }
    w
}
