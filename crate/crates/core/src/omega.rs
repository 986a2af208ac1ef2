//! The omega constant: the root of `x e^x = 1`.

use serde::Serialize;

/// Root of `x e^x = 1`; appears in the gradient/suboptimality inequality for
/// (L0,L1)-smooth functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaConstant {
    pub nu: f64,
}

impl OmegaConstant {
    pub fn residual(&self) -> f64 {
        self.nu * self.nu.exp() - 1.0
    }
}

/// Bisection on `[0.5, 0.6]`, where `x e^x - 1` changes sign, run until the
/// bracket collapses to adjacent floats.
pub fn omega_constant() -> OmegaConstant {
    let h = |x: f64| x * x.exp() - 1.0;
    let (mut lo, mut hi) = (0.5_f64, 0.6_f64);
    debug_assert!(h(lo) < 0.0 && h(hi) > 0.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = if h(lo).abs() <= h(hi).abs() { lo } else { hi };
    OmegaConstant { nu }
}
