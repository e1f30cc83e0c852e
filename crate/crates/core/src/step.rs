//! The smooth step used by every blend in the crate.

use crate::jet::Jet;

/// C-infinity step in `t`: identically 1 for `t <= 1/4`, identically 0 for
/// `t >= 3/4`, strictly decreasing in between.
///
/// Built as a logistic function of `1/(1-s) - 1/s` with `s = 2t - 1/2`, which
/// is the usual ratio of `exp(-1/s)` bumps written in a cancellation-free way.
pub fn smooth_step(t: f64) -> Jet {
    let s = 2.0 * t - 0.5;
    if s <= 0.0 {
        return Jet::constant(1.0);
    }
    if s >= 1.0 {
        return Jet::constant(0.0);
    }
    let u = 1.0 - s;
    let phi = 1.0 / u - 1.0 / s;
    if phi > 700.0 {
        return Jet::constant(0.0);
    }
    if phi < -700.0 {
        return Jet::constant(1.0);
    }
    let w = 1.0 / (1.0 + phi.exp());
    let dphi = 1.0 / (s * s) + 1.0 / (u * u);
    let d2phi = -2.0 / (s * s * s) + 2.0 / (u * u * u);
    let a = w * (1.0 - w);
    let dw_ds = -a * dphi;
    let d2w_ds2 = a * (1.0 - 2.0 * w) * dphi * dphi - a * d2phi;
    // ds/dt = 2
    Jet::new(w, 2.0 * dw_ds, 4.0 * d2w_ds2)
}

/// The step composed with an affine map `t = (x - origin) / width`.
pub fn step_on(x: f64, origin: f64, width: f64) -> Jet {
    let j = smooth_step((x - origin) / width);
    Jet::new(j.value, j.d1 / width, j.d2 / (width * width))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_outside_transition() {
        for t in [-1.0, 0.0, 0.2, 0.25] {
            assert_eq!(smooth_step(t), Jet::constant(1.0));
        }
        for t in [0.75, 0.9, 2.0] {
            assert_eq!(smooth_step(t), Jet::constant(0.0));
        }
        assert!((smooth_step(0.5).value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let eps = 1e-5;
        let mut t = 0.26;
        while t < 0.74 {
            let j = smooth_step(t);
            let fd1 = (smooth_step(t + eps).value - smooth_step(t - eps).value) / (2.0 * eps);
            let fd2 = (smooth_step(t + eps).d1 - smooth_step(t - eps).d1) / (2.0 * eps);
            assert!((j.d1 - fd1).abs() < 1e-6 * (1.0 + fd1.abs()), "t={t}");
            assert!((j.d2 - fd2).abs() < 1e-5 * (1.0 + fd2.abs()), "t={t}");
            assert!(j.d1 <= 0.0);
            t += 0.01;
        }
    }
}
