use std::ops::{Add, Mul, Neg, Sub};

/// Value of a scalar function together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Jet { value, d1: 0.0, d2: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet::new(c * self.value, c * self.d1, c * self.d2)
    }

    /// Jet of `w * left + (1 - w) * right`.
    ///
    /// `diff` is `left - right`, passed separately so callers can supply it
    /// without cancellation when both sides sit just above a common level.
    pub fn blend(w: Jet, left: Jet, right: Jet, diff: f64) -> Jet {
        if w == Jet::constant(1.0) {
            return left;
        }
        if w == Jet::constant(0.0) {
            return right;
        }
        let value = right.value + w.value * diff;
        // Written as a sum of the three natural terms so that sign
        // information survives when every term has the same sign.
        let d1 = w.value * left.d1 + (1.0 - w.value) * right.d1 + w.d1 * diff;
        let d2 = w.value * left.d2
            + (1.0 - w.value) * right.d2
            + 2.0 * w.d1 * (left.d1 - right.d1)
            + w.d2 * diff;
        Jet::new(value, d1, d2)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.d1, -self.d2)
    }
}

/// Product rule.
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

/// Jet of `c * y^p` at `y`, for integer `p >= 0`.
pub fn monomial(c: f64, y: f64, p: u32) -> Jet {
    let p_i = p as i32;
    let v = c * y.powi(p_i);
    let d1 = if p >= 1 { c * p as f64 * y.powi(p_i - 1) } else { 0.0 };
    let d2 = if p >= 2 {
        c * (p * (p - 1)) as f64 * y.powi(p_i - 2)
    } else {
        0.0
    };
    Jet::new(v, d1, d2)
}
