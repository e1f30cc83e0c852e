use serde::{Deserialize, Serialize};

use super::PotentialFn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortRangeReport {
    /// `sup |A(x)| / <x>` with `A = V^{-1/2}`.
    pub sup_a_ratio: f64,
    /// `sup |A'(x)|`.
    pub sup_a_prime: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Warping function `A = V^{-1/2}` and its derivative at `x`.
pub fn warping(v: &PotentialFn, x: f64) -> (f64, f64) {
    let j = v.jet(x);
    let a = j.value.powf(-0.5);
    (a, -0.5 * j.d1 * a / j.value)
}

/// Checks `|A| <= C <x>` and `|A'| <= C` over the given samples.
pub fn short_range_audit(v: &PotentialFn, x_samples: &[f64], bound: f64) -> ShortRangeReport {
    let (sup_a_ratio, sup_a_prime) = x_samples.iter().fold((0.0f64, 0.0f64), |(r, p), &x| {
        let (a, ap) = warping(v, x);
        (r.max(a.abs() / (1.0 + x * x).sqrt()), p.max(ap.abs()))
    });
    ShortRangeReport {
        sup_a_ratio,
        sup_a_prime,
        bound,
        pass: sup_a_ratio <= bound && sup_a_prime <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{build_potential, make_family, FamilyVariant};

    fn dyadic() -> PotentialFn {
        build_potential(&make_family(FamilyVariant::Dyadic { m: 3 }, 40, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn tail_is_inverse_square() {
        let v = dyadic();
        let xs: Vec<f64> = (0..=900).map(|i| 10.0 + 0.1 * i as f64).collect();
        for &x in &xs {
            let (a, _) = warping(&v, x);
            let r = a / (1.0 + x * x).sqrt();
            assert!((0.9..=1.1).contains(&r), "{x}: {r}");
        }
        assert!((v.value(50.0) * 2500.0 - 1.0).abs() < 0.01);
        let xs: Vec<f64> = (0..=980).map(|i| 2.0 + 0.1 * i as f64).collect();
        let rep = short_range_audit(&v, &xs, 1.5);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.sup_a_prime <= 1.5);
    }

    #[test]
    fn warping_at_origin() {
        let (a, ap) = warping(&dyadic(), 0.0);
        assert!((a - 2.0f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(ap, 0.0);
    }

    #[test]
    fn whole_line_audit() {
        let xs: Vec<f64> = (0..=4000).map(|i| -100.0 + 0.05 * i as f64).collect();
        let rep = short_range_audit(&dyadic(), &xs, 8.0);
        assert!(rep.pass, "{rep:?}");
    }
}
