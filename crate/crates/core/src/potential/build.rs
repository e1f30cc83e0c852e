use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::family::{feasibility_audit, CriticalPointSpec, FamilySpec};
use super::PotentialError;
use crate::jet::{monomial, Jet};
use crate::step::step_on;
use crate::surgery::SurgeredPotential;

/// Far-field junction: `V = strength / (x - shift)^2` past `blend_end`,
/// blended from the interpolating polynomial on `[blend_start, blend_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub blend_start: f64,
    pub blend_end: f64,
    pub shift: f64,
    pub strength: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig {
            blend_start: 1.2,
            blend_end: 1.8,
            shift: -0.2,
            strength: 1.0,
        }
    }
}

impl TailConfig {
    fn tail(&self, x: f64) -> Jet {
        let r = x - self.shift;
        let inv = 1.0 / r;
        let v = self.strength * inv * inv;
        Jet::new(v, -2.0 * v * inv, 6.0 * v * inv * inv)
    }

    /// Last abscissa at which the potential still equals the polynomial model.
    pub fn tilde_region_end(&self) -> f64 {
        self.blend_start + 0.25 * (self.blend_end - self.blend_start)
    }
}

/// `1 + (1 - x)^m`, odd `m >= 3`; equivalently `1 - (x - 1)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TildeModel {
    pub m: u32,
}

impl TildeModel {
    pub fn jet(&self, x: f64) -> Jet {
        let p = monomial(1.0, x - 1.0, self.m);
        Jet::new(1.0 - p.value, -p.d1, -p.d2)
    }
}

/// Single-critical-point potentials used to probe the catalog in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelPotential {
    /// `height / (1 + x^2)`: nondegenerate maximum at the origin.
    BarrierTop { height: f64 },
    /// `height / (1 + x^(2m))`: maximum with `V ~ height - height x^(2m)`.
    DegenerateTop { height: f64, half_order: u32 },
    /// `level (1 - tanh(x)^m)`, odd `m`: monotone profile with a single
    /// inflection of order `m` at the origin.
    InflectionStep { level: f64, order: u32 },
}

impl ModelPotential {
    pub fn critical_value(&self) -> f64 {
        match *self {
            ModelPotential::BarrierTop { height } | ModelPotential::DegenerateTop { height, .. } => height,
            ModelPotential::InflectionStep { level, .. } => level,
        }
    }

    pub fn jet(&self, x: f64) -> Jet {
        match *self {
            ModelPotential::BarrierTop { height } => reciprocal_bump(height, monomial(1.0, x, 2)),
            ModelPotential::DegenerateTop { height, half_order } => {
                reciprocal_bump(height, monomial(1.0, x, 2 * half_order))
            }
            ModelPotential::InflectionStep { level, order } => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                let m = order as i32;
                let mf = order as f64;
                let tm = t.powi(m);
                let d1 = mf * t.powi(m - 1) * s;
                let d2 = mf * t.powi(m - 2) * s * ((mf - 1.0) * s - 2.0 * t * t);
                Jet::new(level * (1.0 - tm), -level * d1, -level * d2)
            }
        }
    }
}

/// Jet of `height / (1 + u)` given the jet of `u`.
fn reciprocal_bump(height: f64, u: Jet) -> Jet {
    let q = 1.0 / (1.0 + u.value);
    Jet::new(
        height * q,
        -height * u.d1 * q * q,
        height * (2.0 * u.d1 * u.d1 * q * q * q - u.d2 * q * q),
    )
}

/// A family potential assembled from blended local models.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPotential {
    pub spec: FamilySpec,
    pub tilde: TildeModel,
    pub tail: TailConfig,
    /// `V = apex / (1 + cap_curvature x^2)` near and left of the origin.
    pub cap_curvature: f64,
}

impl FamilyPotential {
    fn cap(&self, x: f64) -> Jet {
        reciprocal_bump(self.spec.apex_value, monomial(self.cap_curvature, x, 2))
    }

    /// Jet of the local model at the point with position `i` in `spec.points`.
    fn local(&self, i: usize, x: f64) -> (Jet, Jet) {
        let p = &self.spec.points[i];
        let poly = p.polynomial(x - p.location);
        (Jet::new(1.0 + p.excess - poly.value, -poly.d1, -poly.d2), poly)
    }

    pub fn jet(&self, x: f64) -> Jet {
        let pts = &self.spec.points;
        let first = &pts[0];
        let last_i = pts.len() - 1;
        let last = &pts[last_i];
        let last_end = last.location + self.spec.gaps[last_i];
        if x <= 0.0 {
            self.cap(x)
        } else if x < first.location {
            let w = step_on(x, 0.0, first.location);
            let c = self.cap(x);
            let (r, _) = self.local(0, x);
            Jet::blend(w, c, r, c.value - r.value)
        } else if x < last.location {
            // points[i].location <= x < points[i + 1].location
            let i = pts.partition_point(|p| p.location <= x) - 1;
            let (l, pl) = self.local(i, x);
            let (r, pr) = self.local(i + 1, x);
            let diff = (pts[i].excess - pts[i + 1].excess) - pl.value + pr.value;
            let w = step_on(x, pts[i].location, self.spec.gaps[i]);
            Jet::blend(w, l, r, diff)
        } else if x < last_end {
            let (l, pl) = self.local(last_i, x);
            let r = self.tilde.jet(x);
            let diff = last.excess - pl.value - (1.0 - x).powi(self.tilde.m as i32);
            let w = step_on(x, last.location, self.spec.gaps[last_i]);
            Jet::blend(w, l, r, diff)
        } else if x < self.tail.blend_start {
            self.tilde.jet(x)
        } else if x < self.tail.blend_end {
            let v = self.tilde.jet(x);
            let t = self.tail.tail(x);
            let w = step_on(x, self.tail.blend_start, self.tail.blend_end - self.tail.blend_start);
            Jet::blend(w, v, t, v.value - t.value)
        } else {
            self.tail.tail(x)
        }
    }

    fn monotonicity_check(&self, samples_per_interval: usize) -> Result<(), PotentialError> {
        let pts = &self.spec.points;
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 2);
        intervals.push((0.0, pts[0].location));
        for (i, p) in pts.iter().enumerate() {
            intervals.push((p.location, p.location + self.spec.gaps[i]));
        }
        intervals.push((pts[pts.len() - 1].location + self.spec.gaps[pts.len() - 1], 3.0));
        for (a, b) in intervals {
            for j in 0..samples_per_interval {
                let x = a + (b - a) * (j as f64 + 0.5) / samples_per_interval as f64;
                let d = self.jet(x).d1;
                if !(d < 0.0) {
                    return Err(PotentialError::NotMonotone { x, derivative: d });
                }
            }
        }
        Ok(())
    }
}

/// An evaluable potential with derivatives up to order 2.
///
/// Immutable after construction; clones share the underlying data.
#[derive(Debug, Clone)]
pub enum PotentialFn {
    Family(Arc<FamilyPotential>),
    Tilde(TildeModel),
    Model(ModelPotential),
    Constant(f64),
    Surgered(Arc<SurgeredPotential>),
}

impl PotentialFn {
    pub fn jet(&self, x: f64) -> Jet {
        match self {
            PotentialFn::Family(f) => f.jet(x),
            PotentialFn::Tilde(t) => t.jet(x),
            PotentialFn::Model(m) => m.jet(x),
            PotentialFn::Constant(c) => Jet::constant(*c),
            PotentialFn::Surgered(s) => s.jet(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).value
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.jet(x).d1
    }

    /// Radius `M` with every critical point inside `|x| <= M`.
    pub fn trapping_radius(&self) -> f64 {
        match self {
            PotentialFn::Family(f) => f.spec.accumulation_point,
            PotentialFn::Surgered(s) => s.base().trapping_radius(),
            _ => 1.0,
        }
    }

    /// Critical points of `V` that are known by construction.
    pub fn critical_points(&self) -> Vec<f64> {
        match self {
            PotentialFn::Family(f) => std::iter::once(0.0)
                .chain(f.spec.points.iter().map(|p| p.location))
                .chain(std::iter::once(f.spec.accumulation_point))
                .collect(),
            PotentialFn::Tilde(_) => vec![1.0],
            PotentialFn::Model(_) => vec![0.0],
            PotentialFn::Constant(_) => vec![],
            PotentialFn::Surgered(s) => s.critical_points(),
        }
    }

    pub fn family(&self) -> Option<&FamilyPotential> {
        match self {
            PotentialFn::Family(f) => Some(f),
            PotentialFn::Surgered(s) => s.base().family(),
            _ => None,
        }
    }
}

/// Assembles the smooth potential for a feasible family.
pub fn build_potential(spec: &FamilySpec) -> Result<PotentialFn, PotentialError> {
    build_potential_with_tail(spec, TailConfig::default())
}

pub fn build_potential_with_tail(spec: &FamilySpec, tail: TailConfig) -> Result<PotentialFn, PotentialError> {
    let report = feasibility_audit(spec);
    if !report.pass {
        let worst = report
            .intervals
            .iter()
            .find(|iv| iv.margin <= 0.0)
            .map(|iv| (iv.n, iv.margin))
            .unwrap_or((0, 0.0));
        return Err(PotentialError::Infeasible {
            n: worst.0,
            margin: worst.1,
        });
    }
    let tilde = TildeModel { m: spec.tilde_order() };
    let cap_curvature = cap_curvature_for(spec.apex_value, spec.first());
    let fp = FamilyPotential {
        spec: spec.clone(),
        tilde,
        tail,
        cap_curvature,
    };
    fp.monotonicity_check(64)?;
    Ok(PotentialFn::Family(Arc::new(fp)))
}

/// Chooses the cap so that over the blend transition it stays above every
/// value the first local model takes there.
fn cap_curvature_for(apex: f64, first: &CriticalPointSpec) -> f64 {
    let edge = 0.75 * first.location;
    let r_max = 1.0 + first.excess + first.drop_over(edge);
    let target = 0.5 * (apex + r_max);
    (apex / target - 1.0) / (edge * edge)
}

/// The interpolating polynomial `1 + (1 - x)^m`.
pub fn build_vtilde(m: u32) -> Result<PotentialFn, PotentialError> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(PotentialError::InvalidOrder { order: m });
    }
    Ok(PotentialFn::Tilde(TildeModel { m }))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_family, FamilyVariant};

    fn variants() -> Vec<FamilyVariant> {
        vec![
            FamilyVariant::Dyadic { m: 3 },
            FamilyVariant::Dyadic { m: 5 },
            FamilyVariant::Dyadic { m: 7 },
            FamilyVariant::PowerLaw { m: 5, k: 7 },
            FamilyVariant::Alternating,
        ]
    }

    #[test]
    fn values_at_critical_points() {
        for var in variants() {
            let spec = make_family(var, 12, 2.0).unwrap();
            let v = build_potential(&spec).unwrap();
            assert_eq!(v.value(0.0), 2.0);
            for p in &spec.points {
                let j = v.jet(p.location);
                assert!((j.value - p.value).abs() < 1e-15, "{var:?} n={}", p.index);
                assert!(j.d1.abs() < 1e-300, "{var:?} n={} d1={}", p.index, j.d1);
            }
            assert_eq!(v.value(1.0), 1.0);
        }
    }

    #[test]
    fn strictly_decreasing_and_positive() {
        for var in variants() {
            let spec = make_family(var, 12, 2.0).unwrap();
            let v = build_potential(&spec).unwrap();
            let crit = v.critical_points();
            let mut prev = f64::INFINITY;
            for i in 0..=40_000 {
                let x = 6.0 * i as f64 / 40_000.0;
                let j = v.jet(x);
                assert!(j.value > 0.0);
                assert!(j.value <= prev + 1e-15, "{var:?} at {x}");
                if !crit.iter().any(|c| (x - c).abs() < 1e-9) && x > 0.0 {
                    assert!(j.d1 <= 0.0, "{var:?} at {x}: {}", j.d1);
                }
                prev = j.value;
            }
            // even in the cap region
            assert!(v.value(-0.3) < 2.0 && v.derivative(-0.3) > 0.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let spec = make_family(FamilyVariant::Dyadic { m: 3 }, 12, 2.0).unwrap();
        let v = build_potential(&spec).unwrap();
        let eps = 1e-6;
        for i in 1..400 {
            let x = -0.5 + 3.0 * i as f64 / 400.0;
            let j = v.jet(x);
            let fd1 = (v.value(x + eps) - v.value(x - eps)) / (2.0 * eps);
            let fd2 = (v.derivative(x + eps) - v.derivative(x - eps)) / (2.0 * eps);
            assert!((j.d1 - fd1).abs() < 1e-5 * (1.0 + fd1.abs()), "x={x}: {} vs {fd1}", j.d1);
            assert!((j.d2 - fd2).abs() < 1e-3 * (1.0 + fd2.abs()), "x={x}: {} vs {fd2}", j.d2);
        }
    }

    #[test]
    fn polynomial_region_is_exact() {
        let spec = make_family(FamilyVariant::Dyadic { m: 3 }, 12, 2.0).unwrap();
        let v = build_potential(&spec).unwrap();
        let t = TildeModel { m: 3 };
        for x in [0.9999, 1.0, 1.1, 1.3, 1.35] {
            assert_eq!(v.value(x), t.jet(x).value);
        }
        assert!(build_vtilde(4).is_err());
    }

    #[test]
    fn models() {
        let q = ModelPotential::DegenerateTop { height: 1.0, half_order: 2 };
        assert_eq!(q.jet(0.0).value, 1.0);
        assert!((q.jet(1.0).value - 0.5).abs() < 1e-15);
        let inf = ModelPotential::InflectionStep { level: 1.0, order: 3 };
        let eps = 1e-6;
        for x in [-1.3, -0.2, 0.4, 2.0] {
            for m in [q, inf, ModelPotential::BarrierTop { height: 1.0 }] {
                let j = m.jet(x);
                let fd1 = (m.jet(x + eps).value - m.jet(x - eps).value) / (2.0 * eps);
                let fd2 = (m.jet(x + eps).d1 - m.jet(x - eps).d1) / (2.0 * eps);
                assert!((j.d1 - fd1).abs() < 1e-7, "{m:?} {x}");
                assert!((j.d2 - fd2).abs() < 1e-5, "{m:?} {x}");
            }
            assert!(inf.jet(x).d1 <= 0.0);
        }
    }
}
