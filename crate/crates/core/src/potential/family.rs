//! Declarative descriptions of the three potential families.

use serde::{Deserialize, Serialize};

use super::PotentialError;
use crate::jet::{monomial, Jet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    NondegenerateMax,
    DegenerateMax,
    Inflection,
}

impl CriticalKind {
    /// Kind implied by the Taylor order of a critical point.
    pub fn for_order(order: u32) -> Option<CriticalKind> {
        match order {
            2 => Some(CriticalKind::NondegenerateMax),
            o if o >= 3 && o % 2 == 1 => Some(CriticalKind::Inflection),
            o if o >= 4 => Some(CriticalKind::DegenerateMax),
            _ => None,
        }
    }
}

/// One critical point `x_n` with local model
/// `V(x) = value - coefficient (x - x_n)^order - sum c (x - x_n)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointSpec {
    /// Family index `n`.
    pub index: u32,
    pub location: f64,
    pub value: f64,
    /// `value - 1`, kept separately because `value` rounds to 1 for large `n`.
    pub excess: f64,
    pub order: u32,
    pub kind: CriticalKind,
    pub coefficient: f64,
    /// Higher-order terms `(p, c)` of the local model beyond the leading one.
    #[serde(default)]
    pub extra_terms: Vec<(u32, f64)>,
}

impl CriticalPointSpec {
    /// Jet of the polynomial part `coefficient y^order + sum c y^p`.
    pub fn polynomial(&self, y: f64) -> Jet {
        self.extra_terms
            .iter()
            .fold(monomial(self.coefficient, y, self.order), |acc, &(p, c)| {
                acc + monomial(c, y, p)
            })
    }

    /// Jet of the local model at `x`.
    pub fn local_model(&self, x: f64) -> Jet {
        let p = self.polynomial(x - self.location);
        Jet::new(1.0 + self.excess - p.value, -p.d1, -p.d2)
    }

    /// Height the local model loses over a distance `d`.
    pub fn drop_over(&self, d: f64) -> f64 {
        self.extra_terms
            .iter()
            .fold(self.coefficient.abs() * d.powi(self.order as i32), |acc, &(p, c)| {
                acc + c.abs() * d.powi(p as i32)
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum FamilyVariant {
    Dyadic { m: u32 },
    #[serde(rename = "powerlaw")]
    PowerLaw { m: u32, k: u32 },
    Alternating,
}

impl FamilyVariant {
    /// Order of the interpolating polynomial `1 + (1 - x)^m`.
    pub fn tilde_order(&self) -> u32 {
        match *self {
            FamilyVariant::Dyadic { m } | FamilyVariant::PowerLaw { m, .. } => m,
            FamilyVariant::Alternating => 5,
        }
    }

    /// First retained index. The power-law family starts at `n = 2` because
    /// `1 - 1^{-k}` would put its first point on the apex at the origin.
    pub fn first_index(&self) -> u32 {
        match self {
            FamilyVariant::PowerLaw { .. } => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyVariant::Dyadic { .. } => "dyadic",
            FamilyVariant::PowerLaw { .. } => "powerlaw",
            FamilyVariant::Alternating => "alternating",
        }
    }

    /// Distance `1 - x_n`.
    pub fn offset(&self, n: u32) -> f64 {
        match *self {
            FamilyVariant::Dyadic { .. } | FamilyVariant::Alternating => 0.5f64.powi(n as i32),
            FamilyVariant::PowerLaw { k, .. } => (n as f64).powi(-(k as i32)),
        }
    }

    /// `d_n = x_{n+1} - x_n`.
    pub fn gap(&self, n: u32) -> f64 {
        match *self {
            FamilyVariant::Dyadic { .. } | FamilyVariant::Alternating => 0.5f64.powi(n as i32 + 1),
            FamilyVariant::PowerLaw { .. } => self.offset(n) - self.offset(n + 1),
        }
    }

    /// `alpha_n - 1`.
    pub fn excess(&self, n: u32) -> f64 {
        match *self {
            FamilyVariant::Dyadic { m } => 0.5f64.powi((m * n) as i32),
            FamilyVariant::PowerLaw { m, k } => (n as f64).powi(-((k * m) as i32)),
            FamilyVariant::Alternating => 0.5f64.powi(5 * n as i32),
        }
    }

    fn local_terms(&self, n: u32) -> (u32, f64, Vec<(u32, f64)>) {
        match *self {
            FamilyVariant::Dyadic { m } | FamilyVariant::PowerLaw { m, .. } => (m, 1.0, vec![]),
            FamilyVariant::Alternating => {
                if n.is_multiple_of(2) {
                    (3, 0.5f64.powi(2 * n as i32), vec![(5, 1.0)])
                } else {
                    (5, 1.0, vec![])
                }
            }
        }
    }

    fn validate(&self) -> Result<(), PotentialError> {
        let check_m = |m: u32| {
            if m >= 3 && m % 2 == 1 {
                Ok(())
            } else {
                Err(PotentialError::InvalidOrder { order: m })
            }
        };
        match *self {
            FamilyVariant::Dyadic { m } => check_m(m),
            FamilyVariant::PowerLaw { m, k } => {
                check_m(m)?;
                if k == 0 {
                    return Err(PotentialError::InvalidParameter("power-law k must be >= 1".into()));
                }
                Ok(())
            }
            FamilyVariant::Alternating => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub variant: FamilyVariant,
    pub n_max: u32,
    pub apex_value: f64,
    pub accumulation_point: f64,
    pub points: Vec<CriticalPointSpec>,
    /// `gaps[i] = d_n` for `points[i]`, including the gap past `n_max`.
    pub gaps: Vec<f64>,
}

impl FamilySpec {
    pub fn point(&self, n: u32) -> Option<&CriticalPointSpec> {
        let first = self.variant.first_index();
        n.checked_sub(first).and_then(|i| self.points.get(i as usize))
    }

    pub fn first(&self) -> &CriticalPointSpec {
        &self.points[0]
    }

    pub fn last(&self) -> &CriticalPointSpec {
        self.points.last().expect("family has at least two points")
    }

    pub fn tilde_order(&self) -> u32 {
        self.variant.tilde_order()
    }
}

pub const DEFAULT_N_MAX: u32 = 40;
pub const DEFAULT_APEX: f64 = 2.0;

/// Builds the closed-form critical data of a family.
pub fn make_family(variant: FamilyVariant, n_max: u32, apex_value: f64) -> Result<FamilySpec, PotentialError> {
    variant.validate()?;
    let first = variant.first_index();
    if n_max < 2 || n_max < first + 1 {
        return Err(PotentialError::TooFewPoints { n_max });
    }
    let points: Vec<CriticalPointSpec> = (first..=n_max)
        .map(|n| {
            let (order, coefficient, extra_terms) = variant.local_terms(n);
            let excess = variant.excess(n);
            CriticalPointSpec {
                index: n,
                location: 1.0 - variant.offset(n),
                value: 1.0 + excess,
                excess,
                order,
                kind: CriticalKind::for_order(order).expect("family orders are odd >= 3"),
                coefficient,
                extra_terms,
            }
        })
        .collect();
    let gaps = (first..=n_max).map(|n| variant.gap(n)).collect();
    if !(apex_value > points[0].value) {
        return Err(PotentialError::ApexTooLow {
            apex: apex_value,
            first_value: points[0].value,
        });
    }
    Ok(FamilySpec {
        variant,
        n_max,
        apex_value,
        accumulation_point: 1.0,
        points,
        gaps,
    })
}

/// Serialized family description `{variant, m, k, n_max, apex_value}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDocument {
    pub variant: String,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub k: Option<u32>,
    pub n_max: u32,
    pub apex_value: f64,
}

impl FamilyDocument {
    pub fn from_spec(spec: &FamilySpec) -> Self {
        let (m, k) = match spec.variant {
            FamilyVariant::Dyadic { m } => (Some(m), None),
            FamilyVariant::PowerLaw { m, k } => (Some(m), Some(k)),
            FamilyVariant::Alternating => (None, None),
        };
        FamilyDocument {
            variant: spec.variant.name().to_string(),
            m,
            k,
            n_max: spec.n_max,
            apex_value: spec.apex_value,
        }
    }

    pub fn variant(&self) -> Result<FamilyVariant, PotentialError> {
        let need = |v: Option<u32>, name: &str| {
            v.ok_or_else(|| PotentialError::InvalidParameter(format!("{} family requires `{name}`", self.variant)))
        };
        match self.variant.as_str() {
            "dyadic" => Ok(FamilyVariant::Dyadic { m: need(self.m, "m")? }),
            "powerlaw" => Ok(FamilyVariant::PowerLaw {
                m: need(self.m, "m")?,
                k: need(self.k, "k")?,
            }),
            "alternating" => Ok(FamilyVariant::Alternating),
            other => Err(PotentialError::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }

    pub fn to_spec(&self) -> Result<FamilySpec, PotentialError> {
        make_family(self.variant()?, self.n_max, self.apex_value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMargin {
    pub n: u32,
    pub gap: f64,
    pub drop: f64,
    pub required_drop: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub intervals: Vec<IntervalMargin>,
    pub min_relative_margin: f64,
    pub pass: bool,
}

/// Checks `alpha_n - alpha_{n+1} > drop of the local model at x_n over d_n`
/// for every consecutive pair of retained points.
pub fn feasibility_audit(spec: &FamilySpec) -> FeasibilityReport {
    let intervals: Vec<IntervalMargin> = spec
        .points
        .windows(2)
        .zip(&spec.gaps)
        .map(|(pair, &gap)| {
            let drop = pair[0].excess - pair[1].excess;
            let required_drop = pair[0].drop_over(gap);
            IntervalMargin {
                n: pair[0].index,
                gap,
                drop,
                required_drop,
                margin: drop - required_drop,
            }
        })
        .collect();
    let min_relative_margin = intervals
        .iter()
        .map(|iv| if iv.drop != 0.0 { iv.margin / iv.drop.abs() } else { iv.margin.signum() * f64::INFINITY })
        .fold(f64::INFINITY, f64::min);
    let pass = !intervals.is_empty() && intervals.iter().all(|iv| iv.margin > 0.0);
    FeasibilityReport {
        intervals,
        min_relative_margin,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_closed_forms() {
        let spec = make_family(FamilyVariant::Dyadic { m: 3 }, 40, 2.0).unwrap();
        let p3 = spec.point(3).unwrap();
        assert_eq!(p3.location, 0.875);
        assert_eq!(p3.value, 1.001953125);
        assert_eq!(spec.gaps[3], 0.03125); // d_4
        assert_eq!(p3.kind, CriticalKind::Inflection);
    }

    #[test]
    fn powerlaw_closed_forms() {
        let spec = make_family(FamilyVariant::PowerLaw { m: 3, k: 2 }, 10, 2.0).unwrap();
        let p2 = spec.point(2).unwrap();
        assert_eq!(p2.location, 0.75);
        assert_eq!(p2.value, 1.015625);
        assert!(spec.point(1).is_none());
    }

    #[test]
    fn alternating_orders() {
        let spec = make_family(FamilyVariant::Alternating, 6, 2.0).unwrap();
        let p1 = spec.point(1).unwrap();
        let p2 = spec.point(2).unwrap();
        assert_eq!((p1.order, p1.coefficient), (5, 1.0));
        assert_eq!((p2.order, p2.coefficient), (3, 1.0 / 16.0));
        assert_eq!(p2.extra_terms, vec![(5, 1.0)]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            make_family(FamilyVariant::Dyadic { m: 4 }, 10, 2.0),
            Err(PotentialError::InvalidOrder { order: 4 })
        ));
        assert!(matches!(
            make_family(FamilyVariant::PowerLaw { m: 2, k: 3 }, 10, 2.0),
            Err(PotentialError::InvalidOrder { .. })
        ));
        assert!(matches!(
            make_family(FamilyVariant::Dyadic { m: 3 }, 1, 2.0),
            Err(PotentialError::TooFewPoints { .. })
        ));
        assert!(matches!(
            make_family(FamilyVariant::Dyadic { m: 3 }, 10, 1.125),
            Err(PotentialError::ApexTooLow { .. })
        ));
    }

    #[test]
    fn dyadic_first_margin() {
        let spec = make_family(FamilyVariant::Dyadic { m: 3 }, 10, 2.0).unwrap();
        let r = feasibility_audit(&spec);
        let iv = &r.intervals[0];
        assert_eq!(iv.drop, 0.109375);
        assert_eq!(iv.required_drop, 0.015625);
        assert!(r.pass);
    }

    #[test]
    fn alternating_worst_case_ratio() {
        let spec = make_family(FamilyVariant::Alternating, 12, 2.0).unwrap();
        let r = feasibility_audit(&spec);
        for iv in &r.intervals {
            let scale = 0.5f64.powi(5 * iv.n as i32);
            assert!((iv.drop / scale - 31.0 / 32.0).abs() < 1e-12);
            let expected = if iv.n % 2 == 0 { 5.0 / 32.0 } else { 1.0 / 32.0 };
            assert!((iv.required_drop / scale - expected).abs() < 1e-12);
        }
        assert!(r.pass);
    }

    #[test]
    fn constant_values_fail() {
        let mut spec = make_family(FamilyVariant::Dyadic { m: 3 }, 8, 2.0).unwrap();
        for p in &mut spec.points {
            p.excess = 0.25;
            p.value = 1.25;
        }
        let r = feasibility_audit(&spec);
        assert!(!r.pass);
        assert!(r.intervals.iter().all(|iv| iv.margin <= 0.0));
    }

    #[test]
    fn document_round_trip() {
        let spec = make_family(FamilyVariant::PowerLaw { m: 5, k: 7 }, 12, 2.0).unwrap();
        let doc = FamilyDocument::from_spec(&spec);
        let json = serde_json::to_string(&doc).unwrap();
        assert_eq!(json, r#"{"variant":"powerlaw","m":5,"k":7,"n_max":12,"apex_value":2.0}"#);
        let back: FamilyDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_spec().unwrap(), spec);
    }
}
