//! Exponent catalog and gluing algebra in exact rationals.
//!
//! Convention: `resolvent_loss` is the exponent `rho` in
//! `||rho_-s (P - z)^-1 rho_-s|| <~ h^(-rho - eps)`; the local smoothing loss
//! is `rho / 2`.

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub type Q = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("malformed trap order: {0}")]
    InvalidOrder(String),
    #[error("gluing requires 0 <= delta < 1/3, got {0}")]
    GluingInapplicable(String),
    #[error("no trapping kinds supplied")]
    NoKinds,
    #[error("power-law exponent degenerate: km - k - 2 = {0} <= 0")]
    DegeneratePowerLaw(i128),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrapKind {
    NondegenerateMax,
    /// `V ~ 1 - x^(2 half_order)`, `half_order >= 2`.
    DegenerateMax { half_order: u32 },
    /// `V ~ 1 - x^order`, `order` odd `>= 3`.
    Inflection { order: u32 },
}

impl TrapKind {
    fn validate(&self) -> Result<(), CatalogError> {
        match *self {
            TrapKind::NondegenerateMax => Ok(()),
            TrapKind::DegenerateMax { half_order } if half_order >= 2 => Ok(()),
            TrapKind::Inflection { order } if order >= 3 && order % 2 == 1 => Ok(()),
            other => Err(CatalogError::InvalidOrder(format!("{other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MicrolocalGap {
    #[serde(serialize_with = "fraction")]
    pub gap: Q,
    pub log_correction: bool,
}

/// Exponent `g` in `||(P - z) u|| >= C h^g ||u||` for `u` microlocalized near
/// a single trapped point of the given kind.
pub fn microlocal_gap(kind: TrapKind) -> Result<MicrolocalGap, CatalogError> {
    kind.validate()?;
    Ok(match kind {
        TrapKind::NondegenerateMax => MicrolocalGap {
            gap: Q::one(),
            log_correction: true,
        },
        TrapKind::DegenerateMax { half_order } => {
            let m = half_order as i128;
            MicrolocalGap {
                gap: Q::new(2 * m, m + 1),
                log_correction: false,
            }
        }
        TrapKind::Inflection { order } => {
            let m = order as i128;
            MicrolocalGap {
                gap: Q::new(2 * m, m + 2),
                log_correction: false,
            }
        }
    })
}

/// Growth of the number of glued points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "growth", rename_all = "snake_case")]
pub enum PointCountGrowth {
    /// `N(h) = O(log 1/h)`: absorbed into the `eps` loss.
    Logarithmic,
    /// `N(h) ~ h^(-a)`.
    Polynomial {
        #[serde(serialize_with = "fraction", deserialize_with = "parse_fraction")]
        a: Q,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validity {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentPrediction {
    #[serde(serialize_with = "fraction")]
    pub resolvent_loss: Q,
    #[serde(serialize_with = "fraction")]
    pub smoothing_loss: Q,
    pub log_correction: bool,
    /// Set when polylogarithmic factors were absorbed into an `h^-eps` loss.
    pub epsilon: bool,
    /// Set when the `N(h) h^(-4 delta)` entry of the gluing minimum binds.
    pub point_count_binds: bool,
    pub validity: Vec<Validity>,
}

impl ExponentPrediction {
    fn new(rho: Q, log_correction: bool, epsilon: bool) -> Self {
        ExponentPrediction {
            resolvent_loss: rho,
            smoothing_loss: rho / Q::from_integer(2),
            log_correction,
            epsilon,
            point_count_binds: false,
            validity: Vec::new(),
        }
    }

    pub fn resolvent_loss_f64(&self) -> f64 {
        to_f64(self.resolvent_loss)
    }

    pub fn smoothing_loss_f64(&self) -> f64 {
        to_f64(self.smoothing_loss)
    }

    pub fn valid(&self) -> bool {
        self.validity.iter().all(|v| v.holds)
    }

    pub fn predicate(&self, name: &str) -> Option<bool> {
        self.validity.iter().find(|v| v.name == name).map(|v| v.holds)
    }
}

/// Composite loss `rho = 1 + 2 delta + max_j (g_j - 1)` for cutoffs at scale
/// `h^delta` around each trapped set.
pub fn glue_exponent(
    delta: Q,
    kinds: &[TrapKind],
    growth: PointCountGrowth,
) -> Result<ExponentPrediction, CatalogError> {
    if delta < Q::zero() || delta >= Q::new(1, 3) {
        return Err(CatalogError::GluingInapplicable(delta.to_string()));
    }
    if kinds.is_empty() {
        return Err(CatalogError::NoKinds);
    }
    let mut worst = Q::zero();
    let mut log = false;
    for &k in kinds {
        let g = microlocal_gap(k)?;
        worst = worst.max(g.gap - Q::one());
        log |= g.log_correction;
    }
    let mut rho = Q::one() + Q::from_integer(2) * delta + worst;
    let mut binds = false;
    if let PointCountGrowth::Polynomial { a } = growth {
        if a > Q::zero() {
            rho += Q::from_integer(2) * a;
            binds = true;
        }
    }
    let mut p = ExponentPrediction::new(rho, log, log || delta > Q::zero() || kinds.len() > 1);
    p.point_count_binds = binds;
    Ok(p)
}

fn odd_order(m: u32) -> Result<i128, CatalogError> {
    if m >= 3 && m % 2 == 1 {
        Ok(m as i128)
    } else {
        Err(CatalogError::InvalidOrder(format!("m = {m}")))
    }
}

/// `2m^2 / ((m-1)(m+2))`, i.e. smoothing loss `m^2/((m-1)(m+2))`.
pub fn dyadic_prediction(m: u32, epsilon0: f64) -> Result<ExponentPrediction, CatalogError> {
    let mi = odd_order(m)?;
    if !(epsilon0 >= 0.0) {
        return Err(CatalogError::GluingInapplicable(format!("epsilon0 = {epsilon0}")));
    }
    let delta = Q::new(mi, (mi - 1) * (mi + 2));
    let glued = glue_exponent(
        delta,
        &[TrapKind::NondegenerateMax, TrapKind::Inflection { order: m }],
        PointCountGrowth::Logarithmic,
    )?;
    let mut p = ExponentPrediction::new(glued.resolvent_loss, false, true);
    p.validity.push(Validity {
        name: "loss_below_two".into(),
        holds: p.resolvent_loss < Q::from_integer(2),
    });
    Ok(p)
}

/// `2m(km+1) / ((m+2)(km-k-2))` with the gluing and smoothing predicates
/// `(5m+4)/(m^2-2m-2) <= k` and `(3m+4)/(m-2) <= k`.
pub fn powerlaw_prediction(m: u32, k: u64) -> Result<ExponentPrediction, CatalogError> {
    let mi = odd_order(m)?;
    if k == 0 {
        return Err(CatalogError::InvalidOrder("k = 0".into()));
    }
    let ki = k as i128;
    let den = ki * mi - ki - 2;
    if den <= 0 {
        return Err(CatalogError::DegeneratePowerLaw(den));
    }
    let rho = Q::new(2 * mi * (ki * mi + 1), (mi + 2) * den);
    let mut p = ExponentPrediction::new(rho, false, true);
    let k_q = Q::from_integer(ki);
    p.validity.push(Validity {
        name: "gluing".into(),
        holds: Q::new(5 * mi + 4, mi * mi - 2 * mi - 2) <= k_q,
    });
    p.validity.push(Validity {
        name: "smoothing".into(),
        holds: Q::new(3 * mi + 4, mi - 2) <= k_q,
    });
    Ok(p)
}

/// Loss for the alternating family: cutoffs at `h^(5/28)` around cubic and
/// quintic inflections.
pub fn alternating_prediction() -> ExponentPrediction {
    glue_exponent(
        Q::new(5, 28),
        &[
            TrapKind::NondegenerateMax,
            TrapKind::Inflection { order: 3 },
            TrapKind::Inflection { order: 5 },
        ],
        PointCountGrowth::Logarithmic,
    )
    .expect("constant arguments are valid")
}

pub fn to_f64(q: Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `"9/5"`, or `"2"` for integers.
pub fn fraction_string(q: &Q) -> String {
    q.to_string()
}

pub fn parse_fraction_str(s: &str) -> Result<Q, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            let d: i128 = d.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            if d == 0 {
                return Err(format!("{s}: zero denominator"));
            }
            Ok(Q::new(n, d))
        }
        None => s.parse::<i128>().map(Q::from_integer).map_err(|e| format!("{s}: {e}")),
    }
}

fn fraction<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fraction_string(q))
}

fn parse_fraction<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
    let s = String::deserialize(d)?;
    parse_fraction_str(&s).map_err(serde::de::Error::custom)
}
