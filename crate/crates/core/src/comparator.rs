//! Reference curves that sweeps can overlay next to the bounds.
//!
//! The registry ships with the interference-free baseline, the crate's own
//! peak and expected bounds, the single-transmitter worst case, and two
//! placeholders for curves from the literature whose formulas are not
//! transcribed yet:
//!
//! * `mn-scheme`: achievable NDT of the Maddah-Ali–Niesen interference
//!   network scheme (Maddah-Ali and Niesen, "Cache-aided interference
//!   channels", ISIT 2015).
//! * `sengupta-converse`: the uncoded-placement cut-set lower bound on the
//!   peak NDT (Sengupta, Tandon and Simeone, "Cache aided wireless networks:
//!   tradeoffs between storage and latency", CISS 2016, Theorem 1).
//!
//! Both evaluate to [`CurveValue::Unavailable`] until transcribed.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bound::{expected_ndt_lower_bound, peak_ndt_lower_bound, NetworkConfig};
use crate::combinatorics::Rational;
use crate::error::{Error, Result};

pub const BASELINE: &str = "baseline";
pub const PEAK_BOUND: &str = "peak-bound";
pub const EXPECTED_BOUND: &str = "expected-bound";
pub const SINGLE_TX_WORST_CASE: &str = "single-tx-worst-case";
pub const MN_SCHEME: &str = "mn-scheme";
pub const SENGUPTA_CONVERSE: &str = "sengupta-converse";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Achievable,
    Converse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveValue {
    Value(Rational),
    Unavailable,
}

impl CurveValue {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            CurveValue::Value(v) => Some(v),
            CurveValue::Unavailable => None,
        }
    }
}

pub type Evaluator = Arc<dyn Fn(&NetworkConfig) -> CurveValue + Send + Sync>;

#[derive(Clone)]
pub struct ReferenceCurve {
    name: String,
    kind: CurveKind,
    evaluator: Evaluator,
}

impl ReferenceCurve {
    pub fn new(
        name: impl Into<String>,
        kind: CurveKind,
        evaluator: impl Fn(&NetworkConfig) -> CurveValue + Send + Sync + 'static,
    ) -> Self {
        ReferenceCurve { name: name.into(), kind, evaluator: Arc::new(evaluator) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn evaluate(&self, config: &NetworkConfig) -> CurveValue {
        (self.evaluator)(config)
    }
}

impl fmt::Debug for ReferenceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReferenceCurve")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

/// Index of a curve inside its registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveHandle(usize);

/// The NDT of the interference-free baseline system, which is 1 by normalization.
pub fn baseline_interference_free(_config: &NetworkConfig) -> Rational {
    Rational::one()
}

pub fn baseline_curve() -> ReferenceCurve {
    ReferenceCurve::new(BASELINE, CurveKind::Converse, |c| CurveValue::Value(baseline_interference_free(c)))
}

pub fn peak_bound_curve() -> ReferenceCurve {
    ReferenceCurve::new(PEAK_BOUND, CurveKind::Converse, |c| match peak_ndt_lower_bound(c) {
        Ok(v) => CurveValue::Value(v),
        Err(_) => CurveValue::Unavailable,
    })
}

pub fn expected_bound_curve() -> ReferenceCurve {
    ReferenceCurve::new(EXPECTED_BOUND, CurveKind::Converse, |c| match expected_ndt_lower_bound(c) {
        Ok(v) => CurveValue::Value(v),
        Err(_) => CurveValue::Unavailable,
    })
}

/// A lone transmitter must send `K_R` distinct files one slot each.
pub fn single_transmitter_worst_case_curve() -> ReferenceCurve {
    ReferenceCurve::new(SINGLE_TX_WORST_CASE, CurveKind::Achievable, |c| {
        if c.transmitters() == 1 {
            CurveValue::Value(Rational::from(c.receivers()))
        } else {
            CurveValue::Unavailable
        }
    })
}

pub fn mn_scheme_stub() -> ReferenceCurve {
    ReferenceCurve::new(MN_SCHEME, CurveKind::Achievable, |_| CurveValue::Unavailable)
}

pub fn sengupta_converse_stub() -> ReferenceCurve {
    ReferenceCurve::new(SENGUPTA_CONVERSE, CurveKind::Converse, |_| CurveValue::Unavailable)
}

/// Ordered collection of uniquely named curves.
#[derive(Debug, Clone, Default)]
pub struct CurveRegistry {
    curves: Vec<ReferenceCurve>,
}

impl CurveRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every built-in curve.
    pub fn with_builtins() -> Self {
        let mut reg = Self::new();
        for curve in [
            baseline_curve(),
            peak_bound_curve(),
            expected_bound_curve(),
            single_transmitter_worst_case_curve(),
            mn_scheme_stub(),
            sengupta_converse_stub(),
        ] {
            reg.register(curve).expect("built-in names are unique");
        }
        reg
    }

    pub fn register(&mut self, curve: ReferenceCurve) -> Result<CurveHandle> {
        if self.lookup(curve.name()).is_some() {
            return Err(Error::DuplicateName(curve.name.clone()));
        }
        self.curves.push(curve);
        Ok(CurveHandle(self.curves.len() - 1))
    }

    pub fn lookup(&self, name: &str) -> Option<CurveHandle> {
        self.curves.iter().position(|c| c.name == name).map(CurveHandle)
    }

    pub fn get(&self, handle: CurveHandle) -> &ReferenceCurve {
        &self.curves[handle.0]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.curves.iter().map(|c| c.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// New registry with only the named curves, in the order given.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<CurveRegistry> {
        let mut out = CurveRegistry::new();
        for name in names {
            let handle = self
                .lookup(name.as_ref())
                .ok_or_else(|| Error::UnknownCurve(name.as_ref().to_string()))?;
            out.register(self.get(handle).clone())?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, handle: CurveHandle, config: &NetworkConfig) -> CurveValue {
        self.get(handle).evaluate(config)
    }

    /// Evaluates every curve in registration order.
    pub fn overlay(&self, config: &NetworkConfig) -> Vec<(&str, CurveValue)> {
        self.curves.iter().map(|c| (c.name.as_str(), c.evaluate(config))).collect()
    }

    /// Multiplicative gap `a / b`.
    pub fn gap(&self, a: CurveHandle, b: CurveHandle, config: &NetworkConfig) -> Result<Rational> {
        let unavailable = |h: CurveHandle| Error::Unavailable(self.get(h).name.clone());
        let va = self.evaluate(a, config);
        let vb = self.evaluate(b, config);
        let va = va.value().ok_or_else(|| unavailable(a))?;
        let vb = vb.value().ok_or_else(|| unavailable(b))?;
        if vb.is_zero() {
            return Err(Error::Domain(format!("curve {:?} evaluates to zero", self.get(b).name)));
        }
        Ok(va / vb)
    }

    /// Names of curves violating the ordering at `config`: converse curves
    /// below 1, or achievable curves below the peak bound (expected bound
    /// when the library is smaller than `K_R`). Unavailable values are skipped.
    pub fn consistency_violations(&self, config: &NetworkConfig) -> Vec<String> {
        let own = peak_ndt_lower_bound(config).or_else(|_| expected_ndt_lower_bound(config)).ok();
        self.curves
            .iter()
            .filter(|c| match (c.kind, c.evaluate(config)) {
                (_, CurveValue::Unavailable) => false,
                (CurveKind::Converse, CurveValue::Value(v)) => v < 1,
                (CurveKind::Achievable, CurveValue::Value(v)) => own.as_ref().is_some_and(|o| v < *o),
            })
            .map(|c| c.name.clone())
            .collect()
    }
}
