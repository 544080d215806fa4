//! Outcome-trace distributions and the metrics used to compare engines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::parity::Parity;

/// Normalization slack allowed for floating distributions.
pub const FLOAT_NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    ExactDyadic,
    Float,
}

impl fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arithmetic::ExactDyadic => "exact_dyadic",
            Arithmetic::Float => "float",
        })
    }
}

/// A branch weight: exact for the classical and stabilizer engines, floating for amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probability {
    Exact(Dyadic),
    Float(f64),
}

impl Probability {
    pub const ONE_EXACT: Probability = Probability::Exact(Dyadic::ONE);

    pub fn to_f64(self) -> f64 {
        match self {
            Probability::Exact(d) => d.to_f64(),
            Probability::Float(x) => x,
        }
    }

    pub fn arithmetic(self) -> Arithmetic {
        match self {
            Probability::Exact(_) => Arithmetic::ExactDyadic,
            Probability::Float(_) => Arithmetic::Float,
        }
    }

    pub fn exact(self) -> Option<Dyadic> {
        match self {
            Probability::Exact(d) => Some(d),
            Probability::Float(_) => None,
        }
    }

    pub fn times(self, other: Probability) -> Probability {
        match (self, other) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact(a * b),
            (a, b) => Probability::Float(a.to_f64() * b.to_f64()),
        }
    }

    pub fn plus(self, other: Probability) -> Probability {
        match (self, other) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact(a + b),
            (a, b) => Probability::Float(a.to_f64() + b.to_f64()),
        }
    }

    pub fn is_positive(self) -> bool {
        match self {
            Probability::Exact(d) => !d.is_zero(),
            Probability::Float(x) => x > 0.0,
        }
    }
}

/// Sequence of measurement outcomes, one per measurement step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeTrace(pub Vec<Parity>);

impl OutcomeTrace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pushed(&self, p: Parity) -> OutcomeTrace {
        let mut v = self.0.clone();
        v.push(p);
        OutcomeTrace(v)
    }
}

impl From<Vec<Parity>> for OutcomeTrace {
    fn from(v: Vec<Parity>) -> Self {
        OutcomeTrace(v)
    }
}

impl fmt::Display for OutcomeTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("outcome traces have different lengths ({0} vs {1})")]
    TraceLengthMismatch(usize, usize),
    #[error("trace {trace} has length {len}, expected {expected}")]
    BadTrace { trace: String, len: usize, expected: usize },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
    #[error("probability {value} of trace {trace} is outside (0,1]")]
    OutOfRange { trace: String, value: f64 },
    #[error("cannot mix exact and floating weights in one distribution")]
    MixedArithmetic,
    #[error("conditioning event has zero probability")]
    ZeroMassCondition,
    #[error("measurement index {index} is outside traces of length {len}")]
    BadIndex { index: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    arithmetic: Arithmetic,
    trace_len: usize,
    entries: BTreeMap<OutcomeTrace, Probability>,
}

impl Distribution {
    pub fn new(arithmetic: Arithmetic, trace_len: usize) -> Self {
        Self { arithmetic, trace_len, entries: BTreeMap::new() }
    }

    /// Builds an exact distribution from `(trace, probability)` pairs.
    pub fn exact<I>(items: I) -> Self
    where
        I: IntoIterator<Item = (Vec<Parity>, Dyadic)>,
    {
        Self::collect(Arithmetic::ExactDyadic, items.into_iter().map(|(t, p)| (t, Probability::Exact(p))))
    }

    pub fn float<I>(items: I) -> Self
    where
        I: IntoIterator<Item = (Vec<Parity>, f64)>,
    {
        Self::collect(Arithmetic::Float, items.into_iter().map(|(t, p)| (t, Probability::Float(p))))
    }

    fn collect<I: Iterator<Item = (Vec<Parity>, Probability)>>(arithmetic: Arithmetic, items: I) -> Self {
        let mut dist: Option<Distribution> = None;
        for (trace, p) in items {
            let d = dist.get_or_insert_with(|| Distribution::new(arithmetic, trace.len()));
            d.add(OutcomeTrace(trace), p).expect("consistent traces");
        }
        dist.unwrap_or_else(|| Distribution::new(arithmetic, 0))
    }

    /// Accumulates `p` onto `trace`.
    pub fn add(&mut self, trace: OutcomeTrace, p: Probability) -> Result<(), DistributionError> {
        if trace.len() != self.trace_len {
            return Err(DistributionError::BadTrace {
                trace: trace.to_string(),
                len: trace.len(),
                expected: self.trace_len,
            });
        }
        if p.arithmetic() != self.arithmetic {
            return Err(DistributionError::MixedArithmetic);
        }
        if !p.is_positive() {
            return Ok(());
        }
        let slot = self.entries.entry(trace).or_insert(match p {
            Probability::Exact(_) => Probability::Exact(Dyadic::ZERO),
            Probability::Float(_) => Probability::Float(0.0),
        });
        *slot = slot.plus(p);
        Ok(())
    }

    pub fn arithmetic(&self) -> Arithmetic {
        self.arithmetic
    }

    pub fn trace_len(&self) -> usize {
        self.trace_len
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutcomeTrace, Probability)> {
        self.entries.iter().map(|(t, p)| (t, *p))
    }

    pub fn get(&self, trace: &[Parity]) -> Option<Probability> {
        self.entries.get(&OutcomeTrace(trace.to_vec())).copied()
    }

    pub fn probability(&self, trace: &[Parity]) -> f64 {
        self.get(trace).map_or(0.0, Probability::to_f64)
    }

    pub fn total(&self) -> Probability {
        let zero = match self.arithmetic {
            Arithmetic::ExactDyadic => Probability::Exact(Dyadic::ZERO),
            Arithmetic::Float => Probability::Float(0.0),
        };
        self.entries.values().fold(zero, |acc, p| acc.plus(*p))
    }

    /// Checks the normalization invariant: every weight in (0,1], total exactly 1 (exact)
    /// or within [`FLOAT_NORMALIZATION_TOL`] (float).
    pub fn check_normalized(&self) -> Result<(), DistributionError> {
        for (t, p) in &self.entries {
            let v = p.to_f64();
            if !(v > 0.0 && v <= 1.0 + FLOAT_NORMALIZATION_TOL) {
                return Err(DistributionError::OutOfRange { trace: t.to_string(), value: v });
            }
        }
        match self.total() {
            Probability::Exact(d) if d == Dyadic::ONE => Ok(()),
            Probability::Exact(d) => Err(DistributionError::NotNormalized(d.to_string())),
            Probability::Float(x) if (x - 1.0).abs() <= FLOAT_NORMALIZATION_TOL => Ok(()),
            Probability::Float(x) => Err(DistributionError::NotNormalized(x.to_string())),
        }
    }

    /// Bayes restriction to traces whose outcomes match `given` (index, outcome) pairs,
    /// renormalized. Exact weights stay exact when the conditioning mass is a power of two.
    pub fn conditioned(&self, given: &[(usize, Parity)]) -> Result<Distribution, DistributionError> {
        for &(index, _) in given {
            if index >= self.trace_len {
                return Err(DistributionError::BadIndex { index, len: self.trace_len });
            }
        }
        let kept: Vec<(&OutcomeTrace, Probability)> =
            self.iter().filter(|(t, _)| given.iter().all(|&(i, p)| t.0[i] == p)).collect();
        let mass = kept.iter().fold(Probability::Float(0.0), |acc, (_, p)| acc.plus(*p));
        if mass.to_f64() <= 0.0 {
            return Err(DistributionError::ZeroMassCondition);
        }
        let exact_mass = match self.arithmetic {
            Arithmetic::ExactDyadic => {
                let m: Dyadic = kept.iter().filter_map(|(_, p)| p.exact()).sum();
                (m.numerator() == 1).then_some(m)
            }
            Arithmetic::Float => None,
        };
        let arithmetic = if exact_mass.is_some() { Arithmetic::ExactDyadic } else { Arithmetic::Float };
        let mut out = Distribution::new(arithmetic, self.trace_len);
        for (t, p) in kept {
            let w = match (exact_mass, p) {
                // d ≤ m = 2^-k, so d's exponent is at least k
                (Some(m), Probability::Exact(d)) => {
                    Probability::Exact(Dyadic::new(d.numerator(), d.exponent() - m.exponent()))
                }
                _ => Probability::Float(p.to_f64() / mass.to_f64()),
            };
            out.add(t.clone(), w)?;
        }
        Ok(out)
    }

    /// Distribution of a single measurement outcome, as a one-element-trace distribution.
    pub fn marginal(&self, index: usize) -> Result<Distribution, DistributionError> {
        if index >= self.trace_len {
            return Err(DistributionError::BadIndex { index, len: self.trace_len });
        }
        let mut out = Distribution::new(self.arithmetic, 1);
        for (t, p) in self.iter() {
            out.add(OutcomeTrace(vec![t.0[index]]), p)?;
        }
        Ok(out)
    }

    /// Probability that measurement `index` is odd, given the conditions.
    pub fn odd_probability(&self, index: usize, given: &[(usize, Parity)]) -> Result<f64, DistributionError> {
        let cond = self.conditioned(given)?;
        if index >= cond.trace_len {
            return Err(DistributionError::BadIndex { index, len: cond.trace_len });
        }
        Ok(cond.iter().filter(|(t, _)| t.0[index].is_odd()).fold(0.0, |acc, (_, p)| acc + p.to_f64()))
    }
}

fn union_keys<'a>(p: &'a Distribution, q: &'a Distribution) -> BTreeSet<&'a OutcomeTrace> {
    p.entries.keys().chain(q.entries.keys()).collect()
}

/// Total variation distance `½ Σ |p(t) − q(t)|` over the union of supports.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64, DistributionError> {
    if p.trace_len != q.trace_len {
        return Err(DistributionError::TraceLengthMismatch(p.trace_len, q.trace_len));
    }
    if p.arithmetic == Arithmetic::ExactDyadic && q.arithmetic == Arithmetic::ExactDyadic {
        let mut sum = Dyadic::ZERO;
        for t in union_keys(p, q) {
            let a = p.entries.get(t).and_then(|x| x.exact()).unwrap_or(Dyadic::ZERO);
            let b = q.entries.get(t).and_then(|x| x.exact()).unwrap_or(Dyadic::ZERO);
            sum = sum + a.abs_diff(b);
        }
        return Ok(sum.half().to_f64());
    }
    // summed in sorted trace order so the result does not depend on argument order
    let mut sum = 0.0;
    for t in union_keys(p, q) {
        let a = p.entries.get(t).map_or(0.0, |x| x.to_f64());
        let b = q.entries.get(t).map_or(0.0, |x| x.to_f64());
        sum += (a - b).abs();
    }
    Ok((0.5 * sum).min(1.0))
}

/// True iff the supports coincide and every weight differs by at most `tol`.
pub fn distributions_equal(p: &Distribution, q: &Distribution, tol: f64) -> Result<bool, DistributionError> {
    if p.trace_len != q.trace_len {
        return Err(DistributionError::TraceLengthMismatch(p.trace_len, q.trace_len));
    }
    if p.entries.len() != q.entries.len() {
        return Ok(false);
    }
    for (t, a) in &p.entries {
        let Some(b) = q.entries.get(t) else { return Ok(false) };
        let equal = match (a, b) {
            (Probability::Exact(x), Probability::Exact(y)) if tol == 0.0 => x == y,
            _ => (a.to_f64() - b.to_f64()).abs() <= tol,
        };
        if !equal {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rounds to 12 significant digits, the fixed precision of every JSON document.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Compact rendering for tables: `0`, `0.5`, `1.2e-16`.
pub fn short_number(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e-3 {
        format!("{}", (x * 1e6).round() / 1e6)
    } else {
        format!("{x:.1e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub trace: Vec<Parity>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_num: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_den: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_float: Option<f64>,
}

/// JSON form of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub scenario: String,
    pub engine: String,
    pub arithmetic: Arithmetic,
    pub entries: Vec<EntryDoc>,
}

impl DistributionDoc {
    pub fn new(scenario: &str, engine: &str, dist: &Distribution) -> Self {
        let entries = dist
            .iter()
            .map(|(t, p)| match p {
                Probability::Exact(d) => EntryDoc {
                    trace: t.0.clone(),
                    p_num: Some(d.numerator()),
                    p_den: Some(d.denominator()),
                    p_float: None,
                },
                Probability::Float(x) => {
                    EntryDoc { trace: t.0.clone(), p_num: None, p_den: None, p_float: Some(round_sig12(x)) }
                }
            })
            .collect();
        Self { scenario: scenario.to_string(), engine: engine.to_string(), arithmetic: dist.arithmetic(), entries }
    }

    /// Rebuilds the distribution. Exact entries need `p_den` to be a power of two.
    pub fn to_distribution(&self) -> Result<Distribution, DistributionError> {
        let len = self.entries.first().map_or(0, |e| e.trace.len());
        let mut d = Distribution::new(self.arithmetic, len);
        for e in &self.entries {
            let p = match (self.arithmetic, e.p_num, e.p_den, e.p_float) {
                (Arithmetic::ExactDyadic, Some(n), Some(den), _) if den.is_power_of_two() => {
                    Probability::Exact(Dyadic::new(n, den.trailing_zeros()))
                }
                (Arithmetic::Float, _, _, Some(x)) => Probability::Float(x),
                _ => return Err(DistributionError::MixedArithmetic),
            };
            d.add(OutcomeTrace(e.trace.clone()), p)?;
        }
        Ok(d)
    }
}
