//! Cost vectors, per-criterion aggregation and the dominance relation.
//!
//! A path cost is a vector of `k` non-negative reals, one per criterion.
//! Criteria aggregate along a path either by summation or by taking the
//! maximum; both operators are monotone non-decreasing in each argument,
//! which is what makes the hop-bounded dynamic program exact.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{BandwidthRule, ColumnRole, FeatureSchema};
use crate::error::{Error, Result};

/// `k` finite, non-negative criterion values.
///
/// Comparisons are exact. Integer-valued criteria (label steps, years) stay
/// exactly representable as long as they remain below 2^53.
#[derive(Clone, Debug, PartialEq)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let mut values = values;
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidCost { index, value: *v });
            }
            // -0.0 compares equal to 0.0 but not under total_cmp.
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        Ok(CostVector(values))
    }

    pub fn zeros(k: usize) -> Self {
        CostVector(vec![0.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// `true` iff `self` is componentwise `<=` `other`, equality allowed.
    pub fn weakly_dominates(&self, other: &CostVector) -> Result<bool> {
        check_len(self.len(), other.len())?;
        Ok(leq_all(&self.0, &other.0))
    }
}

impl Eq for CostVector {}

impl PartialOrd for CostVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order. Components are finite with no negative zero, so
/// `total_cmp` agrees with `<`.
impl Ord for CostVector {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<f64>> for CostVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        CostVector::new(values)
    }
}

impl Serialize for CostVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CostVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        CostVector::new(values).map_err(serde::de::Error::custom)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

#[inline]
pub(crate) fn leq_all(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Strict Pareto dominance on raw slices of equal length.
#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// `a` dominates `b`: `a_i <= b_i` for every criterion and `a != b`.
pub fn dominates(a: &CostVector, b: &CostVector) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_unchecked(&a.0, &b.0))
}

/// How a criterion accumulates along a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Sum,
    Max,
}

impl Aggregation {
    #[inline]
    pub fn apply(self, path: f64, edge: f64) -> f64 {
        match self {
            Aggregation::Sum => path + edge,
            Aggregation::Max => path.max(edge),
        }
    }
}

/// Extends a path cost by one edge, component by component.
pub fn combine(path_cost: &CostVector, edge_cost: &CostVector, spec: &CostSpec) -> Result<CostVector> {
    check_len(spec.k(), path_cost.len())?;
    check_len(spec.k(), edge_cost.len())?;
    Ok(combine_with(path_cost, edge_cost, &spec.aggregations()))
}

/// `combine` against a pre-extracted aggregation list; lengths are trusted.
pub(crate) fn combine_with(path: &CostVector, edge: &CostVector, aggs: &[Aggregation]) -> CostVector {
    CostVector(
        aggs.iter()
            .zip(path.0.iter().zip(&edge.0))
            .map(|(agg, (&p, &e))| agg.apply(p, e))
            .collect(),
    )
}

/// Order of an L-norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormOrder {
    L1,
    L2,
    Inf,
}

impl NormOrder {
    pub fn distance(self, a: impl Iterator<Item = f64>) -> f64 {
        match self {
            NormOrder::L1 => a.map(f64::abs).sum(),
            NormOrder::L2 => a.map(|d| d * d).sum::<f64>().sqrt(),
            NormOrder::Inf => a.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NormOrderRepr {
    Int(i64),
    Name(String),
}

impl Serialize for NormOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormOrder::L1 => NormOrderRepr::Int(1),
            NormOrder::L2 => NormOrderRepr::Int(2),
            NormOrder::Inf => NormOrderRepr::Name("inf".into()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NormOrder {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match NormOrderRepr::deserialize(deserializer)? {
            NormOrderRepr::Int(1) => Ok(NormOrder::L1),
            NormOrderRepr::Int(2) => Ok(NormOrder::L2),
            NormOrderRepr::Name(s) if matches!(s.as_str(), "inf" | "infinity" | "max") => Ok(NormOrder::Inf),
            NormOrderRepr::Int(p) => Err(serde::de::Error::custom(format!("unsupported norm order {p}"))),
            NormOrderRepr::Name(s) => Err(serde::de::Error::custom(format!("unsupported norm order `{s}`"))),
        }
    }
}

/// Which view of the features an L-norm is measured in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSpace {
    /// Values as loaded from the file.
    Raw,
    /// The working space, standardized when the dataset has been standardized.
    #[default]
    Standardized,
}

/// Allowed direction of change for a column along an edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Any,
    Up,
    Down,
}

/// What a single criterion measures on an edge `u -> v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CriterionKind {
    /// `||u_S - v_S||_p` over a feature subset (all features when omitted).
    #[serde(rename = "lnorm")]
    LNorm {
        p: NormOrder,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        features: Option<Vec<String>>,
        #[serde(default)]
        space: FeatureSpace,
    },
    /// `|label(u) - label(v)|` for a numeric label column.
    LabelAbsDiff { column: String },
    /// `|col(v) - col(u)|` on the raw values of one feature column.
    FeatureDelta {
        column: String,
        #[serde(default)]
        direction: Direction,
    },
    /// The destination's normalized kernel-density NLL score.
    KdeNll {
        #[serde(default)]
        bandwidth: BandwidthRule,
    },
    /// Edge costs supplied directly on the graph (hand-built graphs).
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub aggregation: Aggregation,
    #[serde(flatten)]
    pub kind: CriterionKind,
}

/// The ordered list of `k` criteria a search runs under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    #[serde(rename = "criterion")]
    criteria: Vec<Criterion>,
}

impl CostSpec {
    pub fn new(criteria: Vec<Criterion>) -> Result<Self> {
        let spec = CostSpec { criteria };
        spec.validate()?;
        Ok(spec)
    }

    /// `k` criteria with externally supplied edge costs.
    pub fn external(aggregations: &[Aggregation]) -> Result<Self> {
        CostSpec::new(
            aggregations
                .iter()
                .enumerate()
                .map(|(i, &aggregation)| Criterion {
                    name: format!("cost_{}", i + 1),
                    aggregation,
                    kind: CriterionKind::External,
                })
                .collect(),
        )
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: CostSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::InvalidCostSpec("at least one criterion is required".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.criteria {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidCostSpec(format!("duplicate criterion name `{}`", c.name)));
            }
            if let CriterionKind::KdeNll { bandwidth: BandwidthRule::Fixed(h) } = c.kind {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::InvalidCostSpec(format!("criterion `{}`: bandwidth must be > 0", c.name)));
                }
            }
        }
        Ok(())
    }

    /// Checks that every referenced column exists with a usable role.
    pub fn validate_against(&self, schema: &FeatureSchema) -> Result<()> {
        for c in &self.criteria {
            let need = |col: &str, role: ColumnRole| -> Result<()> {
                match schema.column(col) {
                    Some(spec) if spec.role == role => Ok(()),
                    Some(spec) => Err(Error::InvalidCostSpec(format!(
                        "criterion `{}`: column `{col}` has role {:?}, expected {:?}",
                        c.name, spec.role, role
                    ))),
                    None => Err(Error::InvalidCostSpec(format!(
                        "criterion `{}`: unknown column `{col}`",
                        c.name
                    ))),
                }
            };
            match &c.kind {
                CriterionKind::LNorm { features: Some(cols), .. } => {
                    if cols.is_empty() {
                        return Err(Error::InvalidCostSpec(format!("criterion `{}`: empty feature subset", c.name)));
                    }
                    for col in cols {
                        need(col, ColumnRole::Feature)?;
                    }
                }
                CriterionKind::LNorm { features: None, .. } => {}
                CriterionKind::LabelAbsDiff { column } => need(column, ColumnRole::Label)?,
                CriterionKind::FeatureDelta { column, .. } => need(column, ColumnRole::Feature)?,
                CriterionKind::KdeNll { .. } => {}
                CriterionKind::External => {
                    return Err(Error::InvalidCostSpec(format!(
                        "criterion `{}`: external costs cannot be evaluated from a dataset",
                        c.name
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.criteria.len()
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn aggregations(&self) -> Vec<Aggregation> {
        self.criteria.iter().map(|c| c.aggregation).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.criteria.iter().map(|c| c.name.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(v: &[f64]) -> CostVector {
        CostVector::new(v.to_vec()).unwrap()
    }

    fn spec(aggs: &[Aggregation]) -> CostSpec {
        CostSpec::external(aggs).unwrap()
    }

    #[test]
    fn table_front_points_are_incomparable() {
        let a = cv(&[2.0, 31.0]);
        let b = cv(&[5.0, 15.0]);
        assert!(!dominates(&a, &b).unwrap());
        assert!(!dominates(&b, &a).unwrap());
    }

    #[test]
    fn zero_dominates_positive() {
        assert!(dominates(&cv(&[0.0, 0.0]), &cv(&[1.0, 1.0])).unwrap());
    }

    #[test]
    fn equal_first_smaller_second_dominates() {
        assert!(dominates(&cv(&[6.0, 8.7]), &cv(&[6.0, 20.0])).unwrap());
        assert!(!dominates(&cv(&[6.0, 8.7]), &cv(&[6.0, 8.7])).unwrap());
    }

    #[test]
    fn dominance_length_mismatch_is_an_error() {
        let err = dominates(&cv(&[1.0]), &cv(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { expected: 1, actual: 2 }));
    }

    #[test]
    fn combine_examples() {
        use Aggregation::*;
        let out = combine(&cv(&[2.0, 10.0]), &cv(&[4.0, 5.0]), &spec(&[Max, Sum])).unwrap();
        assert_eq!(out, cv(&[4.0, 15.0]));
        let w = cv(&[3.5, 0.25]);
        assert_eq!(combine(&CostVector::zeros(2), &w, &spec(&[Sum, Sum])).unwrap(), w);
        let out = combine(&cv(&[1.0, 2.0]), &cv(&[3.0, 4.0]), &spec(&[Sum, Sum])).unwrap();
        assert_eq!(out, cv(&[4.0, 6.0]));
    }

    #[test]
    fn combine_rejects_wrong_length() {
        let err = combine(&cv(&[1.0]), &cv(&[1.0, 2.0]), &spec(&[Aggregation::Sum, Aggregation::Sum]));
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(CostVector::new(vec![1.0, -0.5]).is_err());
        assert!(CostVector::new(vec![f64::NAN]).is_err());
        assert!(CostVector::new(vec![f64::INFINITY]).is_err());
        assert_eq!(CostVector::new(vec![-0.0]).unwrap(), CostVector::zeros(1));
    }

    #[test]
    fn spec_rejects_duplicates_and_empty() {
        assert!(CostSpec::new(vec![]).is_err());
        let c = Criterion {
            name: "a".into(),
            aggregation: Aggregation::Sum,
            kind: CriterionKind::External,
        };
        assert!(CostSpec::new(vec![c.clone(), c]).is_err());
    }

    #[test]
    fn spec_parses_from_toml() {
        let text = r#"
            [[criterion]]
            name = "label_step"
            kind = "label_abs_diff"
            column = "digit"
            aggregation = "max"

            [[criterion]]
            name = "l2"
            kind = "lnorm"
            p = 2
            aggregation = "sum"

            [[criterion]]
            name = "chebyshev"
            kind = "lnorm"
            p = "inf"
            features = ["a", "b"]
            space = "raw"
            aggregation = "sum"

            [[criterion]]
            name = "density"
            kind = "kde_nll"
            bandwidth = 0.5
            aggregation = "max"
        "#;
        let spec = CostSpec::from_toml_str(text).unwrap();
        assert_eq!(spec.k(), 4);
        assert_eq!(spec.aggregations(), vec![Aggregation::Max, Aggregation::Sum, Aggregation::Sum, Aggregation::Max]);
        assert_eq!(
            spec.criteria()[2].kind,
            CriterionKind::LNorm {
                p: NormOrder::Inf,
                features: Some(vec!["a".into(), "b".into()]),
                space: FeatureSpace::Raw
            }
        );
        assert_eq!(
            spec.criteria()[3].kind,
            CriterionKind::KdeNll { bandwidth: BandwidthRule::Fixed(0.5) }
        );
        let json = serde_json::to_string(&spec).unwrap();
        let back: CostSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn spec_rejects_bad_norm() {
        let text = r#"
            [[criterion]]
            name = "x"
            kind = "lnorm"
            p = 3
            aggregation = "sum"
        "#;
        assert!(CostSpec::from_toml_str(text).is_err());
    }

    fn small_vec(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0u8..6, k).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn dominance_is_a_strict_partial_order(
            (a, b, c) in (1usize..5).prop_flat_map(|k| (small_vec(k), small_vec(k), small_vec(k)))
        ) {
            let (a, b, c) = (cv(&a), cv(&b), cv(&c));
            prop_assert!(!dominates(&a, &a).unwrap());
            if dominates(&a, &b).unwrap() {
                prop_assert!(!dominates(&b, &a).unwrap());
                if dominates(&b, &c).unwrap() {
                    prop_assert!(dominates(&a, &c).unwrap());
                }
            }
        }

        #[test]
        fn combine_is_monotone(
            (a, b, e, aggs) in (1usize..5).prop_flat_map(|k| (
                small_vec(k), small_vec(k), small_vec(k),
                prop::collection::vec(prop::bool::ANY, k),
            ))
        ) {
            let aggs: Vec<Aggregation> = aggs.into_iter()
                .map(|m| if m { Aggregation::Max } else { Aggregation::Sum })
                .collect();
            let spec = CostSpec::external(&aggs).unwrap();
            // Force a <= b componentwise.
            let lo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
            let (lo, hi, e) = (cv(&lo), cv(&b), cv(&e));
            let cl = combine(&lo, &e, &spec).unwrap();
            let ch = combine(&hi, &e, &spec).unwrap();
            prop_assert!(cl.weakly_dominates(&ch).unwrap());
        }
    }
}
