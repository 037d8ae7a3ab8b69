//! Weighted aggregation of attribute scores through the quality hierarchy
//! (attribute -> subproperty -> property -> subcharacteristic), plus the
//! five-band level scale and a rating-normalization helper for deriving
//! weights from expert scores.

use crate::facts::Warning;
use crate::metrics::{AttributeId, AttributeScore, NotApplicable};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

const SIBLING_SUM_TOLERANCE: f64 = 1e-9;

/// Intermediate groupings of attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SubpropertyId {
    Perceptiveness,
    Operability,
    Understandability,
    Localization,
}

impl SubpropertyId {
    pub const ALL: [SubpropertyId; 4] = [
        SubpropertyId::Perceptiveness,
        SubpropertyId::Operability,
        SubpropertyId::Understandability,
        SubpropertyId::Localization,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SubpropertyId::Perceptiveness => "UAC-1.1-G",
            SubpropertyId::Operability => "UAC-1.2-G",
            SubpropertyId::Understandability => "UAC-1.3-G",
            SubpropertyId::Localization => "UAC-2.1-S",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SubpropertyId::Perceptiveness => "Perceptiveness",
            SubpropertyId::Operability => "Operability",
            SubpropertyId::Understandability => "Understandability",
            SubpropertyId::Localization => "Localization",
        }
    }

    /// The attributes grouped under this subproperty. Localization is its
    /// own leaf: its subproperty value is the attribute value itself.
    pub fn children(self) -> &'static [AttributeId] {
        match self {
            SubpropertyId::Perceptiveness => &[
                AttributeId::AltText,
                AttributeId::ColorContrast,
                AttributeId::MediaAlternatives,
            ],
            SubpropertyId::Operability => &[
                AttributeId::KeyboardNavigation,
                AttributeId::StructuredNavigation,
            ],
            SubpropertyId::Understandability => &[
                AttributeId::ClearInstructions,
                AttributeId::InputAssistance,
                AttributeId::ErrorSupport,
            ],
            SubpropertyId::Localization => &[AttributeId::Localization],
        }
    }
}

impl fmt::Display for SubpropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for SubpropertyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubpropertyId::ALL
            .into_iter()
            .find(|id| id.code() == s)
            .ok_or_else(|| format!("unknown subproperty id {s:?}"))
    }
}

impl From<SubpropertyId> for String {
    fn from(id: SubpropertyId) -> String {
        id.code().to_string()
    }
}

impl TryFrom<String> for SubpropertyId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Top-level quality properties under the accessibility subcharacteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PropertyId {
    DisabilityAccess,
    LanguageAdequacy,
}

impl PropertyId {
    pub const ALL: [PropertyId; 2] = [PropertyId::DisabilityAccess, PropertyId::LanguageAdequacy];

    pub fn code(self) -> &'static str {
        match self {
            PropertyId::DisabilityAccess => "UAC-1-G",
            PropertyId::LanguageAdequacy => "UAC-2-S",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PropertyId::DisabilityAccess => "Accessibility for users with disabilities",
            PropertyId::LanguageAdequacy => "Supported languages adequacy",
        }
    }

    pub fn children(self) -> &'static [SubpropertyId] {
        match self {
            PropertyId::DisabilityAccess => &[
                SubpropertyId::Perceptiveness,
                SubpropertyId::Operability,
                SubpropertyId::Understandability,
            ],
            PropertyId::LanguageAdequacy => &[SubpropertyId::Localization],
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PropertyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PropertyId::ALL
            .into_iter()
            .find(|id| id.code() == s)
            .ok_or_else(|| format!("unknown property id {s:?}"))
    }
}

impl From<PropertyId> for String {
    fn from(id: PropertyId) -> String {
        id.code().to_string()
    }
}

impl TryFrom<String> for PropertyId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("weights of {group} must sum to 1 (got {sum})")]
    SiblingSum { group: String, sum: f64 },
    #[error("weight of {id} is negative ({weight})")]
    Negative { id: String, weight: f64 },
    #[error("unknown weight id {0:?}")]
    UnknownId(String),
}

/// The complete weight assignment: every attribute, subproperty, and
/// property carries a weight, and within each sibling group the weights
/// sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub attributes: BTreeMap<AttributeId, f64>,
    pub subproperties: BTreeMap<SubpropertyId, f64>,
    pub properties: BTreeMap<PropertyId, f64>,
}

impl Default for WeightSet {
    /// The published default assignment used throughout the tests.
    fn default() -> Self {
        let attributes = [
            (AttributeId::AltText, 0.3),
            (AttributeId::ColorContrast, 0.3),
            (AttributeId::MediaAlternatives, 0.4),
            (AttributeId::KeyboardNavigation, 0.6),
            (AttributeId::StructuredNavigation, 0.4),
            (AttributeId::ClearInstructions, 0.4),
            (AttributeId::InputAssistance, 0.3),
            (AttributeId::ErrorSupport, 0.3),
            (AttributeId::Localization, 1.0),
        ]
        .into_iter()
        .collect();
        let subproperties = [
            (SubpropertyId::Perceptiveness, 0.3),
            (SubpropertyId::Operability, 0.3),
            (SubpropertyId::Understandability, 0.4),
            (SubpropertyId::Localization, 1.0),
        ]
        .into_iter()
        .collect();
        let properties = [
            (PropertyId::DisabilityAccess, 0.6),
            (PropertyId::LanguageAdequacy, 0.4),
        ]
        .into_iter()
        .collect();
        WeightSet {
            attributes,
            subproperties,
            properties,
        }
    }
}

impl WeightSet {
    pub fn attribute(&self, id: AttributeId) -> f64 {
        self.attributes.get(&id).copied().unwrap_or(0.0)
    }

    pub fn subproperty(&self, id: SubpropertyId) -> f64 {
        self.subproperties.get(&id).copied().unwrap_or(0.0)
    }

    pub fn property(&self, id: PropertyId) -> f64 {
        self.properties.get(&id).copied().unwrap_or(0.0)
    }

    /// Apply overrides from a flat `{id: weight}` map onto the defaults.
    /// Ids may name attributes, subproperties, or properties.
    pub fn with_overrides(overrides: &BTreeMap<String, f64>) -> Result<WeightSet, WeightError> {
        let mut set = WeightSet::default();
        for (key, &weight) in overrides {
            if let Ok(id) = key.parse::<AttributeId>() {
                set.attributes.insert(id, weight);
            } else if let Ok(id) = key.parse::<SubpropertyId>() {
                set.subproperties.insert(id, weight);
            } else if key.parse::<PropertyId>().is_ok() {
                set.properties.insert(key.parse().unwrap(), weight);
            } else {
                return Err(WeightError::UnknownId(key.clone()));
            }
        }
        set.validate()?;
        Ok(set)
    }

    /// Check every sibling group sums to 1 and nothing is negative.
    pub fn validate(&self) -> Result<(), WeightError> {
        for (id, &w) in &self.attributes {
            if w < 0.0 {
                return Err(WeightError::Negative {
                    id: id.to_string(),
                    weight: w,
                });
            }
        }
        for (id, &w) in &self.subproperties {
            if w < 0.0 {
                return Err(WeightError::Negative {
                    id: id.to_string(),
                    weight: w,
                });
            }
        }
        for (id, &w) in &self.properties {
            if w < 0.0 {
                return Err(WeightError::Negative {
                    id: id.to_string(),
                    weight: w,
                });
            }
        }
        for sub in SubpropertyId::ALL {
            let sum: f64 = sub.children().iter().map(|&a| self.attribute(a)).sum();
            if (sum - 1.0).abs() > SIBLING_SUM_TOLERANCE {
                return Err(WeightError::SiblingSum {
                    group: format!("attributes of {sub}"),
                    sum,
                });
            }
        }
        for prop in PropertyId::ALL {
            let sum: f64 = prop.children().iter().map(|&s| self.subproperty(s)).sum();
            if (sum - 1.0).abs() > SIBLING_SUM_TOLERANCE {
                return Err(WeightError::SiblingSum {
                    group: format!("subproperties of {prop}"),
                    sum,
                });
            }
        }
        let sum: f64 = PropertyId::ALL.iter().map(|&p| self.property(p)).sum();
        if (sum - 1.0).abs() > SIBLING_SUM_TOLERANCE {
            return Err(WeightError::SiblingSum {
                group: "properties".to_string(),
                sum,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RollupError {
    #[error("no applicable children to aggregate")]
    NoApplicableChildren,
}

/// One child entering a weighted aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollupChild {
    pub value: f64,
    pub weight: f64,
    pub applicable: bool,
}

/// Weighted mean of the applicable children. Weights of inapplicable
/// children are redistributed proportionally among the rest; if every
/// applicable weight is zero the applicable children share equally.
pub fn weighted_rollup(children: &[RollupChild]) -> Result<f64, RollupError> {
    let applicable: Vec<&RollupChild> = children.iter().filter(|c| c.applicable).collect();
    if applicable.is_empty() {
        return Err(RollupError::NoApplicableChildren);
    }
    let weight_sum: f64 = applicable.iter().map(|c| c.weight).sum();
    if weight_sum <= 0.0 {
        let n = applicable.len() as f64;
        return Ok(applicable.iter().map(|c| c.value / n).sum());
    }
    Ok(applicable
        .iter()
        .map(|c| c.value * (c.weight / weight_sum))
        .sum())
}

/// Quality levels, worst to best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelLabel {
    VeryPoor,
    Poor,
    Satisfactory,
    Good,
    Excellent,
}

impl LevelLabel {
    pub const ALL: [LevelLabel; 5] = [
        LevelLabel::VeryPoor,
        LevelLabel::Poor,
        LevelLabel::Satisfactory,
        LevelLabel::Good,
        LevelLabel::Excellent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LevelLabel::VeryPoor => "very poor",
            LevelLabel::Poor => "poor",
            LevelLabel::Satisfactory => "satisfactory",
            LevelLabel::Good => "good",
            LevelLabel::Excellent => "excellent",
        }
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LevelLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '_'], " ");
        LevelLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == norm)
            .ok_or_else(|| format!("unknown quality level {s:?}"))
    }
}

/// One band of the level scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityLevel {
    pub label: LevelLabel,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Error)]
pub enum ScaleError {
    #[error("breakpoints must be strictly increasing within (0, 1): {0:?}")]
    InvalidBreakpoints([f64; 4]),
    #[error("value {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// Five-band classification scale over [0, 1]. The default breakpoints are
/// the golden-ratio construction 1/phi^4 .. 1/phi: every band boundary
/// belongs to the band above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub breakpoints: [f64; 4],
}

impl Default for Scale {
    fn default() -> Self {
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        Scale {
            breakpoints: [phi.powi(-4), phi.powi(-3), phi.powi(-2), phi.powi(-1)],
        }
    }
}

impl Scale {
    pub fn new(breakpoints: [f64; 4]) -> Result<Scale, ScaleError> {
        let ok = breakpoints.windows(2).all(|w| w[0] < w[1])
            && breakpoints[0] > 0.0
            && breakpoints[3] < 1.0;
        if !ok {
            return Err(ScaleError::InvalidBreakpoints(breakpoints));
        }
        Ok(Scale { breakpoints })
    }

    /// Classify a value in [0, 1] onto the scale.
    pub fn classify(&self, x: f64) -> Result<QualityLevel, ScaleError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(ScaleError::OutOfRange(x));
        }
        let [b0, b1, b2, b3] = self.breakpoints;
        let (label, lower, upper) = if x < b0 {
            (LevelLabel::VeryPoor, 0.0, b0)
        } else if x < b1 {
            (LevelLabel::Poor, b0, b1)
        } else if x < b2 {
            (LevelLabel::Satisfactory, b1, b2)
        } else if x < b3 {
            (LevelLabel::Good, b2, b3)
        } else {
            (LevelLabel::Excellent, b3, 1.0)
        };
        Ok(QualityLevel {
            label,
            lower_bound: lower,
            upper_bound: upper,
        })
    }

    /// The label's band on this scale.
    pub fn band(&self, label: LevelLabel) -> QualityLevel {
        let [b0, b1, b2, b3] = self.breakpoints;
        let (lower, upper) = match label {
            LevelLabel::VeryPoor => (0.0, b0),
            LevelLabel::Poor => (b0, b1),
            LevelLabel::Satisfactory => (b1, b2),
            LevelLabel::Good => (b2, b3),
            LevelLabel::Excellent => (b3, 1.0),
        };
        QualityLevel {
            label,
            lower_bound: lower,
            upper_bound: upper,
        }
    }
}

/// Classify on the default golden-ratio scale.
pub fn classify(x: f64) -> Result<QualityLevel, ScaleError> {
    Scale::default().classify(x)
}

/// The fully evaluated hierarchy. Node values are None when no applicable
/// evidence reached them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityTree {
    pub attributes: Vec<AttributeScore>,
    pub subproperties: BTreeMap<SubpropertyId, Option<f64>>,
    pub properties: BTreeMap<PropertyId, Option<f64>>,
    pub subcharacteristic: Option<f64>,
    pub level: Option<QualityLevel>,
}

impl QualityTree {
    pub fn attribute(&self, id: AttributeId) -> Option<&AttributeScore> {
        self.attributes.iter().find(|a| a.id == id)
    }
}

/// Roll the attribute scores up through the hierarchy and classify the
/// result. The weights are re-validated here so the operation rejects a
/// hand-built set whose sibling groups do not sum to 1. Missing attributes
/// are treated as not applicable; warnings record every weight
/// redistribution.
pub fn evaluate_tree(
    scores: &[AttributeScore],
    weights: &WeightSet,
    scale: &Scale,
    warnings: &mut Vec<Warning>,
) -> Result<QualityTree, WeightError> {
    weights.validate()?;
    let mut attributes = Vec::with_capacity(AttributeId::ALL.len());
    for id in AttributeId::ALL {
        match scores.iter().find(|s| s.id == id) {
            Some(score) => attributes.push(score.clone()),
            None => attributes.push(AttributeScore::not_applicable(
                id,
                NotApplicable::NoEvidence,
            )),
        }
    }

    let mut subproperties = BTreeMap::new();
    for sub in SubpropertyId::ALL {
        let children: Vec<RollupChild> = sub
            .children()
            .iter()
            .map(|&aid| {
                let score = attributes.iter().find(|s| s.id == aid).unwrap();
                RollupChild {
                    value: score.value,
                    weight: weights.attribute(aid),
                    applicable: score.applicable,
                }
            })
            .collect();
        let value = finish_node(&children, sub.code(), warnings);
        subproperties.insert(sub, value);
    }

    let mut properties = BTreeMap::new();
    for prop in PropertyId::ALL {
        let children: Vec<RollupChild> = prop
            .children()
            .iter()
            .map(|&sid| RollupChild {
                value: subproperties[&sid].unwrap_or(0.0),
                weight: weights.subproperty(sid),
                applicable: subproperties[&sid].is_some(),
            })
            .collect();
        let value = finish_node(&children, prop.code(), warnings);
        properties.insert(prop, value);
    }

    let top_children: Vec<RollupChild> = PropertyId::ALL
        .iter()
        .map(|&pid| RollupChild {
            value: properties[&pid].unwrap_or(0.0),
            weight: weights.property(pid),
            applicable: properties[&pid].is_some(),
        })
        .collect();
    let subcharacteristic = finish_node(&top_children, "UAC", warnings);
    let level = subcharacteristic.and_then(|x| scale.classify(x).ok());

    Ok(QualityTree {
        attributes,
        subproperties,
        properties,
        subcharacteristic,
        level,
    })
}

fn finish_node(children: &[RollupChild], code: &str, warnings: &mut Vec<Warning>) -> Option<f64> {
    let any_inapplicable = children.iter().any(|c| !c.applicable);
    match weighted_rollup(children) {
        Ok(value) => {
            if any_inapplicable {
                warnings.push(Warning::WeightRedistributed {
                    node: code.to_string(),
                });
            }
            Some(value)
        }
        Err(RollupError::NoApplicableChildren) => None,
    }
}

#[derive(Debug, Error)]
pub enum DeriveError {
    #[error("ratings are empty")]
    Empty,
    #[error("ratings must be positive; metric {0} has a non-positive mean")]
    DegenerateRatings(usize),
    #[error(
        "every expert must rate every metric (row {row} has {got} ratings, expected {expected})"
    )]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },
}

/// Weights derived from expert ratings, with a per-metric dispersion
/// diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedWeights {
    /// Normalized weights, one per metric, summing to 1.
    pub weights: Vec<f64>,
    /// Coefficient of variation (population std dev / mean) per metric.
    pub coefficient_of_variation: Vec<f64>,
    /// Indices of metrics whose ratings disperse beyond the warning level.
    pub disputed: Vec<usize>,
}

/// Warn when expert ratings of one metric vary by more than this.
pub const DISPERSION_WARNING_CV: f64 = 0.5;

/// Turn an expert-by-metric rating matrix into sibling weights: each
/// metric's weight is its mean rating divided by the sum of all means.
pub fn derive_weights(ratings: &[Vec<f64>]) -> Result<DerivedWeights, DeriveError> {
    let experts = ratings.len();
    if experts == 0 || ratings[0].is_empty() {
        return Err(DeriveError::Empty);
    }
    let metrics = ratings[0].len();
    for (row, r) in ratings.iter().enumerate() {
        if r.len() != metrics {
            return Err(DeriveError::RaggedRows {
                row,
                got: r.len(),
                expected: metrics,
            });
        }
    }

    let mut means = vec![0.0; metrics];
    for row in ratings {
        for (m, &v) in row.iter().enumerate() {
            means[m] += v;
        }
    }
    for mean in &mut means {
        *mean /= experts as f64;
    }
    if means.iter().any(|&m| m <= 0.0) {
        let bad = means.iter().position(|&m| m <= 0.0).unwrap();
        return Err(DeriveError::DegenerateRatings(bad));
    }

    let total: f64 = means.iter().sum();
    let weights: Vec<f64> = means.iter().map(|&m| m / total).collect();

    let mut cv = vec![0.0; metrics];
    for (m, item) in cv.iter_mut().enumerate() {
        let variance = ratings
            .iter()
            .map(|row| (row[m] - means[m]).powi(2))
            .sum::<f64>()
            / experts as f64;
        *item = variance.sqrt() / means[m];
    }
    let disputed = cv
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > DISPERSION_WARNING_CV)
        .map(|(i, _)| i)
        .collect();

    Ok(DerivedWeights {
        weights,
        coefficient_of_variation: cv,
        disputed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round5(x: f64) -> f64 {
        (x * 1e5).round() / 1e5
    }

    fn direct(id: AttributeId, v: f64) -> AttributeScore {
        AttributeScore::direct(id, v)
    }

    /// The published reference column: attribute values with the default
    /// weights must reproduce every aggregate exactly at 5 decimals.
    fn reference_scores() -> Vec<AttributeScore> {
        vec![
            direct(AttributeId::AltText, 0.15),
            direct(AttributeId::ColorContrast, 0.99),
            direct(AttributeId::MediaAlternatives, 0.0),
            direct(AttributeId::KeyboardNavigation, 1.0),
            direct(AttributeId::StructuredNavigation, 0.47),
            direct(AttributeId::ClearInstructions, 1.0),
            direct(AttributeId::InputAssistance, 0.0),
            direct(AttributeId::ErrorSupport, 0.83),
            direct(AttributeId::Localization, 0.8),
        ]
    }

    #[test]
    fn default_weights_validate() {
        WeightSet::default().validate().unwrap();
    }

    #[test]
    fn sibling_sum_violation_is_rejected() {
        let mut w = WeightSet::default();
        w.attributes.insert(AttributeId::AltText, 0.5);
        assert!(matches!(w.validate(), Err(WeightError::SiblingSum { .. })));
    }

    #[test]
    fn rollup_perceptiveness_row() {
        let v = weighted_rollup(&[
            RollupChild {
                value: 0.15,
                weight: 0.3,
                applicable: true,
            },
            RollupChild {
                value: 0.99,
                weight: 0.3,
                applicable: true,
            },
            RollupChild {
                value: 0.0,
                weight: 0.4,
                applicable: true,
            },
        ])
        .unwrap();
        assert_eq!(round5(v), 0.342);
    }

    #[test]
    fn rollup_operability_row() {
        let v = weighted_rollup(&[
            RollupChild {
                value: 1.0,
                weight: 0.6,
                applicable: true,
            },
            RollupChild {
                value: 0.47,
                weight: 0.4,
                applicable: true,
            },
        ])
        .unwrap();
        assert_eq!(round5(v), 0.788);
    }

    #[test]
    fn rollup_single_child_identity() {
        let v = weighted_rollup(&[RollupChild {
            value: 0.8,
            weight: 1.0,
            applicable: true,
        }])
        .unwrap();
        assert_eq!(v, 0.8);
    }

    #[test]
    fn rollup_no_applicable_children() {
        let r = weighted_rollup(&[RollupChild {
            value: 0.5,
            weight: 1.0,
            applicable: false,
        }]);
        assert!(matches!(r, Err(RollupError::NoApplicableChildren)));
    }

    #[test]
    fn rollup_redistributes_proportionally() {
        // Dropping the 0.4-weight child renormalizes 0.3/0.3 to 0.5/0.5.
        let v = weighted_rollup(&[
            RollupChild {
                value: 1.0,
                weight: 0.3,
                applicable: true,
            },
            RollupChild {
                value: 0.0,
                weight: 0.3,
                applicable: true,
            },
            RollupChild {
                value: 1.0,
                weight: 0.4,
                applicable: false,
            },
        ])
        .unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn evaluate_reference_column() {
        let mut warnings = Vec::new();
        let tree = evaluate_tree(
            &reference_scores(),
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        assert_eq!(
            round5(tree.subproperties[&SubpropertyId::Perceptiveness].unwrap()),
            0.342
        );
        assert_eq!(
            round5(tree.subproperties[&SubpropertyId::Operability].unwrap()),
            0.788
        );
        assert_eq!(
            round5(tree.subproperties[&SubpropertyId::Understandability].unwrap()),
            0.649
        );
        assert_eq!(
            round5(tree.subproperties[&SubpropertyId::Localization].unwrap()),
            0.8
        );
        assert_eq!(
            round5(tree.properties[&PropertyId::DisabilityAccess].unwrap()),
            0.5986
        );
        assert_eq!(
            round5(tree.properties[&PropertyId::LanguageAdequacy].unwrap()),
            0.8
        );
        assert_eq!(round5(tree.subcharacteristic.unwrap()), 0.67916);
        assert_eq!(tree.level.unwrap().label, LevelLabel::Excellent);
        assert!(warnings.is_empty());
    }

    #[test]
    fn evaluate_all_ones_and_all_zeros() {
        let ones: Vec<AttributeScore> = AttributeId::ALL
            .into_iter()
            .map(|id| direct(id, 1.0))
            .collect();
        let mut warnings = Vec::new();
        let tree = evaluate_tree(
            &ones,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        assert_eq!(tree.subcharacteristic.unwrap(), 1.0);
        for v in tree.subproperties.values().chain(tree.properties.values()) {
            assert_eq!(v.unwrap(), 1.0);
        }

        let zeros: Vec<AttributeScore> = AttributeId::ALL
            .into_iter()
            .map(|id| direct(id, 0.0))
            .collect();
        let tree = evaluate_tree(
            &zeros,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        assert_eq!(tree.subcharacteristic.unwrap(), 0.0);
        assert_eq!(tree.level.unwrap().label, LevelLabel::VeryPoor);
    }

    #[test]
    fn evaluate_missing_attribute_is_not_applicable() {
        let scores = vec![direct(AttributeId::Localization, 0.8)];
        let mut warnings = Vec::new();
        let tree = evaluate_tree(
            &scores,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        assert_eq!(tree.subproperties[&SubpropertyId::Perceptiveness], None);
        assert_eq!(tree.properties[&PropertyId::DisabilityAccess], None);
        // Only the language branch is applicable, so UAC equals it.
        assert_eq!(tree.subcharacteristic, Some(0.8));
        assert!(warnings
            .iter()
            .any(|w| matches!(w, Warning::WeightRedistributed { .. })));
    }

    #[test]
    fn evaluate_rejects_unbalanced_weights() {
        let mut weights = WeightSet::default();
        weights.attributes.insert(AttributeId::AltText, 0.9);
        let mut warnings = Vec::new();
        let result = evaluate_tree(
            &reference_scores(),
            &weights,
            &Scale::default(),
            &mut warnings,
        );
        assert!(matches!(result, Err(WeightError::SiblingSum { .. })));
    }

    #[test]
    fn classify_reference_points() {
        assert_eq!(classify(0.67916).unwrap().label, LevelLabel::Excellent);
        assert_eq!(classify(0.0).unwrap().label, LevelLabel::VeryPoor);
        assert_eq!(classify(1.0).unwrap().label, LevelLabel::Excellent);
    }

    #[test]
    fn classify_boundaries_belong_upward() {
        let scale = Scale::default();
        for (i, &b) in scale.breakpoints.iter().enumerate() {
            let at = scale.classify(b).unwrap().label;
            let below = scale.classify(b - 1e-12).unwrap().label;
            assert_eq!(at, LevelLabel::ALL[i + 1]);
            assert_eq!(below, LevelLabel::ALL[i]);
        }
        // The top boundary is the golden ratio inverse.
        let phi_inv = 2.0 / (1.0 + 5.0_f64.sqrt());
        assert_eq!(classify(phi_inv).unwrap().label, LevelLabel::Excellent);
    }

    #[test]
    fn classify_out_of_range() {
        assert!(classify(-0.1).is_err());
        assert!(classify(1.1).is_err());
        assert!(classify(f64::NAN).is_err());
    }

    #[test]
    fn custom_scale_validation() {
        assert!(Scale::new([0.1, 0.2, 0.3, 0.4]).is_ok());
        assert!(Scale::new([0.2, 0.2, 0.3, 0.4]).is_err());
        assert!(Scale::new([0.0, 0.2, 0.3, 0.4]).is_err());
        assert!(Scale::new([0.1, 0.2, 0.3, 1.0]).is_err());
    }

    #[test]
    fn derive_weights_normalizes_means() {
        // Two experts agreeing on (3, 3, 4) yield the 0.3/0.3/0.4 pattern.
        let out = derive_weights(&[vec![3.0, 3.0, 4.0], vec![3.0, 3.0, 4.0]]).unwrap();
        assert_eq!(out.weights, vec![0.3, 0.3, 0.4]);
        assert!(out.disputed.is_empty());
        let sum: f64 = out.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derive_weights_single_metric() {
        let out = derive_weights(&[vec![5.0], vec![2.0]]).unwrap();
        assert_eq!(out.weights, vec![1.0]);
    }

    #[test]
    fn derive_weights_symmetry() {
        let out = derive_weights(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(out.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn derive_weights_flags_dispersion() {
        // Experts wildly disagree on the second metric.
        let out = derive_weights(&[vec![4.0, 1.0], vec![4.0, 5.0]]).unwrap();
        assert_eq!(out.disputed, vec![1]);
    }

    #[test]
    fn derive_weights_degenerate() {
        assert!(matches!(derive_weights(&[]), Err(DeriveError::Empty)));
        assert!(matches!(
            derive_weights(&[vec![0.0, 1.0]]),
            Err(DeriveError::DegenerateRatings(0))
        ));
        assert!(matches!(
            derive_weights(&[vec![1.0, 2.0], vec![1.0]]),
            Err(DeriveError::RaggedRows { .. })
        ));
    }

    #[test]
    fn weight_overrides() {
        let mut overrides = BTreeMap::new();
        overrides.insert("UAC-1.1.1-G".to_string(), 0.5);
        overrides.insert("UAC-1.1.2-G".to_string(), 0.2);
        // Leaves UAC-1.1.3-G at its default 0.4 -> group sums to 1.1.
        assert!(WeightSet::with_overrides(&overrides).is_err());
        overrides.insert("UAC-1.1.3-G".to_string(), 0.3);
        let set = WeightSet::with_overrides(&overrides).unwrap();
        assert_eq!(set.attribute(AttributeId::AltText), 0.5);
        assert!(WeightSet::with_overrides(
            &[("UAC-9.9.9-X".to_string(), 1.0)].into_iter().collect()
        )
        .is_err());
    }
}
