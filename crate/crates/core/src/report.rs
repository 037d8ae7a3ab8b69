//! Report assembly and rendering: JSON (schema-stable, round-trippable)
//! and Markdown with the score table, recommendations, warnings, and page
//! inventory. Every attribute carries its raw evidence so results can be
//! recomputed from the report alone.

use crate::facts::{PageFacts, Warning};
use crate::metrics::{AttributeId, AttributeScore, NotApplicable};
use crate::rollup::{PropertyId, QualityLevel, QualityTree, Scale, SubpropertyId, WeightSet};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Json,
    #[default]
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!(
                "unknown format {other:?} (expected json or markdown)"
            )),
        }
    }
}

/// Render a score rounded to five decimals, trailing zeros trimmed, the way
/// the reference table prints values (0.15, 0.99, 0, 1, 0.67916).
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.5}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

fn format_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format_value(x),
        None => "n/a".to_string(),
    }
}

/// Recommendation urgency. Critical marks unimplemented features (zero
/// scores) and judgments that are missing entirely; major marks everything
/// measurably below the excellence threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Critical,
    Major,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub attribute: AttributeId,
    pub severity: Severity,
    pub message: String,
}

fn improvement_message(id: AttributeId, missing_annotation: bool) -> String {
    if missing_annotation {
        return "no annotation rated this attribute; audit it manually and supply the judgment \
                (see the annotations file format)"
            .to_string();
    }
    match id {
        AttributeId::AltText => {
            "add meaningful alternative text to the images that lack it".to_string()
        }
        AttributeId::ColorContrast => {
            "raise text contrast to at least 4.5:1 for main text and 3:1 for large text".to_string()
        }
        AttributeId::MediaAlternatives => {
            "provide subtitles, captions, or audio descriptions for video and audio content"
                .to_string()
        }
        AttributeId::KeyboardNavigation => {
            "make every interactive element reachable and operable with the keyboard".to_string()
        }
        AttributeId::StructuredNavigation => {
            "add breadcrumb navigation and close skipped heading levels".to_string()
        }
        AttributeId::ClearInstructions => {
            "rewrite form instructions so they are specific and understandable".to_string()
        }
        AttributeId::InputAssistance => {
            "offer autocomplete, hints, or format descriptions on text entry fields".to_string()
        }
        AttributeId::ErrorSupport => {
            "announce form errors with live messages users can find and act on".to_string()
        }
        AttributeId::Localization => {
            "offer the interface in the languages the audience needs".to_string()
        }
    }
}

/// Build the improvement list from an evaluated tree. Attributes scoring
/// zero (or unratable for lack of an annotation) are critical; anything
/// below the excellence threshold is major; attributes at or above it need
/// no refinement and produce no entry. Sorted by severity, then ascending
/// value.
pub fn recommend(tree: &QualityTree, scale: &Scale) -> Vec<Recommendation> {
    let excellent = scale.breakpoints[3];
    let mut entries: Vec<(Severity, f64, AttributeId)> = Vec::new();
    for score in &tree.attributes {
        if !score.applicable {
            if score.not_applicable == Some(NotApplicable::MissingAnnotation) {
                entries.push((Severity::Critical, 0.0, score.id));
            }
            continue;
        }
        if score.value == 0.0 {
            entries.push((Severity::Critical, 0.0, score.id));
        } else if score.value < excellent {
            entries.push((Severity::Major, score.value, score.id));
        }
    }
    entries.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    entries
        .into_iter()
        .map(|(severity, _, id)| {
            let missing = severity == Severity::Critical
                && tree
                    .attribute(id)
                    .is_some_and(|s| s.not_applicable == Some(NotApplicable::MissingAnnotation));
            Recommendation {
                attribute: id,
                severity,
                message: improvement_message(id, missing),
            }
        })
        .collect()
}

/// Per-page facts summary carried in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSummary {
    pub origin: String,
    pub path_depth: u32,
    pub deep: bool,
    pub structured_navigation: f64,
    pub facts: PageFacts,
}

/// Attribute row: the score plus its display name and assigned weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeEntry {
    pub id: AttributeId,
    pub name: String,
    pub value: Option<f64>,
    pub numerator: f64,
    pub denominator: f64,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub not_applicable: Option<NotApplicable>,
    pub weight: f64,
}

impl AttributeEntry {
    fn from_score(score: &AttributeScore, weight: f64) -> AttributeEntry {
        AttributeEntry {
            id: score.id,
            name: score.id.name().to_string(),
            value: score.applicable.then_some(score.value),
            numerator: score.numerator,
            denominator: score.denominator,
            applicable: score.applicable,
            not_applicable: score.not_applicable,
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub value: Option<f64>,
    pub weight: f64,
}

/// The aggregated layers of the tree; leaf evidence lives in `attributes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub subproperties: BTreeMap<SubpropertyId, NodeEntry>,
    pub properties: BTreeMap<PropertyId, NodeEntry>,
    pub subcharacteristic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerPageReport {
    pub origin: String,
    pub attributes: Vec<AttributeEntry>,
    pub tree: TreeSummary,
    pub level: Option<QualityLevel>,
}

/// The complete audit result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema: u32,
    pub tool_version: String,
    pub pages: Vec<PageSummary>,
    pub attributes: Vec<AttributeEntry>,
    pub tree: TreeSummary,
    pub level: Option<QualityLevel>,
    pub recommendations: Vec<Recommendation>,
    pub warnings: Vec<Warning>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_page: Option<Vec<PerPageReport>>,
}

pub(crate) fn tree_summary(tree: &QualityTree, weights: &WeightSet) -> TreeSummary {
    TreeSummary {
        subproperties: SubpropertyId::ALL
            .into_iter()
            .map(|id| {
                (
                    id,
                    NodeEntry {
                        value: tree.subproperties[&id],
                        weight: weights.subproperty(id),
                    },
                )
            })
            .collect(),
        properties: PropertyId::ALL
            .into_iter()
            .map(|id| {
                (
                    id,
                    NodeEntry {
                        value: tree.properties[&id],
                        weight: weights.property(id),
                    },
                )
            })
            .collect(),
        subcharacteristic: tree.subcharacteristic,
    }
}

pub(crate) fn attribute_entries(tree: &QualityTree, weights: &WeightSet) -> Vec<AttributeEntry> {
    tree.attributes
        .iter()
        .map(|score| AttributeEntry::from_score(score, weights.attribute(score.id)))
        .collect()
}

/// Assemble a report from an evaluated tree. Warnings are deduplicated,
/// preserving first appearance order.
pub fn build_report(
    tree: &QualityTree,
    weights: &WeightSet,
    scale: &Scale,
    pages: Vec<PageSummary>,
    warnings: Vec<Warning>,
    per_page: Option<Vec<PerPageReport>>,
) -> AuditReport {
    let mut unique_warnings: Vec<Warning> = Vec::new();
    for w in warnings {
        if !unique_warnings.contains(&w) {
            unique_warnings.push(w);
        }
    }
    AuditReport {
        schema: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        pages,
        attributes: attribute_entries(tree, weights),
        tree: tree_summary(tree, weights),
        level: tree.level,
        recommendations: recommend(tree, scale),
        warnings: unique_warnings,
        per_page,
    }
}

/// Serialize the report. JSON output has stable field and key order, so a
/// fixed report always renders to identical bytes.
pub fn render_report(report: &AuditReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::Markdown => render_markdown(report).into_bytes(),
    }
}

fn render_markdown(report: &AuditReport) -> String {
    use fmt::Write;

    let mut md = String::new();
    let _ = writeln!(md, "# Accessibility audit\n");

    let _ = writeln!(md, "## Summary\n");
    let score = format_opt(report.tree.subcharacteristic);
    match report.level {
        Some(level) => {
            let _ = writeln!(md, "- Overall score: {score} ({})", level.label);
        }
        None => {
            let _ = writeln!(md, "- Overall score: {score}");
        }
    }
    let _ = writeln!(md, "- Pages audited: {}", report.pages.len());
    let _ = writeln!(md, "- Tool version: {}", report.tool_version);
    let _ = writeln!(md);

    let _ = writeln!(md, "## Table\n");
    let _ = writeln!(md, "| ID | Value | Weight |");
    let _ = writeln!(md, "| --- | --- | --- |");
    for entry in &report.attributes {
        // The localization leaf doubles as its subproperty; one row suffices.
        if entry.id == AttributeId::Localization {
            continue;
        }
        let _ = writeln!(
            md,
            "| {} | {} | {} |",
            entry.id,
            format_opt(entry.value),
            format_value(entry.weight)
        );
    }
    for (id, node) in &report.tree.subproperties {
        let _ = writeln!(
            md,
            "| {} | {} | {} |",
            id,
            format_opt(node.value),
            format_value(node.weight)
        );
    }
    for (id, node) in &report.tree.properties {
        let _ = writeln!(
            md,
            "| {} | {} | {} |",
            id,
            format_opt(node.value),
            format_value(node.weight)
        );
    }
    let _ = writeln!(
        md,
        "| UAC | {} |  |",
        format_opt(report.tree.subcharacteristic)
    );
    let _ = writeln!(md);

    let _ = writeln!(md, "## Recommendations\n");
    if report.recommendations.is_empty() {
        let _ = writeln!(md, "None.");
    } else {
        for rec in &report.recommendations {
            let tag = match rec.severity {
                Severity::Critical => "critical",
                Severity::Major => "major",
            };
            let _ = writeln!(
                md,
                "- **{tag}** {} ({}): {}",
                rec.attribute,
                rec.attribute.name(),
                rec.message
            );
        }
    }
    let _ = writeln!(md);

    let _ = writeln!(md, "## Warnings\n");
    if report.warnings.is_empty() {
        let _ = writeln!(md, "None.");
    } else {
        for warning in &report.warnings {
            let _ = writeln!(md, "- {warning}");
        }
    }
    let _ = writeln!(md);

    let _ = writeln!(md, "## Page Inventory\n");
    if report.pages.is_empty() {
        let _ = writeln!(md, "No pages.");
    } else {
        for page in &report.pages {
            let f = &page.facts;
            let _ =
                writeln!(
                md,
                "- `{}` (depth {}, {}): {} images ({} meaningful alt), {} media ({} captioned), \
                 {} interactive ({} keyboard), {} headings ({} skipped levels), {} fields \
                 ({} assisted), {} forms ({} with error support), breadcrumbs: {}, languages: {}",
                page.origin,
                page.path_depth,
                if page.deep { "deep" } else { "shallow" },
                f.images_total,
                f.images_with_meaningful_alt,
                f.videos_total,
                f.videos_with_tracks,
                f.interactive_total,
                f.interactive_keyboard_ok,
                f.headings_total,
                f.skipped_heading_levels,
                f.assistable_fields_total,
                f.fields_with_assistance,
                f.forms_total,
                f.forms_with_error_support,
                if f.breadcrumbs_present { "yes" } else { "no" },
                if f.languages_offered.is_empty() {
                    "none".to_string()
                } else {
                    f.languages_offered.iter().cloned().collect::<Vec<_>>().join(", ")
                }
            );
        }
    }

    if let Some(per_page) = &report.per_page {
        let _ = writeln!(md);
        let _ = writeln!(md, "## Per-page Trees\n");
        for page in per_page {
            let score = format_opt(page.tree.subcharacteristic);
            let level = match page.level {
                Some(l) => l.label.to_string(),
                None => "n/a".to_string(),
            };
            let _ = writeln!(md, "- `{}`: {} ({})", page.origin, score, level);
        }
    }

    md
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::AttributeScore;
    use crate::rollup::evaluate_tree;

    fn reference_tree() -> QualityTree {
        let scores = vec![
            AttributeScore::direct(AttributeId::AltText, 0.15),
            AttributeScore::direct(AttributeId::ColorContrast, 0.99),
            AttributeScore::direct(AttributeId::MediaAlternatives, 0.0),
            AttributeScore::direct(AttributeId::KeyboardNavigation, 1.0),
            AttributeScore::direct(AttributeId::StructuredNavigation, 0.47),
            AttributeScore::direct(AttributeId::ClearInstructions, 1.0),
            AttributeScore::direct(AttributeId::InputAssistance, 0.0),
            AttributeScore::direct(AttributeId::ErrorSupport, 0.83),
            AttributeScore::direct(AttributeId::Localization, 0.8),
        ];
        let mut warnings = Vec::new();
        evaluate_tree(
            &scores,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap()
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(0.67916), "0.67916");
        assert_eq!(format_value(0.15), "0.15");
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(0.4699999999999999), "0.47");
        assert_eq!(format_value(5.0 / 6.0), "0.83333");
    }

    #[test]
    fn recommendations_for_reference_column() {
        let tree = reference_tree();
        let recs = recommend(&tree, &Scale::default());
        let critical: Vec<AttributeId> = recs
            .iter()
            .filter(|r| r.severity == Severity::Critical)
            .map(|r| r.attribute)
            .collect();
        let major: Vec<AttributeId> = recs
            .iter()
            .filter(|r| r.severity == Severity::Major)
            .map(|r| r.attribute)
            .collect();
        assert_eq!(
            critical,
            vec![AttributeId::MediaAlternatives, AttributeId::InputAssistance]
        );
        assert_eq!(
            major,
            vec![AttributeId::AltText, AttributeId::StructuredNavigation]
        );
        // High scorers produce no entry at all.
        for id in [
            AttributeId::ColorContrast,
            AttributeId::KeyboardNavigation,
            AttributeId::ClearInstructions,
            AttributeId::ErrorSupport,
            AttributeId::Localization,
        ] {
            assert!(recs.iter().all(|r| r.attribute != id));
        }
    }

    #[test]
    fn recommendations_empty_for_perfect_tree() {
        let scores: Vec<AttributeScore> = AttributeId::ALL
            .into_iter()
            .map(|id| AttributeScore::direct(id, 1.0))
            .collect();
        let mut warnings = Vec::new();
        let tree = evaluate_tree(
            &scores,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        assert!(recommend(&tree, &Scale::default()).is_empty());
    }

    #[test]
    fn no_recommendation_at_or_above_excellence() {
        let phi_inv = 2.0 / (1.0 + 5.0_f64.sqrt());
        let mut scores: Vec<AttributeScore> = AttributeId::ALL
            .into_iter()
            .map(|id| AttributeScore::direct(id, 1.0))
            .collect();
        scores[0] = AttributeScore::direct(AttributeId::AltText, phi_inv);
        let mut warnings = Vec::new();
        let tree = evaluate_tree(
            &scores,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        let recs = recommend(&tree, &Scale::default());
        assert!(recs.iter().all(|r| r.attribute != AttributeId::AltText));
        // Just below the boundary, an entry appears.
        scores[0] = AttributeScore::direct(AttributeId::AltText, phi_inv - 1e-9);
        let tree = evaluate_tree(
            &scores,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        let recs = recommend(&tree, &Scale::default());
        assert!(recs.iter().any(|r| r.attribute == AttributeId::AltText));
    }

    #[test]
    fn missing_annotation_is_critical() {
        let mut scores: Vec<AttributeScore> = AttributeId::ALL
            .into_iter()
            .map(|id| AttributeScore::direct(id, 1.0))
            .collect();
        scores[5] = AttributeScore::not_applicable(
            AttributeId::ClearInstructions,
            NotApplicable::MissingAnnotation,
        );
        let mut warnings = Vec::new();
        let tree = evaluate_tree(
            &scores,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        let recs = recommend(&tree, &Scale::default());
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].attribute, AttributeId::ClearInstructions);
        assert_eq!(recs[0].severity, Severity::Critical);
    }

    #[test]
    fn no_evidence_gets_no_recommendation() {
        let mut scores: Vec<AttributeScore> = AttributeId::ALL
            .into_iter()
            .map(|id| AttributeScore::direct(id, 1.0))
            .collect();
        scores[2] = AttributeScore::not_applicable(
            AttributeId::MediaAlternatives,
            NotApplicable::NoEvidence,
        );
        let mut warnings = Vec::new();
        let tree = evaluate_tree(
            &scores,
            &WeightSet::default(),
            &Scale::default(),
            &mut warnings,
        )
        .unwrap();
        assert!(recommend(&tree, &Scale::default()).is_empty());
    }

    #[test]
    fn markdown_contains_reference_rows() {
        let tree = reference_tree();
        let report = build_report(
            &tree,
            &WeightSet::default(),
            &Scale::default(),
            Vec::new(),
            Vec::new(),
            None,
        );
        let md = String::from_utf8(render_report(&report, ReportFormat::Markdown)).unwrap();
        assert!(md.contains("| UAC | 0.67916 |"));
        assert!(md.contains("| UAC-1.1-G | 0.342 | 0.3 |"));
        assert!(md.contains("| UAC-1-G | 0.5986 | 0.6 |"));
        assert!(md.contains("## Summary"));
        assert!(md.contains("## Table"));
        assert!(md.contains("## Recommendations"));
        assert!(md.contains("## Warnings"));
        assert!(md.contains("## Page Inventory"));
    }

    #[test]
    fn json_round_trips_and_is_deterministic() {
        let tree = reference_tree();
        let report = build_report(
            &tree,
            &WeightSet::default(),
            &Scale::default(),
            Vec::new(),
            vec![Warning::EmptyAudit],
            None,
        );
        let a = render_report(&report, ReportFormat::Json);
        let b = render_report(&report, ReportFormat::Json);
        assert_eq!(a, b);
        let parsed: AuditReport = serde_json::from_slice(&a).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(render_report(&parsed, ReportFormat::Json), a);
    }

    #[test]
    fn warnings_are_deduplicated() {
        let tree = reference_tree();
        let report = build_report(
            &tree,
            &WeightSet::default(),
            &Scale::default(),
            Vec::new(),
            vec![Warning::EmptyAudit, Warning::EmptyAudit],
            None,
        );
        assert_eq!(report.warnings.len(), 1);
    }
}
