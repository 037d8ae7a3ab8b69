//! Attribute scoring: the measurable accessibility attributes, each a pure
//! function of pooled page facts (or of externally supplied judgments),
//! plus the WCAG contrast mathematics they rely on.

use crate::color::Rgb;
use crate::facts::{ContrastGroup, PageFacts};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Contrast thresholds: main text needs 4.5:1, auxiliary (large) text 3:1.
/// Boundary values pass.
pub const MAIN_TEXT_MIN_RATIO: f64 = 4.5;
pub const AUX_TEXT_MIN_RATIO: f64 = 3.0;

/// The nine measured attributes. The first eight sit under the
/// disability-access property; localization is the sole child of the
/// language-adequacy property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AttributeId {
    AltText,
    ColorContrast,
    MediaAlternatives,
    KeyboardNavigation,
    StructuredNavigation,
    ClearInstructions,
    InputAssistance,
    ErrorSupport,
    Localization,
}

impl AttributeId {
    pub const ALL: [AttributeId; 9] = [
        AttributeId::AltText,
        AttributeId::ColorContrast,
        AttributeId::MediaAlternatives,
        AttributeId::KeyboardNavigation,
        AttributeId::StructuredNavigation,
        AttributeId::ClearInstructions,
        AttributeId::InputAssistance,
        AttributeId::ErrorSupport,
        AttributeId::Localization,
    ];

    /// Stable identifier used in configs, reports, and the literature.
    pub fn code(self) -> &'static str {
        match self {
            AttributeId::AltText => "UAC-1.1.1-G",
            AttributeId::ColorContrast => "UAC-1.1.2-G",
            AttributeId::MediaAlternatives => "UAC-1.1.3-G",
            AttributeId::KeyboardNavigation => "UAC-1.2.1-G",
            AttributeId::StructuredNavigation => "UAC-1.2.2-G",
            AttributeId::ClearInstructions => "UAC-1.3.1-G",
            AttributeId::InputAssistance => "UAC-1.3.2-G",
            AttributeId::ErrorSupport => "UAC-1.3.3-G",
            AttributeId::Localization => "UAC-2.1-S",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AttributeId::AltText => "Alternative text",
            AttributeId::ColorContrast => "Color contrast",
            AttributeId::MediaAlternatives => "Subtitles and audio descriptions",
            AttributeId::KeyboardNavigation => "Keyboard navigation",
            AttributeId::StructuredNavigation => "Structured navigation",
            AttributeId::ClearInstructions => "Clear instructions",
            AttributeId::InputAssistance => "Input assistance",
            AttributeId::ErrorSupport => "Correct input support",
            AttributeId::Localization => "Localization",
        }
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AttributeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttributeId::ALL
            .into_iter()
            .find(|id| id.code() == s)
            .ok_or_else(|| format!("unknown attribute id {s:?}"))
    }
}

impl From<AttributeId> for String {
    fn from(id: AttributeId) -> String {
        id.code().to_string()
    }
}

impl TryFrom<String> for AttributeId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// One measured attribute value in [0, 1] with the raw evidence that
/// produced it, so every score can be recomputed from the report alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeScore {
    pub id: AttributeId,
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub applicable: bool,
    /// Why the attribute is not applicable, when it is not.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub not_applicable: Option<NotApplicable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotApplicable {
    /// The denominator is zero: the audited pages have nothing to measure.
    NoEvidence,
    /// The attribute needs a human judgment that was not supplied.
    MissingAnnotation,
}

impl AttributeScore {
    fn ratio(id: AttributeId, numerator: u32, denominator: u32) -> AttributeScore {
        if denominator == 0 {
            return AttributeScore::not_applicable(id, NotApplicable::NoEvidence);
        }
        AttributeScore {
            id,
            value: f64::from(numerator) / f64::from(denominator),
            numerator: f64::from(numerator),
            denominator: f64::from(denominator),
            applicable: true,
            not_applicable: None,
        }
    }

    pub fn not_applicable(id: AttributeId, reason: NotApplicable) -> AttributeScore {
        AttributeScore {
            id,
            value: 0.0,
            numerator: 0.0,
            denominator: 0.0,
            applicable: false,
            not_applicable: Some(reason),
        }
    }

    /// A directly supplied value (score-file mode), clamped to [0, 1].
    pub fn direct(id: AttributeId, value: f64) -> AttributeScore {
        let v = value.clamp(0.0, 1.0);
        AttributeScore {
            id,
            value: v,
            numerator: v,
            denominator: 1.0,
            applicable: true,
            not_applicable: None,
        }
    }
}

/// Externally supplied human judgments for the attributes static analysis
/// cannot decide, read from a JSON file. Element ids are the reference
/// strings emitted by the facts dump, either positional
/// (`page.html::media[0]`) or `#html-id`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotationSet {
    /// Form-filling instructions rated clear, out of all instructions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clear_instructions: Option<ClearInstructionCounts>,
    /// Media elements verified (e.g. by watching them) to carry captions.
    #[serde(skip_serializing_if = "BTreeSet::is_empty")]
    pub captioned_media: BTreeSet<String>,
    /// Forms verified by manual testing to present error messages.
    #[serde(skip_serializing_if = "BTreeSet::is_empty")]
    pub error_support_forms: BTreeSet<String>,
    /// Per-element keyboard operability verdicts overriding the static rule.
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub keyboard: std::collections::BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClearInstructionCounts {
    pub clear: u32,
    pub total: u32,
}

impl AnnotationSet {
    /// Structural checks on user-supplied annotations.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(c) = self.clear_instructions {
            if c.clear > c.total {
                return Err(format!(
                    "clear_instructions: clear ({}) exceeds total ({})",
                    c.clear, c.total
                ));
            }
        }
        Ok(())
    }
}

/// Language availability indicators: each is 1 when the site offers that
/// language, 0 otherwise.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguagePresence {
    pub state_language: bool,
    pub english: bool,
    /// Which of the configured popular European languages are present.
    pub popular_european: BTreeSet<String>,
    pub other: bool,
}

/// Weighting of the language indicators. The defaults reflect a site whose
/// audience primarily speaks the state language: 0.6 for it, 0.2 for
/// English, 0.08 per popular European language, 0.04 for anything else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizationWeights {
    pub state: f64,
    pub english: f64,
    pub popular_each: f64,
    pub other: f64,
}

impl Default for LocalizationWeights {
    fn default() -> Self {
        LocalizationWeights {
            state: 0.6,
            english: 0.2,
            popular_each: 0.08,
            other: 0.04,
        }
    }
}

/// WCAG relative luminance of an sRGB color, in [0, 1].
pub fn relative_luminance(color: Rgb) -> f64 {
    fn linearize(channel: u8) -> f64 {
        let c = f64::from(channel) / 255.0;
        if c <= 0.03928 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    }
    0.2126 * linearize(color.r) + 0.7152 * linearize(color.g) + 0.0722 * linearize(color.b)
}

/// WCAG contrast ratio between two colors, in [1, 21]. Symmetric.
pub fn contrast_ratio(a: Rgb, b: Rgb) -> f64 {
    let la = relative_luminance(a);
    let lb = relative_luminance(b);
    let (lighter, darker) = if la >= lb { (la, lb) } else { (lb, la) };
    (lighter + 0.05) / (darker + 0.05)
}

/// Does a contrast group meet its threshold? Main text needs 4.5:1,
/// auxiliary text 3:1; boundaries inclusive.
pub fn group_passes(group: &ContrastGroup) -> bool {
    let ratio = contrast_ratio(group.foreground, group.background);
    let min = if group.is_main_text {
        MAIN_TEXT_MIN_RATIO
    } else {
        AUX_TEXT_MIN_RATIO
    };
    ratio >= min
}

/// How contrast compliance is aggregated. Config names: "paper", "simple".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ContrastMode {
    /// Element counts weighted by each group's contrast ratio (the default,
    /// config name "paper").
    #[default]
    #[serde(rename = "paper")]
    RatioWeighted,
    /// Plain fraction of elements in passing groups.
    #[serde(rename = "simple")]
    Simple,
}

impl FromStr for ContrastMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(ContrastMode::RatioWeighted),
            "simple" => Ok(ContrastMode::Simple),
            other => Err(format!(
                "unknown contrast mode {other:?} (expected paper or simple)"
            )),
        }
    }
}

/// Counts pooled over all audited pages. Ratio attributes divide pooled
/// numerators by pooled denominators; structured navigation stays per-page
/// and is averaged; languages are a set union.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PooledFacts {
    pub pages: u32,
    pub images_total: u32,
    pub images_with_meaningful_alt: u32,
    pub contrast_groups: Vec<ContrastGroup>,
    pub videos_total: u32,
    pub videos_with_tracks: u32,
    pub interactive_total: u32,
    pub interactive_keyboard_ok: u32,
    pub assistable_fields_total: u32,
    pub fields_with_assistance: u32,
    pub forms_total: u32,
    pub forms_with_error_support: u32,
    pub navigation_pages: Vec<PageNavigation>,
    pub languages_offered: BTreeSet<String>,
}

/// The per-page inputs to the structured-navigation attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageNavigation {
    pub breadcrumbs_present: bool,
    pub skipped_heading_levels: u32,
    pub headings_total: u32,
    /// Deep pages score breadcrumbs and heading structure half each;
    /// shallow pages score heading structure alone.
    pub deep: bool,
}

impl PooledFacts {
    /// Fold one page into the pool. Associative and commutative on the
    /// counts, so pages may be extracted in parallel and merged in any
    /// order; the navigation list keeps caller-supplied page order.
    pub fn add(&mut self, facts: &PageFacts, deep: bool) {
        self.pages += 1;
        self.images_total += facts.images_total;
        self.images_with_meaningful_alt += facts.images_with_meaningful_alt;
        self.videos_total += facts.videos_total;
        self.videos_with_tracks += facts.videos_with_tracks;
        self.interactive_total += facts.interactive_total;
        self.interactive_keyboard_ok += facts.interactive_keyboard_ok;
        self.assistable_fields_total += facts.assistable_fields_total;
        self.fields_with_assistance += facts.fields_with_assistance;
        self.forms_total += facts.forms_total;
        self.forms_with_error_support += facts.forms_with_error_support;
        for group in &facts.contrast_groups {
            self.merge_group(*group);
        }
        self.navigation_pages.push(PageNavigation {
            breadcrumbs_present: facts.breadcrumbs_present,
            skipped_heading_levels: facts.skipped_heading_levels,
            headings_total: facts.headings_total,
            deep,
        });
        self.languages_offered
            .extend(facts.languages_offered.iter().cloned());
    }

    fn merge_group(&mut self, group: ContrastGroup) {
        let key = (group.foreground, group.background, group.is_main_text);
        match self
            .contrast_groups
            .iter_mut()
            .find(|g| (g.foreground, g.background, g.is_main_text) == key)
        {
            Some(existing) => existing.element_count += group.element_count,
            None => self.contrast_groups.push(group),
        }
        self.contrast_groups.sort();
    }
}

/// Share of countable images carrying meaningful alternative text.
pub fn score_alt_text(facts: &PooledFacts) -> AttributeScore {
    AttributeScore::ratio(
        AttributeId::AltText,
        facts.images_with_meaningful_alt,
        facts.images_total,
    )
}

/// Contrast compliance over all text groups. In the default mode each
/// group's element count is weighted by its contrast ratio, so the score is
/// sum(ratio * passing elements) / sum(ratio * elements).
pub fn score_contrast(groups: &[ContrastGroup], mode: ContrastMode) -> AttributeScore {
    if groups.is_empty() {
        return AttributeScore::not_applicable(
            AttributeId::ColorContrast,
            NotApplicable::NoEvidence,
        );
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for group in groups {
        let weight = match mode {
            ContrastMode::RatioWeighted => contrast_ratio(group.foreground, group.background),
            ContrastMode::Simple => 1.0,
        };
        let mass = weight * f64::from(group.element_count);
        denominator += mass;
        if group_passes(group) {
            numerator += mass;
        }
    }
    AttributeScore {
        id: AttributeId::ColorContrast,
        value: numerator / denominator,
        numerator,
        denominator,
        applicable: true,
        not_applicable: None,
    }
}

/// Share of video and audio elements offering subtitles, captions, or
/// descriptions.
pub fn score_media_alternatives(facts: &PooledFacts) -> AttributeScore {
    AttributeScore::ratio(
        AttributeId::MediaAlternatives,
        facts.videos_with_tracks,
        facts.videos_total,
    )
}

/// Share of interactive elements operable from the keyboard.
pub fn score_keyboard(facts: &PooledFacts) -> AttributeScore {
    AttributeScore::ratio(
        AttributeId::KeyboardNavigation,
        facts.interactive_keyboard_ok,
        facts.interactive_total,
    )
}

/// Structured-navigation value for a single page. Deep pages split the
/// score between breadcrumb presence and heading hygiene; shallow pages
/// score heading hygiene alone. Pages without headings take a zero skip
/// ratio, and the ratio is capped at 1 so the value stays in [0, 1].
pub fn structured_navigation_page_value(nav: &PageNavigation) -> f64 {
    let skip_ratio = if nav.headings_total == 0 {
        0.0
    } else {
        (f64::from(nav.skipped_heading_levels) / f64::from(nav.headings_total)).min(1.0)
    };
    if nav.deep {
        let breadcrumbs = if nav.breadcrumbs_present { 1.0 } else { 0.0 };
        0.5 * breadcrumbs + 0.5 * (1.0 - skip_ratio)
    } else {
        1.0 - skip_ratio
    }
}

/// Site-level structured navigation: the mean of the per-page values,
/// since breadcrumb presence cannot be pooled as a count.
pub fn score_structured_navigation(facts: &PooledFacts) -> AttributeScore {
    if facts.navigation_pages.is_empty() {
        return AttributeScore::not_applicable(
            AttributeId::StructuredNavigation,
            NotApplicable::NoEvidence,
        );
    }
    let sum: f64 = facts
        .navigation_pages
        .iter()
        .map(structured_navigation_page_value)
        .sum();
    let count = facts.navigation_pages.len() as f64;
    AttributeScore {
        id: AttributeId::StructuredNavigation,
        value: sum / count,
        numerator: sum,
        denominator: count,
        applicable: true,
        not_applicable: None,
    }
}

/// Share of instructions humans rated clear. Entirely annotation-driven:
/// without an annotation the attribute is not applicable.
pub fn score_clear_instructions(counts: Option<ClearInstructionCounts>) -> AttributeScore {
    match counts {
        None => AttributeScore::not_applicable(
            AttributeId::ClearInstructions,
            NotApplicable::MissingAnnotation,
        ),
        Some(c) => AttributeScore::ratio(AttributeId::ClearInstructions, c.clear, c.total),
    }
}

/// Share of text-like fields offering input assistance.
pub fn score_input_assistance(facts: &PooledFacts) -> AttributeScore {
    AttributeScore::ratio(
        AttributeId::InputAssistance,
        facts.fields_with_assistance,
        facts.assistable_fields_total,
    )
}

/// Share of forms wired for error messages.
pub fn score_error_support(facts: &PooledFacts) -> AttributeScore {
    AttributeScore::ratio(
        AttributeId::ErrorSupport,
        facts.forms_with_error_support,
        facts.forms_total,
    )
}

/// Weighted sum of the language indicators, clamped to [0, 1]. Applicable
/// whenever at least one page was audited.
pub fn score_localization(
    presence: &LanguagePresence,
    weights: &LocalizationWeights,
    pages_audited: bool,
) -> AttributeScore {
    if !pages_audited {
        return AttributeScore::not_applicable(
            AttributeId::Localization,
            NotApplicable::NoEvidence,
        );
    }
    let mut value = 0.0;
    if presence.state_language {
        value += weights.state;
    }
    if presence.english {
        value += weights.english;
    }
    value += weights.popular_each * presence.popular_european.len() as f64;
    if presence.other {
        value += weights.other;
    }
    let value = value.clamp(0.0, 1.0);
    AttributeScore {
        id: AttributeId::Localization,
        value,
        numerator: value,
        denominator: 1.0,
        applicable: true,
        not_applicable: None,
    }
}
