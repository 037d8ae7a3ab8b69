//! Countable evidence extracted from HTML pages.
//!
//! Everything the scoring formulas consume is gathered here by static
//! analysis of the parsed document: no script execution, no rendering.
//! Extraction is a pure function of the document bytes and the
//! [`HeuristicConfig`], so pages can be processed in parallel and the same
//! input always yields the same facts.

mod extract;
pub mod style;

pub use extract::extract_page;

use crate::color::Rgb;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// One HTML document to audit, plus where it came from.
#[derive(Debug, Clone)]
pub struct SourceDocument {
    /// File path or URL, used for reporting and element references.
    pub origin: String,
    /// Raw bytes; decoded as UTF-8 with lossy replacement (flagged).
    pub raw: Vec<u8>,
    /// Number of URL path segments. File inputs default to 0 unless
    /// overridden; together with breadcrumbs it decides the deep-page rule.
    pub path_depth: u32,
}

impl SourceDocument {
    pub fn new(origin: impl Into<String>, raw: impl Into<Vec<u8>>, path_depth: u32) -> Self {
        SourceDocument {
            origin: origin.into(),
            raw: raw.into(),
            path_depth,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("document is empty")]
    EmptyDocument,
    #[error("document is not parseable as HTML: {0}")]
    MalformedDocument(String),
}

/// A run of same-styled visible text: foreground/background pair, main vs
/// auxiliary (large) classification, and how many text-bearing elements
/// share it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContrastGroup {
    pub foreground: Rgb,
    pub background: Rgb,
    /// Main text needs a 4.5:1 contrast ratio; auxiliary (large) text 3:1.
    pub is_main_text: bool,
    pub element_count: u32,
}

/// Everything countable from one page.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PageFacts {
    pub images_total: u32,
    pub images_with_meaningful_alt: u32,
    pub contrast_groups: Vec<ContrastGroup>,
    pub videos_total: u32,
    pub videos_with_tracks: u32,
    pub interactive_total: u32,
    pub interactive_keyboard_ok: u32,
    pub breadcrumbs_present: bool,
    pub heading_levels: Vec<u8>,
    pub skipped_heading_levels: u32,
    pub headings_total: u32,
    pub assistable_fields_total: u32,
    pub fields_with_assistance: u32,
    pub forms_total: u32,
    pub forms_with_error_support: u32,
    pub languages_offered: BTreeSet<String>,
}

/// Tunable knobs for the extraction heuristics. The defaults implement the
/// documented rules; every threshold is overridable so audits can state
/// exactly what they measured.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicConfig {
    /// Alt texts equal to one of these (case-insensitive) are not meaningful.
    pub alt_stopwords: Vec<String>,
    /// Alt texts ending in `.` + one of these extensions look like filenames
    /// and are not meaningful.
    pub alt_filename_extensions: Vec<String>,
    /// Font size (px) at or above which text is auxiliary regardless of weight.
    pub large_text_px: f64,
    /// Font size (px) at or above which bold text is auxiliary.
    pub large_text_bold_px: f64,
    /// Class tokens that mark a breadcrumb container.
    pub breadcrumb_class_tokens: Vec<String>,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            alt_stopwords: ["image", "photo", "picture", "img", "icon"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            alt_filename_extensions: ["png", "jpg", "jpeg", "gif", "svg", "webp"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            large_text_px: 24.0,
            large_text_bold_px: 18.66,
            breadcrumb_class_tokens: vec!["breadcrumb".to_string(), "breadcrumbs".to_string()],
        }
    }
}

impl HeuristicConfig {
    /// Meaningful alt text: non-empty after trimming, not a bare filename,
    /// and not a placeholder word like "image".
    pub fn alt_is_meaningful(&self, alt: &str) -> bool {
        let trimmed = alt.trim();
        if trimmed.is_empty() {
            return false;
        }
        let lower = trimmed.to_ascii_lowercase();
        if self
            .alt_stopwords
            .iter()
            .any(|w| w.eq_ignore_ascii_case(&lower))
        {
            return false;
        }
        if let Some((_, ext)) = lower.rsplit_once('.') {
            if self.alt_filename_extensions.iter().any(|e| e == ext) {
                return false;
            }
        }
        true
    }
}

/// Skipped heading levels: for each step up in the sequence, the number of
/// levels jumped over; a document that opens deeper than h1 skips the
/// levels above its first heading. Steps down never count.
pub fn count_skipped_heading_levels(levels: &[u8]) -> u32 {
    let mut skipped = 0u32;
    let mut prev: Option<u8> = None;
    for &level in levels {
        match prev {
            None => skipped += u32::from(level.saturating_sub(1)),
            Some(p) if level > p => skipped += u32::from(level - p - 1),
            Some(_) => {}
        }
        prev = Some(level);
    }
    skipped
}

/// Warnings raised while extracting or auditing; each distinct condition is
/// reported once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Input bytes were not valid UTF-8; replacement characters were used.
    LossyDecode { origin: String },
    /// An external stylesheet was referenced but not fetched, so computed
    /// styles fall back to defaults.
    StylesPartiallyResolved { origin: String, href: String },
    /// An annotation override referenced an element that was not found.
    UnmatchedOverride { id: String },
    /// A human-judged attribute had no annotation and was left unscored.
    MissingAnnotation { attribute: String },
    /// A not-applicable child's weight was redistributed among its siblings.
    WeightRedistributed { node: String },
    /// A score input named an attribute id that is not part of the model.
    UnknownAttribute { id: String },
    /// An expected attribute was absent from the scores file.
    MissingAttribute { attribute: String },
    /// The audit covered no pages at all.
    EmptyAudit,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::LossyDecode { origin } => {
                write!(
                    f,
                    "{origin}: input was not valid UTF-8; decoded with replacements"
                )
            }
            Warning::StylesPartiallyResolved { origin, href } => {
                write!(
                    f,
                    "{origin}: stylesheet {href} not fetched; styles partially resolved"
                )
            }
            Warning::UnmatchedOverride { id } => {
                write!(f, "annotation override {id} matched no element")
            }
            Warning::MissingAnnotation { attribute } => {
                write!(
                    f,
                    "{attribute}: no annotation supplied; attribute not applicable"
                )
            }
            Warning::WeightRedistributed { node } => {
                write!(f, "{node}: weight of not-applicable children redistributed")
            }
            Warning::UnknownAttribute { id } => write!(f, "unknown attribute id {id} ignored"),
            Warning::MissingAttribute { attribute } => {
                write!(
                    f,
                    "{attribute}: missing from scores input; treated as not applicable"
                )
            }
            Warning::EmptyAudit => write!(f, "no pages audited; all attributes not applicable"),
        }
    }
}

/// Per-element records kept alongside the counts so annotation overrides
/// can address individual elements and the facts dump can list them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageRecord {
    /// Positional reference, `"<origin>::img[<n>]"`.
    pub reference: String,
    /// `#id` form, when the element has an id attribute.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_reference: Option<String>,
    pub alt: Option<String>,
    /// Marked decorative (empty alt plus presentation role or aria-hidden);
    /// excluded from both numerator and denominator.
    pub decorative: bool,
    pub meaningful_alt: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MediaRecord {
    pub reference: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_reference: Option<String>,
    /// "video" or "audio".
    pub kind: String,
    /// Has a subtitle, caption, or description track in the markup.
    pub has_alternative: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractiveRecord {
    pub reference: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_reference: Option<String>,
    /// Element description, e.g. `a[href]` or `div[onclick]`.
    pub element: String,
    pub keyboard_operable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormRecord {
    pub reference: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_reference: Option<String>,
    pub error_support: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldRecord {
    pub reference: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_reference: Option<String>,
    pub element: String,
    pub assisted: bool,
    /// Which assistance features were found (autocomplete, placeholder, ...).
    pub assistance: Vec<String>,
}

/// Full extraction result for one page: the counts plus the element
/// inventory they were derived from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PageExtraction {
    pub origin: String,
    pub path_depth: u32,
    pub images: Vec<ImageRecord>,
    pub media: Vec<MediaRecord>,
    pub interactive: Vec<InteractiveRecord>,
    pub forms: Vec<FormRecord>,
    pub fields: Vec<FieldRecord>,
    pub contrast_groups: Vec<ContrastGroup>,
    pub breadcrumbs_present: bool,
    pub heading_levels: Vec<u8>,
    pub languages: BTreeSet<String>,
    pub warnings: Vec<Warning>,
}

impl PageExtraction {
    /// Recompute the countable facts from the element inventory. Called
    /// after extraction and again after annotation overrides are applied.
    pub fn facts(&self) -> PageFacts {
        let countable_images = self.images.iter().filter(|i| !i.decorative);
        PageFacts {
            images_total: countable_images.clone().count() as u32,
            images_with_meaningful_alt: countable_images.filter(|i| i.meaningful_alt).count()
                as u32,
            contrast_groups: self.contrast_groups.clone(),
            videos_total: self.media.len() as u32,
            videos_with_tracks: self.media.iter().filter(|m| m.has_alternative).count() as u32,
            interactive_total: self.interactive.len() as u32,
            interactive_keyboard_ok: self
                .interactive
                .iter()
                .filter(|i| i.keyboard_operable)
                .count() as u32,
            breadcrumbs_present: self.breadcrumbs_present,
            heading_levels: self.heading_levels.clone(),
            skipped_heading_levels: count_skipped_heading_levels(&self.heading_levels),
            headings_total: self.heading_levels.len() as u32,
            assistable_fields_total: self.fields.len() as u32,
            fields_with_assistance: self.fields.iter().filter(|f| f.assisted).count() as u32,
            forms_total: self.forms.len() as u32,
            forms_with_error_support: self.forms.iter().filter(|f| f.error_support).count() as u32,
            languages_offered: self.languages.clone(),
        }
    }

    /// Deep-page rule: a page is deep when its URL path has at least two
    /// segments or it carries breadcrumbs.
    pub fn is_deep(&self) -> bool {
        self.path_depth >= 2 || self.breadcrumbs_present
    }
}

/// The machine-readable facts dump: counts plus the element references an
/// annotation file can address.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactsDump {
    pub schema: u32,
    pub origin: String,
    pub path_depth: u32,
    pub facts: PageFacts,
    pub elements: ElementInventory,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementInventory {
    pub images: Vec<ImageRecord>,
    pub media: Vec<MediaRecord>,
    pub interactive: Vec<InteractiveRecord>,
    pub forms: Vec<FormRecord>,
    pub fields: Vec<FieldRecord>,
}

impl From<&PageExtraction> for FactsDump {
    fn from(page: &PageExtraction) -> FactsDump {
        FactsDump {
            schema: 1,
            origin: page.origin.clone(),
            path_depth: page.path_depth,
            facts: page.facts(),
            elements: ElementInventory {
                images: page.images.clone(),
                media: page.media.clone(),
                interactive: page.interactive.clone(),
                forms: page.forms.clone(),
                fields: page.fields.clone(),
            },
            warnings: page.warnings.clone(),
        }
    }
}

/// External stylesheet texts keyed by the `href` attribute that referenced
/// them. Extraction never fetches anything itself; the caller pre-fetches
/// same-origin sheets when auditing URLs and passes them in, keeping
/// extraction a pure function of its inputs.
#[derive(Debug, Clone, Default)]
pub struct ExternalCss {
    sheets: std::collections::BTreeMap<String, String>,
}

impl ExternalCss {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, href: impl Into<String>, css: impl Into<String>) {
        self.sheets.insert(href.into(), css.into());
    }

    pub fn get(&self, href: &str) -> Option<&str> {
        self.sheets.get(href).map(String::as_str)
    }
}

/// Parse one document and return its countable facts.
pub fn parse_document(
    doc: &SourceDocument,
    heuristics: &HeuristicConfig,
) -> Result<PageFacts, ExtractError> {
    extract_page(doc, heuristics, &ExternalCss::none()).map(|p| p.facts())
}

/// Breadcrumb presence for one document, using the extraction rules.
pub fn detect_breadcrumbs(doc: &SourceDocument) -> Result<bool, ExtractError> {
    extract_page(doc, &HeuristicConfig::default(), &ExternalCss::none())
        .map(|p| p.breadcrumbs_present)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skipped_levels_no_gaps() {
        assert_eq!(count_skipped_heading_levels(&[1, 2, 3]), 0);
        assert_eq!(count_skipped_heading_levels(&[1, 2, 2, 3]), 0);
        assert_eq!(count_skipped_heading_levels(&[]), 0);
    }

    #[test]
    fn skipped_levels_single_gap() {
        assert_eq!(count_skipped_heading_levels(&[1, 3, 4]), 1);
    }

    #[test]
    fn skipped_levels_leading_gap() {
        // h1 missing before h2, then h3 and h4 skipped.
        assert_eq!(count_skipped_heading_levels(&[2, 5]), 3);
    }

    #[test]
    fn skipped_levels_decreases_do_not_count() {
        assert_eq!(count_skipped_heading_levels(&[1, 4, 1, 2]), 2);
        assert_eq!(count_skipped_heading_levels(&[6, 1, 6]), 5 + 4);
    }

    #[test]
    fn meaningful_alt_rules() {
        let h = HeuristicConfig::default();
        assert!(h.alt_is_meaningful("Campus map"));
        assert!(!h.alt_is_meaningful(""));
        assert!(!h.alt_is_meaningful("   "));
        assert!(!h.alt_is_meaningful("photo.JPG"));
        assert!(!h.alt_is_meaningful("banner.webp"));
        assert!(!h.alt_is_meaningful("Image"));
        assert!(!h.alt_is_meaningful("icon"));
        assert!(h.alt_is_meaningful("icon of a house")); // phrase, not the bare word
    }
}
