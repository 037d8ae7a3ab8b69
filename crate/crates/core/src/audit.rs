//! The audit pipeline: load targets (in parallel, bounded workers), extract
//! facts, apply annotation overrides, pool counts across pages, score,
//! roll up, and assemble the report. Pages merge in target order no matter
//! which worker finished first.

use crate::config::AuditConfig;
use crate::facts::{
    extract_page, ExternalCss, ExtractError, PageExtraction, SourceDocument, Warning,
};
use crate::fetch::{load_target, FetchOptions, Target, TargetError};
use crate::metrics::{
    score_alt_text, score_clear_instructions, score_contrast, score_error_support,
    score_input_assistance, score_keyboard, score_localization, score_media_alternatives,
    score_structured_navigation, structured_navigation_page_value, AnnotationSet, AttributeId,
    AttributeScore, NotApplicable, PageNavigation, PooledFacts,
};
use crate::report::{
    attribute_entries, build_report, tree_summary, AuditReport, PageSummary, PerPageReport,
};
use crate::rollup::evaluate_tree;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use thiserror::Error;

pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Error)]
pub enum TargetFailure {
    #[error("{origin}: {source}")]
    Load {
        origin: String,
        #[source]
        source: TargetError,
    },
    #[error("{origin}: {source}")]
    Extract {
        origin: String,
        #[source]
        source: ExtractError,
    },
}

impl TargetFailure {
    pub fn is_input_error(&self) -> bool {
        matches!(self, TargetFailure::Load { source, .. } if source.is_input_error())
    }
}

#[derive(Debug, Error)]
#[error("{} of {total} targets failed", failures.len())]
pub struct AuditRunError {
    pub failures: Vec<TargetFailure>,
    pub total: usize,
}

/// Load and extract every target with a bounded worker pool. Results come
/// back in target order.
pub fn load_and_extract(
    targets: &[Target],
    fetch_options: &FetchOptions,
    config: &AuditConfig,
    workers: usize,
) -> Vec<Result<PageExtraction, TargetFailure>> {
    let workers = workers.max(1).min(targets.len().max(1));
    let cursor = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<PageExtraction, TargetFailure>>>> =
        targets.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = cursor.fetch_add(1, Ordering::Relaxed);
                if index >= targets.len() {
                    break;
                }
                let target = &targets[index];
                let origin = target.origin();
                let result = load_target(target, fetch_options)
                    .map_err(|source| TargetFailure::Load {
                        origin: origin.clone(),
                        source,
                    })
                    .and_then(|loaded| {
                        extract_page(&loaded.document, &config.heuristics, &loaded.external_css)
                            .map_err(|source| TargetFailure::Extract {
                                origin: origin.clone(),
                                source,
                            })
                    });
                *slots[index].lock().unwrap() = Some(result);
            });
        }
    });

    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().unwrap())
        .collect()
}

/// Match an annotation id against a record's reference strings.
fn id_matches(id: &str, reference: &str, id_reference: Option<&str>) -> bool {
    id == reference || id_reference == Some(id)
}

/// Flip inventory flags according to the annotation set. Ids that match no
/// element produce a warning instead of failing the audit.
pub fn apply_annotations(
    pages: &mut [PageExtraction],
    annotations: &AnnotationSet,
) -> Vec<Warning> {
    let mut warnings = Vec::new();

    for id in &annotations.captioned_media {
        let mut matched = false;
        for page in pages.iter_mut() {
            for media in &mut page.media {
                if id_matches(id, &media.reference, media.id_reference.as_deref()) {
                    media.has_alternative = true;
                    matched = true;
                }
            }
        }
        if !matched {
            warnings.push(Warning::UnmatchedOverride { id: id.clone() });
        }
    }

    for id in &annotations.error_support_forms {
        let mut matched = false;
        for page in pages.iter_mut() {
            for form in &mut page.forms {
                if id_matches(id, &form.reference, form.id_reference.as_deref()) {
                    form.error_support = true;
                    matched = true;
                }
            }
        }
        if !matched {
            warnings.push(Warning::UnmatchedOverride { id: id.clone() });
        }
    }

    for (id, &operable) in &annotations.keyboard {
        let mut matched = false;
        for page in pages.iter_mut() {
            for element in &mut page.interactive {
                if id_matches(id, &element.reference, element.id_reference.as_deref()) {
                    element.keyboard_operable = operable;
                    matched = true;
                }
            }
        }
        if !matched {
            warnings.push(Warning::UnmatchedOverride { id: id.clone() });
        }
    }

    warnings
}

/// Score the nine attributes from a pooled view of the site.
pub fn score_attributes(pool: &PooledFacts, config: &AuditConfig) -> Vec<AttributeScore> {
    if pool.pages == 0 {
        return AttributeId::ALL
            .into_iter()
            .map(|id| AttributeScore::not_applicable(id, NotApplicable::NoEvidence))
            .collect();
    }
    let clear = config
        .annotations
        .as_ref()
        .and_then(|a| a.clear_instructions);
    let presence = config.languages.presence(&pool.languages_offered);
    vec![
        score_alt_text(pool),
        score_contrast(&pool.contrast_groups, config.contrast_mode),
        score_media_alternatives(pool),
        score_keyboard(pool),
        score_structured_navigation(pool),
        score_clear_instructions(clear),
        score_input_assistance(pool),
        score_error_support(pool),
        score_localization(&presence, &config.languages.weights, true),
    ]
}

fn pool_pages(pages: &[PageExtraction], config: &AuditConfig) -> (PooledFacts, Vec<PageSummary>) {
    let mut pool = PooledFacts::default();
    let mut summaries = Vec::with_capacity(pages.len());
    for page in pages {
        let facts = page.facts();
        let deep = config.deep_page_override.unwrap_or_else(|| page.is_deep());
        let nav = PageNavigation {
            breadcrumbs_present: facts.breadcrumbs_present,
            skipped_heading_levels: facts.skipped_heading_levels,
            headings_total: facts.headings_total,
            deep,
        };
        summaries.push(PageSummary {
            origin: page.origin.clone(),
            path_depth: page.path_depth,
            deep,
            structured_navigation: structured_navigation_page_value(&nav),
            facts: facts.clone(),
        });
        pool.add(&facts, deep);
    }
    (pool, summaries)
}

/// Evaluate already-extracted pages into a report. Annotation overrides are
/// applied here, so callers pass extractions fresh from `extract_page`.
pub fn audit_extractions(mut pages: Vec<PageExtraction>, config: &AuditConfig) -> AuditReport {
    let mut warnings: Vec<Warning> = pages.iter().flat_map(|p| p.warnings.clone()).collect();
    if let Some(annotations) = &config.annotations {
        warnings.extend(apply_annotations(&mut pages, annotations));
    }

    let (pool, summaries) = pool_pages(&pages, config);
    if pool.pages == 0 {
        warnings.push(Warning::EmptyAudit);
    }
    let scores = score_attributes(&pool, config);
    if pool.pages > 0 {
        for score in &scores {
            if score.not_applicable == Some(NotApplicable::MissingAnnotation) {
                warnings.push(Warning::MissingAnnotation {
                    attribute: score.id.to_string(),
                });
            }
        }
    }

    let tree = evaluate_tree(&scores, &config.weights, &config.scale, &mut warnings)
        .expect("AuditConfig weights are validated at construction");

    let per_page = config.per_page.then(|| {
        pages
            .iter()
            .map(|page| {
                let mut single = PooledFacts::default();
                let deep = config.deep_page_override.unwrap_or_else(|| page.is_deep());
                single.add(&page.facts(), deep);
                let scores = score_attributes(&single, config);
                let mut page_warnings = Vec::new();
                let tree =
                    evaluate_tree(&scores, &config.weights, &config.scale, &mut page_warnings)
                        .expect("AuditConfig weights are validated at construction");
                PerPageReport {
                    origin: page.origin.clone(),
                    attributes: attribute_entries(&tree, &config.weights),
                    tree: tree_summary(&tree, &config.weights),
                    level: tree.level,
                }
            })
            .collect()
    });

    build_report(
        &tree,
        &config.weights,
        &config.scale,
        summaries,
        warnings,
        per_page,
    )
}

/// Audit in-memory documents. The main library entry for embedders.
pub fn audit_documents(
    documents: &[(SourceDocument, ExternalCss)],
    config: &AuditConfig,
) -> Result<AuditReport, AuditRunError> {
    let mut pages = Vec::with_capacity(documents.len());
    let mut failures = Vec::new();
    for (document, css) in documents {
        match extract_page(document, &config.heuristics, css) {
            Ok(page) => pages.push(page),
            Err(source) => failures.push(TargetFailure::Extract {
                origin: document.origin.clone(),
                source,
            }),
        }
    }
    if !failures.is_empty() {
        return Err(AuditRunError {
            failures,
            total: documents.len(),
        });
    }
    Ok(audit_extractions(pages, config))
}

/// Full pipeline: load, extract, pool, score, report.
pub fn run_audit(
    targets: &[Target],
    config: &AuditConfig,
    fetch_options: &FetchOptions,
    workers: usize,
) -> Result<AuditReport, AuditRunError> {
    let results = load_and_extract(targets, fetch_options, config, workers);
    let mut pages = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(page) => pages.push(page),
            Err(failure) => failures.push(failure),
        }
    }
    if !failures.is_empty() {
        return Err(AuditRunError {
            failures,
            total: targets.len(),
        });
    }
    Ok(audit_extractions(pages, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::HeuristicConfig;

    fn extract(origin: &str, html: &str) -> PageExtraction {
        let doc = SourceDocument::new(origin, html.as_bytes().to_vec(), 0);
        extract_page(&doc, &HeuristicConfig::default(), &ExternalCss::none()).unwrap()
    }

    #[test]
    fn empty_audit_reports_single_warning() {
        let report = audit_extractions(Vec::new(), &AuditConfig::default());
        assert_eq!(report.warnings, vec![Warning::EmptyAudit]);
        assert!(report.attributes.iter().all(|a| !a.applicable));
        assert_eq!(report.tree.subcharacteristic, None);
        assert_eq!(report.level, None);
    }

    #[test]
    fn deep_page_rule_and_override() {
        // One heading, no breadcrumbs: shallow scores 1.0, deep halves it.
        let html = "<body><h1>t</h1></body>";
        let shallow = audit_extractions(vec![extract("p.html", html)], &AuditConfig::default());
        assert!(!shallow.pages[0].deep);
        assert_eq!(shallow.pages[0].structured_navigation, 1.0);

        let config = AuditConfig {
            deep_page_override: Some(true),
            ..AuditConfig::default()
        };
        let forced = audit_extractions(vec![extract("p.html", html)], &config);
        assert!(forced.pages[0].deep);
        assert_eq!(forced.pages[0].structured_navigation, 0.5);

        // Path depth >= 2 triggers the deep rule without breadcrumbs.
        let doc = SourceDocument::new("deep.html", html.as_bytes().to_vec(), 2);
        let page = extract_page(&doc, &HeuristicConfig::default(), &ExternalCss::none()).unwrap();
        let by_depth = audit_extractions(vec![page], &AuditConfig::default());
        assert!(by_depth.pages[0].deep);
    }

    #[test]
    fn annotation_overrides_by_position_and_id() {
        let mut pages = vec![extract(
            "p.html",
            concat!(
                r#"<body><video id="promo"></video><video></video>"#,
                r#"<form></form>"#,
                r#"<div onclick="x()" id="widget">w</div></body>"#
            ),
        )];
        let annotations: AnnotationSet = serde_json::from_str(
            r##"{
                "captioned_media": ["#promo", "p.html::media[1]"],
                "error_support_forms": ["p.html::form[0]"],
                "keyboard": {"#widget": true, "#ghost": false}
            }"##,
        )
        .unwrap();
        let warnings = apply_annotations(&mut pages, &annotations);
        assert!(pages[0].media.iter().all(|m| m.has_alternative));
        assert!(pages[0].forms[0].error_support);
        assert!(pages[0].interactive[0].keyboard_operable);
        assert_eq!(
            warnings,
            vec![Warning::UnmatchedOverride {
                id: "#ghost".to_string()
            }]
        );
    }

    #[test]
    fn pooling_across_pages() {
        let pages = vec![
            extract(
                "a.html",
                r#"<body><img src="x.png" alt="Town hall"><img src="y.png"></body>"#,
            ),
            extract("b.html", r#"<body><img src="z.png"></body>"#),
        ];
        let report = audit_extractions(pages, &AuditConfig::default());
        let alt = report
            .attributes
            .iter()
            .find(|a| a.id == AttributeId::AltText)
            .unwrap();
        assert_eq!(alt.numerator, 1.0);
        assert_eq!(alt.denominator, 3.0);
    }

    #[test]
    fn parallel_load_preserves_target_order() {
        let dir = std::env::temp_dir().join(format!("a11ymeter-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut targets = Vec::new();
        for i in 0..8 {
            let path = dir.join(format!("page{i}.html"));
            std::fs::write(&path, format!("<body><h1>Page {i}</h1></body>")).unwrap();
            targets.push(Target::File(path));
        }
        let results = load_and_extract(
            &targets,
            &FetchOptions::default(),
            &AuditConfig::default(),
            4,
        );
        for (i, result) in results.iter().enumerate() {
            let page = result.as_ref().unwrap();
            assert!(page.origin.ends_with(&format!("page{i}.html")));
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn missing_annotation_warned_once() {
        let pages = vec![extract("p.html", "<body><p>text</p></body>")];
        let report = audit_extractions(pages, &AuditConfig::default());
        let count = report
            .warnings
            .iter()
            .filter(|w| matches!(w, Warning::MissingAnnotation { .. }))
            .count();
        assert_eq!(count, 1);
    }
}
