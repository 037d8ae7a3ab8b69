//! Static web-accessibility auditing.
//!
//! a11ymeter measures a set of accessibility attributes on HTML pages by
//! static analysis (alternative text coverage, WCAG contrast compliance,
//! keyboard operability, navigation structure, input assistance, error
//! messaging, localization), aggregates them through a weighted quality
//! hierarchy, classifies the overall score on a five-band scale, and emits
//! a report with per-attribute evidence and improvement recommendations.
//!
//! The typical flow:
//!
//! ```
//! use a11ymeter::audit::audit_documents;
//! use a11ymeter::config::AuditConfig;
//! use a11ymeter::facts::{ExternalCss, SourceDocument};
//!
//! let page = SourceDocument::new(
//!     "home.html",
//!     b"<html lang=\"uk\"><body><h1>Title</h1><p>Hello</p></body></html>".to_vec(),
//!     0,
//! );
//! let report = audit_documents(&[(page, ExternalCss::none())], &AuditConfig::default())
//!     .expect("page parses");
//! assert_eq!(report.pages.len(), 1);
//! ```

pub mod audit;
pub mod color;
pub mod config;
pub mod facts;
pub mod fetch;
pub mod metrics;
pub mod report;
pub mod rollup;

pub use audit::{audit_documents, run_audit};
pub use config::AuditConfig;
pub use facts::{parse_document, HeuristicConfig, PageFacts, SourceDocument};
pub use metrics::{contrast_ratio, relative_luminance, AttributeId, AttributeScore};
pub use report::{recommend, render_report, AuditReport, ReportFormat};
pub use rollup::{classify, evaluate_tree, LevelLabel, QualityTree, Scale, WeightSet};
