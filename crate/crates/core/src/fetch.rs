//! Target loading: local files and HTTP(S) URLs. URL fetches use a fixed
//! user agent, a 30-second timeout, and follow at most 5 redirects; no
//! script is ever executed. Same-origin stylesheets referenced by a fetched
//! page are downloaded too so the style resolver can use them.

use crate::facts::{ExternalCss, SourceDocument};
use scraper::{Html, Selector};
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Duration;
use thiserror::Error;
use url::Url;

pub const USER_AGENT: &str = concat!("a11ymeter/", env!("CARGO_PKG_VERSION"));
pub const FETCH_TIMEOUT: Duration = Duration::from_secs(30);
pub const MAX_REDIRECTS: u32 = 5;

#[derive(Debug, Error)]
pub enum TargetError {
    /// Input problems the user can fix before any network or parse work.
    #[error("no such file: {0}")]
    MissingFile(PathBuf),
    #[error("invalid URL {url}: {reason}")]
    InvalidUrl { url: String, reason: String },
    /// Failures while reading or fetching.
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("fetch of {url} failed: {reason}")]
    Fetch { url: String, reason: String },
}

impl TargetError {
    /// True for errors that are usage problems rather than runtime failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            TargetError::MissingFile(_) | TargetError::InvalidUrl { .. }
        )
    }
}

/// One thing to audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    File(PathBuf),
    Url(Url),
}

impl Target {
    /// Strings starting with `http://` or `https://` are URLs; everything
    /// else is a file path.
    pub fn parse(spec: &str) -> Result<Target, TargetError> {
        if spec.starts_with("http://") || spec.starts_with("https://") {
            let url = Url::parse(spec).map_err(|e| TargetError::InvalidUrl {
                url: spec.to_string(),
                reason: e.to_string(),
            })?;
            Ok(Target::Url(url))
        } else {
            Ok(Target::File(PathBuf::from(spec)))
        }
    }

    pub fn origin(&self) -> String {
        match self {
            Target::File(path) => path.display().to_string(),
            Target::Url(url) => url.to_string(),
        }
    }

    /// Verify a file target exists. Called up front so missing inputs fail
    /// fast as usage errors.
    pub fn check_exists(&self) -> Result<(), TargetError> {
        if let Target::File(path) = self {
            if !path.exists() {
                return Err(TargetError::MissingFile(path.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FetchOptions {
    /// Overrides the path depth of file targets (URLs derive theirs).
    pub path_depth_override: Option<u32>,
    /// Fetch same-origin stylesheets referenced by URL targets.
    pub fetch_css: bool,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            path_depth_override: None,
            fetch_css: true,
        }
    }
}

/// A loaded document together with any stylesheets fetched for it.
#[derive(Debug, Clone)]
pub struct LoadedTarget {
    pub document: SourceDocument,
    pub external_css: ExternalCss,
}

static AGENT: LazyLock<ureq::Agent> = LazyLock::new(|| {
    ureq::AgentBuilder::new()
        .timeout(FETCH_TIMEOUT)
        .redirects(MAX_REDIRECTS)
        .user_agent(USER_AGENT)
        .build()
});

/// Number of non-empty path segments in a URL.
fn url_path_depth(url: &Url) -> u32 {
    url.path_segments()
        .map(|segments| segments.filter(|s| !s.is_empty()).count() as u32)
        .unwrap_or(0)
}

fn same_origin(a: &Url, b: &Url) -> bool {
    a.scheme() == b.scheme()
        && a.host() == b.host()
        && a.port_or_known_default() == b.port_or_known_default()
}

fn http_get(url: &Url) -> Result<Vec<u8>, TargetError> {
    let response = AGENT
        .request_url("GET", url)
        .call()
        .map_err(|e| TargetError::Fetch {
            url: url.to_string(),
            reason: e.to_string(),
        })?;
    let mut body = Vec::new();
    response
        .into_reader()
        .read_to_end(&mut body)
        .map_err(|e| TargetError::Fetch {
            url: url.to_string(),
            reason: e.to_string(),
        })?;
    Ok(body)
}

/// Hrefs of stylesheets the page links to, in document order.
fn stylesheet_hrefs(html_text: &str) -> Vec<String> {
    static LINK: LazyLock<Selector> = LazyLock::new(|| Selector::parse("link[href]").unwrap());
    let html = Html::parse_document(html_text);
    html.select(&LINK)
        .filter(|link| {
            link.value()
                .attr("rel")
                .unwrap_or_default()
                .split_ascii_whitespace()
                .any(|t| t.eq_ignore_ascii_case("stylesheet"))
        })
        .filter_map(|link| link.value().attr("href").map(str::to_string))
        .collect()
}

/// Load one target. Files read from disk; URLs are fetched, and for URL
/// targets the same-origin stylesheets they reference are fetched as well
/// (cross-origin sheets are left unresolved and flagged during extraction).
pub fn load_target(target: &Target, options: &FetchOptions) -> Result<LoadedTarget, TargetError> {
    match target {
        Target::File(path) => {
            if !path.exists() {
                return Err(TargetError::MissingFile(path.clone()));
            }
            let raw = std::fs::read(path).map_err(|source| TargetError::Io {
                path: path.clone(),
                source,
            })?;
            let depth = options.path_depth_override.unwrap_or(0);
            let external_css = load_sibling_css(path, &String::from_utf8_lossy(&raw));
            Ok(LoadedTarget {
                document: SourceDocument::new(path.display().to_string(), raw, depth),
                external_css,
            })
        }
        Target::Url(url) => {
            let raw = http_get(url)?;
            let mut external_css = ExternalCss::none();
            if options.fetch_css {
                let text = String::from_utf8_lossy(&raw);
                for href in stylesheet_hrefs(&text) {
                    let Ok(resolved) = url.join(&href) else {
                        continue;
                    };
                    if !same_origin(url, &resolved) {
                        continue;
                    }
                    if let Ok(css) = http_get(&resolved) {
                        external_css.insert(href, String::from_utf8_lossy(&css).into_owned());
                    }
                }
            }
            let depth = options
                .path_depth_override
                .unwrap_or_else(|| url_path_depth(url));
            Ok(LoadedTarget {
                document: SourceDocument::new(url.to_string(), raw, depth),
                external_css,
            })
        }
    }
}

/// For file targets, resolve stylesheet links against the file's directory
/// so local fixture suites can carry their own CSS.
fn load_sibling_css(path: &Path, text: &str) -> ExternalCss {
    let mut external = ExternalCss::none();
    let Some(dir) = path.parent() else {
        return external;
    };
    for href in stylesheet_hrefs(text) {
        if href.contains("://") || href.starts_with('/') {
            continue; // not a sibling file; left unresolved and flagged
        }
        let candidate = dir.join(&href);
        if let Ok(css) = std::fs::read_to_string(&candidate) {
            external.insert(href, css);
        }
    }
    external
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_parsing() {
        assert!(matches!(
            Target::parse("page.html").unwrap(),
            Target::File(_)
        ));
        assert!(matches!(
            Target::parse("https://example.com/a").unwrap(),
            Target::Url(_)
        ));
        assert!(Target::parse("http://[notaurl").is_err());
    }

    #[test]
    fn path_depth_counts_segments() {
        let depth = |u: &str| url_path_depth(&Url::parse(u).unwrap());
        assert_eq!(depth("https://example.com/"), 0);
        assert_eq!(depth("https://example.com/about"), 1);
        assert_eq!(depth("https://example.com/a/b/page.html"), 3);
        assert_eq!(depth("https://example.com/a//b/"), 2);
    }

    #[test]
    fn missing_file_is_input_error() {
        let err = load_target(
            &Target::File(PathBuf::from("/definitely/not/here.html")),
            &FetchOptions::default(),
        )
        .unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn origin_checks() {
        let a = Url::parse("https://example.com/x").unwrap();
        let b = Url::parse("https://example.com:443/y").unwrap();
        let c = Url::parse("https://other.com/x").unwrap();
        let d = Url::parse("http://example.com/x").unwrap();
        assert!(same_origin(&a, &b));
        assert!(!same_origin(&a, &c));
        assert!(!same_origin(&a, &d));
    }

    #[test]
    fn stylesheet_href_scan() {
        let html = r#"<head>
            <link rel="stylesheet" href="a.css">
            <link rel="icon" href="favicon.ico">
            <link rel=" STYLESHEET " href="b.css">
        </head>"#;
        assert_eq!(
            stylesheet_hrefs(html),
            vec!["a.css".to_string(), "b.css".to_string()]
        );
    }
}
