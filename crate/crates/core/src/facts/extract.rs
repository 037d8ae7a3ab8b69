//! DOM walk that builds the element inventory behind [`PageFacts`].

use crate::facts::style::contrast_groups_from_dom;
use crate::facts::{
    ExternalCss, ExtractError, FieldRecord, FormRecord, HeuristicConfig, ImageRecord,
    InteractiveRecord, MediaRecord, PageExtraction, SourceDocument, Warning,
};
use ego_tree::NodeRef;
use scraper::node::{Element, Node};
use scraper::Html;
use std::collections::{BTreeSet, HashMap};

/// Extract the full per-page inventory. Pure: same bytes, same heuristics,
/// same pre-fetched CSS give an identical result.
pub fn extract_page(
    doc: &SourceDocument,
    heuristics: &HeuristicConfig,
    external: &ExternalCss,
) -> Result<PageExtraction, ExtractError> {
    if doc.raw.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(ExtractError::EmptyDocument);
    }
    let text = String::from_utf8_lossy(&doc.raw);
    let lossy = matches!(text, std::borrow::Cow::Owned(_));
    if !text.contains('<') {
        return Err(ExtractError::MalformedDocument(
            "no markup found".to_string(),
        ));
    }

    let html = Html::parse_document(&text);
    let mut warnings = Vec::new();
    if lossy {
        warnings.push(Warning::LossyDecode {
            origin: doc.origin.clone(),
        });
    }

    let ids = id_index(&html);
    let mut page = PageExtraction {
        origin: doc.origin.clone(),
        path_depth: doc.path_depth,
        images: Vec::new(),
        media: Vec::new(),
        interactive: Vec::new(),
        forms: Vec::new(),
        fields: Vec::new(),
        contrast_groups: Vec::new(),
        breadcrumbs_present: false,
        heading_levels: Vec::new(),
        languages: BTreeSet::new(),
        warnings: Vec::new(),
    };

    for node in html.tree.root().descendants() {
        let Node::Element(element) = node.value() else {
            continue;
        };
        match element.name() {
            "img" => collect_img(&mut page, &doc.origin, element, heuristics),
            "svg" => collect_svg(&mut page, &doc.origin, node, element, heuristics),
            "video" | "audio" => collect_media(&mut page, &doc.origin, node, element),
            "form" => collect_form(&mut page, &doc.origin, node, element),
            "html" => {
                if let Some(tag) = normalize_lang(element.attr("lang")) {
                    page.languages.insert(tag);
                }
            }
            "link" | "a" => {
                if let Some(tag) = normalize_lang(element.attr("hreflang")) {
                    page.languages.insert(tag);
                }
            }
            _ => {}
        }
        if let Some(level) = heading_level(element.name()) {
            page.heading_levels.push(level);
        }
        if let Some(keyboard_operable) = classify_interactive(element) {
            let n = page.interactive.len();
            page.interactive.push(InteractiveRecord {
                reference: format!("{}::interactive[{n}]", doc.origin),
                id_reference: element.id().map(|id| format!("#{id}")),
                element: describe_interactive(element),
                keyboard_operable,
            });
        }
        if let Some(field) = classify_field(&doc.origin, page.fields.len(), node, element, &ids) {
            page.fields.push(field);
        }
        if !page.breadcrumbs_present && is_breadcrumb_marker(node, element, heuristics, &ids) {
            page.breadcrumbs_present = true;
        }
    }

    page.contrast_groups =
        contrast_groups_from_dom(&html, heuristics, external, &doc.origin, &mut warnings);
    page.warnings = warnings;
    Ok(page)
}

fn id_index(html: &Html) -> HashMap<String, ego_tree::NodeId> {
    let mut map = HashMap::new();
    for node in html.tree.root().descendants() {
        if let Node::Element(element) = node.value() {
            if let Some(id) = element.id() {
                map.entry(id.to_string()).or_insert(node.id());
            }
        }
    }
    map
}

fn heading_level(tag: &str) -> Option<u8> {
    match tag {
        "h1" => Some(1),
        "h2" => Some(2),
        "h3" => Some(3),
        "h4" => Some(4),
        "h5" => Some(5),
        "h6" => Some(6),
        _ => None,
    }
}

fn attr_true(element: &Element, name: &str) -> bool {
    element
        .attr(name)
        .is_some_and(|v| v.trim().eq_ignore_ascii_case("true"))
}

fn role_tokens(element: &Element) -> Vec<String> {
    element
        .attr("role")
        .unwrap_or_default()
        .split_ascii_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect()
}

fn descendant_text(node: NodeRef<'_, Node>) -> String {
    node.descendants()
        .filter_map(|n| match n.value() {
            Node::Text(t) => Some(t.to_string()),
            _ => None,
        })
        .collect()
}

fn normalize_lang(attr: Option<&str>) -> Option<String> {
    let tag = attr?.trim();
    if tag.is_empty() {
        return None;
    }
    let primary = tag.split(['-', '_']).next().unwrap_or(tag);
    Some(primary.to_ascii_lowercase())
}

fn collect_img(
    page: &mut PageExtraction,
    origin: &str,
    element: &Element,
    heuristics: &HeuristicConfig,
) {
    let alt = element.attr("alt");
    let roles = role_tokens(element);
    let marked = roles.iter().any(|r| r == "presentation" || r == "none")
        || attr_true(element, "aria-hidden");
    let decorative = alt == Some("") && marked;
    let n = page.images.len();
    page.images.push(ImageRecord {
        reference: format!("{origin}::img[{n}]"),
        id_reference: element.id().map(|id| format!("#{id}")),
        alt: alt.map(str::to_string),
        decorative,
        meaningful_alt: !decorative && alt.is_some_and(|a| heuristics.alt_is_meaningful(a)),
    });
}

/// Inline `<svg role="img">` counts like an image; its text alternative is
/// the aria-label or the `<title>` child.
fn collect_svg(
    page: &mut PageExtraction,
    origin: &str,
    node: NodeRef<'_, Node>,
    element: &Element,
    heuristics: &HeuristicConfig,
) {
    if !role_tokens(element).iter().any(|r| r == "img") {
        return;
    }
    let label: Option<String> = element.attr("aria-label").map(str::to_string).or_else(|| {
        node.children().find_map(|c| match c.value() {
            Node::Element(e) if e.name() == "title" => Some(descendant_text(c)),
            _ => None,
        })
    });
    let decorative = attr_true(element, "aria-hidden");
    let n = page.images.len();
    page.images.push(ImageRecord {
        reference: format!("{origin}::img[{n}]"),
        id_reference: element.id().map(|id| format!("#{id}")),
        alt: label.clone(),
        decorative,
        meaningful_alt: !decorative
            && label
                .as_deref()
                .is_some_and(|a| heuristics.alt_is_meaningful(a)),
    });
}

fn collect_media(
    page: &mut PageExtraction,
    origin: &str,
    node: NodeRef<'_, Node>,
    element: &Element,
) {
    // <track> without a kind attribute defaults to subtitles.
    let has_alternative = node.children().any(|c| match c.value() {
        Node::Element(e) if e.name() == "track" => {
            let kind = e
                .attr("kind")
                .unwrap_or("subtitles")
                .trim()
                .to_ascii_lowercase();
            matches!(kind.as_str(), "subtitles" | "captions" | "descriptions")
        }
        _ => false,
    });
    let n = page.media.len();
    page.media.push(MediaRecord {
        reference: format!("{origin}::media[{n}]"),
        id_reference: element.id().map(|id| format!("#{id}")),
        kind: element.name().to_string(),
        has_alternative,
    });
}

fn collect_form(
    page: &mut PageExtraction,
    origin: &str,
    node: NodeRef<'_, Node>,
    element: &Element,
) {
    let error_support = node.descendants().any(|n| match n.value() {
        Node::Element(e) => {
            role_tokens(e).iter().any(|r| r == "alert")
                || e.attr("aria-live")
                    .is_some_and(|v| !v.trim().eq_ignore_ascii_case("off"))
                || e.attr("aria-invalid").is_some()
                || e.attr("aria-errormessage").is_some()
        }
        _ => false,
    });
    let n = page.forms.len();
    page.forms.push(FormRecord {
        reference: format!("{origin}::form[{n}]"),
        id_reference: element.id().map(|id| format!("#{id}")),
        error_support,
    });
}

fn tabindex(element: &Element) -> Option<i32> {
    element.attr("tabindex").and_then(|v| v.trim().parse().ok())
}

fn is_native_control(element: &Element) -> bool {
    match element.name() {
        "a" => element.attr("href").is_some(),
        "button" | "select" | "textarea" | "summary" => true,
        "input" => !element
            .attr("type")
            .is_some_and(|t| t.eq_ignore_ascii_case("hidden")),
        _ => false,
    }
}

/// Interactive classification: Some(true) = counted and keyboard-operable,
/// Some(false) = counted but broken for keyboard users, None = not an
/// interactive element.
fn classify_interactive(element: &Element) -> Option<bool> {
    let tab = tabindex(element);
    if is_native_control(element) {
        // A native control opted out of the tab order is still interactive.
        return Some(!tab.is_some_and(|t| t < 0));
    }
    if tab.is_some_and(|t| t >= 0) {
        return Some(true);
    }
    let scripted = element.attr("onclick").is_some()
        || role_tokens(element)
            .iter()
            .any(|r| r == "button" || r == "link");
    if scripted {
        return Some(false);
    }
    None
}

fn describe_interactive(element: &Element) -> String {
    let tag = element.name();
    match tag {
        "a" => "a[href]".to_string(),
        "input" => match element.attr("type") {
            Some(t) => format!("input[type={}]", t.to_ascii_lowercase()),
            None => "input".to_string(),
        },
        _ if is_native_control(element) => tag.to_string(),
        _ if tabindex(element).is_some() => format!("{tag}[tabindex]"),
        _ if element.attr("onclick").is_some() => format!("{tag}[onclick]"),
        _ => {
            let role = role_tokens(element).join(" ");
            format!("{tag}[role={role}]")
        }
    }
}

const ASSISTABLE_INPUT_TYPES: [&str; 7] = [
    "text", "email", "tel", "url", "search", "password", "number",
];

fn classify_field(
    origin: &str,
    index: usize,
    node: NodeRef<'_, Node>,
    element: &Element,
    ids: &HashMap<String, ego_tree::NodeId>,
) -> Option<FieldRecord> {
    let eligible = match element.name() {
        "textarea" => true,
        "input" => {
            let ty = element.attr("type").map(|t| t.trim().to_ascii_lowercase());
            match ty {
                None => true, // missing type defaults to text
                Some(t) => ASSISTABLE_INPUT_TYPES.contains(&t.as_str()),
            }
        }
        _ => false,
    };
    if !eligible {
        return None;
    }

    let tree = node.tree();
    let mut assistance = Vec::new();
    if element
        .attr("autocomplete")
        .is_some_and(|v| !v.trim().is_empty() && !v.trim().eq_ignore_ascii_case("off"))
    {
        assistance.push("autocomplete".to_string());
    }
    if element
        .attr("placeholder")
        .is_some_and(|v| !v.trim().is_empty())
    {
        assistance.push("placeholder".to_string());
    }
    if let Some(list) = element.attr("list") {
        let is_datalist = ids
            .get(list.trim())
            .and_then(|&id| tree.get(id))
            .is_some_and(|n| matches!(n.value(), Node::Element(e) if e.name() == "datalist"));
        if is_datalist {
            assistance.push("datalist".to_string());
        }
    }
    if let Some(refs) = element.attr("aria-describedby") {
        let described = refs.split_ascii_whitespace().any(|id| {
            ids.get(id)
                .and_then(|&nid| tree.get(nid))
                .is_some_and(|n| !descendant_text(n).trim().is_empty())
        });
        if described {
            assistance.push("aria-describedby".to_string());
        }
    }
    if element.attr("title").is_some_and(|v| !v.trim().is_empty()) {
        assistance.push("title".to_string());
    }

    Some(FieldRecord {
        reference: format!("{origin}::field[{index}]"),
        id_reference: element.id().map(|id| format!("#{id}")),
        element: describe_interactive(element),
        assisted: !assistance.is_empty(),
        assistance,
    })
}

/// Breadcrumb detection rules, applied per element:
/// 1. a `nav` labelled "breadcrumb" via aria-label or aria-labelledby;
/// 2. any element with a breadcrumb class token;
/// 3. JSON-LD or microdata `BreadcrumbList` structured data.
fn is_breadcrumb_marker(
    node: NodeRef<'_, Node>,
    element: &Element,
    heuristics: &HeuristicConfig,
    ids: &HashMap<String, ego_tree::NodeId>,
) -> bool {
    if element.name() == "nav" {
        let mut label = element.attr("aria-label").unwrap_or_default().to_string();
        if let Some(refs) = element.attr("aria-labelledby") {
            for id in refs.split_ascii_whitespace() {
                if let Some(n) = ids.get(id).and_then(|&nid| node.tree().get(nid)) {
                    label.push(' ');
                    label.push_str(&descendant_text(n));
                }
            }
        }
        if label.to_ascii_lowercase().contains("breadcrumb") {
            return true;
        }
    }
    let class_hit = element.classes().any(|c| {
        heuristics
            .breadcrumb_class_tokens
            .iter()
            .any(|t| t.eq_ignore_ascii_case(c))
    });
    if class_hit {
        return true;
    }
    if element
        .attr("itemtype")
        .is_some_and(|t| t.contains("BreadcrumbList"))
    {
        return true;
    }
    if element.name() == "script"
        && element
            .attr("type")
            .is_some_and(|t| t.eq_ignore_ascii_case("application/ld+json"))
    {
        let text = descendant_text(node);
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
            return json_ld_has_breadcrumb_list(&value);
        }
    }
    false
}

fn json_ld_has_breadcrumb_list(value: &serde_json::Value) -> bool {
    match value {
        serde_json::Value::Object(map) => {
            if let Some(ty) = map.get("@type") {
                let hit = match ty {
                    serde_json::Value::String(s) => s == "BreadcrumbList",
                    serde_json::Value::Array(a) => {
                        a.iter().any(|v| v.as_str() == Some("BreadcrumbList"))
                    }
                    _ => false,
                };
                if hit {
                    return true;
                }
            }
            map.values().any(json_ld_has_breadcrumb_list)
        }
        serde_json::Value::Array(items) => items.iter().any(json_ld_has_breadcrumb_list),
        _ => false,
    }
}
