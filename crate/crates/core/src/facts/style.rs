//! Minimal style resolution for contrast analysis.
//!
//! Full CSS is out of scope for a static auditor. The subset implemented
//! here is: user-agent defaults (black on white, browser heading sizes),
//! color inheritance, `<style>` blocks and pre-fetched external sheets
//! restricted to tag/class/id selectors without combinators, and inline
//! `style` attributes. Unsupported selectors and properties are ignored;
//! external sheets that were not fetched are flagged in the report.

use crate::color::{Rgb, Rgba};
use crate::facts::{
    ContrastGroup, ExternalCss, ExtractError, HeuristicConfig, SourceDocument, Warning,
};
use ego_tree::NodeRef;
use scraper::node::{Element, Node};
use scraper::Html;
use std::collections::BTreeMap;

const ROOT_FONT_PX: f64 = 16.0;
const BOLD_WEIGHT: u16 = 600;

#[derive(Debug, Clone, Copy, PartialEq)]
enum FontSize {
    Px(f64),
    /// Relative to the parent's computed size.
    Em(f64),
    /// Relative to the root size.
    Rem(f64),
    Percent(f64),
}

impl FontSize {
    fn resolve(self, parent_px: f64) -> f64 {
        match self {
            FontSize::Px(v) => v,
            FontSize::Em(f) => f * parent_px,
            FontSize::Rem(f) => f * ROOT_FONT_PX,
            FontSize::Percent(p) => p / 100.0 * parent_px,
        }
    }

    fn parse(value: &str) -> Option<FontSize> {
        let v = value.trim().to_ascii_lowercase();
        if let Some(px) = v.strip_suffix("px") {
            return px.trim().parse().ok().map(FontSize::Px);
        }
        if let Some(pt) = v.strip_suffix("pt") {
            return pt
                .trim()
                .parse::<f64>()
                .ok()
                .map(|p| FontSize::Px(p * 4.0 / 3.0));
        }
        if let Some(rem) = v.strip_suffix("rem") {
            return rem.trim().parse().ok().map(FontSize::Rem);
        }
        if let Some(em) = v.strip_suffix("em") {
            return em.trim().parse().ok().map(FontSize::Em);
        }
        if let Some(pct) = v.strip_suffix('%') {
            return pct.trim().parse().ok().map(FontSize::Percent);
        }
        let keyword_px = match v.as_str() {
            "xx-small" => 9.0,
            "x-small" => 10.0,
            "small" => 13.0,
            "medium" => 16.0,
            "large" => 18.0,
            "x-large" => 24.0,
            "xx-large" => 32.0,
            _ => return None,
        };
        Some(FontSize::Px(keyword_px))
    }
}

fn parse_font_weight(value: &str) -> Option<u16> {
    let v = value.trim().to_ascii_lowercase();
    match v.as_str() {
        "normal" => Some(400),
        "bold" | "bolder" => Some(700),
        "lighter" => Some(400),
        _ => v
            .parse::<f64>()
            .ok()
            .filter(|w| (1.0..=1000.0).contains(w))
            .map(|w| w as u16),
    }
}

/// The declarations this resolver understands.
#[derive(Debug, Clone, Default, PartialEq)]
struct Declarations {
    color: Option<Rgba>,
    background: Option<Rgba>,
    font_size: Option<FontSize>,
    font_weight: Option<u16>,
    display_none: bool,
    visibility_hidden: bool,
}

impl Declarations {
    fn merge_from(&mut self, other: &Declarations) {
        if other.color.is_some() {
            self.color = other.color;
        }
        if other.background.is_some() {
            self.background = other.background;
        }
        if other.font_size.is_some() {
            self.font_size = other.font_size;
        }
        if other.font_weight.is_some() {
            self.font_weight = other.font_weight;
        }
        self.display_none |= other.display_none;
        self.visibility_hidden |= other.visibility_hidden;
    }

    fn parse(text: &str) -> Declarations {
        let mut out = Declarations::default();
        for decl in text.split(';') {
            let Some((prop, value)) = decl.split_once(':') else {
                continue;
            };
            let prop = prop.trim().to_ascii_lowercase();
            let value = value.trim();
            match prop.as_str() {
                "color" => out.color = Rgba::parse(value).or(out.color),
                "background-color" => out.background = Rgba::parse(value).or(out.background),
                "background" => {
                    // Shorthand: take the first token that parses as a color.
                    let color = value.split_whitespace().find_map(Rgba::parse);
                    out.background = color.or(out.background);
                }
                "font-size" => out.font_size = FontSize::parse(value).or(out.font_size),
                "font-weight" => out.font_weight = parse_font_weight(value).or(out.font_weight),
                "display" => out.display_none |= value.eq_ignore_ascii_case("none"),
                "visibility" => out.visibility_hidden |= value.eq_ignore_ascii_case("hidden"),
                _ => {}
            }
        }
        out
    }
}

/// A compound selector without combinators: `tag`, `.class`, `#id`, or any
/// combination like `p.note#x`.
#[derive(Debug, Clone, PartialEq)]
struct SimpleSelector {
    tag: Option<String>,
    id: Option<String>,
    classes: Vec<String>,
}

impl SimpleSelector {
    /// Returns None for selectors outside the supported subset.
    fn parse(text: &str) -> Option<SimpleSelector> {
        let t = text.trim();
        if t.is_empty() || t.chars().any(|c| " \t\n>+~:[()".contains(c)) {
            return None;
        }
        let mut sel = SimpleSelector {
            tag: None,
            id: None,
            classes: Vec::new(),
        };
        let mut rest = t;
        if !rest.starts_with(['.', '#']) {
            let end = rest.find(['.', '#']).unwrap_or(rest.len());
            let tag = &rest[..end];
            if tag != "*" {
                if !tag
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
                {
                    return None;
                }
                sel.tag = Some(tag.to_ascii_lowercase());
            }
            rest = &rest[end..];
        }
        while !rest.is_empty() {
            let marker = rest.chars().next().unwrap();
            rest = &rest[1..];
            let end = rest.find(['.', '#']).unwrap_or(rest.len());
            let name = &rest[..end];
            if name.is_empty() {
                return None;
            }
            match marker {
                '.' => sel.classes.push(name.to_string()),
                '#' => sel.id = Some(name.to_string()),
                _ => return None,
            }
            rest = &rest[end..];
        }
        Some(sel)
    }

    fn specificity(&self) -> (u16, u16, u16) {
        (
            self.id.is_some() as u16,
            self.classes.len() as u16,
            self.tag.is_some() as u16,
        )
    }

    fn matches(&self, element: &Element) -> bool {
        if let Some(tag) = &self.tag {
            if !element.name().eq_ignore_ascii_case(tag) {
                return false;
            }
        }
        if let Some(id) = &self.id {
            if element.id() != Some(id.as_str()) {
                return false;
            }
        }
        self.classes
            .iter()
            .all(|c| element.classes().any(|ec| ec == c))
    }
}

#[derive(Debug)]
struct Rule {
    selector: SimpleSelector,
    specificity: (u16, u16, u16),
    order: u32,
    declarations: Declarations,
}

#[derive(Debug, Default)]
pub(crate) struct Stylesheet {
    rules: Vec<Rule>,
}

impl Stylesheet {
    fn push_css(&mut self, css: &str) {
        let css = strip_comments(css);
        let mut pos = 0;
        let bytes = css.as_bytes();
        while pos < css.len() {
            let Some(open_rel) = css[pos..].find('{') else {
                break;
            };
            let open = pos + open_rel;
            let selector_text = css[pos..open].trim();
            if selector_text.starts_with('@') {
                // Skip the whole at-rule block, including nested braces.
                let mut depth = 0usize;
                let mut i = open;
                while i < css.len() {
                    match bytes[i] {
                        b'{' => depth += 1,
                        b'}' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                pos = (i + 1).min(css.len());
                continue;
            }
            let Some(close_rel) = css[open..].find('}') else {
                break;
            };
            let close = open + close_rel;
            let declarations = Declarations::parse(&css[open + 1..close]);
            for part in selector_text.split(',') {
                if let Some(selector) = SimpleSelector::parse(part) {
                    self.rules.push(Rule {
                        specificity: selector.specificity(),
                        order: self.rules.len() as u32,
                        selector,
                        declarations: declarations.clone(),
                    });
                }
            }
            pos = close + 1;
        }
    }

    /// Cascaded declarations for one element, lowest specificity first,
    /// inline style on top.
    fn declarations_for(&self, element: &Element) -> Declarations {
        let mut matching: Vec<&Rule> = self
            .rules
            .iter()
            .filter(|r| r.selector.matches(element))
            .collect();
        matching.sort_by_key(|r| (r.specificity, r.order));
        let mut out = Declarations::default();
        for rule in matching {
            out.merge_from(&rule.declarations);
        }
        if let Some(inline) = element.attr("style") {
            out.merge_from(&Declarations::parse(inline));
        }
        out
    }
}

fn strip_comments(css: &str) -> String {
    let mut out = String::with_capacity(css.len());
    let mut rest = css;
    while let Some(start) = rest.find("/*") {
        out.push_str(&rest[..start]);
        match rest[start + 2..].find("*/") {
            Some(end) => rest = &rest[start + 2 + end + 2..],
            None => return out,
        }
    }
    out.push_str(rest);
    out
}

/// Collect `<style>` blocks and fetched external sheets in document order.
pub(crate) fn collect_stylesheet(
    html: &Html,
    external: &ExternalCss,
    origin: &str,
    warnings: &mut Vec<Warning>,
) -> Stylesheet {
    let mut sheet = Stylesheet::default();
    for node in html.tree.root().descendants() {
        let Node::Element(element) = node.value() else {
            continue;
        };
        match element.name() {
            "style" => {
                let css: String = node
                    .children()
                    .filter_map(|c| match c.value() {
                        Node::Text(t) => Some(t.to_string()),
                        _ => None,
                    })
                    .collect();
                sheet.push_css(&css);
            }
            "link" => {
                let rel = element.attr("rel").unwrap_or_default();
                let is_stylesheet = rel
                    .split_ascii_whitespace()
                    .any(|t| t.eq_ignore_ascii_case("stylesheet"));
                if !is_stylesheet {
                    continue;
                }
                let Some(href) = element.attr("href") else {
                    continue;
                };
                match external.get(href) {
                    Some(css) => sheet.push_css(css),
                    None => warnings.push(Warning::StylesPartiallyResolved {
                        origin: origin.to_string(),
                        href: href.to_string(),
                    }),
                }
            }
            _ => {}
        }
    }
    sheet
}

#[derive(Debug, Clone, Copy)]
struct Computed {
    color: Rgb,
    /// Effective opaque backdrop behind this element's text.
    background: Rgb,
    font_px: f64,
    weight: u16,
}

impl Computed {
    fn root() -> Computed {
        Computed {
            color: Rgb::BLACK,
            background: Rgb::WHITE,
            font_px: ROOT_FONT_PX,
            weight: 400,
        }
    }
}

/// Browser-default heading sizes, as em factors of the inherited size.
fn ua_font(tag: &str) -> Option<(f64, u16)> {
    match tag {
        "h1" => Some((2.0, 700)),
        "h2" => Some((1.5, 700)),
        "h3" => Some((1.17, 700)),
        "h4" => Some((1.0, 700)),
        "h5" => Some((0.83, 700)),
        "h6" => Some((0.67, 700)),
        "b" | "strong" | "th" => Some((1.0, 700)),
        _ => None,
    }
}

fn skip_subtree(tag: &str) -> bool {
    matches!(tag, "head" | "script" | "style" | "template" | "noscript")
}

fn has_own_text(node: NodeRef<'_, Node>) -> bool {
    node.children().any(|c| match c.value() {
        Node::Text(t) => !t.trim().is_empty(),
        _ => false,
    })
}

fn walk(
    node: NodeRef<'_, Node>,
    inherited: Computed,
    sheet: &Stylesheet,
    heuristics: &HeuristicConfig,
    groups: &mut BTreeMap<(Rgb, Rgb, bool), u32>,
) {
    let element = match node.value() {
        Node::Element(e) => e,
        _ => {
            for child in node.children() {
                walk(child, inherited, sheet, heuristics, groups);
            }
            return;
        }
    };
    let tag = element.name();
    if skip_subtree(tag) || element.attr("hidden").is_some() {
        return;
    }

    let declared = sheet.declarations_for(element);
    if declared.display_none || declared.visibility_hidden {
        return;
    }

    let mut computed = inherited;
    if let Some(bg) = declared.background {
        if bg.a > 0.0 {
            computed.background = bg.over(inherited.background);
        }
        // Fully transparent backgrounds leave the backdrop unchanged.
    }
    if let Some(fg) = declared.color {
        computed.color = fg.over(computed.background);
    }

    let ua = ua_font(tag);
    computed.font_px = match declared.font_size {
        Some(size) => size.resolve(inherited.font_px),
        None => match ua {
            Some((factor, _)) => factor * inherited.font_px,
            None => inherited.font_px,
        },
    };
    computed.weight = declared
        .font_weight
        .or(ua.map(|(_, w)| w))
        .unwrap_or(inherited.weight);

    if has_own_text(node) {
        let large = computed.font_px >= heuristics.large_text_px
            || (computed.font_px >= heuristics.large_text_bold_px
                && computed.weight >= BOLD_WEIGHT);
        let key = (computed.color, computed.background, !large);
        *groups.entry(key).or_insert(0) += 1;
    }

    for child in node.children() {
        walk(child, computed, sheet, heuristics, groups);
    }
}

/// Group every visible text-bearing element by its resolved
/// (foreground, background, main-vs-auxiliary) triple.
pub(crate) fn contrast_groups_from_dom(
    html: &Html,
    heuristics: &HeuristicConfig,
    external: &ExternalCss,
    origin: &str,
    warnings: &mut Vec<Warning>,
) -> Vec<ContrastGroup> {
    let sheet = collect_stylesheet(html, external, origin, warnings);
    let mut groups = BTreeMap::new();
    walk(
        html.tree.root(),
        Computed::root(),
        &sheet,
        heuristics,
        &mut groups,
    );
    groups
        .into_iter()
        .map(
            |((foreground, background, is_main_text), element_count)| ContrastGroup {
                foreground,
                background,
                is_main_text,
                element_count,
            },
        )
        .collect()
}

/// Parse a document and extract its contrast groups. Pages without visible
/// text yield an empty list.
pub fn extract_contrast_groups(
    doc: &SourceDocument,
    heuristics: &HeuristicConfig,
) -> Result<Vec<ContrastGroup>, ExtractError> {
    crate::facts::extract_page(doc, heuristics, &ExternalCss::none())
        .map(|page| page.contrast_groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(html: &str) -> Vec<ContrastGroup> {
        let parsed = Html::parse_document(html);
        let mut warnings = Vec::new();
        contrast_groups_from_dom(
            &parsed,
            &HeuristicConfig::default(),
            &ExternalCss::none(),
            "test",
            &mut warnings,
        )
    }

    #[test]
    fn default_colors_single_group() {
        let html = "<body><p>one</p><p>two</p><p>three</p></body>";
        let g = groups(html);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].foreground, Rgb::BLACK);
        assert_eq!(g[0].background, Rgb::WHITE);
        assert!(g[0].is_main_text);
        assert_eq!(g[0].element_count, 3);
    }

    #[test]
    fn twelve_default_paragraphs() {
        let body: String = (0..12).map(|i| format!("<p>para {i}</p>")).collect();
        let g = groups(&format!("<body>{body}</body>"));
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].element_count, 12);
    }

    #[test]
    fn two_styles_two_groups() {
        let html = r##"<style>.fn { color: #777777; }</style>
            <body><p>body text</p><p class="fn">footnote</p></body>"##;
        let g = groups(html);
        assert_eq!(g.len(), 2);
        let fgs: Vec<Rgb> = g.iter().map(|x| x.foreground).collect();
        assert!(fgs.contains(&Rgb::BLACK));
        assert!(fgs.contains(&Rgb::new(0x77, 0x77, 0x77)));
    }

    #[test]
    fn inline_style_overrides_inherited() {
        // Oracle for the three-node cascade: body sets inherited colors, the
        // span's inline pair wins on the span itself.
        let html = r#"<body style="color:#000;background:#fff">
            <p>inherits</p>
            <p><span style="color:#333;background:#EEE">inline</span></p>
        </body>"#;
        let g = groups(html);
        assert_eq!(g.len(), 2);
        assert!(g.iter().any(|x| x.foreground == Rgb::new(0x33, 0x33, 0x33)
            && x.background == Rgb::new(0xEE, 0xEE, 0xEE)));
    }

    #[test]
    fn alpha_composites_to_opaque() {
        let html = r#"<body><p style="color:rgba(0,0,0,0.5)">dim</p></body>"#;
        let g = groups(html);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].foreground, Rgb::new(128, 128, 128));
    }

    #[test]
    fn large_text_is_auxiliary() {
        let html = r#"<body>
            <p style="font-size:24px">big</p>
            <p style="font-size:18.7px;font-weight:bold">big bold</p>
            <p style="font-size:23px">not quite</p>
        </body>"#;
        let g = groups(html);
        let aux: u32 = g
            .iter()
            .filter(|x| !x.is_main_text)
            .map(|x| x.element_count)
            .sum();
        let main: u32 = g
            .iter()
            .filter(|x| x.is_main_text)
            .map(|x| x.element_count)
            .sum();
        assert_eq!(aux, 2);
        assert_eq!(main, 1);
    }

    #[test]
    fn heading_defaults_are_large() {
        let g = groups("<body><h2>Section</h2><h6>tiny</h6></body>");
        assert!(g.iter().any(|x| !x.is_main_text && x.element_count == 1)); // h2 at 24px
        assert!(g.iter().any(|x| x.is_main_text && x.element_count == 1)); // h6
    }

    #[test]
    fn hidden_text_is_not_counted() {
        let html = r#"<body>
            <p hidden>gone</p>
            <p style="display:none">gone</p>
            <p style="visibility:hidden">gone</p>
            <div style="display:none"><p>nested gone</p></div>
            <p>kept</p>
        </body>"#;
        let g = groups(html);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].element_count, 1);
    }

    #[test]
    fn specificity_and_order() {
        let html = r##"<style>
            /* tag loses to class, class loses to id */
            p { color: red; }
            .note { color: #777777; }
            #special { color: #333333; }
            p { font-size: 10px; }
        </style>
        <body><p class="note">a</p><p class="note" id="special">b</p><p>c</p></body>"##;
        let g = groups(html);
        assert!(g.iter().any(|x| x.foreground == Rgb::new(0x77, 0x77, 0x77)));
        assert!(g.iter().any(|x| x.foreground == Rgb::new(0x33, 0x33, 0x33)));
        assert!(g.iter().any(|x| x.foreground == Rgb::new(0xFF, 0, 0)));
    }

    #[test]
    fn at_rules_and_unsupported_selectors_are_skipped() {
        let html = r##"<style>
            @media print { p { color: red; } }
            p > span { color: red; }
            p:hover { color: red; }
            p { color: #777777; }
        </style>
        <body><p>text</p></body>"##;
        let g = groups(html);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].foreground, Rgb::new(0x77, 0x77, 0x77));
    }

    #[test]
    fn unfetched_external_sheet_flags_warning() {
        let html = r#"<head><link rel="stylesheet" href="site.css"></head><body><p>t</p></body>"#;
        let parsed = Html::parse_document(html);
        let mut warnings = Vec::new();
        let _ = contrast_groups_from_dom(
            &parsed,
            &HeuristicConfig::default(),
            &ExternalCss::none(),
            "page.html",
            &mut warnings,
        );
        assert_eq!(
            warnings,
            vec![Warning::StylesPartiallyResolved {
                origin: "page.html".to_string(),
                href: "site.css".to_string()
            }]
        );
    }

    #[test]
    fn fetched_external_sheet_applies() {
        let html = r#"<head><link rel="stylesheet" href="site.css"></head><body><p>t</p></body>"#;
        let parsed = Html::parse_document(html);
        let mut external = ExternalCss::none();
        external.insert("site.css", "p { color: #777777; }");
        let mut warnings = Vec::new();
        let g = contrast_groups_from_dom(
            &parsed,
            &HeuristicConfig::default(),
            &external,
            "page.html",
            &mut warnings,
        );
        assert!(warnings.is_empty());
        assert_eq!(g[0].foreground, Rgb::new(0x77, 0x77, 0x77));
    }

    #[test]
    fn extract_contrast_groups_from_document() {
        let doc = SourceDocument::new("page.html", b"<body><p>a</p><p>b</p></body>".to_vec(), 0);
        let g = extract_contrast_groups(&doc, &HeuristicConfig::default()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].element_count, 2);
        let empty = SourceDocument::new("bare.html", b"<body></body>".to_vec(), 0);
        assert!(extract_contrast_groups(&empty, &HeuristicConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn font_size_units() {
        assert_eq!(FontSize::parse("12pt"), Some(FontSize::Px(16.0)));
        assert_eq!(FontSize::parse("1.5em"), Some(FontSize::Em(1.5)));
        assert_eq!(FontSize::parse("150%"), Some(FontSize::Percent(150.0)));
        assert_eq!(FontSize::parse("x-large"), Some(FontSize::Px(24.0)));
        assert_eq!(FontSize::parse("banana"), None);
        assert_eq!(FontSize::Em(1.5).resolve(20.0), 30.0);
        assert_eq!(FontSize::Percent(150.0).resolve(16.0), 24.0);
    }
}
