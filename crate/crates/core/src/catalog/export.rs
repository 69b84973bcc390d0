//! Print-and-play sheets rendered as SVG: one grid per card family, a rules
//! page and an HTML index linking them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Catalog, Family, HarmId, HarmKind};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("catalog is not printable: {0}")]
    InvalidCatalog(String),
    #[error("cannot write {path}: {source}")]
    Unwritable { path: PathBuf, source: std::io::Error },
}

/// Deck composition and layout for the printed sheets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleOptions {
    pub harm_copies: u32,
    pub feature_copies: u32,
    pub wild_harm_copies: u32,
    pub wild_feature_copies: u32,
    pub columns: u32,
    pub card_width: u32,
    pub card_height: u32,
}

impl Default for StyleOptions {
    fn default() -> Self {
        StyleOptions {
            harm_copies: 3,
            feature_copies: 2,
            wild_harm_copies: 1,
            wild_feature_copies: 2,
            columns: 4,
            card_width: 240,
            card_height: 336,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheetFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentSet {
    pub files: Vec<SheetFile>,
}

impl DocumentSet {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
        fs::create_dir_all(dir).map_err(|source| ExportError::Unwritable { path: dir.to_path_buf(), source })?;
        let mut written = Vec::with_capacity(self.files.len());
        for file in &self.files {
            let path = dir.join(&file.name);
            fs::write(&path, &file.contents).map_err(|source| ExportError::Unwritable { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}

pub const BUSINESS_SHEET: &str = "businesses.svg";
pub const HARM_SHEET: &str = "harms.svg";
pub const FEATURE_SHEET: &str = "features.svg";
pub const RULES_SHEET: &str = "rules.svg";
pub const INDEX_PAGE: &str = "index.html";

struct CardFace<'a> {
    family: Family,
    kind: u8,
    copy: u32,
    copies: u32,
    title: &'a str,
    badges: Vec<&'a HarmKind>,
}

pub fn export_print_sheets(catalog: &Catalog, style: &StyleOptions) -> Result<DocumentSet, ExportError> {
    catalog.ensure_playable().map_err(|e| ExportError::InvalidCatalog(e.to_string()))?;

    let badges_for = |ids: &std::collections::BTreeSet<HarmId>| -> Vec<&HarmKind> {
        ids.iter().filter_map(|id| catalog.harm(*id).ok()).collect()
    };

    let businesses: Vec<CardFace> = catalog
        .businesses
        .iter()
        .map(|b| CardFace {
            family: Family::Business,
            kind: b.id,
            copy: 1,
            copies: 1,
            title: &b.title,
            badges: badges_for(&b.harms),
        })
        .collect();

    let mut harms = Vec::new();
    for h in &catalog.harms {
        for copy in 1..=style.harm_copies {
            harms.push(CardFace {
                family: Family::Harm,
                kind: h.id,
                copy,
                copies: style.harm_copies,
                title: &h.title,
                badges: vec![h],
            });
        }
    }
    for copy in 1..=style.wild_harm_copies {
        harms.push(CardFace {
            family: Family::Harm,
            kind: 0,
            copy,
            copies: style.wild_harm_copies,
            title: "Wild Harm: describe a harm this business could cause and convince the table",
            badges: Vec::new(),
        });
    }

    let mut features = Vec::new();
    for f in &catalog.features {
        for copy in 1..=style.feature_copies {
            features.push(CardFace {
                family: Family::Feature,
                kind: f.id,
                copy,
                copies: style.feature_copies,
                title: &f.title,
                badges: badges_for(&f.counters),
            });
        }
    }
    for copy in 1..=style.wild_feature_copies {
        features.push(CardFace {
            family: Family::Feature,
            kind: 0,
            copy,
            copies: style.wild_feature_copies,
            title: "Wild Feature: describe how your business removes the harm and convince the table",
            badges: Vec::new(),
        });
    }

    let files = vec![
        SheetFile { name: BUSINESS_SHEET.into(), contents: render_sheet("Business cards", &businesses, style) },
        SheetFile { name: HARM_SHEET.into(), contents: render_sheet("Harm cards", &harms, style) },
        SheetFile { name: FEATURE_SHEET.into(), contents: render_sheet("Feature cards", &features, style) },
        SheetFile { name: RULES_SHEET.into(), contents: render_rules(catalog, style) },
        SheetFile { name: INDEX_PAGE.into(), contents: render_index(catalog, style) },
    ];
    Ok(DocumentSet { files })
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn wrap(text: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = String::new();
    for word in text.split_whitespace() {
        if !line.is_empty() && line.len() + 1 + word.len() > width {
            lines.push(std::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(word);
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines
}

pub fn color_hex(token: &str) -> &str {
    match token {
        "crimson" => "#c0143c",
        "orange" => "#f28c00",
        "gold" => "#e6c200",
        "olive" => "#7a8c00",
        "green" => "#1e9e3a",
        "teal" => "#008080",
        "sky" => "#3fa9f5",
        "navy" => "#1f2a80",
        "violet" => "#8a4fd8",
        "magenta" => "#d6249f",
        "brown" => "#8b4a1c",
        "gray" => "#7f7f7f",
        "black" => "#111111",
        other => other,
    }
}

/// SVG element drawing `shape` centred on (cx, cy) with radius r.
fn shape_element(shape: &str, cx: f64, cy: f64, r: f64, fill: &str) -> String {
    let polygon = |points: Vec<(f64, f64)>| {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{:.1},{:.1}", cx + x * r, cy + y * r)).collect();
        format!(r#"<polygon points="{}" fill="{fill}" stroke="black" stroke-width="1"/>"#, pts.join(" "))
    };
    let regular = |n: usize, rot: f64| {
        (0..n)
            .map(|i| {
                let a = rot + i as f64 * std::f64::consts::TAU / n as f64;
                (a.cos(), a.sin())
            })
            .collect::<Vec<_>>()
    };
    let up = -std::f64::consts::FRAC_PI_2;
    match shape {
        "circle" => format!(r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="{r:.1}" fill="{fill}" stroke="black" stroke-width="1"/>"#),
        "square" => polygon(vec![(-0.8, -0.8), (0.8, -0.8), (0.8, 0.8), (-0.8, 0.8)]),
        "triangle" => polygon(regular(3, up)),
        "diamond" => polygon(vec![(0.0, -1.0), (0.75, 0.0), (0.0, 1.0), (-0.75, 0.0)]),
        "pentagon" => polygon(regular(5, up)),
        "hexagon" => polygon(regular(6, 0.0)),
        "octagon" => polygon(regular(8, std::f64::consts::PI / 8.0)),
        "star" => polygon(
            (0..10)
                .map(|i| {
                    let a = up + i as f64 * std::f64::consts::PI / 5.0;
                    let k = if i % 2 == 0 { 1.0 } else { 0.45 };
                    (k * a.cos(), k * a.sin())
                })
                .collect(),
        ),
        "cross" => polygon(vec![
            (-0.3, -1.0), (0.3, -1.0), (0.3, -0.3), (1.0, -0.3), (1.0, 0.3), (0.3, 0.3),
            (0.3, 1.0), (-0.3, 1.0), (-0.3, 0.3), (-1.0, 0.3), (-1.0, -0.3), (-0.3, -0.3),
        ]),
        "arrow" => polygon(vec![(-1.0, -0.3), (0.1, -0.3), (0.1, -0.8), (1.0, 0.0), (0.1, 0.8), (0.1, 0.3), (-1.0, 0.3)]),
        "trapezoid" => polygon(vec![(-0.5, -0.7), (0.5, -0.7), (1.0, 0.7), (-1.0, 0.7)]),
        "heart" => format!(
            r#"<path d="M {x0:.1} {y0:.1} C {x1:.1} {y1:.1} {x2:.1} {y2:.1} {x0:.1} {y3:.1} C {x4:.1} {y2:.1} {x5:.1} {y1:.1} {x0:.1} {y0:.1} Z" fill="{fill}" stroke="black" stroke-width="1"/>"#,
            x0 = cx,
            y0 = cy - 0.4 * r,
            x1 = cx + 1.1 * r,
            y1 = cy - 1.3 * r,
            x2 = cx + 1.2 * r,
            y2 = cy + 0.2 * r,
            y3 = cy + r,
            x4 = cx - 1.2 * r,
            x5 = cx - 1.1 * r,
        ),
        "crescent" => format!(
            r#"<path d="M {x0:.1} {y0:.1} A {r:.1} {r:.1} 0 1 0 {x0:.1} {y1:.1} A {r2:.1} {r2:.1} 0 1 1 {x0:.1} {y0:.1} Z" fill="{fill}" stroke="black" stroke-width="1"/>"#,
            x0 = cx + 0.3 * r,
            y0 = cy - 0.95 * r,
            y1 = cy + 0.95 * r,
            r2 = 0.75 * r,
        ),
        // Unknown shapes from custom catalogs fall back to a labelled circle.
        other => format!(
            r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="{r:.1}" fill="{fill}" stroke="black" stroke-width="1"/><text x="{cx:.1}" y="{ty:.1}" font-size="6" text-anchor="middle">{}</text>"#,
            escape(other),
            ty = cy + r + 7.0,
        ),
    }
}

fn badge(harm: &HarmKind, cx: f64, cy: f64, r: f64) -> String {
    format!(
        r#"<g class="badge" data-harm="{id}" data-color="{color}" data-shape="{shape}">{body}<text x="{cx:.1}" y="{ty:.1}" font-size="{fs:.0}" font-family="sans-serif" text-anchor="middle" fill="white" stroke="black" stroke-width="0.3">{id}</text></g>"#,
        id = harm.id,
        color = escape(&harm.color),
        shape = escape(&harm.shape),
        body = shape_element(&harm.shape, cx, cy, r, color_hex(&harm.color)),
        ty = cy + r * 0.35,
        fs = r,
    )
}

fn render_card(out: &mut String, card: &CardFace, x: f64, y: f64, style: &StyleOptions) {
    let w = style.card_width as f64;
    let h = style.card_height as f64;
    let label = match (card.family, card.kind) {
        (Family::Business, k) => format!("BUSINESS {k}"),
        (Family::Harm, 0) => "WILD HARM".to_string(),
        (Family::Harm, k) => format!("HARM {k}"),
        (Family::Feature, 0) => "WILD FEATURE".to_string(),
        (Family::Feature, k) => format!("FEATURE {k}"),
    };
    let _ = write!(
        out,
        r#"<g class="card" data-family="{}" data-kind="{}" data-copy="{}" transform="translate({x:.1},{y:.1})">"#,
        card.family, card.kind, card.copy
    );
    let _ = write!(
        out,
        r##"<rect width="{w:.0}" height="{h:.0}" rx="12" fill="white" stroke="#222" stroke-width="2"/><text x="12" y="26" font-size="13" font-family="sans-serif" font-weight="bold">{label}</text>"##
    );
    let chars_per_line = ((w - 24.0) / 6.6).max(10.0) as usize;
    for (i, line) in wrap(card.title, chars_per_line).iter().enumerate() {
        let _ = write!(
            out,
            r#"<text x="12" y="{:.1}" font-size="12" font-family="sans-serif">{}</text>"#,
            52.0 + i as f64 * 15.0,
            escape(line)
        );
    }
    if card.family == Family::Harm && card.kind != 0 {
        if let Some(harm) = card.badges.first() {
            out.push_str(&badge(harm, w / 2.0, h - 90.0, 36.0));
        }
    } else {
        let r = 13.0;
        let per_row = ((w - 24.0) / (2.0 * r + 8.0)).floor().max(1.0) as usize;
        for (i, harm) in card.badges.iter().enumerate() {
            let cx = 12.0 + r + (i % per_row) as f64 * (2.0 * r + 8.0);
            let cy = h - 90.0 + (i / per_row) as f64 * (2.0 * r + 10.0);
            out.push_str(&badge(harm, cx, cy, r));
        }
    }
    let _ = write!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="10" font-family="sans-serif" text-anchor="end">copy {} of {}</text></g>"#,
        w - 12.0,
        h - 12.0,
        card.copy,
        card.copies
    );
}

fn render_sheet(heading: &str, cards: &[CardFace], style: &StyleOptions) -> String {
    let columns = style.columns.max(1) as usize;
    let gap = 16.0;
    let rows = cards.len().div_ceil(columns).max(1);
    let width = columns as f64 * (style.card_width as f64 + gap) + gap;
    let height = 60.0 + rows as f64 * (style.card_height as f64 + gap) + gap;
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}"><title>{}</title><text x="{gap:.0}" y="40" font-size="24" font-family="sans-serif">{} ({} cards)</text>"#,
        escape(heading),
        escape(heading),
        cards.len()
    );
    for (i, card) in cards.iter().enumerate() {
        let x = gap + (i % columns) as f64 * (style.card_width as f64 + gap);
        let y = 60.0 + (i / columns) as f64 * (style.card_height as f64 + gap);
        render_card(&mut out, card, x, y, style);
    }
    out.push_str("</svg>\n");
    out
}

fn rules_text(catalog: &Catalog, style: &StyleOptions) -> Vec<String> {
    let harm_total = catalog.harms.len() as u32 * style.harm_copies + style.wild_harm_copies;
    let feature_total = catalog.features.len() as u32 * style.feature_copies + style.wild_feature_copies;
    let example_business = catalog.businesses.first();
    let example_harm = example_business.and_then(|b| b.harms.iter().next()).and_then(|h| catalog.harm(*h).ok());
    let mut lines = vec![
        "HOW TO PLAY".to_string(),
        format!(
            "Deck: {} business cards, {} harm cards ({} wild), {} feature cards ({} wild).",
            catalog.businesses.len(),
            harm_total,
            style.wild_harm_copies,
            feature_total,
            style.wild_feature_copies
        ),
        "Setup: deal the business cards evenly and put spares back in the box. Shuffle harms and features into two face-down decks.".into(),
        "Each player draws their starting harm and feature cards, then sets one business face down. Reveal all businesses together.".into(),
        "On your turn do ONE of: set up one to three businesses, challenge an opponent's business with a harm, or (if none of your harms fits any business) swap a harm for the top of the harm deck.".into(),
        "A harm fits a business when the harm's badge (color and shape) appears on the business card.".into(),
        "The challenged player may answer with a feature whose badges include the harm. A successful answer sends both cards to the bottoms of their decks and each player draws a replacement of the type they spent.".into(),
        "With no answer the business is discarded. A player with no businesses left in play or in hand is out. The last player with a business wins.".into(),
        "Wild cards: play one with a short story. The other players vote and it only counts with a strict majority.".into(),
    ];
    if let (Some(b), Some(h)) = (example_business, example_harm) {
        lines.push("WILD CARD EXAMPLE".into());
        lines.push(format!("Someone challenges your \"{}\" with \"{}\".", b.title, h.title));
        lines.push(
            "You play a Wild Feature and explain: \"Every match is double-checked by a trained staff member before anyone is contacted, and people can see and correct the data kept about them.\"".into(),
        );
        lines.push("Three of the other four players are convinced, a strict majority, so the challenge fails just as if you had played a matching feature.".into());
    }
    lines
}

fn render_rules(catalog: &Catalog, style: &StyleOptions) -> String {
    let width = 816.0;
    let mut body = String::new();
    let mut y = 50.0;
    for paragraph in rules_text(catalog, style) {
        let heading = paragraph.chars().all(|c| c.is_uppercase() || c.is_whitespace());
        for line in wrap(&paragraph, 110) {
            let _ = write!(
                body,
                r#"<text x="40" y="{y:.0}" font-size="{}" font-family="sans-serif"{}>{}</text>"#,
                if heading { 20 } else { 13 },
                if heading { r#" font-weight="bold""# } else { "" },
                escape(&line)
            );
            y += if heading { 28.0 } else { 18.0 };
        }
        y += 8.0;
    }
    y += 10.0;
    let _ = write!(body, r#"<text x="40" y="{y:.0}" font-size="16" font-family="sans-serif" font-weight="bold">HARM BADGES</text>"#);
    y += 30.0;
    for harm in &catalog.harms {
        body.push_str(&badge(harm, 55.0, y - 5.0, 11.0));
        let _ = write!(
            body,
            r#"<text x="75" y="{y:.0}" font-size="12" font-family="sans-serif">{} {}: {}</text>"#,
            escape(&harm.color),
            escape(&harm.shape),
            escape(&harm.title)
        );
        y += 28.0;
    }
    let height = y + 30.0;
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}"><title>Rules</title>{body}</svg>
"#
    )
}

fn render_index(catalog: &Catalog, style: &StyleOptions) -> String {
    let mut out = String::from("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>AI Audit print-and-play</title></head><body>\n<h1>AI Audit print-and-play</h1>\n<ul>\n");
    for (file, label, count) in [
        (BUSINESS_SHEET, "Business cards", catalog.businesses.len() as u32),
        (HARM_SHEET, "Harm cards", catalog.harms.len() as u32 * style.harm_copies + style.wild_harm_copies),
        (FEATURE_SHEET, "Feature cards", catalog.features.len() as u32 * style.feature_copies + style.wild_feature_copies),
        (RULES_SHEET, "Rules and badge key", 0),
    ] {
        if count > 0 {
            let _ = writeln!(out, "<li><a href=\"{file}\">{label}</a> ({count} cards)</li>");
        } else {
            let _ = writeln!(out, "<li><a href=\"{file}\">{label}</a></li>");
        }
    }
    out.push_str("</ul>\n</body></html>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_catalog;

    #[test]
    fn wraps_on_word_boundaries() {
        assert_eq!(wrap("aa bb cc", 5), vec!["aa bb", "cc"]);
        assert!(wrap("", 5).is_empty());
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn every_default_shape_is_drawn_natively() {
        for harm in &default_catalog().harms {
            let svg = shape_element(&harm.shape, 0.0, 0.0, 10.0, "#000");
            assert!(!svg.contains("<text"), "shape {} fell back to a label", harm.shape);
        }
    }

    #[test]
    fn refuses_unplayable_catalog() {
        let mut c = default_catalog();
        c.businesses[0].harms.clear();
        assert!(matches!(
            export_print_sheets(&c, &StyleOptions::default()),
            Err(ExportError::InvalidCatalog(_))
        ));
    }
}
