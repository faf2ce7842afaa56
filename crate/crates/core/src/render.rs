//! Text and SVG output of a laid-out sheet.

use std::fmt::Write;

use crate::layout::{layout, Metrics, Sheet};
use crate::model::{LineType, TableModule};

pub fn render_text(table: &TableModule, metrics: &Metrics) -> String {
    sheet_to_text(&layout(table, metrics).sheet, metrics)
}

pub fn render_svg(table: &TableModule, metrics: &Metrics) -> String {
    sheet_to_svg(&layout(table, metrics).sheet)
}

const H: u8 = 1;
const V: u8 = 2;

/// Monospace drawing: one character per `char_width_mm` across, two
/// character rows per row unit (ruling row + text row).
pub fn sheet_to_text(sheet: &Sheet, metrics: &Metrics) -> String {
    let col = |x: f64| (x / metrics.char_width_mm).round().max(0.0) as usize;
    let row = |y: f64| (y / metrics.row_height_mm * 2.0).round().max(0.0) as usize;
    let width = col(sheet.width_mm) + 1;
    let height = row(sheet.height_mm) + 1;
    let mut marks = vec![vec![0u8; width]; height];
    for s in &sheet.strokes {
        let (c1, c2) = (col(s.x1.min(s.x2)), col(s.x1.max(s.x2)));
        let (r1, r2) = (row(s.y1.min(s.y2)), row(s.y1.max(s.y2)));
        if r1 == r2 {
            for m in &mut marks[r1.min(height - 1)][c1..=c2.min(width - 1)] {
                *m |= H;
            }
        } else if c1 == c2 {
            for line in marks.iter_mut().take(r2 + 1).skip(r1) {
                line[c1.min(width - 1)] |= V;
            }
        }
    }
    let mut grid: Vec<Vec<char>> = marks
        .iter()
        .map(|line| {
            line.iter()
                .map(|&m| match m {
                    0 => ' ',
                    H => '-',
                    V => '|',
                    _ => '+',
                })
                .collect()
        })
        .collect();
    for t in &sheet.texts {
        let r = row(t.rect.y) + 1;
        let (start, end) = (col(t.rect.x) + 1, col(t.rect.right()));
        if r >= height {
            continue;
        }
        for (c, ch) in (start..end.min(width)).zip(t.text.chars()) {
            grid[r][c] = ch;
        }
    }
    let mut out = String::new();
    for line in grid {
        let s: String = line.into_iter().collect();
        out.push_str(s.trim_end());
        out.push('\n');
    }
    out
}

/// Millimetre value with at most three decimals and no trailing zeros.
fn mm(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

pub fn stroke_width(line: LineType) -> f64 {
    match line {
        LineType::None => 0.0,
        LineType::Thin => 0.3,
        LineType::Thick => 0.6,
    }
}

pub fn sheet_to_svg(sheet: &Sheet) -> String {
    let (w, h) = (mm(sheet.width_mm), mm(sheet.height_mm));
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"0 0 {w} {h}\">"
    );
    out.push_str("<g stroke=\"black\" stroke-linecap=\"square\">\n");
    for s in &sheet.strokes {
        if s.line == LineType::None {
            continue;
        }
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke-width=\"{}\"/>",
            mm(s.x1),
            mm(s.y1),
            mm(s.x2),
            mm(s.y2),
            stroke_width(s.line)
        );
    }
    out.push_str("</g>\n<g fill=\"black\">\n");
    for t in &sheet.texts {
        if t.text.is_empty() {
            continue;
        }
        let baseline = t.rect.y + (t.rect.height + t.height_mm) / 2.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"{}\" font-size=\"{}\">{}</text>",
            mm(t.rect.x + 1.0),
            mm(baseline),
            escape(&t.font),
            mm(t.height_mm),
            escape(&t.text)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
