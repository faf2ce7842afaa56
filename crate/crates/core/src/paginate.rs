//! Splitting a table into chunks of limited height placed side by side.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{layout_records, natural_height, Metrics, Rect, Sheet, Stroke, TextBox};
use crate::model::{enumerate_graphs, ContinuationSpec, Direction, LineType, Region, TableModule};

/// Horizontal distance between neighbouring chunks.
pub const SEGMENT_GAP_MM: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Records in this chunk; the first chunk starts with the header record.
    pub records: Range<usize>,
    pub rect: Rect,
    /// The header is drawn above a continuation chunk.
    pub header_repeated: bool,
    pub number_row: bool,
}

/// Graph numbers of the number band, left to right.
pub fn graph_numbers(table: &TableModule, first: u32) -> Vec<(u32, f64, f64)> {
    enumerate_graphs(&table.template)
        .into_iter()
        .enumerate()
        .map(|(i, g)| (first + i as u32, g.x_mm, g.width_mm))
        .collect()
}

pub fn paginate(
    table: &TableModule,
    metrics: &Metrics,
    spec: &ContinuationSpec,
) -> Result<Vec<Segment>> {
    let row_h = metrics.row_height_mm;
    let root = &table.template.root;
    let width = table.template.width();
    let heights: Vec<f64> = table
        .records
        .iter()
        .enumerate()
        .map(|(r, inst)| natural_height(root, inst, Region::of_record(r), row_h))
        .collect();
    let header_h = heights[0];
    let band_h = if spec.number_row { row_h } else { 0.0 };
    let total: f64 = heights.iter().sum::<f64>() + band_h;

    let Some(chunk) = spec.chunk_height_mm else {
        return Ok(vec![Segment {
            records: 0..table.records.len(),
            rect: Rect::new(0.0, 0.0, width, total),
            header_repeated: false,
            number_row: spec.number_row,
        }]);
    };
    let required = header_h + band_h + row_h;
    if chunk < required {
        return Err(Error::ChunkTooSmall { chunk, required });
    }

    let prefix_first = header_h + band_h;
    let prefix_next = if spec.repeat_header { header_h } else { 0.0 } + band_h;
    let mut segments = Vec::new();
    let mut start = 0;
    let mut used = prefix_first;
    let mut r = 1;
    while r < table.records.len() {
        let h = heights[r];
        let prefix = if segments.is_empty() {
            prefix_first
        } else {
            prefix_next
        };
        if h > chunk - prefix {
            return Err(Error::RecordTallerThanChunk {
                record: r,
                height: h,
                available: chunk - prefix,
            });
        }
        if used + h > chunk {
            segments.push((start..r, used));
            start = r;
            used = prefix_next;
        }
        used += h;
        r += 1;
    }
    segments.push((start..table.records.len(), used));

    let step = width + SEGMENT_GAP_MM;
    Ok(segments
        .into_iter()
        .enumerate()
        .map(|(i, (records, height))| {
            let x = match spec.direction {
                Direction::Right => i as f64 * step,
                Direction::Left => -(i as f64) * step,
            };
            Segment {
                records,
                rect: Rect::new(x, 0.0, width, height),
                header_repeated: i > 0 && spec.repeat_header,
                number_row: spec.number_row,
            }
        })
        .collect())
}

/// Draws the chunks on one sheet, shifted so every coordinate is positive.
pub fn page_sheet(
    table: &TableModule,
    metrics: &Metrics,
    spec: &ContinuationSpec,
    segments: &[Segment],
) -> Sheet {
    let row_h = metrics.row_height_mm;
    let width = table.template.width();
    let min_x = segments.iter().map(|s| s.rect.x).fold(0.0, f64::min);
    let mut sheet = Sheet::default();
    for seg in segments {
        let dx = seg.rect.x - min_x;
        let mut y = 0.0;
        let mut records: Vec<usize> = Vec::new();
        let starts_with_header = seg.records.start == 0;
        if starts_with_header || seg.header_repeated {
            records.push(0);
        }
        let (_, _, head) = layout_records(table, metrics, records, 0.0);
        y += head.height_mm;
        merge(&mut sheet, head, dx, 0.0);
        if seg.number_row {
            for (n, gx, gw) in graph_numbers(table, spec.first_graph_number) {
                let rect = Rect::new(gx + dx, y, gw, row_h);
                sheet.texts.push(TextBox {
                    rect,
                    text: n.to_string(),
                    height_mm: table.template.style_defaults.text_height_mm,
                    font: table.template.style_defaults.font_tag.clone(),
                    path: None,
                });
                for (x1, y1, x2, y2) in [
                    (rect.x, rect.y, rect.right(), rect.y),
                    (rect.x, rect.bottom(), rect.right(), rect.bottom()),
                    (rect.x, rect.y, rect.x, rect.bottom()),
                    (rect.right(), rect.y, rect.right(), rect.bottom()),
                ] {
                    sheet.strokes.push(Stroke {
                        x1,
                        y1,
                        x2,
                        y2,
                        line: LineType::Thin,
                    });
                }
            }
            for (x1, y1, x2, y2) in [
                (dx, y, dx + width, y),
                (dx, y + row_h, dx + width, y + row_h),
                (dx, y, dx, y + row_h),
                (dx + width, y, dx + width, y + row_h),
            ] {
                sheet.strokes.push(Stroke {
                    x1,
                    y1,
                    x2,
                    y2,
                    line: table.template.style_defaults.line,
                });
            }
            y += row_h;
        }
        let body = seg.records.start.max(1)..seg.records.end;
        let (_, _, rows) = layout_records(table, metrics, body, 0.0);
        let h = rows.height_mm;
        merge(&mut sheet, rows, dx, y);
        y += h;
        sheet.height_mm = sheet.height_mm.max(y);
        sheet.width_mm = sheet.width_mm.max(dx + width);
    }
    sheet.dedup_strokes();
    sheet
}

fn merge(sheet: &mut Sheet, part: Sheet, dx: f64, dy: f64) {
    sheet
        .strokes
        .extend(part.strokes.into_iter().map(|s| Stroke {
            x1: s.x1 + dx,
            y1: s.y1 + dy,
            x2: s.x2 + dx,
            y2: s.y2 + dy,
            line: s.line,
        }));
    sheet.texts.extend(part.texts.into_iter().map(|mut t| {
        t.rect = t.rect.translate(dx, dy);
        t
    }));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::parse_structure;

    fn table(records: usize) -> TableModule {
        let t = parse_structure(r#"table "T" cols { leaf "A" [width=10] leaf "B" [width=20] }"#)
            .unwrap()
            .into_valid()
            .unwrap();
        let mut m = TableModule::new(t).unwrap();
        for _ in 0..records {
            m.insert_record(0).unwrap();
        }
        m
    }

    fn spec(h: f64) -> ContinuationSpec {
        ContinuationSpec {
            chunk_height_mm: Some(h),
            ..ContinuationSpec::default()
        }
    }

    #[test]
    fn all_fit_in_one_chunk() {
        let segs = paginate(&table(3), &Metrics::default(), &spec(100.0)).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].records, 0..4);
    }

    #[test]
    fn greedy_chunks_with_repeated_header() {
        let mut s = spec(24.0);
        s.repeat_header = true;
        let segs = paginate(&table(5), &Metrics::default(), &s).unwrap();
        let ranges: Vec<_> = segs.iter().map(|s| s.records.clone()).collect();
        assert_eq!(ranges, vec![0..3, 3..5, 5..6]);
        assert_eq!(segs[1].rect.x, 40.0);
        s.direction = Direction::Left;
        let segs = paginate(&table(5), &Metrics::default(), &s).unwrap();
        assert_eq!(segs[1].rect.x, -40.0);
        let sheet = page_sheet(&table(5), &Metrics::default(), &s, &segs);
        assert_eq!(sheet.width_mm, 110.0);
    }

    #[test]
    fn chunk_errors() {
        let mut s = spec(15.0);
        assert_eq!(
            paginate(&table(1), &Metrics::default(), &s)
                .unwrap_err()
                .code(),
            "chunk-too-small"
        );
        s.chunk_height_mm = Some(16.0);
        s.number_row = true;
        assert_eq!(
            paginate(&table(1), &Metrics::default(), &s)
                .unwrap_err()
                .code(),
            "chunk-too-small"
        );
    }

    #[test]
    fn numbers_follow_graphs() {
        let numbers: Vec<u32> = graph_numbers(&table(0), 25)
            .into_iter()
            .map(|n| n.0)
            .collect();
        assert_eq!(numbers, vec![25, 26]);
    }
}
