use crate::model::TextLine;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnConfig {
    /// Column gutter threshold as a multiple of the estimated word gap.
    pub gap_factor: f64,
    /// Word gap estimate as a fraction of the median line height.
    pub word_gap_ratio: f64,
    /// Lines at least this many times the median font size are headlines.
    pub headline_factor: f64,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        Self {
            gap_factor: 1.5,
            word_gap_ratio: 0.3,
            headline_factor: 1.5,
        }
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn top_down(lines: &mut [&TextLine]) {
    lines.sort_by(|a, b| (a.bbox.y0, a.bbox.x0, &a.line_id).cmp(&(b.bbox.y0, b.bbox.x0, &b.line_id)));
}

/// Orders the lines of one block: headlines first, then columns left to
/// right, each read top to bottom. Columns are runs of lines whose
/// horizontal extents are separated by less than the gutter threshold.
pub fn order_within_block(lines: &[&TextLine], cfg: &ColumnConfig) -> Vec<String> {
    let font_median = median(lines.iter().filter_map(|l| l.font_size).collect());
    let is_headline = |l: &TextLine| match (l.font_size, font_median) {
        (Some(fs), Some(m)) => fs >= cfg.headline_factor * m,
        _ => false,
    };
    let (mut heads, body): (Vec<&TextLine>, Vec<&TextLine>) =
        lines.iter().copied().partition(|l| is_headline(l));
    top_down(&mut heads);

    let height = median(body.iter().map(|l| l.bbox.height() as f64).collect()).unwrap_or(0.0);
    let gutter = cfg.gap_factor * cfg.word_gap_ratio * height;

    let mut by_x = body;
    by_x.sort_by(|a, b| (a.bbox.x0, a.bbox.y0, &a.line_id).cmp(&(b.bbox.x0, b.bbox.y0, &b.line_id)));
    let mut columns: Vec<Vec<&TextLine>> = Vec::new();
    let mut right_edge: Option<i64> = None;
    for l in by_x {
        match (columns.last_mut(), right_edge) {
            (Some(col), Some(edge)) if ((l.bbox.x0 - edge) as f64) < gutter => col.push(l),
            _ => columns.push(vec![l]),
        }
        right_edge = Some(right_edge.map_or(l.bbox.x1, |e| e.max(l.bbox.x1)));
    }

    heads
        .into_iter()
        .chain(columns.into_iter().flat_map(|mut col| {
            top_down(&mut col);
            col
        }))
        .map(|l| l.line_id.clone())
        .collect()
}
