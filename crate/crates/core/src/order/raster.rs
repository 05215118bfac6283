//! Raster page segmentation: binarization, separator detection by
//! morphological closing, and recursive guillotine partitioning.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::columns::{order_within_block, ColumnConfig};
use super::{OrderError, ReadingOrder};
use crate::model::{BBox, PageDocument, TextLine};

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, OrderError> {
        if pixels.len() != width * height {
            return Err(OrderError::BadImage(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Fills the half-open rectangle `[x0, x1) x [y0, y1)`, clipped to the image.
    pub fn fill_rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, v: u8) {
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                self.set(x, y, v);
            }
        }
    }

    /// Parses a binary PGM (`P5`, maxval 255).
    pub fn from_pgm(bytes: &[u8]) -> Result<Self, OrderError> {
        let bad = |m: &str| OrderError::BadImage(m.to_string());
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
        }
        if fields[0] != "P5" {
            return Err(bad("not a binary PGM (P5)"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
        let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if maxval != 255 {
            return Err(bad("maxval must be 255"));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let data = bytes.get(pos..).ok_or_else(|| bad("missing raster"))?;
        if data.len() < width * height {
            return Err(bad("truncated raster"));
        }
        Self::new(width, height, data[..width * height].to_vec())
    }

    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.pixels)
    }
}

/// Foreground (dark) mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    dark: Vec<bool>,
}

impl BinaryImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_dark(&self, x: usize, y: usize) -> bool {
        self.dark[y * self.width + x]
    }

    pub fn dark_count(&self) -> usize {
        self.dark.iter().filter(|d| **d).count()
    }
}

/// A pixel is dark iff its intensity is below `threshold`.
pub fn binarize(img: &GrayImage, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        dark: img.pixels.iter().map(|&p| p < threshold).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Row,
    Column,
}

/// 1-D morphology along `axis`. Dilation treats out-of-image pixels as
/// background, erosion as foreground, so a closing never shrinks the mask.
fn morph_1d(src: &BinaryImage, axis: Axis, radius: usize, dilate: bool) -> BinaryImage {
    if radius == 0 {
        return src.clone();
    }
    let (w, h) = (src.width, src.height);
    let (outer, inner) = match axis {
        Axis::Row => (h, w),
        Axis::Column => (w, h),
    };
    let at = |o: usize, i: usize| match axis {
        Axis::Row => o * w + i,
        Axis::Column => i * w + o,
    };
    let mut out = vec![false; w * h];
    for o in 0..outer {
        // Prefix sums of dark pixels along the line.
        let mut prefix = vec![0usize; inner + 1];
        for i in 0..inner {
            prefix[i + 1] = prefix[i] + usize::from(src.dark[at(o, i)]);
        }
        for i in 0..inner {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(inner);
            let dark = prefix[hi] - prefix[lo];
            out[at(o, i)] = if dilate { dark > 0 } else { dark == hi - lo };
        }
    }
    BinaryImage {
        width: w,
        height: h,
        dark: out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A detected separator band; `rect` is half-open in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separator {
    pub orientation: Orientation,
    pub rect: BBox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatorParams {
    /// Minimum run length as a fraction of the page dimension along the run.
    pub min_run_fraction: f64,
    pub dilation_radius: usize,
    pub erosion_radius: usize,
}

impl Default for SeparatorParams {
    fn default() -> Self {
        Self {
            min_run_fraction: 0.5,
            dilation_radius: 2,
            erosion_radius: 2,
        }
    }
}

/// Long dark runs along `axis` after closing, merged across adjacent lines
/// into bands.
fn bands(img: &BinaryImage, axis: Axis, params: &SeparatorParams) -> Vec<Separator> {
    let closed = morph_1d(
        &morph_1d(img, axis, params.dilation_radius, true),
        axis,
        params.erosion_radius,
        false,
    );
    let (outer, inner) = match axis {
        Axis::Row => (img.height, img.width),
        Axis::Column => (img.width, img.height),
    };
    let min_len = ((params.min_run_fraction * inner as f64).ceil() as usize).max(1);
    let dark = |o: usize, i: usize| match axis {
        Axis::Row => closed.is_dark(i, o),
        Axis::Column => closed.is_dark(o, i),
    };

    // Open bands: (start outer, end outer exclusive, run start, run end).
    let mut open: Vec<(usize, usize, usize, usize)> = Vec::new();
    let mut done = Vec::new();
    for o in 0..outer {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < inner {
            if dark(o, i) {
                let s = i;
                while i < inner && dark(o, i) {
                    i += 1;
                }
                if i - s >= min_len {
                    runs.push((s, i));
                }
            } else {
                i += 1;
            }
        }
        let mut next_open = Vec::new();
        for (s, e) in runs {
            let hit = open
                .iter()
                .position(|b| b.1 == o && s < b.3 && b.2 < e);
            match hit {
                Some(k) => {
                    let b = open.swap_remove(k);
                    next_open.push((b.0, o + 1, b.2.min(s), b.3.max(e)));
                }
                None => next_open.push((o, o + 1, s, e)),
            }
        }
        done.extend(open.drain(..));
        open = next_open;
    }
    done.extend(open);
    done.sort();

    done.into_iter()
        .map(|(o0, o1, i0, i1)| {
            let (o0, o1, i0, i1) = (o0 as i64, o1 as i64, i0 as i64, i1 as i64);
            match axis {
                Axis::Row => Separator {
                    orientation: Orientation::Horizontal,
                    rect: BBox::new(i0, o0, i1, o1),
                },
                Axis::Column => Separator {
                    orientation: Orientation::Vertical,
                    rect: BBox::new(o0, i0, o1, i1),
                },
            }
        })
        .collect()
}

/// Horizontal separators (sorted by row) followed by vertical ones (sorted by column).
pub fn detect_separators(img: &BinaryImage, params: &SeparatorParams) -> Vec<Separator> {
    let mut out = bands(img, Axis::Row, params);
    out.extend(bands(img, Axis::Column, params));
    out
}

/// A separator cuts a rectangle when it covers at least this fraction of
/// the rectangle's extent along the separator.
pub const CUT_COVERAGE: f64 = 0.95;

fn cuts(sep: &Separator, r: &BBox) -> bool {
    let s = &sep.rect;
    let (lo, hi, across_lo, across_hi, r_lo, r_hi, r_across_lo, r_across_hi) = match sep.orientation {
        Orientation::Horizontal => (s.x0, s.x1, s.y0, s.y1, r.x0, r.x1, r.y0, r.y1),
        Orientation::Vertical => (s.y0, s.y1, s.x0, s.x1, r.y0, r.y1, r.x0, r.x1),
    };
    let covered = (hi.min(r_hi) - lo.max(r_lo)).max(0) as f64;
    let extent = (r_hi - r_lo) as f64;
    extent > 0.0
        && covered >= CUT_COVERAGE * extent
        && across_lo < r_across_hi
        && across_hi > r_across_lo
}

fn split(rect: BBox, seps: &[Separator], out: &mut Vec<BBox>) {
    if rect.width() <= 0 || rect.height() <= 0 {
        return;
    }
    let Some(k) = seps.iter().position(|s| cuts(s, &rect)) else {
        out.push(rect);
        return;
    };
    let s = seps[k].rect;
    let rest: Vec<Separator> = seps
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, s)| *s)
        .collect();
    let (first, second) = match seps[k].orientation {
        Orientation::Horizontal => (
            BBox::new(rect.x0, rect.y0, rect.x1, s.y0.max(rect.y0)),
            BBox::new(rect.x0, s.y1.min(rect.y1), rect.x1, rect.y1),
        ),
        Orientation::Vertical => (
            BBox::new(rect.x0, rect.y0, s.x0.max(rect.x0), rect.y1),
            BBox::new(s.x1.min(rect.x1), rect.y0, rect.x1, rect.y1),
        ),
    };
    split(first, &rest, out);
    split(second, &rest, out);
}

/// Recursive guillotine partition of `page` along the separators that span
/// it. Rectangles come out top/left first.
pub fn partition_blocks(page: BBox, separators: &[Separator]) -> Vec<BBox> {
    let mut out = Vec::new();
    split(page, separators, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentConfig {
    pub threshold: u8,
    pub separators: SeparatorParams,
    pub columns: ColumnConfig,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            threshold: 128,
            separators: SeparatorParams::default(),
            columns: ColumnConfig::default(),
        }
    }
}

fn contains_point(r: &BBox, (x, y): (f64, f64)) -> bool {
    x >= r.x0 as f64 && x < r.x1 as f64 && y >= r.y0 as f64 && y < r.y1 as f64
}

/// Segments the page raster into article blocks and orders lines block by
/// block. Lines whose center falls in no block join the nearest one.
pub fn order_by_segmentation(page: &PageDocument, img: &GrayImage, cfg: &SegmentConfig) -> ReadingOrder {
    let binary = binarize(img, cfg.threshold);
    let separators = detect_separators(&binary, &cfg.separators);
    let sx = f64::from(page.width) / img.width().max(1) as f64;
    let sy = f64::from(page.height) / img.height().max(1) as f64;
    let scaled: Vec<Separator> = separators
        .iter()
        .map(|s| Separator {
            orientation: s.orientation,
            rect: BBox::new(
                (s.rect.x0 as f64 * sx).round() as i64,
                (s.rect.y0 as f64 * sy).round() as i64,
                (s.rect.x1 as f64 * sx).round() as i64,
                (s.rect.y1 as f64 * sy).round() as i64,
            ),
        })
        .collect();
    let rects = partition_blocks(
        BBox::new(0, 0, i64::from(page.width), i64::from(page.height)),
        &scaled,
    );

    let mut members: Vec<Vec<&TextLine>> = vec![Vec::new(); rects.len().max(1)];
    for line in &page.lines {
        let c = line.bbox.center();
        let k = rects
            .iter()
            .position(|r| contains_point(r, c))
            .or_else(|| {
                rects
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.distance_to(&line.bbox).total_cmp(&b.1.distance_to(&line.bbox)))
                    .map(|(k, _)| k)
            })
            .unwrap_or(0);
        members[k].push(line);
    }
    let sequence = members
        .iter()
        .flat_map(|m| order_within_block(m, &cfg.columns))
        .collect();
    ReadingOrder::from_lines(sequence, page)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dilation: usize) -> SeparatorParams {
        SeparatorParams {
            min_run_fraction: 0.8,
            dilation_radius: dilation,
            erosion_radius: dilation,
        }
    }

    #[test]
    fn binarize_extremes() {
        let white = GrayImage::filled(8, 4, 255);
        assert_eq!(binarize(&white, 128).dark_count(), 0);
        let black = GrayImage::filled(8, 4, 0);
        assert_eq!(binarize(&black, 128).dark_count(), 32);
    }

    #[test]
    fn checkerboard_alternates() {
        let mut img = GrayImage::filled(4, 4, 255);
        for y in 0..4 {
            for x in 0..4 {
                if (x + y) % 2 == 0 {
                    img.set(x, y, 0);
                }
            }
        }
        let b = binarize(&img, 128);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(b.is_dark(x, y), (x + y) % 2 == 0);
            }
        }
    }

    #[test]
    fn pgm_roundtrip_and_errors() {
        let mut img = GrayImage::filled(3, 2, 200);
        img.set(1, 1, 7);
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        assert_eq!(GrayImage::from_pgm(&buf).unwrap(), img);
        let with_comment = b"P5\n# made by hand\n2 1\n255\n\x01\x02";
        assert_eq!(GrayImage::from_pgm(with_comment).unwrap().get(1, 0), 2);
        assert!(GrayImage::from_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(GrayImage::from_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(GrayImage::from_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn blank_page_has_no_separators() {
        let b = binarize(&GrayImage::filled(50, 40, 255), 128);
        assert!(detect_separators(&b, &params(2)).is_empty());
    }

    #[test]
    fn full_width_band_is_one_horizontal_separator() {
        let mut img = GrayImage::filled(60, 40, 255);
        img.fill_rect(0, 17, 60, 20, 0);
        let seps = detect_separators(&binarize(&img, 128), &params(2));
        assert_eq!(seps.len(), 1);
        assert_eq!(seps[0].orientation, Orientation::Horizontal);
        assert_eq!(seps[0].rect, BBox::new(0, 17, 60, 20));
    }

    #[test]
    fn dashed_line_is_closed() {
        // 6 px dashes with 2 px gaps across the full width.
        let mut img = GrayImage::filled(64, 30, 255);
        for x in 0..64 {
            if x % 8 < 6 {
                img.fill_rect(x, 10, x + 1, 12, 0);
            }
        }
        let b = binarize(&img, 128);
        assert!(detect_separators(&b, &params(0)).is_empty());
        let seps = detect_separators(&b, &params(2));
        assert_eq!(seps.len(), 1);
        assert_eq!(seps[0].rect.y0, 10);
        assert_eq!(seps[0].rect.x1 - seps[0].rect.x0, 64);
    }

    #[test]
    fn vertical_rule_detected() {
        let mut img = GrayImage::filled(40, 60, 255);
        img.fill_rect(20, 0, 22, 60, 0);
        let seps = detect_separators(&binarize(&img, 128), &params(1));
        assert_eq!(seps.len(), 1);
        assert_eq!(seps[0].orientation, Orientation::Vertical);
        assert_eq!(seps[0].rect, BBox::new(20, 0, 22, 60));
    }

    fn hsep(y0: i64, y1: i64, x0: i64, x1: i64) -> Separator {
        Separator {
            orientation: Orientation::Horizontal,
            rect: BBox::new(x0, y0, x1, y1),
        }
    }

    fn vsep(x0: i64, x1: i64, y0: i64, y1: i64) -> Separator {
        Separator {
            orientation: Orientation::Vertical,
            rect: BBox::new(x0, y0, x1, y1),
        }
    }

    #[test]
    fn no_separators_is_whole_page() {
        let page = BBox::new(0, 0, 100, 200);
        assert_eq!(partition_blocks(page, &[]), vec![page]);
    }

    #[test]
    fn horizontal_split_gives_two_stacked() {
        let page = BBox::new(0, 0, 100, 200);
        let rects = partition_blocks(page, &[hsep(98, 102, 0, 100)]);
        assert_eq!(rects, vec![BBox::new(0, 0, 100, 98), BBox::new(0, 102, 100, 200)]);
    }

    #[test]
    fn lower_half_vertical_gives_three() {
        let page = BBox::new(0, 0, 100, 200);
        let rects = partition_blocks(page, &[vsep(49, 51, 102, 200), hsep(98, 102, 0, 100)]);
        assert_eq!(
            rects,
            vec![
                BBox::new(0, 0, 100, 98),
                BBox::new(0, 102, 49, 200),
                BBox::new(51, 102, 100, 200),
            ]
        );
    }

    #[test]
    fn segmentation_orders_two_articles() {
        use crate::model::{Language, LayoutBlock};
        // Top article spans the page; bottom half has two columns split by a rule.
        let mut img = GrayImage::filled(200, 200, 255);
        img.fill_rect(0, 99, 200, 101, 0);
        img.fill_rect(99, 101, 101, 200, 0);
        let mk = |id: &str, x0: i64, y0: i64| TextLine {
            line_id: id.into(),
            text: id.into(),
            bbox: BBox::new(x0, y0, x0 + 80, y0 + 10),
            font_size: None,
            font_style: None,
            block_id: "b".into(),
        };
        let lines = vec![
            mk("R1", 110, 120),
            mk("L1", 10, 120),
            mk("T1", 10, 10),
            mk("R2", 110, 140),
            mk("L2", 10, 140),
            mk("T2", 10, 30),
        ];
        let page = PageDocument {
            doc_id: "d".into(),
            page_index: 0,
            width: 200,
            height: 200,
            language: Language::En,
            blocks: vec![LayoutBlock {
                block_id: "b".into(),
                category: "paragraph".into(),
                bbox: BBox::new(0, 0, 200, 200),
                line_ids: lines.iter().map(|l| l.line_id.clone()).collect(),
            }],
            lines,
        };
        let order = order_by_segmentation(&page, &img, &SegmentConfig::default());
        assert_eq!(order.line_sequence, ["T1", "T2", "L1", "L2", "R1", "R2"]);
        assert_eq!(order.para_sequence, ["b"]);
    }
}
