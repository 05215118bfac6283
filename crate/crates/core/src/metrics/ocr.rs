//! Character recognition rates from an optimal character alignment.

use crate::text::normalize;

const MATCH: u8 = 0;
const SUBSTITUTE: u8 = 1;
const INSERT: u8 = 2;
const DELETE: u8 = 3;

/// Two-bit backtrace cells packed four to a byte.
struct Backtrace {
    cols: usize,
    bits: Vec<u8>,
}

impl Backtrace {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            bits: vec![0; (rows * cols).div_ceil(4)],
        }
    }

    fn set(&mut self, i: usize, j: usize, op: u8) {
        let k = i * self.cols + j;
        self.bits[k / 4] |= op << ((k % 4) * 2);
    }

    fn get(&self, i: usize, j: usize) -> u8 {
        let k = i * self.cols + j;
        (self.bits[k / 4] >> ((k % 4) * 2)) & 0b11
    }
}

/// One optimal edit alignment of `gt` against `pred`; returns the aligned
/// pairs `(gt_pos, pred_pos)` whose characters are equal, in order.
///
/// Among co-optimal alignments, each backtrace step prefers a match, then a
/// substitution, then an insertion (extra prediction character), then a
/// deletion.
pub fn char_alignment(gt: &str, pred: &str) -> Vec<(usize, usize)> {
    let g: Vec<char> = gt.chars().collect();
    let p: Vec<char> = pred.chars().collect();
    let (m, n) = (g.len(), p.len());
    let mut trace = Backtrace::new(m + 1, n + 1);
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut cur = vec![0usize; n + 1];
    for j in 1..=n {
        trace.set(0, j, INSERT);
    }
    for i in 1..=m {
        cur[0] = i;
        trace.set(i, 0, DELETE);
        for j in 1..=n {
            let same = g[i - 1] == p[j - 1];
            let diag = prev[j - 1] + usize::from(!same);
            let ins = cur[j - 1] + 1;
            let del = prev[j] + 1;
            let best = diag.min(ins).min(del);
            let op = if diag == best {
                if same {
                    MATCH
                } else {
                    SUBSTITUTE
                }
            } else if ins == best {
                INSERT
            } else {
                DELETE
            };
            cur[j] = best;
            trace.set(i, j, op);
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let mut pairs = Vec::new();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        match trace.get(i, j) {
            MATCH => {
                pairs.push((i - 1, j - 1));
                i -= 1;
                j -= 1;
            }
            SUBSTITUTE => {
                i -= 1;
                j -= 1;
            }
            INSERT => j -= 1,
            _ => i -= 1,
        }
    }
    pairs.reverse();
    pairs
}

fn matched(gt: &str, pred: &str) -> (usize, usize, usize) {
    let g = normalize(gt);
    let p = normalize(pred);
    let hits = char_alignment(&g, &p).len();
    (hits, g.chars().count(), p.chars().count())
}

/// Matched characters over ground-truth length (0 for empty ground truth).
pub fn crr(gt: &str, pred: &str) -> f64 {
    let (hits, glen, _) = matched(gt, pred);
    if glen == 0 {
        0.0
    } else {
        hits as f64 / glen as f64
    }
}

/// Matched characters over prediction length (0 for empty prediction).
pub fn ocrr(gt: &str, pred: &str) -> f64 {
    let (hits, _, plen) = matched(gt, pred);
    if plen == 0 {
        0.0
    } else {
        hits as f64 / plen as f64
    }
}
