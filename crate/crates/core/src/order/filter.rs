//! Screening of reading orders for long, nearly horizontal line-to-line links.

use std::collections::HashMap;

use super::{OrderError, ReadingOrder};
use crate::model::PageDocument;

/// Angles within this many degrees of the threshold count as equal to it,
/// so a link at exactly the threshold angle is not "below" it.
pub const ANGLE_EPS_DEG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFilterConfig {
    /// Minimum link length in pixels (strictly exceeded to be invalid).
    pub t1: f64,
    /// Maximum angle to the horizontal in degrees (strictly below to be invalid).
    pub theta1_deg: f64,
    /// Pages with more invalid links than this are discarded.
    pub max_invalid: usize,
}

/// Fraction of the page width used for `t1` when none is configured.
pub const DEFAULT_T1_WIDTH_FRACTION: f64 = 0.1;

impl GeometricFilterConfig {
    pub fn for_page_width(width: u32) -> Self {
        Self {
            t1: DEFAULT_T1_WIDTH_FRACTION * f64::from(width),
            theta1_deg: 45.0,
            max_invalid: 5,
        }
    }

    pub fn validate(&self) -> Result<(), OrderError> {
        if !(self.t1.is_finite() && self.t1 > 0.0) {
            return Err(OrderError::InvalidConfig(format!("t1 = {} must be > 0", self.t1)));
        }
        if !(self.theta1_deg > 0.0 && self.theta1_deg < 90.0) {
            return Err(OrderError::InvalidConfig(format!(
                "theta1 = {} must lie in (0, 90)",
                self.theta1_deg
            )));
        }
        Ok(())
    }
}

/// True iff the link `p_i -> p_j` is longer than `t1` and its angle to the
/// horizontal is below `theta1`.
pub fn invalid_link(
    p_i: (f64, f64),
    p_j: (f64, f64),
    cfg: &GeometricFilterConfig,
) -> Result<bool, OrderError> {
    let dx = p_j.0 - p_i.0;
    let dy = p_j.1 - p_i.1;
    let dist = dx.hypot(dy);
    if dist == 0.0 {
        return Err(OrderError::CoincidentCenters);
    }
    let angle = (dx.abs() / dist).clamp(0.0, 1.0).acos().to_degrees();
    Ok(dist > cfg.t1 && angle < cfg.theta1_deg - ANGLE_EPS_DEG)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Discard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// The input order with each link's validity set.
    pub order: ReadingOrder,
    pub invalid_links: usize,
    pub decision: FilterDecision,
}

/// Marks every link of `order` and discards the page when more than
/// `cfg.max_invalid` links are invalid. Links between coincident centers or
/// unknown lines are left valid.
pub fn filter_page_order(
    order: &ReadingOrder,
    page: &PageDocument,
    cfg: &GeometricFilterConfig,
) -> FilterOutcome {
    let centers: HashMap<&str, (f64, f64)> = page
        .lines
        .iter()
        .map(|l| (l.line_id.as_str(), l.bbox.center()))
        .collect();
    let mut annotated = order.clone();
    for link in &mut annotated.links {
        link.valid = match (centers.get(link.from.as_str()), centers.get(link.to.as_str())) {
            (Some(&a), Some(&b)) => !invalid_link(a, b, cfg).unwrap_or(false),
            _ => true,
        };
    }
    let invalid = annotated.invalid_links();
    FilterOutcome {
        order: annotated,
        invalid_links: invalid,
        decision: if invalid > cfg.max_invalid {
            FilterDecision::Discard
        } else {
            FilterDecision::Keep
        },
    }
}
