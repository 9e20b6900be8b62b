use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{wrap_to_period, TWO_PI};
use crate::trig::SineProduct;

const SNAP: f64 = 1e-12;

/// The `2s` sign-change points, labelled `y_1 > y_2 > ... > y_{2s}` and
/// extended by `y_i = y_{i+2s} + 2 pi`.
///
/// After normalisation a node sits at 0 with an odd label `i_star`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSet {
    s: usize,
    /// `labelled[i - 1] = y_i`.
    labelled: Vec<f64>,
    i_star: usize,
    shift: f64,
    relabelled: bool,
}

/// One closed interval `[y_i, y_{i-1}]` with its required monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneInterval {
    pub label: usize,
    pub left: f64,
    pub right: f64,
    /// `+1` (non-decreasing) for odd labels, `-1` for even ones.
    pub sign: f64,
}

fn reduce(y: f64) -> f64 {
    let r = wrap_to_period(y);
    if (r + PI).abs() < SNAP || (PI - r).abs() < SNAP {
        -PI
    } else if r.abs() < SNAP {
        0.0
    } else {
        r
    }
}

/// Translate so the node of smallest `|y|` sits at 0, label by decreasing
/// value, and rotate labels by one when that node would get an even label.
pub fn normalize_nodes(raw: &[f64]) -> Result<NodeSet> {
    if raw.is_empty() {
        return Err(Error::InvalidNodes("empty node list".into()));
    }
    if !raw.len().is_multiple_of(2) {
        return Err(Error::InvalidNodes(format!("need an even number of nodes, got {}", raw.len())));
    }
    if let Some(bad) = raw.iter().find(|y| !y.is_finite()) {
        return Err(Error::InvalidNodes(format!("node {bad} is not finite")));
    }
    let reduced: Vec<f64> = raw.iter().map(|&y| reduce(y)).collect();
    let centre = *reduced
        .iter()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .expect("non-empty");
    let mut pts: Vec<f64> = reduced.iter().map(|&y| reduce(y - centre)).collect();
    pts.sort_by(|a, b| b.total_cmp(a));
    for w in pts.windows(2) {
        if w[0] - w[1] < SNAP {
            return Err(Error::InvalidNodes(format!("duplicate node {} (mod 2pi)", w[0] + centre)));
        }
    }
    if pts[0] - (pts[pts.len() - 1] + TWO_PI) > -SNAP {
        return Err(Error::InvalidNodes("duplicate node at -pi/pi (mod 2pi)".into()));
    }
    let zero = pts.iter().position(|&y| y == 0.0).expect("centre maps to 0");
    let mut i_star = zero + 1;
    let mut relabelled = false;
    if i_star % 2 == 0 {
        let first = pts.remove(0);
        pts.push(first - TWO_PI);
        i_star -= 1;
        relabelled = true;
    }
    Ok(NodeSet { s: raw.len() / 2, labelled: pts, i_star, shift: -centre, relabelled })
}

impl NodeSet {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn count(&self) -> usize {
        2 * self.s
    }

    pub fn i_star(&self) -> usize {
        self.i_star
    }

    /// Translation that was added to the raw input.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn relabelled(&self) -> bool {
        self.relabelled
    }

    /// Nodes in label order `y_1, ..., y_{2s}`.
    pub fn labelled(&self) -> &[f64] {
        &self.labelled
    }

    /// `y_i` for any integer label.
    pub fn y(&self, i: i64) -> f64 {
        let count = self.count() as i64;
        let idx = (i - 1).rem_euclid(count);
        let wraps = (i - 1).div_euclid(count);
        self.labelled[idx as usize] - TWO_PI * wraps as f64
    }

    /// Half the distance from the node at 0 to its nearest neighbour.
    pub fn half_gap(&self) -> f64 {
        let i = self.i_star as i64;
        0.5 * self.y(i - 1).min(-self.y(i + 1))
    }

    /// `[y_i, y_{i-1}]` for `i = 1..=2s`; together one full period.
    pub fn intervals(&self) -> Vec<MonotoneInterval> {
        (1..=self.count())
            .map(|i| MonotoneInterval {
                label: i,
                left: self.y(i as i64),
                right: self.y(i as i64 - 1),
                sign: if i % 2 == 1 { 1.0 } else { -1.0 },
            })
            .collect()
    }

    /// `Pi(x) = prod_i sin((x - y_i) / 2)`.
    pub fn pi_product(&self) -> SineProduct {
        SineProduct::new(&self.labelled, None).expect("validated nodes")
    }

    /// `Pi_*(x)`: the same product without the factor of the node at 0.
    pub fn pi_star(&self) -> SineProduct {
        SineProduct::new(&self.labelled, Some(self.i_star - 1)).expect("validated nodes")
    }
}
