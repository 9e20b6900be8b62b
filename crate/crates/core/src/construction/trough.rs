//! Cut-off functions vanishing near 0 and equal to 1 away from it.

use serde::{Deserialize, Serialize};

use crate::numerics::wrap_to_period;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TroughShape {
    #[default]
    PiecewiseLinear,
    /// Degree-9 ramp with four vanishing derivatives at both ends.
    C4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "side", rename_all = "lowercase")]
pub enum TroughSide {
    Right,
    Left,
    Combined { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TroughSpec {
    pub side: TroughSide,
    pub b: f64,
    pub m_bar: f64,
    pub shape: TroughShape,
}

impl TroughShape {
    /// Monotone ramp from 0 at `u = 0` to 1 at `u = 1`.
    pub fn ramp(self, u: f64) -> f64 {
        match self {
            TroughShape::PiecewiseLinear => u,
            TroughShape::C4 => {
                let u5 = u.powi(5);
                u5 * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + 70.0 * u))))
            }
        }
    }
}

impl TroughSpec {
    pub fn new(side: TroughSide, b: f64, m_bar: f64, shape: TroughShape) -> Self {
        Self { side, b, m_bar, shape }
    }

    /// Right trough: 0 on `[-M b/2, b]`, 1 on `[-pi, -M b] u [2b, pi]`.
    fn right(&self, x: f64) -> f64 {
        let (b, wide) = (self.b, self.m_bar * self.b);
        if (-0.5 * wide..=b).contains(&x) {
            0.0
        } else if x <= -wide || x >= 2.0 * b {
            1.0
        } else if x < 0.0 {
            self.shape.ramp((-0.5 * wide - x) / (0.5 * wide))
        } else {
            self.shape.ramp((x - b) / b)
        }
    }

    /// `1 - right(x)`, using `1 - ramp(u) = ramp(1 - u)` to avoid
    /// cancellation where the trough approaches 1.
    fn right_deficit(&self, x: f64) -> f64 {
        let (b, wide) = (self.b, self.m_bar * self.b);
        if (-0.5 * wide..=b).contains(&x) {
            1.0
        } else if x <= -wide || x >= 2.0 * b {
            0.0
        } else if x < 0.0 {
            self.shape.ramp((x + wide) / (0.5 * wide))
        } else {
            self.shape.ramp((2.0 * b - x) / b)
        }
    }

    /// `1 - K(x)`, accurate where `K` is close to 1.
    pub fn deficit(&self, x: f64) -> f64 {
        let x = wrap_to_period(x);
        match self.side {
            TroughSide::Right => self.right_deficit(x),
            TroughSide::Left => self.right_deficit(-x),
            TroughSide::Combined { gamma } => {
                let (r, l) = (self.right_deficit(x), self.right_deficit(-x));
                if r == l {
                    r
                } else {
                    gamma * r + (1.0 - gamma) * l
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = wrap_to_period(x);
        match self.side {
            TroughSide::Right => self.right(x),
            TroughSide::Left => self.right(-x),
            TroughSide::Combined { gamma } => {
                let (r, l) = (self.right(x), self.right(-x));
                if r == l {
                    r
                } else {
                    gamma * r + (1.0 - gamma) * l
                }
            }
        }
    }

    /// Kinks of the trough inside `(-pi, pi)`, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (b, wide) = (self.b, self.m_bar * self.b);
        let right = [-wide, -0.5 * wide, b, 2.0 * b];
        let mut pts: Vec<f64> = match self.side {
            TroughSide::Right => right.to_vec(),
            TroughSide::Left => right.iter().map(|x| -x).collect(),
            TroughSide::Combined { .. } => right.iter().flat_map(|&x| [x, -x]).collect(),
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Support of `1 - K`: outside this interval the trough equals 1.
    pub fn transition_window(&self) -> (f64, f64) {
        let wide = self.m_bar * self.b;
        match self.side {
            TroughSide::Right => (-wide, 2.0 * self.b),
            TroughSide::Left => (-2.0 * self.b, wide),
            TroughSide::Combined { .. } => (-wide, wide),
        }
    }
}
