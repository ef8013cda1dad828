//! Composite Gauss–Legendre quadrature.

/// Nodes and weights on `[-1, 1]` for orders 1 through 5.
pub fn gauss_legendre(order: usize) -> (&'static [f64], &'static [f64]) {
    match order {
        1 => (&[0.0], &[2.0]),
        2 => (
            &[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
            &[1.0, 1.0],
        ),
        3 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[0.555_555_555_555_555_6, 0.888_888_888_888_888_8, 0.555_555_555_555_555_6],
        ),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_9,
                0.652_145_154_862_546_1,
                0.652_145_154_862_546_1,
                0.347_854_845_137_453_9,
            ],
        ),
        5 => (
            &[
                -0.906_179_845_938_664,
                -0.538_469_310_105_683,
                0.0,
                0.538_469_310_105_683,
                0.906_179_845_938_664,
            ],
            &[
                0.236_926_885_056_189_1,
                0.478_628_670_499_366_5,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_5,
                0.236_926_885_056_189_1,
            ],
        ),
        _ => panic!("unsupported Gauss-Legendre order {order}"),
    }
}

/// Quadrature settings for expression-valued coefficients. Constant and
/// piecewise-constant coefficients are integrated exactly irrespective of
/// these settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre order per panel, 1..=5.
    pub order: usize,
    /// Panels per unit length for expression coefficients.
    pub panels_per_unit: f64,
    /// Minimum number of panels per integration interval.
    pub min_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            order: 5,
            panels_per_unit: 8.0,
            min_panels: 1,
        }
    }
}

impl QuadratureConfig {
    pub fn panels_for(&self, len: f64) -> usize {
        ((len * self.panels_per_unit).ceil() as usize).max(self.min_panels)
    }
}

/// Sums `f(x)` against composite Gauss weights over `[a, b]`. The closure
/// receives the node and its weight already scaled to the panel.
pub fn for_each_node(a: f64, b: f64, panels: usize, order: usize, mut f: impl FnMut(f64, f64)) {
    let (nodes, weights) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + width * k as f64;
        let hi = if k + 1 == panels { b } else { lo + width };
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&t, &wt) in nodes.iter().zip(weights) {
            f(mid + half * t, half * wt);
        }
    }
}

pub fn integrate(a: f64, b: f64, panels: usize, order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for_each_node(a, b, panels, order, |x, w| sum += w * f(x));
    sum
}
