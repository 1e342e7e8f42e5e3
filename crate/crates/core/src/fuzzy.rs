//! Gaussian memberships over time-of-day and 2-D position, product inference,
//! and center-average defuzzification. Inputs are crisp (singleton fuzzifier),
//! so a rule's activation is just the product of its antecedent memberships
//! evaluated at the input.

use crate::geometry::Point;

/// Exponent coefficient of the time-of-day membership Gaussians.
pub const TIME_SPREAD: f64 = 0.2;
/// Exponent coefficient of the place membership Gaussians.
pub const PLACE_SPREAD: f64 = 1e-4;

/// Membership of hour-of-day `t` in the set centered at `center` (both in hours).
pub fn time_membership(t: f64, center: f64) -> f64 {
    let d = t - center;
    (-TIME_SPREAD * d * d).exp()
}

/// Membership of position `p` in the set centered at `center`.
pub fn place_membership(p: Point, center: Point) -> f64 {
    (-PLACE_SPREAD * p.distance_squared(center)).exp()
}

/// Center-average defuzzifier over `(center, weight)` pairs:
/// sum(center * weight) / sum(weight). `None` when the total weight
/// underflows: zero, or subnormal — a subnormal total has so few significand
/// bits left that the quotient can drift outside the convex hull of the
/// centers.
pub fn defuzzify(pairs: &[(f64, f64)]) -> Option<f64> {
    let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
    if total < f64::MIN_POSITIVE {
        return None;
    }
    Some(pairs.iter().map(|&(c, w)| c * w).sum::<f64>() / total)
}

/// One rule: IF time is near `time_center` AND place is near `place_center`
/// THEN the output point is `consequent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyRule {
    pub time_center: f64,
    pub place_center: Point,
    pub consequent: Point,
}

/// A complete rule base evaluated over crisp `(hour, position)` inputs.
#[derive(Debug, Clone)]
pub struct FuzzySystem {
    rules: Vec<FuzzyRule>,
}

impl FuzzySystem {
    pub fn new(rules: Vec<FuzzyRule>) -> Self {
        FuzzySystem { rules }
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    /// Product-inference activation of every rule at the crisp input.
    pub fn activations(&self, t: f64, p: Point) -> Vec<f64> {
        self.rules
            .iter()
            .map(|r| time_membership(t, r.time_center) * place_membership(p, r.place_center))
            .collect()
    }

    /// Closed-form output: the activation-weighted mean of the consequent
    /// points, accumulated in one pass. `None` when the summed activations
    /// underflow (zero or subnormal), mirroring [`defuzzify`].
    pub fn evaluate(&self, t: f64, p: Point) -> Option<Point> {
        let mut total = 0.0;
        let mut x = 0.0;
        let mut y = 0.0;
        for r in &self.rules {
            let w = time_membership(t, r.time_center) * place_membership(p, r.place_center);
            total += w;
            x += w * r.consequent.x;
            y += w * r.consequent.y;
        }
        if total < f64::MIN_POSITIVE {
            return None;
        }
        Some(Point::new(x / total, y / total))
    }

    /// The same output computed by explicit stages — singleton fuzzification,
    /// per-rule product inference, then coordinate-wise center-average
    /// defuzzification — kept separate from [`evaluate`](Self::evaluate) so the
    /// two can be checked against each other.
    pub fn evaluate_pipeline(&self, t: f64, p: Point) -> Option<Point> {
        let weights = self.activations(t, p);
        let xs: Vec<(f64, f64)> = self
            .rules
            .iter()
            .zip(&weights)
            .map(|(r, &w)| (r.consequent.x, w))
            .collect();
        let ys: Vec<(f64, f64)> = self
            .rules
            .iter()
            .zip(&weights)
            .map(|(r, &w)| (r.consequent.y, w))
            .collect();
        Some(Point::new(defuzzify(&xs)?, defuzzify(&ys)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn time_membership_reference_values() {
        assert_abs_diff_eq!(time_membership(10.0, 8.0), (-0.8f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(time_membership(10.0, 8.0), 0.449329, epsilon = 1e-6);
        assert_abs_diff_eq!(time_membership(12.0, 17.0), (-5.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(time_membership(12.0, 17.0), 0.006738, epsilon = 1e-6);
        assert_abs_diff_eq!(time_membership(12.0, 12.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn place_membership_reference_values() {
        let center = Point::new(7500.0, 6500.0);
        assert_abs_diff_eq!(
            place_membership(Point::new(7600.0, 6500.0), center),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            place_membership(Point::new(7500.0, 6550.0), center),
            0.778801,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(place_membership(center, center), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn defuzzify_weighted_mean() {
        assert_eq!(defuzzify(&[(0.0, 1.0), (10.0, 3.0)]), Some(7.5));
        assert_eq!(defuzzify(&[(4.2, 1.0)]), Some(4.2));
        assert_eq!(defuzzify(&[(1.0, 0.0), (2.0, 0.0)]), None);
        assert_eq!(defuzzify(&[]), None);
    }

    #[test]
    fn two_rule_blend_matches_hand_arithmetic() {
        // Chosen so the first rule fires at exp(-0.8) and the second at
        // exp(-0.2), both with full place membership.
        let place = Point::new(500.0, 500.0);
        let sys = FuzzySystem::new(vec![
            FuzzyRule {
                time_center: 8.0,
                place_center: place,
                consequent: Point::new(0.0, 0.0),
            },
            FuzzyRule {
                time_center: 11.0,
                place_center: place,
                consequent: Point::new(8000.0, 6000.0),
            },
        ]);
        let w1 = (-0.8f64).exp();
        let w2 = (-0.2f64).exp();
        let expect_x = (w1 * 0.0 + w2 * 8000.0) / (w1 + w2);
        let expect_y = (w1 * 0.0 + w2 * 6000.0) / (w1 + w2);
        let got = sys.evaluate(10.0, place).unwrap();
        assert_abs_diff_eq!(got.x, expect_x, epsilon = 1e-9);
        assert_abs_diff_eq!(got.y, expect_y, epsilon = 1e-9);
        let staged = sys.evaluate_pipeline(10.0, place).unwrap();
        assert_abs_diff_eq!(staged.x, expect_x, epsilon = 1e-9);
        assert_abs_diff_eq!(staged.y, expect_y, epsilon = 1e-9);
    }

    #[test]
    fn single_rule_returns_its_consequent() {
        let sys = FuzzySystem::new(vec![FuzzyRule {
            time_center: 12.0,
            place_center: Point::new(100.0, 100.0),
            consequent: Point::new(4800.0, 1460.0),
        }]);
        let out = sys.evaluate(3.0, Point::new(900.0, 50.0)).unwrap();
        assert_abs_diff_eq!(out.x, 4800.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.y, 1460.0, epsilon = 1e-9);
    }

    #[test]
    fn far_inputs_underflow_to_none() {
        let sys = FuzzySystem::new(vec![FuzzyRule {
            time_center: 8.0,
            place_center: Point::new(0.0, 0.0),
            consequent: Point::new(1.0, 1.0),
        }]);
        // exp(-1e-4 * 1e10) underflows to zero.
        assert_eq!(sys.evaluate(8.0, Point::new(100_000.0, 0.0)), None);
        assert_eq!(sys.evaluate_pipeline(8.0, Point::new(100_000.0, 0.0)), None);
    }

    fn arb_rule() -> impl Strategy<Value = FuzzyRule> {
        (
            0.0..24.0f64,
            0.0..10_000.0f64,
            0.0..10_000.0f64,
            0.0..10_000.0f64,
            0.0..10_000.0f64,
        )
            .prop_map(|(t, px, py, cx, cy)| FuzzyRule {
                time_center: t,
                place_center: Point::new(px, py),
                consequent: Point::new(cx, cy),
            })
    }

    proptest! {
        #[test]
        fn closed_form_equals_staged_pipeline(
            rules in proptest::collection::vec(arb_rule(), 1..24),
            t in 0.0..24.0f64,
            x in 0.0..10_000.0f64,
            y in 0.0..10_000.0f64,
        ) {
            let sys = FuzzySystem::new(rules);
            let p = Point::new(x, y);
            match (sys.evaluate(t, p), sys.evaluate_pipeline(t, p)) {
                (Some(a), Some(b)) => {
                    prop_assert!((a.x - b.x).abs() < 1e-9);
                    prop_assert!((a.y - b.y).abs() < 1e-9);
                }
                (None, None) => {}
                (a, b) => prop_assert!(false, "disagree: {a:?} vs {b:?}"),
            }
        }

        #[test]
        fn output_stays_in_consequent_bounding_box(
            rules in proptest::collection::vec(arb_rule(), 1..24),
            t in 0.0..24.0f64,
            x in 0.0..10_000.0f64,
            y in 0.0..10_000.0f64,
        ) {
            let sys = FuzzySystem::new(rules);
            if let Some(out) = sys.evaluate(t, Point::new(x, y)) {
                let lo_x = sys.rules().iter().map(|r| r.consequent.x).fold(f64::INFINITY, f64::min);
                let hi_x = sys.rules().iter().map(|r| r.consequent.x).fold(f64::NEG_INFINITY, f64::max);
                let lo_y = sys.rules().iter().map(|r| r.consequent.y).fold(f64::INFINITY, f64::min);
                let hi_y = sys.rules().iter().map(|r| r.consequent.y).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(out.x >= lo_x - 1e-9 && out.x <= hi_x + 1e-9);
                prop_assert!(out.y >= lo_y - 1e-9 && out.y <= hi_y + 1e-9);
            }
        }

        #[test]
        fn defuzzify_scale_invariant_in_weights(
            pairs in proptest::collection::vec((0.0..1000.0f64, 1e-3..1.0f64), 1..12),
            scale in 1e-3..1e3f64,
        ) {
            let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(c, w)| (c, w * scale)).collect();
            let a = defuzzify(&pairs).unwrap();
            let b = defuzzify(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }
}
