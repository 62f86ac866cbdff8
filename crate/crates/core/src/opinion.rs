//! Binomial subjective-logic opinions and cumulative (consensus) fusion.
//!
//! An [`Opinion`] is a belief/disbelief/uncertainty triple that sums to one,
//! plus a base rate used when projecting it onto a probability. Values are
//! immutable and every operation is pure.

use std::fmt;

use thiserror::Error;

/// Tolerance used when checking that `b + d + u = 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Construction renormalizes sums within this distance of one and rejects the rest.
pub const REPAIR_TOLERANCE: f64 = 1e-6;

/// Base rate used everywhere in the simulator unless configured otherwise.
pub const DEFAULT_BASE_RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OpinionError {
    #[error("opinion component {name} = {value} is not a finite value in [0, 1]")]
    ComponentOutOfRange { name: &'static str, value: f64 },
    #[error("belief + disbelief + uncertainty = {sum}, expected 1")]
    BadSum { sum: f64 },
    #[error("cannot fuse opinions with different base rates ({left} vs {right})")]
    BaseRateMismatch { left: f64, right: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Opinion {
    belief: f64,
    disbelief: f64,
    uncertainty: f64,
    base_rate: f64,
}

fn check_unit(name: &'static str, value: f64, slack: f64) -> Result<f64, OpinionError> {
    if !value.is_finite() || value < -slack || value > 1.0 + slack {
        return Err(OpinionError::ComponentOutOfRange { name, value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Predicate form of the opinion invariants for a raw tuple.
pub fn validate(belief: f64, disbelief: f64, uncertainty: f64, base_rate: f64) -> bool {
    let in_unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
    in_unit(belief)
        && in_unit(disbelief)
        && in_unit(uncertainty)
        && in_unit(base_rate)
        && (belief + disbelief + uncertainty - 1.0).abs() <= SUM_TOLERANCE
}

impl Opinion {
    /// Builds an opinion. Sums within [`SUM_TOLERANCE`] of one are kept as given; sums off by
    /// at most [`REPAIR_TOLERANCE`] are renormalized; anything further out is rejected.
    pub fn new(
        belief: f64,
        disbelief: f64,
        uncertainty: f64,
        base_rate: f64,
    ) -> Result<Self, OpinionError> {
        let b = check_unit("belief", belief, REPAIR_TOLERANCE)?;
        let d = check_unit("disbelief", disbelief, REPAIR_TOLERANCE)?;
        let u = check_unit("uncertainty", uncertainty, REPAIR_TOLERANCE)?;
        let a = check_unit("base_rate", base_rate, 0.0)?;
        let sum = b + d + u;
        if (sum - 1.0).abs() > REPAIR_TOLERANCE {
            return Err(OpinionError::BadSum { sum });
        }
        let scale = if (sum - 1.0).abs() <= SUM_TOLERANCE { 1.0 } else { sum };
        Ok(Opinion {
            belief: b / scale,
            disbelief: d / scale,
            uncertainty: u / scale,
            base_rate: a,
        })
    }

    /// The opinion with no evidence at all: `(0, 0, 1, base_rate)`.
    pub fn vacuous(base_rate: f64) -> Result<Self, OpinionError> {
        let a = check_unit("base_rate", base_rate, 0.0)?;
        Ok(Opinion {
            belief: 0.0,
            disbelief: 0.0,
            uncertainty: 1.0,
            base_rate: a,
        })
    }

    pub fn belief(&self) -> f64 {
        self.belief
    }

    pub fn disbelief(&self) -> f64 {
        self.disbelief
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }

    pub fn base_rate(&self) -> f64 {
        self.base_rate
    }

    pub fn is_vacuous(&self) -> bool {
        self.uncertainty == 1.0
    }

    pub fn is_dogmatic(&self) -> bool {
        self.uncertainty == 0.0
    }

    /// Re-checks the invariants. Always true for values built through [`Opinion::new`].
    pub fn validate(&self) -> bool {
        validate(self.belief, self.disbelief, self.uncertainty, self.base_rate)
    }

    /// Projected probability `b + u * a`.
    pub fn expectation(&self) -> f64 {
        self.belief + self.uncertainty * self.base_rate
    }

    /// Cumulative (consensus) fusion of two independent opinions about the same statement.
    ///
    /// Two dogmatic inputs (`u = 0` on both sides) make the normalizer vanish; that case
    /// returns the componentwise average instead.
    pub fn fuse(&self, other: &Opinion) -> Result<Opinion, OpinionError> {
        if self.base_rate != other.base_rate {
            return Err(OpinionError::BaseRateMismatch {
                left: self.base_rate,
                right: other.base_rate,
            });
        }
        let (ua, ub) = (self.uncertainty, other.uncertainty);
        let k = ua + ub - ua * ub;
        if k == 0.0 {
            return Opinion::new(
                (self.belief + other.belief) / 2.0,
                (self.disbelief + other.disbelief) / 2.0,
                0.0,
                self.base_rate,
            );
        }
        Opinion::new(
            (self.belief * ub + other.belief * ua) / k,
            (self.disbelief * ub + other.disbelief * ua) / k,
            (ua * ub) / k,
            self.base_rate,
        )
    }

    /// Four fields `belief,disbelief,uncertainty,base_rate`, 9 significant digits each.
    pub fn to_csv_fields(&self) -> String {
        format!(
            "{},{},{},{}",
            format_sig9(self.belief),
            format_sig9(self.disbelief),
            format_sig9(self.uncertainty),
            format_sig9(self.base_rate)
        )
    }
}

impl fmt::Display for Opinion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.6}, {:.6}, {:.6}, {:.6})",
            self.belief, self.disbelief, self.uncertainty, self.base_rate
        )
    }
}

/// Left fold of [`Opinion::fuse`]. An empty input yields the vacuous opinion with base rate 1/2.
pub fn fuse_all<'a, I>(opinions: I) -> Result<Opinion, OpinionError>
where
    I: IntoIterator<Item = &'a Opinion>,
{
    let mut iter = opinions.into_iter();
    let Some(first) = iter.next() else {
        return Opinion::vacuous(DEFAULT_BASE_RATE);
    };
    iter.try_fold(*first, |acc, next| acc.fuse(next))
}

/// Decimal text with 9 significant digits, no exponent.
pub fn format_sig9(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return if value.is_finite() {
            "0".to_string()
        } else {
            value.to_string()
        };
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, value)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn op(b: f64, d: f64, u: f64) -> Opinion {
        Opinion::new(b, d, u, 0.5).unwrap()
    }

    fn assert_close(a: &Opinion, b: &Opinion, tol: f64) {
        assert!((a.belief() - b.belief()).abs() <= tol, "{a} vs {b}");
        assert!((a.disbelief() - b.disbelief()).abs() <= tol, "{a} vs {b}");
        assert!((a.uncertainty() - b.uncertainty()).abs() <= tol, "{a} vs {b}");
        assert_eq!(a.base_rate(), b.base_rate());
    }

    #[test]
    fn validate_examples() {
        assert!(validate(0.3, 0.2, 0.5, 0.5));
        assert!(!validate(0.5, 0.5, 0.5, 0.5));
        assert!(validate(0.0, 0.0, 1.0, 0.5));
        assert!(!validate(-0.1, 0.6, 0.5, 0.5));
        assert!(!validate(0.3, 0.2, 0.5, 1.5));
        assert!(!validate(f64::NAN, 0.5, 0.5, 0.5));
    }

    #[test]
    fn construction_repairs_small_drift_and_rejects_large() {
        let o = Opinion::new(0.3 + 5e-7, 0.2, 0.5, 0.5).unwrap();
        assert!(o.validate());
        assert!((o.belief() + o.disbelief() + o.uncertainty() - 1.0).abs() < 1e-15);
        let g = (-8.0f64).exp();
        let kept = Opinion::new(1.0 - g, 0.0, g, 0.5).unwrap();
        assert_eq!(kept.uncertainty(), g);
        assert!(matches!(
            Opinion::new(0.5, 0.5, 0.5, 0.5),
            Err(OpinionError::BadSum { .. })
        ));
        assert!(matches!(
            Opinion::new(0.5, 0.5, 0.0, 1.2),
            Err(OpinionError::ComponentOutOfRange { name: "base_rate", .. })
        ));
        assert!(Opinion::new(1.1, -0.1, 0.0, 0.5).is_err());
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(op(1.0, 0.0, 0.0).expectation(), 1.0);
        assert_eq!(op(0.0, 0.0, 1.0).expectation(), 0.5);
        assert!((op(0.6, 0.2, 0.2).expectation() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn vacuous_examples() {
        for a in [0.5, 0.0, 1.0] {
            let v = Opinion::vacuous(a).unwrap();
            assert_eq!((v.belief(), v.disbelief(), v.uncertainty(), v.base_rate()), (0.0, 0.0, 1.0, a));
            assert_eq!(v.expectation(), a);
        }
        assert!(Opinion::vacuous(-0.01).is_err());
        assert!(Opinion::vacuous(1.5).is_err());
    }

    #[test]
    fn fuse_with_vacuous_is_identity() {
        let x = op(0.3, 0.3, 0.4);
        let v = Opinion::vacuous(0.5).unwrap();
        assert_close(&x.fuse(&v).unwrap(), &x, 1e-15);
        assert_close(&v.fuse(&x).unwrap(), &x, 1e-15);
    }

    #[test]
    fn fuse_hand_evaluated() {
        // k = 0.5 + 0.5 - 0.25 = 0.75, every numerator is 0.25.
        let r = op(0.5, 0.0, 0.5).fuse(&op(0.0, 0.5, 0.5)).unwrap();
        let third = 1.0 / 3.0;
        assert_close(&r, &op(third, third, third), 1e-12);
    }

    #[test]
    fn fuse_dogmatic_pair_averages() {
        let r = op(1.0, 0.0, 0.0).fuse(&op(0.0, 1.0, 0.0)).unwrap();
        assert_close(&r, &op(0.5, 0.5, 0.0), 0.0);
        let r = op(0.8, 0.2, 0.0).fuse(&op(0.8, 0.2, 0.0)).unwrap();
        assert_close(&r, &op(0.8, 0.2, 0.0), 1e-15);
    }

    #[test]
    fn fuse_one_dogmatic_side_wins() {
        let r = op(0.9, 0.1, 0.0).fuse(&op(0.0, 0.5, 0.5)).unwrap();
        assert_close(&r, &op(0.9, 0.1, 0.0), 1e-15);
    }

    #[test]
    fn fuse_rejects_base_rate_mismatch() {
        let a = Opinion::new(0.2, 0.2, 0.6, 0.5).unwrap();
        let b = Opinion::new(0.2, 0.2, 0.6, 0.3).unwrap();
        assert!(matches!(a.fuse(&b), Err(OpinionError::BaseRateMismatch { .. })));
    }

    #[test]
    fn fuse_all_examples() {
        let empty: [Opinion; 0] = [];
        assert_eq!(fuse_all(&empty).unwrap(), Opinion::vacuous(0.5).unwrap());
        let x = op(0.1, 0.6, 0.3);
        assert_eq!(fuse_all(&[x]).unwrap(), x);
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(0.5), "0.500000000");
        assert_eq!(format_sig9(1.0), "1.00000000");
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(3.3546262790251185e-4), "0.000335462628");
        assert_eq!(op(0.0, 0.0, 1.0).to_csv_fields(), "0,0,1.00000000,0.500000000");
    }

    fn arb_opinion() -> impl Strategy<Value = Opinion> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(x, y)| {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            Opinion::new(lo, hi - lo, 1.0 - hi, 0.5).unwrap()
        })
    }

    fn arb_uncertain() -> impl Strategy<Value = Opinion> {
        arb_opinion().prop_filter("non-dogmatic", |o| o.uncertainty() > 1e-3)
    }

    proptest! {
        #[test]
        fn fusion_is_closed_and_commutative(x in arb_opinion(), y in arb_opinion()) {
            let xy = x.fuse(&y).unwrap();
            let yx = y.fuse(&x).unwrap();
            prop_assert!(xy.validate());
            prop_assert!((xy.belief() - yx.belief()).abs() <= 1e-12);
            prop_assert!((xy.disbelief() - yx.disbelief()).abs() <= 1e-12);
            prop_assert!((xy.uncertainty() - yx.uncertainty()).abs() <= 1e-12);
        }

        #[test]
        fn fusion_reduces_uncertainty(x in arb_opinion(), y in arb_opinion()) {
            let r = x.fuse(&y).unwrap();
            prop_assert!(r.uncertainty() <= x.uncertainty().min(y.uncertainty()) + 1e-12);
        }

        #[test]
        fn fusion_is_associative_away_from_dogmatism(
            x in arb_uncertain(), y in arb_uncertain(), z in arb_uncertain()
        ) {
            let l = x.fuse(&y).unwrap().fuse(&z).unwrap();
            let r = x.fuse(&y.fuse(&z).unwrap()).unwrap();
            prop_assert!((l.belief() - r.belief()).abs() <= 1e-9);
            prop_assert!((l.disbelief() - r.disbelief()).abs() <= 1e-9);
            prop_assert!((l.uncertainty() - r.uncertainty()).abs() <= 1e-9);
        }

        #[test]
        fn fuse_all_ignores_order(ops in prop::collection::vec(arb_uncertain(), 4)) {
            let reference = fuse_all(&ops).unwrap();
            for p in [[3, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1], [0, 2, 1, 3]] {
                let shuffled: Vec<Opinion> = p.iter().map(|&i| ops[i]).collect();
                let r = fuse_all(&shuffled).unwrap();
                prop_assert!((r.expectation() - reference.expectation()).abs() <= 1e-9);
                prop_assert!((r.uncertainty() - reference.uncertainty()).abs() <= 1e-9);
            }
        }

        #[test]
        fn vacuous_expectation_is_base_rate(a in 0.0f64..=1.0) {
            prop_assert_eq!(Opinion::vacuous(a).unwrap().expectation(), a);
        }
    }
}
