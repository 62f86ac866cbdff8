use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RadioError {
    #[error("radio model needs 0 < r_full < r_cut and falloff > 0 (got r_full={r_full}, r_cut={r_cut}, falloff={falloff})")]
    BadShape { r_full: f64, r_cut: f64, falloff: f64 },
    #[error("distance must be finite and non-negative, got {0}")]
    NegativeDistance(f64),
}

/// Distance-only reception model.
///
/// Reception is certain up to `r_full` and impossible from `r_cut` on. In between the
/// probability follows a complementary Gaussian tail centred on the midpoint with standard
/// deviation `falloff`, rescaled so that it hits exactly 1 and 0 at the two radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    r_full: f64,
    r_cut: f64,
    falloff: f64,
}

fn gaussian_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

impl RadioModel {
    pub fn new(r_full: f64, r_cut: f64, falloff: f64) -> Result<Self, RadioError> {
        let ok = r_full.is_finite()
            && r_cut.is_finite()
            && falloff.is_finite()
            && r_full > 0.0
            && r_cut > r_full
            && falloff > 0.0;
        if !ok {
            return Err(RadioError::BadShape {
                r_full,
                r_cut,
                falloff,
            });
        }
        Ok(RadioModel {
            r_full,
            r_cut,
            falloff,
        })
    }

    pub fn r_full(&self) -> f64 {
        self.r_full
    }

    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }

    pub fn falloff(&self) -> f64 {
        self.falloff
    }

    pub fn reception_probability(&self, distance: f64) -> Result<f64, RadioError> {
        if !(distance >= 0.0) || distance.is_infinite() {
            return Err(RadioError::NegativeDistance(distance));
        }
        if distance <= self.r_full {
            return Ok(1.0);
        }
        if distance >= self.r_cut {
            return Ok(0.0);
        }
        let mid = 0.5 * (self.r_full + self.r_cut);
        let tail = |d: f64| gaussian_tail((d - mid) / self.falloff);
        let lo = tail(self.r_cut);
        let hi = tail(self.r_full);
        Ok(((tail(distance) - lo) / (hi - lo)).clamp(0.0, 1.0))
    }
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel {
            r_full: 300.0,
            r_cut: 500.0,
            falloff: 50.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = RadioModel::default();
        assert_eq!(r.reception_probability(0.0).unwrap(), 1.0);
        assert_eq!(r.reception_probability(300.0).unwrap(), 1.0);
        assert_eq!(r.reception_probability(500.0).unwrap(), 0.0);
        assert_eq!(r.reception_probability(1000.0).unwrap(), 0.0);
        assert!((r.reception_probability(400.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(r.reception_probability(-1.0).is_err());
        assert!(r.reception_probability(f64::NAN).is_err());
    }

    #[test]
    fn monotone_and_continuous_at_edges() {
        let r = RadioModel::default();
        let mut prev = 1.0;
        for i in 0..=6000 {
            let d = i as f64 * 0.1;
            let p = r.reception_probability(d).unwrap();
            assert!(p <= prev + 1e-15, "not monotone at {d}");
            assert!((prev - p).abs() < 2e-3, "jump at {d}");
            prev = p;
        }
        // Symmetric about the midpoint.
        for off in [10.0, 50.0, 90.0] {
            let a = r.reception_probability(400.0 - off).unwrap();
            let b = r.reception_probability(400.0 + off).unwrap();
            assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_shape() {
        assert!(RadioModel::new(500.0, 300.0, 50.0).is_err());
        assert!(RadioModel::new(0.0, 300.0, 50.0).is_err());
        assert!(RadioModel::new(100.0, 300.0, 0.0).is_err());
    }
}
