use crate::error::{ensure_finite, Error, Result};
use crate::model::SectorPrior;

/// Probability that a CRQC arrives before `t0 + shelf_life`.
///
/// Logistic CDF in calendar time centred on the sector median year.
pub fn temporal_hazard(t0: f64, shelf_life: f64, prior: &SectorPrior) -> Result<f64> {
    ensure_finite("t0", t0)?;
    ensure_finite("T_D", shelf_life)?;
    ensure_finite("mu_s", prior.mu_s)?;
    ensure_finite("k", prior.k)?;
    if shelf_life <= 0.0 {
        return Err(Error::Domain(format!("T_D must be > 0, got {shelf_life}")));
    }
    if prior.k <= 0.0 {
        return Err(Error::Domain(format!("k must be > 0, got {}", prior.k)));
    }
    Ok(logistic(prior.k * (t0 + shelf_life - prior.mu_s)))
}

fn logistic(x: f64) -> f64 {
    // Written so that neither branch overflows.
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let ex = x.exp();
        ex / (1.0 + ex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior() -> SectorPrior {
        SectorPrior::new("generic", 2035.0)
    }

    #[test]
    fn midpoint_and_decile_points() {
        let p = prior();
        assert_eq!(temporal_hazard(2030.0, 5.0, &p).unwrap(), 0.5);
        assert!((temporal_hazard(2040.0, 5.0, &p).unwrap() - 0.9).abs() < 1e-12);
        assert!((temporal_hazard(2020.0, 5.0, &p).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn increasing_in_epoch_and_shelf_life() {
        let p = prior();
        let mut last = 0.0;
        for td in [0.5, 1.0, 5.0, 10.0, 30.0] {
            let h = temporal_hazard(2026.0, td, &p).unwrap();
            assert!(h > last && h < 1.0);
            last = h;
        }
        assert!(
            temporal_hazard(2027.0, 3.0, &p).unwrap() > temporal_hazard(2026.0, 3.0, &p).unwrap()
        );
    }

    #[test]
    fn extreme_arguments_stay_in_open_interval() {
        let p = prior();
        let lo = temporal_hazard(1000.0, 1.0, &p).unwrap();
        assert!(lo > 0.0 && lo < 1e-30);
        let hi = temporal_hazard(2030.0, 100.0, &p).unwrap();
        assert!(hi < 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = prior();
        assert!(matches!(temporal_hazard(f64::NAN, 1.0, &p), Err(Error::InvalidInput(_))));
        assert!(matches!(temporal_hazard(2026.0, 0.0, &p), Err(Error::Domain(_))));
        let flat = SectorPrior { k: 0.0, ..p };
        assert!(temporal_hazard(2026.0, 1.0, &flat).is_err());
    }
}
