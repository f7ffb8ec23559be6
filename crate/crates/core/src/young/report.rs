//! Empirical verification of Young-function properties on sample grids.
//!
//! Every boolean in a [`YoungReport`] is decided by explicit sampled checks
//! with the worst margin recorded; nothing is inferred from the declared
//! family metadata.

use serde::{Deserialize, Serialize};

use super::{log_sample, YoungFunction};

/// Margins below this (relative) threshold count as violations. Inequalities
/// checked here are exact in real arithmetic; the slack absorbs roundoff and
/// the 1e-8-level quadrature behind `G`, `G*`.
const MARGIN_TOL: f64 = 1e-7;

/// Outcome of one sampled inequality: worst normalized margin (negative
/// means violated beyond tolerance) and where it occurred.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub holds: bool,
    /// min over the sample of (rhs − lhs) / max(1, |rhs|)
    pub worst_margin: f64,
    /// sample point (t, partner) realizing the worst margin
    pub worst_at: (f64, f64),
}

impl PropertyCheck {
    fn new() -> Self {
        Self {
            holds: true,
            worst_margin: f64::INFINITY,
            worst_at: (f64::NAN, f64::NAN),
        }
    }

    fn update(&mut self, lhs: f64, rhs: f64, at: (f64, f64)) {
        let margin = (rhs - lhs) / rhs.abs().max(1.0);
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_at = at;
        }
        if margin < -MARGIN_TOL {
            self.holds = false;
        }
    }
}

/// Sampled verification record for one Young function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct YoungReport {
    pub family: String,
    pub declared_p_minus: f64,
    pub declared_p_plus: f64,
    /// Observed range of t·g(t)/G(t) over the sample.
    pub observed_inf: f64,
    pub observed_sup: f64,
    /// 1 < p⁻ ≤ t·g/G ≤ p⁺, the two-sided growth condition.
    pub growth: PropertyCheck,
    /// p⁻ − 1 ≤ t·g'/g ≤ p⁺ − 1; only checked when g' is available.
    pub lieberman: Option<PropertyCheck>,
    /// min{σ^{p⁻}, σ^{p⁺}} G(t) ≤ G(σt) ≤ max{σ^{p⁻}, σ^{p⁺}} G(t).
    pub scaling_sandwich: PropertyCheck,
    /// G(s + t) ≤ 2^{p⁺} (G(s) + G(t)).
    pub doubling: PropertyCheck,
    /// s·t ≤ G(s) + G*(t).
    pub young_inequality: PropertyCheck,
    /// |G(s) − G(t)| ≤ g(max(s, t)) |s − t|.
    pub lipschitz: PropertyCheck,
    /// G*(g(t)) ≤ p⁺ G(t).
    pub conjugate_duality: PropertyCheck,
}

impl YoungReport {
    /// True when every sampled property held.
    pub fn all_hold(&self) -> bool {
        self.growth.holds
            && self.lieberman.map(|c| c.holds).unwrap_or(true)
            && self.scaling_sandwich.holds
            && self.doubling.holds
            && self.young_inequality.holds
            && self.lipschitz.holds
            && self.conjugate_duality.holds
    }
}

/// Check the sampled inequalities for `f` over `sample` (positive,
/// preferably log-spaced over [1e-4, 1e4]; see [`default_sample`]).
///
/// Pointwise properties run over the full sample. Two-point properties pair
/// every sample point with a fixed 128-point log-spaced partner grid plus
/// the point itself, which keeps the cost linear in the sample size.
pub fn verify_properties(f: &YoungFunction, sample: &[f64]) -> YoungReport {
    assert!(!sample.is_empty(), "sample must be nonempty");
    assert!(
        sample.iter().all(|t| *t > 0.0 && t.is_finite()),
        "sample must be positive and finite"
    );

    let partners = log_sample(1e-3, 1e3, 128);
    let p_minus = f.p_minus();
    let p_plus = f.p_plus();
    let c_doubling = 2f64.powf(p_plus);

    let mut observed_inf = f64::INFINITY;
    let mut observed_sup = f64::NEG_INFINITY;
    let mut growth = PropertyCheck::new();
    let mut lieberman = Some(PropertyCheck::new());
    let mut scaling = PropertyCheck::new();
    let mut doubling = PropertyCheck::new();
    let mut young = PropertyCheck::new();
    let mut lipschitz = PropertyCheck::new();
    let mut duality = PropertyCheck::new();

    // conjugate values on the partner grid, reused across the pair loop
    let gstar: Vec<f64> = partners.iter().map(|t| f.conjugate(*t)).collect();
    let g_partner: Vec<f64> = partners.iter().map(|t| f.deriv(*t)).collect();
    let val_partner: Vec<f64> = partners.iter().map(|t| f.value(*t)).collect();

    for &t in sample {
        let gt = f.value(t);
        let dt = f.deriv(t);

        // growth condition
        let ratio = t * dt / gt;
        observed_inf = observed_inf.min(ratio);
        observed_sup = observed_sup.max(ratio);
        growth.update(p_minus, ratio, (t, f64::NAN));
        growth.update(ratio, p_plus, (t, f64::NAN));

        // Lieberman condition, when g' exists
        if let Some(check) = lieberman.as_mut() {
            match f.deriv2(t) {
                Some(d2) => {
                    let lr = t * d2 / dt;
                    check.update(p_minus - 1.0, lr, (t, f64::NAN));
                    check.update(lr, p_plus - 1.0, (t, f64::NAN));
                }
                None => lieberman = None,
            }
        }

        // conjugate duality
        duality.update(f.conjugate(dt), p_plus * gt, (t, f64::NAN));

        for (k, &w) in partners.iter().enumerate() {
            // scaling sandwich with σ = w
            let scaled = f.value(w * t);
            let lo = w.powf(p_minus).min(w.powf(p_plus)) * gt;
            let hi = w.powf(p_minus).max(w.powf(p_plus)) * gt;
            scaling.update(lo, scaled, (t, w));
            scaling.update(scaled, hi, (t, w));

            // doubling
            doubling.update(f.value(t + w), c_doubling * (gt + val_partner[k]), (t, w));

            // Young inequality
            young.update(t * w, gt + gstar[k], (t, w));

            // Lipschitz with the larger density
            lipschitz.update(
                (gt - val_partner[k]).abs(),
                dt.max(g_partner[k]) * (t - w).abs(),
                (t, w),
            );
        }

        // σ = 1 edge of the sandwich and the diagonal Young pair
        scaling.update(gt, gt, (t, 1.0));
        young.update(t * t, gt + f.conjugate(t), (t, t));
    }

    YoungReport {
        family: f.describe(),
        declared_p_minus: p_minus,
        declared_p_plus: p_plus,
        observed_inf,
        observed_sup,
        growth,
        lieberman,
        scaling_sandwich: scaling,
        doubling,
        young_inequality: young,
        lipschitz,
        conjugate_duality: duality,
    }
}

/// The recommended verification sample: log-spaced over [1e-4, 1e4].
pub fn default_sample(n: usize) -> Vec<f64> {
    log_sample(1e-4, 1e4, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::YoungFunction;

    #[test]
    fn power_two_ratio_is_exactly_two() {
        let f = YoungFunction::power(2.0).unwrap();
        let report = verify_properties(&f, &default_sample(400));
        assert!(report.all_hold(), "{report:?}");
        assert!((report.observed_inf - 2.0).abs() < 1e-12);
        assert!((report.observed_sup - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_log_observed_range() {
        let f = YoungFunction::power_log(1.0, 1.0, 1.0).unwrap();
        let report = verify_properties(&f, &default_sample(600));
        assert!(report.all_hold(), "{report:?}");
        assert!(report.observed_inf >= 2.0 - 1e-6, "{}", report.observed_inf);
        assert!(report.observed_sup <= 3.0 + 1e-6, "{}", report.observed_sup);
        assert!(report.lieberman.unwrap().holds);
    }

    #[test]
    fn young_inequality_equality_case() {
        // s = t = 1 for t²/2: 1 ≤ 1/2 + 1/2 with equality
        let f = YoungFunction::power(2.0).unwrap();
        let gstar = f.conjugate(1.0);
        let lhs = 1.0;
        let rhs = f.value(1.0) + gstar;
        assert!((lhs - rhs).abs() < 1e-7);
    }

    #[test]
    fn spliced_and_combined_families_pass() {
        let spliced = YoungFunction::spliced_power(1.0, 2.0, 1.0).unwrap();
        let report = verify_properties(&spliced, &default_sample(300));
        assert!(report.all_hold(), "{report:?}");
        assert!(report.observed_inf >= 2.0 - 1e-6);
        assert!(report.observed_sup <= 3.0 + 1e-6);

        let prod = YoungFunction::product(
            YoungFunction::power(2.0).unwrap(),
            YoungFunction::power(3.0).unwrap(),
        )
        .unwrap();
        let report = verify_properties(&prod, &default_sample(120));
        assert!(report.all_hold(), "{report:?}");
    }
}
