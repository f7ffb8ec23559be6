//! Young functions: construction, combination, duality and limits.
//!
//! A Young function `G(t) = ∫₀ᵗ g(s) ds` is described by its right-continuous
//! density `g` with `g(0) = 0`, `g > 0` on `(0, ∞)`, `g` nondecreasing and
//! unbounded. Every constructor here also tracks growth exponents
//! `1 < p⁻ ≤ t·g(t)/G(t) ≤ p⁺ < ∞`, which the rest of the crate relies on for
//! bracketing, step sizing and a-priori bounds. The empirical verifier in
//! [`report`] cross-checks the declared exponents on samples.

mod report;

pub use report::{verify_properties, PropertyCheck, YoungReport};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Relative tolerance for every quadrature-backed evaluation in this module.
const QUAD_REL_TOL: f64 = 1e-9;
/// Absolute floor below which quadrature refinement stops.
const QUAD_ABS_TOL: f64 = 1e-14;

/// A Young function together with its density and growth exponents.
///
/// Values are immutable after construction and cheap to clone (combined
/// families share their lookup tables through `Arc`).
#[derive(Clone, Debug)]
pub struct YoungFunction {
    repr: Repr,
    p_minus: f64,
    p_plus: f64,
}

#[derive(Clone, Debug)]
enum Repr {
    /// g(t) = t^{p-1}, G(t) = t^p / p.
    Power { p: f64 },
    /// g(t) = t^a · log(b + c t); closed-form G for a = 1, table otherwise.
    PowerLog {
        a: f64,
        b: f64,
        c: f64,
        table: Option<Arc<CumTable>>,
    },
    /// C¹ splice of two power densities: g = c₁ t^{a₁} below the splice
    /// point, g = c₂ t^{a₂} + offset above it.
    Spliced {
        a1: f64,
        a2: f64,
        splice: f64,
        c1: f64,
        c2: f64,
        offset: f64,
    },
    /// g = w₁ g₁ + w₂ g₂.
    Sum {
        parts: Box<(YoungFunction, YoungFunction)>,
        weights: [f64; 2],
    },
    /// g = g₁ · g₂.
    Product {
        parts: Box<(YoungFunction, YoungFunction)>,
        table: Arc<CumTable>,
    },
    /// g = g₁ ∘ g₂.
    Composition {
        parts: Box<(YoungFunction, YoungFunction)>,
        table: Arc<CumTable>,
    },
    /// Limit density g̃(t) = 2 ∫₀¹ g(tτ) dτ arising in the s↑1 limit of the
    /// fractional modulars (one space dimension).
    Limit { inner: Box<YoungFunction> },
}

/// Cumulative table of G over log-spaced knots, for families whose G has no
/// closed form. Evaluation adds a short adaptive quadrature from the nearest
/// lower knot, so accuracy stays at quadrature tolerance for any argument.
#[derive(Debug)]
struct CumTable {
    knots: Vec<f64>,
    cum: Vec<f64>,
}

const TABLE_LO: f64 = 1e-8;
const TABLE_HI: f64 = 1e6;
const TABLE_CELLS: usize = 512;

impl CumTable {
    fn build(g: &dyn Fn(f64) -> f64) -> Self {
        let ratio = (TABLE_HI / TABLE_LO).ln() / TABLE_CELLS as f64;
        let knots: Vec<f64> = (0..=TABLE_CELLS)
            .map(|k| TABLE_LO * (ratio * k as f64).exp())
            .collect();
        let mut cum = Vec::with_capacity(knots.len());
        let mut acc = quad::adaptive(g, 0.0, knots[0], QUAD_REL_TOL, QUAD_ABS_TOL);
        cum.push(acc);
        for w in knots.windows(2) {
            acc += quad::adaptive(g, w[0], w[1], QUAD_REL_TOL, QUAD_ABS_TOL);
            cum.push(acc);
        }
        Self { knots, cum }
    }

    fn eval(&self, g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t < self.knots[0] {
            return quad::adaptive(g, 0.0, t, QUAD_REL_TOL, QUAD_ABS_TOL);
        }
        let k = match self
            .knots
            .binary_search_by(|x| x.total_cmp(&t))
        {
            Ok(k) => return self.cum[k],
            Err(ins) => ins - 1,
        };
        let base = self.knots[k.min(self.knots.len() - 1)];
        self.cum[k] + quad::adaptive(g, base, t, QUAD_REL_TOL, QUAD_ABS_TOL)
    }
}

/// How two Young functions are merged by [`YoungFunction::combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineMode {
    Sum,
    Product,
    Composition,
}

impl YoungFunction {
    /// Pure power family `G(t) = t^p / p`, `p > 1`.
    ///
    /// Here `t·g/G ≡ p`, so both growth exponents equal `p`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power family requires p > 1, got p = {p}"
            )));
        }
        Ok(Self {
            repr: Repr::Power { p },
            p_minus: p,
            p_plus: p,
        })
    }

    /// Power-times-logarithm family `g(t) = t^a · log(b + c t)`.
    ///
    /// Requires `a, c > 0` and `b ≥ 1` so that the density stays positive;
    /// the growth exponents are `p⁻ = 1 + a`, `p⁺ = 2 + a`.
    pub fn power_log(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power-log family requires a > 0 and c > 0, got a = {a}, c = {c}"
            )));
        }
        if !(b >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "power-log family requires b >= 1 (log(b + ct) must be nonnegative), got b = {b}"
            )));
        }
        let table = if a == 1.0 {
            None
        } else {
            let g = move |t: f64| t.powf(a) * (b + c * t).ln();
            Some(Arc::new(CumTable::build(&g)))
        };
        Ok(Self {
            repr: Repr::PowerLog { a, b, c, table },
            p_minus: 1.0 + a,
            p_plus: 2.0 + a,
        })
    }

    /// Different power behavior near zero and infinity: `g = c₁ t^{a₁}` for
    /// `t ≤ splice` and `g = c₂ t^{a₂} + d` above, with `c₂` and `d` chosen
    /// for a C¹ match. Exponents `p± = 1 + min/max{a₁, a₂}`.
    pub fn spliced_power(a1: f64, a2: f64, splice: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spliced-power family requires a1, a2 > 0, got a1 = {a1}, a2 = {a2}"
            )));
        }
        if !(splice > 0.0) || !splice.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spliced-power family requires a positive finite splice point, got {splice}"
            )));
        }
        let c1 = 1.0;
        // continuity of g and g' at the splice point
        let c2 = a1 * c1 * splice.powf(a1 - a2) / a2;
        let offset = c1 * splice.powf(a1) - c2 * splice.powf(a2);
        Ok(Self {
            repr: Repr::Spliced {
                a1,
                a2,
                splice,
                c1,
                c2,
                offset,
            },
            p_minus: 1.0 + a1.min(a2),
            p_plus: 1.0 + a1.max(a2),
        })
    }

    /// Linear combination `g = w₁ g₁ + w₂ g₂` with nonnegative weights,
    /// not both zero.
    pub fn sum(f1: YoungFunction, f2: YoungFunction, weights: [f64; 2]) -> Result<Self> {
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sum combination requires nonnegative finite coefficients, got {weights:?}"
            )));
        }
        if weights[0] == 0.0 && weights[1] == 0.0 {
            return Err(Error::InvalidParameter(
                "sum combination requires at least one positive coefficient".into(),
            ));
        }
        // exponents over the members that actually contribute
        let mut p_minus = f64::INFINITY;
        let mut p_plus = 0.0_f64;
        for (w, f) in weights.iter().zip([&f1, &f2]) {
            if *w > 0.0 {
                p_minus = p_minus.min(f.p_minus);
                p_plus = p_plus.max(f.p_plus);
            }
        }
        Ok(Self {
            repr: Repr::Sum {
                parts: Box::new((f1, f2)),
                weights,
            },
            p_minus,
            p_plus,
        })
    }

    /// Product of densities `g = g₁ g₂`; exponents add minus one.
    pub fn product(f1: YoungFunction, f2: YoungFunction) -> Result<Self> {
        let p_minus = f1.p_minus + f2.p_minus - 1.0;
        let p_plus = f1.p_plus + f2.p_plus - 1.0;
        let (g1, g2) = (f1.clone(), f2.clone());
        let g = move |t: f64| g1.deriv(t) * g2.deriv(t);
        let table = Arc::new(CumTable::build(&g));
        Ok(Self {
            repr: Repr::Product {
                parts: Box::new((f1, f2)),
                table,
            },
            p_minus,
            p_plus,
        })
    }

    /// Composition of densities `g = g₁ ∘ g₂`;
    /// exponents combine as `1 + (p₁ − 1)(p₂ − 1)`.
    pub fn composition(outer: YoungFunction, inner: YoungFunction) -> Result<Self> {
        let p_minus = 1.0 + (outer.p_minus - 1.0) * (inner.p_minus - 1.0);
        let p_plus = 1.0 + (outer.p_plus - 1.0) * (inner.p_plus - 1.0);
        let (g1, g2) = (outer.clone(), inner.clone());
        let g = move |t: f64| g1.deriv(g2.deriv(t));
        let table = Arc::new(CumTable::build(&g));
        Ok(Self {
            repr: Repr::Composition {
                parts: Box::new((outer, inner)),
                table,
            },
            p_minus,
            p_plus,
        })
    }

    /// Config-file constructor: family tag plus positional parameter list.
    ///
    /// Tags: `"power" [p]`, `"power-log" [a, b, c]`,
    /// `"spliced-power" [a1, a2, splice]`.
    pub fn make_family(tag: &str, params: &[f64]) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if params.len() != n {
                Err(Error::InvalidParameter(format!(
                    "family '{tag}' takes {n} parameter(s), got {}",
                    params.len()
                )))
            } else {
                Ok(())
            }
        };
        match tag {
            "power" => {
                need(1)?;
                Self::power(params[0])
            }
            "power-log" => {
                need(3)?;
                Self::power_log(params[0], params[1], params[2])
            }
            "spliced-power" => {
                need(3)?;
                Self::spliced_power(params[0], params[1], params[2])
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown Young family tag '{other}'"
            ))),
        }
    }

    /// Merge two Young functions; `coeffs` is only consulted for sums.
    pub fn combine(
        mode: CombineMode,
        f1: YoungFunction,
        f2: YoungFunction,
        coeffs: &[f64],
    ) -> Result<Self> {
        if coeffs.iter().any(|c| *c < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "negative combination coefficients: {coeffs:?}"
            )));
        }
        match mode {
            CombineMode::Sum => {
                if coeffs.len() != 2 {
                    return Err(Error::InvalidParameter(format!(
                        "sum combination takes exactly 2 coefficients, got {}",
                        coeffs.len()
                    )));
                }
                Self::sum(f1, f2, [coeffs[0], coeffs[1]])
            }
            CombineMode::Product => Self::product(f1, f2),
            CombineMode::Composition => Self::composition(f1, f2),
        }
    }

    /// The limit Young function of the s↑1 localization.
    ///
    /// In one dimension the sphere degenerates to two points and the
    /// substitution `τ = r^{1−s}` removes the s-dependence, leaving
    /// `G̃(t) = 2 ∫₀¹ G(tτ) dτ/τ` with density `g̃(t) = 2 ∫₀¹ g(tτ) dτ`.
    /// Only `dim = 1` is supported.
    pub fn limit(&self, dim: usize) -> Result<Self> {
        if dim != 1 {
            return Err(Error::InvalidParameter(format!(
                "limit Young function is implemented for dimension 1 only, got {dim}"
            )));
        }
        Ok(Self {
            repr: Repr::Limit {
                inner: Box::new(self.clone()),
            },
            p_minus: self.p_minus,
            p_plus: self.p_plus,
        })
    }

    /// Declared lower growth exponent.
    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    /// Declared upper growth exponent.
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// G(t); `t < 0` is rejected in debug builds, callers pass `|u|`.
    pub fn value(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "Young functions are evaluated on [0, ∞)");
        match &self.repr {
            Repr::Power { p } => t.powf(*p) / p,
            Repr::PowerLog { a, b, c, table } => match table {
                None => {
                    // ∫₀ᵗ s·log(b+cs) ds in closed form
                    let bct = b + c * t;
                    (c * t * (2.0 * b - c * t) - 2.0 * (b * b - c * c * t * t) * bct.ln()
                        + 2.0 * b * b * b.ln())
                        / (4.0 * c * c)
                }
                Some(table) => {
                    let (a, b, c) = (*a, *b, *c);
                    table.eval(&move |s: f64| s.powf(a) * (b + c * s).ln(), t)
                }
            },
            Repr::Spliced {
                a1,
                a2,
                splice,
                c1,
                c2,
                offset,
            } => {
                if t <= *splice {
                    c1 * t.powf(1.0 + a1) / (1.0 + a1)
                } else {
                    let at_splice = c1 * splice.powf(1.0 + a1) / (1.0 + a1);
                    at_splice
                        + c2 * (t.powf(1.0 + a2) - splice.powf(1.0 + a2)) / (1.0 + a2)
                        + offset * (t - splice)
                }
            }
            Repr::Sum { parts, weights } => {
                weights[0] * parts.0.value(t) + weights[1] * parts.1.value(t)
            }
            Repr::Product { parts, table } => {
                let (f1, f2) = (&parts.0, &parts.1);
                table.eval(&move |s: f64| f1.deriv(s) * f2.deriv(s), t)
            }
            Repr::Composition { parts, table } => {
                let (f1, f2) = (&parts.0, &parts.1);
                table.eval(&move |s: f64| f1.deriv(f2.deriv(s)), t)
            }
            Repr::Limit { inner } => {
                if t == 0.0 {
                    return 0.0;
                }
                let f = inner.as_ref();
                2.0 * quad::adaptive(
                    |tau: f64| if tau <= 0.0 { 0.0 } else { f.value(t * tau) / tau },
                    0.0,
                    1.0,
                    QUAD_REL_TOL,
                    QUAD_ABS_TOL,
                )
            }
        }
    }

    /// The density g(t) = G'(t).
    pub fn deriv(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t == 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Power { p } => t.powf(p - 1.0),
            Repr::PowerLog { a, b, c, .. } => t.powf(*a) * (b + c * t).ln(),
            Repr::Spliced {
                a1,
                a2,
                splice,
                c1,
                c2,
                offset,
            } => {
                if t <= *splice {
                    c1 * t.powf(*a1)
                } else {
                    c2 * t.powf(*a2) + offset
                }
            }
            Repr::Sum { parts, weights } => {
                weights[0] * parts.0.deriv(t) + weights[1] * parts.1.deriv(t)
            }
            Repr::Product { parts, .. } => parts.0.deriv(t) * parts.1.deriv(t),
            Repr::Composition { parts, .. } => parts.0.deriv(parts.1.deriv(t)),
            Repr::Limit { inner } => {
                let f = inner.as_ref();
                2.0 * quad::adaptive(
                    |tau: f64| f.deriv(t * tau),
                    0.0,
                    1.0,
                    QUAD_REL_TOL,
                    QUAD_ABS_TOL,
                )
            }
        }
    }

    /// g'(t) where the family provides one in closed form; `None` otherwise.
    /// Evaluated for t > 0 (several densities have unbounded g' at zero).
    pub fn deriv2(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return None;
        }
        match &self.repr {
            Repr::Power { p } => Some((p - 1.0) * t.powf(p - 2.0)),
            Repr::PowerLog { a, b, c, .. } => {
                Some(a * t.powf(a - 1.0) * (b + c * t).ln() + c * t.powf(*a) / (b + c * t))
            }
            Repr::Spliced {
                a1,
                a2,
                splice,
                c1,
                c2,
                ..
            } => {
                if t <= *splice {
                    Some(c1 * a1 * t.powf(a1 - 1.0))
                } else {
                    Some(c2 * a2 * t.powf(a2 - 1.0))
                }
            }
            Repr::Sum { parts, weights } => {
                let d1 = parts.0.deriv2(t)?;
                let d2 = parts.1.deriv2(t)?;
                Some(weights[0] * d1 + weights[1] * d2)
            }
            Repr::Product { parts, .. } => {
                let d1 = parts.0.deriv2(t)?;
                let d2 = parts.1.deriv2(t)?;
                Some(d1 * parts.1.deriv(t) + parts.0.deriv(t) * d2)
            }
            Repr::Composition { parts, .. } => {
                let inner_val = parts.1.deriv(t);
                let d_outer = parts.0.deriv2(inner_val)?;
                let d_inner = parts.1.deriv2(t)?;
                Some(d_outer * d_inner)
            }
            Repr::Limit { inner } => {
                // differentiate g̃ under the integral; valid when g' exists
                inner.deriv2(t.max(1e-300))?;
                let f = inner.as_ref();
                Some(
                    2.0 * quad::adaptive(
                        |tau: f64| {
                            if tau <= 0.0 {
                                0.0
                            } else {
                                tau * f.deriv2(t * tau).unwrap_or(0.0)
                            }
                        },
                        0.0,
                        1.0,
                        QUAD_REL_TOL,
                        QUAD_ABS_TOL,
                    ),
                )
            }
        }
    }

    /// g⁻¹(y) by monotone bracketing and bisection, resolving plateaus to the
    /// smallest t with g(t) ≥ y. Always succeeds for y ≥ 0 since g is
    /// unbounded.
    pub fn deriv_inverse(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        if y <= 0.0 {
            return 0.0;
        }
        let tol = 1e-10 * y.max(1.0);
        let mut hi = 1.0_f64;
        let mut grow = 0;
        while self.deriv(hi) < y {
            hi *= 2.0;
            grow += 1;
            assert!(grow < 2048, "density failed to reach {y}; g must be unbounded");
        }
        let mut lo = 0.0_f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let gm = self.deriv(mid);
            if (gm - y).abs() <= tol {
                return mid;
            }
            if gm < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        hi
    }

    /// The complementary Young function `G*(t) = ∫₀ᵗ g⁻¹(s) ds`, by adaptive
    /// quadrature of the bisected inverse.
    pub fn conjugate(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t == 0.0 {
            return 0.0;
        }
        quad::adaptive(|s: f64| self.deriv_inverse(s), 0.0, t, 1e-8, QUAD_ABS_TOL)
    }

    /// Human-readable family description, used in reports and result files.
    pub fn describe(&self) -> String {
        match &self.repr {
            Repr::Power { p } => format!("power(p={p})"),
            Repr::PowerLog { a, b, c, .. } => format!("power-log(a={a}, b={b}, c={c})"),
            Repr::Spliced {
                a1, a2, splice, ..
            } => format!("spliced-power(a1={a1}, a2={a2}, splice={splice})"),
            Repr::Sum { parts, weights } => format!(
                "sum({}*{}, {}*{})",
                weights[0],
                parts.0.describe(),
                weights[1],
                parts.1.describe()
            ),
            Repr::Product { parts, .. } => {
                format!("product({}, {})", parts.0.describe(), parts.1.describe())
            }
            Repr::Composition { parts, .. } => format!(
                "composition({}, {})",
                parts.0.describe(),
                parts.1.describe()
            ),
            Repr::Limit { inner } => format!("limit({})", inner.describe()),
        }
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Monotonicity check for `h(t) = g(t/c)/t` across consecutive sample points,
/// with slack 1e-10. Under the Lieberman condition `h` is nondecreasing for
/// every fixed `c > 0`.
pub fn check_h_monotone(f: &YoungFunction, c: f64, sample: &[f64]) -> bool {
    assert!(c > 0.0, "scale must be positive");
    let h = |t: f64| f.deriv(t / c) / t;
    sample
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > w[0])
        .all(|w| h(w[1]) >= h(w[0]) - 1e-10 * h(w[0]).abs().max(1.0))
}

/// Log-spaced sample grid, the default probe set for property verification.
pub fn log_sample(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| lo * (step * k as f64).exp()).collect()
}

/// Serializable recipe for building a [`YoungFunction`], used by config
/// files and the browser demo.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum YoungSpec {
    Power { p: f64 },
    PowerLog { a: f64, b: f64, c: f64 },
    SplicedPower { a1: f64, a2: f64, splice: f64 },
    Sum {
        f1: Box<YoungSpec>,
        f2: Box<YoungSpec>,
        coeffs: [f64; 2],
    },
    Product {
        f1: Box<YoungSpec>,
        f2: Box<YoungSpec>,
    },
    Composition {
        outer: Box<YoungSpec>,
        inner: Box<YoungSpec>,
    },
    Limit { inner: Box<YoungSpec> },
}

impl YoungSpec {
    pub fn build(&self) -> Result<YoungFunction> {
        match self {
            YoungSpec::Power { p } => YoungFunction::power(*p),
            YoungSpec::PowerLog { a, b, c } => YoungFunction::power_log(*a, *b, *c),
            YoungSpec::SplicedPower { a1, a2, splice } => {
                YoungFunction::spliced_power(*a1, *a2, *splice)
            }
            YoungSpec::Sum { f1, f2, coeffs } => {
                YoungFunction::sum(f1.build()?, f2.build()?, *coeffs)
            }
            YoungSpec::Product { f1, f2 } => YoungFunction::product(f1.build()?, f2.build()?),
            YoungSpec::Composition { outer, inner } => {
                YoungFunction::composition(outer.build()?, inner.build()?)
            }
            YoungSpec::Limit { inner } => inner.build()?.limit(1),
        }
    }
}
