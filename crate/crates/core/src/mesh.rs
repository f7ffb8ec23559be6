//! 1-D grids, grid functions with zero exterior extension, weights, and the
//! quadrature machinery behind the modulars Φ_G and Φ_{s,G}.
//!
//! Functions live at cell midpoints of a uniform grid over Ω = (a, b) and are
//! extended by zero outside Ω. The nonlocal modular
//! `Φ_{s,G}(u) = ∬ G(|u(x) − u(y)| / |x−y|^s) dx dy / |x−y|`
//! is discretized by a fixed quadrature stencil ([`SgQuadrature`]): a
//! midpoint tensor rule over off-diagonal cell pairs, subdivided near the
//! diagonal, plus per-node exterior tails evaluated on a finite interval via
//! the substitution `t = r^{−s}`. Because every stencil weight is independent
//! of the function values, differentiating the quadrature sum term by term
//! yields the exact gradient of the discrete modular; the operator module
//! relies on this.

use serde::{Deserialize, Serialize};

use crate::config::QuadConfig;
use crate::error::{Error, Result};
use crate::quad;
use crate::young::YoungFunction;

/// Open interval Ω = (a, b).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "domain requires finite a < b, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn diam(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// Uniform grid of `n ≥ 4` cells; nodes are cell midpoints, strictly inside Ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub domain: Domain,
    pub n: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(domain: Domain, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid requires at least 4 cells, got {n}"
            )));
        }
        Ok(Self {
            domain,
            n,
            h: domain.diam() / n as f64,
        })
    }

    /// Midpoint coordinate of cell `i`.
    pub fn node(&self, i: usize) -> f64 {
        self.domain.a + (i as f64 + 0.5) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    /// Sub-grid over the cells `i0..i1` (half-open), same cell size.
    pub fn subgrid(&self, i0: usize, i1: usize) -> Result<Self> {
        if i0 >= i1 || i1 > self.n {
            return Err(Error::InvalidParameter(format!(
                "invalid cell range {i0}..{i1} for a grid of {} cells",
                self.n
            )));
        }
        let a = self.domain.a + i0 as f64 * self.h;
        let b = self.domain.a + i1 as f64 * self.h;
        Grid::new(Domain::new(a, b)?, i1 - i0)
    }
}

/// Nodal values on a grid, implicitly zero on ℝ ∖ Ω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "value vector length {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid function values must be finite".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Mirror image about the domain midpoint.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// CSV rows `x,value` with a header, one row per node.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.grid.nodes().zip(&self.values) {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }
}

/// Serializable recipe for constructing a weight or right-hand side on a
/// 1-periodic reference cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CellProfile {
    /// mean + amp·sin(2πy)
    Sin { mean: f64, amp: f64 },
    /// `low` on [0, split), `high` on [split, 1)
    Step { low: f64, high: f64, split: f64 },
}

impl CellProfile {
    /// Evaluate at `y ∈ [0, 1)`.
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            CellProfile::Sin { mean, amp } => {
                mean + amp * (2.0 * std::f64::consts::PI * y).sin()
            }
            CellProfile::Step { low, high, split } => {
                if y < *split {
                    *low
                } else {
                    *high
                }
            }
        }
    }
}

/// Strictly positive bounded weight ρ with recorded bounds ρ₋, ρ₊.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    grid: Grid,
    values: Vec<f64>,
    rho_minus: f64,
    rho_plus: f64,
}

impl Weight {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "weight vector length {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        let rho_minus = values.iter().copied().fold(f64::INFINITY, f64::min);
        let rho_plus = values.iter().copied().fold(0.0_f64, f64::max);
        if !(rho_minus > 0.0) || !rho_plus.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight must satisfy 0 < rho_minus <= rho(x) <= rho_plus < inf, \
                 observed bounds [{rho_minus}, {rho_plus}]"
            )));
        }
        Ok(Self {
            grid,
            values,
            rho_minus,
            rho_plus,
        })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::from_values(grid, vec![c; grid.n])
    }

    pub fn from_profile_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(grid, grid.nodes().map(f).collect())
    }

    /// ε-periodic weight `ρ_ε(x) = ρ(x/ε)` sampled at the nodes.
    ///
    /// ε must align with the grid: ε = m·h for an integer m ≥ 1 that divides
    /// the cell count, so that each period covers whole cells and the domain
    /// holds whole periods.
    pub fn periodic(grid: Grid, profile: &CellProfile, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Config(format!("period eps must be positive, got {eps}")));
        }
        let m = (eps / grid.h).round();
        if m < 1.0 || (eps - m * grid.h).abs() > 1e-9 * grid.h {
            return Err(Error::Config(format!(
                "period eps = {eps} is not an integer multiple of the cell size h = {}",
                grid.h
            )));
        }
        let m = m as usize;
        if grid.n % m != 0 {
            return Err(Error::Config(format!(
                "period eps = {eps} spans {m} cells which does not divide the cell count {}",
                grid.n
            )));
        }
        Self::from_profile_fn(grid, |x| profile.eval((x / eps).rem_euclid(1.0)))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }

    pub fn rho_plus(&self) -> f64 {
        self.rho_plus
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Nodal mean (the weak* limit of an ε-periodic family as ε → 0).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Restriction to the cells `i0..i1` of the parent grid.
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Self> {
        let sub = self.grid.subgrid(i0, i1)?;
        Self::from_values(sub, self.values[i0..i1].to_vec())
    }
}

/// The s-Hölder quotient `(u_i − u_j) / |x_i − x_j|^s` between two nodes.
pub fn holder_quotient(u: &GridFunction, i: usize, j: usize, s: f64) -> Result<f64> {
    if i == j {
        return Err(Error::Precondition(
            "Hölder quotient is undefined on the diagonal (i = j)".into(),
        ));
    }
    assert!(s > 0.0 && s < 1.0, "fractional order must lie in (0, 1)");
    let dx = (u.grid.node(i) - u.grid.node(j)).abs();
    Ok((u.values[i] - u.values[j]) / dx.powf(s))
}

/// Weighted pointwise modular `Σ G(|u_i|) ρ_i h` (ρ ≡ 1 when absent).
pub fn modular_g(u: &GridFunction, f: &YoungFunction, weight: Option<&Weight>) -> f64 {
    let h = u.grid.h;
    match weight {
        None => u.values.iter().map(|v| f.value(v.abs()) * h).sum(),
        Some(w) => u
            .values
            .iter()
            .zip(w.values())
            .map(|(v, r)| f.value(v.abs()) * r * h)
            .sum(),
    }
}

/// One pre-assembled cell-pair quadrature term: contributes
/// `w · G(|u_i − u_j| · inv_rs)` to the modular.
#[derive(Clone, Copy, Debug)]
struct PairTerm {
    i: u32,
    j: u32,
    inv_rs: f64,
    w: f64,
}

/// One exterior-tail quadrature term: contributes `w · G(|u_i| · t)`.
#[derive(Clone, Copy, Debug)]
struct TailTerm {
    i: u32,
    t: f64,
    w: f64,
}

/// Fixed quadrature stencil for the nonlocal modular on a given (grid, s).
///
/// Assembly happens once; evaluation and differentiation are loops over the
/// stored terms in a fixed order, so results are deterministic and the
/// gradient is the exact derivative of the evaluated sum.
#[derive(Debug)]
pub struct SgQuadrature {
    grid: Grid,
    s: f64,
    pairs: Vec<PairTerm>,
    tails: Vec<TailTerm>,
}

impl SgQuadrature {
    pub fn new(grid: Grid, s: f64, cfg: &QuadConfig) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fractional order must lie in (0, 1), got {s}"
            )));
        }
        let h = grid.h;
        let n = grid.n;
        let m = 1usize << cfg.subdiv_depth;

        let mut pairs = Vec::new();
        // adjacent pairs: subdivide both cells, then group the sub-pair
        // midpoint rule by center offset d = l - k (multiplicity m - |d|)
        let sub_h = h / m as f64;
        let mut adjacent = Vec::with_capacity(2 * m - 1);
        for d in -(m as i64 - 1)..=(m as i64 - 1) {
            let r = h + d as f64 * sub_h;
            let count = (m as i64 - d.abs()) as f64;
            adjacent.push((r.powf(-s), 2.0 * sub_h * sub_h * count / r));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 {
                    for &(inv_rs, w) in &adjacent {
                        pairs.push(PairTerm {
                            i: i as u32,
                            j: j as u32,
                            inv_rs,
                            w,
                        });
                    }
                } else {
                    let r = (j - i) as f64 * h;
                    pairs.push(PairTerm {
                        i: i as u32,
                        j: j as u32,
                        inv_rs: r.powf(-s),
                        w: 2.0 * h * h / r,
                    });
                }
            }
        }

        // exterior tails: per node and side, 2h/s · ∫₀^{d^{-s}} G(|u_i| t) dt/t
        // on geometrically graded GK15 panels (finest panel reaches 0)
        let mut tails = Vec::new();
        let mut nodes_buf = Vec::new();
        for i in 0..n {
            let x = grid.node(i);
            for dist in [x - grid.domain.a, grid.domain.b - x] {
                let top = dist.powf(-s);
                let mut edges = Vec::with_capacity(cfg.tail_panels as usize + 2);
                edges.push(0.0);
                for k in (0..=cfg.tail_panels).rev() {
                    edges.push(top * 0.25_f64.powi(k as i32));
                }
                nodes_buf.clear();
                for w in edges.windows(2) {
                    quad::gk15_nodes(w[0], w[1], &mut nodes_buf);
                }
                for &(t, wq) in &nodes_buf {
                    tails.push(TailTerm {
                        i: i as u32,
                        t,
                        w: 2.0 * h / s * wq / t,
                    });
                }
            }
        }

        Ok(Self {
            grid,
            s,
            pairs,
            tails,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// The discrete nonlocal modular Φ_{s,G}(u).
    pub fn modular(&self, f: &YoungFunction, u: &GridFunction) -> f64 {
        self.pair_modular(f, u) + self.tail_modular(f, u)
    }

    /// Interior (Ω × Ω) part only; used by cube-type oscillation bounds.
    pub fn pair_modular(&self, f: &YoungFunction, u: &GridFunction) -> f64 {
        let v = u.values();
        let mut acc = 0.0;
        for term in &self.pairs {
            let du = v[term.i as usize] - v[term.j as usize];
            if du != 0.0 {
                acc += term.w * f.value(du.abs() * term.inv_rs);
            }
        }
        acc
    }

    fn tail_modular(&self, f: &YoungFunction, u: &GridFunction) -> f64 {
        let v = u.values();
        let mut acc = 0.0;
        for term in &self.tails {
            let ui = v[term.i as usize];
            if ui != 0.0 {
                acc += term.w * f.value(ui.abs() * term.t);
            }
        }
        acc
    }

    /// Exact gradient of [`Self::modular`] with respect to the nodal values.
    pub fn modular_grad(&self, f: &YoungFunction, u: &GridFunction) -> GridFunction {
        let v = u.values();
        let mut g = vec![0.0; v.len()];
        for term in &self.pairs {
            let du = v[term.i as usize] - v[term.j as usize];
            if du != 0.0 {
                let c = term.w * term.inv_rs * f.deriv(du.abs() * term.inv_rs) * du.signum();
                g[term.i as usize] += c;
                g[term.j as usize] -= c;
            }
        }
        for term in &self.tails {
            let ui = v[term.i as usize];
            if ui != 0.0 {
                g[term.i as usize] += term.w * term.t * f.deriv(ui.abs() * term.t) * ui.signum();
            }
        }
        GridFunction {
            grid: u.grid,
            values: g,
        }
    }
}

/// Convenience wrapper assembling a one-off stencil; reuse [`SgQuadrature`]
/// for repeated evaluations on the same (grid, s).
pub fn modular_sg(u: &GridFunction, f: &YoungFunction, s: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok(SgQuadrature::new(u.grid, s, cfg)?.modular(f, u))
}

/// Which modular a Luxemburg norm is taken against.
#[derive(Clone, Copy)]
pub enum ModularKind<'a> {
    /// Φ_G, the pointwise modular.
    Pointwise,
    /// Φ_{s,G} through an assembled stencil.
    Fractional(&'a SgQuadrature),
}

/// Luxemburg norm `inf { λ > 0 : Φ(u/λ) ≤ 1 }` by bisection on the strictly
/// decreasing map `λ ↦ Φ(u/λ)`; terminates when |Φ(u/λ) − 1| ≤ 1e-10.
pub fn luxemburg_norm(u: &GridFunction, f: &YoungFunction, kind: ModularKind<'_>) -> f64 {
    let phi = |lam: f64| -> f64 {
        let scaled = u.scaled(1.0 / lam);
        match kind {
            ModularKind::Pointwise => modular_g(&scaled, f, None),
            ModularKind::Fractional(q) => q.modular(f, &scaled),
        }
    };
    let phi1 = match kind {
        ModularKind::Pointwise => modular_g(u, f, None),
        ModularKind::Fractional(q) => q.modular(f, u),
    };
    if phi1 == 0.0 {
        return 0.0;
    }

    // (G₁) bracket: λ = Φ(u)^{1/p} has Φ(u/λ) on the right side of 1
    let mut lo = phi1.powf(1.0 / f.p_minus()).min(phi1.powf(1.0 / f.p_plus()));
    let mut hi = phi1.powf(1.0 / f.p_minus()).max(phi1.powf(1.0 / f.p_plus()));
    let mut guard = 0;
    while phi(lo) < 1.0 {
        lo *= 0.5;
        guard += 1;
        assert!(guard < 2048, "Luxemburg bracket failed to expand");
    }
    while phi(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        assert!(guard < 4096, "Luxemburg bracket failed to expand");
    }

    let mut lam = 0.5 * (lo + hi);
    for _ in 0..200 {
        let val = phi(lam);
        if (val - 1.0).abs() <= 1e-10 {
            return lam;
        }
        if val > 1.0 {
            lo = lam;
        } else {
            hi = lam;
        }
        lam = 0.5 * (lo + hi);
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    lam
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_grid(n: usize) -> Grid {
        Grid::new(Domain::new(0.0, 1.0).unwrap(), n).unwrap()
    }

    fn sym_grid(n: usize) -> Grid {
        Grid::new(Domain::new(-1.0, 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(Domain::new(0.0, 1.0).unwrap(), 3).is_err());
        let g = unit_grid(8);
        assert!(g.nodes().all(|x| x > 0.0 && x < 1.0));
        assert_relative_eq!(g.node(0), 0.0625);
    }

    #[test]
    fn holder_quotient_cases() {
        let g = sym_grid(8);
        let constant = GridFunction::from_fn(g, |_| 3.0);
        assert_eq!(holder_quotient(&constant, 0, 5, 0.5).unwrap(), 0.0);
        assert!(holder_quotient(&constant, 2, 2, 0.5).is_err());

        let linear = GridFunction::from_fn(g, |x| x);
        // |x_i - x_j| = 1 at 4 cells apart (h = 0.25): quotient = ±1
        let q = holder_quotient(&linear, 4, 0, 0.5).unwrap();
        assert_relative_eq!(q, 1.0, max_relative = 1e-12);

        // adjacent hat-function nodes: quotient = slope · h^{1-s}
        let hat = GridFunction::from_fn(g, |x| 1.0 - x.abs());
        let q = holder_quotient(&hat, 1, 0, 0.5).unwrap();
        assert_relative_eq!(q, 0.25_f64.powf(0.5), max_relative = 1e-12);
    }

    #[test]
    fn pointwise_modular_values() {
        let f = YoungFunction::power(2.0).unwrap();
        let g = unit_grid(64);
        assert_eq!(modular_g(&GridFunction::zeros(g), &f, None), 0.0);
        let one = GridFunction::from_fn(g, |_| 1.0);
        assert_relative_eq!(modular_g(&one, &f, None), 0.5, max_relative = 1e-12);
        // ∫₀¹ x²/2 dx = 1/6, midpoint rule is O(h²)
        let lin = GridFunction::from_fn(g, |x| x);
        assert_relative_eq!(modular_g(&lin, &f, None), 1.0 / 6.0, max_relative = 1e-3);
    }

    #[test]
    fn weight_validation_and_periodic_alignment() {
        let g = unit_grid(64);
        assert!(Weight::constant(g, 0.0).is_err());
        assert!(Weight::from_values(g, vec![1.0; 63]).is_err());

        let sin = CellProfile::Sin {
            mean: 1.0,
            amp: 0.5,
        };
        let w = Weight::periodic(g, &sin, 0.25).unwrap();
        assert_relative_eq!(w.mean(), 1.0, epsilon = 1e-12);
        assert!(w.rho_minus() > 0.0);
        // eps not a multiple of h
        assert!(Weight::periodic(g, &sin, 0.3).is_err());
    }

    #[test]
    fn fractional_modular_zero_and_hat_convergence() {
        let f = YoungFunction::power(2.0).unwrap();
        let cfg = QuadConfig::default();
        let q64 = SgQuadrature::new(sym_grid(64), 0.5, &cfg).unwrap();
        assert_eq!(q64.modular(&f, &GridFunction::zeros(sym_grid(64))), 0.0);

        let hat64 = GridFunction::from_fn(sym_grid(64), |x| 1.0 - x.abs());
        let v64 = q64.modular(&f, &hat64);
        let q512 = SgQuadrature::new(sym_grid(512), 0.5, &cfg).unwrap();
        let hat512 = GridFunction::from_fn(sym_grid(512), |x| 1.0 - x.abs());
        let v512 = q512.modular(&f, &hat512);
        assert!(v64 > 0.0 && v512 > 0.0);
        assert!(
            (v64 - v512).abs() <= 0.02 * v512,
            "coarse {v64} vs fine {v512}"
        );
    }

    #[test]
    fn fractional_modular_symmetries() {
        let f = YoungFunction::power_log(1.0, 1.0, 1.0).unwrap();
        let q = SgQuadrature::new(sym_grid(32), 0.6, &QuadConfig::default()).unwrap();
        let u = GridFunction::from_fn(sym_grid(32), |x| (1.0 - x * x) * (1.5 + x).cos());
        let v = q.modular(&f, &u);
        assert_relative_eq!(q.modular(&f, &u.scaled(-1.0)), v, max_relative = 1e-14);
        assert_relative_eq!(q.modular(&f, &u.reflected()), v, max_relative = 1e-12);
    }

    #[test]
    fn luxemburg_closed_form_and_zero() {
        let f = YoungFunction::power(2.0).unwrap();
        let g = unit_grid(32);
        assert_eq!(
            luxemburg_norm(&GridFunction::zeros(g), &f, ModularKind::Pointwise),
            0.0
        );
        // Φ_G(1/λ) = (1/2)λ⁻² = 1 at λ = 1/√2
        let one = GridFunction::from_fn(g, |_| 1.0);
        let norm = luxemburg_norm(&one, &f, ModularKind::Pointwise);
        assert_relative_eq!(norm, 0.5_f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn modular_at_norm_is_one() {
        let f = YoungFunction::spliced_power(1.0, 2.0, 1.0).unwrap();
        let q = SgQuadrature::new(sym_grid(24), 0.4, &QuadConfig::default()).unwrap();
        let u = GridFunction::from_fn(sym_grid(24), |x| (2.0 * x).sin() + 0.3);
        for kind in [ModularKind::Pointwise, ModularKind::Fractional(&q)] {
            let norm = luxemburg_norm(&u, &f, kind);
            let scaled = u.scaled(1.0 / norm);
            let val = match kind {
                ModularKind::Pointwise => modular_g(&scaled, &f, None),
                ModularKind::Fractional(q) => q.modular(&f, &scaled),
            };
            assert!((val - 1.0).abs() <= 1e-9, "modular at the norm: {val}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        // (G₁) forces the sandwich for both modulars
        #[test]
        fn scaling_sandwich_for_modulars(seed in 0u64..1000, c in prop::sample::select(vec![0.5f64, 2.0, 10.0])) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let grid = sym_grid(16);
            let u = GridFunction::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
            let f = YoungFunction::power_log(1.0, 1.0, 1.0).unwrap();
            let q = SgQuadrature::new(grid, 0.5, &QuadConfig::default()).unwrap();

            for (phi_u, phi_cu) in [
                (modular_g(&u, &f, None), modular_g(&u.scaled(c), &f, None)),
                (q.modular(&f, &u), q.modular(&f, &u.scaled(c))),
            ] {
                prop_assume!(phi_u > 0.0);
                let lo = c.powf(f.p_minus()).min(c.powf(f.p_plus())) * phi_u;
                let hi = c.powf(f.p_minus()).max(c.powf(f.p_plus())) * phi_u;
                prop_assert!(phi_cu >= lo * (1.0 - 1e-9));
                prop_assert!(phi_cu <= hi * (1.0 + 1e-9));
            }
        }

        // homogeneity of the Luxemburg norm for homogeneous G
        #[test]
        fn luxemburg_homogeneity(seed in 0u64..1000, c in 0.1f64..10.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let grid = unit_grid(16);
            let u = GridFunction::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
            let f = YoungFunction::power(2.0).unwrap();
            let n1 = luxemburg_norm(&u, &f, ModularKind::Pointwise);
            prop_assume!(n1 > 1e-6);
            let nc = luxemburg_norm(&u.scaled(c), &f, ModularKind::Pointwise);
            prop_assert!((nc - c * n1).abs() <= 1e-8 * (c * n1).max(1.0));
        }
    }

    #[test]
    fn self_convergence_is_monotone_for_smooth_u() {
        let f = YoungFunction::power(2.0).unwrap();
        let cfg = QuadConfig::default();
        let smooth = |x: f64| (std::f64::consts::PI * (x + 1.0) / 2.0).sin();
        let value = |n: usize| {
            let g = sym_grid(n);
            SgQuadrature::new(g, 0.5, &cfg)
                .unwrap()
                .modular(&f, &GridFunction::from_fn(g, smooth))
        };
        let v: Vec<f64> = [16, 64, 256, 1024].iter().map(|&n| value(n)).collect();
        let gaps: Vec<f64> = v.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
        assert!(
            gaps.windows(2).all(|w| w[1] < w[0]),
            "gaps should shrink: {gaps:?}"
        );
    }
}
