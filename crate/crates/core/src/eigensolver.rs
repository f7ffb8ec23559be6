//! Constrained minimization for the first nonlocal eigenpair.
//!
//! The problem: minimize the ratio 𝓕(u)/𝓖(u) over the level set
//! `M_μ = { u : Φ_G(u) = μ }`, extract the Lagrange multiplier λ, and sweep
//! the level μ and the fractional order s. For non-homogeneous Young
//! functions α (the constrained infimum) and λ (the multiplier) genuinely
//! differ, but stay comparable within the factor p⁺/p⁻.
//!
//! The solver is a spectral projected-gradient method: steps follow the
//! tangential part of the ratio gradient (the least-squares multiplier makes
//! the direction tangent in the discrete inner product), a Barzilai–Borwein
//! trial step is safeguarded by Armijo backtracking on the projected merit,
//! and the constraint is restored after every step by scalar rescaling,
//! well-posed because `c ↦ Φ_G(c·u)` is strictly increasing.
//!
//! Weighted problems keep the paper's convention: the constraint manifold is
//! the unweighted level set while the weight enters the objective
//! denominator only. This is what makes `α(cρ) = α(ρ)/c` exact for every
//! family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::mesh::{modular_g, Grid, GridFunction};
use crate::operator::{dot, norm2, FormContext};
use crate::young::YoungFunction;

/// A numerator/denominator pair of functionals with exact gradients, plus
/// the constraint functional cut out by the level-set manifold.
pub trait EnergyPair {
    fn grid(&self) -> Grid;
    fn young(&self) -> &YoungFunction;
    fn energy_num(&self, u: &GridFunction) -> f64;
    fn grad_num(&self, u: &GridFunction) -> GridFunction;
    fn energy_den(&self, u: &GridFunction) -> f64;
    fn grad_den(&self, u: &GridFunction) -> GridFunction;
    /// Constraint functional defining M_μ; coincides with the denominator
    /// unless a weight splits them.
    fn constraint(&self, u: &GridFunction) -> f64 {
        self.energy_den(u)
    }
    fn constraint_grad(&self, u: &GridFunction) -> GridFunction {
        self.grad_den(u)
    }
}

impl EnergyPair for FormContext {
    fn grid(&self) -> Grid {
        FormContext::grid(self)
    }

    fn young(&self) -> &YoungFunction {
        FormContext::young(self)
    }

    fn energy_num(&self, u: &GridFunction) -> f64 {
        self.energy_f(u)
    }

    fn grad_num(&self, u: &GridFunction) -> GridFunction {
        self.grad_f(u)
    }

    fn energy_den(&self, u: &GridFunction) -> f64 {
        self.energy_g(u)
    }

    fn grad_den(&self, u: &GridFunction) -> GridFunction {
        self.grad_g(u)
    }

    fn constraint(&self, u: &GridFunction) -> f64 {
        modular_g(u, FormContext::young(self), None)
    }

    fn constraint_grad(&self, u: &GridFunction) -> GridFunction {
        let h = self.grid().h;
        let f = FormContext::young(self);
        let mut g = GridFunction::zeros(self.grid());
        for (gi, ui) in g.values_mut().iter_mut().zip(u.values()) {
            if *ui != 0.0 {
                *gi = f.deriv(ui.abs()) * ui.signum() * h;
            }
        }
        g
    }
}

/// First-eigenpair output: minimizer, level, both spectral quantities, and
/// convergence diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenpairResult {
    pub u: GridFunction,
    pub mu: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl EigenpairResult {
    /// min(u)·max(u) ≥ −tol·‖u‖∞², the sampled one-signedness criterion.
    pub fn is_one_signed(&self, tol: f64) -> bool {
        let linf = self.u.linf();
        self.u.min() * self.u.max() >= -tol * linf * linf
    }
}

/// One sweep across a parameter (μ or s) with the derived infima.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub alpha_1: f64,
    pub lambda_1: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub parameter: f64,
    pub result: EigenpairResult,
}

impl SweepResult {
    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.result.converged)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    None,
    Odd,
}

fn apply_symmetry(u: &mut GridFunction, sym: Symmetry) {
    if sym == Symmetry::Odd {
        let n = u.len();
        let v = u.values_mut();
        for i in 0..n / 2 {
            let odd = 0.5 * (v[i] - v[n - 1 - i]);
            v[i] = odd;
            v[n - 1 - i] = -odd;
        }
        if n % 2 == 1 {
            v[n / 2] = 0.0;
        }
    }
}

/// Rescale `u` onto the constraint level set: solve Φ(c·u) = μ for c > 0 by
/// bisection, bracketed through the scaling sandwich (G₁).
fn rescale_to_level<P: EnergyPair>(pair: &P, u: &mut GridFunction, mu: f64) -> Result<()> {
    let phi = pair.constraint(u);
    if phi == 0.0 {
        return Err(Error::Precondition(
            "cannot rescale the zero function onto the constraint manifold".into(),
        ));
    }
    let f = pair.young();
    let ratio = mu / phi;
    let c1 = ratio.powf(1.0 / f.p_minus());
    let c2 = ratio.powf(1.0 / f.p_plus());
    let mut lo = c1.min(c2);
    let mut hi = c1.max(c2);
    let mut guard = 0;
    while pair.constraint(&u.scaled(lo)) > mu {
        lo *= 0.5;
        guard += 1;
        assert!(guard < 300, "constraint bracket failed to expand");
    }
    while pair.constraint(&u.scaled(hi)) < mu {
        hi *= 2.0;
        guard += 1;
        assert!(guard < 600, "constraint bracket failed to expand");
    }

    let mut c = 0.5 * (lo + hi);
    for _ in 0..300 {
        let val = pair.constraint(&u.scaled(c));
        if (val - mu).abs() <= 1e-12 * mu {
            break;
        }
        if val < mu {
            lo = c;
        } else {
            hi = c;
        }
        c = 0.5 * (lo + hi);
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    for v in u.values_mut() {
        *v *= c;
    }
    Ok(())
}

/// Spectral projected-gradient descent of 𝓕/𝓓 on the level set Φ = μ.
fn constrained_minimize<P: EnergyPair>(
    pair: &P,
    mu: f64,
    cfg: &SolverConfig,
    init: &GridFunction,
    sym: Symmetry,
) -> Result<EigenpairResult> {
    let mut u = init.clone();
    apply_symmetry(&mut u, sym);
    rescale_to_level(pair, &mut u, mu)?;

    let mut num = pair.energy_num(&u);
    let mut den = pair.energy_den(&u);

    let mut prev: Option<(Vec<f64>, Vec<f64>, f64)> = None; // (u, direction, step)
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..cfg.max_iter {
        iterations = it;
        let gf = pair.grad_num(&u);
        let gd = pair.grad_den(&u);
        let gc = pair.constraint_grad(&u);
        let ratio = num / den;

        // gradient of the ratio, projected tangent to the constraint
        let gc_sq = dot(gc.values(), gc.values());
        if gc_sq == 0.0 {
            return Err(Error::DegenerateConstraint);
        }
        let n = u.len();
        let mut grad_ratio = vec![0.0; n];
        for i in 0..n {
            grad_ratio[i] = (gf.values()[i] - ratio * gd.values()[i]) / den;
        }
        let kappa = dot(&grad_ratio, gc.values()) / gc_sq;
        let mut dir = vec![0.0; n];
        for i in 0..n {
            dir[i] = -(grad_ratio[i] - kappa * gc.values()[i]);
        }
        let dir_norm_sq = dot(&dir, &dir);

        // dimensionless defect; equals ‖∇𝓕 − λ̂∇𝓖‖/‖∇𝓕‖ when 𝓓 = Φ
        let residual = dir_norm_sq.sqrt() * den / norm2(gf.values()).max(1e-30);
        if residual <= cfg.tol {
            converged = true;
            break;
        }

        // BB trial step from consecutive tangential gradients
        let trial = match &prev {
            Some((pu, pdir, pstep)) => {
                let mut ss = 0.0;
                let mut sy = 0.0;
                for i in 0..n {
                    let si = u.values()[i] - pu[i];
                    ss += si * si;
                    sy += si * (pdir[i] - dir[i]);
                }
                if sy > 0.0 && ss > 0.0 {
                    (ss / sy).clamp(1e-12, 1e12)
                } else {
                    pstep * 2.0
                }
            }
            None => {
                let scale = u.linf().max(1e-12);
                scale / (pair.young().p_plus() * dir_norm_sq.sqrt().max(1e-30))
            }
        };

        // Armijo on the projected merit t ↦ (𝓕/𝓓)(Π(u + t·d))
        let mut step = trial;
        let mut accepted = None;
        for _ in 0..64 {
            let mut cand = u.clone();
            for (ci, di) in cand.values_mut().iter_mut().zip(&dir) {
                *ci += step * di;
            }
            apply_symmetry(&mut cand, sym);
            if rescale_to_level(pair, &mut cand, mu).is_err() {
                step *= 0.5;
                continue;
            }
            let cand_num = pair.energy_num(&cand);
            let cand_den = pair.energy_den(&cand);
            if cand_num / cand_den <= ratio - 1e-4 * step * dir_norm_sq {
                accepted = Some((cand, cand_num, cand_den));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_num, next_den)) = accepted else {
            break; // line search stagnated at this residual
        };

        prev = Some((u.values().to_vec(), dir, step));
        u = next;
        num = next_num;
        den = next_den;
    }

    let gf = pair.grad_num(&u);
    let gd = pair.grad_den(&u);
    let gd_sq = dot(gd.values(), gd.values());
    if gd_sq == 0.0 {
        return Err(Error::DegenerateConstraint);
    }
    let lambda = dot(gf.values(), gd.values()) / gd_sq;

    Ok(EigenpairResult {
        alpha: num / den,
        lambda,
        residual: tangential_residual(pair, &u, num, den),
        mu,
        u,
        iterations,
        converged,
    })
}

fn tangential_residual<P: EnergyPair>(pair: &P, u: &GridFunction, num: f64, den: f64) -> f64 {
    let gf = pair.grad_num(u);
    let gd = pair.grad_den(u);
    let gc = pair.constraint_grad(u);
    let gc_sq = dot(gc.values(), gc.values());
    if gc_sq == 0.0 {
        return 0.0;
    }
    let ratio = num / den;
    let n = u.len();
    let mut grad_ratio = vec![0.0; n];
    for i in 0..n {
        grad_ratio[i] = (gf.values()[i] - ratio * gd.values()[i]) / den;
    }
    let kappa = dot(&grad_ratio, gc.values()) / gc_sq;
    let defect: f64 = (0..n)
        .map(|i| {
            let d = grad_ratio[i] - kappa * gc.values()[i];
            d * d
        })
        .sum::<f64>()
        .sqrt();
    defect * den / norm2(gf.values()).max(1e-30)
}

fn perturbed(base: &GridFunction, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = base.clone();
    for v in out.values_mut() {
        *v *= 1.0 + 0.1 * rng.gen_range(-1.0..1.0);
    }
    out
}

fn minimize_with_restarts<P: EnergyPair>(
    pair: &P,
    mu: f64,
    cfg: &SolverConfig,
    base_init: &GridFunction,
    sym: Symmetry,
) -> Result<EigenpairResult> {
    let attempts = cfg.restarts.max(1);
    let mut best: Option<EigenpairResult> = None;
    for r in 0..attempts {
        let init = if r == 0 {
            base_init.clone()
        } else {
            perturbed(
                base_init,
                cfg.seed
                    .wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            )
        };
        let candidate = constrained_minimize(pair, mu, cfg, &init, sym)?;
        best = Some(match best.take() {
            None => candidate,
            Some(current) => {
                let better = match (candidate.converged, current.converged) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => candidate.alpha < current.alpha,
                    (false, false) => candidate.residual < current.residual,
                };
                if better {
                    candidate
                } else {
                    current
                }
            }
        });
    }
    Ok(best.expect("at least one restart"))
}

/// The default positive initial guess: a parabolic bump vanishing at ∂Ω.
pub fn positive_bump(grid: Grid) -> GridFunction {
    let mid = grid.domain.midpoint();
    let half = 0.5 * grid.domain.diam();
    GridFunction::from_fn(grid, |x| {
        let xi = (x - mid) / half;
        1.0 - xi * xi
    })
}

fn odd_seed(grid: Grid) -> GridFunction {
    let mid = grid.domain.midpoint();
    let half = 0.5 * grid.domain.diam();
    GridFunction::from_fn(grid, |x| {
        let xi = (x - mid) / half;
        xi * (1.0 - xi * xi)
    })
}

/// Minimize 𝓕/𝓖 over the level set Φ_G(u) = μ by projected descent with
/// multi-start. Non-convergence is reported through the `converged` flag,
/// not an error.
pub fn minimize_alpha(
    ctx: &FormContext,
    mu: f64,
    cfg: &SolverConfig,
    init: Option<&GridFunction>,
) -> Result<EigenpairResult> {
    if !(mu > 0.0) {
        return Err(Error::Precondition(format!(
            "constraint level mu must be positive, got {mu}"
        )));
    }
    let base = match init {
        Some(u) => u.clone(),
        None => positive_bump(EnergyPair::grid(ctx)),
    };
    minimize_with_restarts(ctx, mu, cfg, &base, Symmetry::None)
}

/// Least-squares Lagrange multiplier
/// `λ = ⟨∇𝓕(u), ∇𝓖(u)⟩ / ⟨∇𝓖(u), ∇𝓖(u)⟩`.
pub fn extract_lambda(ctx: &FormContext, u: &GridFunction) -> Result<f64> {
    let gf = ctx.grad_f(u);
    let gg = ctx.grad_g(u);
    let gg_sq = dot(gg.values(), gg.values());
    if gg_sq == 0.0 {
        return Err(Error::DegenerateConstraint);
    }
    Ok(dot(gf.values(), gg.values()) / gg_sq)
}

/// Solve per μ (warm-starting each level from the previous rescaled
/// minimizer) and report the infima over the sweep.
pub fn sweep_mu(ctx: &FormContext, mus: &[f64], cfg: &SolverConfig) -> Result<SweepResult> {
    if mus.is_empty() {
        return Err(Error::Precondition("mu sweep requires at least one level".into()));
    }
    let mut entries = Vec::with_capacity(mus.len());
    let mut warm: Option<GridFunction> = None;
    for &mu in mus {
        let result = minimize_alpha(ctx, mu, cfg, warm.as_ref())?;
        warm = Some(result.u.clone());
        entries.push(SweepEntry {
            parameter: mu,
            result,
        });
    }
    let alpha_1 = entries
        .iter()
        .map(|e| e.result.alpha)
        .fold(f64::INFINITY, f64::min);
    let lambda_1 = entries
        .iter()
        .map(|e| e.result.lambda)
        .fold(f64::INFINITY, f64::min);
    Ok(SweepResult {
        entries,
        alpha_1,
        lambda_1,
    })
}

/// Minimize over odd functions on a symmetric grid: the same projected
/// descent with an odd-symmetry projection applied each step. On a mirror
/// symmetric problem the returned pair is a genuine critical point (the
/// gradient of an odd function is odd), and its λ upper-bounds the first
/// eigenvalue since odd candidates form a strict subset of M_μ.
pub fn odd_minimizer(
    ctx: &FormContext,
    mu: f64,
    cfg: &SolverConfig,
) -> Result<EigenpairResult> {
    if !(mu > 0.0) {
        return Err(Error::Precondition(format!(
            "constraint level mu must be positive, got {mu}"
        )));
    }
    minimize_with_restarts(ctx, mu, cfg, &odd_seed(EnergyPair::grid(ctx)), Symmetry::Odd)
}

/// Per-side outcome of a nodal-domain check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodalSide {
    /// +1 for Ω⁺, −1 for Ω⁻.
    pub sign: i8,
    /// Interval hull of the sign set.
    pub hull: (f64, f64),
    pub cells: usize,
    pub lambda_sub: f64,
    /// p⁺·λ(Ω) − λ₁(Ω^±); positive means the bound holds.
    pub margin: f64,
    pub bound_holds: bool,
    /// Explicit measure bound λ(Ω) ≥ C·|Ω^±|^{−γ} with derived constants.
    pub measure_bound: f64,
    pub measure_gamma: f64,
    pub measure_c: f64,
    pub measure_bound_holds: bool,
    pub sub_converged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodalReport {
    pub lambda_omega: f64,
    pub p_plus: f64,
    pub positive: NodalSide,
    pub negative: NodalSide,
}

impl NodalReport {
    pub fn holds(&self) -> bool {
        self.positive.bound_holds && self.negative.bound_holds
    }
}

/// Explicit lower bound for α_{1,μ} from the modular Poincaré inequality:
/// `α ≥ 1 / max{(C_p d^s)^{p⁻}, (C_p d^s)^{p⁺}}` with
/// `C_p = (s p⁺ / (n ω_n))^{1/p⁻}` and n = 1, ω₁ = 2.
pub fn alpha_lower_bound(f: &YoungFunction, s: f64, diam: f64) -> f64 {
    let cp = (s * f.p_plus() / 2.0).powf(1.0 / f.p_minus());
    let base = cp * diam.powf(s);
    let denom = base.powf(f.p_minus()).max(base.powf(f.p_plus()));
    denom.recip()
}

fn measure_bound(f: &YoungFunction, s: f64, measure: f64) -> (f64, f64, f64) {
    let p_minus = f.p_minus();
    let p_plus = f.p_plus();
    let cp = (s * p_plus / 2.0).powf(1.0 / p_minus);
    let base = cp * measure.powf(s);
    let exponent = if base.powf(p_minus) >= base.powf(p_plus) {
        p_minus
    } else {
        p_plus
    };
    let prefactor = p_minus / (p_plus * p_plus) * cp.powf(-exponent);
    let gamma = s * exponent;
    (prefactor * measure.powf(-gamma), gamma, prefactor)
}

/// Check the nodal-domain eigenvalue bounds for a sign-changing pair:
/// solve the first eigenproblem on the interval hull of each sign set and
/// compare against p⁺·λ(Ω). Isolated single-cell sign flips are absorbed
/// into their neighboring run before hulls are formed.
pub fn nodal_check(
    ctx: &FormContext,
    pair: &EigenpairResult,
    cfg: &SolverConfig,
) -> Result<NodalReport> {
    let u = &pair.u;
    let scale = u.linf();
    let tol = 1e-8 * scale;
    if !(u.min() < -tol && u.max() > tol) {
        return Err(Error::Precondition(
            "nodal check requires a sign-changing eigenfunction".into(),
        ));
    }

    // classify cells, then absorb sign runs shorter than 2 cells
    let mut signs: Vec<i8> = u
        .values()
        .iter()
        .map(|v| {
            if *v > tol {
                1
            } else if *v < -tol {
                -1
            } else {
                0
            }
        })
        .collect();
    let mut runs: Vec<(usize, usize, i8)> = Vec::new();
    for (i, s) in signs.iter().enumerate() {
        match runs.last_mut() {
            Some((_, end, rs)) if *rs == *s && *end + 1 == i => *end = i,
            _ => runs.push((i, i, *s)),
        }
    }
    for k in 0..runs.len() {
        let (start, end, s) = runs[k];
        if s != 0 && end - start < 1 {
            let neighbor = if k > 0 { runs[k - 1].2 } else { runs.get(k + 1).map(|r| r.2).unwrap_or(0) };
            if neighbor != 0 && neighbor != s {
                for cell in &mut signs[start..=end] {
                    *cell = neighbor;
                }
            }
        }
    }

    let grid = EnergyPair::grid(ctx);
    let mut side = |sign: i8| -> Result<NodalSide> {
        let idx: Vec<usize> = signs
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == sign)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            return Err(Error::Precondition(format!(
                "sign set {sign:+} has no cells after absorption"
            )));
        }
        let (i0, i1) = (idx[0], *idx.last().unwrap() + 1);
        if i1 - i0 < 4 {
            return Err(Error::Precondition(format!(
                "sign set {sign:+} spans fewer than 4 cells; refine the grid"
            )));
        }
        let sub_grid = grid.subgrid(i0, i1)?;
        let sub_weight = match ctx.weight() {
            Some(w) => Some(w.slice(i0, i1)?),
            None => None,
        };
        let sub_ctx = FormContext::new(
            FormContext::young(ctx).clone(),
            ctx.s(),
            sub_grid,
            sub_weight,
            &cfg.quad,
        )?;
        let sub = minimize_alpha(&sub_ctx, pair.mu, cfg, None)?;
        let margin = ctx.young().p_plus() * pair.lambda - sub.lambda;
        let measure = sub_grid.domain.diam();
        let (bound, gamma, c) = measure_bound(ctx.young(), ctx.s(), measure);
        Ok(NodalSide {
            sign,
            hull: (sub_grid.domain.a, sub_grid.domain.b),
            cells: i1 - i0,
            lambda_sub: sub.lambda,
            margin,
            bound_holds: margin > 0.0,
            measure_bound: bound,
            measure_gamma: gamma,
            measure_c: c,
            measure_bound_holds: pair.lambda >= bound,
            sub_converged: sub.converged,
        })
    };

    Ok(NodalReport {
        lambda_omega: pair.lambda,
        p_plus: ctx.young().p_plus(),
        positive: side(1)?,
        negative: side(-1)?,
    })
}

/// The local (s = 1) limit problem: Φ_G̃(|u'|)/Φ_G̃(u) with centered
/// finite differences for |u'| and zero ghost values outside Ω.
pub struct LocalFormContext {
    f: YoungFunction,
    grid: Grid,
}

impl LocalFormContext {
    /// `f` should be the limit Young function G̃ of the family under study.
    pub fn new(f: YoungFunction, grid: Grid) -> Self {
        Self { f, grid }
    }

    fn diff(&self, u: &GridFunction, i: usize) -> f64 {
        let v = u.values();
        let up = if i + 1 < self.grid.n { v[i + 1] } else { 0.0 };
        let dn = if i > 0 { v[i - 1] } else { 0.0 };
        (up - dn) / (2.0 * self.grid.h)
    }
}

impl EnergyPair for LocalFormContext {
    fn grid(&self) -> Grid {
        self.grid
    }

    fn young(&self) -> &YoungFunction {
        &self.f
    }

    fn energy_num(&self, u: &GridFunction) -> f64 {
        let h = self.grid.h;
        (0..self.grid.n)
            .map(|i| self.f.value(self.diff(u, i).abs()) * h)
            .sum()
    }

    fn grad_num(&self, u: &GridFunction) -> GridFunction {
        let n = self.grid.n;
        let density: Vec<f64> = (0..n)
            .map(|i| {
                let d = self.diff(u, i);
                if d == 0.0 {
                    0.0
                } else {
                    self.f.deriv(d.abs()) * d.signum()
                }
            })
            .collect();
        let mut g = GridFunction::zeros(self.grid);
        for j in 0..n {
            let mut acc = 0.0;
            if j >= 1 {
                acc += density[j - 1];
            }
            if j + 1 < n {
                acc -= density[j + 1];
            }
            g.values_mut()[j] = 0.5 * acc;
        }
        g
    }

    fn energy_den(&self, u: &GridFunction) -> f64 {
        modular_g(u, &self.f, None)
    }

    fn grad_den(&self, u: &GridFunction) -> GridFunction {
        let h = self.grid.h;
        let mut g = GridFunction::zeros(self.grid);
        for (gi, ui) in g.values_mut().iter_mut().zip(u.values()) {
            if *ui != 0.0 {
                *gi = self.f.deriv(ui.abs()) * ui.signum() * h;
            }
        }
        g
    }
}

/// Solve the local limit problem on `grid` for the limit function of `f`.
pub fn minimize_alpha_local(
    f: &YoungFunction,
    grid: Grid,
    mu: f64,
    cfg: &SolverConfig,
) -> Result<EigenpairResult> {
    let gtilde = f.limit(1)?;
    let ctx = LocalFormContext::new(gtilde, grid);
    minimize_with_restarts(&ctx, mu, cfg, &positive_bump(grid), Symmetry::None)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaEntry {
    pub s: f64,
    pub alpha_s: f64,
    /// (1−s)·α_{1,μ,s}, the scaled quantity that converges as s ↑ 1.
    pub scaled_alpha: f64,
    pub gap: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaReport {
    pub entries: Vec<GammaEntry>,
    pub alpha_local: f64,
    pub local_converged: bool,
    /// |scaled − local| nonincreasing along the sweep.
    pub monotone_gap: bool,
    pub warnings: Vec<String>,
}

/// Sweep s ↑ 1: compute (1−s)·α_{1,μ,s} per fractional order and compare
/// against the local limit value α_{1,μ,1} obtained with the limit Young
/// function.
pub fn gamma_sweep(
    f: &YoungFunction,
    grid: Grid,
    mu: f64,
    s_list: &[f64],
    cfg: &SolverConfig,
) -> Result<GammaReport> {
    if s_list.is_empty() || s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "gamma sweep requires a strictly increasing list of fractional orders".into(),
        ));
    }
    if s_list.iter().any(|s| *s <= 0.0 || *s >= 1.0) {
        return Err(Error::Precondition(
            "fractional orders must lie in (0, 1)".into(),
        ));
    }

    let mut warnings = Vec::new();
    let local = minimize_alpha_local(f, grid, mu, cfg)?;

    let mut entries = Vec::with_capacity(s_list.len());
    let mut warm: Option<GridFunction> = None;
    for &s in s_list {
        if (1.0 - s) * grid.n as f64 < 8.0 {
            warnings.push(format!(
                "effective near-diagonal resolution (1-s)*N = {:.2} < 8 at s = {s}; refine the grid",
                (1.0 - s) * grid.n as f64
            ));
        }
        let ctx = FormContext::new(f.clone(), s, grid, None, &cfg.quad)?;
        let pair = minimize_alpha(&ctx, mu, cfg, warm.as_ref())?;
        warm = Some(pair.u.clone());
        let scaled = (1.0 - s) * pair.alpha;
        entries.push(GammaEntry {
            s,
            alpha_s: pair.alpha,
            scaled_alpha: scaled,
            gap: (scaled - local.alpha).abs(),
            converged: pair.converged,
        });
    }

    let monotone_gap = entries.windows(2).all(|w| w[1].gap <= w[0].gap);
    Ok(GammaReport {
        entries,
        alpha_local: local.alpha,
        local_converged: local.converged,
        monotone_gap,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::QuadConfig;
    use crate::mesh::Domain;
    use approx::assert_relative_eq;

    fn ctx(f: YoungFunction, s: f64, n: usize) -> FormContext {
        let grid = Grid::new(Domain::new(-1.0, 1.0).unwrap(), n).unwrap();
        FormContext::new(f, s, grid, None, &QuadConfig::default()).unwrap()
    }

    fn fast_cfg() -> SolverConfig {
        SolverConfig {
            restarts: 1,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn rejects_nonpositive_mu() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 16);
        assert!(minimize_alpha(&c, 0.0, &fast_cfg(), None).is_err());
        assert!(minimize_alpha(&c, -1.0, &fast_cfg(), None).is_err());
    }

    #[test]
    fn power_minimizer_constraint_and_signs() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 48);
        let pair = minimize_alpha(&c, 1.0, &fast_cfg(), None).unwrap();
        assert!(pair.converged, "residual {}", pair.residual);
        assert!((c.energy_g(&pair.u) - 1.0).abs() <= 1e-9);
        assert!(pair.is_one_signed(1e-8));
        // λ = α exactly for homogeneous families, up to the residual
        assert_relative_eq!(pair.lambda, pair.alpha, max_relative = 1e-6);
        assert_relative_eq!(
            pair.alpha,
            c.energy_f(&pair.u) / c.energy_g(&pair.u),
            max_relative = 1e-12
        );
        // explicit Poincaré-derived lower bound
        assert!(pair.alpha >= alpha_lower_bound(c.young(), 0.5, 2.0));
    }

    #[test]
    fn extract_lambda_degenerate() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 16);
        let zero = GridFunction::zeros(EnergyPair::grid(&c));
        assert!(matches!(
            extract_lambda(&c, &zero),
            Err(Error::DegenerateConstraint)
        ));
    }

    #[test]
    fn sweep_mu_single_entry_infima() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 24);
        let sweep = sweep_mu(&c, &[1.0], &fast_cfg()).unwrap();
        assert_eq!(sweep.entries.len(), 1);
        assert_eq!(sweep.alpha_1, sweep.entries[0].result.alpha);
        assert_eq!(sweep.lambda_1, sweep.entries[0].result.lambda);
        assert!(sweep_mu(&c, &[], &fast_cfg()).is_err());
    }

    #[test]
    fn comparability_for_nonhomogeneous_family() {
        let c = ctx(YoungFunction::power_log(1.0, 1.0, 1.0).unwrap(), 0.5, 32);
        for mu in [0.3, 1.0, 3.0] {
            let pair = minimize_alpha(&c, mu, &fast_cfg(), None).unwrap();
            assert!(pair.converged);
            let lo = c.young().p_minus() / c.young().p_plus() * pair.alpha;
            let hi = c.young().p_plus() / c.young().p_minus() * pair.alpha;
            assert!(
                pair.lambda >= lo * (1.0 - 1e-9) && pair.lambda <= hi * (1.0 + 1e-9),
                "mu={mu}: lambda {} not within [{lo}, {hi}]",
                pair.lambda
            );
        }
    }

    #[test]
    fn odd_minimizer_is_odd_with_two_nodal_domains() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 64);
        let cfg = fast_cfg();
        let odd = odd_minimizer(&c, 1.0, &cfg).unwrap();
        assert!(odd.converged);
        let v = odd.u.values();
        let n = v.len();
        for i in 0..n / 2 {
            assert_eq!(v[i], -v[n - 1 - i], "odd projection must be exact");
        }
        let flips = v
            .windows(2)
            .filter(|w| w[0].signum() != w[1].signum() && w[0] != 0.0 && w[1] != 0.0)
            .count();
        assert_eq!(flips, 1, "second mode has exactly two nodal domains");

        let first = minimize_alpha(&c, 1.0, &cfg, None).unwrap();
        assert!(
            odd.lambda > first.lambda,
            "odd candidate {} must exceed the first eigenvalue {}",
            odd.lambda,
            first.lambda
        );
    }

    #[test]
    fn nodal_check_bounds_hold_for_odd_pair() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 64);
        let cfg = fast_cfg();
        let odd = odd_minimizer(&c, 1.0, &cfg).unwrap();
        let report = nodal_check(&c, &odd, &cfg).unwrap();
        assert!(report.holds(), "{report:?}");
        assert!(report.positive.margin > 0.0);
        assert!(report.negative.margin > 0.0);
        assert!(report.positive.measure_bound_holds);

        // one-signed input is rejected
        let first = minimize_alpha(&c, 1.0, &cfg, None).unwrap();
        assert!(nodal_check(&c, &first, &cfg).is_err());
    }

    #[test]
    fn domain_inclusion_monotonicity() {
        let f = YoungFunction::power(2.0).unwrap();
        let cfg = fast_cfg();
        let full = ctx(f.clone(), 0.5, 64);
        let alpha_full = minimize_alpha(&full, 1.0, &cfg, None).unwrap().alpha;
        let sub_grid = EnergyPair::grid(&full).subgrid(16, 48).unwrap();
        let sub = FormContext::new(f, 0.5, sub_grid, None, &cfg.quad).unwrap();
        let alpha_sub = minimize_alpha(&sub, 1.0, &cfg, None).unwrap().alpha;
        assert!(
            alpha_sub > alpha_full,
            "sub-interval infimum {alpha_sub} must dominate {alpha_full}"
        );
    }

    #[test]
    fn determinism_bitwise() {
        let c = ctx(YoungFunction::spliced_power(1.0, 2.0, 1.0).unwrap(), 0.4, 32);
        let cfg = SolverConfig::default().with_seed(123);
        let a = minimize_alpha(&c, 1.0, &cfg, None).unwrap();
        let b = minimize_alpha(&c, 1.0, &cfg, None).unwrap();
        assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        for (x, y) in a.u.values().iter().zip(b.u.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn local_limit_matches_interval_eigenvalue() {
        // first Dirichlet eigenvalue of -u'' on (-1, 1) is π²/4
        let f = YoungFunction::power(2.0).unwrap();
        let grid = Grid::new(Domain::new(-1.0, 1.0).unwrap(), 256).unwrap();
        let pair = minimize_alpha_local(&f, grid, 1.0, &fast_cfg()).unwrap();
        assert!(pair.converged);
        let target = std::f64::consts::PI * std::f64::consts::PI / 4.0;
        assert!(
            (pair.alpha - target).abs() <= 0.01 * target,
            "local alpha {} vs π²/4 = {target}",
            pair.alpha
        );
    }

    #[test]
    fn gamma_sweep_rejects_bad_lists() {
        let f = YoungFunction::power(2.0).unwrap();
        let grid = Grid::new(Domain::new(-1.0, 1.0).unwrap(), 32).unwrap();
        assert!(gamma_sweep(&f, grid, 1.0, &[], &fast_cfg()).is_err());
        assert!(gamma_sweep(&f, grid, 1.0, &[0.5, 0.4], &fast_cfg()).is_err());
        assert!(gamma_sweep(&f, grid, 1.0, &[0.5, 1.2], &fast_cfg()).is_err());
    }
}
