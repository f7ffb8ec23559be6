//! Discrete energy functionals, their exact gradients, Euler–Lagrange
//! residuals, and a convex solver for the nonlocal Dirichlet problem.
//!
//! The numerator functional is the nonlocal modular assembled in
//! [`crate::mesh::SgQuadrature`]; the denominator is the (optionally
//! weighted) pointwise modular. Both gradients are the term-by-term
//! derivatives of the evaluated quadrature sums, so finite-difference checks
//! agree to roundoff and homogeneity identities hold exactly for power-type
//! Young functions.

use std::sync::Arc;

use crate::config::{QuadConfig, SolverConfig, StepPolicy};
use crate::error::{Error, Result};
use crate::mesh::{modular_g, Grid, GridFunction, SgQuadrature, Weight};
use crate::young::YoungFunction;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Everything needed to evaluate the pair of functionals on one grid:
/// Young function, fractional order, optional weight, quadrature stencil.
#[derive(Clone, Debug)]
pub struct FormContext {
    f: YoungFunction,
    grid: Grid,
    weight: Option<Weight>,
    quad: Arc<SgQuadrature>,
}

impl FormContext {
    pub fn new(
        f: YoungFunction,
        s: f64,
        grid: Grid,
        weight: Option<Weight>,
        quad_cfg: &QuadConfig,
    ) -> Result<Self> {
        if let Some(w) = &weight {
            if w.grid() != grid {
                return Err(Error::Config(
                    "weight grid does not match the context grid".into(),
                ));
            }
        }
        Ok(Self {
            f,
            grid,
            weight,
            quad: Arc::new(SgQuadrature::new(grid, s, quad_cfg)?),
        })
    }

    /// Same stencil, different weight. Cheap: the quadrature is shared.
    pub fn with_weight(&self, weight: Option<Weight>) -> Result<Self> {
        if let Some(w) = &weight {
            if w.grid() != self.grid {
                return Err(Error::Config(
                    "weight grid does not match the context grid".into(),
                ));
            }
        }
        Ok(Self {
            f: self.f.clone(),
            grid: self.grid,
            weight,
            quad: Arc::clone(&self.quad),
        })
    }

    pub fn young(&self) -> &YoungFunction {
        &self.f
    }

    pub fn s(&self) -> f64 {
        self.quad.s()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn weight(&self) -> Option<&Weight> {
        self.weight.as_ref()
    }

    pub fn quadrature(&self) -> &SgQuadrature {
        &self.quad
    }

    /// Nonlocal energy 𝓕(u) = Φ_{s,G}(u).
    pub fn energy_f(&self, u: &GridFunction) -> f64 {
        self.quad.modular(&self.f, u)
    }

    /// Exact gradient of [`Self::energy_f`] with respect to nodal values.
    pub fn grad_f(&self, u: &GridFunction) -> GridFunction {
        self.quad.modular_grad(&self.f, u)
    }

    /// Local energy 𝓖(u) = ∫ ρ G(|u|) dx (ρ ≡ 1 when no weight is set).
    pub fn energy_g(&self, u: &GridFunction) -> f64 {
        modular_g(u, &self.f, self.weight.as_ref())
    }

    /// Exact gradient of [`Self::energy_g`]: components ρᵢ g(|uᵢ|) sign(uᵢ) h.
    pub fn grad_g(&self, u: &GridFunction) -> GridFunction {
        let h = self.grid.h;
        let mut g = GridFunction::zeros(self.grid);
        match &self.weight {
            None => {
                for (gi, ui) in g.values_mut().iter_mut().zip(u.values()) {
                    if *ui != 0.0 {
                        *gi = self.f.deriv(ui.abs()) * ui.signum() * h;
                    }
                }
            }
            Some(w) => {
                for ((gi, ui), r) in g.values_mut().iter_mut().zip(u.values()).zip(w.values()) {
                    if *ui != 0.0 {
                        *gi = r * self.f.deriv(ui.abs()) * ui.signum() * h;
                    }
                }
            }
        }
        g
    }

    /// Normalized Euler–Lagrange defect
    /// ‖∇𝓕(u) − λ ∇𝓖(u)‖₂ / max(‖∇𝓕(u)‖₂, 1e-30).
    pub fn residual(&self, u: &GridFunction, lambda: f64) -> f64 {
        let gf = self.grad_f(u);
        let gg = self.grad_g(u);
        let defect: f64 = gf
            .values()
            .iter()
            .zip(gg.values())
            .map(|(a, b)| {
                let d = a - lambda * b;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        defect / norm2(gf.values()).max(1e-30)
    }

    /// Solve the nonlocal Dirichlet problem: minimize the strictly convex
    /// energy `𝓕(u) − Σ fᵢ uᵢ h` by descent with Armijo backtracking until
    /// the gradient norm falls below `cfg.dirichlet_rtol · ‖f‖` (h-weighted
    /// l² norm of f). Returns a non-convergence error carrying the last
    /// iterate when the iteration cap is hit.
    pub fn dirichlet_solve(&self, rhs: &GridFunction, cfg: &SolverConfig) -> Result<GridFunction> {
        let h = self.grid.h;
        let n = self.grid.n;
        let f_scale = norm2(rhs.values()) * h.sqrt();
        if f_scale == 0.0 {
            return Ok(GridFunction::zeros(self.grid));
        }
        let tol = cfg.dirichlet_rtol * f_scale;

        let energy = |u: &GridFunction| -> f64 {
            self.energy_f(u) - h * dot(u.values(), rhs.values())
        };
        let gradient = |u: &GridFunction| -> GridFunction {
            let mut g = self.grad_f(u);
            for (gi, fi) in g.values_mut().iter_mut().zip(rhs.values()) {
                *gi -= h * fi;
            }
            g
        };

        let mut u = GridFunction::zeros(self.grid);
        let mut e = energy(&u);
        let mut g = gradient(&u);
        let mut prev: Option<(Vec<f64>, Vec<f64>, f64)> = None; // (u, g, step)

        for _ in 0..cfg.max_iter {
            let gnorm = norm2(g.values());
            if gnorm <= tol {
                return Ok(u);
            }

            let trial = match (&prev, cfg.step_policy) {
                (Some((pu, pg, pstep)), StepPolicy::Bb) => {
                    let sy: f64 = (0..n)
                        .map(|i| (u.values()[i] - pu[i]) * (g.values()[i] - pg[i]))
                        .sum();
                    let ss: f64 = (0..n).map(|i| (u.values()[i] - pu[i]).powi(2)).sum();
                    if sy > 0.0 && ss > 0.0 {
                        (ss / sy).clamp(1e-12, 1e12)
                    } else {
                        pstep * 2.0
                    }
                }
                (Some((_, _, pstep)), StepPolicy::Grow) => pstep * 2.0,
                (None, _) => self.grid.domain.diam() / (self.f.p_plus() * gnorm),
            };

            // Armijo backtracking along -g
            let slope = -gnorm * gnorm;
            let mut step = trial;
            let mut accepted = None;
            for _ in 0..64 {
                let mut cand = u.clone();
                for (ci, gi) in cand.values_mut().iter_mut().zip(g.values()) {
                    *ci -= step * gi;
                }
                let ec = energy(&cand);
                if ec <= e + 1e-4 * step * slope {
                    accepted = Some((cand, ec));
                    break;
                }
                step *= 0.5;
            }
            let Some((next, enext)) = accepted else {
                return Err(Error::NonConvergence {
                    iterations: cfg.max_iter,
                    grad_norm: gnorm,
                    last: Box::new(u),
                });
            };

            prev = Some((u.values().to_vec(), g.values().to_vec(), step));
            u = next;
            e = enext;
            g = gradient(&u);
        }

        let gnorm = norm2(g.values());
        if gnorm <= tol {
            Ok(u)
        } else {
            Err(Error::NonConvergence {
                iterations: cfg.max_iter,
                grad_norm: gnorm,
                last: Box::new(u),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(f: YoungFunction, s: f64, n: usize) -> FormContext {
        let grid = Grid::new(Domain::new(-1.0, 1.0).unwrap(), n).unwrap();
        FormContext::new(f, s, grid, None, &QuadConfig::default()).unwrap()
    }

    fn random_u(grid: Grid, rng: &mut ChaCha8Rng) -> GridFunction {
        GridFunction::from_fn(grid, |_| rng.gen_range(-1.0..1.0))
    }

    /// Central finite differences of a scalar functional, the independent
    /// oracle for every gradient in this module.
    fn fd_gradient(
        energy: impl Fn(&GridFunction) -> f64,
        u: &GridFunction,
        step: f64,
    ) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        for i in 0..u.len() {
            let mut up = u.clone();
            up.values_mut()[i] += step;
            let mut dn = u.clone();
            dn.values_mut()[i] -= step;
            g[i] = (energy(&up) - energy(&dn)) / (2.0 * step);
        }
        g
    }

    #[test]
    fn zero_function_edge_cases() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 16);
        let zero = GridFunction::zeros(c.grid());
        assert_eq!(c.energy_f(&zero), 0.0);
        assert_eq!(c.energy_g(&zero), 0.0);
        assert!(c.grad_f(&zero).values().iter().all(|v| *v == 0.0));
        assert!(c.grad_g(&zero).values().iter().all(|v| *v == 0.0));
        assert_eq!(c.residual(&zero, 3.0), 0.0);
    }

    #[test]
    fn grad_g_is_linear_for_p2() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_u(c.grid(), &mut rng);
        let g = c.grad_g(&u);
        let h = c.grid().h;
        for (gi, ui) in g.values().iter().zip(u.values()) {
            assert_relative_eq!(*gi, h * ui, max_relative = 1e-14);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let families = [
            YoungFunction::power(2.0).unwrap(),
            YoungFunction::power(3.0).unwrap(),
            YoungFunction::power_log(1.0, 1.0, 1.0).unwrap(),
            YoungFunction::spliced_power(1.0, 2.0, 1.0).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for f in families {
            let c = ctx(f, 0.5, 24);
            for _ in 0..3 {
                let u = random_u(c.grid(), &mut rng);
                let step = 1e-6 * u.linf().max(1.0);

                let gf = c.grad_f(&u);
                let fd = fd_gradient(|v| c.energy_f(v), &u, step);
                let scale = gf.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                for (a, b) in gf.values().iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-5 * scale, "{a} vs {b} (scale {scale})");
                }

                let gg = c.grad_g(&u);
                let fd = fd_gradient(|v| c.energy_g(v), &u, step);
                let scale = gg.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                for (a, b) in gg.values().iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-6 * scale, "{a} vs {b} (scale {scale})");
                }
            }
        }
    }

    #[test]
    fn euler_identity_and_form_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [2.0, 3.0] {
            let c = ctx(YoungFunction::power(p).unwrap(), 0.4, 20);
            let u = random_u(c.grid(), &mut rng);
            let e = c.energy_f(&u);
            let pairing = dot(c.grad_f(&u).values(), u.values());
            assert_relative_eq!(pairing, p * e, max_relative = 1e-9);
        }
        // (L) squeezes the pairing for non-homogeneous families
        let c = ctx(YoungFunction::power_log(1.0, 1.0, 1.0).unwrap(), 0.6, 20);
        for _ in 0..5 {
            let u = random_u(c.grid(), &mut rng);
            let e = c.energy_f(&u);
            let pairing = dot(c.grad_f(&u).values(), u.values());
            assert!(c.young().p_minus() * e <= pairing * (1.0 + 1e-12));
            assert!(pairing <= c.young().p_plus() * e * (1.0 + 1e-12));
        }
    }

    #[test]
    fn residual_conventions() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 16);
        let u = GridFunction::from_fn(c.grid(), |x| 1.0 - x * x);
        // λ = 0 leaves the normalized defect at exactly 1
        assert_relative_eq!(c.residual(&u, 0.0), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn dirichlet_zero_rhs_is_zero() {
        let c = ctx(YoungFunction::power(3.0).unwrap(), 0.5, 16);
        let u = c
            .dirichlet_solve(&GridFunction::zeros(c.grid()), &SolverConfig::default())
            .unwrap();
        assert!(u.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dirichlet_constant_rhs_symmetry_and_positivity() {
        let c = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 128);
        let one = GridFunction::from_fn(c.grid(), |_| 1.0);
        let u = c.dirichlet_solve(&one, &SolverConfig::default()).unwrap();
        assert!(u.min() > 0.0, "strong maximum principle: min = {}", u.min());
        let r = u.reflected();
        for (a, b) in u.values().iter().zip(r.values()) {
            assert!((a - b).abs() <= 1e-8 * u.linf());
        }

        // center value against a finer-grid oracle
        let fine = ctx(YoungFunction::power(2.0).unwrap(), 0.5, 512);
        let one_fine = GridFunction::from_fn(fine.grid(), |_| 1.0);
        let uf = fine.dirichlet_solve(&one_fine, &SolverConfig::default()).unwrap();
        let c128 = 0.5 * (u.values()[63] + u.values()[64]);
        let c512 = 0.5 * (uf.values()[255] + uf.values()[256]);
        assert!(
            (c128 - c512).abs() <= 0.02 * c512,
            "center {c128} vs oracle {c512}"
        );
    }

    #[test]
    fn dirichlet_sign_equivariance() {
        let c = ctx(YoungFunction::power_log(1.0, 1.0, 1.0).unwrap(), 0.5, 32);
        let f = GridFunction::from_fn(c.grid(), |x| (3.0 * x).cos() + 0.2);
        let cfg = SolverConfig::default();
        let u_pos = c.dirichlet_solve(&f, &cfg).unwrap();
        let u_neg = c.dirichlet_solve(&f.scaled(-1.0), &cfg).unwrap();
        let scale = u_pos.linf();
        for (a, b) in u_pos.values().iter().zip(u_neg.values()) {
            assert!((a + b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn dirichlet_weak_maximum_principle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = ctx(YoungFunction::spliced_power(1.0, 2.0, 1.0).unwrap(), 0.3, 48);
        for _ in 0..3 {
            let f = GridFunction::from_fn(c.grid(), |_| rng.gen_range(0.0..1.0));
            let u = c.dirichlet_solve(&f, &SolverConfig::default()).unwrap();
            assert!(u.min() >= -1e-8, "weak maximum principle: {}", u.min());
        }
    }
}
