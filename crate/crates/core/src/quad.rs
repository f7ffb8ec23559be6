//! Gauss–Kronrod quadrature kernels shared by the Young-function and
//! modular evaluators.
//!
//! Two entry points: [`adaptive`] bisects panels until a mixed
//! absolute/relative tolerance is met; [`fixed_panels`] integrates over a
//! caller-supplied panel layout with no adaptivity, so that integrals whose
//! weights must not depend on the integrand (exact-gradient quadratures) can
//! share one layout between a functional and its derivative.

/// 15-point Kronrod abscissae on [0, 1] side (symmetric), QUADPACK values.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// 7-point Gauss weights embedded in the Kronrod rule.
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One GK15 panel: returns (kronrod value, |kronrod - gauss| error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];

    for (k, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * fsum;
        // odd Kronrod indices coincide with the embedded Gauss nodes
        if k % 2 == 1 {
            gauss += WG[k / 2] * fsum;
        }
    }

    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive GK15 over [a, b]. Panels are bisected (worst error first, via a
/// simple max scan) until `sum(err) <= max(abs_tol, rel_tol * |sum(val)|)` or
/// the panel budget is exhausted, in which case the current estimate is
/// returned; integrands here are smooth enough that the budget is never the
/// binding constraint in practice.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk15(&f, a, b);
    panels.push((a, b, v, e));

    const MAX_PANELS: usize = 4096;
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || panels.len() >= MAX_PANELS {
            return total;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty panel list");
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// GK15 on each panel `[edges[k], edges[k+1]]`, summed in panel order.
/// No refinement: the node layout depends only on `edges`.
pub fn fixed_panels<F: Fn(f64) -> f64>(f: F, edges: &[f64]) -> f64 {
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += gk15(&f, w[0], w[1]).0;
    }
    total
}

/// Nodes and weights of the GK15 rule mapped to [a, b], appended to `out`.
/// Used to pre-assemble quadrature stencils whose weights must stay fixed.
pub fn gk15_nodes(a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    for (k, &x) in XGK.iter().enumerate() {
        let w = WGK[k] * half;
        if k == 7 {
            out.push((center, w));
        } else {
            out.push((center - half * x, w));
            out.push((center + half * x, w));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        // GK15 is exact for polynomials up to degree 22
        let v = adaptive(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 1e-14);
        assert_relative_eq!(v, 4.0 - 4.0 + 2.0, max_relative = 1e-13);
    }

    #[test]
    fn mildly_singular_endpoint() {
        // integrand t^{-1/2} integrable at 0
        let v = adaptive(|x| x.sqrt().recip(), 0.0, 1.0, 1e-10, 1e-14);
        assert_relative_eq!(v, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn fixed_panels_match_adaptive_on_smooth() {
        let edges: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
        let a = fixed_panels(|x: f64| (3.0 * x).sin(), &edges);
        let b = adaptive(|x: f64| (3.0 * x).sin(), 0.0, 1.0, 1e-12, 1e-15);
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn gk15_nodes_reproduce_panel_value() {
        let mut nodes = Vec::new();
        gk15_nodes(0.25, 0.75, &mut nodes);
        let direct = fixed_panels(|x: f64| x.exp(), &[0.25, 0.75]);
        let from_nodes: f64 = nodes.iter().map(|(x, w)| w * x.exp()).sum();
        assert_relative_eq!(direct, from_nodes, max_relative = 1e-14);
    }
}
