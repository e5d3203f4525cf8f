//! Discrete norms and grid-scale Hölder / C² norm proxies.
//!
//! The Hölder and C² quantities are proxies: they sample difference
//! quotients at cell centers and therefore estimate the continuum norms
//! from below. Second differences skip boundary cells, where ghost
//! reflection is only first-order consistent for generic fields.

use crate::grid::Field;
use crate::ops::{
    gradient_neumann, laplacian_neumann, max_abs_mixed_second_difference,
    max_abs_pure_second_difference,
};

/// Largest |value|.
pub fn sup_norm(f: &Field) -> f64 {
    f.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Volume-weighted L² norm.
pub fn l2_norm(f: &Field) -> f64 {
    let vol = f.grid().cell_volume();
    (f.values().iter().map(|v| v * v).sum::<f64>() * vol).sqrt()
}

/// Smallest value (not |value|).
pub fn min_value(f: &Field) -> f64 {
    f.values().iter().fold(f64::INFINITY, |m, v| m.min(*v))
}

/// Grid-scale Hölder seminorm: max over cell pairs of
/// |f(x)−f(y)| / |x−y|^α using cell-center distances.
///
/// Above 10⁴ cells the max is restricted to pairs along axis-aligned lines,
/// which keeps the scan quadratic in one axis length only.
pub fn holder_seminorm_proxy(f: &Field, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    let g = f.grid();
    let v = f.values();
    let (nx, ny) = (g.nx(), g.ny());
    let mut m = 0.0_f64;
    if g.cell_count() <= 10_000 {
        for ax in 0..nx {
            for ay in 0..ny {
                let ia = g.idx(ax, ay);
                for bx in ax..nx {
                    let start_y = if bx == ax { ay + 1 } else { 0 };
                    for by in start_y..ny {
                        let ib = g.idx(bx, by);
                        let ddx = (bx as f64 - ax as f64) * g.dx();
                        let ddy = (by as f64 - ay as f64) * g.dy();
                        let dist = if g.dim() == 1 {
                            ddx.abs()
                        } else {
                            (ddx * ddx + ddy * ddy).sqrt()
                        };
                        m = m.max((v[ia] - v[ib]).abs() / dist.powf(alpha));
                    }
                }
            }
        }
    } else {
        // axis-aligned subsampling for large grids
        for ax in 0..nx {
            for ay in 0..ny {
                let ia = g.idx(ax, ay);
                for bx in ax + 1..nx {
                    let dist = (bx - ax) as f64 * g.dx();
                    m = m.max((v[ia] - v[g.idx(bx, ay)]).abs() / dist.powf(alpha));
                }
                for by in ay + 1..ny {
                    let dist = (by - ay) as f64 * g.dy();
                    m = m.max((v[ia] - v[g.idx(ax, by)]).abs() / dist.powf(alpha));
                }
            }
        }
    }
    m
}

/// Desk-scale C² norm proxy: sup|f| + sup|∇f components| + sup|second
/// differences| (pure, plus mixed in 2D).
pub fn c2_norm_proxy(f: &Field) -> f64 {
    let grad = gradient_neumann(f);
    let d2 = max_abs_pure_second_difference(f).max(max_abs_mixed_second_difference(f));
    sup_norm(f) + grad.max_component_abs() + d2
}

/// Desk-scale C^{2+α} norm proxy: [`c2_norm_proxy`] plus the Hölder
/// seminorm proxy of the discrete Laplacian (a stand-in for the Hölder
/// seminorms of the individual second derivatives).
pub fn c2alpha_norm_proxy(f: &Field, alpha: f64) -> f64 {
    c2_norm_proxy(f) + holder_seminorm_proxy(&laplacian_neumann(f), alpha)
}

/// Slack of the Hölder product inequality
/// |fg|_α ≤ |f|₀|g|₀ + |f|₀|g|_α + |f|_α|g|₀
/// evaluated with the grid proxies (|·|_α = |·|₀ + seminorm proxy).
///
/// Non-negative for every field pair; a negative return indicates a bug in
/// the proxy implementation, not in the inequality.
pub fn holder_product_check(f: &Field, g: &Field, alpha: f64) -> f64 {
    debug_assert_eq!(f.grid(), g.grid());
    let product = Field::from_values(
        f.grid(),
        f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .collect(),
    )
    .expect("same grid");
    let f0 = sup_norm(f);
    let g0 = sup_norm(g);
    let fa = f0 + holder_seminorm_proxy(f, alpha);
    let ga = g0 + holder_seminorm_proxy(g, alpha);
    let lhs = sup_norm(&product) + holder_seminorm_proxy(&product, alpha);
    f0 * g0 + f0 * ga + fa * g0 - lhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    #[test]
    fn zero_and_constant_norms() {
        let g = Grid::new_1d(1.0, 100).unwrap();
        let z = Field::zeros(g);
        assert_eq!(sup_norm(&z), 0.0);
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(min_value(&z), 0.0);

        let c = Field::constant(g, -2.5);
        assert_eq!(sup_norm(&c), 2.5);
        assert!((l2_norm(&c) - 2.5).abs() < 1e-14);
        assert_eq!(min_value(&c), -2.5);
    }

    #[test]
    fn l2_of_single_spike() {
        let g = Grid::new_1d(1.0, 100).unwrap();
        let mut f = Field::zeros(g);
        f.values_mut()[37] = 2.0;
        assert_eq!(sup_norm(&f), 2.0);
        assert!((l2_norm(&f) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn holder_proxy_constant_and_linear() {
        let g = Grid::new_1d(1.0, 64).unwrap();
        assert_eq!(holder_seminorm_proxy(&Field::constant(g, 9.0), 0.5), 0.0);

        // f(x)=x: quotient |x−y|^{1−α} is maximized at the farthest pair
        let f = Field::from_fn_1d(g, |x| x);
        let expected = (1.0 - 1.0 / 64.0_f64).sqrt();
        let got = holder_seminorm_proxy(&f, 0.5);
        assert!((got - expected).abs() < 1e-12, "got {got}, want {expected}");
    }

    #[test]
    fn holder_proxy_large_grid_subsampling() {
        // 128x128 exceeds the all-pairs cutoff; constant fields still give 0
        // and monotone fields stay finite and positive.
        let g = Grid::new_2d(1.0, 1.0, 128, 128).unwrap();
        assert_eq!(holder_seminorm_proxy(&Field::constant(g, 1.0), 0.5), 0.0);
        let f = Field::from_fn(g, |x, y| x + y);
        assert!(holder_seminorm_proxy(&f, 0.5) > 0.0);
    }

    #[test]
    fn c2_proxy_constant_and_linear() {
        let g = Grid::new_1d(1.0, 128).unwrap();
        assert!((c2_norm_proxy(&Field::constant(g, -4.0)) - 4.0).abs() < 1e-14);

        // f(x)=x: sup ≈ 1, gradient 1 in the interior, second differences 0
        let f = Field::from_fn_1d(g, |x| x);
        let proxy = c2_norm_proxy(&f);
        assert!((proxy - 2.0).abs() < 0.01, "proxy {proxy}");
    }

    #[test]
    fn product_inequality_trivial_cases() {
        let g = Grid::new_1d(1.0, 32).unwrap();
        let one = Field::constant(g, 1.0);
        let slack = holder_product_check(&one, &one, 0.5);
        assert!((slack - 2.0).abs() < 1e-14);

        let zero = Field::zeros(g);
        let f = Field::from_fn_1d(g, |x| (3.0 * x).sin());
        assert!(holder_product_check(&zero, &f, 0.5) >= 0.0);
    }

    #[test]
    fn product_inequality_random_smooth_fields() {
        // truncated cosine series are Neumann-compatible and smooth
        let g = Grid::new_1d(1.0, 64).unwrap();
        let mut seed = 271828u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..100 {
            let (a0, a1, a2) = (next(), next(), next());
            let (b0, b1, b2) = (next(), next(), next());
            let f = Field::from_fn_1d(g, |x| {
                a0 + a1 * (std::f64::consts::PI * x).cos()
                    + a2 * (2.0 * std::f64::consts::PI * x).cos()
            });
            let h = Field::from_fn_1d(g, |x| {
                b0 + b1 * (std::f64::consts::PI * x).cos()
                    + b2 * (3.0 * std::f64::consts::PI * x).cos()
            });
            assert!(holder_product_check(&f, &h, 0.4) >= 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norms_absolutely_homogeneous(
            values in prop::collection::vec(-100.0..100.0_f64, 16),
            scale in -10.0..10.0_f64,
        ) {
            let g = Grid::new_1d(1.0, 16).unwrap();
            let f = Field::from_values(g, values).unwrap();
            let fs = f.scaled(scale);
            let tol = 1e-12 * (1.0 + sup_norm(&f)) * (1.0 + scale.abs());
            prop_assert!((sup_norm(&fs) - scale.abs() * sup_norm(&f)).abs() <= tol);
            prop_assert!((l2_norm(&fs) - scale.abs() * l2_norm(&f)).abs() <= tol);
            let h = holder_seminorm_proxy(&f, 0.5);
            prop_assert!(
                (holder_seminorm_proxy(&fs, 0.5) - scale.abs() * h).abs()
                    <= 1e-11 * (1.0 + h) * (1.0 + scale.abs())
            );
            let c = c2_norm_proxy(&f);
            prop_assert!(
                (c2_norm_proxy(&fs) - scale.abs() * c).abs()
                    <= 1e-11 * (1.0 + c) * (1.0 + scale.abs())
            );
        }

        #[test]
        fn norms_satisfy_triangle_inequality(
            a in prop::collection::vec(-50.0..50.0_f64, 16),
            b in prop::collection::vec(-50.0..50.0_f64, 16),
        ) {
            let g = Grid::new_1d(1.0, 16).unwrap();
            let fa = Field::from_values(g, a).unwrap();
            let fb = Field::from_values(g, b).unwrap();
            let mut sum = fa.clone();
            sum.add_scaled(&fb, 1.0);
            let slack = 1e-12;
            prop_assert!(sup_norm(&sum) <= sup_norm(&fa) + sup_norm(&fb) + slack);
            prop_assert!(l2_norm(&sum) <= l2_norm(&fa) + l2_norm(&fb) + slack);
            prop_assert!(
                holder_seminorm_proxy(&sum, 0.3)
                    <= holder_seminorm_proxy(&fa, 0.3) + holder_seminorm_proxy(&fb, 0.3) + slack
            );
        }

        #[test]
        fn product_slack_non_negative(
            a in prop::collection::vec(-5.0..5.0_f64, 12),
            b in prop::collection::vec(-5.0..5.0_f64, 12),
        ) {
            let g = Grid::new_1d(1.0, 12).unwrap();
            let fa = Field::from_values(g, a).unwrap();
            let fb = Field::from_values(g, b).unwrap();
            prop_assert!(holder_product_check(&fa, &fb, 0.5) >= -1e-12);
        }
    }
}
