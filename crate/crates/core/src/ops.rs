//! Neumann stencil operators: Laplacian, centered gradient, and the upwinded
//! taxis-flux divergence.
//!
//! All operators reflect ghost cells (ghost = adjacent interior value), so
//! boundary fluxes vanish identically and volume-weighted sums of the
//! Laplacian and the flux divergence telescope to zero.

use crate::grid::{Field, VectorField};

/// 3-point (1D) / 5-point (2D) Laplacian with reflected ghosts.
pub fn laplacian_neumann(f: &Field) -> Field {
    let g = f.grid();
    let v = f.values();
    let mut out = vec![0.0; g.cell_count()];
    let (nx, ny) = (g.nx(), g.ny());
    let inv_dx2 = 1.0 / (g.dx() * g.dx());
    // neighbor sum first keeps the evaluation order mirror-symmetric
    for ix in 0..nx {
        for iy in 0..ny {
            let c = v[g.idx(ix, iy)];
            let left = if ix == 0 { c } else { v[g.idx(ix - 1, iy)] };
            let right = if ix + 1 == nx { c } else { v[g.idx(ix + 1, iy)] };
            out[g.idx(ix, iy)] = (left + right - 2.0 * c) * inv_dx2;
        }
    }
    if g.dim() == 2 {
        let inv_dy2 = 1.0 / (g.dy() * g.dy());
        for ix in 0..nx {
            for iy in 0..ny {
                let c = v[g.idx(ix, iy)];
                let down = if iy == 0 { c } else { v[g.idx(ix, iy - 1)] };
                let up = if iy + 1 == ny { c } else { v[g.idx(ix, iy + 1)] };
                out[g.idx(ix, iy)] += (down + up - 2.0 * c) * inv_dy2;
            }
        }
    }
    Field::from_values(g, out).expect("output sized from grid")
}

/// Centered-difference gradient with reflected ghosts.
///
/// At boundary cells the normal component degenerates to
/// (interior neighbor − self)/(2·spacing).
pub fn gradient_neumann(f: &Field) -> VectorField {
    let g = f.grid();
    let v = f.values();
    let mut grad = VectorField::zeros(g);
    let (nx, ny) = (g.nx(), g.ny());
    let inv_2dx = 1.0 / (2.0 * g.dx());
    for ix in 0..nx {
        for iy in 0..ny {
            let c = v[g.idx(ix, iy)];
            let left = if ix == 0 { c } else { v[g.idx(ix - 1, iy)] };
            let right = if ix + 1 == nx { c } else { v[g.idx(ix + 1, iy)] };
            grad.x_mut()[g.idx(ix, iy)] = (right - left) * inv_2dx;
        }
    }
    if g.dim() == 2 {
        let inv_2dy = 1.0 / (2.0 * g.dy());
        for ix in 0..nx {
            for iy in 0..ny {
                let c = v[g.idx(ix, iy)];
                let down = if iy == 0 { c } else { v[g.idx(ix, iy - 1)] };
                let up = if iy + 1 == ny { c } else { v[g.idx(ix, iy + 1)] };
                grad.y_mut()[g.idx(ix, iy)] = (up - down) * inv_2dy;
            }
        }
    }
    grad
}

/// Donor-cell divergence `coeff·∇·(carrier·∇potential)` in flux form.
///
/// The face flux is `coeff · ∂potential/∂n · carrier_upwind`, where the
/// upwind side is picked by the sign of the advective velocity
/// `−coeff·∂potential/∂n` seen by the carrier. Boundary faces carry zero
/// flux, so the volume-weighted output sums to zero up to round-off.
pub fn div_flux_upwind(carrier: &Field, potential: &Field, coeff: f64) -> Field {
    debug_assert_eq!(carrier.grid(), potential.grid());
    let g = carrier.grid();
    let c = carrier.values();
    let p = potential.values();
    let mut out = vec![0.0; g.cell_count()];
    let (nx, ny) = (g.nx(), g.ny());

    // face fluxes first, one divergence expression per cell: the output then
    // mirrors bitwise when the inputs are reflected
    let inv_dx = 1.0 / g.dx();
    let mut flux_x = vec![0.0; (nx - 1) * ny];
    for ix in 0..nx - 1 {
        for iy in 0..ny {
            let il = g.idx(ix, iy);
            let ir = g.idx(ix + 1, iy);
            let dpot = (p[ir] - p[il]) * inv_dx;
            let velocity = -coeff * dpot;
            let upwind = if velocity > 0.0 { c[il] } else { c[ir] };
            flux_x[ix * ny + iy] = coeff * dpot * upwind;
        }
    }
    for ix in 0..nx {
        for iy in 0..ny {
            let left = if ix == 0 { 0.0 } else { flux_x[(ix - 1) * ny + iy] };
            let right = if ix == nx - 1 { 0.0 } else { flux_x[ix * ny + iy] };
            out[g.idx(ix, iy)] = (right - left) * inv_dx;
        }
    }
    if g.dim() == 2 {
        let inv_dy = 1.0 / g.dy();
        let mut flux_y = vec![0.0; nx * (ny - 1)];
        for ix in 0..nx {
            for iy in 0..ny - 1 {
                let id = g.idx(ix, iy);
                let iu = g.idx(ix, iy + 1);
                let dpot = (p[iu] - p[id]) * inv_dy;
                let velocity = -coeff * dpot;
                let upwind = if velocity > 0.0 { c[id] } else { c[iu] };
                flux_y[ix * (ny - 1) + iy] = coeff * dpot * upwind;
            }
        }
        for ix in 0..nx {
            for iy in 0..ny {
                let down = if iy == 0 { 0.0 } else { flux_y[ix * (ny - 1) + iy - 1] };
                let up = if iy == ny - 1 { 0.0 } else { flux_y[ix * (ny - 1) + iy] };
                out[g.idx(ix, iy)] += (up - down) * inv_dy;
            }
        }
    }
    Field::from_values(g, out).expect("output sized from grid")
}

/// Per-axis pure second differences at cells with both axis neighbors.
/// Boundary cells are skipped: the reflected ghost is only first-order
/// consistent there and would pollute norm proxies of generic fields.
pub(crate) fn max_abs_pure_second_difference(f: &Field) -> f64 {
    let g = f.grid();
    let v = f.values();
    let (nx, ny) = (g.nx(), g.ny());
    let inv_dx2 = 1.0 / (g.dx() * g.dx());
    let mut m = 0.0_f64;
    for ix in 1..nx - 1 {
        for iy in 0..ny {
            let d2 = (v[g.idx(ix - 1, iy)] - 2.0 * v[g.idx(ix, iy)] + v[g.idx(ix + 1, iy)])
                * inv_dx2;
            m = m.max(d2.abs());
        }
    }
    if g.dim() == 2 {
        let inv_dy2 = 1.0 / (g.dy() * g.dy());
        for ix in 0..nx {
            for iy in 1..ny - 1 {
                let d2 = (v[g.idx(ix, iy - 1)] - 2.0 * v[g.idx(ix, iy)] + v[g.idx(ix, iy + 1)])
                    * inv_dy2;
                m = m.max(d2.abs());
            }
        }
    }
    m
}

/// Largest |mixed second difference| over cells interior in both axes (2D
/// only; zero on 1D grids).
pub(crate) fn max_abs_mixed_second_difference(f: &Field) -> f64 {
    let g = f.grid();
    if g.dim() == 1 {
        return 0.0;
    }
    let v = f.values();
    let (nx, ny) = (g.nx(), g.ny());
    let inv_4dxdy = 1.0 / (4.0 * g.dx() * g.dy());
    let mut m = 0.0_f64;
    for ix in 1..nx - 1 {
        for iy in 1..ny - 1 {
            let d2 = (v[g.idx(ix + 1, iy + 1)] - v[g.idx(ix + 1, iy - 1)]
                - v[g.idx(ix - 1, iy + 1)]
                + v[g.idx(ix - 1, iy - 1)])
                * inv_4dxdy;
            m = m.max(d2.abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::norms::sup_norm;
    use std::f64::consts::PI;

    fn weighted_sum(f: &Field) -> f64 {
        f.values().iter().sum::<f64>() * f.grid().cell_volume()
    }

    /// Small deterministic pseudo-random stream for stencil tests.
    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64)
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        for g in [
            Grid::new_1d(1.0, 16).unwrap(),
            Grid::new_2d(1.0, 2.0, 8, 12).unwrap(),
        ] {
            let f = Field::constant(g, 3.25);
            assert!(sup_norm(&laplacian_neumann(&f)) == 0.0);
        }
    }

    #[test]
    fn laplacian_cosine_second_order() {
        // cos(πx) satisfies the Neumann condition; Δf = −π² cos(πx).
        let err_at = |n: usize| {
            let g = Grid::new_1d(1.0, n).unwrap();
            let f = Field::from_fn_1d(g, |x| (PI * x).cos());
            let lap = laplacian_neumann(&f);
            let mut err = 0.0_f64;
            for ix in 0..n {
                let x = g.x_center(ix);
                err = err.max((lap.values()[ix] + PI * PI * (PI * x).cos()).abs());
            }
            err
        };
        let e128 = err_at(128);
        let e256 = err_at(256);
        assert!(e128 < 4e-3, "error at 128 cells: {e128}");
        let ratio = e128 / e256;
        assert!((3.5..4.5).contains(&ratio), "refinement ratio {ratio}");
    }

    #[test]
    fn laplacian_conserves_mass() {
        for g in [
            Grid::new_1d(2.0, 64).unwrap(),
            Grid::new_2d(1.0, 1.0, 16, 16).unwrap(),
        ] {
            let mut seed = 42;
            let f = Field::from_fn(g, |_, _| lcg(&mut seed) * 2.0 - 1.0);
            let lap = laplacian_neumann(&f);
            let bound = 1e-12 * sup_norm(&f) * g.cell_count() as f64;
            assert!(weighted_sum(&lap).abs() <= bound);
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = Grid::new_2d(1.0, 1.0, 8, 8).unwrap();
        let f = Field::constant(g, -7.0);
        let grad = gradient_neumann(&f);
        assert_eq!(grad.max_component_abs(), 0.0);
    }

    #[test]
    fn gradient_of_linear_field_1d() {
        let g = Grid::new_1d(1.0, 10).unwrap();
        let f = Field::from_fn_1d(g, |x| x);
        let grad = gradient_neumann(&f);
        for ix in 1..9 {
            assert!((grad.x()[ix] - 1.0).abs() < 1e-13);
        }
        // reflection artifact at the boundary: (neighbor − self)/(2dx) = 0.5
        assert!((grad.x()[0] - 0.5).abs() < 1e-13);
        assert!((grad.x()[9] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn gradient_is_linear() {
        let g = Grid::new_2d(1.0, 1.0, 12, 12).unwrap();
        let mut seed = 7;
        let f = Field::from_fn(g, |_, _| lcg(&mut seed));
        let h = Field::from_fn(g, |_, _| lcg(&mut seed));
        let (a, b) = (2.5, -0.75);
        let mut combo = f.scaled(a);
        combo.add_scaled(&h, b);
        let gc = gradient_neumann(&combo);
        let gf = gradient_neumann(&f);
        let gh = gradient_neumann(&h);
        for i in 0..g.cell_count() {
            let ex = a * gf.x()[i] + b * gh.x()[i];
            let ey = a * gf.y()[i] + b * gh.y()[i];
            assert!((gc.x()[i] - ex).abs() <= 1e-12 * (1.0 + ex.abs()));
            assert!((gc.y()[i] - ey).abs() <= 1e-12 * (1.0 + ey.abs()));
        }
    }

    #[test]
    fn upwind_divergence_trivial_cases() {
        let g = Grid::new_1d(1.0, 32).unwrap();
        let zero_carrier = Field::zeros(g);
        let pot = Field::from_fn_1d(g, |x| x * x);
        assert_eq!(sup_norm(&div_flux_upwind(&zero_carrier, &pot, 1.5)), 0.0);

        let carrier = Field::constant(g, 2.0);
        let flat = Field::constant(g, 4.0);
        assert_eq!(sup_norm(&div_flux_upwind(&carrier, &flat, -0.3)), 0.0);
    }

    #[test]
    fn upwind_divergence_parabolic_potential() {
        // ∇·(1·∇(x²/2)) = 1; donor cell is first order.
        let g = Grid::new_1d(1.0, 128).unwrap();
        let carrier = Field::constant(g, 1.0);
        let pot = Field::from_fn_1d(g, |x| 0.5 * x * x);
        let div = div_flux_upwind(&carrier, &pot, 1.0);
        for ix in 1..127 {
            assert!(
                (div.values()[ix] - 1.0).abs() < 0.05,
                "interior value {} at {}",
                div.values()[ix],
                ix
            );
        }
    }

    #[test]
    fn upwind_divergence_conserves_mass() {
        for g in [
            Grid::new_1d(1.0, 64).unwrap(),
            Grid::new_2d(1.0, 1.0, 12, 12).unwrap(),
        ] {
            let mut seed = 99;
            let carrier = Field::from_fn(g, |_, _| lcg(&mut seed));
            let pot = Field::from_fn(g, |_, _| lcg(&mut seed) * 3.0);
            let div = div_flux_upwind(&carrier, &pot, -0.8);
            let bound = 1e-12 * g.cell_count() as f64 * sup_norm(&carrier).max(sup_norm(&pot));
            assert!(weighted_sum(&div).abs() <= bound);
        }
    }

    #[test]
    fn operators_commute_with_reflection_1d() {
        let g = Grid::new_1d(1.0, 40).unwrap();
        let mut seed = 5;
        let f = Field::from_fn(g, |_, _| lcg(&mut seed));
        let mut seed = 6;
        let h = Field::from_fn(g, |_, _| lcg(&mut seed));
        let reflect = |f: &Field| {
            let mut v = f.values().to_vec();
            v.reverse();
            Field::from_values(g, v).unwrap()
        };

        let lap_then_reflect = reflect(&laplacian_neumann(&f));
        let reflect_then_lap = laplacian_neumann(&reflect(&f));
        assert_eq!(lap_then_reflect.values(), reflect_then_lap.values());

        let div_then_reflect = reflect(&div_flux_upwind(&f, &h, 0.7));
        let reflect_then_div = div_flux_upwind(&reflect(&f), &reflect(&h), 0.7);
        assert_eq!(div_then_reflect.values(), reflect_then_div.values());

        // gradient components flip sign under reflection
        let gr = gradient_neumann(&reflect(&f));
        let rg = gradient_neumann(&f);
        for ix in 0..40 {
            assert_eq!(gr.x()[ix], -rg.x()[39 - ix]);
        }
    }

    #[test]
    fn operators_commute_with_reflection_2d() {
        let g = Grid::new_2d(1.0, 1.0, 10, 14).unwrap();
        let mut seed = 11;
        let f = Field::from_fn(g, |_, _| lcg(&mut seed));
        let mut seed = 12;
        let h = Field::from_fn(g, |_, _| lcg(&mut seed));
        // reflect about the x axis midplane
        let reflect = |f: &Field| {
            let mut v = vec![0.0; g.cell_count()];
            for ix in 0..10 {
                for iy in 0..14 {
                    v[g.idx(9 - ix, iy)] = f.values()[g.idx(ix, iy)];
                }
            }
            Field::from_values(g, v).unwrap()
        };
        let a = reflect(&laplacian_neumann(&f));
        let b = laplacian_neumann(&reflect(&f));
        assert_eq!(a.values(), b.values());

        let a = reflect(&div_flux_upwind(&f, &h, -0.6));
        let b = div_flux_upwind(&reflect(&f), &reflect(&h), -0.6);
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn second_difference_helpers() {
        let g = Grid::new_1d(1.0, 50).unwrap();
        let f = Field::from_fn_1d(g, |x| x * x);
        // f'' = 2 everywhere in the interior
        assert!((max_abs_pure_second_difference(&f) - 2.0).abs() < 1e-10);

        let g2 = Grid::new_2d(1.0, 1.0, 16, 16).unwrap();
        let f2 = Field::from_fn(g2, |x, y| x * y);
        assert!((max_abs_mixed_second_difference(&f2) - 1.0).abs() < 1e-10);
        assert!(max_abs_pure_second_difference(&f2).abs() < 1e-10);
    }
}
