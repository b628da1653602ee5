//! Planar array geometry: element and module positions, aperture diameter,
//! radiative near-field (Fresnel) bounds, and zone classification.
//!
//! Elements are enumerated module block by module block so that the global
//! beamforming vector is literally the concatenation of the per-module
//! vectors: global index `n = m * elements_per_module + i`, where modules
//! run row-major over the module grid and `i` runs row-major inside the
//! module's own sub-grid. For a single-module array this reduces to plain
//! row-major order over the aperture.

use crate::error::{Error, Result};
use crate::vec3::Vec3;
use std::ops::Range;

/// Rectangular planar array tiled exactly by a grid of rectangular
/// sub-array modules.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    module_rows: usize,
    module_cols: usize,
    sub_rows: usize,
    sub_cols: usize,
    /// Inter-element pitch in meters.
    spacing: f64,
    /// Position of the first (bottom-left) element.
    origin: Vec3,
    /// Unit normal of the aperture plane.
    orientation: Vec3,
    col_axis: Vec3,
    row_axis: Vec3,
}

impl ArrayLayout {
    /// Builds a layout from the module grid and the per-module element grid.
    /// Total rows/columns are `module_rows * sub_rows` and
    /// `module_cols * sub_cols`, so the exact-tiling invariant holds by
    /// construction.
    pub fn new(
        module_rows: usize,
        module_cols: usize,
        sub_rows: usize,
        sub_cols: usize,
        spacing: f64,
        origin: Vec3,
        orientation: Vec3,
    ) -> Result<Self> {
        if module_rows == 0 || module_cols == 0 || sub_rows == 0 || sub_cols == 0 {
            return Err(Error::InvalidParameter(
                "array grid counts must be positive".into(),
            ));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        if !orientation.is_finite() || orientation.norm() == 0.0 {
            return Err(Error::InvalidParameter(
                "orientation must be a nonzero finite vector".into(),
            ));
        }
        let normal = orientation.normalized();
        // In-plane axes: columns along normal x up (z), rows along the
        // remaining direction. A vertical normal falls back to the x axis so
        // horizontal apertures are still well defined.
        let up = Vec3::new(0.0, 0.0, 1.0);
        let col_axis = {
            let c = normal.cross(up);
            if c.norm() < 1e-12 {
                Vec3::new(1.0, 0.0, 0.0)
            } else {
                c.normalized()
            }
        };
        let row_axis = col_axis.cross(normal);
        Ok(Self {
            module_rows,
            module_cols,
            sub_rows,
            sub_cols,
            spacing,
            origin,
            orientation: normal,
            col_axis,
            row_axis,
        })
    }

    pub fn rows(&self) -> usize {
        self.module_rows * self.sub_rows
    }

    pub fn cols(&self) -> usize {
        self.module_cols * self.sub_cols
    }

    /// Total element count N.
    pub fn num_elements(&self) -> usize {
        self.rows() * self.cols()
    }

    /// Module count M.
    pub fn num_modules(&self) -> usize {
        self.module_rows * self.module_cols
    }

    /// Elements per module N' = N / M.
    pub fn elements_per_module(&self) -> usize {
        self.sub_rows * self.sub_cols
    }

    pub fn module_rows(&self) -> usize {
        self.module_rows
    }

    pub fn module_cols(&self) -> usize {
        self.module_cols
    }

    pub fn sub_rows(&self) -> usize {
        self.sub_rows
    }

    pub fn sub_cols(&self) -> usize {
        self.sub_cols
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn orientation(&self) -> Vec3 {
        self.orientation
    }

    /// Grid coordinates (row, col) over the whole aperture for global index `n`.
    fn grid_coords(&self, n: usize) -> (usize, usize) {
        let per_module = self.elements_per_module();
        let m = n / per_module;
        let i = n % per_module;
        let (mr, mc) = (m / self.module_cols, m % self.module_cols);
        let (sr, sc) = (i / self.sub_cols, i % self.sub_cols);
        (mr * self.sub_rows + sr, mc * self.sub_cols + sc)
    }

    fn position_at(&self, row: usize, col: usize) -> Vec3 {
        self.origin
            + self.col_axis * (col as f64 * self.spacing)
            + self.row_axis * (row as f64 * self.spacing)
    }

    /// Position of element `n` on the aperture plane.
    pub fn element_position(&self, n: usize) -> Result<Vec3> {
        let len = self.num_elements();
        if n >= len {
            return Err(Error::IndexOutOfRange {
                what: "element",
                index: n,
                len,
            });
        }
        let (row, col) = self.grid_coords(n);
        Ok(self.position_at(row, col))
    }

    /// Global element indices owned by module `m`: the contiguous block
    /// `m*N' .. (m+1)*N'`.
    pub fn module_slice(&self, m: usize) -> Result<Range<usize>> {
        let modules = self.num_modules();
        if m >= modules {
            return Err(Error::IndexOutOfRange {
                what: "module",
                index: m,
                len: modules,
            });
        }
        let per_module = self.elements_per_module();
        Ok(m * per_module..(m + 1) * per_module)
    }

    /// Center of the aperture (centroid of all element positions).
    pub fn aperture_center(&self) -> Vec3 {
        let r = (self.rows() - 1) as f64 / 2.0;
        let c = (self.cols() - 1) as f64 / 2.0;
        self.origin + self.col_axis * (c * self.spacing) + self.row_axis * (r * self.spacing)
    }

    /// Centroid of module `m`'s elements.
    pub fn module_center(&self, m: usize) -> Result<Vec3> {
        let range = self.module_slice(m)?;
        let (r0, c0) = self.grid_coords(range.start);
        let r = r0 as f64 + (self.sub_rows - 1) as f64 / 2.0;
        let c = c0 as f64 + (self.sub_cols - 1) as f64 / 2.0;
        Ok(self.origin + self.col_axis * (c * self.spacing) + self.row_axis * (r * self.spacing))
    }

    /// Aperture diameter D: diagonal of the element bounding box, which for
    /// a planar grid is the largest inter-element distance.
    pub fn aperture_diameter(&self) -> f64 {
        diameter_of_grid(self.rows(), self.cols(), self.spacing)
    }

    /// Diameter of a single sub-array module.
    pub fn module_diameter(&self) -> f64 {
        diameter_of_grid(self.sub_rows, self.sub_cols, self.spacing)
    }

    /// All element positions in global enumeration order.
    pub fn element_positions(&self) -> Vec<Vec3> {
        (0..self.num_elements())
            .map(|n| {
                let (row, col) = self.grid_coords(n);
                self.position_at(row, col)
            })
            .collect()
    }
}

fn diameter_of_grid(rows: usize, cols: usize, spacing: f64) -> f64 {
    let dr = (rows - 1) as f64 * spacing;
    let dc = (cols - 1) as f64 * spacing;
    (dr * dr + dc * dc).sqrt()
}

/// Radiative near-field limits. `lower`/`upper` bound the full aperture's
/// band; `sub_lower` is the lower limit of a single sub-array module, the
/// floor of the extended coverage region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelBounds {
    pub lower: f64,
    pub upper: f64,
    pub sub_lower: f64,
}

/// Near-field band limits for an aperture of diameter `d`:
/// lower = 0.62 * sqrt(d^3 / lambda), upper = 2 * d^2 / lambda.
pub fn fresnel_limits(d: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(d > 0.0) || !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fresnel limits need positive diameter and wavelength, got d={d}, lambda={lambda}"
        )));
    }
    Ok((0.62 * (d.powi(3) / lambda).sqrt(), 2.0 * d * d / lambda))
}

impl FresnelBounds {
    /// Bounds for `layout` at wavelength `lambda`, including the per-module
    /// lower limit.
    pub fn for_layout(layout: &ArrayLayout, lambda: f64) -> Result<Self> {
        let (lower, upper) = fresnel_limits(layout.aperture_diameter(), lambda)?;
        let (sub_lower, _) = fresnel_limits(layout.module_diameter(), lambda)?;
        Ok(Self {
            lower,
            upper,
            sub_lower,
        })
    }
}

/// Propagation zone of a point relative to an aperture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    /// Closer than the lower limit: reactive field dominates.
    NonRadiative,
    /// Inside the closed band [lower, upper]: 3D focusing possible.
    Fresnel,
    /// Beyond the upper limit: plane-wave regime.
    FarField,
}

/// Classifies `target` by the distance from the aperture center. Boundary
/// points belong to the Fresnel band (closed interval).
pub fn zone_classify(target: Vec3, layout: &ArrayLayout, bounds: &FresnelBounds) -> Zone {
    let dist = layout.aperture_center().distance(target);
    if dist < bounds.lower {
        Zone::NonRadiative
    } else if dist <= bounds.upper {
        Zone::Fresnel
    } else {
        Zone::FarField
    }
}

/// True iff the distance from module `m`'s center to `target` lies in
/// `[sub_lower, upper]` — the extended band that lets a single module focus
/// closer than the full aperture can.
pub fn subarray_constraint_ok(
    target: Vec3,
    m: usize,
    layout: &ArrayLayout,
    bounds: &FresnelBounds,
) -> Result<bool> {
    let dist = layout.module_center(m)?.distance(target);
    Ok(dist >= bounds.sub_lower && dist <= bounds.upper)
}

/// Modules that may radiate toward `target`.
///
/// At or beyond the full-aperture lower limit every module is active.
/// Closer in, the aperture is shrunk to the largest centered square block of
/// modules whose own near-field lower limit still covers the target. Targets
/// closer than a single module's lower limit are rejected (callers doing
/// pure power transfer may bypass this check entirely).
pub fn effective_module_set(
    target: Vec3,
    layout: &ArrayLayout,
    lambda: f64,
) -> Result<Vec<usize>> {
    let dist = layout.aperture_center().distance(target);
    let (full_lower, _) = fresnel_limits(layout.aperture_diameter(), lambda)?;
    let all: Vec<usize> = (0..layout.num_modules()).collect();
    if dist >= full_lower {
        return Ok(all);
    }
    let max_block = layout.module_rows.min(layout.module_cols);
    for block in (1..=max_block).rev() {
        let d_eff = diameter_of_grid(
            block * layout.sub_rows,
            block * layout.sub_cols,
            layout.spacing,
        );
        let (lower, _) = fresnel_limits(d_eff, lambda)?;
        if lower <= dist {
            return Ok(centered_block_modules(layout, block));
        }
    }
    let (sub_lower, upper) = fresnel_limits(layout.module_diameter(), lambda)?;
    Err(Error::ZoneViolation {
        distance: dist,
        lower: sub_lower,
        upper,
    })
}

fn centered_block_modules(layout: &ArrayLayout, block: usize) -> Vec<usize> {
    let r0 = (layout.module_rows - block) / 2;
    let c0 = (layout.module_cols - block) / 2;
    let mut out = Vec::with_capacity(block * block);
    for mr in r0..r0 + block {
        for mc in c0..c0 + block {
            out.push(mr * layout.module_cols + mc);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SPEED_OF_LIGHT;
    use proptest::prelude::*;

    fn lambda_28ghz() -> f64 {
        SPEED_OF_LIGHT / 28.0e9
    }

    fn single_module(rows: usize, cols: usize, spacing: f64) -> ArrayLayout {
        ArrayLayout::new(
            1,
            1,
            rows,
            cols,
            spacing,
            Vec3::new(1.0, 0.0, 1.5),
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn first_element_sits_at_origin() {
        let layout = single_module(6, 6, 0.01);
        assert_eq!(layout.element_position(0).unwrap(), Vec3::new(1.0, 0.0, 1.5));
    }

    #[test]
    fn second_element_steps_one_pitch_along_the_row() {
        let s = 0.00535;
        let layout = single_module(6, 6, s);
        let p = layout.element_position(1).unwrap();
        assert!((p.x - (1.0 + s)).abs() < 1e-15);
        assert!(p.y.abs() < 1e-15);
        assert!((p.z - 1.5).abs() < 1e-15);
    }

    #[test]
    fn index_wraps_to_next_row_after_six_columns() {
        // Independent index arithmetic: n = row * n_cols + col for a
        // single-module layout, so n = 6 with 6 columns is (row 1, col 0).
        let s = 0.00535;
        let layout = single_module(6, 6, s);
        let (row, col) = (6 / 6, 6 % 6);
        let expected = Vec3::new(1.0 + col as f64 * s, 0.0, 1.5 + row as f64 * s);
        let p = layout.element_position(6).unwrap();
        assert!((p - expected).norm() < 1e-15);
    }

    #[test]
    fn element_index_out_of_range_is_an_error() {
        let layout = single_module(2, 2, 0.01);
        assert!(matches!(
            layout.element_position(4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn module_slices_are_contiguous_blocks() {
        let layout = ArrayLayout::new(
            3,
            3,
            6,
            6,
            0.005,
            Vec3::ZERO,
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        assert_eq!(layout.module_slice(0).unwrap(), 0..36);
        assert_eq!(layout.module_slice(1).unwrap(), 36..72);
        assert!(layout.module_slice(9).is_err());
    }

    #[test]
    fn module_slices_partition_all_elements() {
        let layout = ArrayLayout::new(
            2,
            5,
            3,
            4,
            0.005,
            Vec3::ZERO,
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let mut seen = vec![false; layout.num_elements()];
        for m in 0..layout.num_modules() {
            for n in layout.module_slice(m).unwrap() {
                assert!(!seen[n], "element {n} covered twice");
                seen[n] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn module_blocks_are_spatially_rectangular() {
        let layout = ArrayLayout::new(
            2,
            2,
            2,
            3,
            1.0,
            Vec3::ZERO,
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        // Module 1 is the (row 0, col 1) block: columns 3..6, rows 0..2.
        for n in layout.module_slice(1).unwrap() {
            let p = layout.element_position(n).unwrap();
            assert!(p.x >= 3.0 - 1e-12 && p.x <= 5.0 + 1e-12);
            assert!(p.z <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn aperture_diameter_degenerate_and_simple_cases() {
        assert_eq!(single_module(1, 1, 0.01).aperture_diameter(), 0.0);
        let two = single_module(1, 2, 0.037);
        assert!((two.aperture_diameter() - 0.037).abs() < 1e-15);
    }

    #[test]
    fn aperture_diameter_matches_direct_geometric_evaluation() {
        let lambda = lambda_28ghz();
        let layout = single_module(60, 60, lambda / 2.0);
        let expected = (2.0f64).sqrt() * 59.0 * lambda / 2.0;
        assert!((layout.aperture_diameter() - expected).abs() < 1e-12);
        assert!((layout.aperture_diameter() - 0.4468).abs() / 0.4468 < 1e-3);
    }

    #[test]
    fn fresnel_bounds_match_hand_computed_values() {
        let (lower, upper) = fresnel_limits(0.4468, lambda_28ghz()).unwrap();
        assert!((lower - 1.79).abs() / 1.79 < 0.01);
        assert!((upper - 37.3).abs() / 37.3 < 0.01);
    }

    #[test]
    fn fresnel_bounds_algebraic_identity_at_d_equals_lambda() {
        let d = 0.32;
        let (lower, upper) = fresnel_limits(d, d).unwrap();
        assert!((lower - 0.62 * d).abs() < 1e-15);
        assert!((upper - 2.0 * d).abs() < 1e-15);
    }

    #[test]
    fn fresnel_lower_below_upper_when_aperture_large_enough() {
        // 0.62 sqrt(d^3/l) < 2 d^2/l  <=>  d/l > (0.62/2)^2 = 0.0961.
        let lambda = 1.0;
        let (lo, hi) = fresnel_limits(0.0962, lambda).unwrap();
        assert!(lo < hi);
        let (lo, hi) = fresnel_limits(0.0960, lambda).unwrap();
        assert!(lo > hi);
    }

    #[test]
    fn fresnel_rejects_non_positive_inputs() {
        assert!(fresnel_limits(0.0, 1.0).is_err());
        assert!(fresnel_limits(1.0, -1.0).is_err());
    }

    #[test]
    fn zone_classification_brackets_the_band() {
        let layout = single_module(60, 60, lambda_28ghz() / 2.0);
        let bounds = FresnelBounds::for_layout(&layout, lambda_28ghz()).unwrap();
        let center = layout.aperture_center();
        let dir = Vec3::new(0.0, 1.0, 0.0);
        let at = |d: f64| center + dir * d;
        let mid = (bounds.lower + bounds.upper) / 2.0;
        assert_eq!(zone_classify(at(mid), &layout, &bounds), Zone::Fresnel);
        assert_eq!(
            zone_classify(at(bounds.lower / 2.0), &layout, &bounds),
            Zone::NonRadiative
        );
        assert_eq!(
            zone_classify(at(2.0 * bounds.upper), &layout, &bounds),
            Zone::FarField
        );
        // Boundary points are inside the closed band.
        assert_eq!(zone_classify(at(bounds.lower), &layout, &bounds), Zone::Fresnel);
        assert_eq!(zone_classify(at(bounds.upper), &layout, &bounds), Zone::Fresnel);
    }

    #[test]
    fn subarray_constraint_covers_extended_band() {
        let lambda = lambda_28ghz();
        let layout = ArrayLayout::new(
            10,
            10,
            6,
            6,
            lambda / 2.0,
            Vec3::new(1.0, 0.0, 1.5),
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let bounds = FresnelBounds::for_layout(&layout, lambda).unwrap();
        // Module diameter for a 6x6 grid at half-wavelength pitch, then its
        // near-field lower limit; both verified against scalar arithmetic.
        assert!((layout.module_diameter() - 0.0379).abs() / 0.0379 < 2e-3);
        assert!((bounds.sub_lower - 0.0442).abs() / 0.0442 < 2e-3);

        let m = 0;
        let center = layout.module_center(m).unwrap();
        let dir = Vec3::new(0.0, 1.0, 0.0);
        assert!(subarray_constraint_ok(center + dir * 1.4, m, &layout, &bounds).unwrap());
        assert!(!subarray_constraint_ok(center + dir * 0.001, m, &layout, &bounds).unwrap());
        assert!(
            !subarray_constraint_ok(center + dir * (bounds.upper * 1.5), m, &layout, &bounds)
                .unwrap()
        );
    }

    #[test]
    fn effective_modules_all_active_inside_full_band() {
        let lambda = lambda_28ghz();
        let layout = ArrayLayout::new(
            10,
            10,
            6,
            6,
            lambda / 2.0,
            Vec3::new(1.0, 0.0, 1.5),
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let bounds = FresnelBounds::for_layout(&layout, lambda).unwrap();
        let target = layout.aperture_center() + Vec3::new(0.0, bounds.lower * 1.5, 0.0);
        let active = effective_module_set(target, &layout, lambda).unwrap();
        assert_eq!(active.len(), layout.num_modules());
    }

    #[test]
    fn effective_modules_shrink_to_centermost_near_the_floor() {
        let lambda = lambda_28ghz();
        let layout = ArrayLayout::new(
            9,
            9,
            6,
            6,
            lambda / 2.0,
            Vec3::new(1.0, 0.0, 1.5),
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let bounds = FresnelBounds::for_layout(&layout, lambda).unwrap();
        let target = layout.aperture_center() + Vec3::new(0.0, bounds.sub_lower * 1.01, 0.0);
        let active = effective_module_set(target, &layout, lambda).unwrap();
        // Center module of the 9x9 grid.
        assert_eq!(active, vec![4 * 9 + 4]);

        let too_close = layout.aperture_center() + Vec3::new(0.0, bounds.sub_lower * 0.5, 0.0);
        assert!(effective_module_set(too_close, &layout, lambda).is_err());
    }

    #[test]
    fn effective_modules_pick_largest_satisfying_block() {
        let lambda = lambda_28ghz();
        let layout = ArrayLayout::new(
            10,
            10,
            6,
            6,
            lambda / 2.0,
            Vec3::new(1.0, 0.0, 1.5),
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        // Enumerate block sizes: find a distance where a 6x6 block passes but
        // 7x7 (hence 8x8) does not.
        let lower_of = |block: usize| {
            let d = diameter_of_grid(block * 6, block * 6, lambda / 2.0);
            fresnel_limits(d, lambda).unwrap().0
        };
        let dist = (lower_of(6) + lower_of(7)) / 2.0;
        let target = layout.aperture_center() + Vec3::new(0.0, dist, 0.0);
        let active = effective_module_set(target, &layout, lambda).unwrap();
        assert_eq!(active.len(), 36);
        // Centered: rows 2..8, cols 2..8.
        assert!(active.contains(&(2 * 10 + 2)));
        assert!(active.contains(&(7 * 10 + 7)));
        assert!(!active.contains(&0));
    }

    proptest! {
        #[test]
        fn fresnel_limits_monotone_in_diameter(
            d1 in 0.01f64..10.0,
            delta in 0.001f64..5.0,
        ) {
            let lambda = 0.0107;
            let (lo1, hi1) = fresnel_limits(d1, lambda).unwrap();
            let (lo2, hi2) = fresnel_limits(d1 + delta, lambda).unwrap();
            prop_assert!(lo2 > lo1);
            prop_assert!(hi2 > hi1);
        }

        #[test]
        fn zone_roundtrip_matches_definition(dist in 0.001f64..100.0) {
            let lambda = 0.0107;
            let layout = ArrayLayout::new(
                2, 2, 10, 10, lambda / 2.0,
                Vec3::new(1.0, 0.0, 1.5), Vec3::new(0.0, 1.0, 0.0),
            ).unwrap();
            let bounds = FresnelBounds::for_layout(&layout, lambda).unwrap();
            let target = layout.aperture_center() + Vec3::new(0.0, dist, 0.0);
            let zone = zone_classify(target, &layout, &bounds);
            let in_band = dist >= bounds.lower && dist <= bounds.upper;
            prop_assert_eq!(zone == Zone::Fresnel, in_band);
        }

        #[test]
        fn effective_module_count_monotone_in_distance(
            d1 in 0.05f64..3.0,
            delta in 0.0f64..2.0,
        ) {
            let lambda = 0.0107;
            let layout = ArrayLayout::new(
                10, 10, 6, 6, lambda / 2.0,
                Vec3::new(1.0, 0.0, 1.5), Vec3::new(0.0, 1.0, 0.0),
            ).unwrap();
            let target = |d: f64| layout.aperture_center() + Vec3::new(0.0, d, 0.0);
            let near = effective_module_set(target(d1), &layout, lambda);
            let far = effective_module_set(target(d1 + delta), &layout, lambda);
            if let (Ok(near), Ok(far)) = (near, far) {
                prop_assert!(far.len() >= near.len());
            }
        }
    }
}
