//! Quantized phase-shifter beamforming: codebook, beam vectors, received
//! power, the perfect-CSI matched-phase oracle, sampled power fields over a
//! reference plane, and the beam focus radius.
//!
//! A beam vector stores one codebook index per element; the realized
//! coefficient of element `i` is `exp(j * phi_i) / sqrt(len)`, so a module
//! vector is normalized over its own elements and the concatenated
//! full-array vector over all of them.

use crate::channel::{effective_channel, ChannelParams, ChannelVector, RoomEnv};
use crate::error::{Error, Result};
use crate::geometry::{zone_classify, ArrayLayout, FresnelBounds, Zone};
use crate::vec3::Vec3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Uniform r-bit phase codebook: 2^r levels `phi_k = 2 pi k / 2^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCodebook {
    bits: u32,
}

impl PhaseCodebook {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(Error::InvalidParameter(format!(
                "quantizer bits must be in 1..=16, got {bits}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn num_levels(&self) -> u32 {
        1 << self.bits
    }

    /// Angular distance between adjacent levels.
    pub fn step(&self) -> f64 {
        TWO_PI / self.num_levels() as f64
    }

    /// Phase of level `k` in [0, 2 pi).
    pub fn level(&self, k: u32) -> f64 {
        debug_assert!(k < self.num_levels());
        TWO_PI * k as f64 / self.num_levels() as f64
    }

    /// Phase of level `k` wrapped into (-pi, pi], the actor's action range.
    pub fn level_centered(&self, k: u32) -> f64 {
        let phi = self.level(k);
        if phi > PI {
            phi - TWO_PI
        } else {
            phi
        }
    }

    /// Nearest level to `phase` under circular angular distance. Exact ties
    /// resolve to the lower index.
    pub fn quantize(&self, phase: f64) -> u32 {
        let levels = self.num_levels();
        let x = phase.rem_euclid(TWO_PI) / self.step();
        let k0 = (x.floor() as u32) % levels;
        let k1 = (k0 + 1) % levels;
        let d0 = angular_distance(phase, self.level(k0));
        let d1 = angular_distance(phase, self.level(k1));
        if d1 < d0 {
            k1
        } else if d0 < d1 {
            k0
        } else {
            k0.min(k1)
        }
    }
}

/// Absolute angular distance on the circle, in [0, pi].
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

/// Quantized beamforming vector: one codebook index per element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BeamVector {
    pub indices: Vec<u32>,
}

impl BeamVector {
    pub fn new(indices: Vec<u32>, codebook: &PhaseCodebook) -> Result<Self> {
        let levels = codebook.num_levels();
        if let Some(&bad) = indices.iter().find(|&&i| i >= levels) {
            return Err(Error::InvalidParameter(format!(
                "beam index {bad} exceeds codebook levels {levels}"
            )));
        }
        Ok(Self { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Realized complex coefficients `exp(j phi) / sqrt(len)`.
    pub fn weights(&self, codebook: &PhaseCodebook) -> Vec<Complex64> {
        let scale = 1.0 / (self.len() as f64).sqrt();
        self.indices
            .iter()
            .map(|&k| Complex64::from_polar(scale, codebook.level(k)))
            .collect()
    }

    /// Level phases wrapped into (-pi, pi], matching the continuous action
    /// range seen by the networks.
    pub fn phases_centered(&self, codebook: &PhaseCodebook) -> Vec<f64> {
        self.indices
            .iter()
            .map(|&k| codebook.level_centered(k))
            .collect()
    }
}

/// Maps a list of continuous phases onto the codebook, element by element.
pub fn quantize_phases(phases: &[f64], codebook: &PhaseCodebook) -> BeamVector {
    BeamVector {
        indices: phases.iter().map(|&p| codebook.quantize(p)).collect(),
    }
}

/// Transmit signal and receiver noise powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    /// E[s s*], watts.
    pub signal_power: f64,
    /// Noise power at the receiver, watts.
    pub noise_power: f64,
}

impl SignalModel {
    pub fn new(signal_power: f64, noise_power: f64) -> Result<Self> {
        if !(signal_power > 0.0) || noise_power < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "signal power must be positive and noise power non-negative, \
                 got {signal_power}, {noise_power}"
            )));
        }
        Ok(Self {
            signal_power,
            noise_power,
        })
    }

    pub fn unit() -> Self {
        Self {
            signal_power: 1.0,
            noise_power: 0.0,
        }
    }
}

/// `w^H h` with the 1/sqrt(len) coefficient normalization.
fn combined_amplitude(w: &BeamVector, h: &ChannelVector, codebook: &PhaseCodebook) -> Result<Complex64> {
    if w.len() != h.len() {
        return Err(Error::DimensionMismatch {
            context: "beam vector vs channel vector",
            expected: h.len(),
            got: w.len(),
        });
    }
    let scale = 1.0 / (w.len() as f64).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&k, &g) in w.indices.iter().zip(&h.gains) {
        // conj(e^{j phi} / sqrt(N)) * h
        acc += Complex64::from_polar(scale, -codebook.level(k)) * g;
    }
    Ok(acc)
}

/// Received power `|w^H h|^2 P_s + noise`; signal and noise are
/// uncorrelated so the cross terms vanish.
pub fn received_power(
    w: &BeamVector,
    h: &ChannelVector,
    codebook: &PhaseCodebook,
    sig: &SignalModel,
) -> Result<f64> {
    let amp = combined_amplitude(w, h, codebook)?;
    Ok(amp.norm_sqr() * sig.signal_power + sig.noise_power)
}

/// Noiseless complex output signal of one module,
/// `x = w^H h sqrt(P_s)`. Its magnitude squared plus noise is the module's
/// received power; its argument drives phase fusion.
pub fn module_signal(
    w: &BeamVector,
    h: &ChannelVector,
    codebook: &PhaseCodebook,
    sig: &SignalModel,
) -> Result<Complex64> {
    Ok(combined_amplitude(w, h, codebook)? * sig.signal_power.sqrt())
}

/// Matched-phase (perfect-CSI) solution over continuous phases:
/// `phi_i = -arg(h_i)` maximizes `|w^H h|` over unit-modulus weights.
/// The resulting power is the target that learning curves normalize by.
pub fn conjugate_oracle(h: &ChannelVector) -> Result<Vec<f64>> {
    let mut phases = Vec::with_capacity(h.len());
    for (index, g) in h.gains.iter().enumerate() {
        if g.norm_sqr() == 0.0 {
            return Err(Error::ZeroChannelEntry { index });
        }
        phases.push(-g.arg());
    }
    Ok(phases)
}

/// Power the continuous matched-phase solution attains:
/// `(sum |h_i|)^2 P_s / N + noise`.
pub fn oracle_target_power(h: &ChannelVector, sig: &SignalModel) -> f64 {
    let sum: f64 = h.gains.iter().map(|g| g.norm()).sum();
    sum * sum / h.len() as f64 * sig.signal_power + sig.noise_power
}

/// Best codebook vector under perfect CSI: per-element nearest-level
/// quantization of the matched phases. Per-element quantization is exactly
/// optimal over the lattice because `|w^H h|` separates over independent
/// per-element phase choices.
pub fn quantized_oracle(h: &ChannelVector, codebook: &PhaseCodebook) -> Result<BeamVector> {
    Ok(quantize_phases(&conjugate_oracle(h)?, codebook))
}

/// Rectangular sampling plane: `point(u, v) = center + u * u_axis + v * v_axis`
/// with `u`, `v` in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSpec {
    pub center: Vec3,
    pub u_axis: Vec3,
    pub v_axis: Vec3,
}

impl PlaneSpec {
    pub fn new(center: Vec3, u_axis: Vec3, v_axis: Vec3) -> Result<Self> {
        if u_axis.norm() < 1e-12 || v_axis.norm() < 1e-12 {
            return Err(Error::InvalidParameter("degenerate plane axes".into()));
        }
        let u = u_axis.normalized();
        let v = v_axis.normalized();
        if u.dot(v).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "plane axes must be orthogonal".into(),
            ));
        }
        Ok(Self {
            center,
            u_axis: u,
            v_axis: v,
        })
    }

    /// Plane through `center` parallel to the aperture: u along the
    /// aperture's column axis, v along its row axis.
    pub fn facing_aperture(center: Vec3, layout: &ArrayLayout) -> Self {
        let a = layout.element_position(0).unwrap_or(Vec3::ZERO);
        let b = layout
            .element_position(1.min(layout.num_elements() - 1))
            .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        let u = if layout.num_elements() > 1 {
            (b - a).normalized()
        } else {
            Vec3::new(1.0, 0.0, 0.0)
        };
        let v = layout.orientation().cross(u).normalized();
        Self {
            center,
            u_axis: u,
            v_axis: v,
        }
    }

    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        self.center + self.u_axis * u + self.v_axis * v
    }
}

/// Uniform sample grid on a plane. Sample counts are odd so the plane
/// center (the focal point, typically) is exactly a grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub samples_u: usize,
    pub samples_v: usize,
    pub half_extent_u: f64,
    pub half_extent_v: f64,
}

impl GridSpec {
    pub fn square(samples: usize, half_extent: f64) -> Result<Self> {
        Self::new(samples, samples, half_extent, half_extent)
    }

    pub fn new(
        samples_u: usize,
        samples_v: usize,
        half_extent_u: f64,
        half_extent_v: f64,
    ) -> Result<Self> {
        if samples_u < 1 || samples_v < 1 || samples_u % 2 == 0 || samples_v % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid sample counts must be odd and positive, got {samples_u}x{samples_v}"
            )));
        }
        if samples_u > 1 && !(half_extent_u > 0.0) || samples_v > 1 && !(half_extent_v > 0.0) {
            return Err(Error::InvalidParameter(
                "grid half extents must be positive".into(),
            ));
        }
        Ok(Self {
            samples_u,
            samples_v,
            half_extent_u,
            half_extent_v,
        })
    }
}

/// Sampled received-power field over a reference plane. Values are stored
/// row-major with the u index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerField {
    pub plane: PlaneSpec,
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl PowerField {
    /// In-plane offset of sample `(iu, iv)` from the plane center.
    pub fn offset(&self, iu: usize, iv: usize) -> (f64, f64) {
        (self.coord_u(iu), self.coord_v(iv))
    }

    fn coord_u(&self, iu: usize) -> f64 {
        if self.grid.samples_u == 1 {
            return 0.0;
        }
        let du = 2.0 * self.grid.half_extent_u / (self.grid.samples_u - 1) as f64;
        (iu as f64 - (self.grid.samples_u - 1) as f64 / 2.0) * du
    }

    fn coord_v(&self, iv: usize) -> f64 {
        if self.grid.samples_v == 1 {
            return 0.0;
        }
        let dv = 2.0 * self.grid.half_extent_v / (self.grid.samples_v - 1) as f64;
        (iv as f64 - (self.grid.samples_v - 1) as f64 / 2.0) * dv
    }

    pub fn value(&self, iu: usize, iv: usize) -> f64 {
        self.values[iu * self.grid.samples_v + iv]
    }

    pub fn point(&self, iu: usize, iv: usize) -> Vec3 {
        let (u, v) = self.offset(iu, iv);
        self.plane.point(u, v)
    }

    /// Cell area of the uniform grid.
    pub fn cell_area(&self) -> f64 {
        let du = if self.grid.samples_u > 1 {
            2.0 * self.grid.half_extent_u / (self.grid.samples_u - 1) as f64
        } else {
            1.0
        };
        let dv = if self.grid.samples_v > 1 {
            2.0 * self.grid.half_extent_v / (self.grid.samples_v - 1) as f64
        } else {
            1.0
        };
        du * dv
    }

    /// Grid cell with the highest power.
    pub fn peak(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for iu in 0..self.grid.samples_u {
            for iv in 0..self.grid.samples_v {
                let p = self.value(iu, iv);
                if p > best.2 {
                    best = (iu, iv, p);
                }
            }
        }
        best
    }

    /// Writes the field as CSV, row-major, SI units, with a dBm column
    /// (`10 log10(1000 p)`).
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u_m,v_m,x_m,y_m,z_m,power_w,power_dbm")?;
        for iu in 0..self.grid.samples_u {
            for iv in 0..self.grid.samples_v {
                let (u, v) = self.offset(iu, iv);
                let p = self.plane.point(u, v);
                let pw = self.value(iu, iv);
                let dbm = 10.0 * (pw * 1000.0).log10();
                writeln!(w, "{},{},{},{},{},{},{}", u, v, p.x, p.y, p.z, pw, dbm)?;
            }
        }
        Ok(())
    }

    /// Reads a field back from the CSV layout produced by [`write_csv`].
    pub fn read_csv<R: std::io::BufRead>(r: R) -> Result<Self> {
        let mut rows: Vec<(f64, f64, Vec3, f64)> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(Error::InvalidParameter(format!(
                    "power map line {} has {} fields, expected 7",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidParameter(format!("power map line {}: {e}", lineno + 1))
                })
            };
            rows.push((
                parse(fields[0])?,
                parse(fields[1])?,
                Vec3::new(parse(fields[2])?, parse(fields[3])?, parse(fields[4])?),
                parse(fields[5])?,
            ));
        }
        if rows.is_empty() {
            return Err(Error::InvalidParameter("empty power map".into()));
        }
        let samples_v = rows
            .iter()
            .position(|r| r.0 != rows[0].0)
            .unwrap_or(rows.len());
        if rows.len() % samples_v != 0 {
            return Err(Error::InvalidParameter(
                "power map rows do not form a rectangular grid".into(),
            ));
        }
        let samples_u = rows.len() / samples_v;
        let half_u = rows.last().unwrap().0.abs().max(rows[0].0.abs());
        let half_v = rows.last().unwrap().1.abs().max(rows[0].1.abs());
        // Reconstruct plane axes from grid coordinates.
        let center_idx = rows
            .iter()
            .position(|r| r.0 == 0.0 && r.1 == 0.0)
            .ok_or_else(|| {
                Error::InvalidParameter("power map has no center (u=0, v=0) sample".into())
            })?;
        let center = rows[center_idx].2;
        let u_axis = if samples_u > 1 {
            let other = &rows[samples_v]; // (u1, v0)
            ((other.2 - rows[0].2) * (1.0 / (other.0 - rows[0].0))).normalized()
        } else {
            Vec3::new(1.0, 0.0, 0.0)
        };
        let v_axis = if samples_v > 1 {
            let other = &rows[1]; // (u0, v1)
            ((other.2 - rows[0].2) * (1.0 / (other.1 - rows[0].1))).normalized()
        } else {
            Vec3::new(0.0, 0.0, 1.0)
        };
        Ok(Self {
            plane: PlaneSpec {
                center,
                u_axis,
                v_axis,
            },
            grid: GridSpec {
                samples_u,
                samples_v,
                half_extent_u: half_u,
                half_extent_v: half_v,
            },
            values: rows.into_iter().map(|r| r.3).collect(),
        })
    }
}

/// Samples the received power of several beam vectors over one plane grid,
/// evaluating the channel once per grid point. Deterministic regardless of
/// the parallel schedule.
pub fn power_maps(
    vectors: &[&BeamVector],
    plane: &PlaneSpec,
    grid: &GridSpec,
    layout: &ArrayLayout,
    room: &RoomEnv,
    params: &ChannelParams,
    codebook: &PhaseCodebook,
    sig: &SignalModel,
) -> Result<Vec<PowerField>> {
    for w in vectors {
        if w.len() != layout.num_elements() {
            return Err(Error::DimensionMismatch {
                context: "beam vector vs array",
                expected: layout.num_elements(),
                got: w.len(),
            });
        }
    }
    let field = PowerField {
        plane: plane.clone(),
        grid: *grid,
        values: Vec::new(),
    };
    let points: Vec<Vec3> = (0..grid.samples_u)
        .flat_map(|iu| (0..grid.samples_v).map(move |iv| (iu, iv)))
        .map(|(iu, iv)| {
            let (u, v) = (field.coord_u(iu), field.coord_v(iv));
            plane.point(u, v)
        })
        .collect();
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&p| -> Result<Vec<f64>> {
            let h = effective_channel(p, layout, room, params)?;
            vectors
                .iter()
                .map(|w| received_power(w, &h, codebook, sig))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..vectors.len())
        .map(|vi| PowerField {
            plane: plane.clone(),
            grid: *grid,
            values: per_point.iter().map(|vals| vals[vi]).collect(),
        })
        .collect())
}

/// Single-vector convenience wrapper over [`power_maps`].
#[allow(clippy::too_many_arguments)]
pub fn power_map(
    w: &BeamVector,
    plane: &PlaneSpec,
    grid: &GridSpec,
    layout: &ArrayLayout,
    room: &RoomEnv,
    params: &ChannelParams,
    codebook: &PhaseCodebook,
    sig: &SignalModel,
) -> Result<PowerField> {
    Ok(power_maps(&[w], plane, grid, layout, room, params, codebook, sig)?
        .pop()
        .expect("one field per vector"))
}

/// Focus quality of a power field around a focal point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusMetrics {
    /// Beam focus radius, meters.
    pub bfr_m: f64,
    /// Captured power fraction defining the radius.
    pub eta: f64,
    /// Highest sampled power, watts.
    pub peak_w: f64,
    /// Location of the peak sample.
    pub peak_xyz: [f64; 3],
}

/// Smallest radius around `focal_uv` (in-plane coordinates of the focal
/// point) containing at least `eta` of the field's total power. Exact on the
/// discrete grid: cells sorted by distance, cumulative sum scanned.
pub fn bfr(field: &PowerField, focal_uv: (f64, f64), eta: f64) -> Result<FocusMetrics> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "power fraction must be in (0, 1], got {eta}"
        )));
    }
    let area = field.cell_area();
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(field.values.len());
    let mut total = 0.0;
    for iu in 0..field.grid.samples_u {
        for iv in 0..field.grid.samples_v {
            let (u, v) = field.offset(iu, iv);
            let du = u - focal_uv.0;
            let dv = v - focal_uv.1;
            let power = field.value(iu, iv) * area;
            total += power;
            cells.push(((du * du + dv * dv).sqrt(), power));
        }
    }
    if total <= 0.0 {
        return Err(Error::ZeroTotalPower);
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let threshold = eta * total;
    let mut cumulative = 0.0;
    let mut radius = 0.0;
    for (dist, power) in &cells {
        cumulative += power;
        if *power > 0.0 {
            radius = *dist;
        }
        if cumulative >= threshold {
            break;
        }
    }
    let (pu, pv, peak) = field.peak();
    Ok(FocusMetrics {
        bfr_m: radius,
        eta,
        peak_w: peak,
        peak_xyz: field.point(pu, pv).into(),
    })
}

/// Received power of the full-array vector at `target`, enforcing the
/// near-field zone constraint unless `allow_any_zone` is set (pure power
/// transfer has no focusing constraint).
#[allow(clippy::too_many_arguments)]
pub fn full_power_objective(
    w: &BeamVector,
    target: Vec3,
    layout: &ArrayLayout,
    bounds: &FresnelBounds,
    room: &RoomEnv,
    params: &ChannelParams,
    codebook: &PhaseCodebook,
    sig: &SignalModel,
    allow_any_zone: bool,
) -> Result<f64> {
    if !allow_any_zone && zone_classify(target, layout, bounds) != Zone::Fresnel {
        let dist = layout.aperture_center().distance(target);
        return Err(Error::ZoneViolation {
            distance: dist,
            lower: bounds.lower,
            upper: bounds.upper,
        });
    }
    let h = effective_channel(target, layout, room, params)?;
    received_power(w, &h, codebook, sig)
}
