//! Multipath channel between array elements and a point in a box room.
//!
//! Each element-to-point link is the free-space direct path plus up to six
//! first-order wall reflections built with the image method: a reflection
//! off a wall is the direct path from the element's mirror image across that
//! wall plane, attenuated by the wall's reflection coefficient. Higher-order
//! bounces enter at the square of the reflection coefficient and are not
//! modeled.
//!
//! Path gain convention: a path of length `d` contributes
//! `(lambda / (4 pi))^(alpha/2) * d^(-alpha/2) * exp(-j (2 pi d / lambda + dtheta))`,
//! so received power scales as `(lambda / (4 pi d))^alpha`, which reduces to
//! the Friis free-space law at `alpha = 2`.

use crate::error::{Error, Result};
use crate::geometry::ArrayLayout;
use crate::vec3::Vec3;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Geometric tolerance for on-wall checks, meters.
const WALL_EPS: f64 = 1e-9;

/// Box room with per-surface reflection amplitude and phase shift.
/// Surfaces are indexed 0..6: x=0, x=W, y=0, y=L, z=0, z=H.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomEnv {
    pub dimensions: Vec3,
    pub surface_reflection: [f64; 6],
    pub surface_phase_shift: [f64; 6],
    /// When None, every reflection phase shift is the fixed per-surface
    /// value; when set, a per-(element, surface) phase in [0, 2pi) is drawn
    /// deterministically from this seed instead.
    pub random_phase_seed: Option<u64>,
    /// Free-space mode when false: no reflections at all.
    pub enabled: bool,
}

impl RoomEnv {
    pub fn new(dimensions: Vec3, reflection: f64) -> Result<Self> {
        if !(dimensions.x > 0.0 && dimensions.y > 0.0 && dimensions.z > 0.0) {
            return Err(Error::InvalidParameter(
                "room dimensions must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&reflection) {
            return Err(Error::InvalidParameter(format!(
                "reflection coefficient must be in [0, 1], got {reflection}"
            )));
        }
        Ok(Self {
            dimensions,
            surface_reflection: [reflection; 6],
            surface_phase_shift: [0.0; 6],
            random_phase_seed: None,
            enabled: true,
        })
    }

    /// Free-space environment: no reflections, dimensions kept for bounds
    /// checks only.
    pub fn free_space(dimensions: Vec3) -> Self {
        Self {
            dimensions,
            surface_reflection: [0.0; 6],
            surface_phase_shift: [0.0; 6],
            random_phase_seed: None,
            enabled: false,
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= -WALL_EPS
            && p.x <= self.dimensions.x + WALL_EPS
            && p.y >= -WALL_EPS
            && p.y <= self.dimensions.y + WALL_EPS
            && p.z >= -WALL_EPS
            && p.z <= self.dimensions.z + WALL_EPS
    }

    /// (axis, plane coordinate) of surface `l`.
    fn surface(&self, l: usize) -> (usize, f64) {
        match l {
            0 => (0, 0.0),
            1 => (0, self.dimensions.x),
            2 => (1, 0.0),
            3 => (1, self.dimensions.y),
            4 => (2, 0.0),
            5 => (2, self.dimensions.z),
            _ => unreachable!("surface index {l}"),
        }
    }
}

fn component(p: Vec3, axis: usize) -> f64 {
    match axis {
        0 => p.x,
        1 => p.y,
        _ => p.z,
    }
}

fn with_component(mut p: Vec3, axis: usize, value: f64) -> Vec3 {
    match axis {
        0 => p.x = value,
        1 => p.y = value,
        _ => p.z = value,
    }
    p
}

/// One reflected propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedPath {
    /// Surface index 0..6.
    pub surface: usize,
    /// Total path length source -> wall -> receiver, meters.
    pub length: f64,
    /// Amplitude coefficient of the bounce.
    pub amplitude: f64,
    /// Extra phase shift picked up at the bounce, radians.
    pub phase_shift: f64,
}

/// The set of reflected paths between one element and one point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathSet {
    pub paths: Vec<ReflectedPath>,
}

/// Propagation parameters shared by every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Wavelength, meters.
    pub lambda: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Transmit element directivity gain (isotropic default).
    pub g_tx: f64,
    /// Receive antenna directivity gain.
    pub g_rx: f64,
    /// Fixed phase offset of the direct path (hardware mismatch), radians.
    pub direct_phase_offset: f64,
}

impl ChannelParams {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wavelength and path-loss exponent must be positive, got {lambda}, {alpha}"
            )));
        }
        Ok(Self {
            lambda,
            alpha,
            g_tx: 1.0,
            g_rx: 1.0,
            direct_phase_offset: 0.0,
        })
    }

    /// Attenuation coefficient (lambda / 4 pi)^(alpha / 2).
    pub fn attenuation_coeff(&self) -> f64 {
        (self.lambda / (4.0 * PI)).powf(self.alpha / 2.0)
    }

    /// Wavenumber 2 pi / lambda.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda
    }
}

/// Effective complex gains between every array element and one point,
/// in global element order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub gains: Vec<Complex64>,
}

impl ChannelVector {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Writes the vector as CSV (`element,real,imag`), SI units.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "element,real,imag")?;
        for (n, g) in self.gains.iter().enumerate() {
            writeln!(w, "{},{},{}", n, g.re, g.im)?;
        }
        Ok(())
    }
}

/// One propagation term: amplitude decay and phase delay over length `d`.
fn path_term(d: f64, eta_att: f64, k: f64, alpha: f64, extra_phase: f64) -> Complex64 {
    let magnitude = eta_att * d.powf(-alpha / 2.0);
    Complex64::from_polar(magnitude, -(k * d + extra_phase))
}

/// Complex gain of the unobstructed path from `source` to `receiver`.
pub fn direct_path_gain(source: Vec3, receiver: Vec3, params: &ChannelParams) -> Result<Complex64> {
    let d = source.distance(receiver);
    if d == 0.0 {
        return Err(Error::InvalidParameter(
            "direct path between coincident points is singular".into(),
        ));
    }
    Ok(path_term(
        d,
        params.attenuation_coeff(),
        params.wavenumber(),
        params.alpha,
        params.direct_phase_offset,
    ))
}

/// Deterministic per-(element, surface) phase in [0, 2pi) for the seeded
/// random phase-shift mode.
fn jitter_phase(seed: u64, element: usize, surface: usize) -> f64 {
    // splitmix64 over the packed identifiers.
    let mut x = seed ^ (element as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ ((surface as u64) << 56);
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z as f64 / u64::MAX as f64) * 2.0 * PI
}

/// First-order reflected paths from `source` to `receiver`.
///
/// One candidate path per enabled surface: mirror the source across the wall
/// plane and measure the straight segment to the receiver. A path is kept
/// only if its bounce point lands on the finite wall rectangle. Surfaces the
/// source sits on (a wall-mounted array) produce no reflection.
pub fn image_reflection_paths(
    room: &RoomEnv,
    source: Vec3,
    receiver: Vec3,
    element: usize,
) -> Result<PathSet> {
    if !room.enabled {
        return Ok(PathSet::default());
    }
    for p in [source, receiver] {
        if !room.contains(p) {
            return Err(Error::PointOutsideRoom(p.x, p.y, p.z));
        }
    }
    let mut paths = Vec::new();
    for l in 0..6 {
        if room.surface_reflection[l] == 0.0 {
            continue;
        }
        let (axis, plane) = room.surface(l);
        let src_c = component(source, axis);
        let rcv_c = component(receiver, axis);
        // Mounted flush on this wall: the image coincides with the source.
        if (src_c - plane).abs() <= WALL_EPS {
            continue;
        }
        let mirrored = with_component(source, axis, 2.0 * plane - src_c);
        let mir_c = component(mirrored, axis);
        // Bounce point: where the mirrored segment crosses the wall plane.
        let t = (plane - mir_c) / (rcv_c - mir_c);
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let bounce = mirrored + (receiver - mirrored) * t;
        if !room.contains(bounce) {
            continue;
        }
        let phase_shift = match room.random_phase_seed {
            Some(seed) => jitter_phase(seed, element, l),
            None => room.surface_phase_shift[l],
        };
        paths.push(ReflectedPath {
            surface: l,
            length: mirrored.distance(receiver),
            amplitude: room.surface_reflection[l],
            phase_shift,
        });
    }
    Ok(PathSet { paths })
}

/// Total multipath gain between element `n` and `receiver`: direct path plus
/// every first-order reflection.
pub fn channel_gain(
    n: usize,
    receiver: Vec3,
    layout: &ArrayLayout,
    room: &RoomEnv,
    params: &ChannelParams,
) -> Result<Complex64> {
    let source = layout.element_position(n)?;
    gain_from_position(source, n, receiver, room, params)
}

fn gain_from_position(
    source: Vec3,
    element: usize,
    receiver: Vec3,
    room: &RoomEnv,
    params: &ChannelParams,
) -> Result<Complex64> {
    let mut h = direct_path_gain(source, receiver, params)?;
    if room.enabled {
        let eta = params.attenuation_coeff();
        let k = params.wavenumber();
        for path in image_reflection_paths(room, source, receiver, element)?.paths {
            h += path.amplitude * path_term(path.length, eta, k, params.alpha, path.phase_shift);
        }
    }
    Ok(h)
}

/// Effective channel vector between the whole array and `receiver`:
/// per-element multipath gain scaled by the antenna directivity gains.
pub fn effective_channel(
    receiver: Vec3,
    layout: &ArrayLayout,
    room: &RoomEnv,
    params: &ChannelParams,
) -> Result<ChannelVector> {
    let g = params.g_tx * params.g_rx;
    let mut gains = Vec::with_capacity(layout.num_elements());
    for (n, pos) in layout.element_positions().into_iter().enumerate() {
        gains.push(gain_from_position(pos, n, receiver, room, params)? * g);
    }
    Ok(ChannelVector { gains })
}
