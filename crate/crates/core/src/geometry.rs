//! Waveguide geometry and the deterministic line-of-sight channel.
//!
//! The feed point sits at `(0, 0, d)`, candidate pinching positions are
//! spread uniformly along the waveguide `x ∈ [0, D2]` at `y = 0, z = d`,
//! and users stand on the ground plane inside
//! `[0, D2] × [-D1/2, D1/2]`.
//!
//! A user `k` reached through position `l` sees
//! `g = h_l · β_kl`, the product of the in-waveguide factor
//! (attenuation plus guided phase over the feed-to-position length) and
//! the free-space factor (spherical spreading plus phase over the
//! position-to-user distance).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub feed_point: Point3,
    pub candidate_positions: Vec<Point3>,
    pub user_positions: Vec<Point3>,
}

impl Layout {
    pub fn num_positions(&self) -> usize {
        self.candidate_positions.len()
    }

    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }
}

/// Places `L` candidates uniformly over the waveguide (both endpoints
/// included) and the users on the ground plane.
pub fn build_layout(config: &ScenarioConfig, user_xy: &[(f64, f64)]) -> Result<Layout> {
    if user_xy.is_empty() {
        return Err(Error::InvalidConfig("at least one user is required".into()));
    }
    if user_xy.len() != config.num_users {
        return Err(Error::InvalidConfig(format!(
            "expected K = {} user positions, got {}",
            config.num_users,
            user_xy.len()
        )));
    }
    let d = config.waveguide_height;
    let len = config.region_length;
    let half_width = config.region_width / 2.0;

    let user_positions = user_xy
        .iter()
        .enumerate()
        .map(|(user, &(x, y))| {
            let inside = (0.0..=len).contains(&x) && (-half_width..=half_width).contains(&y);
            if inside {
                Ok([x, y, 0.0])
            } else {
                Err(Error::OutOfRegion { user, x, y })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Layout {
        feed_point: [0.0, 0.0, d],
        candidate_positions: candidate_grid(len, config.num_positions)
            .into_iter()
            .map(|x| [x, 0.0, d])
            .collect(),
        user_positions,
    })
}

fn candidate_grid(length: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![length / 2.0],
        _ => {
            let step = length / (count - 1) as f64;
            let mut xs: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
            // pin the far end exactly to D2
            xs[count - 1] = length;
            xs
        }
    }
}

/// In-waveguide factor `h_l` for candidate position `l`.
pub fn waveguide_factor(l: usize, config: &ScenarioConfig, layout: &Layout) -> Complex64 {
    let path = distance(&layout.feed_point, &layout.candidate_positions[l]);
    guided_path_factor(path, config)
}

pub(crate) fn guided_path_factor(path: f64, config: &ScenarioConfig) -> Complex64 {
    let magnitude = 10f64.powf(-config.attenuation_db_per_m * path / 10.0).sqrt();
    let phase = -2.0 * PI * path / config.guided_wavelength();
    Complex64::from_polar(magnitude, phase)
}

/// Free-space factor `β_kl` from candidate position `l` to user `k`.
pub fn freespace_factor(k: usize, l: usize, config: &ScenarioConfig, layout: &Layout) -> Complex64 {
    let dist = distance(&layout.user_positions[k], &layout.candidate_positions[l]);
    freespace_path_factor(dist, config)
}

pub(crate) fn freespace_path_factor(dist: f64, config: &ScenarioConfig) -> Complex64 {
    let lambda = config.wavelength();
    Complex64::from_polar(lambda / (4.0 * PI * dist), -2.0 * PI * dist / lambda)
}

/// Free-space coefficients from the feed point itself to every user, i.e.
/// a conventional antenna mounted at the feed with no waveguide in between.
pub fn feed_channel(config: &ScenarioConfig, layout: &Layout) -> Vec<Complex64> {
    layout
        .user_positions
        .iter()
        .map(|u| freespace_path_factor(distance(u, &layout.feed_point), config))
        .collect()
}

/// Per-user, per-position complex channel coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    num_users: usize,
    num_positions: usize,
    /// Row-major K × L.
    coefficients: Vec<Complex64>,
    waveguide_factors: Vec<Complex64>,
    /// Row-major K × L.
    freespace_factors: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn build(config: &ScenarioConfig, layout: &Layout) -> Self {
        let num_users = layout.num_users();
        let num_positions = layout.num_positions();
        let waveguide_factors: Vec<_> = (0..num_positions)
            .map(|l| waveguide_factor(l, config, layout))
            .collect();
        let freespace_factors: Vec<_> = (0..num_users)
            .flat_map(|k| (0..num_positions).map(move |l| (k, l)))
            .map(|(k, l)| freespace_factor(k, l, config, layout))
            .collect();
        Self::from_parts(waveguide_factors, freespace_factors, num_users)
    }

    /// Assembles a channel from explicit factors; `freespace` is row-major
    /// `num_users × waveguide.len()`.
    pub fn from_parts(waveguide: Vec<Complex64>, freespace: Vec<Complex64>, num_users: usize) -> Self {
        let num_positions = waveguide.len();
        assert_eq!(
            freespace.len(),
            num_users * num_positions,
            "free-space factors must be K x L"
        );
        let coefficients = freespace
            .iter()
            .enumerate()
            .map(|(i, beta)| waveguide[i % num_positions] * beta)
            .collect();
        Self {
            num_users,
            num_positions,
            coefficients,
            waveguide_factors: waveguide,
            freespace_factors: freespace,
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_positions(&self) -> usize {
        self.num_positions
    }

    pub fn coefficient(&self, k: usize, l: usize) -> Complex64 {
        self.coefficients[k * self.num_positions + l]
    }

    pub fn waveguide_factor(&self, l: usize) -> Complex64 {
        self.waveguide_factors[l]
    }

    pub fn freespace_factor(&self, k: usize, l: usize) -> Complex64 {
        self.freespace_factors[k * self.num_positions + l]
    }

    fn check_active(&self, active: &[usize]) -> Result<()> {
        if active.is_empty() {
            return Err(Error::EmptyActivation);
        }
        match active.iter().find(|&&l| l >= self.num_positions) {
            Some(&index) => Err(Error::PositionOutOfRange {
                index,
                len: self.num_positions,
            }),
            None => Ok(()),
        }
    }
}

/// `|Σ_{l ∈ active} g_kl|²`, the coherent composite channel power of user `k`.
pub fn effective_gain(active: &[usize], k: usize, channel: &ChannelMatrix) -> Result<f64> {
    channel.check_active(active)?;
    let sum: Complex64 = active.iter().map(|&l| channel.coefficient(k, l)).sum();
    Ok(sum.norm_sqr())
}

/// Composite gains of all users, in original user order.
pub fn effective_gains(active: &[usize], channel: &ChannelMatrix) -> Result<Vec<f64>> {
    (0..channel.num_users())
        .map(|k| effective_gain(active, k, channel))
        .collect()
}

/// Orders user indices by ascending composite gain (SIC decoding order);
/// ties go to the lower user index.
pub fn sic_order_from_gains(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[a].total_cmp(&gains[b]).then(a.cmp(&b)));
    order
}

pub fn sic_order(active: &[usize], channel: &ChannelMatrix) -> Result<Vec<usize>> {
    Ok(sic_order_from_gains(&effective_gains(active, channel)?))
}
