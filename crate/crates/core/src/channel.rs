//! Clustered mmWave channel generation for uniform planar arrays, plus the
//! synthetic corruption used to build noisy training/test inputs.
//!
//! Channels follow the Saleh-Valenzuela model: a normalized sum of
//! `clusters * rays_per_cluster` rank-one ray contributions with complex
//! standard normal gains. All generation is a pure function of
//! `(config, params, seed)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HbfError, Result};
use crate::numerics::{CMat, CVec};

/// Antenna, RF-chain, user, power, and noise configuration of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of users K.
    pub users: usize,
    /// Data streams per user N_s.
    pub streams: usize,
    /// Base-station antennas N_t.
    pub tx_antennas: usize,
    /// Antennas per user N_r.
    pub rx_antennas: usize,
    /// Base-station RF chains N_RFT.
    pub tx_rf_chains: usize,
    /// RF chains per user N_RFR.
    pub rx_rf_chains: usize,
    /// Total transmit power P (linear).
    pub total_power: f64,
    /// Per-user noise power sigma^2 (linear).
    pub noise_power: f64,
}

impl SystemConfig {
    /// Checks the stream/RF-chain ordering constraints and positivity.
    pub fn validate(&self) -> Result<()> {
        let total = self.users * self.streams;
        if self.users == 0 || self.streams == 0 {
            return Err(HbfError::InvalidInput("users and streams must be >= 1".into()));
        }
        if !(total <= self.tx_rf_chains && self.tx_rf_chains <= self.tx_antennas) {
            return Err(HbfError::InvalidInput(format!(
                "need users*streams <= tx_rf_chains <= tx_antennas, got {} <= {} <= {}",
                total, self.tx_rf_chains, self.tx_antennas
            )));
        }
        if !(self.streams <= self.rx_rf_chains && self.rx_rf_chains <= self.rx_antennas) {
            return Err(HbfError::InvalidInput(format!(
                "need streams <= rx_rf_chains <= rx_antennas, got {} <= {} <= {}",
                self.streams, self.rx_rf_chains, self.rx_antennas
            )));
        }
        if !(self.total_power > 0.0 && self.noise_power > 0.0) {
            return Err(HbfError::InvalidInput(
                "total_power and noise_power must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Normalized noise level `rho_n = sigma^2 K N_s / P`; the only way power
    /// and noise enter the sum-rate.
    pub fn rho_n(&self) -> f64 {
        self.noise_power * (self.users * self.streams) as f64 / self.total_power
    }

    /// Total stream count `K * N_s`, which is also the transmit power target
    /// `sum_k ||F_k||_F^2`.
    pub fn total_streams(&self) -> usize {
        self.users * self.streams
    }

    /// Copy of the config with the noise power set so that `P / sigma^2`
    /// equals the given SNR in dB.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        Self {
            noise_power: self.total_power / 10f64.powf(snr_db / 10.0),
            ..*self
        }
    }
}

/// Clustered-channel shape parameters and array geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModelParams {
    /// Cluster count N_cl.
    pub clusters: usize,
    /// Rays per cluster N_ray.
    pub rays_per_cluster: usize,
    /// Per-cluster angular standard deviation, degrees.
    pub angle_spread_deg: f64,
    /// BS planar array as (rows, cols); rows*cols must equal tx_antennas.
    pub tx_grid: (usize, usize),
    /// UE planar array as (rows, cols); rows*cols must equal rx_antennas.
    pub rx_grid: (usize, usize),
    /// Antenna spacing in wavelengths.
    pub spacing_wavelengths: f64,
}

impl ChannelModelParams {
    /// Near-square grids for the given antenna counts, 7.5 degree spread,
    /// half-wavelength spacing.
    pub fn near_square(clusters: usize, rays_per_cluster: usize, tx_antennas: usize, rx_antennas: usize) -> Self {
        Self {
            clusters,
            rays_per_cluster,
            angle_spread_deg: 7.5,
            tx_grid: near_square_grid(tx_antennas),
            rx_grid: near_square_grid(rx_antennas),
            spacing_wavelengths: 0.5,
        }
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.clusters == 0 || self.rays_per_cluster == 0 {
            return Err(HbfError::InvalidInput(
                "clusters and rays_per_cluster must be >= 1".into(),
            ));
        }
        if self.tx_grid.0 * self.tx_grid.1 != cfg.tx_antennas {
            return Err(HbfError::InvalidInput(format!(
                "tx_grid {:?} does not cover {} antennas",
                self.tx_grid, cfg.tx_antennas
            )));
        }
        if self.rx_grid.0 * self.rx_grid.1 != cfg.rx_antennas {
            return Err(HbfError::InvalidInput(format!(
                "rx_grid {:?} does not cover {} antennas",
                self.rx_grid, cfg.rx_antennas
            )));
        }
        Ok(())
    }
}

/// Factor pair `(a, b)` of `n` with `a <= b` and the smallest gap.
pub fn near_square_grid(n: usize) -> (usize, usize) {
    let mut best = (1, n);
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            best = (i, n / i);
        }
        i += 1;
    }
    best
}

/// The K downlink channel matrices, each rx_antennas x tx_antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub per_user: Vec<CMat>,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.per_user.len()
    }
}

/// dB-to-linear convention used when converting SNR_Train / SNR_Test into a
/// per-entry perturbation variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDbConvention {
    /// Divide by `10^(snr/20)` (default).
    #[default]
    Amplitude20,
    /// Divide by `10^(snr/10)`, the conventional power ratio.
    Power10,
}

impl NoiseDbConvention {
    fn denominator(self, snr_db: f64) -> f64 {
        match self {
            NoiseDbConvention::Amplitude20 => 10f64.powf(snr_db / 20.0),
            NoiseDbConvention::Power10 => 10f64.powf(snr_db / 10.0),
        }
    }
}

/// Unit-norm steering vector of a planar array with half-wavelength spacing.
///
/// Element `(p, q)` of a `rows x cols` grid carries phase
/// `pi (p sin(el) + q cos(el) sin(az))`; the vector is scaled by
/// `1 / sqrt(rows cols)`.
pub fn steering_vector(grid: (usize, usize), azimuth: f64, elevation: f64) -> CVec {
    steering_vector_spaced(grid, azimuth, elevation, 0.5)
}

/// [`steering_vector`] with explicit antenna spacing in wavelengths.
pub fn steering_vector_spaced(
    grid: (usize, usize),
    azimuth: f64,
    elevation: f64,
    spacing_wavelengths: f64,
) -> CVec {
    let (rows, cols) = grid;
    let n = rows * cols;
    let scale = 1.0 / (n as f64).sqrt();
    let k = 2.0 * PI * spacing_wavelengths;
    let mut v = CVec::zeros(n);
    let row_term = elevation.sin();
    let col_term = elevation.cos() * azimuth.sin();
    for p in 0..rows {
        for q in 0..cols {
            let phase = k * (p as f64 * row_term + q as f64 * col_term);
            v[p * cols + q] = Complex64::from_polar(scale, phase);
        }
    }
    v
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws K independent Saleh-Valenzuela channels.
///
/// `H_k = sqrt(Nt Nr / (Ncl Nray)) * sum alpha a_rx a_tx^H` over all
/// clusters and rays, with cluster centers uniform on azimuth
/// `[-pi/2, pi/2]` and elevation `[-pi/4, pi/4]`, Gaussian ray offsets, and
/// complex standard normal gains. Deterministic given the seed.
pub fn generate_channel(
    cfg: &SystemConfig,
    params: &ChannelModelParams,
    seed: u64,
) -> Result<ChannelSet> {
    cfg.validate()?;
    params.validate(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = params.angle_spread_deg.to_radians();
    let paths = (params.clusters * params.rays_per_cluster) as f64;
    let scale = ((cfg.tx_antennas * cfg.rx_antennas) as f64 / paths).sqrt();

    let mut per_user = Vec::with_capacity(cfg.users);
    for _ in 0..cfg.users {
        let mut h = CMat::zeros(cfg.rx_antennas, cfg.tx_antennas);
        for _ in 0..params.clusters {
            let az_tx = rng.random_range(-PI / 2.0..PI / 2.0);
            let el_tx = rng.random_range(-PI / 4.0..PI / 4.0);
            let az_rx = rng.random_range(-PI / 2.0..PI / 2.0);
            let el_rx = rng.random_range(-PI / 4.0..PI / 4.0);
            for _ in 0..params.rays_per_cluster {
                let offs: [f64; 4] = std::array::from_fn(|_| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g * spread
                });
                let gain = complex_gaussian(&mut rng);
                let a_rx = steering_vector_spaced(
                    params.rx_grid,
                    az_rx + offs[0],
                    el_rx + offs[1],
                    params.spacing_wavelengths,
                );
                let a_tx = steering_vector_spaced(
                    params.tx_grid,
                    az_tx + offs[2],
                    el_tx + offs[3],
                    params.spacing_wavelengths,
                );
                h += (a_rx * a_tx.adjoint()) * gain;
            }
        }
        per_user.push(h.scale(scale));
    }
    Ok(ChannelSet { per_user })
}

/// Adds circular complex Gaussian noise with per-entry variance
/// `|H_mn|^2 / 10^(snr_train_db/20)` to every channel entry.
///
/// Deterministic given the seed; zero entries stay exactly zero.
pub fn perturb_channel(h: &ChannelSet, snr_train_db: f64, seed: u64) -> ChannelSet {
    perturb_channel_with(h, snr_train_db, seed, NoiseDbConvention::Amplitude20)
}

/// [`perturb_channel`] with an explicit dB conversion convention.
pub fn perturb_channel_with(
    h: &ChannelSet,
    snr_db: f64,
    seed: u64,
    convention: NoiseDbConvention,
) -> ChannelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let denom = convention.denominator(snr_db);
    let per_user = h
        .per_user
        .iter()
        .map(|hk| {
            hk.map(|z| {
                let var = z.norm_sqr() / denom;
                let sigma = (var / 2.0).sqrt();
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                z + Complex64::new(re * sigma, im * sigma)
            })
        })
        .collect();
    ChannelSet { per_user }
}
