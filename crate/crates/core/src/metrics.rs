//! Sum-rate evaluation for fully-digital and hybrid beamformer sets.

use crate::channel::{ChannelSet, SystemConfig};
use crate::error::{HbfError, Result};
use crate::numerics::{herm, logdet2_hpd, solve_hpd, CMat};

/// Per-user fully-digital precoders (`tx_antennas x streams`) and combiners
/// (`rx_antennas x streams`).
#[derive(Debug, Clone, PartialEq)]
pub struct FdBeamformers {
    pub precoders: Vec<CMat>,
    pub combiners: Vec<CMat>,
}

impl FdBeamformers {
    /// `sum_k ||F_k||_F^2`; solvers normalize this to `K * N_s`.
    pub fn transmit_power(&self) -> f64 {
        self.precoders.iter().map(|f| f.norm_squared()).sum()
    }
}

/// Shared analog precoder, per-user digital precoders, and per-user
/// analog/digital combiners.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBeamformers {
    /// `tx_antennas x tx_rf_chains`, unit-modulus entries.
    pub analog_precoder: CMat,
    /// K matrices, `tx_rf_chains x streams`.
    pub digital_precoders: Vec<CMat>,
    /// K matrices, `rx_antennas x rx_rf_chains`, unit-modulus entries.
    pub analog_combiners: Vec<CMat>,
    /// K matrices, `rx_rf_chains x streams`.
    pub digital_combiners: Vec<CMat>,
}

impl HybridBeamformers {
    /// `sum_k ||F_RF F_BB,k||_F^2`.
    pub fn transmit_power(&self) -> f64 {
        self.digital_precoders
            .iter()
            .map(|fbb| (&self.analog_precoder * fbb).norm_squared())
            .sum()
    }

    /// Worst deviation of any analog entry modulus from 1.
    pub fn max_modulus_error(&self) -> f64 {
        let err = |m: &CMat| {
            m.iter()
                .map(|z| (z.norm() - 1.0).abs())
                .fold(0.0_f64, f64::max)
        };
        self.analog_combiners
            .iter()
            .map(err)
            .fold(err(&self.analog_precoder), f64::max)
    }

    /// Checks the constant-modulus and transmit-power invariants.
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.max_modulus_error() > 1e-9 {
            return Err(HbfError::InvalidInput(
                "analog beamformer entries are not unit modulus".into(),
            ));
        }
        let target = cfg.total_streams() as f64;
        let power = self.transmit_power();
        if (power - target).abs() > 1e-6 * target {
            return Err(HbfError::InvalidInput(format!(
                "transmit power {power} misses target {target}"
            )));
        }
        Ok(())
    }
}

/// Effective fully-digital equivalents `F_k = F_RF F_BB,k`,
/// `W_k = W_RF,k W_BB,k`.
pub fn compose_effective(hb: &HybridBeamformers) -> Result<FdBeamformers> {
    let k = hb.digital_precoders.len();
    if hb.analog_combiners.len() != k || hb.digital_combiners.len() != k {
        return Err(HbfError::DimensionMismatch(
            "per-user combiner counts disagree with precoder count".into(),
        ));
    }
    let mut precoders = Vec::with_capacity(k);
    let mut combiners = Vec::with_capacity(k);
    for i in 0..k {
        let fbb = &hb.digital_precoders[i];
        if hb.analog_precoder.ncols() != fbb.nrows() {
            return Err(HbfError::DimensionMismatch(format!(
                "analog precoder has {} columns but digital precoder {i} has {} rows",
                hb.analog_precoder.ncols(),
                fbb.nrows()
            )));
        }
        let wrf = &hb.analog_combiners[i];
        let wbb = &hb.digital_combiners[i];
        if wrf.ncols() != wbb.nrows() {
            return Err(HbfError::DimensionMismatch(format!(
                "analog combiner {i} has {} columns but digital combiner has {} rows",
                wrf.ncols(),
                wbb.nrows()
            )));
        }
        precoders.push(&hb.analog_precoder * fbb);
        combiners.push(wrf * wbb);
    }
    Ok(FdBeamformers { precoders, combiners })
}

fn check_dims(cfg: &SystemConfig, h: &ChannelSet, fd: &FdBeamformers) -> Result<()> {
    if h.users() != cfg.users || fd.precoders.len() != cfg.users || fd.combiners.len() != cfg.users
    {
        return Err(HbfError::DimensionMismatch(format!(
            "expected {} users across channels and beamformers",
            cfg.users
        )));
    }
    for k in 0..cfg.users {
        let hk = &h.per_user[k];
        let fk = &fd.precoders[k];
        let wk = &fd.combiners[k];
        if hk.nrows() != cfg.rx_antennas
            || hk.ncols() != cfg.tx_antennas
            || fk.nrows() != cfg.tx_antennas
            || fk.ncols() != cfg.streams
            || wk.nrows() != cfg.rx_antennas
            || wk.ncols() != cfg.streams
        {
            return Err(HbfError::DimensionMismatch(format!(
                "user {k}: H {}x{}, F {}x{}, W {}x{}",
                hk.nrows(),
                hk.ncols(),
                fk.nrows(),
                fk.ncols(),
                wk.nrows(),
                wk.ncols()
            )));
        }
    }
    Ok(())
}

/// Covariance of inter-user interference plus noise seen by user `k`:
/// `R_k = W_k^H H_k (sum_{n != k} F_n F_n^H) H_k^H W_k + rho_n W_k^H W_k`.
pub fn interference_cov(
    cfg: &SystemConfig,
    h_k: &CMat,
    fd: &FdBeamformers,
    k: usize,
) -> Result<CMat> {
    if k >= fd.precoders.len() {
        return Err(HbfError::InvalidInput(format!("user index {k} out of range")));
    }
    let w = &fd.combiners[k];
    let wh_h = w.adjoint() * h_k;
    let mut r = (w.adjoint() * w).scale(cfg.rho_n());
    for (n, f) in fd.precoders.iter().enumerate() {
        if n == k {
            continue;
        }
        let s = &wh_h * f;
        r += &s * s.adjoint();
    }
    Ok(herm(&r))
}

/// System sum-rate in bits/s/Hz:
/// `sum_k log2 det(I + F_k^H H_k^H W_k R_k^{-1} W_k^H H_k F_k)`.
pub fn sum_rate(cfg: &SystemConfig, h: &ChannelSet, fd: &FdBeamformers) -> Result<f64> {
    check_dims(cfg, h, fd)?;
    let mut total = 0.0;
    for k in 0..cfg.users {
        let r = interference_cov(cfg, &h.per_user[k], fd, k)?;
        let s = fd.combiners[k].adjoint() * &h.per_user[k] * &fd.precoders[k];
        let x = solve_hpd(&r, &s)
            .map_err(|_| HbfError::SingularMatrix(format!("R_{k} is singular")))?;
        let quad = s.adjoint() * x;
        let m = herm(&quad) + CMat::identity(cfg.streams, cfg.streams);
        total += logdet2_hpd(&m)?;
    }
    Ok(total)
}

/// Effective sum-rate of a hybrid beamformer set.
pub fn sum_rate_hybrid(cfg: &SystemConfig, h: &ChannelSet, hb: &HybridBeamformers) -> Result<f64> {
    sum_rate(cfg, h, &compose_effective(hb)?)
}
