//! Fractional-programming fully-digital beamforming.
//!
//! Maximizes the sum-rate through its block-concave surrogate `R_bar`:
//! auxiliary matrices U_k (quadratic transform) and V_k (matrix SINR) are
//! updated in closed form together with the combiners W_k and the
//! power-constrained precoders F_k, cycling U -> V -> W -> F until the
//! surrogate stalls. Every block update is the exact argmax of `R_bar` over
//! that block, so the surrogate trace is non-decreasing and, right after the
//! U and V updates, equals the true sum-rate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, SystemConfig};
use crate::error::{HbfError, Result};
use crate::metrics::{interference_cov, sum_rate, FdBeamformers};
use crate::numerics::{bisect, herm, herm_eigen, logdet2_hpd, solve_hpd, CMat};

const LN_2: f64 = std::f64::consts::LN_2;

/// Quadratic-transform auxiliaries: U_k is unconstrained, V_k is the
/// Hermitian PSD matrix SINR, and `Gamma_k = I + V_k` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxVariables {
    pub u: Vec<CMat>,
    pub v: Vec<CMat>,
}

impl AuxVariables {
    /// `Gamma_k = I + V_k`.
    pub fn gamma(&self, k: usize) -> CMat {
        let ns = self.v[k].nrows();
        &self.v[k] + CMat::identity(ns, ns)
    }
}

/// One record per outer iteration of [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpIteration {
    pub index: usize,
    /// Surrogate value `R_bar`, bits/s/Hz.
    pub surrogate: f64,
    /// True sum-rate at this iterate, bits/s/Hz.
    pub sum_rate: f64,
    /// `|sum_k ||F_k||_F^2 - K N_s| / (K N_s)` after the precoder update.
    pub power_residual: f64,
}

/// Convergence trace of one solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub iterations: Vec<FpIteration>,
    /// Set when the power equality was unattainable at `delta = 0` and the
    /// precoders were rescaled instead.
    pub power_fallback: bool,
}

/// Stopping criteria for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpStop {
    pub max_iter: usize,
    /// Relative change of the surrogate below which iteration stops.
    pub rel_tol: f64,
}

impl Default for FpStop {
    fn default() -> Self {
        Self {
            max_iter: 100,
            rel_tol: 1e-4,
        }
    }
}

fn real_trace(m: &CMat) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// Total downlink covariance seen by user `k`, including its own signal:
/// `R_bar_k = W_k^H H_k (sum_n F_n F_n^H) H_k^H W_k + rho_n W_k^H W_k`.
fn full_cov(cfg: &SystemConfig, h_k: &CMat, fd: &FdBeamformers, k: usize) -> CMat {
    let w = &fd.combiners[k];
    let wh_h = w.adjoint() * h_k;
    let mut r = (w.adjoint() * w).scale(cfg.rho_n());
    for f in &fd.precoders {
        let s = &wh_h * f;
        r += &s * s.adjoint();
    }
    herm(&r)
}

/// Surrogate objective `R_bar` in bits/s/Hz:
/// `sum_k log2|Gamma_k| - Tr(V_k)/ln2 + (2 Re Tr(Gamma_k U_k^H S_k)
///  - Tr(Gamma_k U_k^H R_bar_k U_k))/ln2` with `S_k = W_k^H H_k F_k`.
///
/// The `Tr(V_k)` term enters with a minus sign so that plugging in the
/// closed-form U and V recovers the true sum-rate exactly.
pub fn surrogate(
    cfg: &SystemConfig,
    h: &ChannelSet,
    fd: &FdBeamformers,
    aux: &AuxVariables,
) -> Result<f64> {
    let mut nats = 0.0;
    for k in 0..cfg.users {
        let gamma = aux.gamma(k);
        let u = &aux.u[k];
        let s = fd.combiners[k].adjoint() * &h.per_user[k] * &fd.precoders[k];
        let rbar = full_cov(cfg, &h.per_user[k], fd, k);
        let logdet_nats = logdet2_hpd(&gamma)? * LN_2;
        let cross = (&gamma * u.adjoint() * &s).trace();
        let quad = real_trace(&(&gamma * u.adjoint() * &rbar * u));
        nats += logdet_nats - real_trace(&aux.v[k]) + 2.0 * cross.re - quad;
    }
    Ok(nats / LN_2)
}

/// Closed-form update for the quadratic-transform matrices:
/// `U_k = R_bar_k^{-1} W_k^H H_k F_k`.
pub fn update_u(cfg: &SystemConfig, h: &ChannelSet, fd: &FdBeamformers) -> Result<Vec<CMat>> {
    (0..cfg.users)
        .map(|k| {
            let s = fd.combiners[k].adjoint() * &h.per_user[k] * &fd.precoders[k];
            let rbar = full_cov(cfg, &h.per_user[k], fd, k);
            solve_hpd(&rbar, &s)
                .map_err(|_| HbfError::SingularMatrix(format!("R_bar_{k} is singular")))
        })
        .collect()
}

/// Closed-form update for the matrix SINR:
/// `V_k = S_k^H R_k^{-1} S_k` with `R_k` the interference-plus-noise
/// covariance excluding user k's own signal. Hermitian PSD by construction.
pub fn update_v(cfg: &SystemConfig, h: &ChannelSet, fd: &FdBeamformers) -> Result<Vec<CMat>> {
    (0..cfg.users)
        .map(|k| {
            let s = fd.combiners[k].adjoint() * &h.per_user[k] * &fd.precoders[k];
            let r = interference_cov(cfg, &h.per_user[k], fd, k)?;
            let x = solve_hpd(&r, &s)
                .map_err(|_| HbfError::SingularMatrix(format!("R_{k} is singular")))?;
            Ok(herm(&(s.adjoint() * x)))
        })
        .collect()
}

/// Block-optimal combiner update:
/// `W_k = (H_k (sum_n F_n F_n^H) H_k^H + rho_n I)^{-1} H_k F_k Gamma_k U_k^H
///        (U_k Gamma_k U_k^H)^{-1}`.
pub fn update_w(
    cfg: &SystemConfig,
    h: &ChannelSet,
    fd: &FdBeamformers,
    aux: &AuxVariables,
) -> Result<Vec<CMat>> {
    let nr = cfg.rx_antennas;
    (0..cfg.users)
        .map(|k| {
            let hk = &h.per_user[k];
            let mut b = CMat::identity(nr, nr).scale(cfg.rho_n());
            for f in &fd.precoders {
                let hf = hk * f;
                b += &hf * hf.adjoint();
            }
            let gamma = aux.gamma(k);
            let u = &aux.u[k];
            let rhs = hk * &fd.precoders[k] * &gamma * u.adjoint();
            let left = solve_hpd(&b, &rhs)
                .map_err(|_| HbfError::SingularMatrix(format!("receive covariance {k} singular")))?;
            let m = herm(&(u * &gamma * u.adjoint()));
            // left * m^{-1}, via the Hermitian solve on the transposed system
            let w = solve_hpd(&m, &left.adjoint())
                .map_err(|_| {
                    HbfError::SingularMatrix(format!("U_{k} Gamma_{k} U_{k}^H is singular"))
                })?
                .adjoint();
            Ok(w)
        })
        .collect()
}

/// Result of the power-constrained precoder update.
#[derive(Debug, Clone)]
pub struct PrecoderUpdate {
    pub precoders: Vec<CMat>,
    /// Multiplier `delta*` meeting the power constraint (0 when the fallback
    /// rescaling was used).
    pub delta: f64,
    /// True when the power target was unattainable for any `delta >= 0` and
    /// the precoders were rescaled to restore feasibility.
    pub scaled_fallback: bool,
}

/// Block-optimal precoder update with the optimal power multiplier:
/// `F_k = (sum_n H_n^H W_n U_n Gamma_n U_n^H W_n^H H_n + delta* I)^{-1}
///        H_k^H W_k U_k Gamma_k`, `delta*` from bisection on the transmit
/// power so that `sum_k ||F_k||_F^2 = K N_s`.
pub fn update_f(
    cfg: &SystemConfig,
    h: &ChannelSet,
    fd: &FdBeamformers,
    aux: &AuxVariables,
) -> Result<PrecoderUpdate> {
    let nt = cfg.tx_antennas;
    let target = cfg.total_streams() as f64;

    let mut s_sum = CMat::zeros(nt, nt);
    let mut rhs = Vec::with_capacity(cfg.users);
    for k in 0..cfg.users {
        let gamma = aux.gamma(k);
        let u = &aux.u[k];
        let a = h.per_user[k].adjoint() * &fd.combiners[k] * u; // Nt x Ns
        s_sum += &a * &gamma * a.adjoint();
        rhs.push(h.per_user[k].adjoint() * &fd.combiners[k] * u * &gamma);
    }

    // Eigen-decompose once; the transmit power as a function of delta is then
    // sum |b_ij|^2 / (lambda_i + delta)^2, strictly decreasing on delta >= 0.
    // The right-hand sides lie in the range of the quadratic term, so
    // eigendirections below the rank cutoff carry only round-off mass and are
    // excluded outright (the pseudo-inverse convention); keeping them would
    // let noise-over-zero terms dominate the power near delta = 0.
    let (q, mut lambdas) = herm_eigen(&s_sum);
    let lam_max = lambdas.iter().fold(0.0_f64, |m, &l| m.max(l));
    let cutoff = lam_max * crate::numerics::PINV_RCOND * nt as f64;
    for l in &mut lambdas {
        *l = l.max(0.0);
    }
    let kept: Vec<bool> = lambdas.iter().map(|&l| l > cutoff).collect();
    let b_mats: Vec<CMat> = rhs.iter().map(|c| q.adjoint() * c).collect();
    let power_at = |delta: f64| -> f64 {
        let mut p = 0.0;
        for b in &b_mats {
            for (i, &l) in lambdas.iter().enumerate() {
                if !kept[i] {
                    continue;
                }
                let denom = l + delta;
                for j in 0..b.ncols() {
                    p += b[(i, j)].norm_sqr() / (denom * denom);
                }
            }
        }
        p
    };

    let assemble = |delta: f64| -> Vec<CMat> {
        b_mats
            .iter()
            .map(|b| {
                let mut scaled = b.clone();
                for i in 0..scaled.nrows() {
                    let inv = if kept[i] {
                        Complex64::new(1.0 / (lambdas[i] + delta), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    for j in 0..scaled.ncols() {
                        scaled[(i, j)] *= inv;
                    }
                }
                &q * scaled
            })
            .collect()
    };

    let p0 = power_at(0.0);
    if p0.is_finite() && p0 <= target {
        // Even the unconstrained solution is under the power budget: rescale
        // to restore the equality, preserving directions.
        if p0 <= 0.0 {
            return Err(HbfError::SingularMatrix(
                "precoder update produced zero transmit power".into(),
            ));
        }
        let mut precoders = assemble(0.0);
        let s = Complex64::new((target / p0).sqrt(), 0.0);
        for f in &mut precoders {
            *f *= s;
        }
        return Ok(PrecoderUpdate {
            precoders,
            delta: 0.0,
            scaled_fallback: true,
        });
    }

    let delta = bisect(power_at, target, 0.0, 1.0, 1e-10 * target)?;
    Ok(PrecoderUpdate {
        precoders: assemble(delta),
        delta,
        scaled_fallback: false,
    })
}

/// Leading `ns`-dimensional singular subspaces of `h_k`: returns
/// `(left, right)` with columns ordered by decreasing singular value.
fn leading_subspaces(h_k: &CMat, ns: usize) -> (CMat, CMat) {
    let svd = h_k.clone().svd(true, true);
    let u = svd.u.expect("svd with u requested");
    let v_t = svd.v_t.expect("svd with v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });
    let mut left = CMat::zeros(u.nrows(), ns);
    let mut right = CMat::zeros(v_t.ncols(), ns);
    for (dst, &src) in order.iter().take(ns).enumerate() {
        left.set_column(dst, &u.column(src));
        right.set_column(dst, &v_t.row(src).adjoint().column(0));
    }
    (left, right)
}

/// Runs the cyclic solver until the surrogate stalls or `max_iter` is hit.
///
/// Initialization is deterministic (per-user SVD subspaces with the precoder
/// set scaled onto the power sphere); the seed is reserved for randomized
/// initializations and currently unused.
pub fn solve(
    cfg: &SystemConfig,
    h: &ChannelSet,
    _seed: u64,
    stop: &FpStop,
) -> Result<(FdBeamformers, AuxVariables, SolveTrace)> {
    cfg.validate()?;
    if h.users() != cfg.users {
        return Err(HbfError::DimensionMismatch(format!(
            "channel set has {} users, config expects {}",
            h.users(),
            cfg.users
        )));
    }
    for (k, hk) in h.per_user.iter().enumerate() {
        crate::numerics::ensure_finite(&format!("H_{k}"), hk)?;
    }

    let mut precoders = Vec::with_capacity(cfg.users);
    let mut combiners = Vec::with_capacity(cfg.users);
    for hk in &h.per_user {
        let (left, right) = leading_subspaces(hk, cfg.streams);
        combiners.push(left);
        precoders.push(right);
    }
    let power: f64 = precoders.iter().map(|f| f.norm_squared()).sum();
    let scale = Complex64::new((cfg.total_streams() as f64 / power).sqrt(), 0.0);
    for f in &mut precoders {
        *f *= scale;
    }
    let mut fd = FdBeamformers { precoders, combiners };

    let mut aux = AuxVariables {
        u: vec![CMat::zeros(cfg.streams, cfg.streams); cfg.users],
        v: update_v(cfg, h, &fd)?,
    };

    let target = cfg.total_streams() as f64;
    let mut trace = SolveTrace::default();
    let mut prev = f64::NEG_INFINITY;
    for index in 1..=stop.max_iter {
        aux.u = update_u(cfg, h, &fd)?;
        aux.v = update_v(cfg, h, &fd)?;
        fd.combiners = update_w(cfg, h, &fd, &aux)?;
        let up = update_f(cfg, h, &fd, &aux)?;
        fd.precoders = up.precoders;
        trace.power_fallback |= up.scaled_fallback;

        let rbar = surrogate(cfg, h, &fd, &aux)?;
        let rate = sum_rate(cfg, h, &fd)?;
        let power_residual = (fd.transmit_power() - target).abs() / target;
        trace.iterations.push(FpIteration {
            index,
            surrogate: rbar,
            sum_rate: rate,
            power_residual,
        });

        if prev.is_finite() && (rbar - prev).abs() <= stop.rel_tol * prev.abs().max(1.0) {
            break;
        }
        prev = rbar;
    }
    Ok((fd, aux, trace))
}
