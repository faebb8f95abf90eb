//! Majorization-minimization hybrid factorization.
//!
//! Given fully-digital beamformers, finds a constant-modulus analog factor
//! and unconstrained digital factors minimizing the Euclidean distance
//! `f = sum_k ||F_k - F_RF F_BB,k||_F^2`. The analog step minimizes a linear
//! majorizer of `f` over the unit-modulus set (closed form: a phase update),
//! the digital step is the least-squares solution through the pseudo-inverse,
//! and the BS precoder gets one final power normalization. The same machinery
//! runs per-user on the combiners, without normalization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, SystemConfig};
use crate::error::{HbfError, Result};
use crate::exec;
use crate::fp_fd::{self, FpStop};
use crate::metrics::HybridBeamformers;
use crate::numerics::{max_eig_gram, pinv, CMat};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Residual trace of one factorization run.
///
/// Per outer iteration: the residual right after the digital update, then
/// one value per inner majorization step. The concatenated sequence is
/// non-increasing (before the final normalization).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MmTrace {
    pub outer: Vec<MmOuterRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MmOuterRecord {
    pub residual_after_digital: f64,
    pub inner_residuals: Vec<f64>,
}

impl MmTrace {
    /// All recorded residuals in execution order.
    pub fn residuals(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for rec in &self.outer {
            out.push(rec.residual_after_digital);
            out.extend_from_slice(&rec.inner_residuals);
        }
        out
    }
}

/// Stopping criteria for the factorization loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmStop {
    pub outer_max: usize,
    /// Relative change of the residual ending the outer loop.
    pub outer_rel_tol: f64,
    pub inner_max: usize,
    /// Relative change of the analog iterate ending the inner loop.
    pub inner_rel_tol: f64,
}

impl Default for MmStop {
    fn default() -> Self {
        Self {
            outer_max: 20,
            outer_rel_tol: 1e-4,
            inner_max: 50,
            inner_rel_tol: 1e-5,
        }
    }
}

fn check_factor_dims(analog: &CMat, digital: &[CMat], targets: &[CMat]) -> Result<()> {
    if digital.len() != targets.len() {
        return Err(HbfError::DimensionMismatch(
            "digital factor count differs from target count".into(),
        ));
    }
    for (k, (d, t)) in digital.iter().zip(targets).enumerate() {
        if analog.ncols() != d.nrows() || analog.nrows() != t.nrows() || d.ncols() != t.ncols() {
            return Err(HbfError::DimensionMismatch(format!(
                "factor {k}: analog {}x{}, digital {}x{}, target {}x{}",
                analog.nrows(),
                analog.ncols(),
                d.nrows(),
                d.ncols(),
                t.nrows(),
                t.ncols()
            )));
        }
    }
    Ok(())
}

/// Factorization residual `sum_k ||F_k - F_RF F_BB,k||_F^2`.
pub fn residual_f(analog: &CMat, digital: &[CMat], targets: &[CMat]) -> f64 {
    digital
        .iter()
        .zip(targets)
        .map(|(d, t)| (t - analog * d).norm_squared())
        .sum()
}

fn ensure_unit_modulus(name: &str, m: &CMat) -> Result<()> {
    let worst = m
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0_f64, f64::max);
    if worst > 1e-9 {
        return Err(HbfError::InvalidInput(format!(
            "{name} is not unit modulus (worst deviation {worst:e})"
        )));
    }
    Ok(())
}

/// Per-user pieces of the majorizer that do not depend on the candidate:
/// `lambda_k` and the linear coefficient `(Q_k - lambda_k I) f_anchor - e_k`
/// in matrix form, computed without forming the Kronecker `Q_k`.
fn majorizer_coefficients(
    anchor: &CMat,
    digital: &[CMat],
    targets: &[CMat],
) -> Result<(CMat, f64)> {
    let mut coeff = CMat::zeros(anchor.nrows(), anchor.ncols());
    let mut lambda_sum = 0.0;
    for (d, t) in digital.iter().zip(targets) {
        let lambda = max_eig_gram(d)?;
        lambda_sum += lambda;
        let gram = d * d.adjoint(); // (rf x rf), small
        coeff += anchor * gram - (anchor.scale(lambda)) - t * d.adjoint();
    }
    Ok((coeff, lambda_sum))
}

/// Value of the linear-plus-constant majorizer of the residual at
/// `candidate`, anchored at `anchor`. Both analog matrices must be unit
/// modulus; the majorizer dominates the residual on that set and touches it
/// at the anchor.
pub fn majorizer_value(
    candidate: &CMat,
    anchor: &CMat,
    digital: &[CMat],
    targets: &[CMat],
) -> Result<f64> {
    check_factor_dims(anchor, digital, targets)?;
    if candidate.shape() != anchor.shape() {
        return Err(HbfError::DimensionMismatch(
            "candidate and anchor shapes differ".into(),
        ));
    }
    ensure_unit_modulus("candidate", candidate)?;
    ensure_unit_modulus("anchor", anchor)?;

    let (coeff, lambda_sum) = majorizer_coefficients(anchor, digital, targets)?;
    let mut value = 0.0;
    // 2 Re <candidate, coeff>
    for (c, g) in candidate.iter().zip(coeff.iter()) {
        value += 2.0 * (c.conj() * g).re;
    }
    // Constant block: sum_k ||F_k||^2 + lambda_k f^H f + f_i^H (lambda_k I - Q_k) f_i.
    for t in targets {
        value += t.norm_squared();
    }
    value += lambda_sum * candidate.norm_squared();
    value += lambda_sum * anchor.norm_squared();
    for (d, _) in digital.iter().zip(targets) {
        let ad = anchor * d;
        value -= ad.norm_squared();
    }
    Ok(value)
}

/// Entry-wise phase minimizer of `2 Re <f, coeff>` over unit-modulus `f`:
/// `-exp(j arg(coeff))`, keeping the anchor's entry where the coefficient
/// vanishes (any phase is optimal there). Invariant under positive scaling
/// of `coeff`.
fn phase_minimizer(coeff: &CMat, anchor: &CMat) -> CMat {
    CMat::from_fn(anchor.nrows(), anchor.ncols(), |i, j| {
        let g = coeff[(i, j)];
        if g.norm() == 0.0 {
            anchor[(i, j)]
        } else {
            -Complex64::from_polar(1.0, g.arg())
        }
    })
}

/// One closed-form majorization step on the analog factor. The output has
/// exactly unit-modulus entries and never increases the residual.
pub fn update_analog(anchor: &CMat, digital: &[CMat], targets: &[CMat]) -> Result<CMat> {
    check_factor_dims(anchor, digital, targets)?;
    ensure_unit_modulus("anchor", anchor)?;
    let (coeff, _) = majorizer_coefficients(anchor, digital, targets)?;
    Ok(phase_minimizer(&coeff, anchor))
}

/// Least-squares digital factors for a fixed analog factor:
/// `F_BB,k = pinv(F_RF) F_k`.
pub fn update_digital(analog: &CMat, targets: &[CMat]) -> Vec<CMat> {
    let p = pinv(analog);
    targets.iter().map(|t| &p * t).collect()
}

/// Rescales all digital precoders by one common factor so that
/// `sum_k ||F_RF F_BB,k||_F^2 = target_power` exactly.
pub fn normalize_power(analog: &CMat, digital: &[CMat], target_power: f64) -> Result<Vec<CMat>> {
    let power: f64 = digital.iter().map(|d| (analog * d).norm_squared()).sum();
    if power <= 0.0 {
        return Err(HbfError::InvalidInput(
            "cannot normalize a zero hybrid product".into(),
        ));
    }
    let s = Complex64::new((target_power / power).sqrt(), 0.0);
    Ok(digital.iter().map(|d| d * s).collect())
}

fn random_phases(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    })
}

fn factorize_from(
    analog0: CMat,
    targets: &[CMat],
    stop: &MmStop,
    normalize_to: Option<f64>,
) -> Result<(CMat, Vec<CMat>, MmTrace)> {
    if targets.is_empty() || stop.outer_max == 0 || stop.inner_max == 0 {
        return Err(HbfError::InvalidInput(
            "factorization needs targets and nonzero iteration budgets".into(),
        ));
    }
    for (k, t) in targets.iter().enumerate() {
        if t.nrows() != analog0.nrows() {
            return Err(HbfError::DimensionMismatch(format!(
                "target {k} has {} rows, analog factor has {}",
                t.nrows(),
                analog0.nrows()
            )));
        }
    }
    ensure_unit_modulus("initial analog factor", &analog0)?;
    let mut analog = analog0;

    let mut trace = MmTrace::default();
    let mut prev_outer = f64::INFINITY;
    for _outer in 0..stop.outer_max {
        let digital = update_digital(&analog, targets);
        let mut rec = MmOuterRecord {
            residual_after_digital: residual_f(&analog, &digital, targets),
            inner_residuals: Vec::new(),
        };
        for _inner in 0..stop.inner_max {
            let next = update_analog(&analog, &digital, targets)?;
            let step = (&next - &analog).norm() / analog.norm();
            analog = next;
            rec.inner_residuals.push(residual_f(&analog, &digital, targets));
            if step <= stop.inner_rel_tol {
                break;
            }
        }
        let outer_res = *rec
            .inner_residuals
            .last()
            .unwrap_or(&rec.residual_after_digital);
        trace.outer.push(rec);
        if (prev_outer - outer_res).abs() <= stop.outer_rel_tol * prev_outer.abs().max(1e-30) {
            break;
        }
        prev_outer = outer_res;
    }

    let mut digital = update_digital(&analog, targets);
    if let Some(target_power) = normalize_to {
        digital = normalize_power(&analog, &digital, target_power)?;
    }
    Ok((analog, digital, trace))
}

/// Factors the BS precoders `{F_k}` into a shared analog factor with
/// `rf_chains` columns plus per-user digital factors, then normalizes the
/// transmit power onto the total stream count. Random-phase initialization
/// from the seed.
pub fn solve_precoder(
    targets: &[CMat],
    rf_chains: usize,
    seed: u64,
    stop: &MmStop,
) -> Result<(CMat, Vec<CMat>, MmTrace)> {
    let nt = targets
        .first()
        .ok_or_else(|| HbfError::InvalidInput("no precoder targets".into()))?
        .nrows();
    solve_precoder_from(random_phases(nt, rf_chains, seed), targets, stop)
}

/// [`solve_precoder`] from an explicit unit-modulus starting point.
pub fn solve_precoder_from(
    analog0: CMat,
    targets: &[CMat],
    stop: &MmStop,
) -> Result<(CMat, Vec<CMat>, MmTrace)> {
    let total_streams: usize = targets.iter().map(|t| t.ncols()).sum();
    factorize_from(analog0, targets, stop, Some(total_streams as f64))
}

/// Factors one UE combiner. No power normalization: combiners carry no power
/// constraint and the sum-rate is invariant to invertible combiner
/// transforms.
pub fn solve_combiner(
    target: &CMat,
    rf_chains: usize,
    seed: u64,
    stop: &MmStop,
) -> Result<(CMat, CMat, MmTrace)> {
    solve_combiner_from(random_phases(target.nrows(), rf_chains, seed), target, stop)
}

/// [`solve_combiner`] from an explicit unit-modulus starting point.
pub fn solve_combiner_from(
    analog0: CMat,
    target: &CMat,
    stop: &MmStop,
) -> Result<(CMat, CMat, MmTrace)> {
    let targets = std::slice::from_ref(target);
    let (analog, mut digital, trace) = factorize_from(analog0, targets, stop, None)?;
    Ok((analog, digital.pop().expect("one digital factor"), trace))
}

/// Options for the full digital-then-hybrid pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineStops {
    pub fp: FpStop,
    pub mm: MmStop,
}

/// Full hybrid design: fully-digital solve, precoder factorization, then one
/// combiner factorization per user. Deterministic given `(cfg, h, seed)`.
pub fn fp_mm_pipeline(
    cfg: &SystemConfig,
    h: &ChannelSet,
    seed: u64,
    stops: &PipelineStops,
) -> Result<HybridBeamformers> {
    let (fd, _, _) = fp_fd::solve(cfg, h, seed, &stops.fp)?;
    let (analog_precoder, digital_precoders, _) = solve_precoder(
        &fd.precoders,
        cfg.tx_rf_chains,
        exec::derive_seed(seed, 1),
        &stops.mm,
    )?;

    let combiner_results = exec::map_indexed(cfg.users, |k| {
        solve_combiner(
            &fd.combiners[k],
            cfg.rx_rf_chains,
            exec::derive_seed(seed, 2 + k as u64),
            &stops.mm,
        )
    });
    let mut analog_combiners = Vec::with_capacity(cfg.users);
    let mut digital_combiners = Vec::with_capacity(cfg.users);
    for res in combiner_results {
        let (wrf, wbb, _) = res?;
        analog_combiners.push(wrf);
        digital_combiners.push(wbb);
    }

    Ok(HybridBeamformers {
        analog_precoder,
        digital_precoders,
        analog_combiners,
        digital_combiners,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn randn_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        })
    }

    fn kron_quadratic_residual(analog: &CMat, digital: &[CMat], targets: &[CMat]) -> f64 {
        // Explicit Kronecker form of the residual:
        // sum_k Tr(F_k F_k^H) + f^H Q_k f - 2 Re(f^H e_k).
        let nt = analog.nrows();
        let f: Vec<Complex64> = analog.iter().copied().collect(); // column-major vec
        let mut total = 0.0;
        for (d, t) in digital.iter().zip(targets) {
            let q = (d * d.adjoint()).transpose().kronecker(&CMat::identity(nt, nt));
            let e: Vec<Complex64> = (t * d.adjoint()).iter().copied().collect();
            let mut quad = Complex64::new(0.0, 0.0);
            for (i, fi) in f.iter().enumerate() {
                for (j, fj) in f.iter().enumerate() {
                    quad += fi.conj() * q[(i, j)] * fj;
                }
            }
            let lin: Complex64 = f.iter().zip(&e).map(|(fi, ei)| fi.conj() * ei).sum();
            total += (t * t.adjoint()).trace().re + quad.re - 2.0 * lin.re;
        }
        total
    }

    #[test]
    fn residual_zero_at_exact_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let analog = randn_mat(4, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let digital = vec![randn_mat(2, 2, &mut rng), randn_mat(2, 2, &mut rng)];
        let targets: Vec<CMat> = digital.iter().map(|d| &analog * d).collect();
        assert!(residual_f(&analog, &digital, &targets) < 1e-24);
    }

    #[test]
    fn residual_zero_digital_is_target_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let analog = randn_mat(4, 2, &mut rng);
        let targets = vec![randn_mat(4, 3, &mut rng), randn_mat(4, 3, &mut rng)];
        let digital = vec![CMat::zeros(2, 3), CMat::zeros(2, 3)];
        let expect: f64 = targets.iter().map(|t| t.norm_squared()).sum();
        assert_relative_eq!(
            residual_f(&analog, &digital, &targets),
            expect,
            max_relative = 1e-12
        );
    }

    #[test]
    fn residual_matches_kronecker_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let analog = randn_mat(3, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let digital = vec![randn_mat(2, 2, &mut rng), randn_mat(2, 2, &mut rng)];
        let targets = vec![randn_mat(3, 2, &mut rng), randn_mat(3, 2, &mut rng)];
        let got = residual_f(&analog, &digital, &targets);
        let oracle = kron_quadratic_residual(&analog, &digital, &targets);
        assert!((got - oracle).abs() < 1e-10 * got.max(1.0));
    }

    #[test]
    fn majorizer_touches_residual_at_anchor() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let anchor = randn_mat(4, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let digital = vec![randn_mat(2, 2, &mut rng), randn_mat(2, 2, &mut rng)];
        let targets = vec![randn_mat(4, 2, &mut rng), randn_mat(4, 2, &mut rng)];
        let m = majorizer_value(&anchor, &anchor, &digital, &targets).unwrap();
        let r = residual_f(&anchor, &digital, &targets);
        assert!((m - r).abs() <= 1e-9 * r.max(1.0), "majorizer {m} vs residual {r}");
    }

    #[test]
    fn majorizer_dominates_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let anchor = randn_mat(3, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let digital = vec![randn_mat(2, 2, &mut rng)];
        let targets = vec![randn_mat(3, 2, &mut rng)];
        for _ in 0..500 {
            let cand = randn_mat(3, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
            let m = majorizer_value(&cand, &anchor, &digital, &targets).unwrap();
            let r = residual_f(&cand, &digital, &targets);
            assert!(m >= r - 1e-9, "majorizer {m} below residual {r}");
        }
    }

    #[test]
    fn majorizer_scalar_hand_computation() {
        // Nt = Nrft = 1 with K = 1: everything is scalar.
        let f_anchor = Complex64::from_polar(1.0, 0.3);
        let f_cand = Complex64::from_polar(1.0, -1.1);
        let d = Complex64::new(0.7, -0.4);
        let t = Complex64::new(1.2, 0.5);
        let lambda = d.norm_sqr(); // max eigenvalue of d d^H
        let q = d.norm_sqr();
        let e = t * d.conj();
        let coeff = (q - lambda) * f_anchor - e;
        let expect = 2.0 * (f_cand.conj() * coeff).re
            + t.norm_sqr()
            + lambda * f_cand.norm_sqr()
            + (lambda - q) * f_anchor.norm_sqr();
        let got = majorizer_value(
            &CMat::from_element(1, 1, f_cand),
            &CMat::from_element(1, 1, f_anchor),
            &[CMat::from_element(1, 1, d)],
            &[CMat::from_element(1, 1, t)],
        )
        .unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn majorizer_rejects_non_unit_modulus() {
        let anchor = CMat::from_element(2, 1, Complex64::new(1.0, 0.0));
        let bad = CMat::from_element(2, 1, Complex64::new(0.5, 0.0));
        let digital = vec![CMat::identity(1, 1)];
        let targets = vec![CMat::zeros(2, 1)];
        assert!(majorizer_value(&bad, &anchor, &digital, &targets).is_err());
    }

    #[test]
    fn update_analog_unit_modulus_and_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let anchor = randn_mat(4, 3, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
            let digital = vec![randn_mat(3, 2, &mut rng), randn_mat(3, 2, &mut rng)];
            let targets = vec![randn_mat(4, 2, &mut rng), randn_mat(4, 2, &mut rng)];
            let next = update_analog(&anchor, &digital, &targets).unwrap();
            let worst = next
                .iter()
                .map(|z| (z.norm() - 1.0).abs())
                .fold(0.0_f64, f64::max);
            assert!(worst <= 1e-12);
            let before = residual_f(&anchor, &digital, &targets);
            let after = residual_f(&next, &digital, &targets);
            assert!(after <= before + 1e-9, "residual rose {before} -> {after}");
        }
    }

    #[test]
    fn phase_minimizer_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let coeff = randn_mat(4, 2, &mut rng);
        let anchor = randn_mat(4, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let a = phase_minimizer(&coeff, &anchor);
        // Positive rescaling of the coefficients (any common factor) changes nothing.
        let b = phase_minimizer(&(coeff.scale(1.0 / 3.0)), &anchor);
        let c = phase_minimizer(&(coeff.scale(250.0)), &anchor);
        assert!((&a - &b).norm() < 1e-14);
        assert!((&a - &c).norm() < 1e-14);
    }

    #[test]
    fn phase_minimizer_keeps_anchor_phase_on_zero_coefficient() {
        let mut coeff = CMat::from_element(2, 1, Complex64::new(1.0, 1.0));
        coeff[(1, 0)] = Complex64::new(0.0, 0.0);
        let anchor = CMat::from_fn(2, 1, |i, _| Complex64::from_polar(1.0, 0.4 + i as f64));
        let out = phase_minimizer(&coeff, &anchor);
        assert_eq!(out[(1, 0)], anchor[(1, 0)]);
        assert!((out[(0, 0)] + Complex64::from_polar(1.0, coeff[(0, 0)].arg())).norm() < 1e-15);
    }

    #[test]
    fn update_analog_matches_exhaustive_grid() {
        // Nt = 2, Nrft = 1, one user: joint phase grid at 1e-3 rad must agree
        // with the closed form within grid resolution. The linear coefficient
        // is built from the explicit Kronecker matrices.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..3 {
            let anchor = randn_mat(2, 1, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
            let digital = vec![randn_mat(1, 1, &mut rng)];
            let targets = vec![randn_mat(2, 1, &mut rng)];

            let nt = 2;
            let q = (digital[0].clone() * digital[0].adjoint())
                .transpose()
                .kronecker(&CMat::identity(nt, nt));
            let lambda = max_eig_gram(&digital[0]).unwrap();
            let e: Vec<Complex64> = (&targets[0] * digital[0].adjoint()).iter().copied().collect();
            let fa: Vec<Complex64> = anchor.iter().copied().collect();
            let coeff: Vec<Complex64> = (0..nt)
                .map(|i| {
                    let mut acc = -e[i];
                    for j in 0..nt {
                        acc += q[(i, j)] * fa[j];
                    }
                    acc - lambda * fa[i]
                })
                .collect();

            // Exhaustive 2-D search over the variable part 2 Re <f, coeff>.
            let step = 1e-3f64;
            let n_steps = (std::f64::consts::TAU / step).ceil() as usize;
            let mut best = (0.0f64, 0.0f64);
            let mut best_val = f64::INFINITY;
            for i in 0..n_steps {
                let t0 = i as f64 * step;
                let f0 = Complex64::from_polar(1.0, t0);
                let part0 = 2.0 * (f0.conj() * coeff[0]).re;
                for j in 0..n_steps {
                    let t1 = j as f64 * step;
                    let f1 = Complex64::from_polar(1.0, t1);
                    let val = part0 + 2.0 * (f1.conj() * coeff[1]).re;
                    if val < best_val {
                        best_val = val;
                        best = (t0, t1);
                    }
                }
            }

            let closed = update_analog(&anchor, &digital, &targets).unwrap();
            for (idx, grid_theta) in [best.0, best.1].into_iter().enumerate() {
                let diff = (Complex64::from_polar(1.0, grid_theta) - closed[(idx, 0)]).arg().abs();
                let wrapped = (closed[(idx, 0)].conj() * Complex64::from_polar(1.0, grid_theta))
                    .arg()
                    .abs();
                assert!(
                    wrapped <= step,
                    "trial {trial}, entry {idx}: grid {grid_theta} vs closed form (gap {wrapped}, diff {diff})"
                );
            }
        }
    }

    #[test]
    fn update_digital_exact_recovery_when_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let analog = randn_mat(3, 3, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let truth = [randn_mat(3, 2, &mut rng)];
        let targets: Vec<CMat> = truth.iter().map(|d| &analog * d).collect();
        let digital = update_digital(&analog, &targets);
        assert!(residual_f(&analog, &digital, &targets) < 1e-18);
    }

    #[test]
    fn update_digital_is_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let analog = randn_mat(5, 2, &mut rng);
        let targets = vec![randn_mat(5, 2, &mut rng)];
        let digital = update_digital(&analog, &targets);
        let best = residual_f(&analog, &digital, &targets);
        for _ in 0..1000 {
            let scale = 10f64.powf(rng.random_range(-3.0..0.0));
            let perturbed = vec![&digital[0] + randn_mat(2, 2, &mut rng).scale(scale)];
            assert!(residual_f(&analog, &perturbed, &targets) >= best - 1e-12);
        }
    }

    #[test]
    fn update_digital_zero_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let analog = randn_mat(4, 2, &mut rng);
        let digital = update_digital(&analog, &[CMat::zeros(4, 2)]);
        assert_eq!(digital[0].norm(), 0.0);
    }

    #[test]
    fn normalize_power_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let analog = randn_mat(4, 2, &mut rng);
        let digital = vec![randn_mat(2, 2, &mut rng), randn_mat(2, 2, &mut rng)];
        let target = 4.0; // K * Ns for K = 2, Ns = 2

        let scaled = normalize_power(&analog, &digital, target).unwrap();
        let power: f64 = scaled.iter().map(|d| (&analog * d).norm_squared()).sum();
        assert!((power - target).abs() <= 1e-12 * target);

        // Already feasible input is unchanged.
        let again = normalize_power(&analog, &scaled, target).unwrap();
        for (a, b) in again.iter().zip(&scaled) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }

        // Power 4x the target: every factor is halved.
        let hot: Vec<CMat> = scaled.iter().map(|d| d.scale(2.0)).collect();
        let cooled = normalize_power(&analog, &hot, target).unwrap();
        for (c, s) in cooled.iter().zip(&scaled) {
            assert!((c - s).norm() <= 1e-12 * s.norm().max(1.0));
        }

        assert!(normalize_power(&analog, &[CMat::zeros(2, 2)], target).is_err());
    }

    #[test]
    fn solve_precoder_fixed_point_of_exact_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let analog_true = randn_mat(4, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let digital_true = [randn_mat(2, 1, &mut rng), randn_mat(2, 1, &mut rng)];
        let targets: Vec<CMat> = digital_true.iter().map(|d| &analog_true * d).collect();
        let (_, _, trace) =
            solve_precoder_from(analog_true.clone(), &targets, &MmStop::default()).unwrap();
        for r in trace.residuals() {
            assert!(r <= 1e-9, "residual {r} escaped the exact fixed point");
        }
    }

    #[test]
    fn solve_precoder_monotone_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let targets: Vec<CMat> = (0..3).map(|_| randn_mat(8, 2, &mut rng)).collect();
        let (analog, digital, trace) = solve_precoder(&targets, 4, 99, &MmStop::default()).unwrap();
        let rs = trace.residuals();
        for pair in rs.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "residual rose {} -> {}", pair[0], pair[1]);
        }
        let power: f64 = digital.iter().map(|d| (&analog * d).norm_squared()).sum();
        assert!((power - 6.0).abs() <= 1e-9);
        assert!(analog.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn solve_combiner_monotone_unit_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for seed in 0..100u64 {
            let target = randn_mat(6, 2, &mut rng);
            let (analog, _, trace) = solve_combiner(&target, 2, seed, &MmStop::default()).unwrap();
            let rs = trace.residuals();
            for pair in rs.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-9);
            }
            assert!(analog.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12));
        }
    }

    #[test]
    fn combiner_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let analog_true = randn_mat(6, 2, &mut rng).map(|z| Complex64::from_polar(1.0, z.arg()));
        let digital_true = randn_mat(2, 2, &mut rng);
        let target = &analog_true * &digital_true;
        let (_, _, trace) =
            solve_combiner_from(analog_true, &target, &MmStop::default()).unwrap();
        for r in trace.residuals() {
            assert!(r <= 1e-9);
        }
    }
}
