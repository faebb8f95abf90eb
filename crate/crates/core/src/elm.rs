//! Extreme-learning-machine surrogate for hybrid beamforming.
//!
//! A single hidden layer with random fixed input weights maps vectorized
//! (noisy) channels to vectorized hybrid beamformers; only the output
//! weights are trained, in closed form, by ridge regression on
//! solver-generated labels. Decoding rebuilds analog factors as pure phases
//! and renormalizes the digital precoders, so every prediction is feasible
//! by construction no matter how wrong the regression is.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    generate_channel, perturb_channel_with, ChannelModelParams, ChannelSet, NoiseDbConvention,
    SystemConfig,
};
use crate::error::{HbfError, Result};
use crate::exec;
use crate::metrics::HybridBeamformers;
use crate::mm_hbf::{self, PipelineStops};
use crate::numerics::{CMat, RMat, RVec};

/// Hidden-node activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    /// Parametric rectified linear unit with the given negative slope.
    PRelu(f64),
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::PRelu(slope) => {
                if x >= 0.0 {
                    x
                } else {
                    slope * x
                }
            }
        }
    }
}

/// Feature/target vector layout derived from the system configuration.
///
/// Features: `[Re(vec(H_1..K)), Im(vec(H_1..K))]`, length `2 K Nr Nt`.
/// Targets: `[Re(vec(F_BB)), Im(vec(F_BB)), Re(vec(W_BB)), Im(vec(W_BB)),
/// arg(vec(F_RF)), arg(vec(W_RF))]` with the per-user digital and analog
/// combiner blocks concatenated horizontally, all vectorized column-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetLayout {
    pub users: usize,
    pub streams: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub tx_rf_chains: usize,
    pub rx_rf_chains: usize,
}

impl TargetLayout {
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self {
            users: cfg.users,
            streams: cfg.streams,
            tx_antennas: cfg.tx_antennas,
            rx_antennas: cfg.rx_antennas,
            tx_rf_chains: cfg.tx_rf_chains,
            rx_rf_chains: cfg.rx_rf_chains,
        }
    }

    /// `N_I = 2 K Nr Nt`.
    pub fn input_len(&self) -> usize {
        2 * self.users * self.rx_antennas * self.tx_antennas
    }

    /// Element count of the digital precoder block `F_BB` (all users).
    fn fbb_len(&self) -> usize {
        self.users * self.tx_rf_chains * self.streams
    }

    /// Element count of the digital combiner block `W_BB` (all users).
    fn wbb_len(&self) -> usize {
        self.users * self.rx_rf_chains * self.streams
    }

    /// `N_o`, derived from the target segments:
    /// `Nt Nrft + K (Nr Nrfr + 2 Ns (Nrft + Nrfr))`.
    pub fn output_len(&self) -> usize {
        2 * self.fbb_len()
            + 2 * self.wbb_len()
            + self.tx_antennas * self.tx_rf_chains
            + self.users * self.rx_antennas * self.rx_rf_chains
    }
}

/// Vectorizes K noisy channel matrices into one real feature vector.
pub fn encode_features(noisy: &ChannelSet) -> RVec {
    let total: usize = noisy.per_user.iter().map(|h| h.len()).sum();
    let mut x = RVec::zeros(2 * total);
    let mut i = 0;
    for h in &noisy.per_user {
        for z in h.iter() {
            x[i] = z.re;
            i += 1;
        }
    }
    for h in &noisy.per_user {
        for z in h.iter() {
            x[i] = z.im;
            i += 1;
        }
    }
    x
}

/// Inverse of [`encode_features`]; exact bit-for-bit round trip.
pub fn decode_features(x: &RVec, layout: &TargetLayout) -> Result<ChannelSet> {
    if x.len() != layout.input_len() {
        return Err(HbfError::DimensionMismatch(format!(
            "feature vector has {} entries, layout expects {}",
            x.len(),
            layout.input_len()
        )));
    }
    let per = layout.rx_antennas * layout.tx_antennas;
    let half = layout.users * per;
    let per_user = (0..layout.users)
        .map(|k| {
            CMat::from_fn(layout.rx_antennas, layout.tx_antennas, |i, j| {
                let idx = k * per + j * layout.rx_antennas + i; // column-major
                Complex64::new(x[idx], x[half + idx])
            })
        })
        .collect();
    Ok(ChannelSet { per_user })
}

/// Vectorizes a hybrid beamformer set into one real target vector:
/// digital parts as real/imaginary pairs, analog parts as phases in
/// `(-pi, pi]`.
pub fn encode_targets(hb: &HybridBeamformers) -> RVec {
    let mut t = Vec::new();
    for fbb in &hb.digital_precoders {
        t.extend(fbb.iter().map(|z| z.re));
    }
    for fbb in &hb.digital_precoders {
        t.extend(fbb.iter().map(|z| z.im));
    }
    for wbb in &hb.digital_combiners {
        t.extend(wbb.iter().map(|z| z.re));
    }
    for wbb in &hb.digital_combiners {
        t.extend(wbb.iter().map(|z| z.im));
    }
    t.extend(hb.analog_precoder.iter().map(|z| z.arg()));
    for wrf in &hb.analog_combiners {
        t.extend(wrf.iter().map(|z| z.arg()));
    }
    RVec::from_vec(t)
}

/// Rebuilds a feasible hybrid beamformer set from a target vector.
///
/// Analog matrices are reconstructed as `exp(j theta)` (unit modulus
/// regardless of prediction error) and the digital precoders are
/// renormalized onto the power sphere.
pub fn decode_targets(t: &RVec, cfg: &SystemConfig) -> Result<HybridBeamformers> {
    let layout = TargetLayout::from_config(cfg);
    if t.len() != layout.output_len() {
        return Err(HbfError::DimensionMismatch(format!(
            "target vector has {} entries, layout expects {}",
            t.len(),
            layout.output_len()
        )));
    }
    let mut pos = 0;
    let mut take = |n: usize| {
        let s = t.as_slice()[pos..pos + n].to_vec();
        pos += n;
        s
    };

    let fbb_re = take(layout.fbb_len());
    let fbb_im = take(layout.fbb_len());
    let wbb_re = take(layout.wbb_len());
    let wbb_im = take(layout.wbb_len());
    let frf_phase = take(layout.tx_antennas * layout.tx_rf_chains);
    let wrf_phase = take(layout.users * layout.rx_antennas * layout.rx_rf_chains);

    let complex_blocks = |re: &[f64], im: &[f64], rows: usize, cols: usize| -> Vec<CMat> {
        let per = rows * cols;
        (0..layout.users)
            .map(|k| {
                CMat::from_fn(rows, cols, |i, j| {
                    let idx = k * per + j * rows + i;
                    Complex64::new(re[idx], im[idx])
                })
            })
            .collect()
    };
    let phase_block = |ph: &[f64], rows: usize, cols: usize, offset: usize| -> CMat {
        CMat::from_fn(rows, cols, |i, j| {
            Complex64::from_polar(1.0, ph[offset + j * rows + i])
        })
    };

    let digital_precoders = complex_blocks(&fbb_re, &fbb_im, layout.tx_rf_chains, layout.streams);
    let digital_combiners = complex_blocks(&wbb_re, &wbb_im, layout.rx_rf_chains, layout.streams);
    let analog_precoder = phase_block(&frf_phase, layout.tx_antennas, layout.tx_rf_chains, 0);
    let per_wrf = layout.rx_antennas * layout.rx_rf_chains;
    let analog_combiners = (0..layout.users)
        .map(|k| phase_block(&wrf_phase, layout.rx_antennas, layout.rx_rf_chains, k * per_wrf))
        .collect();

    let digital_precoders = mm_hbf::normalize_power(
        &analog_precoder,
        &digital_precoders,
        cfg.total_streams() as f64,
    )?;
    Ok(HybridBeamformers {
        analog_precoder,
        digital_precoders,
        analog_combiners,
        digital_combiners,
    })
}

/// Dataset provenance kept alongside the sample matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub system: SystemConfig,
    pub channel: ChannelModelParams,
    pub base_seed: u64,
    pub snr_train_db: Vec<f64>,
    pub realizations: usize,
    pub noisy_per_realization: usize,
}

/// Row-aligned feature and target matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    /// N x N_I.
    pub features: RMat,
    /// N x N_o.
    pub targets: RMat,
    pub meta: DatasetMeta,
}

impl TrainingDataset {
    pub fn rows(&self) -> usize {
        self.features.nrows()
    }
}

/// Builds a labelled dataset: per channel realization, one solver label from
/// the clean channel paired with `noisy_per_realization` feature vectors from
/// synthetically corrupted copies (SNR_Train cycled across `snr_train_db`).
///
/// Realizations whose solve fails are skipped with a warning. Deterministic
/// for a fixed seed, regardless of worker count.
#[allow(clippy::too_many_arguments)]
pub fn build_dataset(
    cfg: &SystemConfig,
    params: &ChannelModelParams,
    realizations: usize,
    noisy_per_realization: usize,
    snr_train_db: &[f64],
    convention: NoiseDbConvention,
    seed: u64,
    stops: &PipelineStops,
) -> Result<TrainingDataset> {
    cfg.validate()?;
    params.validate(cfg)?;
    if realizations == 0 || noisy_per_realization == 0 || snr_train_db.is_empty() {
        return Err(HbfError::InvalidInput(
            "dataset needs realizations, noisy copies, and at least one SNR_Train".into(),
        ));
    }
    let layout = TargetLayout::from_config(cfg);

    type RealizationRows = Option<(Vec<RVec>, RVec)>;
    let per_realization: Vec<RealizationRows> = exec::map_indexed(realizations, |r| {
        let base = exec::derive_seed(seed, r as u64);
        let clean = generate_channel(cfg, params, exec::derive_seed(base, 0))
            .expect("validated configuration");
        let label = match mm_hbf::fp_mm_pipeline(cfg, &clean, exec::derive_seed(base, 1), stops) {
            Ok(hb) => encode_targets(&hb),
            Err(e) => {
                eprintln!("warning: skipping realization {r}: {e}");
                return None;
            }
        };
        let rows = (0..noisy_per_realization)
            .map(|j| {
                let snr = snr_train_db[j % snr_train_db.len()];
                let noisy =
                    perturb_channel_with(&clean, snr, exec::derive_seed(base, 2 + j as u64), convention);
                encode_features(&noisy)
            })
            .collect();
        Some((rows, label))
    });

    let kept: Vec<&(Vec<RVec>, RVec)> = per_realization.iter().flatten().collect();
    if kept.is_empty() {
        return Err(HbfError::InvalidInput(
            "every realization failed to solve".into(),
        ));
    }
    let n = kept.len() * noisy_per_realization;
    let mut features = RMat::zeros(n, layout.input_len());
    let mut targets = RMat::zeros(n, layout.output_len());
    let mut row = 0;
    for (xs, label) in kept {
        for x in xs {
            features.row_mut(row).copy_from(&x.transpose());
            targets.row_mut(row).copy_from(&label.transpose());
            row += 1;
        }
    }
    Ok(TrainingDataset {
        features,
        targets,
        meta: DatasetMeta {
            system: *cfg,
            channel: *params,
            base_seed: seed,
            snr_train_db: snr_train_db.to_vec(),
            realizations,
            noisy_per_realization,
        },
    })
}

/// Random hidden layer plus closed-form output weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    /// L x N_I input weights, uniform on [-1, 1].
    pub input_weights: RMat,
    /// L biases, uniform on [0, 1].
    pub biases: RVec,
    /// L x N_o output weights; `None` until trained.
    pub output_weights: Option<RMat>,
    pub activation: Activation,
    /// Ridge trade-off weighting the fit term.
    pub lambda: f64,
    pub layout: TargetLayout,
}

impl ElmModel {
    pub fn hidden_nodes(&self) -> usize {
        self.input_weights.nrows()
    }
}

/// Draws the random hidden layer for the given configuration.
pub fn init_random(
    cfg: &SystemConfig,
    hidden_nodes: usize,
    activation: Activation,
    lambda: f64,
    seed: u64,
) -> Result<ElmModel> {
    if hidden_nodes == 0 {
        return Err(HbfError::InvalidInput("hidden node count must be >= 1".into()));
    }
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(HbfError::InvalidInput("lambda must be positive".into()));
    }
    let layout = TargetLayout::from_config(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_weights =
        RMat::from_fn(hidden_nodes, layout.input_len(), |_, _| rng.random_range(-1.0..=1.0));
    let biases = RVec::from_fn(hidden_nodes, |_, _| rng.random_range(0.0..=1.0));
    Ok(ElmModel {
        input_weights,
        biases,
        output_weights: None,
        activation,
        lambda,
        layout,
    })
}

/// Hidden-layer response for one input vector:
/// `g_l = activation(w_l . x + b_l)`.
pub fn hidden_vector(model: &ElmModel, x: &RVec) -> RVec {
    let mut g = &model.input_weights * x + &model.biases;
    g.apply(|v| *v = model.activation.apply(*v));
    g
}

/// Hidden-layer response matrix, one row `g(x_j)` per sample row of `x`.
/// Rows are computed concurrently in a deterministic order.
pub fn hidden_matrix(model: &ElmModel, x: &RMat) -> RMat {
    let rows = exec::map_indexed(x.nrows(), |j| hidden_vector(model, &x.row(j).transpose()));
    let mut g = RMat::zeros(x.nrows(), model.hidden_nodes());
    for (j, row) in rows.iter().enumerate() {
        g.row_mut(j).copy_from(&row.transpose());
    }
    g
}

/// Solves the ridge problem `min (lambda/2)||G beta - T||^2 + (1/2)||beta||^2`
/// in closed form and stores the output weights in the model.
///
/// For N >= L the primal normal equations `(G^T G + I/lambda) beta = G^T T`
/// are solved; for N < L the dual form `beta = G^T (I/lambda + G G^T)^{-1} T`
/// is used. The two agree by the push-through identity.
pub fn train(model: &mut ElmModel, dataset: &TrainingDataset) -> Result<()> {
    let n = dataset.rows();
    if n == 0 {
        return Err(HbfError::InvalidInput("empty dataset".into()));
    }
    if dataset.features.ncols() != model.layout.input_len()
        || dataset.targets.ncols() != model.layout.output_len()
        || dataset.targets.nrows() != n
    {
        return Err(HbfError::DimensionMismatch(
            "dataset dimensions do not match the model layout".into(),
        ));
    }
    let g = hidden_matrix(model, &dataset.features);
    if !g.iter().all(|v| v.is_finite()) {
        return Err(HbfError::InvalidInput("hidden matrix has non-finite entries".into()));
    }
    let l = model.hidden_nodes();
    let beta = if n >= l {
        let lhs = g.transpose() * &g + RMat::identity(l, l) / model.lambda;
        let rhs = g.transpose() * &dataset.targets;
        lhs.cholesky()
            .ok_or_else(|| HbfError::SingularMatrix("ridge normal equations".into()))?
            .solve(&rhs)
    } else {
        let lhs = &g * g.transpose() + RMat::identity(n, n) / model.lambda;
        let inner = lhs
            .cholesky()
            .ok_or_else(|| HbfError::SingularMatrix("ridge dual system".into()))?
            .solve(&dataset.targets);
        g.transpose() * inner
    };
    model.output_weights = Some(beta);
    Ok(())
}

/// Mean squared validation error per candidate lambda, reusing one hidden
/// matrix; returns the best lambda. Every `holdout_every`-th row is held out.
pub fn sweep_lambda(
    model: &ElmModel,
    dataset: &TrainingDataset,
    candidates: &[f64],
    holdout_every: usize,
) -> Result<(f64, Vec<(f64, f64)>)> {
    if candidates.is_empty() || holdout_every < 2 {
        return Err(HbfError::InvalidInput(
            "need candidate lambdas and holdout_every >= 2".into(),
        ));
    }
    let n = dataset.rows();
    let val_idx: Vec<usize> = (0..n).filter(|i| i % holdout_every == 0).collect();
    let train_idx: Vec<usize> = (0..n).filter(|i| i % holdout_every != 0).collect();
    if val_idx.is_empty() || train_idx.is_empty() {
        return Err(HbfError::InvalidInput("dataset too small for a holdout split".into()));
    }
    let g = hidden_matrix(model, &dataset.features);
    let sub = |m: &RMat, idx: &[usize]| -> RMat {
        RMat::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
    };
    let g_tr = sub(&g, &train_idx);
    let t_tr = sub(&dataset.targets, &train_idx);
    let g_val = sub(&g, &val_idx);
    let t_val = sub(&dataset.targets, &val_idx);

    let l = model.hidden_nodes();
    let mut scores = Vec::with_capacity(candidates.len());
    for &lambda in candidates {
        let beta = if g_tr.nrows() >= l {
            let lhs = g_tr.transpose() * &g_tr + RMat::identity(l, l) / lambda;
            let rhs = g_tr.transpose() * &t_tr;
            lhs.cholesky()
                .ok_or_else(|| HbfError::SingularMatrix("ridge normal equations".into()))?
                .solve(&rhs)
        } else {
            let nt = g_tr.nrows();
            let lhs = &g_tr * g_tr.transpose() + RMat::identity(nt, nt) / lambda;
            let inner = lhs
                .cholesky()
                .ok_or_else(|| HbfError::SingularMatrix("ridge dual system".into()))?
                .solve(&t_tr);
            g_tr.transpose() * inner
        };
        let err = (&g_val * &beta - &t_val).norm_squared() / (t_val.nrows() as f64);
        scores.push((lambda, err));
    }
    let best = scores
        .iter()
        .cloned()
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite scores"))
        .expect("nonempty candidates");
    Ok((best.0, scores))
}

/// Predicts a feasible hybrid beamformer set for a (noisy) channel input.
pub fn predict(model: &ElmModel, noisy: &ChannelSet) -> Result<HybridBeamformers> {
    let beta = model.output_weights.as_ref().ok_or(HbfError::Untrained)?;
    let x = encode_features(noisy);
    if x.len() != model.layout.input_len() {
        return Err(HbfError::DimensionMismatch(format!(
            "channel set encodes to {} features, model expects {}",
            x.len(),
            model.layout.input_len()
        )));
    }
    let g = hidden_vector(model, &x);
    let t = beta.tr_mul(&g);
    let cfg = SystemConfig {
        users: model.layout.users,
        streams: model.layout.streams,
        tx_antennas: model.layout.tx_antennas,
        rx_antennas: model.layout.rx_antennas,
        tx_rf_chains: model.layout.tx_rf_chains,
        rx_rf_chains: model.layout.rx_rf_chains,
        total_power: 1.0,
        noise_power: 1.0,
    };
    decode_targets(&t, &cfg)
}

// ── Model serialization ─────────────────────────────────────────────────────

const MODEL_MAGIC: &[u8; 4] = b"ELMB";
const MODEL_VERSION: u32 = 1;

fn act_tag(a: Activation) -> (u8, f64) {
    match a {
        Activation::Sigmoid => (0, 0.0),
        Activation::PRelu(s) => (1, s),
    }
}

/// Writes the model in the `ELMB` binary format: magic, version, dims
/// `(L, N_I, N_o)`, activation tag plus parameter, lambda, then the input
/// weights, biases, and output weights as little-endian f64 row-major.
pub fn save_model(model: &ElmModel, path: &Path) -> Result<()> {
    let beta = model.output_weights.as_ref().ok_or(HbfError::Untrained)?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    for dim in [
        model.hidden_nodes() as u64,
        model.layout.input_len() as u64,
        model.layout.output_len() as u64,
    ] {
        w.write_all(&dim.to_le_bytes())?;
    }
    let (tag, param) = act_tag(model.activation);
    w.write_all(&[tag])?;
    w.write_all(&param.to_le_bytes())?;
    w.write_all(&model.lambda.to_le_bytes())?;
    write_row_major(&mut w, &model.input_weights)?;
    for v in model.biases.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    write_row_major(&mut w, beta)?;
    w.flush()?;
    Ok(())
}

fn write_row_major<W: Write>(w: &mut W, m: &RMat) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn exact(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        let start = self.offset;
        self.inner.read_exact(buf).map_err(|_| HbfError::Format {
            offset: start,
            message: format!("truncated while reading {what} ({} bytes expected)", buf.len()),
        })?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.exact(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.exact(&mut b, what)?;
        Ok(u64::from_le_bytes(b))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let mut b = [0u8; 8];
        self.exact(&mut b, what)?;
        Ok(f64::from_le_bytes(b))
    }

    fn f64_block(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let mut bytes = vec![0u8; n * 8];
        self.exact(&mut bytes, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }
}

/// Loads a model saved by [`save_model`]. The configuration rebuilds the
/// feature/target layout and must match the stored dimensions.
pub fn load_model(path: &Path, cfg: &SystemConfig) -> Result<ElmModel> {
    let file = std::fs::File::open(path)?;
    let mut r = Reader {
        inner: std::io::BufReader::new(file),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.exact(&mut magic, "magic")?;
    if &magic != MODEL_MAGIC {
        return Err(HbfError::Format {
            offset: 0,
            message: format!("bad magic {magic:?}, expected {MODEL_MAGIC:?}"),
        });
    }
    let version = r.u32("version")?;
    if version != MODEL_VERSION {
        return Err(HbfError::Format {
            offset: 4,
            message: format!("unsupported version {version}"),
        });
    }
    let l = r.u64("hidden node count")? as usize;
    let n_i = r.u64("input length")? as usize;
    let n_o = r.u64("output length")? as usize;
    let layout = TargetLayout::from_config(cfg);
    if n_i != layout.input_len() || n_o != layout.output_len() {
        return Err(HbfError::DimensionMismatch(format!(
            "model stores dims ({n_i}, {n_o}); configuration implies ({}, {})",
            layout.input_len(),
            layout.output_len()
        )));
    }
    let mut tag = [0u8; 1];
    r.exact(&mut tag, "activation tag")?;
    let param = r.f64("activation parameter")?;
    let activation = match tag[0] {
        0 => Activation::Sigmoid,
        1 => Activation::PRelu(param),
        t => {
            return Err(HbfError::Format {
                offset: r.offset - 9,
                message: format!("unknown activation tag {t}"),
            })
        }
    };
    let lambda = r.f64("lambda")?;
    let win = r.f64_block(l * n_i, "input weights")?;
    let biases = r.f64_block(l, "biases")?;
    let beta = r.f64_block(l * n_o, "output weights")?;
    Ok(ElmModel {
        input_weights: RMat::from_row_slice(l, n_i, &win),
        biases: RVec::from_vec(biases),
        output_weights: Some(RMat::from_row_slice(l, n_o, &beta)),
        activation,
        lambda,
        layout,
    })
}
