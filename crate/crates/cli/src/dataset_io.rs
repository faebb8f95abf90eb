//! Binary persistence for training datasets.
//!
//! Format (all integers and floats little-endian):
//! magic `HBFD`, version u32, system block (six u64 dims, power and noise
//! f64), channel block (clusters, rays u64; spread f64; grids u64 x 4;
//! spacing f64), seed/counts block (base_seed, realizations, noisy copies
//! u64), SNR_Train list (length-prefixed f64), row/column counts (u64 x 3),
//! then the feature and target matrices as row-major f64. Reads are
//! bit-exact inverses of writes.

use std::io::{Read, Write};
use std::path::Path;

use hbf_core::channel::{ChannelModelParams, SystemConfig};
use hbf_core::elm::{DatasetMeta, TrainingDataset};
use hbf_core::error::{HbfError, Result};
use hbf_core::numerics::RMat;

const MAGIC: &[u8; 4] = b"HBFD";
const VERSION: u32 = 1;

pub fn write_dataset(path: &Path, d: &TrainingDataset) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let sys = &d.meta.system;
    for v in [
        sys.users,
        sys.streams,
        sys.tx_antennas,
        sys.rx_antennas,
        sys.tx_rf_chains,
        sys.rx_rf_chains,
    ] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    w.write_all(&sys.total_power.to_le_bytes())?;
    w.write_all(&sys.noise_power.to_le_bytes())?;
    let ch = &d.meta.channel;
    w.write_all(&(ch.clusters as u64).to_le_bytes())?;
    w.write_all(&(ch.rays_per_cluster as u64).to_le_bytes())?;
    w.write_all(&ch.angle_spread_deg.to_le_bytes())?;
    for v in [ch.tx_grid.0, ch.tx_grid.1, ch.rx_grid.0, ch.rx_grid.1] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    w.write_all(&ch.spacing_wavelengths.to_le_bytes())?;
    w.write_all(&d.meta.base_seed.to_le_bytes())?;
    w.write_all(&(d.meta.realizations as u64).to_le_bytes())?;
    w.write_all(&(d.meta.noisy_per_realization as u64).to_le_bytes())?;
    w.write_all(&(d.meta.snr_train_db.len() as u64).to_le_bytes())?;
    for v in &d.meta.snr_train_db {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [d.features.nrows(), d.features.ncols(), d.targets.ncols()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for m in [&d.features, &d.targets] {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w.write_all(&m[(i, j)].to_le_bytes())?;
            }
        }
    }
    w.flush()?;
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
            message: format!(
                "truncated while reading {what}: expected {} more bytes",
                buf.len()
            ),
        })?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.exact(&mut b, what)?;
        Ok(u64::from_le_bytes(b))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        Ok(self.u64(what)? as usize)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let mut b = [0u8; 8];
        self.exact(&mut b, what)?;
        Ok(f64::from_le_bytes(b))
    }

    fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<RMat> {
        let mut bytes = vec![0u8; rows * cols * 8];
        self.exact(&mut bytes, what)?;
        let data: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(RMat::from_row_slice(rows, cols, &data))
    }
}

pub fn read_dataset(path: &Path) -> Result<TrainingDataset> {
    let file = std::fs::File::open(path)?;
    let mut r = Reader {
        inner: std::io::BufReader::new(file),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.exact(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(HbfError::Format {
            offset: 0,
            message: format!("bad magic {magic:?}, expected {MAGIC:?}"),
        });
    }
    let mut vb = [0u8; 4];
    r.exact(&mut vb, "version")?;
    let version = u32::from_le_bytes(vb);
    if version != VERSION {
        return Err(HbfError::Format {
            offset: 4,
            message: format!("unsupported version {version}"),
        });
    }
    let system = SystemConfig {
        users: r.usize("users")?,
        streams: r.usize("streams")?,
        tx_antennas: r.usize("tx_antennas")?,
        rx_antennas: r.usize("rx_antennas")?,
        tx_rf_chains: r.usize("tx_rf_chains")?,
        rx_rf_chains: r.usize("rx_rf_chains")?,
        total_power: r.f64("total_power")?,
        noise_power: r.f64("noise_power")?,
    };
    let channel = ChannelModelParams {
        clusters: r.usize("clusters")?,
        rays_per_cluster: r.usize("rays_per_cluster")?,
        angle_spread_deg: r.f64("angle_spread_deg")?,
        tx_grid: (r.usize("tx_grid rows")?, r.usize("tx_grid cols")?),
        rx_grid: (r.usize("rx_grid rows")?, r.usize("rx_grid cols")?),
        spacing_wavelengths: r.f64("spacing_wavelengths")?,
    };
    let base_seed = r.u64("base_seed")?;
    let realizations = r.usize("realizations")?;
    let noisy_per_realization = r.usize("noisy_per_realization")?;
    let n_snr = r.usize("snr list length")?;
    let mut snr_train_db = Vec::with_capacity(n_snr);
    for _ in 0..n_snr {
        snr_train_db.push(r.f64("snr value")?);
    }
    let n_rows = r.usize("row count")?;
    let n_i = r.usize("feature width")?;
    let n_o = r.usize("target width")?;
    let features = r.matrix(n_rows, n_i, "feature matrix")?;
    let targets = r.matrix(n_rows, n_o, "target matrix")?;
    Ok(TrainingDataset {
        features,
        targets,
        meta: DatasetMeta {
            system,
            channel,
            base_seed,
            snr_train_db,
            realizations,
            noisy_per_realization,
        },
    })
}
