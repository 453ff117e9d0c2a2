//! Dataset persistence: little-endian binary format and CSV export.
//!
//! Binary layout (all little-endian):
//! magic `PCNT`, version `u16`, n_clicks `u16`, n_params `u8`, count `u64`,
//! seed `u64`, sigma_tau `f64`, sigma_y `f64`, generator `u8`, clip `u8`,
//! parameter box (`n_params == 1`: delta_lo, delta_hi, omega; `n_params == 2`:
//! delta_lo, delta_hi, omega_lo, omega_hi, all `f64`), then per record the
//! truth parameters followed by the delays as `f64`s.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::physics::SystemParams;
use crate::sim::{Dataset, DatasetMeta, DelayRecord, GeneratorKind, NoiseConfig, ParameterBox};

const MAGIC: &[u8; 4] = b"PCNT";
const VERSION: u16 = 1;

struct LeWriter<W: Write>(W);

impl<W: Write> LeWriter<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.0.write_all(&[v])?)
    }
    fn u16(&mut self, v: u16) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
}

struct LeReader<R: Read>(R);

impl<R: Read> LeReader<R> {
    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.0.read_exact(&mut b)?;
        Ok(b[0])
    }
    fn u16(&mut self) -> Result<u16> {
        let mut b = [0u8; 2];
        self.0.read_exact(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }
    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.0.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.0.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
}

impl Dataset {
    pub fn write_binary<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let meta = &self.meta;
        if self.records.len() != meta.count {
            return Err(Error::Format(format!(
                "metadata count {} does not match {} records",
                meta.count,
                self.records.len()
            )));
        }
        let n_params = meta.bounds.n_params();
        let mut w = LeWriter(BufWriter::new(File::create(path)?));
        w.0.write_all(MAGIC)?;
        w.u16(VERSION)?;
        w.u16(meta.n_clicks as u16)?;
        w.u8(n_params as u8)?;
        w.u64(meta.count as u64)?;
        w.u64(meta.seed)?;
        w.f64(meta.noise.sigma_tau)?;
        w.f64(meta.noise.sigma_y)?;
        w.u8(match meta.generator {
            GeneratorKind::Iid => 0,
            GeneratorKind::Euler => 1,
        })?;
        w.u8(meta.noise.clip_negative_delays as u8)?;
        match meta.bounds {
            ParameterBox::OneD { delta, omega } => {
                w.f64(delta.0)?;
                w.f64(delta.1)?;
                w.f64(omega)?;
            }
            ParameterBox::TwoD { delta, omega } => {
                w.f64(delta.0)?;
                w.f64(delta.1)?;
                w.f64(omega.0)?;
                w.f64(omega.1)?;
            }
        }
        for rec in &self.records {
            let truth = rec.truth.ok_or_else(|| {
                Error::Format("cannot persist a record without ground truth".into())
            })?;
            w.f64(truth.delta)?;
            if n_params == 2 {
                w.f64(truth.omega)?;
            }
            if rec.delays.len() != meta.n_clicks {
                return Err(Error::Format(format!(
                    "record has {} delays, expected {}",
                    rec.delays.len(),
                    meta.n_clicks
                )));
            }
            for &t in &rec.delays {
                w.f64(t)?;
            }
        }
        w.0.flush()?;
        Ok(())
    }

    pub fn read_binary<P: AsRef<Path>>(path: P) -> Result<Dataset> {
        let mut r = LeReader(BufReader::new(File::open(path)?));
        let mut magic = [0u8; 4];
        r.0.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic bytes {magic:?}, not a delay dataset"
            )));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported dataset format version {version}, expected {VERSION}"
            )));
        }
        let n_clicks = r.u16()? as usize;
        let n_params = r.u8()? as usize;
        if n_params != 1 && n_params != 2 {
            return Err(Error::Format(format!("invalid parameter count {n_params}")));
        }
        let count = r.u64()? as usize;
        let seed = r.u64()?;
        let sigma_tau = r.f64()?;
        let sigma_y = r.f64()?;
        let generator = match r.u8()? {
            0 => GeneratorKind::Iid,
            1 => GeneratorKind::Euler,
            g => return Err(Error::Format(format!("invalid generator tag {g}"))),
        };
        let clip = r.u8()? != 0;
        let bounds = if n_params == 1 {
            ParameterBox::OneD { delta: (r.f64()?, r.f64()?), omega: r.f64()? }
        } else {
            ParameterBox::TwoD { delta: (r.f64()?, r.f64()?), omega: (r.f64()?, r.f64()?) }
        };
        let fixed_omega = match bounds {
            ParameterBox::OneD { omega, .. } => Some(omega),
            ParameterBox::TwoD { .. } => None,
        };

        let mut records = Vec::with_capacity(count);
        for _ in 0..count {
            let delta = r.f64()?;
            let omega = if n_params == 2 { r.f64()? } else { fixed_omega.unwrap() };
            let mut delays = Vec::with_capacity(n_clicks);
            for _ in 0..n_clicks {
                delays.push(r.f64()?);
            }
            records.push(DelayRecord {
                delays,
                truth: Some(SystemParams { delta, omega, gamma: 1.0 }),
            });
        }
        let mut trailing = [0u8; 1];
        if r.0.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after the last record".into()));
        }
        Ok(Dataset {
            records,
            meta: DatasetMeta {
                n_clicks,
                bounds,
                count,
                seed,
                generator,
                noise: NoiseConfig { sigma_tau, sigma_y, clip_negative_delays: clip },
            },
        })
    }

    /// CSV export: header row, then one record per row (truth parameters
    /// followed by the delays).
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let n_params = self.meta.bounds.n_params();
        let mut out = BufWriter::new(File::create(path)?);
        let mut header = if n_params == 2 {
            "delta,omega".to_string()
        } else {
            "delta".to_string()
        };
        for k in 1..=self.meta.n_clicks {
            header.push_str(&format!(",tau_{k}"));
        }
        writeln!(out, "{header}")?;
        for rec in &self.records {
            let truth = rec.truth.ok_or_else(|| {
                Error::Format("cannot export a record without ground truth".into())
            })?;
            let mut row = format!("{}", truth.delta);
            if n_params == 2 {
                row.push_str(&format!(",{}", truth.omega));
            }
            for &t in &rec.delays {
                row.push_str(&format!(",{t}"));
            }
            writeln!(out, "{row}")?;
        }
        out.flush()?;
        Ok(())
    }
}
