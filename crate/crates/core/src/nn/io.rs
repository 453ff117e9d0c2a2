//! Model persistence.
//!
//! Little-endian layout: magic `HDNN`, version `u16`, arch tag `u8`,
//! n_clicks `u16`, init tag (`u8` length + bytes), histogram spec
//! (n_bins `u32`, tau_min `f64`, tau_max `f64`), output dim `u8`, support
//! box (`f64` lo/hi per output), layer shapes (in `u32`, out `u32`,
//! activation `u8`), then per layer the weights and biases as `f32`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::histogram::HistogramSpec;
use crate::nn::model::{Activation, ArchKind, DenseLayer, HistDenseModel};

const MAGIC: &[u8; 4] = b"HDNN";
const VERSION: u16 = 1;

impl HistDenseModel {
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[match self.arch() {
            ArchKind::OneD => 1u8,
            ArchKind::TwoD => 2u8,
        }])?;
        w.write_all(&(self.n_clicks as u16).to_le_bytes())?;
        let tag = self.init_tag.as_bytes();
        if tag.len() > u8::MAX as usize {
            return Err(Error::Format("init tag too long".into()));
        }
        w.write_all(&[tag.len() as u8])?;
        w.write_all(tag)?;
        w.write_all(&(self.hist.n_bins as u32).to_le_bytes())?;
        w.write_all(&self.hist.tau_min.to_le_bytes())?;
        w.write_all(&self.hist.tau_max.to_le_bytes())?;
        w.write_all(&[self.output_dim as u8])?;
        for &(lo, hi) in &self.support {
            w.write_all(&lo.to_le_bytes())?;
            w.write_all(&hi.to_le_bytes())?;
        }
        w.write_all(&[self.layers.len() as u8])?;
        for layer in &self.layers {
            w.write_all(&(layer.in_dim as u32).to_le_bytes())?;
            w.write_all(&(layer.out_dim as u32).to_le_bytes())?;
            w.write_all(&[match layer.activation {
                Activation::Relu => 0u8,
                Activation::Linear => 1u8,
            }])?;
        }
        for layer in &self.layers {
            for &v in &layer.weights {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
            for &v in &layer.biases {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic bytes {magic:?}, not a histogram-dense model"
            )));
        }
        let version = read_u16(&mut r)?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported model format version {version}, expected {VERSION}"
            )));
        }
        let arch_tag = read_u8(&mut r)?;
        let n_clicks = read_u16(&mut r)? as usize;
        let tag_len = read_u8(&mut r)? as usize;
        let mut tag = vec![0u8; tag_len];
        r.read_exact(&mut tag)?;
        let init_tag = String::from_utf8(tag)
            .map_err(|_| Error::Format("init tag is not valid UTF-8".into()))?;
        let n_bins = read_u32(&mut r)? as usize;
        let tau_min = read_f64(&mut r)?;
        let tau_max = read_f64(&mut r)?;
        let output_dim = read_u8(&mut r)? as usize;
        if output_dim as u8 != arch_tag || !(output_dim == 1 || output_dim == 2) {
            return Err(Error::Format(format!(
                "inconsistent arch tag {arch_tag} / output dim {output_dim}"
            )));
        }
        let mut support = Vec::with_capacity(output_dim);
        for _ in 0..output_dim {
            support.push((read_f64(&mut r)?, read_f64(&mut r)?));
        }
        let n_layers = read_u8(&mut r)? as usize;
        let mut shapes = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let in_dim = read_u32(&mut r)? as usize;
            let out_dim = read_u32(&mut r)? as usize;
            let act = match read_u8(&mut r)? {
                0 => Activation::Relu,
                1 => Activation::Linear,
                a => return Err(Error::Format(format!("invalid activation tag {a}"))),
            };
            shapes.push((in_dim, out_dim, act));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for (in_dim, out_dim, activation) in shapes {
            let mut weights = vec![0.0f64; in_dim * out_dim];
            for v in &mut weights {
                *v = read_f32(&mut r)? as f64;
            }
            let mut biases = vec![0.0f64; out_dim];
            for v in &mut biases {
                *v = read_f32(&mut r)? as f64;
            }
            layers.push(DenseLayer { weights, biases, in_dim, out_dim, activation });
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after the last layer".into()));
        }
        let hist = HistogramSpec { n_bins, tau_min, tau_max };
        hist.validate()?;
        Ok(HistDenseModel { hist, layers, output_dim, n_clicks, support, init_tag })
    }
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32<R: Read>(r: &mut R) -> Result<f32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(f32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
