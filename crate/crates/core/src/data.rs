//! Spike-count datasets: container, SPK1 files, channel binning, synthetic
//! generators and stratified splitting.
//!
//! SPK1 layout (little-endian):
//!
//! ```text
//! magic "SPK1" | u32 version = 1 | u32 N | u32 T | u32 C | u32 num_classes
//! N × ( u16 label | T·C × u16 counts, time-major )
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::error::{Error, FormatError, Result};
use crate::numerics::{Rng, Tensor};

pub const SPK1_MAGIC: [u8; 4] = *b"SPK1";
pub const SPK1_VERSION: u32 = 1;

/// `N` samples of `[T × C]` non-negative integer spike counts with labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeDataset {
    pub name: String,
    pub timesteps: usize,
    pub channels: usize,
    pub num_classes: usize,
    samples: Vec<Tensor>,
    labels: Vec<usize>,
}

impl SpikeDataset {
    pub fn new(
        name: impl Into<String>,
        timesteps: usize,
        channels: usize,
        num_classes: usize,
        samples: Vec<Tensor>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} samples but {} labels",
                samples.len(),
                labels.len()
            )));
        }
        for (i, (s, &l)) in samples.iter().zip(&labels).enumerate() {
            if s.shape() != [timesteps, channels] {
                return Err(Error::shape(format!(
                    "sample {i} has shape {:?}, expected [{timesteps}, {channels}]",
                    s.shape()
                )));
            }
            if l >= num_classes {
                return Err(Error::invalid(format!(
                    "sample {i} label {l} outside 0..{num_classes}"
                )));
            }
            if s.data().iter().any(|&c| !(c >= 0.0) || c.fract() != 0.0) {
                return Err(Error::invalid(format!(
                    "sample {i} holds a negative or fractional count"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            timesteps,
            channels,
            num_classes,
            samples,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, i: usize) -> &Tensor {
        &self.samples[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn samples(&self) -> &[Tensor] {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn total_count(&self) -> f64 {
        self.samples.iter().flat_map(|s| s.data()).sum()
    }

    /// Sub-dataset of the given sample indices, in the given order.
    pub fn select(&self, indices: &[usize], name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            timesteps: self.timesteps,
            channels: self.channels,
            num_classes: self.num_classes,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// One-line metadata summary.
    pub fn summary(&self) -> String {
        format!(
            "{}: N={} T={} C={} classes={} total_count={}",
            self.name,
            self.len(),
            self.timesteps,
            self.channels,
            self.num_classes,
            self.total_count()
        )
    }

    /// Sums each run of `factor` consecutive channels.
    pub fn bin_channels(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.channels.is_multiple_of(factor) {
            return Err(Error::invalid(format!(
                "cannot bin {} channels by a factor of {factor}",
                self.channels
            )));
        }
        let out_c = self.channels / factor;
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let mut out = vec![0.0; self.timesteps * out_c];
                for t in 0..self.timesteps {
                    let row = &s.data()[t * self.channels..(t + 1) * self.channels];
                    for (o, chunk) in out[t * out_c..(t + 1) * out_c]
                        .iter_mut()
                        .zip(row.chunks_exact(factor))
                    {
                        *o = chunk.iter().sum();
                    }
                }
                Tensor::new(vec![self.timesteps, out_c], out).expect("sized above")
            })
            .collect();
        Ok(Self {
            name: self.name.clone(),
            timesteps: self.timesteps,
            channels: out_c,
            num_classes: self.num_classes,
            samples,
            labels: self.labels.clone(),
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = Writer::default();
        w.bytes(&SPK1_MAGIC);
        w.u32(SPK1_VERSION);
        for v in [self.len(), self.timesteps, self.channels, self.num_classes] {
            w.u32(u32::try_from(v).map_err(|_| Error::invalid("dimension exceeds u32"))?);
        }
        for (s, &l) in self.samples.iter().zip(&self.labels) {
            w.u16(u16::try_from(l).map_err(|_| Error::invalid("label exceeds u16"))?);
            for &c in s.data() {
                if c > u16::MAX as f64 {
                    return Err(Error::invalid(format!("count {c} exceeds u16")));
                }
                w.u16(c as u16);
            }
        }
        Ok(w.buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, FormatError> {
        let mut r = Reader::new(bytes);
        r.magic(SPK1_MAGIC)?;
        let version = r.u32()?;
        if version != SPK1_VERSION {
            return Err(FormatError::Version {
                expected: SPK1_VERSION,
                found: version,
            });
        }
        let n = r.u32()? as usize;
        let timesteps = r.u32()? as usize;
        let channels = r.u32()? as usize;
        let num_classes = r.u32()? as usize;
        let frame = timesteps
            .checked_mul(channels)
            .ok_or_else(crate::binio::too_large)?;
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let label = r.u16()? as usize;
            if label >= num_classes {
                return Err(FormatError::Malformed(format!(
                    "label {label} outside 0..{num_classes}"
                )));
            }
            let raw = r.take(frame.checked_mul(2).ok_or_else(crate::binio::too_large)?)?;
            let data = raw
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]) as f64)
                .collect();
            samples.push(Tensor::new(vec![timesteps, channels], data).expect("sized above"));
            labels.push(label);
        }
        r.finish()?;
        Ok(Self {
            name: String::from("spk1"),
            timesteps,
            channels,
            num_classes,
            samples,
            labels,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        let mut ds = Self::from_bytes(&bytes)?;
        if let Some(stem) = path.file_stem() {
            ds.name = stem.to_string_lossy().into_owned();
        }
        Ok(ds)
    }

    /// Disjoint, label-stratified `(train, val, test)` split.
    ///
    /// Per class with `n` samples, train gets `round(f₀·n)`, validation
    /// `round(f₁·n)` (capped by what is left) and test the rest.
    pub fn split(&self, fractions: [f64; 3], rng: &mut Rng) -> Result<(Self, Self, Self)> {
        if fractions.iter().any(|&f| !(0.0..=1.0).contains(&f))
            || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::invalid(format!(
                "split fractions {fractions:?} must be in [0, 1] and sum to 1"
            )));
        }
        let mut parts: [Vec<usize>; 3] = Default::default();
        for class in 0..self.num_classes {
            let mut idx: Vec<usize> = (0..self.len())
                .filter(|&i| self.labels[i] == class)
                .collect();
            rng.shuffle(&mut idx);
            let n = idx.len();
            let n_train = ((fractions[0] * n as f64).round() as usize).min(n);
            let n_val = ((fractions[1] * n as f64).round() as usize).min(n - n_train);
            parts[0].extend_from_slice(&idx[..n_train]);
            parts[1].extend_from_slice(&idx[n_train..n_train + n_val]);
            parts[2].extend_from_slice(&idx[n_train + n_val..]);
        }
        for p in &mut parts {
            p.sort_unstable();
        }
        Ok((
            self.select(&parts[0], format!("{}/train", self.name)),
            self.select(&parts[1], format!("{}/val", self.name)),
            self.select(&parts[2], format!("{}/test", self.name)),
        ))
    }
}

/// Parameters of the synthetic spectro-temporal pattern task.
///
/// Each class owns a rate template `[T × C]`: a background of
/// `0.2·base_rate` plus a few Gaussian blobs in the (time, channel) plane
/// scaled by `base_rate`. A sample multiplies every template entry by a gain
/// `max(0, 1 + jitter·N(0,1))` and draws Poisson counts from the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternTask {
    #[serde(default = "PatternTask::default_classes")]
    pub classes: usize,
    #[serde(default = "PatternTask::default_timesteps")]
    pub timesteps: usize,
    #[serde(default = "PatternTask::default_channels")]
    pub channels: usize,
    #[serde(default = "PatternTask::default_samples_per_class")]
    pub samples_per_class: usize,
    #[serde(default = "PatternTask::default_base_rate")]
    pub base_rate: f64,
    #[serde(default = "PatternTask::default_jitter")]
    pub jitter: f64,
    #[serde(default = "PatternTask::default_blobs")]
    pub blobs: usize,
}

impl PatternTask {
    fn default_classes() -> usize {
        10
    }
    fn default_timesteps() -> usize {
        50
    }
    fn default_channels() -> usize {
        40
    }
    fn default_samples_per_class() -> usize {
        60
    }
    fn default_base_rate() -> f64 {
        0.5
    }
    fn default_jitter() -> f64 {
        0.3
    }
    fn default_blobs() -> usize {
        3
    }
}

impl Default for PatternTask {
    fn default() -> Self {
        Self {
            classes: Self::default_classes(),
            timesteps: Self::default_timesteps(),
            channels: Self::default_channels(),
            samples_per_class: Self::default_samples_per_class(),
            base_rate: Self::default_base_rate(),
            jitter: Self::default_jitter(),
            blobs: Self::default_blobs(),
        }
    }
}

/// Rate templates of the pattern task, one `[T × C]` tensor per class.
pub fn pattern_templates(rng: &mut Rng, task: &PatternTask) -> Result<Vec<Tensor>> {
    let (t_len, c_len) = (task.timesteps, task.channels);
    if task.classes == 0 || t_len == 0 || c_len == 0 {
        return Err(Error::invalid("pattern task needs K, T, C > 0"));
    }
    if !(task.base_rate >= 0.0) || !(task.jitter >= 0.0) {
        return Err(Error::invalid("base_rate and jitter must be >= 0"));
    }
    let sigma_t = (t_len as f64 / 8.0).max(1.0);
    let sigma_c = (c_len as f64 / 10.0).max(1.0);
    let mut templates = Vec::with_capacity(task.classes);
    for _ in 0..task.classes {
        let blobs: Vec<(f64, f64, f64)> = (0..task.blobs)
            .map(|_| {
                (
                    rng.uniform_in(0.0, t_len as f64),
                    rng.uniform_in(0.0, c_len as f64),
                    rng.uniform_in(0.5, 1.5),
                )
            })
            .collect();
        let mut data = vec![0.0; t_len * c_len];
        for t in 0..t_len {
            for c in 0..c_len {
                let bump: f64 = blobs
                    .iter()
                    .map(|&(t0, c0, a)| {
                        let dt = (t as f64 - t0) / sigma_t;
                        let dc = (c as f64 - c0) / sigma_c;
                        a * (-0.5 * (dt * dt + dc * dc)).exp()
                    })
                    .sum();
                data[t * c_len + c] = task.base_rate * (0.2 + bump);
            }
        }
        templates.push(Tensor::new(vec![t_len, c_len], data)?);
    }
    Ok(templates)
}

/// Samples the pattern task; templates are drawn first from the same `rng`.
pub fn gen_pattern_task(rng: &mut Rng, task: &PatternTask) -> Result<SpikeDataset> {
    let templates = pattern_templates(rng, task)?;
    let mut samples = Vec::with_capacity(task.classes * task.samples_per_class);
    let mut labels = Vec::with_capacity(samples.capacity());
    for _ in 0..task.samples_per_class {
        for (class, template) in templates.iter().enumerate() {
            let data = template
                .data()
                .iter()
                .map(|&rate| {
                    let gain = if task.jitter > 0.0 {
                        (1.0 + task.jitter * rng.normal()).max(0.0)
                    } else {
                        1.0
                    };
                    rng.poisson(rate * gain) as f64
                })
                .collect();
            samples.push(Tensor::new(template.shape().to_vec(), data)?);
            labels.push(class);
        }
    }
    SpikeDataset::new(
        "pattern",
        task.timesteps,
        task.channels,
        task.classes,
        samples,
        labels,
    )
}

/// Synthetic glyph images for the sequential-pixel task.
///
/// Each class is a random stroke glyph on an `H × W` binary grid; samples
/// flip each pixel independently with probability `flip_prob`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlyphTask {
    #[serde(default = "GlyphTask::default_classes")]
    pub classes: usize,
    #[serde(default = "GlyphTask::default_side")]
    pub height: usize,
    #[serde(default = "GlyphTask::default_side")]
    pub width: usize,
    #[serde(default = "GlyphTask::default_samples_per_class")]
    pub samples_per_class: usize,
    #[serde(default = "GlyphTask::default_flip_prob")]
    pub flip_prob: f64,
    /// `None` keeps raster order.
    #[serde(default)]
    pub permutation_seed: Option<u64>,
}

impl GlyphTask {
    fn default_classes() -> usize {
        10
    }
    fn default_side() -> usize {
        8
    }
    fn default_samples_per_class() -> usize {
        40
    }
    fn default_flip_prob() -> f64 {
        0.05
    }
}

impl Default for GlyphTask {
    fn default() -> Self {
        Self {
            classes: Self::default_classes(),
            height: Self::default_side(),
            width: Self::default_side(),
            samples_per_class: Self::default_samples_per_class(),
            flip_prob: Self::default_flip_prob(),
            permutation_seed: Some(0),
        }
    }
}

/// Generates `(images, labels)`; each image is `[H × W]` with 0/1 pixels.
pub fn gen_glyphs(rng: &mut Rng, task: &GlyphTask) -> Result<(Vec<Tensor>, Vec<usize>)> {
    let (h, w) = (task.height, task.width);
    if h == 0 || w == 0 || task.classes == 0 {
        return Err(Error::invalid(
            "glyph task needs classes, height, width > 0",
        ));
    }
    let prototypes: Vec<Vec<f64>> = (0..task.classes)
        .map(|_| {
            let mut img = vec![0.0; h * w];
            // three random-walk strokes
            for _ in 0..3 {
                let (mut r, mut c) = (rng.below(h), rng.below(w));
                for _ in 0..(h + w) / 2 {
                    img[r * w + c] = 1.0;
                    match rng.below(4) {
                        0 => r = (r + 1).min(h - 1),
                        1 => r = r.saturating_sub(1),
                        2 => c = (c + 1).min(w - 1),
                        _ => c = c.saturating_sub(1),
                    }
                }
            }
            img
        })
        .collect();
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..task.samples_per_class {
        for (class, proto) in prototypes.iter().enumerate() {
            let img = proto
                .iter()
                .map(|&p| {
                    if rng.uniform() < task.flip_prob {
                        1.0 - p
                    } else {
                        p
                    }
                })
                .collect();
            images.push(Tensor::new(vec![h, w], img)?);
            labels.push(class);
        }
    }
    Ok((images, labels))
}

/// A permutation of `0..n`; `order[k]` is the source position of output step `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        Rng::new(seed).shuffle(&mut order);
        Self { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.order.len()];
        for (k, &src) in self.order.iter().enumerate() {
            inv[src] = k;
        }
        Self { order: inv }
    }

    pub fn apply<T: Copy>(&self, seq: &[T]) -> Vec<T> {
        self.order.iter().map(|&i| seq[i]).collect()
    }
}

/// Flattens each image into a `[H·W × 1]` sequence and permutes its time axis.
pub fn gen_sequential_pixels(
    images: &[Tensor],
    labels: &[usize],
    num_classes: usize,
    permutation_seed: Option<u64>,
) -> Result<SpikeDataset> {
    let steps = images.first().map_or(0, Tensor::len);
    let perm = match permutation_seed {
        Some(seed) => Permutation::random(steps, seed),
        None => Permutation::identity(steps),
    };
    let samples = images
        .iter()
        .map(|img| {
            if img.len() != steps {
                return Err(Error::shape("glyph images differ in size"));
            }
            Tensor::new(vec![steps, 1], perm.apply(img.data()))
        })
        .collect::<Result<Vec<_>>>()?;
    let name = if permutation_seed.is_some() {
        "psglyph"
    } else {
        "sglyph"
    };
    SpikeDataset::new(name, steps, 1, num_classes, samples, labels.to_vec())
}

/// Where a run's dataset comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Pattern(PatternTask),
    SeqPixels(GlyphTask),
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// Generator and split seed.
    #[serde(default)]
    pub seed: u64,
    /// Channel binning factor applied after loading.
    #[serde(default = "default_bin")]
    pub bin: usize,
    #[serde(default = "default_split")]
    pub split: [f64; 3],
}

fn default_bin() -> usize {
    1
}

fn default_split() -> [f64; 3] {
    [0.6, 0.2, 0.2]
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Pattern(PatternTask::default()),
            seed: 0,
            bin: 1,
            split: default_split(),
        }
    }
}

/// Train/validation/test partition of one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: SpikeDataset,
    pub val: SpikeDataset,
    pub test: SpikeDataset,
}

const GEN_STREAM: u64 = 1;
const SPLIT_STREAM: u64 = 2;

impl DataConfig {
    /// Generates or loads the full dataset, binned.
    pub fn dataset(&self) -> Result<SpikeDataset> {
        let mut rng = Rng::derive(self.seed, GEN_STREAM);
        let ds = match &self.source {
            DataSource::Pattern(task) => gen_pattern_task(&mut rng, task)?,
            DataSource::SeqPixels(task) => {
                let (images, labels) = gen_glyphs(&mut rng, task)?;
                gen_sequential_pixels(&images, &labels, task.classes, task.permutation_seed)?
            }
            DataSource::File { path } => SpikeDataset::load(path)?,
        };
        if self.bin == 1 {
            Ok(ds)
        } else {
            ds.bin_channels(self.bin)
        }
    }

    pub fn splits(&self) -> Result<Splits> {
        let ds = self.dataset()?;
        let (train, val, test) = ds.split(self.split, &mut Rng::derive(self.seed, SPLIT_STREAM))?;
        Ok(Splits { train, val, test })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SpikeDataset {
        let task = PatternTask {
            classes: 3,
            timesteps: 6,
            channels: 10,
            samples_per_class: 7,
            ..PatternTask::default()
        };
        gen_pattern_task(&mut Rng::new(seed), &task).unwrap()
    }

    #[test]
    fn binning_700_by_5() {
        let task = PatternTask {
            classes: 2,
            timesteps: 3,
            channels: 700,
            samples_per_class: 2,
            ..PatternTask::default()
        };
        let ds = gen_pattern_task(&mut Rng::new(1), &task).unwrap();
        let binned = ds.bin_channels(5).unwrap();
        assert_eq!(binned.channels, 140);
        for (a, b) in ds.samples().iter().zip(binned.samples()) {
            for t in 0..3 {
                let before: f64 = a.data()[t * 700..(t + 1) * 700].iter().sum();
                let after: f64 = b.data()[t * 140..(t + 1) * 140].iter().sum();
                assert_eq!(before, after);
            }
        }
        assert_eq!(ds.bin_channels(1).unwrap(), ds);
        assert!(ds.bin_channels(3).is_err());
        assert!(ds.bin_channels(0).is_err());
    }

    #[test]
    fn zero_rate_gives_empty_samples() {
        let task = PatternTask {
            base_rate: 0.0,
            jitter: 0.0,
            samples_per_class: 3,
            ..PatternTask::default()
        };
        let ds = gen_pattern_task(&mut Rng::new(3), &task).unwrap();
        assert_eq!(ds.total_count(), 0.0);
        assert_eq!(ds.len(), 30);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(small(5), small(5));
        assert_ne!(small(5), small(6));
        let t = GlyphTask::default();
        let a = gen_glyphs(&mut Rng::new(2), &t).unwrap();
        let b = gen_glyphs(&mut Rng::new(2), &t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sequential_pixels_permutation() {
        let task = GlyphTask {
            samples_per_class: 2,
            ..GlyphTask::default()
        };
        let (images, labels) = gen_glyphs(&mut Rng::new(9), &task).unwrap();
        let raster = gen_sequential_pixels(&images, &labels, 10, None).unwrap();
        assert_eq!((raster.timesteps, raster.channels), (64, 1));
        for (img, s) in images.iter().zip(raster.samples()) {
            assert_eq!(img.data(), s.data());
        }
        let perm = Permutation::random(64, 77);
        let permuted = gen_sequential_pixels(&images, &labels, 10, Some(77)).unwrap();
        for (img, s) in images.iter().zip(permuted.samples()) {
            assert_eq!(s.data(), perm.apply(img.data()).as_slice());
            assert_eq!(perm.inverse().apply(s.data()), img.data());
        }
        assert_ne!(perm, Permutation::identity(64));
    }

    #[test]
    fn permutation_inverse_restores() {
        let p = Permutation::random(100, 3);
        let seq: Vec<usize> = (0..100).map(|i| i * 7 % 13).collect();
        assert_eq!(p.inverse().apply(&p.apply(&seq)), seq);
        assert_eq!(p.apply(&p.inverse().apply(&seq)), seq);
    }

    #[test]
    fn spk1_round_trip_and_errors() {
        let ds = small(1);
        let bytes = ds.to_bytes().unwrap();
        assert_eq!(bytes.len(), 24 + ds.len() * (2 + 2 * 60));
        let back = SpikeDataset::from_bytes(&bytes).unwrap();
        assert_eq!(back.samples(), ds.samples());
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.to_bytes().unwrap(), bytes);

        assert!(matches!(
            SpikeDataset::from_bytes(&bytes[..bytes.len() - 3]),
            Err(FormatError::Truncated { .. })
        ));
        let mut bad = bytes.clone();
        bad[3] = b'2';
        assert!(matches!(
            SpikeDataset::from_bytes(&bad),
            Err(FormatError::BadMagic { .. })
        ));
        let mut bad = bytes;
        bad[4] = 2;
        assert!(matches!(
            SpikeDataset::from_bytes(&bad),
            Err(FormatError::Version { found: 2, .. })
        ));
    }

    #[test]
    fn empty_dataset_round_trips() {
        let ds = SpikeDataset::new("empty", 4, 3, 2, vec![], vec![]).unwrap();
        let back = SpikeDataset::from_bytes(&ds.to_bytes().unwrap()).unwrap();
        assert_eq!(back.len(), 0);
        assert_eq!((back.timesteps, back.channels, back.num_classes), (4, 3, 2));
    }

    #[test]
    fn constructor_validates() {
        let s = Tensor::zeros(&[2, 2]);
        assert!(SpikeDataset::new("x", 2, 2, 2, vec![s.clone()], vec![2]).is_err());
        assert!(SpikeDataset::new("x", 2, 3, 2, vec![s.clone()], vec![0]).is_err());
        let neg = Tensor::new(vec![2, 2], vec![0.0, -1.0, 0.0, 0.0]).unwrap();
        assert!(SpikeDataset::new("x", 2, 2, 2, vec![neg], vec![0]).is_err());
        let frac = Tensor::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!(SpikeDataset::new("x", 2, 2, 2, vec![frac], vec![0]).is_err());
    }

    #[test]
    fn split_properties() {
        let ds = small(4);
        let (tr, va, te) = ds.split([1.0, 0.0, 0.0], &mut Rng::new(1)).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (ds.len(), 0, 0));
        assert!(ds.split([0.5, 0.4, 0.2], &mut Rng::new(1)).is_err());

        let fr = [0.6, 0.2, 0.2];
        let (tr, va, te) = ds.split(fr, &mut Rng::new(8)).unwrap();
        let mut all: Vec<&Tensor> = tr
            .samples()
            .iter()
            .chain(va.samples())
            .chain(te.samples())
            .collect();
        assert_eq!(all.len(), ds.len());
        // partition: every original sample appears exactly once
        for s in ds.samples() {
            let pos = all.iter().position(|x| *x == s).expect("sample present");
            all.swap_remove(pos);
        }
        // stratification within ±1 of the ideal per class
        let per_class = ds.class_counts();
        for (part, f) in [&tr, &va, &te].iter().zip(fr) {
            for (c, &n) in part.class_counts().iter().enumerate() {
                let ideal = f * per_class[c] as f64;
                assert!((n as f64 - ideal).abs() <= 1.0, "class {c}: {n} vs {ideal}");
            }
        }
        assert_eq!(ds.split(fr, &mut Rng::new(8)).unwrap(), (tr, va, te));
    }
}
