//! Multi-resolution min/max peak pyramid.
//!
//! Level 0 holds one `(min, max)` pair per `base_bucket` samples; each
//! following level folds adjacent pairs of the level below (lower index
//! first) until a level has at most two buckets. The pyramid is computed
//! once per media file and persisted as a sidecar so display never rescans
//! the samples.

use serde::{Deserialize, Serialize};

use super::{MediaError, PcmAudio};

pub const DEFAULT_BASE_BUCKET: u32 = 512;

/// Sidecar magic; the rest of the file is little-endian.
pub const SIDECAR_MAGIC: &[u8; 6] = b"SLAWF1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub min: f32,
    pub max: f32,
}

impl Peak {
    fn of(samples: &[f32]) -> Peak {
        let mut peak = Peak { min: samples[0], max: samples[0] };
        for &s in &samples[1..] {
            peak.min = peak.min.min(s);
            peak.max = peak.max.max(s);
        }
        peak
    }

    pub fn fold(self, other: Peak) -> Peak {
        Peak { min: self.min.min(other.min), max: self.max.max(other.max) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformCache {
    pub base_bucket: u32,
    pub sample_rate: u32,
    pub total_samples: u64,
    pub levels: Vec<Vec<Peak>>,
}

/// Number of pyramid levels for `total_samples` at `base_bucket`.
pub fn pyramid_level_count(total_samples: u64, base_bucket: u32) -> usize {
    let mut buckets = total_samples.div_ceil(base_bucket as u64);
    let mut levels = 1;
    while buckets > 2 {
        buckets = buckets.div_ceil(2);
        levels += 1;
    }
    levels
}

pub fn build_waveform_cache(pcm: &PcmAudio, base_bucket: u32) -> Result<WaveformCache, MediaError> {
    if base_bucket == 0 || !base_bucket.is_power_of_two() {
        return Err(MediaError::InvalidBucket(base_bucket));
    }
    if pcm.is_empty() {
        return Err(MediaError::Empty);
    }
    let mut levels = vec![pcm.samples().chunks(base_bucket as usize).map(Peak::of).collect::<Vec<_>>()];
    while levels.last().expect("level 0").len() > 2 {
        let below = levels.last().expect("level");
        let next = below
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.fold(*b),
                [a] => *a,
                _ => unreachable!("chunks(2)"),
            })
            .collect();
        levels.push(next);
    }
    Ok(WaveformCache {
        base_bucket,
        sample_rate: pcm.sample_rate(),
        total_samples: pcm.len() as u64,
        levels,
    })
}

/// Stored peaks `[from, from + count)` of a level; the range is clamped to
/// the buckets that exist.
pub fn query_peaks(cache: &WaveformCache, level: usize, from: usize, count: usize) -> Result<&[Peak], MediaError> {
    let peaks = cache
        .levels
        .get(level)
        .ok_or(MediaError::UnknownLevel { level, levels: cache.levels.len() })?;
    let start = from.min(peaks.len());
    let end = from.saturating_add(count).min(peaks.len());
    Ok(&peaks[start..end])
}

impl WaveformCache {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Samples covered by one bucket at `level`.
    pub fn bucket_samples(&self, level: usize) -> u64 {
        (self.base_bucket as u64) << level
    }

    pub fn to_sidecar(&self) -> Vec<u8> {
        let pairs: usize = self.levels.iter().map(Vec::len).sum();
        let mut out = Vec::with_capacity(26 + self.levels.len() * 8 + pairs * 8);
        out.extend_from_slice(SIDECAR_MAGIC);
        out.extend_from_slice(&self.sample_rate.to_le_bytes());
        out.extend_from_slice(&self.total_samples.to_le_bytes());
        out.extend_from_slice(&self.base_bucket.to_le_bytes());
        out.extend_from_slice(&(self.levels.len() as u32).to_le_bytes());
        for level in &self.levels {
            out.extend_from_slice(&(level.len() as u64).to_le_bytes());
            for peak in level {
                out.extend_from_slice(&peak.min.to_le_bytes());
                out.extend_from_slice(&peak.max.to_le_bytes());
            }
        }
        out
    }

    pub fn from_sidecar(bytes: &[u8]) -> Result<WaveformCache, MediaError> {
        let mut input = SidecarReader { bytes, pos: 0 };
        if input.take(6)? != SIDECAR_MAGIC {
            return Err(MediaError::Sidecar("bad magic".into()));
        }
        let sample_rate = input.u32()?;
        let total_samples = input.u64()?;
        let base_bucket = input.u32()?;
        let level_count = input.u32()? as usize;
        if base_bucket == 0 || !base_bucket.is_power_of_two() {
            return Err(MediaError::Sidecar(format!("base bucket {base_bucket}")));
        }
        if level_count != pyramid_level_count(total_samples, base_bucket) {
            return Err(MediaError::Sidecar(format!("level count {level_count} does not fit the pyramid")));
        }
        let mut levels = Vec::with_capacity(level_count);
        let mut expected = total_samples.div_ceil(base_bucket as u64);
        for level in 0..level_count {
            let count = input.u64()?;
            if count != expected {
                return Err(MediaError::Sidecar(format!("level {level} has {count} buckets, expected {expected}")));
            }
            let mut peaks = Vec::with_capacity(count as usize);
            for _ in 0..count {
                peaks.push(Peak { min: input.f32()?, max: input.f32()? });
            }
            levels.push(peaks);
            expected = expected.div_ceil(2);
        }
        if input.pos != bytes.len() {
            return Err(MediaError::Sidecar("trailing bytes".into()));
        }
        Ok(WaveformCache { base_bucket, sample_rate, total_samples, levels })
    }
}

struct SidecarReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> SidecarReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], MediaError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| MediaError::Sidecar("truncated".into()))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, MediaError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, MediaError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f32(&mut self) -> Result<f32, MediaError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}
