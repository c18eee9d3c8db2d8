//! Media handling for transcription: PCM decoding, precomputed waveform
//! peak pyramids, loop playback regions and timed excerpts.

mod loops;
mod waveform;

use std::io::Cursor;

use serde::Serialize;
use thiserror::Error;

use crate::span::TimeSpan;

pub use loops::{advance_loop, create_loop, set_loop, LoopError, LoopState, LoopUpdate};
pub use waveform::{
    build_waveform_cache, pyramid_level_count, query_peaks, Peak, WaveformCache, DEFAULT_BASE_BUCKET,
    SIDECAR_MAGIC,
};

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("unsupported audio: {0}")]
    Unsupported(String),
    #[error("truncated or malformed WAV container: {0}")]
    Truncated(String),
    #[error("audio contains no samples")]
    Empty,
    #[error("base bucket {0} must be a non-zero power of two")]
    InvalidBucket(u32),
    #[error("waveform level {level} does not exist ({levels} levels)")]
    UnknownLevel { level: usize, levels: usize },
    #[error("span {span} lies outside the {duration_ms} ms of media")]
    SpanOutOfBounds { span: TimeSpan, duration_ms: u64 },
    #[error("malformed waveform sidecar: {0}")]
    Sidecar(String),
}

/// Mono PCM audio normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcmAudio {
    sample_rate: u32,
    samples: Vec<f32>,
}

impl PcmAudio {
    /// Samples outside `[-1, 1]` are clamped.
    pub fn new(sample_rate: u32, mut samples: Vec<f32>) -> Result<Self, MediaError> {
        if sample_rate == 0 {
            return Err(MediaError::Unsupported("sample rate 0".into()));
        }
        for s in &mut samples {
            *s = if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) };
        }
        Ok(Self { sample_rate, samples })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `floor(1000 · len / sample_rate)`.
    pub fn duration_ms(&self) -> u64 {
        (self.samples.len() as u64 * 1000) / self.sample_rate as u64
    }

    /// First sample at or after `ms`.
    fn sample_index(&self, ms: u64) -> usize {
        ((ms as u128 * self.sample_rate as u128) / 1000) as usize
    }
}

/// Decodes a RIFF/WAVE file holding 8- or 16-bit integer PCM in one or two
/// channels. Stereo is mixed down by averaging.
pub fn decode_wav(bytes: &[u8]) -> Result<PcmAudio, MediaError> {
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(|e| match e {
        hound::Error::IoError(io) => MediaError::Truncated(io.to_string()),
        hound::Error::FormatError(msg) => MediaError::Truncated(msg.to_string()),
        other => MediaError::Unsupported(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(MediaError::Unsupported("floating-point samples".into()));
    }
    let scale = match spec.bits_per_sample {
        8 => 128.0,
        16 => 32768.0,
        bits => return Err(MediaError::Unsupported(format!("{bits}-bit samples"))),
    };
    if !(1..=2).contains(&spec.channels) {
        return Err(MediaError::Unsupported(format!("{} channels", spec.channels)));
    }
    let raw: Vec<i16> = reader
        .into_samples::<i16>()
        .collect::<Result<_, _>>()
        .map_err(|e| MediaError::Truncated(e.to_string()))?;
    let samples = match spec.channels {
        1 => raw.iter().map(|&s| s as f32 / scale).collect(),
        _ => raw
            .chunks_exact(2)
            .map(|pair| (pair[0] as f32 / scale + pair[1] as f32 / scale) / 2.0)
            .collect(),
    };
    PcmAudio::new(spec.sample_rate, samples)
}

/// Encodes mono 16-bit PCM WAV.
pub fn encode_wav(pcm: &PcmAudio) -> Vec<u8> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: pcm.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer = hound::WavWriter::new(&mut cursor, spec).expect("in-memory writer");
        for &s in &pcm.samples {
            let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(q).expect("in-memory write");
        }
        writer.finalize().expect("in-memory finalize");
    }
    cursor.into_inner()
}

/// A slice of the observational record together with the span it covers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excerpt {
    pub span: TimeSpan,
    pub audio: PcmAudio,
}

/// Cuts `[floor(start·rate/1000), floor(end·rate/1000))`. A span ending at
/// the media duration runs to the last sample.
pub fn excerpt(pcm: &PcmAudio, span: TimeSpan) -> Result<Excerpt, MediaError> {
    let duration_ms = pcm.duration_ms();
    if span.end_ms() > duration_ms {
        return Err(MediaError::SpanOutOfBounds { span, duration_ms });
    }
    let from = pcm.sample_index(span.start_ms());
    let to = match span.end_ms() == duration_ms {
        true => pcm.len(),
        false => pcm.sample_index(span.end_ms()),
    };
    Ok(Excerpt {
        span,
        audio: PcmAudio { sample_rate: pcm.sample_rate, samples: pcm.samples[from..to].to_vec() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wav(channels: u16, bits: u16, rate: u32, frames: &[&[i32]]) -> Vec<u8> {
        let spec = hound::WavSpec { channels, sample_rate: rate, bits_per_sample: bits, sample_format: hound::SampleFormat::Int };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cursor, spec).unwrap();
        for frame in frames {
            for &s in *frame {
                match bits {
                    8 => w.write_sample(s as i8).unwrap(),
                    _ => w.write_sample(s as i16).unwrap(),
                }
            }
        }
        w.finalize().unwrap();
        cursor.into_inner()
    }

    #[test]
    fn silence_at_8k() {
        let frames = vec![&[0][..]; 8000];
        let pcm = decode_wav(&wav(1, 16, 8000, &frames)).unwrap();
        assert_eq!(pcm.len(), 8000);
        assert_eq!(pcm.duration_ms(), 1000);
        assert!(pcm.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn symmetric_stereo_mixes_to_zero() {
        let frames = vec![&[16384, -16384][..]; 100];
        let pcm = decode_wav(&wav(2, 16, 8000, &frames)).unwrap();
        assert_eq!(pcm.len(), 100);
        assert!(pcm.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn eight_bit_normalization() {
        // hound stores 8-bit as unsigned and hands back value - 128.
        let pcm = decode_wav(&wav(1, 8, 8000, &[&[-128], &[0], &[127]])).unwrap();
        assert_eq!(pcm.samples(), &[-1.0, 0.0, 127.0 / 128.0]);
    }

    #[test]
    fn rejects_other_formats() {
        assert!(matches!(decode_wav(b"not a wav file"), Err(MediaError::Truncated(_) | MediaError::Unsupported(_))));
        let spec = hound::WavSpec { channels: 1, sample_rate: 8000, bits_per_sample: 24, sample_format: hound::SampleFormat::Int };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cursor, spec).unwrap();
        w.write_sample(1i32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(decode_wav(&cursor.into_inner()), Err(MediaError::Unsupported(_))));
        let full = wav(1, 16, 8000, &vec![&[5][..]; 100]);
        assert!(matches!(decode_wav(&full[..full.len() - 51]), Err(MediaError::Truncated(_))));
    }

    #[test]
    fn encode_round_trip() {
        let pcm = PcmAudio::new(8000, vec![0.0, 0.5, -0.5, -1.0]).unwrap();
        assert_eq!(decode_wav(&encode_wav(&pcm)).unwrap(), pcm);
    }

    #[test]
    fn excerpt_bounds() {
        let pcm = PcmAudio::new(8000, (0..24000).map(|i| (i % 7) as f32 / 10.0).collect()).unwrap();
        let ex = excerpt(&pcm, TimeSpan::new(1000, 2000).unwrap()).unwrap();
        assert_eq!(ex.audio.samples(), &pcm.samples()[8000..16000]);
        let whole = excerpt(&pcm, TimeSpan::new(0, pcm.duration_ms()).unwrap()).unwrap();
        assert_eq!(whole.audio, pcm);
        assert!(excerpt(&pcm, TimeSpan::new(2000, 3001).unwrap()).is_err());
    }
}
