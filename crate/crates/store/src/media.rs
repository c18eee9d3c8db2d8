//! Occasion media and waveform sidecars.
//!
//! Audio is stored under a name derived from its hash, and `media.xml`
//! names the current file. Replacing media switches that descriptor in one
//! rename, so a reader never pairs new audio with an old sidecar.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sla_core::media::{decode_wav, PcmAudio, WaveformCache};
use sla_core::xml::Element;

use crate::atomic::write_atomic;
use crate::codec::{attr, parsed, Decode};
use crate::{DocId, Result, Store, StoreError};

const HASH_PREFIX: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaInfo {
    pub sha256: String,
    pub file: String,
    pub sample_rate: u32,
    pub total_samples: u64,
    pub duration_ms: u64,
}

impl MediaInfo {
    fn to_xml(&self) -> Element {
        Element::new("media")
            .attr("sha256", &self.sha256)
            .attr("file", &self.file)
            .attr("sample-rate", self.sample_rate)
            .attr("total-samples", self.total_samples)
            .attr("duration-ms", self.duration_ms)
    }

    pub(crate) fn from_xml(el: &Element) -> Decode<Self> {
        let info = MediaInfo {
            sha256: attr(el, "sha256")?.to_string(),
            file: attr(el, "file")?.to_string(),
            sample_rate: parsed(el, "sample-rate")?,
            total_samples: parsed(el, "total-samples")?,
            duration_ms: parsed(el, "duration-ms")?,
        };
        let plain = |s: &str| s.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'.');
        match info.sha256.len() == 64 && plain(&info.sha256) && plain(&info.file) {
            true => Ok(info),
            false => Err("malformed media descriptor".into()),
        }
    }

    /// Sidecar file name for this media.
    pub fn sidecar_name(&self) -> String {
        format!("{}.slawf", &self.sha256[..HASH_PREFIX])
    }
}

impl Store {
    fn occasion_dir(&self, occasion_id: &str) -> PathBuf {
        self.root.join("occasions").join(occasion_id)
    }

    /// Stores WAV bytes as the occasion's media, replacing any earlier media
    /// and its sidecar.
    pub fn put_media(&self, occasion_id: &str, wav: &[u8]) -> Result<(MediaInfo, PcmAudio)> {
        self.occasion(occasion_id)?;
        let pcm = decode_wav(wav)?;
        let sha256 = format!("{:x}", Sha256::digest(wav));
        let info = MediaInfo {
            file: format!("{}.wav", &sha256[..HASH_PREFIX]),
            sha256,
            sample_rate: pcm.sample_rate(),
            total_samples: pcm.len() as u64,
            duration_ms: pcm.duration_ms(),
        };
        let dir = self.occasion_dir(occasion_id);
        if let Err(point) = write_atomic(&dir.join("media").join(&info.file), wav, None)? {
            return Err(StoreError::Interrupted { doc: info.file.clone(), point });
        }
        let id = DocId::Media(occasion_id.to_string());
        let (_, previous) = self.update(&id, |current| {
            let previous = current.map(|el| MediaInfo::from_xml(&el)).transpose().ok().flatten();
            Ok((info.to_xml(), previous))
        })?;
        if let Some(old) = previous.filter(|old| old.sha256 != info.sha256) {
            let _ = fs::remove_file(dir.join("media").join(&old.file));
            let _ = fs::remove_file(dir.join(old.sidecar_name()));
        }
        Ok((info, pcm))
    }

    pub fn media_info(&self, occasion_id: &str) -> Result<MediaInfo> {
        if !crate::is_valid_id(occasion_id) {
            return Err(StoreError::NotFound(format!("media of {occasion_id}")));
        }
        let id = DocId::Media(occasion_id.to_string());
        let (el, _) = self.get_document(&id)?;
        MediaInfo::from_xml(&el).map_err(|message| StoreError::Invalid { doc: id.to_string(), message })
    }

    pub fn media_bytes(&self, occasion_id: &str) -> Result<Vec<u8>> {
        let info = self.media_info(occasion_id)?;
        Ok(fs::read(self.occasion_dir(occasion_id).join("media").join(info.file))?)
    }

    pub fn media_pcm(&self, occasion_id: &str) -> Result<PcmAudio> {
        Ok(decode_wav(&self.media_bytes(occasion_id)?)?)
    }

    /// Writes the sidecar for `sha256`. Returns false without writing when
    /// that media has since been replaced.
    pub fn put_sidecar(&self, occasion_id: &str, sha256: &str, cache: &WaveformCache) -> Result<bool> {
        let info = self.media_info(occasion_id)?;
        if info.sha256 != sha256 {
            return Ok(false);
        }
        let path = self.occasion_dir(occasion_id).join(info.sidecar_name());
        match write_atomic(&path, &cache.to_sidecar(), None)? {
            Ok(()) => Ok(true),
            Err(point) => Err(StoreError::Interrupted { doc: info.sidecar_name(), point }),
        }
    }

    /// The current media's sidecar, if it has been built.
    pub fn sidecar(&self, occasion_id: &str) -> Result<Option<WaveformCache>> {
        let info = self.media_info(occasion_id)?;
        match fs::read(self.occasion_dir(occasion_id).join(info.sidecar_name())) {
            Ok(bytes) => Ok(Some(WaveformCache::from_sidecar(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sla_core::chat::parse_chat;
    use sla_core::media::{build_waveform_cache, encode_wav};

    #[test]
    fn media_replacement_drops_old_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::init(dir.path()).unwrap();
        let doc = parse_chat("@Begin\n@Participants:\tROD Rodney Chair\n@End\n").unwrap();
        let occ = store.create_occasion("Meeting", &doc).unwrap();
        let tone = PcmAudio::new(8000, (0..16_000).map(|i| (i as f32 * 0.05).sin() * 0.5).collect()).unwrap();
        let (info, pcm) = store.put_media(&occ.id, &encode_wav(&tone)).unwrap();
        assert_eq!(info.duration_ms, 2000);
        assert!(store.sidecar(&occ.id).unwrap().is_none());
        let cache = build_waveform_cache(&pcm, 512).unwrap();
        assert!(store.put_sidecar(&occ.id, &info.sha256, &cache).unwrap());
        assert_eq!(store.sidecar(&occ.id).unwrap(), Some(cache));

        let silence = PcmAudio::new(8000, vec![0.0; 8000]).unwrap();
        let (second, _) = store.put_media(&occ.id, &encode_wav(&silence)).unwrap();
        assert_eq!(second.duration_ms, 1000);
        assert!(store.sidecar(&occ.id).unwrap().is_none());
        assert!(!store.put_sidecar(&occ.id, &info.sha256, &build_waveform_cache(&pcm, 512).unwrap()).unwrap());
        assert!(!dir.path().join("occasions").join(&occ.id).join(info.sidecar_name()).exists());
        assert!(matches!(store.put_media(&occ.id, b"not a wav"), Err(StoreError::Media(_))));
    }
}
