use proptest::prelude::*;
use sla_core::media::{
    advance_loop, build_waveform_cache, create_loop, decode_wav, encode_wav, pyramid_level_count, query_peaks,
    set_loop, LoopError, LoopUpdate, PcmAudio, Peak, WaveformCache,
};

/// Min/max of the samples a bucket covers, scanned directly.
fn scan(samples: &[f32], bucket: usize, index: usize) -> Peak {
    let chunk = &samples[index * bucket..((index + 1) * bucket).min(samples.len())];
    let mut peak = Peak { min: chunk[0], max: chunk[0] };
    for &s in chunk {
        peak.min = peak.min.min(s);
        peak.max = peak.max.max(s);
    }
    peak
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn every_level_matches_a_direct_scan(
        samples in proptest::collection::vec(-1.0f32..=1.0, 1..6000),
        shift in 0u32..8,
    ) {
        let base = 1u32 << shift;
        let pcm = PcmAudio::new(8000, samples.clone()).unwrap();
        let cache = build_waveform_cache(&pcm, base).unwrap();
        prop_assert_eq!(cache.level_count(), pyramid_level_count(samples.len() as u64, base));
        prop_assert!(cache.levels.last().unwrap().len() <= 2);
        for (level, peaks) in cache.levels.iter().enumerate() {
            let bucket = cache.bucket_samples(level) as usize;
            prop_assert_eq!(peaks.len(), samples.len().div_ceil(bucket));
            for (i, peak) in peaks.iter().enumerate() {
                prop_assert_eq!(*peak, scan(&samples, bucket, i));
            }
        }
        let sidecar = cache.to_sidecar();
        prop_assert_eq!(&WaveformCache::from_sidecar(&sidecar).unwrap(), &cache);
        prop_assert_eq!(build_waveform_cache(&pcm, base).unwrap().to_sidecar(), sidecar);
    }

    #[test]
    fn peak_queries_clamp(from in 0usize..40, count in 0usize..40) {
        let pcm = PcmAudio::new(8000, (0..5000).map(|i| (i as f32 / 100.0).sin()).collect()).unwrap();
        let cache = build_waveform_cache(&pcm, 64).unwrap();
        let got = query_peaks(&cache, 1, from, count).unwrap();
        let stored = &cache.levels[1];
        prop_assert_eq!(got, &stored[from.min(stored.len())..(from + count).min(stored.len())]);
    }

    #[test]
    fn wav_round_trip_is_sample_exact(samples in proptest::collection::vec(-32768i32..32768, 1..2000)) {
        let pcm = PcmAudio::new(16_000, samples.iter().map(|&s| s as f32 / 32768.0).collect()).unwrap();
        prop_assert_eq!(decode_wav(&encode_wav(&pcm)).unwrap(), pcm);
    }

    #[test]
    fn loop_law(media in 1u64..200_000, start_frac in 0.0f64..1.0, dur in 1u64..50_000, offset in 1u64..60_000) {
        prop_assume!(dur <= media);
        let start0 = ((media - dur) as f64 * start_frac) as u64;
        let last = media - dur;
        let mut state = create_loop(media, start0, dur, offset).unwrap();
        let mut k = 0u64;
        loop {
            match advance_loop(&state) {
                Ok(next) => {
                    k += 1;
                    prop_assert_eq!(next.start_ms(), (start0 + k * offset).min(last));
                    prop_assert!(!next.at_end());
                    state = next;
                }
                Err(LoopError::AtEnd(at)) => {
                    prop_assert_eq!(state.start_ms(), last);
                    prop_assert!(at.at_end());
                    prop_assert_eq!(at.start_ms(), last);
                    prop_assert!(matches!(advance_loop(&at), Err(LoopError::AtEnd(_))));
                    break;
                }
                Err(other) => return Err(TestCaseError::fail(format!("{other}"))),
            }
        }
        prop_assert_eq!(k, (last - start0).div_ceil(offset));
    }

    #[test]
    fn set_loop_keeps_state_on_error(media in 1000u64..100_000, dur in 1u64..1000, bad in 0u64..3) {
        let state = create_loop(media, 0, dur, 100).unwrap();
        let update = match bad {
            0 => LoopUpdate { duration_ms: Some(0), ..Default::default() },
            1 => LoopUpdate { offset_ms: Some(0), ..Default::default() },
            _ => LoopUpdate { start_ms: Some(media), ..Default::default() },
        };
        prop_assert!(set_loop(&state, update).is_err());
        let moved = set_loop(&state, LoopUpdate { start_ms: Some(media - dur), ..Default::default() }).unwrap();
        prop_assert_eq!(moved.span().end_ms(), media);
    }
}
