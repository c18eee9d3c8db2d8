use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span::TimeSpan;

/// A repeatedly played region `[start, start + duration)` that advances by
/// `offset`. The offset may be shorter than the duration, giving overlapping
/// successive regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoopState {
    start_ms: u64,
    duration_ms: u64,
    offset_ms: u64,
    media_duration_ms: u64,
    at_end: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopError {
    #[error("loop duration must be positive")]
    NonPositiveDuration,
    #[error("loop offset must be positive")]
    NonPositiveOffset,
    #[error("loop region [{start}, {end}) exceeds the {media} ms of media")]
    ExceedsMedia { start: u64, end: u64, media: u64 },
    /// Advancing past the last full window. Carries the final state, with
    /// `at_end` set.
    #[error("loop is at the end of the media")]
    AtEnd(LoopState),
}

/// Partial update for [`set_loop`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopUpdate {
    pub start_ms: Option<u64>,
    pub duration_ms: Option<u64>,
    pub offset_ms: Option<u64>,
}

fn checked(media: u64, start: u64, duration: u64, offset: u64) -> Result<LoopState, LoopError> {
    if duration == 0 {
        return Err(LoopError::NonPositiveDuration);
    }
    if offset == 0 {
        return Err(LoopError::NonPositiveOffset);
    }
    match start.checked_add(duration) {
        Some(end) if end <= media => Ok(LoopState {
            start_ms: start,
            duration_ms: duration,
            offset_ms: offset,
            media_duration_ms: media,
            at_end: false,
        }),
        _ => Err(LoopError::ExceedsMedia { start, end: start.saturating_add(duration), media }),
    }
}

pub fn create_loop(media_duration_ms: u64, start_ms: u64, duration_ms: u64, offset_ms: u64) -> Result<LoopState, LoopError> {
    checked(media_duration_ms, start_ms, duration_ms, offset_ms)
}

/// Moves the region forward by the offset. The last window is clamped to
/// the media end; advancing from the clamped window fails with
/// [`LoopError::AtEnd`].
pub fn advance_loop(state: &LoopState) -> Result<LoopState, LoopError> {
    let last_start = state.media_duration_ms - state.duration_ms;
    if state.at_end || state.start_ms == last_start {
        return Err(LoopError::AtEnd(LoopState { at_end: true, ..*state }));
    }
    let start = state.start_ms.saturating_add(state.offset_ms).min(last_start);
    Ok(LoopState { start_ms: start, ..*state })
}

/// Changes any of start, duration and offset. On error the caller keeps the
/// previous state. `at_end` clears when the region moves or resizes.
pub fn set_loop(state: &LoopState, update: LoopUpdate) -> Result<LoopState, LoopError> {
    let start = update.start_ms.unwrap_or(state.start_ms);
    let duration = update.duration_ms.unwrap_or(state.duration_ms);
    let offset = update.offset_ms.unwrap_or(state.offset_ms);
    let mut next = checked(state.media_duration_ms, start, duration, offset)?;
    next.at_end = state.at_end && start == state.start_ms && duration == state.duration_ms;
    Ok(next)
}

impl LoopState {
    pub fn start_ms(&self) -> u64 {
        self.start_ms
    }

    pub fn duration_ms(&self) -> u64 {
        self.duration_ms
    }

    pub fn offset_ms(&self) -> u64 {
        self.offset_ms
    }

    pub fn media_duration_ms(&self) -> u64 {
        self.media_duration_ms
    }

    pub fn at_end(&self) -> bool {
        self.at_end
    }

    pub fn span(&self) -> TimeSpan {
        TimeSpan::new(self.start_ms, self.start_ms + self.duration_ms).expect("positive duration")
    }
}
