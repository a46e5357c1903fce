//! Temporary-space and I/O accounting shared by every stream of a run.

use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LedgerState {
    pub live_temp_bytes: u64,
    pub peak_temp_bytes: u64,
    pub passes: u64,
    pub rounds: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeLive {
    pub live: u64,
    pub delta: i64,
}

impl fmt::Display for NegativeLive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "releasing {} bytes with only {} live", -self.delta, self.live)
    }
}

impl std::error::Error for NegativeLive {}

/// Applies a temp-space charge. Going below zero means some file was
/// released twice.
pub fn ledger_charge(state: LedgerState, delta: i64) -> Result<LedgerState, NegativeLive> {
    let live = state
        .live_temp_bytes
        .checked_add_signed(delta)
        .ok_or(NegativeLive { live: state.live_temp_bytes, delta })?;
    Ok(LedgerState { live_temp_bytes: live, peak_temp_bytes: state.peak_temp_bytes.max(live), ..state })
}

/// Shared handle; clones refer to the same counters.
#[derive(Debug, Clone, Default)]
pub struct SpaceLedger(Arc<Mutex<LedgerState>>);

impl SpaceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> MutexGuard<'_, LedgerState> {
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Panics on a negative balance: that is an accounting bug, not an
    /// input problem.
    pub fn charge(&self, delta: i64) {
        let mut st = self.lock();
        *st = ledger_charge(*st, delta).unwrap_or_else(|e| panic!("space ledger: {e}"));
    }

    pub fn add_read(&self, bytes: u64) {
        self.lock().bytes_read += bytes;
    }

    pub fn add_written(&self, bytes: u64) {
        self.lock().bytes_written += bytes;
    }

    pub fn add_pass(&self) {
        self.lock().passes += 1;
    }

    pub fn add_round(&self) {
        self.lock().rounds += 1;
    }

    pub fn snapshot(&self) -> LedgerState {
        *self.lock()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charge_tracks_peak() {
        let s = LedgerState::default();
        let s = ledger_charge(s, 100).unwrap();
        let s = ledger_charge(s, 50).unwrap();
        let s = ledger_charge(s, -120).unwrap();
        assert_eq!(s.live_temp_bytes, 30);
        assert_eq!(s.peak_temp_bytes, 150);
    }

    #[test]
    fn negative_balance_is_rejected() {
        let s = ledger_charge(LedgerState::default(), 10).unwrap();
        assert_eq!(ledger_charge(s, -11), Err(NegativeLive { live: 10, delta: -11 }));
    }

    #[test]
    #[should_panic(expected = "space ledger")]
    fn shared_ledger_aborts_on_double_release() {
        let l = SpaceLedger::new();
        l.charge(5);
        l.charge(-5);
        l.charge(-1);
    }

    #[test]
    fn clones_share_state() {
        let a = SpaceLedger::new();
        let b = a.clone();
        b.charge(7);
        b.add_read(3);
        a.add_pass();
        let s = a.snapshot();
        assert_eq!((s.live_temp_bytes, s.bytes_read, s.passes), (7, 3, 1));
    }
}
