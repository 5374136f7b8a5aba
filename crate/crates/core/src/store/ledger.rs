//! Wall-time budget accounting for a batch of runs.
//!
//! Every seed is granted the same minimum budget. When a run ends, whatever it
//! did not use is divided equally among the runs that are still running or
//! queued; with nobody left it stays in the reclaimed pool.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SlotState {
    Queued,
    Running,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slot {
    pub allocation: f64,
    pub spent: f64,
    pub state: SlotState,
}

/// One redistribution event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transfer {
    pub from: usize,
    pub unused: f64,
    /// Recipients and the seconds each received.
    pub to: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetLedger {
    pub minimum: f64,
    pub granted: f64,
    pub reclaimed: f64,
    slots: Vec<Slot>,
    log: Vec<Transfer>,
}

impl BudgetLedger {
    pub fn new(n_runs: usize, minimum: f64) -> Self {
        Self {
            minimum,
            granted: minimum * n_runs as f64,
            reclaimed: 0.0,
            slots: vec![Slot { allocation: minimum, spent: 0.0, state: SlotState::Queued }; n_runs],
            log: Vec::new(),
        }
    }

    pub fn slot(&self, i: usize) -> &Slot {
        &self.slots[i]
    }

    pub fn log(&self) -> &[Transfer] {
        &self.log
    }

    /// Marks run `i` as running and returns its current allocation.
    pub fn start(&mut self, i: usize) -> Result<f64> {
        let s = &mut self.slots[i];
        if s.state != SlotState::Queued {
            return Err(Error::InvalidArgument(format!("run {i} already started")));
        }
        s.state = SlotState::Running;
        Ok(s.allocation)
    }

    /// Ends run `i` after `used` seconds and hands its unused allocation on.
    ///
    /// Spending is charged up to the allocation; an overrun of the final
    /// iteration is not charged to anyone. Returns the transfer made to each
    /// still-running run so its optimizer can be told about the extra time.
    pub fn finish(&mut self, i: usize, used: f64) -> Result<Vec<(usize, f64)>> {
        let s = &mut self.slots[i];
        if s.state != SlotState::Running {
            return Err(Error::InvalidArgument(format!("run {i} is not running")));
        }
        s.state = SlotState::Done;
        s.spent = used.clamp(0.0, s.allocation);
        let unused = s.allocation - s.spent;
        let recipients: Vec<usize> = (0..self.slots.len()).filter(|&j| self.slots[j].state != SlotState::Done).collect();
        if recipients.is_empty() || unused <= 0.0 {
            self.reclaimed += unused;
            return Ok(Vec::new());
        }
        let share = unused / recipients.len() as f64;
        let mut to = Vec::with_capacity(recipients.len());
        for &j in &recipients {
            self.slots[j].allocation += share;
            to.push((j, share));
        }
        let running = to.iter().copied().filter(|&(j, _)| self.slots[j].state == SlotState::Running).collect();
        self.log.push(Transfer { from: i, unused, to });
        Ok(running)
    }

    pub fn spent(&self) -> f64 {
        self.slots.iter().map(|s| s.spent).sum()
    }

    /// Allocations of runs that have not finished.
    pub fn remaining(&self) -> f64 {
        self.slots.iter().filter(|s| s.state != SlotState::Done).map(|s| s.allocation).sum()
    }

    /// granted − (spent + reclaimed + remaining); zero up to rounding.
    pub fn imbalance(&self) -> f64 {
        self.granted - (self.spent() + self.reclaimed + self.remaining())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn early_finisher_shares_equally() {
        let mut l = BudgetLedger::new(4, 780.0);
        for i in 0..4 {
            l.start(i).unwrap();
        }
        let t = l.finish(0, 680.0).unwrap();
        assert_eq!(t.len(), 3);
        for (j, s) in t {
            assert!((s - 100.0 / 3.0).abs() < 1e-12);
            assert!((l.slot(j).allocation - (780.0 + 100.0 / 3.0)).abs() < 1e-9);
        }
        assert!(l.imbalance().abs() < 1e-9);
    }

    #[test]
    fn queued_runs_receive_shares_at_start() {
        let mut l = BudgetLedger::new(3, 10.0);
        l.start(0).unwrap();
        assert!(l.finish(0, 4.0).unwrap().is_empty());
        assert_eq!(l.start(1).unwrap(), 13.0);
        assert_eq!(l.slot(2).allocation, 13.0);
    }

    #[test]
    fn instant_convergence_leaves_pool_unspent() {
        let mut l = BudgetLedger::new(3, 5.0);
        for i in 0..3 {
            l.start(i).unwrap();
        }
        for i in 0..3 {
            l.finish(i, 0.0).unwrap();
        }
        assert_eq!(l.spent(), 0.0);
        assert!((l.reclaimed - 15.0).abs() < 1e-12);
        assert_eq!(l.remaining(), 0.0);
    }

    #[test]
    fn misuse_is_rejected() {
        let mut l = BudgetLedger::new(1, 1.0);
        assert!(l.finish(0, 0.5).is_err());
        l.start(0).unwrap();
        assert!(l.start(0).is_err());
    }

    proptest! {
        #[test]
        fn conservation_holds_throughout(
            n in 1usize..12,
            ops in proptest::collection::vec((0usize..12, 0.0f64..2.0), 0..40),
        ) {
            let mut l = BudgetLedger::new(n, 60.0);
            let mut granted_seen = Vec::new();
            for (k, frac) in ops {
                let i = k % n;
                match l.slot(i).state {
                    SlotState::Queued => { l.start(i).unwrap(); }
                    SlotState::Running => {
                        let used = frac * l.slot(i).allocation;
                        l.finish(i, used).unwrap();
                    }
                    SlotState::Done => {}
                }
                prop_assert!(l.imbalance().abs() < 1e-9);
                prop_assert!(l.spent() + l.remaining() <= l.granted + 1e-9);
                granted_seen.push(l.granted);
            }
            prop_assert!(granted_seen.iter().all(|&g| g == 60.0 * n as f64));
        }
    }
}
