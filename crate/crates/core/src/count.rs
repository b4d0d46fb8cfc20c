//! Thread-local counters for field multiplications and additions.
//!
//! The counters are monotone per thread; callers measure a phase by taking
//! a [`snapshot`] before and after it and subtracting. This keeps the hot
//! arithmetic paths free of any shared state and makes nested measurements
//! trivially correct.

use std::cell::Cell;

thread_local! {
    static MULS: Cell<u64> = const { Cell::new(0) };
    static ADDS: Cell<u64> = const { Cell::new(0) };
}

/// Counter values at one point in time. Subtract two snapshots to get the
/// work done in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpSnapshot {
    pub mul: u64,
    pub add: u64,
}

impl OpSnapshot {
    /// Ops performed since `earlier` on this thread.
    pub fn since(self, earlier: OpSnapshot) -> OpCount {
        OpCount {
            mul: self.mul - earlier.mul,
            add: self.add - earlier.add,
        }
    }
}

/// Field operations attributed to one phase of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub mul: u64,
    pub add: u64,
}

impl OpCount {
    pub fn total(self) -> u64 {
        self.mul + self.add
    }
}

impl std::ops::AddAssign for OpCount {
    fn add_assign(&mut self, rhs: OpCount) {
        self.mul += rhs.mul;
        self.add += rhs.add;
    }
}

/// Current per-thread counter values.
pub fn snapshot() -> OpSnapshot {
    OpSnapshot {
        mul: MULS.with(|c| c.get()),
        add: ADDS.with(|c| c.get()),
    }
}

/// Runs `f` and returns its result together with the ops it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCount) {
    let before = snapshot();
    let out = f();
    (out, snapshot().since(before))
}

#[inline]
pub(crate) fn record_mul() {
    MULS.with(|c| c.set(c.get() + 1));
}

#[inline]
pub(crate) fn record_add() {
    ADDS.with(|c| c.set(c.get() + 1));
}
