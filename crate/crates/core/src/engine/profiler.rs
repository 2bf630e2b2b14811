//! Per-binding timing with inclusive/exclusive attribution.
//!
//! A shadow stack is pushed at each binding dispatch.  Exclusive time is
//! the frame's inclusive time minus the inclusive time of its direct
//! callees, so exclusive sums telescope to the root frame's total.

use std::collections::HashMap;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileRecord {
    pub name: String,
    pub calls: u64,
    pub inclusive: Duration,
    pub exclusive: Duration,
}

#[derive(Debug)]
struct Frame {
    name: String,
    start: Instant,
    child_time: Duration,
}

#[derive(Debug, Default)]
struct Totals {
    calls: u64,
    inclusive: Duration,
    exclusive: Duration,
}

#[derive(Debug, Default)]
pub struct Profiler {
    enabled: bool,
    stack: Vec<Frame>,
    totals: HashMap<String, Totals>,
}

impl Profiler {
    pub fn new(enabled: bool) -> Profiler {
        Profiler {
            enabled,
            ..Default::default()
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn enter(&mut self, name: &str) {
        if !self.enabled {
            return;
        }
        self.stack.push(Frame {
            name: name.to_string(),
            start: Instant::now(),
            child_time: Duration::ZERO,
        });
    }

    pub fn exit(&mut self) {
        if !self.enabled {
            return;
        }
        let frame = self.stack.pop().expect("profiler exit without enter");
        let inclusive = frame.start.elapsed();
        let exclusive = inclusive.saturating_sub(frame.child_time);
        if let Some(parent) = self.stack.last_mut() {
            parent.child_time += inclusive;
        }
        let t = self.totals.entry(frame.name).or_default();
        t.calls += 1;
        t.inclusive += inclusive;
        t.exclusive += exclusive;
    }

    /// Records sorted by exclusive time, largest first.
    pub fn report(&self) -> Option<Vec<ProfileRecord>> {
        if !self.enabled {
            return None;
        }
        let mut out: Vec<ProfileRecord> = self
            .totals
            .iter()
            .map(|(name, t)| ProfileRecord {
                name: name.clone(),
                calls: t.calls,
                inclusive: t.inclusive,
                exclusive: t.exclusive,
            })
            .collect();
        out.sort_by(|a, b| b.exclusive.cmp(&a.exclusive).then(a.name.cmp(&b.name)));
        Some(out)
    }
}
