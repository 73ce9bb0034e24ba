use std::collections::BTreeMap;

use crate::model::{LinkId, StreamId, Tick};

/// One reserved transmission window `[start, end)` on an egress port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reservation {
    pub start: Tick,
    pub end: Tick,
    pub stream: StreamId,
    pub frame: u32,
}

impl Reservation {
    pub fn len(&self) -> Tick {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

type Key = (Tick, StreamId, u32);

/// Reservation table of one egress port over one hyper period.
///
/// Intervals are keyed by `(start, stream, frame)`, so a corrupted table
/// with two windows starting at the same tick can still be represented
/// (and then reported by the validator).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortTimeline {
    link: LinkId,
    horizon: Tick,
    slots: BTreeMap<Key, Tick>,
    reserved: Tick,
}

impl PortTimeline {
    pub fn new(link: LinkId, horizon: Tick) -> Self {
        Self {
            link,
            horizon,
            slots: BTreeMap::new(),
            reserved: 0,
        }
    }

    pub fn link(&self) -> LinkId {
        self.link
    }

    pub fn horizon(&self) -> Tick {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn reserved_ticks(&self) -> Tick {
        self.reserved
    }

    pub fn iter(&self) -> impl Iterator<Item = Reservation> + '_ {
        self.slots
            .iter()
            .map(|(&(start, stream, frame), &end)| Reservation {
                start,
                end,
                stream,
                frame,
            })
    }

    /// Earliest `t >= from` such that `[t, t + len)` overlaps no
    /// reservation. The result may run past the horizon; callers bound it.
    pub fn earliest_fit(&self, from: Tick, len: Tick) -> Tick {
        let mut t = from;
        let lo: Key = (from, StreamId(0), 0);
        if let Some((_, &end)) = self.slots.range(..lo).next_back() {
            t = t.max(end);
        }
        for (&(start, _, _), &end) in self.slots.range(lo..) {
            if start >= t + len {
                break;
            }
            t = t.max(end);
        }
        t
    }

    pub fn is_free(&self, start: Tick, len: Tick) -> bool {
        self.earliest_fit(start, len) == start
    }

    pub(crate) fn insert(&mut self, r: Reservation) {
        if self
            .slots
            .insert((r.start, r.stream, r.frame), r.end)
            .is_none()
        {
            self.reserved += r.len();
        }
    }

    pub(crate) fn remove(&mut self, start: Tick, stream: StreamId, frame: u32) -> bool {
        match self.slots.remove(&(start, stream, frame)) {
            Some(end) => {
                self.reserved -= end - start;
                true
            }
            None => false,
        }
    }

    /// Test hook for building deliberately inconsistent tables.
    #[doc(hidden)]
    pub fn force_insert(&mut self, r: Reservation) {
        self.insert(r);
    }
}
