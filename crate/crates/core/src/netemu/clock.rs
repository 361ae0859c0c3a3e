use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::types::SimTime;

struct Entry<E> {
    at: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

/// Discrete-event clock. Events at equal times pop in insertion order.
pub struct VirtualClock<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Entry<E>>,
}

impl<E> Default for VirtualClock<E> {
    fn default() -> Self {
        VirtualClock { now: SimTime::ZERO, next_seq: 0, queue: BinaryHeap::new() }
    }
}

impl<E> VirtualClock<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Events in the past are clamped to now.
    pub fn schedule(&mut self, at: SimTime, event: E) {
        let at = at.max(self.now);
        self.queue.push(Entry { at, seq: self.next_seq, event });
        self.next_seq += 1;
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.queue.peek().map(|e| e.at)
    }

    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        let entry = self.queue.pop()?;
        self.now = entry.at;
        Some((entry.at, entry.event))
    }

    /// Moves time forward without firing anything.
    pub fn advance_to(&mut self, t: SimTime) {
        self.now = self.now.max(t);
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &E> {
        self.queue.iter().map(|e| &e.event)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_by_time_then_insertion() {
        let mut c = VirtualClock::new();
        c.schedule(SimTime::from_millis(5), "b");
        c.schedule(SimTime::from_millis(1), "a");
        c.schedule(SimTime::from_millis(5), "c");
        c.schedule(SimTime::from_millis(5), "d");
        let order: Vec<_> = std::iter::from_fn(|| c.pop().map(|(_, e)| e)).collect();
        assert_eq!(order, ["a", "b", "c", "d"]);
        assert_eq!(c.now(), SimTime::from_millis(5));
    }

    #[test]
    fn never_goes_backwards() {
        let mut c = VirtualClock::new();
        c.schedule(SimTime::from_millis(10), 1);
        c.pop();
        c.schedule(SimTime::from_millis(3), 2);
        assert_eq!(c.pop(), Some((SimTime::from_millis(10), 2)));
    }
}
