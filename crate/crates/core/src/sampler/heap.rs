//! Indexed binary min-heap over reservoir slots.
//!
//! Keys only ever grow while an entry is queued, so the only repair needed
//! after a key change is a sift-down.

const NOT_QUEUED: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankKey {
    pub rank: f64,
    pub arrival: u64,
}

impl RankKey {
    /// Smaller rank first; equal ranks put the newer arrival first so it is
    /// the one evicted.
    fn precedes(&self, other: &RankKey) -> bool {
        self.rank < other.rank || (self.rank == other.rank && self.arrival > other.arrival)
    }
}

#[derive(Clone, Debug)]
pub struct IndexedMinHeap {
    heap: Vec<usize>,
    keys: Vec<RankKey>,
    pos: Vec<usize>,
}

impl IndexedMinHeap {
    pub fn with_slots(slots: usize) -> Self {
        IndexedMinHeap {
            heap: Vec::with_capacity(slots),
            keys: vec![
                RankKey {
                    rank: f64::INFINITY,
                    arrival: 0
                };
                slots
            ],
            pos: vec![NOT_QUEUED; slots],
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, slot: usize) -> bool {
        self.pos[slot] != NOT_QUEUED
    }

    pub fn push(&mut self, slot: usize, key: RankKey) {
        assert!(!self.contains(slot), "slot {slot} already queued");
        self.keys[slot] = key;
        self.pos[slot] = self.heap.len();
        self.heap.push(slot);
        self.sift_up(self.heap.len() - 1);
    }

    pub fn peek(&self) -> Option<(usize, RankKey)> {
        self.heap.first().map(|&s| (s, self.keys[s]))
    }

    pub fn pop(&mut self) -> Option<(usize, RankKey)> {
        let top = *self.heap.first()?;
        let last = self.heap.len() - 1;
        self.swap(0, last);
        self.heap.pop();
        self.pos[top] = NOT_QUEUED;
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        Some((top, self.keys[top]))
    }

    /// Raises the rank of a queued slot. Panics if the rank would decrease.
    pub fn increase_rank(&mut self, slot: usize, rank: f64) {
        let at = self.pos[slot];
        assert!(at != NOT_QUEUED, "slot {slot} not queued");
        assert!(rank >= self.keys[slot].rank, "rank decrease on slot {slot}");
        self.keys[slot].rank = rank;
        self.sift_down(at);
    }

    pub fn key(&self, slot: usize) -> RankKey {
        self.keys[slot]
    }

    /// Checks the heap property and the position map.
    pub fn is_consistent(&self) -> bool {
        self.heap.iter().enumerate().all(|(i, &s)| {
            self.pos[s] == i
                && (i == 0 || !self.keys[s].precedes(&self.keys[self.heap[(i - 1) / 2]]))
        })
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i]] = i;
        self.pos[self.heap[j]] = j;
    }

    fn precedes(&self, i: usize, j: usize) -> bool {
        self.keys[self.heap[i]].precedes(&self.keys[self.heap[j]])
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.precedes(i, parent) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && self.precedes(right, left) {
                right
            } else {
                left
            };
            if self.precedes(child, i) {
                self.swap(child, i);
                i = child;
            } else {
                break;
            }
        }
    }
}
