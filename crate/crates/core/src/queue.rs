//! Indexed binary heap ordered by a two-component key with FIFO tie-break.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

/// Lexicographic priority `[k1; k2]`. Components may be infinite but never
/// NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Key {
    pub k1: f64,
    pub k2: f64,
}

impl Key {
    pub const INFINITE: Key = Key {
        k1: f64::INFINITY,
        k2: f64::INFINITY,
    };

    pub fn new(k1: f64, k2: f64) -> Self {
        debug_assert!(!k1.is_nan() && !k2.is_nan(), "NaN key");
        Key { k1, k2 }
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        let c = |a: f64, b: f64| a.partial_cmp(&b).expect("NaN key");
        c(self.k1, other.k1).then_with(|| c(self.k2, other.k2))
    }
}

#[derive(Clone, Debug)]
struct Entry<T> {
    key: Key,
    seq: u64,
    item: T,
}

impl<T> Entry<T> {
    fn precedes(&self, other: &Self) -> bool {
        (self.key, self.seq) < (other.key, other.seq)
    }
}

/// Min-queue with update and removal by item. Equal keys pop in the order
/// their current key was set.
#[derive(Clone, Debug)]
pub struct PriorityQueue<T> {
    heap: Vec<Entry<T>>,
    position: HashMap<T, usize>,
    next_seq: u64,
}

impl<T: Copy + Eq + Hash> Default for PriorityQueue<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Copy + Eq + Hash> PriorityQueue<T> {
    pub fn new() -> Self {
        PriorityQueue {
            heap: Vec::new(),
            position: HashMap::new(),
            next_seq: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, item: T) -> bool {
        self.position.contains_key(&item)
    }

    pub fn key_of(&self, item: T) -> Option<Key> {
        self.position.get(&item).map(|&i| self.heap[i].key)
    }

    /// `[inf; inf]` when empty.
    pub fn top_key(&self) -> Key {
        self.heap.first().map_or(Key::INFINITE, |e| e.key)
    }

    pub fn peek(&self) -> Option<(T, Key)> {
        self.heap.first().map(|e| (e.item, e.key))
    }

    /// Inserts `item`, or re-keys it if already present.
    pub fn insert(&mut self, item: T, key: Key) {
        let seq = self.next_seq;
        self.next_seq += 1;
        match self.position.get(&item) {
            Some(&i) => {
                self.heap[i].key = key;
                self.heap[i].seq = seq;
                self.restore(i);
            }
            None => {
                self.heap.push(Entry { key, seq, item });
                let i = self.heap.len() - 1;
                self.position.insert(item, i);
                self.sift_up(i);
            }
        }
    }

    /// Alias of [`insert`](Self::insert) for items known to be present.
    pub fn update(&mut self, item: T, key: Key) {
        debug_assert!(self.contains(item));
        self.insert(item, key);
    }

    pub fn remove(&mut self, item: T) -> Option<Key> {
        let i = self.position.remove(&item)?;
        let removed = self.heap.swap_remove(i);
        if i < self.heap.len() {
            self.position.insert(self.heap[i].item, i);
            self.restore(i);
        }
        Some(removed.key)
    }

    pub fn pop(&mut self) -> Option<(T, Key)> {
        let (item, key) = self.peek()?;
        self.remove(item);
        Some((item, key))
    }

    /// Items in pop order. Allocates; meant for diagnostics and tests.
    pub fn to_sorted_vec(&self) -> Vec<(T, Key)> {
        let mut v: Vec<&Entry<T>> = self.heap.iter().collect();
        v.sort_by_key(|e| (e.key, e.seq));
        v.into_iter().map(|e| (e.item, e.key)).collect()
    }

    pub fn items(&self) -> impl Iterator<Item = T> + '_ {
        self.heap.iter().map(|e| e.item)
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.position.insert(self.heap[a].item, a);
        self.position.insert(self.heap[b].item, b);
    }

    // If sift_up moves the entry, the one left at `i` is its old parent,
    // which already precedes its subtree, so sift_down there is a no-op.
    fn restore(&mut self, i: usize) {
        self.sift_up(i);
        self.sift_down(i);
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.heap[i].precedes(&self.heap[parent]) {
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
            let l = 2 * i + 1;
            let r = l + 1;
            let mut best = i;
            if l < n && self.heap[l].precedes(&self.heap[best]) {
                best = l;
            }
            if r < n && self.heap[r].precedes(&self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }
}
