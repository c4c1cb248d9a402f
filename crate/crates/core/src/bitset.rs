//! Fixed-capacity bitset over `0..len`, shared by integer sets, materialized
//! tensor sets and the fiber intersections of the witness search.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet {
            len,
            words: vec![!0; len.div_ceil(WORD)],
        };
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, items: I) -> Self {
        let mut s = BitSet::new(len);
        for i in items {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    /// Inserts `i`; indices outside the capacity are ignored.
    #[inline]
    pub fn insert(&mut self, i: usize) {
        if i < self.len {
            self.words[i / WORD] |= 1 << (i % WORD);
        }
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i / WORD] &= !(1 << (i % WORD));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
        if other.words.len() < self.words.len() {
            for a in &mut self.words[other.words.len()..] {
                *a = 0;
            }
        }
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
        self.trim();
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
    }

    pub fn complement(&self) -> BitSet {
        let mut s = BitSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Clears every index `<= bound`.
    pub fn clear_through(&mut self, bound: usize) {
        let last = bound.min(self.len.saturating_sub(1));
        if self.len == 0 {
            return;
        }
        let full_words = (last + 1) / WORD;
        for w in &mut self.words[..full_words] {
            *w = 0;
        }
        let rem = (last + 1) % WORD;
        if rem > 0 && full_words < self.words.len() {
            self.words[full_words] &= !((1u64 << rem) - 1);
        }
    }

    /// Returns `{ i : i + shift ∈ self }` with the same capacity.
    pub fn shifted_down(&self, shift: usize) -> BitSet {
        let mut out = BitSet::new(self.len);
        if shift >= self.len {
            return out;
        }
        let ws = shift / WORD;
        let bs = shift % WORD;
        for i in 0..out.words.len() {
            let lo = self.words.get(i + ws).copied().unwrap_or(0);
            let hi = self.words.get(i + ws + 1).copied().unwrap_or(0);
            out.words[i] = if bs == 0 {
                lo
            } else {
                (lo >> bs) | (hi << (WORD - bs))
            };
        }
        out.trim();
        out
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            set: self,
            word: 0,
            bits: self.words.first().copied().unwrap_or(0),
        }
    }

    /// `self ∩ (other − shift)`, i.e. keeps `i` when `i + shift ∈ other`.
    pub fn intersect_with_shifted_down(&mut self, other: &BitSet, shift: usize) {
        let ws = shift / WORD;
        let bs = shift % WORD;
        for (i, w) in self.words.iter_mut().enumerate() {
            let lo = other.words.get(i + ws).copied().unwrap_or(0);
            let src = if bs == 0 {
                lo
            } else {
                let hi = other.words.get(i + ws + 1).copied().unwrap_or(0);
                (lo >> bs) | (hi << (WORD - bs))
            };
            *w &= src;
        }
    }

    /// Members `>= from`, ascending.
    pub fn iter_from(&self, from: usize) -> Iter<'_> {
        let word = from / WORD;
        let bits = match self.words.get(word) {
            Some(w) => w & (!0u64 << (from % WORD)),
            None => 0,
        };
        Iter {
            set: self,
            word: word.min(self.words.len()),
            bits,
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn trim(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

pub struct Iter<'a> {
    set: &'a BitSet,
    word: usize,
    bits: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.bits != 0 {
                let tz = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                return Some(self.word * WORD + tz);
            }
            self.word += 1;
            if self.word >= self.set.words.len() {
                return None;
            }
            self.bits = self.set.words[self.word];
        }
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
