//! Ground sets, subset states and the single-step moves every chain uses.
//!
//! Elements are 0-based inside the library. Anything that crosses a file or
//! command-line boundary is 1-based; see [`Subset::to_one_based`] and
//! [`Subset::from_one_based`].

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// The ground set `V = {1, ..., n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("ground set must have at least one element".into()));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a ground set has at least one element.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn empty_subset(&self) -> Subset {
        Subset::empty(self.n)
    }

    pub fn full_subset(&self) -> Subset {
        Subset::from_indices(self.n, 0..self.n)
    }
}

/// A subset of the ground set, stored as a fixed-width bit vector with a
/// cached cardinality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    words: Box<[u64]>,
    n: usize,
    len: usize,
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        let nwords = n.div_ceil(WORD_BITS).max(1);
        Self { words: vec![0; nwords].into_boxed_slice(), n, len: 0 }
    }

    /// Builds a subset from 0-based indices. Duplicates are ignored.
    ///
    /// Panics if an index is out of range.
    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Self {
        let mut s = Self::empty(n);
        for i in indices {
            assert!(i < n, "element index {i} out of range for ground set of size {n}");
            s.set(i);
        }
        s
    }

    /// Builds a subset from 1-based element labels.
    pub fn from_one_based(n: usize, labels: &[usize]) -> Result<Self> {
        let mut s = Self::empty(n);
        for &label in labels {
            if label == 0 || label > n {
                return Err(Error::InvalidInput(format!(
                    "element {label} outside ground set 1..={n}"
                )));
            }
            s.set(label - 1);
        }
        Ok(s)
    }

    /// Interprets the low `n` bits of `mask` as membership flags.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= WORD_BITS, "mask form supports at most 64 elements");
        let mut s = Self::empty(n);
        let mask = if n == WORD_BITS { mask } else { mask & ((1u64 << n) - 1) };
        s.words[0] = mask;
        s.len = mask.count_ones() as usize;
        s
    }

    /// Membership bits as an integer; only defined for `n <= 64`.
    pub fn to_mask(&self) -> u64 {
        assert!(self.n <= WORD_BITS, "mask form supports at most 64 elements");
        self.words[0]
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        let w = &mut self.words[i / WORD_BITS];
        let bit = 1u64 << (i % WORD_BITS);
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
        }
    }

    fn clear(&mut self, i: usize) {
        let w = &mut self.words[i / WORD_BITS];
        let bit = 1u64 << (i % WORD_BITS);
        if *w & bit != 0 {
            *w &= !bit;
            self.len -= 1;
        }
    }

    /// Members in increasing order (0-based).
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    /// Non-members in increasing order (0-based).
    pub fn complement_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| !self.contains(i))
    }

    /// The `idx`-th member in increasing order.
    pub fn nth_member(&self, idx: usize) -> Option<usize> {
        let mut remaining = idx;
        for (wi, &w) in self.words.iter().enumerate() {
            let c = w.count_ones() as usize;
            if remaining < c {
                let mut bits = w;
                for _ in 0..remaining {
                    bits &= bits - 1;
                }
                return Some(wi * WORD_BITS + bits.trailing_zeros() as usize);
            }
            remaining -= c;
        }
        None
    }

    /// The `idx`-th non-member in increasing order.
    pub fn nth_non_member(&self, idx: usize) -> Option<usize> {
        let mut remaining = idx;
        for (wi, &w) in self.words.iter().enumerate() {
            let width = (self.n - wi * WORD_BITS).min(WORD_BITS);
            let valid = if width == WORD_BITS { u64::MAX } else { (1u64 << width) - 1 };
            let free = !w & valid;
            let c = free.count_ones() as usize;
            if remaining < c {
                let mut bits = free;
                for _ in 0..remaining {
                    bits &= bits - 1;
                }
                return Some(wi * WORD_BITS + bits.trailing_zeros() as usize);
            }
            remaining -= c;
        }
        None
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        self.combine(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Subset) -> Subset {
        self.combine(other, |a, b| a | b)
    }

    pub fn symmetric_difference_len(&self, other: &Subset) -> usize {
        self.words.iter().zip(other.words.iter()).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    fn combine(&self, other: &Subset, f: impl Fn(u64, u64) -> u64) -> Subset {
        assert_eq!(self.n, other.n, "subsets over different ground sets");
        let words: Box<[u64]> = self.words.iter().zip(other.words.iter()).map(|(&a, &b)| f(a, b)).collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        Subset { words, n: self.n, len }
    }

    /// Recomputes the cardinality from the bit vector.
    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Applies a move in place. Returns a contract error if the move's
    /// preconditions do not hold, leaving `self` untouched.
    pub fn apply_in_place(&mut self, mv: Move) -> Result<()> {
        self.check_move(mv)?;
        match mv {
            Move::Add(u) => self.set(u),
            Move::Delete(u) => self.clear(u),
            Move::Exchange { out, into } => {
                self.clear(out);
                self.set(into);
            }
            Move::Hold => {}
        }
        Ok(())
    }

    fn check_move(&self, mv: Move) -> Result<()> {
        let in_range = |u: usize| -> Result<()> {
            if u >= self.n {
                Err(Error::Contract(format!("element index {u} out of range for ground set of size {}", self.n)))
            } else {
                Ok(())
            }
        };
        match mv {
            Move::Add(u) => {
                in_range(u)?;
                if self.contains(u) {
                    return Err(Error::Contract(format!("add of element {} already in subset", u + 1)));
                }
            }
            Move::Delete(u) => {
                in_range(u)?;
                if !self.contains(u) {
                    return Err(Error::Contract(format!("delete of element {} not in subset", u + 1)));
                }
            }
            Move::Exchange { out, into } => {
                in_range(out)?;
                in_range(into)?;
                if !self.contains(out) || self.contains(into) {
                    return Err(Error::Contract(format!(
                        "exchange requires {} in subset and {} outside",
                        out + 1,
                        into + 1
                    )));
                }
            }
            Move::Hold => {}
        }
        Ok(())
    }
}

/// Returns a new subset with `mv` applied; `s` is left unchanged.
pub fn apply_move(s: &Subset, mv: Move) -> Result<Subset> {
    let mut t = s.clone();
    t.apply_in_place(mv)?;
    Ok(t)
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// Sorted 1-based labels joined by `;`, empty for the empty set.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

impl Subset {
    /// Parses the `;`-joined 1-based form written by `Display`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::empty(n));
        }
        let labels = text
            .split(';')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad element label {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(n, &labels)
    }
}

/// A move on the chain state. Element indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Add(usize),
    Delete(usize),
    Exchange { out: usize, into: usize },
    Hold,
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::Add(_) => MoveKind::Add,
            Move::Delete(_) => MoveKind::Delete,
            Move::Exchange { .. } => MoveKind::Exchange,
            Move::Hold => MoveKind::Hold,
        }
    }

    pub fn inverse(&self) -> Move {
        match *self {
            Move::Add(u) => Move::Delete(u),
            Move::Delete(u) => Move::Add(u),
            Move::Exchange { out, into } => Move::Exchange { out: into, into: out },
            Move::Hold => Move::Hold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Add,
    Delete,
    Exchange,
    Hold,
}

impl MoveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::Add => "add",
            MoveKind::Delete => "delete",
            MoveKind::Exchange => "exchange",
            MoveKind::Hold => "hold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "add" => Some(MoveKind::Add),
            "delete" => Some(MoveKind::Delete),
            "exchange" => Some(MoveKind::Exchange),
            "hold" => Some(MoveKind::Hold),
            _ => None,
        }
    }
}
