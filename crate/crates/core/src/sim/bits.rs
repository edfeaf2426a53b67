//! Dense bit sets and symmetric bit matrices.

/// A fixed-size bit set over `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Symmetric `n x n` bit matrix with zero diagonal, stored row-major with
/// both triangles kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let stride = n.div_ceil(64);
        BitMatrix {
            n,
            stride,
            words: vec![0; n * stride],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.words[i * self.stride + (j >> 6)] >> (j & 63) & 1 == 1
    }

    #[inline]
    fn put(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.words[i * self.stride + (j >> 6)];
        let mask = 1u64 << (j & 63);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Sets entry `(i, j)` and its mirror. Returns whether the value changed.
    /// Diagonal writes are ignored.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) -> bool {
        if i == j || self.get(i, j) == value {
            return false;
        }
        self.put(i, j, value);
        self.put(j, i, value);
        true
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.stride..(i + 1) * self.stride]
    }

    /// `|row(i) ∩ set|`.
    pub fn row_count_in(&self, i: usize, set: &BitSet) -> usize {
        self.row(i)
            .iter()
            .zip(set.words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Indices `j` with `(i, j)` set and `j` in `set`.
    pub fn row_iter_in<'a>(&'a self, i: usize, set: &'a BitSet) -> impl Iterator<Item = usize> + 'a {
        self.row(i).iter().zip(set.words()).enumerate().flat_map(|(w, (a, b))| {
            let mut bits = a & b;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }

    /// Number of set entries above the diagonal.
    pub fn edge_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    /// `M[i][j] = self[order[i]][order[j]]`.
    pub fn permuted(&self, order: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::new(self.n);
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                if self.get(i, j) {
                    out.put(a, b, true);
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| !self.get(i, i) && (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_is_symmetric_and_reports_changes() {
        let mut m = BitMatrix::new(70);
        assert!(m.set(3, 66, true));
        assert!(!m.set(66, 3, true));
        assert!(m.get(66, 3));
        assert!(!m.set(5, 5, true));
        assert_eq!(m.edge_count(), 1);
        assert!(m.is_symmetric());
        let mut s = BitSet::new(70);
        s.set(66, true);
        s.set(10, true);
        assert_eq!(m.row_count_in(3, &s), 1);
        assert_eq!(m.row_iter_in(3, &s).collect::<Vec<_>>(), vec![66]);
    }
}
