//! Square boolean matrices over the (OR, AND) semiring, stored as bitset
//! rows. Used for pattern-level reasoning: irreducibility, primitivity and
//! reachability closures.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BitMatrix {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "empty boolean matrix");
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.rows[i * self.words + j / 64] |= 1u64 << (j % 64);
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] & (1u64 << (j % 64)) != 0
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub fn or_identity(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.set(i, i);
        }
        out
    }

    /// Boolean matrix product: `out[i][j] = OR_k (self[i][k] AND rhs[k][j])`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for w in 0..self.words {
                let mut bits = self.row(i)[w];
                while bits != 0 {
                    let k = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let dst = i * self.words;
                    for (word, &src) in rhs.row(k).iter().enumerate() {
                        out.rows[dst + word] |= src;
                    }
                }
            }
        }
        out
    }

    /// Boolean power by repeated squaring.
    pub fn pow(&self, mut e: u64) -> Self {
        assert!(e >= 1, "pow exponent must be positive");
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        acc.expect("exponent was at least one")
    }

    pub fn is_all_ones(&self) -> bool {
        let tail_bits = self.n % 64;
        let full_mask = u64::MAX;
        let tail_mask = if tail_bits == 0 {
            full_mask
        } else {
            (1u64 << tail_bits) - 1
        };
        for i in 0..self.n {
            let row = self.row(i);
            for (w, &word) in row.iter().enumerate() {
                let mask = if w + 1 == self.words {
                    tail_mask
                } else {
                    full_mask
                };
                if word & mask != mask {
                    return false;
                }
            }
        }
        true
    }

    /// Reflexive-transitive closure: `(I | M)^k` saturates for `k >= n - 1`.
    pub fn reachability_closure(&self) -> Self {
        let mut acc = self.or_identity();
        let mut reach = 1usize;
        while reach < self.n.saturating_sub(1) {
            acc = acc.mul(&acc);
            reach *= 2;
        }
        acc
    }
}

/// Irreducibility of a nonnegative pattern: `(I + M)^{n-1}` is entrywise
/// positive over the boolean semiring.
pub(crate) fn pattern_irreducible(pattern: &BitMatrix) -> bool {
    pattern.reachability_closure().is_all_ones()
}

/// Primitivity via the Wielandt exponent: some power `M^k` with
/// `k <= n^2 - 2n + 2` is entrywise positive, and positivity of powers is
/// monotone once reached, so checking the bound itself suffices.
pub(crate) fn pattern_primitive(pattern: &BitMatrix) -> bool {
    let n = pattern.dim() as u64;
    let wielandt = n * n - 2 * n + 2;
    pattern.pow(wielandt.max(1)).is_all_ones()
}
