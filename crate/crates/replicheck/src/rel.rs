//! Dense binary relations over at most 64 elements, as one bitmask row per
//! source element. Event counts are small (bounded by the enumeration cap
//! and k × labels), so this stays comfortably within one word per row.

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Rel {
    n: usize,
    rows: Vec<u64>,
}

impl Rel {
    pub fn new(n: usize) -> Rel {
        assert!(n <= 64, "relation domain too large: {n}");
        Rel { n, rows: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add(&mut self, a: usize, b: usize) {
        self.rows[a] |= 1 << b;
    }

    pub fn has(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    pub fn row(&self, a: usize) -> u64 {
        self.rows[a]
    }

    pub fn or_row(&mut self, a: usize, bits: u64) {
        self.rows[a] |= bits;
    }

    /// Grows the domain to `n`, keeping existing pairs.
    pub fn grow(&mut self, n: usize) {
        assert!(n >= self.n && n <= 64);
        self.n = n;
        self.rows.resize(n, 0);
    }

    pub fn union_with(&mut self, other: &Rel) {
        assert_eq!(self.n, other.n);
        for (r, o) in self.rows.iter_mut().zip(&other.rows) {
            *r |= o;
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |a| {
            let mut bits = self.rows[a];
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(b)
            })
            .map(move |b| (a, b))
        })
    }

    /// In-place transitive closure (Warshall over bitmask rows).
    pub fn close_transitive(&mut self) {
        loop {
            let mut changed = false;
            for a in 0..self.n {
                let mut acc = self.rows[a];
                let mut bits = self.rows[a];
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    acc |= self.rows[b];
                }
                if acc != self.rows[a] {
                    self.rows[a] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.n).all(|a| !self.has(a, a))
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.n).all(|a| {
            (0..self.n).all(|b| a == b || !(self.has(a, b) && self.has(b, a)))
        })
    }

    /// Acyclicity of the relation viewed as a digraph.
    pub fn is_acyclic(&self) -> bool {
        let mut c = self.clone();
        c.close_transitive();
        c.is_irreflexive()
    }
}
