//! Mixed-radix indexing of tuples over finite alphabets.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    count: usize,
}

impl Radix {
    /// Last position varies fastest.
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut strides = vec![0; sizes.len()];
        let mut acc = 1usize;
        for i in (0..sizes.len()).rev() {
            strides[i] = acc;
            acc = acc
                .checked_mul(sizes[i])
                .expect("tuple space size overflows usize");
        }
        Self {
            sizes,
            strides,
            count: acc,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Number of tuples (1 for the empty tuple).
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.sizes.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        self.decode_into(&mut index, &mut out);
        out
    }

    pub fn decode_into(&self, index: &mut usize, out: &mut [usize]) {
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = *index / s;
            *index %= s;
        }
    }

    pub fn digit(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.sizes[pos]
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.count).map(move |i| self.decode(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let r = Radix::new(vec![2, 3, 1, 4]);
        assert_eq!(r.count(), 24);
        for i in 0..r.count() {
            let d = r.decode(i);
            assert_eq!(r.encode(&d), i);
            for (p, &digit) in d.iter().enumerate() {
                assert_eq!(r.digit(i, p), digit);
            }
        }
        assert_eq!(r.decode(1), vec![0, 0, 0, 1]);
    }

    #[test]
    fn empty_tuple() {
        let r = Radix::new(vec![]);
        assert_eq!(r.count(), 1);
        assert_eq!(r.decode(0), Vec::<usize>::new());
    }
}
