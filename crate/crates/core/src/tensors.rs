//! Dense complex arrays indexed by complexified frame vectors.
//!
//! Frame index convention used throughout the crate: for half-dimension `n`,
//! index `u < n` is `d/dz_u` and index `n + j` is `d/dzbar_j`.

use num_complex::Complex64;
use serde::Serialize;
use std::ops::{Index, IndexMut};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameIdx {
    pub n: usize,
}

impl FrameIdx {
    pub fn z(&self, j: usize) -> usize {
        j
    }
    pub fn zb(&self, j: usize) -> usize {
        self.n + j
    }
    /// Index of the complex-conjugate frame vector.
    pub fn conj(&self, u: usize) -> usize {
        if u < self.n {
            u + self.n
        } else {
            u - self.n
        }
    }
    pub fn dim(&self) -> usize {
        2 * self.n
    }
}

macro_rules! complex_array {
    ($name:ident, $rank:literal) => {
        #[derive(Clone, Debug, PartialEq, Serialize)]
        pub struct $name {
            pub dim: usize,
            pub data: Vec<Complex64>,
        }

        impl $name {
            pub fn zeros(dim: usize) -> Self {
                $name {
                    dim,
                    data: vec![Complex64::new(0.0, 0.0); dim.pow($rank)],
                }
            }

            fn offset(&self, idx: [usize; $rank]) -> usize {
                idx.iter().fold(0, |acc, &i| {
                    debug_assert!(i < self.dim);
                    acc * self.dim + i
                })
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
            }

            pub fn indices(&self) -> impl Iterator<Item = [usize; $rank]> + '_ {
                let d = self.dim;
                (0..d.pow($rank)).map(move |mut flat| {
                    let mut idx = [0usize; $rank];
                    for slot in idx.iter_mut().rev() {
                        *slot = flat % d;
                        flat /= d;
                    }
                    idx
                })
            }
        }

        impl Index<[usize; $rank]> for $name {
            type Output = Complex64;
            fn index(&self, idx: [usize; $rank]) -> &Complex64 {
                &self.data[self.offset(idx)]
            }
        }

        impl IndexMut<[usize; $rank]> for $name {
            fn index_mut(&mut self, idx: [usize; $rank]) -> &mut Complex64 {
                let o = self.offset(idx);
                &mut self.data[o]
            }
        }
    };
}

complex_array!(Tensor3, 3);
complex_array!(Tensor4, 4);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let mut t = Tensor4::zeros(3);
        t[[2, 0, 1, 2]] = Complex64::new(1.0, -2.0);
        assert_eq!(t[[2, 0, 1, 2]], Complex64::new(1.0, -2.0));
        assert_eq!(t.indices().count(), 81);
        let hit: Vec<_> = t.indices().filter(|&i| t[i].norm() > 0.0).collect();
        assert_eq!(hit, vec![[2, 0, 1, 2]]);
        let f = FrameIdx { n: 2 };
        assert_eq!(f.conj(f.z(1)), f.zb(1));
        assert_eq!(f.conj(f.zb(0)), 0);
    }
}
