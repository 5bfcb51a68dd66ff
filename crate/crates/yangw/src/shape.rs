//! Block shapes `q_1 >= ... >= q_l`, their column/row coordinates and the scalar families built on them.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::ParamScalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("shape must be nonempty")]
    Empty,
    #[error("block sizes must be positive")]
    ZeroBlock,
    #[error("block sizes must be weakly decreasing, got {0:?}")]
    NotDecreasing(Vec<usize>),
    #[error("index {0} out of range 1..={1}")]
    OutOfRange(usize, usize),
    #[error("cannot parse shape {0:?}")]
    Parse(String),
    #[error("rank {0} is below 3")]
    RankTooSmall(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockShape {
    q: Vec<usize>,
    n_total: usize,
    col: Vec<usize>,
    row: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockShape {
    pub fn new(q: &[usize]) -> Result<Self, ShapeError> {
        if q.is_empty() {
            return Err(ShapeError::Empty);
        }
        if q.iter().any(|&x| x == 0) {
            return Err(ShapeError::ZeroBlock);
        }
        if q.windows(2).any(|w| w[0] < w[1]) {
            return Err(ShapeError::NotDecreasing(q.to_vec()));
        }
        let mut offsets = Vec::with_capacity(q.len());
        let mut col = Vec::new();
        let mut row = Vec::new();
        let mut acc = 0;
        for (b, &size) in q.iter().enumerate() {
            offsets.push(acc);
            for r in 1..=size {
                col.push(b + 1);
                row.push(r);
            }
            acc += size;
        }
        Ok(BlockShape { q: q.to_vec(), n_total: acc, col, row, offsets })
    }

    pub fn q(&self) -> &[usize] {
        &self.q
    }

    /// Block size `q_b`, 1-based.
    pub fn q_at(&self, b: usize) -> usize {
        self.q[b - 1]
    }

    pub fn l(&self) -> usize {
        self.q.len()
    }

    #[allow(non_snake_case)]
    pub fn N(&self) -> usize {
        self.n_total
    }

    /// Smallest block size `q_l`.
    pub fn q_last(&self) -> usize {
        *self.q.last().expect("nonempty")
    }

    pub fn col(&self, i: usize) -> usize {
        self.col[i - 1]
    }

    pub fn row(&self, i: usize) -> usize {
        self.row[i - 1]
    }

    /// Index with block coordinates `(col, row)`, if the block has that row.
    pub fn index(&self, col: usize, row: usize) -> Option<usize> {
        if col == 0 || col > self.l() || row == 0 || row > self.q_at(col) {
            return None;
        }
        Some(self.offsets[col - 1] + row)
    }

    pub fn hat(&self, i: usize) -> Option<usize> {
        self.index(self.col(i) + 1, self.row(i))
    }

    pub fn tilde(&self, j: usize) -> Option<usize> {
        let c = self.col(j);
        if c == 1 {
            None
        } else {
            self.index(c - 1, self.row(j))
        }
    }

    /// Pairs `(hat(j), j)` making up the nilpotent element.
    pub fn nilpotent_f(&self) -> Vec<(usize, usize)> {
        (1..=self.n_total).filter_map(|j| self.hat(j).map(|h| (h, j))).collect()
    }

    /// Column grading `col(j) - col(i)`.
    pub fn degree(&self, i: usize, j: usize) -> i64 {
        self.col(j) as i64 - self.col(i) as i64
    }

    fn check_block(&self, v: usize) -> Result<(), ShapeError> {
        if v == 0 || v > self.l() {
            Err(ShapeError::OutOfRange(v, self.l()))
        } else {
            Ok(())
        }
    }

    /// `alpha_v = k + N - q_v`.
    pub fn alpha(&self, v: usize) -> Result<ParamScalar, ShapeError> {
        self.check_block(v)?;
        Ok(ParamScalar::k().add(&ParamScalar::int(self.n_total as i64 - self.q_at(v) as i64)))
    }

    /// `gamma_a = sum_{u > a} alpha_u`.
    pub fn gamma(&self, a: usize) -> Result<ParamScalar, ShapeError> {
        self.check_block(a)?;
        let mut acc = ParamScalar::zero();
        for u in a + 1..=self.l() {
            acc = acc.add(&self.alpha(u)?);
        }
        Ok(acc)
    }

    /// Evaluation shift of leg `i`: `-hbar * gamma_i`.
    pub fn shift_a(&self, i: usize) -> Result<ParamScalar, ShapeError> {
        Ok(self.gamma(i)?.mul(&ParamScalar::hbar()).neg())
    }

    /// The summand read literally as `k + N - q_i`, repeated `l - i` times.
    pub fn shift_a_literal(&self, i: usize) -> Result<ParamScalar, ShapeError> {
        let a = self.alpha(i)?;
        Ok(a.mul_int((self.l() - i) as i64).mul(&ParamScalar::hbar()).neg())
    }

    /// Indices `1..=N` with the given row and column.
    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_total
    }
}

impl fmt::Display for BlockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.q.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for BlockShape {
    type Err = ShapeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let q: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
        BlockShape::new(&q.map_err(|_| ShapeError::Parse(s.to_string()))?)
    }
}

/// Which entry to use at the corner pair `(0, n-1)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CartanReading {
    /// `+1` at `(0, n-1)` and `(n-1, 0)`, as displayed.
    Displayed,
    /// Cyclic adjacency: `-1` at the corner pair.
    Cyclic,
}

pub fn cartan(n: usize) -> Result<Vec<Vec<i64>>, ShapeError> {
    cartan_with(n, CartanReading::Displayed)
}

pub fn cartan_with(n: usize, reading: CartanReading) -> Result<Vec<Vec<i64>>, ShapeError> {
    if n < 3 {
        return Err(ShapeError::RankTooSmall(n));
    }
    let corner = match reading {
        CartanReading::Displayed => 1,
        CartanReading::Cyclic => -1,
    };
    let mut a = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = if i == j {
                2
            } else if j + 1 == i || i + 1 == j {
                -1
            } else if (i, j) == (0, n - 1) || (i, j) == (n - 1, 0) {
                corner
            } else {
                0
            };
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn col_row_small() {
        let s = BlockShape::new(&[2, 1]).unwrap();
        assert_eq!((1..=3).map(|i| s.col(i)).collect::<Vec<_>>(), vec![1, 1, 2]);
        assert_eq!((1..=3).map(|i| s.row(i)).collect::<Vec<_>>(), vec![1, 2, 1]);
        assert_eq!(s.hat(1), Some(3));
        assert_eq!(s.hat(2), None);
        assert_eq!(s.tilde(3), Some(1));
        assert_eq!(s.nilpotent_f(), vec![(3, 1)]);
    }

    #[test]
    fn rejects_increasing() {
        assert!(matches!(BlockShape::new(&[3, 1, 2]), Err(ShapeError::NotDecreasing(_))));
        assert_eq!(BlockShape::new(&[4, 3, 3]).unwrap().N(), 10);
    }

    #[test]
    fn scalars() {
        let s = BlockShape::new(&[4, 3, 3]).unwrap();
        assert_eq!(s.alpha(1).unwrap(), ParamScalar::parse("k+6").unwrap());
        assert_eq!(s.gamma(1).unwrap(), ParamScalar::parse("2*k+14").unwrap());
        assert!(s.gamma(3).unwrap().is_zero());
        let t = BlockShape::new(&[4, 3]).unwrap();
        assert_eq!(t.shift_a(1).unwrap(), ParamScalar::parse("-hbar*(k+4)").unwrap());
        assert!(t.shift_a(2).unwrap().is_zero());
        assert!(s.alpha(4).is_err());
    }

    #[test]
    fn cartan_entries() {
        let a = cartan(3).unwrap();
        assert_eq!(a[0][2], 1);
        assert_eq!(a[0][0], 2);
        assert_eq!(cartan(4).unwrap()[0][2], 0);
        assert_eq!(cartan_with(3, CartanReading::Cyclic).unwrap()[0][2], -1);
        assert!(cartan(2).is_err());
    }

    #[test]
    fn single_block_has_no_nilpotent() {
        assert!(BlockShape::new(&[3]).unwrap().nilpotent_f().is_empty());
        assert_eq!(BlockShape::new(&[1, 1]).unwrap().nilpotent_f(), vec![(2, 1)]);
    }
}
