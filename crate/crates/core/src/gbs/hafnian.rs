use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest matrix dimension accepted by [`hafnian`].
pub const HAFNIAN_MAX_DIM: usize = 24;

// Below this dimension the memo table is a flat vector indexed by bitmask.
const DENSE_MEMO_MAX_DIM: usize = 16;

/// Hafnian of a real symmetric matrix: the sum over all perfect matchings of
/// the index set of the product of matched entries. Diagonal entries never
/// contribute. `Haf` of the 0x0 matrix is 1.
///
/// Expands along the lowest remaining index and memoizes on the set of
/// remaining indices.
pub fn hafnian(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid(format!(
            "hafnian of a non-square {}x{} matrix",
            n,
            a.ncols()
        )));
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    if n > HAFNIAN_MAX_DIM {
        return Err(Error::TooLarge {
            what: "hafnian matrix dimension",
            size: n,
            limit: HAFNIAN_MAX_DIM,
        });
    }
    let scale = a.amax().max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::invalid(format!(
                    "hafnian input not symmetric at ({i},{j})"
                )));
            }
        }
    }
    if n == 0 {
        return Ok(1.0);
    }
    let full = (1u32 << n) - 1;
    Ok(if n <= DENSE_MEMO_MAX_DIM {
        let mut memo = DenseMemo(vec![f64::NAN; 1 << n]);
        expand(a, full, &mut memo)
    } else {
        let mut memo = SparseMemo(HashMap::new());
        expand(a, full, &mut memo)
    })
}

trait Memo {
    fn get(&self, mask: u32) -> Option<f64>;
    fn put(&mut self, mask: u32, value: f64);
}

struct DenseMemo(Vec<f64>);

impl Memo for DenseMemo {
    fn get(&self, mask: u32) -> Option<f64> {
        let v = self.0[mask as usize];
        (!v.is_nan()).then_some(v)
    }

    fn put(&mut self, mask: u32, value: f64) {
        self.0[mask as usize] = value;
    }
}

struct SparseMemo(HashMap<u32, f64>);

impl Memo for SparseMemo {
    fn get(&self, mask: u32) -> Option<f64> {
        self.0.get(&mask).copied()
    }

    fn put(&mut self, mask: u32, value: f64) {
        self.0.insert(mask, value);
    }
}

fn expand(a: &DMatrix<f64>, mask: u32, memo: &mut impl Memo) -> f64 {
    if mask == 0 {
        return 1.0;
    }
    if let Some(v) = memo.get(mask) {
        return v;
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & (mask - 1);
    let mut total = 0.0;
    let mut m = rest;
    while m != 0 {
        let j = m.trailing_zeros() as usize;
        m &= m - 1;
        let aij = a[(i, j)];
        if aij != 0.0 {
            total += aij * expand(a, rest & !(1u32 << j), memo);
        }
    }
    memo.put(mask, total);
    total
}

/// `(2n)! / (n! 2^n)`, the number of perfect matchings of the complete graph
/// on `2n` vertices, i.e. `(2n-1)!!`.
pub fn complete_graph_hafnian(n: usize) -> u64 {
    (1..=n as u64).map(|k| 2 * k - 1).product()
}
