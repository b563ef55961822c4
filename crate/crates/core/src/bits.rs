//! Computational-basis bookkeeping.
//!
//! A basis index `b` of an `n`-qubit register stores site 1 in the most
//! significant bit, so `|q1 q2 ... qn>` reads left to right as the binary
//! digits of `b`. Every module goes through [`site_bit`].

use crate::{Error, Result};

/// Value (0 or 1) of `site` (0-based, site 0 is qubit 1) in basis index `index`.
#[inline]
pub fn site_bit(index: usize, site: usize, n: usize) -> usize {
    debug_assert!(site < n);
    (index >> (n - 1 - site)) & 1
}

/// Bit mask selecting `site` (0-based) in a basis index.
#[inline]
pub fn site_mask(site: usize, n: usize) -> usize {
    1 << (n - 1 - site)
}

/// Magnetization without range checks: `(#zeros) - (#ones)`.
#[inline]
pub fn magnetization_unchecked(index: usize, n: usize) -> i32 {
    n as i32 - 2 * index.count_ones() as i32
}

/// Magnetization `m = 2n_up - N` of basis ket `index`, with `|0>` counted as up.
pub fn magnetization(index: usize, n: usize) -> Result<i32> {
    check_index(index, n)?;
    Ok(magnetization_unchecked(index, n))
}

/// Number of sites at which two basis kets differ.
pub fn hamming(i: usize, j: usize, n: usize) -> Result<u32> {
    check_index(i, n)?;
    check_index(j, n)?;
    Ok((i ^ j).count_ones())
}

/// Parse a ket label such as `"0110"` into a basis index.
pub fn index_of(label: &str) -> Result<usize> {
    if label.is_empty() || !label.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::InvalidParameter(format!("bad ket label {label:?}")));
    }
    Ok(label
        .bytes()
        .fold(0usize, |acc, b| (acc << 1) | usize::from(b == b'1')))
}

fn check_index(index: usize, n: usize) -> Result<()> {
    if n >= usize::BITS as usize || index >= (1usize << n) {
        Err(Error::IndexOutOfRange { index, n })
    } else {
        Ok(())
    }
}
