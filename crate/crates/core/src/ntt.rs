//! Number-theoretic transform over the prime p = 2^64 − 2^32 + 1.
//!
//! p − 1 is divisible by 2^32, so power-of-two transforms up to length 2^32
//! exist. Convolution counts of indicator vectors never exceed the group
//! order (≤ 2^32 < p), hence a count is zero iff its residue is zero.

const P: u64 = 0xFFFF_FFFF_0000_0001;
// 2^64 mod p
const EPS: u64 = 0xFFFF_FFFF;
const GENERATOR: u64 = 7;
pub(crate) const MAX_LOG_LEN: u32 = 32;

#[inline]
fn reduce128(x: u128) -> u64 {
    let lo = x as u64;
    let hi = (x >> 64) as u64;
    let hi_hi = hi >> 32;
    let hi_lo = hi & EPS;
    let (mut t0, borrow) = lo.overflowing_sub(hi_hi);
    if borrow {
        t0 = t0.wrapping_sub(EPS);
    }
    let t1 = hi_lo * EPS;
    let (res, carry) = t0.overflowing_add(t1);
    let res = res.wrapping_add(EPS * carry as u64);
    if res >= P {
        res - P
    } else {
        res
    }
}

#[inline]
fn mul(a: u64, b: u64) -> u64 {
    reduce128(a as u128 * b as u128)
}

#[inline]
fn add(a: u64, b: u64) -> u64 {
    let (s, c) = a.overflowing_add(b);
    let (s2, c2) = s.overflowing_sub(P);
    if c || !c2 {
        s2
    } else {
        s
    }
}

#[inline]
fn sub(a: u64, b: u64) -> u64 {
    let (d, borrow) = a.overflowing_sub(b);
    if borrow {
        d.wrapping_add(P)
    } else {
        d
    }
}

fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    r
}

/// Primitive `len`-th root of unity (len a power of two ≤ 2^32).
fn root_of_unity(len: usize, inverse: bool) -> u64 {
    let w = pow(GENERATOR, (P - 1) / len as u64);
    if inverse {
        pow(w, P - 2)
    } else {
        w
    }
}

fn twiddles(len: usize, inverse: bool) -> Vec<u64> {
    let w = root_of_unity(len, inverse);
    let mut tw = Vec::with_capacity(len / 2);
    let mut cur = 1;
    for _ in 0..len / 2 {
        tw.push(cur);
        cur = mul(cur, w);
    }
    tw
}

/// Decimation in frequency: natural order in, bit-reversed order out.
fn forward(a: &mut [u64]) {
    let n = a.len();
    let mut len = n;
    while len >= 2 {
        let half = len / 2;
        let tw = twiddles(len, false);
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(&tw) {
                let (x, y) = (*u, *v);
                *u = add(x, y);
                *v = mul(sub(x, y), w);
            }
        }
        len = half;
    }
}

/// Decimation in time with inverse roots: bit-reversed in, natural out.
/// The result carries an extra factor `n`.
fn inverse_unscaled(a: &mut [u64]) {
    let n = a.len();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let tw = twiddles(len, true);
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(&tw) {
                let x = *u;
                let y = mul(*v, w);
                *u = add(x, y);
                *v = sub(x, y);
            }
        }
        len *= 2;
    }
}

/// Cyclic convolution of two equal, power-of-two length vectors, up to the
/// invertible factor `a.len()`. Entries are exact residues mod p.
pub(crate) fn cyclic_convolution_scaled(mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    debug_assert_eq!(a.len(), b.len());
    debug_assert!(a.len().is_power_of_two());
    if a.len() == 1 {
        return vec![mul(a[0], b[0])];
    }
    rayon::join(|| forward(&mut a), || forward(&mut b));
    for (x, y) in a.iter_mut().zip(&b) {
        *x = mul(*x, *y);
    }
    inverse_unscaled(&mut a);
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_arithmetic() {
        assert_eq!(mul(P - 1, P - 1), 1);
        assert_eq!(add(P - 1, 1), 0);
        assert_eq!(sub(0, 1), P - 1);
        assert_eq!(reduce128(u128::MAX) as u128, u128::MAX % P as u128);
        let w = root_of_unity(1 << 32, false);
        assert_eq!(pow(w, 1 << 32), 1);
        assert_ne!(pow(w, 1 << 31), 1);
    }

    #[test]
    fn matches_schoolbook_cyclic_convolution() {
        let n = 16;
        let a: Vec<u64> = (0..n as u64).map(|i| (i * 7 + 3) % 5).collect();
        let b: Vec<u64> = (0..n as u64).map(|i| (i * i + 1) % 4).collect();
        let mut want = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                want[(i + j) % n] += a[i] * b[j];
            }
        }
        let got = cyclic_convolution_scaled(a, b);
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(*g, mul(*w, n as u64));
        }
    }
}
