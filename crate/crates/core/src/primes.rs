//! Lazily grown prime table shared by every prime-frequency series.
//!
//! The table holds the first `len` primes and is extended by a segmented
//! sieve whenever an index beyond it is requested. Growth is monotone; readers
//! never observe a shrinking table.

use alloc::vec;
use alloc::vec::Vec;

use spin::RwLock;

static PRIMES: RwLock<Vec<u32>> = RwLock::new(Vec::new());

const SEGMENT: usize = 1 << 18;

/// Upper bound for the n-th prime (Rosser–Schoenfeld for n ≥ 6).
fn nth_prime_upper_bound(n: u64) -> u64 {
    if n < 6 {
        return 15;
    }
    let x = n as f64;
    let ln = libm::log(x);
    (x * (ln + libm::log(ln))) as u64 + 10
}

/// Odd-only segmented sieve of Eratosthenes on `[lo, hi)`, pushing primes to `out`.
fn sieve_segmented(lo: u64, hi: u64, out: &mut Vec<u32>) {
    let hi = hi.min(u32::MAX as u64);
    if hi <= lo {
        return;
    }
    let root = libm::sqrt(hi as f64) as u64 + 1;
    let base = simple_sieve(root);
    if lo <= 2 && hi > 2 {
        out.push(2);
    }
    let mut seg_lo = lo.max(3);
    if seg_lo % 2 == 0 {
        seg_lo += 1;
    }
    let mut flags = vec![true; SEGMENT];
    while seg_lo < hi {
        // odd numbers seg_lo, seg_lo + 2, ...
        let seg_hi = (seg_lo + 2 * SEGMENT as u64).min(hi);
        let count = ((seg_hi - seg_lo) as usize).div_ceil(2);
        flags[..count].fill(true);
        for &p in base.iter().skip(1) {
            let p = p as u64;
            if p * p >= seg_hi {
                break;
            }
            let mut start = (p * p).max(seg_lo.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut m = start;
            while m < seg_hi {
                flags[((m - seg_lo) / 2) as usize] = false;
                m += 2 * p;
            }
        }
        for (i, &is_prime) in flags[..count].iter().enumerate() {
            let v = seg_lo + 2 * i as u64;
            if is_prime && v > 1 {
                out.push(v as u32);
            }
        }
        seg_lo = seg_hi + (seg_hi % 2 == 0) as u64;
    }
}

fn simple_sieve(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    let mut is = vec![true; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if is[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                is[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Makes sure at least `count` primes are cached.
pub fn ensure(count: u64) {
    if (PRIMES.read().len() as u64) >= count {
        return;
    }
    let mut table = PRIMES.write();
    if (table.len() as u64) >= count {
        return;
    }
    let target = count.max(2 * table.len() as u64).max(1024);
    let lo = table.last().map_or(0, |&p| p as u64 + 1);
    let mut hi = nth_prime_upper_bound(target).max(lo + 64);
    loop {
        sieve_segmented(lo.max(table.last().map_or(0, |&p| p as u64 + 1)), hi, &mut table);
        if (table.len() as u64) >= count {
            break;
        }
        hi *= 2;
    }
}

/// The n-th prime, 1-based (`nth_prime(1) == 2`).
pub fn nth_prime(n: u64) -> u64 {
    debug_assert!(n >= 1);
    {
        let table = PRIMES.read();
        if let Some(&p) = table.get((n - 1) as usize) {
            return p as u64;
        }
    }
    ensure(n);
    PRIMES.read()[(n - 1) as usize] as u64
}

/// Runs `f` on the cached slice of the first `count` primes.
pub fn with_primes<R>(count: u64, f: impl FnOnce(&[u32]) -> R) -> R {
    ensure(count);
    let table = PRIMES.read();
    f(&table[..count as usize])
}

/// Number of primes `≤ x`, extending the cache as needed.
pub fn prime_pi(x: u64) -> u64 {
    if x < 2 {
        return 0;
    }
    loop {
        {
            let table = PRIMES.read();
            if let Some(&last) = table.last() {
                if last as u64 > x {
                    return table.partition_point(|&p| (p as u64) <= x) as u64;
                }
            }
        }
        let len = PRIMES.read().len() as u64;
        ensure((2 * len).max(1024));
    }
}

/// Möbius function by trial division.
pub fn mobius(mut k: u64) -> i8 {
    if k == 1 {
        return 1;
    }
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= k {
        if k % p == 0 {
            k /= p;
            if k % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if k > 1 {
        sign = -sign;
    }
    sign
}
