//! In-place fast Walsh–Hadamard transform in natural (Sylvester) order.
//!
//! `fwht(x)` computes `y[i] = sum_j (-1)^{popcount(i & j)} x[j]` without
//! normalization; applying it twice multiplies by the length.

/// Unnormalized transform. Panics if the length is not a power of two.
///
/// Stages are fused in pairs (radix 4) to halve the passes over memory.
pub fn fwht(data: &mut [f64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fwht length {n} is not a power of two");
    let mut h = 1;
    while 4 * h <= n {
        for block in data.chunks_exact_mut(4 * h) {
            let (a, rest) = block.split_at_mut(h);
            let (b, rest) = rest.split_at_mut(h);
            let (c, d) = rest.split_at_mut(h);
            for i in 0..h {
                let (s0, d0) = (a[i] + b[i], a[i] - b[i]);
                let (s1, d1) = (c[i] + d[i], c[i] - d[i]);
                a[i] = s0 + s1;
                b[i] = d0 + d1;
                c[i] = s0 - s1;
                d[i] = d0 - d1;
            }
        }
        h *= 4;
    }
    if h < n {
        let (lo, hi) = data.split_at_mut(h);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x + y;
            *b = x - y;
        }
    }
}

/// Inverse transform (forward transform scaled by `1/len`).
pub fn ifwht(data: &mut [f64]) {
    fwht(data);
    let scale = 1.0 / data.len() as f64;
    for x in data.iter_mut() {
        *x *= scale;
    }
}

/// Sylvester–Hadamard entry `(-1)^{popcount(row & col)}`.
#[inline]
pub fn hadamard_sign(row: usize, col: usize) -> f64 {
    if (row & col).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
