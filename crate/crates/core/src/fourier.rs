//! Radix-2 discrete Fourier transforms on uniform circle grids.
//!
//! Convention: for samples `x_j = f(e^{iθ_j})`, `θ_j = 2πj/n`, the mode
//! coefficient `c_m` of `f = Σ c_m e^{imθ}` is `X_m / n` where
//! `X_m = Σ_j x_j e^{-2πi jm/n}`. Mode `m` lives at index `m mod n`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::C64;

fn bit_reverse(data: &mut [C64]) {
    let n = data.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
}

fn transform(data: &mut [C64], sign: f64) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    bit_reverse(data);
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        let twiddles: Vec<C64> = (0..half)
            .map(|k| {
                let a = ang * k as f64;
                C64::new(a.cos(), a.sin())
            })
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = data[start + k];
                let v = data[start + k + half] * twiddles[k];
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// In-place forward transform, `X_m = Σ x_j e^{-2πi jm/n}`.
pub fn fft(data: &mut [C64]) {
    transform(data, -1.0);
}

/// In-place inverse transform including the `1/n` factor.
pub fn ifft(data: &mut [C64]) {
    transform(data, 1.0);
    let scale = 1.0 / data.len() as f64;
    for x in data.iter_mut() {
        *x *= scale;
    }
}

/// Mode coefficients `c_m` (indexed by `m mod n`) of boundary samples.
pub fn modes(samples: &[C64]) -> Vec<C64> {
    let mut out = samples.to_vec();
    fft(&mut out);
    let scale = 1.0 / out.len() as f64;
    for x in out.iter_mut() {
        *x *= scale;
    }
    out
}

/// Samples on the grid of a mode table produced by [`modes`].
pub fn synthesize(modes: &[C64]) -> Vec<C64> {
    let mut out: Vec<C64> = modes.iter().map(|c| c * modes.len() as f64).collect();
    ifft(&mut out);
    out
}

/// Coefficient of `e^{imθ}` in a mode table of length `n`.
pub fn mode(table: &[C64], m: isize) -> C64 {
    let n = table.len() as isize;
    table[m.rem_euclid(n) as usize]
}

/// Signed mode number stored at index `idx` of a length-`n` table, in `(-n/2, n/2]`.
pub fn signed_mode(idx: usize, n: usize) -> isize {
    if idx <= n / 2 {
        idx as isize
    } else {
        idx as isize - n as isize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|m| {
                x.iter().enumerate().fold(C64::new(0.0, 0.0), |acc, (j, v)| {
                    let a = -2.0 * PI * (j * m) as f64 / n as f64;
                    acc + v * C64::new(a.cos(), a.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<C64> = (0..16)
            .map(|j| C64::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let mut y = x.clone();
        fft(&mut y);
        for (a, b) in y.iter().zip(naive(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
        ifft(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_mode_lands_in_its_slot() {
        let n = 32;
        let samples: Vec<C64> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                C64::new((-3.0 * t).cos(), (-3.0 * t).sin()) * 2.5
            })
            .collect();
        let table = modes(&samples);
        assert!((mode(&table, -3) - C64::new(2.5, 0.0)).norm() < 1e-13);
        assert_eq!(signed_mode(29, 32), -3);
        assert_eq!(signed_mode(16, 32), 16);
    }
}
