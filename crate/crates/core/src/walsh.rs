//! In-place fast Walsh-Hadamard transform, unnormalized.
//!
//! `out[s] = Σ_z (-1)^{popcount(z & s)} in[z]`. Applied to the sparse Pauli-Z
//! spectrum of a diagonal operator it yields the diagonal; applied to a
//! diagonal it yields every `⟨Z_S⟩`-style correlation at once.

pub fn fwht(data: &mut [f64]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_definition() {
        let input: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut fast = input.clone();
        fwht(&mut fast);
        for s in 0..16usize {
            let slow: f64 = (0..16usize)
                .map(|z| {
                    let sign = if (z & s).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    sign * input[z]
                })
                .sum();
            assert!((slow - fast[s]).abs() < 1e-12);
        }
    }

    #[test]
    fn involution_up_to_scale() {
        let mut v: Vec<f64> = (0..8).map(|k| k as f64 - 2.5).collect();
        let orig = v.clone();
        fwht(&mut v);
        fwht(&mut v);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a / 8.0 - b).abs() < 1e-12);
        }
    }
}
