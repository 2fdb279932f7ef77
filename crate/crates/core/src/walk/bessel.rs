//! Exponentially scaled modified Bessel functions `e^{-t} I_n(t)` of integer
//! order, i.e. the transition kernel of rate-one continuous-time simple random
//! walk on Z.

/// `e^{-t} I_n(t)` for `n = 0..=n_max`, by Miller's backward recurrence
/// normalised with `e^{-t}(I_0 + 2 sum_{n>=1} I_n) = 1`.
pub fn scaled_bessel_i(t: f64, n_max: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(n_max + 1, 0.0);
    if t == 0.0 {
        out[0] = 1.0;
        return;
    }
    let start = n_max + 24 + (100.0 * t).sqrt().ceil() as usize;
    let mut next = 0.0f64; // I_{n+1}
    let mut cur = 1e-280f64; // I_n
    let mut norm = 0.0f64;
    let two_over_t = 2.0 / t;
    for n in (1..=start).rev() {
        if n <= n_max {
            out[n] = cur;
        }
        norm += 2.0 * cur;
        let prev = (n as f64) * two_over_t * cur + next;
        next = cur;
        cur = prev;
        if cur > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    let inv = 1.0 / norm;
    for v in out.iter_mut() {
        *v *= inv;
    }
}

/// Coefficients `c_j` of the large-`t` expansion
/// `e^{-t} I_k(t) ~ (2 pi t)^{-1/2} sum_j c_j t^{-j}`.
pub fn asymptotic_coeffs(k: u64, terms: usize) -> Vec<f64> {
    let mu = 4.0 * (k as f64) * (k as f64);
    let mut c = Vec::with_capacity(terms);
    let mut a = 1.0;
    c.push(1.0);
    for j in 1..terms {
        let odd = (2 * j - 1) as f64;
        a *= -(mu - odd * odd) / (8.0 * j as f64);
        c.push(a);
    }
    c
}
