use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Generalized Laguerre values `L_j^{(k)}(x)` for `j = 0..len`, forward
/// three-term recurrence.
fn laguerre_series(k: usize, x: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let kf = k as f64;
    out.push(1.0);
    if len == 1 {
        return out;
    }
    out.push(1.0 + kf - x);
    for j in 1..len - 1 {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * out[j] - (jf + kf) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Matrix elements `⟨m|D(α)|n⟩` for `m < rows`, `n < cols`, with
/// `D(α) = exp(α a† − ᾱ a)`:
///
/// ```text
/// m ≥ n:  √(n!/m!) α^{m−n}    e^{−|α|²/2} L_n^{(m−n)}(|α|²)
/// m < n:  √(m!/n!) (−ᾱ)^{n−m} e^{−|α|²/2} L_m^{(n−m)}(|α|²)
/// ```
pub fn displacement_matrix(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(rows, cols);
    let x = alpha.norm_sqr();
    if x == 0.0 {
        for i in 0..rows.min(cols) {
            out[(i, i)] = Complex64::new(1.0, 0.0);
        }
        return out;
    }
    let lnf = ln_factorials(rows.max(cols));
    let ln_abs = x.sqrt().ln();
    let phase = alpha / alpha.norm();
    let neg_conj_phase = -phase.conj();

    // lower triangle and diagonal: offset k = m − n
    for k in 0..rows {
        let len = cols.min(rows - k);
        if len == 0 {
            continue;
        }
        let lag = laguerre_series(k, x, len);
        let ph = phase.powu(k as u32);
        for (n, l) in lag.iter().enumerate() {
            let m = n + k;
            let mag = (0.5 * (lnf[n] - lnf[m]) + k as f64 * ln_abs - 0.5 * x).exp();
            out[(m, n)] = ph * (mag * l);
        }
    }
    // strict upper triangle: offset k = n − m
    for k in 1..cols {
        let len = rows.min(cols - k);
        if len == 0 {
            continue;
        }
        let lag = laguerre_series(k, x, len);
        let ph = neg_conj_phase.powu(k as u32);
        for (m, l) in lag.iter().enumerate() {
            let n = m + k;
            let mag = (0.5 * (lnf[m] - lnf[n]) + k as f64 * ln_abs - 0.5 * x).exp();
            out[(m, n)] = ph * (mag * l);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_state;

    /// Independent route: columns from `D|n+1⟩ = (a† − ᾱ) D|n⟩ / √(n+1)`,
    /// starting at the coherent state. Exact as long as `rows` exceeds the
    /// requested block, since `a†` only moves amplitude upward.
    fn by_ladder(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
        let big = rows + cols;
        let mut col = coherent_state(alpha, big);
        let mut out = DMatrix::zeros(rows, cols);
        for n in 0..cols {
            for m in 0..rows {
                out[(m, n)] = col[m];
            }
            let mut next = col.clone();
            for m in 0..big {
                let up = if m > 0 { col[m - 1] * (m as f64).sqrt() } else { Complex64::new(0.0, 0.0) };
                next[m] = (up - alpha.conj() * col[m]) / ((n + 1) as f64).sqrt();
            }
            col = next;
        }
        out
    }

    #[test]
    fn matches_ladder_recurrence() {
        for alpha in [Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.7), Complex64::new(0.0, 2.0)] {
            let a = displacement_matrix(alpha, 25, 18);
            let b = by_ladder(alpha, 25, 18);
            assert!((a - b).camax() < 1e-11, "α = {alpha}");
        }
    }

    #[test]
    fn first_column_is_coherent() {
        let alpha = Complex64::new(0.8, 0.1);
        let d = displacement_matrix(alpha, 30, 1);
        let v = coherent_state(alpha, 30);
        assert!((d.column(0) - v).camax() < 1e-15);
    }

    #[test]
    fn unitary_on_low_block() {
        let alpha = Complex64::new(0.9, -0.6);
        let d = displacement_matrix(alpha, 90, 20);
        let gram = d.adjoint() * &d;
        assert!((gram - DMatrix::identity(20, 20)).camax() < 1e-12);
    }

    #[test]
    fn inverse_is_negated_argument() {
        let alpha = Complex64::new(0.4, 0.5);
        let d = displacement_matrix(alpha, 12, 12);
        let dm = displacement_matrix(-alpha, 12, 12);
        assert!((d.adjoint() - dm).camax() < 1e-14);
    }
}
