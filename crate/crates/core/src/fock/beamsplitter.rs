use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{thermal_cutoff, thermal_populations, FockOperator, TRUNCATION_WARN};

/// Two-mode beamsplitter with amplitude transmission `t = √T` mapping
/// `a† → t a† − r b†`, `b† → r a† + t b†`. Mode `a` carries the signal and
/// mode `b` the environment.
///
/// Columns `U|n, k⟩` are generated by applying the (normalized) creation
/// operators one photon at a time, which keeps every vector at unit norm.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    t: f64,
    r: f64,
    max_signal: usize,
    max_env: usize,
    /// `columns[k][n][m] = ⟨m, n+k−m| U |n, k⟩`
    columns: Vec<Vec<Vec<f64>>>,
}

fn raise(v: &[f64], ca: f64, cb: f64, norm: f64) -> Vec<f64> {
    // v is indexed by m in the sector with N = v.len() − 1 photons
    let total = v.len() - 1;
    let mut out = vec![0.0; v.len() + 1];
    for (m, &amp) in v.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let l = total - m;
        out[m + 1] += ca * ((m + 1) as f64).sqrt() * amp;
        out[m] += cb * ((l + 1) as f64).sqrt() * amp;
    }
    for x in out.iter_mut() {
        *x /= norm;
    }
    out
}

impl BeamSplitter {
    /// Tabulates `U|n, k⟩` for `n < max_signal`, `k < max_env`.
    pub fn new(transmission: f64, max_signal: usize, max_env: usize) -> Self {
        let t = transmission.clamp(0.0, 1.0).sqrt();
        let r = (1.0 - t * t).max(0.0).sqrt();
        let mut columns = Vec::with_capacity(max_env);
        let mut env_only = vec![1.0];
        for k in 0..max_env {
            if k > 0 {
                env_only = raise(&env_only, r, t, (k as f64).sqrt());
            }
            let mut row = Vec::with_capacity(max_signal);
            let mut v = env_only.clone();
            for n in 0..max_signal {
                if n > 0 {
                    v = raise(&v, t, -r, (n as f64).sqrt());
                }
                row.push(v.clone());
            }
            columns.push(row);
        }
        Self {
            t,
            r,
            max_signal,
            max_env,
            columns,
        }
    }

    pub fn amplitude_transmission(&self) -> f64 {
        self.t
    }

    pub fn amplitude_reflection(&self) -> f64 {
        self.r
    }

    /// `⟨m, l|U|n, k⟩`; zero unless `m + l = n + k`.
    pub fn element(&self, m: usize, l: usize, n: usize, k: usize) -> f64 {
        if m + l != n + k || n >= self.max_signal || k >= self.max_env {
            return 0.0;
        }
        self.columns[k][n][m]
    }

    pub(crate) fn column(&self, n: usize, k: usize) -> &[f64] {
        &self.columns[k][n]
    }
}

/// Thermal-loss channel through the beamsplitter dilation: the signal meets
/// a thermal environment with parameter `env_lambda` (variance
/// `(1+λ²)/(1−λ²)`) and the environment is traced out. Output truncated to
/// `out_dim`.
pub fn thermal_loss_channel(
    rho: &FockOperator,
    transmission: f64,
    env_lambda: f64,
    out_dim: usize,
) -> FockOperator {
    let d_in = rho.dim();
    let k_env = thermal_cutoff(env_lambda, 1e-16, 1, 400);
    let pops = thermal_populations(env_lambda, k_env);
    let tail = 1.0 - pops.iter().sum::<f64>();
    if tail > TRUNCATION_WARN {
        log::warn!("thermal environment truncated at {k_env} levels, tail {tail:e}");
    }
    let bs = BeamSplitter::new(transmission, d_in, k_env);
    let src = rho.matrix();
    let mut out = DMatrix::<Complex64>::zeros(out_dim, out_dim);
    for (k, &pk) in pops.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        for n in 0..d_in {
            let col_n = bs.column(n, k);
            for (m, &un) in col_n.iter().enumerate().take(out_dim) {
                if un == 0.0 {
                    continue;
                }
                // environment ends in l = n + k − m; partner n' = n − m + m'
                for mp in 0..out_dim {
                    let Some(np) = (n + mp).checked_sub(m) else { continue };
                    if np >= d_in || mp > np + k {
                        continue;
                    }
                    let unp = bs.column(np, k)[mp];
                    out[(m, mp)] += src[(n, np)] * (pk * un * unp);
                }
            }
        }
    }
    FockOperator::from_matrix(out)
}
