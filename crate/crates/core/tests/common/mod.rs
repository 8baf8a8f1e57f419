//! Independent oracles shared by the integration and acceptance tests.
//! Everything here recomputes results from first principles (exhaustive
//! enumeration, numerical quadrature) without touching the library's
//! inference or divergence code paths.

/// Log-density of a log-normal observation, written out independently of
/// the library's emission type.
pub fn lognormal_log_pdf(o: f64, location: f64, scale: f64) -> f64 {
    let ln_o = o.ln();
    let z = (ln_o - location) / scale;
    -ln_o - scale.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Exhaustive-enumeration smoothing oracle: sums the joint probability of
/// all 2^n state sequences. Returns the per-bin posterior of state 1 and
/// the log-likelihood of the observations.
///
/// `log_b[k][i]` is the log emission density of bin k under state i.
pub fn enumerate_posteriors(
    pi: [f64; 2],
    trans: [[f64; 2]; 2],
    log_b: &[[f64; 2]],
) -> (Vec<f64>, f64) {
    let n = log_b.len();
    assert!(n <= 20, "enumeration is exponential in n");
    let mut seq_logps = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let state = |k: usize| ((mask >> k) & 1) as usize;
        let mut logp = pi[state(0)].ln() + log_b[0][state(0)];
        for k in 1..n {
            logp += trans[state(k - 1)][state(k)].ln() + log_b[k][state(k)];
        }
        seq_logps.push(logp);
    }
    let total = log_sum_exp(&seq_logps);
    let mut alpha = vec![0.0; n];
    for (k, a) in alpha.iter_mut().enumerate() {
        let in_state_one: Vec<f64> = (0u32..(1 << n))
            .filter(|mask| (mask >> k) & 1 == 1)
            .map(|mask| seq_logps[mask as usize])
            .collect();
        *a = (log_sum_exp(&in_state_one) - total).exp();
    }
    (alpha, total)
}

/// Symmetric Gaussian KL divergence by Simpson quadrature of
/// `p ln(p/q) + q ln(q/p)` over a wide grid.
pub fn gaussian_symmetric_kl_quadrature(
    mu_p: f64,
    var_p: f64,
    mu_q: f64,
    var_q: f64,
    intervals: usize,
) -> f64 {
    let (sd_p, sd_q) = (var_p.sqrt(), var_q.sqrt());
    let lo = (mu_p - 14.0 * sd_p).min(mu_q - 14.0 * sd_q);
    let hi = (mu_p + 14.0 * sd_p).max(mu_q + 14.0 * sd_q);
    let pdf = |x: f64, mu: f64, var: f64| {
        (-0.5 * (x - mu) * (x - mu) / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    };
    let integrand = |x: f64| {
        let p = pdf(x, mu_p, var_p);
        let q = pdf(x, mu_q, var_q);
        // log p - log q directly, to stay stable in the far tails.
        let log_ratio = 0.5
            * ((var_q / var_p).ln() + (x - mu_q) * (x - mu_q) / var_q
                - (x - mu_p) * (x - mu_p) / var_p);
        (p - q) * log_ratio
    };
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = integrand(lo) + integrand(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(lo + i as f64 * h);
    }
    acc * h / 3.0
}
