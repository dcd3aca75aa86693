//! Significance helpers: exact binomial tests and Spearman rank
//! correlation with average ranks for ties.

use crate::error::{Error, Result};
use statrs::distribution::{Binomial, DiscreteCDF};

fn binomial(trials: usize, p0: f64) -> Result<Binomial> {
    Binomial::new(p0, trials as u64)
        .map_err(|e| Error::invalid("binomial", format!("p={p0}, n={trials}: {e}")))
}

/// One-sided P(X >= successes) under Binomial(trials, p0).
pub fn binomial_p_at_least(successes: usize, trials: usize, p0: f64) -> Result<f64> {
    if successes == 0 {
        return Ok(1.0);
    }
    let b = binomial(trials, p0)?;
    Ok(1.0 - b.cdf(successes as u64 - 1))
}

/// Two-sided equal-tail p-value: 2·min(P(X <= k), P(X >= k)), capped at 1.
pub fn binomial_p_two_sided(successes: usize, trials: usize, p0: f64) -> Result<f64> {
    let b = binomial(trials, p0)?;
    let lo = b.cdf(successes as u64);
    let hi = if successes == 0 { 1.0 } else { 1.0 - b.cdf(successes as u64 - 1) };
    Ok((2.0 * lo.min(hi)).min(1.0))
}

/// True when `successes` out of `trials` is consistent with rate `p0` at
/// the 95% level (equal-tail binomial test).
pub fn within_binomial_ci_95(successes: usize, trials: usize, p0: f64) -> Result<bool> {
    Ok(binomial_p_two_sided(successes, trials, p0)? >= 0.05)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // 1-based ranks; ties share the average of their positions.
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson on average ranks). Returns 0 when
/// either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("spearman", "need two equal-length samples of size >= 2"));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (vx * vy).sqrt())
}
