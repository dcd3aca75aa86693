//! Decoding controls applied to a next-token distribution, in order:
//! temperature, then truncation (top-k or top-p), then the multinomial
//! draw. All three preserve the rule that surviving probabilities keep
//! their relative order, and identity settings (T=1, k=|V|, p=1) leave
//! the vector bitwise untouched.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use rand::Rng;

const SUM_TOL: f64 = 1e-9;

fn validate<S: Scalar>(dist: &[S], op: &'static str) -> Result<()> {
    let mut sum = 0.0f64;
    for &p in dist {
        let p = p.as_f64();
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::invalid(op, format!("bad probability {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(op, format!("mass {sum} not within 1e-9 of 1")));
    }
    Ok(())
}

/// Renormalize in ascending index order (fixed summation order keeps
/// results bitwise stable across runs).
fn renormalize<S: Scalar>(dist: &mut [S]) {
    let mut sum = S::zero();
    for &p in dist.iter() {
        sum += p;
    }
    for p in dist.iter_mut() {
        *p = *p / sum;
    }
}

/// Sharpen (T<1) or flatten (T>1): proportional to p^(1/T). T=1 returns
/// the input bitwise unchanged. Computed in log space so extreme
/// temperatures cannot underflow the whole vector.
pub fn apply_temperature<S: Scalar>(dist: &mut [S], t: S) -> Result<()> {
    if t <= S::zero() {
        return Err(Error::invalid("apply_temperature", format!("T must be positive, got {t}")));
    }
    if t == S::one() {
        return Ok(());
    }
    validate(dist, "apply_temperature")?;
    let max_ln = dist
        .iter()
        .filter(|&&p| p > S::zero())
        .map(|&p| p.ln())
        .fold(S::neg_infinity(), S::max);
    for p in dist.iter_mut() {
        if *p > S::zero() {
            *p = ((p.ln() - max_ln) / t).exp();
        }
    }
    renormalize(dist);
    Ok(())
}

/// Keep the k most probable entries (ties broken toward the lower token
/// id), zero the rest, renormalize. k = |dist| keeps the input bitwise
/// unchanged.
pub fn truncate_top_k<S: Scalar>(dist: &mut [S], k: usize) -> Result<()> {
    if k == 0 || k > dist.len() {
        return Err(Error::invalid(
            "truncate_top_k",
            format!("k={k} outside 1..={}", dist.len()),
        ));
    }
    validate(dist, "truncate_top_k")?;
    if k == dist.len() {
        return Ok(());
    }
    let mut order: Vec<u32> = (0..dist.len() as u32).collect();
    // Total order: probability descending, then token id ascending. The
    // strictness makes the selected set unique, hence deterministic.
    order.select_nth_unstable_by(k - 1, |&a, &b| {
        dist[b as usize]
            .partial_cmp(&dist[a as usize])
            .expect("validated finite")
            .then(a.cmp(&b))
    });
    for &i in &order[k..] {
        dist[i as usize] = S::zero();
    }
    renormalize(dist);
    Ok(())
}

/// Nucleus truncation: keep the smallest probability-descending prefix
/// whose cumulative mass reaches p (ties toward the lower token id; the
/// argmax always survives), zero the rest, renormalize. p=1 keeps the
/// input bitwise unchanged.
pub fn truncate_top_p<S: Scalar>(dist: &mut [S], p: S) -> Result<()> {
    if p <= S::zero() || p > S::one() {
        return Err(Error::invalid("truncate_top_p", format!("p must be in (0,1], got {p}")));
    }
    validate(dist, "truncate_top_p")?;
    if p == S::one() {
        return Ok(());
    }
    let mut order: Vec<u32> = (0..dist.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        dist[b as usize]
            .partial_cmp(&dist[a as usize])
            .expect("validated finite")
            .then(a.cmp(&b))
    });
    let mut cum = S::zero();
    let mut kept = 0;
    for &i in &order {
        cum += dist[i as usize];
        kept += 1;
        if cum >= p {
            break;
        }
    }
    for &i in &order[kept..] {
        dist[i as usize] = S::zero();
    }
    renormalize(dist);
    Ok(())
}

/// Multinomial draw by inverse CDF over ascending token ids.
pub fn sample_index<S: Scalar, R: Rng>(dist: &[S], rng: &mut R) -> usize {
    let u: f64 = rng.gen_range(0.0..1.0);
    let mut cum = 0.0f64;
    let mut last_positive = 0;
    for (i, &p) in dist.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            last_positive = i;
            cum += p;
            if u < cum {
                return i;
            }
        }
    }
    // Rounding can leave cum fractionally below 1; the draw then lands on
    // the last token with mass.
    last_positive
}
