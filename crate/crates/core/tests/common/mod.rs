//! Shared test oracles. The gradient checker treats the graph as a black
//! box: analytic gradients must agree with central finite differences on
//! randomly probed coordinates, so the two sides are computed by
//! independent mechanisms.

pub mod fd;

use mcd_core::autodiff::{Graph, Tensor, Var};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-4;

/// Probe analytic gradients against central differences.
///
/// `build` must construct the same scalar-valued computation every call,
/// given fresh variables for `inputs` (in order). At most `max_points`
/// coordinates are probed (all of them when the total is smaller); panics
/// if fewer than `min_points` end up checked or any relative error exceeds
/// [`FD_TOL`]. Returns (points checked, worst relative error).
pub fn check_gradients(
    name: &str,
    inputs: &[Tensor<f64>],
    build: impl Fn(&mut Graph<f64>, &[Var]) -> Var,
    min_points: usize,
    max_points: usize,
    seed: u64,
) -> (usize, f64) {
    // Analytic side.
    let mut g = Graph::new_checked();
    let vars: Vec<Var> = inputs.iter().map(|t| g.param(t.clone())).collect();
    let loss = build(&mut g, &vars);
    assert_eq!(g.value(loss).numel(), 1, "{name}: loss must be scalar");
    g.backward(loss).unwrap();
    let grads: Vec<Tensor<f64>> = vars.iter().map(|&v| g.leaf_grad(v)).collect();

    // Coordinate set.
    let mut coords: Vec<(usize, usize)> = Vec::new();
    for (i, t) in inputs.iter().enumerate() {
        for j in 0..t.numel() {
            coords.push((i, j));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    coords.shuffle(&mut rng);
    coords.truncate(max_points);
    assert!(
        coords.len() >= min_points,
        "{name}: only {} coordinates available, need {min_points}",
        coords.len()
    );

    let eval = |tensors: &[Tensor<f64>]| -> f64 {
        let mut g = Graph::new();
        let vars: Vec<Var> = tensors.iter().map(|t| g.leaf(t.clone())).collect();
        let loss = build(&mut g, &vars);
        g.value(loss).item()
    };

    let mut worst = 0.0f64;
    for &(i, j) in &coords {
        let mut plus = inputs.to_vec();
        plus[i].data_mut()[j] += FD_STEP;
        let mut minus = inputs.to_vec();
        minus[i].data_mut()[j] -= FD_STEP;
        let fd = (eval(&plus) - eval(&minus)) / (2.0 * FD_STEP);
        let ad = grads[i].data()[j];
        let rel = (ad - fd).abs() / ad.abs().max(fd.abs()).max(1.0);
        assert!(
            rel < FD_TOL,
            "{name}: input {i} coord {j}: analytic {ad} vs fd {fd} (rel {rel:.3e})"
        );
        worst = worst.max(rel);
    }
    (coords.len(), worst)
}

/// Uniform(-1,1) tensor from a seeded stream; values are nudged away from
/// zero so kinked ops (relu, top-k boundaries) see no FD crossover.
pub fn sample_tensor(shape: Vec<usize>, seed: u64) -> Tensor<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            let v: f64 = rng.gen_range(-1.0..1.0);
            if v.abs() < 0.05 {
                v + 0.1 * v.signum() + if v == 0.0 { 0.1 } else { 0.0 }
            } else {
                v
            }
        })
        .collect();
    Tensor::new(shape, data).unwrap()
}

/// A probability vector must be nonnegative and sum to one within 1e-9.
#[allow(dead_code)]
pub fn assert_prob_vector(p: &[f64]) {
    assert!(p.iter().all(|&v| v >= 0.0), "negative mass: {p:?}");
    let total: f64 = p.iter().sum();
    assert!((total - 1.0).abs() < 1e-9, "mass {total} != 1 in {p:?}");
}
