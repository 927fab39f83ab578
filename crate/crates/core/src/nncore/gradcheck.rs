use super::network::{ForwardCache, Gradients, NetworkParams};

/// Compare analytic gradients against central finite differences.
///
/// Returns `max |analytic - numeric| / max(1, |analytic|)` over every trainable
/// parameter. `loss` must be deterministic in the parameters.
pub fn gradient_check<F>(params: &NetworkParams, loss: F, analytic: &Gradients, h: f64) -> f64
where
    F: Fn(&NetworkParams) -> f64,
{
    let mut work = params.clone();
    let grads = analytic.slices();
    let mut worst = 0.0f64;
    for (s, g) in grads.iter().enumerate() {
        for i in 0..g.len() {
            let orig = work.param_slices()[s][i];
            work.param_slices_mut()[s][i] = orig + h;
            let up = loss(&work);
            work.param_slices_mut()[s][i] = orig - h;
            let down = loss(&work);
            work.param_slices_mut()[s][i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let err = (g[i] - numeric).abs() / g[i].abs().max(1.0);
            if !err.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max(err);
        }
    }
    worst
}

/// Smallest distance from any hidden pre-activation in `cache` to a kink of
/// the activation. Finite differences with step `h` are only meaningful when
/// this is well above `h` times the input scale.
pub fn kink_margin(params: &NetworkParams, cache: &ForwardCache) -> f64 {
    (0..cache.hidden_layers())
        .flat_map(|l| cache.pre_activation(l).as_slice().iter())
        .map(|&u| params.hidden_activation.kink_distance(u))
        .fold(f64::INFINITY, f64::min)
}
