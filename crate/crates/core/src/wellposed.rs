//! Numerical checks that a geometric step model puts no mass at infinity.
//!
//! With step probabilities `q_n`, the mass on magnitudes `1..=N` is
//! `F_N = 1 - prod_{n <= N} (1 - q_n)`. Bounded hidden units keep the step
//! logit inside a fixed interval, so `q_n` is bounded away from zero and
//! `F_N -> 1`. With ReLU units the logit is eventually affine in `n`; a
//! decreasing tail lets mass escape.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nncore::{log_continue_probability, sigmoid, softplus, ActivationKind, Matrix, NetworkParams, OutputHead};

pub const DEFAULT_CHECKPOINTS: [u64; 4] = [10, 100, 1_000, 10_000];
/// Direct sums stop once an increment falls below this.
pub const CONVERGENCE_INCREMENT: f64 = 1e-15;
pub const CONVERGENCE_MAX_N: u64 = 1_000_000;
/// Largest residual of an affine fit accepted as an affine tail.
pub const AFFINE_TOLERANCE: f64 = 1e-6;
pub const SLOPE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCase {
    BoundedUnits,
    /// Constant logit for large `n`.
    ReluCase1,
    /// Increasing logit.
    ReluCase2,
    /// Decreasing logit: mass escapes.
    ReluCase3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassProfile {
    pub n: Vec<u64>,
    pub mass: Vec<f64>,
    /// Analytic upper bound on the limit, when known.
    pub bound: Option<f64>,
    pub case: Option<TailCase>,
}

impl MassProfile {
    pub fn last(&self) -> f64 {
        self.mass.last().copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,mass,bound\n");
        for (n, f) in self.n.iter().zip(&self.mass) {
            let b = self.bound.map_or("NA".to_string(), |b| b.to_string());
            s.push_str(&format!("{n},{f},{b}\n"));
        }
        s
    }
}

fn profile_from_log_continue(
    mut log_continue: impl FnMut(u64) -> f64,
    checkpoints: &[u64],
) -> Result<MassProfile> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.first() == Some(&0) {
        return Err(Error::arg("partial_mass", "checkpoints must be positive and increasing"));
    }
    let mut log_surv = 0.0;
    let mut mass = Vec::with_capacity(checkpoints.len());
    let mut n = 0;
    for &c in checkpoints {
        while n < c {
            n += 1;
            log_surv += log_continue(n);
        }
        mass.push(-log_surv.exp_m1());
    }
    Ok(MassProfile {
        n: checkpoints.to_vec(),
        mass,
        bound: None,
        case: None,
    })
}

/// `F_N` at each checkpoint for step probabilities `q(n)`, accumulated as a
/// sum of `log(1 - q_n)`.
pub fn partial_mass(q: impl Fn(u64) -> f64, checkpoints: &[u64]) -> Result<MassProfile> {
    profile_from_log_continue(|n| (-q(n)).ln_1p(), checkpoints)
}

/// As [`partial_mass`] with the step given by its logit.
pub fn partial_mass_logits(f: impl Fn(u64) -> f64, checkpoints: &[u64]) -> Result<MassProfile> {
    profile_from_log_continue(|n| log_continue_probability(f(n)), checkpoints)
}

/// `F_N` by the plain product, for comparison with the log-space form.
pub fn partial_mass_direct(q: impl Fn(u64) -> f64, n: u64) -> f64 {
    1.0 - (1..=n).map(&q).map(|q| 1.0 - q).product::<f64>()
}

/// Check the sandwich `1 - (1-a)^N <= F_N <= 1 - (1-b)^N` and monotonicity at
/// every checkpoint.
pub fn bounds_check(profile: &MassProfile, a: f64, b: f64) -> Result<()> {
    if !(0.0 < a && a <= b && b < 1.0) {
        return Err(Error::arg("bounds_check", format!("need 0 < a <= b < 1, got a = {a}, b = {b}")));
    }
    let slack = 1e-12;
    let mut prev = 0.0;
    for (&n, &f) in profile.n.iter().zip(&profile.mass) {
        let lower = -((n as f64) * (-a).ln_1p()).exp_m1();
        let upper = -((n as f64) * (-b).ln_1p()).exp_m1();
        if !(f >= lower - slack && f <= upper + slack && f >= prev - slack && f <= 1.0 + slack) {
            return Err(Error::BoundViolation {
                n: n as usize,
                lower: lower.max(prev),
                value: f,
                upper,
            });
        }
        prev = f;
    }
    Ok(())
}

/// Range of the output logit when every hidden layer is bounded; the last
/// hidden layer's bounds and the output weights determine it.
pub fn logit_range(net: &NetworkParams) -> Option<(f64, f64)> {
    if net.output_head != OutputHead::ScalarLogit || net.depth() < 2 {
        return None;
    }
    let (lo, hi) = net.hidden_activation.bounds()?;
    let out = net.layers.last()?;
    let (mut min, mut max) = (out.bias[0], out.bias[0]);
    for &w in &out.weights {
        min += (w * lo).min(w * hi);
        max += (w * lo).max(w * hi);
    }
    Some((min, max))
}

/// Step probability bounds `(a, b)` implied by [`logit_range`].
pub fn step_bounds(net: &NetworkParams) -> Option<(f64, f64)> {
    logit_range(net).map(|(lo, hi)| (sigmoid(lo), sigmoid(hi)))
}

/// Logits of `net` at levels `1..=n` for rows built by `row(level, out)`.
pub fn net_logits(net: &NetworkParams, n: u64, mut row: impl FnMut(u64, &mut Vec<f64>)) -> Result<Vec<f64>> {
    let d = net.input_dim();
    let mut rows = Vec::with_capacity(n as usize * d);
    for y in 1..=n {
        row(y, &mut rows);
    }
    Ok(net.predict(&Matrix::from_vec(n as usize, d, rows))?.into_vec())
}

/// Profile of a bounded-unit step network, with its sandwich checked.
pub fn bounded_profile(net: &NetworkParams, logits: &[f64], checkpoints: &[u64]) -> Result<MassProfile> {
    let (a, b) = step_bounds(net).ok_or_else(|| Error::Unsupported {
        op: "bounded_profile",
        msg: "network has unbounded hidden units".into(),
    })?;
    if (*checkpoints.last().unwrap_or(&0) as usize) > logits.len() {
        return Err(Error::arg("bounded_profile", "fewer logits than the last checkpoint"));
    }
    let mut p = partial_mass_logits(|n| logits[n as usize - 1], checkpoints)?;
    p.case = Some(TailCase::BoundedUnits);
    bounds_check(&p, a, b)?;
    Ok(p)
}

/// Sum `log(1 + e^{f(n)})` until the increment drops below
/// [`CONVERGENCE_INCREMENT`] or `n` reaches [`CONVERGENCE_MAX_N`]; returns the
/// limit mass and the last `n`.
pub fn converged_mass(f: impl Fn(u64) -> f64) -> (f64, u64) {
    let mut total = 0.0;
    let mut n = 0;
    while n < CONVERGENCE_MAX_N {
        n += 1;
        let inc = softplus(f(n));
        total += inc;
        if inc < CONVERGENCE_INCREMENT {
            break;
        }
    }
    (-(-total).exp_m1(), n)
}

/// Affine fit of a tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub case: TailCase,
    /// Intercept.
    pub c: f64,
    /// Magnitude of the slope.
    pub k: f64,
    pub n0: u64,
}

/// Least-squares line through `f(n)` for `n` in `n0..=n1`, classified by slope.
pub fn classify_relu_tail(f: impl Fn(u64) -> f64, n0: u64, n1: u64) -> Result<TailFit> {
    if n1 < n0 + 10 {
        return Err(Error::arg("classify_relu_tail", "probe range must span at least 10 levels"));
    }
    let pts: Vec<(f64, f64)> = (n0..=n1).map(|n| (n as f64, f(n))).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let c = my - slope * mx;
    let resid = pts.iter().map(|(x, y)| (y - c - slope * x).abs()).fold(0.0, f64::max);
    let scale = pts.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    if resid > AFFINE_TOLERANCE * scale {
        return Err(Error::arg("classify_relu_tail", format!("probe range below N0 (residual {resid:e})")));
    }
    let case = if slope.abs() <= SLOPE_TOLERANCE {
        TailCase::ReluCase1
    } else if slope > 0.0 {
        TailCase::ReluCase2
    } else {
        TailCase::ReluCase3
    };
    let slope = if case == TailCase::ReluCase1 { 0.0 } else { slope };
    Ok(TailFit {
        case,
        c,
        k: slope.abs(),
        n0,
    })
}

/// Find where the tail becomes affine by doubling the probe start.
pub fn find_affine_tail(f: impl Fn(u64) -> f64) -> Result<TailFit> {
    let mut n0 = 1;
    loop {
        match classify_relu_tail(&f, n0, n0 + n0.max(10)) {
            Ok(fit) => return Ok(fit),
            Err(_) if n0 < 1 << 40 => n0 *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// Upper bound `G < 1` on the limit mass of a decreasing tail
/// `f(n) <= C - K n` for `n >= N0`, where `d3` is the exact sum of
/// `log(1 + e^{f(n)})` over `n < N0`.
pub fn case3_bound(c3: f64, k3: f64, n0: u64, d3: f64) -> Result<f64> {
    if !(k3 > 0.0) {
        return Err(Error::arg("case3_bound", format!("slope magnitude must be positive, got {k3}")));
    }
    let e = (c3 - k3 * n0 as f64).exp();
    Ok(-(-(d3 + e + e / k3)).exp_m1())
}

/// `sum_{n < n0} log(1 + e^{f(n)})`.
pub fn head_sum(f: impl Fn(u64) -> f64, n0: u64) -> f64 {
    (1..n0).map(|n| softplus(f(n))).sum()
}

/// For a constant or increasing tail, the mass by `n_max`; errors if it is
/// below `1 - 1e-6` or the tail is decreasing.
pub fn divergence_check(fit: &TailFit, f: impl Fn(u64) -> f64, n_max: u64) -> Result<f64> {
    if fit.case == TailCase::ReluCase3 || fit.case == TailCase::BoundedUnits {
        return Err(Error::arg("divergence_check", format!("expects relu case 1 or 2, got {:?}", fit.case)));
    }
    let p = partial_mass_logits(f, &[n_max])?;
    let m = p.last();
    if m < 1.0 - 1e-6 {
        return Err(Error::arg("divergence_check", format!("mass {m} below 1 - 1e-6 by N = {n_max}")));
    }
    Ok(m)
}

/// A one-input ReLU network in the level encoding `u = y / 50` realizing the
/// tail of each case: `max(3 - y, 0)`, `2 + y / 2` and `-y`.
pub fn relu_demo_net(case: TailCase) -> Result<NetworkParams> {
    let (w1, b1, w2, b2) = match case {
        TailCase::ReluCase1 => (-50.0, 3.0, 1.0, 0.0),
        TailCase::ReluCase2 => (25.0, 0.0, 1.0, 2.0),
        TailCase::ReluCase3 => (50.0, 0.0, -1.0, 0.0),
        TailCase::BoundedUnits => {
            return Err(Error::arg("relu_demo_net", "no demo for bounded units"));
        }
    };
    let mut rng = crate::seed::rng_for(0, "relu-demo");
    let mut net = NetworkParams::init(&[1, 1, 1], ActivationKind::Relu, OutputHead::ScalarLogit, false, &mut rng)?;
    net.layers[0].weights[0] = w1;
    net.layers[0].bias[0] = b1;
    net.layers[1].weights[0] = w2;
    net.layers[1].bias[0] = b2;
    Ok(net)
}

/// Logit of a one-input demo network at level `y`.
pub fn demo_logit(net: &NetworkParams, y: u64) -> Result<f64> {
    Ok(net.forward_one(&[y as f64 / 50.0])?[0])
}

/// Outcome of the built-in ReLU demonstrations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReluDemo {
    pub fit: TailFit,
    pub profile: MassProfile,
    /// Converged limit for case 3.
    pub limit: Option<f64>,
    pub bound: Option<f64>,
}

/// Classify and measure one of the demo networks.
pub fn run_relu_demo(case: TailCase, checkpoints: &[u64]) -> Result<ReluDemo> {
    let net = relu_demo_net(case)?;
    let f = |n: u64| demo_logit(&net, n).expect("one-input network");
    let fit = find_affine_tail(f)?;
    let mut profile = partial_mass_logits(f, checkpoints)?;
    profile.case = Some(fit.case);
    let (limit, bound) = if fit.case == TailCase::ReluCase3 {
        let (lim, _) = converged_mass(f);
        let g = case3_bound(fit.c, fit.k, fit.n0, head_sum(f, fit.n0))?;
        profile.bound = Some(g);
        (Some(lim), Some(g))
    } else {
        (None, None)
    };
    Ok(ReluDemo {
        fit,
        profile,
        limit,
        bound,
    })
}
