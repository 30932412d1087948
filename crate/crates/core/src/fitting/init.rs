use crate::marketdata::{price_mean, VolumeAtPrice};
use crate::models::{kummer_wave, BesselParams, KummerParams, ModelSpec, SuperpositionParams};
use crate::specfun::J0_FIRST_ZERO;

use super::FitFamily;

const WIDTH_MULTIPLIERS: [f64; 3] = [1.0, 0.5, 2.0];

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Distance from level `i` to the nearest level where the curve first falls
/// below 10% of `P_i`; the distance to one past the grid edge if it never does.
fn half_width(p: &[f64], i: usize, tick: f64) -> f64 {
    let cut = 0.1 * p[i];
    let left = (0..i).rev().find(|&j| p[j] < cut).map_or(i + 1, |j| i - j);
    let right = (i + 1..p.len()).find(|&j| p[j] < cut).map_or(p.len() - i, |j| j - i);
    left.min(right) as f64 * tick
}

/// Local maxima ordered by height, highest first.
fn local_maxima(p: &[f64]) -> Vec<usize> {
    let n = p.len();
    let mut idx: Vec<usize> = (0..n)
        .filter(|&i| p[i] > 0.0 && (i == 0 || p[i] >= p[i - 1]) && (i + 1 == n || p[i] >= p[i + 1]))
        .collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx
}

/// Decay rate of `ln P` along the longer flank of the peak at `i`.
fn log_slope(p: &[f64], i: usize, tick: f64) -> Option<f64> {
    let cut = 0.1 * p[i];
    let flank: Vec<usize> = if p.len() - 1 - i >= i {
        (i..p.len()).take_while(|&j| p[j] >= cut && p[j] > 0.0).collect()
    } else {
        (0..=i).rev().take_while(|&j| p[j] >= cut && p[j] > 0.0).collect()
    };
    if flank.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = flank.iter().map(|&j| (j as f64 - i as f64).abs() * tick).collect();
    let ys: Vec<f64> = flank.iter().map(|&j| p[j].ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then_some(-slope)
}

/// First positive zero of `e^{−r}·F(−m, 1, 2r)` in `r`, by scanning.
fn first_kummer_node(m: u32) -> Option<f64> {
    if m == 0 {
        return None;
    }
    let f = |r: f64| kummer_wave(m, 1.0, r);
    let mut lo = 0.0;
    let step = 1e-3;
    while lo < 10.0 {
        let hi = lo + step;
        if f(lo).signum() != f(hi).signum() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if f(a).signum() == f(mid).signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Some(0.5 * (a + b));
        }
        lo = hi;
    }
    None
}

/// Deterministic optimizer starts for `family` (always at least one).
///
/// Bessel starts take `p0` at the grid argmax and the volume-weighted mean,
/// with `ω = 2.404825/h` from the 10%-of-peak half-width `h` and its ×0.5 and
/// ×2 variants. Superposition starts place the centers on the two highest
/// separated local maxima. Kummer starts take `√A` from the log-slope of the
/// longer flank.
pub fn initialize(dist: &VolumeAtPrice, family: FitFamily) -> Vec<ModelSpec> {
    let p = &dist.probabilities;
    let tick = dist.tick;
    let imax = argmax(p);
    let peak = p[imax].max(f64::MIN_POSITIVE);
    let p_arg = dist.prices[imax];
    let p_mean = price_mean(dist);
    let h = half_width(p, imax, tick);
    let omega0 = J0_FIRST_ZERO / h;
    let mut centers = vec![p_arg];
    if (p_mean - p_arg).abs() >= 0.5 * tick {
        centers.push(p_mean);
    }
    // nearly flat over the grid, for distributions without a clear peak
    let width = (dist.max_price() - dist.min_price()).max(tick);
    let level = 1.0 / p.len() as f64;

    match family {
        FitFamily::Bessel => {
            let mut out: Vec<ModelSpec> = centers
                .iter()
                .flat_map(|&p0| {
                    WIDTH_MULTIPLIERS
                        .iter()
                        .map(move |m| ModelSpec::BesselSingle(BesselParams { c: peak, omega: omega0 * m, p0 }))
                })
                .collect();
            out.push(ModelSpec::BesselSingle(BesselParams { c: level, omega: 0.5 / width, p0: p_mean }));
            out
        }
        FitFamily::SuperpositionShared | FitFamily::SuperpositionDistinct => {
            let maxima = local_maxima(p);
            let first = maxima.first().copied().unwrap_or(imax);
            let second = maxima.iter().copied().find(|&j| j.abs_diff(first) >= 2);
            let mut pairs = Vec::new();
            if let Some(second) = second {
                pairs.push((first, second));
            }
            // fallback pair: argmax and a point one half-width away
            let offset = ((h / tick).round() as usize).max(2);
            let other = if imax + offset < p.len() { imax + offset } else { imax.saturating_sub(offset) };
            pairs.push((imax, other));
            let mut out = Vec::new();
            for (a, b) in pairs {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                let wa = J0_FIRST_ZERO / half_width(p, a, tick);
                let wb = J0_FIRST_ZERO / half_width(p, b, tick);
                let c = 0.8 * p[a].max(p[b]).max(f64::MIN_POSITIVE);
                for m in WIDTH_MULTIPLIERS {
                    let (omega1, omega2) = if family == FitFamily::SuperpositionShared {
                        let w = (wa * wb).sqrt() * m;
                        (w, w)
                    } else {
                        (wa * m, wb * m)
                    };
                    out.push(ModelSpec::BesselSuperposition(SuperpositionParams {
                        c,
                        omega1,
                        p01: dist.prices[a],
                        omega2,
                        p02: dist.prices[b],
                    }));
                }
            }
            out.push(ModelSpec::BesselSuperposition(SuperpositionParams {
                c: 0.5 * level,
                omega1: 0.5 / width,
                p01: dist.min_price() + width / 3.0,
                omega2: 0.5 / width,
                p02: dist.min_price() + 2.0 * width / 3.0,
            }));
            out
        }
        FitFamily::Kummer { order } => {
            let slope = log_slope(p, imax, tick).unwrap_or(1.0 / h);
            let mut rates = vec![slope];
            match first_kummer_node(order) {
                Some(node) => rates.push(node / h),
                None => rates.push(2.0 * slope),
            }
            rates.push(0.5 * slope);
            let mut out: Vec<ModelSpec> = centers
                .iter()
                .flat_map(|&p0| {
                    rates.iter().map(move |s| {
                        ModelSpec::Kummer(KummerParams { c: peak, m: order, a: s * s, p0 })
                    })
                })
                .collect();
            let flat = 0.1 / width;
            out.push(ModelSpec::Kummer(KummerParams { c: level, m: order, a: flat * flat, p0: p_mean }));
            out
        }
    }
}
