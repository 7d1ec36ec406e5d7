//! Adaptive Gauss–Kronrod quadrature (21-point Kronrod rule embedding the
//! 10-point Gauss rule) on a partition of user-chosen panels.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, ..., 9.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// One Kronrod panel: (kronrod estimate, |kronrod - gauss|).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive integration of `f` over `[a, b]`, first split into panels no
/// wider than `max_panel`, then bisected until the summed Kronrod–Gauss
/// error estimate drops below `tol` (absolute).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, max_panel: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let panels = (((hi - lo) / max_panel).ceil() as usize).max(1);
    let width = (hi - lo) / panels as f64;

    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(panels);
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut err_total = 0.0;
    for p in 0..panels {
        let pa = lo + width * p as f64;
        let pb = if p + 1 == panels { hi } else { pa + width };
        let (v, e) = gk21(&f, pa, pb);
        stack.push((pa, pb, v, e));
    }
    // per-panel budget proportional to width
    let budget = |pa: f64, pb: f64| tol * (pb - pa) / (hi - lo);
    let mut iterations = 0usize;
    while let Some((pa, pb, v, e)) = stack.pop() {
        if e <= budget(pa, pb).max(f64::EPSILON * v.abs()) || pb - pa < 1e-12 * (hi - lo) || iterations > 200_000 {
            // Kahan summation
            let y = v - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
            err_total += e;
            continue;
        }
        iterations += 1;
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk21(&f, pa, mid);
        let (v2, e2) = gk21(&f, mid, pb);
        stack.push((pa, mid, v1, e1));
        stack.push((mid, pb, v2, e2));
    }
    if !total.is_finite() || err_total > 100.0 * tol.max(f64::EPSILON * total.abs()) {
        return Err(Error::Quadrature { achieved: err_total, requested: tol });
    }
    Ok(sign * total)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` via Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else if order == 1 { x } else { p1 };
            let pm1 = if order == 1 { 1.0 } else { p0 };
            dp = order as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}
