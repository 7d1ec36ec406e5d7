//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use weyl_lab::duhamel::{delta_lemma_check, duhamel_double_sum, trace_difference, trig_identity_residuals, verify_identity};
use weyl_lab::galerkin::{assemble, diagonalize, SpectralData};
use weyl_lab::kernels::{fitted_constant, heat_trace, inverse_power_cross_check, resolvent_sample};
use weyl_lab::lattice::{count_free, weyl_main_term};
use weyl_lab::mollify::{decay_fit, DecayTarget, MollifiedIndicator};
use weyl_lab::potentials::{kato_norm, sample, PotentialData, PotentialKind, PotentialSpec};
use weyl_lab::weyl::{
    band_density, band_experiment, band_onset, bootstrap_lp, bootstrap_n5, bootstrap_torus, build_series_constant, build_series_free,
    build_series_galerkin, dyadic_max_bins, fit_exponent, geometric_ladder, hlawka_gain, lp_threshold, n5_closed_form, BandSource,
    WidthRule,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn galerkin_pair(spec: &PotentialSpec, cutoff: u64, grid: usize) -> (PotentialData, SpectralData, SpectralData) {
    let v = sample(spec, grid).unwrap().with_fourier(2 * cutoff as usize).unwrap();
    let s_v = diagonalize(&assemble(spec.n, cutoff, &v).unwrap()).unwrap();
    let s_0 = SpectralData::free(spec.n, cutoff).unwrap();
    (v, s_v, s_0)
}

fn radial(n: usize, amplitude: f64, alpha: f64, epsilon: f64) -> PotentialSpec {
    PotentialSpec::new(n, PotentialKind::RadialPower { amplitude, alpha, epsilon, center: None })
}

fn duhamel_identity() -> Outcome {
    let mut r = common::rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let pair = common::HermitianPair::random(&mut r, 50, 400.0, 30.0);
        let (nu, u, mu, v) = pair.eigen();
        let mi = MollifiedIndicator::new(r.random_range(2.0..20.0), r.random_range(1.0..4.0)).unwrap();
        let lhs = trace_difference(&mi, &nu, &mu).unwrap();
        let rhs = duhamel_double_sum(&mi, &nu, &u, &mu, &v, &pair.b).unwrap();
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    let mut galerkin = Vec::new();
    for (n, cutoff) in [(1, 6), (2, 4)] {
        let (v, s_v, s_0) = galerkin_pair(&radial(n, 1.0, 1.0, 0.1), cutoff, 32);
        for lambda in [5.0, 12.0, 20.0] {
            let rep = verify_identity(&s_v, &s_0, &v, &MollifiedIndicator::new(lambda, 1.0).unwrap()).unwrap();
            worst = worst.max(rep.residual / (1.0 + rep.lhs.abs()));
            galerkin.push(rep.pass);
        }
    }
    check(worst <= 1e-9 && galerkin.iter().all(|&p| p), format!("max relative residual {worst:.3e} over 20 random + 6 Galerkin cases"))
}

fn trig_lemma() -> Outcome {
    let mut r = common::rng(2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let t = r.random_range(0.1..10.0);
        let mu = r.random_range(0.1..40.0);
        let tau = if i < 20 { mu } else { r.random_range(0.1..40.0) };
        let res = trig_identity_residuals(t, mu, tau).unwrap();
        worst = worst.max(res.r2).max(res.r1.unwrap_or(0.0));
    }
    check(worst <= 1e-10, format!("max residual {worst:.3e} at 100 points, 20 diagonal"))
}

fn delta_lemma() -> Outcome {
    let mut r = common::rng(3);
    let mut min_slack = f64::INFINITY;
    let mut all = true;
    for _ in 0..50 {
        let out = delta_lemma_check(&common::random_delta_instance(&mut r)).unwrap();
        all &= out.ok;
        if out.lhs > 0.0 {
            min_slack = min_slack.min(out.rhs / out.lhs);
        }
    }
    check(all, format!("50 instances, min rhs/lhs {min_slack:.3}"))
}

fn free_weyl() -> Outcome {
    let e2 = (count_free(2, 200.0).unwrap() as f64 / weyl_main_term(2, 200.0) - 1.0).abs();
    let e3 = (count_free(3, 60.0).unwrap() as f64 / weyl_main_term(3, 60.0) - 1.0).abs();
    check(e2 <= 0.02 && e3 <= 0.05, format!("n=2 λ=200 rel err {e2:.2e}, n=3 λ=60 rel err {e3:.2e}"))
}

fn hlawka() -> Outcome {
    let lambdas = geometric_ladder(10.0, 2000.0, 1.01).unwrap();
    let s = build_series_free(2, &lambdas).unwrap();
    let scaled: Vec<f64> = s.remainders.iter().zip(&lambdas).map(|(r, l)| r.abs() / l.powf(2.0 / 3.0)).collect();
    let bins = dyadic_max_bins(&lambdas, &scaled, 10.0, 2000.0);
    let max_ratio = bins.iter().map(|b| b.1).fold(0.0, f64::max);
    let fit = fit_exponent(&s, (10.0, 2000.0)).unwrap();
    check(max_ratio <= 10.0 && fit.slope <= 1.0, format!("max |R|/λ^(2/3) = {max_ratio:.3}, fitted slope {:.3}", fit.slope))
}

fn bands() -> Outcome {
    let lambdas = geometric_ladder(16.0, 512.0, 1.02).unwrap();
    let shrinking = band_experiment(&BandSource::Free(2), &lambdas, WidthRule::Power { a: 1.0 / 3.0 }).unwrap();
    let max_shrinking = shrinking.iter().map(|r| r.per_width).fold(0.0, f64::max);
    let fixed = band_experiment(&BandSource::Free(2), &lambdas, WidthRule::Fixed { epsilon: 0.5 }).unwrap();
    let bound = 2.0 * band_density(2);
    let onset = band_onset(&fixed, |r| r.per_width, bound);
    let detail = match onset {
        Some(o) => format!("width λ^(-1/3): max ratio {max_shrinking:.3}; width 0.5: ratio <= {bound:.3} from λ = {:.2}", o.lambda),
        None => format!("width λ^(-1/3): max ratio {max_shrinking:.3}; width 0.5: no onset below {bound:.3}"),
    };
    check(max_shrinking.is_finite() && onset.is_some_and(|o| o.lambda < 512.0), detail)
}

fn bootstrap() -> Outcome {
    let mut problems = Vec::new();
    for n in 2..=8 {
        let s = bootstrap_torus(n, -1.0).unwrap();
        let a = hlawka_gain(n);
        if !(s.converged && (s.fixed_point - a).abs() <= 1e-14) {
            problems.push(format!("torus n={n} ends at {}", s.fixed_point));
        }
        let nf = n as f64;
        for w in s.iterates.windows(2) {
            if w[0] <= (nf - 5.0) / (nf + 1.0) && w[1] - w[0] < 4.0 / (nf + 1.0) - 1e-15 {
                problems.push(format!("torus n={n} step {} from {}", w[1] - w[0], w[0]));
            }
        }
    }
    let n5 = bootstrap_n5(-1.0);
    for m in 0..60u32 {
        if n5.iterates.get(m as usize).copied() != Some(n5_closed_form(m)) {
            problems.push(format!("n5 step {m} differs"));
            break;
        }
    }
    let lp = bootstrap_lp(3, 2.0, -1.0).unwrap();
    if !(lp.converged && (lp.fixed_point - 0.5).abs() <= 1e-14) {
        problems.push(format!("lp n=3 p=2 ends at {}", lp.fixed_point));
    }
    if bootstrap_lp(3, lp_threshold(3), -1.0).is_ok() {
        problems.push("lp accepted p = 2n/(n+2)".into());
    }
    check(problems.is_empty(), if problems.is_empty() { "torus n=2..8, n5 60 steps, lp n=3 p=2".into() } else { problems.join("; ") })
}

fn kato() -> Outcome {
    use std::f64::consts::PI;
    let one = sample(&PotentialSpec::new(3, PotentialKind::Constant { value: 1.0 }), 8).unwrap();
    let coulomb = sample(&radial(3, 1.0, 1.0, 0.0), 8).unwrap();
    let mut worst_one: f64 = 0.0;
    let mut worst_coulomb: f64 = 0.0;
    for d in [0.1, 0.2] {
        worst_one = worst_one.max((kato_norm(&one, d).unwrap() / (2.0 * PI * d * d) - 1.0).abs());
        worst_coulomb = worst_coulomb.max((kato_norm(&coulomb, d).unwrap() / (4.0 * PI * d) - 1.0).abs());
    }
    let ladder = [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125];
    let mono = |v: &PotentialData| {
        let vals: Vec<f64> = ladder.iter().map(|&d| kato_norm(v, d).unwrap()).collect();
        vals.windows(2).all(|w| w[1] < w[0]) && *vals.last().unwrap() < 0.05 * vals[0]
    };
    let monotone = mono(&one) && mono(&coulomb);
    check(
        worst_one <= 0.05 && worst_coulomb <= 0.10 && monotone,
        format!("V=1 rel err {worst_one:.2e}, |x|^-1 rel err {worst_coulomb:.2e}, monotone decay {monotone}"),
    )
}

fn mollifier() -> Outcome {
    let mut r = common::rng(9);
    let mut agree: f64 = 0.0;
    let mut scaling: f64 = 0.0;
    for _ in 0..100 {
        let lambda = r.random_range(2.0..100.0);
        let width = r.random_range(1.0..6.0);
        let tau = r.random_range(-2.0 * lambda..2.0 * lambda);
        let mi = MollifiedIndicator::new(lambda, width).unwrap();
        let conv = mi.convolution_value(tau).unwrap();
        agree = agree.max((mi.value(tau).unwrap() - conv).abs());
        let unit = MollifiedIndicator::new(lambda * width, 1.0).unwrap();
        scaling = scaling.max((unit.convolution_value(tau * width).unwrap() - conv).abs());
    }
    let mut spreads = Vec::new();
    for tied in [false, true] {
        let c: Vec<f64> = [32.0f64, 64.0, 128.0]
            .iter()
            .map(|&l| decay_fit(DecayTarget::IndicatorError, l, if tied { l.cbrt() } else { 1.0 }, 4).unwrap().constant)
            .collect();
        let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        spreads.push(hi / lo);
    }
    check(
        agree <= 1e-8 && scaling <= 1e-10 && spreads.iter().all(|&s| s <= 2.0),
        format!("agreement {agree:.2e}, scaling {scaling:.2e}, C4 spread T=1 {:.3}, T=λ^(1/3) {:.3}", spreads[0], spreads[1]),
    )
}

fn kernels() -> Outcome {
    let mut r = common::rng(10);
    let (_, s_v, _) = galerkin_pair(&radial(2, 1.0, 1.0, 0.1), 6, 32);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let x = [r.random_range(0.0..1.0), r.random_range(0.0..1.0)];
        let y = [r.random_range(0.0..1.0), r.random_range(0.0..1.0)];
        let c = inverse_power_cross_check(&s_v, 1 + (i % 3) as u32 + 1, &x, &y).unwrap();
        worst = worst.max(c.residual);
    }
    let t: f64 = 0.02;
    let free = SpectralData::free(2, 40).unwrap();
    let heat = t * t.exp() * heat_trace(&free, t).unwrap() * 4.0 * std::f64::consts::PI;
    let heat_err = (heat - 1.0).abs();
    let s0 = SpectralData::free(2, 80).unwrap();
    let consts: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&tau| {
            let batch: Vec<_> = (1..=32)
                .map(|i| resolvent_sample(&s0, tau, &[0.0, 0.0], &[i as f64 / 64.0, 0.0], 4, 1.0 / 160.0).unwrap())
                .collect();
            fitted_constant(&batch)
        })
        .collect();
    let (lo, hi) = consts.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    check(
        worst <= 1e-6 && heat_err <= 0.05 && hi <= 3.0 * lo,
        format!("inverse-power residual {worst:.2e}, heat trace rel err {heat_err:.2e}, resolvent C4 {consts:.3?}"),
    )
}

fn perturbed_weyl() -> Outcome {
    let (_, s_v, _) = galerkin_pair(&radial(2, 1.0, 1.0, 0.1), 16, 128);
    let top = s_v.reliable_band();
    let lambdas = geometric_ladder(4.0, top, 1.01).unwrap();
    let series = build_series_galerkin(&s_v, &lambdas).unwrap();
    let half = lambdas.len() / 2;
    let ratio = |i: usize| series.remainders[i].abs() / lambdas[i].powf(1.1);
    let c = (0..half).map(ratio).fold(0.0, f64::max);
    let worst_upper = (half..lambdas.len()).map(ratio).fold(0.0, f64::max);
    let consts = [-3.0, 0.5, 7.25];
    let exact = consts.iter().all(|&cst| {
        let ladder = geometric_ladder(8.0, 400.0, 1.03).unwrap();
        let s = build_series_constant(2, cst, &ladder).unwrap();
        ladder.iter().zip(&s.counts).all(|(l, &n)| n == count_free(2, (l * l - cst).sqrt()).unwrap())
    });
    check(
        worst_upper <= c && exact,
        format!("reliable band {top:.1}, C = {c:.3} from lower half, upper half max {worst_upper:.3}, constant relation exact {exact}"),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "Duhamel identity", budget: Duration::from_secs(30), run: duhamel_identity },
        Criterion { id: 2, name: "trig lemma", budget: Duration::from_secs(5), run: trig_lemma },
        Criterion { id: 3, name: "delta lemma", budget: Duration::from_secs(5), run: delta_lemma },
        Criterion { id: 4, name: "free Weyl law", budget: Duration::from_secs(10), run: free_weyl },
        Criterion { id: 5, name: "Hlawka-scale remainder", budget: Duration::from_secs(60), run: hlawka },
        Criterion { id: 6, name: "band counts", budget: Duration::from_secs(30), run: bands },
        Criterion { id: 7, name: "bootstrap recurrences", budget: Duration::from_secs(1), run: bootstrap },
        Criterion { id: 8, name: "Kato functional", budget: Duration::from_secs(20), run: kato },
        Criterion { id: 9, name: "mollifier calculus", budget: Duration::from_secs(30), run: mollifier },
        Criterion { id: 10, name: "kernel identities", budget: Duration::from_secs(120), run: kernels },
        Criterion { id: 11, name: "perturbed Weyl", budget: Duration::from_secs(120), run: perturbed_weyl },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let slow = elapsed > c.budget;
        let (verdict, detail) = match &outcome {
            Ok(d) if !slow => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => ("FAIL", d.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} criterion {}: {} ({:.2} s) {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
