//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use infothresh::harness::{
    emit_results, run_experiment, run_sweep, AutoOr, ExperimentConfig, OutputFormat, Strategy,
    SweepAxis,
};
use infothresh::{
    build_joint_uyz, expected_response_column, generate_cprb, init_state, mutual_information,
    EdgeJointDistribution, GroupId, InfoMeasures, ItsConfig, PriorKind, QueryChannel, UserId,
    VictimInstance, VictimPrior, Which,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn reference_config() -> ExperimentConfig {
    ExperimentConfig {
        m: 256,
        n: 8192,
        p0: 0.5,
        edge_flip: 0.05,
        gm_flip: 0.05,
        prior: PriorKind::Uniform,
        epsilon: AutoOr::Value(0.1),
        steps: AutoOr::Value(4),
        trials: 2000,
        master_seed: 1,
        ..Default::default()
    }
}

fn noiseless_measures() -> Outcome {
    let e = EdgeJointDistribution::with_flip(0.5, 0.0).unwrap();
    let m = InfoMeasures::from_model(&e, &QueryChannel::identity()).unwrap();
    outcome(
        m.mutual_info == 1.0 && m.i_max == 1.0,
        format!("I = {}, i_max = {}", m.mutual_info, m.i_max),
    )
}

/// `P(y | u)` straight from the edge table and the GM channel.
fn brute_likelihood(e: &EdgeJointDistribution, gm: &QueryChannel, y: bool, u: bool) -> f64 {
    let num: f64 = [false, true].iter().map(|&z| e.prob(z, u) * gm.prob(y, z)).sum();
    let den: f64 = [false, true].iter().map(|&z| e.prob(z, u)).sum();
    num / den
}

fn random_channel(rng: &mut Xoshiro256PlusPlus) -> [f64; 2] {
    let mut f = || {
        if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random_range(0.01..0.45)
        }
    };
    [f(), f()]
}

fn posterior_equivalence() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    let mut compared = 0u64;
    for inst_no in 0..100u64 {
        let m = rng.random_range(2..=32);
        let n = rng.random_range(1..=64);
        let p0 = rng.random_range(0.05..0.95);
        let [a, b] = random_channel(&mut rng);
        let edge = EdgeJointDistribution::new([
            [(1.0 - p0) * (1.0 - a), (1.0 - p0) * a],
            [p0 * b, p0 * (1.0 - b)],
        ])
        .unwrap();
        let [c, d] = random_channel(&mut rng);
        let gm = QueryChannel::new([[1.0 - c, c], [d, 1.0 - d]]).unwrap();
        let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let prior = VictimPrior::new(weights.iter().map(|w| w / total).collect()).unwrap();

        let pair = generate_cprb(n, m, &edge, rng.random()).unwrap();
        let victim = UserId(rng.random_range(1..=m));
        let inst = VictimInstance::new(&pair, victim, gm, rng.random()).unwrap();
        let measures = InfoMeasures::from_model(&edge, &gm).unwrap();
        let mut state = init_state(&prior, &ItsConfig::new(0.1, 3).unwrap());
        let mut log_post: Vec<f64> = prior.probs().iter().map(|p| p.log2()).collect();

        for g in 1..=n {
            let y = inst.noisy_gm_response(GroupId(g), g as u64).unwrap();
            let col = expected_response_column(&pair, GroupId(g)).unwrap();
            state.gm_update(&col, y, &measures);
            for (j, lp) in log_post.iter_mut().enumerate() {
                let u = pair.edge(Which::Scanned, UserId(j + 1), GroupId(g));
                *lp += brute_likelihood(&edge, &gm, y, u).log2();
            }
            let values = state.information_values();
            for j in 0..m {
                if values[j].is_finite() != log_post[j].is_finite() {
                    return outcome(false, format!("instance {inst_no}: support mismatch at user {}", j + 1));
                }
            }
            for j in 0..m {
                for k in (j + 1)..m {
                    if !(values[j].is_finite() && values[k].is_finite()) {
                        continue;
                    }
                    let dv = values[j] - values[k];
                    let dp = log_post[j] - log_post[k];
                    worst = worst.max((dv - dp).abs());
                    compared += 1;
                    if (dv - dp).abs() > 1e-9 {
                        return outcome(false, format!("instance {inst_no}: |diff| = {:e}", (dv - dp).abs()));
                    }
                }
            }
        }
    }
    outcome(true, format!("{compared} pairwise comparisons, max deviation {worst:.2e}"))
}

fn bound_sandwich_and_first_step() -> (Outcome, Outcome) {
    let s = run_experiment(&reference_config()).unwrap();
    let lower = 0.9 * s.bounds.lower_converse;
    let upper = s.bounds.upper_finite;
    let sandwich = outcome(
        lower <= s.mean_q && s.mean_q <= upper,
        format!("{lower:.3} <= mean Q {:.3} <= {upper:.3}", s.mean_q),
    );
    let first = s.step_failure_rates.first().copied().unwrap_or(0.0);
    let step = outcome(first <= 0.2, format!("first-step failure rate {first:.4} (<= 0.2)"));
    (sandwich, step)
}

fn drift() -> Outcome {
    let edge = EdgeJointDistribution::with_flip(0.5, 0.05).unwrap();
    let gm = QueryChannel::symmetric(0.05).unwrap();
    let measures = InfoMeasures::from_model(&edge, &gm).unwrap();
    let mi = mutual_information(&build_joint_uyz(&edge, &gm).unwrap());
    let n = 100_000;
    let pair = generate_cprb(n, 2, &edge, 42).unwrap();
    let inst = VictimInstance::new(&pair, UserId(1), gm, 43).unwrap();
    let prior = VictimPrior::uniform(2).unwrap();
    let mut state = init_state(&prior, &ItsConfig::new(0.1, 2).unwrap());
    let mut stats = [[0.0f64; 2]; 2];
    let mut prev = state.information_values();
    for g in 1..=n {
        let y = inst.noisy_gm_response(GroupId(g), g as u64).unwrap();
        let col = expected_response_column(&pair, GroupId(g)).unwrap();
        state.gm_update(&col, y, &measures);
        let now = state.information_values();
        for j in 0..2 {
            let inc = now[j] - prev[j];
            stats[j][0] += inc;
            stats[j][1] += inc * inc;
        }
        prev = now;
    }
    let moments = |s: [f64; 2]| {
        let mean = s[0] / n as f64;
        let var = (s[1] - n as f64 * mean * mean) / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    };
    let (mt, set) = moments(stats[0]);
    let (mw, sew) = moments(stats[1]);
    outcome(
        (mt - mi).abs() <= 3.0 * set && mw <= 3.0 * sew,
        format!("true {mt:.5} vs I {mi:.5} (SE {set:.5}); wrong {mw:.5} (SE {sew:.5})"),
    )
}

fn uid_scan_mean() -> Outcome {
    let s = run_experiment(&ExperimentConfig {
        m: 100,
        n: 64,
        trials: 10_000,
        strategy: Strategy::UidScan,
        ..Default::default()
    })
    .unwrap();
    outcome(
        (s.mean_q - 50.5).abs() <= 1.5,
        format!("mean Q {:.3} (50.5 +/- 1.5)", s.mean_q),
    )
}

fn zipf_sweep() -> Outcome {
    let base = ExperimentConfig {
        common_random_numbers: true,
        ..reference_config()
    };
    let points = [0.0, 0.5, 1.0, 1.5];
    let s = run_sweep(&base, SweepAxis::Zipf, &points).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, x) in s.iter().enumerate() {
        let b = &x.bounds.params_used;
        let gap = ((1.0 / b.epsilon).log2() + b.i_max) / b.mutual_info + 1.0;
        let residual = x.mean_q - x.bounds.lower_converse;
        pass &= residual.abs() <= gap;
        if k > 0 {
            pass &= x.mean_q <= s[k - 1].mean_q;
        }
        parts.push(format!("s={} Q={:.2} r={:.2}/{:.2}", points[k], x.mean_q, residual, gap));
    }
    outcome(pass, parts.join("; "))
}

fn worker_determinism() -> Outcome {
    let csv = |workers| {
        let s = run_experiment(&ExperimentConfig {
            workers: Some(workers),
            ..reference_config()
        })
        .unwrap();
        let mut buf = Vec::new();
        emit_results(&[s], OutputFormat::Csv, &mut buf).unwrap();
        buf
    };
    let one = csv(1);
    let many = csv(8);
    outcome(one == many, format!("{} bytes, workers 1 vs 8", one.len()))
}

fn report(id: u32, name: &str, limit: Option<Duration>, elapsed: Duration, o: &Outcome) -> bool {
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = o.pass && in_time;
    let timing = match limit {
        Some(l) => format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    println!(
        "[{}] criterion {id}: {name}: {} ({timing})",
        if pass { "PASS" } else { "FAIL" },
        o.detail
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--nocapture`; a filter
    // argument that matches nothing here skips the suite.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }

    let secs = |s| Some(Duration::from_secs(s));
    let mut ok = true;

    let (o, t) = timed(noiseless_measures);
    ok &= report(1, "noiseless measures", secs(1), t, &o);

    let (o, t) = timed(posterior_equivalence);
    ok &= report(2, "posterior equivalence", secs(30), t, &o);

    let ((sandwich, first), t_reference) = timed(bound_sandwich_and_first_step);
    ok &= report(3, "bound sandwich", None, t_reference, &sandwich);

    let (o, t) = timed(drift);
    ok &= report(4, "density drift", secs(10), t, &o);

    let (o, t) = timed(uid_scan_mean);
    ok &= report(5, "uid-scan baseline", secs(5), t, &o);

    ok &= report(6, "first-step failure rate", None, t_reference, &first);

    let (o, t) = timed(zipf_sweep);
    ok &= report(7, "zipf sweep", None, t, &o);

    let (o, t) = timed(worker_determinism);
    ok &= report(8, "worker determinism", None, t, &o);

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
