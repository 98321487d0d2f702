//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! All Monte Carlo runs use master seed 1, fixed before any result was seen.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rendezvous_core::analysis::{self, Scenario};
use rendezvous_core::channel::{ChannelParams, LinkState};
use rendezvous_core::harness::{replay_trial, run_experiment, AggregateStats, ExperimentSpec};
use rendezvous_core::policies::{commit_arm, Arm, Policy, PolicyKind, PolicySpec};

const SEED: u64 = 1;

/// One configuration's statistics with its policy, step length and player count.
type Row = (PolicyKind, f64, usize, AggregateStats);
const SCENARIOS: [(f64, f64); 3] = [(40.0, 70.0), (100.0, 60.0), (60.0, 60.0)];
const GREEDY_BOUNDS: [f64; 3] = [16816.0, 35184.0, 18627.0];
const ROPTIMAL_BOUNDS: [f64; 3] = [1223.0, 1770.0, 1287.0];

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn fig1_channel() -> ChannelParams {
    ChannelParams { sigma: 4.0, n_p: 4.0, x_c: 75.0, delta: 0.1, ..ChannelParams::default() }
}

fn spec(text: &str) -> ExperimentSpec {
    ExperimentSpec::from_config_str(text).unwrap_or_else(|e| panic!("bad acceptance config: {e}\n{text}"))
}

/// Per-configuration stats keyed by `(policy, sweep value)`.
fn run(text: &str) -> Vec<Row> {
    let s = spec(text);
    let out = run_experiment(&s).unwrap_or_else(|e| panic!("experiment failed: {e}"));
    out.stats.into_iter().map(|(p, st)| (p.policy.kind(), p.delta, p.num_players, st)).collect()
}

fn stat(rows: &[Row], k: PolicyKind, f: impl Fn(f64, usize) -> bool) -> AggregateStats {
    rows.iter().find(|r| r.0 == k && f(r.1, r.2)).map(|r| r.3).expect("configuration present")
}

/// `n` one-turn +x rewards through the channel: the receiver moves +x, the
/// opponent at `(x, y)` moves along a uniformly random arm, and the link's
/// shadowing takes one AR(1) step in between the two samples.
fn sample_plus_x_rewards(x: f64, y: f64, params: &ChannelParams, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = x.hypot(y);
    (0..n)
        .map(|_| {
            let mut link = LinkState::init(params, &mut rng);
            link.observe(d, params).unwrap();
            let (ox, oy) = Arm::random(&mut rng).direction();
            let (rx, ry) = Arm::Right.direction();
            let nx = x + (ox - rx) * params.delta;
            let ny = y + (oy - ry) * params.delta;
            link.advance(params, &mut rng);
            link.observe(nx.hypot(ny), params).unwrap().1.unwrap()
        })
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

fn c1_bounds() -> Verdict {
    let start = Instant::now();
    let out = run_experiment(&spec("mode = bounds\nsigma = 4\nn_p = 4\nx_c = 75\ndelta = 0.1\nz = 10")).unwrap();
    let elapsed = start.elapsed();
    let col = |name: &str| out.table.header.iter().position(|h| h == name).unwrap();
    let (g, r) = (col("greedy_bound"), col("roptimal_bound"));
    let mut ok = out.table.rows.len() == 3 && elapsed < Duration::from_secs(1);
    let mut got = Vec::new();
    for (i, row) in out.table.rows.iter().enumerate() {
        let gv: f64 = row[g].parse().unwrap();
        let rv: f64 = row[r].parse().unwrap();
        ok &= (gv - GREEDY_BOUNDS[i]).abs() <= 1.0 && (rv - ROPTIMAL_BOUNDS[i]).abs() <= 1.0;
        got.push(format!("{gv:.2}/{rv:.2}"));
    }
    verdict(ok, format!("greedy/roptimal = {} in {:.3} s", got.join(", "), elapsed.as_secs_f64()))
}

fn c2_reward_oracle() -> Verdict {
    let start = Instant::now();
    let params = fig1_channel();
    let s = Scenario::new(40.0, 70.0, params).unwrap();
    let g = analysis::reward_distribution(Arm::Right, &s);
    let exact = analysis::reward_mixture_moments(Arm::Right, &s);
    let xs = sample_plus_x_rewards(40.0, 70.0, &params, 1_000_000, SEED);
    let (m, v) = mean_var(&xs);
    let se = (v / xs.len() as f64).sqrt();
    let mean_ok = (m - g.mean).abs() <= 3.0 * se;
    let var_ok = ((v - g.variance) / g.variance).abs() <= 0.05;
    let elapsed = start.elapsed();
    verdict(
        mean_ok && var_ok && elapsed < Duration::from_secs(30),
        format!(
            "mean {m:.6} vs {:.6} (3 SE = {:.6}); variance {v:.6} vs {:.6} ({:+.1}%); exact mixture variance {:.6}; {:.1} s",
            g.mean,
            3.0 * se,
            g.variance,
            100.0 * (v - g.variance) / g.variance,
            exact.variance,
            elapsed.as_secs_f64()
        ),
    )
}

fn c3_probability_shape() -> Verdict {
    let params = fig1_channel();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, &(x, y)) in SCENARIOS.iter().enumerate() {
        let s = Scenario::new(x, y, params).unwrap();
        let ps: Vec<f64> = [1u64, 100, 10_000, 1_000_000]
            .iter()
            .map(|&n| analysis::prob_positive(Arm::Right, &s, n).unwrap())
            .collect();
        ok &= ps.windows(2).all(|w| w[1] > w[0]) && ps[3] <= 1.0 && ps[3] > 0.99;
        let xs = sample_plus_x_rewards(x, y, &params, 1_000_000, SEED + 1 + i as u64);
        let freq = xs.iter().filter(|r| **r > 0.0).count() as f64 / xs.len() as f64;
        ok &= (freq - ps[0]).abs() <= 0.005;
        parts.push(format!("({x},{y}): P1 {:.4} vs empirical {freq:.4}, P1e6 {:.6}", ps[0], ps[3]));
    }
    let zero = Scenario::new(0.0, 70.0, params).unwrap();
    let half = analysis::prob_positive(Arm::Right, &zero, 1).unwrap();
    ok &= half == 0.5;
    parts.push(format!("x=0 gives {half}"));
    verdict(ok, parts.join("; "))
}

fn c4_greedy_empirical() -> Verdict {
    let start = Instant::now();
    let rows = run(&format!(
        "mode = two_player\npolicies = greedy\nsigma = 4\nn_p = 4\nx_c = 75\ndelta = 0.1\nstart_x = 40\nstart_y = 70\ntrials = 200\nseed = {SEED}"
    ));
    let s = rows[0].3;
    let elapsed = start.elapsed();
    let ok = s.mean_turns < GREEDY_BOUNDS[0]
        && s.mean_turns >= 2370.0 / 3.0
        && s.mean_turns <= 2370.0 * 3.0
        && elapsed < Duration::from_secs(120);
    verdict(
        ok,
        format!(
            "mean {:.1} +/- {:.1} turns, meeting rate {}, window [790, 7110], bound {}; {:.1} s",
            s.mean_turns,
            s.std_err,
            s.meeting_rate,
            GREEDY_BOUNDS[0],
            elapsed.as_secs_f64()
        ),
    )
}

fn c5_roptimal_empirical() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, &(x, y)) in SCENARIOS.iter().enumerate() {
        let rows = run(&format!(
            "mode = two_player\npolicies = greedy, r-optimal\nsigma = 4\nn_p = 4\nx_c = 75\ndelta = 0.1\nstart_x = {x}\nstart_y = {y}\ntrials = 100\nseed = {SEED}"
        ));
        let g = stat(&rows, PolicyKind::Greedy, |_, _| true);
        let r = stat(&rows, PolicyKind::ROptimal, |_, _| true);
        ok &= r.mean_turns < ROPTIMAL_BOUNDS[i] && r.mean_turns < g.mean_turns;
        parts.push(format!(
            "({x},{y}): roptimal {:.0} +/- {:.0} vs bound {}, greedy {:.0}",
            r.mean_turns, r.std_err, ROPTIMAL_BOUNDS[i], g.mean_turns
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    parts.push(format!("{:.1} s", elapsed.as_secs_f64()));
    verdict(ok, parts.join("; "))
}

fn c6_delta_sweep() -> Verdict {
    let base = format!("mode = sweep_delta\nsigma = 3\nn_p = 5\nx_c = 75\narea_side = 200\ntrials = 100\nseed = {SEED}\nmax_turns = 2000000\n");
    let ropt = run(&format!("{base}policies = r-optimal\nsweep = 0.1, 0.01, 0.005"));
    let others = run(&format!("{base}policies = greedy, r-exp3, r-thompson\nsweep = 0.1, 0.01"));
    let at = |rows: &[Row], k, d: f64| stat(rows, k, |delta, _| delta == d);

    let r01 = at(&ropt, PolicyKind::ROptimal, 0.1);
    let r001 = at(&ropt, PolicyKind::ROptimal, 0.01);
    let r0005 = at(&ropt, PolicyKind::ROptimal, 0.005);
    let m = |s: AggregateStats| s.mean_m.unwrap();
    let mut ok = m(r0005) < m(r01) && m(r001) < 1.0 && m(r0005) < 1.0;
    let mut parts = vec![format!(
        "roptimal M(0.1) {:.3}, M(0.01) {:.3}, M(0.005) {:.3} (rates {}/{}/{})",
        m(r01),
        m(r001),
        m(r0005),
        r01.meeting_rate,
        r001.meeting_rate,
        r0005.meeting_rate
    )];
    for k in [PolicyKind::Greedy, PolicyKind::RExp3, PolicyKind::RThompson] {
        let (a, b) = (at(&others, k, 0.1), at(&others, k, 0.01));
        ok &= m(b) > m(a);
        parts.push(format!("{k} M(0.1) {:.3}, M(0.01) {:.3} (rate {})", m(a), m(b), b.meeting_rate));
    }
    verdict(ok, parts.join("; "))
}

fn c7_players() -> Verdict {
    let body = format!(
        "mode = sweep_players\npolicies = greedy, r-exp3, r-thompson, r-optimal\nx_c = 75\ndelta = 0.1\narea_side = 200\nsweep = 2, 3, 4, 5, 6\ntrials = 50\nseed = {SEED}\n"
    );
    let harsh = run(&format!("{body}sigma = 4\nn_p = 4"));
    let mild = run(&format!("{body}sigma = 3\nn_p = 5"));
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, rows) in [("sigma4", &harsh), ("sigma3", &mild)] {
        for k in PolicyKind::ALL {
            let means: Vec<f64> = (2..=6).map(|n| stat(rows, k, |_, p| p == n).mean_turns).collect();
            let mono = means.windows(2).all(|w| w[1] >= w[0]);
            let within = means.iter().all(|m| *m <= 10.0 * means[0]);
            ok &= mono && within;
            if !(mono && within) {
                let rates: Vec<f64> = (2..=6).map(|n| stat(rows, k, |_, p| p == n).meeting_rate).collect();
                parts.push(format!("{name} {k}: means {means:.0?} rates {rates:?}"));
            }
        }
    }
    let mut lower = 0;
    let mut total = 0;
    for k in PolicyKind::ALL {
        for n in 2..=6 {
            let (h, m) = (stat(&harsh, k, |_, p| p == n), stat(&mild, k, |_, p| p == n));
            total += 1;
            if m.mean_turns < h.mean_turns {
                lower += 1;
            } else {
                parts.push(format!("{k} n={n}: sigma3 {:.0} >= sigma4 {:.0}", m.mean_turns, h.mean_turns));
            }
        }
    }
    ok &= lower == total;
    parts.push(format!("sigma3 lower in {lower}/{total} cells"));
    verdict(ok, parts.join("; "))
}

fn c8_short_distance() -> Verdict {
    let rows = run(&format!(
        "mode = sweep_players\npolicies = greedy, r-exp3, r-thompson, r-optimal\nsigma = 3\nn_p = 5\nx_c = 75\ndelta = 0.1\narea_side = 2\nsweep = 2, 3, 4, 5, 6\ntrials = 100\nseed = {SEED}"
    ));
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 2..=6 {
        let g = stat(&rows, PolicyKind::Greedy, |_, p| p == n).mean_turns;
        let others: Vec<String> = [PolicyKind::RExp3, PolicyKind::RThompson, PolicyKind::ROptimal]
            .iter()
            .map(|&k| {
                let m = stat(&rows, k, |_, p| p == n).mean_turns;
                ok &= g <= m;
                format!("{k} {m:.1}")
            })
            .collect();
        parts.push(format!("n={n}: greedy {g:.1} vs {}", others.join(", ")));
    }
    verdict(ok, parts.join("; "))
}

fn c9_determinism() -> Verdict {
    let texts = [
        format!("mode = two_player\npolicies = greedy, r-exp3, r-thompson, r-optimal\narea_side = 30\ntrials = 20\ntrace = true\nseed = {SEED}"),
        format!("mode = sweep_players\npolicies = greedy, r-optimal\narea_side = 10\nsweep = 2, 3, 5\navg_window = 4\ntrials = 10\ntrace = true\nseed = {SEED}"),
        format!("mode = sweep_delta\npolicies = r-thompson\narea_side = 20\nsweep = 0.1, 0.2\ntrials = 10\nseed = {SEED}"),
    ];
    let mut ok = true;
    let mut checked = 0;
    for text in &texts {
        let s = spec(text);
        let a = run_experiment(&s).unwrap();
        let b = run_experiment(&s).unwrap();
        ok &= a.table.to_csv() == b.table.to_csv() && a.trace == b.trace;
        for (c, _) in a.stats.iter().enumerate() {
            for t in 0..s.trials {
                let r = replay_trial(&s, c, t).unwrap();
                checked += 1;
                if s.trace {
                    let batch: Vec<_> =
                        a.trace.iter().filter(|l| l.config == c && l.trial == t).map(|l| l.record.clone()).collect();
                    ok &= r.trace.as_deref() == Some(&batch[..]);
                }
            }
            let turns: u64 = (0..s.trials).map(|t| replay_trial(&s, c, t).unwrap().turns).sum();
            ok &= turns as f64 / s.trials as f64 == a.stats[c].1.mean_turns;
        }
    }
    verdict(ok, format!("3 experiments rerun byte-identically; {checked} trials replayed in isolation"))
}

fn c10_policy_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut steps = 0u64;
    let mut violations = Vec::new();
    for kind in PolicyKind::ALL {
        for seq in 0..10_000u64 {
            let a = rng.random_range(1e-4..0.9);
            let mut policy = PolicySpec::new(kind, a, rng.random_range(1e-4..0.9)).build().unwrap();
            let len = rng.random_range(2..64u64);
            let (mut prev, mut absorbed, mut positives) = (None::<Arm>, 0u64, 0u64);
            let mut reward = None;
            for turn in 1..=len {
                let arm = policy.step(turn, reward, &mut rng).unwrap();
                if turn >= 2 {
                    absorbed += 1;
                    positives += (reward.unwrap() > 0.0) as u64;
                }
                if turn >= 3 && turn % 2 == 1 && arm != commit_arm(prev.unwrap(), reward.unwrap()) {
                    violations.push(format!("{kind} seq {seq} turn {turn}: sign rule"));
                }
                match &policy {
                    Policy::RExp3(s) => {
                        let p = s.probabilities();
                        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 || p.iter().any(|x| *x < a / 4.0 * (1.0 - 1e-12))
                        {
                            violations.push(format!("rexp3 seq {seq} turn {turn}: probabilities {p:?}"));
                        }
                    }
                    Policy::ROptimal(s) => {
                        let bad = s.plays.iter().any(|c| *c < 1)
                            || s.positives.iter().zip(&s.plays).any(|(p, c)| p + 1 > *c)
                            || s.plays.iter().sum::<u64>() - 4 != absorbed
                            || s.positives.iter().sum::<u64>() != positives
                            || s.rates().iter().any(|k| !(0.0..=1.0).contains(k));
                        if bad {
                            violations.push(format!(
                                "roptimal seq {seq} turn {turn}: tallies {:?}/{:?}",
                                s.positives, s.plays
                            ));
                        }
                    }
                    _ => {}
                }
                steps += 1;
                prev = Some(arm);
                // exact zeros exercise the non-positive branch
                reward = Some(if rng.random_bool(0.05) { 0.0 } else { rng.sample::<f64, _>(StandardNormal) });
            }
        }
    }
    violations.truncate(5);
    verdict(violations.is_empty(), format!("4 x 10000 sequences, {steps} steps; first violations: {violations:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 bound reproduction", c1_bounds),
        ("2 reward distribution oracle", c2_reward_oracle),
        ("3 positive-reward probability shape", c3_probability_shape),
        ("4 Greedy empirical meeting time", c4_greedy_empirical),
        ("5 R-Optimal empirical meeting time", c5_roptimal_empirical),
        ("6 metric M step-length sweep", c6_delta_sweep),
        ("7 multiplayer scaling", c7_players),
        ("8 short-distance regime", c8_short_distance),
        ("9 determinism and replay", c9_determinism),
        ("10 policy unit properties", c10_policy_properties),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += (!v.pass) as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
