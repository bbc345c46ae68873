//! Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
//!
//! Runs without the libtest harness so the summary lines always show up in
//! `cargo test` output. The process exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::time::{Duration, Instant};

use rand::Rng;

use qgamble::analysis::{
    constants, exact_cheat_gain, golden_section_maximize, linearized_gain_bound,
    linearized_optimum, monte_carlo_gain, optimal_check_rate, oracle_expected_gain,
    oracle_transcript, simulate_sessions, sweep_cheat_gain, unmeasured_posterior,
};
use qgamble::protocol::{
    run_round, run_session, session_rng, ProtocolParams, SessionStats, StateLabel,
};
use qgamble::qubit::{
    ensemble_average_bloch, BlochVector, Ensemble, MeasurementBasis, Outcome, Pauli, PureQubit,
    Subsystem, TwoQubitPure,
};
use qgamble::strategy::{
    attack_pair, entangled_cheat, fixed_state_cheat, honest_alice, honest_bob, zx_quadrant_grid,
    BasisPolicy, CheatPoint, ClaimPolicy, OutcomeTable,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || {
        format!("took {elapsed:.2?}, budget {budget:?}")
    })
}

fn optimal_guess_probability() -> Check {
    let start = Instant::now();
    let params = ProtocolParams::new(0.01, 1e4).map_err(|e| e.to_string())?;
    let (alice, bob) = (honest_alice(), honest_bob());
    let mut rng = session_rng(1, 0);
    let mut stats = SessionStats::default();
    while stats.normal_rounds < 1_000_000 {
        let rec = run_round(&alice, &bob, &params, &mut rng).map_err(|e| e.to_string())?;
        stats.record(&rec);
    }
    let rate = stats.normal_win_rate().unwrap_or(f64::NAN);
    let p = constants().p;
    within_budget(start.elapsed(), Duration::from_secs(10))?;
    ensure((rate - p).abs() <= 0.0015, || {
        format!("win rate {rate:.7} vs {p:.7}")
    })?;
    Ok(format!(
        "win rate {rate:.7} over {} normal rounds",
        stats.normal_rounds
    ))
}

fn normal_round_fairness() -> Check {
    for r in [0.001, 0.01, 0.0139385, 0.2, 0.7] {
        let params = ProtocolParams::new(r, 1e4).map_err(|e| e.to_string())?;
        let g = oracle_expected_gain(&honest_alice(), &params).map_err(|e| e.to_string())?;
        let per_normal = g.normal_term / (1.0 - r);
        ensure(per_normal.abs() <= 1e-12, || {
            format!("r {r}: normal gain {per_normal:e}")
        })?;
        let expected = r * (1.0 + SQRT_2);
        ensure((g.total - expected).abs() <= 1e-12, || {
            format!("r {r}: total {} vs {expected}", g.total)
        })?;
    }
    Ok("normal-round gain 0 and per-round gain r(1+√2) for 5 check rates".into())
}

fn closed_form_oracle_and_sampling_agree() -> Check {
    let start = Instant::now();
    let thetas = zx_quadrant_grid(100);
    let mut worst_exact = 0.0f64;
    let mut worst_z = 0.0f64;
    let mut config = 0u64;
    for (r, big_r) in [(0.01, 1e3), (0.0139385, 1e4)] {
        let params = ProtocolParams::new(r, big_r).map_err(|e| e.to_string())?;
        for &theta in &thetas {
            for (policy, claim) in [
                (ClaimPolicy::Zero, StateLabel::Zero),
                (ClaimPolicy::ZeroBar, StateLabel::ZeroBar),
            ] {
                let alice = fixed_state_cheat(
                    CheatPoint::new(theta, 0.0, policy).map_err(|e| e.to_string())?,
                );
                let oracle = oracle_expected_gain(&alice, &params).map_err(|e| e.to_string())?;
                let formula = exact_cheat_gain(theta, r, big_r, claim);
                let diff = oracle.max_abs_diff(&formula);
                worst_exact = worst_exact.max(diff);
                ensure(diff <= 1e-12, || {
                    format!("theta {theta} {claim}: oracle {oracle:?} vs closed form {formula:?}")
                })?;
                let stats =
                    simulate_sessions(&alice, &honest_bob(), &params, 1_000_000, 4, 1000 + config)
                        .map_err(|e| e.to_string())?;
                let est = monte_carlo_gain(&stats).map_err(|e| e.to_string())?;
                let z = est.z_score(oracle.total);
                worst_z = worst_z.max(z);
                ensure(z <= 4.0, || {
                    format!(
                        "theta {theta} {claim} r {r}: MC {} ± {} vs oracle {} (z = {z:.2})",
                        est.mean, est.std_error, oracle.total
                    )
                })?;
                config += 1;
            }
        }
    }
    within_budget(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "{config} configs, max closed-form diff {worst_exact:.1e}, max |z| {worst_z:.2}, {:.1?}",
        start.elapsed()
    ))
}

fn linearized_optimum_reproduced() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (r, big_r) in [(0.01, 1e4), (0.0139385, 1e4), (0.001, 1e6), (0.01, 1e6)] {
        let (x, fx) = golden_section_maximize(
            |t| linearized_gain_bound(t, r, big_r),
            0.0,
            FRAC_PI_4,
            1e-12,
        );
        let opt = linearized_optimum(r, big_r);
        let c = constants();
        let theta_star = 2.0 * c.alpha / ((1.0 - c.p) * r * big_r);
        ensure((opt.theta_star - theta_star).abs() <= 1e-12, || {
            "theta_star formula".into()
        })?;
        let d = (x - opt.theta_star).abs().max((fx - opt.g_max).abs());
        worst = worst.max(d);
        ensure(d <= 1e-9, || {
            format!(
                "r {r} R {big_r}: search ({x}, {fx}) vs ({}, {})",
                opt.theta_star, opt.g_max
            )
        })?;
    }
    for big_r in [1e1, 1e2, 1e3, 1e4, 1e6] {
        let cap = optimal_check_rate(big_r);
        let at = linearized_optimum(cap.check_rate, big_r);
        ensure((at.g_max - cap.gain_cap).abs() <= 1e-12, || {
            format!("R {big_r}: g_max {} vs cap {}", at.g_max, cap.gain_cap)
        })?;
    }
    within_budget(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "optimizer within {worst:.1e}; cap identity holds for 5 penalties"
    ))
}

fn cap_sweep(big_r: f64) -> Result<qgamble::analysis::SweepTable, String> {
    let params = ProtocolParams::new(optimal_check_rate(big_r).check_rate, big_r)
        .map_err(|e| e.to_string())?;
    let thetas: Vec<f64> = (0..200).map(|i| FRAC_PI_4 * i as f64 / 199.0).collect();
    sweep_cheat_gain(
        &params,
        &thetas,
        &[0.0, FRAC_PI_4, FRAC_PI_2],
        &[ClaimPolicy::Zero, ClaimPolicy::ZeroBar],
    )
    .map_err(|e| e.to_string())
}

fn security_cap() -> Check {
    let mut notes = Vec::new();
    for big_r in [1e2, 1e4] {
        let table = cap_sweep(big_r)?;
        let best = table.max_row().ok_or("empty sweep")?.gain.total;
        let cap = optimal_check_rate(big_r).gain_cap;
        ensure(best <= 1.1 * cap, || {
            format!("R {big_r}: max {best} > 1.1 × {cap}")
        })?;
        notes.push(format!("R={big_r:e}: {best:.5} ≤ {:.5}", 1.1 * cap));
    }
    let ratio = optimal_check_rate(1e2).gain_cap / optimal_check_rate(1e4).gain_cap;
    ensure((ratio - 10.0).abs() <= 1e-9, || {
        format!("cap ratio {ratio}")
    })?;
    Ok(format!("{}; cap ratio {ratio:.12}", notes.join(", ")))
}

fn plane_dominance() -> Check {
    let mut checked = 0;
    for big_r in [1e2, 1e4] {
        for (theta, policy, phis) in cap_sweep(big_r)?.maximizing_phis(1e-12) {
            ensure(phis.contains(&0.0), || {
                format!(
                    "R {big_r} theta {theta} {}: best phis {phis:?}",
                    policy.as_str()
                )
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "phi = 0 maximizes in all {checked} (R, theta, claim) slices"
    ))
}

fn entanglement_reductions() -> Check {
    let params = ProtocolParams::new(0.0139385, 1e4).map_err(|e| e.to_string())?;
    let steered = oracle_transcript(
        &entangled_cheat(BasisPolicy::always_z()),
        &honest_bob(),
        &params,
    )
    .map_err(|e| e.to_string())?;
    let honest =
        oracle_transcript(&honest_alice(), &honest_bob(), &params).map_err(|e| e.to_string())?;
    let diff = steered.max_abs_diff(&honest);
    ensure(diff <= 1e-12, || {
        format!("Z-policy transcript differs by {diff:e}")
    })?;

    let (p_alpha, alpha) =
        attack_pair().project(Subsystem::A, &MeasurementBasis::x(), Outcome::Plus);
    let expected = (2.0 + SQRT_2) / 4.0;
    ensure((p_alpha - expected).abs() <= 1e-12, || {
        format!("P(alpha) = {p_alpha}")
    })?;
    let target =
        PureQubit::from_real(1.0 + FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap_or(PureQubit::ZERO);
    ensure(alpha.is_some_and(|a| a.same_ray(&target, 1e-12)), || {
        "Bob's state is not |α⟩".into()
    })?;

    let mut worst = f64::NEG_INFINITY;
    for big_r in [1e2, 1e3, 1e4, 1e6] {
        let params = ProtocolParams::new(optimal_check_rate(big_r).check_rate, big_r)
            .map_err(|e| e.to_string())?;
        for table in OutcomeTable::all() {
            let g = oracle_expected_gain(&entangled_cheat(BasisPolicy::always_x(table)), &params)
                .map_err(|e| e.to_string())?
                .total;
            worst = worst.max(g);
            ensure(g < 0.0, || format!("R {big_r}: X-policy gain {g}"))?;
        }
    }
    Ok(format!(
        "Z transcript diff {diff:.1e}; P(α) = {p_alpha:.12}; best X-policy gain {worst:.4}"
    ))
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn remote_preparation_condition() -> Check {
    let target = BlochVector::new(0.5, 0.0, 0.5);
    let legal = Ensemble::new(vec![(0.5, PureQubit::ZERO), (0.5, PureQubit::ZERO_BAR)])
        .map_err(|e| e.to_string())?;
    let alpha =
        PureQubit::from_real(1.0 + FRAC_1_SQRT_2, FRAC_1_SQRT_2).map_err(|e| e.to_string())?;
    let steered = Ensemble::new(vec![
        ((2.0 + SQRT_2) / 4.0, alpha),
        ((2.0 - SQRT_2) / 4.0, alpha.orthogonal()),
    ])
    .map_err(|e| e.to_string())?;
    let d1 = ensemble_average_bloch(&legal).max_abs_diff(&target);
    let d2 = ensemble_average_bloch(&steered).max_abs_diff(&target);
    let d3 = attack_pair()
        .reduced_bloch(Subsystem::B)
        .max_abs_diff(&target);
    ensure(d1.max(d2).max(d3) <= 1e-12, || {
        format!("diffs {d1:e}, {d2:e}, {d3:e}")
    })?;
    Ok(format!(
        "both decompositions average to (0.5, 0, 0.5): {d1:.1e}, {d2:.1e}"
    ))
}

fn posterior_floor() -> Check {
    let mut min_slack = f64::INFINITY;
    for i in 0..100 {
        let theta = PI * i as f64 / 99.0;
        for j in 0..100 {
            let r = (j + 1) as f64 / 101.0;
            for guess in StateLabel::ALL {
                let f = unmeasured_posterior(theta, r, guess);
                min_slack = min_slack.min(f - r / 2.0);
                ensure(f >= r / 2.0 - 1e-15, || {
                    format!("theta {theta} r {r} {guess}: {f}")
                })?;
            }
        }
    }
    Ok(format!("min f_u − r/2 over 20000 points: {min_slack:.3e}"))
}

fn random_qubit<R: Rng>(rng: &mut R) -> PureQubit {
    PureQubit::from_bloch(PI * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>())
}

fn random_pair<R: Rng>(rng: &mut R) -> TwoQubitPure {
    use num_complex::Complex64;
    let amps = std::array::from_fn(|_| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    TwoQubitPure::from_unnormalized(amps).expect("random amplitudes are nonzero")
}

fn random_basis<R: Rng>(rng: &mut R) -> MeasurementBasis {
    MeasurementBasis::from_plus(random_qubit(rng), "random")
}

fn property_suites() -> Check {
    let mut rng = session_rng(99, 0);
    // zero-sum ledger with noisy, cheating and honest play
    let params = ProtocolParams::new(0.1, 50.0)
        .and_then(|p| p.with_noise(0.1))
        .map_err(|e| e.to_string())?;
    let cheat = fixed_state_cheat(
        CheatPoint::new(0.4, 0.3, ClaimPolicy::Nearest).map_err(|e| e.to_string())?,
    );
    let entangled = entangled_cheat(BasisPolicy::always_x(OutcomeTable::TRUTHFUL));
    let mut stats = SessionStats::default();
    for alice in [
        &honest_alice() as &dyn qgamble::strategy::AliceStrategy,
        &cheat,
        &entangled,
    ] {
        for _ in 0..20_000 {
            let rec =
                run_round(alice, &honest_bob(), &params, &mut rng).map_err(|e| e.to_string())?;
            let bob_side = -rec.transfer;
            ensure(rec.transfer + bob_side == 0.0, || {
                "transfer not zero-sum".into()
            })?;
            stats.record(&rec);
        }
    }
    ensure(
        (stats.alice_gain_total + stats.bob_gain_total()).abs() <= 1e-12 * stats.rounds as f64,
        || "session ledger not zero-sum".into(),
    )?;

    for _ in 0..500 {
        let pair = random_pair(&mut rng);
        let (ba, bb) = (random_basis(&mut rng), random_basis(&mut rng));
        // no-signaling: Bob's reduced state after Alice measures, averaged over her outcomes
        let before = pair.reduced_bloch(Subsystem::B);
        let mut after = BlochVector::ORIGIN;
        for o in Outcome::ALL {
            if let (w, Some(s)) = pair.project(Subsystem::A, &ba, o) {
                after = after.add(&s.bloch().scaled(w));
            }
        }
        ensure(before.max_abs_diff(&after) <= 1e-12, || {
            "signaling detected".into()
        })?;
        // Pauli on A leaves B's marginal alone
        let kicked = pair
            .apply_pauli(Subsystem::A, Pauli::Y)
            .reduced_bloch(Subsystem::B);
        ensure(before.max_abs_diff(&kicked) <= 1e-12, || {
            "local Pauli signaled".into()
        })?;

        // measurement order: A then B equals B then A equals joint
        for oa in Outcome::ALL {
            for ob in Outcome::ALL {
                let joint = pair.joint_probability(&ba, oa, &bb, ob);
                let a_first = match pair.project(Subsystem::A, &ba, oa) {
                    (w, Some(s)) => w * bb.probability(&s, ob),
                    (_, None) => 0.0,
                };
                let b_first = match pair.project(Subsystem::B, &bb, ob) {
                    (w, Some(s)) => w * ba.probability(&s, oa),
                    (_, None) => 0.0,
                };
                ensure(
                    (joint - a_first).abs().max((joint - b_first).abs()) <= 1e-12,
                    || format!("order dependence: {joint} {a_first} {b_first}"),
                )?;
            }
        }

        // normalization survives every operation
        ensure((pair.norm_sqr() - 1.0).abs() <= 1e-12, || {
            "pair not normalized".into()
        })?;
        let q = random_qubit(&mut rng);
        for p in Pauli::ALL {
            let n = q.apply_pauli(p).inner(&q.apply_pauli(p)).re;
            ensure((n - 1.0).abs() <= 1e-12, || {
                "Pauli broke normalization".into()
            })?;
        }
        for o in Outcome::ALL {
            if let (_, Some(s)) = pair.project(Subsystem::B, &bb, o) {
                ensure((s.inner(&s).re - 1.0).abs() <= 1e-12, || {
                    "collapse not normalized".into()
                })?;
            }
        }
        let (_, post) = ba.measure(&q, &mut rng);
        ensure((post.inner(&post).re - 1.0).abs() <= 1e-12, || {
            "measurement not normalized".into()
        })?;
    }

    // reproducibility by seed
    let run = |seed| {
        let mut rng = session_rng(seed, 3);
        run_session(&entangled, &honest_bob(), &params, 5_000, &mut rng)
    };
    ensure(run(11) == run(11), || "same seed diverged".into())?;
    ensure(run(11) != run(12), || "different seeds coincided".into())?;
    let a = simulate_sessions(&cheat, &honest_bob(), &params, 50_000, 8, 5)
        .map_err(|e| e.to_string())?;
    let b = simulate_sessions(&cheat, &honest_bob(), &params, 50_000, 8, 5)
        .map_err(|e| e.to_string())?;
    ensure(a == b, || "parallel sessions not reproducible".into())?;
    Ok("zero-sum, no-signaling, order commutation, normalization, reproducibility".into())
}

fn noise_triggers_abort() -> Check {
    let noisy = ProtocolParams::new(0.05, 1e4)
        .and_then(|p| p.with_noise(0.2))
        .and_then(|p| p.with_abort_threshold(0.05))
        .map_err(|e| e.to_string())?;
    let clean = noisy.with_noise(0.0).map_err(|e| e.to_string())?;
    let count = |params: &ProtocolParams, seed: u64| -> Result<usize, String> {
        let mut aborted = 0;
        for i in 0..100 {
            let mut rng = session_rng(seed, i);
            let s = run_session(&honest_alice(), &honest_bob(), params, 10_000, &mut rng)
                .map_err(|e| e.to_string())?;
            aborted += usize::from(s.aborted);
        }
        Ok(aborted)
    };
    let noisy_aborts = count(&noisy, 21)?;
    let clean_aborts = count(&clean, 22)?;
    ensure(noisy_aborts as f64 / 100.0 > 0.99, || {
        format!("{noisy_aborts}/100 noisy sessions aborted")
    })?;
    ensure(clean_aborts == 0, || {
        format!("{clean_aborts}/100 clean sessions aborted")
    })?;
    Ok(format!(
        "ε=0.2: {noisy_aborts}/100 aborted; ε=0: {clean_aborts}/100 aborted"
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("optimal guess probability", optimal_guess_probability),
        ("normal-round fairness", normal_round_fairness),
        (
            "closed form = oracle ≈ Monte Carlo",
            closed_form_oracle_and_sampling_agree,
        ),
        (
            "linearized optimum and check-rate cap",
            linearized_optimum_reproduced,
        ),
        ("1/√R security cap", security_cap),
        ("z-x plane dominance", plane_dominance),
        ("entanglement reductions", entanglement_reductions),
        ("remote preparation condition", remote_preparation_condition),
        ("posterior floor", posterior_floor),
        ("property suites", property_suites),
        ("noise triggers abort", noise_triggers_abort),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
