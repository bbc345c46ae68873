use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use thiserror::Error;

use qgamble::analysis::{
    claim_gain_bound, constants, exact_cheat_gain, exact_cheat_gain_for_state,
    golden_section_maximize, linearized_gain_bound, linearized_optimum, monte_carlo_gain,
    optimal_check_rate, oracle_expected_gain, oracle_transcript, simulate_sessions,
    sweep_cheat_gain, unmeasured_posterior, AnalysisError, GainBreakdown, TranscriptDistribution,
};
use qgamble::protocol::{
    run_session_observed, session_rng, ProtocolParams, RoundType, SessionStats, StateLabel,
};
use qgamble::qubit::{
    ensemble_average_bloch, BlochVector, Ensemble, MeasurementBasis, Outcome, PureQubit, Subsystem,
};
use qgamble::strategy::{
    attack_pair, entangled_cheat, fixed_state_cheat, honest_alice, honest_bob, AliceStrategy,
    BasisPolicy, ClaimPolicy, EntangledCheat, MeasurementChoice, OutcomeTable,
};

use crate::config::{Command, PolicySet, RunConfig};
use crate::report::{Cell, Metric, ResultDocument, Table};

/// Monte Carlo checks accept this many standard errors of disagreement.
pub const MC_SIGMAS: f64 = 4.0;
/// Exact comparisons.
pub const EXACT_TOL: f64 = 1e-12;
/// Optimizer against closed form.
pub const OPTIMIZER_TOL: f64 = 1e-9;
/// Allowance over the linearized cap for terms the linearization drops.
pub const CAP_SLACK: f64 = 0.1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("cannot write transcript {}: {source}", path.display())]
    Transcript { path: PathBuf, source: csv::Error },
}

pub fn run(cfg: &RunConfig) -> Result<ResultDocument, RunError> {
    let (metrics, table) = match cfg.command {
        Command::Honest => (honest(cfg)?, None),
        Command::Cheat => (cheat(cfg)?, None),
        Command::Sweep => sweep(cfg)?,
        Command::Entangle => entangle(cfg)?,
        Command::Verify => (verify(cfg)?, None),
    };
    Ok(ResultDocument::new(cfg, metrics, table))
}

fn sample<A: AliceStrategy + ?Sized>(cfg: &RunConfig, alice: &A) -> Result<SessionStats, RunError> {
    let bob = honest_bob();
    let Some(path) = &cfg.transcript else {
        return Ok(simulate_sessions(
            alice,
            &bob,
            &cfg.params,
            cfg.rounds,
            cfg.sessions,
            cfg.seed,
        )?);
    };
    // Serial replay of the same per-session streams, so the statistics match
    // the parallel path exactly.
    let wrap = |source| RunError::Transcript {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_writer(BufWriter::new(
        File::create(path).map_err(|e| wrap(e.into()))?,
    ));
    w.write_record([
        "session",
        "round",
        "round_type",
        "bob_guess",
        "alice_claim",
        "check_result",
        "transfer",
        "bob_outcome",
    ])
    .map_err(wrap)?;
    let base = cfg.rounds / cfg.sessions;
    let extra = cfg.rounds % cfg.sessions;
    let mut total = SessionStats::default();
    for i in 0..cfg.sessions {
        let n = base + u64::from(i < extra);
        let mut rng = session_rng(cfg.seed, i);
        let mut round = 0u64;
        let mut failure = None;
        let stats = run_session_observed(alice, &bob, &cfg.params, n, &mut rng, |rec| {
            if failure.is_some() {
                return;
            }
            let row = [
                i.to_string(),
                round.to_string(),
                rec.round_type.as_str().to_string(),
                rec.bob_guess.as_str().to_string(),
                rec.alice_claim.as_str().to_string(),
                rec.check_result.as_str().to_string(),
                crate::report::format_f64(rec.transfer),
                rec.bob_measurement_outcome
                    .map_or(String::new(), |o| o.as_str().to_string()),
            ];
            failure = w.write_record(&row).err();
            round += 1;
        })
        .map_err(AnalysisError::from)?;
        if let Some(e) = failure {
            return Err(wrap(e));
        }
        total = total.merge(&stats);
    }
    w.flush().map_err(|e| wrap(e.into()))?;
    Ok(total)
}

fn normal_win_probability(d: &TranscriptDistribution, r: f64) -> f64 {
    let won: f64 = d
        .iter()
        .filter(|(k, _)| k.round_type == RoundType::Normal && k.bob_guess == k.alice_claim)
        .map(|(_, p)| p)
        .sum();
    won / (1.0 - r)
}

fn binomial(name: &str, hits: u64, n: u64) -> Metric {
    let rate = hits as f64 / n as f64;
    Metric::sampled(name, rate, (rate * (1.0 - rate) / n as f64).sqrt())
}

fn mc_gain(name: &str, stats: &SessionStats, oracle: f64) -> Result<Metric, RunError> {
    let est = monte_carlo_gain(stats)?;
    Ok(Metric::sampled(name, est.mean, est.std_error).close_to(oracle, MC_SIGMAS * est.std_error))
}

fn breakdown(prefix: &str, g: &GainBreakdown) -> Vec<Metric> {
    vec![
        Metric::info(format!("{prefix}_gain"), g.total),
        Metric::info(format!("{prefix}_normal_term"), g.normal_term),
        Metric::info(format!("{prefix}_detect_term"), g.detect_term),
        Metric::info(format!("{prefix}_pass_term"), g.pass_term),
    ]
}

fn honest(cfg: &RunConfig) -> Result<Vec<Metric>, RunError> {
    let r = cfg.params.check_rate;
    let exact = oracle_transcript(&honest_alice(), &honest_bob(), &cfg.params)?;
    let stats = sample(cfg, &honest_alice())?;

    let mut m = vec![
        Metric::info("rounds", stats.rounds as f64),
        Metric::info("normal_rounds", stats.normal_rounds as f64),
        Metric::info("check_rounds", stats.check_rounds as f64),
        Metric::info("any_session_aborted", f64::from(u8::from(stats.aborted))),
    ];
    if stats.normal_rounds > 0 {
        let w = binomial("win_rate", stats.normal_bob_wins, stats.normal_rounds);
        let tol = MC_SIGMAS * w.std_error.unwrap_or(0.0);
        m.push(w.close_to(normal_win_probability(&exact, r), tol));
    }
    m.push(mc_gain(
        "alice_gain_per_round",
        &stats,
        exact.gain(&cfg.params).total,
    )?);
    if stats.check_rounds > 0 {
        let f = binomial("check_fail_rate", stats.check_fails, stats.check_rounds);
        let tol = MC_SIGMAS * f.std_error.unwrap_or(0.0);
        m.push(f.close_to(exact.check_fail_probability() / r, tol));
    }
    Ok(m)
}

fn cheat(cfg: &RunConfig) -> Result<Vec<Metric>, RunError> {
    let p = &cfg.params;
    let alice = fixed_state_cheat(cfg.point);
    let state = cfg.point.state();
    let claim = cfg.point.claim();
    let oracle = oracle_expected_gain(&alice, p)?;
    let baseline = oracle_expected_gain(&honest_alice(), p)?.total;

    let mut m = vec![
        Metric::info(
            "claim_is_zero_bar",
            f64::from(u8::from(claim == StateLabel::ZeroBar)),
        ),
        Metric::info("honest_gain", baseline),
    ];
    m.extend(breakdown("oracle", &oracle));
    if p.noise == 0.0 {
        // the closed forms describe the noiseless channel only
        let closed = exact_cheat_gain_for_state(&state, p.check_rate, p.penalty, claim);
        m.push(Metric::info("closed_form_gain", closed.total).close_to(oracle.total, EXACT_TOL));
        let bound = claim_gain_bound(&state, p.check_rate, p.penalty, claim);
        m.push(Metric::info("oracle_gain_vs_claim_bound", oracle.total).at_most(bound, EXACT_TOL));
    }
    let stats = sample(cfg, &alice)?;
    m.push(Metric::info("rounds", stats.rounds as f64));
    m.push(mc_gain("mc_gain", &stats, oracle.total)?);
    Ok(m)
}

fn grid(n: usize, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

fn sweep(cfg: &RunConfig) -> Result<(Vec<Metric>, Option<Table>), RunError> {
    let p = &cfg.params;
    let thetas = grid(cfg.theta_points, FRAC_PI_4);
    let phis = grid(cfg.phi_points, FRAC_PI_2);
    let table = sweep_cheat_gain(
        p,
        &thetas,
        &phis,
        &[ClaimPolicy::Zero, ClaimPolicy::ZeroBar],
    )?;

    let mut out = Table::new(&[
        "theta",
        "phi",
        "claim",
        "gain",
        "normal_term",
        "detect_term",
        "pass_term",
    ]);
    for row in &table.rows {
        out.rows.push(vec![
            Cell::Num(row.point.theta()),
            Cell::Num(row.point.phi()),
            Cell::Text(row.claim.as_str().to_string()),
            Cell::Num(row.gain.total),
            Cell::Num(row.gain.normal_term),
            Cell::Num(row.gain.detect_term),
            Cell::Num(row.gain.pass_term),
        ]);
    }

    let opt = linearized_optimum(p.check_rate, p.penalty);
    let best = table.max_row().expect("grids are non-empty");
    let step = thetas.get(1).copied().unwrap_or(FRAC_PI_4);
    let mut m = vec![
        Metric::info("linearized_cap", opt.g_max),
        Metric::info("max_gain", best.gain.total).at_most(opt.g_max, CAP_SLACK * opt.g_max),
        Metric::info("argmax_theta", best.point.theta()).close_to(opt.theta_star, step),
        Metric::info("argmax_phi", best.point.phi()),
    ];
    if phis.len() > 1 {
        let off_plane = table
            .maximizing_phis(EXACT_TOL)
            .iter()
            .filter(|(_, _, best)| !best.contains(&0.0))
            .count();
        m.push(Metric::info("slices_maximized_off_plane", off_plane as f64).at_most(0.0, 0.0));
    }
    Ok((m, Some(out)))
}

fn table_name(t: OutcomeTable) -> String {
    format!(
        "plus:{}/minus:{}",
        t.label(Outcome::Plus),
        t.label(Outcome::Minus)
    )
}

fn entangle_policies(set: PolicySet) -> Vec<(String, BasisPolicy)> {
    let z = || vec![("z".to_string(), BasisPolicy::always_z())];
    let x = || {
        OutcomeTable::all()
            .into_iter()
            .map(|t| (format!("x {}", table_name(t)), BasisPolicy::always_x(t)))
            .collect::<Vec<_>>()
    };
    let adaptive = || {
        vec![(
            "adaptive x|z".to_string(),
            BasisPolicy {
                after_zero: MeasurementChoice::new(MeasurementBasis::x(), OutcomeTable::TRUTHFUL),
                after_zero_bar: MeasurementChoice::new(
                    MeasurementBasis::z(),
                    OutcomeTable::TRUTHFUL,
                ),
            },
        )]
    };
    match set {
        PolicySet::Z => z(),
        PolicySet::X => x(),
        PolicySet::Adaptive => adaptive(),
        PolicySet::All => [z(), x(), adaptive()].concat(),
    }
}

fn entangle(cfg: &RunConfig) -> Result<(Vec<Metric>, Option<Table>), RunError> {
    let p = &cfg.params;
    let honest = oracle_transcript(&honest_alice(), &honest_bob(), p)?;
    let baseline = honest.gain(p).total;
    let (p_alpha, _) = attack_pair().project(Subsystem::A, &MeasurementBasis::x(), Outcome::Plus);

    let mut m = vec![
        Metric::info("honest_gain", baseline),
        Metric::info("p_alpha", p_alpha).close_to((2.0 + SQRT_2) / 4.0, EXACT_TOL),
    ];
    let mut table = Table::new(&[
        "policy",
        "oracle_gain",
        "normal_term",
        "detect_term",
        "pass_term",
        "mc_gain",
        "mc_std_error",
    ]);
    for (name, policy) in entangle_policies(cfg.policy) {
        let is_z = policy == BasisPolicy::always_z();
        let alice: EntangledCheat = entangled_cheat(policy);
        let dist = oracle_transcript(&alice, &honest_bob(), p)?;
        let g = dist.gain(p);
        if is_z {
            m.push(
                Metric::info("z_policy_transcript_diff", dist.max_abs_diff(&honest))
                    .close_to(0.0, EXACT_TOL),
            );
        }
        m.push(
            Metric::info(format!("{name}: gain_vs_honest"), g.total).at_most(baseline, EXACT_TOL),
        );
        let stats = sample(cfg, &alice)?;
        let mc = mc_gain(&format!("{name}: mc_gain"), &stats, g.total)?;
        table.rows.push(vec![
            Cell::Text(name),
            Cell::Num(g.total),
            Cell::Num(g.normal_term),
            Cell::Num(g.detect_term),
            Cell::Num(g.pass_term),
            Cell::Num(mc.value),
            Cell::Num(mc.std_error.unwrap_or(f64::NAN)),
        ]);
        m.push(mc);
    }
    Ok((m, Some(table)))
}

fn verify(cfg: &RunConfig) -> Result<Vec<Metric>, RunError> {
    let (r, big_r) = (cfg.params.check_rate, cfg.params.penalty);
    let clean = ProtocolParams::new(r, big_r).map_err(AnalysisError::from)?;
    let mut m = Vec::new();

    // closed form against enumeration, and the Zero/ZeroBar mirror
    let (mut worst, mut mirror) = (0.0f64, 0.0f64);
    for theta in grid(100, FRAC_PI_2) {
        for (policy, claim) in [
            (ClaimPolicy::Zero, StateLabel::Zero),
            (ClaimPolicy::ZeroBar, StateLabel::ZeroBar),
        ] {
            let point = qgamble::strategy::CheatPoint::new(theta, 0.0, policy)
                .map_err(AnalysisError::from)?;
            let oracle = oracle_expected_gain(&fixed_state_cheat(point), &clean)?;
            worst = worst.max(oracle.max_abs_diff(&exact_cheat_gain(theta, r, big_r, claim)));
        }
        let a = exact_cheat_gain(theta, r, big_r, StateLabel::Zero);
        let b = exact_cheat_gain(FRAC_PI_2 - theta, r, big_r, StateLabel::ZeroBar);
        mirror = mirror.max(a.max_abs_diff(&b));
    }
    m.push(Metric::info("closed_form_vs_oracle_max_diff", worst).close_to(0.0, EXACT_TOL));
    m.push(Metric::info("claim_mirror_max_diff", mirror).close_to(0.0, EXACT_TOL));

    let honest = oracle_expected_gain(&honest_alice(), &clean)?;
    m.push(
        Metric::info("honest_normal_round_gain", honest.normal_term / (1.0 - r))
            .close_to(0.0, EXACT_TOL),
    );
    m.push(Metric::info("honest_gain", honest.total).close_to(r * (1.0 + SQRT_2), EXACT_TOL));

    let opt = linearized_optimum(r, big_r);
    let hi = FRAC_PI_4.max(2.0 * opt.theta_star);
    let (x, fx) = golden_section_maximize(|t| linearized_gain_bound(t, r, big_r), 0.0, hi, 1e-12);
    m.push(Metric::info("optimizer_theta_star", x).close_to(opt.theta_star, OPTIMIZER_TOL));
    m.push(Metric::info("optimizer_g_max", fx).close_to(opt.g_max, OPTIMIZER_TOL));
    let c = constants();
    let closed_theta = 2.0 * c.alpha / ((1.0 - c.p) * r * big_r);
    m.push(Metric::info("theta_star", opt.theta_star).close_to(closed_theta, EXACT_TOL));

    let cap_diff = [big_r, 1e1, 1e2, 1e3, 1e4, 1e6]
        .iter()
        .map(|&rr| {
            let cap = optimal_check_rate(rr);
            (linearized_optimum(cap.check_rate, rr).g_max - cap.gain_cap).abs()
        })
        .fold(0.0, f64::max);
    m.push(Metric::info("cap_identity_max_diff", cap_diff).close_to(0.0, EXACT_TOL));
    let ratio = optimal_check_rate(big_r).gain_cap / optimal_check_rate(100.0 * big_r).gain_cap;
    m.push(Metric::info("cap_ratio_100x_penalty", ratio).close_to(10.0, OPTIMIZER_TOL));

    let mut floor_gap = f64::NEG_INFINITY;
    for i in 0..100 {
        let theta = PI * i as f64 / 99.0;
        for j in 0..100 {
            let rj = (j + 1) as f64 / 101.0;
            for guess in StateLabel::ALL {
                floor_gap = floor_gap.max(rj / 2.0 - unmeasured_posterior(theta, rj, guess));
            }
        }
    }
    m.push(Metric::info("posterior_floor_violation", floor_gap).at_most(0.0, 1e-15));

    let target = attack_pair().reduced_bloch(Subsystem::B);
    let legal = Ensemble::new(vec![(0.5, PureQubit::ZERO), (0.5, PureQubit::ZERO_BAR)])
        .expect("valid ensemble");
    let steered = entangled_cheat(BasisPolicy::always_x(OutcomeTable::TRUTHFUL))
        .induced_ensemble(StateLabel::Zero);
    let hjw = ensemble_average_bloch(&legal)
        .max_abs_diff(&target)
        .max(ensemble_average_bloch(steered.ensemble()).max_abs_diff(&target))
        .max(target.max_abs_diff(&BlochVector::new(0.5, 0.0, 0.5)));
    m.push(Metric::info("ensemble_bloch_max_diff", hjw).close_to(0.0, EXACT_TOL));

    let z_diff = oracle_transcript(
        &entangled_cheat(BasisPolicy::always_z()),
        &honest_bob(),
        &clean,
    )?
    .max_abs_diff(&oracle_transcript(&honest_alice(), &honest_bob(), &clean)?);
    m.push(Metric::info("z_policy_transcript_diff", z_diff).close_to(0.0, EXACT_TOL));

    // sampling against enumeration, on the configured (possibly noisy) channel
    let exact = oracle_expected_gain(&honest_alice(), &cfg.params)?;
    m.push(mc_gain(
        "honest_mc_gain",
        &sample(cfg, &honest_alice())?,
        exact.total,
    )?);
    let cheat = fixed_state_cheat(cfg.point);
    let exact = oracle_expected_gain(&cheat, &cfg.params)?;
    m.push(mc_gain(
        "cheat_mc_gain",
        &sample(cfg, &cheat)?,
        exact.total,
    )?);
    Ok(m)
}
