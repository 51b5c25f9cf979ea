//! Release gate for the analyzer: eight end-to-end criteria, one test per
//! criterion, each printing a single `criterion N: PASS` line on success
//! (visible with `cargo test -- --nocapture`; the per-test ok/FAILED line of
//! the harness carries the same verdict either way).
//!
//! The checks run against the shipped demo programs, the benchmark corpus
//! with its frozen expectation manifest, and seeded randomized workloads, so
//! a pass certifies the binary, the library API, and the statistical
//! behavior of the certified verdicts at once.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use probcert_core::bounds::bounding_functions;
use probcert_core::context::AnalysisContext;
use probcert_core::moments::closed_form;
use probcert_core::recurrence::{residual, solve};
use probcert_core::rules::AnalysisReport;
use probcert_core::semantics::{monomial_universe, one_step_distribution};
use probcert_core::symbolic::{
    dominated, dominating, rat, rint, ExpPolynomial, Monomial, Polynomial, Rat, Sym, SymLin,
    SymValues,
};
use probcert_core::{
    analyze, check_bounds_against_stats, parse_program, simulate, Goal, Outcome, SimulationConfig,
    ValidatedProgram,
};

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run_analyze(file: &str, extra: &[&str]) -> Value {
    let path = repo_path(file);
    let started = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_probcert"))
        .arg("analyze")
        .arg(&path)
        .arg("--json")
        .args(extra)
        .output()
        .expect("the analyzer binary should run");
    let elapsed = started.elapsed();
    assert!(
        output.status.success(),
        "analyze {file} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(
        elapsed < Duration::from_secs(5),
        "analyze {file} took {elapsed:?}, over the 5 s budget"
    );
    serde_json::from_slice(&output.stdout).expect("reports are valid JSON")
}

fn verdict<'a>(report: &'a Value, goal: &str) -> &'a Value {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["goal"] == goal)
        .unwrap_or_else(|| panic!("no verdict for goal {goal}"))
}

fn assert_certified(report: &Value, goal: &str, rule: &str, program: &str) {
    let v = verdict(report, goal);
    assert_eq!(v["result"], "certified", "{program}: goal {goal} should be certified");
    assert_eq!(v["rule"], rule, "{program}: goal {goal} should be certified by {rule}");
}

fn witness_field<'a>(report: &'a Value, goal: &str, field: &str) -> &'a str {
    verdict(report, goal)["witness"][field]
        .as_str()
        .unwrap_or_else(|| panic!("goal {goal} should carry witness field {field}"))
}

/// Six flagship programs with exact certificates, each analyzed in under
/// five seconds: a fair random walk (almost-sure termination with infinite
/// expected runtime), an escaping walk refuting almost-sure termination, a
/// bounded planar walk with finite expected runtime, and three programs
/// whose certificates need conditions that hold only from some iteration on.
#[test]
fn criterion_1_flagship_program_verdicts() {
    // Fair random walk: terminates almost surely, but only in infinite
    // expected time. The certificate decreases through the x - 1 branch
    // taken with probability 1/2, by at least 1.
    let fair = run_analyze("demos/fair_random_walk.prob", &["--witness"]);
    assert_certified(&fair, "ast", "sm", "fair_random_walk");
    assert_eq!(witness_field(&fair, "ast", "martingale"), "0");
    assert_eq!(witness_field(&fair, "ast", "decrease_branch"), "x - 1");
    assert_eq!(witness_field(&fair, "ast", "branch_probability"), "1/2");
    assert_eq!(witness_field(&fair, "ast", "decrease"), "1");
    assert_certified(&fair, "non-past", "r-past", "fair_random_walk");
    assert_eq!(witness_field(&fair, "non-past", "martingale"), "0");
    assert_eq!(witness_field(&fair, "non-past", "difference_bound"), "1");

    // Escaping walk: drift +1/2 away from the exit, bounded step size 1.
    let escaping = run_analyze("demos/escaping_random_walk.prob", &["--witness"]);
    assert_certified(&escaping, "non-ast", "r-ast", "escaping_random_walk");
    assert_eq!(witness_field(&escaping, "non-ast", "epsilon"), "1/2");
    assert_eq!(witness_field(&escaping, "non-ast", "difference_bound"), "1");

    // Bounded planar walk: the guard value is a ranking supermartingale
    // with one-step drift -x^2 - 2 <= -2.
    let planar = run_analyze("demos/bounded_planar_walk.prob", &["--witness"]);
    assert_certified(&planar, "past", "rsm", "bounded_planar_walk");
    assert_eq!(witness_field(&planar, "past", "martingale"), "-x^2 - 2");

    // Steepening drift walk: the drift -1/2*i^2 + i + 3/2 is positive for
    // the first iterations and certifies only because the side conditions
    // may hold eventually rather than from iteration zero.
    let steepening = run_analyze("demos/steepening_drift_walk.prob", &["--witness"]);
    assert_certified(&steepening, "past", "rsm", "steepening_drift_walk");
    assert_eq!(witness_field(&steepening, "past", "martingale"), "-1/2*y^2 + y + 3/2");
    assert_eq!(witness_field(&steepening, "past", "bound"), "-1/2*i^2 + i + 3/2");

    // Delayed decrease walk: zero drift, and the decreasing branch only
    // wins eventually; the branch change is bounded above by -i.
    let delayed = run_analyze("demos/delayed_decrease_walk.prob", &["--witness"]);
    assert_certified(&delayed, "ast", "sm", "delayed_decrease_walk");
    assert_eq!(witness_field(&delayed, "ast", "bound"), "-i");
    assert_eq!(witness_field(&delayed, "ast", "decrease_branch"), "x - y + 4");

    // Shrinking escape walk: the repulsion strength decays toward 1/3 but
    // stays bounded away from zero, with unit difference bound.
    let shrinking = run_analyze("demos/shrinking_escape_walk.prob", &["--witness"]);
    assert_certified(&shrinking, "non-ast", "r-ast", "shrinking_escape_walk");
    assert_eq!(witness_field(&shrinking, "non-ast", "bound"), "-1/3 + 1/3*(1/2)^i");
    assert_eq!(witness_field(&shrinking, "non-ast", "epsilon"), "1/3 - 1/3*(1/2)^i");
    assert_eq!(witness_field(&shrinking, "non-ast", "difference_bound"), "1");

    println!(
        "criterion 1: PASS - six flagship programs certified with exact witnesses, \
         each under 5 s"
    );
}

/// With `--no-relaxation`, side conditions must hold from iteration zero.
/// The three programs whose certificates are inherently eventual flip to
/// Unknown; the three whose certificates hold everywhere persist.
#[test]
fn criterion_2_relaxation_ablation() {
    let outcomes = |file: &str| -> Value { run_analyze(file, &["--no-relaxation"]) };

    let fair = outcomes("demos/fair_random_walk.prob");
    assert_eq!(fair["relaxation"], false);
    assert_eq!(verdict(&fair, "ast")["result"], "certified");
    assert_eq!(verdict(&fair, "non-past")["result"], "certified");

    let escaping = outcomes("demos/escaping_random_walk.prob");
    assert_eq!(verdict(&escaping, "non-ast")["result"], "certified");

    let planar = outcomes("demos/bounded_planar_walk.prob");
    assert_eq!(verdict(&planar, "past")["result"], "certified");

    let steepening = outcomes("demos/steepening_drift_walk.prob");
    assert_eq!(
        verdict(&steepening, "past")["result"],
        "unknown",
        "the steepening walk needs eventual conditions"
    );

    let delayed = outcomes("demos/delayed_decrease_walk.prob");
    assert_eq!(
        verdict(&delayed, "ast")["result"],
        "unknown",
        "the delayed decrease only wins eventually"
    );

    let shrinking = outcomes("demos/shrinking_escape_walk.prob");
    assert_eq!(
        verdict(&shrinking, "non-ast")["result"],
        "unknown",
        "the shrinking escape repels only eventually"
    );

    println!(
        "criterion 2: PASS - without relaxation the three eventual certificates flip \
         to unknown and the three everywhere-valid ones persist"
    );
}

/// The candidate-solution machinery reproduced exactly on the doubling
/// walk: both sign-split candidate closed forms, and the enveloping
/// bounding functions (1/2)^i and 2^i.
#[test]
fn criterion_3_doubling_walk_candidate_bounds() {
    let program = parse_program(
        "y := 0\nx := 1\nwhile x < 100:\n    y = y + 1\n    x = 2*x + y*y @1/2; (1/2)*x\n",
    )
    .unwrap();
    let ctx = AnalysisContext::with_defaults(program);
    let x = Monomial::var(2, 1);
    let bounds = bounding_functions(&ctx, &x).unwrap();

    let uppers: Vec<String> = bounds.upper_candidates.iter().map(|c| c.render()).collect();
    assert!(
        uppers.contains(&"(c1 + 3*d)*2^i - d*i^2 - 2*d*i - 3*d".to_string()),
        "upper candidates were {uppers:?}"
    );
    assert!(
        uppers.contains(&"2*d*i^2 - 8*d*i + 12*d + (c1 - 12*d)*(1/2)^i".to_string()),
        "upper candidates were {uppers:?}"
    );
    assert_eq!(uppers.len(), 2);
    assert_eq!(bounds.lower.render(), "(1/2)^i");
    assert_eq!(bounds.upper.render(), "2^i");

    println!(
        "criterion 3: PASS - doubling walk candidates and envelope \
         l = (1/2)^i, u = 2^i reproduced exactly"
    );
}

/// The one-step distribution of x^2 on the two-variable square program:
/// exactly four branches with probabilities 1/6, 1/6, 1/3, 1/3 and the
/// expected expansion polynomials.
#[test]
fn criterion_4_one_step_distribution_of_a_square() {
    let program = parse_program(
        "y := 1\nx := 1\nwhile x > 0:\n    y = y + 1 @1/2; y + 2\n    x = x + y @1/3; x - y\n",
    )
    .unwrap();
    let ctx = AnalysisContext::with_defaults(program);
    let arity = 2;
    let y = Polynomial::var(arity, 0);
    let x = Polynomial::var(arity, 1);
    let dist = one_step_distribution(&ctx, &x.pow(2)).unwrap();

    assert_eq!(dist.branches.len(), 4);
    let total: Rat = dist.branches.iter().map(|(_, p)| p.clone()).sum();
    assert_eq!(total, rint(1));

    let constant = |v: i64| Polynomial::constant(arity, rint(v));
    let expected = [
        (x.add(&y).add(&constant(1)).pow(2), rat(1, 6)),
        (x.add(&y).add(&constant(2)).pow(2), rat(1, 6)),
        (x.sub(&y).sub(&constant(1)).pow(2), rat(1, 3)),
        (x.sub(&y).sub(&constant(2)).pow(2), rat(1, 3)),
    ];
    for (poly, prob) in &expected {
        let hit = dist
            .branches
            .iter()
            .find(|(b, _)| b == poly)
            .unwrap_or_else(|| panic!("missing branch {}", poly.render(&ctx.program().var_names)));
        assert_eq!(&hit.1, prob, "wrong probability for {}", poly.render(&ctx.program().var_names));
    }

    println!(
        "criterion 4: PASS - one-step distribution of x^2 has the four expected \
         branches with probabilities 1/6, 1/6, 1/3, 1/3"
    );
}

/// Benchmark corpus counts against the frozen manifest, in both modes:
/// at least 18/21, 9/11, and 5/6 certified in the three groups, with the
/// three known incompletenesses analyzed but uncertified and the three
/// out-of-scope programs rejected by the frontend.
#[test]
fn criterion_5_benchmark_corpus_counts() {
    let corpus = repo_path("corpus");
    let manifest = repo_path("corpus/expected.toml");
    let run = |extra: &[&str]| -> Value {
        let output = Command::new(env!("CARGO_BIN_EXE_probcert"))
            .arg("bench")
            .arg(&corpus)
            .arg("--expected")
            .arg(&manifest)
            .arg("--json")
            .args(extra)
            .output()
            .expect("the bench binary should run");
        assert!(
            output.status.success(),
            "bench exited nonzero, meaning verdicts drifted from the manifest: {}",
            String::from_utf8_lossy(&output.stdout)
        );
        serde_json::from_slice(&output.stdout).expect("bench reports are valid JSON")
    };

    let report = run(&[]);
    assert_eq!(report["mismatches"], 0);
    let group = |name: &str| -> &Value {
        report["groups"].as_array().unwrap().iter().find(|g| g["group"] == name).unwrap()
    };
    let past = group("past");
    assert_eq!(past["total"], 21);
    assert!(past["certified"].as_u64().unwrap() >= 18, "past certified below 18");
    let ast = group("ast");
    assert_eq!(ast["total"], 11);
    assert!(ast["certified"].as_u64().unwrap() >= 9, "ast certified below 9");
    let nast = group("nast");
    assert_eq!(nast["total"], 6);
    assert!(nast["certified"].as_u64().unwrap() >= 5, "nast certified below 5");

    let row = |name: &str| -> &Value {
        report["programs"].as_array().unwrap().iter().find(|p| p["name"] == name).unwrap()
    };
    for (name, goal) in [
        ("geometric_exponential", "past"),
        ("symmetric_2d_random_walk", "ast"),
        ("polynomial_nast", "non-ast"),
    ] {
        let r = row(name);
        assert_eq!(r["status"], "analyzed", "{name} should analyze");
        assert_eq!(r["verdicts"][goal], "unknown", "{name} is a known incompleteness");
    }
    for name in ["nested_loops", "sequential_loops", "fair_in_limit_random_walk"] {
        assert_eq!(row(name)["status"], "rejected", "{name} is out of scope");
    }

    // The manifest also freezes the stricter no-relaxation verdicts; a
    // clean exit means every one of them still matches.
    let light = run(&["--no-relaxation"]);
    assert_eq!(light["mismatches"], 0);
    assert_eq!(light["relaxation"], false);

    println!(
        "criterion 5: PASS - corpus certifies {}/21 past, {}/11 ast, {}/6 non-ast \
         with the expected failures and rejections, in both modes",
        past["certified"], ast["certified"], nast["certified"]
    );
}

// Shared randomized-suite helpers.

fn random_rat(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rat {
    let num = rng.gen_range(-max_num..=max_num);
    let den = rng.gen_range(1..=max_den);
    rat(num, den)
}

fn random_symlin(rng: &mut ChaCha8Rng) -> SymLin {
    let mut acc = SymLin::from_rat(random_rat(rng, 6, 4));
    for sym in [Sym::C1, Sym::C2, Sym::D] {
        if rng.gen_bool(0.4) {
            acc = acc.add(&SymLin::sym(sym).scale(&random_rat(rng, 4, 3)));
        }
    }
    acc
}

fn random_exp_poly(rng: &mut ChaCha8Rng, bases: &[Rat], plain: bool) -> ExpPolynomial {
    let mut h = ExpPolynomial::zero();
    for _ in 0..rng.gen_range(0..=3usize) {
        let base = bases[rng.gen_range(0..bases.len())].clone();
        let degree = rng.gen_range(0..=3u32);
        let coeff = if plain {
            SymLin::from_rat(random_rat(rng, 8, 3))
        } else {
            random_symlin(rng)
        };
        h.add_term(base, degree, coeff);
    }
    h
}

/// First-order recurrence closed forms match exact forward iteration for 30
/// steps on 200 random instances, and leave zero residual when substituted
/// back into the recurrence.
fn recurrence_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let syms = SymValues { c1: rat(7, 3), c2: rat(2, 5), d: rat(11, 4) };
    let r_pool: Vec<Rat> =
        vec![rint(0), rint(1), rint(2), rat(1, 2), rat(3, 2), rint(3), rat(1, 3), rint(5)];
    for case in 0..200 {
        let r = r_pool[rng.gen_range(0..r_pool.len())].clone();
        // Include 0, 1, and the recurrence coefficient itself among the
        // bases: those are the resonant cases that need polynomial lifts.
        let bases =
            vec![rint(0), rint(1), rat(1, 2), rint(2), rint(3), r.clone(), rat(5, 2)];
        let h = random_exp_poly(&mut rng, &bases, false);
        let y0 = random_symlin(&mut rng);

        let solution = solve(&r, &h, &y0);
        let rem = residual(&r, &h, &solution.expr);
        if solution.valid_from == 0 {
            assert!(
                rem.is_zero(),
                "case {case}: nonzero residual for r = {r}, h = {}",
                h.render()
            );
        } else {
            // A memoryless recurrence fed an impulse cannot express the
            // shifted impulse; the residual must then be confined to
            // base-zero terms, which vanish at every positive iteration.
            assert!(
                rem.iter_terms().all(|(base, _, _)| base.is_zero()),
                "case {case}: residual {} persists past iteration zero",
                rem.render()
            );
        }
        assert!(solution.valid_from <= 8, "case {case}: unexpectedly late validity");

        let mut value = y0.eval(&syms);
        for i in 0..=30u64 {
            if i >= solution.valid_from {
                assert_eq!(
                    solution.expr.eval(i, &syms),
                    value,
                    "case {case}: closed form diverges from iteration at i = {i}"
                );
            }
            value = r.clone() * value + h.eval(i, &syms);
        }
    }
}

/// Exact-arithmetic check that `candidate` eventually stays below `alpha *
/// envelope` for a scale fitted on a leading window with doubled slack.
/// Returns false when a sweep point escapes. The windows start at 128:
/// with bases as close as 4/3 apart, degree gaps up to 3, and coefficient
/// ratios up to 72, sign and ratio transients settle near i = 64, so the
/// fit never reads a dying term as the trend.
fn upper_envelope_holds(envelope: &ExpPolynomial, candidate: &ExpPolynomial) -> bool {
    let syms = SymValues::default();
    let fit: Vec<(Rat, Rat)> =
        (128..=192u64).map(|i| (envelope.eval(i, &syms), candidate.eval(i, &syms))).collect();
    let two = rint(2);
    let alpha = if fit.iter().all(|(g, _)| g.is_positive()) {
        let worst =
            fit.iter().map(|(g, f)| f.clone() / g.clone()).max().unwrap().max(Rat::zero());
        two * (Rat::one() + worst)
    } else if fit.iter().all(|(g, _)| g.is_negative()) {
        // A negative envelope can only be relaxed toward zero; every member
        // must already be negative, and the scale shrinks to the weakest
        // observed ratio.
        if fit.iter().any(|(_, f)| !f.is_negative()) {
            return false;
        }
        let weakest = fit.iter().map(|(g, f)| f.clone() / g.clone()).min().unwrap();
        weakest / two
    } else {
        // The envelope of the zero class: members must eventually vanish or
        // stay nonpositive, with no scale to fit.
        return (128..=448u64).all(|i| !candidate.eval(i, &syms).is_positive());
    };
    (193..=448u64).all(|i| candidate.eval(i, &syms) <= alpha.clone() * envelope.eval(i, &syms))
}

/// Dual of [`upper_envelope_holds`].
fn lower_envelope_holds(envelope: &ExpPolynomial, candidate: &ExpPolynomial) -> bool {
    upper_envelope_holds(&envelope.neg(), &candidate.neg())
}

/// The asymptotic envelopes returned by `dominating` and `dominated`
/// numerically bound 200 random families after scale fitting, with zero
/// violations.
fn domination_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let bases =
        vec![rint(0), rat(1, 3), rat(1, 2), rint(1), rat(3, 2), rint(2), rint(3)];
    for case in 0..200 {
        let family: Vec<ExpPolynomial> = (0..rng.gen_range(1..=4usize))
            .map(|_| random_exp_poly(&mut rng, &bases, true))
            .collect();
        let upper = dominating(&family);
        let lower = dominated(&family);
        for f in &family {
            assert!(
                upper_envelope_holds(&upper, f),
                "case {case}: {} escaped the upper envelope {}",
                f.render(),
                upper.render()
            );
            assert!(
                lower_envelope_holds(&lower, f),
                "case {case}: {} escaped the lower envelope {}",
                f.render(),
                lower.render()
            );
        }
    }
}

fn load_corpus_program(name: &str) -> ValidatedProgram {
    let path = repo_path(&format!("corpus/{name}.prob"));
    let source = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    parse_program(&source).unwrap_or_else(|e| panic!("{name} should parse: {e}"))
}

/// Moment closed forms agree with a 10^5-run simulation within four
/// standard errors at iterations 1, 5, 10, and 20 on four corpus programs
/// covering fair, biased, polynomial, and rational-coefficient updates.
fn moment_suite() {
    let programs = ["gambling", "biased_random_walk_constant", "polynomial_past_1",
        "coupon_collector_4"];
    let syms = SymValues::default();
    for name in programs {
        let program = load_corpus_program(name);
        let arity = program.arity();
        let mut monomials: Vec<Monomial> = Vec::new();
        for v in 0..arity {
            monomials.push(Monomial::var(arity, v));
            monomials.push(Monomial::var(arity, v).pow(2));
        }
        let exprs: Vec<Polynomial> =
            monomials.iter().map(|m| Polynomial::from_monomial(m.clone(), Rat::one())).collect();
        let config =
            SimulationConfig { runs: 100_000, max_steps: 20, seed: 42, record_horizon: 20 };
        let outcome = simulate(&program, &config, &exprs, false);

        let ctx = AnalysisContext::with_defaults(program);
        for (k, monomial) in monomials.iter().enumerate() {
            let form = closed_form(&ctx, monomial).unwrap();
            assert_eq!(form.valid_from, 0, "{name}: moment validity should start at zero");
            for i in [1usize, 5, 10, 20] {
                let step = &outcome.per_step[i];
                assert_eq!(step.alive, 100_000, "unguarded runs never exit");
                let stats = &step.stats[k];
                let exact = form.expr.eval(i as u64, &syms).to_f64().unwrap();
                let stderr = (stats.variance / step.alive as f64).sqrt();
                let slack = 4.0 * stderr + 1e-6 * (1.0 + exact.abs());
                assert!(
                    (exact - stats.mean).abs() <= slack,
                    "{name}: moment {} at i = {i} is {exact}, sampled {} (4 se = {})",
                    monomial.render(&ctx.program().var_names),
                    stats.mean,
                    4.0 * stderr
                );
            }
        }
    }
}

/// Every bounding function of every monomial tracked by any analyzable
/// corpus program envelopes a 10^4-run unguarded simulation over
/// iterations 16 through 64.
fn corpus_bound_suite() {
    let corpus = repo_path("corpus");
    let mut checked_monomials = 0usize;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&corpus)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map_or(false, |ext| ext == "prob"))
        .collect();
    entries.sort();
    assert!(!entries.is_empty(), "the corpus directory should hold programs");
    for path in entries {
        let source = std::fs::read_to_string(&path).unwrap();
        // Out-of-scope corpus entries do not parse; everything else must.
        let Ok(program) = parse_program(&source) else { continue };
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let program_clock = Instant::now();
        let ctx = AnalysisContext::with_defaults(program.clone());
        let universe: Vec<Monomial> =
            monomial_universe(&ctx).unwrap().into_iter().collect();
        let exprs: Vec<Polynomial> = universe
            .iter()
            .map(|m| Polynomial::from_monomial(m.clone(), Rat::one()))
            .collect();
        let config =
            SimulationConfig { runs: 10_000, max_steps: 64, seed: 42, record_horizon: 64 };
        let outcome = simulate(&program, &config, &exprs, false);
        for (k, monomial) in universe.iter().enumerate() {
            let bounds = bounding_functions(&ctx, monomial)
                .unwrap_or_else(|e| panic!("{name}: no bounds for a universe monomial: {e}"));
            let violations = check_bounds_against_stats(&bounds, &outcome, k, (16, 64));
            assert!(
                violations.is_empty(),
                "{name}: monomial {} violated its envelope: {}",
                monomial.render(&ctx.program().var_names),
                violations[0].render()
            );
            checked_monomials += 1;
        }
        eprintln!("corpus bounds: {name} {:?} ({} monomials)", program_clock.elapsed(), universe.len());
    }
    assert!(checked_monomials >= 60, "expected a substantial monomial population");
}

/// Timing probe for the heaviest suite alone; kept out of the default run.
#[test]
#[ignore]
fn corpus_bound_suite_probe() {
    corpus_bound_suite();
}

/// The four randomized property suites, each under its 60-second budget.
#[test]
fn criterion_6_property_suites() {
    let mut timings = Vec::new();
    for (name, suite) in [
        ("recurrences", recurrence_suite as fn()),
        ("domination", domination_suite as fn()),
        ("moments", moment_suite as fn()),
        ("corpus bounds", corpus_bound_suite as fn()),
    ] {
        let started = Instant::now();
        suite();
        let elapsed = started.elapsed();
        eprintln!("suite {name}: {elapsed:?}");
        assert!(
            elapsed < Duration::from_secs(60),
            "{name} suite took {elapsed:?}, over the 60 s budget"
        );
        timings.push(format!("{name} {:.1}s", elapsed.as_secs_f64()));
    }
    println!("criterion 6: PASS - property suites all under 60 s ({})", timings.join(", "));
}

fn manifest_certified(goal_key: &str) -> Vec<String> {
    let manifest = repo_path("corpus/expected.toml");
    let doc: toml::Value =
        toml::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
    let programs = doc["programs"].as_table().unwrap();
    let mut names: Vec<String> = programs
        .iter()
        .filter(|(_, entry)| {
            entry
                .get("expect")
                .and_then(|e| e.get(goal_key))
                .and_then(|v| v.as_str())
                .map_or(false, |v| v == "certified")
        })
        .map(|(name, _)| name.clone())
        .collect();
    names.sort();
    names
}

/// Certified verdicts hold up under simulation: every PAST-certified
/// program terminates on all 10^4 runs within 10^6 steps, and every
/// NonAST-certified program keeps its termination fraction below 0.95
/// at 10^4 runs of 10^4 steps, all at seed 42.
#[test]
fn criterion_7_soundness_cross_checks() {
    let past_certified = manifest_certified("past");
    assert_eq!(past_certified.len(), 18, "the manifest freezes 18 past certificates");
    for name in &past_certified {
        let program = load_corpus_program(name);
        let config =
            SimulationConfig { runs: 10_000, max_steps: 1_000_000, seed: 42, record_horizon: 0 };
        let outcome = simulate(&program, &config, &[], true);
        assert_eq!(
            outcome.terminated, 10_000,
            "{name} is certified to terminate in finite expected time, yet {} of 10000 \
             simulated runs did not finish within 10^6 steps",
            10_000 - outcome.terminated
        );
    }

    let nast_certified = manifest_certified("non_ast");
    assert_eq!(nast_certified.len(), 5, "the manifest freezes 5 non-ast certificates");
    for name in &nast_certified {
        let program = load_corpus_program(name);
        let config =
            SimulationConfig { runs: 10_000, max_steps: 10_000, seed: 42, record_horizon: 0 };
        let outcome = simulate(&program, &config, &[], true);
        assert!(
            outcome.termination_fraction < rat(95, 100),
            "{name} is certified non-terminating with positive probability, yet {} of \
             10000 simulated runs terminated",
            outcome.terminated
        );
    }

    println!(
        "criterion 7: PASS - 18 past certificates and 5 non-ast certificates agree \
         with seeded simulation"
    );
}

// Random program generation for the mutual-exclusion fuzz.

fn random_polynomial(
    rng: &mut ChaCha8Rng,
    arity: usize,
    usable_vars: usize,
    max_terms: usize,
) -> Polynomial {
    let mut poly = Polynomial::zero(arity);
    for _ in 0..rng.gen_range(0..=max_terms) {
        let mut exps = vec![0u32; arity];
        for e in exps.iter_mut().take(usable_vars) {
            *e = rng.gen_range(0..=2u32);
        }
        if exps.iter().sum::<u32>() > 2 {
            continue;
        }
        let coeff = rat(rng.gen_range(-3..=3i64), rng.gen_range(1..=2i64));
        poly.add_term(Monomial::from_exps(exps), coeff);
    }
    poly
}

/// One random loop, valid by construction: declaration-ordered updates,
/// non-negative self-coefficients, a strict polynomial guard, and branch
/// probabilities strictly inside (0, 1).
fn random_program_source(rng: &mut ChaCha8Rng) -> String {
    let arity = rng.gen_range(1..=2usize);
    let names: Vec<String> = ["x", "y"][..arity].iter().map(|s| s.to_string()).collect();
    let self_coeffs = [rint(0), rint(1), rint(2), rat(1, 2), rat(3, 2)];
    let probs = [rat(1, 5), rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4)];

    let mut source = String::new();
    for name in &names {
        let init = rat(rng.gen_range(-10..=10i64), rng.gen_range(1..=2i64));
        source.push_str(&format!("{name} := {init}\n"));
    }

    let mut left = random_polynomial(rng, arity, arity, 2);
    if left.is_zero() {
        left = Polynomial::var(arity, 0);
    }
    let right = rng.gen_range(-5..=20i64);
    let op = if rng.gen_bool(0.5) { ">" } else { "<" };
    source.push_str(&format!("while {} {op} {right}:\n", left.render(&names)));

    for (v, name) in names.iter().enumerate() {
        let branch = |rng: &mut ChaCha8Rng| -> String {
            let self_part = Polynomial::var(arity, v)
                .scale(&self_coeffs[rng.gen_range(0..self_coeffs.len())].clone());
            let rest = random_polynomial(rng, arity, v, 2);
            let constant = Polynomial::constant(
                arity,
                rat(rng.gen_range(-3..=3i64), rng.gen_range(1..=2i64)),
            );
            self_part.add(&rest).add(&constant).render(&names)
        };
        if rng.gen_bool(0.5) {
            let prob = probs[rng.gen_range(0..probs.len())].clone();
            let first = branch(rng);
            let second = branch(rng);
            source.push_str(&format!("    {name} = {first} @{prob}; {second}\n"));
        } else {
            source.push_str(&format!("    {name} = {}\n", branch(rng)));
        }
    }
    source
}

fn certified_goals(report: &AnalysisReport) -> BTreeSet<Goal> {
    report
        .verdicts
        .iter()
        .filter(|v| v.result == Outcome::Certified)
        .map(|v| v.goal)
        .collect()
}

/// Everything observable about a report except wall-clock timings.
fn report_fingerprint(report: &AnalysisReport) -> String {
    let mut out = format!(
        "relaxed={} drift={:?} sign={:?}\n",
        report.relaxed, report.drift_expression, report.drift_sign
    );
    for v in &report.verdicts {
        out.push_str(&format!(
            "{} rule={} result={:?} ruled_out={} witness={:?} diagnostics={:?}\n",
            v.goal.render(),
            v.rule.render(),
            v.result,
            v.ruled_out,
            v.witness,
            v.diagnostics
        ));
    }
    out
}

/// 500 random valid loops analyzed for all four goals: no contradictory
/// certificate pairs, no panics, and bit-identical reports across two
/// independent analyses.
#[test]
fn criterion_8_mutual_exclusion_fuzzing() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let forbidden = [
        (Goal::Past, Goal::NonPast),
        (Goal::Past, Goal::NonAst),
        (Goal::Ast, Goal::NonAst),
    ];
    let mut certified_total = 0usize;
    for case in 0..500 {
        let source = random_program_source(&mut rng);
        let program = parse_program(&source)
            .unwrap_or_else(|e| panic!("case {case}: generator emitted invalid loop: {e}\n{source}"));

        let first = analyze(&AnalysisContext::with_defaults(program.clone()), &Goal::all());
        let second = analyze(&AnalysisContext::with_defaults(program), &Goal::all());
        assert_eq!(
            report_fingerprint(&first),
            report_fingerprint(&second),
            "case {case}: analysis is not deterministic\n{source}"
        );

        let certified = certified_goals(&first);
        certified_total += certified.len();
        for (a, b) in &forbidden {
            assert!(
                !(certified.contains(a) && certified.contains(b)),
                "case {case}: contradictory certificates {} and {}\n{source}",
                a.render(),
                b.render()
            );
        }
    }
    println!(
        "criterion 8: PASS - 500 random loops, {certified_total} certificates, no \
         contradictions, deterministic reports"
    );
}
