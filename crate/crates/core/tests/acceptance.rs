//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits non-zero if any check fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vorace::data::bundled;
use vorace::ensemble::{evaluate, EnsembleConfig};
use vorace::montecarlo::{simulate, SimConfig, SimTie, VoterModel};
use vorace::theory::{
    audit, gen_fun_coeff, mu_pid, overlap_bound, ratio, t_hetero, t_p_binary, t_p_derivative_binary, t_p_oracle,
    t_p_paper, to_f64, BinaryTie, HeteroParams, KVariant, OracleInput, OracleTie, OverlapParams, Rational,
    TheoryParams,
};
use vorace::types::{Profile, Ranking, ScoreVector};
use vorace::voting::{agreement, Rule, TiePolicy};

type Check = Result<String, String>;

/// Name, time limit and check of one criterion.
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn example() -> TheoryParams {
    TheoryParams::new(3, 4, ratio(4, 5)).unwrap()
}

fn small_instance() -> Check {
    let phi: Vec<Rational> = (1..=3).map(|i| gen_fun_coeff(4, i, 3)).collect();
    ensure(phi == vec![ratio(0, 1), ratio(3, 1), ratio(1, 1)], || format!("phi = {phi:?}"))?;
    let t = to_f64(&t_p_paper(&example(), KVariant::Example).map_err(|e| e.to_string())?);
    ensure(within(t, 0.963, 0.0005), || format!("T = {t}"))?;
    Ok(format!("phi = (0, 3, 1), T = {t:.6}"))
}

fn formula_audit() -> Check {
    let report = audit(&example());
    ensure(report.k_theorem == ratio(2744, 1000), || format!("K = {}", report.k_theorem))?;
    let oracle = t_p_oracle(&OracleInput::Homogeneous(example()), OracleTie::StrictWin).map_err(|e| e.to_string())?;
    ensure(oracle == ratio(896, 1000), || format!("oracle = {oracle}"))?;
    let text = report.to_string();
    ensure(text.contains("MISMATCH") && !report.discrepancies().is_empty(), || {
        "no discrepancy reported".into()
    })?;
    let variants: Vec<_> = report.discrepancies().iter().map(|(v, _)| v.name()).collect();
    Ok(format!("K = 2744/1000, oracle = 112/125, mismatching variants: {}", variants.join(", ")))
}

const BINARY_CURVES: [(usize, &[(f64, f64)]); 3] = [
    (
        10,
        &[
            (0.1, 0.000146903),
            (0.2, 0.00636938),
            (0.3, 0.047349),
            (0.4, 0.166239),
            (0.5, 0.376953),
            (0.6, 0.633103),
            (0.7, 0.849732),
            (0.8, 0.967207),
            (0.9, 0.998365),
            (0.95, 0.999936),
            (1.0, 1.0),
        ],
    ),
    (
        50,
        &[
            (0.05, 0.0),
            (0.1, 0.0),
            (0.2, 4.9241e-7),
            (0.3, 0.000933179),
            (0.4, 0.0573438),
            (0.5, 0.443862),
            (0.6, 0.902193),
            (0.7, 0.99763),
            (0.8, 0.999998),
            (0.9, 1.0),
            (0.95, 1.0),
            (1.0, 1.0),
        ],
    ),
    (
        100,
        &[
            (0.0, 0.0),
            (0.05, 0.0),
            (0.1, 0.0),
            (0.2, 5.17989e-12),
            (0.3, 9.03469e-6),
            (0.4, 0.0167617),
            (0.5, 0.460205),
            (0.6, 0.972901),
            (0.7, 0.999978),
            (0.8, 1.0),
            (0.9, 1.0),
            (0.95, 1.0),
            (1.0, 1.0),
        ],
    ),
];

fn hundredths(p: f64) -> Rational {
    ratio((p * 100.0).round() as i64, 100)
}

fn binary_curves() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, points) in BINARY_CURVES {
        for &(p, expected) in points {
            let got = to_f64(&t_p_binary(n, &hundredths(p), BinaryTie::Strict));
            worst = worst.max((got - expected).abs());
            ensure(within(got, expected, 1e-5), || format!("n={n} p={p}: {got} vs {expected}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} points, max error {worst:.2e}"))
}

/// Reference curve for n = 10, then spot points of the n = 50 and n = 100
/// curves.
const MU_CURVES: [(usize, &[(i64, f64)]); 3] = [
    (
        10,
        &[
            (0, 0.0),
            (1, 5.37960058398467e-10),
            (2, 7.088606331722193e-07),
            (3, 3.86327482081078e-05),
            (4, 0.0005634136976601906),
            (5, 0.003942141664083465),
            (6, 0.017144816431258456),
            (7, 0.05316661436294621),
            (8, 0.12752124614721674),
            (9, 0.24928935982841194),
            (10, 0.41190147399902344),
            (11, 0.5913611846716277),
            (12, 0.7553372033163934),
            (13, 0.878219413622599),
            (14, 0.9520381026686567),
            (15, 0.9861355830562388),
            (16, 0.997405172599326),
            (17, 0.9997516180103759),
            (18, 0.9999928490959789),
            (19, 0.9999999886592819),
            (20, 1.0),
        ],
    ),
    (
        50,
        &[
            (4, 5.179892637524884e-12),
            (8, 0.016761686503161403),
            (10, 0.46020538130641064),
            (12, 0.9729008022429914),
            (14, 0.9999779390866731),
        ],
    ),
    (
        100,
        &[
            (8, 0.0016847865199193523),
            (10, 0.4718257604953717),
            (12, 0.9973645966438089),
            (14, 0.9999999974041742),
        ],
    ),
];

fn mu_curves() -> Check {
    let mut worst: f64 = 0.0;
    for (n, points) in MU_CURVES {
        for &(k, expected) in points {
            let got = to_f64(&mu_pid(n, 2, &ratio(k, 20)).map_err(|e| e.to_string())?);
            worst = worst.max((got - expected).abs());
            ensure(within(got, expected, 1e-9), || format!("n={n} p={k}/20: {got} vs {expected}"))?;
        }
    }
    for p in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
        let got = mu_pid(1, 2, &p).map_err(|e| e.to_string())?;
        ensure(got == &p * &p, || format!("mu_pid(1, 2, {p}) = {got}"))?;
    }
    Ok(format!("max error {worst:.2e}; n = 1 gives p^2 exactly"))
}

fn oracle_sweep() -> Check {
    let mut cells = 0;
    for n in 1..=8 {
        for m in 2..=5 {
            for k in 1..=9 {
                let params = TheoryParams::new(n, m, ratio(k, 10)).unwrap();
                let model = t_p_paper(&params, KVariant::Model).map_err(|e| e.to_string())?;
                let oracle = t_p_oracle(&OracleInput::Homogeneous(params.clone()), OracleTie::StrictWin)
                    .map_err(|e| e.to_string())?;
                ensure(model == oracle, || format!("n={n} m={m} p={k}/10: model {model} vs oracle {oracle}"))?;
                let hetero = t_hetero(&HeteroParams::uniform(&params)).map_err(|e| e.to_string())?;
                ensure(hetero == oracle, || format!("n={n} m={m} p={k}/10: hetero {hetero} vs oracle {oracle}"))?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells agree exactly"))
}

fn monotone_and_limits() -> Check {
    for n in 1..=101 {
        let mut prev = ratio(0, 1);
        for k in 0..=100 {
            let t = t_p_binary(n, &ratio(k, 100), BinaryTie::AsWritten);
            ensure(t >= prev, || format!("n={n}: decreases at p={k}/100"))?;
            prev = t;
        }
    }
    for n in (1..=1001).step_by(2) {
        let t = t_p_binary(n, &ratio(1, 2), BinaryTie::AsWritten);
        ensure(t == ratio(1, 2), || format!("n={n}: T(1/2) = {}", to_f64(&t)))?;
    }
    let hi = to_f64(&t_p_binary(1001, &ratio(3, 5), BinaryTie::Strict));
    let lo = to_f64(&t_p_binary(1001, &ratio(2, 5), BinaryTie::Strict));
    ensure(hi > 1.0 - 1e-9 && lo < 1e-9, || format!("n=1001 limits: {hi}, {lo}"))?;

    let h = ratio(1, 100_000);
    let mut worst: f64 = 0.0;
    for n in [1, 2, 3, 4, 5, 8, 10, 15, 21, 30] {
        for k in 1..=19 {
            let p = ratio(k, 20);
            let exact = to_f64(&t_p_derivative_binary(n, &p));
            let up = t_p_binary(n, &(&p + &h), BinaryTie::AsWritten);
            let down = t_p_binary(n, &(&p - &h), BinaryTie::AsWritten);
            let fd = to_f64(&((up - down) / (&h * ratio(2, 1))));
            worst = worst.max((fd - exact).abs());
            ensure(within(fd, exact, 1e-8), || format!("n={n} p={k}/20: derivative {exact} vs {fd}"))?;
        }
    }
    Ok(format!("monotone n <= 101, T(1/2) = 1/2 for odd n <= 1001, derivative error {worst:.2e}"))
}

fn overlap() -> Check {
    let bound = |rho: Rational| {
        overlap_bound(&OverlapParams::new(10, 2, ratio(7, 10), rho).unwrap()).map_err(|e| e.to_string())
    };
    let full = bound(ratio(7, 10))?;
    ensure(full == ratio(7, 10), || format!("rho = 0.7: {full}"))?;
    let none = to_f64(&bound(ratio(0, 1))?);
    ensure(within(none, 0.85, 0.01), || format!("rho = 0: {none}"))?;

    let mut worst: f64 = 0.0;
    for (k, seed) in [(0, 11), (3, 12), (5, 13), (7, 14)] {
        let b = to_f64(&bound(ratio(k, 10))?);
        let config = SimConfig {
            n: 10,
            m: 2,
            trials: 200_000,
            seed,
            model: VoterModel::Overlap { p: 0.7, rho: k as f64 / 10.0 },
            rule: Rule::Plurality,
            tie: SimTie::Strict,
        };
        let r = simulate(&config).map_err(|e| e.to_string())?;
        let z = (r.rate - b).abs() / r.stderr.max(f64::MIN_POSITIVE);
        worst = worst.max(z);
        ensure(z <= 3.0, || format!("rho = {k}/10: rate {} vs bound {b} ({z:.2} stderr)", r.rate))?;
    }
    Ok(format!("bound 0.7 at rho = 0.7, {none:.6} at rho = 0; simulation within {worst:.2} stderr"))
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(m - 1) {
        for i in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(i, m - 1);
            out.push(p);
        }
    }
    out
}

fn random_profile(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Profile {
    let rankings = (0..n)
        .map(|_| {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(rng);
            Ranking::new(order).unwrap()
        })
        .collect();
    Profile::new(rankings).unwrap()
}

fn voting_goldens() -> Check {
    let scores: Vec<ScoreVector> = [
        vec![0.4, 0.2, 0.1, 0.3],
        vec![0.1, 0.3, 0.2, 0.4],
        vec![0.4, 0.2, 0.1, 0.3],
    ]
    .into_iter()
    .map(|s| ScoreVector::probabilities(s).unwrap())
    .collect();
    let profile = Profile::from_scores(&scores, None).unwrap();
    let borda = Rule::Borda.elect(&profile, TiePolicy::Lexicographic, 5).map_err(|e| e.to_string())?;
    ensure(borda.rule_scores == [6.0, 4.0, 1.0, 7.0] && borda.winner == 3, || format!("borda {borda:?}"))?;
    let plurality = Rule::Plurality.elect(&profile, TiePolicy::Lexicographic, 5).map_err(|e| e.to_string())?;
    ensure(plurality.winner == 0, || format!("plurality {plurality:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let m = rng.gen_range(2..=5);
        let n = rng.gen_range(1..=9);
        let profile = random_profile(&mut rng, n, m);
        let result = Rule::KemenyExact.elect(&profile, TiePolicy::Lexicographic, 5).map_err(|e| e.to_string())?;
        let mut best_by_top = vec![f64::NEG_INFINITY; m];
        for order in permutations(m) {
            let top = order[0];
            let a = agreement(&profile, &Ranking::new(order).unwrap());
            best_by_top[top] = best_by_top[top].max(a);
        }
        let best = best_by_top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let consensus = result.consensus.clone().ok_or("no consensus ranking")?;
        ensure(
            result.rule_scores == best_by_top && agreement(&profile, &consensus) == best && consensus.top() == result.winner,
            || format!("case {case}: {result:?} vs enumeration {best_by_top:?}"),
        )?;
    }

    for case in 0..1000 {
        let n = rng.gen_range(1..=15);
        let profile = random_profile(&mut rng, n, 2);
        let first = profile.rankings().iter().filter(|r| r.top() == 0).count();
        let majority = if 2 * first >= n { 0 } else { 1 };
        for rule in [Rule::Plurality, Rule::Borda, Rule::Copeland, Rule::Kemeny] {
            let w = rule.elect(&profile, TiePolicy::Lexicographic, 5).map_err(|e| e.to_string())?.winner;
            ensure(w == majority, || format!("case {case}: {rule} elects {w}, majority {majority}"))?;
        }
    }
    Ok("four-class goldens, 200 Kemeny enumerations, 1000 two-class profiles".into())
}

fn pipeline() -> Check {
    let mut summary = Vec::new();
    for name in ["iris", "wine"] {
        let data = bundled(name).map_err(|e| e.to_string())?;
        let mut wins = 0;
        for seed in 0..10 {
            let report = evaluate(&data, &EnsembleConfig::new(50, Rule::Plurality, seed), 10, 1)
                .map_err(|e| e.to_string())?;
            if report.mean >= report.mean_individual_f1 {
                wins += 1;
            }
        }
        summary.push((name, wins));
    }
    let text = summary
        .iter()
        .map(|(name, wins)| format!("{name} {wins}/10"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(summary.iter().all(|&(_, wins)| wins >= 9), || {
        format!("seeds where the ensemble matched or beat the profile average: {text}")
    })?;
    Ok(text)
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_vorace"))
        .args(args)
        .env("VORACE_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Check {
    let profile = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/four_class_profile.json");
    let invocations: [&[&str]; 4] = [
        &["theory", "--n", "10,11", "--m", "2,3", "--p-step", "0.1", "--compare", "paper,model,oracle,mu,binary", "--format", "json"],
        &["simulate", "--n", "5", "--m", "3", "--p", "0.6", "--trials", "20000", "--seed", "7"],
        &["run", "--data", "iris", "--n", "9", "--folds", "5", "--rule", "plurality,borda,kemeny,sum", "--seed", "3", "--format", "json"],
        &["aggregate", "--profile", profile, "--rule", "kemeny"],
    ];
    for args in invocations {
        let first = run_cli(args, "1")?;
        serde_json::from_slice::<serde_json::Value>(&first).map_err(|e| format!("{args:?}: {e}"))?;
        for threads in ["1", "3"] {
            let again = run_cli(args, threads)?;
            ensure(again == first, || format!("{} output differs on rerun", args[0]))?;
        }
    }
    Ok("theory, simulate, run and aggregate outputs byte-identical across reruns and thread counts".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("small instance", Some(Duration::from_secs(1)), small_instance),
        ("formula audit", Some(Duration::from_secs(1)), formula_audit),
        ("binary curves", Some(Duration::from_secs(1)), binary_curves),
        ("mu curves", Some(Duration::from_secs(1)), mu_curves),
        ("oracle sweep", Some(Duration::from_secs(120)), oracle_sweep),
        ("monotonicity and limits", Some(Duration::from_secs(60)), monotone_and_limits),
        ("overlap bound", Some(Duration::from_secs(60)), overlap),
        ("voting goldens", Some(Duration::from_secs(120)), voting_goldens),
        ("pipeline", Some(Duration::from_secs(600)), pipeline),
        ("determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(msg), Some(limit)) if elapsed > limit => Err(format!("{msg}; took longer than {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({:.2}s) {msg}", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({:.2}s) {msg}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
