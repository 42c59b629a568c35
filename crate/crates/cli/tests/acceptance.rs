//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output; exits non-zero on any FAIL.

use std::process::Command;
use std::time::{Duration, Instant};

use heisenberg_core::suite::{
    alpha_limit_deviations, check_conservation, check_frobenius, check_group_laws,
    check_left_invariance, check_signature, check_transport, oracle_sup_error, rk4_halving_errors,
    unit_alpha_ic,
};
use heisenberg_core::*;

const SEED: u64 = 20_240_601;
const DIMS: [usize; 3] = [1, 2, 3];

type Criterion = (&'static str, fn() -> Result<Verdict>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn totally_geodesic() -> Result<Verdict> {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut pass = true;
    for p in DIMS {
        let config = TangencyConfig {
            n_samples: 100,
            tol: 1e-9,
            seed: SEED + p as u64,
            ..TangencyConfig::default()
        };
        let report = totally_geodesic_verify(&MetricSpec::pseudo(p)?, &OneForm::theta(p), &config)?;
        pass &= report.pass;
        worst = worst.max(report.max_deviation);
    }
    let elapsed = start.elapsed();
    Ok(verdict(
        pass && worst < 1e-9 && elapsed < Duration::from_secs(5),
        format!(
            "max |theta(gamma')| = {worst:.2e} (< 1e-9), {:.2} s (< 5 s)",
            elapsed.as_secs_f64()
        ),
    ))
}

fn transport() -> Result<Verdict> {
    let mut worst = 0.0_f64;
    for p in DIMS {
        worst = worst.max(check_transport(p, 100, SEED + 10 + p as u64)?.value);
    }
    Ok(verdict(
        worst < 1e-9,
        format!("max |theta(t) - e^(alpha t) theta(0)| / (1 + e^|alpha t|) = {worst:.2e} (< 1e-9)"),
    ))
}

fn oracle() -> Result<Verdict> {
    let mut worst = 0.0_f64;
    for p in DIMS {
        let path = RhsPath::Christoffel {
            h: geodesic::christoffel::DEFAULT_METRIC_FD_STEP,
        };
        worst = worst.max(oracle_sup_error(p, 100, SEED + 20 + p as u64, path)?);
    }
    let (coarse, fine) = rk4_halving_errors(&unit_alpha_ic(), 1.0, 0.05)?;
    let ratio = coarse / fine;
    Ok(verdict(
        worst < 1e-6 && (12.0..=20.0).contains(&ratio),
        format!("sup |closed - RK4(Christoffel)| = {worst:.2e} (< 1e-6), halving ratio = {ratio:.2} (in [12, 20])"),
    ))
}

fn conservation() -> Result<Verdict> {
    let mut worst = 0.0_f64;
    for p in DIMS {
        worst = worst.max(check_conservation(p, 100, SEED + 30 + p as u64)?.value);
    }
    Ok(verdict(
        worst < 1e-9,
        format!("max relative drift of L and alpha = {worst:.2e} (< 1e-9)"),
    ))
}

fn alpha_limit() -> Result<Verdict> {
    let mut pass = true;
    let mut worst_last = 0.0_f64;
    for p in DIMS {
        for shape in 0..5 {
            let devs = alpha_limit_deviations(p, SEED + 40 + 10 * p as u64 + shape)?;
            pass &= devs.windows(2).all(|w| w[1] < w[0]);
            worst_last = worst_last.max(devs[11]);
        }
    }
    Ok(verdict(
        pass && worst_last < 1e-6,
        format!("monotone for k = 1..12: {pass}; deviation at k = 12 = {worst_last:.2e} (<= 1e-6)"),
    ))
}

fn riemannian_contrast() -> Result<Verdict> {
    let start = Instant::now();
    let found = riemannian_counterexample_search(1, 1000, 5.0, 1e-2, 0.1, SEED)?;
    let elapsed = start.elapsed();
    let witness_ok = match &found {
        SearchOutcome::Found { witness, tries } => {
            *tries <= 1000
                && witness.theta_initial.abs() < 1e-12
                && witness.theta_at_t_star.abs() > 0.1
                && witness.t_star <= 5.0
        }
        SearchOutcome::NotFound { .. } => false,
    };
    let pseudo = counterexample_search(
        &MetricSpec::pseudo(1)?,
        &OneForm::theta(1),
        &SearchConfig {
            threshold: 1e-6,
            seed: SEED,
            ..SearchConfig::default()
        },
    )?;
    let pseudo_clean = matches!(pseudo, SearchOutcome::NotFound { .. });
    let detail = match &found {
        SearchOutcome::Found { witness, tries } => format!(
            "witness after {tries} tries: theta(0) = {:.1e}, |theta(t* = {:.2})| = {:.3}; {:.2} s (< 10 s); pseudo metric at 1e-6: {}",
            witness.theta_initial,
            witness.t_star,
            witness.theta_at_t_star.abs(),
            elapsed.as_secs_f64(),
            if pseudo_clean { "nothing found" } else { "FOUND" }
        ),
        SearchOutcome::NotFound { .. } => "no Riemannian witness".into(),
    };
    Ok(verdict(
        witness_ok && pseudo_clean && elapsed < Duration::from_secs(10),
        detail,
    ))
}

fn structure() -> Result<Verdict> {
    let mut worst_group = 0.0_f64;
    let mut worst_invariance = 0.0_f64;
    let mut signature_ok = true;
    let mut d_theta_zero = true;
    let mut frobenius_ok = true;
    for p in DIMS {
        worst_group = worst_group.max(check_group_laws(p, 100, SEED + 60 + p as u64).value);
        worst_invariance =
            worst_invariance.max(check_left_invariance(p, 100, SEED + 70 + p as u64)?.value);
        signature_ok &= check_signature(&MetricSpec::pseudo(p)?, 50, SEED + 80 + p as u64)?.pass;
        let at = sampling::random_point(&mut sampling::SeededRng::new(SEED + p as u64), p, 2.0);
        let d_theta =
            exterior_derivative_fd(&OneForm::theta(p), &at, distribution::DEFAULT_FORM_FD_STEP)?;
        d_theta_zero &= d_theta.iter().all(|v| *v == 0.0);
        frobenius_ok &= check_frobenius(p, 50, SEED + 90 + p as u64)?.pass;
    }
    Ok(verdict(
        worst_group < 1e-12 && worst_invariance < 1e-12 && signature_ok && d_theta_zero && frobenius_ok,
        format!(
            "group laws {worst_group:.1e}, left invariance {worst_invariance:.1e} (< 1e-12); signature (p, p+1): {signature_ok}; d theta = 0 exactly: {d_theta_zero}; contact form non-integrable: {frobenius_ok}"
        ),
    ))
}

fn determinism() -> Result<Verdict> {
    let dir = std::env::temp_dir().join(format!("heisenberg-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let run = |name: &str, args: &[&str]| -> Vec<u8> {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_heisenberg"))
            .args(args)
            .arg("--out")
            .arg(&path)
            .status()
            .expect("binary runs");
        assert!(status.code() == Some(0), "{args:?} exited with {status}");
        std::fs::read(&path).expect("output written")
    };
    let trace = [
        "trace", "--p", "2", "--t-end", "3", "--step", "1e-3", "--oracle", "rk4",
    ];
    let verify = ["verify", "--p", "1", "--samples", "10", "--seed", "7"];
    let trace_same = run("trace1.csv", &trace) == run("trace2.csv", &trace);
    let verify_same = run("verify1.json", &verify) == run("verify2.json", &verify);
    let _ = std::fs::remove_dir_all(&dir);
    Ok(verdict(
        trace_same && verify_same,
        format!("trace byte-identical: {trace_same}; verify byte-identical: {verify_same}"),
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("totally geodesic distribution", totally_geodesic),
        ("theta transport identity", transport),
        ("closed form vs RK4 oracle", oracle),
        ("conservation laws", conservation),
        ("alpha -> 0 continuity", alpha_limit),
        ("Riemannian contrast", riemannian_contrast),
        ("structure checks", structure),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        if !v.pass {
            failures += 1;
        }
        println!(
            "criterion {} {:<32} {} [{:.1} s] {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
