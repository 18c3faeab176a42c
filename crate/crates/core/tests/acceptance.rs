//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! always print; the exit status is non-zero when any criterion fails.

mod common;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use syncnpa::applications::{self, mub_null_parameters, p_mub, p_sic};
use syncnpa::certificate::gram_factor;
use syncnpa::linalg::{self, CMatrix, DEFAULT_RANK_TOL};
use syncnpa::solver::{self, project_psd, SolverConfig, SolverStatus};
use syncnpa::spanning::{self, SpanningTolerances};
use syncnpa::words::{self, canonical_class, dagger, reduce, Symmetry};
use syncnpa::{Certificate, Correlation, Mode, ValidationTolerances, Word};

enum Status {
    Pass,
    Fail,
    Skip,
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    status: Status,
    detail: String,
}

/// Collects named checks; the criterion passes when all of them hold.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn within(&mut self, started: Instant, limit: Duration) {
        let t = started.elapsed();
        self.check(t < limit, format!("runtime {t:.2?} over {limit:.0?}"));
        self.note(format!("{t:.2?}"));
    }

    fn outcome(self) -> Outcome {
        let mut detail = self.notes.join("; ");
        if self.failed.is_empty() {
            return Outcome { status: Status::Pass, detail };
        }
        detail = format!("{}{}{}", self.failed.join("; "), if detail.is_empty() { "" } else { " | " }, detail);
        Outcome { status: Status::Fail, detail }
    }
}

fn rational(num: usize, den: usize) -> f64 {
    num as f64 / den as f64
}

fn spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

fn rank(m: &DMatrix<f64>) -> usize {
    linalg::numerical_rank(&common::real_matrix(m), DEFAULT_RANK_TOL)
}

/// SIC `T_1` straight from the overlaps: `1` at the corner, `1/d` on the
/// border and diagonal, `1/(d(d+1))` elsewhere.
fn sic_t1_oracle(d: usize) -> DMatrix<f64> {
    let n = d * d;
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => rational(1, d),
        _ if i == j => rational(1, d),
        _ => rational(1, d * (d + 1)),
    })
}

/// MUB `T_1`: `1/d` within a vector, `0` within a basis, `1/d^2` across bases.
fn mub_t1_oracle(d: usize) -> DMatrix<f64> {
    let n = d * (d + 1);
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => rational(1, d),
        _ => {
            let (bi, vi) = ((i - 1) / d, (i - 1) % d);
            let (bj, vj) = ((j - 1) / d, (j - 1) % d);
            if bi != bj {
                rational(1, d * d)
            } else if vi == vj {
                rational(1, d)
            } else {
                0.0
            }
        }
    })
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut worst = (0.0f64, 0.0f64);
    for d in 2..=8 {
        let t = sic_t1_oracle(d);
        let l = applications::sic_t1_factor(d).unwrap();
        let factor_err = (l.transpose() * &l - &t).abs().max();
        let mut expect = vec![0.0, 2.0];
        expect.extend(std::iter::repeat_n(1.0 / (d as f64 + 1.0), d * d - 1));
        expect.sort_by(f64::total_cmp);
        let eig_err = max_gap(&spectrum(&t), &expect);
        c.check(factor_err < 1e-12, format!("d={d}: |L^T L - T1| = {factor_err:.1e}"));
        c.check(eig_err < 1e-10, format!("d={d}: spectrum off by {eig_err:.1e}"));
        c.check(rank(&t) == d * d, format!("d={d}: rank {} != {}", rank(&t), d * d));
        worst = (worst.0.max(factor_err), worst.1.max(eig_err));
    }
    c.note(format!("max factor error {:.1e}, max eigenvalue error {:.1e}", worst.0, worst.1));
    c.within(started, Duration::from_secs(1));
    c.outcome()
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for d in 2..=8 {
        let df = d as f64;
        let t = mub_t1_oracle(d);
        let l = applications::mub_t1_factor(d).unwrap();
        let factor_err = (l.transpose() * &l - &t).abs().max();
        let mut expect = vec![0.0; d + 1];
        expect.extend(std::iter::repeat_n(1.0 / df, d * d - 1));
        expect.push((2.0 * df + 1.0) / df);
        expect.sort_by(f64::total_cmp);
        let eig_err = max_gap(&spectrum(&t), &expect);
        c.check(factor_err < 1e-12, format!("d={d}: |L^T L - T1| = {factor_err:.1e}"));
        c.check(eig_err < 1e-10, format!("d={d}: spectrum off by {eig_err:.1e}"));
        c.check(rank(&t) == d * d, format!("d={d}: rank {}", rank(&t)));

        let (a, b) = mub_null_parameters(d);
        let relation = (1.0 + a + df * b).abs();
        c.check(relation <= 4.0 * f64::EPSILON, format!("d={d}: |1 + a + d b| = {relation:.1e}"));
        let mut null_err = 0.0f64;
        for x in 0..=d {
            let u = DVector::from_fn(t.nrows(), |r, _| match r {
                0 => 1.0,
                _ if (r - 1) / d == x => a,
                _ => b,
            });
            null_err = null_err.max((&t * u).amax());
        }
        c.check(null_err < 1e-10, format!("d={d}: |T1 u| = {null_err:.1e}"));
        worst = (worst.0.max(factor_err), worst.1.max(eig_err), worst.2.max(null_err), worst.3.max(relation));
    }
    c.note(format!(
        "max factor error {:.1e}, eigenvalue error {:.1e}, |T1 u| {:.1e}, |1+a+db| {:.1e}",
        worst.0, worst.1, worst.2, worst.3
    ));
    c.within(started, Duration::from_secs(1));
    c.outcome()
}

fn criterion_3() -> Outcome {
    let mut c = Checks::default();
    let mut worst = 0.0f64;
    for d in 2..=8 {
        for (name, p, oracle) in
            [("sic", p_sic(d).unwrap(), sic_t1_oracle(d)), ("mub", p_mub(d).unwrap(), mub_t1_oracle(d))]
        {
            let t1 = Certificate::build_t1(&p).unwrap();
            let err = linalg::max_abs_diff(t1.matrix(), &common::real_matrix(&oracle));
            c.check(err <= 1e-15, format!("{name} d={d}: {err:.1e}"));
            worst = worst.max(err);
        }
    }
    c.note(format!("max entry error {worst:.1e} over d = 2..8"));
    c.outcome()
}

fn spanning_tols() -> SpanningTolerances {
    SpanningTolerances {
        validation: ValidationTolerances { tol_psd: 1e-10, tol_class: 1e-10 },
        svd_cross_check: true,
        ..SpanningTolerances::default()
    }
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let family = applications::reference_sic(2).unwrap();
    // the oracle family itself: rank-one projections with overlaps 1/(d+1)
    for (i, p) in family.iter().enumerate() {
        c.check(linalg::max_abs_diff(&(p * p), p) < 1e-14, format!("P{} not idempotent", i + 1));
        for q in &family[i + 1..] {
            c.check(((p * q).trace().re - 1.0 / 3.0).abs() < 1e-14, "overlap != 1/3");
        }
    }
    let t2 = Certificate::from_projections(&family, 2).unwrap();
    let p = p_sic(2).unwrap();
    let v = t2.validate(Some(&p), ValidationTolerances { tol_psd: 1e-10, tol_class: 1e-10 });
    c.check(v.pass, format!("validate: {:?}", v.failures));
    let r = spanning::check_certificate(&t2, 2, &spanning_tols()).unwrap();
    c.check((r.rank_t1, r.rank_t2) == (4, 4), format!("ranks {} {}", r.rank_t1, r.rank_t2));
    c.check(r.nullity == 1, format!("S_M nullity {}", r.nullity));
    c.check(r.nullity_svd == Some(1), "SVD nullity disagrees");
    c.check(r.pass, "spanning report does not pass");
    c.note(format!(
        "min eig {:.1e}, class spread {:.1e}, ranks {}/{}, nullity {}",
        v.level_min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
        v.class_spread,
        r.rank_t1,
        r.rank_t2,
        r.nullity
    ));
    c.within(started, Duration::from_secs(5));
    c.outcome()
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut raw = Vec::new();
    for d in [2usize, 3] {
        let family = applications::reference_mubs(d).unwrap();
        let t2 = Certificate::from_projections(&family, 2).unwrap();
        let p = p_mub(d).unwrap();
        let v = t2.validate(Some(&p), ValidationTolerances { tol_psd: 1e-10, tol_class: 1e-10 });
        c.check(v.pass, format!("d={d} validate: {:?}", v.failures));
        let r = spanning::check_certificate(&t2, d, &spanning_tols()).unwrap();
        c.check((r.rank_t1, r.rank_t2) == (d * d, d * d), format!("d={d} ranks {} {}", r.rank_t1, r.rank_t2));
        c.check(r.center_dimension == 1, format!("d={d} centre dimension {}", r.center_dimension));
        c.check(r.nullity == 1, format!("d={d}: S_M nullity {} != 1", r.nullity));
        raw.push(format!(
            "d={d}: {}x{} T2, ranks {}/{}, centre dim {}, raw nullity {}",
            t2.words().len(),
            t2.words().len(),
            r.rank_t1,
            r.rank_t2,
            r.center_dimension,
            r.nullity
        ));
    }
    c.note(raw.join(", "));
    c.note("raw nullity counts the d relations sum_i P_(x,i) = I among the projections");
    c.within(started, Duration::from_secs(60));
    c.outcome()
}

fn criterion_6() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let p = p_mub(2).unwrap();
    let config = SolverConfig::default();
    let r = solver::solve_feasibility(&p, 2, &config).unwrap();
    c.check(r.status == SolverStatus::Feasible, format!("status {:?}", r.status));
    c.check(r.residual < 1e-7, format!("residual {:.1e}", r.residual));
    c.check(r.iterations <= 50_000, format!("{} iterations", r.iterations));
    match &r.certificate {
        Some(cert) => {
            let v = cert.validate(Some(&p), ValidationTolerances::default());
            c.check(v.pass, format!("validate: {:?}", v.failures));
        }
        None => c.check(false, "no certificate"),
    }
    c.note(format!("p_mub(2) level 2: {} iterations, residual {:.1e}", r.iterations, r.residual));
    let q = Correlation::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let r = solver::solve_feasibility(&q, 1, &config).unwrap();
    c.check(r.status == SolverStatus::InfeasibleGap, format!("orthogonal pair: {:?}", r.status));
    c.note(format!("[[1,0],[0,1]]: {:?} at residual {:.3}", r.status, r.residual));
    c.note(format!("{:.2?}", started.elapsed()));
    c.outcome()
}

fn criterion_7() -> Outcome {
    let mut c = Checks::default();
    let mut rng = common::rng(7);
    let mut worst = 0.0f64;
    let mut words_checked = 0usize;
    for (complex, sym) in [(false, Symmetry::CyclicReversal), (true, Symmetry::Cyclic)] {
        for _ in 0..100 {
            let d = rng.random_range(1..=4);
            let n = rng.random_range(1..=3);
            let family = common::random_family(&mut rng, d, n, complex);
            let mut first: HashMap<_, num_complex::Complex64> = HashMap::new();
            for w in words::enumerate_words(n, 6, false) {
                let t = common::normalized_trace(&family, &w);
                let f = *first.entry(canonical_class(&w, sym)).or_insert(t);
                worst = worst.max((f - t).norm());
                words_checked += 1;
            }
        }
    }
    c.check(worst < 1e-12, format!("trace spread {worst:.1e}"));
    c.note(format!("200 families, {words_checked} words, max spread {worst:.1e}"));
    c.outcome()
}

fn criterion_8() -> Outcome {
    let mut c = Checks::default();
    let mut rng = common::rng(8);
    let mut random_word = |max_len: usize| {
        let len = rng.random_range(0..=max_len);
        Word::new((0..len).map(|_| rng.random_range(1..=4)).collect())
    };

    for _ in 0..2000 {
        let w = random_word(12);
        let r = reduce(&w);
        c.check(reduce(&r) == r, format!("reduce not idempotent on {w}"));
        for sym in [Symmetry::Cyclic, Symmetry::CyclicReversal] {
            for j in 0..r.len() {
                c.check(canonical_class(&r.rotate(j), sym) == canonical_class(&r, sym), format!("rotation of {r}"));
            }
            if !w.is_empty() {
                let mut doubled = w.letters().to_vec();
                doubled.insert(w.len() / 2, w.letters()[w.len() / 2]);
                c.check(
                    canonical_class(&Word::new(doubled), sym) == canonical_class(&w, sym),
                    format!("duplication in {w}"),
                );
            }
            let (a, b) = (random_word(4), random_word(4));
            let x = Word::letter(1 + (w.len() % 4) as u32);
            let once = dagger(&b).concat(&x).concat(&a);
            let twice = dagger(&b).concat(&x).concat(&x).concat(&a);
            c.check(canonical_class(&once, sym) == canonical_class(&twice, sym), format!("absorption {once}"));
        }
    }

    let mut rng = common::rng(80);
    let mut psd_worst = 0.0f64;
    for _ in 0..50 {
        let m = common::random_hermitian(&mut rng, 10);
        let p = project_psd(&m).unwrap();
        psd_worst = psd_worst.max(linalg::max_abs_diff(&project_psd(&p).unwrap(), &p));
        let x = common::random_psd(&mut rng, 10);
        c.check(common::frobenius(&(&p - &m)) <= common::frobenius(&(&x - &m)) + 1e-12, "project_psd not nearest");
    }
    c.check(psd_worst < 1e-10, format!("project_psd idempotence {psd_worst:.1e}"));

    let mut monotone = true;
    for _ in 0..30 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let cert = Certificate::from_projections(&common::random_family(&mut rng, d, n, true), 3).unwrap();
        let ranks: Vec<usize> =
            (1..=3).map(|j| linalg::numerical_rank(cert.restrict(j).matrix(), DEFAULT_RANK_TOL)).collect();
        monotone &= ranks.windows(2).all(|w| w[0] <= w[1]);
    }
    // a solver-found chain as well
    let chain = syncnpa::hierarchy::certify(&p_sic(2).unwrap(), 2, &Default::default()).unwrap();
    monotone &= chain.ranks.windows(2).all(|w| w[0] <= w[1]);
    c.check(monotone, "rank decreased across levels");

    let mut gram_worst = 0.0f64;
    for _ in 0..50 {
        let dim = rng.random_range(1..=12);
        let b: CMatrix = common::random_hermitian(&mut rng, dim).columns(0, rng.random_range(1..=dim)).into_owned();
        let m = &b * b.adjoint();
        let l = gram_factor(&m, 1e-12).unwrap();
        gram_worst = gram_worst.max(common::frobenius(&(l.adjoint() * &l - &m)));
    }
    c.check(gram_worst < 1e-9, format!("gram_factor round trip {gram_worst:.1e}"));
    c.note(format!(
        "2000 words x 2 modes, 50 PSD projections (idempotence {psd_worst:.1e}), 31 rank chains, gram round trip {gram_worst:.1e}; proptest suite in tests/properties.rs"
    ));
    c.outcome()
}

fn criterion_9() -> Outcome {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/sdpa_check.py");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mub2.dat-s");
    let p = p_mub(2).unwrap();
    let problem = solver::export_sdpa(&p, 2, Mode::Real, &path).unwrap();
    let ours = solver::solve_feasibility(&p, 2, &SolverConfig::default()).unwrap().status;
    let out = match Command::new("python3").arg(&script).arg(&path).output() {
        Ok(out) => out,
        Err(e) => return Outcome { status: Status::Skip, detail: format!("python3 unavailable: {e}") },
    };
    let text = String::from_utf8_lossy(&out.stdout);
    let Ok(report) = serde_json::from_str::<serde_json::Value>(text.trim()) else {
        return Outcome {
            status: Status::Skip,
            detail: format!("no SDPA report: {}", String::from_utf8_lossy(&out.stderr).trim()),
        };
    };
    if report["verdict"] == "unavailable" {
        return Outcome { status: Status::Skip, detail: format!("sdpa-python not installed ({})", report["reason"]) };
    }
    let mut c = Checks::default();
    c.check(ours == SolverStatus::Feasible, format!("our solver: {ours:?}"));
    c.check(report["verdict"] == "feasible", format!("SDPA verdict {}", report["verdict"]));
    c.check(report["m"] == problem.free_classes.len(), "SDPA read a different number of variables");
    c.note(format!(
        "{} variables, block {}; SDPA phase {} (min eig {}), ours {:?}",
        problem.free_classes.len(),
        problem.block_size,
        report["phase"],
        report["min_eigenvalue"],
        ours
    ));
    c.outcome()
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("SIC T1 factor and spectrum, d = 2..8", criterion_1),
        ("MUB T1 factor, spectrum and null vectors, d = 2..8", criterion_2),
        ("level-1 certificates match closed forms", criterion_3),
        ("SIC d=2 oracle end-to-end", criterion_4),
        ("MUB d=2,3 oracle end-to-end, S_M nullity 1", criterion_5),
        ("solver soundness", criterion_6),
        ("word-algebra trace oracle", criterion_7),
        ("property suites", criterion_8),
        ("SDPA cross-check", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("criterion {} {tag}  {name}: {}", i + 1, outcome.detail);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
