//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use jsr_core::bounds::{bounds_table, refine_bounds, rho_n, DEFAULT_BUDGET};
use jsr_core::certificates::{certify_finiteness, PeripheralReport, Status};
use jsr_core::families::{hare_family, morris_family, random_family, scaled_rotation_family, ALPHA_STAR};
use jsr_core::limits::{irreducibility, nonsingular_limit_certificate, sample_limit_points, LimitSampling, Method, Verdict};
use jsr_core::products::enumerate_words;
use jsr_core::stability::{decide_stability, sturmian_word, Outcome};
use jsr_core::{eigenvalues, evaluate_word, spectral_radius, Matrix, NormKind, Word, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rotations() -> jsr_core::MatrixSet {
    scaled_rotation_family(&[1.0, 1.0], &[1.0, 2f64.sqrt()]).unwrap()
}

fn c1_sandwich() -> Check {
    let start = Instant::now();
    let mut sets = 0;
    for set in corpus() {
        let t = bounds_table(&set, 10, NormKind::Inf).map_err(|e| e.to_string())?;
        ensure!(t.best_lo() <= t.best_hi() + 1e-9, "{:?}: best_lo {} > best_hi {}", set.name(), t.best_lo(), t.best_hi());
        for a in &t.rows {
            for b in &t.rows {
                ensure!(a.lo <= b.hi + 1e-9, "{:?}: lo_{} = {} > hi_{} = {}", set.name(), a.n, a.lo, b.n, b.hi);
            }
        }
        sets += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    Ok(format!("{sets} sets to depth 10 in {secs:.2} s"))
}

fn c2_morris_depth_one() -> Check {
    let t = bounds_table(&morris_family(0.5).unwrap(), 1, NormKind::Inf).map_err(|e| e.to_string())?;
    ensure!((t.best_lo() - 1.0).abs() <= 1e-12 && (t.best_hi() - 1.0).abs() <= 1e-12, "got [{}, {}]", t.best_lo(), t.best_hi());
    Ok(format!("best_lo = {}, best_hi = {}", t.best_lo(), t.best_hi()))
}

fn c3_scaled_rotation_certificate() -> Check {
    let set = scaled_rotation_family(&[0.9, 0.8], &[1.0, 2f64.sqrt()]).unwrap();
    let words: Vec<Word> = [1, 2, 4, 8, 16].iter().map(|&n| Word::power(0, n)).collect();
    let cert = certify_finiteness(&set, &words, 0.99, 1e-9).map_err(|e| e.to_string())?;
    ensure!(cert.status == Status::Certified, "rejected: {:?}", cert.rejection);
    let v = cert.certified_value.unwrap();
    ensure!((v - 0.9).abs() <= 1e-12, "value {v}");
    Ok(format!("certified value {v}"))
}

fn c4_hare_alpha_star() -> Check {
    let set = hare_family(ALPHA_STAR).unwrap();
    let r1 = spectral_radius(set.generator(0)).map_err(|e| e.to_string())?;
    let r2 = spectral_radius(set.generator(1)).map_err(|e| e.to_string())?;
    ensure!((r1 - 1.0).abs() <= 1e-12, "rho(S1) = {r1}");
    ensure!((r2 - ALPHA_STAR).abs() <= 1e-12, "rho(S2) = {r2}");
    let t = bounds_table(&set, 12, NormKind::Inf).map_err(|e| e.to_string())?;
    ensure!(t.best_lo() < t.best_hi(), "no gap: [{}, {}]", t.best_lo(), t.best_hi());
    Ok(format!("rho(S1) = {r1}, rho(S2) = {r2}, depth-12 gap {:.3e}", t.best_hi() - t.best_lo()))
}

fn c5_determinant_sandwich() -> Check {
    let mut count = 0usize;
    for set in corpus() {
        for n in 1..=8 {
            for w in enumerate_words(set.card(), n) {
                let r = PeripheralReport::new(&set, &w).map_err(|e| e.to_string())?;
                let slack = 1e-10 * r.rho;
                ensure!(r.kappa * r.rho <= r.det_root + slack, "{:?} {w}: kappa*rho {} > det root {}", set.name(), r.kappa * r.rho, r.det_root);
                ensure!(r.det_root <= r.rho + slack, "{:?} {w}: det root {} > rho {}", set.name(), r.det_root, r.rho);
                count += 1;
            }
        }
    }
    Ok(format!("{count} products checked"))
}

fn c6_pruning_oracle() -> Check {
    for seed in 0..10 {
        let set = random_family(1000 + seed, 2, 2, 1.0).unwrap();
        let table = refine_bounds(&set, 8, DEFAULT_BUDGET, NormKind::Two).map_err(|e| e.to_string())?;
        ensure!(table.depth() == 8, "seed {seed}: stopped at depth {}", table.depth());
        for row in &table.rows {
            let exact = rho_n(&set, row.n).map_err(|e| e.to_string())?;
            ensure!(row.lo_word == exact.word, "seed {seed} n {}: word {} vs {}", row.n, row.lo_word, exact.word);
            ensure!(row.lo_magnitude == exact.magnitude, "seed {seed} n {}: value {} vs {}", row.n, row.lo, exact.root());
        }
    }
    Ok("10 sets, depths 1..=8, exact value and word".into())
}

fn c7_eigen_residuals() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let d = 2 + i % 5;
        let complex = i % 4 == 3;
        let entries: Vec<C64> = (0..d * d)
            .map(|_| C64::new(rng.gen::<f64>() * 2.0 - 1.0, if complex { rng.gen::<f64>() * 2.0 - 1.0 } else { 0.0 }))
            .collect();
        let a = if complex {
            Matrix::complex(d, entries).unwrap()
        } else {
            Matrix::real(d, &entries.iter().map(|z| z.re).collect::<Vec<_>>()).unwrap()
        };
        let scale = a.norm(NormKind::Two).max(1.0);
        for l in eigenvalues(&a).map_err(|e| e.to_string())?.eigenvalues {
            let r = *a.to_complex().shifted(l).singular_values().last().unwrap() / scale;
            worst = worst.max(r);
            ensure!(r <= 1e-8, "matrix {i}: eigenvalue {l} residual {r:e}");
        }
    }
    Ok(format!("worst relative residual {worst:.2e}"))
}

fn c8_stability() -> Check {
    for seed in 0..10 {
        let raw = random_family(seed, 2 + (seed as usize % 3), 2, 1.0).unwrap();
        let h1 = raw.generators().iter().map(|g| g.norm(NormKind::Inf)).fold(0.0, f64::max);
        let set = raw.scaled(0.99 / h1);
        let d = decide_stability(&set, 8, NormKind::Inf).map_err(|e| e.to_string())?;
        ensure!(d.outcome == Outcome::Stable && d.witness_depth == Some(1), "seed {seed}: {d:?}");
    }
    for seed in 0..10 {
        let raw = random_family(50 + seed, 2 + (seed as usize % 3), 2, 1.0).unwrap();
        let rho0 = spectral_radius(raw.generator(0)).unwrap();
        let set = raw.scaled((1.05 + 0.1 * seed as f64) / rho0);
        let d = decide_stability(&set, 8, NormKind::Inf).map_err(|e| e.to_string())?;
        ensure!(d.outcome == Outcome::Unstable && d.witness_depth == Some(1), "seed {seed}: {d:?}");
    }
    let d = decide_stability(&rotations(), 8, NormKind::Inf).map_err(|e| e.to_string())?;
    ensure!(d.outcome == Outcome::Unknown, "rotations: {d:?}");
    Ok("10 stable at n=1, 10 unstable at n=1, rotations unknown at depth 8".into())
}

fn c9_nonsingular_limit() -> Check {
    let set = rotations();
    let v = irreducibility(&set).map_err(|e| e.to_string())?;
    ensure!(v.verdict == Verdict::Irreducible && v.method == Method::CommonEigenvector, "{v:?}");
    let lps = sample_limit_points(&set, 1.0, &LimitSampling::new(200, 40, 9)).map_err(|e| e.to_string())?;
    ensure!(!lps.points.is_empty(), "no limit points");
    for p in &lps.points {
        ensure!((p.abs_det - 1.0).abs() <= 1e-9, "cluster {}: |det| = {}", p.cluster, p.abs_det);
    }
    let cert = nonsingular_limit_certificate(&set, &lps, 1e-6).map_err(|e| e.to_string())?;
    ensure!(cert.certified && cert.message.contains("finiteness property certified"), "{}", cert.message);
    let t = bounds_table(&set, 8, NormKind::Two).map_err(|e| e.to_string())?;
    ensure!((t.best_lo() - 1.0).abs() <= 1e-9, "best_lo {}", t.best_lo());
    Ok(format!("{} clusters, {}", lps.points.len(), cert.message))
}

fn c10_rank_one() -> Check {
    let set = morris_family(0.5).unwrap();
    let cfg = LimitSampling::guided(200, 40, 10, vec![Word::power(0, 1)]);
    let lps = sample_limit_points(&set, 1.0, &cfg).map_err(|e| e.to_string())?;
    ensure!(!lps.points.is_empty(), "no limit points");
    for p in &lps.points {
        ensure!(p.word_len >= 20, "short representative {}", p.word_len);
        ensure!(p.rank == 1 && p.abs_det <= 1e-6, "cluster {}: rank {} |det| {}", p.cluster, p.rank, p.abs_det);
    }
    for n in 20..=64 {
        let m = evaluate_word(&set, &Word::power(0, n)).unwrap().to_matrix();
        ensure!(jsr_core::limits::rank_profile(&m, jsr_core::limits::RANK_TOL) == 1, "n = {n}");
        ensure!(m.determinant().norm() <= 1e-6, "n = {n}");
    }
    Ok(format!("{} clusters of rank 1", lps.points.len()))
}

fn c11_cyclic_invariance() -> Check {
    let mut count = 0;
    for set in named_corpus() {
        for n in 1..=6 {
            for w in enumerate_words(set.card(), n) {
                let base = evaluate_word(&set, &w).unwrap().spectral_radius().unwrap().value();
                for r in 1..n {
                    let rot = evaluate_word(&set, &w.rotation(r)).unwrap().spectral_radius().unwrap().value();
                    ensure!((rot - base).abs() <= 1e-9 * base.max(rot), "{:?} {w} rotated by {r}: {base} vs {rot}", set.name());
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} rotations"))
}

fn c12_sturmian() -> Check {
    let t = 10_000;
    for gamma in [0.5, golden_conjugate(), 0.3] {
        let w = sturmian_word(gamma, 0.0, t).map_err(|e| e.to_string())?;
        let prefix: Vec<i64> = std::iter::once(0)
            .chain(w.indices().iter().scan(0i64, |acc, &x| {
                *acc += x as i64;
                Some(*acc)
            }))
            .collect();
        // balance of the full word covers every prefix
        for len in 1..t {
            let (mut lo, mut hi) = (i64::MAX, i64::MIN);
            for i in 0..=t - len {
                let c = prefix[i + len] - prefix[i];
                lo = lo.min(c);
                hi = hi.max(c);
            }
            ensure!(hi - lo <= 1, "gamma {gamma}: factors of length {len} differ by {}", hi - lo);
        }
    }
    let half = sturmian_word(0.5, 0.0, t).unwrap();
    ensure!(half.indices().iter().enumerate().all(|(i, &x)| x == i % 2), "gamma 1/2 not alternating");
    Ok("balanced for gamma in {1/2, 2-phi, 0.3} up to T = 10^4".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("sandwich bounds on the corpus", c1_sandwich),
        ("Morris depth-1 bounds", c2_morris_depth_one),
        ("scaled rotations certified", c3_scaled_rotation_certificate),
        ("Hare alpha* radii and depth-12 gap", c4_hare_alpha_star),
        ("determinant sandwich", c5_determinant_sandwich),
        ("pruned search equals exhaustive", c6_pruning_oracle),
        ("eigenvalue residuals", c7_eigen_residuals),
        ("stability decisions", c8_stability),
        ("nonsingular limit certificate", c9_nonsingular_limit),
        ("rank-one limit points", c10_rank_one),
        ("cyclic invariance", c11_cyclic_invariance),
        ("Sturmian balance", c12_sturmian),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS  criterion {:>2}: {title} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {:>2}: {title} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
