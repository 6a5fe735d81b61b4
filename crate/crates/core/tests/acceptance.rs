//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use mopr::catalog::DiscreteMeasure;
use mopr::stepline::UpdateOrder;
use mopr::numerics::table_decimal;
use mopr::*;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const BESSEL_REFERENCE: [(&str, &str); 11] = [
    ("--", "1"),
    ("1.7320508075688772935", "9.6666666666666666667"),
    ("8.5374989832437982487", "28.186991869918699187"),
    ("20.265386777687130909", "56.571895845674401834"),
    ("36.925214834648582674", "94.823932737801348717"),
    ("58.518554562959399225", "142.94410230778264607"),
    ("85.045955898223602580", "200.93289913274452209"),
    ("116.50767686120789662", "268.79060407933245800"),
    ("152.90385976282648737", "346.51739199614374938"),
    ("194.23459164836084172", "434.11337913848760712"),
    ("240.49992974325090503", "531.57864673346522330"),
];

const SEEDS: u64 = 50;
const N: usize = 6;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T>(r: mopr::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|err| err.to_string())
}

fn bessel_mu1(rows: usize) -> mopr::Result<MarginalRecurrence> {
    let level0 = bessel_stepline(&int(0), &int(0), 2 * rows + 1)?;
    let e1 = ShiftFamily::e1(&level0, rows)?;
    marginal_mu1(&e1, rows)
}

fn bessel_reference() -> Outcome {
    let start = Instant::now();
    let mu1 = e(bessel_mu1(10))?;
    for (n, (a, b)) in BESSEL_REFERENCE.iter().enumerate() {
        let got_b = e(table_decimal(mu1.b(n).unwrap(), 20))?;
        ensure(&got_b == b, || format!("b_{n}: got {got_b}, expected {b}"))?;
        if n > 0 {
            let got_a = e(sqrt_to_decimal(mu1.a_sq(n).unwrap(), 20))?;
            ensure(&got_a == a, || format!("a_{n}: got {got_a}, expected {a}"))?;
        }
    }
    Ok(format!("11 rows, 20 digits, {:.0?}", start.elapsed()))
}

fn spot_anchors() -> Outcome {
    let mu1 = e(bessel_mu1(2))?;
    ensure(mu1.a_sq(1).unwrap() == &int(3), || "a_1^2 != 3".into())?;
    ensure(mu1.b(1).unwrap() == &rat(29, 3), || "b_1 != 29/3".into())?;
    ensure(
        e(sqrt_to_decimal(&int(3), 20))? == "1.7320508075688772935"
            && e(rational_to_decimal(&rat(29, 3), 20))? == "9.6666666666666666667",
        || "rendering mismatch".into(),
    )?;
    Ok("a_1^2 = 3, b_1 = 29/3".into())
}

fn pair(seed: u64, size: usize) -> std::result::Result<(DiscreteMeasure, DiscreteMeasure), String> {
    e(random_pair(seed, size, 6))
}

/// Marginals -> NN grid -> step-line -> forward -> marginals.
fn round_trip_a() -> Outcome {
    let start = Instant::now();
    let len = 2 * N + 1;
    for seed in 0..SEEDS {
        let (mu1, mu2) = pair(seed, len + 1)?;
        let m1 = e(mu1.recurrence(len + 1, 1))?;
        let m2 = e(mu2.recurrence(len + 1, 2))?;
        let grid = e(nn_from_marginals_r2(&m1, &m2, len))?;
        let level0 = e(stepline_from_nn(&grid, len))?;
        let seed_c = m2.b(0).unwrap() - level0.beta(0).unwrap();
        let out = e(forward(&level0, &FreeParameter::raw_seed(seed_c), N))?;
        ensure(out.mu1 == m1.truncated(N + 1), || format!("seed {seed}: mu_1 differs"))?;
        ensure(out.mu2 == m2.truncated(N + 1), || format!("seed {seed}: mu_2 differs"))?;
    }
    Ok(format!("{SEEDS} seeds, N = {N}, {:.1?}", start.elapsed()))
}

/// Step-line + seed -> forward grid -> step-line.
fn round_trip_b() -> Outcome {
    let start = Instant::now();
    for seed in 0..SEEDS {
        let (mu1, mu2) = pair(seed, 2 * N + 2)?;
        let moments = e(moment_table(&[mu1.clone(), mu2.clone()], 1))?;
        let m1 = e(mu1.recurrence(2 * N + 2, 1))?;
        let m2 = e(mu2.recurrence(2 * N + 2, 2))?;
        let level0 = e(stepline_from_nn(&e(nn_from_marginals_r2(&m1, &m2, 2 * N + 1))?, 2 * N + 1))?;
        let free = FreeParameter::exact_mu2(
            moments.moment(1, 0).unwrap().clone(),
            moments.moment(1, 1).unwrap().clone(),
        );
        let out = e(forward(&level0, &free, N))?;
        let back = e(stepline_from_nn(&out.grid, N))?;
        ensure(back == level0.truncated(N), || format!("seed {seed}: step-line differs"))?;
    }
    Ok(format!("{SEEDS} seeds, N = {N}, {:.1?}", start.elapsed()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let seeds = 20;
    for seed in 0..seeds {
        let (mu1, mu2) = pair(seed, 8)?;
        let moments = e(moment_table(&[mu1.clone(), mu2.clone()], 2 * N + 3))?;
        let grid = e(nn_from_marginals_r2(
            &e(mu1.recurrence(N + 1, 1))?,
            &e(mu2.recurrence(N + 1, 2))?,
            N,
        ))?;
        ensure(grid == e(nn_grid_oracle_r2(&moments, N))?, || format!("r=2 seed {seed}"))?;

        let sys = e(random_system(seed, 3, 6, 4))?;
        let margs: Vec<_> = sys
            .iter()
            .enumerate()
            .map(|(i, m)| m.recurrence(5, i + 1))
            .collect::<mopr::Result<_>>()
            .map_err(|err| err.to_string())?;
        let general = e(nn_from_marginals_general_r(&margs, 4, SweepCheck::CrossCheck))?;
        let moments3 = e(moment_table(&sys, 12))?;
        ensure(general == e(nn_grid_oracle(&moments3, 4))?, || format!("r=3 seed {seed}"))?;
    }
    Ok(format!("{seeds} seeds, r=2 |n| <= {N}, r=3 |n| <= 4, {:.1?}", start.elapsed()))
}

fn check_compat(grid: &NNGridR, tag: &str) -> std::result::Result<usize, String> {
    let r = grid.r();
    let mut interior = 0;
    for len in 0..grid.max_len().saturating_sub(1) {
        for n in MultiIndex::all_of_len(r, len) {
            for i in 0..r {
                for j in i + 1..r {
                    let (ok, _) = e(compatibility_check(grid, &n, i, j))?;
                    ensure(ok, || format!("{tag}: transfer matrices disagree at {n}, ({i},{j})"))?;
                    if n.components().iter().all(|&c| c >= 1) {
                        interior += 1;
                    }
                }
            }
        }
    }
    Ok(interior)
}

fn residuals() -> Outcome {
    let mut counts = (0usize, 0usize, 0usize);
    for seed in 0..20 {
        let (mu1, mu2) = pair(seed, N + 2)?;
        let grid = e(nn_from_marginals_r2(
            &e(mu1.recurrence(N + 2, 1))?,
            &e(mu2.recurrence(N + 2, 2))?,
            N + 1,
        ))?;
        let res = e(pd_residuals_r2(&grid))?;
        if let Some(bad) = res.iter().find(|r| !r.is_zero()) {
            return Err(format!("seed {seed}: {} at {:?} = {}", bad.equation, bad.index, bad.value));
        }
        counts.0 += res.len();
        counts.2 += check_compat(&NNGridR::from_r2(&grid), &format!("r=2 seed {seed}"))?;

        let sys = e(random_system(seed, 3, 6, 4))?;
        let margs: Vec<_> = sys
            .iter()
            .enumerate()
            .map(|(i, m)| m.recurrence(6, i + 1))
            .collect::<mopr::Result<_>>()
            .map_err(|err| err.to_string())?;
        let g3 = e(nn_from_marginals_general_r(&margs, 5, SweepCheck::Off))?;
        let res = e(pd_residuals(&g3))?;
        if let Some(bad) = res.iter().find(|r| !r.is_zero()) {
            return Err(format!("r=3 seed {seed}: {} at {:?} = {}", bad.equation, bad.index, bad.value));
        }
        counts.1 += res.len();
        counts.2 += check_compat(&g3, &format!("r=3 seed {seed}"))?;
    }
    Ok(format!(
        "{} r=2 and {} r=3 residuals zero, {} interior transfer checks true",
        counts.0, counts.1, counts.2
    ))
}

fn structural_invariants() -> Outcome {
    let depth = 8;
    let levels = 5;
    let level0 = e(bessel_stepline(&int(0), &int(0), 2 * depth + 1))?;
    let e1 = e(ShiftFamily::e1(&level0, depth))?;
    let e2 = e(ShiftFamily::e2(&level0, &int(1), depth))?;
    let mut checked = 0;
    for (axis, fam) in [(Axis::E1, &e1), (Axis::E2, &e2)] {
        for j in 1..=levels {
            // e1: level j from j-1, offset j; e2: level j from j-1, offset j-1.
            let (hi, lo) = (e(fam.level(j))?, e(fam.level(j - 1))?);
            let offset = if axis == Axis::E1 { j } else { j - 1 };
            let c = e(fam.c_sequence(if axis == Axis::E1 { j } else { j - 1 }))?;
            for n in 1..=depth - offset {
                let i = 2 * n + offset;
                ensure(hi.gamma(i).unwrap() == lo.gamma(i).unwrap(), || {
                    format!("{axis} level {j}: gamma_{i} not passed through")
                })?;
                let prod_hi = hi.delta(i).unwrap() * hi.delta(i + 1).unwrap();
                let prod_lo = lo.delta(i).unwrap() * lo.delta(i + 1).unwrap();
                ensure(prod_hi == prod_lo, || format!("{axis} level {j}: delta product at {i}"))?;
                checked += 2;
            }
            let d0 = num_traits::Inv::inv(e(c.get(0))?.clone());
            for n in 0..=depth - offset {
                let closed = e(riccati_closed_form(axis, lo, &d0, n))?;
                let direct = num_traits::Inv::inv(e(c.get(n))?.clone());
                ensure(closed == direct, || format!("{axis} level {j}: closed form at n = {n}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} identities, levels 1..={levels}, N = {depth}"))
}

fn convex_invariance() -> Outcome {
    let n = 5;
    let len = 2 * n + 1;
    for seed in 0..10 {
        let (mu1, mu2) = pair(seed, len + 1)?;
        let m1 = e(mu1.recurrence(len + 1, 1))?;
        let base = e(stepline_from_nn(
            &e(nn_from_marginals_r2(&m1, &e(mu2.recurrence(len + 1, 2))?, len))?,
            len,
        ))?;
        for lam in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            let mixed = e(convex_combination(&lam, &mu1, &mu2))?;
            let grid = e(nn_from_marginals_r2(&m1, &e(mixed.recurrence(len + 1, 2))?, len))?;
            let s = e(stepline_from_nn(&grid, len))?;
            ensure(s == base, || format!("seed {seed}, lambda {lam}: step-line changed"))?;
        }
    }
    Ok(format!("10 seeds x 3 weights, N = {n}"))
}

fn failure_semantics() -> Outcome {
    let (mu1, _) = pair(1, 4)?;
    let m1 = e(mu1.recurrence(4, 1))?;
    match nn_from_marginals_r2(&m1, &m1.clone().with_measure(2), 3) {
        Err(Error::SingularSweep { index, .. }) if index == vec![0, 0] => {}
        other => return Err(format!("identical marginals gave {other:?}")),
    }

    let level0 = e(bessel_stepline(&int(0), &int(0), 9))?;
    // delta_3 := c_0^{(1,0)} gamma_3, so the first level-1 denominator
    // delta_3^{(1,0)} = delta_3 - c_0 gamma_3 vanishes.
    let c0 = -level0.delta(2).unwrap() / level0.gamma(1).unwrap();
    let mut delta: Vec<Rational> = level0.deltas().values().to_vec();
    delta[3] = &c0 * level0.gamma(3).unwrap();
    let broken = e(StepLineCoeffs::from_level0(
        level0.betas().values().to_vec(),
        level0.gammas().values().to_vec(),
        delta,
    ))?;
    for order in [UpdateOrder::Reordered, UpdateOrder::Original] {
        match ShiftFamily::e1_with(&broken, 4, order) {
            Err(Error::Normality { axis: Axis::E1, level: 1, n: 1, denominator }) => {
                ensure(denominator.contains("delta_3^(1,0)"), || {
                    format!("denominator label {denominator}")
                })?;
            }
            other => return Err(format!("{order:?}: expected normality error, got {other:?}")),
        }
    }
    Ok("SingularSweep at (0,0); Normality at e1 level 1, n = 1 (delta_3^(1,0))".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Bessel reference values", bessel_reference),
        ("spot anchors", spot_anchors),
        ("round trip A (marginals)", round_trip_a),
        ("round trip B (step-line)", round_trip_b),
        ("oracle equivalence", oracle_equivalence),
        ("partial-difference residuals", residuals),
        ("structural invariants", structural_invariants),
        ("convex-combination invariance", convex_invariance),
        ("failure semantics", failure_semantics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
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
