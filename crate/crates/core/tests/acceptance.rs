//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Expected values come from small independent oracles written here, never
//! from the library's own helpers.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use relay_dof::analysis::{achievable_sum_dof, analyze_sizes, cutset_sum_dof, inverse_gap, is_optimal};
use relay_dof::region::max_uniform_scale;
use relay_dof::scaling::{classify, FamilySpec, PinnedLayer, ScalingClass, SLOPE_TOLERANCE};
use relay_dof::schedule::{integer_schedule, recurrence_sum_dof, verify_schedule};
use relay_dof::{
    analyze, check_demand, ExactDemand, Ext, ExtCount, ExtRational, LayerSpec, NetworkTopology, Rational,
};

const SEED: u64 = 0x5eed_0d0f;
const LIMIT_ORACLE: Duration = Duration::from_secs(10);
const LIMIT_GAP: Duration = Duration::from_secs(5);
const LIMIT_SCALING: Duration = Duration::from_secs(5);
const SLOPE_TOL: f64 = 0.15;
const GAP_SAMPLES: usize = 10_000;
const ANTENNA_SAMPLES: usize = 1_000;
const INSERTION_SAMPLES: usize = 1_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn fin(sizes: &[u64]) -> Vec<ExtCount> {
    sizes.iter().map(|&s| ExtCount::Finite(s)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every vector of length `len` over `alphabet`.
fn product<T: Clone>(alphabet: &[T], len: usize) -> Vec<Vec<T>> {
    (0..len).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|v| {
                alphabet.iter().map(move |x| {
                    let mut w = v.clone();
                    w.push(x.clone());
                    w
                })
            })
            .collect()
    })
}

/// Sum DoF of a finite chain, straight from the per-hop X-network DoF.
fn oracle_inv_alpha(s: &[u64]) -> Rational {
    s.windows(2).map(|w| q((w[0] + w[1] - 1) as i64, (w[0] * w[1]) as i64)).sum()
}

fn oracle_inv_beta(s: &[u64]) -> Rational {
    s.windows(2).map(|w| q(1, w[0].min(w[1]) as i64)).sum()
}

fn finite_value(x: &ExtRational) -> Result<Rational, String> {
    x.finite().cloned().ok_or_else(|| "unexpected infinity".to_string())
}

fn random_sizes(rng: &mut StdRng, max_k: usize, max_size: u64, min_k: usize) -> Vec<u64> {
    let k = rng.gen_range(min_k..=max_k);
    (0..k + 2).map(|_| rng.gen_range(1..=max_size)).collect()
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut count = 0usize;
    for k in 1..=4usize {
        for sizes in product(&[1u64, 2, 3, 4, 5], k + 2) {
            let s = fin(&sizes);
            let rec: Rational = recurrence_sum_dof(&s).map_err(|e| format!("{sizes:?}: {e}"))?;
            let closed = finite_value(&achievable_sum_dof::<Rational>(&s))?;
            ensure(rec == closed, || format!("{sizes:?}: recurrence {rec} vs closed form {closed}"))?;
            count += 1;
        }
    }
    let expected = 25 * (5 + 25 + 125 + 625);
    ensure(count == expected, || format!("enumerated {count}, expected {expected}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < LIMIT_ORACLE, || format!("took {elapsed:?}"))?;
    Ok(format!("{count} topologies in {elapsed:.2?}"))
}

fn c2_gap_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED);
    for _ in 0..GAP_SAMPLES {
        let sizes = random_sizes(&mut rng, 6, 12, 0);
        let s = fin(&sizes);
        let alpha = finite_value(&achievable_sum_dof::<Rational>(&s))?;
        let beta = finite_value(&cutset_sum_dof::<Rational>(&s))?;
        let lhs = alpha.recip() - beta.recip();
        let rhs: Rational = sizes
            .windows(2)
            .map(|w| q(w[0].min(w[1]) as i64 - 1, (w[0] * w[1]) as i64))
            .sum();
        ensure(lhs == rhs, || format!("{sizes:?}: 1/alpha - 1/beta = {lhs}, sum = {rhs}"))?;
        ensure(lhs == oracle_inv_alpha(&sizes) - oracle_inv_beta(&sizes), || format!("{sizes:?}: oracle"))?;
        let g = inverse_gap::<Rational>(&s);
        let (exact, b1, b2) = (finite_value(&g.exact)?, finite_value(&g.bound1)?, finite_value(&g.bound2)?);
        ensure(exact == rhs, || format!("{sizes:?}: reported gap {exact} vs {rhs}"))?;
        ensure(exact <= b1 && b1 <= b2, || format!("{sizes:?}: {exact} <= {b1} <= {b2} fails"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < LIMIT_GAP, || format!("took {elapsed:?}"))?;
    Ok(format!("{GAP_SAMPLES} random topologies in {elapsed:.2?}"))
}

fn c3_optimality() -> Outcome {
    let inf = ExtCount::Infinite;
    let alphabet = [ExtCount::Finite(1), ExtCount::Finite(2), ExtCount::Finite(3), inf];
    let mut count = 0;
    for len in 2..=5 {
        for s in product(&alphabet, len) {
            let alpha = achievable_sum_dof::<Rational>(&s);
            let beta = cutset_sum_dof::<Rational>(&s);
            let condition = s.windows(2).all(|w| w.iter().any(|x| *x == inf || *x == ExtCount::Finite(1)));
            ensure(is_optimal(&s) == condition, || format!("{s:?}: is_optimal disagrees with definition"))?;
            ensure(is_optimal(&s) == (alpha == beta), || format!("{s:?}: alpha {alpha}, beta {beta}"))?;
            count += 1;
        }
    }
    let mut instances = 0;
    for x in [2u64, 5] {
        let (o, x, i) = (ExtCount::Finite(1), ExtCount::Finite(x), inf);
        let rows = [
            [o, x, o, x, o],
            [o, x, i, x, o],
            [o, x, i, x, i],
            [o, i, x, i, x],
            [i, x, i, x, i],
            [x, o, x, o, x],
            [x, o, x, i, x],
            [x, i, x, i, x],
        ];
        for row in rows {
            let report = analyze_sizes::<Rational>(&row);
            ensure(report.optimal, || format!("{row:?} should be optimal"))?;
            ensure(report.alpha == report.beta, || format!("{row:?}: alpha != beta"))?;
            instances += 1;
        }
    }
    Ok(format!("{count} topologies, {instances} optimal families"))
}

fn c4_ultimate_capacity() -> Outcome {
    let mut count = 0;
    for a in 1..=10u64 {
        for b in 1..=10u64 {
            let cu = q((a * b) as i64, (a + b) as i64);
            let x_dof = q((a * b) as i64, (a + b - 1) as i64);
            for k in 1..=4 {
                let mut s = vec![ExtCount::Finite(a)];
                s.extend(std::iter::repeat_n(ExtCount::Infinite, k));
                s.push(ExtCount::Finite(b));
                let r = analyze_sizes::<Rational>(&s);
                let alpha = finite_value(&r.alpha)?;
                ensure(alpha == cu && r.beta == r.alpha, || format!("{s:?}: alpha {alpha}, beta {}", r.beta))?;
                ensure(r.ultimate_capacity.as_ref().and_then(Ext::finite) == Some(&cu), || {
                    format!("{s:?}: ultimate capacity {:?}", r.ultimate_capacity)
                })?;
                let gamma = r.gamma.as_ref().and_then(Ext::finite).cloned().ok_or("missing gamma")?;
                ensure(gamma == alpha.clone() / x_dof.clone(), || format!("{s:?}: gamma {gamma}"))?;
                count += 1;
            }
        }
    }
    let r = analyze_sizes::<Rational>(&[ExtCount::Finite(1), ExtCount::Infinite, ExtCount::Finite(1)]);
    ensure(r.gamma.as_ref().and_then(Ext::finite) == Some(&q(1, 2)), || format!("gamma(1,1) = {:?}", r.gamma))?;
    Ok(format!("{count} topologies, gamma(1,1) = 1/2"))
}

fn c5_parallel_relay() -> Outcome {
    for n in 1..=100u64 {
        let a = finite_value(&analyze::<Rational>(&NetworkTopology::from_sizes(&[1, n, 1]).unwrap()).alpha)?;
        ensure(a == q(1, 2), || format!("[1,{n},1]: alpha {a}"))?;
    }
    Ok("n = 1..100".into())
}

fn c6_schedule_soundness() -> Outcome {
    let mut count = 0;
    for k in 1..=3usize {
        for sizes in product(&[1u64, 2, 3, 4], k + 2) {
            let t = NetworkTopology::from_sizes(&sizes).unwrap();
            let s = integer_schedule(&t).map_err(|e| format!("{sizes:?}: {e}"))?;
            let report = verify_schedule(&s);
            ensure(report.all_passed(), || {
                let names: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
                format!("{sizes:?}: {names:?}")
            })?;
            let alpha = oracle_inv_alpha(&sizes).recip();
            ensure(s.sum_dof == alpha, || format!("{sizes:?}: sum dof {} vs {alpha}", s.sum_dof))?;
            count += 1;
        }
    }
    let s = integer_schedule(&NetworkTopology::from_sizes(&[1, 2, 4]).unwrap()).map_err(|e| e.to_string())?;
    let blocks: Vec<u64> = s.phases.iter().map(|p| p.block_length).collect();
    ensure(blocks == [8, 5], || format!("[1,2,4]: T = {blocks:?}"))?;
    ensure(s.total_bits == int(8), || format!("[1,2,4]: {} bits", s.total_bits))?;
    ensure(s.total_delay == 13, || format!("[1,2,4]: delay {}", s.total_delay))?;
    ensure(s.sum_dof == q(8, 13), || format!("[1,2,4]: sum dof {}", s.sum_dof))?;
    Ok(format!("{count} schedules verified, [1,2,4] gives T=[8,5], 8 bits, delay 13"))
}

fn random_antenna_topology(rng: &mut StdRng) -> NetworkTopology {
    let k = rng.gen_range(0..=3);
    let layers = (0..k + 2)
        .map(|_| {
            let nodes = rng.gen_range(1..=4usize);
            if rng.gen_bool(0.25) {
                LayerSpec::nodes(nodes as u64)
            } else {
                LayerSpec::Antennas((0..nodes).map(|_| rng.gen_range(1..=3)).collect())
            }
        })
        .collect();
    NetworkTopology::new(layers).unwrap()
}

fn c7_antenna_splitting() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 7);
    let mut schedules = 0;
    for _ in 0..ANTENNA_SAMPLES {
        let t = random_antenna_topology(&mut rng);
        let split = t.antenna_split();
        ensure(!split.has_antennas(), || format!("{t}: split still has antennas"))?;
        let sizes: Vec<u64> = t
            .layers()
            .iter()
            .map(|l| match l {
                LayerSpec::Antennas(a) => a.iter().sum(),
                other => other.node_count().as_finite().unwrap(),
            })
            .collect();
        ensure(split.effective_sizes() == fin(&sizes), || format!("{t}: split sizes {split}"))?;
        ensure(analyze::<Rational>(&t) == analyze::<Rational>(&split), || format!("{t}: reports differ"))?;
        let a = integer_schedule(&t);
        ensure(a == integer_schedule(&split), || format!("{t}: schedules differ"))?;
        if let Ok(s) = a {
            ensure(verify_schedule(&s).all_passed(), || format!("{t}: schedule fails verification"))?;
            schedules += 1;
        }
    }
    Ok(format!("{ANTENNA_SAMPLES} topologies, {schedules} with schedules"))
}

fn c8_scaling() -> Outcome {
    let start = Instant::now();
    let one = int(1);
    let families = [
        (FamilySpec::ProportionalFixedK { base: vec![one.clone(), int(2), one.clone()] }, ScalingClass::Linear),
        (
            FamilySpec::PinnedLayerFixedK {
                base: vec![one.clone(), one.clone(), one.clone(), one.clone()],
                pinned: vec![PinnedLayer { layer: 1, nodes: 2 }],
            },
            ScalingClass::Constant,
        ),
        (FamilySpec::FixedSizesGrowingK { size: 3 }, ScalingClass::Inverse),
    ];
    let mut parts = Vec::new();
    for (family, expected) in families {
        let v = classify(&family).map_err(|e| e.to_string())?;
        ensure(v.samples.last().map(|s| s.0) == Some(4096), || "grid must reach 4096".into())?;
        ensure(v.class == Some(expected), || format!("{}: {}", family.name(), v.summary()))?;
        let target = expected.target_slope();
        ensure((v.slope_estimate - target).abs() <= SLOPE_TOL, || {
            format!("{}: slope {} not within {SLOPE_TOL} of {target}", family.name(), v.slope_estimate)
        })?;
        parts.push(v.summary());
    }
    ensure(SLOPE_TOLERANCE == SLOPE_TOL, || "library tolerance drifted".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < LIMIT_SCALING, || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:.2?}", parts.join(", ")))
}

/// Source (or destination) share: alpha times the node's fraction of its layer's antennas.
fn oracle_shares(layer: &LayerSpec, alpha: &Rational) -> Vec<Rational> {
    let (weights, total): (Vec<u64>, u64) = match layer {
        LayerSpec::Antennas(a) => (a.clone(), a.iter().sum()),
        other => {
            let n = other.node_count().as_finite().unwrap();
            (vec![1; n as usize], n)
        }
    };
    weights.iter().map(|&w| alpha.clone() * q(w as i64, total as i64)).collect()
}

fn pattern(entries: &[(usize, usize, i64)]) -> ExactDemand {
    ExactDemand::from_entries(entries.iter().map(|&(j, i, w)| (j - 1, i - 1, int(w as u64))))
}

/// Scales the pattern to the boundary and checks it against independently computed shares.
fn region_case(t: &NetworkTopology, p: &ExactDemand, want_scale: &Rational) -> Result<(), String> {
    let alpha = finite_value(&analyze::<Rational>(&t.antenna_split()).alpha)?;
    let src = oracle_shares(t.sources(), &alpha);
    let dst = oracle_shares(t.destinations(), &alpha);
    let scaled = max_uniform_scale(t, p).map_err(|e| e.to_string())?;
    ensure(&scaled.scale == want_scale, || format!("{t}: scale {} expected {want_scale}", scaled.scale))?;
    let d = p.scaled(want_scale);
    let mut expected_binding = Vec::new();
    if d.total() == alpha {
        expected_binding.push("total".to_string());
    }
    for (i, share) in src.iter().enumerate() {
        ensure(d.source_total(i) <= *share, || format!("{t}: oracle rejects src {}", i + 1))?;
        if d.source_total(i) == *share {
            expected_binding.push(format!("src:{}", i + 1));
        }
    }
    for (j, share) in dst.iter().enumerate() {
        ensure(d.destination_total(j) <= *share, || format!("{t}: oracle rejects dst {}", j + 1))?;
        if d.destination_total(j) == *share {
            expected_binding.push(format!("dst:{}", j + 1));
        }
    }
    let v = check_demand(t, &d).map_err(|e| e.to_string())?;
    ensure(v.feasible, || format!("{t}: boundary demand rejected"))?;
    ensure(v.binding == expected_binding, || format!("{t}: binding {:?} vs {expected_binding:?}", v.binding))?;

    let bump = q(1, 1000);
    for (j, i, value) in d.active() {
        let mut over = d.clone();
        over.set(j, i, value.clone() + bump.clone());
        let v = check_demand(t, &over).map_err(|e| e.to_string())?;
        let src_tight = d.source_total(i) == src[i];
        let dst_tight = d.destination_total(j) == dst[j];
        let names: Vec<&str> = v.violations.iter().map(|c| c.constraint.as_str()).collect();
        ensure(!v.feasible, || format!("{t}: +1/1000 on d[{},{}] accepted", j + 1, i + 1))?;
        let src_name = format!("src:{}", i + 1);
        let dst_name = format!("dst:{}", j + 1);
        ensure(!src_tight || names.contains(&src_name.as_str()), || format!("{t}: {names:?} lacks {src_name}"))?;
        ensure(!dst_tight || names.contains(&dst_name.as_str()), || format!("{t}: {names:?} lacks {dst_name}"))?;
    }
    Ok(())
}

fn c9_region() -> Outcome {
    let t = NetworkTopology::from_sizes(&[3, 3, 3, 3]).unwrap();
    let three_by_three = [
        (pattern(&[(1, 1, 1), (2, 2, 1), (3, 3, 1)]), q(1, 5)),
        (pattern(&[(1, 1, 2), (2, 2, 1), (2, 3, 1), (3, 2, 1), (3, 3, 1)]), q(1, 10)),
        (pattern(&[(1, 1, 1), (3, 3, 1), (2, 1, 1), (1, 2, 1), (3, 2, 1), (2, 3, 1)]), q(1, 10)),
        (ExactDemand::full(3, 3, int(1)), q(1, 15)),
    ];
    for (p, scale) in &three_by_three {
        region_case(&t, p, scale)?;
    }
    let antennas = NetworkTopology::new(vec![
        LayerSpec::Antennas(vec![2, 1]),
        LayerSpec::Antennas(vec![2, 2]),
        LayerSpec::Antennas(vec![1, 1, 1]),
    ])
    .unwrap();
    let two_by_three = [
        (pattern(&[(1, 1, 1), (2, 1, 1), (3, 2, 1)]), q(1, 3)),
        (pattern(&[(1, 1, 2), (2, 1, 2), (3, 1, 2), (1, 2, 1), (2, 2, 1), (3, 2, 1)]), q(1, 9)),
    ];
    for (p, scale) in &two_by_three {
        region_case(&antennas, p, scale)?;
    }
    Ok("4 single-antenna and 2 multi-antenna patterns at the boundary, every +1/1000 rejected".into())
}

fn c10_degradation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 10);
    for _ in 0..INSERTION_SAMPLES {
        let sizes = random_sizes(&mut rng, 3, 6, 1);
        let at = rng.gen_range(1..sizes.len());
        let mut longer = sizes.clone();
        longer.insert(at, rng.gen_range(1..=6));

        let alpha = |s: &[u64]| finite_value(&achievable_sum_dof::<Rational>(&fin(s)));
        let (before, after) = (alpha(&sizes)?, alpha(&longer)?);
        ensure(after < before, || format!("{sizes:?} -> {longer:?}: alpha {before} -> {after}"))?;
        ensure(before == oracle_inv_alpha(&sizes).recip(), || format!("{sizes:?}: oracle"))?;

        let delay_per_bit = |s: &[u64]| -> Result<Rational, String> {
            let sch = integer_schedule(&NetworkTopology::from_sizes(s).unwrap()).map_err(|e| e.to_string())?;
            Ok(int(sch.total_delay) / sch.total_bits)
        };
        let (d0, d1) = (delay_per_bit(&sizes)?, delay_per_bit(&longer)?);
        ensure(d1 > d0, || format!("{sizes:?} -> {longer:?}: delay per bit {d0} -> {d1}"))?;
    }
    Ok(format!("{INSERTION_SAMPLES} random insertions"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", c1_oracle_equivalence),
        ("gap identity", c2_gap_identity),
        ("optimality equivalence", c3_optimality),
        ("ultimate capacity", c4_ultimate_capacity),
        ("parallel relay network", c5_parallel_relay),
        ("schedule soundness", c6_schedule_soundness),
        ("antenna splitting equivalence", c7_antenna_splitting),
        ("scaling-law classification", c8_scaling),
        ("region checks", c9_region),
        ("degradation", c10_degradation),
    ];
    let quiet_hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    panic::set_hook(quiet_hook);
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
