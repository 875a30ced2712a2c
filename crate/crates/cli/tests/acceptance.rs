//! The acceptance matrix at full size. Each criterion runs through the
//! reproduction suite, is cross-checked here against independent oracles
//! where it has one, and prints one PASS or FAIL line.
//!
//! Criterion 4 is expected to fail: the witnesses reach `floor(n/(d+2))/4`,
//! but that is below `s/(8d)` whenever `floor(n/(d+2)) < n/(2d)`, which
//! already happens at `d = 1`. The test asserts the expected outcome for
//! every criterion, so a change in either direction is noticed.
//!
//! The target runs without the test harness so the criterion lines always
//! reach the output.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use hcj_cli::repro::{run_claim, Claim, ClaimOutcome, ReproConfig};
use hcj_core::FrontierRow;

const EXPECTED_FAILURES: [usize; 1] = [4];

/// `(n, m, |P|, largest certified d)` for `4 <= n <= 24`, `1 <= m <= n/4`.
const FROZEN_FRONTIER: [(usize, usize, u64, usize); 66] = [
    (4, 1, 2, 0),
    (5, 1, 4, 0),
    (6, 1, 8, 0),
    (7, 1, 16, 0),
    (8, 1, 16, 0),
    (8, 2, 4, 0),
    (9, 1, 32, 0),
    (9, 2, 4, 0),
    (10, 1, 64, 0),
    (10, 2, 8, 0),
    (11, 1, 128, 1),
    (11, 2, 16, 0),
    (12, 1, 256, 1),
    (12, 2, 16, 0),
    (12, 3, 4, 0),
    (13, 1, 512, 1),
    (13, 2, 32, 0),
    (13, 3, 8, 0),
    (14, 1, 1024, 2),
    (14, 2, 64, 0),
    (14, 3, 16, 0),
    (15, 1, 2048, 2),
    (15, 2, 128, 0),
    (15, 3, 32, 0),
    (16, 1, 2048, 2),
    (16, 2, 256, 1),
    (16, 3, 32, 0),
    (16, 4, 4, 0),
    (17, 1, 4096, 2),
    (17, 2, 512, 1),
    (17, 3, 64, 0),
    (17, 4, 8, 0),
    (18, 1, 8192, 2),
    (18, 2, 512, 1),
    (18, 3, 128, 0),
    (18, 4, 8, 0),
    (19, 1, 16384, 3),
    (19, 2, 1024, 1),
    (19, 3, 256, 0),
    (19, 4, 16, 0),
    (20, 1, 32768, 3),
    (20, 2, 2048, 1),
    (20, 3, 512, 1),
    (20, 4, 32, 0),
    (20, 5, 8, 0),
    (21, 1, 65536, 3),
    (21, 2, 4096, 2),
    (21, 3, 1024, 1),
    (21, 4, 32, 0),
    (21, 5, 8, 0),
    (22, 1, 131072, 4),
    (22, 2, 4096, 2),
    (22, 3, 2048, 1),
    (22, 4, 64, 0),
    (22, 5, 16, 0),
    (23, 1, 262144, 4),
    (23, 2, 8192, 2),
    (23, 3, 4096, 1),
    (23, 4, 64, 0),
    (23, 5, 32, 0),
    (24, 1, 524288, 4),
    (24, 2, 16384, 2),
    (24, 3, 4096, 1),
    (24, 4, 128, 0),
    (24, 5, 32, 0),
    (24, 6, 8, 0),
];

/// Sign patterns of degree-1 polynomials with integer coefficients in
/// `[-w, w]`, no zero values allowed. Bit `x` set means negative, matching
/// the census enumeration.
fn threshold_patterns(n: usize, w: i64) -> HashSet<u64> {
    let span = (2 * w + 1) as u64;
    let mut out = HashSet::new();
    for code in 0..span.pow(n as u32 + 1) {
        let mut c = code;
        let mut coeff = || {
            let v = (c % span) as i64 - w;
            c /= span;
            v
        };
        let bias = coeff();
        let weights: Vec<i64> = (0..n).map(|_| coeff()).collect();
        let mut pattern = 0u64;
        let all_nonzero = (0..1usize << n).all(|x| {
            let p: i64 = bias
                + weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| if x >> j & 1 == 1 { -w } else { *w })
                    .sum::<i64>();
            if p < 0 {
                pattern |= 1 << x;
            }
            p != 0
        });
        if all_nonzero {
            out.insert(pattern);
        }
    }
    out
}

/// Functions not realizable as a linear threshold, with the weight bound
/// raised until the count is stable.
fn oracle_hard_count(n: usize) -> u64 {
    let mut w = 1;
    let mut prev = threshold_patterns(n, w).len();
    loop {
        w += 1;
        let next = threshold_patterns(n, w).len();
        if next == prev {
            return (1u64 << (1 << n)) - next as u64;
        }
        prev = next;
    }
}

struct Line {
    outcome: ClaimOutcome,
    elapsed: Duration,
    extra: Vec<String>,
    extra_ok: bool,
}

fn check(claim: Claim, cfg: &ReproConfig) -> Line {
    let start = Instant::now();
    let outcome =
        run_claim(claim, cfg).unwrap_or_else(|e| panic!("claim {} errored: {e}", claim.name()));
    let elapsed = start.elapsed();
    let mut extra = Vec::new();
    let mut extra_ok = true;
    match claim {
        Claim::Wht => {
            let ok = elapsed < Duration::from_secs(30);
            extra.push(format!("runtime {:.1}s < 30s", elapsed.as_secs_f64()));
            extra_ok &= ok;
        }
        Claim::Packing => {
            let got: Vec<FrontierRow> = outcome.frontier.clone().expect("packing keeps the sweep");
            let frozen: Vec<FrontierRow> = FROZEN_FRONTIER
                .iter()
                .map(|&(n, m, packing_size, max_certified_d)| FrontierRow {
                    n,
                    m,
                    packing_size,
                    max_certified_d,
                })
                .collect();
            let ok = got == frozen;
            extra.push(format!(
                "frontier {} frozen table",
                if ok { "matches" } else { "DIFFERS from" }
            ));
            extra_ok &= ok;
        }
        Claim::Census => {
            let counts: Vec<u64> = outcome.census.iter().map(|r| r.hard_count).collect();
            let oracle: Vec<u64> = outcome
                .census
                .iter()
                .map(|r| oracle_hard_count(r.n))
                .collect();
            let ok = counts == oracle && counts.len() >= 2;
            extra.push(format!(
                "oracle hard counts {oracle:?} vs census {counts:?}"
            ));
            extra.push(format!("runtime {:.1}s < 300s", elapsed.as_secs_f64()));
            extra_ok &= ok && elapsed < Duration::from_secs(300);
        }
        _ => {}
    }
    Line {
        outcome,
        elapsed,
        extra,
        extra_ok,
    }
}

fn main() {
    // 14 of the 16 functions on two bits and 104 of 256 on three are linear
    // threshold functions; the oracle must agree before it judges the census.
    assert_eq!(oracle_hard_count(2), 2);
    assert_eq!(oracle_hard_count(3), 256 - 104);

    let cfg = ReproConfig::default();
    let mut unexpected = Vec::new();
    for claim in Claim::ALL {
        let line = check(claim, &cfg);
        let o = &line.outcome;
        let passed = o.passed && line.extra_ok;
        let expected = !EXPECTED_FAILURES.contains(&claim.number());
        let mut text = format!(
            "criterion {:>2} {:<11} {} cases={} violations={} worst={:?} limit={:?} [{:.1}s] {}",
            claim.number(),
            claim.name(),
            if passed { "PASS" } else { "FAIL" },
            o.cases,
            o.violations,
            o.worst,
            o.limit,
            line.elapsed.as_secs_f64(),
            o.detail
        );
        for e in &line.extra {
            text.push_str("; ");
            text.push_str(e);
        }
        if !expected {
            text.push_str(" (expected failure)");
        }
        println!("{text}");
        if passed != expected {
            unexpected.push(claim.number());
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
