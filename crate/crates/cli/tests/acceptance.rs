//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line straight to stderr (bypassing capture) before
//! asserting, so the summary shows up in plain `cargo test` output.

use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use totient_gap::oracle::{phi_naive, smallest_z_scan, SmallFactorization};
use totient_gap::search::{Rejection, SearchProblem, SearchResult};
use totient_gap::verify::{
    extract_known_factors, phi_exact, verify_inequality, Verification, VerifyOptions,
};
use totient_gap::{
    check_certificate_text, find_smallest_z, CertificateChecker, CoprimalityContext, ExactRatio,
    PrimeTable,
};

const BIN: &str = env!("CARGO_BIN_EXE_totient-gap");
const REFERENCE_N: &str = include_str!("data/reference_n.txt");

fn report(id: &str, what: &str, failures: &[String], elapsed: Duration, budget: Duration) {
    let mut failures = failures.to_vec();
    if elapsed > budget {
        failures.push(format!("took {elapsed:.1?}, budget {budget:?}"));
    }
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    let mut line = format!("[acceptance] {id} {verdict}: {what} ({elapsed:.2?})");
    for f in &failures {
        line.push_str(&format!("\n[acceptance] {id}   - {f}"));
    }
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(failures.is_empty(), "{id} failed: {failures:?}");
}

/// Pushes `msg` when `ok` is false.
fn expect(failures: &mut Vec<String>, ok: bool, msg: impl Into<String>) {
    if !ok {
        failures.push(msg.into());
    }
}

fn table() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| PrimeTable::build(82_000).unwrap())
}

fn default_search() -> &'static SearchResult {
    static RESULT: OnceLock<SearchResult> = OnceLock::new();
    RESULT.get_or_init(|| {
        let problem = SearchProblem::new(30, 1, ExactRatio::from_u64(4, 15).unwrap()).unwrap();
        find_smallest_z(&problem, table()).unwrap()
    })
}

fn default_verification() -> &'static Verification {
    static V: OnceLock<Verification> = OnceLock::new();
    V.get_or_init(|| {
        verify_inequality(
            &default_search().prime_indices,
            30,
            1,
            table(),
            &VerifyOptions::default(),
        )
        .unwrap()
    })
}

fn digits_only(s: &str) -> String {
    s.chars().filter(char::is_ascii_digit).collect()
}

#[test]
fn ac1_run_reproduces_n() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let clock = Instant::now();
    let out = Command::new(BIN)
        .args(["run", "--full-n", "--out"])
        .arg(&cert)
        .current_dir(dir.path())
        .output()
        .unwrap();
    let elapsed = clock.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mut f = Vec::new();
    expect(
        &mut f,
        out.status.code() == Some(0),
        format!("exit status {:?}", out.status.code()),
    );
    let n = stdout
        .lines()
        .find_map(|l| l.strip_prefix("n: "))
        .map(digits_only)
        .unwrap_or_default();
    expect(&mut f, n.len() == 1116, format!("n has {} digits", n.len()));
    expect(
        &mut f,
        n.starts_with("232909810175496793"),
        "leading digits",
    );
    expect(&mut f, n.ends_with("964860"), "trailing digits");
    expect(
        &mut f,
        n == REFERENCE_N.trim(),
        "n differs from the reference value",
    );
    expect(
        &mut f,
        stdout.contains("n digits: 1116"),
        "report digit count",
    );
    report(
        "AC1",
        "`run` defaults yield the 1,116-digit n",
        &f,
        elapsed,
        Duration::from_secs(600),
    );
}

#[test]
fn ac2_search_and_ledger() {
    let clock = Instant::now();
    let res = default_search();
    let mut f = Vec::new();

    let mut expected_z: Vec<usize> = (4..=383).collect();
    expected_z.extend([385, 388]);
    expect(&mut f, res.prime_indices == expected_z, "z prime indices");
    expect(&mut f, res.t == 382, format!("t = {}", res.t));

    let primes: Vec<u64> = res
        .prime_indices
        .iter()
        .map(|&i| table().nth_prime(i).unwrap())
        .collect();
    let lhs = ExactRatio::phi_ratio_from_primes(&primes).unwrap();
    let lhs_dec = lhs.to_decimal_truncated(7);
    expect(
        &mut f,
        lhs_dec == "0.2666117",
        format!("phi(z)/z = {lhs_dec}"),
    );
    expect(
        &mut f,
        lhs < ExactRatio::from_u64(4, 15).unwrap(),
        "phi(z)/z not below 4/15",
    );

    let q1_primes: Vec<u64> = (4..=384).map(|i| table().nth_prime(i).unwrap()).collect();
    let q1 = ExactRatio::phi_ratio_from_primes(&q1_primes)
        .unwrap()
        .to_decimal_truncated(5);
    expect(&mut f, q1 == "0.26671", format!("q1 = {q1}"));
    let ctx = CoprimalityContext::new(3, table()).unwrap();
    expect(
        &mut f,
        ctx.phi_ratio_lower_bound(381)
            .unwrap()
            .to_decimal_truncated(5)
            == "0.26671",
        "q1 via the coprimality bound",
    );

    let tails: [[usize; 3]; 8] = [
        [383, 384, 385],
        [383, 384, 386],
        [383, 385, 386],
        [383, 384, 387],
        [383, 385, 387],
        [384, 385, 386],
        [383, 384, 388],
        [383, 386, 387],
    ];
    let mut expected: Vec<Vec<usize>> = tails
        .iter()
        .map(|tail| (4..=382).chain(tail.iter().copied()).collect())
        .collect();
    let mut got: Vec<Vec<usize>> = res
        .ledger
        .iter()
        .map(|e| e.candidate.index_multiset())
        .collect();
    expected.sort();
    got.sort();
    expect(
        &mut f,
        got == expected,
        format!("ledger has {} entries, not the expected 8", got.len()),
    );
    expect(
        &mut f,
        res.ledger
            .iter()
            .all(|e| e.reason == Rejection::WrongResidue && e.value_mod_m != 1),
        "a ledger entry was not rejected for its residue",
    );
    report(
        "AC2",
        "z indices, phi(z)/z, q1 and the eight-candidate ledger",
        &f,
        clock.elapsed(),
        Duration::from_secs(600),
    );
}

#[test]
fn ac3_verification_constants() {
    let clock = Instant::now();
    let v = default_verification();
    let cert = &v.certificate;
    let mut f = Vec::new();

    let n = BigUint::parse_bytes(cert.n.as_bytes(), 10).unwrap();
    expect(&mut f, (&n % 60u32).is_zero(), "60 does not divide n");
    expect(
        &mut f,
        table().nth_prime(4874).unwrap() == 47_279,
        "p_4874 != 47279",
    );
    expect(
        &mut f,
        (&n % 47_279u32).is_zero(),
        "47279 does not divide n",
    );
    expect(
        &mut f,
        cert.small_part_factors == vec![(2, 2), (3, 1), (5, 1), (47_279, 1)],
        format!("small factors {:?}", cert.small_part_factors),
    );
    expect(&mut f, cert.coprime_depth == 80_000, "coprime depth");
    expect(
        &mut f,
        v.n_sketch.cofactor_is_coprime(table(), 1_000).unwrap(),
        "cofactor shares a prime with p_1..p_80000",
    );
    // Independent of the sketch: n / 2^2·3·5·47279 against every prime itself.
    let cofactor = &n / BigUint::from(60u32 * 47_279);
    let mut stray = None;
    for &p in table().range(1, 80_000).unwrap() {
        if (&cofactor % p).is_zero() {
            stray = Some(p);
            break;
        }
    }
    expect(
        &mut f,
        stray.is_none(),
        format!("cofactor divisible by {stray:?}"),
    );
    expect(&mut f, cert.s2 == 186, format!("s = {}", cert.s2));
    expect(
        &mut f,
        v.q2_digits == 1118,
        format!("q2 has {} digits", v.q2_digits),
    );
    expect(
        &mut f,
        cert.rhs_decimal == "0.2666124",
        format!("rhs = {}", cert.rhs_decimal),
    );
    let left = BigUint::parse_bytes(cert.final_inequality.left.as_bytes(), 10).unwrap();
    let right = BigUint::parse_bytes(cert.final_inequality.right.as_bytes(), 10).unwrap();
    expect(&mut f, left < right, "final inequality is not strict");
    report(
        "AC3",
        "divisibility, coprimality, s = 186, q2 and the strict inequality",
        &f,
        clock.elapsed(),
        Duration::from_secs(600),
    );
}

fn mutate(byte: u8) -> u8 {
    match byte {
        b'0'..=b'9' => b'0' + (byte - b'0' + 1) % 10,
        b'x' => b'y',
        _ => b'x',
    }
}

#[test]
fn ac4_certificate_check_and_mutations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    default_verification().certificate.write(&path).unwrap();
    let mut f = Vec::new();

    let clock = Instant::now();
    let out = Command::new(BIN).arg("check").arg(&path).output().unwrap();
    expect(
        &mut f,
        out.status.code() == Some(0),
        format!("`check` exited {:?}", out.status.code()),
    );

    let text = std::fs::read_to_string(&path).unwrap();
    expect(
        &mut f,
        check_certificate_text(&text, table()).is_valid(),
        "emitted certificate is not valid",
    );

    // Every position, through the replay-memoizing checker.
    let mut checker = CertificateChecker::new(table());
    let bytes = text.as_bytes();
    let mut survivors = Vec::new();
    for i in 0..bytes.len() {
        let mut m = bytes.to_vec();
        m[i] = mutate(m[i]);
        let mutated = String::from_utf8(m).unwrap();
        if checker.check_text(&mutated).is_valid() {
            survivors.push(i);
        }
    }
    expect(
        &mut f,
        survivors.is_empty(),
        format!("mutations at {survivors:?} still check"),
    );

    // A spread of positions through the plain, uncached entry point too.
    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    for _ in 0..200 {
        let i = rng.gen_range(0..bytes.len());
        let mut m = bytes.to_vec();
        m[i] = mutate(m[i]);
        let mutated = String::from_utf8(m).unwrap();
        if check_certificate_text(&mutated, table()).is_valid() {
            f.push(format!("uncached check accepts a mutation at {i}"));
        }
    }
    report(
        "AC4",
        &format!(
            "certificate checks; all {} single-character mutations rejected",
            bytes.len()
        ),
        &f,
        clock.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn ac5_oracle_equivalence() {
    let clock = Instant::now();
    let mut f = Vec::new();

    let limit = 100_000u64;
    for modulus in [2u64, 6] {
        for (a, b) in [(1u64, 2u64), (2, 3), (8, 15)] {
            let theta = ExactRatio::from_u64(a, b).unwrap();
            let problem = SearchProblem::new(modulus, 1, theta.clone()).unwrap();
            let z = find_smallest_z(&problem, table()).unwrap().z;
            let scanned = smallest_z_scan(modulus, 1, &theta, limit).unwrap();
            let agree = match scanned {
                Some(s) => z.to_u64() == Some(s),
                None => z > BigUint::from(limit),
            };
            expect(
                &mut f,
                agree,
                format!("M={modulus} θ={theta}: search {z}, scan {scanned:?}"),
            );
        }
    }

    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    for _ in 0..10_000 {
        // Multiplicativity over the split into its first prime power and the rest.
        let m = rng.gen_range(1..=1_000_000_000u64);
        let fac = SmallFactorization::of(m).unwrap();
        if let Some(&(p, e)) = fac.factors.first() {
            let a = p.pow(e);
            let ok = phi_naive(m).unwrap() == phi_naive(a).unwrap() * phi_naive(m / a).unwrap();
            expect(
                &mut f,
                ok,
                format!("phi not multiplicative at {m} = {a}·{}", m / a),
            );
        }
        // A squarefree product of table primes below 10^9.
        let mut indices: Vec<usize> = Vec::new();
        let mut value = 1u64;
        loop {
            let i = rng.gen_range(1..=3_000);
            let p = table().nth_prime(i).unwrap();
            if indices.contains(&i) {
                continue;
            }
            if value * p > 1_000_000_000 {
                break;
            }
            value *= p;
            indices.push(i);
        }
        let (v, phi) = phi_exact(&indices, table()).unwrap();
        let ok = v == BigUint::from(value) && phi == BigUint::from(phi_naive(value).unwrap());
        expect(
            &mut f,
            ok,
            format!("phi_exact disagrees at indices {indices:?}"),
        );
    }

    for _ in 0..1_000 {
        let n = rng.gen_range(1..=10_000_000_000u64);
        let sketch = extract_known_factors(&BigUint::from(n), table(), 1_000, 100).unwrap();
        let mut factors = sketch.known_factors.clone();
        let rest = sketch.cofactor.to_u64().unwrap();
        if !rest.is_one() {
            factors.extend(SmallFactorization::of(rest).unwrap().factors);
        }
        let full = SmallFactorization::of(n).unwrap().factors;
        expect(
            &mut f,
            factors == full,
            format!("extraction disagrees at n={n}"),
        );
    }
    f.truncate(20);
    report(
        "AC5",
        "search vs scan, phi_naive vs phi_exact, extraction vs trial division",
        &f,
        clock.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn ac6_coprimality_bounds() {
    const LIMIT: usize = 1_000_000;
    let clock = Instant::now();
    let mut f = Vec::new();
    let ctx = CoprimalityContext::new(3, table()).unwrap();

    // Smallest-prime-factor sieve for ω and φ.
    let mut spf = vec![0u32; LIMIT + 1];
    for i in 2..=LIMIT {
        if spf[i] == 0 {
            for j in (i..=LIMIT).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    let bounds: Vec<ExactRatio> = (0..8)
        .map(|s| ctx.phi_ratio_lower_bound(s).unwrap())
        .collect();
    let mut checked = 0usize;
    for m in 1..=LIMIT {
        if m % 2 == 0 || m % 3 == 0 || m % 5 == 0 {
            continue;
        }
        let (mut rest, mut omega, mut phi) = (m, 0usize, m as u64);
        while rest > 1 {
            let p = spf[rest] as usize;
            omega += 1;
            phi -= phi / p as u64;
            while rest % p == 0 {
                rest /= p;
            }
        }
        let s = ctx.max_distinct_factors(&BigUint::from(m)).unwrap();
        expect(&mut f, omega <= s, format!("ω({m}) = {omega} > {s}"));
        let ratio = ExactRatio::from_u64(phi, m as u64).unwrap();
        expect(
            &mut f,
            ratio >= bounds[s],
            format!("φ({m})/{m} below the bound for s = {s}"),
        );
        checked += 1;
    }

    // Equality at p_4 ⋯ p_{3+s}.
    let mut s = 1;
    loop {
        let primes: Vec<u64> = (4..4 + s).map(|i| table().nth_prime(i).unwrap()).collect();
        let m: u64 = primes.iter().product();
        if m as usize > LIMIT {
            break;
        }
        let got = ctx.max_distinct_factors(&BigUint::from(m)).unwrap();
        expect(
            &mut f,
            got == s,
            format!("max distinct factors of {m} is {got}, not {s}"),
        );
        let exact = ExactRatio::phi_ratio_from_primes(&primes).unwrap();
        expect(
            &mut f,
            exact == bounds[s],
            format!("bound not attained at {m}"),
        );
        s += 1;
    }
    f.truncate(20);
    report(
        "AC6",
        &format!("ω and φ(m)/m bounds over {checked} m coprime to 30, tight at p_4⋯p_(3+s)"),
        &f,
        clock.elapsed(),
        Duration::from_secs(600),
    );
}

#[test]
fn ac7_oracle_scan_finds_nothing_small() {
    let clock = Instant::now();
    let out = Command::new(BIN)
        .args([
            "oracle", "scan", "--a", "30", "--b", "1", "--c", "30", "--d", "0", "--limit",
            "1000000",
        ])
        .output()
        .unwrap();
    let elapsed = clock.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mut f = Vec::new();
    expect(
        &mut f,
        out.status.code() == Some(0),
        format!("exit status {:?}", out.status.code()),
    );
    expect(
        &mut f,
        stdout.trim() == "no solution with n <= 1000000",
        format!("unexpected output {stdout:?}"),
    );
    report(
        "AC7",
        "no n <= 10^6 with phi(30n+1) < phi(30n)",
        &f,
        elapsed,
        Duration::from_secs(120),
    );
}
