//! Acceptance criteria 1 to 8, one line each on stdout.
//!
//! Runs without the libtest harness so the lines always print. Pass
//! criterion numbers as arguments to run a subset:
//! `cargo test -p e2ev-cli --test acceptance -- 2 7`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use e2ev_core::board::Board;
use e2ev_core::device::DeviceConfig;
use e2ev_core::dispute::{adjudicate, defamation_monte_carlo, expected_defamation_successes, false_claim, Outcome};
use e2ev_core::elgamal::{decrypt_share, encrypt_bit, encrypt_unchecked, verify_decryption, Ciphertext};
use e2ev_core::group::{Group, KeyPair, PublicKey, TrusteeShare};
use e2ev_core::package::{abc, run_script, Step};
use e2ev_core::proofs::{prove_bit, prove_decryption, verify_bit, BitContext, BitProof, ChaumPedersen, DecContext};
use e2ev_core::receipt::{code_from_index, Receipt, CODE_SPACE};
use e2ev_core::sim::{run_trials, summarize, sweep, SimConfig, SweepConfig};
use e2ev_core::{verifier, BigUint};
use e2ev_format::doc::canonical;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

/// 100 voters, 3 candidates, 2048-bit group: PASS, true counts, under 60 s.
fn lifecycle() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let selections: Vec<u32> = (0..100).map(|_| rng.gen_range(0..3)).collect();
    let mut truth = vec![0u64; 3];
    for &s in &selections {
        truth[s as usize] += 1;
    }
    let start = Instant::now();
    let group = Arc::new(Group::<BigUint>::production());
    let p = run_script(group, &abc(), 3, &Step::casts(&selections), DeviceConfig::honest(1), 1)
        .map_err(|e| e.to_string())?;
    let report = e2ev_verify::verify_election(p.manifest_json.as_bytes(), p.board.as_bytes(), None);
    let elapsed = start.elapsed();
    let core = verifier::verify_election::<BigUint>(p.manifest_json.as_bytes(), p.board.as_bytes(), None);
    check(
        report.passed() && report.counts == truth && core == report && elapsed < Duration::from_secs(60),
        format!(
            "verdict {}, counts {:?} (truth {truth:?}), pipeline {}",
            report.verdict,
            report.counts,
            secs(elapsed)
        ),
    )
}

/// Every decodable single-bit mutation of a 10-entry package fails with a
/// first locator naming the mutated entry.
fn single_tamper() -> Verdict {
    let steps = [
        Step::Cast(0),
        Step::Cast(1),
        Step::Challenge(2),
        Step::Cast(2),
        Step::Cast(0),
        Step::Challenge(1),
        Step::Cast(1),
    ];
    let p = run_script(
        Arc::new(Group::<u64>::toy()),
        &abc(),
        2,
        &steps,
        DeviceConfig::honest(2),
        2,
    )
    .map_err(|e| e.to_string())?;
    let lines = p.board.lines().count();
    if lines != 10 || !e2ev_verify::verify_election(p.manifest_json.as_bytes(), p.board.as_bytes(), None).passed() {
        return Err(format!("package has {lines} entries or does not pass"));
    }
    // Line index of every board byte; the newline belongs to its line.
    let mut line_of = Vec::with_capacity(p.board.len());
    for (i, l) in p.board.lines().enumerate() {
        line_of.extend(std::iter::repeat_n(i as u64, l.len() + 1));
    }

    let start = Instant::now();
    let (mut decodable, mut undecodable, mut misses) = (0u64, 0u64, Vec::new());
    let mut run = |manifest: &[u8], board: &[u8], entry: u64, what: String| {
        let r = e2ev_verify::verify_election(manifest, board, None);
        if r.exit_code() == 2 {
            undecodable += 1;
            return;
        }
        decodable += 1;
        if r.passed() || r.first_failure.as_ref().map(|f| f.seq) != Some(entry) {
            misses.push(format!("{what}: {:?}", r.first_failure));
        }
    };
    let mut board = p.board.clone().into_bytes();
    for i in 0..board.len() {
        for bit in 0..8 {
            board[i] ^= 1 << bit;
            run(
                p.manifest_json.as_bytes(),
                &board,
                line_of[i],
                format!("board byte {i} bit {bit}"),
            );
            board[i] ^= 1 << bit;
        }
    }
    let mut manifest = p.manifest_json.clone().into_bytes();
    for i in 0..manifest.len() {
        for bit in 0..8 {
            manifest[i] ^= 1 << bit;
            run(&manifest, p.board.as_bytes(), 0, format!("manifest byte {i} bit {bit}"));
            manifest[i] ^= 1 << bit;
        }
    }
    let elapsed = start.elapsed();
    check(
        misses.is_empty() && decodable > 0 && elapsed < Duration::from_secs(600),
        format!(
            "{decodable} decodable mutations, {} misses, {undecodable} undecodable skipped, {}{}",
            misses.len(),
            secs(elapsed),
            misses.first().map(|m| format!("; first miss {m}")).unwrap_or_default()
        ),
    )
}

fn sim(n: u32, q: f64, f: f64, trials: u64, seed: u64) -> SimConfig {
    SimConfig {
        n_voters: n,
        candidates: 3,
        q,
        rho: 0.0,
        f,
        d: 0.0,
        trials,
        seed,
    }
}

/// N=100, f=0.1, q=0.2 over 10⁴ trials within ±0.03 of 1−0.98¹⁰⁰; q=0 gives 0.
fn benaloh_rate() -> Verdict {
    let start = Instant::now();
    let c = sim(100, 0.2, 0.1, 10_000, 3);
    let est = summarize(&c, &run_trials(&c).map_err(|e| e.to_string())?);
    let analytic = 1.0 - 0.98f64.powi(100);
    let none = sim(100, 0.0, 1.0, 1_000, 33);
    let zero = summarize(&none, &run_trials(&none).map_err(|e| e.to_string())?);
    check(
        (est.challenge.empirical - analytic).abs() <= 0.03
            && (est.challenge.analytic - analytic).abs() < 1e-12
            && zero.challenge.empirical == 0.0,
        format!(
            "empirical {:.4} vs analytic {analytic:.4} over {} trials; q=0, f=1: {} over {} trials; {}",
            est.challenge.empirical,
            est.trials,
            zero.challenge.empirical,
            zero.trials,
            secs(start.elapsed())
        ),
    )
}

/// Sweep row N=1000, q=0.05, f=0.05 shows detection at least 0.9.
fn small_q() -> Verdict {
    let start = Instant::now();
    let grid = SweepConfig {
        n_voters: vec![1000],
        q: vec![0.05],
        rho: vec![0.0],
        f: vec![0.05],
        d: vec![0.0],
        candidates: 3,
        trials: 2_000,
        seed: 4,
    };
    let rows = sweep(&grid).map_err(|e| e.to_string())?;
    let row = &rows[0];
    let analytic = 1.0 - 0.9975f64.powi(1000);
    check(
        row.empirical_challenge >= 0.9
            && row.analytic_challenge >= 0.9
            && (row.analytic_challenge - analytic).abs() < 1e-12,
        format!(
            "empirical {:.4}, analytic {:.4} over {} trials; {}",
            row.empirical_challenge,
            row.analytic_challenge,
            row.trials,
            secs(start.elapsed())
        ),
    )
}

/// 1000 random WrongCode claims are upheld by chance 1000/676 times on average.
fn defamation() -> Verdict {
    let steps = Step::casts(&[0, 1, 2, 0, 1, 2, 0, 1]);
    let p = run_script(
        Arc::new(Group::<u64>::toy()),
        &abc(),
        1,
        &steps,
        DeviceConfig::honest(5),
        5,
    )
    .map_err(|e| e.to_string())?;
    let board = Board::<u64>::from_bytes(p.board.as_bytes()).map_err(|e| e.to_string())?;
    let stats = defamation_monte_carlo(board.snapshot(), 1000, 10_000, 5);
    let expected = 1000.0 / 676.0;
    check(
        (stats.mean - expected).abs() <= 0.3 && (expected_defamation_successes(1000) - expected).abs() < 1e-12,
        format!(
            "mean upheld {:.4} (sd {:.3}) over {} trials, expected {expected:.4}",
            stats.mean, stats.std_dev, stats.trials
        ),
    )
}

/// All branches simulated for a ciphertext of a non-bit.
fn simulated_bit_proof(
    group: &Group<u64>,
    pk: &PublicKey<u64>,
    ct: &Ciphertext<u64>,
    rng: &mut ChaCha20Rng,
) -> BitProof<u64> {
    let [c0, c1, s0, s1] = [(); 4].map(|_| group.random_scalar_any(rng));
    let b_over_g = group.mul(&ct.b, group.g_inv());
    BitProof {
        a0: group.mul(&group.g_pow(&s0), &group.pow_neg(&ct.a, &c0)),
        b0: group.mul(&pk.pow(&s0), &group.pow_neg(&ct.b, &c0)),
        a1: group.mul(&group.g_pow(&s1), &group.pow_neg(&ct.a, &c1)),
        b1: group.mul(&pk.pow(&s1), &group.pow_neg(&b_over_g, &c1)),
        c0,
        c1,
        s0,
        s1,
    }
}

/// 10³ forged bit proofs, decryption proofs and receipts are all rejected;
/// the honest counterparts are all accepted.
fn soundness() -> Verdict {
    const N: u32 = 1000;
    let group = Group::<u64>::toy();
    let g = &group;
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let elect = KeyPair::generate(g, &mut rng);
    let pk = PublicKey::new(g, elect.pk.clone());
    let device = KeyPair::generate(g, &mut rng);
    let code_key: [u8; 32] = rng.gen();
    let mh = [6u8; 32];
    let one = g.scalar_from_u64(1);
    let (mut forged, mut honest) = ([0u32; 3], [0u32; 3]);

    for i in 0..N {
        // Bit proofs.
        let nonce: [u8; 16] = rng.gen();
        let ctx = BitContext {
            manifest_hash: &mh,
            nonce: &nonce,
            index: i % 3,
        };
        let m = rng.gen_range(0..2u64);
        let r = g.random_scalar(&mut rng);
        let ct = encrypt_bit(g, &pk, m, &r).unwrap();
        let proof = prove_bit(g, &pk, &ct, m, &r, &ctx, &mut rng).unwrap();
        honest[0] += u32::from(verify_bit(g, &pk, &ct, &proof, &ctx));
        let not_a_bit = encrypt_unchecked(g, &pk, rng.gen_range(2..1000), &r);
        let other_ctx = BitContext {
            index: ctx.index + 1,
            ..ctx
        };
        let accepted = match i % 5 {
            0 => verify_bit(
                g,
                &pk,
                &not_a_bit,
                &simulated_bit_proof(g, &pk, &not_a_bit, &mut rng),
                &ctx,
            ),
            1 => verify_bit(g, &pk, &not_a_bit, &proof, &ctx),
            2 => {
                let mut p = proof.clone();
                let delta = g.random_scalar(&mut rng);
                match rng.gen_range(0..4) {
                    0 => p.c0 = g.scalar_add(&p.c0, &delta),
                    1 => p.c1 = g.scalar_add(&p.c1, &delta),
                    2 => p.s0 = g.scalar_add(&p.s0, &delta),
                    _ => p.s1 = g.scalar_add(&p.s1, &delta),
                }
                verify_bit(g, &pk, &ct, &p, &ctx)
            }
            3 => verify_bit(g, &pk, &ct, &proof, &other_ctx),
            _ => {
                let p = BitProof {
                    a0: proof.a1.clone(),
                    b0: proof.b1.clone(),
                    a1: proof.a0.clone(),
                    b1: proof.b0.clone(),
                    c0: proof.c1.clone(),
                    c1: proof.c0.clone(),
                    s0: proof.s1.clone(),
                    s1: proof.s0.clone(),
                };
                verify_bit(g, &pk, &ct, &p, &ctx)
            }
        };
        forged[0] += u32::from(accepted);

        // Decryption proofs; every forgery claims a partial off by g^δ.
        let share = TrusteeShare {
            index: i % 4,
            sk: g.random_scalar(&mut rng),
        };
        let pk_i = share.public_key(g);
        let dctx = DecContext {
            manifest_hash: &mh,
            candidate: i % 3,
            trustee: share.index,
        };
        let (partial, dproof) = decrypt_share(g, &share, &ct, &dctx);
        honest[1] += u32::from(verify_decryption(g, &pk_i, &ct, &partial, &dproof, &dctx));
        let wrong = g.mul(&partial, &g.g_pow_u64(rng.gen_range(1..1000)));
        let accepted = match i % 5 {
            0 => verify_decryption(g, &pk_i, &ct, &wrong, &dproof, &dctx),
            1 => {
                let (c, s) = (g.random_scalar_any(&mut rng), g.random_scalar_any(&mut rng));
                let p = ChaumPedersen {
                    a: g.mul(&g.g_pow(&s), &g.pow_neg(&pk_i, &c)),
                    b: g.mul(&g.pow(&ct.a, &s), &g.pow_neg(&wrong, &c)),
                    c,
                    s,
                };
                verify_decryption(g, &pk_i, &ct, &wrong, &p, &dctx)
            }
            2 => {
                let impostor = TrusteeShare {
                    index: share.index,
                    sk: g.random_scalar(&mut rng),
                };
                let fake = g.pow(&ct.a, &impostor.sk);
                let p = prove_decryption(g, &impostor, &ct, &fake, &dctx);
                fake != partial && verify_decryption(g, &pk_i, &ct, &fake, &p, &dctx)
            }
            3 => {
                let moved = DecContext {
                    candidate: dctx.candidate + 1,
                    ..dctx
                };
                verify_decryption(
                    g,
                    &pk_i,
                    &ct,
                    &wrong,
                    &prove_decryption(g, &share, &ct, &wrong, &moved),
                    &dctx,
                )
            }
            _ => {
                let rerandomized = Ciphertext {
                    a: g.mul(&ct.a, &g.g_pow(&one)),
                    b: g.mul(&ct.b, &pk.pow(&one)),
                };
                verify_decryption(g, &pk_i, &rerandomized, &partial, &dproof, &dctx)
            }
        };
        forged[1] += u32::from(accepted);

        // Receipts.
        let hash: [u8; 32] = rng.gen();
        let genuine = Receipt::issue(g, &device, &code_key, hash, &mut rng);
        honest[2] += u32::from(genuine.signature_valid(g, &device.pk));
        let mut fake = Receipt {
            ballot_hash: genuine.ballot_hash,
            signature: genuine.signature.clone(),
            return_code: genuine.return_code.clone(),
        };
        match i % 5 {
            0 => fake = Receipt::issue(g, &KeyPair::generate(g, &mut rng), &code_key, hash, &mut rng),
            1 => {
                while fake.return_code == genuine.return_code {
                    fake.return_code = code_from_index(rng.gen_range(0..CODE_SPACE));
                }
            }
            2 => fake.ballot_hash[rng.gen_range(0..32)] ^= 1 << rng.gen_range(0..8),
            3 => {
                fake.signature.r = g.g_pow(&g.random_scalar(&mut rng));
                fake.signature.s = g.random_scalar_any(&mut rng);
            }
            _ => {
                let other = Receipt::issue(g, &device, &code_key, rng.gen(), &mut rng);
                fake.signature = other.signature;
            }
        }
        forged[2] += u32::from(fake.signature_valid(g, &device.pk));
    }
    check(
        forged == [0; 3] && honest == [N; 3],
        format!(
            "forged accepted (bit, decryption, receipt) {forged:?} of {N} each; honest accepted {honest:?} of {N} each"
        ),
    )
}

fn copy_dir(from: &Path, to: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(to)?;
    for e in std::fs::read_dir(from)? {
        let e = e?;
        let target = to.join(e.file_name());
        if e.file_type()?.is_dir() {
            copy_dir(&e.path(), &target)?;
        } else {
            std::fs::copy(e.path(), target)?;
        }
    }
    Ok(())
}

/// Builds the verifier in a tree holding only the format and verifier
/// crates, then checks its report on a fixed package is byte-identical
/// across runs and to the in-tree verifiers.
fn independence() -> Verdict {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tree = tmp.path();
    let io = |e: std::io::Error| e.to_string();
    copy_dir(&root.join("crates/format/src"), &tree.join("crates/format/src")).map_err(io)?;
    copy_dir(&root.join("crates/verify/src"), &tree.join("crates/verify/src")).map_err(io)?;
    std::fs::copy(
        root.join("crates/format/Cargo.toml"),
        tree.join("crates/format/Cargo.toml"),
    )
    .map_err(io)?;
    std::fs::copy(root.join("Cargo.lock"), tree.join("Cargo.lock")).map_err(io)?;
    let verify_toml = std::fs::read_to_string(root.join("crates/verify/Cargo.toml")).map_err(io)?;
    let without_dev = verify_toml.split("[dev-dependencies]").next().unwrap_or_default();
    std::fs::write(tree.join("crates/verify/Cargo.toml"), without_dev).map_err(io)?;
    let workspace_toml: String = std::fs::read_to_string(root.join("Cargo.toml"))
        .map_err(io)?
        .lines()
        .filter(|l| !(l.starts_with("e2ev-") && !l.starts_with("e2ev-format")))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(tree.join("Cargo.toml"), workspace_toml).map_err(io)?;
    let remaining: Vec<String> = std::fs::read_dir(tree.join("crates"))
        .map_err(io)?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();

    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let target = root.join("target/independence");
    let start = Instant::now();
    let build = Command::new(cargo)
        .args([
            "build",
            "--offline",
            "--quiet",
            "-p",
            "e2ev-verify",
            "--bin",
            "e2ev-verify",
        ])
        .current_dir(tree)
        .env("CARGO_TARGET_DIR", &target)
        .output()
        .map_err(io)?;
    if !build.status.success() {
        return Err(format!(
            "isolated build failed: {}",
            String::from_utf8_lossy(&build.stderr)
        ));
    }
    let built = secs(start.elapsed());

    let steps = [Step::Challenge(1), Step::Cast(0), Step::Cast(2), Step::Cast(0)];
    let p = run_script(
        Arc::new(Group::<u64>::toy()),
        &abc(),
        2,
        &steps,
        DeviceConfig::honest(7),
        7,
    )
    .map_err(|e| e.to_string())?;
    std::fs::write(tree.join("manifest.json"), &p.manifest_json).map_err(io)?;
    std::fs::write(tree.join("board.ndjson"), &p.board).map_err(io)?;
    std::fs::write(tree.join("receipt.json"), canonical(&p.receipts[0])).map_err(io)?;
    let exe = target
        .join("debug")
        .join(format!("e2ev-verify{}", std::env::consts::EXE_SUFFIX));
    let mut reports = Vec::new();
    for run in 0..2 {
        let out = tree.join(format!("report-{run}.json"));
        let status = Command::new(&exe)
            .current_dir(tree)
            .args([
                "--manifest",
                "manifest.json",
                "--board",
                "board.ndjson",
                "--receipt",
                "receipt.json",
                "--report",
            ])
            .arg(&out)
            .output()
            .map_err(io)?
            .status;
        if status.code() != Some(0) {
            return Err(format!("isolated verifier exited {status}"));
        }
        reports.push(std::fs::read(&out).map_err(io)?);
    }
    let receipt = canonical(&p.receipts[0]);
    let library =
        e2ev_verify::verify_election(p.manifest_json.as_bytes(), p.board.as_bytes(), Some(receipt.as_bytes()));
    let core =
        verifier::verify_election::<u64>(p.manifest_json.as_bytes(), p.board.as_bytes(), Some(receipt.as_bytes()));
    check(
        remaining.len() == 2
            && reports[0] == reports[1]
            && reports[0] == e2ev_verify::report_bytes(&library)
            && library == core,
        format!(
            "built from crates {remaining:?} in {built}; two runs {} bytes, identical: {}; matches in-tree verifiers: {}; second platform not available",
            reports[0].len(),
            reports[0] == reports[1],
            reports[0] == e2ev_verify::report_bytes(&library) && library == core
        ),
    )
}

/// 10⁴ unobserved false claims against an honest election: none upheld.
fn exoneration() -> Verdict {
    let steps = [
        Step::Cast(0),
        Step::Challenge(1),
        Step::Cast(1),
        Step::Cast(2),
        Step::Challenge(0),
        Step::Cast(0),
    ];
    let p = run_script(
        Arc::new(Group::<u64>::toy()),
        &abc(),
        2,
        &steps,
        DeviceConfig::honest(8),
        8,
    )
    .map_err(|e| e.to_string())?;
    let board = Board::<u64>::from_bytes(p.board.as_bytes()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut outcomes = [0u32; 3];
    let mut observed = 0;
    for _ in 0..10_000 {
        let claim = false_claim(&mut rng, &p.receipts, board.snapshot());
        observed += u32::from(claim.observed_issuance);
        let a = adjudicate(&claim, board.snapshot(), &p.manifest);
        outcomes[match a.outcome {
            Outcome::Upheld => 0,
            Outcome::Rejected => 1,
            Outcome::Inconclusive => 2,
        }] += 1;
    }
    check(
        outcomes[0] == 0 && observed == 0,
        format!(
            "upheld {}, rejected {}, inconclusive {} of 10000 unobserved claims",
            outcomes[0], outcomes[1], outcomes[2]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("lifecycle", lifecycle),
        ("single-tamper detection", single_tamper),
        ("challenge detection rate", benaloh_rate),
        ("small-q sufficiency", small_q),
        ("defamation odds", defamation),
        ("proof soundness", soundness),
        ("verifier independence", independence),
        ("honest-system exoneration", exoneration),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let (status, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n} {name}: {status} ({detail})");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
