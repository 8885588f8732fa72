use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use e2ev_core::board::Board;
use e2ev_core::device::{Device, DeviceConfig};
use e2ev_core::dispute::{adjudicate, dummy_vote_audit, DisputeClaim, DummySidecar, DummyVote};
use e2ev_core::group::Group;
use e2ev_core::manifest::setup_election;
use e2ev_core::tally::tally_board;
use e2ev_core::{BigUint, GroupInt};
use e2ev_format::doc::{canonical, ChallengeDoc, ClaimDoc};
use e2ev_format::hexfmt::encode;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::config::{Config, GroupChoice};
use crate::workspace::{BoardLock, Workspace};
use crate::{Cli, Command};

/// What a command prints and how the process should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, code: 0 }
    }
}

macro_rules! in_group {
    ($ws:expr, $f:ident($($arg:expr),*)) => {
        if $ws.small_group()? {
            $f::<u64>($($arg),*)
        } else {
            $f::<BigUint>($($arg),*)
        }
    };
}

struct Ctx<'a> {
    ws: Workspace,
    config: &'a Config,
    seed: Option<u64>,
}

impl Ctx<'_> {
    /// Seeded runs derive a distinct stream per `stream` value.
    fn rng(&self, stream: u64) -> ChaCha20Rng {
        match self.seed {
            Some(seed) => {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                rng
            }
            None => ChaCha20Rng::from_entropy(),
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Output> {
    let config = Config::load(cli.config.as_deref())?;
    let ctx = Ctx {
        ws: Workspace::new(&cli.workspace),
        seed: cli.seed.or(config.seed),
        config: &config,
    };
    let ws = &ctx.ws;
    match &cli.command {
        Command::Setup {
            candidates,
            trustees,
            group,
            election_id,
        } => setup(&ctx, candidates.clone(), *trustees, *group, election_id.clone()),
        Command::Vote { selection } => in_group!(ws, vote(&ctx, selection)),
        Command::Challenge { selection } => in_group!(ws, challenge(&ctx, selection, false)),
        Command::Dummy { selection } => in_group!(ws, challenge(&ctx, selection, true)),
        Command::Tally => in_group!(ws, tally(&ctx)),
        Command::Verify { receipt } => verify(ws, receipt.as_deref()),
        Command::Adjudicate { claim } => in_group!(ws, adjudicate_claim(ws, claim)),
        Command::Audit => in_group!(ws, audit(ws)),
        Command::Simulate { mode, sim, out } => {
            let out = out.clone().unwrap_or_else(|| ws.reports().join("results.csv"));
            crate::simulate::simulate(*mode, sim, &out).map(Output::ok)
        }
        Command::Serve { bind } => in_group!(ws, serve(&ctx, bind.as_deref())),
    }
}

fn setup(
    ctx: &Ctx,
    candidates: Option<Vec<String>>,
    trustees: Option<u32>,
    group: Option<GroupChoice>,
    election_id: Option<String>,
) -> Result<Output> {
    let c = ctx.config;
    let candidates = candidates
        .or_else(|| c.candidates.clone())
        .context("no candidates: pass --candidates or set them in the config")?;
    let trustees = trustees.or(c.trustees).unwrap_or(1);
    let id = election_id
        .or_else(|| c.election_id.clone())
        .unwrap_or_else(|| "election".to_owned());
    std::fs::create_dir_all(ctx.ws.root()).with_context(|| format!("creating {}", ctx.ws.root().display()))?;
    if ctx.ws.manifest().exists() {
        bail!("{} already exists", ctx.ws.manifest().display());
    }
    let _lock = ctx.ws.lock()?;
    match group.or(c.group).unwrap_or_default() {
        GroupChoice::Test => setup_in(ctx, Group::<u64>::test(), &id, &candidates, trustees),
        GroupChoice::Toy => setup_in(ctx, Group::<u64>::toy(), &id, &candidates, trustees),
        GroupChoice::Production => setup_in(ctx, Group::<BigUint>::production(), &id, &candidates, trustees),
    }
}

fn setup_in<T: GroupInt>(ctx: &Ctx, group: Group<T>, id: &str, candidates: &[String], trustees: u32) -> Result<Output> {
    let ws = &ctx.ws;
    let (m, secrets) = setup_election(Arc::new(group), id, candidates, trustees, &mut ctx.rng(0))?;
    let m = Arc::new(m);
    let g = m.group();
    Board::create(&ws.board(), m.clone())?;
    for t in &secrets.trustees {
        ws.save_trustee(g, t)?;
    }
    ws.save_signing("device", g, &secrets.device, &secrets.code_key)?;
    ws.save_signing("authority", g, &secrets.authority, &secrets.code_key)?;
    ws.write_in(ws.root(), "manifest.json", m.canonical_json().as_bytes())?;
    Ok(Output::ok(format!("{}\n", m.canonical_json())))
}

fn open_device<T: GroupInt>(ctx: &Ctx) -> Result<(BoardLock, Board<T>, Device<T>)> {
    let lock = ctx.ws.lock()?;
    let board = Board::<T>::open(&ctx.ws.board())?;
    let m = board.manifest().clone();
    let (key, code_key) = ctx.ws.load_signing("device", m.group())?;
    let rates = ctx.config.device;
    let config = DeviceConfig {
        cheat_rate: rates.cheat_rate,
        drop_rate: rates.drop_rate,
        bad_signature_rate: rates.bad_signature_rate,
        seed: 0,
    };
    // Dropped ballots leave the board unchanged, so the receipt count is
    // part of the stream too.
    let stream = board.snapshot().len() as u64 | (ctx.ws.receipt_count() << 32);
    let device = Device::with_rng(config, m, key, code_key, ctx.rng(stream))?;
    Ok((lock, board, device))
}

fn selection_index<T: GroupInt>(board: &Board<T>, selection: &str) -> Result<u32> {
    let m = board.manifest();
    m.candidate_index(selection).ok_or_else(|| {
        anyhow!(
            "unknown candidate {selection:?}; candidates are {}",
            m.candidates().join(", ")
        )
    })
}

fn vote<T: GroupInt>(ctx: &Ctx, selection: &str) -> Result<Output> {
    let (_lock, mut board, mut device) = open_device::<T>(ctx)?;
    let sel = selection_index(&board, selection)?;
    let c = device.begin(sel)?;
    let (receipt, _) = device
        .finalize_cast(c.session, &mut board)
        .map_err(|e| anyhow!("{e}"))?;
    let doc = canonical(&receipt.to_doc(board.manifest().group()));
    let name = format!("{}.json", encode(&c.ballot_hash));
    ctx.ws.write_in(&ctx.ws.receipts(), &name, doc.as_bytes())?;
    Ok(Output::ok(doc + "\n"))
}

fn challenge<T: GroupInt>(ctx: &Ctx, selection: &str, dummy: bool) -> Result<Output> {
    let (_lock, mut board, mut device) = open_device::<T>(ctx)?;
    let sel = selection_index(&board, selection)?;
    let c = device.begin(sel)?;
    let (record, _): (ChallengeDoc, _) = device.finalize_challenge(c.session, &mut board)?;
    if dummy {
        let mut sidecar = read_sidecar(&ctx.ws)?;
        sidecar.dummies.push(DummyVote {
            session: sidecar.dummies.len() as u64,
            ballot_hash: encode(&c.ballot_hash),
            selection: sel,
        });
        ctx.ws
            .write_in(ctx.ws.root(), "dummies.json", canonical(&sidecar).as_bytes())?;
    }
    Ok(Output::ok(canonical(&record) + "\n"))
}

fn read_sidecar(ws: &Workspace) -> Result<DummySidecar> {
    if !ws.dummies().exists() {
        return Ok(DummySidecar::default());
    }
    serde_json::from_slice(&ws.read(&ws.dummies())?).context("parsing dummies.json")
}

fn tally<T: GroupInt>(ctx: &Ctx) -> Result<Output> {
    let _lock = ctx.ws.lock()?;
    let mut board = Board::<T>::open(&ctx.ws.board())?;
    let m = board.manifest().clone();
    let g = m.group();
    let shares = (0..m.trustee_pks().len() as u32)
        .map(|k| ctx.ws.load_trustee(g, k))
        .collect::<Result<Vec<_>>>()?;
    let (doc, _) = tally_board(&mut board, &shares)?;
    let (authority, code_key) = ctx.ws.load_signing("authority", g)?;
    let mut rng = ctx.rng(board.snapshot().len() as u64);
    board.close(&authority, &code_key, &mut rng)?;
    Ok(Output::ok(canonical(&doc) + "\n"))
}

fn verify(ws: &Workspace, receipt: Option<&Path>) -> Result<Output> {
    let manifest = ws.read(&ws.manifest())?;
    let board = ws.read(&ws.board())?;
    let receipt = receipt.map(|p| ws.read(p)).transpose()?;
    let report = e2ev_verify::verify_election(&manifest, &board, receipt.as_deref());
    let bytes = e2ev_verify::report_bytes(&report);
    ws.write_in(&ws.reports(), "verification.json", &bytes)?;
    Ok(Output {
        stdout: String::from_utf8(bytes).expect("reports are JSON"),
        code: report.exit_code() as u8,
    })
}

fn adjudicate_claim<T: GroupInt>(ws: &Workspace, claim: &Path) -> Result<Output> {
    let doc: ClaimDoc =
        serde_json::from_slice(&ws.read(claim)?).with_context(|| format!("parsing {}", claim.display()))?;
    let claim = DisputeClaim::from_doc(doc)?;
    let board = Board::<T>::from_bytes(&ws.read(&ws.board())?)?;
    let result = adjudicate(&claim, board.snapshot(), board.manifest());
    let report = result.report();
    let tag: String = claim
        .receipt
        .ballot_hash
        .chars()
        .filter(char::is_ascii_hexdigit)
        .take(16)
        .collect();
    let name = format!("adjudication-{}.txt", if tag.is_empty() { "claim" } else { &tag });
    ws.write_in(&ws.reports(), &name, report.as_bytes())?;
    Ok(Output::ok(report))
}

fn audit<T: GroupInt>(ws: &Workspace) -> Result<Output> {
    let sidecar = read_sidecar(ws)?;
    let board = Board::<T>::from_bytes(&ws.read(&ws.board())?)?;
    let audit = dummy_vote_audit(board.snapshot(), board.manifest(), &sidecar);
    let report = audit.report();
    ws.write_in(&ws.reports(), "dummy-audit.txt", report.as_bytes())?;
    Ok(Output {
        stdout: report,
        code: u8::from(!audit.clean()),
    })
}

fn serve<T: GroupInt + Send + Sync + 'static>(ctx: &Ctx, bind: Option<&str>) -> Result<Output> {
    let bind = bind.or(ctx.config.bind.as_deref()).unwrap_or("127.0.0.1:8080");
    let addr: SocketAddr = bind.parse().with_context(|| format!("bad address {bind:?}"))?;
    let _lock = ctx.ws.lock()?;
    let board = Board::<T>::open(&ctx.ws.board())?;
    eprintln!("serving {} on http://{addr}", ctx.ws.board().display());
    tokio::runtime::Runtime::new()?.block_on(e2ev_board_http::serve(board, addr))?;
    Ok(Output::ok(String::new()))
}
