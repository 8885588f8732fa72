//! On-disk layout of an election workspace.
//!
//! ```text
//! DIR/manifest.json          published
//! DIR/board.ndjson           published
//! DIR/receipts/<hash>.json   one per cast ballot
//! DIR/reports/               verification, adjudication and audit output
//! DIR/dummies.json           dummy-vote sidecar
//! DIR/secrets/               trustee-<k>.json, device.json, authority.json
//! DIR/board.lock             present while a process writes the board
//! ```
//!
//! Nothing under `secrets/` is ever copied into a published file.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use e2ev_core::group::{Group, KeyPair, TrusteeShare};
use e2ev_core::GroupInt;
use e2ev_format::doc::ManifestDoc;
use e2ev_format::hexfmt::{decode_digest, encode, width_of_modulus};
use e2ev_format::CODE_KEY_LEN;
use serde::{Deserialize, Serialize};

pub struct Workspace {
    root: PathBuf,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrusteeKeyDoc {
    trustee: u32,
    sk: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigningKeyDoc {
    sk: String,
    code_key: String,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn board(&self) -> PathBuf {
        self.root.join("board.ndjson")
    }

    pub fn receipts(&self) -> PathBuf {
        self.root.join("receipts")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn dummies(&self) -> PathBuf {
        self.root.join("dummies.json")
    }

    fn secrets(&self) -> PathBuf {
        self.root.join("secrets")
    }

    pub fn read(&self, path: &Path) -> Result<Vec<u8>> {
        fs::read(path).with_context(|| format!("reading {}", path.display()))
    }

    /// Writes `contents` to `dir/name`, creating `dir` if needed.
    pub fn write_in(&self, dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Whether the published manifest uses a group small enough for `u64`.
    pub fn small_group(&self) -> Result<bool> {
        let bytes = self.read(&self.manifest())?;
        let doc: ManifestDoc = serde_json::from_slice(&bytes).context("parsing manifest.json")?;
        Ok(width_of_modulus(&doc.group.p).context("manifest group modulus")? <= 4)
    }

    pub fn receipt_count(&self) -> u64 {
        fs::read_dir(self.receipts()).map_or(0, |d| d.count() as u64)
    }

    pub fn lock(&self) -> Result<BoardLock> {
        BoardLock::acquire(self.root.join("board.lock"))
    }

    fn write_secret(&self, name: &str, contents: &str) -> Result<()> {
        let dir = self.secrets();
        fs::create_dir_all(&dir)?;
        let path = dir.join(name);
        let mut opts = OpenOptions::new();
        opts.write(true).create_new(true);
        #[cfg(unix)]
        std::os::unix::fs::OpenOptionsExt::mode(&mut opts, 0o600);
        let mut f = opts
            .open(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        f.write_all(contents.as_bytes())?;
        Ok(())
    }

    fn read_secret<D: for<'de> Deserialize<'de>>(&self, name: &str) -> Result<D> {
        let path = self.secrets().join(name);
        serde_json::from_slice(&self.read(&path)?).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save_trustee<T: GroupInt>(&self, group: &Group<T>, share: &TrusteeShare<T>) -> Result<()> {
        let doc = TrusteeKeyDoc {
            trustee: share.index,
            sk: group.hex(share.sk.value()),
        };
        self.write_secret(&format!("trustee-{}.json", share.index), &serde_json::to_string(&doc)?)
    }

    pub fn load_trustee<T: GroupInt>(&self, group: &Group<T>, index: u32) -> Result<TrusteeShare<T>> {
        let doc: TrusteeKeyDoc = self.read_secret(&format!("trustee-{index}.json"))?;
        if doc.trustee != index {
            bail!("trustee-{index}.json holds the key of trustee {}", doc.trustee);
        }
        let sk = group.decode_scalar(&doc.sk).context("trustee secret")?;
        Ok(TrusteeShare { index, sk })
    }

    /// Saves a signing key together with the return-code key.
    pub fn save_signing<T: GroupInt>(
        &self,
        name: &str,
        group: &Group<T>,
        key: &KeyPair<T>,
        code_key: &[u8; CODE_KEY_LEN],
    ) -> Result<()> {
        let doc = SigningKeyDoc {
            sk: group.hex(key.sk.value()),
            code_key: encode(code_key),
        };
        self.write_secret(&format!("{name}.json"), &serde_json::to_string(&doc)?)
    }

    pub fn load_signing<T: GroupInt>(&self, name: &str, group: &Group<T>) -> Result<(KeyPair<T>, [u8; CODE_KEY_LEN])> {
        let doc: SigningKeyDoc = self.read_secret(&format!("{name}.json"))?;
        let sk = group.decode_scalar(&doc.sk).with_context(|| format!("{name} secret"))?;
        let code_key = decode_digest(&doc.code_key).with_context(|| format!("{name} code key"))?;
        Ok((KeyPair::from_secret(group, sk), code_key))
    }
}

/// Exclusive right to append to the board, held for the lifetime of the value.
#[derive(Debug)]
pub struct BoardLock {
    path: PathBuf,
}

impl BoardLock {
    pub fn acquire(path: PathBuf) -> Result<Self> {
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(BoardLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => bail!(
                "{} exists: another process is writing the board (delete the file if that process is gone)",
                path.display()
            ),
            Err(e) => Err(e).with_context(|| format!("creating {}", path.display())),
        }
    }
}

impl Drop for BoardLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
