use std::fmt;
use std::str::FromStr;

/// Kind of a bulletin-board entry. The tag byte enters the entry hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntryKind {
    Manifest,
    CastBallot,
    ChallengedBallot,
    TallyArtifact,
    Close,
}

impl EntryKind {
    pub const ALL: [EntryKind; 5] = [
        EntryKind::Manifest,
        EntryKind::CastBallot,
        EntryKind::ChallengedBallot,
        EntryKind::TallyArtifact,
        EntryKind::Close,
    ];

    pub fn tag(self) -> u8 {
        match self {
            EntryKind::Manifest => 0,
            EntryKind::CastBallot => 1,
            EntryKind::ChallengedBallot => 2,
            EntryKind::TallyArtifact => 3,
            EntryKind::Close => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EntryKind::Manifest => "Manifest",
            EntryKind::CastBallot => "CastBallot",
            EntryKind::ChallengedBallot => "ChallengedBallot",
            EntryKind::TallyArtifact => "TallyArtifact",
            EntryKind::Close => "Close",
        }
    }

    pub fn is_ballot(self) -> bool {
        matches!(self, EntryKind::CastBallot | EntryKind::ChallengedBallot)
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown entry kind {0:?}")]
pub struct UnknownKind(pub String);

impl FromStr for EntryKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.to_owned()))
    }
}
