use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dpf::MalformedKind;
use crate::error::Error;
use crate::transport::{PartyId, Phase};

/// A place where a corrupt party can deviate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    /// Resharing step of a multiplication.
    MulReshare,
    /// Final resharing of an oblivious selection.
    OsReshare,
    /// Multiplication that attaches a MAC.
    MacAttach,
    /// Share sent while opening a value.
    OpenShare,
    /// Share sent while reconstructing towards one party.
    ReconShare,
    /// Masked input sent by the dealer of an input sharing.
    ShareDelta,
    /// A DPF key pair from a corrupt dealer.
    DpfKey(MalformedKind),
    /// The evaluator half of the random index sent by a corrupt dealer.
    RdxShare,
    /// Multiplication inside triple generation.
    TripleC,
}

impl Site {
    /// Every site, with one entry per malformed-key class.
    pub fn all() -> Vec<Site> {
        let mut v = vec![
            Site::MulReshare,
            Site::OsReshare,
            Site::MacAttach,
            Site::OpenShare,
            Site::ReconShare,
            Site::ShareDelta,
        ];
        v.extend(MalformedKind::ALL.iter().map(|&k| Site::DpfKey(k)));
        v.push(Site::RdxShare);
        v.push(Site::TripleC);
        v
    }

    /// Sites that only exist when selection uses DPF tokens.
    pub fn dpf_only(self) -> bool {
        matches!(self, Site::DpfKey(_) | Site::RdxShare)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::MulReshare => f.write_str("mul-reshare"),
            Site::OsReshare => f.write_str("os-reshare"),
            Site::MacAttach => f.write_str("mac-attach"),
            Site::OpenShare => f.write_str("open-share"),
            Site::ReconShare => f.write_str("recon-share"),
            Site::ShareDelta => f.write_str("share-delta"),
            Site::DpfKey(k) => write!(f, "dpf-key-class({})", k.index()),
            Site::RdxShare => f.write_str("rdx-share"),
            Site::TripleC => f.write_str("triple-c"),
        }
    }
}

impl FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("dpf-key-class(") {
            let n: usize = rest
                .strip_suffix(')')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad site {s}")))?;
            let k = MalformedKind::ALL
                .get(n)
                .ok_or_else(|| Error::Config(format!("no key class {n}")))?;
            return Ok(Site::DpfKey(*k));
        }
        Ok(match s {
            "mul-reshare" => Site::MulReshare,
            "os-reshare" => Site::OsReshare,
            "mac-attach" => Site::MacAttach,
            "open-share" => Site::OpenShare,
            "recon-share" => Site::ReconShare,
            "share-delta" => Site::ShareDelta,
            "rdx-share" => Site::RdxShare,
            "triple-c" => Site::TripleC,
            _ => return Err(Error::Config(format!("unknown site {s}"))),
        })
    }
}

/// An additive deviation by one party at one occurrence of one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub site: Site,
    pub party: PartyId,
    /// XORed into the low bits of the payload, truncated to its width. Zero
    /// (or bits past a narrow payload) means "behave honestly but still count
    /// as fired".
    pub error: u64,
    /// Which occurrence of the site to hit, counting from zero.
    pub occurrence: u64,
    /// Only count occurrences in this phase.
    pub phase: Option<Phase>,
}

impl FaultSpec {
    pub fn new(site: Site, party: PartyId, error: u64) -> Self {
        FaultSpec {
            site,
            party,
            error,
            occurrence: 0,
            phase: None,
        }
    }

    pub fn at(mut self, occurrence: u64) -> Self {
        self.occurrence = occurrence;
        self
    }

    pub fn in_phase(mut self, phase: Phase) -> Self {
        self.phase = Some(phase);
        self
    }
}

impl fmt::Display for FaultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{:#x}:{}",
            self.site,
            self.party.index(),
            self.error,
            self.occurrence
        )?;
        if let Some(p) = self.phase {
            write!(f, ":{p}")?;
        }
        Ok(())
    }
}

impl FromStr for FaultSpec {
    type Err = Error;

    /// `site:party:error:occurrence[:phase]`, error in decimal or `0x` hex.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("bad fault spec {s:?}"));
        // The site may itself contain no colons, so split from the left.
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() < 3 || parts.len() > 5 {
            return Err(bad());
        }
        let site: Site = parts[0].parse()?;
        let party = PartyId::new(parts[1].parse().map_err(|_| bad())?)?;
        let error = match parts[2].strip_prefix("0x") {
            Some(hex) => u64::from_str_radix(hex, 16).map_err(|_| bad())?,
            None => parts[2].parse().map_err(|_| bad())?,
        };
        let occurrence = match parts.get(3) {
            Some(o) => o.parse().map_err(|_| bad())?,
            None => 0,
        };
        let phase = match parts.get(4) {
            Some(p) => Some(Phase::parse(p).ok_or_else(bad)?),
            None => None,
        };
        Ok(FaultSpec {
            site,
            party,
            error,
            occurrence,
            phase,
        })
    }
}

/// Runtime state of a fault at the corrupt party.
#[derive(Clone, Debug)]
pub struct Adversary {
    spec: FaultSpec,
    seen: u64,
    fired: bool,
}

impl Adversary {
    pub fn new(spec: FaultSpec) -> Self {
        Adversary {
            spec,
            seen: 0,
            fired: false,
        }
    }

    pub fn spec(&self) -> &FaultSpec {
        &self.spec
    }

    pub fn fired(&self) -> bool {
        self.fired
    }

    fn matches(&mut self, me: PartyId, site: Site, phase: Phase) -> bool {
        if me != self.spec.party || self.spec.site != site {
            return false;
        }
        if self.spec.phase.is_some_and(|p| p != phase) {
            return false;
        }
        let hit = self.seen == self.spec.occurrence;
        self.seen += 1;
        if hit {
            self.fired = true;
        }
        hit
    }

    /// The error to apply if this call is the targeted occurrence.
    pub(crate) fn hit(&mut self, me: PartyId, site: Site, phase: Phase) -> Option<u64> {
        self.matches(me, site, phase).then_some(self.spec.error)
    }

    /// Malformation for the next key pair dealt by `me`, if targeted.
    pub(crate) fn key_fault(&mut self, me: PartyId, phase: Phase) -> Option<MalformedKind> {
        let Site::DpfKey(kind) = self.spec.site else {
            return None;
        };
        if self.matches(me, self.spec.site, phase) && self.spec.error != 0 {
            Some(kind)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_text_round_trip() {
        for site in Site::all() {
            let f = FaultSpec::new(site, PartyId::P2, 0x10)
                .at(3)
                .in_phase(Phase::Online);
            let back: FaultSpec = f.to_string().parse().unwrap();
            assert_eq!(back, f);
        }
        let f: FaultSpec = "os-reshare:1:1".parse().unwrap();
        assert_eq!(f.occurrence, 0);
        assert!("nope:1:1".parse::<FaultSpec>().is_err());
    }

    #[test]
    fn fires_once_at_the_chosen_occurrence() {
        let mut a = Adversary::new(FaultSpec::new(Site::OpenShare, PartyId::P1, 5).at(1));
        assert_eq!(a.hit(PartyId::P0, Site::OpenShare, Phase::Online), None);
        assert_eq!(a.hit(PartyId::P1, Site::OpenShare, Phase::Online), None);
        assert!(!a.fired());
        assert_eq!(a.hit(PartyId::P1, Site::OpenShare, Phase::Online), Some(5));
        assert_eq!(a.hit(PartyId::P1, Site::OpenShare, Phase::Online), None);
        assert!(a.fired());
    }
}
