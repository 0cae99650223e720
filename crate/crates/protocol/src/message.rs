use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Agent(usize),
    Operator,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Agent(r) => write!(f, "agent{r}"),
            Party::Operator => write!(f, "operator"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Keys,
    Primal,
    Dual,
}

/// Routing metadata, sent in clear. `r` is the region whose boundary is being
/// compared and `l` the neighbour on the other side of the tie.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Meta {
    pub phase: Phase,
    pub t: usize,
    pub k: usize,
    pub r: usize,
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    PublicKey { key_id: String, n: String },
    /// Private key of agent r for the operator role; travels on a secure channel.
    PrivateKeyHandoff { key_id: String, key: String },
    /// Own boundary entries of r under r's key (negated in the dual phase).
    EncryptedBoundary { key_id: String, ciphertexts: Vec<String> },
    /// (E(X^r)·E(−X^l))^c for each entry, from l to the operator.
    EncryptedWeightedDiff { key_id: String, ciphertexts: Vec<String> },
    SignMessage { signs: Vec<i8> },
    ConvergenceSignal,
    /// (E(−X^r)·E(X^l))^a for each entry, from l back to r.
    DualWeightedDiff { key_id: String, ciphertexts: Vec<String> },
}

impl Payload {
    pub fn name(&self) -> &'static str {
        match self {
            Payload::PublicKey { .. } => "public_key",
            Payload::PrivateKeyHandoff { .. } => "private_key_handoff",
            Payload::EncryptedBoundary { .. } => "encrypted_boundary",
            Payload::EncryptedWeightedDiff { .. } => "encrypted_weighted_diff",
            Payload::SignMessage { .. } => "sign_message",
            Payload::ConvergenceSignal => "convergence_signal",
            Payload::DualWeightedDiff { .. } => "dual_weighted_diff",
        }
    }

    pub fn ciphertexts(&self) -> &[String] {
        match self {
            Payload::EncryptedBoundary { ciphertexts, .. }
            | Payload::EncryptedWeightedDiff { ciphertexts, .. }
            | Payload::DualWeightedDiff { ciphertexts, .. } => ciphertexts,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub seq: u64,
    pub from: Party,
    pub to: Party,
    pub secure: bool,
    pub meta: Meta,
    pub payload: Payload,
}

impl Envelope {
    /// One JSON line of the transcript. Secure-channel payloads are replaced by their key id.
    pub fn transcript_line(&self) -> String {
        let mut shown = self.clone();
        if let Payload::PrivateKeyHandoff { key, .. } = &mut shown.payload {
            *key = "redacted".into();
        }
        serde_json::to_string(&shown).expect("envelope serializes")
    }

    pub fn visible_to(&self, observer: Observer) -> bool {
        match observer {
            Observer::Party(p) => self.from == p || self.to == p,
            Observer::Eavesdropper => !self.secure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observer {
    Party(Party),
    Eavesdropper,
}

impl fmt::Display for Observer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observer::Party(p) => p.fmt(f),
            Observer::Eavesdropper => write!(f, "eavesdropper"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_line_redacts_handoff() {
        let e = Envelope {
            seq: 3,
            from: Party::Agent(1),
            to: Party::Operator,
            secure: true,
            meta: Meta { phase: Phase::Keys, t: 0, k: 0, r: 1, l: 1 },
            payload: Payload::PrivateKeyHandoff { key_id: "ab".into(), key: "{\"lambda\":\"ff\"}".into() },
        };
        let line = e.transcript_line();
        assert!(line.contains("redacted"));
        assert!(!line.contains("lambda"));
        assert!(!e.visible_to(Observer::Eavesdropper));
        assert!(e.visible_to(Observer::Party(Party::Operator)));
        assert!(!e.visible_to(Observer::Party(Party::Agent(0))));
    }

    #[test]
    fn envelope_round_trips_through_json() {
        let e = Envelope {
            seq: 9,
            from: Party::Operator,
            to: Party::Agent(0),
            secure: false,
            meta: Meta { phase: Phase::Primal, t: 2, k: 5, r: 0, l: 1 },
            payload: Payload::SignMessage { signs: vec![1, -1, 0] },
        };
        let back: Envelope = serde_json::from_str(&e.transcript_line()).unwrap();
        assert_eq!(back, e);
    }
}
