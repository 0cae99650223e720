//! Encrypted boundary exchange for the distributed OPF. Agents and the system
//! operator are separate endpoints that only talk through a simulated network;
//! the transcript of that network is what the privacy audit inspects.

pub mod audit;
pub mod channel;
pub mod endpoint;
pub mod error;
pub mod exchange;
pub mod message;
pub mod twin;

pub use audit::{privacy_audit, AlternativeCheck, AuditReport, CountingCheck, EavesdropperCheck, Freshness, SignBracket, SignCheck};
pub use channel::{Delivery, Network};
pub use endpoint::{check_capacity, difference_bound, AgentEndpoint, OperatorEndpoint, Sealed};
pub use error::{ProtocolError, Result};
pub use exchange::{ComposedWitness, ExchangeStats, GroundTruth, ProtocolConfig, ProtocolExchange, SealedWitness};
pub use message::{Envelope, Meta, Observer, Party, Payload, Phase};
pub use twin::{run_encrypted, twin_run, TwinRun};
