//! Power network model: buses, generators and lines, the nodal admittance
//! matrix and the per-bus operator matrices, case-file I/O and region
//! partitioning with boundary selection.

pub mod canonical;
pub mod case;
pub mod error;
pub mod matpower;
pub mod network;
pub mod operators;
pub mod partition;

pub use case::{load_case, load_partition, parse_case, parse_partition};
pub use error::{NetError, Result};
pub use matpower::parse_matpower;
pub use network::{Bus, Generator, Line, PowerNetwork};
pub use operators::{build_operators, AdmittanceOperators, CMatrix};
pub use partition::{partition, RegionPartition, Tie};
