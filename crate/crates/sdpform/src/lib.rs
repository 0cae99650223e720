//! Standard-form SDP of the relaxed OPF for one region: variable layout,
//! constraint matrices, the refreshable objective A_0 and the real embedding.

pub mod embed;
pub mod error;
pub mod form;
pub mod layout;
pub mod region;

pub use embed::{check_psd_embedding, embed_real, unembed};
pub use error::{FormError, Result};
pub use form::{build_form, ConstraintKind, FormOptions, ObjectiveTerms, RegionSolution, SdpStandardForm};
pub use layout::{GenSlots, VariableLayout};
pub use region::{boundary_entries, BoundaryEntry, EntryKind, RegionSpec};
