//! Solution archives and budgeted batch optimization.

mod archive;
mod batch;
mod ledger;

pub(crate) use archive::now_ms;
pub use archive::{archive_path, list_archives, Archive, ArchiveWriter, Manifest, EXTENSION, MAGIC};
pub use batch::{run_batch, BatchConfig, BatchOutcome, BatchSeed, Method};
pub use ledger::{BudgetLedger, Slot, SlotState, Transfer};
