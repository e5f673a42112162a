//! Generate crawler project skeletons in batch and patch them afterwards.
//!
//! - [`blocktree`] recovers nested code blocks from indentation.
//! - [`codein`] instantiates templates and inserts code into blocks.
//! - [`confi`] rewrites settings files key by key, idempotently.
//! - [`scaffold`] lays out whole projects, singly or from a manifest.
//! - [`registry`] persists what was generated (`spiders.json`).
//! - [`cli`] wires it together behind the `spiderforge` binary.

pub mod bench;
pub mod blocktree;
pub mod cli;
pub mod codein;
pub mod confi;
mod fsutil;
pub mod registry;
pub mod scaffold;
pub mod templates;

pub use blocktree::{
    BlockNode, BlockPath, BlockTree, IndentProfile, IndentStyle, LineRecord, Transition,
};
pub use codein::{InsertionRequest, Placement, Template};
pub use confi::{ConfigEdit, ConfigLine, EditAction, EditReport, WaitPolicy};
pub use registry::{Registry, RegistryEntry};
pub use scaffold::{GeneratedProject, ProjectSpec, Scaffolder};
