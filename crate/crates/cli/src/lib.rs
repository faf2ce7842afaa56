//! Command line and HTTP front ends for `tkd-core`.

pub mod commands;
pub mod http;
pub mod workspace;

pub use workspace::{
    Document, DocumentSource, Geometry, Op, OpContext, RowRange, Workspace, WorkspaceError,
};
