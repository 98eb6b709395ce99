//! CT tool server: a fixed catalogue of volume tools behind JSON-RPC 2.0.
//!
//! Every tool outcome travels in-band as a [`ToolResult`]; protocol-level
//! errors are reserved for malformed requests.

pub mod registry;
pub mod result;
pub mod schema;
pub mod server;
pub mod toolbox;
pub mod workspace;

pub use registry::{registry, Category, ToolDescriptor};
pub use result::{ContentBlock, ErrorKind, ToolResult};
pub use server::Server;
pub use toolbox::{ConfigError, Toolbox, ToolboxConfig};
pub use workspace::Workspace;
