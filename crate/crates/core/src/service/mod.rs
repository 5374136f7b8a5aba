//! Interactive play sessions over HTTP and a websocket message stream.

mod http;
pub mod messages;
mod session;

pub use http::{router, serve};
pub use messages::{ClientMessage, Cursor, Frame, OptimizeAction, Progress, ServerMessage, Solution};
pub use session::{
    frames, GraphData, GraphPoint, Scored, Service, ServiceConfig, ServiceError, ServiceResult, Session, SessionInfo,
    SessionState, GRAPH_BLOCKS, GRAPH_RANGE,
};
