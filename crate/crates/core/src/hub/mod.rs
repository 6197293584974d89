//! Streaming service over the normalization layer.

mod http;
mod service;

pub use http::{read_request, ChunkedWriter, Request};
pub use service::{serve_forever, Hub, HubConfig, Subscription};
