pub mod error;
pub mod geomsim;
pub mod hybrid;
pub mod multicast;
pub mod optimizer;
pub mod popularity;
pub mod scenario;
pub mod specfun;
pub mod unicast;

pub use error::{Error, Result};
