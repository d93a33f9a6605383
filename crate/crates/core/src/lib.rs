pub mod error;
pub mod linalg;
pub mod operator;
pub mod prop;
pub mod fid;
pub mod grape;
pub mod su2;
pub mod compulse;
pub mod ddsim;
pub mod refocus;
pub mod pps;
pub mod gates;
pub mod io;
pub mod spinsys;

pub use error::{Error, Result};
pub use operator::{OpKind, Operator};
pub use spinsys::{SpinSystem, Spin};
