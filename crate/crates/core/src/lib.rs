pub mod adversary;
pub mod certify;
pub mod code;
pub mod concat;
pub mod encoder;
pub mod error;
pub mod galois;
pub mod params;
pub mod reconstruct;
pub mod repair1;
pub mod repair2;
pub mod simnet;
pub mod testgroup;

pub use code::{Code, Scheme};
pub use encoder::{DataMatrix, NodeShare, ShareFile, SourceMessage};
pub use error::{Error, Result};
pub use galois::{Elem, Field, Mat};
pub use params::CodeParams;
