pub mod cli;
pub mod cube;
pub mod error;
pub mod geodesic;
pub mod jet;
pub mod lp;
pub mod modulus;
pub mod numeric;
pub mod poly;
pub mod props;
pub mod selection;
pub mod whitney;

pub use cube::{Cube, HalfSpacePoint, Point};
pub use error::{Error, Result};
pub use jet::{Jet, JetSpace};
pub use modulus::Modulus;
pub use poly::{MultiIndex, Poly};
