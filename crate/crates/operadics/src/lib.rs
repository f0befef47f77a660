//! Finite truncated planar operads and the machinery around them: law
//! validation, the reverse operad, induced monads with the variable-reversing
//! comparison, an exact piecewise-linear interval operad, strongly regular
//! equational presentations with free operad truncations, and exhaustive
//! search over small composition tables.

pub mod format;
pub mod interval;
pub mod monad;
pub mod operad;
pub mod report;
pub mod search;
pub mod theory;
