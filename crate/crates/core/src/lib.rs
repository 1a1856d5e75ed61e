//! Exact graded algebra and desk-scale numerics for the Koopman–von Neumann
//! formulation of classical mechanics, its superfield formulation over
//! supertime, and the vierbein constructions relating classical and quantum
//! path-integral weights.

pub mod extended;
pub mod grassmann;
pub mod kernels;
pub mod kvn;
pub mod ode;
pub mod phase_flow;
pub mod poly;
pub mod ring;
pub mod sampling;
pub mod superfield;
pub mod supergeometry;
pub mod vierbein;
