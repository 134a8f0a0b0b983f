//! Lie-Hamilton systems on the nine two-dimensional Cayley-Klein spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`kappa`]: curvature-labelled trigonometry (`Ck`, `Sk`, `Tk`, `Vk`),
//! * [`space`]: charts, distance and isometry group of each space,
//! * [`hamilton`]: the vector fields, symplectic form and Hamiltonian functions,
//! * [`coalgebra`]: the Poisson coalgebra and its constants of motion,
//! * [`superposition`]: the triangle-based superposition rule,
//! * [`integrator`]: an RK4 reference integrator and trajectory I/O,
//! * [`verify`], [`tables`], [`contraction`]: the verification suites behind the CLI.

pub mod kappa;
pub mod coalgebra;
pub mod hamilton;
pub mod integrator;
pub mod space;
pub mod superposition;
pub mod tables;
pub mod contraction;
pub mod verify;
