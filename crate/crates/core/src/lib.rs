//! Hardware opaque predicates built from finite-state-machine state registers.
//!
//! A register whose bits hold a known value once a small FSM has settled can
//! stand in for a hard-wired constant. This crate covers the full workflow:
//!
//! - [`boolfn`]: two-level minimization, XOR rewriting and shared gate networks
//! - [`fsm`]: the reset-aware register update and stabilization analysis
//! - [`opgen`]: the QM, QMX and RND generators plus state encoding for existing FSMs
//! - [`hdl`]: structural Verilog and a versioned netlist text format
//! - [`klepto`]: a subverted RSA key generator whose embedded key is the thing to hide
//! - [`watermark`]: LUT-configuration watermarks and their hardening
//! - [`experiments`]: the seeded gate-count comparison harness

pub mod boolfn;
pub mod experiments;
pub mod fsm;
pub mod hdl;
pub mod klepto;
pub mod opgen;
pub mod watermark;

/// Largest register width accepted anywhere in the crate.
pub const MAX_WIDTH: u8 = 16;
