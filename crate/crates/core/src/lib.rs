//! Instruction-stream execution modelled in process algebra: thread terms,
//! process terms with their operational semantics, extraction of threads
//! into processes, client/server protocols, and equivalence checking.

pub mod cli;
pub mod equivalence;
pub mod extraction;
pub mod process;
pub mod protocols;
pub mod semantics;
pub mod thread;
