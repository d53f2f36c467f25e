//! Parallel-prefix adder toolkit.
//!
//! Builds prefix carry networks (Brent-Kung, Kogge-Stone, Sklansky,
//! Han-Carlson and a serial ripple chain), evaluates them as adders against
//! an exact integer oracle, scores them under abstract delay/area models,
//! expands them into primitive gate netlists, emits structural Verilog and
//! testbenches, and simulates the netlists with VCD output.
//!
//! ```
//! use prefix_adder::{build_network, eval::Evaluator, TopologyKind};
//!
//! let net = build_network(TopologyKind::BrentKung, 32).unwrap();
//! let adder = Evaluator::new(&net).unwrap();
//! let r = adder.add(4_294_967_295, 1, false).unwrap();
//! assert_eq!(r.sum.value(), 0);
//! assert!(r.carry_out);
//! ```

pub mod cost;
pub mod error;
pub mod eval;
pub mod netlist;
pub mod prefix;
pub mod sim;

pub use error::{Error, Result};
pub use prefix::{
    build_network, combine_gp, gray_combine, insert_alignment_buffers, max_fanout, network_depth,
    operator_counts, validate_network, GroupGP, NodeId, NodeKind, OperatorCounts, PrefixNetwork,
    PrefixNode, Span, TopologyKind, ValidationReport, Violation,
};

/// Tool name embedded in reports and emitted files.
pub const TOOL_NAME: &str = "prefix-adder";
/// Tool version embedded in reports and emitted files.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
