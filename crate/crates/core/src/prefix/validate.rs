use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NodeId, NodeKind, PrefixNetwork, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    /// `nodes[index].id != index`.
    NodeIdMismatch {
        index: usize,
        id: NodeId,
    },
    DanglingInput {
        node: NodeId,
        input: NodeId,
    },
    Arity {
        node: NodeId,
        expected: usize,
        found: usize,
    },
    Cycle {
        nodes: Vec<NodeId>,
    },
    OutputCount {
        expected: usize,
        found: usize,
    },
    DanglingOutput {
        bit: usize,
        node: NodeId,
    },
    /// A consumer reads the propagate output of a gray node, which has none.
    /// The carry stage reads the propagate of every designated output.
    GrayPropagateConsumed {
        node: NodeId,
    },
    /// Output for `bit` does not cover `(bit:0)`.
    MissingOutput {
        bit: usize,
        found: Span,
    },
    SpanMismatch {
        node: NodeId,
        expected: Option<Span>,
        found: Span,
    },
    LeafSpan {
        node: NodeId,
        span: Span,
    },
    LevelOrder {
        node: NodeId,
        input: NodeId,
    },
}

impl Violation {
    /// Structural violations make a network impossible to evaluate. The rest
    /// are semantic: the network still computes something, just not
    /// necessarily a correct prefix.
    pub fn is_structural(&self) -> bool {
        !matches!(
            self,
            Violation::MissingOutput { .. }
                | Violation::SpanMismatch { .. }
                | Violation::LeafSpan { .. }
                | Violation::LevelOrder { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeIdMismatch { index, id } => {
                write!(f, "node at position {index} has id {id}")
            }
            Violation::DanglingInput { node, input } => {
                write!(f, "node {node} reads missing node {input}")
            }
            Violation::Arity {
                node,
                expected,
                found,
            } => write!(f, "node {node} has {found} inputs, expected {expected}"),
            Violation::Cycle { nodes } => write!(f, "cycle through nodes {nodes:?}"),
            Violation::OutputCount { expected, found } => {
                write!(f, "{found} outputs designated, expected {expected}")
            }
            Violation::DanglingOutput { bit, node } => {
                write!(f, "output for bit {bit} names missing node {node}")
            }
            Violation::GrayPropagateConsumed { node } => {
                write!(f, "propagate of gray node {node} is consumed")
            }
            Violation::MissingOutput { bit, found } => {
                write!(f, "missing ({bit}:0): output for bit {bit} spans {found}")
            }
            Violation::SpanMismatch {
                node,
                expected: Some(e),
                found,
            } => write!(f, "node {node} spans {found} but its inputs give {e}"),
            Violation::SpanMismatch {
                node,
                expected: None,
                found,
            } => write!(
                f,
                "node {node} spans {found} but its inputs are not adjacent"
            ),
            Violation::LeafSpan { node, span } => {
                write!(f, "leaf {node} has multi-bit span {span}")
            }
            Violation::LevelOrder { node, input } => {
                write!(f, "node {node} is not above its input {input}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn structural(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.is_structural())
    }
}

pub fn validate_network(net: &PrefixNetwork) -> ValidationReport {
    let mut v = Vec::new();
    let nodes = net.nodes();
    let n = nodes.len();

    for (index, node) in nodes.iter().enumerate() {
        if node.id != index {
            v.push(Violation::NodeIdMismatch { index, id: node.id });
        }
        if node.inputs.len() != node.kind.arity() {
            v.push(Violation::Arity {
                node: index,
                expected: node.kind.arity(),
                found: node.inputs.len(),
            });
        }
        for &input in &node.inputs {
            if input >= n {
                v.push(Violation::DanglingInput { node: index, input });
            }
        }
    }
    if net.outputs().len() != net.width() {
        v.push(Violation::OutputCount {
            expected: net.width(),
            found: net.outputs().len(),
        });
    }
    for (bit, &o) in net.outputs().iter().enumerate() {
        if o >= n {
            v.push(Violation::DanglingOutput { bit, node: o });
        }
    }
    if !v.is_empty() {
        // Remaining checks index through node ids.
        return ValidationReport { violations: v };
    }

    if let Err(crate::Error::InvalidNetwork(cycle)) = net.topo_order() {
        v.extend(cycle);
    }

    for node in nodes {
        match node.kind {
            NodeKind::Leaf => {
                if node.span.hi() != node.span.lo() {
                    v.push(Violation::LeafSpan {
                        node: node.id,
                        span: node.span,
                    });
                }
            }
            NodeKind::Buffer => {
                let src = nodes[node.inputs[0]].span;
                if src != node.span {
                    v.push(Violation::SpanMismatch {
                        node: node.id,
                        expected: Some(src),
                        found: node.span,
                    });
                }
            }
            NodeKind::Black | NodeKind::Gray => {
                let hi = nodes[node.inputs[0]].span;
                let lo = nodes[node.inputs[1]].span;
                let expected = hi.concat(lo);
                if expected != Some(node.span) {
                    v.push(Violation::SpanMismatch {
                        node: node.id,
                        expected,
                        found: node.span,
                    });
                }
            }
        }
        for &input in &node.inputs {
            if nodes[input].level >= node.level {
                v.push(Violation::LevelOrder {
                    node: node.id,
                    input,
                });
            }
        }
    }

    let uses = net.propagate_uses();
    for node in nodes {
        if node.kind == NodeKind::Gray && uses[node.id] > 0 {
            v.push(Violation::GrayPropagateConsumed { node: node.id });
        }
    }

    for (bit, &o) in net.outputs().iter().enumerate() {
        let span = nodes[o].span;
        if span.hi() != bit || span.lo() != 0 {
            v.push(Violation::MissingOutput { bit, found: span });
        }
    }

    ValidationReport { violations: v }
}
