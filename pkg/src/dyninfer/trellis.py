"""Unrolled round-by-round diagrams of a solved model (DOT and text).

The trellis has one node per (round, observation) annotated with the optimal
remaining loss, and one edge per (estimate, successor) pair with positive
probability. Chosen estimates are drawn solid, others dashed; a chosen edge
is colored blue where the dynamic optimum departs from the single-round
optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Problem
from .reduction import myopic_bayes_estimate
from .solver import SolveResult, ensure_result_matches


@dataclass(frozen=True)
class TrellisNode:
    round: int
    x: str
    v_star: float
    chosen: str
    myopic: str
    tie: bool
    deviation: bool


@dataclass(frozen=True)
class TrellisEdge:
    round: int
    x: str
    yhat: str
    next_x: str
    probability: float
    chosen: bool
    deviation: bool


@dataclass(frozen=True)
class TrellisDocument:
    n: int
    nodes: tuple[TrellisNode, ...]
    edges: tuple[TrellisEdge, ...]


def build_trellis(problem: Problem, result: SolveResult) -> TrellisDocument:
    ensure_result_matches(problem, result)
    nodes = []
    edges = []
    for i in range(1, problem.n + 1):
        for xi, x in enumerate(problem.x_space):
            chosen = result.policy_label(i, x)
            myopic = myopic_bayes_estimate(problem, i, x)
            deviation = chosen != myopic
            nodes.append(
                TrellisNode(
                    round=i,
                    x=x,
                    v_star=result.v_value(i, x),
                    chosen=chosen,
                    myopic=myopic,
                    tie=len(result.tie_labels(i, x)) > 1,
                    deviation=deviation,
                )
            )
            if i == problem.n:
                continue
            kernel = problem.transition_for_round(i + 1)
            for ai, yhat in enumerate(problem.yhat_space):
                for ni, next_x in enumerate(problem.x_space):
                    probability = float(kernel.table[xi, ai, ni])
                    if probability <= 0.0:
                        continue
                    is_chosen = yhat == chosen
                    edges.append(
                        TrellisEdge(
                            round=i,
                            x=x,
                            yhat=yhat,
                            next_x=next_x,
                            probability=probability,
                            chosen=is_chosen,
                            deviation=is_chosen and deviation,
                        )
                    )
    return TrellisDocument(problem.n, tuple(nodes), tuple(edges))


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _node_id(problem: Problem, i: int, x: str) -> str:
    return f"r{i}_x{problem.x_space.index(x)}"


def _render_dot(problem: Problem, doc: TrellisDocument) -> str:
    lines = ["digraph trellis {", "  rankdir=LR;", "  node [shape=ellipse];"]
    for i in range(1, doc.n + 1):
        ids = " ".join(f'"{_node_id(problem, i, x)}";' for x in problem.x_space)
        lines.append(f"  {{ rank=same; {ids} }}")
    for node in doc.nodes:
        label = _escape(f"x={node.x}") + "\\n" + _escape(f"V*={node.v_star:.4f}")
        lines.append(f'  "{_node_id(problem, node.round, node.x)}" [label="{label}"];')
    for edge in doc.edges:
        attrs = [
            f'label="{_escape(f"yhat={edge.yhat} p={edge.probability:.4f}")}"',
            f"style={'solid' if edge.chosen else 'dashed'}",
        ]
        if edge.deviation:
            attrs.append("color=blue")
        lines.append(
            f'  "{_node_id(problem, edge.round, edge.x)}" -> '
            f'"{_node_id(problem, edge.round + 1, edge.next_x)}" [{", ".join(attrs)}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _render_text(doc: TrellisDocument) -> str:
    lines = []
    for node in doc.nodes:
        lines.append(
            f"round {node.round}: x={node.x} V*={node.v_star:.4f} "
            f"chosen={node.chosen} myopic={node.myopic} tie={'yes' if node.tie else 'no'}"
        )
    return "\n".join(lines) + "\n"


def export_trellis(problem: Problem, result: SolveResult, format: str = "dot") -> str:
    """Render the solved trellis as a DOT digraph or a per-round text table."""
    doc = build_trellis(problem, result)
    if format == "dot":
        return _render_dot(problem, doc)
    if format == "text":
        return _render_text(doc)
    raise ValueError(f"unknown trellis format {format!r}; expected 'dot' or 'text'")
