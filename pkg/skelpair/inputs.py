"""
Input documents: graph and function JSON files.

InputDocument wraps a parsed JSON file and validates it into a pydantic
document model; schema violations become MalformedDocument so the CLI reports
them as input errors.

Graph:     {"vertices": ["a", "b"], "edges": [["a", "b"]], "name": "I"}
Function:  {"type": "expr", "smooth": "cubes", "charts": {"*": "x1*x2"}}
           {"type": "grid", "n": 2, "values": {"0,0": ["0/1", "1/2", ...]}}

Grid values are row-major over {0..n}^d, rationals as "p/q" strings or integers.

Usage:
    from skelpair.inputs import load_graph, load_function

    g = load_graph("graph.json")
    f = load_function("f0.json", g, d=2)
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Literal

import logfire
import numpy as np
from pydantic import Field, TypeAdapter, ValidationError

from skelpair.errors import MalformedDocument
from skelpair.funcspace import ExprFunction, GridFunction, Smoothness
from skelpair.models import Rational, SkelModel
from skelpair.skeleton import Chart, Graph, validate_graph


class GraphDocument(SkelModel):
    vertices: list[str]
    edges: list[list[str]]
    name: str | None = None


class ExprDocument(SkelModel):
    type: Literal["expr"]
    smooth: Smoothness = Smoothness.SIMPLICES
    charts: dict[str, str]


class GridDocument(SkelModel):
    type: Literal["grid"]
    n: int = Field(ge=1)
    values: dict[str, list[Rational]]


FunctionDocument = Annotated[ExprDocument | GridDocument, Field(discriminator="type")]
_FUNCTION_ADAPTER: TypeAdapter[ExprDocument | GridDocument] = TypeAdapter(FunctionDocument)


class InputDocument:
    """
    A parsed JSON input file.

    Provides helpers for validating the content into document models.
    """

    def __init__(self, source: str, data: Any):
        self.source = source
        self._json = data

    @classmethod
    def read(cls, path: str | Path) -> InputDocument:
        """
        Raises:
            MalformedDocument: the file is missing or not valid JSON
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise MalformedDocument(str(path), f"cannot read file: {e.strerror or e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise MalformedDocument(str(path), f"invalid JSON at line {e.lineno} column {e.colno}") from e
        logfire.debug(f"read {path}")
        return cls(str(path), data)

    def as_model[T: SkelModel](self, model_cls: type[T]) -> T:
        """Validate the whole document as `model_cls`."""
        try:
            return model_cls.model_validate(self._json)
        except ValidationError as e:
            raise MalformedDocument(self.source, _first_problem(e)) from e

    def as_function_document(self) -> ExprDocument | GridDocument:
        try:
            return _FUNCTION_ADAPTER.validate_python(self._json)
        except ValidationError as e:
            raise MalformedDocument(self.source, _first_problem(e)) from e


def _first_problem(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(p) for p in err["loc"]) or "document"
    return f"{where}: {err['msg']}"


# =============================================================================
# Loaders
# =============================================================================

def load_graph(path: str | Path) -> Graph:
    """
    Read and validate a graph file.

    Raises:
        MalformedDocument: schema violation
        SelfLoop, ParallelEdge, UnknownVertex, DuplicateVertex: from validation
    """
    doc = InputDocument.read(path)
    model = doc.as_model(GraphDocument)
    graph = validate_graph(model.vertices, model.edges, name=model.name or Path(path).stem)
    logfire.info(f"graph {graph.name}: {graph.vertex_count} vertices, {graph.edge_count} edges")
    return graph


def function_from_document(
    source: str, doc: ExprDocument | GridDocument, graph: Graph, d: int
) -> ExprFunction | GridFunction:
    """
    Build a function from a validated document.

    Raises:
        MalformedDocument: bad chart key or grid of the wrong size
        GluingMismatch: grid values disagree on a shared face
    """
    if isinstance(doc, ExprDocument):
        return ExprFunction.build(graph, d, doc.smooth, doc.charts)

    size = (doc.n + 1) ** d
    arrays = {}
    for key, values in doc.values.items():
        chart = Chart.parse(key, graph, d)
        if len(values) != size:
            raise MalformedDocument(source, f"chart {key} has {len(values)} values, expected {size} "
                                            f"for n={doc.n} and d={d}")
        arrays[chart] = np.array(values, dtype=object).reshape((doc.n + 1,) * d)
    return GridFunction.build(graph, d, doc.n, arrays)


def load_function(path: str | Path, graph: Graph, d: int) -> ExprFunction | GridFunction:
    """Read an expr or grid function file for Gamma^d."""
    doc = InputDocument.read(path)
    return function_from_document(doc.source, doc.as_function_document(), graph, d)
