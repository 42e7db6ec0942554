import json
from pathlib import Path

import logfire
import pytest

from skelpair.chowring import build_degree_table
from skelpair.pairing import PairingContext
from skelpair.skeleton import standard_interval, validate_graph

logfire.configure(send_to_logfire=False, console=False)


@pytest.fixture(scope="session")
def interval():
    return standard_interval()


@pytest.fixture(scope="session")
def path_graph():
    """a - m - b: two edges meeting in m."""
    return validate_graph(["a", "m", "b"], [("a", "m"), ("m", "b")], name="path")


@pytest.fixture(scope="session")
def table1():
    return build_degree_table(1)


@pytest.fixture(scope="session")
def table2():
    return build_degree_table(2)


@pytest.fixture(scope="session")
def table3():
    return build_degree_table(3)


@pytest.fixture(scope="session")
def ctx1():
    return PairingContext.build(1)


@pytest.fixture(scope="session")
def ctx2():
    return PairingContext.build(2)


@pytest.fixture(scope="session")
def ctx3():
    return PairingContext.build(3)


@pytest.fixture
def write_json(tmp_path: Path):
    """Write a JSON document under tmp_path and return its path as a string."""
    def write(name: str, data) -> str:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return write
