from pathlib import Path
import shutil

import pytest

from srml import parse_file, parse_schema, parse_standalone
from srml.rules import parse_ruleset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def cart_doc():
    return parse_file(FIXTURES / "cart.xml")


@pytest.fixture
def cart_schema():
    return parse_schema(parse_file(FIXTURES / "cart.xsd"))


@pytest.fixture
def cart_rules():
    return parse_ruleset(parse_file(FIXTURES / "cart_rules.srml").root)


@pytest.fixture
def db_rules():
    return parse_standalone(parse_file(FIXTURES / "cart_db.srml"))


@pytest.fixture
def db_dir(tmp_path) -> Path:
    target = tmp_path / "db"
    shutil.copytree(FIXTURES / "db", target)
    return target


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
