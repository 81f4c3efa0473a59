from pathlib import Path

import pytest

from varconf.extract import extract
from varconf.metrics import kl_free_costs

DATA = Path(__file__).parent / "data"
NESTED = DATA / "nested.c"
REPEATED = DATA / "repeated.c"


@pytest.fixture
def nested_map():
    return extract([str(NESTED)])


@pytest.fixture
def rep_map():
    """The three-PC snippet: C4 || C5, C5 (two units), !C5 && C6."""
    return extract([str(REPEATED)])


@pytest.fixture
def rep_free():
    return kl_free_costs([str(REPEATED)], 1)


@pytest.fixture
def nested_free():
    return kl_free_costs([str(NESTED)], 1)


def conf(pcmap, **values):
    return pcmap.vars.assignment({k: bool(v) for k, v in values.items()})
