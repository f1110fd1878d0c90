from importlib import resources

import pytest

from seirmig.config import load_config, parse_config, serialize_config
from seirmig.errors import ConfigError
from seirmig.model import BASELINE_INIT, BASELINE_PARAMS

DEFAULT = resources.files("seirmig").joinpath("data/default.ini").read_text()

MINIMAL = """[model]
b1 = 350
beta = 0.00028
mu_c = 0.0062
gamma = 0.0714
d1 = 0.013
k = 0.1961
m = 0.000182
p = 0.5
"""


def test_shipped_defaults():
    cfg = parse_config(DEFAULT, {})
    assert cfg.params == BASELINE_PARAMS
    assert cfg.init == BASELINE_INIT
    assert cfg.seed == 42
    assert not cfg.mode.is_fixed


@pytest.mark.parametrize("text", [DEFAULT, MINIMAL, MINIMAL + "[incidence]\nmode = fixed_n\nn = 520\n"
                                  "[integration]\nmethod = rk4\nstep = 0.25\n[run]\nthreads = 3\n"
                                  "[weights]\nconvention = explicit\np1 = 0.5\np2 = 0.25\n"])
def test_serialize_round_trip(text):
    cfg = parse_config(text, {})
    assert parse_config(serialize_config(cfg), {}) == cfg


@pytest.mark.parametrize("extra", ["[model2]\nx = 1\n", "[run]\nseeed = 1\n", "[incidence]\nmode = other\n",
                                   "[integration]\nt_end = -1\n", "[run]\nthreads = 0\n"])
def test_rejects_bad_entries(extra):
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + extra, {})


def test_missing_rate_is_an_error():
    text = MINIMAL.replace("p = 0.5\n", "")
    with pytest.raises(ConfigError, match="p"):
        parse_config(text, {})


def test_environment_override():
    cfg = parse_config(MINIMAL, {"SEIRMIG__MODEL__BETA": "0.5", "UNRELATED": "1"})
    assert cfg.params.beta == 0.5
    with pytest.raises(ConfigError):
        parse_config(MINIMAL, {"SEIRMIG__MODEL__ZETA": "1"})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.ini"), {})
