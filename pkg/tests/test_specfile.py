import numpy as np
import pytest

from weylkit import catalog
from weylkit.acceptance import GOLDEN_CANONICAL, GOLDEN_ERRORS, GOLDEN_SPEC
from weylkit.constructs import EmbeddingSpec
from weylkit.errors import SpecFileError
from weylkit.specfile import dumps_spec, load_spec, loads_spec


def test_golden_spec_loads_to_schwarzschild():
    spec = loads_spec(GOLDEN_SPEC, "golden.wk")
    assert spec.coords == ("t", "r", "theta", "phi")
    assert spec.expected_signature == (3, 1)
    p = [0.3, 4.2, 1.1, 0.7]
    assert np.array_equal(spec.metric_value(p), catalog("schwarzschild").metric_value(p))


def test_canonical_dump():
    assert dumps_spec(loads_spec(GOLDEN_SPEC)) == GOLDEN_CANONICAL


@pytest.mark.parametrize("text,message", GOLDEN_ERRORS)
def test_error_locations(text, message):
    with pytest.raises(SpecFileError) as info:
        loads_spec(text, "bad.wk")
    assert str(info.value) == message


@pytest.mark.parametrize("name", ["minkowski", "godel", "pp_wave", "sphere_metric(3)", "hyperboloid_embedding",
                                  "ellipsoid_embedding"])
def test_dump_load_dump(name):
    text = dumps_spec(catalog(name))
    assert dumps_spec(loads_spec(text)) == text


def test_embedding_file(tmp_path):
    path = tmp_path / "disk.wk"
    path.write_text("[meta]\nname = bowl\ndim = 2\nambient = 1, 1, 1\n[coords]\nx y\n"
                    "[embedding]\nX 0 = x\nX 1 = y\nX 2 = (x^2 + y^2)/2\n")
    spec = load_spec(path)
    assert isinstance(spec, EmbeddingSpec)
    assert np.allclose(spec.induced_metric_value([0.0, 0.0]), np.eye(2))


def test_comments_and_sign_signature():
    text = "# header\n[meta]\nname = plane  # trailing\ndim = 2\nsignature = ++\n[coords]\nx y\n[metric]\ng 0 0 = 1\ng 1 1 = 1\n"
    spec = loads_spec(text)
    assert spec.expected_signature == (2, 0) and spec.name == "plane"


@pytest.mark.parametrize("text,fragment", [
    ("[meta]\nname = x\ndim = 2\n[coords]\nx y\n[params]\nx = 1\n[metric]\ng 0 0 = 1\n", "shadows a coordinate"),
    ("[meta]\nname = x\ndim = 2\n[coords]\nx sin\n[metric]\ng 0 0 = 1\n", "reserved word"),
    ("[meta]\nname = x\ndim = 2\n[coords]\nx y\n[metric]\ng 0 2 = 1\n", "index out of range"),
    ("[meta]\nname = x\ndim = 2\n[bogus]\n", "unknown section"),
    ("name = x\n", "before the first section"),
    ("[meta]\nname = x\ndim = 2\n[coords]\nx y\n[ranges]\nx = 2, 1\n[metric]\ng 0 0 = 1\n", "range low"),
    ("[meta]\nname = x\ndim = 2\n[coords]\nx y\n[metric]\ng 0 0 = 1\n[embedding]\nX 0 = x\n", "both"),
])
def test_more_errors(text, fragment):
    with pytest.raises(SpecFileError) as info:
        loads_spec(text, "f.wk")
    assert fragment in str(info.value)
    assert str(info.value).startswith("f.wk:")
