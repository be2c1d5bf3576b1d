import json

import numpy as np
import pytest

from nullity_lab.errors import SpecError
from nullity_lab.gallery import make_example
from nullity_lab.specio import dump_report, dump_spec, immersion_from_dict, load_spec, to_jsonable


@pytest.mark.parametrize("name", ["cubic_curve", "cylinder", "graph_quadric"])
def test_spec_roundtrip(name, tmp_path):
    imm = make_example(name)
    path = tmp_path / "spec.json"
    path.write_text(dump_spec(imm))
    back = load_spec(path)
    for w in imm.chart.random(3, seed=0):
        np.testing.assert_allclose(back.value(w), imm.value(w))
    assert dump_spec(back) == dump_spec(imm)


def test_truncated_spec_reports_position(tmp_path):
    text = dump_spec(make_example("cubic_curve"))
    path = tmp_path / "bad.json"
    path.write_text(text[: len(text) // 2])
    with pytest.raises(SpecError, match=r"bad\.json:\d+:\d+: "):
        load_spec(path)


@pytest.mark.parametrize("patch,msg", [
    ({"domain": {"dim": 0, "center": [], "radius": 1}}, "dim"),
    ({"components": [[{"coeff": "x", "powers": [1]}], []]}, "coeff"),
    ({"components": [[{"coeff": [1, 0], "powers": ["a"]}], []]}, "powers"),
])
def test_malformed_fields(patch, msg):
    data = json.loads(dump_spec(make_example("cubic_curve")))
    data.update(patch)
    with pytest.raises(SpecError, match=msg):
        immersion_from_dict(data)


def test_missing_field():
    with pytest.raises(SpecError, match="components"):
        immersion_from_dict({"domain": {"dim": 1, "center": [[0, 0]], "radius": 1}})


def test_report_serialization_is_plain_json():
    rep = {"z": 1 + 2j, "a": np.array([1.0, 2.0]), "b": np.bool_(True), "n": np.int64(3)}
    assert json.loads(dump_report(rep)) == {"z": [1.0, 2.0], "a": [1.0, 2.0], "b": True, "n": 3}
    assert to_jsonable(np.array([1j])) == [[0.0, 1.0]]
