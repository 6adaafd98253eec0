import json

import pytest

from grafl.core.generators import erdos_renyi
from grafl.core.graph import NeighborhoodSelector
from grafl.features.descriptors import BaseFeatureDescriptor
from grafl.features.function_set import FunctionSet
from grafl.features.functions import BinTransform, ChainStep, DiffusionStep, RelationalFunction
from grafl.features.operators import RelationalOperator
from grafl.schemas.config import LearnConfig
from grafl.schemas.functions import (
    FUNCTION_FILE_VERSION,
    FunctionFileError,
    function_set_from_dict,
    function_set_to_dict,
    load_functions,
    save_functions,
)
from grafl.services.learner import extract, learn

TOTAL = BaseFeatureDescriptor("degree", "total")
OUT = BaseFeatureDescriptor("degree", "out")


# ---------- Fixtures ----------
@pytest.fixture(scope="module")
def learned():
    cfg = LearnConfig.parse({
        "families": ["degree", "kcore"],
        "operators": [{"tag": "sum"}, {"tag": "weighted-lp", "p": 2.0}, {"tag": "rbf", "sigma": 0.5}],
        "lam": 0.95,
        "combinators": ["plus"],
        "diffusion": {"method": "laplacian", "theta": 0.25, "iterations": 4},
    })
    g = erdos_renyi(50, avg_degree=4, seed=8)
    X, fs = learn(g, cfg)
    return g, X, fs


# ---------- Helpers ----------
def _document(fs) -> dict:
    return json.loads(json.dumps(function_set_to_dict(fs)))


# ---------- Tests ----------
def test_round_trip_is_structurally_equal(learned, tmp_path):
    _, _, fs = learned
    path = tmp_path / "functions.json"
    save_functions(fs, path)
    loaded = load_functions(path)
    assert loaded == fs
    assert json.loads(path.read_text())["version"] == FUNCTION_FILE_VERSION


def test_loaded_functions_reproduce_matrix(learned, tmp_path):
    g, X, fs = learned
    path = tmp_path / "functions.json"
    save_functions(fs, path)
    again = extract(g, load_functions(path))
    assert (again.values == X.values).all()


def test_document_layout(learned):
    _, _, fs = learned
    doc = _document(fs)
    assert doc["kind"] == "node"
    assert doc["config"]["lambda"] == 0.95
    assert doc["config"]["ell"] == 1
    assert set(doc["layers"][0][0]) == {"leaf", "chain", "transform"}
    # appended diffusion columns close the base layer
    diffusion = doc["layers"][0][-1]["chain"][-1]["op"]
    assert diffusion["tag"] == "diffuse"
    assert diffusion["method"] == "laplacian"


def test_truncated_file(learned, tmp_path):
    _, _, fs = learned
    path = tmp_path / "functions.json"
    save_functions(fs, path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(FunctionFileError, match="not valid JSON"):
        load_functions(path)


def test_unknown_operator_tag_names_field(learned):
    _, _, fs = learned
    doc = _document(fs)
    li, i, k = next(
        (li, i, k)
        for li, layer in enumerate(doc["layers"])
        for i, f in enumerate(layer)
        for k, step in enumerate(f["chain"])
        if "sel" in step
    )
    doc["layers"][li][i]["chain"][k]["op"]["tag"] = "median"
    with pytest.raises(FunctionFileError, match=rf"layers\.{li}\.{i}\.chain\.{k}\.op\.tag"):
        function_set_from_dict(doc)


def test_version_checked(learned):
    _, _, fs = learned
    doc = _document(fs)
    doc["version"] = FUNCTION_FILE_VERSION + 1
    with pytest.raises(FunctionFileError, match="version"):
        function_set_from_dict(doc)


def test_forward_reference_rejected(learned):
    _, _, fs = learned
    doc = _document(fs)
    doc["layers"][0][0]["combinator"] = {"kind": "plus", "ref": {"layer": 0, "index": 1}}
    with pytest.raises(FunctionFileError, match="combinator.ref"):
        function_set_from_dict(doc)


def test_bad_config_names_field(learned):
    _, _, fs = learned
    doc = _document(fs)
    doc["config"]["alpha"] = 2.0
    with pytest.raises(FunctionFileError, match="config.alpha"):
        function_set_from_dict(doc)


def test_empty_layer_rejected(learned):
    _, _, fs = learned
    doc = _document(fs)
    doc["layers"].append([])
    with pytest.raises(FunctionFileError, match="at least one function"):
        function_set_from_dict(doc)


def test_diffused_combinations_survive_the_file(tmp_path):
    cfg = LearnConfig.parse({"combinators": ["plus"], "diffusion": {"iterations": 3}})
    g = erdos_renyi(50, avg_degree=4, seed=8)
    X, fs = learn(g, cfg)
    path = tmp_path / "functions.json"
    save_functions(fs, path)
    loaded = load_functions(path)
    assert loaded == fs
    assert (extract(g, loaded).values == X.values).all()


def test_post_steps_written_after_combinator(tmp_path):
    a = RelationalFunction(TOTAL, transform=BinTransform(0.5))
    b = a.extend(ChainStep(RelationalOperator("sum"), NeighborhoodSelector("all", 1)))
    combined = a.combine("plus", b).extend(ChainStep(DiffusionStep(method="laplacian", iterations=2)))
    fs = FunctionSet("node", ((a,), (b,), (combined,)), LearnConfig.parse({"combinators": ["plus"]}))

    doc = _document(fs)
    last = doc["layers"][2][0]
    assert last["combinator"]["ref"] == {"layer": 1, "index": 0}
    assert [s["op"]["tag"] for s in last["post"]] == ["diffuse"]
    assert "post" not in doc["layers"][1][0]

    path = tmp_path / "functions.json"
    save_functions(fs, path)
    loaded = load_functions(path)
    assert loaded == fs
    g = erdos_renyi(30, avg_degree=3, seed=2)
    assert (extract(g, loaded).values == extract(g, fs).values).all()


def test_reference_points_at_first_occurrence():
    a = RelationalFunction(TOTAL, transform=BinTransform(0.5))
    b = RelationalFunction(OUT, transform=BinTransform(0.5))
    fs = FunctionSet("node", ((a, b), (b, a.combine("plus", b))), LearnConfig.parse({"combinators": ["plus"]}))
    assert fs.locate()[b.signature()] == (0, 1)
    doc = _document(fs)
    assert doc["layers"][1][1]["combinator"]["ref"] == {"layer": 0, "index": 1}
    assert function_set_from_dict(doc) == fs


def test_post_without_combinator_rejected(learned):
    _, _, fs = learned
    doc = _document(fs)
    doc["layers"][0][0]["post"] = [{"op": {"tag": "diffuse", "method": "laplacian"}}]
    with pytest.raises(FunctionFileError, match=r"layers\.0\.0\.post"):
        function_set_from_dict(doc)
