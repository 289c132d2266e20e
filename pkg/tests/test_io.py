import json
from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sps

from newmark_bea import io
from newmark_bea.compensation import CompensationError, damping_compensation, fourth_order_compensation
from newmark_bea.harness import Scenario, builtin_scenario, convergence_study, run_scenario
from newmark_bea.integrators import StepperConfig, integrate
from newmark_bea.model import SinusoidBank
from newmark_bea.systems import PAPER_C, PAPER_K, PAPER_M, paper_3dof


# ------------------------------------------------------------ Matrix Market
def test_scalar_array_file(tmp_path):
    p = tmp_path / "a.mtx"
    p.write_text("%%MatrixMarket matrix array real general\n1 1\n2.0\n")
    A = io.load_matrix_market(p)
    assert A.shape == (1, 1) and A[0, 0] == 2.0


def test_symmetric_coordinate_file_is_expanded(tmp_path):
    p = tmp_path / "s.mtx"
    p.write_text("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1.0\n2 1 3.0\n2 2 1.0\n")
    A = io.load_matrix_market(p)
    assert sps.issparse(A)
    assert A[0, 1] == 3.0 and A[1, 0] == 3.0


def test_round_trip_is_bit_identical(tmp_path):
    for name, A in (("K", PAPER_K), ("rand", np.random.default_rng(1).normal(size=(4, 4)) / 3)):
        p = io.write_matrix_market(tmp_path / f"{name}.mtx", A)
        np.testing.assert_array_equal(io.load_matrix_market(p), A)
    S = sps.random(30, 30, density=0.1, random_state=2, format="csr") * np.pi
    p = io.write_matrix_market(tmp_path / "sparse.mtx", S)
    np.testing.assert_array_equal(io.load_matrix_market(p).toarray(), S.toarray())


def test_matrix_market_writes_are_deterministic(tmp_path):
    a = io.write_matrix_market(tmp_path / "a.mtx", PAPER_M).read_bytes()
    b = io.write_matrix_market(tmp_path / "b.mtx", PAPER_M).read_bytes()
    assert a == b


@pytest.mark.parametrize("text", [
    "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n",
    "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n",
    "not a matrix market file\n",
])
def test_unsupported_matrix_market_files(tmp_path, text):
    p = tmp_path / "bad.mtx"
    p.write_text(text)
    with pytest.raises(io.MatrixMarketError):
        io.load_matrix_market(p)


def test_missing_matrix_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        io.load_matrix_market(tmp_path / "missing.mtx")


# ---------------------------------------------------------------- scenarios
MINIMAL = {"system": {"builtin": "oscillator-1dof"}, "methods": [{"name": "newmark"}],
           "run": {"t_end": 0.4, "dt": 0.02}}


def test_minimal_document():
    scn = io.parse_scenario(MINIMAL)
    assert isinstance(scn, Scenario)
    assert scn.dts == [0.02] and scn.methods[0].name == "newmark"


def test_missing_methods_names_the_field():
    doc = {k: v for k, v in MINIMAL.items() if k != "methods"}
    with pytest.raises(io.ScenarioError, match="methods"):
        io.parse_scenario(doc)


def test_unknown_keys_are_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["run"]["speed"] = "fast"
    with pytest.raises(io.ScenarioError) as info:
        io.parse_scenario(doc)
    assert info.value.path == "run" and "speed" in str(info.value)


def test_error_path_points_into_arrays():
    doc = json.loads(json.dumps(MINIMAL))
    doc["methods"].append({"name": "newmark", "gamma": "half"})
    with pytest.raises(io.ScenarioError) as info:
        io.parse_scenario(doc)
    assert info.value.path == "methods/1/gamma"


def test_paper_system_matches_the_constants():
    scn = io.parse_scenario({**MINIMAL, "system": {"builtin": "paper-3dof"}})
    np.testing.assert_array_equal(scn.system.M, PAPER_M)
    np.testing.assert_array_equal(scn.system.K, PAPER_K)
    np.testing.assert_array_equal(scn.system.C, PAPER_C)
    np.testing.assert_array_equal(scn.system.q0, [0.1, 0.0, 0.0])


def test_rational_parameters_and_halvings():
    doc = {"system": {"builtin": "oscillator-1dof"},
           "methods": [{"name": "newmark", "gamma": "1/2", "beta": "1/6", "compensation": "fourth-order"}],
           "run": {"t_end": 0.4, "dt": 0.02, "halvings": 3, "baseline": "exact"}}
    scn = io.parse_scenario(doc)
    assert scn.methods[0].gamma == Fraction(1, 2) and scn.methods[0].beta == Fraction(1, 6)
    assert scn.dts == [0.02, 0.01, 0.005, 0.0025] and scn.exact is not None


def test_grid_mismatch_is_reported():
    doc = json.loads(json.dumps(MINIMAL))
    doc["run"]["dt"] = 0.03
    with pytest.raises(io.ScenarioError) as info:
        io.parse_scenario(doc)
    assert info.value.path == "run/t_end"


def test_matrices_from_files_and_inline(tmp_path):
    io.write_matrix_market(tmp_path / "M.mtx", PAPER_M)
    doc = {"system": {"M": {"path": "M.mtx"}, "K": PAPER_K.tolist(), "C": 0.0},
           "forcing": {"kind": "sinusoid", "amplitudes": [1.0, 0, 0], "frequencies": [1.0, 1, 1]},
           "initial_conditions": {"q0": [1.0, 0, 0]},
           "methods": [{"name": "rk4", "dt": 0.1}], "run": {"t_end": 1.0}}
    path = tmp_path / "scn.json"
    path.write_text(json.dumps(doc))
    scn, raw = io.load_scenario(path)
    np.testing.assert_array_equal(scn.system.M, PAPER_M)
    np.testing.assert_array_equal(scn.system.C, np.zeros((3, 3)))
    assert isinstance(scn.system.forcing, SinusoidBank)
    assert scn.dts == [0.1] and raw == doc


def test_exact_baseline_needs_a_known_solution():
    doc = {**MINIMAL, "system": {"builtin": "paper-3dof"}, "run": {"t_end": 0.4, "dt": 0.02, "baseline": "exact"}}
    with pytest.raises(io.ScenarioError):
        io.parse_scenario(doc)


def test_invalid_json_text():
    with pytest.raises(io.ScenarioError):
        io.parse_scenario("{not json")


def test_forcing_parameter_errors():
    doc = {**MINIMAL, "forcing": {"kind": "pulse", "direction": [1.0]}}
    with pytest.raises(io.ScenarioError) as info:
        io.parse_scenario(doc)
    assert info.value.path == "forcing"


# --------------------------------------------------------------------- CSV
def test_trajectory_csv_header_and_bytes(tmp_path):
    s = paper_3dof()
    tr = integrate(s, StepperConfig(0.1), 0.5)
    a = io.write_trajectory_csv(tmp_path / "a.csv", tr, s)
    b = io.write_trajectory_csv(tmp_path / "b.csv", integrate(s, StepperConfig(0.1), 0.5), s)
    lines = a.read_text().splitlines()
    assert lines[0] == "t,q_1,q_2,q_3,v_1,v_2,v_3,a_1,a_2,a_3,energy"
    assert len(lines) == 7
    assert a.read_bytes() == b.read_bytes()
    row = np.array(lines[1].split(","), dtype=float)
    np.testing.assert_array_equal(row[1:4], s.q0)


def test_negative_zero_is_written_as_zero(tmp_path):
    s = paper_3dof()
    p = io.write_forcing_csv(tmp_path / "f.csv", s.forcing.__class__([-1.0], [1.0]), 0.5, 1.0)
    assert "-0.0" not in p.read_text()


def test_report_and_slope_csv(tmp_path):
    scn = builtin_scenario("order-map")
    rep = convergence_study(scn)
    io.write_report_csv(tmp_path / "report.csv", rep)
    io.write_slopes_csv(tmp_path / "slopes.csv", rep, scn.expectations)
    report = (tmp_path / "report.csv").read_text().splitlines()
    assert report[0] == "method,dt,error_q,error_v,floor_q,floor_v"
    assert len(report) == 1 + len(rep.rows)
    slopes = (tmp_path / "slopes.csv").read_text()
    assert "newmark-g050,q," in slopes and ",pass" in slopes


def test_energy_csv_rejects_mismatched_grids(tmp_path):
    a = np.column_stack([np.arange(3.0), np.ones(3)])
    b = np.column_stack([np.arange(4.0), np.ones(4)])
    with pytest.raises(ValueError):
        io.write_energy_csv(tmp_path / "e.csv", {"a": a, "b": b})


def test_svg_output_is_deterministic(tmp_path):
    series = {"x": ([1, 2, 3], [3, 1, 2])}
    a = io.plot_svg(tmp_path / "a.svg", series, "t", "q", title="demo").read_bytes()
    b = io.plot_svg(tmp_path / "b.svg", series, "t", "q", title="demo").read_bytes()
    assert a == b and a.startswith(b"<?xml")


def test_manifest_holds_the_timestamp(tmp_path):
    p = io.write_manifest(tmp_path / "manifest.json", dt=0.1)
    data = json.loads(p.read_text())
    assert data["dt"] == 0.1 and "created" in data


# ------------------------------------------------------ compensation files
def _dump(comp, out):
    io.write_matrix_market(out / "C_hat.mtx", comp.C)
    io.write_matrix_market(out / "K_hat.mtx", comp.K)
    io.write_manifest(out / "manifest.json", **comp.manifest())


def test_load_compensation_round_trip(tmp_path):
    s = paper_3dof()
    cfg = StepperConfig(0.7, gamma=Fraction(1, 2), beta=Fraction(1, 6))
    comp = fourth_order_compensation(s, 0.7)
    _dump(comp, tmp_path)
    back = io.load_compensation(tmp_path, s, cfg)
    np.testing.assert_array_equal(back.K, comp.K)
    np.testing.assert_array_equal(back.forcing(3.0), comp.forcing(3.0))
    with pytest.raises(CompensationError):
        io.load_compensation(tmp_path, s, StepperConfig(0.35, gamma=Fraction(1, 2), beta=Fraction(1, 6)))
    with pytest.raises(CompensationError):
        io.load_compensation(tmp_path, paper_3dof(damped=False), cfg)


def test_load_damping_compensation_with_float_parameters(tmp_path):
    s = paper_3dof()
    cfg = StepperConfig(0.7, gamma=0.55, beta=0.28)
    _dump(damping_compensation(s, cfg), tmp_path)
    assert io.load_compensation(tmp_path, s, cfg).kind == "damping_compensation"


# --------------------------------------------------------------- output dir
def test_output_directory_priority(monkeypatch):
    monkeypatch.delenv(io.OUTPUT_ENV, raising=False)
    assert str(io.output_directory(None, None)) == "out"
    assert str(io.output_directory(None, "cfg")) == "cfg"
    monkeypatch.setenv(io.OUTPUT_ENV, "env")
    assert str(io.output_directory(None, "cfg")) == "env"
    assert str(io.output_directory("cli", "cfg")) == "cli"


def test_run_scenario_from_document():
    scn = io.parse_scenario({**MINIMAL, "methods": [{"name": "newmark"}, {"name": "reference"}]})
    out = run_scenario(scn)
    assert set(out) == {"newmark", "reference"}
