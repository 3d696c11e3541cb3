import numpy as np
import pytest

from symcert import conic
from symcert.certify import MeasurementRecord, data_problem
from symcert.sdpa import read_sdpa, write_sdpa
from symcert.states import one_axis_twisted


def test_round_trip_preserves_problem_and_value(tmp_path):
    t = one_axis_twisted(8, 0.1)
    recs = [MeasurementRecord.from_target(t, (1, 0, 0), 1, 0.05), MeasurementRecord.from_target(t, (0, 1, 0), 2)]
    problem, _ = data_problem(t, 2, recs)
    path = write_sdpa(problem, tmp_path / "p.dat-s")
    sf = read_sdpa(path)
    ref = conic.compile_problem(problem)
    for a, b in [(sf.c_psd, ref.c_psd), (sf.c_lp, ref.c_lp), (sf.A_psd, ref.A_psd), (sf.A_lp, ref.A_lp), (sf.b, ref.b)]:
        assert np.allclose(a, b, atol=0, rtol=0)
    assert sf.scale == ref.scale
    assert conic.solve(sf).dual_value == pytest.approx(conic.solve(problem).dual_value, abs=1e-8)


def test_lp_only_round_trip(tmp_path):
    sf = conic.StandardForm(np.zeros((0, 0)), np.array([1.0, 2.0]), np.zeros((1, 0, 0)), np.array([[1.0, 1.0]]),
                            np.array([1.0]))
    back = read_sdpa(write_sdpa(sf, tmp_path / "lp.dat-s"))
    assert back.n == 0 and back.p == 2
    assert conic.solve(back).dual_value == pytest.approx(1.0, abs=1e-8)


def test_header_layout(tmp_path):
    problem = conic.ConicProblem(np.diag([1.0, 2.0]), [(np.eye(2), 1.0)])
    lines = write_sdpa(problem, tmp_path / "x.dat-s").read_text().splitlines()
    assert lines[1] == "* value_scale 0.5"
    assert lines[2:5] == ["1", "1", "4"]
    assert lines[5] == "2.0"
