from concurrent.futures import ThreadPoolExecutor
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symcert import conic
from symcert.certify import (
    FIRST_MOMENT,
    SECOND_MOMENT,
    TOTAL_SPIN,
    InconsistentDataError,
    MeasurementRecord,
    angle_grid,
    block_decomposition,
    certified_value,
    data_problem,
    fidelity_from_data,
    fidelity_from_full_rdm,
    optimal_single_measurement,
    pi_rescale,
    select_measurements,
    spin_multiplicity,
    symmetric_overlap_bound,
    symmetric_overlap_lp,
    total_spin_value,
)
from symcert.states import (
    coherent_spin_state,
    dicke_state,
    one_axis_twisted,
    random_symmetric_state,
    uhlmann_fidelity,
)
from symcert.symspace import direction_vector

from conftest import random_unit

X, Y, Z = (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)


def test_record_validation():
    with pytest.raises(ValueError):
        MeasurementRecord(X, 0, 1.0)
    with pytest.raises(ValueError):
        MeasurementRecord(X, 1, 1.0, -0.1)
    with pytest.raises(ValueError):
        MeasurementRecord((1.0, 1.0, 0.0), 1, 1.0)
    rec = MeasurementRecord.from_target(coherent_spin_state(6), X, 1)
    assert rec.value == pytest.approx(3.0)
    assert rec.label.startswith("S1(theta=1.570796,phi=0.000000)")


def test_full_rdm_of_pure_target_at_m_equals_N():
    for seed in range(3):
        t = random_symmetric_state(4, 1, seed)
        assert fidelity_from_full_rdm(t, 4).bound == pytest.approx(1.0, abs=1e-6)


def test_full_rdm_range_checked():
    with pytest.raises(ValueError):
        fidelity_from_full_rdm(dicke_state(3, 1), 4)


def test_empty_data_gives_zero():
    res = fidelity_from_data(one_axis_twisted(20, 0.05), 2, [])
    assert res.bound == pytest.approx(0.0, abs=1e-9)
    assert res.constraints_used == ["trace"]


def test_fully_polarized_data_pins_the_css():
    t = coherent_spin_state(12)
    res = fidelity_from_data(t, 1, [MeasurementRecord.from_target(t, X, 1)])
    assert res.bound == pytest.approx(1.0, abs=1e-6)
    assert res.quantity == "fidelity lower bound"


def test_mixed_target_is_labelled():
    res = fidelity_from_full_rdm(random_symmetric_state(4, 2, 0), 2)
    assert res.quantity == "linear-fidelity lower bound"


def test_record_order_above_m_rejected():
    t = dicke_state(4, 2)
    with pytest.raises(ValueError):
        fidelity_from_data(t, 1, [MeasurementRecord.from_target(t, Z, 2)])


def test_impossible_data_raises_with_certificate():
    t = coherent_spin_state(6)
    rec = MeasurementRecord(X, 1, 4.0)  # |<S_x>| <= 3
    with pytest.raises(InconsistentDataError) as info:
        fidelity_from_data(t, 1, [rec])
    assert "inconsistent" in str(info.value)
    y = info.value.certificate
    problem, _ = data_problem(t, 1, [rec])
    # Farkas: sum y_j A_j <= 0 on the cone while sum y_j b_j > 0
    ray = -conic.dual_slack(conic.ConicProblem(np.zeros_like(problem.objective), problem.equalities), y)
    assert np.linalg.eigvalsh(ray)[-1] < 1e-6
    assert y @ np.array([b for _, b in problem.equalities]) > 0


def test_noisy_impossible_data_raises():
    t = coherent_spin_state(6)
    with pytest.raises(InconsistentDataError):
        fidelity_from_data(t, 1, [MeasurementRecord(X, 1, 3.5, 0.2)])


def test_reported_bound_never_exceeds_dual_value():
    t = one_axis_twisted(30, 0.08)
    recs = [MeasurementRecord.from_target(t, X, 1, 0.1), MeasurementRecord.from_target(t, Y, 2)]
    res = fidelity_from_data(t, 2, recs)
    problem, _ = data_problem(t, 2, recs)
    cv = certified_value(problem, res.dual_certificate)
    assert cv == pytest.approx(res.dual_value, abs=1e-7)
    assert res.bound <= res.dual_value + 1e-12


def test_certified_value_handles_arbitrary_multipliers(rng):
    t = random_symmetric_state(5, 1, 4)
    recs = [MeasurementRecord.from_target(t, random_unit(rng), 1, 0.05) for _ in range(3)]
    problem, _ = data_problem(t, 1, recs)
    for _ in range(20):
        y = rng.standard_normal(1 + len(recs))
        assert certified_value(problem, y) <= conic.solve(problem).primal_value + 1e-9


def random_records(rng, state, m, count, noise=0.0):
    recs = []
    for _ in range(count):
        k = int(rng.integers(1, m + 1))
        delta = float(rng.uniform(0, noise)) if noise else 0.0
        recs.append(MeasurementRecord.from_target(state, random_unit(rng), k, delta))
    return recs


def test_relaxation_and_information_ordering(rng):
    for _ in range(6):
        N = int(rng.integers(3, 9))
        m = int(rng.integers(1, 4))
        t = random_symmetric_state(N, 1, int(rng.integers(1 << 30)))
        full = fidelity_from_full_rdm(t, min(m, N)).bound
        recs = random_records(rng, t, min(m, N), 4)
        trace = [fidelity_from_data(t, min(m, N), recs[:i]).bound for i in range(len(recs) + 1)]
        assert all(b <= full + 1e-6 for b in trace)
        assert all(b2 >= b1 - 1e-6 for b1, b2 in zip(trace, trace[1:]))


def test_full_rdm_bound_non_decreasing_in_m():
    t = random_symmetric_state(6, 1, 99)
    bounds = [fidelity_from_full_rdm(t, m).bound for m in range(1, 7)]
    assert all(b2 >= b1 - 1e-6 for b1, b2 in zip(bounds, bounds[1:]))
    assert bounds[-1] == pytest.approx(1.0, abs=1e-6)


def test_soundness_against_consistent_states(rng):
    # states built to reproduce the data exactly: bound <= their true fidelity
    for _ in range(30):
        N = int(rng.integers(2, 9))
        m = int(rng.integers(1, min(N, 3) + 1))
        target = random_symmetric_state(N, 1, rng)
        experiment = random_symmetric_state(N, int(rng.integers(1, N + 2)), rng)
        recs = random_records(rng, experiment, m, 3, noise=0.2)
        res = fidelity_from_data(target, m, recs)
        assert res.bound <= uhlmann_fidelity(experiment, target) + 1e-6


def test_noise_never_helps(rng):
    for _ in range(8):
        N = int(rng.integers(3, 9))
        t = random_symmetric_state(N, 1, rng)
        recs = random_records(rng, t, 2, 3, noise=0.3)
        wide = [MeasurementRecord(r.direction, r.order, r.value, 2 * r.noise_halfwidth) for r in recs]
        assert fidelity_from_data(t, 2, wide).bound <= fidelity_from_data(t, 2, recs).bound + 1e-7


def test_angle_grid_shape():
    g = angle_grid()
    assert len(g) == 1 + 31 * 16
    assert g[0] == (0.0, 0.0)
    assert all(0 <= th < np.pi and 0 <= ph < np.pi for th, ph in g)


def test_optimal_measurement_on_all_up_state():
    t = dicke_state(6, 0)
    theta, phi, b = optimal_single_measurement(t, 1, 1, n_theta=8, n_phi=4)
    pinned = fidelity_from_data(t, 1, [MeasurementRecord.from_target(t, Z, 1)]).bound
    assert b == pytest.approx(pinned, abs=1e-6)
    assert abs(direction_vector(theta, phi)[2]) == pytest.approx(1.0, abs=1e-3)


def test_optimal_measurement_finds_polarization_axis():
    t = coherent_spin_state(8, direction_vector(1.1, 0.4))
    theta, phi, b = optimal_single_measurement(t, 1, 1, n_theta=8, n_phi=8)
    assert b == pytest.approx(1.0, abs=1e-4)
    assert abs(direction_vector(theta, phi) @ direction_vector(1.1, 0.4)) == pytest.approx(1.0, abs=1e-3)


def test_optimal_measurement_parallel_matches_serial():
    t = random_symmetric_state(4, 1, 7)
    serial = optimal_single_measurement(t, 2, 2, n_theta=4, n_phi=4)
    with ThreadPoolExecutor(2) as pool:
        parallel = optimal_single_measurement(t, 2, 2, n_theta=4, n_phi=4, executor=pool)
    assert parallel == pytest.approx(serial, abs=1e-12)


def test_optimal_measurement_order_check():
    with pytest.raises(ValueError):
        optimal_single_measurement(dicke_state(4, 1), 1, 2)


def test_select_on_css():
    t = coherent_spin_state(6)
    sel = select_measurements(t, 1, 1, n_theta=8, n_phi=4)
    assert len(sel.records) == 1 and sel.records[0].order == 1
    assert abs(np.asarray(sel.records[0].direction)[0]) == pytest.approx(1.0, abs=1e-3)
    assert sel.bound == pytest.approx(fidelity_from_full_rdm(t, 1).bound, abs=1e-5)
    assert sel.baseline == pytest.approx(0.0, abs=1e-9)


def test_select_with_huge_threshold_keeps_nothing():
    sel = select_measurements(coherent_spin_state(4), 2, 2, improvement_tol=1.0, n_theta=4, n_phi=4)
    assert sel.records == [] and sel.bound == pytest.approx(0.0, abs=1e-9)


def test_select_rejects_order_above_m():
    with pytest.raises(ValueError):
        select_measurements(coherent_spin_state(4), 1, 2)


# ----------------------------------------------------------------------------
# symmetric-subspace overlap


def test_block_multiplicities_small():
    d4 = block_decomposition(4)
    assert [(b.S, b.multiplicity) for b in d4.blocks] == [(2, 1), (1, 3), (0, 2)]
    d3 = block_decomposition(3)
    assert [(b.S, b.multiplicity) for b in d3.blocks] == [(1.5, 1), (0.5, 2)]


@given(st.integers(2, 30))
def test_block_dimensions_sum_to_hilbert_space(N):
    d = block_decomposition(N)
    assert sum(b.multiplicity * (b.two_s + 1) for b in d.blocks) == 2**N
    assert all(b.multiplicity >= 1 for b in d.blocks)
    assert spin_multiplicity(N, N) == 1
    assert spin_multiplicity(N, N - 2) == comb(N, 1) - 1


def test_block_ranges():
    d = block_decomposition(5, SECOND_MOMENT)
    assert d.top.lo == 0.25 and d.top.hi == 6.25
    assert block_decomposition(6, SECOND_MOMENT).top.lo == 0.0
    assert block_decomposition(6, FIRST_MOMENT).top.lo == -3
    t = block_decomposition(4, TOTAL_SPIN)
    assert [b.hi for b in t.blocks] == [6.0, 2.0, 0.0]
    with pytest.raises(ValueError):
        block_decomposition(1)
    with pytest.raises(ValueError):
        block_decomposition(4, "third")


@pytest.mark.parametrize("N", [2, 3, 5, 8])
def test_second_moment_block_maximum_is_spectral(N):
    for b in block_decomposition(N, SECOND_MOMENT).blocks:
        S = b.S
        sz2 = np.arange(-S, S + 1) ** 2
        assert b.hi == pytest.approx(sz2.max()) and b.lo == pytest.approx(sz2.min())
        assert b.hi <= S * (S + 1)


def test_first_moment_closed_form_examples():
    d = block_decomposition(4)
    assert symmetric_overlap_bound(d, 2.0) == pytest.approx(1.0)
    assert symmetric_overlap_bound(d, 1.5) == pytest.approx(0.5)
    assert symmetric_overlap_bound(d, 1.0) == 0.0
    assert symmetric_overlap_bound(d, -1.5) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        symmetric_overlap_bound(d, 2.5)


def test_total_spin_of_symmetric_state_gives_unit_overlap():
    for N in (3, 4, 9):
        s = total_spin_value(random_symmetric_state(N, 2, N))
        assert s == pytest.approx(N * (N + 2) / 4)
        d = block_decomposition(N, TOTAL_SPIN)
        assert symmetric_overlap_bound(d, s) == pytest.approx(1.0)
        assert symmetric_overlap_lp(d, s) == pytest.approx(1.0, abs=1e-9)


def test_closed_form_and_lp_agree_on_random_instances(rng):
    kinds = [FIRST_MOMENT, SECOND_MOMENT, TOTAL_SPIN]
    for _ in range(100):
        N = int(rng.integers(2, 13))
        d = block_decomposition(N, kinds[int(rng.integers(3))])
        lo = min(b.lo for b in d.blocks)
        hi = max(b.hi for b in d.blocks)
        s = float(rng.uniform(lo, hi))
        assert symmetric_overlap_lp(d, s) == pytest.approx(symmetric_overlap_bound(d, s), abs=1e-9)


def test_pi_rescale():
    assert pi_rescale(0.999, 1.0) == pytest.approx(0.999)
    assert pi_rescale(0.7, 0.0) == 0.0
    assert pi_rescale(0.5, 0.5) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        pi_rescale(1.2, 0.5)
